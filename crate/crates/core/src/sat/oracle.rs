//! Exhaustive search over small tree models. Truth of each subformula at
//! each moment is a bit column over all valuations of the symbols occurring
//! in the formula, so one pass over a tree shape covers every valuation.

use std::collections::{BTreeSet, HashSet};

use crate::checker::EvalContext;
use crate::formula::{expand_all, Formula};
use crate::model::{validate, Moment, TreeModel};
use crate::signature::Signature;

use super::SatError;

#[derive(Clone, Copy, Debug)]
pub struct OracleBounds {
    pub depth: usize,
    pub branching: usize,
    pub moments: usize,
    /// Largest number of valuation bits (moments times symbols) searched.
    pub bits: usize,
}

impl Default for OracleBounds {
    fn default() -> Self {
        OracleBounds { depth: 3, branching: 3, moments: 6, bits: 20 }
    }
}

#[derive(Clone, Debug)]
pub enum OracleResult {
    Sat { model: TreeModel, moment: usize },
    NoModelWithinBound,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Symbol {
    Var(u32),
    Act(usize, usize),
    Exp(usize),
}

fn symbols(f: &Formula, out: &mut BTreeSet<Symbol>) {
    match f {
        Formula::Var(k) => {
            out.insert(Symbol::Var(*k));
        }
        Formula::Act { action, agent } => {
            out.insert(Symbol::Act(*agent, *action));
        }
        Formula::Exp(a) => {
            out.insert(Symbol::Exp(*a));
        }
        other => other.children().into_iter().for_each(|c| symbols(c, out)),
    }
}

/// Parent arrays of all rooted unordered trees within the bounds, one per
/// isomorphism class, smallest first. Index 0 is the root and parents
/// precede children.
pub fn tree_shapes(depth: usize, branching: usize, moments: usize) -> Vec<Vec<Option<usize>>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for n in 1..=moments {
        let mut parent = vec![0usize; n];
        loop {
            let p: Vec<Option<usize>> = (0..n).map(|i| if i == 0 { None } else { Some(parent[i]) }).collect();
            if shape_ok(&p, depth, branching) && seen.insert(canonical(&p, 0)) {
                out.push(p);
            }
            // Next parent array with parent[i] < i.
            let mut i = n;
            loop {
                if i <= 1 {
                    break;
                }
                i -= 1;
                parent[i] += 1;
                if parent[i] < i {
                    break;
                }
                parent[i] = 0;
                if i == 1 {
                    i = 0;
                    break;
                }
            }
            if i == 0 || n == 1 {
                break;
            }
        }
    }
    out
}

fn shape_ok(p: &[Option<usize>], depth: usize, branching: usize) -> bool {
    let mut d = vec![0usize; p.len()];
    let mut kids = vec![0usize; p.len()];
    for i in 1..p.len() {
        let q = p[i].unwrap();
        d[i] = d[q] + 1;
        kids[q] += 1;
    }
    d.iter().all(|&x| x <= depth) && kids.iter().all(|&k| k <= branching)
}

fn canonical(p: &[Option<usize>], v: usize) -> String {
    let mut kids: Vec<String> = (0..p.len()).filter(|&c| p[c] == Some(v)).map(|c| canonical(p, c)).collect();
    kids.sort();
    format!("({})", kids.concat())
}

struct Table {
    words: usize,
    mask: u64,
}

impl Table {
    fn new(bits: usize) -> Self {
        let words = if bits >= 6 { 1 << (bits - 6) } else { 1 };
        let mask = if bits >= 6 { u64::MAX } else { (1u64 << (1 << bits)) - 1 };
        Table { words, mask }
    }

    fn ones(&self) -> Vec<u64> {
        vec![self.mask; self.words]
    }

    fn zeros(&self) -> Vec<u64> {
        vec![0; self.words]
    }

    fn column(&self, bit: usize) -> Vec<u64> {
        const LOW: [u64; 6] = [
            0xAAAA_AAAA_AAAA_AAAA,
            0xCCCC_CCCC_CCCC_CCCC,
            0xF0F0_F0F0_F0F0_F0F0,
            0xFF00_FF00_FF00_FF00,
            0xFFFF_0000_FFFF_0000,
            0xFFFF_FFFF_0000_0000,
        ];
        if bit < 6 {
            vec![LOW[bit] & self.mask; self.words]
        } else {
            (0..self.words).map(|w| if w >> (bit - 6) & 1 == 1 { u64::MAX } else { 0 }).collect()
        }
    }
}

fn and_into(a: &mut [u64], b: &[u64]) {
    a.iter_mut().zip(b).for_each(|(x, y)| *x &= y);
}

fn or_into(a: &mut [u64], b: &[u64]) {
    a.iter_mut().zip(b).for_each(|(x, y)| *x |= y);
}

/// Does some model within the bounds satisfy `phi` at some moment?
pub fn oracle_search(phi: &Formula, sig: Option<&Signature>, bounds: &OracleBounds) -> Result<OracleResult, SatError> {
    let (agents, actions) = phi.required_counts();
    let sig = match sig {
        Some(s) => s.widened(agents, actions),
        None => Signature::with_counts(agents.max(1), actions.max(1)),
    };
    let phi = expand_all(phi, sig.agent_count())?;
    let mut syms = BTreeSet::new();
    symbols(&phi, &mut syms);
    let syms: Vec<Symbol> = syms.into_iter().collect();
    let nodes = phi.subformulas();
    let node_of = |f: &Formula| nodes.iter().position(|n| n == f).unwrap();
    let has_actual = nodes.iter().any(|n| matches!(n, Formula::Actual(_)));
    let exp_agents: Vec<usize> = syms.iter().filter_map(|s| if let Symbol::Exp(a) = s { Some(*a) } else { None }).collect();
    let mut act_agents: Vec<usize> = syms.iter().filter_map(|s| if let Symbol::Act(a, _) = s { Some(*a) } else { None }).collect();
    act_agents.dedup();

    for shape in tree_shapes(bounds.depth, bounds.branching, bounds.moments) {
        let n = shape.len();
        let bits = n * syms.len();
        if bits > bounds.bits {
            continue;
        }
        let t = Table::new(bits);
        let children: Vec<Vec<usize>> = (0..n).map(|v| (0..n).filter(|&c| shape[c] == Some(v)).collect()).collect();
        let sym_col = |m: usize, s: usize| t.column(m * syms.len() + s);
        let sym_index = |s: Symbol| syms.iter().position(|&x| x == s).unwrap();

        // Frame conditions that depend on the valuation.
        let mut frame = t.ones();
        for v in 0..n {
            if children[v].is_empty() {
                continue;
            }
            for &a in &exp_agents {
                let si = sym_index(Symbol::Exp(a));
                let (mut some, mut off) = (t.zeros(), t.zeros());
                for &c in &children[v] {
                    let col = sym_col(c, si);
                    or_into(&mut some, &col);
                    let neg: Vec<u64> = col.iter().map(|x| !x & t.mask).collect();
                    or_into(&mut off, &neg);
                }
                let ok: Vec<u64> = some.iter().zip(&off).map(|(s, o)| (!s | o) & t.mask).collect();
                and_into(&mut frame, &ok);
            }
            if act_agents.len() >= 2 {
                let agent_syms: Vec<Vec<usize>> = act_agents
                    .iter()
                    .map(|&a| (0..syms.len()).filter(|&s| matches!(syms[s], Symbol::Act(b, _) if b == a)).collect())
                    .collect();
                let eq = |c: usize, d: usize, k: usize| -> Vec<u64> {
                    let mut out = t.ones();
                    for &s in &agent_syms[k] {
                        let (x, y) = (sym_col(c, s), sym_col(d, s));
                        let same: Vec<u64> = x.iter().zip(&y).map(|(p, q)| !(p ^ q) & t.mask).collect();
                        and_into(&mut out, &same);
                    }
                    out
                };
                let kids = &children[v];
                let mut idx = vec![0usize; act_agents.len()];
                loop {
                    let mut realized = t.zeros();
                    for &c in kids {
                        let mut all = t.ones();
                        for (k, &i) in idx.iter().enumerate() {
                            and_into(&mut all, &eq(c, kids[i], k));
                        }
                        or_into(&mut realized, &all);
                    }
                    and_into(&mut frame, &realized);
                    let mut k = 0;
                    while k < idx.len() {
                        idx[k] += 1;
                        if idx[k] < kids.len() {
                            break;
                        }
                        idx[k] = 0;
                        k += 1;
                    }
                    if k == idx.len() {
                        break;
                    }
                }
            }
        }
        if frame.iter().all(|&w| w == 0) {
            continue;
        }

        let internal: Vec<usize> = (0..n).filter(|&v| !children[v].is_empty()).collect();
        let mut choice = vec![0usize; internal.len()];
        loop {
            let actual: Vec<Option<usize>> = (0..n)
                .map(|v| match internal.iter().position(|&x| x == v) {
                    Some(k) if choice[k] > 0 => Some(children[v][choice[k] - 1]),
                    _ => None,
                })
                .collect();
            let mut cols: Vec<Vec<Vec<u64>>> = Vec::with_capacity(nodes.len());
            for f in &nodes {
                let kid = |x: &Formula| node_of(x);
                let mut per: Vec<Vec<u64>> = Vec::with_capacity(n);
                for m in 0..n {
                    let col = match f {
                        Formula::Var(k) => sym_col(m, sym_index(Symbol::Var(*k))),
                        Formula::Act { action, agent } => sym_col(m, sym_index(Symbol::Act(*agent, *action))),
                        Formula::Exp(a) => sym_col(m, sym_index(Symbol::Exp(*a))),
                        Formula::Bot => t.zeros(),
                        Formula::Not(x) => cols[kid(x)][m].iter().map(|w| !w & t.mask).collect(),
                        Formula::Imp(x, y) => {
                            cols[kid(x)][m].iter().zip(&cols[kid(y)][m]).map(|(a, b)| (!a | b) & t.mask).collect()
                        }
                        Formula::Nec(x) => {
                            let mut c = t.ones();
                            for &ch in &children[m] {
                                and_into(&mut c, &cols[kid(x)][ch]);
                            }
                            c
                        }
                        Formula::Actual(x) => match actual[m] {
                            Some(ch) => cols[kid(x)][ch].clone(),
                            None => t.ones(),
                        },
                        Formula::Prev(x) => match shape[m] {
                            Some(p) => cols[kid(x)][p].clone(),
                            None => t.ones(),
                        },
                        Formula::Hist(x) => match shape[m] {
                            Some(p) => {
                                let mut c = cols[kid(x)][p].clone();
                                and_into(&mut c, &per[p]);
                                c
                            }
                            None => t.ones(),
                        },
                        Formula::Macro(_) => unreachable!("expanded above"),
                    };
                    per.push(col);
                }
                cols.push(per);
            }
            let top = cols.last().unwrap();
            for (w, col) in top.iter().enumerate() {
                for (word, (&x, &fr)) in col.iter().zip(&frame).enumerate() {
                    let hit = x & fr;
                    if hit != 0 {
                        let val = (word as u64) << 6 | hit.trailing_zeros() as u64;
                        let model = build(&sig, &shape, &actual, &syms, val);
                        debug_assert!(validate(&model).ok());
                        debug_assert!(EvalContext::new(&model).eval(w, &phi).unwrap());
                        return Ok(OracleResult::Sat { model, moment: w });
                    }
                }
            }
            if !has_actual {
                break;
            }
            let mut k = 0;
            while k < choice.len() {
                choice[k] += 1;
                if choice[k] <= children[internal[k]].len() {
                    break;
                }
                choice[k] = 0;
                k += 1;
            }
            if k == choice.len() {
                break;
            }
        }
    }
    Ok(OracleResult::NoModelWithinBound)
}

fn build(sig: &Signature, shape: &[Option<usize>], actual: &[Option<usize>], syms: &[Symbol], val: u64) -> TreeModel {
    let moments = (0..shape.len())
        .map(|m| {
            let mut mo = Moment::new(format!("m{m}"), sig.agent_count());
            for (s, sym) in syms.iter().enumerate() {
                if val >> (m * syms.len() + s) & 1 == 0 {
                    continue;
                }
                match *sym {
                    Symbol::Var(k) => {
                        mo.vars.insert(k);
                    }
                    Symbol::Act(a, j) => mo.performed[a] |= 1 << j,
                    Symbol::Exp(a) => mo.expected[a] = true,
                }
            }
            mo
        })
        .collect();
    let actual = actual.iter().map(|a| a.iter().copied().collect()).collect();
    TreeModel::from_parts(sig.clone(), moments, shape.to_vec(), actual).expect("shapes are trees")
}

/// Whether the oracle's search space contains a model with the same shape
/// as `m` for a formula with `symbol_count` symbols.
pub fn covers(bounds: &OracleBounds, m: &TreeModel, symbol_count: usize) -> bool {
    let depth = (0..m.len()).map(|w| m.past_depth(w)).max().unwrap_or(0);
    let branching = (0..m.len()).map(|w| m.children(w).len()).max().unwrap_or(0);
    depth <= bounds.depth && branching <= bounds.branching && m.len() <= bounds.moments && m.len() * symbol_count <= bounds.bits
}

pub fn symbol_count(phi: &Formula) -> usize {
    let mut s = BTreeSet::new();
    symbols(phi, &mut s);
    s.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    #[test]
    fn shape_counts() {
        // Unordered rooted trees with 1..=5 nodes: 1, 1, 2, 4, 9.
        assert_eq!(tree_shapes(10, 10, 5).len(), 17);
        // The five-node path is the only one deeper than 3.
        assert_eq!(tree_shapes(3, 10, 5).len(), 16);
    }

    #[test]
    fn small_searches() {
        let b = OracleBounds::default();
        match oracle_search(&parse("<>p1").unwrap(), None, &b).unwrap() {
            OracleResult::Sat { model, .. } => assert!(model.len() <= 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(oracle_search(&parse("<P>p1 & H~p1").unwrap(), None, &b).unwrap(), OracleResult::NoModelWithinBound));
        assert!(matches!(oracle_search(&parse("<A>p1 & <>~p1").unwrap(), None, &b).unwrap(), OracleResult::Sat { .. }));
        assert!(matches!(oracle_search(&parse("<>e@a1 & []e@a1").unwrap(), None, &b).unwrap(), OracleResult::NoModelWithinBound));
        assert!(matches!(
            oracle_search(&parse("<>dw1@a1 & <>dw1@a2 & [](dw1@a1 -> ~dw1@a2)").unwrap(), None, &b).unwrap(),
            OracleResult::NoModelWithinBound
        ));
    }
}
