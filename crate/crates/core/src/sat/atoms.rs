use std::collections::HashMap;

use crate::formula::{neg_closure, past_bottom, Formula};
use crate::signature::Signature;

use super::SatError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    Present(usize),
    Past(usize),
    Bot,
    Not(usize),
    Imp(usize, usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PresentLeaf {
    Var(u32),
    Act { agent: usize, action: usize },
    Exp(usize),
    /// `□x`, with the node of `x`.
    Nec(usize),
    /// `[A]x`, with the node of `x`.
    Actual(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PastLeaf {
    Prev(usize),
    Hist(usize),
}

/// The indexed negation closure. Every subformula of a member is a node;
/// truth of a node at an atom is computed from the leaf bits.
#[derive(Clone, Debug)]
pub struct ClosureIndex {
    pub sig: Signature,
    pub members: Vec<Formula>,
    pub nodes: Vec<Formula>,
    pub ops: Vec<Op>,
    index: HashMap<Formula, usize>,
    pub present: Vec<(usize, PresentLeaf)>,
    pub past: Vec<(usize, PastLeaf)>,
    /// Positions in `present` of the `□` leaves and the `[A]` leaves.
    pub nec: Vec<usize>,
    pub actual: Vec<usize>,
}

impl ClosureIndex {
    pub fn new(sigma: &[Formula], sig: &Signature) -> Result<Self, SatError> {
        let members = neg_closure(sigma, sig);
        let mut nodes = Vec::new();
        let mut index = HashMap::new();
        for m in &members {
            for s in m.subformulas() {
                if !index.contains_key(&s) {
                    index.insert(s.clone(), nodes.len());
                    nodes.push(s);
                }
            }
        }
        let mut ops = Vec::with_capacity(nodes.len());
        let mut present = Vec::new();
        let mut past = Vec::new();
        for (i, f) in nodes.iter().enumerate() {
            let op = match f {
                Formula::Var(k) => {
                    present.push((i, PresentLeaf::Var(*k)));
                    Op::Present(present.len() - 1)
                }
                Formula::Act { action, agent } => {
                    present.push((i, PresentLeaf::Act { agent: *agent, action: *action }));
                    Op::Present(present.len() - 1)
                }
                Formula::Exp(a) => {
                    present.push((i, PresentLeaf::Exp(*a)));
                    Op::Present(present.len() - 1)
                }
                Formula::Nec(x) => {
                    present.push((i, PresentLeaf::Nec(index[&**x])));
                    Op::Present(present.len() - 1)
                }
                Formula::Actual(x) => {
                    present.push((i, PresentLeaf::Actual(index[&**x])));
                    Op::Present(present.len() - 1)
                }
                Formula::Prev(x) => {
                    past.push((i, PastLeaf::Prev(index[&**x])));
                    Op::Past(past.len() - 1)
                }
                Formula::Hist(x) => {
                    past.push((i, PastLeaf::Hist(index[&**x])));
                    Op::Past(past.len() - 1)
                }
                Formula::Bot => Op::Bot,
                Formula::Not(x) => Op::Not(index[&**x]),
                Formula::Imp(x, y) => Op::Imp(index[&**x], index[&**y]),
                Formula::Macro(m) => return Err(SatError::Formula(crate::formula::FormulaError::ResidualMacro(m.name.name().into()))),
            };
            ops.push(op);
        }
        if past.len() > 128 {
            return Err(SatError::TooLarge(format!("{} past leaves (cap 128)", past.len())));
        }
        let nec = present.iter().enumerate().filter(|(_, (_, l))| matches!(l, PresentLeaf::Nec(_))).map(|(k, _)| k).collect::<Vec<_>>();
        let actual = present.iter().enumerate().filter(|(_, (_, l))| matches!(l, PresentLeaf::Actual(_))).map(|(k, _)| k).collect::<Vec<_>>();
        if nec.len() > 64 || actual.len() > 64 {
            return Err(SatError::TooLarge("more than 64 box or actual leaves".into()));
        }
        if sig.agent_count() * sig.action_count() > 64 {
            return Err(SatError::TooLarge("agents times actions exceeds 64".into()));
        }
        Ok(ClosureIndex { sig: sig.clone(), members, nodes, ops, index, present, past, nec, actual })
    }

    pub fn node(&self, f: &Formula) -> Option<usize> {
        self.index.get(f).copied()
    }

    /// Truth of every node given present bits and past bits.
    pub fn eval_into(&self, present: u64, past: u128, out: &mut Vec<bool>) {
        out.clear();
        for op in &self.ops {
            let v = match *op {
                Op::Present(i) => present >> i & 1 == 1,
                Op::Past(i) => past >> i & 1 == 1,
                Op::Bot => false,
                Op::Not(x) => !out[x],
                Op::Imp(x, y) => !out[x] || out[y],
            };
            out.push(v);
        }
    }

    /// Past bits of a child whose parent has the given node truths.
    pub fn child_key(&self, truth: &[bool]) -> u128 {
        let mut key = 0u128;
        for (i, (node, leaf)) in self.past.iter().enumerate() {
            let v = match *leaf {
                PastLeaf::Prev(x) => truth[x],
                PastLeaf::Hist(x) => truth[x] && truth[*node],
            };
            if v {
                key |= 1 << i;
            }
        }
        key
    }

    /// Past bits of a moment without a parent.
    pub fn root_key(&self) -> u128 {
        if self.past.len() == 128 {
            u128::MAX
        } else {
            (1u128 << self.past.len()) - 1
        }
    }

    /// Members of the negation closure true under the given node truths.
    pub fn members_true(&self, truth: &[bool]) -> Vec<Formula> {
        self.members.iter().filter(|m| truth[self.index[*m]]).cloned().collect()
    }
}

/// A full assignment to the leaves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub present: u64,
    pub past: u128,
}

fn conjuncts(f: &Formula, out: &mut Vec<Formula>) {
    if f.action_agent().is_none() {
        if let Formula::Not(inner) = f {
            if let Formula::Imp(a, b) = &**inner {
                if let Formula::Not(b) = &**b {
                    conjuncts(a, out);
                    conjuncts(b, out);
                    return;
                }
            }
        }
    }
    out.push(f.clone());
}

/// The local coherence conditions of atoms, as node-level checks.
pub struct Coherence {
    /// `(Pφ, ◆φ, ◆Pφ)`
    past: Vec<(usize, usize, usize)>,
    /// `(Hx, ■x, ■Hx)`
    a9: Vec<(usize, usize, usize)>,
    /// `(◇e, ◇¬e)`
    a6: Vec<(usize, usize)>,
    /// `◇(t1 ∧ … ∧ tk)` with the nodes of each `◇ti`.
    a5: Vec<(usize, Vec<usize>)>,
    h_bot: usize,
    p_h_bot: usize,
}

impl Coherence {
    pub fn new(cl: &ClosureIndex) -> Self {
        let mut past = Vec::new();
        let mut a9 = Vec::new();
        let mut a6 = Vec::new();
        let mut a5 = Vec::new();
        for (i, f) in cl.nodes.iter().enumerate() {
            for g in [f.clone(), f.neg()] {
                if let Some(x) = g.as_past() {
                    let (Some(a), Some(b)) = (cl.node(&Formula::prev_poss(x.clone())), cl.node(&Formula::prev_poss(g.clone()))) else {
                        continue;
                    };
                    if let Some(p) = cl.node(&g) {
                        past.push((p, a, b));
                    }
                }
                if let Some(Formula::Exp(e)) = g.as_poss() {
                    if let (Some(p), Some(q)) = (cl.node(&g), cl.node(&Formula::poss(Formula::not(Formula::exp(*e))))) {
                        a6.push((p, q));
                    }
                }
                if let Some(x) = g.as_poss() {
                    let mut cs = Vec::new();
                    conjuncts(x, &mut cs);
                    if cs.len() >= 2 && cs.iter().all(|c| c.action_agent().is_some()) {
                        let parts: Option<Vec<usize>> = cs.iter().map(|c| cl.node(&Formula::poss(c.clone()))).collect();
                        if let (Some(parts), Some(p)) = (parts, cl.node(&g)) {
                            a5.push((p, parts));
                        }
                    }
                }
            }
            if let Formula::Hist(x) = f {
                if let (Some(a), Some(b)) = (cl.node(&Formula::prev((**x).clone())), cl.node(&Formula::prev(f.clone()))) {
                    a9.push((i, a, b));
                }
            }
        }
        past.sort_unstable();
        past.dedup();
        a6.sort_unstable();
        a6.dedup();
        a5.sort_unstable();
        a5.dedup();
        let h_bot = cl.node(&Formula::hist(Formula::Bot)).expect("H⊥ is always in the closure");
        let p_h_bot = cl.node(&past_bottom()).expect("PH⊥ is always in the closure");
        Coherence { past, a9, a6, a5, h_bot, p_h_bot }
    }

    pub fn holds(&self, cl: &ClosureIndex, t: &[bool]) -> bool {
        if !(t[self.h_bot] || t[self.p_h_bot]) {
            return false;
        }
        if t[self.h_bot] && !cl.past.iter().all(|(n, _)| t[*n]) {
            return false;
        }
        self.past.iter().all(|&(p, a, b)| t[p] == (t[a] || t[b]))
            && self.a9.iter().all(|&(h, a, b)| t[h] == (t[a] && t[b]))
            && self.a6.iter().all(|&(p, q)| !t[p] || t[q])
            && self.a5.iter().all(|(p, parts)| !parts.iter().all(|&q| t[q]) || t[*p])
    }
}

/// Every leaf assignment satisfying the local coherence conditions, as
/// sets of true members of the negation closure.
pub fn atoms(sigma: &[Formula], sig: &Signature, cap_leaves: usize) -> Result<Vec<Vec<Formula>>, SatError> {
    let cl = ClosureIndex::new(sigma, sig)?;
    let (np, nq) = (cl.present.len(), cl.past.len());
    if np + nq > cap_leaves {
        return Err(SatError::TooLarge(format!("{} leaves (cap {cap_leaves})", np + nq)));
    }
    let coh = Coherence::new(&cl);
    let mut out = Vec::new();
    let mut t = Vec::new();
    for past in 0..(1u128 << nq) {
        for present in 0..(1u64 << np) {
            cl.eval_into(present, past, &mut t);
            if coh.holds(&cl, &t) {
                out.push(cl.members_true(&t));
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdgeKinds {
    pub next: bool,
    pub actual: bool,
}

/// Candidate edges from a parent atom to a child atom: the child's `■` and
/// `H` leaves must be exactly what the parent dictates, the parent's `□`
/// members must hold in the child, and an actual edge additionally makes
/// the parent's `[A]` members hold in the child.
pub fn candidate_edge(cl: &ClosureIndex, parent: &[bool], child: &[bool]) -> EdgeKinds {
    let past_ok = cl.past.iter().all(|&(n, leaf)| {
        child[n]
            == match leaf {
                PastLeaf::Prev(x) => parent[x],
                PastLeaf::Hist(x) => parent[x] && parent[n],
            }
    });
    let box_ok = cl.present.iter().all(|&(n, leaf)| match leaf {
        PresentLeaf::Nec(x) => !parent[n] || child[x],
        _ => true,
    });
    let next = past_ok && box_ok;
    let actual = next
        && cl.present.iter().all(|&(n, leaf)| match leaf {
            PresentLeaf::Actual(x) => !parent[n] || child[x],
            _ => true,
        });
    EdgeKinds { next, actual }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn truth(cl: &ClosureIndex, a: &[Formula]) -> Vec<bool> {
        cl.nodes.iter().map(|n| eval_set(cl, a, n)).collect()
    }

    fn eval_set(cl: &ClosureIndex, a: &[Formula], f: &Formula) -> bool {
        match f {
            Formula::Bot => false,
            Formula::Not(x) => !eval_set(cl, a, x),
            Formula::Imp(x, y) => !eval_set(cl, a, x) || eval_set(cl, a, y),
            leaf => a.contains(leaf),
        }
    }

    #[test]
    fn every_atom_decides_each_member() {
        let sig = Signature::minimal();
        let p = parse("p1").unwrap();
        let all = atoms(&[p.clone()], &sig, 20).unwrap();
        assert!(!all.is_empty());
        let cl = ClosureIndex::new(&[p.clone()], &sig).unwrap();
        for a in &all {
            for m in &cl.members {
                assert_ne!(a.contains(m), a.contains(&m.neg()), "{m}");
            }
            assert!(a.contains(&Formula::hist(Formula::Bot)) || a.contains(&past_bottom()));
        }
    }

    #[test]
    fn contradiction_in_no_atom() {
        let f = parse("p1 & ~p1").unwrap();
        let all = atoms(&[f.clone()], &Signature::minimal(), 20).unwrap();
        assert!(all.iter().all(|a| !a.contains(&f)));
    }

    #[test]
    fn box_bottom_has_no_successor() {
        let f = parse("[]false").unwrap();
        let sig = Signature::minimal();
        let cl = ClosureIndex::new(&[f.clone()], &sig).unwrap();
        let all = atoms(&[f.clone()], &sig, 20).unwrap();
        for y in all.iter().filter(|a| a.contains(&f)) {
            let ty = truth(&cl, y);
            for z in &all {
                assert!(!candidate_edge(&cl, &ty, &truth(&cl, z)).next);
            }
        }
    }

    #[test]
    fn history_decomposes_over_edges() {
        let f = parse("H p1").unwrap();
        let sig = Signature::minimal();
        let cl = ClosureIndex::new(&[f.clone()], &sig).unwrap();
        let all = atoms(&[f.clone()], &sig, 20).unwrap();
        let p = parse("p1").unwrap();
        for z in all.iter().filter(|a| a.contains(&f)) {
            let tz = truth(&cl, z);
            for y in &all {
                let ty = truth(&cl, y);
                if candidate_edge(&cl, &ty, &tz).next {
                    assert!(y.contains(&p) && y.contains(&f));
                }
            }
        }
    }
}
