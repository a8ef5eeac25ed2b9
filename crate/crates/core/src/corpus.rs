//! Random formulas, random valid models and axiom instances for the
//! property suites.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::action::{translate, ActionType, AgentBoundAction};
use crate::formula::{Formula, Interval, MacroCall, MacroName, MACRO_NAMES};
use crate::model::{Moment, TreeModel};
use crate::signature::Signature;

#[derive(Clone, Debug)]
pub struct FormulaGen {
    pub vars: u32,
    pub agents: usize,
    pub actions: usize,
    /// Nesting of modal operators.
    pub modal_depth: usize,
    pub size: usize,
    pub past: bool,
    pub actual: bool,
    pub expectations: bool,
    pub macros: bool,
}

impl Default for FormulaGen {
    fn default() -> Self {
        FormulaGen { vars: 2, agents: 1, actions: 2, modal_depth: 3, size: 8, past: true, actual: true, expectations: true, macros: false }
    }
}

pub fn random_action<R: Rng>(rng: &mut R, actions: usize, depth: usize) -> ActionType {
    if depth == 0 || rng.gen_bool(0.5) {
        return ActionType::atomic(rng.gen_range(0..actions));
    }
    match rng.gen_range(0..3) {
        0 => ActionType::complement(random_action(rng, actions, depth - 1)),
        1 => ActionType::union(random_action(rng, actions, depth - 1), random_action(rng, actions, depth - 1)),
        _ => ActionType::intersection(random_action(rng, actions, depth - 1), random_action(rng, actions, depth - 1)),
    }
}

pub fn random_bound<R: Rng>(rng: &mut R, g: &FormulaGen) -> AgentBoundAction {
    random_action(rng, g.actions, 2).bind(rng.gen_range(0..g.agents))
}

fn leaf<R: Rng>(rng: &mut R, g: &FormulaGen) -> Formula {
    let r = rng.gen_range(0..10);
    match r {
        0 => Formula::bot(),
        1 | 2 if g.actions > 0 => Formula::act(rng.gen_range(0..g.actions), rng.gen_range(0..g.agents)),
        3 if g.expectations => Formula::exp(rng.gen_range(0..g.agents)),
        _ => Formula::var(rng.gen_range(1..=g.vars)),
    }
}

pub fn random_formula<R: Rng>(rng: &mut R, g: &FormulaGen) -> Formula {
    gen(rng, g, g.size, g.modal_depth)
}

fn gen<R: Rng>(rng: &mut R, g: &FormulaGen, size: usize, modal: usize) -> Formula {
    if size <= 1 {
        return leaf(rng, g);
    }
    let mut ops = vec![0, 1, 2, 3];
    if modal > 0 {
        ops.extend([4, 5]);
        if g.actual {
            ops.extend([6, 7]);
        }
        if g.past {
            ops.extend([8, 9, 10, 11]);
        }
        if g.macros {
            ops.push(12);
        }
    }
    let rest = size - 1;
    let split = |rng: &mut R| rng.gen_range(1..rest.max(2));
    match *ops.choose(rng).unwrap() {
        0 => Formula::not(gen(rng, g, rest, modal)),
        1 => {
            let k = split(rng);
            Formula::imp(gen(rng, g, k, modal), gen(rng, g, rest.saturating_sub(k).max(1), modal))
        }
        2 => {
            let k = split(rng);
            Formula::and(gen(rng, g, k, modal), gen(rng, g, rest.saturating_sub(k).max(1), modal))
        }
        3 => {
            let k = split(rng);
            Formula::or(gen(rng, g, k, modal), gen(rng, g, rest.saturating_sub(k).max(1), modal))
        }
        4 => Formula::nec(gen(rng, g, rest, modal - 1)),
        5 => Formula::poss(gen(rng, g, rest, modal - 1)),
        6 => Formula::actual(gen(rng, g, rest, modal - 1)),
        7 => Formula::actual_poss(gen(rng, g, rest, modal - 1)),
        8 => Formula::prev(gen(rng, g, rest, modal - 1)),
        9 => Formula::prev_poss(gen(rng, g, rest, modal - 1)),
        10 => Formula::hist(gen(rng, g, rest, modal - 1)),
        11 => Formula::past(gen(rng, g, rest, modal - 1)),
        _ => {
            let goal = gen(rng, g, rest.min(3), 0);
            Formula::call(random_macro(rng, g, goal))
        }
    }
}

pub fn random_macro<R: Rng>(rng: &mut R, g: &FormulaGen, goal: Formula) -> MacroCall {
    let (name, _) = *MACRO_NAMES.choose(rng).unwrap();
    let n = if rng.gen_bool(0.2) { Interval::Infinite } else { Interval::Finite(rng.gen_range(0..4)) };
    if name == MacroName::Forbear {
        return MacroCall::forbear(random_bound(rng, g));
    }
    if name.any_agent() {
        return MacroCall::any_agent(name, random_action(rng, g.actions, 2), goal, n);
    }
    if name.takes_interval() {
        MacroCall::interval(name, random_bound(rng, g), goal, n)
    } else {
        MacroCall::bound(name, random_bound(rng, g), goal)
    }
}

#[derive(Clone, Debug)]
pub struct ModelGen {
    pub max_moments: usize,
    pub agents: usize,
    pub actions: usize,
    pub vars: u32,
    pub actual_prob: f64,
}

impl Default for ModelGen {
    fn default() -> Self {
        ModelGen { max_moments: 30, agents: 2, actions: 2, vars: 2, actual_prob: 0.6 }
    }
}

/// A random tree model passing every frame check. Each moment's children
/// realize a product of per-agent choices (plus duplicates), so agents are
/// independent, and no moment has only expected children.
pub fn random_model<R: Rng>(rng: &mut R, g: &ModelGen) -> TreeModel {
    let sig = Signature::with_counts(g.agents, g.actions);
    let target = rng.gen_range(1..=g.max_moments);
    let vectors = 1u64 << g.actions;
    let fresh = |rng: &mut R, id: usize| {
        let mut m = Moment::new(format!("w{id}"), g.agents);
        for k in 1..=g.vars {
            if rng.gen_bool(0.5) {
                m.vars.insert(k);
            }
        }
        for a in 0..g.agents {
            m.performed[a] = rng.gen_range(0..vectors);
        }
        m
    };
    let mut moments = vec![fresh(rng, 0)];
    let mut parent = vec![None];
    let mut actual: Vec<Vec<usize>> = vec![Vec::new()];
    let mut frontier = vec![0usize];
    while !frontier.is_empty() && moments.len() < target {
        let w = frontier.swap_remove(rng.gen_range(0..frontier.len()));
        if w != 0 && rng.gen_bool(0.15) {
            continue;
        }
        let room = target - moments.len();
        let mut combos: Vec<Vec<u64>> = vec![vec![]];
        for _ in 0..g.agents {
            let k = if room >= 2 { rng.gen_range(1..=2) } else { 1 };
            let mut picks: Vec<u64> = (0..vectors).collect();
            picks.shuffle(rng);
            picks.truncate(k.min(vectors as usize));
            combos = combos.into_iter().flat_map(|c| picks.iter().map(move |&v| [c.clone(), vec![v]].concat())).collect();
        }
        if combos.len() > room {
            combos.shuffle(rng);
            let first = combos[0].clone();
            combos = vec![first];
        }
        if combos.len() < room && rng.gen_bool(0.3) {
            let dup = combos.choose(rng).unwrap().clone();
            combos.push(dup);
        }
        let mut kids = Vec::new();
        for c in combos {
            let id = moments.len();
            let mut m = fresh(rng, id);
            m.performed = c;
            for a in 0..g.agents {
                m.expected[a] = rng.gen_bool(0.5);
            }
            moments.push(m);
            parent.push(Some(w));
            actual.push(Vec::new());
            kids.push(id);
            frontier.push(id);
        }
        for a in 0..g.agents {
            if kids.iter().all(|&c| moments[c].expected[a]) {
                let c = *kids.choose(rng).unwrap();
                moments[c].expected[a] = false;
            }
        }
        if rng.gen_bool(g.actual_prob) {
            actual[w].push(*kids.choose(rng).unwrap());
        }
    }
    TreeModel::from_parts(sig, moments, parent, actual).expect("generated parts form a tree")
}

pub const AXIOMS: [&str; 15] =
    ["A0", "A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8", "A9", "A10", "A11", "A12", "A13", "A14"];

/// An instance of axiom schema `k` (0 to 14) with random formula arguments.
/// A5 ranges over sets of distinct agents and action types, A6 over agents;
/// A13 has a single instance.
pub fn axiom_instance<R: Rng>(rng: &mut R, k: usize, g: &FormulaGen) -> Formula {
    let phi = random_formula(rng, g);
    let psi = random_formula(rng, g);
    let k_schema = |op: fn(Formula) -> Formula, phi: Formula, psi: Formula| {
        Formula::imp(op(Formula::imp(phi.clone(), psi.clone())), Formula::imp(op(phi), op(psi)))
    };
    match k {
        0 => match rng.gen_range(0..4) {
            0 => Formula::imp(phi.clone(), Formula::imp(psi, phi)),
            1 => Formula::or(phi.clone(), Formula::not(phi)),
            2 => Formula::imp(Formula::not(Formula::not(phi.clone())), phi),
            _ => Formula::iff(Formula::and(phi.clone(), psi.clone()), Formula::not(Formula::imp(phi, Formula::not(psi)))),
        },
        1 => k_schema(Formula::nec, phi, psi),
        2 => k_schema(Formula::actual, phi, psi),
        3 => Formula::imp(Formula::actual_poss(phi.clone()), Formula::actual(phi)),
        4 => Formula::imp(Formula::nec(phi.clone()), Formula::actual(phi)),
        5 => {
            let mut agents: Vec<usize> = (0..g.agents).collect();
            agents.shuffle(rng);
            agents.truncate(rng.gen_range(1..=g.agents));
            let ts: Vec<Formula> = agents.iter().map(|&a| translate(&random_action(rng, g.actions, 2).bind(a))).collect();
            Formula::imp(
                Formula::and_all(ts.iter().cloned().map(Formula::poss)),
                Formula::poss(Formula::and_all(ts)),
            )
        }
        6 => {
            let e = Formula::exp(rng.gen_range(0..g.agents));
            Formula::imp(Formula::poss(e.clone()), Formula::poss(Formula::not(e)))
        }
        7 => k_schema(Formula::hist, phi, psi),
        8 => k_schema(Formula::prev, phi, psi),
        9 => Formula::iff(
            Formula::hist(phi.clone()),
            Formula::and(Formula::prev(phi.clone()), Formula::prev(Formula::hist(phi))),
        ),
        10 => Formula::imp(phi.clone(), Formula::nec(Formula::prev_poss(phi))),
        11 => Formula::imp(phi.clone(), Formula::prev(Formula::poss(phi))),
        12 => Formula::imp(Formula::prev_poss(phi.clone()), Formula::prev(phi)),
        13 => Formula::or(Formula::hist(Formula::bot()), Formula::past(Formula::hist(Formula::bot()))),
        14 => Formula::imp(
            Formula::hist(Formula::imp(phi.clone(), Formula::prev(phi.clone()))),
            Formula::imp(Formula::prev(phi.clone()), Formula::hist(phi)),
        ),
        _ => panic!("no axiom A{k}"),
    }
}
