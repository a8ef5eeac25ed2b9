use std::collections::{BTreeMap, HashSet};

use super::Formula;
use crate::action::MAX_MASK_ACTIONS;
use crate::signature::Signature;

struct Builder {
    items: Vec<Formula>,
    seen: HashSet<Formula>,
}

impl Builder {
    fn add(&mut self, f: &Formula) {
        if self.seen.contains(f) {
            return;
        }
        for c in f.children() {
            self.add(c);
        }
        // A rule fired by a child may already have added `f`.
        if !self.seen.insert(f.clone()) {
            return;
        }
        self.items.push(f.clone());
        // Rules fire on members of the negation closure, so `H¬φ` counts as `Pφ`.
        for g in [f.clone(), f.neg()] {
            if let Some(x) = g.as_past() {
                self.add(&Formula::prev_poss(g.clone()));
                self.add(&Formula::prev_poss(x.clone()));
            }
            if let Some(Formula::Exp(i)) = g.as_poss() {
                self.add(&Formula::poss(Formula::not(Formula::exp(*i))));
            }
        }
    }

    // One conjunction per choice of distinct agents and per-agent action
    // classes among the `<>t(...)` members, deduplicated by mask.
    fn add_independence(&mut self, sig: &Signature) {
        let n = sig.action_count();
        let mut per_agent: BTreeMap<usize, Vec<Formula>> = BTreeMap::new();
        let mut keys: HashSet<(usize, u64)> = HashSet::new();
        let mut structural: HashSet<Formula> = HashSet::new();
        for g in self.items.iter().flat_map(|f| [f.clone(), f.neg()]) {
            let Some(x) = g.as_poss() else { continue };
            let Some(agent) = x.action_agent() else { continue };
            let fresh = if n <= MAX_MASK_ACTIONS {
                let bits = (0..1u64 << n).filter(|&b| x.eval_action_assignment(b)).fold(0u64, |acc, b| acc | 1 << b);
                keys.insert((agent, bits))
            } else {
                structural.insert(x.clone())
            };
            if fresh {
                per_agent.entry(agent).or_default().push(x.clone());
            }
        }
        let agents: Vec<usize> = per_agent.keys().copied().collect();
        let mut additions = Vec::new();
        for subset in 1u64..(1 << agents.len()) {
            if subset.count_ones() < 2 {
                continue;
            }
            let chosen: Vec<&Vec<Formula>> =
                (0..agents.len()).filter(|k| subset >> k & 1 == 1).map(|k| &per_agent[&agents[k]]).collect();
            let mut combos: Vec<Vec<Formula>> = vec![vec![]];
            for options in chosen {
                combos = combos
                    .into_iter()
                    .flat_map(|c| {
                        options.iter().map(move |o| {
                            let mut c = c.clone();
                            c.push(o.clone());
                            c
                        })
                    })
                    .collect();
            }
            for c in combos {
                additions.push(Formula::poss(Formula::and_all(c)));
            }
        }
        for f in additions {
            self.add(&f);
        }
    }
}

/// `PH⊥`: some past moment has no past.
pub fn past_bottom() -> Formula {
    Formula::past(Formula::hist(Formula::Bot))
}

/// The closure of a macro-free formula set: subformulas, all witness and
/// expectation constants of the signature, `H⊥` and `PH⊥`, the past rule
/// (`Pφ` brings `◆Pφ` and `◆φ`), the expectation rule (`◇e` brings `◇¬e`) and
/// the independence rule for possible actions of distinct agents.
pub fn closure(sigma: &[Formula], sig: &Signature) -> Vec<Formula> {
    let mut b = Builder { items: Vec::new(), seen: HashSet::new() };
    for i in 0..sig.agent_count() {
        for j in 0..sig.action_count() {
            b.add(&Formula::act(j, i));
        }
        b.add(&Formula::exp(i));
    }
    b.add(&Formula::hist(Formula::Bot));
    b.add(&past_bottom());
    for f in sigma {
        b.add(f);
    }
    loop {
        let before = b.items.len();
        b.add_independence(sig);
        if b.items.len() == before {
            break;
        }
    }
    b.items
}

/// The closure extended by single negations of its members.
pub fn neg_closure(sigma: &[Formula], sig: &Signature) -> Vec<Formula> {
    let mut items = closure(sigma, sig);
    let mut seen: HashSet<Formula> = items.iter().cloned().collect();
    for k in 0..items.len() {
        let n = items[k].neg();
        if seen.insert(n.clone()) {
            items.push(n);
        }
    }
    items
}
