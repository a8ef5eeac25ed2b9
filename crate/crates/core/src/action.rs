use std::collections::HashMap;
use std::fmt;
use std::sync::OnceLock;

use thiserror::Error;

use crate::formula::Formula;

/// Largest number of atomic actions for which masks fit in a `u64`.
pub const MAX_MASK_ACTIONS: usize = 6;
/// Default cap for exhaustive class enumeration (2^(2^4) = 65,536 classes).
pub const DEFAULT_CLASS_CAP: usize = 4;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ActionError {
    #[error("actions bound to distinct agents a{0} and a{1} cannot be compared")]
    DistinctAgents(usize, usize),
    #[error("action index d{index} outside 1..{count}")]
    ActionOutOfRange { index: usize, count: usize },
    #[error("enumerating classes over {actions} atomic actions exceeds the cap of {cap}")]
    EnumerationTooLarge { actions: usize, cap: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ActionType {
    Atomic(usize),
    Complement(Box<ActionType>),
    Union(Box<ActionType>, Box<ActionType>),
}

impl ActionType {
    pub fn atomic(j: usize) -> Self {
        ActionType::Atomic(j)
    }

    pub fn complement(a: ActionType) -> Self {
        ActionType::Complement(Box::new(a))
    }

    pub fn union(a: ActionType, b: ActionType) -> Self {
        ActionType::Union(Box::new(a), Box::new(b))
    }

    pub fn intersection(a: ActionType, b: ActionType) -> Self {
        Self::complement(Self::union(Self::complement(a), Self::complement(b)))
    }

    pub fn size(&self) -> usize {
        match self {
            ActionType::Atomic(_) => 1,
            ActionType::Complement(a) => 1 + a.size(),
            ActionType::Union(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Number of atomic actions the term mentions, i.e. the largest index + 1.
    pub fn arity(&self) -> usize {
        match self {
            ActionType::Atomic(j) => j + 1,
            ActionType::Complement(a) => a.arity(),
            ActionType::Union(a, b) => a.arity().max(b.arity()),
        }
    }

    /// Truth of the term under an assignment to the agent's witness constants
    /// (bit `j` of `performed` is the constant for action `j`).
    pub fn holds(&self, performed: u64) -> bool {
        match self {
            ActionType::Atomic(j) => *j < 64 && performed >> j & 1 == 1,
            ActionType::Complement(a) => !a.holds(performed),
            ActionType::Union(a, b) => a.holds(performed) || b.holds(performed),
        }
    }

    pub fn bind(self, agent: usize) -> AgentBoundAction {
        AgentBoundAction { action: self, agent }
    }

    fn as_intersection(&self) -> Option<(&ActionType, &ActionType)> {
        if let ActionType::Complement(inner) = self {
            if let ActionType::Union(l, r) = inner.as_ref() {
                if let (ActionType::Complement(a), ActionType::Complement(b)) = (l.as_ref(), r.as_ref()) {
                    return Some((a, b));
                }
            }
        }
        None
    }

    fn precedence(&self) -> u8 {
        match self {
            ActionType::Union(..) => 1,
            _ if self.as_intersection().is_some() => 2,
            ActionType::Complement(_) => 3,
            ActionType::Atomic(_) => 4,
        }
    }

    fn write_prec(&self, f: &mut fmt::Formatter<'_>, ctx: u8) -> fmt::Result {
        let own = self.precedence();
        if own < ctx {
            write!(f, "(")?;
        }
        if let Some((a, b)) = self.as_intersection() {
            a.write_prec(f, 2)?;
            write!(f, " & ")?;
            b.write_prec(f, 3)?;
        } else {
            match self {
                ActionType::Atomic(j) => write!(f, "d{}", j + 1)?,
                ActionType::Complement(a) => {
                    write!(f, "~")?;
                    a.write_prec(f, 3)?;
                }
                ActionType::Union(a, b) => {
                    a.write_prec(f, 1)?;
                    write!(f, " | ")?;
                    b.write_prec(f, 2)?;
                }
            }
        }
        if own < ctx {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for ActionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_prec(f, 0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AgentBoundAction {
    pub action: ActionType,
    pub agent: usize,
}

impl fmt::Display for AgentBoundAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.action {
            ActionType::Atomic(_) => write!(f, "{}@a{}", self.action, self.agent + 1),
            _ => write!(f, "({})@a{}", self.action, self.agent + 1),
        }
    }
}

/// The propositional translation of a bound action.
pub fn translate(a: &AgentBoundAction) -> Formula {
    translate_type(&a.action, a.agent)
}

fn translate_type(t: &ActionType, agent: usize) -> Formula {
    match t {
        ActionType::Atomic(j) => Formula::act(*j, agent),
        ActionType::Complement(x) => Formula::not(translate_type(x, agent)),
        ActionType::Union(x, y) => Formula::or(translate_type(x, agent), translate_type(y, agent)),
    }
}

/// Set of satisfying assignments of a bound action's translation. Bit `b` is
/// set iff the assignment whose `j`-th constant is bit `j` of `b` satisfies it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionMask {
    pub agent: usize,
    pub actions: usize,
    pub bits: u64,
}

impl ActionMask {
    pub fn width(&self) -> usize {
        1 << self.actions
    }

    pub fn contains(&self, performed: u64) -> bool {
        self.bits >> performed & 1 == 1
    }

    pub fn count(&self) -> u32 {
        self.bits.count_ones()
    }
}

fn full_bits(actions: usize) -> u64 {
    let width = 1u32 << actions;
    if width == 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

pub fn type_mask(t: &ActionType, actions: usize) -> Result<u64, ActionError> {
    if t.arity() > actions {
        return Err(ActionError::ActionOutOfRange { index: t.arity(), count: actions });
    }
    if actions > MAX_MASK_ACTIONS {
        return Err(ActionError::EnumerationTooLarge { actions, cap: MAX_MASK_ACTIONS });
    }
    let mut bits = 0u64;
    for b in 0..(1u64 << actions) {
        if t.holds(b) {
            bits |= 1 << b;
        }
    }
    Ok(bits)
}

pub fn canonical_mask(a: &AgentBoundAction, actions: usize) -> Result<ActionMask, ActionError> {
    Ok(ActionMask { agent: a.agent, actions, bits: type_mask(&a.action, actions)? })
}

pub fn equivalent(a: &AgentBoundAction, b: &AgentBoundAction, actions: usize) -> Result<bool, ActionError> {
    if a.agent != b.agent {
        return Err(ActionError::DistinctAgents(a.agent + 1, b.agent + 1));
    }
    Ok(canonical_mask(a, actions)? == canonical_mask(b, actions)?)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionClass {
    pub mask: ActionMask,
    pub representative: ActionType,
}

/// All `2^(2^n)` classes of the agent's action types, ordered by mask bits.
pub fn enumerate_classes(agent: usize, actions: usize, cap: usize) -> Result<Vec<ActionClass>, ActionError> {
    if actions > cap.min(DEFAULT_CLASS_CAP) || actions == 0 {
        return Err(ActionError::EnumerationTooLarge { actions, cap: cap.min(DEFAULT_CLASS_CAP) });
    }
    let reps = representatives(actions);
    Ok(reps
        .iter()
        .enumerate()
        .map(|(bits, rep)| ActionClass {
            mask: ActionMask { agent, actions, bits: bits as u64 },
            representative: rep.clone(),
        })
        .collect())
}

/// Representative term of a mask: the smallest complement/union term, found by
/// enumerating terms by size with atoms, complement and union in that order.
pub fn representative(bits: u64, actions: usize) -> ActionType {
    assert!(actions >= 1 && actions <= DEFAULT_CLASS_CAP);
    representatives(actions)[bits as usize].clone()
}

fn representatives(actions: usize) -> &'static [ActionType] {
    static CACHE: [OnceLock<Vec<ActionType>>; DEFAULT_CLASS_CAP] =
        [OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new()];
    CACHE[actions - 1].get_or_init(|| build_representatives(actions))
}

#[derive(Clone, Copy)]
enum Step {
    Atom(usize),
    Comp(u64),
    Union(u64, u64),
}

// Beyond this many union combinations the search stops and the remaining
// classes fall back to a union of minterms.
const PAIR_BUDGET: u64 = 60_000_000;

fn build_representatives(actions: usize) -> Vec<ActionType> {
    let full = full_bits(actions);
    let total = 1usize << (1 << actions);
    let mut how: HashMap<u64, Step> = HashMap::new();
    let mut levels: Vec<Vec<u64>> = vec![Vec::new(), Vec::new()];
    for j in 0..actions {
        let m = type_mask(&ActionType::Atomic(j), actions).unwrap();
        if let std::collections::hash_map::Entry::Vacant(e) = how.entry(m) {
            e.insert(Step::Atom(j));
            levels[1].push(m);
        }
    }
    let mut spent = 0u64;
    let mut size = 2;
    while how.len() < total && spent < PAIR_BUDGET {
        let mut level = Vec::new();
        for &m in &levels[size - 1] {
            let c = !m & full;
            if let std::collections::hash_map::Entry::Vacant(e) = how.entry(c) {
                e.insert(Step::Comp(m));
                level.push(c);
            }
        }
        for a in 1..size - 1 {
            let b = size - 1 - a;
            if a > b {
                break;
            }
            for i in 0..levels[a].len() {
                let start = if a == b { i } else { 0 };
                for k in start..levels[b].len() {
                    spent += 1;
                    let (x, y) = (levels[a][i], levels[b][k]);
                    let u = x | y;
                    if let std::collections::hash_map::Entry::Vacant(e) = how.entry(u) {
                        e.insert(Step::Union(x, y));
                        level.push(u);
                    }
                }
            }
        }
        levels.push(level);
        size += 1;
    }
    (0..total as u64)
        .map(|bits| match how.contains_key(&bits) {
            true => rebuild(bits, &how),
            false => minterm_union(bits, actions),
        })
        .collect()
}

fn rebuild(bits: u64, how: &HashMap<u64, Step>) -> ActionType {
    match how[&bits] {
        Step::Atom(j) => ActionType::Atomic(j),
        Step::Comp(m) => ActionType::complement(rebuild(m, how)),
        Step::Union(x, y) => ActionType::union(rebuild(x, how), rebuild(y, how)),
    }
}

fn minterm_union(bits: u64, actions: usize) -> ActionType {
    let minterm = |b: u64| {
        (0..actions)
            .map(|j| match b >> j & 1 {
                1 => ActionType::Atomic(j),
                _ => ActionType::complement(ActionType::Atomic(j)),
            })
            .reduce(ActionType::intersection)
            .unwrap()
    };
    (0..1u64 << actions)
        .filter(|b| bits >> b & 1 == 1)
        .map(minterm)
        .reduce(ActionType::union)
        .unwrap_or_else(|| {
            let d = ActionType::Atomic(0);
            ActionType::intersection(d.clone(), ActionType::complement(d))
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(j: usize) -> ActionType {
        ActionType::atomic(j)
    }

    fn arb_action(actions: usize) -> impl Strategy<Value = ActionType> {
        let leaf = (0..actions).prop_map(ActionType::Atomic);
        leaf.prop_recursive(6, 64, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(ActionType::complement),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| ActionType::union(a, b)),
                (inner.clone(), inner).prop_map(|(a, b)| ActionType::intersection(a, b)),
            ]
        })
    }

    // Independent truth-table tautology test over a translated biconditional.
    fn tautology(f: &Formula, actions: usize) -> bool {
        (0..1u64 << actions).all(|b| eval_prop(f, b))
    }

    fn eval_prop(f: &Formula, b: u64) -> bool {
        match f {
            Formula::Act { action, .. } => b >> action & 1 == 1,
            Formula::Bot => false,
            Formula::Not(x) => !eval_prop(x, b),
            Formula::Imp(x, y) => !eval_prop(x, b) || eval_prop(y, b),
            other => panic!("not propositional: {other}"),
        }
    }

    #[test]
    fn translation_examples() {
        assert_eq!(translate(&d(0).bind(0)), Formula::act(0, 0));
        assert_eq!(translate(&ActionType::complement(d(0)).bind(0)), Formula::not(Formula::act(0, 0)));
        let inter = ActionType::intersection(d(0), d(1)).bind(0);
        let expected = Formula::not(Formula::or(
            Formula::not(Formula::act(0, 0)),
            Formula::not(Formula::act(1, 0)),
        ));
        assert_eq!(translate(&inter), expected);
    }

    #[test]
    fn mask_examples() {
        let taut = ActionType::union(d(0), ActionType::complement(d(0)));
        assert_eq!(type_mask(&taut, 1).unwrap(), 0b11);
        let contra = ActionType::intersection(d(0), ActionType::complement(d(0)));
        assert_eq!(type_mask(&contra, 1).unwrap(), 0);
        let u = ActionType::union(d(0), d(1));
        assert_eq!(type_mask(&u, 2).unwrap().count_ones(), 3);
        assert_eq!(type_mask(&u, 2).unwrap(), 0b1110);
    }

    #[test]
    fn equivalence_examples() {
        let dd = ActionType::complement(ActionType::complement(d(0)));
        assert!(equivalent(&dd.bind(0), &d(0).bind(0), 2).unwrap());
        let ab = ActionType::union(d(0), d(1));
        let ba = ActionType::union(d(1), d(0));
        assert!(equivalent(&ab.bind(0), &ba.bind(0), 2).unwrap());
        let padded = ActionType::union(d(0), ActionType::intersection(d(1), ActionType::complement(d(1))));
        assert!(equivalent(&d(0).bind(0), &padded.bind(0), 2).unwrap());
        assert_eq!(equivalent(&d(0).bind(0), &d(0).bind(1), 1), Err(ActionError::DistinctAgents(1, 2)));
    }

    #[test]
    fn class_counts() {
        assert_eq!(enumerate_classes(0, 1, 4).unwrap().len(), 4);
        assert_eq!(enumerate_classes(0, 2, 4).unwrap().len(), 16);
        assert_eq!(enumerate_classes(0, 3, 4).unwrap().len(), 256);
        assert!(matches!(enumerate_classes(0, 5, 4), Err(ActionError::EnumerationTooLarge { .. })));
    }

    #[test]
    fn representatives_realize_their_masks() {
        for actions in 1..=3 {
            let classes = enumerate_classes(0, actions, 4).unwrap();
            let mut seen = std::collections::HashSet::new();
            for c in &classes {
                assert_eq!(type_mask(&c.representative, actions).unwrap(), c.mask.bits);
                assert!(seen.insert(c.mask.bits));
            }
        }
    }

    #[test]
    fn representatives_are_small() {
        assert_eq!(representative(0b10, 1), d(0));
        assert_eq!(representative(0b01, 1), ActionType::complement(d(0)));
        assert_eq!(representative(0b1110, 2), ActionType::union(d(0), d(1)));
        assert_eq!(representative(0b1111, 2).size(), 4);
    }

    #[test]
    fn printing() {
        let t = ActionType::intersection(d(0), ActionType::complement(d(1)));
        assert_eq!(t.to_string(), "d1 & ~d2");
        assert_eq!(t.clone().bind(0).to_string(), "(d1 & ~d2)@a1");
        assert_eq!(d(2).bind(1).to_string(), "d3@a2");
        let nested = ActionType::union(d(0), ActionType::union(d(1), d(2)));
        assert_eq!(nested.to_string(), "d1 | (d2 | d3)");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn translation_is_homomorphic(a in arb_action(3), b in arb_action(3)) {
            let ta = translate(&a.clone().bind(0));
            let tb = translate(&b.clone().bind(0));
            prop_assert_eq!(translate(&ActionType::complement(a.clone()).bind(0)), Formula::not(ta.clone()));
            prop_assert_eq!(translate(&ActionType::union(a, b).bind(0)), Formula::or(ta, tb));
        }

        #[test]
        fn equivalence_matches_tautology(a in arb_action(3), b in arb_action(3)) {
            let bi = Formula::iff(translate(&a.clone().bind(0)), translate(&b.clone().bind(0)));
            prop_assert_eq!(equivalent(&a.bind(0), &b.bind(0), 3).unwrap(), tautology(&bi, 3));
        }

        #[test]
        fn equivalence_is_an_equivalence(a in arb_action(2), b in arb_action(2), c in arb_action(2)) {
            let (a, b, c) = (a.bind(0), b.bind(0), c.bind(0));
            prop_assert!(equivalent(&a, &a, 2).unwrap());
            prop_assert_eq!(equivalent(&a, &b, 2).unwrap(), equivalent(&b, &a, 2).unwrap());
            if equivalent(&a, &b, 2).unwrap() && equivalent(&b, &c, 2).unwrap() {
                prop_assert!(equivalent(&a, &c, 2).unwrap());
            }
        }
    }
}
