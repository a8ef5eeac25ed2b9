use std::fmt;

use super::{Formula, FormulaError};
use crate::action::{translate, ActionType, AgentBoundAction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MacroName {
    Would,
    Could,
    Will,
    Prod,
    Destr,
    Supp,
    Pres,
    CouldDestr,
    Forbear,
    ForbearProd,
    CInstr,
    ExCInstr,
    CInstrAnyAgent,
    ExCInstrAnyAgent,
    WouldEx,
    Instr,
    ExInstr,
    ProdInstr,
}

pub const MACRO_NAMES: [(MacroName, &str); 18] = [
    (MacroName::Would, "would"),
    (MacroName::Could, "could"),
    (MacroName::Will, "will"),
    (MacroName::Prod, "prod"),
    (MacroName::Destr, "destr"),
    (MacroName::Supp, "supp"),
    (MacroName::Pres, "pres"),
    (MacroName::CouldDestr, "could-destr"),
    (MacroName::Forbear, "forbear"),
    (MacroName::ForbearProd, "forbear-prod"),
    (MacroName::CInstr, "c-instr"),
    (MacroName::ExCInstr, "ex-c-instr"),
    (MacroName::CInstrAnyAgent, "c-instr-any-agent"),
    (MacroName::ExCInstrAnyAgent, "ex-c-instr-any-agent"),
    (MacroName::WouldEx, "would-ex"),
    (MacroName::Instr, "instr"),
    (MacroName::ExInstr, "ex-instr"),
    (MacroName::ProdInstr, "prod-instr"),
];

impl MacroName {
    pub fn from_name(s: &str) -> Option<MacroName> {
        MACRO_NAMES.iter().find(|(_, n)| *n == s).map(|(m, _)| *m)
    }

    pub fn name(self) -> &'static str {
        MACRO_NAMES.iter().find(|(m, _)| *m == self).map(|(_, n)| *n).unwrap()
    }

    pub fn takes_goal(self) -> bool {
        self != MacroName::Forbear
    }

    pub fn takes_interval(self) -> bool {
        matches!(
            self,
            MacroName::CInstr
                | MacroName::ExCInstr
                | MacroName::CInstrAnyAgent
                | MacroName::ExCInstrAnyAgent
                | MacroName::Instr
                | MacroName::ExInstr
                | MacroName::ProdInstr
        )
    }

    pub fn any_agent(self) -> bool {
        matches!(self, MacroName::CInstrAnyAgent | MacroName::ExCInstrAnyAgent)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Interval {
    Finite(u32),
    Infinite,
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Interval::Finite(n) => write!(f, "{n}"),
            Interval::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MacroAction {
    Bound(AgentBoundAction),
    Any(ActionType),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MacroCall {
    pub name: MacroName,
    pub action: MacroAction,
    pub goal: Option<Formula>,
    pub interval: Option<Interval>,
}

impl MacroCall {
    pub fn bound(name: MacroName, action: AgentBoundAction, goal: Formula) -> Self {
        MacroCall { name, action: MacroAction::Bound(action), goal: Some(goal), interval: None }
    }

    pub fn interval(name: MacroName, action: AgentBoundAction, goal: Formula, n: Interval) -> Self {
        MacroCall { name, action: MacroAction::Bound(action), goal: Some(goal), interval: Some(n) }
    }

    pub fn any_agent(name: MacroName, action: ActionType, goal: Formula, n: Interval) -> Self {
        MacroCall { name, action: MacroAction::Any(action), goal: Some(goal), interval: Some(n) }
    }

    pub fn forbear(action: AgentBoundAction) -> Self {
        MacroCall { name: MacroName::Forbear, action: MacroAction::Bound(action), goal: None, interval: None }
    }

    pub fn with_interval(&self, n: Interval) -> MacroCall {
        MacroCall { interval: Some(n), ..self.clone() }
    }

    pub fn is_infinite(&self) -> bool {
        self.interval == Some(Interval::Infinite)
            || self.goal.as_ref().is_some_and(|g| !g.is_macro_free() && has_infinite(g))
    }

    pub(crate) fn required_counts(&self) -> (usize, usize) {
        match &self.action {
            MacroAction::Bound(a) => (a.agent + 1, a.action.arity()),
            MacroAction::Any(t) => (0, t.arity()),
        }
    }
}

fn has_infinite(f: &Formula) -> bool {
    match f {
        Formula::Macro(m) => m.is_infinite(),
        other => other.children().iter().any(|c| has_infinite(c)),
    }
}

impl fmt::Display for MacroCall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.name.name())?;
        match &self.action {
            MacroAction::Bound(a) => write!(f, "{a}")?,
            MacroAction::Any(t) => write!(f, "{t}")?,
        }
        if let Some(g) = &self.goal {
            write!(f, ", {g}")?;
        }
        if let Some(n) = &self.interval {
            write!(f, ", {n}")?;
        }
        write!(f, ")")
    }
}

/// Expands a macro call into a core formula. `agents` is the number of agents
/// in the session, needed by the any-agent variants. Goals are expanded too.
pub fn expand(m: &MacroCall, agents: usize) -> Result<Formula, FormulaError> {
    let n = match m.interval {
        Some(Interval::Infinite) => return Err(FormulaError::InfiniteInterval),
        Some(Interval::Finite(n)) => n as usize,
        None => 0,
    };
    expand_n(m, n, agents)
}

/// Expansion with an infinite interval resolved to `depth`, as done when
/// evaluating at a moment whose past has that length.
pub fn expand_at_depth(m: &MacroCall, depth: usize, agents: usize) -> Result<Formula, FormulaError> {
    let n = match m.interval {
        Some(Interval::Infinite) => depth,
        Some(Interval::Finite(n)) => n as usize,
        None => 0,
    };
    expand_n(m, n, agents)
}

/// Replaces every macro call inside `f` by its expansion.
pub fn expand_all(f: &Formula, agents: usize) -> Result<Formula, FormulaError> {
    Ok(match f {
        Formula::Macro(m) => expand(m, agents)?,
        Formula::Not(a) => Formula::not(expand_all(a, agents)?),
        Formula::Imp(a, b) => Formula::imp(expand_all(a, agents)?, expand_all(b, agents)?),
        Formula::Nec(a) => Formula::nec(expand_all(a, agents)?),
        Formula::Actual(a) => Formula::actual(expand_all(a, agents)?),
        Formula::Prev(a) => Formula::prev(expand_all(a, agents)?),
        Formula::Hist(a) => Formula::hist(expand_all(a, agents)?),
        leaf => leaf.clone(),
    })
}

fn expand_n(m: &MacroCall, n: usize, agents: usize) -> Result<Formula, FormulaError> {
    let goal = match &m.goal {
        Some(g) => expand_all(g, agents)?,
        None => Formula::top(),
    };
    if let MacroAction::Any(t) = &m.action {
        let bound: Vec<AgentBoundAction> = (0..agents).map(|i| t.clone().bind(i)).collect();
        let candidate = Formula::or_all(bound.iter().map(|a| candidate_disjunction(a, &goal, n)));
        return Ok(match m.name {
            MacroName::CInstrAnyAgent => candidate,
            _ => Formula::and(
                candidate,
                Formula::and_all((1..=n).map(|k| Formula::prev_n(k, Formula::and_all(bound.iter().map(|a| would(a, &goal)))))),
            ),
        });
    }
    let MacroAction::Bound(a) = &m.action else { unreachable!() };
    let t = translate(a);
    let not_goal = Formula::not(goal.clone());
    Ok(match m.name {
        MacroName::Would => would(a, &goal),
        MacroName::Could => could(a, &goal),
        MacroName::Will => will(a, &goal),
        MacroName::Prod => Formula::and_all([not_goal.clone(), will(a, &goal), Formula::poss(not_goal)]),
        MacroName::Destr => Formula::and_all([goal.clone(), will(a, &not_goal), Formula::poss(goal)]),
        MacroName::Supp => Formula::and_all([not_goal.clone(), will(a, &not_goal), Formula::poss(goal)]),
        MacroName::Pres => Formula::and_all([goal.clone(), will(a, &goal), Formula::poss(not_goal)]),
        MacroName::CouldDestr => Formula::and_all([goal.clone(), could(a, &not_goal), Formula::poss(goal)]),
        MacroName::Forbear => Formula::and(could(a, &Formula::top()), will(&complement(a), &Formula::top())),
        MacroName::ForbearProd => Formula::and_all([
            goal.clone(),
            could(a, &goal),
            will(&complement(a), &Formula::top()),
            Formula::poss(not_goal),
        ]),
        MacroName::CInstr => candidate_disjunction(a, &goal, n),
        MacroName::ExCInstr => Formula::and(candidate_disjunction(a, &goal, n), proven(a, &goal, n)),
        MacroName::WouldEx => would_ex(a, &goal),
        MacroName::Instr => Formula::and(candidate_disjunction(a, &goal, n), would_ex(a, &goal)),
        MacroName::ExInstr => Formula::and_all([candidate_disjunction(a, &goal, n), would_ex(a, &goal), proven(a, &goal, n)]),
        MacroName::ProdInstr => {
            let produced = Formula::or_all((0..=n).map(|i| {
                Formula::prev_poss_n(i, Formula::and(t.clone(), Formula::prev_poss(would_prod(a, &goal))))
            }));
            let exp = Formula::exp(a.agent);
            Formula::and_all([
                produced,
                would_ex(a, &goal),
                not_goal.clone(),
                Formula::poss(Formula::and(not_goal, exp)),
            ])
        }
        MacroName::CInstrAnyAgent | MacroName::ExCInstrAnyAgent => unreachable!(),
    })
}

fn complement(a: &AgentBoundAction) -> AgentBoundAction {
    ActionType::complement(a.action.clone()).bind(a.agent)
}

fn would(a: &AgentBoundAction, goal: &Formula) -> Formula {
    Formula::nec(Formula::imp(translate(a), goal.clone()))
}

fn could(a: &AgentBoundAction, goal: &Formula) -> Formula {
    Formula::and(would(a, goal), Formula::poss(translate(a)))
}

fn will(a: &AgentBoundAction, goal: &Formula) -> Formula {
    Formula::and(would(a, goal), Formula::actual_poss(translate(a)))
}

fn would_ex(a: &AgentBoundAction, goal: &Formula) -> Formula {
    Formula::nec(Formula::imp(Formula::and(translate(a), Formula::exp(a.agent)), goal.clone()))
}

// Production by the action in the previous transition: the goal was false,
// every performance would bring it about, and some continuation lacks it.
fn would_prod(a: &AgentBoundAction, goal: &Formula) -> Formula {
    let not_goal = Formula::not(goal.clone());
    Formula::and_all([not_goal.clone(), would(a, goal), Formula::poss(not_goal)])
}

fn candidate_disjunction(a: &AgentBoundAction, goal: &Formula, n: usize) -> Formula {
    let t = translate(a);
    Formula::or_all((0..=n).map(|i| Formula::prev_poss_n(i, Formula::and(t.clone(), Formula::prev_poss(would(a, goal))))))
}

fn proven(a: &AgentBoundAction, goal: &Formula, n: usize) -> Formula {
    Formula::and_all((1..=n).map(|k| Formula::prev_n(k, would(a, goal))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn delta() -> AgentBoundAction {
        ActionType::atomic(0).bind(0)
    }

    fn phi() -> Formula {
        Formula::var(1)
    }

    #[test]
    fn would_and_would_ex() {
        let d = Formula::act(0, 0);
        let w = expand(&MacroCall::bound(MacroName::Would, delta(), phi()), 1).unwrap();
        assert_eq!(w, Formula::nec(Formula::imp(d.clone(), phi())));
        let we = expand(&MacroCall::bound(MacroName::WouldEx, delta(), phi()), 1).unwrap();
        assert_eq!(we, Formula::nec(Formula::imp(Formula::and(d, Formula::exp(0)), phi())));
    }

    #[test]
    fn candidate_at_zero_is_single_disjunct() {
        let c = expand(&MacroCall::interval(MacroName::CInstr, delta(), phi(), Interval::Finite(0)), 1).unwrap();
        let d = Formula::act(0, 0);
        let expected = Formula::and(d.clone(), Formula::prev_poss(Formula::nec(Formula::imp(d, phi()))));
        assert_eq!(c, expected);
    }

    #[test]
    fn infinite_interval_rejected() {
        let m = MacroCall::interval(MacroName::Instr, delta(), phi(), Interval::Infinite);
        assert_eq!(expand(&m, 1), Err(FormulaError::InfiniteInterval));
        assert!(expand_at_depth(&m, 3, 1).is_ok());
    }

    #[test]
    fn expansions_are_macro_free_and_index_preserving() {
        let a = ActionType::union(ActionType::atomic(1), ActionType::atomic(0)).bind(1);
        for (name, _) in MACRO_NAMES {
            let m = if name == MacroName::Forbear {
                MacroCall::forbear(a.clone())
            } else if name.any_agent() {
                MacroCall::any_agent(name, a.action.clone(), phi(), Interval::Finite(2))
            } else if name.takes_interval() {
                MacroCall::interval(name, a.clone(), phi(), Interval::Finite(2))
            } else {
                MacroCall::bound(name, a.clone(), phi())
            };
            let e = expand(&m, 2).unwrap();
            assert!(e.is_macro_free(), "{name:?}");
            assert_eq!(e.required_counts(), (2, 2), "{name:?}");
        }
    }

    #[test]
    fn empty_proof_conjunction_is_top() {
        let m = MacroCall::interval(MacroName::ExCInstr, delta(), phi(), Interval::Finite(0));
        let c = MacroCall::interval(MacroName::CInstr, delta(), phi(), Interval::Finite(0));
        assert_eq!(expand(&m, 1).unwrap(), Formula::and(expand(&c, 1).unwrap(), Formula::top()));
    }
}
