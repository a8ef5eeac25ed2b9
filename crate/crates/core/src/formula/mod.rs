mod closure;
mod macros;
mod parser;
mod print;

pub use closure::{closure, neg_closure, past_bottom};
pub use macros::{expand, expand_all, expand_at_depth, Interval, MacroAction, MacroCall, MacroName, MACRO_NAMES};
pub use parser::{parse, parse_action, parse_bound_action, ParseError};

use thiserror::Error;

use crate::signature::Signature;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormulaError {
    #[error("interval `inf` is model-relative and cannot be expanded into a closed formula")]
    InfiniteInterval,
    #[error("agent index a{index} outside 1..{count}")]
    AgentOutOfRange { index: usize, count: usize },
    #[error("action index d{index} outside 1..{count}")]
    ActionOutOfRange { index: usize, count: usize },
    #[error("macro `{0}` still present; expand it first")]
    ResidualMacro(String),
}

/// Core formulas. Derived connectives are constructors that normalize into
/// these variants.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Var(u32),
    Act { action: usize, agent: usize },
    Exp(usize),
    Bot,
    Not(Box<Formula>),
    Imp(Box<Formula>, Box<Formula>),
    /// `[]`: every next moment.
    Nec(Box<Formula>),
    /// `[A]`: every actual next moment.
    Actual(Box<Formula>),
    /// `[P]`: the previous moment, if any.
    Prev(Box<Formula>),
    /// `H`: every past moment.
    Hist(Box<Formula>),
    Macro(Box<MacroCall>),
}

impl Formula {
    pub fn var(k: u32) -> Self {
        Formula::Var(k)
    }

    pub fn act(action: usize, agent: usize) -> Self {
        Formula::Act { action, agent }
    }

    pub fn exp(agent: usize) -> Self {
        Formula::Exp(agent)
    }

    pub fn bot() -> Self {
        Formula::Bot
    }

    pub fn top() -> Self {
        Formula::not(Formula::Bot)
    }

    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn imp(a: Formula, b: Formula) -> Self {
        Formula::Imp(Box::new(a), Box::new(b))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::not(Formula::imp(a, Formula::not(b)))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::imp(Formula::not(a), b)
    }

    pub fn iff(a: Formula, b: Formula) -> Self {
        Formula::and(Formula::imp(a.clone(), b.clone()), Formula::imp(b, a))
    }

    pub fn nec(f: Formula) -> Self {
        Formula::Nec(Box::new(f))
    }

    pub fn poss(f: Formula) -> Self {
        Formula::not(Formula::nec(Formula::not(f)))
    }

    pub fn actual(f: Formula) -> Self {
        Formula::Actual(Box::new(f))
    }

    pub fn actual_poss(f: Formula) -> Self {
        Formula::not(Formula::actual(Formula::not(f)))
    }

    pub fn prev(f: Formula) -> Self {
        Formula::Prev(Box::new(f))
    }

    pub fn prev_poss(f: Formula) -> Self {
        Formula::not(Formula::prev(Formula::not(f)))
    }

    pub fn hist(f: Formula) -> Self {
        Formula::Hist(Box::new(f))
    }

    pub fn past(f: Formula) -> Self {
        Formula::not(Formula::hist(Formula::not(f)))
    }

    pub fn call(m: MacroCall) -> Self {
        Formula::Macro(Box::new(m))
    }

    pub fn nec_n(k: usize, f: Formula) -> Self {
        (0..k).fold(f, |acc, _| Formula::nec(acc))
    }

    pub fn prev_n(k: usize, f: Formula) -> Self {
        (0..k).fold(f, |acc, _| Formula::prev(acc))
    }

    pub fn prev_poss_n(k: usize, f: Formula) -> Self {
        (0..k).fold(f, |acc, _| Formula::prev_poss(acc))
    }

    /// Conjunction of a list; `true` when empty.
    pub fn and_all(items: impl IntoIterator<Item = Formula>) -> Self {
        items.into_iter().reduce(Formula::and).unwrap_or_else(Formula::top)
    }

    /// Disjunction of a list; `false` when empty.
    pub fn or_all(items: impl IntoIterator<Item = Formula>) -> Self {
        items.into_iter().reduce(Formula::or).unwrap_or(Formula::Bot)
    }

    /// Single negation: strips one leading negation or adds one.
    pub fn neg(&self) -> Formula {
        match self {
            Formula::Not(inner) => (**inner).clone(),
            other => Formula::not(other.clone()),
        }
    }

    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Var(_) | Formula::Act { .. } | Formula::Exp(_) | Formula::Bot | Formula::Macro(_) => vec![],
            Formula::Not(a) | Formula::Nec(a) | Formula::Actual(a) | Formula::Prev(a) | Formula::Hist(a) => vec![a],
            Formula::Imp(a, b) => vec![a, b],
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(|c| c.depth()).max().unwrap_or(0)
    }

    pub fn modal_depth(&self) -> usize {
        let inner = self.children().iter().map(|c| c.modal_depth()).max().unwrap_or(0);
        match self {
            Formula::Nec(_) | Formula::Actual(_) | Formula::Prev(_) | Formula::Hist(_) => inner + 1,
            _ => inner,
        }
    }

    pub fn is_macro_free(&self) -> bool {
        match self {
            Formula::Macro(_) => false,
            other => other.children().iter().all(|c| c.is_macro_free()),
        }
    }

    /// All distinct subformulas, children before parents.
    pub fn subformulas(&self) -> Vec<Formula> {
        let mut out = Vec::new();
        let mut seen = std::collections::HashSet::new();
        self.collect_subformulas(&mut out, &mut seen);
        out
    }

    fn collect_subformulas(&self, out: &mut Vec<Formula>, seen: &mut std::collections::HashSet<Formula>) {
        if seen.contains(self) {
            return;
        }
        for c in self.children() {
            c.collect_subformulas(out, seen);
        }
        seen.insert(self.clone());
        out.push(self.clone());
    }

    /// Smallest (agents, actions) counts covering every constant and macro
    /// action that occurs in the formula.
    pub fn required_counts(&self) -> (usize, usize) {
        let mut acc = (0, 0);
        self.visit(&mut |f| match f {
            Formula::Act { action, agent } => {
                acc.0 = acc.0.max(agent + 1);
                acc.1 = acc.1.max(action + 1);
            }
            Formula::Exp(agent) => acc.0 = acc.0.max(agent + 1),
            Formula::Macro(m) => {
                let (g, a) = m.required_counts();
                acc.0 = acc.0.max(g);
                acc.1 = acc.1.max(a);
            }
            _ => {}
        });
        acc
    }

    fn visit(&self, f: &mut impl FnMut(&Formula)) {
        f(self);
        if let Formula::Macro(m) = self {
            if let Some(goal) = &m.goal {
                goal.visit(f);
            }
        }
        for c in self.children() {
            c.visit(f);
        }
    }

    pub fn check_signature(&self, sig: &Signature) -> Result<(), FormulaError> {
        let (agents, actions) = self.required_counts();
        if agents > sig.agent_count() {
            return Err(FormulaError::AgentOutOfRange { index: agents, count: sig.agent_count() });
        }
        if actions > sig.action_count() {
            return Err(FormulaError::ActionOutOfRange { index: actions, count: sig.action_count() });
        }
        Ok(())
    }

    /// Recognizes `¬[]¬x`, returning `x`.
    pub fn as_poss(&self) -> Option<&Formula> {
        match self {
            Formula::Not(inner) => match inner.as_ref() {
                Formula::Nec(x) => match x.as_ref() {
                    Formula::Not(y) => Some(y),
                    _ => None,
                },
                _ => None,
            },
            _ => None,
        }
    }

    /// Recognizes `¬H¬x`, returning `x`.
    pub fn as_past(&self) -> Option<&Formula> {
        match self {
            Formula::Not(inner) => match inner.as_ref() {
                Formula::Hist(x) => match x.as_ref() {
                    Formula::Not(y) => Some(y),
                    _ => None,
                },
                _ => None,
            },
            _ => None,
        }
    }

    /// True for Boolean combinations of one agent's witness constants.
    pub fn action_agent(&self) -> Option<usize> {
        fn walk(f: &Formula, agent: &mut Option<usize>) -> bool {
            match f {
                Formula::Act { agent: a, .. } => match agent {
                    Some(b) => a == b,
                    None => {
                        *agent = Some(*a);
                        true
                    }
                },
                Formula::Bot => true,
                Formula::Not(x) => walk(x, agent),
                Formula::Imp(x, y) => walk(x, agent) && walk(y, agent),
                _ => false,
            }
        }
        let mut agent = None;
        if walk(self, &mut agent) {
            agent
        } else {
            None
        }
    }

    /// Truth of a propositional formula over a single agent's constants under
    /// an assignment (bit `j` is action `j`).
    pub fn eval_action_assignment(&self, performed: u64) -> bool {
        match self {
            Formula::Act { action, .. } => performed >> action & 1 == 1,
            Formula::Bot => false,
            Formula::Not(x) => !x.eval_action_assignment(performed),
            Formula::Imp(x, y) => !x.eval_action_assignment(performed) || y.eval_action_assignment(performed),
            _ => false,
        }
    }
}
