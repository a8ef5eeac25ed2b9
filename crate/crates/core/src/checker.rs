use std::collections::{BTreeSet, HashMap};
use std::rc::Rc;

use thiserror::Error;

use crate::formula::{expand, expand_at_depth, Formula, FormulaError, Interval, MacroCall};
use crate::model::TreeModel;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CheckError {
    #[error("unknown moment `{0}`")]
    UnknownMoment(String),
    #[error("macro `{0}` must be expanded before evaluation")]
    ResidualMacro(String),
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

/// Evaluation state over one model. Every subformula is labelled once with
/// its truth value at every moment.
pub struct EvalContext<'m> {
    model: &'m TreeModel,
    memo: HashMap<Formula, Rc<Vec<bool>>>,
    order: Vec<usize>,
    next_placeholder: u32,
}

impl<'m> EvalContext<'m> {
    pub fn new(model: &'m TreeModel) -> Self {
        let mut order = vec![model.root()];
        let mut k = 0;
        while k < order.len() {
            order.extend_from_slice(model.children(order[k]));
            k += 1;
        }
        EvalContext { model, memo: HashMap::new(), order, next_placeholder: u32::MAX }
    }

    pub fn model(&self) -> &'m TreeModel {
        self.model
    }

    /// Truth of a macro-free formula at moment `w`.
    pub fn eval(&mut self, w: usize, f: &Formula) -> Result<bool, CheckError> {
        if let Some(m) = first_macro(f) {
            return Err(CheckError::ResidualMacro(m.name.name().to_string()));
        }
        Ok(self.labels(f)?[w])
    }

    pub fn eval_at(&mut self, id: &str, f: &Formula) -> Result<bool, CheckError> {
        let w = self.model.index_of(id).ok_or_else(|| CheckError::UnknownMoment(id.to_string()))?;
        self.eval(w, f)
    }

    /// Evaluates a macro call; an `inf` interval is the past depth of `w`.
    pub fn eval_macro(&mut self, w: usize, m: &MacroCall) -> Result<bool, CheckError> {
        Ok(self.labels(&Formula::call(m.clone()))?[w])
    }

    /// Like `eval`, but macro calls may occur anywhere inside `f`.
    pub fn eval_extended(&mut self, w: usize, f: &Formula) -> Result<bool, CheckError> {
        Ok(self.labels(f)?[w])
    }

    /// Moments where `f` holds, indexed by moment.
    pub fn labels(&mut self, f: &Formula) -> Result<Rc<Vec<bool>>, CheckError> {
        if let Some(v) = self.memo.get(f) {
            return Ok(v.clone());
        }
        let m = self.model;
        let n = m.len();
        let sig = m.signature();
        let out: Vec<bool> = match f {
            Formula::Var(k) => (0..n).map(|w| m.moment(w).vars.contains(k)).collect(),
            Formula::Act { action, agent } => {
                if *agent >= sig.agent_count() {
                    return Err(FormulaError::AgentOutOfRange { index: agent + 1, count: sig.agent_count() }.into());
                }
                if *action >= sig.action_count() {
                    return Err(FormulaError::ActionOutOfRange { index: action + 1, count: sig.action_count() }.into());
                }
                (0..n).map(|w| m.performed(w, *agent) >> action & 1 == 1).collect()
            }
            Formula::Exp(agent) => {
                if *agent >= sig.agent_count() {
                    return Err(FormulaError::AgentOutOfRange { index: agent + 1, count: sig.agent_count() }.into());
                }
                (0..n).map(|w| m.expected(w, *agent)).collect()
            }
            Formula::Bot => vec![false; n],
            Formula::Not(x) => self.labels(x)?.iter().map(|b| !b).collect(),
            Formula::Imp(x, y) => {
                let (a, b) = (self.labels(x)?, self.labels(y)?);
                a.iter().zip(b.iter()).map(|(p, q)| !p || *q).collect()
            }
            Formula::Nec(x) => {
                let a = self.labels(x)?;
                (0..n).map(|w| m.children(w).iter().all(|&c| a[c])).collect()
            }
            Formula::Actual(x) => {
                let a = self.labels(x)?;
                (0..n).map(|w| m.actual(w).iter().all(|&c| a[c])).collect()
            }
            Formula::Prev(x) => {
                let a = self.labels(x)?;
                (0..n).map(|w| m.parent(w).map_or(true, |p| a[p])).collect()
            }
            Formula::Hist(x) => {
                let a = self.labels(x)?;
                let mut h = vec![true; n];
                for &w in &self.order {
                    if let Some(p) = m.parent(w) {
                        h[w] = a[p] && h[p];
                    }
                }
                h
            }
            Formula::Macro(call) => self.macro_labels(call)?,
        };
        let rc = Rc::new(out);
        self.memo.insert(f.clone(), rc.clone());
        Ok(rc)
    }

    fn macro_labels(&mut self, call: &MacroCall) -> Result<Vec<bool>, CheckError> {
        let agents = self.model.signature().agent_count();
        let mut call = call.clone();
        // Goals that themselves contain macros are labelled first and then
        // stand in as a fresh variable.
        if let Some(goal) = &call.goal {
            if first_macro(goal).is_some() {
                let g = self.labels(goal)?;
                let ph = Formula::Var(self.next_placeholder);
                self.next_placeholder -= 1;
                self.memo.insert(ph.clone(), g);
                call.goal = Some(ph);
            }
        }
        if call.interval != Some(Interval::Infinite) {
            return Ok(self.labels(&expand(&call, agents)?)?.to_vec());
        }
        let depths: BTreeSet<usize> = (0..self.model.len()).map(|w| self.model.past_depth(w)).collect();
        let mut out = vec![false; self.model.len()];
        for d in depths {
            let l = self.labels(&expand_at_depth(&call, d, agents)?)?;
            for (w, slot) in out.iter_mut().enumerate() {
                if self.model.past_depth(w) == d {
                    *slot = l[w];
                }
            }
        }
        Ok(out)
    }
}

fn first_macro(f: &Formula) -> Option<&MacroCall> {
    match f {
        Formula::Macro(m) => Some(m),
        other => other.children().into_iter().find_map(first_macro),
    }
}

/// True iff `f` holds at every moment of the model.
pub fn check_validity_on(model: &TreeModel, f: &Formula) -> Result<bool, CheckError> {
    let mut ctx = EvalContext::new(model);
    check_validity_with(&mut ctx, f)
}

pub fn check_validity_with(ctx: &mut EvalContext<'_>, f: &Formula) -> Result<bool, CheckError> {
    if let Some(m) = first_macro(f) {
        return Err(CheckError::ResidualMacro(m.name.name().to_string()));
    }
    Ok(ctx.labels(f)?.iter().all(|&b| b))
}
