//! Satisfiability by atom elimination over the negation closure.
//!
//! Atoms are generated forward from root atoms: a child's `■` and `H` leaves
//! are fixed by its parent, so atoms are grouped by that past part. An atom
//! is good when it has an admissible finite set of successors (every `◇`
//! demand met, one actual successor matching its `[A]` members when one is
//! needed, closed under independence of agents and defeasible expectations);
//! this is a least fixpoint, so good atoms head finite subtrees. A formula
//! is satisfiable iff some good atom reachable from a good root atom
//! contains it. Witness models are unravelled from the fixpoint and checked.

mod atoms;
mod extract;
pub mod oracle;
mod space;

use std::fmt;

use thiserror::Error;

pub use atoms::{atoms, candidate_edge, Atom, ClosureIndex, EdgeKinds};
pub use space::{AtomSpace, Goodness, Rooted};

use crate::checker::EvalContext;
use crate::formula::{expand_all, Formula, FormulaError};
use crate::model::{validate, TreeModel};
use crate::signature::Signature;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SatError {
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error("problem too large: {0}")]
    TooLarge(String),
    #[error("internal error: {0}")]
    Internal(String),
}

#[derive(Clone, Debug)]
pub struct SatConfig {
    /// Signature to decide over; defaults to the smallest one covering the
    /// formula (at least one agent and one action).
    pub signature: Option<Signature>,
    pub bound_depth: usize,
    /// Defaults to `2^(agents·actions) + 1`.
    pub bound_branching: Option<usize>,
    pub max_moments: usize,
    pub max_atoms: usize,
    pub max_present: usize,
}

impl Default for SatConfig {
    fn default() -> Self {
        SatConfig { signature: None, bound_depth: 8, bound_branching: None, max_moments: 4096, max_atoms: 1 << 22, max_present: 20 }
    }
}

#[derive(Clone, Debug)]
pub enum SatResult {
    Sat { model: TreeModel, moment: usize },
    Unsat { trace: Vec<String> },
    Unknown { reason: String },
}

impl SatResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatResult::Sat { .. })
    }

    pub fn is_unsat(&self) -> bool {
        matches!(self, SatResult::Unsat { .. })
    }
}

impl fmt::Display for SatResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SatResult::Sat { model, moment } => write!(f, "sat at {} ({} moments)", model.id(*moment), model.len()),
            SatResult::Unsat { .. } => write!(f, "unsat"),
            SatResult::Unknown { reason } => write!(f, "unknown: {reason}"),
        }
    }
}

#[derive(Clone, Debug)]
pub enum TheoremResult {
    Valid { trace: Vec<String> },
    Countermodel { model: TreeModel, moment: usize },
    Unknown { reason: String },
}

fn signature_for(f: &Formula, cfg: &SatConfig) -> Signature {
    let (agents, actions) = f.required_counts();
    match &cfg.signature {
        Some(s) => s.widened(agents, actions),
        None => Signature::with_counts(agents.max(1), actions.max(1)),
    }
}

pub fn satisfiable(phi: &Formula, cfg: &SatConfig) -> Result<SatResult, SatError> {
    let sig = signature_for(phi, cfg);
    let phi = expand_all(phi, sig.agent_count())?;
    let cl = match ClosureIndex::new(std::slice::from_ref(&phi), &sig) {
        Ok(cl) => cl,
        Err(SatError::TooLarge(r)) => return Ok(SatResult::Unknown { reason: r }),
        Err(e) => return Err(e),
    };
    let space = match AtomSpace::build(cl, &phi, cfg.max_atoms, cfg.max_present) {
        Ok(s) => s,
        Err(SatError::TooLarge(r)) => return Ok(SatResult::Unknown { reason: r }),
        Err(e) => return Err(e),
    };
    let good = space.good();
    let rooted = space.rooted(&good);
    let Some(&(target, _)) = rooted.order.iter().find(|(a, _)| space.goal_at(*a)) else {
        return Ok(SatResult::Unsat { trace: unsat_trace(&space, &good, &phi) });
    };
    let limits = extract::Limits {
        depth: cfg.bound_depth,
        branching: cfg.bound_branching.unwrap_or((1usize << (sig.agent_count() * sig.action_count()).min(20)) + 1),
        moments: cfg.max_moments,
    };
    match extract::extract(&space, &good, &rooted, target, &limits) {
        Ok((model, moment)) => {
            let report = validate(&model);
            if !report.ok() {
                return Err(SatError::Internal(format!("witness fails validation: {:?}", report.failures())));
            }
            let holds = EvalContext::new(&model).eval(moment, &phi).map_err(|e| SatError::Internal(e.to_string()))?;
            if !holds {
                return Err(SatError::Internal(format!("witness does not satisfy {phi}")));
            }
            Ok(SatResult::Sat { model, moment })
        }
        Err(reason) => Ok(SatResult::Unknown { reason }),
    }
}

fn unsat_trace(space: &AtomSpace, good: &Goodness, phi: &Formula) -> Vec<String> {
    let mut trace = vec![format!(
        "{} atoms over {} past parts, {} future signatures",
        space.atom_count(),
        space.keys.len(),
        space.sigs.len()
    )];
    let mut with_goal = 0usize;
    let mut good_goal = 0usize;
    let mut reasons: Vec<String> = Vec::new();
    for (k, kd) in space.keys.iter().enumerate() {
        for p in 0..kd.atom_goal.len() {
            if !kd.atom_goal[p] {
                continue;
            }
            with_goal += 1;
            let s = kd.atom_sig[p];
            if good.sig_rank[s as usize].is_some() {
                good_goal += 1;
            } else if let Some(r) = good.failures.get(&s) {
                let line = format!("eliminated atoms with {phi} at past part {k}: {r}");
                if !reasons.contains(&line) && reasons.len() < 8 {
                    reasons.push(line);
                }
            }
        }
    }
    trace.push(format!("{with_goal} atoms contain {phi}"));
    trace.extend(reasons);
    trace.push(format!("{good_goal} of them have an admissible finite future"));
    trace.push("none of those is reachable from a root atom".into());
    trace
}

pub fn is_theorem(phi: &Formula, cfg: &SatConfig) -> Result<TheoremResult, SatError> {
    Ok(match satisfiable(&Formula::not(phi.clone()), cfg)? {
        SatResult::Sat { model, moment } => TheoremResult::Countermodel { model, moment },
        SatResult::Unsat { trace } => TheoremResult::Valid { trace },
        SatResult::Unknown { reason } => TheoremResult::Unknown { reason },
    })
}
