//! Temporal logic of actions and expectations: formulas over action witness
//! and expectation constants, finite tree models, model checking,
//! instrumentality judgments and a satisfiability procedure built from
//! closure sets and atom elimination.

pub mod action;
pub mod checker;
pub mod corpus;
pub mod fixtures;
pub mod formula;
pub mod instrumentality;
pub mod model;
pub mod sat;
pub mod signature;
pub mod suites;

pub use action::{ActionMask, ActionType, AgentBoundAction};
pub use checker::{check_validity_on, CheckError, EvalContext};
pub use formula::{parse, Formula, MacroCall};
pub use instrumentality::{analyze, AnalysisOptions, InstrumentReport, SuccessRatio, WitnessSets};
pub use model::{ModelDoc, TreeModel};
pub use signature::Signature;
