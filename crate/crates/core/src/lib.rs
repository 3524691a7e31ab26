//! Model checking for first order logic with team semantics, generalized
//! dependency atoms, global disjunction and the possibility operator.

pub mod dependencies;
pub mod error;
pub mod eval;
pub mod rewrite;
pub mod structures;
pub mod syntax;
pub mod teams;
pub mod verify;

pub use dependencies::{Dependency, Registry};
pub use error::{Budget, Error, Result};
pub use eval::{eval, eval_sentence, EvalConfig, Evaluator, Strategy};
pub use structures::{Relation, Structure};
pub use syntax::{parse, Formula, Var};
pub use teams::Team;
