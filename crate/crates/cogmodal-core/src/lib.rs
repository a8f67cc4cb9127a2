//! Model checking for a dynamic logic of graded cognitive attitudes.
//!
//! The crate covers:
//!
//! * [`syntax`] — formulas and cognitive programs, a parser and renderer for
//!   the surface language, and the expansion of attitude operators into
//!   program modalities;
//! * [`model`] — finite multi-agent cognitive models with plausibility and
//!   desirability ranks, JSON (de)serialization and constraint validation;
//! * [`checker`] — program relations, truth sets, direct attitude
//!   evaluators and per-model validity;
//! * [`dynamics`] — radical and conservative belief/desire upgrades, the
//!   relation transformer for upgraded models, and the rewriter that
//!   eliminates revision operators from formulas;
//! * [`games`] — best response, subjective Nash equilibria and rationality
//!   for models with action structure;
//! * [`genfuzz`] — seeded model/formula generators and the fuzz suites that
//!   recheck the logic's laws on random models.

pub mod checker;
pub mod dynamics;
pub mod games;
pub mod genfuzz;
pub mod model;
pub mod syntax;

pub use checker::{EvalError, Session};
pub use model::{Model, ModelError, PairSet, ValidationReport, Violation, WorldSet};
pub use syntax::{
    Attitude, Dim, Flavor, Formula, Mode, ParseError, PrefArg, Program, RevisionOp,
};
