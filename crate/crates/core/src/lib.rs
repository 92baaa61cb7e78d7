//! Solver toolkit for hybrid flow shops with multiprocessor tasks
//! (`Fm(m1,...,mm)|size_ij|Cmax`).
//!
//! - [`model`]: instances, schedules, feasibility checking, stage reversal.
//! - [`rules`]: priority rules producing job orderings.
//! - [`sgs`]: serial and parallel schedule generation schemes.
//! - [`bounds`]: root and partial-schedule makespan lower bounds.
//! - [`search`]: climbing depth-bounded adjacent discrepancy search.
//! - [`oracle`]: exact optimum of tiny instances by enumeration.
//! - [`benchgen`]: benchmark instance generator.
//! - [`harness`]: batch runs, deviation metrics and summaries.

pub mod benchgen;
pub mod bounds;
pub mod error;
pub mod format;
pub mod harness;
pub mod model;
pub mod oracle;
pub mod rules;
pub mod search;
pub mod sgs;

pub use error::{Error, Result};
pub use model::{Instance, Schedule, Task, Time};
