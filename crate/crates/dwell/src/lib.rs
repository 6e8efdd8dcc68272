//! Dwell-time thresholds for bimodal planar switched linear systems.
//!
//! Start with [`analyze_pair`]; [`comparison`] holds the older bounds and
//! [`simulator`] the exact flow and the empirical checks.

// `!(x > 0.0)` is how NaN gets rejected along with the bad values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cases_defective;
pub mod comparison;
pub mod cases_nondefective;
pub mod dwell_core;
pub mod error;
pub mod linalg2;
pub mod rootfind;
pub mod simulator;

pub use dwell_core::{analyze_pair, AnalysisOptions, CaseId, Direction, DwellReport, Verdict};
pub use error::{DwellError, Result};
pub use linalg2::Matrix2;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/frames.md")]
    mod frames {}
    #[doc = include_str!("../../../book/src/cases.md")]
    mod cases {}
    #[doc = include_str!("../../../book/src/comparison.md")]
    mod comparison {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
    #[doc = include_str!("../../../book/src/flower.md")]
    mod flower {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
