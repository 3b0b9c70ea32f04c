//! Numerical verification of differential and classical Harnack estimates for
//! the Fisher-KPP equation `f_t = Δf + cf(1-f)` on flat periodic domains.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classical;
pub mod error;
pub mod field;
pub mod harnack;
pub mod params;
pub mod phi;
pub mod solver;
pub mod study;
pub mod waves;

pub use error::{Error, Result};
pub use params::{ParamSet, Regime};
pub use phi::{PhiFamily, PhiProfile};

/// Formats a real with 17 significant digits, the precision used by every
/// text artefact this crate writes.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}
