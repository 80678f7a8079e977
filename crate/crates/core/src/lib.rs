//! Verification laboratory for a nonlocal Meyers-type example: an
//! anisotropic fractional operator with a homogeneous solution of limited
//! regularity, its Gamma-function closed forms, and independent numerical
//! oracles for all of them.

// `!(x > 0.0)` is how NaN gets rejected along with the out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closedform;
pub mod energy;
pub mod error;
pub mod gauss;
pub mod model;
pub mod parallel;
pub mod pvquad;
pub mod regularity;
pub mod report;
pub mod riesz;
pub mod specfun;
pub mod symcalc;

pub use error::{LabError, Result};
pub use model::{CoeffFlavor, Flavor, FracParams, SymMatrix};
pub use pvquad::{PVResult, QuadratureSpec};
