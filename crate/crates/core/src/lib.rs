//! Exchangeable exogenous-shock copulas of ordered-product form
//! `C(u) = g_1(u_(1)) g_2(u_(2)) ... g_d(u_(d))`, where `u_(1) <= ... <= u_(d)` are
//! the sorted arguments and `g_1` is the identity.
//!
//! The crate builds such copulas, checks the equivalent validity conditions on
//! grids, converts between the factors `g_k` and the shock laws `H_{m,d-m}`, and
//! samples through two independent routes:
//!
//! * [`sample_shock`]: one shock per nonempty subset of coordinates, each
//!   coordinate taking the maximum of the shocks that touch it;
//! * [`sample_frailty`]: first passages of one additive subordinator over
//!   i.i.d. exponential triggers.
//!
//! ```
//! use exshock::{families, validate, Condition, GridSpec};
//!
//! let c = families::marshall_olkin(&[1.0, 0.5, 0.25], 3).unwrap();
//! assert!((c.cdf(&[0.5, 0.5, 0.5]).unwrap() - 0.5 * 0.5f64.powf(0.75)).abs() < 1e-15);
//! assert!(validate(&c, Condition::TopShockLaws, &GridSpec::default()).passed());
//! ```

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod batch;
pub mod bernstein;
pub mod copula;
pub mod diagnostics;
pub mod distortion;
mod error;
pub mod families;
pub mod frailty;
pub mod rng;
pub mod shock;
pub mod validity;

pub use batch::{BatchMetadata, SampleBatch, SampleMethod};
pub use bernstein::{AdditiveKind, BernsteinFamily, LaplaceExponent};
pub use copula::{g_from_h, h_from_g, make_copula, EvalGrid, HFamily, OrderedFactorCopula};
pub use distortion::{generalized_inverse, DistortionFn, DistortionKind};
pub use error::{Error, Result};
pub use frailty::{copula_from_bernstein, first_passage, sample_frailty, simulate_path, SubordinatorPath, TimeGrid};
pub use shock::{build_shock_model, sample_shock, ShockModelSpec};
pub use validity::{
    compute_g, detect_extreme_value, is_d_monotone, tail_dependence, validate, validate_h_family, Condition,
    GridSpec, MonotoneSequence, TailDependence, ValidityReport, Verdict, Witness, WitnessKind,
};
