//! Moment-level simulation of polarization-entangled light from parametric
//! down-conversion in a cavity.
//!
//! The four field modes (two arms, two polarizations) stay Gaussian and
//! zero-mean under every dynamics considered here, so a state is fully
//! described by its normal and anomalous second-moment matrices
//! ([`GaussianMoments`]). Higher-order observables such as the total Stokes
//! angular momentum or the `B⁽ⁿ⁾` correlator family are evaluated from those
//! matrices by a general Wick-expansion engine ([`wick`]).
//!
//! Independent brute-force checks live in [`oracles`]: a truncated Fock-space
//! simulator for the lossless pure-state case and a Monte Carlo sampler of
//! classical stochastic amplitudes.

pub mod criteria;
pub mod dynamics;
pub mod error;
pub mod gaussian;
pub mod matrix;
pub mod oracles;
pub mod quad;
pub mod real;
pub mod wick;

pub use criteria::{
    b_correlator, closed_form_ratio, entanglement_threshold, exact_ratio, exact_threshold,
    j_squared, qc_ratio, separability_ratio, total_number, CorrelatorSpec, CriterionReport,
    QcPoint,
};
pub use dynamics::{
    delta_kernel, evolve_lossless, evolve_lossy, quadrature_moments, LossyParams, SteadyParams,
    Trajectory,
};
pub use error::{Error, Result};
pub use gaussian::{
    thermal_state, validate, Arm, GaussianMoments, ModeIndex, Polarization, StatKind, Violation,
};
pub use real::{Extended, Real};
pub use wick::{wick_moment, OperatorFactor, WickEngine};
