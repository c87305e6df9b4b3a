//! Brute-force verifiers that share no code path with the Wick engine:
//! a truncated Fock-space simulation of the lossless pure state and a Monte
//! Carlo sampler of classical stochastic amplitudes.

pub mod fock;
pub mod mc;
pub mod rng;

pub use fock::{fock_expectation, FockConfig, FockObservable, FockResult, FockState};
pub use mc::{mc_estimate, mc_summary, McConfig, McEstimate, McObservable, McScenario, McSummary};
pub use rng::GaussianStream;
