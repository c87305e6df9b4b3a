//! Mode bookkeeping and the second-moment representation of a zero-mean
//! Gaussian state of the four field modes.

use std::fmt;

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::matrix::Matrix4;
use crate::real::Real;

/// Absolute slack allowed on every invariant checked by [`validate`].
pub const VALIDATION_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Arm {
    A,
    B,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarization {
    H,
    V,
}

/// One of the four modes. The derived order is the canonical one:
/// `Ah < Av < Bh < Bv`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeIndex {
    pub arm: Arm,
    pub polarization: Polarization,
}

impl ModeIndex {
    pub const AH: ModeIndex = ModeIndex::new(Arm::A, Polarization::H);
    pub const AV: ModeIndex = ModeIndex::new(Arm::A, Polarization::V);
    pub const BH: ModeIndex = ModeIndex::new(Arm::B, Polarization::H);
    pub const BV: ModeIndex = ModeIndex::new(Arm::B, Polarization::V);

    pub const ALL: [ModeIndex; 4] = [Self::AH, Self::AV, Self::BH, Self::BV];

    pub const fn new(arm: Arm, polarization: Polarization) -> Self {
        Self { arm, polarization }
    }

    #[inline]
    pub const fn index(self) -> usize {
        let arm = match self.arm {
            Arm::A => 0,
            Arm::B => 2,
        };
        let pol = match self.polarization {
            Polarization::H => 0,
            Polarization::V => 1,
        };
        arm + pol
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let arm = match self.arm {
            Arm::A => 'a',
            Arm::B => 'b',
        };
        let pol = match self.polarization {
            Polarization::H => 'h',
            Polarization::V => 'v',
        };
        write!(f, "{arm}_{pol}")
    }
}

/// Whether moments are quantum expectation values or classical statistical
/// averages. Only quantum statistics carry the commutator term
/// `⟨â â†⟩ = ⟨â† â⟩ + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StatKind {
    Quantum,
    Classical,
}

impl StatKind {
    /// `1` for quantum, `0` for classical statistics.
    pub fn commutator(self) -> f64 {
        match self {
            StatKind::Quantum => 1.0,
            StatKind::Classical => 0.0,
        }
    }
}

/// Second moments of a zero-mean four-mode Gaussian state.
///
/// `normal[(i, j)] = ⟨â†_i â_j⟩` and `anomalous[(i, j)] = ⟨â_i â_j⟩` (or
/// the classical amplitude averages). Construction does not check the
/// physical invariants; [`validate`] reports them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianMoments<R = f64> {
    normal: Matrix4<R>,
    anomalous: Matrix4<R>,
    stat: StatKind,
}

impl<R: Real> GaussianMoments<R> {
    pub fn new(normal: Matrix4<R>, anomalous: Matrix4<R>, stat: StatKind) -> Self {
        Self {
            normal,
            anomalous,
            stat,
        }
    }

    /// Thermal input: `N = n0·I`, `M = 0`.
    pub fn thermal(n0: f64, stat: StatKind) -> Result<Self> {
        if n0 < 0.0 || !n0.is_finite() {
            return Err(Error::domain(format!(
                "thermal occupation must be ≥ 0, got {n0}"
            )));
        }
        Ok(Self::new(
            Matrix4::from_diagonal(Complex::new(R::real(n0), R::zero())),
            Matrix4::zeros(),
            stat,
        ))
    }

    pub fn normal(&self) -> &Matrix4<R> {
        &self.normal
    }

    pub fn anomalous(&self) -> &Matrix4<R> {
        &self.anomalous
    }

    pub fn stat(&self) -> StatKind {
        self.stat
    }

    pub fn occupation(&self, mode: ModeIndex) -> f64 {
        self.normal[(mode.index(), mode.index())].re.value()
    }

    /// `⟨â_i â_j⟩` for the given pair of modes.
    pub fn pair_amplitude(&self, i: ModeIndex, j: ModeIndex) -> Complex<f64> {
        let z = self.anomalous[(i.index(), j.index())];
        Complex::new(z.re.value(), z.im.value())
    }

    /// Same state with every second moment multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let s = R::real(s);
        Self::new(self.normal.scale(s), self.anomalous.scale(s), self.stat)
    }

    /// Rounds the moments to `f64`.
    pub fn to_f64(&self) -> GaussianMoments<f64> {
        let lower = |z: Complex<R>| Complex::new(z.re.value(), z.im.value());
        GaussianMoments::new(self.normal.map(lower), self.anomalous.map(lower), self.stat)
    }

    pub fn with_stat(&self, stat: StatKind) -> Self {
        Self { stat, ..*self }
    }
}

impl GaussianMoments<f64> {
    pub fn lift<S: Real>(&self) -> GaussianMoments<S> {
        let lift = |z: Complex<f64>| Complex::new(S::real(z.re), S::real(z.im));
        GaussianMoments::new(self.normal.map(lift), self.anomalous.map(lift), self.stat)
    }
}

pub fn thermal_state(n0: f64, stat: StatKind) -> Result<GaussianMoments> {
    GaussianMoments::thermal(n0, stat)
}

/// A broken invariant of [`GaussianMoments`], with the offending indices.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    NonHermitianNormal {
        i: usize,
        j: usize,
        defect: f64,
    },
    NegativeOccupation {
        i: usize,
        value: f64,
    },
    ComplexOccupation {
        i: usize,
        imag: f64,
    },
    AsymmetricAnomalous {
        i: usize,
        j: usize,
        defect: f64,
    },
    /// `|M_ij|² > N_ii (N_jj + c)` with `c` the commutator term.
    PairBound {
        i: usize,
        j: usize,
        lhs: f64,
        rhs: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonHermitianNormal { i, j, defect } => {
                write!(f, "N[{i}][{j}] != conj(N[{j}][{i}]) (defect {defect:e})")
            }
            Violation::NegativeOccupation { i, value } => write!(f, "N[{i}][{i}] = {value} < 0"),
            Violation::ComplexOccupation { i, imag } => {
                write!(f, "N[{i}][{i}] has imaginary part {imag:e}")
            }
            Violation::AsymmetricAnomalous { i, j, defect } => {
                write!(f, "M[{i}][{j}] != M[{j}][{i}] (defect {defect:e})")
            }
            Violation::PairBound { i, j, lhs, rhs } => {
                write!(f, "|M[{i}][{j}]|² = {lhs} exceeds bound {rhs}")
            }
        }
    }
}

fn modulus<R: Real>(z: Complex<R>) -> f64 {
    z.norm_sqr().value().sqrt()
}

/// Lists every violated invariant; an empty list means the moments are
/// physical.
///
/// The slack is `1e-9` absolute, widened by a few ulps of the compared
/// magnitudes so that states evaluated at large gain are not rejected for
/// rounding alone.
pub fn validate<R: Real>(moments: &GaussianMoments<R>) -> Vec<Violation> {
    let n = &moments.normal;
    let m = &moments.anomalous;
    let c = moments.stat.commutator();
    let slack = |scale: f64| VALIDATION_TOLERANCE + 16.0 * f64::EPSILON * scale;
    let mut out = Vec::new();

    for i in 0..4 {
        let d = n[(i, i)];
        if d.im.value().abs() > slack(d.re.value().abs()) {
            out.push(Violation::ComplexOccupation {
                i,
                imag: d.im.value(),
            });
        }
        if d.re.value() < -slack(0.0) {
            out.push(Violation::NegativeOccupation {
                i,
                value: d.re.value(),
            });
        }
        for j in (i + 1)..4 {
            let defect = modulus(n[(i, j)] - n[(j, i)].conj());
            if defect > slack(modulus(n[(i, j)])) {
                out.push(Violation::NonHermitianNormal { i, j, defect });
            }
            let defect = modulus(m[(i, j)] - m[(j, i)]);
            if defect > slack(modulus(m[(i, j)])) {
                out.push(Violation::AsymmetricAnomalous { i, j, defect });
            }
        }
    }

    for i in 0..4 {
        for j in 0..4 {
            if i == j {
                continue;
            }
            let lhs = m[(i, j)].norm_sqr();
            let rhs = n[(i, i)].re * (n[(j, j)].re + R::real(c));
            let (lhs_f, rhs_f) = (lhs.value(), rhs.value());
            if (lhs - rhs).value() > slack(lhs_f.abs().max(rhs_f.abs())) {
                out.push(Violation::PairBound {
                    i,
                    j,
                    lhs: lhs_f,
                    rhs: rhs_f,
                });
            }
        }
    }
    out
}

impl<R: Real> Default for GaussianMoments<R> {
    fn default() -> Self {
        Self::new(Matrix4::zeros(), Matrix4::zeros(), StatKind::Quantum)
    }
}

impl<R: Real> GaussianMoments<R> {
    pub fn is_vacuum(&self) -> bool {
        (0..4).all(|i| self.normal[(i, i)].is_zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex<f64> {
        Complex::new(re, 0.0)
    }

    #[test]
    fn canonical_mode_order() {
        let idx: Vec<usize> = ModeIndex::ALL.iter().map(|m| m.index()).collect();
        assert_eq!(idx, vec![0, 1, 2, 3]);
        let mut sorted = ModeIndex::ALL;
        sorted.sort();
        assert_eq!(sorted, ModeIndex::ALL);
        assert_eq!(ModeIndex::from_index(3), Some(ModeIndex::BV));
        assert_eq!(ModeIndex::from_index(4), None);
        assert_eq!(ModeIndex::AV.to_string(), "a_v");
    }

    #[test]
    fn thermal_states() {
        let vac = thermal_state(0.0, StatKind::Quantum).unwrap();
        assert!(vac.is_vacuum());
        assert_eq!(vac.anomalous().max_abs(), 0.0);

        let q = thermal_state(0.3, StatKind::Quantum).unwrap();
        for mode in ModeIndex::ALL {
            assert_eq!(q.occupation(mode), 0.3);
        }
        assert_eq!(q.normal()[(0, 1)], c(0.0));
        assert_eq!(q.anomalous().max_abs(), 0.0);

        let cl = thermal_state(0.8, StatKind::Classical).unwrap();
        assert_eq!(cl.occupation(ModeIndex::BV), 0.8);
        assert_eq!(cl.stat(), StatKind::Classical);

        assert!(matches!(
            thermal_state(-0.1, StatKind::Quantum),
            Err(Error::Domain(_))
        ));
        assert!(thermal_state(f64::NAN, StatKind::Quantum).is_err());
    }

    #[test]
    fn valid_thermal_state_has_no_violations() {
        assert!(validate(&thermal_state(0.3, StatKind::Quantum).unwrap()).is_empty());
        assert!(validate(&thermal_state(0.0, StatKind::Classical).unwrap()).is_empty());
    }

    #[test]
    fn quantum_pair_bound_equality_is_allowed() {
        let (n0, n3) = (0.7, 1.3);
        let amp = (n0 * (n3 + 1.0_f64)).sqrt();
        let normal = Matrix4::from_fn(|i, j| match (i, j) {
            (0, 0) => c(n0),
            (3, 3) => c(n3),
            (1, 1) | (2, 2) => c(1.0),
            _ => c(0.0),
        });
        // the reverse pair needs |M|² ≤ N_33 (N_00 + 1) as well, which holds here
        let anomalous = Matrix4::from_fn(|i, j| match (i, j) {
            (0, 3) | (3, 0) => c(amp),
            _ => c(0.0),
        });
        let state = GaussianMoments::new(normal, anomalous, StatKind::Quantum);
        assert!(validate(&state).is_empty(), "{:?}", validate(&state));
    }

    #[test]
    fn classical_pair_bound_violation_is_reported() {
        let normal = Matrix4::from_diagonal(c(0.5));
        let anomalous = Matrix4::from_fn(|i, j| match (i, j) {
            (0, 3) | (3, 0) => c(1.0),
            _ => c(0.0),
        });
        let state = GaussianMoments::new(normal, anomalous, StatKind::Classical);
        let v = validate(&state);
        assert!(v.contains(&Violation::PairBound {
            i: 0,
            j: 3,
            lhs: 1.0,
            rhs: 0.25
        }));
        assert!(v.contains(&Violation::PairBound {
            i: 3,
            j: 0,
            lhs: 1.0,
            rhs: 0.25
        }));
        // 1 > 0.5 · 1.5, so the quantum bound is broken too
        assert!(!validate(&state.with_stat(StatKind::Quantum)).is_empty());
    }

    #[test]
    fn structural_violations_are_reported() {
        let mut normal = Matrix4::from_diagonal(c(0.2));
        normal[(0, 1)] = Complex::new(0.1, 0.1);
        normal[(1, 1)] = c(-0.5);
        let mut anomalous = Matrix4::zeros();
        anomalous[(0, 2)] = c(0.01);
        let v = validate(&GaussianMoments::new(normal, anomalous, StatKind::Quantum));
        assert!(v
            .iter()
            .any(|x| matches!(x, Violation::NonHermitianNormal { i: 0, j: 1, .. })));
        assert!(v
            .iter()
            .any(|x| matches!(x, Violation::NegativeOccupation { i: 1, .. })));
        assert!(v
            .iter()
            .any(|x| matches!(x, Violation::AsymmetricAnomalous { i: 0, j: 2, .. })));
    }
}
