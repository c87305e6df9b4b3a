//! Observables built on the second moments: photon number, total Stokes
//! angular momentum, the `⟨Ĵ²⟩/⟨N̂⟩ < 1/2` separability test, and the
//! `B⁽ⁿ⁾` correlator family.

use num_complex::Complex;
use num_traits::Zero;

use crate::dynamics::{evolve_lossless, SteadyParams};
use crate::error::{Error, Result};
use crate::gaussian::{Arm, GaussianMoments, ModeIndex, Polarization, StatKind};
use crate::matrix::Matrix4;
use crate::real::Real;
use crate::wick::{adjoint_string, wick_moment, OperatorFactor};

/// `⟨N̂⟩`, the trace of the normal matrix.
pub fn total_number<R: Real>(moments: &GaussianMoments<R>) -> f64 {
    moments.normal().trace().re.value()
}

/// Coefficients `K` of the three Stokes operators of one arm, written as
/// `Ĵ_u = Σ_ij K_u[i][j] â†_i â_j` and returned in the order `x, y, z`.
///
/// Built from the polarization bases: `h/v` for `z`, the ±45° modes
/// `(â_h ± â_v)/√2` for `x` and the circular modes `(â_h ± i â_v)/√2` for `y`.
pub fn stokes_generators<R: Real>(arm: Arm) -> [Matrix4<R>; 3] {
    let zero = Complex::<R>::zero();
    let one = Complex::new(R::one(), R::zero());
    let i = Complex::new(R::zero(), R::one());
    let inv_sqrt2 = Complex::new(R::frac_1_sqrt_2(), R::zero());
    let h = ModeIndex::new(arm, Polarization::H).index();
    let v = ModeIndex::new(arm, Polarization::V).index();

    let mode = |ch: Complex<R>, cv: Complex<R>| {
        let mut w = [zero; 4];
        w[h] = ch;
        w[v] = cv;
        w
    };
    // c†c for c = Σ w_i â_i contributes conj(w_i) w_j to K[i][j]
    let number = |w: [Complex<R>; 4]| Matrix4::from_fn(|p, q| w[p].conj() * w[q]);
    let half = R::real(0.5);
    let stokes = |first: [Complex<R>; 4], second: [Complex<R>; 4]| {
        (number(first) - number(second)).scale(half)
    };

    let jx = stokes(mode(inv_sqrt2, inv_sqrt2), mode(inv_sqrt2, -inv_sqrt2));
    let jy = stokes(
        mode(inv_sqrt2, i * inv_sqrt2),
        mode(inv_sqrt2, -i * inv_sqrt2),
    );
    let jz = stokes(mode(one, zero), mode(zero, one));
    [jx, jy, jz]
}

/// `⟨Ĵ²⟩` for `Ĵ = Ĵ^A + Ĵ^B`, expanded into quartic operator strings and
/// evaluated term by term with the Wick engine under the state's own
/// statistics.
pub fn j_squared<R: Real>(moments: &GaussianMoments<R>) -> f64 {
    let a = stokes_generators::<R>(Arm::A);
    let b = stokes_generators::<R>(Arm::B);
    let mut total = Complex::<R>::zero();
    for (ka, kb) in a.iter().zip(b.iter()) {
        let k = *ka + *kb;
        let entries: Vec<(usize, usize, Complex<R>)> = (0..4)
            .flat_map(|i| (0..4).map(move |j| (i, j)))
            .filter(|&(i, j)| !k[(i, j)].is_zero())
            .map(|(i, j)| (i, j, k[(i, j)]))
            .collect();
        for &(i, j, c1) in &entries {
            for &(p, q, c2) in &entries {
                let string = [
                    OperatorFactor::create(ModeIndex::ALL[i]),
                    OperatorFactor::annihilate(ModeIndex::ALL[j]),
                    OperatorFactor::create(ModeIndex::ALL[p]),
                    OperatorFactor::annihilate(ModeIndex::ALL[q]),
                ];
                let value = wick_moment(moments, &string).expect("quartic string is under the cap");
                total = total + c1 * c2 * value;
            }
        }
    }
    total.re.value()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CriterionReport {
    pub j_squared: f64,
    pub total_n: f64,
    pub ratio: f64,
    /// Set only for quantum statistics with `ratio < 1/2`.
    pub entangled: bool,
}

/// `⟨Ĵ²⟩/⟨N̂⟩` and the entanglement verdict.
pub fn separability_ratio<R: Real>(moments: &GaussianMoments<R>) -> Result<CriterionReport> {
    let total_n = total_number(moments);
    if total_n.is_nan() || total_n <= 0.0 {
        return Err(Error::UndefinedRatio(format!(
            "total photon number is {total_n}; ⟨J²⟩/⟨N⟩ needs a populated state"
        )));
    }
    let j_squared = j_squared(moments);
    let ratio = j_squared / total_n;
    Ok(CriterionReport {
        j_squared,
        total_n,
        ratio,
        entangled: moments.stat() == StatKind::Quantum && ratio < 0.5,
    })
}

/// Reference closed forms for the lossless ratio:
/// `3n0(n0+1) / (4n0 + (1+5n0) sinh²r)` (quantum) and
/// `3n0 / (4 + 5 sinh²r)` (classical, `n0` taken as the classical noise).
///
/// These agree with the Gaussian moments only at `r = 0`; see
/// [`exact_ratio`]. The quantum vacuum is assigned its limit `0`.
pub fn closed_form_ratio(params: &SteadyParams) -> f64 {
    let n0 = params.n0;
    let s2 = params.r.sinh().powi(2);
    match params.stat {
        StatKind::Quantum => {
            if n0 == 0.0 {
                0.0
            } else {
                3.0 * n0 * (n0 + 1.0) / (4.0 * n0 + (1.0 + 5.0 * n0) * s2)
            }
        }
        StatKind::Classical => 3.0 * n0 / (4.0 + 5.0 * s2),
    }
}

/// Ratio implied by the lossless moments, `⟨Ĵ²⟩ = 3n0(n0+1)` over
/// `⟨N̂⟩ = 4n(r)` (quantum) or `⟨J²⟩ = 3n0²` over `4n0 cosh 2r` (classical):
/// `3n0(n0+1) / (4n0 + 4(1+2n0) sinh²r)` and `3n0 / (4 + 8 sinh²r)`.
pub fn exact_ratio(params: &SteadyParams) -> f64 {
    let n0 = params.n0;
    let s2 = params.r.sinh().powi(2);
    match params.stat {
        StatKind::Quantum => {
            if n0 == 0.0 {
                0.0
            } else {
                3.0 * n0 * (n0 + 1.0) / (4.0 * n0 + 4.0 * (1.0 + 2.0 * n0) * s2)
            }
        }
        StatKind::Classical => 3.0 * n0 / (4.0 + 8.0 * s2),
    }
}

fn check_occupation(n0: f64) -> Result<()> {
    if n0 >= 0.0 && n0.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "n0 must be finite and ≥ 0, got {n0}"
        )))
    }
}

/// Gain at which the reference closed form crosses `1/2`:
/// `sinh² r* = 2n0(3n0+1)/(5n0+1)`.
pub fn entanglement_threshold(n0: f64) -> Result<f64> {
    check_occupation(n0)?;
    Ok((2.0 * n0 * (3.0 * n0 + 1.0) / (5.0 * n0 + 1.0))
        .sqrt()
        .asinh())
}

/// Gain at which [`exact_ratio`] crosses `1/2`:
/// `sinh² r* = n0(3n0+1) / (2(1+2n0))`.
pub fn exact_threshold(n0: f64) -> Result<f64> {
    check_occupation(n0)?;
    Ok((n0 * (3.0 * n0 + 1.0) / (2.0 * (1.0 + 2.0 * n0)))
        .sqrt()
        .asinh())
}

/// Index set `(n, m, l, k)` of the n-particle destruction operator
/// `B = b_v^{n−m} b_h^{m−l} a_v^{l−k} a_h^k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CorrelatorSpec {
    pub n: u32,
    pub m: u32,
    pub l: u32,
    pub k: u32,
}

impl CorrelatorSpec {
    pub fn new(n: u32, m: u32, l: u32, k: u32) -> Result<Self> {
        if n == 0 || !(k <= l && l <= m && m <= n) {
            return Err(Error::domain(format!(
                "correlator indices need n ≥ 1 and 0 ≤ k ≤ l ≤ m ≤ n, got (n,m,l,k)=({n},{m},{l},{k})"
            )));
        }
        Ok(Self { n, m, l, k })
    }

    /// Every spec of order `n`, in lexicographic `(m, l, k)` order.
    pub fn all_of_order(n: u32) -> Vec<CorrelatorSpec> {
        let mut out = Vec::new();
        for m in 0..=n {
            for l in 0..=m {
                for k in 0..=l {
                    out.push(CorrelatorSpec { n, m, l, k });
                }
            }
        }
        out
    }

    /// Powers of `b_v, b_h, a_v, a_h` in operator order.
    pub fn exponents(&self) -> [(ModeIndex, u32); 4] {
        [
            (ModeIndex::BV, self.n - self.m),
            (ModeIndex::BH, self.m - self.l),
            (ModeIndex::AV, self.l - self.k),
            (ModeIndex::AH, self.k),
        ]
    }

    /// The destruction string `B` itself.
    pub fn destruction_string(&self) -> Vec<OperatorFactor> {
        self.exponents()
            .iter()
            .flat_map(|&(mode, p)| {
                std::iter::repeat_n(OperatorFactor::annihilate(mode), p as usize)
            })
            .collect()
    }

    /// `B† B` as a `2n`-factor string.
    pub fn norm_string(&self) -> Vec<OperatorFactor> {
        let b = self.destruction_string();
        let mut s = adjoint_string(&b);
        s.extend(b);
        s
    }

    /// Conserved pair charges `(#a_h − #b_v, #a_v − #b_h)` of `B`. The pump
    /// creates photons only in `(a_h, b_v)` and `(a_v, b_h)` pairs, so
    /// `⟨B†_α B_α′⟩` vanishes unless both charges agree.
    pub fn pair_charges(&self) -> (i64, i64) {
        let [(_, bv), (_, bh), (_, av), (_, ah)] = self.exponents();
        (ah as i64 - bv as i64, av as i64 - bh as i64)
    }
}

/// `⟨B†_α B_α⟩` under the state's statistics.
pub fn b_correlator<R: Real>(moments: &GaussianMoments<R>, spec: &CorrelatorSpec) -> Result<f64> {
    Ok(wick_moment(moments, &spec.norm_string())?.re.value())
}

/// `⟨B†_α B_α′⟩` for two possibly different specs.
pub fn cross_correlator<R: Real>(
    moments: &GaussianMoments<R>,
    left: &CorrelatorSpec,
    right: &CorrelatorSpec,
) -> Result<Complex<f64>> {
    let mut s = adjoint_string(&left.destruction_string());
    s.extend(right.destruction_string());
    let z = wick_moment(moments, &s)?;
    Ok(Complex::new(z.re.value(), z.im.value()))
}

/// Specs of order `n−1`, `n` and `n+1` whose pair charges differ from
/// `spec`'s, limited to strings within the Wick cap.
pub fn charge_mismatched_partners(spec: &CorrelatorSpec, limit: usize) -> Vec<CorrelatorSpec> {
    let charges = spec.pair_charges();
    let orders = [spec.n.saturating_sub(1), spec.n, spec.n + 1];
    orders
        .iter()
        .filter(|&&n| n >= 1 && (n + spec.n) as usize <= crate::wick::DEFAULT_FACTOR_CAP)
        .flat_map(|&n| CorrelatorSpec::all_of_order(n))
        .filter(|other| other != spec && other.pair_charges() != charges)
        .take(limit)
        .collect()
}

/// One point of the quantum/classical correlator comparison.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QcPoint {
    pub r: f64,
    pub quantum: f64,
    pub classical: f64,
    /// `quantum / classical`.
    pub ratio: f64,
    /// Largest `|⟨B†_α B_α′⟩|` over a sample of charge-mismatched `α′`, for
    /// either statistics. Zero by construction of the pair structure.
    pub off_diagonal: f64,
}

const OFF_DIAGONAL_SAMPLE: usize = 12;

/// Quantum over classical `⟨B†B⟩` along `r_values`, with the classical noise
/// set to `n0 + 1/2` so that the anomalous correlators coincide.
pub fn qc_ratio(
    spec: &CorrelatorSpec,
    params_q: &SteadyParams,
    r_values: &[f64],
) -> Result<Vec<QcPoint>> {
    let partners = charge_mismatched_partners(spec, OFF_DIAGONAL_SAMPLE);
    r_values
        .iter()
        .map(|&r| {
            let q = evolve_lossless(&SteadyParams::new(r, params_q.n0, StatKind::Quantum)?)?;
            let c = evolve_lossless(&SteadyParams::new(
                r,
                params_q.n0 + 0.5,
                StatKind::Classical,
            )?)?;
            let quantum = b_correlator(&q, spec)?;
            let classical = b_correlator(&c, spec)?;
            if classical == 0.0 {
                return Err(Error::UndefinedRatio(format!(
                    "classical correlator vanishes at r={r}"
                )));
            }
            let mut off_diagonal: f64 = 0.0;
            for other in &partners {
                off_diagonal = off_diagonal
                    .max(cross_correlator(&q, spec, other)?.norm())
                    .max(cross_correlator(&c, spec, other)?.norm());
            }
            Ok(QcPoint {
                r,
                quantum,
                classical,
                ratio: quantum / classical,
                off_diagonal,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::thermal_state;

    fn lossless(r: f64, n0: f64, stat: StatKind) -> GaussianMoments {
        evolve_lossless(&SteadyParams::new(r, n0, stat).unwrap()).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn photon_number_examples() {
        assert!(
            (total_number(&thermal_state(0.3, StatKind::Quantum).unwrap()) - 1.2).abs() < 1e-15
        );
        assert!(
            (total_number(&lossless(1.0, 0.0, StatKind::Quantum)) - 5.524391382167263).abs()
                < 1e-12
        );
        assert_eq!(total_number(&GaussianMoments::<f64>::default()), 0.0);
    }

    #[test]
    fn stokes_generators_are_hermitian_and_traceless() {
        for arm in [Arm::A, Arm::B] {
            for k in stokes_generators::<f64>(arm) {
                assert!((k - k.adjoint()).max_abs() < 1e-15);
                assert!(k.trace().norm() < 1e-15);
            }
        }
    }

    #[test]
    fn j_squared_examples() {
        for r in [0.0, 0.5, 1.0, 2.0] {
            assert!(j_squared(&lossless(r, 0.0, StatKind::Quantum)).abs() < 1e-9);
        }
        let q = separability_ratio(&lossless(0.0, 0.3, StatKind::Quantum)).unwrap();
        assert!((q.j_squared - 1.17).abs() < 1e-12);
        assert!((q.ratio - 0.975).abs() < 1e-12);
        let c = separability_ratio(&lossless(0.0, 0.8, StatKind::Classical)).unwrap();
        assert!((c.j_squared - 1.92).abs() < 1e-12);
        assert!((c.ratio - 0.6).abs() < 1e-12);
        assert!(!c.entangled);
    }

    #[test]
    fn separability_examples() {
        let one = separability_ratio(&lossless(0.0, 1.0, StatKind::Quantum)).unwrap();
        assert!((one.ratio - 1.5).abs() < 1e-12);
        assert!(!one.entangled);
        let pure = separability_ratio(&lossless(0.7, 0.0, StatKind::Quantum)).unwrap();
        assert!(pure.ratio.abs() < 1e-9 && pure.entangled);
        let washout = separability_ratio(&lossless(1e-3, 2e-6, StatKind::Quantum)).unwrap();
        assert!(washout.ratio >= 0.5 && !washout.entangled);
        assert!(
            (washout.ratio - 0.50000028).abs() < 1e-6,
            "{}",
            washout.ratio
        );
        assert!(matches!(
            separability_ratio(&GaussianMoments::<f64>::default()),
            Err(Error::UndefinedRatio(_))
        ));
    }

    #[test]
    fn report_is_consistent() {
        let rep = separability_ratio(&lossless(0.4, 0.3, StatKind::Quantum)).unwrap();
        assert!(rel(rep.ratio * rep.total_n, rep.j_squared) < 1e-12);
    }

    #[test]
    fn wick_path_matches_moment_consistent_form() {
        for stat in [StatKind::Quantum, StatKind::Classical] {
            for r in [0.0, 0.5, 1.0, 2.0, 3.0] {
                for n0 in [0.1, 0.3, 1.0, 5.0] {
                    let p = SteadyParams::new(r, n0, stat).unwrap();
                    let wick = separability_ratio(&evolve_lossless(&p).unwrap())
                        .unwrap()
                        .ratio;
                    assert!(rel(wick, exact_ratio(&p)) < 1e-9, "{stat:?} r={r} n0={n0}");
                }
            }
        }
    }

    #[test]
    fn closed_form_examples() {
        let q = SteadyParams::new(0.0, 0.3, StatKind::Quantum).unwrap();
        assert!((closed_form_ratio(&q) - 0.975).abs() < 1e-15);
        let c = SteadyParams::new(0.0, 0.8, StatKind::Classical).unwrap();
        assert!((closed_form_ratio(&c) - 0.6).abs() < 1e-15);
        let far = SteadyParams::new(30.0, 1.0, StatKind::Quantum).unwrap();
        assert!(closed_form_ratio(&far) < 1e-20 && exact_ratio(&far) < 1e-20);
        let vacuum = SteadyParams::new(0.0, 0.0, StatKind::Quantum).unwrap();
        assert_eq!(closed_form_ratio(&vacuum), 0.0);
        assert_eq!(exact_ratio(&vacuum), 0.0);
    }

    #[test]
    fn thresholds() {
        assert_eq!(entanglement_threshold(0.0).unwrap(), 0.0);
        assert!(
            (entanglement_threshold(1.0).unwrap() - (4.0f64 / 3.0).sqrt().asinh()).abs() < 1e-15
        );
        assert!((entanglement_threshold(1.0).unwrap() - 0.98665).abs() < 1e-5);
        let washout = entanglement_threshold(2e-6).unwrap();
        assert!(washout > 1e-3 && (washout - 2e-3).abs() < 1e-4);
        assert!(entanglement_threshold(-1.0).is_err());
        for n0 in [0.01, 0.1, 1.0, 10.0] {
            let r = entanglement_threshold(n0).unwrap();
            let p = SteadyParams::new(r, n0, StatKind::Quantum).unwrap();
            assert!((closed_form_ratio(&p) - 0.5).abs() < 1e-12);
            let r = exact_threshold(n0).unwrap();
            let p = SteadyParams::new(r, n0, StatKind::Quantum).unwrap();
            assert!((exact_ratio(&p) - 0.5).abs() < 1e-12);
            let wick = separability_ratio(&evolve_lossless(&p).unwrap())
                .unwrap()
                .ratio;
            assert!((wick - 0.5).abs() < 1e-9);
        }
        assert!(exact_threshold(f64::NAN).is_err());
    }

    #[test]
    fn correlator_spec_layout() {
        assert!(CorrelatorSpec::new(0, 0, 0, 0).is_err());
        assert!(CorrelatorSpec::new(2, 1, 2, 0).is_err());
        let s = CorrelatorSpec::new(2, 1, 1, 1).unwrap();
        assert_eq!(
            s.destruction_string(),
            vec![
                OperatorFactor::annihilate(ModeIndex::BV),
                OperatorFactor::annihilate(ModeIndex::AH),
            ]
        );
        assert_eq!(s.norm_string().len(), 4);
        assert_eq!(s.pair_charges(), (0, 0));
        for n in 1..=5u32 {
            let all = CorrelatorSpec::all_of_order(n);
            assert_eq!(all.len() as u32, (n + 1) * (n + 2) * (n + 3) / 6);
            for spec in all {
                let total: u32 = spec.exponents().iter().map(|e| e.1).sum();
                assert_eq!(total, n);
            }
        }
    }

    #[test]
    fn correlator_examples() {
        let q = lossless(0.8, 0.0, StatKind::Quantum);
        let n = 0.8f64.sinh().powi(2);
        let a = 0.8f64.sinh() * 0.8f64.cosh();
        let single = CorrelatorSpec::new(1, 1, 1, 1).unwrap();
        assert!(rel(b_correlator(&q, &single).unwrap(), n) < 1e-12);
        let pair = CorrelatorSpec::new(2, 1, 1, 1).unwrap();
        assert!(rel(b_correlator(&q, &pair).unwrap(), n * n + a * a) < 1e-12);
        let vacuum = GaussianMoments::<f64>::default();
        for spec in CorrelatorSpec::all_of_order(3) {
            assert_eq!(b_correlator(&vacuum, &spec).unwrap(), 0.0);
        }
    }

    #[test]
    fn intensity_ratio_at_gain_two() {
        let spec = CorrelatorSpec::new(1, 1, 1, 1).unwrap();
        let params = SteadyParams::new(0.0, 0.0, StatKind::Quantum).unwrap();
        let points = qc_ratio(&spec, &params, &[2.0]).unwrap();
        assert!((points[0].ratio - 0.9634).abs() < 1e-4);
        assert_eq!(points[0].off_diagonal, 0.0);
    }

    #[test]
    fn charge_mismatched_overlaps_vanish() {
        let q = lossless(1.3, 0.2, StatKind::Quantum);
        let c = lossless(1.3, 0.7, StatKind::Classical);
        for spec in CorrelatorSpec::all_of_order(2) {
            let partners = charge_mismatched_partners(&spec, 100);
            assert!(!partners.is_empty());
            for other in partners {
                assert_ne!(other.pair_charges(), spec.pair_charges());
                assert_eq!(cross_correlator(&q, &spec, &other).unwrap().norm(), 0.0);
                assert_eq!(cross_correlator(&c, &spec, &other).unwrap().norm(), 0.0);
            }
        }
    }

    #[test]
    fn charge_matched_overlaps_can_survive() {
        // b_v a_h and b_h a_v carry the same charges and overlap with −|A|²
        let q = lossless(0.9, 0.0, StatKind::Quantum);
        let left = CorrelatorSpec::new(2, 1, 1, 1).unwrap();
        let right = CorrelatorSpec::new(2, 2, 1, 0).unwrap();
        assert_eq!(left.pair_charges(), right.pair_charges());
        let a = 0.9f64.sinh() * 0.9f64.cosh();
        let z = cross_correlator(&q, &left, &right).unwrap();
        assert!((z.re + a * a).abs() < 1e-12 && z.im.abs() < 1e-15);
    }

    #[test]
    fn classical_denominator_must_be_populated() {
        let spec = CorrelatorSpec::new(1, 0, 0, 0).unwrap();
        let params = SteadyParams::new(0.0, 0.0, StatKind::Quantum).unwrap();
        let points = qc_ratio(&spec, &params, &[0.0]).unwrap();
        assert_eq!(points[0].quantum, 0.0);
        assert!(points[0].classical > 0.0);
    }
}
