//! Monte Carlo sampler of classical stochastic amplitudes.
//!
//! Each sample draws the four initial amplitudes as independent circular
//! complex Gaussians with `E|a|² = n₀`, propagates them either through the
//! lossless Bogoliubov map or an Euler–Maruyama discretization of the lossy
//! Langevin equations
//!
//! ```text
//! da = (−λ a + κ(t) S a*) dt + √(2λ n₀) dW,   E|dW|² = dt,
//! ```
//!
//! and evaluates the classical Stokes observables on the result. Samples are
//! split into fixed blocks, each with its own generator stream, and block
//! statistics are merged in block order, so the output does not depend on the
//! thread count.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dynamics::{LossyParams, SteadyParams};
use crate::error::{Error, Result};
use crate::gaussian::{ModeIndex, StatKind};
use crate::oracles::rng::GaussianStream;

/// Samples per generator stream.
pub const BLOCK_SIZE: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum McScenario {
    Lossless(SteadyParams),
    /// Amplitudes are reported at `t_max`.
    Lossy(LossyParams),
}

impl McScenario {
    fn n0(&self) -> f64 {
        match self {
            McScenario::Lossless(p) => p.n0,
            McScenario::Lossy(p) => p.n0,
        }
    }

    fn validate(&self) -> Result<()> {
        let stat = match self {
            McScenario::Lossless(p) => {
                p.validate()?;
                p.stat
            }
            McScenario::Lossy(p) => {
                p.validate()?;
                p.stat
            }
        };
        if stat != StatKind::Classical {
            return Err(Error::domain(
                "Monte Carlo sampling needs classical statistics",
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McConfig {
    pub samples: usize,
    pub seed: u64,
    pub scenario: McScenario,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum McObservable {
    JSquared,
    TotalN,
    /// `⟨J²⟩ / ⟨N⟩` as a ratio of sample means.
    Ratio,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub standard_error: f64,
}

type Amplitudes = [Complex64; 4];

/// Running means and co-moments of the `(J², N)` pair.
#[derive(Clone, Copy, Debug, Default)]
struct PairStats {
    count: f64,
    mean_j: f64,
    mean_n: f64,
    m2_j: f64,
    m2_n: f64,
    c_jn: f64,
}

impl PairStats {
    fn push(&mut self, j: f64, n: f64) {
        self.count += 1.0;
        let dj = j - self.mean_j;
        let dn = n - self.mean_n;
        self.mean_j += dj / self.count;
        self.mean_n += dn / self.count;
        self.m2_j += dj * (j - self.mean_j);
        self.m2_n += dn * (n - self.mean_n);
        self.c_jn += dj * (n - self.mean_n);
    }

    fn merge(self, other: PairStats) -> PairStats {
        if self.count == 0.0 {
            return other;
        }
        if other.count == 0.0 {
            return self;
        }
        let count = self.count + other.count;
        let dj = other.mean_j - self.mean_j;
        let dn = other.mean_n - self.mean_n;
        let w = self.count * other.count / count;
        PairStats {
            count,
            mean_j: self.mean_j + dj * other.count / count,
            mean_n: self.mean_n + dn * other.count / count,
            m2_j: self.m2_j + other.m2_j + dj * dj * w,
            m2_n: self.m2_n + other.m2_n + dn * dn * w,
            c_jn: self.c_jn + other.c_jn + dj * dn * w,
        }
    }

    /// Variances and covariance of the sample means.
    fn mean_covariance(&self) -> (f64, f64, f64) {
        if self.count < 2.0 {
            return (0.0, 0.0, 0.0);
        }
        let d = (self.count - 1.0) * self.count;
        (self.m2_j / d, self.m2_n / d, self.c_jn / d)
    }
}

fn coupled(a: &Amplitudes, i: ModeIndex) -> Complex64 {
    // (S a*)_i with S = +1 on (a_h, b_v) and −1 on (a_v, b_h)
    let partner = |m: ModeIndex| a[m.index()].conj();
    match i {
        ModeIndex::AH => partner(ModeIndex::BV),
        ModeIndex::BV => partner(ModeIndex::AH),
        ModeIndex::AV => -partner(ModeIndex::BH),
        _ => -partner(ModeIndex::AV),
    }
}

fn coupled_all(a: &Amplitudes) -> Amplitudes {
    ModeIndex::ALL.map(|m| coupled(a, m))
}

fn propagate(scenario: &McScenario, rng: &mut GaussianStream) -> Amplitudes {
    let n0 = scenario.n0();
    let mut a: Amplitudes = std::array::from_fn(|_| rng.complex_normal(n0));
    match scenario {
        McScenario::Lossless(p) => {
            let (c, s) = (p.r.cosh(), p.r.sinh());
            let sa = coupled_all(&a);
            for (x, y) in a.iter_mut().zip(sa) {
                *x = *x * c + y * s;
            }
        }
        McScenario::Lossy(p) => {
            let steps = p.steps();
            let h = p.t_max / steps as f64;
            let noise = 2.0 * p.loss_rate * p.n0 * h;
            for step in 0..steps {
                let kappa = p.coupling(step as f64 * h);
                let sa = coupled_all(&a);
                for (x, y) in a.iter_mut().zip(sa) {
                    let drift = -p.loss_rate * *x + kappa * y;
                    *x += drift * h;
                    if noise > 0.0 {
                        *x += rng.complex_normal(noise);
                    }
                }
            }
        }
    }
    a
}

/// Classical `(J², N)` for one set of amplitudes.
fn observables(a: &Amplitudes) -> (f64, f64) {
    let arm = |h: Complex64, v: Complex64| {
        let hv = h.conj() * v;
        [hv.re, -hv.im, 0.5 * (h.norm_sqr() - v.norm_sqr())]
    };
    let ja = arm(a[ModeIndex::AH.index()], a[ModeIndex::AV.index()]);
    let jb = arm(a[ModeIndex::BH.index()], a[ModeIndex::BV.index()]);
    let j2 = ja.iter().zip(jb).map(|(x, y)| (x + y) * (x + y)).sum();
    let n = a.iter().map(|z| z.norm_sqr()).sum();
    (j2, n)
}

fn run_block(config: &McConfig, block: usize) -> PairStats {
    let start = block * BLOCK_SIZE;
    let count = BLOCK_SIZE.min(config.samples - start);
    let mut rng = GaussianStream::new(config.seed, block as u64);
    let mut stats = PairStats::default();
    for _ in 0..count {
        let a = propagate(&config.scenario, &mut rng);
        let (j2, n) = observables(&a);
        stats.push(j2, n);
    }
    stats
}

/// Estimates of all three observables from one set of samples.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McSummary {
    pub j_squared: McEstimate,
    pub total_n: McEstimate,
    /// `None` when every sample has zero photons.
    pub ratio: Option<McEstimate>,
}

impl McSummary {
    pub fn get(&self, observable: McObservable) -> Result<McEstimate> {
        match observable {
            McObservable::JSquared => Ok(self.j_squared),
            McObservable::TotalN => Ok(self.total_n),
            McObservable::Ratio => self
                .ratio
                .ok_or_else(|| Error::UndefinedRatio("sampled ⟨N⟩ is zero".into())),
        }
    }
}

/// Runs the sampler once and summarizes every observable. The ratio uses
/// the delta-method error of a ratio of means.
pub fn mc_summary(config: &McConfig) -> Result<McSummary> {
    if config.samples == 0 {
        return Err(Error::domain("samples must be ≥ 1"));
    }
    config.scenario.validate()?;
    let blocks = config.samples.div_ceil(BLOCK_SIZE);
    let per_block: Vec<PairStats> = (0..blocks)
        .into_par_iter()
        .map(|b| run_block(config, b))
        .collect();
    let stats = per_block
        .into_iter()
        .fold(PairStats::default(), PairStats::merge);
    let (var_j, var_n, cov) = stats.mean_covariance();
    let ratio = (stats.mean_n > 0.0).then(|| {
        let q = stats.mean_j / stats.mean_n;
        let var = (var_j - 2.0 * q * cov + q * q * var_n) / (stats.mean_n * stats.mean_n);
        McEstimate {
            mean: q,
            standard_error: var.max(0.0).sqrt(),
        }
    });
    Ok(McSummary {
        j_squared: McEstimate {
            mean: stats.mean_j,
            standard_error: var_j.sqrt(),
        },
        total_n: McEstimate {
            mean: stats.mean_n,
            standard_error: var_n.sqrt(),
        },
        ratio,
    })
}

/// Sample mean and standard error of one observable.
pub fn mc_estimate(config: &McConfig, observable: McObservable) -> Result<McEstimate> {
    mc_summary(config)?.get(observable)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::{separability_ratio, total_number};
    use crate::dynamics::evolve_lossless;

    fn lossless(r: f64, n0: f64, samples: usize, seed: u64) -> McConfig {
        McConfig {
            samples,
            seed,
            scenario: McScenario::Lossless(SteadyParams::new(r, n0, StatKind::Classical).unwrap()),
        }
    }

    #[test]
    fn stats_merge_matches_single_pass() {
        let data: Vec<(f64, f64)> = (0..50)
            .map(|i| ((i as f64).sin(), (i as f64 * 0.3).cos()))
            .collect();
        let mut whole = PairStats::default();
        let mut left = PairStats::default();
        let mut right = PairStats::default();
        for (i, &(j, n)) in data.iter().enumerate() {
            whole.push(j, n);
            if i < 17 {
                left.push(j, n)
            } else {
                right.push(j, n)
            }
        }
        let merged = left.merge(right);
        assert!((merged.mean_j - whole.mean_j).abs() < 1e-14);
        assert!((merged.m2_n - whole.m2_n).abs() < 1e-12);
        assert!((merged.c_jn - whole.c_jn).abs() < 1e-12);
    }

    #[test]
    fn total_number_at_zero_gain() {
        let e = mc_estimate(&lossless(0.0, 0.8, 100_000, 7), McObservable::TotalN).unwrap();
        assert!((e.mean - 3.2).abs() < 3.0 * e.standard_error, "{e:?}");
    }

    #[test]
    fn ratio_at_zero_gain() {
        let e = mc_estimate(&lossless(0.0, 0.8, 100_000, 11), McObservable::Ratio).unwrap();
        assert!((e.mean - 0.6).abs() < 3.0 * e.standard_error, "{e:?}");
    }

    #[test]
    fn matches_moments_with_gain() {
        let moments =
            evolve_lossless(&SteadyParams::new(0.7, 0.5, StatKind::Classical).unwrap()).unwrap();
        let report = separability_ratio(&moments).unwrap();
        let cfg = lossless(0.7, 0.5, 50_000, 3);
        let n = mc_estimate(&cfg, McObservable::TotalN).unwrap();
        let j = mc_estimate(&cfg, McObservable::JSquared).unwrap();
        assert!((n.mean - total_number(&moments)).abs() < 4.0 * n.standard_error);
        assert!((j.mean - report.j_squared).abs() < 4.0 * j.standard_error);
    }

    #[test]
    fn reproducible_and_seed_dependent() {
        let cfg = lossless(1.0, 0.8, 10_000, 42);
        let a = mc_estimate(&cfg, McObservable::Ratio).unwrap();
        let b = mc_estimate(&cfg, McObservable::Ratio).unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        let c = mc_estimate(&McConfig { seed: 43, ..cfg }, McObservable::Ratio).unwrap();
        assert_ne!(a.mean, c.mean);
    }

    #[test]
    fn rejects_quantum_and_empty_runs() {
        let q = McConfig {
            samples: 10,
            seed: 1,
            scenario: McScenario::Lossless(SteadyParams::new(0.1, 0.0, StatKind::Quantum).unwrap()),
        };
        assert!(matches!(
            mc_estimate(&q, McObservable::TotalN),
            Err(Error::Domain(_))
        ));
        let empty = McConfig {
            samples: 0,
            ..lossless(0.1, 0.8, 1, 1)
        };
        assert!(mc_estimate(&empty, McObservable::TotalN).is_err());
        let dark = lossless(0.3, 0.0, 100, 1);
        assert!(matches!(
            mc_estimate(&dark, McObservable::Ratio),
            Err(Error::UndefinedRatio(_))
        ));
    }

    #[test]
    fn lossy_sampling_follows_the_moment_equations() {
        let params = LossyParams {
            kappa0: 1.0,
            coupling_decay: 0.1,
            loss_rate: 0.1,
            n0: 0.8,
            t_max: 1.0,
            dt: 1e-3,
            stat: StatKind::Classical,
        };
        let exact = crate::dynamics::quadrature_moments(&params, 1.0).unwrap();
        let cfg = McConfig {
            samples: 40_000,
            seed: 5,
            scenario: McScenario::Lossy(params),
        };
        let n = mc_estimate(&cfg, McObservable::TotalN).unwrap();
        assert!(
            (n.mean - total_number(&exact)).abs() < 4.0 * n.standard_error,
            "{n:?}"
        );
    }
}
