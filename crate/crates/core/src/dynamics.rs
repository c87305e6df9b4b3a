//! Second-moment dynamics of the four-mode down-conversion system.
//!
//! The pump couples `a_h ↔ b_v†` with `+κ` and `a_v ↔ b_h†` with `−κ`. In the
//! lossless case the accumulated coupling is the interaction parameter `r`
//! and the evolution is a Bogoliubov transformation. With cavity losses the
//! field obeys linear Langevin equations
//!
//! ```text
//! dâ/dt = −λ â + κ(t) S â† + √(2λ) f̂,   κ(t) = κ₀ e^{−Λt}
//! ```
//!
//! with bath noise of occupation `n0`; their second moments obey a closed
//! linear ODE which is integrated here by fixed-step RK4.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::gaussian::{GaussianMoments, ModeIndex, StatKind};
use crate::matrix::{Matrix4, Matrix8};
use crate::quad::adaptive_simpson;
use crate::real::{cosh_sinh, Real};

/// Relative change tolerated when the integration step is halved.
pub const STEP_HALVING_TOLERANCE: f64 = 1e-6;

/// Absolute tolerance of the explicit-solution quadrature.
pub const QUADRATURE_TOLERANCE: f64 = 1e-9;

fn check_non_negative(name: &str, value: f64) -> Result<()> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "{name} must be finite and ≥ 0, got {value}"
        )))
    }
}

/// Pump coupling pattern: `+1` on `(a_h, b_v)`, `−1` on `(a_v, b_h)`.
pub fn pump_coupling<R: Real>() -> Matrix4<R> {
    let one = Complex::new(R::one(), R::zero());
    let mut s = Matrix4::zeros();
    let (ah, av, bh, bv) = (
        ModeIndex::AH.index(),
        ModeIndex::AV.index(),
        ModeIndex::BH.index(),
        ModeIndex::BV.index(),
    );
    s[(ah, bv)] = one;
    s[(bv, ah)] = one;
    s[(av, bh)] = -one;
    s[(bh, av)] = -one;
    s
}

/// Lossless scenario: interaction parameter `r` applied to a thermal input
/// of occupation `n0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SteadyParams {
    pub r: f64,
    pub n0: f64,
    pub stat: StatKind,
}

impl SteadyParams {
    pub fn new(r: f64, n0: f64, stat: StatKind) -> Result<Self> {
        let p = Self { r, n0, stat };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_non_negative("r", self.r)?;
        check_non_negative("n0", self.n0)
    }
}

/// Cavity scenario with decaying pump and symmetric losses.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossyParams {
    /// Initial coupling κ₀ (1/time).
    pub kappa0: f64,
    /// Pump decay rate Λ (1/time).
    pub coupling_decay: f64,
    /// Cavity loss rate λ (1/time), equal for all four modes.
    pub loss_rate: f64,
    /// Bath occupation, also the initial thermal occupation.
    pub n0: f64,
    pub t_max: f64,
    pub dt: f64,
    pub stat: StatKind,
}

impl LossyParams {
    pub fn validate(&self) -> Result<()> {
        check_non_negative("kappa0", self.kappa0)?;
        check_non_negative("coupling_decay", self.coupling_decay)?;
        check_non_negative("loss_rate", self.loss_rate)?;
        check_non_negative("n0", self.n0)?;
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(Error::domain(format!(
                "t_max must be > 0, got {}",
                self.t_max
            )));
        }
        if !(self.dt > 0.0 && self.dt <= self.t_max) {
            return Err(Error::domain(format!(
                "dt must lie in (0, t_max], got {} with t_max {}",
                self.dt, self.t_max
            )));
        }
        Ok(())
    }

    /// κ(t) = κ₀ e^{−Λt}.
    pub fn coupling(&self, t: f64) -> f64 {
        if self.coupling_decay == 0.0 {
            self.kappa0
        } else {
            self.kappa0 * (-self.coupling_decay * t).exp()
        }
    }

    /// Number of RK4 steps; the step actually used is `t_max / steps`.
    pub fn steps(&self) -> usize {
        ((self.t_max / self.dt).round() as usize).max(1)
    }

    pub fn with_stat(&self, stat: StatKind, n0: f64) -> Self {
        Self { stat, n0, ..*self }
    }
}

/// Lossless evolution in `f64`.
pub fn evolve_lossless(params: &SteadyParams) -> Result<GaussianMoments> {
    evolve_lossless_in::<f64>(params)
}

/// Applies the 8×8 Bogoliubov map `ξ → T ξ`, `ξ = (â, â†)`, to the thermal
/// input, acting on the ordered second-moment matrix `G_pq = ⟨ξ_p ξ_q⟩`.
pub fn evolve_lossless_in<R: Real>(params: &SteadyParams) -> Result<GaussianMoments<R>> {
    params.validate()?;
    let input = GaussianMoments::<R>::thermal(params.n0, params.stat)?;
    let (cosh, sinh) = cosh_sinh(R::real(params.r));
    let u = Matrix4::<R>::identity().scale(cosh);
    let v = pump_coupling::<R>().scale(sinh);
    let t = block(&u, &v, &v.conj(), &u.conj());
    let g = ordered_moments(&input);
    let evolved = t * g * t.transpose();
    Ok(from_ordered_moments(&evolved, params.stat))
}

fn block<R: Real>(
    ul: &Matrix4<R>,
    ur: &Matrix4<R>,
    ll: &Matrix4<R>,
    lr: &Matrix4<R>,
) -> Matrix8<R> {
    Matrix8::from_fn(|i, j| match (i < 4, j < 4) {
        (true, true) => ul[(i, j)],
        (true, false) => ur[(i, j - 4)],
        (false, true) => ll[(i - 4, j)],
        (false, false) => lr[(i - 4, j - 4)],
    })
}

fn ordered_moments<R: Real>(m: &GaussianMoments<R>) -> Matrix8<R> {
    let c = Matrix4::from_diagonal(Complex::new(R::real(m.stat().commutator()), R::zero()));
    block(
        m.anomalous(),
        &(m.normal().transpose() + c),
        m.normal(),
        &m.anomalous().conj(),
    )
}

fn from_ordered_moments<R: Real>(g: &Matrix8<R>, stat: StatKind) -> GaussianMoments<R> {
    let anomalous = Matrix4::from_fn(|i, j| g[(i, j)]);
    let normal = Matrix4::from_fn(|i, j| g[(i + 4, j)]);
    GaussianMoments::new(normal, anomalous, stat)
}

/// Accumulated coupling `Δ(t, t′) = ∫_{t′}^{t} κ(s) ds`.
pub fn delta_kernel(params: &LossyParams, t: f64, t_prime: f64) -> Result<f64> {
    if t.is_nan() || t_prime.is_nan() || t_prime < 0.0 || t_prime > t {
        return Err(Error::domain(format!(
            "delta kernel needs 0 ≤ t′ ≤ t, got t′={t_prime}, t={t}"
        )));
    }
    if t == t_prime {
        return Ok(0.0);
    }
    if params.coupling_decay == 0.0 {
        return Ok(params.kappa0 * (t - t_prime));
    }
    let lambda = params.coupling_decay;
    Ok(-(params.kappa0 / lambda) * (-lambda * t_prime).exp() * (-lambda * (t - t_prime)).exp_m1())
}

/// Moments sampled on a uniform time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub moments: Vec<GaussianMoments>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &GaussianMoments)> {
        self.times.iter().copied().zip(self.moments.iter())
    }
}

#[derive(Clone, Copy)]
struct MomentState {
    normal: Matrix4<f64>,
    anomalous: Matrix4<f64>,
}

impl MomentState {
    fn axpy(&self, h: f64, k: &MomentState) -> MomentState {
        MomentState {
            normal: self.normal + k.normal.scale(h),
            anomalous: self.anomalous + k.anomalous.scale(h),
        }
    }
}

struct MomentOde {
    params: LossyParams,
    coupling: Matrix4<f64>,
    commutator: f64,
}

impl MomentOde {
    fn new(params: &LossyParams) -> Self {
        Self {
            params: *params,
            coupling: pump_coupling(),
            commutator: params.stat.commutator(),
        }
    }

    // dN/dt = −2λN + κ(S M + M* S) + 2λ n0 I
    // dM/dt = −2λM + κ(S N + Nᵀ S + c S)
    fn rhs(&self, t: f64, y: &MomentState) -> MomentState {
        let kappa = self.params.coupling(t);
        let loss = self.params.loss_rate;
        let s = &self.coupling;
        let bath = Matrix4::from_diagonal(Complex::new(2.0 * loss * self.params.n0, 0.0));
        let normal = y.normal.scale(-2.0 * loss)
            + (*s * y.anomalous + y.anomalous.conj() * *s).scale(kappa)
            + bath;
        let anomalous = y.anomalous.scale(-2.0 * loss)
            + (*s * y.normal + y.normal.transpose() * *s + s.scale(self.commutator)).scale(kappa);
        MomentState { normal, anomalous }
    }

    fn integrate(&self, steps: usize) -> Vec<MomentState> {
        let h = self.params.t_max / steps as f64;
        let start = GaussianMoments::<f64>::thermal(self.params.n0, self.params.stat)
            .expect("validated occupation");
        let mut y = MomentState {
            normal: *start.normal(),
            anomalous: *start.anomalous(),
        };
        let mut out = Vec::with_capacity(steps + 1);
        out.push(y);
        for k in 0..steps {
            let t = k as f64 * h;
            let k1 = self.rhs(t, &y);
            let k2 = self.rhs(t + 0.5 * h, &y.axpy(0.5 * h, &k1));
            let k3 = self.rhs(t + 0.5 * h, &y.axpy(0.5 * h, &k2));
            let k4 = self.rhs(t + h, &y.axpy(h, &k3));
            y = MomentState {
                normal: y.normal
                    + (k1.normal + k2.normal.scale(2.0) + k3.normal.scale(2.0) + k4.normal)
                        .scale(h / 6.0),
                anomalous: y.anomalous
                    + (k1.anomalous
                        + k2.anomalous.scale(2.0)
                        + k3.anomalous.scale(2.0)
                        + k4.anomalous)
                        .scale(h / 6.0),
            };
            out.push(y);
        }
        out
    }
}

/// Integrates the moment ODE with classic RK4 on the grid `k·t_max/steps`.
///
/// The same run is repeated with half the step; if any grid point moves by
/// more than [`STEP_HALVING_TOLERANCE`] relative to the largest moment at
/// that time, an accuracy error is returned.
pub fn evolve_lossy(params: &LossyParams) -> Result<Trajectory> {
    params.validate()?;
    let ode = MomentOde::new(params);
    let steps = params.steps();
    let (coarse, fine) = rayon::join(|| ode.integrate(steps), || ode.integrate(2 * steps));

    for (k, y) in coarse.iter().enumerate() {
        let z = &fine[2 * k];
        let scale = z.normal.max_abs().max(z.anomalous.max_abs());
        let diff = (y.normal - z.normal)
            .max_abs()
            .max((y.anomalous - z.anomalous).max_abs());
        if diff > STEP_HALVING_TOLERANCE * scale {
            let t = params.t_max * k as f64 / steps as f64;
            return Err(Error::Accuracy(format!(
                "halving dt={} changes moments at t={t} by {:e} relative; use a smaller dt",
                params.dt,
                diff / scale
            )));
        }
    }

    let h = params.t_max / steps as f64;
    let times = (0..=steps).map(|k| k as f64 * h).collect();
    let moments = coarse
        .into_iter()
        .map(|y| GaussianMoments::new(y.normal, y.anomalous, params.stat))
        .collect();
    Ok(Trajectory { times, moments })
}

/// Moments at time `t` from the explicit solution of the Langevin
/// equations, with the bath-noise integrals done by adaptive Simpson
/// quadrature.
///
/// For the `(a_h, b_v)` pair, with `C = cosh Δ`, `S = sinh Δ` and `c` the
/// commutator term,
///
/// ```text
/// n(t) = e^{−2λt}[n0 C² + (n0+c) S²]          (Δ = Δ(t,0))
///      + ∫₀ᵗ 2λ e^{−2λ(t−t′)} [n0 C² + (n0+c) S²] dt′   (Δ = Δ(t,t′))
/// A(t) = e^{−2λt}(2n0+c) C S + ∫₀ᵗ 2λ e^{−2λ(t−t′)} (2n0+c) C S dt′
/// ```
///
/// and the `(a_v, b_h)` pair carries `−A`.
pub fn quadrature_moments(params: &LossyParams, t: f64) -> Result<GaussianMoments> {
    params.validate()?;
    if !(t >= 0.0 && t <= params.t_max * (1.0 + 1e-12)) {
        return Err(Error::domain(format!(
            "t must lie in [0, t_max={}], got {t}",
            params.t_max
        )));
    }
    let n0 = params.n0;
    let c = params.stat.commutator();
    let loss = params.loss_rate;

    let occupation = |delta: f64| {
        let (ch, sh) = (delta.cosh(), delta.sinh());
        n0 * ch * ch + (n0 + c) * sh * sh
    };
    let pairing = |delta: f64| {
        let (ch, sh) = (delta.cosh(), delta.sinh());
        (2.0 * n0 + c) * ch * sh
    };

    let delta0 = delta_kernel(params, t, 0.0)?;
    let damping = (-2.0 * loss * t).exp();
    let mut n = damping * occupation(delta0);
    let mut a = damping * pairing(delta0);

    if loss > 0.0 && t > 0.0 {
        let kernel = |tp: f64| {
            let delta = delta_kernel(params, t, tp).unwrap_or(0.0);
            (2.0 * loss * (-2.0 * loss * (t - tp)).exp(), delta)
        };
        n += adaptive_simpson(
            |tp| {
                let (w, d) = kernel(tp);
                w * occupation(d)
            },
            0.0,
            t,
            QUADRATURE_TOLERANCE,
        )?;
        a += adaptive_simpson(
            |tp| {
                let (w, d) = kernel(tp);
                w * pairing(d)
            },
            0.0,
            t,
            QUADRATURE_TOLERANCE,
        )?;
    }

    let normal = Matrix4::from_diagonal(Complex::new(n, 0.0));
    let anomalous = pump_coupling::<f64>().scale(a);
    Ok(GaussianMoments::new(normal, anomalous, params.stat))
}
