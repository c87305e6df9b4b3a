//! Adaptive Simpson quadrature with an absolute error target.

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 48;
const MAX_EVALUATIONS: usize = 20_000_000;
const INITIAL_PANELS: usize = 16;

struct Simpson<F> {
    f: F,
    evaluations: usize,
}

impl<F: Fn(f64) -> f64> Simpson<F> {
    fn eval(&mut self, x: f64) -> f64 {
        self.evaluations += 1;
        (self.f)(x)
    }

    #[allow(clippy::too_many_arguments)]
    fn refine(
        &mut self,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64> {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (self.eval(lm), self.eval(rm));
        let h = b - a;
        let left = h / 12.0 * (fa + 4.0 * flm + fm);
        let right = h / 12.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol {
            return Ok(left + right + delta / 15.0);
        }
        if depth >= MAX_DEPTH || self.evaluations > MAX_EVALUATIONS {
            return Err(Error::Accuracy(format!(
                "adaptive Simpson did not reach tolerance on [{a}, {b}] (estimate {:e}, target {:e})",
                delta.abs() / 15.0,
                tol
            )));
        }
        Ok(self.refine(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)?
            + self.refine(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)?)
    }
}

/// `∫_a^b f(x) dx` to absolute tolerance `tol`.
///
/// The interval is first cut into a few equal panels so that integrands with
/// structure narrower than the whole interval are not mistaken for smooth.
pub fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a.is_nan() || b.is_nan() || b < a {
        return Err(Error::domain(format!(
            "quadrature interval [{a}, {b}] is reversed"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    let mut s = Simpson { f, evaluations: 0 };
    let width = (b - a) / INITIAL_PANELS as f64;
    let panel_tol = tol / INITIAL_PANELS as f64;
    let mut total = 0.0;
    let mut fa = s.eval(a);
    for k in 0..INITIAL_PANELS {
        let lo = a + k as f64 * width;
        let hi = if k + 1 == INITIAL_PANELS {
            b
        } else {
            lo + width
        };
        let fm = s.eval(0.5 * (lo + hi));
        let fb = s.eval(hi);
        let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
        total += s.refine(lo, hi, fa, fm, fb, whole, panel_tol, 0)?;
        fa = fb;
    }
    Ok(total)
}
