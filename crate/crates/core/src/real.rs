//! Scalar abstraction so the moment machinery can run in plain `f64` or in
//! double-double precision.
//!
//! Extended precision matters for strongly pumped lossless states: the
//! stored moments satisfy `n(n+1) = |A|²` only to about `eps·n²`, and
//! quantities such as `⟨Ĵ²⟩` are exactly that cancellation.

use std::fmt::Debug;

use num_traits::Float;

/// Double-double scalar (about 106 bits of mantissa).
pub type Extended = twofloat::TwoFloat;

pub trait Real: Float + Debug + Send + Sync + 'static {
    fn real(x: f64) -> Self;
    fn value(self) -> f64;

    /// Division by an `f64`. `TwoFloat / TwoFloat` drops the low word of the
    /// quotient, so extended code divides only by exact `f64` values.
    fn div_f64(self, d: f64) -> Self;

    fn frac_1_sqrt_2() -> Self;
}

impl Real for f64 {
    #[inline]
    fn real(x: f64) -> Self {
        x
    }

    #[inline]
    fn value(self) -> f64 {
        self
    }

    #[inline]
    fn div_f64(self, d: f64) -> Self {
        self / d
    }

    fn frac_1_sqrt_2() -> Self {
        std::f64::consts::FRAC_1_SQRT_2
    }
}

impl Real for Extended {
    #[inline]
    fn real(x: f64) -> Self {
        Extended::from(x)
    }

    #[inline]
    fn value(self) -> f64 {
        f64::from(self)
    }

    #[inline]
    fn div_f64(self, d: f64) -> Self {
        self / d
    }

    fn frac_1_sqrt_2() -> Self {
        twofloat::consts::FRAC_1_SQRT_2
    }
}

/// `(cosh x, sinh x)` from their Taylor series.
///
/// All terms are positive for `x ≥ 0`, so the sums carry full working
/// precision and `cosh² − sinh² = 1` holds to the same precision. The
/// library routines of `twofloat` do not guarantee that.
pub fn cosh_sinh<R: Real>(x: R) -> (R, R) {
    if x < R::zero() {
        let (c, s) = cosh_sinh(-x);
        return (c, -s);
    }
    if x.value() > 30.0 {
        // series would need too many terms; identity is lost at this scale anyway
        let e = x.exp();
        let ei = (-x).exp();
        let half = R::real(0.5);
        return ((e + ei) * half, (e - ei) * half);
    }
    let x2 = x * x;
    let mut cosh = R::one();
    let mut sinh = x;
    let mut term_c = R::one();
    let mut term_s = x;
    let mut k = 1.0;
    loop {
        term_c = (term_c * x2).div_f64((2.0 * k - 1.0) * (2.0 * k));
        term_s = (term_s * x2).div_f64((2.0 * k) * (2.0 * k + 1.0));
        cosh = cosh + term_c;
        sinh = sinh + term_s;
        // below any working precision; `Float::epsilon` of TwoFloat is the f64 one
        if term_c.value() <= cosh.value() * 1e-34 && term_s.value() <= sinh.value() * 1e-34 {
            break;
        }
        k += 1.0;
        if k > 400.0 {
            break;
        }
    }
    (cosh, sinh)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_matches_std_in_f64() {
        for &x in &[0.0, 1e-3, 0.3, 1.0, 2.5, 5.0, 12.0] {
            let (c, s) = cosh_sinh(x);
            assert!((c - x.cosh()).abs() <= 4.0 * f64::EPSILON * c);
            assert!((s - x.sinh()).abs() <= 4.0 * f64::EPSILON * c);
        }
        let (c, s) = cosh_sinh(-0.7);
        assert_eq!(c, cosh_sinh(0.7).0);
        assert_eq!(s, -cosh_sinh(0.7).1);
    }

    #[test]
    fn extended_identity_holds() {
        for &x in &[0.5, 1.0, 3.0, 5.0, 10.0] {
            let (c, s) = cosh_sinh(Extended::real(x));
            let defect = (c * c - s * s - Extended::from(1.0)).value();
            assert!(
                defect.abs() < 1e-30 * (c * c).value(),
                "x={x} defect={defect:e}"
            );
        }
        let h = Extended::frac_1_sqrt_2();
        assert!((h * h - Extended::from(0.5)).value().abs() < 1e-31);
    }
}
