//! Lower real branch of the Lambert W function.

use crate::error::{domain, Result};
use crate::Real;

/// Residual target for `w e^w = x`, relative to `|x|`.
fn residual_tol<T: Real>() -> T {
    T::lit(1e-14).max(T::epsilon() * T::lit(16.0))
}

/// The branch `W₋₁(x)` on `[-1/e, 0)`, i.e. the solution `w ≤ -1` of
/// `w e^w = x`.
///
/// Halley iteration from a branch-point series (near `-1/e`) or the
/// asymptotic logarithmic seed (near `0`), with a bisection fallback.
pub fn lambert_w_m1<T: Real>(x: T) -> Result<T> {
    let branch = -(-T::one()).exp();
    if !(x >= branch && x < T::zero()) {
        return Err(domain("lambert_w_m1 argument", x, "[-1/e, 0)"));
    }
    if x == branch {
        return Ok(-T::one());
    }
    let tol = residual_tol::<T>() * x.abs();
    let residual = |w: T| w * w.exp() - x;

    let mut w = if x < T::lit(-0.25) {
        let p = -(T::lit(2.0) * (T::E() * x + T::one())).max(T::zero()).sqrt();
        -T::one() + p - p * p / T::lit(3.0) + T::lit(11.0 / 72.0) * p * p * p
    } else {
        let l1 = (-x).ln();
        let l2 = (-l1).ln();
        l1 - l2 + l2 / l1
    };
    w = w.min(-T::one());

    let mut best = (w, residual(w).abs());
    for _ in 0..50 {
        let ew = w.exp();
        let f = w * ew - x;
        if f.abs() < best.1 {
            best = (w, f.abs());
        }
        if f.abs() <= tol {
            return Ok(w);
        }
        let wp1 = w + T::one();
        if wp1 == T::zero() {
            break;
        }
        let denom = ew * wp1 - (w + T::lit(2.0)) * f / (T::lit(2.0) * wp1);
        let next = w - f / denom;
        w = if next.is_finite() && next <= -T::one() { next } else { (w - T::one()) / T::lit(2.0) };
    }
    if best.1 <= tol {
        return Ok(best.0);
    }

    // w e^w is decreasing on (-inf, -1]: hi side has residual < 0
    let mut lo = -T::one();
    let mut hi = best.0.min(-T::one()) * T::lit(2.0) - T::one();
    while residual(hi) <= T::zero() {
        hi = hi * T::lit(2.0);
    }
    for _ in 0..200 {
        let mid = (lo + hi) / T::lit(2.0);
        if mid == lo || mid == hi {
            break;
        }
        let r = residual(mid);
        if r.abs() < best.1 {
            best = (mid, r.abs());
        }
        if r > T::zero() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(best.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Plain bisection on `w e^w = x` over `[-800, -1]`.
    fn bisect_oracle(x: f64) -> f64 {
        let (mut lo, mut hi) = (-1.0f64, -800.0f64);
        for _ in 0..300 {
            let mid = 0.5 * (lo + hi);
            if mid * mid.exp() > x {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn branch_point_is_minus_one() {
        let x = -(-1.0f64).exp();
        assert_eq!(lambert_w_m1(x).unwrap(), -1.0);
    }

    #[test]
    fn exact_value_at_minus_two() {
        let x = -2.0 * (-2.0f64).exp();
        assert!((lambert_w_m1(x).unwrap() + 2.0).abs() < 1e-13);
    }

    #[test]
    fn rejects_outside_domain() {
        assert!(lambert_w_m1(0.0f64).is_err());
        assert!(lambert_w_m1(0.1f64).is_err());
        assert!(lambert_w_m1(-0.5f64).is_err());
        assert!(lambert_w_m1(f64::NAN).is_err());
    }

    #[test]
    fn value_used_for_the_buser_constant() {
        let x = -1.0 / (2.0 * 0.5f64.exp());
        let w = lambert_w_m1(x).unwrap();
        assert!((w - bisect_oracle(x)).abs() < 1e-12);
        assert!((w - (-1.756_431_208_626_170_4)).abs() < 1e-12, "{w}");
    }

    #[test]
    fn matches_bisection_near_endpoints() {
        let branch = -(-1.0f64).exp();
        for x in [branch + 1e-10, branch + 1e-4, -0.2, -1e-3, -1e-30, -1e-300] {
            let w = lambert_w_m1(x).unwrap();
            let o = bisect_oracle(x);
            assert!((w - o).abs() <= 1e-9 * o.abs().max(1.0), "x={x}: {w} vs {o}");
        }
    }

    #[test]
    fn single_precision() {
        let x = -0.1f32;
        let w = lambert_w_m1(x).unwrap();
        assert!((w * w.exp() - x).abs() <= 1e-6 * x.abs());
    }

    proptest! {
        #[test]
        fn residual_is_tiny(u in 1e-9f64..1.0) {
            let branch = -(-1.0f64).exp();
            let x = branch * u;
            let w = lambert_w_m1(x).unwrap();
            prop_assert!(w <= -1.0);
            prop_assert!((w * w.exp() - x).abs() <= 1e-14 * x.abs(), "x={} w={}", x, w);
        }
    }
}
