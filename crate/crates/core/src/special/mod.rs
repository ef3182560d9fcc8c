//! Closed-form scalar functions shared by the bounds and the semigroup checks.

mod lambert;
pub mod quadrature;

pub use lambert::lambert_w_m1;

use crate::error::{domain, Result};
use crate::scalar::{normal_cdf, normal_pdf};
use crate::Real;

/// Below this `|2Kt|` the kernel switches to its Taylor expansion.
const SERIES_CUTOFF: f64 = 1e-6;

fn check_time<T: Real>(t: T) -> Result<()> {
    if t > T::zero() && t.is_finite() {
        Ok(())
    } else {
        Err(domain("t", t, "(0, inf)"))
    }
}

fn check_curvature<T: Real>(k: T) -> Result<()> {
    if k.is_finite() {
        Ok(())
    } else {
        Err(domain("K", k, "finite reals"))
    }
}

/// The curvature kernel `j_K(t) = K / (e^{2Kt} - 1)`, continued by `1/(2t)` at `K = 0`.
///
/// Near `2Kt = 0` the expansion `(1/(2t))(1 - x/2 + x²/12)` with `x = 2Kt` is used.
pub fn j_k<T: Real>(k: T, t: T) -> Result<T> {
    check_curvature(k)?;
    check_time(t)?;
    let x = T::lit(2.0) * k * t;
    if x.abs() < T::lit(SERIES_CUTOFF) {
        let series = T::one() - x / T::lit(2.0) + x * x / T::lit(12.0);
        return Ok(series / (T::lit(2.0) * t));
    }
    Ok(k / x.exp_m1())
}

/// `acosh(e^a)` for `a ≥ 0`, written so that it neither overflows for large `a`
/// nor cancels for small `a`.
pub(crate) fn acosh_exp<T: Real>(a: T) -> T {
    a + (-(-T::lit(2.0) * a).exp_m1()).sqrt().ln_1p()
}

/// `J_K(t) = ∫₀ᵗ √(2/π) √(j_K(s)) ds` in closed form.
pub fn j_k_integral<T: Real>(k: T, t: T) -> Result<T> {
    check_curvature(k)?;
    check_time(t)?;
    let two = T::lit(2.0);
    let pi = T::PI();
    if k > T::zero() {
        Ok((two / (pi * k)).sqrt() * (two * k * t).exp_m1().sqrt().atan())
    } else if k < T::zero() {
        Ok((-two / (pi * k)).sqrt() * acosh_exp(-k * t))
    } else {
        Ok(two * (t / pi).sqrt())
    }
}

/// `J_K(t)` by adaptive quadrature of its defining integral.
///
/// Substituting `s = u²` removes the `s^{-1/2}` endpoint singularity, so the
/// integrand `2u √(j_K(u²))` is smooth on `[0, √t]`. Serves as an independent
/// check on [`j_k_integral`].
pub fn j_k_integral_quadrature<T: Real>(k: T, t: T, tol: T) -> Result<T> {
    check_curvature(k)?;
    check_time(t)?;
    let scale = (T::lit(2.0) / T::PI()).sqrt();
    let integrand = |u: T| {
        let s = u * u;
        if s == T::zero() {
            return T::lit(2.0).sqrt();
        }
        T::lit(2.0) * u * j_k(k, s).map(|j| j.sqrt()).unwrap_or_else(|_| T::nan())
    };
    let q = quadrature::integrate(integrand, T::zero(), t.sqrt(), tol / scale, 4000)?;
    Ok(scale * q.value)
}

/// Inverse of the standard normal distribution function.
///
/// Rational approximation (Acklam) refined by one Newton step on `Φ(x) - p`.
#[allow(clippy::excessive_precision)]
pub fn inverse_normal_cdf<T: Real>(p: T) -> Result<T> {
    if !(p > T::zero() && p < T::one()) {
        return Err(domain("probability", p, "(0, 1)"));
    }
    if p > T::lit(0.5) {
        return inverse_normal_cdf(T::one() - p).map(|x| -x);
    }
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    let poly = |coef: &[f64], x: T| coef.iter().fold(T::zero(), |acc, &c| acc * x + T::lit(c));
    let pf = p.as_f64();
    let x = if pf < 0.02425 {
        let q = (-T::lit(2.0) * p.ln()).sqrt();
        poly(&C, q) / (poly(&D, q) * q + T::one())
    } else {
        let q = p - T::lit(0.5);
        let r = q * q;
        poly(&A, r) * q / (poly(&B, r) * r + T::one())
    };
    let density = normal_pdf(x);
    if density > T::zero() {
        Ok(x - (normal_cdf(x) - p) / density)
    } else {
        Ok(x)
    }
}

/// The Gaussian isoperimetric profile `I(x) = φ(Φ⁻¹(x))` on `[0, 1]`.
///
/// Evaluated through the lower tail `min(x, 1 - x)`, which keeps relative
/// accuracy near both endpoints.
pub fn gaussian_isoperimetric<T: Real>(x: T) -> Result<T> {
    if !(x >= T::zero() && x <= T::one()) {
        return Err(domain("gaussian_isoperimetric argument", x, "[0, 1]"));
    }
    let q = x.min(T::one() - x);
    if q == T::zero() {
        return Ok(T::zero());
    }
    Ok(normal_pdf(inverse_normal_cdf(q)?))
}

fn check_positive<T: Real>(what: &'static str, v: T) -> Result<()> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(domain(what, v, "(0, inf)"))
    }
}

/// `f₁(x) = √x / atan(√(e^{Tx} - 1))`, nondecreasing in `x > 0` with infimum `1/√T` at `0⁺`.
pub fn f1<T: Real>(x: T, t: T) -> Result<T> {
    check_positive("x", x)?;
    check_positive("T", t)?;
    Ok(x.sqrt() / (t * x).exp_m1().sqrt().atan())
}

/// `f₂(x) = √x / acosh(e^{Tx})`, nonincreasing in `x > 0` with supremum `1/√(2T)` at `0⁺`.
pub fn f2<T: Real>(x: T, t: T) -> Result<T> {
    check_positive("x", x)?;
    check_positive("T", t)?;
    Ok(x.sqrt() / acosh_exp(t * x))
}

/// `g₁(y) = y atan(y) - ln(1 + y²)`, positive for `y > 0`.
pub fn g1<T: Real>(y: T) -> Result<T> {
    check_positive("y", y)?;
    Ok(y * y.atan() - (y * y).ln_1p())
}

/// `g₂(y) = (1 + y/2) ln(1 + y) + (1 - y/2) ln(1 - y)`, concave and nonpositive on `(0, 1)`.
pub fn g2<T: Real>(y: T) -> Result<T> {
    if !(y > T::zero() && y < T::one()) {
        return Err(domain("y", y, "(0, 1)"));
    }
    let half = y / T::lit(2.0);
    Ok((T::one() + half) * y.ln_1p() + (T::one() - half) * (-y).ln_1p())
}
