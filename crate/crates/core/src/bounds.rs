//! The bound calculus linking the Cheeger constant `h` and the spectral gap.
//!
//! Upper bounds on the gap in terms of `h` come from the heat-semigroup
//! functional `sup_t (1 - e^{-λt}) / J_K(t)` and its closed-form corollaries;
//! the lower bound is Cheeger's `λ ≥ h²/4`. On infinite-measure spaces the
//! bottom of the spectrum `λ₀` replaces `λ₁` and every implicit bound on `h`
//! picks up a factor 2.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::special::{acosh_exp, j_k_integral, lambert_w_m1};
use crate::Real;

/// Search window for the dimensionless time `T = λt`.
const T_MIN: f64 = 1e-8;
const T_MAX: f64 = 1e3;
const COARSE_POINTS: usize = 241;
/// Golden-section stopping width in `ln T`, i.e. relative width in `T`.
const GOLDEN_TOL: f64 = 1e-10;
const INVERSION_RTOL: f64 = 1e-8;

/// Whether the reference measure is a probability measure or has infinite mass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureRegime {
    FiniteNormalized,
    Infinite,
}

impl MeasureRegime {
    /// Multiplier on implicit lower bounds for `h`.
    pub fn factor<T: Real>(self) -> T {
        match self {
            MeasureRegime::FiniteNormalized => T::one(),
            MeasureRegime::Infinite => T::lit(2.0),
        }
    }

    /// The Cheeger constant as it enters the explicit bounds: `h` or `h/2`.
    pub fn effective_h<T: Real>(self, h: T) -> T {
        h / self.factor::<T>()
    }
}

impl fmt::Display for MeasureRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MeasureRegime::FiniteNormalized => "finite_normalized",
            MeasureRegime::Infinite => "infinite",
        })
    }
}

/// A time in `(0, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimePoint<T> {
    Finite(T),
    Infinity,
}

impl<T: Real> TimePoint<T> {
    pub fn as_f64(self) -> f64 {
        match self {
            TimePoint::Finite(t) => t.as_f64(),
            TimePoint::Infinity => f64::INFINITY,
        }
    }
}

impl<T: Real> fmt::Display for TimePoint<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimePoint::Finite(t) => write!(f, "{t}"),
            TimePoint::Infinity => f.write_str("inf"),
        }
    }
}

/// Value and location of a supremum over `t > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Supremum<T> {
    pub value: T,
    pub argmax: TimePoint<T>,
}

/// Maximizes `f` over `x ∈ [lo, hi]`: coarse scan, then golden section
/// around the best grid point. Returns `(value, argmax)`.
fn maximize<T: Real, F: Fn(T) -> T>(f: F, lo: T, hi: T) -> (T, T) {
    let n = COARSE_POINTS;
    let step = (hi - lo) / T::lit((n - 1) as f64);
    let at = |i: usize| lo + step * T::lit(i as f64);
    let mut best = 0;
    let mut best_val = f(lo);
    for i in 1..n {
        let v = f(at(i));
        if v > best_val {
            best = i;
            best_val = v;
        }
    }
    let mut a = at(best.saturating_sub(1));
    let mut b = at((best + 1).min(n - 1));
    let ratio = T::lit(0.618_033_988_749_894_9);
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let tol = T::lit(GOLDEN_TOL);
    for _ in 0..200 {
        if b - a <= tol * T::one().max(a.abs().max(b.abs())) {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = f(x1);
        }
    }
    let (x, v) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    if v >= best_val {
        (v, x)
    } else {
        (best_val, at(best))
    }
}

fn check_lambda<T: Real>(lambda: T) -> Result<()> {
    if lambda > T::zero() && lambda.is_finite() {
        Ok(())
    } else {
        Err(domain("lambda", lambda, "(0, inf)"))
    }
}

fn check_h<T: Real>(h: T) -> Result<()> {
    if h > T::zero() && h.is_finite() {
        Ok(())
    } else {
        Err(domain("h", h, "(0, inf)"))
    }
}

fn check_k<T: Real>(k: T) -> Result<()> {
    if k.is_finite() {
        Ok(())
    } else {
        Err(domain("K", k, "finite reals"))
    }
}

/// `√(2K/π)`: the `t → ∞` limit of `1/J_K(t)` for `K > 0`.
fn positive_curvature_limit<T: Real>(k: T) -> T {
    (T::lit(2.0) * k / T::PI()).sqrt()
}

/// `sup_{t>0} (1 - e^{-λt}) / J_K(t)`.
///
/// Searched in `ln(λt)` over `λt ∈ [1e-8, 1e3]`. For `K > 0` the ratio tends
/// to `√(2K/π)` as `t → ∞`; when that limit is not beaten by the interior
/// maximum the supremum is reported at infinity.
pub fn buser_functional<T: Real>(lambda: T, k: T) -> Result<Supremum<T>> {
    check_lambda(lambda)?;
    check_k(k)?;
    let ratio = |log_big_t: T| {
        let big_t = log_big_t.exp();
        let t = big_t / lambda;
        match j_k_integral(k, t) {
            Ok(j) => -(-big_t).exp_m1() / j,
            Err(_) => T::neg_infinity(),
        }
    };
    let (value, log_arg) = maximize(ratio, T::lit(T_MIN).ln(), T::lit(T_MAX).ln());
    if k > T::zero() {
        let limit = positive_curvature_limit(k);
        if value <= limit * (T::one() + T::epsilon() * T::lit(4.0)) {
            return Ok(Supremum {
                value: limit,
                argmax: TimePoint::Infinity,
            });
        }
    }
    Ok(Supremum {
        value,
        argmax: TimePoint::Finite(log_arg.exp() / lambda),
    })
}

/// Lower bound on `h` implied by a spectral value `λ` (λ₁, or λ₀ for infinite measure).
pub fn implicit_h_lower_bound<T: Real>(lambda: T, k: T, regime: MeasureRegime) -> Result<T> {
    Ok(regime.factor::<T>() * buser_functional(lambda, k)?.value)
}

/// The largest `λ` with `implicit_h_lower_bound(λ, K, regime) ≤ h`.
///
/// Bisection on the monotone functional, relative tolerance `1e-8`; the
/// returned value is always on the admissible side. For `K > 0` the
/// functional is constant (`√(2K/π)`, times the regime factor) on `(0, K]`,
/// so smaller `h` admit no `λ` at all and that floor value maps to `K`.
pub fn lambda_upper_from_h<T: Real>(h: T, k: T, regime: MeasureRegime) -> Result<T> {
    check_h(h)?;
    check_k(k)?;
    let f = |lambda: T| implicit_h_lower_bound(lambda, k, regime);
    let mut lo = T::lit(1e-8);
    if k > T::zero() {
        let floor = regime.factor::<T>() * positive_curvature_limit(k);
        let slack = T::lit(1e-12);
        if h < floor * (T::one() - slack) {
            return Err(Error::Infeasible(format!(
                "h = {h} is below the K = {k} floor {floor}; no spectral value is consistent with it"
            )));
        }
        if h <= floor * (T::one() + slack) {
            return Ok(k);
        }
        lo = k;
    } else {
        while f(lo)? > h {
            lo = lo / T::lit(16.0);
            if lo < T::min_positive_value().sqrt() {
                return Ok(T::zero());
            }
        }
    }
    let mut hi = T::one().max(lo * T::lit(2.0));
    while f(hi)? <= h {
        hi = hi * T::lit(2.0);
        if !hi.is_finite() || hi > T::max_value().sqrt() {
            return Err(Error::NoConvergence {
                what: "bracketing the spectral upper bound",
                achieved: hi.as_f64(),
                requested: h.as_f64(),
            });
        }
    }
    let rtol = T::lit(INVERSION_RTOL);
    while hi - lo > rtol * hi {
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid)? <= h {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Which closed form produced an explicit bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExplicitRegime {
    #[serde(rename = "Kpos_with_c")]
    KposWithC,
    #[serde(rename = "Kzero")]
    Kzero,
    #[serde(rename = "Kneg_max_form")]
    KnegMaxForm,
    #[serde(rename = "Kneg_with_c")]
    KnegWithC,
}

impl fmt::Display for ExplicitRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExplicitRegime::KposWithC => "Kpos_with_c",
            ExplicitRegime::Kzero => "Kzero",
            ExplicitRegime::KnegMaxForm => "Kneg_max_form",
            ExplicitRegime::KnegWithC => "Kneg_with_c",
        })
    }
}

/// An explicit closed-form bound.
///
/// `alternative` is a second, weaker bound valid in the same situation:
/// the curvature-free bound for `K > 0`, `π h_eff²` for `K = 0`, and the
/// decimal-majorant max form for `K < 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExplicitBound<T> {
    pub value: T,
    pub regime: ExplicitRegime,
    pub c_used: Option<T>,
    pub alternative: T,
}

/// `M = sup_{T>0} (1 - e^{-T}) / √T` and its maximizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantM<T> {
    pub m: T,
    pub t_star: T,
}

/// Closed form of [`ConstantM`] through the lower Lambert branch.
///
/// With `W = W₋₁(-1/(2√e))` the maximizer is `T* = -W - 1/2` and
/// `M = √(-4W - 2) / (2|W|)`.
pub fn constant_m<T: Real>() -> ConstantM<T> {
    let x = -T::one() / (T::lit(2.0) * T::lit(0.5).exp());
    let w = lambert_w_m1(x).expect("-1/(2√e) lies on the lower branch");
    ConstantM {
        m: (-T::lit(4.0) * w - T::lit(2.0)).sqrt() / (-T::lit(2.0) * w),
        t_star: -w - T::lit(0.5),
    }
}

/// Constants of the `K < 0` max-form bound, `(linear, quadratic)`:
/// `λ ≤ max{linear·√(-K)·h_eff, quadratic·h_eff²}`.
pub fn negative_curvature_constants<T: Real>() -> (T, T) {
    let ell = acosh_exp(T::one());
    let gap = T::one() - (-T::one()).exp();
    let linear = T::SQRT_2() * ell / (T::PI().sqrt() * gap);
    let quadratic = T::lit(2.0) * ell * ell / (T::PI() * gap * gap);
    (linear, quadratic)
}

/// Decimal majorants `(21/10, 22/5)` of [`negative_curvature_constants`].
pub fn negative_curvature_majorants<T: Real>() -> (T, T) {
    (T::lit(2.1), T::lit(4.4))
}

/// `K = 0` explicit constant `4/(πM²)`.
pub fn flat_constant<T: Real>() -> T {
    let m = constant_m::<T>().m;
    T::lit(4.0) / (T::PI() * m * m)
}

/// Explicit upper bound on the spectral value in terms of `h`.
///
/// `c` is the caller's certified lower bound for `K/λ`; it is required for
/// `K > 0` and ignored otherwise.
pub fn explicit_upper<T: Real>(h: T, k: T, regime: MeasureRegime, c: Option<T>) -> Result<ExplicitBound<T>> {
    check_h(h)?;
    check_k(k)?;
    let h_eff = regime.effective_h(h);
    let flat = flat_constant::<T>() * h_eff * h_eff;
    if k > T::zero() {
        if regime == MeasureRegime::Infinite {
            return Err(Error::Regime(
                "positive curvature forces finite total measure; use the finite_normalized regime".into(),
            ));
        }
        let c = match c {
            Some(c) if c > T::zero() && c.is_finite() => c,
            Some(c) => return Err(Error::Argument(format!("c must be positive, got {c}"))),
            None => return Err(Error::Argument("K > 0 needs a lower bound c for K/lambda (--c)".into())),
        };
        return Ok(ExplicitBound {
            value: T::PI() / (T::lit(2.0) * c) * h * h,
            regime: ExplicitRegime::KposWithC,
            c_used: Some(c),
            alternative: flat,
        });
    }
    if k == T::zero() {
        return Ok(ExplicitBound {
            value: flat,
            regime: ExplicitRegime::Kzero,
            c_used: None,
            alternative: T::PI() * h_eff * h_eff,
        });
    }
    let root = (-k).sqrt();
    let (lin, quad) = negative_curvature_constants::<T>();
    let (lin_dec, quad_dec) = negative_curvature_majorants::<T>();
    Ok(ExplicitBound {
        value: (lin * root * h_eff).max(quad * h_eff * h_eff),
        regime: ExplicitRegime::KnegMaxForm,
        c_used: None,
        alternative: (lin_dec * root * h_eff).max(quad_dec * h_eff * h_eff),
    })
}

/// `S(c) = sup_{T>0} (1 - e^{-T}) / acosh(e^{cT})`.
pub fn negative_c_supremum<T: Real>(c: T) -> Result<T> {
    if !(c > T::zero() && c.is_finite()) {
        return Err(domain("c", c, "(0, inf)"));
    }
    let ratio = |log_big_t: T| {
        let big_t = log_big_t.exp();
        -(-big_t).exp_m1() / acosh_exp(c * big_t)
    };
    Ok(maximize(ratio, T::lit(T_MIN).ln(), T::lit(T_MAX).ln()).0)
}

/// Variant of the `K < 0` bound given `K/λ ≥ -c`:
/// `λ ≤ 2 h_eff² / (π c S(c)²)`.
pub fn explicit_upper_neg_c<T: Real>(h: T, k: T, regime: MeasureRegime, c: T) -> Result<ExplicitBound<T>> {
    check_h(h)?;
    check_k(k)?;
    if k >= T::zero() {
        return Err(Error::Argument(format!("the -c variant needs K < 0, got K = {k}")));
    }
    let s = negative_c_supremum(c)?;
    let h_eff = regime.effective_h(h);
    let base = explicit_upper(h, k, regime, None)?;
    Ok(ExplicitBound {
        value: T::lit(2.0) * h_eff * h_eff / (T::PI() * c * s * s),
        regime: ExplicitRegime::KnegWithC,
        c_used: Some(c),
        alternative: base.value,
    })
}

/// Lower bound on `h` implied by `λ` through the explicit corollaries.
///
/// For `K > 0` the ratio `c` defaults to `K/λ`.
pub fn explicit_h_lower<T: Real>(lambda: T, k: T, regime: MeasureRegime, c: Option<T>) -> Result<ExplicitBound<T>> {
    check_lambda(lambda)?;
    check_k(k)?;
    let factor = regime.factor::<T>();
    let m = constant_m::<T>().m;
    let flat = factor * (T::PI() * lambda / T::lit(4.0)).sqrt() * m;
    if k > T::zero() {
        if regime == MeasureRegime::Infinite {
            return Err(Error::Regime(
                "positive curvature forces finite total measure; use the finite_normalized regime".into(),
            ));
        }
        let c = c.unwrap_or(k / lambda);
        if !(c > T::zero() && c.is_finite()) {
            return Err(Error::Argument(format!("c must be positive, got {c}")));
        }
        return Ok(ExplicitBound {
            value: (T::lit(2.0) * c * lambda / T::PI()).sqrt(),
            regime: ExplicitRegime::KposWithC,
            c_used: Some(c),
            alternative: flat,
        });
    }
    if k == T::zero() {
        return Ok(ExplicitBound {
            value: flat,
            regime: ExplicitRegime::Kzero,
            c_used: None,
            alternative: factor * (lambda / T::PI()).sqrt(),
        });
    }
    let root = (-k).sqrt();
    let invert = |lin: T, quad: T| factor * (lambda / (lin * root)).min((lambda / quad).sqrt());
    let (lin, quad) = negative_curvature_constants::<T>();
    let (lin_dec, quad_dec) = negative_curvature_majorants::<T>();
    Ok(ExplicitBound {
        value: invert(lin, quad),
        regime: ExplicitRegime::KnegMaxForm,
        c_used: None,
        alternative: invert(lin_dec, quad_dec),
    })
}

/// Cheeger's lower bound `λ ≥ h²/4`.
pub fn cheeger_lower<T: Real>(h: T) -> Result<T> {
    if h >= T::zero() && h.is_finite() {
        Ok(h * h / T::lit(4.0))
    } else {
        Err(domain("h", h, "[0, inf)"))
    }
}

/// Which quantity a [`BoundReport`] starts from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputKind {
    FromH,
    FromLambda,
}

impl fmt::Display for InputKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InputKind::FromH => "from_h",
            InputKind::FromLambda => "from_lambda",
        })
    }
}

/// Every bound derivable from a single `h` or `λ`.
///
/// From `h`: `cheeger_lower = h²/4`; `lambda_implicit` is the inversion of
/// the implicit functional, with `implicit_value`/`implicit_argmax_t` its
/// supremum data at that `λ`; `explicit_value` is the closed-form upper
/// bound on `λ`.
///
/// For `K > 0` without `c` the explicit bound falls back to the `K = 0` form,
/// which holds on the larger class.
///
/// From `λ`: `cheeger_lower` and `lambda_implicit` are absent;
/// `implicit_value` is the implied lower bound on `h` and `explicit_value`
/// the weaker closed-form lower bound on `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport<T> {
    pub regime: MeasureRegime,
    pub k: T,
    pub input_kind: InputKind,
    pub input_value: T,
    pub cheeger_lower: Option<T>,
    pub implicit_value: T,
    pub implicit_argmax_t: TimePoint<T>,
    pub lambda_implicit: Option<T>,
    pub explicit: ExplicitBound<T>,
}

/// Assembles a [`BoundReport`].
pub fn sandwich<T: Real>(
    input_kind: InputKind,
    input_value: T,
    k: T,
    regime: MeasureRegime,
    c: Option<T>,
) -> Result<BoundReport<T>> {
    match input_kind {
        InputKind::FromH => {
            let h = input_value;
            check_h(h)?;
            let cheeger = cheeger_lower(h)?;
            let lambda = lambda_upper_from_h(h, k, regime)?;
            let sup = if lambda > T::zero() {
                buser_functional(lambda, k)?
            } else {
                Supremum {
                    value: T::zero(),
                    argmax: TimePoint::Infinity,
                }
            };
            // without c a positive curvature bound is only used through K = 0
            let explicit = match c {
                None if k > T::zero() && regime == MeasureRegime::FiniteNormalized => {
                    explicit_upper(h, T::zero(), regime, None)?
                }
                _ => explicit_upper(h, k, regime, c)?,
            };
            if cheeger > explicit.value * (T::one() + T::epsilon() * T::lit(8.0)) + T::lit(1e-12) {
                return Err(Error::Infeasible(format!(
                    "Cheeger lower bound {cheeger} exceeds the explicit upper bound {}",
                    explicit.value
                )));
            }
            Ok(BoundReport {
                regime,
                k,
                input_kind,
                input_value: h,
                cheeger_lower: Some(cheeger),
                implicit_value: regime.factor::<T>() * sup.value,
                implicit_argmax_t: sup.argmax,
                lambda_implicit: Some(lambda),
                explicit,
            })
        }
        InputKind::FromLambda => {
            let lambda = input_value;
            let sup = buser_functional(lambda, k)?;
            Ok(BoundReport {
                regime,
                k,
                input_kind,
                input_value: lambda,
                cheeger_lower: None,
                implicit_value: regime.factor::<T>() * sup.value,
                implicit_argmax_t: sup.argmax,
                lambda_implicit: None,
                explicit: explicit_h_lower(lambda, k, regime, c)?,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    const FINITE: MeasureRegime = MeasureRegime::FiniteNormalized;
    const INFINITE: MeasureRegime = MeasureRegime::Infinite;

    /// Grid maximum of `(1 - e^{-T})/√T` over `n` points of `(0, 100]`.
    fn grid_m(n: usize) -> f64 {
        (1..=n)
            .map(|i| {
                let t = 100.0 * i as f64 / n as f64;
                -(-t).exp_m1() / t.sqrt()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn gaussian_equality_case() {
        let s = buser_functional(1.0f64, 1.0).unwrap();
        assert_relative_eq!(s.value, (2.0 / PI).sqrt(), max_relative = 1e-15);
        assert_eq!(s.argmax, TimePoint::Infinity);
        assert_relative_eq!(implicit_h_lower_bound(1.0, 1.0, INFINITE).unwrap(), 2.0 * (2.0 / PI).sqrt());
    }

    #[test]
    fn flat_functional_closed_form() {
        let m = grid_m(1_000_000);
        let v = buser_functional(1.0f64, 0.0).unwrap();
        assert!((v.value - PI.sqrt() / 2.0 * m).abs() < 1e-9, "{}", v.value);
        let v2 = implicit_h_lower_bound(2.0f64, 0.0, FINITE).unwrap();
        assert_relative_eq!(v2, 2f64.sqrt() * v.value, max_relative = 1e-12);
        assert!(buser_functional(1e-12f64, 0.0).unwrap().value < 1e-5);
        match v.argmax {
            TimePoint::Finite(t) => assert!((t - constant_m::<f64>().t_star).abs() < 1e-6),
            TimePoint::Infinity => panic!("flat maximizer is finite"),
        }
    }

    #[test]
    fn rejects_nonpositive_lambda() {
        assert!(buser_functional(0.0f64, 1.0).is_err());
        assert!(buser_functional(-1.0f64, 1.0).is_err());
        assert!(lambda_upper_from_h(0.0f64, 1.0, FINITE).is_err());
    }

    #[test]
    fn positive_curvature_plateau_below_k() {
        for lambda in [0.1, 0.5, 0.999, 1.0] {
            let s = buser_functional(lambda, 1.0f64).unwrap();
            assert_eq!(s.argmax, TimePoint::Infinity);
            assert_relative_eq!(s.value, (2.0 / PI).sqrt(), max_relative = 1e-15);
        }
        let above = buser_functional(2.0f64, 1.0).unwrap();
        assert!(above.value > (2.0 / PI).sqrt());
        assert!(matches!(above.argmax, TimePoint::Finite(_)));
    }

    #[test]
    fn inversion_examples() {
        let h = (2.0 / PI).sqrt();
        assert_eq!(lambda_upper_from_h(h, 1.0f64, FINITE).unwrap(), 1.0);
        assert!(matches!(lambda_upper_from_h(0.5f64, 1.0, FINITE), Err(Error::Infeasible(_))));
        assert!(lambda_upper_from_h(1e-9f64, 0.0, FINITE).unwrap() < 1e-15);
    }

    #[test]
    fn flat_inversion_matches_brute_force_scan() {
        // K = 0 functional is (√π/2)·M·√λ
        let m = grid_m(1_000_000);
        let scale = PI.sqrt() / 2.0 * m;
        let mut best = 0.0;
        let mut lambda = 3.0f64;
        while lambda < 3.3 {
            if scale * lambda.sqrt() <= 1.0 {
                best = lambda;
            }
            lambda += 1e-6;
        }
        let got = lambda_upper_from_h(1.0f64, 0.0, FINITE).unwrap();
        assert!((got - best).abs() < 2e-6, "{got} vs {best}");
    }

    #[test]
    fn explicit_examples() {
        let h = (2.0 / PI).sqrt();
        let b = explicit_upper(h, 1.0f64, FINITE, Some(1.0)).unwrap();
        assert_relative_eq!(b.value, 1.0, max_relative = 1e-15);
        assert_eq!(b.regime, ExplicitRegime::KposWithC);
        let half = explicit_upper(h, 1.0f64, FINITE, Some(0.5)).unwrap();
        assert_relative_eq!(half.value, 2.0 * b.value, max_relative = 1e-15);

        let flat = explicit_upper(1.0f64, 0.0, FINITE, None).unwrap();
        assert!(flat.value < PI);
        assert_relative_eq!(flat.alternative, PI);
        let m = constant_m::<f64>().m;
        assert!((flat.value - 4.0 / (PI * m * m)).abs() < 1e-10);

        let neg = explicit_upper(1.0f64, -1.0, FINITE, None).unwrap();
        assert_eq!(neg.regime, ExplicitRegime::KnegMaxForm);
        assert!(neg.value <= neg.alternative);
        assert!(neg.alternative <= 4.4 + 1e-15);

        assert!(explicit_upper(1.0f64, 1.0, FINITE, None).is_err());
        assert!(explicit_upper(1.0f64, 1.0, FINITE, Some(0.0)).is_err());
        assert!(matches!(explicit_upper(1.0f64, 1.0, INFINITE, Some(1.0)), Err(Error::Regime(_))));
    }

    #[test]
    fn infinite_regime_negative_curvature_constants() {
        // λ₀ ≤ max{ℓ/(√(2π)(1-1/e))·√(-K)·h, ℓ²/(2π(1-1/e)²)·h²}
        let ell = (std::f64::consts::E + (std::f64::consts::E.powi(2) - 1.0).sqrt()).ln();
        let gap = 1.0 - (-1.0f64).exp();
        for (h, k) in [(1.0f64, -1.0f64), (0.1, -4.0), (3.0, -0.5)] {
            let b = explicit_upper(h, k, INFINITE, None).unwrap();
            let expect = ((-k).sqrt() * ell / ((2.0 * PI).sqrt() * gap) * h)
                .max(ell * ell / (2.0 * PI * gap * gap) * h * h);
            assert_relative_eq!(b.value, expect, max_relative = 1e-14);
            let dec = (1.05 * (-k).sqrt() * h).max(1.1 * h * h);
            assert_relative_eq!(b.alternative, dec, max_relative = 1e-14);
        }
    }

    #[test]
    fn constant_m_properties() {
        let c = constant_m::<f64>();
        assert!(c.m > 2.0 / PI);
        let g = |t: f64| -(-t).exp_m1() / t.sqrt();
        assert!((g(c.t_star) - c.m).abs() < 1e-12);
        let d = 1e-5;
        assert!(((g(c.t_star + d) - g(c.t_star - d)) / (2.0 * d)).abs() < 1e-10);
        assert!(flat_constant::<f64>() < PI);
        let (lin, quad) = negative_curvature_constants::<f64>();
        assert!(lin < 2.1 && quad < 4.4);
    }

    #[test]
    fn cheeger_examples() {
        assert_eq!(cheeger_lower(0.0f64).unwrap(), 0.0);
        assert_eq!(cheeger_lower(2.0f64).unwrap(), 1.0);
        assert_relative_eq!(cheeger_lower((2.0 / PI).sqrt()).unwrap(), 1.0 / (2.0 * PI), max_relative = 1e-15);
        assert!(cheeger_lower(-1.0f64).is_err());
    }

    #[test]
    fn sandwich_examples() {
        let h = (2.0 / PI).sqrt();
        let r = sandwich(InputKind::FromH, h, 1.0f64, FINITE, Some(1.0)).unwrap();
        assert_relative_eq!(r.cheeger_lower.unwrap(), 1.0 / (2.0 * PI), max_relative = 1e-15);
        assert_relative_eq!(r.explicit.value, 1.0, max_relative = 1e-15);
        assert_eq!(r.lambda_implicit, Some(1.0));

        let r = sandwich(InputKind::FromLambda, 1.0f64, 1.0, FINITE, None).unwrap();
        assert_relative_eq!(r.implicit_value, h, max_relative = 1e-15);
        assert_relative_eq!(r.explicit.value, h, max_relative = 1e-15);

        let fallback = sandwich(InputKind::FromH, 1.0f64, 1.0, FINITE, None).unwrap();
        assert_eq!(fallback.explicit.regime, ExplicitRegime::Kzero);
        assert!(sandwich(InputKind::FromH, 1.0f64, 1.0, INFINITE, None).is_err());
        let r = sandwich(InputKind::FromH, 1.0f64, -1.0, INFINITE, None).unwrap();
        assert_eq!(r.explicit.regime, ExplicitRegime::KnegMaxForm);
        assert!(r.implicit_value <= 1.0);
    }

    #[test]
    fn negative_c_variant() {
        // with c = -K/λ the variant must still dominate the implicit inversion
        let (h, k) = (1.0f64, -1.0f64);
        let lambda = lambda_upper_from_h(h, k, FINITE).unwrap();
        let b = explicit_upper_neg_c(h, k, FINITE, -k / lambda).unwrap();
        assert!(b.value >= lambda * (1.0 - 1e-8), "{} < {lambda}", b.value);
        assert!(explicit_upper_neg_c(h, 0.0, FINITE, 1.0).is_err());
    }

    #[test]
    fn explicit_lower_bounds_on_h_are_weaker_than_implicit() {
        for (lambda, k) in [(1.0f64, 1.0f64), (0.3, 0.0), (2.0, -1.0), (0.01, -3.0), (5.0, 0.5)] {
            let imp = implicit_h_lower_bound(lambda, k, FINITE).unwrap();
            let exp = explicit_h_lower(lambda, k, FINITE, None).unwrap();
            assert!(exp.value <= imp * (1.0 + 1e-9), "λ={lambda} K={k}: {} > {imp}", exp.value);
            assert!(exp.alternative <= exp.value * (1.0 + 1e-12) || k > 0.0);
        }
    }

    #[test]
    fn single_precision_functional() {
        let s = buser_functional(1.0f32, 1.0f32).unwrap();
        assert!((s.value - (2.0f32 / std::f32::consts::PI).sqrt()).abs() < 1e-6);
    }

    fn regime_strategy() -> impl Strategy<Value = MeasureRegime> {
        prop_oneof![Just(FINITE), Just(INFINITE)]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn functional_monotone_in_lambda(l1 in 1e-3f64..20.0, dl in 0.0f64..20.0, k in -3.0f64..3.0) {
            let a = buser_functional(l1, k).unwrap().value;
            let b = buser_functional(l1 + dl, k).unwrap().value;
            prop_assert!(a <= b + 1e-12);
        }

        #[test]
        fn inversion_consistency(h in 0.05f64..5.0, k in -3.0f64..3.0, regime in regime_strategy()) {
            match lambda_upper_from_h(h, k, regime) {
                Ok(lambda) => {
                    if lambda > 0.0 {
                        prop_assert!(implicit_h_lower_bound(lambda, k, regime).unwrap() <= h * (1.0 + 1e-6));
                    }
                }
                Err(Error::Infeasible(_)) => {
                    prop_assert!(k > 0.0 && h < regime.factor::<f64>() * (2.0 * k / PI).sqrt());
                }
                Err(e) => prop_assert!(false, "{e}"),
            }
        }

        #[test]
        fn regime_factor_exact(lambda in 1e-3f64..10.0, k in -3.0f64..3.0) {
            let fin = implicit_h_lower_bound(lambda, k, FINITE).unwrap();
            let inf = implicit_h_lower_bound(lambda, k, INFINITE).unwrap();
            prop_assert_eq!(inf, 2.0 * fin);
        }

        #[test]
        fn exact_negative_constants_below_majorants(h in 1e-3f64..10.0, k in -10.0f64..-1e-6, regime in regime_strategy()) {
            let b = explicit_upper(h, k, regime, None).unwrap();
            prop_assert!(b.value < b.alternative);
        }

        #[test]
        fn positive_curvature_closed_form_weaker_than_inversion(k in 0.05f64..3.0, excess in 1e-3f64..3.0) {
            let h = (2.0 * k / PI).sqrt() * (1.0 + excess);
            let lambda = lambda_upper_from_h(h, k, FINITE).unwrap();
            let b = explicit_upper(h, k, FINITE, Some(k / lambda)).unwrap();
            prop_assert!(b.value >= lambda - 1e-8, "{} < {}", b.value, lambda);
        }

        #[test]
        fn flat_explicit_weaker_than_inversion(h in 1e-2f64..5.0, regime in regime_strategy()) {
            let lambda = lambda_upper_from_h(h, 0.0, regime).unwrap();
            let b = explicit_upper(h, 0.0, regime, None).unwrap();
            prop_assert!(b.value >= lambda * (1.0 - 1e-8));
        }
    }
}
