//! End-to-end verification of a model space, the sharpness demonstration on
//! the Gaussian, and the special-function oracles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bounds::{
    buser_functional, cheeger_lower, constant_m, explicit_upper, flat_constant, implicit_h_lower_bound,
    lambda_upper_from_h, negative_curvature_constants, negative_curvature_majorants, MeasureRegime,
};
use crate::error::{Error, Result};
use crate::heat::{
    check_self_adjoint, check_semigroup, default_t_grid, flow_invariants, linf_constant_comparison,
    refinement_record, verify_bgl, verify_l1_smoothing, verify_l2_decay, verify_linf_gradient,
    verify_perimeter_chain, verify_savare, HeatFlow, VerificationRecord,
};
use crate::isoperimetry::{cheeger_constant, coarea_check, CutFamily, BRUTE_FORCE_SLACK};
use crate::scalar::normal_cdf;
use crate::space::{build_space, GridFunction, Preset, SpaceSpec, Topology, WeightedLine};
use crate::special::{f1, f2, g1, g2, j_k_integral, j_k_integral_quadrature};
use crate::spectral::spectral_value;

/// Tolerance on the two sides of the spectral sandwich.
pub const SANDWICH_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub t_grid: Vec<f64>,
    /// Repeat the semigroup checks on the doubled grid.
    pub refine: bool,
    /// Random nonnegative profiles for the co-area check.
    pub coarea_samples: usize,
    pub seed: u64,
    /// Tolerance of the three sandwich records.
    pub sandwich_tolerance: f64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            t_grid: default_t_grid(),
            refine: true,
            coarea_samples: 40,
            seed: 0,
            sandwich_tolerance: SANDWICH_TOLERANCE,
        }
    }
}

/// Headline numbers of a verified space.
#[derive(Debug, Clone, Serialize)]
pub struct SpaceSummary {
    pub space: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub radius: Option<f64>,
    #[serde(rename = "K")]
    pub k: f64,
    pub regime: MeasureRegime,
    /// `lambda1` or `lambda0`.
    pub spectral_kind: &'static str,
    pub lambda: f64,
    pub h: f64,
    pub cheeger_lower: f64,
    pub explicit_upper: f64,
    pub implicit_h_lower: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub summary: SpaceSummary,
    pub records: Vec<VerificationRecord>,
}

impl SuiteReport {
    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }
}

/// Test profiles adapted to the domain of a space.
struct Profiles {
    /// Smooth, for L² decay and the gradient commutation.
    smooth: Box<dyn Fn(f64) -> f64>,
    /// Values in `[0, 1]`, for the reverse isoperimetric inequality.
    unit: Box<dyn Fn(f64) -> f64>,
    /// Lipschitz and bounded, for the gradient bound and L¹ smoothing.
    ramp: Box<dyn Fn(f64) -> f64>,
}

fn profiles(space: &WeightedLine<f64>) -> Profiles {
    let (left, right) = space.domain();
    let span = right - left;
    let mid = (left + right) / 2.0;
    if space.topology() == Topology::Circle {
        let k = 2.0 * std::f64::consts::PI / span;
        return Profiles {
            smooth: Box::new(move |x| (k * x).sin() + 0.3 * (2.0 * k * x).cos()),
            unit: Box::new(move |x| 0.5 * (1.0 + (k * x).sin())),
            ramp: Box::new(move |x| (k * x).sin()),
        };
    }
    match space.preset() {
        Preset::FlatInterval { length } => Profiles {
            smooth: Box::new(move |x| x + 0.2 * (std::f64::consts::PI * x / length).cos()),
            unit: Box::new(move |x| ((x - length / 4.0) / (length / 2.0)).clamp(0.0, 1.0)),
            ramp: Box::new(move |x| ((x - mid) / (length / 4.0)).clamp(-1.0, 1.0)),
        },
        _ => Profiles {
            smooth: Box::new(|x| x.sin() + 0.3 * (1.7 * x).cos()),
            unit: Box::new(normal_cdf),
            ramp: Box::new(|x| (x / 0.5).clamp(-1.0, 1.0)),
        },
    }
}

/// Every semigroup check on one grid, in a fixed order.
fn semigroup_records(space: &WeightedLine<f64>, cut: &CutFamily<f64>, t_grid: &[f64]) -> Result<Vec<VerificationRecord>> {
    let p = profiles(space);
    let grid = |f: &dyn Fn(f64) -> f64| GridFunction::from_fn(space, f);
    let mut records = vec![
        verify_l2_decay(space, &grid(&*p.smooth), t_grid)?,
        verify_bgl(space, &grid(&*p.unit), t_grid)?,
        verify_linf_gradient(space, &grid(&*p.ramp), t_grid)?,
        verify_l1_smoothing(space, &grid(&*p.ramp), t_grid)?,
        verify_savare(space, &grid(&*p.smooth), t_grid)?,
    ];
    let (chain, identity) = verify_perimeter_chain(space, cut, t_grid)?;
    records.push(chain);
    records.push(identity);
    Ok(records)
}

/// Runs the full verification suite on one space.
pub fn verify_space(spec: &SpaceSpec<f64>, opts: &SuiteOptions) -> Result<SuiteReport> {
    let space = build_space(spec)?;
    let regime = space.regime();
    let k = space.curvature();
    let eigen = spectral_value(&space)?;
    let lambda = eigen.eigenvalue;
    let cheeger = cheeger_constant(&space);
    let h = cheeger.h;
    let grid = (space.n(), space.dx(), 0.0);
    let mut records = Vec::new();

    let lower = cheeger_lower(h)?;
    records.push(VerificationRecord::new(
        "cheeger_lower",
        lambda - lower,
        opts.sandwich_tolerance,
        grid,
        format!("h^2/4={lower:.9} <= lambda={lambda:.9}"),
    ));
    let c = (k > 0.0).then(|| k / lambda);
    let explicit = explicit_upper(h, k, regime, c)?;
    records.push(VerificationRecord::new(
        "explicit_upper",
        explicit.value - lambda,
        opts.sandwich_tolerance,
        grid,
        format!("lambda={lambda:.9} <= {:.9} ({})", explicit.value, explicit.regime),
    ));
    let implicit = implicit_h_lower_bound(lambda, k, regime)?;
    records.push(VerificationRecord::new(
        "implicit_lower",
        h - implicit,
        opts.sandwich_tolerance,
        grid,
        format!("h={h:.9} >= {implicit:.9}"),
    ));
    records.push(VerificationRecord::new(
        "cheeger_single_cut",
        cheeger.brute_force - cheeger.single_cut * (1.0 - BRUTE_FORCE_SLACK),
        0.0,
        grid,
        format!("scan {:.9}, brute force {:.9}", cheeger.single_cut, cheeger.brute_force),
    ));
    records.push(coarea_record(&space, opts)?);

    if space.is_finite_measure() {
        let heat = semigroup_records(&space, &cheeger.optimal_cuts, &opts.t_grid)?;
        if opts.refine {
            let fine_space = build_space(&spec.with_n(2 * spec.n))?;
            let fine_cut = cheeger_constant(&fine_space).optimal_cuts;
            let fine = semigroup_records(&fine_space, &fine_cut, &opts.t_grid)?;
            let refined: Vec<VerificationRecord> = heat
                .iter()
                .zip(&fine)
                .filter(|(r, _)| r.inequality_id != "perimeter_chain_identity")
                .map(|(a, b)| refinement_record(a, b))
                .collect();
            records.extend(heat);
            records.extend(refined);
        } else {
            records.extend(heat);
        }
        if k > 0.0 {
            records.push(linf_constant_comparison(k, &opts.t_grid)?);
        }
    } else {
        let bump = GridFunction::from_fn(&space, |x| (-x * x).exp());
        records.push(verify_l2_decay(&space, &bump, &opts.t_grid)?);
    }
    records.extend(invariant_records(&space, &cheeger.optimal_cuts, opts)?);

    let summary = SpaceSummary {
        space: space.preset().to_string(),
        n: space.n(),
        radius: space.radius(),
        k,
        regime,
        spectral_kind: if space.is_finite_measure() { "lambda1" } else { "lambda0" },
        lambda,
        h,
        cheeger_lower: lower,
        explicit_upper: explicit.value,
        implicit_h_lower: implicit,
    };
    Ok(SuiteReport { summary, records })
}

fn coarea_record(space: &WeightedLine<f64>, opts: &SuiteOptions) -> Result<VerificationRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut worst = f64::INFINITY;
    let mut failures = 0;
    let n = space.n();
    for _ in 0..opts.coarea_samples {
        // piecewise-linear profile through a few random knots
        let knots: Vec<f64> = (0..rng.gen_range(2..12)).map(|_| rng.gen_range(0.0..2.0)).collect();
        let values = (0..n)
            .map(|i| {
                let pos = i as f64 / (n - 1) as f64 * (knots.len() - 1) as f64;
                let j = (pos.floor() as usize).min(knots.len() - 2);
                let theta = pos - j as f64;
                knots[j] * (1.0 - theta) + knots[j + 1] * theta
            })
            .collect();
        let c = coarea_check(space, &GridFunction { values })?;
        worst = worst.min(c.rhs - c.lhs);
        failures += usize::from(!c.pass);
    }
    Ok(VerificationRecord {
        pass: failures == 0,
        ..VerificationRecord::new(
            "coarea",
            if worst.is_finite() { worst } else { 0.0 },
            crate::isoperimetry::COAREA_TOLERANCE,
            (n, space.dx(), 0.0),
            format!("{} random profiles, {failures} failures", opts.coarea_samples),
        )
    })
}

/// Mass, maximum principle, semigroup law and self-adjointness.
fn invariant_records(space: &WeightedLine<f64>, cut: &CutFamily<f64>, opts: &SuiteOptions) -> Result<Vec<VerificationRecord>> {
    let flow = HeatFlow::new(space);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5eed);
    let chi = cut.indicator(space);
    let mut flows = flow.snapshots(&chi, &opts.t_grid)?;
    let unit = GridFunction::from_fn(space, &*profiles(space).unit);
    flows.extend(flow.snapshots(&unit, &opts.t_grid)?);
    let (mass, range) = flow_invariants(space, &flows);
    let f = GridFunction {
        values: (0..space.n()).map(|_| rng.gen_range(-1.0..1.0)).collect(),
    };
    let g = GridFunction {
        values: (0..space.n()).map(|_| rng.gen_range(-1.0..1.0)).collect(),
    };
    Ok(vec![
        mass,
        range,
        check_semigroup(space, &f, 0.3, 0.7)?,
        check_self_adjoint(space, &f, &g, 0.5)?,
    ])
}

/// Gaussian equality case of the explicit `K > 0` bound.
#[derive(Debug, Clone, Serialize)]
pub struct SharpnessReport {
    #[serde(rename = "N")]
    pub n: usize,
    pub radius: f64,
    pub lambda1: f64,
    pub h: f64,
    #[serde(rename = "K")]
    pub k: f64,
    /// `sup_t (1 - e^{-λ₁t}) / J_K(t)`.
    pub implicit: f64,
    pub c: f64,
    pub explicit: f64,
    pub h_gap: f64,
    pub explicit_gap: f64,
    pub h_gap_relative: f64,
    pub explicit_gap_relative: f64,
}

/// Computes `λ₁`, `h` and both bounds on the Gaussian; `c` defaults to `K/λ₁`.
pub fn sharpness(n: usize, radius: f64, c: Option<f64>) -> Result<SharpnessReport> {
    let space = build_space(&SpaceSpec::new(Preset::Gaussian, n).with_radius(radius))?;
    let k = space.curvature();
    let lambda = spectral_value(&space)?.eigenvalue;
    let h = cheeger_constant(&space).h;
    let c = c.unwrap_or(k / lambda);
    let implicit = buser_functional(lambda, k)?.value;
    let explicit = explicit_upper(h, k, MeasureRegime::FiniteNormalized, Some(c))?.value;
    let target = (2.0 / std::f64::consts::PI).sqrt();
    Ok(SharpnessReport {
        n,
        radius,
        lambda1: lambda,
        h,
        k,
        implicit,
        c,
        explicit,
        h_gap: (h - target).abs(),
        explicit_gap: (explicit - lambda).abs(),
        h_gap_relative: (h - target).abs() / target,
        explicit_gap_relative: (explicit - lambda).abs() / lambda,
    })
}

/// Closed-form constants of the explicit bounds.
#[derive(Debug, Clone, Serialize)]
pub struct ConstantsReport {
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(rename = "T_star")]
    pub t_star: f64,
    pub two_over_pi: f64,
    pub flat_constant: f64,
    pub pi: f64,
    pub kneg_linear: f64,
    pub kneg_quadratic: f64,
    pub kneg_linear_majorant: f64,
    pub kneg_quadratic_majorant: f64,
}

impl ConstantsReport {
    /// `M > 2/π`, `4/(πM²) < π` and both majorants strict.
    pub fn checks(&self) -> [(&'static str, bool); 4] {
        [
            ("M > 2/pi", self.m > self.two_over_pi),
            ("4/(pi M^2) < pi", self.flat_constant < self.pi),
            ("linear constant < 21/10", self.kneg_linear < self.kneg_linear_majorant),
            ("quadratic constant < 22/5", self.kneg_quadratic < self.kneg_quadratic_majorant),
        ]
    }
}

pub fn constants() -> ConstantsReport {
    let cm = constant_m::<f64>();
    let (lin, quad) = negative_curvature_constants::<f64>();
    let (lin_dec, quad_dec) = negative_curvature_majorants::<f64>();
    ConstantsReport {
        m: cm.m,
        t_star: cm.t_star,
        two_over_pi: 2.0 / std::f64::consts::PI,
        flat_constant: flat_constant::<f64>(),
        pi: std::f64::consts::PI,
        kneg_linear: lin,
        kneg_quadratic: quad,
        kneg_linear_majorant: lin_dec,
        kneg_quadratic_majorant: quad_dec,
    }
}

/// Cross-checks of the special functions and the bound calculus against
/// independent computations: `M` by grid search, `J_K` by quadrature, the
/// monotonicity lemmas on grids, and the consistency of bound inversion.
pub fn oracle_records(seed: u64) -> Result<Vec<VerificationRecord>> {
    let none = (0, 0.0, 0.0);
    let mut records = Vec::new();

    let m = constant_m::<f64>().m;
    let grid_max = m_by_grid(10_000_000);
    records.push(VerificationRecord::new(
        "oracle_constant_m",
        -(m - grid_max).abs(),
        1e-8,
        none,
        format!("Lambert {m:.12}, grid {grid_max:.12}"),
    ));

    let mut worst = 0.0f64;
    for &k in &[-2.0, -1.0, -1e-8, 0.0, 1e-8, 1.0, 2.0] {
        for t in crate::heat::log_grid(1e-3, 1e2, 40) {
            let closed = j_k_integral(k, t)?;
            let quad = j_k_integral_quadrature(k, t, 1e-13)?;
            worst = worst.max((closed - quad).abs());
        }
    }
    records.push(VerificationRecord::new(
        "oracle_j_k_integral",
        -worst,
        1e-10,
        none,
        "closed form vs quadrature, 7 curvatures x 40 times",
    ));

    records.push(monotonicity_record(seed)?);
    records.push(inversion_record(seed)?);
    Ok(records)
}

/// `max_{T>0} (1 - e^{-T})/√T` over an even grid on `(0, 10]`, polished by
/// parabolic interpolation through the best three points.
pub fn m_by_grid(points: usize) -> f64 {
    let g = |t: f64| -(-t).exp_m1() / t.sqrt();
    let step = 10.0 / points as f64;
    let (mut best, mut best_t) = (f64::NEG_INFINITY, step);
    for i in 1..=points {
        let t = i as f64 * step;
        let v = g(t);
        if v > best {
            best = v;
            best_t = t;
        }
    }
    let (a, b, c) = (g(best_t - step), best, g(best_t + step));
    let denom = a - 2.0 * b + c;
    if denom < 0.0 {
        let shift = 0.5 * (a - c) / denom;
        g(best_t + shift * step).max(best)
    } else {
        best
    }
}

fn monotonicity_record(seed: u64) -> Result<VerificationRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0f1f);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let t = 10f64.powf(rng.gen_range(-2.0..2.0));
        let xs: Vec<f64> = (1..=1000).map(|i| i as f64 / 1001.0).collect();
        let mut prev1 = f64::NEG_INFINITY;
        let mut prev2 = f64::INFINITY;
        for &x in &xs {
            let (a, b) = (f1(x, t)?, f2(x, t)?);
            worst = worst.max(prev1 - a).max(b - prev2);
            prev1 = a;
            prev2 = b;
        }
    }
    for i in 1..1000 {
        let z = 10f64.powf(-3.0 + 6.0 * i as f64 / 1000.0);
        worst = worst.max(-g1(z)?);
        let y = i as f64 / 1000.0;
        worst = worst.max(g2(y)?);
    }
    Ok(VerificationRecord::new(
        "oracle_monotonicity",
        -worst,
        1e-12,
        (0, 0.0, 0.0),
        "f1 nondecreasing, f2 nonincreasing, g1 >= 0, g2 <= 0",
    ))
}

fn inversion_record(seed: u64) -> Result<VerificationRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1a7e);
    let mut worst = f64::INFINITY;
    let mut samples = 0;
    while samples < 100 {
        let regime = if rng.gen_bool(0.5) { MeasureRegime::FiniteNormalized } else { MeasureRegime::Infinite };
        let k: f64 = if regime == MeasureRegime::Infinite { rng.gen_range(-2.0..=0.0) } else { rng.gen_range(-2.0..2.0) };
        let h: f64 = 10f64.powf(rng.gen_range(-1.0..1.0));
        let lambda = match lambda_upper_from_h(h, k, regime) {
            Ok(l) if l > 0.0 => l,
            Ok(_) => continue,
            Err(Error::Infeasible(_)) => continue,
            Err(e) => return Err(e),
        };
        let back = implicit_h_lower_bound(lambda, k, regime)?;
        worst = worst.min(h * (1.0 + 1e-6) - back);
        samples += 1;
    }
    Ok(VerificationRecord::new(
        "oracle_inversion",
        worst,
        0.0,
        (0, 0.0, 0.0),
        "implicit_h_lower_bound(lambda_upper_from_h(h)) <= h(1 + 1e-6), 100 triples",
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_checks_hold() {
        let c = constants();
        assert!(c.checks().iter().all(|(_, ok)| *ok));
    }

    #[test]
    fn grid_maximum_matches_lambert() {
        assert!((m_by_grid(100_000) - constant_m::<f64>().m).abs() < 1e-9);
    }

    #[test]
    fn oracles_pass() {
        for r in oracle_records(3).unwrap() {
            assert!(r.pass, "{r:?}");
        }
    }
}
