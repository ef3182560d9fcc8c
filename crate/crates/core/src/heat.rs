//! The heat semigroup `H_t` on a discretized weighted line, and numerical
//! checks of the semigroup inequalities behind the spectral bounds.
//!
//! Time stepping is Crank–Nicolson in increment form: each step solves
//! `(I - dt/2 L) δ = dt L u` and sets `u ← u + δ`, so constants are preserved
//! exactly and the weighted mass up to rounding. Crank–Nicolson damps stiff
//! modes poorly, which would break the maximum principle on rough data, so the
//! first step is replaced by geometrically growing substeps starting at
//! `Δx²/10`. A mode reaches `dt λ = 2` only after it has decayed by about
//! `e^{-40}`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::isoperimetry::{perimeter, CutFamily};
use crate::space::{slope, Closure, GridFunction, Topology, WeightedLine};
use crate::special::{gaussian_isoperimetric, j_k, j_k_integral};
use crate::spectral::{assemble, lambda1, spectral_value, TridiagonalOperator};
use crate::Real;

const STARTUP_RATIO: f64 = 1.05;
const STARTUP_FIRST: f64 = 0.1;

/// Outcome of one evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowResult<T> {
    pub final_state: GridFunction<T>,
    pub t: T,
    /// Time steps taken, startup substeps included.
    pub steps: usize,
    /// Largest step used.
    pub dt: T,
    /// `Σ (H_t f)_i w_i Δx - Σ f_i w_i Δx`.
    pub mass_drift: T,
    /// How far the flow dipped below the admissible range at any step.
    pub min_overshoot: T,
    /// How far the flow rose above the admissible range at any step.
    pub max_overshoot: T,
}

/// How the first time step is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Startup {
    /// Geometric substeps from `Δx²/10` (the default).
    Graded,
    /// Plain Crank–Nicolson from the first step; every step then applies the
    /// same matrix, so flows compose exactly at matched step sizes.
    Uniform,
}

/// Heat flow on a fixed space.
pub struct HeatFlow<'a, T> {
    space: &'a WeightedLine<T>,
    generator: TridiagonalOperator<T>,
    startup: Startup,
}

impl<'a, T: Real> HeatFlow<'a, T> {
    pub fn new(space: &'a WeightedLine<T>) -> Self {
        HeatFlow {
            space,
            generator: assemble(space),
            startup: Startup::Graded,
        }
    }

    pub fn with_startup(mut self, startup: Startup) -> Self {
        self.startup = startup;
        self
    }

    /// Smallest admissible step count for horizon `t`.
    pub fn min_steps(&self, t: T) -> usize {
        (t / self.space.dx()).ceil().to_usize().unwrap_or(usize::MAX).max(1)
    }

    /// `H_t f` with `steps` uniform steps (the first one graded unless disabled).
    pub fn evolve(&self, f: &GridFunction<T>, t: T, steps: usize) -> Result<FlowResult<T>> {
        self.check_input(f)?;
        if !(t >= T::zero() && t.is_finite()) {
            return Err(Error::Argument(format!("evolution time must be finite and >= 0, got {t}")));
        }
        let min = self.min_steps(t);
        if steps < min {
            return Err(Error::Argument(format!(
                "t = {t} needs at least {min} steps on this grid (dt <= dx), got {steps}"
            )));
        }
        let dt = t / T::lit(steps as f64);
        let mut mesh = Vec::with_capacity(steps + 128);
        if t > T::zero() {
            self.first_step(dt, &mut mesh);
            mesh.extend(std::iter::repeat_n(dt, steps - 1));
        }
        let mut out = self.run(f, &mesh, &[mesh.len()]);
        Ok(out.pop().expect("one snapshot"))
    }

    /// `H_t f` at every time in `times` (nondecreasing, `≥ 0`) from one march
    /// with steps of at most `Δx`.
    pub fn snapshots(&self, f: &GridFunction<T>, times: &[T]) -> Result<Vec<FlowResult<T>>> {
        self.check_input(f)?;
        if times.iter().any(|t| !(*t >= T::zero() && t.is_finite())) {
            return Err(Error::Argument("snapshot times must be finite and >= 0".into()));
        }
        if times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Argument("snapshot times must be nondecreasing".into()));
        }
        let dx = self.space.dx();
        let mut mesh = Vec::new();
        let mut marks = Vec::with_capacity(times.len());
        let mut now = T::zero();
        for &t in times {
            let gap = t - now;
            if gap > T::zero() {
                // also resolve early times relative to t so small-t errors refine with Δx
                let relative = (gap / (t * dx * T::lit(SNAPSHOT_RELATIVE_STEP))).ceil().to_usize().unwrap_or(usize::MAX);
                let steps = self.min_steps(gap).max(relative);
                let dt = gap / T::lit(steps as f64);
                if mesh.is_empty() {
                    self.first_step(dt, &mut mesh);
                    mesh.extend(std::iter::repeat_n(dt, steps - 1));
                } else {
                    mesh.extend(std::iter::repeat_n(dt, steps));
                }
                now = t;
            }
            marks.push(mesh.len());
        }
        debug_assert!(mesh.iter().all(|&dt| dt <= dx * T::lit(1.0 + 1e-12)));
        let mut out = self.run(f, &mesh, &marks);
        for (r, &t) in out.iter_mut().zip(times) {
            r.t = t;
        }
        Ok(out)
    }

    fn check_input(&self, f: &GridFunction<T>) -> Result<()> {
        if f.len() != self.space.n() {
            return Err(Error::Argument("grid function does not match the space".into()));
        }
        if f.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("initial data must be finite".into()));
        }
        Ok(())
    }

    fn first_step(&self, dt: T, mesh: &mut Vec<T>) {
        if self.startup == Startup::Uniform {
            mesh.push(dt);
            return;
        }
        let ratio = T::lit(STARTUP_RATIO);
        let mut sub = T::lit(STARTUP_FIRST) * self.space.dx() * self.space.dx();
        let mut covered = T::zero();
        while covered + sub < dt {
            mesh.push(sub);
            covered = covered + sub;
            sub = sub * ratio;
        }
        mesh.push(dt - covered);
    }

    /// Marches through `mesh`, recording a snapshot after `marks[k]` steps.
    fn run(&self, f: &GridFunction<T>, mesh: &[T], marks: &[usize]) -> Vec<FlowResult<T>> {
        let space = self.space;
        let (mut lo, mut hi) = (f.min(), f.max());
        if space.closure() == Closure::Dirichlet {
            lo = lo.min(T::zero());
            hi = hi.max(T::zero());
        }
        let mass0 = space.integrate(&f.values);
        let mut u = f.values.clone();
        let mut solver = None;
        let mut current = T::nan();
        let (mut under, mut over) = (T::zero(), T::zero());
        let mut largest = T::zero();
        let mut out = Vec::with_capacity(marks.len());
        let mut next_mark = 0;
        let mut snapshot = |k: usize, u: &[T], under: T, over: T, largest: T, out: &mut Vec<FlowResult<T>>| {
            while next_mark < marks.len() && marks[next_mark] == k {
                out.push(FlowResult {
                    final_state: GridFunction { values: u.to_vec() },
                    t: mesh[..k].iter().copied().sum(),
                    steps: k,
                    dt: largest,
                    mass_drift: space.integrate(u) - mass0,
                    min_overshoot: under,
                    max_overshoot: over,
                });
                next_mark += 1;
            }
        };
        snapshot(0, &u, under, over, largest, &mut out);
        for (k, &dt) in mesh.iter().enumerate() {
            if dt != current {
                solver = Some(self.generator.shifted_solver(T::one(), -dt / T::lit(2.0)));
                current = dt;
            }
            let mut delta = self.generator.apply(&u);
            delta.iter_mut().for_each(|v| *v = *v * dt);
            solver.as_ref().expect("factored").solve_in_place(&mut delta);
            u.iter_mut().zip(&delta).for_each(|(a, &d)| *a = *a + d);
            let (umin, umax) = u.iter().fold((T::infinity(), T::neg_infinity()), |(a, b), &v| (a.min(v), b.max(v)));
            under = under.max(lo - umin);
            over = over.max(umax - hi);
            largest = largest.max(dt);
            snapshot(k + 1, &u, under, over, largest, &mut out);
        }
        out
    }
}

/// `H_t f` on `space` with `steps` time steps (at least `ceil(t/Δx)`).
pub fn evolve<T: Real>(space: &WeightedLine<T>, f: &GridFunction<T>, t: T, steps: usize) -> Result<FlowResult<T>> {
    HeatFlow::new(space).evolve(f, t, steps)
}

/// `points` log-spaced times in `[t_min, t_max]`.
pub fn log_grid(t_min: f64, t_max: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![t_min],
        _ => {
            let (a, b) = (t_min.ln(), t_max.ln());
            let mut grid: Vec<f64> = (0..points)
                .map(|k| (a + (b - a) * k as f64 / (points - 1) as f64).exp())
                .collect();
            grid[0] = t_min;
            grid[points - 1] = t_max;
            grid
        }
    }
}

/// Default time grid: 24 log-spaced points in `[10⁻², 10]`.
pub fn default_t_grid() -> Vec<f64> {
    log_grid(1e-2, 10.0, 24)
}

/// One checked inequality. `worst_slack < 0` is a violation; the record
/// passes when `worst_slack ≥ -tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationRecord {
    pub inequality_id: String,
    pub worst_slack: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(rename = "N")]
    pub n: usize,
    pub dx: f64,
    pub dt: f64,
    pub notes: String,
}

impl VerificationRecord {
    pub fn new(id: impl Into<String>, worst_slack: f64, tolerance: f64, grid: (usize, f64, f64), notes: impl Into<String>) -> Self {
        VerificationRecord {
            inequality_id: id.into(),
            worst_slack,
            tolerance,
            pass: worst_slack >= -tolerance,
            n: grid.0,
            dx: grid.1,
            dt: grid.2,
            notes: notes.into(),
        }
    }

    /// Size of the violation, zero when the slack is nonnegative.
    pub fn violation(&self) -> f64 {
        (-self.worst_slack).max(0.0)
    }
}

/// Violations below this are treated as rounding noise by refinement checks.
/// Snapshot steps satisfy `dt ≤ SNAPSHOT_RELATIVE_STEP · t · Δx` as well as `dt ≤ Δx`.
pub const SNAPSHOT_RELATIVE_STEP: f64 = 8.0;

pub const REFINEMENT_FLOOR: f64 = 1e-10;

/// Compares a check on a grid and on its refinement: the violation must at
/// least halve. Slack is `v_coarse/2 - v_fine`.
pub fn refinement_record(coarse: &VerificationRecord, fine: &VerificationRecord) -> VerificationRecord {
    let vc = coarse.violation();
    let vf = fine.violation();
    VerificationRecord::new(
        format!("{}_refinement", coarse.inequality_id),
        vc / 2.0 - vf,
        REFINEMENT_FLOOR,
        (fine.n, fine.dx, fine.dt),
        format!("violation {vc:.3e} at N={} -> {vf:.3e} at N={}", coarse.n, fine.n),
    )
}

/// Coefficients `C` of the `C·Δx` discretization allowances.
pub mod allowance {
    pub const BGL: f64 = 1.0;
    pub const LINF_GRADIENT: f64 = 1.0;
    pub const L1_SMOOTHING: f64 = 1.0;
    pub const SAVARE: f64 = 1.0;
}

/// Relative tolerance of the L² decay check.
pub const L2_DECAY_TOLERANCE: f64 = 1e-3;
/// Number of grid times (spread over the grid) at which the chain identity is evaluated.
pub const CHAIN_IDENTITY_TIMES: usize = 4;
/// Absolute tolerance of the perimeter-chain identity.
pub const CHAIN_IDENTITY_TOLERANCE: f64 = 1e-6;

fn grid_of<T: Real>(space: &WeightedLine<T>, flows: &[FlowResult<T>]) -> (usize, f64, f64) {
    let dt = flows.iter().map(|r| r.dt.as_f64()).fold(0.0, f64::max);
    (space.n(), space.dx().as_f64(), dt)
}

fn sorted_times<T: Real>(t_grid: &[T]) -> Result<Vec<T>> {
    if t_grid.iter().any(|t| !(*t >= T::zero() && t.is_finite())) {
        return Err(Error::Argument("t-grid entries must be finite and >= 0".into()));
    }
    let mut times = t_grid.to_vec();
    times.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
    Ok(times)
}

/// Indices checked pointwise: all nodes on a circle, otherwise all but the
/// two nearest each end, where one-sided stencils lose an order.
fn pointwise_range<T: Real>(space: &WeightedLine<T>) -> std::ops::Range<usize> {
    match space.topology() {
        Topology::Circle => 0..space.n(),
        _ => 2..space.n() - 2,
    }
}

fn min_over<T: Real>(values: impl Iterator<Item = T>) -> T {
    values.fold(T::infinity(), T::min)
}

/// `‖H_t f‖₂ ≤ e^{-λ₁ t} ‖f‖₂` for weighted-mean-zero `f`; on an
/// infinite-measure space `λ₀` replaces `λ₁` and `f` is not projected.
pub fn verify_l2_decay<T: Real>(space: &WeightedLine<T>, f: &GridFunction<T>, t_grid: &[T]) -> Result<VerificationRecord> {
    let times = sorted_times(t_grid)?;
    let lambda = spectral_value(space)?.eigenvalue;
    let f = if space.is_finite_measure() { space.project_mean_zero(f) } else { f.clone() };
    let norm0 = space.norm_l2(&f.values);
    let flows = HeatFlow::new(space).snapshots(&f, &times)?;
    let worst = min_over(flows.iter().map(|r| {
        if r.t == T::zero() {
            T::zero()
        } else {
            (-lambda * r.t).exp() * norm0 - space.norm_l2(&r.final_state.values)
        }
    }));
    let symbol = if space.is_finite_measure() { "lambda1" } else { "lambda0" };
    Ok(VerificationRecord::new(
        "l2_decay",
        worst.as_f64(),
        L2_DECAY_TOLERANCE * norm0.as_f64(),
        grid_of(space, &flows),
        format!("{symbol}={:.9}", lambda.as_f64()),
    ))
}

/// `|D H_t f|² ≤ j_K(t) ([I(H_t f)]² - [H_t I(f)]²)` pointwise, `0 ≤ f ≤ 1`.
pub fn verify_bgl<T: Real>(space: &WeightedLine<T>, f: &GridFunction<T>, t_grid: &[T]) -> Result<VerificationRecord> {
    if f.values.iter().any(|v| !(*v >= T::zero() && *v <= T::one())) {
        return Err(Error::Argument("the BGL check needs 0 <= f <= 1".into()));
    }
    let times = sorted_times(t_grid)?;
    let k = space.curvature();
    let iso = |v: T| gaussian_isoperimetric(v.max(T::zero()).min(T::one())).expect("clamped to [0, 1]");
    let flow = HeatFlow::new(space);
    let flows = flow.snapshots(f, &times)?;
    let profile = f.map(iso);
    let profile_flows = flow.snapshots(&profile, &times)?;
    let range = pointwise_range(space);
    let mut worst = T::infinity();
    for (u, g) in flows.iter().zip(&profile_flows) {
        if u.t == T::zero() {
            continue;
        }
        let j = j_k(k, u.t)?;
        let grad = slope(space, &u.final_state);
        for i in range.clone() {
            let lhs = grad.values[i] * grad.values[i];
            let iu = iso(u.final_state.values[i]);
            let rhs = j * (iu * iu - g.final_state.values[i] * g.final_state.values[i]);
            worst = worst.min(rhs - lhs);
        }
    }
    Ok(VerificationRecord::new(
        "bgl",
        finite_or_zero(worst),
        allowance::BGL * space.dx().as_f64(),
        grid_of(space, &flows),
        format!("K={}", k.as_f64()),
    ))
}

fn finite_or_zero<T: Real>(worst: T) -> f64 {
    if worst.is_finite() {
        worst.as_f64()
    } else {
        0.0
    }
}

/// `max |∇H_t f| ≤ √(2/π) √(j_K(t)) ‖f‖∞`.
pub fn verify_linf_gradient<T: Real>(space: &WeightedLine<T>, f: &GridFunction<T>, t_grid: &[T]) -> Result<VerificationRecord> {
    let times = sorted_times(t_grid)?;
    let k = space.curvature();
    let sup = f.max_abs();
    let flows = HeatFlow::new(space).snapshots(f, &times)?;
    let range = pointwise_range(space);
    let factor = (T::lit(2.0) / T::PI()).sqrt();
    let mut worst = T::infinity();
    for u in flows.iter().filter(|u| u.t > T::zero()) {
        let bound = factor * j_k(k, u.t)?.sqrt() * sup;
        let grad = slope(space, &u.final_state);
        let peak = range.clone().map(|i| grad.values[i]).fold(T::zero(), T::max);
        worst = worst.min(bound - peak);
    }
    Ok(VerificationRecord::new(
        "linf_gradient",
        finite_or_zero(worst),
        allowance::LINF_GRADIENT * space.dx().as_f64(),
        grid_of(space, &flows),
        format!("K={}", k.as_f64()),
    ))
}

/// For `K > 0`, the smoothing constant `√(2/π) √(j_K(t))` beats the
/// curvature-only constant `√(j_K(t))` at every `t` of the grid.
pub fn linf_constant_comparison<T: Real>(k: T, t_grid: &[T]) -> Result<VerificationRecord> {
    if !(k > T::zero()) {
        return Err(Error::Argument(format!("constant comparison needs K > 0, got {k}")));
    }
    let factor = (T::lit(2.0) / T::PI()).sqrt();
    let mut worst = T::infinity();
    for &t in t_grid.iter().filter(|t| **t > T::zero()) {
        let root = j_k(k, t)?.sqrt();
        worst = worst.min(root - factor * root);
    }
    let worst = finite_or_zero(worst);
    Ok(VerificationRecord {
        pass: worst > 0.0,
        ..VerificationRecord::new("linf_constant", worst, 0.0, (0, 0.0, 0.0), format!("K={}", k.as_f64()))
    })
}

/// `‖f - H_t f‖₁ ≤ J_K(t) ‖∇f‖₁`.
pub fn verify_l1_smoothing<T: Real>(space: &WeightedLine<T>, f: &GridFunction<T>, t_grid: &[T]) -> Result<VerificationRecord> {
    let times = sorted_times(t_grid)?;
    let k = space.curvature();
    let variation = space.integrate(&slope(space, f).values);
    let flows = HeatFlow::new(space).snapshots(f, &times)?;
    let mut worst = T::infinity();
    let mut trace = Vec::new();
    for u in flows.iter().filter(|u| u.t > T::zero()) {
        let diff: Vec<T> = f.values.iter().zip(&u.final_state.values).map(|(&a, &b)| a - b).collect();
        let slack = j_k_integral(k, u.t)? * variation - space.norm_l1(&diff);
        trace.push(slack);
        worst = worst.min(slack);
    }
    let monotone = trace.windows(2).take(6).all(|w| w[1] <= w[0]);
    Ok(VerificationRecord::new(
        "l1_smoothing",
        finite_or_zero(worst),
        1e-6 + allowance::L1_SMOOTHING * space.dx().as_f64(),
        grid_of(space, &flows),
        format!("K={}; slack nonincreasing at small t: {monotone}", k.as_f64()),
    ))
}

/// The perimeter chain `J_K(t) Per(A) ≥ 2 m(A)(1 - m(A))(1 - e^{-λ₁ t})`
/// together with the identity `‖χ - H_t χ‖₁ = 2(m(A) - ‖H_{t/2} χ‖₂²)`,
/// where `H_t` is formed as `H_{t/2} ∘ H_{t/2}`. Returns both records.
pub fn verify_perimeter_chain<T: Real>(
    space: &WeightedLine<T>,
    cut: &CutFamily<T>,
    t_grid: &[T],
) -> Result<(VerificationRecord, VerificationRecord)> {
    if !space.is_finite_measure() {
        return Err(Error::Regime("the perimeter chain needs finite total measure".into()));
    }
    cut.validate(space)?;
    let total = space.total_mass();
    let exact = cut.measure(space);
    if exact > total / T::lit(2.0) * (T::one() + T::lit(1e-12)) {
        return Err(Error::Argument(format!(
            "the set has mass {exact}, above half the total {total}"
        )));
    }
    let times = sorted_times(t_grid)?;
    let k = space.curvature();
    let lambda = lambda1(space)?.eigenvalue;
    let chi = cut.indicator(space);
    let mass = space.integrate(&chi.values);
    let rel = mass / total;
    let per = perimeter(space, cut) / total;
    let flow = HeatFlow::new(space);
    let two = T::lit(2.0);
    let mut chain = T::infinity();
    let mut identity = T::zero();
    let mut steps = Vec::with_capacity(CHAIN_IDENTITY_TIMES);
    let positive: Vec<T> = times.into_iter().filter(|t| *t > T::zero()).collect();
    for &t in &positive {
        let rhs = two * rel * (T::one() - rel) * (T::one() - (-lambda * t).exp());
        chain = chain.min(j_k_integral(k, t)? * per - rhs);
    }
    let picks = CHAIN_IDENTITY_TIMES.min(positive.len());
    let mut picked: Vec<usize> = (0..picks).map(|i| i * (positive.len() - 1) / (picks - 1).max(1)).collect();
    picked.dedup();
    for t in picked.into_iter().map(|i| positive[i]) {
        // the same discrete operator P = H_{t/2} applied twice
        let half = t / two;
        let n = flow.min_steps(half);
        let p = flow.evolve(&chi, half, n)?;
        let full = flow.evolve(&p.final_state, half, n)?;
        let diff: Vec<T> = chi.values.iter().zip(&full.final_state.values).map(|(&a, &b)| a - b).collect();
        let lhs = space.norm_l1(&diff);
        let norm = space.norm_l2(&p.final_state.values);
        identity = identity.max((lhs - two * (mass - norm * norm)).abs());
        steps.push(p.dt);
    }
    let dt = steps.iter().copied().fold(T::zero(), T::max).as_f64();
    let grid = (space.n(), space.dx().as_f64(), dt);
    Ok((
        VerificationRecord::new(
            "perimeter_chain",
            finite_or_zero(chain),
            0.0,
            grid,
            format!("K={}; m(A)={:.6}; Per(A)={:.6}", k.as_f64(), rel.as_f64(), per.as_f64()),
        ),
        VerificationRecord::new(
            "perimeter_chain_identity",
            -identity.as_f64(),
            CHAIN_IDENTITY_TOLERANCE,
            grid,
            "|L1 defect - 2(m - |H_{t/2} chi|^2)|",
        ),
    ))
}

/// `|D H_t f| ≤ e^{-Kt} H_t(|D f|)` pointwise.
pub fn verify_savare<T: Real>(space: &WeightedLine<T>, f: &GridFunction<T>, t_grid: &[T]) -> Result<VerificationRecord> {
    let times = sorted_times(t_grid)?;
    let k = space.curvature();
    let flow = HeatFlow::new(space);
    let flows = flow.snapshots(f, &times)?;
    let grad_flows = flow.snapshots(&slope(space, f), &times)?;
    let range = pointwise_range(space);
    let mut worst = T::infinity();
    for (u, g) in flows.iter().zip(&grad_flows) {
        let damp = (-k * u.t).exp();
        let grad = slope(space, &u.final_state);
        for i in range.clone() {
            worst = worst.min(damp * g.final_state.values[i] - grad.values[i]);
        }
    }
    Ok(VerificationRecord::new(
        "savare",
        finite_or_zero(worst),
        allowance::SAVARE * space.dx().as_f64(),
        grid_of(space, &flows),
        format!("K={}", k.as_f64()),
    ))
}

/// Mass drift per unit time and range overshoot over a set of flows.
pub fn flow_invariants<T: Real>(space: &WeightedLine<T>, flows: &[FlowResult<T>]) -> (VerificationRecord, VerificationRecord) {
    let grid = grid_of(space, flows);
    let scale = space.total_mass().as_f64().max(1.0);
    let drift = flows
        .iter()
        .map(|r| r.mass_drift.as_f64().abs() / scale / r.t.as_f64().max(1.0))
        .fold(0.0, f64::max);
    let overshoot = flows
        .iter()
        .map(|r| r.min_overshoot.max(r.max_overshoot).as_f64())
        .fold(0.0, f64::max);
    let mass = if space.closure() == Closure::Dirichlet {
        VerificationRecord::new("mass", 0.0, 1e-8, grid, "absorbing walls: mass is not conserved")
    } else {
        VerificationRecord::new("mass", -drift, 1e-8, grid, "relative drift per unit time")
    };
    (
        mass,
        VerificationRecord::new("max_principle", -overshoot, 1e-12, grid, "range overshoot"),
    )
}

/// `H_{t₁+t₂} f = H_{t₂} H_{t₁} f` at matched uniform steps, in the weighted L² norm.
pub fn check_semigroup<T: Real>(space: &WeightedLine<T>, f: &GridFunction<T>, t1: T, t2: T) -> Result<VerificationRecord> {
    let flow = HeatFlow::new(space).with_startup(Startup::Uniform);
    let dt = space.dx();
    let n1 = (t1 / dt).ceil().to_usize().unwrap_or(1).max(1);
    let n2 = (t2 / dt).ceil().to_usize().unwrap_or(1).max(1);
    let step = dt.min(t1 / T::lit(n1 as f64)).min(t2 / T::lit(n2 as f64));
    let (t1, t2) = (step * T::lit(n1 as f64), step * T::lit(n2 as f64));
    let whole = flow.evolve(f, t1 + t2, n1 + n2)?;
    let first = flow.evolve(f, t1, n1)?;
    let second = flow.evolve(&first.final_state, t2, n2)?;
    let diff: Vec<T> = whole
        .final_state
        .values
        .iter()
        .zip(&second.final_state.values)
        .map(|(&a, &b)| a - b)
        .collect();
    let gap = space.norm_l2(&diff).as_f64();
    Ok(VerificationRecord::new(
        "semigroup",
        -gap,
        1e-8,
        (space.n(), space.dx().as_f64(), step.as_f64()),
        format!("t1={:.4}, t2={:.4}", t1.as_f64(), t2.as_f64()),
    ))
}

/// `⟨H_t f, g⟩_w = ⟨f, H_t g⟩_w`.
pub fn check_self_adjoint<T: Real>(space: &WeightedLine<T>, f: &GridFunction<T>, g: &GridFunction<T>, t: T) -> Result<VerificationRecord> {
    let flow = HeatFlow::new(space);
    let steps = flow.min_steps(t);
    let hf = flow.evolve(f, t, steps)?;
    let hg = flow.evolve(g, t, steps)?;
    let (a, b) = (space.inner(&hf.final_state.values, &g.values), space.inner(&f.values, &hg.final_state.values));
    // relative to the size of the pairing; densities can reach 1e14
    let gap = (a - b).abs() / T::one().max(a.abs()).max(b.abs());
    Ok(VerificationRecord::new(
        "self_adjoint",
        -gap.as_f64(),
        1e-9,
        (space.n(), space.dx().as_f64(), hf.dt.as_f64()),
        format!("t={}", t.as_f64()),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isoperimetry::cheeger_constant;
    use crate::space::{build_space, Preset, SpaceSpec};
    use crate::scalar::normal_cdf;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn space(preset: Preset<f64>, n: usize) -> WeightedLine<f64> {
        build_space(&SpaceSpec::new(preset, n)).unwrap()
    }

    fn gaussian() -> WeightedLine<f64> {
        space(Preset::Gaussian, 2001)
    }

    #[test]
    fn ornstein_uhlenbeck_decay_of_x() {
        let s = gaussian();
        let f = GridFunction::from_fn(&s, |x| x);
        let r = evolve(&s, &f, 1.0, 250).unwrap();
        for (i, &x) in s.nodes().iter().enumerate() {
            if x.abs() <= 4.0 {
                let want = (-1.0f64).exp() * x;
                assert!((r.final_state.values[i] - want).abs() < 1e-4, "x={x}");
            }
        }
        assert!(r.mass_drift.abs() < 1e-12);
    }

    #[test]
    fn constants_are_fixed_exactly() {
        for preset in [Preset::Gaussian, Preset::FlatCircle { length: 3.0 }, Preset::DoubleWell { b: 1.0 }] {
            let s = space(preset, 301);
            let f = GridFunction::constant(&s, 0.37);
            let flow = HeatFlow::new(&s);
            for r in flow.snapshots(&f, &[0.0, 0.1, 2.0]).unwrap() {
                assert!(r.final_state.values.iter().all(|&v| v == 0.37));
            }
        }
    }

    #[test]
    fn circle_sine_decays() {
        let s = space(Preset::FlatCircle { length: 2.0 * PI }, 1024);
        let f = GridFunction::from_fn(&s, f64::sin);
        let r = evolve(&s, &f, 0.5, 100).unwrap();
        for (i, &x) in s.nodes().iter().enumerate() {
            assert!((r.final_state.values[i] - (-0.5f64).exp() * x.sin()).abs() < 1e-4);
        }
    }

    #[test]
    fn step_guard() {
        let s = space(Preset::FlatInterval { length: 1.0 }, 100);
        let f = GridFunction::constant(&s, 1.0);
        match evolve(&s, &f, 1.0, 99) {
            Err(Error::Argument(msg)) => assert!(msg.contains("100")),
            other => panic!("{other:?}"),
        }
        assert!(evolve(&s, &f, 1.0, 100).is_ok());
    }

    #[test]
    fn indicator_respects_max_principle_and_mass() {
        for preset in [Preset::Gaussian, Preset::DoubleWell { b: 1.0 }, Preset::FlatCircle { length: 2.0 * PI }] {
            let s = space(preset, 2001);
            let cut = cheeger_constant(&s).optimal_cuts;
            let chi = cut.indicator(&s);
            let flows = HeatFlow::new(&s).snapshots(&chi, &default_t_grid()).unwrap();
            let (mass, range) = flow_invariants(&s, &flows);
            assert!(mass.pass, "{preset}: {mass:?}");
            assert!(range.pass, "{preset}: {range:?}");
        }
    }

    #[test]
    fn snapshots_match_single_evolutions() {
        let s = space(Preset::ConvexPerturbed { a: 0.5 }, 401);
        let f = GridFunction::from_fn(&s, |x| (x / 2.0).tanh());
        let flow = HeatFlow::new(&s);
        let snaps = flow.snapshots(&f, &[0.3, 1.0]).unwrap();
        let single = evolve(&s, &f, 1.0, 200).unwrap();
        let diff: Vec<f64> = snaps[1].final_state.values.iter().zip(&single.final_state.values).map(|(a, b)| a - b).collect();
        assert!(s.norm_l2(&diff) < 1e-4, "{}", s.norm_l2(&diff));
    }

    #[test]
    fn semigroup_and_self_adjointness() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for preset in [Preset::Gaussian, Preset::DoubleWell { b: 1.0 }, Preset::FlatCircle { length: 2.0 * PI }] {
            let s = space(preset, 801);
            let f = GridFunction { values: (0..s.n()).map(|_| rng.gen_range(-1.0..1.0)).collect() };
            let g = GridFunction { values: (0..s.n()).map(|_| rng.gen_range(-1.0..1.0)).collect() };
            let semi = check_semigroup(&s, &f, 0.3, 0.7).unwrap();
            assert!(semi.pass, "{preset}: {semi:?}");
            let adj = check_self_adjoint(&s, &f, &g, 0.5).unwrap();
            assert!(adj.pass, "{preset}: {adj:?}");
        }
    }

    #[test]
    fn l2_decay_equality_and_strictness() {
        let s = gaussian();
        let t = default_t_grid();
        let linear = verify_l2_decay(&s, &GridFunction::from_fn(&s, |x| x), &t).unwrap();
        assert!(linear.pass && linear.worst_slack.abs() < 1e-4, "{linear:?}");
        let cubic = GridFunction::from_fn(&s, |x| x * x * x);
        let norm = s.norm_l2(&s.project_mean_zero(&cubic).values);
        let times = [0.0, 0.5, 1.0];
        let flows = HeatFlow::new(&s).snapshots(&s.project_mean_zero(&cubic), &times).unwrap();
        let l1 = lambda1(&s).unwrap().eigenvalue;
        for r in flows.iter().skip(1) {
            let slack = (-l1 * r.t).exp() * norm - s.norm_l2(&r.final_state.values);
            assert!(slack > 1e-3, "t={}: {slack}", r.t);
        }
        let at_zero = verify_l2_decay(&s, &cubic, &[0.0]).unwrap();
        assert_eq!(at_zero.worst_slack, 0.0);
    }

    #[test]
    fn bgl_cases() {
        let s = gaussian();
        let half = verify_bgl(&s, &GridFunction::constant(&s, 0.5), &[0.1, 1.0]).unwrap();
        assert!(half.pass && half.worst_slack >= 0.0);
        let phi = GridFunction::from_fn(&s, normal_cdf);
        let r = verify_bgl(&s, &phi, &[0.1, 1.0]).unwrap();
        assert!(r.pass, "{r:?}");
        let bad = GridFunction::from_fn(&s, |x| x);
        assert!(matches!(verify_bgl(&s, &bad, &[0.1]), Err(Error::Argument(_))));
    }

    #[test]
    fn bgl_ramp_refines() {
        let ramp = |x: f64| ((x - 0.25 * PI) / (0.5 * PI)).clamp(0.0, 1.0);
        let coarse = space(Preset::FlatInterval { length: PI }, 201);
        let fine = space(Preset::FlatInterval { length: PI }, 402);
        let a = verify_bgl(&coarse, &GridFunction::from_fn(&coarse, ramp), &[0.5]).unwrap();
        let b = verify_bgl(&fine, &GridFunction::from_fn(&fine, ramp), &[0.5]).unwrap();
        assert!(a.pass && b.pass, "{a:?} {b:?}");
        assert!(refinement_record(&a, &b).pass);
    }

    #[test]
    fn linf_gradient_cases() {
        let s = gaussian();
        let ramp = GridFunction::from_fn(&s, |x| (x / 0.5).clamp(-1.0, 1.0));
        assert!(verify_linf_gradient(&s, &ramp, &[0.5]).unwrap().pass);
        let flat = verify_linf_gradient(&s, &GridFunction::constant(&s, 2.0), &[0.5]).unwrap();
        assert!(flat.pass && flat.worst_slack > 0.0);
        assert!(linf_constant_comparison(1.0, &[1.0]).unwrap().pass);
        assert!(linf_constant_comparison(0.0, &[1.0]).is_err());
    }

    #[test]
    fn l1_smoothing_cases() {
        let s = gaussian();
        let flat = verify_l1_smoothing(&s, &GridFunction::constant(&s, 1.0), &[0.5]).unwrap();
        assert_eq!(flat.worst_slack, 0.0);
        let ramp = GridFunction::from_fn(&s, |x| x.clamp(-1.0, 1.0));
        let r = verify_l1_smoothing(&s, &ramp, &log_grid(1e-2, 10.0, 12)).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn perimeter_chain_cases() {
        let s = gaussian();
        let cut = CutFamily::half_line(0.0, true);
        let (chain, identity) = verify_perimeter_chain(&s, &cut, &[0.1, 1.0, 10.0]).unwrap();
        assert!(chain.pass && chain.worst_slack > 0.0, "{chain:?}");
        assert!(identity.pass, "{identity:?}");
        let c = space(Preset::FlatCircle { length: 2.0 * PI }, 512);
        let arc = CutFamily::interval(0.0, PI);
        let (chain, identity) = verify_perimeter_chain(&c, &arc, &[0.1, 1.0, 100.0]).unwrap();
        assert!(chain.pass && identity.pass, "{chain:?} {identity:?}");
        let big = CutFamily::half_line(1.0, true);
        assert!(matches!(verify_perimeter_chain(&s, &big, &[1.0]), Err(Error::Argument(_))));
    }

    #[test]
    fn savare_cases() {
        let s = gaussian();
        let lin = verify_savare(&s, &GridFunction::from_fn(&s, |x| x), &[1.0]).unwrap();
        assert!(lin.pass && lin.worst_slack.abs() < 1e-4, "{lin:?}");
        let flat = verify_savare(&s, &GridFunction::constant(&s, 1.0), &[1.0]).unwrap();
        assert_eq!(flat.worst_slack, 0.0);
        let dw = space(Preset::DoubleWell { b: 1.0 }, 2001);
        let smooth = GridFunction::from_fn(&dw, |x| x.sin() + 0.3 * (1.7 * x).cos());
        let r = verify_savare(&dw, &smooth, &log_grid(1e-2, 10.0, 8)).unwrap();
        assert!(r.pass, "{r:?}");
    }
}
