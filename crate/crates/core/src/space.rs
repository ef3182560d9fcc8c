//! Discretized one-dimensional weighted spaces `(I, |x - y|, e^{-V} dx)`.
//!
//! Lines use a cell-centred grid: `N` cells of width `Δx` tile the domain and
//! node `i` sits at the centre of cell `i`. Circles use `x_i = iΔx` with
//! `Δx = L/N`. The density is taken piecewise linear between nodes and
//! constant on the two outer half-cells of a line, so its exact integral is
//! `Σ w_i Δx`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bounds::MeasureRegime;
use crate::error::{Error, Result};
use crate::Real;

/// Global shape of the domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    IntervalNeumann,
    Circle,
    TruncatedLine,
}

/// Boundary closure of the discrete generator.
///
/// Finite-measure lines are reflecting. The infinite-measure preset is
/// closed with an absorbing wall: its bottom eigenvalue is an infimum over
/// bounded-support functions, which vanish at a far enough truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Closure {
    Neumann,
    Periodic,
    Dirichlet,
}

/// The model spaces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preset<T> {
    /// `V = x²/2`, curvature 1.
    Gaussian,
    /// `V = 0` on `[0, L]`.
    FlatInterval { length: T },
    /// `V = 0` on the circle of length `L`.
    FlatCircle { length: T },
    /// `V = x²/2 + a cos x`, `0 ≤ a < 1`, curvature `1 - a`.
    ConvexPerturbed { a: T },
    /// `V = x⁴/4 - b x²/2`, `b > 0`, curvature `-b`.
    DoubleWell { b: T },
    /// `V = -x²/2` with density `e^{x²/2}/√(2π)`; infinite total mass, curvature -1.
    InvertedGaussian,
}

pub const PRESET_NAMES: [&str; 6] = [
    "gaussian",
    "flat_interval",
    "flat_circle",
    "convex_perturbed",
    "double_well",
    "inverted_gaussian",
];

impl<T: Real> Preset<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Preset::Gaussian => "gaussian",
            Preset::FlatInterval { .. } => "flat_interval",
            Preset::FlatCircle { .. } => "flat_circle",
            Preset::ConvexPerturbed { .. } => "convex_perturbed",
            Preset::DoubleWell { .. } => "double_well",
            Preset::InvertedGaussian => "inverted_gaussian",
        }
    }

    /// Builds a preset from its name and `key=value` parameters.
    ///
    /// Defaults: `L = π` (interval), `L = 2π` (circle), `a = 0.5`, `b = 1`.
    pub fn from_name(name: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let take = |key: &str, default: f64, allowed: &[&str]| -> Result<T> {
            if let Some(bad) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
                return Err(Error::Argument(format!("preset {name} has no parameter '{bad}'")));
            }
            Ok(T::lit(params.get(key).copied().unwrap_or(default)))
        };
        let preset = match name {
            "gaussian" => {
                take("", 0.0, &[])?;
                Preset::Gaussian
            }
            "flat_interval" => Preset::FlatInterval {
                length: take("L", std::f64::consts::PI, &["L"])?,
            },
            "flat_circle" => Preset::FlatCircle {
                length: take("L", std::f64::consts::TAU, &["L"])?,
            },
            "convex_perturbed" => Preset::ConvexPerturbed { a: take("a", 0.5, &["a"])? },
            "double_well" => Preset::DoubleWell { b: take("b", 1.0, &["b"])? },
            "inverted_gaussian" => {
                take("", 0.0, &[])?;
                Preset::InvertedGaussian
            }
            other => {
                return Err(Error::Argument(format!(
                    "unknown space '{other}' (expected one of {})",
                    PRESET_NAMES.join(", ")
                )))
            }
        };
        Ok(preset)
    }

    pub fn topology(&self) -> Topology {
        match self {
            Preset::FlatInterval { .. } => Topology::IntervalNeumann,
            Preset::FlatCircle { .. } => Topology::Circle,
            _ => Topology::TruncatedLine,
        }
    }

    /// Lower bound of `V''`.
    pub fn curvature(&self) -> T {
        match *self {
            Preset::Gaussian => T::one(),
            Preset::FlatInterval { .. } | Preset::FlatCircle { .. } => T::zero(),
            Preset::ConvexPerturbed { a } => T::one() - a,
            Preset::DoubleWell { b } => -b,
            Preset::InvertedGaussian => -T::one(),
        }
    }

    pub fn potential(&self, x: T) -> T {
        let half = T::lit(0.5);
        match *self {
            Preset::Gaussian => half * x * x,
            Preset::FlatInterval { .. } | Preset::FlatCircle { .. } => T::zero(),
            Preset::ConvexPerturbed { a } => half * x * x + a * x.cos(),
            Preset::DoubleWell { b } => x.powi(4) / T::lit(4.0) - b * x * x * half,
            Preset::InvertedGaussian => -half * x * x,
        }
    }

    pub fn finite_measure(&self) -> bool {
        !matches!(self, Preset::InvertedGaussian)
    }

    /// Truncation radius used when none is given.
    pub fn default_radius(&self) -> T {
        match self {
            // e^{-V} underflows double precision near |x| = 7.7
            Preset::DoubleWell { .. } => T::lit(6.0),
            _ => T::lit(8.0),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Preset::FlatInterval { length } | Preset::FlatCircle { length } => {
                if !(length > T::zero() && length.is_finite()) {
                    return Err(Error::Argument(format!("length L must be positive, got {length}")));
                }
            }
            Preset::ConvexPerturbed { a } => {
                if !(a >= T::zero() && a < T::one()) {
                    return Err(Error::Argument(format!("convex_perturbed needs 0 <= a < 1, got {a}")));
                }
            }
            Preset::DoubleWell { b } => {
                if !(b > T::zero() && b.is_finite()) {
                    return Err(Error::Argument(format!("double_well needs b > 0, got {b}")));
                }
            }
            Preset::Gaussian | Preset::InvertedGaussian => {}
        }
        Ok(())
    }
}

impl<T: Real> fmt::Display for Preset<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Preset::FlatInterval { length } | Preset::FlatCircle { length } => write!(f, "{}(L={length})", self.name()),
            Preset::ConvexPerturbed { a } => write!(f, "{}(a={a})", self.name()),
            Preset::DoubleWell { b } => write!(f, "{}(b={b})", self.name()),
            _ => f.write_str(self.name()),
        }
    }
}

/// Preset plus discretization parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceSpec<T> {
    pub preset: Preset<T>,
    pub n: usize,
    /// Truncation radius for line presets; `None` picks [`Preset::default_radius`].
    pub radius: Option<T>,
}

impl<T: Real> SpaceSpec<T> {
    pub fn new(preset: Preset<T>, n: usize) -> Self {
        SpaceSpec { preset, n, radius: None }
    }

    pub fn with_radius(mut self, radius: T) -> Self {
        self.radius = Some(radius);
        self
    }

    /// The same space with `n` replaced.
    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }
}

/// A weighted grid on a line segment or circle.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedLine<T> {
    preset: Preset<T>,
    topology: Topology,
    closure: Closure,
    left: T,
    right: T,
    dx: T,
    nodes: Vec<T>,
    potential: Vec<T>,
    density: Vec<T>,
    /// `prefix[i]` = mass of `{x ≤ x_i}`.
    prefix: Vec<T>,
    /// `suffix[i]` = mass of `{x ≥ x_i}` on a line; kept separately so far
    /// right tails do not cancel against the total.
    suffix: Vec<T>,
    /// `w(x) = exp(log_norm - V(x))`.
    log_norm: T,
    total: T,
    finite: bool,
    curvature: T,
    radius: Option<T>,
}

/// Values of a function at the nodes of a [`WeightedLine`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction<T> {
    pub values: Vec<T>,
}

impl<T: Real> GridFunction<T> {
    pub fn new(space: &WeightedLine<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != space.n() {
            return Err(Error::Argument(format!(
                "grid function has {} values, space has {} nodes",
                values.len(),
                space.n()
            )));
        }
        Ok(GridFunction { values })
    }

    pub fn from_fn(space: &WeightedLine<T>, f: impl Fn(T) -> T) -> Self {
        GridFunction {
            values: space.nodes.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn constant(space: &WeightedLine<T>, c: T) -> Self {
        GridFunction { values: vec![c; space.n()] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        GridFunction {
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
}

/// Builds the discretized space.
pub fn build_space<T: Real>(spec: &SpaceSpec<T>) -> Result<WeightedLine<T>> {
    let preset = spec.preset;
    preset.validate()?;
    let n = spec.n;
    if n < 16 {
        return Err(Error::Argument(format!("need at least 16 nodes, got {n}")));
    }
    let topology = preset.topology();
    let (left, right, radius) = match (preset, topology) {
        (Preset::FlatInterval { length }, _) => (T::zero(), length, None),
        (Preset::FlatCircle { length }, _) => (T::zero(), length, None),
        _ => {
            let r = spec.radius.unwrap_or_else(|| preset.default_radius());
            if !(r >= T::lit(4.0) && r.is_finite()) {
                return Err(Error::Argument(format!("truncation radius must be at least 4, got {r}")));
            }
            (-r, r, Some(r))
        }
    };
    let nf = T::lit(n as f64);
    let dx = (right - left) / nf;
    let nodes: Vec<T> = match topology {
        Topology::Circle => (0..n).map(|i| left + dx * T::lit(i as f64)).collect(),
        _ => (0..n).map(|i| left + dx * (T::lit(i as f64) + T::lit(0.5))).collect(),
    };
    let potential: Vec<T> = nodes.iter().map(|&x| preset.potential(x)).collect();
    let finite = preset.finite_measure();
    let log_norm = if finite {
        let vmin = potential.iter().copied().fold(T::infinity(), T::min);
        let z: T = potential.iter().map(|&v| (vmin - v).exp()).sum::<T>() * dx;
        vmin - z.ln()
    } else {
        -T::TAU().sqrt().ln()
    };
    let density: Vec<T> = potential.iter().map(|&v| (log_norm - v).exp()).collect();
    if let Some(i) = density.iter().position(|&w| !(w >= T::min_positive_value() && w.is_finite())) {
        return Err(Error::Argument(format!(
            "density {} at x = {} is not a positive normal number; reduce the truncation radius",
            density[i], nodes[i]
        )));
    }
    let closure = match (topology, finite) {
        (Topology::Circle, _) => Closure::Periodic,
        (_, true) => Closure::Neumann,
        (_, false) => Closure::Dirichlet,
    };
    let half = T::lit(0.5);
    let mut prefix = Vec::with_capacity(n);
    let mut acc = match topology {
        Topology::Circle => T::zero(),
        _ => density[0] * dx * half,
    };
    prefix.push(acc);
    for i in 1..n {
        acc = acc + (density[i - 1] + density[i]) * dx * half;
        prefix.push(acc);
    }
    let mut suffix = vec![T::zero(); n];
    if topology != Topology::Circle {
        let mut acc = density[n - 1] * dx * half;
        suffix[n - 1] = acc;
        for i in (0..n - 1).rev() {
            acc = acc + (density[i] + density[i + 1]) * dx * half;
            suffix[i] = acc;
        }
    }
    let total: T = density.iter().copied().sum::<T>() * dx;
    let space = WeightedLine {
        preset,
        topology,
        closure,
        left,
        right,
        dx,
        nodes,
        potential,
        density,
        prefix,
        suffix,
        log_norm,
        total,
        finite,
        curvature: preset.curvature(),
        radius,
    };
    space.check_curvature()?;
    Ok(space)
}

impl<T: Real> WeightedLine<T> {
    pub fn preset(&self) -> Preset<T> {
        self.preset
    }

    pub fn name(&self) -> &'static str {
        self.preset.name()
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn closure(&self) -> Closure {
        self.closure
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn dx(&self) -> T {
        self.dx
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn potential(&self) -> &[T] {
        &self.potential
    }

    pub fn density(&self) -> &[T] {
        &self.density
    }

    /// Domain `[left, right]` (for a circle, one period starting at node 0).
    pub fn domain(&self) -> (T, T) {
        (self.left, self.right)
    }

    /// Bakry–Émery curvature lower bound of the preset.
    pub fn curvature(&self) -> T {
        self.curvature
    }

    pub fn radius(&self) -> Option<T> {
        self.radius
    }

    pub fn is_finite_measure(&self) -> bool {
        self.finite
    }

    pub fn regime(&self) -> MeasureRegime {
        if self.finite {
            MeasureRegime::FiniteNormalized
        } else {
            MeasureRegime::Infinite
        }
    }

    /// `Σ w_i Δx`; equals 1 for normalized presets.
    pub fn total_mass(&self) -> T {
        self.total
    }

    pub fn is_normalized(&self) -> bool {
        self.finite && (self.total - T::one()).abs() <= T::lit(1e-12)
    }

    /// The same grid with the density multiplied by `factor > 0`.
    pub fn with_scaled_density(&self, factor: T) -> Result<Self> {
        if !(factor > T::zero() && factor.is_finite()) {
            return Err(Error::Argument(format!("density scale must be positive, got {factor}")));
        }
        let mut out = self.clone();
        out.density.iter_mut().for_each(|w| *w = *w * factor);
        out.prefix.iter_mut().for_each(|p| *p = *p * factor);
        out.suffix.iter_mut().for_each(|p| *p = *p * factor);
        out.total = out.total * factor;
        out.log_norm = out.log_norm + factor.ln();
        Ok(out)
    }

    fn check_curvature(&self) -> Result<()> {
        let n = self.n();
        let h2 = self.dx * self.dx;
        let v = &self.potential;
        let second = |i: usize, lo: usize, hi: usize| (v[lo] - T::lit(2.0) * v[i] + v[hi]) / h2;
        let interior = (1..n - 1).map(|i| second(i, i - 1, i + 1));
        let min = match self.topology {
            Topology::Circle => interior
                .chain([second(0, n - 1, 1), second(n - 1, n - 2, 0)])
                .fold(T::infinity(), T::min),
            _ => interior.fold(T::infinity(), T::min),
        };
        if min < self.curvature - T::lit(1e-6) {
            return Err(Error::Argument(format!(
                "curvature bound {} exceeds the discrete minimum of V'' ({min})",
                self.curvature
            )));
        }
        Ok(())
    }

    /// Segment `[x_i, x_{i+1}]` containing `s` and the fraction along it.
    fn segment(&self, s: T) -> (usize, T) {
        let n = self.n();
        let start = self.nodes[0];
        let pos = (s - start) / self.dx;
        let last = match self.topology {
            Topology::Circle => n - 1,
            _ => n - 2,
        };
        let i = pos.floor().to_usize().unwrap_or(0).min(last);
        (i, pos - T::lit(i as f64))
    }

    fn node_density(&self, i: usize) -> T {
        self.density[i % self.n()]
    }

    /// Density of the normalized weight at a position, `e^{-V(s)}` times
    /// the grid normalization; positions outside a line are clamped to it.
    pub fn density_at(&self, s: T) -> T {
        let s = match self.topology {
            Topology::Circle => self.wrap(s),
            _ => s.max(self.left).min(self.right),
        };
        (self.log_norm - self.preset.potential(s)).exp()
    }

    /// Reduces a circle position to `[left, right)`.
    pub fn wrap(&self, s: T) -> T {
        let len = self.right - self.left;
        let r = (s - self.left) % len;
        let r = if r < T::zero() { r + len } else { r };
        self.left + r
    }

    /// Mass of `{x ≤ s}` (for a circle, of the arc from node 0 to `s`).
    pub fn measure_of_sublevel(&self, s: T) -> T {
        let n = self.n();
        let s = s.max(self.left).min(self.right);
        let half = T::lit(0.5);
        match self.topology {
            Topology::Circle => {
                if s >= self.right {
                    return self.total;
                }
                let (i, theta) = self.segment(s);
                let (a, b) = (self.density[i], self.node_density(i + 1));
                self.prefix[i] + self.dx * theta * (a + (b - a) * theta * half)
            }
            _ => {
                if s <= self.nodes[0] {
                    self.density[0] * (s - self.left)
                } else if s >= self.nodes[n - 1] {
                    self.prefix[n - 1] + self.density[n - 1] * (s - self.nodes[n - 1])
                } else {
                    let (i, theta) = self.segment(s);
                    let (a, b) = (self.density[i], self.density[i + 1]);
                    self.prefix[i] + self.dx * theta * (a + (b - a) * theta * half)
                }
            }
        }
    }

    /// Mass of `{x ≥ s}`; on a circle, the complement of the arc from node 0 to `s`.
    pub fn measure_of_superlevel(&self, s: T) -> T {
        if self.topology == Topology::Circle {
            return (self.total - self.measure_of_sublevel(s)).max(T::zero());
        }
        let n = self.n();
        let s = s.max(self.left).min(self.right);
        if s <= self.nodes[0] {
            self.suffix[0] + self.density[0] * (self.nodes[0] - s)
        } else if s >= self.nodes[n - 1] {
            self.density[n - 1] * (self.right - s)
        } else {
            let (i, theta) = self.segment(s);
            let (a, b) = (self.density[i], self.density[i + 1]);
            let rest = T::one() - theta;
            self.suffix[i + 1] + self.dx * (a * rest + (b - a) * (T::one() - theta * theta) * T::lit(0.5))
        }
    }

    /// Mass between two positions; on a circle, of the arc running from `a` forward to `b`.
    pub fn mass_between(&self, a: T, b: T) -> T {
        match self.topology {
            Topology::Circle => {
                let (ma, mb) = (self.measure_of_sublevel(self.wrap(a)), self.measure_of_sublevel(self.wrap(b)));
                if mb >= ma {
                    mb - ma
                } else {
                    self.total - ma + mb
                }
            }
            _ => {
                let (below_a, below_b) = (self.measure_of_sublevel(a), self.measure_of_sublevel(b));
                let (above_a, above_b) = (self.measure_of_superlevel(a), self.measure_of_superlevel(b));
                // subtract whichever pair is smaller to avoid cancellation in a tail
                let m = if below_b <= above_a { below_b - below_a } else { above_a - above_b };
                m.max(T::zero())
            }
        }
    }

    /// `Σ f_i w_i Δx`.
    pub fn integrate(&self, f: &[T]) -> T {
        f.iter().zip(&self.density).map(|(&v, &w)| v * w).sum::<T>() * self.dx
    }

    /// Weighted inner product `Σ f_i g_i w_i Δx`.
    pub fn inner(&self, f: &[T], g: &[T]) -> T {
        f.iter()
            .zip(g)
            .zip(&self.density)
            .map(|((&a, &b), &w)| a * b * w)
            .sum::<T>()
            * self.dx
    }

    pub fn norm_l2(&self, f: &[T]) -> T {
        self.inner(f, f).sqrt()
    }

    pub fn norm_l1(&self, f: &[T]) -> T {
        f.iter().zip(&self.density).map(|(&v, &w)| v.abs() * w).sum::<T>() * self.dx
    }

    /// Weighted mean `Σ f w Δx / Σ w Δx`.
    pub fn mean(&self, f: &[T]) -> T {
        self.integrate(f) / self.total
    }

    /// `f` minus its weighted mean.
    pub fn project_mean_zero(&self, f: &GridFunction<T>) -> GridFunction<T> {
        let m = self.mean(&f.values);
        f.map(|v| v - m)
    }
}

/// Discrete slope `|∇f|`: central differences inside, one-sided at the ends
/// of an interval, periodic on a circle.
pub fn slope<T: Real>(space: &WeightedLine<T>, f: &GridFunction<T>) -> GridFunction<T> {
    let n = space.n();
    let v = &f.values;
    let dx = space.dx();
    let two_dx = dx * T::lit(2.0);
    let values = (0..n)
        .map(|i| {
            let d = if i > 0 && i + 1 < n {
                (v[i + 1] - v[i - 1]) / two_dx
            } else if space.topology() == Topology::Circle {
                let (prev, next) = if i == 0 { (n - 1, 1) } else { (n - 2, 0) };
                (v[next] - v[prev]) / two_dx
            } else if i == 0 {
                (v[1] - v[0]) / dx
            } else {
                (v[n - 1] - v[n - 2]) / dx
            };
            d.abs()
        })
        .collect();
    GridFunction { values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::normal_cdf;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn space(preset: Preset<f64>, n: usize) -> WeightedLine<f64> {
        build_space(&SpaceSpec::new(preset, n)).unwrap()
    }

    #[test]
    fn gaussian_mass_and_tail() {
        let s = build_space(&SpaceSpec::new(Preset::<f64>::Gaussian, 4001).with_radius(8.0)).unwrap();
        assert!((s.total_mass() - 1.0).abs() < 1e-10);
        assert!(s.is_normalized());
        // mass of the continuum Gaussian outside [-8, 8]
        assert!(2.0 * normal_cdf(-8.0f64) < 1e-14);
        assert!((s.measure_of_sublevel(0.0) - 0.5).abs() < 1e-6);
        assert_eq!(s.nodes()[2000], 0.0);
    }

    #[test]
    fn flat_spaces() {
        let c = space(Preset::FlatCircle { length: 2.0 * PI }, 256);
        assert!((c.total_mass() - 1.0).abs() < 1e-12);
        assert!(c.density().iter().all(|&w| (w - 1.0 / (2.0 * PI)).abs() < 1e-14));
        assert_eq!(c.closure(), Closure::Periodic);

        let l = 3.0;
        let i = space(Preset::FlatInterval { length: l }, 100);
        assert!((i.measure_of_sublevel(l / 4.0) - 0.25).abs() < 1e-10);
        assert!((i.measure_of_sublevel(l) - 1.0).abs() < 1e-12);
        assert_eq!(i.measure_of_sublevel(0.0), 0.0);
    }

    #[test]
    fn double_well_curvature() {
        let s = build_space(&SpaceSpec::new(Preset::DoubleWell { b: 1.0 }, 2001).with_radius(6.0)).unwrap();
        assert_eq!(s.curvature(), -1.0);
        assert_eq!(s.regime(), MeasureRegime::FiniteNormalized);
        // R = 8 underflows the density
        assert!(build_space(&SpaceSpec::new(Preset::DoubleWell { b: 1.0 }, 2001).with_radius(8.0)).is_err());
    }

    #[test]
    fn inverted_gaussian_is_infinite() {
        let s = space(Preset::InvertedGaussian, 801);
        assert!(!s.is_finite_measure());
        assert!(!s.is_normalized());
        assert_eq!(s.closure(), Closure::Dirichlet);
        assert_eq!(s.regime(), MeasureRegime::Infinite);
        assert_relative_eq!(s.density()[400], 1.0 / (2.0 * PI).sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn rejects_invalid_specs() {
        assert!(build_space(&SpaceSpec::new(Preset::<f64>::Gaussian, 15)).is_err());
        assert!(build_space(&SpaceSpec::new(Preset::<f64>::Gaussian, 100).with_radius(3.0)).is_err());
        assert!(build_space(&SpaceSpec::new(Preset::ConvexPerturbed { a: 1.0 }, 100)).is_err());
        assert!(build_space(&SpaceSpec::new(Preset::ConvexPerturbed { a: -0.1 }, 100)).is_err());
        assert!(build_space(&SpaceSpec::new(Preset::DoubleWell { b: 0.0 }, 100)).is_err());
        assert!(build_space(&SpaceSpec::new(Preset::FlatInterval { length: 0.0 }, 100)).is_err());
    }

    #[test]
    fn preset_names_round_trip() {
        let mut params = BTreeMap::new();
        for name in PRESET_NAMES {
            let p = Preset::<f64>::from_name(name, &params).unwrap();
            assert_eq!(p.name(), name);
        }
        params.insert("b".to_string(), 2.0);
        assert_eq!(Preset::<f64>::from_name("double_well", &params).unwrap(), Preset::DoubleWell { b: 2.0 });
        assert!(Preset::<f64>::from_name("gaussian", &params).is_err());
        assert!(Preset::<f64>::from_name("sphere", &BTreeMap::new()).is_err());
    }

    #[test]
    fn sublevel_measure_second_order() {
        let exact = normal_cdf(0.3f64);
        let err = |n: usize| {
            let s = build_space(&SpaceSpec::new(Preset::<f64>::Gaussian, n).with_radius(8.0)).unwrap();
            (s.measure_of_sublevel(0.3) - exact).abs()
        };
        let (e1, e2) = (err(401), err(801));
        let ratio = e1 / e2;
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio} ({e1}, {e2})");
    }

    #[test]
    fn superlevel_measure_resolves_far_tails() {
        let s = space(Preset::DoubleWell { b: 1.0 }, 2001);
        for x in [-3.0, -0.4, 0.0, 1.7, 4.0] {
            let sum = s.measure_of_sublevel(x) + s.measure_of_superlevel(x);
            assert!((sum - s.total_mass()).abs() < 1e-13, "{x}: {sum}");
        }
        // the tail past x = 5.5 has mass near e^{-214}
        let tail = s.measure_of_superlevel(5.5);
        assert!(tail > 1e-100 && tail < 1e-90, "{tail}");
        let piece = s.mass_between(5.5, 5.8);
        assert!(piece <= tail && piece > 0.99 * tail);
        let g = space(Preset::Gaussian, 4001);
        let exact = normal_cdf(-6.0f64);
        assert!((g.measure_of_superlevel(6.0) / exact - 1.0).abs() < 1e-3);
    }

    #[test]
    fn slope_examples() {
        let s = space(Preset::FlatInterval { length: 2.0 }, 64);
        let c = GridFunction::constant(&s, 3.0);
        assert!(slope(&s, &c).values.iter().all(|&v| v == 0.0));
        let lin = GridFunction::from_fn(&s, |x| x);
        assert!(slope(&s, &lin).values.iter().all(|&v| (v - 1.0).abs() < 1e-12));

        // central differences are exact on x², so add a cubic to see the O(Δx²) error at x = 1
        let err = |n: usize| {
            let g = space(Preset::FlatInterval { length: 2.0 }, n);
            let f = GridFunction::from_fn(&g, |x| x * x + x.powi(3));
            let d = slope(&g, &f);
            let i = (n - 1) / 2;
            assert!((g.nodes()[i] - 1.0).abs() < 1e-12);
            (d.values[i] - 5.0).abs()
        };
        let (e1, e2) = (err(101), err(201));
        assert!((e1 / e2 - (201.0f64 / 101.0).powi(2)).abs() < 0.05, "{e1} {e2}");
    }

    #[test]
    fn circle_slope_wraps() {
        let s = space(Preset::FlatCircle { length: 2.0 * PI }, 512);
        let f = GridFunction::from_fn(&s, |x| x.sin());
        let d = slope(&s, &f);
        for (i, &x) in s.nodes().iter().enumerate() {
            assert!((d.values[i] - x.cos().abs()).abs() < 1e-3);
        }
    }

    #[test]
    fn density_at_points_and_scaling() {
        let s = space(Preset::Gaussian, 801);
        let x = s.nodes()[123];
        assert_relative_eq!(s.density_at(x), s.density()[123], max_relative = 1e-12);
        let peak = 1.0 / (2.0 * PI).sqrt();
        assert_relative_eq!(s.density_at(0.0), peak, max_relative = 1e-12);
        assert_relative_eq!(s.density_at(-20.0), s.density_at(-8.0), max_relative = 1e-15);
        let scaled = s.with_scaled_density(3.0).unwrap();
        assert_relative_eq!(scaled.total_mass(), 3.0 * s.total_mass(), max_relative = 1e-15);
        assert_relative_eq!(scaled.measure_of_sublevel(0.7), 3.0 * s.measure_of_sublevel(0.7), max_relative = 1e-14);
        assert_relative_eq!(scaled.density_at(0.3), 3.0 * s.density_at(0.3), max_relative = 1e-14);
    }

    proptest! {
        #[test]
        fn sublevel_monotone(a in -8.0f64..8.0, b in -8.0f64..8.0) {
            let s = space(Preset::DoubleWell { b: 1.0 }, 201);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(s.measure_of_sublevel(lo) <= s.measure_of_sublevel(hi));
            prop_assert!((s.mass_between(lo, hi) - (s.measure_of_sublevel(hi) - s.measure_of_sublevel(lo))).abs() < 1e-15);
        }

        #[test]
        fn circle_arcs_partition(a in 0.0f64..std::f64::consts::TAU, b in 0.0f64..std::f64::consts::TAU) {
            let s = space(Preset::FlatCircle { length: 2.0 * PI }, 64);
            let expected = if a == b { 0.0 } else { 1.0 };
            prop_assert!((s.mass_between(a, b) + s.mass_between(b, a) - expected).abs() < 1e-12);
        }
    }
}
