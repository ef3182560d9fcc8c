//! The weighted Laplacian `Δf = f'' - V'f'` and its bottom eigenvalues.
//!
//! Finite-volume form `(Δf)_i = [w_{i+½}(f_{i+1} - f_i) - w_{i-½}(f_i - f_{i-1})] / (w_i Δx²)`
//! with face weights `w_{i+½} = √(w_i w_{i+1})`. Conjugating by `W^{1/2}`
//! gives a symmetric matrix whose off-diagonal entries are exactly `1/Δx²`.

use crate::error::{Error, Result};
use crate::linalg::BandSolver;
use crate::space::{Closure, GridFunction, WeightedLine};
use crate::Real;

/// Tridiagonal (plus periodic corners) matrix.
///
/// `upper[i]` couples row `i` to `f_{i+1}`, `lower[i]` couples row `i+1` to
/// `f_i`; `corners = (M[0][n-1], M[n-1][0])` on a circle. `row_sum` holds the
/// exact row sums: zero for the reflecting and periodic generator, `-2/Δx²`
/// in the end rows of an absorbing one.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalOperator<T> {
    pub lower: Vec<T>,
    pub diagonal: Vec<T>,
    pub upper: Vec<T>,
    pub corners: Option<(T, T)>,
    pub row_sum: Vec<T>,
    pub symmetrized: bool,
}

impl<T: Real> TridiagonalOperator<T> {
    pub fn n(&self) -> usize {
        self.diagonal.len()
    }

    /// The off-diagonal of a symmetrized operator.
    pub fn off_diagonal(&self) -> &[T] {
        &self.upper
    }

    /// `M f`, evaluated as `Σ_j M_ij (f_j - f_i) + row_sum_i f_i` so that the
    /// generator maps constants to exactly zero.
    pub fn apply(&self, f: &[T]) -> Vec<T> {
        let n = self.n();
        assert_eq!(f.len(), n);
        let mut out: Vec<T> = (0..n).map(|i| self.row_sum[i] * f[i]).collect();
        for i in 0..n - 1 {
            let d = f[i + 1] - f[i];
            out[i] = out[i] + self.upper[i] * d;
            out[i + 1] = out[i + 1] - self.lower[i] * d;
        }
        if let Some((tr, bl)) = self.corners {
            let d = f[n - 1] - f[0];
            out[0] = out[0] + tr * d;
            out[n - 1] = out[n - 1] - bl * d;
        }
        out
    }

    /// Factors `α I + β M`.
    pub fn shifted_solver(&self, alpha: T, beta: T) -> BandSolver<T> {
        let lower: Vec<T> = self.lower.iter().map(|&v| beta * v).collect();
        let upper: Vec<T> = self.upper.iter().map(|&v| beta * v).collect();
        let diag: Vec<T> = self.diagonal.iter().map(|&v| alpha + beta * v).collect();
        let corners = self.corners.map(|(a, b)| (beta * a, beta * b));
        BandSolver::new(&lower, &diag, &upper, corners)
    }

    /// `W^{1/2} M W^{-1/2}` for a generator assembled on `space`.
    pub fn symmetrize(&self, space: &WeightedLine<T>) -> Self {
        if self.symmetrized {
            return self.clone();
        }
        let inv = T::one() / (space.dx() * space.dx());
        let n = self.n();
        let diagonal = self.diagonal.clone();
        let off = vec![inv; n - 1];
        let row_sum = (0..n)
            .map(|i| {
                let neighbours = if self.corners.is_some() || (i > 0 && i + 1 < n) { 2.0 } else { 1.0 };
                diagonal[i] + inv * T::lit(neighbours)
            })
            .collect();
        TridiagonalOperator {
            lower: off.clone(),
            diagonal,
            upper: off,
            corners: self.corners.map(|_| (inv, inv)),
            row_sum,
            symmetrized: true,
        }
    }
}

/// Node order `0, 1, n-1, 2, n-2, …` in which neighbours on a cycle of
/// length `n` are at most two positions apart.
fn zigzag(n: usize) -> Vec<usize> {
    let mut order = Vec::with_capacity(n);
    order.push(0);
    let (mut lo, mut hi) = (1, n - 1);
    while lo <= hi {
        order.push(lo);
        if hi != lo {
            order.push(hi);
        }
        lo += 1;
        hi -= 1;
    }
    order
}

/// Assembles the generator in original coordinates.
pub fn assemble<T: Real>(space: &WeightedLine<T>) -> TridiagonalOperator<T> {
    let n = space.n();
    let dx = space.dx();
    let inv = T::one() / (dx * dx);
    let v = space.potential();
    let half = T::lit(0.5);
    let coupling = |from: usize, to: usize| (-(v[to] - v[from]) * half).exp() * inv;
    let upper: Vec<T> = (0..n - 1).map(|i| coupling(i, i + 1)).collect();
    let lower: Vec<T> = (0..n - 1).map(|i| coupling(i + 1, i)).collect();
    let corners = (space.closure() == Closure::Periodic).then(|| (coupling(0, n - 1), coupling(n - 1, 0)));
    let mut diagonal = vec![T::zero(); n];
    for i in 0..n - 1 {
        diagonal[i] = diagonal[i] - upper[i];
        diagonal[i + 1] = diagonal[i + 1] - lower[i];
    }
    if let Some((tr, bl)) = corners {
        diagonal[0] = diagonal[0] - tr;
        diagonal[n - 1] = diagonal[n - 1] - bl;
    }
    let mut row_sum = vec![T::zero(); n];
    if space.closure() == Closure::Dirichlet {
        let wall = T::lit(2.0) * inv;
        for i in [0, n - 1] {
            diagonal[i] = diagonal[i] - wall;
            row_sum[i] = -wall;
        }
    }
    TridiagonalOperator {
        lower,
        diagonal,
        upper,
        corners,
        row_sum,
        symmetrized: false,
    }
}

/// An eigenpair of `-Δ`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult<T> {
    pub eigenvalue: T,
    /// Normalized to unit weighted `L²` norm, largest entry positive.
    pub eigenfunction: GridFunction<T>,
    /// `‖(Δ + λ)u‖ / ‖u‖` in the weighted norm.
    pub residual_norm: T,
    /// Truncation radius of the underlying space (line presets).
    pub radius: Option<T>,
}

/// Symmetric positive semidefinite `A = -W^{1/2} Δ W^{-1/2}` in the form the
/// eigen-solvers use: diagonal, (constant) off-diagonal, optional corner.
struct SymmetricPencil<T> {
    a: Vec<T>,
    b: T,
    periodic: bool,
}

impl<T: Real> SymmetricPencil<T> {
    fn new(space: &WeightedLine<T>) -> Self {
        let op = assemble(space);
        SymmetricPencil {
            a: op.diagonal.iter().map(|&d| -d).collect(),
            b: -T::one() / (space.dx() * space.dx()),
            periodic: op.corners.is_some(),
        }
    }

    /// Number of eigenvalues strictly below `sigma` (Sylvester inertia of `A - σI`).
    fn count_below(&self, sigma: T) -> usize {
        let n = self.a.len();
        let b = self.b;
        let b2 = b * b;
        let tiny = T::min_positive_value().sqrt() * b.abs();
        let guard = |d: T| if d.abs() < tiny { -tiny } else { d };
        if !self.periodic {
            let mut count = 0;
            let mut d = guard(self.a[0] - sigma);
            if d < T::zero() {
                count += 1;
            }
            for i in 1..n {
                d = guard(self.a[i] - sigma - b2 / d);
                if d < T::zero() {
                    count += 1;
                }
            }
            return count;
        }
        // a small pivot wrecks the band elimination below, so nudge the shift;
        // the bisection result is polished by inverse iteration afterwards
        let step = T::epsilon().sqrt() * b.abs();
        let mut shifted = sigma;
        for _ in 0..16 {
            if let Some(count) = self.count_below_periodic(shifted) {
                return count;
            }
            shifted = shifted + step;
        }
        self.count_below_periodic(shifted).unwrap_or(0)
    }

    /// Inertia count for the cycle; `None` when a pivot is too small to trust.
    fn count_below_periodic(&self, sigma: T) -> Option<usize> {
        let n = self.a.len();
        let b = self.b;
        let tiny = T::epsilon().sqrt() * b.abs() / T::lit(4.0);
        // zig-zag ordering 0, 1, n-1, 2, n-2, … turns the cycle into a band of
        // half-width 2, whose LDLᵀ pivots give the inertia
        let order = zigzag(n);
        let adjacent = |p: usize, q: usize| {
            let (x, y) = (order[p], order[q]);
            (x + 1) % n == y || (y + 1) % n == x
        };
        let coupling = |p: usize, q: usize| if adjacent(p, q) { b } else { T::zero() };
        let mut count = 0;
        let mut d = vec![T::zero(); n];
        // l1[i] = L[i][i-1], l2[i] = L[i][i-2]
        let mut l1 = vec![T::zero(); n];
        let mut l2 = vec![T::zero(); n];
        for i in 0..n {
            let mut di = self.a[order[i]] - sigma;
            if i >= 1 {
                di = di - l1[i] * l1[i] * d[i - 1];
            }
            if i >= 2 {
                di = di - l2[i] * l2[i] * d[i - 2];
            }
            if di.abs() < tiny && i + 1 < n {
                return None;
            }
            d[i] = di;
            if di < T::zero() {
                count += 1;
            }
            if i + 1 < n {
                let mut m = coupling(i + 1, i);
                if i >= 1 {
                    m = m - l2[i + 1] * l1[i] * d[i - 1];
                }
                l1[i + 1] = m / d[i];
            }
            if i + 2 < n {
                l2[i + 2] = coupling(i + 2, i) / d[i];
            }
        }
        Some(count)
    }

    fn gershgorin(&self) -> (T, T) {
        let r = self.b.abs() * T::lit(2.0);
        let lo = self.a.iter().fold(T::infinity(), |m, &v| m.min(v - r));
        let hi = self.a.iter().fold(T::neg_infinity(), |m, &v| m.max(v + r));
        (lo, hi)
    }

    /// The `k`-th smallest eigenvalue (0-based) by bisection.
    fn bisect(&self, k: usize) -> T {
        let (mut lo, mut hi) = self.gershgorin();
        let scale = lo.abs().max(hi.abs());
        for _ in 0..400 {
            let mid = (lo + hi) / T::lit(2.0);
            if hi - lo <= T::epsilon() * T::lit(4.0) * scale || mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        (lo + hi) / T::lit(2.0)
    }

    fn apply(&self, y: &[T]) -> Vec<T> {
        let n = y.len();
        (0..n)
            .map(|i| {
                let mut s = self.a[i] * y[i];
                if i > 0 {
                    s = s + self.b * y[i - 1];
                } else if self.periodic {
                    s = s + self.b * y[n - 1];
                }
                if i + 1 < n {
                    s = s + self.b * y[i + 1];
                } else if self.periodic {
                    s = s + self.b * y[0];
                }
                s
            })
            .collect()
    }

    /// Inverse iteration at the shift `sigma`, keeping the iterate orthogonal to `kernel`.
    fn eigenvector(&self, sigma: T, kernel: Option<&[T]>) -> Vec<T> {
        let n = self.a.len();
        let off = vec![self.b; n - 1];
        let diag: Vec<T> = self.a.iter().map(|&a| a - sigma).collect();
        let corners = self.periodic.then_some((self.b, self.b));
        let solver = BandSolver::new(&off, &diag, &off, corners);
        let deflate = |y: &mut Vec<T>| {
            if let Some(q) = kernel {
                let p: T = y.iter().zip(q).map(|(&a, &b)| a * b).sum();
                y.iter_mut().zip(q).for_each(|(a, &b)| *a = *a - p * b);
            }
            let norm = y.iter().map(|&v| v * v).sum::<T>().sqrt();
            y.iter_mut().for_each(|v| *v = *v / norm);
        };
        // deterministic start with components along every mode
        let mut y: Vec<T> = (0..n)
            .map(|i| T::one() + T::lit(((i * 7919 + 13) % 101) as f64 / 101.0))
            .collect();
        deflate(&mut y);
        for _ in 0..6 {
            solver.solve_in_place(&mut y);
            deflate(&mut y);
        }
        y
    }
}

fn eigen_pair<T: Real>(space: &WeightedLine<T>, k: usize, deflate_constants: bool) -> EigenResult<T> {
    let pencil = SymmetricPencil::new(space);
    let sigma = pencil.bisect(k);
    let kernel: Option<Vec<T>> = deflate_constants.then(|| {
        let q: Vec<T> = space.density().iter().map(|w| w.sqrt()).collect();
        let norm = q.iter().map(|&v| v * v).sum::<T>().sqrt();
        q.into_iter().map(|v| v / norm).collect()
    });
    let y = pencil.eigenvector(sigma, kernel.as_deref());
    let ay = pencil.apply(&y);
    let lambda: T = y.iter().zip(&ay).map(|(&a, &b)| a * b).sum();
    let residual = ay
        .iter()
        .zip(&y)
        .map(|(&a, &b)| (a - lambda * b) * (a - lambda * b))
        .sum::<T>()
        .sqrt();
    // back to original coordinates, unit weighted norm
    let scale = T::one() / space.dx().sqrt();
    let mut u: Vec<T> = y
        .iter()
        .zip(space.density())
        .map(|(&v, &w)| v / w.sqrt() * scale)
        .collect();
    let peak = u.iter().copied().fold(T::zero(), |m, v| if v.abs() > m.abs() { v } else { m });
    if peak < T::zero() {
        u.iter_mut().for_each(|v| *v = -*v);
    }
    EigenResult {
        eigenvalue: lambda,
        eigenfunction: GridFunction { values: u },
        residual_norm: residual,
        radius: space.radius(),
    }
}

/// Spectral gap `λ₁` of a finite-measure space.
pub fn lambda1<T: Real>(space: &WeightedLine<T>) -> Result<EigenResult<T>> {
    if !space.is_finite_measure() {
        return Err(Error::Regime(format!(
            "{} has infinite measure; use lambda0 for the bottom of the spectrum",
            space.name()
        )));
    }
    Ok(eigen_pair(space, 1, true))
}

/// Bottom of the spectrum `λ₀` of an infinite-measure space on its truncated domain.
pub fn lambda0<T: Real>(space: &WeightedLine<T>) -> Result<EigenResult<T>> {
    if space.is_finite_measure() {
        return Err(Error::Regime(format!(
            "{} has finite measure; use lambda1 for the spectral gap",
            space.name()
        )));
    }
    Ok(eigen_pair(space, 0, false))
}

/// `λ₁` or `λ₀`, whichever the space's measure calls for.
pub fn spectral_value<T: Real>(space: &WeightedLine<T>) -> Result<EigenResult<T>> {
    if space.is_finite_measure() {
        lambda1(space)
    } else {
        lambda0(space)
    }
}

/// Discrete Dirichlet energy `Σ_faces w_{i+½} (f_{i+1} - f_i)² / Δx`, plus the
/// wall terms of an absorbing closure.
pub fn dirichlet_energy<T: Real>(space: &WeightedLine<T>, f: &[T]) -> T {
    let n = space.n();
    let w = space.density();
    let dx = space.dx();
    let face = |i: usize, j: usize| (w[i] * w[j]).sqrt() * (f[j] - f[i]) * (f[j] - f[i]);
    let mut e: T = (0..n - 1).map(|i| face(i, i + 1)).sum();
    match space.closure() {
        Closure::Periodic => e = e + face(n - 1, 0),
        Closure::Dirichlet => e = e + T::lit(2.0) * (w[0] * f[0] * f[0] + w[n - 1] * f[n - 1] * f[n - 1]),
        Closure::Neumann => {}
    }
    e / dx
}

/// Rayleigh quotient `∫|∇f|² dm / ∫f² dm`, optionally after projecting `f`
/// to weighted mean zero.
pub fn rayleigh<T: Real>(space: &WeightedLine<T>, f: &GridFunction<T>, mean_zero: bool) -> Result<T> {
    if f.len() != space.n() {
        return Err(Error::Argument("grid function does not match the space".into()));
    }
    let g = if mean_zero { space.project_mean_zero(f) } else { f.clone() };
    let denom = space.inner(&g.values, &g.values);
    if !(denom > T::zero()) {
        return Err(Error::Argument("Rayleigh quotient of the zero function".into()));
    }
    Ok(dirichlet_energy(space, &g.values) / denom)
}
