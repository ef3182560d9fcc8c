//! Banded solvers: tridiagonal LU with partial pivoting, and its periodic
//! (cyclic) extension via a rank-one Sherman–Morrison correction.

use crate::Real;

/// LU factorization of a tridiagonal matrix with row interchanges
/// (the `gttrf` scheme: `U` gains a second superdiagonal).
#[derive(Debug, Clone)]
pub struct TridiagonalLu<T> {
    dl: Vec<T>,
    d: Vec<T>,
    du: Vec<T>,
    du2: Vec<T>,
    swapped: Vec<bool>,
}

impl<T: Real> TridiagonalLu<T> {
    /// Factors the matrix with sub-diagonal `lower` (`n-1`), `diag` (`n`) and
    /// super-diagonal `upper` (`n-1`). Exactly zero pivots are nudged to a
    /// tiny value, which is what inverse iteration at an exact eigenvalue needs.
    pub fn new(lower: &[T], diag: &[T], upper: &[T]) -> Self {
        let n = diag.len();
        assert!(n >= 2 && lower.len() == n - 1 && upper.len() == n - 1);
        let mut dl = lower.to_vec();
        let mut d = diag.to_vec();
        let mut du = upper.to_vec();
        let mut du2 = vec![T::zero(); n.saturating_sub(2)];
        let mut swapped = vec![false; n - 1];
        let scale = diag.iter().chain(lower).chain(upper).fold(T::zero(), |m, v| m.max(v.abs()));
        let tiny = (scale * T::epsilon()).max(T::min_positive_value());
        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == T::zero() {
                    d[i] = tiny;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] = d[i + 1] - fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        if d[n - 1] == T::zero() {
            d[n - 1] = tiny;
        }
        TridiagonalLu { dl, d, du, du2, swapped }
    }

    pub fn solve_in_place(&self, b: &mut [T]) {
        let n = self.d.len();
        assert_eq!(b.len(), n);
        for i in 0..n - 1 {
            if self.swapped[i] {
                let temp = b[i] - self.dl[i] * b[i + 1];
                b[i] = b[i + 1];
                b[i + 1] = temp;
            } else {
                b[i + 1] = b[i + 1] - self.dl[i] * b[i];
            }
        }
        b[n - 1] = b[n - 1] / self.d[n - 1];
        b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

/// Solver for a tridiagonal matrix with optional periodic corners
/// `M[0][n-1] = top_right`, `M[n-1][0] = bottom_left`.
#[derive(Debug, Clone)]
pub struct BandSolver<T> {
    lu: TridiagonalLu<T>,
    cyclic: Option<Cyclic<T>>,
}

#[derive(Debug, Clone)]
struct Cyclic<T> {
    gamma: T,
    top_right: T,
    z: Vec<T>,
    denom: T,
}

impl<T: Real> BandSolver<T> {
    pub fn new(lower: &[T], diag: &[T], upper: &[T], corners: Option<(T, T)>) -> Self {
        let Some((top_right, bottom_left)) = corners else {
            return BandSolver {
                lu: TridiagonalLu::new(lower, diag, upper),
                cyclic: None,
            };
        };
        let n = diag.len();
        // M = T' + u vᵀ with u = (γ, 0, …, bottom_left), v = (1, 0, …, top_right/γ)
        let gamma = if diag[0] == T::zero() { T::one() } else { -diag[0] };
        let mut modified = diag.to_vec();
        modified[0] = modified[0] - gamma;
        modified[n - 1] = modified[n - 1] - bottom_left * top_right / gamma;
        let lu = TridiagonalLu::new(lower, &modified, upper);
        let mut z = vec![T::zero(); n];
        z[0] = gamma;
        z[n - 1] = bottom_left;
        lu.solve_in_place(&mut z);
        let denom = T::one() + z[0] + top_right * z[n - 1] / gamma;
        BandSolver {
            lu,
            cyclic: Some(Cyclic {
                gamma,
                top_right,
                z,
                denom,
            }),
        }
    }

    pub fn solve_in_place(&self, b: &mut [T]) {
        self.lu.solve_in_place(b);
        if let Some(c) = &self.cyclic {
            let n = b.len();
            let fact = (b[0] + c.top_right * b[n - 1] / c.gamma) / c.denom;
            b.iter_mut().zip(&c.z).for_each(|(x, &z)| *x = *x - fact * z);
        }
    }
}
