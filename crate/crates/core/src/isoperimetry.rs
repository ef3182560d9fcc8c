//! Perimeters of interval unions, the Cheeger constant of a discretized
//! weighted line, and the co-area inequality.
//!
//! In one dimension the perimeter of a finite union of intervals is the sum
//! of the density over its topological boundary points. On an absorbing
//! (infinite-measure) line, contact with a truncation wall counts as boundary.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::space::{Closure, GridFunction, Topology, WeightedLine};
use crate::Real;

/// Largest number of intervals a candidate set may have.
pub const MAX_INTERVALS: usize = 3;

/// Subgrid size of the brute-force multi-interval search.
const BRUTE_FORCE_POINTS: usize = 32;

/// Relative margin by which the brute force may beat the single-cut optimum.
pub const BRUTE_FORCE_SLACK: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CutKind {
    SingleCut,
    Interval,
    MultiInterval(usize),
}

/// A finite union of intervals described by its boundary points.
///
/// The points split the domain into consecutive pieces that alternate between
/// inside and outside; `left_inside` says whether the piece left of the first
/// point belongs to the set. On a circle the first and last pieces are the
/// same arc, so an even number of points is required.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutFamily<T> {
    pub kind: CutKind,
    pub cut_points: Vec<T>,
    pub left_inside: bool,
}

impl<T: Real> CutFamily<T> {
    pub fn empty() -> Self {
        CutFamily {
            kind: CutKind::MultiInterval(0),
            cut_points: Vec::new(),
            left_inside: false,
        }
    }

    /// `{x < s}` when `left_inside`, otherwise `{x > s}`.
    pub fn half_line(s: T, left_inside: bool) -> Self {
        CutFamily {
            kind: CutKind::SingleCut,
            cut_points: vec![s],
            left_inside,
        }
    }

    /// `[a, b]`; on a circle, the arc running forward from `a` to `b`.
    pub fn interval(a: T, b: T) -> Self {
        CutFamily {
            kind: CutKind::Interval,
            cut_points: vec![a, b],
            left_inside: false,
        }
    }

    /// Union of disjoint intervals given in increasing order.
    pub fn intervals(pieces: &[(T, T)]) -> Self {
        Self::from_points(pieces.iter().flat_map(|&(a, b)| [a, b]).collect(), false)
    }

    /// General constructor; the kind is inferred from the number of pieces.
    pub fn from_points(cut_points: Vec<T>, left_inside: bool) -> Self {
        let kind = match (cut_points.len(), left_inside) {
            (1, _) => CutKind::SingleCut,
            (2, false) => CutKind::Interval,
            (c, inside) => CutKind::MultiInterval(inside_pieces(c, inside)),
        };
        CutFamily {
            kind,
            cut_points,
            left_inside,
        }
    }

    /// Number of connected pieces of the set on a line.
    pub fn pieces(&self) -> usize {
        inside_pieces(self.cut_points.len(), self.left_inside)
    }

    pub fn validate(&self, space: &WeightedLine<T>) -> Result<()> {
        let (left, right) = space.domain();
        let pts = &self.cut_points;
        if pts.iter().any(|p| !p.is_finite()) {
            return Err(Error::Argument("cut points must be finite".into()));
        }
        if pts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Argument("cut points must be strictly increasing".into()));
        }
        let inside = |p: T| match space.closure() {
            Closure::Periodic => p >= left && p < right,
            Closure::Dirichlet => p >= left && p <= right,
            Closure::Neumann => p > left && p < right,
        };
        if let Some(p) = pts.iter().find(|&&p| !inside(p)) {
            return Err(Error::Argument(format!(
                "cut point {p} outside the domain [{left}, {right}]"
            )));
        }
        let pieces = match space.topology() {
            Topology::Circle => {
                if pts.len() % 2 == 1 {
                    return Err(Error::Argument("a set on a circle needs an even number of cut points".into()));
                }
                pts.len() / 2
            }
            _ => self.pieces(),
        };
        if pieces > MAX_INTERVALS {
            return Err(Error::Argument(format!(
                "{pieces} intervals exceed the limit of {MAX_INTERVALS}"
            )));
        }
        Ok(())
    }

    /// The inside pieces as `(start, end)` pairs; circle arcs may have `end < start`.
    pub fn segments(&self, space: &WeightedLine<T>) -> Vec<(T, T)> {
        let (left, right) = space.domain();
        let pts = &self.cut_points;
        if pts.is_empty() {
            return if self.left_inside { vec![(left, right)] } else { Vec::new() };
        }
        if space.topology() == Topology::Circle {
            let c = pts.len();
            let start = usize::from(self.left_inside);
            return (0..c / 2)
                .map(|j| (pts[(start + 2 * j) % c], pts[(start + 2 * j + 1) % c]))
                .collect();
        }
        let mut bounds = Vec::with_capacity(pts.len() + 2);
        bounds.push(left);
        bounds.extend_from_slice(pts);
        bounds.push(right);
        let first = usize::from(!self.left_inside);
        (first..bounds.len() - 1)
            .step_by(2)
            .map(|i| (bounds[i], bounds[i + 1]))
            .collect()
    }

    /// Mass of the set.
    pub fn measure(&self, space: &WeightedLine<T>) -> T {
        self.segments(space)
            .into_iter()
            .map(|(a, b)| space.mass_between(a, b))
            .sum()
    }

    /// Grid indicator: node `x` is inside when `a ≤ x < b` for some piece.
    pub fn indicator(&self, space: &WeightedLine<T>) -> GridFunction<T> {
        let segments = self.segments(space);
        let circle = space.topology() == Topology::Circle;
        let contains = |x: T| {
            segments.iter().any(|&(a, b)| {
                if circle && b <= a {
                    x >= a || x < b
                } else {
                    x >= a && x < b
                }
            })
        };
        let values = space
            .nodes()
            .iter()
            .map(|&x| if contains(x) { T::one() } else { T::zero() })
            .collect();
        GridFunction { values }
    }
}

fn inside_pieces(cuts: usize, left_inside: bool) -> usize {
    let segments = cuts + 1;
    if left_inside {
        segments.div_ceil(2)
    } else {
        segments / 2
    }
}

/// Sum of the density over the boundary points of the set.
///
/// Cut points are assumed valid for the space (see [`CutFamily::validate`]).
pub fn perimeter<T: Real>(space: &WeightedLine<T>, cuts: &CutFamily<T>) -> T {
    cuts.cut_points.iter().map(|&s| space.density_at(s)).sum()
}

/// Point `s` with `m({x ≤ s}) = mass` (arc from the origin on a circle).
pub fn quantile<T: Real>(space: &WeightedLine<T>, mass: T) -> T {
    let (mut lo, mut hi) = space.domain();
    for _ in 0..200 {
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        if space.measure_of_sublevel(mid) < mass {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) / T::lit(2.0)
}

#[derive(Debug, Clone, Serialize)]
pub struct CheegerResult<T> {
    pub h: T,
    pub optimal_cuts: CutFamily<T>,
    /// Mass of the optimal set.
    pub measure: T,
    /// Best ratio from the single cut (or single interval) scan.
    pub single_cut: T,
    /// Best ratio from the brute-force multi-interval search.
    pub brute_force: T,
}

impl<T: Real> CheegerResult<T> {
    /// Whether the brute force failed to beat the scan beyond the slack.
    pub fn single_cut_optimal(&self) -> bool {
        self.brute_force >= self.single_cut * (T::one() - T::lit(BRUTE_FORCE_SLACK))
    }
}

struct Best<T> {
    ratio: T,
    cuts: Option<CutFamily<T>>,
}

impl<T: Real> Best<T> {
    fn new() -> Self {
        Best {
            ratio: T::infinity(),
            cuts: None,
        }
    }

    // strict improvement keeps the earliest (leftmost) candidate on ties
    fn offer(&mut self, ratio: T, make: impl FnOnce() -> CutFamily<T>) {
        if ratio < self.ratio {
            self.ratio = ratio;
            self.cuts = Some(make());
        }
    }
}

/// Cheeger constant `inf Per(A)/m(A)` over sets with `m(A) ≤ m(X)/2`
/// (finite measure) or over bounded intervals (infinite measure).
///
/// The main scan covers half-lines on a finite line, arcs on a circle and
/// intervals on an infinite-measure line, with endpoints at nodes, cell faces
/// and the exact half-mass points. A brute-force search over unions of up to
/// three intervals on a coarse subgrid backs it up; the smaller ratio wins.
pub fn cheeger_constant<T: Real>(space: &WeightedLine<T>) -> CheegerResult<T> {
    let scan = match (space.topology(), space.is_finite_measure()) {
        (Topology::Circle, _) => scan_arcs(space),
        (_, true) => scan_half_lines(space),
        (_, false) => scan_intervals(space),
    };
    let brute = brute_force(space);
    let single_cut = scan.ratio;
    let brute_force = brute.ratio;
    let best = if brute.ratio < scan.ratio { brute } else { scan };
    let optimal_cuts = best.cuts.unwrap_or_else(CutFamily::empty);
    CheegerResult {
        h: best.ratio,
        measure: optimal_cuts.measure(space),
        optimal_cuts,
        single_cut,
        brute_force,
    }
}

fn faces_and_nodes<T: Real>(space: &WeightedLine<T>) -> Vec<T> {
    let half = space.dx() / T::lit(2.0);
    let mut pts: Vec<T> = space.nodes().iter().flat_map(|&x| [x - half, x]).collect();
    pts.push(space.nodes()[space.n() - 1] + half);
    pts
}

fn scan_half_lines<T: Real>(space: &WeightedLine<T>) -> Best<T> {
    let (left, right) = space.domain();
    let total = space.total_mass();
    let half_mass = total / T::lit(2.0);
    let mut candidates: Vec<T> = faces_and_nodes(space)
        .into_iter()
        .filter(|&s| s > left && s < right)
        .collect();
    candidates.push(quantile(space, half_mass));
    candidates.sort_by(|a, b| a.partial_cmp(b).expect("finite cut points"));
    let mut best = Best::new();
    for s in candidates {
        let below = space.measure_of_sublevel(s);
        let above = space.measure_of_superlevel(s);
        let (mass, left_inside) = if below <= above { (below, true) } else { (above, false) };
        if mass > T::zero() {
            best.offer(space.density_at(s) / mass, || CutFamily::half_line(s, left_inside));
        }
    }
    best
}

fn scan_arcs<T: Real>(space: &WeightedLine<T>) -> Best<T> {
    let n = space.n();
    let x = space.nodes();
    let w = space.density();
    let total = space.total_mass();
    let half_mass = total / T::lit(2.0);
    let cumulative: Vec<T> = x.iter().map(|&s| space.measure_of_sublevel(s)).collect();
    let mut best = Best::new();
    for i in 0..n {
        // arc of exactly half the mass starting at node i
        let target = cumulative[i] + half_mass;
        let target = if target >= total { target - total } else { target };
        let end = quantile(space, target);
        best.offer((w[i] + space.density_at(end)) / half_mass, || arc(x[i], end));
        for j in 0..n {
            if j == i {
                continue;
            }
            let mass = if j > i {
                cumulative[j] - cumulative[i]
            } else {
                total - cumulative[i] + cumulative[j]
            };
            if mass <= half_mass {
                best.offer((w[i] + w[j]) / mass, || arc(x[i], x[j]));
            }
        }
    }
    best
}

/// The arc from `a` forward to `b` as a cut family with ordered points.
fn arc<T: Real>(a: T, b: T) -> CutFamily<T> {
    if a < b {
        CutFamily::interval(a, b)
    } else {
        CutFamily::from_points(vec![b, a], true)
    }
}

fn scan_intervals<T: Real>(space: &WeightedLine<T>) -> Best<T> {
    let (left, right) = space.domain();
    let mut pts = vec![left];
    pts.extend_from_slice(space.nodes());
    pts.push(right);
    let dens: Vec<T> = pts.iter().map(|&s| space.density_at(s)).collect();
    let masses = TailMasses::new(space, &pts);
    let mut best = Best::new();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let mass = masses.between(i, j);
            if mass > T::zero() {
                best.offer((dens[i] + dens[j]) / mass, || CutFamily::interval(pts[i], pts[j]));
            }
        }
    }
    best
}

fn brute_force<T: Real>(space: &WeightedLine<T>) -> Best<T> {
    let n = space.n();
    let m = BRUTE_FORCE_POINTS.min(n);
    let (left, right) = space.domain();
    let circle = space.topology() == Topology::Circle;
    let mut pts: Vec<T> = (0..m)
        .map(|k| space.nodes()[k * (n - 1) / (m - 1).max(1)])
        .collect();
    if space.closure() == Closure::Dirichlet {
        pts.insert(0, left);
        pts.push(right);
    }
    pts.dedup();
    let dens: Vec<T> = pts.iter().map(|&s| space.density_at(s)).collect();
    let masses = TailMasses::new(space, &pts);
    let cumulative = &masses.below;
    let total = space.total_mass();
    let finite = space.is_finite_measure();
    let limit = if finite { total / T::lit(2.0) } else { T::infinity() };
    let mut best = Best::new();
    let mut chosen = Vec::with_capacity(2 * MAX_INTERVALS);
    let max_cuts = 2 * MAX_INTERVALS;
    let mut evaluate = |chosen: &[usize]| {
        let c = chosen.len();
        if circle && c % 2 == 1 {
            return;
        }
        for left_inside in [false, true] {
            let pieces = if circle { c / 2 } else { inside_pieces(c, left_inside) };
            if pieces == 0 || pieces > MAX_INTERVALS {
                continue;
            }
            // an infinite line only admits bounded sets
            if !finite && (left_inside || c % 2 == 1) {
                continue;
            }
            let mut inner = T::zero();
            for pair in chosen.chunks(2) {
                if pair.len() == 2 {
                    inner = inner + cumulative[pair[1]] - cumulative[pair[0]];
                }
            }
            // pieces between consecutive points starting at the first one
            let mass = if circle {
                if left_inside { total - inner } else { inner }
            } else {
                masses.line_mass(chosen, left_inside)
            };
            if mass <= T::zero() || mass > limit {
                continue;
            }
            let per: T = chosen.iter().map(|&k| dens[k]).sum();
            best.offer(per / mass, || {
                CutFamily::from_points(chosen.iter().map(|&k| pts[k]).collect(), left_inside)
            });
        }
    };
    combinations(pts.len(), max_cuts, &mut chosen, 0, &mut evaluate);
    best
}

/// Sub- and superlevel masses at a set of points, combined so that masses
/// deep in either tail come out without cancellation.
struct TailMasses<T> {
    below: Vec<T>,
    above: Vec<T>,
}

impl<T: Real> TailMasses<T> {
    fn new(space: &WeightedLine<T>, pts: &[T]) -> Self {
        TailMasses {
            below: pts.iter().map(|&s| space.measure_of_sublevel(s)).collect(),
            above: pts.iter().map(|&s| space.measure_of_superlevel(s)).collect(),
        }
    }

    fn between(&self, i: usize, j: usize) -> T {
        let m = if self.below[j] <= self.above[i] {
            self.below[j] - self.below[i]
        } else {
            self.above[i] - self.above[j]
        };
        m.max(T::zero())
    }

    fn line_mass(&self, chosen: &[usize], left_inside: bool) -> T {
        let mut mass = T::zero();
        let mut inside = left_inside;
        let mut from = None;
        for &k in chosen {
            if inside {
                mass = mass + from.map_or(self.below[k], |f| self.between(f, k));
            }
            from = Some(k);
            inside = !inside;
        }
        if inside {
            mass = mass + from.map_or(T::zero(), |f| self.above[f]);
        }
        mass
    }
}

fn combinations(n: usize, max: usize, chosen: &mut Vec<usize>, start: usize, visit: &mut impl FnMut(&[usize])) {
    if !chosen.is_empty() {
        visit(chosen);
    }
    if chosen.len() == max {
        return;
    }
    for k in start..n {
        chosen.push(k);
        combinations(n, max, chosen, k + 1, visit);
        chosen.pop();
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoareaCheck<T> {
    /// `∫₀^M Per({u > t}) dt`.
    pub lhs: T,
    /// `∫ |∇u| dm` for the piecewise-linear `u`.
    pub rhs: T,
    pub pass: bool,
}

/// Tolerance of the co-area comparison.
pub const COAREA_TOLERANCE: f64 = 1e-9;

/// Co-area inequality `∫₀^M Per({u > t}) dt ≤ ∫ |∇u| dm` for a nonnegative,
/// piecewise-linear `u`.
///
/// The left side integrates the level-set perimeter by the trapezoid rule
/// over the distinct node values, which is exact because the perimeter is
/// linear in `t` between them. The right side is the exact integral of the
/// slope of the interpolant, `Σ |u_{i+1} - u_i| (w_i + w_{i+1})/2` over cells.
/// On an absorbing line `u` is extended by zero past the walls.
pub fn coarea_check<T: Real>(space: &WeightedLine<T>, u: &GridFunction<T>) -> Result<CoareaCheck<T>> {
    let n = space.n();
    if u.len() != n {
        return Err(Error::Argument("grid function does not match the space".into()));
    }
    if let Some(v) = u.values.iter().find(|v| !(**v >= T::zero() && v.is_finite())) {
        return Err(Error::Argument(format!("co-area check needs finite u >= 0, found {v}")));
    }
    let v = &u.values;
    let w = space.density();
    // (u_a, u_b, w_a, w_b) for every cell the interpolant crosses
    let mut edges: Vec<(T, T, T, T)> = (0..n - 1).map(|i| (v[i], v[i + 1], w[i], w[i + 1])).collect();
    match space.closure() {
        Closure::Periodic => edges.push((v[n - 1], v[0], w[n - 1], w[0])),
        Closure::Dirichlet => {
            edges.push((T::zero(), v[0], w[0], w[0]));
            edges.push((v[n - 1], T::zero(), w[n - 1], w[n - 1]));
        }
        Closure::Neumann => {}
    }
    let rhs: T = edges
        .iter()
        .map(|&(a, b, wa, wb)| (b - a).abs() * (wa + wb) / T::lit(2.0))
        .sum();

    let mut levels: Vec<T> = v.clone();
    levels.push(T::zero());
    levels.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    levels.dedup();
    // density at the crossing of level t inside an edge
    let crossing = |&(a, b, wa, wb): &(T, T, T, T), t: T| {
        let theta = (t - a) / (b - a);
        wa + (wb - wa) * theta
    };
    let mut lhs = T::zero();
    for pair in levels.windows(2) {
        let (t0, t1) = (pair[0], pair[1]);
        let mut p0 = T::zero();
        let mut p1 = T::zero();
        for e in &edges {
            if e.0.min(e.1) <= t0 && e.0.max(e.1) >= t1 {
                p0 = p0 + crossing(e, t0);
                p1 = p1 + crossing(e, t1);
            }
        }
        lhs = lhs + (t1 - t0) * (p0 + p1) / T::lit(2.0);
    }
    Ok(CoareaCheck {
        lhs,
        rhs,
        // relative above unit scale: absorbing-line densities reach 1e13
        pass: lhs <= rhs + T::lit(COAREA_TOLERANCE) * rhs.max(T::one()),
    })
}
