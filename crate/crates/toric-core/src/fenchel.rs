//! Numerical Legendre-Fenchel transform f̌(x) = inf_u(⟨x,u⟩ - f(u)) on the
//! standard simplex, grid sampling, simplex integration and biconjugation.
//!
//! The inner minimization exploits that the objective is convex (f concave)
//! with slopes of f in Δ_n, hence coercive for interior x. Inside a box
//! [-U,U]^n we combine coordinate golden-section sweeps with descent along
//! the minimal-norm element of the subdifferential (exact for the
//! piecewise-linear potentials, a line search for smooth ones). For boundary
//! x the minimizer may escape to infinity; boxes double until the value
//! stabilizes, and as a last resort the value is extrapolated linearly in
//! 1/U and the point is flagged.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{InvariantMetric, Piece};
use crate::simplex::{binomial, lattice_points, LatticePoint};

#[derive(Debug, Clone, Copy)]
pub struct TransformOptions {
    /// Target accuracy for the transform value.
    pub tol: f64,
    /// Initial box half-width.
    pub box_init: f64,
    /// Hard cap on the box half-width; reaching it triggers extrapolation.
    pub box_max: f64,
    /// Maximum descent/sweep rounds per box.
    pub max_rounds: usize,
}

impl Default for TransformOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            box_init: 8.0,
            box_max: 2048.0,
            max_rounds: 80,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointFlag {
    /// Minimizer interior to the search box, or value stable under box
    /// doubling.
    Converged,
    /// Value extrapolated in 1/U at the box cap (boundary-type point).
    Extrapolated,
    /// Round budget exhausted before the stopping tests fired.
    Budget,
}

#[derive(Debug, Clone)]
pub struct TransformOutcome {
    pub value: f64,
    pub minimizer: Vec<f64>,
    pub flag: PointFlag,
}

/// f̌ at one point of Δ_n.
pub fn transform(h: &InvariantMetric, x: &[f64], opts: &TransformOptions) -> Result<f64> {
    Ok(transform_detailed(h, x, opts)?.value)
}

pub fn transform_detailed(
    h: &InvariantMetric,
    x: &[f64],
    opts: &TransformOptions,
) -> Result<TransformOutcome> {
    let n = h.dim();
    if x.len() != n {
        return Err(Error::Domain(format!(
            "point has dimension {}, metric has {n}",
            x.len()
        )));
    }
    let sum: f64 = x.iter().sum();
    if x.iter().any(|&v| v < -1e-12) || sum > 1.0 + 1e-9 {
        return Err(Error::Domain(format!("point {x:?} is outside Δ_n")));
    }

    let mut u = vec![0.0; n];
    let mut box_half = opts.box_init;
    let mut previous: Option<f64> = None;
    loop {
        let (value, budget_hit) = minimize_in_box(h, x, &mut u, box_half, opts);
        let interior = u.iter().all(|&v| v.abs() <= 0.95 * box_half);
        if interior {
            return Ok(TransformOutcome {
                value,
                minimizer: u,
                flag: if budget_hit {
                    PointFlag::Budget
                } else {
                    PointFlag::Converged
                },
            });
        }
        if let Some(prev) = previous {
            if (prev - value).abs() <= opts.tol.max(1e-12) {
                return Ok(TransformOutcome {
                    value,
                    minimizer: u,
                    flag: PointFlag::Converged,
                });
            }
            if 2.0 * box_half > opts.box_max {
                // linear-in-1/U limit from the last two box levels
                let extrapolated = 2.0 * value - prev;
                return Ok(TransformOutcome {
                    value: extrapolated,
                    minimizer: u,
                    flag: PointFlag::Extrapolated,
                });
            }
        }
        previous = Some(value);
        box_half *= 2.0;
    }
}

/// Minimize the transform objective within [-U, U]^n starting from `u`.
/// Returns (value, budget_exhausted).
fn minimize_in_box(
    h: &InvariantMetric,
    x: &[f64],
    u: &mut Vec<f64>,
    box_half: f64,
    opts: &TransformOptions,
) -> (f64, bool) {
    let n = h.dim();
    for v in u.iter_mut() {
        *v = v.clamp(-box_half, box_half);
    }
    let eval = |u: &[f64]| dot(x, u) - h.eval(u);
    let has_oracle = h.supergradient_generators(u).is_some();

    // dense pre-scan for 1-D potentials without a subgradient oracle (the
    // objective may be non-convex for custom test potentials)
    if !has_oracle && n == 1 {
        let samples = 1600;
        let mut best_val = f64::INFINITY;
        let mut best_u = 0.0;
        for i in 0..=samples {
            let cand = -box_half + 2.0 * box_half * i as f64 / samples as f64;
            let v = eval(&[cand]);
            if v < best_val {
                best_val = v;
                best_u = cand;
            }
        }
        let step = 2.0 * box_half / samples as f64;
        let lo = (best_u - step).max(-box_half);
        let hi = (best_u + step).min(box_half);
        let (vu, vv) = golden_min(|t| eval(&[t]), lo, hi, 1e-13 * (1.0 + box_half));
        if vv < best_val {
            u[0] = vu;
            return (vv, false);
        }
        u[0] = best_u;
        return (best_val, false);
    }

    let directions = sweep_directions(n);
    let mut value = eval(u);
    let mut stall_count = 0;
    for round in 0..opts.max_rounds {
        let before = value;

        // optimality certificate first: 0 ∈ ∂φ(u) ends the search, which in
        // particular resolves piecewise-linear potentials at u = 0 instantly
        if let Some(gens) = h.supergradient_generators(u) {
            let points: Vec<Vec<f64>> = gens
                .iter()
                .map(|g| x.iter().zip(g).map(|(xi, gi)| xi - gi).collect())
                .collect();
            let m = min_norm_in_hull(&points);
            if l2(&m) <= 1e-13 * (1.0 + l2(x)) {
                return (value, false);
            }
        }

        // line sweeps along axes and diagonals; the diagonals matter for
        // boundary x, where the objective has a flat valley along a mixed
        // direction that axis steps crawl through
        for dir in &directions {
            let mut t_lo = f64::NEG_INFINITY;
            let mut t_hi = f64::INFINITY;
            for d in 0..n {
                if dir[d] > 0.0 {
                    t_hi = t_hi.min((box_half - u[d]) / dir[d]);
                    t_lo = t_lo.max((-box_half - u[d]) / dir[d]);
                } else if dir[d] < 0.0 {
                    t_hi = t_hi.min((-box_half - u[d]) / dir[d]);
                    t_lo = t_lo.max((box_half - u[d]) / dir[d]);
                }
            }
            if !(t_hi > t_lo) {
                continue;
            }
            let mut probe = u.clone();
            let (best_t, best_v) = golden_min(
                |t| {
                    for d in 0..n {
                        probe[d] = u[d] + t * dir[d];
                    }
                    eval(&probe)
                },
                t_lo,
                t_hi,
                1e-13 * (1.0 + box_half),
            );
            if best_v < value {
                for d in 0..n {
                    u[d] += best_t * dir[d];
                }
                value = best_v;
            }
        }

        // subdifferential descent: direction = -(minimal-norm element of
        // ∂φ(u)) with ∂φ(u) = {x - g : g ∈ ∂f(u)}
        if let Some(gens) = h.supergradient_generators(u) {
            let points: Vec<Vec<f64>> = gens
                .iter()
                .map(|g| x.iter().zip(g).map(|(xi, gi)| xi - gi).collect())
                .collect();
            let m = min_norm_in_hull(&points);
            let norm = l2(&m);
            if norm <= 1e-13 * (1.0 + l2(x)) {
                return (value, false);
            }
            let dir: Vec<f64> = m.iter().map(|v| -v / norm).collect();
            // longest feasible step inside the box
            let mut smax = f64::INFINITY;
            for d in 0..n {
                if dir[d] > 1e-15 {
                    smax = smax.min((box_half - u[d]) / dir[d]);
                } else if dir[d] < -1e-15 {
                    smax = smax.min((-box_half - u[d]) / dir[d]);
                }
            }
            if smax > 1e-13 {
                let line = |s: f64| {
                    let probe: Vec<f64> = u.iter().zip(&dir).map(|(a, b)| a + s * b).collect();
                    eval(&probe)
                };
                let (s_best, v_best) = line_search(line, smax, value);
                if v_best < value {
                    for d in 0..n {
                        u[d] += s_best * dir[d];
                    }
                    value = v_best;
                }
            }
        }

        if before - value <= 1e-14 * (1.0 + before.abs()) {
            stall_count += 1;
            if stall_count >= 2 {
                return (value, false);
            }
        } else {
            stall_count = 0;
        }
        if round + 1 == opts.max_rounds {
            return (value, true);
        }
    }
    (value, false)
}

/// Golden-section minimization of a unimodal (or convex) function on [a, b].
fn golden_min<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, xtol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut lo = a;
    let mut hi = b;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > xtol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    let mid = 0.5 * (lo + hi);
    let fm = f(mid);
    if fm <= f1 && fm <= f2 {
        (mid, fm)
    } else if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Line search for a convex section: expand a bracket geometrically from 0,
/// then golden-refine. `cap` bounds the step, `f0` is the value at s = 0.
fn line_search<F: FnMut(f64) -> f64>(mut f: F, cap: f64, f0: f64) -> (f64, f64) {
    let mut s = (cap / 1024.0).clamp(1e-9, 1.0).min(cap);
    let mut best_s = 0.0;
    let mut best_v = f0;
    let mut prev_s = 0.0;
    loop {
        let v = f(s);
        if v < best_v {
            best_v = v;
            prev_s = best_s;
            best_s = s;
        } else {
            // bracket [prev_s, s]
            let (gs, gv) = golden_min(&mut f, prev_s, s, 1e-12 * (1.0 + s));
            return if gv < best_v { (gs, gv) } else { (best_s, best_v) };
        }
        if s >= cap {
            let (gs, gv) = golden_min(&mut f, prev_s, cap, 1e-12 * (1.0 + cap));
            return if gv < best_v { (gs, gv) } else { (best_s, best_v) };
        }
        s = (s * 4.0).min(cap);
    }
}

/// One representative per antipodal pair of {-1,0,1}^n \ {0}.
fn sweep_directions(n: usize) -> Vec<Vec<f64>> {
    let mut dirs = Vec::new();
    let total = 3usize.pow(n as u32);
    for code in 0..total {
        let mut dir = vec![0.0; n];
        let mut rest = code;
        for d in dir.iter_mut() {
            *d = (rest % 3) as f64 - 1.0;
            rest /= 3;
        }
        if dir.iter().all(|&v| v == 0.0) {
            continue;
        }
        // keep only one of ±dir: first nonzero component positive
        if dir.iter().find(|&&v| v != 0.0).copied().unwrap_or(0.0) > 0.0 {
            dirs.push(dir);
        }
    }
    dirs
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn l2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Minimal-norm element of the convex hull of `points` (n ≤ 3, few points):
/// every subset of size ≤ n+1 is solved in closed form (Gram system with an
/// affine constraint) and filtered for feasibility.
fn min_norm_in_hull(points: &[Vec<f64>]) -> Vec<f64> {
    assert!(!points.is_empty());
    let n = points[0].len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let count = points.len();
    let max_size = (n + 1).min(count);
    let mut subset = Vec::with_capacity(max_size);
    enumerate_subsets(count, max_size, &mut subset, &mut |subset: &[usize]| {
        if let Some(candidate) = min_norm_affine(points, subset) {
            let norm2 = dot(&candidate, &candidate);
            if best.as_ref().map_or(true, |(b, _)| norm2 < *b) {
                best = Some((norm2, candidate));
            }
        }
    });
    best.expect("at least singleton subsets are feasible").1
}

fn enumerate_subsets<F: FnMut(&[usize])>(
    count: usize,
    max_size: usize,
    current: &mut Vec<usize>,
    f: &mut F,
) {
    fn rec<F: FnMut(&[usize])>(
        start: usize,
        count: usize,
        max_size: usize,
        current: &mut Vec<usize>,
        f: &mut F,
    ) {
        if !current.is_empty() {
            f(current);
        }
        if current.len() == max_size {
            return;
        }
        for i in start..count {
            current.push(i);
            rec(i + 1, count, max_size, current, f);
            current.pop();
        }
    }
    rec(0, count, max_size, current, f);
}

/// Minimal-norm convex combination over a subset: solve the Gram system with
/// Σλ = 1, reject if any λ < 0.
fn min_norm_affine(points: &[Vec<f64>], subset: &[usize]) -> Option<Vec<f64>> {
    let k = subset.len();
    let n = points[0].len();
    if k == 1 {
        return Some(points[subset[0]].clone());
    }
    // KKT system: [2G  1; 1ᵀ 0]·[λ; μ] = [0; 1]
    let dim = k + 1;
    let mut a = vec![vec![0.0; dim + 1]; dim];
    for i in 0..k {
        for j in 0..k {
            a[i][j] = 2.0 * dot(&points[subset[i]], &points[subset[j]]);
        }
        a[i][k] = 1.0;
        a[i][dim] = 0.0;
    }
    for j in 0..k {
        a[k][j] = 1.0;
    }
    a[k][dim] = 1.0;
    let solution = solve_dense(&mut a)?;
    let lambda = &solution[..k];
    if lambda.iter().any(|&l| l < -1e-12) {
        return None;
    }
    let mut out = vec![0.0; n];
    for (idx, &l) in subset.iter().zip(lambda) {
        for d in 0..n {
            out[d] += l * points[*idx][d];
        }
    }
    Some(out)
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
fn solve_dense(a: &mut [Vec<f64>]) -> Option<Vec<f64>> {
    let m = a.len();
    for col in 0..m {
        let pivot = (col..m).max_by(|&i, &j| {
            a[i][col]
                .abs()
                .partial_cmp(&a[j][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[pivot][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, pivot);
        for row in 0..m {
            if row != col {
                let factor = a[row][col] / a[col][col];
                for j in col..=m {
                    a[row][j] -= factor * a[col][j];
                }
            }
        }
    }
    Some((0..m).map(|i| a[i][m] / a[i][i]).collect())
}

// ---------------------------------------------------------------------------
// Grids
// ---------------------------------------------------------------------------

/// Sampled values of f̌ on the lattice {x : M·x ∈ Z^n} ∩ Δ_n, in the
/// lexicographic order of `lattice_points(n, M)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FenchelGrid {
    pub n: usize,
    #[serde(rename = "M")]
    pub resolution: usize,
    pub values: Vec<f64>,
    pub flags: Vec<PointFlag>,
}

impl FenchelGrid {
    pub fn points(&self) -> Vec<LatticePoint> {
        lattice_points(self.n, self.resolution)
    }

    pub fn coordinates(&self, point: &LatticePoint) -> Vec<f64> {
        point
            .components()
            .iter()
            .map(|&j| j as f64 / self.resolution as f64)
            .collect()
    }

    /// Lexicographic rank of a lattice multi-index within the grid.
    pub fn rank(&self, idx: &[usize]) -> usize {
        lex_rank(self.n, self.resolution, idx)
    }

    pub fn value_at(&self, idx: &[usize]) -> f64 {
        self.values[self.rank(idx)]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("grid serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Restriction to the sub-lattice of even indices (resolution M/2).
    fn halved(&self) -> Option<FenchelGrid> {
        if self.resolution % 2 != 0 || self.resolution < 2 {
            return None;
        }
        let half = self.resolution / 2;
        let mut values = Vec::new();
        let mut flags = Vec::new();
        for point in lattice_points(self.n, half) {
            let idx: Vec<usize> = point.components().iter().map(|&j| 2 * j).collect();
            let rank = self.rank(&idx);
            values.push(self.values[rank]);
            flags.push(self.flags[rank]);
        }
        Some(FenchelGrid {
            n: self.n,
            resolution: half,
            values,
            flags,
        })
    }
}

/// Rank of `idx` in the lexicographic enumeration of {j ∈ N^n : Σj ≤ M}.
fn lex_rank(n: usize, m: usize, idx: &[usize]) -> usize {
    debug_assert_eq!(idx.len(), n);
    let mut rank = 0usize;
    let mut budget = m;
    for (pos, &j) in idx.iter().enumerate() {
        let dims_left = n - pos - 1;
        for v in 0..j {
            rank += binomial(budget - v + dims_left, dims_left) as usize;
        }
        budget -= j;
    }
    rank
}

/// Transform sampled over the whole grid (parallel over points).
pub fn transform_grid(
    h: &InvariantMetric,
    resolution: usize,
    opts: &TransformOptions,
) -> Result<FenchelGrid> {
    if resolution < 2 {
        return Err(Error::Domain("grid resolution must be ≥ 2".into()));
    }
    let n = h.dim();
    let points = lattice_points(n, resolution);
    let outcomes: Result<Vec<TransformOutcome>> = points
        .par_iter()
        .map(|p| {
            let x: Vec<f64> = p
                .components()
                .iter()
                .map(|&j| j as f64 / resolution as f64)
                .collect();
            transform_detailed(h, &x, opts)
        })
        .collect();
    let outcomes = outcomes?;
    Ok(FenchelGrid {
        n,
        resolution,
        values: outcomes.iter().map(|o| o.value).collect(),
        flags: outcomes.iter().map(|o| o.flag).collect(),
    })
}

/// ∫_{Δ_n} f̌ from a grid: piecewise-linear composite rule on the cell
/// decomposition (trapezoid for n = 1, box/triangle vertex rule for n = 2),
/// Richardson-extrapolated against the half-resolution subgrid when
/// available. Returns (value, error_estimate).
pub fn integrate_over_simplex(grid: &FenchelGrid) -> (f64, f64) {
    let fine = composite_rule(grid);
    match grid.halved() {
        Some(coarse) => {
            let coarse_val = composite_rule(&coarse);
            let extrapolated = fine + (fine - coarse_val) / 3.0;
            (extrapolated, (fine - coarse_val).abs() / 3.0)
        }
        None => (fine, f64::NAN),
    }
}

fn composite_rule(grid: &FenchelGrid) -> f64 {
    let n = grid.n;
    let m = grid.resolution;
    let h = 1.0 / m as f64;
    let mut total = 0.0;
    match n {
        1 => {
            for j in 0..m {
                total += 0.5 * h * (grid.value_at(&[j]) + grid.value_at(&[j + 1]));
            }
        }
        2 => {
            let area = h * h;
            for p in lattice_points(2, m) {
                let c = p.components();
                let (j, k) = (c[0], c[1]);
                let s = j + k;
                if s + 2 <= m {
                    // full box: mean of the four corners
                    let v = grid.value_at(&[j, k])
                        + grid.value_at(&[j + 1, k])
                        + grid.value_at(&[j, k + 1])
                        + grid.value_at(&[j + 1, k + 1]);
                    total += area * v / 4.0;
                } else if s + 1 == m {
                    // boundary triangle: mean of the three corners
                    let v = grid.value_at(&[j, k])
                        + grid.value_at(&[j + 1, k])
                        + grid.value_at(&[j, k + 1]);
                    total += 0.5 * area * v / 3.0;
                }
            }
        }
        _ => {
            // first-order rule: exact cell volume times the anchor value
            for cell in crate::simplex::cell_partition(n, m) {
                if cell.is_degenerate() {
                    continue;
                }
                let idx: Vec<usize> = cell.exponent().components().to_vec();
                total += cell.volume() * grid.value_at(&idx);
            }
        }
    }
    total
}

/// Closed-form transform of the Fubini-Study potential: the half entropy
/// -(1/2)·Σ_{k=0}^n x_k log x_k with x_0 = 1 - Σx.
pub fn fs_transform_entropy(x: &[f64]) -> f64 {
    let x0 = 1.0 - x.iter().sum::<f64>();
    let mut acc = xlogx(x0.max(0.0));
    for &xk in x {
        acc += xlogx(xk.max(0.0));
    }
    -0.5 * acc
}

fn xlogx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

// ---------------------------------------------------------------------------
// Biconjugation and projection
// ---------------------------------------------------------------------------

/// inf_{x ∈ Δ_n} (⟨x, u⟩ - f̌(x)) by multilevel grid refinement over the
/// simplex; equals f(u) for concave admissible f, and the concave envelope
/// value otherwise.
pub fn biconjugate(h: &InvariantMetric, u: &[f64], opts: &TransformOptions) -> Result<f64> {
    let n = h.dim();
    let phi = |x: &[f64]| -> Result<f64> { Ok(dot(x, u) - transform(h, x, opts)?) };
    // level 0: coarse sweep of the whole simplex
    let m0 = 8usize;
    let mut best_x = vec![0.0; n];
    let mut best_v = f64::INFINITY;
    for p in lattice_points(n, m0) {
        let x: Vec<f64> = p
            .components()
            .iter()
            .map(|&j| j as f64 / m0 as f64)
            .collect();
        let v = phi(&x)?;
        if v < best_v {
            best_v = v;
            best_x = x;
        }
    }
    // local refinement: shrink a {-1,0,1}^n lattice patch around the incumbent
    let mut step = 1.0 / m0 as f64;
    for _ in 0..9 {
        step /= 4.0;
        let mut improved = true;
        while improved {
            improved = false;
            let center = best_x.clone();
            let mut offsets = vec![-1i64; n];
            loop {
                let mut x = center.clone();
                let mut feasible = true;
                for d in 0..n {
                    x[d] += step * offsets[d] as f64;
                    if x[d] < 0.0 {
                        feasible = false;
                    }
                }
                if feasible && x.iter().sum::<f64>() <= 1.0 + 1e-12 {
                    let v = phi(&x)?;
                    if v < best_v - 1e-15 {
                        best_v = v;
                        best_x = x;
                        improved = true;
                    }
                }
                let mut d = 0;
                loop {
                    if d == n {
                        break;
                    }
                    offsets[d] += 1;
                    if offsets[d] <= 1 {
                        break;
                    }
                    offsets[d] = -1;
                    d += 1;
                }
                if d == n {
                    break;
                }
            }
        }
    }
    Ok(best_v)
}

/// The projection P[h]: the metric whose potential is the biconjugate
/// u ↦ inf_x(⟨x,u⟩ - f̌(x)), materialized as the piecewise-linear lower
/// envelope over a transform grid. The result is concave with slopes in Δ_n
/// and dominates h (f_{P[h]} ≥ f_h).
pub fn project(
    h: &InvariantMetric,
    resolution: usize,
    opts: &TransformOptions,
) -> Result<InvariantMetric> {
    let grid = transform_grid(h, resolution, opts)?;
    let points = grid.points();
    let pieces: Vec<Piece> = points
        .iter()
        .zip(&grid.values)
        .map(|(p, &v)| Piece {
            a: grid.coordinates(p),
            c: -v,
        })
        .collect();
    Ok(InvariantMetric::envelope_from_support(h.dim(), pieces))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{random_admissible, InvariantMetric};

    fn opts() -> TransformOptions {
        TransformOptions::default()
    }

    #[test]
    fn canonical_transform_vanishes_on_the_simplex() {
        for n in [1usize, 2, 3] {
            let h = InvariantMetric::canonical(n);
            let m = 6;
            for p in lattice_points(n, m) {
                let x: Vec<f64> = p
                    .components()
                    .iter()
                    .map(|&j| j as f64 / m as f64)
                    .collect();
                let v = transform(&h, &x, &opts()).unwrap();
                assert!(v.abs() <= 1e-9, "n={n} x={x:?} v={v}");
            }
        }
    }

    #[test]
    fn constant_shift_law() {
        let h = InvariantMetric::canonical(1);
        let shifted = h.scale((2.0f64).exp()).unwrap(); // f + 1
        for x in [0.0, 0.25, 0.5, 1.0] {
            let v = transform(&shifted, &[x], &opts()).unwrap();
            assert!((v + 1.0).abs() < 1e-9, "x={x} v={v}");
        }
    }

    #[test]
    fn fubini_study_transform_matches_entropy() {
        let h = InvariantMetric::fubini_study(1);
        for x in [0.0, 0.1, 0.25, 0.5, 0.77, 1.0] {
            let v = transform(&h, &[x], &opts()).unwrap();
            let expect = fs_transform_entropy(&[x]);
            assert!((v - expect).abs() < 1e-8, "x={x} v={v} expect={expect}");
        }
        let h2 = InvariantMetric::fubini_study(2);
        for x in [[0.2, 0.3], [0.0, 0.5], [0.4, 0.6], [1.0, 0.0], [0.1, 0.05]] {
            let v = transform(&h2, &x, &opts()).unwrap();
            let expect = fs_transform_entropy(&x);
            assert!((v - expect).abs() < 1e-7, "x={x:?} v={v} expect={expect}");
        }
    }

    #[test]
    fn transform_rejects_points_outside_the_simplex() {
        let h = InvariantMetric::fubini_study(2);
        assert!(transform(&h, &[0.7, 0.7], &opts()).is_err());
        assert!(transform(&h, &[-0.1, 0.3], &opts()).is_err());
    }

    #[test]
    fn grid_lex_rank_agrees_with_enumeration_order() {
        let count = lattice_points(2, 5).len();
        let grid = FenchelGrid {
            n: 2,
            resolution: 5,
            values: vec![0.0; count],
            flags: vec![PointFlag::Converged; count],
        };
        for (i, p) in lattice_points(2, 5).iter().enumerate() {
            assert_eq!(grid.rank(p.components()), i);
        }
        let count3 = lattice_points(3, 4).len();
        let grid3 = FenchelGrid {
            n: 3,
            resolution: 4,
            values: vec![0.0; count3],
            flags: vec![PointFlag::Converged; count3],
        };
        for (i, p) in lattice_points(3, 4).iter().enumerate() {
            assert_eq!(grid3.rank(p.components()), i);
        }
    }

    #[test]
    fn grid_json_round_trip() {
        let h = InvariantMetric::fubini_study(1);
        let grid = transform_grid(&h, 8, &opts()).unwrap();
        let json = grid.to_json();
        let back = FenchelGrid::from_json(&json).unwrap();
        assert_eq!(back.values, grid.values);
        assert_eq!(back.resolution, 8);
    }

    #[test]
    fn integrate_entropy_over_unit_interval() {
        let h = InvariantMetric::fubini_study(1);
        let grid = transform_grid(&h, 512, &opts()).unwrap();
        let (value, err) = integrate_over_simplex(&grid);
        assert!((value - 0.25).abs() < 1e-6, "value={value} err={err}");
        // zero integrand integrates to zero
        let hc = InvariantMetric::canonical(2);
        let grid = transform_grid(&hc, 16, &opts()).unwrap();
        let (value, _) = integrate_over_simplex(&grid);
        assert!(value.abs() < 1e-10);
        // constant grid on Δ_2 integrates to the simplex volume times it
        let count = lattice_points(2, 8).len();
        let const_grid = FenchelGrid {
            n: 2,
            resolution: 8,
            values: vec![1.0; count],
            flags: vec![PointFlag::Converged; count],
        };
        let (value, _) = integrate_over_simplex(&const_grid);
        assert!((value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn grids_of_dominated_metrics_are_nonnegative_and_concave() {
        let h = random_admissible(21, 2, 5);
        let grid = transform_grid(&h, 24, &opts()).unwrap();
        for &v in &grid.values {
            assert!(v >= -1e-9, "f̌ must be nonnegative when h ≤ h_∞, got {v}");
        }
        // discrete midpoint concavity along the first axis
        for k in 0..=20usize {
            for j in 0..=(22 - k) {
                let a = grid.value_at(&[j, k]);
                let b = grid.value_at(&[j + 1, k]);
                let c = grid.value_at(&[j + 2, k]);
                assert!(b >= 0.5 * (a + c) - 1e-6, "kink at j={j} k={k}");
            }
        }
    }

    #[test]
    fn fenchel_young_inequality_on_samples() {
        let h = random_admissible(3, 2, 5);
        let o = opts();
        let mut rng = crate::rng::SplitMix64::new(17);
        for _ in 0..40 {
            let x = rng.next_simplex_point(2);
            let u = [rng.next_range(-5.0, 5.0), rng.next_range(-5.0, 5.0)];
            let fv = h.eval(&u);
            let tv = transform(&h, &x, &o).unwrap();
            let young = x[0] * u[0] + x[1] * u[1] - fv - tv;
            assert!(young >= -1e-9, "violation {young}");
        }
    }

    #[test]
    fn order_reversal_for_dominated_metrics() {
        let fs = InvariantMetric::fubini_study(1);
        let canonical = InvariantMetric::canonical(1);
        let o = opts();
        for i in 0..=8 {
            let x = [i as f64 / 8.0];
            let a = transform(&fs, &x, &o).unwrap();
            let b = transform(&canonical, &x, &o).unwrap();
            assert!(a >= b - 1e-9, "f ≤ g must flip to f̌ ≥ ǧ");
        }
    }

    #[test]
    fn biconjugate_recovers_concave_potentials() {
        let o = opts();
        let h = InvariantMetric::canonical(1);
        for u in [[-2.0], [0.0], [1.5]] {
            let v = biconjugate(&h, &u, &o).unwrap();
            assert!((v - h.eval(&u)).abs() < 1e-6, "u={u:?} v={v}");
        }
        let fs = InvariantMetric::fubini_study(1);
        let v = biconjugate(&fs, &[0.0], &o).unwrap();
        assert!((v + 0.5 * (2.0f64).ln()).abs() < 1e-6, "v={v}");
    }

    #[test]
    fn biconjugate_dominates_nonconcave_potentials() {
        // f = min(0,u) - bump: non-concave; the envelope must dominate f
        let bump = |u: f64| 0.4 * (-(u - 0.8) * (u - 0.8) / 0.1).exp();
        let h = InvariantMetric::custom(1, "bump", move |u: &[f64]| u[0].min(0.0) - bump(u[0]));
        let o = opts();
        for i in -8..=8 {
            let u = [i as f64 * 0.35];
            let env = biconjugate(&h, &u, &o).unwrap();
            assert!(env >= h.eval(&u) - 1e-9, "envelope below f at {u:?}");
        }
    }

    #[test]
    fn projection_fixes_the_builtin_metrics() {
        let o = opts();
        // the canonical potential is already a lower envelope over the grid
        // (the simplex vertices are grid points), so P[h_∞] = h_∞ exactly
        let canonical = InvariantMetric::canonical(1);
        let p = project(&canonical, 16, &o).unwrap();
        for i in -10..=10 {
            let u = [i as f64 * 0.7];
            assert!((p.eval(&u) - canonical.eval(&u)).abs() <= 1e-9, "u={u:?}");
        }
        // Fubini-Study is concave with admissible slopes: fixed up to the
        // envelope discretization, which coarsens where the active slope
        // approaches the simplex boundary (|u| large)
        let fs = InvariantMetric::fubini_study(1);
        let p = project(&fs, 128, &o).unwrap();
        for i in -10..=10 {
            let u = [i as f64 * 0.5];
            let drift = (p.eval(&u) - fs.eval(&u)).abs();
            let allowed = if u[0].abs() <= 1.5 { 1e-4 } else { 5e-3 };
            assert!(drift <= allowed, "drift {drift} at {u:?}");
            assert!(p.eval(&u) >= fs.eval(&u) - 1e-9);
        }
    }

    #[test]
    fn scaled_metric_shifts_the_whole_grid() {
        let h = InvariantMetric::fubini_study(1);
        let t = 3.0f64;
        let scaled = h.scale(t).unwrap();
        let o = opts();
        let base = transform_grid(&h, 16, &o).unwrap();
        let shifted = transform_grid(&scaled, 16, &o).unwrap();
        for (a, b) in base.values.iter().zip(&shifted.values) {
            assert!((b - (a - 0.5 * t.ln())).abs() < 1e-9);
        }
    }

    #[test]
    fn biconjugate_values_are_midpoint_concave() {
        // biconjugation lands on concave functions even from non-concave f
        let bump = |u: f64| 0.5 * (-(u + 0.6) * (u + 0.6) / 0.2).exp();
        let h = InvariantMetric::custom(1, "dent", move |u: &[f64]| u[0].min(0.0) - bump(u[0]));
        let o = opts();
        let values: Vec<f64> = (-8..=8)
            .map(|i| biconjugate(&h, &[i as f64 * 0.4], &o).unwrap())
            .collect();
        for w in values.windows(3) {
            assert!(w[1] >= 0.5 * (w[0] + w[2]) - 1e-6, "kink the wrong way: {w:?}");
        }
    }

    #[test]
    fn projection_is_idempotent_and_dominating() {
        let h = random_admissible(9, 1, 4);
        let o = opts();
        let p1 = project(&h, 64, &o).unwrap();
        // domination of the original potential
        for i in -12..=12 {
            let u = [i as f64 * 0.5];
            assert!(p1.eval(&u) >= h.eval(&u) - 1e-8, "u={u:?}");
        }
        // idempotence: projecting the projection changes the potential by
        // no more than the grid/transform error
        let p2 = project(&p1, 64, &o).unwrap();
        for i in -12..=12 {
            let u = [i as f64 * 0.5];
            let drift = (p2.eval(&u) - p1.eval(&u)).abs();
            assert!(drift <= 1e-6, "drift {drift} at {u:?}");
        }
    }
}
