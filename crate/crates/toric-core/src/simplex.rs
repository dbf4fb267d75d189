//! Lattice points of m·Δ_n, the induced cell partition of the standard
//! simplex, exact cell volumes, and the compact chart covering of projective
//! space used for canonical-volume integration.
//!
//! Cell volumes are computed by inclusion-exclusion over the unit cube in
//! exact rational arithmetic; floats appear only at the API boundary. Cell
//! quadrature works in the local coordinates t = m·x − ν where the cell
//! becomes `[0,1]^n ∩ {Σt ≤ c}` with integer cut `c = min(m − Σν, n)`, so the
//! region is a full box, a corner simplex (c = 1), or a box minus a reflected
//! corner simplex (c = n − 1).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::quad::{self, Rule1d};

/// Binomial coefficient as u128; panics on overflow (desk scale only).
pub fn binomial(a: usize, b: usize) -> u128 {
    if b > a {
        return 0;
    }
    let b = b.min(a - b);
    let mut acc: u128 = 1;
    for i in 0..b {
        acc = acc * (a - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// A lattice exponent ν ∈ N^n with Σν ≤ m.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePoint {
    nu: Vec<usize>,
    m: usize,
}

impl LatticePoint {
    pub fn new(nu: Vec<usize>, m: usize) -> Result<Self> {
        let total: usize = nu.iter().sum();
        if total > m {
            return Err(Error::Domain(format!(
                "exponent {nu:?} has degree {total} > bound {m}"
            )));
        }
        Ok(Self { nu, m })
    }

    pub fn components(&self) -> &[usize] {
        &self.nu
    }

    pub fn degree(&self) -> usize {
        self.nu.iter().sum()
    }

    pub fn degree_bound(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.nu.len()
    }
}

/// All ν ∈ N^n with Σν ≤ m, in lexicographic order. Exactly C(n+m, n) points.
pub fn lattice_points(n: usize, m: usize) -> Vec<LatticePoint> {
    assert!(n >= 1, "dimension must be positive");
    let mut out = Vec::with_capacity(binomial(n + m, n) as usize);
    let mut current = vec![0usize; n];
    fill_lex(&mut out, &mut current, 0, m);
    out
}

fn fill_lex(out: &mut Vec<LatticePoint>, current: &mut Vec<usize>, pos: usize, budget: usize) {
    if pos == current.len() {
        out.push(LatticePoint {
            nu: current.clone(),
            m: budget + current.iter().sum::<usize>(),
        });
        return;
    }
    for v in 0..=budget {
        current[pos] = v;
        fill_lex(out, current, pos + 1, budget - v);
        current[pos] = 0;
    }
}

fn big(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

/// Volume of `[0,1]^n ∩ {Σt ≤ c}` for integer c, exact:
/// (1/n!)·Σ_{k=0}^{c} (-1)^k C(n,k) (c-k)^n.
pub fn clipped_cube_volume(n: usize, c: usize) -> BigRational {
    let c = c.min(n);
    let mut sum = BigRational::zero();
    for k in 0..=c {
        let term = big(binomial(n, k) as i64) * big((c - k) as i64).pow(n as i32);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    let mut fact = BigRational::one();
    for j in 1..=n {
        fact *= big(j as i64);
    }
    sum / fact
}

/// How a cell sits inside the simplex, in local t-coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellRegion {
    /// Degenerate cell (Σν = m); averages are point evaluations at ν/m.
    Point,
    /// c ≥ n: the box lies inside the simplex.
    FullBox,
    /// c = 1: the region is the unit corner simplex.
    Simplex,
    /// c = n-1: the box minus the reflected corner simplex at (1,…,1).
    BoxMinusSimplex,
    /// 1 < c < n-1 (possible only for n ≥ 4); not quadrature-supported.
    Unsupported,
}

/// One piece Δ_{n,ν} of the cell partition of Δ_n at scale m.
#[derive(Debug, Clone)]
pub struct Cell {
    point: LatticePoint,
    n: usize,
    m: usize,
    cut: usize,
    volume: BigRational,
}

impl Cell {
    pub fn new(n: usize, m: usize, nu: &[usize]) -> Result<Self> {
        if nu.len() != n {
            return Err(Error::Domain(format!(
                "exponent length {} does not match dimension {n}",
                nu.len()
            )));
        }
        if m == 0 {
            return Err(Error::Domain("cell partition needs m ≥ 1".into()));
        }
        let point = LatticePoint::new(nu.to_vec(), m)?;
        let cut = (m - point.degree()).min(n);
        let volume = clipped_cube_volume(n, cut) / big(m as i64).pow(n as i32);
        Ok(Self {
            point,
            n,
            m,
            cut,
            volume,
        })
    }

    pub fn exponent(&self) -> &LatticePoint {
        &self.point
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn scale(&self) -> usize {
        self.m
    }

    /// Integer cut c = min(m - Σν, n).
    pub fn cut(&self) -> usize {
        self.cut
    }

    pub fn is_degenerate(&self) -> bool {
        self.cut == 0
    }

    pub fn volume_exact(&self) -> &BigRational {
        &self.volume
    }

    pub fn volume(&self) -> f64 {
        rational_to_f64(&self.volume)
    }

    /// The cell anchor ν/m (the point-evaluation site for degenerate cells).
    pub fn anchor(&self) -> Vec<f64> {
        self.point
            .components()
            .iter()
            .map(|&v| v as f64 / self.m as f64)
            .collect()
    }

    pub fn region(&self) -> CellRegion {
        match self.cut {
            0 => CellRegion::Point,
            c if c >= self.n => CellRegion::FullBox,
            1 => CellRegion::Simplex,
            c if c == self.n - 1 => CellRegion::BoxMinusSimplex,
            _ => CellRegion::Unsupported,
        }
    }

    /// t-space volume (= m^n times the cell volume), exact then rounded.
    fn local_volume(&self) -> f64 {
        rational_to_f64(&clipped_cube_volume(self.n, self.cut))
    }

    fn x_from_t(&self, t: &[f64], x: &mut [f64]) {
        for (k, xk) in x.iter_mut().enumerate() {
            *xk = (self.point.components()[k] as f64 + t[k]) / self.m as f64;
        }
    }

    /// Average (1/Vol)∫_cell g(x) dx with the supplied 1-D rule tensored over
    /// the cell region; degenerate cells evaluate g at ν/m. Every node stays
    /// strictly inside the cell.
    pub fn average<F: FnMut(&[f64]) -> f64>(&self, rule: &Rule1d, mut g: F) -> Result<f64> {
        let n = self.n;
        let mut x = vec![0.0; n];
        let integral = match self.region() {
            CellRegion::Point => return Ok(g(&self.anchor())),
            CellRegion::FullBox => quad::integrate_unit_cube(rule, n, |t, _| {
                self.x_from_t(t, &mut x);
                g(&x)
            }),
            CellRegion::Simplex => quad::integrate_simplex(rule, n, 1.0, |t| {
                self.x_from_t(t, &mut x);
                g(&x)
            }),
            CellRegion::BoxMinusSimplex => {
                let cube = quad::integrate_unit_cube(rule, n, |t, _| {
                    self.x_from_t(t, &mut x);
                    g(&x)
                });
                let mut t = vec![0.0; n];
                let corner = quad::integrate_simplex(rule, n, 1.0, |s| {
                    for k in 0..n {
                        t[k] = 1.0 - s[k];
                    }
                    self.x_from_t(&t, &mut x);
                    g(&x)
                });
                cube - corner
            }
            CellRegion::Unsupported => {
                return Err(Error::Domain(format!(
                    "cell quadrature for cut {} in dimension {} is not supported (needs n ≤ 3)",
                    self.cut, self.n
                )))
            }
        };
        Ok(integral / self.local_volume())
    }

    /// Average of log R_ν over the cell, where
    /// R_ν(x) = (1 - Σν + mΣx)·Π(1 + ν_k - m·x_k). In local coordinates this
    /// is log(1+Σt) + Σ_k log(1-t_k), so the average reduces to 1-D integrals
    /// against the slab-volume profile of the cube — no multidimensional
    /// quadrature and no cancellation near the singular faces.
    ///
    /// Degenerate cells return 0 (R_ν(ν/m) = 1).
    pub fn average_log_weight(&self) -> f64 {
        if self.is_degenerate() {
            return 0.0;
        }
        let n = self.n;
        let c = self.cut;
        // ∫ log(1+Σt) dt = ∫₀^c log(1+ℓ)·v_n(ℓ) dℓ, v_n the Irwin-Hall density
        let gl = quad::gauss_legendre(64);
        let mut smooth = 0.0;
        for piece in 0..c {
            let a = piece as f64;
            smooth += gl.integrate(|u| {
                let ell = a + u;
                (1.0 + ell).ln() * irwin_hall_density(n, ell)
            });
        }
        // Σ_k ∫ log(1-t_k) dt = n·∫₀^min(1,c) log(1-τ)·V_{n-1}(c-τ) dτ.
        // With τ ∈ [0,1] and c ≥ 1 the profile V_{n-1}(c-τ) is a single
        // polynomial piece, and tanh-sinh absorbs the log endpoint.
        let ts = quad::tanh_sinh(40);
        let mut singular = 0.0;
        for i in 0..ts.len() {
            let tau = ts.nodes[i];
            let from_one = ts.nodes_from_one[i];
            let profile = if n == 1 {
                1.0
            } else {
                clipped_cube_volume_real(n - 1, c as f64 - tau)
            };
            singular += ts.weights[i] * from_one.ln() * profile;
        }
        (smooth + (n as f64) * singular) / self.local_volume()
    }
}

/// Volume of [0,1]^k ∩ {Σt ≤ r} for real r (float evaluation of the
/// inclusion-exclusion formula).
fn clipped_cube_volume_real(k: usize, r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    if r >= k as f64 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 0..=(r.floor() as usize) {
        sum += sign * binomial(k, j) as f64 * (r - j as f64).powi(k as i32);
        sign = -sign;
    }
    let fact: f64 = (1..=k).map(|v| v as f64).product();
    sum / fact
}

/// Irwin-Hall density: d/dℓ Vol([0,1]^n ∩ {Σt ≤ ℓ}).
fn irwin_hall_density(n: usize, ell: f64) -> f64 {
    if ell <= 0.0 || ell >= n as f64 {
        return 0.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 0..=(ell.floor() as usize) {
        sum += sign * binomial(n, j) as f64 * (ell - j as f64).powi(n as i32 - 1);
        sign = -sign;
    }
    let fact: f64 = (1..n.max(1)).map(|v| v as f64).product();
    sum / fact
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    // to_f64 on BigRational is exact-rounding for our magnitudes
    r.to_f64().unwrap_or_else(|| {
        let approx = r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN);
        if r.is_negative() && approx > 0.0 {
            -approx
        } else {
            approx
        }
    })
}

/// The cell partition {Δ_{n,ν} : ν ∈ P_m} in lexicographic ν order.
pub fn cell_partition(n: usize, m: usize) -> Vec<Cell> {
    lattice_points(n, m)
        .into_iter()
        .map(|p| Cell::new(n, m, p.components()).expect("partition exponents are in range"))
        .collect()
}

/// Deterministic quadrature scheme over the standard simplex Δ_n, assembled
/// from the cell partition at scale `resolution` with a Gauss-Legendre tensor
/// rule per cell. Exact for constants by construction (weights per cell sum
/// to the exact cell volume); doubling the resolution halves the step.
#[derive(Debug, Clone)]
pub struct QuadratureScheme {
    pub n: usize,
    pub resolution: usize,
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl QuadratureScheme {
    pub fn integrate<F: FnMut(&[f64]) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, &w)| w * f(x))
            .sum()
    }
}

pub fn simplex_quadrature(n: usize, resolution: usize) -> Result<QuadratureScheme> {
    simplex_quadrature_with(n, resolution, 4)
}

pub fn simplex_quadrature_with(
    n: usize,
    resolution: usize,
    points_per_dim: usize,
) -> Result<QuadratureScheme> {
    if resolution < 1 {
        return Err(Error::Domain("resolution must be ≥ 1".into()));
    }
    let rule = quad::gauss_legendre(points_per_dim);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let scale = (resolution as f64).powi(n as i32);
    for cell in cell_partition(n, resolution) {
        if cell.is_degenerate() {
            continue;
        }
        let mut push = |t: &[f64], w: f64| {
            let mut x = vec![0.0; n];
            cell.x_from_t(t, &mut x);
            nodes.push(x);
            weights.push(w / scale);
        };
        match cell.region() {
            CellRegion::Point => unreachable!(),
            CellRegion::FullBox => {
                let mut t = vec![0.0; n];
                quad::for_each_multi_index(n, rule.len(), |idx| {
                    let mut w = 1.0;
                    for (d, &i) in idx.iter().enumerate() {
                        t[d] = rule.nodes[i];
                        w *= rule.weights[i];
                    }
                    push(&t, w);
                });
            }
            CellRegion::Simplex => {
                collect_simplex_nodes(&rule, n, false, &mut push);
            }
            CellRegion::BoxMinusSimplex => {
                let mut t = vec![0.0; n];
                quad::for_each_multi_index(n, rule.len(), |idx| {
                    let mut w = 1.0;
                    for (d, &i) in idx.iter().enumerate() {
                        t[d] = rule.nodes[i];
                        w *= rule.weights[i];
                    }
                    push(&t, w);
                });
                collect_simplex_nodes(&rule, n, true, &mut push);
            }
            CellRegion::Unsupported => {
                return Err(Error::Domain(format!(
                    "simplex quadrature not supported for n = {n} at this resolution"
                )))
            }
        }
    }
    Ok(QuadratureScheme {
        n,
        resolution,
        nodes,
        weights,
    })
}

/// Duffy nodes for the unit corner simplex; `reflect` maps t ↦ 1−t and
/// negates the weights (used for the box-minus-simplex region).
fn collect_simplex_nodes<F: FnMut(&[f64], f64)>(
    rule: &Rule1d,
    n: usize,
    reflect: bool,
    push: &mut F,
) {
    let mut t = vec![0.0; n];
    quad::for_each_multi_index(n, rule.len(), |idx| {
        let mut w = 1.0;
        let mut jac = 1.0;
        let mut shrink = 1.0;
        for (d, &i) in idx.iter().enumerate() {
            let xi = rule.nodes[i];
            t[d] = xi * shrink;
            w *= rule.weights[i];
            let rem = (n - 1 - d) as i32;
            if rem > 0 {
                jac *= rule.nodes_from_one[i].powi(rem);
            }
            shrink *= rule.nodes_from_one[i];
        }
        if reflect {
            let reflected: Vec<f64> = t.iter().map(|&v| 1.0 - v).collect();
            push(&reflected, -w * jac);
        } else {
            push(&t, w * jac);
        }
    });
}

// ---------------------------------------------------------------------------
// Compact chart covering of P^n
// ---------------------------------------------------------------------------

/// The compact pieces C_0, …, C_n covering P^n, described in the affine
/// moduli |z_1|, …, |z_n| of the chart {x_0 ≠ 0} (with |z_0| = 1 implicit):
/// C_j is where the j-th homogeneous coordinate dominates all others.
#[derive(Debug, Clone, Copy)]
pub struct ChartPiece {
    pub index: usize,
    pub n: usize,
}

impl ChartPiece {
    pub fn new(index: usize, n: usize) -> Result<Self> {
        if index > n {
            return Err(Error::Domain(format!("chart index {index} exceeds n = {n}")));
        }
        Ok(Self { index, n })
    }

    /// Membership test on moduli (boundaries overlap on measure zero).
    pub fn contains(&self, z_abs: &[f64]) -> bool {
        debug_assert_eq!(z_abs.len(), self.n);
        let dom = if self.index == 0 {
            1.0
        } else {
            z_abs[self.index - 1]
        };
        if dom < 1.0 {
            return false;
        }
        z_abs.iter().all(|&zk| zk <= dom)
    }

    /// Chart coordinates: y_k = z_k/z_j for k ≠ j and y_j = 1/z_j (identity
    /// for j = 0), applied to moduli.
    pub fn to_chart_moduli(&self, z_abs: &[f64]) -> Vec<f64> {
        if self.index == 0 {
            return z_abs.to_vec();
        }
        let zj = z_abs[self.index - 1];
        (0..self.n)
            .map(|k| {
                if k + 1 == self.index {
                    1.0 / zj
                } else {
                    z_abs[k] / zj
                }
            })
            .collect()
    }
}

pub fn chart_pieces(n: usize) -> Vec<ChartPiece> {
    (0..=n).map(|j| ChartPiece { index: j, n }).collect()
}
