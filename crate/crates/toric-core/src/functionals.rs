//! The canonical functional V_{∞,m}, its explicit bound constant c_m, the
//! per-monomial margins, Berman-style energy functionals, the comparison
//! bound, and the mixed Bott-Chern coefficients q_k.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::canonical::{
    adjoint_weighted_integral, log_l2_volume_detailed, monomial_norm, NormQuadrature,
    VolumeSelector,
};
use crate::error::{Error, Result};
use crate::fenchel::{integrate_over_simplex, transform, transform_grid, FenchelGrid, TransformOptions};
use crate::metrics::{is_dominated, InvariantMetric};
use crate::quad;
use crate::report::{FunctionalReport, QuadratureMeta, ReportInputs};
use crate::simplex::{binomial, cell_partition, lattice_points, rational_to_f64, Cell};

/// Shared numerical configuration for functional evaluations.
#[derive(Debug, Clone, Copy)]
pub struct Engine {
    pub transform: TransformOptions,
    pub norms: NormQuadrature,
    /// Gauss-Legendre points per dimension for cell averages of f̌.
    pub cell_nodes: usize,
    /// Grid resolution is factor·m, clamped per dimension and forced even.
    pub grid_factor: usize,
    pub grid_floors: [usize; 3],
    pub grid_caps: [usize; 3],
    /// (cell resolution, Gauss-Legendre points per dimension) for direct
    /// integration of f̌ over Δ_n in the energy and mixed-coefficient paths.
    pub direct_integration: [(usize, usize); 3],
    pub domination_budget: usize,
}

impl Default for Engine {
    fn default() -> Self {
        Self {
            transform: TransformOptions::default(),
            norms: NormQuadrature::default(),
            cell_nodes: 8,
            grid_factor: 16,
            grid_floors: [512, 32, 8],
            grid_caps: [1024, 48, 12],
            direct_integration: [(64, 8), (6, 6), (3, 4)],
            domination_budget: 1500,
        }
    }
}

impl Engine {
    pub fn grid_resolution(&self, n: usize, m: usize) -> usize {
        let cap = self.grid_caps[(n - 1).min(2)];
        let floor = self.grid_floors[(n - 1).min(2)];
        let mut res = (self.grid_factor * m.max(1)).clamp(floor, cap);
        if res % 2 == 1 {
            res += 1;
        }
        res
    }

    pub fn direct_scheme(&self, n: usize) -> (usize, usize) {
        self.direct_integration[(n - 1).min(2)]
    }
}

/// ∫_{Δ_n} f̌_h by composite Gauss-Legendre over the cell decomposition with
/// the transform evaluated directly at interior nodes. Sharper than the
/// grid-composite rule near ∂Δ_n, where f̌ has x·log x behaviour; used for
/// the energy and mixed-coefficient integrals.
pub fn integrate_transform_direct(h: &InvariantMetric, engine: &Engine) -> Result<f64> {
    let n = h.dim();
    let (res, gl) = engine.direct_scheme(n);
    let scheme = crate::simplex::simplex_quadrature_with(n, res, gl)?;
    let values: Result<Vec<f64>> = scheme
        .nodes
        .par_iter()
        .map(|x| transform(h, x, &engine.transform))
        .collect();
    Ok(values?
        .iter()
        .zip(&scheme.weights)
        .map(|(v, w)| v * w)
        .sum())
}

fn big_int(v: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(v as i64))
}

// ---------------------------------------------------------------------------
// The weight polynomial R_ν
// ---------------------------------------------------------------------------

/// R_ν(x) = (1 - Σν + m·Σx)·Π_k(1 + ν_k - m·x_k); equal to 1 at x = ν/m and
/// positive on the open cell.
#[derive(Debug, Clone)]
pub struct RnuPolynomial {
    pub nu: Vec<usize>,
    pub m: usize,
}

impl RnuPolynomial {
    pub fn new(nu: &[usize], m: usize) -> Self {
        Self {
            nu: nu.to_vec(),
            m,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let m = self.m as f64;
        let total: usize = self.nu.iter().sum();
        let lead = 1.0 - total as f64 + m * x.iter().sum::<f64>();
        let mut prod = lead;
        for (k, &v) in self.nu.iter().enumerate() {
            prod *= 1.0 + v as f64 - m * x[k];
        }
        prod
    }
}

// ---------------------------------------------------------------------------
// The functional V and its bound constant
// ---------------------------------------------------------------------------

/// m^{n+1}·∫_{Δ_n} f̌ — the Bott-Chern integral of the m-th power pair.
pub fn bott_chern_integral(m: usize, grid: &FenchelGrid) -> f64 {
    let (integral, _) = integrate_over_simplex(grid);
    (m as f64).powi(grid.n as i32 + 1) * integral
}

fn inputs_for(h: &InvariantMetric, m: Option<usize>, selector: Option<&str>) -> ReportInputs {
    ReportInputs {
        metric: h.digest(),
        n: h.dim(),
        m,
        selector: selector.map(|s| s.to_string()),
    }
}

/// V_{∞,m}(h) = Σ_ν log⟨z^ν,z^ν⟩ + 2·m^{n+1}·∫f̌_h, with a fresh transform
/// grid at the engine's default resolution.
pub fn compute_v(h: &InvariantMetric, m: usize, engine: &Engine) -> Result<FunctionalReport> {
    let grid = transform_grid(h, engine.grid_resolution(h.dim(), m), &engine.transform)?;
    compute_v_with_grid(h, m, engine, &grid)
}

/// As `compute_v` but reusing a precomputed grid of f̌_h (the grid does not
/// depend on m).
pub fn compute_v_with_grid(
    h: &InvariantMetric,
    m: usize,
    engine: &Engine,
    grid: &FenchelGrid,
) -> Result<FunctionalReport> {
    if m < 1 {
        return Err(Error::Domain("V requires m ≥ 1".into()));
    }
    let (log_l2, _norms, norm_err) =
        log_l2_volume_detailed(h, m, VolumeSelector::Canonical, &engine.norms)?;
    let (integral, integral_err) = integrate_over_simplex(grid);
    let bott_chern = (m as f64).powi(h.dim() as i32 + 1) * integral;
    let value = log_l2 + 2.0 * bott_chern;
    let mut report = FunctionalReport::new("vfun", inputs_for(h, Some(m), Some("canonical")), value);
    report.push_term("log_l2_volume", log_l2);
    report.push_term("bott_chern_times_two", 2.0 * bott_chern);
    report.quadrature = QuadratureMeta {
        scheme: format!(
            "charts gl{} / grid M={} composite+richardson",
            engine.norms.chart_nodes, grid.resolution
        ),
        grid_resolution: Some(grid.resolution),
        error_estimate: Some(
            norm_err + 2.0 * (m as f64).powi(h.dim() as i32 + 1) * integral_err.max(0.0),
        ),
    };
    Ok(report)
}

/// The explicit constant c_m = -Σ_ν avg_{Δ_{n,ν}}(log R_ν) + C(n+m,n)·log(n+1),
/// with the degenerate cells contributing zero by the point-evaluation
/// convention. Exact cell volumes; the averages come from 1-D reductions
/// accurate to ~1e-13.
pub fn compute_c_m(n: usize, m: usize) -> FunctionalReport {
    let cells = cell_partition(n, m);
    let mut total = 0.0;
    let mut degenerate = 0usize;
    let mut breakdown = Vec::new();
    for cell in &cells {
        if cell.is_degenerate() {
            degenerate += 1;
            continue;
        }
        let avg = cell.average_log_weight();
        breakdown.push((format!("nu={:?}", cell.exponent().components()), avg));
        total -= avg;
    }
    let count = binomial(n + m, n) as f64;
    let value = total + count * ((n + 1) as f64).ln();
    let inputs = ReportInputs {
        metric: "none".into(),
        n,
        m: Some(m),
        selector: None,
    };
    let mut report = FunctionalReport::new("cm", inputs, value);
    report.breakdown = breakdown;
    report
        .breakdown
        .push(("degenerate_cells_contribution".into(), 0.0));
    report.quadrature = QuadratureMeta {
        scheme: "exact volumes + 1-D slab reductions".into(),
        grid_resolution: None,
        error_estimate: Some(1e-12 * count),
    };
    report.notes.push(format!(
        "{degenerate} degenerate cells enter by point evaluation at ν/m where R_ν = 1"
    ));
    report
}

/// Plain value of c_m.
pub fn c_m_value(n: usize, m: usize) -> f64 {
    compute_c_m(n, m).value
}

/// Average of f̌_h over one cell (point evaluation at ν/m for degenerate
/// cells).
pub fn cell_average_transform(
    h: &InvariantMetric,
    cell: &Cell,
    engine: &Engine,
) -> Result<f64> {
    if cell.is_degenerate() {
        return transform(h, &cell.anchor(), &engine.transform);
    }
    let rule = quad::gauss_legendre(engine.cell_nodes);
    let mut failure: Option<Error> = None;
    let avg = cell.average(&rule, |x| match transform(h, x, &engine.transform) {
        Ok(v) => v,
        Err(e) => {
            failure = Some(e);
            f64::NAN
        }
    })?;
    match failure {
        Some(e) => Err(e),
        None => Ok(avg),
    }
}

/// Per-monomial inequality report for ν ∈ P_m:
/// log⟨z^ν,z^ν⟩ ≤ -2m·avg(f̌) - avg(log R_ν) + log(n+1).
/// `value` is the left side, `bound` the right side.
pub fn nu_margin(
    h: &InvariantMetric,
    m: usize,
    nu: &[usize],
    engine: &Engine,
) -> Result<FunctionalReport> {
    nu_margin_for_volume(h, m, nu, engine, VolumeSelector::Canonical)
}

/// As `nu_margin` with a volume selector for the norm side. The bound is the
/// canonical-volume inequality; with the Fubini-Study volume it remains valid
/// on the line, where ω_FS ≤ ω_∞ pointwise.
pub fn nu_margin_for_volume(
    h: &InvariantMetric,
    m: usize,
    nu: &[usize],
    engine: &Engine,
    selector: VolumeSelector,
) -> Result<FunctionalReport> {
    let n = h.dim();
    if selector == VolumeSelector::FubiniStudy && n > 1 {
        return Err(Error::Domain(
            "the per-monomial bound against the Fubini-Study volume is only valid for n = 1"
                .into(),
        ));
    }
    let cell = Cell::new(n, m, nu)?;
    let avg_transform = cell_average_transform(h, &cell, engine)?;
    let avg_log_weight = cell.average_log_weight();
    let norm = monomial_norm(h, m, nu, selector, &engine.norms)?;
    let value = norm.value.ln();
    let bound = -2.0 * m as f64 * avg_transform - avg_log_weight + ((n + 1) as f64).ln();
    let selector_name = match selector {
        VolumeSelector::Canonical => "canonical",
        VolumeSelector::FubiniStudy => "fubini_study",
    };
    let mut report =
        FunctionalReport::new("nu", inputs_for(h, Some(m), Some(selector_name)), value)
            .with_bound(bound);
    report.push_term("avg_transform", avg_transform);
    report.push_term("avg_log_weight", avg_log_weight);
    report.push_term("log_norm", value);
    report.quadrature = QuadratureMeta {
        scheme: format!(
            "cell gl{} transforms / charts gl{}",
            engine.cell_nodes, engine.norms.chart_nodes
        ),
        grid_resolution: None,
        error_estimate: Some(norm.error_estimate / norm.value.max(1e-300)),
    };
    if cell.is_degenerate() {
        report
            .flags
            .push("degenerate-cell-point-evaluation".into());
    }
    report.notes.push(format!("nu={nu:?}"));
    Ok(report)
}

/// All per-monomial margins (bound - value) in lexicographic ν order.
pub fn nu_margins_all(h: &InvariantMetric, m: usize, engine: &Engine) -> Result<Vec<f64>> {
    nu_margins_all_for_volume(h, m, engine, VolumeSelector::Canonical)
}

pub fn nu_margins_all_for_volume(
    h: &InvariantMetric,
    m: usize,
    engine: &Engine,
    selector: VolumeSelector,
) -> Result<Vec<f64>> {
    lattice_points(h.dim(), m)
        .par_iter()
        .map(|p| {
            let r = nu_margin_for_volume(h, m, p.components(), engine, selector)?;
            Ok(r.margin.expect("nu reports carry a bound"))
        })
        .collect()
}

/// The main inequality V_{∞,m}(h) ≤ c_m for h ≤ h_∞, with hypothesis
/// evidence from the sampling-based domination check.
pub fn verify_main_bound(
    h: &InvariantMetric,
    m: usize,
    engine: &Engine,
) -> Result<FunctionalReport> {
    let grid = transform_grid(h, engine.grid_resolution(h.dim(), m), &engine.transform)?;
    verify_main_bound_with_grid(h, m, engine, &grid)
}

/// As `verify_main_bound`, reusing a precomputed transform grid (the grid is
/// m-independent, so one grid serves a whole m range).
pub fn verify_main_bound_with_grid(
    h: &InvariantMetric,
    m: usize,
    engine: &Engine,
    grid: &FenchelGrid,
) -> Result<FunctionalReport> {
    let n = h.dim();
    let v_report = compute_v_with_grid(h, m, engine, grid)?;
    let c_m = c_m_value(n, m);
    let margins = nu_margins_all(h, m, engine)?;
    let min_margin = margins.iter().copied().fold(f64::INFINITY, f64::min);
    let check = is_dominated(h, &InvariantMetric::canonical(n), engine.domination_budget);

    let mut report = FunctionalReport::new(
        "main-bound",
        inputs_for(h, Some(m), Some("canonical")),
        v_report.value,
    )
    .with_bound(c_m);
    report.push_term("v", v_report.value);
    report.push_term("c_m", c_m);
    report.push_term("min_nu_margin", min_margin);
    report.quadrature = v_report.quadrature.clone();
    if !check.dominated {
        report.flags.push("hypothesis-failed".into());
        if let Some((u, fh, finf)) = check.witness {
            report.notes.push(format!(
                "domination witness: f({u:?}) = {fh} > f_inf = {finf}"
            ));
        }
    } else {
        report.notes.push(format!(
            "h ≤ h_inf sampled on {} grid points",
            check.points_checked
        ));
    }
    if m < 2 {
        report.flags.push("below-stated-regime-m2".into());
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Energy and the Berman-style functionals
// ---------------------------------------------------------------------------

/// Aubin-Mabuchi-type energy difference (1/V)·[∫f̌_h - ∫f̌_{h0}] with
/// V = Vol(Δ_n) = 1/n!.
pub fn energy(h: &InvariantMetric, h0: &InvariantMetric, engine: &Engine) -> Result<f64> {
    let n = h.dim();
    let a = integrate_transform_direct(h, engine)?;
    let b = integrate_transform_direct(h0, engine)?;
    let factorial: f64 = (1..=n).map(|k| k as f64).product();
    Ok(factorial * (a - b))
}

/// Which monomial exponent set the Berman functionals sum over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExponentSet {
    /// P_{m-2}, exactly as printed in the comparison display.
    Displayed,
    /// P_{m-n-1}, the adjoint-bundle dimension count.
    Geometric,
}

impl ExponentSet {
    pub fn degree(&self, n: usize, m: usize) -> Option<usize> {
        match self {
            ExponentSet::Displayed => m.checked_sub(2),
            ExponentSet::Geometric => m.checked_sub(n + 1),
        }
    }
}

/// Which pairing the Berman L-functional uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BermanPairing {
    /// ⟨z^ν,z^ν⟩ against the Fubini-Study volume with weight e^{2mψ_h}
    /// (the displayed formula).
    FsVolume,
    /// Adjoint pairing with no volume density (the canonical-bundle metric
    /// cancels it). Requires the geometric exponent set for n ≥ 2.
    Adjoint,
}

fn berman_exponents(n: usize, m: usize, set: ExponentSet) -> Result<Vec<Vec<usize>>> {
    let degree = set.degree(n, m).ok_or_else(|| {
        Error::EmptyExponentSet(format!("m = {m} too small for {set:?} in dimension {n}"))
    })?;
    Ok(lattice_points(n, degree)
        .into_iter()
        .map(|p| p.components().to_vec())
        .collect())
}

/// L = -(1/N)·Σ_{ν∈S} log⟨z^ν,z^ν⟩ with the configured exponent set and
/// pairing; the weight is always e^{2mψ_h}.
pub fn berman_l(
    h: &InvariantMetric,
    m: usize,
    engine: &Engine,
    set: ExponentSet,
    pairing: BermanPairing,
) -> Result<f64> {
    let n = h.dim();
    if pairing == BermanPairing::Adjoint && set == ExponentSet::Displayed && n >= 2 {
        return Err(Error::Domain(
            "adjoint pairing needs the geometric exponent set for n ≥ 2".into(),
        ));
    }
    let exponents = berman_exponents(n, m, set)?;
    let count = exponents.len() as f64;
    let total: Result<f64> = exponents
        .par_iter()
        .map(|nu| {
            let value = match pairing {
                BermanPairing::FsVolume => {
                    monomial_norm(h, m, nu, VolumeSelector::FubiniStudy, &engine.norms)?.value
                }
                BermanPairing::Adjoint => {
                    adjoint_weighted_integral(h, m, nu, engine.norms.fs_levels)?
                }
            };
            Ok(value.ln())
        })
        .sum();
    Ok(-total? / count)
}

/// The displayed comparison functional:
/// F(h) = (1/N)·Σ_{ν∈S} log⟨z^ν,z^ν⟩_{FS,h^m} + (1/V(O(m)))·m^{n+1}·[∫f̌_h - ∫f̌_FS]
/// with V(O(m)) = m^n/n! and N = |S|.
pub fn berman_f(
    h: &InvariantMetric,
    m: usize,
    engine: &Engine,
    set: ExponentSet,
) -> Result<FunctionalReport> {
    let n = h.dim();
    let log_gram_normalized = -berman_l(h, m, engine, set, BermanPairing::FsVolume)?;
    let (res, _) = engine.direct_scheme(n);
    let int_h = integrate_transform_direct(h, engine)?;
    let fs = InvariantMetric::fubini_study(n);
    let int_fs = integrate_transform_direct(&fs, engine)?;
    let factorial: f64 = (1..=n).map(|k| k as f64).product();
    let volume_om = (m as f64).powi(n as i32) / factorial;
    let energy_term = (m as f64).powi(n as i32 + 1) * (int_h - int_fs) / volume_om;
    let value = log_gram_normalized + energy_term;
    let mut report = FunctionalReport::new("berman-f", inputs_for(h, Some(m), Some("fubini_study")), value);
    report.push_term("normalized_log_gram", log_gram_normalized);
    report.push_term("energy_term", energy_term);
    report.quadrature = QuadratureMeta {
        scheme: format!("fs ts{} / direct simplex gl at res {res}", engine.norms.fs_levels),
        grid_resolution: Some(res),
        error_estimate: None,
    };
    report.notes.push(format!("exponent set {set:?}"));
    Ok(report)
}

/// Integerized Stirling-type threshold test:
/// n!·C(n+m-2,n)·m^{n+1} ≤ 2·(m-2)^{n+1}·m^n.
pub fn stirling_condition_holds(n: usize, m: usize) -> bool {
    if m < 3 {
        return false;
    }
    let factorial: u128 = (1..=n as u128).product();
    let lhs = factorial * binomial(n + m - 2, n) * (m as u128).pow(n as u32 + 1);
    let rhs = 2 * ((m - 2) as u128).pow(n as u32 + 1) * (m as u128).pow(n as u32);
    lhs <= rhs
}

/// Smallest m ≥ 3 passing the Stirling condition (direct scan).
pub fn smallest_stirling_m(n: usize) -> usize {
    (3..).find(|&m| stirling_condition_holds(n, m)).expect(
        "the ratio tends to 2/e^n < 2, so the condition eventually holds",
    )
}

/// sup over a radial grid of the density ratio ω_FS^n / ω_∞^n
/// = n!·max(1,|z|)^{2(n+1)}/(1+Σ|z_k|²)^{n+1}; equals 1 for n = 1 and n!
/// in general (attained at the origin).
pub fn density_ratio_sup(n: usize, samples: usize) -> f64 {
    let factorial: f64 = (1..=n).map(|k| k as f64).product();
    let mut sup = f64::NEG_INFINITY;
    for i in 0..=samples {
        let r = 16.0 * i as f64 / samples as f64;
        // along one axis and along the diagonal
        for pattern in [1usize, n] {
            let maxmod = r.max(1.0);
            let denom = 1.0 + pattern as f64 * r * r;
            let ratio = factorial * maxmod.powi(2 * (n as i32 + 1)) / denom.powi(n as i32 + 1);
            if ratio > sup {
                sup = ratio;
            }
        }
    }
    sup
}

/// Comparison check F(h) ≤ (1/C(n+m-2,n))·V_{∞,m-2}(h) + log t₀ for
/// h ≤ h_∞ and m above the Stirling threshold.
pub fn comparison_bound_check(
    h: &InvariantMetric,
    m: usize,
    engine: &Engine,
) -> Result<FunctionalReport> {
    let n = h.dim();
    if m < 3 {
        return Err(Error::Domain("comparison needs m ≥ 3".into()));
    }
    let f_report = berman_f(h, m, engine, ExponentSet::Displayed)?;
    let v_report = compute_v(h, m - 2, engine)?;
    let t0 = density_ratio_sup(n, 4096);
    let coefficient = 1.0 / binomial(n + m - 2, n) as f64;
    let rhs = coefficient * v_report.value + t0.ln();
    let mut report = FunctionalReport::new(
        "berman",
        inputs_for(h, Some(m), Some("fubini_study")),
        f_report.value,
    )
    .with_bound(rhs);
    report.push_term("berman_f", f_report.value);
    report.push_term("v_m_minus_2_normalized", coefficient * v_report.value);
    report.push_term("log_t0", t0.ln());
    report.quadrature = f_report.quadrature.clone();
    if !stirling_condition_holds(n, m) {
        report.flags.push("below-stirling-threshold".into());
    }
    let check = is_dominated(h, &InvariantMetric::canonical(n), engine.domination_budget);
    if !check.dominated {
        report.flags.push("hypothesis-failed".into());
    }
    report
        .notes
        .push(format!("smallest Stirling m for n={n}: {}", smallest_stirling_m(n)));
    Ok(report)
}

// ---------------------------------------------------------------------------
// Mixed Bott-Chern coefficients
// ---------------------------------------------------------------------------

/// Output of the mixed-coefficient computation: q = ∫f̌_h and the q_k with
/// G(M) = Σ_k q_k·M^k/k!.
#[derive(Debug, Clone)]
pub struct MixedCoefficients {
    pub q: f64,
    /// q_0, …, q_n.
    pub q_coeffs: Vec<f64>,
    /// G(0), …, G(n) used for the interpolation.
    pub g_values: Vec<f64>,
    pub grid_resolution: usize,
}

/// Direct evaluation of
/// G(M) = (1+M)^{n+1}·[∫((f_h + M·f_0)/(1+M))̌ - ∫((f_∞ + M·f_0)/(1+M))̌].
pub fn mixed_g(
    h: &InvariantMetric,
    h0: &InvariantMetric,
    mix_weight: usize,
    engine: &Engine,
) -> Result<f64> {
    let n = h.dim();
    let canonical = InvariantMetric::canonical(n);
    let m = mix_weight as f64;
    let build = |base: &InvariantMetric| -> Result<InvariantMetric> {
        if mix_weight == 0 {
            Ok(base.clone())
        } else {
            InvariantMetric::mix(
                vec![(1.0 / (1.0 + m), base.clone()), (m / (1.0 + m), h0.clone())],
                0.0,
            )
        }
    };
    let int_h = integrate_transform_direct(&build(h)?, engine)?;
    let int_inf = integrate_transform_direct(&build(&canonical)?, engine)?;
    Ok((1.0 + m).powi(n as i32 + 1) * (int_h - int_inf))
}

/// Interpolate G at M = 0..n and solve for the coefficients q_k/k!
/// (Newton divided differences expanded exactly in rationals over the
/// floating G values). Also returns q = ∫f̌_h.
pub fn mixed_q(
    h: &InvariantMetric,
    h0: &InvariantMetric,
    engine: &Engine,
) -> Result<MixedCoefficients> {
    let n = h.dim();
    let (res, _) = engine.direct_scheme(n);
    let g_values: Result<Vec<f64>> = (0..=n)
        .into_par_iter()
        .map(|mw| mixed_g(h, h0, mw, engine))
        .collect();
    let g_values = g_values?;
    let alpha = monomial_coefficients_from_integer_nodes(&g_values);
    let mut q_coeffs = Vec::with_capacity(n + 1);
    let mut factorial = BigRational::one();
    for (k, a) in alpha.iter().enumerate() {
        if k > 0 {
            factorial *= big_int(k);
        }
        q_coeffs.push(rational_to_f64(&(a * &factorial)));
    }
    let q = integrate_transform_direct(h, engine)?;
    Ok(MixedCoefficients {
        q,
        q_coeffs,
        g_values,
        grid_resolution: res,
    })
}

/// Monomial coefficients of the unique degree-≤k polynomial through
/// (i, values[i]) for i = 0..k, via exact divided differences.
fn monomial_coefficients_from_integer_nodes(values: &[f64]) -> Vec<BigRational> {
    let k = values.len();
    let mut table: Vec<BigRational> = values
        .iter()
        .map(|&v| BigRational::from_float(v).unwrap_or_else(BigRational::zero))
        .collect();
    // divided differences over nodes 0,1,…,k-1
    for level in 1..k {
        for i in (level..k).rev() {
            let denom = big_int(level);
            table[i] = (table[i].clone() - table[i - 1].clone()) / denom.clone();
        }
    }
    // expand Newton form Σ dd_j Π_{i<j}(x - i)
    let mut coeffs = vec![BigRational::zero(); k];
    let mut basis = vec![BigRational::one()]; // Π_{i<j}(x-i), starts as 1
    for (j, dd) in table.iter().enumerate() {
        for (power, b) in basis.iter().enumerate() {
            coeffs[power] += dd * b;
        }
        if j + 1 < k {
            // multiply basis by (x - j)
            let mut next = vec![BigRational::zero(); basis.len() + 1];
            for (power, b) in basis.iter().enumerate() {
                next[power + 1] += b;
                next[power] -= b * big_int(j);
            }
            basis = next;
        }
    }
    coeffs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{random_admissible, random_admissible_below};

    fn engine() -> Engine {
        Engine::default()
    }

    #[test]
    fn rnu_is_one_at_the_anchor() {
        let r = RnuPolynomial::new(&[1, 2], 5);
        assert!((r.eval(&[0.2, 0.4]) - 1.0).abs() < 1e-12);
        // positive on the open cell
        assert!(r.eval(&[0.25, 0.45]) > 0.0);
    }

    #[test]
    fn c_m_oracle_values_on_the_line() {
        // c_1 = -(2ln2-2) + 2ln2 = 2
        let c1 = c_m_value(1, 1);
        assert!((c1 - 2.0).abs() < 1e-10, "c1={c1}");
        // c_2 = 4 - ln 2
        let c2 = c_m_value(1, 2);
        let expect = 4.0 - (2.0f64).ln();
        assert!((c2 - expect).abs() < 1e-10, "c2={c2}");
    }

    #[test]
    fn c_m_oracle_value_on_the_plane() {
        // hand-reduced: c_2(n=2) = -[avg_full + 2·avg_triangle] + 6·ln3 with
        // avg_full = (9/2)ln3 - 4ln2 - 7/2 and avg_triangle = -1/2
        let c = c_m_value(2, 2);
        let avg_full = 4.5 * (3.0f64).ln() - 4.0 * (2.0f64).ln() - 3.5;
        let expect = -(avg_full + 2.0 * (-0.5)) + 6.0 * (3.0f64).ln();
        assert!((c - expect).abs() < 1e-10, "c={c} expect={expect}");
    }

    #[test]
    fn c_m_dominates_the_trivial_bracket() {
        // log R_ν ≤ 0 on every cell, so c_m ≥ C(n+m,n)·log(n+1)
        for n in 1..=3usize {
            for m in 1..=4usize {
                let c = c_m_value(n, m);
                let bracket = binomial(n + m, n) as f64 * ((n + 1) as f64).ln();
                assert!(c >= bracket - 1e-9, "n={n} m={m} c={c} bracket={bracket}");
            }
        }
    }

    #[test]
    fn v_oracle_for_the_canonical_metric() {
        let e = engine();
        let h = InvariantMetric::canonical(1);
        let v1 = compute_v(&h, 1, &e).unwrap();
        assert!((v1.value - 2.0 * (1.5f64).ln()).abs() < 1e-8, "{}", v1.value);
        let v2 = compute_v(&h, 2, &e).unwrap();
        assert!(
            (v2.value - 2.0 * (4.0f64 / 3.0).ln()).abs() < 1e-8,
            "{}",
            v2.value
        );
        // both below their constants
        assert!(v1.value <= c_m_value(1, 1));
        assert!(v2.value <= c_m_value(1, 2));
    }

    #[test]
    fn v_oracle_for_the_fubini_study_metric() {
        // hand integration on the line: the m=1 norms are both
        // ∫₀¹ ds/(1+s) + ∫₀¹ s ds/(1+s) = 1, and ∫f̌_FS = 1/4, so V_1 = 1/2;
        // at m=2 the norms are 2-2ln2, 2ln2-1, 2-2ln2 and V_2 follows
        let e = engine();
        let fs = InvariantMetric::fubini_study(1);
        let v1 = compute_v(&fs, 1, &e).unwrap().value;
        assert!((v1 - 0.5).abs() < 1e-6, "v1={v1}");
        let v2 = compute_v(&fs, 2, &e).unwrap().value;
        let ln2 = (2.0f64).ln();
        let expect = 2.0 * (2.0 - 2.0 * ln2).ln() + (2.0 * ln2 - 1.0).ln() + 4.0;
        assert!((v2 - expect).abs() < 1e-6, "v2={v2} expect={expect}");
    }

    #[test]
    fn berman_f_reduces_to_the_gram_term_at_the_base_metric() {
        // at h = h_FS the energy term vanishes and F is the normalized
        // log-Gram of the Dirichlet norms ν!(m-ν)!·n!/(m+n)!
        let e = engine();
        let fs = InvariantMetric::fubini_study(1);
        let m = 6;
        let report = berman_f(&fs, m, &e, ExponentSet::Displayed).unwrap();
        let energy_term = report
            .breakdown
            .iter()
            .find(|(k, _)| k == "energy_term")
            .map(|(_, v)| *v)
            .unwrap();
        assert!(energy_term.abs() < 1e-9, "energy term {energy_term}");
        let mut expect = 0.0;
        for nu in 0..=(m - 2) {
            let exact = crate::canonical::monomial_norm_fs_closed_form(1, m, &[nu]).unwrap();
            expect += rational_to_f64(&exact).ln();
        }
        expect /= (m - 1) as f64;
        assert!((report.value - expect).abs() < 1e-8, "{} vs {expect}", report.value);
    }

    #[test]
    fn bott_chern_integral_for_fs_is_quarter_times_m_pow() {
        let e = engine();
        let fs = InvariantMetric::fubini_study(1);
        let grid = transform_grid(&fs, 512, &e.transform).unwrap();
        let bc = bott_chern_integral(2, &grid);
        assert!((bc - 1.0).abs() < 1e-5, "bc={bc}");
    }

    #[test]
    fn nu_margin_examples_on_the_line() {
        let e = engine();
        let h = InvariantMetric::canonical(1);
        let r0 = nu_margin(&h, 1, &[0], &e).unwrap();
        let expect = (2.0 - (2.0f64).ln()) - (1.5f64).ln();
        assert!((r0.margin.unwrap() - expect).abs() < 1e-8, "{:?}", r0.margin);
        let r1 = nu_margin(&h, 1, &[1], &e).unwrap();
        let expect = (2.0f64).ln() - (1.5f64).ln();
        assert!((r1.margin.unwrap() - expect).abs() < 1e-8, "{:?}", r1.margin);
        assert!(r1.flags.iter().any(|f| f.contains("degenerate")));
    }

    #[test]
    fn main_bound_margin_for_canonical_metric() {
        let e = engine();
        let h = InvariantMetric::canonical(1);
        let report = verify_main_bound(&h, 2, &e).unwrap();
        let expect = (4.0 - (2.0f64).ln()) - 2.0 * (4.0f64 / 3.0).ln();
        assert!(
            (report.margin.unwrap() - expect).abs() < 1e-7,
            "{:?}",
            report.margin
        );
        assert!(!report.flags.iter().any(|f| f == "hypothesis-failed"));
    }

    #[test]
    fn main_bound_flags_scaled_up_metrics() {
        let e = engine();
        let h = InvariantMetric::canonical(1).scale(10.0).unwrap();
        let report = verify_main_bound(&h, 2, &e).unwrap();
        assert!(report.flags.iter().any(|f| f == "hypothesis-failed"));
    }

    #[test]
    fn energy_examples() {
        let e = engine();
        let fs = InvariantMetric::fubini_study(1);
        let canonical = InvariantMetric::canonical(1);
        assert!(energy(&fs, &fs, &e).unwrap().abs() < 1e-12);
        let v = energy(&fs, &canonical, &e).unwrap();
        assert!((v - 0.25).abs() < 1e-5, "v={v}");
        // cocycle with a third metric
        let g = random_admissible(4, 1, 3);
        let e12 = energy(&fs, &g, &e).unwrap();
        let e23 = energy(&g, &canonical, &e).unwrap();
        assert!((e12 + e23 - v).abs() < 1e-9);
    }

    #[test]
    fn berman_l_displayed_values_on_the_line() {
        let e = engine();
        let fs = InvariantMetric::fubini_study(1);
        // displayed pairing at n=1, m=3, S = P_1: norms 1/4 and 1/12
        let l = berman_l(&fs, 3, &e, ExponentSet::Displayed, BermanPairing::FsVolume).unwrap();
        let expect = -0.5 * ((0.25f64).ln() + (1.0f64 / 12.0).ln());
        assert!((l - expect).abs() < 1e-8, "l={l} expect={expect}");
        // adjoint pairing: the two norms are equal (both 1/2)
        let l = berman_l(&fs, 3, &e, ExponentSet::Displayed, BermanPairing::Adjoint).unwrap();
        let expect = -(0.5f64).ln();
        assert!((l - expect).abs() < 1e-8, "l={l}");
        // empty set
        assert!(berman_l(&fs, 1, &e, ExponentSet::Displayed, BermanPairing::FsVolume).is_err());
        // geometric set shrinks with n
        assert_eq!(ExponentSet::Geometric.degree(2, 5), Some(2));
    }

    #[test]
    fn berman_l_scales_by_m_log_t() {
        let e = engine();
        let h = InvariantMetric::fubini_study(1);
        let t = 1.9f64;
        let m = 4;
        let base = berman_l(&h, m, &e, ExponentSet::Displayed, BermanPairing::FsVolume).unwrap();
        let scaled = berman_l(
            &h.scale(t).unwrap(),
            m,
            &e,
            ExponentSet::Displayed,
            BermanPairing::FsVolume,
        )
        .unwrap();
        assert!((scaled - base + m as f64 * t.ln()).abs() < 1e-9);
    }

    #[test]
    fn stirling_scan_matches_hand_computation() {
        assert!(!stirling_condition_holds(1, 5));
        assert!(stirling_condition_holds(1, 6));
        assert_eq!(smallest_stirling_m(1), 6);
        assert!(smallest_stirling_m(2) >= 3);
    }

    #[test]
    fn density_ratio_sup_is_factorial() {
        assert!((density_ratio_sup(1, 512) - 1.0).abs() < 1e-9);
        assert!((density_ratio_sup(2, 512) - 2.0).abs() < 1e-9);
    }

    #[test]
    fn mixed_q_vanishes_when_h_equals_h0_canonical_side() {
        // with h = h0 = h_∞ formally, all mixtures coincide so every G(M)=0
        let e = engine();
        let canonical = InvariantMetric::canonical(1);
        let mq = mixed_q(&canonical, &canonical, &e).unwrap();
        for (k, &qk) in mq.q_coeffs.iter().enumerate() {
            assert!(qk.abs() < 1e-8, "q_{k} = {qk}");
        }
        assert!(mq.q.abs() < 1e-9);
    }

    #[test]
    fn mixed_q_bounds_and_holdout_for_a_sandwiched_metric() {
        let e = engine();
        let fs = InvariantMetric::fubini_study(1);
        let h = random_admissible_below(&fs, 11, 3).unwrap();
        let mq = mixed_q(&h, &fs, &e).unwrap();
        assert!(mq.q > 0.0);
        // q_0 ≤ q and q_1 ≤ 1!·2²·q
        assert!(mq.q_coeffs[0] <= mq.q + 1e-9, "{} vs {}", mq.q_coeffs[0], mq.q);
        assert!(mq.q_coeffs[1] <= 4.0 * mq.q + 1e-9);
        // held-out interpolation at M = n+1
        let n = 1;
        let direct = mixed_g(&h, &fs, n + 1, &e).unwrap();
        let mut predicted = 0.0;
        let mut factorial = 1.0;
        for (k, &qk) in mq.q_coeffs.iter().enumerate() {
            if k > 0 {
                factorial *= k as f64;
            }
            predicted += qk / factorial * ((n + 1) as f64).powi(k as i32);
        }
        let rel = (predicted - direct).abs() / direct.abs().max(1e-12);
        assert!(rel < 1e-3, "predicted={predicted} direct={direct}");
    }

    #[test]
    fn divided_difference_expansion_is_exact_for_polynomials() {
        // p(x) = 2 - x + 3x² sampled at 0,1,2
        let values = [2.0, 4.0, 12.0];
        let coeffs = monomial_coefficients_from_integer_nodes(&values);
        let as_f64: Vec<f64> = coeffs.iter().map(rational_to_f64).collect();
        assert_eq!(as_f64, vec![2.0, -1.0, 3.0]);
    }
}
