//! Monomial L² norms ⟨z^ν, z^ν⟩ against the canonical volume form (chart by
//! chart over the compact covering) and against the Fubini-Study volume.
//!
//! Torus invariance reduces every chart integral from 2n real dimensions to
//! an n-dimensional integral over the unit cube in squared-radius
//! coordinates s_k = |y_k|². We substitute s = σ² and work in log
//! coordinates, so integrands are evaluated as exp(Σ exponents·log σ + 2m·f)
//! with no overflow near σ = 0 and Gauss-Legendre nodes never touching the
//! singular faces.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::InvariantMetric;
use crate::quad;
use crate::simplex::{lattice_points, LatticePoint};

/// Which volume form the L² pairing integrates against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VolumeSelector {
    Canonical,
    FubiniStudy,
}

/// Node counts for the norm quadratures.
#[derive(Debug, Clone, Copy)]
pub struct NormQuadrature {
    /// Gauss-Legendre points per dimension on each canonical chart.
    pub chart_nodes: usize,
    /// tanh-sinh levels per dimension for the Fubini-Study and adjoint
    /// integrals over [0,∞)^n (node count is 2·levels+1).
    pub fs_levels: usize,
}

impl Default for NormQuadrature {
    fn default() -> Self {
        Self {
            chart_nodes: 32,
            fs_levels: 40,
        }
    }
}

/// One computed monomial norm with its per-chart breakdown.
#[derive(Debug, Clone, Serialize)]
pub struct MonomialNorm {
    pub nu: Vec<usize>,
    pub m: usize,
    pub selector: VolumeSelector,
    pub value: f64,
    pub error_estimate: f64,
    /// n+1 chart contributions for the canonical form, a single entry for
    /// the Fubini-Study form.
    pub chart_contributions: Vec<f64>,
}

/// ⟨z^ν, z^ν⟩ for the metric weight e^{2mψ_h} against the selected volume.
pub fn monomial_norm(
    h: &InvariantMetric,
    m: usize,
    nu: &[usize],
    selector: VolumeSelector,
    quad_cfg: &NormQuadrature,
) -> Result<MonomialNorm> {
    let n = h.dim();
    LatticePoint::new(nu.to_vec(), m)?;
    if nu.len() != n {
        return Err(Error::Domain(format!(
            "exponent length {} does not match metric dimension {n}",
            nu.len()
        )));
    }
    match selector {
        VolumeSelector::Canonical => {
            let coarse = canonical_chart_contributions(h, m, nu, quad_cfg.chart_nodes / 2);
            let fine = canonical_chart_contributions(h, m, nu, quad_cfg.chart_nodes);
            let value: f64 = fine.iter().sum();
            let coarse_value: f64 = coarse.iter().sum();
            Ok(MonomialNorm {
                nu: nu.to_vec(),
                m,
                selector,
                value,
                error_estimate: (value - coarse_value).abs(),
                chart_contributions: fine,
            })
        }
        VolumeSelector::FubiniStudy => {
            let coarse = fs_weighted_integral(h, m, nu, quad_cfg.fs_levels / 2);
            let fine = fs_weighted_integral(h, m, nu, quad_cfg.fs_levels);
            Ok(MonomialNorm {
                nu: nu.to_vec(),
                m,
                selector,
                value: fine,
                error_estimate: (fine - coarse).abs(),
                chart_contributions: vec![fine],
            })
        }
    }
}

/// Chart-j integral over the unit polydisk in squared-radius coordinates.
/// On chart j ≠ 0 the affine coordinates satisfy u_j = (1/2)·log s_j and
/// u_k = (1/2)·log(s_j/s_k); the monomial contributes Σ_{k≠j} ν_k·log s_k
/// minus Σν·log s_j.
fn canonical_chart_contributions(
    h: &InvariantMetric,
    m: usize,
    nu: &[usize],
    nodes: usize,
) -> Vec<f64> {
    let n = h.dim();
    let rule = quad::gauss_legendre(nodes.max(4));
    let total_degree: usize = nu.iter().sum();
    let mut contributions = Vec::with_capacity(n + 1);
    for chart in 0..=n {
        let mut u = vec![0.0; n];
        let value = quad::integrate_unit_cube(&rule, n, |sigma, _| {
            // log s_k = 2·log σ_k; jacobian ds = Π 2σ_k dσ
            let mut exponent = 0.0;
            if chart == 0 {
                for k in 0..n {
                    let log_s = 2.0 * sigma[k].ln();
                    u[k] = -0.5 * log_s;
                    exponent += nu[k] as f64 * log_s + (2.0 * sigma[k]).ln();
                }
            } else {
                let j = chart - 1;
                let log_sj = 2.0 * sigma[j].ln();
                for k in 0..n {
                    let log_s = 2.0 * sigma[k].ln();
                    if k == j {
                        u[k] = 0.5 * log_s;
                        exponent -= total_degree as f64 * log_s;
                    } else {
                        u[k] = 0.5 * (log_sj - log_s);
                        exponent += nu[k] as f64 * log_s;
                    }
                    exponent += (2.0 * sigma[k]).ln();
                }
            }
            (exponent + 2.0 * m as f64 * h.eval(&u)).exp()
        });
        contributions.push(value);
    }
    contributions
}

/// Fubini-Study-volume integral over [0,∞)^n mapped to the unit cube by
/// s = σ/(1-σ); the density is n!/(1+Σs)^{n+1} and the weight e^{2m·f}.
fn fs_weighted_integral(h: &InvariantMetric, m: usize, nu: &[usize], levels: usize) -> f64 {
    let n = h.dim();
    let rule = quad::tanh_sinh(levels.max(10));
    let log_factorial: f64 = (1..=n).map(|k| (k as f64).ln()).sum();
    let mut u = vec![0.0; n];
    quad::integrate_unit_cube(&rule, n, |sigma, sigma_c| {
        let mut exponent = log_factorial;
        let mut total_s = 1.0;
        for k in 0..n {
            let log_s = sigma[k].ln() - sigma_c[k].ln();
            total_s += sigma[k] / sigma_c[k];
            u[k] = -0.5 * log_s;
            exponent += nu[k] as f64 * log_s;
            // jacobian ds/dσ = 1/(1-σ)²
            exponent -= 2.0 * sigma_c[k].ln();
        }
        exponent -= (n as f64 + 1.0) * total_s.ln();
        (exponent + 2.0 * m as f64 * h.eval(&u)).exp()
    })
}

/// Plain adjoint pairing ∫ |z^ν|²·e^{2mψ_h} with no volume density (the
/// canonical-bundle metric cancels it). Convergent for Σν ≤ m - n - 1, and
/// for n = 1 also on the printed exponent set Σν ≤ m - 2.
pub fn adjoint_weighted_integral(
    h: &InvariantMetric,
    m: usize,
    nu: &[usize],
    levels: usize,
) -> Result<f64> {
    let n = h.dim();
    let total: usize = nu.iter().sum();
    if n >= 2 && total + n + 1 > m {
        return Err(Error::Domain(format!(
            "adjoint pairing diverges for ν = {nu:?} with m = {m} in dimension {n}"
        )));
    }
    let rule = quad::tanh_sinh(levels.max(10));
    let mut u = vec![0.0; n];
    Ok(quad::integrate_unit_cube(&rule, n, |sigma, sigma_c| {
        let mut exponent = 0.0;
        for k in 0..n {
            let log_s = sigma[k].ln() - sigma_c[k].ln();
            u[k] = -0.5 * log_s;
            exponent += nu[k] as f64 * log_s - 2.0 * sigma_c[k].ln();
        }
        (exponent + 2.0 * m as f64 * h.eval(&u)).exp()
    }))
}

/// Exact closed form for the canonical metric h_∞:
/// Π_k 1/(1+ν_k) + Σ_{j=1}^n [1/(1+m-Σν)]·Π_{k≠j} 1/(1+ν_k).
pub fn monomial_norm_canonical_closed_form(
    n: usize,
    m: usize,
    nu: &[usize],
) -> Result<BigRational> {
    LatticePoint::new(nu.to_vec(), m)?;
    if nu.len() != n {
        return Err(Error::Domain("exponent length mismatch".into()));
    }
    let total: usize = nu.iter().sum();
    let big = |v: usize| BigRational::from_integer(BigInt::from(v as i64));
    let mut product = BigRational::one();
    for &v in nu {
        product /= big(1 + v);
    }
    let mut sum = product.clone();
    let tail = BigRational::one() / big(1 + m - total);
    for j in 0..n {
        let mut term = tail.clone();
        for (k, &v) in nu.iter().enumerate() {
            if k != j {
                term /= big(1 + v);
            }
        }
        sum += term;
    }
    Ok(sum)
}

/// Closed form for the Fubini-Study pairing of z^ν with weight e^{2mψ_FS}:
/// n!·Πν_k!·(m-|ν|)!/(m+n)!.
pub fn monomial_norm_fs_closed_form(n: usize, m: usize, nu: &[usize]) -> Result<BigRational> {
    LatticePoint::new(nu.to_vec(), m)?;
    let total: usize = nu.iter().sum();
    let fact = |v: usize| -> BigRational {
        let mut acc = BigInt::one();
        for i in 1..=v {
            acc *= BigInt::from(i as i64);
        }
        BigRational::from_integer(acc)
    };
    let mut value = fact(n) * fact(m - total);
    for &v in nu {
        value *= fact(v);
    }
    Ok(value / fact(m + n))
}

/// CSV table for a batch of monomial norms: columns
/// `nu, chart_0..chart_n, value, err`.
pub fn monomial_norms_csv(norms: &[MonomialNorm]) -> String {
    let charts = norms.iter().map(|n| n.chart_contributions.len()).max().unwrap_or(1);
    let mut out = String::from("nu");
    for j in 0..charts {
        out.push_str(&format!(",chart_{j}"));
    }
    out.push_str(",value,err
");
    for norm in norms {
        let nu: Vec<String> = norm.nu.iter().map(|v| v.to_string()).collect();
        out.push_str(&format!("\"({})\"", nu.join(" ")));
        for j in 0..charts {
            match norm.chart_contributions.get(j) {
                Some(c) => out.push_str(&format!(",{c}")),
                None => out.push(','),
            }
        }
        out.push_str(&format!(",{},{}
", norm.value, norm.error_estimate));
    }
    out
}

/// Σ_{ν∈P_m} log⟨z^ν,z^ν⟩ — the log of the (diagonal) Gram determinant of
/// the monomial basis of H⁰(O(m)).
pub fn log_l2_volume(
    h: &InvariantMetric,
    m: usize,
    selector: VolumeSelector,
    quad_cfg: &NormQuadrature,
) -> Result<f64> {
    Ok(log_l2_volume_detailed(h, m, selector, quad_cfg)?.0)
}

/// As `log_l2_volume`, also returning the per-monomial norms in
/// lexicographic ν order and the summed relative error estimate.
pub fn log_l2_volume_detailed(
    h: &InvariantMetric,
    m: usize,
    selector: VolumeSelector,
    quad_cfg: &NormQuadrature,
) -> Result<(f64, Vec<MonomialNorm>, f64)> {
    let n = h.dim();
    let points = lattice_points(n, m);
    let norms: Result<Vec<MonomialNorm>> = points
        .par_iter()
        .map(|p| monomial_norm(h, m, p.components(), selector, quad_cfg))
        .collect();
    let norms = norms?;
    let mut total = 0.0;
    let mut err = 0.0;
    for norm in &norms {
        if !(norm.value > 0.0) {
            return Err(Error::Accuracy {
                context: format!("monomial norm for ν = {:?}", norm.nu),
                best: norm.value,
                error_bound: norm.error_estimate,
            });
        }
        total += norm.value.ln();
        err += norm.error_estimate / norm.value;
    }
    Ok((total, norms, err))
}
