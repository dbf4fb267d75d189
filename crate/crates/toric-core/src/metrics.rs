//! Torus-invariant continuous metrics on O(1), represented by the concave
//! potential f(u) = log‖·‖(exp(-u)) on R^n.
//!
//! Conventions (used everywhere downstream): f is the *half-log* potential,
//! so h ≤ h' ⇔ f ≤ f', and scaling the metric by t > 0 shifts f by (1/2)log t.
//! The canonical metric has f_∞(u) = min(0, u_1, …, u_n); admissible test
//! families are log-sum-exp smoothings of piecewise-linear concave potentials
//! whose slopes lie in Δ_n.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// One affine piece ⟨a, u⟩ + c with slope a ∈ Δ_n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub a: Vec<f64>,
    pub c: f64,
}

/// Declarative metric description; round-trips bit-exactly through JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricSpec {
    Canonical,
    FubiniStudy,
    PiecewiseLinear {
        pieces: Vec<Piece>,
    },
    LogSumExp {
        pieces: Vec<Piece>,
        p: f64,
        weights: Vec<f64>,
    },
    Scaled {
        base: Box<MetricSpec>,
        t: f64,
    },
    /// Convex combination of potentials plus a constant shift. Used for the
    /// "sandwiched" families h ≤ h_0 ≤ h_∞ in the coefficient suites.
    Mix {
        parts: Vec<(f64, MetricSpec)>,
        shift: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Canonical,
    FubiniStudy,
    PiecewiseLinear,
    LogSumExp,
    Scaled,
    Projected,
    Mixed,
    Custom,
}

#[derive(Clone)]
enum PotentialImpl {
    /// min_i (⟨a_i, u⟩ + c_i); also the representation of projected metrics.
    Affine { pieces: Vec<Piece> },
    /// -(1/2p)·log Σ_i exp(logw_i - 2p(⟨a_i,u⟩ + c_i))
    Lse {
        pieces: Vec<Piece>,
        p: f64,
        logw: Vec<f64>,
    },
    /// Σ w_i f_i(u) + shift with w_i > 0, Σw_i = 1.
    Mix {
        parts: Vec<(f64, Arc<InvariantMetric>)>,
        shift: f64,
    },
    Custom {
        f: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
        label: String,
    },
}

/// A torus-invariant continuous metric, as its potential evaluator.
#[derive(Clone)]
pub struct InvariantMetric {
    n: usize,
    kind: MetricKind,
    potential: PotentialImpl,
    spec: Option<MetricSpec>,
}

impl std::fmt::Debug for InvariantMetric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("InvariantMetric")
            .field("n", &self.n)
            .field("kind", &self.kind)
            .finish()
    }
}

fn canonical_pieces(n: usize) -> Vec<Piece> {
    let mut pieces = vec![Piece {
        a: vec![0.0; n],
        c: 0.0,
    }];
    for k in 0..n {
        let mut a = vec![0.0; n];
        a[k] = 1.0;
        pieces.push(Piece { a, c: 0.0 });
    }
    pieces
}

fn validate_pieces(n: usize, pieces: &[Piece]) -> Result<()> {
    if pieces.is_empty() {
        return Err(Error::Spec("at least one affine piece is required".into()));
    }
    for (i, piece) in pieces.iter().enumerate() {
        if piece.a.len() != n {
            return Err(Error::Spec(format!(
                "piece {i} has slope dimension {} ≠ n = {n}",
                piece.a.len()
            )));
        }
        let sum: f64 = piece.a.iter().sum();
        if piece.a.iter().any(|&v| v < -1e-12) || sum > 1.0 + 1e-12 {
            return Err(Error::Spec(format!(
                "piece {i} slope {:?} is outside the standard simplex",
                piece.a
            )));
        }
        if !piece.c.is_finite() {
            return Err(Error::Spec(format!("piece {i} offset is not finite")));
        }
    }
    Ok(())
}

impl InvariantMetric {
    /// Build the evaluator for a declarative spec.
    pub fn from_spec(n: usize, spec: &MetricSpec) -> Result<Self> {
        let metric = match spec {
            MetricSpec::Canonical => Self {
                n,
                kind: MetricKind::Canonical,
                potential: PotentialImpl::Affine {
                    pieces: canonical_pieces(n),
                },
                spec: Some(spec.clone()),
            },
            MetricSpec::FubiniStudy => Self {
                n,
                kind: MetricKind::FubiniStudy,
                potential: PotentialImpl::Lse {
                    pieces: canonical_pieces(n),
                    p: 1.0,
                    logw: vec![0.0; n + 1],
                },
                spec: Some(spec.clone()),
            },
            MetricSpec::PiecewiseLinear { pieces } => {
                validate_pieces(n, pieces)?;
                Self {
                    n,
                    kind: MetricKind::PiecewiseLinear,
                    potential: PotentialImpl::Affine {
                        pieces: pieces.clone(),
                    },
                    spec: Some(spec.clone()),
                }
            }
            MetricSpec::LogSumExp { pieces, p, weights } => {
                validate_pieces(n, pieces)?;
                if !(*p > 0.0) {
                    return Err(Error::Spec("smoothing p must be positive".into()));
                }
                if weights.len() != pieces.len() {
                    return Err(Error::Spec("one weight per piece required".into()));
                }
                if weights.iter().any(|&w| !(w > 0.0)) {
                    return Err(Error::Spec("weights must be positive".into()));
                }
                Self {
                    n,
                    kind: MetricKind::LogSumExp,
                    potential: PotentialImpl::Lse {
                        pieces: pieces.clone(),
                        p: *p,
                        logw: weights.iter().map(|w| w.ln()).collect(),
                    },
                    spec: Some(spec.clone()),
                }
            }
            MetricSpec::Scaled { base, t } => {
                let base_metric = Self::from_spec(n, base)?;
                return base_metric.scale(*t);
            }
            MetricSpec::Mix { parts, shift } => {
                if parts.is_empty() {
                    return Err(Error::Spec("mix needs at least one part".into()));
                }
                let wsum: f64 = parts.iter().map(|(w, _)| w).sum();
                if parts.iter().any(|(w, _)| !(*w > 0.0)) || (wsum - 1.0).abs() > 1e-9 {
                    return Err(Error::Spec(
                        "mix weights must be positive and sum to one".into(),
                    ));
                }
                let built: Result<Vec<(f64, Arc<InvariantMetric>)>> = parts
                    .iter()
                    .map(|(w, s)| Ok((*w, Arc::new(Self::from_spec(n, s)?))))
                    .collect();
                Self {
                    n,
                    kind: MetricKind::Mixed,
                    potential: PotentialImpl::Mix {
                        parts: built?,
                        shift: *shift,
                    },
                    spec: Some(spec.clone()),
                }
            }
        };
        Ok(metric)
    }

    pub fn canonical(n: usize) -> Self {
        Self::from_spec(n, &MetricSpec::Canonical).expect("canonical spec is valid")
    }

    pub fn fubini_study(n: usize) -> Self {
        Self::from_spec(n, &MetricSpec::FubiniStudy).expect("fubini-study spec is valid")
    }

    /// Wrap an arbitrary potential (used for test functions, e.g. non-concave
    /// starting points for the projection operator).
    pub fn custom<F>(n: usize, label: impl Into<String>, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            n,
            kind: MetricKind::Custom,
            potential: PotentialImpl::Custom {
                f: Arc::new(f),
                label: label.into(),
            },
            spec: None,
        }
    }

    /// Metric whose potential is the piecewise-linear function
    /// min_i(⟨x_i, u⟩ - v_i); this is how projections P[h] are materialized
    /// from a transform grid {(x_i, f̌(x_i))}.
    pub(crate) fn envelope_from_support(n: usize, pieces: Vec<Piece>) -> Self {
        Self {
            n,
            kind: MetricKind::Projected,
            potential: PotentialImpl::Affine { pieces },
            spec: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> MetricKind {
        self.kind
    }

    pub fn spec(&self) -> Option<&MetricSpec> {
        self.spec.as_ref()
    }

    /// Stable identifier for reports: the JSON spec when declarative, a label
    /// otherwise.
    pub fn digest(&self) -> String {
        match (&self.spec, &self.potential) {
            (Some(spec), _) => serde_json::to_string(spec).expect("spec serializes"),
            (None, PotentialImpl::Custom { label, .. }) => format!("custom:{label}"),
            (None, PotentialImpl::Affine { pieces }) => {
                format!("projected:{}pieces", pieces.len())
            }
            _ => "unnamed".into(),
        }
    }

    /// The potential f(u).
    pub fn eval(&self, u: &[f64]) -> f64 {
        debug_assert_eq!(u.len(), self.n);
        match &self.potential {
            PotentialImpl::Affine { pieces } => pieces
                .iter()
                .map(|p| dot(&p.a, u) + p.c)
                .fold(f64::INFINITY, f64::min),
            PotentialImpl::Lse { pieces, p, logw } => {
                let mut best = f64::NEG_INFINITY;
                let mut exponents = Vec::with_capacity(pieces.len());
                for (piece, lw) in pieces.iter().zip(logw) {
                    let e = lw - 2.0 * p * (dot(&piece.a, u) + piece.c);
                    if e > best {
                        best = e;
                    }
                    exponents.push(e);
                }
                let sum: f64 = exponents.iter().map(|e| (e - best).exp()).sum();
                -(best + sum.ln()) / (2.0 * p)
            }
            PotentialImpl::Mix { parts, shift } => {
                parts.iter().map(|(w, m)| w * m.eval(u)).sum::<f64>() + shift
            }
            PotentialImpl::Custom { f, .. } => f(u),
        }
    }

    /// Generators of the superdifferential ∂f(u) (their convex hull is the
    /// full superdifferential). `None` when no oracle is available.
    pub fn supergradient_generators(&self, u: &[f64]) -> Option<Vec<Vec<f64>>> {
        match &self.potential {
            PotentialImpl::Affine { pieces } => {
                let mut best = f64::INFINITY;
                let mut vals = Vec::with_capacity(pieces.len());
                for p in pieces {
                    let v = dot(&p.a, u) + p.c;
                    vals.push(v);
                    if v < best {
                        best = v;
                    }
                }
                let tol = 1e-11 * (1.0 + best.abs());
                Some(
                    pieces
                        .iter()
                        .zip(&vals)
                        .filter(|(_, &v)| v <= best + tol)
                        .map(|(p, _)| p.a.clone())
                        .collect(),
                )
            }
            PotentialImpl::Lse { pieces, p, logw } => {
                let mut best = f64::NEG_INFINITY;
                let mut exponents = Vec::with_capacity(pieces.len());
                for (piece, lw) in pieces.iter().zip(logw) {
                    let e = lw - 2.0 * p * (dot(&piece.a, u) + piece.c);
                    if e > best {
                        best = e;
                    }
                    exponents.push(e);
                }
                let mut grad = vec![0.0; self.n];
                let mut total = 0.0;
                for (piece, e) in pieces.iter().zip(&exponents) {
                    let w = (e - best).exp();
                    total += w;
                    for k in 0..self.n {
                        grad[k] += w * piece.a[k];
                    }
                }
                for g in &mut grad {
                    *g /= total;
                }
                Some(vec![grad])
            }
            PotentialImpl::Mix { parts, .. } => {
                // Minkowski sum of the parts' superdifferentials: generators
                // are all weighted sums of one generator per part.
                let mut acc: Vec<Vec<f64>> = vec![vec![0.0; self.n]];
                for (w, m) in parts {
                    let gens = m.supergradient_generators(u)?;
                    let mut next = Vec::with_capacity(acc.len() * gens.len());
                    for base in &acc {
                        for g in &gens {
                            let mut s = base.clone();
                            for k in 0..self.n {
                                s[k] += w * g[k];
                            }
                            next.push(s);
                        }
                    }
                    acc = next;
                    if acc.len() > 64 {
                        acc.truncate(64);
                    }
                }
                Some(acc)
            }
            PotentialImpl::Custom { .. } => None,
        }
    }

    /// The metric t·h (potential shifted by (1/2)·log t).
    pub fn scale(&self, t: f64) -> Result<Self> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!(
                "scale factor must be positive, got {t}"
            )));
        }
        let spec = self.spec.as_ref().map(|s| MetricSpec::Scaled {
            base: Box::new(s.clone()),
            t,
        });
        Ok(Self {
            n: self.n,
            kind: MetricKind::Scaled,
            potential: PotentialImpl::Mix {
                parts: vec![(1.0, Arc::new(self.clone()))],
                shift: 0.5 * t.ln(),
            },
            spec,
        })
    }

    /// Convex combination Σ w_i f_i + shift of already-built metrics.
    pub fn mix(parts: Vec<(f64, InvariantMetric)>, shift: f64) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::Spec("mix needs at least one part".into()));
        }
        let n = parts[0].1.n;
        if parts.iter().any(|(_, m)| m.n != n) {
            return Err(Error::Spec("mix parts must share the dimension".into()));
        }
        let wsum: f64 = parts.iter().map(|(w, _)| w).sum();
        if parts.iter().any(|(w, _)| !(*w > 0.0)) || (wsum - 1.0).abs() > 1e-9 {
            return Err(Error::Spec(
                "mix weights must be positive and sum to one".into(),
            ));
        }
        let spec = parts
            .iter()
            .map(|(w, m)| m.spec.clone().map(|s| (*w, s)))
            .collect::<Option<Vec<_>>>()
            .map(|parts| MetricSpec::Mix { parts, shift });
        Ok(Self {
            n,
            kind: MetricKind::Mixed,
            potential: PotentialImpl::Mix {
                parts: parts.into_iter().map(|(w, m)| (w, Arc::new(m))).collect(),
                shift,
            },
            spec,
        })
    }

    /// Upper bound for sup_u (f_∞ - f)(u), derivable from the spec structure.
    /// Used to build guaranteed-dominated mixtures. `None` for custom
    /// potentials.
    pub fn canonical_gap_bound(&self) -> Option<f64> {
        match &self.potential {
            PotentialImpl::Affine { pieces } => {
                // f = min ℓ_i ≥ f_∞ + min c_i since ⟨a,u⟩ ≥ f_∞(u) for a ∈ Δ_n
                Some(pieces.iter().map(|p| -p.c).fold(f64::NEG_INFINITY, f64::max))
            }
            PotentialImpl::Lse { pieces, p, logw } => {
                let min_c = pieces.iter().map(|pc| pc.c).fold(f64::INFINITY, f64::min);
                let log_sum_w: f64 = {
                    let m = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    let s: f64 = logw.iter().map(|lw| (lw - m).exp()).sum();
                    m + s.ln()
                };
                // f ≥ ℓ_min - (1/2p)·log Σw ≥ f_∞ + min c - (1/2p)·log Σw
                Some(-min_c + log_sum_w / (2.0 * p))
            }
            PotentialImpl::Mix { parts, shift } => {
                let mut acc = -shift;
                for (w, m) in parts {
                    acc += w * m.canonical_gap_bound()?;
                }
                Some(acc)
            }
            PotentialImpl::Custom { .. } => None,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Outcome of a sampling-based domination check. This is evidence, not a
/// proof: the grid is finite.
#[derive(Debug, Clone)]
pub struct DominationCheck {
    pub dominated: bool,
    pub witness: Option<(Vec<f64>, f64, f64)>,
    pub points_checked: usize,
}

/// Tests f_h ≤ f_h' + 1e-9 on an expanding grid; on failure reports a
/// witness (u, f_h(u), f_h'(u)).
pub fn is_dominated(
    h: &InvariantMetric,
    hp: &InvariantMetric,
    grid_budget: usize,
) -> DominationCheck {
    assert_eq!(h.dim(), hp.dim());
    let n = h.dim();
    let radii = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 50.0];
    let per_radius = (grid_budget / radii.len()).max(1);
    let k = ((per_radius as f64).powf(1.0 / n as f64).round() as usize).clamp(3, 33);
    let mut checked = 0;
    let mut u = vec![0.0; n];
    for &r in &radii {
        let mut worst: Option<(Vec<f64>, f64, f64)> = None;
        let mut idx = vec![0usize; n];
        loop {
            for d in 0..n {
                u[d] = -r + 2.0 * r * idx[d] as f64 / (k - 1) as f64;
            }
            checked += 1;
            let fh = h.eval(&u);
            let fhp = hp.eval(&u);
            if fh > fhp + 1e-9 && worst.as_ref().map_or(true, |w| fh - fhp > w.1 - w.2) {
                worst = Some((u.clone(), fh, fhp));
            }
            let mut d = 0;
            loop {
                if d == n {
                    break;
                }
                idx[d] += 1;
                if idx[d] < k {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
            if d == n {
                break;
            }
        }
        if let Some(w) = worst {
            return DominationCheck {
                dominated: false,
                witness: Some(w),
                points_checked: checked,
            };
        }
    }
    DominationCheck {
        dominated: true,
        witness: None,
        points_checked: checked,
    }
}

/// Seeded admissible metric: a log-sum-exp smoothing of the canonical pieces
/// plus `complexity` random pieces with nonpositive offsets, shifted down by
/// the smoothing overshoot margin (1/2p)·log Σw so that f ≤ f_∞ holds by
/// construction.
pub fn random_admissible(seed: u64, n: usize, complexity: usize) -> InvariantMetric {
    let spec = random_admissible_spec(seed, n, complexity);
    InvariantMetric::from_spec(n, &spec).expect("generated specs are valid")
}

pub fn random_admissible_spec(seed: u64, n: usize, complexity: usize) -> MetricSpec {
    assert!(complexity >= 1, "complexity must be ≥ 1");
    let mut rng = SplitMix64::new(seed);
    let mut pieces = canonical_pieces(n);
    for _ in 0..complexity {
        let a = rng.next_simplex_point(n);
        let c = -rng.next_range(0.1, 2.0);
        pieces.push(Piece { a, c });
    }
    let p = rng.next_range(1.0, 4.0);
    let count = pieces.len() as f64;
    let margin = count.ln() / (2.0 * p);
    for piece in &mut pieces {
        piece.c -= margin;
    }
    let weights = vec![1.0; pieces.len()];
    MetricSpec::LogSumExp { pieces, p, weights }
}

/// Seeded admissible metric guaranteed below `h0`: the equal-weight mixture
/// of f_0 and a random admissible potential, shifted down by half of a
/// certified bound on sup(f_∞ - f_0) ≥ sup(f_rand - f_0).
pub fn random_admissible_below(
    h0: &InvariantMetric,
    seed: u64,
    complexity: usize,
) -> Result<InvariantMetric> {
    let gap = h0
        .canonical_gap_bound()
        .ok_or_else(|| Error::Domain("base metric has no certified canonical gap bound".into()))?;
    let rand = random_admissible(seed, h0.dim(), complexity);
    InvariantMetric::mix(vec![(0.5, h0.clone()), (0.5, rand)], -0.5 * gap)
}

/// Midpoint-concavity spot check on seeded pairs: returns the most negative
/// value of f((u+v)/2) - (f(u)+f(v))/2 observed (≥ -1e-9 expected for
/// concave potentials).
pub fn concavity_margin(h: &InvariantMetric, seed: u64, trials: usize, radius: f64) -> f64 {
    let n = h.dim();
    let mut rng = SplitMix64::new(seed);
    let mut worst = f64::INFINITY;
    for _ in 0..trials {
        let u: Vec<f64> = (0..n).map(|_| rng.next_range(-radius, radius)).collect();
        let v: Vec<f64> = (0..n).map(|_| rng.next_range(-radius, radius)).collect();
        let mid: Vec<f64> = u.iter().zip(&v).map(|(a, b)| 0.5 * (a + b)).collect();
        let margin = h.eval(&mid) - 0.5 * (h.eval(&u) + h.eval(&v));
        if margin < worst {
            worst = margin;
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_potential_values() {
        let h = InvariantMetric::canonical(2);
        assert_eq!(h.eval(&[3.0, 5.0]), 0.0);
        let h1 = InvariantMetric::canonical(1);
        assert_eq!(h1.eval(&[-2.0]), -2.0);
    }

    #[test]
    fn fubini_study_value_at_origin() {
        let h = InvariantMetric::fubini_study(1);
        let expect = -0.5 * (2.0f64).ln();
        assert!((h.eval(&[0.0]) - expect).abs() < 1e-15);
        // closed form everywhere
        let u = [0.7f64];
        let expect = -0.5 * (1.0 + (-2.0 * u[0]).exp()).ln();
        assert!((h.eval(&u) - expect).abs() < 1e-15);
    }

    #[test]
    fn spec_validation_rejects_bad_slopes() {
        let spec = MetricSpec::PiecewiseLinear {
            pieces: vec![Piece {
                a: vec![0.7, 0.7],
                c: 0.0,
            }],
        };
        assert!(InvariantMetric::from_spec(2, &spec).is_err());
        let spec = MetricSpec::LogSumExp {
            pieces: vec![Piece {
                a: vec![0.5],
                c: 0.0,
            }],
            p: -1.0,
            weights: vec![1.0],
        };
        assert!(InvariantMetric::from_spec(1, &spec).is_err());
    }

    #[test]
    fn spec_json_round_trip_is_bit_exact() {
        let spec = random_admissible_spec(99, 2, 5);
        let json = serde_json::to_string(&spec).unwrap();
        let back: MetricSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(spec, back);
        let json2 = serde_json::to_string(&back).unwrap();
        assert_eq!(json, json2);
    }

    #[test]
    fn scaling_shifts_the_potential_by_half_log_t() {
        let h = InvariantMetric::fubini_study(2);
        let t = 2.5;
        let scaled = h.scale(t).unwrap();
        let u = [0.3, -1.2];
        assert!((scaled.eval(&u) - h.eval(&u) - 0.5 * t.ln()).abs() < 1e-15);
        // identity scale
        let same = h.scale(1.0).unwrap();
        assert_eq!(same.eval(&u), h.eval(&u));
        // round trip
        let back = scaled.scale(1.0 / t).unwrap();
        assert!((back.eval(&u) - h.eval(&u)).abs() < 1e-12);
        assert!(h.scale(0.0).is_err());
    }

    #[test]
    fn domination_examples() {
        let fs = InvariantMetric::fubini_study(1);
        let canonical = InvariantMetric::canonical(1);
        assert!(is_dominated(&fs, &canonical, 500).dominated);
        assert!(is_dominated(&canonical, &canonical, 100).dominated);
        // strict shift downward: h_∞ is NOT below (1/2)h_∞
        let half = canonical.scale(0.5).unwrap();
        let check = is_dominated(&canonical, &half, 500);
        assert!(!check.dominated);
        let (u, fh, fhp) = check.witness.unwrap();
        assert!(fh > fhp, "witness at {u:?}");
    }

    #[test]
    fn random_admissible_is_deterministic_and_dominated() {
        for seed in [1u64, 7, 42] {
            for n in [1usize, 2] {
                let a = random_admissible(seed, n, 4);
                let b = random_admissible(seed, n, 4);
                let u = vec![0.37; n];
                assert_eq!(a.eval(&u), b.eval(&u));
                let check = is_dominated(&a, &InvariantMetric::canonical(n), 800);
                assert!(check.dominated, "seed {seed} n {n}: {:?}", check.witness);
            }
        }
        // different seeds give different potentials somewhere on the grid
        let a = random_admissible(1, 1, 4);
        let b = random_admissible(2, 1, 4);
        let differs = (-10..=10).any(|i| {
            let u = [i as f64 * 0.5];
            (a.eval(&u) - b.eval(&u)).abs() > 1e-12
        });
        assert!(differs);
    }

    #[test]
    fn concavity_spot_checks_pass_for_builtins() {
        for metric in [
            InvariantMetric::canonical(2),
            InvariantMetric::fubini_study(2),
            random_admissible(5, 2, 6),
        ] {
            let margin = concavity_margin(&metric, 11, 1000, 20.0);
            assert!(margin >= -1e-9, "margin {margin}");
        }
    }

    #[test]
    fn boundedness_bound_holds_on_grid() {
        let h = random_admissible(12, 2, 5);
        let bound = h.canonical_gap_bound().unwrap();
        let canonical = InvariantMetric::canonical(2);
        for i in -10..=10 {
            for j in -10..=10 {
                let u = [i as f64 * 5.0, j as f64 * 5.0];
                let gap = canonical.eval(&u) - h.eval(&u);
                assert!(gap <= bound + 1e-9, "gap {gap} bound {bound} at {u:?}");
                assert!(gap >= -1e-9, "f must stay below f_∞");
            }
        }
    }

    #[test]
    fn mixtures_below_a_base_metric_stay_below() {
        let h0 = InvariantMetric::fubini_study(2);
        for seed in 0..5u64 {
            let h = random_admissible_below(&h0, seed, 4).unwrap();
            let check = is_dominated(&h, &h0, 800);
            assert!(check.dominated, "seed {seed}: {:?}", check.witness);
        }
    }
}
