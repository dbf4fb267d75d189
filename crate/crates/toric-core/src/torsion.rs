//! Todd-series coefficients, the bound polynomial B(m), the threshold m₀,
//! and the computable part of the torsion-variation upper bound.
//!
//! All series and polynomial arithmetic is exact rational; floats appear
//! only in reports. The metric-independent constant c'_m (canonical-metric
//! torsion plus a Quillen constant) is outside desk-scale computation and is
//! carried symbolically in report notes.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::functionals::{Engine, MixedCoefficients};
use crate::metrics::{is_dominated, InvariantMetric};
use crate::report::{FunctionalReport, QuadratureMeta, ReportInputs};
use crate::simplex::rational_to_f64;

fn big(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// "p/q" form used for rationals in JSON reports.
pub fn rational_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Coefficients b_1, …, b_K of Td(x) = x/(1-e^{-x}) = 1 + b_1·x + b_2·x² + …
#[derive(Debug, Clone)]
pub struct ToddCoefficients {
    /// coeffs[j] = b_j with b_0 = 1.
    coeffs: Vec<BigRational>,
}

impl ToddCoefficients {
    pub fn b(&self, j: usize) -> &BigRational {
        &self.coeffs[j]
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }
}

/// Exact rational inversion of (1-e^{-x})/x = Σ_k (-1)^k x^k/(k+1)!.
pub fn todd_coefficients(order: usize) -> ToddCoefficients {
    assert!(order >= 1);
    // t_k = (-1)^k / (k+1)!
    let mut t = Vec::with_capacity(order + 1);
    let mut factorial = BigRational::one(); // holds (k+1)! in the loop
    for k in 0..=order {
        factorial *= big((k + 1) as i64);
        let mut term = BigRational::one() / factorial.clone();
        if k % 2 == 1 {
            term = -term;
        }
        t.push(term);
    }
    // series inversion: b_0 = 1, b_m = -Σ_{j=1}^m t_j b_{m-j}
    let mut b = vec![BigRational::one()];
    for m in 1..=order {
        let mut acc = BigRational::zero();
        for j in 1..=m {
            acc += t[j].clone() * b[m - j].clone();
        }
        b.push(-acc);
    }
    ToddCoefficients { coeffs: b }
}

/// B(m) = -m^{n+1} + Σ_{j=1}^n 2^{n+1}·|b_{n+1-j}|·m^j, exact coefficients.
#[derive(Debug, Clone)]
pub struct BoundPolynomial {
    pub n: usize,
    /// coeffs[p] multiplies m^p, p = 0, …, n+1.
    coeffs: Vec<BigRational>,
}

impl BoundPolynomial {
    pub fn coefficient(&self, power: usize) -> &BigRational {
        &self.coeffs[power]
    }

    pub fn eval_exact(&self, m: i64) -> BigRational {
        let mut acc = BigRational::zero();
        let mut power = BigRational::one();
        for c in &self.coeffs {
            acc += c * &power;
            power *= big(m);
        }
        acc
    }

    pub fn eval(&self, m: f64) -> f64 {
        let mut acc = 0.0;
        let mut power = 1.0;
        for c in &self.coeffs {
            acc += rational_to_f64(c) * power;
            power *= m;
        }
        acc
    }

    /// Cauchy bound: all real roots lie below 1 + max_j |a_j| / |lead|.
    pub fn root_bound(&self) -> i64 {
        let lead = self.coeffs.last().expect("nonempty").abs();
        let max_ratio = self.coeffs[..self.coeffs.len() - 1]
            .iter()
            .map(|c| c.abs() / lead.clone())
            .fold(BigRational::zero(), |a, b| if b > a { b } else { a });
        let bound = BigRational::one() + max_ratio;
        bound.ceil().to_integer().try_into().unwrap_or(i64::MAX)
    }
}

pub fn bound_polynomial(n: usize) -> BoundPolynomial {
    assert!(n >= 1);
    let todd = todd_coefficients(n);
    let two_pow = big(2).pow(n as i32 + 1);
    let mut coeffs = vec![BigRational::zero(); n + 2];
    for j in 1..=n {
        coeffs[j] = two_pow.clone() * todd.b(n + 1 - j).abs();
    }
    coeffs[n + 1] = -BigRational::one();
    BoundPolynomial { n, coeffs }
}

/// Certified minimal m₀ with B(m) ≤ 0 for every integer m ≥ m₀: B is
/// checked on [m₀, M*] for the Cauchy root bound M*, beyond which the
/// negative leading term has no sign changes left to fight.
#[derive(Debug, Clone)]
pub struct ThresholdCertificate {
    pub m0: usize,
    pub checked_up_to: i64,
    pub value_at_m0: BigRational,
    /// B(m₀ - 1), positive by minimality (None when m₀ = 1).
    pub value_before: Option<BigRational>,
}

pub fn find_m0(n: usize) -> ThresholdCertificate {
    let b = bound_polynomial(n);
    let m_star = b.root_bound().max(2);
    let zero = BigRational::zero();
    let mut m0 = None;
    for m in 1..=m_star {
        if b.eval_exact(m) <= zero && (m..=m_star).all(|k| b.eval_exact(k) <= zero) {
            m0 = Some(m);
            break;
        }
    }
    let m0 = m0.unwrap_or(m_star + 1);
    ThresholdCertificate {
        m0: m0 as usize,
        checked_up_to: m_star,
        value_at_m0: b.eval_exact(m0),
        value_before: (m0 > 1).then(|| b.eval_exact(m0 - 1)),
    }
}

/// The computable part of the torsion-variation bound:
/// Δ(h,m) = -m^{n+1}·q + Σ_{j=1}^n b_j·(q_j/j!)·m^{n+1-j}, together with the
/// relaxed bound Δ̄(m) = B(m)·q. The full statement is
/// -T ≤ c'_m + Δ(h,m) ≤ c'_m + Δ̄(m), with c'_m kept symbolic.
pub fn torsion_variation_bound(
    h: &InvariantMetric,
    m: usize,
    mixed: &MixedCoefficients,
    engine: &Engine,
) -> Result<FunctionalReport> {
    let n = h.dim();
    if mixed.q_coeffs.len() != n + 1 {
        return Err(Error::Domain(format!(
            "mixed coefficients have order {} but the metric has dimension {n}",
            mixed.q_coeffs.len().saturating_sub(1)
        )));
    }
    let todd = todd_coefficients(n);
    let mf = m as f64;
    let mut delta = -mf.powi(n as i32 + 1) * mixed.q;
    let mut factorial = 1.0;
    for j in 1..=n {
        factorial *= j as f64;
        delta += rational_to_f64(todd.b(j)) * (mixed.q_coeffs[j] / factorial)
            * mf.powi((n + 1 - j) as i32);
    }
    let bound_poly = bound_polynomial(n);
    let relaxed = bound_poly.eval(mf) * mixed.q;
    let certificate = find_m0(n);

    let mut report = FunctionalReport::new(
        "torsion",
        ReportInputs {
            metric: h.digest(),
            n,
            m: Some(m),
            selector: None,
        },
        delta,
    )
    .with_bound(relaxed);
    report.push_term("q", mixed.q);
    for (k, &qk) in mixed.q_coeffs.iter().enumerate() {
        report.push_term(format!("q_{k}"), qk);
    }
    report.push_term("bound_polynomial_times_q", relaxed);
    report.quadrature = QuadratureMeta {
        scheme: format!("mixed grids M={}", mixed.grid_resolution),
        grid_resolution: Some(mixed.grid_resolution),
        error_estimate: None,
    };
    report.notes.push(
        "-T((P^n,ω_FS);(O(m),h^m)) ≤ c'_m + Δ(h,m); c'_m is metric-independent and not computed"
            .into(),
    );
    report.notes.push(format!(
        "B(m) ≤ 0 certified for all m ≥ m0 = {} (checked to {}, leading sign beyond)",
        certificate.m0, certificate.checked_up_to
    ));
    if m >= certificate.m0 {
        report.flags.push("m-at-or-above-threshold".into());
    } else {
        report.flags.push("m-below-threshold".into());
    }
    let fs = InvariantMetric::fubini_study(n);
    if !is_dominated(h, &fs, engine.domination_budget).dominated {
        report.flags.push("hypothesis-failed".into());
    }
    Ok(report)
}
