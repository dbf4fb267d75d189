//! Deterministic one-dimensional quadrature rules and the tensor/simplex
//! plumbing built on them.
//!
//! Two node families cover every integrand in this crate:
//! - Gauss-Legendre on (0,1) for smooth integrands (chart integrals, Fenchel
//!   averages). Nodes never touch the endpoints, which matters because the
//!   integrands have unbounded log-derivatives on cell faces.
//! - tanh-sinh (double exponential) on (0,1) for integrands with endpoint
//!   log singularities such as `log R_ν`; it reaches near machine precision
//!   where Gauss-Legendre stalls around 1e-4.

/// A fixed node/weight set on the open interval (0,1).
#[derive(Debug, Clone)]
pub struct Rule1d {
    pub nodes: Vec<f64>,
    /// Distance of each node to the right endpoint, `1 - nodes[i]`, computed
    /// without cancellation. Integrands with a singularity at 1 should use
    /// this instead of recomputing `1 - x`.
    pub nodes_from_one: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule1d {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Gauss-Legendre rule with `k` points, mapped from [-1,1] to [0,1].
/// Nodes by Newton iteration on the Legendre polynomial; deterministic and
/// accurate to ~1e-15 for k up to several hundred.
pub fn gauss_legendre(k: usize) -> Rule1d {
    assert!(k >= 1, "gauss_legendre needs at least one node");
    let mut nodes = vec![0.0; k];
    let mut weights = vec![0.0; k];
    let n = k as f64;
    for i in 0..k {
        // Tricomi-style initial guess, then Newton on P_k.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_and_derivative(k, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_and_derivative(k, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map [-1,1] -> [0,1]; reverse index order so nodes come out ascending
        nodes[k - 1 - i] = 0.5 * (x + 1.0);
        weights[k - 1 - i] = 0.5 * w;
    }
    let nodes_from_one = nodes.iter().map(|&x| 1.0 - x).collect();
    Rule1d {
        nodes,
        nodes_from_one,
        weights,
    }
}

fn legendre_and_derivative(k: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for j in 2..=k {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    if k == 0 {
        return (1.0, 0.0);
    }
    if k == 1 {
        return (x, 1.0);
    }
    let dp = (k as f64) * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// tanh-sinh rule on (0,1): x(τ) = (1 + tanh((π/2)·sinh τ))/2 at τ = j·h,
/// |j| ≤ levels. Truncation T = levels·h is chosen so the closest node sits
/// ~1e-14 from the endpoints, which keeps log singularities finite while the
/// discarded tail mass stays below 1e-13.
pub fn tanh_sinh(levels: usize) -> Rule1d {
    let t_max = 3.0_f64;
    let h = t_max / levels as f64;
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut nodes = Vec::with_capacity(2 * levels + 1);
    let mut nodes_from_one = Vec::with_capacity(2 * levels + 1);
    let mut weights = Vec::with_capacity(2 * levels + 1);
    for j in -(levels as i64)..=(levels as i64) {
        let tau = j as f64 * h;
        let s = half_pi * tau.sinh();
        // x = (1+tanh s)/2 and 1-x computed without cancellation
        let x = 1.0 / (1.0 + (-2.0 * s).exp());
        let from_one = 1.0 / (1.0 + (2.0 * s).exp());
        // dx/dτ = (π/4)·cosh τ · sech²(s)
        let sech = 1.0 / s.cosh();
        let w = h * (half_pi / 2.0) * tau.cosh() * sech * sech;
        if w > 0.0 && x > 0.0 && from_one > 0.0 {
            nodes.push(x);
            nodes_from_one.push(from_one);
            weights.push(w);
        }
    }
    Rule1d {
        nodes,
        nodes_from_one,
        weights,
    }
}

/// Visits every multi-index in {0..k}^n, reusing one scratch buffer.
pub fn for_each_multi_index<F: FnMut(&[usize])>(n: usize, k: usize, mut f: F) {
    let mut idx = vec![0usize; n];
    loop {
        f(&idx);
        let mut d = 0;
        loop {
            if d == n {
                return;
            }
            idx[d] += 1;
            if idx[d] < k {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

/// Tensor-product integral of `f` over (0,1)^n with the same 1-D rule in
/// every direction. `f` receives the node coordinates and their distances to
/// 1 (for singularity-safe evaluation).
pub fn integrate_unit_cube<F>(rule: &Rule1d, n: usize, mut f: F) -> f64
where
    F: FnMut(&[f64], &[f64]) -> f64,
{
    let mut total = 0.0;
    let mut x = vec![0.0; n];
    let mut xc = vec![0.0; n];
    for_each_multi_index(n, rule.len(), |idx| {
        let mut w = 1.0;
        for (d, &i) in idx.iter().enumerate() {
            x[d] = rule.nodes[i];
            xc[d] = rule.nodes_from_one[i];
            w *= rule.weights[i];
        }
        total += w * f(&x, &xc);
    });
    total
}

/// Integral of `f` over the scaled simplex {t ≥ 0, Σt ≤ r} via the Duffy
/// substitution t_d = r·ξ_d·Π_{e<d}(1-ξ_e), which maps (0,1)^n onto the
/// simplex with polynomial Jacobian r^n·Π(1-ξ_e)^{n-1-e}.
pub fn integrate_simplex<F>(rule: &Rule1d, n: usize, r: f64, mut f: F) -> f64
where
    F: FnMut(&[f64]) -> f64,
{
    let mut total = 0.0;
    let mut t = vec![0.0; n];
    for_each_multi_index(n, rule.len(), |idx| {
        let mut w = 1.0;
        let mut jac = r.powi(n as i32);
        let mut shrink = 1.0;
        for (d, &i) in idx.iter().enumerate() {
            let xi = rule.nodes[i];
            t[d] = r * xi * shrink;
            w *= rule.weights[i];
            let rem = (n - 1 - d) as i32;
            if rem > 0 {
                jac *= rule.nodes_from_one[i].powi(rem);
            }
            shrink *= rule.nodes_from_one[i];
        }
        total += w * jac * f(&t);
    });
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let rule = gauss_legendre(8);
        // degree 15 is the exactness limit for 8 points
        let val = rule.integrate(|x| x.powi(15));
        assert!((val - 1.0 / 16.0).abs() < 1e-14, "got {val}");
        let val = rule.integrate(|x| 3.0 * x * x - x + 0.5);
        assert!((val - 1.0).abs() < 1e-14);
    }

    #[test]
    fn gauss_legendre_weights_sum_to_one() {
        for k in [1, 2, 5, 16, 48] {
            let rule = gauss_legendre(k);
            let s: f64 = rule.weights.iter().sum();
            assert!((s - 1.0).abs() < 1e-13, "k={k} sum={s}");
        }
    }

    #[test]
    fn tanh_sinh_handles_log_endpoint_singularities() {
        let rule = tanh_sinh(40);
        // ∫₀¹ ln(1-t) dt = -1, evaluated through the stable 1-t channel
        let mut val = 0.0;
        for i in 0..rule.len() {
            val += rule.weights[i] * rule.nodes_from_one[i].ln();
        }
        assert!((val + 1.0).abs() < 1e-11, "got {val}");
        // ∫₀¹ ln t dt = -1
        let val = rule.integrate(|x| x.ln());
        assert!((val + 1.0).abs() < 1e-11, "got {val}");
        // smooth integrand too: ∫₀¹ e^x = e-1
        let val = rule.integrate(|x| x.exp());
        assert!((val - (1f64.exp() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn duffy_simplex_volume_and_moments() {
        let rule = gauss_legendre(12);
        // vol{t ≥ 0, Σt ≤ r} = r^n/n!
        for n in 1..=3usize {
            let v = integrate_simplex(&rule, n, 1.0, |_| 1.0);
            let fact: f64 = (1..=n).map(|k| k as f64).product();
            assert!((v - 1.0 / fact).abs() < 1e-13, "n={n} v={v}");
        }
        // ∫_{Δ_2} t_1 dt = 1/6
        let v = integrate_simplex(&rule, 2, 1.0, |t| t[0]);
        assert!((v - 1.0 / 6.0).abs() < 1e-13);
        // scaled: ∫_{2Δ_1} t dt = 2
        let v = integrate_simplex(&rule, 1, 2.0, |t| t[0]);
        assert!((v - 2.0).abs() < 1e-13);
    }

    #[test]
    fn tensor_cube_matches_products() {
        let rule = gauss_legendre(10);
        let v = integrate_unit_cube(&rule, 2, |x, _| x[0] * x[0] * x[1]);
        assert!((v - 1.0 / 6.0).abs() < 1e-14);
        let v = integrate_unit_cube(&rule, 3, |_, xc| xc[0] * xc[1] * xc[2]);
        assert!((v - 0.125).abs() < 1e-14);
    }
}
