//! Gauss–Legendre and generalized Gauss–Laguerre rules.

use crate::error::{Error, Result};
use libm::lgamma as ln_gamma;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    PiecewiseLegendre,
    Laguerre,
}

#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub kind: RuleKind,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        let mut s = 0.0;
        let mut c = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            let y = w * f(x) - c;
            let t = s + y;
            c = (t - s) - y;
            s = t;
        }
        s
    }
}

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1], ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_pd(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_pd(n, z);
        if d != 0.0 {
            dp = d;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_pd(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Gauss–Legendre with `n` points on each interval between consecutive breakpoints.
pub fn piecewise_legendre(breakpoints: &[f64], n: usize) -> QuadratureRule {
    let (x, w) = gauss_legendre(n);
    let mut nodes = Vec::with_capacity(n * breakpoints.len());
    let mut weights = Vec::with_capacity(n * breakpoints.len());
    for iv in breakpoints.windows(2) {
        let (a, b) = (iv[0], iv[1]);
        let h = 0.5 * (b - a);
        let c = 0.5 * (b + a);
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(c + h * xi);
            weights.push(h * wi);
        }
    }
    QuadratureRule { nodes, weights, kind: RuleKind::PiecewiseLegendre }
}

/// Generalized Gauss–Laguerre rule for ∫₀^∞ x^a e^{-b x} f(x) dx.
///
/// Golub–Welsch for the starting nodes, Newton polish on the orthonormal
/// recurrence, and Christoffel weights in log space.
pub fn gauss_laguerre(n: usize, a: f64, b: f64) -> Result<QuadratureRule> {
    if n == 0 || a <= -1.0 || b <= 0.0 {
        return Err(Error::Domain(format!("gauss_laguerre(n={n}, a={a}, b={b})")));
    }
    let diag: Vec<f64> = (0..n).map(|k| 2.0 * k as f64 + a + 1.0).collect();
    let off: Vec<f64> = (1..n).map(|k| ((k as f64) * (k as f64 + a)).sqrt()).collect();
    let jm = faer::Mat::<f64>::from_fn(n, n, |i, j| {
        if i == j {
            diag[i]
        } else if i == j + 1 {
            off[j]
        } else if j == i + 1 {
            off[i]
        } else {
            0.0
        }
    });
    let ev = jm
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .map_err(|_| Error::Convergence("Golub–Welsch eigensolve".into()))?;
    let lg = ln_gamma(a + 1.0);
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for &x0 in ev.iter() {
        let mut x = x0;
        for _ in 0..8 {
            let (q, dq, _) = orthonormal_laguerre(n, a, x, &diag, &off);
            if dq == 0.0 {
                break;
            }
            let dx = q / dq;
            x -= dx;
            if dx.abs() <= 4.0 * f64::EPSILON * x.abs() {
                break;
            }
        }
        let (_, _, ln_sum) = orthonormal_laguerre(n, a, x, &diag, &off);
        let w = (lg - ln_sum).exp();
        nodes.push(x / b);
        weights.push(w / b.powf(a + 1.0));
    }
    Ok(QuadratureRule { nodes, weights, kind: RuleKind::Laguerre })
}

/// Returns (q_n, q_n', ln Σ_{k<n} q_k²) with a common rescaling of q_n, q_n'.
fn orthonormal_laguerre(n: usize, _a: f64, x: f64, diag: &[f64], off: &[f64]) -> (f64, f64, f64) {
    let mut q0 = 0.0;
    let mut q1 = 1.0;
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    let mut sum = 1.0;
    let mut ln_scale = 0.0;
    for k in 0..n {
        let bk = if k == 0 { 0.0 } else { off[k - 1] };
        let bnext = if k + 1 < n { off[k] } else { ((n as f64) * (n as f64 + _a)).sqrt() };
        let q2 = ((x - diag[k]) * q1 - bk * q0) / bnext;
        let d2 = (q1 + (x - diag[k]) * d1 - bk * d0) / bnext;
        q0 = q1;
        q1 = q2;
        d0 = d1;
        d1 = d2;
        if k + 1 < n {
            sum += q1 * q1;
        }
        let m = q1.abs().max(q0.abs());
        if m > 1e100 {
            let s = 1e-100;
            q0 *= s;
            q1 *= s;
            d0 *= s;
            d1 *= s;
            sum *= s * s;
            ln_scale += 2.0 * 100.0 * std::f64::consts::LN_10;
        }
    }
    (q1, d1, sum.ln() + ln_scale)
}
