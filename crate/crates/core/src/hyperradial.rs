//! Hyperradial Coulomb Sturmians
//! S_{n,λ}^κ(R) = N R^{λ+5/2} e^{−κR} L_{n−λ−1}^{(2λ+4)}(2κR), n ≥ λ+1,
//! orthonormal under 1/R and annihilated by
//! −½∂² + Λ_λ/(2R²) − κ(n+3/2)/R + κ²/2.
//!
//! Complex scaling replaces κ by κe^{−iθ}. Rotating the integration contour
//! back to the real axis turns every matrix element of a kernel R^m into
//! e^{imθ} times the real-κ integral, which is what [`matrix_element`] uses.

use faer::Mat;
use libm::lgamma;
use serde::{Deserialize, Serialize};

use crate::c64;
use crate::error::{Error, Result};
use crate::quadrature::gauss_laguerre;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialSet {
    /// Real scale κ > 0 before rotation.
    pub kappa: f64,
    /// Scaling angle; the effective parameter is κe^{−iθ}.
    pub theta: f64,
    pub lambda: u32,
    pub count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RadialKernel {
    One,
    R,
    InvR,
    InvR2,
    /// d/dR acting on the ket.
    DDr,
}

impl RadialKernel {
    /// Power m of R in the kernel (d/dR counts as −1).
    pub fn power(self) -> i32 {
        match self {
            RadialKernel::One => 0,
            RadialKernel::R => 1,
            RadialKernel::InvR => -1,
            RadialKernel::InvR2 => -2,
            RadialKernel::DDr => -1,
        }
    }
}

/// Generalized Laguerre L_k^{(a)}(x) for k = 0..=kmax by upward recurrence.
pub fn laguerre_real(kmax: usize, a: f64, x: f64) -> Vec<f64> {
    let mut v = Vec::with_capacity(kmax + 1);
    v.push(1.0);
    if kmax == 0 {
        return v;
    }
    v.push(1.0 + a - x);
    for k in 1..kmax {
        let kf = k as f64;
        v.push(((2.0 * kf + 1.0 + a - x) * v[k] - (kf + a) * v[k - 1]) / (kf + 1.0));
    }
    v
}

/// Complex-argument variant of [`laguerre_real`].
pub fn laguerre_complex(kmax: usize, a: f64, x: c64) -> Vec<c64> {
    let mut v = Vec::with_capacity(kmax + 1);
    v.push(c64::new(1.0, 0.0));
    if kmax == 0 {
        return v;
    }
    v.push(c64::new(1.0 + a, 0.0) - x);
    for k in 1..kmax {
        let kf = k as f64;
        v.push(((c64::new(2.0 * kf + 1.0 + a, 0.0) - x) * v[k] - v[k - 1] * (kf + a)) / (kf + 1.0));
    }
    v
}

impl RadialSet {
    pub fn new(kappa: f64, lambda: u32, count: usize) -> Self {
        Self { kappa, theta: 0.0, lambda, count }
    }

    pub fn scaled(&self, theta: f64) -> Self {
        Self { theta, ..*self }
    }

    pub fn n_min(&self) -> usize {
        self.lambda as usize + 1
    }

    /// Principal quantum numbers n of the members.
    pub fn ns(&self) -> std::ops::Range<usize> {
        self.n_min()..self.n_min() + self.count
    }

    pub fn kappa_complex(&self) -> c64 {
        c64::from_polar(self.kappa, -self.theta)
    }

    /// ln N for real κ.
    fn ln_norm(&self, n: usize) -> f64 {
        let lam = self.lambda as f64;
        let nf = n as f64;
        0.5 * (self.kappa / (nf + 1.5)).ln()
            + (lam + 2.5) * (2.0 * self.kappa).ln()
            + 0.5 * (lgamma(nf - lam) - lgamma(nf + lam + 4.0))
    }

    /// N for the (possibly complex) parameter κe^{−iθ}; √ taken with argument in (−π/2, π/2].
    pub fn norm(&self, n: usize) -> c64 {
        let lam = self.lambda as f64;
        let phase = -self.theta * (0.5 + lam + 2.5);
        c64::from_polar(self.ln_norm(n).exp(), phase)
    }

    fn check_n(&self, n: usize) -> Result<()> {
        if !self.ns().contains(&n) {
            return Err(Error::Domain(format!("n = {n} outside {:?}", self.ns())));
        }
        Ok(())
    }

    pub fn eval(&self, n: usize, r: f64) -> Result<c64> {
        if !(r >= 0.0) {
            return Err(Error::Domain(format!("R = {r} < 0")));
        }
        self.check_n(n)?;
        let k = self.kappa_complex();
        let lam = self.lambda as usize;
        let pw = r.powi(lam as i32 + 2) * r.sqrt();
        let l = laguerre_complex(n - lam - 1, (2 * lam + 4) as f64, k * (2.0 * r));
        Ok(self.norm(n) * pw * (-k * r).exp() * l[n - lam - 1])
    }

    /// First derivative dS/dR.
    pub fn eval_deriv(&self, n: usize, r: f64) -> Result<c64> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!("R = {r} ≤ 0")));
        }
        self.check_n(n)?;
        let k = self.kappa_complex();
        let lam = self.lambda as usize;
        let deg = n - lam - 1;
        let a = (2 * lam + 4) as f64;
        let l = laguerre_complex(deg, a, k * (2.0 * r));
        let dl = if deg == 0 { c64::new(0.0, 0.0) } else { -laguerre_complex(deg - 1, a + 1.0, k * (2.0 * r))[deg - 1] };
        let pw = r.powi(lam as i32 + 1) * r.sqrt();
        let br = l[deg] * (lam as f64 + 2.5) - k * r * l[deg] + k * r * 2.0 * dl;
        Ok(self.norm(n) * pw * (-k * r).exp() * br)
    }
}

/// Real-κ integrand pieces: values of S_n(R)·e^{κR} (and of the derivative)
/// for every member, at a radial point.
fn poly_parts(set: &RadialSet, r: f64, deriv: bool) -> Vec<f64> {
    let lam = set.lambda as usize;
    let a = (2 * lam + 4) as f64;
    let kmax = set.count - 1;
    let x = 2.0 * set.kappa * r;
    let l = laguerre_real(kmax, a, x);
    let dl = if deriv && kmax > 0 { laguerre_real(kmax - 1, a + 1.0, x) } else { vec![] };
    let pw = r.powi(lam as i32 + 1) * r.sqrt();
    set.ns()
        .enumerate()
        .map(|(k, n)| {
            let nn = set.ln_norm(n).exp();
            if deriv {
                let d = if k == 0 { 0.0 } else { -dl[k - 1] };
                nn * pw * ((lam as f64 + 2.5) * l[k] - set.kappa * r * l[k] + 2.0 * set.kappa * r * d)
            } else {
                nn * pw * r * l[k]
            }
        })
        .collect()
}

fn real_block(a: &RadialSet, b: &RadialSet, kernel: RadialKernel, npts: usize) -> Result<Mat<f64>> {
    let rule = gauss_laguerre(npts, 0.0, a.kappa + b.kappa)?;
    let mut m = Mat::<f64>::zeros(a.count, b.count);
    let deriv = kernel == RadialKernel::DDr;
    for (&r, &w) in rule.nodes.iter().zip(&rule.weights) {
        let fa = poly_parts(a, r, false);
        let fb = poly_parts(b, r, deriv);
        let k = match kernel {
            RadialKernel::One | RadialKernel::DDr => 1.0,
            RadialKernel::R => r,
            RadialKernel::InvR => 1.0 / r,
            RadialKernel::InvR2 => 1.0 / (r * r),
        };
        for j in 0..b.count {
            let wj = w * k * fb[j];
            for i in 0..a.count {
                m[(i, j)] += fa[i] * wj;
            }
        }
    }
    Ok(m)
}

const NODE_CAP: usize = 600;

/// Real-κ block ⟨S_a|k|S_b⟩ by Gauss–Laguerre, nodes increased until stable to 1e−12.
pub fn real_radial_block(a: &RadialSet, b: &RadialSet, kernel: RadialKernel) -> Result<Mat<f64>> {
    if a.count == 0 || b.count == 0 {
        return Ok(Mat::zeros(a.count, b.count));
    }
    let deg = (a.lambda + b.lambda) as i64 + 5 + kernel.power() as i64 + (a.count + b.count) as i64
        + i64::from(kernel == RadialKernel::DDr);
    let mut n = (deg.max(1) as usize) / 2 + 2;
    let mut prev = real_block(a, b, kernel, n)?;
    loop {
        let next_n = n + 4 + n / 8;
        if next_n > NODE_CAP {
            return Err(Error::Convergence(format!("radial quadrature not stable at {n} nodes")));
        }
        let next = real_block(a, b, kernel, next_n)?;
        let mut diff: f64 = 0.0;
        for j in 0..b.count {
            for i in 0..a.count {
                diff = diff.max((next[(i, j)] - prev[(i, j)]).abs());
            }
        }
        if diff < 1e-12 {
            return Ok(prev);
        }
        n = next_n;
        prev = next;
    }
}

fn check_theta(a: &RadialSet, b: &RadialSet) -> Result<()> {
    if (a.theta - b.theta).abs() > 0.0 {
        return Err(Error::Config(format!("radial sets scaled by different angles {} and {}", a.theta, b.theta)));
    }
    Ok(())
}

/// Complex block ⟨S_a|k|S_b⟩ (no conjugation) for sets sharing θ.
pub fn radial_block(a: &RadialSet, b: &RadialSet, kernel: RadialKernel) -> Result<Mat<c64>> {
    check_theta(a, b)?;
    let phase = c64::from_polar(1.0, a.theta * kernel.power() as f64);
    let mut m = real_radial_block(a, b, kernel)?;
    if kernel == RadialKernel::InvR && a.kappa == b.kappa && a.lambda == b.lambda {
        for (i, n) in a.ns().enumerate() {
            for (j, nb) in b.ns().enumerate() {
                m[(i, j)] = if n == nb { a.kappa / (n as f64 + 1.5) } else { 0.0 };
            }
        }
    }
    Ok(Mat::from_fn(a.count, b.count, |i, j| phase * m[(i, j)]))
}

pub fn matrix_element(a: &RadialSet, na: usize, b: &RadialSet, nb: usize, kernel: RadialKernel) -> Result<c64> {
    a.check_n(na)?;
    b.check_n(nb)?;
    check_theta(a, b)?;
    if kernel == RadialKernel::InvR && a.kappa == b.kappa && a.lambda == b.lambda {
        return Ok(if na == nb { a.kappa_complex() / (na as f64 + 1.5) } else { c64::new(0.0, 0.0) });
    }
    let blk = radial_block(a, b, kernel)?;
    Ok(blk[(na - a.n_min(), nb - b.n_min())])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_at_origin_and_domain() {
        let s = RadialSet::new(1.3, 0, 5);
        assert_eq!(s.eval(3, 0.0).unwrap().norm(), 0.0);
        assert!(s.eval(3, -1.0).is_err());
        assert!(s.eval(9, 1.0).is_err());
    }

    #[test]
    fn mixed_theta_rejected() {
        let a = RadialSet::new(1.0, 0, 3).scaled(0.1);
        let b = RadialSet::new(1.0, 0, 3);
        assert!(radial_block(&a, &b, RadialKernel::One).is_err());
    }
}
