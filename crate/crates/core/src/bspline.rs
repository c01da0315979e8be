//! Clamped B-splines on [0, π/2] with the two boundary splines removed.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{piecewise_legendre, QuadratureRule};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MeshSpec {
    Uniform { intervals: usize },
    /// Point density ∝ (sin 2α)^(-exponent).
    Graded { intervals: usize, exponent: f64 },
}

impl MeshSpec {
    /// Mesh giving `n_splines` retained splines of the given order.
    pub fn for_splines(n_splines: usize, order: usize, exponent: Option<f64>) -> Result<Self> {
        if n_splines + 3 < order + 1 {
            return Err(Error::Config(format!("{n_splines} splines of order {order}")));
        }
        let intervals = n_splines + 3 - order;
        Ok(match exponent {
            Some(e) if e != 0.0 => MeshSpec::Graded { intervals, exponent: e },
            _ => MeshSpec::Uniform { intervals },
        })
    }

    pub fn breakpoints(&self) -> Result<Vec<f64>> {
        match *self {
            MeshSpec::Uniform { intervals } => {
                if intervals == 0 {
                    return Err(Error::Config("mesh with no intervals".into()));
                }
                let h = FRAC_PI_2 / intervals as f64;
                let mut b: Vec<f64> = (0..=intervals).map(|i| i as f64 * h).collect();
                symmetrize(&mut b);
                Ok(b)
            }
            MeshSpec::Graded { intervals, exponent } => graded_breakpoints(intervals, exponent),
        }
    }
}

fn symmetrize(b: &mut [f64]) {
    let n = b.len() - 1;
    for i in 0..=n / 2 {
        b[n - i] = FRAC_PI_2 - b[i];
    }
    if n % 2 == 0 {
        b[n / 2] = FRAC_PI_4;
    }
    b[0] = 0.0;
    b[n] = FRAC_PI_2;
}

/// Cumulative density ∫₀^α (sin 2a)^(-γ) da on [0, π/4], substitution a = s^{1/(1-γ)}.
fn graded_cumulative(alpha: f64, gamma: f64) -> f64 {
    let p = 1.0 / (1.0 - gamma);
    let smax = alpha.powf(1.0 - gamma);
    let (x, w) = crate::quadrature::gauss_legendre(40);
    let pieces = 8;
    let mut total = 0.0;
    for k in 0..pieces {
        let a = smax * k as f64 / pieces as f64;
        let b = smax * (k + 1) as f64 / pieces as f64;
        let h = 0.5 * (b - a);
        for (xi, wi) in x.iter().zip(&w) {
            let s = 0.5 * (a + b) + h * xi;
            let aa = s.powf(p);
            let jac = p * s.powf(p - 1.0);
            total += h * wi * jac * (2.0 * aa).sin().powf(-gamma);
        }
    }
    total
}

fn graded_breakpoints(intervals: usize, gamma: f64) -> Result<Vec<f64>> {
    if intervals == 0 {
        return Err(Error::Config("mesh with no intervals".into()));
    }
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::Config(format!("graded mesh exponent {gamma} outside [0,1)")));
    }
    let half = graded_cumulative(FRAC_PI_4, gamma);
    let mut b = vec![0.0; intervals + 1];
    for (i, bi) in b.iter_mut().enumerate().take(intervals / 2 + 1) {
        let target = 2.0 * half * i as f64 / intervals as f64;
        if target >= half {
            *bi = FRAC_PI_4;
            continue;
        }
        let (mut lo, mut hi) = (0.0, FRAC_PI_4);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if graded_cumulative(mid, gamma) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        *bi = 0.5 * (lo + hi);
    }
    symmetrize(&mut b);
    Ok(b)
}

#[derive(Debug, Clone)]
pub struct BsplineBasis {
    order: usize,
    breakpoints: Vec<f64>,
    knots: Vec<f64>,
    n_full: usize,
}

impl BsplineBasis {
    pub fn new(order: usize, mesh: &MeshSpec) -> Result<Self> {
        Self::from_breakpoints(order, mesh.breakpoints()?)
    }

    pub fn from_breakpoints(order: usize, breakpoints: Vec<f64>) -> Result<Self> {
        Self::with_knot_multiplicity(order, breakpoints, None)
    }

    /// Like `new`, with the breakpoint π/4 (inserted if absent) repeated
    /// `mult` times, so the splines are only C^{order−1−mult} there.
    /// v_0 has a kink at π/4 which puts a jump into the third derivative of H.
    pub fn with_quarter_knot(order: usize, mesh: &MeshSpec, mult: usize) -> Result<Self> {
        let mut bp = mesh.breakpoints()?;
        if let Some(k) = bp.iter().position(|&b| b >= FRAC_PI_4 - 1e-15) {
            if (bp[k] - FRAC_PI_4).abs() > 1e-15 {
                bp.insert(k, FRAC_PI_4);
            } else {
                bp[k] = FRAC_PI_4;
            }
        }
        Self::with_knot_multiplicity(order, bp, Some(mult))
    }

    fn with_knot_multiplicity(order: usize, breakpoints: Vec<f64>, quarter: Option<usize>) -> Result<Self> {
        if order < 2 {
            return Err(Error::Config(format!("B-spline order {order} < 2")));
        }
        if breakpoints.len() < order + 1 {
            return Err(Error::Config(format!(
                "{} breakpoints for order {order}; need at least {}",
                breakpoints.len(),
                order + 1
            )));
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("breakpoints not strictly increasing".into()));
        }
        if let Some(m) = quarter {
            if m == 0 || m >= order {
                return Err(Error::Config(format!("knot multiplicity {m} for order {order}")));
            }
        }
        let (a, b) = (breakpoints[0], *breakpoints.last().unwrap());
        let mut knots = vec![a; order];
        for &x in &breakpoints[1..breakpoints.len() - 1] {
            let m = match quarter {
                Some(m) if x == FRAC_PI_4 => m,
                _ => 1,
            };
            knots.extend(std::iter::repeat_n(x, m));
        }
        knots.extend(std::iter::repeat_n(b, order));
        let n_full = knots.len() - order;
        Ok(Self { order, breakpoints, knots, n_full })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of retained splines.
    pub fn dim(&self) -> usize {
        self.n_full - 2
    }

    pub fn n_full(&self) -> usize {
        self.n_full
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Mesh invariant under α → π/2 − α.
    pub fn is_symmetric(&self) -> bool {
        let n = self.breakpoints.len() - 1;
        let m = self.knots.len() - 1;
        (0..=n).all(|i| (self.breakpoints[i] + self.breakpoints[n - i] - FRAC_PI_2).abs() < 1e-14)
            && (0..=m).all(|i| (self.knots[i] + self.knots[m - i] - FRAC_PI_2).abs() < 1e-14)
    }

    fn span(&self, x: f64) -> usize {
        let p = self.order - 1;
        let bp = &self.breakpoints;
        if x <= bp[0] {
            return p;
        }
        if x >= bp[bp.len() - 1] {
            return self.n_full - 1;
        }
        self.knots.partition_point(|&u| u <= x) - 1
    }

    /// Values and derivatives up to `nder` of the `order` full-index splines
    /// that may be nonzero at x. Returns the full index of the first one.
    pub fn eval_nonzero(&self, x: f64, nder: usize) -> (usize, Vec<Vec<f64>>) {
        let p = self.order - 1;
        let i = self.span(x);
        let u = &self.knots;
        let mut ndu = vec![vec![0.0; p + 1]; p + 1];
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        ndu[0][0] = 1.0;
        for j in 1..=p {
            left[j] = x - u[i + 1 - j];
            right[j] = u[i + j] - x;
            let mut saved = 0.0;
            for r in 0..j {
                ndu[j][r] = right[r + 1] + left[j - r];
                let temp = ndu[r][j - 1] / ndu[j][r];
                ndu[r][j] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            ndu[j][j] = saved;
        }
        let nd = nder.min(p);
        let mut ders = vec![vec![0.0; p + 1]; nder + 1];
        for j in 0..=p {
            ders[0][j] = ndu[j][p];
        }
        let mut a = vec![vec![0.0; p + 1]; 2];
        for r in 0..=p {
            let (mut s1, mut s2) = (0usize, 1usize);
            a[0][0] = 1.0;
            for k in 1..=nd {
                let mut d = 0.0;
                let rk = r as isize - k as isize;
                let pk = p - k;
                if r >= k {
                    a[s2][0] = a[s1][0] / ndu[pk + 1][rk as usize];
                    d = a[s2][0] * ndu[rk as usize][pk];
                }
                let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
                let j2 = if (r as isize - 1) <= pk as isize { k - 1 } else { p - r };
                for j in j1..=j2 {
                    let idx = (rk + j as isize) as usize;
                    a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][idx];
                    d += a[s2][j] * ndu[idx][pk];
                }
                if r as isize <= pk as isize {
                    a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                    d += a[s2][k] * ndu[r][pk];
                }
                ders[k][r] = d;
                std::mem::swap(&mut s1, &mut s2);
            }
        }
        let mut fac = p as f64;
        for k in 1..=nd {
            for v in ders[k].iter_mut() {
                *v *= fac;
            }
            fac *= (p - k) as f64;
        }
        (i - p, ders)
    }

    /// Derivative `der` of retained spline `i` at x.
    pub fn eval(&self, i: usize, x: f64, der: usize) -> f64 {
        let full = i + 1;
        let (first, d) = self.eval_nonzero(x, der);
        if full < first || full >= first + self.order {
            0.0
        } else {
            d[der][full - first]
        }
    }

    /// Gauss–Legendre with `n` points per knot interval; an interval
    /// straddling π/4 is split there so the multipole kink is integrated exactly.
    pub fn quadrature(&self, n: usize) -> QuadratureRule {
        let mut bp = self.breakpoints.clone();
        if let Some(k) = bp.iter().position(|&b| b > FRAC_PI_4) {
            if k > 0 && (bp[k - 1] - FRAC_PI_4).abs() > 1e-15 && (bp[k] - FRAC_PI_4).abs() > 1e-15 {
                bp.insert(k, FRAC_PI_4);
            }
        }
        piecewise_legendre(&bp, n)
    }
}

/// Retained splines and their first two derivatives tabulated on a quadrature rule.
#[derive(Debug, Clone)]
pub struct SplineTable {
    pub rule: QuadratureRule,
    pub order: usize,
    pub dim: usize,
    /// Retained index of the first tabulated spline at each node (may be −1).
    pub first: Vec<isize>,
    pub vals: Vec<[Vec<f64>; 3]>,
}

impl SplineTable {
    pub fn new(basis: &BsplineBasis, points_per_interval: usize) -> Self {
        let rule = basis.quadrature(points_per_interval);
        let mut first = Vec::with_capacity(rule.len());
        let mut vals = Vec::with_capacity(rule.len());
        for &x in &rule.nodes {
            let (f, d) = basis.eval_nonzero(x, 2);
            first.push(f as isize - 1);
            vals.push([d[0].clone(), d[1].clone(), d[2].clone()]);
        }
        Self { rule, order: basis.order(), dim: basis.dim(), first, vals }
    }

    /// Retained-index range and values of derivative `der` at node `q`.
    pub fn at(&self, q: usize, der: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let f = self.first[q];
        let dim = self.dim as isize;
        self.vals[q][der]
            .iter()
            .enumerate()
            .filter_map(move |(j, &v)| {
                let i = f + j as isize;
                (i >= 0 && i < dim).then_some((i as usize, v))
            })
    }

    /// Banded Galerkin matrix ∫ B_i^{(da)} g B_j^{(db)} dα.
    pub fn galerkin<G: Fn(f64) -> f64>(&self, da: usize, db: usize, g: G) -> Mat<f64> {
        let mut m = Mat::<f64>::zeros(self.dim, self.dim);
        for q in 0..self.rule.len() {
            let wq = self.rule.weights[q] * g(self.rule.nodes[q]);
            if wq == 0.0 {
                continue;
            }
            for (i, vi) in self.at(q, da) {
                for (j, vj) in self.at(q, db) {
                    m[(i, j)] += wq * vi * vj;
                }
            }
        }
        m
    }

    /// Values (derivative `der`) at every node of the expansion with coefficients `c`.
    pub fn expand(&self, c: &[f64], der: usize) -> Vec<f64> {
        (0..self.rule.len())
            .map(|q| self.at(q, der).map(|(i, v)| v * c[i]).sum())
            .collect()
    }
}
