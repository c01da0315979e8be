//! Eigenvalues of the pruned Hamiltonian: dense for small systems,
//! shift-invert Krylov (Lanczos for θ = 0, Arnoldi otherwise) on a dense LU
//! of Ĥ − σ for large ones.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::lu::partial_pivoting::{factor::lu_in_place, factor::lu_in_place_scratch, solve::solve_in_place, solve::solve_in_place_scratch};
use faer::{Mat, Par};
use serde::{Deserialize, Serialize};

use crate::assembly::PrunedSystem;
use crate::c64;
use crate::error::{Error, Result};
use crate::linalg::sym_eigen;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Dense below `dense_limit`, shift-invert above.
    Auto,
    Dense,
    ShiftInvert,
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub method: Method,
    /// σ; states returned are those nearest σ (complex) or the lowest at or above σ (real).
    pub shift: Option<c64>,
    /// Number of states wanted; `None` keeps everything a dense solve returns.
    pub count: Option<usize>,
    pub dense_limit: usize,
    /// Relative Ritz residual tolerance.
    pub tol: f64,
    pub max_krylov: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { method: Method::Auto, shift: None, count: None, dense_limit: 3000, tol: 1e-12, max_krylov: 800 }
    }
}

#[derive(Debug, Clone)]
pub struct State {
    pub energy: c64,
    /// Coefficients in the pruned orthonormal basis; unit norm (θ = 0) or
    /// unit complex-symmetric norm yᵀy = 1 (θ > 0).
    pub coeffs: Vec<c64>,
    /// ‖Ĥy − Ey‖ / ‖y‖ evaluated without forming Ĥ.
    pub residual: f64,
    pub dominant_pair: usize,
    pub dominant_weight: c64,
}

impl State {
    /// Γ = −2 Im E.
    pub fn width(&self) -> f64 {
        -2.0 * self.energy.im
    }
}

#[derive(Debug, Clone)]
pub struct SpectralResult {
    pub theta: f64,
    pub states: Vec<State>,
    pub dim: usize,
    pub full_dim: usize,
    pub method: Method,
    pub krylov_steps: usize,
}

/// Dense LU of Ĥ − σ, factored in place.
struct ShiftedLu {
    lu: Mat<c64>,
    perm: Vec<usize>,
    perm_inv: Vec<usize>,
}

impl ShiftedLu {
    fn new(mut a: Mat<c64>, sigma: c64) -> Result<Self> {
        let n = a.nrows();
        for i in 0..n {
            a[(i, i)] -= sigma;
        }
        let mut perm = vec![0usize; n];
        let mut perm_inv = vec![0usize; n];
        let mut mem = MemBuffer::new(lu_in_place_scratch::<usize, c64>(n, n, Par::Seq, Default::default()));
        let stack = MemStack::new(&mut mem);
        lu_in_place(a.as_mut(), &mut perm, &mut perm_inv, Par::Seq, stack, Default::default());
        let mut dmin = f64::INFINITY;
        for i in 0..n {
            dmin = dmin.min(a[(i, i)].norm());
        }
        if !(dmin > 0.0) || !dmin.is_finite() {
            return Err(Error::Convergence(format!("Ĥ − σ is singular at σ = {sigma}")));
        }
        Ok(Self { lu: a, perm, perm_inv })
    }

    fn solve(&self, x: &mut [c64]) {
        let n = x.len();
        let mut rhs = Mat::<c64>::from_fn(n, 1, |i, _| x[i]);
        let perm = faer::perm::PermRef::new_checked(&self.perm, &self.perm_inv, n);
        let mut mem = MemBuffer::new(solve_in_place_scratch::<usize, c64>(n, 1, Par::Seq));
        let stack = MemStack::new(&mut mem);
        solve_in_place(self.lu.as_ref(), self.lu.as_ref(), perm, rhs.as_mut(), Par::Seq, stack);
        for i in 0..n {
            x[i] = rhs[(i, 0)];
        }
    }
}

fn dotc(a: &[c64], b: &[c64]) -> c64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[c64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Deterministic start vector.
fn start_vector(n: usize) -> Vec<c64> {
    let v: Vec<c64> = (0..n).map(|i| c64::new(1.0 + 0.37 * ((i as f64) * 0.61).sin(), 0.0)).collect();
    let s = norm(&v);
    v.into_iter().map(|x| x / s).collect()
}

/// Orthogonalize w against the basis twice (classical Gram–Schmidt, repeated).
fn reorthogonalize(basis: &[Vec<c64>], w: &mut [c64], coef: &mut [c64]) {
    for _ in 0..2 {
        for (k, v) in basis.iter().enumerate() {
            let h = dotc(v, w);
            coef[k] += h;
            for (wi, vi) in w.iter_mut().zip(v) {
                *wi -= h * vi;
            }
        }
    }
}

/// Phase and normalization rule: unit (complex-symmetric) norm, largest component with positive real part.
fn fix_phase(y: &mut [c64], real: bool) {
    let s = if real {
        c64::new(norm(y), 0.0)
    } else {
        let q: c64 = y.iter().map(|x| x * x).sum();
        q.sqrt()
    };
    for x in y.iter_mut() {
        *x /= s;
    }
    let mut big = 0;
    for i in 0..y.len() {
        if y[i].norm() > y[big].norm() * (1.0 + 1e-12) {
            big = i;
        }
    }
    if y[big].re < 0.0 {
        for x in y.iter_mut() {
            *x = -*x;
        }
    }
}

fn finish(sys: &PrunedSystem, energy: c64, mut y: Vec<c64>) -> State {
    let real = sys.is_real();
    if real {
        for x in y.iter_mut() {
            x.im = 0.0;
        }
    }
    fix_phase(&mut y, real);
    let hy = sys.matvec(&y);
    let r: Vec<c64> = hy.iter().zip(&y).map(|(a, b)| a - energy * b).collect();
    let residual = norm(&r) / norm(&y);
    let w = sys.pair_weights(&y);
    let mut dom = 0;
    for i in 0..w.len() {
        if w[i].norm() > w[dom].norm() {
            dom = i;
        }
    }
    State { energy, coeffs: y, residual, dominant_pair: dom, dominant_weight: w[dom] }
}

fn choose_method(sys: &PrunedSystem, opts: &SolveOptions) -> Method {
    match opts.method {
        Method::Auto if sys.dim <= opts.dense_limit => Method::Dense,
        Method::Auto => Method::ShiftInvert,
        m => m,
    }
}

/// Bound states of the unscaled problem (θ = 0).
pub fn solve_bound(sys: &PrunedSystem, opts: &SolveOptions) -> Result<SpectralResult> {
    if !sys.is_real() {
        return Err(Error::Config(format!("solve_bound needs θ = 0, got {}", sys.theta)));
    }
    let method = choose_method(sys, opts);
    let sigma = opts.shift.map(|s| s.re);
    let (pairs, steps) = match method {
        Method::Dense => {
            let (e, v) = sym_eigen(&sys.dense_real())?;
            let mut out = Vec::new();
            for (i, &ei) in e.iter().enumerate() {
                if sigma.is_some_and(|s| ei < s) {
                    continue;
                }
                if opts.count.is_some_and(|c| out.len() >= c) {
                    break;
                }
                out.push((c64::new(ei, 0.0), (0..sys.dim).map(|r| c64::new(v[(r, i)], 0.0)).collect::<Vec<_>>()));
            }
            (out, 0)
        }
        _ => {
            let sigma = sigma.ok_or_else(|| Error::Config("shift-invert needs a shift".into()))?;
            let count = opts.count.ok_or_else(|| Error::Config("shift-invert needs a state count".into()))?;
            lanczos(sys, sigma, count, opts)?
        }
    };
    let states = pairs.into_iter().map(|(e, y)| finish(sys, e, y)).collect();
    Ok(SpectralResult { theta: 0.0, states, dim: sys.dim, full_dim: sys.full_dim, method, krylov_steps: steps })
}

type Pairs = Vec<(c64, Vec<c64>)>;

/// Lanczos with full reorthogonalization on (Ĥ − σ)⁻¹; returns the `count`
/// lowest eigenpairs at or above σ.
fn lanczos(sys: &PrunedSystem, sigma: f64, count: usize, opts: &SolveOptions) -> Result<(Pairs, usize)> {
    let n = sys.dim;
    let count = count.min(n);
    let h = sys.dense_real();
    let lu = ShiftedLu::new(Mat::from_fn(n, n, |i, j| c64::new(h[(i, j)], 0.0)), c64::new(sigma, 0.0))?;
    drop(h);
    let mut basis: Vec<Vec<c64>> = vec![start_vector(n)];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let max_m = opts.max_krylov.min(n);
    let mut coef = vec![c64::new(0.0, 0.0); max_m + 1];
    loop {
        let j = basis.len() - 1;
        let mut w = basis[j].clone();
        lu.solve(&mut w);
        for x in w.iter_mut() {
            x.im = 0.0;
        }
        coef.iter_mut().for_each(|c| *c = c64::new(0.0, 0.0));
        reorthogonalize(&basis, &mut w, &mut coef);
        alpha.push(coef[j].re);
        let b = norm(&w);
        let m = alpha.len();
        let check = m >= count + 10 && (m % 10 == 0 || m == max_m || b < 1e-300);
        if check {
            let t = Mat::<f64>::from_fn(m, m, |r, c| {
                if r == c {
                    alpha[r]
                } else if r + 1 == c {
                    beta[r]
                } else if c + 1 == r {
                    beta[c]
                } else {
                    0.0
                }
            });
            let (th, s) = sym_eigen(&t)?;
            // wanted: the largest positive θ
            let idx: Vec<usize> = (0..m).rev().filter(|&i| th[i] > 0.0).take(count).collect();
            let converged = idx.len() == count
                && idx.iter().all(|&i| (b * s[(m - 1, i)]).abs() <= opts.tol * th[i].abs());
            if converged || m == max_m || b < 1e-300 {
                if !converged {
                    return Err(Error::Convergence(format!(
                        "Lanczos did not converge {count} states in {m} steps at σ = {sigma}"
                    )));
                }
                let mut out = Vec::new();
                for &i in &idx {
                    let mut y = vec![c64::new(0.0, 0.0); n];
                    for (k, v) in basis.iter().take(m).enumerate() {
                        let c = s[(k, i)];
                        for (yi, vi) in y.iter_mut().zip(v) {
                            *yi += c * vi;
                        }
                    }
                    out.push((c64::new(sigma + 1.0 / th[i], 0.0), y));
                }
                out.sort_by(|a, b| a.0.re.total_cmp(&b.0.re));
                return Ok((out, m));
            }
        }
        beta.push(b);
        basis.push(w.into_iter().map(|x| x / b).collect());
    }
}

/// Eigenvalues of the complex-scaled problem near σ.
pub fn solve_scaled(sys: &PrunedSystem, opts: &SolveOptions) -> Result<SpectralResult> {
    if !(sys.theta > 0.0 && sys.theta < std::f64::consts::FRAC_PI_4) {
        return Err(Error::Config(format!("scaling angle {} outside (0, π/4)", sys.theta)));
    }
    let method = choose_method(sys, opts);
    let (pairs, steps) = match method {
        Method::Dense => {
            let h = sys.dense_complex();
            let e = h.eigen().map_err(|e| Error::Convergence(format!("complex eigensolver at θ = {}: {e:?}", sys.theta)))?;
            let s = e.S();
            let u = e.U();
            let mut idx: Vec<usize> = (0..sys.dim).collect();
            if let Some(sigma) = opts.shift {
                idx.sort_by(|&a, &b| (s[a] - sigma).norm().total_cmp(&(s[b] - sigma).norm()));
            } else {
                idx.sort_by(|&a, &b| s[a].re.total_cmp(&s[b].re));
            }
            if let Some(c) = opts.count {
                idx.truncate(c);
            }
            let out = idx.into_iter().map(|i| (s[i], (0..sys.dim).map(|r| u[(r, i)]).collect())).collect();
            (out, 0)
        }
        _ => {
            let sigma = opts.shift.ok_or_else(|| Error::Config("shift-invert needs a shift".into()))?;
            let count = opts.count.ok_or_else(|| Error::Config("shift-invert needs a state count".into()))?;
            arnoldi(sys, sigma, count, opts)?
        }
    };
    let mut states: Vec<State> = pairs.into_iter().map(|(e, y)| finish(sys, e, y)).collect();
    states.sort_by(|a, b| a.energy.re.total_cmp(&b.energy.re));
    Ok(SpectralResult { theta: sys.theta, states, dim: sys.dim, full_dim: sys.full_dim, method, krylov_steps: steps })
}

/// Arnoldi with full reorthogonalization on (Ĥ − σ)⁻¹; the `count` eigenvalues nearest σ.
fn arnoldi(sys: &PrunedSystem, sigma: c64, count: usize, opts: &SolveOptions) -> Result<(Pairs, usize)> {
    let n = sys.dim;
    let count = count.min(n);
    let lu = ShiftedLu::new(sys.dense_complex(), sigma)?;
    let max_m = opts.max_krylov.min(n);
    let mut basis: Vec<Vec<c64>> = vec![start_vector(n)];
    let mut hcols: Vec<Vec<c64>> = Vec::new();
    loop {
        let j = basis.len() - 1;
        let mut w = basis[j].clone();
        lu.solve(&mut w);
        let mut coef = vec![c64::new(0.0, 0.0); j + 2];
        reorthogonalize(&basis, &mut w, &mut coef);
        let b = norm(&w);
        coef[j + 1] = c64::new(b, 0.0);
        hcols.push(coef);
        let m = hcols.len();
        let check = m >= count + 10 && (m % 10 == 0 || m == max_m || b < 1e-300);
        if check {
            let hm = Mat::<c64>::from_fn(m, m, |r, c| if r < hcols[c].len() { hcols[c][r] } else { c64::new(0.0, 0.0) });
            let e = hm.eigen().map_err(|e| Error::Convergence(format!("Hessenberg eigen: {e:?}")))?;
            let th = e.S();
            let s = e.U();
            let mut idx: Vec<usize> = (0..m).collect();
            idx.sort_by(|&a, &bb| th[bb].norm().total_cmp(&th[a].norm()));
            idx.truncate(count);
            let converged = idx.iter().all(|&i| {
                let sn: f64 = (0..m).map(|k| s[(k, i)].norm_sqr()).sum::<f64>().sqrt();
                b * s[(m - 1, i)].norm() / sn <= opts.tol * th[i].norm()
            });
            if converged || m == max_m || b < 1e-300 {
                if !converged {
                    return Err(Error::Convergence(format!(
                        "Arnoldi did not converge {count} states in {m} steps at σ = {sigma}, θ = {}",
                        sys.theta
                    )));
                }
                let mut out = Vec::new();
                for &i in &idx {
                    let mut y = vec![c64::new(0.0, 0.0); n];
                    for (k, v) in basis.iter().take(m).enumerate() {
                        let c = s[(k, i)];
                        for (yi, vi) in y.iter_mut().zip(v) {
                            *yi += c * vi;
                        }
                    }
                    out.push((sigma + c64::new(1.0, 0.0) / th[i], y));
                }
                return Ok((out, m));
            }
        }
        basis.push(w.into_iter().map(|x| x / b).collect());
    }
}

/// A θ-stationary complex eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonanceCandidate {
    pub energy: f64,
    pub width: f64,
    /// |E(θ₁) − E(θ₂)|.
    pub motion: f64,
    pub dominant_pair: usize,
}

/// Pair eigenvalues of two θ runs by nearest neighbour; keep those inside
/// `window` (real part) with Im E < 0 that moved less than `tol`.
pub fn extract_resonances(a: &SpectralResult, b: &SpectralResult, window: (f64, f64), tol: f64) -> Vec<ResonanceCandidate> {
    let mut out = Vec::new();
    for s in &a.states {
        let e = s.energy;
        if e.re < window.0 || e.re > window.1 || e.im >= 0.0 {
            continue;
        }
        let Some(nearest) = b.states.iter().min_by(|x, y| (x.energy - e).norm().total_cmp(&(y.energy - e).norm())) else {
            continue;
        };
        let motion = (nearest.energy - e).norm();
        if motion < tol {
            out.push(ResonanceCandidate { energy: e.re, width: s.width(), motion, dominant_pair: s.dominant_pair });
        }
    }
    out.sort_by(|x, y| x.energy.total_cmp(&y.energy));
    out
}

/// Delimited spectrum: index, Re E, Im E, Γ, dominant pair, weight.
pub fn spectrum_table(res: &SpectralResult, labels: &[String]) -> String {
    let mut s = String::from("index\tre_e\tim_e\tgamma\tchannel\tweight\n");
    for (i, st) in res.states.iter().enumerate() {
        s.push_str(&format!(
            "{i}\t{:.12}\t{:.6e}\t{:.6e}\t{}\t{:.6}\n",
            st.energy.re,
            st.energy.im,
            st.width(),
            labels.get(st.dominant_pair).map(String::as_str).unwrap_or("?"),
            st.dominant_weight.re
        ));
    }
    s
}
