//! Hyperangular Sturmian functions H^{l1,l2}_{p,𝒵,λ}(α) in a B-spline basis,
//! the Jacobi-polynomial hyperspherical harmonics used as a baseline, and the
//! α-integrals built from either family.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::sync::Arc;

use faer::Mat;
use libm::lgamma;
use serde::{Deserialize, Serialize};

use crate::bspline::{BsplineBasis, MeshSpec, SplineTable};
use crate::error::{Error, Result};
use crate::linalg::gen_sym_eigen;

/// Multipole factor v_q(α) = r_<^q / r_>^{q+1} in units of 1/R.
pub fn v_q(q: u32, alpha: f64) -> f64 {
    let (s, c) = alpha.sin_cos();
    if alpha <= FRAC_PI_4 {
        (s / c).powi(q as i32) / c
    } else {
        (c / s).powi(q as i32) / s
    }
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedChargeParams {
    /// 𝒵, the mean effective charge.
    pub calZ: f64,
    pub include_v0: bool,
}

impl ReducedChargeParams {
    pub fn new(cal_z: f64, include_v0: bool) -> Self {
        Self { calZ: cal_z, include_v0 }
    }

    /// Sturmian weight w(α) = −C̃(α).
    pub fn weight(&self, alpha: f64) -> f64 {
        let (s, c) = alpha.sin_cos();
        let w = self.calZ * (1.0 / c + 1.0 / s);
        if self.include_v0 {
            w - v_q(0, alpha)
        } else {
            w
        }
    }

    /// C̃(α).
    pub fn reduced_charge(&self, alpha: f64) -> f64 {
        -self.weight(alpha)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }

    pub fn from_sign(s: i64) -> Self {
        if s.rem_euclid(2) == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// B-spline basis on [0, π/2] with its quadrature tables and Galerkin matrices.
#[derive(Debug)]
pub struct AlphaSpace {
    pub basis: BsplineBasis,
    pub table: SplineTable,
    overlap: Mat<f64>,
    stiffness: Mat<f64>,
    inv_cos2: Mat<f64>,
    inv_sin2: Mat<f64>,
    /// Node index of the mirror image α → π/2 − α, when the rule is symmetric.
    mirror: Option<Vec<usize>>,
}

impl AlphaSpace {
    pub fn new(order: usize, mesh: &MeshSpec) -> Result<Arc<Self>> {
        let basis = BsplineBasis::new(order, mesh)?;
        Ok(Arc::new(Self::from_basis(basis)))
    }

    /// Basis with a knot of multiplicity `mult` at π/4 (see `BsplineBasis::with_quarter_knot`).
    pub fn with_quarter_knot(order: usize, mesh: &MeshSpec, mult: usize) -> Result<Arc<Self>> {
        let basis = BsplineBasis::with_quarter_knot(order, mesh, mult)?;
        Ok(Arc::new(Self::from_basis(basis)))
    }

    pub fn from_basis(basis: BsplineBasis) -> Self {
        let table = SplineTable::new(&basis, basis.order() + 6);
        let overlap = table.galerkin(0, 0, |_| 1.0);
        let stiffness = table.galerkin(1, 1, |_| 1.0);
        let inv_cos2 = table.galerkin(0, 0, |a| 1.0 / a.cos().powi(2));
        let inv_sin2 = table.galerkin(0, 0, |a| 1.0 / a.sin().powi(2));
        let nodes = &table.rule.nodes;
        let n = nodes.len();
        let mirror = basis
            .is_symmetric()
            .then(|| (0..n).map(|i| n - 1 - i).collect::<Vec<_>>())
            .filter(|m| m.iter().enumerate().all(|(i, &j)| (nodes[i] + nodes[j] - FRAC_PI_2).abs() < 1e-13));
        Self { basis, table, overlap, stiffness, inv_cos2, inv_sin2, mirror }
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.table.rule.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.table.rule.weights
    }

    pub fn is_symmetric(&self) -> bool {
        self.mirror.is_some()
    }

    /// Plain overlap ∫ B_i B_j.
    pub fn overlap(&self) -> &Mat<f64> {
        &self.overlap
    }

    /// Galerkin form of −d²/dα² + l1(l1+1)/cos²α + l2(l2+1)/sin²α − (λ+2)².
    fn casimir_shifted(&self, l1: u32, l2: u32, lambda: u32) -> Mat<f64> {
        let a1 = (l1 * (l1 + 1)) as f64;
        let a2 = (l2 * (l2 + 1)) as f64;
        let e = ((lambda + 2) * (lambda + 2)) as f64;
        let n = self.dim();
        Mat::from_fn(n, n, |i, j| {
            self.stiffness[(i, j)] + a1 * self.inv_cos2[(i, j)] + a2 * self.inv_sin2[(i, j)] - e * self.overlap[(i, j)]
        })
    }

    /// Symmetry-adapted combinations (B_i ± B_{N-1-i})/√2.
    fn parity_projector(&self, parity: Parity) -> Mat<f64> {
        let n = self.dim();
        let half = n / 2;
        let s = parity.sign();
        let mid = n % 2 == 1 && parity == Parity::Even;
        let m = half + usize::from(mid);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        Mat::from_fn(n, m, |i, k| {
            if k < half {
                if i == k {
                    r
                } else if i == n - 1 - k {
                    s * r
                } else {
                    0.0
                }
            } else if i == half {
                1.0
            } else {
                0.0
            }
        })
    }

    fn mirror(&self) -> Result<&[usize]> {
        self.mirror
            .as_deref()
            .ok_or_else(|| Error::Config("α mesh is not symmetric about π/4".into()))
    }
}

/// Where a hyperangular function's Casimir action comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum KetAction {
    /// (Λ̃² − Λ_λ) H = 2ρ w H.
    Sturmian { rho: f64, params: ReducedChargeParams },
    /// Λ̃² φ = ((λ_p + 2)² − 1/4 + ...) φ, stored as the shift (λ_p+2)² − (λ+2)².
    Harmonic { shift: f64 },
}

/// A single hyperangular function tabulated on the α quadrature nodes.
#[derive(Debug, Clone)]
pub struct AngularFunction {
    pub values: Vec<f64>,
    pub derivs: Vec<f64>,
    pub action: KetAction,
    pub parity: Option<Parity>,
}

impl AngularFunction {
    /// The image α → π/2 − α on a symmetric mesh.
    pub fn reflected(&self, mirror: &[usize]) -> Self {
        Self {
            values: mirror.iter().map(|&j| self.values[j]).collect(),
            derivs: mirror.iter().map(|&j| -self.derivs[j]).collect(),
            action: self.action,
            parity: self.parity,
        }
    }
}

#[derive(Debug, Clone)]
pub struct HyperangularSet {
    pub l1: u32,
    pub l2: u32,
    pub lambda: u32,
    pub params: ReducedChargeParams,
    pub rho: Vec<f64>,
    /// Column p holds c_i^p.
    pub coeffs: Mat<f64>,
    pub parity: Vec<Option<Parity>>,
    pub space: Arc<AlphaSpace>,
}

/// Solve (−∂² + l1(l1+1)/cos² + l2(l2+1)/sin² − (λ+2)²) H = 2ρ w H.
///
/// For l1 = l2 the even and odd sectors are solved separately; `parity`
/// restricts to one of them. Eigenvalues are returned ascending with
/// w-orthonormal eigenvectors.
pub fn solve_set(
    space: &Arc<AlphaSpace>,
    l1: u32,
    l2: u32,
    lambda: u32,
    params: ReducedChargeParams,
    n_keep: usize,
    parity: Option<Parity>,
) -> Result<HyperangularSet> {
    if params.calZ <= 0.0 || (params.include_v0 && params.calZ < 0.5) {
        return Err(Error::NotPositiveDefinite(format!(
            "reduced effective charge weight is indefinite for calZ = {}",
            params.calZ
        )));
    }
    if n_keep > space.dim() {
        return Err(Error::Dimension(format!("n_keep {n_keep} > B-spline dimension {}", space.dim())));
    }
    let a = space.casimir_shifted(l1, l2, lambda);
    let w = space.table.galerkin(0, 0, |x| params.weight(x));
    let sectors: Vec<Option<Parity>> = if l1 == l2 && space.is_symmetric() {
        match parity {
            Some(p) => vec![Some(p)],
            None => vec![Some(Parity::Even), Some(Parity::Odd)],
        }
    } else {
        if parity.is_some() && l1 != l2 {
            return Err(Error::Config(format!("parity selection needs l1 = l2, got ({l1},{l2})")));
        }
        if parity.is_some() {
            return Err(Error::Config("parity selection needs a symmetric α mesh".into()));
        }
        vec![None]
    };
    let n = space.dim();
    let mut found: Vec<(f64, Vec<f64>, Option<Parity>)> = Vec::new();
    for sec in sectors {
        let (vals, vecs) = match sec {
            Some(p) => {
                let pm = space.parity_projector(p);
                let ap = pm.transpose() * &a * &pm;
                let wp = pm.transpose() * &w * &pm;
                let (v, y) = gen_sym_eigen(&ap, &wp)?;
                (v, &pm * &y)
            }
            None => gen_sym_eigen(&a, &w)?,
        };
        for (k, &mu) in vals.iter().enumerate().take(n_keep) {
            let mut c: Vec<f64> = (0..n).map(|i| vecs[(i, k)]).collect();
            fix_sign(&mut c);
            found.push((0.5 * mu, c, sec));
        }
    }
    found.sort_by(|x, y| x.0.total_cmp(&y.0));
    found.truncate(n_keep);
    let tol = 1e-8 * found.last().map_or(1.0, |f| f.0.abs().max(1.0));
    if let Some(f) = found.iter().find(|f| f.0 < -tol) {
        return Err(Error::Domain(format!(
            "negative Sturmian eigenvalue ρ = {} for (l1,l2,λ) = ({l1},{l2},{lambda}); λ exceeds l1+l2",
            f.0
        )));
    }
    let coeffs = Mat::from_fn(n, found.len(), |i, k| found[k].1[i]);
    Ok(HyperangularSet {
        l1,
        l2,
        lambda,
        params,
        rho: found.iter().map(|f| f.0).collect(),
        coeffs,
        parity: found.iter().map(|f| f.2).collect(),
        space: space.clone(),
    })
}

fn fix_sign(c: &mut [f64]) {
    let m = c.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    if let Some(&first) = c.iter().find(|x| x.abs() > 1e-6 * m) {
        if first < 0.0 {
            c.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

impl HyperangularSet {
    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    pub fn coeff(&self, p: usize) -> Vec<f64> {
        (0..self.coeffs.nrows()).map(|i| self.coeffs[(i, p)]).collect()
    }

    /// H_p(α) (or its derivative).
    pub fn eval(&self, p: usize, alpha: f64, der: usize) -> f64 {
        let (first, d) = self.space.basis.eval_nonzero(alpha, der);
        let n = self.space.dim();
        d[der]
            .iter()
            .enumerate()
            .filter_map(|(j, v)| {
                let i = (first + j).checked_sub(1)?;
                (i < n).then(|| v * self.coeffs[(i, p)])
            })
            .sum()
    }

    /// The (l2, l1) set obtained by α → π/2 − α (coefficient reversal).
    pub fn reflected(&self) -> Result<Self> {
        self.space.mirror()?;
        let n = self.coeffs.nrows();
        Ok(Self {
            l1: self.l2,
            l2: self.l1,
            coeffs: Mat::from_fn(n, self.len(), |i, p| self.coeffs[(n - 1 - i, p)]),
            ..self.clone()
        })
    }

    pub fn function(&self, p: usize) -> AngularFunction {
        let c = self.coeff(p);
        AngularFunction {
            values: self.space.table.expand(&c, 0),
            derivs: self.space.table.expand(&c, 1),
            action: KetAction::Sturmian { rho: self.rho[p], params: self.params },
            parity: self.parity[p],
        }
    }

    pub fn functions(&self) -> Vec<AngularFunction> {
        (0..self.len()).map(|p| self.function(p)).collect()
    }
}

/// α-kernels for matrix elements ⟨H_A| k |H_B⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    One,
    Cos,
    Sin,
    Vq(u32),
    Cos2OverCos,
    Cos2OverSin,
    InvCos,
    InvSin,
    /// sin α ∂/∂α acting on the ket.
    SinDAlpha,
    /// cos α ∂/∂α acting on the ket.
    CosDAlpha,
    Weight(ReducedChargeParams),
}

impl Kernel {
    /// (multiplier, uses ket derivative)
    pub fn at(&self, a: f64) -> (f64, bool) {
        let (s, c) = a.sin_cos();
        match *self {
            Kernel::One => (1.0, false),
            Kernel::Cos => (c, false),
            Kernel::Sin => (s, false),
            Kernel::Vq(q) => (v_q(q, a), false),
            Kernel::Cos2OverCos => ((2.0 * a).cos() / c, false),
            Kernel::Cos2OverSin => ((2.0 * a).cos() / s, false),
            Kernel::InvCos => (1.0 / c, false),
            Kernel::InvSin => (1.0 / s, false),
            Kernel::SinDAlpha => (s, true),
            Kernel::CosDAlpha => (c, true),
            Kernel::Weight(p) => (p.weight(a), false),
        }
    }
}

/// ∫ f_A(α) k(α) f_B(α) dα on the shared quadrature.
pub fn integrate_pair(space: &AlphaSpace, a: &AngularFunction, b: &AngularFunction, kernel: Kernel) -> f64 {
    let nodes = space.nodes();
    let w = space.weights();
    let mut s = 0.0;
    for q in 0..nodes.len() {
        let (k, d) = kernel.at(nodes[q]);
        let fb = if d { b.derivs[q] } else { b.values[q] };
        s += w[q] * a.values[q] * k * fb;
    }
    s
}

pub fn alpha_matrix_element(
    set_a: &HyperangularSet,
    pa: usize,
    set_b: &HyperangularSet,
    pb: usize,
    kernel: Kernel,
) -> Result<f64> {
    if !Arc::ptr_eq(&set_a.space, &set_b.space) {
        return Err(Error::Config("hyperangular sets built on different B-spline bases".into()));
    }
    if pa >= set_a.len() || pb >= set_b.len() {
        return Err(Error::Domain(format!("function index out of range ({pa}, {pb})")));
    }
    Ok(integrate_pair(&set_a.space, &set_a.function(pa), &set_b.function(pb), kernel))
}

/// Jacobi polynomial P_n^{(a,b)}(x) and its x-derivative.
pub fn jacobi_p(n: usize, a: f64, b: f64, x: f64) -> (f64, f64) {
    let eval = |n: usize, a: f64, b: f64| -> f64 {
        if n == 0 {
            return 1.0;
        }
        let mut p0 = 1.0;
        let mut p1 = 0.5 * (a - b + (a + b + 2.0) * x);
        for k in 2..=n {
            let k = k as f64;
            let c = 2.0 * k + a + b;
            let a1 = 2.0 * k * (k + a + b) * (c - 2.0);
            let a2 = (c - 1.0) * (a * a - b * b);
            let a3 = (c - 2.0) * (c - 1.0) * c;
            let a4 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * c;
            let p2 = ((a2 + a3 * x) * p1 - a4 * p0) / a1;
            p0 = p1;
            p1 = p2;
        }
        p1
    };
    let v = eval(n, a, b);
    let d = if n == 0 { 0.0 } else { 0.5 * (n as f64 + a + b + 1.0) * eval(n - 1, a + 1.0, b + 1.0) };
    (v, d)
}

/// Unit-normalized hyperspherical harmonic N cos^{l1+1}α sin^{l2+1}α P_p^{(l2+½, l1+½)}(cos 2α).
pub fn jacobi_harmonic(l1: u32, l2: u32, p: usize, alpha: f64) -> (f64, f64) {
    let (a, b) = (l2 as f64 + 0.5, l1 as f64 + 0.5);
    let pf = p as f64;
    let ln_h = (a + b + 1.0) * std::f64::consts::LN_2 - (2.0 * pf + a + b + 1.0).ln()
        + lgamma(pf + a + 1.0)
        + lgamma(pf + b + 1.0)
        - lgamma(pf + a + b + 1.0)
        - lgamma(pf + 1.0);
    let norm = (0.5 * ((a + b + 2.0) * std::f64::consts::LN_2 - ln_h)).exp();
    let (s, c) = alpha.sin_cos();
    let x = (2.0 * alpha).cos();
    let (pj, dpj) = jacobi_p(p, a, b, x);
    let pre = c.powi(l1 as i32 + 1) * s.powi(l2 as i32 + 1);
    // d/dα [c^{l1+1} s^{l2+1}] = pre·((l2+1) c/s − (l1+1) s/c)
    let dpre = (l2 as f64 + 1.0) * c.powi(l1 as i32 + 2) * s.powi(l2 as i32)
        - (l1 as f64 + 1.0) * c.powi(l1 as i32) * s.powi(l2 as i32 + 2);
    let v = norm * pre * pj;
    let d = norm * (dpre * pj + pre * dpj * (-2.0 * (2.0 * alpha).sin()));
    (v, d)
}

/// Jacobi-polynomial hyperspherical harmonics tabulated on the α quadrature,
/// the comparison baseline for the Sturmian family.
#[derive(Debug, Clone)]
pub struct JacobiSet {
    pub l1: u32,
    pub l2: u32,
    pub indices: Vec<usize>,
    pub functions: Vec<AngularFunction>,
}

pub fn jacobi_reference_set(
    space: &AlphaSpace,
    l1: u32,
    l2: u32,
    lambda: u32,
    n_keep: usize,
    parity: Option<Parity>,
) -> Result<JacobiSet> {
    if parity.is_some() && l1 != l2 {
        return Err(Error::Config(format!("parity selection needs l1 = l2, got ({l1},{l2})")));
    }
    let base = ((lambda + 2) * (lambda + 2)) as f64;
    let mut indices = Vec::new();
    let mut functions = Vec::new();
    let mut p = 0usize;
    while functions.len() < n_keep {
        let par = (l1 == l2).then(|| Parity::from_sign(p as i64));
        if parity.is_none() || par == parity {
            let (values, derivs): (Vec<f64>, Vec<f64>) =
                space.nodes().iter().map(|&a| jacobi_harmonic(l1, l2, p, a)).unzip();
            let lp = (2 * p) as f64 + (l1 + l2) as f64;
            functions.push(AngularFunction {
                values,
                derivs,
                action: KetAction::Harmonic { shift: (lp + 2.0).powi(2) - base },
                parity: par,
            });
            indices.push(p);
        }
        p += 1;
    }
    Ok(JacobiSet { l1, l2, indices, functions })
}

/// Node mirror map of a symmetric space.
pub fn mirror_map(space: &AlphaSpace) -> Result<&[usize]> {
    space.mirror()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vq_continuous_at_quarter_pi() {
        for q in 0..8 {
            let a = v_q(q, FRAC_PI_4 - 1e-12);
            let b = v_q(q, FRAC_PI_4 + 1e-12);
            assert!((a - b).abs() < 1e-10);
            assert!((v_q(q, FRAC_PI_4) - 2f64.sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn weight_vanishes_at_quarter_pi_for_half() {
        let p = ReducedChargeParams::new(0.5, true);
        assert!(p.weight(FRAC_PI_4).abs() < 1e-14);
        assert!(p.weight(0.3) > 0.0);
    }

    #[test]
    fn indefinite_weight_rejected() {
        let space = AlphaSpace::new(7, &MeshSpec::Uniform { intervals: 20 }).unwrap();
        assert!(solve_set(&space, 0, 0, 0, ReducedChargeParams::new(0.4, true), 3, None).is_err());
    }
}
