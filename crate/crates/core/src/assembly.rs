//! Exchange-symmetrized product basis and the Hamiltonian/overlap in
//! Kronecker form
//!
//!   H = T_R ⊗ O_A + [1/R²] ⊗ K_A + [1/R] ⊗ V_A,   S = O_R ⊗ O_A,
//!
//! with T_R S_n = (κ_n v_n / R − κ_n²/2) S_n (ket action), K_A the reduced
//! Casimir remainder (Λ̃² − Λ_λ)/2 and V_A the effective charge C(α, r̂1, r̂2).
//! Angular factors are block matrices over (l1, l2) pairs; radial factors are
//! shared by every pair with the same λ.

use std::collections::HashMap;
use std::sync::Arc;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::angular_algebra::{multipole_coupling, AngularMomenta};
use crate::c64;
use crate::error::{Error, Result};
use crate::hyperangular::{
    jacobi_reference_set, mirror_map, solve_set, AlphaSpace, AngularFunction, KetAction, Parity, ReducedChargeParams,
};
use crate::hyperradial::{radial_block, RadialKernel, RadialSet};
use crate::linalg::{asymmetry, max_abs, sym_eigen, symmetrize};

#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetryBlock {
    pub L: u32,
    pub M: i32,
    pub spin: u32,
    /// Multipole truncation; `None` means 2·max(l) over the pairs.
    pub q_max: Option<u32>,
}

impl SymmetryBlock {
    /// Parity about π/4 admitted for l1 = l2 functions.
    pub fn diagonal_parity(&self) -> Parity {
        Parity::from_sign((self.spin + self.L) as i64)
    }

    /// Sign ε in Φ ∝ H Y_{l1 l2} + ε H^R Y_{l2 l1}.
    pub fn exchange_sign(&self, l1: u32, l2: u32) -> f64 {
        if (self.spin + l1 + l2 + self.L) % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LambdaMode {
    /// One λ shared by every pair.
    Global(u32),
    /// λ = l1 + l2 per pair.
    PerPair,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AngularFamily {
    Sturmian,
    Jacobi,
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AngularSetSpec {
    pub calZ: f64,
    pub count: usize,
    /// Keep v_0 in the Sturmian weight (ignored when the interaction is off).
    #[serde(default = "yes")]
    pub include_v0: bool,
}

fn yes() -> bool {
    true
}

impl AngularSetSpec {
    pub fn new(cal_z: f64, count: usize) -> Self {
        Self { calZ: cal_z, count, include_v0: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialSetSpec {
    pub kappa: f64,
    pub count: usize,
}

/// Everything that fixes the basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisSpec {
    pub block: SymmetryBlock,
    pub pairs: Vec<(u32, u32)>,
    pub radial: Vec<RadialSetSpec>,
    pub angular: Vec<AngularSetSpec>,
    pub lambda: LambdaMode,
    pub family: AngularFamily,
}

/// One basis label τ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Tau {
    pub pair: usize,
    pub ang_set: usize,
    pub p: usize,
    pub rad_set: usize,
    pub n: usize,
}

#[derive(Debug, Clone)]
pub struct PairChannel {
    pub l1: u32,
    pub l2: u32,
    pub lambda: u32,
    /// Parity about π/4 admitted (l1 = l2 only).
    pub parity: Option<Parity>,
    /// (angular set, p) in basis order.
    pub angular: Vec<(usize, usize)>,
}

impl PairChannel {
    /// 1/√(2(1+δ_{l1 l2})).
    pub fn normalization(&self) -> f64 {
        if self.l1 == self.l2 {
            0.5
        } else {
            std::f64::consts::FRAC_1_SQRT_2
        }
    }
}

#[derive(Debug, Clone)]
pub struct ChannelBasis {
    pub spec: BasisSpec,
    pub channels: Vec<PairChannel>,
    /// (radial set, n) in basis order, per λ.
    pub radial: Vec<(usize, usize)>,
}

impl ChannelBasis {
    pub fn n_radial(&self) -> usize {
        self.radial.len()
    }

    pub fn dim(&self) -> usize {
        self.channels.iter().map(|c| c.angular.len()).sum::<usize>() * self.n_radial()
    }

    /// Labels ordered by pair, angular set, p, radial set, n.
    pub fn taus(&self) -> Vec<Tau> {
        let mut v = Vec::with_capacity(self.dim());
        for (pi, ch) in self.channels.iter().enumerate() {
            for &(ang_set, p) in &ch.angular {
                for &(rad_set, n) in &self.radial {
                    v.push(Tau { pair: pi, ang_set, p, rad_set, n });
                }
            }
        }
        v
    }

    pub fn q_max(&self) -> u32 {
        self.spec
            .block
            .q_max
            .unwrap_or_else(|| 2 * self.channels.iter().map(|c| c.l1.max(c.l2)).max().unwrap_or(0))
    }

    pub fn radial_sets(&self, lambda: u32, theta: f64) -> Vec<RadialSet> {
        self.spec
            .radial
            .iter()
            .map(|r| RadialSet::new(r.kappa, lambda, r.count).scaled(theta))
            .collect()
    }

    /// Distinct λ values in pair order.
    pub fn lambdas(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self.channels.iter().map(|c| c.lambda).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn pair_label(&self, pair: usize) -> String {
        let c = &self.channels[pair];
        format!("({},{})", c.l1, c.l2)
    }
}

/// Validate the pair list against (L, parity) and enumerate the labels.
pub fn enumerate_basis(spec: &BasisSpec) -> Result<ChannelBasis> {
    let b = &spec.block;
    if spec.pairs.is_empty() {
        return Err(Error::Config("empty pair list".into()));
    }
    if b.spin > 1 {
        return Err(Error::Config(format!("spin {} is not 0 or 1", b.spin)));
    }
    if b.M.unsigned_abs() > b.L {
        return Err(Error::Config(format!("|M| = {} > L = {}", b.M.abs(), b.L)));
    }
    if spec.radial.is_empty() || spec.radial.iter().any(|r| r.count == 0 || !(r.kappa > 0.0)) {
        return Err(Error::Config("radial sets must be non-empty with κ > 0".into()));
    }
    if spec.angular.is_empty() || spec.angular.iter().any(|a| a.count == 0) {
        return Err(Error::Config("angular sets must be non-empty".into()));
    }
    if spec.family == AngularFamily::Jacobi && spec.angular.len() != 1 {
        return Err(Error::Config("the Jacobi family takes exactly one angular count".into()));
    }
    let mut channels: Vec<PairChannel> = Vec::new();
    let parity0 = (spec.pairs[0].0 + spec.pairs[0].1) % 2;
    for &(a, c) in &spec.pairs {
        let (l1, l2) = (a.min(c), a.max(c));
        if AngularMomenta::new(l1, l2, b.L, b.M).is_err() {
            return Err(Error::Config(format!("pair ({a},{c}) cannot couple to L = {}", b.L)));
        }
        if (l1 + l2) % 2 != parity0 {
            return Err(Error::Config(format!("pair ({a},{c}) has the wrong parity for this block")));
        }
        if channels.iter().any(|ch| ch.l1 == l1 && ch.l2 == l2) {
            return Err(Error::Config(format!("duplicate pair ({l1},{l2})")));
        }
        let lambda = match spec.lambda {
            LambdaMode::Global(l) => l,
            LambdaMode::PerPair => l1 + l2,
        };
        if lambda > l1 + l2 && spec.family == AngularFamily::Sturmian {
            return Err(Error::Config(format!("λ = {lambda} exceeds l1 + l2 for pair ({l1},{l2})")));
        }
        let parity = (l1 == l2).then(|| b.diagonal_parity());
        let angular = spec
            .angular
            .iter()
            .enumerate()
            .flat_map(|(k, s)| (0..s.count).map(move |p| (k, p)))
            .collect();
        channels.push(PairChannel { l1, l2, lambda, parity, angular });
    }
    let radial = spec
        .radial
        .iter()
        .enumerate()
        .flat_map(|(k, s)| (0..s.count).map(move |i| (k, i)))
        .collect();
    Ok(ChannelBasis { spec: spec.clone(), channels, radial })
}

/// Angular component of a symmetrized channel: Y_{l1 l2} times tabulated α-functions.
struct Component {
    ypair: (u32, u32),
    sign: f64,
    cols: std::ops::Range<usize>,
}

/// The α-factors of H in the channel basis, independent of θ.
#[derive(Debug, Clone)]
pub struct AngularOperators {
    /// Per pair: ⟨Φ'|Φ⟩ angular factor.
    pub overlap: Vec<Mat<f64>>,
    /// Per pair: (Λ̃² − Λ_λ)/2.
    pub kinetic: Vec<Mat<f64>>,
    /// Per (pair', pair): effective charge C.
    pub potential: Vec<Vec<Mat<f64>>>,
    /// Largest asymmetry seen in the kinetic blocks before symmetrization.
    pub kinetic_asymmetry: f64,
}

/// Tabulated α-functions of all channels, with the reflected components.
pub struct AngularTables {
    pub space: Arc<AlphaSpace>,
    /// nodes × columns
    pub values: Mat<f64>,
    pub derivs: Mat<f64>,
    pub actions: Vec<KetAction>,
    comps: Vec<Vec<Component>>,
    norms: Vec<f64>,
    pub rho: Vec<Vec<f64>>,
}

/// Build the hyperangular functions of every channel.
pub fn build_angular_tables(basis: &ChannelBasis, space: &Arc<AlphaSpace>, interaction: bool) -> Result<AngularTables> {
    let spec = &basis.spec;
    let mut cols_v: Vec<AngularFunction> = Vec::new();
    let mut comps = Vec::new();
    let mut norms = Vec::new();
    let mut rho = Vec::new();
    for ch in &basis.channels {
        let mut funcs: Vec<AngularFunction> = Vec::new();
        let mut rho_ch = Vec::new();
        match spec.family {
            AngularFamily::Sturmian => {
                for (k, s) in spec.angular.iter().enumerate() {
                    let params = ReducedChargeParams::new(s.calZ, interaction && s.include_v0);
                    let set = solve_set(space, ch.l1, ch.l2, ch.lambda, params, s.count, ch.parity)?;
                    if set.len() < s.count {
                        return Err(Error::Dimension(format!("angular set {k} yields only {} functions", set.len())));
                    }
                    rho_ch.extend_from_slice(&set.rho);
                    funcs.extend(set.functions());
                }
            }
            AngularFamily::Jacobi => {
                let js = jacobi_reference_set(space, ch.l1, ch.l2, ch.lambda, spec.angular[0].count, ch.parity)?;
                funcs.extend(js.functions);
            }
        }
        let start = cols_v.len();
        let n = funcs.len();
        let mut cs = vec![Component { ypair: (ch.l1, ch.l2), sign: 1.0, cols: start..start + n }];
        if ch.l1 != ch.l2 {
            let mirror = mirror_map(space)?;
            let refl: Vec<AngularFunction> = funcs.iter().map(|f| f.reflected(mirror)).collect();
            cols_v.extend(funcs);
            cs.push(Component {
                ypair: (ch.l2, ch.l1),
                sign: spec.block.exchange_sign(ch.l1, ch.l2),
                cols: start + n..start + 2 * n,
            });
            cols_v.extend(refl);
            norms.push(std::f64::consts::FRAC_1_SQRT_2);
        } else {
            cols_v.extend(funcs);
            norms.push(1.0);
        }
        comps.push(cs);
        rho.push(rho_ch);
    }
    let nn = space.nodes().len();
    let m = cols_v.len();
    let values = Mat::from_fn(nn, m, |q, j| cols_v[j].values[q]);
    let derivs = Mat::from_fn(nn, m, |q, j| cols_v[j].derivs[q]);
    let actions = cols_v.iter().map(|f| f.action).collect();
    Ok(AngularTables { space: space.clone(), values, derivs, actions, comps, norms, rho })
}

impl AngularTables {
    /// Fᵀ diag(w·k) G over all tabulated columns; `der` selects derivative columns for the ket.
    pub fn gram<K: Fn(f64) -> f64>(&self, k: K, der: bool) -> Mat<f64> {
        let nodes = self.space.nodes();
        let w = self.space.weights();
        let ket = if der { &self.derivs } else { &self.values };
        let scaled = Mat::from_fn(ket.nrows(), ket.ncols(), |q, j| w[q] * k(nodes[q]) * ket[(q, j)]);
        self.values.transpose() * &scaled
    }

    pub fn n_pairs(&self) -> usize {
        self.comps.len()
    }

    pub fn n_functions(&self, pair: usize) -> usize {
        self.comps[pair][0].cols.len()
    }

    /// Contract a Gram-type matrix into the symmetrized (pair', pair) block:
    /// N'N Σ_{c',c} s' s · coef(y', y) · G[c', c].
    pub fn contract<F: Fn((u32, u32), (u32, u32)) -> f64>(&self, g: &Mat<f64>, pb: usize, pk: usize, coef: F) -> Mat<f64> {
        cross_contract(self, self, g, pb, pk, coef)
    }

    /// Fᵀ diag(w·k) G with F from `self` and G from `ket` (same α space).
    pub fn cross_gram<K: Fn(f64) -> f64>(&self, ket: &AngularTables, k: K, der: bool) -> Mat<f64> {
        let nodes = self.space.nodes();
        let w = self.space.weights();
        let g = if der { &ket.derivs } else { &ket.values };
        let scaled = Mat::from_fn(g.nrows(), g.ncols(), |q, j| w[q] * k(nodes[q]) * g[(q, j)]);
        self.values.transpose() * &scaled
    }
}

/// `contract` between two table sets; `g` indexed by (bra column, ket column).
pub fn cross_contract<F: Fn((u32, u32), (u32, u32)) -> f64>(
    bra: &AngularTables,
    ket: &AngularTables,
    g: &Mat<f64>,
    pb: usize,
    pk: usize,
    coef: F,
) -> Mat<f64> {
    let nb = bra.n_functions(pb);
    let nk = ket.n_functions(pk);
    let mut out = Mat::<f64>::zeros(nb, nk);
    let nrm = bra.norms[pb] * ket.norms[pk];
    for cb in &bra.comps[pb] {
        for ck in &ket.comps[pk] {
            let c = coef(cb.ypair, ck.ypair);
            if c == 0.0 {
                continue;
            }
            let f = nrm * cb.sign * ck.sign * c;
            for j in 0..nk {
                for i in 0..nb {
                    out[(i, j)] += f * g[(cb.cols.start + i, ck.cols.start + j)];
                }
            }
        }
    }
    out
}

fn same_y(a: (u32, u32), b: (u32, u32)) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

/// Assemble O_A, K_A and V_A.
pub fn angular_operators(basis: &ChannelBasis, tables: &AngularTables, z: f64, interaction: bool) -> Result<AngularOperators> {
    let np = basis.channels.len();
    let g_one = tables.gram(|_| 1.0, false);
    let overlap: Vec<Mat<f64>> = (0..np).map(|p| tables.contract(&g_one, p, p, same_y)).collect();

    // Kinetic: ket action per column.
    let mut by_params: Vec<(ReducedChargeParams, Mat<f64>)> = Vec::new();
    for a in &tables.actions {
        if let KetAction::Sturmian { params, .. } = a {
            if !by_params.iter().any(|(p, _)| p == params) {
                let p = *params;
                by_params.push((p, tables.gram(move |x| p.weight(x), false)));
            }
        }
    }
    let n_tab = tables.values.ncols();
    let mut g_kin = Mat::<f64>::zeros(n_tab, n_tab);
    for (j, a) in tables.actions.iter().enumerate() {
        match a {
            KetAction::Sturmian { rho, params } => {
                let g = &by_params.iter().find(|(p, _)| p == params).unwrap().1;
                for i in 0..n_tab {
                    g_kin[(i, j)] = rho * g[(i, j)];
                }
            }
            KetAction::Harmonic { shift } => {
                for i in 0..n_tab {
                    g_kin[(i, j)] = 0.5 * shift * g_one[(i, j)];
                }
            }
        }
    }
    let mut asym: f64 = 0.0;
    let kinetic: Vec<Mat<f64>> = (0..np)
        .map(|p| {
            let mut k = tables.contract(&g_kin, p, p, same_y);
            asym = asym.max(asymmetry(&k) / max_abs(&k).max(1.0));
            symmetrize(&mut k);
            k
        })
        .collect();
    if asym > 1e-8 {
        return Err(Error::Convergence(format!("kinetic angular block asymmetric by {asym:e}")));
    }

    let g_nuc = tables.gram(|a| 1.0 / a.cos() + 1.0 / a.sin(), false);
    let q_max = if interaction { basis.q_max() } else { 0 };
    let mut g_q: HashMap<u32, Mat<f64>> = HashMap::new();
    if interaction {
        for q in 0..=q_max {
            g_q.insert(q, tables.gram(move |a| crate::hyperangular::v_q(q, a), false));
        }
    }
    let (ll, mm) = (basis.spec.block.L, basis.spec.block.M);
    let mut potential = Vec::with_capacity(np);
    for pb in 0..np {
        let mut row = Vec::with_capacity(np);
        for pk in 0..np {
            let mut v = tables.contract(&g_nuc, pb, pk, same_y);
            for x in v.as_mut().col_iter_mut() {
                for e in x.iter_mut() {
                    *e *= -z;
                }
            }
            if interaction {
                for q in 0..=q_max {
                    let g = &g_q[&q];
                    let add = tables.contract(g, pb, pk, |yb, yk| {
                        let b = AngularMomenta { l1: yb.0, l2: yb.1, L: ll, M: mm };
                        let k = AngularMomenta { l1: yk.0, l2: yk.1, L: ll, M: mm };
                        multipole_coupling(&b, &k, q)
                    });
                    v += add;
                }
            }
            row.push(v);
        }
        potential.push(row);
    }
    // exact symmetry of the full potential
    for pb in 0..np {
        for pk in pb..np {
            let t = potential[pk][pb].transpose().to_owned();
            let avg = Mat::from_fn(t.nrows(), t.ncols(), |i, j| 0.5 * (potential[pb][pk][(i, j)] + t[(i, j)]));
            potential[pk][pb] = avg.transpose().to_owned();
            potential[pb][pk] = avg;
        }
    }
    Ok(AngularOperators { overlap, kinetic, potential, kinetic_asymmetry: asym })
}

/// Radial factors for one (λ', λ) combination.
#[derive(Debug, Clone)]
pub struct RadialOperators {
    pub overlap: Mat<c64>,
    pub kinetic: Mat<c64>,
    pub inv_r: Mat<c64>,
    pub inv_r2: Mat<c64>,
}

fn block_concat(sa: &[RadialSet], sb: &[RadialSet], kernel: RadialKernel) -> Result<Mat<c64>> {
    let na: usize = sa.iter().map(|s| s.count).sum();
    let nb: usize = sb.iter().map(|s| s.count).sum();
    let mut m = Mat::<c64>::zeros(na, nb);
    let mut r0 = 0;
    for a in sa {
        let mut c0 = 0;
        for b in sb {
            let blk = radial_block(a, b, kernel)?;
            for j in 0..b.count {
                for i in 0..a.count {
                    m[(r0 + i, c0 + j)] = blk[(i, j)];
                }
            }
            c0 += b.count;
        }
        r0 += a.count;
    }
    Ok(m)
}

pub fn radial_operators(basis: &ChannelBasis, lb: u32, lk: u32, theta: f64) -> Result<RadialOperators> {
    let sa = basis.radial_sets(lb, theta);
    let sb = basis.radial_sets(lk, theta);
    let overlap = block_concat(&sa, &sb, RadialKernel::One)?;
    let inv_r = block_concat(&sa, &sb, RadialKernel::InvR)?;
    let inv_r2 = block_concat(&sa, &sb, RadialKernel::InvR2)?;
    // ket action: T S_n = (κ̃ v_n / R − κ̃²/2) S_n
    let mut kin = Mat::<c64>::zeros(overlap.nrows(), overlap.ncols());
    let mut c0 = 0;
    for s in &sb {
        let k = s.kappa_complex();
        for (j, n) in s.ns().enumerate() {
            let v = n as f64 + 1.5;
            for i in 0..overlap.nrows() {
                kin[(i, c0 + j)] = k * v * inv_r[(i, c0 + j)] - k * k * 0.5 * overlap[(i, c0 + j)];
            }
        }
        c0 += s.count;
    }
    Ok(RadialOperators { overlap, kinetic: kin, inv_r, inv_r2 })
}

/// H and S in structured (Kronecker) form.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub basis: ChannelBasis,
    pub angular: Arc<AngularOperators>,
    pub radial: HashMap<(u32, u32), RadialOperators>,
    pub theta: f64,
}

pub fn assemble_with(basis: &ChannelBasis, angular: Arc<AngularOperators>, theta: f64) -> Result<AssembledSystem> {
    let mut radial = HashMap::new();
    for &lb in &basis.lambdas() {
        for &lk in &basis.lambdas() {
            radial.insert((lb, lk), radial_operators(basis, lb, lk, theta)?);
        }
    }
    // symmetrize the same-λ kinetic factor (exact in infinite precision)
    for lam in basis.lambdas() {
        let r = radial.get_mut(&(lam, lam)).unwrap();
        let n = r.kinetic.nrows();
        let k = Mat::from_fn(n, n, |i, j| (r.kinetic[(i, j)] + r.kinetic[(j, i)]) * 0.5);
        r.kinetic = k;
    }
    Ok(AssembledSystem { basis: basis.clone(), angular, radial, theta })
}

/// Inputs of a full assembly.
#[derive(Debug, Clone)]
pub struct PhysicsSpec {
    /// Nuclear charge Z.
    pub z: f64,
    /// false drops the electron–electron interaction (U = 0).
    pub interaction: bool,
}

pub fn assemble(basis: &ChannelBasis, space: &Arc<AlphaSpace>, phys: &PhysicsSpec, theta: f64) -> Result<AssembledSystem> {
    let tables = build_angular_tables(basis, space, phys.interaction)?;
    let ang = angular_operators(basis, &tables, phys.z, phys.interaction)?;
    assemble_with(basis, Arc::new(ang), theta)
}

impl AssembledSystem {
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    fn offsets(&self) -> Vec<usize> {
        let nr = self.basis.n_radial();
        let mut off = vec![0];
        for ch in &self.basis.channels {
            off.push(off.last().unwrap() + ch.angular.len() * nr);
        }
        off
    }

    /// Dense H (unpruned) in the τ ordering.
    pub fn dense_hamiltonian(&self) -> Mat<c64> {
        self.dense(true)
    }

    /// Dense overlap (unpruned).
    pub fn dense_overlap(&self) -> Mat<c64> {
        self.dense(false)
    }

    fn dense(&self, ham: bool) -> Mat<c64> {
        let n = self.dim();
        let nr = self.basis.n_radial();
        let off = self.offsets();
        let mut m = Mat::<c64>::zeros(n, n);
        let chs = &self.basis.channels;
        for (pb, cb) in chs.iter().enumerate() {
            for (pk, ck) in chs.iter().enumerate() {
                let rad = &self.radial[&(cb.lambda, ck.lambda)];
                let a = &self.angular;
                for jb in 0..cb.angular.len() {
                    for jk in 0..ck.angular.len() {
                        let (o, k, v) = if pb == pk {
                            (a.overlap[pb][(jb, jk)], a.kinetic[pb][(jb, jk)], a.potential[pb][pk][(jb, jk)])
                        } else {
                            (0.0, 0.0, a.potential[pb][pk][(jb, jk)])
                        };
                        for ik in 0..nr {
                            for ib in 0..nr {
                                let val = if ham {
                                    rad.kinetic[(ib, ik)] * o + rad.inv_r2[(ib, ik)] * k + rad.inv_r[(ib, ik)] * v
                                } else {
                                    rad.overlap[(ib, ik)] * o
                                };
                                m[(off[pb] + jb * nr + ib, off[pk] + jk * nr + ik)] = val;
                            }
                        }
                    }
                }
            }
        }
        m
    }

    /// Project onto the product eigenspaces of the radial and angular overlaps,
    /// keeping combinations with σ_i μ_j > threshold · max.
    pub fn prune(&self, threshold: f64) -> Result<PrunedSystem> {
        if !(threshold > 0.0) {
            return Err(Error::Config(format!("pruning threshold {threshold} must be positive")));
        }
        let mut rad_eig: HashMap<u32, (Vec<f64>, Mat<f64>)> = HashMap::new();
        for lam in self.basis.lambdas() {
            let o = &self.radial[&(lam, lam)].overlap;
            let re = Mat::from_fn(o.nrows(), o.ncols(), |i, j| 0.5 * (o[(i, j)].re + o[(j, i)].re));
            rad_eig.insert(lam, sym_eigen(&re)?);
        }
        let ang_eig: Vec<(Vec<f64>, Mat<f64>)> =
            self.angular.overlap.iter().map(sym_eigen).collect::<Result<_>>()?;
        let mut top: f64 = 0.0;
        for (pi, ch) in self.basis.channels.iter().enumerate() {
            let sr = rad_eig[&ch.lambda].0.last().copied().unwrap_or(0.0);
            let sa = ang_eig[pi].0.last().copied().unwrap_or(0.0);
            top = top.max(sr * sa);
        }
        let cut = threshold * top;
        let mut blocks = Vec::new();
        let mut discarded = Vec::new();
        let mut dim = 0;
        for (pi, ch) in self.basis.channels.iter().enumerate() {
            let (sr, ur) = &rad_eig[&ch.lambda];
            let (sa, ua) = &ang_eig[pi];
            let mut kept = Vec::new();
            for (j, &mu) in sa.iter().enumerate() {
                for (i, &sg) in sr.iter().enumerate() {
                    if mu > 0.0 && sg > 0.0 && mu * sg > cut {
                        kept.push((j, i));
                    } else {
                        discarded.push(mu * sg);
                    }
                }
            }
            let xa = Mat::from_fn(ua.nrows(), ua.ncols(), |r, j| if sa[j] > 0.0 { ua[(r, j)] / sa[j].sqrt() } else { 0.0 });
            let xr = Mat::from_fn(ur.nrows(), ur.ncols(), |r, i| if sr[i] > 0.0 { ur[(r, i)] / sr[i].sqrt() } else { 0.0 });
            dim += kept.len();
            blocks.push(PrunedBlock { xa, xr, kept, offset: 0 });
        }
        if dim == 0 {
            return Err(Error::Dimension("everything was pruned".into()));
        }
        let mut o = 0;
        for b in &mut blocks {
            b.offset = o;
            o += b.kept.len();
        }
        // transformed factors
        let np = blocks.len();
        let mut ang = Vec::with_capacity(np);
        for pb in 0..np {
            let mut row = Vec::with_capacity(np);
            for pk in 0..np {
                let xb = &blocks[pb].xa;
                let xk = &blocks[pk].xa;
                let v = xb.transpose() * &self.angular.potential[pb][pk] * xk;
                let (o, k) = if pb == pk {
                    (
                        Some(xb.transpose() * &self.angular.overlap[pb] * xk),
                        Some(xb.transpose() * &self.angular.kinetic[pb] * xk),
                    )
                } else {
                    (None, None)
                };
                row.push(AngPieces { o, k, v });
            }
            ang.push(row);
        }
        let mut rad = HashMap::new();
        for (&(lb, lk), r) in &self.radial {
            let xb = to_c(&rad_eig[&lb].1, &rad_eig[&lb].0);
            let xk = to_c(&rad_eig[&lk].1, &rad_eig[&lk].0);
            let t = |m: &Mat<c64>| xb.transpose() * m * &xk;
            rad.insert(
                (lb, lk),
                RadialOperators { overlap: t(&r.overlap), kinetic: t(&r.kinetic), inv_r: t(&r.inv_r), inv_r2: t(&r.inv_r2) },
            );
        }
        Ok(PrunedSystem {
            lambdas: self.basis.channels.iter().map(|c| c.lambda).collect(),
            blocks,
            ang,
            rad,
            dim,
            full_dim: self.dim(),
            discarded,
            theta: self.theta,
            threshold,
        })
    }
}

fn to_c(u: &Mat<f64>, s: &[f64]) -> Mat<c64> {
    Mat::from_fn(u.nrows(), u.ncols(), |r, i| {
        if s[i] > 0.0 {
            c64::new(u[(r, i)] / s[i].sqrt(), 0.0)
        } else {
            c64::new(0.0, 0.0)
        }
    })
}

#[derive(Debug, Clone)]
pub struct PrunedBlock {
    /// Angular overlap eigenvectors scaled by μ^{-1/2}.
    pub xa: Mat<f64>,
    /// Radial overlap eigenvectors scaled by σ^{-1/2}.
    pub xr: Mat<f64>,
    /// Retained (angular j, radial i) combinations.
    pub kept: Vec<(usize, usize)>,
    pub offset: usize,
}

#[derive(Debug, Clone)]
struct AngPieces {
    o: Option<Mat<f64>>,
    k: Option<Mat<f64>>,
    v: Mat<f64>,
}

/// H projected onto an orthonormal basis of the retained overlap eigenspace.
#[derive(Debug, Clone)]
pub struct PrunedSystem {
    lambdas: Vec<u32>,
    pub blocks: Vec<PrunedBlock>,
    ang: Vec<Vec<AngPieces>>,
    rad: HashMap<(u32, u32), RadialOperators>,
    pub dim: usize,
    pub full_dim: usize,
    /// Products σ_i μ_j of the discarded directions.
    pub discarded: Vec<f64>,
    pub theta: f64,
    pub threshold: f64,
}

impl PrunedSystem {
    pub fn is_real(&self) -> bool {
        self.theta == 0.0
    }

    /// Entry ⟨b|H|k⟩ of the pruned, orthonormal problem.
    #[inline]
    fn entry(&self, pb: usize, jb: usize, ib: usize, pk: usize, jk: usize, ik: usize) -> c64 {
        let a = &self.ang[pb][pk];
        let r = &self.rad[&(self.lambdas[pb], self.lambdas[pk])];
        let mut v = r.inv_r[(ib, ik)] * a.v[(jb, jk)];
        if let (Some(o), Some(k)) = (&a.o, &a.k) {
            v += r.kinetic[(ib, ik)] * o[(jb, jk)] + r.inv_r2[(ib, ik)] * k[(jb, jk)];
        }
        v
    }

    /// Dense pruned Hamiltonian (complex-symmetric).
    pub fn dense_complex(&self) -> Mat<c64> {
        let n = self.dim;
        let mut m = Mat::<c64>::zeros(n, n);
        self.fill(|r, c, v| m[(r, c)] = v);
        m
    }

    /// Dense pruned Hamiltonian for θ = 0.
    pub fn dense_real(&self) -> Mat<f64> {
        let n = self.dim;
        let mut m = Mat::<f64>::zeros(n, n);
        self.fill(|r, c, v| m[(r, c)] = v.re);
        let nn = m.nrows();
        for j in 0..nn {
            for i in 0..j {
                let a = 0.5 * (m[(i, j)] + m[(j, i)]);
                m[(i, j)] = a;
                m[(j, i)] = a;
            }
        }
        m
    }

    fn fill<F: FnMut(usize, usize, c64)>(&self, mut put: F) {
        for (pb, bb) in self.blocks.iter().enumerate() {
            for (pk, bk) in self.blocks.iter().enumerate() {
                for (ck, &(jk, ik)) in bk.kept.iter().enumerate() {
                    for (cb, &(jb, ib)) in bb.kept.iter().enumerate() {
                        put(bb.offset + cb, bk.offset + ck, self.entry(pb, jb, ib, pk, jk, ik));
                    }
                }
            }
        }
    }

    /// y = H x without forming H.
    pub fn matvec(&self, x: &[c64]) -> Vec<c64> {
        let mut y = vec![c64::new(0.0, 0.0); self.dim];
        for (pb, bb) in self.blocks.iter().enumerate() {
            for (pk, bk) in self.blocks.iter().enumerate() {
                let a = &self.ang[pb][pk];
                let r = &self.rad[&(self.lambdas[pb], self.lambdas[pk])];
                let nja = bk.xa.ncols();
                let nir = bk.xr.ncols();
                // X_k as a (j, i) matrix
                let mut xk = Mat::<c64>::zeros(nja, nir);
                for (c, &(j, i)) in bk.kept.iter().enumerate() {
                    xk[(j, i)] = x[bk.offset + c];
                }
                let mut terms: Vec<(&Mat<f64>, &Mat<c64>)> = vec![(&a.v, &r.inv_r)];
                if let (Some(o), Some(k)) = (&a.o, &a.k) {
                    terms.push((o, &r.kinetic));
                    terms.push((k, &r.inv_r2));
                }
                let njb = bb.xa.ncols();
                let nib = bb.xr.ncols();
                let mut yb = Mat::<c64>::zeros(njb, nib);
                for (am, rm) in terms {
                    let amc = Mat::from_fn(am.nrows(), am.ncols(), |i, j| c64::new(am[(i, j)], 0.0));
                    yb += &amc * &xk * rm.transpose();
                }
                for (c, &(j, i)) in bb.kept.iter().enumerate() {
                    y[bb.offset + c] += yb[(j, i)];
                }
            }
        }
        y
    }

    /// Map a pruned eigenvector to primitive coefficients per pair (angular × radial).
    pub fn expand(&self, y: &[c64]) -> Vec<Mat<c64>> {
        self.blocks
            .iter()
            .map(|b| {
                let mut yk = Mat::<c64>::zeros(b.xa.ncols(), b.xr.ncols());
                for (c, &(j, i)) in b.kept.iter().enumerate() {
                    yk[(j, i)] = y[b.offset + c];
                }
                let xa = Mat::from_fn(b.xa.nrows(), b.xa.ncols(), |i, j| c64::new(b.xa[(i, j)], 0.0));
                let xr = Mat::from_fn(b.xr.nrows(), b.xr.ncols(), |i, j| c64::new(b.xr[(i, j)], 0.0));
                &xa * &yk * xr.transpose()
            })
            .collect()
    }

    /// Weight of each pair in a normalized pruned vector.
    pub fn pair_weights(&self, y: &[c64]) -> Vec<c64> {
        self.blocks
            .iter()
            .map(|b| (0..b.kept.len()).map(|c| y[b.offset + c] * y[b.offset + c]).sum())
            .collect()
    }
}
