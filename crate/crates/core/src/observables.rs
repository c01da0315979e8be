//! Dipole matrices (length and velocity gauge, z polarization, M = 0) and
//! oscillator strengths.
//!
//! With ψ = Ψ / (R^{5/2} sinα cosα) the volume element drops out and, for
//! electron 1,
//!   ∂/∂z₁ → cosθ₁ [cosα (∂_R − 5/(2R)) + (cos2α/cosα − sinα ∂_α)/R]
//!           − sinθ₁∂_θ₁ /(R cosα),
//! and for electron 2 the same with cosα → sinα, cos2α/cosα → −cos2α/sinα,
//! −sinα∂_α → cosα∂_α.

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::angular_algebra::{
    dipole_angular_dtheta1, dipole_angular_dtheta2, dipole_angular_theta1, dipole_angular_theta2, w3j, AngularMomenta,
};
use crate::assembly::{cross_contract, AngularTables, ChannelBasis, PrunedSystem};
use crate::error::{Error, Result};
use crate::hyperradial::{real_radial_block, RadialKernel};
use crate::solver::SpectralResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gauge {
    Length,
    Velocity,
}

/// ⟨Ψ'|D|Ψ⟩ in primitive channel functions, kept as Kronecker terms per pair block.
#[derive(Debug, Clone)]
pub struct DipoleBlock {
    pub gauge: Gauge,
    /// [bra pair][ket pair] → Σ angular ⊗ radial.
    pub terms: Vec<Vec<Vec<(Mat<f64>, Mat<f64>)>>>,
    /// False when the selection rules forbid the block (it is then identically zero).
    pub allowed: bool,
    bra_dims: Vec<(usize, usize)>,
    ket_dims: Vec<(usize, usize)>,
}

fn radial_cross(bra: &ChannelBasis, lb: u32, ket: &ChannelBasis, lk: u32, kernel: RadialKernel) -> Result<Mat<f64>> {
    let sa = bra.radial_sets(lb, 0.0);
    let sb = ket.radial_sets(lk, 0.0);
    let na: usize = sa.iter().map(|s| s.count).sum();
    let nb: usize = sb.iter().map(|s| s.count).sum();
    let mut m = Mat::<f64>::zeros(na, nb);
    let mut r0 = 0;
    for a in &sa {
        let mut c0 = 0;
        for b in &sb {
            let blk = real_radial_block(a, b, kernel)?;
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

fn dims(basis: &ChannelBasis, tables: &AngularTables) -> Vec<(usize, usize)> {
    (0..basis.channels.len()).map(|p| (tables.n_functions(p), basis.n_radial())).collect()
}

pub fn dipole_length(bra: &ChannelBasis, bra_tab: &AngularTables, ket: &ChannelBasis, ket_tab: &AngularTables) -> Result<DipoleBlock> {
    dipole_block(bra, bra_tab, ket, ket_tab, Gauge::Length)
}

pub fn dipole_velocity(bra: &ChannelBasis, bra_tab: &AngularTables, ket: &ChannelBasis, ket_tab: &AngularTables) -> Result<DipoleBlock> {
    dipole_block(bra, bra_tab, ket, ket_tab, Gauge::Velocity)
}

pub fn dipole_block(
    bra: &ChannelBasis,
    bra_tab: &AngularTables,
    ket: &ChannelBasis,
    ket_tab: &AngularTables,
    gauge: Gauge,
) -> Result<DipoleBlock> {
    if bra_tab.space.nodes() != ket_tab.space.nodes() {
        return Err(Error::Config("dipole block needs both bases on the same α space".into()));
    }
    let (bb, kb) = (&bra.spec.block, &ket.spec.block);
    if bb.M != 0 || kb.M != 0 {
        return Err(Error::Config("dipole blocks are implemented for M = M' = 0 only".into()));
    }
    let np_b = bra.channels.len();
    let np_k = ket.channels.len();
    let allowed = bb.L.abs_diff(kb.L) == 1 && bb.spin == kb.spin;
    let mut terms = vec![vec![Vec::new(); np_k]; np_b];
    if !allowed {
        return Ok(DipoleBlock { gauge, terms, allowed, bra_dims: dims(bra, bra_tab), ket_dims: dims(ket, ket_tab) });
    }
    let am = |y: (u32, u32), l: u32| AngularMomenta { l1: y.0, l2: y.1, L: l, M: 0 };
    let c1 = |yb: (u32, u32), yk: (u32, u32)| dipole_angular_theta1(&am(yb, bb.L), &am(yk, kb.L));
    let c2 = |yb: (u32, u32), yk: (u32, u32)| dipole_angular_theta2(&am(yb, bb.L), &am(yk, kb.L));
    let d1 = |yb: (u32, u32), yk: (u32, u32)| dipole_angular_dtheta1(&am(yb, bb.L), &am(yk, kb.L));
    let d2 = |yb: (u32, u32), yk: (u32, u32)| dipole_angular_dtheta2(&am(yb, bb.L), &am(yk, kb.L));

    let g_cos = bra_tab.cross_gram(ket_tab, f64::cos, false);
    let g_sin = bra_tab.cross_gram(ket_tab, f64::sin, false);
    let vel = match gauge {
        Gauge::Length => None,
        Gauge::Velocity => Some((
            bra_tab.cross_gram(ket_tab, |a| (2.0 * a).cos() / a.cos(), false)
                - bra_tab.cross_gram(ket_tab, f64::sin, true),
            bra_tab.cross_gram(ket_tab, f64::cos, true)
                - bra_tab.cross_gram(ket_tab, |a| (2.0 * a).cos() / a.sin(), false),
            bra_tab.cross_gram(ket_tab, |a| 1.0 / a.cos(), false),
            bra_tab.cross_gram(ket_tab, |a| 1.0 / a.sin(), false),
        )),
    };
    for pb in 0..np_b {
        for pk in 0..np_k {
            let a_main = cross_contract(bra_tab, ket_tab, &g_cos, pb, pk, c1) + cross_contract(bra_tab, ket_tab, &g_sin, pb, pk, c2);
            let (lb, lk) = (bra.channels[pb].lambda, ket.channels[pk].lambda);
            match &vel {
                None => {
                    if crate::linalg::max_abs(&a_main) > 0.0 {
                        terms[pb][pk].push((a_main, radial_cross(bra, lb, ket, lk, RadialKernel::R)?));
                    }
                }
                Some((g1, g2, gic, gis)) => {
                    let a_inv = cross_contract(bra_tab, ket_tab, g1, pb, pk, c1)
                        + cross_contract(bra_tab, ket_tab, g2, pb, pk, c2)
                        - cross_contract(bra_tab, ket_tab, gic, pb, pk, d1)
                        - cross_contract(bra_tab, ket_tab, gis, pb, pk, d2);
                    let inv_r = radial_cross(bra, lb, ket, lk, RadialKernel::InvR)?;
                    if crate::linalg::max_abs(&a_main) > 0.0 {
                        let ddr = radial_cross(bra, lb, ket, lk, RadialKernel::DDr)?;
                        let rad = Mat::from_fn(ddr.nrows(), ddr.ncols(), |i, j| ddr[(i, j)] - 2.5 * inv_r[(i, j)]);
                        terms[pb][pk].push((a_main, rad));
                    }
                    if crate::linalg::max_abs(&a_inv) > 0.0 {
                        terms[pb][pk].push((a_inv, inv_r));
                    }
                }
            }
        }
    }
    Ok(DipoleBlock { gauge, terms, allowed, bra_dims: dims(bra, bra_tab), ket_dims: dims(ket, ket_tab) })
}

impl DipoleBlock {
    /// ⟨bra|D|ket⟩ for per-pair primitive coefficients (angular × radial).
    pub fn element(&self, bra: &[Mat<f64>], ket: &[Mat<f64>]) -> f64 {
        let mut s = 0.0;
        for (pb, row) in self.terms.iter().enumerate() {
            for (pk, ts) in row.iter().enumerate() {
                for (a, r) in ts {
                    let m = a * &ket[pk] * r.transpose();
                    let cb = &bra[pb];
                    for j in 0..m.ncols() {
                        for i in 0..m.nrows() {
                            s += cb[(i, j)] * m[(i, j)];
                        }
                    }
                }
            }
        }
        s
    }

    /// Dense matrix over the primitive functions (pair, angular, radial order).
    pub fn dense(&self) -> Mat<f64> {
        let offs = |d: &[(usize, usize)]| {
            let mut o = vec![0];
            for &(a, r) in d {
                o.push(o.last().unwrap() + a * r);
            }
            o
        };
        let (ob, ok) = (offs(&self.bra_dims), offs(&self.ket_dims));
        let mut m = Mat::<f64>::zeros(*ob.last().unwrap(), *ok.last().unwrap());
        for (pb, row) in self.terms.iter().enumerate() {
            for (pk, ts) in row.iter().enumerate() {
                let nrb = self.bra_dims[pb].1;
                let nrk = self.ket_dims[pk].1;
                for (a, r) in ts {
                    for ja in 0..a.ncols() {
                        for ia in 0..a.nrows() {
                            let av = a[(ia, ja)];
                            if av == 0.0 {
                                continue;
                            }
                            for jr in 0..nrk {
                                for ir in 0..nrb {
                                    m[(ob[pb] + ia * nrb + ir, ok[pk] + ja * nrk + jr)] += av * r[(ir, jr)];
                                }
                            }
                        }
                    }
                }
            }
        }
        m
    }
}

/// A state mapped back to primitive channel coefficients.
#[derive(Debug, Clone)]
pub struct ExpandedState {
    pub energy: f64,
    pub coeffs: Vec<Mat<f64>>,
}

/// The first `count` states of a θ = 0 solve as primitive coefficients.
pub fn expand_states(sys: &PrunedSystem, res: &SpectralResult, count: usize) -> Result<Vec<ExpandedState>> {
    if !sys.is_real() {
        return Err(Error::Config("oscillator strengths need θ = 0 states".into()));
    }
    Ok(res
        .states
        .iter()
        .take(count)
        .map(|s| ExpandedState {
            energy: s.energy.re,
            coeffs: sys.expand(&s.coeffs).iter().map(|m| Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].re)).collect(),
        })
        .collect())
}

/// C = 2 / (3 (2L_i+1) (L_f 1 L_i; 0 0 0)²): 2 for S→P, 5/3 for P→D.
pub fn gauge_constant(l_i: u32, l_f: u32) -> Result<f64> {
    let t = w3j(2 * l_f as i64, 2, 2 * l_i as i64, 0, 0, 0);
    if t == 0.0 {
        return Err(Error::Domain(format!("no M = 0 dipole between L = {l_i} and L = {l_f}")));
    }
    Ok(2.0 / (3.0 * (2 * l_i + 1) as f64 * t * t))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorStrength {
    pub initial: usize,
    pub final_state: usize,
    pub e_i: f64,
    pub e_f: f64,
    pub gauge: Gauge,
    /// Signed: negative when E_f < E_i.
    pub f: f64,
}

/// f_L = C (E_f − E_i) |⟨f|z₁+z₂|i⟩|², f_V = C |⟨f|∂z₁+∂z₂|i⟩|² / (E_f − E_i).
/// The block must have the final basis as bra and the initial basis as ket.
pub fn oscillator_strengths(
    initial: &[ExpandedState],
    finals: &[ExpandedState],
    block: &DipoleBlock,
    c: f64,
) -> Result<Vec<OscillatorStrength>> {
    let mut out = Vec::new();
    for (i, si) in initial.iter().enumerate() {
        for (f, sf) in finals.iter().enumerate() {
            let de = sf.energy - si.energy;
            let d = if block.allowed { block.element(&sf.coeffs, &si.coeffs) } else { 0.0 };
            let val = match block.gauge {
                Gauge::Length => c * de * d * d,
                Gauge::Velocity => {
                    if de == 0.0 {
                        return Err(Error::Domain(format!("degenerate transition {i} → {f} in velocity gauge")));
                    }
                    c * d * d / de
                }
            };
            out.push(OscillatorStrength { initial: i, final_state: f, e_i: si.energy, e_f: sf.energy, gauge: block.gauge, f: val });
        }
    }
    Ok(out)
}
