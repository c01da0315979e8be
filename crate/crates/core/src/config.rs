//! Run configuration (TOML).
//!
//! ```toml
//! title = "He ground state, pairs (0,0)..(8,8)"
//! mode = "bound"            # bound | resonance | oscillator | independent
//! z = 2.0
//! reference = "table3"      # optional, id of a bundled reference table
//! pairs = [[0, 0], [1, 1]]
//! lambda = { global = 0 }   # or "per-pair"
//! family = "sturmian"       # or "jacobi"
//! states = ["1s2"]          # labels of the reported states, lowest first
//!
//! [block]
//! L = 0
//! M = 0
//! spin = 0
//!
//! [[radial]]
//! kappa = 2.0
//! count = 5
//!
//! [[angular]]
//! calZ = 2.0
//! count = 5
//! include_v0 = true
//!
//! [bspline]                 # α basis
//! count = 300
//! order = 7
//! grading = 0.5             # omit for a uniform mesh
//! quarter_multiplicity = 4  # knot multiplicity at π/4, default order − 3
//!
//! [solver]
//! threshold = 1e-10         # overlap pruning
//! method = "auto"           # auto | dense | shift-invert
//! shift = -2.95
//!
//! [sweep]                   # optional
//! kind = "pairs"            # cumulative pair lists, or
//! # kind = "angular-count"; values = [5, 6, 7]
//! ```
//!
//! `[resonance]` (thetas, shifts, count, window, stationarity) and
//! `[oscillator]` (final_block, final_pairs, final_states) complete the
//! other modes.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::assembly::{AngularFamily, AngularSetSpec, BasisSpec, LambdaMode, RadialSetSpec, SymmetryBlock};
use crate::bspline::MeshSpec;
use crate::hyperangular::AlphaSpace;
use crate::error::{Error, Result};
use crate::solver::Method;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Bound,
    Resonance,
    Oscillator,
    /// Electron–electron interaction switched off.
    Independent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BsplineSpec {
    pub count: usize,
    pub order: usize,
    pub grading: Option<f64>,
    /// Knot multiplicity at π/4; default order − 3 (C² there, matching the v_0 kink). 1 = plain knot.
    pub quarter_multiplicity: Option<usize>,
}

impl Default for BsplineSpec {
    fn default() -> Self {
        Self { count: 300, order: 7, grading: Some(0.5), quarter_multiplicity: None }
    }
}

impl BsplineSpec {
    pub fn multiplicity(&self) -> usize {
        self.quarter_multiplicity.unwrap_or(self.order.saturating_sub(3)).max(1)
    }

    /// Mesh for `count` retained splines (count + 1 when the parity of the
    /// interval count forces π/4 to be inserted).
    pub fn mesh(&self) -> Result<MeshSpec> {
        let extra = self.multiplicity() - 1;
        if self.count <= extra {
            return Err(Error::Config(format!("{} splines with a {}-fold knot", self.count, extra + 1)));
        }
        MeshSpec::for_splines(self.count - extra, self.order, self.grading)
    }

    pub fn space(&self) -> Result<Arc<AlphaSpace>> {
        AlphaSpace::with_quarter_knot(self.order, &self.mesh()?, self.multiplicity())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSpec {
    pub threshold: f64,
    pub method: Method,
    /// Real part of σ; defaults to −Z² − 0.05 (below every bound state).
    pub shift: Option<f64>,
    pub dense_limit: usize,
    pub tol: f64,
    pub max_krylov: usize,
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self { threshold: 1e-10, method: Method::Auto, shift: None, dense_limit: 3000, tol: 1e-12, max_krylov: 800 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Sweep {
    /// Rows for the first 1, 2, … pairs of `pairs`.
    Pairs,
    /// Rows for each count of the first angular set.
    AngularCount { values: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonanceSpec {
    /// Two scaling angles; eigenvalues that move less than `stationarity` between them are kept.
    pub thetas: [f64; 2],
    /// Real parts of the Arnoldi shifts.
    pub shifts: Vec<f64>,
    #[serde(default = "default_shift_im")]
    pub shift_im: f64,
    /// Eigenvalues per shift.
    pub count: usize,
    /// Re E range of reported resonances.
    pub window: [f64; 2],
    #[serde(default = "default_stationarity")]
    pub stationarity: f64,
}

fn default_shift_im() -> f64 {
    -1e-3
}

fn default_stationarity() -> f64 {
    1e-6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillatorSpec {
    pub final_block: SymmetryBlock,
    pub final_pairs: Vec<(u32, u32)>,
    pub final_states: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub title: String,
    pub mode: Mode,
    pub z: f64,
    #[serde(default)]
    pub reference: Option<String>,
    pub block: SymmetryBlock,
    pub pairs: Vec<(u32, u32)>,
    #[serde(default = "default_lambda")]
    pub lambda: LambdaMode,
    #[serde(default = "default_family")]
    pub family: AngularFamily,
    pub radial: Vec<RadialSetSpec>,
    pub angular: Vec<AngularSetSpec>,
    #[serde(default)]
    pub states: Vec<String>,
    #[serde(default)]
    pub bspline: BsplineSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub resonance: Option<ResonanceSpec>,
    #[serde(default)]
    pub oscillator: Option<OscillatorSpec>,
}

fn default_lambda() -> LambdaMode {
    LambdaMode::Global(0)
}

fn default_family() -> AngularFamily {
    AngularFamily::Sturmian
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// The fully resolved configuration, defaults included.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn basis_spec(&self) -> BasisSpec {
        BasisSpec {
            block: self.block,
            pairs: self.pairs.clone(),
            radial: self.radial.clone(),
            angular: self.angular.clone(),
            lambda: self.lambda,
            family: self.family,
        }
    }

    pub fn interaction(&self) -> bool {
        self.mode != Mode::Independent
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.z > 0.0) {
            return bad("z must be positive");
        }
        if self.pairs.is_empty() {
            return bad("empty pair list");
        }
        if self.radial.is_empty() || self.angular.is_empty() {
            return bad("at least one radial and one angular set are required");
        }
        if !(self.solver.threshold > 0.0) {
            return bad("pruning threshold must be positive");
        }
        match self.mode {
            Mode::Bound | Mode::Independent => {
                if self.states.is_empty() {
                    return bad("bound runs need at least one state label");
                }
            }
            Mode::Resonance => {
                let Some(r) = &self.resonance else {
                    return bad("resonance mode needs a [resonance] section");
                };
                if r.thetas.iter().any(|&t| !(t > 0.0 && t < std::f64::consts::FRAC_PI_4)) || r.thetas[0] == r.thetas[1] {
                    return bad("resonance thetas must be two distinct angles in (0, π/4)");
                }
                if r.shifts.is_empty() || r.count == 0 {
                    return bad("resonance mode needs shifts and a count");
                }
                if self.sweep.is_some() {
                    return bad("sweeps are only supported in bound and independent modes");
                }
            }
            Mode::Oscillator => {
                let Some(o) = &self.oscillator else {
                    return bad("oscillator mode needs an [oscillator] section");
                };
                if self.states.is_empty() || o.final_states.is_empty() {
                    return bad("oscillator mode needs initial and final state labels");
                }
                if self.sweep.is_some() {
                    return bad("sweeps are only supported in bound and independent modes");
                }
            }
        }
        if let Some(Sweep::AngularCount { values }) = &self.sweep {
            if values.is_empty() || values.contains(&0) {
                return bad("angular-count sweep needs positive counts");
            }
        }
        if let Some(id) = &self.reference {
            crate::report::reference_table(id)?;
        }
        crate::assembly::enumerate_basis(&self.basis_spec())?;
        Ok(())
    }
}
