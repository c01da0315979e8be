//! Pipeline: sets → basis → assembly → pruning → solve → observables → report.

use std::sync::Arc;
use std::time::Instant;

use crate::assembly::{
    angular_operators, assemble_with, build_angular_tables, enumerate_basis, AngularTables, BasisSpec, ChannelBasis,
    LambdaMode, PrunedSystem,
};
use crate::c64;
use crate::config::{Mode, RunConfig, Sweep};
use crate::error::{Error, Result};
use crate::hyperangular::{jacobi_harmonic, jacobi_reference_set, solve_set, AlphaSpace, ReducedChargeParams};
use crate::observables::{dipole_length, dipole_velocity, expand_states, gauge_constant, oscillator_strengths};
use crate::report::Report;
use crate::solver::{extract_resonances, solve_bound, solve_scaled, SolveOptions, SpectralResult};

pub fn alpha_space(cfg: &RunConfig) -> Result<Arc<AlphaSpace>> {
    cfg.bspline.space()
}

fn options(cfg: &RunConfig, shift: c64, count: usize) -> SolveOptions {
    SolveOptions {
        method: cfg.solver.method,
        shift: Some(shift),
        count: Some(count),
        dense_limit: cfg.solver.dense_limit,
        tol: cfg.solver.tol,
        max_krylov: cfg.solver.max_krylov,
    }
}

/// Basis, α tables and pruned θ-independent pieces for one block.
struct Prepared {
    basis: ChannelBasis,
    tables: AngularTables,
    angular: Arc<crate::assembly::AngularOperators>,
}

fn prepare(cfg: &RunConfig, spec: &BasisSpec, space: &Arc<AlphaSpace>) -> Result<Prepared> {
    let basis = enumerate_basis(spec)?;
    let tables = build_angular_tables(&basis, space, cfg.interaction())?;
    let angular = Arc::new(angular_operators(&basis, &tables, cfg.z, cfg.interaction())?);
    Ok(Prepared { basis, tables, angular })
}

fn pruned(cfg: &RunConfig, p: &Prepared, theta: f64, summary: &mut Vec<String>, tag: &str) -> Result<PrunedSystem> {
    let sys = assemble_with(&p.basis, p.angular.clone(), theta)?;
    let pr = sys.prune(cfg.solver.threshold)?;
    summary.push(format!("{tag}: basis {} → {} after pruning (θ = {theta})", pr.full_dim, pr.dim));
    Ok(pr)
}

fn bound_states(cfg: &RunConfig, sys: &PrunedSystem, count: usize) -> Result<SpectralResult> {
    let sigma = cfg.solver.shift.unwrap_or(-cfg.z * cfg.z - 0.05);
    let res = solve_bound(sys, &options(cfg, c64::new(sigma, 0.0), count))?;
    if res.states.len() < count {
        return Err(Error::Convergence(format!("only {} of {count} states above σ = {sigma}", res.states.len())));
    }
    Ok(res)
}

/// Execute a configuration.
pub fn run(cfg: &RunConfig) -> Result<Report> {
    cfg.validate()?;
    let t0 = Instant::now();
    let space = alpha_space(cfg)?;
    let mut report = match cfg.mode {
        Mode::Bound | Mode::Independent => run_bound(cfg, &space)?,
        Mode::Resonance => run_resonance(cfg, &space)?,
        Mode::Oscillator => run_oscillator(cfg, &space)?,
    };
    report.summary.push(format!("total time {:.2} s", t0.elapsed().as_secs_f64()));
    Ok(report)
}

fn sweep_steps(cfg: &RunConfig) -> Vec<(String, BasisSpec)> {
    let base = cfg.basis_spec();
    match &cfg.sweep {
        None => vec![(String::new(), base)],
        Some(Sweep::Pairs) => (1..=cfg.pairs.len())
            .map(|k| {
                let (l1, l2) = cfg.pairs[k - 1];
                (format!("({l1},{l2})/"), BasisSpec { pairs: cfg.pairs[..k].to_vec(), ..base.clone() })
            })
            .collect(),
        Some(Sweep::AngularCount { values }) => values
            .iter()
            .map(|&n| {
                let mut s = base.clone();
                s.angular[0].count = n;
                (format!("N={n}/"), s)
            })
            .collect(),
    }
}

fn run_bound(cfg: &RunConfig, space: &Arc<AlphaSpace>) -> Result<Report> {
    let mut rep = Report::new(&cfg.title, cfg.to_toml(), &["energy", "dim", "pruned_dim", "residual"]);
    for (prefix, spec) in sweep_steps(cfg) {
        let t = Instant::now();
        let p = prepare(cfg, &spec, space)?;
        let sys = pruned(cfg, &p, 0.0, &mut rep.summary, prefix.trim_end_matches('/'))?;
        let res = bound_states(cfg, &sys, cfg.states.len())?;
        for (label, st) in cfg.states.iter().zip(&res.states) {
            rep.push(format!("{prefix}{label}"), vec![st.energy.re, sys.full_dim as f64, sys.dim as f64, st.residual]);
        }
        rep.summary.push(format!(
            "  {:?} solve, {} Krylov steps, {:.2} s, E0 = {:.10}",
            res.method,
            res.krylov_steps,
            t.elapsed().as_secs_f64(),
            res.states[0].energy.re
        ));
    }
    Ok(rep)
}

fn run_resonance(cfg: &RunConfig, space: &Arc<AlphaSpace>) -> Result<Report> {
    let r = cfg.resonance.as_ref().expect("validated");
    let mut rep = Report::new(&cfg.title, cfg.to_toml(), &["energy", "gamma", "motion", "channel"]);
    let p = prepare(cfg, &cfg.basis_spec(), space)?;
    let mut runs = Vec::new();
    for &theta in &r.thetas {
        let t = Instant::now();
        let sys = pruned(cfg, &p, theta, &mut rep.summary, "scaled")?;
        let mut merged: Option<SpectralResult> = None;
        for &s in &r.shifts {
            let res = solve_scaled(&sys, &options(cfg, c64::new(s, r.shift_im), r.count))?;
            match &mut merged {
                None => merged = Some(res),
                Some(m) => {
                    for st in res.states {
                        if !m.states.iter().any(|x| (x.energy - st.energy).norm() < 1e-12) {
                            m.states.push(st);
                        }
                    }
                    m.krylov_steps += res.krylov_steps;
                }
            }
        }
        let mut m = merged.expect("at least one shift");
        m.states.sort_by(|a, b| a.energy.re.total_cmp(&b.energy.re));
        rep.summary.push(format!("  θ = {theta}: {} eigenvalues, {:.2} s", m.states.len(), t.elapsed().as_secs_f64()));
        runs.push(m);
    }
    let cands = extract_resonances(&runs[0], &runs[1], (r.window[0], r.window[1]), r.stationarity);
    for (i, c) in cands.iter().enumerate() {
        rep.push(format!("r{i}"), vec![c.energy, c.width, c.motion, c.dominant_pair as f64]);
        rep.summary.push(format!(
            "  resonance {:.8}  Γ = {:.5e}  |ΔE| = {:.1e}  ({})",
            c.energy,
            c.width,
            c.motion,
            p.basis.pair_label(c.dominant_pair)
        ));
    }
    Ok(rep)
}

fn run_oscillator(cfg: &RunConfig, space: &Arc<AlphaSpace>) -> Result<Report> {
    let o = cfg.oscillator.as_ref().expect("validated");
    let mut rep =
        Report::new(&cfg.title, cfg.to_toml(), &["e_initial", "e_final", "f_length", "f_velocity", "gauge_discrepancy"]);
    let init = prepare(cfg, &cfg.basis_spec(), space)?;
    let fspec = BasisSpec { block: o.final_block, pairs: o.final_pairs.clone(), ..cfg.basis_spec() };
    let fin = prepare(cfg, &fspec, space)?;
    let si = pruned(cfg, &init, 0.0, &mut rep.summary, "initial")?;
    let sf = pruned(cfg, &fin, 0.0, &mut rep.summary, "final")?;
    let ri = bound_states(cfg, &si, cfg.states.len())?;
    let rf = bound_states(cfg, &sf, o.final_states.len())?;
    let ei = expand_states(&si, &ri, cfg.states.len())?;
    let ef = expand_states(&sf, &rf, o.final_states.len())?;
    let dl = dipole_length(&fin.basis, &fin.tables, &init.basis, &init.tables)?;
    let dv = dipole_velocity(&fin.basis, &fin.tables, &init.basis, &init.tables)?;
    let c = gauge_constant(cfg.block.L, o.final_block.L)?;
    let fl = oscillator_strengths(&ei, &ef, &dl, c)?;
    let fv = oscillator_strengths(&ei, &ef, &dv, c)?;
    for (a, b) in fl.iter().zip(&fv) {
        let key = format!("{}->{}", cfg.states[a.initial], o.final_states[a.final_state]);
        let disc = if a.f != 0.0 { (b.f / a.f - 1.0).abs() } else { 0.0 };
        rep.push(key, vec![a.e_i, a.e_f, a.f, b.f, disc]);
    }
    Ok(rep)
}

fn lambda_for(cfg: &RunConfig, l1: u32, l2: u32) -> u32 {
    match cfg.lambda {
        LambdaMode::Global(l) => l,
        LambdaMode::PerPair => l1 + l2,
    }
}

/// Columns for plotting: reduced effective charge per angular set, the first
/// pair's Sturmians against Jacobi harmonics, and ρ_p against p.
pub fn plotdata(cfg: &RunConfig, grid: usize) -> Result<String> {
    use std::fmt::Write as _;
    if grid < 2 {
        return Err(Error::Config("plot grid needs at least 2 points".into()));
    }
    let space = alpha_space(cfg)?;
    let alphas: Vec<f64> =
        (0..grid).map(|k| (k as f64 + 0.5) * std::f64::consts::FRAC_PI_2 / grid as f64).collect();
    let params: Vec<ReducedChargeParams> = cfg
        .angular
        .iter()
        .map(|s| ReducedChargeParams::new(s.calZ, cfg.interaction() && s.include_v0))
        .collect();
    let mut out = String::new();
    writeln!(out, "## reduced_charge").unwrap();
    let heads: Vec<String> = cfg.angular.iter().map(|s| format!("calZ={}", s.calZ)).collect();
    writeln!(out, "alpha\t{}", heads.join("\t")).unwrap();
    for &a in &alphas {
        let v: Vec<String> = params.iter().map(|p| format!("{:.10e}", p.reduced_charge(a))).collect();
        writeln!(out, "{a:.10e}\t{}", v.join("\t")).unwrap();
    }

    let (l1, l2) = cfg.pairs[0];
    let parity = (l1 == l2).then(|| cfg.block.diagonal_parity());
    let lambda = lambda_for(cfg, l1, l2);
    let n = cfg.angular[0].count;
    let set = solve_set(&space, l1, l2, lambda, params[0], n, parity)?;
    let jac = jacobi_reference_set(&space, l1, l2, lambda, n, parity)?;
    let picks: Vec<usize> = [0, 1, 2, n / 2, n - 1].into_iter().filter(|&p| p < n).collect::<Vec<_>>();
    let mut picks = picks;
    picks.dedup();
    writeln!(out, "\n## functions ({l1},{l2})").unwrap();
    let mut h = vec!["alpha".to_string()];
    h.extend(picks.iter().map(|p| format!("sturmian_{p}")));
    h.extend(picks.iter().map(|&p| format!("jacobi_{}", jac.indices[p])));
    writeln!(out, "{}", h.join("\t")).unwrap();
    for &a in &alphas {
        let mut row = vec![format!("{a:.10e}")];
        row.extend(picks.iter().map(|&p| format!("{:.10e}", set.eval(p, a, 0))));
        row.extend(picks.iter().map(|&p| format!("{:.10e}", jacobi_harmonic(l1, l2, jac.indices[p], a).0)));
        writeln!(out, "{}", row.join("\t")).unwrap();
    }

    writeln!(out, "\n## eigenvalues ({l1},{l2})").unwrap();
    writeln!(out, "p\t{}", heads.join("\t")).unwrap();
    let sets: Vec<_> = cfg
        .angular
        .iter()
        .zip(&params)
        .map(|(s, &pr)| solve_set(&space, l1, l2, lambda, pr, s.count, parity))
        .collect::<Result<_>>()?;
    let rows = cfg.angular.iter().map(|s| s.count).max().unwrap_or(0);
    for p in 0..rows {
        let v: Vec<String> =
            sets.iter().map(|s| s.rho.get(p).map(|r| format!("{r:.10e}")).unwrap_or_default()).collect();
        writeln!(out, "{p}\t{}", v.join("\t")).unwrap();
    }
    Ok(out)
}
