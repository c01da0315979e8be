use std::sync::Arc;

use hypersturm::assembly::{
    assemble, enumerate_basis, AngularFamily, AngularSetSpec, BasisSpec, LambdaMode, PhysicsSpec, PrunedSystem,
    RadialSetSpec, SymmetryBlock,
};
use hypersturm::bspline::MeshSpec;
use hypersturm::c64;
use hypersturm::hyperangular::AlphaSpace;
use hypersturm::solver::{
    extract_resonances, solve_bound, solve_scaled, spectrum_table, Method, SolveOptions, SpectralResult, State,
};

fn space() -> Arc<AlphaSpace> {
    AlphaSpace::with_quarter_knot(7, &MeshSpec::for_splines(117, 7, Some(0.5)).unwrap(), 4).unwrap()
}

/// Small H⁻ ¹S system: two radial sets, two angular sets, three pairs.
fn h_minus(theta: f64) -> PrunedSystem {
    let spec = BasisSpec {
        block: SymmetryBlock { L: 0, M: 0, spin: 0, q_max: None },
        pairs: vec![(0, 0), (1, 1), (2, 2)],
        radial: vec![RadialSetSpec { kappa: 0.8, count: 8 }, RadialSetSpec { kappa: 0.3, count: 8 }],
        angular: vec![AngularSetSpec::new(0.7, 5), AngularSetSpec::new(0.5, 5)],
        lambda: LambdaMode::Global(0),
        family: AngularFamily::Sturmian,
    };
    let basis = enumerate_basis(&spec).unwrap();
    assemble(&basis, &space(), &PhysicsSpec { z: 1.0, interaction: true }, theta).unwrap().prune(1e-10).unwrap()
}

fn opts(method: Method, shift: c64, count: usize) -> SolveOptions {
    SolveOptions { method, shift: Some(shift), count: Some(count), ..Default::default() }
}

#[test]
fn lanczos_matches_dense() {
    let sys = h_minus(0.0);
    let s = c64::new(-0.6, 0.0);
    let a = solve_bound(&sys, &opts(Method::Dense, s, 6)).unwrap();
    let b = solve_bound(&sys, &opts(Method::ShiftInvert, s, 6)).unwrap();
    assert_eq!(b.method, Method::ShiftInvert);
    assert!(a.states[0].energy.re < -0.51 && a.states[0].energy.re > -0.5278);
    for (x, y) in a.states.iter().zip(&b.states) {
        assert!((x.energy - y.energy).norm() < 1e-10, "{} vs {}", x.energy, y.energy);
        assert!(y.residual < 1e-9);
        // same vector up to the phase rule, which both paths apply
        let d: f64 = x.coeffs.iter().zip(&y.coeffs).map(|(p, q)| (p - q).norm_sqr()).sum();
        assert!(d.sqrt() < 1e-6, "coefficient mismatch {d:e}");
    }
    assert!(a.states.windows(2).all(|w| w[0].energy.re <= w[1].energy.re));
    assert!(a.states.iter().all(|s| s.energy.re >= -0.6));
}

#[test]
fn arnoldi_matches_dense() {
    let sys = h_minus(0.3);
    let s = c64::new(-0.14, -1e-3);
    let a = solve_scaled(&sys, &opts(Method::Dense, s, 8)).unwrap();
    let b = solve_scaled(&sys, &opts(Method::ShiftInvert, s, 8)).unwrap();
    let mut matched = 0;
    for x in &a.states {
        let y = b.states.iter().min_by(|p, q| (p.energy - x.energy).norm().total_cmp(&(q.energy - x.energy).norm())).unwrap();
        if (y.energy - x.energy).norm() < 1e-9 {
            matched += 1;
        }
    }
    // both return the eigenvalues nearest σ; the farthest one may differ at the margin
    assert!(matched >= 7, "{matched} of 8 agree");
    for y in &b.states {
        assert!(y.residual < 1e-8, "{} residual {:e}", y.energy, y.residual);
    }
}

#[test]
fn phase_rule() {
    let sys = h_minus(0.0);
    let res = solve_bound(&sys, &opts(Method::Dense, c64::new(-0.6, 0.0), 3)).unwrap();
    for st in &res.states {
        let norm: f64 = st.coeffs.iter().map(|c| c.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-10);
        let big = st.coeffs.iter().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap();
        assert!(big.re > 0.0);
    }
    let res = solve_scaled(&h_minus(0.25), &opts(Method::Dense, c64::new(-0.14, -1e-3), 3)).unwrap();
    for st in &res.states {
        let yty: c64 = st.coeffs.iter().map(|c| c * c).sum();
        assert!((yty - c64::new(1.0, 0.0)).norm() < 1e-9, "yᵀy = {yty}");
        let big = st.coeffs.iter().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap();
        assert!(big.re > 0.0);
    }
}

#[test]
fn argument_checks() {
    let real = h_minus(0.0);
    assert!(solve_scaled(&real, &opts(Method::Dense, c64::new(-0.1, 0.0), 2)).is_err());
    let scaled = h_minus(0.2);
    assert!(solve_bound(&scaled, &opts(Method::Dense, c64::new(-0.6, 0.0), 2)).is_err());
}

fn state(re: f64, im: f64, pair: usize) -> State {
    State { energy: c64::new(re, im), coeffs: vec![], residual: 0.0, dominant_pair: pair, dominant_weight: c64::new(1.0, 0.0) }
}

fn result(theta: f64, states: Vec<State>) -> SpectralResult {
    SpectralResult { theta, states, dim: 0, full_dim: 0, method: Method::Dense, krylov_steps: 0 }
}

#[test]
fn resonance_extraction_synthetic() {
    // one stationary resonance, one rotated-continuum state moving with θ, one bound state, one outside the window
    let e0 = -0.1487759;
    let a = result(
        0.25,
        vec![state(e0, -8.6699e-4, 0), state(-0.10, -0.05, 1), state(-0.5277, 0.0, 0), state(-0.30, -1e-3, 0)],
    );
    let b = result(
        0.28,
        vec![state(e0 + 1e-9, -8.6699e-4, 0), state(-0.097, -0.056, 1), state(-0.5277, 0.0, 0), state(-0.30, -1e-3, 0)],
    );
    let r = extract_resonances(&a, &b, (-0.16, -0.05), 1e-6);
    assert_eq!(r.len(), 1);
    assert!((r[0].energy - e0).abs() < 1e-12);
    assert!((r[0].width - 1.73398e-3).abs() < 1e-12);
    assert!(r[0].motion < 1e-8);
    assert!(extract_resonances(&a, &b, (-0.02, -0.01), 1e-6).is_empty());
    assert!(extract_resonances(&a, &result(0.28, vec![]), (-0.16, -0.05), 1e-6).is_empty());
    // positive imaginary part is never a resonance
    let c = result(0.25, vec![state(-0.1, 1e-4, 0)]);
    assert!(extract_resonances(&c, &c, (-0.16, -0.05), 1e-6).is_empty());
}

#[test]
fn spectrum_table_columns() {
    let r = result(0.25, vec![state(-0.1487759, -8.6699e-4, 1), state(-0.12, -1e-5, 7)]);
    let t = spectrum_table(&r, &["(0,0)".to_string(), "(1,1)".to_string()]);
    let lines: Vec<&str> = t.lines().collect();
    assert_eq!(lines[0], "index\tre_e\tim_e\tgamma\tchannel\tweight");
    assert_eq!(lines.len(), 3);
    let f: Vec<&str> = lines[1].split('\t').collect();
    assert_eq!(f[0], "0");
    assert!((f[1].parse::<f64>().unwrap() + 0.1487759).abs() < 1e-12);
    assert!((f[3].parse::<f64>().unwrap() - 1.73398e-3).abs() < 1e-9);
    assert_eq!(f[4], "(1,1)");
    assert_eq!(lines[2].split('\t').nth(4), Some("?"));
}
