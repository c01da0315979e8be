use hypersturm::c64;
use hypersturm::hyperradial::{laguerre_real, matrix_element, radial_block, real_radial_block, RadialKernel, RadialSet};
use hypersturm::quadrature::piecewise_legendre;
use proptest::prelude::*;

/// Explicit-sum oracle L_k^{(a)}(x) = Σ_i (−1)^i C(k+a, k−i) x^i / i!,
/// with Σ|terms| as its own rounding scale.
fn laguerre_sum(k: usize, a: f64, x: f64) -> (f64, f64) {
    let mut s = 0.0;
    let mut mag = 0.0;
    for i in 0..=k {
        let mut binom = 1.0;
        for j in 0..(k - i) {
            binom *= (a + i as f64 + 1.0 + j as f64) / (j as f64 + 1.0);
        }
        let mut t = binom;
        for j in 1..=i {
            t *= x / j as f64;
        }
        s += if i % 2 == 0 { t } else { -t };
        mag += t.abs();
    }
    (s, mag)
}

/// Dense piecewise Gauss–Legendre along the real R axis.
fn direct(set_a: &RadialSet, na: usize, set_b: &RadialSet, nb: usize, f: impl Fn(f64) -> f64) -> c64 {
    let rmax = 90.0 / set_a.kappa.min(set_b.kappa);
    let bp: Vec<f64> = (0..=600).map(|i| rmax * i as f64 / 600.0).collect();
    let rule = piecewise_legendre(&bp, 16);
    let mut s = c64::new(0.0, 0.0);
    for (&r, &w) in rule.nodes.iter().zip(&rule.weights) {
        s += set_a.eval(na, r).unwrap() * set_b.eval(nb, r).unwrap() * (w * f(r));
    }
    s
}

proptest! {
    #[test]
    fn laguerre_recurrence_matches_sum(k in 0usize..25, a in 0u32..12, x in 0.0f64..30.0) {
        let v = laguerre_real(k, a as f64, x);
        let (o, mag) = laguerre_sum(k, a as f64, x);
        prop_assert!((v[k] - o).abs() <= 1e-12 * mag.max(1.0), "{} vs {o}", v[k]);
    }
}

#[test]
fn unit_norm_and_inverse_r_closed_form() {
    for &(kappa, lambda) in &[(2.0, 0u32), (0.8, 0), (0.3, 2), (1.7, 4)] {
        let s = RadialSet::new(kappa, lambda, 12);
        let inv = real_radial_block(&s, &s, RadialKernel::InvR).unwrap();
        for (i, n) in s.ns().enumerate() {
            let norm = direct(&s, n, &s, n, |_| 1.0);
            assert!((norm.re - 1.0).abs() < 1e-12, "norm {norm} κ={kappa} n={n}");
            for (j, m) in s.ns().enumerate() {
                let exact = if n == m { kappa / (n as f64 + 1.5) } else { 0.0 };
                assert!((inv[(i, j)] - exact).abs() < 1e-12, "1/R quadrature");
                let me = matrix_element(&s, n, &s, m, RadialKernel::InvR).unwrap();
                assert!((me.re - exact).abs() < 1e-15 && me.im == 0.0);
            }
        }
    }
}

#[test]
fn overlap_is_tridiagonal() {
    let s = RadialSet::new(1.1, 1, 15);
    let o = real_radial_block(&s, &s, RadialKernel::One).unwrap();
    for i in 0..15usize {
        for j in 0..15 {
            if i.abs_diff(j) >= 2 {
                assert!(o[(i, j)].abs() < 1e-12);
            }
        }
        if i + 1 < 15 {
            assert!(o[(i, i + 1)].abs() > 1e-3);
        }
    }
}

#[test]
fn derivative_antisymmetric() {
    let s = RadialSet::new(0.9, 0, 14);
    let d = real_radial_block(&s, &s, RadialKernel::DDr).unwrap();
    for i in 0..14 {
        for j in 0..14 {
            assert!((d[(i, j)] + d[(j, i)]).abs() < 1e-12);
        }
    }
}

#[test]
fn mixed_kappa_against_direct_quadrature() {
    let a = RadialSet::new(1.0, 0, 8);
    let b = RadialSet::new(0.3, 0, 8);
    for k in [RadialKernel::One, RadialKernel::R, RadialKernel::InvR, RadialKernel::InvR2] {
        let blk = real_radial_block(&a, &b, k).unwrap();
        for (i, n) in a.ns().enumerate() {
            for (j, m) in b.ns().enumerate() {
                let v = direct(&a, n, &b, m, |r| r.powi(k.power()));
                assert!((blk[(i, j)] - v.re).abs() < 1e-11, "{k:?} ({n},{m}): {} vs {}", blk[(i, j)], v.re);
            }
        }
    }
}

#[test]
fn coulomb_sturmian_equation_residual() {
    for &(kappa, theta, lambda) in &[(2.0, 0.0, 0u32), (0.8, 0.0, 2), (0.8, 0.25, 0), (1.3, 0.3, 1)] {
        let s = RadialSet::new(kappa, lambda, 10).scaled(theta);
        let k = s.kappa_complex();
        let lam_c = (lambda * (lambda + 4)) as f64 + 3.75;
        for n in s.ns() {
            let v = n as f64 + 1.5;
            let mut r: f64 = 0.1;
            let (mut worst, mut top) = (0.0f64, 0.0f64);
            while r <= 30.0 {
                let h = (0.005 * r).min(2e-3);
                let f = |x: f64| s.eval(n, x).unwrap();
                let d2 = (-f(r + 2.0 * h) + f(r + h) * 16.0 - f(r) * 30.0 + f(r - h) * 16.0 - f(r - 2.0 * h)) / (12.0 * h * h);
                let sv = f(r);
                let terms = [d2 * -0.5, sv * (lam_c / (2.0 * r * r)), -k * v / r * sv, k * k * 0.5 * sv];
                let res: c64 = terms.iter().sum();
                top = top.max(terms.iter().map(|t| t.norm()).sum::<f64>());
                worst = worst.max(res.norm());
                r += 0.7;
            }
            assert!(worst / top < 1e-8, "κ={kappa} θ={theta} n={n}: {}", worst / top);
        }
    }
}

#[test]
fn complex_scaling_consistency() {
    let theta = 0.25;
    let a = RadialSet::new(0.8, 0, 6).scaled(theta);
    let b = RadialSet::new(0.5, 0, 6).scaled(theta);
    for k in [RadialKernel::One, RadialKernel::R, RadialKernel::InvR, RadialKernel::InvR2] {
        let blk = radial_block(&a, &b, k).unwrap();
        for (i, n) in a.ns().enumerate() {
            for (j, m) in b.ns().enumerate() {
                let v = direct(&a, n, &b, m, |r| r.powi(k.power()));
                assert!((blk[(i, j)] - v).norm() < 1e-12, "{k:?} ({n},{m}): {} vs {}", blk[(i, j)], v);
            }
        }
    }
    let same = radial_block(&a, &a, RadialKernel::InvR).unwrap();
    for (i, n) in a.ns().enumerate() {
        let exact = a.kappa_complex() / (n as f64 + 1.5);
        assert!((same[(i, i)] - exact).norm() < 1e-14);
        let direct_v = direct(&a, n, &a, n, |r| 1.0 / r);
        assert!((direct_v - exact).norm() < 1e-12);
    }
}

#[test]
fn derivative_kernel_against_direct() {
    let a = RadialSet::new(1.0, 0, 5);
    let b = RadialSet::new(0.4, 0, 5);
    let blk = real_radial_block(&a, &b, RadialKernel::DDr).unwrap();
    let rmax = 250.0;
    let bp: Vec<f64> = (0..=800).map(|i| rmax * i as f64 / 800.0).collect();
    let rule = piecewise_legendre(&bp, 16);
    for (i, n) in a.ns().enumerate() {
        for (j, m) in b.ns().enumerate() {
            let mut s = 0.0;
            for (&r, &w) in rule.nodes.iter().zip(&rule.weights) {
                if r > 0.0 {
                    s += w * a.eval(n, r).unwrap().re * b.eval_deriv(m, r).unwrap().re;
                }
            }
            assert!((blk[(i, j)] - s).abs() < 1e-11);
        }
    }
}
