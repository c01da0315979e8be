//! Brute-force four-dimensional quadrature over (θ1, φ1, θ2, φ2) with explicit
//! Condon–Shortley spherical harmonics and an independently coded
//! Clebsch–Gordan formula.

#![allow(dead_code)]

use std::f64::consts::PI;

use hypersturm::angular_algebra::AngularMomenta;
use hypersturm::quadrature::gauss_legendre;

pub const LMAX: i64 = 3;
pub const NT: usize = 12;
pub const NP: usize = 14;

pub fn fact(n: i64) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

pub fn cg(j1: i64, m1: i64, j2: i64, m2: i64, j: i64, m: i64) -> f64 {
    if m1 + m2 != m || j < (j1 - j2).abs() || j > j1 + j2 || m1.abs() > j1 || m2.abs() > j2 || m.abs() > j {
        return 0.0;
    }
    let pre = ((2 * j + 1) as f64 * fact(j + j1 - j2) * fact(j - j1 + j2) * fact(j1 + j2 - j) / fact(j1 + j2 + j + 1)).sqrt()
        * (fact(j + m) * fact(j - m) * fact(j1 - m1) * fact(j1 + m1) * fact(j2 - m2) * fact(j2 + m2)).sqrt();
    let mut s = 0.0;
    for k in 0..=(j1 + j2 + j) {
        let a = [k, j1 + j2 - j - k, j1 - m1 - k, j2 + m2 - k, j - j2 + m1 + k, j - j1 - m2 + k];
        if a.iter().any(|&x| x < 0) {
            continue;
        }
        let d: f64 = a.iter().map(|&x| fact(x)).product();
        s += if k % 2 == 0 { 1.0 / d } else { -1.0 / d };
    }
    pre * s
}

/// P_l^m(x) for m ≥ 0 with the Condon–Shortley phase.
pub fn plm(l: i64, m: i64, x: f64) -> f64 {
    if m > l {
        return 0.0;
    }
    let mut pmm = 1.0;
    let s = (1.0 - x * x).sqrt();
    for i in 0..m {
        pmm *= -((2 * i + 1) as f64) * s;
    }
    if l == m {
        return pmm;
    }
    let mut p1 = x * (2 * m + 1) as f64 * pmm;
    let mut p0 = pmm;
    for ll in (m + 2)..=l {
        let p2 = (x * (2 * ll - 1) as f64 * p1 - (ll + m - 1) as f64 * p0) / (ll - m) as f64;
        p0 = p1;
        p1 = p2;
    }
    if l == m + 1 {
        return x * (2 * m + 1) as f64 * pmm;
    }
    p1
}

/// (Y_lm, sinθ ∂θ Y_lm) as complex pairs (re, im).
pub fn ylm(l: i64, m: i64, x: f64, phi: f64) -> ([f64; 2], [f64; 2]) {
    let am = m.abs();
    let norm = ((2 * l + 1) as f64 / (4.0 * PI) * fact(l - am) / fact(l + am)).sqrt();
    let p = plm(l, am, x);
    let dp = l as f64 * x * p - if l > 0 { (l + am) as f64 * plm(l - 1, am, x) } else { 0.0 };
    let mut c = norm;
    if m < 0 && am % 2 == 1 {
        c = -c;
    }
    let (s, co) = (m as f64 * phi).sin_cos();
    ([c * p * co, c * p * s], [c * dp * co, c * dp * s])
}

pub struct Grid {
    pub x: Vec<f64>,
    pub wx: Vec<f64>,
    pub phi: Vec<f64>,
    pub wphi: f64,
}

pub fn grid() -> Grid {
    let (x, wx) = gauss_legendre(NT);
    let phi = (0..NP).map(|k| 2.0 * PI * k as f64 / NP as f64).collect();
    Grid { x, wx, phi, wphi: 2.0 * PI / NP as f64 }
}

/// Tabulated bipolar harmonic (and its sinθ_i ∂θ_i derivatives) on the product grid.
pub struct Bipolar {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    pub d1: Vec<[f64; 2]>,
    pub d2: Vec<[f64; 2]>,
}

pub fn idx(i1: usize, p1: usize, i2: usize, p2: usize) -> usize {
    ((i1 * NP + p1) * NT + i2) * NP + p2
}

pub fn bipolar(g: &Grid, l1: i64, l2: i64, ll: i64, mm: i64) -> Bipolar {
    let n = NT * NP * NT * NP;
    let mut b = Bipolar { re: vec![0.0; n], im: vec![0.0; n], d1: vec![[0.0; 2]; n], d2: vec![[0.0; 2]; n] };
    for m1 in -l1..=l1 {
        let m2 = mm - m1;
        let c = cg(l1, m1, l2, m2, ll, mm);
        if c == 0.0 {
            continue;
        }
        for i1 in 0..NT {
            for p1 in 0..NP {
                let (y1, dy1) = ylm(l1, m1, g.x[i1], g.phi[p1]);
                for i2 in 0..NT {
                    for p2 in 0..NP {
                        let (y2, dy2) = ylm(l2, m2, g.x[i2], g.phi[p2]);
                        let k = idx(i1, p1, i2, p2);
                        let mul = |a: [f64; 2], b: [f64; 2]| [a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0]];
                        let v = mul(y1, y2);
                        let v1 = mul(dy1, y2);
                        let v2 = mul(y1, dy2);
                        b.re[k] += c * v[0];
                        b.im[k] += c * v[1];
                        b.d1[k][0] += c * v1[0];
                        b.d1[k][1] += c * v1[1];
                        b.d2[k][0] += c * v2[0];
                        b.d2[k][1] += c * v2[1];
                    }
                }
            }
        }
    }
    b
}

pub fn legendre(q: usize, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    if q == 0 {
        return 1.0;
    }
    for k in 2..=q {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Re ∫ conj(bra) · op · ket with op a multiplicative function or a derivative selector.
pub fn integrate<F: Fn(usize, usize, usize, usize) -> f64>(g: &Grid, bra: &Bipolar, ket: &[[f64; 2]], op: F) -> f64 {
    let mut s = 0.0;
    for i1 in 0..NT {
        for p1 in 0..NP {
            for i2 in 0..NT {
                for p2 in 0..NP {
                    let k = idx(i1, p1, i2, p2);
                    let w = g.wx[i1] * g.wx[i2] * g.wphi * g.wphi;
                    let re = bra.re[k] * ket[k][0] + bra.im[k] * ket[k][1];
                    s += w * re * op(i1, p1, i2, p2);
                }
            }
        }
    }
    s
}

pub fn states(parity: Option<i64>) -> Vec<(i64, i64, i64)> {
    let mut v = vec![];
    for l1 in 0..=LMAX {
        for l2 in 0..=LMAX {
            if let Some(p) = parity {
                if (l1 + l2) % 2 != p {
                    continue;
                }
            }
            for ll in (l1 - l2).abs()..=(l1 + l2).min(3) {
                v.push((l1, l2, ll));
            }
        }
    }
    v
}

pub fn am(s: (i64, i64, i64), m: i64) -> AngularMomenta {
    AngularMomenta::new(s.0 as u32, s.1 as u32, s.2 as u32, m as i32).unwrap()
}
