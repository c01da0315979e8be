//! Wigner 3j/6j symbols and bipolar-harmonic matrix elements.
//!
//! Symbols are evaluated from the Racah sums in exact rational arithmetic
//! and cached. Internally angular momenta are passed doubled (2j) so that
//! half-integers stay integral.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AngularMomenta {
    pub l1: u32,
    pub l2: u32,
    pub L: u32,
    pub M: i32,
}

impl AngularMomenta {
    #[allow(non_snake_case)]
    pub fn new(l1: u32, l2: u32, L: u32, M: i32) -> Result<Self> {
        let a = Self { l1, l2, L, M };
        if !a.is_valid() {
            return Err(Error::Domain(format!("angular momenta {a:?}")));
        }
        Ok(a)
    }

    pub fn is_valid(&self) -> bool {
        triangle(self.l1 as i64, self.l2 as i64, self.L as i64) && self.M.unsigned_abs() <= self.L
    }

    pub fn swapped(&self) -> Self {
        Self { l1: self.l2, l2: self.l1, ..*self }
    }
}

fn triangle(a: i64, b: i64, c: i64) -> bool {
    c >= (a - b).abs() && c <= a + b
}

fn factorial(n: i64) -> BigInt {
    static TABLE: OnceLock<Mutex<Vec<BigInt>>> = OnceLock::new();
    let t = TABLE.get_or_init(|| Mutex::new(vec![BigInt::one()]));
    let mut t = t.lock().unwrap();
    while t.len() as i64 <= n {
        let k = t.len();
        let next = &t[k - 1] * BigInt::from(k);
        t.push(next);
    }
    t[n as usize].clone()
}

fn rat_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Δ(abc)² as a rational, arguments doubled.
fn delta_sq(ta: i64, tb: i64, tc: i64) -> BigRational {
    BigRational::new(
        factorial((ta + tb - tc) / 2) * factorial((ta - tb + tc) / 2) * factorial((-ta + tb + tc) / 2),
        factorial((ta + tb + tc) / 2 + 1),
    )
}

fn triad_ok(ta: i64, tb: i64, tc: i64) -> bool {
    ta >= 0 && tb >= 0 && tc >= 0 && (ta + tb + tc) % 2 == 0 && triangle(ta, tb, tc)
}

type Key = [i64; 6];

fn cache() -> &'static Mutex<(HashMap<Key, f64>, HashMap<Key, f64>)> {
    static C: OnceLock<Mutex<(HashMap<Key, f64>, HashMap<Key, f64>)>> = OnceLock::new();
    C.get_or_init(|| Mutex::new((HashMap::new(), HashMap::new())))
}

/// 3j symbol with doubled arguments.
pub fn w3j(tj1: i64, tj2: i64, tj3: i64, tm1: i64, tm2: i64, tm3: i64) -> f64 {
    if tm1 + tm2 + tm3 != 0 || !triad_ok(tj1, tj2, tj3) {
        return 0.0;
    }
    for (tj, tm) in [(tj1, tm1), (tj2, tm2), (tj3, tm3)] {
        if tm.abs() > tj || (tj - tm) % 2 != 0 {
            return 0.0;
        }
    }
    let key = [tj1, tj2, tj3, tm1, tm2, tm3];
    if let Some(&v) = cache().lock().unwrap().0.get(&key) {
        return v;
    }
    let v = w3j_exact(tj1, tj2, tj3, tm1, tm2, tm3);
    cache().lock().unwrap().0.insert(key, v);
    v
}

fn w3j_exact(tj1: i64, tj2: i64, tj3: i64, tm1: i64, tm2: i64, tm3: i64) -> f64 {
    let h = |x: i64| x / 2;
    let pref = delta_sq(tj1, tj2, tj3)
        * BigRational::from_integer(
            factorial(h(tj1 + tm1))
                * factorial(h(tj1 - tm1))
                * factorial(h(tj2 + tm2))
                * factorial(h(tj2 - tm2))
                * factorial(h(tj3 + tm3))
                * factorial(h(tj3 - tm3)),
        );
    let kmin = 0.max(h(tj2 - tj3 - tm1)).max(h(tj1 - tj3 + tm2));
    let kmax = h(tj1 + tj2 - tj3).min(h(tj1 - tm1)).min(h(tj2 + tm2));
    let mut sum = BigRational::zero();
    for k in kmin..=kmax {
        let den = factorial(k)
            * factorial(h(tj3 - tj2 + tm1) + k)
            * factorial(h(tj3 - tj1 - tm2) + k)
            * factorial(h(tj1 + tj2 - tj3) - k)
            * factorial(h(tj1 - tm1) - k)
            * factorial(h(tj2 + tm2) - k);
        let term = BigRational::new(BigInt::one(), den);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    if sum.is_zero() {
        return 0.0;
    }
    let mag = rat_f64(&(pref * &sum * &sum)).sqrt();
    let phase = h(tj1 - tj2 - tm3);
    let s = if sum.is_negative() { -1.0 } else { 1.0 };
    if phase.rem_euclid(2) == 0 {
        s * mag
    } else {
        -s * mag
    }
}

/// 6j symbol with doubled arguments.
pub fn w6j(tj1: i64, tj2: i64, tj3: i64, tj4: i64, tj5: i64, tj6: i64) -> f64 {
    if !(triad_ok(tj1, tj2, tj3) && triad_ok(tj1, tj5, tj6) && triad_ok(tj4, tj2, tj6) && triad_ok(tj4, tj5, tj3)) {
        return 0.0;
    }
    let key = [tj1, tj2, tj3, tj4, tj5, tj6];
    if let Some(&v) = cache().lock().unwrap().1.get(&key) {
        return v;
    }
    let v = w6j_exact(tj1, tj2, tj3, tj4, tj5, tj6);
    cache().lock().unwrap().1.insert(key, v);
    v
}

fn w6j_exact(tj1: i64, tj2: i64, tj3: i64, tj4: i64, tj5: i64, tj6: i64) -> f64 {
    let pref = delta_sq(tj1, tj2, tj3) * delta_sq(tj1, tj5, tj6) * delta_sq(tj4, tj2, tj6) * delta_sq(tj4, tj5, tj3);
    let a = [(tj1 + tj2 + tj3) / 2, (tj1 + tj5 + tj6) / 2, (tj4 + tj2 + tj6) / 2, (tj4 + tj5 + tj3) / 2];
    let b = [(tj1 + tj2 + tj4 + tj5) / 2, (tj2 + tj3 + tj5 + tj6) / 2, (tj3 + tj1 + tj6 + tj4) / 2];
    let tmin = *a.iter().max().unwrap();
    let tmax = *b.iter().min().unwrap();
    let mut sum = BigRational::zero();
    for t in tmin..=tmax {
        let mut den = BigInt::one();
        for &ai in &a {
            den *= factorial(t - ai);
        }
        for &bi in &b {
            den *= factorial(bi - t);
        }
        let term = BigRational::new(factorial(t + 1), den);
        if t % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    if sum.is_zero() {
        return 0.0;
    }
    let mag = rat_f64(&(pref * &sum * &sum)).sqrt();
    if sum.is_negative() {
        -mag
    } else {
        mag
    }
}

fn doubled(x: f64) -> Result<i64> {
    let t = 2.0 * x;
    if !t.is_finite() || (t - t.round()).abs() > 1e-9 {
        return Err(Error::Domain(format!("{x} is not a half-integer")));
    }
    Ok(t.round() as i64)
}

fn doubled_j(x: f64) -> Result<i64> {
    let t = doubled(x)?;
    if t < 0 {
        return Err(Error::Domain(format!("negative angular momentum {x}")));
    }
    Ok(t)
}

/// Wigner 3j symbol (j1 j2 j3; m1 m2 m3).
pub fn wigner3j(j1: f64, j2: f64, j3: f64, m1: f64, m2: f64, m3: f64) -> Result<f64> {
    Ok(w3j(doubled_j(j1)?, doubled_j(j2)?, doubled_j(j3)?, doubled(m1)?, doubled(m2)?, doubled(m3)?))
}

/// Wigner 6j symbol {j1 j2 j3; j4 j5 j6}.
pub fn wigner6j(j1: f64, j2: f64, j3: f64, j4: f64, j5: f64, j6: f64) -> Result<f64> {
    Ok(w6j(
        doubled_j(j1)?,
        doubled_j(j2)?,
        doubled_j(j3)?,
        doubled_j(j4)?,
        doubled_j(j5)?,
        doubled_j(j6)?,
    ))
}

/// Clebsch–Gordan ⟨j1 m1 j2 m2|J M⟩ for integer arguments.
pub fn clebsch_gordan(j1: i64, m1: i64, j2: i64, m2: i64, j: i64, m: i64) -> f64 {
    let ph = if (j1 - j2 + m).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    ph * ((2 * j + 1) as f64).sqrt() * w3j(2 * j1, 2 * j2, 2 * j, 2 * m1, 2 * m2, -2 * m)
}

fn sign(n: i64) -> f64 {
    if n.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// ⟨l'||C^k||l⟩ for the renormalized spherical harmonic C^k.
pub fn reduced_ck(lp: u32, k: u32, l: u32) -> f64 {
    let (lp, k, l) = (lp as i64, k as i64, l as i64);
    sign(lp) * (((2 * lp + 1) * (2 * l + 1)) as f64).sqrt() * w3j(2 * lp, 2 * k, 2 * l, 0, 0, 0)
}

/// ⟨(l1'l2')L M|P_q(cos θ12)|(l1 l2)L M⟩.
pub fn multipole_coupling(bra: &AngularMomenta, ket: &AngularMomenta, q: u32) -> f64 {
    if bra.L != ket.L || bra.M != ket.M {
        return 0.0;
    }
    let (l1p, l2p, l1, l2, ll, qq) =
        (bra.l1 as i64, bra.l2 as i64, ket.l1 as i64, ket.l2 as i64, ket.L as i64, q as i64);
    sign(l1 + l2p + ll)
        * w6j(2 * l1p, 2 * l2p, 2 * ll, 2 * l2, 2 * l1, 2 * qq)
        * reduced_ck(bra.l1, q, ket.l1)
        * reduced_ck(bra.l2, q, ket.l2)
}

/// ⟨(l1'l2')L'M'|C^1_0 acting on electron 1|(l1 l2)L M⟩ = ⟨…|cos θ1|…⟩.
pub fn dipole_angular_theta1(bra: &AngularMomenta, ket: &AngularMomenta) -> f64 {
    if bra.l2 != ket.l2 || bra.l1.abs_diff(ket.l1) != 1 {
        return 0.0;
    }
    let (lp, mp, l, m) = (bra.L as i64, bra.M as i64, ket.L as i64, ket.M as i64);
    let (l1p, l1, l2) = (bra.l1 as i64, ket.l1 as i64, ket.l2 as i64);
    let we = sign(lp - mp) * w3j(2 * lp, 2, 2 * l, -2 * mp, 0, 2 * m);
    if we == 0.0 {
        return 0.0;
    }
    let red = sign(l1p + l2 + l + 1)
        * (((2 * l + 1) * (2 * lp + 1)) as f64).sqrt()
        * w6j(2 * l1p, 2 * lp, 2 * l2, 2 * l, 2 * l1, 2)
        * reduced_ck(bra.l1, 1, ket.l1);
    we * red
}

/// ⟨(l1'l2')L'M'|cos θ2|(l1 l2)L M⟩.
pub fn dipole_angular_theta2(bra: &AngularMomenta, ket: &AngularMomenta) -> f64 {
    if bra.l1 != ket.l1 || bra.l2.abs_diff(ket.l2) != 1 {
        return 0.0;
    }
    let (lp, mp, l, m) = (bra.L as i64, bra.M as i64, ket.L as i64, ket.M as i64);
    let (l2p, l1, l2) = (bra.l2 as i64, ket.l1 as i64, ket.l2 as i64);
    let we = sign(lp - mp) * w3j(2 * lp, 2, 2 * l, -2 * mp, 0, 2 * m);
    if we == 0.0 {
        return 0.0;
    }
    let red = sign(l1 + l2 + lp + 1)
        * (((2 * l + 1) * (2 * lp + 1)) as f64).sqrt()
        * w6j(2 * l2p, 2 * lp, 2 * l1, 2 * l, 2 * l2, 2)
        * reduced_ck(bra.l2, 1, ket.l2);
    we * red
}

/// ⟨bra|sin θ1 ∂/∂θ1|ket⟩.
pub fn dipole_angular_dtheta1(bra: &AngularMomenta, ket: &AngularMomenta) -> f64 {
    let c = dipole_angular_theta1(bra, ket);
    if bra.l1 == ket.l1 + 1 {
        ket.l1 as f64 * c
    } else {
        -(ket.l1 as f64 + 1.0) * c
    }
}

/// ⟨bra|sin θ2 ∂/∂θ2|ket⟩.
pub fn dipole_angular_dtheta2(bra: &AngularMomenta, ket: &AngularMomenta) -> f64 {
    let c = dipole_angular_theta2(bra, ket);
    if bra.l2 == ket.l2 + 1 {
        ket.l2 as f64 * c
    } else {
        -(ket.l2 as f64 + 1.0) * c
    }
}
