mod common;

use common::{am, bipolar, grid, integrate, legendre, states, Bipolar};
use hypersturm::angular_algebra::{
    dipole_angular_dtheta1, dipole_angular_dtheta2, dipole_angular_theta1, dipole_angular_theta2,
    multipole_coupling, AngularMomenta,
};

#[test]
fn multipole_coupling_matches_quadrature() {
    let g = grid();
    let mut worst: f64 = 0.0;
    for parity in [0, 1] {
        let st = states(Some(parity));
        let tab: Vec<Bipolar> = st.iter().map(|&(a, b, l)| bipolar(&g, a, b, l, 0)).collect();
        for (i, &s) in st.iter().enumerate() {
            let ket: Vec<[f64; 2]> = tab[i].re.iter().zip(&tab[i].im).map(|(&r, &m)| [r, m]).collect();
            for (j, &sp) in st.iter().enumerate() {
                if sp.2 != s.2 {
                    continue;
                }
                for q in 0..=6usize {
                    let num = integrate(&g, &tab[j], &ket, |i1, p1, i2, p2| {
                        let (x1, x2) = (g.x[i1], g.x[i2]);
                        let c12 = x1 * x2
                            + (1.0 - x1 * x1).sqrt() * (1.0 - x2 * x2).sqrt() * (g.phi[p1] - g.phi[p2]).cos();
                        legendre(q, c12)
                    });
                    let an = multipole_coupling(&am(sp, 0), &am(s, 0), q as u32);
                    worst = worst.max((num - an).abs());
                    assert!((num - an).abs() < 1e-10, "q={q} bra={sp:?} ket={s:?}: quad {num} formula {an}");
                }
            }
        }
    }
    eprintln!("multipole worst deviation {worst:e}");
}

#[test]
fn multipole_coupling_m_independent() {
    let g = grid();
    for (s, sp) in [((1, 1, 1), (0, 1, 1)), ((1, 2, 2), (2, 1, 2)), ((2, 2, 2), (1, 3, 2))] {
        for mm in (1..=s.2).filter(|&m| m <= sp.2) {
            let bra = bipolar(&g, sp.0, sp.1, sp.2, mm);
            let k = bipolar(&g, s.0, s.1, s.2, mm);
            let ket: Vec<[f64; 2]> = k.re.iter().zip(&k.im).map(|(&r, &m)| [r, m]).collect();
            for q in 1..=3usize {
                let num = integrate(&g, &bra, &ket, |i1, p1, i2, p2| {
                    let (x1, x2) = (g.x[i1], g.x[i2]);
                    let c12 = x1 * x2 + (1.0 - x1 * x1).sqrt() * (1.0 - x2 * x2).sqrt() * (g.phi[p1] - g.phi[p2]).cos();
                    legendre(q, c12)
                });
                let an = multipole_coupling(&am(sp, mm), &am(s, mm), q as u32);
                assert!((num - an).abs() < 1e-10, "M={mm} q={q}: {num} vs {an}");
            }
        }
    }
}

#[test]
fn dipole_factors_match_quadrature() {
    let g = grid();
    let st = states(None);
    let tab: Vec<Bipolar> = st.iter().map(|&(a, b, l)| bipolar(&g, a, b, l, 0)).collect();
    let mut count = 0;
    for (i, &s) in st.iter().enumerate() {
        let ket: Vec<[f64; 2]> = tab[i].re.iter().zip(&tab[i].im).map(|(&r, &m)| [r, m]).collect();
        for (j, &sp) in st.iter().enumerate() {
            if (sp.2 - s.2).abs() > 1 || (sp.0 + sp.1 + s.0 + s.1) % 2 == 0 {
                continue;
            }
            let (bra, kk) = (am(sp, 0), am(s, 0));
            let c1 = integrate(&g, &tab[j], &ket, |i1, _, _, _| g.x[i1]);
            let c2 = integrate(&g, &tab[j], &ket, |_, _, i2, _| g.x[i2]);
            let d1 = integrate(&g, &tab[j], &tab[i].d1, |_, _, _, _| 1.0);
            let d2 = integrate(&g, &tab[j], &tab[i].d2, |_, _, _, _| 1.0);
            for (num, an, name) in [
                (c1, dipole_angular_theta1(&bra, &kk), "cos1"),
                (c2, dipole_angular_theta2(&bra, &kk), "cos2"),
                (d1, dipole_angular_dtheta1(&bra, &kk), "dtheta1"),
                (d2, dipole_angular_dtheta2(&bra, &kk), "dtheta2"),
            ] {
                assert!((num - an).abs() < 1e-10, "{name} bra={sp:?} ket={s:?}: quad {num} formula {an}");
            }
            count += 1;
        }
    }
    assert!(count > 50);
}

#[test]
fn dipole_reference_value() {
    let bra = AngularMomenta::new(1, 0, 1, 0).unwrap();
    let ket = AngularMomenta::new(0, 0, 0, 0).unwrap();
    assert!((dipole_angular_theta1(&bra, &ket) - 1.0 / 3f64.sqrt()).abs() < 1e-14);
    assert!((dipole_angular_theta2(&bra.swapped(), &ket) - 1.0 / 3f64.sqrt()).abs() < 1e-14);
    assert_eq!(dipole_angular_dtheta1(&bra, &ket), 0.0);
    let b2 = AngularMomenta::new(0, 0, 0, 0).unwrap();
    assert!((dipole_angular_dtheta1(&b2, &bra) + 2.0 / 3f64.sqrt()).abs() < 1e-14);
}
