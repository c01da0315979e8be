use hypersturm::angular_algebra::{multipole_coupling, w3j, w6j, AngularMomenta};
use proptest::prelude::*;

fn valid_3j() -> impl Strategy<Value = [i64; 6]> {
    (0i64..=16, 0i64..=16, 0i64..=32, any::<u32>(), any::<u32>()).prop_filter_map("triad", |(a, b, c, r1, r2)| {
        if (a + b + c) % 2 != 0 || c < (a - b).abs() || c > a + b {
            return None;
        }
        let m1 = -a + 2 * (r1 as i64 % (a + 1));
        let m2 = -b + 2 * (r2 as i64 % (b + 1));
        let m3 = -m1 - m2;
        if m3.abs() > c {
            return None;
        }
        Some([a, b, c, m1, m2, m3])
    })
}

proptest! {
    #[test]
    fn three_j_permutations(j in valid_3j()) {
        let [a, b, c, x, y, z] = j;
        let v = w3j(a, b, c, x, y, z);
        let odd = if ((a + b + c) / 2) % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!((w3j(b, c, a, y, z, x) - v).abs() < 1e-13);
        prop_assert!((w3j(c, a, b, z, x, y) - v).abs() < 1e-13);
        prop_assert!((w3j(b, a, c, y, x, z) - odd * v).abs() < 1e-13);
        prop_assert!((w3j(a, b, c, -x, -y, -z) - odd * v).abs() < 1e-13);
    }

    #[test]
    fn three_j_orthogonality(a in 0i64..=12, b in 0i64..=12, r1 in any::<u32>(), r2 in any::<u32>()) {
        let m1 = -a + 2 * (r1 as i64 % (a + 1));
        let m2 = -b + 2 * (r2 as i64 % (b + 1));
        let mut s = 0.0;
        let mut c = (a - b).abs();
        while c <= a + b {
            let v = w3j(a, b, c, m1, m2, -m1 - m2);
            s += (c + 1) as f64 * v * v;
            c += 2;
        }
        prop_assert!((s - 1.0).abs() < 1e-13);
    }

    #[test]
    fn six_j_symmetries(t in proptest::array::uniform6(0i64..=10)) {
        let [a, b, c, d, e, f] = t;
        let v = w6j(a, b, c, d, e, f);
        prop_assert!((w6j(b, a, c, e, d, f) - v).abs() < 1e-13);
        prop_assert!((w6j(c, b, a, f, e, d) - v).abs() < 1e-13);
        prop_assert!((w6j(d, e, c, a, b, f) - v).abs() < 1e-13);
        prop_assert!((w6j(a, e, f, d, b, c) - v).abs() < 1e-13);
    }

    #[test]
    fn multipole_bra_ket_symmetry(l1 in 0u32..5, l2 in 0u32..5, l1p in 0u32..5, l2p in 0u32..5, ll in 0u32..5, q in 0u32..8) {
        let (Ok(b), Ok(k)) = (AngularMomenta::new(l1p, l2p, ll, 0), AngularMomenta::new(l1, l2, ll, 0)) else {
            return Ok(());
        };
        prop_assert!((multipole_coupling(&b, &k, q) - multipole_coupling(&k, &b, q)).abs() < 1e-13);
    }
}

#[test]
fn monopole_is_identity() {
    for (l1, l2, ll) in [(0, 0, 0), (1, 1, 0), (1, 2, 2), (3, 3, 4)] {
        let a = AngularMomenta::new(l1, l2, ll, 0).unwrap();
        assert!((multipole_coupling(&a, &a, 0) - 1.0).abs() < 1e-14);
        let b = AngularMomenta::new(l1 + 1, l2 + 1, ll, 0).unwrap();
        assert_eq!(multipole_coupling(&b, &a, 0), 0.0);
    }
    let b = AngularMomenta::new(1, 1, 1, 0).unwrap();
    let k = AngularMomenta::new(0, 1, 1, 0).unwrap();
    let k0 = AngularMomenta::new(1, 1, 0, 0).unwrap();
    assert_eq!(multipole_coupling(&b, &k0, 1), 0.0);
    assert_eq!(multipole_coupling(&b, &k, 1), 0.0);
}
