mod support;

use num_complex::Complex64;
use passmod_core::impedance::{t_network, Impedance, Network};
use proptest::prelude::*;
use support::nodal::{t_input_impedance, t_voltages};

/// A lossy random branch: a resistor in series with an L or C, optionally
/// shunted by the other reactive kind.
fn branch() -> impl Strategy<Value = Network> {
    (1.0f64..1e4, 1e-8f64..1e-5, 1e-12f64..1e-9, 0u8..4).prop_map(|(r, l, c, shape)| {
        let (r, l, c) = (
            Network::resistor(r).unwrap(),
            Network::inductor(l).unwrap(),
            Network::capacitor(c).unwrap(),
        );
        match shape {
            0 => Network::series(vec![r, l]),
            1 => Network::series(vec![r, c]),
            2 => Network::series(vec![r, Network::parallel(vec![l, c])]),
            _ => Network::parallel(vec![Network::series(vec![r, l]), c]),
        }
    })
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn closed_form_matches_nodal_analysis(
        x1 in branch(), xm in branch(), x2 in branch(), load in branch(), f in 1e5f64..2e8,
    ) {
        let z = |n: &Network| n.impedance(f).unwrap().finite().unwrap();
        let want = t_input_impedance(z(&x1), z(&xm), z(&x2), z(&load));
        let t = t_network(x1.clone(), xm.clone(), x2.clone());
        let got = t.input_impedance(f, Impedance::Finite(z(&load))).unwrap().finite().unwrap();
        prop_assert!(rel(got, want) <= 1e-9, "closed form {got} vs nodal {want}");
    }

    #[test]
    fn t_network_is_reciprocal(x1 in branch(), xm in branch(), x2 in branch(), f in 1e5f64..2e8) {
        let z = |n: &Network| n.impedance(f).unwrap().finite().unwrap();
        let v_from_1 = t_voltages(z(&x1), z(&xm), z(&x2), None, 0);
        let v_from_2 = t_voltages(z(&x1), z(&xm), z(&x2), None, 2);
        prop_assert!(rel(v_from_1[2], v_from_2[0]) <= 1e-9);
        let m = t_network(x1, xm, x2).z_matrix(f).unwrap();
        prop_assert!(rel(m.z11.finite().unwrap(), v_from_1[0]) <= 1e-9);
        prop_assert!(rel(m.zm.finite().unwrap(), v_from_1[2]) <= 1e-9);
        prop_assert!(rel(m.z22.finite().unwrap(), v_from_2[2]) <= 1e-9);
    }

    #[test]
    fn series_and_parallel_associate(a in branch(), b in branch(), c in branch(), f in 1e5f64..2e8) {
        let z = |n: &Network| n.impedance(f).unwrap();
        let (za, zb, zc) = (z(&a), z(&b), z(&c));
        let p1 = za.parallel(zb).parallel(zc).finite().unwrap();
        let p2 = za.parallel(zb.parallel(zc)).finite().unwrap();
        prop_assert!(rel(p1, p2) <= 1e-12);
        let s1 = za.series(zb).series(zc).finite().unwrap();
        let s2 = za.series(zb.series(zc)).finite().unwrap();
        prop_assert!(rel(s1, s2) <= 1e-12);
        let nested = Network::parallel(vec![a, Network::series(vec![b, c])]).impedance(f).unwrap().finite().unwrap();
        prop_assert!(rel(nested, za.parallel(zb.series(zc)).finite().unwrap()) <= 1e-12);
    }
}
