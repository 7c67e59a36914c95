//! Brute-force nodal analysis used as an independent oracle for two-port formulas.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

fn stamp(g: &mut DMatrix<Complex64>, a: Option<usize>, b: Option<usize>, y: Complex64) {
    if let Some(a) = a {
        g[(a, a)] += y;
    }
    if let Some(b) = b {
        g[(b, b)] += y;
    }
    if let (Some(a), Some(b)) = (a, b) {
        g[(a, b)] -= y;
        g[(b, a)] -= y;
    }
}

/// Node voltages of a T-network (port 1 = node 0, centre = node 1, port 2 =
/// node 2) with `load` from port 2 to ground and unit current into `inject`.
pub fn t_voltages(
    z1: Complex64,
    zm: Complex64,
    z2: Complex64,
    load: Option<Complex64>,
    inject: usize,
) -> DVector<Complex64> {
    let mut g = DMatrix::<Complex64>::zeros(3, 3);
    stamp(&mut g, Some(0), Some(1), z1.inv());
    stamp(&mut g, Some(1), None, zm.inv());
    stamp(&mut g, Some(1), Some(2), z2.inv());
    if let Some(zl) = load {
        stamp(&mut g, Some(2), None, zl.inv());
    }
    let mut i = DVector::<Complex64>::zeros(3);
    i[inject] = Complex64::new(1.0, 0.0);
    g.lu().solve(&i).expect("non-singular nodal matrix")
}

/// Input impedance at port 1 with `load` on port 2.
pub fn t_input_impedance(z1: Complex64, zm: Complex64, z2: Complex64, load: Complex64) -> Complex64 {
    t_voltages(z1, zm, z2, Some(load), 0)[0]
}
