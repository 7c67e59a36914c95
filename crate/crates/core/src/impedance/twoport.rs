use num_complex::Complex64;
use serde::Serialize;

use super::{Impedance, ImpedanceError, Network, POLE_EPSILON};

/// Open-circuit impedance matrix of a reciprocal two-port at one frequency.
///
/// Reciprocity is structural: there is a single mutual term `zm`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZMatrix {
    pub z11: Impedance,
    pub zm: Impedance,
    pub z22: Impedance,
}

impl ZMatrix {
    pub fn swapped(self) -> ZMatrix {
        ZMatrix {
            z11: self.z22,
            zm: self.zm,
            z22: self.z11,
        }
    }
}

/// Impedance seen at port 1 with `z_load` on port 2: `z11 − zm²/(z_load + z22)`.
///
/// The result is a pole when `z11` is, or when the denominator vanishes to
/// within [`POLE_EPSILON`] of `|z_load| + |z22|`. An open load leaves `z11`.
pub fn input_impedance(z: &ZMatrix, z_load: Impedance) -> Impedance {
    let z11 = match z.z11 {
        Impedance::Finite(v) => v,
        Impedance::Pole => return Impedance::Pole,
    };
    let zm = match z.zm {
        Impedance::Finite(v) => v,
        // Open mutual arm with finite z11 cannot occur for a T; treat as decoupled.
        Impedance::Pole => return Impedance::Pole,
    };
    let (load, z22) = match (z_load, z.z22) {
        (Impedance::Finite(l), Impedance::Finite(z22)) => (l, z22),
        _ => return Impedance::Finite(z11),
    };
    if zm == Complex64::new(0.0, 0.0) {
        return Impedance::Finite(z11);
    }
    let denom = load + z22;
    if denom.norm() <= POLE_EPSILON * (load.norm() + z22.norm()) {
        return Impedance::Pole;
    }
    Impedance::Finite(z11 - zm * zm / denom)
}

/// A T-network: `series1` from port 1 to the centre node, `shunt` from the
/// centre node to ground, `series2` from the centre node to port 2.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TNetwork {
    pub series1: Network,
    pub shunt: Network,
    pub series2: Network,
}

/// Builds a T-network from its three branch one-ports.
pub fn t_network(series1: Network, shunt: Network, series2: Network) -> TNetwork {
    TNetwork {
        series1,
        shunt,
        series2,
    }
}

impl TNetwork {
    /// Branch impedances `(Z1, Zm, Z2)` at `f_hz`.
    pub fn branches(&self, f_hz: f64) -> Result<(Impedance, Impedance, Impedance), ImpedanceError> {
        Ok((
            self.series1.impedance(f_hz)?,
            self.shunt.impedance(f_hz)?,
            self.series2.impedance(f_hz)?,
        ))
    }

    pub fn z_matrix(&self, f_hz: f64) -> Result<ZMatrix, ImpedanceError> {
        let (z1, zm, z2) = self.branches(f_hz)?;
        Ok(ZMatrix {
            z11: z1.series(zm),
            zm,
            z22: z2.series(zm),
        })
    }

    /// Input impedance at port 1 with `z_load` on port 2.
    pub fn input_impedance(&self, f_hz: f64, z_load: Impedance) -> Result<Impedance, ImpedanceError> {
        let (z1, zm, z2) = self.branches(f_hz)?;
        if zm.is_pole() {
            // No shunt path: the ports are simply in series.
            return Ok(z1.series(z2).series(z_load));
        }
        let zmat = ZMatrix {
            z11: z1.series(zm),
            zm,
            z22: z2.series(zm),
        };
        Ok(input_impedance(&zmat, z_load))
    }

    pub fn swapped(&self) -> TNetwork {
        TNetwork {
            series1: self.series2.clone(),
            shunt: self.shunt.clone(),
            series2: self.series1.clone(),
        }
    }
}
