//! Complex-impedance algebra for one-ports and reciprocal two-ports.
//!
//! Every interface takes frequency in hertz; angular frequency stays internal.
//! Ideal opens and resonant poles are ordinary values ([`Impedance::Pole`])
//! rather than errors, because the passive-modulation filters are designed to
//! produce them.

mod element;
mod network;
mod singularities;
mod twoport;

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

pub use element::{ElementKind, ReactiveElement};
pub use network::{combine, Network};
pub use singularities::{find_poles_zeros, Singularity, SingularityKind, SweepScale};
pub use twoport::{input_impedance, t_network, TNetwork, ZMatrix};

/// Relative threshold under which a vanishing admittance (or a vanishing
/// `Z_load + z22` denominator) is reported as a pole.
pub const POLE_EPSILON: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ImpedanceError {
    #[error("frequency must be positive and finite, got {0} Hz")]
    NonPositiveFrequency(f64),
    #[error("invalid {kind} value {value}: {reason}")]
    InvalidElement {
        kind: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("series/parallel composite has no branches")]
    EmptyComposite,
    #[error("network evaluation is degenerate (0/0) at {0} Hz")]
    Degenerate(f64),
}

pub(crate) fn angular(f_hz: f64) -> Result<f64, ImpedanceError> {
    if f_hz > 0.0 && f_hz.is_finite() {
        Ok(2.0 * PI * f_hz)
    } else {
        Err(ImpedanceError::NonPositiveFrequency(f_hz))
    }
}

/// A complex impedance in ohms, or an explicit pole (infinite magnitude).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Impedance {
    Finite(Complex64),
    Pole,
}

impl Impedance {
    pub const ZERO: Impedance = Impedance::Finite(Complex64 { re: 0.0, im: 0.0 });

    pub fn new(re: f64, im: f64) -> Self {
        Impedance::Finite(Complex64::new(re, im))
    }

    pub fn resistive(ohms: f64) -> Self {
        Impedance::new(ohms, 0.0)
    }

    pub fn reactive(ohms: f64) -> Self {
        Impedance::new(0.0, ohms)
    }

    pub fn is_pole(self) -> bool {
        matches!(self, Impedance::Pole)
    }

    pub fn finite(self) -> Option<Complex64> {
        match self {
            Impedance::Finite(z) => Some(z),
            Impedance::Pole => None,
        }
    }

    /// Magnitude in ohms; `+inf` for a pole.
    pub fn norm(self) -> f64 {
        match self {
            Impedance::Finite(z) => z.norm(),
            Impedance::Pole => f64::INFINITY,
        }
    }

    /// Phase in radians; `NaN` for a pole.
    pub fn arg(self) -> f64 {
        match self {
            Impedance::Finite(z) => z.arg(),
            Impedance::Pole => f64::NAN,
        }
    }

    /// Replaces a pole with a large finite resistance so budget formulas stay total.
    pub fn or_cap(self, cap_ohms: f64) -> Complex64 {
        match self {
            Impedance::Finite(z) => z,
            Impedance::Pole => Complex64::new(cap_ohms, 0.0),
        }
    }

    pub fn admittance(self) -> Complex64 {
        match self {
            Impedance::Finite(z) => z.inv(),
            Impedance::Pole => Complex64::new(0.0, 0.0),
        }
    }

    /// Series connection: poles dominate.
    pub fn series(self, other: Impedance) -> Impedance {
        match (self, other) {
            (Impedance::Finite(a), Impedance::Finite(b)) => Impedance::Finite(a + b),
            _ => Impedance::Pole,
        }
    }

    /// Parallel connection: shorts dominate, poles drop out.
    pub fn parallel(self, other: Impedance) -> Impedance {
        parallel_all([self, other])
    }
}

impl From<Complex64> for Impedance {
    fn from(z: Complex64) -> Self {
        Impedance::Finite(z)
    }
}

impl fmt::Display for Impedance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Impedance::Finite(z) if z.im >= 0.0 => write!(f, "{:.6} + j{:.6} Ohm", z.re, z.im),
            Impedance::Finite(z) => write!(f, "{:.6} - j{:.6} Ohm", z.re, -z.im),
            Impedance::Pole => f.write_str("pole"),
        }
    }
}

/// Series sum of any number of impedances.
pub fn series_all<I: IntoIterator<Item = Impedance>>(items: I) -> Impedance {
    items.into_iter().fold(Impedance::ZERO, Impedance::series)
}

/// Parallel combination of any number of impedances.
///
/// An exact short wins over everything. Poles contribute zero admittance;
/// if every branch is a pole, or the admittances cancel to within
/// [`POLE_EPSILON`] of their total magnitude, the result is a pole.
pub fn parallel_all<I: IntoIterator<Item = Impedance>>(items: I) -> Impedance {
    let mut total = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    for z in items {
        match z {
            Impedance::Finite(z) if z.re == 0.0 && z.im == 0.0 => return Impedance::ZERO,
            Impedance::Finite(z) => {
                let y = z.inv();
                scale += y.norm();
                total += y;
            }
            Impedance::Pole => {}
        }
    }
    if scale == 0.0 || total.norm() <= POLE_EPSILON * scale {
        Impedance::Pole
    } else {
        Impedance::Finite(total.inv())
    }
}
