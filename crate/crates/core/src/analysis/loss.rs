use serde::{Deserialize, Serialize};

use crate::impedance::{Impedance, ImpedanceError, Network};

/// Reference frequency at which the inductor quality factor is specified.
pub const DEFAULT_Q_REF_HZ: f64 = 25e6;
pub const DEFAULT_Q: f64 = 40.0;
/// Finite stand-in for a pole in budget formulas.
pub const DEFAULT_POLE_CAP: f64 = 1e9;

/// Parasitics of the I/O pin in each logic state plus inductor loss.
///
/// `r_h = None` leaves the high-state pin as its bare capacitance; `r_l = 0`
/// with `l_l = 0` makes the low-state pin an ideal short; `inductor_q = None`
/// makes inductors ideal. Those three together are the lossless model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossModel {
    pub r_h: Option<f64>,
    pub r_l: f64,
    pub l_l: f64,
    pub inductor_q: Option<f64>,
    pub q_ref_hz: f64,
    /// Overrides the design's pin capacitance when set.
    pub c_io: Option<f64>,
    pub pole_cap: f64,
}

impl LossModel {
    pub fn lossless() -> Self {
        LossModel {
            r_h: None,
            r_l: 0.0,
            l_l: 0.0,
            inductor_q: None,
            q_ref_hz: DEFAULT_Q_REF_HZ,
            c_io: None,
            pole_cap: DEFAULT_POLE_CAP,
        }
    }

    /// R_H = 10 kΩ, R_L = 10 Ω, inductor Q = 40 at 25 MHz.
    pub fn lossy() -> Self {
        Self::lossy_with_q(DEFAULT_Q)
    }

    pub fn lossy_with_q(q: f64) -> Self {
        LossModel {
            r_h: Some(10e3),
            r_l: 10.0,
            inductor_q: Some(q),
            ..Self::lossless()
        }
    }

    pub fn is_lossless(&self) -> bool {
        self.r_h.is_none() && self.r_l == 0.0 && self.l_l == 0.0 && self.inductor_q.is_none()
    }

    pub fn validate(&self) -> Result<(), String> {
        if let Some(r) = self.r_h {
            if !(r > 0.0) {
                return Err(format!("r_h must be positive, got {r}"));
            }
        }
        if !(self.r_l >= 0.0 && self.l_l >= 0.0) {
            return Err("r_l and l_l must be non-negative".into());
        }
        if let Some(q) = self.inductor_q {
            if !(q > 0.0 && q.is_finite()) {
                return Err(format!("inductor Q must be positive, got {q}"));
            }
        }
        if !(self.q_ref_hz > 0.0) {
            return Err("Q reference frequency must be positive".into());
        }
        Ok(())
    }

    /// Series resistance of an inductor of `henries` at `f_hz`. The quality
    /// factor holds at the reference frequency and the resistance grows as
    /// `√f` (skin effect), so Q rises as `√f` too.
    pub fn inductor_esr(&self, henries: f64, f_hz: f64) -> f64 {
        match self.inductor_q {
            Some(q) => 2.0 * std::f64::consts::PI * self.q_ref_hz * henries / q * (f_hz / self.q_ref_hz).sqrt(),
            None => 0.0,
        }
    }

    /// Applies inductor loss at `f_hz` to every inductor in `net`.
    pub fn apply(&self, net: &Network, f_hz: f64) -> Network {
        if self.inductor_q.is_none() {
            return net.clone();
        }
        net.map_inductor_loss(&|l| self.inductor_esr(l, f_hz))
    }

    /// Pin impedance in the high state: `c_total` shunted by `r_h`.
    pub fn load_high(&self, c_total: f64, f_hz: f64) -> Result<Impedance, ImpedanceError> {
        let mut parts = vec![Network::capacitor(c_total)?];
        if let Some(r) = self.r_h {
            parts.push(Network::resistor(r)?);
        }
        Network::parallel(parts).impedance(f_hz)
    }

    /// Pin impedance in the low state: `r_l + jωl_l`, shunted by any external capacitance.
    pub fn load_low(&self, c_shunt: f64, f_hz: f64) -> Result<Impedance, ImpedanceError> {
        let mut on = Vec::new();
        if self.r_l > 0.0 {
            on.push(Network::resistor(self.r_l)?);
        }
        if self.l_l > 0.0 {
            on.push(Network::inductor(self.l_l)?);
        }
        let on = if on.is_empty() {
            Network::short()
        } else {
            Network::series(on)
        };
        if c_shunt > 0.0 {
            Network::parallel(vec![on, Network::capacitor(c_shunt)?]).impedance(f_hz)
        } else {
            on.impedance(f_hz)
        }
    }
}

impl Default for LossModel {
    fn default() -> Self {
        Self::lossy()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lossless_loads() {
        let m = LossModel::lossless();
        assert!(m.is_lossless());
        assert_eq!(m.load_low(10e-12, 20e6).unwrap(), Impedance::ZERO);
        let h = m.load_high(8e-12, 20e6).unwrap().finite().unwrap();
        assert_eq!(h.re, 0.0);
        assert!(h.im < 0.0);
    }

    #[test]
    fn esr_from_q() {
        let m = LossModel::lossy();
        let esr = m.inductor_esr(1e-6, 25e6);
        assert!((esr - 2.0 * std::f64::consts::PI * 25e6 * 1e-6 / 40.0).abs() < 1e-12);
        let q_at = |f: f64| 2.0 * std::f64::consts::PI * f * 1e-6 / m.inductor_esr(1e-6, f);
        assert!((q_at(100e6) / q_at(25e6) - 2.0).abs() < 1e-12);
        assert!(m.validate().is_ok());
        assert!(LossModel { r_h: Some(0.0), ..m }.validate().is_err());
    }
}
