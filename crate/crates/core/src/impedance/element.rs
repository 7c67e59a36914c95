use serde::Serialize;

use super::{angular, Impedance, ImpedanceError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    Resistor,
    Inductor,
    Capacitor,
    Open,
    Short,
}

impl ElementKind {
    pub fn name(self) -> &'static str {
        match self {
            ElementKind::Resistor => "resistor",
            ElementKind::Inductor => "inductor",
            ElementKind::Capacitor => "capacitor",
            ElementKind::Open => "open",
            ElementKind::Short => "short",
        }
    }
}

/// A single R, L or C atom (or an ideal open/short) with optional loss.
///
/// `series_loss` is an equivalent series resistance; `parallel_loss` is a
/// shunt resistance across the element. Values are SI base units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReactiveElement {
    pub kind: ElementKind,
    pub value: f64,
    pub series_loss: f64,
    pub parallel_loss: Option<f64>,
}

impl ReactiveElement {
    fn valued(kind: ElementKind, value: f64) -> Result<Self, ImpedanceError> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(ImpedanceError::InvalidElement {
                kind: kind.name(),
                value,
                reason: "must be positive and finite",
            });
        }
        Ok(ReactiveElement {
            kind,
            value,
            series_loss: 0.0,
            parallel_loss: None,
        })
    }

    pub fn resistor(ohms: f64) -> Result<Self, ImpedanceError> {
        Self::valued(ElementKind::Resistor, ohms)
    }

    pub fn inductor(henries: f64) -> Result<Self, ImpedanceError> {
        Self::valued(ElementKind::Inductor, henries)
    }

    pub fn capacitor(farads: f64) -> Result<Self, ImpedanceError> {
        Self::valued(ElementKind::Capacitor, farads)
    }

    pub fn open() -> Self {
        ReactiveElement {
            kind: ElementKind::Open,
            value: 0.0,
            series_loss: 0.0,
            parallel_loss: None,
        }
    }

    pub fn short() -> Self {
        ReactiveElement {
            kind: ElementKind::Short,
            ..Self::open()
        }
    }

    pub fn with_series_loss(mut self, ohms: f64) -> Result<Self, ImpedanceError> {
        if !(ohms >= 0.0 && ohms.is_finite()) {
            return Err(ImpedanceError::InvalidElement {
                kind: "series loss",
                value: ohms,
                reason: "must be non-negative and finite",
            });
        }
        self.series_loss = ohms;
        Ok(self)
    }

    pub fn with_parallel_loss(mut self, ohms: f64) -> Result<Self, ImpedanceError> {
        if !(ohms > 0.0) {
            return Err(ImpedanceError::InvalidElement {
                kind: "parallel loss",
                value: ohms,
                reason: "must be positive",
            });
        }
        self.parallel_loss = Some(ohms);
        Ok(self)
    }

    /// Complex impedance at `f_hz`.
    pub fn impedance(&self, f_hz: f64) -> Result<Impedance, ImpedanceError> {
        let w = angular(f_hz)?;
        let core = match self.kind {
            ElementKind::Resistor => Impedance::resistive(self.value),
            ElementKind::Inductor => Impedance::reactive(w * self.value),
            ElementKind::Capacitor => Impedance::reactive(-1.0 / (w * self.value)),
            ElementKind::Open => Impedance::Pole,
            ElementKind::Short => Impedance::ZERO,
        };
        let with_esr = if self.series_loss > 0.0 {
            core.series(Impedance::resistive(self.series_loss))
        } else {
            core
        };
        Ok(match self.parallel_loss {
            Some(rp) => with_esr.parallel(Impedance::resistive(rp)),
            None => with_esr,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inductor_reactance_at_20mhz() {
        // 2*pi*20e6*4.7e-6 evaluated by hand: 590.619...
        let z = ReactiveElement::inductor(4.7e-6).unwrap().impedance(20e6).unwrap();
        let z = z.finite().unwrap();
        assert_eq!(z.re, 0.0);
        assert!((z.im - 590.619_418_88).abs() < 1e-6, "{}", z.im);
    }

    #[test]
    fn pin_capacitance_is_about_minus_j1k_at_20mhz() {
        let z = ReactiveElement::capacitor(8e-12).unwrap().impedance(20e6).unwrap();
        let z = z.finite().unwrap();
        assert!((z.im + 994.718).abs() < 1e-2, "{}", z.im);
        assert!((z.im / -1000.0 - 1.0).abs() < 0.01);
    }

    #[test]
    fn ideal_open_and_short() {
        assert_eq!(ReactiveElement::short().impedance(1e3).unwrap(), Impedance::ZERO);
        assert!(ReactiveElement::open().impedance(1e3).unwrap().is_pole());
    }

    #[test]
    fn lossy_inductor_carries_esr() {
        let l = ReactiveElement::inductor(1e-6).unwrap().with_series_loss(2.5).unwrap();
        let z = l.impedance(1e6).unwrap().finite().unwrap();
        assert_eq!(z.re, 2.5);
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(ReactiveElement::inductor(0.0).is_err());
        assert!(ReactiveElement::capacitor(-1e-12).is_err());
        assert!(ReactiveElement::resistor(f64::NAN).is_err());
        let l = ReactiveElement::inductor(1e-6).unwrap();
        assert!(l.with_series_loss(-1.0).is_err());
        assert!(l.impedance(0.0).is_err());
    }
}
