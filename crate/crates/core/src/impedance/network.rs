use std::fmt;

use serde::Serialize;

use super::{parallel_all, series_all, Impedance, ImpedanceError, ReactiveElement};
use crate::units::format_si;

/// A one-port built from [`ReactiveElement`] atoms by series and parallel composition.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", content = "items", rename_all = "lowercase")]
pub enum Network {
    Element(ReactiveElement),
    Series(Vec<Network>),
    Parallel(Vec<Network>),
}

impl Network {
    pub fn resistor(ohms: f64) -> Result<Self, ImpedanceError> {
        ReactiveElement::resistor(ohms).map(Network::Element)
    }

    pub fn inductor(henries: f64) -> Result<Self, ImpedanceError> {
        ReactiveElement::inductor(henries).map(Network::Element)
    }

    pub fn capacitor(farads: f64) -> Result<Self, ImpedanceError> {
        ReactiveElement::capacitor(farads).map(Network::Element)
    }

    pub fn open() -> Self {
        Network::Element(ReactiveElement::open())
    }

    pub fn short() -> Self {
        Network::Element(ReactiveElement::short())
    }

    pub fn series(items: Vec<Network>) -> Self {
        Network::Series(items)
    }

    pub fn parallel(items: Vec<Network>) -> Self {
        Network::Parallel(items)
    }

    /// Impedance at `f_hz`, evaluated recursively.
    pub fn impedance(&self, f_hz: f64) -> Result<Impedance, ImpedanceError> {
        let z = match self {
            Network::Element(e) => e.impedance(f_hz)?,
            Network::Series(items) | Network::Parallel(items) if items.is_empty() => {
                return Err(ImpedanceError::EmptyComposite)
            }
            Network::Series(items) => {
                series_all(items.iter().map(|n| n.impedance(f_hz)).collect::<Result<Vec<_>, _>>()?)
            }
            Network::Parallel(items) => {
                parallel_all(items.iter().map(|n| n.impedance(f_hz)).collect::<Result<Vec<_>, _>>()?)
            }
        };
        match z {
            Impedance::Finite(c) if !(c.re.is_finite() && c.im.is_finite()) => Err(ImpedanceError::Degenerate(f_hz)),
            z => Ok(z),
        }
    }

    /// Visits every atom in the tree.
    pub fn elements(&self) -> Vec<&ReactiveElement> {
        match self {
            Network::Element(e) => vec![e],
            Network::Series(items) | Network::Parallel(items) => items.iter().flat_map(|n| n.elements()).collect(),
        }
    }

    /// Returns a copy with every inductor given the series resistance
    /// `f(henries)`; used to apply a quality-factor loss model.
    pub fn map_inductor_loss(&self, esr: &dyn Fn(f64) -> f64) -> Network {
        match self {
            Network::Element(e) if e.kind == super::ElementKind::Inductor => {
                let mut e = *e;
                e.series_loss = esr(e.value);
                Network::Element(e)
            }
            Network::Element(e) => Network::Element(*e),
            Network::Series(items) => Network::Series(items.iter().map(|n| n.map_inductor_loss(esr)).collect()),
            Network::Parallel(items) => Network::Parallel(items.iter().map(|n| n.map_inductor_loss(esr)).collect()),
        }
    }
}

impl fmt::Display for Network {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Network::Element(e) => {
                use super::ElementKind::*;
                match e.kind {
                    Resistor => f.write_str(&format_si(e.value, "Ohm")),
                    Inductor => f.write_str(&format_si(e.value, "H")),
                    Capacitor => f.write_str(&format_si(e.value, "F")),
                    Open => f.write_str("open"),
                    Short => f.write_str("short"),
                }
            }
            Network::Series(items) | Network::Parallel(items) => {
                let name = if matches!(self, Network::Series(_)) {
                    "series"
                } else {
                    "parallel"
                };
                write!(f, "{name}(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Evaluates a network at `f_hz`. Pole flags propagate; they are not errors.
pub fn combine(net: &Network, f_hz: f64) -> Result<Impedance, ImpedanceError> {
    net.impedance(f_hz)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identities() {
        let z = Network::inductor(1e-6).unwrap();
        let zv = z.impedance(1e6).unwrap();
        let s = Network::series(vec![z.clone(), Network::short()]);
        assert_eq!(s.impedance(1e6).unwrap(), zv);
        let p = Network::parallel(vec![z.clone(), Network::open()]);
        assert_eq!(p.impedance(1e6).unwrap(), zv);
        let p = Network::parallel(vec![z.clone(), Network::short()]);
        assert_eq!(p.impedance(1e6).unwrap(), Impedance::ZERO);
        let s = Network::series(vec![z, Network::open()]);
        assert!(s.impedance(1e6).unwrap().is_pole());
    }

    #[test]
    fn empty_composite_is_an_error() {
        assert_eq!(
            Network::series(vec![]).impedance(1e6),
            Err(ImpedanceError::EmptyComposite)
        );
    }

    #[test]
    fn display_round_trips_through_text() {
        let n = Network::series(vec![
            Network::inductor(3.3e-6).unwrap(),
            Network::capacitor(22e-12).unwrap(),
            Network::resistor(2000.0).unwrap(),
        ]);
        assert_eq!(n.to_string(), "series(3.3uH, 22pF, 2kOhm)");
    }
}
