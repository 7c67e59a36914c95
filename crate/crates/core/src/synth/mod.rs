//! Closed-form synthesis of the passive-modulation T-filter.
//!
//! Given the carrier the filter modulates (`f_mod`), the carrier it must block
//! (`f_stop`), the pin capacitance and the mutual-arm reactance `x_m`, the
//! branch reactances at `f_mod` are
//!
//! ```text
//! x2 = X − x_m,     x1 = −(x_m / X)·x2,     X = 1 / (ω_mod·C_H)
//! ```
//!
//! and `x1` is realized as a parallel L1‖C1 tank resonant at `f_stop`.

mod eseries;
mod verify;

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::LossModel;
use crate::impedance::{t_network, Impedance, ImpedanceError, Network, TNetwork};
use crate::Level;

pub use eseries::{floor_eseries, snap_eseries, ESeries, PartKind, SnapPolicy};
pub use verify::{verify_design, Check, VerificationReport, ZReading};

/// Relative tolerance for treating `x_m` as equal to `X_IO^H` (configuration D).
pub const D_CONFIG_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error(
        "x_m = 0 selects configuration (e), which is inappropriate and is therefore excluded: \
         all current entering the primary port flows through x_m and none reaches the secondary port"
    )]
    ConfigE,
    #[error("configuration {config} is infeasible: it requires {condition}")]
    Infeasible {
        config: ConfigKind,
        condition: &'static str,
    },
    #[error("invalid filter spec: {0}")]
    InvalidSpec(String),
    #[error("synthesis gave a non-positive {element} ({value:e}); the reactance signs conflict")]
    NonPositive { element: &'static str, value: f64 },
    #[error("no inductive x_m places the high-state zero at the geometric-mean frequency")]
    NoDefaultXm,
    #[error(transparent)]
    Impedance(#[from] ImpedanceError),
}

/// The element fixing the free degree of freedom in the mutual arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum XmChoice {
    Inductance(f64),
    Capacitance(f64),
}

impl XmChoice {
    /// Signed reactance at `f_hz`; zero for a zero inductance.
    pub fn reactance(self, f_hz: f64) -> f64 {
        let w = 2.0 * PI * f_hz;
        match self {
            XmChoice::Inductance(l) => w * l,
            XmChoice::Capacitance(c) => -1.0 / (w * c),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub f_mod: f64,
    pub f_stop: f64,
    /// Pin capacitance in the high state.
    pub c_io: f64,
    /// External capacitance added across the pin; counts toward `C_H`.
    #[serde(default)]
    pub c_shunt: f64,
    /// `None` asks for the default that centres the high-state zero.
    pub xm: Option<XmChoice>,
    #[serde(default)]
    pub series: ESeries,
    #[serde(default)]
    pub snap: SnapPolicy,
}

impl FilterSpec {
    pub fn new(f_mod: f64, f_stop: f64, c_io: f64, xm: Option<XmChoice>) -> Self {
        FilterSpec {
            f_mod,
            f_stop,
            c_io,
            c_shunt: 0.0,
            xm,
            series: ESeries::E12,
            snap: SnapPolicy::Catalog,
        }
    }

    pub fn with_shunt(mut self, c_shunt: f64) -> Self {
        self.c_shunt = c_shunt;
        self
    }

    pub fn c_total(&self) -> f64 {
        self.c_io + self.c_shunt
    }

    /// `X_IO^H = 1/(ω_mod·C_H)`.
    pub fn x_io_h(&self) -> f64 {
        1.0 / (2.0 * PI * self.f_mod * self.c_total())
    }

    pub fn alpha(&self) -> f64 {
        self.f_mod / self.f_stop
    }

    fn validate(&self) -> Result<(), SynthError> {
        let pos = |v: f64| v > 0.0 && v.is_finite();
        if !pos(self.f_mod) || !pos(self.f_stop) {
            return Err(SynthError::InvalidSpec("carrier frequencies must be positive".into()));
        }
        if self.f_mod == self.f_stop {
            return Err(SynthError::InvalidSpec("f_mod and f_stop must differ".into()));
        }
        if !pos(self.c_io) {
            return Err(SynthError::InvalidSpec("c_io must be positive".into()));
        }
        if !(self.c_shunt >= 0.0 && self.c_shunt.is_finite()) {
            return Err(SynthError::InvalidSpec("c_shunt must be non-negative".into()));
        }
        match self.xm {
            Some(XmChoice::Inductance(l)) if !(l >= 0.0 && l.is_finite()) => {
                Err(SynthError::InvalidSpec("x_m inductance must be non-negative".into()))
            }
            Some(XmChoice::Capacitance(c)) if !(c > 0.0 && c.is_finite()) => Err(SynthError::InvalidSpec(
                "x_m capacitance must be positive and finite".into(),
            )),
            _ => Ok(()),
        }
    }
}

/// Minimal filter configurations; (e) exists only as [`SynthError::ConfigE`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConfigKind {
    A,
    B,
    C,
    D1,
    D2,
}

impl ConfigKind {
    /// Whether the configuration needs `f_stop > f_mod`.
    pub fn needs_stop_above(self) -> bool {
        matches!(self, ConfigKind::A | ConfigKind::C | ConfigKind::D1)
    }

    pub fn experimental(self) -> bool {
        self == ConfigKind::C
    }
}

impl fmt::Display for ConfigKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConfigKind::A => "(a)",
            ConfigKind::B => "(b)",
            ConfigKind::C => "(c)",
            ConfigKind::D1 => "(d)-1",
            ConfigKind::D2 => "(d)-2",
        })
    }
}

fn classify_xm(spec: &FilterSpec, xm: f64) -> Result<ConfigKind, SynthError> {
    let x = spec.x_io_h();
    let stop_above = spec.f_stop > spec.f_mod;
    let kind = if xm == 0.0 {
        return Err(SynthError::ConfigE);
    } else if ((xm - x) / x).abs() <= D_CONFIG_TOL {
        if stop_above {
            ConfigKind::D1
        } else {
            ConfigKind::D2
        }
    } else if xm < 0.0 {
        ConfigKind::C
    } else if xm > x {
        ConfigKind::A
    } else {
        ConfigKind::B
    };
    match (kind.needs_stop_above(), stop_above) {
        (true, false) => Err(SynthError::Infeasible {
            config: kind,
            condition: "f_stop > f_mod",
        }),
        (false, true) if matches!(kind, ConfigKind::B) => Err(SynthError::Infeasible {
            config: kind,
            condition: "f_stop < f_mod",
        }),
        _ => Ok(kind),
    }
}

/// Determines the configuration selected by the spec's `x_m`.
pub fn classify(spec: &FilterSpec) -> Result<ConfigKind, SynthError> {
    spec.validate()?;
    let xm = resolve_xm(spec)?;
    classify_xm(spec, xm.reactance(spec.f_mod))
}

/// One purchasable part of the design.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Component {
    pub name: String,
    pub kind: PartKind,
    pub exact: f64,
    pub snapped: f64,
}

/// Branch reactances at `f_mod`, in ohms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchReactances {
    pub x1: f64,
    pub xm: f64,
    pub x2: f64,
}

/// Which value column a network is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueSet {
    Exact,
    Snapped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilterDesign {
    pub spec: FilterSpec,
    pub config: ConfigKind,
    pub experimental: bool,
    pub alpha: f64,
    pub x_io_h: f64,
    pub reactances: BranchReactances,
    /// Mutual arm, tank L1 and C1, the x2 element (absent for D), and the
    /// D-configuration series trim element.
    pub components: Vec<Component>,
    /// Terminal pairs with a dc path through the bare filter; each needs a dc block.
    pub dcb: Vec<String>,
}

impl FilterDesign {
    pub fn component(&self, name: &str) -> Option<&Component> {
        self.components.iter().find(|c| c.name == name)
    }

    fn part(&self, name: &str, values: ValueSet) -> Option<Result<Network, ImpedanceError>> {
        self.component(name).map(|c| {
            let v = match values {
                ValueSet::Exact => c.exact,
                ValueSet::Snapped => c.snapped,
            };
            match c.kind {
                PartKind::Inductor => Network::inductor(v),
                PartKind::Capacitor => Network::capacitor(v),
            }
        })
    }

    /// The T-network built from the chosen value column (ideal elements).
    pub fn network(&self, values: ValueSet) -> Result<TNetwork, ImpedanceError> {
        let mut x1 = vec![Network::parallel(vec![
            self.part("L1", values).expect("L1")?,
            self.part("C1", values).expect("C1")?,
        ])];
        for trim in ["Cs", "Ls"] {
            if let Some(p) = self.part(trim, values) {
                x1.push(p?);
            }
        }
        let x1 = if x1.len() == 1 {
            x1.pop().unwrap()
        } else {
            Network::series(x1)
        };
        let xm = match self.part("Lm", values).or_else(|| self.part("Cm", values)) {
            Some(p) => p?,
            None => unreachable!("design always has a mutual arm"),
        };
        let x2 = match self.part("C2", values).or_else(|| self.part("L2", values)) {
            Some(p) => p?,
            None => Network::short(),
        };
        Ok(t_network(x1, xm, x2))
    }

    /// Input impedance at `f_hz` with the pin in `state`.
    pub fn zin(
        &self,
        f_hz: f64,
        state: Level,
        values: ValueSet,
        loss: &LossModel,
    ) -> Result<Impedance, ImpedanceError> {
        let net = self.network(values)?;
        let net = TNetwork {
            series1: loss.apply(&net.series1, f_hz),
            shunt: loss.apply(&net.shunt, f_hz),
            series2: loss.apply(&net.series2, f_hz),
        };
        let c_io = loss.c_io.unwrap_or(self.spec.c_io);
        let load = match state {
            Level::High => loss.load_high(c_io + self.spec.c_shunt, f_hz)?,
            Level::Low => loss.load_low(self.spec.c_shunt, f_hz)?,
        };
        net.input_impedance(f_hz, load)
    }
}

fn resolve_xm(spec: &FilterSpec) -> Result<XmChoice, SynthError> {
    match spec.xm {
        Some(xm) => Ok(xm),
        None => default_xm(spec),
    }
}

/// Inductive `x_m` that puts the lossless high-state zero at `√(f_mod·f_stop)`.
pub fn default_xm(spec: &FilterSpec) -> Result<XmChoice, SynthError> {
    spec.validate()?;
    let x = spec.x_io_h();
    let w = 2.0 * PI * spec.f_mod;
    let f_g = (spec.f_mod * spec.f_stop).sqrt();
    let (lo, hi) = if spec.f_stop > spec.f_mod {
        (x * (1.0 + 1e-6), x * 1e4)
    } else {
        (x * 1e-4, x * (1.0 - 1e-6))
    };
    let g = |xm: f64| -> Option<f64> {
        let mut s = spec.clone();
        s.xm = Some(XmChoice::Inductance(xm / w));
        let d = synthesize_exact(&s).ok()?;
        d.zin(f_g, Level::High, ValueSet::Exact, &LossModel::lossless())
            .ok()?
            .finite()
            .map(|z| z.im)
    };
    let n = 400;
    let grid: Vec<f64> = (0..=n)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / n as f64).exp())
        .collect();
    let vals: Vec<Option<f64>> = grid.iter().map(|&xm| g(xm)).collect();
    for i in 0..n {
        let (Some(ga), Some(gb)) = (vals[i], vals[i + 1]) else {
            continue;
        };
        if ga.signum() == gb.signum() && ga != 0.0 {
            continue;
        }
        let (mut a, mut b, mut ga) = (grid[i], grid[i + 1], ga);
        for _ in 0..200 {
            let m = (a * b).sqrt();
            if m <= a || m >= b {
                break;
            }
            let Some(gm) = g(m) else { break };
            if gm.signum() == ga.signum() && gm != 0.0 {
                a = m;
                ga = gm;
            } else {
                b = m;
            }
        }
        let root = (a * b).sqrt();
        if g(root).is_some_and(|v| v.abs() <= 1e-6 * x) {
            return Ok(XmChoice::Inductance(root / w));
        }
    }
    Err(SynthError::NoDefaultXm)
}

fn dc_paths(x1: &Network, xm: &Network, x2: &Network) -> Vec<String> {
    let (a, m, b) = (conducts_dc(x1), conducts_dc(xm), conducts_dc(x2));
    let mut out = Vec::new();
    if a && m {
        out.push("1-1'".to_string());
    }
    if b && m {
        out.push("2-2'".to_string());
    }
    if a && b {
        out.push("1-2".to_string());
    }
    out
}

fn conducts_dc(net: &Network) -> bool {
    use crate::impedance::ElementKind::*;
    match net {
        Network::Element(e) => matches!(e.kind, Resistor | Inductor | Short),
        Network::Series(items) => items.iter().all(conducts_dc),
        Network::Parallel(items) => items.iter().any(conducts_dc),
    }
}

fn positive(element: &'static str, value: f64) -> Result<f64, SynthError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(SynthError::NonPositive { element, value })
    }
}

/// Exact values only; the snapped column mirrors the exact one.
fn synthesize_exact(spec: &FilterSpec) -> Result<FilterDesign, SynthError> {
    let xm_choice = resolve_xm(spec)?;
    let xm = xm_choice.reactance(spec.f_mod);
    let config = classify_xm(spec, xm)?;
    let x = spec.x_io_h();
    let w_mod = 2.0 * PI * spec.f_mod;
    let w_stop = 2.0 * PI * spec.f_stop;
    let alpha = spec.alpha();

    let mut parts: Vec<(&'static str, PartKind, f64)> = Vec::new();
    match xm_choice {
        XmChoice::Inductance(l) => parts.push(("Lm", PartKind::Inductor, positive("Lm", l)?)),
        XmChoice::Capacitance(c) => parts.push(("Cm", PartKind::Capacitor, positive("Cm", c)?)),
    }

    let (x1, x2) = if matches!(config, ConfigKind::D1 | ConfigKind::D2) {
        // Tank resonant at f_stop whose reactance at f_mod has magnitude X,
        // cancelled by a series trim element.
        let l1 = x * (1.0 - alpha * alpha).abs() / w_mod;
        let l1 = positive("L1", l1)?;
        parts.push(("L1", PartKind::Inductor, l1));
        parts.push(("C1", PartKind::Capacitor, positive("C1", 1.0 / (w_stop * w_stop * l1))?));
        if config == ConfigKind::D1 {
            parts.push(("Cs", PartKind::Capacitor, positive("Cs", 1.0 / (w_mod * x))?));
        } else {
            parts.push(("Ls", PartKind::Inductor, positive("Ls", x / w_mod)?));
        }
        (0.0, 0.0)
    } else {
        let x2 = x - xm;
        let x1 = -(xm / x) * x2;
        let (l1, c1) = if alpha < 1.0 {
            let l1 = positive("L1", x1 * (1.0 - alpha * alpha) / (alpha * w_stop))?;
            (l1, 1.0 / (w_stop * w_stop * l1))
        } else {
            if x1 >= 0.0 {
                return Err(SynthError::NonPositive {
                    element: "C1",
                    value: -x1,
                });
            }
            let c1 = positive("C1", alpha / ((alpha * alpha - 1.0) * w_stop * x1.abs()))?;
            (1.0 / (w_stop * w_stop * c1), c1)
        };
        parts.push(("L1", PartKind::Inductor, positive("L1", l1)?));
        parts.push(("C1", PartKind::Capacitor, positive("C1", c1)?));
        if x2 < 0.0 {
            parts.push(("C2", PartKind::Capacitor, positive("C2", -1.0 / (w_mod * x2))?));
        } else if x2 > 0.0 {
            parts.push(("L2", PartKind::Inductor, positive("L2", x2 / w_mod)?));
        }
        (x1, x2)
    };

    let components: Vec<Component> = parts
        .into_iter()
        .map(|(name, kind, v)| Component {
            name: name.to_string(),
            kind,
            exact: v,
            snapped: v,
        })
        .collect();
    let mut design = FilterDesign {
        spec: FilterSpec {
            xm: Some(xm_choice),
            ..spec.clone()
        },
        config,
        experimental: config.experimental(),
        alpha,
        x_io_h: x,
        reactances: BranchReactances { x1, xm, x2 },
        components,
        dcb: Vec::new(),
    };
    let net = design.network(ValueSet::Exact)?;
    design.dcb = dc_paths(&net.series1, &net.shunt, &net.series2);
    Ok(design)
}

/// Synthesizes a design with exact values and snapped values side by side.
///
/// A user-supplied mutual-arm element is kept as given in both columns.
pub fn synthesize(spec: &FilterSpec) -> Result<FilterDesign, SynthError> {
    spec.validate()?;
    let mut design = synthesize_exact(spec)?;
    let user_xm = spec.xm.is_some();
    for c in &mut design.components {
        let keep = user_xm && (c.name == "Lm" || c.name == "Cm");
        if !keep {
            c.snapped = spec.snap.snap(c.kind, c.exact, spec.series);
        }
    }
    Ok(design)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec_a() -> FilterSpec {
        FilterSpec::new(20e6, 50e6, 8e-12, Some(XmChoice::Inductance(4.7e-6))).with_shunt(10e-12)
    }

    fn spec_b() -> FilterSpec {
        FilterSpec::new(50e6, 20e6, 8e-12, Some(XmChoice::Inductance(1.0e-6)))
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a / b - 1.0).abs() <= rel
    }

    #[test]
    fn classifies_shipped_examples() {
        assert_eq!(classify(&spec_a()).unwrap(), ConfigKind::A);
        assert_eq!(classify(&spec_b()).unwrap(), ConfigKind::B);
        assert!((spec_a().x_io_h() - 442.1).abs() < 0.1);
        assert!((spec_b().x_io_h() - 397.9).abs() < 0.1);
    }

    #[test]
    fn table_values_a() {
        let d = synthesize(&spec_a()).unwrap();
        assert!(close(d.component("L1").unwrap().exact, 1.33e-6, 0.005));
        assert!(close(d.component("C1").unwrap().exact, 7.64e-12, 0.005));
        assert!(close(d.component("C2").unwrap().exact, 53.6e-12, 0.005));
        assert_eq!(d.component("L1").unwrap().snapped, 1.2e-6);
        assert_eq!(d.component("C1").unwrap().snapped, 8e-12);
        assert_eq!(d.component("C2").unwrap().snapped, 56e-12);
        assert_eq!(d.component("Lm").unwrap().snapped, 4.7e-6);
    }

    #[test]
    fn table_values_b() {
        let d = synthesize(&spec_b()).unwrap();
        assert!(close(d.component("L1").unwrap().exact, 1.10e-6, 0.005));
        assert!(close(d.component("C1").unwrap().exact, 57.3e-12, 0.005));
        assert!(close(d.component("L2").unwrap().exact, 0.267e-6, 0.005));
        assert_eq!(d.component("L1").unwrap().snapped, 1.0e-6);
        assert_eq!(d.component("C1").unwrap().snapped, 56e-12);
        assert_eq!(d.component("L2").unwrap().snapped, 0.22e-6);
    }

    #[test]
    fn zero_xm_is_config_e() {
        let s = FilterSpec::new(20e6, 50e6, 8e-12, Some(XmChoice::Inductance(0.0)));
        assert_eq!(classify(&s), Err(SynthError::ConfigE));
        assert!(SynthError::ConfigE
            .to_string()
            .contains("is inappropriate and is therefore excluded"));
    }

    #[test]
    fn wrong_frequency_order_is_infeasible() {
        let s = FilterSpec::new(50e6, 20e6, 18e-12, Some(XmChoice::Inductance(4.7e-6)));
        assert!(matches!(
            classify(&s),
            Err(SynthError::Infeasible {
                config: ConfigKind::A,
                ..
            })
        ));
        let s = FilterSpec::new(20e6, 50e6, 8e-12, Some(XmChoice::Inductance(1.0e-6)));
        assert!(matches!(
            classify(&s),
            Err(SynthError::Infeasible {
                config: ConfigKind::B,
                ..
            })
        ));
        let s = FilterSpec::new(50e6, 20e6, 8e-12, Some(XmChoice::Capacitance(10e-12)));
        assert!(matches!(
            classify(&s),
            Err(SynthError::Infeasible {
                config: ConfigKind::C,
                ..
            })
        ));
    }

    #[test]
    fn d1_boundary() {
        let mut s = FilterSpec::new(20e6, 50e6, 8e-12, None);
        let l = s.x_io_h() / (2.0 * PI * 20e6);
        s.xm = Some(XmChoice::Inductance(l));
        assert_eq!(classify(&s).unwrap(), ConfigKind::D1);
        let d = synthesize(&s).unwrap();
        assert!(d.component("C2").is_none() && d.component("L2").is_none());
        assert!(d.component("Cs").is_some());
        let net = d.network(ValueSet::Exact).unwrap();
        let x1 = net.series1.impedance(20e6).unwrap().finite().unwrap();
        assert!(x1.norm() < 1e-9 * d.x_io_h, "{x1}");
        assert!(net.series1.impedance(50e6).unwrap().is_pole());
    }

    #[test]
    fn d2_uses_series_inductor() {
        let mut s = FilterSpec::new(50e6, 20e6, 8e-12, None);
        let l = s.x_io_h() / (2.0 * PI * 50e6);
        s.xm = Some(XmChoice::Inductance(l));
        let d = synthesize(&s).unwrap();
        assert_eq!(d.config, ConfigKind::D2);
        assert!(d.component("Ls").is_some());
    }

    #[test]
    fn config_c_is_experimental() {
        let s = FilterSpec::new(20e6, 50e6, 8e-12, Some(XmChoice::Capacitance(20e-12)));
        let d = synthesize(&s).unwrap();
        assert_eq!(d.config, ConfigKind::C);
        assert!(d.experimental);
        assert!(d.component("L2").is_some());
    }

    #[test]
    fn default_xm_centres_zero() {
        for base in [spec_a(), spec_b()] {
            let s = FilterSpec { xm: None, ..base };
            let d = synthesize(&s).unwrap();
            let f_g = (s.f_mod * s.f_stop).sqrt();
            let z = d
                .zin(f_g, Level::High, ValueSet::Exact, &LossModel::lossless())
                .unwrap();
            assert!(z.norm() < 1e-6 * d.x_io_h);
            assert!(matches!(d.spec.xm, Some(XmChoice::Inductance(_))));
        }
    }

    #[test]
    fn dc_paths_reported() {
        let d = synthesize(&spec_b()).unwrap();
        assert_eq!(d.dcb, vec!["1-1'", "2-2'", "1-2"]);
        let d = synthesize(&spec_a()).unwrap();
        assert_eq!(d.dcb, vec!["1-1'"]);
    }
}
