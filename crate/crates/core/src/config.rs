//! Text formats: filter specs, scenarios and network expressions.
//!
//! Every physical value carries its unit (`"20MHz"`, `"4.7uH"`). Files that
//! reference other files (filter designs, transaction scripts) go through a
//! caller-supplied resolver so embedded and on-disk configs share one path.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Deserialize;
use thiserror::Error;

use crate::analysis::LossModel;
use crate::i2c::{parse_script, AddressPolicy, RegisterMap, ScriptError, Slave, TEMP_SENSOR_BASE};
use crate::impedance::{ImpedanceError, Network};
use crate::modem::{ClipParams, DemodParams};
use crate::sim::{Attenuation, Carrier, Channel, Node, NodePorts, Noise, PortModel, Role, Scenario, Topology};
use crate::synth::{synthesize, ESeries, FilterSpec, SnapPolicy, SynthError, ValueSet, XmChoice};
use crate::units::{
    parse_as, parse_quantity, Decibels, Dimension, Farads, Henries, Hertz, Metres, Ohms, Seconds, Volts, VoltsPerDb,
};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{0}")]
    Toml(#[from] toml::de::Error),
    #[error("network expression `{expr}`: {reason}")]
    Network { expr: String, reason: String },
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read `{path}`: {reason}")]
    Io { path: String, reason: String },
    #[error("script `{path}`, {source}")]
    Script { path: String, source: ScriptError },
    #[error("filter `{name}`: {source}")]
    Synth { name: String, source: SynthError },
    #[error(transparent)]
    Impedance(#[from] ImpedanceError),
}

/// Loads a file referenced from inside a config.
pub type Resolver<'a> = &'a dyn Fn(&str) -> Result<String, String>;

/// Parses `series(3.3uH, 22pF, 2kOhm)`, `parallel(...)`, nested freely, or a
/// single element such as `47uH`; `open` and `short` are also accepted.
pub fn parse_network(expr: &str) -> Result<Network, ConfigError> {
    let err = |reason: String| ConfigError::Network {
        expr: expr.to_string(),
        reason,
    };
    let (net, rest) = network_term(expr.trim()).map_err(err)?;
    if !rest.trim().is_empty() {
        return Err(err(format!("unexpected trailing text `{}`", rest.trim())));
    }
    Ok(net)
}

fn network_term(s: &str) -> Result<(Network, &str), String> {
    let s = s.trim_start();
    for (kw, is_series) in [("series", true), ("parallel", false)] {
        if let Some(rest) = s.strip_prefix(kw) {
            let mut rest = rest.trim_start().strip_prefix('(').ok_or(format!("`{kw}` needs `(`"))?;
            let mut items = Vec::new();
            loop {
                let (item, r) = network_term(rest)?;
                items.push(item);
                let r = r.trim_start();
                if let Some(r) = r.strip_prefix(',') {
                    rest = r;
                } else if let Some(r) = r.strip_prefix(')') {
                    return Ok((
                        if is_series {
                            Network::series(items)
                        } else {
                            Network::parallel(items)
                        },
                        r,
                    ));
                } else {
                    return Err(format!("expected `,` or `)` in `{kw}(...)`"));
                }
            }
        }
    }
    let end = s.find([',', ')']).unwrap_or(s.len());
    let (tok, rest) = s.split_at(end);
    let tok = tok.trim();
    let net = match tok {
        "open" => Network::open(),
        "short" => Network::short(),
        _ => {
            let q = parse_quantity(tok).map_err(|e| e.to_string())?;
            match q.dim {
                Dimension::Inductance => Network::inductor(q.value),
                Dimension::Capacitance => Network::capacitor(q.value),
                Dimension::Resistance => Network::resistor(q.value),
                d => return Err(format!("`{tok}` is a {d} value, not an element")),
            }
            .map_err(|e| e.to_string())?
        }
    };
    Ok((net, rest))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    #[serde(default)]
    name: Option<String>,
    f_mod: Hertz,
    f_stop: Hertz,
    c_io: Farads,
    #[serde(default)]
    c_shunt: Option<Farads>,
    #[serde(default)]
    lm: Option<Henries>,
    #[serde(default)]
    cm: Option<Farads>,
    #[serde(default)]
    series: Option<ESeries>,
    #[serde(default)]
    snap: Option<SnapPolicy>,
}

/// A filter spec file: `f_mod`, `f_stop`, `c_io`, optional `c_shunt`, at most
/// one of `lm`/`cm`, `series` (`E6`/`E12`/`E24`) and `snap` (`catalog`/`nearest`).
pub fn parse_filter_spec(text: &str) -> Result<(Option<String>, FilterSpec), ConfigError> {
    let raw: RawSpec = toml::from_str(text)?;
    let xm = match (raw.lm, raw.cm) {
        (Some(_), Some(_)) => return Err(ConfigError::Invalid("give at most one of `lm` and `cm`".into())),
        (Some(l), None) => Some(XmChoice::Inductance(l.0)),
        (None, Some(c)) => Some(XmChoice::Capacitance(c.0)),
        (None, None) => None,
    };
    let mut spec = FilterSpec::new(raw.f_mod.0, raw.f_stop.0, raw.c_io.0, xm);
    spec.c_shunt = raw.c_shunt.map_or(0.0, |c| c.0);
    spec.series = raw.series.unwrap_or_default();
    spec.snap = raw.snap.unwrap_or_default();
    Ok((raw.name, spec))
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawLoss {
    #[serde(default)]
    lossless: bool,
    q: Option<f64>,
    q_ref: Option<Hertz>,
    r_h: Option<Ohms>,
    r_l: Option<Ohms>,
    l_l: Option<Henries>,
}

impl RawLoss {
    fn build(&self) -> Result<LossModel, ConfigError> {
        let mut m = if self.lossless {
            if self.q.is_some() {
                return Err(ConfigError::Invalid("`lossless` and `q` are mutually exclusive".into()));
            }
            LossModel::lossless()
        } else {
            LossModel::lossy()
        };
        if let Some(q) = self.q {
            m.inductor_q = Some(q);
        }
        if let Some(f) = self.q_ref {
            m.q_ref_hz = f.0;
        }
        if let Some(r) = self.r_h {
            m.r_h = Some(r.0);
        }
        if let Some(r) = self.r_l {
            m.r_l = r.0;
        }
        if let Some(l) = self.l_l {
            m.l_l = l.0;
        }
        m.validate().map_err(ConfigError::Invalid)?;
        Ok(m)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFilter {
    /// Path to a filter spec file.
    design: String,
    #[serde(default)]
    values: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFixed {
    z_h: Ohms,
    z_l: Ohms,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPorts {
    scl: Option<RawFilter>,
    sda: Option<RawFilter>,
    /// Resistive toy ports instead of filters.
    fixed: Option<RawFixed>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCarrier {
    channel: String,
    frequency: Hertz,
    v0: Volts,
    pullup: String,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawChannel {
    attenuation: Option<Decibels>,
    db_per_decade: Option<Decibels>,
    reference: Option<Metres>,
    sheet_size: Option<Metres>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawDemod {
    slope: Option<VoltsPerDb>,
    ref_in: Option<Volts>,
    hysteresis: Option<Volts>,
    lpf_time_constant: Option<Seconds>,
    clip: Option<bool>,
    v_f: Option<Volts>,
    spike: Option<Volts>,
    spike_decay: Option<Seconds>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRegister {
    width: u8,
    value: u16,
    #[serde(default = "yes")]
    writable: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNode {
    name: Option<String>,
    role: String,
    address: Option<String>,
    temperature_c: Option<f64>,
    distance: Option<Metres>,
    #[serde(default)]
    registers: BTreeMap<String, RawRegister>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    clock: Hertz,
    sim_rate: Hertz,
    #[serde(default)]
    seed: u64,
    noise_rms: Option<Volts>,
    #[serde(default)]
    strict: bool,
    script: Option<String>,
    requests: Option<String>,
    gap_bits: Option<usize>,
    lead_bits: Option<usize>,
    dc_feed: Option<String>,
    carriers: Vec<RawCarrier>,
    ports: RawPorts,
    #[serde(default)]
    loss: RawLoss,
    #[serde(default)]
    channel: RawChannel,
    #[serde(default)]
    demod: RawDemod,
    nodes: Vec<RawNode>,
}

fn number(s: &str) -> Result<u64, ConfigError> {
    let r = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(h) => u64::from_str_radix(h, 16),
        None => s.parse(),
    };
    r.map_err(|_| ConfigError::Invalid(format!("`{s}` is not a number")))
}

fn filter_port(raw: &RawFilter, loss: LossModel, resolve: Resolver) -> Result<PortModel, ConfigError> {
    let text = resolve(&raw.design).map_err(|reason| ConfigError::Io {
        path: raw.design.clone(),
        reason,
    })?;
    let (_, spec) = parse_filter_spec(&text)?;
    let design = synthesize(&spec).map_err(|source| ConfigError::Synth {
        name: raw.design.clone(),
        source,
    })?;
    let values = match raw.values.as_deref().unwrap_or("snapped") {
        "snapped" => ValueSet::Snapped,
        "exact" => ValueSet::Exact,
        other => {
            return Err(ConfigError::Invalid(format!(
                "values must be `exact` or `snapped`, got `{other}`"
            )))
        }
    };
    Ok(PortModel::Filter {
        design: Box::new(design),
        values,
        loss,
    })
}

/// Parses a scenario file. `seed` and `strict` overrides come from the caller.
pub fn parse_scenario(text: &str, resolve: Resolver) -> Result<Scenario, ConfigError> {
    let raw: RawScenario = toml::from_str(text)?;
    let loss = raw.loss.build()?;

    let ports = match (&raw.ports.fixed, &raw.ports.scl, &raw.ports.sda) {
        (Some(f), None, None) => {
            let p = PortModel::Fixed {
                z_h: Complex64::new(f.z_h.0, 0.0),
                z_l: Complex64::new(f.z_l.0, 0.0),
            };
            NodePorts { scl: p.clone(), sda: p }
        }
        (None, Some(scl), Some(sda)) => NodePorts {
            scl: filter_port(scl, loss, resolve)?,
            sda: filter_port(sda, loss, resolve)?,
        },
        _ => {
            return Err(ConfigError::Invalid(
                "[ports] needs either both `scl` and `sda` filters or a `fixed` table".into(),
            ))
        }
    };

    let carriers = raw
        .carriers
        .iter()
        .map(|c| {
            let channel = match c.channel.as_str() {
                "scl" => Channel::Scl,
                "sda" => Channel::Sda,
                other => {
                    return Err(ConfigError::Invalid(format!(
                        "carrier channel `{other}` is not scl or sda"
                    )))
                }
            };
            Ok(Carrier {
                channel,
                frequency: c.frequency.0,
                v0: c.v0.0,
                z_p: parse_network(&c.pullup)?,
            })
        })
        .collect::<Result<Vec<_>, ConfigError>>()?;

    let attenuation = match (raw.channel.attenuation, raw.channel.db_per_decade) {
        (Some(_), Some(_)) => {
            return Err(ConfigError::Invalid(
                "channel takes either `attenuation` or `db_per_decade`, not both".into(),
            ))
        }
        (Some(a), None) => Attenuation::Fixed { db: a.0 },
        (None, Some(d)) => Attenuation::LogDistance {
            db_per_decade: d.0,
            reference: raw
                .channel
                .reference
                .ok_or_else(|| ConfigError::Invalid("`db_per_decade` needs a `reference` distance".into()))?
                .0,
        },
        (None, None) => Attenuation::None,
    };

    let mut nodes = Vec::new();
    for (i, n) in raw.nodes.iter().enumerate() {
        let name = n.name.clone().unwrap_or_else(|| format!("node{i}"));
        let address = n.address.as_deref().map(number).transpose()?;
        let address = address
            .map(|a| u8::try_from(a).map_err(|_| ConfigError::Invalid(format!("{name}: address too large"))))
            .transpose()?;
        let role = match n.role.as_str() {
            "master" => Role::Master,
            "passive" => Role::Passive,
            "temp_sensor" => {
                let a = address.unwrap_or(TEMP_SENSOR_BASE);
                if !(TEMP_SENSOR_BASE..TEMP_SENSOR_BASE + 8).contains(&a) {
                    return Err(ConfigError::Invalid(format!(
                        "{name}: temperature sensors answer at 0x18..0x1F, got 0x{a:02X}"
                    )));
                }
                let mut s = Slave::temp_sensor(a - TEMP_SENSOR_BASE, n.temperature_c.unwrap_or(25.0));
                for (p, r) in &n.registers {
                    s.registers.define(number(p)? as u8, r.width, r.value, r.writable);
                }
                Role::Slave(Box::new(s))
            }
            "registers" => {
                let a = address.ok_or_else(|| ConfigError::Invalid(format!("{name}: `address` is required")))?;
                let mut map = RegisterMap::new();
                for (p, r) in &n.registers {
                    if r.width != 1 && r.width != 2 {
                        return Err(ConfigError::Invalid(format!("{name}: register width must be 1 or 2")));
                    }
                    map.define(number(p)? as u8, r.width, r.value, r.writable);
                }
                Role::Slave(Box::new(Slave::new(a, map)))
            }
            other => {
                return Err(ConfigError::Invalid(format!(
                    "{name}: role `{other}` is not master, temp_sensor, registers or passive"
                )))
            }
        };
        if let (Role::Slave(s), Some(_)) = (&role, address) {
            AddressPolicy::default()
                .check(s.address)
                .map_err(|e| ConfigError::Invalid(format!("{name}: {e}")))?;
        }
        nodes.push(Node {
            name,
            role,
            ports: ports.clone(),
            distance: n.distance.map_or(0.0, |d| d.0),
        });
    }

    let (script_name, script) = match (&raw.script, &raw.requests) {
        (Some(path), None) => (
            path.clone(),
            resolve(path).map_err(|reason| ConfigError::Io {
                path: path.clone(),
                reason,
            })?,
        ),
        (None, Some(inline)) => ("<inline>".to_string(), inline.clone()),
        _ => {
            return Err(ConfigError::Invalid(
                "give exactly one of `script` and `requests`".into(),
            ))
        }
    };
    let requests = parse_script(&script, &AddressPolicy::default()).map_err(|source| ConfigError::Script {
        path: script_name,
        source,
    })?;

    let topology = Topology {
        carriers,
        dc_feed: raw.dc_feed.as_deref().map(parse_network).transpose()?,
        nodes,
        attenuation,
        sheet_size: raw.channel.sheet_size.map(|m| m.0),
        pole_cap: loss.pole_cap,
    };

    let mut sc = Scenario::new(topology, requests, raw.clock.0, raw.sim_rate.0);
    sc.strict = raw.strict;
    if let Some(g) = raw.gap_bits {
        sc.gap_bits = g;
    }
    if let Some(l) = raw.lead_bits {
        sc.lead_bits = l;
    }
    let rms = raw.noise_rms.map_or(0.0, |v| v.0);
    if rms < 0.0 {
        return Err(ConfigError::Invalid("noise_rms must be non-negative".into()));
    }
    sc.noise = Some(Noise { seed: raw.seed, rms });
    let mut d: DemodParams = sc.demod;
    let r = &raw.demod;
    if let Some(v) = r.slope {
        d.detector.slope = v.0;
    }
    if let Some(v) = r.ref_in {
        d.detector.ref_in = v.0;
    }
    if let Some(v) = r.hysteresis {
        d.slicer.hysteresis = v.0;
    }
    if let Some(v) = r.lpf_time_constant {
        d.slicer.lpf_time_constant = v.0;
    }
    let c: &mut ClipParams = &mut d.clip;
    if let Some(v) = r.clip {
        c.enabled = v;
    }
    if let Some(v) = r.v_f {
        c.v_f = v.0;
    }
    if let Some(v) = r.spike {
        c.spike_amplitude = v.0;
    }
    if let Some(v) = r.spike_decay {
        c.spike_decay = v.0;
    }
    d.validate().map_err(ConfigError::Invalid)?;
    sc.demod = d;
    Ok(sc)
}

/// Parses a bare quantity of the given dimension; for command-line values.
pub fn quantity(text: &str, dim: Dimension) -> Result<f64, ConfigError> {
    parse_as(text, dim).map_err(|e| ConfigError::Invalid(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::ConfigKind;

    #[test]
    fn network_expressions() {
        let n = parse_network("series(3.3uH, 22pF, 2kOhm)").unwrap();
        assert_eq!(n.to_string(), "series(3.3uH, 22pF, 2kOhm)");
        let z = n.impedance(20e6).unwrap().finite().unwrap();
        let w = 2.0 * std::f64::consts::PI * 20e6;
        assert!((z.re - 2e3).abs() < 1e-9);
        assert!((z.im - (w * 3.3e-6 - 1.0 / (w * 22e-12))).abs() < 1e-6);
        let p = parse_network("parallel(series(1uH, 1Ohm), 10pF)").unwrap();
        assert!(matches!(p, Network::Parallel(_)));
        assert!(parse_network("47uH").is_ok());
        assert!(parse_network("series(1uH, 20MHz)").is_err());
        assert!(parse_network("series(1uH").is_err());
        assert!(parse_network("4.7").is_err());
    }

    #[test]
    fn filter_spec_files() {
        let (name, s) = parse_filter_spec(
            "name = \"a\"\nf_mod = \"20MHz\"\nf_stop = \"50MHz\"\nc_io = \"8pF\"\nc_shunt = \"10pF\"\nlm = \"4.7uH\"\n",
        )
        .unwrap();
        assert_eq!(name.as_deref(), Some("a"));
        assert_eq!(synthesize(&s).unwrap().config, ConfigKind::A);
        let e = parse_filter_spec("f_mod = \"20\"\nf_stop = \"50MHz\"\nc_io = \"8pF\"\n").unwrap_err();
        assert!(e.to_string().contains("no unit suffix"), "{e}");
        let e = parse_filter_spec("f_mod = \"20MHz\"\nf_stop = \"50MHz\"\nc_io = \"8uH\"\n").unwrap_err();
        assert!(e.to_string().contains("expected F"), "{e}");
        assert!(parse_filter_spec(
            "f_mod = \"20MHz\"\nf_stop = \"50MHz\"\nc_io = \"8pF\"\nlm = \"1uH\"\ncm = \"1pF\"\n"
        )
        .is_err());
    }
}
