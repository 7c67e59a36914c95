use num_complex::Complex64;
use serde::Serialize;

use super::SimError;
use crate::analysis::LossModel;
use crate::i2c::Slave;
use crate::impedance::{Impedance, Network};
use crate::synth::{FilterDesign, ValueSet};
use crate::Level;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Scl,
    Sda,
}

/// A carrier fed onto the line through its pull-up network.
#[derive(Debug, Clone)]
pub struct Carrier {
    pub channel: Channel,
    pub frequency: f64,
    /// Source amplitude.
    pub v0: f64,
    pub z_p: Network,
}

/// How a node port loads the line.
#[derive(Debug, Clone)]
pub enum PortModel {
    /// A synthesized filter terminated by the pin.
    Filter {
        design: Box<FilterDesign>,
        values: ValueSet,
        loss: LossModel,
    },
    /// Frequency-independent toy port: `z_h`/`z_l` at its own channel's
    /// carrier and open at every other carrier.
    Fixed { z_h: Complex64, z_l: Complex64 },
}

impl PortModel {
    pub fn zin(&self, own: Channel, carrier: &Carrier, state: Level) -> Result<Impedance, SimError> {
        match self {
            PortModel::Filter { design, values, loss } => Ok(design.zin(carrier.frequency, state, *values, loss)?),
            PortModel::Fixed { z_h, z_l } => {
                if carrier.channel != own {
                    return Ok(Impedance::Pole);
                }
                Ok(Impedance::Finite(if state.is_high() { *z_h } else { *z_l }))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct NodePorts {
    pub scl: PortModel,
    pub sda: PortModel,
}

#[derive(Debug, Clone)]
pub enum Role {
    Master,
    Slave(Box<Slave>),
    /// A load that never drives; stands in for an unaddressed node.
    Passive,
}

#[derive(Debug, Clone)]
pub struct Node {
    pub name: String,
    pub role: Role,
    pub ports: NodePorts,
    /// Distance from the feed point, used by the log-distance channel.
    pub distance: f64,
}

/// Loss between the line and a node's detector input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum Attenuation {
    None,
    Fixed {
        db: f64,
    },
    /// `db_per_decade · log10(distance / reference)`, zero inside `reference`.
    LogDistance {
        db_per_decade: f64,
        reference: f64,
    },
}

impl Attenuation {
    pub fn db(&self, distance: f64) -> f64 {
        match *self {
            Attenuation::None => 0.0,
            Attenuation::Fixed { db } => db,
            Attenuation::LogDistance {
                db_per_decade,
                reference,
            } => {
                if distance > reference {
                    db_per_decade * (distance / reference).log10()
                } else {
                    0.0
                }
            }
        }
    }

    pub fn gain(&self, distance: f64) -> f64 {
        10f64.powf(-self.db(distance) / 20.0)
    }
}

#[derive(Debug, Clone)]
pub struct Topology {
    pub carriers: Vec<Carrier>,
    /// DC feed choke, an RF shunt on the line.
    pub dc_feed: Option<Network>,
    pub nodes: Vec<Node>,
    pub attenuation: Attenuation,
    /// Largest dimension of the conductive sheet.
    pub sheet_size: Option<f64>,
    /// Finite stand-in when every load on the line is open.
    pub pole_cap: f64,
}

/// Sum of admittances with exact shorts counted separately.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub(crate) struct Admittance {
    pub y: Complex64,
    pub shorts: u32,
}

impl Admittance {
    pub fn of(z: Impedance) -> Self {
        match z {
            Impedance::Pole => Admittance::default(),
            Impedance::Finite(z) if z.norm() == 0.0 => Admittance {
                y: Complex64::new(0.0, 0.0),
                shorts: 1,
            },
            Impedance::Finite(z) => Admittance { y: z.inv(), shorts: 0 },
        }
    }

    pub fn add(self, o: Admittance) -> Self {
        Admittance {
            y: self.y + o.y,
            shorts: self.shorts + o.shorts,
        }
    }

    pub fn impedance(self, pole_cap: f64) -> Impedance {
        if self.shorts > 0 {
            Impedance::ZERO
        } else if self.y.norm() == 0.0 {
            Impedance::resistive(pole_cap)
        } else {
            Impedance::Finite(self.y.inv())
        }
    }
}

/// `V0·|Z_j/(Z_P + Z_j)|`.
pub(crate) fn divider(v0: f64, z_p: Complex64, z_j: Impedance) -> f64 {
    match z_j {
        Impedance::Finite(z) if z.norm() == 0.0 => 0.0,
        Impedance::Finite(z) => v0 * (z / (z_p + z)).norm(),
        Impedance::Pole => v0,
    }
}

/// Precomputed per-carrier admittances for fast stepping.
#[derive(Debug, Clone)]
pub(crate) struct LineTables {
    pub z_p: Vec<Complex64>,
    /// Loads that never change: dc feed, other carriers' pull-ups, passive nodes.
    pub fixed: Vec<Admittance>,
    /// `[node][carrier][scl state][sda state]`, 0 = high, 1 = low, for driving nodes.
    pub ports: Vec<Vec<[[Admittance; 2]; 2]>>,
    /// Indices into `Topology::nodes` of the driving nodes.
    pub active: Vec<usize>,
}

fn state(i: usize) -> Level {
    if i == 0 {
        Level::High
    } else {
        Level::Low
    }
}

impl Topology {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.nodes.is_empty() {
            return Err(SimError::Topology("the bus needs at least one node".into()));
        }
        let masters = self.nodes.iter().filter(|n| matches!(n.role, Role::Master)).count();
        if masters != 1 {
            return Err(SimError::Topology(format!(
                "exactly one master is required, found {masters}"
            )));
        }
        for ch in [Channel::Scl, Channel::Sda] {
            let n = self.carriers.iter().filter(|c| c.channel == ch).count();
            if n != 1 {
                return Err(SimError::Topology(format!(
                    "exactly one {ch:?} carrier is required, found {n}"
                )));
            }
        }
        for c in &self.carriers {
            if !(c.frequency > 0.0 && c.v0 > 0.0) {
                return Err(SimError::Topology(
                    "carrier frequency and amplitude must be positive".into(),
                ));
            }
            if c.z_p.impedance(c.frequency)?.is_pole() {
                return Err(SimError::Topology(format!(
                    "pull-up of the {:.3} MHz carrier is open at its own frequency",
                    c.frequency / 1e6
                )));
            }
        }
        if !(self.pole_cap > 0.0) {
            return Err(SimError::Topology("pole cap must be positive".into()));
        }
        Ok(())
    }

    pub fn carrier_index(&self, ch: Channel) -> usize {
        self.carriers
            .iter()
            .position(|c| c.channel == ch)
            .expect("validated topology")
    }

    fn shunts(&self, k: usize) -> Result<Admittance, SimError> {
        let f = self.carriers[k].frequency;
        let mut a = Admittance::default();
        if let Some(rfc) = &self.dc_feed {
            a = a.add(Admittance::of(rfc.impedance(f)?));
        }
        // Every other source is an RF ground behind its own pull-up.
        for (j, c) in self.carriers.iter().enumerate() {
            if j != k {
                a = a.add(Admittance::of(c.z_p.impedance(f)?));
            }
        }
        Ok(a)
    }

    fn port_admittance(&self, node: &Node, k: usize, scl: Level, sda: Level) -> Result<Admittance, SimError> {
        let c = &self.carriers[k];
        Ok(
            Admittance::of(node.ports.scl.zin(Channel::Scl, c, scl)?).add(Admittance::of(node.ports.sda.zin(
                Channel::Sda,
                c,
                sda,
            )?)),
        )
    }

    pub(crate) fn tables(&self) -> Result<LineTables, SimError> {
        self.validate()?;
        let mut t = LineTables {
            z_p: Vec::new(),
            fixed: Vec::new(),
            ports: Vec::new(),
            active: Vec::new(),
        };
        for (k, c) in self.carriers.iter().enumerate() {
            t.z_p.push(c.z_p.impedance(c.frequency)?.finite().expect("validated"));
            t.fixed.push(self.shunts(k)?);
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if matches!(node.role, Role::Passive) {
                for k in 0..self.carriers.len() {
                    t.fixed[k] = t.fixed[k].add(self.port_admittance(node, k, Level::High, Level::High)?);
                }
                continue;
            }
            let mut per = Vec::new();
            for k in 0..self.carriers.len() {
                let mut m = [[Admittance::default(); 2]; 2];
                for (a, row) in m.iter_mut().enumerate() {
                    for (b, cell) in row.iter_mut().enumerate() {
                        *cell = self.port_admittance(node, k, state(a), state(b))?;
                    }
                }
                per.push(m);
            }
            t.ports.push(per);
            t.active.push(i);
        }
        Ok(t)
    }

    /// Joint line impedance at carrier `k` with node `i` in `states[i]`
    /// (SCL pin, SDA pin).
    pub fn joint_impedance(&self, states: &[(Level, Level)], k: usize) -> Result<Impedance, SimError> {
        self.validate()?;
        if states.len() != self.nodes.len() {
            return Err(SimError::Topology("one state pair per node is required".into()));
        }
        let mut a = self.shunts(k)?;
        for (node, &(scl, sda)) in self.nodes.iter().zip(states) {
            a = a.add(self.port_admittance(node, k, scl, sda)?);
        }
        Ok(a.impedance(self.pole_cap))
    }
}

/// Carrier amplitude on the line for the given pin states, before any
/// channel attenuation.
pub fn bus_amplitude(top: &Topology, states: &[(Level, Level)], carrier: usize) -> Result<f64, SimError> {
    let zj = top.joint_impedance(states, carrier)?;
    let c = &top.carriers[carrier];
    let zp = c.z_p.impedance(c.frequency)?.finite().expect("validated");
    Ok(divider(c.v0, zp, zj))
}
