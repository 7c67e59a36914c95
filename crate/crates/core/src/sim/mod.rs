//! Sample-stepped link simulation: I²C state machines drive filter loads,
//! the joint line impedance sets both carrier amplitudes, and every node
//! recovers the bus through its own demodulators.

mod sweep;
mod topology;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;
use thiserror::Error;

use crate::analysis::SCHEMA_VERSION;
use crate::i2c::{
    AddressPolicy, BusNode, Drive, I2cError, IdealBus, Master, MasterTiming, Request, Slave, Transaction,
};
use crate::impedance::ImpedanceError;
use crate::modem::{separation_warnings, DemodParams, Demodulator, LogicTimeline};
use crate::Level;

pub use sweep::{sweep_node_count, NodeSweep, NodeSweepRow};
pub use topology::{bus_amplitude, Attenuation, Carrier, Channel, Node, NodePorts, PortModel, Role, Topology};

use topology::divider;

const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("topology: {0}")]
    Topology(String),
    #[error(transparent)]
    Impedance(#[from] ImpedanceError),
    #[error(transparent)]
    I2c(#[from] I2cError),
    #[error("sample rate: {0}")]
    Rate(String),
    #[error("demodulator: {0}")]
    Demod(String),
    #[error("strict mode: {}", .0.join("; "))]
    Strict(Vec<String>),
}

/// Gaussian noise added to the carrier envelope at each detector input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Noise {
    pub seed: u64,
    pub rms: f64,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub topology: Topology,
    pub requests: Vec<Request>,
    pub clock_hz: f64,
    pub sim_rate: f64,
    pub noise: Option<Noise>,
    pub demod: DemodParams,
    /// Idle bit periods after each STOP.
    pub gap_bits: usize,
    /// Idle bit periods before the first START.
    pub lead_bits: usize,
    pub strict: bool,
    pub record_traces: bool,
}

impl Scenario {
    pub fn new(topology: Topology, requests: Vec<Request>, clock_hz: f64, sim_rate: f64) -> Self {
        Scenario {
            topology,
            requests,
            clock_hz,
            sim_rate,
            noise: None,
            demod: DemodParams::for_bit_period(1.0 / clock_hz),
            gap_bits: 2,
            lead_bits: 2,
            strict: false,
            record_traces: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelMetrics {
    /// Slicer decisions, over all nodes, that disagree with the wired-AND level.
    pub bit_errors: u64,
    pub bits_compared: u64,
    pub ber: f64,
    /// Worst vertical eye over all nodes: lowest detector output at a high
    /// sample minus highest at a low sample.
    pub eye_margin_v: Option<f64>,
    /// Worst-case noiseless line depth over the sampling instants.
    pub depth_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkMetrics {
    pub schema_version: u32,
    pub scl: ChannelMetrics,
    pub sda: ChannelMetrics,
    pub transactions_attempted: usize,
    pub transactions_succeeded: usize,
    pub success_rate: f64,
    pub samples: usize,
    pub warnings: Vec<String>,
}

impl LinkMetrics {
    pub fn bit_errors(&self) -> u64 {
        self.scl.bit_errors + self.sda.bit_errors
    }
}

/// Line-level record of a run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Traces {
    pub sample_rate: f64,
    pub scl_amplitude: Vec<f64>,
    pub sda_amplitude: Vec<f64>,
    pub scl: Vec<Level>,
    pub sda: Vec<Level>,
}

#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub metrics: LinkMetrics,
    pub decoded: Vec<Transaction>,
    /// The same script on a noiseless wired-AND bus.
    pub reference: Vec<Transaction>,
    pub traces: Option<Traces>,
}

/// Static validity warnings for a topology at a given clock.
pub fn topology_warnings(top: &Topology, clock_hz: f64) -> Vec<String> {
    let mut w = Vec::new();
    let freqs: Vec<f64> = top.carriers.iter().map(|c| c.frequency).collect();
    for (i, &a) in freqs.iter().enumerate() {
        for &b in &freqs[i + 1..] {
            let r = a.max(b) / a.min(b);
            if (r - r.round()).abs() < 1e-6 {
                w.push(format!(
                    "carriers {:.3} MHz and {:.3} MHz are integer multiples; harmonics will land on the other channel",
                    a.min(b) / 1e6,
                    a.max(b) / 1e6
                ));
            }
        }
    }
    w.extend(separation_warnings(clock_hz, &freqs));
    if let Some(size) = top.sheet_size {
        for &f in &freqs {
            let limit = SPEED_OF_LIGHT / f / 20.0;
            if limit < size {
                w.push(format!(
                    "sheet size {size} m exceeds lambda/20 = {limit:.3} m at {:.3} MHz; standing waves are not modelled",
                    f / 1e6
                ));
            }
        }
    }
    w
}

struct Track {
    errors: u64,
    compared: u64,
    eye: Option<f64>,
    min_h: Vec<f64>,
    max_l: Vec<f64>,
    amp_h: f64,
    amp_l: f64,
}

impl Track {
    fn new(nodes: usize) -> Self {
        Track {
            errors: 0,
            compared: 0,
            eye: None,
            min_h: vec![f64::INFINITY; nodes],
            max_l: vec![f64::NEG_INFINITY; nodes],
            amp_h: f64::INFINITY,
            amp_l: f64::NEG_INFINITY,
        }
    }

    fn finish(mut self) -> ChannelMetrics {
        for (h, l) in self.min_h.iter().zip(&self.max_l) {
            if h.is_finite() && l.is_finite() {
                let e = h - l;
                self.eye = Some(self.eye.map_or(e, |x: f64| x.min(e)));
            }
        }
        let depth =
            (self.amp_h.is_finite() && self.amp_l.is_finite()).then(|| 20.0 * (self.amp_h / self.amp_l).log10());
        ChannelMetrics {
            bit_errors: self.errors,
            bits_compared: self.compared,
            ber: if self.compared == 0 {
                0.0
            } else {
                self.errors as f64 / self.compared as f64
            },
            eye_margin_v: self.eye,
            depth_db: depth,
        }
    }
}

#[allow(clippy::large_enum_variant)] // one master per bus
enum Logic {
    Master(Master),
    Slave(Box<Slave>),
}

impl Logic {
    fn drive(&self) -> (Drive, Drive) {
        match self {
            Logic::Master(m) => m.drive(),
            Logic::Slave(s) => s.drive(),
        }
    }

    fn tick(&mut self, scl: Level, sda: Level) {
        match self {
            Logic::Master(m) => m.tick(scl, sda),
            Logic::Slave(s) => s.tick(scl, sda),
        }
    }
}

fn idx(l: Level) -> usize {
    if l.is_high() {
        0
    } else {
        1
    }
}

/// Runs a scenario to completion.
pub fn run_scenario(sc: &Scenario) -> Result<ScenarioOutcome, SimError> {
    let top = &sc.topology;
    let tables = top.tables()?;
    LogicTimeline::check_rate(sc.sim_rate, sc.clock_hz).map_err(SimError::Rate)?;
    sc.demod.validate().map_err(SimError::Demod)?;
    let timing = MasterTiming::new(sc.clock_hz, sc.sim_rate, sc.gap_bits)?;
    let policy = AddressPolicy::default();
    for r in &sc.requests {
        r.validate(&policy)?;
    }
    let mut warnings = topology_warnings(top, sc.clock_hz);
    if sc.strict && !warnings.is_empty() {
        return Err(SimError::Strict(warnings));
    }

    // Reference run on an ideal bus.
    let slaves: Vec<Slave> = top
        .nodes
        .iter()
        .filter_map(|n| match &n.role {
            Role::Slave(s) => Some((**s).clone()),
            _ => None,
        })
        .collect();
    let mut ideal_master = Master::new(timing, policy.clone());
    for r in &sc.requests {
        ideal_master.submit(r.clone())?;
    }
    let mut ideal = IdealBus::new(ideal_master, slaves);
    ideal.run_to_idle();
    let reference = ideal.master.results().to_vec();

    let mut master = Master::new(timing, policy);
    for r in &sc.requests {
        master.submit(r.clone())?;
    }
    let mut master = Some(master);
    let mut logic: Vec<Logic> = tables
        .active
        .iter()
        .map(|&i| match &top.nodes[i].role {
            Role::Master => Logic::Master(master.take().expect("one master")),
            Role::Slave(s) => Logic::Slave(s.clone()),
            Role::Passive => unreachable!(),
        })
        .collect();
    let master_at = logic
        .iter()
        .position(|l| matches!(l, Logic::Master(_)))
        .expect("one master");
    let gains: Vec<f64> = tables
        .active
        .iter()
        .map(|&i| top.attenuation.gain(top.nodes[i].distance))
        .collect();
    let mut demods: Vec<[Demodulator; 2]> = (0..logic.len())
        .map(|_| {
            [
                Demodulator::new(sc.demod, sc.sim_rate),
                Demodulator::new(sc.demod, sc.sim_rate),
            ]
        })
        .collect();

    let kc = [top.carrier_index(Channel::Scl), top.carrier_index(Channel::Sda)];
    let v0 = [top.carriers[kc[0]].v0, top.carriers[kc[1]].v0];
    let mut rng = ChaCha8Rng::seed_from_u64(sc.noise.map_or(0, |n| n.seed));
    let normal = match sc.noise {
        Some(n) if n.rms > 0.0 => Some(Normal::new(0.0, n.rms).map_err(|e| SimError::Topology(e.to_string()))?),
        _ => None,
    };

    let t = timing.samples_per_bit;
    let lead = sc.lead_bits * t;
    let (scl_at, scl_at2, sda_at) = (t / 8, 5 * t / 8, 5 * t / 8);
    let mut tracks = [Track::new(logic.len()), Track::new(logic.len())];
    let mut traces = sc.record_traces.then(|| Traces {
        sample_rate: sc.sim_rate,
        ..Traces::default()
    });
    let mut over_v0 = [false; 2];
    let mut drives = vec![(Drive::Release, Drive::Release); logic.len()];
    let mut step = 0usize;
    loop {
        let phase = if step < lead {
            Some(usize::MAX)
        } else {
            match &logic[master_at] {
                Logic::Master(m) => m.phase(),
                Logic::Slave(_) => unreachable!(),
            }
        };
        let Some(phase) = phase else { break };
        for (d, l) in drives.iter_mut().zip(&logic) {
            *d = l.drive();
        }
        if step < lead {
            drives[master_at] = (Drive::Release, Drive::Release);
        }
        let truth = [
            crate::i2c::resolve_bus(drives.iter().map(|d| d.0)),
            crate::i2c::resolve_bus(drives.iter().map(|d| d.1)),
        ];
        let mut amp = [0.0; 2];
        for ch in 0..2 {
            let k = kc[ch];
            let mut a = tables.fixed[k];
            for (node, d) in drives.iter().enumerate() {
                a = a.add(tables.ports[node][k][idx(d.0.level())][idx(d.1.level())]);
            }
            amp[ch] = divider(v0[ch], tables.z_p[k], a.impedance(top.pole_cap));
            if amp[ch] > v0[ch] * (1.0 + 1e-9) && !over_v0[ch] {
                over_v0[ch] = true;
                warnings.push(format!(
                    "{} carrier amplitude {:.4} V exceeds its source amplitude {:.4} V; the pull-up resonates with the line",
                    if ch == 0 { "SCL" } else { "SDA" },
                    amp[ch],
                    v0[ch]
                ));
            }
        }
        if let Some(tr) = traces.as_mut() {
            tr.scl_amplitude.push(amp[0]);
            tr.sda_amplitude.push(amp[1]);
            tr.scl.push(truth[0]);
            tr.sda.push(truth[1]);
        }
        let sample_ch = [phase == scl_at || phase == scl_at2, phase == sda_at];
        for ch in 0..2 {
            if sample_ch[ch] {
                let tr = &mut tracks[ch];
                if truth[ch].is_high() {
                    tr.amp_h = tr.amp_h.min(amp[ch]);
                } else {
                    tr.amp_l = tr.amp_l.max(amp[ch]);
                }
            }
        }
        for (n, node) in logic.iter_mut().enumerate() {
            let mut pins = [Level::High; 2];
            for ch in 0..2 {
                let mut a = amp[ch] * gains[n];
                if let Some(dist) = &normal {
                    a = (a + dist.sample(&mut rng)).max(0.0);
                }
                let own = if ch == 0 { drives[n].0 } else { drives[n].1 };
                let s = demods[n][ch].step(a, own.pulls());
                pins[ch] = s.pin;
                if sample_ch[ch] {
                    let tr = &mut tracks[ch];
                    tr.compared += 1;
                    if s.slicer != truth[ch] {
                        tr.errors += 1;
                    }
                    if truth[ch].is_high() {
                        tr.min_h[n] = tr.min_h[n].min(s.detector);
                    } else {
                        tr.max_l[n] = tr.max_l[n].max(s.detector);
                    }
                }
            }
            if step >= lead || n != master_at {
                node.tick(pins[0], pins[1]);
            }
        }
        step += 1;
    }

    let decoded = match &logic[master_at] {
        Logic::Master(m) => m.results().to_vec(),
        Logic::Slave(_) => unreachable!(),
    };
    let succeeded = decoded.iter().zip(&reference).filter(|(d, r)| d == r).count();
    if sc.strict && !warnings.is_empty() {
        return Err(SimError::Strict(warnings));
    }
    let [scl, sda] = tracks;
    let attempted = sc.requests.len();
    Ok(ScenarioOutcome {
        metrics: LinkMetrics {
            schema_version: SCHEMA_VERSION,
            scl: scl.finish(),
            sda: sda.finish(),
            transactions_attempted: attempted,
            transactions_succeeded: succeeded,
            success_rate: if attempted == 0 {
                1.0
            } else {
                succeeded as f64 / attempted as f64
            },
            samples: step,
            warnings,
        },
        decoded,
        reference,
        traces,
    })
}
