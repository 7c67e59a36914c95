//! Bit-level I²C master and slave state machines over an open-drain bus.
//!
//! Every node is advanced one sample at a time: it first states what it
//! drives on SCL and SDA, then observes the levels it perceives. On an ideal
//! bus the perceived levels are the wired-AND of all drivers; in the link
//! simulator they come from each node's demodulator.

mod master;
mod script;
mod slave;

use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::modem::LogicTimeline;
use crate::Level;

pub use master::{Master, MasterTiming};
pub use script::{parse_script, ScriptError};
pub use slave::{RegisterMap, Slave, TempSensor, TEMP_SENSOR_BASE};

/// Fast-mode limit.
pub const MAX_CLOCK_HZ: f64 = 400e3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum I2cError {
    #[error("SCL clock {0} Hz exceeds the 400 kHz fast-mode limit")]
    ClockTooFast(f64),
    #[error("clock must be positive, got {0} Hz")]
    BadClock(f64),
    #[error("sample rate {rate} Hz gives {samples} samples per bit; at least 8 are needed")]
    TooFewSamples { rate: f64, samples: usize },
    #[error("address 0x{0:02X} is reserved")]
    ReservedAddress(u8),
    #[error("address 0x{0:02X} does not fit in 7 bits")]
    AddressOutOfRange(u8),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
}

/// What one node does to a line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Drive {
    Release,
    PullLow,
}

impl Drive {
    pub fn level(self) -> Level {
        match self {
            Drive::Release => Level::High,
            Drive::PullLow => Level::Low,
        }
    }

    pub fn pulls(self) -> bool {
        self == Drive::PullLow
    }
}

/// Wired-AND: low if anyone pulls low, else held high by the pull-up.
pub fn resolve_bus<I: IntoIterator<Item = Drive>>(drivers: I) -> Level {
    if drivers.into_iter().any(Drive::pulls) {
        Level::Low
    } else {
        Level::High
    }
}

/// Addresses a master refuses to use.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AddressPolicy {
    pub reserved: Vec<RangeInclusive<u8>>,
}

impl Default for AddressPolicy {
    fn default() -> Self {
        AddressPolicy {
            reserved: vec![0x00..=0x07, 0x78..=0x7F],
        }
    }
}

impl AddressPolicy {
    pub fn check(&self, address: u8) -> Result<(), I2cError> {
        if address > 0x7F {
            return Err(I2cError::AddressOutOfRange(address));
        }
        if self.reserved.iter().any(|r| r.contains(&address)) {
            return Err(I2cError::ReservedAddress(address));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Write,
    Read,
    WriteRead,
}

/// A transfer the master is asked to perform.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Request {
    Write {
        address: u8,
        bytes: Vec<u8>,
    },
    Read {
        address: u8,
        count: usize,
    },
    /// Write, repeated START, then read.
    WriteRead {
        address: u8,
        bytes: Vec<u8>,
        count: usize,
    },
}

impl Request {
    pub fn address(&self) -> u8 {
        match self {
            Request::Write { address, .. } | Request::Read { address, .. } | Request::WriteRead { address, .. } => {
                *address
            }
        }
    }

    pub fn direction(&self) -> Direction {
        match self {
            Request::Write { .. } => Direction::Write,
            Request::Read { .. } => Direction::Read,
            Request::WriteRead { .. } => Direction::WriteRead,
        }
    }

    pub fn validate(&self, policy: &AddressPolicy) -> Result<(), I2cError> {
        policy.check(self.address())?;
        match self {
            Request::Read { count: 0, .. } | Request::WriteRead { count: 0, .. } => {
                Err(I2cError::InvalidRequest("a read must fetch at least one byte".into()))
            }
            Request::WriteRead { bytes, .. } if bytes.is_empty() => Err(I2cError::InvalidRequest(
                "a write-read needs at least one byte before the repeated start".into(),
            )),
            _ => Ok(()),
        }
    }
}

/// The observed outcome of one request.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Transaction {
    pub address: u8,
    pub direction: Direction,
    /// Bytes the master sent after the address.
    pub written: Vec<u8>,
    /// Bytes the master received.
    pub read: Vec<u8>,
    /// Slave acknowledgements, one per address or data byte the master sent.
    pub acks: Vec<bool>,
    pub completed: bool,
}

/// A participant on the two-line bus.
pub trait BusNode {
    /// Drives for the current sample.
    fn drive(&self) -> (Drive, Drive);
    /// Observes the perceived line levels and advances one sample.
    fn tick(&mut self, scl: Level, sda: Level);
}

/// A master and slaves on a noiseless wired-AND bus.
pub struct IdealBus {
    pub master: Master,
    pub slaves: Vec<Slave>,
    pub scl: Vec<Level>,
    pub sda: Vec<Level>,
    record: bool,
}

impl IdealBus {
    pub fn new(master: Master, slaves: Vec<Slave>) -> Self {
        IdealBus {
            master,
            slaves,
            scl: Vec::new(),
            sda: Vec::new(),
            record: false,
        }
    }

    pub fn recording(mut self) -> Self {
        self.record = true;
        self
    }

    pub fn step(&mut self) {
        let (mscl, msda) = self.master.drive();
        let mut scl = mscl.level();
        let mut sda = msda.level();
        for s in &self.slaves {
            let (c, d) = s.drive();
            if c.pulls() {
                scl = Level::Low;
            }
            if d.pulls() {
                sda = Level::Low;
            }
        }
        self.master.tick(scl, sda);
        for s in &mut self.slaves {
            s.tick(scl, sda);
        }
        if self.record {
            self.scl.push(scl);
            self.sda.push(sda);
        }
    }

    /// Steps until the master has nothing left to do.
    pub fn run_to_idle(&mut self) {
        while !self.master.is_idle() {
            self.step();
        }
    }
}

/// Runs one request on an ideal bus and returns the line timelines and result.
pub fn master_run(
    request: &Request,
    clock_hz: f64,
    sample_rate: f64,
    slaves: Vec<Slave>,
) -> Result<(LogicTimeline, LogicTimeline, Transaction, Vec<Slave>), I2cError> {
    let timing = MasterTiming::new(clock_hz, sample_rate, 0)?;
    let mut master = Master::new(timing, AddressPolicy::default());
    master.submit(request.clone())?;
    let mut bus = IdealBus::new(master, slaves).recording();
    bus.run_to_idle();
    let result = bus.master.results().last().cloned().expect("one result");
    Ok((
        LogicTimeline::new(sample_rate, bus.scl),
        LogicTimeline::new(sample_rate, bus.sda),
        result,
        bus.slaves,
    ))
}
