use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{BusNode, Drive};
use crate::Level;

/// Base address of the temperature-sensor family; the low three bits are strap pins.
pub const TEMP_SENSOR_BASE: u8 = 0x18;

/// Register file addressed by a one-byte pointer. Registers are one or two
/// bytes wide and transferred most significant byte first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterMap {
    /// pointer -> (width in bytes, value, writable)
    regs: BTreeMap<u8, (u8, u16, bool)>,
}

impl RegisterMap {
    pub fn new() -> Self {
        RegisterMap { regs: BTreeMap::new() }
    }

    pub fn define(&mut self, pointer: u8, width: u8, value: u16, writable: bool) {
        assert!(width == 1 || width == 2, "register width must be 1 or 2 bytes");
        self.regs.insert(pointer, (width, value, writable));
    }

    pub fn get(&self, pointer: u8) -> Option<u16> {
        self.regs.get(&pointer).map(|r| r.1)
    }

    pub fn width(&self, pointer: u8) -> u8 {
        self.regs.get(&pointer).map_or(1, |r| r.0)
    }

    /// Sets a value regardless of the writable flag, as the device itself would.
    pub fn set_internal(&mut self, pointer: u8, value: u16) {
        if let Some(r) = self.regs.get_mut(&pointer) {
            r.1 = value;
        }
    }

    fn write(&mut self, pointer: u8, value: u16) {
        if let Some(r) = self.regs.get_mut(&pointer) {
            if r.2 {
                r.1 = if r.0 == 1 { value & 0xFF } else { value };
            }
        }
    }

    /// Byte `index` of the register, or 0xFF for an unmapped pointer.
    fn read_byte(&self, pointer: u8, index: u8) -> u8 {
        match self.regs.get(&pointer) {
            Some(&(1, v, _)) => v as u8,
            Some(&(_, v, _)) => v.to_be_bytes()[index.min(1) as usize],
            None => 0xFF,
        }
    }
}

impl Default for RegisterMap {
    fn default() -> Self {
        Self::new()
    }
}

/// Digital temperature sensor register layout.
pub struct TempSensor;

impl TempSensor {
    pub const CONFIG: u8 = 0x01;
    pub const T_UPPER: u8 = 0x02;
    pub const T_LOWER: u8 = 0x03;
    pub const T_CRIT: u8 = 0x04;
    pub const AMBIENT: u8 = 0x05;
    pub const MANUFACTURER: u8 = 0x06;
    pub const DEVICE: u8 = 0x07;
    pub const RESOLUTION: u8 = 0x08;

    /// 13-bit two's complement in sixteenths of a degree.
    pub fn encode(celsius: f64) -> u16 {
        let raw = (celsius * 16.0).round() as i32;
        (raw.clamp(-4096, 4095) as u16) & 0x1FFF
    }

    pub fn decode(raw: u16) -> f64 {
        let v = (raw & 0x1FFF) as i32;
        let v = if v & 0x1000 != 0 { v - 0x2000 } else { v };
        v as f64 / 16.0
    }

    pub fn registers(celsius: f64) -> RegisterMap {
        let mut m = RegisterMap::new();
        m.define(Self::CONFIG, 2, 0x0000, true);
        m.define(Self::T_UPPER, 2, 0x0000, true);
        m.define(Self::T_LOWER, 2, 0x0000, true);
        m.define(Self::T_CRIT, 2, 0x0000, true);
        m.define(Self::AMBIENT, 2, Self::encode(celsius), false);
        m.define(Self::MANUFACTURER, 2, 0x0054, false);
        m.define(Self::DEVICE, 2, 0x0400, false);
        m.define(Self::RESOLUTION, 1, 0x03, true);
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    /// Not addressed; waiting for a START.
    Idle,
    Address {
        shift: u8,
        n: u8,
    },
    /// Matched; ACK goes out at the next falling SCL.
    AckPending {
        read: bool,
    },
    AckAddress {
        read: bool,
    },
    Receive {
        shift: u8,
        n: u8,
    },
    AckPendingData,
    AckData,
    /// Driving bit `n` (0 = MSB) of `byte`.
    Transmit {
        byte: u8,
        n: u8,
    },
    /// SDA released, waiting for the master's ACK/NACK.
    AwaitAck {
        ack: Option<bool>,
    },
}

/// A pointer-register slave with its own edge detector.
#[derive(Debug, Clone)]
pub struct Slave {
    pub address: u8,
    pub registers: RegisterMap,
    pointer: u8,
    state: State,
    sda_out: Level,
    prev_scl: Level,
    prev_sda: Level,
    /// Bytes received after the address in the current write.
    received: u8,
    /// Bytes collected for the register currently being written.
    partial: Vec<u8>,
    pending: Vec<(u8, u16)>,
    read_index: u8,
}

impl Slave {
    pub fn new(address: u8, registers: RegisterMap) -> Self {
        Slave {
            address,
            registers,
            pointer: 0,
            state: State::Idle,
            sda_out: Level::High,
            prev_scl: Level::High,
            prev_sda: Level::High,
            received: 0,
            partial: Vec::new(),
            pending: Vec::new(),
            read_index: 0,
        }
    }

    /// Temperature sensor with strap offset 0..=7.
    pub fn temp_sensor(offset: u8, celsius: f64) -> Self {
        assert!(offset < 8, "strap offset is three bits");
        Slave::new(TEMP_SENSOR_BASE + offset, TempSensor::registers(celsius))
    }

    pub fn pointer(&self) -> u8 {
        self.pointer
    }

    /// True unless the slave is idle and releasing SDA.
    pub fn engaged(&self) -> bool {
        self.state != State::Idle
    }

    fn commit(&mut self) {
        for (p, v) in self.pending.drain(..) {
            self.registers.write(p, v);
        }
        self.partial.clear();
    }

    fn start(&mut self) {
        self.commit();
        self.state = State::Address { shift: 0, n: 0 };
        self.sda_out = Level::High;
        self.received = 0;
    }

    fn stop(&mut self) {
        self.commit();
        self.state = State::Idle;
        self.sda_out = Level::High;
    }

    fn rise(&mut self, sda: Level) {
        let bit = sda.is_high() as u8;
        self.state = match self.state {
            State::Address { shift, n } => {
                let shift = shift << 1 | bit;
                if n + 1 < 8 {
                    State::Address { shift, n: n + 1 }
                } else if shift >> 1 == self.address {
                    State::AckPending { read: shift & 1 == 1 }
                } else {
                    State::Idle
                }
            }
            State::Receive { shift, n } => {
                let shift = shift << 1 | bit;
                if n + 1 < 8 {
                    State::Receive { shift, n: n + 1 }
                } else {
                    self.accept(shift);
                    State::AckPendingData
                }
            }
            State::AwaitAck { .. } => State::AwaitAck { ack: Some(bit == 0) },
            s => s,
        };
    }

    fn accept(&mut self, byte: u8) {
        if self.received == 0 {
            self.pointer = byte;
            self.read_index = 0;
            self.partial.clear();
        } else {
            self.partial.push(byte);
            let w = self.registers.width(self.pointer) as usize;
            if self.partial.len() == w {
                let v = self.partial.iter().fold(0u16, |a, &b| a << 8 | b as u16);
                self.pending.push((self.pointer, v));
                self.partial.clear();
                self.pointer = self.pointer.wrapping_add(1);
            }
        }
        self.received = self.received.saturating_add(1);
    }

    fn next_read_byte(&mut self) -> u8 {
        let b = self.registers.read_byte(self.pointer, self.read_index);
        self.read_index += 1;
        if self.read_index >= self.registers.width(self.pointer) {
            self.read_index = 0;
            self.pointer = self.pointer.wrapping_add(1);
        }
        b
    }

    fn fall(&mut self) {
        self.state = match self.state {
            State::AckPending { read } => {
                self.sda_out = Level::Low;
                State::AckAddress { read }
            }
            State::AckAddress { read: true } => {
                self.read_index = 0;
                let byte = self.next_read_byte();
                self.sda_out = Level::from_bit(byte & 0x80 != 0);
                State::Transmit { byte, n: 0 }
            }
            State::AckAddress { read: false } | State::AckData => {
                self.sda_out = Level::High;
                State::Receive { shift: 0, n: 0 }
            }
            State::AckPendingData => {
                self.sda_out = Level::Low;
                State::AckData
            }
            State::Transmit { byte, n } if n < 7 => {
                self.sda_out = Level::from_bit(byte >> (6 - n) & 1 == 1);
                State::Transmit { byte, n: n + 1 }
            }
            State::Transmit { .. } => {
                self.sda_out = Level::High;
                State::AwaitAck { ack: None }
            }
            State::AwaitAck { ack: Some(true) } => {
                let byte = self.next_read_byte();
                self.sda_out = Level::from_bit(byte & 0x80 != 0);
                State::Transmit { byte, n: 0 }
            }
            State::AwaitAck { .. } => {
                self.sda_out = Level::High;
                State::Idle
            }
            s => s,
        };
    }
}

impl BusNode for Slave {
    fn drive(&self) -> (Drive, Drive) {
        let sda = if self.sda_out.is_high() {
            Drive::Release
        } else {
            Drive::PullLow
        };
        (Drive::Release, sda)
    }

    fn tick(&mut self, scl: Level, sda: Level) {
        let (ps, pd) = (self.prev_scl, self.prev_sda);
        self.prev_scl = scl;
        self.prev_sda = sda;
        if ps.is_high() && scl.is_high() && pd != sda {
            if sda.is_high() {
                self.stop();
            } else {
                self.start();
            }
        } else if !ps.is_high() && scl.is_high() {
            self.rise(sda);
        } else if ps.is_high() && !scl.is_high() {
            self.fall();
        }
    }
}
