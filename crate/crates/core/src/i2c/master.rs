use std::collections::VecDeque;

use super::{AddressPolicy, BusNode, Direction, Drive, I2cError, Request, Transaction, MAX_CLOCK_HZ};
use crate::Level;

/// Bit timing of the master in samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MasterTiming {
    pub clock_hz: f64,
    pub sample_rate: f64,
    pub samples_per_bit: usize,
    /// Idle bit periods after every STOP.
    pub gap_bits: usize,
}

impl MasterTiming {
    pub fn new(clock_hz: f64, sample_rate: f64, gap_bits: usize) -> Result<Self, I2cError> {
        if !(clock_hz > 0.0 && clock_hz.is_finite()) {
            return Err(I2cError::BadClock(clock_hz));
        }
        if clock_hz > MAX_CLOCK_HZ {
            return Err(I2cError::ClockTooFast(clock_hz));
        }
        let samples = (sample_rate / clock_hz).round() as usize;
        if samples < 8 {
            return Err(I2cError::TooFewSamples {
                rate: sample_rate,
                samples,
            });
        }
        Ok(MasterTiming {
            clock_hz,
            sample_rate,
            samples_per_bit: samples,
            gap_bits,
        })
    }

    pub fn bit_period(&self) -> f64 {
        self.samples_per_bit as f64 / self.sample_rate
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Idle,
    Start,
    RepStart,
    Stop,
    /// Master drives a bit.
    Bit(bool),
    /// Master releases SDA and samples the slave's acknowledgement.
    Ack,
    /// Master releases SDA and samples a data bit.
    Data,
}

#[derive(Debug, Clone)]
struct InFlight {
    request: Request,
    txn: Transaction,
    shift: u8,
    nbits: u8,
}

/// Bit-banging I²C master. SCL is low for the first half of each bit slot
/// and high for the second; SDA changes at the quarter points.
#[derive(Debug, Clone)]
pub struct Master {
    timing: MasterTiming,
    policy: AddressPolicy,
    queue: VecDeque<Request>,
    slots: VecDeque<Slot>,
    slot: Slot,
    pos: usize,
    scl: Level,
    sda: Level,
    flight: Option<InFlight>,
    results: Vec<Transaction>,
}

fn byte_bits(byte: u8) -> impl Iterator<Item = Slot> {
    (0..8).rev().map(move |i| Slot::Bit(byte >> i & 1 == 1))
}

fn program(request: &Request) -> VecDeque<Slot> {
    let mut s = VecDeque::new();
    let addr = request.address() << 1;
    let read = |s: &mut VecDeque<Slot>, count: usize| {
        s.extend(byte_bits(addr | 1));
        s.push_back(Slot::Ack);
        for i in 0..count {
            s.extend(std::iter::repeat_n(Slot::Data, 8));
            s.push_back(Slot::Bit(i + 1 == count));
        }
    };
    let write = |s: &mut VecDeque<Slot>, bytes: &[u8]| {
        s.extend(byte_bits(addr));
        s.push_back(Slot::Ack);
        for &b in bytes {
            s.extend(byte_bits(b));
            s.push_back(Slot::Ack);
        }
    };
    s.push_back(Slot::Start);
    match request {
        Request::Write { bytes, .. } => write(&mut s, bytes),
        Request::Read { count, .. } => read(&mut s, *count),
        Request::WriteRead { bytes, count, .. } => {
            write(&mut s, bytes);
            s.push_back(Slot::RepStart);
            read(&mut s, *count);
        }
    }
    s.push_back(Slot::Stop);
    s
}

impl Master {
    pub fn new(timing: MasterTiming, policy: AddressPolicy) -> Self {
        Master {
            timing,
            policy,
            queue: VecDeque::new(),
            slots: VecDeque::new(),
            slot: Slot::Idle,
            pos: 0,
            scl: Level::High,
            sda: Level::High,
            flight: None,
            results: Vec::new(),
        }
    }

    pub fn timing(&self) -> &MasterTiming {
        &self.timing
    }

    pub fn submit(&mut self, request: Request) -> Result<(), I2cError> {
        request.validate(&self.policy)?;
        self.queue.push_back(request);
        if self.flight.is_none() && self.slot == Slot::Idle && self.slots.is_empty() {
            self.begin_next();
            self.apply_edges();
        }
        Ok(())
    }

    pub fn results(&self) -> &[Transaction] {
        &self.results
    }

    pub fn is_idle(&self) -> bool {
        self.flight.is_none() && self.queue.is_empty() && self.slots.is_empty() && self.slot == Slot::Idle
    }

    /// Position within the current bit slot, or `None` once all work is done.
    pub fn phase(&self) -> Option<usize> {
        if self.is_idle() {
            None
        } else {
            Some(self.pos)
        }
    }

    /// True while a request is between its START and STOP.
    pub fn busy(&self) -> bool {
        self.flight.is_some()
    }

    fn begin_next(&mut self) {
        if let Some(request) = self.queue.pop_front() {
            self.slots = program(&request);
            self.slot = self.slots.pop_front().unwrap();
            self.pos = 0;
            self.flight = Some(InFlight {
                txn: Transaction {
                    address: request.address(),
                    direction: request.direction(),
                    written: Vec::new(),
                    read: Vec::new(),
                    acks: Vec::new(),
                    completed: false,
                },
                request,
                shift: 0,
                nbits: 0,
            });
        }
    }

    /// Sets the drive levels for the current position.
    fn apply_edges(&mut self) {
        let t = self.timing.samples_per_bit;
        let (q1, half, q3) = (t / 4, t / 2, 3 * t / 4);
        let p = self.pos;
        match self.slot {
            Slot::Idle => {
                self.scl = Level::High;
                self.sda = Level::High;
            }
            Slot::Start => {
                self.scl = Level::High;
                if p == 0 {
                    self.sda = Level::High;
                }
                if p == half {
                    self.sda = Level::Low;
                }
            }
            _ => {
                if p == 0 {
                    self.scl = Level::Low;
                }
                if p == half {
                    self.scl = Level::High;
                }
                let (at_q1, at_q3) = match self.slot {
                    Slot::Bit(b) => (Some(Level::from_bit(b)), None),
                    Slot::Ack | Slot::Data => (Some(Level::High), None),
                    Slot::Stop => (Some(Level::Low), Some(Level::High)),
                    Slot::RepStart => (Some(Level::High), Some(Level::Low)),
                    _ => unreachable!(),
                };
                if p == q1 {
                    if let Some(l) = at_q1 {
                        self.sda = l;
                    }
                }
                if p == q3 {
                    if let Some(l) = at_q3 {
                        self.sda = l;
                    }
                }
            }
        }
    }

    fn sample(&mut self, sda: Level) {
        let slot = self.slot;
        let Some(f) = self.flight.as_mut() else { return };
        match slot {
            Slot::Ack => {
                let ack = !sda.is_high();
                f.txn.acks.push(ack);
                if !ack {
                    self.slots.clear();
                    self.slots.push_back(Slot::Stop);
                }
            }
            Slot::Data => {
                f.shift = f.shift << 1 | sda.is_high() as u8;
                f.nbits += 1;
                if f.nbits == 8 {
                    f.txn.read.push(f.shift);
                    f.nbits = 0;
                    f.shift = 0;
                }
            }
            _ => {}
        }
    }

    fn finish_slot(&mut self) {
        if self.slot == Slot::Stop {
            if let Some(mut f) = self.flight.take() {
                let sent = match &f.request {
                    Request::Write { bytes, .. } => bytes.clone(),
                    Request::Read { .. } => Vec::new(),
                    Request::WriteRead { bytes, .. } => bytes.clone(),
                };
                // The first ack answers the address; the next ones answer written bytes.
                let acked = f.txn.acks.iter().skip(1).take(sent.len()).take_while(|&&a| a).count();
                let addr_phases = if f.txn.direction == Direction::WriteRead { 2 } else { 1 };
                f.txn.written = sent[..acked].to_vec();
                let want_read = match &f.request {
                    Request::Write { .. } => 0,
                    Request::Read { count, .. } | Request::WriteRead { count, .. } => *count,
                };
                f.txn.completed = f.txn.acks.len() == sent.len() + addr_phases
                    && f.txn.acks.iter().all(|&a| a)
                    && f.txn.read.len() == want_read;
                self.results.push(f.txn);
            }
            for _ in 0..self.timing.gap_bits {
                self.slots.push_back(Slot::Idle);
            }
        }
        match self.slots.pop_front() {
            Some(s) => self.slot = s,
            None => {
                self.slot = Slot::Idle;
                self.begin_next();
            }
        }
        self.pos = 0;
    }
}

impl BusNode for Master {
    fn drive(&self) -> (Drive, Drive) {
        let d = |l: Level| if l.is_high() { Drive::Release } else { Drive::PullLow };
        (d(self.scl), d(self.sda))
    }

    fn tick(&mut self, _scl: Level, sda: Level) {
        if self.slot == Slot::Idle && self.slots.is_empty() && self.flight.is_none() {
            if self.queue.is_empty() {
                return;
            }
            self.begin_next();
            self.apply_edges();
        }
        let t = self.timing.samples_per_bit;
        if self.pos == 3 * t / 4 {
            self.sample(sda);
        }
        self.pos += 1;
        if self.pos == t {
            self.finish_slot();
        }
        self.apply_edges();
    }
}
