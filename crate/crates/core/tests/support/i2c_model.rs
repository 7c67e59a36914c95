//! Independent model of a pointer-register device and a randomized
//! transaction run over the ideal bus checked against it.

use std::collections::BTreeMap;

use passmod_core::i2c::{AddressPolicy, IdealBus, Master, MasterTiming, RegisterMap, Request, Slave};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Straightforward model of a pointer-register device.
#[derive(Clone)]
struct Model {
    regs: BTreeMap<u8, (u8, u16, bool)>,
    pointer: u8,
}

impl Model {
    fn width(&self, p: u8) -> u8 {
        self.regs.get(&p).map_or(1, |r| r.0)
    }

    fn read(&mut self, count: usize) -> Vec<u8> {
        let mut out = Vec::new();
        let mut idx = 0;
        while out.len() < count {
            let b = match self.regs.get(&self.pointer) {
                Some(&(1, v, _)) => v as u8,
                Some(&(_, v, _)) => (v >> (8 * (1 - idx))) as u8,
                None => 0xFF,
            };
            out.push(b);
            idx += 1;
            if idx >= self.width(self.pointer) {
                idx = 0;
                self.pointer = self.pointer.wrapping_add(1);
            }
        }
        out
    }

    fn write(&mut self, bytes: &[u8]) {
        let Some((&p, data)) = bytes.split_first() else { return };
        self.pointer = p;
        let mut pending = Vec::new();
        let mut partial = Vec::new();
        for &b in data {
            partial.push(b);
            if partial.len() == self.width(self.pointer) as usize {
                let v = partial.iter().fold(0u16, |a, &b| a << 8 | b as u16);
                pending.push((self.pointer, v));
                partial.clear();
                self.pointer = self.pointer.wrapping_add(1);
            }
        }
        for (p, v) in pending {
            if let Some(r) = self.regs.get_mut(&p) {
                if r.2 {
                    r.1 = if r.0 == 1 { v & 0xFF } else { v };
                }
            }
        }
    }
}

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct LoopbackReport {
    pub transactions: usize,
    pub ack_errors: usize,
    pub data_errors: usize,
    pub register_mismatches: usize,
}

/// `total` random writes, reads and write-reads to five devices plus one
/// absent address.
pub fn loopback(seed: u64, total: usize) -> LoopbackReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let addresses = [0x10u8, 0x18, 0x2A, 0x44, 0x77];
    let mut models = BTreeMap::new();
    let mut slaves = Vec::new();
    for &a in &addresses {
        let mut regs = BTreeMap::new();
        let mut map = RegisterMap::new();
        for p in 0..6u8 {
            let width = rng.gen_range(1..=2u8);
            let value = if width == 1 { rng.gen::<u8>() as u16 } else { rng.gen() };
            let writable = p != 5;
            map.define(p, width, value, writable);
            regs.insert(p, (width, value, writable));
        }
        slaves.push(Slave::new(a, map));
        models.insert(a, Model { regs, pointer: 0 });
    }
    let timing = MasterTiming::new(100e3, 5e6, 1).unwrap();
    let mut bus = IdealBus::new(Master::new(timing, AddressPolicy::default()), slaves);
    let mut expected = Vec::new();
    for _ in 0..total {
        // One address in ten is absent from the bus.
        let address = if rng.gen_bool(0.1) {
            0x33
        } else {
            addresses[rng.gen_range(0..addresses.len())]
        };
        let ptr = rng.gen_range(0..7u8);
        let req = match rng.gen_range(0..3) {
            0 => {
                let n = rng.gen_range(0..4);
                let mut bytes = vec![ptr];
                bytes.extend((0..n).map(|_| rng.gen::<u8>()));
                Request::Write { address, bytes }
            }
            1 => Request::Read {
                address,
                count: rng.gen_range(1..4),
            },
            _ => Request::WriteRead {
                address,
                bytes: vec![ptr],
                count: rng.gen_range(1..4),
            },
        };
        let present = models.contains_key(&address);
        let want_read = match (&req, models.get_mut(&address)) {
            (Request::Write { bytes, .. }, Some(m)) => {
                m.write(bytes);
                vec![]
            }
            (Request::Read { count, .. }, Some(m)) => m.read(*count),
            (Request::WriteRead { bytes, count, .. }, Some(m)) => {
                m.write(bytes);
                m.read(*count)
            }
            (_, None) => vec![],
        };
        expected.push((req.clone(), present, want_read));
        bus.master.submit(req).unwrap();
    }
    bus.run_to_idle();
    let results = bus.master.results();
    let mut report = LoopbackReport {
        transactions: results.len(),
        ..Default::default()
    };
    for ((req, present, want), got) in expected.iter().zip(results) {
        if got.acks.first() != Some(present) || got.completed != *present {
            report.ack_errors += 1;
        }
        if got.read != *want {
            report.data_errors += 1;
        }
        if let (Request::Write { bytes, .. }, true) = (req, present) {
            if got.written != *bytes {
                report.data_errors += 1;
            }
        }
    }
    for s in &bus.slaves {
        let m = &models[&s.address];
        for (&p, &(_, v, _)) in &m.regs {
            if s.registers.get(p) != Some(v) {
                report.register_mismatches += 1;
            }
        }
    }
    report
}
