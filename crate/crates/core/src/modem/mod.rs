//! Envelope-domain model of the ASK physical layer.
//!
//! A node changes the carrier amplitude on the line by switching its filter
//! load; every receiver runs a log detector and a self-referencing data
//! slicer. Pin switching also couples a baseband spike into the detector
//! input, which an anti-parallel diode pair can clip.

mod detector;
mod latchup;
mod slicer;
mod trace;

use serde::{Deserialize, Serialize};

pub use detector::{detect, DetectorParams};
pub use latchup::{inject_latchup_spike, ClipParams};
pub use slicer::{slice, Slicer, SlicerParams};
pub use trace::{modulate, write_trace_csv, EnvelopeTrace, LogicTimeline, MIN_OVERSAMPLING};

use crate::Level;

/// Carriers should sit at least this factor above the data clock.
pub const MIN_CARRIER_SEPARATION: f64 = 100.0;

/// Warnings for carriers too close to the baseband clock.
pub fn separation_warnings(clock_hz: f64, carriers: &[f64]) -> Vec<String> {
    carriers
        .iter()
        .filter(|&&f| f < MIN_CARRIER_SEPARATION * clock_hz)
        .map(|f| {
            format!(
                "carrier {:.4} MHz is within {MIN_CARRIER_SEPARATION}x of the {:.1} kHz clock",
                f / 1e6,
                clock_hz / 1e3
            )
        })
        .collect()
}

/// Everything a receiver chain needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DemodParams {
    pub detector: DetectorParams,
    pub slicer: SlicerParams,
    pub clip: ClipParams,
}

impl DemodParams {
    pub fn for_bit_period(bit_period: f64) -> Self {
        DemodParams {
            detector: DetectorParams::default(),
            slicer: SlicerParams::for_bit_period(bit_period),
            clip: ClipParams::default(),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        self.detector.validate()?;
        self.slicer.validate()?;
        self.clip.validate()
    }
}

/// One sample of a running demodulator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemodSample {
    pub detector: f64,
    /// Slicer reference before this sample.
    pub reference: f64,
    pub slicer: Level,
    /// Level at the node's open-drain pin.
    pub pin: Level,
}

/// A receiver chain stepped sample by sample, with the slicer output tied
/// to the node's own open-drain pin.
///
/// The pin reads low while the node pulls it low, otherwise it follows the
/// slicer. Every pin transition injects a spike at the detector input. When
/// a high-to-low decision would itself inject a spike big enough to saturate
/// the detector, the comparator is pushed straight back high: the latch-up.
#[derive(Debug, Clone)]
pub struct Demodulator {
    params: DemodParams,
    slicer: Slicer,
    decay: f64,
    spike: f64,
    pin: Level,
}

impl Demodulator {
    pub fn new(params: DemodParams, sample_rate: f64) -> Self {
        Demodulator {
            params,
            slicer: Slicer::new(params.slicer, sample_rate),
            decay: (-1.0 / (sample_rate * params.clip.spike_decay)).exp(),
            spike: 0.0,
            pin: Level::High,
        }
    }

    pub fn pin(&self) -> Level {
        self.pin
    }

    fn detector(&self, amplitude: f64) -> f64 {
        let clip = &self.params.clip;
        self.params
            .detector
            .respond(clip.limit(amplitude), clip.limit(self.spike))
    }

    pub fn step(&mut self, amplitude: f64, own_pull: bool) -> DemodSample {
        self.spike *= self.decay;
        let reference = self.slicer.reference().unwrap_or_else(|| self.detector(amplitude));
        let mut det = self.detector(amplitude);
        let mut out = self.slicer.decide(det);
        let pin_of = |out: Level| if own_pull { Level::Low } else { out };
        let mut pin = pin_of(out);
        if pin != self.pin {
            self.spike += self.params.clip.spike_amplitude;
            det = self.detector(amplitude);
            let again = self.slicer.decide(det);
            if again != out {
                out = again;
                pin = pin_of(out);
            }
        }
        self.slicer.commit(det, out);
        self.pin = pin;
        DemodSample {
            detector: det,
            reference,
            slicer: out,
            pin,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separation_guard() {
        assert!(separation_warnings(100e3, &[20e6, 50e6]).is_empty());
        assert_eq!(separation_warnings(400e3, &[20e6, 50e6]).len(), 1);
    }

    fn run(clip: bool) -> Vec<Level> {
        let bit = 1e-5;
        let rate = 10e6;
        let mut p = DemodParams::for_bit_period(bit);
        p.clip.enabled = clip;
        let mut d = Demodulator::new(p, rate);
        let logic = LogicTimeline::square(rate, 1.0 / bit, 20);
        let env = modulate(0.02, 0.005, &logic, 0.0);
        env.amplitude.iter().map(|&a| d.step(a, false).pin).collect()
    }

    #[test]
    fn unclipped_spike_latches_high() {
        assert!(run(false).iter().all(|l| l.is_high()));
    }

    #[test]
    fn clipping_restores_decoding() {
        let bit = 1e-5;
        let logic = LogicTimeline::square(10e6, 1.0 / bit, 20);
        let got = run(true);
        let bad: Vec<usize> = (0..got.len()).filter(|&i| got[i] != logic.levels[i]).collect();
        assert!(bad.is_empty(), "{:?}", &bad[..bad.len().min(20)]);
    }
}
