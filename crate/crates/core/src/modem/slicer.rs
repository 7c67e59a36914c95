use serde::{Deserialize, Serialize};

use super::LogicTimeline;
use crate::Level;

/// Data slicer whose comparator reference is a lowpass of its own input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlicerParams {
    pub lpf_time_constant: f64,
    pub hysteresis: f64,
    /// `None` starts the reference at the first input sample.
    pub initial_reference: Option<f64>,
}

impl SlicerParams {
    /// Defaults for a given bit period: 20 bit periods and 10 mV.
    pub fn for_bit_period(bit_period: f64) -> Self {
        SlicerParams {
            lpf_time_constant: 20.0 * bit_period,
            hysteresis: 0.01,
            initial_reference: None,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.lpf_time_constant > 0.0) {
            return Err("slicer time constant must be positive".into());
        }
        if !(self.hysteresis >= 0.0) {
            return Err("slicer hysteresis must be non-negative".into());
        }
        Ok(())
    }
}

/// Running slicer state.
#[derive(Debug, Clone)]
pub struct Slicer {
    params: SlicerParams,
    alpha: f64,
    reference: Option<f64>,
    out: Level,
}

impl Slicer {
    pub fn new(params: SlicerParams, sample_rate: f64) -> Self {
        let alpha = 1.0 - (-1.0 / (sample_rate * params.lpf_time_constant)).exp();
        Slicer {
            params,
            alpha,
            reference: params.initial_reference,
            out: Level::High,
        }
    }

    pub fn reference(&self) -> Option<f64> {
        self.reference
    }

    pub fn output(&self) -> Level {
        self.out
    }

    /// Comparator decision for `det` against the current reference, without
    /// changing any state.
    pub fn decide(&self, det: f64) -> Level {
        let r = self.reference.unwrap_or(det);
        let h = self.params.hysteresis / 2.0;
        if det > r + h {
            Level::High
        } else if det < r - h {
            Level::Low
        } else {
            self.out
        }
    }

    /// Commits `out` as the comparator state and feeds `det` to the lowpass.
    pub fn commit(&mut self, det: f64, out: Level) {
        self.out = out;
        let r = self.reference.unwrap_or(det);
        self.reference = Some(r + self.alpha * (det - r));
    }

    pub fn step(&mut self, det: f64) -> Level {
        let out = self.decide(det);
        self.commit(det, out);
        out
    }
}

/// Slices a detector trace into logic.
pub fn slice(det: &[f64], sample_rate: f64, p: &SlicerParams) -> LogicTimeline {
    let mut s = Slicer::new(*p, sample_rate);
    let levels = det.iter().map(|&d| s.step(d)).collect();
    LogicTimeline::new(sample_rate, levels)
}
