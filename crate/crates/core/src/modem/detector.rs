use serde::{Deserialize, Serialize};

use super::EnvelopeTrace;

/// Logarithmic RF detector transfer curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorParams {
    /// Output slope in volts per dB.
    pub slope: f64,
    /// Anchor: an input amplitude of `ref_in` gives `ref_out` volts.
    pub ref_in: f64,
    pub ref_out: f64,
    /// Input floor relative to `ref_in`, in dB.
    pub floor_db: f64,
    pub input_impedance: f64,
    /// Baseband transient at the input that drives the output to its ceiling.
    pub overload: f64,
}

impl Default for DetectorParams {
    fn default() -> Self {
        DetectorParams {
            slope: 0.044,
            ref_in: 0.01,
            ref_out: 1.0,
            floor_db: -60.0,
            input_impedance: 2e3,
            overload: 0.5,
        }
    }
}

impl DetectorParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.slope > 0.0) {
            return Err("detector slope must be positive".into());
        }
        if !(self.ref_in > 0.0) {
            return Err("detector reference input must be positive".into());
        }
        if !(self.overload > 0.0) {
            return Err("detector overload level must be positive".into());
        }
        Ok(())
    }

    /// Lowest input amplitude the detector resolves.
    pub fn floor(&self) -> f64 {
        self.ref_in * 10f64.powf(self.floor_db / 20.0)
    }

    fn law(&self, amplitude: f64) -> f64 {
        self.ref_out + self.slope * 20.0 * (amplitude.max(self.floor()) / self.ref_in).log10()
    }

    /// Saturated output under transient overload.
    pub fn ceiling(&self) -> f64 {
        self.law(self.overload)
    }

    /// Output for one sample.
    pub fn respond(&self, amplitude: f64, transient: f64) -> f64 {
        if transient.abs() >= self.overload {
            self.ceiling()
        } else {
            self.law(amplitude)
        }
    }
}

/// Detector output trace.
pub fn detect(env: &EnvelopeTrace, p: &DetectorParams) -> Vec<f64> {
    env.amplitude
        .iter()
        .zip(&env.transient)
        .map(|(&a, &t)| p.respond(a, t))
        .collect()
}
