use serde::{Deserialize, Serialize};

use super::{EnvelopeTrace, LogicTimeline};

/// Pin-switching spike at the detector input and the anti-parallel diode clip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClipParams {
    pub enabled: bool,
    /// Diode forward drop.
    pub v_f: f64,
    pub spike_amplitude: f64,
    pub spike_decay: f64,
}

impl Default for ClipParams {
    fn default() -> Self {
        ClipParams {
            enabled: true,
            v_f: 0.3,
            spike_amplitude: 3.3,
            // 2 kOhm detector input against the 5 pF dc block.
            spike_decay: 10e-9,
        }
    }
}

impl ClipParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.v_f > 0.0) {
            return Err("diode forward drop must be positive".into());
        }
        if !(self.spike_amplitude >= 0.0 && self.spike_decay > 0.0) {
            return Err("spike amplitude must be non-negative and decay positive".into());
        }
        Ok(())
    }

    /// Voltage the diodes let through.
    pub fn limit(&self, v: f64) -> f64 {
        if self.enabled {
            v.clamp(-self.v_f, self.v_f)
        } else {
            v
        }
    }
}

/// Adds a decaying spike at every transition of `transitions` to the
/// transient channel, then applies the clip to transient and carrier alike.
pub fn inject_latchup_spike(env: &EnvelopeTrace, transitions: &LogicTimeline, clip: &ClipParams) -> EnvelopeTrace {
    assert_eq!(env.len(), transitions.len(), "traces must be aligned");
    let decay = (-1.0 / (env.sample_rate * clip.spike_decay)).exp();
    let mut out = env.clone();
    let mut raw = 0.0;
    for i in 0..env.len() {
        raw *= decay;
        if i > 0 && transitions.levels[i] != transitions.levels[i - 1] {
            raw += clip.spike_amplitude;
        }
        out.transient[i] = clip.limit(env.transient[i] + raw);
        out.amplitude[i] = clip.limit(env.amplitude[i]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Level;

    #[test]
    fn no_transitions_is_identity() {
        let env = EnvelopeTrace::new(1e7, vec![0.02; 50]);
        let t = LogicTimeline::new(1e7, vec![Level::High; 50]);
        assert_eq!(inject_latchup_spike(&env, &t, &ClipParams::default()), env);
    }

    #[test]
    fn clipped_spike_bounded() {
        let env = EnvelopeTrace::new(1e9, vec![0.02; 100]);
        let mut levels = vec![Level::High; 100];
        for l in levels.iter_mut().skip(10).step_by(2) {
            *l = Level::Low;
        }
        let t = LogicTimeline::new(1e9, levels);
        let out = inject_latchup_spike(&env, &t, &ClipParams::default());
        assert!(out.transient.iter().all(|v| v.abs() <= 0.3));
        assert_eq!(out.amplitude, env.amplitude);
        let raw = inject_latchup_spike(
            &env,
            &t,
            &ClipParams {
                enabled: false,
                ..ClipParams::default()
            },
        );
        assert!(raw.transient.iter().any(|&v| v >= 3.3));
    }
}
