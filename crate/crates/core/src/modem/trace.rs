use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::analysis::SCHEMA_VERSION;
use crate::Level;

/// Minimum samples per clock period a timeline must carry.
pub const MIN_OVERSAMPLING: f64 = 50.0;

/// A sampled digital waveform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogicTimeline {
    pub sample_rate: f64,
    pub levels: Vec<Level>,
}

impl LogicTimeline {
    pub fn new(sample_rate: f64, levels: Vec<Level>) -> Self {
        assert!(sample_rate > 0.0, "sample rate must be positive");
        LogicTimeline { sample_rate, levels }
    }

    /// Checks that the timeline oversamples a clock of `clock_hz` enough.
    pub fn check_rate(sample_rate: f64, clock_hz: f64) -> Result<(), String> {
        if sample_rate >= MIN_OVERSAMPLING * clock_hz {
            Ok(())
        } else {
            Err(format!(
                "sample rate {sample_rate} Hz is below {MIN_OVERSAMPLING}x the {clock_hz} Hz clock"
            ))
        }
    }

    /// 50 % duty square wave starting high.
    pub fn square(sample_rate: f64, freq: f64, periods: usize) -> Self {
        let half = (sample_rate / freq / 2.0).round() as usize;
        let mut levels = Vec::with_capacity(2 * half * periods);
        for _ in 0..periods {
            levels.extend(std::iter::repeat_n(Level::High, half));
            levels.extend(std::iter::repeat_n(Level::Low, half));
        }
        LogicTimeline { sample_rate, levels }
    }

    /// One level per bit, each held for `samples_per_bit`.
    pub fn from_bits(sample_rate: f64, bits: &[bool], samples_per_bit: usize) -> Self {
        let levels = bits
            .iter()
            .flat_map(|&b| std::iter::repeat_n(Level::from_bit(b), samples_per_bit))
            .collect();
        LogicTimeline { sample_rate, levels }
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate
    }

    /// Sample indices at which the level differs from the previous sample.
    pub fn transitions(&self) -> Vec<usize> {
        (1..self.levels.len())
            .filter(|&i| self.levels[i] != self.levels[i - 1])
            .collect()
    }

    /// Fraction of samples that are high.
    pub fn duty(&self) -> f64 {
        if self.levels.is_empty() {
            return 0.0;
        }
        self.levels.iter().filter(|l| l.is_high()).count() as f64 / self.levels.len() as f64
    }
}

/// Carrier amplitude at the detector input for one carrier, plus the
/// baseband transient injected by pin switching.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeTrace {
    pub sample_rate: f64,
    pub amplitude: Vec<f64>,
    pub transient: Vec<f64>,
}

impl EnvelopeTrace {
    pub fn new(sample_rate: f64, amplitude: Vec<f64>) -> Self {
        let transient = vec![0.0; amplitude.len()];
        EnvelopeTrace {
            sample_rate,
            amplitude,
            transient,
        }
    }

    pub fn len(&self) -> usize {
        self.amplitude.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitude.is_empty()
    }
}

/// Maps logic to carrier amplitude with a single-pole transition of time
/// constant `rise_time` (seconds; zero gives hard steps).
pub fn modulate(amp_h: f64, amp_l: f64, logic: &LogicTimeline, rise_time: f64) -> EnvelopeTrace {
    assert!(amp_h >= amp_l && amp_l >= 0.0, "need amp_h >= amp_l >= 0");
    let k = if rise_time > 0.0 {
        1.0 - (-logic.dt() / rise_time).exp()
    } else {
        1.0
    };
    let target = |l: Level| if l.is_high() { amp_h } else { amp_l };
    let mut out = Vec::with_capacity(logic.len());
    let mut y = logic.levels.first().map(|&l| target(l)).unwrap_or(amp_h);
    for &l in &logic.levels {
        let t = target(l);
        y += k * (t - y);
        out.push(y);
    }
    EnvelopeTrace::new(logic.sample_rate, out)
}

/// Writes `t_s,value` rows after a schema line.
pub fn write_trace_csv<W: Write>(sample_rate: f64, values: &[f64], out: W) -> csv::Result<()> {
    let mut out = out;
    writeln!(out, "# schema_version: {SCHEMA_VERSION}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t_s", "value"])?;
    for (i, v) in values.iter().enumerate() {
        w.write_record([format!("{:.9e}", i as f64 / sample_rate), format!("{v:.9e}")])?;
    }
    w.flush()?;
    Ok(())
}
