use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::LossModel;
use crate::impedance::{find_poles_zeros, Impedance, ImpedanceError, SingularityKind, SweepScale};
use crate::synth::{FilterDesign, ValueSet};
use crate::Level;

/// Version tag written into every CSV/JSON artifact.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Marker {
    pub frequency: f64,
    pub state: Level,
    pub kind: SingularityKind,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub frequencies: Vec<f64>,
    pub z_h: Vec<Impedance>,
    pub z_l: Vec<Impedance>,
    pub markers: Vec<Marker>,
}

impl SweepResult {
    /// Index of the grid point closest (in log-frequency) to `f`.
    pub fn nearest_index(&self, f: f64) -> usize {
        let mut best = 0;
        for (i, &g) in self.frequencies.iter().enumerate() {
            if (g / f).ln().abs() < (self.frequencies[best] / f).ln().abs() {
                best = i;
            }
        }
        best
    }

    /// Marker text for each row, e.g. `pole_h;zero_l`.
    pub fn row_markers(&self) -> Vec<String> {
        let mut rows = vec![Vec::<String>::new(); self.frequencies.len()];
        for m in &self.markers {
            let tag = format!(
                "{}_{}",
                match m.kind {
                    SingularityKind::Pole => "pole",
                    SingularityKind::Zero => "zero",
                },
                match m.state {
                    Level::High => "h",
                    Level::Low => "l",
                }
            );
            rows[self.nearest_index(m.frequency)].push(tag);
        }
        rows.into_iter().map(|v| v.join(";")).collect()
    }
}

/// Input impedance of `d` in both logic states over a frequency grid.
pub fn sweep(
    d: &FilterDesign,
    values: ValueSet,
    loss: &LossModel,
    f_lo: f64,
    f_hi: f64,
    points: usize,
    scale: SweepScale,
) -> Result<SweepResult, ImpedanceError> {
    if !(f_lo > 0.0 && f_hi > f_lo && f_hi.is_finite()) || points < 2 {
        return Err(ImpedanceError::NonPositiveFrequency(f_lo));
    }
    let frequencies = scale.grid(f_lo, f_hi, points);
    let rows = frequencies
        .par_iter()
        .map(|&f| {
            Ok((
                d.zin(f, Level::High, values, loss)?,
                d.zin(f, Level::Low, values, loss)?,
            ))
        })
        .collect::<Result<Vec<_>, ImpedanceError>>()?;
    let (z_h, z_l) = rows.into_iter().unzip();
    let mut markers = Vec::new();
    for state in [Level::High, Level::Low] {
        for s in find_poles_zeros(|f| d.zin(f, state, values, loss), f_lo, f_hi, points.max(400))? {
            markers.push(Marker {
                frequency: s.frequency,
                state,
                kind: s.kind,
            });
        }
    }
    markers.sort_by(|a, b| a.frequency.total_cmp(&b.frequency));
    Ok(SweepResult {
        frequencies,
        z_h,
        z_l,
        markers,
    })
}

fn cells(z: Impedance) -> (String, String) {
    match z {
        Impedance::Finite(c) => (format!("{:.9e}", c.norm()), format!("{:.9e}", c.arg())),
        Impedance::Pole => ("inf".to_string(), "nan".to_string()),
    }
}

/// Writes `f_hz,zh_abs,zh_arg,zl_abs,zl_arg,marker` rows after a schema line.
/// Phases are in radians; poles are written as `inf`.
pub fn write_sweep_csv<W: Write>(result: &SweepResult, out: W) -> csv::Result<()> {
    let mut out = out;
    writeln!(out, "# schema_version: {SCHEMA_VERSION}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["f_hz", "zh_abs", "zh_arg", "zl_abs", "zl_arg", "marker"])?;
    let markers = result.row_markers();
    for (i, &f) in result.frequencies.iter().enumerate() {
        let (ha, hp) = cells(result.z_h[i]);
        let (la, lp) = cells(result.z_l[i]);
        w.write_record([format!("{f:.9e}"), ha, hp, la, lp, markers[i].clone()])?;
    }
    w.flush()?;
    Ok(())
}
