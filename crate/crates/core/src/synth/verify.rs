use serde::Serialize;

use super::{ConfigKind, FilterDesign, ValueSet};
use crate::analysis::LossModel;
use crate::impedance::{find_poles_zeros, Impedance, ImpedanceError, SingularityKind};
use crate::Level;

/// A zero closer than this (relative) to a pole is flagged as a cancellation risk.
pub const CANCELLATION_BAND: f64 = 0.05;
pub const MIN_LOSSY_RATIO: f64 = 100.0;
pub const MAX_IDEAL_SHORT_OHMS: f64 = 1e-6;

/// `|Z|` and phase, or a pole.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZReading {
    pub abs: Option<f64>,
    pub arg_deg: Option<f64>,
    pub pole: bool,
}

impl From<Impedance> for ZReading {
    fn from(z: Impedance) -> Self {
        match z {
            Impedance::Finite(c) => ZReading {
                abs: Some(c.norm()),
                arg_deg: Some(c.arg().to_degrees()),
                pole: false,
            },
            Impedance::Pole => ZReading {
                abs: None,
                arg_deg: None,
                pole: true,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub config: ConfigKind,
    pub experimental: bool,
    pub values: ValueSet,
    pub lossless: bool,
    pub zin_h_mod: ZReading,
    pub zin_l_mod: ZReading,
    pub zin_h_stop: ZReading,
    pub zin_l_stop: ZReading,
    /// `|Zin^H| / |Zin^L|` at `f_mod`, poles replaced by the model's cap.
    pub ratio_mod: f64,
    pub h_poles: Vec<f64>,
    pub zero: Option<f64>,
    /// Relative distance of the zero to the `f_mod` and `f_stop` poles.
    pub zero_to_mod_pole: Option<f64>,
    pub zero_to_stop_pole: Option<f64>,
    pub cancellation_risk: bool,
    pub checks: Vec<Check>,
    pub passed: bool,
}

fn nearest(poles: &[f64], target: f64) -> Option<f64> {
    poles
        .iter()
        .copied()
        .min_by(|a, b| (a / target).ln().abs().total_cmp(&(b / target).ln().abs()))
}

/// Evaluates a design against the ideal open/short requirements.
///
/// Lossless models are held to the exact conditions (pole at both carriers in
/// the high state, short at `f_mod` in the low state, pole at `f_stop` in
/// both). Lossy models must reach a high/low ratio of at least 100 at `f_mod`.
pub fn verify_design(
    d: &FilterDesign,
    values: ValueSet,
    loss: &LossModel,
) -> Result<VerificationReport, ImpedanceError> {
    let (fm, fs) = (d.spec.f_mod, d.spec.f_stop);
    let z = |f, s| d.zin(f, s, values, loss);
    let (zh_m, zl_m, zh_s, zl_s) = (
        z(fm, Level::High)?,
        z(fm, Level::Low)?,
        z(fs, Level::High)?,
        z(fs, Level::Low)?,
    );
    let cap = loss.pole_cap;
    let ratio_mod = zh_m.or_cap(cap).norm() / zl_m.or_cap(cap).norm();

    let (lo, hi) = (fm.min(fs), fm.max(fs));
    let found = find_poles_zeros(|f| z(f, Level::High), lo / 2.0, hi * 2.0, 4000)?;
    let h_poles: Vec<f64> = found
        .iter()
        .filter(|s| s.kind == SingularityKind::Pole)
        .map(|s| s.frequency)
        .collect();
    let pole_mod = nearest(&h_poles, fm);
    let pole_stop = nearest(&h_poles, fs);
    let zero = match (pole_mod, pole_stop) {
        (Some(a), Some(b)) if a != b => {
            let (a, b) = (a.min(b), a.max(b));
            let between: Vec<f64> = found
                .iter()
                .filter(|s| s.kind == SingularityKind::Zero && s.frequency > a && s.frequency < b)
                .map(|s| s.frequency)
                .collect();
            (between.len() == 1).then(|| between[0])
        }
        _ => None,
    };
    let dist = |p: Option<f64>| zero.zip(p).map(|(z, p)| (z / p - 1.0).abs());
    let zero_to_mod_pole = dist(pole_mod);
    let zero_to_stop_pole = dist(pole_stop);
    let cancellation_risk = [zero_to_mod_pole, zero_to_stop_pole]
        .into_iter()
        .flatten()
        .any(|r| r < CANCELLATION_BAND);

    let lossless = loss.is_lossless();
    let mut checks = Vec::new();
    if lossless {
        let l_abs = zl_m.norm();
        checks.push(Check {
            name: "low_state_short",
            passed: l_abs <= MAX_IDEAL_SHORT_OHMS,
            detail: format!("|Zin^L(f_mod)| = {l_abs:.3e} Ohm"),
        });
        checks.push(Check {
            name: "high_state_open",
            passed: zh_m.is_pole(),
            detail: format!("Zin^H(f_mod) = {zh_m}"),
        });
        checks.push(Check {
            name: "stop_band_open",
            passed: zh_s.is_pole() && zl_s.is_pole(),
            detail: format!("Zin^H(f_stop) = {zh_s}, Zin^L(f_stop) = {zl_s}"),
        });
    } else {
        checks.push(Check {
            name: "modulation_ratio",
            passed: ratio_mod >= MIN_LOSSY_RATIO,
            detail: format!("|Zin^H|/|Zin^L| at f_mod = {ratio_mod:.1}"),
        });
    }
    checks.push(Check {
        name: "zero_separation",
        passed: zero.is_some() && !cancellation_risk,
        detail: match zero {
            Some(z) => format!(
                "zero at {:.4} MHz, {:.1}% from the f_mod pole and {:.1}% from the f_stop pole",
                z / 1e6,
                100.0 * zero_to_mod_pole.unwrap_or(f64::NAN),
                100.0 * zero_to_stop_pole.unwrap_or(f64::NAN)
            ),
            None => "no single zero found between the high-state poles".to_string(),
        },
    });
    let passed = checks.iter().all(|c| c.passed);
    Ok(VerificationReport {
        config: d.config,
        experimental: d.experimental,
        values,
        lossless,
        zin_h_mod: zh_m.into(),
        zin_l_mod: zl_m.into(),
        zin_h_stop: zh_s.into(),
        zin_l_stop: zl_s.into(),
        ratio_mod,
        h_poles,
        zero,
        zero_to_mod_pole,
        zero_to_stop_pole,
        cancellation_risk,
        checks,
        passed,
    })
}
