use std::path::PathBuf;

use clap::{Args, ValueEnum};
use passmod_core::analysis::{sweep, write_sweep_csv, SCHEMA_VERSION};
use passmod_core::config::quantity;
use passmod_core::impedance::SweepScale;
use passmod_core::synth::ValueSet;
use passmod_core::units::{format_si, Dimension};
use passmod_core::Level;

use crate::design::load;
use crate::error::CliError;
use crate::output::{emit, json, say, stem};
use crate::{Format, LossArgs, OutArgs};

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Values {
    Exact,
    Snapped,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Scale {
    Log,
    Linear,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Filter spec file.
    pub spec: PathBuf,
    #[arg(long, default_value = "1MHz")]
    pub f_lo: String,
    #[arg(long, default_value = "100MHz")]
    pub f_hi: String,
    #[arg(long, default_value_t = 801)]
    pub points: usize,
    #[arg(long, value_enum, default_value = "snapped")]
    pub values: Values,
    #[arg(long, value_enum, default_value = "log")]
    pub scale: Scale,
    #[command(flatten)]
    pub out: OutArgs,
    #[command(flatten)]
    pub loss: LossArgs,
}

pub fn run(args: &SweepArgs) -> Result<(), CliError> {
    let loss = args.loss.model()?;
    let (name, d) = load(&args.spec)?;
    let f_lo = quantity(&args.f_lo, Dimension::Frequency)?;
    let f_hi = quantity(&args.f_hi, Dimension::Frequency)?;
    if args.points < 2 {
        return Err(CliError::Input("--points must be at least 2".into()));
    }
    if !(f_lo > 0.0 && f_hi > f_lo) {
        return Err(CliError::Input("need 0 < --f-lo < --f-hi".into()));
    }
    let values = match args.values {
        Values::Exact => ValueSet::Exact,
        Values::Snapped => ValueSet::Snapped,
    };
    let scale = match args.scale {
        Scale::Log => SweepScale::Log,
        Scale::Linear => SweepScale::Linear,
    };
    let res = sweep(&d, values, &loss, f_lo, f_hi, args.points, scale).map_err(|e| CliError::Runtime(e.to_string()))?;

    let fm = d.spec.f_mod;
    let at = |s| d.zin(fm, s, values, &loss).map(|z| z.or_cap(loss.pole_cap).norm());
    let (zh, zl) = (at(Level::High), at(Level::Low));
    let (zh, zl) = (
        zh.map_err(|e| CliError::Runtime(e.to_string()))?,
        zl.map_err(|e| CliError::Runtime(e.to_string()))?,
    );
    say(
        &args.out,
        &format!(
            "{name}: |Zin^H|/|Zin^L| at f_mod {} = {:.1} ({} / {})",
            format_si(fm, "Hz"),
            zh / zl,
            format_si(zh, "Ohm"),
            format_si(zl, "Ohm")
        ),
    );
    for m in &res.markers {
        say(
            &args.out,
            &format!("  {:?} {:?} near {}", m.state, m.kind, format_si(m.frequency, "Hz")),
        );
    }

    let stem = stem(&args.spec);
    match args.out.format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_sweep_csv(&res, &mut buf)?;
            emit(&args.out, &format!("{stem}.sweep.csv"), &buf)?;
        }
        Format::Json => {
            let doc = serde_json::json!({
                "schema_version": SCHEMA_VERSION,
                "name": name,
                "values": values,
                "loss": loss,
                "ratio_at_f_mod": zh / zl,
                "sweep": res,
            });
            emit(&args.out, &format!("{stem}.sweep.json"), &json(&doc)?)?;
        }
    }
    Ok(())
}
