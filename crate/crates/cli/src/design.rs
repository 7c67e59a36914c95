use std::path::PathBuf;

use clap::Args;
use passmod_core::analysis::{LossModel, SCHEMA_VERSION};
use passmod_core::config::parse_filter_spec;
use passmod_core::synth::{synthesize, verify_design, FilterDesign, PartKind, ValueSet, VerificationReport};
use passmod_core::units::format_si;
use serde::Serialize;

use crate::error::CliError;
use crate::output::{csv_table, emit, json, read, say, stem};
use crate::{Format, LossArgs, OutArgs};

#[derive(Args, Debug)]
pub struct DesignArgs {
    /// Filter spec files.
    #[arg(required = true)]
    pub specs: Vec<PathBuf>,
    #[command(flatten)]
    pub out: OutArgs,
    /// Model used to verify the snapped values; exact values are always
    /// checked lossless.
    #[command(flatten)]
    pub loss: LossArgs,
}

#[derive(Serialize)]
struct DesignFile<'a> {
    schema_version: u32,
    name: &'a str,
    design: &'a FilterDesign,
    /// Exact values, ideal elements.
    exact: &'a VerificationReport,
    /// Catalog values under the chosen loss model.
    snapped: &'a VerificationReport,
    snapped_loss: LossModel,
}

pub fn unit(kind: PartKind) -> &'static str {
    match kind {
        PartKind::Inductor => "H",
        PartKind::Capacitor => "F",
    }
}

pub fn load(path: &std::path::Path) -> Result<(String, FilterDesign), CliError> {
    let (name, spec) =
        parse_filter_spec(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let design = synthesize(&spec).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok((name.unwrap_or_else(|| stem(path)), design))
}

pub fn run(args: &DesignArgs) -> Result<(), CliError> {
    let loss = args.loss.model()?;
    let mut failed = Vec::new();
    for path in &args.specs {
        let (name, d) = load(path)?;
        let exact =
            verify_design(&d, ValueSet::Exact, &LossModel::lossless()).map_err(|e| CliError::Runtime(e.to_string()))?;
        let snapped = verify_design(&d, ValueSet::Snapped, &loss).map_err(|e| CliError::Runtime(e.to_string()))?;

        say(
            &args.out,
            &format!("{name}: configuration {}, alpha {:.4}", d.config, d.alpha),
        );
        for c in &d.components {
            say(
                &args.out,
                &format!(
                    "  {:<3} {:>12} -> {:>10}",
                    c.name,
                    format_si(c.exact, unit(c.kind)),
                    format_si(c.snapped, unit(c.kind))
                ),
            );
        }
        say(
            &args.out,
            &format!(
                "  exact lossless check {}, snapped ratio at f_mod {:.1} ({})",
                pass(exact.passed),
                snapped.ratio_mod,
                pass(snapped.passed)
            ),
        );
        if !exact.passed || !snapped.passed {
            failed.push(name.clone());
        }

        let stem = stem(path);
        match args.out.format {
            Format::Json => {
                let file = DesignFile {
                    schema_version: SCHEMA_VERSION,
                    name: &name,
                    design: &d,
                    exact: &exact,
                    snapped: &snapped,
                    snapped_loss: loss,
                };
                emit(&args.out, &format!("{stem}.design.json"), &json(&file)?)?;
            }
            Format::Csv => {
                let rows = d.components.iter().map(|c| {
                    vec![
                        c.name.clone(),
                        unit(c.kind).to_string(),
                        format!("{:.6e}", c.exact),
                        format!("{:.6e}", c.snapped),
                    ]
                });
                emit(
                    &args.out,
                    &format!("{stem}.design.csv"),
                    &csv_table(&["component", "unit", "exact", "snapped"], rows)?,
                )?;
                let reports = serde_json::json!({
                    "schema_version": SCHEMA_VERSION, "exact": exact, "snapped": snapped,
                });
                emit(&args.out, &format!("{stem}.report.json"), &json(&reports)?)?;
            }
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Runtime(format!(
            "verification failed for {}",
            failed.join(", ")
        )))
    }
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "passed"
    } else {
        "FAILED"
    }
}
