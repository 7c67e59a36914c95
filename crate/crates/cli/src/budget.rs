use std::path::PathBuf;

use clap::Args;
use passmod_core::analysis::{budget, multinode_ratio, SCHEMA_VERSION};
use passmod_core::config::{parse_network, quantity};
use passmod_core::synth::ValueSet;
use passmod_core::units::{format_si, Dimension};
use passmod_core::Level;

use crate::design::load;
use crate::error::CliError;
use crate::output::{csv_table, emit, json, say, stem};
use crate::sweep::Values;
use crate::{Format, LossArgs, OutArgs};

#[derive(Args, Debug)]
pub struct BudgetArgs {
    /// Filter spec file.
    pub spec: PathBuf,
    /// Pull-up network between the carrier source and the line.
    #[arg(long, default_value = "2kOhm")]
    pub pullup: String,
    /// Largest node count to tabulate.
    #[arg(long, default_value_t = 64)]
    pub nodes: usize,
    #[arg(long, default_value = "6dB")]
    pub min_depth: String,
    #[arg(long, value_enum, default_value = "snapped")]
    pub values: Values,
    #[command(flatten)]
    pub out: OutArgs,
    #[command(flatten)]
    pub loss: LossArgs,
}

pub fn run(args: &BudgetArgs) -> Result<(), CliError> {
    let loss = args.loss.model()?;
    let (name, d) = load(&args.spec)?;
    let min_depth = quantity(&args.min_depth, Dimension::Decibel)?;
    if args.nodes == 0 {
        return Err(CliError::Input("--nodes must be at least 1".into()));
    }
    let values = match args.values {
        Values::Exact => ValueSet::Exact,
        Values::Snapped => ValueSet::Snapped,
    };
    let fm = d.spec.f_mod;
    let runtime = |e: passmod_core::impedance::ImpedanceError| CliError::Runtime(e.to_string());
    let z_h = d
        .zin(fm, Level::High, values, &loss)
        .map_err(runtime)?
        .or_cap(loss.pole_cap);
    let z_l = d
        .zin(fm, Level::Low, values, &loss)
        .map_err(runtime)?
        .or_cap(loss.pole_cap);
    let z_p = parse_network(&args.pullup)?
        .impedance(fm)
        .map_err(runtime)?
        .finite()
        .ok_or_else(|| CliError::Input("the pull-up is open at f_mod".into()))?;
    let b = budget(z_h, z_l, z_p, args.nodes, min_depth);

    say(
        &args.out,
        &format!(
            "{name}: single-node ratio {:.2} ({:.2} dB) through {}, n_max {} at {} dB",
            b.ratio_single,
            b.depth_single_db,
            format_si(z_p.norm(), "Ohm"),
            b.n_max,
            min_depth
        ),
    );

    let stem = stem(&args.spec);
    match args.out.format {
        Format::Json => {
            let doc = serde_json::json!({ "schema_version": SCHEMA_VERSION, "name": name, "budget": b });
            emit(&args.out, &format!("{stem}.budget.json"), &json(&doc)?)?;
        }
        Format::Csv => {
            let rows = b.ratio_n.iter().map(|&(n, r)| {
                let m = multinode_ratio(z_h, z_l, n);
                vec![
                    n.to_string(),
                    format!("{r:.9e}"),
                    format!("{:.6}", 20.0 * r.log10()),
                    format!("{:.9e}", m.exact),
                    format!("{:.9e}", m.approx),
                ]
            });
            emit(
                &args.out,
                &format!("{stem}.budget.csv"),
                &csv_table(
                    &["n", "ratio_with_pullup", "depth_db", "ratio_joint", "ratio_approx"],
                    rows,
                )?,
            )?;
        }
    }
    Ok(())
}
