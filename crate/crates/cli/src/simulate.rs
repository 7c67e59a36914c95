use std::path::{Path, PathBuf};

use clap::Args;
use passmod_core::analysis::SCHEMA_VERSION;
use passmod_core::config::{parse_scenario, quantity};
use passmod_core::sim::{run_scenario, LinkMetrics, Noise, Scenario, ScenarioOutcome};
use passmod_core::units::Dimension;

use crate::error::CliError;
use crate::output::{csv_table, emit, json, read, say, stem};
use crate::{Format, OutArgs};

const DEMO_SCENARIO: &str = include_str!("../../../data/demo_scenario.toml");
const DEMO_FILES: &[(&str, &str)] = &[
    ("demo.script", include_str!("../../../data/demo.script")),
    ("filter_a.toml", include_str!("../../../data/filter_a.toml")),
    ("filter_b.toml", include_str!("../../../data/filter_b.toml")),
];

/// Options shared by `simulate` and `demo`.
#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Noise seed; overrides the scenario's.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Treat every configuration warning as an error.
    #[arg(long)]
    pub strict: bool,
    /// Noise RMS at the detector inputs, e.g. `2mV`; overrides the scenario's.
    #[arg(long)]
    pub noise: Option<String>,
    /// Comma-separated noise levels; runs a seed ensemble per level and
    /// reports mean BER instead of a single run.
    #[arg(long, value_delimiter = ',')]
    pub noise_sweep: Option<Vec<String>>,
    /// Seeds per noise level for `--noise-sweep`, starting at `--seed`.
    #[arg(long, default_value_t = 10)]
    pub seeds: u64,
    /// Also write per-sample line amplitudes and logic levels (needs `--out`).
    #[arg(long)]
    pub traces: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Scenario file; referenced files resolve relative to it.
    pub scenario: PathBuf,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Debug)]
pub struct DemoArgs {
    #[command(flatten)]
    pub run: RunArgs,
}

pub fn run(args: &SimulateArgs) -> Result<(), CliError> {
    let text = read(&args.scenario)?;
    let dir = args.scenario.parent().map(Path::to_path_buf).unwrap_or_default();
    let resolve = |name: &str| std::fs::read_to_string(dir.join(name)).map_err(|e| e.to_string());
    let sc = parse_scenario(&text, &resolve)?;
    execute(sc, &stem(&args.scenario), &args.run)
}

pub fn demo_scenario() -> Result<Scenario, CliError> {
    let resolve = |name: &str| {
        DEMO_FILES
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, t)| t.to_string())
            .ok_or_else(|| format!("`{name}` is not bundled"))
    };
    Ok(parse_scenario(DEMO_SCENARIO, &resolve)?)
}

pub fn demo(args: &DemoArgs) -> Result<(), CliError> {
    execute(demo_scenario()?, "demo", &args.run)
}

fn volts(s: &str) -> Result<f64, CliError> {
    let v = quantity(s, Dimension::Voltage)?;
    if v < 0.0 {
        return Err(CliError::Input(format!("noise RMS `{s}` is negative")));
    }
    Ok(v)
}

fn execute(mut sc: Scenario, stem: &str, args: &RunArgs) -> Result<(), CliError> {
    let mut noise = sc.noise.unwrap_or(Noise { seed: 0, rms: 0.0 });
    if let Some(seed) = args.seed {
        noise.seed = seed;
    }
    if let Some(n) = &args.noise {
        noise.rms = volts(n)?;
    }
    sc.noise = Some(noise);
    sc.strict |= args.strict;
    if args.traces && args.out.out.is_none() {
        return Err(CliError::Input("--traces needs --out".into()));
    }
    if let Some(levels) = &args.noise_sweep {
        let levels = levels.iter().map(|s| volts(s)).collect::<Result<Vec<_>, _>>()?;
        return noise_sweep(sc, stem, &levels, args);
    }
    sc.record_traces = args.traces;

    let out = run_scenario(&sc)?;
    report(&out, &args.out);
    let m = &out.metrics;
    match args.out.format {
        Format::Json => emit(&args.out, &format!("{stem}.metrics.json"), &json(m)?)?,
        Format::Csv => emit(&args.out, &format!("{stem}.metrics.csv"), &metrics_csv(m)?)?,
    }
    if let Some(t) = &out.traces {
        let bit = |l: passmod_core::Level| if l.is_high() { "1" } else { "0" }.to_string();
        let rows = (0..t.scl.len()).map(|i| {
            vec![
                format!("{:.9e}", i as f64 / t.sample_rate),
                format!("{:.9e}", t.scl_amplitude[i]),
                format!("{:.9e}", t.sda_amplitude[i]),
                bit(t.scl[i]),
                bit(t.sda[i]),
            ]
        });
        emit(
            &args.out,
            &format!("{stem}.traces.csv"),
            &csv_table(&["t_s", "scl_amplitude", "sda_amplitude", "scl", "sda"], rows)?,
        )?;
    }
    if m.transactions_succeeded < m.transactions_attempted {
        return Err(CliError::Runtime(format!(
            "{} of {} transactions failed",
            m.transactions_attempted - m.transactions_succeeded,
            m.transactions_attempted
        )));
    }
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:.6}"))
}

fn metrics_csv(m: &LinkMetrics) -> Result<Vec<u8>, CliError> {
    let rows = [("scl", &m.scl), ("sda", &m.sda)].map(|(name, c)| {
        vec![
            name.to_string(),
            c.bit_errors.to_string(),
            c.bits_compared.to_string(),
            format!("{:.9e}", c.ber),
            opt(c.eye_margin_v),
            opt(c.depth_db),
            m.transactions_attempted.to_string(),
            m.transactions_succeeded.to_string(),
            m.samples.to_string(),
            m.warnings.join(" | "),
        ]
    });
    csv_table(
        &[
            "channel",
            "bit_errors",
            "bits_compared",
            "ber",
            "eye_margin_v",
            "depth_db",
            "transactions_attempted",
            "transactions_succeeded",
            "samples",
            "warnings",
        ],
        rows,
    )
}

fn report(out: &ScenarioOutcome, args: &OutArgs) {
    let m = &out.metrics;
    for t in &out.decoded {
        let data = t.read.iter().map(|b| format!("{b:02X}")).collect::<Vec<_>>().join(" ");
        say(
            args,
            &format!(
                "0x{:02X} {:?} {} {}",
                t.address,
                t.direction,
                if t.completed { "ok  " } else { "FAIL" },
                data
            ),
        );
    }
    for (name, c) in [("SCL", &m.scl), ("SDA", &m.sda)] {
        say(
            args,
            &format!(
                "{name}: {} bit errors in {} ({:.3e}), depth {} dB, eye {} V",
                c.bit_errors,
                c.bits_compared,
                c.ber,
                opt(c.depth_db),
                opt(c.eye_margin_v)
            ),
        );
    }
    say(
        args,
        &format!(
            "success {}/{} over {} samples",
            m.transactions_succeeded, m.transactions_attempted, m.samples
        ),
    );
    for w in &m.warnings {
        say(args, &format!("warning: {w}"));
    }
}

#[derive(serde::Serialize)]
struct NoiseRow {
    noise_rms: f64,
    seeds: u64,
    mean_ber_scl: f64,
    mean_ber_sda: f64,
    mean_ber: f64,
    mean_success_rate: f64,
}

fn noise_sweep(sc: Scenario, stem: &str, levels: &[f64], args: &RunArgs) -> Result<(), CliError> {
    if args.seeds == 0 {
        return Err(CliError::Input("--seeds must be at least 1".into()));
    }
    let first = sc.noise.map_or(0, |n| n.seed);
    let mut rows = Vec::new();
    for &rms in levels {
        let (mut scl, mut sda, mut ok) = (0.0, 0.0, 0.0);
        for s in 0..args.seeds {
            let mut run = sc.clone();
            run.noise = Some(Noise { seed: first + s, rms });
            let m = run_scenario(&run)?.metrics;
            scl += m.scl.ber;
            sda += m.sda.ber;
            ok += m.success_rate;
        }
        let k = args.seeds as f64;
        let row = NoiseRow {
            noise_rms: rms,
            seeds: args.seeds,
            mean_ber_scl: scl / k,
            mean_ber_sda: sda / k,
            mean_ber: (scl + sda) / (2.0 * k),
            mean_success_rate: ok / k,
        };
        say(
            &args.out,
            &format!(
                "noise {:.3e} V: mean BER {:.3e}, success {:.3}",
                rms, row.mean_ber, row.mean_success_rate
            ),
        );
        rows.push(row);
    }
    match args.out.format {
        Format::Json => {
            let doc = serde_json::json!({ "schema_version": SCHEMA_VERSION, "rows": rows });
            emit(&args.out, &format!("{stem}.noise.json"), &json(&doc)?)
        }
        Format::Csv => {
            let table = rows.iter().map(|r| {
                vec![
                    format!("{:.6e}", r.noise_rms),
                    r.seeds.to_string(),
                    format!("{:.9e}", r.mean_ber_scl),
                    format!("{:.9e}", r.mean_ber_sda),
                    format!("{:.9e}", r.mean_ber),
                    format!("{:.6}", r.mean_success_rate),
                ]
            });
            emit(
                &args.out,
                &format!("{stem}.noise.csv"),
                &csv_table(
                    &[
                        "noise_rms",
                        "seeds",
                        "mean_ber_scl",
                        "mean_ber_sda",
                        "mean_ber",
                        "mean_success_rate",
                    ],
                    table,
                )?,
            )
        }
    }
}
