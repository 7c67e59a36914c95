use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::CliError;
use crate::OutArgs;

/// Writes `bytes` to `<out>/<file>` or, without `--out`, to stdout.
pub fn emit(out: &OutArgs, file: &str, bytes: &[u8]) -> Result<(), CliError> {
    match &out.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let path = dir.join(file);
            std::fs::write(&path, bytes)?;
            eprintln!("wrote {}", path.display());
        }
        None => {
            let mut s = std::io::stdout().lock();
            s.write_all(bytes)?;
            s.flush()?;
        }
    }
    Ok(())
}

pub fn json<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}

/// A CSV table preceded by the schema comment line.
pub fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>, CliError> {
    let mut buf = format!("# schema_version: {}\n", passmod_core::analysis::SCHEMA_VERSION).into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
    }
    Ok(buf)
}

pub fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read `{}`: {e}", path.display())))
}

/// File stem used to name outputs.
pub fn stem(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| "out".into(), |s| s.to_string_lossy().into_owned())
}

/// A summary line: stdout when results go to files, stderr otherwise.
pub fn say(out: &OutArgs, line: &str) {
    if out.out.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}
