//! CSV/JSON emission with fixed schemas.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::ResolvedConfig;

/// 17 significant digits: round-trip exact for f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub enum Sink {
    Stdout,
    File(BufWriter<File>),
}

impl Sink {
    pub fn create(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Sink::Stdout),
            Some(p) => {
                let f = File::create(p)
                    .with_context(|| format!("cannot write output file {}", p.display()))?;
                Ok(Sink::File(BufWriter::new(f)))
            }
        }
    }

    pub fn write_line(&mut self, line: &str) -> Result<()> {
        match self {
            Sink::Stdout => {
                println!("{line}");
                Ok(())
            }
            Sink::File(w) => {
                w.write_all(line.as_bytes())?;
                w.write_all(b"\n")?;
                Ok(())
            }
        }
    }

    pub fn finish(self) -> Result<()> {
        if let Sink::File(mut w) = self {
            w.flush()?;
        }
        Ok(())
    }
}

/// Persist the resolved config next to a file output
/// (`<output>.config.json`); stdout runs skip the sidecar.
pub fn write_sidecar(output: Option<&Path>, cfg: &ResolvedConfig) -> Result<()> {
    if let Some(path) = output {
        let sidecar = path.with_file_name(format!(
            "{}.config.json",
            path.file_name().unwrap_or_default().to_string_lossy()
        ));
        std::fs::write(&sidecar, serde_json::to_string_pretty(cfg)?)
            .with_context(|| format!("cannot write sidecar {}", sidecar.display()))?;
    }
    Ok(())
}

pub fn print_json<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digit_floats_round_trip() {
        for x in [
            0.34723308884581194,
            1.0 / 3.0,
            2.2495454545454545,
            -1.9532771618e-7,
            1e6,
        ] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
    }
}
