use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

/// Round-trip formatting for binary64 (17 significant digits).
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Destination for a command's outputs: a directory, or stdout for the JSON report.
pub struct Sink {
    dir: Option<PathBuf>,
}

impl Sink {
    pub fn new(dir: Option<PathBuf>) -> Result<Self> {
        if let Some(d) = &dir {
            fs::create_dir_all(d).with_context(|| format!("creating {}", d.display()))?;
        }
        Ok(Self { dir })
    }

    fn path(&self, name: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(name))
    }

    pub fn report<T: Serialize>(&self, report: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(report)?;
        text.push('\n');
        match self.path("report.json") {
            Some(p) => write(&p, text.as_bytes()),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    /// Writes `name` as CSV when an output directory is set.
    pub fn csv<I>(&self, name: &str, header: &[&str], rows: I) -> Result<()>
    where
        I: IntoIterator<Item = Vec<f64>>,
    {
        let Some(p) = self.path(name) else {
            return Ok(());
        };
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for row in rows {
            w.write_record(row.into_iter().map(float))?;
        }
        let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
        write(&p, &bytes)
    }

    pub fn describe(&self) -> Option<&Path> {
        self.dir.as_deref()
    }
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}
