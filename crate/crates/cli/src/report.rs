use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::CliError;

pub const SCHEMA: &str = "v1";

/// One line of a PASS/FAIL summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub check: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_least(check: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            check: check.into(),
            value,
            threshold,
            pass: value >= threshold,
        }
    }

    pub fn at_most(check: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            check: check.into(),
            value,
            threshold,
            pass: value <= threshold,
        }
    }

    /// A yes/no property, recorded as value 1 or 0 against threshold 1.
    pub fn holds(check: impl Into<String>, ok: bool) -> Self {
        Self {
            check: check.into(),
            value: f64::from(u8::from(ok)),
            threshold: 1.0,
            pass: ok,
        }
    }
}

/// Raw rows, checks and extra files of one command run.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub command: String,
    pub seed: u64,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub checks: Vec<Check>,
    /// Additional CSV files as `(name, contents)`.
    pub files: Vec<(String, String)>,
}

impl Report {
    pub fn new(command: &str, seed: u64, columns: &[&str]) -> Self {
        Self {
            command: command.into(),
            seed,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Default::default()
        }
    }

    pub fn row<I, S>(&mut self, cells: I)
    where
        I: IntoIterator<Item = S>,
        S: ToString,
    {
        self.rows
            .push(cells.into_iter().map(|c| c.to_string()).collect());
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    pub fn csv(&self) -> Result<String, CliError> {
        let mut out = format!(
            "# schema={SCHEMA}\n# command={} seed={}\n",
            self.command, self.seed
        )
        .into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(&self.columns)?;
            for r in &self.rows {
                w.write_record(r)?;
            }
            w.flush()?;
        }
        String::from_utf8(out).map_err(|e| CliError::Io(e.to_string()))
    }

    pub fn summary_json(&self, config: &impl Serialize) -> Result<String, CliError> {
        let doc = serde_json::json!({
            "schema": SCHEMA,
            "command": self.command,
            "seed": self.seed,
            "pass": self.pass(),
            "checks": self.checks,
            "config": config,
        });
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    /// Writes `results.csv`, `summary.json` and the extra files into `dir`.
    pub fn write(&self, dir: &Path, config: &impl Serialize) -> Result<Vec<PathBuf>, CliError> {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        let mut files = vec![
            ("results.csv".to_string(), self.csv()?),
            ("summary.json".to_string(), self.summary_json(config)?),
        ];
        for (name, body) in &self.files {
            files.push((
                name.clone(),
                format!(
                    "# schema={SCHEMA}\n# command={} seed={}\n{body}",
                    self.command, self.seed
                ),
            ));
        }
        let mut written = Vec::new();
        for (name, body) in files {
            let path = dir.join(name);
            let mut f = std::fs::File::create(&path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            f.write_all(body.as_bytes())
                .map_err(|e| CliError::Io(e.to_string()))?;
            written.push(path);
        }
        Ok(written)
    }
}
