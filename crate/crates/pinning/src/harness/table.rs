use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;

/// Value columns of the ensemble experiments.
pub const STANDARD_COLUMNS: [&str; 5] = ["sup_distance", "area", "fourier", "contacts", "termination"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub l: usize,
    pub seed: u64,
    pub t: f64,
    pub values: Vec<Option<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub name: String,
    pub mean: f64,
    pub stderr: Option<f64>,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Criterion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Extra output file produced alongside the table.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub file: String,
    pub content: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultTable {
    pub experiment: String,
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
    pub summaries: Vec<Summary>,
    pub criteria: Vec<Criterion>,
    pub artifacts: Vec<Artifact>,
}

impl ResultTable {
    pub fn new(experiment: impl Into<String>, columns: &[&str]) -> Self {
        Self {
            experiment: experiment.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            summaries: Vec::new(),
            criteria: Vec::new(),
            artifacts: Vec::new(),
        }
    }

    pub fn standard(experiment: impl Into<String>) -> Self {
        Self::new(experiment, &STANDARD_COLUMNS)
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Appends a row; `values` are matched to columns by name.
    pub fn push(&mut self, l: usize, seed: u64, t: f64, values: &[(&str, f64)]) {
        let mut row = vec![None; self.columns.len()];
        for (name, v) in values {
            let i = self.column(name).unwrap_or_else(|| panic!("no column {name:?}"));
            row[i] = Some(*v);
        }
        self.rows.push(Row { l, seed, t, values: row });
    }

    /// Mean and standard error of `samples` under `name`.
    pub fn summarize(&mut self, name: impl Into<String>, samples: &[f64]) -> Summary {
        let n = samples.len();
        let mean = if n == 0 { f64::NAN } else { samples.iter().sum::<f64>() / n as f64 };
        let stderr = (n > 1).then(|| {
            let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        });
        let s = Summary { name: name.into(), mean, stderr, n };
        self.summaries.push(s.clone());
        s
    }

    pub fn note(&mut self, name: impl Into<String>, value: f64) {
        self.summaries.push(Summary { name: name.into(), mean: value, stderr: None, n: 1 });
    }

    pub fn criterion(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) -> bool {
        self.criteria.push(Criterion { name: name.into(), passed, detail: detail.into() });
        passed
    }

    pub fn artifact(&mut self, file: impl Into<String>, content: String) {
        self.artifacts.push(Artifact { file: file.into(), content });
    }

    pub fn all_pass(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }

    pub fn values(&self, column: &str) -> Vec<f64> {
        let Some(i) = self.column(column) else { return Vec::new() };
        self.rows.iter().filter_map(|r| r.values[i]).collect()
    }

    pub fn to_csv(&self, provenance: &Provenance) -> String {
        let mut out = provenance.header();
        out.push_str("l,seed,t");
        for c in &self.columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for r in &self.rows {
            let _ = write!(out, "{},{},{}", r.l, r.seed, r.t);
            for v in &r.values {
                match v {
                    Some(v) => {
                        let _ = write!(out, ",{v}");
                    }
                    None => out.push(','),
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn summary_text(&self, provenance: &Provenance) -> String {
        let mut out = provenance.header();
        for s in &self.summaries {
            match s.stderr {
                Some(se) => {
                    let _ = writeln!(out, "{} = {} ± {} (n = {})", s.name, s.mean, se, s.n);
                }
                None => {
                    let _ = writeln!(out, "{} = {}", s.name, s.mean);
                }
            }
        }
        for c in &self.criteria {
            let _ = writeln!(out, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
        out
    }
}

/// Where a table came from; written as `#` comment lines.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Provenance {
    pub config_hash: String,
    pub seed_first: u64,
    pub seed_last: u64,
    pub version: String,
}

impl Provenance {
    pub fn header(&self) -> String {
        format!(
            "# config_hash={}\n# seeds={}..={}\n# version=pinning {}\n",
            self.config_hash, self.seed_first, self.seed_last, self.version
        )
    }
}

/// Writes `<experiment>.csv`, `<experiment>.summary.txt` and the artifacts
/// into `dir`, returning the paths written.
pub fn emit(table: &ResultTable, provenance: &Provenance, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut put = |name: String, content: &str| -> Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, content)?;
        written.push(path);
        Ok(())
    };
    put(format!("{}.csv", table.experiment), &table.to_csv(provenance))?;
    put(format!("{}.summary.txt", table.experiment), &table.summary_text(provenance))?;
    for a in &table.artifacts {
        put(a.file.clone(), &a.content)?;
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prov() -> Provenance {
        Provenance { config_hash: "abc".into(), seed_first: 0, seed_last: 9, version: "0.1.0".into() }
    }

    #[test]
    fn empty_table_is_header_only() {
        let t = ResultTable::standard("e");
        let csv = t.to_csv(&prov());
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.ends_with("l,seed,t,sup_distance,area,fourier,contacts,termination\n"));
    }

    #[test]
    fn rows_and_summaries() {
        let mut t = ResultTable::standard("e");
        t.push(64, 3, 0.5, &[("area", 1.5), ("contacts", 2.0)]);
        assert!(t.to_csv(&prov()).ends_with("64,3,0.5,,1.5,,2,\n"));
        let s = t.summarize("m", &[1.0, 2.0, 3.0]);
        assert_eq!(s.mean, 2.0);
        assert!((s.stderr.unwrap() - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        t.criterion("c", false, "why");
        assert!(!t.all_pass());
        assert!(t.summary_text(&prov()).contains("FAIL c: why"));
    }

    #[test]
    fn emit_writes_files() {
        let dir = std::env::temp_dir().join(format!("pinning-emit-{}", std::process::id()));
        let mut t = ResultTable::standard("e");
        t.artifact("extra.csv", "x\n".into());
        let paths = emit(&t, &prov(), &dir).unwrap();
        assert_eq!(paths.len(), 3);
        assert_eq!(std::fs::read_to_string(dir.join("extra.csv")).unwrap(), "x\n");
        std::fs::remove_dir_all(dir).unwrap();
    }
}
