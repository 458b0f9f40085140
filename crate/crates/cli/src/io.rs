use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde_json::Value;

/// One CSV table of a run.
pub struct Table {
    pub name: &'static str,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &'static str, header: &[&str], rows: Vec<Vec<String>>) -> Self {
        Table { name, header: header.iter().map(|s| s.to_string()).collect(), rows }
    }
}

pub struct Run {
    pub report: Value,
    pub tables: Vec<Table>,
    pub passed: bool,
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| {
        anyhow::anyhow!("{}: malformed JSON at line {}, column {}: {}", path.display(), e.line(), e.column(), e)
    })
}

/// `(degree, norm)` rows of a CSV with a header line.
pub fn read_norms_csv(path: &Path) -> Result<Vec<(usize, f64)>> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut out = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record.with_context(|| format!("{}: bad CSV record {}", path.display(), idx + 1))?;
        if record.len() < 2 {
            bail!("{}: line {} needs degree and norm", path.display(), idx + 2);
        }
        let degree = record[0]
            .trim()
            .parse()
            .with_context(|| format!("{}: line {}: degree must be a nonnegative integer", path.display(), idx + 2))?;
        let norm = record[1]
            .trim()
            .parse()
            .with_context(|| format!("{}: line {}: norm must be a number", path.display(), idx + 2))?;
        out.push((degree, norm));
    }
    Ok(out)
}

/// Writes `report.json` and the tables into `dir`, or prints the report.
pub fn emit(run: &Run, dir: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(&run.report)? + "\n";
    let Some(dir) = dir else {
        print!("{text}");
        return Ok(());
    };
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    fs::write(dir.join("report.json"), text)?;
    for table in &run.tables {
        let path = dir.join(format!("{}.csv", table.name));
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("cannot write {}", path.display()))?;
        w.write_record(&table.header)?;
        for row in &table.rows {
            w.write_record(row)?;
        }
        w.flush()?;
    }
    Ok(())
}
