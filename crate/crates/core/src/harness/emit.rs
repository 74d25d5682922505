use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::Formatter;

use super::config::{ExperimentConfig, OutputFormat};
use super::run::{Action, RunRecord};
use super::sweep::SweepTable;
use super::commit_tag;
use crate::error::{Error, Result};

/// Compact JSON with every float written to 17 significant digits.
struct Precise;

impl Formatter for Precise {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        write!(writer, "{:.16e}", value as f64)
    }
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Precise);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

fn float(v: f64) -> String {
    format!("{v:.16e}")
}

fn vector(v: &[f64]) -> String {
    v.iter().map(|x| float(*x)).collect::<Vec<_>>().join(";")
}

fn opt(v: Option<f64>) -> String {
    v.map(float).unwrap_or_default()
}

pub fn write_record_csv<W: Write>(record: &RunRecord, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "t",
        "action",
        "loss",
        "expected_loss",
        "variance",
        "prediction",
        "iterate",
        "loss_vector",
    ])?;
    for r in &record.rows {
        let action = match &r.action {
            Action::Arm(i) => i.to_string(),
            Action::Point(p) => vector(p),
        };
        w.write_record([
            r.t.to_string(),
            action,
            float(r.loss),
            float(r.expected_loss),
            float(r.variance),
            vector(&r.prediction),
            vector(&r.iterate),
            r.loss_vector.as_deref().map(vector).unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_sweep_csv<W: Write>(table: &SweepTable, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let keys: Vec<String> = table
        .cells
        .first()
        .map(|c| c.params.keys().cloned().collect())
        .unwrap_or_default();
    let mut header = keys.clone();
    header.extend(
        [
            "seeds",
            "completed",
            "failed",
            "mean_regret",
            "stderr_regret",
            "mean_expected_regret",
            "stderr_expected_regret",
            "mean_v1",
            "mean_v2",
            "mean_vinf",
            "errors",
        ]
        .map(String::from),
    );
    w.write_record(&header)?;
    for c in &table.cells {
        let mut row: Vec<String> = keys
            .iter()
            .map(|k| match c.params.get(k) {
                Some(serde_json::Value::String(s)) => s.clone(),
                Some(serde_json::Value::Number(n)) => n
                    .as_f64()
                    .filter(|_| n.is_f64())
                    .map(float)
                    .unwrap_or_else(|| n.to_string()),
                Some(v) => v.to_string(),
                None => String::new(),
            })
            .collect();
        row.push(c.seeds.len().to_string());
        row.push(c.completed.to_string());
        row.push(c.failures.len().to_string());
        for v in [
            c.mean_regret,
            c.stderr_regret,
            c.mean_expected_regret,
            c.stderr_expected_regret,
            c.mean_v1,
            c.mean_v2,
            c.mean_vinf,
        ] {
            row.push(opt(v));
        }
        row.push(
            c.failures
                .iter()
                .map(|f| format!("seed {}: {}", f.seed, f.message))
                .collect::<Vec<_>>()
                .join("; "),
        );
        w.write_record(&row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[derive(Serialize)]
struct SweepMeta<'a> {
    config: &'a ExperimentConfig,
    seeds: &'a [u64],
    commit: &'a str,
}

#[derive(Serialize)]
struct SweepSummary {
    cells: usize,
    failures: usize,
}

#[derive(Serialize)]
struct SweepDocument<'a> {
    meta: SweepMeta<'a>,
    summary: SweepSummary,
    rows: &'a [super::sweep::SweepCell],
}

fn open(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|source| Error::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    File::create(path).map(BufWriter::new).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn finish<W: Write>(mut w: W, path: &Path) -> Result<()> {
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes a run as JSON (`meta`, `summary`, `rows`) or per-round CSV.
pub fn emit_record<W: Write>(record: &RunRecord, format: OutputFormat, mut writer: W) -> Result<()> {
    match format {
        OutputFormat::Json => {
            let text = to_json_string(record)?;
            writeln!(writer, "{text}").map_err(|source| Error::Io {
                path: "<output>".into(),
                source,
            })
        }
        OutputFormat::Csv => write_record_csv(record, writer),
    }
}

/// Writes a sweep as JSON or one CSV row per cell.
pub fn emit_sweep<W: Write>(
    base: &ExperimentConfig,
    table: &SweepTable,
    format: OutputFormat,
    mut writer: W,
) -> Result<()> {
    match format {
        OutputFormat::Json => {
            let doc = SweepDocument {
                meta: SweepMeta {
                    config: base,
                    seeds: &base.seeds,
                    commit: commit_tag(),
                },
                summary: SweepSummary {
                    cells: table.cells.len(),
                    failures: table.cells.iter().map(|c| c.failures.len()).sum(),
                },
                rows: &table.cells,
            };
            let text = to_json_string(&doc)?;
            writeln!(writer, "{text}").map_err(|source| Error::Io {
                path: "<output>".into(),
                source,
            })
        }
        OutputFormat::Csv => write_sweep_csv(table, writer),
    }
}

/// Opens `path` for writing (creating parent directories) and runs `f` on it.
pub fn with_file<F>(path: &Path, f: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    let mut w = open(path)?;
    f(&mut w).map_err(|e| match e {
        Error::Io { source, .. } => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => other,
    })?;
    finish(w, path)
}
