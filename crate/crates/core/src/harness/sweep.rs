use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::config::{set_path, ExperimentConfig};
use super::run::{run, Summary};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub seed: u64,
    pub kind: String,
    pub message: String,
}

/// Aggregate over the seeds of one grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub params: BTreeMap<String, Value>,
    pub seeds: Vec<u64>,
    pub completed: usize,
    pub mean_regret: Option<f64>,
    /// Standard error of the mean; needs two completed seeds.
    pub stderr_regret: Option<f64>,
    pub mean_expected_regret: Option<f64>,
    pub stderr_expected_regret: Option<f64>,
    pub mean_v1: Option<f64>,
    pub mean_v2: Option<f64>,
    pub mean_vinf: Option<f64>,
    pub failures: Vec<CellFailure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub cells: Vec<SweepCell>,
}

/// Cross product of the grid, in key order then value order.
pub fn expand_grid(base: &ExperimentConfig) -> Result<Vec<(BTreeMap<String, Value>, ExperimentConfig)>> {
    let mut combos: Vec<BTreeMap<String, Value>> = vec![BTreeMap::new()];
    for (key, values) in &base.grid {
        if values.is_empty() {
            return Err(Error::Config(format!("grid key {key:?} has no values")));
        }
        combos = combos
            .into_iter()
            .flat_map(|c| {
                values.iter().map(move |v| {
                    let mut c = c.clone();
                    c.insert(key.clone(), v.clone());
                    c
                })
            })
            .collect();
    }
    let mut template = base.clone();
    template.grid.clear();
    let template = serde_json::to_value(&template)?;
    combos
        .into_iter()
        .map(|params| {
            let mut v = template.clone();
            for (k, val) in &params {
                set_path(&mut v, k, val.clone())?;
            }
            let mut config = ExperimentConfig::from_value(v)?;
            config.diagnostics.rows = false;
            Ok((params, config))
        })
        .collect()
}

fn mean_stderr(xs: &[f64]) -> (Option<f64>, Option<f64>) {
    if xs.is_empty() {
        return (None, None);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (Some(mean), None);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (Some(mean), Some((var / n).sqrt()))
}

/// Runs every grid cell over the base seeds in parallel. A failing seed is
/// recorded in its cell and does not stop the sweep.
pub fn sweep(base: &ExperimentConfig) -> Result<SweepTable> {
    let cells = expand_grid(base)?;
    let jobs: Vec<(usize, u64)> = (0..cells.len())
        .flat_map(|c| base.seeds.iter().map(move |&s| (c, s)))
        .collect();
    let results: Vec<(usize, u64, std::result::Result<Summary, Error>)> = jobs
        .par_iter()
        .map(|&(c, s)| (c, s, run(&cells[c].1, s).map(|r| r.summary)))
        .collect();

    let mut out = Vec::with_capacity(cells.len());
    for (c, (params, _)) in cells.into_iter().enumerate() {
        let mut ok = Vec::new();
        let mut failures = Vec::new();
        for (_, seed, res) in results.iter().filter(|r| r.0 == c) {
            match res {
                Ok(s) => ok.push(s),
                Err(e) => failures.push(CellFailure {
                    seed: *seed,
                    kind: e.kind().to_string(),
                    message: e.to_string(),
                }),
            }
        }
        let regrets: Vec<f64> = ok.iter().map(|s| s.regret).collect();
        let expected: Vec<f64> = ok.iter().map(|s| s.expected_regret).collect();
        let (mean_regret, stderr_regret) = mean_stderr(&regrets);
        let (mean_expected_regret, stderr_expected_regret) = mean_stderr(&expected);
        let avg = |f: fn(&Summary) -> f64| mean_stderr(&ok.iter().map(|s| f(s)).collect::<Vec<_>>()).0;
        out.push(SweepCell {
            params,
            seeds: base.seeds.clone(),
            completed: ok.len(),
            mean_regret,
            stderr_regret,
            mean_expected_regret,
            stderr_expected_regret,
            mean_v1: avg(|s| s.path_lengths.v1),
            mean_v2: avg(|s| s.path_lengths.v2),
            mean_vinf: avg(|s| s.path_lengths.vinf),
            failures,
        });
    }
    Ok(SweepTable { cells: out })
}
