//! Batch solving of an instance directory into a CSV table.
//!
//! Rows are keyed by `(instance, k)`. An existing output file is read first
//! and its rows are kept, so an interrupted run can be resumed. The table is
//! always rewritten whole, sorted by instance file name and then `k`.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use ksrti_core::gen::{classify, lists_completeness, mutual_acceptability_rate};
use ksrti_core::solver::find_k_stable;
use ksrti_core::{k_extend, Budget, Instance};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cli::load_instance;
use crate::{write_atomic, CliError, Exit};

pub const HEADER: [&str; 9] = [
    "instance", "n", "cd", "map", "class", "k", "outcome", "solve_ms", "nodes",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub instance: String,
    pub n: usize,
    /// Completeness degree of the stated plus inferred lists.
    pub cd: Option<f64>,
    /// Mutual acceptability rate of the same lists.
    pub map: Option<f64>,
    pub class: String,
    pub k: u32,
    /// `sat`, `unsat`, `timeout` or `error`.
    pub outcome: String,
    pub solve_ms: f64,
    pub nodes: u64,
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub dir: PathBuf,
    pub ks: Vec<u32>,
    pub budget: Budget,
    pub out: PathBuf,
    /// Worker threads; `None` uses the available parallelism.
    pub jobs: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BenchSummary {
    /// Rows in the written table.
    pub rows: usize,
    /// Rows computed by this run.
    pub solved: usize,
    /// Rows with outcome `error`.
    pub errors: usize,
}

impl BenchSummary {
    pub fn exit(&self) -> Exit {
        if self.rows == 0 || self.errors == self.rows {
            Exit::InputError
        } else {
            Exit::Success
        }
    }
}

fn round_to(x: f64, digits: i32) -> f64 {
    let scale = 10f64.powi(digits);
    (x * scale).round() / scale
}

/// Instance files (`*.json`) of `dir`, sorted by name.
pub fn instance_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let io_err = |source| CliError::Io {
        path: dir.to_owned(),
        source,
    };
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io_err)? {
        let path = entry.map_err(io_err)?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "json") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn read_rows(path: &Path) -> Result<Vec<BenchRow>, CliError> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::Format(format!("{}: {e}", path.display())))?;
    reader
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Format(format!("{}: {e}", path.display())))
}

fn write_rows(path: &Path, rows: &[BenchRow]) -> Result<(), CliError> {
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Format(e.to_string());
    writer.write_record(HEADER).map_err(csv_err)?;
    for row in rows {
        writer.serialize(row).map_err(csv_err)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| CliError::Format(e.to_string()))?;
    write_atomic(path, &bytes)
}

/// One row per `k` for an already loaded instance.
pub fn bench_instance(name: &str, inst: &Instance, ks: &[u32], budget: Budget) -> Vec<BenchRow> {
    let base = k_extend(inst, 0).ok();
    let lists = base.as_ref().map(|b| &b.lists);
    let cd = lists.and_then(|l| lists_completeness(inst.len(), l).ok());
    let map = lists.and_then(|l| mutual_acceptability_rate(l).ok());
    let class = map
        .map(|m| classify(m).label().to_owned())
        .unwrap_or_default();
    ks.iter()
        .map(|&k| {
            let (outcome, solve_ms, nodes) = match find_k_stable(inst, k, budget) {
                Ok(r) => (
                    r.outcome.label().to_owned(),
                    round_to(r.stats.elapsed.as_secs_f64() * 1e3, 3),
                    r.stats.nodes,
                ),
                Err(_) => ("error".to_owned(), 0.0, 0),
            };
            BenchRow {
                instance: name.to_owned(),
                n: inst.len(),
                cd: cd.map(|x| round_to(x, 4)),
                map: map.map(|x| round_to(x, 4)),
                class: class.clone(),
                k,
                outcome,
                solve_ms,
                nodes,
            }
        })
        .collect()
}

fn error_rows(name: &str, ks: &[u32]) -> Vec<BenchRow> {
    ks.iter()
        .map(|&k| BenchRow {
            instance: name.to_owned(),
            n: 0,
            cd: None,
            map: None,
            class: String::new(),
            k,
            outcome: "error".to_owned(),
            solve_ms: 0.0,
            nodes: 0,
        })
        .collect()
}

pub fn run_bench(config: &BenchConfig) -> Result<BenchSummary, CliError> {
    let files = instance_files(&config.dir)?;
    let mut rows = read_rows(&config.out)?;
    let done: BTreeSet<(String, u32)> = rows.iter().map(|r| (r.instance.clone(), r.k)).collect();

    let mut ks = config.ks.clone();
    ks.sort_unstable();
    ks.dedup();
    let pending: Vec<(String, &PathBuf, Vec<u32>)> = files
        .iter()
        .map(|path| {
            let name = path
                .file_name()
                .unwrap_or_default()
                .to_string_lossy()
                .into_owned();
            let todo = ks
                .iter()
                .copied()
                .filter(|&k| !done.contains(&(name.clone(), k)))
                .collect();
            (name, path, todo)
        })
        .filter(|(_, _, todo): &(String, &PathBuf, Vec<u32>)| !todo.is_empty())
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let fresh: Vec<BenchRow> = pool.install(|| {
        pending
            .par_iter()
            .flat_map_iter(|(name, path, todo)| match load_instance(path) {
                Ok(inst) => bench_instance(name, &inst, todo, config.budget),
                Err(_) => error_rows(name, todo),
            })
            .collect()
    });

    let solved = fresh.len();
    rows.extend(fresh);
    rows.sort_by(|a, b| (&a.instance, a.k).cmp(&(&b.instance, b.k)));
    write_rows(&config.out, &rows)?;
    Ok(BenchSummary {
        rows: rows.len(),
        solved,
        errors: rows.iter().filter(|r| r.outcome == "error").count(),
    })
}
