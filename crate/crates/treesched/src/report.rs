//! Batch benchmarking with deterministic CSV reports.
//!
//! [`bench_corpus`] runs a set of heuristics over every tree file in a
//! directory for several processor counts. Rows are sorted and floating
//! point values are printed with 17 significant digits, so the same corpus
//! produces byte-identical output regardless of worker count.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use rayon::prelude::*;

use crate::heuristics::Heuristic;
use crate::oracle::bounds;
use crate::sim::check_schedule;
use crate::tree::{parse_tree, TaskTree};

/// One heuristic run on one tree, with its lower bounds and the ratios to
/// them.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub tree_name: String,
    pub heuristic: &'static str,
    pub p: usize,
    pub makespan: f64,
    pub peak_memory: f64,
    pub lb_makespan: f64,
    pub lb_memory: f64,
    /// makespan / lb_makespan.
    pub norm_makespan: f64,
    /// peak_memory / lb_memory.
    pub norm_memory: f64,
}

/// Shortest format that still round-trips any f64: 17 significant digits.
fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

impl RunRecord {
    /// Column names, matching [`RunRecord::csv_row`].
    pub const CSV_HEADER: &'static str =
        "tree,heuristic,p,makespan,peak_memory,lb_makespan,lb_memory,norm_makespan,norm_memory";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.tree_name,
            self.heuristic,
            self.p,
            fmt_real(self.makespan),
            fmt_real(self.peak_memory),
            fmt_real(self.lb_makespan),
            fmt_real(self.lb_memory),
            fmt_real(self.norm_makespan),
            fmt_real(self.norm_memory),
        )
    }
}

/// Runs one heuristic on one tree and packages the metrics.
///
/// Panics if the heuristic produces an infeasible schedule; that is a bug,
/// not an input condition.
pub fn run_scenario(name: &str, tree: &TaskTree, heuristic: Heuristic, p: usize) -> RunRecord {
    let sched = heuristic.schedule(tree, p);
    let report = check_schedule(tree, &sched);
    assert!(
        report.feasible,
        "{} built an infeasible schedule: {}",
        heuristic.label(),
        report.violation.as_deref().unwrap_or("unknown")
    );
    let b = bounds(tree, p);
    RunRecord {
        tree_name: name.to_string(),
        heuristic: heuristic.label(),
        p,
        makespan: report.makespan,
        peak_memory: report.peak_memory,
        lb_makespan: b.lb_makespan,
        lb_memory: b.lb_memory,
        norm_makespan: report.makespan / b.lb_makespan,
        norm_memory: report.peak_memory / b.lb_memory,
    }
}

/// Per-heuristic standing against the best competitor, scenario by scenario.
///
/// A scenario is one (tree, processor count) pair; "best" is the smallest
/// value any benchmarked heuristic achieved there. Ties count for every
/// heuristic achieving them, so the `best_*` fractions need not sum to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub heuristic: &'static str,
    pub runs: usize,
    /// Fraction of scenarios where this heuristic's peak equals the best.
    pub best_memory: f64,
    /// Fraction of scenarios with peak within 5% of the best.
    pub within5_memory: f64,
    /// Mean of (peak / best peak) - 1 over scenarios.
    pub avg_dev_memory: f64,
    /// Fraction of scenarios where this heuristic's makespan equals the best.
    pub best_makespan: f64,
    /// Fraction of scenarios with makespan within 5% of the best.
    pub within5_makespan: f64,
    /// Mean of (makespan / best makespan) - 1 over scenarios.
    pub avg_dev_makespan: f64,
}

/// All rows of a corpus run plus the files that could not be used.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    /// Sorted by (tree, heuristic, p).
    pub rows: Vec<RunRecord>,
    /// `(file name, reason)` for unreadable or unparseable files.
    pub skipped: Vec<(String, String)>,
}

const SUMMARY_ORDER: [Heuristic; 5] = [
    Heuristic::ParSubtrees,
    Heuristic::ParSubtreesOptim,
    Heuristic::ParInnerFirst,
    Heuristic::ParDeepestFirst,
    Heuristic::SeqPostorder,
];

impl BenchReport {
    /// Compares heuristics scenario by scenario, in the canonical reporting
    /// order. Schedules are deterministic, so ties are exact float equality.
    pub fn summary(&self) -> Vec<SummaryRow> {
        // Scenario key (tree, p) -> best peak and best makespan seen there.
        let mut best: BTreeMap<(&str, usize), (f64, f64)> = BTreeMap::new();
        for r in &self.rows {
            let entry = best
                .entry((r.tree_name.as_str(), r.p))
                .or_insert((f64::INFINITY, f64::INFINITY));
            entry.0 = entry.0.min(r.peak_memory);
            entry.1 = entry.1.min(r.makespan);
        }
        let mut out = Vec::new();
        for h in SUMMARY_ORDER {
            let label = h.label();
            let rows: Vec<&RunRecord> = self.rows.iter().filter(|r| r.heuristic == label).collect();
            if rows.is_empty() {
                continue;
            }
            let runs = rows.len();
            let score = |value: fn(&RunRecord) -> f64, pick: fn(&(f64, f64)) -> f64| {
                let (mut hits, mut close, mut dev) = (0usize, 0usize, 0.0f64);
                for r in &rows {
                    let v = value(r);
                    let b = pick(&best[&(r.tree_name.as_str(), r.p)]);
                    hits += usize::from(v == b);
                    close += usize::from(v <= 1.05 * b);
                    dev += v / b - 1.0;
                }
                let n = runs as f64;
                (hits as f64 / n, close as f64 / n, dev / n)
            };
            let (best_memory, within5_memory, avg_dev_memory) = score(|r| r.peak_memory, |b| b.0);
            let (best_makespan, within5_makespan, avg_dev_makespan) =
                score(|r| r.makespan, |b| b.1);
            out.push(SummaryRow {
                heuristic: label,
                runs,
                best_memory,
                within5_memory,
                avg_dev_memory,
                best_makespan,
                within5_makespan,
                avg_dev_makespan,
            });
        }
        out
    }

    /// The full CSV document: header, one row per run, and a trailing
    /// comment block with the per-heuristic summary.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(RunRecord::CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.csv_row());
            out.push('\n');
        }
        let summary = self.summary();
        if !summary.is_empty() {
            out.push_str("#\n");
            out.push_str(
                "# heuristic,runs,best_memory,within5_memory,avg_dev_memory,\
                 best_makespan,within5_makespan,avg_dev_makespan\n",
            );
            for s in summary {
                out.push_str(&format!(
                    "# {},{},{},{},{},{},{},{}\n",
                    s.heuristic,
                    s.runs,
                    fmt_real(s.best_memory),
                    fmt_real(s.within5_memory),
                    fmt_real(s.avg_dev_memory),
                    fmt_real(s.best_makespan),
                    fmt_real(s.within5_makespan),
                    fmt_real(s.avg_dev_makespan),
                ));
            }
        }
        out
    }
}

/// Benchmarks every parseable tree file in `dir` under each heuristic and
/// processor count. `jobs` sizes the worker pool (`None` uses the global
/// default); the result does not depend on it.
pub fn bench_corpus(
    dir: &Path,
    heuristics: &[Heuristic],
    procs: &[usize],
    jobs: Option<usize>,
) -> io::Result<BenchReport> {
    let mut names: Vec<String> = Vec::new();
    for entry in fs::read_dir(dir)? {
        let entry = entry?;
        if !entry.file_type()?.is_file() {
            continue;
        }
        let name = entry.file_name().to_string_lossy().into_owned();
        if !name.starts_with('.') {
            names.push(name);
        }
    }
    names.sort();

    let mut trees: Vec<(String, TaskTree)> = Vec::new();
    let mut skipped: Vec<(String, String)> = Vec::new();
    for name in names {
        let text = match fs::read_to_string(dir.join(&name)) {
            Ok(text) => text,
            Err(err) => {
                skipped.push((name, err.to_string()));
                continue;
            }
        };
        match parse_tree(&text) {
            Ok(tree) => trees.push((name, tree)),
            Err(err) => skipped.push((name, err.to_string())),
        }
    }

    let mut tasks: Vec<(&str, &TaskTree, Heuristic, usize)> = Vec::new();
    for (name, tree) in &trees {
        for &h in heuristics {
            for &p in procs {
                tasks.push((name, tree, h, p));
            }
        }
    }
    let run_all = || {
        tasks
            .par_iter()
            .map(|&(name, tree, h, p)| run_scenario(name, tree, h, p))
            .collect::<Vec<RunRecord>>()
    };
    let mut rows = match jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .map_err(io::Error::other)?
            .install(run_all),
        None => run_all(),
    };
    rows.sort_by(|a, b| {
        (a.tree_name.as_str(), a.heuristic, a.p).cmp(&(b.tree_name.as_str(), b.heuristic, b.p))
    });
    Ok(BenchReport { rows, skipped })
}
