//! Runtime benchmarking over a grid of simulated datasets.
//!
//! Each grid cell simulates data, resamples the learner with 3-fold CV,
//! then times the summary stage alone; the resample wall time is kept
//! separately for context. Failed cells produce rows with missing
//! timings instead of aborting the run, so one bad configuration cannot
//! lose the rest of the grid.

use std::io::Write;
use std::time::Instant;

use crate::control::SummaryControl;
use crate::data::Task;
use crate::error::{Error, Result};
use crate::learner::{fit, FittedModel, Learner};
use crate::resampling::{resample, ResampleResult, ResamplingKind, ResamplingStrategy};
use crate::seed;
use crate::sim::{simulate_task, DEFAULT_NOISE};
use crate::summary::summarize;

/// Full description of a benchmark run.
#[derive(Clone, Debug)]
pub struct BenchSpec {
    pub ns: Vec<usize>,
    pub ps: Vec<usize>,
    /// Learner specs, e.g. `random_forest:num_trees=50`.
    pub learners: Vec<String>,
    pub workers: Vec<usize>,
    /// Raw timings recorded per cell.
    pub repeats: usize,
    pub seed: u64,
}

/// One raw timing. `run` indexes the repeat within its cell.
#[derive(Clone, Debug)]
pub struct BenchRow {
    pub n: usize,
    pub p: usize,
    pub learner: String,
    pub workers: usize,
    pub run: usize,
    /// Wall seconds of the summary stage; `None` when the cell failed.
    pub seconds: Option<f64>,
    /// Wall seconds of simulate-resample-fit, shared by the cell's runs.
    pub setup_seconds: Option<f64>,
}

/// Parse a grid spec like `n=100,500,2000;p=5,25`. Both keys must appear
/// exactly once, in either order.
pub fn parse_grid(spec: &str) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut ns: Option<Vec<usize>> = None;
    let mut ps: Option<Vec<usize>> = None;
    for part in spec.split(';') {
        let (key, values) = part
            .split_once('=')
            .ok_or_else(|| Error::BenchGrid(format!("expected key=values, got {part}")))?;
        let parsed: Vec<usize> = values
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::BenchGrid(format!("bad value {v}")))
            })
            .collect::<Result<_>>()?;
        if parsed.is_empty() || parsed.contains(&0) {
            return Err(Error::BenchGrid(format!("{key} needs positive values")));
        }
        let slot = match key.trim() {
            "n" => &mut ns,
            "p" => &mut ps,
            other => return Err(Error::BenchGrid(format!("unknown key {other}"))),
        };
        if slot.replace(parsed).is_some() {
            return Err(Error::BenchGrid(format!("duplicate key {key}")));
        }
    }
    match (ns, ps) {
        (Some(ns), Some(ps)) => Ok((ns, ps)),
        _ => Err(Error::BenchGrid("grid needs both n= and p=".to_string())),
    }
}

struct PreparedCell {
    rr: ResampleResult,
    model: FittedModel,
    setup_seconds: f64,
}

fn prepare(task: &Task, learner_spec: &str, cell_seed: u64) -> Result<PreparedCell> {
    let learner = Learner::parse(learner_spec)?;
    let strategy = ResamplingStrategy::new(ResamplingKind::Cv { folds: 3 }, cell_seed);
    let start = Instant::now();
    let rr = resample(task, &learner, &strategy, 1)?;
    let all: Vec<usize> = (0..task.frame().n_rows()).collect();
    let model = fit(&learner, task, &all, cell_seed)?;
    Ok(PreparedCell {
        rr,
        model,
        setup_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Run the whole grid. Produces exactly
/// `ns * ps * learners * workers * repeats` rows in loop order with the
/// repeat index innermost; `progress` sees each row as it is measured.
pub fn run_bench(spec: &BenchSpec, mut progress: impl FnMut(&BenchRow)) -> Vec<BenchRow> {
    let mut rows = Vec::new();
    let control = SummaryControl::default();
    for &n in &spec.ns {
        for &p in &spec.ps {
            let cell_seed =
                seed::derive_path(spec.seed, &[seed::TAG_BENCH, n as u64, p as u64]);
            let task = simulate_task(n, p, cell_seed, DEFAULT_NOISE).ok();
            for learner_spec in &spec.learners {
                for &workers in &spec.workers {
                    let prepared = task
                        .as_ref()
                        .and_then(|t| prepare(t, learner_spec, cell_seed).ok());
                    for run in 0..spec.repeats {
                        let (seconds, setup_seconds) = match &prepared {
                            Some(cell) => {
                                let start = Instant::now();
                                let outcome =
                                    summarize(&cell.model, &cell.rr, &control, workers);
                                let elapsed = start.elapsed().as_secs_f64();
                                match outcome {
                                    Ok(_) => (Some(elapsed), Some(cell.setup_seconds)),
                                    Err(_) => (None, Some(cell.setup_seconds)),
                                }
                            }
                            None => (None, None),
                        };
                        let row = BenchRow {
                            n,
                            p,
                            learner: learner_spec.clone(),
                            workers,
                            run,
                            seconds,
                            setup_seconds,
                        };
                        progress(&row);
                        rows.push(row);
                    }
                }
            }
        }
    }
    rows
}

/// Write timings as CSV with columns `n,p,learner,workers,run,seconds`;
/// failed cells carry `NA`.
pub fn write_bench_csv<W: Write>(rows: &[BenchRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "p", "learner", "workers", "run", "seconds"])?;
    for row in rows {
        let seconds = match row.seconds {
            Some(s) => format!("{s}"),
            None => "NA".to_string(),
        };
        w.write_record([
            row.n.to_string(),
            row.p.to_string(),
            row.learner.clone(),
            row.workers.to_string(),
            row.run.to_string(),
            seconds,
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_specs_parse_in_either_order() {
        assert_eq!(
            parse_grid("n=100,500;p=5,25").unwrap(),
            (vec![100, 500], vec![5, 25])
        );
        assert_eq!(parse_grid("p=5;n=10").unwrap(), (vec![10], vec![5]));
    }

    #[test]
    fn malformed_grids_are_rejected() {
        assert!(parse_grid("n=100").is_err());
        assert!(parse_grid("n=100;k=5").is_err());
        assert!(parse_grid("n=abc;p=5").is_err());
        assert!(parse_grid("n=0;p=5").is_err());
        assert!(parse_grid("n=1;n=2;p=5").is_err());
        assert!(parse_grid("100;5").is_err());
    }

    #[test]
    fn row_count_covers_the_full_grid() {
        let spec = BenchSpec {
            ns: vec![30, 40],
            ps: vec![5],
            learners: vec!["featureless".to_string()],
            workers: vec![1],
            repeats: 2,
            seed: 5,
        };
        let rows = run_bench(&spec, |_| {});
        assert_eq!(rows.len(), 2 * 1 * 1 * 1 * 2);
        assert!(rows.iter().all(|r| r.seconds.is_some()));
        assert!(rows.iter().all(|r| r.setup_seconds.is_some()));
        // Repeat index is innermost.
        let runs: Vec<usize> = rows.iter().map(|r| r.run).collect();
        assert_eq!(runs, [0, 1, 0, 1]);
    }

    #[test]
    fn failing_cells_report_na_and_do_not_abort() {
        let spec = BenchSpec {
            ns: vec![30],
            ps: vec![5],
            learners: vec!["no_such_learner".to_string(), "featureless".to_string()],
            workers: vec![1],
            repeats: 1,
            seed: 5,
        };
        let rows = run_bench(&spec, |_| {});
        assert_eq!(rows.len(), 2);
        assert!(rows[0].seconds.is_none());
        assert!(rows[1].seconds.is_some());
        let mut buf = Vec::new();
        write_bench_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("n,p,learner,workers,run,seconds"));
        assert!(lines.next().unwrap().ends_with(",NA"));
    }

    #[test]
    fn progress_sees_every_row_in_order() {
        let spec = BenchSpec {
            ns: vec![30],
            ps: vec![5],
            learners: vec!["featureless".to_string()],
            workers: vec![1, 2],
            repeats: 1,
            seed: 5,
        };
        let mut seen = Vec::new();
        let rows = run_bench(&spec, |r| seen.push((r.n, r.workers, r.run)));
        assert_eq!(seen.len(), rows.len());
        assert_eq!(seen, [(30, 1, 0), (30, 2, 0)]);
    }
}
