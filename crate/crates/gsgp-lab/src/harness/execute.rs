//! Plan execution: independent cells fan out over a fixed-size thread
//! pool, records append to disk through a single serialized writer, and an
//! interrupted run resumes by skipping already-persisted keys. Per-cell
//! failures are logged and reported without aborting the rest of the plan.

use crate::datasets::{build_dataset, inject_noise, Partition};
use crate::error::{Error, Result};
use crate::gp::run_gp;
use crate::gsgp::run_gsgp;
use crate::harness::plan::{Cell, ExperimentPlan, Method};
use crate::harness::records::{
    existing_keys, read_records, records_path, RecordWriter, RunRecord,
};
use crate::harness::seeds;
use crate::metrics::noise_permille;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::path::Path;
use std::sync::Mutex;
use std::time::Instant;

#[derive(Debug, Clone, Copy)]
pub struct ExecuteOptions {
    /// Worker threads; 0 means one per logical core.
    pub parallelism: usize,
    /// Skip cells whose records are already persisted in the output
    /// directory instead of refusing to touch it.
    pub resume: bool,
}

impl Default for ExecuteOptions {
    fn default() -> Self {
        ExecuteOptions {
            parallelism: 0,
            resume: false,
        }
    }
}

#[derive(Debug)]
pub struct ExecuteSummary {
    /// Records written by this invocation.
    pub written: usize,
    /// Cells skipped because their key was already persisted.
    pub skipped: usize,
    /// Cells that failed, with the error message; a resumed run retries
    /// them since no record was persisted.
    pub failed: Vec<(Cell, String)>,
}

/// Runs one cell end to end: materialize the partitions, inject noise,
/// run the engine, and assemble the record. Pure given the plan's base
/// seed and the cell coordinates.
pub fn run_cell(plan: &ExperimentPlan, cell: &Cell) -> Result<RunRecord> {
    let started = Instant::now();
    let base = plan.base_seed;
    let dataset = cell.dataset;
    let permille = noise_permille(cell.noise.probability());

    let mut train_rng = ChaCha8Rng::seed_from_u64(seeds::data_seed(
        base,
        dataset,
        Partition::Train,
        cell.sample_id,
    ));
    let clean = build_dataset(dataset, Partition::Train, cell.sample_id, &mut train_rng)?;
    let mut test_rng = ChaCha8Rng::seed_from_u64(seeds::data_seed(
        base,
        dataset,
        Partition::Test,
        cell.sample_id,
    ));
    let test = build_dataset(dataset, Partition::Test, cell.sample_id, &mut test_rng)?;

    // The noise seed is independent of the repetition index: every
    // repetition on this sample trains against the same noisy variant.
    let mut noise_rng =
        ChaCha8Rng::seed_from_u64(seeds::noise_seed(base, dataset, permille, cell.sample_id));
    let train = inject_noise(&clean, cell.noise, &mut noise_rng)?;

    let seed = plan.run_seed_for(cell);
    let (final_train_nrmse, final_test_nrmse) = match cell.method {
        Method::Gp => {
            let r = run_gp(&plan.gp, &train, &test, seed)?;
            (r.final_train_nrmse, r.final_test_nrmse)
        }
        Method::Gsgp => {
            let r = run_gsgp(&plan.gsgp, &train, &test, seed)?;
            (r.final_train_nrmse, r.final_test_nrmse)
        }
    };

    Ok(RunRecord {
        method: cell.method,
        dataset,
        noise_level: cell.noise.probability(),
        sample_id: cell.sample_id,
        rep_index: cell.rep_index,
        seed,
        final_train_nrmse,
        final_test_nrmse,
        wall_time_s: started.elapsed().as_secs_f64(),
        config_hash: plan.config_hash(cell.method),
    })
}

/// Executes every cell of the plan, appending records to
/// `<out_dir>/records.csv`.
pub fn execute(
    plan: &ExperimentPlan,
    options: &ExecuteOptions,
    out_dir: &Path,
) -> Result<ExecuteSummary> {
    plan.validate()?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let path = records_path(out_dir);

    let existing = if path.exists() {
        if !options.resume {
            return Err(Error::InvalidConfig(format!(
                "{} already holds records; pass resume to continue it",
                path.display()
            )));
        }
        existing_keys(&read_records(&path)?)
    } else {
        Default::default()
    };

    let all = plan.cells();
    let total = all.len();
    let todo: Vec<Cell> = all
        .into_iter()
        .filter(|c| {
            !existing.contains(&crate::harness::records::CellKey {
                method: c.method,
                dataset: c.dataset,
                noise_permille: noise_permille(c.noise.probability()),
                sample_id: c.sample_id,
                rep_index: c.rep_index,
            })
        })
        .collect();
    let skipped = total - todo.len();

    let writer = Mutex::new(RecordWriter::open(&path)?);
    let failures: Mutex<Vec<(Cell, String)>> = Mutex::new(Vec::new());
    let written = std::sync::atomic::AtomicUsize::new(0);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.parallelism)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    pool.install(|| {
        todo.par_iter().for_each(|cell| {
            match run_cell(plan, cell).and_then(|record| {
                writer
                    .lock()
                    .expect("record writer lock")
                    .append(&record)
            }) {
                Ok(()) => {
                    written.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                }
                Err(e) => {
                    log::warn!("cell {cell} failed: {e}");
                    failures
                        .lock()
                        .expect("failure list lock")
                        .push((*cell, e.to_string()));
                }
            }
        });
    });

    Ok(ExecuteSummary {
        written: written.into_inner(),
        skipped,
        failed: failures.into_inner().expect("failure list lock"),
    })
}
