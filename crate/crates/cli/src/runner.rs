//! Parallel replication with sequential-identical results.
//!
//! Replications are pure functions of `(seed, rep_index)`, so running
//! them on a thread pool and collecting by index yields exactly the
//! vector the sequential loop produces; aggregation then happens in
//! index order either way. Worker count is a throughput knob, never an
//! output knob.

use bailab_core::allocate::AllocationRule;
use bailab_core::harness::{run_replication, ReplicationResult};
use bailab_core::model::{ExperimentConfig, Instance};
use rayon::prelude::*;

use crate::CliError;

/// Run `reps` replications on `workers` threads (0 = rayon default).
pub fn replicate_parallel(
    instance: &Instance,
    config: &ExperimentConfig,
    rule: AllocationRule,
    reps: u64,
    workers: usize,
) -> Result<Vec<ReplicationResult>, CliError> {
    if workers == 1 {
        return Ok(bailab_core::harness::replicate(instance, config, rule, reps));
    }
    let run = || {
        (0..reps)
            .into_par_iter()
            .map(|rep| run_replication(instance, config, rule, rep))
            .collect()
    };
    if workers == 0 {
        Ok(run())
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))?;
        Ok(pool.install(run))
    }
}
