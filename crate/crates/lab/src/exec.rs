//! Multi-threaded evaluation of orbit plans.

use horolab_core::experiment::PlanExecutor;
use horolab_core::orbit::OrbitPlan;
use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

use crate::LabError;

/// Evaluates the chunks of a plan on a rayon pool. Partials are collected in
/// chunk order and combined by the plan itself, so the result does not
/// depend on the number of threads.
pub struct Parallel {
    pool: ThreadPool,
}

impl Parallel {
    /// `threads = None` uses one worker per available core.
    pub fn new(threads: Option<usize>) -> Result<Self, LabError> {
        let mut builder = ThreadPoolBuilder::new();
        if let Some(n) = threads {
            if n == 0 {
                return Err(LabError::Usage("--threads must be at least 1".into()));
            }
            builder = builder.num_threads(n);
        }
        let pool = builder
            .build()
            .map_err(|e| LabError::Usage(format!("cannot start thread pool: {e}")))?;
        Ok(Self { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl PlanExecutor for Parallel {
    fn run(&self, plan: &OrbitPlan<'_>) -> horolab_core::Result<f64> {
        let partials = self.pool.install(|| {
            plan.chunks()
                .par_iter()
                .map(|&c| plan.eval_chunk(c))
                .collect::<horolab_core::Result<Vec<f64>>>()
        })?;
        Ok(plan.finish(&partials))
    }
}
