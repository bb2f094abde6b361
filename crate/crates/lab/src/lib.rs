//! Command-line front end for the `horolab-core` experiments: argument and
//! config parsing, a rayon executor for orbit sums, and CSV/JSON output.

pub mod commands;
pub mod exec;
pub mod options;
pub mod output;
pub mod parse;
pub mod sample;

use clap::{Parser, Subcommand};

pub use commands::run;
pub use exec::Parallel;
pub use options::{OutFormat, Options};

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error(transparent)]
    Core(#[from] horolab_core::Error),
    #[error("usage: {0}")]
    Usage(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl LabError {
    /// 2 for bad input or a failed precondition, 3 for capacity, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        use horolab_core::Error as E;
        match self {
            LabError::Usage(_) | LabError::Core(E::Precondition(_) | E::Domain(_)) => 2,
            LabError::Core(E::Capacity { .. }) => 3,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "horolab", version, about = "Horocycle orbit and sieve-weight experiments on the modular surface")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Sieve identities: --op lemma1|lemma1-phi|lemma2|progression|nu-average|calibration.
    SieveCheck,
    /// Weighted average of ν on a progression against the coprime count.
    SwCheck,
    /// Reduce --z into the standard fundamental domain, or --g to a reduced representative.
    Reduce,
    /// Fundamental period y_T of Γg for each --T.
    FundamentalPeriod,
    /// The parameter r(Γg, T) for each --T.
    RParam,
    /// Closed-horocycle approximation of a segment of length --K.
    Approx,
    /// Weighted orbit sums for each --T and --s.
    OrbitSum,
    /// Discrepancy of the weighted orbit sum for each --T.
    Discrepancy,
    /// Prime orbit average against (1/θ)∫f, and the pointwise weight comparison.
    Primes,
    /// Sparse orbit sums along steps --s.
    Venkatesh,
    /// Small progressions on the closed horocycle of period --period.
    Smallaps,
}
