//! Randomized verification campaigns and their CSV records.

pub mod generate;
pub mod record;
pub mod suites;

pub use generate::{trial_seed, GeneratorConfig, ValueDistribution};
pub use record::{write_csv, TheoremId, VerificationRecord, DEFAULT_REL_TOL};
pub use suites::*;
