//! Benchmark harness for resampling hill climbers on noisy bit-string
//! problems, comparing first-hitting-time evaluation with fixed-budget
//! final-solution evaluation.

pub mod algorithms;
pub mod config;
pub mod error;
pub mod experiment;
pub mod harness;
pub mod problems;
pub mod report;

pub use algorithms::{AlgorithmSpec, BudgetMeter, ResamplingRate, TrialResult};
pub use error::{Error, Result};
pub use experiment::{BestRSummary, ExperimentConfig, ResultRow};
pub use harness::{StopDecision, StoppingRule};
pub use problems::{FitnessSample, Genotype, NoiseModel, NoisyProblem, ProblemSpec};
