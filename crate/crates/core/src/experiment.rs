//! Grid sweeps, per-trial stream derivation and aggregation.
//!
//! Every trial gets its own ChaCha8 stream seeded from
//! `trial_seed(master_seed, stream_cell, trial)`, a SplitMix64 chain:
//!
//! ```text
//! h = splitmix64(master_seed)
//! h = splitmix64(h ^ stream_cell)
//! h = splitmix64(h ^ trial)
//! ```
//!
//! where `splitmix64(x)` is the SplitMix64 output function applied to
//! `x + 0x9E3779B97F4A7C15`. For a fixed master seed and cell the map from
//! trial index to seed is a bijection, so trials within a cell never share a
//! stream. Results depend only on the config, never on scheduling: per-trial
//! outcomes are reduced with integer sums.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::algorithms::{run_trial, AlgorithmSpec, ResamplingRate, TrialResult};
use crate::error::{Error, Result};
use crate::harness::{trial_success, StoppingRule};
use crate::problems::{NoiseModel, ProblemSpec};

/// Per-trial random stream.
pub type RandomStream = ChaCha8Rng;

pub const DEFAULT_DIMENSION: usize = 10;
pub const DEFAULT_BUDGET: u64 = 500;
pub const DEFAULT_TRIALS: u64 = 10_000;
pub const DEFAULT_MAX_R: u32 = 50;
pub const DEFAULT_CONFIDENCE: f64 = 0.95;
pub const DEFAULT_MASTER_SEED: u64 = 0;

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub problems: Vec<ProblemSpec>,
    pub algorithms: Vec<AlgorithmSpec>,
    pub rules: Vec<StoppingRule>,
    pub r_values: Vec<ResamplingRate>,
    pub trials: u64,
    pub budget: u64,
    pub master_seed: u64,
    /// Confidence level of the reported Wilson intervals.
    pub confidence: f64,
    /// Share one stream per (problem, algorithm, r, trial) across stopping rules.
    pub paired_streams: bool,
}

impl Default for ExperimentConfig {
    /// Both problems at n = 10, both algorithms, both rules, r = 1..=50,
    /// 10,000 trials per cell and a budget of 500 raw evaluations.
    fn default() -> Self {
        ExperimentConfig {
            problems: vec![
                ProblemSpec::OneMaxGaussian {
                    n: DEFAULT_DIMENSION,
                    noise: NoiseModel::default(),
                },
                ProblemSpec::PMax { n: DEFAULT_DIMENSION },
            ],
            algorithms: vec![AlgorithmSpec::one_plus_one_ea(), AlgorithmSpec::Rmhc],
            rules: StoppingRule::ALL.to_vec(),
            r_values: (1..=DEFAULT_MAX_R)
                .map(|r| ResamplingRate::new(r).unwrap())
                .collect(),
            trials: DEFAULT_TRIALS,
            budget: DEFAULT_BUDGET,
            master_seed: DEFAULT_MASTER_SEED,
            confidence: DEFAULT_CONFIDENCE,
            paired_streams: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.problems.is_empty() {
            return Err(Error::config("problems", "at least one problem is required"));
        }
        for p in &self.problems {
            p.validate()
                .map_err(|e| Error::config("problems", e.to_string()))?;
        }
        check_unique("problems", self.problems.iter().map(ProblemSpec::id))?;
        if self.algorithms.is_empty() {
            return Err(Error::config("algorithms", "at least one algorithm is required"));
        }
        for a in &self.algorithms {
            a.validate()
                .map_err(|e| Error::config("algorithms", e.to_string()))?;
        }
        check_unique("algorithms", self.algorithms.iter().map(AlgorithmSpec::id))?;
        if self.rules.is_empty() {
            return Err(Error::config("rules", "at least one stopping rule is required"));
        }
        check_unique("rules", self.rules.iter().map(|r| r.id().to_string()))?;
        if self.r_values.is_empty() {
            return Err(Error::config(
                "r_values",
                "at least one resampling rate is required",
            ));
        }
        for w in self.r_values.windows(2) {
            if w[0] == w[1] {
                return Err(Error::config("r_values", format!("duplicate value {}", w[0])));
            }
            if w[0] > w[1] {
                return Err(Error::config("r_values", "values must be sorted ascending"));
            }
        }
        if self.trials == 0 {
            return Err(Error::config("trials", "must be >= 1"));
        }
        if self.budget == 0 {
            return Err(Error::config("budget", "must be >= 1"));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::config("confidence", "must be strictly between 0 and 1"));
        }
        Ok(())
    }

    /// All grid cells in row order: problem, then algorithm, then rule, then r.
    pub fn cells(&self) -> Vec<Cell> {
        let nr = self.r_values.len();
        let na = self.algorithms.len();
        let mut cells = Vec::with_capacity(self.problems.len() * na * self.rules.len() * nr);
        for (pi, problem) in self.problems.iter().enumerate() {
            for (ai, algorithm) in self.algorithms.iter().enumerate() {
                for rule in &self.rules {
                    for (ri, r) in self.r_values.iter().enumerate() {
                        let ordinal = cells.len() as u64;
                        let shared = ((pi * na + ai) * nr + ri) as u64;
                        cells.push(Cell {
                            ordinal,
                            stream_cell: if self.paired_streams { shared } else { ordinal },
                            problem: *problem,
                            algorithm: *algorithm,
                            rule: *rule,
                            r: *r,
                        });
                    }
                }
            }
        }
        cells
    }

    /// Look up a cell by its result-file identifiers.
    pub fn find_cell(&self, problem: &str, algorithm: &str, rule: StoppingRule, r: u32) -> Option<Cell> {
        self.cells().into_iter().find(|c| {
            c.problem.id() == problem && c.algorithm.id() == algorithm && c.rule == rule && c.r.get() == r
        })
    }
}

fn check_unique(key: &str, ids: impl Iterator<Item = String>) -> Result<()> {
    let mut seen = std::collections::HashSet::new();
    for id in ids {
        if !seen.insert(id.clone()) {
            return Err(Error::config(key, format!("duplicate entry {id:?}")));
        }
    }
    Ok(())
}

/// One (problem, algorithm, rule, r) combination of the grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub ordinal: u64,
    /// Index fed to the stream derivation. Equals `ordinal` unless streams are paired across rules.
    pub stream_cell: u64,
    pub problem: ProblemSpec,
    pub algorithm: AlgorithmSpec,
    pub rule: StoppingRule,
    pub r: ResamplingRate,
}

#[inline]
fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn trial_seed(master_seed: u64, stream_cell: u64, trial: u64) -> u64 {
    let h = splitmix64(master_seed);
    let h = splitmix64(h ^ stream_cell);
    splitmix64(h ^ trial)
}

pub fn trial_stream(master_seed: u64, stream_cell: u64, trial: u64) -> RandomStream {
    RandomStream::seed_from_u64(trial_seed(master_seed, stream_cell, trial))
}

/// Run a single trial of `cell` exactly as the sweep would.
pub fn run_cell_trial(cfg: &ExperimentConfig, cell: &Cell, trial: u64) -> Result<TrialResult> {
    let mut rng = trial_stream(cfg.master_seed, cell.stream_cell, trial);
    let mut result = run_trial(
        &cell.algorithm,
        &cell.problem,
        cell.rule,
        cell.r,
        cfg.budget,
        &mut rng,
    )?;
    result.success = trial_success(cell.rule, &result, &cell.problem)?;
    Ok(result)
}

pub fn run_cell_trials(cfg: &ExperimentConfig, cell: &Cell) -> Result<Vec<TrialResult>> {
    (0..cfg.trials).map(|t| run_cell_trial(cfg, cell, t)).collect()
}

/// Integer tallies for one cell; merging is associative and commutative.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Tally {
    trials: u64,
    successes: u64,
    evals: u64,
    hits: u64,
    hit_evals: u64,
}

impl Tally {
    fn of(result: &TrialResult) -> Self {
        Tally {
            trials: 1,
            successes: result.success as u64,
            evals: result.evals_used,
            hits: result.first_hit_evals.is_some() as u64,
            hit_evals: result.first_hit_evals.unwrap_or(0),
        }
    }

    fn merge(self, other: Tally) -> Tally {
        Tally {
            trials: self.trials + other.trials,
            successes: self.successes + other.successes,
            evals: self.evals + other.evals,
            hits: self.hits + other.hits,
            hit_evals: self.hit_evals + other.hit_evals,
        }
    }
}

/// Aggregated outcome of one grid cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub problem: String,
    pub algorithm: String,
    pub rule: StoppingRule,
    pub r: u32,
    pub trials: u64,
    pub successes: u64,
    pub success_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub mean_evals_used: f64,
    pub mean_first_hit_evals: Option<f64>,
}

/// Best success rate per (problem, algorithm, rule), with the smallest r attaining it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BestRSummary {
    pub problem: String,
    pub algorithm: String,
    pub rule: StoppingRule,
    pub best_rate: f64,
    pub best_r: u32,
}

fn run_cell(cfg: &ExperimentConfig, cell: &Cell, parallel: bool) -> Result<ResultRow> {
    let tally = if parallel {
        (0..cfg.trials)
            .into_par_iter()
            .map(|t| run_cell_trial(cfg, cell, t).map(|res| Tally::of(&res)))
            .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))?
    } else {
        let mut acc = Tally::default();
        for t in 0..cfg.trials {
            acc = acc.merge(Tally::of(&run_cell_trial(cfg, cell, t)?));
        }
        acc
    };
    row_from_tally(cfg, cell, tally)
}

fn row_from_tally(cfg: &ExperimentConfig, cell: &Cell, tally: Tally) -> Result<ResultRow> {
    let (ci_low, ci_high) = wilson_interval(tally.successes, tally.trials, cfg.confidence)?;
    Ok(ResultRow {
        problem: cell.problem.id(),
        algorithm: cell.algorithm.id(),
        rule: cell.rule,
        r: cell.r.get(),
        trials: tally.trials,
        successes: tally.successes,
        success_rate: tally.successes as f64 / tally.trials as f64,
        ci_low,
        ci_high,
        mean_evals_used: tally.evals as f64 / tally.trials as f64,
        mean_first_hit_evals: (tally.hits > 0).then(|| tally.hit_evals as f64 / tally.hits as f64),
    })
}

/// Run the whole grid. `threads = 1` runs on the calling thread only;
/// `threads = 0` uses one worker per available core.
pub fn run_experiment(cfg: &ExperimentConfig, threads: usize) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let cells = cfg.cells();
    if threads == 1 {
        return cells.iter().map(|c| run_cell(cfg, c, false)).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Contract(format!("cannot start worker pool: {e}")))?;
    pool.install(|| cells.par_iter().map(|c| run_cell(cfg, c, true)).collect())
}

/// Wilson score interval for `successes` out of `trials` at the given confidence level.
pub fn wilson_interval(successes: u64, trials: u64, confidence: f64) -> Result<(f64, f64)> {
    if trials == 0 || successes > trials {
        return Err(Error::Contract(format!(
            "need 0 <= successes <= trials and trials >= 1, got {successes}/{trials}"
        )));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::Contract(format!(
            "confidence must be in (0, 1), got {confidence}"
        )));
    }
    let z = Normal::standard().inverse_cdf(1.0 - (1.0 - confidence) / 2.0);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let low = if successes == 0 {
        0.0
    } else {
        (centre - half).clamp(0.0, p)
    };
    let high = if successes == trials {
        1.0
    } else {
        (centre + half).clamp(p, 1.0)
    };
    Ok((low, high))
}

/// Best rate per (problem, algorithm, rule) group, groups in order of first appearance.
pub fn best_r_summary(rows: &[ResultRow]) -> Result<Vec<BestRSummary>> {
    if rows.is_empty() {
        return Err(Error::Contract("cannot summarise an empty result set".into()));
    }
    let mut out: Vec<BestRSummary> = Vec::new();
    for row in rows {
        let slot = out
            .iter_mut()
            .find(|s| s.problem == row.problem && s.algorithm == row.algorithm && s.rule == row.rule);
        match slot {
            None => out.push(BestRSummary {
                problem: row.problem.clone(),
                algorithm: row.algorithm.clone(),
                rule: row.rule,
                best_rate: row.success_rate,
                best_r: row.r,
            }),
            Some(s) => {
                if row.success_rate > s.best_rate || (row.success_rate == s.best_rate && row.r < s.best_r) {
                    s.best_rate = row.success_rate;
                    s.best_r = row.r;
                }
            }
        }
    }
    Ok(out)
}
