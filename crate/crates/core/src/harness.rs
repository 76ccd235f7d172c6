//! Stopping rules and the success observable.
//!
//! `FirstHittingTime` stops as soon as the optimiser creates the optimum and
//! returns it; `FixedBudget` never looks at optimality and returns whatever
//! the incumbent is once the evaluation budget can no longer pay for another
//! comparison. Both share the same budget gate.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::algorithms::{BudgetMeter, ResamplingRate, TrialResult};
use crate::error::{Error, Result};
use crate::problems::{Genotype, NoisyProblem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StoppingRule {
    /// Return the optimum the first time it is visited (requires knowing the optimum).
    #[serde(rename = "fht")]
    FirstHittingTime,
    /// Return the current solution once the budget is spent.
    #[serde(rename = "fixed-budget")]
    FixedBudget,
}

impl StoppingRule {
    pub const ALL: [StoppingRule; 2] = [StoppingRule::FirstHittingTime, StoppingRule::FixedBudget];

    pub fn id(self) -> &'static str {
        match self {
            StoppingRule::FirstHittingTime => "fht",
            StoppingRule::FixedBudget => "fixed-budget",
        }
    }

    /// Whether the rule peeks at the optimum predicate during a run.
    pub fn detects_hits(self) -> bool {
        matches!(self, StoppingRule::FirstHittingTime)
    }
}

impl fmt::Display for StoppingRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for StoppingRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fht" => Ok(StoppingRule::FirstHittingTime),
            "fixed-budget" => Ok(StoppingRule::FixedBudget),
            other => Err(Error::config(
                "rules",
                format!("unknown stopping rule {other:?} (expected \"fht\" or \"fixed-budget\")"),
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopDecision {
    Continue,
    /// The candidate is the optimum and the rule returns it immediately.
    ReturnCandidateAsHit,
    /// The budget cannot pay for another comparison; return the incumbent.
    ReturnIncumbent,
}

/// Decide what to do with a freshly created candidate.
///
/// The budget gate is checked first: a candidate created when fewer than `2r`
/// evaluations remain belongs to an iteration that never starts, so it is not
/// counted as visited. Pure: draws no randomness and never mutates the meter.
pub fn should_stop<P: NoisyProblem>(
    rule: StoppingRule,
    candidate: &Genotype,
    problem: &P,
    meter: &BudgetMeter,
    r: ResamplingRate,
) -> Result<StopDecision> {
    if !meter.can_afford(r.evals_per_comparison()) {
        return Ok(StopDecision::ReturnIncumbent);
    }
    if rule.detects_hits() && problem.is_optimal(candidate)? {
        return Ok(StopDecision::ReturnCandidateAsHit);
    }
    Ok(StopDecision::Continue)
}

/// Whether the trial returned the optimum as its final answer.
///
/// Under `FirstHittingTime` this is equivalent to "a hit occurred or the final
/// incumbent is optimal".
pub fn trial_success<P: NoisyProblem>(
    _rule: StoppingRule,
    result: &TrialResult,
    problem: &P,
) -> Result<bool> {
    problem.is_optimal(&result.returned)
}
