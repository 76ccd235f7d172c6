//! RMHC and (1+1)-EA with static resampling.
//!
//! Every comparison draws `r` fresh samples of the challenger and `r` fresh
//! samples of the incumbent (the parent is re-evaluated every iteration, no
//! fitness caching), so one iteration costs exactly `2r` raw evaluations.
//! An iteration only starts when the meter can pay for all of it.
//!
//! Randomness is consumed in a fixed order so that runs replay exactly:
//! the initial genotype (one boolean per bit, first bit first), then per
//! iteration the mutation draws, the challenger's samples and finally the
//! incumbent's samples.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::{should_stop, StopDecision, StoppingRule};
use crate::problems::{Genotype, NoisyProblem};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AlgorithmSpec {
    /// Random mutation hill climber: flip one uniformly chosen bit.
    Rmhc,
    /// (1+1)-EA: flip each bit independently. `None` means `1/n`.
    OnePlusOneEa { mutation_prob: Option<f64> },
}

impl AlgorithmSpec {
    pub fn one_plus_one_ea() -> Self {
        AlgorithmSpec::OnePlusOneEa { mutation_prob: None }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            AlgorithmSpec::Rmhc => "rmhc",
            AlgorithmSpec::OnePlusOneEa { .. } => "opo-ea",
        }
    }

    pub fn id(&self) -> String {
        match self {
            AlgorithmSpec::OnePlusOneEa {
                mutation_prob: Some(p),
            } => format!("opo-ea[p={p}]"),
            other => other.kind().to_string(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let AlgorithmSpec::OnePlusOneEa {
            mutation_prob: Some(p),
        } = *self
        {
            check_mutation_prob(p)?;
        }
        Ok(())
    }

    /// Per-bit flip probability for a problem of dimension `n`.
    pub fn mutation_prob_for(&self, n: usize) -> Option<f64> {
        match *self {
            AlgorithmSpec::Rmhc => None,
            AlgorithmSpec::OnePlusOneEa { mutation_prob } => Some(mutation_prob.unwrap_or(1.0 / n as f64)),
        }
    }
}

fn check_mutation_prob(p: f64) -> Result<()> {
    if p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        Err(Error::Contract(format!(
            "mutation probability must be in (0, 1], got {p}"
        )))
    }
}

/// Number of samples per solution per comparison. Always at least 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct ResamplingRate(u32);

impl ResamplingRate {
    pub fn new(r: u32) -> Result<Self> {
        if r == 0 {
            return Err(Error::Contract("resampling rate must be >= 1".into()));
        }
        Ok(ResamplingRate(r))
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    /// Raw evaluations one comparison costs: `2r`.
    #[inline]
    pub fn evals_per_comparison(self) -> u64 {
        2 * self.0 as u64
    }
}

impl TryFrom<u32> for ResamplingRate {
    type Error = Error;

    fn try_from(r: u32) -> Result<Self> {
        ResamplingRate::new(r)
    }
}

impl From<ResamplingRate> for u32 {
    fn from(r: ResamplingRate) -> u32 {
        r.0
    }
}

impl fmt::Display for ResamplingRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Counts raw fitness evaluations against a fixed total.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BudgetMeter {
    total: u64,
    used: u64,
}

impl BudgetMeter {
    pub fn new(total: u64) -> Result<Self> {
        if total == 0 {
            return Err(Error::Contract("evaluation budget must be >= 1".into()));
        }
        Ok(BudgetMeter { total, used: 0 })
    }

    #[inline]
    pub fn total(&self) -> u64 {
        self.total
    }

    #[inline]
    pub fn used(&self) -> u64 {
        self.used
    }

    #[inline]
    pub fn remaining(&self) -> u64 {
        self.total - self.used
    }

    #[inline]
    pub fn can_afford(&self, evals: u64) -> bool {
        self.remaining() >= evals
    }

    pub fn charge(&mut self, evals: u64) -> Result<()> {
        if !self.can_afford(evals) {
            return Err(Error::InsufficientBudget {
                needed: evals,
                remaining: self.remaining(),
            });
        }
        self.used += evals;
        Ok(())
    }
}

/// Outcome of one optimisation run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialResult {
    pub returned: Genotype,
    pub success: bool,
    pub evals_used: u64,
    /// Evaluations spent before the optimum was first visited; only set by
    /// first-hitting-time runs that stopped on a hit.
    pub first_hit_evals: Option<u64>,
    pub iterations: u64,
}

/// Copy of `x` with exactly one uniformly chosen bit flipped.
pub fn mutate_rmhc<R: Rng + ?Sized>(x: &Genotype, rng: &mut R) -> Genotype {
    let mut child = x.clone();
    flip_one(&mut child, rng);
    child
}

/// Copy of `x` with every bit flipped independently with probability `p`.
/// Zero flips is a legal outcome.
pub fn mutate_ea<R: Rng + ?Sized>(x: &Genotype, p: f64, rng: &mut R) -> Result<Genotype> {
    check_mutation_prob(p)?;
    let mut child = x.clone();
    flip_each(&mut child, p, rng);
    Ok(child)
}

#[inline]
fn flip_one<R: Rng + ?Sized>(x: &mut Genotype, rng: &mut R) {
    let d = rng.random_range(0..x.len());
    x.flip(d);
}

#[inline]
fn flip_each<R: Rng + ?Sized>(x: &mut Genotype, p: f64, rng: &mut R) {
    for d in 0..x.len() {
        // One uniform [0, 1) draw per bit, also when p = 1.
        let u: f64 = rng.random();
        if u < p {
            x.flip(d);
        }
    }
}

/// Resampled comparison: `true` iff the challenger's mean over `r` fresh
/// samples is at least the incumbent's mean over `r` fresh samples.
/// Charges exactly `2r` evaluations.
pub fn compare_resampled<P: NoisyProblem, R: Rng + ?Sized>(
    problem: &P,
    challenger: &Genotype,
    incumbent: &Genotype,
    r: ResamplingRate,
    meter: &mut BudgetMeter,
    rng: &mut R,
) -> Result<bool> {
    let needed = r.evals_per_comparison();
    if !meter.can_afford(needed) {
        return Err(Error::InsufficientBudget {
            needed,
            remaining: meter.remaining(),
        });
    }
    let challenger_mean = resampled_mean(problem, challenger, r, meter, rng)?;
    let incumbent_mean = resampled_mean(problem, incumbent, r, meter, rng)?;
    Ok(challenger_mean >= incumbent_mean)
}

fn resampled_mean<P: NoisyProblem, R: Rng + ?Sized>(
    problem: &P,
    x: &Genotype,
    r: ResamplingRate,
    meter: &mut BudgetMeter,
    rng: &mut R,
) -> Result<f64> {
    let mut sum = 0.0;
    for _ in 0..r.get() {
        sum += problem.noisy_eval(x, rng)?.value();
        meter.charge(1)?;
    }
    Ok(sum / r.get() as f64)
}

/// One trial from a uniformly random initial genotype.
pub fn run_trial<P: NoisyProblem, R: Rng + ?Sized>(
    alg: &AlgorithmSpec,
    problem: &P,
    rule: StoppingRule,
    r: ResamplingRate,
    budget: u64,
    rng: &mut R,
) -> Result<TrialResult> {
    let initial = Genotype::random(problem.dimension(), rng);
    run_trial_from(alg, problem, rule, r, budget, initial, rng)
}

/// One trial from a given initial genotype.
pub fn run_trial_from<P: NoisyProblem, R: Rng + ?Sized>(
    alg: &AlgorithmSpec,
    problem: &P,
    rule: StoppingRule,
    r: ResamplingRate,
    budget: u64,
    initial: Genotype,
    rng: &mut R,
) -> Result<TrialResult> {
    alg.validate()?;
    problem.check_dimension(&initial)?;
    let mut meter = BudgetMeter::new(budget)?;
    let flip_prob = alg.mutation_prob_for(problem.dimension());

    // Visiting needs no evaluation, so the starting point counts even when
    // the budget cannot pay for a single comparison.
    if rule.detects_hits() && problem.is_optimal(&initial)? {
        return Ok(TrialResult {
            returned: initial,
            success: true,
            evals_used: 0,
            first_hit_evals: Some(0),
            iterations: 0,
        });
    }

    let mut incumbent = initial;
    let mut challenger = incumbent.clone();
    let mut iterations = 0u64;
    loop {
        challenger.clone_from(&incumbent);
        match flip_prob {
            None => flip_one(&mut challenger, rng),
            Some(p) => flip_each(&mut challenger, p, rng),
        }
        match should_stop(rule, &challenger, problem, &meter, r)? {
            StopDecision::ReturnIncumbent => break,
            StopDecision::ReturnCandidateAsHit => {
                return Ok(TrialResult {
                    returned: challenger,
                    success: true,
                    evals_used: meter.used(),
                    first_hit_evals: Some(meter.used()),
                    iterations,
                });
            }
            StopDecision::Continue => {}
        }
        if compare_resampled(problem, &challenger, &incumbent, r, &mut meter, rng)? {
            std::mem::swap(&mut incumbent, &mut challenger);
        }
        iterations += 1;
    }

    let success = problem.is_optimal(&incumbent)?;
    Ok(TrialResult {
        returned: incumbent,
        success,
        evals_used: meter.used(),
        first_hit_evals: None,
        iterations,
    })
}
