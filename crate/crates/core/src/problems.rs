//! Noisy fitness landscapes over fixed-length bit strings.
//!
//! Two problems share one contract ([`NoisyProblem`]):
//!
//! - **Noisy OneMax**: the number of 1-bits plus additive Gaussian noise.
//! - **Noisy PMax**: a Bernoulli "game outcome" whose win probability is the
//!   genotype read as an unsigned binary number (first bit most significant)
//!   divided by `2^n - 1`.
//!
//! Both have the all-ones string as their unique noise-free maximiser, and
//! optimality is always decided structurally, never from a noisy sample.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest PMax dimension whose denominator `2^n - 1` fits comfortably in 64-bit arithmetic.
pub const PMAX_MAX_DIMENSION: usize = 62;

/// A fixed-length bit string. The length is set at construction and never changes.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Genotype {
    bits: Vec<bool>,
}

impl Genotype {
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::Contract("genotype must have at least one bit".into()));
        }
        Ok(Genotype { bits })
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "genotype must have at least one bit");
        Genotype { bits: vec![false; n] }
    }

    pub fn ones(n: usize) -> Self {
        assert!(n >= 1, "genotype must have at least one bit");
        Genotype { bits: vec![true; n] }
    }

    /// Uniformly random genotype; consumes exactly `n` boolean draws, first bit first.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        assert!(n >= 1, "genotype must have at least one bit");
        Genotype {
            bits: (0..n).map(|_| rng.random::<bool>()).collect(),
        }
    }

    /// The genotype whose binary reading (first bit most significant) equals `value`.
    pub fn from_value(value: u64, n: usize) -> Result<Self> {
        if n == 0 || n > 64 {
            return Err(Error::Contract(format!("cannot encode a value into {n} bits")));
        }
        if n < 64 && value >> n != 0 {
            return Err(Error::Contract(format!("value {value} does not fit in {n} bits")));
        }
        let bits = (0..n).map(|i| (value >> (n - 1 - i)) & 1 == 1).collect();
        Ok(Genotype { bits })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    /// Always false; kept so `len` has its usual companion.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    #[inline]
    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, index: usize) -> bool {
        self.bits[index]
    }

    #[inline]
    pub fn flip(&mut self, index: usize) {
        self.bits[index] = !self.bits[index];
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_all_ones(&self) -> bool {
        self.bits.iter().all(|&b| b)
    }

    /// Unsigned binary value with the first bit as the most significant.
    /// `None` when the genotype is longer than 64 bits.
    pub fn value(&self) -> Option<u64> {
        if self.bits.len() > 64 {
            return None;
        }
        Some(self.bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64))
    }

    pub fn hamming_distance(&self, other: &Genotype) -> usize {
        self.bits.iter().zip(&other.bits).filter(|(a, b)| a != b).count()
            + self.bits.len().abs_diff(other.bits.len())
    }
}

impl fmt::Display for Genotype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Genotype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Genotype({self})")
    }
}

impl FromStr for Genotype {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Contract(format!("invalid bit character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Genotype::new(bits)
    }
}

impl Serialize for Genotype {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Genotype {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Additive Gaussian noise `N(mean, stddev^2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub mean: f64,
    pub stddev: f64,
}

impl NoiseModel {
    pub fn new(mean: f64, stddev: f64) -> Result<Self> {
        let noise = NoiseModel { mean, stddev };
        noise.validate()?;
        Ok(noise)
    }

    pub fn noiseless() -> Self {
        NoiseModel {
            mean: 0.0,
            stddev: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mean.is_finite() {
            return Err(Error::Contract(format!(
                "noise mean must be finite, got {}",
                self.mean
            )));
        }
        if !(self.stddev.is_finite() && self.stddev >= 0.0) {
            return Err(Error::Contract(format!(
                "noise stddev must be finite and >= 0, got {}",
                self.stddev
            )));
        }
        Ok(())
    }
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            mean: 0.0,
            stddev: 1.0,
        }
    }
}

/// One noisy observation of fitness.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct FitnessSample(pub f64);

impl FitnessSample {
    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

/// The contract the optimisers run against.
pub trait NoisyProblem {
    fn dimension(&self) -> usize;

    /// Noise-free fitness. Deterministic and free.
    fn true_fitness(&self, x: &Genotype) -> Result<f64>;

    /// One fresh noisy sample of `x`'s fitness.
    fn noisy_eval<R: Rng + ?Sized>(&self, x: &Genotype, rng: &mut R) -> Result<FitnessSample>;

    /// Structural optimum test; never consults noisy fitness.
    fn is_optimal(&self, x: &Genotype) -> Result<bool>;

    fn check_dimension(&self, x: &Genotype) -> Result<()> {
        if x.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                actual: x.len(),
            });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProblemSpec {
    /// Noisy OneMax.
    OneMaxGaussian { n: usize, noise: NoiseModel },
    /// Noisy PMax.
    PMax { n: usize },
}

impl ProblemSpec {
    pub fn one_max(n: usize, noise: NoiseModel) -> Result<Self> {
        let spec = ProblemSpec::OneMaxGaussian { n, noise };
        spec.validate()?;
        Ok(spec)
    }

    pub fn pmax(n: usize) -> Result<Self> {
        let spec = ProblemSpec::PMax { n };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ProblemSpec::OneMaxGaussian { n, noise } => {
                if n == 0 {
                    return Err(Error::Contract("problem dimension must be >= 1".into()));
                }
                noise.validate()
            }
            ProblemSpec::PMax { n } => {
                if n == 0 || n > PMAX_MAX_DIMENSION {
                    return Err(Error::Contract(format!(
                        "PMax dimension must be in 1..={PMAX_MAX_DIMENSION}, got {n}"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn n(&self) -> usize {
        match *self {
            ProblemSpec::OneMaxGaussian { n, .. } | ProblemSpec::PMax { n } => n,
        }
    }

    /// Short name of the problem family: `onemax` or `pmax`.
    pub fn kind(&self) -> &'static str {
        match self {
            ProblemSpec::OneMaxGaussian { .. } => "onemax",
            ProblemSpec::PMax { .. } => "pmax",
        }
    }

    /// Identifier used in result files. Parameters are appended only when they
    /// differ from the standard setup (n = 10, unit Gaussian noise).
    pub fn id(&self) -> String {
        let mut params = Vec::new();
        if self.n() != 10 {
            params.push(format!("n={}", self.n()));
        }
        if let ProblemSpec::OneMaxGaussian { noise, .. } = self {
            if noise.mean != 0.0 {
                params.push(format!("mu={}", noise.mean));
            }
            if noise.stddev != 1.0 {
                params.push(format!("sigma={}", noise.stddev));
            }
        }
        if params.is_empty() {
            self.kind().to_string()
        } else {
            format!("{}[{}]", self.kind(), params.join(","))
        }
    }

    fn pmax_denominator(n: usize) -> f64 {
        ((1u64 << n) - 1) as f64
    }
}

impl NoisyProblem for ProblemSpec {
    #[inline]
    fn dimension(&self) -> usize {
        self.n()
    }

    fn true_fitness(&self, x: &Genotype) -> Result<f64> {
        self.check_dimension(x)?;
        Ok(match *self {
            ProblemSpec::OneMaxGaussian { .. } => x.count_ones() as f64,
            ProblemSpec::PMax { n } => {
                // n <= 62 is enforced by validate, so the value always exists.
                let value = x.value().expect("PMax genotype fits in 64 bits");
                value as f64 / Self::pmax_denominator(n)
            }
        })
    }

    fn noisy_eval<R: Rng + ?Sized>(&self, x: &Genotype, rng: &mut R) -> Result<FitnessSample> {
        let truth = self.true_fitness(x)?;
        Ok(match *self {
            ProblemSpec::OneMaxGaussian { noise, .. } => {
                // Draw even when stddev is 0 so stream consumption does not depend on the noise level.
                let z: f64 = rng.sample(StandardNormal);
                FitnessSample(truth + noise.mean + noise.stddev * z)
            }
            ProblemSpec::PMax { .. } => {
                let u: f64 = rng.random();
                FitnessSample(if u < truth { 1.0 } else { 0.0 })
            }
        })
    }

    fn is_optimal(&self, x: &Genotype) -> Result<bool> {
        self.check_dimension(x)?;
        Ok(x.is_all_ones())
    }
}
