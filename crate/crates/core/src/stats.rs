//! Seed derivation and frequency verdicts for Monte Carlo runs.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finaliser. A bijection on `u64`.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-trial random streams derived from one root seed.
///
/// Trial `i` uses `ChaCha8Rng::seed_from_u64(mix64(root ^ mix64(i + γ)))`
/// with `γ = 0x9e3779b97f4a7c15`. Every step is a bijection in `i`, so
/// distinct trials always get distinct seeds, and the stream depends only on
/// `(root, i)`, never on which worker runs the trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedStream {
    root: u64,
}

impl SeedStream {
    pub fn new(root: u64) -> Self {
        Self { root }
    }

    pub fn root(&self) -> u64 {
        self.root
    }

    pub fn substream_seed(&self, trial: u64) -> u64 {
        mix64(self.root ^ mix64(trial.wrapping_add(GOLDEN_GAMMA)))
    }

    pub fn rng(&self, trial: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.substream_seed(trial))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(pass: bool) -> Self {
        if pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn is_pass(self) -> bool {
        self == Verdict::Pass
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        }
    }
}

/// Binomial standard error `sqrt(p(1−p)/n)`.
pub fn standard_error(probability: f64, trials: u64) -> f64 {
    libm::sqrt(probability * (1.0 - probability) / trials as f64)
}

/// Compares `count` hits out of `trials` with `theoretical`.
///
/// Passes iff `|count/trials − theoretical| ≤ z·SE + quantization_bound`,
/// except that a theoretical 0 or 1 demands a count of exactly 0 or
/// `trials`: those are eigenstate and exclusion cases where the quantized
/// model is exact.
pub fn verdict(
    count: u64,
    trials: u64,
    theoretical: f64,
    quantization_bound: f64,
    z: f64,
) -> Verdict {
    assert!(trials > 0, "a verdict needs at least one trial");
    if theoretical == 0.0 {
        return Verdict::from_bool(count == 0);
    }
    if theoretical == 1.0 {
        return Verdict::from_bool(count == trials);
    }
    let empirical = count as f64 / trials as f64;
    let bound = z * standard_error(theoretical, trials) + quantization_bound;
    Verdict::from_bool((empirical - theoretical).abs() <= bound)
}
