//! Fitness measurement, large-trial statistics and the generalization
//! scenario suite.
//!
//! Every trial `i` runs with seed `derive_seed(seed, TRIALS, i)`, so a
//! trial set is reproducible and can be split across workers freely. The
//! parallel map collects results in trial order and the reduction runs
//! sequentially, so reports do not depend on the rayon pool size.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{SimConfig, SpawnRegion};
use crate::rng::{derive_seed, stream};
use crate::sim::{run_episode, DogPolicy};

/// Episode seeds for one fitness measurement; `K` is the number of seeds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FitnessSpec {
    pub seeds: Vec<u64>,
}

impl FitnessSpec {
    pub fn new(seeds: Vec<u64>) -> Self {
        assert!(!seeds.is_empty(), "fitness needs at least one episode");
        FitnessSpec { seeds }
    }

    /// `k` seeds derived from `master` and a suite index.
    pub fn derived(master: u64, suite: u64, k: usize) -> Self {
        let seeds = (0..k as u64)
            .map(|i| derive_seed(derive_seed(master, stream::FITNESS, suite), stream::FITNESS, i))
            .collect();
        FitnessSpec::new(seeds)
    }

    pub fn sims(&self) -> usize {
        self.seeds.len()
    }
}

/// Mean captured fraction over the episodes in `spec`. Computed from the
/// integer capture total, so the result is an exact multiple of
/// `1 / (K * n_sheep)` up to one rounding.
pub fn fitness<P: DogPolicy + ?Sized>(policy: &P, spec: &FitnessSpec, cfg: &SimConfig) -> f64 {
    let geometry = cfg.geometry();
    let captured: usize = spec
        .seeds
        .iter()
        .map(|&seed| run_episode(policy, cfg, &geometry, seed, false).captured)
        .sum();
    captured as f64 / (spec.sims() * cfg.n_sheep) as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub n_trials: usize,
    pub n_sheep: usize,
    pub mean: f64,
    /// Sample standard deviation over `sqrt(n_trials)`.
    pub std_error: f64,
    /// `histogram[c]` counts trials that captured exactly `c` sheep.
    pub histogram: Vec<u64>,
}

impl TrialReport {
    /// Builds a report from per-trial capture counts.
    pub fn from_counts(counts: &[usize], n_sheep: usize) -> Self {
        assert!(!counts.is_empty(), "n_trials must be ≥ 1");
        let n = counts.len();
        let mut histogram = vec![0u64; n_sheep + 1];
        let mut sum = 0u128;
        let mut sum_sq = 0u128;
        for &c in counts {
            histogram[c] += 1;
            sum += c as u128;
            sum_sq += (c * c) as u128;
        }
        let scale = n_sheep as f64;
        let mean = sum as f64 / n as f64 / scale;
        let std_error = if n > 1 {
            // exact integer numerator: n * sum_sq - sum^2
            let numer = (n as u128 * sum_sq - sum * sum) as f64;
            let var = numer / (n as f64 * (n - 1) as f64) / (scale * scale);
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        TrialReport {
            n_trials: n,
            n_sheep,
            mean,
            std_error,
            histogram,
        }
    }

    pub fn fractions_histogram(&self) -> Vec<(f64, u64)> {
        self.histogram
            .iter()
            .enumerate()
            .map(|(c, &k)| (c as f64 / self.n_sheep as f64, k))
            .collect()
    }
}

/// Seed of trial `index` under master `seed`.
pub fn trial_seed(seed: u64, index: usize) -> u64 {
    derive_seed(seed, stream::TRIALS, index as u64)
}

/// Capture counts for trials `range` under master `seed`, in trial order.
pub fn trial_counts<P: DogPolicy + Sync + ?Sized>(
    policy: &P,
    cfg: &SimConfig,
    range: std::ops::Range<usize>,
    seed: u64,
) -> Vec<usize> {
    let geometry = cfg.geometry();
    range
        .into_par_iter()
        .map(|i| run_episode(policy, cfg, &geometry, trial_seed(seed, i), false).captured)
        .collect()
}

/// Runs `n_trials` independent seeded episodes on the current rayon pool.
pub fn evaluate_trials<P: DogPolicy + Sync + ?Sized>(
    policy: &P,
    cfg: &SimConfig,
    n_trials: usize,
    seed: u64,
) -> TrialReport {
    let counts = trial_counts(policy, cfg, 0..n_trials, seed);
    TrialReport::from_counts(&counts, cfg.n_sheep)
}

/// Altered environments for generalization tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scenario {
    Default,
    FewSheep,
    ManySheep,
    FastSheep,
    WeakCluster,
    LowerSpawn,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::Default,
        Scenario::FewSheep,
        Scenario::ManySheep,
        Scenario::FastSheep,
        Scenario::WeakCluster,
        Scenario::LowerSpawn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Default => "default",
            Scenario::FewSheep => "few-sheep",
            Scenario::ManySheep => "many-sheep",
            Scenario::FastSheep => "fast-sheep",
            Scenario::WeakCluster => "weak-cluster",
            Scenario::LowerSpawn => "lower-spawn",
        }
    }

    pub fn apply(self, base: &SimConfig) -> SimConfig {
        let mut cfg = base.clone();
        match self {
            Scenario::Default => {}
            Scenario::FewSheep => cfg.n_sheep = 5,
            Scenario::ManySheep => cfg.n_sheep = 100,
            Scenario::FastSheep => cfg.v_s = 3.0,
            Scenario::WeakCluster => cfg.d_s = 5.0,
            Scenario::LowerSpawn => cfg.sheep_spawn_region = SpawnRegion::LowerHalf,
        }
        cfg
    }

    /// Master trial seed for this preset under a suite seed.
    pub fn trial_master_seed(self, seed: u64) -> u64 {
        let id = Scenario::ALL.iter().position(|s| *s == self).unwrap_or(0);
        derive_seed(seed, stream::SCENARIO, id as u64)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| format!("unknown scenario {s:?}"))
    }
}

/// One report per preset, each with its own trial seed stream.
pub fn run_scenarios<P: DogPolicy + Sync + ?Sized>(
    policy: &P,
    base: &SimConfig,
    presets: &[Scenario],
    n_trials: usize,
    seed: u64,
) -> Vec<(Scenario, TrialReport)> {
    presets
        .iter()
        .map(|&sc| {
            let cfg = sc.apply(base);
            (sc, evaluate_trials(policy, &cfg, n_trials, sc.trial_master_seed(seed)))
        })
        .collect()
}
