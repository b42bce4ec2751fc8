//! Random inputs for the verification campaigns.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::choquet::CylinderFunction;
use crate::error::{FmlError, Result};
use crate::word::{CellSet, Word};

pub type TrialRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> TrialRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer; spreads consecutive integers over the seed space.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `index` in a campaign seeded with `base`.
pub fn trial_seed(base: u64, index: usize) -> u64 {
    splitmix64(base ^ splitmix64(index as u64))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValueDistribution {
    /// Uniform on `(0, 4)`.
    Uniform,
    /// Powers `2^k`, `k` uniform in `-6..=6`.
    DyadicLevels,
    /// `e^U`, `U` uniform on `[0, 12]`.
    HeavyTail,
}

impl ValueDistribution {
    pub const ALL: [ValueDistribution; 3] = [
        ValueDistribution::Uniform,
        ValueDistribution::DyadicLevels,
        ValueDistribution::HeavyTail,
    ];

    pub fn sample(self, rng: &mut impl Rng) -> f64 {
        match self {
            ValueDistribution::Uniform => {
                let v: f64 = rng.gen_range(0.0..4.0);
                if v > 0.0 {
                    v
                } else {
                    f64::MIN_POSITIVE
                }
            }
            ValueDistribution::DyadicLevels => 2f64.powi(rng.gen_range(-6..=6)),
            ValueDistribution::HeavyTail => rng.gen_range(0.0..=12.0f64).exp(),
        }
    }
}

impl std::str::FromStr for ValueDistribution {
    type Err = FmlError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(ValueDistribution::Uniform),
            "dyadic-levels" => Ok(ValueDistribution::DyadicLevels),
            "heavy-tail" => Ok(ValueDistribution::HeavyTail),
            other => Err(FmlError::Parameter(format!("unknown distribution {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorConfig {
    pub depth: usize,
    pub value_distribution: ValueDistribution,
    /// Probability that a leaf carries a nonzero value.
    pub sparsity: f64,
    pub seed: u64,
}

pub const MAX_GENERATOR_DEPTH: usize = 10;

impl GeneratorConfig {
    pub fn new(depth: usize, value_distribution: ValueDistribution, sparsity: f64, seed: u64) -> Result<Self> {
        if depth > MAX_GENERATOR_DEPTH {
            return Err(FmlError::Parameter(format!(
                "generator depth {depth} exceeds {MAX_GENERATOR_DEPTH}"
            )));
        }
        if !(sparsity > 0.0 && sparsity <= 1.0) {
            return Err(FmlError::Parameter(format!(
                "sparsity must lie in (0, 1], got {sparsity}"
            )));
        }
        Ok(GeneratorConfig {
            depth,
            value_distribution,
            sparsity,
            seed,
        })
    }

    pub fn with_seed(self, seed: u64) -> Self {
        GeneratorConfig { seed, ..self }
    }

    pub fn with_depth(self, depth: usize) -> Self {
        GeneratorConfig { depth, ..self }
    }

    /// A random cylinder function with at least one nonzero leaf.
    pub fn function(&self, arity: usize) -> CylinderFunction {
        let mut rng = rng_from_seed(self.seed);
        random_function(&mut rng, arity, self.depth, self.value_distribution, self.sparsity)
    }
}

pub fn random_function(
    rng: &mut impl Rng,
    arity: usize,
    depth: usize,
    distribution: ValueDistribution,
    sparsity: f64,
) -> CylinderFunction {
    let leaves = arity.pow(depth as u32);
    let mut values = vec![0.0; leaves];
    for v in values.iter_mut() {
        if rng.gen_bool(sparsity) {
            *v = distribution.sample(rng);
        }
    }
    if values.iter().all(|&v| v == 0.0) {
        let i = rng.gen_range(0..leaves);
        values[i] = distribution.sample(rng);
    }
    CylinderFunction::from_dense(arity, depth, &values).expect("generated values are valid")
}

pub fn random_word(rng: &mut impl Rng, arity: usize, len: usize) -> Word {
    let symbols: Vec<usize> = (0..len).map(|_| rng.gen_range(0..arity)).collect();
    Word::from_symbols(&symbols, arity).expect("symbols below arity")
}

/// A union of up to `max_cells` random cubes of depth `≤ max_depth`.
pub fn random_cell_set(rng: &mut impl Rng, arity: usize, max_depth: usize, max_cells: usize) -> CellSet {
    let n = rng.gen_range(1..=max_cells.max(1));
    CellSet::disjointify((0..n).map(|_| {
        let len = rng.gen_range(0..=max_depth);
        random_word(rng, arity, len)
    }))
}

/// A random union of depth-`depth` leaves, each present with probability
/// `density`; reduced to maximal cubes.
pub fn random_leaf_set(rng: &mut impl Rng, arity: usize, depth: usize, density: f64) -> CellSet {
    CellSet::maximal(
        Word::all_of_depth(depth, arity).filter(|_| rng.gen_bool(density)),
        arity,
    )
}

/// A random antichain of cubes of depth in `1..=max_depth`, in random order.
pub fn random_antichain(rng: &mut impl Rng, arity: usize, max_depth: usize, max_cells: usize) -> Vec<Word> {
    let mut cells = Vec::new();
    let attempts = rng.gen_range(1..=max_cells.max(1)) * 3;
    for _ in 0..attempts {
        if cells.len() >= max_cells {
            break;
        }
        let len = rng.gen_range(1..=max_depth.max(1));
        let w = random_word(rng, arity, len);
        if cells.iter().all(|c: &Word| !c.is_comparable(&w)) {
            cells.push(w);
        }
    }
    cells.shuffle(rng);
    cells
}
