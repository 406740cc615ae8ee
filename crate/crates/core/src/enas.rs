//! (1+1)-ENAS: a single parent mutated by add/remove/modify block operators,
//! with elitist selection on the `(i, j)` levels.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::fitness::{self, Architecture, BlockKind, Levels, Semantics};
use crate::geometry::UniformInstance;
use crate::seeds;

pub const DEFAULT_MAX_GENERATIONS: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MutationOp {
    Add(BlockKind),
    Remove(BlockKind),
    /// Turns one block of the first kind into one of the second.
    Modify(BlockKind, BlockKind),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MutationMode {
    OneBit,
    MultiBit,
}

impl MutationMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            MutationMode::OneBit => "onebit",
            MutationMode::MultiBit => "multibit",
        }
    }
}

impl fmt::Display for MutationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MutationMode {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "onebit" => Ok(MutationMode::OneBit),
            "multibit" => Ok(MutationMode::MultiBit),
            other => Err(LabError::InvalidConfig(format!("unknown mutation mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub n: u32,
    /// Initial block counts are drawn from `{0, ..., s}`.
    pub s: u32,
    pub mode: MutationMode,
    pub semantics: Semantics,
    pub seed: u64,
    pub max_generations: u64,
    pub record_trajectory: bool,
    /// Accept the offspring only on strict improvement.
    pub strict_selection: bool,
}

impl TrialConfig {
    pub fn new(n: u32, s: u32, mode: MutationMode, semantics: Semantics, seed: u64) -> Self {
        Self {
            n,
            s,
            mode,
            semantics,
            seed,
            max_generations: DEFAULT_MAX_GENERATIONS,
            record_trajectory: false,
            strict_selection: false,
        }
    }

    pub fn validate(&self) -> Result<UniformInstance> {
        if self.max_generations == 0 {
            return Err(LabError::InvalidConfig("max_generations must be at least 1".into()));
        }
        UniformInstance::new(self.n)
    }
}

/// One generation: the parent after selection, and what happened to get there.
/// Generation 0 is the initial solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: u64,
    pub parent: Architecture,
    pub levels: Levels,
    pub accepted: bool,
    pub k: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub generations: u64,
    pub initial: Architecture,
    #[serde(rename = "final")]
    pub final_arch: Architecture,
    pub hit_cap: bool,
    pub trajectory: Option<Vec<GenerationRecord>>,
}

pub fn init_architecture<R: Rng + ?Sized>(s: u32, rng: &mut R) -> Architecture {
    let n_a = rng.gen_range(0..=s);
    let n_b = rng.gen_range(0..=s);
    let n_c = rng.gen_range(0..=s);
    Architecture::new(n_a, n_b, n_c)
}

/// Operator class uniform over add/remove/modify, kinds uniform within a class.
pub fn sample_op<R: Rng + ?Sized>(rng: &mut R) -> MutationOp {
    let class = rng.gen_range(0..3u8);
    let kind = BlockKind::ALL[rng.gen_range(0..3)];
    match class {
        0 => MutationOp::Add(kind),
        1 => MutationOp::Remove(kind),
        _ => {
            let others: Vec<BlockKind> = BlockKind::ALL.into_iter().filter(|&k| k != kind).collect();
            MutationOp::Modify(kind, others[rng.gen_range(0..2)])
        }
    }
}

/// Applies one operator. Removing or modifying an absent kind changes nothing.
pub fn apply_op(x: &Architecture, op: MutationOp) -> Architecture {
    let mut y = *x;
    match op {
        MutationOp::Add(k) => *y.count_mut(k) += 1,
        MutationOp::Remove(k) => {
            let c = y.count_mut(k);
            *c = c.saturating_sub(1);
        }
        MutationOp::Modify(src, dst) => {
            debug_assert_ne!(src, dst);
            if y.count(src) > 0 {
                *y.count_mut(src) -= 1;
                *y.count_mut(dst) += 1;
            }
        }
    }
    y
}

/// `1 + Poisson(1)` by Knuth's product-of-uniforms method.
fn one_plus_poisson1<R: Rng + ?Sized>(rng: &mut R) -> u32 {
    let limit = (-1.0f64).exp();
    let mut k = 1;
    let mut prod: f64 = rng.gen();
    while prod > limit {
        k += 1;
        prod *= rng.gen::<f64>();
    }
    k
}

pub fn sample_k<R: Rng + ?Sized>(mode: MutationMode, rng: &mut R) -> u32 {
    match mode {
        MutationMode::OneBit => 1,
        MutationMode::MultiBit => one_plus_poisson1(rng),
    }
}

/// Draws `K` and applies `K` independent operators in sequence.
pub fn mutate<R: Rng + ?Sized>(x: &Architecture, mode: MutationMode, rng: &mut R) -> (Architecture, u32) {
    let k = sample_k(mode, rng);
    let y = (0..k).fold(*x, |acc, _| apply_op(&acc, sample_op(rng)));
    (y, k)
}

/// Runs the elitist loop from `start` until the parent is optimal or the
/// generation cap is hit.
pub fn evolve<R: Rng + ?Sized>(
    cfg: &TrialConfig,
    inst: &UniformInstance,
    start: Architecture,
    rng: &mut R,
) -> TrialResult {
    let target = Levels::new(inst.max_i(), inst.max_j());
    let mut parent = start;
    let mut parent_levels = fitness::levels(&parent, inst, cfg.semantics);
    let mut trajectory = cfg.record_trajectory.then(|| {
        vec![GenerationRecord {
            generation: 0,
            parent,
            levels: parent_levels,
            accepted: true,
            k: 0,
        }]
    });

    let mut generations = 0u64;
    while parent_levels != target {
        if generations == cfg.max_generations {
            return TrialResult {
                generations,
                initial: start,
                final_arch: parent,
                hit_cap: true,
                trajectory,
            };
        }
        generations += 1;
        let (child, k) = mutate(&parent, cfg.mode, rng);
        let child_levels = fitness::levels(&child, inst, cfg.semantics);
        let accepted = if cfg.strict_selection {
            child_levels > parent_levels
        } else {
            child_levels >= parent_levels
        };
        if accepted {
            parent = child;
            parent_levels = child_levels;
        }
        if let Some(t) = trajectory.as_mut() {
            t.push(GenerationRecord {
                generation: generations,
                parent,
                levels: parent_levels,
                accepted,
                k,
            });
        }
    }
    TrialResult {
        generations,
        initial: start,
        final_arch: parent,
        hit_cap: false,
        trajectory,
    }
}

/// Runs one full trial. The stream is seeded from `cfg.seed` only.
pub fn run_trial(cfg: &TrialConfig) -> Result<TrialResult> {
    let inst = cfg.validate()?;
    let mut rng = seeds::rng_from_seed(cfg.seed);
    let start = init_architecture(cfg.s, &mut rng);
    Ok(evolve(cfg, &inst, start, &mut rng))
}
