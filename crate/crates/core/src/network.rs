//! Concrete threshold-neuron networks for an allocation.
//!
//! Each block is an AND of binary threshold units and the network output is
//! the OR of its blocks. With sector `k` spanning angles `[kθ, (k+1)θ]`,
//! `θ = 2π/n` and center `μ = (k + ½)θ`:
//!
//! * A-block: `r·cos(φ − μ) ≥ cos(π/n)`, the segment beyond the chord.
//! * B-block: `r·cos(φ − (kθ − π/2)) ≤ 0` and `r·cos(φ − ((k+1)θ − π/2)) ≥ 0`,
//!   the closed wedge of the sector. The two weight angles differ by `θ`.
//! * C-block: the B-block units plus `r·cos(φ − μ) ≤ cos(π/n)`, the triangle.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::fitness::{Allocation, BlockKind};
use crate::geometry::{sample_disk_point, DiskPoint, RegionKind, UniformInstance};
use crate::seeds;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    AtLeast,
    AtMost,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neuron {
    pub weight_angle: f64,
    pub bias: f64,
    pub sense: Sense,
    // unit normal, cached
    wx: f64,
    wy: f64,
}

impl Neuron {
    pub fn new(weight_angle: f64, bias: f64, sense: Sense) -> Self {
        Self {
            weight_angle,
            bias,
            sense,
            wx: weight_angle.cos(),
            wy: weight_angle.sin(),
        }
    }

    fn fires_xy(&self, x: f64, y: f64) -> bool {
        let act = x * self.wx + y * self.wy;
        match self.sense {
            Sense::AtLeast => act >= self.bias,
            Sense::AtMost => act <= self.bias,
        }
    }

    pub fn fires(&self, p: &DiskPoint) -> bool {
        self.fires_xy(p.x(), p.y())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlacedBlock {
    pub kind: BlockKind,
    pub sector: u32,
    pub neurons: Vec<Neuron>,
}

impl PlacedBlock {
    pub fn new(kind: BlockKind, sector: u32, inst: &UniformInstance) -> Self {
        let theta = inst.sector_angle();
        let lo = sector as f64 * theta;
        let center = lo + 0.5 * theta;
        let chord = inst.chord_distance();
        let wedge = [
            Neuron::new(lo - FRAC_PI_2, 0.0, Sense::AtMost),
            Neuron::new(lo + theta - FRAC_PI_2, 0.0, Sense::AtLeast),
        ];
        let neurons = match kind {
            BlockKind::A => vec![Neuron::new(center, chord, Sense::AtLeast)],
            BlockKind::B => wedge.to_vec(),
            BlockKind::C => {
                let mut v = wedge.to_vec();
                v.push(Neuron::new(center, chord, Sense::AtMost));
                v
            }
        };
        Self {
            kind,
            sector,
            neurons,
        }
    }

    fn fires_xy(&self, x: f64, y: f64) -> bool {
        self.neurons.iter().all(|u| u.fires_xy(x, y))
    }

    pub fn fires(&self, p: &DiskPoint) -> bool {
        self.fires_xy(p.x(), p.y())
    }
}

#[derive(Debug, Clone)]
pub struct Classifier {
    instance: UniformInstance,
    blocks: Vec<PlacedBlock>,
}

impl Classifier {
    pub fn new(instance: UniformInstance, blocks: Vec<PlacedBlock>) -> Self {
        Self { instance, blocks }
    }

    pub fn instance(&self) -> &UniformInstance {
        &self.instance
    }

    pub fn blocks(&self) -> &[PlacedBlock] {
        &self.blocks
    }

    pub fn classify(&self, p: &DiskPoint) -> u8 {
        let (x, y) = (p.x(), p.y());
        self.blocks.iter().any(|b| b.fires_xy(x, y)) as u8
    }
}

/// Places the blocks of `al` on concrete sectors, lowest index first.
pub fn build_network(al: &Allocation, inst: &UniformInstance) -> Result<Classifier> {
    al.check_regions(inst)?;
    let sectors_of = |kind| {
        inst.regions()
            .filter(move |r| r.kind == kind)
            .map(|r| r.index)
            .collect::<Vec<_>>()
    };
    let (a_regions, b_regions, c_regions) = (
        sectors_of(RegionKind::A),
        sectors_of(RegionKind::B),
        sectors_of(RegionKind::C),
    );

    let b_on_b = al.b_on_b as usize;
    let c_on_c = al.c_on_c as usize;
    let plan: [(BlockKind, &[u32]); 6] = [
        (BlockKind::B, &b_regions[..b_on_b]),
        (BlockKind::C, &c_regions[..c_on_c]),
        (BlockKind::C, &b_regions[b_on_b..b_on_b + al.c_on_b as usize]),
        (BlockKind::B, &c_regions[c_on_c..c_on_c + al.b_on_c as usize]),
        (BlockKind::A, &a_regions[..al.a_on_a as usize]),
        (BlockKind::A, &b_regions[b_on_b..b_on_b + al.a_on_b as usize]),
    ];
    let blocks = plan
        .iter()
        .flat_map(|(kind, sectors)| sectors.iter().map(|&k| PlacedBlock::new(*kind, k, inst)))
        .collect();
    Ok(Classifier::new(inst.clone(), blocks))
}

pub fn classify(cl: &Classifier, p: &DiskPoint) -> u8 {
    cl.classify(p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccuracyEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: u64,
}

impl AccuracyEstimate {
    fn from_counts(correct: u64, samples: u64) -> Self {
        let p = correct as f64 / samples as f64;
        Self {
            estimate: p,
            std_error: (p * (1.0 - p) / samples as f64).sqrt(),
            samples,
        }
    }

    /// Whether `value` lies within `k` standard errors. A zero standard error
    /// demands exact equality.
    pub fn agrees_with(&self, value: f64, k: f64) -> bool {
        (self.estimate - value).abs() <= k * self.std_error
    }
}

fn count_correct<R: Rng + ?Sized>(cl: &Classifier, samples: u64, rng: &mut R) -> u64 {
    let inst = &cl.instance;
    (0..samples)
        .filter(|_| {
            let p = sample_disk_point(rng);
            cl.classify(&p) == inst.label_point(&p)
        })
        .count() as u64
}

/// Fraction of uniformly sampled disk points the classifier labels correctly.
pub fn monte_carlo_accuracy<R: Rng + ?Sized>(
    cl: &Classifier,
    samples: u64,
    rng: &mut R,
) -> AccuracyEstimate {
    assert!(samples >= 1, "need at least one sample");
    AccuracyEstimate::from_counts(count_correct(cl, samples, rng), samples)
}

/// Shard count used by [`monte_carlo_accuracy_par`]; fixed so the estimate does
/// not depend on the thread count.
pub const MC_SHARDS: u64 = 64;

/// Parallel Monte Carlo estimate; shard `s` draws from stream `(seed, s)`.
pub fn monte_carlo_accuracy_par(cl: &Classifier, samples: u64, seed: u64) -> AccuracyEstimate {
    assert!(samples >= 1, "need at least one sample");
    let correct: u64 = (0..MC_SHARDS)
        .into_par_iter()
        .map(|shard| {
            let share = samples / MC_SHARDS + u64::from(shard < samples % MC_SHARDS);
            let mut rng = seeds::stream(seed, &[shard]);
            count_correct(cl, share, &mut rng)
        })
        .sum();
    AccuracyEstimate::from_counts(correct, samples)
}
