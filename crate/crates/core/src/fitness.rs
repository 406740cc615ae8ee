//! Architecture-level fitness for UNIFORM.
//!
//! Fitness is affine in a pair of integer levels `(i, j)`:
//!
//! ```text
//! f = ((n/2 + i)·T + (n/4 + j)·S) / π
//! ```
//!
//! where `i` counts correctly classified green triangles and `j` counts green
//! segments classified correctly minus white segments misclassified. Two ways of
//! deriving `(i, j)` from block counts are provided:
//!
//! * [`Semantics::Literal`] evaluates the closed-form min/max expressions.
//! * [`Semantics::Placement`] takes the best geometric placement of the blocks,
//!   computed greedily and cross-checked against exhaustive enumeration.
//!
//! Because `T > (3n/4)·S`, ordering by fitness value is the same as ordering
//! `(i, j)` lexicographically, so selection never compares floats.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::geometry::UniformInstance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BlockKind {
    A,
    B,
    C,
}

impl BlockKind {
    pub const ALL: [BlockKind; 3] = [BlockKind::A, BlockKind::B, BlockKind::C];
}

impl fmt::Display for BlockKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BlockKind::A => "A",
            BlockKind::B => "B",
            BlockKind::C => "C",
        };
        f.write_str(s)
    }
}

/// Block counts `(n_A, n_B, n_C)` of a candidate network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Architecture {
    pub n_a: u32,
    pub n_b: u32,
    pub n_c: u32,
}

impl Architecture {
    pub const fn new(n_a: u32, n_b: u32, n_c: u32) -> Self {
        Self { n_a, n_b, n_c }
    }

    pub fn count(&self, kind: BlockKind) -> u32 {
        match kind {
            BlockKind::A => self.n_a,
            BlockKind::B => self.n_b,
            BlockKind::C => self.n_c,
        }
    }

    pub fn count_mut(&mut self, kind: BlockKind) -> &mut u32 {
        match kind {
            BlockKind::A => &mut self.n_a,
            BlockKind::B => &mut self.n_b,
            BlockKind::C => &mut self.n_c,
        }
    }

    pub fn total(&self) -> u32 {
        self.n_a + self.n_b + self.n_c
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.n_a, self.n_b, self.n_c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Semantics {
    Literal,
    Placement,
}

impl Semantics {
    pub fn as_str(&self) -> &'static str {
        match self {
            Semantics::Literal => "literal",
            Semantics::Placement => "placement",
        }
    }
}

impl fmt::Display for Semantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Semantics {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "literal" => Ok(Semantics::Literal),
            "placement" => Ok(Semantics::Placement),
            other => Err(LabError::InvalidConfig(format!("unknown semantics '{other}'"))),
        }
    }
}

/// The `(i, j)` level pair. The derived `Ord` is lexicographic, which is the
/// fitness order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Levels {
    pub i: u32,
    pub j: u32,
}

impl Levels {
    pub const fn new(i: u32, j: u32) -> Self {
        Self { i, j }
    }

    /// Classification accuracy for these levels.
    pub fn value(&self, inst: &UniformInstance) -> f64 {
        let n = inst.n() as f64;
        ((n / 2.0 + self.i as f64) * inst.triangle_area()
            + (n / 4.0 + self.j as f64) * inst.segment_area())
            / PI
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitnessScore {
    pub i: u32,
    pub j: u32,
    pub value: f64,
    pub semantics: Semantics,
}

impl FitnessScore {
    pub fn from_levels(levels: Levels, inst: &UniformInstance, semantics: Semantics) -> Self {
        Self {
            i: levels.i,
            j: levels.j,
            value: levels.value(inst),
            semantics,
        }
    }

    pub fn levels(&self) -> Levels {
        Levels::new(self.i, self.j)
    }
}

/// Assignment of blocks to regions. Field `x_on_y` counts blocks of kind `x`
/// covering (part of) regions of kind `y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Allocation {
    pub b_on_b: u32,
    pub b_on_c: u32,
    pub c_on_c: u32,
    pub c_on_b: u32,
    pub a_on_a: u32,
    pub a_on_b: u32,
}

impl Allocation {
    fn tuple(&self) -> [u32; 6] {
        [
            self.b_on_b,
            self.b_on_c,
            self.c_on_c,
            self.c_on_b,
            self.a_on_a,
            self.a_on_b,
        ]
    }

    /// Checks the region-capacity constraints, which depend only on the instance.
    pub fn check_regions(&self, inst: &UniformInstance) -> Result<()> {
        let (a, b, c) = (inst.a(), inst.b(), inst.c());
        let bad = |what: &str| Err(LabError::InfeasibleAllocation(what.to_string()));
        if self.b_on_b + self.c_on_b > b {
            return bad("B-region triangles covered more than once");
        }
        if self.c_on_c + self.b_on_c > c {
            return bad("C-regions covered more than once");
        }
        if self.a_on_a > a {
            return bad("more A blocks on A-regions than A-regions");
        }
        if self.b_on_b + self.a_on_b > b {
            return bad("B-region segments covered more than once");
        }
        Ok(())
    }

    /// Checks region capacities and that `x` has enough blocks of each kind.
    pub fn check(&self, x: &Architecture, inst: &UniformInstance) -> Result<()> {
        self.check_regions(inst)?;
        if self.b_on_b + self.b_on_c > x.n_b {
            return Err(LabError::InfeasibleAllocation("uses more B blocks than available".into()));
        }
        if self.c_on_c + self.c_on_b > x.n_c {
            return Err(LabError::InfeasibleAllocation("uses more C blocks than available".into()));
        }
        if self.a_on_a + self.a_on_b > x.n_a {
            return Err(LabError::InfeasibleAllocation("uses more A blocks than available".into()));
        }
        Ok(())
    }

    /// Block counts actually placed.
    pub fn used(&self) -> Architecture {
        Architecture::new(
            self.a_on_a + self.a_on_b,
            self.b_on_b + self.b_on_c,
            self.c_on_c + self.c_on_b,
        )
    }

    /// `(i, j)` without the feasibility check; `j` is negative when B blocks
    /// on C-regions mislabel more segments than the rest cover.
    fn signed_levels(&self) -> (i64, i64) {
        let i = self.b_on_b + self.c_on_b + self.c_on_c + self.b_on_c;
        let j = (self.b_on_b + self.a_on_b + self.a_on_a) as i64 - self.b_on_c as i64;
        (i as i64, j)
    }

    fn levels_unchecked(&self) -> Levels {
        let (i, j) = self.signed_levels();
        debug_assert!(j >= 0);
        Levels::new(i as u32, j as u32)
    }
}

pub fn literal_levels(x: &Architecture, inst: &UniformInstance) -> Levels {
    let (a, b, c) = (inst.a() as i64, inst.b() as i64, inst.c() as i64);
    let (na, nb, nc) = (x.n_a as i64, x.n_b as i64, x.n_c as i64);
    let i = nb.min(b) + nc.min(c);
    let penalty = 0.max((nb - b).min(c - nc));
    let j = na.min(a) + nb.min(b) - penalty;
    debug_assert!(j >= 0);
    Levels::new(i as u32, j as u32)
}

pub fn literal_fitness(x: &Architecture, inst: &UniformInstance) -> FitnessScore {
    FitnessScore::from_levels(literal_levels(x, inst), inst, Semantics::Literal)
}

/// `(i, j)` of a placement. Rejects allocations that over-cover a region or
/// score below the empty network on segments (`j < 0`).
pub fn allocation_levels(al: &Allocation, inst: &UniformInstance) -> Result<Levels> {
    al.check_regions(inst)?;
    let (i, j) = al.signed_levels();
    if j < 0 {
        return Err(LabError::InfeasibleAllocation(format!("segment level {j} is below zero")));
    }
    Ok(Levels::new(i as u32, j as u32))
}

/// Block counts beyond these never change the best placement.
pub fn effective_counts(x: &Architecture, inst: &UniformInstance) -> Architecture {
    Architecture::new(
        x.n_a.min(inst.max_j()),
        x.n_b.min(inst.max_i()),
        x.n_c.min(inst.max_i()),
    )
}

/// Exhaustive search over every feasible allocation.
///
/// Returns the allocation with the greatest `(i, j)`, ties going to the
/// lexicographically smallest `(b_on_b, b_on_c, c_on_c, c_on_b, a_on_a, a_on_b)`.
pub fn best_allocation_bruteforce(
    x: &Architecture,
    inst: &UniformInstance,
    cap: u32,
) -> Result<Allocation> {
    let eff = effective_counts(x, inst);
    for count in [eff.n_a, eff.n_b, eff.n_c] {
        if count > cap {
            return Err(LabError::BudgetExceeded { count, cap });
        }
    }
    let (a, b, c) = (inst.a(), inst.b(), inst.c());

    let mut best: Option<((i64, i64), Allocation)> = None;
    for b_on_b in 0..=eff.n_b.min(b) {
        for b_on_c in 0..=(eff.n_b - b_on_b).min(c) {
            for c_on_c in 0..=eff.n_c.min(c - b_on_c) {
                for c_on_b in 0..=(eff.n_c - c_on_c).min(b - b_on_b) {
                    for a_on_a in 0..=eff.n_a.min(a) {
                        for a_on_b in 0..=(eff.n_a - a_on_a).min(b - b_on_b) {
                            let al = Allocation {
                                b_on_b,
                                b_on_c,
                                c_on_c,
                                c_on_b,
                                a_on_a,
                                a_on_b,
                            };
                            let lv = al.signed_levels();
                            let better = match &best {
                                None => true,
                                Some((blv, bal)) => {
                                    lv > *blv || (lv == *blv && al.tuple() < bal.tuple())
                                }
                            };
                            if better {
                                best = Some((lv, al));
                            }
                        }
                    }
                }
            }
        }
    }
    // The zero allocation is always feasible, so `best` is set.
    Ok(best.map(|(_, al)| al).unwrap_or_default())
}

/// Optimal placement in constant time: matched blocks first, then spare B/C
/// blocks onto the other kind's triangles, then A blocks onto free segments.
pub fn best_allocation_greedy(x: &Architecture, inst: &UniformInstance) -> Allocation {
    let (a, b, c) = (inst.a(), inst.b(), inst.c());
    let b_on_b = x.n_b.min(b);
    let c_on_c = x.n_c.min(c);
    let c_on_b = (x.n_c - c_on_c).min(b - b_on_b);
    let b_on_c = (x.n_b - b_on_b).min(c - c_on_c);
    let a_on_a = x.n_a.min(a);
    let a_on_b = (x.n_a - a_on_a).min(b - b_on_b);
    Allocation {
        b_on_b,
        b_on_c,
        c_on_c,
        c_on_b,
        a_on_a,
        a_on_b,
    }
}

pub fn placement_levels(x: &Architecture, inst: &UniformInstance) -> Levels {
    best_allocation_greedy(x, inst).levels_unchecked()
}

pub fn placement_fitness(x: &Architecture, inst: &UniformInstance) -> FitnessScore {
    FitnessScore::from_levels(placement_levels(x, inst), inst, Semantics::Placement)
}

pub fn levels(x: &Architecture, inst: &UniformInstance, semantics: Semantics) -> Levels {
    match semantics {
        Semantics::Literal => literal_levels(x, inst),
        Semantics::Placement => placement_levels(x, inst),
    }
}

pub fn fitness(x: &Architecture, inst: &UniformInstance, semantics: Semantics) -> FitnessScore {
    FitnessScore::from_levels(levels(x, inst, semantics), inst, semantics)
}

pub fn compare(fa: &FitnessScore, fb: &FitnessScore) -> Result<Ordering> {
    if fa.semantics != fb.semantics {
        return Err(LabError::MixedSemantics(fa.semantics, fb.semantics));
    }
    Ok(fa.levels().cmp(&fb.levels()))
}

pub fn is_optimal(x: &Architecture, inst: &UniformInstance, semantics: Semantics) -> bool {
    levels(x, inst, semantics) == Levels::new(inst.max_i(), inst.max_j())
}
