//! The UNIFORM problem on the unit disk.
//!
//! The disk is cut into `n` equal sectors. Each sector splits into the
//! inscribed triangle (origin plus the two arc endpoints) and the circular
//! segment beyond the chord. Sectors come in three kinds:
//!
//! * `A`: green segment, white triangle (a half-space region)
//! * `B`: the whole sector is green (an unbounded polyhedron)
//! * `C`: green triangle, white segment (a bounded polyhedron)
//!
//! Points labeled 1 are the green ones.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionKind {
    A,
    B,
    C,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegionSpec {
    pub index: u32,
    pub kind: RegionKind,
}

/// A point of the closed unit disk in polar coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskPoint {
    pub r: f64,
    pub phi: f64,
}

impl DiskPoint {
    /// Builds a point, normalizing `phi` into `[0, 2π)`.
    ///
    /// Panics if `r` is outside `[0, 1]`.
    pub fn new(r: f64, phi: f64) -> Self {
        assert!((0.0..=1.0).contains(&r), "radius {r} outside the unit disk");
        let mut phi = phi.rem_euclid(TAU);
        if phi >= TAU {
            phi = 0.0;
        }
        Self { r, phi }
    }

    /// Maps two unit uniforms onto the disk so that the result is uniform in area.
    pub fn from_unit_uniforms(u: f64, v: f64) -> Self {
        Self::new(u.sqrt(), TAU * v)
    }

    pub fn x(&self) -> f64 {
        self.r * self.phi.cos()
    }

    pub fn y(&self) -> f64 {
        self.r * self.phi.sin()
    }
}

/// A validated UNIFORM instance with its derived region counts and areas.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformInstance {
    n: u32,
    a: u32,
    b: u32,
    c: u32,
    triangle_area: f64,
    segment_area: f64,
}

impl UniformInstance {
    pub fn new(n: u32) -> Result<Self> {
        if n < 8 || !n.is_multiple_of(4) {
            return Err(LabError::InvalidSize(n));
        }
        let triangle_area = 0.5 * (TAU / n as f64).sin();
        let segment_area = PI / n as f64 - triangle_area;
        let inst = Self {
            n,
            a: n / 2,
            b: n / 4,
            c: n / 4,
            triangle_area,
            segment_area,
        };
        // Lexicographic selection on (i, j) relies on this.
        debug_assert!(inst.dominance_margin() > 0.0);
        Ok(inst)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn a(&self) -> u32 {
        self.a
    }

    pub fn b(&self) -> u32 {
        self.b
    }

    pub fn c(&self) -> u32 {
        self.c
    }

    pub fn triangle_area(&self) -> f64 {
        self.triangle_area
    }

    pub fn segment_area(&self) -> f64 {
        self.segment_area
    }

    /// Angular width 2π/n of one sector.
    pub fn sector_angle(&self) -> f64 {
        TAU / self.n as f64
    }

    /// Distance from the origin to every chord, cos(π/n).
    pub fn chord_distance(&self) -> f64 {
        (PI / self.n as f64).cos()
    }

    /// `T - (3n/4)·S`. Positive for every valid n: one extra triangle outweighs
    /// every achievable segment gain.
    pub fn dominance_margin(&self) -> f64 {
        self.triangle_area - 0.75 * self.n as f64 * self.segment_area
    }

    /// Largest triangle level `b + c`.
    pub fn max_i(&self) -> u32 {
        self.b + self.c
    }

    /// Largest segment level `a + b`.
    pub fn max_j(&self) -> u32 {
        self.a + self.b
    }

    /// Exact green (label 1) area divided by π.
    pub fn green_fraction(&self) -> f64 {
        let (t, s) = (self.triangle_area, self.segment_area);
        (self.b as f64 * (t + s) + self.a as f64 * s + self.c as f64 * t) / PI
    }

    pub fn region_of(&self, k: u32) -> Result<RegionSpec> {
        if k >= self.n {
            return Err(LabError::RegionOutOfRange { index: k, n: self.n });
        }
        Ok(RegionSpec {
            index: k,
            kind: kind_at(k),
        })
    }

    pub fn regions(&self) -> impl Iterator<Item = RegionSpec> + '_ {
        (0..self.n).map(|k| RegionSpec {
            index: k,
            kind: kind_at(k),
        })
    }

    /// Sector containing `p`. Sector k spans `[k·2π/n, (k+1)·2π/n)`.
    pub fn sector_of(&self, p: &DiskPoint) -> u32 {
        let k = (p.phi / self.sector_angle()).floor() as u32;
        k.min(self.n - 1)
    }

    /// Whether `p` lies in the closed triangle of its own sector.
    pub fn in_triangle(&self, p: &DiskPoint) -> bool {
        let k = self.sector_of(p);
        let half = PI / self.n as f64;
        let offset = p.phi - k as f64 * self.sector_angle();
        p.r * (offset - half).cos() <= self.chord_distance()
    }

    /// Ground-truth label of `p`.
    pub fn label_point(&self, p: &DiskPoint) -> u8 {
        let kind = kind_at(self.sector_of(p));
        let green = match kind {
            RegionKind::B => true,
            RegionKind::A => !self.in_triangle(p),
            RegionKind::C => self.in_triangle(p),
        };
        green as u8
    }
}

/// Period-4 layout `B, A, C, A` starting at sector 0.
fn kind_at(k: u32) -> RegionKind {
    match k % 4 {
        0 => RegionKind::B,
        2 => RegionKind::C,
        _ => RegionKind::A,
    }
}

pub fn make_instance(n: u32) -> Result<UniformInstance> {
    UniformInstance::new(n)
}

pub fn sample_disk_point<R: Rng + ?Sized>(rng: &mut R) -> DiskPoint {
    let u: f64 = rng.gen();
    let v: f64 = rng.gen();
    DiskPoint::from_unit_uniforms(u, v)
}
