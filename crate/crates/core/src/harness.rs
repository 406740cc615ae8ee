//! Sweeps over `(n, mode, semantics)`, runtime statistics, empirical drift and
//! checks against the proven runtime bounds.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::enas::{self, MutationMode, TrialConfig, DEFAULT_MAX_GENERATIONS};
use crate::error::{LabError, Result};
use crate::fitness::{Architecture, Semantics};
use crate::geometry::UniformInstance;
use crate::seeds;

/// How the initialization bound `s` is chosen per cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SRule {
    Fixed(u32),
    QuarterN,
}

impl SRule {
    pub fn resolve(&self, n: u32) -> u32 {
        match self {
            SRule::Fixed(s) => *s,
            SRule::QuarterN => n / 4,
        }
    }
}

impl fmt::Display for SRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SRule::Fixed(s) => write!(f, "{s}"),
            SRule::QuarterN => f.write_str("quarter-n"),
        }
    }
}

impl FromStr for SRule {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("quarter-n") {
            return Ok(SRule::QuarterN);
        }
        s.parse()
            .map(SRule::Fixed)
            .map_err(|_| LabError::InvalidConfig(format!("invalid s rule '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub n_values: Vec<u32>,
    pub modes: Vec<MutationMode>,
    pub semantics: Vec<Semantics>,
    pub trials: u64,
    pub s_rule: SRule,
    pub master_seed: u64,
    pub workers: usize,
    pub max_generations: u64,
    pub strict_selection: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            n_values: (12..=100).step_by(4).collect(),
            modes: vec![MutationMode::OneBit, MutationMode::MultiBit],
            semantics: vec![Semantics::Literal],
            trials: 10_000,
            s_rule: SRule::QuarterN,
            master_seed: 42,
            workers: 1,
            max_generations: DEFAULT_MAX_GENERATIONS,
            strict_selection: false,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(LabError::InvalidConfig("trials must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(LabError::InvalidConfig("workers must be at least 1".into()));
        }
        if self.max_generations == 0 {
            return Err(LabError::InvalidConfig("max_generations must be at least 1".into()));
        }
        if self.n_values.is_empty() || self.modes.is_empty() || self.semantics.is_empty() {
            return Err(LabError::InvalidConfig("n, modes and semantics must be non-empty".into()));
        }
        for &n in &self.n_values {
            UniformInstance::new(n)?;
        }
        Ok(())
    }

    /// Cell keys in output order.
    pub fn cell_keys(&self) -> Vec<(u32, MutationMode, Semantics)> {
        let mut keys: Vec<_> = self
            .n_values
            .iter()
            .flat_map(|&n| {
                self.modes
                    .iter()
                    .flat_map(move |&m| self.semantics.iter().map(move |&s| (n, m, s)))
            })
            .collect();
        keys.sort();
        keys.dedup();
        keys
    }

    pub fn trial_config(&self, n: u32, mode: MutationMode, semantics: Semantics, trial: u64) -> TrialConfig {
        TrialConfig {
            n,
            s: self.s_rule.resolve(n),
            mode,
            semantics,
            seed: trial_seed(self.master_seed, n, mode, semantics, trial),
            max_generations: self.max_generations,
            record_trajectory: false,
            strict_selection: self.strict_selection,
        }
    }
}

pub fn trial_seed(master: u64, n: u32, mode: MutationMode, semantics: Semantics, trial: u64) -> u64 {
    let mode_id = match mode {
        MutationMode::OneBit => 0,
        MutationMode::MultiBit => 1,
    };
    let sem_id = match semantics {
        Semantics::Literal => 0,
        Semantics::Placement => 1,
    };
    seeds::derive_seed(master, &[n as u64, mode_id, sem_id, trial])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub seed: u64,
    pub n: u32,
    pub mode: MutationMode,
    pub semantics: Semantics,
    pub generations: u64,
    pub initial: Architecture,
    #[serde(rename = "final")]
    pub final_arch: Architecture,
    pub hit_cap: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub n: u32,
    pub mode: MutationMode,
    pub semantics: Semantics,
    pub trials: u64,
    pub mean: f64,
    pub std: f64,
    pub std_error: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
    pub min: u64,
    pub max: u64,
    /// `63n/4` for one-bit mutation.
    pub theory_upper: Option<f64>,
    pub capped_trials: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOutcome {
    pub cells: Vec<SweepCell>,
    pub trials: Vec<TrialRecord>,
}

/// Sample statistics of generation counts (Welford's update).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningStats {
    count: u64,
    mean: f64,
    m2: f64,
    min: u64,
    max: u64,
}

impl RunningStats {
    pub fn push(&mut self, x: u64) {
        if self.count == 0 {
            self.min = x;
            self.max = x;
        }
        self.min = self.min.min(x);
        self.max = self.max.max(x);
        self.count += 1;
        let xf = x as f64;
        let delta = xf - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (xf - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            f64::NAN
        } else {
            self.mean
        }
    }

    /// Sample standard deviation; zero for a single observation.
    pub fn std(&self) -> f64 {
        match self.count {
            0 => f64::NAN,
            1 => 0.0,
            c => (self.m2 / (c - 1) as f64).sqrt(),
        }
    }

    pub fn std_error(&self) -> f64 {
        self.std() / (self.count as f64).sqrt()
    }
}

fn summarize(n: u32, mode: MutationMode, semantics: Semantics, records: &[TrialRecord]) -> SweepCell {
    let mut stats = RunningStats::default();
    let mut capped = 0;
    for r in records {
        if r.hit_cap {
            capped += 1;
        } else {
            stats.push(r.generations);
        }
    }
    let (mean, se) = (stats.mean(), stats.std_error());
    SweepCell {
        n,
        mode,
        semantics,
        trials: records.len() as u64,
        mean,
        std: stats.std(),
        std_error: se,
        ci95_low: mean - 1.96 * se,
        ci95_high: mean + 1.96 * se,
        min: stats.min,
        max: stats.max,
        theory_upper: (mode == MutationMode::OneBit).then(|| 63.0 * n as f64 / 4.0),
        capped_trials: capped,
    }
}

fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| LabError::InvalidConfig(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepOutcome> {
    cfg.validate()?;
    let keys = cfg.cell_keys();
    let jobs: Vec<(usize, u64)> = (0..keys.len())
        .flat_map(|c| (0..cfg.trials).map(move |t| (c, t)))
        .collect();

    let trials: Vec<TrialRecord> = with_workers(cfg.workers, || {
        jobs.par_iter()
            .map(|&(cell, trial)| {
                let (n, mode, semantics) = keys[cell];
                let tc = cfg.trial_config(n, mode, semantics, trial);
                // n was validated above, so the trial cannot fail.
                let res = enas::run_trial(&tc).expect("validated trial config");
                TrialRecord {
                    trial,
                    seed: tc.seed,
                    n,
                    mode,
                    semantics,
                    generations: res.generations,
                    initial: res.initial,
                    final_arch: res.final_arch,
                    hit_cap: res.hit_cap,
                }
            })
            .collect()
    })?;

    let cells = keys
        .iter()
        .zip(trials.chunks(cfg.trials as usize))
        .map(|(&(n, mode, semantics), chunk)| summarize(n, mode, semantics, chunk))
        .collect();
    Ok(SweepOutcome { cells, trials })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    /// Triangle level below `b + c`; distance `d1 = (b + c) − i`.
    Phase1,
    /// Triangles done; distance `d2 = (a + b) − j`.
    Phase2,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Phase1 => "phase1",
            Phase::Phase2 => "phase2",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftRecord {
    pub phase: Phase,
    /// Mean of `d_t − d_{t+1}` over generations whose parent is in the phase;
    /// `None` when the phase was never visited.
    pub mean_one_step_decrease: Option<f64>,
    pub std_error: Option<f64>,
    pub samples: u64,
    /// Largest absolute one-step change seen.
    pub max_step: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct DriftAcc {
    samples: u64,
    sum: i64,
    sum_sq: u64,
    max_step: u64,
}

impl DriftAcc {
    fn push(&mut self, step: i64) {
        self.samples += 1;
        self.sum += step;
        self.sum_sq += (step * step) as u64;
        self.max_step = self.max_step.max(step.unsigned_abs());
    }

    fn merge(mut self, other: Self) -> Self {
        self.samples += other.samples;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self.max_step = self.max_step.max(other.max_step);
        self
    }

    fn record(&self, phase: Phase) -> DriftRecord {
        let (mean, se) = if self.samples == 0 {
            (None, None)
        } else {
            let n = self.samples as f64;
            let mean = self.sum as f64 / n;
            let var = if self.samples > 1 {
                ((self.sum_sq as f64 - n * mean * mean) / (n - 1.0)).max(0.0)
            } else {
                0.0
            };
            (Some(mean), Some((var / n).sqrt()))
        };
        DriftRecord {
            phase,
            mean_one_step_decrease: mean,
            std_error: se,
            samples: self.samples,
            max_step: self.max_step,
        }
    }
}

/// Pools one-step distance decreases over `trials` trajectories. Trial `t`
/// uses the seed `derive(cfg.seed, t)`.
pub fn estimate_drift(cfg: &TrialConfig, trials: u64) -> Result<Vec<DriftRecord>> {
    if !cfg.record_trajectory {
        return Err(LabError::InvalidConfig("drift estimation needs record_trajectory".into()));
    }
    let inst = cfg.validate()?;
    let (max_i, max_j) = (inst.max_i(), inst.max_j());

    let per_trial: Vec<(DriftAcc, DriftAcc)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let tc = TrialConfig {
                seed: seeds::derive_seed(cfg.seed, &[t]),
                ..cfg.clone()
            };
            let res = enas::run_trial(&tc).expect("validated trial config");
            let traj = res.trajectory.unwrap_or_default();
            let (mut p1, mut p2) = (DriftAcc::default(), DriftAcc::default());
            for w in traj.windows(2) {
                let (before, after) = (w[0].levels, w[1].levels);
                if before.i < max_i {
                    let d = (max_i - before.i) as i64 - (max_i - after.i) as i64;
                    p1.push(d);
                } else {
                    let d = (max_j - before.j) as i64 - (max_j - after.j) as i64;
                    p2.push(d);
                }
            }
            (p1, p2)
        })
        .collect();

    let (p1, p2) = per_trial
        .into_iter()
        .fold((DriftAcc::default(), DriftAcc::default()), |(a1, a2), (b1, b2)| {
            (a1.merge(b1), a2.merge(b2))
        });
    Ok(vec![p1.record(Phase::Phase1), p2.record(Phase::Phase2)])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// `None` when the means have zero variance.
    pub r_squared: Option<f64>,
}

/// Least-squares fit of mean generations against `n`.
pub fn fit_linear(cells: &[SweepCell]) -> Result<LinearFit> {
    if cells.len() < 3 {
        return Err(LabError::InsufficientPoints(format!("{} cells, need at least 3", cells.len())));
    }
    let (mode, semantics) = (cells[0].mode, cells[0].semantics);
    if cells.iter().any(|c| c.mode != mode || c.semantics != semantics) {
        return Err(LabError::InsufficientPoints("cells mix modes or semantics".into()));
    }
    let mut ns: Vec<u32> = cells.iter().map(|c| c.n).collect();
    ns.sort_unstable();
    ns.dedup();
    if ns.len() != cells.len() {
        return Err(LabError::InsufficientPoints("duplicate n values".into()));
    }

    let m = cells.len() as f64;
    let xbar = cells.iter().map(|c| c.n as f64).sum::<f64>() / m;
    let ybar = cells.iter().map(|c| c.mean).sum::<f64>() / m;
    let sxx: f64 = cells.iter().map(|c| (c.n as f64 - xbar).powi(2)).sum();
    let sxy: f64 = cells.iter().map(|c| (c.n as f64 - xbar) * (c.mean - ybar)).sum();
    let syy: f64 = cells.iter().map(|c| (c.mean - ybar).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let r_squared = if syy > 0.0 { Some(sxy * sxy / (sxx * syy)) } else { None };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundKind {
    /// `mean + 3·SE ≤ 63n/4`
    OneBitUpper,
    /// `mean − 3·SE ≥ n/5`
    MultiBitLower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub n: u32,
    pub mode: MutationMode,
    pub semantics: Semantics,
    pub kind: BoundKind,
    pub statistic: f64,
    pub bound: f64,
    pub pass: bool,
}

pub fn check_bounds(cells: &[SweepCell]) -> Vec<BoundCheck> {
    cells
        .iter()
        .map(|c| {
            let n = c.n as f64;
            let (kind, statistic, bound, pass) = match c.mode {
                MutationMode::OneBit => {
                    let stat = c.mean + 3.0 * c.std_error;
                    let bound = 63.0 * n / 4.0;
                    (BoundKind::OneBitUpper, stat, bound, stat <= bound)
                }
                MutationMode::MultiBit => {
                    let stat = c.mean - 3.0 * c.std_error;
                    let bound = n / 5.0;
                    (BoundKind::MultiBitLower, stat, bound, stat >= bound)
                }
            };
            BoundCheck {
                n: c.n,
                mode: c.mode,
                semantics: c.semantics,
                kind,
                statistic,
                bound,
                pass,
            }
        })
        .collect()
}
