//! Command-line front end: flag and config-file resolution, output files and
//! exit codes.
//!
//! Flags override config-file values, which override built-in defaults. The
//! config file is either flat `key = value` text (keys are the long flag names
//! without dashes) or the JSON written as `config` in any summary file, so a
//! previous run can be replayed exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::enas::{self, MutationMode, TrialConfig, TrialResult, DEFAULT_MAX_GENERATIONS};
use crate::error::LabError;
use crate::fitness::{Architecture, Semantics};
use crate::geometry::UniformInstance;
use crate::harness::{self, DriftRecord, SRule, SweepCell, SweepConfig, TrialRecord};
use crate::seeds;
use crate::validation;

pub const WORKERS_ENV: &str = "ENAS_LAB_WORKERS";

/// Note embedded in every summary: the sweep grid uses multiples of 4.
pub const N_GRID_NOTE: &str =
    "n restricted to multiples of 4 (b = c = n/4 must be integral); default grid 12..100 step 4";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Validation(_) => "validation",
            CliError::Io(_) => "io",
        }
    }

    /// Single-line JSON for standard error.
    pub fn to_json_line(&self) -> String {
        serde_json::json!({ "error": self.kind(), "message": self.to_string() }).to_string()
    }
}

impl From<LabError> for CliError {
    fn from(e: LabError) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

#[derive(Debug, Parser)]
#[command(name = "enas-lab", version, about = "(1+1)-ENAS runtime experiments on the UNIFORM problem")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a single trial.
    Run(Flags),
    /// Run trials over a grid of (n, mode, semantics) cells.
    Sweep(Flags),
    /// Estimate per-phase one-step drift from recorded trajectories.
    Drift(Flags),
    /// Check greedy placement against enumeration and closed-form fitness against Monte Carlo.
    ValidateFitness(Flags),
    /// Check operator, K and initialization distributions.
    ValidateDistributions(Flags),
    /// List architectures where literal and placement fitness disagree.
    DiscrepancyScan(Flags),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Run(_) => "run",
            Command::Sweep(_) => "sweep",
            Command::Drift(_) => "drift",
            Command::ValidateFitness(_) => "validate-fitness",
            Command::ValidateDistributions(_) => "validate-distributions",
            Command::DiscrepancyScan(_) => "discrepancy-scan",
        }
    }

    fn flags(&self) -> &Flags {
        match self {
            Command::Run(f)
            | Command::Sweep(f)
            | Command::Drift(f)
            | Command::ValidateFitness(f)
            | Command::ValidateDistributions(f)
            | Command::DiscrepancyScan(f) => f,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Problem sizes: `16`, `12..100:4` or a comma list of either.
    #[arg(long)]
    pub n: Option<String>,
    /// Mutation modes: `onebit`, `multibit` or both comma-separated.
    #[arg(long, alias = "mode")]
    pub modes: Option<String>,
    /// `literal`, `placement` or `both`.
    #[arg(long)]
    pub semantics: Option<String>,
    #[arg(long)]
    pub trials: Option<u64>,
    /// Initialization bound: an integer or `quarter-n`.
    #[arg(long)]
    pub s: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long = "max-gens")]
    pub max_gens: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub trajectory: bool,
    #[arg(long = "strict-selection")]
    pub strict_selection: bool,
    /// Enumeration cap for architecture cubes `[0, cap]^3`.
    #[arg(long)]
    pub cap: Option<u32>,
    /// Monte Carlo / sampling budget.
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Fully resolved settings, embedded in every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub command: String,
    pub n_values: Vec<u32>,
    pub modes: Vec<MutationMode>,
    pub semantics: Vec<Semantics>,
    pub trials: u64,
    pub s_rule: SRule,
    pub seed: u64,
    pub max_generations: u64,
    pub workers: usize,
    pub out: PathBuf,
    pub trajectory: bool,
    pub strict_selection: bool,
    pub cap: u32,
    pub samples: u64,
}

impl ResolvedConfig {
    pub fn defaults(command: &str) -> Self {
        let grid: Vec<u32> = (12..=100).step_by(4).collect();
        let (n_values, trials, s_rule) = match command {
            "run" => (vec![16], 1, SRule::QuarterN),
            "drift" => (vec![64], 1_000, SRule::QuarterN),
            "validate-fitness" | "discrepancy-scan" => (vec![8, 16], 1, SRule::QuarterN),
            "validate-distributions" => (vec![16], 1, SRule::Fixed(25)),
            _ => (grid, 10_000, SRule::QuarterN),
        };
        let modes = match command {
            "run" => vec![MutationMode::OneBit],
            "drift" => vec![MutationMode::MultiBit],
            _ => vec![MutationMode::OneBit, MutationMode::MultiBit],
        };
        let samples = match command {
            "validate-fitness" => 200_000,
            _ => 1_000_000,
        };
        Self {
            command: command.to_string(),
            n_values,
            modes,
            semantics: vec![Semantics::Literal],
            trials,
            s_rule,
            seed: 42,
            max_generations: DEFAULT_MAX_GENERATIONS,
            workers: default_workers(),
            out: PathBuf::from("results"),
            trajectory: false,
            strict_selection: false,
            cap: 10,
            samples,
        }
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let bad = |what: &str| CliError::Usage(format!("invalid value '{value}' for {what}"));
        match key {
            "n" => self.n_values = parse_n_list(value)?,
            "modes" | "mode" => self.modes = parse_modes(value)?,
            "semantics" => self.semantics = parse_semantics(value)?,
            "trials" => self.trials = value.parse().map_err(|_| bad("trials"))?,
            "s" => self.s_rule = value.parse()?,
            "seed" => self.seed = value.parse().map_err(|_| bad("seed"))?,
            "max-gens" | "max_gens" | "max_generations" => {
                self.max_generations = value.parse().map_err(|_| bad("max-gens"))?
            }
            "workers" => self.workers = value.parse().map_err(|_| bad("workers"))?,
            "out" => self.out = PathBuf::from(value),
            "trajectory" => self.trajectory = parse_bool(value).ok_or_else(|| bad("trajectory"))?,
            "strict-selection" | "strict_selection" => {
                self.strict_selection = parse_bool(value).ok_or_else(|| bad("strict-selection"))?
            }
            "cap" => self.cap = value.parse().map_err(|_| bad("cap"))?,
            "samples" => self.samples = value.parse().map_err(|_| bad("samples"))?,
            other => return Err(CliError::Usage(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    fn apply_flags(&mut self, f: &Flags) -> Result<(), CliError> {
        if let Some(v) = &f.n {
            self.n_values = parse_n_list(v)?;
        }
        if let Some(v) = &f.modes {
            self.modes = parse_modes(v)?;
        }
        if let Some(v) = &f.semantics {
            self.semantics = parse_semantics(v)?;
        }
        if let Some(v) = f.trials {
            self.trials = v;
        }
        if let Some(v) = &f.s {
            self.s_rule = v.parse()?;
        }
        if let Some(v) = f.seed {
            self.seed = v;
        }
        if let Some(v) = f.max_gens {
            self.max_generations = v;
        }
        if let Some(v) = f.workers {
            self.workers = v;
        }
        if let Some(v) = &f.out {
            self.out = v.clone();
        }
        self.trajectory |= f.trajectory;
        self.strict_selection |= f.strict_selection;
        if let Some(v) = f.cap {
            self.cap = v;
        }
        if let Some(v) = f.samples {
            self.samples = v;
        }
        Ok(())
    }

    fn check(&self) -> Result<(), CliError> {
        for &n in &self.n_values {
            UniformInstance::new(n)?;
        }
        let positive = [
            (self.trials == 0, "trials"),
            (self.workers == 0, "workers"),
            (self.max_generations == 0, "max-gens"),
            (self.samples == 0, "samples"),
        ];
        if let Some((_, name)) = positive.iter().find(|(bad, _)| *bad) {
            return Err(CliError::Usage(format!("{name} must be at least 1")));
        }
        if self.n_values.is_empty() || self.modes.is_empty() || self.semantics.is_empty() {
            return Err(CliError::Usage("n, modes and semantics must be non-empty".into()));
        }
        Ok(())
    }

    pub fn sweep_config(&self) -> SweepConfig {
        SweepConfig {
            n_values: self.n_values.clone(),
            modes: self.modes.clone(),
            semantics: self.semantics.clone(),
            trials: self.trials,
            s_rule: self.s_rule,
            master_seed: self.seed,
            workers: self.workers,
            max_generations: self.max_generations,
            strict_selection: self.strict_selection,
        }
    }
}

fn default_workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&w| w >= 1)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

fn parse_bool(v: &str) -> Option<bool> {
    match v.trim().to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "on" => Some(true),
        "false" | "0" | "no" | "off" => Some(false),
        _ => None,
    }
}

/// Parses `16`, `12..100:4`, `12..24` (step 4) or comma lists of those.
pub fn parse_n_list(spec: &str) -> Result<Vec<u32>, CliError> {
    let bad = || CliError::Usage(format!("invalid n specification '{spec}'"));
    let mut out = Vec::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((lo, rest)) = item.split_once("..") {
            let (hi, step) = match rest.split_once(':') {
                Some((hi, step)) => (hi, step.trim().parse::<u32>().map_err(|_| bad())?),
                None => (rest, 4),
            };
            let lo: u32 = lo.trim().parse().map_err(|_| bad())?;
            let hi: u32 = hi.trim().parse().map_err(|_| bad())?;
            if step == 0 || lo > hi {
                return Err(bad());
            }
            out.extend((lo..=hi).step_by(step as usize));
        } else {
            out.push(item.parse().map_err(|_| bad())?);
        }
    }
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}

fn parse_modes(spec: &str) -> Result<Vec<MutationMode>, CliError> {
    if spec.trim().eq_ignore_ascii_case("both") {
        return Ok(vec![MutationMode::OneBit, MutationMode::MultiBit]);
    }
    spec.split(',')
        .map(|m| m.parse::<MutationMode>().map_err(CliError::from))
        .collect()
}

fn parse_semantics(spec: &str) -> Result<Vec<Semantics>, CliError> {
    if spec.trim().eq_ignore_ascii_case("both") {
        return Ok(vec![Semantics::Literal, Semantics::Placement]);
    }
    spec.split(',')
        .map(|s| s.parse::<Semantics>().map_err(CliError::from))
        .collect()
}

/// Applies a config file on top of `base`. JSON input replaces the settings
/// wholesale (keeping the command name); key-value text updates them.
fn apply_config_file(base: &mut ResolvedConfig, path: &Path) -> Result<(), CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    if text.trim_start().starts_with('{') {
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let inner = value.get("config").cloned().unwrap_or(value);
        let mut cfg: ResolvedConfig =
            serde_json::from_value(inner).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        cfg.command = base.command.clone();
        *base = cfg;
        return Ok(());
    }
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("{}:{}: expected 'key = value'", path.display(), lineno + 1))
        })?;
        base.set(key.trim(), value.trim())?;
    }
    Ok(())
}

pub fn resolve(command: &Command) -> Result<ResolvedConfig, CliError> {
    let flags = command.flags();
    let mut cfg = ResolvedConfig::defaults(command.name());
    if let Some(path) = &flags.config {
        apply_config_file(&mut cfg, path)?;
    }
    cfg.apply_flags(flags)?;
    cfg.check()?;
    Ok(cfg)
}

fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub const CELLS_HEADER: &str = "n,mode,semantics,trials,mean,std,se,ci95_lo,ci95_hi,min,max,theory_upper,capped";
pub const TRIALS_HEADER: &str =
    "trial,seed,n,mode,semantics,generations,init_nA,init_nB,init_nC,final_nA,final_nB,final_nC,hit_cap";
pub const TRAJECTORY_HEADER: &str = "generation,nA,nB,nC,i,j,accepted,k";
pub const DRIFT_HEADER: &str = "n,mode,semantics,phase,samples,mean_decrease,se,max_step";
pub const DISCREPANCY_HEADER: &str =
    "n,nA,nB,nC,literal_i,literal_j,placement_i,placement_j,literal_optimal,placement_optimal";

pub fn cells_csv(cells: &[SweepCell]) -> String {
    let mut s = String::from(CELLS_HEADER);
    s.push('\n');
    for c in cells {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            c.n,
            c.mode,
            c.semantics,
            c.trials,
            fmt_f64(c.mean),
            fmt_f64(c.std),
            fmt_f64(c.std_error),
            fmt_f64(c.ci95_low),
            fmt_f64(c.ci95_high),
            c.min,
            c.max,
            fmt_opt(c.theory_upper),
            c.capped_trials
        );
    }
    s
}

pub fn trials_csv(trials: &[TrialRecord]) -> String {
    let mut s = String::from(TRIALS_HEADER);
    s.push('\n');
    for t in trials {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            t.trial,
            t.seed,
            t.n,
            t.mode,
            t.semantics,
            t.generations,
            t.initial.n_a,
            t.initial.n_b,
            t.initial.n_c,
            t.final_arch.n_a,
            t.final_arch.n_b,
            t.final_arch.n_c,
            t.hit_cap
        );
    }
    s
}

pub fn trajectory_csv(result: &TrialResult) -> String {
    let mut s = String::from(TRAJECTORY_HEADER);
    s.push('\n');
    for r in result.trajectory.iter().flatten() {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.generation, r.parent.n_a, r.parent.n_b, r.parent.n_c, r.levels.i, r.levels.j, r.accepted, r.k
        );
    }
    s
}

pub fn drift_csv(rows: &[(u32, MutationMode, Semantics, DriftRecord)]) -> String {
    let mut s = String::from(DRIFT_HEADER);
    s.push('\n');
    for (n, mode, sem, r) in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            n,
            mode,
            sem,
            r.phase,
            r.samples,
            fmt_opt(r.mean_one_step_decrease),
            fmt_opt(r.std_error),
            r.max_step
        );
    }
    s
}

pub fn discrepancy_csv(rows: &[(u32, validation::Discrepancy)]) -> String {
    let mut s = String::from(DISCREPANCY_HEADER);
    s.push('\n');
    for (n, d) in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{}",
            n,
            d.arch.n_a,
            d.arch.n_b,
            d.arch.n_c,
            d.literal.i,
            d.literal.j,
            d.placement.i,
            d.placement.j,
            d.literal_optimal,
            d.placement_optimal
        );
    }
    s
}

fn metadata() -> serde_json::Value {
    serde_json::json!({
        "tool": "enas-lab",
        "version": env!("CARGO_PKG_VERSION"),
        "n_grid": N_GRID_NOTE,
    })
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| io_err(&path, e))?;
    Ok(path)
}

fn to_json(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable output");
    s.push('\n');
    s
}

fn single_n(cfg: &ResolvedConfig) -> Result<u32, CliError> {
    match cfg.n_values.as_slice() {
        [n] => Ok(*n),
        _ => Err(CliError::Usage("this command takes a single --n value".into())),
    }
}

fn cmd_run(cfg: &ResolvedConfig) -> Result<String, CliError> {
    let n = single_n(cfg)?;
    let (mode, semantics) = match (cfg.modes.as_slice(), cfg.semantics.as_slice()) {
        ([m], [s]) => (*m, *s),
        _ => return Err(CliError::Usage("run takes a single mode and a single semantics".into())),
    };
    let tc = TrialConfig {
        n,
        s: cfg.s_rule.resolve(n),
        mode,
        semantics,
        seed: cfg.seed,
        max_generations: cfg.max_generations,
        record_trajectory: cfg.trajectory,
        strict_selection: cfg.strict_selection,
    };
    let res = enas::run_trial(&tc)?;
    let summary = serde_json::json!({
        "config": cfg,
        "metadata": metadata(),
        "result": {
            "generations": res.generations,
            "initial": res.initial,
            "final": res.final_arch,
            "hit_cap": res.hit_cap,
        },
    });
    write_file(&cfg.out, "run.json", &to_json(&summary))?;
    if cfg.trajectory {
        write_file(&cfg.out, "trajectory.csv", &trajectory_csv(&res))?;
    }
    Ok(to_json(&summary["result"]))
}

fn cmd_sweep(cfg: &ResolvedConfig) -> Result<String, CliError> {
    let outcome = harness::run_sweep(&cfg.sweep_config())?;
    let cells = cells_csv(&outcome.cells);
    write_file(&cfg.out, "cells.csv", &cells)?;
    write_file(&cfg.out, "trials.csv", &trials_csv(&outcome.trials))?;
    let summary = serde_json::json!({
        "config": cfg,
        "metadata": metadata(),
        "cells": outcome.cells,
        "bounds": harness::check_bounds(&outcome.cells),
    });
    write_file(&cfg.out, "summary.json", &to_json(&summary))?;
    Ok(cells)
}

fn cmd_drift(cfg: &ResolvedConfig) -> Result<String, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    let mut rows = Vec::new();
    for &n in &cfg.n_values {
        for &mode in &cfg.modes {
            for &semantics in &cfg.semantics {
                let tc = TrialConfig {
                    n,
                    s: cfg.s_rule.resolve(n),
                    mode,
                    semantics,
                    seed: harness::trial_seed(cfg.seed, n, mode, semantics, 0),
                    max_generations: cfg.max_generations,
                    record_trajectory: true,
                    strict_selection: cfg.strict_selection,
                };
                let recs = pool.install(|| harness::estimate_drift(&tc, cfg.trials))?;
                rows.extend(recs.into_iter().map(|r| (n, mode, semantics, r)));
            }
        }
    }
    let csv = drift_csv(&rows);
    write_file(&cfg.out, "drift.csv", &csv)?;
    Ok(csv)
}

#[derive(Debug, Clone, Serialize)]
struct CheckLine {
    name: String,
    pass: bool,
    detail: String,
}

fn render_checks(checks: &[CheckLine]) -> String {
    checks
        .iter()
        .map(|c| format!("{} {}: {}\n", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail))
        .collect()
}

fn finish_checks(cfg: &ResolvedConfig, file: &str, checks: Vec<CheckLine>) -> Result<String, CliError> {
    let report = serde_json::json!({ "config": cfg, "metadata": metadata(), "checks": checks });
    write_file(&cfg.out, file, &to_json(&report))?;
    let text = render_checks(&checks);
    let failed = checks.iter().filter(|c| !c.pass).count();
    if failed > 0 {
        print!("{text}");
        return Err(CliError::Validation(format!("{failed} check(s) failed")));
    }
    Ok(text)
}

fn cmd_validate_fitness(cfg: &ResolvedConfig) -> Result<String, CliError> {
    let mut checks = Vec::new();
    for &n in &cfg.n_values {
        let inst = UniformInstance::new(n)?;
        let (cases, mismatches) = validation::greedy_vs_bruteforce(&inst, cfg.cap)?;
        checks.push(CheckLine {
            name: format!("n={n} greedy-vs-bruteforce"),
            pass: mismatches.is_empty(),
            detail: format!("{cases} architectures in [0,{}]^3, {} mismatches", cfg.cap, mismatches.len()),
        });

        let (a, b, c) = (inst.a(), inst.b(), inst.c());
        let shift = b.min(2);
        for (label, x) in [
            ("canonical optimum", Architecture::new(a, b, c)),
            ("compensated optimum", Architecture::new(a + shift, b - shift, c + shift)),
        ] {
            let g = validation::geometric_check(&x, &inst, cfg.samples, seeds::derive_seed(cfg.seed, &[n as u64]))?;
            checks.push(CheckLine {
                name: format!("n={n} {label} {x}"),
                pass: g.estimate == 1.0,
                detail: format!("accuracy {}", g.estimate),
            });
        }

        let archs = validation::random_architectures(50, cfg.cap, seeds::derive_seed(cfg.seed, &[n as u64, 1]));
        let mut agree = 0;
        for (k, x) in archs.iter().enumerate() {
            let g = validation::geometric_check(x, &inst, cfg.samples, seeds::derive_seed(cfg.seed, &[n as u64, 2, k as u64]))?;
            agree += g.within_4se as usize;
        }
        checks.push(CheckLine {
            name: format!("n={n} monte-carlo-vs-closed-form"),
            pass: agree >= 48,
            detail: format!("{agree}/50 within 4 standard errors at {} samples", cfg.samples),
        });
    }
    finish_checks(cfg, "validate_fitness.json", checks)
}

fn cmd_validate_distributions(cfg: &ResolvedConfig) -> Result<String, CliError> {
    let seed = |k: u64| seeds::derive_seed(cfg.seed, &[k]);
    let ops = validation::operator_statistics(cfg.samples, seed(0));
    let ks = validation::k_statistics(cfg.samples, seed(1));
    let s = cfg.s_rule.resolve(cfg.n_values[0]);
    let z0 = validation::z0_statistics(s, cfg.samples, seed(2));

    let near = |name: &str, emp: f64, exact: f64, tol: f64| CheckLine {
        name: name.to_string(),
        pass: (emp - exact).abs() <= tol,
        detail: format!("empirical {emp}, expected {exact}, tolerance {tol}"),
    };
    let k_at = |k: usize| ks.frequencies.get(k).copied().unwrap_or(0.0);
    let checks = vec![
        near("P(add B or C)", ops.add_b_or_c, 2.0 / 9.0, 0.005),
        near("P(modify A to B/C)", ops.modify_a_to_b_or_c, 1.0 / 9.0, 0.005),
        near("P(modify B to C)", ops.modify_b_to_c, 1.0 / 18.0, 0.005),
        near("P(K=1)", k_at(1), validation::k_pmf(1), 0.005),
        near("P(K=3)", k_at(3), validation::k_pmf(3), 0.005),
        near(&format!("E[Z0] at s={s}"), z0.mean, s as f64, 0.1),
        CheckLine {
            name: format!("TV(Z0) at s={s}"),
            pass: z0.tv_distance <= 0.005,
            detail: format!("total variation {}, tolerance 0.005", z0.tv_distance),
        },
    ];
    finish_checks(cfg, "validate_distributions.json", checks)
}

fn cmd_discrepancy_scan(cfg: &ResolvedConfig) -> Result<String, CliError> {
    let mut rows = Vec::new();
    let mut summary = String::new();
    for &n in &cfg.n_values {
        let inst = UniformInstance::new(n)?;
        let found = validation::discrepancy_scan(&inst, cfg.cap);
        let _ = writeln!(
            summary,
            "n={n}: {} of {} architectures in [0,{}]^3 differ",
            found.len(),
            (cfg.cap as u64 + 1).pow(3),
            cfg.cap
        );
        rows.extend(found.into_iter().map(|d| (n, d)));
    }
    write_file(&cfg.out, "discrepancy.csv", &discrepancy_csv(&rows))?;
    Ok(summary)
}

/// Runs a parsed command and returns what it prints on success.
pub fn execute(cli: &Cli) -> Result<String, CliError> {
    let cfg = resolve(&cli.command)?;
    match &cli.command {
        Command::Run(_) => cmd_run(&cfg),
        Command::Sweep(_) => cmd_sweep(&cfg),
        Command::Drift(_) => cmd_drift(&cfg),
        Command::ValidateFitness(_) => cmd_validate_fitness(&cfg),
        Command::ValidateDistributions(_) => cmd_validate_distributions(&cfg),
        Command::DiscrepancyScan(_) => cmd_discrepancy_scan(&cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n_specs() {
        assert_eq!(parse_n_list("16").unwrap(), vec![16]);
        assert_eq!(parse_n_list("12..24:4").unwrap(), vec![12, 16, 20, 24]);
        assert_eq!(parse_n_list("12..20").unwrap(), vec![12, 16, 20]);
        assert_eq!(parse_n_list("8, 16,32..40:8").unwrap(), vec![8, 16, 32, 40]);
        for bad in ["", "x", "12..", "20..12:4", "12..20:0"] {
            assert!(parse_n_list(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn headers_are_pinned() {
        assert_eq!(
            CELLS_HEADER,
            "n,mode,semantics,trials,mean,std,se,ci95_lo,ci95_hi,min,max,theory_upper,capped"
        );
        assert_eq!(
            TRIALS_HEADER,
            "trial,seed,n,mode,semantics,generations,init_nA,init_nB,init_nC,final_nA,final_nB,final_nC,hit_cap"
        );
    }

    #[test]
    fn floats_use_shortest_round_trip() {
        for x in [0.1, 1.0 / 3.0, 252.0, 1e-7, 123456.789] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(252.0), "252");
        assert_eq!(fmt_opt(None), "");
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lab.conf");
        fs::write(&path, "# comment\nn = 12..20:4\ntrials = 7\nseed = 3\nmodes = multibit\n").unwrap();
        let flags = Flags {
            trials: Some(9),
            config: Some(path),
            ..Default::default()
        };
        let cfg = resolve(&Command::Sweep(flags)).unwrap();
        assert_eq!(cfg.n_values, vec![12, 16, 20]);
        assert_eq!(cfg.trials, 9);
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.modes, vec![MutationMode::MultiBit]);
    }

    #[test]
    fn bad_inputs_are_usage_errors() {
        let flags = Flags { n: Some("10".into()), ..Default::default() };
        let err = resolve(&Command::Sweep(flags)).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.conf");
        fs::write(&path, "colour = blue\n").unwrap();
        let flags = Flags { config: Some(path), ..Default::default() };
        assert_eq!(resolve(&Command::Sweep(flags)).unwrap_err().exit_code(), 1);
        let flags = Flags { config: Some(dir.path().join("missing.conf")), ..Default::default() };
        assert_eq!(resolve(&Command::Sweep(flags)).unwrap_err().exit_code(), 3);
    }

    #[test]
    fn error_line_is_json() {
        let line = CliError::Io("disk full".into()).to_json_line();
        let v: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert_eq!(v["error"], "io");
        assert_eq!(v["message"], "disk full");
    }
}
