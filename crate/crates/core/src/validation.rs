//! Self-checks: greedy placement against enumeration, closed-form fitness
//! against Monte Carlo, and the sampling laws of the mutation machinery.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::enas::{init_architecture, sample_k, sample_op, MutationMode, MutationOp};
use crate::error::Result;
use crate::fitness::{
    allocation_levels, best_allocation_bruteforce, best_allocation_greedy, is_optimal,
    literal_levels, placement_levels, Architecture, BlockKind, Levels, Semantics,
};
use crate::geometry::UniformInstance;
use crate::network::{build_network, monte_carlo_accuracy_par};
use crate::seeds;

/// All architectures in `[0, cap]^3`, in `(n_A, n_B, n_C)` lexicographic order.
pub fn architecture_cube(cap: u32) -> impl Iterator<Item = Architecture> {
    (0..=cap).flat_map(move |a| (0..=cap).flat_map(move |b| (0..=cap).map(move |c| Architecture::new(a, b, c))))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleMismatch {
    pub n: u32,
    pub arch: Architecture,
    pub greedy: Levels,
    pub bruteforce: Levels,
}

/// Compares greedy and exhaustive placements on every architecture in
/// `[0, cap]^3`. Returns the number of cases checked and the mismatches.
pub fn greedy_vs_bruteforce(inst: &UniformInstance, cap: u32) -> Result<(usize, Vec<OracleMismatch>)> {
    let archs: Vec<Architecture> = architecture_cube(cap).collect();
    let results: Vec<Result<Option<OracleMismatch>>> = archs
        .par_iter()
        .map(|x| {
            let greedy = allocation_levels(&best_allocation_greedy(x, inst), inst)?;
            let brute = allocation_levels(&best_allocation_bruteforce(x, inst, cap)?, inst)?;
            Ok((greedy != brute).then(|| OracleMismatch {
                n: inst.n(),
                arch: *x,
                greedy,
                bruteforce: brute,
            }))
        })
        .collect();
    let mut mismatches = Vec::new();
    for r in results {
        if let Some(m) = r? {
            mismatches.push(m);
        }
    }
    Ok((archs.len(), mismatches))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryCheck {
    pub arch: Architecture,
    pub levels: Levels,
    pub closed_form: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub within_4se: bool,
}

/// Builds the greedy network for `x` and compares its Monte Carlo accuracy to
/// the closed-form placement fitness.
pub fn geometric_check(x: &Architecture, inst: &UniformInstance, samples: u64, seed: u64) -> Result<GeometryCheck> {
    let al = best_allocation_greedy(x, inst);
    let levels = allocation_levels(&al, inst)?;
    let closed_form = levels.value(inst);
    let cl = build_network(&al, inst)?;
    let est = monte_carlo_accuracy_par(&cl, samples, seed);
    Ok(GeometryCheck {
        arch: *x,
        levels,
        closed_form,
        estimate: est.estimate,
        std_error: est.std_error,
        within_4se: est.agrees_with(closed_form, 4.0),
    })
}

/// `count` architectures drawn uniformly from `[0, cap]^3`.
pub fn random_architectures(count: usize, cap: u32, seed: u64) -> Vec<Architecture> {
    let mut rng = seeds::rng_from_seed(seed);
    (0..count)
        .map(|_| Architecture::new(rng.gen_range(0..=cap), rng.gen_range(0..=cap), rng.gen_range(0..=cap)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub arch: Architecture,
    pub literal: Levels,
    pub placement: Levels,
    pub literal_optimal: bool,
    pub placement_optimal: bool,
}

/// Architectures in `[0, cap]^3` whose literal and placement levels differ.
pub fn discrepancy_scan(inst: &UniformInstance, cap: u32) -> Vec<Discrepancy> {
    architecture_cube(cap)
        .filter_map(|x| {
            let literal = literal_levels(&x, inst);
            let placement = placement_levels(&x, inst);
            (literal != placement).then(|| Discrepancy {
                arch: x,
                literal,
                placement,
                literal_optimal: is_optimal(&x, inst, Semantics::Literal),
                placement_optimal: is_optimal(&x, inst, Semantics::Placement),
            })
        })
        .collect()
}

/// Exact law of `n_B + n_C` when both are uniform on `{0, ..., s}`.
pub fn z0_pmf(s: u32, z: u32) -> f64 {
    if z > 2 * s {
        return 0.0;
    }
    let m = z.min(2 * s - z) as f64;
    (m + 1.0) / ((s as f64 + 1.0) * (s as f64 + 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Z0Report {
    pub s: u32,
    pub samples: u64,
    pub mean: f64,
    pub tv_distance: f64,
}

pub fn z0_statistics(s: u32, samples: u64, seed: u64) -> Z0Report {
    let mut rng = seeds::rng_from_seed(seed);
    let mut hist = vec![0u64; 2 * s as usize + 1];
    let mut sum = 0u64;
    for _ in 0..samples {
        let x = init_architecture(s, &mut rng);
        let z = x.n_b + x.n_c;
        hist[z as usize] += 1;
        sum += z as u64;
    }
    let tv = 0.5
        * hist
            .iter()
            .enumerate()
            .map(|(z, &c)| (c as f64 / samples as f64 - z0_pmf(s, z as u32)).abs())
            .sum::<f64>();
    Z0Report {
        s,
        samples,
        mean: sum as f64 / samples as f64,
        tv_distance: tv,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorReport {
    pub samples: u64,
    pub add_b_or_c: f64,
    pub modify_a_to_b_or_c: f64,
    pub modify_b_to_c: f64,
}

pub fn operator_statistics(samples: u64, seed: u64) -> OperatorReport {
    use BlockKind::{A, B, C};
    let mut rng = seeds::rng_from_seed(seed);
    let (mut add_bc, mut mod_a, mut mod_bc) = (0u64, 0u64, 0u64);
    for _ in 0..samples {
        match sample_op(&mut rng) {
            MutationOp::Add(B) | MutationOp::Add(C) => add_bc += 1,
            MutationOp::Modify(A, B) | MutationOp::Modify(A, C) => mod_a += 1,
            MutationOp::Modify(B, C) => mod_bc += 1,
            _ => {}
        }
    }
    let f = |c: u64| c as f64 / samples as f64;
    OperatorReport {
        samples,
        add_b_or_c: f(add_bc),
        modify_a_to_b_or_c: f(mod_a),
        modify_b_to_c: f(mod_bc),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KReport {
    pub samples: u64,
    /// `frequencies[k]` is the empirical P(K = k); index 0 is unused.
    pub frequencies: Vec<f64>,
    pub mean: f64,
}

pub fn k_statistics(samples: u64, seed: u64) -> KReport {
    let mut rng = seeds::rng_from_seed(seed);
    let mut hist: Vec<u64> = vec![0; 2];
    let mut sum = 0u64;
    for _ in 0..samples {
        let k = sample_k(MutationMode::MultiBit, &mut rng) as usize;
        if k >= hist.len() {
            hist.resize(k + 1, 0);
        }
        hist[k] += 1;
        sum += k as u64;
    }
    KReport {
        samples,
        frequencies: hist.iter().map(|&c| c as f64 / samples as f64).collect(),
        mean: sum as f64 / samples as f64,
    }
}

/// `e^{-1} / (k-1)!`, the law of `1 + Poisson(1)`.
pub fn k_pmf(k: u32) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let fact: f64 = (1..k).map(f64::from).product();
    (-1.0f64).exp() / fact
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_instance;

    #[test]
    fn z0_pmf_sums_to_one_and_has_mean_s() {
        for s in [0, 1, 4, 25] {
            let total: f64 = (0..=2 * s).map(|z| z0_pmf(s, z)).sum();
            let mean: f64 = (0..=2 * s).map(|z| z as f64 * z0_pmf(s, z)).sum();
            assert!((total - 1.0).abs() < 1e-12);
            assert!((mean - s as f64).abs() < 1e-9);
        }
        assert_eq!(z0_pmf(1, 1), 0.5);
        assert_eq!(z0_pmf(1, 3), 0.0);
    }

    #[test]
    fn k_pmf_values() {
        assert!((k_pmf(1) - 0.367_879_441_171_442_3).abs() < 1e-15);
        assert!((k_pmf(3) - 0.183_939_720_585_721_2).abs() < 1e-15);
        let total: f64 = (1..30).map(k_pmf).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cube_size() {
        assert_eq!(architecture_cube(10).count(), 1331);
        assert_eq!(architecture_cube(0).collect::<Vec<_>>(), vec![Architecture::default()]);
    }

    #[test]
    fn discrepancy_contains_known_cases() {
        let inst = make_instance(16).unwrap();
        let rows = discrepancy_scan(&inst, 10);
        let find = |x: Architecture| rows.iter().find(|d| d.arch == x).cloned();
        let d = find(Architecture::new(8, 6, 2)).unwrap();
        assert_eq!((d.literal, d.placement), (Levels::new(6, 10), Levels::new(8, 10)));
        let d = find(Architecture::new(10, 2, 6)).unwrap();
        assert!(d.placement_optimal && !d.literal_optimal);
        assert!(find(Architecture::new(8, 4, 4)).is_none());
        assert!(rows.iter().all(|d| d.placement.i >= d.literal.i));
    }
}
