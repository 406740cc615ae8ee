use proptest::prelude::*;

use enas_lab::enas::{apply_op, mutate, run_trial, sample_op, MutationMode, TrialConfig};
use enas_lab::fitness::{
    allocation_levels, best_allocation_bruteforce, best_allocation_greedy, compare, fitness,
    is_optimal, literal_levels, placement_levels, Architecture, Semantics,
};
use enas_lab::geometry::{make_instance, sample_disk_point, UniformInstance};
use enas_lab::harness::RunningStats;
use enas_lab::network::build_network;
use enas_lab::seeds::rng_from_seed;

fn instance() -> impl Strategy<Value = UniformInstance> {
    (2u32..=12).prop_map(|k| make_instance(4 * k).unwrap())
}

fn arch(max: u32) -> impl Strategy<Value = Architecture> {
    (0..=max, 0..=max, 0..=max).prop_map(|(a, b, c)| Architecture::new(a, b, c))
}

fn semantics() -> impl Strategy<Value = Semantics> {
    prop_oneof![Just(Semantics::Literal), Just(Semantics::Placement)]
}

fn mode() -> impl Strategy<Value = MutationMode> {
    prop_oneof![Just(MutationMode::OneBit), Just(MutationMode::MultiBit)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn greedy_matches_bruteforce(inst in instance(), x in arch(20)) {
        let greedy = best_allocation_greedy(&x, &inst);
        greedy.check(&x, &inst).unwrap();
        let brute = best_allocation_bruteforce(&x, &inst, 64).unwrap();
        brute.check(&x, &inst).unwrap();
        prop_assert_eq!(allocation_levels(&greedy, &inst).unwrap(), allocation_levels(&brute, &inst).unwrap());
    }

    #[test]
    fn placement_dominates_literal(inst in instance(), x in arch(30)) {
        let lit = literal_levels(&x, &inst);
        let pl = placement_levels(&x, &inst);
        prop_assert!(pl >= lit);
        prop_assert!(pl.value(&inst) >= lit.value(&inst));
        if is_optimal(&x, &inst, Semantics::Literal) {
            prop_assert!(is_optimal(&x, &inst, Semantics::Placement));
        }
    }

    #[test]
    fn levels_stay_in_range(inst in instance(), x in arch(40), sem in semantics()) {
        let f = fitness(&x, &inst, sem);
        prop_assert!(f.i <= inst.max_i() && f.j <= inst.max_j());
        prop_assert!(f.value > 0.0 && f.value <= 1.0 + 1e-12);
        prop_assert_eq!(f.levels() == enas_lab::Levels::new(inst.max_i(), inst.max_j()), is_optimal(&x, &inst, sem));
    }

    #[test]
    fn lexicographic_order_agrees_with_value(inst in instance(), x in arch(30), y in arch(30), sem in semantics()) {
        let (fx, fy) = (fitness(&x, &inst, sem), fitness(&y, &inst, sem));
        let ord = compare(&fx, &fy).unwrap();
        if (fx.value - fy.value).abs() > 1e-12 {
            prop_assert_eq!(ord, fx.value.partial_cmp(&fy.value).unwrap());
        } else {
            prop_assert!(ord.is_eq());
        }
    }

    #[test]
    fn placement_is_monotone_in_blocks(inst in instance(), x in arch(20), extra in arch(3)) {
        let more = Architecture::new(x.n_a + extra.n_a, x.n_b + extra.n_b, x.n_c + extra.n_c);
        prop_assert!(placement_levels(&more, &inst) >= placement_levels(&x, &inst));
    }

    #[test]
    fn placement_optimum_characterization(inst in instance(), x in arch(30)) {
        let (a, b, c) = (inst.a(), inst.b(), inst.c());
        let expected = x.n_a >= a + b.saturating_sub(x.n_b) && x.n_b + x.n_c >= b + c && x.n_c >= c;
        prop_assert_eq!(is_optimal(&x, &inst, Semantics::Placement), expected);
        let literal = x.n_a >= a && x.n_b >= b && x.n_c >= c;
        prop_assert_eq!(is_optimal(&x, &inst, Semantics::Literal), literal);
    }

    #[test]
    fn operators_change_counts_by_at_most_one(x in arch(5), seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        for _ in 0..20 {
            let op = sample_op(&mut rng);
            let y = apply_op(&x, op);
            let diff = (y.total() as i64 - x.total() as i64).abs();
            prop_assert!(diff <= 1);
        }
    }

    #[test]
    fn mutation_k_is_one_for_onebit(x in arch(5), seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let (_, k) = mutate(&x, MutationMode::OneBit, &mut rng);
        prop_assert_eq!(k, 1);
        let (_, k) = mutate(&x, MutationMode::MultiBit, &mut rng);
        prop_assert!(k >= 1);
    }

    #[test]
    fn optimal_network_matches_labels(inst in instance(), seed in any::<u64>()) {
        let x = Architecture::new(inst.a(), inst.b(), inst.c());
        let cl = build_network(&best_allocation_greedy(&x, &inst), &inst).unwrap();
        let mut rng = rng_from_seed(seed);
        for _ in 0..200 {
            let p = sample_disk_point(&mut rng);
            prop_assert_eq!(cl.classify(&p), inst.label_point(&p));
        }
    }

    #[test]
    fn running_stats_mean_is_exact(xs in prop::collection::vec(0u64..10_000, 1..200)) {
        let mut st = RunningStats::default();
        for &x in &xs {
            st.push(x);
        }
        let exact = xs.iter().sum::<u64>() as f64 / xs.len() as f64;
        prop_assert!((st.mean() - exact).abs() <= 1e-9 * exact.max(1.0));
        prop_assert!(st.std() >= 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn trajectories_are_elitist(k in 2u32..=8, m in mode(), sem in semantics(), seed in any::<u64>(), strict in any::<bool>()) {
        let n = 4 * k;
        let tc = TrialConfig {
            record_trajectory: true,
            strict_selection: strict,
            ..TrialConfig::new(n, n / 4, m, sem, seed)
        };
        let res = run_trial(&tc).unwrap();
        let traj = res.trajectory.as_ref().unwrap();
        prop_assert_eq!(traj.len() as u64, res.generations + 1);
        prop_assert_eq!(traj[0].parent, res.initial);
        prop_assert_eq!(traj.last().unwrap().parent, res.final_arch);
        for w in traj.windows(2) {
            prop_assert!(w[1].levels >= w[0].levels);
            if !w[1].accepted {
                prop_assert_eq!(w[1].parent, w[0].parent);
            }
        }
        let inst = make_instance(n).unwrap();
        prop_assert!(res.hit_cap || is_optimal(&res.final_arch, &inst, sem));
        prop_assert_eq!(run_trial(&tc).unwrap(), res);
    }
}
