use budgetext::mechanism::{division_point, uniform_price, Mechanism};
use budgetext::model::{budget, liquid_welfare, Allocation, AuctionInstance};
use budgetext::optimal::{check_opt_properties, optimal_allocation, OptBranch};
use budgetext::oracle::{best_deviation, grid_search_lw};
use budgetext::verify::{deviation_grid, dummy_alpha_spread};
use proptest::prelude::*;

fn instance(max_n: usize) -> impl Strategy<Value = AuctionInstance> {
    (2..=max_n).prop_flat_map(|n| {
        (
            prop::collection::vec(0.0f64..10.0, n),
            prop::collection::vec(0.1f64..10.0, n),
        )
            .prop_map(|(v, a)| AuctionInstance::new(v, a).unwrap())
    })
}

fn simplex_point(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, n + 1).prop_map(|w| {
        let total: f64 = w.iter().sum::<f64>().max(1e-12);
        // last weight is the unallocated remainder
        w[..w.len() - 1].iter().map(|x| x / total).collect()
    })
}

fn instance_and_allocation() -> impl Strategy<Value = (AuctionInstance, Allocation)> {
    instance(5).prop_flat_map(|inst| {
        let n = inst.n();
        (
            Just(inst),
            simplex_point(n).prop_map(|x| Allocation::new(x).unwrap()),
        )
    })
}

/// Midpoint rule on a fine uniform mesh; shares no code with the Simpson path.
fn midpoint_area(m: &Mechanism, inst: &AuctionInstance, j: usize, upper: f64, cells: usize) -> f64 {
    let h = upper / cells as f64;
    (0..cells)
        .map(|c| m.allocation_curve(inst, j, (c as f64 + 0.5) * h).unwrap() * h)
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn budget_ignores_own_share((inst, x) in instance_and_allocation(), i in 0usize..5, own in 0.0f64..1.0) {
        let i = i % inst.n();
        let mut moved = x.as_slice().to_vec();
        let others: f64 = moved.iter().enumerate().filter(|&(k, _)| k != i).map(|(_, v)| v).sum();
        moved[i] = own.min(1.0 - others).max(0.0);
        let moved = Allocation::new(moved).unwrap();
        prop_assert_eq!(budget(&inst, &x, i).unwrap(), budget(&inst, &moved, i).unwrap());
    }

    #[test]
    fn welfare_is_permutation_invariant((inst, x) in instance_and_allocation(), rot in 0usize..5) {
        let n = inst.n();
        let perm = |s: &[f64]| -> Vec<f64> { (0..n).map(|k| s[(k + rot) % n]).collect() };
        let permuted = AuctionInstance::new(perm(inst.valuations()), perm(inst.alphas())).unwrap();
        let px = Allocation::new(perm(x.as_slice())).unwrap();
        let a = liquid_welfare(&inst, &x).unwrap();
        let b = liquid_welfare(&permuted, &px).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn welfare_never_exceeds_cap((inst, x) in instance_and_allocation()) {
        prop_assert!(liquid_welfare(&inst, &x).unwrap() <= inst.welfare_cap() + 1e-12);
    }

    #[test]
    fn greedy_dominates_random_allocations((inst, x) in instance_and_allocation()) {
        let (opt, _) = optimal_allocation(&inst);
        prop_assert!(
            liquid_welfare(&inst, &opt).unwrap() >= liquid_welfare(&inst, &x).unwrap() - 1e-12
        );
    }

    #[test]
    fn greedy_satisfies_p1_to_p4(inst in instance(6)) {
        let (x, trace) = optimal_allocation(&inst);
        let props = check_opt_properties(&inst, &x).unwrap();
        prop_assert!(props.all(), "{:?}", props.first_violation);
        prop_assert!((x.total() - 1.0).abs() <= 1e-12);

        let shares: Vec<f64> = (0..inst.n()).map(|i| inst.saturation_share(i)).collect();
        match trace.branch {
            OptBranch::Case1 { r } => {
                prop_assert!(shares.iter().sum::<f64>() >= 1.0 - 1e-12);
                for &i in trace.sorted_order.iter().skip(r + 1) {
                    prop_assert_eq!(x[i], 0.0);
                }
            }
            OptBranch::Case2 { least_alpha } => {
                for i in (0..inst.n()).filter(|&i| i != least_alpha) {
                    prop_assert!((x[i] - shares[i]).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn greedy_is_scale_covariant(inst in instance(5), c in 0.01f64..100.0) {
        let scaled = inst.scaled(c).unwrap();
        let (x, _) = optimal_allocation(&inst);
        let (y, _) = optimal_allocation(&scaled);
        for (a, b) in x.as_slice().iter().zip(y.as_slice()) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
        let lw = liquid_welfare(&inst, &x).unwrap();
        let lw_scaled = liquid_welfare(&scaled, &y).unwrap();
        prop_assert!((lw_scaled - c * lw).abs() <= 1e-9 * (1.0 + c * lw));
    }

    #[test]
    fn uniform_price_is_smallest_root(alphas in prop::collection::vec(0.1f64..10.0, 2..6)) {
        let q = uniform_price(&alphas).unwrap();
        let f = |q: f64| alphas.iter().map(|&a| (a / (q + a)).min(0.5)).sum::<f64>();
        prop_assert!((f(q) - 1.0).abs() <= 1e-10);
        if q > 0.0 {
            prop_assert!(f(q * (1.0 - 1e-9)) > 1.0);
        }
    }

    #[test]
    fn division_point_is_a_qualifying_prefix(inst in instance(6), dummy in 0.1f64..10.0) {
        let mut order: Vec<usize> = (0..inst.n()).collect();
        order.sort_by(|&a, &b| inst.valuation(b).total_cmp(&inst.valuation(a)));
        let mut v: Vec<f64> = order.iter().map(|&i| inst.valuation(i)).collect();
        let mut a: Vec<f64> = order.iter().map(|&i| inst.alpha(i)).collect();
        v.push(0.0);
        a.push(dummy);
        let k = division_point(&v, &a).unwrap();
        prop_assert!(k >= 2 && k <= inst.n());
        let demand = |len: usize| (0..len).map(|i| (a[i] / (v[len - 1] + a[i])).min(0.5)).sum::<f64>();
        for len in 1..=k {
            prop_assert!(demand(len) <= 1.0 + 1e-12);
        }
        for len in k + 1..=inst.n() {
            prop_assert!(demand(len) > 1.0 + 1e-12);
        }
    }

    #[test]
    fn mechanism_structure(inst in instance(6)) {
        let (x, trace) = Mechanism::default().allocate(&inst).unwrap();
        prop_assert!((x.total() - 1.0).abs() <= 1e-9);
        prop_assert!(x.as_slice().iter().all(|&s| s <= 0.5 + 1e-12));
        prop_assert_eq!(trace.dummy_share, 0.0);
        prop_assert!(trace.q >= 0.0);
        prop_assert_eq!(dummy_alpha_spread(&inst, &[0.5, 1.0, 7.0]).unwrap(), 0.0);
    }

    #[test]
    fn curve_is_monotone(inst in instance(5), j in 0usize..5) {
        let j = j % inst.n();
        let m = Mechanism::default();
        let mut grid = deviation_grid(&inst, j, 100);
        grid.sort_by(f64::total_cmp);
        let shares: Vec<f64> = grid.iter().map(|&z| m.allocation_curve(&inst, j, z).unwrap()).collect();
        for w in shares.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-9);
        }
    }

    #[test]
    fn payments_are_budget_feasible_and_ir(inst in instance(5)) {
        let out = Mechanism::default().run(&inst).unwrap();
        for j in 0..inst.n() {
            let x = out.outcome.allocation[j];
            let p = out.outcome.payments[j];
            prop_assert!(p >= 0.0);
            prop_assert!(p <= inst.alpha(j) * (1.0 - x) + 1e-6);
            prop_assert!(inst.valuation(j) * x - p >= -1e-6);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn payment_matches_midpoint_oracle(inst in instance(4), j in 0usize..4) {
        let j = j % inst.n();
        let m = Mechanism::default();
        let v = inst.valuation(j);
        let share = m.allocation_curve(&inst, j, v).unwrap();
        let oracle = v * share - midpoint_area(&m, &inst, j, v, 20_000);
        let p = m.myerson_payment(&inst, j).unwrap();
        // midpoint error is O(h) at the curve's jumps and kinks
        prop_assert!((p - oracle).abs() <= 1e-5 * (1.0 + v), "{} vs {}", p, oracle);
    }

    #[test]
    fn no_profitable_misreport(inst in instance(4), j in 0usize..4) {
        let j = j % inst.n();
        let m = Mechanism::default();
        let grid = deviation_grid(&inst, j, 40);
        let d = best_deviation(&m, &inst, j, inst.valuation(j), &grid).unwrap();
        prop_assert!(d.gain <= 1e-6, "gain {} at {}", d.gain, d.best_misreport);
    }

    #[test]
    fn oracle_is_bounded_and_refines(inst in instance(3)) {
        let coarse = grid_search_lw(&inst, 20).unwrap();
        let fine = grid_search_lw(&inst, 40).unwrap();
        prop_assert!(coarse.best_lw <= inst.welfare_cap() + 1e-12);
        prop_assert!((coarse.best_allocation.total() - 1.0).abs() <= 1e-9);
        let lw = liquid_welfare(&inst, &coarse.best_allocation).unwrap();
        prop_assert!((lw - coarse.best_lw).abs() <= 1e-12);
        prop_assert!(fine.best_lw >= coarse.best_lw - 1e-12, "{} < {}", fine.best_lw, coarse.best_lw);
        let (x, _) = optimal_allocation(&inst);
        prop_assert!(liquid_welfare(&inst, &x).unwrap() >= fine.best_lw - 1e-9);
    }
}

#[test]
fn oracle_is_deterministic() {
    let inst = AuctionInstance::new(vec![3.0, 2.5, 1.0, 0.2], vec![0.5, 2.0, 1.0, 4.0]).unwrap();
    assert_eq!(
        grid_search_lw(&inst, 60).unwrap(),
        grid_search_lw(&inst, 60).unwrap()
    );
}
