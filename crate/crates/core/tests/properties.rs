use std::collections::HashSet;

use landlord::advgen;
use landlord::analysis::audit_potential;
use landlord::rational::{int, ratio};
use landlord::{
    belady_opt, opt_cost, parse_trace, run_trace, serialize_trace, simulate_paging,
    EvictionSelector, FileSpec, Greediness, LandlordCache, LandlordPolicy, PagingAlgorithm,
    PagingTrace, Rational, RequestSequence,
};
use num_traits::Zero;
use proptest::prelude::*;

fn cost_strategy() -> impl Strategy<Value = Rational> {
    prop_oneof![
        Just(int(0)),
        Just(int(1)),
        Just(int(2)),
        Just(int(5)),
        (1i64..7, 1i64..5).prop_map(|(p, q)| ratio(p, q)),
    ]
}

/// A weighted instance: per-file (size, cost) plus a request order.
fn instance(max_files: usize, max_len: usize, max_size: u64) -> impl Strategy<Value = RequestSequence> {
    prop::collection::vec((1..=max_size, cost_strategy()), 1..=max_files).prop_flat_map(
        move |files| {
            let n = files.len();
            prop::collection::vec(0..n, 0..=max_len).prop_map(move |order| {
                let reqs = order
                    .iter()
                    .map(|&i| FileSpec::new(format!("f{i}"), files[i].0, files[i].1.clone()).unwrap())
                    .collect();
                RequestSequence::new(reqs).unwrap()
            })
        },
    )
}

fn paging_trace(max_items: usize, max_len: usize) -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(0..max_items, 0..=max_len)
        .prop_map(|v| v.into_iter().map(|i| format!("p{i}")).collect())
}

fn policy() -> impl Strategy<Value = LandlordPolicy> {
    (
        prop_oneof![Just(int(0)), Just(ratio(1, 2)), Just(int(1)), Just(ratio(1, 3))],
        prop::sample::select(EvictionSelector::ALL.to_vec()),
        prop::sample::select(Greediness::ALL.to_vec()),
    )
        .prop_map(|(l, s, g)| LandlordPolicy::new(l, s, g).unwrap())
        .prop_filter("lookahead runs through run_trace only", |p| !p.needs_lookahead())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn cache_invariants_hold_after_every_request(
        seq in instance(6, 30, 3), k in 3u64..8, p in policy()
    ) {
        let mut cache = LandlordCache::new(k).unwrap();
        for g in seq.iter() {
            let before: HashSet<_> = cache.residents().map(|r| r.spec.id.clone()).collect();
            let out = cache.request(g, &p).unwrap();
            prop_assert!(cache.check_invariants().is_ok(), "{:?}", cache.check_invariants());
            prop_assert!(cache.used() <= k);
            if out.was_hit {
                prop_assert!(out.retrieval_cost_paid.is_zero());
                prop_assert!(out.evicted.is_empty());
                prop_assert!(out.rent_rounds.is_empty());
            } else {
                prop_assert_eq!(&out.retrieval_cost_paid, &g.cost);
                prop_assert_eq!(cache.credit(&g.id), g.cost.clone());
            }
            for round in &out.rent_rounds {
                prop_assert!(!round.zeroed.is_empty());
                for e in &round.evicted {
                    prop_assert!(round.zeroed.contains(e));
                    prop_assert!(before.contains(e));
                }
            }
        }
    }

    #[test]
    fn hit_refresh_stays_between_credit_and_cost(
        seq in instance(4, 20, 2), p in policy()
    ) {
        let mut cache = LandlordCache::new(4).unwrap();
        for g in seq.iter() {
            let prior = cache.contains(&g.id).then(|| cache.credit(&g.id));
            let out = cache.request(g, &p).unwrap();
            if let Some(prior) = prior {
                prop_assert!(out.credit_after >= prior);
                prop_assert!(out.credit_after <= g.cost);
            }
        }
    }

    #[test]
    fn runs_are_deterministic(seq in instance(5, 25, 3), k in 3u64..7, p in policy()) {
        prop_assert_eq!(run_trace(&seq, k, &p).unwrap(), run_trace(&seq, k, &p).unwrap());
    }

    #[test]
    fn paging_specializations_match_direct_simulators(
        ids in paging_trace(12, 120), k in 1usize..10
    ) {
        let seq = RequestSequence::paging(ids.iter().map(String::as_str));
        let trace = PagingTrace::from_sequence(&seq);
        let pairs = [
            (LandlordPolicy::lru(), PagingAlgorithm::Lru),
            (LandlordPolicy::fifo(), PagingAlgorithm::Fifo),
            (LandlordPolicy::fwf(), PagingAlgorithm::Fwf),
        ];
        for (policy, alg) in pairs {
            let ll = run_trace(&seq, k as u64, &policy).unwrap().fault_positions();
            let direct = simulate_paging(&trace, k, alg, None).unwrap().fault_positions;
            prop_assert_eq!(ll, direct, "{:?}", alg);
        }
    }

    #[test]
    fn opt_never_exceeds_landlord(seq in instance(5, 10, 3), k in 3u64..6, p in policy()) {
        let opt = opt_cost(&seq, k).unwrap().min_cost;
        prop_assert!(opt <= run_trace(&seq, k, &p).unwrap().total_cost);
        prop_assert!(opt <= run_trace(&seq, k, &LandlordPolicy::pessimal()).unwrap().total_cost);
    }

    #[test]
    fn opt_is_monotone_in_cache_size(seq in instance(5, 10, 3)) {
        let costs: Vec<Rational> = (3..=7).map(|k| opt_cost(&seq, k).unwrap().min_cost).collect();
        for w in costs.windows(2) {
            prop_assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn belady_is_a_lower_bound(ids in paging_trace(10, 80), k in 1usize..8, seed in any::<u64>()) {
        let trace = PagingTrace::new(ids.iter().map(|s| s.as_str().into()).collect());
        let best = belady_opt(&trace, k).unwrap();
        for alg in [PagingAlgorithm::Lru, PagingAlgorithm::Fifo, PagingAlgorithm::Fwf, PagingAlgorithm::Marking] {
            let run = simulate_paging(&trace, k, alg, Some(seed)).unwrap();
            prop_assert!(best <= run.fault_count());
        }
    }

    #[test]
    fn lru_within_resource_augmented_ratio(
        ids in paging_trace(8, 60), h in 1usize..5, extra in 0usize..4
    ) {
        let k = h + extra;
        let trace = PagingTrace::new(ids.iter().map(|s| s.as_str().into()).collect());
        let lru = simulate_paging(&trace, k, PagingAlgorithm::Lru, None).unwrap().fault_count();
        let opt = belady_opt(&trace, h).unwrap();
        // lru * (k - h + 1) <= k * opt
        prop_assert!(lru * (k - h + 1) <= k * opt);
    }

    #[test]
    fn potential_audit_is_clean(seq in instance(4, 7, 2), h in 2u64..4, extra in 0u64..3, p in policy()) {
        let audit = audit_potential(&seq, h, h + extra, &p).unwrap();
        prop_assert!(audit.all_satisfied(), "{:?}", audit.violations().collect::<Vec<_>>());
        prop_assert!(audit.competitive_bound_holds());
    }

    #[test]
    fn trace_text_round_trips(seq in instance(6, 20, 5)) {
        let text = serialize_trace(&seq);
        let back = parse_trace(&text).unwrap();
        prop_assert_eq!(&back, &seq);
        prop_assert_eq!(serialize_trace(&back), text);
    }

    #[test]
    fn explicit_level_sequences_are_well_formed(k0 in 2u64..9, steps in prop::collection::vec(1u64..4, 0..4)) {
        let mut levels = vec![k0];
        let mut available = k0;
        for s in steps {
            let grow = s.min(available);
            levels.push(levels.last().unwrap() + grow);
            available = 2 * grow;
        }
        let s = advgen::build_from_levels(&levels).unwrap();
        let report = advgen::verify_structure(&s);
        prop_assert!(report.is_clean(), "{:?}", report.violations);
        let rates = advgen::measure_fault_rates(&s).unwrap();
        for l in &rates.levels {
            prop_assert_eq!(&l.fwf_rate, &l.fwf_expected);
            prop_assert_eq!(&l.lru_steady_rate, &l.lru_expected);
            prop_assert!(l.lru_faults_match_long_periods);
        }
    }
}

#[test]
fn generated_sequences_verify_across_a_parameter_grid() {
    for (e, d) in [(1, 8), (1, 16), (1, 32), (1, 4), (3, 16)] {
        for delta in [ratio(1, 4), ratio(1, 8), ratio(3, 8), ratio(1, 3)] {
            let epsilon = ratio(e, d);
            let n = advgen::minimal_n(&epsilon, &delta).unwrap();
            let s = advgen::build_sequence(&epsilon, &delta, n).unwrap();
            let report = advgen::verify_structure(&s);
            assert!(report.is_clean(), "eps={epsilon} delta={delta}: {:?}", report.violations);
        }
    }
}
