mod common;

use proptest::prelude::*;

use auction_core::lab::{deviation_sweep, DEFAULT_GRID};
use auction_core::market::{Money, Offer, Quality};
use auction_core::pricing::{first_price_payments, provider_utilities, vcg_payments, PricingError};
use auction_core::wdp::{restrict, solve_bruteforce, solve_dp, DEFAULT_BRUTEFORCE_CAP};
use auction_core::{run_auction, Mechanism, Scenario};

use common::small_scenario;

fn optimum(s: &Scenario) -> Option<Money> {
    solve_dp(s).map(|a| a.total_reported_cost)
}

fn scaled(s: &Scenario, factor: u64) -> Scenario {
    let offers: Vec<Offer> = s
        .offers()
        .iter()
        .cloned()
        .map(|mut o| {
            o.reported_cost = Money(o.reported_cost.0 * factor);
            o
        })
        .collect();
    s.with_offers(offers).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn dp_matches_bruteforce(s in small_scenario()) {
        let dp = solve_dp(&s);
        let bf = solve_bruteforce(&s, DEFAULT_BRUTEFORCE_CAP).unwrap();
        prop_assert_eq!(
            dp.as_ref().map(|a| a.total_reported_cost),
            bf.as_ref().map(|a| a.total_reported_cost)
        );
        if let Some(a) = dp {
            prop_assert!(a.verify(&s).is_ok());
            prop_assert!(a.total_quality(&s) >= s.quality_threshold());
        }
    }

    #[test]
    fn raising_the_threshold_never_lowers_cost(s in small_scenario()) {
        let g = s.quality_threshold().0;
        let higher = s.with_quality_threshold(Quality(g + 1)).unwrap();
        match (optimum(&s), optimum(&higher)) {
            (Some(lo), Some(hi)) => prop_assert!(hi >= lo),
            (None, Some(_)) => prop_assert!(false, "tighter threshold became feasible"),
            _ => {}
        }
    }

    #[test]
    fn scaling_costs_scales_optimum_and_vcg(s in small_scenario(), factor in 1u64..=7) {
        let big = scaled(&s, factor);
        prop_assert_eq!(optimum(&big), optimum(&s).map(|c| Money(c.0 * factor)));
        let small_outcome = run_auction(&s.with_budget(Money(auction_core::market::MAX_MONEY)).unwrap(), Mechanism::Vcg);
        let big_outcome = run_auction(&big.with_budget(Money(auction_core::market::MAX_MONEY)).unwrap(), Mechanism::Vcg);
        prop_assert_eq!(small_outcome.status.label(), big_outcome.status.label());
        if let (Some(p), Some(q)) = (small_outcome.payments, big_outcome.payments) {
            prop_assert_eq!(q.consumer_total, Money(p.consumer_total.0 * factor));
        }
    }

    #[test]
    fn json_round_trip_preserves_scenario(s in small_scenario()) {
        let back = Scenario::from_json(&s.to_json_pretty()).unwrap();
        prop_assert_eq!(back.digest(), s.digest());
        prop_assert_eq!(back.canonical_bytes(), s.canonical_bytes());
        prop_assert_eq!(back, s);
    }

    #[test]
    fn validation_is_total_on_arbitrary_bytes(bytes in prop::collection::vec(any::<u8>(), 0..256)) {
        let _ = Scenario::from_slice(&bytes);
    }

    #[test]
    fn validation_is_total_on_mutated_documents(
        s in small_scenario(),
        cut in 0usize..400,
        byte in any::<u8>(),
    ) {
        let mut bytes = s.to_json_pretty().into_bytes();
        let at = cut % bytes.len();
        bytes[at] = byte;
        let _ = Scenario::from_slice(&bytes);
        let _ = Scenario::from_slice(&bytes[..at]);
    }

    #[test]
    fn vcg_is_individually_rational(s in small_scenario()) {
        let Some(a) = solve_dp(&s) else { return Ok(()) };
        let schedule = match vcg_payments(&s, &a) {
            Ok(p) => p,
            Err(PricingError::MonopolyProvider(p)) => {
                prop_assert!(optimum(&restrict(&s, &p).unwrap().scenario).is_none());
                return Ok(());
            }
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        prop_assert!(schedule.is_consistent());
        let c_star = a.total_reported_cost;
        for u in provider_utilities(&schedule, &s, &a) {
            let c_minus = optimum(&restrict(&s, &u.provider).unwrap().scenario).unwrap();
            prop_assert!(u.payment >= u.true_cost_supplied);
            prop_assert_eq!(u.utility, c_minus.signed_diff(c_star));
        }
        prop_assert!(schedule.consumer_total >= first_price_payments(&s, &a).consumer_total);
    }

    #[test]
    fn single_task_vcg_is_second_price(
        bids in prop::collection::btree_set(1u64..=10_000, 2..8),
    ) {
        let bids: Vec<u64> = bids.into_iter().collect();
        let offers: Vec<serde_json::Value> = bids
            .iter()
            .rev()
            .enumerate()
            .map(|(i, c)| serde_json::json!({"id": format!("o{i}"), "provider": format!("P{i}"),
                                             "task": "t", "cost_cents": c, "quality": 1}))
            .collect();
        let doc = serde_json::json!({"version": 1, "tasks": ["t"], "quality_threshold": 0,
                                     "budget_cents": 1_000_000, "offers": offers});
        let s = Scenario::from_json(&doc.to_string()).unwrap();
        let outcome = run_auction(&s, Mechanism::Vcg);
        let paid: Vec<Money> = outcome.payments.unwrap().payments.into_values().collect();
        prop_assert_eq!(paid, vec![Money(bids[1])]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn vcg_deviations_never_pay(s in small_scenario(), pick in any::<prop::sample::Index>()) {
        let providers = s.providers();
        let p = pick.get(&providers);
        let report = deviation_sweep(&s, p, Mechanism::Vcg, &DEFAULT_GRID).unwrap();
        prop_assert!(report.max_gain <= 0, "{} gains {} at {:?}", p, report.max_gain, report.best_point());
    }
}
