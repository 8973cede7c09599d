#![allow(dead_code)]

use proptest::prelude::*;
use serde_json::json;

use auction_core::Scenario;

pub const EX1: &str = include_str!("../fixtures/ex1.json");

pub fn ex1() -> Scenario {
    Scenario::from_json(EX1).unwrap()
}

/// Small valid scenarios. Providers rotate across tasks so some bid on
/// several tasks, and no provider bids twice on one task.
pub fn small_scenario() -> impl Strategy<Value = Scenario> {
    (1usize..=4, 1usize..=4, 2usize..=6)
        .prop_flat_map(|(tasks, max_offers, pool)| {
            let per_task = max_offers.min(pool);
            let task = (
                1..=per_task,
                0..pool,
                prop::collection::vec((0u64..=5000, 0u64..=5), per_task),
            );
            (
                prop::collection::vec(task, tasks),
                Just(pool),
                0u64..=24,
                0u64..=20_000,
            )
        })
        .prop_map(|(tasks, pool, threshold, budget)| {
            let mut offers = Vec::new();
            for (t, (count, shift, bids)) in tasks.iter().enumerate() {
                for (j, (cost, quality)) in bids.iter().take(*count).enumerate() {
                    offers.push(json!({
                        "id": format!("o{t}-{j}"),
                        "provider": format!("P{}", (j + shift) % pool),
                        "task": format!("t{t}"),
                        "cost_cents": cost,
                        "quality": quality,
                    }));
                }
            }
            let ids: Vec<String> = (0..tasks.len()).map(|t| format!("t{t}")).collect();
            let doc = json!({"version": 1, "tasks": ids, "quality_threshold": threshold,
                             "budget_cents": budget, "offers": offers});
            Scenario::from_json(&doc.to_string()).expect("strategy yields valid scenarios")
        })
}
