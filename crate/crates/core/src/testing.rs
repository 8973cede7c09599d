use crate::market::Scenario;

pub const EX1: &str = include_str!("../tests/fixtures/ex1.json");

pub fn ex1() -> Scenario {
    Scenario::from_json(EX1).unwrap()
}

/// One task `t`, quality 0, threshold 0; offer `X` belongs to provider `PX`.
pub fn single_task(offers: &[(&str, u64)]) -> Scenario {
    let offers: Vec<String> = offers
        .iter()
        .map(|(id, cost)| {
            format!(
                r#"{{"id":"{id}","provider":"P{id}","task":"t","cost_cents":{cost},"quality":0}}"#
            )
        })
        .collect();
    Scenario::from_json(&format!(
        r#"{{"version":1,"tasks":["t"],"quality_threshold":0,"budget_cents":1000000,"offers":[{}]}}"#,
        offers.join(",")
    ))
    .unwrap()
}
