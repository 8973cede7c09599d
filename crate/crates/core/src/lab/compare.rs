use serde::{Deserialize, Serialize};

use super::run_auction;
use crate::market::{AuctionStatus, Mechanism, Money, Scenario};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub mechanism: Mechanism,
    pub status: AuctionStatus,
    /// What the consumer pays, or would have to pay when the budget is
    /// exceeded; absent when no payment schedule exists.
    #[serde(rename = "consumer_total_cents")]
    pub consumer_total: Option<Money>,
    /// Winners' true cost; present whenever an allocation exists.
    #[serde(rename = "social_cost_true_cents")]
    pub social_cost_true: Option<Money>,
    /// `consumer_total - social_cost_true`.
    #[serde(rename = "provider_surplus_cents")]
    pub provider_surplus: Option<i64>,
}

/// VCG, first-price and posted price on the truthful version of `scenario`.
/// All three share the same efficient allocation.
pub fn compare_mechanisms(scenario: &Scenario, markup_bp: u32) -> Vec<ComparisonRow> {
    let truthful = scenario.truthful();
    [
        Mechanism::Vcg,
        Mechanism::FirstPrice,
        Mechanism::PostedPrice { markup_bp },
    ]
    .into_iter()
    .map(|mechanism| {
        let outcome = run_auction(&truthful, mechanism);
        let social_cost_true = outcome.allocation.as_ref().map(|a| a.true_cost(&truthful));
        let consumer_total = match &outcome.status {
            AuctionStatus::BudgetExceeded { required } => Some(*required),
            _ => outcome.payments.as_ref().map(|p| p.consumer_total),
        };
        let provider_surplus = match (consumer_total, social_cost_true) {
            (Some(total), Some(social)) => Some(total.signed_diff(social)),
            _ => None,
        };
        ComparisonRow {
            mechanism,
            status: outcome.status,
            consumer_total,
            social_cost_true,
            provider_surplus,
        }
    })
    .collect()
}

/// Aligned plain-text rendering of comparison rows.
pub fn render_table(rows: &[ComparisonRow]) -> String {
    let header = [
        "mechanism",
        "status",
        "consumer_total",
        "social_cost",
        "surplus",
    ];
    let opt = |v: Option<String>| v.unwrap_or_else(|| "-".into());
    let body: Vec<[String; 5]> = rows
        .iter()
        .map(|r| {
            [
                r.mechanism.to_string(),
                r.status.to_string(),
                opt(r.consumer_total.map(|m| m.to_string())),
                opt(r.social_cost_true.map(|m| m.to_string())),
                opt(r.provider_surplus.map(|s| s.to_string())),
            ]
        })
        .collect();
    let mut widths = header.map(str::len);
    for row in &body {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let mut line = |cells: &[&str]| {
        let parts: Vec<String> = cells
            .iter()
            .zip(widths)
            .enumerate()
            .map(|(i, (c, w))| {
                if i < 2 {
                    format!("{c:<w$}")
                } else {
                    format!("{c:>w$}")
                }
            })
            .collect();
        out.push_str(parts.join("  ").trim_end());
        out.push('\n');
    };
    line(&header);
    for row in &body {
        let cells: Vec<&str> = row.iter().map(String::as_str).collect();
        line(&cells);
    }
    out
}
