//! Payment rules for a chosen allocation: VCG with the Clarke pivot,
//! first-price, and posted price. All arithmetic is in integer cents.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::market::{
    Allocation, AllocationError, Mechanism, Money, PaymentSchedule, ProviderId, Scenario,
};
use crate::wdp::{restrict, solve_dp};

const BP: u128 = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PricingError {
    /// Removing this winner leaves no feasible composition, so its
    /// externality is unbounded.
    #[error("provider {0} is indispensable: no feasible composition without it")]
    MonopolyProvider(ProviderId),
    #[error("allocation does not fit the scenario: {0}")]
    InvalidAllocation(#[from] AllocationError),
    #[error("allocation is not cost-minimal; VCG requires the efficient allocation")]
    NotEfficient,
}

/// Clarke pivot payments: each winner `p` receives `C_-p - (C* - S_p)`, where
/// `C*` is the allocation's reported cost, `S_p` the reported cost of `p`'s
/// winning offers and `C_-p` the optimum with `p` removed.
///
/// `allocation` must be the efficient allocation (`solve_dp(scenario)`).
pub fn vcg_payments(
    scenario: &Scenario,
    allocation: &Allocation,
) -> Result<PaymentSchedule, PricingError> {
    allocation.verify(scenario)?;
    let c_star = allocation.total_reported_cost;
    let winners: Vec<(ProviderId, Money)> = allocation
        .winners(scenario)
        .into_iter()
        .map(|(p, offers)| (p, offers.iter().map(|o| o.reported_cost).sum()))
        .collect();

    // restricted re-solves are independent of each other
    let results: Vec<Result<(ProviderId, Money), PricingError>> = winners
        .into_par_iter()
        .map(|(p, supplied)| {
            let restricted = restrict(scenario, &p).expect("winner bids in the scenario");
            let without = solve_dp(&restricted.scenario)
                .ok_or_else(|| PricingError::MonopolyProvider(p.clone()))?
                .total_reported_cost;
            let others = c_star.checked_sub(supplied).expect("S_p <= C*");
            let payment = without
                .checked_sub(others)
                .ok_or(PricingError::NotEfficient)?;
            if payment < supplied {
                return Err(PricingError::NotEfficient);
            }
            Ok((p, payment))
        })
        .collect();

    let payments = results.into_iter().collect::<Result<BTreeMap<_, _>, _>>()?;
    Ok(PaymentSchedule::new(Mechanism::Vcg, payments))
}

/// Every winner is paid its reported cost.
pub fn first_price_payments(scenario: &Scenario, allocation: &Allocation) -> PaymentSchedule {
    PaymentSchedule::new(Mechanism::FirstPrice, supplied_costs(scenario, allocation))
}

/// Every winner is paid `round_half_up(S_p * (10000 + markup_bp) / 10000)`.
pub fn posted_price_payments(
    scenario: &Scenario,
    allocation: &Allocation,
    markup_bp: u32,
) -> PaymentSchedule {
    let payments = supplied_costs(scenario, allocation)
        .into_iter()
        .map(|(p, cost)| (p, apply_bp(cost, BP as u32 + markup_bp)))
        .collect();
    PaymentSchedule::new(Mechanism::PostedPrice { markup_bp }, payments)
}

/// Payments under `mechanism`. Only VCG can fail.
pub fn payments(
    scenario: &Scenario,
    allocation: &Allocation,
    mechanism: Mechanism,
) -> Result<PaymentSchedule, PricingError> {
    match mechanism {
        Mechanism::Vcg => vcg_payments(scenario, allocation),
        Mechanism::FirstPrice => Ok(first_price_payments(scenario, allocation)),
        Mechanism::PostedPrice { markup_bp } => {
            Ok(posted_price_payments(scenario, allocation, markup_bp))
        }
    }
}

/// `round_half_up(amount * factor_bp / 10000)`.
pub fn apply_bp(amount: Money, factor_bp: u32) -> Money {
    let scaled = (amount.0 as u128 * factor_bp as u128 + BP / 2) / BP;
    Money(u64::try_from(scaled).expect("scaled amount fits in u64"))
}

fn supplied_costs(scenario: &Scenario, allocation: &Allocation) -> BTreeMap<ProviderId, Money> {
    allocation
        .winners(scenario)
        .into_iter()
        .map(|(p, offers)| (p, offers.iter().map(|o| o.reported_cost).sum()))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BudgetCheck {
    Within,
    Exceeded { required: Money },
}

pub fn check_budget(payments: &PaymentSchedule, scenario: &Scenario) -> BudgetCheck {
    if payments.consumer_total <= scenario.budget() {
        BudgetCheck::Within
    } else {
        BudgetCheck::Exceeded {
            required: payments.consumer_total,
        }
    }
}

/// A winner's payoff measured against its private cost.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProviderUtility {
    pub provider: ProviderId,
    #[serde(rename = "payment_cents")]
    pub payment: Money,
    #[serde(rename = "true_cost_supplied_cents")]
    pub true_cost_supplied: Money,
    #[serde(rename = "utility_cents")]
    pub utility: i64,
}

/// One entry per paid provider; anyone absent has utility 0.
pub fn provider_utilities(
    payments: &PaymentSchedule,
    scenario: &Scenario,
    allocation: &Allocation,
) -> Vec<ProviderUtility> {
    let winners = allocation.winners(scenario);
    payments
        .payments
        .iter()
        .map(|(p, &payment)| {
            let true_cost_supplied = winners
                .get(p)
                .map(|offers| offers.iter().map(|o| o.true_cost()).sum())
                .unwrap_or_default();
            ProviderUtility {
                provider: p.clone(),
                payment,
                true_cost_supplied,
                utility: payment.signed_diff(true_cost_supplied),
            }
        })
        .collect()
}

/// Utility of a single provider, 0 when it is not paid.
pub fn utility_of(
    provider: &ProviderId,
    payments: &PaymentSchedule,
    scenario: &Scenario,
    allocation: &Allocation,
) -> i64 {
    provider_utilities(payments, scenario, allocation)
        .into_iter()
        .find(|u| &u.provider == provider)
        .map_or(0, |u| u.utility)
}
