use crate::market::{AuctionOutcome, AuctionStatus, Mechanism, Scenario};
use crate::pricing::{check_budget, payments, BudgetCheck, PricingError};
use crate::wdp::solve_dp;

/// Selection, payment, budget check. Total on validated scenarios; every
/// failure is reported through the outcome status.
pub fn run_auction(scenario: &Scenario, mechanism: Mechanism) -> AuctionOutcome {
    let mut outcome = AuctionOutcome {
        scenario_digest: scenario.digest(),
        mechanism,
        status: AuctionStatus::Infeasible,
        allocation: None,
        payments: None,
    };
    let Some(allocation) = solve_dp(scenario) else {
        return outcome;
    };
    match payments(scenario, &allocation, mechanism) {
        Ok(schedule) => match check_budget(&schedule, scenario) {
            BudgetCheck::Within => {
                outcome.status = AuctionStatus::Success;
                outcome.payments = Some(schedule);
            }
            BudgetCheck::Exceeded { required } => {
                outcome.status = AuctionStatus::BudgetExceeded { required };
            }
        },
        Err(PricingError::MonopolyProvider(provider)) => {
            outcome.status = AuctionStatus::MonopolyProvider { provider };
        }
        Err(e) => unreachable!("efficient allocation rejected by pricing: {e}"),
    }
    outcome.allocation = Some(allocation);
    outcome
}
