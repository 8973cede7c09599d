use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::market::{
    Money, OfferDoc, Scenario, ScenarioDoc, ScenarioError, MAX_MONEY, SCHEMA_VERSION,
};
use crate::wdp::solve_dp;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("invalid generator parameter: {0}")]
    InvalidRange(String),
    #[error("generated scenario is invalid: {0}")]
    Scenario(#[from] ScenarioError),
}

/// Shape of randomly generated scenarios. Ranges are inclusive `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenParams {
    pub tasks: usize,
    pub offers_per_task: usize,
    pub cost_range_cents: (u64, u64),
    pub quality_range: (u64, u64),
    /// Threshold as a fraction of the best attainable quality.
    pub threshold_fraction_bp: u32,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            tasks: 3,
            offers_per_task: 3,
            cost_range_cents: (1, 10_000),
            quality_range: (0, 5),
            threshold_fraction_bp: 6000,
        }
    }
}

/// Upper bound on `tasks * offers_per_task`.
pub const MAX_GENERATED_OFFERS: usize = 1 << 20;

impl GenParams {
    /// Number of one-offer-per-task compositions, saturating.
    pub fn compositions(&self) -> u128 {
        (0..self.tasks)
            .try_fold(1u128, |acc, _| {
                acc.checked_mul(self.offers_per_task as u128)
            })
            .unwrap_or(u128::MAX)
    }

    pub fn check(&self) -> Result<(), GenError> {
        if self.tasks == 0 {
            return Err(GenError::InvalidRange("tasks must be at least 1".into()));
        }
        if self.offers_per_task == 0 {
            return Err(GenError::InvalidRange(
                "offers per task must be at least 1".into(),
            ));
        }
        if self.tasks.saturating_mul(self.offers_per_task) > MAX_GENERATED_OFFERS {
            return Err(GenError::InvalidRange(format!(
                "{} tasks x {} offers exceeds {MAX_GENERATED_OFFERS} offers",
                self.tasks, self.offers_per_task
            )));
        }
        let (lo, hi) = self.cost_range_cents;
        if lo > hi {
            return Err(GenError::InvalidRange(format!("cost range [{lo}, {hi}]")));
        }
        if hi > MAX_MONEY {
            return Err(GenError::InvalidRange(format!(
                "cost upper bound {hi} exceeds {MAX_MONEY}"
            )));
        }
        let (lo, hi) = self.quality_range;
        if lo > hi {
            return Err(GenError::InvalidRange(format!(
                "quality range [{lo}, {hi}]"
            )));
        }
        if hi > i64::MAX as u64 {
            return Err(GenError::InvalidRange(format!("quality upper bound {hi}")));
        }
        Ok(())
    }
}

/// Deterministic in `(params, seed)`. Each task gets its own pool of
/// providers; costs and qualities are uniform over their ranges; the
/// threshold is `round(fraction * sum of per-task max quality)`, so any
/// fraction up to 10000 bp is feasible; the budget is three times the
/// truthful first-price cost (three times the sum of per-task maximum costs
/// when infeasible).
pub fn generate_scenario(params: &GenParams, seed: u64) -> Result<Scenario, GenError> {
    params.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (cost_lo, cost_hi) = params.cost_range_cents;
    let (q_lo, q_hi) = params.quality_range;

    let mut tasks = Vec::with_capacity(params.tasks);
    let mut offers = Vec::with_capacity(params.tasks * params.offers_per_task);
    let mut best_quality: u128 = 0;
    let mut worst_cost: u128 = 0;
    for t in 0..params.tasks {
        let task = format!("t{}", t + 1);
        let mut task_q = 0;
        let mut task_c = 0;
        for j in 0..params.offers_per_task {
            let cost = rng.random_range(cost_lo..=cost_hi);
            let quality = rng.random_range(q_lo..=q_hi);
            task_q = task_q.max(quality);
            task_c = task_c.max(cost);
            offers.push(OfferDoc {
                id: format!("o{}-{}", t + 1, j + 1),
                provider: format!("P{}", t * params.offers_per_task + j + 1),
                task: task.clone(),
                cost_cents: cost as i64,
                quality: quality as i64,
                true_cost_cents: None,
            });
        }
        best_quality += task_q as u128;
        worst_cost += task_c as u128;
        tasks.push(task);
    }

    let threshold = (params.threshold_fraction_bp as u128 * best_quality + 5000) / 10_000;
    let threshold = i64::try_from(threshold)
        .map_err(|_| GenError::InvalidRange(format!("quality threshold {threshold}")))?;
    let scenario = Scenario::validate(ScenarioDoc {
        version: SCHEMA_VERSION,
        tasks,
        quality_threshold: threshold,
        budget_cents: 0,
        offers,
    })?;

    let base = solve_dp(&scenario).map_or(worst_cost, |a| a.total_reported_cost.0 as u128);
    let budget = u64::try_from(3 * base)
        .ok()
        .filter(|&b| b <= MAX_MONEY)
        .ok_or(ScenarioError::ValueOutOfRange {
            field: "generated budget".into(),
            limit: MAX_MONEY,
        })?;
    Ok(scenario.with_budget(Money(budget))?)
}
