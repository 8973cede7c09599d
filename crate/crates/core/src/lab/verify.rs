use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    deviation_sweep_with, generate_scenario, run_auction, BudgetPolicy, GenError, GenParams,
    LabError,
};
use crate::market::{AuctionStatus, Mechanism, Money, ProviderId, ScenarioDigest, MAX_MONEY};
use crate::pricing::provider_utilities;
use crate::wdp::DEFAULT_BRUTEFORCE_CAP;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
}

/// A profitable misreport.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Offense {
    pub seed: u64,
    pub provider: ProviderId,
    pub multiplier_bp: u32,
    #[serde(rename = "gain_cents")]
    pub gain: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub seed: u64,
    pub scenario_digest: ScenarioDigest,
    pub truthful_status: AuctionStatus,
    pub providers: usize,
    #[serde(rename = "max_gain_cents")]
    pub max_gain: i64,
    /// Truthful winners paid below their reported cost or left with
    /// negative utility.
    pub ir_violations: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub verdict: Verdict,
    pub mechanism: Mechanism,
    pub budget_policy: BudgetPolicy,
    pub params: GenParams,
    pub grid_bp: Vec<u32>,
    pub scenarios_examined: usize,
    /// Set when no scenario was examined, so a PASS proves nothing.
    pub vacuous: bool,
    #[serde(rename = "global_max_gain_cents")]
    pub global_max_gain: i64,
    pub ir_violations: usize,
    pub offending: Vec<Offense>,
    pub scenarios: Vec<ScenarioSummary>,
}

/// Generates one scenario per seed and sweeps every provider over the grid.
/// PASS iff no deviation anywhere beats truthful reporting. The consumer
/// budget is lifted during sweeps; see [`BudgetPolicy`].
pub fn verify_strategyproof(
    seeds: &[u64],
    params: &GenParams,
    multipliers_bp: &[u32],
    mechanism: Mechanism,
) -> Result<VerifyReport, LabError> {
    verify_strategyproof_with(seeds, params, multipliers_bp, mechanism, BudgetPolicy::Lift)
}

pub fn verify_strategyproof_with(
    seeds: &[u64],
    params: &GenParams,
    multipliers_bp: &[u32],
    mechanism: Mechanism,
    budget_policy: BudgetPolicy,
) -> Result<VerifyReport, LabError> {
    params.check()?;
    if params.compositions() > DEFAULT_BRUTEFORCE_CAP as u128 {
        return Err(GenError::InvalidRange(format!(
            "{} offers over {} tasks is beyond the brute-force oracle cap of {DEFAULT_BRUTEFORCE_CAP}",
            params.offers_per_task, params.tasks
        ))
        .into());
    }
    let per_seed: Vec<(ScenarioSummary, Vec<Offense>)> = seeds
        .par_iter()
        .map(|&seed| examine(seed, params, multipliers_bp, mechanism, budget_policy))
        .collect::<Result<_, _>>()?;

    let mut scenarios = Vec::with_capacity(per_seed.len());
    let mut offending = Vec::new();
    for (summary, offenses) in per_seed {
        scenarios.push(summary);
        offending.extend(offenses);
    }
    let global_max_gain = scenarios.iter().map(|s| s.max_gain).max().unwrap_or(0);
    let ir_violations = scenarios.iter().map(|s| s.ir_violations).sum();
    Ok(VerifyReport {
        verdict: if global_max_gain <= 0 {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        mechanism,
        budget_policy,
        params: params.clone(),
        grid_bp: multipliers_bp.to_vec(),
        scenarios_examined: scenarios.len(),
        vacuous: scenarios.is_empty(),
        global_max_gain,
        ir_violations,
        offending,
        scenarios,
    })
}

fn examine(
    seed: u64,
    params: &GenParams,
    multipliers_bp: &[u32],
    mechanism: Mechanism,
    budget_policy: BudgetPolicy,
) -> Result<(ScenarioSummary, Vec<Offense>), LabError> {
    let scenario = generate_scenario(params, seed)?;
    let truthful = run_auction(&scenario, mechanism);

    // individual rationality is judged under the same budget rule as the sweep
    let judged = match budget_policy {
        BudgetPolicy::Lift => run_auction(&scenario.with_budget(Money(MAX_MONEY))?, mechanism),
        BudgetPolicy::Enforce => truthful.clone(),
    };
    let mut ir_violations = 0;
    if let (AuctionStatus::Success, Some(a), Some(p)) =
        (&judged.status, &judged.allocation, &judged.payments)
    {
        ir_violations = provider_utilities(p, &scenario, a)
            .iter()
            .filter(|u| u.utility < 0 || u.payment < u.true_cost_supplied)
            .count();
    }

    let providers = scenario.providers();
    let mut offenses = Vec::new();
    let mut max_gain = 0;
    for provider in &providers {
        let report = deviation_sweep_with(
            &scenario,
            provider,
            mechanism,
            multipliers_bp,
            budget_policy,
        )?;
        max_gain = max_gain.max(report.max_gain);
        if report.max_gain > 0 {
            offenses.push(Offense {
                seed,
                provider: provider.clone(),
                multiplier_bp: report.best_point().multiplier_bp,
                gain: report.max_gain,
            });
        }
    }
    Ok((
        ScenarioSummary {
            seed,
            scenario_digest: scenario.digest(),
            truthful_status: truthful.status,
            providers: providers.len(),
            max_gain,
            ir_violations,
        },
        offenses,
    ))
}
