use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{run_auction, LabError};
use crate::market::{
    AuctionStatus, Mechanism, Money, Offer, ProviderId, Scenario, ScenarioDigest, MAX_MONEY,
};
use crate::pricing::{apply_bp, utility_of};

/// Multiplier that reports the true cost.
pub const TRUTHFUL_BP: u32 = 10_000;

pub const MAX_MULTIPLIER_BP: u32 = 1_000_000;

/// Undercutting and inflation around the truthful report, in basis points.
pub const DEFAULT_GRID: [u32; 12] = [
    2500, 5000, 7500, 9000, 9900, 10_000, 10_100, 11_000, 12_500, 15_000, 20_000, 40_000,
];

/// Whether the consumer budget gates deviation runs.
///
/// A binding budget makes success depend on other winners' payments, which a
/// winner can shrink by inflating its own bid, so an enforced budget breaks
/// truthfulness at the boundary. Sweeps therefore judge the payment rule with
/// the budget lifted unless asked otherwise.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetPolicy {
    #[default]
    Lift,
    Enforce,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeviationPoint {
    pub multiplier_bp: u32,
    pub status: AuctionStatus,
    pub won: bool,
    #[serde(rename = "utility_cents")]
    pub utility: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepReport {
    pub scenario_digest: ScenarioDigest,
    pub provider: ProviderId,
    pub mechanism: Mechanism,
    pub budget_policy: BudgetPolicy,
    pub points: Vec<DeviationPoint>,
    #[serde(rename = "truthful_utility_cents")]
    pub truthful_utility: i64,
    #[serde(rename = "max_gain_cents")]
    pub max_gain: i64,
}

impl SweepReport {
    /// The first multiplier reaching `max_gain`.
    pub fn best_point(&self) -> &DeviationPoint {
        self.points
            .iter()
            .max_by(|a, b| {
                a.utility
                    .cmp(&b.utility)
                    .then(b.multiplier_bp.cmp(&a.multiplier_bp))
            })
            .expect("sweep has at least the truthful point")
    }
}

/// Reruns the auction with `provider` reporting `true_cost * k / 10000`
/// (rounded half up) on every offer, for each `k` in `multipliers_bp`, while
/// everyone else reports truthfully. Utility is measured against true cost.
///
/// Points come back in ascending multiplier order, duplicates removed. The
/// consumer budget is lifted; see [`BudgetPolicy`].
pub fn deviation_sweep(
    scenario: &Scenario,
    provider: &ProviderId,
    mechanism: Mechanism,
    multipliers_bp: &[u32],
) -> Result<SweepReport, LabError> {
    deviation_sweep_with(
        scenario,
        provider,
        mechanism,
        multipliers_bp,
        BudgetPolicy::Lift,
    )
}

pub fn deviation_sweep_with(
    scenario: &Scenario,
    provider: &ProviderId,
    mechanism: Mechanism,
    multipliers_bp: &[u32],
    budget_policy: BudgetPolicy,
) -> Result<SweepReport, LabError> {
    if !scenario.has_provider(provider) {
        return Err(LabError::UnknownProvider(provider.clone()));
    }
    if let Some(&bad) = multipliers_bp
        .iter()
        .find(|&&k| k == 0 || k > MAX_MULTIPLIER_BP)
    {
        return Err(LabError::InvalidMultiplier(bad));
    }
    let grid: BTreeSet<u32> = multipliers_bp.iter().copied().collect();
    if !grid.contains(&TRUTHFUL_BP) {
        return Err(LabError::MissingTruthfulPoint);
    }

    let points = grid
        .into_iter()
        .map(|k| {
            let mut deviated = deviate(scenario, provider, k)?;
            if budget_policy == BudgetPolicy::Lift {
                deviated = deviated.with_budget(Money(MAX_MONEY))?;
            }
            let outcome = run_auction(&deviated, mechanism);
            let utility = match (&outcome.status, &outcome.allocation, &outcome.payments) {
                (AuctionStatus::Success, Some(a), Some(p)) => utility_of(provider, p, &deviated, a),
                _ => 0,
            };
            let won = outcome
                .payments
                .as_ref()
                .is_some_and(|p| p.payments.contains_key(provider));
            Ok(DeviationPoint {
                multiplier_bp: k,
                status: outcome.status,
                won,
                utility,
            })
        })
        .collect::<Result<Vec<_>, LabError>>()?;

    let truthful_utility = points
        .iter()
        .find(|p| p.multiplier_bp == TRUTHFUL_BP)
        .map(|p| p.utility)
        .expect("grid contains the truthful point");
    let best = points
        .iter()
        .map(|p| p.utility)
        .max()
        .unwrap_or(truthful_utility);
    Ok(SweepReport {
        scenario_digest: scenario.digest(),
        provider: provider.clone(),
        mechanism,
        budget_policy,
        points,
        truthful_utility,
        max_gain: best - truthful_utility,
    })
}

fn deviate(scenario: &Scenario, provider: &ProviderId, k: u32) -> Result<Scenario, LabError> {
    let offers = scenario
        .offers()
        .iter()
        .map(|o| {
            let truth = o.true_cost();
            let reported = if &o.provider == provider {
                apply_bp(truth, k)
            } else {
                truth
            };
            Offer {
                reported_cost: reported,
                true_cost: Some(truth),
                ..o.clone()
            }
        })
        .collect();
    Ok(scenario.with_offers(offers)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testing::ex1;

    fn utilities(r: &SweepReport) -> Vec<(u32, i64)> {
        r.points
            .iter()
            .map(|p| (p.multiplier_bp, p.utility))
            .collect()
    }

    #[test]
    fn vcg_ex1_p2() {
        let r = deviation_sweep(
            &ex1(),
            &"P2".into(),
            Mechanism::Vcg,
            &[5000, 10_000, 10_800, 10_900],
        )
        .unwrap();
        assert_eq!(
            utilities(&r),
            [(5000, 100), (10_000, 100), (10_800, 100), (10_900, 0)]
        );
        assert!(r.points[2].won);
        assert!(!r.points[3].won);
        assert_eq!(r.truthful_utility, 100);
        assert_eq!(r.max_gain, 0);
    }

    #[test]
    fn first_price_ex1_p2_gains_by_inflating() {
        let r = deviation_sweep(
            &ex1(),
            &"P2".into(),
            Mechanism::FirstPrice,
            &[10_000, 10_825],
        )
        .unwrap();
        assert_eq!(utilities(&r), [(10_000, 0), (10_825, 99)]);
        assert_eq!(r.max_gain, 99);
        assert_eq!(r.best_point().multiplier_bp, 10_825);
    }

    #[test]
    fn truthful_only_grid_has_no_gain() {
        for m in [Mechanism::Vcg, Mechanism::FirstPrice] {
            let r = deviation_sweep(&ex1(), &"P3".into(), m, &[10_000]).unwrap();
            assert_eq!(r.points.len(), 1);
            assert_eq!(r.max_gain, 0);
        }
    }

    #[test]
    fn grid_errors() {
        let s = ex1();
        assert_eq!(
            deviation_sweep(&s, &"P2".into(), Mechanism::Vcg, &[5000, 10_900]),
            Err(LabError::MissingTruthfulPoint)
        );
        assert_eq!(
            deviation_sweep(&s, &"P2".into(), Mechanism::Vcg, &[]),
            Err(LabError::MissingTruthfulPoint)
        );
        assert_eq!(
            deviation_sweep(&s, &"P2".into(), Mechanism::Vcg, &[0, 10_000]),
            Err(LabError::InvalidMultiplier(0))
        );
        assert_eq!(
            deviation_sweep(&s, &"P7".into(), Mechanism::Vcg, &[10_000]),
            Err(LabError::UnknownProvider("P7".into()))
        );
    }

    #[test]
    fn enforced_budget_penalizes_undercutting() {
        // at 5000 bp the VCG total is 1300 + 800 = 2100 > 2000
        let r = deviation_sweep_with(
            &ex1(),
            &"P2".into(),
            Mechanism::Vcg,
            &[5000, 10_000],
            BudgetPolicy::Enforce,
        )
        .unwrap();
        assert_eq!(utilities(&r), [(5000, 0), (10_000, 100)]);
        assert_eq!(
            r.points[0].status,
            AuctionStatus::BudgetExceeded {
                required: Money(2100)
            }
        );
    }

    #[test]
    fn duplicate_multipliers_collapse() {
        let r = deviation_sweep(
            &ex1(),
            &"P2".into(),
            Mechanism::Vcg,
            &[10_000, 10_000, 5000],
        )
        .unwrap();
        assert_eq!(
            r.points
                .iter()
                .filter(|p| p.multiplier_bp == TRUTHFUL_BP)
                .count(),
            1
        );
        assert_eq!(r.points[0].multiplier_bp, 5000);
    }

    #[test]
    fn losing_provider_cannot_gain_under_vcg() {
        let r = deviation_sweep(&ex1(), &"P1".into(), Mechanism::Vcg, &DEFAULT_GRID).unwrap();
        assert_eq!(r.truthful_utility, 0);
        assert!(r.points.iter().all(|p| p.utility <= 0));
    }
}
