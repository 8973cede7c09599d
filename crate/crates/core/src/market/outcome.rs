use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Money, Offer, OfferId, ProviderId, Quality, Scenario, ScenarioDigest, TaskId};

/// Largest posted-price markup accepted (+10000%).
pub const MAX_MARKUP_BP: u32 = 1_000_000;

/// One chosen offer per task.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Allocation {
    pub chosen: BTreeMap<TaskId, OfferId>,
    #[serde(rename = "total_reported_cost_cents")]
    pub total_reported_cost: Money,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AllocationError {
    #[error("allocation covers {covered} of {expected} tasks")]
    WrongTaskSet { covered: usize, expected: usize },
    #[error("allocation names unknown offer {0}")]
    UnknownOffer(OfferId),
    #[error("offer {offer} does not belong to task {task}")]
    TaskMismatch { task: TaskId, offer: OfferId },
    #[error("stored total {stored} differs from recomputed {recomputed}")]
    CostMismatch { stored: Money, recomputed: Money },
    #[error("total quality {quality} below threshold {threshold}")]
    BelowThreshold {
        quality: Quality,
        threshold: Quality,
    },
}

impl Allocation {
    /// Builds an allocation from chosen offers, computing the total.
    pub fn from_offers<'a>(offers: impl IntoIterator<Item = &'a Offer>) -> Allocation {
        let mut chosen = BTreeMap::new();
        let mut total = Money::ZERO;
        for o in offers {
            chosen.insert(o.task.clone(), o.id.clone());
            total = total + o.reported_cost;
        }
        Allocation {
            chosen,
            total_reported_cost: total,
        }
    }

    /// Recomputes cost and quality from `scenario` and checks every
    /// allocation invariant.
    pub fn verify(&self, scenario: &Scenario) -> Result<(), AllocationError> {
        let tasks: BTreeSet<&TaskId> = scenario.tasks().iter().collect();
        let covered = self.chosen.keys().filter(|t| tasks.contains(t)).count();
        if covered != tasks.len() || self.chosen.len() != tasks.len() {
            return Err(AllocationError::WrongTaskSet {
                covered,
                expected: tasks.len(),
            });
        }
        let mut cost = Money::ZERO;
        let mut quality = 0u64;
        for (task, id) in &self.chosen {
            let offer = scenario
                .offer(id.as_str())
                .ok_or_else(|| AllocationError::UnknownOffer(id.clone()))?;
            if &offer.task != task {
                return Err(AllocationError::TaskMismatch {
                    task: task.clone(),
                    offer: id.clone(),
                });
            }
            cost = cost + offer.reported_cost;
            quality = quality.saturating_add(offer.quality.0);
        }
        if cost != self.total_reported_cost {
            return Err(AllocationError::CostMismatch {
                stored: self.total_reported_cost,
                recomputed: cost,
            });
        }
        if quality < scenario.quality_threshold().0 {
            return Err(AllocationError::BelowThreshold {
                quality: Quality(quality),
                threshold: scenario.quality_threshold(),
            });
        }
        Ok(())
    }

    pub fn total_quality(&self, scenario: &Scenario) -> Quality {
        Quality(
            self.offers(scenario)
                .fold(0u64, |q, o| q.saturating_add(o.quality.0)),
        )
    }

    /// Chosen offers resolved against `scenario`, in task-id order.
    pub fn offers<'a>(&'a self, scenario: &'a Scenario) -> impl Iterator<Item = &'a Offer> + 'a {
        self.chosen
            .values()
            .filter_map(move |id| scenario.offer(id.as_str()))
    }

    /// Winning offers grouped by provider.
    pub fn winners<'a>(&'a self, scenario: &'a Scenario) -> BTreeMap<ProviderId, Vec<&'a Offer>> {
        let mut out: BTreeMap<ProviderId, Vec<&Offer>> = BTreeMap::new();
        for o in self.offers(scenario) {
            out.entry(o.provider.clone()).or_default().push(o);
        }
        out
    }

    /// Sum of the winners' private costs.
    pub fn true_cost(&self, scenario: &Scenario) -> Money {
        self.offers(scenario).map(Offer::true_cost).sum()
    }
}

/// Payment rule applied to an allocation.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE", deny_unknown_fields)]
pub enum Mechanism {
    Vcg,
    FirstPrice,
    /// Winners are paid their cost plus a fixed markup in basis points.
    PostedPrice {
        markup_bp: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MechanismParseError {
    #[error("unknown mechanism {0:?} (expected vcg, first-price or posted:<markup_bp>)")]
    Unknown(String),
    #[error("invalid posted-price markup {0:?}")]
    BadMarkup(String),
}

impl FromStr for Mechanism {
    type Err = MechanismParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "vcg" => Ok(Mechanism::Vcg),
            "first-price" | "first_price" => Ok(Mechanism::FirstPrice),
            other => {
                let markup = other
                    .strip_prefix("posted:")
                    .or_else(|| other.strip_prefix("posted-price:"))
                    .ok_or_else(|| MechanismParseError::Unknown(s.to_owned()))?;
                let markup_bp: u32 = markup
                    .parse()
                    .map_err(|_| MechanismParseError::BadMarkup(markup.to_owned()))?;
                if markup_bp > MAX_MARKUP_BP {
                    return Err(MechanismParseError::BadMarkup(markup.to_owned()));
                }
                Ok(Mechanism::PostedPrice { markup_bp })
            }
        }
    }
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mechanism::Vcg => f.write_str("vcg"),
            Mechanism::FirstPrice => f.write_str("first-price"),
            Mechanism::PostedPrice { markup_bp } => write!(f, "posted:{markup_bp}"),
        }
    }
}

/// Per-provider payments. Only paid providers appear.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PaymentSchedule {
    pub mechanism: Mechanism,
    pub payments: BTreeMap<ProviderId, Money>,
    #[serde(rename = "consumer_total_cents")]
    pub consumer_total: Money,
}

impl PaymentSchedule {
    pub fn new(mechanism: Mechanism, payments: BTreeMap<ProviderId, Money>) -> PaymentSchedule {
        let consumer_total = payments.values().sum();
        PaymentSchedule {
            mechanism,
            payments,
            consumer_total,
        }
    }

    pub fn empty(mechanism: Mechanism) -> PaymentSchedule {
        PaymentSchedule::new(mechanism, BTreeMap::new())
    }

    pub fn payment(&self, provider: &ProviderId) -> Money {
        self.payments.get(provider).copied().unwrap_or_default()
    }

    pub fn is_consistent(&self) -> bool {
        self.payments.values().sum::<Money>() == self.consumer_total
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum AuctionStatus {
    Success,
    Infeasible,
    MonopolyProvider {
        provider: ProviderId,
    },
    BudgetExceeded {
        #[serde(rename = "required_cents")]
        required: Money,
    },
}

impl AuctionStatus {
    pub fn is_success(&self) -> bool {
        matches!(self, AuctionStatus::Success)
    }

    pub fn label(&self) -> &'static str {
        match self {
            AuctionStatus::Success => "Success",
            AuctionStatus::Infeasible => "Infeasible",
            AuctionStatus::MonopolyProvider { .. } => "MonopolyProvider",
            AuctionStatus::BudgetExceeded { .. } => "BudgetExceeded",
        }
    }
}

impl fmt::Display for AuctionStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AuctionStatus::MonopolyProvider { provider } => {
                write!(f, "MonopolyProvider({provider})")
            }
            AuctionStatus::BudgetExceeded { required } => write!(f, "BudgetExceeded({required})"),
            other => f.write_str(other.label()),
        }
    }
}

/// Result of one auction; the unit persisted in the ledger.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuctionOutcome {
    pub scenario_digest: ScenarioDigest,
    pub mechanism: Mechanism,
    pub status: AuctionStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub allocation: Option<Allocation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payments: Option<PaymentSchedule>,
}

impl AuctionOutcome {
    /// Structural invariants that hold without the originating scenario.
    pub fn check_shape(&self) -> Result<(), String> {
        match (&self.status, &self.allocation, &self.payments) {
            (AuctionStatus::Success, Some(_), Some(p)) => {
                if !p.is_consistent() {
                    return Err("consumer total does not match payments".into());
                }
                if p.mechanism != self.mechanism {
                    return Err("payment schedule mechanism differs from outcome".into());
                }
                Ok(())
            }
            (AuctionStatus::Success, _, _) => Err("success without allocation and payments".into()),
            (AuctionStatus::Infeasible, None, None) => Ok(()),
            (AuctionStatus::Infeasible, _, _) => Err("infeasible outcome carries results".into()),
            (_, Some(_), None) => Ok(()),
            (_, _, _) => Err("failed outcome must carry its allocation and no payments".into()),
        }
    }
}
