use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{Money, OfferId, ProviderId, Quality, TaskId};

pub const SCHEMA_VERSION: i64 = 1;

/// Largest amount accepted anywhere in a scenario (2^53 - 1, exact in every
/// JSON implementation). Applies to each value and to the sum of all offers'
/// reported costs, so every composition total fits with room for markups.
pub const MAX_MONEY: u64 = (1 << 53) - 1;

/// Upper bound on `(tasks + 1) * (quality_threshold + 1)`, the size of the
/// winner-determination table.
pub const MAX_DP_CELLS: u64 = 1 << 22;

/// Scenario file, version 1. Field order here is the serialized order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    pub version: i64,
    pub tasks: Vec<String>,
    pub quality_threshold: i64,
    pub budget_cents: i64,
    pub offers: Vec<OfferDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OfferDoc {
    pub id: String,
    pub provider: String,
    pub task: String,
    pub cost_cents: i64,
    pub quality: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub true_cost_cents: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("malformed scenario document: {0}")]
    Malformed(String),
    #[error("unsupported schema version {0} (expected {SCHEMA_VERSION})")]
    UnsupportedVersion(i64),
    #[error("scenario has no tasks")]
    NoTasks,
    #[error("task {0} listed more than once")]
    DuplicateTask(TaskId),
    #[error("offer id {0} used more than once")]
    DuplicateOfferId(OfferId),
    #[error("provider {provider} bids more than once on task {task}")]
    DuplicateBid { provider: ProviderId, task: TaskId },
    #[error("offer {offer} references unknown task {task}")]
    UnknownTask { offer: OfferId, task: TaskId },
    #[error("task {0} has no offers")]
    MissingOffers(TaskId),
    #[error("{field} is negative")]
    NegativeValue { field: String },
    #[error("{field} exceeds the supported limit of {limit}")]
    ValueOutOfRange { field: String, limit: u64 },
}

impl ScenarioError {
    /// Stable error code, used in CLI messages and FFI error strings.
    pub fn code(&self) -> &'static str {
        match self {
            ScenarioError::Malformed(_) => "Malformed",
            ScenarioError::UnsupportedVersion(_) => "UnsupportedVersion",
            ScenarioError::NoTasks => "NoTasks",
            ScenarioError::DuplicateTask(_) => "DuplicateTask",
            ScenarioError::DuplicateOfferId(_) => "DuplicateOfferId",
            ScenarioError::DuplicateBid { .. } => "DuplicateBid",
            ScenarioError::UnknownTask { .. } => "UnknownTask",
            ScenarioError::MissingOffers(_) => "MissingOffers",
            ScenarioError::NegativeValue { .. } => "NegativeValue",
            ScenarioError::ValueOutOfRange { .. } => "ValueOutOfRange",
        }
    }
}

/// One provider's bid for one task.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Offer {
    pub id: OfferId,
    pub provider: ProviderId,
    pub task: TaskId,
    pub reported_cost: Money,
    pub quality: Quality,
    /// Private cost; `None` means the provider reports truthfully.
    pub true_cost: Option<Money>,
}

impl Offer {
    pub fn true_cost(&self) -> Money {
        self.true_cost.unwrap_or(self.reported_cost)
    }
}

/// A validated composition request. Only obtainable through validation, so
/// every consumer may rely on the scenario invariants.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(into = "ScenarioDoc")]
pub struct Scenario {
    version: i64,
    tasks: Vec<TaskId>,
    quality_threshold: Quality,
    budget: Money,
    offers: Vec<Offer>,
    // offer indices per task, in task order
    by_task: Vec<Vec<usize>>,
}

/// Hex-encoded SHA-256 over the canonical serialization of a scenario.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScenarioDigest(pub String);

impl ScenarioDigest {
    /// Length in hex characters.
    pub const LEN: usize = 64;
}

impl std::fmt::Display for ScenarioDigest {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn non_negative(value: i64, field: impl FnOnce() -> String) -> Result<u64, ScenarioError> {
    u64::try_from(value).map_err(|_| ScenarioError::NegativeValue { field: field() })
}

fn money_in_range(value: u64, field: impl FnOnce() -> String) -> Result<Money, ScenarioError> {
    if value > MAX_MONEY {
        return Err(ScenarioError::ValueOutOfRange {
            field: field(),
            limit: MAX_MONEY,
        });
    }
    Ok(Money(value))
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Scenario, ScenarioError> {
        let doc: ScenarioDoc =
            serde_json::from_str(text).map_err(|e| ScenarioError::Malformed(e.to_string()))?;
        Scenario::validate(doc)
    }

    /// Total over arbitrary bytes: anything that is not UTF-8 JSON matching
    /// the schema is `Malformed`.
    pub fn from_slice(bytes: &[u8]) -> Result<Scenario, ScenarioError> {
        let doc: ScenarioDoc =
            serde_json::from_slice(bytes).map_err(|e| ScenarioError::Malformed(e.to_string()))?;
        Scenario::validate(doc)
    }

    pub fn validate(doc: ScenarioDoc) -> Result<Scenario, ScenarioError> {
        if doc.version != SCHEMA_VERSION {
            return Err(ScenarioError::UnsupportedVersion(doc.version));
        }
        let budget = non_negative(doc.budget_cents, || "budget_cents".into())?;
        let threshold = non_negative(doc.quality_threshold, || "quality_threshold".into())?;
        let mut offers = Vec::with_capacity(doc.offers.len());
        for o in doc.offers {
            let cost = non_negative(o.cost_cents, || format!("offer {} cost_cents", o.id))?;
            let quality = non_negative(o.quality, || format!("offer {} quality", o.id))?;
            let true_cost = match o.true_cost_cents {
                Some(c) => Some(non_negative(c, || {
                    format!("offer {} true_cost_cents", o.id)
                })?),
                None => None,
            };
            let true_cost = match true_cost {
                Some(c) => Some(money_in_range(c, || {
                    format!("offer {} true_cost_cents", o.id)
                })?),
                None => None,
            };
            offers.push(Offer {
                reported_cost: money_in_range(cost, || format!("offer {} cost_cents", o.id))?,
                quality: Quality(quality),
                true_cost,
                id: OfferId(o.id),
                provider: ProviderId(o.provider),
                task: TaskId(o.task),
            });
        }
        let budget = money_in_range(budget, || "budget_cents".into())?;
        let tasks = doc.tasks.into_iter().map(TaskId).collect();
        Scenario::assemble(doc.version, tasks, Quality(threshold), budget, offers, true)
    }

    fn assemble(
        version: i64,
        tasks: Vec<TaskId>,
        quality_threshold: Quality,
        budget: Money,
        offers: Vec<Offer>,
        require_coverage: bool,
    ) -> Result<Scenario, ScenarioError> {
        if tasks.is_empty() {
            return Err(ScenarioError::NoTasks);
        }
        let mut task_index = HashMap::with_capacity(tasks.len());
        for (i, t) in tasks.iter().enumerate() {
            if task_index.insert(t.as_str(), i).is_some() {
                return Err(ScenarioError::DuplicateTask(t.clone()));
            }
        }

        let mut seen_ids = BTreeSet::new();
        let mut seen_bids = BTreeSet::new();
        let mut by_task = vec![Vec::new(); tasks.len()];
        for (i, o) in offers.iter().enumerate() {
            if !seen_ids.insert(o.id.as_str()) {
                return Err(ScenarioError::DuplicateOfferId(o.id.clone()));
            }
            let Some(&t) = task_index.get(o.task.as_str()) else {
                return Err(ScenarioError::UnknownTask {
                    offer: o.id.clone(),
                    task: o.task.clone(),
                });
            };
            if !seen_bids.insert((o.provider.as_str(), o.task.as_str())) {
                return Err(ScenarioError::DuplicateBid {
                    provider: o.provider.clone(),
                    task: o.task.clone(),
                });
            }
            by_task[t].push(i);
        }
        if require_coverage {
            if let Some(t) = by_task.iter().position(Vec::is_empty) {
                return Err(ScenarioError::MissingOffers(tasks[t].clone()));
            }
        }

        let reported: u128 = offers.iter().map(|o| o.reported_cost.0 as u128).sum();
        if reported > MAX_MONEY as u128 {
            return Err(ScenarioError::ValueOutOfRange {
                field: "sum of reported costs".into(),
                limit: MAX_MONEY,
            });
        }
        let truthful: u128 = offers.iter().map(|o| o.true_cost().0 as u128).sum();
        if truthful > MAX_MONEY as u128 {
            return Err(ScenarioError::ValueOutOfRange {
                field: "sum of true costs".into(),
                limit: MAX_MONEY,
            });
        }
        let cells = (tasks.len() as u128 + 1) * (quality_threshold.0 as u128 + 1);
        if cells > MAX_DP_CELLS as u128 {
            return Err(ScenarioError::ValueOutOfRange {
                field: "(tasks + 1) * (quality_threshold + 1)".into(),
                limit: MAX_DP_CELLS,
            });
        }

        Ok(Scenario {
            version,
            tasks,
            quality_threshold,
            budget,
            offers,
            by_task,
        })
    }

    pub fn version(&self) -> i64 {
        self.version
    }

    pub fn tasks(&self) -> &[TaskId] {
        &self.tasks
    }

    pub fn quality_threshold(&self) -> Quality {
        self.quality_threshold
    }

    pub fn budget(&self) -> Money {
        self.budget
    }

    pub fn offers(&self) -> &[Offer] {
        &self.offers
    }

    /// Offers for the task at `task_index`, in document order.
    pub fn offers_for(&self, task_index: usize) -> impl Iterator<Item = &Offer> + '_ {
        self.by_task[task_index].iter().map(|&i| &self.offers[i])
    }

    pub(crate) fn offer_indices(&self, task_index: usize) -> &[usize] {
        &self.by_task[task_index]
    }

    pub fn offer(&self, id: &str) -> Option<&Offer> {
        self.offers.iter().find(|o| o.id.as_str() == id)
    }

    /// Distinct bidding providers, sorted.
    pub fn providers(&self) -> Vec<ProviderId> {
        let set: BTreeSet<&ProviderId> = self.offers.iter().map(|o| &o.provider).collect();
        set.into_iter().cloned().collect()
    }

    pub fn has_provider(&self, provider: &ProviderId) -> bool {
        self.offers.iter().any(|o| &o.provider == provider)
    }

    /// True when some offer carries a private cost different from its report.
    pub fn has_private_costs(&self) -> bool {
        self.offers.iter().any(|o| o.true_cost() != o.reported_cost)
    }

    pub fn with_quality_threshold(&self, threshold: Quality) -> Result<Scenario, ScenarioError> {
        Scenario::assemble(
            self.version,
            self.tasks.clone(),
            threshold,
            self.budget,
            self.offers.clone(),
            true,
        )
    }

    pub fn with_budget(&self, budget: Money) -> Result<Scenario, ScenarioError> {
        money_in_range(budget.0, || "budget_cents".into())?;
        let mut s = self.clone();
        s.budget = budget;
        Ok(s)
    }

    /// Same request with a replacement offer set, fully re-validated.
    pub fn with_offers(&self, offers: Vec<Offer>) -> Result<Scenario, ScenarioError> {
        Scenario::assemble(
            self.version,
            self.tasks.clone(),
            self.quality_threshold,
            self.budget,
            offers,
            true,
        )
    }

    /// Like [`Scenario::with_offers`] but tolerates tasks left without offers.
    pub(crate) fn with_offers_partial(
        &self,
        offers: Vec<Offer>,
    ) -> Result<Scenario, ScenarioError> {
        Scenario::assemble(
            self.version,
            self.tasks.clone(),
            self.quality_threshold,
            self.budget,
            offers,
            false,
        )
    }

    /// Every provider reports its true cost.
    pub fn truthful(&self) -> Scenario {
        let mut s = self.clone();
        for o in &mut s.offers {
            o.reported_cost = o.true_cost();
        }
        s
    }

    pub fn to_doc(&self) -> ScenarioDoc {
        ScenarioDoc {
            version: self.version,
            tasks: self.tasks.iter().map(|t| t.0.clone()).collect(),
            quality_threshold: self.quality_threshold.0 as i64,
            budget_cents: self.budget.0 as i64,
            offers: self
                .offers
                .iter()
                .map(|o| OfferDoc {
                    id: o.id.0.clone(),
                    provider: o.provider.0.clone(),
                    task: o.task.0.clone(),
                    cost_cents: o.reported_cost.0 as i64,
                    quality: o.quality.0 as i64,
                    true_cost_cents: o.true_cost.map(|c| c.0 as i64),
                })
                .collect(),
        }
    }

    /// Pretty JSON in schema field order, newline-terminated.
    pub fn to_json_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_doc()).expect("scenario serializes");
        s.push('\n');
        s
    }

    /// Compact JSON with object keys sorted; the digest input.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let value = serde_json::to_value(self.to_doc()).expect("scenario serializes");
        serde_json::to_vec(&value).expect("value serializes")
    }

    pub fn digest(&self) -> ScenarioDigest {
        ScenarioDigest(hex::encode(Sha256::digest(self.canonical_bytes())))
    }
}

impl From<Scenario> for ScenarioDoc {
    fn from(s: Scenario) -> ScenarioDoc {
        s.to_doc()
    }
}
