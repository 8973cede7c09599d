//! Complete auctions and the experiments built on them: truthfulness sweeps,
//! seeded verification runs, mechanism comparison, scenario generation and
//! reputation feedback.

mod auction;
mod compare;
mod generate;
mod reputation;
mod sweep;
mod verify;

use thiserror::Error;

use crate::market::{ProviderId, ScenarioError};

pub use auction::run_auction;
pub use compare::{compare_mechanisms, render_table, ComparisonRow};
pub use generate::{generate_scenario, GenError, GenParams, MAX_GENERATED_OFFERS};
pub use reputation::{update_reputation, ReputationError, ReputationState};
pub use sweep::{
    deviation_sweep, deviation_sweep_with, BudgetPolicy, DeviationPoint, SweepReport, DEFAULT_GRID,
    MAX_MULTIPLIER_BP, TRUTHFUL_BP,
};
pub use verify::{
    verify_strategyproof, verify_strategyproof_with, Offense, ScenarioSummary, Verdict,
    VerifyReport,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabError {
    #[error("provider {0} does not bid in the scenario")]
    UnknownProvider(ProviderId),
    #[error("deviation grid must contain the truthful multiplier 10000")]
    MissingTruthfulPoint,
    #[error("multiplier {0} bp is outside 1..={MAX_MULTIPLIER_BP}")]
    InvalidMultiplier(u32),
    #[error("deviated scenario is invalid: {0}")]
    Deviation(#[from] ScenarioError),
    #[error(transparent)]
    Generation(#[from] GenError),
}
