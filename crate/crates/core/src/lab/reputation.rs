use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::market::{ProviderId, Quality};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReputationError {
    #[error("smoothing weight {0} bp is above 10000")]
    AlphaOutOfRange(u32),
}

/// Exponentially smoothed delivered quality of one provider.
///
/// Kept apart from auctions: an operator may copy scores into the next
/// scenario's quality fields, nothing here touches a running auction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReputationState {
    pub provider: ProviderId,
    pub score: Quality,
    alpha_bp: u32,
}

impl ReputationState {
    pub fn new(
        provider: ProviderId,
        score: Quality,
        alpha_bp: u32,
    ) -> Result<Self, ReputationError> {
        if alpha_bp > 10_000 {
            return Err(ReputationError::AlphaOutOfRange(alpha_bp));
        }
        Ok(ReputationState {
            provider,
            score,
            alpha_bp,
        })
    }

    pub fn alpha_bp(&self) -> u32 {
        self.alpha_bp
    }
}

/// `score' = round_half_up(((10000 - alpha) * score + alpha * observed) / 10000)`.
pub fn update_reputation(state: &ReputationState, observed: Quality) -> ReputationState {
    let alpha = state.alpha_bp as u128;
    let mixed = (10_000 - alpha) * state.score.0 as u128 + alpha * observed.0 as u128;
    let score = ((mixed + 5000) / 10_000) as u64;
    ReputationState {
        score: Quality(score),
        ..state.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn state(score: u64, alpha_bp: u32) -> ReputationState {
        ReputationState::new("P1".into(), Quality(score), alpha_bp).unwrap()
    }

    #[test]
    fn examples() {
        assert_eq!(
            update_reputation(&state(4, 0), Quality(9)).score,
            Quality(4)
        );
        assert_eq!(
            update_reputation(&state(4, 10_000), Quality(9)).score,
            Quality(9)
        );
        assert_eq!(
            update_reputation(&state(4, 5000), Quality(2)).score,
            Quality(3)
        );
        // 0.5 * 3 + 0.5 * 0 = 1.5 rounds up
        assert_eq!(
            update_reputation(&state(3, 5000), Quality(0)).score,
            Quality(2)
        );
    }

    #[test]
    fn alpha_bounded() {
        assert_eq!(
            ReputationState::new("P1".into(), Quality(1), 10_001),
            Err(ReputationError::AlphaOutOfRange(10_001))
        );
    }

    proptest! {
        #[test]
        fn stays_between_score_and_observation(
            score in 0u64..1_000_000,
            observed in 0u64..1_000_000,
            alpha in 0u32..=10_000,
        ) {
            let next = update_reputation(&state(score, alpha), Quality(observed)).score.0;
            prop_assert!(next >= score.min(observed));
            prop_assert!(next <= score.max(observed));
        }
    }
}
