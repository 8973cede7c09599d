//! Winner determination: the cheapest composition whose summed quality
//! reaches the threshold.
//!
//! [`solve_dp`] runs a multiple-choice knapsack recurrence over accumulated
//! quality capped at the threshold `G`. State `(i, g)` holds the cheapest
//! reported cost of choosing one offer for each of the first `i` tasks with
//! capped quality exactly `g`; the answer sits at `(n, G)`. Ties at a state go
//! to the lexicographically smaller offer id. [`solve_bruteforce`] enumerates
//! the Cartesian product and serves as the independent oracle.

use thiserror::Error;

use crate::market::{Allocation, Money, Offer, ProviderId, Scenario, TaskId};

/// Default limit on the number of compositions the brute-force oracle visits.
pub const DEFAULT_BRUTEFORCE_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("instance has {combinations} compositions, above the cap of {cap}")]
    InstanceTooLarge { combinations: u128, cap: u64 },
    #[error("provider {0} has no offers in the scenario")]
    UnknownProvider(ProviderId),
}

const NONE: u32 = u32::MAX;

/// Filled DP table with backpointers.
#[derive(Clone, Debug)]
pub struct DpTable {
    tasks: usize,
    width: usize,
    cost: Vec<Option<Money>>,
    // (offer index into scenario.offers(), previous capped quality)
    back: Vec<(u32, u32)>,
}

impl DpTable {
    pub fn build(scenario: &Scenario) -> DpTable {
        let n = scenario.tasks().len();
        let cap = scenario.quality_threshold().0;
        let width = cap as usize + 1;
        let mut cost = vec![None; (n + 1) * width];
        let mut back = vec![(NONE, NONE); (n + 1) * width];
        cost[0] = Some(Money::ZERO);

        let offers = scenario.offers();
        for i in 1..=n {
            let (prev_rows, rows) = cost.split_at_mut(i * width);
            let prev = &prev_rows[(i - 1) * width..];
            let row = &mut rows[..width];
            let row_back = &mut back[i * width..(i + 1) * width];
            for (g, prev_cost) in prev.iter().enumerate() {
                let Some(prev_cost) = *prev_cost else {
                    continue;
                };
                for &oi in scenario.offer_indices(i - 1) {
                    let o = &offers[oi];
                    let next = (g as u64).saturating_add(o.quality.0).min(cap) as usize;
                    let candidate = prev_cost + o.reported_cost;
                    let better = match row[next] {
                        None => true,
                        Some(cur) if candidate < cur => true,
                        Some(cur) if candidate == cur => {
                            o.id < offers[row_back[next].0 as usize].id
                        }
                        Some(_) => false,
                    };
                    if better {
                        row[next] = Some(candidate);
                        row_back[next] = (oi as u32, g as u32);
                    }
                }
            }
        }
        DpTable {
            tasks: n,
            width,
            cost,
            back,
        }
    }

    pub fn tasks(&self) -> usize {
        self.tasks
    }

    /// Largest capped quality index (the threshold).
    pub fn cap(&self) -> usize {
        self.width - 1
    }

    /// Cheapest cost after `task` tasks at capped quality `g`; `None` is
    /// unreachable.
    pub fn cost(&self, task: usize, g: usize) -> Option<Money> {
        self.cost[task * self.width + g]
    }

    pub fn optimum(&self) -> Option<Money> {
        self.cost(self.tasks, self.cap())
    }

    fn reconstruct<'a>(&self, scenario: &'a Scenario) -> Option<Vec<&'a Offer>> {
        self.optimum()?;
        let mut picks = Vec::with_capacity(self.tasks);
        let mut g = self.cap();
        for i in (1..=self.tasks).rev() {
            let (oi, prev) = self.back[i * self.width + g];
            debug_assert_ne!(oi, NONE);
            picks.push(&scenario.offers()[oi as usize]);
            g = prev as usize;
        }
        debug_assert_eq!(g, 0);
        picks.reverse();
        Some(picks)
    }
}

/// Minimum-reported-cost feasible allocation, or `None` when no composition
/// reaches the quality threshold.
pub fn solve_dp(scenario: &Scenario) -> Option<Allocation> {
    let table = DpTable::build(scenario);
    let picks = table.reconstruct(scenario)?;
    let alloc = Allocation::from_offers(picks);
    debug_assert_eq!(Some(alloc.total_reported_cost), table.optimum());
    Some(alloc)
}

/// Exhaustive oracle over every one-offer-per-task composition.
///
/// Among equal-cost optima returns the lexicographically smallest sequence of
/// offer ids in task order.
pub fn solve_bruteforce(scenario: &Scenario, cap: u64) -> Result<Option<Allocation>, SolveError> {
    let groups: Vec<Vec<&Offer>> = (0..scenario.tasks().len())
        .map(|t| scenario.offers_for(t).collect())
        .collect();
    let combinations = groups
        .iter()
        .try_fold(1u128, |acc, g| acc.checked_mul(g.len() as u128))
        .unwrap_or(u128::MAX);
    if combinations > cap as u128 {
        return Err(SolveError::InstanceTooLarge { combinations, cap });
    }
    if groups.iter().any(Vec::is_empty) {
        return Ok(None);
    }

    let threshold = scenario.quality_threshold().0;
    let mut index = vec![0usize; groups.len()];
    let mut best: Option<(Money, Vec<&Offer>)> = None;
    loop {
        let pick: Vec<&Offer> = index.iter().zip(&groups).map(|(&k, g)| g[k]).collect();
        let quality = pick.iter().fold(0u64, |q, o| q.saturating_add(o.quality.0));
        if quality >= threshold {
            let cost: Money = pick.iter().map(|o| o.reported_cost).sum();
            let improves = match &best {
                None => true,
                Some((c, b)) => {
                    cost < *c
                        || (cost == *c && pick.iter().map(|o| &o.id).lt(b.iter().map(|o| &o.id)))
                }
            };
            if improves {
                best = Some((cost, pick));
            }
        }

        // odometer step; last task varies fastest
        let mut pos = groups.len();
        loop {
            if pos == 0 {
                return Ok(best.map(|(_, pick)| Allocation::from_offers(pick)));
            }
            pos -= 1;
            index[pos] += 1;
            if index[pos] < groups[pos].len() {
                break;
            }
            index[pos] = 0;
        }
    }
}

/// A scenario with one provider's offers removed.
#[derive(Clone, Debug)]
pub struct Restricted {
    pub scenario: Scenario,
    /// Tasks whose only bidder was the excluded provider. Non-empty means
    /// the restricted instance is infeasible by construction.
    pub offerless_tasks: Vec<TaskId>,
}

impl Restricted {
    pub fn is_monopoly(&self) -> bool {
        !self.offerless_tasks.is_empty()
    }
}

/// Removes every offer of `excluded`. The result may contain tasks without
/// offers; those are listed in [`Restricted::offerless_tasks`].
pub fn restrict(scenario: &Scenario, excluded: &ProviderId) -> Result<Restricted, SolveError> {
    if !scenario.has_provider(excluded) {
        return Err(SolveError::UnknownProvider(excluded.clone()));
    }
    let offers: Vec<Offer> = scenario
        .offers()
        .iter()
        .filter(|o| &o.provider != excluded)
        .cloned()
        .collect();
    let restricted = scenario
        .with_offers_partial(offers)
        .expect("removing offers preserves scenario invariants");
    let offerless_tasks = (0..restricted.tasks().len())
        .filter(|&t| restricted.offer_indices(t).is_empty())
        .map(|t| restricted.tasks()[t].clone())
        .collect();
    Ok(Restricted {
        scenario: restricted,
        offerless_tasks,
    })
}
