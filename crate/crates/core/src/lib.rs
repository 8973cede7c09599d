//! Strategy-proof reverse auctions for cloud service composition.
//!
//! A consumer requests an ordered list of tasks; providers bid a cost and a
//! quality level per task. [`wdp::solve_dp`] picks the cheapest composition
//! whose summed quality reaches the threshold, [`pricing`] pays winners under
//! VCG (Clarke pivot), first-price or posted-price rules, and [`lab`] checks
//! empirically that truthful cost reports are optimal under VCG while
//! first-price rewards inflation. [`ledger`] keeps an append-only record of
//! outcomes.

pub mod lab;
pub mod ledger;
pub mod market;
pub mod pricing;
mod status;
pub mod wdp;

#[cfg(test)]
mod testing;

pub use lab::{run_auction, LabError};
pub use market::{
    Allocation, AuctionOutcome, AuctionStatus, Mechanism, Money, Offer, OfferId, PaymentSchedule,
    ProviderId, Quality, Scenario, ScenarioDigest, ScenarioError, TaskId,
};
pub use status::StatusCode;
