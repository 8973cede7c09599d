//! Append-only JSON Lines record of auction outcomes.
//!
//! Every mutation rewrites the file through a temporary sibling and an atomic
//! rename, so a crash leaves either the old or the new file, never a torn
//! line. Settlement appends a superseding copy instead of editing history.
//! One writer per file; readers may run concurrently.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::market::{AuctionOutcome, AuctionStatus, Money, ProviderId};

/// Environment variable that pins the ledger clock (ISO-8601).
pub const FIXED_CLOCK_ENV: &str = "FIXED_CLOCK";

#[derive(Debug, Error)]
pub enum LedgerError {
    #[error("corrupt ledger at line {line}: {reason}")]
    Corrupt { line: usize, reason: String },
    #[error("ledger I/O failed: {0}")]
    Io(#[from] io::Error),
    #[error("no record with id {0}")]
    NotFound(u64),
    #[error("record {0} is already settled")]
    AlreadySettled(u64),
    #[error("record {0} did not succeed and cannot be settled")]
    NotSettleable(u64),
    #[error("invalid clock value {0:?}: expected ISO-8601")]
    BadClock(String),
}

impl LedgerError {
    fn corrupt(line: usize, reason: impl Into<String>) -> Self {
        LedgerError::Corrupt {
            line,
            reason: reason.into(),
        }
    }
}

pub trait Clock {
    fn now(&self) -> DateTime<Utc>;
}

pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> DateTime<Utc> {
        Utc::now()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct FixedClock(pub DateTime<Utc>);

impl FixedClock {
    pub fn parse(text: &str) -> Result<FixedClock, LedgerError> {
        DateTime::parse_from_rfc3339(text.trim())
            .map(|t| FixedClock(t.with_timezone(&Utc)))
            .map_err(|_| LedgerError::BadClock(text.to_owned()))
    }
}

impl Clock for FixedClock {
    fn now(&self) -> DateTime<Utc> {
        self.0
    }
}

/// [`FixedClock`] when `FIXED_CLOCK` is set, the system clock otherwise.
pub fn clock_from_env() -> Result<Box<dyn Clock>, LedgerError> {
    match std::env::var(FIXED_CLOCK_ENV) {
        Ok(v) => Ok(Box::new(FixedClock::parse(&v)?)),
        Err(_) => Ok(Box::new(SystemClock)),
    }
}

fn timestamp(clock: &dyn Clock) -> String {
    clock.now().to_rfc3339_opts(SecondsFormat::Secs, true)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", deny_unknown_fields)]
pub enum Settlement {
    Pending,
    /// Opaque reference issued by the external payment processor.
    Settled {
        reference: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LedgerRecord {
    pub record_id: u64,
    pub timestamp: String,
    /// Earlier record this one replaces.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub supersedes: Option<u64>,
    pub outcome: AuctionOutcome,
    pub settlement: Settlement,
}

impl LedgerRecord {
    fn to_line(&self) -> String {
        let mut line = serde_json::to_string(self).expect("record serializes");
        line.push('\n');
        line
    }
}

/// Parses and validates a whole ledger. Rejects torn or non-canonical lines,
/// gaps in record ids, dangling supersede links and impossible settlements.
pub fn parse_ledger(bytes: &[u8]) -> Result<Vec<LedgerRecord>, LedgerError> {
    let text = std::str::from_utf8(bytes).map_err(|e| LedgerError::corrupt(0, e.to_string()))?;
    let mut records: Vec<LedgerRecord> = Vec::new();
    let mut superseded = BTreeSet::new();
    let mut rest = text;
    let mut line_no = 0;
    while !rest.is_empty() {
        line_no += 1;
        let Some(end) = rest.find('\n') else {
            return Err(LedgerError::corrupt(line_no, "truncated final line"));
        };
        let line = &rest[..end];
        rest = &rest[end + 1..];

        let record: LedgerRecord =
            serde_json::from_str(line).map_err(|e| LedgerError::corrupt(line_no, e.to_string()))?;
        if record.to_line().trim_end_matches('\n') != line {
            return Err(LedgerError::corrupt(
                line_no,
                "record is not in canonical form",
            ));
        }
        let expected = records.len() as u64 + 1;
        if record.record_id != expected {
            return Err(LedgerError::corrupt(
                line_no,
                format!(
                    "record id {} where {expected} was expected",
                    record.record_id
                ),
            ));
        }
        record
            .outcome
            .check_shape()
            .map_err(|e| LedgerError::corrupt(line_no, e))?;
        if matches!(record.settlement, Settlement::Settled { .. })
            && !record.outcome.status.is_success()
        {
            return Err(LedgerError::corrupt(
                line_no,
                "settled record without success",
            ));
        }
        if let Some(prev) = record.supersedes {
            let Some(old) = records.get((prev as usize).wrapping_sub(1)) else {
                return Err(LedgerError::corrupt(
                    line_no,
                    format!("supersedes unknown record {prev}"),
                ));
            };
            if !superseded.insert(prev) {
                return Err(LedgerError::corrupt(
                    line_no,
                    format!("record {prev} superseded twice"),
                ));
            }
            if old.outcome != record.outcome {
                return Err(LedgerError::corrupt(
                    line_no,
                    "superseding copy changes the outcome",
                ));
            }
        }
        records.push(record);
    }
    Ok(records)
}

pub fn render_ledger(records: &[LedgerRecord]) -> String {
    records.iter().map(LedgerRecord::to_line).collect()
}

/// Loads a ledger; an absent file is an empty ledger.
pub fn load_ledger(path: &Path) -> Result<Vec<LedgerRecord>, LedgerError> {
    match fs::read(path) {
        Ok(bytes) => parse_ledger(&bytes),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(Vec::new()),
        Err(e) => Err(e.into()),
    }
}

fn append_line(path: &Path, existing: &[u8], line: &str) -> Result<(), LedgerError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(existing)?;
    tmp.write_all(line.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| LedgerError::Io(e.error))?;
    Ok(())
}

fn read_existing(path: &Path) -> Result<(Vec<u8>, Vec<LedgerRecord>), LedgerError> {
    match fs::read(path) {
        Ok(bytes) => {
            let records = parse_ledger(&bytes)?;
            Ok((bytes, records))
        }
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok((Vec::new(), Vec::new())),
        Err(e) => Err(e.into()),
    }
}

/// Appends `outcome` as a pending record, creating the ledger if needed.
pub fn append_record(
    path: &Path,
    outcome: &AuctionOutcome,
    clock: &dyn Clock,
) -> Result<LedgerRecord, LedgerError> {
    let (bytes, records) = read_existing(path)?;
    let record = LedgerRecord {
        record_id: records.len() as u64 + 1,
        timestamp: timestamp(clock),
        supersedes: None,
        outcome: outcome.clone(),
        settlement: Settlement::Pending,
    };
    append_line(path, &bytes, &record.to_line())?;
    Ok(record)
}

/// Marks a successful pending record as paid by appending a settled copy.
pub fn settle(
    path: &Path,
    record_id: u64,
    reference: &str,
    clock: &dyn Clock,
) -> Result<LedgerRecord, LedgerError> {
    let (bytes, records) = read_existing(path)?;
    let target = record_id
        .checked_sub(1)
        .and_then(|i| records.get(i as usize))
        .ok_or(LedgerError::NotFound(record_id))?;
    let already = matches!(target.settlement, Settlement::Settled { .. })
        || records.iter().any(|r| r.supersedes == Some(record_id));
    if already {
        return Err(LedgerError::AlreadySettled(record_id));
    }
    if !target.outcome.status.is_success() {
        return Err(LedgerError::NotSettleable(record_id));
    }
    let record = LedgerRecord {
        record_id: records.len() as u64 + 1,
        timestamp: timestamp(clock),
        supersedes: Some(record_id),
        outcome: target.outcome.clone(),
        settlement: Settlement::Settled {
            reference: reference.to_owned(),
        },
    };
    append_line(path, &bytes, &record.to_line())?;
    Ok(record)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatusCounts {
    pub success: u64,
    pub infeasible: u64,
    pub monopoly_provider: u64,
    pub budget_exceeded: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarketReport {
    /// Physical lines, superseded copies included.
    pub records: u64,
    /// Logical auctions (latest version of each record).
    pub auctions: u64,
    pub by_status: StatusCounts,
    #[serde(rename = "total_spend_cents")]
    pub total_spend: Money,
    #[serde(rename = "provider_revenue_cents")]
    pub provider_revenue: BTreeMap<ProviderId, Money>,
    pub settled: u64,
    pub settlement_backlog: u64,
}

pub fn summarize(records: &[LedgerRecord]) -> MarketReport {
    let superseded: BTreeSet<u64> = records.iter().filter_map(|r| r.supersedes).collect();
    let mut report = MarketReport {
        records: records.len() as u64,
        ..MarketReport::default()
    };
    for r in records
        .iter()
        .filter(|r| !superseded.contains(&r.record_id))
    {
        report.auctions += 1;
        match &r.outcome.status {
            AuctionStatus::Success => report.by_status.success += 1,
            AuctionStatus::Infeasible => report.by_status.infeasible += 1,
            AuctionStatus::MonopolyProvider { .. } => report.by_status.monopoly_provider += 1,
            AuctionStatus::BudgetExceeded { .. } => report.by_status.budget_exceeded += 1,
        }
        if let (AuctionStatus::Success, Some(p)) = (&r.outcome.status, &r.outcome.payments) {
            report.total_spend = report.total_spend + p.consumer_total;
            for (provider, amount) in &p.payments {
                let e = report.provider_revenue.entry(provider.clone()).or_default();
                *e = *e + *amount;
            }
            match r.settlement {
                Settlement::Pending => report.settlement_backlog += 1,
                Settlement::Settled { .. } => report.settled += 1,
            }
        }
    }
    report
}

/// Aggregates an existing ledger. Unlike appends, a missing file is an error.
pub fn build_report(path: &Path) -> Result<MarketReport, LedgerError> {
    let bytes = fs::read(path)?;
    Ok(summarize(&parse_ledger(&bytes)?))
}
