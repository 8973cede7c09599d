use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use auction_core::lab::{
    compare_mechanisms, deviation_sweep_with, generate_scenario, render_table,
    verify_strategyproof_with, BudgetPolicy, GenError, GenParams, LabError, Verdict, DEFAULT_GRID,
};
use auction_core::ledger::{self, clock_from_env, LedgerError};
use auction_core::{run_auction, Mechanism, ProviderId, Scenario, StatusCode};

/// Strategy-proof reverse auctions for cloud service composition.
#[derive(Parser)]
#[command(name = "auction", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Select a composition, price it and optionally record the outcome.
    Run(RunArgs),
    /// Sweep one provider's cost report and measure its utility.
    Sweep(SweepArgs),
    /// Sweep every provider of many generated scenarios.
    Verify(VerifyArgs),
    /// Compare VCG, first-price and posted price on one scenario.
    Compare(CompareArgs),
    /// Write a random scenario.
    Gen(GenArgs),
    /// Summarize a ledger.
    Report(ReportArgs),
    /// Record third-party settlement of a successful auction.
    Settle(SettleArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// vcg, first-price or posted:<markup_bp>
    #[arg(long, default_value = "vcg")]
    mechanism: Mechanism,
    #[arg(long)]
    ledger: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    provider: String,
    #[arg(long, default_value = "vcg")]
    mechanism: Mechanism,
    /// Comma-separated multipliers in basis points; must include 10000.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<u32>>,
    /// Keep the consumer budget in force for every deviation.
    #[arg(long)]
    enforce_budget: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenRanges {
    #[arg(long, default_value_t = 1)]
    cost_min: u64,
    #[arg(long, default_value_t = 10_000)]
    cost_max: u64,
    #[arg(long, default_value_t = 0)]
    quality_min: u64,
    #[arg(long, default_value_t = 5)]
    quality_max: u64,
    /// Quality threshold as a fraction of the best attainable, in bp.
    #[arg(long, default_value_t = 6000)]
    threshold_bp: u32,
}

impl GenRanges {
    fn params(&self, tasks: usize, offers: usize) -> GenParams {
        GenParams {
            tasks,
            offers_per_task: offers,
            cost_range_cents: (self.cost_min, self.cost_max),
            quality_range: (self.quality_min, self.quality_max),
            threshold_fraction_bp: self.threshold_bp,
        }
    }
}

#[derive(Args)]
struct VerifyArgs {
    /// Number of scenarios; seeds run from --first-seed upward.
    #[arg(long)]
    seeds: u64,
    #[arg(long, default_value_t = 1)]
    first_seed: u64,
    #[arg(long, default_value = "vcg")]
    mechanism: Mechanism,
    #[arg(long, default_value_t = 3)]
    tasks: usize,
    #[arg(long, default_value_t = 3)]
    offers: usize,
    #[command(flatten)]
    ranges: GenRanges,
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<u32>>,
    #[arg(long)]
    enforce_budget: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Posted-price markup in basis points.
    #[arg(long, default_value_t = 0)]
    markup: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    tasks: usize,
    #[arg(long)]
    offers: usize,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    ranges: GenRanges,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    ledger: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SettleArgs {
    #[arg(long)]
    ledger: PathBuf,
    #[arg(long)]
    record: u64,
    #[arg(long)]
    reference: String,
}

/// A failure that ends the process with a code and a message.
struct Failure {
    code: StatusCode,
    message: String,
}

impl Failure {
    fn validation(message: impl ToString) -> Self {
        Failure {
            code: StatusCode::ValidationError,
            message: message.to_string(),
        }
    }

    fn io(message: impl ToString) -> Self {
        Failure {
            code: StatusCode::IoError,
            message: message.to_string(),
        }
    }
}

impl From<LabError> for Failure {
    fn from(e: LabError) -> Self {
        Failure::validation(e)
    }
}

impl From<GenError> for Failure {
    fn from(e: GenError) -> Self {
        Failure::validation(e)
    }
}

impl From<LedgerError> for Failure {
    fn from(e: LedgerError) -> Self {
        match e {
            LedgerError::Corrupt { .. } | LedgerError::Io(_) => Failure::io(e),
            _ => Failure::validation(e),
        }
    }
}

fn load_scenario(path: &Path) -> Result<Scenario, Failure> {
    let bytes =
        fs::read(path).map_err(|e| Failure::io(format!("cannot read {}: {e}", path.display())))?;
    Scenario::from_slice(&bytes)
        .map_err(|e| Failure::validation(format!("{}: {} ({})", path.display(), e, e.code())))
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::io(format!("cannot write {}: {e}", path.display()))),
        None => io::stdout().write_all(text.as_bytes()).map_err(Failure::io),
    }
}

fn budget_policy(enforce: bool) -> BudgetPolicy {
    if enforce {
        BudgetPolicy::Enforce
    } else {
        BudgetPolicy::Lift
    }
}

fn run(args: RunArgs) -> Result<StatusCode, Failure> {
    let scenario = load_scenario(&args.scenario)?;
    let outcome = run_auction(&scenario, args.mechanism);
    if let Some(path) = &args.ledger {
        let clock = clock_from_env().map_err(Failure::validation)?;
        ledger::append_record(path, &outcome, clock.as_ref())?;
    }
    emit(&outcome, args.out.as_deref())?;
    Ok(StatusCode::from(&outcome.status))
}

fn sweep(args: SweepArgs) -> Result<StatusCode, Failure> {
    let scenario = load_scenario(&args.scenario)?;
    let grid = args.grid.unwrap_or_else(|| DEFAULT_GRID.to_vec());
    let report = deviation_sweep_with(
        &scenario,
        &ProviderId(args.provider),
        args.mechanism,
        &grid,
        budget_policy(args.enforce_budget),
    )?;
    emit(&report, args.out.as_deref())?;
    Ok(if report.max_gain > 0 {
        StatusCode::VerificationFailed
    } else {
        StatusCode::Success
    })
}

fn verify(args: VerifyArgs) -> Result<StatusCode, Failure> {
    let params = args.ranges.params(args.tasks, args.offers);
    let last = args
        .first_seed
        .checked_add(args.seeds)
        .ok_or_else(|| Failure::validation("seed range overflows"))?;
    let seeds: Vec<u64> = (args.first_seed..last).collect();
    let grid = args.grid.unwrap_or_else(|| DEFAULT_GRID.to_vec());
    let report = verify_strategyproof_with(
        &seeds,
        &params,
        &grid,
        args.mechanism,
        budget_policy(args.enforce_budget),
    )?;
    if report.vacuous {
        eprintln!("warning: 0 scenarios examined; PASS is vacuous");
    }
    eprintln!(
        "{:?}: {} scenarios, global max gain {} cents, {} offending deviations",
        report.verdict,
        report.scenarios_examined,
        report.global_max_gain,
        report.offending.len()
    );
    emit(&report, args.out.as_deref())?;
    Ok(match report.verdict {
        Verdict::Pass => StatusCode::Success,
        Verdict::Fail => StatusCode::VerificationFailed,
    })
}

fn compare(args: CompareArgs) -> Result<StatusCode, Failure> {
    let scenario = load_scenario(&args.scenario)?;
    if args.markup > auction_core::market::MAX_MARKUP_BP {
        return Err(Failure::validation(format!(
            "markup {} bp exceeds {}",
            args.markup,
            auction_core::market::MAX_MARKUP_BP
        )));
    }
    let rows = compare_mechanisms(&scenario, args.markup);
    eprint!("{}", render_table(&rows));
    emit(&rows, args.out.as_deref())?;
    if rows.iter().any(|r| r.status.is_success()) {
        return Ok(StatusCode::Success);
    }
    Ok(StatusCode::from(&rows[0].status))
}

fn gen(args: GenArgs) -> Result<StatusCode, Failure> {
    let params = args.ranges.params(args.tasks, args.offers);
    let scenario = generate_scenario(&params, args.seed)?;
    let text = scenario.to_json_pretty();
    match &args.out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::io(format!("cannot write {}: {e}", path.display())))?,
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(Failure::io)?,
    }
    Ok(StatusCode::Success)
}

fn report(args: ReportArgs) -> Result<StatusCode, Failure> {
    let report = ledger::build_report(&args.ledger).map_err(|e| match e {
        LedgerError::Io(io) => Failure::io(format!("cannot read {}: {io}", args.ledger.display())),
        other => Failure::io(format!("{}: {other}", args.ledger.display())),
    })?;
    emit(&report, args.out.as_deref())?;
    Ok(StatusCode::Success)
}

fn settle(args: SettleArgs) -> Result<StatusCode, Failure> {
    if !args.ledger.exists() {
        return Err(Failure::io(format!(
            "ledger {} does not exist",
            args.ledger.display()
        )));
    }
    let clock = clock_from_env().map_err(Failure::validation)?;
    let record = ledger::settle(&args.ledger, args.record, &args.reference, clock.as_ref())?;
    emit(&record, None)?;
    Ok(StatusCode::Success)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(StatusCode::ValidationError.code() as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Sweep(a) => sweep(a),
        Command::Verify(a) => verify(a),
        Command::Compare(a) => compare(a),
        Command::Gen(a) => gen(a),
        Command::Report(a) => report(a),
        Command::Settle(a) => settle(a),
    };
    let code = match result {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            failure.code
        }
    };
    ExitCode::from(code.code() as u8)
}
