//! Command-line front end: key generation, workload generation, scenario
//! runs, standalone audits, benchmarks and gas reports.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use sealbid::blindsig::DenominationKeys;
use sealbid::group::GroupParams;
use sealbid::scenario::{
    self, gas_report, generate_storage_workload, load_scenario, run_scenario_full, FixedSolution,
    PriceModel, RunReport,
};
use sealbid::solver::{run_vda, VdaConfig};
use sealbid::verifier;

#[derive(Parser)]
#[command(name = "sealbid", version, about = "Sealed-bid multi-item auction simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate threshold signing keys per denomination (trusted dealer).
    Keygen(KeygenArgs),
    /// Generate a storage-market scenario file.
    Generate(GenerateArgs),
    /// Run a scenario end to end and print the report.
    Run(RunArgs),
    /// Audit a solution against a scenario's revealed data.
    Audit(AuditArgs),
    /// Time the solver and verifier over a grid of auction sizes.
    Bench(BenchArgs),
    /// Run a scenario and print the per-operation gas table.
    GasReport(GasReportArgs),
}

#[derive(Args)]
struct KeygenArgs {
    #[arg(long, short = 't')]
    threshold: u32,
    #[arg(long, short = 'n')]
    authorities: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated deposit denominations to issue keys for.
    #[arg(long, value_delimiter = ',', default_value = "1,2,5,10,20,50,100")]
    denominations: Vec<u64>,
    /// Output path for the key file (JSON).
    #[arg(long, short = 'o')]
    out: PathBuf,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    items: usize,
    #[arg(long, default_value_t = 50)]
    bidders: usize,
    /// Seller asking rate in milli-units per GB-month.
    #[arg(long, default_value_t = 55)]
    seller_rate: u64,
    /// Buyer reference rate in milli-units per GB-month.
    #[arg(long, default_value_t = 110)]
    buyer_rate: u64,
    /// Discount for 12-month leases, percent.
    #[arg(long, default_value_t = 25)]
    duration_discount: u64,
    /// Rate jitter half-width, percent.
    #[arg(long, default_value_t = 15)]
    jitter: u64,
    /// Output path; stdout if omitted.
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    scenario: PathBuf,
    /// Append a CSV row (with header when creating the file).
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write the ledger event log (newline-delimited JSON).
    #[arg(long)]
    events: Option<PathBuf>,
    /// Zero the measured timing columns for byte-identical reports.
    #[arg(long)]
    zero_timings: bool,
}

#[derive(Args)]
struct AuditArgs {
    /// Scenario file providing items and bids.
    #[arg(long)]
    scenario: PathBuf,
    /// Solution to audit (JSON: assignment, prices, score).
    #[arg(long)]
    solution: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated bidder counts.
    #[arg(long, value_delimiter = ',', default_value = "500,1000,2000")]
    bidders: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    items: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Append CSV rows here; stdout otherwise.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct GasReportArgs {
    scenario: PathBuf,
}

#[derive(Serialize, Deserialize)]
struct KeyFileShare {
    index: u32,
    secret: String,
    verify_key: String,
}

#[derive(Serialize, Deserialize)]
struct KeyFileEntry {
    denomination: u64,
    threshold: u32,
    authorities: u32,
    master_verify_key: String,
    shares: Vec<KeyFileShare>,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::Keygen(args) => keygen(args),
        Command::Generate(args) => generate(args),
        Command::Run(args) => run_cmd(args),
        Command::Audit(args) => audit(args),
        Command::Bench(args) => bench(args),
        Command::GasReport(args) => gas_report_cmd(args),
    }
}

fn keygen(args: KeygenArgs) -> Result<(), String> {
    let mut rng = ChaCha20Rng::seed_from_u64(args.seed);
    let params = GroupParams::bls12_381();
    let keys = DenominationKeys::generate(
        &params,
        args.denominations.iter().copied(),
        args.threshold,
        args.authorities,
        &mut rng,
    )
    .map_err(|e| e.to_string())?;
    let entries: Vec<KeyFileEntry> = keys
        .denominations()
        .map(|d| {
            let ks = keys.get(d).expect("generated");
            KeyFileEntry {
                denomination: d,
                threshold: ks.t,
                authorities: ks.n,
                master_verify_key: hex::encode(ks.master_verify_key.to_bytes()),
                shares: ks
                    .shares
                    .iter()
                    .map(|s| KeyFileShare {
                        index: s.index,
                        secret: hex::encode(s.secret.to_bytes()),
                        verify_key: hex::encode(s.verify_key.to_bytes()),
                    })
                    .collect(),
            }
        })
        .collect();
    let json = serde_json::to_string_pretty(&entries).map_err(|e| e.to_string())?;
    std::fs::write(&args.out, json).map_err(|e| e.to_string())?;
    println!(
        "wrote {} denomination keys ({}-of-{}) to {}",
        entries.len(),
        args.threshold,
        args.authorities,
        args.out.display()
    );
    Ok(())
}

fn generate(args: GenerateArgs) -> Result<(), String> {
    let model = PriceModel {
        seller_rate_milli: args.seller_rate,
        buyer_rate_milli: args.buyer_rate,
        duration_discount_pct: args.duration_discount,
        jitter_pct: args.jitter,
    };
    let file = generate_storage_workload(args.seed, args.items, args.bidders, &model);
    let text = toml::to_string_pretty(&file).map_err(|e| e.to_string())?;
    match args.out {
        Some(path) => {
            std::fs::write(&path, text).map_err(|e| e.to_string())?;
            println!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn run_cmd(args: RunArgs) -> Result<(), String> {
    let file = load_scenario(&args.scenario).map_err(|e| e.to_string())?;
    let (mut report, ledger) = run_scenario_full(&file).map_err(|e| e.to_string())?;
    if args.zero_timings {
        report.solve_ms = 0;
        report.audit_ms = 0;
    }
    print!("{}", report.render(!args.zero_timings));
    if let Some(path) = args.csv {
        append_csv(&path, &report)?;
    }
    if let Some(path) = args.events {
        std::fs::write(&path, ledger.event_log()).map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn append_csv(path: &PathBuf, report: &RunReport) -> Result<(), String> {
    use std::io::Write;
    let fresh = !path.exists();
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| e.to_string())?;
    if fresh {
        writeln!(file, "{}", RunReport::csv_header()).map_err(|e| e.to_string())?;
    }
    writeln!(file, "{}", report.csv_row()).map_err(|e| e.to_string())?;
    Ok(())
}

fn audit(args: AuditArgs) -> Result<(), String> {
    let file = load_scenario(&args.scenario).map_err(|e| e.to_string())?;
    let text = std::fs::read_to_string(&args.solution).map_err(|e| e.to_string())?;
    let fixed: FixedSolution = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let solution = fixed.to_solution();
    let (items, valuations) = scenario::workload_instance(&file).map_err(|e| e.to_string())?;
    match verifier::audit(&solution, &valuations, &items) {
        Some(proof) => {
            println!(
                "misbehaviour: {}",
                serde_json::to_string(&proof).map_err(|e| e.to_string())?
            );
        }
        None => {
            let vcg = verifier::check_vcg(&solution, &valuations, &items);
            if vcg {
                println!("no misbehaviour found; solution is the buyer-optimal equilibrium");
            } else {
                println!(
                    "no misbehaviour found, but the solution is not buyer-optimal; \
                     a higher-scoring replacement can outbid it"
                );
            }
        }
    }
    Ok(())
}

fn bench(args: BenchArgs) -> Result<(), String> {
    let model = PriceModel::default();
    let mut rows = Vec::new();
    for &bidders in &args.bidders {
        let file = generate_storage_workload(args.seed, args.items, bidders, &model);
        let mut ledger = scenario::as_recorded_auction(&file).map_err(|e| e.to_string())?;
        let items = ledger.auction_items();
        let valuations = verifier::rebuild_valuations(ledger.revealed_bids(), &items)
            .map_err(|e| e.to_string())?;

        let solve_started = Instant::now();
        let solution = run_vda(&valuations, &items, &VdaConfig::default());
        let solve_ms = solve_started.elapsed().as_millis() as u64;

        let audit_started = Instant::now();
        let finding = verifier::audit(&solution, &valuations, &items);
        let vcg = verifier::check_vcg(&solution, &valuations, &items);
        let audit_ms = audit_started.elapsed().as_millis() as u64;
        if finding.is_some() || !vcg {
            return Err("solver output failed its own audit".into());
        }

        let submitter = sealbid::ledger::Address([0x50; 20]);
        let collateral = ledger.min_collateral();
        ledger.fund(submitter, collateral);
        let sold: Vec<u64> = solution
            .assignment
            .iter()
            .filter(|&x| x != 0)
            .map(|x| solution.prices.get(x as usize))
            .collect();
        let avg_price = sold.iter().map(|&p| p as f64).sum::<f64>() / sold.len().max(1) as f64;
        let avg_net = solution.score as f64 / valuations.bidders().max(1) as f64;
        ledger
            .submit_solution(submitter, solution, collateral)
            .map_err(|e| e.to_string())?;

        let row = format!(
            "{},{},{},{:.2},{:.2},{},{},{}",
            file.scenario_id,
            bidders,
            args.items,
            avg_price,
            avg_net,
            solve_ms,
            audit_ms,
            ledger.gas().total()
        );
        println!("{row}");
        rows.push(row);
    }
    if let Some(path) = args.csv {
        use std::io::Write;
        let fresh = !path.exists();
        let mut file = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| e.to_string())?;
        if fresh {
            writeln!(file, "{}", RunReport::csv_header()).map_err(|e| e.to_string())?;
        }
        for row in rows {
            writeln!(file, "{row}").map_err(|e| e.to_string())?;
        }
    }
    Ok(())
}

fn gas_report_cmd(args: GasReportArgs) -> Result<(), String> {
    let file = load_scenario(&args.scenario).map_err(|e| e.to_string())?;
    let (_, ledger) = run_scenario_full(&file).map_err(|e| e.to_string())?;
    print!("{}", gas_report(&ledger));
    Ok(())
}
