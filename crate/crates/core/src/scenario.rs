//! Scenario files, the storage-market workload generator, the end-to-end
//! runner and its reports.
//!
//! A scenario is a human-editable TOML document describing one auction:
//! policy, items, bidders, solver behaviour and auditors. Running it drives
//! the full protocol through the ledger and yields a report with the final
//! assignment, economics, per-operation gas and timings. Reports are
//! deterministic for a given file except for the measured wall-clock
//! columns, which can be zeroed for byte-identical output.

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::actors::{
    run_execution, run_preparation, ActorError, AuditorAgent, AuthorityAgent, BidderAgent,
    SellerAgent, SolverBehavior,
};
use crate::blindsig::DenominationKeys;
use crate::group::GroupParams;
use crate::ledger::{
    Address, AuctionId, GasTable, Ledger, LedgerError, Policy, ProofKind, Timers,
};
use crate::market::{Bid, DenominationSet, GeneralBid, SpecificBid};
use crate::solver::{Assignment, PriceVector, Solution};

pub const SCENARIO_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("ledger: {0}")]
    Ledger(#[from] LedgerError),
    #[error("actor: {0}")]
    Actor(#[from] ActorError),
}

/// Top-level scenario document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub version: u32,
    pub scenario_id: String,
    pub seed: u64,
    pub auction: AuctionConfig,
    #[serde(default)]
    pub gas: GasTable,
    #[serde(default)]
    pub items: Vec<ItemConfig>,
    #[serde(default)]
    pub bidders: Vec<BidderConfig>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub auditors: Vec<AuditorConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuctionConfig {
    pub threshold: u32,
    pub authorities: u32,
    /// Deposit values bidders may use; the standard cash set when omitted.
    #[serde(default)]
    pub denominations: Option<Vec<u64>>,
    #[serde(default)]
    pub timers: Timers,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ItemConfig {
    pub characteristics: Vec<u64>,
    pub reservation_price: u64,
    /// Sellers refusing to open their commitment withdraw the item.
    #[serde(default = "default_true")]
    pub reveal_min_price: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BidderConfig {
    General {
        constraints: Vec<u64>,
        budget: u64,
        #[serde(default = "default_true")]
        reveal: bool,
    },
    Specific {
        /// `[item_id, valuation]` pairs.
        valuations: Vec<(u32, u64)>,
        deposit: u64,
        #[serde(default = "default_true")]
        reveal: bool,
    },
}

fn default_true() -> bool {
    true
}

/// Solver behaviour; `fixed` takes an explicit solution with real-item
/// prices (the null item's zero price is implied).
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "behavior", rename_all = "snake_case")]
pub enum SolverConfig {
    #[default]
    Honest,
    SkewScore {
        delta: i64,
    },
    Fixed {
        solution: FixedSolution,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedSolution {
    pub assignment: Vec<u32>,
    pub prices: Vec<u64>,
    pub score: i64,
}

impl FixedSolution {
    pub fn to_solution(&self) -> Solution {
        Solution {
            assignment: Assignment::new(self.assignment.clone()),
            prices: PriceVector::from_real(self.prices.clone()),
            score: self.score,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditorConfig {
    #[serde(default)]
    pub griefs: bool,
}

pub fn load_scenario(path: &Path) -> Result<ScenarioFile, ScenarioError> {
    let text = std::fs::read_to_string(path)?;
    parse_scenario(&text)
}

/// Parses and validates a scenario document; parse errors carry the line
/// and column of the offending TOML.
pub fn parse_scenario(text: &str) -> Result<ScenarioFile, ScenarioError> {
    let file: ScenarioFile = toml::from_str(text).map_err(|e| {
        let loc = e
            .span()
            .map(|span| {
                let line = text[..span.start.min(text.len())]
                    .bytes()
                    .filter(|&b| b == b'\n')
                    .count()
                    + 1;
                format!(" (line {line})")
            })
            .unwrap_or_default();
        ScenarioError::Parse(format!("{}{loc}", e.message()))
    })?;
    validate_scenario(&file)?;
    Ok(file)
}

fn validate_scenario(file: &ScenarioFile) -> Result<(), ScenarioError> {
    if file.version != SCENARIO_FORMAT_VERSION {
        return Err(ScenarioError::Invalid(format!(
            "unsupported format version {} (expected {SCENARIO_FORMAT_VERSION})",
            file.version
        )));
    }
    let denominations = denomination_set(&file.auction);
    let widths: Vec<usize> = file.items.iter().map(|i| i.characteristics.len()).collect();
    for (idx, bidder) in file.bidders.iter().enumerate() {
        match bidder {
            BidderConfig::General {
                constraints,
                budget,
                ..
            } => {
                if !denominations.contains(*budget) {
                    return Err(ScenarioError::Invalid(format!(
                        "bidder {idx}: budget {budget} is not a configured denomination"
                    )));
                }
                if widths.iter().any(|w| *w != constraints.len()) {
                    return Err(ScenarioError::Invalid(format!(
                        "bidder {idx}: {} constraints vs item characteristics {widths:?}",
                        constraints.len()
                    )));
                }
            }
            BidderConfig::Specific {
                valuations,
                deposit,
                ..
            } => {
                if !denominations.contains(*deposit) {
                    return Err(ScenarioError::Invalid(format!(
                        "bidder {idx}: deposit {deposit} is not a configured denomination"
                    )));
                }
                for (item, v) in valuations {
                    if *item == 0 || *item as usize > file.items.len() {
                        return Err(ScenarioError::Invalid(format!(
                            "bidder {idx}: valuation for unknown item {item}"
                        )));
                    }
                    if v > deposit {
                        return Err(ScenarioError::Invalid(format!(
                            "bidder {idx}: valuation {v} above deposit {deposit}"
                        )));
                    }
                }
            }
        }
    }
    Ok(())
}

fn denomination_set(auction: &AuctionConfig) -> DenominationSet {
    match &auction.denominations {
        Some(values) => DenominationSet::from_values(values.iter().copied()),
        None => DenominationSet::standard(),
    }
}

/// Everything a finished run reports.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub scenario_id: String,
    pub seed: u64,
    pub bidders_revealed: usize,
    pub items_in_auction: usize,
    pub outcome: Option<OutcomeReport>,
    pub proofs: Vec<(ProofKind, bool)>,
    pub replacements: u32,
    pub gas_by_op: BTreeMap<String, u64>,
    pub gas_total: u64,
    /// Currency value of the metered gas at the configured rate.
    pub gas_currency: u64,
    pub withdrawals: Vec<(String, u64)>,
    pub solve_ms: u64,
    pub audit_ms: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct OutcomeReport {
    /// (bidder index, item id, price) for every assigned bidder.
    pub assignments: Vec<(usize, u32, u64)>,
    pub score: i64,
    pub avg_price: f64,
    pub avg_net_valuation: f64,
    /// Average winning valuation: what direct deals at valuation price
    /// would have charged.
    pub baseline_valuation: f64,
    /// Average reservation of sold items: direct deals at reservation.
    pub baseline_reservation: f64,
    /// Midpoint between the two direct-deal baselines.
    pub baseline_midpoint: f64,
}

impl RunReport {
    pub fn csv_header() -> &'static str {
        "scenario_id,B,I,avg_price,avg_net_valuation,solve_ms,audit_ms,gas_total"
    }

    pub fn csv_row(&self) -> String {
        let (avg_price, avg_net) = match &self.outcome {
            Some(o) => (o.avg_price, o.avg_net_valuation),
            None => (0.0, 0.0),
        };
        format!(
            "{},{},{},{:.2},{:.2},{},{},{}",
            self.scenario_id,
            self.bidders_revealed,
            self.items_in_auction,
            avg_price,
            avg_net,
            self.solve_ms,
            self.audit_ms,
            self.gas_total
        )
    }

    /// Human-readable report. With `include_timings` off the rendering is
    /// byte-identical across runs of the same scenario.
    pub fn render(&self, include_timings: bool) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        writeln!(out, "scenario {} (seed {})", self.scenario_id, self.seed).unwrap();
        writeln!(
            out,
            "revealed bidders: {}, items in auction: {}",
            self.bidders_revealed, self.items_in_auction
        )
        .unwrap();
        match &self.outcome {
            None => writeln!(out, "no solution; all deposits refundable").unwrap(),
            Some(o) => {
                writeln!(out, "final score: {}", o.score).unwrap();
                for (bidder, item, price) in &o.assignments {
                    writeln!(out, "  bidder {bidder} <- item {item} @ {price}").unwrap();
                }
                writeln!(
                    out,
                    "avg price {:.2} | avg net valuation {:.2}",
                    o.avg_price, o.avg_net_valuation
                )
                .unwrap();
                writeln!(
                    out,
                    "direct-deal baselines: reservation {:.2} / midpoint {:.2} / valuation {:.2}",
                    o.baseline_reservation, o.baseline_midpoint, o.baseline_valuation
                )
                .unwrap();
            }
        }
        if !self.proofs.is_empty() {
            for (kind, accepted) in &self.proofs {
                writeln!(
                    out,
                    "proof {:?}: {}",
                    kind,
                    if *accepted { "accepted" } else { "rejected" }
                )
                .unwrap();
            }
            writeln!(out, "candidate replacements: {}", self.replacements).unwrap();
        }
        writeln!(out, "gas by operation:").unwrap();
        for (op, gas) in &self.gas_by_op {
            writeln!(out, "  {op}: {gas}").unwrap();
        }
        writeln!(
            out,
            "gas total: {} ({} currency units)",
            self.gas_total, self.gas_currency
        )
        .unwrap();
        for (addr, amount) in &self.withdrawals {
            writeln!(out, "withdraw {addr}: {amount}").unwrap();
        }
        if include_timings {
            writeln!(out, "solve {} ms, audit {} ms", self.solve_ms, self.audit_ms).unwrap();
        }
        out
    }
}

/// A fully constructed world ready to run: ledger plus agents.
pub struct World {
    pub ledger: Ledger,
    pub authorities: Vec<AuthorityAgent>,
    pub sellers: Vec<SellerAgent>,
    pub bidders: Vec<BidderAgent>,
    pub solver_behavior: SolverBehavior,
    pub auditors: Vec<AuditorAgent>,
    pub rng: ChaCha20Rng,
}

/// Builds the world a scenario describes.
pub fn build_world(file: &ScenarioFile) -> Result<World, ScenarioError> {
    validate_scenario(file)?;
    let mut rng = ChaCha20Rng::seed_from_u64(file.seed);
    let params = GroupParams::bls12_381();
    let denominations = denomination_set(&file.auction);

    // Key material only for the denominations in use.
    let used: std::collections::BTreeSet<u64> = file
        .bidders
        .iter()
        .map(|b| match b {
            BidderConfig::General { budget, .. } => *budget,
            BidderConfig::Specific { deposit, .. } => *deposit,
        })
        .collect();
    let keys = DenominationKeys::generate(
        &params,
        used.iter().copied(),
        file.auction.threshold,
        file.auction.authorities,
        &mut rng,
    )
    .map_err(|e| ScenarioError::Invalid(e.to_string()))?;

    let auction_id = AuctionId(rng.gen());
    let deployer = Address(rng.gen());
    let ledger = Ledger::setup(
        auction_id,
        deployer,
        keys.verify_keys(),
        Policy {
            threshold: file.auction.threshold,
            authorities: file.auction.authorities,
            timers: file.auction.timers,
            denominations,
            gas: file.gas.clone(),
        },
    )?;
    let authorities = AuthorityAgent::from_keys(&keys, file.auction.authorities);

    let sellers = file
        .items
        .iter()
        .map(|item| {
            let mut seller = SellerAgent::new(
                item.characteristics.clone(),
                item.reservation_price,
                &mut rng,
            );
            seller.opens_commitment = item.reveal_min_price;
            seller
        })
        .collect();

    let bidders = file
        .bidders
        .iter()
        .map(|config| match config {
            BidderConfig::General {
                constraints,
                budget,
                reveal,
            } => {
                let mut agent = BidderAgent::new(
                    Bid::General(GeneralBid {
                        constraints: constraints.clone(),
                        budget: *budget,
                    }),
                    *budget,
                    &mut rng,
                );
                agent.reveals = *reveal;
                agent
            }
            BidderConfig::Specific {
                valuations,
                deposit,
                reveal,
            } => {
                let mut agent = BidderAgent::new(
                    Bid::Specific(SpecificBid {
                        valuations: valuations.iter().copied().collect(),
                    }),
                    *deposit,
                    &mut rng,
                );
                agent.reveals = *reveal;
                agent
            }
        })
        .collect();

    let solver_behavior = match &file.solver {
        SolverConfig::Honest => SolverBehavior::Honest,
        SolverConfig::SkewScore { delta } => SolverBehavior::SkewScore { delta: *delta },
        SolverConfig::Fixed { solution } => SolverBehavior::Fixed {
            solution: solution.to_solution(),
        },
    };
    let mut auditors: Vec<AuditorAgent> = file
        .auditors
        .iter()
        .map(|a| AuditorAgent {
            addr: Address(rng.gen()),
            griefs: a.griefs,
        })
        .collect();
    if auditors.is_empty() {
        auditors.push(AuditorAgent {
            addr: Address(rng.gen()),
            griefs: false,
        });
    }

    Ok(World {
        ledger,
        authorities,
        sellers,
        bidders,
        solver_behavior,
        auditors,
        rng,
    })
}

/// Runs a scenario end to end and reports.
pub fn run_scenario(file: &ScenarioFile) -> Result<RunReport, ScenarioError> {
    run_scenario_full(file).map(|(report, _)| report)
}

/// Like [`run_scenario`], also handing back the final ledger (event log,
/// gas meter, balances).
pub fn run_scenario_full(file: &ScenarioFile) -> Result<(RunReport, Ledger), ScenarioError> {
    let mut world = build_world(file)?;
    run_preparation(
        &mut world.ledger,
        &world.authorities,
        &mut world.sellers,
        &mut world.bidders,
        &mut world.rng,
    )?;
    debug_assert!(world.ledger.check_conservation());
    let solver_addr = Address(world.rng.gen());
    let execution = run_execution(
        &mut world.ledger,
        solver_addr,
        &world.solver_behavior,
        &world.auditors,
        &mut world.rng,
    )?;
    debug_assert!(world.ledger.check_conservation());

    // Settle everyone who is owed anything.
    let mut withdrawals = Vec::new();
    let bidder_addrs: Vec<Address> = world
        .ledger
        .revealed_bids()
        .iter()
        .map(|b| b.addr)
        .collect();
    let seller_addrs: Vec<Address> = world.sellers.iter().map(|s| s.addr).collect();
    for addr in bidder_addrs.into_iter().chain(seller_addrs) {
        match world.ledger.withdraw(addr) {
            Ok(amount) => withdrawals.push((addr.to_hex(), amount)),
            Err(LedgerError::NothingToWithdraw) => {}
            Err(e) => return Err(e.into()),
        }
    }
    debug_assert!(world.ledger.check_conservation());

    let items = world.ledger.auction_items();
    let outcome = execution.final_solution.as_ref().map(|sol| {
        let mut assignments = Vec::new();
        let mut sold_prices: Vec<u64> = Vec::new();
        let mut nets: Vec<i64> = Vec::new();
        let mut winner_valuations: Vec<u64> = Vec::new();
        let mut sold_reserves: Vec<u64> = Vec::new();
        for b in 0..sol.assignment.bidders() {
            let pos = sol.assignment.get(b) as usize;
            if pos == 0 {
                continue;
            }
            let item = &items[pos - 1];
            let price = sol.prices.get(pos);
            let valuation = world.ledger.valuation(b, pos, &items);
            assignments.push((b, item.id, price));
            sold_prices.push(price);
            nets.push(valuation as i64 - price as i64);
            winner_valuations.push(valuation);
            sold_reserves.push(item.reservation_price);
        }
        let mean =
            |xs: &[u64]| -> f64 { xs.iter().map(|&x| x as f64).sum::<f64>() / xs.len().max(1) as f64 };
        let avg_price = mean(&sold_prices);
        let baseline_valuation = mean(&winner_valuations);
        let baseline_reservation = mean(&sold_reserves);
        OutcomeReport {
            assignments,
            score: sol.score,
            avg_price,
            avg_net_valuation: nets.iter().map(|&x| x as f64).sum::<f64>()
                / nets.len().max(1) as f64,
            baseline_valuation,
            baseline_reservation,
            baseline_midpoint: (baseline_valuation + baseline_reservation) / 2.0,
        }
    });

    let gas_by_op: BTreeMap<String, u64> = world
        .ledger
        .gas()
        .per_op()
        .map(|(op, g)| (format!("{op:?}"), g))
        .collect();
    let gas_total = world.ledger.gas().total();
    let report = RunReport {
        scenario_id: file.scenario_id.clone(),
        seed: file.seed,
        bidders_revealed: world.ledger.revealed_bids().len(),
        items_in_auction: items.len(),
        outcome,
        proofs: execution.proofs,
        replacements: execution.replacements,
        gas_by_op,
        gas_total,
        gas_currency: gas_total * world.ledger.gas_table().gas_price,
        withdrawals,
        solve_ms: execution.solve_time.as_millis() as u64,
        audit_ms: execution.audit_time.as_millis() as u64,
    };
    Ok((report, world.ledger))
}

/// Builds the post-reveal ledger a scenario describes without running the
/// commit/reveal cryptography: items listed and opened, bids recorded. For
/// benchmarking and fraud-proof analysis at scale.
pub fn as_recorded_auction(file: &ScenarioFile) -> Result<Ledger, ScenarioError> {
    use crate::ledger::{Nonce, RevealedBid};
    validate_scenario(file)?;
    let mut rng = ChaCha20Rng::seed_from_u64(file.seed);
    let items: Vec<(Address, crate::market::Item)> = file
        .items
        .iter()
        .enumerate()
        .map(|(idx, i)| {
            (
                Address(rng.gen()),
                crate::market::Item::new(
                    idx as u32 + 1,
                    i.characteristics.clone(),
                    i.reservation_price,
                ),
            )
        })
        .collect();
    let revealed: Vec<RevealedBid> = file
        .bidders
        .iter()
        .map(|config| {
            let (bid, denomination) = match config {
                BidderConfig::General {
                    constraints,
                    budget,
                    ..
                } => (
                    Bid::General(GeneralBid {
                        constraints: constraints.clone(),
                        budget: *budget,
                    }),
                    *budget,
                ),
                BidderConfig::Specific {
                    valuations,
                    deposit,
                    ..
                } => (
                    Bid::Specific(SpecificBid {
                        valuations: valuations.iter().copied().collect(),
                    }),
                    *deposit,
                ),
            };
            RevealedBid {
                addr: Address(rng.gen()),
                denomination,
                nonce: Nonce(rng.gen()),
                bid,
            }
        })
        .collect();
    Ok(Ledger::from_revealed(
        AuctionId(rng.gen()),
        items,
        revealed,
        Policy {
            threshold: file.auction.threshold,
            authorities: file.auction.authorities,
            timers: file.auction.timers,
            denominations: denomination_set(&file.auction),
            gas: file.gas.clone(),
        },
    )?)
}

/// Per-operation gas/currency table for a ledger.
pub fn gas_report(ledger: &Ledger) -> String {
    use std::fmt::Write;
    let rate = ledger.gas_table().gas_price;
    let mut out = String::new();
    writeln!(out, "{:<20} {:>14} {:>14}", "operation", "gas", "currency").unwrap();
    for (op, gas) in ledger.gas().per_op() {
        writeln!(out, "{:<20} {:>14} {:>14}", format!("{op:?}"), gas, gas * rate).unwrap();
    }
    writeln!(
        out,
        "{:<20} {:>14} {:>14}",
        "total",
        ledger.gas().total(),
        ledger.gas().total() * rate
    )
    .unwrap();
    out
}

/// Tunable price model for the storage-market workload.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PriceModel {
    /// Seller asking rate, thousandths of a currency unit per GB-month.
    pub seller_rate_milli: u64,
    /// Buyer reference rate (the managed-cloud price ceiling), same scale.
    pub buyer_rate_milli: u64,
    /// Longest-lease discount in percent, applied linearly in duration.
    pub duration_discount_pct: u64,
    /// Random jitter half-width in percent on both rates.
    pub jitter_pct: u64,
}

impl Default for PriceModel {
    fn default() -> Self {
        PriceModel {
            seller_rate_milli: 55,
            buyer_rate_milli: 110,
            duration_discount_pct: 25,
            jitter_pct: 15,
        }
    }
}

const STORAGE_SIZES_GB: [u64; 5] = [50, 100, 250, 500, 1000];

/// Generates a storage-market scenario: items are storage offers with
/// (capacity GB, lease months) characteristics and reservation prices from
/// the seller rate; bidders post general bids with budgets near the managed
/// cloud price, discounted for longer leases.
pub fn generate_storage_workload(
    seed: u64,
    n_items: usize,
    n_bidders: usize,
    model: &PriceModel,
) -> ScenarioFile {
    let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x0570_ea6e);
    let denominations = DenominationSet::standard();

    let jitter = |rng: &mut ChaCha20Rng, base: u64, pct: u64| -> u64 {
        if pct == 0 || base == 0 {
            return base;
        }
        let half = base * pct / 100;
        let lo = base - half;
        rng.gen_range(lo..=base + half)
    };

    let items = (0..n_items)
        .map(|_| {
            let gb = STORAGE_SIZES_GB[rng.gen_range(0..STORAGE_SIZES_GB.len())];
            let months = rng.gen_range(1..=12u64);
            let rate = jitter(&mut rng, model.seller_rate_milli, model.jitter_pct);
            let reservation_price = (gb * months * rate / 1000).max(1);
            ItemConfig {
                characteristics: vec![gb, months],
                reservation_price,
                reveal_min_price: true,
            }
        })
        .collect();

    let bidders = (0..n_bidders)
        .map(|_| {
            let gb = STORAGE_SIZES_GB[rng.gen_range(0..STORAGE_SIZES_GB.len())];
            let months = rng.gen_range(1..=12u64);
            // Longer leases pay a lower rate per month.
            let discounted = model.buyer_rate_milli
                - model.buyer_rate_milli * model.duration_discount_pct * (months - 1) / (11 * 100);
            let rate = jitter(&mut rng, discounted, model.jitter_pct);
            let budget = denominations.round_up((gb * months * rate / 1000).max(1));
            BidderConfig::General {
                constraints: vec![gb, months],
                budget,
                reveal: true,
            }
        })
        .collect();

    ScenarioFile {
        version: SCENARIO_FORMAT_VERSION,
        scenario_id: format!("storage-{seed}-{n_items}x{n_bidders}"),
        seed,
        auction: AuctionConfig {
            threshold: 3,
            authorities: 4,
            denominations: None,
            timers: Timers::default(),
        },
        gas: GasTable::default(),
        items,
        bidders,
        solver: SolverConfig::Honest,
        auditors: vec![AuditorConfig { griefs: false }],
    }
}

/// Scenario-shaped data without the ledger ceremony: the derived items and
/// valuation rows, for direct solver benchmarking.
pub fn workload_instance(
    file: &ScenarioFile,
) -> Result<(Vec<crate::market::Item>, crate::market::ValuationMatrix), ScenarioError> {
    let items: Vec<crate::market::Item> = file
        .items
        .iter()
        .enumerate()
        .map(|(idx, i)| {
            crate::market::Item::new(idx as u32 + 1, i.characteristics.clone(), i.reservation_price)
        })
        .collect();
    let mut rows = Vec::with_capacity(file.bidders.len());
    for bidder in &file.bidders {
        let row = match bidder {
            BidderConfig::General {
                constraints,
                budget,
                ..
            } => crate::market::derive_valuations(
                &GeneralBid {
                    constraints: constraints.clone(),
                    budget: *budget,
                },
                &items,
            )
            .map_err(|e| ScenarioError::Invalid(e.to_string()))?,
            BidderConfig::Specific { valuations, .. } => {
                let map: BTreeMap<u32, u64> = valuations.iter().copied().collect();
                let mut row = vec![0u64; items.len() + 1];
                for (idx, item) in items.iter().enumerate() {
                    row[idx + 1] = map.get(&item.id).copied().unwrap_or(0);
                }
                row
            }
        };
        rows.push(row);
    }
    Ok((
        items.clone(),
        crate::market::ValuationMatrix::from_rows(items.len(), rows),
    ))
}

/// The per-bidder on-chain cost of participating: one commit plus one
/// reveal at the configured rates.
pub fn per_bidder_gas(table: &GasTable) -> u64 {
    table.commit + table.reveal
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_scenario() -> ScenarioFile {
        parse_scenario(
            r#"
version = 1
scenario_id = "tiny"
seed = 11

[auction]
threshold = 1
authorities = 1
denominations = [10, 20]

[[items]]
characteristics = [5]
reservation_price = 2

[[bidders]]
kind = "general"
constraints = [5]
budget = 10

[[bidders]]
kind = "specific"
valuations = [[1, 15]]
deposit = 20
"#,
        )
        .unwrap()
    }

    #[test]
    fn parse_round_trips_through_toml() {
        let file = tiny_scenario();
        let text = toml::to_string(&file).unwrap();
        let back = parse_scenario(&text).unwrap();
        assert_eq!(file, back);
    }

    #[test]
    fn parse_error_reports_line() {
        let bad = "version = 1\nscenario_id = \"x\"\nseed = [not an integer\n";
        let err = parse_scenario(bad).unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn validation_catches_bad_configs() {
        let mut file = tiny_scenario();
        file.bidders.push(BidderConfig::General {
            constraints: vec![1],
            budget: 7,
            reveal: true,
        });
        assert!(matches!(
            validate_scenario(&file),
            Err(ScenarioError::Invalid(_))
        ));

        let mut file = tiny_scenario();
        file.bidders.push(BidderConfig::Specific {
            valuations: vec![(9, 5)],
            deposit: 10,
            reveal: true,
        });
        assert!(matches!(
            validate_scenario(&file),
            Err(ScenarioError::Invalid(_))
        ));

        let mut file = tiny_scenario();
        file.version = 9;
        assert!(matches!(
            validate_scenario(&file),
            Err(ScenarioError::Invalid(_))
        ));
    }

    #[test]
    fn run_tiny_scenario_end_to_end() {
        let report = run_scenario(&tiny_scenario()).unwrap();
        assert_eq!(report.bidders_revealed, 2);
        assert_eq!(report.items_in_auction, 1);
        let outcome = report.outcome.expect("solution");
        // The specific bidder values the item at 15 and wins at the general
        // bidder's 10.
        assert_eq!(outcome.assignments, vec![(1, 1, 10)]);
        assert!(report.proofs.is_empty());
    }

    #[test]
    fn reports_are_deterministic_without_timings() {
        let file = tiny_scenario();
        let a = run_scenario(&file).unwrap();
        let b = run_scenario(&file).unwrap();
        assert_eq!(a.render(false), b.render(false));
        assert_eq!(a.csv_row().rsplit_once(',').map(|x| x.0.to_string()),
                   b.csv_row().rsplit_once(',').map(|x| x.0.to_string()));
    }

    #[test]
    fn csv_columns_are_stable() {
        assert_eq!(
            RunReport::csv_header(),
            "scenario_id,B,I,avg_price,avg_net_valuation,solve_ms,audit_ms,gas_total"
        );
        let report = run_scenario(&tiny_scenario()).unwrap();
        assert_eq!(report.csv_row().split(',').count(), 8);
    }

    #[test]
    fn generator_is_deterministic_and_valid() {
        let model = PriceModel::default();
        let a = generate_storage_workload(5, 4, 9, &model);
        let b = generate_storage_workload(5, 4, 9, &model);
        assert_eq!(a, b);
        validate_scenario(&a).unwrap();
        let c = generate_storage_workload(6, 4, 9, &model);
        assert_ne!(a, c);
    }

    #[test]
    fn generator_discounts_longer_leases() {
        // With jitter off, rate per GB-month falls as months grow.
        let model = PriceModel {
            jitter_pct: 0,
            ..PriceModel::default()
        };
        let file = generate_storage_workload(3, 0, 200, &model);
        let mut by_months: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
        for b in &file.bidders {
            let BidderConfig::General {
                constraints,
                budget,
                ..
            } = b
            else {
                unreachable!()
            };
            let (gb, months) = (constraints[0], constraints[1]);
            by_months
                .entry(months)
                .or_default()
                .push(*budget as f64 / (gb * months) as f64);
        }
        let short: f64 = by_months[&1].iter().sum::<f64>() / by_months[&1].len() as f64;
        let long: f64 = by_months[&12].iter().sum::<f64>() / by_months[&12].len() as f64;
        assert!(
            long < short,
            "12-month rate {long} should undercut 1-month rate {short}"
        );
    }

    #[test]
    fn zero_items_refunds_everyone() {
        let mut file = tiny_scenario();
        file.items.clear();
        file.bidders = vec![BidderConfig::General {
            constraints: vec![],
            budget: 10,
            reveal: true,
        }];
        let report = run_scenario(&file).unwrap();
        assert_eq!(report.items_in_auction, 0);
        // Full deposit comes back.
        assert_eq!(report.withdrawals.len(), 1);
        assert_eq!(report.withdrawals[0].1, 10);
    }

    #[test]
    fn workload_instance_matches_scenario_shape() {
        let file = generate_storage_workload(8, 5, 12, &PriceModel::default());
        let (items, matrix) = workload_instance(&file).unwrap();
        assert_eq!(items.len(), 5);
        assert_eq!(matrix.bidders(), 12);
        assert_eq!(matrix.items(), 5);
    }
}
