//! Deterministic in-process simulation of the auction smart contract.
//!
//! One `Ledger` is one auction: a state machine over the phases
//! SETUP -> COMMIT -> REVEAL -> SOLVE -> CONTEST -> FINAL, driven by block
//! height. It escrows deposits against blinded commitments, verifies and
//! stores revealed bids behind a double-spend list, accepts candidate
//! solutions backed by collateral, checks constant-or-linear-cost
//! misbehaviour proofs against the candidate, and settles withdrawals.
//!
//! Applying the same operation sequence always produces a bit-identical
//! ledger; every state change appends to an event log that serializes to
//! newline-delimited JSON for audit replay.

pub mod gas;

pub use gas::{GasMeter, GasOp, GasTable};

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blindsig::{self, Signature};
use crate::group::G2Element;
use crate::market::{self, Bid, Commitment, DenominationSet, Item};
use crate::solver::Solution;


/// 20-byte account address.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Address(pub [u8; 20]);

impl Address {
    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }
}

impl std::fmt::Debug for Address {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "0x{}", hex::encode(self.0))
    }
}

impl std::fmt::Display for Address {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "0x{}", hex::encode(self.0))
    }
}

/// 16-byte auction identifier.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AuctionId(pub [u8; 16]);

impl std::fmt::Debug for AuctionId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", hex::encode(self.0))
    }
}

/// 32-byte one-time number embedded in a bid; the spent-list key.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Nonce(pub [u8; 32]);

impl std::fmt::Debug for Nonce {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", hex::encode(self.0))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Phase {
    Setup,
    Commit,
    Reveal,
    Solve,
    Contest,
    Final,
}

/// Phase durations in blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timers {
    pub commit_blocks: u64,
    pub reveal_blocks: u64,
    pub solve_blocks: u64,
    pub contest_blocks: u64,
}

impl Default for Timers {
    fn default() -> Self {
        Timers {
            commit_blocks: 10,
            reveal_blocks: 10,
            solve_blocks: 10,
            contest_blocks: 10,
        }
    }
}

/// Auction policy fixed at deployment.
#[derive(Clone, Debug)]
pub struct Policy {
    pub threshold: u32,
    pub authorities: u32,
    pub timers: Timers,
    pub denominations: DenominationSet,
    pub gas: GasTable,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LedgerError {
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),
    #[error("timer expired or window not open")]
    TimerExpired,
    #[error("operation not allowed in phase {0:?}")]
    PhaseClosed(Phase),
    #[error("deposit {0} is not a configured denomination")]
    BadDenomination(u64),
    #[error("insufficient funds: have {have}, need {need}")]
    InsufficientFunds { have: u64, need: u64 },
    #[error("sender is not the address embedded in the bid")]
    WrongSender,
    #[error("bid targets a different auction")]
    WrongAuction,
    #[error("nonce already on the spent-list")]
    DoubleSpend,
    #[error("signature does not verify")]
    BadSignature,
    #[error("malformed reveal message or bid: {0}")]
    MalformedBid(String),
    #[error("commitment does not open to the claimed price")]
    BadOpening,
    #[error("unknown item {0}")]
    UnknownItem(u32),
    #[error("collateral {got} below required minimum {need}")]
    InsufficientCollateral { got: u64, need: u64 },
    #[error("score not higher than the current candidate")]
    ScoreNotHigher,
    #[error("malformed solution: {0}")]
    MalformedSolution(String),
    #[error("no candidate solution to contest")]
    NoCandidate,
    #[error("proof indices out of range")]
    InvalidIndices,
    #[error("alternative is not strictly better")]
    NotBetter,
    #[error("price is not below the reservation price")]
    PriceValid,
    #[error("declared score matches the recomputation")]
    ScoreCorrect,
    #[error("auction is not final")]
    NotFinal,
    #[error("nothing to withdraw")]
    NothingToWithdraw,
}

/// An item listing as stored on the ledger.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Listing {
    pub seller: Address,
    pub characteristics: Vec<u64>,
    pub commitment: Commitment,
    pub revealed_price: Option<u64>,
}

/// A stored, signature-verified bid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RevealedBid {
    pub addr: Address,
    pub denomination: u64,
    pub nonce: Nonce,
    pub bid: Bid,
}

/// The contested solution currently on the ledger.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Candidate {
    pub solution: Solution,
    pub submitter: Address,
    pub collateral: u64,
    pub submitted_at: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProofKind {
    WrongAssignment,
    WrongPrice,
    WrongScore,
}

/// Everything the ledger logs, in order, with the block height it happened
/// at. Serializes to one JSON object per line via [`Ledger::event_log`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    Deployed {
        auction_id: String,
        threshold: u32,
        authorities: u32,
    },
    Funded {
        addr: Address,
        amount: u64,
    },
    ItemListed {
        item_id: u32,
        seller: Address,
        characteristics: Vec<u64>,
    },
    /// Instructs the authorities to issue a blind signature for a deposit.
    IssueRequest {
        h_tilde: String,
        denomination: u64,
    },
    MinPriceRevealed {
        item_id: u32,
        reservation_price: u64,
    },
    BidRevealed {
        addr: Address,
        denomination: u64,
        nonce: Nonce,
    },
    SolutionSubmitted {
        submitter: Address,
        score: i64,
        collateral: u64,
    },
    CollateralRefunded {
        addr: Address,
        amount: u64,
    },
    ProofAccepted {
        kind: ProofKind,
        prover: Address,
        forfeited: u64,
    },
    ProofRejected {
        kind: ProofKind,
        prover: Address,
    },
    PhaseChanged {
        phase: Phase,
    },
    Withdrawn {
        addr: Address,
        amount: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub height: u64,
    #[serde(flatten)]
    pub event: Event,
}

/// Encodes the signed reveal message: fixed-width address, auction id and
/// nonce, then the length-prefixed bid payload.
pub fn encode_reveal_message(addr: &Address, id: &AuctionId, nonce: &Nonce, bid: &Bid) -> Vec<u8> {
    let payload = bid.encode();
    let mut out = Vec::with_capacity(20 + 16 + 32 + 4 + payload.len());
    out.extend_from_slice(&addr.0);
    out.extend_from_slice(&id.0);
    out.extend_from_slice(&nonce.0);
    out.extend_from_slice(&(payload.len() as u32).to_be_bytes());
    out.extend_from_slice(&payload);
    out
}

pub fn parse_reveal_message(
    message: &[u8],
) -> Result<(Address, AuctionId, Nonce, Bid), LedgerError> {
    let err = |m: &str| LedgerError::MalformedBid(m.to_string());
    if message.len() < 20 + 16 + 32 + 4 {
        return Err(err("message too short"));
    }
    let addr = Address(message[..20].try_into().unwrap());
    let id = AuctionId(message[20..36].try_into().unwrap());
    let nonce = Nonce(message[36..68].try_into().unwrap());
    let len = u32::from_be_bytes(message[68..72].try_into().unwrap()) as usize;
    let payload = &message[72..];
    if payload.len() != len {
        return Err(err("payload length mismatch"));
    }
    let bid = Bid::decode(payload).map_err(|e| err(&e.to_string()))?;
    Ok((addr, id, nonce, bid))
}

/// One auction's on-chain state.
#[derive(Clone, Debug)]
pub struct Ledger {
    auction_id: AuctionId,
    threshold: u32,
    authorities: u32,
    timers: Timers,
    denominations: DenominationSet,
    gas_table: GasTable,
    verify_keys: BTreeMap<u64, G2Element>,

    phase: Phase,
    height: u64,
    commit_open: u64,
    reveal_open: u64,
    solve_open: u64,
    solve_close: u64,
    contest_deadline: Option<u64>,

    listings: Vec<Listing>,
    commits: Vec<(Address, u64, [u8; crate::group::G1_BYTES])>,
    spent: BTreeSet<Nonce>,
    revealed: Vec<RevealedBid>,
    candidate: Option<Candidate>,
    finalized: Option<Candidate>,

    balances: BTreeMap<Address, u64>,
    escrow: u64,
    minted: u64,
    withdrawn: BTreeSet<Address>,

    gas: GasMeter,
    events: Vec<EventRecord>,
}

impl Ledger {
    /// Deploys a fresh auction at block height 0; bidding opens at the next
    /// block.
    pub fn setup(
        auction_id: AuctionId,
        deployer: Address,
        verify_keys: BTreeMap<u64, G2Element>,
        policy: Policy,
    ) -> Result<Ledger, LedgerError> {
        let Policy {
            threshold: t,
            authorities: n,
            timers,
            denominations,
            gas,
        } = policy;
        if t == 0 || t > n || 2 * t <= n {
            return Err(LedgerError::InvalidPolicy(format!(
                "threshold {t} of {n} authorities is not an honest majority"
            )));
        }
        if timers.commit_blocks == 0
            || timers.reveal_blocks == 0
            || timers.solve_blocks == 0
            || timers.contest_blocks == 0
        {
            return Err(LedgerError::InvalidPolicy("zero-length timer".into()));
        }
        for d in verify_keys.keys() {
            if !denominations.contains(*d) {
                return Err(LedgerError::InvalidPolicy(format!(
                    "verify key for unknown denomination {d}"
                )));
            }
        }
        let commit_open = 1;
        let reveal_open = commit_open + timers.commit_blocks;
        let solve_open = reveal_open + timers.reveal_blocks;
        let solve_close = solve_open + timers.solve_blocks;
        let mut ledger = Ledger {
            auction_id,
            threshold: t,
            authorities: n,
            timers,
            denominations,
            gas_table: gas,
            verify_keys,
            phase: Phase::Setup,
            height: 0,
            commit_open,
            reveal_open,
            solve_open,
            solve_close,
            contest_deadline: None,
            listings: Vec::new(),
            commits: Vec::new(),
            spent: BTreeSet::new(),
            revealed: Vec::new(),
            candidate: None,
            finalized: None,
            balances: BTreeMap::new(),
            escrow: 0,
            minted: 0,
            withdrawn: BTreeSet::new(),
            gas: GasMeter::default(),
            events: Vec::new(),
        };
        ledger.charge(&deployer, GasOp::Deploy, ledger.gas_table.deploy);
        ledger.log(Event::Deployed {
            auction_id: hex::encode(auction_id.0),
            threshold: t,
            authorities: n,
        });
        Ok(ledger)
    }

    /// Credits externally sourced coins to an address (scenario funding).
    pub fn fund(&mut self, addr: Address, amount: u64) {
        *self.balances.entry(addr).or_default() += amount;
        self.minted += amount;
        self.log(Event::Funded { addr, amount });
    }

    /// Lists an item for sale; allowed until the reveal phase opens.
    pub fn submit_item(
        &mut self,
        seller: Address,
        characteristics: Vec<u64>,
        min_price_commitment: Commitment,
    ) -> Result<u32, LedgerError> {
        if !matches!(self.phase, Phase::Setup | Phase::Commit) {
            return Err(LedgerError::PhaseClosed(self.phase));
        }
        let item_id = self.listings.len() as u32 + 1;
        self.listings.push(Listing {
            seller,
            characteristics: characteristics.clone(),
            commitment: min_price_commitment,
            revealed_price: None,
        });
        self.charge(&seller, GasOp::SubmitItem, self.gas_table.submit_item);
        self.log(Event::ItemListed {
            item_id,
            seller,
            characteristics,
        });
        Ok(item_id)
    }

    /// Escrows a deposit of `amount` coins against the blinded point and
    /// asks the authorities to issue a signature for it.
    pub fn commit(
        &mut self,
        depositor: Address,
        amount: u64,
        h_tilde: [u8; crate::group::G1_BYTES],
    ) -> Result<(), LedgerError> {
        if self.phase != Phase::Commit {
            return Err(LedgerError::TimerExpired);
        }
        if !self.denominations.contains(amount) {
            return Err(LedgerError::BadDenomination(amount));
        }
        let have = self.balances.get(&depositor).copied().unwrap_or(0);
        if have < amount {
            return Err(LedgerError::InsufficientFunds { have, need: amount });
        }
        *self.balances.get_mut(&depositor).unwrap() -= amount;
        self.escrow += amount;
        self.commits.push((depositor, amount, h_tilde));
        self.charge(&depositor, GasOp::Commit, self.gas_table.commit);
        self.log(Event::IssueRequest {
            h_tilde: hex::encode(h_tilde),
            denomination: amount,
        });
        Ok(())
    }

    /// Accepts a bid if the sender matches the embedded address, the auction
    /// id matches, the nonce is fresh and the unblinded signature verifies
    /// under the key of the claimed denomination.
    pub fn reveal(
        &mut self,
        sender: Address,
        denomination: u64,
        message: &[u8],
        signature: &Signature,
    ) -> Result<(), LedgerError> {
        if self.phase != Phase::Reveal {
            return Err(LedgerError::PhaseClosed(self.phase));
        }
        let (addr, id, nonce, bid) = parse_reveal_message(message)?;
        if sender != addr {
            return Err(LedgerError::WrongSender);
        }
        if id != self.auction_id {
            return Err(LedgerError::WrongAuction);
        }
        if self.spent.contains(&nonce) {
            return Err(LedgerError::DoubleSpend);
        }
        let key = self
            .verify_keys
            .get(&denomination)
            .ok_or(LedgerError::BadDenomination(denomination))?;
        if !blindsig::verify(key, message, signature) {
            return Err(LedgerError::BadSignature);
        }
        self.validate_bid(&bid, denomination)?;
        self.spent.insert(nonce);
        self.revealed.push(RevealedBid {
            addr,
            denomination,
            nonce,
            bid,
        });
        self.charge(&sender, GasOp::Reveal, self.gas_table.reveal);
        self.log(Event::BidRevealed {
            addr,
            denomination,
            nonce,
        });
        Ok(())
    }

    /// A bid may never commit the bidder to more than the deposit backing
    /// it, and a general bid's budget is exactly the deposit.
    fn validate_bid(&self, bid: &Bid, denomination: u64) -> Result<(), LedgerError> {
        match bid {
            Bid::General(g) => {
                if g.budget != denomination {
                    return Err(LedgerError::MalformedBid(format!(
                        "general bid budget {} != deposit {denomination}",
                        g.budget
                    )));
                }
                for listing in &self.listings {
                    if listing.characteristics.len() != g.constraints.len() {
                        return Err(LedgerError::MalformedBid(
                            "constraint vector width does not match listed items".into(),
                        ));
                    }
                }
            }
            Bid::Specific(s) => {
                if bid.max_liability() > denomination {
                    return Err(LedgerError::MalformedBid(format!(
                        "valuation {} above deposit {denomination}",
                        bid.max_liability()
                    )));
                }
                for id in s.valuations.keys() {
                    if *id == 0 || *id as usize > self.listings.len() {
                        return Err(LedgerError::MalformedBid(format!("unknown item {id}")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Opens a seller's minimum-price commitment.
    pub fn reveal_min_price(
        &mut self,
        seller: Address,
        item_id: u32,
        reservation_price: u64,
        salt: &[u8; 32],
    ) -> Result<(), LedgerError> {
        if self.phase != Phase::Reveal {
            return Err(LedgerError::PhaseClosed(self.phase));
        }
        let listing = self
            .listings
            .get_mut(item_id as usize - 1)
            .ok_or(LedgerError::UnknownItem(item_id))?;
        if !market::open_min_price(&listing.commitment, reservation_price, salt) {
            return Err(LedgerError::BadOpening);
        }
        listing.revealed_price = Some(reservation_price);
        self.charge(&seller, GasOp::RevealMinPrice, self.gas_table.reveal_min_price);
        self.log(Event::MinPriceRevealed {
            item_id,
            reservation_price,
        });
        Ok(())
    }

    /// The items taking part in the auction: listings whose minimum price
    /// was opened, in listing order. An unopened commitment withdraws the
    /// item. Solution vectors are indexed by position in this list.
    pub fn auction_items(&self) -> Vec<Item> {
        self.listings
            .iter()
            .enumerate()
            .filter_map(|(idx, l)| {
                l.revealed_price
                    .map(|r| Item::new(idx as u32 + 1, l.characteristics.clone(), r))
            })
            .collect()
    }

    pub fn revealed_bids(&self) -> &[RevealedBid] {
        &self.revealed
    }

    /// Valuation of revealed bidder `b` for auction item position `i`
    /// (0 = null item), derived on demand from the stored bid.
    pub fn valuation(&self, b: usize, i: usize, items: &[Item]) -> u64 {
        if i == 0 {
            return 0;
        }
        let Some(bid) = self.revealed.get(b) else {
            return 0;
        };
        let Some(item) = items.get(i - 1) else {
            return 0;
        };
        match &bid.bid {
            Bid::General(g) => {
                let ok = item.characteristics.len() == g.constraints.len()
                    && item
                        .characteristics
                        .iter()
                        .zip(&g.constraints)
                        .all(|(have, need)| have >= need);
                if ok {
                    g.budget
                } else {
                    0
                }
            }
            Bid::Specific(s) => s.valuations.get(&item.id).copied().unwrap_or(0),
        }
    }

    /// Required collateral for a solution over the current auction size.
    pub fn min_collateral(&self) -> u64 {
        self.gas_table
            .min_collateral(self.revealed.len(), self.auction_items().len())
    }

    /// Stores a candidate solution if it is well-formed, fully
    /// collateralized and strictly outscores the current candidate. The
    /// contest window (re)starts on acceptance.
    pub fn submit_solution(
        &mut self,
        submitter: Address,
        solution: Solution,
        collateral: u64,
    ) -> Result<(), LedgerError> {
        if !matches!(self.phase, Phase::Solve | Phase::Contest) {
            return Err(LedgerError::PhaseClosed(self.phase));
        }
        let items = self.auction_items();
        if solution.assignment.bidders() != self.revealed.len()
            || solution.prices.items() != items.len()
        {
            return Err(LedgerError::MalformedSolution(format!(
                "expected {} bidders x {} items",
                self.revealed.len(),
                items.len()
            )));
        }
        if !solution.assignment.is_feasible(items.len()) {
            return Err(LedgerError::MalformedSolution(
                "item assigned more than once".into(),
            ));
        }
        let need = self.min_collateral();
        if collateral < need {
            return Err(LedgerError::InsufficientCollateral {
                got: collateral,
                need,
            });
        }
        if let Some(current) = &self.candidate {
            if solution.score <= current.solution.score {
                return Err(LedgerError::ScoreNotHigher);
            }
        }
        let have = self.balances.get(&submitter).copied().unwrap_or(0);
        if have < collateral {
            return Err(LedgerError::InsufficientFunds {
                have,
                need: collateral,
            });
        }

        *self.balances.get_mut(&submitter).unwrap() -= collateral;
        self.escrow += collateral;
        if let Some(prev) = self.candidate.take() {
            self.release(prev.submitter, prev.collateral);
            self.log(Event::CollateralRefunded {
                addr: prev.submitter,
                amount: prev.collateral,
            });
        }
        self.charge(
            &submitter,
            GasOp::SubmitSolution,
            self.gas_table.submit_solution(items.len()),
        );
        self.log(Event::SolutionSubmitted {
            submitter,
            score: solution.score,
            collateral,
        });
        self.candidate = Some(Candidate {
            solution,
            submitter,
            collateral,
            submitted_at: self.height,
        });
        if self.phase == Phase::Solve {
            self.set_phase(Phase::Contest);
        }
        self.contest_deadline = Some(self.height + self.timers.contest_blocks);
        Ok(())
    }

    pub fn candidate(&self) -> Option<&Candidate> {
        self.candidate.as_ref()
    }

    /// The finalized solution, once the auction reached FINAL.
    pub fn final_solution(&self) -> Option<&Candidate> {
        self.finalized.as_ref()
    }

    fn proof_preamble(&self) -> Result<(Candidate, Vec<Item>), LedgerError> {
        if self.phase != Phase::Contest {
            return Err(LedgerError::PhaseClosed(self.phase));
        }
        let candidate = self.candidate.clone().ok_or(LedgerError::NoCandidate)?;
        Ok((candidate, self.auction_items()))
    }

    fn accept_proof(&mut self, kind: ProofKind, prover: Address) {
        let candidate = self.candidate.take().expect("checked by preamble");
        self.release(prover, candidate.collateral);
        self.log(Event::ProofAccepted {
            kind,
            prover,
            forfeited: candidate.collateral,
        });
        // Solving reopens so an honest node can replace the discarded
        // candidate.
        self.contest_deadline = None;
        self.solve_close = self.height + self.timers.solve_blocks;
        self.set_phase(Phase::Solve);
    }

    /// Bidder `b` strictly prefers item `alt` (0 allowed) over their
    /// assigned item at the candidate's prices: two subtractions and one
    /// comparison.
    pub fn wrong_assignment(
        &mut self,
        prover: Address,
        bidder: usize,
        alt: u32,
    ) -> Result<(), LedgerError> {
        let (candidate, items) = self.proof_preamble()?;
        self.charge(&prover, GasOp::WrongAssignment, self.gas_table.wrong_assignment);
        if bidder >= self.revealed.len() || alt as usize > items.len() {
            self.log(Event::ProofRejected {
                kind: ProofKind::WrongAssignment,
                prover,
            });
            return Err(LedgerError::InvalidIndices);
        }
        let sol = &candidate.solution;
        let held = sol.assignment.get(bidder) as usize;
        let held_net =
            self.valuation(bidder, held, &items) as i128 - sol.prices.get(held) as i128;
        let alt_net = self.valuation(bidder, alt as usize, &items) as i128
            - sol.prices.get(alt as usize) as i128;
        if alt_net > held_net {
            self.accept_proof(ProofKind::WrongAssignment, prover);
            Ok(())
        } else {
            self.log(Event::ProofRejected {
                kind: ProofKind::WrongAssignment,
                prover,
            });
            Err(LedgerError::NotBetter)
        }
    }

    /// Item `i` is priced below its revealed reservation: one comparison.
    pub fn wrong_price(&mut self, prover: Address, item: u32) -> Result<(), LedgerError> {
        let (candidate, items) = self.proof_preamble()?;
        self.charge(&prover, GasOp::WrongPrice, self.gas_table.wrong_price);
        if item == 0 || item as usize > items.len() {
            self.log(Event::ProofRejected {
                kind: ProofKind::WrongPrice,
                prover,
            });
            return Err(LedgerError::InvalidIndices);
        }
        let price = candidate.solution.prices.get(item as usize);
        let reserve = items[item as usize - 1].reservation_price;
        if price < reserve {
            self.accept_proof(ProofKind::WrongPrice, prover);
            Ok(())
        } else {
            self.log(Event::ProofRejected {
                kind: ProofKind::WrongPrice,
                prover,
            });
            Err(LedgerError::PriceValid)
        }
    }

    /// The declared score differs from the on-chain recomputation of the
    /// sum of net valuations.
    pub fn wrong_score(&mut self, prover: Address) -> Result<(), LedgerError> {
        let (candidate, items) = self.proof_preamble()?;
        self.charge(
            &prover,
            GasOp::WrongScore,
            self.gas_table.wrong_score(self.revealed.len()),
        );
        let sol = &candidate.solution;
        let recomputed: i64 = (0..self.revealed.len())
            .map(|b| {
                let i = sol.assignment.get(b) as usize;
                self.valuation(b, i, &items) as i64 - sol.prices.get(i) as i64
            })
            .sum();
        if recomputed != sol.score {
            self.accept_proof(ProofKind::WrongScore, prover);
            Ok(())
        } else {
            self.log(Event::ProofRejected {
                kind: ProofKind::WrongScore,
                prover,
            });
            Err(LedgerError::ScoreCorrect)
        }
    }

    /// Advances the chain by `n` blocks, firing any timer-driven phase
    /// transitions along the way.
    pub fn advance_block(&mut self, n: u64) {
        for _ in 0..n {
            self.height += 1;
            self.settle_phase();
        }
    }

    fn settle_phase(&mut self) {
        loop {
            let next = match self.phase {
                Phase::Setup if self.height >= self.commit_open => Phase::Commit,
                Phase::Commit if self.height >= self.reveal_open => Phase::Reveal,
                Phase::Reveal if self.height >= self.solve_open => Phase::Solve,
                Phase::Solve if self.height >= self.solve_close && self.candidate.is_none() => {
                    Phase::Final
                }
                Phase::Contest
                    if self
                        .contest_deadline
                        .is_some_and(|deadline| self.height >= deadline) =>
                {
                    Phase::Final
                }
                _ => return,
            };
            if next == Phase::Final {
                self.finalize();
            }
            self.set_phase(next);
            if next == Phase::Final {
                return;
            }
        }
    }

    fn finalize(&mut self) {
        if let Some(candidate) = self.candidate.take() {
            self.release(candidate.submitter, candidate.collateral);
            self.log(Event::CollateralRefunded {
                addr: candidate.submitter,
                amount: candidate.collateral,
            });
            self.finalized = Some(candidate);
        }
    }

    /// Settles an address's entitlement once the auction is FINAL: losing
    /// bidders recover their deposit, winners recover deposit minus price,
    /// sellers collect the prices of their sold items. Committing without
    /// revealing forfeits the deposit.
    pub fn withdraw(&mut self, addr: Address) -> Result<u64, LedgerError> {
        if self.phase != Phase::Final {
            return Err(LedgerError::NotFinal);
        }
        if self.withdrawn.contains(&addr) {
            return Err(LedgerError::NothingToWithdraw);
        }
        let items = self.auction_items();
        let mut amount: u64 = 0;
        for (b, bid) in self.revealed.iter().enumerate() {
            if bid.addr != addr {
                continue;
            }
            let price_paid = match &self.finalized {
                Some(c) => {
                    let i = c.solution.assignment.get(b) as usize;
                    if i == 0 {
                        0
                    } else {
                        c.solution.prices.get(i)
                    }
                }
                None => 0,
            };
            amount += bid.denomination.saturating_sub(price_paid);
        }
        if let Some(c) = &self.finalized {
            for (idx, item) in items.iter().enumerate() {
                let pos = idx as u32 + 1;
                let sold = c.solution.assignment.iter().any(|x| x == pos);
                if sold && self.listings[item.id as usize - 1].seller == addr {
                    amount += c.solution.prices.get(pos as usize);
                }
            }
        }
        if amount == 0 {
            return Err(LedgerError::NothingToWithdraw);
        }
        self.withdrawn.insert(addr);
        self.release(addr, amount);
        self.log(Event::Withdrawn { addr, amount });
        Ok(amount)
    }

    fn release(&mut self, addr: Address, amount: u64) {
        debug_assert!(self.escrow >= amount, "escrow underflow");
        self.escrow -= amount;
        *self.balances.entry(addr).or_default() += amount;
    }

    fn set_phase(&mut self, phase: Phase) {
        self.phase = phase;
        self.log(Event::PhaseChanged { phase });
    }

    fn charge(&mut self, addr: &Address, op: GasOp, amount: u64) {
        self.gas.charge(&addr.to_hex(), op, amount);
    }

    fn log(&mut self, event: Event) {
        self.events.push(EventRecord {
            height: self.height,
            event,
        });
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn height(&self) -> u64 {
        self.height
    }

    pub fn auction_id(&self) -> AuctionId {
        self.auction_id
    }

    pub fn threshold(&self) -> (u32, u32) {
        (self.threshold, self.authorities)
    }

    pub fn denominations(&self) -> &DenominationSet {
        &self.denominations
    }

    pub fn verify_key(&self, denomination: u64) -> Option<&G2Element> {
        self.verify_keys.get(&denomination)
    }

    pub fn gas_table(&self) -> &GasTable {
        &self.gas_table
    }

    pub fn gas(&self) -> &GasMeter {
        &self.gas
    }

    pub fn balance(&self, addr: &Address) -> u64 {
        self.balances.get(addr).copied().unwrap_or(0)
    }

    pub fn escrow(&self) -> u64 {
        self.escrow
    }

    pub fn events(&self) -> &[EventRecord] {
        &self.events
    }

    /// The event log as newline-delimited JSON; the first line carries the
    /// format version.
    pub fn event_log(&self) -> String {
        let mut out = String::from("{\"event_log_version\":1}\n");
        for record in &self.events {
            out.push_str(&serde_json::to_string(record).expect("events serialize"));
            out.push('\n');
        }
        out
    }

    /// Funds conservation: everything minted is either in a balance or in
    /// escrow. Holds at every block; gas is metered, not deducted.
    pub fn check_conservation(&self) -> bool {
        let total: u64 = self.balances.values().sum();
        total + self.escrow == self.minted
    }

    /// Reconstructs a post-reveal auction directly from public data,
    /// skipping the commit/reveal ceremony: the entry point for replaying
    /// recorded auctions, fraud-proof analysis and benchmarks. Deposits
    /// equal to each bid's denomination are escrowed as if committed.
    pub fn from_revealed(
        auction_id: AuctionId,
        items: Vec<(Address, Item)>,
        revealed: Vec<RevealedBid>,
        policy: Policy,
    ) -> Result<Ledger, LedgerError> {
        let deployer = Address([0u8; 20]);
        let mut ledger = Ledger::setup(auction_id, deployer, BTreeMap::new(), policy)?;
        let salt = [0u8; 32];
        ledger.advance_block(1); // COMMIT
        let mut prices = Vec::with_capacity(items.len());
        for (seller, item) in items {
            prices.push((seller, item.reservation_price));
            let commitment = market::commit_min_price(item.reservation_price, &salt);
            ledger.submit_item(seller, item.characteristics, commitment)?;
        }
        for bid in &revealed {
            ledger.fund(bid.addr, bid.denomination);
            let have = ledger.balances.get_mut(&bid.addr).unwrap();
            *have -= bid.denomination;
            ledger.escrow += bid.denomination;
        }
        ledger.advance_block(ledger.timers.commit_blocks); // REVEAL
        for (idx, (seller, price)) in prices.into_iter().enumerate() {
            ledger.reveal_min_price(seller, idx as u32 + 1, price, &salt)?;
        }
        for bid in revealed {
            ledger.spent.insert(bid.nonce);
            ledger.log(Event::BidRevealed {
                addr: bid.addr,
                denomination: bid.denomination,
                nonce: bid.nonce,
            });
            ledger.revealed.push(bid);
        }
        ledger.advance_block(ledger.timers.reveal_blocks); // SOLVE
        debug_assert_eq!(ledger.phase, Phase::Solve);
        Ok(ledger)
    }
}
