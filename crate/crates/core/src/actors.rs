//! Protocol participants as deterministic agents, and the orchestration of
//! a full auction: sellers list items, bidders deposit and obtain blind
//! credentials from the authorities, everyone reveals, a solver posts a
//! solution, auditors contest it, and the ledger finalizes.
//!
//! Every agent draws its randomness from the seeded source it is built
//! with, so a scenario replays bit-identically.

use std::time::{Duration, Instant};

use rand::Rng;
use rand_core::RngCore;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::blindsig::{self, BlindingState, DenominationKeys, KeyShare, Signature};
use crate::group::{self, G1Element, G2Element, Scalar};
use crate::ledger::{
    encode_reveal_message, Address, AuctionId, Ledger, LedgerError, Nonce, Phase, ProofKind,
};
use crate::market::{commit_min_price, Bid};
use crate::solver::Solution;
use crate::verifier::{self, MisbehaviourProof};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ActorError {
    #[error("ledger: {0}")]
    Ledger(#[from] LedgerError),
    #[error("claimant did not win the item")]
    NotWinner,
    #[error("claim signature invalid")]
    BadClaim,
    #[error("bidder could not assemble a credential: {0}")]
    NoCredential(String),
}

/// Derives a 20-byte address from a public key.
pub fn address_of(pk: &G2Element) -> Address {
    let digest = Sha256::digest(&pk.to_bytes()[..]);
    Address(digest[..20].try_into().unwrap())
}

/// A seller offering one item.
#[derive(Clone, Debug)]
pub struct SellerAgent {
    pub addr: Address,
    pub characteristics: Vec<u64>,
    pub reservation_price: u64,
    pub salt: [u8; 32],
    /// Whether the seller opens its minimum-price commitment; refusing
    /// withdraws the item from the auction.
    pub opens_commitment: bool,
    pub item_id: Option<u32>,
}

impl SellerAgent {
    pub fn new(
        characteristics: Vec<u64>,
        reservation_price: u64,
        rng: &mut impl RngCore,
    ) -> Self {
        let mut addr = [0u8; 20];
        rng.fill_bytes(&mut addr);
        let mut salt = [0u8; 32];
        rng.fill_bytes(&mut salt);
        SellerAgent {
            addr: Address(addr),
            characteristics,
            reservation_price,
            salt,
            opens_commitment: true,
            item_id: None,
        }
    }
}

/// A bidder: a fresh per-auction identity key, a one-time nonce, a bid and
/// the deposit backing it.
#[derive(Clone, Debug)]
pub struct BidderAgent {
    identity: Scalar,
    pub verify_key: G2Element,
    /// Fresh address derived from the identity key; embedded in the bid and
    /// used for reveal and withdrawal.
    pub fresh_addr: Address,
    /// Separately funded address that pays the deposit, unlinkable to
    /// `fresh_addr` on the ledger.
    pub funding_addr: Address,
    pub nonce: Nonce,
    pub bid: Bid,
    pub deposit: u64,
    /// Protocol behaviour switches for adversarial scenarios.
    pub reveals: bool,
    blinding: Option<BlindingState>,
    credential: Option<Signature>,
    message: Vec<u8>,
}

impl BidderAgent {
    pub fn new(bid: Bid, deposit: u64, rng: &mut impl RngCore) -> Self {
        let identity = Scalar::random_nonzero(rng);
        let verify_key = G2Element::generator().mul(&identity);
        let fresh_addr = address_of(&verify_key);
        let mut funding = [0u8; 20];
        rng.fill_bytes(&mut funding);
        let mut nonce = [0u8; 32];
        rng.fill_bytes(&mut nonce);
        BidderAgent {
            identity,
            verify_key,
            fresh_addr,
            funding_addr: Address(funding),
            nonce: Nonce(nonce),
            bid,
            deposit,
            reveals: true,
            blinding: None,
            credential: None,
            message: Vec::new(),
        }
    }

    /// Builds the signed reveal message and the blinded point for issuance.
    pub fn prepare(&mut self, auction_id: &AuctionId, rng: &mut impl RngCore) -> G1Element {
        self.message = encode_reveal_message(&self.fresh_addr, auction_id, &self.nonce, &self.bid);
        let state = blindsig::prepare_blind_sign(&self.message, rng);
        let point = state.blinded_point;
        self.blinding = Some(state);
        point
    }

    /// Unblinds and aggregates `t` partial signatures into the credential.
    pub fn assemble_credential(
        &mut self,
        partials: &[(u32, G1Element)],
        threshold: u32,
    ) -> Result<(), ActorError> {
        let state = self
            .blinding
            .as_ref()
            .ok_or_else(|| ActorError::NoCredential("not prepared".into()))?;
        let unblinded: Vec<(u32, G1Element)> = partials
            .iter()
            .map(|(i, sig)| {
                blindsig::unblind(&state.blinding_factor, sig)
                    .map(|u| (*i, u))
                    .map_err(|e| ActorError::NoCredential(e.to_string()))
            })
            .collect::<Result<_, _>>()?;
        let sig = blindsig::agg_sig(&unblinded, threshold)
            .map_err(|e| ActorError::NoCredential(e.to_string()))?;
        self.credential = Some(sig);
        Ok(())
    }

    pub fn credential(&self) -> Option<&Signature> {
        self.credential.as_ref()
    }

    pub fn reveal_on(&self, ledger: &mut Ledger) -> Result<(), ActorError> {
        let sig = self
            .credential
            .as_ref()
            .ok_or_else(|| ActorError::NoCredential("no aggregated signature".into()))?;
        ledger.reveal(self.fresh_addr, self.deposit, &self.message, sig)?;
        Ok(())
    }

    /// Signs a seller's challenge with the per-auction identity key.
    pub fn claim_item(&self, challenge: &Challenge) -> ClaimProof {
        let sigma = group::hash_to_g1(&challenge.encode()).mul(&self.identity);
        ClaimProof {
            addr: self.fresh_addr,
            verify_key: self.verify_key,
            sigma,
        }
    }
}

/// One signing authority holding a key share per denomination.
#[derive(Clone, Debug)]
pub struct AuthorityAgent {
    pub index: u32,
    shares: std::collections::BTreeMap<u64, KeyShare>,
    /// Offline authorities never answer issuance requests.
    pub available: bool,
}

impl AuthorityAgent {
    /// Builds the authority set from dealer output.
    pub fn from_keys(keys: &DenominationKeys, n: u32) -> Vec<AuthorityAgent> {
        (1..=n)
            .map(|index| {
                let shares = keys
                    .denominations()
                    .map(|d| {
                        let ks = keys.get(d).expect("denomination");
                        (d, ks.shares[index as usize - 1].clone())
                    })
                    .collect();
                AuthorityAgent {
                    index,
                    shares,
                    available: true,
                }
            })
            .collect()
    }

    /// Issues a partial signature for a blinded point, but only for requests
    /// the ledger actually emitted (deposit-backed issuance).
    pub fn issue(
        &self,
        ledger: &Ledger,
        h_tilde: &G1Element,
        denomination: u64,
    ) -> Option<(u32, G1Element)> {
        if !self.available {
            return None;
        }
        let requested = ledger.events().iter().any(|record| {
            matches!(
                &record.event,
                crate::ledger::Event::IssueRequest { h_tilde: h, denomination: d }
                    if *d == denomination && *h == hex::encode(h_tilde.to_bytes())
            )
        });
        if !requested {
            return None;
        }
        let share = self.shares.get(&denomination)?;
        let partial = blindsig::blind_sign(share, h_tilde);
        Some((partial.authority_index, partial.sigma_tilde))
    }
}

/// What the solving node does with the auction it sees.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "behavior", rename_all = "snake_case")]
pub enum SolverBehavior {
    /// Solve and submit the clock outcome.
    Honest,
    /// Submit a fixed, externally supplied solution.
    Fixed { solution: Solution },
    /// Solve honestly, then misdeclare the score by `delta`.
    SkewScore { delta: i64 },
}

/// An auditor; a griefing auditor files a bogus proof before any honest one.
#[derive(Clone, Debug)]
pub struct AuditorAgent {
    pub addr: Address,
    pub griefs: bool,
}

/// Outcome of the preparation phase.
#[derive(Debug, PartialEq, Eq)]
pub struct PreparationOutcome {
    pub accepted_reveals: usize,
    pub items_listed: usize,
    pub items_in_auction: usize,
}

/// Runs steps 1-5: listing, deposits, issuance, credential assembly and
/// reveals, leaving the ledger in the SOLVE phase.
pub fn run_preparation(
    ledger: &mut Ledger,
    authorities: &[AuthorityAgent],
    sellers: &mut [SellerAgent],
    bidders: &mut [BidderAgent],
    rng: &mut impl RngCore,
) -> Result<PreparationOutcome, ActorError> {
    let (threshold, _) = ledger.threshold();
    if ledger.phase() == Phase::Setup {
        ledger.advance_block(1);
    }

    for seller in sellers.iter_mut() {
        let commitment = commit_min_price(seller.reservation_price, &seller.salt);
        let id = ledger.submit_item(seller.addr, seller.characteristics.clone(), commitment)?;
        seller.item_id = Some(id);
    }

    let auction_id = ledger.auction_id();
    for bidder in bidders.iter_mut() {
        ledger.fund(bidder.funding_addr, bidder.deposit);
        let point = bidder.prepare(&auction_id, rng);
        ledger.commit(bidder.funding_addr, bidder.deposit, point.to_bytes())?;
        // Collect partial signatures from whichever authorities answer, in
        // arrival order, until the threshold is met.
        let partials: Vec<(u32, G1Element)> = authorities
            .iter()
            .filter_map(|a| a.issue(ledger, &point, bidder.deposit))
            .take(threshold as usize)
            .collect();
        if partials.len() == threshold as usize {
            bidder.assemble_credential(&partials, threshold)?;
        }
    }

    let commit_left = ledger.phase() == Phase::Commit;
    if commit_left {
        let timers = remaining_to_reveal(ledger);
        ledger.advance_block(timers);
    }

    for seller in sellers.iter() {
        if seller.opens_commitment {
            ledger.reveal_min_price(
                seller.addr,
                seller.item_id.expect("listed"),
                seller.reservation_price,
                &seller.salt,
            )?;
        }
    }
    let mut accepted = 0;
    for bidder in bidders.iter() {
        if bidder.reveals && bidder.credential().is_some() {
            bidder.reveal_on(ledger)?;
            accepted += 1;
        }
    }
    ledger.advance_block(remaining_to_solve(ledger));
    Ok(PreparationOutcome {
        accepted_reveals: accepted,
        items_listed: sellers.len(),
        items_in_auction: ledger.auction_items().len(),
    })
}

fn remaining_to_reveal(ledger: &Ledger) -> u64 {
    // The commit window ends one commit_blocks span after it opened.
    let mut probe = ledger.clone();
    let mut n = 0;
    while probe.phase() == Phase::Commit {
        probe.advance_block(1);
        n += 1;
    }
    n
}

fn remaining_to_solve(ledger: &Ledger) -> u64 {
    let mut probe = ledger.clone();
    let mut n = 0;
    while probe.phase() == Phase::Reveal {
        probe.advance_block(1);
        n += 1;
    }
    n
}

/// Outcome of the execution phase.
#[derive(Debug)]
pub struct ExecutionOutcome {
    pub final_solution: Option<Solution>,
    /// Proof submissions in order, with the ledger's verdict.
    pub proofs: Vec<(ProofKind, bool)>,
    /// Candidate replacements through higher-scoring submissions.
    pub replacements: u32,
    pub solve_time: Duration,
    pub audit_time: Duration,
}

/// Runs steps 6-7: the solver posts a candidate, auditors contest it, the
/// contest window runs out and the ledger finalizes. Returns the finalized
/// solution (if any solution was ever accepted).
pub fn run_execution(
    ledger: &mut Ledger,
    solver_addr: Address,
    behavior: &SolverBehavior,
    auditors: &[AuditorAgent],
    rng: &mut impl RngCore,
) -> Result<ExecutionOutcome, ActorError> {
    assert_eq!(ledger.phase(), Phase::Solve, "execution starts at SOLVE");
    let items = ledger.auction_items();
    let valuations = verifier::rebuild_valuations(ledger.revealed_bids(), &items)
        .map_err(|e| LedgerError::MalformedBid(e.to_string()))?;

    let solve_started = Instant::now();
    let honest = verifier::best_response(None, &valuations, &items);
    let solve_time = solve_started.elapsed();

    let submission = match behavior {
        SolverBehavior::Honest => honest.clone(),
        SolverBehavior::Fixed { solution } => solution.clone(),
        SolverBehavior::SkewScore { delta } => {
            let mut s = honest.clone();
            s.score += delta;
            s
        }
    };
    let collateral = ledger.min_collateral();
    ledger.fund(solver_addr, collateral);
    ledger.submit_solution(solver_addr, submission, collateral)?;

    let mut proofs = Vec::new();
    let mut replacements = 0;
    let mut audit_time = Duration::ZERO;

    // Auditors inspect every new candidate until one survives.
    loop {
        let Some(candidate) = ledger.candidate().cloned() else {
            // Discarded candidate: an honest solver steps in.
            let collateral = ledger.min_collateral();
            ledger.fund(solver_addr, collateral);
            ledger.submit_solution(solver_addr, honest.clone(), collateral)?;
            replacements += 1;
            continue;
        };

        let mut acted = false;
        for auditor in auditors {
            if auditor.griefs {
                // A bogus proof against whatever is on the ledger.
                let bidder = rng.gen_range(0..valuations.bidders().max(1));
                let kind = ProofKind::WrongAssignment;
                let accepted = ledger
                    .wrong_assignment(
                        auditor.addr,
                        bidder,
                        candidate.solution.assignment.get(bidder),
                    )
                    .is_ok();
                proofs.push((kind, accepted));
                if accepted {
                    acted = true;
                    break;
                }
            }
            let audit_started = Instant::now();
            let finding = verifier::audit(&candidate.solution, &valuations, &items);
            let is_vcg = finding.is_none()
                && verifier::check_vcg(&candidate.solution, &valuations, &items);
            audit_time += audit_started.elapsed();

            match finding {
                Some(MisbehaviourProof::WrongPrice { item }) => {
                    let accepted = ledger.wrong_price(auditor.addr, item).is_ok();
                    proofs.push((ProofKind::WrongPrice, accepted));
                    acted = accepted;
                }
                Some(MisbehaviourProof::WrongAssignment {
                    bidder,
                    alternative,
                }) => {
                    let accepted = ledger
                        .wrong_assignment(auditor.addr, bidder as usize, alternative)
                        .is_ok();
                    proofs.push((ProofKind::WrongAssignment, accepted));
                    acted = accepted;
                }
                Some(MisbehaviourProof::WrongScore) => {
                    let accepted = ledger.wrong_score(auditor.addr).is_ok();
                    proofs.push((ProofKind::WrongScore, accepted));
                    acted = accepted;
                }
                None if !is_vcg => {
                    // Equilibrium, but not buyer-optimal: outbid it.
                    let better =
                        verifier::best_response(Some(&candidate.solution), &valuations, &items);
                    let collateral = ledger.min_collateral();
                    ledger.fund(auditor.addr, collateral);
                    ledger.submit_solution(auditor.addr, better, collateral)?;
                    replacements += 1;
                    acted = true;
                }
                None => {}
            }
            if acted {
                break;
            }
        }
        if !acted {
            break;
        }
    }

    // Let the contest window lapse.
    let mut guard = 0;
    while ledger.phase() == Phase::Contest {
        ledger.advance_block(1);
        guard += 1;
        assert!(guard < 100_000, "contest never lapsed");
    }
    Ok(ExecutionOutcome {
        final_solution: ledger.final_solution().map(|c| c.solution.clone()),
        proofs,
        replacements,
        solve_time,
        audit_time,
    })
}

/// A seller's challenge to whoever claims an item; binds the auction and
/// the item so claims cannot be replayed elsewhere.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Challenge {
    pub auction_id: AuctionId,
    pub item_id: u32,
    pub nonce: [u8; 16],
}

impl Challenge {
    pub fn new(auction_id: AuctionId, item_id: u32, rng: &mut impl RngCore) -> Self {
        let mut nonce = [0u8; 16];
        rng.fill_bytes(&mut nonce);
        Challenge {
            auction_id,
            item_id,
            nonce,
        }
    }

    fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + 4 + 16 + 8);
        out.extend_from_slice(b"sealbid/claim/v1");
        out.extend_from_slice(&self.auction_id.0);
        out.extend_from_slice(&self.item_id.to_be_bytes());
        out.extend_from_slice(&self.nonce);
        out
    }
}

/// Proof of identity presented to a seller.
#[derive(Clone, Debug)]
pub struct ClaimProof {
    pub addr: Address,
    pub verify_key: G2Element,
    pub sigma: G1Element,
}

/// Seller-side check of an item claim against the finalized auction.
pub fn verify_claim(
    ledger: &Ledger,
    challenge: &Challenge,
    claim: &ClaimProof,
) -> Result<(), ActorError> {
    if ledger.phase() != Phase::Final {
        return Err(ActorError::Ledger(LedgerError::NotFinal));
    }
    let Some(finalized) = ledger.final_solution() else {
        return Err(ActorError::NotWinner);
    };
    if address_of(&claim.verify_key) != claim.addr {
        return Err(ActorError::BadClaim);
    }
    let items = ledger.auction_items();
    let position = items
        .iter()
        .position(|item| item.id == challenge.item_id)
        .ok_or(ActorError::NotWinner)? as u32
        + 1;
    let winner = ledger
        .revealed_bids()
        .iter()
        .enumerate()
        .find(|(b, _)| finalized.solution.assignment.get(*b) == position)
        .map(|(_, bid)| bid.addr);
    if winner != Some(claim.addr) {
        return Err(ActorError::NotWinner);
    }
    let h = group::hash_to_g1(&challenge.encode());
    let lhs = group::pair(&h, &claim.verify_key);
    let rhs = group::pair(&claim.sigma, &G2Element::generator());
    if lhs != rhs {
        return Err(ActorError::BadClaim);
    }
    Ok(())
}
