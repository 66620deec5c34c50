//! Sealed-bid multi-item auction simulator.
//!
//! Bidders back their bids with cash-denomination deposits and obtain blind
//! threshold signatures over them, so revealed bids are provably funded yet
//! unlinkable to the depositor. A descending-price clock solves the auction
//! off-chain to the buyer-optimal (VCG) equilibrium; anyone may post a
//! solution to the simulated contract, and anyone else can discard a wrong
//! one with a constant-or-linear-cost misbehaviour proof, or outbid a
//! suboptimal one with a higher-scoring replacement.
//!
//! Module map:
//!
//! - [`group`]: the type-3 bilinear group (BLS12-381) everything is built on
//! - [`blindsig`]: blind threshold BLS signatures with trusted-dealer keygen
//! - [`market`]: items, general/specific bids, valuation derivation,
//!   minimum-price commitments, cash denominations
//! - [`solver`]: the descending-price clock, its demand/matching machinery
//!   and exhaustive reference oracles
//! - [`ledger`]: the deterministic contract simulation (phases, deposits,
//!   spent-list, collateral, fraud proofs, gas metering)
//! - [`verifier`]: off-chain audit, optimality check and challenger logic
//! - [`actors`]: protocol participants and end-to-end orchestration
//! - [`scenario`]: scenario files, workload generation, runs and reports

pub mod actors;
pub mod blindsig;
pub mod group;
pub mod ledger;
pub mod market;
pub mod scenario;
pub mod solver;
pub mod verifier;
