//! Off-chain auditing of candidate solutions.
//!
//! Rebuilds the valuation matrix from the revealed bids and checks a
//! candidate in a single O(B*I) pass: reserve prices, per-bidder envy, then
//! the declared score. A single returned proof is enough for the ledger to
//! discard the candidate. Checking whether an equilibrium is also the
//! buyer-optimal one takes one extra clock iteration; if it is not, the
//! remedy is a strictly better replacement solution rather than a proof.

use serde::{Deserialize, Serialize};

use crate::ledger::RevealedBid;
use crate::market::{derive_valuations, Bid, Item, MarketError, ValuationMatrix};
use crate::solver::{
    self, demand_correspondence, excess_supply, run_vda, universally_allocated, Solution,
    VdaConfig,
};

/// A pointer-sized witness that a candidate solution is wrong; the ledger
/// checks each kind in constant or linear time.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MisbehaviourProof {
    /// Item `item` is priced below its reservation price.
    WrongPrice { item: u32 },
    /// Bidder `bidder` strictly prefers `alternative` (0 = null item) over
    /// their assigned item at the candidate's prices.
    WrongAssignment { bidder: u32, alternative: u32 },
    /// The declared score differs from the recomputed sum of net
    /// valuations.
    WrongScore,
}

/// Expands the revealed bids into the valuation matrix, rows in reveal
/// order. General bids derive a row from their constraints; specific bids
/// copy their per-item valuations (items are addressed by listing id).
pub fn rebuild_valuations(
    revealed: &[RevealedBid],
    items: &[Item],
) -> Result<ValuationMatrix, MarketError> {
    let mut matrix = ValuationMatrix::new(revealed.len(), items.len());
    for (b, bid) in revealed.iter().enumerate() {
        match &bid.bid {
            Bid::General(g) => {
                let row = derive_valuations(g, items)?;
                for (i, v) in row.into_iter().enumerate() {
                    matrix.set(b, i, v);
                }
            }
            Bid::Specific(s) => {
                for (pos, item) in items.iter().enumerate() {
                    if let Some(v) = s.valuations.get(&item.id) {
                        matrix.set(b, pos + 1, *v);
                    }
                }
            }
        }
    }
    Ok(matrix)
}

/// Checks a candidate and returns the first applicable proof, or `None` for
/// a sound solution. Priority order: prices against reserves, then
/// per-bidder envy (best alternative), then the declared score.
pub fn audit(
    sol: &Solution,
    valuations: &ValuationMatrix,
    items: &[Item],
) -> Option<MisbehaviourProof> {
    let item_count = items.len();
    for (idx, item) in items.iter().enumerate() {
        if sol.prices.get(idx + 1) < item.reservation_price {
            return Some(MisbehaviourProof::WrongPrice {
                item: idx as u32 + 1,
            });
        }
    }
    for b in 0..valuations.bidders() {
        let held = sol.assignment.get(b) as usize;
        let held_net = valuations.get(b, held) as i128 - sol.prices.get(held) as i128;
        let mut best = (held_net, held);
        for j in 0..=item_count {
            let net = valuations.get(b, j) as i128 - sol.prices.get(j) as i128;
            if net > best.0 {
                best = (net, j);
            }
        }
        if best.0 > held_net {
            return Some(MisbehaviourProof::WrongAssignment {
                bidder: b as u32,
                alternative: best.1 as u32,
            });
        }
    }
    if sol.recompute_score(valuations) != sol.score {
        return Some(MisbehaviourProof::WrongScore);
    }
    None
}

/// One clock iteration at the candidate's prices: the solution is the
/// buyer-optimal equilibrium iff nothing is left in excess supply.
pub fn check_vcg(sol: &Solution, valuations: &ValuationMatrix, items: &[Item]) -> bool {
    let demands: Vec<Vec<u32>> = (0..valuations.bidders())
        .map(|b| demand_correspondence(valuations.row(b), &sol.prices).expect("audited dims"))
        .collect();
    let universal = universally_allocated(&sol.prices, &demands, items);
    excess_supply(&sol.prices, &universal, items).is_empty()
}

/// The challenger's move when a candidate is absent or not buyer-optimal:
/// solve from the same revealed data. The result scores at least as high,
/// strictly higher whenever the candidate is not the buyer-optimal
/// equilibrium.
pub fn best_response(
    sol: Option<&Solution>,
    valuations: &ValuationMatrix,
    items: &[Item],
) -> Solution {
    let fresh = run_vda(valuations, items, &VdaConfig::default());
    debug_assert!(sol.is_none_or(|s| {
        !solver::is_equilibrium(s, valuations, items) || fresh.score >= s.score
    }));
    fresh
}
