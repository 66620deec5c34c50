//! Brute-force reference implementations used to test the clock solver.
//!
//! Everything here works from definitions: exhaustive search over feasible
//! allocations and Clarke pivot payments. None of it shares code with the
//! descending-price loop, so agreement between the two is meaningful.

use std::collections::BTreeSet;

use crate::market::{Item, ValuationMatrix};
use crate::solver::{Assignment, PriceVector, Solution, SolverError};

const MAX_BIDDERS: usize = 8;
const MAX_ITEMS: usize = 6;

/// Buyer-optimal (VCG) outcome by exhaustive search.
///
/// Welfare of a bidder subset is the best achievable sum of `max(0, v - r)`
/// over feasible allocations; each winner pays their valuation minus their
/// marginal contribution, and unassigned items sit at reserve.
pub fn vcg_oracle(valuations: &ValuationMatrix, items: &[Item]) -> Result<Solution, SolverError> {
    let bidders = valuations.bidders();
    let item_count = items.len();
    if bidders > MAX_BIDDERS || item_count > MAX_ITEMS {
        return Err(SolverError::TooLarge {
            max_bidders: MAX_BIDDERS,
            max_items: MAX_ITEMS,
        });
    }
    assert_eq!(valuations.items(), item_count, "matrix/items width");

    let all: Vec<usize> = (0..bidders).collect();
    let w_all = best_welfare(valuations, items, &all);
    let efficient = best_allocation(valuations, items, &all, w_all);

    let mut prices = vec![0u64; item_count + 1];
    for (idx, item) in items.iter().enumerate() {
        prices[idx + 1] = item.reservation_price;
    }
    let mut score: i64 = 0;
    for (b, &assigned) in efficient.iter().enumerate() {
        let i = assigned as usize;
        if i == 0 {
            continue;
        }
        let rest: Vec<usize> = (0..bidders).filter(|&x| x != b).collect();
        let w_rest = best_welfare(valuations, items, &rest);
        let marginal = w_all - w_rest;
        prices[i] = (valuations.get(b, i) as i64 - marginal) as u64;
        score += marginal;
    }

    Ok(Solution {
        assignment: Assignment::new(efficient),
        prices: PriceVector::new(prices),
        score,
    })
}

/// Max of `sum max(0, v - r)` over feasible allocations to `subset`,
/// memoized on (position in subset, used-item mask).
fn best_welfare(valuations: &ValuationMatrix, items: &[Item], subset: &[usize]) -> i64 {
    fn rec(
        k: usize,
        mask: usize,
        subset: &[usize],
        valuations: &ValuationMatrix,
        items: &[Item],
        memo: &mut [Option<i64>],
    ) -> i64 {
        if k == subset.len() {
            return 0;
        }
        let key = k * (1 << items.len()) + mask;
        if let Some(v) = memo[key] {
            return v;
        }
        let b = subset[k];
        // Null item.
        let mut best = rec(k + 1, mask, subset, valuations, items, memo);
        for (idx, item) in items.iter().enumerate() {
            if mask & (1 << idx) != 0 {
                continue;
            }
            let gain = (valuations.get(b, idx + 1) as i64 - item.reservation_price as i64).max(0);
            let rest = rec(k + 1, mask | (1 << idx), subset, valuations, items, memo);
            best = best.max(gain + rest);
        }
        memo[key] = Some(best);
        best
    }
    let mut memo = vec![None; subset.len().max(1) << items.len()];
    rec(0, 0, subset, valuations, items, &mut memo)
}

/// One allocation attaining `target` welfare, preferring the null item and
/// then lower item indices; deterministic.
fn best_allocation(
    valuations: &ValuationMatrix,
    items: &[Item],
    subset: &[usize],
    target: i64,
) -> Vec<u32> {
    let bidders = valuations.bidders();
    let mut out = vec![0u32; bidders];
    let mut mask = 0usize;
    let mut remaining = target;
    for k in 0..subset.len() {
        let b = subset[k];
        let tail = &subset[k + 1..];
        // Try null first.
        if best_welfare_masked(valuations, items, tail, mask) == remaining {
            continue;
        }
        let mut placed = false;
        for (idx, item) in items.iter().enumerate() {
            if mask & (1 << idx) != 0 {
                continue;
            }
            let gain = (valuations.get(b, idx + 1) as i64 - item.reservation_price as i64).max(0);
            if gain + best_welfare_masked(valuations, items, tail, mask | (1 << idx)) == remaining {
                out[b] = idx as u32 + 1;
                mask |= 1 << idx;
                remaining -= gain;
                placed = true;
                break;
            }
        }
        assert!(placed, "welfare reconstruction must succeed");
    }
    out
}

fn best_welfare_masked(
    valuations: &ValuationMatrix,
    items: &[Item],
    subset: &[usize],
    mask: usize,
) -> i64 {
    // Re-run the memoized search with some items pre-used.
    fn rec(
        k: usize,
        mask: usize,
        subset: &[usize],
        valuations: &ValuationMatrix,
        items: &[Item],
        memo: &mut [Option<i64>],
    ) -> i64 {
        if k == subset.len() {
            return 0;
        }
        let key = k * (1 << items.len()) + mask;
        if let Some(v) = memo[key] {
            return v;
        }
        let b = subset[k];
        let mut best = rec(k + 1, mask, subset, valuations, items, memo);
        for (idx, item) in items.iter().enumerate() {
            if mask & (1 << idx) != 0 {
                continue;
            }
            let gain = (valuations.get(b, idx + 1) as i64 - item.reservation_price as i64).max(0);
            let rest = rec(k + 1, mask | (1 << idx), subset, valuations, items, memo);
            best = best.max(gain + rest);
        }
        memo[key] = Some(best);
        best
    }
    let mut memo = vec![None; subset.len().max(1) << items.len()];
    rec(0, mask, subset, valuations, items, &mut memo)
}

/// All equilibrium price vectors on the integer grid `{r_i..=p_max}^I`,
/// decided from the definition by enumerating feasible allocations.
///
/// Only intended for tiny instances (the grid is exponential in `I`).
pub fn equilibrium_grid_prices(
    valuations: &ValuationMatrix,
    items: &[Item],
    p_max: u64,
) -> Vec<Vec<u64>> {
    let item_count = items.len();
    let mut current: Vec<u64> = items.iter().map(|it| it.reservation_price).collect();
    let mut found = Vec::new();
    loop {
        let full: Vec<u64> = std::iter::once(0).chain(current.iter().copied()).collect();
        if has_equilibrium_allocation(valuations, items, &full) {
            found.push(full.clone());
        }
        // Odometer increment over the grid.
        let mut pos = 0;
        loop {
            if pos == item_count {
                return found;
            }
            if current[pos] < p_max {
                current[pos] += 1;
                break;
            }
            current[pos] = items[pos].reservation_price;
            pos += 1;
        }
    }
}

/// Whether some feasible allocation makes `prices` an equilibrium price
/// vector: every bidder holds a demanded item (null included) and items left
/// unassigned sit exactly at reserve.
fn has_equilibrium_allocation(
    valuations: &ValuationMatrix,
    items: &[Item],
    prices: &[u64],
) -> bool {
    let bidders = valuations.bidders();
    let item_count = items.len();
    let demands: Vec<BTreeSet<u32>> = (0..bidders)
        .map(|b| {
            let mut best = i128::MIN;
            let mut set = BTreeSet::new();
            for (i, &price) in prices.iter().enumerate() {
                let net = valuations.get(b, i) as i128 - price as i128;
                match net.cmp(&best) {
                    std::cmp::Ordering::Greater => {
                        best = net;
                        set = BTreeSet::from([i as u32]);
                    }
                    std::cmp::Ordering::Equal => {
                        set.insert(i as u32);
                    }
                    std::cmp::Ordering::Less => {}
                }
            }
            set
        })
        .collect();

    fn rec(
        b: usize,
        used: &mut Vec<bool>,
        demands: &[BTreeSet<u32>],
        items: &[Item],
        prices: &[u64],
    ) -> bool {
        if b == demands.len() {
            return used
                .iter()
                .enumerate()
                .skip(1)
                .all(|(i, &u)| u || prices[i] == items[i - 1].reservation_price);
        }
        for &i in &demands[b] {
            let i = i as usize;
            if i == 0 {
                if rec(b + 1, used, demands, items, prices) {
                    return true;
                }
            } else if !used[i] {
                used[i] = true;
                if rec(b + 1, used, demands, items, prices) {
                    return true;
                }
                used[i] = false;
            }
        }
        false
    }
    rec(
        0,
        &mut vec![false; item_count + 1],
        &demands,
        items,
        prices,
    )
}
