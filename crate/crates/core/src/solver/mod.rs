//! Multi-item unit-demand Vickrey-Dutch auction solver.
//!
//! Prices start high and descend on the items in excess supply until every
//! item is universally allocated, at which point the assignment and price
//! vector form the buyer-optimal (VCG) equilibrium. All arithmetic is on
//! integers; the descent step defaults to one currency unit so price
//! differences between bids are never skipped over.

mod matching;
pub mod oracle;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::market::{Item, ValuationMatrix};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SolverError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("instance too large for exhaustive search (bidders <= {max_bidders}, items <= {max_items})")]
    TooLarge {
        max_bidders: usize,
        max_items: usize,
    },
}

/// Per-item prices; index 0 is the null item and always costs zero.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PriceVector(Vec<u64>);

impl PriceVector {
    /// `prices[0]` must be zero.
    pub fn new(prices: Vec<u64>) -> Self {
        assert!(!prices.is_empty() && prices[0] == 0, "null item price");
        PriceVector(prices)
    }

    pub fn from_real(real: Vec<u64>) -> Self {
        let mut p = Vec::with_capacity(real.len() + 1);
        p.push(0);
        p.extend(real);
        PriceVector(p)
    }

    pub fn get(&self, i: usize) -> u64 {
        self.0[i]
    }

    /// Number of real items covered.
    pub fn items(&self) -> usize {
        self.0.len() - 1
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    pub fn real(&self) -> &[u64] {
        &self.0[1..]
    }
}

/// Item held by each bidder; 0 is the null item, which any number of bidders
/// may hold.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment(Vec<u32>);

impl Assignment {
    pub fn new(assigned: Vec<u32>) -> Self {
        Assignment(assigned)
    }

    pub fn get(&self, b: usize) -> u32 {
        self.0[b]
    }

    pub fn bidders(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().copied()
    }

    /// No real item assigned twice and no index beyond `items`.
    pub fn is_feasible(&self, items: usize) -> bool {
        let mut seen = vec![false; items + 1];
        for &i in &self.0 {
            let i = i as usize;
            if i > items {
                return false;
            }
            if i != 0 {
                if seen[i] {
                    return false;
                }
                seen[i] = true;
            }
        }
        true
    }
}

/// A candidate auction outcome: who gets what, at which prices, and the
/// declared social-welfare score.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Solution {
    pub assignment: Assignment,
    pub prices: PriceVector,
    pub score: i64,
}

impl Solution {
    /// Recomputed sum of net valuations, independent of the declared score.
    pub fn recompute_score(&self, valuations: &ValuationMatrix) -> i64 {
        (0..self.assignment.bidders())
            .map(|b| {
                let i = self.assignment.get(b) as usize;
                valuations.get(b, i) as i64 - self.prices.get(i) as i64
            })
            .sum()
    }
}

/// Rule for the initial high price.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PMaxPolicy {
    /// The largest valuation anywhere in the matrix: at this price no real
    /// item has positive net valuation, so the clock starts with every item
    /// in excess supply.
    MaxValuation,
    Fixed(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VdaConfig {
    /// Price decrement per iteration, at least 1.
    pub delta_p: u64,
    pub p_max_policy: PMaxPolicy,
}

impl Default for VdaConfig {
    fn default() -> Self {
        VdaConfig {
            delta_p: 1,
            p_max_policy: PMaxPolicy::MaxValuation,
        }
    }
}

/// Demand correspondence of one bidder: the items (null included) whose net
/// valuation `v - p` is maximal. Never empty.
pub fn demand_correspondence(row: &[u64], prices: &PriceVector) -> Result<Vec<u32>, SolverError> {
    if row.len() != prices.as_slice().len() {
        return Err(SolverError::DimensionMismatch(format!(
            "valuation row has {} entries, price vector {}",
            row.len(),
            prices.as_slice().len()
        )));
    }
    let mut best = i128::MIN;
    let mut out = Vec::new();
    for (i, (&v, &p)) in row.iter().zip(prices.as_slice()).enumerate() {
        let net = v as i128 - p as i128;
        if net > best {
            best = net;
            out.clear();
            out.push(i as u32);
        } else if net == best {
            out.push(i as u32);
        }
    }
    Ok(out)
}

/// Maximum-cardinality matching of bidders to demanded real items; bidders
/// left unmatched hold the null item.
pub fn provisional_assignment(demands: &[Vec<u32>], item_count: usize) -> Assignment {
    Assignment(matching::match_demands(demands, item_count))
}

/// The universally allocated items at `prices`: items priced at reserve,
/// plus the above-reserve items that genuinely cannot descend any further.
///
/// The latter are found on the demand graph restricted to above-reserve
/// items: take a maximum matching there, then walk alternating paths
/// starting from bidders that graph leaves unmatched (their pressure is what
/// pins prices: lowering an item they demand would create overdemand, and so
/// would lowering the alternatives of that item's holder, transitively). The
/// complement within the above-reserve items is the maximal set that can be
/// decremented together, the excess supply.
pub fn universally_allocated(
    prices: &PriceVector,
    demands: &[Vec<u32>],
    items: &[Item],
) -> BTreeSet<u32> {
    let mut universal = vec![false; items.len() + 1];
    closure(prices, demands, items, &mut universal, &mut Vec::new());
    (1..=items.len() as u32)
        .filter(|&i| universal[i as usize])
        .collect()
}

/// Computes the universal set into `universal` (length `items.len() + 1`).
/// `scratch` holds the filtered per-bidder demand lists between iterations.
fn closure(
    prices: &PriceVector,
    demands: &[Vec<u32>],
    items: &[Item],
    universal: &mut [bool],
    scratch: &mut Vec<Vec<u32>>,
) {
    universal.iter_mut().for_each(|u| *u = false);
    let above_reserve = |i: u32| prices.get(i as usize) > items[i as usize - 1].reservation_price;

    // Demand edges restricted to above-reserve items.
    scratch.resize(demands.len(), Vec::new());
    for (b, d) in demands.iter().enumerate() {
        scratch[b].clear();
        scratch[b].extend(d.iter().copied().filter(|&i| i != 0 && above_reserve(i)));
    }
    let restricted = matching::match_demands(scratch, items.len());

    let mut holder = vec![None; items.len() + 1];
    for (b, &i) in restricted.iter().enumerate() {
        if i != 0 {
            holder[i as usize] = Some(b);
        }
    }

    // Alternating reachability from bidders the restricted matching exposes.
    let mut queue: Vec<u32> = Vec::new();
    let push = |i: u32, universal: &mut [bool], queue: &mut Vec<u32>| {
        if !universal[i as usize] {
            universal[i as usize] = true;
            queue.push(i);
        }
    };
    for (b, list) in scratch.iter().enumerate() {
        if restricted[b] == 0 {
            for &i in list {
                push(i, universal, &mut queue);
            }
        }
    }
    while let Some(i) = queue.pop() {
        if let Some(b) = holder[i as usize] {
            for &j in &scratch[b] {
                push(j, universal, &mut queue);
            }
        }
    }

    for (idx, item) in items.iter().enumerate() {
        if prices.get(idx + 1) == item.reservation_price {
            universal[idx + 1] = true;
        }
    }
}

/// Items above reserve that are not universally allocated; the complement of
/// the universal set within the items still priced above reserve.
pub fn excess_supply(
    prices: &PriceVector,
    universally: &BTreeSet<u32>,
    items: &[Item],
) -> BTreeSet<u32> {
    items
        .iter()
        .enumerate()
        .map(|(idx, item)| (idx as u32 + 1, item))
        .filter(|(i, item)| {
            prices.get(*i as usize) > item.reservation_price && !universally.contains(i)
        })
        .map(|(i, _)| i)
        .collect()
}

/// Runs the descending-price clock to the buyer-optimal equilibrium.
///
/// Item `i` starts at `max(p_max, r_i)` and descends by `delta_p` while in
/// excess supply, clamping at its reservation price. Terminates once every
/// item is universally allocated; at unit granularity (`delta_p = 1`, which
/// resolves every integer valuation difference) the assignment is then an
/// equilibrium and the price vector is the componentwise-minimal one
/// supporting it. Coarser decrements still terminate but may step past the
/// exact clearing prices.
pub fn run_vda(valuations: &ValuationMatrix, items: &[Item], cfg: &VdaConfig) -> Solution {
    assert!(cfg.delta_p >= 1, "delta_p must be positive");
    assert_eq!(valuations.items(), items.len(), "matrix/items width");
    let bidders = valuations.bidders();
    let item_count = items.len();

    let p_max = match cfg.p_max_policy {
        PMaxPolicy::MaxValuation => valuations.max_value(),
        PMaxPolicy::Fixed(p) => p,
    };
    let mut prices: Vec<u64> = std::iter::once(0)
        .chain(items.iter().map(|it| p_max.max(it.reservation_price)))
        .collect();

    let mut demands: Vec<Vec<u32>> = vec![Vec::new(); bidders];
    let mut universal = vec![false; item_count + 1];
    let mut scratch: Vec<Vec<u32>> = Vec::new();

    // Every round except the last decrements at least one price, and item i
    // can only be decremented ceil((start_i - r_i) / delta_p) times, so the
    // total decrement budget bounds the round count. A pinned item resumes
    // descending once the pressure on it moves elsewhere, so rounds are not
    // bounded by any single item's distance to reserve.
    let mut rounds: u64 = 0;
    let round_bound = 1 + items
        .iter()
        .enumerate()
        .map(|(idx, item)| (prices[idx + 1] - item.reservation_price).div_ceil(cfg.delta_p))
        .sum::<u64>();

    loop {
        rounds += 1;
        debug_assert!(rounds <= round_bound, "clock exceeded its round bound");
        let pv = PriceVector(prices);
        for (b, demand) in demands.iter_mut().enumerate() {
            *demand = demand_correspondence(valuations.row(b), &pv).expect("dims checked");
        }
        closure(&pv, &demands, items, &mut universal, &mut scratch);

        let all_universal = (1..=item_count).all(|i| universal[i]);
        if all_universal {
            let above_reserve: Vec<bool> = std::iter::once(false)
                .chain(
                    items
                        .iter()
                        .enumerate()
                        .map(|(idx, it)| pv.get(idx + 1) > it.reservation_price),
                )
                .collect();
            let assignment = Assignment(matching::equilibrium_match(
                &demands,
                &above_reserve,
                item_count,
            ));
            let score = (0..bidders)
                .map(|b| {
                    let i = assignment.get(b) as usize;
                    valuations.get(b, i) as i64 - pv.get(i) as i64
                })
                .sum();
            // A coarser decrement can step over the exact tie points, so
            // the equilibrium guarantee only holds at unit granularity.
            debug_assert!(
                cfg.delta_p > 1
                    || is_equilibrium(
                        &Solution {
                            assignment: assignment.clone(),
                            prices: pv.clone(),
                            score
                        },
                        valuations,
                        items
                    )
            );
            return Solution {
                assignment,
                prices: pv,
                score,
            };
        }

        prices = pv.0;
        for (idx, item) in items.iter().enumerate() {
            let i = idx + 1;
            if !universal[i] && prices[i] > item.reservation_price {
                prices[i] = prices[i]
                    .saturating_sub(cfg.delta_p)
                    .max(item.reservation_price);
            }
        }
    }
}

/// Equilibrium check: feasible assignment, every bidder holds a demanded
/// item, no price below reserve, and unassigned items sit exactly at reserve.
pub fn is_equilibrium(sol: &Solution, valuations: &ValuationMatrix, items: &[Item]) -> bool {
    let item_count = items.len();
    if sol.assignment.bidders() != valuations.bidders()
        || sol.prices.items() != item_count
        || valuations.items() != item_count
    {
        return false;
    }
    if !sol.assignment.is_feasible(item_count) {
        return false;
    }
    for (idx, item) in items.iter().enumerate() {
        if sol.prices.get(idx + 1) < item.reservation_price {
            return false;
        }
    }
    let mut assigned = vec![false; item_count + 1];
    for b in 0..sol.assignment.bidders() {
        let x = sol.assignment.get(b) as usize;
        assigned[x] = true;
        let net = valuations.get(b, x) as i128 - sol.prices.get(x) as i128;
        let best = (0..=item_count)
            .map(|j| valuations.get(b, j) as i128 - sol.prices.get(j) as i128)
            .max()
            .unwrap();
        if net < best {
            return false;
        }
    }
    for (idx, item) in items.iter().enumerate() {
        if !assigned[idx + 1] && sol.prices.get(idx + 1) != item.reservation_price {
            return false;
        }
    }
    true
}
