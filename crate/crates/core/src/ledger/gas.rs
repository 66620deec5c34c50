//! Gas accounting: a per-address meter with configurable per-operation
//! costs. Gas is bookkeeping only; it is never deducted from balances. The
//! configured gas price converts metered gas into currency when sizing the
//! solver's collateral.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Meterable ledger operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GasOp {
    Deploy,
    SubmitItem,
    Commit,
    Reveal,
    RevealMinPrice,
    SubmitSolution,
    WrongAssignment,
    WrongPrice,
    WrongScore,
}

/// Per-operation gas costs. Operations with a dynamic part charge
/// `base + per_unit * n` where `n` is the item or bidder count.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct GasTable {
    /// Contract deployment; illustrative default, not a measured figure.
    pub deploy: u64,
    pub submit_item: u64,
    pub commit: u64,
    pub reveal: u64,
    pub reveal_min_price: u64,
    pub submit_solution_base: u64,
    pub submit_solution_per_item: u64,
    pub wrong_assignment: u64,
    pub wrong_price: u64,
    pub wrong_score_base: u64,
    pub wrong_score_per_bidder: u64,
    /// Currency units per unit of gas.
    pub gas_price: u64,
}

impl Default for GasTable {
    fn default() -> Self {
        GasTable {
            deploy: 1_000_000,
            submit_item: 43_556,
            commit: 26_590,
            reveal: 364_456,
            reveal_min_price: 52_378,
            submit_solution_base: 5_068,
            submit_solution_per_item: 408,
            wrong_assignment: 45_572,
            wrong_price: 35_714,
            wrong_score_base: 18_048,
            wrong_score_per_bidder: 6_494,
            gas_price: 1,
        }
    }
}

impl GasTable {
    pub fn submit_solution(&self, items: usize) -> u64 {
        self.submit_solution_base + self.submit_solution_per_item * items as u64
    }

    pub fn wrong_score(&self, bidders: usize) -> u64 {
        self.wrong_score_base + self.wrong_score_per_bidder * bidders as u64
    }

    /// Smallest collateral accepted with a solution: one currency unit more
    /// than the priciest misbehaviour check it may have to fund.
    pub fn min_collateral(&self, bidders: usize, _items: usize) -> u64 {
        let worst = self
            .wrong_assignment
            .max(self.wrong_price)
            .max(self.wrong_score(bidders));
        worst * self.gas_price + 1
    }
}

/// Gas consumed so far, per address and per operation.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GasMeter {
    by_address: BTreeMap<String, u64>,
    by_op: BTreeMap<GasOp, u64>,
    total: u64,
}

impl GasMeter {
    pub fn charge(&mut self, address: &str, op: GasOp, amount: u64) {
        *self.by_address.entry(address.to_string()).or_default() += amount;
        *self.by_op.entry(op).or_default() += amount;
        self.total += amount;
    }

    pub fn of_address(&self, address: &str) -> u64 {
        self.by_address.get(address).copied().unwrap_or(0)
    }

    pub fn of_op(&self, op: GasOp) -> u64 {
        self.by_op.get(&op).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn per_op(&self) -> impl Iterator<Item = (GasOp, u64)> + '_ {
        self.by_op.iter().map(|(op, g)| (*op, *g))
    }

    pub fn per_address(&self) -> impl Iterator<Item = (&str, u64)> + '_ {
        self.by_address.iter().map(|(a, g)| (a.as_str(), *g))
    }
}
