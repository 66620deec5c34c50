//! Items, bids, valuation derivation and the sellers' minimum-price
//! commitment scheme.
//!
//! Money is integer minimal currency units throughout. Deposits (and general
//! bid budgets) are restricted to a configured set of cash denominations so
//! that deposit amounts leak as little as possible.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MarketError {
    #[error("constraint vector has {constraints} entries but items carry {characteristics} characteristics")]
    DimensionMismatch {
        constraints: usize,
        characteristics: usize,
    },
    #[error("malformed bid: {0}")]
    MalformedBid(String),
}

/// An item on offer: its public characteristics and the seller's reservation
/// price (hidden behind [`Commitment`] until the reveal phase).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Item {
    /// Ledger listing id, 1-based. Solver operations address items by
    /// position; the id is carried for reporting.
    pub id: u32,
    pub characteristics: Vec<u64>,
    pub reservation_price: u64,
}

impl Item {
    pub fn new(id: u32, characteristics: Vec<u64>, reservation_price: u64) -> Self {
        Item {
            id,
            characteristics,
            reservation_price,
        }
    }
}

/// Interest in any item meeting per-characteristic lower bounds, paying up
/// to one budget.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneralBid {
    /// "At least" thresholds, one per characteristic.
    pub constraints: Vec<u64>,
    pub budget: u64,
}

/// Explicit per-item valuations, keyed by item id.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecificBid {
    pub valuations: BTreeMap<u32, u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Bid {
    General(GeneralBid),
    Specific(SpecificBid),
}

impl Bid {
    /// Largest amount the bid can commit the bidder to pay.
    pub fn max_liability(&self) -> u64 {
        match self {
            Bid::General(g) => g.budget,
            Bid::Specific(s) => s.valuations.values().copied().max().unwrap_or(0),
        }
    }

    /// Wire encoding used inside the signed reveal message.
    ///
    /// Tag byte, then big-endian fixed-width fields:
    /// general: `0x01 | u16 C | C x u64 constraints | u64 budget`;
    /// specific: `0x02 | u16 count | count x (u32 item_id, u64 valuation)`.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        match self {
            Bid::General(g) => {
                out.push(0x01);
                out.extend_from_slice(&(g.constraints.len() as u16).to_be_bytes());
                for c in &g.constraints {
                    out.extend_from_slice(&c.to_be_bytes());
                }
                out.extend_from_slice(&g.budget.to_be_bytes());
            }
            Bid::Specific(s) => {
                out.push(0x02);
                out.extend_from_slice(&(s.valuations.len() as u16).to_be_bytes());
                for (id, v) in &s.valuations {
                    out.extend_from_slice(&id.to_be_bytes());
                    out.extend_from_slice(&v.to_be_bytes());
                }
            }
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, MarketError> {
        let err = |m: &str| MarketError::MalformedBid(m.to_string());
        let tag = *bytes.first().ok_or_else(|| err("empty payload"))?;
        let body = &bytes[1..];
        let take_u16 = |b: &[u8]| -> Result<u16, MarketError> {
            Ok(u16::from_be_bytes(
                b.get(..2).ok_or_else(|| err("truncated"))?.try_into().unwrap(),
            ))
        };
        match tag {
            0x01 => {
                let c = take_u16(body)? as usize;
                let need = 2 + c * 8 + 8;
                if body.len() != need {
                    return Err(err("general bid length mismatch"));
                }
                let mut constraints = Vec::with_capacity(c);
                for k in 0..c {
                    let off = 2 + k * 8;
                    constraints.push(u64::from_be_bytes(body[off..off + 8].try_into().unwrap()));
                }
                let budget = u64::from_be_bytes(body[2 + c * 8..].try_into().unwrap());
                Ok(Bid::General(GeneralBid {
                    constraints,
                    budget,
                }))
            }
            0x02 => {
                let c = take_u16(body)? as usize;
                if body.len() != 2 + c * 12 {
                    return Err(err("specific bid length mismatch"));
                }
                let mut valuations = BTreeMap::new();
                for k in 0..c {
                    let off = 2 + k * 12;
                    let id = u32::from_be_bytes(body[off..off + 4].try_into().unwrap());
                    let v = u64::from_be_bytes(body[off + 4..off + 12].try_into().unwrap());
                    if valuations.insert(id, v).is_some() {
                        return Err(err("duplicate item id in specific bid"));
                    }
                }
                Ok(Bid::Specific(SpecificBid { valuations }))
            }
            _ => Err(err("unknown bid tag")),
        }
    }
}

/// Per-bidder, per-item valuations. Column 0 is the null item and is always
/// zero. Real items occupy columns `1..=items`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValuationMatrix {
    bidders: usize,
    items: usize,
    values: Vec<u64>,
}

impl ValuationMatrix {
    pub fn new(bidders: usize, items: usize) -> Self {
        ValuationMatrix {
            bidders,
            items,
            values: vec![0; bidders * (items + 1)],
        }
    }

    /// Builds from rows that already include the null column.
    pub fn from_rows(items: usize, rows: Vec<Vec<u64>>) -> Self {
        let mut m = ValuationMatrix::new(rows.len(), items);
        for (b, row) in rows.into_iter().enumerate() {
            assert_eq!(row.len(), items + 1, "row width");
            assert_eq!(row[0], 0, "null item valuation");
            for (i, v) in row.into_iter().enumerate() {
                m.set(b, i, v);
            }
        }
        m
    }

    /// Builds from rows over real items only (null column implied).
    pub fn from_real_rows(items: usize, rows: Vec<Vec<u64>>) -> Self {
        let mut m = ValuationMatrix::new(rows.len(), items);
        for (b, row) in rows.into_iter().enumerate() {
            assert_eq!(row.len(), items, "row width");
            for (i, v) in row.into_iter().enumerate() {
                m.set(b, i + 1, v);
            }
        }
        m
    }

    pub fn bidders(&self) -> usize {
        self.bidders
    }

    pub fn items(&self) -> usize {
        self.items
    }

    /// Valuation of bidder `b` for item `i` (0 = null item).
    pub fn get(&self, b: usize, i: usize) -> u64 {
        self.values[b * (self.items + 1) + i]
    }

    pub fn set(&mut self, b: usize, i: usize, v: u64) {
        if i == 0 {
            assert_eq!(v, 0, "null item valuation is fixed at zero");
        }
        self.values[b * (self.items + 1) + i] = v;
    }

    pub fn row(&self, b: usize) -> &[u64] {
        let w = self.items + 1;
        &self.values[b * w..(b + 1) * w]
    }

    pub fn max_value(&self) -> u64 {
        self.values.iter().copied().max().unwrap_or(0)
    }
}

/// Expands a general bid into a valuation row (including the null column):
/// the full budget for every item meeting all constraints, zero otherwise.
pub fn derive_valuations(bid: &GeneralBid, items: &[Item]) -> Result<Vec<u64>, MarketError> {
    let mut row = Vec::with_capacity(items.len() + 1);
    row.push(0);
    for item in items {
        if item.characteristics.len() != bid.constraints.len() {
            return Err(MarketError::DimensionMismatch {
                constraints: bid.constraints.len(),
                characteristics: item.characteristics.len(),
            });
        }
        let satisfied = item
            .characteristics
            .iter()
            .zip(&bid.constraints)
            .all(|(have, need)| have >= need);
        row.push(if satisfied { bid.budget } else { 0 });
    }
    Ok(row)
}

/// 256-bit minimum-price commitment digest.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Commitment(pub [u8; 32]);

impl std::fmt::Debug for Commitment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Commitment({})", hex::encode(self.0))
    }
}

/// SHA-256 over a length-prefixed (salt, price) encoding.
pub fn commit_min_price(reservation_price: u64, salt: &[u8; 32]) -> Commitment {
    let mut hasher = Sha256::new();
    hasher.update(b"sealbid/min-price/v1");
    hasher.update((salt.len() as u32).to_be_bytes());
    hasher.update(salt);
    hasher.update(8u32.to_be_bytes());
    hasher.update(reservation_price.to_be_bytes());
    Commitment(hasher.finalize().into())
}

/// True iff the digest recomputes from the claimed opening.
pub fn open_min_price(commitment: &Commitment, reservation_price: u64, salt: &[u8; 32]) -> bool {
    commit_min_price(reservation_price, salt) == *commitment
}

/// The set of deposit values bidders may use.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DenominationSet {
    values: BTreeSet<u64>,
}

impl DenominationSet {
    /// {1, 2, 5} times powers of ten, up to 10^12.
    pub fn standard() -> Self {
        let mut values = BTreeSet::new();
        let mut base: u64 = 1;
        while base <= 1_000_000_000_000 {
            for m in [1u64, 2, 5] {
                values.insert(base * m);
            }
            base *= 10;
        }
        DenominationSet { values }
    }

    pub fn from_values(values: impl IntoIterator<Item = u64>) -> Self {
        DenominationSet {
            values: values.into_iter().filter(|v| *v > 0).collect(),
        }
    }

    pub fn contains(&self, v: u64) -> bool {
        self.values.contains(&v)
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.values.iter().copied()
    }

    /// Smallest denomination >= `v`, or the largest one if `v` exceeds all.
    pub fn round_up(&self, v: u64) -> u64 {
        self.values
            .range(v..)
            .next()
            .or_else(|| self.values.iter().next_back())
            .copied()
            .unwrap_or(0)
    }
}

impl Default for DenominationSet {
    fn default() -> Self {
        Self::standard()
    }
}
