//! Maximum-cardinality bipartite matching between bidders and the real items
//! in their demand sets (Kuhn's augmenting-path algorithm).
//!
//! Bidders whose demand set excludes the null item are matched first: they
//! must hold a real item in any equilibrium, and an augmenting pass started
//! from them never unmatches an already-matched bidder. Within each pass,
//! bidders are processed in ascending index order and items are tried in
//! ascending index order, so the matching is deterministic.

/// `demands[b]` lists the demanded item indices of bidder `b` in ascending
/// order; index 0 is the null item. Returns `x` with `x[b]` the matched real
/// item or 0.
pub fn match_demands(demands: &[Vec<u32>], item_count: usize) -> Vec<u32> {
    let bidders = demands.len();
    let mut owner: Vec<Option<usize>> = vec![None; item_count + 1];
    let mut visited: Vec<u32> = vec![0; item_count + 1];
    let mut stamp: u32 = 0;

    let strict_first = (0..bidders)
        .filter(|&b| !demands[b].first().is_some_and(|&i| i == 0))
        .chain((0..bidders).filter(|&b| demands[b].first().is_some_and(|&i| i == 0)));

    for b in strict_first {
        stamp += 1;
        augment(b, demands, &mut owner, &mut visited, stamp);
    }

    let mut assigned = vec![0u32; bidders];
    for (item, owner) in owner.iter().enumerate() {
        if let Some(b) = owner {
            assigned[*b] = item as u32;
        }
    }
    assigned
}

fn augment(
    b: usize,
    demands: &[Vec<u32>],
    owner: &mut Vec<Option<usize>>,
    visited: &mut Vec<u32>,
    stamp: u32,
) -> bool {
    for &item in &demands[b] {
        if item == 0 {
            continue;
        }
        let i = item as usize;
        if visited[i] == stamp {
            continue;
        }
        visited[i] = stamp;
        if owner[i].is_none() || augment(owner[i].unwrap(), demands, owner, visited, stamp) {
            owner[i] = Some(b);
            return true;
        }
    }
    false
}

/// Assignment selection for a terminal price vector: covers every item in
/// `above_reserve` and satisfies every strict demander, assuming prices
/// support an equilibrium.
///
/// Three passes: a matching restricted to above-reserve items (these must
/// all end up held), then strict demanders, which may displace a holder that
/// is indifferent to the null item, then everyone else.
pub fn equilibrium_match(
    demands: &[Vec<u32>],
    above_reserve: &[bool],
    item_count: usize,
) -> Vec<u32> {
    let bidders = demands.len();
    let indifferent: Vec<bool> = demands
        .iter()
        .map(|d| d.first().is_some_and(|&i| i == 0))
        .collect();
    let mut owner: Vec<Option<usize>> = vec![None; item_count + 1];
    let mut visited: Vec<u32> = vec![0; item_count + 1];
    let mut stamp: u32 = 0;

    // Pass 1: cover the above-reserve items.
    let restricted: Vec<Vec<u32>> = demands
        .iter()
        .map(|d| {
            d.iter()
                .copied()
                .filter(|&i| i != 0 && above_reserve[i as usize])
                .collect()
        })
        .collect();
    for b in 0..bidders {
        stamp += 1;
        augment(b, &restricted, &mut owner, &mut visited, stamp);
    }

    // Pass 2: seat the strict demanders; they may displace indifferent
    // holders, which keeps every seated item seated.
    for b in (0..bidders).filter(|&b| !indifferent[b]) {
        if owner.contains(&Some(b)) {
            continue;
        }
        stamp += 1;
        displace_augment(b, demands, &indifferent, &mut owner, &mut visited, stamp);
    }

    // Pass 3: plain augmentation for the rest.
    let matched: Vec<bool> = {
        let mut m = vec![false; bidders];
        for o in owner.iter().flatten() {
            m[*o] = true;
        }
        m
    };
    for b in (0..bidders).filter(|&b| indifferent[b] && !matched[b]) {
        stamp += 1;
        augment(b, demands, &mut owner, &mut visited, stamp);
    }

    let mut assigned = vec![0u32; bidders];
    for (item, o) in owner.iter().enumerate() {
        if let Some(b) = o {
            assigned[*b] = item as u32;
        }
    }
    assigned
}

fn displace_augment(
    b: usize,
    demands: &[Vec<u32>],
    indifferent: &[bool],
    owner: &mut Vec<Option<usize>>,
    visited: &mut Vec<u32>,
    stamp: u32,
) -> bool {
    for &item in &demands[b] {
        if item == 0 {
            continue;
        }
        let i = item as usize;
        if visited[i] == stamp {
            continue;
        }
        visited[i] = stamp;
        let take = match owner[i] {
            None => true,
            Some(h) => {
                displace_augment(h, demands, indifferent, owner, visited, stamp)
                    || indifferent[h]
            }
        };
        if take {
            owner[i] = Some(b);
            return true;
        }
    }
    false
}
