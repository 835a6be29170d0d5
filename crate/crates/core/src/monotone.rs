//! Enumeration of all increasing events on {0,1}^n.

use crate::cube::Event;
use crate::error::Result;
use crate::limits::{check_cap, limits};

/// Every increasing event on {0,1}^n exactly once, including ∅ and Ω,
/// sorted by membership bitmap.
///
/// The count is the Dedekind number M(n): 2, 3, 6, 20, 168, 7581 for n = 0..=5.
pub fn enumerate_monotone_events(n: usize) -> Result<Vec<Event>> {
    check_cap("monotone enumeration", n, limits().monotone_max_n)?;
    let words = if n <= 3 { filter_all_subsets(n) } else { extend_by_levels(n) };
    words.into_iter().map(|w| build(n, &w)).collect()
}

fn build(n: usize, words: &[u64]) -> Result<Event> {
    let mut e = Event::empty(n)?;
    for (wi, &w) in words.iter().enumerate() {
        let mut w = w;
        while w != 0 {
            let t = w.trailing_zeros() as u64;
            w &= w - 1;
            e.insert_bits(((wi as u64) << 6) | t);
        }
    }
    Ok(e)
}

fn filter_all_subsets(n: usize) -> Vec<Vec<u64>> {
    let size = 1usize << n;
    let count = 1u64 << size;
    (0..count)
        .filter(|&w| is_increasing_word(n, w))
        .map(|w| vec![w])
        .collect()
}

fn is_increasing_word(n: usize, w: u64) -> bool {
    (0..(1u64 << n)).all(|p| w >> p & 1 == 0 || (0..n).all(|i| w >> (p | 1 << i) & 1 == 1))
}

/// Decides membership one configuration at a time in order of weight. A
/// configuration with a member among its lower covers is forced in; any
/// other configuration branches on in/out.
fn extend_by_levels(n: usize) -> Vec<Vec<u64>> {
    let size = 1usize << n;
    let mut order: Vec<u64> = (0..size as u64).collect();
    order.sort_by_key(|&p| (p.count_ones(), p));
    let mut member = vec![false; size];
    let mut out = Vec::new();
    descend(n, &order, 0, &mut member, &mut out);
    out.sort();
    out
}

fn descend(n: usize, order: &[u64], t: usize, member: &mut [bool], out: &mut Vec<Vec<u64>>) {
    if t == order.len() {
        let mut words = vec![0u64; (member.len() + 63) / 64];
        for (p, &m) in member.iter().enumerate() {
            if m {
                words[p >> 6] |= 1 << (p & 63);
            }
        }
        out.push(words);
        return;
    }
    let p = order[t];
    let forced = (0..n).any(|i| p >> i & 1 == 1 && member[(p & !(1 << i)) as usize]);
    if forced {
        member[p as usize] = true;
        descend(n, order, t + 1, member, out);
        member[p as usize] = false;
    } else {
        descend(n, order, t + 1, member, out);
        member[p as usize] = true;
        descend(n, order, t + 1, member, out);
        member[p as usize] = false;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn small_counts() {
        assert_eq!(enumerate_monotone_events(0).unwrap().len(), 2);
        assert_eq!(enumerate_monotone_events(1).unwrap().len(), 3);
        assert_eq!(enumerate_monotone_events(2).unwrap().len(), 6);
        assert_eq!(enumerate_monotone_events(3).unwrap().len(), 20);
    }

    #[test]
    fn level_extension_matches_filter_for_small_n() {
        for n in 0..=3 {
            assert_eq!(extend_by_levels(n), filter_all_subsets(n), "n = {n}");
        }
    }

    #[test]
    fn n4_events_are_distinct_and_increasing() {
        let events = enumerate_monotone_events(4).unwrap();
        assert_eq!(events.len(), 168);
        let distinct: HashSet<&Event> = events.iter().collect();
        assert_eq!(distinct.len(), 168);
        assert!(events.iter().all(|e| e.is_increasing()));
        assert!(events.iter().any(|e| e.is_empty()));
        assert!(events.iter().any(|e| e.is_full()));
    }

    #[test]
    fn cap_is_enforced() {
        assert!(enumerate_monotone_events(6).is_err());
    }
}
