//! Disjoint occurrence `A □ B`.
//!
//! `box_general` works for arbitrary events through per-configuration
//! minimal witness sets; `box_increasing` uses minimal elements and is the
//! path the sweeps take for increasing events.

use std::sync::OnceLock;

use crate::cube::{Config, Event, IndexSet};
use crate::error::{Error, Result};
use crate::limits::{check_cap, limits, GENERAL_HARD_MAX_N};

/// Disjoint index sets `K`, `L` certifying `ω ∈ A □ B`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoxWitness {
    pub k: IndexSet,
    pub l: IndexSet,
}

/// For each configuration ω, the inclusion-minimal `K` with `[ω]_K ⊆ A`.
#[derive(Debug, Clone)]
pub struct WitnessTable {
    offsets: Vec<u32>,
    sets: Vec<u64>,
}

impl WitnessTable {
    pub fn minimal_sets(&self, omega: u64) -> &[u64] {
        let o = omega as usize;
        &self.sets[self.offsets[o] as usize..self.offsets[o + 1] as usize]
    }
}

struct CubeTables {
    /// `cyl[ω << n | K]`: membership word of the cylinder `[ω]_K`.
    cyl: Vec<u64>,
    /// All index masks ordered by cardinality, then value.
    by_size: Vec<u64>,
}

fn cube_tables(n: usize) -> &'static CubeTables {
    static TABLES: [OnceLock<CubeTables>; GENERAL_HARD_MAX_N + 1] = [
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
    ];
    TABLES[n].get_or_init(|| {
        let size = 1u64 << n;
        let mut cyl = vec![0u64; (size * size) as usize];
        for omega in 0..size {
            for k in 0..size {
                let mut w = 0u64;
                for alpha in 0..size {
                    if (alpha ^ omega) & k == 0 {
                        w |= 1 << alpha;
                    }
                }
                cyl[((omega << n) | k) as usize] = w;
            }
        }
        let mut by_size: Vec<u64> = (0..size).collect();
        by_size.sort_by_key(|&k| (k.count_ones(), k));
        CubeTables { cyl, by_size }
    })
}

fn check_general(a: &Event, b: &Event) -> Result<()> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch { expected: a.n(), found: b.n() });
    }
    check_cap("general disjoint occurrence", a.n(), limits().general_max_n)
}

/// Minimal witness sets of every configuration, computed once per event.
///
/// `K` is scanned by increasing cardinality and supersets of already found
/// witnesses are skipped, so every recorded set is minimal.
pub fn witness_table(a: &Event) -> Result<&WitnessTable> {
    check_cap("witness table", a.n(), GENERAL_HARD_MAX_N)?;
    Ok(a.witnesses.get_or_init(|| {
        let n = a.n();
        let size = 1u64 << n;
        let tables = cube_tables(n);
        let word = a.word().expect("n <= 6");
        let mut offsets = Vec::with_capacity(size as usize + 1);
        let mut sets = Vec::new();
        offsets.push(0u32);
        for omega in 0..size {
            let start = sets.len();
            if word >> omega & 1 == 1 {
                for &k in &tables.by_size {
                    if sets[start..].iter().any(|&found| found & !k == 0) {
                        continue;
                    }
                    if tables.cyl[((omega << n) | k) as usize] & !word == 0 {
                        sets.push(k);
                    }
                }
            }
            offsets.push(sets.len() as u32);
        }
        WitnessTable { offsets, sets }
    }))
}

/// `A □ B` for arbitrary events, `n <=` the general cap.
pub fn box_general(a: &Event, b: &Event) -> Result<Event> {
    Ok(box_general_impl(a, b, false)?.0)
}

/// As [`box_general`], also returning one witness per member.
pub fn box_general_with_witnesses(a: &Event, b: &Event) -> Result<(Event, Vec<(Config, BoxWitness)>)> {
    box_general_impl(a, b, true)
}

fn box_general_impl(a: &Event, b: &Event, record: bool) -> Result<(Event, Vec<(Config, BoxWitness)>)> {
    check_general(a, b)?;
    let n = a.n();
    let wa = witness_table(a)?;
    let wb = witness_table(b)?;
    let both = a.word().expect("n <= 6") & b.word().expect("n <= 6");
    let mut out = 0u64;
    let mut witnesses = Vec::new();
    let mut rest = both;
    while rest != 0 {
        let omega = rest.trailing_zeros() as u64;
        rest &= rest - 1;
        let found = wa
            .minimal_sets(omega)
            .iter()
            .find_map(|&k| wb.minimal_sets(omega).iter().find(|&&l| k & l == 0).map(|&l| (k, l)));
        if let Some((k, l)) = found {
            out |= 1 << omega;
            if record {
                witnesses.push((
                    Config::raw(n, omega),
                    BoxWitness { k: IndexSet::raw(n, k), l: IndexSet::raw(n, l) },
                ));
            }
        }
    }
    Ok((Event::from_word(n, out)?, witnesses))
}

/// `A □ B` for increasing events: `ω` qualifies iff its support contains
/// the disjoint supports of some minimal `a ∈ A` and minimal `b ∈ B`.
pub fn box_increasing(a: &Event, b: &Event) -> Result<Event> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch { expected: a.n(), found: b.n() });
    }
    let min_a = a.minimal_elements()?;
    let min_b = b.minimal_elements()?;
    let mut out = Event::empty(a.n())?;
    for x in min_a {
        for y in min_b {
            if x.bits() & y.bits() == 0 {
                out.insert_bits(x.bits() | y.bits());
            }
        }
    }
    out.close_upward();
    Ok(out)
}

/// Dispatches to [`box_increasing`] when both events are increasing.
pub fn disjoint_occurrence(a: &Event, b: &Event) -> Result<Event> {
    if a.is_increasing() && b.is_increasing() {
        box_increasing(a, b)
    } else {
        box_general(a, b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monotone::enumerate_monotone_events;

    fn ev(n: usize, members: &[&str]) -> Event {
        Event::from_bitstrings(n, members).unwrap()
    }

    /// The unpruned definition: every ω, every K, every L.
    fn naive_box(a: &Event, b: &Event) -> Event {
        let n = a.n();
        let size = 1u64 << n;
        let fits = |e: &Event, omega: u64, k: u64| (0..size).all(|alpha| (alpha ^ omega) & k != 0 || e.contains_bits(alpha));
        Event::from_predicate(n, |c| {
            let omega = c.bits();
            (0..size).any(|k| fits(a, omega, k) && (0..size).any(|l| k & l == 0 && fits(b, omega, l)))
        })
        .unwrap()
    }

    #[test]
    fn full_event_is_neutral() {
        for w in 0..256u64 {
            let b = Event::from_word(3, w).unwrap();
            let full = Event::full(3).unwrap();
            assert_eq!(box_general(&full, &b).unwrap(), b);
            assert!(box_general(&Event::empty(3).unwrap(), &b).unwrap().is_empty());
        }
    }

    #[test]
    fn two_coordinate_example() {
        let a = ev(2, &["10", "11"]);
        let b = ev(2, &["01", "11"]);
        assert_eq!(naive_box(&a, &b), ev(2, &["11"]));
        assert_eq!(box_general(&a, &b).unwrap(), ev(2, &["11"]));
        assert_eq!(box_increasing(&a, &b).unwrap(), ev(2, &["11"]));
        let (_, wit) = box_general_with_witnesses(&a, &b).unwrap();
        assert_eq!(wit.len(), 1);
        let (omega, w) = wit[0];
        assert_eq!(omega.to_string(), "11");
        assert!(w.k.is_disjoint(&w.l));
    }

    #[test]
    fn n4_alternating_instance_box_is_top_only() {
        let a = Event::from_predicate(4, |c| c.get(0) && (c.get(2) || c.get(3))).unwrap();
        let b = Event::from_predicate(4, |c| c.get(2) && (c.get(0) || c.get(1))).unwrap();
        let expected = ev(4, &["1111"]);
        assert_eq!(naive_box(&a, &b), expected);
        assert_eq!(box_general(&a, &b).unwrap(), expected);
        assert_eq!(box_increasing(&a, &b).unwrap(), expected);
    }

    #[test]
    fn box_increasing_edge_cases() {
        let up100 = Event::up_closure(3, &[Config::parse("100").unwrap()]).unwrap();
        assert!(box_increasing(&up100, &up100).unwrap().is_empty());
        let empty = Event::empty(3).unwrap();
        assert!(box_increasing(&empty, &up100).unwrap().is_empty());
        assert!(box_increasing(&up100, &empty).unwrap().is_empty());
        assert_eq!(box_increasing(&ev(2, &["10"]), &ev(2, &["11"])), Err(Error::NotIncreasing));
    }

    #[test]
    fn general_matches_naive_for_all_pairs_n2() {
        for x in 0..16u64 {
            for y in 0..16u64 {
                let a = Event::from_word(2, x).unwrap();
                let b = Event::from_word(2, y).unwrap();
                assert_eq!(box_general(&a, &b).unwrap(), naive_box(&a, &b), "{a} {b}");
            }
        }
    }

    #[test]
    fn general_matches_naive_on_n3_sample() {
        for x in (0..256u64).step_by(7) {
            for y in (0..256u64).step_by(5) {
                let a = Event::from_word(3, x).unwrap();
                let b = Event::from_word(3, y).unwrap();
                assert_eq!(box_general(&a, &b).unwrap(), naive_box(&a, &b));
            }
        }
    }

    #[test]
    fn witness_sets_are_minimal_and_valid() {
        for w in (0..65536u64).step_by(331) {
            let a = Event::from_word(4, w).unwrap();
            let table = witness_table(&a).unwrap();
            for omega in 0..16u64 {
                let sets = table.minimal_sets(omega);
                for &k in sets {
                    let cyl = (0..16u64).filter(|alpha| (alpha ^ omega) & k == 0);
                    assert!(cyl.clone().all(|alpha| a.contains_bits(alpha)));
                    for &other in sets {
                        assert!(other == k || other & !k != 0, "non-minimal witness");
                    }
                }
                assert_eq!(sets.is_empty(), !a.contains_bits(omega));
            }
        }
    }

    #[test]
    fn increasing_results_are_increasing_n3() {
        let events = enumerate_monotone_events(3).unwrap();
        for a in &events {
            for b in &events {
                let r = box_increasing(a, b).unwrap();
                assert!(r.is_increasing());
                assert_eq!(r, box_general(a, b).unwrap());
            }
        }
    }

    #[test]
    fn general_cap_is_enforced() {
        let a = Event::full(7).unwrap();
        assert!(matches!(box_general(&a, &a), Err(Error::CapExceeded { .. })));
        assert!(matches!(
            box_general(&Event::full(2).unwrap(), &Event::full(3).unwrap()),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
