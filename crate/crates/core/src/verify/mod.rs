//! Inequality checkers, exhaustive sweeps, the mixture search and the
//! Monte Carlo estimator.

mod montecarlo;
mod search;
mod sweep;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::boxop::disjoint_occurrence;
use crate::cube::{full_mask, Event, IndexSet};
use crate::error::{Error, Result};
use crate::io::EventFile;
use crate::measures::{k_out_of_n_measure, measure_of, Measure};
use crate::rational::{serde_ratio, Rational};

pub use montecarlo::{monte_carlo_bk, random_support_family, Estimate, MonteCarloReport, SupportFamily, Verdict};
pub use search::{
    projection_mixing_variables, search_mixtures, CandidateResult, CandidateSource, Classification, Origin,
    ProjectionParams, SearchConfig, SearchReport,
};
pub use sweep::{
    is_bk_measure, sweep, BkVerdict, Expectation, PairRow, Severity, SweepOptions, SweepReport, Universe, Violation,
};

/// Which inequality a report compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Inequality {
    /// `μ(A □ B) ≤ μ(A) μ(B)`.
    Bk,
    /// `|A □ B| ≤ |A ∩ B̄|`.
    Reimer,
    /// `P_{m/2,m}(A □ B) ≤ P_{m/2,m}(A ∩ B̄)` for increasing events.
    Prop2,
    /// `μ(A ∩ B) ≤ μ(A) μ(B)` for increasing events on disjoint coordinates.
    Na,
}

impl Inequality {
    pub fn name(&self) -> &'static str {
        match self {
            Inequality::Bk => "bk",
            Inequality::Reimer => "reimer",
            Inequality::Prop2 => "prop2",
            Inequality::Na => "na",
        }
    }
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Inequality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bk" => Ok(Inequality::Bk),
            "reimer" => Ok(Inequality::Reimer),
            "prop2" => Ok(Inequality::Prop2),
            "na" => Ok(Inequality::Na),
            other => Err(Error::InvalidParameter(format!("unknown inequality {other:?}"))),
        }
    }
}

/// The two events of a checked instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairDescriptor {
    pub a: EventFile,
    pub b: EventFile,
}

impl PairDescriptor {
    pub fn of(a: &Event, b: &Event) -> PairDescriptor {
        PairDescriptor { a: EventFile::describe(a), b: EventFile::describe(b) }
    }
}

/// Outcome of one inequality check. `holds` is exactly `lhs <= rhs`.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub inequality: Inequality,
    #[serde(with = "serde_ratio")]
    pub lhs: Rational,
    #[serde(with = "serde_ratio")]
    pub rhs: Rational,
    #[serde(with = "serde_ratio")]
    pub slack: Rational,
    pub holds: bool,
    pub witness: PairDescriptor,
    pub elapsed_micros: u64,
}

impl CheckReport {
    fn new(inequality: Inequality, lhs: Rational, rhs: Rational, a: &Event, b: &Event, start: Instant) -> CheckReport {
        let slack = &rhs - &lhs;
        CheckReport {
            inequality,
            holds: lhs <= rhs,
            lhs,
            rhs,
            slack,
            witness: PairDescriptor::of(a, b),
            elapsed_micros: start.elapsed().as_micros() as u64,
        }
    }
}

fn same_n(a: &Event, b: &Event) -> Result<()> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch { expected: a.n(), found: b.n() });
    }
    Ok(())
}

/// `μ(A □ B)` against `μ(A) μ(B)`.
pub fn check_bk(mu: &Measure, a: &Event, b: &Event) -> Result<CheckReport> {
    let start = Instant::now();
    same_n(a, b)?;
    let boxed = disjoint_occurrence(a, b)?;
    let lhs = measure_of(mu, &boxed)?;
    let rhs = measure_of(mu, a)? * measure_of(mu, b)?;
    Ok(CheckReport::new(Inequality::Bk, lhs, rhs, a, b, start))
}

/// `|A □ B|` against `|A ∩ B̄|`.
pub fn check_reimer_cardinality(a: &Event, b: &Event) -> Result<CheckReport> {
    let start = Instant::now();
    same_n(a, b)?;
    let lhs = disjoint_occurrence(a, b)?.len();
    let rhs = a.intersection(&b.bar())?.len();
    Ok(CheckReport::new(
        Inequality::Reimer,
        Rational::from_integer(BigInt::from(lhs)),
        Rational::from_integer(BigInt::from(rhs)),
        a,
        b,
        start,
    ))
}

/// `P_{m/2,m}(A □ B)` against `P_{m/2,m}(A ∩ B̄)` for increasing events.
pub fn check_prop2(m: usize, a: &Event, b: &Event) -> Result<CheckReport> {
    let start = Instant::now();
    if m % 2 != 0 {
        return Err(Error::OddDimension(m));
    }
    if a.n() != m {
        return Err(Error::DimensionMismatch { expected: m, found: a.n() });
    }
    same_n(a, b)?;
    if !a.is_increasing() || !b.is_increasing() {
        return Err(Error::NotIncreasing);
    }
    let mu = k_out_of_n_measure(m / 2, m)?;
    let lhs = measure_of(&mu, &crate::boxop::box_increasing(a, b)?)?;
    let rhs = measure_of(&mu, &a.intersection(&b.bar())?)?;
    Ok(CheckReport::new(Inequality::Prop2, lhs, rhs, a, b, start))
}

/// Coordinates the event actually depends on.
pub fn dependence_set(a: &Event) -> IndexSet {
    let n = a.n();
    let size = 1u64 << n;
    let mask = (0..n)
        .filter(|&i| (0..size).any(|p| a.contains_bits(p) != a.contains_bits(p ^ 1 << i)))
        .fold(0u64, |acc, i| acc | 1 << i);
    IndexSet::new(n, mask & full_mask(n)).expect("n <= event cap")
}

/// Whether membership in `a` is unchanged by flipping any coordinate outside `k`.
pub fn is_determined_by(a: &Event, k: &IndexSet) -> bool {
    dependence_set(a).is_subset(k)
}

/// `μ(A ∩ B)` against `μ(A) μ(B)` for increasing `A` determined by `K`
/// and increasing `B` determined by `L`, with `K ∩ L = ∅`.
pub fn check_na(mu: &Measure, a: &Event, b: &Event, k: &IndexSet, l: &IndexSet) -> Result<CheckReport> {
    let start = Instant::now();
    same_n(a, b)?;
    for s in [k, l] {
        if s.n() != a.n() {
            return Err(Error::DimensionMismatch { expected: a.n(), found: s.n() });
        }
    }
    if !a.is_increasing() || !b.is_increasing() {
        return Err(Error::NotIncreasing);
    }
    if !k.is_disjoint(l) {
        return Err(Error::NotOrthogonal(format!("K = {k} and L = {l} intersect")));
    }
    if !is_determined_by(a, k) {
        return Err(Error::NotOrthogonal(format!("A depends on coordinates outside K = {k}")));
    }
    if !is_determined_by(b, l) {
        return Err(Error::NotOrthogonal(format!("B depends on coordinates outside L = {l}")));
    }
    let lhs = measure_of(mu, &a.intersection(b)?)?;
    let rhs = measure_of(mu, a)? * measure_of(mu, b)?;
    Ok(CheckReport::new(Inequality::Na, lhs, rhs, a, b, start))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::Config;
    use crate::measures::{mixture_measure, MixingVariable};
    use crate::rational::{int, ratio};

    fn up(n: usize, gens: &[&str]) -> Event {
        let gens: Vec<Config> = gens.iter().map(|s| Config::parse(s).unwrap()).collect();
        Event::up_closure(n, &gens).unwrap()
    }

    fn two_point_mixture() -> Measure {
        let x = MixingVariable::new(vec![ratio(1, 2), int(0), ratio(1, 2)]).unwrap();
        mixture_measure(&x, &[int(1), int(1)], 2).unwrap()
    }

    #[test]
    fn bk_examples() {
        let mu = k_out_of_n_measure(1, 2).unwrap();
        let r = check_bk(&mu, &up(2, &["10"]), &up(2, &["01"])).unwrap();
        assert_eq!((r.lhs.clone(), r.rhs.clone()), (int(0), ratio(1, 4)));
        assert!(r.holds);

        let b = up(2, &["01"]);
        let r = check_bk(&mu, &Event::full(2).unwrap(), &b).unwrap();
        assert_eq!(r.lhs, measure_of(&mu, &b).unwrap());
        assert_eq!(r.lhs, r.rhs);

        let r = check_bk(&two_point_mixture(), &up(2, &["10"]), &up(2, &["01"])).unwrap();
        assert_eq!((r.lhs.clone(), r.rhs.clone()), (ratio(1, 2), ratio(1, 4)));
        assert!(!r.holds);
        assert_eq!(r.slack, ratio(-1, 4));
    }

    #[test]
    fn reimer_examples() {
        let full = Event::full(3).unwrap();
        let r = check_reimer_cardinality(&full, &full).unwrap();
        assert_eq!((r.lhs.clone(), r.rhs.clone()), (int(8), int(8)));
        let a = Event::from_bitstrings(2, &["10", "11"]).unwrap();
        let b = Event::from_bitstrings(2, &["01", "11"]).unwrap();
        let r = check_reimer_cardinality(&a, &b).unwrap();
        assert_eq!((r.lhs.clone(), r.rhs.clone()), (int(1), int(1)));
    }

    #[test]
    fn prop2_examples() {
        let r = check_prop2(2, &up(2, &["10"]), &up(2, &["01"])).unwrap();
        assert_eq!((r.lhs.clone(), r.rhs.clone()), (int(0), ratio(1, 2)));
        let r = check_prop2(2, &Event::empty(2).unwrap(), &up(2, &["01"])).unwrap();
        assert_eq!((r.lhs.clone(), r.rhs.clone()), (int(0), int(0)));
        assert_eq!(check_prop2(3, &up(3, &["100"]), &up(3, &["100"])).unwrap_err(), Error::OddDimension(3));
        let odd = Event::from_bitstrings(2, &["10"]).unwrap();
        assert_eq!(check_prop2(2, &odd, &odd).unwrap_err(), Error::NotIncreasing);
    }

    #[test]
    fn na_examples() {
        let mu = k_out_of_n_measure(1, 2).unwrap();
        let (a, b) = (up(2, &["10"]), up(2, &["01"]));
        let (k, l) = (IndexSet::from_indices(2, &[1]).unwrap(), IndexSet::from_indices(2, &[2]).unwrap());
        let r = check_na(&mu, &a, &b, &k, &l).unwrap();
        assert_eq!((r.lhs.clone(), r.rhs.clone()), (int(0), ratio(1, 4)));

        let full = Event::full(2).unwrap();
        let r = check_na(&mu, &full, &b, &IndexSet::empty(2), &l).unwrap();
        assert_eq!(r.lhs, r.rhs);

        assert!(matches!(check_na(&mu, &a, &b, &k, &k), Err(Error::NotOrthogonal(_))));
        assert!(matches!(check_na(&mu, &a, &b, &l, &k), Err(Error::NotOrthogonal(_))));
    }

    #[test]
    fn na_lhs_equals_bk_lhs_on_orthogonal_instances() {
        let mu = crate::measures::weighted_k_out_of_n_measure(2, 4, &[int(1), int(2), int(3), int(5)]).unwrap();
        let events = crate::monotone::enumerate_monotone_events(4).unwrap();
        let mut checked = 0;
        for a in &events {
            let k = dependence_set(a);
            for b in &events {
                let l = dependence_set(b);
                if !k.is_disjoint(&l) {
                    continue;
                }
                let na = check_na(&mu, a, b, &k, &l).unwrap();
                let bk = check_bk(&mu, a, b).unwrap();
                assert_eq!(na.lhs, bk.lhs);
                assert_eq!(na.rhs, bk.rhs);
                if bk.holds {
                    assert!(na.holds);
                }
                checked += 1;
            }
        }
        assert!(checked > 168);
    }

    #[test]
    fn dependence_sets() {
        assert_eq!(dependence_set(&up(3, &["100"])), IndexSet::from_indices(3, &[1]).unwrap());
        assert!(dependence_set(&Event::full(3).unwrap()).is_empty());
        assert_eq!(dependence_set(&up(3, &["110", "011"])).len(), 3);
    }

    #[test]
    fn inequality_names_round_trip() {
        for i in [Inequality::Bk, Inequality::Reimer, Inequality::Prop2, Inequality::Na] {
            assert_eq!(i.name().parse::<Inequality>().unwrap(), i);
        }
        assert!("fkg".parse::<Inequality>().is_err());
    }
}
