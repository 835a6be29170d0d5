//! Executable forms of the objects used to derive the k-out-of-n BK
//! inequality: cells of `Ω_{k,n} × Ω_{k,n}`, sections of events, the
//! pair-to-bit encoding `T`, and the averaging of pair-alternating measures.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::boxop::{box_general, disjoint_occurrence};
use crate::cube::{full_mask, submasks, Config, Event, IndexSet};
use crate::error::{Error, Result};
use crate::limits::check_cap;
use crate::measures::{hat_support, k_out_of_n_measure, Permutation};
use crate::rational::Rational;

/// A 0/1 assignment `α` to the coordinates of an index set `K`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Pattern {
    on: IndexSet,
    values: u64,
}

impl Pattern {
    /// `values` is a full-width word that must vanish off `on`.
    pub fn new(on: IndexSet, values: u64) -> Result<Pattern> {
        if values & !on.mask() != 0 {
            return Err(Error::InvalidParameter(format!("pattern {values:#x} not supported on {on}")));
        }
        Ok(Pattern { on, values })
    }

    /// From the values on `on`, listed in increasing index order.
    pub fn from_bitstring(on: IndexSet, s: &str) -> Result<Pattern> {
        let idx = on.indices();
        if s.len() != idx.len() {
            return Err(Error::InvalidBitstring(s.to_string()));
        }
        let mut values = 0u64;
        for (c, i) in s.bytes().zip(idx) {
            match c {
                b'0' => {}
                b'1' => values |= 1 << (i - 1),
                _ => return Err(Error::InvalidBitstring(s.to_string())),
            }
        }
        Pattern::new(on, values)
    }

    pub fn index_set(&self) -> IndexSet {
        self.on
    }

    pub fn values(&self) -> u64 {
        self.values
    }

    /// `|α|`.
    pub fn weight(&self) -> usize {
        self.values.count_ones() as usize
    }

    /// Every assignment to `on`.
    pub fn all(on: IndexSet) -> impl Iterator<Item = Pattern> {
        let mut v: Vec<u64> = submasks(on.mask()).collect();
        v.reverse();
        v.into_iter().map(move |values| Pattern { on, values })
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in self.on.indices() {
            f.write_str(if self.values >> (i - 1) & 1 == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// `γ ∘ α`: `γ` (an `(n−|K|)`-bit word) placed on `K^c` in index order, `α` on `K`.
pub fn compose(gamma: u64, alpha: &Pattern) -> Config {
    let n = alpha.on.n();
    let free = alpha.on.complement().indices();
    let spread = free.iter().enumerate().fold(0u64, |acc, (j, &i)| acc | (gamma >> j & 1) << (i - 1));
    Config::raw(n, spread | alpha.values)
}

/// `H(α) = {γ ∈ {0,1}^{K^c} : γ∘α ∈ H}`, with `K^c` relabelled `1..=n−|K|`.
pub fn section_event(h: &Event, alpha: &Pattern) -> Result<Event> {
    if alpha.on.n() != h.n() {
        return Err(Error::DimensionMismatch { expected: h.n(), found: alpha.on.n() });
    }
    let d = h.n() - alpha.on.len();
    let mut out = Event::empty(d)?;
    for gamma in 0..1u64 << d {
        if h.contains_bits(compose(gamma, alpha).bits()) {
            out.insert_bits(gamma);
        }
    }
    Ok(out)
}

/// The block `W_α` of the partition of `Ω_{k,n} × Ω_{k,n}`.
#[derive(Debug, Clone)]
pub struct Cell {
    pub n: usize,
    pub k: usize,
    pub alpha: Pattern,
    pub pairs: Vec<(Config, Config)>,
}

fn weight_class(n: usize, k: usize) -> Vec<u64> {
    (0..1u64 << n).filter(|p| p.count_ones() as usize == k).collect()
}

/// All `(ω, ω′) ∈ Ω_{k,n}²` with `ω_K = ω′_K = α` and `ω_{K^c} = flip(ω′_{K^c})`.
///
/// A non-empty cell must satisfy `|α| = k − (n−|K|)/2` and have exactly
/// `(n−|K|)/2` ones of each configuration off `K`; a violation is an
/// [`Error::Internal`].
pub fn build_cell(alpha: &Pattern, k: usize, n: usize) -> Result<Cell> {
    if alpha.on.n() != n {
        return Err(Error::DimensionMismatch { expected: n, found: alpha.on.n() });
    }
    check_cap("cell", n, 16)?;
    let kmask = alpha.on.mask();
    let free = !kmask & full_mask(n);
    let class = weight_class(n, k);
    let mut pairs = Vec::new();
    for &w in &class {
        if w & kmask != alpha.values {
            continue;
        }
        for &w2 in &class {
            if w2 & kmask == alpha.values && (w ^ w2) & free == free {
                pairs.push((Config::raw(n, w), Config::raw(n, w2)));
            }
        }
    }
    if !pairs.is_empty() {
        let off = n - alpha.on.len();
        if off % 2 != 0 || 2 * alpha.weight() + off != 2 * k {
            return Err(Error::Internal(format!("non-empty cell K={} alpha={} violates |alpha| = k - (n-|K|)/2", alpha.on, alpha)));
        }
        for (w, w2) in &pairs {
            let (a, b) = ((w.bits() & free).count_ones() as usize, (w2.bits() & free).count_ones() as usize);
            if a != off / 2 || b != off / 2 {
                return Err(Error::Internal(format!("cell pair ({w},{w2}) has {a}/{b} ones off K, expected {}", off / 2)));
            }
        }
    }
    Ok(Cell { n, k, alpha: *alpha, pairs })
}

#[derive(Debug, Clone)]
pub struct PartitionSummary {
    pub holds: bool,
    pub total_pairs: usize,
    /// Pairs counted once per cell containing them.
    pub covered: usize,
    pub cells_examined: usize,
    /// `(K, α, |W_α|)` for every non-empty cell.
    pub nonempty_cells: Vec<(IndexSet, Pattern, usize)>,
}

/// The cells over all `(K, α)` cover `Ω_{k,n}²` with every pair in exactly one cell.
pub fn check_cell_partition(k: usize, n: usize) -> Result<PartitionSummary> {
    check_cap("cell partition", n, 6)?;
    if k > n {
        return Err(Error::InvalidParameter(format!("k = {k} exceeds n = {n}")));
    }
    let class = weight_class(n, k);
    let mut hits: HashMap<(u64, u64), u32> = HashMap::new();
    let mut cells_examined = 0;
    let mut nonempty_cells = Vec::new();
    let mut covered = 0;
    for kmask in 0..1u64 << n {
        let on = IndexSet::raw(n, kmask);
        for alpha in Pattern::all(on) {
            cells_examined += 1;
            let cell = build_cell(&alpha, k, n)?;
            if cell.pairs.is_empty() {
                continue;
            }
            covered += cell.pairs.len();
            nonempty_cells.push((on, alpha, cell.pairs.len()));
            for (w, w2) in cell.pairs {
                *hits.entry((w.bits(), w2.bits())).or_default() += 1;
            }
        }
    }
    let total_pairs = class.len() * class.len();
    let every_pair_once = class.iter().all(|&a| class.iter().all(|&b| hits.get(&(a, b)) == Some(&1)));
    let holds = every_pair_once && hits.len() == total_pairs && covered == total_pairs;
    Ok(PartitionSummary { holds, total_pairs, covered, cells_examined, nonempty_cells })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InclusionCheck {
    pub holds: bool,
    pub strict: bool,
}

/// `(A □ B)(α) ⊆ A(α) □ B(α)`. A failed inclusion is an [`Error::Internal`].
pub fn check_box_section_inclusion(a: &Event, b: &Event, alpha: &Pattern) -> Result<InclusionCheck> {
    let lhs = section_event(&disjoint_occurrence(a, b)?, alpha)?;
    let rhs = disjoint_occurrence(&section_event(a, alpha)?, &section_event(b, alpha)?)?;
    if !lhs.is_subset(&rhs)? {
        return Err(Error::Internal(format!("section inclusion fails for A={a}, B={b}, K={}, alpha={alpha}", alpha.on)));
    }
    Ok(InclusionCheck { holds: true, strict: lhs != rhs })
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SectionSweepSummary {
    pub instances: u64,
    pub strict: u64,
}

/// Section inclusion over every ordered pair of `events` and every `(K, α)`.
///
/// Events must share one `n <= 6`; `□` results are memoized by membership word.
pub fn sweep_section_inclusion(events: &[Event]) -> Result<SectionSweepSummary> {
    let Some(first) = events.first() else {
        return Ok(SectionSweepSummary::default());
    };
    let n = first.n();
    check_cap("section sweep", n, 6)?;
    let mut cache: HashMap<(usize, u64, u64), u64> = HashMap::new();
    let mut boxed = |d: usize, x: u64, y: u64| -> Result<u64> {
        if let Some(&r) = cache.get(&(d, x, y)) {
            return Ok(r);
        }
        let r = disjoint_occurrence(&Event::from_word(d, x)?, &Event::from_word(d, y)?)?.word().expect("d <= 6");
        cache.insert((d, x, y), r);
        Ok(r)
    };
    let patterns: Vec<Pattern> = (0..1u64 << n).flat_map(|k| Pattern::all(IndexSet::raw(n, k))).collect();
    let mut sections: Vec<Vec<u64>> = Vec::with_capacity(events.len());
    for e in events {
        if e.n() != n {
            return Err(Error::DimensionMismatch { expected: n, found: e.n() });
        }
        let row = patterns.iter().map(|p| section_event(e, p).map(|s| s.word().expect("d <= 6"))).collect::<Result<_>>()?;
        sections.push(row);
    }
    let mut summary = SectionSweepSummary::default();
    for (i, a) in events.iter().enumerate() {
        for (j, b) in events.iter().enumerate() {
            let ab = Event::from_word(n, boxed(n, a.word().expect("n <= 6"), b.word().expect("n <= 6"))?)?;
            for (pi, p) in patterns.iter().enumerate() {
                let d = n - p.on.len();
                let lhs = section_event(&ab, p)?.word().expect("d <= 6");
                let rhs = boxed(d, sections[i][pi], sections[j][pi])?;
                if lhs & !rhs != 0 {
                    return Err(Error::Internal(format!("section inclusion fails for A={a}, B={b}, K={}, alpha={p}", p.on)));
                }
                summary.instances += 1;
                if lhs != rhs {
                    summary.strict += 1;
                }
            }
        }
    }
    Ok(summary)
}

fn check_even(m: usize) -> Result<()> {
    if m % 2 != 0 {
        Err(Error::OddDimension(m))
    } else {
        Ok(())
    }
}

/// Membership in `Ω̂_m`: every pair `(ω_{2i−1}, ω_{2i})` is `(1,0)` or `(0,1)`.
pub fn is_pair_alternating(omega: &Config) -> bool {
    omega.n() % 2 == 0 && (0..omega.n() / 2).all(|i| omega.get(2 * i) != omega.get(2 * i + 1))
}

/// `T`: each pair `(1,0)` becomes 1 and each `(0,1)` becomes 0.
#[allow(non_snake_case)]
pub fn T_encode(omega: &Config) -> Result<Config> {
    check_even(omega.n())?;
    if !is_pair_alternating(omega) {
        return Err(Error::NotPairAlternating(omega.to_string()));
    }
    let half = omega.n() / 2;
    let bits = (0..half).fold(0u64, |acc, i| acc | (omega.bits() >> (2 * i) & 1) << i);
    Config::new(half, bits)
}

/// Inverse of [`T_encode`].
#[allow(non_snake_case)]
pub fn T_decode(tau: &Config) -> Result<Config> {
    let m = 2 * tau.n();
    check_cap("decoded configuration", m, 64)?;
    let bits = (0..tau.n()).fold(0u64, |acc, i| acc | if tau.get(i) { 1 << (2 * i) } else { 1 << (2 * i + 1) });
    Config::new(m, bits)
}

/// `T(K) = {⌈i/2⌉ : i ∈ K}`.
#[allow(non_snake_case)]
pub fn T_index_map(k: &IndexSet) -> Result<IndexSet> {
    check_even(k.n())?;
    let idx: Vec<usize> = k.indices().iter().map(|i| i.div_ceil(2)).collect();
    IndexSet::from_indices(k.n() / 2, &idx)
}

/// `T(H ∩ Ω̂_m)` as an event on `{0,1}^{m/2}`.
pub fn t_image(h: &Event) -> Result<Event> {
    let m = h.n();
    check_even(m)?;
    let mut out = Event::empty(m / 2)?;
    for tau in 0..1u64 << (m / 2) {
        let omega = T_decode(&Config::raw(m / 2, tau))?;
        if h.contains(&omega) {
            out.insert_bits(tau);
        }
    }
    Ok(out)
}

fn restrict_to_alternating(h: &Event) -> Result<Event> {
    let m = h.n();
    let mut out = Event::empty(m)?;
    for tau in 0..1u64 << (m / 2) {
        let omega = T_decode(&Config::raw(m / 2, tau))?;
        if h.contains(&omega) {
            out.insert_bits(omega.bits());
        }
    }
    Ok(out)
}

/// One member of `(A □ B) ∩ Ω̂_m` with its witnesses and their `T` images.
#[derive(Debug, Clone)]
pub struct TWitness {
    pub omega: Config,
    pub k: IndexSet,
    pub l: IndexSet,
    pub t_k: IndexSet,
    pub t_l: IndexSet,
}

#[derive(Debug, Clone)]
pub struct TInclusionReport {
    pub holds: bool,
    /// `T((A □ B) ∩ Ω̂_m)`.
    pub lhs: Event,
    /// `T(A ∩ Ω̂_m) □ T(B ∩ Ω̂_m)`.
    pub rhs: Event,
    /// A member of the right side missing from the left, when the inclusion is proper.
    pub strict_witness: Option<Config>,
    pub witnesses: Vec<TWitness>,
}

/// `T((A □ B) ∩ Ω̂_m) ⊆ T(A ∩ Ω̂_m) □ T(B ∩ Ω̂_m)` for increasing `A`, `B`.
///
/// Each left-side member is certified by minimal elements `a ≤ ω`, `b ≤ ω`
/// with disjoint supports (`K = supp a`, `L = supp b`); the images
/// `T(K)`, `T(L)` are checked to be disjoint as well.
#[allow(non_snake_case)]
pub fn check_T_inclusion(a: &Event, b: &Event, m: usize) -> Result<TInclusionReport> {
    check_even(m)?;
    for e in [a, b] {
        if e.n() != m {
            return Err(Error::DimensionMismatch { expected: m, found: e.n() });
        }
    }
    let min_a = a.minimal_elements()?;
    let min_b = b.minimal_elements()?;
    let boxed = restrict_to_alternating(&disjoint_occurrence(a, b)?)?;
    let mut witnesses = Vec::new();
    for omega in boxed.members() {
        let (x, y) = min_a
            .iter()
            .cartesian_product(min_b)
            .find(|(x, y)| x.bits() & y.bits() == 0 && Config::le(x, &omega) && Config::le(y, &omega))
            .ok_or_else(|| Error::Internal(format!("no minimal witness pair for {omega}")))?;
        let (k, l) = (x.support(), y.support());
        let (t_k, t_l) = (T_index_map(&k)?, T_index_map(&l)?);
        if !t_k.is_disjoint(&t_l) {
            return Err(Error::Internal(format!("T({k}) and T({l}) overlap at {omega}")));
        }
        witnesses.push(TWitness { omega, k, l, t_k, t_l });
    }
    let lhs = t_image(&boxed)?;
    let rhs = box_general(&t_image(a)?, &t_image(b)?)?;
    let holds = lhs.is_subset(&rhs)?;
    let strict_witness = rhs.difference(&lhs)?.members().next();
    Ok(TInclusionReport { holds, lhs, rhs, strict_witness, witnesses })
}

#[derive(Debug, Clone)]
pub struct TBarReport {
    pub holds: bool,
    /// `T(A ∩ B̄ ∩ Ω̂_m)`.
    pub lhs: Event,
    /// `T(A ∩ Ω̂_m) ∩ bar(T(B ∩ Ω̂_m))`.
    pub rhs: Event,
}

/// `T(A ∩ B̄ ∩ Ω̂_m) = T(A ∩ Ω̂_m) ∩ bar(T(B ∩ Ω̂_m))` for arbitrary events.
#[allow(non_snake_case)]
pub fn check_T_bar_equality(a: &Event, b: &Event, m: usize) -> Result<TBarReport> {
    check_even(m)?;
    for e in [a, b] {
        if e.n() != m {
            return Err(Error::DimensionMismatch { expected: m, found: e.n() });
        }
    }
    let lhs = t_image(&a.intersection(&b.bar())?)?;
    let rhs = t_image(a)?.intersection(&t_image(b)?.bar())?;
    Ok(TBarReport { holds: lhs == rhs, lhs, rhs })
}

#[derive(Debug, Clone)]
pub struct ConvexReport {
    pub holds: bool,
    pub max_deviation: Rational,
    pub permutations: u64,
}

/// `(1/m!) Σ_π P̂_{m,π} = P_{m/2,m}`, compared exactly at every configuration.
pub fn check_convex_decomposition(m: usize) -> Result<ConvexReport> {
    check_even(m)?;
    check_cap("convex decomposition", m, 8)?;
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    let mut permutations = 0u64;
    for images in (0..m).permutations(m) {
        let perm = Permutation::from_zero_based(images)?;
        for p in hat_support(&perm)? {
            *counts.entry(p).or_default() += 1;
        }
        permutations += 1;
    }
    let target = k_out_of_n_measure(m / 2, m)?;
    let denom = BigInt::from(permutations) << (m / 2);
    let mut max_deviation = Rational::zero();
    for p in 0..1u64 << m {
        let avg = Rational::new(BigInt::from(counts.get(&p).copied().unwrap_or(0)), denom.clone());
        let dev = (avg - target.mass(&Config::raw(m, p))?).abs();
        if dev > max_deviation {
            max_deviation = dev;
        }
    }
    Ok(ConvexReport { holds: max_deviation.is_zero(), max_deviation, permutations })
}
