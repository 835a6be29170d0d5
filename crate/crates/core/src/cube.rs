//! Configurations, index sets and events on the hypercube {0,1}^n.
//!
//! Bit `i` of a configuration word holds coordinate `i + 1`; bitstrings are
//! written coordinate 1 first. Events are stored as a membership bitmap over
//! all `2^n` configurations, so iteration is always in numeric bit order.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::limits::{check_cap, CONFIG_MAX_N, EVENT_MAX_N};

#[inline]
pub(crate) fn full_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// One vertex of {0,1}^n.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Config {
    n: u8,
    bits: u64,
}

impl Config {
    pub fn new(n: usize, bits: u64) -> Result<Self> {
        check_cap("configuration", n, CONFIG_MAX_N)?;
        if bits & !full_mask(n) != 0 {
            return Err(Error::InvalidParameter(format!("bits {bits:#x} exceed dimension {n}")));
        }
        Ok(Config { n: n as u8, bits })
    }

    /// Caller guarantees `n <= 64` and no bits above `n`.
    #[inline]
    pub(crate) fn raw(n: usize, bits: u64) -> Self {
        debug_assert!(n <= 64 && bits & !full_mask(n) == 0);
        Config { n: n as u8, bits }
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Config::new(n, 0)
    }

    pub fn ones(n: usize) -> Result<Self> {
        check_cap("configuration", n, CONFIG_MAX_N)?;
        Ok(Config::raw(n, full_mask(n)))
    }

    /// Parses `ω_1 ω_2 … ω_n` written as `'0'`/`'1'` characters.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let n = s.len();
        check_cap("configuration", n, CONFIG_MAX_N)?;
        let mut bits = 0u64;
        for (i, c) in s.bytes().enumerate() {
            match c {
                b'0' => {}
                b'1' => bits |= 1 << i,
                _ => return Err(Error::InvalidBitstring(s.to_string())),
            }
        }
        Ok(Config::raw(n, bits))
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    /// Value of coordinate `i + 1`.
    pub fn get(&self, i: usize) -> bool {
        i < self.n() && self.bits >> i & 1 == 1
    }

    /// Number of ones.
    pub fn weight(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn support(&self) -> IndexSet {
        IndexSet { n: self.n, mask: self.bits }
    }

    pub fn flip(self) -> Config {
        Config::raw(self.n(), !self.bits & full_mask(self.n()))
    }

    /// Coordinatewise order `self ≤ other`.
    pub fn le(&self, other: &Config) -> bool {
        self.bits & !other.bits == 0
    }

    /// Agrees with `self` on `s`, zero elsewhere.
    pub fn restrict(&self, s: &IndexSet) -> Config {
        Config::raw(self.n(), self.bits & s.mask)
    }

    pub fn to_bitstring(&self) -> String {
        (0..self.n()).map(|i| if self.get(i) { '1' } else { '0' }).collect()
    }
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bitstring())
    }
}

/// Bit complement; an involution.
pub fn flip(omega: Config) -> Config {
    omega.flip()
}

/// A subset of `[n]`, stored as an n-bit mask (bit `i` is index `i + 1`).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct IndexSet {
    n: u8,
    mask: u64,
}

impl IndexSet {
    pub fn new(n: usize, mask: u64) -> Result<Self> {
        check_cap("index set", n, CONFIG_MAX_N)?;
        if mask & !full_mask(n) != 0 {
            return Err(Error::InvalidParameter(format!("mask {mask:#x} exceeds dimension {n}")));
        }
        Ok(IndexSet { n: n as u8, mask })
    }

    #[inline]
    pub(crate) fn raw(n: usize, mask: u64) -> Self {
        IndexSet { n: n as u8, mask }
    }

    pub fn empty(n: usize) -> Self {
        IndexSet::raw(n.min(CONFIG_MAX_N), 0)
    }

    pub fn full(n: usize) -> Self {
        let n = n.min(CONFIG_MAX_N);
        IndexSet::raw(n, full_mask(n))
    }

    /// Builds from 1-based indices.
    pub fn from_indices(n: usize, indices: &[usize]) -> Result<Self> {
        check_cap("index set", n, CONFIG_MAX_N)?;
        let mut mask = 0u64;
        for &i in indices {
            if i == 0 || i > n {
                return Err(Error::IndexOutOfRange { index: i, n });
            }
            mask |= 1 << (i - 1);
        }
        Ok(IndexSet::raw(n, mask))
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn len(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    /// Membership of 1-based index `i`.
    pub fn contains(&self, i: usize) -> bool {
        i >= 1 && i <= self.n() && self.mask >> (i - 1) & 1 == 1
    }

    pub fn complement(&self) -> IndexSet {
        IndexSet::raw(self.n(), !self.mask & full_mask(self.n()))
    }

    pub fn is_disjoint(&self, other: &IndexSet) -> bool {
        self.mask & other.mask == 0
    }

    pub fn is_subset(&self, other: &IndexSet) -> bool {
        self.mask & !other.mask == 0
    }

    /// 1-based indices in increasing order.
    pub fn indices(&self) -> Vec<usize> {
        (0..self.n()).filter(|i| self.mask >> i & 1 == 1).map(|i| i + 1).collect()
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.indices().iter().map(|i| i.to_string()).collect();
        write!(f, "{{{}}}", items.join(","))
    }
}

/// Iterates all submasks of `mask`, starting with `mask` itself and ending with 0.
pub(crate) fn submasks(mask: u64) -> impl Iterator<Item = u64> {
    let mut next = Some(mask);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 { None } else { Some((cur - 1) & mask) };
        Some(cur)
    })
}

/// A subset of {0,1}^n.
///
/// Membership is a bitmap indexed by configuration word. The minimal
/// elements and the increasing flag are computed lazily and cached.
pub struct Event {
    n: usize,
    words: Vec<u64>,
    increasing: OnceLock<bool>,
    minimal: OnceLock<Vec<Config>>,
    pub(crate) witnesses: OnceLock<crate::boxop::WitnessTable>,
}

impl Clone for Event {
    fn clone(&self) -> Self {
        Event {
            n: self.n,
            words: self.words.clone(),
            increasing: self.increasing.clone(),
            minimal: self.minimal.clone(),
            witnesses: OnceLock::new(),
        }
    }
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.words == other.words
    }
}

impl Eq for Event {}

impl Hash for Event {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.n.hash(state);
        self.words.hash(state);
    }
}

impl fmt::Debug for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Event(n={}, {})", self.n, self)
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.members().map(|c| c.to_bitstring()).collect();
        write!(f, "{{{}}}", items.join(","))
    }
}

#[inline]
fn word_count(n: usize) -> usize {
    if n >= 6 {
        1 << (n - 6)
    } else {
        1
    }
}

impl Event {
    fn from_words(n: usize, words: Vec<u64>) -> Event {
        Event {
            n,
            words,
            increasing: OnceLock::new(),
            minimal: OnceLock::new(),
            witnesses: OnceLock::new(),
        }
    }

    pub fn empty(n: usize) -> Result<Event> {
        check_cap("event", n, EVENT_MAX_N)?;
        Ok(Event::from_words(n, vec![0; word_count(n)]))
    }

    /// The whole cube Ω.
    pub fn full(n: usize) -> Result<Event> {
        check_cap("event", n, EVENT_MAX_N)?;
        let mut words = vec![u64::MAX; word_count(n)];
        if n < 6 {
            words[0] = full_mask(1 << n);
        }
        Ok(Event::from_words(n, words))
    }

    /// Single-word constructor for `n <= 6`: bit `p` of `word` is membership of configuration `p`.
    pub fn from_word(n: usize, word: u64) -> Result<Event> {
        check_cap("single-word event", n, 6)?;
        if word & !full_mask(1 << n) != 0 {
            return Err(Error::InvalidParameter(format!("membership word {word:#x} exceeds 2^{n} configurations")));
        }
        Ok(Event::from_words(n, vec![word]))
    }

    pub fn from_configs<I: IntoIterator<Item = Config>>(n: usize, members: I) -> Result<Event> {
        let mut e = Event::empty(n)?;
        for c in members {
            if c.n() != n {
                return Err(Error::DimensionMismatch { expected: n, found: c.n() });
            }
            e.insert_bits(c.bits());
        }
        Ok(e)
    }

    pub fn from_bitstrings<S: AsRef<str>>(n: usize, members: &[S]) -> Result<Event> {
        let configs = members.iter().map(|s| Config::parse(s.as_ref())).collect::<Result<Vec<_>>>()?;
        Event::from_configs(n, configs)
    }

    pub fn from_predicate<F: Fn(Config) -> bool>(n: usize, pred: F) -> Result<Event> {
        let mut e = Event::empty(n)?;
        for p in 0..(1u64 << n) {
            if pred(Config::raw(n, p)) {
                e.insert_bits(p);
            }
        }
        Ok(e)
    }

    #[inline]
    pub(crate) fn insert_bits(&mut self, p: u64) {
        self.words[(p >> 6) as usize] |= 1 << (p & 63);
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of configurations in the cube, `2^n`.
    pub fn universe_size(&self) -> u64 {
        1u64 << self.n
    }

    #[inline]
    pub fn contains_bits(&self, p: u64) -> bool {
        self.words[(p >> 6) as usize] >> (p & 63) & 1 == 1
    }

    pub fn contains(&self, c: &Config) -> bool {
        c.n() == self.n && self.contains_bits(c.bits())
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_full(&self) -> bool {
        *self == Event::full(self.n).expect("same n")
    }

    /// The membership word when `n <= 6`.
    pub fn word(&self) -> Option<u64> {
        (self.n <= 6).then(|| self.words[0])
    }

    /// Member configuration words in increasing numeric order.
    pub fn member_bits(&self) -> impl Iterator<Item = u64> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let base = (wi as u64) << 6;
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as u64;
                w &= w - 1;
                Some(base | t)
            })
        })
    }

    /// Members in canonical (numeric bit-pattern) order.
    pub fn members(&self) -> impl Iterator<Item = Config> + '_ {
        let n = self.n;
        self.member_bits().map(move |p| Config::raw(n, p))
    }

    fn same_n(&self, other: &Event) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        Ok(())
    }

    fn zip_words(&self, other: &Event, f: impl Fn(u64, u64) -> u64) -> Result<Event> {
        self.same_n(other)?;
        let words = self.words.iter().zip(&other.words).map(|(&a, &b)| f(a, b)).collect();
        Ok(Event::from_words(self.n, words))
    }

    pub fn intersection(&self, other: &Event) -> Result<Event> {
        self.zip_words(other, |a, b| a & b)
    }

    pub fn union(&self, other: &Event) -> Result<Event> {
        self.zip_words(other, |a, b| a | b)
    }

    pub fn difference(&self, other: &Event) -> Result<Event> {
        self.zip_words(other, |a, b| a & !b)
    }

    /// Set complement Ω \ A (not to be confused with [`bar_event`]).
    pub fn complement(&self) -> Event {
        let full = Event::full(self.n).expect("n already validated");
        full.difference(self).expect("same n")
    }

    pub fn is_subset(&self, other: &Event) -> Result<bool> {
        self.same_n(other)?;
        Ok(self.words.iter().zip(&other.words).all(|(&a, &b)| a & !b == 0))
    }

    /// `{ω̄ : ω ∈ A}`.
    pub fn bar(&self) -> Event {
        let full = full_mask(self.n);
        let mut out = Event::from_words(self.n, vec![0; self.words.len()]);
        for p in self.member_bits() {
            out.insert_bits(!p & full);
        }
        out
    }

    /// Closed under single-coordinate raises, hence under `≤`.
    pub fn is_increasing(&self) -> bool {
        *self.increasing.get_or_init(|| {
            self.member_bits().all(|p| (0..self.n).all(|i| p >> i & 1 == 1 || self.contains_bits(p | 1 << i)))
        })
    }

    /// The antichain of `≤`-minimal members of an increasing event.
    pub fn minimal_elements(&self) -> Result<&[Config]> {
        if !self.is_increasing() {
            return Err(Error::NotIncreasing);
        }
        Ok(self.minimal.get_or_init(|| {
            self.member_bits()
                .filter(|&p| (0..self.n).all(|i| p >> i & 1 == 0 || !self.contains_bits(p & !(1 << i))))
                .map(|p| Config::raw(self.n, p))
                .collect()
        }))
    }

    /// Upward closure of an antichain; the antichain is cached as the minimal elements.
    pub fn up_closure(n: usize, antichain: &[Config]) -> Result<Event> {
        let mut gens: Vec<Config> = antichain.to_vec();
        for c in &gens {
            if c.n() != n {
                return Err(Error::DimensionMismatch { expected: n, found: c.n() });
            }
        }
        gens.sort();
        gens.dedup();
        for a in &gens {
            for b in &gens {
                if a != b && a.le(b) {
                    return Err(Error::NotAntichain(a.to_string(), b.to_string()));
                }
            }
        }
        let mut e = Event::empty(n)?;
        for g in &gens {
            e.insert_bits(g.bits());
        }
        e.close_upward();
        e.increasing.set(true).ok();
        e.minimal.set(gens).ok();
        Ok(e)
    }

    /// Adds every configuration above a member, one coordinate at a time.
    pub(crate) fn close_upward(&mut self) {
        let size = 1u64 << self.n;
        for i in 0..self.n {
            let bit = 1u64 << i;
            for p in 0..size {
                if p & bit == 0 && self.contains_bits(p) {
                    self.insert_bits(p | bit);
                }
            }
        }
    }
}

/// Member-wise flip `Ā`.
pub fn bar_event(a: &Event) -> Event {
    a.bar()
}

pub fn is_increasing(a: &Event) -> bool {
    a.is_increasing()
}

pub fn minimal_elements(a: &Event) -> Result<Vec<Config>> {
    a.minimal_elements().map(|m| m.to_vec())
}

pub fn up_closure(n: usize, antichain: &[Config]) -> Result<Event> {
    Event::up_closure(n, antichain)
}

/// `[ω]_S ⊆ A`.
///
/// For increasing `A` this reduces to a single membership test of `ω`
/// restricted to `S` (zeros elsewhere); otherwise all completions are checked.
pub fn cylinder_subset(omega: &Config, s: &IndexSet, a: &Event) -> Result<bool> {
    if omega.n() != a.n() {
        return Err(Error::DimensionMismatch { expected: a.n(), found: omega.n() });
    }
    if s.n() != a.n() {
        return Err(Error::DimensionMismatch { expected: a.n(), found: s.n() });
    }
    let fixed = omega.bits() & s.mask();
    if a.is_increasing() {
        return Ok(a.contains_bits(fixed));
    }
    let free = !s.mask() & full_mask(a.n());
    Ok(submasks(free).all(|sub| a.contains_bits(fixed | sub)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(n: usize, members: &[&str]) -> Event {
        Event::from_bitstrings(n, members).unwrap()
    }

    fn cfg(s: &str) -> Config {
        Config::parse(s).unwrap()
    }

    #[test]
    fn flip_examples() {
        assert_eq!(flip(cfg("101")), cfg("010"));
        assert_eq!(flip(cfg("00")), cfg("11"));
        for p in 0..16 {
            let c = Config::new(4, p).unwrap();
            assert_eq!(flip(flip(c)), c);
        }
    }

    #[test]
    fn bitstring_convention_is_coordinate_one_first() {
        let c = cfg("100");
        assert_eq!(c.bits(), 1);
        assert!(c.get(0));
        assert_eq!(c.to_string(), "100");
        assert!(Config::parse("10a").is_err());
        assert!(Config::new(2, 0b100).is_err());
    }

    #[test]
    fn bar_event_examples() {
        assert_eq!(bar_event(&ev(2, &["01", "11"])), ev(2, &["10", "00"]));
        let full = Event::full(2).unwrap();
        assert_eq!(bar_event(&full), full);
        let empty = Event::empty(2).unwrap();
        assert_eq!(bar_event(&empty), empty);
    }

    #[test]
    fn bar_event_is_an_involution_n3() {
        for w in 0..256u64 {
            let a = Event::from_word(3, w).unwrap();
            let b = bar_event(&a);
            assert_eq!(b.len(), a.len());
            assert_eq!(bar_event(&b), a);
        }
    }

    #[test]
    fn cylinder_subset_examples() {
        let one = IndexSet::from_indices(2, &[1]).unwrap();
        assert!(cylinder_subset(&cfg("11"), &one, &ev(2, &["10", "11"])).unwrap());
        assert!(cylinder_subset(&cfg("11"), &IndexSet::empty(2), &Event::full(2).unwrap()).unwrap());
        assert!(!cylinder_subset(&cfg("11"), &one, &ev(2, &["11"])).unwrap());
        assert!(matches!(
            cylinder_subset(&cfg("111"), &one, &ev(2, &["11"])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn is_increasing_examples() {
        assert!(ev(2, &["10", "11"]).is_increasing());
        assert!(!ev(2, &["10"]).is_increasing());
        assert!(Event::empty(2).unwrap().is_increasing());
        assert!(Event::full(2).unwrap().is_increasing());
    }

    #[test]
    fn minimal_elements_examples() {
        assert_eq!(minimal_elements(&ev(2, &["10", "11"])).unwrap(), vec![cfg("10")]);
        assert_eq!(minimal_elements(&Event::full(2).unwrap()).unwrap(), vec![cfg("00")]);
        let a = ev(3, &["110", "111", "011"]);
        let mut m = minimal_elements(&a).unwrap();
        m.sort();
        let mut want = vec![cfg("110"), cfg("011")];
        want.sort();
        assert_eq!(m, want);
        assert_eq!(minimal_elements(&ev(2, &["10"])), Err(Error::NotIncreasing));
    }

    #[test]
    fn up_closure_examples() {
        assert_eq!(up_closure(2, &[cfg("10")]).unwrap(), ev(2, &["10", "11"]));
        assert_eq!(up_closure(2, &[]).unwrap(), Event::empty(2).unwrap());
        assert_eq!(up_closure(3, &[cfg("110"), cfg("011")]).unwrap(), ev(3, &["110", "111", "011"]));
        assert!(matches!(up_closure(2, &[cfg("10"), cfg("11")]), Err(Error::NotAntichain(..))));
    }

    #[test]
    fn multiword_events() {
        let n = 8;
        let a = Event::from_predicate(n, |c| c.weight() >= 6).unwrap();
        assert!(a.is_increasing());
        assert_eq!(a.minimal_elements().unwrap().len(), 28);
        assert_eq!(Event::up_closure(n, a.minimal_elements().unwrap()).unwrap(), a);
        assert_eq!(a.bar().len(), a.len());
        assert_eq!(Event::full(n).unwrap().len(), 256);
        assert!(Event::full(n).unwrap().is_full());
    }

    #[test]
    fn index_set_basics() {
        let k = IndexSet::from_indices(4, &[1, 3]).unwrap();
        assert_eq!(k.to_string(), "{1,3}");
        assert_eq!(k.complement().indices(), vec![2, 4]);
        assert!(k.is_disjoint(&k.complement()));
        assert_eq!(k.len() + k.complement().len(), 4);
        assert!(IndexSet::from_indices(4, &[5]).is_err());
        assert!(IndexSet::from_indices(4, &[0]).is_err());
    }

    #[test]
    fn submasks_cover_all_subsets() {
        let subs: Vec<u64> = submasks(0b1010).collect();
        assert_eq!(subs, vec![0b1010, 0b1000, 0b0010, 0]);
        assert_eq!(submasks(0).collect::<Vec<_>>(), vec![0]);
    }
}
