use std::collections::BTreeSet;
use std::time::Instant;

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cube::{Config, Event};
use crate::error::{Error, Result};
use crate::limits::{check_cap, CONFIG_MAX_N, EVENT_MAX_N};
use crate::measures::WeightedSampler;
use crate::rng::stream_rng;

const DRAW_CHUNK: u64 = 1 << 16;

/// An increasing event over `[n]` given by its minimal supports, kept as
/// bitmasks so membership is testable without materializing `2^n` configurations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportFamily {
    n: usize,
    masks: Vec<u64>,
}

impl SupportFamily {
    /// `sets` holds 1-based coordinates; the sets must form an antichain.
    pub fn new(n: usize, sets: &[Vec<usize>]) -> Result<SupportFamily> {
        check_cap("support family", n, CONFIG_MAX_N)?;
        let mut masks = Vec::with_capacity(sets.len());
        for s in sets {
            let mut m = 0u64;
            for &i in s {
                if i == 0 || i > n {
                    return Err(Error::IndexOutOfRange { index: i, n });
                }
                m |= 1 << (i - 1);
            }
            masks.push(m);
        }
        Self::from_masks(n, masks)
    }

    /// Minimal elements written as bitstrings ω_1…ω_n.
    pub fn from_bitstrings(n: usize, minimal: &[&str]) -> Result<SupportFamily> {
        let masks = minimal
            .iter()
            .map(|s| {
                let c = Config::parse(s)?;
                if c.n() != n {
                    return Err(Error::InvalidBitstring(format!("{s} (expected length {n})")));
                }
                Ok(c.bits())
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_masks(n, masks)
    }

    fn from_masks(n: usize, masks: Vec<u64>) -> Result<SupportFamily> {
        let mut seen = BTreeSet::new();
        let masks: Vec<u64> = masks.into_iter().filter(|m| seen.insert(*m)).collect();
        for (i, &x) in masks.iter().enumerate() {
            for &y in &masks[i + 1..] {
                if x & y == x || x & y == y {
                    let show = |m: u64| Config::new(n, m).map(|c| c.to_string()).unwrap_or_default();
                    return Err(Error::NotAntichain(show(x), show(y)));
                }
            }
        }
        Ok(SupportFamily { n, masks })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    /// The supports as sorted 1-based coordinate lists.
    pub fn sets(&self) -> Vec<Vec<usize>> {
        self.masks.iter().map(|&m| (0..self.n).filter(|i| m >> i & 1 == 1).map(|i| i + 1).collect()).collect()
    }

    pub fn contains(&self, bits: u64) -> bool {
        self.masks.iter().any(|&m| bits & m == m)
    }

    /// Whether `bits` contains a support of `self` and a disjoint support of `other`.
    pub fn box_contains(&self, other: &SupportFamily, bits: u64) -> bool {
        self.masks
            .iter()
            .filter(|&&s| bits & s == s)
            .any(|&s| other.masks.iter().any(|&t| s & t == 0 && bits & t == t))
    }

    /// The materialized event (n ≤ 24).
    pub fn to_event(&self) -> Result<Event> {
        check_cap("event", self.n, EVENT_MAX_N)?;
        let minimal = self.masks.iter().map(|&m| Config::new(self.n, m)).collect::<Result<Vec<_>>>()?;
        Event::up_closure(self.n, &minimal)
    }
}

/// `count` distinct random supports over `[n]` with sizes in `min_size..=max_size`,
/// redrawn until they form an antichain.
pub fn random_support_family(n: usize, count: usize, min_size: usize, max_size: usize, seed: u64) -> Result<SupportFamily> {
    if min_size == 0 || min_size > max_size || max_size > n {
        return Err(Error::InvalidParameter(format!("support sizes {min_size}..={max_size} invalid for n = {n}")));
    }
    check_cap("support family", n, CONFIG_MAX_N)?;
    let mut rng = stream_rng(seed, 0);
    let mut masks: Vec<u64> = Vec::with_capacity(count);
    let mut attempts = 0u64;
    while masks.len() < count {
        attempts += 1;
        if attempts > 1_000_000 {
            return Err(Error::InvalidParameter(format!("cannot draw {count} incomparable supports")));
        }
        let size = rng.gen_range(min_size..=max_size);
        let m = sample(&mut rng, n, size).into_iter().fold(0u64, |acc, i| acc | 1 << i);
        if masks.iter().all(|&x| x & m != x && x & m != m) {
            masks.push(m);
        }
    }
    SupportFamily::from_masks(n, masks)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub hits: u64,
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    fn of(hits: u64, draws: u64) -> Estimate {
        let p = hits as f64 / draws as f64;
        Estimate { hits, value: p, std_error: (p * (1.0 - p) / draws as f64).sqrt() }
    }
}

/// Verdict at three standard errors; a Monte Carlo run never proves anything.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    Suspicious,
}

#[derive(Debug, Clone, Serialize)]
pub struct MonteCarloReport {
    pub n: usize,
    pub k: usize,
    pub draws: u64,
    pub seed: u64,
    pub a: Vec<Vec<usize>>,
    pub b: Vec<Vec<usize>>,
    pub p_a: Estimate,
    pub p_b: Estimate,
    pub p_ab: Estimate,
    pub p_box: Estimate,
    /// Estimated `P(A) P(B) − P(A □ B)`.
    pub slack: f64,
    pub slack_std_error: f64,
    pub verdict: Verdict,
    pub elapsed_ms: u64,
}

#[derive(Default, Clone, Copy)]
struct Counts {
    a: u64,
    b: u64,
    ab: u64,
    boxed: u64,
}

/// Estimates both sides of the BK inequality from `draws` samples.
///
/// Draws are split in chunks of 65536; chunk `c` uses stream `c` of the
/// seed, so the estimate does not depend on `workers` (0 = ambient pool).
pub fn monte_carlo_bk(
    sampler: &WeightedSampler,
    a: &SupportFamily,
    b: &SupportFamily,
    draws: u64,
    seed: u64,
    workers: usize,
) -> Result<MonteCarloReport> {
    let start = Instant::now();
    let n = sampler.n();
    for f in [a, b] {
        if f.n() != n {
            return Err(Error::DimensionMismatch { expected: n, found: f.n() });
        }
    }
    if draws == 0 {
        return Err(Error::InvalidParameter("draws must be positive".into()));
    }
    let run_chunk = |c: u64| -> Counts {
        let mut rng = stream_rng(seed, c);
        let lo = c * DRAW_CHUNK;
        let hi = (lo + DRAW_CHUNK).min(draws);
        let mut out = Counts::default();
        for _ in lo..hi {
            let bits = sampler.draw(&mut rng).into_iter().fold(0u64, |acc, i| acc | 1 << i);
            let in_a = a.contains(bits);
            let in_b = b.contains(bits);
            out.a += in_a as u64;
            out.b += in_b as u64;
            out.ab += (in_a && in_b) as u64;
            out.boxed += (in_a && in_b && a.box_contains(b, bits)) as u64;
        }
        out
    };
    let chunks = draws.div_ceil(DRAW_CHUNK);
    let parts: Vec<Counts> = if workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
        pool.install(|| (0..chunks).into_par_iter().map(run_chunk).collect())
    } else {
        (0..chunks).into_par_iter().map(run_chunk).collect()
    };
    let t = parts.into_iter().fold(Counts::default(), |s, c| Counts {
        a: s.a + c.a,
        b: s.b + c.b,
        ab: s.ab + c.ab,
        boxed: s.boxed + c.boxed,
    });

    let (p_a, p_b, p_ab, p_box) =
        (Estimate::of(t.a, draws), Estimate::of(t.b, draws), Estimate::of(t.ab, draws), Estimate::of(t.boxed, draws));
    let (pa, pb, pab, pbox) = (p_a.value, p_b.value, p_ab.value, p_box.value);
    let slack = pa * pb - pbox;
    // Delta method on g = pA pB − pBox; A □ B ⊆ A ∩ B fixes the cross terms.
    let (va, vb, vx) = (pa * (1.0 - pa), pb * (1.0 - pb), pbox * (1.0 - pbox));
    let (cab, cax, cbx) = (pab - pa * pb, pbox - pa * pbox, pbox - pb * pbox);
    let var = pb * pb * va + pa * pa * vb + vx + 2.0 * pa * pb * cab - 2.0 * pb * cax - 2.0 * pa * cbx;
    let slack_std_error = (var.max(0.0) / draws as f64).sqrt();
    let verdict = if slack + 3.0 * slack_std_error < 0.0 { Verdict::Suspicious } else { Verdict::Consistent };
    Ok(MonteCarloReport {
        n,
        k: sampler.k(),
        draws,
        seed,
        a: a.sets(),
        b: b.sets(),
        p_a,
        p_b,
        p_ab,
        p_box,
        slack,
        slack_std_error,
        verdict,
        elapsed_ms: start.elapsed().as_millis() as u64,
    })
}
