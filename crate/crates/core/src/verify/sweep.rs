use std::io::Write;
use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{dependence_set, Inequality, PairDescriptor};
use crate::boxop::disjoint_occurrence;
use crate::cube::{full_mask, Event, IndexSet};
use crate::error::{Error, Result};
use crate::io::EventFile;
use crate::limits::{check_cap, limits};
use crate::measures::{k_out_of_n_measure, Measure, MeasureSpec};
use crate::monotone::enumerate_monotone_events;
use crate::rational::{format_ratio, serde_ratio, serde_ratio_opt, Rational};
use crate::rng::stream_rng;

const CHUNK: u64 = 4096;

/// Family of event pairs a sweep runs over.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Universe {
    /// All `2^{2^n}` events (n ≤ 3).
    AllEvents,
    /// All increasing events.
    AllMonotone,
    /// `count` pairs of events with uniformly random membership bitmaps.
    RandomSample { count: u64, seed: u64 },
}

#[derive(Debug, Clone)]
pub struct SweepOptions {
    /// Worker threads; 0 uses the ambient rayon pool.
    pub workers: usize,
    pub record_rows: bool,
    pub max_witnesses: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions { workers: 0, record_rows: false, max_witnesses: 100 }
    }
}

/// Whether a theorem covers the swept instance. A violation of a proven
/// instance is a defect in this code; anything else is a finding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    Proven,
    Exploratory,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    None,
    Defect,
    Finding,
}

#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub pair_index: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_index: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_index: Option<u64>,
    pub a: EventFile,
    pub b: EventFile,
    #[serde(with = "serde_ratio")]
    pub lhs: Rational,
    #[serde(with = "serde_ratio")]
    pub rhs: Rational,
    #[serde(with = "serde_ratio")]
    pub slack: Rational,
}

/// One CSV row.
#[derive(Debug, Clone)]
pub struct PairRow {
    pub pair_index: u64,
    pub a_index: Option<u64>,
    pub b_index: Option<u64>,
    pub lhs: Rational,
    pub rhs: Rational,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub inequality: Inequality,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measure_descriptor: Option<String>,
    pub universe: Universe,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub universe_size: Option<u64>,
    pub pairs_checked: u64,
    pub pairs_skipped: u64,
    pub violation_count: u64,
    /// The first violations in pair order, at most `max_witnesses`.
    pub violations: Vec<Violation>,
    #[serde(with = "serde_ratio_opt")]
    pub min_slack: Option<Rational>,
    pub min_slack_pair: Option<Violation>,
    pub expectation: Expectation,
    pub severity: Severity,
    pub elapsed_ms: u64,
    #[serde(skip)]
    pub rows: Vec<PairRow>,
}

impl SweepReport {
    pub fn holds(&self) -> bool {
        self.violation_count == 0
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "pair_index,a_index,b_index,lhs,rhs,slack,verdict")?;
        let idx = |i: Option<u64>| i.map(|v| v.to_string()).unwrap_or_default();
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                r.pair_index,
                idx(r.a_index),
                idx(r.b_index),
                format_ratio(&r.lhs),
                format_ratio(&r.rhs),
                format_ratio(&(&r.rhs - &r.lhs)),
                if r.holds { "holds" } else { "violation" }
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct BkVerdict {
    pub is_bk: bool,
    pub min_slack: Rational,
    pub worst: Option<PairDescriptor>,
    pub pairs_checked: u64,
}

/// Exhaustive BK check over all ordered pairs of increasing events (n ≤ 4).
pub fn is_bk_measure(mu: &Measure) -> Result<BkVerdict> {
    check_cap("BK measure check", mu.n(), 4)?;
    let report = sweep(Some(mu), mu.n(), &Universe::AllMonotone, Inequality::Bk, &SweepOptions::default())?;
    Ok(BkVerdict {
        is_bk: report.holds(),
        min_slack: report.min_slack.clone().expect("monotone universe is never empty"),
        worst: report.min_slack_pair.as_ref().map(|v| PairDescriptor { a: v.a.clone(), b: v.b.clone() }),
        pairs_checked: report.pairs_checked,
    })
}

fn proven_bk_family(spec: &MeasureSpec) -> bool {
    match spec {
        MeasureSpec::Product { .. }
        | MeasureSpec::KOutOfN { .. }
        | MeasureSpec::Weighted { .. }
        | MeasureSpec::Hat { .. } => true,
        MeasureSpec::Tensor { factors } => factors.iter().all(proven_bk_family),
        MeasureSpec::Projection { parent, .. } => proven_bk_family(parent),
        MeasureSpec::Mixture { .. } => false,
    }
}

fn expectation(inequality: Inequality, spec: Option<&MeasureSpec>, universe: &Universe) -> Expectation {
    let proven = match inequality {
        Inequality::Reimer | Inequality::Prop2 => true,
        Inequality::Bk | Inequality::Na => match spec {
            Some(MeasureSpec::Product { .. }) => true,
            Some(s) => *universe == Universe::AllMonotone && proven_bk_family(s),
            None => false,
        },
    };
    if proven {
        Expectation::Proven
    } else {
        Expectation::Exploratory
    }
}

struct Evaluator<'a> {
    inequality: Inequality,
    measure: Option<&'a Measure>,
    denom: BigInt,
}

impl Evaluator<'_> {
    fn weight(&self, e: &Event) -> Result<BigInt> {
        match self.measure {
            Some(mu) => mu.weight_sum(e),
            None => Ok(BigInt::from(e.len())),
        }
    }

    /// `(lhs, rhs)` scaled to a common integer denominator, or `None` for a skipped pair.
    fn eval(&self, a: &Event, b: &Event, wa: &BigInt, wb: &BigInt, deps: Option<(IndexSet, IndexSet)>) -> Result<Option<(BigInt, BigInt)>> {
        Ok(Some(match self.inequality {
            Inequality::Bk => (self.weight(&disjoint_occurrence(a, b)?)? * &self.denom, wa * wb),
            Inequality::Reimer | Inequality::Prop2 => {
                (self.weight(&disjoint_occurrence(a, b)?)?, self.weight(&a.intersection(&b.bar())?)?)
            }
            Inequality::Na => {
                let (k, l) = deps.expect("dependence sets are precomputed for NA");
                if !k.is_disjoint(&l) {
                    return Ok(None);
                }
                (self.weight(&a.intersection(b)?)? * &self.denom, wa * wb)
            }
        }))
    }

    /// Denominator that turns the scaled pair back into rationals.
    fn scale(&self) -> BigInt {
        match self.inequality {
            Inequality::Bk | Inequality::Na => &self.denom * &self.denom,
            Inequality::Prop2 => self.denom.clone(),
            Inequality::Reimer => BigInt::one(),
        }
    }
}

struct Found {
    p: u64,
    a: Event,
    b: Event,
    lhs: BigInt,
    rhs: BigInt,
}

#[derive(Default)]
struct ChunkResult {
    checked: u64,
    skipped: u64,
    violation_count: u64,
    violations: Vec<Found>,
    min: Option<Found>,
    rows: Vec<(u64, BigInt, BigInt)>,
}

/// Applies one inequality to every pair of the universe.
///
/// Pair `p` of an enumerated universe is `(events[p / |U|], events[p % |U|])`.
/// Random pairs are drawn chunk by chunk from stream `p / 4096` of the seed,
/// so the report does not depend on the worker count.
pub fn sweep(
    mu: Option<&Measure>,
    n: usize,
    universe: &Universe,
    inequality: Inequality,
    opts: &SweepOptions,
) -> Result<SweepReport> {
    let start = Instant::now();
    let lim = limits();
    match universe {
        Universe::AllEvents => check_cap("all-events universe", n, 3)?,
        Universe::AllMonotone => check_cap("monotone universe", n, lim.monotone_max_n)?,
        Universe::RandomSample { .. } => check_cap("random-event universe", n, lim.general_max_n)?,
    }
    if matches!(inequality, Inequality::Prop2 | Inequality::Na) && *universe != Universe::AllMonotone {
        return Err(Error::InvalidParameter(format!("{inequality} requires the monotone universe")));
    }

    let owned_measure;
    let measure = match inequality {
        Inequality::Bk | Inequality::Na => {
            let mu = mu.ok_or_else(|| Error::InvalidParameter(format!("{inequality} needs a measure")))?;
            if mu.n() != n {
                return Err(Error::DimensionMismatch { expected: n, found: mu.n() });
            }
            Some(mu)
        }
        Inequality::Prop2 => {
            if n % 2 != 0 {
                return Err(Error::OddDimension(n));
            }
            owned_measure = k_out_of_n_measure(n / 2, n)?;
            Some(&owned_measure)
        }
        Inequality::Reimer => None,
    };
    let denom = match measure {
        Some(m) => m.as_dense()?.denom().clone(),
        None => BigInt::one(),
    };
    let eval = Evaluator { inequality, measure, denom };

    let events: Vec<Event> = match universe {
        Universe::AllEvents => (0..1u64 << (1 << n)).map(|w| Event::from_word(n, w)).collect::<Result<_>>()?,
        Universe::AllMonotone => enumerate_monotone_events(n)?,
        Universe::RandomSample { .. } => Vec::new(),
    };
    let weights: Vec<BigInt> = events.iter().map(|e| eval.weight(e)).collect::<Result<_>>()?;
    let deps: Vec<IndexSet> = if inequality == Inequality::Na { events.iter().map(dependence_set).collect() } else { Vec::new() };
    let u = events.len() as u64;
    let total = match universe {
        Universe::RandomSample { count, .. } => *count,
        _ => u * u,
    };

    let run_chunk = |c: u64| -> Result<ChunkResult> {
        let mut out = ChunkResult::default();
        let lo = c * CHUNK;
        let hi = (lo + CHUNK).min(total);
        let mut rng = match universe {
            Universe::RandomSample { seed, .. } => Some(stream_rng(*seed, c)),
            _ => None,
        };
        let word_mask = if n <= 6 { full_mask(1 << n) } else { 0 };
        for p in lo..hi {
            let (a, b, wa, wb, dep);
            let (ra, rb);
            let (wa_owned, wb_owned);
            if let Some(rng) = rng.as_mut() {
                ra = Event::from_word(n, rng.gen::<u64>() & word_mask)?;
                rb = Event::from_word(n, rng.gen::<u64>() & word_mask)?;
                wa_owned = eval.weight(&ra)?;
                wb_owned = eval.weight(&rb)?;
                a = &ra;
                b = &rb;
                wa = &wa_owned;
                wb = &wb_owned;
                dep = None;
            } else {
                let (i, j) = ((p / u) as usize, (p % u) as usize);
                a = &events[i];
                b = &events[j];
                wa = &weights[i];
                wb = &weights[j];
                dep = (!deps.is_empty()).then(|| (deps[i], deps[j]));
            }
            let Some((lhs, rhs)) = eval.eval(a, b, wa, wb, dep)? else {
                out.skipped += 1;
                continue;
            };
            out.checked += 1;
            let slack = &rhs - &lhs;
            if opts.record_rows {
                out.rows.push((p, lhs.clone(), rhs.clone()));
            }
            let improves = match &out.min {
                None => true,
                Some(f) => slack < &f.rhs - &f.lhs,
            };
            if slack.is_negative() {
                out.violation_count += 1;
                if out.violations.len() < opts.max_witnesses {
                    out.violations.push(Found { p, a: a.clone(), b: b.clone(), lhs: lhs.clone(), rhs: rhs.clone() });
                }
            }
            if improves {
                out.min = Some(Found { p, a: a.clone(), b: b.clone(), lhs, rhs });
            }
        }
        Ok(out)
    };

    let chunks = total.div_ceil(CHUNK);
    let results: Vec<Result<ChunkResult>> = if opts.workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.workers)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
        pool.install(|| (0..chunks).into_par_iter().map(run_chunk).collect())
    } else {
        (0..chunks).into_par_iter().map(run_chunk).collect()
    };

    let scale = eval.scale();
    let to_ratio = |x: &BigInt| Rational::new(x.clone(), scale.clone());
    let indices = |p: u64| if u > 0 { (Some(p / u), Some(p % u)) } else { (None, None) };
    let violation_of = |f: &Found| {
        let (a_index, b_index) = indices(f.p);
        Violation {
            pair_index: f.p,
            a_index,
            b_index,
            a: EventFile::describe(&f.a),
            b: EventFile::describe(&f.b),
            lhs: to_ratio(&f.lhs),
            rhs: to_ratio(&f.rhs),
            slack: to_ratio(&(&f.rhs - &f.lhs)),
        }
    };

    let mut checked = 0;
    let mut skipped = 0;
    let mut violation_count = 0;
    let mut violations = Vec::new();
    let mut min: Option<Found> = None;
    let mut rows = Vec::new();
    for r in results {
        let r = r?;
        checked += r.checked;
        skipped += r.skipped;
        violation_count += r.violation_count;
        for v in r.violations {
            if violations.len() < opts.max_witnesses {
                violations.push(violation_of(&v));
            }
        }
        if let Some(f) = r.min {
            let better = match &min {
                None => true,
                Some(cur) => &f.rhs - &f.lhs < &cur.rhs - &cur.lhs,
            };
            if better {
                min = Some(f);
            }
        }
        for (p, lhs, rhs) in r.rows {
            let (a_index, b_index) = indices(p);
            let holds = lhs <= rhs;
            rows.push(PairRow { pair_index: p, a_index, b_index, lhs: to_ratio(&lhs), rhs: to_ratio(&rhs), holds });
        }
    }

    let expectation = expectation(inequality, measure.map(|m| m.spec()), universe);
    let severity = match (violation_count, expectation) {
        (0, _) => Severity::None,
        (_, Expectation::Proven) => Severity::Defect,
        (_, Expectation::Exploratory) => Severity::Finding,
    };
    let min_slack_pair = min.as_ref().map(violation_of);
    Ok(SweepReport {
        inequality,
        n,
        measure: measure.map(|m| m.spec().clone()),
        measure_descriptor: measure.map(|m| m.spec().describe()),
        universe: universe.clone(),
        universe_size: (u > 0).then_some(u),
        pairs_checked: checked,
        pairs_skipped: skipped,
        violation_count,
        violations,
        min_slack: min_slack_pair.as_ref().map(|v| v.slack.clone()),
        min_slack_pair,
        expectation,
        severity,
        elapsed_ms: start.elapsed().as_millis() as u64,
        rows,
    })
}
