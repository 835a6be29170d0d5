use std::time::Instant;

use itertools::Itertools;
use num_traits::{One, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{is_bk_measure, PairDescriptor, Severity};
use crate::cube::IndexSet;
use crate::error::{Error, Result};
use crate::measures::{mixture_measure, project, weighted_k_out_of_n_measure, MixingVariable};
use crate::rational::{int, serde_ratio_opt, serde_ratio_vec, Rational};
use crate::rng::stream_rng;

const MATCHER_NOTE: &str = "projection matching is best-effort: a candidate is tagged only when its pmf equals, \
exactly, one induced by a projection on the finite grid searched; an untagged candidate may still be of projection type";

/// Where candidate mixing variables come from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CandidateSource {
    /// Every pmf on `{0,…,n}` whose entries are multiples of `1/denominator`.
    Grid { denominator: u64 },
    /// `count` pmfs with entries `u_j / Σ u`, `u_j` uniform on `0..=denominator`.
    Random { count: usize, seed: u64, denominator: u64 },
    /// Only the projection-induced candidates.
    None,
}

/// Grid of projections of `P^{(w, v)}_{k, n+m}` onto the first `n` coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionParams {
    pub max_aux_m: usize,
    /// Values the auxiliary weights `v_1, …, v_m` range over.
    #[serde(with = "serde_ratio_vec")]
    pub aux_weights: Vec<Rational>,
}

impl Default for ProjectionParams {
    fn default() -> Self {
        ProjectionParams { max_aux_m: 2, aux_weights: vec![int(1), int(2)] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub n: usize,
    #[serde(with = "serde_ratio_vec")]
    pub w: Vec<Rational>,
    pub source: CandidateSource,
    pub projections: Option<ProjectionParams>,
    /// Maximum number of candidates to classify.
    pub budget: Option<usize>,
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Origin {
    Grid,
    Random,
    Projection {
        m: usize,
        k: usize,
        #[serde(with = "serde_ratio_vec")]
        aux_weights: Vec<Rational>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Bk,
    NonBk,
    /// The mixture could not be built (e.g. a level with zero total weight).
    Invalid,
}

#[derive(Debug, Clone, Serialize)]
pub struct CandidateResult {
    pub index: usize,
    pub origin: Origin,
    #[serde(with = "serde_ratio_vec")]
    pub pmf: Vec<Rational>,
    pub classification: Classification,
    #[serde(with = "serde_ratio_opt")]
    pub min_slack: Option<Rational>,
    pub worst_pair: Option<PairDescriptor>,
    /// The projection this pmf coincides with exactly, if any.
    pub projection_match: Option<Origin>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchReport {
    pub n: usize,
    #[serde(with = "serde_ratio_vec")]
    pub w: Vec<Rational>,
    pub source: CandidateSource,
    pub candidates_total: usize,
    pub candidates_evaluated: usize,
    /// Set when the budget ran out before every candidate was classified.
    pub partial: bool,
    pub bk_count: usize,
    pub non_bk_count: usize,
    pub invalid_count: usize,
    /// `defect` if a candidate covered by a theorem (a point mass or a
    /// projection) is non-BK, `finding` for any other non-BK candidate.
    pub severity: Severity,
    pub note: String,
    pub results: Vec<CandidateResult>,
    pub elapsed_ms: u64,
}

/// Mixing variables induced by projecting `P^{(w, v)}_{k, n+m}` onto the
/// first `n` coordinates, for `1 ≤ m ≤ max_aux_m`, every multiset of
/// auxiliary weights and every `k`. Each projection is checked to coincide
/// exactly with `mixture_measure(X, w, n)`.
pub fn projection_mixing_variables(n: usize, w: &[Rational], params: &ProjectionParams) -> Result<Vec<(Origin, MixingVariable)>> {
    if w.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: w.len() });
    }
    let keep = IndexSet::from_indices(n + params.max_aux_m, &(1..=n).collect::<Vec<_>>())?;
    let mut out = Vec::new();
    for m in 1..=params.max_aux_m {
        let keep = IndexSet::new(n + m, keep.mask())?;
        for aux in params.aux_weights.iter().cloned().combinations_with_replacement(m) {
            let weights: Vec<Rational> = w.iter().cloned().chain(aux.iter().cloned()).collect();
            for k in 0..=n + m {
                let parent = match weighted_k_out_of_n_measure(k, n + m, &weights) {
                    Ok(p) => p,
                    Err(Error::NotNormalizable { .. }) => continue,
                    Err(e) => return Err(e),
                };
                let proj = project(&parent, &keep)?;
                let mut pmf = vec![Rational::zero(); n + 1];
                for c in proj.support()? {
                    pmf[c.weight()] += proj.mass(&c)?;
                }
                let x = MixingVariable::new(pmf)?;
                let mix = mixture_measure(&x, w, n)?;
                if mix != proj {
                    return Err(Error::Internal(format!("projection with m = {m}, k = {k} is not a mixture")));
                }
                out.push((Origin::Projection { m, k, aux_weights: aux.clone() }, x));
            }
        }
    }
    Ok(out)
}

fn grid_pmfs(n: usize, d: u64) -> Vec<Vec<Rational>> {
    // Compositions of d into n + 1 non-negative parts.
    fn rec(left: u64, slots: usize, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if slots == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for v in 0..=left {
            cur.push(v);
            rec(left - v, slots - 1, cur, out);
            cur.pop();
        }
    }
    let mut raw = Vec::new();
    rec(d, n + 1, &mut Vec::new(), &mut raw);
    let d = Rational::from_integer(d.into());
    raw.into_iter().map(|v| v.into_iter().map(|x| Rational::from_integer(x.into()) / &d).collect()).collect()
}

fn random_pmfs(n: usize, count: usize, seed: u64, d: u64) -> Vec<Vec<Rational>> {
    let mut rng = stream_rng(seed, 0);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let u: Vec<u64> = (0..=n).map(|_| rng.gen_range(0..=d)).collect();
        let total: u64 = u.iter().sum();
        if total == 0 {
            continue;
        }
        let total = Rational::from_integer(total.into());
        out.push(u.into_iter().map(|x| Rational::from_integer(x.into()) / &total).collect());
    }
    out
}

fn is_point_mass(pmf: &[Rational]) -> bool {
    pmf.iter().filter(|p| !p.is_zero()).count() == 1
}

/// Classifies candidate mixing variables `X` by whether `P^w_{X,n}` is BK.
pub fn search_mixtures(cfg: &SearchConfig) -> Result<SearchReport> {
    let start = Instant::now();
    crate::limits::check_cap("mixture search", cfg.n, 4)?;
    if cfg.w.len() != cfg.n {
        return Err(Error::DimensionMismatch { expected: cfg.n, found: cfg.w.len() });
    }
    let projections = match &cfg.projections {
        Some(p) => projection_mixing_variables(cfg.n, &cfg.w, p)?,
        None => Vec::new(),
    };
    let mut candidates: Vec<(Origin, Vec<Rational>)> = match &cfg.source {
        CandidateSource::Grid { denominator } => {
            if *denominator == 0 {
                return Err(Error::InvalidParameter("grid denominator must be positive".into()));
            }
            grid_pmfs(cfg.n, *denominator).into_iter().map(|p| (Origin::Grid, p)).collect()
        }
        CandidateSource::Random { count, seed, denominator } => {
            random_pmfs(cfg.n, *count, *seed, *denominator).into_iter().map(|p| (Origin::Random, p)).collect()
        }
        CandidateSource::None => Vec::new(),
    };
    candidates.extend(projections.iter().map(|(o, x)| (o.clone(), x.pmf().to_vec())));
    let total = candidates.len();
    let limit = cfg.budget.unwrap_or(total).min(total);

    let classify = |(index, (origin, pmf)): (usize, &(Origin, Vec<Rational>))| -> Result<CandidateResult> {
        let projection_match = projections.iter().find(|(_, x)| x.pmf() == pmf.as_slice()).map(|(o, _)| o.clone());
        let built = MixingVariable::new(pmf.clone()).and_then(|x| mixture_measure(&x, &cfg.w, cfg.n));
        let mut result = CandidateResult {
            index,
            origin: origin.clone(),
            pmf: pmf.clone(),
            classification: Classification::Invalid,
            min_slack: None,
            worst_pair: None,
            projection_match,
            error: None,
        };
        match built {
            Ok(mu) => {
                let v = is_bk_measure(&mu)?;
                result.classification = if v.is_bk { Classification::Bk } else { Classification::NonBk };
                result.min_slack = Some(v.min_slack);
                result.worst_pair = v.worst;
            }
            Err(e) => result.error = Some(e.to_string()),
        }
        Ok(result)
    };
    let run = || candidates[..limit].par_iter().enumerate().map(classify).collect::<Result<Vec<_>>>();
    let results = if cfg.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?
            .install(run)?
    } else {
        run()?
    };

    let count = |c: Classification| results.iter().filter(|r| r.classification == c).count();
    let proven_failure = results.iter().any(|r| {
        r.classification == Classification::NonBk
            && (matches!(r.origin, Origin::Projection { .. }) || r.projection_match.is_some() || is_point_mass(&r.pmf))
    });
    let non_bk_count = count(Classification::NonBk);
    let severity = if proven_failure {
        Severity::Defect
    } else if non_bk_count > 0 {
        Severity::Finding
    } else {
        Severity::None
    };
    let mut note = MATCHER_NOTE.to_string();
    if limit < total {
        note.push_str(&format!("; budget exhausted after {limit} of {total} candidates, report is partial"));
    }
    Ok(SearchReport {
        n: cfg.n,
        w: cfg.w.clone(),
        source: cfg.source.clone(),
        candidates_total: total,
        candidates_evaluated: limit,
        partial: limit < total,
        bk_count: count(Classification::Bk),
        non_bk_count,
        invalid_count: count(Classification::Invalid),
        severity,
        note,
        results,
        elapsed_ms: start.elapsed().as_millis() as u64,
    })
}

impl SearchConfig {
    /// Grid search with unit weights and the default projection grid.
    pub fn grid(n: usize, denominator: u64) -> SearchConfig {
        SearchConfig {
            n,
            w: vec![Rational::one(); n],
            source: CandidateSource::Grid { denominator },
            projections: Some(ProjectionParams::default()),
            budget: None,
            workers: 0,
        }
    }
}
