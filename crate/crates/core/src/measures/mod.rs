//! Probability measures on {0,1}^n.
//!
//! Exact measures are dense vectors of rationals stored as integer
//! numerators over one common denominator, which keeps every sum and
//! comparison in integer arithmetic. Weighted k-out-of-n measures that are
//! too large for the dense path are kept in generative (sampler) form.

mod sampler;

use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::cube::{Config, Event, IndexSet};
use crate::error::{Error, Result};
use crate::limits::{check_cap, limits};
use crate::rational::{format_ratio, is_probability, serde_ratio_vec, Rational};

pub use sampler::{sample_weighted_k, WeightedSampler};

/// Parameters of a measure family; this is also the measure file schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureSpec {
    Product {
        #[serde(with = "serde_ratio_vec")]
        p: Vec<Rational>,
    },
    KOutOfN {
        n: usize,
        k: usize,
    },
    Weighted {
        n: usize,
        k: usize,
        #[serde(with = "serde_ratio_vec")]
        w: Vec<Rational>,
    },
    /// Uniform on pair-alternating configurations; `perm` lists π(1), …, π(m).
    Hat {
        m: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        perm: Option<Vec<usize>>,
    },
    Mixture {
        n: usize,
        #[serde(with = "serde_ratio_vec")]
        pmf: Vec<Rational>,
        #[serde(with = "serde_ratio_vec")]
        w: Vec<Rational>,
    },
    Tensor {
        factors: Vec<MeasureSpec>,
    },
    /// Marginal on the 1-based coordinates in `keep`.
    Projection {
        parent: Box<MeasureSpec>,
        keep: Vec<usize>,
    },
}

impl MeasureSpec {
    pub fn family_name(&self) -> &'static str {
        match self {
            MeasureSpec::Product { .. } => "product",
            MeasureSpec::KOutOfN { .. } => "k_out_of_n",
            MeasureSpec::Weighted { .. } => "weighted",
            MeasureSpec::Hat { .. } => "hat",
            MeasureSpec::Mixture { .. } => "mixture",
            MeasureSpec::Tensor { .. } => "tensor",
            MeasureSpec::Projection { .. } => "projection",
        }
    }

    /// Short human-readable descriptor, e.g. `P_{2,4}`.
    pub fn describe(&self) -> String {
        let list = |v: &[Rational]| v.iter().map(format_ratio).collect::<Vec<_>>().join(",");
        match self {
            MeasureSpec::Product { p } => format!("P_p(p=({}))", list(p)),
            MeasureSpec::KOutOfN { n, k } => format!("P_{{{k},{n}}}"),
            MeasureSpec::Weighted { n, k, w } => format!("P^w_{{{k},{n}}}(w=({}))", list(w)),
            MeasureSpec::Hat { m, perm: None } => format!("Phat_{m}"),
            MeasureSpec::Hat { m, perm: Some(p) } => {
                let p: Vec<String> = p.iter().map(|i| i.to_string()).collect();
                format!("Phat_{{{m},({})}}", p.join(","))
            }
            MeasureSpec::Mixture { n, pmf, w } => format!("P^w_{{X,{n}}}(pmf=({}), w=({}))", list(pmf), list(w)),
            MeasureSpec::Tensor { factors } => {
                let parts: Vec<String> = factors.iter().map(|f| f.describe()).collect();
                format!("tensor({})", parts.join(" x "))
            }
            MeasureSpec::Projection { parent, keep } => {
                let k: Vec<String> = keep.iter().map(|i| i.to_string()).collect();
                format!("proj_{{{}}}({})", k.join(","), parent.describe())
            }
        }
    }

    /// Dimension of the cube the measure lives on.
    pub fn dimension(&self) -> usize {
        match self {
            MeasureSpec::Product { p } => p.len(),
            MeasureSpec::KOutOfN { n, .. } | MeasureSpec::Weighted { n, .. } | MeasureSpec::Mixture { n, .. } => *n,
            MeasureSpec::Hat { m, .. } => *m,
            MeasureSpec::Tensor { factors } => factors.iter().map(|f| f.dimension()).sum(),
            MeasureSpec::Projection { keep, .. } => keep.len(),
        }
    }

    /// Builds the measure. Weighted and k-out-of-n families above the dense
    /// cap come back in generative mode; other families must be dense.
    pub fn build(&self) -> Result<Measure> {
        let dense_cap = limits().dense_max_n;
        match self {
            MeasureSpec::Product { p } => product_measure(p),
            MeasureSpec::KOutOfN { n, k } if *n > dense_cap => {
                Measure::generative(*k, *n, vec![1.0; *n], self.clone())
            }
            MeasureSpec::KOutOfN { n, k } => k_out_of_n_measure(*k, *n),
            MeasureSpec::Weighted { n, k, w } if *n > dense_cap => {
                check_weights(*n, w)?;
                let wf = w.iter().map(crate::rational::to_f64).collect();
                Measure::generative(*k, *n, wf, self.clone())
            }
            MeasureSpec::Weighted { n, k, w } => weighted_k_out_of_n_measure(*k, *n, w),
            MeasureSpec::Hat { m, perm: None } => hat_measure(*m),
            MeasureSpec::Hat { m, perm: Some(p) } => hat_measure_perm(*m, &Permutation::from_one_based(p)?),
            MeasureSpec::Mixture { n, pmf, w } => mixture_measure(&MixingVariable::new(pmf.clone())?, w, *n),
            MeasureSpec::Tensor { factors } => {
                let built = factors.iter().map(|f| f.build()).collect::<Result<Vec<_>>>()?;
                tensor(&built)
            }
            MeasureSpec::Projection { parent, keep } => {
                let parent = parent.build()?;
                let set = IndexSet::from_indices(parent.n(), keep)?;
                if set.len() != keep.len() {
                    return Err(Error::InvalidParameter("duplicate index in projection".into()));
                }
                project(&parent, &set)
            }
        }
    }
}

/// Exact masses `numerators[ω] / denom`.
#[derive(Debug, Clone)]
pub struct Dense {
    numerators: Vec<BigInt>,
    denom: BigInt,
}

impl Dense {
    /// Normalizes non-negative masses to total 1 and brings them to a common denominator.
    fn from_unnormalized(masses: Vec<Rational>) -> Result<Dense> {
        let total: Rational = masses.iter().sum();
        if total.is_zero() {
            return Err(Error::InvalidParameter("measure has zero total mass".into()));
        }
        let masses: Vec<Rational> = masses.into_iter().map(|m| m / &total).collect();
        let denom = masses.iter().fold(BigInt::one(), |acc, m| acc.lcm(m.denom()));
        let numerators: Vec<BigInt> = masses.iter().map(|m| m.numer() * (&denom / m.denom())).collect();
        Dense::checked(numerators, denom)
    }

    fn checked(numerators: Vec<BigInt>, denom: BigInt) -> Result<Dense> {
        if numerators.iter().any(|x| x.is_negative()) {
            return Err(Error::Internal("negative mass".into()));
        }
        let sum: BigInt = numerators.iter().sum();
        if sum != denom {
            return Err(Error::Internal(format!("masses sum to {sum}/{denom}, not 1")));
        }
        Ok(Dense { numerators, denom })
    }

    pub fn denom(&self) -> &BigInt {
        &self.denom
    }

    pub fn numerators(&self) -> &[BigInt] {
        &self.numerators
    }

    pub fn mass_bits(&self, p: u64) -> Rational {
        Rational::new(self.numerators[p as usize].clone(), self.denom.clone())
    }
}

impl PartialEq for Dense {
    fn eq(&self, other: &Self) -> bool {
        self.numerators.len() == other.numerators.len()
            && self
                .numerators
                .iter()
                .zip(&other.numerators)
                .all(|(a, b)| a * &other.denom == b * &self.denom)
    }
}

#[derive(Debug, Clone)]
pub enum Mode {
    Dense(Dense),
    Generative(Arc<WeightedSampler>),
}

/// A probability measure together with the family parameters it came from.
#[derive(Debug, Clone)]
pub struct Measure {
    n: usize,
    spec: MeasureSpec,
    mode: Mode,
}

impl PartialEq for Measure {
    /// Dense measures compare by mass vector regardless of family.
    fn eq(&self, other: &Self) -> bool {
        match (&self.mode, &other.mode) {
            (Mode::Dense(a), Mode::Dense(b)) => self.n == other.n && a == b,
            _ => self.n == other.n && self.spec == other.spec,
        }
    }
}

impl Measure {
    fn dense(n: usize, spec: MeasureSpec, dense: Dense) -> Measure {
        Measure { n, spec, mode: Mode::Dense(dense) }
    }

    fn generative(k: usize, n: usize, w: Vec<f64>, spec: MeasureSpec) -> Result<Measure> {
        let sampler = WeightedSampler::new(k, n, w)?;
        Ok(Measure { n, spec, mode: Mode::Generative(Arc::new(sampler)) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spec(&self) -> &MeasureSpec {
        &self.spec
    }

    pub fn mode(&self) -> &Mode {
        &self.mode
    }

    pub fn as_dense(&self) -> Result<&Dense> {
        match &self.mode {
            Mode::Dense(d) => Ok(d),
            Mode::Generative(_) => Err(Error::GenerativeMeasure),
        }
    }

    pub fn sampler(&self) -> Option<&WeightedSampler> {
        match &self.mode {
            Mode::Generative(s) => Some(s),
            Mode::Dense(_) => None,
        }
    }

    pub fn mass(&self, c: &Config) -> Result<Rational> {
        if c.n() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: c.n() });
        }
        Ok(self.as_dense()?.mass_bits(c.bits()))
    }

    /// All masses in configuration order.
    pub fn masses(&self) -> Result<Vec<Rational>> {
        let d = self.as_dense()?;
        Ok((0..d.numerators.len() as u64).map(|p| d.mass_bits(p)).collect())
    }

    /// Configurations with positive mass.
    pub fn support(&self) -> Result<Vec<Config>> {
        let d = self.as_dense()?;
        Ok(d.numerators
            .iter()
            .enumerate()
            .filter(|(_, x)| !x.is_zero())
            .map(|(p, _)| Config::raw(self.n, p as u64))
            .collect())
    }

    /// `Σ_{ω∈A} numerator(ω)`; divide by the denominator for `μ(A)`.
    pub fn weight_sum(&self, a: &Event) -> Result<BigInt> {
        if a.n() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: a.n() });
        }
        let d = self.as_dense()?;
        Ok(a.member_bits().map(|p| &d.numerators[p as usize]).sum())
    }
}

/// `μ(A)` exactly.
pub fn measure_of(mu: &Measure, a: &Event) -> Result<Rational> {
    let s = mu.weight_sum(a)?;
    Ok(Rational::new(s, mu.as_dense()?.denom.clone()))
}

fn dense_cap(n: usize) -> Result<()> {
    check_cap("dense measure", n, limits().dense_max_n)
}

/// Independent coordinates with `P(ω_i = 1) = p_i`.
pub fn product_measure(p: &[Rational]) -> Result<Measure> {
    let n = p.len();
    dense_cap(n)?;
    if let Some(bad) = p.iter().find(|x| !is_probability(x)) {
        return Err(Error::ProbabilityOutOfRange(format_ratio(bad)));
    }
    let one = Rational::one();
    let masses = (0..1u64 << n)
        .map(|bits| {
            (0..n).fold(Rational::one(), |acc, i| {
                if bits >> i & 1 == 1 {
                    acc * &p[i]
                } else {
                    acc * (&one - &p[i])
                }
            })
        })
        .collect();
    let spec = MeasureSpec::Product { p: p.to_vec() };
    Ok(Measure::dense(n, spec, Dense::from_unnormalized(masses)?))
}

/// Uniform on configurations with exactly `k` ones.
pub fn k_out_of_n_measure(k: usize, n: usize) -> Result<Measure> {
    dense_cap(n)?;
    if k > n {
        return Err(Error::InvalidParameter(format!("k = {k} exceeds n = {n}")));
    }
    let numerators = (0..1u64 << n)
        .map(|bits| if bits.count_ones() as usize == k { BigInt::one() } else { BigInt::zero() })
        .collect();
    let denom = num_integer::binomial(BigInt::from(n), BigInt::from(k));
    Ok(Measure::dense(n, MeasureSpec::KOutOfN { n, k }, Dense::checked(numerators, denom)?))
}

fn check_weights(n: usize, w: &[Rational]) -> Result<()> {
    if w.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: w.len() });
    }
    if let Some(i) = w.iter().position(|x| x.is_negative()) {
        return Err(Error::NegativeWeight(i + 1));
    }
    Ok(())
}

fn weighted_masses(k: usize, n: usize, w: &[Rational]) -> Result<Vec<Rational>> {
    if k > n {
        return Err(Error::InvalidParameter(format!("k = {k} exceeds n = {n}")));
    }
    check_weights(n, w)?;
    let masses: Vec<Rational> = (0..1u64 << n)
        .map(|bits| {
            if bits.count_ones() as usize != k {
                return Rational::zero();
            }
            (0..n).filter(|i| bits >> i & 1 == 1).fold(Rational::one(), |acc, i| acc * &w[i])
        })
        .collect();
    if masses.iter().all(|m| m.is_zero()) {
        return Err(Error::NotNormalizable { k, n });
    }
    Ok(masses)
}

/// Mass proportional to `∏ w_i^{ω_i}` on weight-`k` configurations.
pub fn weighted_k_out_of_n_measure(k: usize, n: usize, w: &[Rational]) -> Result<Measure> {
    dense_cap(n)?;
    let masses = weighted_masses(k, n, w)?;
    let spec = MeasureSpec::Weighted { n, k, w: w.to_vec() };
    Ok(Measure::dense(n, spec, Dense::from_unnormalized(masses)?))
}

/// A bijection on `[m]`, stored 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn identity(m: usize) -> Permutation {
        Permutation { images: (0..m).collect() }
    }

    pub fn from_zero_based(images: Vec<usize>) -> Result<Permutation> {
        let m = images.len();
        let mut seen = vec![false; m];
        for &i in &images {
            if i >= m || seen[i] {
                return Err(Error::InvalidPermutation(format!("{images:?}")));
            }
            seen[i] = true;
        }
        Ok(Permutation { images })
    }

    /// From the list `π(1), …, π(m)`.
    pub fn from_one_based(images: &[usize]) -> Result<Permutation> {
        if images.contains(&0) {
            return Err(Error::InvalidPermutation(format!("{images:?}")));
        }
        Permutation::from_zero_based(images.iter().map(|i| i - 1).collect())
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// 0-based image of 0-based `i`.
    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.images.iter().map(|i| i + 1).collect()
    }
}

/// Configurations whose coordinate pairs `(π(2i−1), π(2i))` are `(1,0)` or `(0,1)`.
pub fn hat_support(perm: &Permutation) -> Result<Vec<u64>> {
    let m = perm.len();
    if m % 2 != 0 {
        return Err(Error::OddDimension(m));
    }
    let half = m / 2;
    let mut out: Vec<u64> = (0..1u64 << half)
        .map(|choice| {
            (0..half).fold(0u64, |acc, i| {
                let (first, second) = (perm.apply(2 * i), perm.apply(2 * i + 1));
                if choice >> i & 1 == 1 {
                    acc | 1 << first
                } else {
                    acc | 1 << second
                }
            })
        })
        .collect();
    out.sort_unstable();
    Ok(out)
}

pub fn hat_measure(m: usize) -> Result<Measure> {
    hat_measure_perm(m, &Permutation::identity(m))
}

/// Uniform on the `2^{m/2}` points of the relabelled pair-alternating set.
pub fn hat_measure_perm(m: usize, perm: &Permutation) -> Result<Measure> {
    if perm.len() != m {
        return Err(Error::DimensionMismatch { expected: m, found: perm.len() });
    }
    if m % 2 != 0 {
        return Err(Error::OddDimension(m));
    }
    dense_cap(m)?;
    let mut numerators = vec![BigInt::zero(); 1 << m];
    for p in hat_support(perm)? {
        numerators[p as usize] = BigInt::one();
    }
    let denom = BigInt::one() << (m / 2);
    let is_identity = *perm == Permutation::identity(m);
    let spec = MeasureSpec::Hat { m, perm: (!is_identity).then(|| perm.to_one_based()) };
    Ok(Measure::dense(m, spec, Dense::checked(numerators, denom)?))
}

/// Product measure on the concatenated cube; the first factor takes coordinates `1..=n_1`.
pub fn tensor(measures: &[Measure]) -> Result<Measure> {
    if measures.is_empty() {
        return Err(Error::InvalidParameter("tensor of no measures".into()));
    }
    let total: usize = measures.iter().map(|m| m.n).sum();
    dense_cap(total)?;
    let mut numerators = vec![BigInt::one()];
    let mut denom = BigInt::one();
    let mut width = 0usize;
    for mu in measures {
        let d = mu.as_dense()?;
        let mut next = vec![BigInt::zero(); 1 << (width + mu.n)];
        for (low, a) in numerators.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (high, b) in d.numerators.iter().enumerate() {
                next[low | high << width] = a * b;
            }
        }
        numerators = next;
        denom *= &d.denom;
        width += mu.n;
    }
    let spec = MeasureSpec::Tensor { factors: measures.iter().map(|m| m.spec.clone()).collect() };
    Ok(Measure::dense(total, spec, Dense::checked(numerators, denom)?))
}

/// Marginal on the coordinates of `keep`, relabelled in increasing order.
pub fn project(mu: &Measure, keep: &IndexSet) -> Result<Measure> {
    if keep.n() != mu.n {
        return Err(Error::DimensionMismatch { expected: mu.n, found: keep.n() });
    }
    let d = mu.as_dense()?;
    let kept: Vec<usize> = keep.indices().into_iter().map(|i| i - 1).collect();
    let mut numerators = vec![BigInt::zero(); 1 << kept.len()];
    for (p, x) in d.numerators.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        let sigma = kept.iter().enumerate().fold(0usize, |acc, (j, &i)| acc | (p >> i & 1) << j);
        numerators[sigma] += x;
    }
    let spec = MeasureSpec::Projection { parent: Box::new(mu.spec.clone()), keep: keep.indices() };
    Ok(Measure::dense(kept.len(), spec, Dense::checked(numerators, d.denom.clone())?))
}

/// Distribution of the number of ones, `P(X = k)` for `k = 0..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingVariable {
    pmf: Vec<Rational>,
}

impl MixingVariable {
    pub fn new(pmf: Vec<Rational>) -> Result<MixingVariable> {
        if pmf.is_empty() {
            return Err(Error::InvalidParameter("empty pmf".into()));
        }
        if let Some(bad) = pmf.iter().find(|x| x.is_negative()) {
            return Err(Error::ProbabilityOutOfRange(format_ratio(bad)));
        }
        let total: Rational = pmf.iter().sum();
        if !total.is_one() {
            return Err(Error::InvalidParameter(format!("pmf sums to {}", format_ratio(&total))));
        }
        Ok(MixingVariable { pmf })
    }

    pub fn point_mass(k: usize, n: usize) -> Result<MixingVariable> {
        if k > n {
            return Err(Error::InvalidParameter(format!("k = {k} exceeds n = {n}")));
        }
        let mut pmf = vec![Rational::zero(); n + 1];
        pmf[k] = Rational::one();
        MixingVariable::new(pmf)
    }

    /// `binom(n,k) p^k (1−p)^{n−k}`.
    pub fn binomial(n: usize, p: &Rational) -> Result<MixingVariable> {
        if !is_probability(p) {
            return Err(Error::ProbabilityOutOfRange(format_ratio(p)));
        }
        let q = Rational::one() - p;
        let pmf = (0..=n)
            .map(|k| {
                let c = num_integer::binomial(BigInt::from(n), BigInt::from(k));
                Rational::from_integer(c) * num_traits::pow(p.clone(), k) * num_traits::pow(q.clone(), n - k)
            })
            .collect();
        MixingVariable::new(pmf)
    }

    /// Support bound `n` (the pmf has `n + 1` entries).
    pub fn n(&self) -> usize {
        self.pmf.len() - 1
    }

    pub fn pmf(&self) -> &[Rational] {
        &self.pmf
    }
}

/// Draw `k` from `X`, then a configuration from the weighted `k`-out-of-`n` measure.
pub fn mixture_measure(x: &MixingVariable, w: &[Rational], n: usize) -> Result<Measure> {
    if x.n() != n {
        return Err(Error::DimensionMismatch { expected: n, found: x.n() });
    }
    dense_cap(n)?;
    check_weights(n, w)?;
    let mut total = vec![Rational::zero(); 1 << n];
    for (k, pk) in x.pmf.iter().enumerate() {
        if pk.is_zero() {
            continue;
        }
        let masses = weighted_masses(k, n, w)?;
        let z: Rational = masses.iter().sum();
        for (t, m) in total.iter_mut().zip(masses) {
            if !m.is_zero() {
                *t += pk * m / &z;
            }
        }
    }
    let spec = MeasureSpec::Mixture { n, pmf: x.pmf.clone(), w: w.to_vec() };
    Ok(Measure::dense(n, spec, Dense::from_unnormalized(total)?))
}
