use rand::Rng;

use crate::cube::Config;
use crate::error::{Error, Result};
use crate::limits::{check_cap, CONFIG_MAX_N};
use crate::rng::stream_rng;

/// Exact sampler for the weighted k-out-of-n (conditional Poisson) measure.
///
/// Coordinates are decided in order. With `r` selections still to make at
/// coordinate `i`, the coordinate is taken with probability
/// `w_i e_{r-1}(w_{i+1..}) / e_r(w_i..)`, where `e_r` are elementary
/// symmetric polynomials of the suffix weights. The suffix table is kept in
/// log space so large `n` does not overflow. Memory is `(n+1)(k+1)` floats.
#[derive(Debug, Clone)]
pub struct WeightedSampler {
    n: usize,
    k: usize,
    log_w: Vec<f64>,
    /// `log_e[i * (k+1) + r] = ln e_r(w_i, …, w_{n-1})`.
    log_e: Vec<f64>,
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

impl WeightedSampler {
    pub fn new(k: usize, n: usize, w: Vec<f64>) -> Result<WeightedSampler> {
        if w.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: w.len() });
        }
        if k > n {
            return Err(Error::InvalidParameter(format!("k = {k} exceeds n = {n}")));
        }
        if let Some(i) = w.iter().position(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::NegativeWeight(i + 1));
        }
        let width = k + 1;
        let log_w: Vec<f64> = w.iter().map(|x| x.ln()).collect();
        let mut log_e = vec![f64::NEG_INFINITY; (n + 1) * width];
        log_e[n * width] = 0.0;
        for i in (0..n).rev() {
            for r in 0..width {
                let skip = log_e[(i + 1) * width + r];
                let take = if r == 0 { f64::NEG_INFINITY } else { log_w[i] + log_e[(i + 1) * width + r - 1] };
                log_e[i * width + r] = log_add(skip, take);
            }
        }
        if log_e[k] == f64::NEG_INFINITY {
            return Err(Error::NotNormalizable { k, n });
        }
        Ok(WeightedSampler { n, k, log_w, log_e })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// One draw, as the sorted 0-based indices of the selected coordinates.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        let width = self.k + 1;
        let mut out = Vec::with_capacity(self.k);
        let mut r = self.k;
        for i in 0..self.n {
            if r == 0 {
                break;
            }
            let p = (self.log_w[i] + self.log_e[(i + 1) * width + r - 1] - self.log_e[i * width + r]).exp();
            // Forced once the remaining coordinates are exactly the remaining picks.
            if p >= 1.0 || rng.gen::<f64>() < p {
                out.push(i);
                r -= 1;
            }
        }
        debug_assert_eq!(out.len(), self.k);
        out
    }

    pub fn draw_config<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Config> {
        check_cap("configuration", self.n, CONFIG_MAX_N)?;
        let bits = self.draw(rng).iter().fold(0u64, |acc, &i| acc | 1 << i);
        Config::new(self.n, bits)
    }
}

/// A single seeded draw.
pub fn sample_weighted_k(k: usize, n: usize, w: &[f64], seed: u64) -> Result<Config> {
    let sampler = WeightedSampler::new(k, n, w.to_vec())?;
    sampler.draw_config(&mut stream_rng(seed, 0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_selection_is_all_ones() {
        for seed in 0..20 {
            assert_eq!(sample_weighted_k(4, 4, &[1.0, 2.0, 0.5, 3.0], seed).unwrap(), Config::ones(4).unwrap());
        }
    }

    #[test]
    fn zero_weight_is_never_selected() {
        let s = WeightedSampler::new(2, 5, vec![1.0, 0.0, 3.0, 1.0, 2.0]).unwrap();
        let mut rng = stream_rng(7, 0);
        for _ in 0..2000 {
            let d = s.draw(&mut rng);
            assert_eq!(d.len(), 2);
            assert!(!d.contains(&1));
        }
    }

    #[test]
    fn draws_have_exactly_k_ones() {
        let s = WeightedSampler::new(10, 30, (1..=30).map(|i| i as f64).collect()).unwrap();
        let mut rng = stream_rng(1, 3);
        for _ in 0..500 {
            assert_eq!(s.draw_config(&mut rng).unwrap().weight(), 10);
        }
    }

    #[test]
    fn large_n_does_not_overflow() {
        let n = 10_000;
        let s = WeightedSampler::new(50, n, (0..n).map(|i| 1.0 + (i % 7) as f64).collect()).unwrap();
        let d = s.draw(&mut stream_rng(3, 0));
        assert_eq!(d.len(), 50);
        assert!(d.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn errors() {
        assert_eq!(WeightedSampler::new(2, 2, vec![1.0, 0.0]).unwrap_err(), Error::NotNormalizable { k: 2, n: 2 });
        assert_eq!(WeightedSampler::new(1, 2, vec![1.0, -1.0]).unwrap_err(), Error::NegativeWeight(2));
        assert!(WeightedSampler::new(3, 2, vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn seeded_draws_are_reproducible() {
        let w = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(sample_weighted_k(2, 5, &w, 42).unwrap(), sample_weighted_k(2, 5, &w, 42).unwrap());
    }
}
