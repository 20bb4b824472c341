//! Sampling estimator of the mutual information of a scheme.
//!
//! Symbols are drawn from the alphabet, pushed through channel and detector
//! as displacements, and outcomes are sampled with the engine's conditional
//! noise. The sample covariance of `(symbols, outcomes)` is then fed to the
//! Gaussian MI functional (plug-in estimator; its bias of roughly
//! `m / (2N ln 2)` bits is left uncorrected).
//!
//! Randomness: ChaCha20 (`rand_chacha::ChaCha20Rng`) seeded with the user
//! seed, one stream per batch (`set_stream(batch)`), standard normals via
//! `rand_distr::StandardNormal`. Batches are reduced in index order, so the
//! estimate does not depend on the number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::detection::{gaussian_mi, JointStatistics};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{LogBase, Scalar};
use crate::schemes::SchemeSpec;

pub const MIN_SAMPLES: usize = 1_000;
pub const DEFAULT_BATCHES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub samples: usize,
    pub seed: u64,
    pub batches: usize,
}

impl McConfig {
    pub fn new(samples: usize, seed: u64) -> Self {
        Self {
            samples,
            seed,
            batches: DEFAULT_BATCHES,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate<T> {
    pub estimate: T,
    /// Standard deviation of the batch estimates over `√batches`.
    pub standard_error: T,
    pub batch_estimates: Vec<T>,
}

/// Running first and second moments of the stacked `(s, o)` vector.
#[derive(Clone)]
struct Moments<T> {
    count: usize,
    sum: Vec<T>,
    outer: Matrix<T>,
}

impl<T: Scalar> Moments<T> {
    fn new(dim: usize) -> Self {
        Self {
            count: 0,
            sum: vec![T::zero(); dim],
            outer: Matrix::zeros(dim, dim),
        }
    }

    fn push(&mut self, v: &[T]) {
        self.count += 1;
        for (i, &vi) in v.iter().enumerate() {
            self.sum[i] = self.sum[i] + vi;
            for (j, &vj) in v.iter().enumerate().skip(i) {
                self.outer[(i, j)] = self.outer[(i, j)] + vi * vj;
            }
        }
    }

    fn merge(&mut self, other: &Self) {
        self.count += other.count;
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a = *a + *b;
        }
        self.outer = &self.outer + &other.outer;
    }

    fn covariance(&self) -> Matrix<T> {
        let n = T::lit(self.count as f64);
        let dim = self.sum.len();
        Matrix::from_fn(dim, dim, |i, j| {
            let (i, j) = if i <= j { (i, j) } else { (j, i) };
            let mi = self.sum[i] / n;
            let mj = self.sum[j] / n;
            (self.outer[(i, j)] - n * mi * mj) / (n - T::one())
        })
    }

    fn joint_statistics(&self, k: usize) -> Result<JointStatistics<T>> {
        let cov = self.covariance();
        let dim = cov.rows();
        let sym: Vec<usize> = (0..k).collect();
        let out: Vec<usize> = (k..dim).collect();
        JointStatistics::new(
            cov.select(&sym, &sym),
            cov.select(&sym, &out),
            cov.select(&out, &out),
        )
    }
}

fn batch_sizes(total: usize, batches: usize) -> Vec<usize> {
    (0..batches)
        .map(|b| total / batches + usize::from(b < total % batches))
        .collect()
}

/// Monte Carlo estimate of the mutual information of `spec`.
pub fn estimate_mi<T>(
    spec: &SchemeSpec<T>,
    config: McConfig,
    base: LogBase,
) -> Result<McEstimate<T>>
where
    T: Scalar,
    StandardNormal: Distribution<T>,
{
    if config.samples < MIN_SAMPLES {
        return Err(Error::TooFewSamples(config.samples, MIN_SAMPLES));
    }
    let batches = config.batches.max(2);
    let readout = spec.readout_map()?;
    let prepared = spec.prepared_state()?;
    let noise_root = readout.apply_cov(prepared.cov()).psd_sqrt();
    let symbol_root = spec.modulation.symbol_cov().psd_sqrt();
    let encode = spec.modulation.encode_map();
    let k = spec.modulation.symbol_dim();
    let m = readout.output_dim();

    let sizes = batch_sizes(config.samples, batches);
    let moments: Vec<Moments<T>> = sizes
        .par_iter()
        .enumerate()
        .map(|(b, &size)| {
            let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
            rng.set_stream(b as u64);
            let mut acc = Moments::new(k + m);
            let mut row = vec![T::zero(); k + m];
            for _ in 0..size {
                let z: Vec<T> = (0..k).map(|_| StandardNormal.sample(&mut rng)).collect();
                let symbol = symbol_root.mul_vec(&z);
                let displaced_mean = encode.mul_vec(&symbol);
                let clean = readout.apply_mean(&displaced_mean);
                let w: Vec<T> = (0..m).map(|_| StandardNormal.sample(&mut rng)).collect();
                let noise = noise_root.mul_vec(&w);
                row[..k].copy_from_slice(&symbol);
                for j in 0..m {
                    row[k + j] = clean[j] + noise[j];
                }
                acc.push(&row);
            }
            acc
        })
        .collect();

    let batch_estimates = moments
        .iter()
        .map(|mo| gaussian_mi(&mo.joint_statistics(k)?, base))
        .collect::<Result<Vec<T>>>()?;
    let mut total = Moments::new(k + m);
    for mo in &moments {
        total.merge(mo);
    }
    let estimate = gaussian_mi(&total.joint_statistics(k)?, base)?;

    let nb = T::lit(batch_estimates.len() as f64);
    let mean = batch_estimates.iter().copied().sum::<T>() / nb;
    let var = batch_estimates
        .iter()
        .map(|&e| (e - mean) * (e - mean))
        .sum::<T>()
        / (nb - T::one());
    Ok(McEstimate {
        estimate,
        standard_error: (var / nb).sqrt(),
        batch_estimates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::{build_scheme, SchemeId};

    #[test]
    fn batches_cover_all_samples() {
        let s = batch_sizes(1003, 20);
        assert_eq!(s.iter().sum::<usize>(), 1003);
        assert_eq!(s[0], 51);
        assert_eq!(s[19], 50);
    }

    #[test]
    fn too_few_samples() {
        let spec = build_scheme(SchemeId::Coh1dSingle, 1.0, 1.0, None).unwrap();
        assert_eq!(
            estimate_mi(&spec, McConfig::new(10, 1), LogBase::Bits),
            Err(Error::TooFewSamples(10, MIN_SAMPLES))
        );
    }

    #[test]
    fn zero_budget_estimates_zero() {
        let spec = build_scheme(SchemeId::EprConjugate, 0.0f64, 2.0, None).unwrap();
        let e = estimate_mi(&spec, McConfig::new(5_000, 3), LogBase::Bits).unwrap();
        assert_eq!(e.estimate, 0.0);
        assert!(e.estimate.abs() <= 3.0 * e.standard_error + f64::EPSILON);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let spec = build_scheme(SchemeId::Coh2dDouble, 1.5, 3.0, None).unwrap();
        let a = estimate_mi(&spec, McConfig::new(20_000, 99), LogBase::Bits).unwrap();
        let b = estimate_mi(&spec, McConfig::new(20_000, 99), LogBase::Bits).unwrap();
        assert_eq!(a, b);
        let c = estimate_mi(&spec, McConfig::new(20_000, 100), LogBase::Bits).unwrap();
        assert_ne!(a.estimate, c.estimate);
    }

    #[test]
    fn coherent_single_use_estimate() {
        let spec = build_scheme(SchemeId::Coh1dSingle, 1.0, 2.0, None).unwrap();
        let e = estimate_mi(&spec, McConfig::new(50_000, 7), LogBase::Bits).unwrap();
        let truth = 0.5 * (11.0f64 / 3.0).log2();
        assert!(
            (e.estimate - truth).abs() <= 3.0 * e.standard_error,
            "{e:?}"
        );
    }
}
