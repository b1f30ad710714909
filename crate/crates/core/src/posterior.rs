//! Multinomial sufficient statistics and approximate posterior sampling.
//!
//! The posterior over a multinomial parameter group is approximated by
//! treating each value as an independent binomial whose parameter follows a
//! normal distribution truncated to `[0, 1]`, with mean equal to the
//! (smoothed) estimate and variance `μ(1 − μ)·t / N`. Sampled groups are then
//! renormalized onto the simplex.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Rejection attempts before a truncated draw is clamped to the nearer bound.
pub const MAX_REJECTIONS: usize = 1000;

/// Default interpolation weight towards the uniform distribution.
pub const DEFAULT_SMOOTHING: f64 = 0.05;

const SIMPLEX_TOLERANCE: f64 = 1e-9;

/// Per-value counts of one multinomial variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EventCounts {
    counts: Vec<u64>,
    total: u64,
}

impl EventCounts {
    /// All-zero counts over `value_count` values.
    ///
    /// Panics if `value_count` is zero.
    pub fn zeros(value_count: usize) -> Self {
        assert!(value_count >= 1, "a multinomial needs at least one value");
        EventCounts {
            counts: vec![0; value_count],
            total: 0,
        }
    }

    pub fn from_counts(counts: Vec<u64>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::invalid("event counts need at least one value"));
        }
        let total = counts.iter().sum();
        Ok(EventCounts { counts, total })
    }

    pub fn value_count(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn get(&self, value: usize) -> u64 {
        self.counts[value]
    }

    pub fn increment(&mut self, value: usize) {
        self.add(value, 1);
    }

    pub fn add(&mut self, value: usize, amount: u64) {
        self.counts[value] += amount;
        self.total += amount;
    }

    /// Number of values with a strictly positive count.
    pub fn nonzero(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }
}

/// Temperature and smoothing used when drawing committee members.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingConfig {
    temperature: f64,
    smoothing: f64,
}

impl SamplingConfig {
    pub fn new(temperature: f64, smoothing: f64) -> Result<Self> {
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(Error::invalid(format!(
                "temperature must be positive, got {temperature}"
            )));
        }
        if !(0.0..1.0).contains(&smoothing) {
            return Err(Error::invalid(format!(
                "smoothing must lie in [0, 1), got {smoothing}"
            )));
        }
        Ok(SamplingConfig {
            temperature,
            smoothing,
        })
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn smoothing(&self) -> f64 {
        self.smoothing
    }

    pub fn with_temperature(self, temperature: f64) -> Result<Self> {
        Self::new(temperature, self.smoothing)
    }
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            temperature: 1.0,
            smoothing: DEFAULT_SMOOTHING,
        }
    }
}

/// A point on the probability simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::invalid("probability vector is empty"));
        }
        if let Some(bad) = entries.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::invalid(format!(
                "probability entry {bad} outside [0, 1]"
            )));
        }
        let sum: f64 = entries.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(Error::invalid(format!(
                "probability entries sum to {sum}, not 1"
            )));
        }
        Ok(ProbabilityVector(entries))
    }

    pub fn uniform(len: usize) -> Self {
        ProbabilityVector(vec![1.0 / len as f64; len])
    }

    pub(crate) fn from_trusted(entries: Vec<f64>) -> Self {
        debug_assert!((entries.iter().sum::<f64>() - 1.0).abs() <= SIMPLEX_TOLERANCE);
        ProbabilityVector(entries)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Index<usize> for ProbabilityVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Maximum-likelihood estimate `n_i / N`.
pub fn mle(counts: &EventCounts) -> Result<ProbabilityVector> {
    if counts.total == 0 {
        return Err(Error::UndefinedEstimate(
            "maximum-likelihood estimate of a multinomial with no observations".into(),
        ));
    }
    let n = counts.total as f64;
    Ok(ProbabilityVector::from_trusted(
        counts.counts.iter().map(|&c| c as f64 / n).collect(),
    ))
}

/// Estimate interpolated with the uniform distribution:
/// `((1 − λ)·n_i + λ) / ((1 − λ)·N + λ·ν)`.
///
/// With no observations the result is uniform for every `λ`, including the
/// `λ → 0` limit.
pub fn smoothed_estimate(counts: &EventCounts, smoothing: f64) -> ProbabilityVector {
    let nu = counts.value_count();
    if counts.total == 0 {
        return ProbabilityVector::uniform(nu);
    }
    let keep = 1.0 - smoothing;
    let denom = keep * counts.total as f64 + smoothing * nu as f64;
    ProbabilityVector::from_trusted(
        counts
            .counts
            .iter()
            .map(|&c| (keep * c as f64 + smoothing) / denom)
            .collect(),
    )
}

/// Normal approximation to the posterior of one binomial parameter,
/// truncated to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedNormal {
    mean: f64,
    std_dev: f64,
}

impl TruncatedNormal {
    /// Posterior for estimated mean `mean` backed by `observations` trials.
    /// Zero observations are treated as one (maximal spread).
    pub fn for_estimate(mean: f64, observations: u64, temperature: f64) -> Self {
        let n_eff = observations.max(1) as f64;
        let variance = (mean * (1.0 - mean)).max(0.0) * temperature / n_eff;
        TruncatedNormal {
            mean,
            std_dev: variance.sqrt(),
        }
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Variance of the underlying (untruncated) normal.
    pub fn variance(&self) -> f64 {
        self.std_dev * self.std_dev
    }

    /// One draw from the normal before truncation.
    pub fn draw_untruncated<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        self.mean + self.std_dev * z
    }

    /// One draw restricted to `[0, 1]` by rejection; after
    /// [`MAX_REJECTIONS`] misses the last draw is clamped.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.std_dev == 0.0 {
            return self.mean.clamp(0.0, 1.0);
        }
        let mut x = self.mean;
        for _ in 0..MAX_REJECTIONS {
            x = self.draw_untruncated(rng);
            if (0.0..=1.0).contains(&x) {
                return x;
            }
        }
        x.clamp(0.0, 1.0)
    }
}

/// One draw from the truncated-normal posterior of a binomial parameter with
/// mean `mean`, `observations` trials and variance multiplier `temperature`.
pub fn sample_truncated_parameter<R: Rng + ?Sized>(
    mean: f64,
    observations: u64,
    temperature: f64,
    rng: &mut R,
) -> f64 {
    TruncatedNormal::for_estimate(mean, observations, temperature).sample(rng)
}

/// Independent truncated draws around each smoothed entry, before the
/// group is renormalized.
pub fn sample_unnormalized<R: Rng + ?Sized>(
    counts: &EventCounts,
    cfg: &SamplingConfig,
    rng: &mut R,
) -> Vec<f64> {
    let means = smoothed_estimate(counts, cfg.smoothing);
    means
        .as_slice()
        .iter()
        .map(|&mu| sample_truncated_parameter(mu, counts.total, cfg.temperature, rng))
        .collect()
}

/// A multinomial parameter vector drawn from the approximate posterior.
pub fn sample_multinomial<R: Rng + ?Sized>(
    counts: &EventCounts,
    cfg: &SamplingConfig,
    rng: &mut R,
) -> ProbabilityVector {
    loop {
        let draw = sample_unnormalized(counts, cfg, rng);
        let sum: f64 = draw.iter().sum();
        if sum > 0.0 {
            return ProbabilityVector(draw.into_iter().map(|x| x / sum).collect());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn counts(v: &[u64]) -> EventCounts {
        EventCounts::from_counts(v.to_vec()).unwrap()
    }

    #[test]
    fn event_counts_track_total() {
        let mut c = EventCounts::zeros(3);
        c.increment(0);
        c.add(2, 4);
        assert_eq!(c.total(), 5);
        assert_eq!(c.counts(), &[1, 0, 4]);
        assert_eq!(c.nonzero(), 2);
        assert!(EventCounts::from_counts(vec![]).is_err());
    }

    #[test]
    fn mle_ratios() {
        assert_eq!(mle(&counts(&[3, 1])).unwrap().as_slice(), &[0.75, 0.25]);
        assert_eq!(mle(&counts(&[5, 0])).unwrap().as_slice(), &[1.0, 0.0]);
        assert!(matches!(
            mle(&counts(&[0, 0])),
            Err(Error::UndefinedEstimate(_))
        ));
    }

    #[test]
    fn smoothed_hand_values() {
        // ((0.95·3 + 0.05) / 9.6, (0.95·7 + 0.05) / 9.6)
        let p = smoothed_estimate(&counts(&[3, 7]), 0.05);
        assert!((p[0] - 2.90 / 9.6).abs() < 1e-12);
        assert!((p[1] - 6.70 / 9.6).abs() < 1e-12);
        assert!((p[0] - 0.302083).abs() < 1e-6);
        assert!((p[1] - 0.697917).abs() < 1e-6);
    }

    #[test]
    fn smoothed_reduces_to_mle_and_uniform() {
        let c = counts(&[2, 5, 1]);
        assert_eq!(smoothed_estimate(&c, 0.0), mle(&c).unwrap());
        for lambda in [0.0, 0.05, 0.5] {
            let p = smoothed_estimate(&counts(&[0, 0, 0]), lambda);
            assert_eq!(p.as_slice(), &[1.0 / 3.0; 3]);
        }
    }

    #[test]
    fn unseen_value_gets_floor() {
        let c = counts(&[10, 0]);
        let p = smoothed_estimate(&c, 0.05);
        assert!((p[1] - 0.05 / (0.95 * 10.0 + 0.05 * 2.0)).abs() < 1e-15);
    }

    #[test]
    fn config_validation() {
        assert!(SamplingConfig::new(0.0, 0.05).is_err());
        assert!(SamplingConfig::new(1.0, 1.0).is_err());
        assert!(SamplingConfig::new(1.0, -0.1).is_err());
        assert!(SamplingConfig::new(50.0, 0.0).is_ok());
    }

    #[test]
    fn degenerate_means_have_no_spread() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in [1, 10, 1000] {
            assert_eq!(sample_truncated_parameter(0.0, n, 5.0, &mut rng), 0.0);
            assert_eq!(sample_truncated_parameter(1.0, n, 5.0, &mut rng), 1.0);
        }
    }

    #[test]
    fn single_value_group_is_certain() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let cfg = SamplingConfig::new(50.0, 0.05).unwrap();
        for c in [0, 1, 17] {
            let p = sample_multinomial(&counts(&[c]), &cfg, &mut rng);
            assert_eq!(p.as_slice(), &[1.0]);
        }
    }

    #[test]
    fn cold_sampling_returns_smoothed_estimate() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cfg = SamplingConfig::new(1e-14, 0.05).unwrap();
        let c = counts(&[4, 1, 0, 9]);
        let expected = smoothed_estimate(&c, 0.05);
        let p = sample_multinomial(&c, &cfg, &mut rng);
        for (a, b) in p.as_slice().iter().zip(expected.as_slice()) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn clamps_after_rejection_budget() {
        // Mean just inside the bound with enormous spread: rejection almost
        // never succeeds, but the result must stay in range.
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let post = TruncatedNormal::for_estimate(0.5, 1, 1e12);
        for _ in 0..20 {
            let x = post.sample(&mut rng);
            assert!((0.0..=1.0).contains(&x));
        }
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let c = counts(&[3, 8, 2]);
        let cfg = SamplingConfig::new(2.0, 0.05).unwrap();
        let a = sample_multinomial(&c, &cfg, &mut ChaCha8Rng::seed_from_u64(9));
        let b = sample_multinomial(&c, &cfg, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn smoothed_estimate_is_on_simplex(
            raw in proptest::collection::vec(0u64..1000, 1..12),
            lambda in 0.0f64..0.99,
        ) {
            let p = smoothed_estimate(&counts(&raw), lambda);
            let sum: f64 = p.as_slice().iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
            prop_assert!(p.as_slice().iter().all(|x| (0.0..=1.0).contains(x)));
        }

        #[test]
        fn sampled_vectors_are_on_simplex(
            raw in proptest::collection::vec(0u64..200, 1..10),
            lambda in 0.0f64..0.5,
            temperature in 0.01f64..100.0,
            seed in any::<u64>(),
        ) {
            let cfg = SamplingConfig::new(temperature, lambda).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = sample_multinomial(&counts(&raw), &cfg, &mut rng);
            prop_assert!(ProbabilityVector::new(p.into_vec()).is_ok());
        }
    }
}
