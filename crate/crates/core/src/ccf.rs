//! The colorful coin flipper: a world of colored coins, each color with its
//! own heads probability, and a classifier that predicts the likelier face
//! per color.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::error::{Error, Result};
use crate::posterior::{
    mle, sample_truncated_parameter, smoothed_estimate, EventCounts, ProbabilityVector,
    SamplingConfig,
};

const HEADS: usize = 0;
const TAILS: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Heads,
    Tails,
}

impl Outcome {
    /// Class index used in vote tallies: heads 0, tails 1.
    pub fn index(self) -> usize {
        match self {
            Outcome::Heads => HEADS,
            Outcome::Tails => TAILS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Flip {
    pub color: usize,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CcfWorld {
    occurrence: ProbabilityVector,
    heads_prob: Vec<f64>,
    picker: WeightedIndex<f64>,
}

impl CcfWorld {
    pub fn new(occurrence: ProbabilityVector, heads_prob: Vec<f64>) -> Result<Self> {
        if occurrence.len() != heads_prob.len() {
            return Err(Error::invalid(format!(
                "{} occurrence probabilities for {} colors",
                occurrence.len(),
                heads_prob.len()
            )));
        }
        if let Some(h) = heads_prob.iter().find(|h| !(0.0..=1.0).contains(*h)) {
            return Err(Error::invalid(format!(
                "heads probability {h} outside [0, 1]"
            )));
        }
        let picker = WeightedIndex::new(occurrence.as_slice())
            .map_err(|e| Error::invalid(format!("occurrence distribution: {e}")))?;
        Ok(CcfWorld {
            occurrence,
            heads_prob,
            picker,
        })
    }

    /// A world with occurrence weights drawn uniformly from (0, 1] and then
    /// normalized, and heads probabilities drawn uniformly from [0, 1].
    pub fn random<R: Rng + ?Sized>(colors: usize, rng: &mut R) -> Result<Self> {
        if colors == 0 {
            return Err(Error::invalid("a world needs at least one color"));
        }
        let weights: Vec<f64> = (0..colors).map(|_| 1.0 - rng.random::<f64>()).collect();
        let heads: Vec<f64> = (0..colors).map(|_| rng.random::<f64>()).collect();
        let total: f64 = weights.iter().sum();
        let occurrence = weights.into_iter().map(|w| w / total).collect();
        Self::new(ProbabilityVector::from_trusted(occurrence), heads)
    }

    pub fn colors(&self) -> usize {
        self.heads_prob.len()
    }

    pub fn occurrence(&self) -> &ProbabilityVector {
        &self.occurrence
    }

    pub fn heads_prob(&self) -> &[f64] {
        &self.heads_prob
    }

    pub fn draw_flip<R: Rng + ?Sized>(&self, rng: &mut R) -> Flip {
        let color = self.picker.sample(rng);
        let outcome = if rng.random::<f64>() < self.heads_prob[color] {
            Outcome::Heads
        } else {
            Outcome::Tails
        };
        Flip { color, outcome }
    }

    /// Accuracy of the classifier that knows every heads probability.
    pub fn ptm_accuracy(&self) -> f64 {
        self.occurrence
            .as_slice()
            .iter()
            .zip(&self.heads_prob)
            .map(|(p, h)| p * h.max(1.0 - h))
            .sum()
    }
}

/// Heads/tails counts per color.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CcfStats {
    per_color: Vec<EventCounts>,
}

impl CcfStats {
    pub fn new(colors: usize) -> Self {
        CcfStats {
            per_color: (0..colors).map(|_| EventCounts::zeros(2)).collect(),
        }
    }

    pub fn record(&mut self, flip: Flip) {
        self.per_color[flip.color].increment(flip.outcome.index());
    }

    pub fn colors(&self) -> usize {
        self.per_color.len()
    }

    pub fn color(&self, color: usize) -> &EventCounts {
        &self.per_color[color]
    }

    pub fn total_flips(&self) -> u64 {
        self.per_color.iter().map(EventCounts::total).sum()
    }

    /// Maximum-likelihood model; colors never seen get 0.5.
    pub fn mle_model(&self) -> CcfModel {
        CcfModel {
            heads: self
                .per_color
                .iter()
                .map(|c| match mle(c) {
                    Ok(p) => p[HEADS],
                    Err(_) => 0.5,
                })
                .collect(),
        }
    }

    /// One committee member: an independent truncated-normal draw per color
    /// around the smoothed heads estimate.
    pub fn sample_model<R: Rng + ?Sized>(&self, cfg: &SamplingConfig, rng: &mut R) -> CcfModel {
        CcfModel {
            heads: (0..self.colors())
                .map(|color| self.sample_color(color, cfg, rng))
                .collect(),
        }
    }

    /// Draw of a single color's heads probability.
    pub fn sample_color<R: Rng + ?Sized>(
        &self,
        color: usize,
        cfg: &SamplingConfig,
        rng: &mut R,
    ) -> f64 {
        let counts = &self.per_color[color];
        let mean = smoothed_estimate(counts, cfg.smoothing())[HEADS];
        sample_truncated_parameter(mean, counts.total(), cfg.temperature(), rng)
    }
}

/// Per-color heads-probability estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct CcfModel {
    heads: Vec<f64>,
}

impl CcfModel {
    pub fn new(heads: Vec<f64>) -> Result<Self> {
        if let Some(a) = heads.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(Error::invalid(format!("heads estimate {a} outside [0, 1]")));
        }
        Ok(CcfModel { heads })
    }

    pub fn colors(&self) -> usize {
        self.heads.len()
    }

    pub fn heads(&self) -> &[f64] {
        &self.heads
    }

    pub fn heads_estimate(&self, color: usize) -> Result<f64> {
        self.heads.get(color).copied().ok_or(Error::UnknownColor {
            color,
            colors: self.heads.len(),
        })
    }

    /// Heads iff the estimate is strictly above one half.
    pub fn classify(&self, color: usize) -> Result<Outcome> {
        Ok(classify_estimate(self.heads_estimate(color)?))
    }

    /// Class distribution `(P(heads), P(tails))` for a color.
    pub fn class_probabilities(&self, color: usize) -> Result<[f64; 2]> {
        let a = self.heads_estimate(color)?;
        Ok([a, 1.0 - a])
    }

    /// Accuracy on an infinite test stream from `world`.
    pub fn expected_accuracy(&self, world: &CcfWorld) -> Result<f64> {
        if self.colors() < world.colors() {
            return Err(Error::UnknownColor {
                color: self.colors(),
                colors: self.colors(),
            });
        }
        let mut acc = 0.0;
        for (color, (&p, &h)) in world
            .occurrence
            .as_slice()
            .iter()
            .zip(&world.heads_prob)
            .enumerate()
        {
            acc += p * match self.classify(color)? {
                Outcome::Heads => h,
                Outcome::Tails => 1.0 - h,
            };
        }
        Ok(acc)
    }
}

pub fn classify_estimate(heads: f64) -> Outcome {
    if heads > 0.5 {
        Outcome::Heads
    } else {
        Outcome::Tails
    }
}
