use rand::Rng;

use crate::ccf::{CcfStats, CcfWorld, Flip, Outcome};
use crate::committee::VoteTally;
use crate::error::{Error, Result};
use crate::posterior::SamplingConfig;

use super::{ExampleSize, Learner};

/// Coin-flipper learner. Examples are flip colors; answers are outcomes.
#[derive(Debug, Clone)]
pub struct CcfLearner {
    stats: CcfStats,
    world: CcfWorld,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CcfMetrics {
    /// Expected accuracy of the maximum-likelihood model.
    pub expected_accuracy: f64,
    /// Accuracy of the perfectly trained model.
    pub ptm_accuracy: f64,
}

impl CcfLearner {
    pub fn new(world: CcfWorld) -> Self {
        CcfLearner {
            stats: CcfStats::new(world.colors()),
            world,
        }
    }

    pub fn stats(&self) -> &CcfStats {
        &self.stats
    }

    pub fn world(&self) -> &CcfWorld {
        &self.world
    }

    fn check_color(&self, color: usize) -> Result<()> {
        if color >= self.world.colors() {
            return Err(Error::UnknownColor {
                color,
                colors: self.world.colors(),
            });
        }
        Ok(())
    }
}

impl Learner for CcfLearner {
    type Example = usize;
    type Answer = Outcome;
    type Metrics = CcfMetrics;

    /// Only the flip's color is classified, so each member needs only its
    /// draw for that color.
    fn committee_votes<R: Rng + ?Sized>(
        &self,
        &color: &usize,
        k: usize,
        cfg: &SamplingConfig,
        rng: &mut R,
    ) -> Result<Vec<VoteTally>> {
        self.check_color(color)?;
        if k < 2 {
            return Err(Error::invalid(format!(
                "committee size must be ≥ 2, got {k}"
            )));
        }
        let mut tally = VoteTally::new(2);
        for _ in 0..k {
            let heads = self.stats.sample_color(color, cfg, rng);
            tally.add(crate::ccf::classify_estimate(heads).index());
        }
        Ok(vec![tally])
    }

    fn size(&self, _: &usize) -> ExampleSize {
        ExampleSize {
            ambiguous: 1,
            total: 1,
        }
    }

    fn learn(&mut self, &color: &usize, &outcome: &Outcome) -> Result<()> {
        self.check_color(color)?;
        self.stats.record(Flip { color, outcome });
        Ok(())
    }

    fn measure(&self) -> Result<CcfMetrics> {
        Ok(CcfMetrics {
            expected_accuracy: self.stats.mle_model().expected_accuracy(&self.world)?,
            ptm_accuracy: self.world.ptm_accuracy(),
        })
    }
}
