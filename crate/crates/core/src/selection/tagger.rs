use std::sync::Arc;

use rand::Rng;

use crate::committee::{segment_votes, VoteTally};
use crate::error::{Error, Result};
use crate::hmm::{
    evaluate_accuracy, Accuracy, HmmCounts, HmmModel, Lexicon, ModelSize, TagId, TaggedCorpus,
    TaggerExample,
};
use crate::posterior::SamplingConfig;

use super::{ExampleSize, Learner};

/// Tagger learner. Examples are sentence spans; answers are their gold tags.
#[derive(Debug, Clone)]
pub struct TaggerLearner {
    counts: HmmCounts,
    smoothing: f64,
    test: Arc<TaggedCorpus>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaggerMetrics {
    pub accuracy: Accuracy,
    pub size: ModelSize,
}

impl TaggerLearner {
    /// `smoothing` is used for the evaluated model; committees use the
    /// smoothing of their sampling configuration.
    pub fn new(lexicon: Arc<Lexicon>, test: Arc<TaggedCorpus>, smoothing: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&smoothing) {
            return Err(Error::invalid(format!(
                "smoothing {smoothing} outside [0, 1)"
            )));
        }
        test.validate(&lexicon)?;
        Ok(TaggerLearner {
            counts: HmmCounts::new(lexicon),
            smoothing,
            test,
        })
    }

    pub fn counts(&self) -> &HmmCounts {
        &self.counts
    }

    /// Maximum-likelihood model of the current counts.
    pub fn model(&self) -> Result<HmmModel> {
        HmmModel::mle(&self.counts, self.smoothing)
    }
}

impl Learner for TaggerLearner {
    type Example = TaggerExample;
    type Answer = Vec<TagId>;
    type Metrics = TaggerMetrics;

    fn committee_votes<R: Rng + ?Sized>(
        &self,
        example: &TaggerExample,
        k: usize,
        cfg: &SamplingConfig,
        rng: &mut R,
    ) -> Result<Vec<VoteTally>> {
        match &example.segment {
            Some(segment) => segment_votes(&self.counts, segment, k, cfg, rng),
            None => Ok(Vec::new()),
        }
    }

    fn size(&self, example: &TaggerExample) -> ExampleSize {
        ExampleSize {
            ambiguous: example.ambiguous_len(),
            total: example.len(),
        }
    }

    fn learn(&mut self, example: &TaggerExample, tags: &Vec<TagId>) -> Result<()> {
        self.counts
            .observe(example.left, &example.words, tags, None)
    }

    fn measure(&self) -> Result<TaggerMetrics> {
        let accuracy = match self.counts.tag_counts().total() {
            0 => evaluate_accuracy(
                &HmmModel::uniform(self.counts.lexicon().clone()),
                &self.test,
            )?,
            _ => evaluate_accuracy(&self.model()?, &self.test)?,
        };
        Ok(TaggerMetrics {
            accuracy,
            size: self.counts.model_size(),
        })
    }
}
