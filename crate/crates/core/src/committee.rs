//! Committees drawn from the posterior, their votes, and disagreement
//! measures over those votes.

use rand::Rng;

use crate::ccf::{CcfModel, CcfStats};
use crate::error::{Error, Result};
use crate::hmm::{viterbi, HmmCounts, HmmModel, Segment, SegmentModel, TagScorer};
use crate::posterior::SamplingConfig;

/// Votes of a committee on one classification slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VoteTally {
    votes: Vec<u32>,
}

impl VoteTally {
    pub fn new(class_count: usize) -> Self {
        VoteTally {
            votes: vec![0; class_count],
        }
    }

    pub fn from_votes(votes: Vec<u32>) -> Self {
        VoteTally { votes }
    }

    pub fn add(&mut self, class: usize) {
        self.votes[class] += 1;
    }

    pub fn votes(&self) -> &[u32] {
        &self.votes
    }

    pub fn class_count(&self) -> usize {
        self.votes.len()
    }

    /// Total number of votes `k`.
    pub fn total(&self) -> u32 {
        self.votes.iter().sum()
    }

    pub fn is_unanimous(&self) -> bool {
        self.votes.iter().filter(|&&v| v > 0).count() <= 1
    }

    /// Vote proportions `V(c, e) / k`, a Monte-Carlo estimate of the
    /// probability that a posterior draw assigns each class.
    pub fn proportions(&self) -> Vec<f64> {
        let k = f64::from(self.total());
        self.votes.iter().map(|&v| f64::from(v) / k).collect()
    }
}

/// Disagreement in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct DisagreementScore(f64);

impl DisagreementScore {
    pub fn new(value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::invalid(format!(
                "disagreement {value} outside [0, 1]"
            )));
        }
        Ok(DisagreementScore(value))
    }

    pub const ZERO: DisagreementScore = DisagreementScore(0.0);

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Vote entropy normalized by `log min(k, |C|)`, with `0·log 0 = 0`.
/// A slot that admits fewer than two distinct votes has no disagreement.
pub fn normalized_vote_entropy(tally: &VoteTally, class_count: usize) -> DisagreementScore {
    normalized_vote_entropy_in_base(tally, class_count, std::f64::consts::E)
}

/// [`normalized_vote_entropy`] with logarithms taken in `base`.
pub fn normalized_vote_entropy_in_base(
    tally: &VoteTally,
    class_count: usize,
    base: f64,
) -> DisagreementScore {
    let k = tally.total() as usize;
    let bound = k.min(class_count);
    if bound < 2 || tally.is_unanimous() {
        return DisagreementScore::ZERO;
    }
    // Sorting makes the sum independent of class order, bit for bit.
    let mut votes = tally.votes.clone();
    votes.sort_unstable();
    let proportions: Vec<f64> = votes.iter().map(|&v| f64::from(v) / k as f64).collect();
    let entropy = entropy_in_base(&proportions, base);
    let d = entropy / (bound as f64).log(base);
    DisagreementScore(d.clamp(0.0, 1.0))
}

fn entropy_in_base(dist: &[f64], base: f64) -> f64 {
    -dist
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.log(base))
        .sum::<f64>()
}

/// Mean over members of the entropy of each member's class distribution,
/// normalized by `log |C|`.
pub fn avg_class_distribution_entropy<D: AsRef<[f64]>>(distributions: &[D]) -> f64 {
    if distributions.is_empty() {
        return 0.0;
    }
    let total: f64 = distributions
        .iter()
        .map(|d| {
            let d = d.as_ref();
            if d.len() < 2 {
                0.0
            } else {
                entropy_in_base(d, std::f64::consts::E) / (d.len() as f64).ln()
            }
        })
        .sum();
    total / distributions.len() as f64
}

/// Arithmetic mean of per-slot disagreements.
pub fn sequence_disagreement(scores: &[DisagreementScore]) -> Result<DisagreementScore> {
    if scores.is_empty() {
        return Err(Error::invalid("disagreement of an empty sequence"));
    }
    let mean = scores.iter().map(|s| s.0).sum::<f64>() / scores.len() as f64;
    Ok(DisagreementScore(mean.clamp(0.0, 1.0)))
}

/// `k` models drawn from the same statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct Committee<M> {
    members: Vec<M>,
}

impl<M> Committee<M> {
    pub fn from_members(members: Vec<M>) -> Result<Self> {
        if members.len() < 2 {
            return Err(Error::invalid(format!(
                "a committee needs at least 2 members, got {}",
                members.len()
            )));
        }
        Ok(Committee { members })
    }

    pub fn members(&self) -> &[M] {
        &self.members
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }
}

fn check_size(k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::invalid(format!(
            "committee size must be ≥ 2, got {k}"
        )));
    }
    Ok(())
}

impl Committee<CcfModel> {
    pub fn sample<R: Rng + ?Sized>(
        stats: &CcfStats,
        k: usize,
        cfg: &SamplingConfig,
        rng: &mut R,
    ) -> Result<Self> {
        check_size(k)?;
        Self::from_members((0..k).map(|_| stats.sample_model(cfg, rng)).collect())
    }

    /// Heads/tails votes for one color.
    pub fn vote(&self, color: usize) -> Result<VoteTally> {
        let mut tally = VoteTally::new(2);
        for m in &self.members {
            tally.add(m.classify(color)?.index());
        }
        Ok(tally)
    }

    pub fn class_distribution_entropy(&self, color: usize) -> Result<f64> {
        let dists = self
            .members
            .iter()
            .map(|m| m.class_probabilities(color))
            .collect::<Result<Vec<_>>>()?;
        Ok(avg_class_distribution_entropy(&dists))
    }
}

impl Committee<HmmModel> {
    pub fn sample<R: Rng + ?Sized>(
        counts: &HmmCounts,
        k: usize,
        cfg: &SamplingConfig,
        rng: &mut R,
    ) -> Result<Self> {
        check_size(k)?;
        Self::from_members(
            (0..k)
                .map(|_| HmmModel::sample(counts, cfg, rng))
                .collect::<Result<_>>()?,
        )
    }

    /// Per-position votes of the members' Viterbi decodings.
    pub fn vote(&self, segment: &Segment) -> Result<Vec<VoteTally>> {
        tally_decodings(self.members.iter(), segment)
    }
}

/// Per-position votes over any set of decoders. Class index is the tag's
/// position in the word's allowed set.
pub fn tally_decodings<'m, S, I>(members: I, segment: &Segment) -> Result<Vec<VoteTally>>
where
    S: TagScorer + 'm + ?Sized,
    I: IntoIterator<Item = &'m S>,
{
    let mut tallies: Option<Vec<VoteTally>> = None;
    for member in members {
        let lex = member.lexicon();
        let tallies = tallies.get_or_insert_with(|| {
            segment
                .words
                .iter()
                .map(|&w| VoteTally::new(lex.allowed(w).len()))
                .collect()
        });
        let decoded = viterbi(member, segment)?;
        for ((tally, &w), &t) in tallies.iter_mut().zip(&segment.words).zip(&decoded.tags) {
            tally.add(lex.tag_position(w, t).expect("decoded tag is allowed"));
        }
    }
    Ok(tallies.unwrap_or_default())
}

/// Draws `k` segment-local members and tallies their votes on the segment.
/// Equivalent in distribution to sampling full models and voting.
pub fn segment_votes<R: Rng + ?Sized>(
    counts: &HmmCounts,
    segment: &Segment,
    k: usize,
    cfg: &SamplingConfig,
    rng: &mut R,
) -> Result<Vec<VoteTally>> {
    check_size(k)?;
    let members = (0..k)
        .map(|_| SegmentModel::sample(counts, segment, cfg, rng))
        .collect::<Result<Vec<_>>>()?;
    tally_decodings(members.iter(), segment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(votes: &[u32], classes: usize) -> f64 {
        normalized_vote_entropy(&VoteTally::from_votes(votes.to_vec()), classes).value()
    }

    #[test]
    fn vote_entropy_reference_points() {
        assert_eq!(d(&[4, 0], 2), 0.0);
        assert!((d(&[2, 2], 2) - 1.0).abs() < 1e-15);
        // −(¼ log ¼ + ¾ log ¾) / log 2
        assert!((d(&[1, 3], 2) - 0.811_278_124_459_132_8).abs() < 1e-12);
    }

    #[test]
    fn bound_uses_smaller_of_k_and_classes() {
        // Two members over five classes can at most split evenly.
        assert!((d(&[1, 0, 1, 0, 0], 5) - 1.0).abs() < 1e-15);
        // Five classes, five members, all different.
        assert!((d(&[1, 1, 1, 1, 1], 5) - 1.0).abs() < 1e-15);
        assert_eq!(d(&[3], 1), 0.0);
    }

    #[test]
    fn sequence_mean() {
        let s = |v: &[f64]| {
            let scores: Vec<_> = v
                .iter()
                .map(|&x| DisagreementScore::new(x).unwrap())
                .collect();
            sequence_disagreement(&scores).unwrap().value()
        };
        assert_eq!(s(&[0.0, 0.0]), 0.0);
        assert_eq!(s(&[1.0]), 1.0);
        assert!((s(&[0.0, 1.0, 0.81]) - 0.60333).abs() < 1e-5);
        assert!(sequence_disagreement(&[]).is_err());
    }

    #[test]
    fn committee_size_checked() {
        assert!(
            Committee::<CcfModel>::from_members(vec![CcfModel::new(vec![0.3]).unwrap()]).is_err()
        );
        let stats = CcfStats::new(2);
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(0);
        assert!(
            Committee::<CcfModel>::sample(&stats, 1, &SamplingConfig::default(), &mut rng).is_err()
        );
    }

    #[test]
    fn acde_of_certain_members_is_zero() {
        assert_eq!(
            avg_class_distribution_entropy(&[[1.0, 0.0], [0.0, 1.0]]),
            0.0
        );
        assert!((avg_class_distribution_entropy(&[[0.5, 0.5]]) - 1.0).abs() < 1e-15);
    }

    fn tally_strategy() -> impl Strategy<Value = (Vec<u32>, usize)> {
        (2usize..8).prop_flat_map(|classes| {
            (proptest::collection::vec(0u32..6, classes), Just(classes))
                .prop_filter("k ≥ 2", |(v, _)| v.iter().sum::<u32>() >= 2)
        })
    }

    proptest! {
        #[test]
        fn entropy_in_unit_interval((votes, classes) in tally_strategy()) {
            let x = d(&votes, classes);
            prop_assert!((0.0..=1.0).contains(&x));
            let unanimous = VoteTally::from_votes(votes.clone()).is_unanimous();
            prop_assert_eq!(x == 0.0, unanimous);
        }

        #[test]
        fn base_and_permutation_invariance((votes, classes) in tally_strategy(), rot in 0usize..8) {
            let t = VoteTally::from_votes(votes.clone());
            let natural = normalized_vote_entropy(&t, classes).value();
            for base in [2.0, 10.0, 3.7] {
                let other = normalized_vote_entropy_in_base(&t, classes, base).value();
                prop_assert!((natural - other).abs() < 1e-12);
            }
            let mut rotated = votes.clone();
            rotated.rotate_left(rot % votes.len());
            prop_assert_eq!(natural, d(&rotated, classes));
        }
    }
}
