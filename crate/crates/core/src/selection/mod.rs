//! Selection protocols and the active-learning loop.
//!
//! A [`Learner`] wraps a backend's training statistics: it can draw a
//! committee and report per-slot votes for an unlabeled example, absorb an
//! oracle answer, and measure its current model. The loop feeds it a stream
//! of examples, consults the [`Oracle`] only for examples it decided to
//! select, and records learning-curve points on a schedule of examined
//! counts.

mod ccf;
mod tagger;

use std::collections::VecDeque;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::committee::{
    normalized_vote_entropy, sequence_disagreement, DisagreementScore, VoteTally,
};
use crate::error::{Error, Result};
use crate::posterior::SamplingConfig;

pub use self::ccf::{CcfLearner, CcfMetrics};
pub use self::tagger::{TaggerLearner, TaggerMetrics};

/// Examined examples per selection-frequency window.
pub const DEFAULT_WINDOW: usize = 500;

/// Committee size of the general protocols unless configured otherwise.
pub const DEFAULT_COMMITTEE: usize = 5;
/// Temperature of the general protocols unless configured otherwise.
pub const DEFAULT_TEMPERATURE: f64 = 50.0;
/// Committee used to relate vote entropy to tagging errors.
pub const DIAGNOSTIC_COMMITTEE: usize = DEFAULT_COMMITTEE;
pub const DIAGNOSTIC_TEMPERATURE: f64 = DEFAULT_TEMPERATURE;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Protocol {
    /// Label every example.
    Complete,
    /// Two members; select when they disagree anywhere.
    TwoMember,
    /// Select when disagreement exceeds the threshold.
    Thresholded { threshold: f64 },
    /// Select with probability `min(1, gain · D)`.
    Randomized { gain: f64 },
    /// Score `size` examples, label the `quota` with highest disagreement.
    Batch { size: usize, quota: usize },
}

impl Protocol {
    pub fn name(&self) -> &'static str {
        match self {
            Protocol::Complete => "complete",
            Protocol::TwoMember => "two-member",
            Protocol::Thresholded { .. } => "thresholded",
            Protocol::Randomized { .. } => "randomized",
            Protocol::Batch { .. } => "batch",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionConfig {
    pub protocol: Protocol,
    /// Committee size for the general protocols; two-member always uses 2.
    pub committee_size: usize,
    pub sampling: SamplingConfig,
    /// Average disagreement over ambiguous positions only.
    pub ambiguous_only: bool,
    /// Words (tagger) or flips (coin flipper) labeled before selection starts.
    pub initial: usize,
    pub window: usize,
    /// Passes over the stream, wrapping to the start; labeled examples are
    /// skipped on later passes.
    pub passes: usize,
    pub seed: u64,
}

impl SelectionConfig {
    pub fn new(protocol: Protocol, sampling: SamplingConfig, seed: u64) -> Self {
        SelectionConfig {
            protocol,
            committee_size: DEFAULT_COMMITTEE,
            sampling,
            ambiguous_only: false,
            initial: 0,
            window: DEFAULT_WINDOW,
            passes: 1,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.protocol {
            Protocol::Thresholded { threshold } if !(0.0..=1.0).contains(&threshold) => {
                return Err(Error::invalid(format!(
                    "threshold {threshold} outside [0, 1]"
                )))
            }
            Protocol::Randomized { gain } if !(gain >= 0.0 && gain.is_finite()) => {
                return Err(Error::invalid(format!("entropy gain {gain} must be ≥ 0")))
            }
            Protocol::Batch { size, quota } if size == 0 || quota > size => {
                return Err(Error::invalid(format!(
                    "batch quota {quota} must not exceed a positive batch size {size}"
                )))
            }
            _ => {}
        }
        if self.committee_size < 2 && self.uses_committee_size() {
            return Err(Error::invalid("committee size must be ≥ 2"));
        }
        if self.window == 0 {
            return Err(Error::invalid(
                "selection-frequency window must be positive",
            ));
        }
        if self.passes == 0 {
            return Err(Error::invalid(
                "at least one pass over the stream is needed",
            ));
        }
        Ok(())
    }

    fn uses_committee_size(&self) -> bool {
        !matches!(self.protocol, Protocol::Complete | Protocol::TwoMember)
    }

    /// Committee size actually used by the protocol.
    pub fn effective_k(&self) -> usize {
        match self.protocol {
            Protocol::TwoMember => 2,
            _ => self.committee_size,
        }
    }

    /// Sampling used by the protocol: two-member runs at temperature 1.
    pub fn effective_sampling(&self) -> SamplingConfig {
        match self.protocol {
            Protocol::TwoMember => self
                .sampling
                .with_temperature(1.0)
                .expect("unit temperature is valid"),
            _ => self.sampling,
        }
    }
}

/// Size of an example for cost accounting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ExampleSize {
    pub ambiguous: usize,
    pub total: usize,
}

/// Training statistics plus what is needed to vote, learn and evaluate.
pub trait Learner {
    type Example;
    type Answer;
    type Metrics: Clone;

    /// Votes of a freshly drawn `k`-member committee, one tally per
    /// ambiguous slot of the example (none when nothing is ambiguous).
    fn committee_votes<R: Rng + ?Sized>(
        &self,
        example: &Self::Example,
        k: usize,
        cfg: &SamplingConfig,
        rng: &mut R,
    ) -> Result<Vec<VoteTally>>;

    fn size(&self, example: &Self::Example) -> ExampleSize;

    /// Adds a labeled example to the statistics.
    fn learn(&mut self, example: &Self::Example, answer: &Self::Answer) -> Result<()>;

    fn measure(&self) -> Result<Self::Metrics>;
}

/// Source of gold labels, consulted only for selected examples.
pub trait Oracle<A> {
    fn answer(&mut self, index: usize) -> Result<A>;
}

/// Oracle backed by stored gold answers, indexed by stream position.
#[derive(Debug, Clone)]
pub struct GoldOracle<A> {
    answers: Vec<A>,
}

impl<A> GoldOracle<A> {
    pub fn new(answers: Vec<A>) -> Self {
        GoldOracle { answers }
    }
}

impl<A: Clone> Oracle<A> for GoldOracle<A> {
    fn answer(&mut self, index: usize) -> Result<A> {
        self.answers
            .get(index)
            .cloned()
            .ok_or_else(|| Error::Invariant(format!("no gold answer for example {index}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Select,
    Skip,
}

/// Disagreement of an example: mean normalized vote entropy over its
/// positions. Unambiguous positions count as zero unless `ambiguous_only`.
pub fn example_disagreement(
    tallies: &[VoteTally],
    size: ExampleSize,
    ambiguous_only: bool,
) -> DisagreementScore {
    let mut scores: Vec<DisagreementScore> = tallies
        .iter()
        .map(|t| normalized_vote_entropy(t, t.class_count()))
        .collect();
    if !ambiguous_only {
        let padding = size.total.saturating_sub(scores.len());
        scores.extend(std::iter::repeat_n(DisagreementScore::ZERO, padding));
    }
    sequence_disagreement(&scores).unwrap_or(DisagreementScore::ZERO)
}

/// Training statistics together with cost and selection tallies.
#[derive(Debug, Clone)]
pub struct LearnerState<L> {
    pub learner: L,
    pub examined: usize,
    pub selected: usize,
    pub labeled_ambiguous: usize,
    pub labeled_total: usize,
    window: VecDeque<bool>,
    window_len: usize,
    window_selected: usize,
}

impl<L: Learner> LearnerState<L> {
    pub fn new(learner: L, window: usize) -> Self {
        LearnerState {
            learner,
            examined: 0,
            selected: 0,
            labeled_ambiguous: 0,
            labeled_total: 0,
            window: VecDeque::with_capacity(window),
            window_len: window,
            window_selected: 0,
        }
    }

    /// Fraction of selected examples among the most recently examined.
    pub fn window_frequency(&self) -> f64 {
        if self.window.is_empty() {
            return 0.0;
        }
        self.window_selected as f64 / self.window.len() as f64
    }

    fn note_examined(&mut self, selected: bool) {
        self.examined += 1;
        if self.window.len() == self.window_len && self.window.pop_front() == Some(true) {
            self.window_selected -= 1;
        }
        self.window.push_back(selected);
        if selected {
            self.window_selected += 1;
        }
    }

    /// Queries the oracle for one example and trains on the answer.
    pub fn label<O: Oracle<L::Answer> + ?Sized>(
        &mut self,
        index: usize,
        example: &L::Example,
        oracle: &mut O,
    ) -> Result<()> {
        let answer = oracle.answer(index)?;
        self.learner.learn(example, &answer)?;
        let size = self.learner.size(example);
        self.selected += 1;
        self.labeled_ambiguous += size.ambiguous;
        self.labeled_total += size.total;
        Ok(())
    }

    fn finish_sequential<O: Oracle<L::Answer> + ?Sized>(
        &mut self,
        decision: Decision,
        index: usize,
        example: &L::Example,
        oracle: &mut O,
    ) -> Result<Decision> {
        let selected = decision == Decision::Select;
        self.note_examined(selected);
        if selected {
            self.label(index, example, oracle)?;
        }
        Ok(decision)
    }

    /// Two members drawn at `sampling`; selected iff they classify some
    /// position differently.
    pub fn two_member_step<O, R>(
        &mut self,
        index: usize,
        example: &L::Example,
        sampling: &SamplingConfig,
        oracle: &mut O,
        rng: &mut R,
    ) -> Result<Decision>
    where
        O: Oracle<L::Answer> + ?Sized,
        R: Rng + ?Sized,
    {
        let tallies = self.learner.committee_votes(example, 2, sampling, rng)?;
        let decision = if tallies.iter().any(|t| !t.is_unanimous()) {
            Decision::Select
        } else {
            Decision::Skip
        };
        self.finish_sequential(decision, index, example, oracle)
    }

    /// General sequential selection with a thresholded or randomized
    /// criterion. Returns the decision and the disagreement it was based on.
    pub fn sequential_step<O, R>(
        &mut self,
        index: usize,
        example: &L::Example,
        cfg: &SelectionConfig,
        oracle: &mut O,
        rng: &mut R,
    ) -> Result<(Decision, DisagreementScore)>
    where
        O: Oracle<L::Answer> + ?Sized,
        R: Rng + ?Sized,
    {
        let tallies = self.learner.committee_votes(
            example,
            cfg.effective_k(),
            &cfg.effective_sampling(),
            rng,
        )?;
        let d = example_disagreement(&tallies, self.learner.size(example), cfg.ambiguous_only);
        let select = match cfg.protocol {
            Protocol::Thresholded { threshold } => d.value() > threshold,
            Protocol::Randomized { gain } => {
                let p = (gain * d.value()).min(1.0);
                rng.random::<f64>() < p
            }
            other => {
                return Err(Error::invalid(format!(
                    "{} is not a general sequential protocol",
                    other.name()
                )))
            }
        };
        let decision = if select {
            Decision::Select
        } else {
            Decision::Skip
        };
        self.finish_sequential(decision, index, example, oracle)
            .map(|d_| (d_, d))
    }

    /// Scores every example of the batch against the current (frozen)
    /// statistics, then labels the `quota` most contentious; ties go to the
    /// earlier example. Returns the stream indices selected, in stream order.
    pub fn batch_round<O, R>(
        &mut self,
        batch: &[(usize, &L::Example)],
        quota: usize,
        cfg: &SelectionConfig,
        oracle: &mut O,
        rng: &mut R,
    ) -> Result<Vec<usize>>
    where
        L: Sync,
        L::Example: Sync,
        O: Oracle<L::Answer> + ?Sized,
        R: RngCore + ?Sized,
    {
        let scores = self.batch_scores(batch, cfg, rng)?;
        let mut order: Vec<usize> = (0..batch.len()).collect();
        order.sort_by(|&a, &b| {
            scores[b]
                .value()
                .total_cmp(&scores[a].value())
                .then(a.cmp(&b))
        });
        let mut chosen = vec![false; batch.len()];
        for &i in order.iter().take(quota) {
            chosen[i] = true;
        }
        for &flag in &chosen {
            self.note_examined(flag);
        }
        let mut selected = Vec::new();
        for (&(index, example), _) in batch.iter().zip(&chosen).filter(|(_, &c)| c) {
            self.label(index, example, oracle)?;
            selected.push(index);
        }
        Ok(selected)
    }

    /// Disagreement of each batch example, one fresh committee each. The
    /// committees are drawn in parallel from per-example seeds taken from
    /// `rng` in batch order, so results do not depend on scheduling.
    pub fn batch_scores<R>(
        &self,
        batch: &[(usize, &L::Example)],
        cfg: &SelectionConfig,
        rng: &mut R,
    ) -> Result<Vec<DisagreementScore>>
    where
        L: Sync,
        L::Example: Sync,
        R: RngCore + ?Sized,
    {
        let seeds: Vec<u64> = batch.iter().map(|_| rng.next_u64()).collect();
        let k = cfg.effective_k();
        let sampling = cfg.effective_sampling();
        let learner = &self.learner;
        batch
            .par_iter()
            .zip(seeds)
            .map(|(&(_, example), seed)| {
                let mut local = ChaCha8Rng::seed_from_u64(seed);
                let tallies = learner.committee_votes(example, k, &sampling, &mut local)?;
                Ok(example_disagreement(
                    &tallies,
                    learner.size(example),
                    cfg.ambiguous_only,
                ))
            })
            .collect()
    }
}

/// Examined counts at which curve points are recorded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    points: Vec<usize>,
}

impl Schedule {
    pub fn new(mut points: Vec<usize>) -> Self {
        points.sort_unstable();
        points.dedup();
        Schedule { points }
    }

    /// `start, start + step, …` up to and including `end`.
    pub fn every(start: usize, step: usize, end: usize) -> Self {
        assert!(step > 0, "schedule step must be positive");
        Self::new((start..=end).step_by(step).collect())
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn last(&self) -> Option<usize> {
        self.points.last().copied()
    }
}

/// One learning-curve point.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRecord<M> {
    pub examined: usize,
    pub selected: usize,
    pub labeled_ambiguous: usize,
    pub labeled_total: usize,
    pub sel_freq_window: f64,
    pub metrics: M,
}

struct Recorder<'s, M> {
    schedule: &'s [usize],
    next: usize,
    records: Vec<CurveRecord<M>>,
}

impl<'s, M: Clone> Recorder<'s, M> {
    fn new(schedule: &'s Schedule) -> Self {
        Recorder {
            schedule: schedule.points(),
            next: 0,
            records: Vec::new(),
        }
    }

    fn done(&self) -> bool {
        self.next >= self.schedule.len()
    }

    /// Emits a record for every schedule point reached. Points reached by
    /// the same observation share its measurement.
    fn observe<L: Learner<Metrics = M>>(&mut self, state: &LearnerState<L>) -> Result<()> {
        if self.done() || state.examined < self.schedule[self.next] {
            return Ok(());
        }
        let metrics = state.learner.measure()?;
        while !self.done() && state.examined >= self.schedule[self.next] {
            self.records.push(CurveRecord {
                examined: state.examined,
                selected: state.selected,
                labeled_ambiguous: state.labeled_ambiguous,
                labeled_total: state.labeled_total,
                sel_freq_window: state.window_frequency(),
                metrics: metrics.clone(),
            });
            self.next += 1;
        }
        Ok(())
    }
}

/// Result of an active-learning run.
#[derive(Debug, Clone)]
pub struct RunOutcome<L, M> {
    pub records: Vec<CurveRecord<M>>,
    pub state: LearnerState<L>,
    /// Stream indices labeled, in labeling order.
    pub labeled: Vec<usize>,
}

/// Runs the configured protocol over `stream`.
///
/// The first examples are labeled unconditionally until `cfg.initial` words
/// (or flips) have been labeled; they count as examined and selected. Then
/// the protocol runs until the passes are exhausted or the last schedule
/// point is reached. Each schedule point yields one record, taken the first
/// time the examined count reaches it; points never reached yield none.
pub fn run_active_learning<L, O>(
    learner: L,
    stream: &[L::Example],
    oracle: &mut O,
    cfg: &SelectionConfig,
    schedule: &Schedule,
) -> Result<RunOutcome<L, L::Metrics>>
where
    L: Learner + Sync,
    L::Example: Sync,
    O: Oracle<L::Answer> + ?Sized,
{
    cfg.validate()?;
    if stream.is_empty() {
        return Err(Error::invalid("empty example stream"));
    }
    let mut state = LearnerState::new(learner, cfg.window);
    let mut recorder = Recorder::new(schedule);
    let mut labeled = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    if recorder.done() {
        return Ok(RunOutcome {
            records: Vec::new(),
            state,
            labeled,
        });
    }

    let mut cursor = 0;
    while cursor < stream.len() && state.labeled_total < cfg.initial {
        state.note_examined(true);
        state.label(cursor, &stream[cursor], oracle)?;
        labeled.push(cursor);
        cursor += 1;
    }
    recorder.observe(&state)?;

    match cfg.protocol {
        Protocol::Batch { size, quota } => {
            let mut is_labeled = vec![false; stream.len()];
            for &i in &labeled {
                is_labeled[i] = true;
            }
            let mut pass = 0;
            while !recorder.done() && pass < cfg.passes {
                let mut batch = Vec::with_capacity(size);
                while batch.len() < size && cursor < stream.len() {
                    if !is_labeled[cursor] {
                        batch.push((cursor, &stream[cursor]));
                    }
                    cursor += 1;
                }
                if !batch.is_empty() {
                    for i in state.batch_round(&batch, quota, cfg, oracle, &mut rng)? {
                        is_labeled[i] = true;
                        labeled.push(i);
                    }
                    recorder.observe(&state)?;
                }
                if cursor >= stream.len() {
                    pass += 1;
                    cursor = 0;
                    if is_labeled.iter().all(|&l| l) {
                        break;
                    }
                }
            }
        }
        protocol => {
            let sampling = cfg.effective_sampling();
            let mut is_labeled = vec![false; stream.len()];
            for &i in &labeled {
                is_labeled[i] = true;
            }
            let mut pass = 0;
            while !recorder.done() && pass < cfg.passes {
                if cursor >= stream.len() {
                    pass += 1;
                    cursor = 0;
                    if pass == cfg.passes || is_labeled.iter().all(|&l| l) {
                        break;
                    }
                    continue;
                }
                if is_labeled[cursor] {
                    cursor += 1;
                    continue;
                }
                let example = &stream[cursor];
                let decision = match protocol {
                    Protocol::Complete => {
                        state.finish_sequential(Decision::Select, cursor, example, oracle)?
                    }
                    Protocol::TwoMember => {
                        state.two_member_step(cursor, example, &sampling, oracle, &mut rng)?
                    }
                    _ => {
                        state
                            .sequential_step(cursor, example, cfg, oracle, &mut rng)?
                            .0
                    }
                };
                if decision == Decision::Select {
                    is_labeled[cursor] = true;
                    labeled.push(cursor);
                }
                recorder.observe(&state)?;
                cursor += 1;
            }
        }
    }

    Ok(RunOutcome {
        records: recorder.records,
        state,
        labeled,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_frequency_slides() {
        let mut s = LearnerState::new(
            CcfLearner::new(
                crate::ccf::CcfWorld::random(1, &mut ChaCha8Rng::seed_from_u64(0)).unwrap(),
            ),
            4,
        );
        for sel in [true, true, false, false] {
            s.note_examined(sel);
        }
        assert_eq!(s.window_frequency(), 0.5);
        for _ in 0..2 {
            s.note_examined(false);
        }
        assert_eq!(s.window_frequency(), 0.0);
        s.note_examined(true);
        assert_eq!(s.window_frequency(), 0.25);
    }

    #[test]
    fn schedule_is_sorted_and_deduplicated() {
        assert_eq!(Schedule::new(vec![5, 0, 5, 3]).points(), &[0, 3, 5]);
        assert_eq!(Schedule::every(0, 50, 120).points(), &[0, 50, 100]);
    }

    #[test]
    fn config_validation() {
        let s = SamplingConfig::default();
        let bad = [
            Protocol::Thresholded { threshold: 1.5 },
            Protocol::Randomized { gain: -1.0 },
            Protocol::Batch { size: 5, quota: 6 },
            Protocol::Batch { size: 0, quota: 0 },
        ];
        for p in bad {
            assert!(SelectionConfig::new(p, s, 0).validate().is_err(), "{p:?}");
        }
        let mut two =
            SelectionConfig::new(Protocol::TwoMember, s.with_temperature(50.0).unwrap(), 0);
        two.committee_size = 9;
        assert!(two.validate().is_ok());
        assert_eq!(two.effective_k(), 2);
        assert_eq!(two.effective_sampling().temperature(), 1.0);
    }

    #[test]
    fn disagreement_padding() {
        let split = VoteTally::from_votes(vec![1, 1]);
        let size = ExampleSize {
            ambiguous: 1,
            total: 4,
        };
        assert_eq!(
            example_disagreement(std::slice::from_ref(&split), size, false).value(),
            0.25
        );
        assert_eq!(example_disagreement(&[split], size, true).value(), 1.0);
        assert_eq!(example_disagreement(&[], size, false).value(), 0.0);
    }
}
