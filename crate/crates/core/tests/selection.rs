use qbc_core::committee::VoteTally;
use qbc_core::harness::{
    baseline_config, ccf_stream, generate_synthetic_corpus, run_tagger, write_tagger_csv,
    SyntheticSpec, TaggerData,
};
use qbc_core::hmm::HmmCounts;
use qbc_core::posterior::SamplingConfig;
use qbc_core::selection::{
    run_active_learning, CcfLearner, ExampleSize, GoldOracle, Learner, LearnerState, Oracle,
    Protocol, Schedule, SelectionConfig,
};
use qbc_core::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Recording<O> {
    inner: O,
    asked: Vec<usize>,
}

impl<A, O: Oracle<A>> Oracle<A> for Recording<O> {
    fn answer(&mut self, index: usize) -> Result<A> {
        self.asked.push(index);
        self.inner.answer(index)
    }
}

/// Votes are part of the example; `learned` shifts every tally toward
/// agreement so that scores reveal whether statistics changed mid-round.
#[derive(Default)]
struct Scripted {
    learned: usize,
}

impl Learner for Scripted {
    type Example = [u32; 2];
    type Answer = ();
    type Metrics = usize;

    fn committee_votes<R: Rng + ?Sized>(
        &self,
        ex: &[u32; 2],
        _k: usize,
        _cfg: &SamplingConfig,
        _rng: &mut R,
    ) -> Result<Vec<VoteTally>> {
        Ok(vec![VoteTally::from_votes(vec![
            ex[0] + self.learned as u32,
            ex[1],
        ])])
    }

    fn size(&self, _ex: &[u32; 2]) -> ExampleSize {
        ExampleSize {
            ambiguous: 1,
            total: 2,
        }
    }

    fn learn(&mut self, _ex: &[u32; 2], _answer: &()) -> Result<()> {
        self.learned += 1;
        Ok(())
    }

    fn measure(&self) -> Result<usize> {
        Ok(self.learned)
    }
}

fn small_data(seed: u64) -> TaggerData {
    let spec = SyntheticSpec {
        tags: 6,
        vocab: 80,
        tokens: 4000,
        ambiguity: 0.6,
    };
    let s = generate_synthetic_corpus(&spec, seed).unwrap();
    let test = s.test_corpus(1000, seed);
    TaggerData::new(s.lexicon.clone(), s.corpus, test).unwrap()
}

fn cfg(protocol: Protocol, t: f64, seed: u64) -> SelectionConfig {
    let mut c = SelectionConfig::new(protocol, SamplingConfig::new(t, 0.05).unwrap(), seed);
    c.initial = 100;
    c
}

#[test]
fn two_member_is_thresholded_at_zero_with_two_members() {
    let data = small_data(1);
    let schedule = Schedule::every(0, 100, 10_000);
    let two = run_tagger(&data, &cfg(Protocol::TwoMember, 1.0, 3), &schedule).unwrap();
    let mut thr = cfg(Protocol::Thresholded { threshold: 0.0 }, 1.0, 3);
    thr.committee_size = 2;
    let thr = run_tagger(&data, &thr, &schedule).unwrap();
    assert_eq!(two.labeled, thr.labeled);
    assert!(two.labeled.len() < data.stream().0.len());

    let (world, colors, outcomes) = ccf_stream(20, 3000, 5).unwrap();
    let run = |c: &SelectionConfig| {
        run_active_learning(
            CcfLearner::new(world.clone()),
            &colors,
            &mut GoldOracle::new(outcomes.clone()),
            c,
            &schedule,
        )
        .unwrap()
        .labeled
    };
    let mut thr = cfg(Protocol::Thresholded { threshold: 0.0 }, 1.0, 7);
    thr.committee_size = 2;
    assert_eq!(run(&cfg(Protocol::TwoMember, 1.0, 7)), run(&thr));
}

#[test]
fn oracle_is_consulted_only_for_selected_examples() {
    let data = small_data(2);
    let (stream, gold) = data.stream();
    for protocol in [
        Protocol::TwoMember,
        Protocol::Thresholded { threshold: 0.3 },
        Protocol::Randomized { gain: 0.8 },
        Protocol::Batch { size: 20, quota: 3 },
    ] {
        let c = cfg(protocol, 5.0, 4);
        let learner =
            qbc_core::selection::TaggerLearner::new(data.lexicon.clone(), data.test.clone(), 0.05)
                .unwrap();
        let mut oracle = Recording {
            inner: GoldOracle::new(gold.clone()),
            asked: Vec::new(),
        };
        let out = run_active_learning(
            learner,
            &stream,
            &mut oracle,
            &c,
            &Schedule::new(vec![stream.len()]),
        )
        .unwrap();
        assert_eq!(oracle.asked, out.labeled, "{protocol:?}");
        assert_eq!(out.state.selected, out.labeled.len());
    }
}

#[test]
fn statistics_replay_from_labeled_examples_alone() {
    let data = small_data(3);
    let (stream, gold) = data.stream();
    for protocol in [Protocol::TwoMember, Protocol::Batch { size: 30, quota: 5 }] {
        let mut c = cfg(protocol, 1.0, 9);
        c.passes = 2;
        let out = run_tagger(&data, &c, &Schedule::new(vec![2 * stream.len()])).unwrap();
        let mut replay = HmmCounts::new(data.lexicon.clone());
        for &i in &out.labeled {
            let ex = &stream[i];
            replay.observe(ex.left, &ex.words, &gold[i], None).unwrap();
        }
        assert_eq!(&replay, out.state.learner.counts());
        let mut seen = out.labeled.clone();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(
            seen.len(),
            out.labeled.len(),
            "an example was labeled twice"
        );
    }
}

#[test]
fn runs_are_reproducible() {
    let data = small_data(4);
    let schedule = Schedule::every(0, 50, 2000);
    for protocol in [
        Protocol::Randomized { gain: 1.0 },
        Protocol::Batch { size: 25, quota: 5 },
    ] {
        let csv = |seed: u64| {
            let out = run_tagger(&data, &cfg(protocol, 50.0, seed), &schedule).unwrap();
            let mut buf = Vec::new();
            write_tagger_csv(&out.records, &mut buf).unwrap();
            buf
        };
        assert_eq!(csv(1), csv(1));
        assert_ne!(csv(1), csv(2));
    }
}

#[test]
fn baseline_sees_the_same_stream() {
    let data = small_data(5);
    let (stream, _) = data.stream();
    let c = cfg(Protocol::TwoMember, 1.0, 1);
    let base = run_tagger(
        &data,
        &baseline_config(&c),
        &Schedule::new(vec![stream.len()]),
    )
    .unwrap();
    assert_eq!(base.labeled, (0..stream.len()).collect::<Vec<_>>());
}

#[test]
fn batch_takes_the_most_contentious_with_ties_to_the_earliest() {
    let examples = [[3, 1], [2, 2], [4, 0], [1, 1], [2, 2], [3, 1]];
    let batch: Vec<(usize, &[u32; 2])> = examples.iter().enumerate().collect();
    let mut state = LearnerState::new(Scripted::default(), 500);
    let c = cfg(Protocol::Batch { size: 6, quota: 3 }, 1.0, 0);
    let mut oracle = GoldOracle::new(vec![(); 6]);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let picked = state
        .batch_round(&batch, 3, &c, &mut oracle, &mut rng)
        .unwrap();
    // Scores against frozen statistics: [2,2] and [1,1] are even splits.
    assert_eq!(picked, vec![1, 3, 4]);
    assert_eq!(state.examined, 6);
    assert_eq!(state.selected, 3);
    assert_eq!(state.learner.learned, 3);
    assert_eq!(state.labeled_ambiguous, 3);
    assert_eq!(state.labeled_total, 6);
}

#[test]
fn batch_scores_do_not_depend_on_thread_count() {
    let data = small_data(6);
    let (stream, _) = data.stream();
    let c = cfg(Protocol::Batch { size: 60, quota: 5 }, 50.0, 0);
    let mut learner =
        qbc_core::selection::TaggerLearner::new(data.lexicon.clone(), data.test.clone(), 0.05)
            .unwrap();
    let (_, gold) = data.stream();
    for i in 0..40 {
        learner.learn(&stream[i], &gold[i]).unwrap();
    }
    let state = LearnerState::new(learner, 500);
    let batch: Vec<_> = stream.iter().enumerate().skip(40).take(60).collect();
    let scores = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        pool.install(|| state.batch_scores(&batch, &c, &mut rng).unwrap())
    };
    assert_eq!(scores(1), scores(4));
}

#[test]
fn batch_wraps_around_without_relabeling() {
    let examples: Vec<[u32; 2]> = (0..50).map(|i| [1 + i % 3, 1]).collect();
    let mut c = cfg(Protocol::Batch { size: 10, quota: 4 }, 1.0, 0);
    c.initial = 0;
    c.passes = 3;
    let out = run_active_learning(
        Scripted::default(),
        &examples,
        &mut GoldOracle::new(vec![(); 50]),
        &c,
        &Schedule::new(vec![1000]),
    )
    .unwrap();
    // Pass one labels 20 of 50; pass two 12 of the remaining 30, and so on.
    let mut seen = out.labeled.clone();
    seen.sort_unstable();
    seen.dedup();
    assert_eq!(seen.len(), out.labeled.len());
    assert!(out.labeled.len() > 20);
    assert_eq!(out.state.examined, 50 + 30 + 18);
}

#[test]
fn randomized_gain_extremes() {
    let examples: Vec<[u32; 2]> = vec![[1, 1], [2, 0], [3, 1], [0, 2]];
    let run = |gain: f64| {
        let mut c = cfg(Protocol::Randomized { gain }, 1.0, 0);
        c.initial = 0;
        run_active_learning(
            Scripted::default(),
            &examples,
            &mut GoldOracle::new(vec![(); 4]),
            &c,
            &Schedule::new(vec![4]),
        )
        .unwrap()
        .labeled
    };
    assert!(run(0.0).is_empty());
    // Each label shifts later tallies: [2, 0] becomes [3, 0], [0, 2] becomes [2, 2].
    assert_eq!(run(1e9), vec![0, 2, 3]);
}

#[test]
fn schedules_control_records() {
    let examples: Vec<[u32; 2]> = vec![[1, 1]; 30];
    let run = |points: Vec<usize>, initial: usize| {
        let mut c = cfg(Protocol::Complete, 1.0, 0);
        c.initial = initial;
        run_active_learning(
            Scripted::default(),
            &examples,
            &mut GoldOracle::new(vec![(); 30]),
            &c,
            &Schedule::new(points),
        )
        .unwrap()
        .records
    };
    assert!(run(vec![], 0).is_empty());
    let only = run(vec![0], 0);
    assert_eq!(only.len(), 1);
    assert_eq!(only[0].examined, 0);
    let recs = run(vec![5, 10, 20, 100], 0);
    let at: Vec<usize> = recs.iter().map(|r| r.examined).collect();
    // Points past the end of the stream are never reached.
    assert_eq!(at, vec![5, 10, 20]);
    assert_eq!(recs[1].metrics, 10);
    // The initial prefix passes both 0 and 3 before the first observation.
    let recs = run(vec![0, 3, 8], 6);
    assert_eq!(
        recs.iter().map(|r| r.examined).collect::<Vec<_>>(),
        vec![3, 3, 8]
    );
}
