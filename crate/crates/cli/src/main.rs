use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qbc_core::harness::{
    generate_synthetic_corpus, run_experiment, save_corpus, save_lexicon, Backend, EntropySplit,
    ExperimentSpec, SyntheticSpec, TaggerData,
};
use qbc_core::posterior::SamplingConfig;
use qbc_core::selection::{
    Protocol, Schedule, SelectionConfig, DEFAULT_COMMITTEE, DEFAULT_TEMPERATURE,
};
use qbc_core::Error;

const TAGGER_SMOOTHING: f64 = 0.05;
const CCF_SMOOTHING: f64 = 0.5;
const TAGGER_INITIAL: usize = 1000;
const CCF_INITIAL: usize = 50;
const DEFAULT_STEP: usize = 100;

#[derive(Parser, Debug)]
#[command(
    name = "qbc",
    version,
    about = "Committee-based sample selection experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Colorful coin flipper simulation.
    Ccf(CcfArgs),
    /// Part-of-speech tagger on a tagged corpus.
    Tag(TagArgs),
    /// Writes a synthetic lexicon, training corpus and test corpus.
    GenCorpus(GenArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum ProtocolArg {
    Complete,
    #[value(alias = "two_member")]
    TwoMember,
    Thresholded,
    Randomized,
    Batch,
}

#[derive(Args, Debug)]
struct SelectionArgs {
    #[arg(long, value_enum, default_value = "two-member")]
    protocol: ProtocolArg,
    /// Committee size for thresholded, randomized and batch selection.
    #[arg(long, default_value_t = DEFAULT_COMMITTEE)]
    k: usize,
    /// Defaults to 50, or 1 for two-member selection.
    #[arg(long)]
    temperature: Option<f64>,
    /// Defaults to 0.05 for the tagger and 0.5 for the coin flipper.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    gain: Option<f64>,
    #[arg(long, default_value_t = 500)]
    batch_size: usize,
    #[arg(long, default_value_t = 5)]
    batch_quota: usize,
    /// Words (tagger) or flips (coin flipper) labeled before selection.
    #[arg(long)]
    initial: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Examined counts at which to record: `start:step:end` or a comma list.
    #[arg(long)]
    schedule: Option<String>,
    /// Passes over the example stream.
    #[arg(long, default_value_t = 1)]
    passes: usize,
    #[arg(long)]
    out: PathBuf,
    /// Also run complete training and write it next to `--out`.
    #[arg(long)]
    baseline: bool,
    /// Average disagreement over ambiguous words only.
    #[arg(long)]
    avg_ambiguous_only: bool,
}

#[derive(Args, Debug)]
struct CcfArgs {
    #[arg(long, default_value_t = 50)]
    colors: usize,
    #[arg(long, default_value_t = 20_000)]
    flips: usize,
    #[command(flatten)]
    selection: SelectionArgs,
}

#[derive(Args, Debug)]
struct TagArgs {
    #[arg(long)]
    lexicon: PathBuf,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    test_corpus: PathBuf,
    /// Shuffle training sentences with this seed.
    #[arg(long)]
    shuffle: Option<u64>,
    #[command(flatten)]
    selection: SelectionArgs,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, default_value_t = 20)]
    tags: usize,
    #[arg(long, default_value_t = 1000)]
    vocab: usize,
    #[arg(long, default_value_t = 100_000)]
    tokens: usize,
    #[arg(long, default_value_t = 0.6)]
    ambiguity: f64,
    #[arg(long, default_value_t = 20_000)]
    test_tokens: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    lexicon: PathBuf,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    test_corpus: PathBuf,
}

fn parse_schedule(text: &str) -> Result<Schedule, Error> {
    let bad = || Error::InvalidParameter(format!("cannot parse schedule {text:?}"));
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [start, step, end] => {
            let step = num(step)?;
            if step == 0 {
                return Err(bad());
            }
            Ok(Schedule::every(num(start)?, step, num(end)?))
        }
        [list] => Ok(Schedule::new(
            list.split(',').map(num).collect::<Result<Vec<_>, _>>()?,
        )),
        _ => Err(bad()),
    }
}

fn selection_config(
    args: &SelectionArgs,
    default_lambda: f64,
    default_initial: usize,
) -> Result<SelectionConfig, Error> {
    let protocol = match args.protocol {
        ProtocolArg::Complete => Protocol::Complete,
        ProtocolArg::TwoMember => Protocol::TwoMember,
        ProtocolArg::Thresholded => Protocol::Thresholded {
            threshold: args.theta.ok_or_else(|| {
                Error::InvalidParameter("thresholded selection needs --theta".into())
            })?,
        },
        ProtocolArg::Randomized => Protocol::Randomized {
            gain: args.gain.ok_or_else(|| {
                Error::InvalidParameter("randomized selection needs --gain".into())
            })?,
        },
        ProtocolArg::Batch => Protocol::Batch {
            size: args.batch_size,
            quota: args.batch_quota,
        },
    };
    let temperature = args.temperature.unwrap_or(match protocol {
        Protocol::TwoMember => 1.0,
        _ => DEFAULT_TEMPERATURE,
    });
    let sampling = SamplingConfig::new(temperature, args.lambda.unwrap_or(default_lambda))?;
    let mut cfg = SelectionConfig::new(protocol, sampling, args.seed);
    cfg.committee_size = args.k;
    cfg.initial = args.initial.unwrap_or(default_initial);
    cfg.passes = args.passes;
    cfg.ambiguous_only = args.avg_ambiguous_only;
    cfg.validate()?;
    Ok(cfg)
}

fn schedule_or(args: &SelectionArgs, stream_len: usize) -> Result<Schedule, Error> {
    match &args.schedule {
        Some(text) => parse_schedule(text),
        None => Ok(Schedule::every(0, DEFAULT_STEP, stream_len * args.passes)),
    }
}

fn print_split(name: &str, s: &EntropySplit) {
    println!(
        "entropy {name}: correct {:.4} ({} words), incorrect {:.4} ({} words)",
        s.correct_mean, s.correct, s.incorrect_mean, s.incorrect
    );
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Ccf(args) => {
            let a = &args.selection;
            let selection = selection_config(a, CCF_SMOOTHING, CCF_INITIAL)?;
            let spec = ExperimentSpec {
                backend: Backend::Ccf {
                    colors: args.colors,
                    flips: args.flips,
                },
                selection,
                schedule: schedule_or(a, args.flips)?,
                baseline: a.baseline,
            };
            for f in run_experiment(&spec, &a.out)?.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Tag(args) => {
            let a = &args.selection;
            let selection = selection_config(a, TAGGER_SMOOTHING, TAGGER_INITIAL)?;
            let data =
                TaggerData::load(&args.lexicon, &args.corpus, &args.test_corpus, args.shuffle)?;
            let schedule = schedule_or(a, data.stream().0.len())?;
            let spec = ExperimentSpec {
                backend: Backend::Tagger(data),
                selection,
                schedule,
                baseline: a.baseline,
            };
            let report = run_experiment(&spec, &a.out)?;
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            if let Some(e) = report.entropy {
                print_split("ambiguous", &e.ambiguous);
                print_split("all", &e.all);
            }
        }
        Command::GenCorpus(args) => {
            let spec = SyntheticSpec {
                tags: args.tags,
                vocab: args.vocab,
                tokens: args.tokens,
                ambiguity: args.ambiguity,
            };
            let generated = generate_synthetic_corpus(&spec, args.seed)?;
            let test = generated.test_corpus(args.test_tokens, args.seed);
            save_lexicon(&generated.lexicon, &args.lexicon)?;
            save_corpus(&generated.corpus, &generated.lexicon, &args.corpus)?;
            save_corpus(&test, &generated.lexicon, &args.test_corpus)?;
            println!(
                "{} training tokens ({} ambiguous), {} test tokens",
                generated.corpus.token_count(),
                generated.corpus.ambiguous_token_count(&generated.lexicon),
                test.token_count()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
