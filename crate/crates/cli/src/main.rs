use std::path::{Path, PathBuf};

use acsqg::annotate::RuleAnnotator;
use acsqg::dataset::{build_training_records, read_records};
use acsqg::filter::{dedup_exact, filter_batch, read_samples, write_samples, Generator, StubEntailment, StubQa};
use acsqg::metrics::evaluate;
use acsqg::pipeline::{
    finetune_lm, generation_sample, load_related_words, read_corpus, read_jsonl, read_sentences, run_all, run_stage,
    sample_sentences, train_s2s, write_json, write_jsonl, write_record_file, AnyLm, AnySeq2Seq, CorpusFormat, InputLine,
    PipelineConfig, ScalarKind, Stage,
};
use acsqg::sampler::{BinSpec, GenerationInput, SamplerModel};
use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

/// Answer/clue/style-aware question generation pipeline.
///
/// Without file flags a subcommand runs its pipeline stage on the work
/// directory of the config. With file flags it runs on those files instead.
#[derive(Parser)]
#[command(name = "acsqg", version)]
struct Cli {
    /// TOML pipeline config; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the config work directory.
    #[arg(long, global = true)]
    work_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Backend {
    S2s,
    Lm,
}

#[derive(Subcommand)]
enum Command {
    /// Build training records from a reading-comprehension corpus.
    Construct {
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Learn the answer/style/clue distributions.
    LearnDist {
        #[arg(long)]
        records: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample generation inputs from unlabeled sentences.
    Sample {
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        sentences: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train the seq2seq generator.
    TrainS2s {
        #[arg(long)]
        records: Option<PathBuf>,
        #[arg(long)]
        dev: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// Fine-tune the language-model generator.
    FinetuneLm {
        #[arg(long)]
        records: Option<PathBuf>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        batch: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate questions for sampled inputs.
    Generate {
        #[arg(long, value_enum)]
        backend: Option<Backend>,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        inputs: Option<PathBuf>,
        #[arg(long)]
        beam: Option<usize>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Keep samples that pass entailment and span agreement.
    Filter {
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        dropped: Option<PathBuf>,
        #[arg(long)]
        threshold: Option<f64>,
        /// Use the bundled rule adapters (the only ones in this build).
        #[arg(long)]
        stub_adapters: bool,
    },
    /// BLEU-1..4 and ROUGE-L of generated against reference questions.
    Evaluate {
        #[arg(long)]
        gen: Option<PathBuf>,
        #[arg(long = "ref")]
        reference: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every stage in order.
    RunAll,
    /// Print the effective config as TOML.
    ShowConfig,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Squad,
    Split,
}

fn print_json(v: &impl serde::Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn need<'a>(p: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    p.as_deref().with_context(|| format!("{flag} is required alongside the other file flags"))
}

fn stage(stage: Stage, config: &PipelineConfig) -> Result<()> {
    let report = run_stage(stage, config)?;
    print_json(&report)
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let mut config = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(s) = cli.seed {
        config.seed = s;
    }
    if let Some(w) = cli.work_dir {
        config.paths.work_dir = w;
    }
    let seed = config.seed;

    match cli.command {
        Command::ShowConfig => print!("{}", config.to_toml()?),
        Command::RunAll => {
            let reports = run_all(&config)?;
            print_json(&reports)?;
        }
        Command::Construct { corpus, format, out } => {
            if let Some(f) = format {
                config.paths.corpus_format = match f {
                    Format::Squad => CorpusFormat::Squad,
                    Format::Split => CorpusFormat::Split,
                };
            }
            match out {
                None => {
                    if corpus.is_some() {
                        config.paths.corpus = corpus;
                    }
                    stage(Stage::Construct, &config)?;
                }
                Some(out) => {
                    let corpus = corpus.or(config.paths.corpus.clone()).context("--corpus is required")?;
                    let samples = read_corpus(&corpus, config.paths.corpus_format)?;
                    let vocab = samples.iter().flat_map(|s| acsqg::seq2seq::question_tokens(&s.context)).collect();
                    let dict = load_related_words(&config, &vocab)?;
                    let (records, report) = build_training_records(&samples, &RuleAnnotator::new(), &dict);
                    write_record_file(&out, &records)?;
                    print_json(&json!({ "report": report, "drop_rate": report.drop_rate() }))?;
                }
            }
        }
        Command::LearnDist { records, out } => {
            if records.is_none() && out.is_none() {
                return stage(Stage::LearnDist, &config);
            }
            let records = read_records(need(&records, "--records")?)?;
            let model = SamplerModel::learn_with(&records, BinSpec::ANSWER_LENGTH, BinSpec::CLUE_DISTANCE, config.sampler.smoothing)?;
            let out = need(&out, "--out")?;
            std::fs::write(out, model.to_json()?).with_context(|| format!("writing {}", out.display()))?;
            print_json(&json!({ "records": records.len(), "style_argmax": model.stats.style_argmax() }))?;
        }
        Command::Sample { model, sentences, out } => {
            if model.is_none() && out.is_none() {
                if sentences.is_some() {
                    config.paths.sentences = sentences;
                }
                return stage(Stage::Sample, &config);
            }
            let model = SamplerModel::load(need(&model, "--model")?)?;
            let sentences = read_sentences(sentences.or(config.paths.sentences.clone()).as_deref().context("--sentences is required")?)?;
            let s = &config.sampler;
            let (inputs, counts) = sample_sentences(&sentences, &model, &s.sample_config(), s.min_sentence_tokens, s.max_sentence_tokens, seed);
            write_jsonl(need(&out, "--out")?, &inputs)?;
            print_json(&counts)?;
        }
        Command::TrainS2s { records, dev, out, epochs } => {
            if let Some(e) = epochs {
                config.seq2seq.epochs = e;
            }
            if records.is_none() && out.is_none() {
                return stage(Stage::TrainS2s, &config);
            }
            let train = read_records(need(&records, "--records")?)?;
            let dev = match &dev {
                Some(d) => read_records(d)?,
                None => Vec::new(),
            };
            let dir = need(&out, "--out")?.to_path_buf();
            let summary = match config.seq2seq.scalar {
                ScalarKind::F32 => train_s2s::<f32>(&train, &dev, &config, dir)?,
                ScalarKind::F64 => train_s2s::<f64>(&train, &dev, &config, dir)?,
            };
            print_json(&summary)?;
        }
        Command::FinetuneLm { records, epochs, batch, out } => {
            if let Some(e) = epochs {
                config.lm.epochs = e;
            }
            if let Some(b) = batch {
                config.lm.batch_size = b;
            }
            if records.is_none() && out.is_none() {
                return stage(Stage::FinetuneLm, &config);
            }
            let train = read_records(need(&records, "--records")?)?;
            let mut out = need(&out, "--out")?.to_path_buf();
            if out.is_dir() || out.extension().is_none() {
                out = out.join("lm.json");
            }
            let summary = match config.lm.scalar {
                ScalarKind::F32 => finetune_lm::<f32>(&train, &config, &out)?,
                ScalarKind::F64 => finetune_lm::<f64>(&train, &config, &out)?,
            };
            print_json(&summary)?;
        }
        Command::Generate { backend, model, inputs, beam, p, out } => {
            if let Some(b) = beam {
                config.seq2seq.beam_width = b;
            }
            if let Some(p) = p {
                config.lm.top_p = p;
            }
            if let Some(b) = backend {
                config.generate.generator = match b {
                    Backend::S2s => acsqg::pipeline::GeneratorChoice::S2s,
                    Backend::Lm => acsqg::pipeline::GeneratorChoice::Lm,
                };
            }
            if model.is_none() && inputs.is_none() && out.is_none() {
                return stage(Stage::Generate, &config);
            }
            let lines: Vec<InputLine> = read_jsonl(need(&inputs, "--inputs")?)?;
            let refs: Vec<&GenerationInput> = lines.iter().map(|l| &l.input).collect();
            let model = need(&model, "--model")?;
            let (generator, questions) = match backend.unwrap_or(Backend::S2s) {
                Backend::S2s => {
                    let m = AnySeq2Seq::load(model)?;
                    (Generator::S2s, m.generate(&refs, config.seq2seq.beam_width, m.max_question_len())?)
                }
                Backend::Lm => (Generator::Lm, AnyLm::load(model)?.generate(&refs, config.lm.top_p, config.lm.max_len, seed)?),
            };
            let samples: Vec<_> = lines.iter().zip(questions).map(|(l, q)| generation_sample(l, q, generator)).collect();
            let out = need(&out, "--out")?;
            let mut buf = Vec::new();
            write_samples(&samples, &mut buf)?;
            std::fs::write(out, buf).with_context(|| format!("writing {}", out.display()))?;
            print_json(&json!({ "generated": samples.len() }))?;
        }
        Command::Filter { input, out, dropped, threshold, stub_adapters } => {
            if let Some(t) = threshold {
                config.filter.threshold = t;
            }
            if input.is_none() && out.is_none() {
                return stage(Stage::Filter, &config);
            }
            if !stub_adapters {
                bail!("no pretrained entailment/QA adapters are bundled; pass --stub-adapters");
            }
            let mut samples = read_samples(need(&input, "--in")?)?;
            if config.filter.dedup {
                samples = dedup_exact(samples);
            }
            let (kept, drop, report) = filter_batch(samples, &StubEntailment, &StubQa, config.filter.threshold);
            let mut buf = Vec::new();
            write_samples(&kept, &mut buf)?;
            std::fs::write(need(&out, "--out")?, buf)?;
            if let Some(d) = &dropped {
                let mut buf = Vec::new();
                write_samples(&drop, &mut buf)?;
                std::fs::write(d, buf)?;
            }
            print_json(&report)?;
        }
        Command::Evaluate { gen, reference, out } => {
            if gen.is_none() && reference.is_none() {
                return stage(Stage::Evaluate, &config);
            }
            let report = evaluate(need(&gen, "--gen")?, need(&reference, "--ref")?)?;
            if let Some(o) = &out {
                write_json(o, &report)?;
            }
            print_json(&report)?;
        }
    }
    Ok(())
}
