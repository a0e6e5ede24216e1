use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use termminer::config::PipelineConfig;
use termminer::leader::ScanOrder;
use termminer::pipeline;
use termminer::{Error, ReportOrder, TracebackMode};

/// Discover repeated keywords in untranscribed speech.
#[derive(Parser, Debug)]
#[command(name = "termminer", version, about, allow_negative_numbers = true)]
struct Cli {
    #[command(flatten)]
    global: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Overrides {
    /// TOML configuration file.
    #[arg(long, global = true, env = "TERMMINER_CONFIG")]
    config: Option<PathBuf>,
    /// Output directory for artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[arg(long, global = true)]
    boundaries: Option<PathBuf>,
    /// Pseudo transcriptions (JSON lines) to mine instead of the
    /// transcribe stage's output.
    #[arg(long, global = true)]
    transcriptions: Option<PathBuf>,
    #[arg(long, global = true)]
    truth: Option<PathBuf>,
    #[arg(long, global = true)]
    transcript: Option<PathBuf>,
    #[arg(long, global = true)]
    cluster_labels: Option<PathBuf>,
    #[arg(long, global = true)]
    stopwords: Option<PathBuf>,
    #[arg(long, global = true)]
    window_ms: Option<f64>,
    #[arg(short = 'k', long, global = true)]
    k: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    min_length: Option<usize>,
    #[arg(long = "match", global = true, allow_negative_numbers = true)]
    match_score: Option<f64>,
    #[arg(long = "mismatch", global = true, allow_negative_numbers = true)]
    mismatch_score: Option<f64>,
    #[arg(long = "gap", global = true, allow_negative_numbers = true)]
    gap_score: Option<f64>,
    /// `last-row` or `global`.
    #[arg(long, global = true)]
    traceback: Option<TracebackMode>,
    /// Worker threads for pair mining.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long = "radius-T", global = true)]
    radius_t: Option<f64>,
    #[arg(long, global = true)]
    sep_a: Option<f64>,
    #[arg(long, global = true)]
    norm_b: Option<f64>,
    #[arg(long, global = true)]
    max_rounds: Option<usize>,
    /// `frequency` or `length`.
    #[arg(long, global = true)]
    scan_order: Option<ScanOrder>,
    #[arg(long, global = true)]
    top_n: Option<usize>,
    /// `centroid-length` or `size`.
    #[arg(long, global = true)]
    order: Option<ReportOrder>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Merge boundary hypotheses and average frames per segment.
    Segment,
    /// Rank inventory sizes and train the unit codebook.
    Codebook,
    /// Label segments with codebook units.
    Transcribe,
    /// Align all utterance pairs into a subsequence bag.
    Mine,
    /// Cluster the bag into keyword clusters.
    Cluster,
    /// Score clusters against truth or a transcript.
    Evaluate,
    /// Generate a synthetic corpus with planted keywords.
    Synth {
        /// Also render frame features and boundary hypotheses.
        #[arg(long)]
        features: bool,
        #[arg(long)]
        utterances: Option<usize>,
        #[arg(long)]
        keywords: Option<usize>,
        #[arg(long)]
        substitution_rate: Option<f64>,
        #[arg(long)]
        insertion_rate: Option<f64>,
        #[arg(long)]
        deletion_rate: Option<f64>,
    },
    /// Run every applicable stage in order.
    Pipeline,
    /// Print the effective configuration as TOML.
    Config,
}

fn apply(o: &Overrides, cfg: &mut PipelineConfig) {
    fn set<T: Clone>(dst: &mut T, src: &Option<T>) {
        if let Some(v) = src {
            *dst = v.clone();
        }
    }
    fn set_opt<T: Clone>(dst: &mut Option<T>, src: &Option<T>) {
        if src.is_some() {
            *dst = src.clone();
        }
    }
    let p = &mut cfg.paths;
    set(&mut p.output_dir, &o.out);
    set_opt(&mut p.manifest, &o.manifest);
    set_opt(&mut p.boundaries_dir, &o.boundaries);
    set_opt(&mut p.transcriptions, &o.transcriptions);
    set_opt(&mut p.truth, &o.truth);
    set_opt(&mut p.transcript, &o.transcript);
    set_opt(&mut p.cluster_labels, &o.cluster_labels);
    set_opt(&mut p.stopwords, &o.stopwords);
    set(&mut cfg.segmentation.window_ms, &o.window_ms);
    set(&mut cfg.codebook.k, &o.k);
    set(&mut cfg.codebook.seed, &o.seed);
    set(&mut cfg.synth.corpus.seed, &o.seed);
    let m = &mut cfg.mining;
    set(&mut m.min_length, &o.min_length);
    set(&mut m.match_score, &o.match_score);
    set(&mut m.mismatch_score, &o.mismatch_score);
    set(&mut m.gap_score, &o.gap_score);
    set(&mut m.traceback, &o.traceback);
    set_opt(&mut m.jobs, &o.jobs);
    let c = &mut cfg.clustering;
    set(&mut c.radius_t, &o.radius_t);
    set(&mut c.sep_a, &o.sep_a);
    set(&mut c.norm_b, &o.norm_b);
    set(&mut c.max_rounds, &o.max_rounds);
    set(&mut c.scan_order, &o.scan_order);
    set(&mut c.report_top_n, &o.top_n);
    set(&mut c.report_order, &o.order);
}

fn run(cli: Cli) -> Result<(), Error> {
    let mut cfg = PipelineConfig::load(cli.global.config.as_deref(), std::env::vars())?;
    apply(&cli.global, &mut cfg);
    if let Command::Synth { features, utterances, keywords, substitution_rate, insertion_rate, deletion_rate } =
        &cli.command
    {
        let s = &mut cfg.synth;
        s.render_features |= *features;
        let c = &mut s.corpus;
        c.num_utterances = utterances.unwrap_or(c.num_utterances);
        c.num_keywords = keywords.unwrap_or(c.num_keywords);
        c.substitution_rate = substitution_rate.unwrap_or(c.substitution_rate);
        c.insertion_rate = insertion_rate.unwrap_or(c.insertion_rate);
        c.deletion_rate = deletion_rate.unwrap_or(c.deletion_rate);
    }
    cfg.validate()?;
    let out = cfg.paths.output_dir.display().to_string();
    match cli.command {
        Command::Segment => {
            let s = pipeline::run_segment(&cfg)?;
            println!("{} segments written to {out}", s.len());
        }
        Command::Codebook => {
            let cb = pipeline::run_codebook(&cfg)?;
            println!("codebook with {} units written to {out}", cb.len());
        }
        Command::Transcribe => {
            let c = pipeline::run_transcribe(&cfg)?;
            println!("{} transcriptions written to {out}", c.len());
        }
        Command::Mine => {
            let bag = pipeline::run_mine(&cfg)?;
            println!("{} bag entries written to {out}", bag.len());
        }
        Command::Cluster => {
            let r = pipeline::run_cluster(&cfg)?;
            println!("{} clusters ({} unassigned) after {} rounds", r.clusters.len(), r.unassigned.len(), r.rounds_run);
        }
        Command::Evaluate => print_summary(&pipeline::run_evaluate(&cfg)?),
        Command::Synth { .. } => {
            let (corpus, truth) = pipeline::run_synth(&cfg)?;
            println!("{} utterances with {} keywords written to {out}", corpus.len(), truth.keywords.len());
        }
        Command::Pipeline => match pipeline::run_pipeline(&cfg)? {
            Some(s) => print_summary(&s),
            None => println!("artifacts written to {out}"),
        },
        Command::Config => print!("{}", cfg.to_toml_string()),
    }
    Ok(())
}

fn print_summary(s: &pipeline::EvaluationSummary) {
    if let Some(p) = s.weighted_purity {
        println!("weighted purity: {p:.4}");
    }
    if let Some(k) = s.exact_recovered {
        println!("keywords recovered exactly: {k}");
    }
    if let Some(r) = s.matching_rate {
        println!("n-gram matching rate: {r:.4}");
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
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
