mod error;
mod inputs;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use dscomp::complexity::{ComplexityConfig, ComplexityRecord, IscWeights};
use dscomp::deptree::{parse_conllu, serialize_conllu};
use dscomp::dialogue::{complexity_series, load_corpus, Layout, LoadOptions, Manifest};
use dscomp::mstdecode::{decoded_tree, mst_decode, ScoreMatrix};
use dscomp::report::{
    analyze, plot_data, read_records_csv, write_bands_csv, write_records_csv, AnalysisOptions,
};
use dscomp::stats::{BootstrapConfig, FitOptions, PositionScale};
use dscomp::synth::{generate, RoleTrend, SynthConfig};
use dscomp::treemetrics::MetricsOptions;

use error::CliError;

/// Syntactic complexity of dialogue utterances and convergence between
/// speaker roles.
#[derive(Parser)]
#[command(name = "dscomp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check every sentence of CoNLL-U inputs against tree invariants.
    Validate {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score each utterance and write the complexity record CSV.
    Score {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        scoring: ScoringArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit per-role trends and label the convergence pattern (JSON report).
    Analyze {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        scoring: ScoringArgs,
        #[command(flatten)]
        bootstrap: BootstrapArgs,
        /// Significance level for the convergence label.
        #[arg(long, default_value_t = AnalysisOptions::DEFAULT_ALPHA)]
        alpha: f64,
        /// Regress on position divided by the speaker's utterance count.
        #[arg(long)]
        normalized_position: bool,
        /// Add a position² term to the least-squares fit.
        #[arg(long)]
        quadratic: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the per-fit results CSV here.
        #[arg(long)]
        results_csv: Option<PathBuf>,
        /// Also write the bands CSV here.
        #[arg(long)]
        bands_csv: Option<PathBuf>,
    },
    /// Bootstrap bands of mean complexity over normalized position (CSV).
    Plotdata {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        scoring: ScoringArgs,
        #[command(flatten)]
        bootstrap: BootstrapArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decode the best single-root tree from a JSON score matrix.
    Decode {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic record CSV with known per-role trends.
    #[command(hide = true)]
    Synth(SynthArgs),
}

#[derive(Args)]
struct CorpusArgs {
    /// CoNLL-U files or directories of them; analyze and plotdata also take
    /// a single record CSV.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// CSV mapping `dialogue_id,utterance_id` to `speaker`.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = LayoutArg::Concatenated)]
    layout: LayoutArg,
    /// Drop invalid sentences and malformed dialogues with a warning.
    #[arg(long)]
    lenient: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum LayoutArg {
    /// Dialogue ids come from `# dialogue_id` comments.
    Concatenated,
    /// One dialogue per file, named after the file.
    PerFile,
}

#[derive(Args)]
struct ScoringArgs {
    /// Weight of the length-per-head term.
    #[arg(long, default_value_t = ComplexityConfig::DEFAULT_LAMBDA)]
    lambda: f64,
    /// `unit`, `classic`, or four weights `sconj,wh,nonfinite,nominal`.
    #[arg(long, default_value = "unit")]
    isc_weights: IscWeights,
    /// Leave punctuation out of sentence length.
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    exclude_punct: bool,
    /// Also leave punctuation out of depth and branching.
    #[arg(long)]
    exclude_punct_structure: bool,
}

#[derive(Args)]
struct BootstrapArgs {
    #[arg(long, default_value_t = BootstrapConfig::DEFAULT_BINS)]
    bins: usize,
    #[arg(long, default_value_t = BootstrapConfig::DEFAULT_RESAMPLES)]
    resamples: usize,
    #[arg(long, default_value_t = BootstrapConfig::DEFAULT_SEED)]
    seed: u64,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 200)]
    dialogues: usize,
    #[arg(long, default_value_t = 0.3)]
    sigma_u: f64,
    #[arg(long, default_value_t = 0.5)]
    sigma_e: f64,
    #[arg(long, default_value_t = 3.0)]
    initiator_intercept: f64,
    #[arg(long, default_value_t = -0.02, allow_negative_numbers = true)]
    initiator_slope: f64,
    #[arg(long, default_value_t = 30)]
    initiator_utterances: usize,
    #[arg(long, default_value_t = 3.0)]
    follower_intercept: f64,
    #[arg(long, default_value_t = 0.005, allow_negative_numbers = true)]
    follower_slope: f64,
    #[arg(long, default_value_t = 30)]
    follower_utterances: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl BootstrapArgs {
    fn config(&self) -> BootstrapConfig {
        BootstrapConfig {
            n_bins: self.bins,
            n_resamples: self.resamples,
            seed: self.seed,
        }
    }
}

/// Records from either a record CSV or scored CoNLL-U input.
fn load_records(
    corpus: &CorpusArgs,
    scoring: &ScoringArgs,
    allow_csv: bool,
) -> Result<Vec<ComplexityRecord>, CliError> {
    let files = inputs::expand(&corpus.inputs)?;
    let csv_count = files.iter().filter(|p| inputs::is_csv(p)).count();
    if csv_count > 0 {
        if !allow_csv {
            return Err(CliError::Usage(
                "this command takes CoNLL-U input only".into(),
            ));
        }
        if files.len() != 1 {
            return Err(CliError::Usage(
                "a record CSV must be the only input".into(),
            ));
        }
        return Ok(read_records_csv(&inputs::read(&files[0])?)?);
    }

    let layout = match corpus.layout {
        LayoutArg::Concatenated => Layout::Concatenated,
        LayoutArg::PerFile => Layout::PerFile,
    };
    let manifest = corpus
        .manifest
        .as_deref()
        .map(|p| inputs::read(p).and_then(|t| Ok(Manifest::from_csv(&t)?)))
        .transpose()?;
    let documents = inputs::documents(&files, layout)?;
    let name = files[0]
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let loaded = load_corpus(
        &name,
        &documents,
        manifest.as_ref(),
        LoadOptions {
            lenient: corpus.lenient,
            layout,
        },
    )?;
    for w in &loaded.warnings {
        eprintln!("warning: {w}");
    }

    let config = ComplexityConfig::new(scoring.lambda, scoring.isc_weights)?;
    let options = MetricsOptions {
        exclude_punct: scoring.exclude_punct,
        exclude_punct_structure: scoring.exclude_punct_structure,
    };
    Ok(complexity_series(&loaded.corpus, &config, options))
}

fn validate(files: &[PathBuf], out: Option<&Path>) -> Result<(), CliError> {
    let files = inputs::expand(files)?;
    let mut report = String::new();
    let mut bad = 0usize;
    for path in &files {
        let shown = path.display();
        match parse_conllu(&inputs::read(path)?) {
            Err(e) => {
                bad += 1;
                report.push_str(&format!("{shown}: {e}\n"));
            }
            Ok(trees) => {
                let mut clean = true;
                for (i, tree) in trees.iter().enumerate() {
                    if let Err(r) = tree.validate() {
                        clean = false;
                        bad += 1;
                        let id = tree
                            .meta_value("sent_id")
                            .map(|s| format!(" ({s})"))
                            .unwrap_or_default();
                        report.push_str(&format!("{shown}: sentence {}{id}: {r}\n", i + 1));
                    }
                }
                if clean {
                    report.push_str(&format!("{shown}: ok ({} sentences)\n", trees.len()));
                }
            }
        }
    }
    inputs::write(out, &report)?;
    if bad > 0 {
        return Err(CliError::Validation(format!(
            "{bad} invalid sentence(s) or file(s)"
        )));
    }
    Ok(())
}

fn synth(args: &SynthArgs) -> Result<(), CliError> {
    let config = SynthConfig {
        dialogues: args.dialogues,
        sigma_u: args.sigma_u,
        sigma_e: args.sigma_e,
        initiator: RoleTrend {
            intercept: args.initiator_intercept,
            slope: args.initiator_slope,
            utterances: args.initiator_utterances,
        },
        follower: RoleTrend {
            intercept: args.follower_intercept,
            slope: args.follower_slope,
            utterances: args.follower_utterances,
        },
        seed: args.seed,
    };
    inputs::write(args.out.as_deref(), &write_records_csv(&generate(&config)?))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Validate { inputs, out } => validate(&inputs, out.as_deref()),
        Command::Score {
            corpus,
            scoring,
            out,
        } => {
            let records = load_records(&corpus, &scoring, false)?;
            inputs::write(out.as_deref(), &write_records_csv(&records))
        }
        Command::Analyze {
            corpus,
            scoring,
            bootstrap,
            alpha,
            normalized_position,
            quadratic,
            out,
            results_csv,
            bands_csv,
        } => {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(CliError::Usage(format!(
                    "alpha must lie in (0, 1), got {alpha}"
                )));
            }
            let records = load_records(&corpus, &scoring, true)?;
            let options = AnalysisOptions {
                alpha,
                fit: FitOptions {
                    position: if normalized_position {
                        PositionScale::Normalized
                    } else {
                        PositionScale::Raw
                    },
                    quadratic,
                },
                bootstrap: bootstrap.config(),
            };
            let report = analyze(&records, options)?;
            if let Some(path) = results_csv {
                inputs::write(Some(&path), &report.results_csv())?;
            }
            if let Some(path) = bands_csv {
                let bands: Vec<_> = report
                    .roles
                    .iter()
                    .map(|r| (r.role, r.bands.clone()))
                    .collect();
                inputs::write(Some(&path), &write_bands_csv(&bands))?;
            }
            inputs::write(out.as_deref(), &report.to_json())
        }
        Command::Plotdata {
            corpus,
            scoring,
            bootstrap,
            out,
        } => {
            let records = load_records(&corpus, &scoring, true)?;
            let bands = plot_data(&records, bootstrap.config())?;
            inputs::write(out.as_deref(), &write_bands_csv(&bands))
        }
        Command::Decode { input, out } => {
            let matrix = ScoreMatrix::from_json(&inputs::read(&input)?)?;
            let tree = decoded_tree(&mst_decode(&matrix));
            inputs::write(out.as_deref(), &serialize_conllu(&[tree]))
        }
        Command::Synth(args) => synth(&args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            let err = CliError::Usage(first.trim_start_matches("error: ").to_owned());
            eprintln!("{err}");
            return err.exit_code();
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{err}");
            err.exit_code()
        }
    }
}
