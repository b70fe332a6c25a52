use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use refined_bias_cli::{
    agreement, compare, evaluate, expand_glob, generate, load_reports, plots, read_manifest, server, Outcome,
};
use refined_bias_core::cue::CueConfig;
use refined_bias_core::metrics::{EvaluateOptions, PartialMode};
use refined_bias_core::survey::{SectionOrder, SessionConfig, SurveyStore};

#[derive(Parser)]
#[command(name = "refined-bias", version, about = "Shape/texture cue evaluation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct EvalFlags {
    /// Bootstrap replicates for sensitivity confidence intervals.
    #[arg(long, default_value_t = 10_000)]
    replicates: usize,
    /// Restrict partial-space decisions to the two cue superclasses.
    #[arg(long)]
    forced_choice: bool,
}

impl EvalFlags {
    fn options(&self, seed: u64) -> EvaluateOptions {
        EvaluateOptions {
            bootstrap_replicates: self.replicates,
            seed,
            partial_mode: if self.forced_choice { PartialMode::ForcedChoice } else { PartialMode::AllSuperclasses },
            ..Default::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate shape and texture cues from source images and masks.
    Generate {
        #[arg(long)]
        manifest: PathBuf,
        /// TOML or JSON cue parameters.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Base directory for relative paths in the manifest (default: the manifest's directory).
        #[arg(long)]
        root: Option<PathBuf>,
    },
    /// Evaluate logits files: one report per run plus summary.csv.
    Evaluate {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        runs: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        eval: EvalFlags,
    },
    /// t-test each model family's shape preference against the baseline.
    Compare {
        /// Report JSON files, or logits files when --manifest is given.
        #[arg(long)]
        runs: String,
        #[arg(long)]
        families: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        eval: EvalFlags,
    },
    /// Fleiss' kappa for ratings CSVs or survey export JSON.
    Agreement {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Scatter data (metric vs in-domain accuracy) with Pearson r per panel.
    Report {
        #[arg(long)]
        runs: String,
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        eval: EvalFlags,
    },
    /// Run the survey HTTP service.
    Serve {
        #[arg(long)]
        manifest: PathBuf,
        /// Directory stimulus and source image paths resolve against.
        #[arg(long)]
        stimuli: PathBuf,
        /// Directory for session logs.
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        #[arg(long, default_value = "refined_bias")]
        dataset: String,
        #[arg(long, default_value_t = 50)]
        tasks_per_section: usize,
        #[arg(long, default_value_t = 5)]
        noise_every: usize,
        /// Display time for each pink-noise interstitial.
        #[arg(long, default_value_t = 1000)]
        noise_ms: u64,
        #[arg(long, value_enum, default_value = "shape-first")]
        order: Order,
        /// Seed for export down-sampling.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Bearer token for GET /export.
        #[arg(long, env = "REFINED_BIAS_EXPORT_TOKEN")]
        export_token: Option<String>,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Order {
    ShapeFirst,
    TextureFirst,
}

fn report_outcome(outcome: &Outcome) -> ExitCode {
    for p in &outcome.written {
        log::debug!("wrote {}", p.display());
    }
    if !outcome.failures.is_empty() {
        eprintln!("{} item(s) failed:", outcome.failures.len());
        for (item, err) in &outcome.failures {
            eprintln!("  {item}: {err}");
        }
    }
    ExitCode::from(outcome.exit_code() as u8)
}

fn runs_or_bail(pattern: &str) -> Result<Vec<PathBuf>> {
    let runs = expand_glob(pattern)?;
    if runs.is_empty() {
        bail!("--runs {pattern:?} matched no files");
    }
    Ok(runs)
}

fn manifest_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Generate { manifest, params, seed, out, root } => {
            let m = read_manifest(&manifest)?;
            let config = match params {
                Some(p) => CueConfig::load(&p).with_context(|| format!("loading {}", p.display()))?,
                None => CueConfig::default(),
            };
            let root = root.unwrap_or_else(|| manifest_dir(&manifest));
            let outcome =
                generate::run(&generate::GenerateArgs { manifest: &m, root: &root, config: &config, seed, out: &out })?;
            Ok(report_outcome(&outcome))
        }
        Command::Evaluate { manifest, runs, seed, out, eval } => {
            let m = read_manifest(&manifest)?;
            let outcome = evaluate::run(&m, &runs_or_bail(&runs)?, &eval.options(seed), &out)?;
            Ok(report_outcome(&outcome))
        }
        Command::Compare { runs, families, alpha, manifest, seed, out, eval } => {
            let families = compare::read_families(&families)?;
            let m = manifest.as_deref().map(read_manifest).transpose()?;
            let mut outcome = Outcome::default();
            let reports = load_reports(&runs_or_bail(&runs)?, m.as_ref(), &eval.options(seed), &mut outcome)?;
            let table = compare::run(&reports, &families, alpha, &out, &mut outcome)?;
            print!("{}", table.to_markdown());
            Ok(report_outcome(&outcome))
        }
        Command::Agreement { inputs, out } => {
            let (outcome, rows) = agreement::run(&inputs, &out)?;
            for r in rows {
                println!("{}\t{}\tkappa={:.4}", r.source, r.label, r.result.kappa);
            }
            Ok(report_outcome(&outcome))
        }
        Command::Report { runs, manifest, seed, out, eval } => {
            let m = manifest.as_deref().map(read_manifest).transpose()?;
            let mut outcome = Outcome::default();
            let reports = load_reports(&runs_or_bail(&runs)?, m.as_ref(), &eval.options(seed), &mut outcome)?;
            plots::run(&reports, &out, &mut outcome)?;
            Ok(report_outcome(&outcome))
        }
        Command::Serve {
            manifest,
            stimuli,
            data,
            addr,
            dataset,
            tasks_per_section,
            noise_every,
            noise_ms,
            order,
            seed,
            export_token,
        } => {
            let config = server::ServerConfig {
                manifest: read_manifest(&manifest)?,
                store: SurveyStore::open(&data)?,
                session_defaults: SessionConfig {
                    dataset,
                    seed: 0,
                    order: match order {
                        Order::ShapeFirst => SectionOrder::ShapeFirst,
                        Order::TextureFirst => SectionOrder::TextureFirst,
                    },
                    noise_every,
                    tasks_per_section,
                },
                stimuli_root: stimuli,
                export_token,
                export_seed: seed,
                noise_duration_ms: noise_ms,
            };
            if config.export_token.is_none() {
                log::warn!("no export token configured; GET /export is disabled");
            }
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(server::serve(config, addr))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("REFINED_BIAS_LOG", "info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
