use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mindep::analysis::{
    emit_report, list_models, render_json, render_models_text, run_analyze, run_prior_report, run_sample,
    AnalysisConfig, OutputFormat,
};
use mindep::format::parse_table_file;
use mindep::montecarlo::SamplerConfig;
use mindep::priors::PriorSpec;
use mindep::table::ContingencyTable;
use mindep::{Error, ErrorKind};

#[derive(Parser)]
#[command(name = "mindep", version, about = "Bayesian analysis of marginal independence models for three-way tables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score the candidate models and report posterior model probabilities.
    Analyze {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        prior: PriorArgs,
        /// Restrict to these models (repeatable, e.g. --model SC+A --model ASC).
        #[arg(long = "model")]
        models: Vec<String>,
    },
    /// Posterior parameter summaries and Monte Carlo lambda summaries for one model.
    Sample {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        prior: PriorArgs,
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = 1000)]
        draws: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated quantile levels.
        #[arg(long, value_delimiter = ',', default_values_t = [0.025, 0.975])]
        quantiles: Vec<f64>,
        /// Also summarize every cell probability of the full table.
        #[arg(long)]
        cells: bool,
    },
    /// Prior cell moments, variance ratio and prior information share.
    PriorReport {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        prior: PriorArgs,
    },
    /// List the eight models with their disconnected sets, constraints and independences.
    Models {
        /// Take variable names from this table (default A, S, C).
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    table: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PriorArgs {
    #[arg(long, value_enum, default_value_t = PriorChoice::Perks)]
    prior: PriorChoice,
    /// Imaginary table for the power prior.
    #[arg(long)]
    imaginary: Option<PathBuf>,
    /// Power prior weight (default 1/N*, the unit information choice).
    #[arg(long)]
    w: Option<f64>,
    /// Power prior pre-prior parameter added to every cell.
    #[arg(long, default_value_t = 0.0)]
    alpha0: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum PriorChoice {
    Jeffreys,
    Uec,
    Perks,
    Empirical,
    Power,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Text => OutputFormat::Text,
            Format::Json => OutputFormat::Json,
        }
    }
}

fn read_table(path: &Path) -> Result<ContingencyTable, Error> {
    let bytes = fs::read(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_table_file(&bytes)
}

impl PriorArgs {
    fn spec(&self) -> Result<PriorSpec, Error> {
        if !matches!(self.prior, PriorChoice::Power) && self.imaginary.is_some() {
            return Err(Error::InvalidArgument("--imaginary is only used with --prior power".into()));
        }
        Ok(match self.prior {
            PriorChoice::Jeffreys => PriorSpec::jeffreys(),
            PriorChoice::Uec => PriorSpec::unit_expected_cell(),
            PriorChoice::Perks => PriorSpec::perks(),
            PriorChoice::Empirical => PriorSpec::empirical_bayes(),
            PriorChoice::Power => {
                let path = self
                    .imaginary
                    .as_ref()
                    .ok_or_else(|| Error::InvalidArgument("--prior power needs --imaginary".into()))?;
                let imaginary = read_table(path)?;
                match self.w {
                    Some(w) => PriorSpec::power(imaginary, w, self.alpha0),
                    None => PriorSpec::unit_information(imaginary, self.alpha0),
                }
            }
        })
    }
}

fn config(common: &Common, prior: &PriorArgs) -> Result<AnalysisConfig, Error> {
    let table = read_table(&common.table)?;
    Ok(AnalysisConfig::new(
        table,
        common.table.display().to_string(),
        prior.spec()?,
    ))
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, text).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| Error::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Analyze { common, prior, models } => {
            let mut cfg = config(&common, &prior)?;
            if !models.is_empty() {
                cfg.models = Some(models);
            }
            let report = run_analyze(&cfg)?;
            write_output(common.out.as_deref(), &emit_report(&report, common.format.into()))
        }
        Command::Sample {
            common,
            prior,
            model,
            draws,
            seed,
            quantiles,
            cells,
        } => {
            let mut cfg = config(&common, &prior)?;
            cfg.sampler = SamplerConfig {
                draws,
                seed,
                quantile_levels: quantiles,
            };
            cfg.cell_summaries = cells;
            let report = run_sample(&cfg, &model)?;
            write_output(common.out.as_deref(), &emit_report(&report, common.format.into()))
        }
        Command::PriorReport { common, prior } => {
            let report = run_prior_report(&config(&common, &prior)?)?;
            write_output(common.out.as_deref(), &emit_report(&report, common.format.into()))
        }
        Command::Models { table, format, out } => {
            let names = match table {
                Some(path) => read_table(&path)?.names(),
                None => vec!["A".into(), "S".into(), "C".into()],
            };
            let models = list_models(&names)?;
            let text = match format {
                Format::Text => render_models_text(&models),
                Format::Json => render_json(&models),
            };
            write_output(out.as_deref(), &text)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(ErrorKind::Usage.exit_code() as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.kind().exit_code() as u8)
        }
    }
}
