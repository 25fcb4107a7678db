//! End-to-end analyses and report rendering.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::parse_model_label;
use crate::graph::{enumerate_models, BidirectedGraph};
use crate::inference::{beta_summary, map_model, posterior_model_probs, posterior_params};
use crate::marglog::MarginalScheme;
use crate::montecarlo::{sample_lambda, SamplerConfig, SummaryRow, CHUNK_SIZE, QUANTILE_RULE};
use crate::priors::{make_prior, PriorSpec};
use crate::table::{cell_at, ContingencyTable};

pub const TEXT_ROUNDING_RULE: &str =
    "text output rounds to nearest (ties to even): probabilities in percent and log-likelihoods to 2 decimals, parameters to 3 decimals";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Text,
    Json,
}

#[derive(Debug, Clone)]
pub struct AnalysisConfig {
    pub table: ContingencyTable,
    /// Display name of the data set, usually the input path.
    pub dataset: String,
    pub prior: PriorSpec,
    /// Model labels to score; `None` means all eight.
    pub models: Option<Vec<String>>,
    pub sampler: SamplerConfig,
    /// Also summarize every full-table cell probability when sampling.
    pub cell_summaries: bool,
}

impl AnalysisConfig {
    pub fn new(table: ContingencyTable, dataset: impl Into<String>, prior: PriorSpec) -> Self {
        AnalysisConfig {
            table,
            dataset: dataset.into(),
            prior,
            models: None,
            sampler: SamplerConfig::default(),
            cell_summaries: false,
        }
    }

    fn resolve_models(&self) -> Result<Vec<BidirectedGraph>> {
        let names = self.table.names();
        match &self.models {
            None => enumerate_models(&names),
            Some(labels) if labels.is_empty() => Err(Error::InvalidArgument("model filter is empty".into())),
            Some(labels) => {
                let all = enumerate_models(&names)?;
                let wanted = labels
                    .iter()
                    .map(|l| parse_model_label(l, &names))
                    .collect::<Result<Vec<_>>>()?;
                Ok(all.into_iter().filter(|g| wanted.contains(g)).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableInfo {
    pub name: String,
    pub levels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub name: String,
    pub variables: Vec<VariableInfo>,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorInfo {
    pub kind: String,
    pub description: String,
    pub total_alpha: f64,
    /// `α / (α + N)`.
    pub information_fraction: f64,
    /// Prior variance relative to the Perks prior; symmetric priors only.
    pub variance_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelScore {
    pub label: String,
    pub log_marginal_likelihood: f64,
    pub posterior_probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaRow {
    pub name: String,
    pub a: f64,
    pub b: f64,
    pub mean: f64,
    pub sd: f64,
    pub quantiles: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub marginal: Option<String>,
    pub mean: f64,
    pub sd: f64,
    pub quantiles: Vec<(f64, f64)>,
    pub exact_zero: bool,
}

impl From<SummaryRow> for SummaryRecord {
    fn from(r: SummaryRow) -> Self {
        SummaryRecord {
            name: r.name,
            marginal: r.marginal,
            mean: r.mean,
            sd: r.sd,
            quantiles: r.quantiles,
            exact_zero: r.exact_zero,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDetail {
    pub label: String,
    pub kind: String,
    pub log_marginal_likelihood: f64,
    pub parameters: Vec<BetaRow>,
    pub lambda: Vec<SummaryRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cells: Vec<SummaryRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellMoment {
    pub cell: Vec<usize>,
    pub alpha: f64,
    pub mean: f64,
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reproducibility {
    pub seed: u64,
    pub draws: usize,
    pub quantile_levels: Vec<f64>,
    pub quantile_rule: String,
    pub rng: String,
    pub software_version: String,
    pub text_rounding: String,
}

impl Reproducibility {
    fn new(config: &SamplerConfig) -> Self {
        Reproducibility {
            seed: config.seed,
            draws: config.draws,
            quantile_levels: config.quantile_levels.clone(),
            quantile_rule: QUANTILE_RULE.into(),
            rng: format!(
                "ChaCha8 seeded from the 64-bit seed, stream = chunk index, {CHUNK_SIZE} draws per chunk; Marsaglia-Tsang gamma variates"
            ),
            software_version: env!("CARGO_PKG_VERSION").into(),
            text_rounding: TEXT_ROUNDING_RULE.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub dataset: DatasetInfo,
    pub prior: PriorInfo,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub models: Vec<ModelScore>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map_model: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<ModelDetail>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub prior_cells: Vec<CellMoment>,
    pub reproducibility: Reproducibility,
}

fn base_report(config: &AnalysisConfig) -> Result<(AnalysisReport, crate::priors::AlphaTable)> {
    config.sampler.validate()?;
    let table = &config.table;
    let alpha = make_prior(&config.prior, table)?;
    let report = AnalysisReport {
        dataset: DatasetInfo {
            name: config.dataset.clone(),
            variables: table
                .variables()
                .iter()
                .map(|v| VariableInfo {
                    name: v.name.clone(),
                    levels: v.levels.clone(),
                })
                .collect(),
            total: table.total(),
        },
        prior: PriorInfo {
            kind: config.prior.kind.to_string(),
            description: config.prior.describe(),
            total_alpha: alpha.total(),
            information_fraction: alpha.information_fraction(table.total()),
            variance_ratio: alpha.variance_ratio().ok(),
        },
        models: Vec::new(),
        map_model: None,
        detail: None,
        prior_cells: Vec::new(),
        reproducibility: Reproducibility::new(&config.sampler),
    };
    Ok((report, alpha))
}

/// Score every requested model and identify the most probable one.
pub fn run_analyze(config: &AnalysisConfig) -> Result<AnalysisReport> {
    let (mut report, alpha) = base_report(config)?;
    let models = config.resolve_models()?;
    let posts = posterior_model_probs(&models, &alpha, &config.table, None)?;
    report.map_model = Some(map_model(&posts).graph.label());
    report.models = posts
        .iter()
        .map(|m| ModelScore {
            label: m.graph.label(),
            log_marginal_likelihood: m.log_ml,
            posterior_probability: m.post_prob,
        })
        .collect();
    Ok(report)
}

/// Analytic Beta summaries of one model's parameters and Monte Carlo
/// summaries of its λ parameters.
pub fn run_sample(config: &AnalysisConfig, label: &str) -> Result<AnalysisReport> {
    let (mut report, alpha) = base_report(config)?;
    let table = &config.table;
    let graph = parse_model_label(label, &table.names())?;
    let posterior = posterior_params(&graph, &alpha, table)?;
    let log_ml = crate::inference::log_marginal_likelihood(&graph, &alpha, table)?;
    let levels = &config.sampler.quantile_levels;
    let parameters = posterior
        .parameter_betas(&table.names())
        .into_iter()
        .map(|(name, a, b)| {
            let s = beta_summary(a, b, levels)?;
            Ok(BetaRow {
                name,
                a,
                b,
                mean: s.mean,
                sd: s.sd,
                quantiles: s.quantiles,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let scheme = MarginalScheme::for_graph(&graph, &table.dims())?;
    let summary = sample_lambda(&graph, &posterior, &scheme, &config.sampler, config.cell_summaries)?;
    report.detail = Some(ModelDetail {
        label: graph.label(),
        kind: graph.classify()?.kind.to_string(),
        log_marginal_likelihood: log_ml,
        parameters,
        lambda: summary.lambda.into_iter().map(Into::into).collect(),
        cells: summary.pi.into_iter().map(Into::into).collect(),
    });
    Ok(report)
}

/// Prior diagnostics: per-cell prior moments, variance ratio against the
/// Perks prior, and the share of information carried by the prior.
pub fn run_prior_report(config: &AnalysisConfig) -> Result<AnalysisReport> {
    let (mut report, alpha) = base_report(config)?;
    let dims = alpha.dims();
    report.prior_cells = alpha
        .cell_moments()
        .into_iter()
        .zip(alpha.values())
        .enumerate()
        .map(|(k, ((mean, variance), &a))| CellMoment {
            cell: cell_at(k, &dims),
            alpha: a,
            mean,
            variance,
        })
        .collect();
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelInfo {
    pub label: String,
    pub kind: String,
    pub disconnected_sets: Vec<String>,
    /// For every disconnected set, its factorization into connected pieces.
    pub factorizations: Vec<String>,
    pub zero_constraints: Vec<String>,
    pub independences: Vec<String>,
}

/// The eight canonical models with their structural properties.
pub fn list_models<S: AsRef<str>>(names: &[S]) -> Result<Vec<ModelInfo>> {
    enumerate_models(names)?
        .iter()
        .map(|g| {
            let v = g.vertices();
            let d = g.disconnected_sets();
            Ok(ModelInfo {
                label: g.label(),
                kind: g.classify()?.kind.to_string(),
                disconnected_sets: d.iter().map(|s| s.render(v)).collect(),
                factorizations: d
                    .iter()
                    .map(|s| {
                        let parts: Vec<String> = g
                            .maximal_connected_components(*s)
                            .iter()
                            .map(|c| format!("pi_{}", c.render(v)))
                            .collect();
                        format!("pi_{} = {}", s.render(v), parts.join(" * "))
                    })
                    .collect(),
                zero_constraints: crate::marglog::zero_constraints(g)
                    .iter()
                    .map(|(m, e)| format!("lambda_{} in M_{}", e.render(v), m.render(v)))
                    .collect(),
                independences: g.markov_independences().iter().map(|s| s.render(v)).collect(),
            })
        })
        .collect()
}

pub fn render_models_text(models: &[ModelInfo]) -> String {
    let mut out = String::new();
    for m in models {
        let _ = writeln!(out, "{} ({})", m.label, m.kind);
        let none = || "none".to_string();
        let join = |xs: &[String], sep: &str| if xs.is_empty() { none() } else { xs.join(sep) };
        let _ = writeln!(out, "  disconnected sets: {}", join(&m.disconnected_sets, ", "));
        let _ = writeln!(out, "  factorizations:    {}", join(&m.factorizations, "; "));
        let _ = writeln!(out, "  zero constraints:  {}", join(&m.zero_constraints, ", "));
        let _ = writeln!(out, "  independences:     {}", join(&m.independences, ", "));
    }
    out
}

fn fmt_quantile_header(levels: &[f64]) -> String {
    levels
        .iter()
        .map(|p| format!("{:>9}", format!("Q{}", p)))
        .collect::<String>()
}

fn fmt_quantiles(q: &[(f64, f64)]) -> String {
    q.iter().map(|(_, v)| format!("{:>9.3}", v)).collect()
}

pub fn render_text(report: &AnalysisReport) -> String {
    let mut out = String::new();
    let d = &report.dataset;
    let vars: Vec<String> = d
        .variables
        .iter()
        .map(|v| format!("{} ({} levels)", v.name, v.levels.len()))
        .collect();
    let _ = writeln!(out, "Data: {}", d.name);
    let _ = writeln!(out, "Variables: {}", vars.join(", "));
    let _ = writeln!(out, "Sample size: {}", d.total);
    let p = &report.prior;
    let _ = writeln!(out, "Prior: {}", p.description);
    let _ = writeln!(out, "Total prior alpha: {:.4}", p.total_alpha);
    let _ = writeln!(out, "Prior information fraction: {:.2}%", 100.0 * p.information_fraction);
    if let Some(vr) = p.variance_ratio {
        let _ = writeln!(out, "Variance ratio vs Perks: {vr:.4}");
    }

    if !report.models.is_empty() {
        let _ = writeln!(out, "\nPosterior model probabilities (%)");
        let _ = writeln!(out, "{:<12}{:>12}{:>10}", "Model", "log f(n|G)", "Prob(%)");
        for m in &report.models {
            let _ = writeln!(
                out,
                "{:<12}{:>12.2}{:>10.2}",
                m.label,
                m.log_marginal_likelihood,
                100.0 * m.posterior_probability
            );
        }
    }
    if let Some(map) = &report.map_model {
        let _ = writeln!(out, "MAP model: {map}");
    }

    if let Some(detail) = &report.detail {
        let levels = &report.reproducibility.quantile_levels;
        let _ = writeln!(
            out,
            "\nModel {} ({}), log f(n|G) = {:.2}",
            detail.label, detail.kind, detail.log_marginal_likelihood
        );
        let _ = writeln!(out, "\nPosterior summaries of model parameters");
        let _ = writeln!(
            out,
            "{:<20}{:>9}{:>9}{:>9}{:>9}{}",
            "Parameter",
            "a",
            "b",
            "Mean",
            "St.dev.",
            fmt_quantile_header(levels)
        );
        for r in &detail.parameters {
            let _ = writeln!(
                out,
                "{:<20}{:>9.3}{:>9.3}{:>9.3}{:>9.3}{}",
                r.name,
                r.a,
                r.b,
                r.mean,
                r.sd,
                fmt_quantiles(&r.quantiles)
            );
        }
        let _ = writeln!(out, "\nPosterior summaries for lambda");
        let _ = writeln!(
            out,
            "{:<10}{:<20}{:>9}{:>9}{}",
            "Marginal",
            "Parameter",
            "Mean",
            "St.dev.",
            fmt_quantile_header(levels)
        );
        for r in &detail.lambda {
            let _ = writeln!(
                out,
                "{:<10}{:<20}{:>9.3}{:>9.3}{}{}",
                r.marginal.as_deref().unwrap_or(""),
                r.name,
                r.mean,
                r.sd,
                fmt_quantiles(&r.quantiles),
                if r.exact_zero { "  (constrained)" } else { "" }
            );
        }
        if !detail.cells.is_empty() {
            let _ = writeln!(out, "\nPosterior summaries of cell probabilities");
            for r in &detail.cells {
                let _ = writeln!(
                    out,
                    "{:<20}{:>9.3}{:>9.3}{}",
                    r.name,
                    r.mean,
                    r.sd,
                    fmt_quantiles(&r.quantiles)
                );
            }
        }
    }

    if !report.prior_cells.is_empty() {
        let _ = writeln!(out, "\nPrior cell moments");
        let _ = writeln!(out, "{:<16}{:>12}{:>12}{:>14}", "Cell", "alpha", "Mean", "Variance");
        for c in &report.prior_cells {
            let cell: Vec<String> = c.cell.iter().map(|l| l.to_string()).collect();
            let _ = writeln!(
                out,
                "{:<16}{:>12.6}{:>12.6}{:>14.3e}",
                format!("({})", cell.join(",")),
                c.alpha,
                c.mean,
                c.variance
            );
        }
    }

    let r = &report.reproducibility;
    let _ = writeln!(out, "\nReproducibility");
    let _ = writeln!(out, "  seed: {}", r.seed);
    let _ = writeln!(out, "  draws: {}", r.draws);
    let _ = writeln!(out, "  quantile rule: {}", r.quantile_rule);
    let _ = writeln!(out, "  rng: {}", r.rng);
    let _ = writeln!(out, "  version: {}", r.software_version);
    let _ = writeln!(out, "  rounding: {}", r.text_rounding);
    out
}

pub fn render_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

pub fn emit_report(report: &AnalysisReport, format: OutputFormat) -> String {
    match format {
        OutputFormat::Text => render_text(report),
        OutputFormat::Json => render_json(report),
    }
}
