//! Seeded Monte Carlo summaries of posterior λ parameters.
//!
//! Draws are generated in fixed-size chunks. Chunk `c` uses a ChaCha8
//! generator seeded with `seed` and switched to stream `c`, so results do
//! not depend on how many threads run the chunks. Gamma variates come from
//! the Marsaglia–Tsang method (with the usual boost for shapes below one)
//! and are normalized into Dirichlet draws.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::BidirectedGraph;
use crate::inference::{Component, FactorizedDirichlet};
use crate::marglog::{zero_constraints, MarginalScheme};
use crate::table::{cell_at, num_cells, project_offset};

type LambdaPiDraw = (Vec<f64>, Vec<f64>);

/// Draws per RNG stream.
pub const CHUNK_SIZE: usize = 1024;

/// Largest |λ| accepted for a zero-constrained parameter.
pub const CONSTRAINT_TOL: f64 = 1e-9;

pub const QUANTILE_RULE: &str = "inclusive linear interpolation: h = (T-1)p, q = x[floor h] + (h - floor h)(x[floor h + 1] - x[floor h])";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplerConfig {
    pub draws: usize,
    pub seed: u64,
    pub quantile_levels: Vec<f64>,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            draws: 1000,
            seed: 0,
            quantile_levels: vec![0.025, 0.975],
        }
    }
}

impl SamplerConfig {
    pub fn new(draws: usize, seed: u64) -> Self {
        SamplerConfig {
            draws,
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.draws == 0 {
            return Err(Error::InvalidArgument("number of draws must be at least 1".into()));
        }
        if let Some(p) = self.quantile_levels.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
            return Err(Error::InvalidArgument(format!(
                "quantile level {p} is outside (0, 1)"
            )));
        }
        Ok(())
    }
}

/// One summarized quantity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub name: String,
    /// Marginal table the parameter is computed in, for λ rows.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub marginal: Option<String>,
    pub mean: f64,
    pub sd: f64,
    /// `(level, quantile)` pairs in the configured order.
    pub quantiles: Vec<(f64, f64)>,
    pub exact_zero: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleSummary {
    pub draws: usize,
    pub seed: u64,
    pub lambda: Vec<SummaryRow>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub pi: Vec<SummaryRow>,
}

/// One draw of a single factorization piece.
#[derive(Debug, Clone, PartialEq)]
pub enum ComponentDraw {
    Marginal(Vec<f64>),
    Conditional(Vec<Vec<f64>>),
}

/// One draw of every piece of `π^G`.
pub type PiGDraw = Vec<ComponentDraw>;

pub fn sample_dirichlet<R: Rng + ?Sized>(params: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    let mut out = params
        .iter()
        .enumerate()
        .map(|(index, &a)| {
            let g = Gamma::new(a, 1.0).map_err(|_| Error::NonPositive {
                what: "Dirichlet parameters",
                index,
                value: a,
            })?;
            Ok(g.sample(rng))
        })
        .collect::<Result<Vec<f64>>>()?;
    let total: f64 = out.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::Internal(format!("degenerate gamma draws (sum {total})")));
    }
    out.iter_mut().for_each(|x| *x /= total);
    Ok(out)
}

fn draw_one<R: Rng + ?Sized>(posterior: &FactorizedDirichlet, rng: &mut R) -> Result<PiGDraw> {
    posterior
        .components()
        .iter()
        .map(|c| match c {
            Component::Marginal { params, .. } => Ok(ComponentDraw::Marginal(sample_dirichlet(params, rng)?)),
            Component::Conditional { params, .. } => Ok(ComponentDraw::Conditional(
                params
                    .iter()
                    .map(|p| sample_dirichlet(p, rng))
                    .collect::<Result<_>>()?,
            )),
        })
        .collect()
}

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// Run `f` on every draw, chunk by chunk in parallel, and return the
/// per-draw results in draw order.
fn run_chunked<T, F>(posterior: &FactorizedDirichlet, config: &SamplerConfig, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(PiGDraw) -> Result<T> + Sync,
{
    config.validate()?;
    let chunks = config.draws.div_ceil(CHUNK_SIZE);
    let per_chunk: Vec<Result<Vec<T>>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(config.seed, c);
            let n = CHUNK_SIZE.min(config.draws - c * CHUNK_SIZE);
            (0..n).map(|_| f(draw_one(posterior, &mut rng)?)).collect()
        })
        .collect();
    let mut out = Vec::with_capacity(config.draws);
    for chunk in per_chunk {
        out.extend(chunk?);
    }
    Ok(out)
}

/// `T` independent draws of the posterior pieces.
pub fn sample_pi_g(posterior: &FactorizedDirichlet, config: &SamplerConfig) -> Result<Vec<PiGDraw>> {
    run_chunked(posterior, config, Ok)
}

/// Full joint probability table implied by one draw of the pieces: each
/// cell is the product of the matching entry of every piece.
pub fn reconstruct_full_pi(structure: &FactorizedDirichlet, draw: &[ComponentDraw]) -> Result<Vec<f64>> {
    let dims = structure.dims();
    let comps = structure.components();
    let mismatch = || Error::InvalidArgument("draw does not match the model factorization".into());
    if comps.len() != draw.len() {
        return Err(mismatch());
    }
    for (c, d) in comps.iter().zip(draw) {
        let ok = match (c, d) {
            (Component::Marginal { params, .. }, ComponentDraw::Marginal(x)) => params.len() == x.len(),
            (Component::Conditional { params, .. }, ComponentDraw::Conditional(x)) => {
                params.len() == x.len() && params.iter().zip(x).all(|(p, v)| p.len() == v.len())
            }
            _ => false,
        };
        if !ok {
            return Err(mismatch());
        }
    }
    let n = num_cells(dims);
    let mut pi = vec![1.0; n];
    for (k, cell) in pi.iter_mut().enumerate() {
        for (c, d) in comps.iter().zip(draw) {
            *cell *= match (c, d) {
                (Component::Marginal { vars, .. }, ComponentDraw::Marginal(x)) => x[project_offset(k, dims, *vars)],
                (Component::Conditional { child, parents, .. }, ComponentDraw::Conditional(x)) => {
                    x[project_offset(k, dims, *parents)][project_offset(k, dims, *child)]
                }
                _ => unreachable!(),
            };
        }
    }
    Ok(pi)
}

/// Mean, sample standard deviation and quantiles of `xs`.
pub fn summarize(name: impl Into<String>, xs: &[f64], levels: &[f64]) -> SummaryRow {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let sd = if xs.len() > 1 {
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    SummaryRow {
        name: name.into(),
        marginal: None,
        mean,
        sd,
        quantiles: levels.iter().map(|&p| (p, quantile_sorted(&sorted, p))).collect(),
        exact_zero: false,
    }
}

/// Inclusive linear-interpolation quantile of an ascending sample.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Monte Carlo summaries of every λ of `scheme` (and optionally of every
/// full-table cell probability) under `posterior`.
pub fn sample_lambda(
    graph: &BidirectedGraph,
    posterior: &FactorizedDirichlet,
    scheme: &MarginalScheme,
    config: &SamplerConfig,
    include_pi: bool,
) -> Result<SampleSummary> {
    if scheme.dims() != posterior.dims() || scheme.zero_constrained() != zero_constraints(graph).as_slice() {
        return Err(Error::InvalidArgument(format!(
            "parameter scheme was not built for model {}",
            graph.label()
        )));
    }
    let names = scheme.names();
    let constrained = scheme.constrained_rows();
    let draws = run_chunked(posterior, config, |d| {
        let pi = reconstruct_full_pi(posterior, &d)?;
        let lambda = scheme.lambda_values(&pi)?;
        for ((v, c), label) in lambda.iter().zip(&constrained).zip(scheme.labels()) {
            if *c && v.abs() >= CONSTRAINT_TOL {
                return Err(Error::ConstraintViolated {
                    label: label.parameter_name(names),
                    value: *v,
                });
            }
        }
        Ok((lambda, if include_pi { pi } else { Vec::new() }))
    })?;

    let column = |pick: &dyn Fn(&LambdaPiDraw) -> f64| -> Vec<f64> { draws.iter().map(pick).collect() };
    let lambda = scheme
        .labels()
        .iter()
        .enumerate()
        .map(|(j, label)| {
            let mut row = if constrained[j] {
                SummaryRow {
                    name: String::new(),
                    marginal: None,
                    mean: 0.0,
                    sd: 0.0,
                    quantiles: config.quantile_levels.iter().map(|&p| (p, 0.0)).collect(),
                    exact_zero: true,
                }
            } else {
                summarize("", &column(&|d| d.0[j]), &config.quantile_levels)
            };
            row.name = label.parameter_name(names);
            row.marginal = Some(label.marginal_name(names));
            row
        })
        .collect();
    let pi = if include_pi {
        let dims = posterior.dims();
        (0..num_cells(dims))
            .map(|k| {
                let cell: Vec<String> = cell_at(k, dims).iter().map(|l| l.to_string()).collect();
                summarize(
                    format!("pi({})", cell.join(",")),
                    &column(&|d| d.1[k]),
                    &config.quantile_levels,
                )
            })
            .collect()
    } else {
        Vec::new()
    };
    Ok(SampleSummary {
        draws: config.draws,
        seed: config.seed,
        lambda,
        pi,
    })
}
