//! Conjugate posterior parameters, analytic marginal likelihoods and
//! posterior model probabilities.
//!
//! Every graph on three variables factorizes the joint probability into
//! Dirichlet-distributed pieces built from the full-table prior:
//!
//! * saturated: one Dirichlet over all cells;
//! * independence and single-edge graphs: one marginal Dirichlet per
//!   connected component;
//! * gamma graphs: a conditional Dirichlet of the corner given each level
//!   combination of the two endpoints, plus a marginal Dirichlet for each
//!   endpoint.
//!
//! The marginal likelihood is `K(n)` times the product over pieces of
//! `DK(α) / DK(α + n)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{BidirectedGraph, GraphKind};
use crate::priors::AlphaTable;
use crate::special::{beta_quantile, ln_gamma};
use crate::table::{cell_at, conditional_slice, marginal_dims, marginalize, num_cells, ContingencyTable};
use crate::varset::VarSet;

/// One Dirichlet-distributed piece of a factorized joint distribution.
#[derive(Debug, Clone, PartialEq)]
pub enum Component {
    /// `π_vars ~ Dir(params)`, params in vec order over `vars`.
    Marginal { vars: VarSet, params: Vec<f64> },
    /// `π_{child|parents}(· | k) ~ Dir(params[k])` for every parent cell `k`
    /// (vec order over `parents`), each vector in vec order over `child`.
    Conditional {
        child: VarSet,
        parents: VarSet,
        params: Vec<Vec<f64>>,
    },
}

impl Component {
    /// Every Dirichlet parameter vector of this piece.
    pub fn dirichlets(&self) -> Vec<&[f64]> {
        match self {
            Component::Marginal { params, .. } => vec![params.as_slice()],
            Component::Conditional { params, .. } => params.iter().map(Vec::as_slice).collect(),
        }
    }
}

/// Product of independent Dirichlet pieces describing `π^G`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorizedDirichlet {
    dims: Vec<usize>,
    components: Vec<Component>,
}

impl FactorizedDirichlet {
    /// Factorize full-table Dirichlet parameters according to `graph`.
    pub fn from_full(graph: &BidirectedGraph, full: &[f64], dims: &[usize]) -> Result<Self> {
        if graph.num_vertices() != dims.len() {
            return Err(Error::DimensionMismatch(format!(
                "graph has {} vertices, table has {} variables",
                graph.num_vertices(),
                dims.len()
            )));
        }
        if full.len() != num_cells(dims) {
            return Err(Error::DimensionMismatch(format!(
                "expected {} parameters, got {}",
                num_cells(dims),
                full.len()
            )));
        }
        let class = graph.classify()?;
        let all = graph.all();
        let components = match class.kind {
            GraphKind::Saturated => vec![Component::Marginal {
                vars: all,
                params: full.to_vec(),
            }],
            GraphKind::Independence | GraphKind::Edge => {
                let mut parts = graph.maximal_connected_components(all);
                parts.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.to_vec().cmp(&b.to_vec())));
                parts
                    .into_iter()
                    .map(|vars| Component::Marginal {
                        vars,
                        params: marginalize(full, dims, vars),
                    })
                    .collect()
            }
            GraphKind::Gamma => {
                let corner = class
                    .corner
                    .ok_or_else(|| Error::Internal("gamma graph without corner".into()))?;
                let child = VarSet::singleton(corner);
                let parents = all.difference(child);
                let parent_dims = marginal_dims(dims, parents);
                let params = (0..num_cells(&parent_dims))
                    .map(|k| conditional_slice(full, dims, child, parents, &cell_at(k, &parent_dims)))
                    .collect::<Result<Vec<_>>>()?;
                let mut out = vec![Component::Conditional {
                    child,
                    parents,
                    params,
                }];
                out.extend(parents.iter().map(|v| {
                    let vars = VarSet::singleton(v);
                    Component::Marginal {
                        vars,
                        params: marginalize(full, dims, vars),
                    }
                }));
                out
            }
        };
        Ok(FactorizedDirichlet {
            dims: dims.to_vec(),
            components,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    /// Every Dirichlet parameter vector, component by component.
    pub fn dirichlets(&self) -> Vec<&[f64]> {
        self.components.iter().flat_map(Component::dirichlets).collect()
    }

    /// Beta marginal of every probability parameter, with display names
    /// such as `pi_SC(1,1)`, `pi_S|AC(1|1,1)` or `pi(1,2,1)` for the full
    /// table.
    pub fn parameter_betas<S: AsRef<str>>(&self, names: &[S]) -> Vec<(String, f64, f64)> {
        let full = VarSet::full(self.dims.len());
        let fmt_levels = |cell: &[usize]| {
            cell.iter()
                .map(|l| l.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        let mut out = Vec::new();
        for comp in &self.components {
            match comp {
                Component::Marginal { vars, params } => {
                    let total: f64 = params.iter().sum();
                    let mdims = marginal_dims(&self.dims, *vars);
                    let prefix = if *vars == full {
                        "pi".to_string()
                    } else {
                        format!("pi_{}", vars.render(names))
                    };
                    for (k, &a) in params.iter().enumerate() {
                        out.push((
                            format!("{prefix}({})", fmt_levels(&cell_at(k, &mdims))),
                            a,
                            total - a,
                        ));
                    }
                }
                Component::Conditional {
                    child,
                    parents,
                    params,
                } => {
                    let cdims = marginal_dims(&self.dims, *child);
                    let pdims = marginal_dims(&self.dims, *parents);
                    for (i, &_) in params[0].iter().enumerate() {
                        for (k, vec) in params.iter().enumerate() {
                            let total: f64 = vec.iter().sum();
                            out.push((
                                format!(
                                    "pi_{}|{}({}|{})",
                                    child.render(names),
                                    parents.render(names),
                                    fmt_levels(&cell_at(i, &cdims)),
                                    fmt_levels(&cell_at(k, &pdims))
                                ),
                                vec[i],
                                total - vec[i],
                            ));
                        }
                    }
                }
            }
        }
        out
    }

    /// Same structure with `other`'s parameters added piecewise.
    fn structure_matches(&self, other: &FactorizedDirichlet) -> bool {
        self.dims == other.dims
            && self.components.len() == other.components.len()
            && self.components.iter().zip(&other.components).all(|(a, b)| match (a, b) {
                (Component::Marginal { vars: v1, params: p1 }, Component::Marginal { vars: v2, params: p2 }) => {
                    v1 == v2 && p1.len() == p2.len()
                }
                (
                    Component::Conditional { child: c1, parents: q1, params: p1 },
                    Component::Conditional { child: c2, parents: q2, params: p2 },
                ) => c1 == c2 && q1 == q2 && p1.len() == p2.len(),
                _ => false,
            })
    }
}

/// `log DK(α) = log Γ(Σα) − Σ log Γ(α_i)`.
pub fn log_dk(alpha: &[f64]) -> Result<f64> {
    if let Some((index, &value)) = alpha
        .iter()
        .enumerate()
        .find(|(_, a)| !(a.is_finite() && **a > 0.0))
    {
        return Err(Error::NonPositive {
            what: "Dirichlet parameters",
            index,
            value,
        });
    }
    let total: f64 = alpha.iter().sum();
    Ok(ln_gamma(total) - alpha.iter().map(|&a| ln_gamma(a)).sum::<f64>())
}

fn check_dims(alpha: &AlphaTable, table: &ContingencyTable) -> Result<()> {
    if alpha.dims() != table.dims() {
        return Err(Error::DimensionMismatch(format!(
            "prior dims {:?} vs table dims {:?}",
            alpha.dims(),
            table.dims()
        )));
    }
    Ok(())
}

pub fn prior_params(graph: &BidirectedGraph, alpha: &AlphaTable) -> Result<FactorizedDirichlet> {
    FactorizedDirichlet::from_full(graph, alpha.values(), &alpha.dims())
}

/// Conjugate update: every piece's parameters plus the matching counts.
pub fn posterior_params(
    graph: &BidirectedGraph,
    alpha: &AlphaTable,
    table: &ContingencyTable,
) -> Result<FactorizedDirichlet> {
    check_dims(alpha, table)?;
    FactorizedDirichlet::from_full(graph, &alpha.add_counts(table)?, &table.dims())
}

/// `Σ log DK(prior piece) − log DK(posterior piece)` over matching pieces.
pub fn log_dk_ratio(prior: &FactorizedDirichlet, posterior: &FactorizedDirichlet) -> Result<f64> {
    if !prior.structure_matches(posterior) {
        return Err(Error::Internal("prior and posterior factorizations differ".into()));
    }
    prior
        .dirichlets()
        .into_iter()
        .zip(posterior.dirichlets())
        .try_fold(0.0, |acc, (a, b)| Ok(acc + log_dk(a)? - log_dk(b)?))
}

/// `log f(n | G)`.
pub fn log_marginal_likelihood(
    graph: &BidirectedGraph,
    alpha: &AlphaTable,
    table: &ContingencyTable,
) -> Result<f64> {
    let prior = prior_params(graph, alpha)?;
    let posterior = posterior_params(graph, alpha, table)?;
    Ok(table.log_multinomial_coef()? + log_dk_ratio(&prior, &posterior)?)
}

/// Saturated-model `log f(n)` for a table of any shape: a single Dirichlet
/// over all cells.
pub fn saturated_log_marginal_likelihood(alpha: &AlphaTable, table: &ContingencyTable) -> Result<f64> {
    check_dims(alpha, table)?;
    Ok(table.log_multinomial_coef()? + log_dk(alpha.values())? - log_dk(&alpha.add_counts(table)?)?)
}

#[derive(Debug, Clone)]
pub struct ModelPosterior {
    pub graph: BidirectedGraph,
    pub posterior: FactorizedDirichlet,
    pub log_ml: f64,
    pub post_prob: f64,
}

/// Posterior probabilities over `models`, proportional to
/// `weight · f(n | G)` and normalized in log space. Weights default to
/// uniform.
pub fn posterior_model_probs(
    models: &[BidirectedGraph],
    alpha: &AlphaTable,
    table: &ContingencyTable,
    model_prior: Option<&[f64]>,
) -> Result<Vec<ModelPosterior>> {
    if models.is_empty() {
        return Err(Error::InvalidArgument("no models to compare".into()));
    }
    check_dims(alpha, table)?;
    let weights = match model_prior {
        Some(w) if w.len() != models.len() => {
            return Err(Error::InvalidArgument(format!(
                "{} model weights for {} models",
                w.len(),
                models.len()
            )))
        }
        Some(w) => {
            if let Some((index, &value)) = w.iter().enumerate().find(|(_, x)| !(x.is_finite() && **x > 0.0)) {
                return Err(Error::NonPositive {
                    what: "model prior weights",
                    index,
                    value,
                });
            }
            w.to_vec()
        }
        None => vec![1.0; models.len()],
    };
    let log_k = table.log_multinomial_coef()?;
    let mut out = models
        .iter()
        .map(|g| {
            let prior = prior_params(g, alpha)?;
            let posterior = posterior_params(g, alpha, table)?;
            let log_ml = log_k + log_dk_ratio(&prior, &posterior)?;
            Ok(ModelPosterior {
                graph: g.clone(),
                posterior,
                log_ml,
                post_prob: 0.0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let scores: Vec<f64> = out
        .iter()
        .zip(&weights)
        .map(|(m, w)| m.log_ml + w.ln())
        .collect();
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let unnorm: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let z: f64 = unnorm.iter().sum();
    for (m, u) in out.iter_mut().zip(unnorm) {
        m.post_prob = u / z;
    }
    Ok(out)
}

/// Model with the highest posterior probability (first one on ties).
pub fn map_model(models: &[ModelPosterior]) -> &ModelPosterior {
    models
        .iter()
        .reduce(|best, m| if m.post_prob > best.post_prob { m } else { best })
        .expect("nonempty model list")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BetaSummary {
    pub a: f64,
    pub b: f64,
    pub mean: f64,
    pub sd: f64,
    /// `(level, quantile)` pairs.
    pub quantiles: Vec<(f64, f64)>,
}

pub fn beta_summary(a: f64, b: f64, levels: &[f64]) -> Result<BetaSummary> {
    if !(a.is_finite() && a > 0.0 && b.is_finite() && b > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "Beta parameters must be positive, got ({a}, {b})"
        )));
    }
    if let Some(l) = levels.iter().find(|l| !(**l > 0.0 && **l < 1.0)) {
        return Err(Error::InvalidArgument(format!(
            "quantile level {l} is outside (0, 1)"
        )));
    }
    let s = a + b;
    Ok(BetaSummary {
        a,
        b,
        mean: a / s,
        sd: (a * b / (s * s * (s + 1.0))).sqrt(),
        quantiles: levels.iter().map(|&p| (p, beta_quantile(a, b, p))).collect(),
    })
}
