//! Marginal log-linear parameterization.
//!
//! A scheme fixes a hierarchical sequence of marginals ending in the full
//! variable set, allocates every log-linear effect to the first marginal that
//! contains it, and builds the marginalization matrix `M` and the block
//! diagonal contrast matrix `C` so that `λ = C · log(M · vec(π))`.
//!
//! Contrasts use sum-to-zero coding: for a variable with `ℓ` levels the
//! saturated design block is
//!
//! ```text
//! J(r, c) =  1  if c = 1 or r = c
//!           -1  if r = 1 and c > 1
//!            0  otherwise
//! ```
//!
//! and the design of a marginal is the Kronecker product of these blocks with
//! the last variable outermost, so the first variable's index changes fastest
//! in both cells and parameters.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::BidirectedGraph;
use crate::table::{cell_at, marginal_dims, num_cells};
use crate::varset::VarSet;

/// Simplex tolerance accepted by [`MarginalScheme::lambda_from_pi`].
pub const SIMPLEX_TOL: f64 = 1e-10;

/// Identifies one log-linear parameter: the marginal it is computed in, its
/// effect, and the (1-based, all ≥ 2) levels of the effect's variables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LambdaLabel {
    #[serde(serialize_with = "ser_bits")]
    pub marginal: VarSet,
    #[serde(serialize_with = "ser_bits")]
    pub effect: VarSet,
    pub levels: Vec<usize>,
}

fn ser_bits<S: serde::Serializer>(v: &VarSet, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter())
}

impl LambdaLabel {
    /// `lambda_SC(2,2)`, `lambda_∅`.
    pub fn parameter_name<S: AsRef<str>>(&self, names: &[S]) -> String {
        if self.effect.is_empty() {
            return "lambda_∅".to_string();
        }
        let levels: Vec<String> = self.levels.iter().map(|l| l.to_string()).collect();
        format!("lambda_{}({})", self.effect.render(names), levels.join(","))
    }

    /// `M_AS`.
    pub fn marginal_name<S: AsRef<str>>(&self, names: &[S]) -> String {
        format!("M_{}", self.marginal.render(names))
    }
}

/// λ values with their labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaVector {
    pub labels: Vec<LambdaLabel>,
    pub values: Vec<f64>,
}

impl LambdaVector {
    pub fn get(&self, effect: VarSet, levels: &[usize]) -> Option<f64> {
        self.labels
            .iter()
            .position(|l| l.effect == effect && l.levels == levels)
            .map(|i| self.values[i])
    }
}

/// Sort marginals by cardinality then member positions and append the full
/// set if absent.
pub fn hierarchical_ordering(marginals: &[VarSet], full: VarSet) -> Result<Vec<VarSet>> {
    for (i, m) in marginals.iter().enumerate() {
        if m.is_empty() {
            return Err(Error::InvalidMarginals("empty marginal".into()));
        }
        if !m.is_subset(full) {
            return Err(Error::InvalidMarginals(format!(
                "marginal {m:?} is not a subset of {full:?}"
            )));
        }
        if marginals[..i].contains(m) {
            return Err(Error::InvalidMarginals(format!("duplicate marginal {m:?}")));
        }
    }
    let mut out = marginals.to_vec();
    out.sort_by(VarSet::canonical_cmp);
    if !out.contains(&full) {
        out.push(full);
    }
    debug_assert!(is_hierarchical(&out));
    Ok(out)
}

/// No marginal is a subset of any predecessor.
pub fn is_hierarchical(ordered: &[VarSet]) -> bool {
    ordered
        .iter()
        .enumerate()
        .all(|(i, m)| ordered[..i].iter().all(|p| !m.is_subset(*p)))
}

fn for_each_permutation<F: FnMut(&[VarSet]) -> bool>(items: &mut Vec<VarSet>, k: usize, f: &mut F) -> bool {
    if k == items.len() {
        return f(items);
    }
    for i in k..items.len() {
        items.swap(k, i);
        if for_each_permutation(items, k + 1, f) {
            items.swap(k, i);
            return true;
        }
        items.swap(k, i);
    }
    false
}

fn has_running_intersection(order: &[VarSet]) -> bool {
    (2..order.len()).all(|k| {
        let before = order[..k].iter().fold(VarSet::EMPTY, |s, m| s.union(*m));
        let lhs = before.intersection(order[k]);
        order[..k].iter().any(|mj| mj.intersection(order[k]) == lhs)
    })
}

/// Decomposability of a class of pairwise incomparable marginals: at most
/// two elements, or some ordering has the running intersection property.
pub fn is_decomposable(marginals: &[VarSet]) -> Result<bool> {
    for (i, a) in marginals.iter().enumerate() {
        for b in &marginals[i + 1..] {
            if a.is_subset(*b) || b.is_subset(*a) {
                return Err(Error::InvalidMarginals(format!(
                    "marginals {a:?} and {b:?} are comparable"
                )));
            }
        }
    }
    if marginals.len() <= 2 {
        return Ok(true);
    }
    if marginals.len() > 8 {
        return Err(Error::InvalidMarginals(
            "decomposability search is limited to 8 marginals".into(),
        ));
    }
    let mut items = marginals.to_vec();
    Ok(for_each_permutation(&mut items, 0, &mut has_running_intersection))
}

fn maximal_elements(sets: &[VarSet]) -> Vec<VarSet> {
    let mut out: Vec<VarSet> = Vec::new();
    for (i, s) in sets.iter().enumerate() {
        let dominated = sets
            .iter()
            .enumerate()
            .any(|(j, t)| j != i && s.is_subset(*t) && (s != t || j < i));
        if !dominated {
            out.push(*s);
        }
    }
    out
}

/// Ordered decomposability of a hierarchical sequence of marginals.
pub fn is_ordered_decomposable(ordered: &[VarSet]) -> bool {
    if ordered.len() <= 2 {
        return true;
    }
    (3..=ordered.len()).all(|k| is_decomposable(&maximal_elements(&ordered[..k])).unwrap_or(false))
}

/// Effects computed from each marginal: the first marginal gets its whole
/// power set (including the intercept), later ones only the subsets no
/// predecessor contains. Effects are listed in parameter order.
pub fn allocate_effects(ordered: &[VarSet]) -> Vec<Vec<VarSet>> {
    ordered
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let mut effects: Vec<VarSet> = m
                .subsets()
                .filter(|e| !ordered[..i].iter().any(|p| e.is_subset(*p)))
                .collect();
            effects.sort_by_key(|e| e.bits());
            effects
        })
        .collect()
}

/// Highest-order effect of every disconnected set, keyed by its marginal.
pub fn zero_constraints(graph: &BidirectedGraph) -> Vec<(VarSet, VarSet)> {
    graph.disconnected_sets().into_iter().map(|d| (d, d)).collect()
}

fn kronecker_all(factors: &[DMatrix<f64>]) -> DMatrix<f64> {
    factors
        .iter()
        .fold(DMatrix::from_element(1, 1, 1.0), |acc, f| acc.kronecker(f))
}

/// Block of `M` for one marginal: `⊗ A_v` over variables in reverse order,
/// `A_v = I` for members and a row of ones otherwise.
pub fn marginalization_block(marginal: VarSet, dims: &[usize]) -> DMatrix<f64> {
    let factors: Vec<DMatrix<f64>> = dims
        .iter()
        .enumerate()
        .rev()
        .map(|(v, &l)| {
            if marginal.contains(v) {
                DMatrix::identity(l, l)
            } else {
                DMatrix::from_element(1, l, 1.0)
            }
        })
        .collect();
    kronecker_all(&factors)
}

pub fn build_m_matrix(ordered: &[VarSet], dims: &[usize]) -> DMatrix<f64> {
    let blocks: Vec<DMatrix<f64>> = ordered
        .iter()
        .map(|m| marginalization_block(*m, dims))
        .collect();
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let cols = num_cells(dims);
    let mut out = DMatrix::zeros(rows, cols);
    let mut r = 0;
    for b in &blocks {
        out.view_mut((r, 0), (b.nrows(), cols)).copy_from(b);
        r += b.nrows();
    }
    out
}

/// Sum-to-zero design block for one variable with `levels` levels.
pub fn design_block(levels: usize) -> DMatrix<f64> {
    DMatrix::from_fn(levels, levels, |r, c| {
        if c == 0 || r == c {
            1.0
        } else if r == 0 {
            -1.0
        } else {
            0.0
        }
    })
}

/// Saturated design for the marginal over `marginal`.
pub fn saturated_design(marginal: VarSet, dims: &[usize]) -> DMatrix<f64> {
    let factors: Vec<DMatrix<f64>> = marginal
        .to_vec()
        .into_iter()
        .rev()
        .map(|v| design_block(dims[v]))
        .collect();
    kronecker_all(&factors)
}

/// Labels of every row of the saturated contrast matrix of `marginal`.
pub fn saturated_labels(marginal: VarSet, dims: &[usize]) -> Vec<LambdaLabel> {
    let members = marginal.to_vec();
    let mdims = marginal_dims(dims, marginal);
    (0..num_cells(&mdims))
        .map(|r| {
            let local = cell_at(r, &mdims);
            let effect = VarSet::from_indices(
                members
                    .iter()
                    .zip(&local)
                    .filter(|(_, &i)| i > 1)
                    .map(|(&v, _)| v),
            );
            LambdaLabel {
                marginal,
                effect,
                levels: local.into_iter().filter(|&i| i > 1).collect(),
            }
        })
        .collect()
}

/// `C` as a direct sum of the per-marginal contrast rows for the allocated
/// effects, with one label per row.
pub fn build_c_matrix(
    ordered: &[VarSet],
    effects: &[Vec<VarSet>],
    dims: &[usize],
) -> Result<(DMatrix<f64>, Vec<LambdaLabel>)> {
    let mut blocks = Vec::new();
    let mut labels = Vec::new();
    let mut cols = 0;
    for (m, allowed) in ordered.iter().zip(effects) {
        let inverse = saturated_design(*m, dims)
            .try_inverse()
            .ok_or_else(|| Error::Internal(format!("singular design for marginal {m:?}")))?;
        let keep: Vec<usize> = saturated_labels(*m, dims)
            .into_iter()
            .enumerate()
            .filter(|(_, l)| allowed.contains(&l.effect))
            .map(|(r, l)| {
                labels.push(l);
                r
            })
            .collect();
        let block = inverse.select_rows(keep.iter());
        cols += block.ncols();
        blocks.push(block);
    }
    let rows = labels.len();
    let mut c = DMatrix::zeros(rows, cols);
    let (mut r0, mut c0) = (0, 0);
    for b in &blocks {
        c.view_mut((r0, c0), b.shape()).copy_from(b);
        r0 += b.nrows();
        c0 += b.ncols();
    }
    Ok((c, labels))
}

/// A complete and hierarchical marginal log-linear parameterization.
#[derive(Debug, Clone)]
pub struct MarginalScheme {
    names: Vec<String>,
    dims: Vec<usize>,
    marginals: Vec<VarSet>,
    effects: Vec<Vec<VarSet>>,
    zero_constrained: Vec<(VarSet, VarSet)>,
    m_matrix: DMatrix<f64>,
    c_matrix: DMatrix<f64>,
    labels: Vec<LambdaLabel>,
}

impl MarginalScheme {
    /// Scheme over `marginals` (any order; the full set is appended), with the
    /// given (marginal, effect) pairs constrained to zero.
    pub fn new(
        names: Vec<String>,
        dims: Vec<usize>,
        marginals: &[VarSet],
        zero_constrained: Vec<(VarSet, VarSet)>,
    ) -> Result<Self> {
        if names.len() != dims.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} names for {} dimensions",
                names.len(),
                dims.len()
            )));
        }
        let full = VarSet::full(dims.len());
        let ordered = hierarchical_ordering(marginals, full)?;
        let effects = allocate_effects(&ordered);
        for (m, e) in &zero_constrained {
            let i = ordered.iter().position(|x| x == m).ok_or_else(|| {
                Error::InvalidMarginals(format!("constrained marginal {m:?} not in scheme"))
            })?;
            if !effects[i].contains(e) {
                return Err(Error::InvalidMarginals(format!(
                    "effect {e:?} is not computed from marginal {m:?}"
                )));
            }
        }
        let m_matrix = build_m_matrix(&ordered, &dims);
        let (c_matrix, labels) = build_c_matrix(&ordered, &effects, &dims)?;
        Ok(MarginalScheme {
            names,
            dims,
            marginals: ordered,
            effects,
            zero_constrained,
            m_matrix,
            c_matrix,
            labels,
        })
    }

    /// Scheme for a bidirected graph: marginals `D(G) ∪ {V}` with the
    /// highest-order effect of each disconnected set constrained to zero.
    pub fn for_graph(graph: &BidirectedGraph, dims: &[usize]) -> Result<Self> {
        if graph.num_vertices() != dims.len() {
            return Err(Error::DimensionMismatch(format!(
                "graph has {} vertices, table has {} variables",
                graph.num_vertices(),
                dims.len()
            )));
        }
        MarginalScheme::new(
            graph.vertices().to_vec(),
            dims.to_vec(),
            &graph.disconnected_sets(),
            zero_constraints(graph),
        )
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn marginals(&self) -> &[VarSet] {
        &self.marginals
    }

    pub fn effects(&self) -> &[Vec<VarSet>] {
        &self.effects
    }

    pub fn zero_constrained(&self) -> &[(VarSet, VarSet)] {
        &self.zero_constrained
    }

    pub fn m_matrix(&self) -> &DMatrix<f64> {
        &self.m_matrix
    }

    pub fn c_matrix(&self) -> &DMatrix<f64> {
        &self.c_matrix
    }

    pub fn labels(&self) -> &[LambdaLabel] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn is_constrained(&self, label: &LambdaLabel) -> bool {
        self.zero_constrained
            .iter()
            .any(|(m, e)| *m == label.marginal && *e == label.effect)
    }

    /// Row mask of the zero-constrained parameters.
    pub fn constrained_rows(&self) -> Vec<bool> {
        self.labels.iter().map(|l| self.is_constrained(l)).collect()
    }

    pub fn is_ordered_decomposable(&self) -> bool {
        is_ordered_decomposable(&self.marginals)
    }

    /// `C · log(M · vec(π))` without labels.
    pub fn lambda_values(&self, pi: &[f64]) -> Result<Vec<f64>> {
        if pi.len() != self.m_matrix.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} probabilities, got {}",
                self.m_matrix.ncols(),
                pi.len()
            )));
        }
        if pi.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidArgument(
                "probabilities must be finite and nonnegative".into(),
            ));
        }
        let sum: f64 = pi.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::InvalidArgument(format!(
                "probabilities sum to {sum}, not 1"
            )));
        }
        let marg = &self.m_matrix * DVector::from_column_slice(pi);
        if let Some(row) = marg.iter().position(|&p| p <= 0.0) {
            return Err(Error::LogOfZero { row });
        }
        let lambda = &self.c_matrix * marg.map(f64::ln);
        Ok(lambda.as_slice().to_vec())
    }

    pub fn lambda_from_pi(&self, pi: &[f64]) -> Result<LambdaVector> {
        Ok(LambdaVector {
            labels: self.labels.clone(),
            values: self.lambda_values(pi)?,
        })
    }
}

impl fmt::Display for MarginalScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (m, effects) in self.marginals.iter().zip(&self.effects) {
            let effects: Vec<String> = effects
                .iter()
                .map(|e| {
                    if e.is_empty() {
                        "∅".to_string()
                    } else {
                        e.render(&self.names)
                    }
                })
                .collect();
            writeln!(f, "M_{}: {{{}}}", m.render(&self.names), effects.join(", "))?;
        }
        Ok(())
    }
}
