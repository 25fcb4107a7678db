//! Contingency tables, vec ordering, and marginalization of cell arrays.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::ln_gamma;
use crate::varset::{VarSet, MAX_VARS};

/// Tolerance used when checking that real-valued counts are integers.
pub const INTEGER_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub levels: Vec<String>,
}

impl Variable {
    pub fn new<S: Into<String>>(name: impl Into<String>, levels: Vec<S>) -> Result<Self> {
        let name = name.into();
        let levels: Vec<String> = levels.into_iter().map(Into::into).collect();
        if name.is_empty() {
            return Err(Error::InvalidTable("variable name is empty".into()));
        }
        if levels.len() < 2 {
            return Err(Error::InvalidTable(format!(
                "variable `{name}` needs at least two levels"
            )));
        }
        let mut seen = HashSet::new();
        for l in &levels {
            if !seen.insert(l.as_str()) {
                return Err(Error::InvalidTable(format!(
                    "duplicate level `{l}` in variable `{name}`"
                )));
            }
        }
        Ok(Variable { name, levels })
    }

    /// A two-level variable with levels `"1"` and `"2"`.
    pub fn binary(name: &str) -> Self {
        Variable::with_cardinality(name, 2)
    }

    /// A variable with levels `"1"..="k"`.
    pub fn with_cardinality(name: &str, k: usize) -> Self {
        Variable {
            name: name.to_string(),
            levels: (1..=k).map(|i| i.to_string()).collect(),
        }
    }

    pub fn cardinality(&self) -> usize {
        self.levels.len()
    }

    pub fn level_index(&self, label: &str) -> Option<usize> {
        self.levels.iter().position(|l| l == label)
    }
}

/// 0-based offset of a cell (1-based level indices) in vec order, where the
/// first variable's index changes fastest.
pub fn vec_index(cell: &[usize], dims: &[usize]) -> Result<usize> {
    if cell.len() != dims.len() || cell.iter().zip(dims).any(|(&i, &l)| i < 1 || i > l) {
        return Err(Error::InvalidCell {
            cell: cell.to_vec(),
            dims: dims.to_vec(),
        });
    }
    let mut offset = 0;
    let mut stride = 1;
    for (&i, &l) in cell.iter().zip(dims) {
        offset += (i - 1) * stride;
        stride *= l;
    }
    Ok(offset)
}

/// Inverse of [`vec_index`]: 1-based level indices of the cell at `offset`.
pub fn cell_at(mut offset: usize, dims: &[usize]) -> Vec<usize> {
    dims.iter()
        .map(|&l| {
            let i = offset % l;
            offset /= l;
            i + 1
        })
        .collect()
}

pub fn num_cells(dims: &[usize]) -> usize {
    dims.iter().product()
}

/// Dimensions of the marginal over `keep`, in table order.
pub fn marginal_dims(dims: &[usize], keep: VarSet) -> Vec<usize> {
    keep.iter().map(|v| dims[v]).collect()
}

/// Offset of the projection of full-table cell `offset` onto `keep`.
pub fn project_offset(offset: usize, dims: &[usize], keep: VarSet) -> usize {
    let mut rem = offset;
    let mut out = 0;
    let mut stride = 1;
    for (v, &l) in dims.iter().enumerate() {
        let i = rem % l;
        rem /= l;
        if keep.contains(v) {
            out += i * stride;
            stride *= l;
        }
    }
    out
}

/// Sum a full-table array over the variables not in `keep`. The result is in
/// vec order over `keep`.
pub fn marginalize(values: &[f64], dims: &[usize], keep: VarSet) -> Vec<f64> {
    let mut out = vec![0.0; num_cells(&marginal_dims(dims, keep))];
    for (offset, &x) in values.iter().enumerate() {
        out[project_offset(offset, dims, keep)] += x;
    }
    out
}

/// Slice of the marginal over `m1 ∪ m2` with the `m2` variables fixed at
/// `levels_m2` (1-based, in variable order). The result is in vec order over
/// `m1`. With `m2` empty this is the marginal over `m1`.
pub fn conditional_slice(
    values: &[f64],
    dims: &[usize],
    m1: VarSet,
    m2: VarSet,
    levels_m2: &[usize],
) -> Result<Vec<f64>> {
    let m2_dims = marginal_dims(dims, m2);
    let fixed = vec_index(levels_m2, &m2_dims)?;
    let union = m1.union(m2);
    let joint = marginalize(values, dims, union);
    let union_dims = marginal_dims(dims, union);
    let m1_size = num_cells(&marginal_dims(dims, m1));
    // positions of m1's variables within the union
    let m1_local = VarSet::from_indices(
        union.iter().enumerate().filter(|(_, v)| m1.contains(*v)).map(|(j, _)| j),
    );
    let m2_local = VarSet::full(union.len()).difference(m1_local);
    let mut out = vec![0.0; m1_size];
    for (k, &x) in joint.iter().enumerate() {
        if project_offset(k, &union_dims, m2_local) == fixed {
            out[project_offset(k, &union_dims, m1_local)] = x;
        }
    }
    Ok(out)
}

/// Observed or imaginary cell counts of a cross-classification.
#[derive(Debug, Clone, PartialEq)]
pub struct ContingencyTable {
    variables: Vec<Variable>,
    counts: Vec<f64>,
}

impl ContingencyTable {
    pub fn new(variables: Vec<Variable>, counts: Vec<f64>) -> Result<Self> {
        if variables.is_empty() {
            return Err(Error::InvalidTable("no variables".into()));
        }
        if variables.len() > MAX_VARS {
            return Err(Error::InvalidTable(format!(
                "at most {MAX_VARS} variables are supported"
            )));
        }
        let mut names = HashSet::new();
        for v in &variables {
            if v.cardinality() < 2 {
                return Err(Error::InvalidTable(format!(
                    "variable `{}` needs at least two levels",
                    v.name
                )));
            }
            if !names.insert(v.name.as_str()) {
                return Err(Error::InvalidTable(format!(
                    "duplicate variable name `{}`",
                    v.name
                )));
            }
        }
        let expected = variables
            .iter()
            .try_fold(1usize, |acc, v| acc.checked_mul(v.cardinality()))
            .ok_or_else(|| Error::InvalidTable("table too large".into()))?;
        if counts.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "expected {expected} counts, got {}",
                counts.len()
            )));
        }
        if let Some((i, &c)) = counts
            .iter()
            .enumerate()
            .find(|(_, c)| !c.is_finite() || **c < 0.0)
        {
            return Err(Error::InvalidTable(format!(
                "count {c} at cell {i} is not a nonnegative finite number"
            )));
        }
        Ok(ContingencyTable { variables, counts })
    }

    /// A table of zeros with the same variables.
    pub fn zeros(variables: Vec<Variable>) -> Result<Self> {
        let n = variables.iter().map(Variable::cardinality).product();
        ContingencyTable::new(variables, vec![0.0; n])
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.variables.iter().map(Variable::cardinality).collect()
    }

    pub fn names(&self) -> Vec<String> {
        self.variables.iter().map(|v| v.name.clone()).collect()
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn num_cells(&self) -> usize {
        self.counts.len()
    }

    pub fn all_vars(&self) -> VarSet {
        VarSet::full(self.variables.len())
    }

    pub fn var_index(&self, name: &str) -> Result<usize> {
        self.variables
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn var_set<S: AsRef<str>>(&self, names: &[S]) -> Result<VarSet> {
        names
            .iter()
            .try_fold(VarSet::EMPTY, |s, n| Ok(s.with(self.var_index(n.as_ref())?)))
    }

    pub fn get(&self, cell: &[usize]) -> Result<f64> {
        Ok(self.counts[vec_index(cell, &self.dims())?])
    }

    /// Check that `m` only refers to variables of this table.
    pub fn check_subset(&self, m: VarSet) -> Result<()> {
        if m.is_subset(self.all_vars()) {
            Ok(())
        } else {
            let bad = m.difference(self.all_vars()).iter().next().unwrap_or(0);
            Err(Error::UnknownVariable(format!("#{bad}")))
        }
    }

    /// Marginal table over `m`, keeping the table's relative variable order.
    pub fn marginal_counts(&self, m: VarSet) -> Result<ContingencyTable> {
        if m.is_empty() {
            return Err(Error::InvalidArgument("marginal must be nonempty".into()));
        }
        self.check_subset(m)?;
        let variables = m.iter().map(|v| self.variables[v].clone()).collect();
        Ok(ContingencyTable {
            variables,
            counts: marginalize(&self.counts, &self.dims(), m),
        })
    }

    /// Same counts with variables reordered so that new position `k` holds
    /// old variable `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> Result<ContingencyTable> {
        let n = self.num_vars();
        let mut seen = vec![false; n];
        if order.len() != n || order.iter().any(|&o| o >= n || std::mem::replace(&mut seen[o], true)) {
            return Err(Error::InvalidArgument(format!(
                "{order:?} is not a permutation of 0..{n}"
            )));
        }
        let old_dims = self.dims();
        let variables: Vec<Variable> = order.iter().map(|&o| self.variables[o].clone()).collect();
        let new_dims: Vec<usize> = variables.iter().map(Variable::cardinality).collect();
        let mut counts = vec![0.0; self.counts.len()];
        for (offset, slot) in counts.iter_mut().enumerate() {
            let new_cell = cell_at(offset, &new_dims);
            let mut old_cell = vec![0; n];
            for (k, &o) in order.iter().enumerate() {
                old_cell[o] = new_cell[k];
            }
            *slot = self.counts[vec_index(&old_cell, &old_dims)?];
        }
        ContingencyTable::new(variables, counts)
    }

    /// True if every count is an integer within [`INTEGER_TOL`].
    pub fn is_integral(&self) -> bool {
        self.counts
            .iter()
            .all(|c| (c - c.round()).abs() <= INTEGER_TOL)
    }

    /// `log K(n) = log Γ(N+1) - Σ log Γ(n(i)+1)`.
    pub fn log_multinomial_coef(&self) -> Result<f64> {
        if let Some((index, &value)) = self
            .counts
            .iter()
            .enumerate()
            .find(|(_, c)| (**c - c.round()).abs() > INTEGER_TOL)
        {
            return Err(Error::NonIntegerCounts { index, value });
        }
        let rounded = self.counts.iter().map(|c| c.round());
        let n: f64 = rounded.clone().sum();
        Ok(ln_gamma(n + 1.0) - rounded.map(|c| ln_gamma(c + 1.0)).sum::<f64>())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table_2x2(counts: [f64; 4]) -> ContingencyTable {
        ContingencyTable::new(
            vec![Variable::binary("X"), Variable::binary("Y")],
            counts.to_vec(),
        )
        .unwrap()
    }

    #[test]
    fn vec_index_2x2() {
        let dims = [2, 2];
        assert_eq!(vec_index(&[1, 1], &dims).unwrap(), 0);
        assert_eq!(vec_index(&[2, 1], &dims).unwrap(), 1);
        assert_eq!(vec_index(&[1, 2], &dims).unwrap(), 2);
        assert_eq!(vec_index(&[2, 2], &dims).unwrap(), 3);
    }

    #[test]
    fn vec_index_3x2x4() {
        assert_eq!(vec_index(&[2, 1, 3], &[3, 2, 4]).unwrap(), 13);
        assert_eq!(vec_index(&[1, 1, 1], &[3, 2, 4]).unwrap(), 0);
    }

    #[test]
    fn vec_index_rejects_out_of_range() {
        assert!(matches!(
            vec_index(&[3, 1], &[2, 2]),
            Err(Error::InvalidCell { .. })
        ));
        assert!(vec_index(&[0, 1], &[2, 2]).is_err());
        assert!(vec_index(&[1], &[2, 2]).is_err());
    }

    #[test]
    fn rejects_bad_tables() {
        let vars = || vec![Variable::binary("X"), Variable::binary("Y")];
        assert!(ContingencyTable::new(vars(), vec![1.0; 3]).is_err());
        assert!(ContingencyTable::new(vars(), vec![1.0, -1.0, 0.0, 0.0]).is_err());
        assert!(ContingencyTable::new(
            vec![Variable::binary("X"), Variable::binary("X")],
            vec![0.0; 4]
        )
        .is_err());
        assert!(Variable::new("X", vec!["a", "a"]).is_err());
        assert!(Variable::new("X", vec!["a"]).is_err());
    }

    #[test]
    fn marginal_counts_first_variable() {
        let t = table_2x2([1.0, 2.0, 3.0, 4.0]);
        let m = t.marginal_counts(VarSet::singleton(0)).unwrap();
        assert_eq!(m.counts(), &[4.0, 6.0]);
        let m = t.marginal_counts(VarSet::singleton(1)).unwrap();
        assert_eq!(m.counts(), &[3.0, 7.0]);
        assert_eq!(t.marginal_counts(t.all_vars()).unwrap(), t);
        assert!(t.marginal_counts(VarSet::EMPTY).is_err());
        assert!(t.marginal_counts(VarSet::singleton(5)).is_err());
        assert!(matches!(t.var_set(&["Z"]), Err(Error::UnknownVariable(_))));
    }

    #[test]
    fn log_multinomial_small() {
        assert!(table_2x2([1.0, 0.0, 0.0, 0.0]).log_multinomial_coef().unwrap().abs() < 1e-14);
        let k = ContingencyTable::new(vec![Variable::binary("X")], vec![2.0, 2.0])
            .unwrap()
            .log_multinomial_coef()
            .unwrap();
        assert!((k - 6f64.ln()).abs() < 1e-13);
        assert!(matches!(
            table_2x2([0.5, 1.0, 1.0, 1.0]).log_multinomial_coef(),
            Err(Error::NonIntegerCounts { index: 0, .. })
        ));
    }

    #[test]
    fn permuted_moves_cells() {
        let t = table_2x2([1.0, 2.0, 3.0, 4.0]);
        let p = t.permuted(&[1, 0]).unwrap();
        assert_eq!(p.names(), vec!["Y", "X"]);
        assert_eq!(p.counts(), &[1.0, 3.0, 2.0, 4.0]);
        assert!(t.permuted(&[0, 0]).is_err());
    }
}
