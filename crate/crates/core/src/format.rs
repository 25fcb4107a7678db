//! Table file format and model label parsing.
//!
//! A table file is a JSON document:
//!
//! ```json
//! {
//!   "version": 1,
//!   "name": "antitoxin",
//!   "variables": [
//!     {"name": "A", "levels": ["Yes", "No"]},
//!     {"name": "S", "levels": ["No", "Yes"]},
//!     {"name": "C", "levels": ["More severe", "Less severe"]}
//!   ],
//!   "counts": [15, 22, 6, 4, 5, 7, 15, 5]
//! }
//! ```
//!
//! `counts` lists the cells in vec order (first variable fastest). Instead
//! of `counts` a file may give `cells`, a list of
//! `{"levels": ["Yes", "No", "Less severe"], "count": 6}` entries naming
//! every cell exactly once. `version` and `name` are optional.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{enumerate_models, BidirectedGraph};
use crate::table::{cell_at, num_cells, vec_index, ContingencyTable, Variable};
use crate::varset::VarSet;

pub const FORMAT_VERSION: u32 = 1;

/// Largest number of cells a table file may describe.
pub const MAX_CELLS: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub variables: Vec<VariableSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cells: Option<Vec<CellSpec>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableSpec {
    pub name: String,
    pub levels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellSpec {
    pub levels: Vec<String>,
    pub count: f64,
}

fn field_error(field: &str, e: Error) -> Error {
    match e {
        Error::Parse { .. } => e,
        other => Error::parse(field, other.to_string()),
    }
}

impl TableFile {
    pub fn into_table(self) -> Result<ContingencyTable> {
        if let Some(v) = self.version {
            if v != FORMAT_VERSION {
                return Err(Error::parse(
                    "version",
                    format!("unsupported version {v}, expected {FORMAT_VERSION}"),
                ));
            }
        }
        let variables = self
            .variables
            .into_iter()
            .enumerate()
            .map(|(i, v)| Variable::new(v.name, v.levels).map_err(|e| field_error(&format!("variables[{i}]"), e)))
            .collect::<Result<Vec<_>>>()?;
        let expected = variables
            .iter()
            .try_fold(1usize, |acc, v| acc.checked_mul(v.cardinality()))
            .filter(|n| *n <= MAX_CELLS)
            .ok_or_else(|| Error::parse("variables", format!("tables are limited to {MAX_CELLS} cells")))?;
        let counts = match (self.counts, self.cells) {
            (Some(c), None) => c,
            (None, Some(cells)) => cells_to_counts(&variables, &cells)?,
            (Some(_), Some(_)) => {
                return Err(Error::parse("counts", "give either `counts` or `cells`, not both"))
            }
            (None, None) => return Err(Error::parse("counts", "missing `counts` or `cells`")),
        };
        if counts.len() != expected {
            return Err(Error::parse(
                "counts",
                format!("expected {expected} counts, got {}", counts.len()),
            ));
        }
        if let Some((i, c)) = counts.iter().enumerate().find(|(_, c)| !(c.is_finite() && **c >= 0.0)) {
            return Err(Error::parse(
                "counts",
                format!("count {c} at cell {i} is not a nonnegative number"),
            ));
        }
        ContingencyTable::new(variables, counts).map_err(|e| field_error("variables", e))
    }

    pub fn from_table(table: &ContingencyTable, name: Option<String>) -> Self {
        TableFile {
            version: Some(FORMAT_VERSION),
            name,
            variables: table
                .variables()
                .iter()
                .map(|v| VariableSpec {
                    name: v.name.clone(),
                    levels: v.levels.clone(),
                })
                .collect(),
            counts: Some(table.counts().to_vec()),
            cells: None,
        }
    }
}

fn cells_to_counts(variables: &[Variable], cells: &[CellSpec]) -> Result<Vec<f64>> {
    let dims: Vec<usize> = variables.iter().map(Variable::cardinality).collect();
    let mut counts: Vec<Option<f64>> = vec![None; num_cells(&dims)];
    for (i, c) in cells.iter().enumerate() {
        let field = format!("cells[{i}].levels");
        if c.levels.len() != variables.len() {
            return Err(Error::parse(
                field,
                format!("expected {} levels, got {}", variables.len(), c.levels.len()),
            ));
        }
        let cell = c
            .levels
            .iter()
            .zip(variables)
            .map(|(l, v)| {
                v.level_index(l)
                    .map(|k| k + 1)
                    .ok_or_else(|| Error::parse(&field, format!("`{l}` is not a level of `{}`", v.name)))
            })
            .collect::<Result<Vec<_>>>()?;
        let k = vec_index(&cell, &dims)?;
        if counts[k].is_some() {
            return Err(Error::parse(field, format!("duplicate cell {:?}", c.levels)));
        }
        counts[k] = Some(c.count);
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(k, c)| {
            c.ok_or_else(|| {
                let cell = cell_at(k, &dims);
                let labels: Vec<&str> = cell
                    .iter()
                    .zip(variables)
                    .map(|(l, v)| v.levels[l - 1].as_str())
                    .collect();
                Error::parse("cells", format!("missing cell {labels:?}"))
            })
        })
        .collect()
}

/// Parse a table file from raw bytes.
pub fn parse_table_file(bytes: &[u8]) -> Result<ContingencyTable> {
    let file: TableFile = serde_json::from_slice(bytes).map_err(|e| Error::parse("document", e.to_string()))?;
    file.into_table()
}

/// Serialize a table in the `counts` form.
pub fn to_table_file(table: &ContingencyTable) -> String {
    serde_json::to_string_pretty(&TableFile::from_table(table, None)).expect("table serializes")
}

/// Split a clique token into variable names, either on `*` or, when all
/// names are given run together, by matching names against the token.
fn segment(token: &str, names: &[String]) -> Option<VarSet> {
    let lower: Vec<String> = names.iter().map(|n| n.to_lowercase()).collect();
    let token = token.trim().to_lowercase();
    if token.is_empty() {
        return None;
    }
    if token.contains('*') {
        return token.split('*').try_fold(VarSet::EMPTY, |acc, part| {
            let i = lower.iter().position(|n| n == part.trim())?;
            (!acc.contains(i)).then(|| acc.with(i))
        });
    }
    fn go(rest: &str, lower: &[String], acc: VarSet) -> Option<VarSet> {
        if rest.is_empty() {
            return Some(acc);
        }
        lower.iter().enumerate().find_map(|(i, n)| {
            if acc.contains(i) {
                return None;
            }
            rest.strip_prefix(n.as_str()).and_then(|r| go(r, lower, acc.with(i)))
        })
    }
    go(&token, &lower, VarSet::EMPTY)
}

/// Resolve a model label such as `SC+A`, `a+sc` or `AS+SC` to one of the
/// eight canonical graphs on `names`.
pub fn parse_model_label<S: AsRef<str>>(label: &str, names: &[S]) -> Result<BidirectedGraph> {
    let models = enumerate_models(names)?;
    let names: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
    let unknown = || Error::UnknownModel {
        label: label.to_string(),
        valid: models.iter().map(BidirectedGraph::label).collect(),
    };
    let mut cliques = label
        .split('+')
        .map(|t| segment(t, &names))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(unknown)?;
    cliques.sort_by_key(|c| c.bits());
    let by_cliques: HashMap<Vec<u32>, &BidirectedGraph> = models
        .iter()
        .map(|g| {
            let mut c: Vec<u32> = g.maximal_cliques().iter().map(|c| c.bits()).collect();
            c.sort();
            (c, g)
        })
        .collect();
    let key: Vec<u32> = cliques.iter().map(|c| c.bits()).collect();
    by_cliques.get(&key).map(|g| (*g).clone()).ok_or_else(unknown)
}
