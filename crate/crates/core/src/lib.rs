//! Bayesian analysis of graphical models of marginal independence for
//! three-way contingency tables.
//!
//! The crate enumerates the eight bidirected graphs on three variables,
//! scores each one with an analytic Dirichlet marginal likelihood, and
//! summarizes posterior distributions of the marginal log-linear
//! parameters by Monte Carlo.
//!
//! ```
//! use mindep::{graph, inference, priors, table::ContingencyTable, table::Variable};
//!
//! let table = ContingencyTable::new(
//!     vec![
//!         Variable::binary("A"),
//!         Variable::binary("S"),
//!         Variable::binary("C"),
//!     ],
//!     vec![15.0, 22.0, 6.0, 4.0, 5.0, 7.0, 15.0, 5.0],
//! )
//! .unwrap();
//! let alpha = priors::make_prior(&priors::PriorSpec::perks(), &table).unwrap();
//! let models = graph::enumerate_models(&table.names()).unwrap();
//! let posts = inference::posterior_model_probs(&models, &alpha, &table, None).unwrap();
//! let best = inference::map_model(&posts);
//! assert_eq!(best.graph.label(), "SC+A");
//! ```

pub mod analysis;
pub mod error;
pub mod format;
pub mod graph;
pub mod inference;
pub mod marglog;
pub mod montecarlo;
pub mod priors;
pub mod special;
pub mod table;
pub mod varset;

pub use error::{Error, ErrorKind, Result};
pub use varset::VarSet;
