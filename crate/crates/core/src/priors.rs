//! Full-table Dirichlet priors, their marginal and conditional collapses, and
//! prior diagnostics.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::table::{conditional_slice, marginalize, ContingencyTable, Variable};
use crate::varset::VarSet;

/// Relative tolerance for the equal-entries check in
/// [`AlphaTable::variance_ratio`].
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorKind {
    /// `α(i) = 1/2`
    Jeffreys,
    /// `α(i) = 1`
    UnitExpectedCell,
    /// `α(i) = 1/|I|`
    PerksUip,
    /// `α(i) = n(i)/N`
    EmpiricalBayes,
    /// `α(i) = w·n*(i) + α₀`
    Power,
}

impl fmt::Display for PriorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PriorKind::Jeffreys => "jeffreys",
            PriorKind::UnitExpectedCell => "unit_expected_cell",
            PriorKind::PerksUip => "perks_uip",
            PriorKind::EmpiricalBayes => "empirical_bayes",
            PriorKind::Power => "power",
        })
    }
}

/// Imaginary data, weight and pre-prior of a power prior.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerOptions {
    pub imaginary: ContingencyTable,
    pub weight: f64,
    pub preprior: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PriorSpec {
    pub kind: PriorKind,
    pub power: Option<PowerOptions>,
}

impl PriorSpec {
    pub fn jeffreys() -> Self {
        PriorSpec::simple(PriorKind::Jeffreys)
    }

    pub fn unit_expected_cell() -> Self {
        PriorSpec::simple(PriorKind::UnitExpectedCell)
    }

    pub fn perks() -> Self {
        PriorSpec::simple(PriorKind::PerksUip)
    }

    pub fn empirical_bayes() -> Self {
        PriorSpec::simple(PriorKind::EmpiricalBayes)
    }

    pub fn simple(kind: PriorKind) -> Self {
        PriorSpec { kind, power: None }
    }

    pub fn power(imaginary: ContingencyTable, weight: f64, preprior: f64) -> Self {
        PriorSpec {
            kind: PriorKind::Power,
            power: Some(PowerOptions {
                imaginary,
                weight,
                preprior,
            }),
        }
    }

    /// Unit information power prior from an imaginary table: `w = 1/N*`.
    pub fn unit_information(imaginary: ContingencyTable, preprior: f64) -> Self {
        let w = 1.0 / imaginary.total();
        PriorSpec::power(imaginary, w, preprior)
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.kind, &self.power) {
            (PriorKind::Power, None) => Err(Error::InvalidPrior(
                "power prior needs an imaginary table, weight and pre-prior".into(),
            )),
            (PriorKind::Power, Some(p)) => {
                if !(p.weight.is_finite() && p.weight > 0.0) {
                    return Err(Error::InvalidPrior(format!(
                        "weight must be positive, got {}",
                        p.weight
                    )));
                }
                if !(p.preprior.is_finite() && p.preprior >= 0.0) {
                    return Err(Error::InvalidPrior(format!(
                        "pre-prior must be nonnegative, got {}",
                        p.preprior
                    )));
                }
                Ok(())
            }
            (_, Some(_)) => Err(Error::InvalidPrior(format!(
                "power options given for a {} prior",
                self.kind
            ))),
            _ => Ok(()),
        }
    }

    /// Short description used in reports.
    pub fn describe(&self) -> String {
        match (&self.kind, &self.power) {
            (PriorKind::Jeffreys, _) => "Jeffreys: alpha(i) = 1/2".into(),
            (PriorKind::UnitExpectedCell, _) => "Unit expected cell: alpha(i) = 1".into(),
            (PriorKind::PerksUip, _) => "UIP-Perks: alpha(i) = 1/|I|".into(),
            (PriorKind::EmpiricalBayes, _) => "Empirical Bayes: alpha(i) = n(i)/N".into(),
            (PriorKind::Power, Some(p)) => format!(
                "Power prior: alpha(i) = {} * n*(i) + {} (N* = {})",
                p.weight,
                p.preprior,
                p.imaginary.total()
            ),
            (PriorKind::Power, None) => "Power prior".into(),
        }
    }
}

/// Dirichlet parameters for every cell of the full table, in vec order.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaTable {
    variables: Vec<Variable>,
    alpha: Vec<f64>,
}

impl AlphaTable {
    pub fn new(variables: Vec<Variable>, alpha: Vec<f64>) -> Result<Self> {
        let expected: usize = variables.iter().map(Variable::cardinality).product();
        if alpha.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "expected {expected} alpha entries, got {}",
                alpha.len()
            )));
        }
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
        Ok(AlphaTable { variables, alpha })
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn values(&self) -> &[f64] {
        &self.alpha
    }

    pub fn total(&self) -> f64 {
        self.alpha.iter().sum()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.variables.iter().map(Variable::cardinality).collect()
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    fn check_subset(&self, m: VarSet) -> Result<()> {
        if m.is_subset(VarSet::full(self.variables.len())) {
            Ok(())
        } else {
            Err(Error::UnknownVariable(format!("{m:?}")))
        }
    }

    /// `α_M(i_M) = Σ_{j: j_M = i_M} α(j)`.
    pub fn collapse(&self, m: VarSet) -> Result<AlphaTable> {
        if m.is_empty() {
            return Err(Error::InvalidArgument("marginal must be nonempty".into()));
        }
        self.check_subset(m)?;
        Ok(AlphaTable {
            variables: m.iter().map(|v| self.variables[v].clone()).collect(),
            alpha: marginalize(&self.alpha, &self.dims(), m),
        })
    }

    /// Dirichlet parameters of `π_{M1|M2}(· | i_M2)`: the slice of the
    /// collapse onto `M1 ∪ M2` at the given `M2` levels (1-based, in
    /// variable order), as a vector in vec order over `M1`.
    pub fn conditional(&self, m1: VarSet, m2: VarSet, levels_m2: &[usize]) -> Result<Vec<f64>> {
        if !m1.is_disjoint(m2) {
            return Err(Error::InvalidArgument(format!(
                "conditioning sets {m1:?} and {m2:?} overlap"
            )));
        }
        if m1.is_empty() {
            return Err(Error::InvalidArgument("conditioned set is empty".into()));
        }
        self.check_subset(m1.union(m2))?;
        conditional_slice(&self.alpha, &self.dims(), m1, m2, levels_m2)
    }

    /// Per-cell prior mean and variance of `π(i)`.
    pub fn cell_moments(&self) -> Vec<(f64, f64)> {
        prior_cell_moments(&self.alpha)
    }

    /// Variance ratio against the Perks prior. Only defined for symmetric
    /// priors.
    pub fn variance_ratio(&self) -> Result<f64> {
        let first = self.alpha[0];
        if self
            .alpha
            .iter()
            .any(|a| (a - first).abs() > SYMMETRY_TOL * first.abs())
        {
            return Err(Error::InvalidPrior(
                "variance ratio is defined for symmetric priors only".into(),
            ));
        }
        Ok(variance_ratio(self.total()))
    }

    /// Share of the posterior information carried by the prior,
    /// `α / (α + N)`.
    pub fn information_fraction(&self, observed_total: f64) -> f64 {
        let a = self.total();
        a / (a + observed_total)
    }

    /// `α + n`.
    pub fn add_counts(&self, table: &ContingencyTable) -> Result<Vec<f64>> {
        if table.dims() != self.dims() {
            return Err(Error::DimensionMismatch(format!(
                "prior dims {:?} vs table dims {:?}",
                self.dims(),
                table.dims()
            )));
        }
        Ok(self
            .alpha
            .iter()
            .zip(table.counts())
            .map(|(a, n)| a + n)
            .collect())
    }
}

pub fn make_prior(spec: &PriorSpec, table: &ContingencyTable) -> Result<AlphaTable> {
    spec.validate()?;
    let cells = table.num_cells();
    let variables = table.variables().to_vec();
    let alpha = match spec.kind {
        PriorKind::Jeffreys => vec![0.5; cells],
        PriorKind::UnitExpectedCell => vec![1.0; cells],
        PriorKind::PerksUip => vec![1.0 / cells as f64; cells],
        PriorKind::EmpiricalBayes => {
            let n = table.total();
            if let Some((index, _)) = table.counts().iter().enumerate().find(|(_, c)| **c <= 0.0) {
                return Err(Error::NonPositive {
                    what: "empirical Bayes prior (observed cell counts)",
                    index,
                    value: 0.0,
                });
            }
            table.counts().iter().map(|c| c / n).collect()
        }
        PriorKind::Power => {
            let p = spec.power.as_ref().expect("validated");
            if p.imaginary.dims() != table.dims() {
                return Err(Error::DimensionMismatch(format!(
                    "imaginary table dims {:?} vs observed dims {:?}",
                    p.imaginary.dims(),
                    table.dims()
                )));
            }
            let alpha: Vec<f64> = p
                .imaginary
                .counts()
                .iter()
                .map(|n| p.weight * n + p.preprior)
                .collect();
            if let Some((index, &value)) = alpha.iter().enumerate().find(|(_, a)| **a <= 0.0) {
                return Err(Error::NonPositive {
                    what: "power prior parameters w*n*(i) + alpha0",
                    index,
                    value,
                });
            }
            alpha
        }
    };
    AlphaTable::new(variables, alpha)
}

pub fn collapse_alpha(alpha: &AlphaTable, m: VarSet) -> Result<AlphaTable> {
    alpha.collapse(m)
}

pub fn conditional_alpha(
    alpha: &AlphaTable,
    m1: VarSet,
    m2: VarSet,
    levels_m2: &[usize],
) -> Result<Vec<f64>> {
    alpha.conditional(m1, m2, levels_m2)
}

/// `E[π(i)] = α(i)/α`, `V[π(i)] = α(i)(α − α(i)) / (α²(α + 1))`.
pub fn prior_cell_moments(alpha: &[f64]) -> Vec<(f64, f64)> {
    let total: f64 = alpha.iter().sum();
    alpha
        .iter()
        .map(|&a| (a / total, a * (total - a) / (total * total * (total + 1.0))))
        .collect()
}

/// Ratio of the cell variance under a symmetric Dirichlet with total `α`
/// to that under the Perks prior: `2 / (α + 1)`.
pub fn variance_ratio(alpha_total: f64) -> f64 {
    2.0 / (alpha_total + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::vec_index;

    fn binary3(counts: Vec<f64>) -> ContingencyTable {
        ContingencyTable::new(
            vec![Variable::binary("A"), Variable::binary("S"), Variable::binary("C")],
            counts,
        )
        .unwrap()
    }

    fn zeros(dims: &[usize]) -> ContingencyTable {
        let vars = dims
            .iter()
            .enumerate()
            .map(|(i, &l)| Variable::with_cardinality(&format!("V{i}"), l))
            .collect();
        ContingencyTable::zeros(vars).unwrap()
    }

    #[test]
    fn presets() {
        let t = binary3(vec![1.0; 8]);
        let perks = make_prior(&PriorSpec::perks(), &t).unwrap();
        assert!(perks.values().iter().all(|&a| a == 0.125));
        let j = make_prior(&PriorSpec::jeffreys(), &zeros(&[3, 2, 4])).unwrap();
        assert_eq!(j.values().len(), 24);
        assert!((j.total() - 12.0).abs() < 1e-12);
        let u = make_prior(&PriorSpec::unit_expected_cell(), &t).unwrap();
        assert_eq!(u.total(), 8.0);
    }

    #[test]
    fn uniform_unit_information_is_perks() {
        let t = binary3(vec![3.0; 8]);
        let imaginary = binary3(vec![5.0; 8]);
        let spec = PriorSpec::power(imaginary.clone(), 1.0 / 40.0, 0.0);
        let a = make_prior(&spec, &t).unwrap();
        assert!(a.values().iter().all(|x| (x - 0.125).abs() < 1e-15));
        let b = make_prior(&PriorSpec::unit_information(imaginary, 0.0), &t).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empirical_bayes() {
        let t = binary3(vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 12.0]);
        let eb = make_prior(&PriorSpec::empirical_bayes(), &t).unwrap();
        assert!((eb.total() - 1.0).abs() < 1e-15);
        assert!((eb.values()[7] - 0.3).abs() < 1e-15);
        let z = binary3(vec![0.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 12.0]);
        assert!(matches!(
            make_prior(&PriorSpec::empirical_bayes(), &z),
            Err(Error::NonPositive { index: 0, .. })
        ));
    }

    #[test]
    fn power_prior_errors() {
        let t = binary3(vec![1.0; 8]);
        let zero_imag = binary3(vec![0.0; 8]);
        assert!(make_prior(&PriorSpec::power(zero_imag.clone(), 1.0, 0.0), &t).is_err());
        assert!(make_prior(&PriorSpec::power(zero_imag.clone(), 1.0, 0.5), &t).is_ok());
        assert!(make_prior(&PriorSpec::power(zero_imag.clone(), 0.0, 0.5), &t).is_err());
        assert!(make_prior(&PriorSpec::power(zero_imag, 1.0, -0.5), &t).is_err());
        assert!(make_prior(&PriorSpec::power(zeros(&[2, 2]), 1.0, 1.0), &t).is_err());
        let missing = PriorSpec::simple(PriorKind::Power);
        assert!(make_prior(&missing, &t).is_err());
    }

    #[test]
    fn collapse_examples() {
        let t = binary3(vec![1.0; 8]);
        let perks = make_prior(&PriorSpec::perks(), &t).unwrap();
        let a = perks.collapse(VarSet::singleton(0)).unwrap();
        assert_eq!(a.values(), &[0.5, 0.5]);
        let sc = perks.collapse(VarSet::from_indices([1, 2])).unwrap();
        assert_eq!(sc.values(), &[0.25; 4]);
        assert_eq!(perks.collapse(VarSet::full(3)).unwrap(), perks);
        assert!(perks.collapse(VarSet::singleton(4)).is_err());
    }

    #[test]
    fn conditional_examples() {
        let t = binary3(vec![1.0; 8]);
        let perks = make_prior(&PriorSpec::perks(), &t).unwrap();
        let s_given_ac = perks
            .conditional(VarSet::singleton(1), VarSet::from_indices([0, 2]), &[1, 1])
            .unwrap();
        assert_eq!(s_given_ac, vec![0.125, 0.125]);
        let degenerate = perks.conditional(VarSet::singleton(1), VarSet::EMPTY, &[]).unwrap();
        assert_eq!(degenerate, vec![0.5, 0.5]);
        assert!(perks
            .conditional(VarSet::singleton(1), VarSet::from_indices([0, 2]), &[3, 1])
            .is_err());
        assert!(perks
            .conditional(VarSet::singleton(1), VarSet::from_indices([1, 2]), &[1, 1])
            .is_err());
    }

    #[test]
    fn worked_conditional_example() {
        // α_AB(i_A, 2) = Σ_{i_C} α_ABC(i_A, 2, i_C) on a 3x2x2 table
        let vars = vec![
            Variable::with_cardinality("A", 3),
            Variable::binary("B"),
            Variable::binary("C"),
        ];
        let alpha: Vec<f64> = (1..=12).map(f64::from).collect();
        let a = AlphaTable::new(vars, alpha.clone()).unwrap();
        let got = a
            .conditional(VarSet::singleton(0), VarSet::singleton(1), &[2])
            .unwrap();
        let dims = [3, 2, 2];
        let want: Vec<f64> = (1..=3)
            .map(|ia| {
                (1..=2)
                    .map(|ic| alpha[vec_index(&[ia, 2, ic], &dims).unwrap()])
                    .sum()
            })
            .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn moments_and_variance_ratio() {
        let m = prior_cell_moments(&[0.125; 8]);
        assert!((m[0].0 - 0.125).abs() < 1e-15);
        assert!((m[0].1 - 7.0 / 128.0).abs() < 1e-15);
        let m = prior_cell_moments(&[1.0; 8]);
        assert!((m[0].1 - 7.0 / (64.0 * 9.0)).abs() < 1e-15);
        let m = prior_cell_moments(&[3.0]);
        assert_eq!(m[0], (1.0, 0.0));
        assert!((variance_ratio(4.0) - 0.4).abs() < 1e-15);
        assert!((variance_ratio(12.0) - 2.0 / 13.0).abs() < 1e-15);
        assert_eq!(variance_ratio(1.0), 1.0);
        let t = binary3(vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]);
        let eb = make_prior(&PriorSpec::empirical_bayes(), &t).unwrap();
        assert!(eb.variance_ratio().is_err());
    }

    #[test]
    fn information_fraction() {
        let t = binary3(vec![10.0; 8]);
        let perks = make_prior(&PriorSpec::perks(), &t).unwrap();
        assert!((perks.information_fraction(t.total()) - 1.0 / 81.0).abs() < 1e-15);
    }
}
