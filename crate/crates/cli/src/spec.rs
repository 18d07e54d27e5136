//! JSON input formats.

use eikonal_core::solutions::{
    Branch, EnvelopeOptions, Euclid2Solution, ParametricSolution, Rank0Solution, Solution,
};
use eikonal_core::{Poly, VarNames};
use serde::{Deserialize, Serialize};

use crate::run::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// `u_μ u_μ = 1` with the Minkowski contraction; coordinates `x0..xn`.
    #[default]
    Minkowski,
    /// `u_1² + u_2² = 1`; coordinates `x1, x2`.
    #[serde(rename = "euclidean-2")]
    Euclidean2,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub origin: Vec<f64>,
    pub spacing: Vec<f64>,
    pub shape: Vec<usize>,
}

/// Overrides of the multistart Newton defaults.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSpec {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub starts_per_axis: Option<usize>,
}

/// Problem specification for `eval` and `residual`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub n: usize,
    #[serde(default = "one")]
    pub c: u8,
    #[serde(default)]
    pub family: Family,
    pub rank: usize,
    /// Polynomial in `t1..tk`.
    #[serde(default = "zero_poly")]
    pub psi: String,
    /// `n − rank` polynomials in `t1..tk`.
    #[serde(default)]
    pub w: Vec<String>,
    /// Rank 0 only: `u = coeffs_μ x_μ + offset`.
    #[serde(default)]
    pub coeffs: Option<Vec<f64>>,
    #[serde(default)]
    pub offset: f64,
    pub grid: GridSpec,
    #[serde(default)]
    pub branch: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub search: SearchSpec,
}

fn one() -> u8 {
    1
}

fn zero_poly() -> String {
    "0".into()
}

pub fn parse_json<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Input(format!("{what}: {e}")))
}

impl ProblemSpec {
    pub fn branch(&self, flag: Option<Branch>) -> Result<Branch, CliError> {
        match (flag, &self.branch) {
            (Some(b), _) => Ok(b),
            (None, Some(s)) => s.parse().map_err(CliError::Input),
            (None, None) => Ok(Branch::default()),
        }
    }

    pub fn seed(&self, flag: Option<u64>) -> u64 {
        flag.or(self.seed).unwrap_or(0)
    }

    pub fn envelope_options(&self, seed: u64) -> EnvelopeOptions {
        let base = match self.family {
            Family::Minkowski => EnvelopeOptions::default(),
            Family::Euclidean2 => EnvelopeOptions::euclid2(),
        };
        EnvelopeOptions {
            lower: self.search.lower.unwrap_or(base.lower),
            upper: self.search.upper.unwrap_or(base.upper),
            starts_per_axis: self.search.starts_per_axis.unwrap_or(base.starts_per_axis),
            ..base.with_seed(seed)
        }
    }

    /// Column names of the evaluation point.
    pub fn coordinate_names(&self) -> Vec<String> {
        match self.family {
            Family::Minkowski => (0..=self.n).map(|i| format!("x{i}")).collect(),
            Family::Euclidean2 => vec!["x1".into(), "x2".into()],
        }
    }

    pub fn solution(&self) -> Result<Solution, CliError> {
        if self.c != 1 {
            return Err(CliError::Input(format!(
                "c = {}: solution families are defined for c = 1",
                self.c
            )));
        }
        let params = |s: &str| {
            Poly::parse(s, &VarNames::params(self.rank))
                .map_err(|e| CliError::Input(format!("{s:?}: {e}")))
        };
        let sol = match (self.family, self.rank) {
            (Family::Euclidean2, rank) => {
                if self.n != 2 || rank != 1 {
                    return Err(CliError::Input(
                        "euclidean-2 family needs n = 2 and rank = 1".into(),
                    ));
                }
                Solution::Euclid2(
                    Euclid2Solution::new(params(&self.psi)?).map_err(CliError::input)?,
                )
            }
            (Family::Minkowski, 0) => {
                let coeffs = self
                    .coeffs
                    .clone()
                    .ok_or_else(|| CliError::Input("rank 0 needs \"coeffs\"".into()))?;
                if coeffs.len() != self.n + 1 {
                    return Err(CliError::Input(format!(
                        "rank 0 needs {} coefficients",
                        self.n + 1
                    )));
                }
                Solution::Rank0(Rank0Solution::new(coeffs, self.offset).map_err(CliError::input)?)
            }
            (Family::Minkowski, rank) => {
                if rank > self.n {
                    return Err(CliError::Input(format!(
                        "rank {rank} exceeds n = {}",
                        self.n
                    )));
                }
                let w = self
                    .w
                    .iter()
                    .map(|s| params(s))
                    .collect::<Result<Vec<_>, _>>()?;
                Solution::Parametric(
                    ParametricSolution::new(self.n, params(&self.psi)?, w)
                        .map_err(CliError::input)?,
                )
            }
        };
        if self.grid.origin.len() != sol.point_len() {
            return Err(CliError::Input(format!(
                "grid has {} axes, the problem needs {}",
                self.grid.origin.len(),
                sol.point_len()
            )));
        }
        Ok(sol)
    }
}

/// One operator of a catalog file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSpec {
    pub name: String,
    /// `ξ^0..ξ^n` in the variables `x0..xn, u`.
    pub xi: Vec<String>,
    pub eta: String,
    #[serde(default)]
    pub expect: Expectation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expectation {
    #[default]
    Symmetry,
    NotSymmetry,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckMode {
    #[default]
    Exact,
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Builtin {
    Conformal,
    Controls,
    NullFamilyRandom,
}

/// Operator catalog for `verify-ops`: explicit operators, or a generated
/// builtin family.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogSpec {
    pub n: usize,
    pub c: u8,
    #[serde(default)]
    pub operators: Vec<OperatorSpec>,
    #[serde(default)]
    pub builtin: Option<Builtin>,
    #[serde(default)]
    pub check: CheckMode,
    #[serde(default)]
    pub samples: Option<usize>,
}

/// `fmm-compare` configuration; every field has a default (the point-source
/// cone on `[−1, 1]²`).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FmmSpec {
    pub lower: [f64; 2],
    pub upper: [f64; 2],
    /// Nodes per axis, successively refined.
    pub resolutions: Vec<usize>,
    pub sources: Vec<[f64; 2]>,
    /// Nodes within this distance of a source start from exact values.
    pub source_radius: f64,
    pub reference: Reference,
    pub numeric: Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reference {
    /// Envelope evaluator of the Euclidean family with `Ψ = 0`, centred on
    /// the single source; defined on the half plane above it.
    Envelope,
    /// Closed-form distance to the nearest source.
    Distance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Numeric {
    Fmm,
    /// Compare the reference with itself.
    Reference,
}

impl Default for FmmSpec {
    fn default() -> Self {
        FmmSpec {
            lower: [-1.0, -1.0],
            upper: [1.0, 1.0],
            resolutions: vec![65, 129],
            sources: vec![[0.0, 0.0]],
            source_radius: 0.1,
            reference: Reference::Envelope,
            numeric: Numeric::Fmm,
        }
    }
}
