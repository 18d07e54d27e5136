//! Lie point symmetries of `u_μ u_μ = c`, `c ∈ {0, 1}`.
//!
//! An operator `X = ξ^μ ∂_μ + η ∂_u` is prolonged to the first jet space and
//! applied to the equation. The resulting residual `2 g_μ ζ^μ u_μ` is a
//! polynomial of degree at most three in the formal derivatives `u_μ`; `X`
//! is a symmetry exactly when that residual is a multiple
//! `λ · (u_μ u_μ − c)` of the equation itself. Because the cubic part is
//! always `−2 (ξ^ν_u u_ν)(u_μ u_μ)`, the multiplier is affine in the
//! derivatives: `λ = λ_0(x, u) + λ_1^ν(x, u) u_ν`.

pub mod catalog;
pub mod discrete;
pub mod flow;
pub mod sampled;

use std::fmt;

use crate::algebra::{AlgebraError, Poly, Rational, VarNames};

pub use catalog::{
    conformal_catalog, negative_controls, null_family_random, NamedOperator, NullFamilyParams,
};
pub use discrete::{discrete_catalog, DiscreteMap, JetPoint};
pub use flow::{flow_jets, flow_map, FlowOptions};
pub use sampled::{
    manifold_samples, sampled_symmetry_check, ClosureField, CoefficientJet, CompiledField, Jet,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SymmetryError {
    #[error("space dimension must be at least 1")]
    ZeroDimension,
    #[error("right-hand side must be 0 or 1, got {0}")]
    BadRhs(u8),
    #[error("dimension mismatch: expected n = {expected}, got n = {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("component polynomials must have {expected} variables, found {got}")]
    BadVarCount { expected: usize, got: usize },
    #[error("b(u) must be antisymmetric: b[{0}][{1}] + b[{1}][{0}] != 0")]
    NotAntisymmetric(usize, usize),
    #[error("flow step {step} for point {point}: local error estimate {estimate:e} exceeds bound {bound:e}")]
    StepRejected {
        point: usize,
        step: usize,
        estimate: f64,
        bound: f64,
    },
    #[error("hodograph map is singular here: u_1 = 0")]
    SingularHodograph,
    #[error("transported graph is not a graph over x near point {0}")]
    DegenerateGraph(usize),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// `u_μ u_μ = c` in `n` space dimensions with metric `diag{1, −1, …, −1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EikonalProblem {
    n: usize,
    c: u8,
}

impl EikonalProblem {
    pub fn new(n: usize, c: u8) -> Result<Self, SymmetryError> {
        if n == 0 {
            return Err(SymmetryError::ZeroDimension);
        }
        if c > 1 {
            return Err(SymmetryError::BadRhs(c));
        }
        Ok(EikonalProblem { n, c })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn c(&self) -> u8 {
        self.c
    }

    /// Diagonal of the Minkowski metric, length `n + 1`.
    pub fn metric(&self) -> Vec<i64> {
        (0..=self.n).map(metric_sign).collect()
    }

    /// Index of `u` in the shared variable layout.
    pub fn u_var(&self) -> usize {
        self.n + 1
    }

    /// Index of the formal derivative `u_μ`.
    pub fn p_var(&self, mu: usize) -> usize {
        self.n + 2 + mu
    }

    /// Variables of `(x_0..x_n, u)`.
    pub fn base_nvars(&self) -> usize {
        self.n + 2
    }

    /// Variables of `(x_0..x_n, u, u_0..u_n)`.
    pub fn jet_nvars(&self) -> usize {
        2 * self.n + 3
    }

    pub fn base_names(&self) -> VarNames {
        VarNames::eikonal(self.n)
    }

    pub fn jet_names(&self) -> VarNames {
        VarNames::eikonal_jet(self.n)
    }

    /// `u_μ u_μ` as a jet polynomial.
    pub fn gradient_square(&self) -> Poly {
        let nv = self.jet_nvars();
        (0..=self.n).fold(Poly::zero(nv), |acc, mu| {
            let p = Poly::var(nv, self.p_var(mu));
            acc + (&p * &p).scale(&Rational::from_integer(metric_sign(mu).into()))
        })
    }
}

/// `g_μμ`: `+1` for time, `−1` for space.
pub fn metric_sign(mu: usize) -> i64 {
    if mu == 0 {
        1
    } else {
        -1
    }
}

fn int(v: i64) -> Rational {
    Rational::from_integer(v.into())
}

/// `X = ξ^μ ∂_μ + η ∂_u` with polynomial coefficients in `(x_0..x_n, u)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VectorField {
    xi: Vec<Poly>,
    eta: Poly,
}

impl VectorField {
    pub fn new(xi: Vec<Poly>, eta: Poly) -> Result<Self, SymmetryError> {
        if xi.len() < 2 {
            return Err(SymmetryError::ZeroDimension);
        }
        let expected = xi.len() + 1;
        for p in xi.iter().chain(std::iter::once(&eta)) {
            if p.nvars() != expected {
                return Err(SymmetryError::BadVarCount {
                    expected,
                    got: p.nvars(),
                });
            }
        }
        Ok(VectorField { xi, eta })
    }

    /// Parse components written with the names `x0..xn, u`.
    pub fn parse(xi: &[&str], eta: &str) -> Result<Self, SymmetryError> {
        let n = xi
            .len()
            .checked_sub(1)
            .ok_or(SymmetryError::ZeroDimension)?;
        let names = VarNames::eikonal(n);
        let xi = xi
            .iter()
            .map(|s| Poly::parse(s, &names))
            .collect::<Result<Vec<_>, _>>()?;
        VectorField::new(xi, Poly::parse(eta, &names)?)
    }

    pub fn zero(n: usize) -> Self {
        VectorField {
            xi: vec![Poly::zero(n + 2); n + 1],
            eta: Poly::zero(n + 2),
        }
    }

    pub fn n(&self) -> usize {
        self.xi.len() - 1
    }

    pub fn xi(&self) -> &[Poly] {
        &self.xi
    }

    pub fn eta(&self) -> &Poly {
        &self.eta
    }

    /// `ξ^0..ξ^n` followed by `η`.
    pub fn components(&self) -> impl Iterator<Item = &Poly> {
        self.xi.iter().chain(std::iter::once(&self.eta))
    }

    pub fn is_zero(&self) -> bool {
        self.components().all(Poly::is_zero)
    }

    fn check_dim(&self, n: usize) -> Result<(), SymmetryError> {
        if self.n() == n {
            Ok(())
        } else {
            Err(SymmetryError::DimensionMismatch {
                expected: n,
                got: self.n(),
            })
        }
    }

    pub fn checked_add(&self, other: &VectorField) -> Result<VectorField, SymmetryError> {
        other.check_dim(self.n())?;
        Ok(VectorField {
            xi: self.xi.iter().zip(&other.xi).map(|(a, b)| a + b).collect(),
            eta: &self.eta + &other.eta,
        })
    }

    pub fn scale(&self, c: &Rational) -> VectorField {
        VectorField {
            xi: self.xi.iter().map(|p| p.scale(c)).collect(),
            eta: self.eta.scale(c),
        }
    }

    /// Action as a derivation on functions of `(x, u)`.
    pub fn apply(&self, f: &Poly) -> Poly {
        let n = self.n();
        let mut acc = &self.eta * &f.diff(n + 1);
        for (mu, xi) in self.xi.iter().enumerate() {
            acc = acc + xi * &f.diff(mu);
        }
        acc
    }

    /// Lie bracket `[X, Y] = XY − YX`, componentwise `X(Y^i) − Y(X^i)`.
    pub fn commutator(&self, other: &VectorField) -> Result<VectorField, SymmetryError> {
        other.check_dim(self.n())?;
        let xi = self
            .xi
            .iter()
            .zip(&other.xi)
            .map(|(a, b)| self.apply(b) - other.apply(a))
            .collect();
        let eta = self.apply(&other.eta) - other.apply(&self.eta);
        Ok(VectorField { xi, eta })
    }

    pub fn compile(&self) -> CompiledField {
        CompiledField::new(self)
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = VarNames::eikonal(self.n());
        let mut first = true;
        for (i, p) in self.components().enumerate() {
            if p.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            let d = if i <= self.n() {
                format!("d_x{i}")
            } else {
                "d_u".to_string()
            };
            write!(f, "({}) {}", p.display(&names), d)?;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

/// First prolongation: the base field together with `ζ^0..ζ^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Prolongation1 {
    pub base: VectorField,
    /// Jet polynomials, `ζ^μ = η_μ + η_u u_μ − ξ^ν_μ u_ν − ξ^ν_u u_μ u_ν`.
    pub zeta: Vec<Poly>,
}

pub fn prolong1(
    field: &VectorField,
    problem: &EikonalProblem,
) -> Result<Prolongation1, SymmetryError> {
    field.check_dim(problem.n())?;
    let n = problem.n();
    let nv = problem.jet_nvars();
    let lift = |p: &Poly| p.extend(nv);
    let uvar = problem.u_var();
    let p: Vec<Poly> = (0..=n).map(|mu| Poly::var(nv, problem.p_var(mu))).collect();

    let eta_u = lift(&field.eta.diff(uvar));
    // ξ^ν_u u_ν
    let xi_u_p = (0..=n).fold(Poly::zero(nv), |acc, nu| {
        acc + lift(&field.xi[nu].diff(uvar)) * &p[nu]
    });

    let zeta = (0..=n)
        .map(|mu| {
            let mut z = lift(&field.eta.diff(mu)) + &eta_u * &p[mu];
            for nu in 0..=n {
                z = z - lift(&field.xi[nu].diff(mu)) * &p[nu];
            }
            z - &xi_u_p * &p[mu]
        })
        .collect();
    Ok(Prolongation1 {
        base: field.clone(),
        zeta,
    })
}

/// Which part of the residual a coefficient belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualComponent {
    Cubic,
    Quadratic(usize, usize),
    Linear(usize),
    Constant,
}

impl fmt::Display for ResidualComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResidualComponent::Cubic => f.write_str("cubic"),
            ResidualComponent::Quadratic(a, b) => write!(f, "Q[{a}][{b}]"),
            ResidualComponent::Linear(a) => write!(f, "L[{a}]"),
            ResidualComponent::Constant => f.write_str("C"),
        }
    }
}

/// The invariance residual `2 g_μ ζ^μ u_μ` split by degree in the formal
/// derivatives: `cubic + Q_μν u_μ u_ν + L_μ u_μ + C`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualDecomposition {
    n: usize,
    /// Homogeneous cubic part, a jet polynomial.
    pub cubic: Poly,
    /// Symmetric; entries are polynomials in `(x, u)`.
    pub q: Vec<Vec<Poly>>,
    pub l: Vec<Poly>,
    pub c: Poly,
}

impl ResidualDecomposition {
    /// Rebuild the residual as a jet polynomial.
    pub fn reassemble(&self) -> Poly {
        let n = self.n;
        let nv = 2 * n + 3;
        let p = |mu: usize| Poly::var(nv, n + 2 + mu);
        let mut acc = self.cubic.clone() + self.c.extend(nv);
        for mu in 0..=n {
            acc = acc + self.l[mu].extend(nv) * p(mu);
            for nu in 0..=n {
                acc = acc + self.q[mu][nu].extend(nv) * p(mu) * p(nu);
            }
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.cubic.is_zero()
            && self.c.is_zero()
            && self.l.iter().all(Poly::is_zero)
            && self.q.iter().flatten().all(Poly::is_zero)
    }
}

/// Expand `2 g_μ ζ^μ u_μ` and decompose it.
pub fn invariance_residual(
    prolonged: &Prolongation1,
    problem: &EikonalProblem,
) -> ResidualDecomposition {
    let n = problem.n();
    let nv = problem.jet_nvars();
    let base_nv = problem.base_nvars();
    let residual = prolonged
        .zeta
        .iter()
        .enumerate()
        .fold(Poly::zero(nv), |acc, (mu, z)| {
            acc + (z * &Poly::var(nv, problem.p_var(mu))).scale(&int(2 * metric_sign(mu)))
        });

    let mut cubic = Poly::zero(nv);
    let mut q = vec![vec![Poly::zero(base_nv); n + 1]; n + 1];
    let mut l = vec![Poly::zero(base_nv); n + 1];
    let mut c = Poly::zero(base_nv);
    let half = Rational::new(1.into(), 2.into());

    for (m, coef) in residual.terms() {
        let e = m.exponents();
        let jet_part = &e[base_nv..];
        let degree: u32 = jet_part.iter().sum();
        let base_term = Poly::from_terms(base_nv, [(e[..base_nv].to_vec(), coef.clone())]);
        match degree {
            0 => c = c + base_term,
            1 => {
                let mu = jet_part.iter().position(|&k| k == 1).unwrap();
                l[mu] = &l[mu] + &base_term;
            }
            2 => {
                let idx: Vec<usize> = jet_part
                    .iter()
                    .enumerate()
                    .flat_map(|(i, &k)| std::iter::repeat_n(i, k as usize))
                    .collect();
                let (a, b) = (idx[0], idx[1]);
                if a == b {
                    q[a][a] = &q[a][a] + &base_term;
                } else {
                    let h = base_term.scale(&half);
                    q[a][b] = &q[a][b] + &h;
                    q[b][a] = &q[b][a] + &h;
                }
            }
            3 => cubic = cubic + Poly::from_terms(nv, [(e.to_vec(), coef.clone())]),
            d => unreachable!("first-prolongation residual has degree {d} in u_μ"),
        }
    }
    ResidualDecomposition { n, cubic, q, l, c }
}

/// A residual component that fails the manifold-vanishing criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub component: ResidualComponent,
    pub expected: Poly,
    pub found: Poly,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} = {}, required {}",
            self.component, self.found, self.expected
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    /// The residual equals `multiplier · (u_μ u_μ − c)`; the multiplier is a
    /// jet polynomial, affine in `u_μ`.
    Symmetry {
        multiplier: Poly,
    },
    NotSymmetry(Violation),
}

impl Verdict {
    pub fn is_symmetry(&self) -> bool {
        matches!(self, Verdict::Symmetry { .. })
    }

    pub fn multiplier(&self) -> Option<&Poly> {
        match self {
            Verdict::Symmetry { multiplier } => Some(multiplier),
            Verdict::NotSymmetry(_) => None,
        }
    }
}

/// Exact test whether the residual vanishes on `u_μ u_μ = c`.
pub fn is_symmetry(
    field: &VectorField,
    problem: &EikonalProblem,
) -> Result<Verdict, SymmetryError> {
    let prolonged = prolong1(field, problem)?;
    let dec = invariance_residual(&prolonged, problem);
    Ok(check_decomposition(&dec, problem))
}

pub fn check_decomposition(dec: &ResidualDecomposition, problem: &EikonalProblem) -> Verdict {
    let n = problem.n();
    let nv = problem.jet_nvars();
    let base_nv = problem.base_nvars();
    let c_rhs = int(problem.c() as i64);
    let p = |mu: usize| Poly::var(nv, problem.p_var(mu));
    let square = problem.gradient_square();

    let fail = |component, expected: Poly, found: Poly| {
        Verdict::NotSymmetry(Violation {
            component,
            expected,
            found,
        })
    };

    // λ_1^ν read off the u_ν u_0² coefficients, then the whole cubic part
    // must factor as (λ_1·u)(u·u).
    let lambda1: Vec<Poly> = (0..=n)
        .map(|nu| {
            let mut out = Poly::zero(base_nv);
            for (m, coef) in dec.cubic.terms() {
                let e = m.exponents();
                let mut want = vec![0u32; n + 1];
                want[0] += 2;
                want[nu] += 1;
                if e[base_nv..] == want[..] {
                    out = out + Poly::from_terms(base_nv, [(e[..base_nv].to_vec(), coef.clone())]);
                }
            }
            out
        })
        .collect();
    let lambda1_p = (0..=n).fold(Poly::zero(nv), |acc, nu| {
        acc + lambda1[nu].extend(nv) * p(nu)
    });
    let expected_cubic = &lambda1_p * &square;
    if expected_cubic != dec.cubic {
        return fail(ResidualComponent::Cubic, expected_cubic, dec.cubic.clone());
    }

    let lambda0 = dec.q[0][0].clone();
    for mu in 0..=n {
        for nu in 0..=n {
            let expected = if mu == nu {
                lambda0.scale(&int(metric_sign(mu)))
            } else {
                Poly::zero(base_nv)
            };
            if dec.q[mu][nu] != expected {
                return fail(
                    ResidualComponent::Quadratic(mu, nu),
                    expected,
                    dec.q[mu][nu].clone(),
                );
            }
        }
    }
    for nu in 0..=n {
        let expected = lambda1[nu].scale(&-c_rhs.clone());
        if dec.l[nu] != expected {
            return fail(ResidualComponent::Linear(nu), expected, dec.l[nu].clone());
        }
    }
    let expected_c = lambda0.scale(&-c_rhs.clone());
    if dec.c != expected_c {
        return fail(ResidualComponent::Constant, expected_c, dec.c.clone());
    }

    let multiplier = lambda0.extend(nv) + lambda1_p;
    debug_assert_eq!(
        &multiplier * &(square - Poly::constant(nv, c_rhs)),
        dec.reassemble()
    );
    Verdict::Symmetry { multiplier }
}

/// Convenience: `Σ coeffs[i] · fields[i]`.
pub fn linear_combination(
    fields: &[&VectorField],
    coeffs: &[Rational],
) -> Result<VectorField, SymmetryError> {
    let n = fields.first().map_or(1, |f| f.n());
    fields
        .iter()
        .zip(coeffs)
        .try_fold(VectorField::zero(n), |acc, (f, c)| {
            acc.checked_add(&f.scale(c))
        })
}
