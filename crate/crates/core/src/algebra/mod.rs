//! Exact multivariate polynomials with rational coefficients.
//!
//! Variables are addressed by index. The eikonal modules share one global
//! layout: indices `0..=n` are the coordinates `x_0..x_n`, index `n + 1` is
//! the dependent variable `u`, and, when a polynomial lives on the first jet
//! space, indices `n + 2..=2n + 2` are the formal derivatives `u_0..u_n`.
//! [`VarNames`] maps that layout to the textual names used by the parser and
//! printer.

mod parse;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use twofloat::TwoFloat;

pub use parse::ParseError;

/// Arbitrary-precision rational, always reduced with a positive denominator.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AlgebraError {
    #[error("variable count mismatch: {left} vs {right}")]
    VarCountMismatch { left: usize, right: usize },
    #[error("evaluation point has {got} coordinates, polynomial has {expected} variables")]
    PointLength { expected: usize, got: usize },
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Build a rational from a numerator and denominator.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Exponent vector of a monomial, ordered graded-lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn var(nvars: usize, index: usize) -> Self {
        let mut e = vec![0; nvars];
        e[index] = 1;
        Monomial(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl From<Vec<u32>> for Monomial {
    fn from(e: Vec<u32>) -> Self {
        Monomial(e)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse polynomial over the rationals.
///
/// Zero coefficients are never stored and terms are kept in graded
/// lexicographic order, so derived `PartialEq` is structural equality of the
/// canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        let mut p = Poly::zero(nvars);
        p.add_term(Monomial::one(nvars), c);
        p
    }

    pub fn from_int(nvars: usize, c: i64) -> Self {
        Poly::constant(nvars, Rational::from_integer(c.into()))
    }

    pub fn one(nvars: usize) -> Self {
        Poly::from_int(nvars, 1)
    }

    /// The polynomial consisting of the single variable `index`.
    pub fn var(nvars: usize, index: usize) -> Self {
        assert!(
            index < nvars,
            "variable {index} out of range for {nvars} variables"
        );
        let mut p = Poly::zero(nvars);
        p.add_term(Monomial::var(nvars, index), Rational::one());
        p
    }

    /// Build from `(exponents, coefficient)` pairs; like terms are merged.
    pub fn from_terms<I>(nvars: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Vec<u32>, Rational)>,
    {
        let mut p = Poly::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent vector length");
            p.add_term(Monomial(e), c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in ascending graded lexicographic order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exponents: &[u32]) -> Rational {
        self.terms
            .get(&Monomial(exponents.to_vec()))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(Monomial::degree)
    }

    /// Constant value if the polynomial has no variable dependence.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                (m.degree() == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check_vars(&self, other: &Poly) -> Result<(), AlgebraError> {
        if self.nvars == other.nvars {
            Ok(())
        } else {
            Err(AlgebraError::VarCountMismatch {
                left: self.nvars,
                right: other.nvars,
            })
        }
    }

    pub fn checked_add(&self, other: &Poly) -> Result<Poly, AlgebraError> {
        self.check_vars(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Poly) -> Result<Poly, AlgebraError> {
        self.check_vars(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Poly) -> Result<Poly, AlgebraError> {
        self.check_vars(other)?;
        let mut out = Poly::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn pow(&self, exp: u32) -> Poly {
        let mut acc = Poly::one(self.nvars);
        for _ in 0..exp {
            acc = &acc * self;
        }
        acc
    }

    /// Formal partial derivative with respect to variable `var`.
    pub fn diff(&self, var: usize) -> Poly {
        assert!(
            var < self.nvars,
            "variable {var} out of range for {} variables",
            self.nvars
        );
        let mut out = Poly::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.0[var];
            if e == 0 {
                continue;
            }
            let mut dm = m.clone();
            dm.0[var] -= 1;
            out.add_term(dm, c * Rational::from_integer(e.into()));
        }
        out
    }

    /// Exact evaluation at a rational point.
    pub fn eval(&self, point: &[Rational]) -> Result<Rational, AlgebraError> {
        self.check_point(point.len())?;
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(&m.0) {
                if e > 0 {
                    t *= num_traits::pow(x.clone(), e as usize);
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Floating-point evaluation.
    pub fn eval_f64(&self, point: &[f64]) -> Result<f64, AlgebraError> {
        self.check_point(point.len())?;
        Ok(self.compile().eval(point))
    }

    fn check_point(&self, len: usize) -> Result<(), AlgebraError> {
        if len == self.nvars {
            Ok(())
        } else {
            Err(AlgebraError::PointLength {
                expected: self.nvars,
                got: len,
            })
        }
    }

    /// Embed into a ring with `nvars >= self.nvars` variables; the existing
    /// variables keep their indices.
    pub fn extend(&self, nvars: usize) -> Poly {
        assert!(nvars >= self.nvars, "cannot shrink variable count");
        self.remap(nvars, |i| i)
    }

    /// Rename variables: variable `i` of `self` becomes variable `map(i)` of a
    /// ring with `nvars` variables. Colliding targets multiply together.
    pub fn remap(&self, nvars: usize, map: impl Fn(usize) -> usize) -> Poly {
        let mut out = Poly::zero(nvars);
        for (m, c) in &self.terms {
            let mut e = vec![0; nvars];
            for (i, &k) in m.0.iter().enumerate() {
                if k > 0 {
                    e[map(i)] += k;
                }
            }
            out.add_term(Monomial(e), c.clone());
        }
        out
    }

    /// Substitute `value` (same ring) for variable `var`.
    pub fn substitute(&self, var: usize, value: &Poly) -> Result<Poly, AlgebraError> {
        self.check_vars(value)?;
        let mut out = Poly::zero(self.nvars);
        let mut powers = vec![Poly::one(self.nvars)];
        for (m, c) in &self.terms {
            let e = m.0[var] as usize;
            while powers.len() <= e {
                let next = powers.last().unwrap() * value;
                powers.push(next);
            }
            let mut rest = m.clone();
            rest.0[var] = 0;
            let mut base = Poly::zero(self.nvars);
            base.add_term(rest, c.clone());
            out = &out + &(&base * &powers[e]);
        }
        Ok(out)
    }

    /// Whether any term depends on one of the given variables.
    pub fn depends_on(&self, vars: impl IntoIterator<Item = usize> + Clone) -> bool {
        self.terms
            .keys()
            .any(|m| vars.clone().into_iter().any(|v| m.0[v] > 0))
    }

    /// Floating-point evaluator with coefficients rounded once.
    pub fn compile(&self) -> CompiledPoly {
        CompiledPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let factors =
                        m.0.iter()
                            .enumerate()
                            .filter(|(_, &e)| e > 0)
                            .map(|(i, &e)| (i, e))
                            .collect();
                    (rational_to_f64(c), factors)
                })
                .collect(),
            wide: self.terms.values().map(rational_to_twofloat).collect(),
        }
    }

    /// Render with the given variable names.
    pub fn display<'a>(&'a self, names: &'a VarNames) -> PolyDisplay<'a> {
        PolyDisplay { poly: self, names }
    }

    /// Parse the textual format produced by [`Poly::display`].
    pub fn parse(text: &str, names: &VarNames) -> Result<Poly, AlgebraError> {
        Ok(parse::parse(text, names)?)
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Numerator and denominator individually overflow f64.
        let n = r.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = r.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

fn rational_to_twofloat(r: &Rational) -> TwoFloat {
    let hi = rational_to_f64(r);
    let lo = Rational::from_float(hi).map_or(0.0, |h| rational_to_f64(&(r - h)));
    TwoFloat::from(hi) + TwoFloat::from(lo)
}

/// A [`Poly`] lowered to `f64` coefficients for fast repeated evaluation.
#[derive(Debug, Clone)]
pub struct CompiledPoly {
    nvars: usize,
    terms: Vec<(f64, Vec<(usize, u32)>)>,
    wide: Vec<TwoFloat>,
}

impl CompiledPoly {
    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn eval(&self, point: &[f64]) -> f64 {
        debug_assert_eq!(point.len(), self.nvars);
        self.terms
            .iter()
            .map(|(c, factors)| {
                factors
                    .iter()
                    .fold(*c, |acc, &(i, e)| acc * point[i].powi(e as i32))
            })
            .sum()
    }

    /// Evaluation in double-double arithmetic, rounded once at the end.
    pub fn eval_accurate(&self, point: &[f64]) -> f64 {
        debug_assert_eq!(point.len(), self.nvars);
        let sum = self.terms.iter().zip(&self.wide).fold(
            TwoFloat::from(0.0),
            |acc, ((_, factors), c)| {
                acc + factors
                    .iter()
                    .fold(*c, |m, &(i, e)| m * TwoFloat::from(point[i]).powi(e as i32))
            },
        );
        sum.into()
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr<&Poly> for &Poly {
            type Output = Poly;
            /// Panics if the variable counts differ; use the `checked_*`
            /// method for a fallible version.
            fn $method(self, rhs: &Poly) -> Poly {
                self.$checked(rhs)
                    .expect("polynomial variable count mismatch")
            }
        }
        impl $tr<Poly> for Poly {
            type Output = Poly;
            fn $method(self, rhs: Poly) -> Poly {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&Poly> for Poly {
            type Output = Poly;
            fn $method(self, rhs: &Poly) -> Poly {
                (&self).$method(rhs)
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

/// Names of the variables of a polynomial ring, used for text I/O.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarNames(Vec<String>);

impl VarNames {
    pub fn new(names: Vec<String>) -> Self {
        VarNames(names)
    }

    /// `x0..xn, u`.
    pub fn eikonal(n: usize) -> Self {
        let mut v: Vec<String> = (0..=n).map(|i| format!("x{i}")).collect();
        v.push("u".into());
        VarNames(v)
    }

    /// `x0..xn, u, u0..un`: the first jet space.
    pub fn eikonal_jet(n: usize) -> Self {
        let mut v = VarNames::eikonal(n).0;
        v.extend((0..=n).map(|i| format!("u{i}")));
        VarNames(v)
    }

    /// `t1..tk`: envelope parameters.
    pub fn params(k: usize) -> Self {
        VarNames((1..=k).map(|i| format!("t{i}")).collect())
    }

    /// Generic names `v0..v{n-1}`.
    pub fn generic(nvars: usize) -> Self {
        VarNames((0..nvars).map(|i| format!("v{i}")).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn name(&self, index: usize) -> &str {
        &self.0[index]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        if let Some(i) = self.0.iter().position(|n| n == name) {
            return Some(i);
        }
        // `tau3` is accepted as an alias of `t3`.
        name.strip_prefix("tau").and_then(|rest| {
            self.0
                .iter()
                .position(|n| n.strip_prefix('t') == Some(rest))
        })
    }
}

pub struct PolyDisplay<'a> {
    poly: &'a Poly,
    names: &'a VarNames,
}

fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.poly;
        if p.is_zero() {
            return f.write_str("0");
        }
        for (i, (m, c)) in p.terms.iter().rev().enumerate() {
            let negative = c.is_negative();
            match (i, negative) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let mag = c.abs();
            let factors: Vec<String> =
                m.0.iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(v, &e)| {
                        let name = self.names.name(v);
                        if e == 1 {
                            name.to_string()
                        } else {
                            format!("{name}^{e}")
                        }
                    })
                    .collect();
            if factors.is_empty() {
                f.write_str(&fmt_rational(&mag))?;
            } else {
                if !mag.is_one() {
                    write!(f, "{} * ", fmt_rational(&mag))?;
                }
                f.write_str(&factors.join(" * "))?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = VarNames::generic(self.nvars);
        write!(f, "{}", self.display(&names))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names() -> VarNames {
        VarNames::eikonal(2)
    }

    fn p(s: &str) -> Poly {
        Poly::parse(s, &names()).unwrap()
    }

    #[test]
    fn add_examples() {
        assert!((p("x0") + p("-x0")).is_zero());
        assert_eq!(p("x1 + u") + p("x1"), p("2*x1 + u"));
        assert_eq!(p("1/2*x0^2") + p("1/2*x0^2"), p("x0^2"));
    }

    #[test]
    fn mul_examples() {
        assert_eq!(p("x0 - u") * p("x0 + u"), p("x0^2 - u^2"));
        assert!((Poly::zero(4) * p("x0 + x1^3")).is_zero());
        assert_eq!(p("x1") * p("x2"), p("x1*x2"));
    }

    #[test]
    fn diff_examples() {
        let u = 3;
        assert_eq!(p("x0^2 - u^2").diff(0), p("2*x0"));
        assert_eq!(p("x0^2 - u^2").diff(u), p("-2*u"));
        assert_eq!(p("x1*x2 + u^3").diff(u), p("3*u^2"));
    }

    #[test]
    fn eval_examples() {
        let two = Rational::from_integer(2.into());
        let one = Rational::one();
        let zero = Rational::zero();
        let v = p("x0^2 - x1^2")
            .eval(&[two.clone(), one.clone(), zero.clone(), zero.clone()])
            .unwrap();
        assert_eq!(v, Rational::from_integer(3.into()));
        assert_eq!(
            Poly::one(4)
                .eval(&[one.clone(), two.clone(), one.clone(), zero.clone()])
                .unwrap(),
            one
        );
        let v = p("u^3")
            .eval(&[zero.clone(), zero.clone(), zero, -two])
            .unwrap();
        assert_eq!(v, Rational::from_integer((-8).into()));
        assert_eq!(p("u^3").eval_f64(&[0.0, 0.0, 0.0, -2.0]).unwrap(), -8.0);
    }

    #[test]
    fn mismatched_variable_counts_are_errors() {
        let a = Poly::var(3, 0);
        let b = Poly::var(4, 0);
        assert!(matches!(
            a.checked_add(&b),
            Err(AlgebraError::VarCountMismatch { .. })
        ));
        assert!(matches!(
            a.checked_mul(&b),
            Err(AlgebraError::VarCountMismatch { .. })
        ));
        assert!(matches!(
            a.eval_f64(&[1.0]),
            Err(AlgebraError::PointLength { .. })
        ));
    }

    #[test]
    fn canonical_printing() {
        assert_eq!(
            p("u - x0^2 + 3/6").display(&names()).to_string(),
            "-x0^2 + u + 1/2"
        );
        assert_eq!(Poly::zero(4).display(&names()).to_string(), "0");
        assert_eq!(
            p("-2/3*x1*u^2").display(&names()).to_string(),
            "-2/3 * x1 * u^2"
        );
    }

    #[test]
    fn substitute_composes() {
        // f(s) = s^2 + 1 with s = x0 - x1
        let f = p("u^2 + 1");
        let s = p("x0 - x1");
        let g = f.substitute(3, &s).unwrap();
        assert_eq!(g, p("x0^2 - 2*x0*x1 + x1^2 + 1"));
    }

    #[test]
    fn remap_and_extend() {
        let q = p("x0*u");
        let e = q.extend(6);
        assert_eq!(e.nvars(), 6);
        assert_eq!(e.coeff(&[1, 0, 0, 1, 0, 0]), Rational::one());
        let swapped = q.remap(4, |i| {
            if i == 0 {
                3
            } else if i == 3 {
                0
            } else {
                i
            }
        });
        assert_eq!(swapped, q);
    }

    #[test]
    fn wide_coefficients_do_not_overflow() {
        let big = p("1/3*x0 + 7/11*u").pow(40);
        let v = big
            .eval(&[rat(3, 1), rat(0, 1), rat(0, 1), rat(11, 7)])
            .unwrap();
        assert_eq!(v, Rational::from_integer(BigInt::from(2).pow(40)));
    }

    #[test]
    fn accurate_evaluation_survives_cancellation() {
        let names = VarNames::new(vec!["a".into(), "b".into()]);
        let p = Poly::parse("a^2 - b^2 + 1/3", &names).unwrap().compile();
        let (a, b) = (1e8 + 1.0, 1e8);
        let exact = 2e8 + 1.0 + 1.0 / 3.0;
        assert_eq!(p.eval_accurate(&[a, b]), exact);
        assert!((p.eval(&[a, b]) - exact).abs() > 0.1);
    }
}
