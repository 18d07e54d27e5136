//! Operator catalogs: the finite conformal algebra of `u_μ u_μ = 1`, the
//! infinite family of `u_μ u_μ = 0` with coefficients depending on `u`, and
//! a pair of negative controls.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{metric_sign, SymmetryError, VectorField};
use crate::algebra::{rat, Poly, Rational};

#[derive(Debug, Clone, PartialEq)]
pub struct NamedOperator {
    pub name: String,
    pub field: VectorField,
}

impl NamedOperator {
    fn new(name: impl Into<String>, field: VectorField) -> Self {
        NamedOperator {
            name: name.into(),
            field,
        }
    }
}

struct Builder {
    n: usize,
    nv: usize,
}

impl Builder {
    fn new(n: usize) -> Self {
        Builder { n, nv: n + 2 }
    }

    fn x(&self, mu: usize) -> Poly {
        Poly::var(self.nv, mu)
    }

    fn u(&self) -> Poly {
        Poly::var(self.nv, self.n + 1)
    }

    fn one(&self) -> Poly {
        Poly::one(self.nv)
    }

    fn zero_field(&self) -> (Vec<Poly>, Poly) {
        (vec![Poly::zero(self.nv); self.n + 1], Poly::zero(self.nv))
    }

    fn field(&self, (xi, eta): (Vec<Poly>, Poly)) -> VectorField {
        VectorField::new(xi, eta).expect("catalog components are well formed")
    }

    /// `s² = x_μ x_μ − u²`.
    fn s2(&self) -> Poly {
        let mut s = &self.x(0) * &self.x(0) - &self.u() * &self.u();
        for a in 1..=self.n {
            s = s - &self.x(a) * &self.x(a);
        }
        s
    }

    /// `D = x_μ ∂_μ + u ∂_u` scaled by `f`.
    fn scaled_dilation(&self, f: &Poly) -> (Vec<Poly>, Poly) {
        (
            (0..=self.n).map(|mu| f * &self.x(mu)).collect(),
            f * &self.u(),
        )
    }
}

/// Basis of the maximal algebra of `u_μ u_μ = 1`:
/// `∂_μ, ∂_u, J_ab, J_0a, J_u0, J_ua, D, K_a, K_u, K_0`,
/// `(n + 3)(n + 4) / 2` operators in total (21 for `n = 3`).
pub fn conformal_catalog(n: usize) -> Vec<NamedOperator> {
    let b = Builder::new(n);
    let mut out = Vec::new();

    for mu in 0..=n {
        let (mut xi, eta) = b.zero_field();
        xi[mu] = b.one();
        out.push(NamedOperator::new(format!("P{mu}"), b.field((xi, eta))));
    }
    let (xi, _) = b.zero_field();
    out.push(NamedOperator::new("Pu", b.field((xi, b.one()))));

    for a in 1..=n {
        for c in a + 1..=n {
            // x_a ∂_c − x_c ∂_a
            let (mut xi, eta) = b.zero_field();
            xi[c] = b.x(a);
            xi[a] = -b.x(c);
            out.push(NamedOperator::new(format!("J{a}{c}"), b.field((xi, eta))));
        }
    }
    for a in 1..=n {
        // x_0 ∂_a + x_a ∂_0
        let (mut xi, eta) = b.zero_field();
        xi[a] = b.x(0);
        xi[0] = b.x(a);
        out.push(NamedOperator::new(format!("J0{a}"), b.field((xi, eta))));
    }
    {
        // u ∂_0 + x_0 ∂_u
        let (mut xi, _) = b.zero_field();
        xi[0] = b.u();
        out.push(NamedOperator::new("Ju0", b.field((xi, b.x(0)))));
    }
    for a in 1..=n {
        // u ∂_a − x_a ∂_u
        let (mut xi, _) = b.zero_field();
        xi[a] = b.u();
        out.push(NamedOperator::new(format!("Ju{a}"), b.field((xi, -b.x(a)))));
    }
    out.push(NamedOperator::new(
        "D",
        b.field(b.scaled_dilation(&b.one())),
    ));

    let s2 = b.s2();
    let two = Poly::from_int(b.nv, 2);
    for a in 1..=n {
        let (mut xi, eta) = b.scaled_dilation(&(&two * &b.x(a)));
        xi[a] = &xi[a] + &s2;
        out.push(NamedOperator::new(format!("K{a}"), b.field((xi, eta))));
    }
    {
        let (xi, eta) = b.scaled_dilation(&(&two * &b.u()));
        out.push(NamedOperator::new("Ku", b.field((xi, eta + &s2))));
    }
    {
        let (mut xi, eta) = b.scaled_dilation(&(&two * &b.x(0)));
        xi[0] = &xi[0] - &s2;
        out.push(NamedOperator::new("K0", b.field((xi, eta))));
    }
    out
}

/// `x_0 ∂_0` and `x_1 ∂_0`, neither of which is a symmetry for `c = 1`.
pub fn negative_controls(n: usize) -> Vec<NamedOperator> {
    let b = Builder::new(n);
    let (mut xi, eta) = b.zero_field();
    xi[0] = b.x(0);
    let first = NamedOperator::new("x0d0", b.field((xi, eta)));
    let (mut xi, eta) = b.zero_field();
    xi[0] = b.x(1);
    let second = NamedOperator::new("x1d0", b.field((xi, eta)));
    vec![first, second]
}

/// Arbitrary functions of `u` parameterizing the algebra of
/// `u_μ u_μ = 0`:
///
/// ```text
/// X = 2 g_μν c^μ x_ν x_β ∂_β − g_μν c^β x_μ x_ν ∂_β + g_μν b_μβ x_ν ∂_β
///     + d x_β ∂_β + a^β ∂_β + η ∂_u
/// ```
///
/// All entries are univariate polynomials in `u` (one variable). `b` must be
/// antisymmetric; otherwise the rotation part is not a Lorentz generator.
#[derive(Debug, Clone, PartialEq)]
pub struct NullFamilyParams {
    pub c: Vec<Poly>,
    pub b: Vec<Vec<Poly>>,
    pub d: Poly,
    pub a: Vec<Poly>,
    pub eta: Poly,
}

impl NullFamilyParams {
    pub fn zero(n: usize) -> Self {
        let z = Poly::zero(1);
        NullFamilyParams {
            c: vec![z.clone(); n + 1],
            b: vec![vec![z.clone(); n + 1]; n + 1],
            d: z.clone(),
            a: vec![z.clone(); n + 1],
            eta: z,
        }
    }

    pub fn n(&self) -> usize {
        self.c.len() - 1
    }

    /// Random polynomial instantiation with small rational coefficients and
    /// degree at most `max_degree` in `u`.
    pub fn random(n: usize, max_degree: u32, rng: &mut impl Rng) -> Self {
        let mut poly = || {
            let terms = (0..=max_degree).map(|e| {
                let num = rng.random_range(-3i64..=3);
                let den = rng.random_range(1i64..=4);
                (vec![e], rat(num, den))
            });
            Poly::from_terms(1, terms.collect::<Vec<_>>())
        };
        let c = (0..=n).map(|_| poly()).collect();
        let mut b = vec![vec![Poly::zero(1); n + 1]; n + 1];
        for i in 0..=n {
            for j in i + 1..=n {
                let v = poly();
                b[j][i] = -&v;
                b[i][j] = v;
            }
        }
        let d = poly();
        let a = (0..=n).map(|_| poly()).collect();
        let eta = poly();
        NullFamilyParams { c, b, d, a, eta }
    }

    pub fn field(&self) -> Result<VectorField, SymmetryError> {
        let n = self.n();
        let nv = n + 2;
        for (i, row) in self.b.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if !(v + &self.b[j][i]).is_zero() {
                    return Err(SymmetryError::NotAntisymmetric(i, j));
                }
            }
        }
        let lift = |p: &Poly| -> Result<Poly, SymmetryError> {
            if p.nvars() != 1 {
                return Err(SymmetryError::BadVarCount {
                    expected: 1,
                    got: p.nvars(),
                });
            }
            Ok(p.remap(nv, |_| n + 1))
        };
        let x = |mu: usize| Poly::var(nv, mu);
        let g = |mu: usize| Rational::from_integer(metric_sign(mu).into());

        let c: Vec<Poly> = self.c.iter().map(lift).collect::<Result<_, _>>()?;
        let c_dot_x = (0..=n).fold(Poly::zero(nv), |acc, mu| {
            acc + (&c[mu] * &x(mu)).scale(&g(mu))
        });
        let x_sq = (0..=n).fold(Poly::zero(nv), |acc, mu| {
            acc + (&x(mu) * &x(mu)).scale(&g(mu))
        });
        let d = lift(&self.d)?;
        let two = Poly::from_int(nv, 2);

        let mut xi = Vec::with_capacity(n + 1);
        for beta in 0..=n {
            let mut v = &two * &c_dot_x * x(beta) - &x_sq * &c[beta];
            for mu in 0..=n {
                v = v + (lift(&self.b[mu][beta])? * x(mu)).scale(&g(mu));
            }
            v = v + &d * &x(beta) + lift(&self.a[beta])?;
            xi.push(v);
        }
        VectorField::new(xi, lift(&self.eta)?)
    }
}

/// `count` seeded random members of the `u_μ u_μ = 0` family.
pub fn null_family_random(
    n: usize,
    max_degree: u32,
    count: usize,
    seed: u64,
) -> Vec<NamedOperator> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let params = NullFamilyParams::random(n, max_degree, &mut rng);
            NamedOperator::new(
                format!("null_{i}"),
                params.field().expect("random parameters are antisymmetric"),
            )
        })
        .collect()
}
