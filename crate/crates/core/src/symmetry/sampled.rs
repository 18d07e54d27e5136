//! Floating-point invariance check on the solution manifold.
//!
//! Works for any operator whose coefficients can be evaluated together with
//! their first partial derivatives, including the non-polynomial members of
//! the `u_μ u_μ = 0` family.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twofloat::TwoFloat;

use super::{metric_sign, EikonalProblem, SymmetryError, VectorField};
use crate::algebra::CompiledPoly;
use crate::exec::Exec;

/// Coefficients and first partials at a point `z = (x_0..x_n, u)`.
///
/// `dxi[ν][j] = ∂ξ^ν/∂z_j`, `deta[j] = ∂η/∂z_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub xi: Vec<f64>,
    pub eta: f64,
    pub dxi: Vec<Vec<f64>>,
    pub deta: Vec<f64>,
}

pub trait CoefficientJet: Sync {
    /// Number of space variables.
    fn n(&self) -> usize;

    fn jet(&self, z: &[f64]) -> Jet;

    /// `(ξ, η)` only; used by flows.
    fn value(&self, z: &[f64]) -> (Vec<f64>, f64) {
        let j = self.jet(z);
        (j.xi, j.eta)
    }
}

/// A polynomial [`VectorField`] lowered to `f64`, with derivatives
/// precomputed.
#[derive(Debug, Clone)]
pub struct CompiledField {
    n: usize,
    xi: Vec<CompiledPoly>,
    eta: CompiledPoly,
    dxi: Vec<Vec<CompiledPoly>>,
    deta: Vec<CompiledPoly>,
}

impl CompiledField {
    pub fn new(field: &VectorField) -> Self {
        let nv = field.n() + 2;
        CompiledField {
            n: field.n(),
            xi: field.xi().iter().map(|p| p.compile()).collect(),
            eta: field.eta().compile(),
            dxi: field
                .xi()
                .iter()
                .map(|p| (0..nv).map(|j| p.diff(j).compile()).collect())
                .collect(),
            deta: (0..nv).map(|j| field.eta().diff(j).compile()).collect(),
        }
    }
}

impl CoefficientJet for CompiledField {
    fn n(&self) -> usize {
        self.n
    }

    fn jet(&self, z: &[f64]) -> Jet {
        Jet {
            xi: self.xi.iter().map(|p| p.eval_accurate(z)).collect(),
            eta: self.eta.eval_accurate(z),
            dxi: self
                .dxi
                .iter()
                .map(|row| row.iter().map(|p| p.eval_accurate(z)).collect())
                .collect(),
            deta: self.deta.iter().map(|p| p.eval_accurate(z)).collect(),
        }
    }

    fn value(&self, z: &[f64]) -> (Vec<f64>, f64) {
        (
            self.xi.iter().map(|p| p.eval(z)).collect(),
            self.eta.eval(z),
        )
    }
}

/// Operator given by a closure returning the full jet.
pub struct ClosureField<F> {
    n: usize,
    f: F,
}

impl<F> ClosureField<F>
where
    F: Fn(&[f64]) -> Jet + Sync,
{
    pub fn new(n: usize, f: F) -> Self {
        ClosureField { n, f }
    }
}

impl<F> CoefficientJet for ClosureField<F>
where
    F: Fn(&[f64]) -> Jet + Sync,
{
    fn n(&self) -> usize {
        self.n
    }

    fn jet(&self, z: &[f64]) -> Jet {
        (self.f)(z)
    }
}

/// `2 g_μ ζ^μ u_μ` at a point `z` with gradient `p`, accumulated in
/// double-double arithmetic.
pub fn residual_at(jet: &Jet, p: &[f64]) -> f64 {
    let wide: Vec<TwoFloat> = p.iter().map(|&v| TwoFloat::from(v)).collect();
    wide_residual(jet, &wide).into()
}

fn wide_residual(jet: &Jet, p: &[TwoFloat]) -> TwoFloat {
    let n = p.len() - 1;
    let u_idx = n + 1;
    let w = TwoFloat::from;
    let eta_u = w(jet.deta[u_idx]);
    let xi_u_p = (0..=n).fold(w(0.0), |acc, nu| acc + p[nu] * jet.dxi[nu][u_idx]);
    let mut acc = w(0.0);
    for mu in 0..=n {
        let mut zeta = w(jet.deta[mu]) + (eta_u - xi_u_p) * p[mu];
        for nu in 0..=n {
            zeta -= p[nu] * jet.dxi[nu][mu];
        }
        acc += zeta * p[mu] * (2.0 * metric_sign(mu) as f64);
    }
    acc
}

/// Like [`residual_at`], with `p_0` re-derived from `p_μ p_μ = c` in
/// double-double precision so that the sample lies on the manifold well
/// below `f64` resolution.
fn manifold_residual(jet: &Jet, p: &[f64], c: f64) -> f64 {
    let mut wide: Vec<TwoFloat> = p.iter().map(|&v| TwoFloat::from(v)).collect();
    let spatial = wide[1..]
        .iter()
        .fold(TwoFloat::from(c), |acc, &v| acc + v * v);
    wide[0] = spatial.sqrt() * p[0].signum();
    wide_residual(jet, &wide).into()
}

/// Points `(z, p)` with `z` uniform in `[−2, 2]^{n+2}`, spatial gradient
/// uniform in `[−1, 1]^n`, and `p_0 = ±√(c + p_a p_a)` so that
/// `p_μ p_μ = c` holds.
pub fn manifold_samples(
    problem: &EikonalProblem,
    count: usize,
    seed: u64,
) -> Vec<(Vec<f64>, Vec<f64>)> {
    let n = problem.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let z: Vec<f64> = (0..n + 2).map(|_| rng.random_range(-2.0..=2.0)).collect();
            let mut p = vec![0.0; n + 1];
            for pa in p.iter_mut().skip(1) {
                *pa = rng.random_range(-1.0..=1.0);
            }
            let spatial: f64 = p[1..].iter().map(|v| v * v).sum();
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            p[0] = sign * (problem.c() as f64 + spatial).sqrt();
            (z, p)
        })
        .collect()
}

/// Maximum `|2 g_μ ζ^μ u_μ|` over seeded manifold samples.
pub fn sampled_symmetry_check(
    field: &dyn CoefficientJet,
    problem: &EikonalProblem,
    samples: usize,
    seed: u64,
    exec: Exec,
) -> Result<f64, SymmetryError> {
    if field.n() != problem.n() {
        return Err(SymmetryError::DimensionMismatch {
            expected: problem.n(),
            got: field.n(),
        });
    }
    let pts = manifold_samples(problem, samples, seed);
    Ok(exec.max_range(pts.len(), |i| {
        let (z, p) = &pts[i];
        manifold_residual(&field.jet(z), p, problem.c() as f64).abs()
    }))
}
