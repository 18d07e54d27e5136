//! General solutions of `u_μ u_μ = 1` by Hessian rank.
//!
//! * rank 0: planes `u = c_μ x_μ + c0` ([`Rank0Solution`]);
//! * rank `1 ≤ k ≤ n`: envelopes of
//!   `u = −x_b τ_b + x_0 √(1 + τ·τ + w·w) + w_m x_{k+m} + Ψ(τ)` over
//!   `τ ∈ ℝ^k` ([`ParametricSolution`]);
//! * the two-variable Euclidean form `u = x_1 τ + x_2 √(1 − τ²) + Ψ(τ)` of
//!   `u_1² + u_2² = 1` ([`Euclid2Solution`]).
//!
//! Envelopes are evaluated pointwise by solving `∂u/∂τ = 0` with multistart
//! damped Newton. Every converged root is returned; [`Branch`] picks one.

mod newton;

use std::fmt;
use std::str::FromStr;

use crate::algebra::{CompiledPoly, Poly, Rational};
use crate::exec::{nan_max, Exec};
use crate::grid::{GridError, GridField, InteriorMax, Window};
use crate::symmetry::{metric_sign, EikonalProblem};
use newton::StationarySystem;

#[derive(Debug, thiserror::Error)]
pub enum SolutionError {
    #[error("c_μc_μ = {value}, expected 1")]
    NotNormalized { value: f64 },
    #[error("expected a point with {expected} coordinates, got {got}")]
    PointLength { expected: usize, got: usize },
    #[error("rank {k} outside 1..={n}")]
    BadRank { k: usize, n: usize },
    #[error("expected {expected} reduction functions, got {got}")]
    ReductionCount { expected: usize, got: usize },
    #[error("{what} must be a polynomial in {expected} parameters, got {got}")]
    ParameterCount {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("search box [{lower}, {upper}] is empty or not finite")]
    BadBox { lower: f64, upper: f64 },
    #[error("search box [{lower}, {upper}] leaves the open interval (-1, 1)")]
    BoxOutsideDomain { lower: f64, upper: f64 },
    #[error("degenerate envelope: more than {roots} distinct stationary points")]
    DegenerateEnvelope { roots: usize },
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Multistart Newton settings.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeOptions {
    /// Every parameter is searched in `[lower, upper]`.
    pub lower: f64,
    pub upper: f64,
    pub starts_per_axis: usize,
    /// Start displacement as a fraction of the lattice cell.
    pub jitter: f64,
    pub seed: u64,
    pub max_iter: usize,
    pub tol: f64,
    pub dedup_radius: f64,
    pub max_roots: usize,
}

impl Default for EnvelopeOptions {
    fn default() -> Self {
        EnvelopeOptions {
            lower: -5.0,
            upper: 5.0,
            starts_per_axis: 7,
            jitter: 0.25,
            seed: 0,
            max_iter: 50,
            tol: 1e-12,
            dedup_radius: 1e-8,
            max_roots: 64,
        }
    }
}

impl EnvelopeOptions {
    /// Defaults for [`Euclid2Solution`], whose parameter lives in `(−1, 1)`.
    pub fn euclid2() -> Self {
        EnvelopeOptions {
            lower: -0.999,
            upper: 0.999,
            ..EnvelopeOptions::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn check_box(&self) -> Result<(), SolutionError> {
        if !(self.lower.is_finite() && self.upper.is_finite() && self.lower <= self.upper) {
            return Err(SolutionError::BadBox {
                lower: self.lower,
                upper: self.upper,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeRoot {
    pub tau: Vec<f64>,
    pub u: f64,
    /// Gradient `u_μ` from the envelope identities.
    pub gradient: Vec<f64>,
    pub converged: bool,
    pub newton_iters: usize,
    pub branch_id: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Branch {
    #[default]
    MinU,
    MaxU,
    All,
}

impl Branch {
    /// Roots are sorted by `u`, so this only slices.
    pub fn select<'a>(&self, roots: &'a [EnvelopeRoot]) -> &'a [EnvelopeRoot] {
        match (self, roots.len()) {
            (_, 0) | (Branch::All, _) => roots,
            (Branch::MinU, _) => &roots[..1],
            (Branch::MaxU, len) => &roots[len - 1..],
        }
    }
}

impl FromStr for Branch {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "min-u" => Ok(Branch::MinU),
            "max-u" => Ok(Branch::MaxU),
            "all" => Ok(Branch::All),
            other => Err(format!(
                "unknown branch policy {other:?} (min-u, max-u, all)"
            )),
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::MinU => "min-u",
            Branch::MaxU => "max-u",
            Branch::All => "all",
        })
    }
}

/// Contraction used by residual checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Signature {
    /// `(+, −, …, −)`, axis 0 is time.
    #[default]
    Minkowski,
    /// `(+, …, +)`.
    Euclidean,
}

impl Signature {
    pub fn square(&self, grad: &[f64]) -> f64 {
        match self {
            Signature::Minkowski => grad
                .iter()
                .enumerate()
                .map(|(mu, g)| metric_sign(mu) as f64 * g * g)
                .sum(),
            Signature::Euclidean => grad.iter().map(|g| g * g).sum(),
        }
    }

    /// `|g·g − c|`.
    pub fn residual(&self, grad: &[f64], c: f64) -> f64 {
        (self.square(grad) - c).abs()
    }
}

fn check_len(x: &[f64], expected: usize) -> Result<(), SolutionError> {
    if x.len() != expected {
        return Err(SolutionError::PointLength {
            expected,
            got: x.len(),
        });
    }
    Ok(())
}

/// `u = c_μ x_μ + c0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rank0Solution {
    coeffs: Vec<f64>,
    offset: f64,
}

impl Rank0Solution {
    pub fn new(coeffs: Vec<f64>, offset: f64) -> Result<Self, SolutionError> {
        let value = Signature::Minkowski.square(&coeffs);
        if coeffs.len() < 2 || !((value - 1.0).abs() <= 1e-14) {
            return Err(SolutionError::NotNormalized { value });
        }
        Ok(Rank0Solution { coeffs, offset })
    }

    pub fn n(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64, SolutionError> {
        check_len(x, self.coeffs.len())?;
        let dot: f64 = self
            .coeffs
            .iter()
            .zip(x)
            .enumerate()
            .map(|(mu, (c, x))| metric_sign(mu) as f64 * c * x)
            .sum();
        Ok(dot + self.offset)
    }

    /// Partial derivatives `u_μ = g_μμ c_μ`.
    pub fn gradient(&self) -> Vec<f64> {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(mu, c)| metric_sign(mu) as f64 * c)
            .collect()
    }
}

/// A polynomial in `k` parameters with its first and second partials.
#[derive(Debug, Clone)]
struct Smooth {
    value: CompiledPoly,
    d: Vec<CompiledPoly>,
    dd: Vec<Vec<CompiledPoly>>,
}

impl Smooth {
    fn new(p: &Poly) -> Self {
        let k = p.nvars();
        let d: Vec<Poly> = (0..k).map(|b| p.diff(b)).collect();
        Smooth {
            value: p.compile(),
            dd: d
                .iter()
                .map(|db| (0..k).map(|c| db.diff(c).compile()).collect())
                .collect(),
            d: d.iter().map(Poly::compile).collect(),
        }
    }
}

fn param_poly(what: &'static str, p: &Poly, k: usize) -> Result<Smooth, SolutionError> {
    if p.nvars() != k {
        return Err(SolutionError::ParameterCount {
            what,
            expected: k,
            got: p.nvars(),
        });
    }
    Ok(Smooth::new(p))
}

/// Rank-`k` envelope family in `n` space variables.
#[derive(Debug, Clone)]
pub struct ParametricSolution {
    n: usize,
    k: usize,
    psi: Poly,
    w: Vec<Poly>,
    psi_c: Smooth,
    w_c: Vec<Smooth>,
}

/// Values of the reduction functions and their derivatives at one `τ`.
struct WJet {
    w: Vec<f64>,
    dw: Vec<Vec<f64>>,
    radicand: f64,
}

impl ParametricSolution {
    /// `psi` and every `w_m` are polynomials in `τ_1..τ_k`; `w` has `n − k`
    /// entries.
    pub fn new(n: usize, psi: Poly, w: Vec<Poly>) -> Result<Self, SolutionError> {
        let k = psi.nvars();
        if k == 0 || k > n {
            return Err(SolutionError::BadRank { k, n });
        }
        if w.len() != n - k {
            return Err(SolutionError::ReductionCount {
                expected: n - k,
                got: w.len(),
            });
        }
        let psi_c = param_poly("psi", &psi, k)?;
        let w_c = w
            .iter()
            .map(|p| param_poly("w", p, k))
            .collect::<Result<_, _>>()?;
        Ok(ParametricSolution {
            n,
            k,
            psi,
            w,
            psi_c,
            w_c,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.k
    }

    pub fn psi(&self) -> &Poly {
        &self.psi
    }

    pub fn w(&self) -> &[Poly] {
        &self.w
    }

    fn wjet(&self, tau: &[f64]) -> WJet {
        let w: Vec<f64> = self.w_c.iter().map(|s| s.value.eval(tau)).collect();
        let dw = self
            .w_c
            .iter()
            .map(|s| s.d.iter().map(|d| d.eval(tau)).collect())
            .collect();
        let radicand =
            1.0 + tau.iter().map(|t| t * t).sum::<f64>() + w.iter().map(|v| v * v).sum::<f64>();
        WJet { w, dw, radicand }
    }

    /// `u(x; τ)` before elimination of `τ`.
    pub fn value(&self, x: &[f64], tau: &[f64]) -> f64 {
        let j = self.wjet(tau);
        let k = self.k;
        let lin: f64 = (0..k).map(|b| x[b + 1] * tau[b]).sum();
        let wx: f64 = j.w.iter().enumerate().map(|(m, w)| w * x[k + 1 + m]).sum();
        -lin + x[0] * j.radicand.sqrt() + wx + self.psi_c.value.eval(tau)
    }

    /// `S_b = ∂u/∂τ_b` and `∂S_b/∂τ_c`.
    pub fn stationarity(&self, x: &[f64], tau: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
        let k = self.k;
        let j = self.wjet(tau);
        let r = j.radicand.sqrt();
        // a_b = τ_b + w_m ∂_b w_m = ½ ∂_b(radicand)
        let a: Vec<f64> = (0..k)
            .map(|b| tau[b] + j.w.iter().zip(&j.dw).map(|(w, dw)| w * dw[b]).sum::<f64>())
            .collect();
        let xw = |m: usize| x[k + 1 + m];
        let s = (0..k)
            .map(|b| {
                let wx: f64 = j.dw.iter().enumerate().map(|(m, dw)| dw[b] * xw(m)).sum();
                -x[b + 1] + x[0] * a[b] / r + wx + self.psi_c.d[b].eval(tau)
            })
            .collect();
        let jac = (0..k)
            .map(|b| {
                (0..k)
                    .map(|c| {
                        let mut da = if b == c { 1.0 } else { 0.0 };
                        let mut wx = 0.0;
                        for (m, wc) in self.w_c.iter().enumerate() {
                            let ddw = wc.dd[b][c].eval(tau);
                            da += j.dw[m][c] * j.dw[m][b] + j.w[m] * ddw;
                            wx += ddw * xw(m);
                        }
                        x[0] * (da / r - a[b] * a[c] / (r * r * r))
                            + wx
                            + self.psi_c.dd[b][c].eval(tau)
                    })
                    .collect()
            })
            .collect();
        (s, jac)
    }

    /// `u_0 = √(1 + τ·τ + w·w)`, `u_b = −τ_b`, `u_{k+m} = w_m`.
    pub fn envelope_gradient(&self, tau: &[f64]) -> Vec<f64> {
        let j = self.wjet(tau);
        let mut g = Vec::with_capacity(self.n + 1);
        g.push(j.radicand.sqrt());
        g.extend(tau.iter().map(|t| -t));
        g.extend(j.w);
        g
    }

    pub fn solve_envelope(
        &self,
        x: &[f64],
        opts: &EnvelopeOptions,
    ) -> Result<Vec<EnvelopeRoot>, SolutionError> {
        check_len(x, self.n + 1)?;
        opts.check_box()?;
        newton::multistart(&AtPoint { s: self, x }, opts)
    }
}

struct AtPoint<'a, S> {
    s: &'a S,
    x: &'a [f64],
}

impl StationarySystem for AtPoint<'_, ParametricSolution> {
    fn dim(&self) -> usize {
        self.s.k
    }
    fn admissible(&self, _tau: &[f64]) -> bool {
        true
    }
    fn system(&self, tau: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
        self.s.stationarity(self.x, tau)
    }
    fn objective(&self, tau: &[f64]) -> f64 {
        self.s.value(self.x, tau)
    }
    fn gradient(&self, tau: &[f64]) -> Vec<f64> {
        self.s.envelope_gradient(tau)
    }
}

/// `u = x_1 τ + x_2 √(1 − τ²) + Ψ(τ)`, a solution of `u_1² + u_2² = 1`.
/// Coordinates are `(x_1, x_2)`.
#[derive(Debug, Clone)]
pub struct Euclid2Solution {
    psi: Poly,
    psi_c: Smooth,
}

impl Euclid2Solution {
    pub fn new(psi: Poly) -> Result<Self, SolutionError> {
        let psi_c = param_poly("psi", &psi, 1)?;
        Ok(Euclid2Solution { psi, psi_c })
    }

    pub fn psi(&self) -> &Poly {
        &self.psi
    }

    pub fn value(&self, x: &[f64], tau: f64) -> f64 {
        x[0] * tau + x[1] * (1.0 - tau * tau).sqrt() + self.psi_c.value.eval(&[tau])
    }

    /// `S = x_1 − x_2 τ / √(1 − τ²) + Ψ'` and `dS/dτ`.
    pub fn stationarity(&self, x: &[f64], tau: f64) -> (f64, f64) {
        let q = 1.0 - tau * tau;
        let s = x[0] - x[1] * tau / q.sqrt() + self.psi_c.d[0].eval(&[tau]);
        let ds = -x[1] / (q * q.sqrt()) + self.psi_c.dd[0][0].eval(&[tau]);
        (s, ds)
    }

    /// `(u_1, u_2) = (τ, √(1 − τ²))`.
    pub fn envelope_gradient(&self, tau: f64) -> Vec<f64> {
        vec![tau, (1.0 - tau * tau).sqrt()]
    }

    pub fn solve(
        &self,
        x: &[f64],
        opts: &EnvelopeOptions,
    ) -> Result<Vec<EnvelopeRoot>, SolutionError> {
        check_len(x, 2)?;
        opts.check_box()?;
        if !(opts.lower > -1.0 && opts.upper < 1.0) {
            return Err(SolutionError::BoxOutsideDomain {
                lower: opts.lower,
                upper: opts.upper,
            });
        }
        newton::multistart(&AtPoint { s: self, x }, opts)
    }
}

impl StationarySystem for AtPoint<'_, Euclid2Solution> {
    fn dim(&self) -> usize {
        1
    }
    fn admissible(&self, tau: &[f64]) -> bool {
        tau[0].abs() < 1.0
    }
    fn system(&self, tau: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
        let (s, ds) = self.s.stationarity(self.x, tau[0]);
        (vec![s], vec![vec![ds]])
    }
    fn objective(&self, tau: &[f64]) -> f64 {
        self.s.value(self.x, tau[0])
    }
    fn gradient(&self, tau: &[f64]) -> Vec<f64> {
        self.s.envelope_gradient(tau[0])
    }
}

/// Any of the supported solution families, for uniform grid evaluation.
#[derive(Debug, Clone)]
pub enum Solution {
    Rank0(Rank0Solution),
    Parametric(ParametricSolution),
    Euclid2(Euclid2Solution),
}

impl Solution {
    /// Number of coordinates of an evaluation point.
    pub fn point_len(&self) -> usize {
        match self {
            Solution::Rank0(s) => s.n() + 1,
            Solution::Parametric(s) => s.n() + 1,
            Solution::Euclid2(_) => 2,
        }
    }

    pub fn signature(&self) -> Signature {
        match self {
            Solution::Euclid2(_) => Signature::Euclidean,
            _ => Signature::Minkowski,
        }
    }

    /// All branches at `x`; a plane has a single pseudo-root with no
    /// parameters.
    pub fn roots(
        &self,
        x: &[f64],
        opts: &EnvelopeOptions,
    ) -> Result<Vec<EnvelopeRoot>, SolutionError> {
        match self {
            Solution::Rank0(s) => Ok(vec![EnvelopeRoot {
                tau: Vec::new(),
                u: s.eval(x)?,
                gradient: s.gradient(),
                converged: true,
                newton_iters: 0,
                branch_id: 0,
            }]),
            Solution::Parametric(s) => s.solve_envelope(x, opts),
            Solution::Euclid2(s) => s.solve(x, opts),
        }
    }
}

/// Outcome at one grid node.
#[derive(Debug, Clone)]
pub struct NodeEvaluation {
    pub x: Vec<f64>,
    /// Selected roots; `Err` carries the message of a per-node failure such
    /// as a degenerate envelope.
    pub roots: Result<Vec<EnvelopeRoot>, String>,
}

/// Evaluate `solution` at every node of the lattice `(origin, spacing,
/// shape)` and keep the roots chosen by `branch`.
pub fn evaluate_grid(
    solution: &Solution,
    origin: &[f64],
    spacing: &[f64],
    shape: &[usize],
    branch: Branch,
    opts: &EnvelopeOptions,
    exec: Exec,
) -> Result<Vec<NodeEvaluation>, SolutionError> {
    let geometry = GridField::new(
        origin.to_vec(),
        spacing.to_vec(),
        shape.to_vec(),
        vec![0.0; shape.iter().product()],
    )?;
    check_len(origin, solution.point_len())?;
    Ok(exec.map_range(geometry.len(), |i| {
        let x = geometry.coord_of(i);
        let roots = solution
            .roots(&x, opts)
            .map(|r| branch.select(&r).to_vec())
            .map_err(|e| e.to_string());
        NodeEvaluation { x, roots }
    }))
}

/// Single-valued field of `u` on the lattice: the `MinU` or `MaxU` branch,
/// `NaN` where no root exists.
pub fn solution_field(
    solution: &Solution,
    origin: &[f64],
    spacing: &[f64],
    shape: &[usize],
    branch: Branch,
    opts: &EnvelopeOptions,
    exec: Exec,
) -> Result<GridField, SolutionError> {
    let nodes = evaluate_grid(solution, origin, spacing, shape, branch, opts, exec)?;
    let values = nodes
        .iter()
        .map(|n| match &n.roots {
            Ok(r) if !r.is_empty() => r[0].u,
            _ => f64::NAN,
        })
        .collect();
    Ok(GridField::new(
        origin.to_vec(),
        spacing.to_vec(),
        shape.to_vec(),
        values,
    )?)
}

/// Maximum envelope-identity residual `|u_μ u_μ − c|` over a set of roots.
pub fn analytic_residual(roots: &[EnvelopeRoot], signature: Signature, c: f64) -> f64 {
    roots
        .iter()
        .map(|r| signature.residual(&r.gradient, c))
        .fold(0.0, nan_max)
}

/// `max |u_μ u_μ − c|` with central differences over interior nodes,
/// optionally restricted to `window` so that grids of different spacing can
/// be compared on the same points.
pub fn fd_residual(
    field: &GridField,
    signature: Signature,
    c: f64,
    window: Option<&Window>,
    exec: Exec,
) -> InteriorMax {
    field.interior_max(window, exec, |i| signature.residual(&field.gradient(i), c))
}

/// Exact residual `u_μ u_μ − c` of a polynomial `u(x_0..x_n, u)`; the `u`
/// slot is ignored by differentiation and may be absent from `u`.
pub fn poly_residual(u: &Poly, problem: &EikonalProblem) -> Result<Poly, SolutionError> {
    let nv = problem.base_nvars();
    if u.nvars() != nv {
        return Err(SolutionError::PointLength {
            expected: nv,
            got: u.nvars(),
        });
    }
    let mut r = Poly::constant(nv, Rational::from_integer((-(problem.c() as i64)).into()));
    for mu in 0..=problem.n() {
        let d = u.diff(mu);
        let sq = &d * &d;
        r = if metric_sign(mu) > 0 { r + sq } else { r - sq };
    }
    Ok(r)
}
