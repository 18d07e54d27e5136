//! Multistart damped Newton for small stationarity systems.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EnvelopeOptions, EnvelopeRoot, SolutionError};
use crate::linalg;

/// `S(τ) = ∂u/∂τ` with its Jacobian, plus the objective `u(τ)`.
pub(crate) trait StationarySystem {
    fn dim(&self) -> usize;
    fn admissible(&self, tau: &[f64]) -> bool;
    /// `S(τ)` and its Jacobian.
    fn system(&self, tau: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>);
    fn objective(&self, tau: &[f64]) -> f64;
    fn gradient(&self, tau: &[f64]) -> Vec<f64>;
}

/// Lattice of `starts_per_axis^dim` starting points in the box, each
/// jittered by up to `jitter` of a cell and clamped back into the box.
pub(crate) fn start_lattice(dim: usize, opts: &EnvelopeOptions) -> Vec<Vec<f64>> {
    let m = opts.starts_per_axis.max(1);
    let (lo, hi) = (opts.lower, opts.upper);
    let cell = if m > 1 {
        (hi - lo) / (m - 1) as f64
    } else {
        hi - lo
    };
    let axis = |i: usize| {
        if m > 1 {
            lo + i as f64 * cell
        } else {
            0.5 * (lo + hi)
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let total = m.pow(dim as u32);
    (0..total)
        .map(|mut flat| {
            let mut p = vec![0.0; dim];
            for slot in p.iter_mut().rev() {
                *slot = axis(flat % m);
                flat /= m;
            }
            if opts.jitter > 0.0 {
                for v in p.iter_mut() {
                    let j = rng.random_range(-1.0..=1.0) * opts.jitter * cell;
                    *v = (*v + j).clamp(lo, hi);
                }
            }
            p
        })
        .collect()
}

fn sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Returns the converged point and the iteration count.
fn newton(
    sys: &dyn StationarySystem,
    start: &[f64],
    opts: &EnvelopeOptions,
) -> Option<(Vec<f64>, usize)> {
    if !sys.admissible(start) {
        return None;
    }
    let mut tau = start.to_vec();
    let (mut s, mut jac) = sys.system(&tau);
    for iter in 0..=opts.max_iter {
        let norm = linalg::norm(&s);
        if !norm.is_finite() {
            return None;
        }
        if norm <= opts.tol {
            return Some((tau, iter));
        }
        if iter == opts.max_iter {
            break;
        }
        let neg: Vec<f64> = s.iter().map(|v| -v).collect();
        let step = linalg::solve(&jac, &neg)?;
        let f0 = sq(&s);
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<f64> = tau.iter().zip(&step).map(|(a, d)| a + t * d).collect();
            if sys.admissible(&trial) {
                let (st, jt) = sys.system(&trial);
                // Armijo on ‖S‖²: the Newton direction has slope −2‖S‖².
                if sq(&st) <= (1.0 - 1e-4 * t) * f0 {
                    tau = trial;
                    s = st;
                    jac = jt;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            return None;
        }
    }
    None
}

/// Run Newton from every start, deduplicate and sort the converged roots.
pub(crate) fn multistart(
    sys: &dyn StationarySystem,
    opts: &EnvelopeOptions,
) -> Result<Vec<EnvelopeRoot>, SolutionError> {
    let mut roots: Vec<EnvelopeRoot> = Vec::new();
    for start in start_lattice(sys.dim(), opts) {
        let Some((tau, iters)) = newton(sys, &start, opts) else {
            continue;
        };
        if roots.iter().any(|r| {
            linalg::norm(
                &r.tau
                    .iter()
                    .zip(&tau)
                    .map(|(a, b)| a - b)
                    .collect::<Vec<_>>(),
            ) <= opts.dedup_radius
        }) {
            continue;
        }
        roots.push(EnvelopeRoot {
            u: sys.objective(&tau),
            gradient: sys.gradient(&tau),
            tau,
            converged: true,
            newton_iters: iters,
            branch_id: 0,
        });
        if roots.len() > opts.max_roots {
            return Err(SolutionError::DegenerateEnvelope { roots: roots.len() });
        }
    }
    roots.sort_by(|a, b| {
        a.u.total_cmp(&b.u).then_with(|| {
            a.tau
                .iter()
                .zip(&b.tau)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    for (i, r) in roots.iter_mut().enumerate() {
        r.branch_id = i;
    }
    Ok(roots)
}
