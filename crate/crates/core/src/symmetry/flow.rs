//! Numerical exponentiation of an operator: integrate `dx_μ/dε = ξ^μ`,
//! `du/dε = η` with classical RK4 and a step-doubling error estimate.

use super::{CoefficientJet, JetPoint, SymmetryError};
use crate::exec::Exec;
use crate::linalg;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowOptions {
    /// Fixed number of steps covering `[0, ε]`.
    pub steps: usize,
    /// Largest accepted local error estimate per step (max norm).
    pub error_bound: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions {
            steps: 100,
            error_bound: 1e-9,
        }
    }
}

fn rhs(field: &dyn CoefficientJet, z: &[f64]) -> Vec<f64> {
    let (mut v, eta) = field.value(z);
    v.push(eta);
    v
}

fn axpy(z: &[f64], h: f64, k: &[f64]) -> Vec<f64> {
    z.iter().zip(k).map(|(a, b)| a + h * b).collect()
}

fn rk4_step(field: &dyn CoefficientJet, z: &[f64], h: f64) -> Vec<f64> {
    let k1 = rhs(field, z);
    let k2 = rhs(field, &axpy(z, h / 2.0, &k1));
    let k3 = rhs(field, &axpy(z, h / 2.0, &k2));
    let k4 = rhs(field, &axpy(z, h, &k3));
    z.iter()
        .enumerate()
        .map(|(i, zi)| zi + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

fn transport(
    field: &dyn CoefficientJet,
    epsilon: f64,
    z0: &[f64],
    opts: &FlowOptions,
    point: usize,
) -> Result<Vec<f64>, SymmetryError> {
    let h = epsilon / opts.steps as f64;
    let mut z = z0.to_vec();
    for step in 0..opts.steps {
        let coarse = rk4_step(field, &z, h);
        let half = rk4_step(field, &z, h / 2.0);
        let fine = rk4_step(field, &half, h / 2.0);
        let estimate = coarse
            .iter()
            .zip(&fine)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if !(estimate <= opts.error_bound) {
            return Err(SymmetryError::StepRejected {
                point,
                step,
                estimate,
                bound: opts.error_bound,
            });
        }
        z = fine;
    }
    Ok(z)
}

/// Transport graph points `(x_0..x_n, u)` along the flow of `field` for
/// parameter `epsilon`.
pub fn flow_map(
    field: &dyn CoefficientJet,
    epsilon: f64,
    points: &[Vec<f64>],
    opts: &FlowOptions,
    exec: Exec,
) -> Result<Vec<Vec<f64>>, SymmetryError> {
    let n = field.n();
    if let Some(bad) = points.iter().find(|p| p.len() != n + 2) {
        return Err(SymmetryError::DimensionMismatch {
            expected: n,
            got: bad.len().saturating_sub(2),
        });
    }
    exec.map_range(points.len(), |i| {
        transport(field, epsilon, &points[i], opts, i)
    })
    .into_iter()
    .collect()
}

fn push_jet(
    field: &dyn CoefficientJet,
    epsilon: f64,
    jet: &JetPoint,
    delta: f64,
    opts: &FlowOptions,
    point: usize,
) -> Result<JetPoint, SymmetryError> {
    let dim = jet.x.len();
    let mut base = jet.x.clone();
    base.push(jet.u);
    let image = transport(field, epsilon, &base, opts, point)?;
    // Tangent vectors e_ν + u_ν ∂_u, pushed forward by central differences.
    let mut rows = Vec::with_capacity(dim);
    let mut rhs = Vec::with_capacity(dim);
    for nu in 0..dim {
        let mut plus = base.clone();
        let mut minus = base.clone();
        plus[nu] += delta;
        minus[nu] -= delta;
        plus[dim] += delta * jet.grad[nu];
        minus[dim] -= delta * jet.grad[nu];
        let a = transport(field, epsilon, &plus, opts, point)?;
        let b = transport(field, epsilon, &minus, opts, point)?;
        let t: Vec<f64> = a
            .iter()
            .zip(&b)
            .map(|(p, m)| (p - m) / (2.0 * delta))
            .collect();
        rows.push(t[..dim].to_vec());
        rhs.push(t[dim]);
    }
    // New gradient g: T^u_ν = g_μ T^μ_ν for every tangent ν.
    let grad = linalg::solve(&rows, &rhs).ok_or(SymmetryError::DegenerateGraph(point))?;
    Ok(JetPoint {
        x: image[..dim].to_vec(),
        u: image[dim],
        grad,
    })
}

/// Push 1-jets of a graph forward by the flow: the image point and the
/// gradient of the transported graph there, fitted from tangent vectors
/// transported with central differences of step `delta`.
pub fn flow_jets(
    field: &dyn CoefficientJet,
    epsilon: f64,
    jets: &[JetPoint],
    delta: f64,
    opts: &FlowOptions,
    exec: Exec,
) -> Result<Vec<JetPoint>, SymmetryError> {
    let n = field.n();
    if let Some(bad) = jets
        .iter()
        .find(|j| j.x.len() != n + 1 || j.grad.len() != n + 1)
    {
        return Err(SymmetryError::DimensionMismatch {
            expected: n,
            got: bad.x.len().saturating_sub(1),
        });
    }
    exec.map_range(jets.len(), |i| {
        push_jet(field, epsilon, &jets[i], delta, opts, i)
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symmetry::{conformal_catalog, VectorField};

    fn op(name: &str, n: usize) -> VectorField {
        conformal_catalog(n)
            .into_iter()
            .find(|o| o.name == name)
            .unwrap()
            .field
    }

    #[test]
    fn translation_flow() {
        let f = op("P1", 2).compile();
        let out = flow_map(
            &f,
            1.0,
            &[vec![0.5, -1.0, 2.0, 3.0]],
            &FlowOptions::default(),
            Exec::Sequential,
        )
        .unwrap();
        let expected = [0.5, 0.0, 2.0, 3.0];
        for (a, b) in out[0].iter().zip(expected) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn dilation_flow_is_exponential() {
        let f = op("D", 2).compile();
        let p = vec![1.0, 0.5, -0.25, 2.0];
        let t = 0.7;
        let opts = FlowOptions {
            steps: 1000,
            ..FlowOptions::default()
        };
        let out = flow_map(&f, t, &[p.clone()], &opts, Exec::Sequential).unwrap();
        for (a, b) in out[0].iter().zip(&p) {
            assert!(
                (a - b * f64::exp(t)).abs() < 1e-12,
                "{a} vs {}",
                b * f64::exp(t)
            );
        }
    }

    #[test]
    fn boost_flow_is_hyperbolic_rotation() {
        let f = op("J01", 2).compile();
        let phi = 0.3;
        let p = vec![1.2, -0.4, 0.7, 0.9];
        let out = flow_map(
            &f,
            phi,
            &[p.clone()],
            &FlowOptions::default(),
            Exec::Sequential,
        )
        .unwrap();
        let (c, s) = (phi.cosh(), phi.sinh());
        let expected = [c * p[0] + s * p[1], s * p[0] + c * p[1], p[2], p[3]];
        for (a, b) in out[0].iter().zip(expected) {
            assert!((a - b).abs() <= 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn rotated_plane_wave_jet() {
        // J12 rotates the graph of u = x_1 into u = x_1 cos ε + x_2 sin ε.
        let f = op("J12", 2).compile();
        let jet = JetPoint {
            x: vec![0.3, 1.0, -0.5],
            u: 1.0,
            grad: vec![0.0, 1.0, 0.0],
        };
        let out = flow_jets(
            &f,
            0.4,
            &[jet],
            1e-4,
            &FlowOptions::default(),
            Exec::Sequential,
        )
        .unwrap();
        let g = &out[0].grad;
        assert!(g[0].abs() < 1e-9);
        assert!(
            (g[1] - 0.4f64.cos()).abs() < 1e-9 && (g[2] - 0.4f64.sin()).abs() < 1e-9,
            "{g:?}"
        );
    }

    #[test]
    fn large_error_estimate_rejects_step() {
        let f = op("K1", 1).compile();
        let opts = FlowOptions {
            steps: 2,
            error_bound: 1e-14,
        };
        let err = flow_map(&f, 0.5, &[vec![1.0, 0.5, 0.3]], &opts, Exec::Sequential).unwrap_err();
        assert!(matches!(err, SymmetryError::StepRejected { point: 0, .. }));
    }
}
