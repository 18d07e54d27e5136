//! Discrete symmetries acting on `(x, u, ∇u)`.

use super::{EikonalProblem, SymmetryError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiscreteMap {
    /// `x_0 → −x_0`.
    TimeReflection,
    /// `x_a → −x_a` for one space index `a`.
    SpaceReflection(usize),
    /// `u → −u`.
    UReflection,
    /// Swap space variables `x_a ↔ x_b`.
    Transposition(usize, usize),
    /// `x'_1 = u`, `u' = x_1`; only for `u_μ u_μ = 1`.
    Hodograph,
}

/// A jet point: coordinates, value and gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct JetPoint {
    pub x: Vec<f64>,
    pub u: f64,
    pub grad: Vec<f64>,
}

impl DiscreteMap {
    pub fn name(&self) -> String {
        match self {
            DiscreteMap::TimeReflection => "T".into(),
            DiscreteMap::SpaceReflection(a) => format!("R{a}"),
            DiscreteMap::UReflection => "Ru".into(),
            DiscreteMap::Transposition(a, b) => format!("S{a}{b}"),
            DiscreteMap::Hodograph => "H1u".into(),
        }
    }

    /// Image of a point of the graph together with the transformed gradient.
    pub fn apply(&self, pt: &JetPoint) -> Result<JetPoint, SymmetryError> {
        let mut out = pt.clone();
        match *self {
            DiscreteMap::TimeReflection => {
                out.x[0] = -pt.x[0];
                out.grad[0] = -pt.grad[0];
            }
            DiscreteMap::SpaceReflection(a) => {
                out.x[a] = -pt.x[a];
                out.grad[a] = -pt.grad[a];
            }
            DiscreteMap::UReflection => {
                out.u = -pt.u;
                out.grad.iter_mut().for_each(|g| *g = -*g);
            }
            DiscreteMap::Transposition(a, b) => {
                out.x.swap(a, b);
                out.grad.swap(a, b);
            }
            DiscreteMap::Hodograph => {
                let u1 = pt.grad[1];
                if u1 == 0.0 {
                    return Err(SymmetryError::SingularHodograph);
                }
                out.x[1] = pt.u;
                out.u = pt.x[1];
                // dx_1 = (du − Σ_{μ≠1} u_μ dx_μ) / u_1
                for (mu, g) in out.grad.iter_mut().enumerate() {
                    *g = if mu == 1 { 1.0 / u1 } else { -pt.grad[mu] / u1 };
                }
            }
        }
        Ok(out)
    }
}

/// Generators of the discrete symmetry group: time reflection, each space
/// reflection, `u` reflection, adjacent transpositions of space variables,
/// and the hodograph swap for `c = 1`.
pub fn discrete_catalog(problem: &EikonalProblem) -> Vec<DiscreteMap> {
    let n = problem.n();
    let mut out = vec![DiscreteMap::TimeReflection];
    out.extend((1..=n).map(DiscreteMap::SpaceReflection));
    out.push(DiscreteMap::UReflection);
    out.extend((1..n).map(|a| DiscreteMap::Transposition(a, a + 1)));
    if problem.c() == 1 {
        out.push(DiscreteMap::Hodograph);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(g: &[f64]) -> f64 {
        g[0] * g[0] - g[1..].iter().map(|v| v * v).sum::<f64>()
    }

    #[test]
    fn time_reflection_of_u_equals_x0() {
        // u = x_0 at x = (2, 1): image point has x'_0 = −2, u' = 2 = −x'_0.
        let pt = JetPoint {
            x: vec![2.0, 1.0],
            u: 2.0,
            grad: vec![1.0, 0.0],
        };
        let img = DiscreteMap::TimeReflection.apply(&pt).unwrap();
        assert_eq!(img.u, -img.x[0]);
        assert_eq!(img.grad, vec![-1.0, 0.0]);
        assert_eq!(square(&img.grad), 1.0);
    }

    #[test]
    fn transposition_moves_dependence() {
        // u = x_1 → u = x_2
        let pt = JetPoint {
            x: vec![0.0, 3.0, 5.0],
            u: 3.0,
            grad: vec![0.0, 1.0, 0.0],
        };
        let img = DiscreteMap::Transposition(1, 2).apply(&pt).unwrap();
        assert_eq!(img.u, img.x[2]);
        assert_eq!(img.grad, vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn hodograph_maps_plane_wave_to_plane_wave() {
        // u = √2 x_0 + x_1 solves u_μ u_μ = 1; its image is u' = −√2 x'_0 + x'_1.
        let s2 = 2f64.sqrt();
        let x = vec![0.3, -0.8, 1.1];
        let pt = JetPoint {
            u: s2 * x[0] + x[1],
            x,
            grad: vec![s2, 1.0, 0.0],
        };
        let img = DiscreteMap::Hodograph.apply(&pt).unwrap();
        assert!((img.u - (-s2 * img.x[0] + img.x[1])).abs() < 1e-15);
        assert!((square(&img.grad) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hodograph_requires_nonzero_u1() {
        let pt = JetPoint {
            x: vec![1.0, 0.0],
            u: 1.0,
            grad: vec![1.0, 0.0],
        };
        assert_eq!(
            DiscreteMap::Hodograph.apply(&pt),
            Err(SymmetryError::SingularHodograph)
        );
    }

    #[test]
    fn every_map_preserves_the_equation() {
        for c in [0u8, 1] {
            let pr = EikonalProblem::new(3, c).unwrap();
            let grad = {
                let (p1, p2, p3) = (0.4, -0.7, 0.2);
                vec![(c as f64 + p1 * p1 + p2 * p2 + p3 * p3).sqrt(), p1, p2, p3]
            };
            let pt = JetPoint {
                x: vec![0.1, 0.2, 0.3, 0.4],
                u: 0.9,
                grad,
            };
            let maps = discrete_catalog(&pr);
            assert_eq!(maps.contains(&DiscreteMap::Hodograph), c == 1);
            for m in maps {
                let img = m.apply(&pt).unwrap();
                assert!((square(&img.grad) - c as f64).abs() < 1e-14, "{}", m.name());
            }
        }
    }
}
