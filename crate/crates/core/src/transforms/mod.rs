//! Contact (Legendre-type) and hodograph transformations.
//!
//! Pointwise maps act on 1-jets through [`ContactMap`]. Gridded versions
//! work line by line along axis 0 of a [`GridField`]: each line is inverted
//! with a monotone cubic and resampled on a new axis-0 lattice. Nodes whose
//! target lies outside the attained range come out as `NaN`; a line with
//! more than half of its nodes missing is an error.

pub mod interp;

use crate::exec::Exec;
use crate::grid::{GridError, GridField, InteriorMax, Window};
use crate::symmetry::discrete::JetPoint;
use crate::symmetry::metric_sign;
use interp::{hermite, locate, MonotoneCubic};

#[derive(Debug, thiserror::Error)]
pub enum TransformError {
    #[error("line {line} at {coords:?} is not strictly monotone near node {index}")]
    NotMonotone {
        line: usize,
        coords: Vec<f64>,
        index: usize,
    },
    #[error("line {line} at {coords:?}: {missing} of {total} target nodes missing")]
    MostlyMissing {
        line: usize,
        coords: Vec<f64>,
        missing: usize,
        total: usize,
    },
    #[error("lines share no common target range")]
    EmptyRange,
    #[error("expected {expected} axes, got {got}")]
    AxisCount { expected: usize, got: usize },
    #[error("expected a point with {expected} coordinates, got {got}")]
    PointLength { expected: usize, got: usize },
    #[error("partial transform rank {k} outside 1..={n}")]
    BadRank { k: usize, n: usize },
    #[error("bad target lattice: {0}")]
    BadLattice(String),
    #[error(transparent)]
    Grid(#[from] GridError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContactKind {
    /// `H = x_1 u_1 − u`, `y_1 = u_1`, `y_2 = x_2` on `(x_1, x_2)`.
    Legendre1Var,
    /// `H = x_a u_a − u`, `y_a = u_a`, `y_0 = x_0` on `(x_0, …, x_n)`.
    LegendreSpace,
    /// `H = x_b u_b − u` for `b ≤ k`; other coordinates kept.
    LegendrePartial(usize),
}

/// A Legendre transformation in a subset of the coordinates, acting on
/// 1-jets `(x, u, ∂u)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContactMap {
    kind: ContactKind,
    dim: usize,
}

impl ContactMap {
    /// `n` is the number of space variables for the Minkowski kinds and is
    /// ignored by `Legendre1Var`, which always acts on two coordinates.
    pub fn new(kind: ContactKind, n: usize) -> Result<Self, TransformError> {
        let dim = match kind {
            ContactKind::Legendre1Var => 2,
            ContactKind::LegendreSpace if n >= 1 => n + 1,
            ContactKind::LegendrePartial(k) if (1..=n).contains(&k) => n + 1,
            ContactKind::LegendreSpace | ContactKind::LegendrePartial(_) => {
                let k = match kind {
                    ContactKind::LegendrePartial(k) => k,
                    _ => n,
                };
                return Err(TransformError::BadRank { k, n });
            }
        };
        Ok(ContactMap { kind, dim })
    }

    pub fn kind(&self) -> ContactKind {
        self.kind
    }

    fn transformed(&self, i: usize) -> bool {
        match self.kind {
            ContactKind::Legendre1Var => i == 0,
            ContactKind::LegendreSpace => i >= 1,
            ContactKind::LegendrePartial(k) => (1..=k).contains(&i),
        }
    }

    /// Image 1-jet `(y, H, ∂H)`. The map is an involution.
    pub fn apply(&self, pt: &JetPoint) -> Result<JetPoint, TransformError> {
        if pt.x.len() != self.dim || pt.grad.len() != self.dim {
            return Err(TransformError::PointLength {
                expected: self.dim,
                got: pt.x.len().min(pt.grad.len()),
            });
        }
        let mut out = JetPoint {
            x: pt.x.clone(),
            u: -pt.u,
            grad: vec![0.0; self.dim],
        };
        for i in 0..self.dim {
            if self.transformed(i) {
                out.x[i] = pt.grad[i];
                out.u += pt.x[i] * pt.grad[i];
                out.grad[i] = pt.x[i];
            } else {
                out.grad[i] = -pt.grad[i];
            }
        }
        Ok(out)
    }

    /// `|u_μ u_μ − 1|` of the original gradient recovered from an image jet:
    /// Euclidean for `Legendre1Var`, Minkowski otherwise. For
    /// `Legendre1Var` this is `|H_{y_2}² + y_1² − 1|`.
    pub fn image_residual(&self, img: &JetPoint) -> f64 {
        let grad: Vec<f64> = (0..self.dim)
            .map(|i| {
                if self.transformed(i) {
                    img.x[i]
                } else {
                    -img.grad[i]
                }
            })
            .collect();
        let sq: f64 = match self.kind {
            ContactKind::Legendre1Var => grad.iter().map(|g| g * g).sum(),
            _ => grad
                .iter()
                .enumerate()
                .map(|(mu, g)| metric_sign(mu) as f64 * g * g)
                .sum(),
        };
        (sq - 1.0).abs()
    }
}

/// A uniform lattice `origin + i·spacing`, `i < count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisLattice {
    pub origin: f64,
    pub spacing: f64,
    pub count: usize,
}

impl AxisLattice {
    pub fn coord(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.spacing
    }

    /// The axis-0 lattice of a grid.
    pub fn of_axis0(field: &GridField) -> Self {
        AxisLattice {
            origin: field.origin()[0],
            spacing: field.spacing()[0],
            count: field.shape()[0],
        }
    }
}

/// A resampling rule for one line: target coordinate to output value.
struct LineMap {
    range: (f64, f64),
    eval: Box<dyn Fn(f64) -> Option<f64> + Send + Sync>,
}

struct Line {
    index: usize,
    coords: Vec<f64>,
    xs: Vec<f64>,
    values: Vec<f64>,
}

fn lines(field: &GridField) -> Vec<Line> {
    let s0 = field.stride(0);
    let n0 = field.shape()[0];
    (0..s0)
        .map(|t| Line {
            index: t,
            coords: field.coord_of(t)[1..].to_vec(),
            xs: (0..n0).map(|i| field.axis_coord(0, i)).collect(),
            values: (0..n0).map(|i| field.values()[i * s0 + t]).collect(),
        })
        .collect()
}

/// Derivative along a uniformly spaced line: central where possible,
/// second-order one-sided next to missing values and at the ends.
fn line_derivative(v: &[f64], h: f64) -> Vec<f64> {
    let ok = |i: isize| i >= 0 && (i as usize) < v.len() && v[i as usize].is_finite();
    let at = |i: isize| v[i as usize];
    (0..v.len() as isize)
        .map(|i| {
            if !ok(i) {
                f64::NAN
            } else if ok(i - 1) && ok(i + 1) {
                (at(i + 1) - at(i - 1)) / (2.0 * h)
            } else if ok(i + 1) && ok(i + 2) {
                (-3.0 * at(i) + 4.0 * at(i + 1) - at(i + 2)) / (2.0 * h)
            } else if ok(i - 1) && ok(i - 2) {
                (3.0 * at(i) - 4.0 * at(i - 1) + at(i - 2)) / (2.0 * h)
            } else {
                f64::NAN
            }
        })
        .collect()
}

/// Longest run of consecutive indices where `valid` holds.
fn longest_run(valid: impl Iterator<Item = bool>) -> std::ops::Range<usize> {
    let (mut best, mut start) = (0..0, None);
    for (i, ok) in valid.chain(std::iter::once(false)).enumerate() {
        match (ok, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                if i - s > best.len() {
                    best = s..i;
                }
                start = None;
            }
            _ => {}
        }
    }
    best
}

/// Check strict monotonicity of `keys` and return `(sorted keys, matching
/// values)`.
fn monotone_pairs(
    line: &Line,
    offset: usize,
    keys: &[f64],
    vals: &[f64],
) -> Result<(Vec<f64>, Vec<f64>), TransformError> {
    let up = keys.windows(2).all(|w| w[1] > w[0]);
    let down = keys.windows(2).all(|w| w[1] < w[0]);
    if !(up || down) {
        let first_bad = keys
            .windows(3)
            .position(|w| (w[1] - w[0]) * (w[2] - w[1]) <= 0.0)
            .map_or(0, |p| p + 1);
        return Err(TransformError::NotMonotone {
            line: line.index,
            coords: line.coords.clone(),
            index: offset + first_bad,
        });
    }
    let (mut k, mut v) = (keys.to_vec(), vals.to_vec());
    if down {
        k.reverse();
        v.reverse();
    }
    Ok((k, v))
}

fn legendre_line(line: &Line, h: f64) -> Result<Option<LineMap>, TransformError> {
    let p = line_derivative(&line.values, h);
    let run = longest_run((0..p.len()).map(|i| p[i].is_finite()));
    if run.len() < 2 {
        return Ok(None);
    }
    let (xs, us, ps) = (
        line.xs[run.clone()].to_vec(),
        line.values[run.clone()].to_vec(),
        p[run.clone()].to_vec(),
    );
    let (keys, vals) = monotone_pairs(line, run.start, &ps, &xs)?;
    let inv = MonotoneCubic::new(keys, vals).expect("strictly monotone keys");
    Ok(Some(LineMap {
        range: inv.domain(),
        eval: Box::new(move |y| {
            let x = inv.eval(y)?;
            let i = locate(&xs, x)?;
            let u = hermite(xs[i], xs[i + 1], us[i], us[i + 1], ps[i], ps[i + 1], x);
            Some(x * y - u)
        }),
    }))
}

fn hodograph_line(line: &Line) -> Result<Option<LineMap>, TransformError> {
    let run = longest_run(line.values.iter().map(|v| v.is_finite()));
    if run.len() < 2 {
        return Ok(None);
    }
    let (keys, vals) = monotone_pairs(
        line,
        run.start,
        &line.values[run.clone()],
        &line.xs[run.clone()],
    )?;
    let inv = MonotoneCubic::new(keys, vals).expect("strictly monotone keys");
    Ok(Some(LineMap {
        range: inv.domain(),
        eval: Box::new(move |y| inv.eval(y)),
    }))
}

/// Apply per-line maps and resample every line on `target` (default: the
/// common attained range with the input's node count).
fn resample(
    field: &GridField,
    target: Option<AxisLattice>,
    exec: Exec,
    prepare: impl Fn(&Line) -> Result<Option<LineMap>, TransformError> + Sync + Send,
) -> Result<GridField, TransformError> {
    let all = lines(field);
    let maps: Vec<Option<LineMap>> = exec
        .map(&all, &prepare)
        .into_iter()
        .collect::<Result<_, _>>()?;
    let target = match target {
        Some(t) => {
            if t.count < 3 || !(t.spacing > 0.0 && t.spacing.is_finite() && t.origin.is_finite()) {
                return Err(TransformError::BadLattice(format!("{t:?}")));
            }
            t
        }
        None => {
            let mut lo = f64::NEG_INFINITY;
            let mut hi = f64::INFINITY;
            for m in maps.iter().flatten() {
                lo = lo.max(m.range.0);
                hi = hi.min(m.range.1);
            }
            if !(lo < hi && lo.is_finite() && hi.is_finite()) {
                return Err(TransformError::EmptyRange);
            }
            let pad = 1e-12 * (hi - lo);
            let count = field.shape()[0];
            AxisLattice {
                origin: lo + pad,
                spacing: (hi - lo - 2.0 * pad) / (count - 1) as f64,
                count,
            }
        }
    };
    let columns: Vec<Vec<f64>> = exec
        .map_range(all.len(), |t| {
            let line = &all[t];
            let vals: Vec<f64> = match &maps[t] {
                Some(m) => (0..target.count)
                    .map(|i| (m.eval)(target.coord(i)).unwrap_or(f64::NAN))
                    .collect(),
                None => vec![f64::NAN; target.count],
            };
            let missing = vals.iter().filter(|v| !v.is_finite()).count();
            if 2 * missing > target.count {
                return Err(TransformError::MostlyMissing {
                    line: line.index,
                    coords: line.coords.clone(),
                    missing,
                    total: target.count,
                });
            }
            Ok(vals)
        })
        .into_iter()
        .collect::<Result<_, _>>()?;
    let s0 = all.len();
    let mut values = vec![0.0; target.count * s0];
    for (t, col) in columns.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            values[i * s0 + t] = *v;
        }
    }
    let mut origin = field.origin().to_vec();
    let mut spacing = field.spacing().to_vec();
    let mut shape = field.shape().to_vec();
    origin[0] = target.origin;
    spacing[0] = target.spacing;
    shape[0] = target.count;
    Ok(GridField::new(origin, spacing, shape, values)?)
}

fn require_axes(field: &GridField, expected: usize) -> Result<(), TransformError> {
    if field.dim() != expected {
        return Err(TransformError::AxisCount {
            expected,
            got: field.dim(),
        });
    }
    Ok(())
}

/// `H(y_1, y_2) = x_1 y_1 − u` with `u_{x_1}(x_1, y_2) = y_1`, for `u` on
/// axes `(x_1, x_2)`. `u_{x_1}` must be strictly monotone along every
/// `x_2`-slice.
pub fn legendre_1var(
    u: &GridField,
    target: Option<AxisLattice>,
    exec: Exec,
) -> Result<GridField, TransformError> {
    require_axes(u, 2)?;
    let h = u.spacing()[0];
    resample(u, target, exec, |line| legendre_line(line, h))
}

/// `u = y_1 H_{y_1} − H` resampled at `x_1 = H_{y_1}`; the same transform
/// as [`legendre_1var`], usually targeted at the original `x_1` lattice.
pub fn legendre_1var_inverse(
    h: &GridField,
    target: Option<AxisLattice>,
    exec: Exec,
) -> Result<GridField, TransformError> {
    legendre_1var(h, target, exec)
}

/// `w(y_0, y_a) = x_0` where `u(x_0, y_a) = y_0`, for `u` on axes
/// `(x_0, x_1, …)`. `u` must be strictly monotone in `x_0` on every column.
pub fn hodograph(
    u: &GridField,
    target: Option<AxisLattice>,
    exec: Exec,
) -> Result<GridField, TransformError> {
    if u.dim() < 2 {
        return Err(TransformError::AxisCount {
            expected: 2,
            got: u.dim(),
        });
    }
    resample(u, target, exec, hodograph_line)
}

/// `max |H_{y_2}² + y_1² − 1|` over interior nodes.
pub fn verify_linearized_ode(
    h: &GridField,
    window: Option<&Window>,
    exec: Exec,
) -> Result<InteriorMax, TransformError> {
    require_axes(h, 2)?;
    Ok(h.interior_max(window, exec, |i| {
        let y1 = h.coord_of(i)[0];
        let hy2 = h.central_diff(i, 1);
        (hy2 * hy2 + y1 * y1 - 1.0).abs()
    }))
}

fn spatial_square(field: &GridField, i: usize) -> f64 {
    (1..field.dim())
        .map(|a| field.central_diff(i, a).powi(2))
        .sum()
}

/// `max |v_{y_a} v_{y_a} − 2 v_{y_0}|` over interior nodes; axis 0 is `y_0`.
pub fn verify_hj(
    v: &GridField,
    window: Option<&Window>,
    exec: Exec,
) -> Result<InteriorMax, TransformError> {
    if v.dim() < 2 {
        return Err(TransformError::AxisCount {
            expected: 2,
            got: v.dim(),
        });
    }
    Ok(v.interior_max(window, exec, |i| {
        (spatial_square(v, i) - 2.0 * v.central_diff(i, 0)).abs()
    }))
}

/// `max |w_{y_a} w_{y_a} − 1|` over interior nodes, spatial axes only: the
/// equation satisfied by the hodograph image of a null solution.
pub fn verify_hodograph_image(
    w: &GridField,
    window: Option<&Window>,
    exec: Exec,
) -> Result<InteriorMax, TransformError> {
    if w.dim() < 2 {
        return Err(TransformError::AxisCount {
            expected: 2,
            got: w.dim(),
        });
    }
    Ok(w.interior_max(window, exec, |i| (spatial_square(w, i) - 1.0).abs()))
}

#[cfg(test)]
mod tests;
