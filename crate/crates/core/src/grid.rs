//! Sampled scalar fields on rectangular lattices.
//!
//! Storage is row-major (last axis fastest). Missing nodes hold `NaN`.
//!
//! Text format:
//! ```text
//! # grid d=2 origin=0,0 spacing=0.5,0.5 shape=3,3
//! 0.0,0.5,1.0
//! 0.5,nan,1.5
//! 1.0,1.5,2.0
//! ```
//! Other `#` lines are comments. Values are comma or whitespace separated,
//! one last-axis row per line when written.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::exec::{nan_max, Exec};

#[derive(Debug, thiserror::Error)]
pub enum GridError {
    #[error("grid needs at least one axis")]
    NoAxes,
    #[error("axis {axis} has {count} nodes, at least 3 required")]
    TooFewNodes { axis: usize, count: usize },
    #[error("axis {axis} spacing {spacing} is not strictly positive and finite")]
    BadSpacing { axis: usize, spacing: f64 },
    #[error("origin/spacing/shape lengths disagree")]
    AxisCount,
    #[error("value count {got} does not match shape product {expected}")]
    ValueCount { expected: usize, got: usize },
    #[error("grid geometries differ")]
    GeometryMismatch,
    #[error("grid file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Closed axis-aligned box of coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Window {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        Window { lower, upper }
    }

    /// Membership with a relative slack of `1e-9` of the box size, so
    /// lattice coordinates computed by accumulation still land inside.
    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().enumerate().all(|(a, &v)| {
            let slack = 1e-9 * (1.0 + (self.upper[a] - self.lower[a]).abs());
            v >= self.lower[a] - slack && v <= self.upper[a] + slack
        })
    }
}

/// Maximum of a pointwise defect over interior nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteriorMax {
    pub max: f64,
    /// Nodes whose full central-difference stencil was available.
    pub nodes: usize,
    /// Interior nodes skipped because a stencil value was missing.
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    origin: Vec<f64>,
    spacing: Vec<f64>,
    shape: Vec<usize>,
    values: Vec<f64>,
}

impl GridField {
    pub fn new(
        origin: Vec<f64>,
        spacing: Vec<f64>,
        shape: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self, GridError> {
        if shape.is_empty() {
            return Err(GridError::NoAxes);
        }
        if origin.len() != shape.len() || spacing.len() != shape.len() {
            return Err(GridError::AxisCount);
        }
        for (axis, (&count, &h)) in shape.iter().zip(&spacing).enumerate() {
            if count < 3 {
                return Err(GridError::TooFewNodes { axis, count });
            }
            if !(h > 0.0 && h.is_finite()) {
                return Err(GridError::BadSpacing { axis, spacing: h });
            }
        }
        let expected: usize = shape.iter().product();
        if values.len() != expected {
            return Err(GridError::ValueCount {
                expected,
                got: values.len(),
            });
        }
        Ok(GridField {
            origin,
            spacing,
            shape,
            values,
        })
    }

    /// Sample `f` at every node.
    pub fn from_fn(
        origin: Vec<f64>,
        spacing: Vec<f64>,
        shape: Vec<usize>,
        f: impl Fn(&[f64]) -> f64,
    ) -> Result<Self, GridError> {
        let len = shape.iter().product();
        let mut g = GridField::new(origin, spacing, shape, vec![0.0; len])?;
        for i in 0..len {
            g.values[i] = f(&g.coord_of(i));
        }
        Ok(g)
    }

    /// Same geometry, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self, GridError> {
        GridField::new(
            self.origin.clone(),
            self.spacing.clone(),
            self.shape.clone(),
            values,
        )
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.shape[axis + 1..].iter().product()
    }

    pub fn index(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.shape)
            .fold(0, |acc, (&i, &s)| acc * s + i)
    }

    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim()];
        for axis in (0..self.dim()).rev() {
            out[axis] = flat % self.shape[axis];
            flat /= self.shape[axis];
        }
        out
    }

    pub fn axis_coord(&self, axis: usize, i: usize) -> f64 {
        self.origin[axis] + i as f64 * self.spacing[axis]
    }

    pub fn coord(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter()
            .enumerate()
            .map(|(axis, &i)| self.axis_coord(axis, i))
            .collect()
    }

    pub fn coord_of(&self, flat: usize) -> Vec<f64> {
        self.coord(&self.unravel(flat))
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.values[self.index(idx)]
    }

    /// Not on any boundary face.
    pub fn is_interior(&self, idx: &[usize]) -> bool {
        idx.iter()
            .zip(&self.shape)
            .all(|(&i, &s)| i > 0 && i + 1 < s)
    }

    /// Second-order central difference along `axis` at an interior node.
    pub fn central_diff(&self, flat: usize, axis: usize) -> f64 {
        let s = self.stride(axis);
        (self.values[flat + s] - self.values[flat - s]) / (2.0 * self.spacing[axis])
    }

    /// Central-difference gradient at an interior node.
    pub fn gradient(&self, flat: usize) -> Vec<f64> {
        (0..self.dim())
            .map(|a| self.central_diff(flat, a))
            .collect()
    }

    /// Flat indices of all interior nodes.
    pub fn interior_indices(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.is_interior(&self.unravel(i)))
            .collect()
    }

    /// Node and all axis neighbours finite.
    pub fn has_full_stencil(&self, flat: usize) -> bool {
        self.values[flat].is_finite()
            && (0..self.dim()).all(|a| {
                let s = self.stride(a);
                self.values[flat - s].is_finite() && self.values[flat + s].is_finite()
            })
    }

    /// Max of `defect(flat)` over interior nodes inside `window` with a full
    /// stencil.
    pub fn interior_max<F>(&self, window: Option<&Window>, exec: Exec, defect: F) -> InteriorMax
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        let nodes: Vec<usize> = self
            .interior_indices()
            .into_iter()
            .filter(|&i| window.is_none_or(|w| w.contains(&self.coord_of(i))))
            .collect();
        let per_node = exec.map(&nodes, |&i| self.has_full_stencil(i).then(|| defect(i)));
        let mut out = InteriorMax {
            max: 0.0,
            nodes: 0,
            skipped: 0,
        };
        for r in per_node {
            match r {
                Some(v) => {
                    out.max = nan_max(out.max, v);
                    out.nodes += 1;
                }
                None => out.skipped += 1,
            }
        }
        out
    }

    pub fn same_geometry(&self, other: &GridField) -> bool {
        let close = |a: &[f64], b: &[f64]| {
            a.iter()
                .zip(b)
                .all(|(x, y)| (x - y).abs() <= 1e-12 * (1.0 + x.abs().max(y.abs())))
        };
        self.shape == other.shape
            && close(&self.origin, &other.origin)
            && close(&self.spacing, &other.spacing)
    }

    pub fn header(&self) -> String {
        let join = |v: &[f64]| {
            v.iter()
                .map(|x| fmt_value(*x))
                .collect::<Vec<_>>()
                .join(",")
        };
        format!(
            "# grid d={} origin={} spacing={} shape={}",
            self.dim(),
            join(&self.origin),
            join(&self.spacing),
            self.shape
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>()
                .join(",")
        )
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<(), GridError> {
        writeln!(w, "{}", self.header())?;
        let row = *self.shape.last().unwrap();
        let mut line = String::new();
        for chunk in self.values.chunks(row) {
            line.clear();
            for (i, v) in chunk.iter().enumerate() {
                if i > 0 {
                    line.push(',');
                }
                let _ = write!(line, "{}", fmt_value(*v));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn read_from(r: impl BufRead) -> Result<Self, GridError> {
        let mut header: Option<(Vec<f64>, Vec<f64>, Vec<usize>)> = None;
        let mut values = Vec::new();
        for line in r.lines() {
            let line = line?;
            let t = line.trim();
            if let Some(rest) = t.strip_prefix("# grid") {
                if header.is_some() {
                    return Err(GridError::Format("duplicate grid header".into()));
                }
                header = Some(parse_header(rest)?);
                continue;
            }
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            if header.is_none() {
                return Err(GridError::Format("values before grid header".into()));
            }
            for tok in t
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
            {
                values.push(parse_value(tok)?);
            }
        }
        let (origin, spacing, shape) =
            header.ok_or_else(|| GridError::Format("missing grid header".into()))?;
        GridField::new(origin, spacing, shape, values)
    }
}

fn fmt_value(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:?}")
    }
}

fn parse_value(tok: &str) -> Result<f64, GridError> {
    if tok.eq_ignore_ascii_case("nan") {
        return Ok(f64::NAN);
    }
    tok.parse::<f64>()
        .map_err(|_| GridError::Format(format!("bad value {tok:?}")))
}

fn parse_header(rest: &str) -> Result<(Vec<f64>, Vec<f64>, Vec<usize>), GridError> {
    let mut d = None;
    let mut origin = None;
    let mut spacing = None;
    let mut shape = None;
    let floats =
        |s: &str| -> Result<Vec<f64>, GridError> { s.split(',').map(parse_value).collect() };
    for field in rest.split_whitespace() {
        let (key, val) = field
            .split_once('=')
            .ok_or_else(|| GridError::Format(format!("bad header field {field:?}")))?;
        match key {
            "d" => {
                d = Some(
                    val.parse::<usize>()
                        .map_err(|_| GridError::Format("bad d".into()))?,
                )
            }
            "origin" => origin = Some(floats(val)?),
            "spacing" => spacing = Some(floats(val)?),
            "shape" => {
                shape = Some(
                    val.split(',')
                        .map(|s| s.parse::<usize>())
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|_| GridError::Format("bad shape".into()))?,
                )
            }
            other => return Err(GridError::Format(format!("unknown header key {other:?}"))),
        }
    }
    let missing = |k: &str| GridError::Format(format!("header missing {k}"));
    let (origin, spacing, shape) = (
        origin.ok_or_else(|| missing("origin"))?,
        spacing.ok_or_else(|| missing("spacing"))?,
        shape.ok_or_else(|| missing("shape"))?,
    );
    if d.ok_or_else(|| missing("d"))? != shape.len() {
        return Err(GridError::Format("d does not match shape".into()));
    }
    Ok((origin, spacing, shape))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_bad_geometry() {
        assert!(matches!(
            GridField::new(vec![0.0], vec![1.0], vec![2], vec![0.0; 2]),
            Err(GridError::TooFewNodes { .. })
        ));
        assert!(matches!(
            GridField::new(vec![0.0], vec![0.0], vec![3], vec![0.0; 3]),
            Err(GridError::BadSpacing { .. })
        ));
        assert!(matches!(
            GridField::new(vec![0.0], vec![1.0], vec![3], vec![0.0; 4]),
            Err(GridError::ValueCount { .. })
        ));
    }

    #[test]
    fn index_layout_is_row_major() {
        let g = GridField::from_fn(vec![0.0, 0.0], vec![1.0, 0.5], vec![3, 4], |x| {
            10.0 * x[0] + x[1]
        })
        .unwrap();
        assert_eq!(g.index(&[1, 2]), 6);
        assert_eq!(g.unravel(6), vec![1, 2]);
        assert_eq!(g.values()[6], 11.0);
        assert_eq!(g.central_diff(6, 0), 10.0);
        assert_eq!(g.central_diff(6, 1), 1.0);
    }

    #[test]
    fn missing_header_is_an_error() {
        assert!(GridField::read_from("1,2,3\n".as_bytes()).is_err());
        assert!(
            GridField::read_from("# grid d=1 origin=0 spacing=1 shape=3\n1,2\n".as_bytes())
                .is_err()
        );
    }

    proptest! {
        #[test]
        fn text_round_trip(vals in prop::collection::vec(prop_oneof![
                4 => -1e6f64..1e6,
                1 => Just(f64::NAN),
            ], 12),
            h in 1e-3f64..10.0, o in -5.0f64..5.0) {
            let g = GridField::new(vec![o, -o], vec![h, 2.0 * h], vec![3, 4], vals).unwrap();
            let mut buf = Vec::new();
            g.write_to(&mut buf).unwrap();
            let back = GridField::read_from(&buf[..]).unwrap();
            prop_assert!(back.same_geometry(&g));
            for (a, b) in back.values().iter().zip(g.values()) {
                prop_assert!(a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()));
            }
        }
    }
}
