//! One-dimensional cubic Hermite interpolation.

/// Cubic Hermite on `[x0, x1]` with end values `y` and slopes `d`.
pub fn hermite(x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0
        + (t3 - 2.0 * t2 + t) * h * d0
        + (-2.0 * t3 + 3.0 * t2) * y1
        + (t3 - t2) * h * d1
}

/// Index `i` with `xs[i] ≤ x ≤ xs[i + 1]`, if `x` lies inside the data.
pub fn locate(xs: &[f64], x: f64) -> Option<usize> {
    let (first, last) = (*xs.first()?, *xs.last()?);
    if xs.len() < 2 || !(x >= first && x <= last) {
        return None;
    }
    Some(
        xs.partition_point(|&v| v <= x)
            .saturating_sub(1)
            .min(xs.len() - 2),
    )
}

/// Second-order three-point slopes on a nonuniform strictly increasing
/// abscissa (one-sided at the ends).
pub fn three_point_slopes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    let del: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
    if n == 2 {
        return vec![del[0]; 2];
    }
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        d[i] = (h[i - 1] * del[i] + h[i] * del[i - 1]) / (h[i - 1] + h[i]);
    }
    d[0] = ((2.0 * h[0] + h[1]) * del[0] - h[0] * del[1]) / (h[0] + h[1]);
    let m = n - 2;
    d[n - 1] = ((2.0 * h[m] + h[m - 1]) * del[m] - h[m] * del[m - 1]) / (h[m] + h[m - 1]);
    d
}

/// Monotone piecewise cubic through monotone data: three-point slopes
/// limited by the Fritsch–Carlson conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    ds: Vec<f64>,
}

impl MonotoneCubic {
    /// `None` unless `xs` is strictly increasing, `ys` is monotone and there
    /// are at least two points.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Option<Self> {
        if xs.len() < 2 || xs.len() != ys.len() || xs.windows(2).any(|w| !(w[1] > w[0])) {
            return None;
        }
        let up = ys.windows(2).all(|w| w[1] >= w[0]);
        let down = ys.windows(2).all(|w| w[1] <= w[0]);
        if !(up || down) {
            return None;
        }
        let mut ds = three_point_slopes(&xs, &ys);
        for i in 0..xs.len() - 1 {
            let del = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
            if del == 0.0 {
                ds[i] = 0.0;
                ds[i + 1] = 0.0;
                continue;
            }
            for j in [i, i + 1] {
                if ds[j] * del < 0.0 {
                    ds[j] = 0.0;
                }
            }
            let (a, b) = (ds[i] / del, ds[i + 1] / del);
            let r = a * a + b * b;
            if r > 9.0 {
                let t = 3.0 / r.sqrt();
                ds[i] = t * a * del;
                ds[i + 1] = t * b * del;
            }
        }
        Some(MonotoneCubic { xs, ys, ds })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().unwrap())
    }

    /// `None` outside the data range; no extrapolation.
    pub fn eval(&self, x: f64) -> Option<f64> {
        let i = locate(&self.xs, x)?;
        Some(hermite(
            self.xs[i],
            self.xs[i + 1],
            self.ys[i],
            self.ys[i + 1],
            self.ds[i],
            self.ds[i + 1],
            x,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn linear_data_is_reproduced() {
        let xs = vec![0.0, 0.3, 1.0, 1.2];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x - 1.0).collect();
        let m = MonotoneCubic::new(xs, ys).unwrap();
        for x in [0.0, 0.1, 0.65, 1.2] {
            assert!((m.eval(x).unwrap() - (2.0 * x - 1.0)).abs() < 1e-15);
        }
        assert_eq!(m.eval(1.3), None);
        assert_eq!(m.eval(f64::NAN), None);
    }

    #[test]
    fn smooth_data_converges_fast() {
        let err = |n: usize| {
            let xs: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
            let ys: Vec<f64> = xs.iter().map(|x| x.exp()).collect();
            let m = MonotoneCubic::new(xs, ys).unwrap();
            (0..1000)
                .map(|i| {
                    let x = i as f64 / 999.0;
                    (m.eval(x).unwrap() - x.exp()).abs()
                })
                .fold(0.0, f64::max)
        };
        assert!(err(21) / err(41) > 7.0);
    }

    #[test]
    fn rejects_unsorted_or_nonmonotone() {
        assert!(MonotoneCubic::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_none());
        assert!(MonotoneCubic::new(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 0.5]).is_none());
        assert!(MonotoneCubic::new(vec![0.0], vec![0.0]).is_none());
    }

    proptest! {
        #[test]
        fn interpolant_stays_monotone(steps in prop::collection::vec(0.0f64..3.0, 2..12), dx in prop::collection::vec(0.1f64..1.0, 12)) {
            let mut xs = vec![0.0];
            let mut ys = vec![0.0];
            for (i, s) in steps.iter().enumerate() {
                xs.push(xs[i] + dx[i]);
                ys.push(ys[i] + s);
            }
            let m = MonotoneCubic::new(xs.clone(), ys).unwrap();
            let (a, b) = m.domain();
            let mut prev = f64::NEG_INFINITY;
            for i in 0..=400 {
                let v = m.eval((a + (b - a) * i as f64 / 400.0).min(b)).unwrap();
                prop_assert!(v >= prev - 1e-12);
                prev = v;
            }
        }
    }
}
