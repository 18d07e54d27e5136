use super::*;
use proptest::prelude::*;

fn grid2(origin: [f64; 2], h: f64, shape: [usize; 2], f: impl Fn(&[f64]) -> f64) -> GridField {
    GridField::from_fn(origin.to_vec(), vec![h, h], shape.to_vec(), f).unwrap()
}

fn distance(x: &[f64]) -> f64 {
    (x[0] * x[0] + x[1] * x[1]).sqrt()
}

fn max_err(a: &GridField, f: impl Fn(&[f64]) -> f64, window: Option<&Window>) -> (f64, usize) {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for i in 0..a.len() {
        let x = a.coord_of(i);
        if a.values()[i].is_finite() && window.is_none_or(|w| w.contains(&x)) {
            worst = worst.max((a.values()[i] - f(&x)).abs());
            count += 1;
        }
    }
    (worst, count)
}

#[test]
fn self_dual_parabola() {
    let u = grid2([-1.0, 0.0], 0.05, [41, 3], |x| x[0] * x[0] / 2.0);
    let target = AxisLattice {
        origin: -0.9,
        spacing: 0.05,
        count: 37,
    };
    let h = legendre_1var(&u, Some(target), Exec::Sequential).unwrap();
    let (err, n) = max_err(&h, |y| y[0] * y[0] / 2.0, None);
    assert_eq!(n, 37 * 3);
    assert!(err < 1e-13, "{err}");
}

#[test]
fn distance_field_image() {
    let u = grid2([0.5, 1.0], 0.01, [151, 101], distance);
    let h = legendre_1var(&u, None, Exec::default()).unwrap();
    let (err, _) = max_err(&h, |y| -y[1] * (1.0 - y[0] * y[0]).sqrt(), None);
    assert!(err < 1e-6, "{err}");
    let ode = verify_linearized_ode(&h, None, Exec::default()).unwrap();
    assert!(ode.max < 1e-4 && ode.nodes > 0, "{ode:?}");
}

/// Window inside both the forward and the round-trip domains.
fn involution_window() -> Window {
    Window::new(vec![0.65, 1.04], vec![1.2, 1.16])
}

fn distance_grid(h: f64, len: [f64; 2]) -> GridField {
    let m = (len[0] / h).round() as usize + 1;
    let k = (len[1] / h).round() as usize + 1;
    grid2([0.5, 1.0], h, [m, k], distance)
}

fn ode_deviation(h: f64) -> f64 {
    let u = distance_grid(h, [1.5, 1.0]);
    let target = AxisLattice {
        origin: 0.45,
        spacing: 0.005,
        count: 41,
    };
    let img = legendre_1var(&u, Some(target), Exec::default()).unwrap();
    let w = Window::new(vec![0.45, 1.2], vec![0.65, 1.8]);
    verify_linearized_ode(&img, Some(&w), Exec::default())
        .unwrap()
        .max
}

fn involution_error(h: f64) -> f64 {
    let u = distance_grid(h, [1.0, 0.2]);
    let img = legendre_1var(&u, None, Exec::default()).unwrap();
    let back =
        legendre_1var_inverse(&img, Some(AxisLattice::of_axis0(&u)), Exec::default()).unwrap();
    max_err(&back, distance, Some(&involution_window())).0
}

#[test]
fn linearized_ode_converges_at_second_order() {
    let (a, b) = (ode_deviation(0.02), ode_deviation(0.01));
    assert!((3.5..=4.5).contains(&(a / b)), "{a} {b}");
}

#[test]
fn legendre_involution_converges() {
    let (a, b) = (involution_error(0.02), involution_error(0.01));
    assert!(a / b >= 3.5, "{a} {b}");
    assert!(b < 1e-6);
}

#[test]
fn non_solution_image_is_flagged() {
    let h = grid2([-0.5, 0.0], 0.1, [11, 5], |y| y[1]);
    let r = verify_linearized_ode(&h, None, Exec::Sequential).unwrap();
    assert!((r.max - 0.16).abs() < 1e-12, "{}", r.max);
}

#[test]
fn non_monotone_slice_is_named() {
    // u_{x_1} = cos x_1 turns over at π; every slice fails and the first
    // one is reported.
    let u = grid2([0.0, 0.0], 0.1, [41, 4], |x| x[0].sin() + x[1]);
    match legendre_1var(&u, None, Exec::Sequential) {
        Err(TransformError::NotMonotone { line: 0, index, .. }) => {
            assert!((30..=33).contains(&index), "{index}")
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn missing_nodes_stay_missing() {
    let mut u = grid2([0.5, 1.0], 0.05, [31, 5], distance);
    let idx = u.index(&[0, 3]);
    u.values_mut()[idx] = f64::NAN;
    let target = AxisLattice {
        origin: 0.42,
        spacing: 0.01,
        count: 20,
    };
    let h = legendre_1var(&u, Some(target), Exec::Sequential).unwrap();
    // Slice 3 lost its smallest x_1, so its smallest y_1 targets are missing.
    assert!(h.get(&[0, 3]).is_nan());
    assert!(h.get(&[0, 2]).is_finite());
    let back_target = AxisLattice {
        origin: 0.5,
        spacing: 0.05,
        count: 5,
    };
    let back = legendre_1var_inverse(&h, Some(back_target), Exec::Sequential).unwrap();
    assert!(back.get(&[0, 3]).is_nan());
    assert!((back.get(&[1, 0]) - distance(&[0.55, 1.0])).abs() < 1e-6);
}

#[test]
fn far_targets_are_an_error() {
    let u = grid2([0.5, 1.0], 0.05, [31, 11], distance);
    let target = AxisLattice {
        origin: 0.9,
        spacing: 0.01,
        count: 10,
    };
    assert!(matches!(
        legendre_1var(&u, Some(target), Exec::Sequential),
        Err(TransformError::MostlyMissing { .. })
    ));
}

#[test]
fn hodograph_of_plane_wave() {
    let u = GridField::from_fn(vec![0.0, -0.2, -1.0], vec![0.1; 3], vec![31, 5, 5], |x| {
        x[0] - x[1]
    })
    .unwrap();
    let target = AxisLattice {
        origin: 0.2,
        spacing: 0.1,
        count: 26,
    };
    let w = hodograph(&u, Some(target), Exec::default()).unwrap();
    let (err, n) = max_err(&w, |y| y[0] + y[1], None);
    assert_eq!(n, w.len());
    assert!(err < 1e-12, "{err}");
    assert!(
        verify_hodograph_image(&w, None, Exec::default())
            .unwrap()
            .max
            < 1e-10
    );

    let back_target = AxisLattice {
        origin: 0.4,
        spacing: 0.1,
        count: 21,
    };
    let back = hodograph(&w, Some(back_target), Exec::default()).unwrap();
    let (err, n) = max_err(&back, |x| x[0] - x[1], None);
    assert_eq!(n, back.len());
    assert!(err < 1e-10, "{err}");
}

fn cubic(s: f64) -> f64 {
    s + 0.1 * s * s * s
}

fn null_solution(x: &[f64]) -> f64 {
    cubic(x[0] - (x[1] * x[1] + x[2] * x[2]).sqrt())
}

fn hodograph_image_residual(h: f64) -> f64 {
    let n0 = (2.0 / h).round() as usize + 1;
    let n = (0.5 / h).round() as usize + 1;
    let u = GridField::from_fn(
        vec![2.0, 1.0, 1.0],
        vec![h; 3],
        vec![n0, n, n],
        null_solution,
    )
    .unwrap();
    let target = AxisLattice {
        origin: 0.8,
        spacing: 0.02,
        count: 21,
    };
    let w = hodograph(&u, Some(target), Exec::default()).unwrap();
    let win = Window::new(vec![0.8, 1.1, 1.1], vec![1.2, 1.4, 1.4]);
    verify_hodograph_image(&w, Some(&win), Exec::default())
        .unwrap()
        .max
}

#[test]
fn hodograph_of_nonlinear_null_solution_is_second_order() {
    let (a, b) = (
        hodograph_image_residual(0.05),
        hodograph_image_residual(0.025),
    );
    assert!((3.5..=4.5).contains(&(a / b)), "{a} {b}");
}

#[test]
fn hodograph_requires_monotone_columns() {
    let u = grid2([-1.0, 0.0], 0.1, [21, 3], |x| x[0] * x[0]);
    assert!(matches!(
        hodograph(&u, None, Exec::Sequential),
        Err(TransformError::NotMonotone { .. })
    ));
}

#[test]
fn hj_checker_examples() {
    let constant = grid2([0.0, 0.0], 0.1, [5, 5], |_| 3.0);
    assert_eq!(
        verify_hj(&constant, None, Exec::Sequential).unwrap().max,
        0.0
    );
    let v = grid2([0.0, 0.0], 0.1, [5, 5], |y| y[1] + y[0] / 2.0);
    assert!(verify_hj(&v, None, Exec::Sequential).unwrap().max < 1e-12);
    let bad = grid2([0.0, 0.0], 0.1, [5, 5], |y| y[1]);
    assert!((verify_hj(&bad, None, Exec::Sequential).unwrap().max - 1.0).abs() < 1e-12);
}

#[test]
fn contact_map_rank_validation() {
    assert!(ContactMap::new(ContactKind::LegendrePartial(0), 3).is_err());
    assert!(ContactMap::new(ContactKind::LegendrePartial(4), 3).is_err());
    assert!(ContactMap::new(ContactKind::LegendrePartial(3), 3).is_ok());
    assert!(ContactMap::new(ContactKind::LegendreSpace, 0).is_err());
}

#[test]
fn pointwise_distance_image() {
    let m = ContactMap::new(ContactKind::Legendre1Var, 1).unwrap();
    let x = [0.8, 1.3];
    let r = distance(&x);
    let img = m
        .apply(&JetPoint {
            x: x.to_vec(),
            u: r,
            grad: vec![x[0] / r, x[1] / r],
        })
        .unwrap();
    let y1 = img.x[0];
    assert!((img.u + img.x[1] * (1.0 - y1 * y1).sqrt()).abs() < 1e-15);
    assert!(m.image_residual(&img) < 1e-15);
}

proptest! {
    #[test]
    fn contact_maps_are_involutions_preserving_the_equation(
        x in prop::collection::vec(-2.0f64..2.0, 4),
        spatial in prop::collection::vec(-1.5f64..1.5, 3),
        u in -3.0f64..3.0,
        k in 1usize..=3,
    ) {
        // A unit timelike gradient: u_0 = √(1 + |u_a|²).
        let mut grad = vec![(1.0 + spatial.iter().map(|g| g * g).sum::<f64>()).sqrt()];
        grad.extend(&spatial);
        let pt = JetPoint { x: x.clone(), u, grad };
        for kind in [ContactKind::LegendreSpace, ContactKind::LegendrePartial(k)] {
            let m = ContactMap::new(kind, 3).unwrap();
            let img = m.apply(&pt).unwrap();
            prop_assert!(m.image_residual(&img) < 1e-12);
            let back = m.apply(&img).unwrap();
            for i in 0..4 {
                prop_assert!((back.x[i] - pt.x[i]).abs() < 1e-12);
                prop_assert!((back.grad[i] - pt.grad[i]).abs() < 1e-12);
            }
            prop_assert!((back.u - pt.u).abs() < 1e-12);
        }
    }
}
