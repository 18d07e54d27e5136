//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::time::Instant;

use eikonal_core::algebra::Poly;
use eikonal_core::fmm::{compare, convergence_order, solve_fmm, FmmProblem};
use eikonal_core::grid::{GridField, Window};
use eikonal_core::solutions::{
    analytic_residual, fd_residual, poly_residual, Branch, EnvelopeOptions, Euclid2Solution,
    ParametricSolution, Signature, Solution,
};
use eikonal_core::symmetry::{
    conformal_catalog, flow_jets, is_symmetry, negative_controls, null_family_random,
    sampled_symmetry_check, EikonalProblem, FlowOptions, JetPoint, Verdict,
};
use eikonal_core::transforms::{
    hodograph, legendre_1var, legendre_1var_inverse, verify_hodograph_image, verify_linearized_ode,
    AxisLattice,
};
use eikonal_core::{Exec, VarNames};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn params(k: usize, s: &str) -> Poly {
    Poly::parse(s, &VarNames::params(k)).expect("parameter polynomial")
}

fn criterion_1() -> Outcome {
    let mut failures = Vec::new();
    let mut n3_time = 0.0;
    for n in 2..=4 {
        let pr = EikonalProblem::new(n, 1).unwrap();
        let start = Instant::now();
        for op in conformal_catalog(n) {
            match is_symmetry(&op.field, &pr) {
                Ok(Verdict::Symmetry { .. }) => {}
                other => failures.push(format!("n={n} {}: {other:?}", op.name)),
            }
        }
        if n == 3 {
            n3_time = start.elapsed().as_secs_f64();
        }
    }
    let pr = EikonalProblem::new(3, 1).unwrap();
    let mut named = Vec::new();
    for op in negative_controls(3) {
        match is_symmetry(&op.field, &pr) {
            Ok(Verdict::NotSymmetry(v)) => {
                named.push(format!("{} fails at {}", op.name, v.component))
            }
            other => failures.push(format!("control {} accepted: {other:?}", op.name)),
        }
    }
    let ops = conformal_catalog(3).len();
    outcome(
        failures.is_empty() && n3_time < 5.0,
        format!(
            "{ops} operators for n=3 in {n3_time:.3}s, n=2..4 all exact; {}{}",
            named.join(", "),
            if failures.is_empty() {
                String::new()
            } else {
                format!("; failures: {failures:?}")
            }
        ),
    )
}

fn criterion_2() -> Outcome {
    let pr = EikonalProblem::new(3, 0).unwrap();
    let ops = null_family_random(3, 3, 20, 2024);
    let mut exact = 0;
    let mut worst: f64 = 0.0;
    for (i, op) in ops.iter().enumerate() {
        if is_symmetry(&op.field, &pr).unwrap().is_symmetry() {
            exact += 1;
        }
        let r = sampled_symmetry_check(&op.field.compile(), &pr, 10_000, i as u64, Exec::default())
            .unwrap();
        worst = worst.max(r);
    }
    outcome(
        exact == 20 && worst <= 1e-12,
        format!("{exact}/20 exact, max sampled residual {worst:.2e} over 10^4 samples each"),
    )
}

fn criterion_3() -> Outcome {
    let pr = EikonalProblem::new(3, 0).unwrap();
    let f = Poly::parse(
        "2*(x0 - x1)^3 - 3*(x0 - x1)^2 + (x0 - x1) + 7",
        &pr.base_names(),
    )
    .unwrap();
    let residual = poly_residual(&f, &pr).unwrap();
    outcome(
        residual.is_zero(),
        format!("residual of f(x0 - x1) is {residual}"),
    )
}

fn criterion_4() -> Outcome {
    let s = ParametricSolution::new(3, Poly::zero(3), vec![]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let points: Vec<Vec<f64>> = (0..100)
        .map(|_| {
            let xs: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
            let r = xs.iter().map(|v| v * v).sum::<f64>().sqrt();
            let mut x = vec![r + 0.1 + rng.random_range(0.0..3.0)];
            x.extend(xs);
            x
        })
        .collect();
    let start = Instant::now();
    let opts = EnvelopeOptions::default();
    let results = Exec::default().map(&points, |x| s.solve_envelope(x, &opts));
    let elapsed = start.elapsed().as_secs_f64();
    let (mut du, mut dt) = (0.0f64, 0.0f64);
    let mut bad = 0;
    for (x, r) in points.iter().zip(results) {
        match r.as_deref() {
            Ok([root]) => {
                let interval = (x[0] * x[0] - x[1..].iter().map(|v| v * v).sum::<f64>()).sqrt();
                du = du.max((root.u - interval).abs());
                for a in 0..3 {
                    dt = dt.max((root.tau[a] - x[a + 1] / interval).abs());
                }
            }
            _ => bad += 1,
        }
    }
    outcome(
        bad == 0 && du <= 1e-10 && dt <= 1e-10 && elapsed < 1.0,
        format!(
            "max |u - sqrt(x.x)| {du:.2e}, max tau error {dt:.2e}, {bad} bad points, {elapsed:.3}s"
        ),
    )
}

fn richardson_patch(s: &Euclid2Solution, h: f64, m: usize, window: &Window) -> f64 {
    let solution = Solution::Euclid2(s.clone());
    let half = (m - 1) as f64 * h / 2.0;
    let field = eikonal_core::solutions::solution_field(
        &solution,
        &[30.0 - half, 40.0 - half],
        &[h, h],
        &[m, m],
        Branch::MaxU,
        &EnvelopeOptions::euclid2(),
        Exec::default(),
    )
    .unwrap();
    fd_residual(
        &field,
        Signature::Euclidean,
        1.0,
        Some(window),
        Exec::default(),
    )
    .max
}

fn criterion_5() -> Outcome {
    let opts = EnvelopeOptions::euclid2();
    let dist = Euclid2Solution::new(Poly::zero(1)).unwrap();
    let r = dist.solve(&[3.0, 4.0], &opts).unwrap();
    let first = r.len() == 1 && (r[0].tau[0] - 0.6).abs() <= 1e-12 && (r[0].u - 5.0).abs() <= 1e-12;

    let shifted = Euclid2Solution::new(params(1, "t1")).unwrap();
    let r = shifted.solve(&[3.0, 4.0], &opts).unwrap();
    let second = r.len() == 1
        && (r[0].tau[0] - 0.5f64.sqrt()).abs() <= 1e-10
        && (r[0].u - 4.0 * 2f64.sqrt()).abs() <= 1e-10;

    // 101² patch centred at (30, 40) against the 201² patch at h/2.
    let window = Window::new(vec![29.02, 39.02], vec![30.98, 40.98]);
    let coarse = richardson_patch(&shifted, 0.02, 101, &window);
    let fine = richardson_patch(&shifted, 0.01, 201, &window);
    let ratio = coarse / fine;
    outcome(
        first && second && coarse <= 1e-6 && (3.5..=4.5).contains(&ratio),
        format!(
            "(3,4) exact: {first}; psi = tau root exact: {second}; FD residual {coarse:.2e} at h=0.02, ratio {ratio:.3}"
        ),
    )
}

fn criterion_6() -> Outcome {
    let s = ParametricSolution::new(3, params(1, "t1^2"), vec![params(1, "t1"), Poly::zero(1)])
        .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let opts = EnvelopeOptions::default();
    let (mut converged, mut worst) = (0, 0.0f64);
    let mut tries = 0;
    while converged < 100 && tries < 10_000 {
        tries += 1;
        let x: Vec<f64> = (0..4).map(|_| rng.random_range(-3.0..3.0)).collect();
        if let Ok(roots) = s.solve_envelope(&x, &opts) {
            if !roots.is_empty() {
                converged += 1;
                worst = worst.max(analytic_residual(&roots, Signature::Minkowski, 1.0));
            }
        }
    }
    let nested =
        ParametricSolution::new(3, params(1, "t1^2"), vec![Poly::zero(1), Poly::zero(1)]).unwrap();
    let pure = ParametricSolution::new(1, params(1, "t1^2"), vec![]).unwrap();
    let mut nest_err = 0.0f64;
    let mut compared = 0;
    for _ in 0..100 {
        let x: Vec<f64> = (0..4).map(|_| rng.random_range(-3.0..3.0)).collect();
        let a = nested.solve_envelope(&x, &opts).unwrap();
        let b = pure.solve_envelope(&x[..2], &opts).unwrap();
        if a.len() != b.len() {
            nest_err = f64::INFINITY;
        }
        for (ra, rb) in a.iter().zip(&b) {
            nest_err = nest_err.max((ra.u - rb.u).abs());
            compared += 1;
        }
    }
    outcome(
        converged == 100 && worst <= 1e-12 && nest_err <= 1e-12,
        format!(
            "{converged} converged points, max residual {worst:.2e}; w = 0 nesting max diff {nest_err:.2e} over {compared} roots"
        ),
    )
}

fn distance(x: &[f64]) -> f64 {
    (x[0] * x[0] + x[1] * x[1]).sqrt()
}

fn distance_grid(h: f64, len: [f64; 2]) -> GridField {
    let shape = vec![
        (len[0] / h).round() as usize + 1,
        (len[1] / h).round() as usize + 1,
    ];
    GridField::from_fn(vec![0.5, 1.0], vec![h, h], shape, distance).unwrap()
}

fn criterion_7() -> Outcome {
    let ode = |h: f64| {
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
    };
    let involution = |h: f64| {
        let u = distance_grid(h, [1.0, 0.2]);
        let img = legendre_1var(&u, None, Exec::default()).unwrap();
        let back =
            legendre_1var_inverse(&img, Some(AxisLattice::of_axis0(&u)), Exec::default()).unwrap();
        let w = Window::new(vec![0.65, 1.04], vec![1.2, 1.16]);
        (0..back.len())
            .filter(|&i| back.values()[i].is_finite() && w.contains(&back.coord_of(i)))
            .map(|i| (back.values()[i] - distance(&back.coord_of(i))).abs())
            .fold(0.0, f64::max)
    };
    let (o1, o2) = (ode(0.02), ode(0.01));
    let (i1, i2) = (involution(0.02), involution(0.01));
    let (ode_ratio, inv_ratio) = (o1 / o2, i1 / i2);
    outcome(
        (3.5..=4.5).contains(&ode_ratio) && inv_ratio >= 3.5,
        format!(
            "ODE deviation {o1:.2e} -> {o2:.2e} (ratio {ode_ratio:.3}); double transform {i1:.2e} -> {i2:.2e} (ratio {inv_ratio:.3}, at least second order)"
        ),
    )
}

fn criterion_8() -> Outcome {
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
    let back_target = AxisLattice {
        origin: 0.4,
        spacing: 0.1,
        count: 21,
    };
    let back = hodograph(&w, Some(back_target), Exec::default()).unwrap();
    let round_trip = (0..back.len())
        .map(|i| {
            let x = back.coord_of(i);
            (back.values()[i] - (x[0] - x[1])).abs()
        })
        .fold(0.0, f64::max);
    let linear_image = verify_hodograph_image(&w, None, Exec::default())
        .unwrap()
        .max;

    let nonlinear = |h: f64| {
        let n0 = (2.0 / h).round() as usize + 1;
        let n = (0.5 / h).round() as usize + 1;
        let u = GridField::from_fn(vec![2.0, 1.0, 1.0], vec![h; 3], vec![n0, n, n], |x| {
            let s = x[0] - (x[1] * x[1] + x[2] * x[2]).sqrt();
            s + 0.1 * s * s * s
        })
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
    };
    let (a, b) = (nonlinear(0.05), nonlinear(0.025));
    let ratio = a / b;
    outcome(
        round_trip <= 1e-10 && linear_image <= 1e-10 && (3.5..=4.5).contains(&ratio),
        format!(
            "plane-wave round trip {round_trip:.2e}, linear image residual {linear_image:.2e}; nonlinear image {a:.2e} -> {b:.2e} (ratio {ratio:.3})"
        ),
    )
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let dist = Euclid2Solution::new(Poly::zero(1)).unwrap();
    let opts = EnvelopeOptions::euclid2();
    // The Ψ = 0 envelope is the distance on y_2 > 0.
    let analytic = |y: &[f64]| {
        if y[1] <= 0.0 {
            return f64::NAN;
        }
        match dist.solve(y, &opts) {
            Ok(roots) => Branch::MaxU
                .select(&roots)
                .first()
                .map_or(f64::NAN, |r| r.u),
            Err(_) => f64::NAN,
        }
    };
    let run = |m: usize, radius: f64| {
        let h = 2.0 / (m - 1) as f64;
        let p = FmmProblem::point_source(
            vec![-1.0, -1.0],
            vec![h, h],
            vec![m, m],
            &[0.0, 0.0],
            radius,
        )
        .unwrap();
        compare(&solve_fmm(&p), analytic, Exec::default())
    };
    let (a, b) = (run(65, 0.1), run(129, 0.1));
    let order = convergence_order(a.linf, b.linf);
    let elapsed = start.elapsed().as_secs_f64();
    let single = convergence_order(run(65, 0.0).linf, run(129, 0.0).linf);
    outcome(
        b.linf < a.linf && (0.8..=1.2).contains(&order) && elapsed < 10.0,
        format!(
            "Linf {:.3e} -> {:.3e}, order {order:.3} ({} nodes compared), {elapsed:.2}s; single-node source order {single:.3}",
            a.linf, b.linf, b.nodes
        ),
    )
}

fn criterion_10() -> Outcome {
    let n = 3;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let jets: Vec<JetPoint> = (0..50)
        .map(|_| {
            let xs: Vec<f64> = (0..n).map(|_| rng.random_range(-0.5..0.5)).collect();
            let r = xs.iter().map(|v| v * v).sum::<f64>().sqrt();
            let mut x = vec![r + rng.random_range(0.5..1.5)];
            x.extend(&xs);
            let u = (x[0] * x[0] - r * r).sqrt();
            let grad = x
                .iter()
                .enumerate()
                .map(|(i, v)| if i == 0 { v / u } else { -v / u })
                .collect();
            JetPoint { x, u, grad }
        })
        .collect();
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for op in conformal_catalog(n) {
        match flow_jets(
            &op.field.compile(),
            0.1,
            &jets,
            1e-4,
            &FlowOptions::default(),
            Exec::default(),
        ) {
            Ok(out) => {
                for j in out {
                    let sq = j.grad[0] * j.grad[0] - j.grad[1..].iter().map(|g| g * g).sum::<f64>();
                    worst = worst.max((sq - 1.0).abs());
                }
            }
            Err(e) => failures.push(format!("{}: {e}", op.name)),
        }
    }
    outcome(
        failures.is_empty() && worst <= 1e-6,
        format!(
            "max |u_mu u_mu - 1| after transport {worst:.2e}{}",
            if failures.is_empty() {
                String::new()
            } else {
                format!("; {failures:?}")
            }
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("symmetry catalog", criterion_1),
        ("u-dependent family on the null equation", criterion_2),
        ("function of a null solution", criterion_3),
        ("radial correspondence", criterion_4),
        ("two-dimensional general solution", criterion_5),
        ("rank-k solutions", criterion_6),
        ("Legendre transform", criterion_7),
        ("hodograph transform", criterion_8),
        ("fast marching oracle", criterion_9),
        ("flow consistency", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {}: {name}: {}",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
