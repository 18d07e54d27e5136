use std::collections::BTreeMap;
use std::path::Path;

use eikonal_core::fmm::{compare, convergence_order, solve_fmm, FmmProblem};
use eikonal_core::solutions::{Branch, EnvelopeOptions, Euclid2Solution};
use eikonal_core::{Exec, GridField, Poly};
use serde_json::json;

use crate::run::{emit_json, num, read_input, CliError, RunInfo};
use crate::spec::{parse_json, FmmSpec, Numeric, Reference};

fn check(spec: &FmmSpec) -> Result<(), CliError> {
    let bad = |m: &str| Err(CliError::Input(m.into()));
    if spec.resolutions.len() < 2 || spec.resolutions.iter().any(|&m| m < 3) {
        return bad("need at least two resolutions of 3 or more nodes");
    }
    if spec.sources.is_empty() {
        return bad("need at least one source");
    }
    if (0..2).any(|a| !(spec.lower[a] < spec.upper[a])) {
        return bad("lower must be below upper on both axes");
    }
    if spec.reference == Reference::Envelope && spec.sources.len() != 1 {
        return bad("the envelope reference needs exactly one source");
    }
    if !(spec.source_radius >= 0.0) {
        return bad("source_radius must be non-negative");
    }
    Ok(())
}

/// Union of point sources; a node claimed twice keeps the smaller value.
fn problem(spec: &FmmSpec, m: usize) -> Result<FmmProblem, CliError> {
    let spacing: Vec<f64> = (0..2)
        .map(|a| (spec.upper[a] - spec.lower[a]) / (m - 1) as f64)
        .collect();
    let origin = spec.lower.to_vec();
    let shape = vec![m, m];
    let mut nodes: BTreeMap<usize, f64> = BTreeMap::new();
    for s in &spec.sources {
        let p = FmmProblem::point_source(
            origin.clone(),
            spacing.clone(),
            shape.clone(),
            s,
            spec.source_radius,
        )
        .map_err(CliError::input)?;
        for &(i, v) in p.sources() {
            nodes.entry(i).and_modify(|x| *x = x.min(v)).or_insert(v);
        }
    }
    FmmProblem::new(origin, spacing, shape, nodes.into_iter().collect()).map_err(CliError::input)
}

pub fn run(
    spec_path: Option<&Path>,
    out: Option<&Path>,
    seed: u64,
    tol: Option<f64>,
) -> Result<(), CliError> {
    let spec: FmmSpec = match spec_path {
        Some(p) => parse_json(&read_input(p)?, "fmm spec")?,
        None => FmmSpec::default(),
    };
    check(&spec)?;
    let config = json!({"command": "fmm-compare", "spec": spec, "seed": seed, "tol": tol});
    let info = RunInfo::new("fmm-compare", &config, seed);

    let envelope = Euclid2Solution::new(Poly::zero(1)).map_err(CliError::input)?;
    let opts = EnvelopeOptions::euclid2().with_seed(seed);
    let source = spec.sources[0];
    let reference = |y: &[f64]| -> f64 {
        match spec.reference {
            Reference::Distance => spec
                .sources
                .iter()
                .map(|s| ((y[0] - s[0]).powi(2) + (y[1] - s[1]).powi(2)).sqrt())
                .fold(f64::INFINITY, f64::min),
            Reference::Envelope => {
                let rel = [y[0] - source[0], y[1] - source[1]];
                if rel[1] <= 0.0 {
                    return f64::NAN;
                }
                envelope
                    .solve(&rel, &opts)
                    .ok()
                    .and_then(|r| Branch::MaxU.select(&r).first().map(|r| r.u))
                    .unwrap_or(f64::NAN)
            }
        }
    };

    let exec = Exec::default();
    let mut levels = Vec::new();
    for &m in &spec.resolutions {
        let p = problem(&spec, m)?;
        let numeric = match spec.numeric {
            Numeric::Fmm => solve_fmm(&p),
            Numeric::Reference => {
                let g = p.geometry();
                GridField::from_fn(
                    g.origin().to_vec(),
                    g.spacing().to_vec(),
                    g.shape().to_vec(),
                    reference,
                )
                .map_err(CliError::input)?
            }
        };
        let norms = compare(&numeric, reference, exec);
        levels.push((m, p.geometry().spacing()[0], norms));
    }
    let k = levels.len();
    let (coarse, fine) = (levels[k - 2].2.linf, levels[k - 1].2.linf);
    let order = convergence_order(coarse, fine);

    let mut report = info.json();
    report["linf"] = num(fine);
    report["l2"] = num(levels[k - 1].2.l2);
    report["order"] = num(order);
    report["levels"] = json!(levels
        .iter()
        .map(|(m, h, e)| json!({"nodes_per_axis": m, "h": h, "linf": num(e.linf), "l2": num(e.l2), "compared": e.nodes}))
        .collect::<Vec<_>>());
    emit_json(out, &report)?;
    eprintln!("linf {fine:e} l2 {:e} order {order:.3}", levels[k - 1].2.l2);
    match tol {
        Some(t) if !(fine <= t) => Err(CliError::Failed(format!("linf {fine:e} exceeds {t:e}"))),
        _ => Ok(()),
    }
}
