use std::io::BufReader;
use std::path::Path;

use clap::ValueEnum;
use eikonal_core::solutions::{fd_residual, Signature};
use eikonal_core::transforms::{
    hodograph, legendre_1var, legendre_1var_inverse, verify_hodograph_image, verify_linearized_ode,
    AxisLattice, TransformError,
};
use eikonal_core::{Exec, GridField};
use serde_json::json;

use crate::run::{read_input, sha256_hex, write_atomic, CliError, RunInfo};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    /// `H(y1, y2) = x1 y1 − u`, `y1 = u_{x1}`; prints the linearized-ODE deviation.
    Legendre,
    /// Back from `H` to `u` on the `x1` lattice; prints `max |u_1² + u_2² − 1|`.
    LegendreInverse,
    /// `w(y0, y_a) = x0` where `u(x0, y_a) = y0`; prints `max |w_{y_a} w_{y_a} − 1|`.
    Hodograph,
}

impl Kind {
    fn name(self) -> &'static str {
        match self {
            Kind::Legendre => "legendre",
            Kind::LegendreInverse => "legendre-inverse",
            Kind::Hodograph => "hodograph",
        }
    }
}

/// `origin,spacing,count` for the resampled axis.
pub fn parse_lattice(s: &str) -> Result<AxisLattice, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [o, h, n] = parts[..] else {
        return Err(format!("expected origin,spacing,count, got {s:?}"));
    };
    let f = |t: &str| t.parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    Ok(AxisLattice {
        origin: f(o)?,
        spacing: f(h)?,
        count: n.parse().map_err(|e| format!("{n:?}: {e}"))?,
    })
}

fn classify(e: TransformError) -> CliError {
    match e {
        TransformError::NotMonotone { .. }
        | TransformError::MostlyMissing { .. }
        | TransformError::EmptyRange => CliError::Failed(e.to_string()),
        other => CliError::input(other),
    }
}

pub fn run(
    kind: Kind,
    input: &Path,
    out: &Path,
    target: Option<AxisLattice>,
    seed: u64,
    tol: Option<f64>,
) -> Result<(), CliError> {
    let text = read_input(input)?;
    let field = GridField::read_from(BufReader::new(text.as_bytes()))
        .map_err(|e| CliError::Input(format!("{}: {e}", input.display())))?;
    let config = json!({
        "command": "transform",
        "kind": kind.name(),
        "input_sha256": sha256_hex(text.as_bytes()),
        "target": target.map(|t| json!([t.origin, t.spacing, t.count])),
        "seed": seed,
        "tol": tol,
    });
    let info = RunInfo::new("transform", &config, seed);
    let exec = Exec::default();
    let (image, metric, check) = match kind {
        Kind::Legendre => {
            let h = legendre_1var(&field, target, exec).map_err(classify)?;
            let m = verify_linearized_ode(&h, None, exec).map_err(classify)?;
            (h, "linearized_ode_deviation", m)
        }
        Kind::LegendreInverse => {
            let u = legendre_1var_inverse(&field, target, exec).map_err(classify)?;
            let m = fd_residual(&u, Signature::Euclidean, 1.0, None, exec);
            (u, "eikonal_residual", m)
        }
        Kind::Hodograph => {
            let w = hodograph(&field, target, exec).map_err(classify)?;
            let m = verify_hodograph_image(&w, None, exec).map_err(classify)?;
            (w, "image_equation_deviation", m)
        }
    };
    write_atomic(out, |w| {
        w.write_all(info.comment_header().as_bytes())?;
        writeln!(
            w,
            "# transform={} metric={metric} max={:e}",
            kind.name(),
            check.max
        )?;
        image
            .write_to(&mut *w)
            .map_err(|e| std::io::Error::other(e.to_string()))
    })?;
    let missing = image.values().iter().filter(|v| v.is_nan()).count();
    println!(
        "{metric} {:e} over {} interior nodes ({} skipped); {missing} of {} image nodes missing",
        check.max,
        check.nodes,
        check.skipped,
        image.len()
    );
    match tol {
        Some(t) if !(check.max <= t) => Err(CliError::Failed(format!(
            "{metric} {:e} exceeds {t:e}",
            check.max
        ))),
        _ => Ok(()),
    }
}
