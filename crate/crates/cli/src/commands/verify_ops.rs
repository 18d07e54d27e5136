use std::path::Path;

use eikonal_core::symmetry::{
    conformal_catalog, is_symmetry, negative_controls, null_family_random, sampled_symmetry_check,
    EikonalProblem, NamedOperator, VectorField, Verdict,
};
use eikonal_core::{Exec, VarNames};
use serde_json::json;

use crate::run::{emit_json, num, read_input, CliError, RunInfo};
use crate::spec::{parse_json, Builtin, CatalogSpec, CheckMode, Expectation, OperatorSpec};

const DEFAULT_SAMPLES: usize = 10_000;
const DEFAULT_TOL: f64 = 1e-12;

/// Catalog entry in the file format, written with the names `x0..xn, u`.
pub fn operator_spec(op: &NamedOperator, expect: Expectation) -> OperatorSpec {
    let names = VarNames::eikonal(op.field.n());
    OperatorSpec {
        name: op.name.clone(),
        xi: op
            .field
            .xi()
            .iter()
            .map(|p| p.display(&names).to_string())
            .collect(),
        eta: op.field.eta().display(&names).to_string(),
        expect,
    }
}

fn builtin_operators(kind: Builtin, n: usize, seed: u64) -> Vec<OperatorSpec> {
    match kind {
        Builtin::Conformal => conformal_catalog(n)
            .iter()
            .map(|o| operator_spec(o, Expectation::Symmetry))
            .collect(),
        Builtin::Controls => negative_controls(n)
            .iter()
            .map(|o| operator_spec(o, Expectation::NotSymmetry))
            .collect(),
        Builtin::NullFamilyRandom => null_family_random(n, 3, 20, seed)
            .iter()
            .map(|o| operator_spec(o, Expectation::Symmetry))
            .collect(),
    }
}

fn parse_operator(op: &OperatorSpec, n: usize) -> Result<VectorField, CliError> {
    if op.xi.len() != n + 1 {
        return Err(CliError::Input(format!(
            "operator {}: {} xi components, expected {}",
            op.name,
            op.xi.len(),
            n + 1
        )));
    }
    let xi: Vec<&str> = op.xi.iter().map(String::as_str).collect();
    VectorField::parse(&xi, &op.eta)
        .map_err(|e| CliError::Input(format!("operator {}: {e}", op.name)))
}

pub fn run(spec: &Path, out: Option<&Path>, seed: u64, tol: Option<f64>) -> Result<(), CliError> {
    let catalog: CatalogSpec = parse_json(&read_input(spec)?, "catalog")?;
    let problem = EikonalProblem::new(catalog.n, catalog.c).map_err(CliError::input)?;
    let mut operators = catalog.operators.clone();
    if let Some(kind) = catalog.builtin {
        operators.extend(builtin_operators(kind, catalog.n, seed));
    }
    if operators.is_empty() {
        return Err(CliError::Input("catalog has no operators".into()));
    }
    let fields = operators
        .iter()
        .map(|op| parse_operator(op, catalog.n))
        .collect::<Result<Vec<_>, _>>()?;

    let tol = tol.unwrap_or(DEFAULT_TOL);
    let samples = catalog.samples.unwrap_or(DEFAULT_SAMPLES);
    let config = json!({
        "command": "verify-ops",
        "n": catalog.n,
        "c": catalog.c,
        "operators": operators,
        "check": catalog.check,
        "samples": samples,
        "tol": tol,
        "seed": seed,
    });
    let info = RunInfo::new("verify-ops", &config, seed);
    let jet_names = problem.jet_names();

    let exec = Exec::default();
    let results = exec.map_range(operators.len(), |i| -> Result<serde_json::Value, String> {
        let op = &operators[i];
        let field = &fields[i];
        let mut entry = json!({
            "name": op.name,
            "expect": op.expect,
            "mode": catalog.check,
        });
        let holds = match catalog.check {
            CheckMode::Exact => match is_symmetry(field, &problem).map_err(|e| e.to_string())? {
                Verdict::Symmetry { multiplier } => {
                    entry["multiplier"] = json!(multiplier.display(&jet_names).to_string());
                    true
                }
                Verdict::NotSymmetry(v) => {
                    entry["violation"] = json!(v.to_string());
                    false
                }
            },
            CheckMode::Sampled => {
                let r = sampled_symmetry_check(
                    &field.compile(),
                    &problem,
                    samples,
                    seed,
                    Exec::Sequential,
                )
                .map_err(|e| e.to_string())?;
                entry["sampled_residual"] = num(r);
                r <= tol
            }
        };
        let as_expected = holds == (op.expect == Expectation::Symmetry);
        entry["verdict"] = json!(if holds { "yes" } else { "no" });
        entry["as_expected"] = json!(as_expected);
        Ok(entry)
    });
    let results = results
        .into_iter()
        .collect::<Result<Vec<_>, _>>()
        .map_err(CliError::Input)?;

    let unexpected: Vec<&str> = results
        .iter()
        .filter(|r| r["as_expected"] == json!(false))
        .map(|r| r["name"].as_str().unwrap_or("?"))
        .collect();
    let yes = results
        .iter()
        .filter(|r| r["verdict"] == json!("yes"))
        .count();
    for r in &results {
        let status = if r["as_expected"] == json!(true) {
            "ok"
        } else {
            "UNEXPECTED"
        };
        eprintln!(
            "{:<12} {:<3} expected {:<12} {status}",
            r["name"].as_str().unwrap_or("?"),
            r["verdict"].as_str().unwrap_or("?"),
            r["expect"].as_str().unwrap_or("?"),
        );
    }
    eprintln!(
        "{yes} yes, {} no, {} unexpected",
        results.len() - yes,
        unexpected.len()
    );

    let mut report = info.json();
    report["n"] = json!(catalog.n);
    report["c"] = json!(catalog.c);
    report["operators"] = json!(results);
    report["yes"] = json!(yes);
    report["unexpected"] = json!(unexpected);
    emit_json(out, &report)?;
    if unexpected.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(format!(
            "unexpected verdicts: {}",
            unexpected.join(", ")
        )))
    }
}
