//! Check execution: run every check of a scenario (parallel across checks,
//! each check internally deterministic), classify outcomes, and write the
//! report files.

use crate::scenario::{CheckSpec, Scenario, Tolerances};
use minkowski_lab::error::{LabError, Result};
use minkowski_lab::identities::{self, Verdict};
use minkowski_lab::quadrature::GridSpec;
use minkowski_lab::report::{to_csv, CheckReport, ReportEnvelope, Severity};
use minkowski_lab::rigidity;
use minkowski_lab::spectral;
use rayon::prelude::*;
use std::path::Path;

pub struct RunOutcome {
    pub reports: Vec<ReportEnvelope>,
    pub severity: Severity,
}

fn run_check(
    scenario: &Scenario,
    check: &CheckSpec,
    grid: &GridSpec,
    tol: &Tolerances,
) -> Result<CheckReport> {
    let imm = scenario.immersion()?;
    match check {
        CheckSpec::HmIdentity { k, f, field, refine } => {
            let field = field.build(&imm)?;
            let rep = if *refine {
                identities::verified(
                    |spec| identities::hm_identity(&imm, &field, f, *k, spec, tol.identity),
                    grid,
                    tol.identity,
                )?
            } else {
                identities::hm_identity(&imm, &field, f, *k, grid, tol.identity)?
            };
            Ok(CheckReport::Identity(rep))
        }
        CheckSpec::HmMultiNormal { normals, f, field } => {
            let field = field.build(&imm)?;
            let rep =
                identities::hm_multi_normal(&imm, normals, &field, f, grid, tol.identity)?;
            Ok(CheckReport::Identity(rep))
        }
        CheckSpec::Closure { k } => {
            let rep = identities::closure(&imm, *k, grid, tol.closure_per_area)?;
            Ok(CheckReport::Identity(rep))
        }
        CheckSpec::Chain { variant, k } => {
            let rep = identities::chain(&imm, *variant, *k, grid, tol.chain_equality)?;
            Ok(CheckReport::Chain(rep))
        }
        CheckSpec::VectorIdentity { k, f } => {
            let rep = identities::vector_identity(&imm, f, *k, grid, tol.identity)?;
            Ok(CheckReport::Identity(rep))
        }
        CheckSpec::DivergenceResidual { tensor, f, field } => {
            let field = field.build(&imm)?;
            let rep = identities::divergence_residual(
                &imm,
                tensor,
                f,
                &field,
                grid,
                tol.closure_per_area,
            )?;
            Ok(CheckReport::Identity(rep))
        }
        CheckSpec::RigidityProbe { variant, f } => {
            let probe = match variant {
                rigidity::ProbeVariant::ConformalRatio => {
                    let field = imm.natural_field()?;
                    rigidity::conformal_ratio_probe(&imm, &field, grid)?
                }
                other => rigidity::alexandrov_probe(&imm, f, *other, grid)?,
            };
            // Consistency contract: a tiny hypothesis defect must come with
            // a tiny umbilicity defect.
            let verdict = if probe.hypothesis_defect < tol.eps_h
                && probe.umbilicity_defect >= tol.eps_u
            {
                Verdict::Fail
            } else {
                Verdict::Pass
            };
            Ok(CheckReport::Rigidity { probe, verdict })
        }
        CheckSpec::Lambda1 { k, vertices, mesh } => match mesh {
            Some(path) => {
                let mesh = spectral::mesh::read_off(Path::new(path), imm.ambient)?;
                Ok(CheckReport::Eigen(spectral::lambda1_on_mesh(
                    format!("mesh:{path}"),
                    &mesh,
                    *k,
                )?))
            }
            None => Ok(CheckReport::Eigen(spectral::lambda1(&imm, *k, *vertices)?)),
        },
        CheckSpec::Garay { k, vertices } => {
            Ok(CheckReport::Eigen(spectral::garay_check(&imm, *k, *vertices)?))
        }
        CheckSpec::Steklov { boundary, density } => {
            Ok(CheckReport::Steklov(spectral::steklov_p1(boundary, *density)?))
        }
    }
}

/// Run all checks; hypothesis violations become reports, config errors abort.
pub fn run_scenario(scenario: &Scenario, tol_scale: f64) -> Result<RunOutcome> {
    let grid = scenario.grid();
    let tol = scenario.tolerances.clone().unwrap_or_default().scaled(tol_scale);
    // Validate surface construction before spawning the pool.
    scenario.immersion()?;

    let results: Vec<Result<CheckReport>> = scenario
        .checks
        .par_iter()
        .map(|check| run_check(scenario, check, &grid, &tol))
        .collect();

    let mut reports = Vec::with_capacity(results.len());
    let mut severity = Severity::Pass;
    for (check, result) in scenario.checks.iter().zip(results) {
        let report = match result {
            Ok(rep) => rep,
            Err(LabError::Hypothesis(reason)) => {
                CheckReport::HypothesisViolation { check_id: check.id().into(), reason }
            }
            Err(other) => return Err(other),
        };
        severity = worst(severity, report.severity());
        reports.push(ReportEnvelope::new(
            scenario.ambient.clone(),
            scenario.surface.label.clone(),
            scenario.surface.params.clone(),
            report,
        ));
    }
    Ok(RunOutcome { reports, severity })
}

fn worst(a: Severity, b: Severity) -> Severity {
    use Severity::*;
    match (a, b) {
        (HypothesisViolation, _) | (_, HypothesisViolation) => HypothesisViolation,
        (NumericalFailure, _) | (_, NumericalFailure) => NumericalFailure,
        _ => Pass,
    }
}

/// Write per-check JSON reports plus the aggregate CSV. Timestamps go to a
/// separate metadata file so report bytes stay reproducible.
pub fn write_reports(outcome: &RunOutcome, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut rows = Vec::new();
    for (i, envelope) in outcome.reports.iter().enumerate() {
        let name = format!("{:03}_{}.json", i, sanitize(&envelope.check.check_id()));
        let json = serde_json::to_string_pretty(envelope)
            .map_err(|e| LabError::Config(format!("serialization: {e}")))?;
        std::fs::write(dir.join(name), json)?;
        let mut row = vec![("index".to_string(), i.to_string())];
        row.extend(envelope.check.csv_pairs());
        rows.push(row);
    }
    std::fs::write(dir.join("reports.csv"), to_csv(&rows))?;
    let meta = serde_json::json!({
        "generated_unix_ms": std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_millis() as u64)
            .unwrap_or(0),
        "report_count": outcome.reports.len(),
    });
    std::fs::write(dir.join("run_meta.json"), serde_json::to_string_pretty(&meta).unwrap())?;
    Ok(())
}

fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '-' { c } else { '_' })
        .collect()
}

/// Sweep one numeric scenario field over values, collecting all report
/// scalars per value into one CSV table.
pub fn sweep(
    scenario: &Scenario,
    axis: &str,
    values: &[f64],
    tol_scale: f64,
) -> Result<String> {
    let base = serde_json::to_value(scenario)
        .map_err(|e| LabError::Config(format!("serialization: {e}")))?;
    let pointer = axis_to_pointer(axis);
    let mut rows = Vec::new();
    for &v in values {
        let mut doc = base.clone();
        let slot = doc.pointer_mut(&pointer).ok_or_else(|| {
            LabError::Config(format!("sweep axis {axis:?} does not address a scenario field"))
        })?;
        if !slot.is_number() && !slot.is_null() {
            return Err(LabError::Config(format!("sweep axis {axis:?} is not numeric")));
        }
        // Keep integer-typed fields (resolutions, vertex counts) integers.
        *slot = if slot.is_u64() || slot.is_i64() {
            if v.fract() != 0.0 {
                return Err(LabError::Config(format!(
                    "sweep axis {axis:?} holds an integer; value {v} is fractional"
                )));
            }
            serde_json::json!(v as i64)
        } else {
            serde_json::json!(v)
        };
        let swept: Scenario = serde_json::from_value(doc)
            .map_err(|e| LabError::Config(format!("swept scenario invalid: {e}")))?;
        let outcome = run_scenario(&swept, tol_scale)?;
        for (i, envelope) in outcome.reports.iter().enumerate() {
            let mut row = vec![
                (axis.to_string(), format!("{v:.17e}")),
                ("index".to_string(), i.to_string()),
            ];
            row.extend(envelope.check.csv_pairs());
            rows.push(row);
        }
    }
    Ok(to_csv(&rows))
}

fn axis_to_pointer(axis: &str) -> String {
    let mut p = String::new();
    for part in axis.split('.') {
        p.push('/');
        p.push_str(part);
    }
    p
}

pub fn list_checks() -> String {
    let rows = [
        ("hm_identity", "k, f, field, refine - weighted flux identity on hypersurfaces"),
        ("hm_multi_normal", "normals, f, field - parallel-frame identity in codimension >= 2"),
        ("closure", "k - vector integral of sigma_k nu vanishes (flat hypersurfaces)"),
        ("chain", "family (+p), k - weighted curvature inequality chains"),
        ("vector_identity", "k, f - coordinate-free vector identity on pseudo-spheres"),
        ("divergence_residual", "tensor (+k/seed), f, field - four-term divergence formula"),
        ("rigidity_probe", "variant (+k/l), f - oscillation and umbilicity defects"),
        ("lambda1", "k, vertices - FEM first eigenvalue of -div(T_k grad .) vs bound"),
        ("garay", "k, vertices - volume-weighted eigenvalue bound (flat, embedded)"),
        ("steklov", "shape (+radius/a,b/...), density - planar Steklov bound p1 <= max curvature"),
    ];
    let mut out = String::from("available checks:\n");
    for (name, desc) in rows {
        out.push_str(&format!("  {name:<20} {desc}\n"));
    }
    out
}

pub fn list_surfaces() -> String {
    let mut out = String::from("available surfaces:\n");
    for (name, desc) in minkowski_lab::immersion::surface_registry() {
        out.push_str(&format!("  {name:<20} {desc}\n"));
    }
    out
}
