//! Report envelopes and CSV flattening for batch runs.
//!
//! Reports are plain data: JSON for single checks, CSV (one row per report)
//! for aggregates and sweeps. Nothing here touches wall-clock time; callers
//! that want timestamps keep them in a separate metadata file so repeated
//! runs stay byte-identical.

use crate::identities::{ChainReport, IdentityReport, Verdict};
use crate::rigidity::RigidityProbe;
use crate::spectral::{EigenReport, SteklovReport};
use serde::Serialize;

pub const SCHEMA: &str = "minkowski-lab/1";

/// Severity classes driving process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Pass,
    NumericalFailure,
    HypothesisViolation,
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum CheckReport {
    Identity(IdentityReport),
    Chain(ChainReport),
    Rigidity {
        #[serde(flatten)]
        probe: RigidityProbe,
        verdict: Verdict,
    },
    Eigen(EigenReport),
    Steklov(SteklovReport),
    /// A check whose standing hypotheses failed: reported, not crashed.
    HypothesisViolation { check_id: String, reason: String },
}

impl CheckReport {
    pub fn check_id(&self) -> String {
        match self {
            CheckReport::Identity(r) => r.identity_id.clone(),
            CheckReport::Chain(r) => r.chain_id.clone(),
            CheckReport::Rigidity { probe, .. } => probe.probe_id.clone(),
            CheckReport::Eigen(r) => r.check_id.clone(),
            CheckReport::Steklov(r) => r.check_id.clone(),
            CheckReport::HypothesisViolation { check_id, .. } => check_id.clone(),
        }
    }

    pub fn severity(&self) -> Severity {
        match self {
            CheckReport::Identity(r) => match r.verdict {
                Verdict::Pass => Severity::Pass,
                Verdict::Fail => Severity::NumericalFailure,
                Verdict::HypothesisViolation => Severity::HypothesisViolation,
            },
            CheckReport::Chain(r) => match r.verdict {
                Verdict::Pass => Severity::Pass,
                Verdict::Fail => Severity::NumericalFailure,
                Verdict::HypothesisViolation => Severity::HypothesisViolation,
            },
            CheckReport::Rigidity { verdict, .. } => match verdict {
                Verdict::Pass => Severity::Pass,
                Verdict::Fail => Severity::NumericalFailure,
                Verdict::HypothesisViolation => Severity::HypothesisViolation,
            },
            CheckReport::Eigen(r) => {
                if r.adjusted_verdict {
                    Severity::Pass
                } else {
                    Severity::NumericalFailure
                }
            }
            CheckReport::Steklov(r) => {
                if r.adjusted_verdict {
                    Severity::Pass
                } else {
                    Severity::NumericalFailure
                }
            }
            CheckReport::HypothesisViolation { .. } => Severity::HypothesisViolation,
        }
    }

    /// Flat key/value pairs for the aggregate CSV.
    pub fn csv_pairs(&self) -> Vec<(String, String)> {
        let f = |x: f64| format!("{x:.17e}");
        match self {
            CheckReport::Identity(r) => vec![
                ("check_id".into(), r.identity_id.clone()),
                ("surface".into(), r.surface.clone()),
                ("k".into(), r.k.to_string()),
                ("f".into(), r.f.clone()),
                ("lhs".into(), f(r.lhs.scalar())),
                ("residual".into(), f(r.residual)),
                ("relative_residual".into(), f(r.relative_residual)),
                ("verdict".into(), format!("{:?}", r.verdict).to_lowercase()),
            ],
            CheckReport::Chain(r) => vec![
                ("check_id".into(), r.chain_id.clone()),
                ("surface".into(), r.surface.clone()),
                ("k".into(), r.k.to_string()),
                ("min_slack".into(), f(r.min_slack)),
                ("equality_flag".into(), r.equality_flag.to_string()),
                ("verdict".into(), format!("{:?}", r.verdict).to_lowercase()),
            ],
            CheckReport::Rigidity { probe, verdict } => vec![
                ("check_id".into(), probe.probe_id.clone()),
                ("surface".into(), probe.surface.clone()),
                ("f".into(), probe.f.clone()),
                ("hypothesis_defect".into(), f(probe.hypothesis_defect)),
                ("umbilicity_defect".into(), f(probe.umbilicity_defect)),
                ("verdict".into(), format!("{verdict:?}").to_lowercase()),
            ],
            CheckReport::Eigen(r) => vec![
                ("check_id".into(), r.check_id.clone()),
                ("surface".into(), r.surface.clone()),
                ("k".into(), r.k.to_string()),
                ("lambda1".into(), f(r.lambda1)),
                ("bound".into(), f(r.bound)),
                ("slack".into(), f(r.slack)),
                ("verdict".into(), if r.adjusted_verdict { "pass" } else { "fail" }.into()),
            ],
            CheckReport::Steklov(r) => vec![
                ("check_id".into(), r.check_id.clone()),
                ("surface".into(), r.domain.clone()),
                ("p1".into(), f(r.p1)),
                ("bound".into(), f(r.bound)),
                ("slack".into(), f(r.slack)),
                ("verdict".into(), if r.adjusted_verdict { "pass" } else { "fail" }.into()),
            ],
            CheckReport::HypothesisViolation { check_id, reason } => vec![
                ("check_id".into(), check_id.clone()),
                ("verdict".into(), "hypothesis_violation".into()),
                ("reason".into(), reason.clone()),
            ],
        }
    }
}

/// One emitted report file: the schema tag, the scenario coordinates, and
/// the check payload.
#[derive(Debug, Clone, Serialize)]
pub struct ReportEnvelope {
    pub schema: &'static str,
    pub ambient: String,
    pub surface: String,
    pub params: serde_json::Value,
    pub check: CheckReport,
}

impl ReportEnvelope {
    pub fn new(
        ambient: String,
        surface: String,
        params: serde_json::Value,
        check: CheckReport,
    ) -> Self {
        ReportEnvelope { schema: SCHEMA, ambient, surface, params, check }
    }
}

/// Render reports as CSV with a union header in first-seen order.
pub fn to_csv(rows: &[Vec<(String, String)>]) -> String {
    let mut columns: Vec<String> = Vec::new();
    for row in rows {
        for (k, _) in row {
            if !columns.contains(k) {
                columns.push(k.clone());
            }
        }
    }
    let escape = |s: &str| -> String {
        if s.contains(',') || s.contains('"') || s.contains('\n') {
            format!("\"{}\"", s.replace('"', "\"\""))
        } else {
            s.to_string()
        }
    };
    let mut out = String::new();
    out.push_str(&columns.join(","));
    out.push('\n');
    for row in rows {
        let mut cells = Vec::with_capacity(columns.len());
        for col in &columns {
            let val = row
                .iter()
                .find(|(k, _)| k == col)
                .map(|(_, v)| escape(v))
                .unwrap_or_default();
            cells.push(val);
        }
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
