//! Rigidity probes: numerical defect functionals standing in for the
//! "constant implies geodesic sphere" conclusions.
//!
//! A probe never claims to verify a theorem. It reports how far a surface is
//! from satisfying a hypothesis (the oscillation of the tested quantity) and
//! how far it is from the conclusion (the umbilicity defect), so consistency
//! can be checked on instances: when the hypothesis defect is tiny on the
//! test zoo, the umbilicity defect must be tiny too.

use crate::ambient::{ConformalField, Kind};
use crate::curvature::CurvaturePacket;
use crate::error::{LabError, Result};
use crate::identities::NodeData;
use crate::immersion::Immersion;
use crate::linalg::{self, Mat};
use crate::quadrature::{build_grid, GridSpec};
use crate::weights::{self, WeightCtx, WeightSpec};
use serde::{Deserialize, Serialize};

/// Relative oscillation `(max - min) / (|mean| + eps)` of a node quantity.
pub fn oscillation(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut sum = 0.0;
    for &v in values {
        min = min.min(v);
        max = max.max(v);
        sum += v;
    }
    let mean = sum / values.len() as f64;
    (max - min) / (mean.abs() + 1e-300)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum ProbeVariant {
    /// `sigma_k f(r)` constant.
    Radial { k: usize },
    /// `sigma_k f(u)` constant, `u = Y . nu`, convexity required.
    Support { k: usize },
    /// `f(r) sigma_k / sigma_l` constant (`l < k`).
    Ratio { k: usize, l: usize },
    /// `sigma_2 / sigma_1` constant under a conformal field with positive
    /// divergence; also tracks the oscillation of `sigma_1` itself.
    ConformalRatio,
}

impl ProbeVariant {
    pub fn id(&self) -> String {
        match self {
            ProbeVariant::Radial { k } => format!("probe/radial(k={k})"),
            ProbeVariant::Support { k } => format!("probe/support(k={k})"),
            ProbeVariant::Ratio { k, l } => format!("probe/ratio(k={k},l={l})"),
            ProbeVariant::ConformalRatio => "probe/conformal_ratio".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RigidityProbe {
    pub probe_id: String,
    pub surface: String,
    pub f: String,
    /// Relative oscillation of the tested quantity.
    pub hypothesis_defect: f64,
    /// `max |S - sigma_1 I|_F / (1 + |S|_F)` over nodes (sign-adjusted shape
    /// operator in the orthonormal basis).
    pub umbilicity_defect: f64,
    /// Oscillation of `sigma_1` (the stronger conclusion tracked by the
    /// conformal-ratio probe).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma1_oscillation: Option<f64>,
    /// Flat case: area-weighted centroid of `X - nu / sigma_1`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sphere_center_estimate: Option<Vec<f64>>,
    pub notes: String,
    pub resolution: [usize; 2],
}

fn packet_of(nd: &NodeData) -> Result<&CurvaturePacket> {
    nd.packet
        .as_ref()
        .ok_or_else(|| LabError::Argument("rigidity probes need hypersurfaces".into()))
}

/// Probes may invert the normal to make the mean curvature positive (the
/// de Sitter slices have sigma_1 < 0 in the slicing orientation). Flipping
/// the normal multiplies sigma_j by (-1)^j.
fn orientation_sign(nodes: &[NodeData]) -> Result<f64> {
    let first = packet_of(&nodes[0])?;
    Ok(if first.sigma[1] < 0.0 { -1.0 } else { 1.0 })
}

fn oriented_sigma(p: &CurvaturePacket, j: usize, sign: f64) -> f64 {
    p.sigma[j] * sign.powi(j as i32)
}

fn umbilicity_defect(nodes: &[NodeData]) -> Result<f64> {
    let mut worst = 0.0f64;
    for nd in nodes {
        let p = packet_of(nd)?;
        let s = p.adjusted_shape(&nd.frame.shape_onb[0]);
        let dev = s.sub(&Mat::identity(2).scaled(p.sigma[1]));
        worst = worst.max(dev.frobenius() / (1.0 + s.frobenius()));
    }
    Ok(worst)
}

fn center_estimate(imm: &Immersion, nodes: &[NodeData], grid_weights: &[f64]) -> Option<Vec<f64>> {
    if imm.ambient.kind != Kind::Flat {
        return None;
    }
    let n = imm.ambient_dim();
    let mut num = vec![0.0; n];
    let mut den = 0.0;
    for (i, nd) in nodes.iter().enumerate() {
        let p = nd.packet.as_ref()?;
        if p.sigma[1].abs() < 1e-12 {
            return None;
        }
        let w = grid_weights[i] * nd.frame.sqrt_det_g;
        let mut c = nd.frame.x.clone();
        linalg::axpy(&mut c, -1.0 / p.sigma[1], &nd.frame.normals[0].v);
        linalg::axpy(&mut num, w, &c);
        den += w;
    }
    Some(linalg::scale(&num, 1.0 / den))
}

/// Radial/support/ratio probes of the Alexandrov type. The weight `f` must
/// satisfy `f > 0`, `f' >= 0` on the surface's radial range; violations are
/// reported as hypothesis errors, not crashes.
pub fn alexandrov_probe(
    imm: &Immersion,
    f: &WeightSpec,
    variant: ProbeVariant,
    grid_spec: &GridSpec,
) -> Result<RigidityProbe> {
    if imm.codim() != 1 {
        return Err(LabError::Argument("rigidity probes need hypersurfaces".into()));
    }
    let field = imm.natural_field()?;
    let ctx = WeightCtx::new(imm, &field);
    let grid = build_grid(imm, grid_spec);
    let nodes = crate::identities::node_data(imm, &grid)?;
    let space = &imm.ambient;

    // Standing weight hypotheses: f > 0 and f' >= 0 along r.
    check_weight_monotone(f, &ctx, &nodes)?;

    let mut tested = Vec::with_capacity(nodes.len());
    let mut notes = String::new();
    match variant {
        ProbeVariant::Radial { k } => {
            let sign = orientation_sign(&nodes)?;
            for nd in &nodes {
                let p = packet_of(nd)?;
                tested.push(oriented_sigma(p, k, sign) * weights::value(f, &ctx, &nd.frame)?);
            }
        }
        ProbeVariant::Support { k } => {
            let sign = orientation_sign(&nodes)?;
            for nd in &nodes {
                let p = packet_of(nd)?;
                // Convexity requirement A > 0 (after orientation).
                let s = p.adjusted_shape(&nd.frame.shape_onb[0]).scaled(sign);
                let (vals, _) = linalg::jacobi_eigen(&s)?;
                if vals[0] <= 0.0 {
                    return Err(LabError::Hypothesis(format!(
                        "support probe needs a convex surface; principal curvature {:.3e} <= 0 \
                         at u = ({:.3}, {:.3})",
                        vals[0], nd.frame.u[0], nd.frame.u[1]
                    )));
                }
                let u = weights::support_u(&ctx, &nd.frame)?;
                let (fu, _) = eval_scalar_weight(f, u);
                tested.push(oriented_sigma(p, k, sign) * fu);
            }
            notes.push_str("support variant: f applied to u = Y.nu; convexity checked; ");
        }
        ProbeVariant::Ratio { k, l } => {
            if l >= k {
                return Err(LabError::Argument("ratio probe needs l < k".into()));
            }
            let sign = orientation_sign(&nodes)?;
            for nd in &nodes {
                let p = packet_of(nd)?;
                let sl = oriented_sigma(p, l, sign);
                if sl <= 0.0 {
                    return Err(LabError::Hypothesis(format!(
                        "sigma_{l} = {sl:.3e} <= 0 at u = ({:.3}, {:.3})",
                        nd.frame.u[0], nd.frame.u[1]
                    )));
                }
                tested.push(
                    weights::value(f, &ctx, &nd.frame)? * oriented_sigma(p, k, sign) / sl,
                );
            }
        }
        ProbeVariant::ConformalRatio => {
            return Err(LabError::Argument(
                "use conformal_ratio_probe for the conformal-field variant".into(),
            ));
        }
    }

    let hypothesis_defect = oscillation(&tested);
    let umbilicity = umbilicity_defect(&nodes)?;
    let center = center_estimate(imm, &nodes, &grid.weights);
    let _ = space;
    Ok(RigidityProbe {
        probe_id: variant.id(),
        surface: imm.label.clone(),
        f: f.label(),
        hypothesis_defect,
        umbilicity_defect: umbilicity,
        sigma1_oscillation: None,
        sphere_center_estimate: center,
        notes: format!("{notes}probe reports defects only; no theorem is claimed verified"),
        resolution: grid.resolution,
    })
}

/// The conformal-field ratio probe: oscillation of `sigma_2 / sigma_1` under
/// a conformal field with everywhere positive factor, plus the oscillation of
/// `sigma_1` itself (the stronger conclusion).
pub fn conformal_ratio_probe(
    imm: &Immersion,
    field: &ConformalField,
    grid_spec: &GridSpec,
) -> Result<RigidityProbe> {
    if imm.codim() != 1 {
        return Err(LabError::Argument("rigidity probes need hypersurfaces".into()));
    }
    let grid = build_grid(imm, grid_spec);
    let nodes = crate::identities::node_data(imm, &grid)?;

    let mut ratios = Vec::with_capacity(nodes.len());
    let mut sigma1s = Vec::with_capacity(nodes.len());
    let sign = orientation_sign(&nodes)?;
    for nd in &nodes {
        let p = packet_of(nd)?;
        let alpha = field.alpha(&nd.frame.x);
        if alpha <= 0.0 {
            return Err(LabError::Hypothesis(format!(
                "conformal factor alpha = {alpha:.3e} <= 0 at u = ({:.3}, {:.3})",
                nd.frame.u[0], nd.frame.u[1]
            )));
        }
        let s1 = oriented_sigma(p, 1, sign);
        if s1 <= 0.0 {
            return Err(LabError::Hypothesis(format!(
                "sigma_1 = {s1:.3e} <= 0 at u = ({:.3}, {:.3})",
                nd.frame.u[0], nd.frame.u[1]
            )));
        }
        ratios.push(oriented_sigma(p, 2, sign) / s1);
        sigma1s.push(s1);
    }

    Ok(RigidityProbe {
        probe_id: ProbeVariant::ConformalRatio.id(),
        surface: imm.label.clone(),
        f: "sigma_2/sigma_1".into(),
        hypothesis_defect: oscillation(&ratios),
        umbilicity_defect: umbilicity_defect(&nodes)?,
        sigma1_oscillation: Some(oscillation(&sigma1s)),
        sphere_center_estimate: center_estimate(imm, &nodes, &grid.weights),
        notes: "probe reports defects only; no theorem is claimed verified".into(),
        resolution: grid.resolution,
    })
}

fn eval_scalar_weight(f: &WeightSpec, t: f64) -> (f64, f64) {
    // Scalar profile F(t) and F'(t) for the weights usable as profiles.
    match f {
        WeightSpec::Const { c } => (*c, 0.0),
        WeightSpec::RadialPow { p } => (t.powi(*p), *p as f64 * t.powi(*p - 1)),
        _ => (f64::NAN, f64::NAN),
    }
}

fn check_weight_monotone(f: &WeightSpec, ctx: &WeightCtx, nodes: &[NodeData]) -> Result<()> {
    // Only radial-profile weights carry the f > 0, f' >= 0 hypothesis.
    if let WeightSpec::RadialPow { .. } | WeightSpec::Const { .. } = f {
        for nd in nodes {
            let r = ctx
                .imm
                .ambient
                .polar(&ctx.pole, &nd.frame.x)?
                .r;
            let (fv, fp) = eval_scalar_weight(f, r);
            if !(fv > 0.0) || fp < 0.0 {
                return Err(LabError::Hypothesis(format!(
                    "weight {} violates f > 0, f' >= 0 at r = {r:.4}",
                    f.label()
                )));
            }
        }
    }
    Ok(())
}
