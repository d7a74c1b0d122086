//! The integral-identity engine: weighted flux identities for hypersurfaces
//! in all four space-form families, their multi-normal generalization in
//! higher codimension, closure identities, inequality chains, the vector
//! identity on pseudo-spheres, and the raw divergence-formula residual.
//!
//! Every report evaluates all of an identity's integrals on one shared grid
//! and states the residual `|lhs - sum(rhs)|` together with a scale-aware
//! relative residual. Verdicts follow the tolerance policy: pass needs the
//! relative residual under the tolerance at the default grid AND residuals
//! that do not grow under two refinements (monotone decrease, except below
//! the quadrature saturation floor where differences are rounding noise).

use crate::ambient::{ConformalField, Kind};
use crate::curvature::{self, binomial, CurvaturePacket};
use crate::error::{LabError, Result};
use crate::immersion::{Immersion, PointFrame};
use crate::linalg::{self, Mat, SplitMix64};
use crate::quadrature::{build_grid, frames, integrate, GridSpec, QuadratureGrid};
use crate::weights::{self, WeightCtx, WeightSpec};
use serde::{Deserialize, Serialize};

/// Relative-residual tolerance at the default grid.
pub const DEFAULT_TOL: f64 = 1e-7;
/// Below this residual the quadrature has saturated at machine precision and
/// refinement differences are rounding noise, not convergence information.
pub const RESIDUAL_FLOOR: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    HypothesisViolation,
}

/// Scalar or ambient-vector quantity in a report.
#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Value {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl Value {
    pub fn scalar(&self) -> f64 {
        match self {
            Value::Scalar(s) => *s,
            Value::Vector(v) => v.iter().map(|x| x.abs()).fold(0.0, f64::max),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub identity_id: String,
    pub surface: String,
    pub k: usize,
    pub f: String,
    pub lhs: Value,
    pub rhs_terms: Vec<(String, Value)>,
    pub residual: f64,
    pub relative_residual: f64,
    pub resolution: [usize; 2],
    pub tolerance: f64,
    pub verdict: Verdict,
    /// Relative residuals on the refinement ladder (coarse to default), when
    /// the verdict was refinement-checked.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refinement: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChainReport {
    pub chain_id: String,
    pub surface: String,
    pub k: usize,
    /// Ordered integral values along the chain.
    pub values: Vec<f64>,
    /// Successive differences (must be nonnegative).
    pub slacks: Vec<f64>,
    pub min_slack: f64,
    /// True when every slack is below the equality tolerance.
    pub equality_flag: bool,
    pub equality_tol: f64,
    pub resolution: [usize; 2],
    pub verdict: Verdict,
}

/// Per-node data the identity integrands consume.
pub struct NodeData {
    pub frame: PointFrame,
    /// Curvature packet of the (sign-adjusted) hypersurface shape operator;
    /// absent in codimension >= 2.
    pub packet: Option<CurvaturePacket>,
}

pub fn node_data(imm: &Immersion, grid: &QuadratureGrid) -> Result<Vec<NodeData>> {
    let frs = frames(imm, grid)?;
    frs.into_iter()
        .map(|frame| {
            let packet = if frame.normals.len() == 1 {
                Some(CurvaturePacket::from_shape(&frame.shape_onb[0], frame.normals[0].eps)?)
            } else {
                None
            };
            Ok(NodeData { frame, packet })
        })
        .collect()
}

fn relative(residual: f64, lhs: f64, rhs: f64) -> f64 {
    residual / (lhs.abs() + rhs.abs() + 1.0)
}

fn integrate_nodes<F>(grid: &QuadratureGrid, nodes: &[NodeData], f: F) -> Result<f64>
where
    F: Fn(usize, &NodeData) -> f64,
{
    let mut terms = Vec::with_capacity(nodes.len());
    for (i, nd) in nodes.iter().enumerate() {
        let v = f(i, nd);
        if !v.is_finite() {
            return Err(LabError::Poisoned {
                node: i,
                detail: format!("integrand value {v} at u = ({}, {})", nd.frame.u[0], nd.frame.u[1]),
            });
        }
        terms.push(grid.weights[i] * v * nd.frame.sqrt_det_g);
    }
    Ok(linalg::kahan_sum(terms))
}

fn integrate_nodes_vec<F>(
    grid: &QuadratureGrid,
    nodes: &[NodeData],
    dim: usize,
    f: F,
) -> Result<Vec<f64>>
where
    F: Fn(usize, &NodeData) -> Vec<f64>,
{
    let mut per_comp: Vec<Vec<f64>> = vec![Vec::with_capacity(nodes.len()); dim];
    for (i, nd) in nodes.iter().enumerate() {
        let v = f(i, nd);
        for (c, val) in v.iter().enumerate() {
            if !val.is_finite() {
                return Err(LabError::Poisoned { node: i, detail: format!("component {c}") });
            }
            per_comp[c].push(grid.weights[i] * val * nd.frame.sqrt_det_g);
        }
    }
    Ok(per_comp.into_iter().map(linalg::kahan_sum).collect())
}

/// Weighted flux identity for closed hypersurfaces: with a conformal field
/// `Y` (factor `alpha`) and a smooth weight `f`, for `0 <= k <= m-1`,
///
/// `int alpha f sigma_k  =  int f sigma_{k+1} (nu . Y)
///    - 1/((m-k) C(m,k)) int < T_k grad f, Y^T >`.
///
/// Curvature packets carry the causal sign adjustment, so this one statement
/// covers flat space, the sphere, hyperbolic space, and de Sitter space.
pub fn hm_identity(
    imm: &Immersion,
    field: &ConformalField,
    f: &WeightSpec,
    k: usize,
    grid_spec: &GridSpec,
    tol: f64,
) -> Result<IdentityReport> {
    let m = 2usize;
    if imm.codim() != 1 {
        return Err(LabError::Argument(
            "hm_identity needs a hypersurface; use hm_multi_normal in higher codimension".into(),
        ));
    }
    if k > m - 1 {
        return Err(LabError::Argument(format!(
            "hm_identity needs 0 <= k <= {} (got {k})",
            m - 1
        )));
    }
    let space = &imm.ambient;
    let grid = build_grid(imm, grid_spec);
    let nodes = node_data(imm, &grid)?;
    let ctx = WeightCtx::new(imm, field);
    let fvals: Vec<f64> =
        nodes.iter().map(|nd| weights::value(f, &ctx, &nd.frame)).collect::<Result<_>>()?;
    let grads: Vec<Vec<f64>> =
        nodes.iter().map(|nd| weights::gradient(f, &ctx, &nd.frame)).collect::<Result<_>>()?;

    let lhs = integrate_nodes(&grid, &nodes, |i, nd| {
        let p = nd.packet.as_ref().unwrap();
        field.alpha(&nd.frame.x) * fvals[i] * p.sigma[k]
    })?;
    let flux = integrate_nodes(&grid, &nodes, |i, nd| {
        let p = nd.packet.as_ref().unwrap();
        let y = field.value(&nd.frame.x);
        fvals[i] * p.sigma[k + 1] * space.inner(&nd.frame.normals[0].v, &y)
    })?;
    let coef = -1.0 / ((m - k) as f64 * binomial(m, k));
    let corr = integrate_nodes(&grid, &nodes, |i, nd| {
        let p = nd.packet.as_ref().unwrap();
        let gonb = nd.frame.onb_coords(space, &grads[i]);
        let tg = p.t[k].apply(&gonb);
        let y = field.value(&nd.frame.x);
        coef * space.inner(&nd.frame.from_onb([tg[0], tg[1]]), &y)
    })?;

    let rhs = flux + corr;
    let residual = (lhs - rhs).abs();
    let relative_residual = relative(residual, lhs, rhs);
    Ok(IdentityReport {
        identity_id: format!("hm/{}", field.label()),
        surface: imm.label.clone(),
        k,
        f: f.label(),
        lhs: Value::Scalar(lhs),
        rhs_terms: vec![
            ("flux".into(), Value::Scalar(flux)),
            ("gradient_correction".into(), Value::Scalar(corr)),
        ],
        residual,
        relative_residual,
        resolution: grid.resolution,
        tolerance: tol,
        verdict: if relative_residual < tol { Verdict::Pass } else { Verdict::Fail },
        refinement: None,
    })
}

/// Refinement-checked verdict policy shared by the identity family: run the
/// report on the coarse-to-default ladder, require the default-grid relative
/// residual under `tol` and residuals non-increasing along the ladder (or
/// already at the saturation floor).
pub fn verified<R>(run: R, grid_spec: &GridSpec, tol: f64) -> Result<IdentityReport>
where
    R: Fn(&GridSpec) -> Result<IdentityReport>,
{
    let ladder = grid_spec.refinement_ladder();
    let mut residuals = Vec::with_capacity(ladder.len());
    let mut last: Option<IdentityReport> = None;
    for spec in &ladder {
        let rep = run(spec)?;
        residuals.push(rep.relative_residual);
        last = Some(rep);
    }
    let mut report = last.expect("non-empty ladder");
    let at_tol = residuals.last().copied().unwrap_or(f64::INFINITY) < tol;
    let monotone = residuals
        .windows(2)
        .all(|w| w[1] <= w[0] * (1.0 + 1e-12) || w[1] < RESIDUAL_FLOOR);
    report.verdict = if at_tol && monotone { Verdict::Pass } else { Verdict::Fail };
    report.refinement = Some(residuals);
    Ok(report)
}

/// Multi-normal flux identity for submanifolds of flat space with a frame of
/// parallel normals `nu_1..nu_k`:
///
/// `int alpha f sigma_k(nu_1..nu_k) = int f sigma_{k+1}(nu_1..nu_k, Y_perp)
///    - 1/((m-k) C(m,k)) int < T_k(nu_1..nu_k) grad f, Y^T >`.
///
/// For `k = m` both `T_m` and `sigma_{m+1}` vanish identically, which turns
/// the statement into a closure identity usable with Killing fields
/// (`alpha = 0`); conformal fields with nonzero factor require `k <= m-1`.
pub fn hm_multi_normal(
    imm: &Immersion,
    normal_indices: &[usize],
    field: &ConformalField,
    f: &WeightSpec,
    grid_spec: &GridSpec,
    tol: f64,
) -> Result<IdentityReport> {
    let m = 2usize;
    let k = normal_indices.len();
    if imm.codim() < 2 {
        return Err(LabError::Argument("hm_multi_normal needs codimension >= 2".into()));
    }
    if k == 0 || k > m {
        return Err(LabError::Size(format!("need 1 <= k <= m = {m}, got {k}")));
    }
    // Parallel-frame precondition.
    for &beta in normal_indices {
        let drift = curvature::parallel_check(imm, beta, 8)?;
        if drift > 1e-8 {
            return Err(LabError::Hypothesis(format!(
                "normal {beta} is not parallel in the normal bundle (max |D nu| = {drift:.3e})"
            )));
        }
    }
    let space = &imm.ambient;
    let grid = build_grid(imm, grid_spec);
    let nodes = node_data(imm, &grid)?;
    let ctx = WeightCtx::new(imm, field);
    let coef = if k == m { 0.0 } else { -1.0 / ((m - k) as f64 * binomial(m, k)) };
    let fvals: Vec<f64> =
        nodes.iter().map(|nd| weights::value(f, &ctx, &nd.frame)).collect::<Result<_>>()?;
    let packets: Vec<curvature::MultiNormalPacket> = nodes
        .iter()
        .map(|nd| curvature::multi_normal(&nd.frame, normal_indices))
        .collect::<Result<_>>()?;

    let lhs = integrate_nodes(&grid, &nodes, |i, nd| {
        field.alpha(&nd.frame.x) * fvals[i] * packets[i].sigma_k
    })?;
    let flux = if k == m {
        // sigma_{m+1} vanishes identically; still push it through the
        // epsilon sums so the index logic is exercised.
        let raw = integrate_nodes(&grid, &nodes, |_, nd| {
            let y = field.value(&nd.frame.x);
            let mut ops: Vec<Mat> =
                normal_indices.iter().map(|&b| nd.frame.shape_onb[b].clone()).collect();
            ops.push(nd.frame.shape_along(space, &y));
            curvature::epsilon_h(&ops).unwrap_or(f64::NAN)
        })?;
        debug_assert_eq!(raw, 0.0);
        raw
    } else {
        integrate_nodes(&grid, &nodes, |i, nd| {
            // sigma_{k+1}(nu_1..nu_k, Y_perp), with the field slotted last.
            let y = field.value(&nd.frame.x);
            let mut ops: Vec<Mat> =
                normal_indices.iter().map(|&b| nd.frame.shape_onb[b].clone()).collect();
            ops.push(nd.frame.shape_along(space, &y));
            let h = curvature::epsilon_h(&ops).unwrap_or(f64::NAN);
            fvals[i] * h / binomial(m, k + 1)
        })?
    };
    let corr = if coef == 0.0 {
        0.0
    } else {
        let grads: Vec<Vec<f64>> = nodes
            .iter()
            .map(|nd| weights::gradient(f, &ctx, &nd.frame))
            .collect::<Result<_>>()?;
        integrate_nodes(&grid, &nodes, |i, nd| {
            let gonb = nd.frame.onb_coords(space, &grads[i]);
            let tg = packets[i].t_k.apply(&gonb);
            let y = field.value(&nd.frame.x);
            coef * space.inner(&nd.frame.from_onb([tg[0], tg[1]]), &y)
        })?
    };

    let rhs = flux + corr;
    let residual = (lhs - rhs).abs();
    let relative_residual = relative(residual, lhs, rhs);
    Ok(IdentityReport {
        identity_id: format!("hm_multi/{}", field.label()),
        surface: imm.label.clone(),
        k,
        f: f.label(),
        lhs: Value::Scalar(lhs),
        rhs_terms: vec![
            ("flux".into(), Value::Scalar(flux)),
            ("gradient_correction".into(), Value::Scalar(corr)),
        ],
        residual,
        relative_residual,
        resolution: grid.resolution,
        tolerance: tol,
        verdict: if relative_residual < tol { Verdict::Pass } else { Verdict::Fail },
        refinement: None,
    })
}

/// Closure identity for closed hypersurfaces of flat space:
/// the vector `int sigma_k nu dS` vanishes for `0 <= k <= m`.
pub fn closure(
    imm: &Immersion,
    k: usize,
    grid_spec: &GridSpec,
    tol_scale: f64,
) -> Result<IdentityReport> {
    let m = 2usize;
    if imm.ambient.kind != Kind::Flat || imm.codim() != 1 {
        return Err(LabError::Argument(
            "closure needs a closed hypersurface of flat space".into(),
        ));
    }
    if k > m {
        return Err(LabError::Argument(format!("closure needs k <= m = {m}")));
    }
    let grid = build_grid(imm, grid_spec);
    let nodes = node_data(imm, &grid)?;
    let dim = imm.ambient_dim();
    let vec_integral = integrate_nodes_vec(&grid, &nodes, dim, |_, nd| {
        let p = nd.packet.as_ref().unwrap();
        linalg::scale(&nd.frame.normals[0].v, p.sigma[k])
    })?;
    let area = integrate_nodes(&grid, &nodes, |_, _| 1.0)?;
    let worst = vec_integral.iter().map(|c| c.abs()).fold(0.0, f64::max);
    let tol = tol_scale * area;
    Ok(IdentityReport {
        identity_id: "closure".into(),
        surface: imm.label.clone(),
        k,
        f: "1".into(),
        lhs: Value::Vector(vec_integral),
        rhs_terms: vec![("zero".into(), Value::Scalar(0.0))],
        residual: worst,
        relative_residual: worst / area,
        resolution: grid.resolution,
        tolerance: tol,
        verdict: if worst < tol { Verdict::Pass } else { Verdict::Fail },
        refinement: None,
    })
}

/// The weighted enclosed volume `int_Omega alpha = (1/n) int_Sigma (Y . nu)`
/// for an embedded hypersurface with outward normal. In flat space with the
/// position field this is `Vol(Omega)`.
pub fn weighted_volume(
    imm: &Immersion,
    field: &ConformalField,
    grid_spec: &GridSpec,
) -> Result<f64> {
    if imm.codim() != 1 {
        return Err(LabError::Argument("weighted_volume needs a hypersurface".into()));
    }
    let space = &imm.ambient;
    let n = space.intrinsic_dim() as f64;
    let grid = build_grid(imm, grid_spec);
    let frs = frames(imm, &grid)?;
    let flux = integrate(&grid, &frs, |_, fr| {
        space.inner(&field.value(&fr.x), &fr.normals[0].v)
    })?;
    Ok(flux / n)
}

/// Which inequality chain to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ChainVariant {
    /// `int r^p <= int sigma_1 r^{p+1} <= ... <= int sigma_k r^{p+k}` (flat).
    EucArea { p: i32 },
    /// `n Vol <= int r <= int sigma_1 r^2 <= ...` (flat, embedded).
    EucVolume,
    /// `Area <= int sigma_1 tan r <= int sigma_2 tan^2 r <= ...` (sphere).
    SphereArea,
    /// `int cos r <= int sigma_1 sin r <= int sigma_2 tan r sin r <= ...`.
    SphereMixed,
    /// `n int_Omega cos r <= int tan r cos r <= int sigma_1 tan^2 r cos r <= ...`.
    SphereVolume,
    /// `int cosh r <= int sigma_1 sinh r <= int sigma_2 tanh r sinh r <= ...`.
    HyperArea,
    /// `n int_Omega cosh r <= int tanh r cosh r <= ...` (hyperbolic, embedded).
    HyperVolume,
}

impl ChainVariant {
    pub fn id(&self) -> String {
        match self {
            ChainVariant::EucArea { p } => format!("chain/euc_area(p={p})"),
            ChainVariant::EucVolume => "chain/euc_volume".into(),
            ChainVariant::SphereArea => "chain/sphere_area".into(),
            ChainVariant::SphereMixed => "chain/sphere_mixed".into(),
            ChainVariant::SphereVolume => "chain/sphere_volume".into(),
            ChainVariant::HyperArea => "chain/hyper_area".into(),
            ChainVariant::HyperVolume => "chain/hyper_volume".into(),
        }
    }

    fn wants(&self) -> (Kind, f64, f64) {
        // (ambient kind, mu, q as f64) the variant is defined for.
        match self {
            ChainVariant::EucArea { .. } | ChainVariant::EucVolume => (Kind::Flat, 0.0, 0.0),
            ChainVariant::SphereArea | ChainVariant::SphereMixed | ChainVariant::SphereVolume => {
                (Kind::PseudoSphere, 1.0, 0.0)
            }
            ChainVariant::HyperArea | ChainVariant::HyperVolume => (Kind::PseudoSphere, -1.0, 1.0),
        }
    }
}

/// Evaluate an inequality chain up to level `k` (requires `sigma_k > 0`
/// pointwise; sphere variants additionally require the surface inside an
/// open hemisphere).
pub fn chain(
    imm: &Immersion,
    variant: ChainVariant,
    k: usize,
    grid_spec: &GridSpec,
    equality_tol: f64,
) -> Result<ChainReport> {
    let m = 2usize;
    if imm.codim() != 1 {
        return Err(LabError::Argument("chains need hypersurfaces".into()));
    }
    if k == 0 || k > m {
        return Err(LabError::Argument(format!("chains need 1 <= k <= m = {m}")));
    }
    let space = &imm.ambient;
    let (kind, mu, q) = variant.wants();
    if space.kind != kind || (kind == Kind::PseudoSphere && (space.mu != mu || space.q != q as usize))
    {
        return Err(LabError::Argument(format!(
            "{} is not defined on {:?}",
            variant.id(),
            space
        )));
    }

    let grid = build_grid(imm, grid_spec);
    let nodes = node_data(imm, &grid)?;
    let field = imm.natural_field()?;
    let ctx = WeightCtx::new(imm, &field);

    // Standing hypothesis sigma_k > 0 at every node.
    for nd in &nodes {
        let p = nd.packet.as_ref().unwrap();
        if p.sigma[k] <= 0.0 {
            return Err(LabError::Hypothesis(format!(
                "sigma_{k} = {:.6e} <= 0 at u = ({:.4}, {:.4})",
                p.sigma[k], nd.frame.u[0], nd.frame.u[1]
            )));
        }
    }
    // Hemisphere restriction for the sphere chains: max r < pi/2.
    if matches!(
        variant,
        ChainVariant::SphereArea | ChainVariant::SphereMixed | ChainVariant::SphereVolume
    ) {
        for nd in &nodes {
            let r = space.polar(&ctx.pole, &nd.frame.x)?.r;
            if r > std::f64::consts::FRAC_PI_2 - 1e-3 {
                return Err(LabError::Hypothesis(format!(
                    "surface leaves the open hemisphere (r = {r:.4} at u = ({:.4}, {:.4}))",
                    nd.frame.u[0], nd.frame.u[1]
                )));
            }
        }
    }

    let r_at = |nd: &NodeData| space.polar(&ctx.pole, &nd.frame.x).map(|p| p.r);
    let radii: Vec<f64> = nodes.iter().map(r_at).collect::<Result<_>>()?;
    let sigma_weighted = |j: usize, w: &dyn Fn(f64) -> f64| -> Result<f64> {
        integrate_nodes(&grid, &nodes, |i, nd| {
            let p = nd.packet.as_ref().unwrap();
            p.sigma[j] * w(radii[i])
        })
    };

    let mut values: Vec<f64> = Vec::new();
    match variant {
        ChainVariant::EucArea { p } => {
            for j in 0..=k {
                values.push(sigma_weighted(j, &|r| r.powi(p + j as i32))?);
            }
        }
        ChainVariant::EucVolume => {
            values.push(space.intrinsic_dim() as f64 * weighted_volume(imm, &field, grid_spec)?);
            for j in 0..=k {
                values.push(sigma_weighted(j, &|r| r.powi(1 + j as i32))?);
            }
        }
        ChainVariant::SphereArea => {
            for j in 0..=k {
                values.push(sigma_weighted(j, &|r| r.tan().powi(j as i32))?);
            }
        }
        ChainVariant::SphereMixed => {
            values.push(sigma_weighted(0, &|r| r.cos())?);
            for j in 1..=k {
                values.push(sigma_weighted(j, &|r| r.tan().powi(j as i32 - 1) * r.sin())?);
            }
        }
        ChainVariant::SphereVolume => {
            values.push(space.intrinsic_dim() as f64 * weighted_volume(imm, &field, grid_spec)?);
            for j in 0..=k {
                values.push(sigma_weighted(j, &|r| r.tan().powi(j as i32 + 1) * r.cos())?);
            }
        }
        ChainVariant::HyperArea => {
            values.push(sigma_weighted(0, &|r| r.cosh())?);
            for j in 1..=k {
                values.push(sigma_weighted(j, &|r| r.tanh().powi(j as i32 - 1) * r.sinh())?);
            }
        }
        ChainVariant::HyperVolume => {
            values.push(space.intrinsic_dim() as f64 * weighted_volume(imm, &field, grid_spec)?);
            for j in 0..=k {
                values.push(sigma_weighted(j, &|r| r.tanh().powi(j as i32 + 1) * r.cosh())?);
            }
        }
    }

    let slacks: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let min_slack = slacks.iter().copied().fold(f64::INFINITY, f64::min);
    let equality_flag = slacks.iter().all(|s| s.abs() < equality_tol);
    // Nonnegativity up to quadrature noise.
    let scale = values.iter().map(|v| v.abs()).fold(1.0, f64::max);
    let verdict = if min_slack > -1e-10 * scale { Verdict::Pass } else { Verdict::Fail };
    Ok(ChainReport {
        chain_id: variant.id(),
        surface: imm.label.clone(),
        k,
        values,
        slacks,
        min_slack,
        equality_flag,
        equality_tol,
        resolution: grid.resolution,
        verdict,
    })
}

/// Coordinate-free vector identity on a pseudo-sphere `M_{p,q}(mu)`: for a
/// closed hypersurface and any smooth weight `f`, as a vector of `R^{p,q}`,
///
/// `int f sigma_k X + mu int f sigma_{k+1} nu
///    - mu/((m-k) C(m,k)) int T_k(grad f) = 0`.
pub fn vector_identity(
    imm: &Immersion,
    f: &WeightSpec,
    k: usize,
    grid_spec: &GridSpec,
    tol: f64,
) -> Result<IdentityReport> {
    let m = 2usize;
    if imm.ambient.kind != Kind::PseudoSphere || imm.codim() != 1 {
        return Err(LabError::Argument(
            "vector_identity needs a hypersurface of a pseudo-sphere".into(),
        ));
    }
    if k > m - 1 {
        return Err(LabError::Argument(format!("vector_identity needs k <= {}", m - 1)));
    }
    let space = &imm.ambient;
    let mu = space.mu;
    let dim = imm.ambient_dim();
    let grid = build_grid(imm, grid_spec);
    let nodes = node_data(imm, &grid)?;
    let field = imm.natural_field()?;
    let ctx = WeightCtx::new(imm, &field);
    let coef = -mu / ((m - k) as f64 * binomial(m, k));

    let fvals: Vec<f64> =
        nodes.iter().map(|nd| weights::value(f, &ctx, &nd.frame)).collect::<Result<_>>()?;
    let grads: Vec<Vec<f64>> =
        nodes.iter().map(|nd| weights::gradient(f, &ctx, &nd.frame)).collect::<Result<_>>()?;
    let t1 = integrate_nodes_vec(&grid, &nodes, dim, |i, nd| {
        let p = nd.packet.as_ref().unwrap();
        linalg::scale(&nd.frame.x, fvals[i] * p.sigma[k])
    })?;
    let t2 = integrate_nodes_vec(&grid, &nodes, dim, |i, nd| {
        let p = nd.packet.as_ref().unwrap();
        linalg::scale(&nd.frame.normals[0].v, mu * fvals[i] * p.sigma[k + 1])
    })?;
    let t3 = integrate_nodes_vec(&grid, &nodes, dim, |i, nd| {
        let p = nd.packet.as_ref().unwrap();
        let gonb = nd.frame.onb_coords(space, &grads[i]);
        let tg = p.t[k].apply(&gonb);
        linalg::scale(&nd.frame.from_onb([tg[0], tg[1]]), coef)
    })?;

    let total: Vec<f64> = (0..dim).map(|c| t1[c] + t2[c] + t3[c]).collect();
    let residual = total.iter().map(|c| c.abs()).fold(0.0, f64::max);
    let scale: f64 = [&t1, &t2, &t3]
        .iter()
        .map(|t| t.iter().map(|c| c.abs()).fold(0.0, f64::max))
        .sum::<f64>()
        + 1.0;
    let relative_residual = residual / scale;
    Ok(IdentityReport {
        identity_id: "vector".into(),
        surface: imm.label.clone(),
        k,
        f: f.label(),
        lhs: Value::Vector(total),
        rhs_terms: vec![
            ("position_term".into(), Value::Vector(t1)),
            ("normal_term".into(), Value::Vector(t2)),
            ("gradient_term".into(), Value::Vector(t3)),
        ],
        residual,
        relative_residual,
        resolution: grid.resolution,
        tolerance: tol,
        verdict: if relative_residual < tol { Verdict::Pass } else { Verdict::Fail },
        refinement: None,
    })
}

/// Symmetric-tensor choices for the divergence-formula residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tensor", rename_all = "snake_case")]
pub enum TensorSpec {
    /// The Newton transformation `T_k` (divergence-free in constant
    /// curvature; the `div T` term is dropped analytically).
    Newton { k: usize },
    /// The identity map (`T = g`), also divergence-free.
    Metric,
    /// Pullback of a constant ambient symmetric 2-tensor with seeded
    /// pseudo-random entries; `div T` is evaluated by forward-mode jets.
    AmbientPullback { seed: u64 },
    /// Doubly periodic parameter-space tensor field (tori only); `div T`
    /// evaluated by jets.
    ParamField { seed: u64 },
}

impl TensorSpec {
    pub fn label(&self) -> String {
        match self {
            TensorSpec::Newton { k } => format!("T_{k}"),
            TensorSpec::Metric => "g".into(),
            TensorSpec::AmbientPullback { seed } => format!("pullback({seed})"),
            TensorSpec::ParamField { seed } => format!("param_field({seed})"),
        }
    }
}

/// Integral of the full four-term divergence formula
///
/// `div(f T(Y^T)) = <T grad f, Y^T> + f (div T)(Y^T)
///     + f/2 <T-flat, L_Y g> - f <T-flat, A^{Y_perp}>`
///
/// over a closed surface, which must vanish by the divergence theorem. The
/// Lie-derivative term is evaluated from jets of the field along the surface
/// (not from the closed form 2 alpha g), so this stresses every ingredient.
pub fn divergence_residual(
    imm: &Immersion,
    tensor: &TensorSpec,
    f: &WeightSpec,
    field: &ConformalField,
    grid_spec: &GridSpec,
    tol: f64,
) -> Result<IdentityReport> {
    if imm.codim() != 1 {
        return Err(LabError::Argument("divergence_residual needs a hypersurface".into()));
    }
    if matches!(tensor, TensorSpec::ParamField { .. })
        && imm.axes.iter().any(|a| matches!(a, crate::immersion::Axis::Interval(..)))
    {
        return Err(LabError::Argument(
            "param_field tensors need fully periodic charts (tori)".into(),
        ));
    }
    let space = &imm.ambient;
    let grid = build_grid(imm, grid_spec);
    let nodes = node_data(imm, &grid)?;
    let ctx = WeightCtx::new(imm, field);

    let mut term_grad = Vec::with_capacity(nodes.len());
    let mut term_div = Vec::with_capacity(nodes.len());
    let mut term_conf = Vec::with_capacity(nodes.len());
    let mut term_shape = Vec::with_capacity(nodes.len());

    for nd in &nodes {
        let frame = &nd.frame;
        let fv = weights::value(f, &ctx, frame)?;
        let grad_f = weights::gradient(f, &ctx, frame)?;
        let y = field.value(&frame.x);

        // T-flat in the coordinate basis plus, when needed, the covariant
        // divergence by jets.
        let (t_flat, div_t) = tensor_flat_and_divergence(imm, tensor, nd)?;

        // <T grad f, Y^T>: raise one index of T-flat against grad f's
        // covariant chart components.
        let df = [space.inner(&grad_f, &frame.d1[0]), space.inner(&grad_f, &frame.d1[1])];
        // contravariant components of grad f
        let gf_up = [
            frame.g_inv[0][0] * df[0] + frame.g_inv[0][1] * df[1],
            frame.g_inv[1][0] * df[0] + frame.g_inv[1][1] * df[1],
        ];
        let yt_cov = [space.inner(&y, &frame.d1[0]), space.inner(&y, &frame.d1[1])];
        let yt_up = [
            frame.g_inv[0][0] * yt_cov[0] + frame.g_inv[0][1] * yt_cov[1],
            frame.g_inv[1][0] * yt_cov[0] + frame.g_inv[1][1] * yt_cov[1],
        ];
        let mut tgf = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                tgf += t_flat[i][j] * gf_up[i] * yt_up[j];
            }
        }
        term_grad.push(tgf);

        // f (div T)(Y^T): div_t is covariant.
        term_div.push(fv * (div_t[0] * yt_up[0] + div_t[1] * yt_up[1]));

        // f/2 <T-flat, L_Y g>: the Lie derivative along the surface from the
        // exact jet of Y circle phi.
        let xj = imm.eval([
            crate::jet::Jet2::variable(frame.u[0], 0),
            crate::jet::Jet2::variable(frame.u[1], 1),
        ]);
        let yj = field.value_jet(&xj);
        // dY/du_i as plain vectors.
        let dy: [Vec<f64>; 2] = [
            yj.iter().map(|j| j.d[0]).collect(),
            yj.iter().map(|j| j.d[1]).collect(),
        ];
        let mut lie = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                lie[i][j] =
                    space.inner(&dy[i], &frame.d1[j]) + space.inner(&dy[j], &frame.d1[i]);
            }
        }
        term_conf.push(0.5 * fv * tensor_inner(&t_flat, &lie, &frame.g_inv));

        // f <T-flat, A^{Y_perp}>: A^{Y_perp}_ij = sum_beta eps_beta
        // (Y . nu_beta) A^beta_ij.
        let mut a_perp = [[0.0; 2]; 2];
        for (beta, nu) in frame.normals.iter().enumerate() {
            let c = nu.eps * space.inner(&y, &nu.v);
            for i in 0..2 {
                for j in 0..2 {
                    a_perp[i][j] += c * frame.a_coord[beta][i][j];
                }
            }
        }
        term_shape.push(-fv * tensor_inner(&t_flat, &a_perp, &frame.g_inv));
    }

    let mut sums = [0.0f64; 4];
    for (si, vals) in [&term_grad, &term_div, &term_conf, &term_shape].iter().enumerate() {
        let mut terms = Vec::with_capacity(nodes.len());
        for (i, nd) in nodes.iter().enumerate() {
            terms.push(grid.weights[i] * vals[i] * nd.frame.sqrt_det_g);
        }
        sums[si] = linalg::kahan_sum(terms);
    }
    let total = sums.iter().sum::<f64>();
    let area = integrate_nodes(&grid, &nodes, |_, _| 1.0)?;
    let scale = sums.iter().map(|s| s.abs()).sum::<f64>() + area;
    let residual = total.abs();
    Ok(IdentityReport {
        identity_id: format!("div/{}", tensor.label()),
        surface: imm.label.clone(),
        k: match tensor {
            TensorSpec::Newton { k } => *k,
            _ => 0,
        },
        f: f.label(),
        lhs: Value::Scalar(total),
        rhs_terms: vec![
            ("gradient_term".into(), Value::Scalar(sums[0])),
            ("divergence_term".into(), Value::Scalar(sums[1])),
            ("conformal_term".into(), Value::Scalar(sums[2])),
            ("shape_term".into(), Value::Scalar(sums[3])),
        ],
        residual,
        relative_residual: residual / scale,
        resolution: grid.resolution,
        tolerance: tol,
        verdict: if residual < tol * area { Verdict::Pass } else { Verdict::Fail },
        refinement: None,
    })
}

/// `<S, T>_g` for two (0,2) tensors in chart components.
fn tensor_inner(s: &[[f64; 2]; 2], t: &[[f64; 2]; 2], g_inv: &[[f64; 2]; 2]) -> f64 {
    let mut total = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    total += g_inv[i][a] * g_inv[j][b] * s[i][j] * t[a][b];
                }
            }
        }
    }
    total
}

/// The (0,2) components of the test tensor in the chart basis, and its
/// covariant divergence (covector) when it is not divergence-free by theory.
fn tensor_flat_and_divergence(
    imm: &Immersion,
    tensor: &TensorSpec,
    nd: &NodeData,
) -> Result<([[f64; 2]; 2], [f64; 2])> {
    let space = &imm.ambient;
    let frame = &nd.frame;
    match tensor {
        TensorSpec::Newton { k } => {
            let m = 2usize;
            if *k > m {
                return Err(LabError::Argument(format!("Newton tensor index {k} > m = {m}")));
            }
            // T_m vanishes identically.
            if *k == m {
                return Ok(([[0.0; 2]; 2], [0.0; 2]));
            }
            let p = nd.packet.as_ref().ok_or_else(|| {
                LabError::Argument("Newton tensors need a hypersurface packet".into())
            })?;
            // T-flat(d1_i, d1_j) = q_i^T T_onb q_j with q_i the orthonormal
            // coordinates of d1_i.
            let q = [
                frame.onb_coords(space, &frame.d1[0]),
                frame.onb_coords(space, &frame.d1[1]),
            ];
            let mut t_flat = [[0.0; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    let tq = p.t[*k].apply(&q[j]);
                    t_flat[i][j] = q[i][0] * tq[0] + q[i][1] * tq[1];
                }
            }
            Ok((t_flat, [0.0; 2])) // div T_k = 0 in constant curvature
        }
        TensorSpec::Metric => Ok((frame.g, [0.0; 2])),
        TensorSpec::AmbientPullback { seed } => {
            let n = space.ambient_dim();
            let mut rng = SplitMix64::new(*seed);
            let mut s = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in 0..=i {
                    let v = rng.next_signed();
                    s[i][j] = v;
                    s[j][i] = v;
                }
            }
            let cj = crate::quadrature::chart_jets(imm, frame.u);
            // T-flat_ij = d1_i . S . d1_j as jets (Euclidean contraction of
            // the constant coefficient matrix; the pullback of a plain
            // symmetric bilinear form).
            let mut t_jets = [[crate::jet::Jet2::ZERO; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    let mut acc = crate::jet::Jet2::ZERO;
                    for a in 0..n {
                        for b in 0..n {
                            if s[a][b] != 0.0 {
                                acc = acc + cj.d1[i][a] * cj.d1[j][b] * s[a][b];
                            }
                        }
                    }
                    t_jets[i][j] = acc;
                }
            }
            let (t_flat, div) = divergence_by_jets(&cj, &t_jets);
            Ok((t_flat, div))
        }
        TensorSpec::ParamField { seed } => {
            let mut rng = SplitMix64::new(*seed);
            let a: Vec<f64> = (0..9).map(|_| rng.next_signed()).collect();
            let cj = crate::quadrature::chart_jets(imm, frame.u);
            let (u, v) = (
                crate::jet::Jet2::variable(frame.u[0], 0),
                crate::jet::Jet2::variable(frame.u[1], 1),
            );
            let t00 = u.sin() * a[0] + v.cos() * a[1] + (u + v).cos() * a[2] + 2.0;
            let t01 = (u * 2.0).cos() * a[3] + v.sin() * a[4] + a[5];
            let t11 = u.cos() * a[6] + (v * 2.0).sin() * a[7] + a[8] + 2.0;
            let t_jets = [[t00, t01], [t01, t11]];
            let (t_flat, div) = divergence_by_jets(&cj, &t_jets);
            Ok((t_flat, div))
        }
    }
}

/// Covariant divergence (div T)_j = nabla_i T^i_j of a symmetric (0,2)
/// tensor given as parameter jets, using first-order chart jets.
fn divergence_by_jets(
    cj: &crate::quadrature::ChartJets,
    t_jets: &[[crate::jet::Jet2; 2]; 2],
) -> ([[f64; 2]; 2], [f64; 2]) {
    // Mixed components T^i_j = g^{il} T_lj as jets.
    let mut t_mixed = [[crate::jet::Jet2::ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let mut acc = crate::jet::Jet2::ZERO;
            for l in 0..2 {
                acc = acc + cj.g_inv[i][l] * t_jets[l][j];
            }
            t_mixed[i][j] = acc;
        }
    }
    let gamma = &cj.gamma;
    let mut div = [0.0; 2];
    for j in 0..2 {
        let mut acc = 0.0;
        for i in 0..2 {
            acc += t_mixed[i][j].d[i];
            for l in 0..2 {
                acc += gamma[i][i][l] * t_mixed[l][j].v;
                acc -= gamma[l][i][j] * t_mixed[i][l].v;
            }
        }
        div[j] = acc;
    }
    let t_flat = [
        [t_jets[0][0].v, t_jets[0][1].v],
        [t_jets[1][0].v, t_jets[1][1].v],
    ];
    (t_flat, div)
}
