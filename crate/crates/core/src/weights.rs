//! Weight functions `f` for the integral identities, with closed-form
//! surface gradients.
//!
//! The two families that carry the identities are radial weights `f = F(r)`
//! (with `grad f = eps_r F'(r) Y^T / s(r)`, where `Y = s(r) d_r` is the
//! radial conformal field, `s = r, sin r, sinh r, cosh r` per space, and
//! `eps_r` is the causal sign of the radial direction: -1 in de Sitter,
//! +1 elsewhere) and support-type weights `f = F(u)` with `u = Y . nu`
//! (with `grad u = A^nu(Y^T)` for the standard shape operator). Parameter
//! and coordinate weights round out the test surface.
//!
//! The generic differentiation path (chaining the weight through the
//! immersion jet) is exercised against these closed forms in the tests.

use crate::ambient::{ConformalField, Kind};
use crate::error::{LabError, Result};
use crate::immersion::{Immersion, PointFrame};
use crate::jet::Jet2;
use crate::linalg;
use serde::{Deserialize, Serialize};

/// Minimum admissible distance from the pole at quadrature nodes for radial
/// weights in flat space (instead of silently translating the surface).
pub const MIN_RADIUS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialFun {
    Sin,
    Cos,
    Sinh,
    Cosh,
    Tan,
    Tanh,
}

impl RadialFun {
    fn eval(&self, r: f64) -> (f64, f64) {
        match self {
            RadialFun::Sin => (r.sin(), r.cos()),
            RadialFun::Cos => (r.cos(), -r.sin()),
            RadialFun::Sinh => (r.sinh(), r.cosh()),
            RadialFun::Cosh => (r.cosh(), r.sinh()),
            RadialFun::Tan => (r.tan(), 1.0 / (r.cos() * r.cos())),
            RadialFun::Tanh => (r.tanh(), 1.0 / (r.cosh() * r.cosh())),
        }
    }

    fn jet(&self, r: crate::jet::Jet2) -> crate::jet::Jet2 {
        match self {
            RadialFun::Sin => r.sin(),
            RadialFun::Cos => r.cos(),
            RadialFun::Sinh => r.sinh(),
            RadialFun::Cosh => r.cosh(),
            RadialFun::Tan => r.sin() / r.cos(),
            RadialFun::Tanh => r.sinh() / r.cosh(),
        }
    }

    fn name(&self) -> &'static str {
        match self {
            RadialFun::Sin => "sin",
            RadialFun::Cos => "cos",
            RadialFun::Sinh => "sinh",
            RadialFun::Cosh => "cosh",
            RadialFun::Tan => "tan",
            RadialFun::Tanh => "tanh",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UFun {
    /// F(u) = u
    Identity,
    /// F(u) = u^2
    Square,
}

impl UFun {
    fn eval(&self, u: f64) -> (f64, f64) {
        match self {
            UFun::Identity => (u, 1.0),
            UFun::Square => (u * u, 2.0 * u),
        }
    }
}

/// A weight function on the surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightSpec {
    Const { c: f64 },
    /// `r^p` with `r` the geodesic distance from the context pole.
    RadialPow { p: i32 },
    /// Powers of trig/hyperbolic functions of `r`, e.g. `tan^2 r`.
    RadialTrig { fun: RadialFun, p: i32 },
    /// `F(u)` with `u = Y . nu` (hypersurfaces only).
    OfU { f: UFun },
    /// `sin(u_axis)`: a function of one chart parameter (periodic axes only).
    ParamSin { axis: usize },
    /// Ambient coordinate function `x^c`.
    Coord { c: usize },
}

impl WeightSpec {
    pub const ONE: WeightSpec = WeightSpec::Const { c: 1.0 };

    pub fn label(&self) -> String {
        match self {
            WeightSpec::Const { c } => format!("const({c})"),
            WeightSpec::RadialPow { p } => format!("r^{p}"),
            WeightSpec::RadialTrig { fun, p } => format!("{}(r)^{p}", fun.name()),
            WeightSpec::OfU { f: UFun::Identity } => "u".into(),
            WeightSpec::OfU { f: UFun::Square } => "u^2".into(),
            WeightSpec::ParamSin { axis } => format!("sin(u{axis})"),
            WeightSpec::Coord { c } => format!("x{c}"),
        }
    }
}

/// Everything a weight needs to evaluate itself at a frame.
pub struct WeightCtx<'a> {
    pub imm: &'a Immersion,
    pub field: &'a ConformalField,
    pub pole: Vec<f64>,
}

impl<'a> WeightCtx<'a> {
    pub fn new(imm: &'a Immersion, field: &'a ConformalField) -> WeightCtx<'a> {
        let pole = match field.pole() {
            Some(p) => p.to_vec(),
            None => imm.natural_pole(),
        };
        WeightCtx { imm, field, pole }
    }

    /// Metric factor `s(r)` of the radial field and the causal sign of the
    /// radial direction.
    fn radial_scale(&self, r: f64) -> (f64, f64) {
        let space = &self.imm.ambient;
        match space.kind {
            Kind::Flat => (r, 1.0),
            Kind::PseudoSphere => {
                if space.mu > 0.0 && space.q == 0 {
                    (r.sin(), 1.0)
                } else if space.mu < 0.0 {
                    (r.sinh(), 1.0)
                } else {
                    (r.cosh(), -1.0)
                }
            }
        }
    }

    fn polar_r(&self, frame: &PointFrame) -> Result<f64> {
        let space = &self.imm.ambient;
        let p = space.polar(&self.pole, &frame.x)?;
        if space.kind == Kind::Flat && p.r < MIN_RADIUS {
            return Err(LabError::Domain(format!(
                "radial weight needs min r > {MIN_RADIUS:.0e} at quadrature nodes \
                 (got r = {:.3e}); move the pole off the surface",
                p.r
            )));
        }
        Ok(p.r)
    }

    /// The radial conformal field around the context pole.
    fn radial_field(&self) -> Result<ConformalField> {
        ConformalField::radial(self.imm.ambient, self.pole.clone())
    }

    /// `grad F(r) = eps_r F'(r) Y^T / s(r)` for any radial profile.
    fn radial_gradient(&self, frame: &PointFrame, r: f64, fprime: f64) -> Result<Vec<f64>> {
        let (s, eps_r) = self.radial_scale(r);
        let y = self.radial_field()?.value(&frame.x);
        let yt = frame.tangential(&self.imm.ambient, &y);
        Ok(linalg::scale(&yt, eps_r * fprime / s))
    }
}

/// Weight value at a frame.
pub fn value(w: &WeightSpec, ctx: &WeightCtx, frame: &PointFrame) -> Result<f64> {
    let space = &ctx.imm.ambient;
    match w {
        WeightSpec::Const { c } => Ok(*c),
        WeightSpec::RadialPow { p } => Ok(ctx.polar_r(frame)?.powi(*p)),
        WeightSpec::RadialTrig { fun, p } => Ok(fun.eval(ctx.polar_r(frame)?).0.powi(*p)),
        WeightSpec::OfU { f } => {
            let u = support_u(ctx, frame)?;
            Ok(f.eval(u).0)
        }
        WeightSpec::ParamSin { axis } => Ok(frame.u[*axis].sin()),
        WeightSpec::Coord { c } => {
            if *c >= space.ambient_dim() {
                return Err(LabError::Argument(format!("coordinate index {c} out of range")));
            }
            Ok(frame.x[*c])
        }
    }
}

/// Surface gradient of the weight as an ambient tangent vector.
pub fn gradient(w: &WeightSpec, ctx: &WeightCtx, frame: &PointFrame) -> Result<Vec<f64>> {
    let space = &ctx.imm.ambient;
    let n = space.ambient_dim();
    match w {
        WeightSpec::Const { .. } => Ok(vec![0.0; n]),
        WeightSpec::RadialPow { p } => {
            let r = ctx.polar_r(frame)?;
            let fprime = *p as f64 * r.powi(p - 1);
            ctx.radial_gradient(frame, r, fprime)
        }
        WeightSpec::RadialTrig { fun, p } => {
            let r = ctx.polar_r(frame)?;
            let (v, dv) = fun.eval(r);
            let fprime = *p as f64 * v.powi(p - 1) * dv;
            ctx.radial_gradient(frame, r, fprime)
        }
        WeightSpec::OfU { f } => {
            let u = support_u(ctx, frame)?;
            let fprime = f.eval(u).1;
            // grad u = A^nu(Y^T), standard shape operator.
            let y = ctx.field.value(&frame.x);
            let yt = frame.tangential(space, &y);
            let yt_onb = frame.onb_coords(space, &yt);
            let a = frame.shape_onb[0].apply(&[yt_onb[0], yt_onb[1]]);
            Ok(linalg::scale(&frame.from_onb([a[0], a[1]]), fprime))
        }
        WeightSpec::ParamSin { axis } => {
            let df = match axis {
                0 => [frame.u[0].cos(), 0.0],
                _ => [0.0, frame.u[1].cos()],
            };
            Ok(gradient_from_param_derivs(frame, df))
        }
        WeightSpec::Coord { c } => {
            let df = [frame.d1[0][*c], frame.d1[1][*c]];
            Ok(gradient_from_param_derivs(frame, df))
        }
    }
}

/// `u = Y . nu` for the context field (hypersurfaces only).
pub fn support_u(ctx: &WeightCtx, frame: &PointFrame) -> Result<f64> {
    if frame.normals.len() != 1 {
        return Err(LabError::Argument(
            "support-type weights f(u) need a hypersurface".into(),
        ));
    }
    let space = &ctx.imm.ambient;
    let y = ctx.field.value(&frame.x);
    Ok(space.inner(&y, &frame.normals[0].v))
}

/// Raise chart derivatives to the ambient tangent vector
/// `grad f = g^{ij} (d_j f) d1_i`.
pub fn gradient_from_param_derivs(frame: &PointFrame, df: [f64; 2]) -> Vec<f64> {
    let n = frame.x.len();
    let mut out = vec![0.0; n];
    for i in 0..2 {
        let mut coef = 0.0;
        for j in 0..2 {
            coef += frame.g_inv[i][j] * df[j];
        }
        linalg::axpy(&mut out, coef, &frame.d1[i]);
    }
    out
}

/// Weight value as a parameter jet (generic differentiation path; not
/// available for support weights, whose closed form is used instead).
pub fn value_jet(w: &WeightSpec, ctx: &WeightCtx, u: [f64; 2]) -> Result<Jet2> {
    let space = &ctx.imm.ambient;
    let xj = ctx.imm.eval([Jet2::variable(u[0], 0), Jet2::variable(u[1], 1)]);
    match w {
        WeightSpec::Const { c } => Ok(Jet2::constant(*c)),
        WeightSpec::RadialPow { p } => {
            let r = radial_jet(space, &ctx.pole, &xj);
            Ok(r.powi(*p))
        }
        WeightSpec::RadialTrig { fun, p } => {
            let r = radial_jet(space, &ctx.pole, &xj);
            Ok(fun.jet(r).powi(*p))
        }
        WeightSpec::ParamSin { axis } => Ok(Jet2::variable(u[*axis], *axis).sin()),
        WeightSpec::Coord { c } => Ok(xj[*c]),
        WeightSpec::OfU { .. } => Err(LabError::Argument(
            "support weights have no parameter-jet path; use the closed-form gradient".into(),
        )),
    }
}

/// Geodesic distance from the pole as a parameter jet.
fn radial_jet(space: &crate::ambient::AmbientSpace, pole: &[f64], xj: &[Jet2]) -> Jet2 {
    let polej: Vec<Jet2> = pole.iter().map(|&c| Jet2::constant(c)).collect();
    match space.kind {
        Kind::Flat => {
            let diff: Vec<Jet2> = xj.iter().zip(&polej).map(|(a, b)| *a - *b).collect();
            space.inner_jet(&diff, &diff).sqrt()
        }
        Kind::PseudoSphere => {
            let ip = space.inner_jet(&polej, xj);
            if space.mu > 0.0 && space.q == 0 {
                ip.acos()
            } else if space.mu < 0.0 {
                (-ip).acosh()
            } else {
                ip.asinh()
            }
        }
    }
}
