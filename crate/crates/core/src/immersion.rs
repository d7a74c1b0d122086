//! Parametric immersions of closed surfaces (`m = 2`) into the ambient
//! spaces, with exact first/second derivatives via [`crate::jet::Jet2`] and
//! per-point geometric frames.
//!
//! The built-in zoo covers every surface family the identity engine and the
//! probes consume: round spheres and ellipsoids in `R^3`, tori of revolution,
//! radial graphs over `S^2`, geodesic spheres (optionally perturbed by a
//! spherical-harmonic bump) in `S^3` and `H^3`, spacelike slice graphs in
//! `dS_3`, and the flat product torus `S^1(a) x S^1(b)` in `R^4`.
//!
//! Sign conventions. The scalar second fundamental form stored in a frame is
//! `A^nu_ij = -inner(d2_ij, nu)` (second derivatives projected to the
//! pseudo-sphere tangent space first when the ambient is curved). With the
//! outward orientation this makes the round sphere's shape operator the
//! identity: positive principal curvatures on spheres. Timelike normals
//! (de Sitter slices) carry `eps = -1`; the curvature packets downstream
//! absorb that sign so the integral identities hold uniformly.

use crate::ambient::{AmbientSpace, ConformalField, Kind};
use crate::error::{LabError, Result};
use crate::jet::Jet2;
use crate::linalg::{self, Mat};
use serde_json::Value;

/// One parameter axis of the (product) domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Axis {
    Interval(f64, f64),
    Periodic(f64),
}

impl Axis {
    pub fn length(&self) -> f64 {
        match *self {
            Axis::Interval(a, b) => b - a,
            Axis::Periodic(p) => p,
        }
    }
}

/// Spherical-harmonic bump used by the perturbed families. Restrictions of
/// homogeneous harmonic polynomials, so they are smooth across the chart
/// poles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bump {
    /// (3 cos^2 t - 1)/2 (zonal, degree 2)
    Zonal2,
    /// 3 sin^2 t cos(2 phi) (sectoral, degree 2)
    Sectoral22,
}

impl Bump {
    pub fn parse(l: i64, m: i64) -> Result<Bump> {
        match (l, m) {
            (2, 0) => Ok(Bump::Zonal2),
            (2, 2) => Ok(Bump::Sectoral22),
            _ => Err(LabError::Config(format!(
                "unsupported harmonic bump (l={l}, m={m}); supported: (2,0), (2,2)"
            ))),
        }
    }

    fn eval(&self, theta: Jet2, phi: Jet2) -> Jet2 {
        match self {
            Bump::Zonal2 => {
                let c = theta.cos();
                (c * c * 3.0 - 1.0) * 0.5
            }
            Bump::Sectoral22 => {
                let s = theta.sin();
                s * s * (phi * 2.0).cos() * 3.0
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum MapKind {
    RoundSphere { radius: f64, center: Vec<f64> },
    Ellipsoid { a: f64, b: f64, c: f64 },
    Torus { big_r: f64, small_r: f64 },
    ProductTorus { a: f64, b: f64 },
    /// Geodesic radial graph r = r0 (1 + eps * bump) around the standard pole
    /// of the ambient space; covers round/perturbed geodesic spheres in all
    /// four ambients and the de Sitter slice graphs.
    RadialGraph { r0: f64, eps: f64, bump: Bump },
}

/// A parametrized immersion of a closed surface.
#[derive(Debug, Clone)]
pub struct Immersion {
    pub label: String,
    pub ambient: AmbientSpace,
    pub axes: [Axis; 2],
    map: MapKind,
}

/// Position and derivatives of the immersion at one parameter point.
#[derive(Debug, Clone)]
pub struct SurfaceJet {
    pub x: Vec<f64>,
    pub d1: [Vec<f64>; 2],
    /// Second derivatives; symmetric in the two indices.
    pub d2: [[Vec<f64>; 2]; 2],
}

#[derive(Debug, Clone)]
pub struct Normal {
    pub v: Vec<f64>,
    /// inner(v, v), +1 or -1.
    pub eps: f64,
}

/// Full first/second-order geometric data at one surface point.
#[derive(Debug, Clone)]
pub struct PointFrame {
    pub u: [f64; 2],
    pub x: Vec<f64>,
    pub d1: [Vec<f64>; 2],
    pub d2: [[Vec<f64>; 2]; 2],
    pub g: [[f64; 2]; 2],
    pub g_inv: [[f64; 2]; 2],
    pub sqrt_det_g: f64,
    /// Orthonormal tangent basis `E_i = sum_j onb_coef[i][j] d1_j`.
    pub onb: [Vec<f64>; 2],
    pub onb_coef: [[f64; 2]; 2],
    pub normals: Vec<Normal>,
    /// `A^beta_ij = -inner(d2_ij, nu_beta)` in the coordinate basis.
    pub a_coord: Vec<[[f64; 2]; 2]>,
    /// Shape operators in the orthonormal basis (symmetric 2x2).
    pub shape_onb: Vec<Mat>,
}

impl Immersion {
    pub fn codim(&self) -> usize {
        self.ambient.intrinsic_dim() - 2
    }

    /// Number of ambient coordinates.
    pub fn ambient_dim(&self) -> usize {
        self.ambient.ambient_dim()
    }

    /// The pole around which the radial families are built, also the natural
    /// pole for radial weights and fields on this surface.
    pub fn natural_pole(&self) -> Vec<f64> {
        let n = self.ambient_dim();
        match self.ambient.kind {
            Kind::Flat => match &self.map {
                MapKind::RoundSphere { center, .. } => center.clone(),
                _ => vec![0.0; n],
            },
            Kind::PseudoSphere => {
                let mut pole = vec![0.0; n];
                // de Sitter: timelike axis -e_n; sphere/hyperbolic: pole e_n.
                if self.ambient.mu > 0.0 && self.ambient.q == 1 {
                    pole[n - 1] = -1.0;
                } else {
                    pole[n - 1] = 1.0;
                }
                pole
            }
        }
    }

    /// The radial conformal field this surface is naturally paired with
    /// (position field in flat space when centered at the origin).
    pub fn natural_field(&self) -> Result<ConformalField> {
        ConformalField::radial(self.ambient, self.natural_pole())
    }

    /// Evaluate the map with jets seeded at `u`.
    pub fn jet(&self, u: [f64; 2]) -> SurfaceJet {
        let uj = [Jet2::variable(u[0], 0), Jet2::variable(u[1], 1)];
        let xj = self.eval(uj);
        let n = xj.len();
        let mut x = vec![0.0; n];
        let mut d1 = [vec![0.0; n], vec![0.0; n]];
        let mut d2 = [
            [vec![0.0; n], vec![0.0; n]],
            [vec![0.0; n], vec![0.0; n]],
        ];
        for (c, j) in xj.iter().enumerate() {
            x[c] = j.v;
            for i in 0..2 {
                d1[i][c] = j.d[i];
                for k in 0..2 {
                    d2[i][k][c] = j.h[i][k];
                }
            }
        }
        SurfaceJet { x, d1, d2 }
    }

    /// Evaluate the map itself in jet arithmetic (used by weights and fields
    /// that chain through the immersion).
    pub fn eval(&self, u: [Jet2; 2]) -> Vec<Jet2> {
        let (t, p) = (u[0], u[1]);
        match &self.map {
            MapKind::RoundSphere { radius, center } => {
                let w = unit_sphere_dir(t, p);
                vec![
                    w[0] * *radius + center[0],
                    w[1] * *radius + center[1],
                    w[2] * *radius + center[2],
                ]
            }
            MapKind::Ellipsoid { a, b, c } => {
                let w = unit_sphere_dir(t, p);
                vec![w[0] * *a, w[1] * *b, w[2] * *c]
            }
            MapKind::Torus { big_r, small_r } => {
                let ring = *big_r + *small_r * p.cos();
                vec![ring * t.cos(), ring * t.sin(), p.sin() * *small_r]
            }
            MapKind::ProductTorus { a, b } => {
                vec![t.cos() * *a, t.sin() * *a, p.cos() * *b, p.sin() * *b]
            }
            MapKind::RadialGraph { r0, eps, bump } => {
                let r = if *eps == 0.0 {
                    Jet2::constant(*r0)
                } else {
                    (bump.eval(t, p) * *eps + 1.0) * *r0
                };
                let w = unit_sphere_dir(t, p);
                match self.ambient.kind {
                    Kind::Flat => vec![w[0] * r, w[1] * r, w[2] * r],
                    Kind::PseudoSphere => {
                        if self.ambient.mu > 0.0 && self.ambient.q == 0 {
                            // S^3 around pole e4
                            let (s, c) = (r.sin(), r.cos());
                            vec![w[0] * s, w[1] * s, w[2] * s, c]
                        } else if self.ambient.mu < 0.0 {
                            // H^3 upper sheet around pole e4
                            let (s, c) = (r.sinh(), r.cosh());
                            vec![w[0] * s, w[1] * s, w[2] * s, c]
                        } else {
                            // dS_3 slicing X = (cosh r w, sinh r)
                            let (s, c) = (r.sinh(), r.cosh());
                            vec![w[0] * c, w[1] * c, w[2] * c, s]
                        }
                    }
                }
            }
        }
    }

    /// Assemble the geometric frame at `u`.
    pub fn frame(&self, u: [f64; 2]) -> Result<PointFrame> {
        let jet = self.jet(u);
        let space = &self.ambient;
        if !space.contains(&jet.x, 1e-10) {
            return Err(LabError::Domain(format!(
                "{}: map output left the pseudo-sphere at u=({}, {})",
                self.label, u[0], u[1]
            )));
        }

        let g = [
            [space.inner(&jet.d1[0], &jet.d1[0]), space.inner(&jet.d1[0], &jet.d1[1])],
            [space.inner(&jet.d1[1], &jet.d1[0]), space.inner(&jet.d1[1], &jet.d1[1])],
        ];
        let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
        if !(det > 1e-16 * (g[0][0].abs() + g[1][1].abs()).powi(2).max(1e-30)) || g[0][0] <= 0.0 {
            return Err(LabError::Frame(format!(
                "{}: degenerate induced metric at u=({}, {}) (det={det:.3e}, condition ~ {:.3e})",
                self.label,
                u[0],
                u[1],
                (g[0][0].abs() + g[1][1].abs()) / det.abs().max(1e-300)
            )));
        }
        let g_inv = linalg::inv2(&g)?;
        let sqrt_det_g = det.sqrt();

        // Orthonormal tangent basis by Gram-Schmidt on (d1_0, d1_1). The
        // induced metric is positive definite, so this is the ordinary
        // Euclidean procedure in disguise.
        let n0 = g[0][0].sqrt();
        let e0 = linalg::scale(&jet.d1[0], 1.0 / n0);
        let c10 = g[0][1] / g[0][0];
        let mut w = jet.d1[1].clone();
        linalg::axpy(&mut w, -c10, &jet.d1[0]);
        let wn = space.inner(&w, &w).sqrt();
        let e1 = linalg::scale(&w, 1.0 / wn);
        let onb = [e0, e1];
        let onb_coef = [[1.0 / n0, 0.0], [-c10 / wn, 1.0 / wn]];

        let normals = self.normal_frame(&jet)?;

        // Scalar second fundamental forms. Second derivatives are projected
        // to the pseudo-sphere tangent space first; the component along X
        // belongs to the ambient M's own curvature, not the surface's.
        let mut a_coord = Vec::with_capacity(normals.len());
        let mut shape_onb = Vec::with_capacity(normals.len());
        for nu in &normals {
            let mut a = [[0.0; 2]; 2];
            for i in 0..2 {
                for j in i..2 {
                    let proj = space.project_tangent(&jet.x, &jet.d2[i][j]);
                    let v = -space.inner(&proj, &nu.v);
                    a[i][j] = v;
                    a[j][i] = v;
                }
            }
            let mut s = Mat::zeros(2);
            for i in 0..2 {
                for j in 0..2 {
                    let mut acc = 0.0;
                    for ai in 0..2 {
                        for bj in 0..2 {
                            acc += onb_coef[i][ai] * onb_coef[j][bj] * a[ai][bj];
                        }
                    }
                    s[(i, j)] = acc;
                }
            }
            a_coord.push(a);
            shape_onb.push(s.symmetrized());
        }

        Ok(PointFrame {
            u,
            x: jet.x,
            d1: jet.d1,
            d2: jet.d2,
            g,
            g_inv,
            sqrt_det_g,
            onb,
            onb_coef,
            normals,
            a_coord,
            shape_onb,
        })
    }

    /// Build the orthonormal normal frame with a deterministic orientation.
    fn normal_frame(&self, jet: &SurfaceJet) -> Result<Vec<Normal>> {
        let space = &self.ambient;
        let n = self.ambient_dim();
        let mut normals: Vec<Normal> = Vec::new();

        match (&self.map, space.kind, n) {
            (MapKind::ProductTorus { .. }, _, _) => {
                // Global analytic frame, parallel in the normal bundle.
                let x = &jet.x;
                let r1 = (x[0] * x[0] + x[1] * x[1]).sqrt();
                let r2 = (x[2] * x[2] + x[3] * x[3]).sqrt();
                normals.push(Normal { v: vec![x[0] / r1, x[1] / r1, 0.0, 0.0], eps: 1.0 });
                normals.push(Normal { v: vec![0.0, 0.0, x[2] / r2, x[3] / r2], eps: 1.0 });
            }
            (_, Kind::Flat, 3) => {
                let c = cross3(&jet.d1[0], &jet.d1[1]);
                let nn = linalg::norm(&c);
                if nn < 1e-14 {
                    return Err(LabError::Frame("degenerate tangent plane".into()));
                }
                normals.push(Normal { v: linalg::scale(&c, 1.0 / nn), eps: 1.0 });
            }
            (_, Kind::PseudoSphere, 4) => {
                // Hypersurface of the pseudo-sphere: the signature-orthogonal
                // complement of span(X, d_u, d_v) via the cofactor expansion.
                let w = cross4(&jet.x, &jet.d1[0], &jet.d1[1]);
                let v: Vec<f64> = (0..4).map(|c| space.sign(c) * w[c]).collect();
                let vv = space.inner(&v, &v);
                if vv.abs() < 1e-20 {
                    return Err(LabError::Frame(
                        "null normal complement in indefinite signature".into(),
                    ));
                }
                let eps = vv.signum();
                let v = linalg::scale(&v, 1.0 / vv.abs().sqrt());
                normals.push(Normal { v, eps });
            }
            _ => {
                // Fallback: modified Gram-Schmidt over the coordinate axes.
                normals = self.gram_schmidt_normals(jet)?;
            }
        }

        // Deterministic orientation: eps * inner(nu, hint) > 0. For
        // Riemannian normals this is the outward convention; for the timelike
        // de Sitter normal it selects +d_r (the slicing direction).
        for (beta, nu) in normals.iter_mut().enumerate() {
            let hint = self.orientation_hint(&jet.x, beta);
            let s = nu.eps * space.inner(&nu.v, &hint);
            if s < 0.0 {
                nu.v = linalg::scale(&nu.v, -1.0);
            }
        }
        Ok(normals)
    }

    fn gram_schmidt_normals(&self, jet: &SurfaceJet) -> Result<Vec<Normal>> {
        let space = &self.ambient;
        let n = self.ambient_dim();
        let codim = self.codim();
        let mut normals: Vec<Normal> = Vec::new();
        let g = [
            [space.inner(&jet.d1[0], &jet.d1[0]), space.inner(&jet.d1[0], &jet.d1[1])],
            [space.inner(&jet.d1[1], &jet.d1[0]), space.inner(&jet.d1[1], &jet.d1[1])],
        ];
        let g_inv = linalg::inv2(&g)?;
        for axis in 0..n {
            if normals.len() == codim {
                break;
            }
            let mut w = vec![0.0; n];
            w[axis] = 1.0;
            if space.kind == Kind::PseudoSphere {
                w = space.project_tangent(&jet.x, &w);
            }
            // Remove the tangent components (metric projection).
            let c = [space.inner(&w, &jet.d1[0]), space.inner(&w, &jet.d1[1])];
            for i in 0..2 {
                let coef = g_inv[i][0] * c[0] + g_inv[i][1] * c[1];
                linalg::axpy(&mut w, -coef, &jet.d1[i]);
            }
            for prev in &normals {
                let coef = prev.eps * space.inner(&w, &prev.v);
                linalg::axpy(&mut w, -coef, &prev.v);
            }
            let ww = space.inner(&w, &w);
            if ww.abs() < 1e-12 {
                continue;
            }
            normals.push(Normal { v: linalg::scale(&w, 1.0 / ww.abs().sqrt()), eps: ww.signum() });
        }
        if normals.len() != codim {
            return Err(LabError::Frame(
                "normal frame construction failed (null complement)".into(),
            ));
        }
        Ok(normals)
    }

    /// Ambient direction the `beta`-th normal should positively pair with.
    fn orientation_hint(&self, x: &[f64], beta: usize) -> Vec<f64> {
        match &self.map {
            MapKind::RoundSphere { center, .. } => linalg::sub(x, center),
            MapKind::Ellipsoid { .. } => x.to_vec(),
            MapKind::Torus { big_r, .. } => {
                let ring = (x[0] * x[0] + x[1] * x[1]).sqrt();
                let core = [big_r * x[0] / ring, big_r * x[1] / ring, 0.0];
                linalg::sub(x, &core)
            }
            MapKind::ProductTorus { .. } => {
                if beta == 0 {
                    vec![x[0], x[1], 0.0, 0.0]
                } else {
                    vec![0.0, 0.0, x[2], x[3]]
                }
            }
            MapKind::RadialGraph { .. } => match self.ambient.kind {
                Kind::Flat => x.to_vec(),
                // The radial conformal field value is a positive multiple of
                // the radial direction everywhere on a radial graph.
                Kind::PseudoSphere => self
                    .natural_field()
                    .expect("radial field exists for radial graphs")
                    .value(x),
            },
        }
    }
}

fn unit_sphere_dir(t: Jet2, p: Jet2) -> [Jet2; 3] {
    let (st, ct) = (t.sin(), t.cos());
    [st * p.cos(), st * p.sin(), ct]
}

fn cross3(a: &[f64], b: &[f64]) -> Vec<f64> {
    vec![
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Cofactor vector `w` with `sum_c v_c w_c = det(v; a; b; c)` for all `v`.
fn cross4(a: &[f64], b: &[f64], c: &[f64]) -> Vec<f64> {
    let det3 = |m: [[f64; 3]; 3]| -> f64 {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let mut w = vec![0.0; 4];
    for col in 0..4 {
        let keep: Vec<usize> = (0..4).filter(|&k| k != col).collect();
        let m = [
            [a[keep[0]], a[keep[1]], a[keep[2]]],
            [b[keep[0]], b[keep[1]], b[keep[2]]],
            [c[keep[0]], c[keep[1]], c[keep[2]]],
        ];
        w[col] = if col % 2 == 0 { det3(m) } else { -det3(m) };
    }
    w
}

impl PointFrame {
    /// Project an ambient vector onto the tangent plane of the surface.
    pub fn tangential(&self, space: &AmbientSpace, w: &[f64]) -> Vec<f64> {
        let mut t = space.project_tangent(&self.x, w);
        for nu in &self.normals {
            let c = nu.eps * space.inner(&t, &nu.v);
            linalg::axpy(&mut t, -c, &nu.v);
        }
        t
    }

    /// Coordinates of a tangent vector in the orthonormal basis.
    pub fn onb_coords(&self, space: &AmbientSpace, w: &[f64]) -> [f64; 2] {
        [space.inner(w, &self.onb[0]), space.inner(w, &self.onb[1])]
    }

    pub fn from_onb(&self, c: [f64; 2]) -> Vec<f64> {
        let mut out = linalg::scale(&self.onb[0], c[0]);
        linalg::axpy(&mut out, c[1], &self.onb[1]);
        out
    }

    /// Shape operator seen by an arbitrary (non-unit) normal direction `w`:
    /// `A^w = sum_beta eps_beta inner(w, nu_beta) A^{nu_beta}` in the
    /// orthonormal basis.
    pub fn shape_along(&self, space: &AmbientSpace, w: &[f64]) -> Mat {
        let mut out = Mat::zeros(2);
        for (beta, nu) in self.normals.iter().enumerate() {
            let c = nu.eps * space.inner(w, &nu.v);
            out = out.add(&self.shape_onb[beta].scaled(c));
        }
        out
    }
}

/// Construct a built-in surface from its config-facing label and parameters.
pub fn builtin(label: &str, params: &Value, ambient: &AmbientSpace) -> Result<Immersion> {
    let get = |key: &str| -> Option<f64> { params.get(key).and_then(Value::as_f64) };
    let need = |key: &str| -> Result<f64> {
        get(key).ok_or_else(|| LabError::Config(format!("{label}: missing parameter {key:?}")))
    };
    let get_int = |key: &str, default: i64| -> i64 {
        params.get(key).and_then(Value::as_i64).unwrap_or(default)
    };
    let bump = || Bump::parse(get_int("l", 2), get_int("m", 0));
    let two_pi = 2.0 * std::f64::consts::PI;
    let polar_axes = [Axis::Interval(0.0, std::f64::consts::PI), Axis::Periodic(two_pi)];

    let imm = match label {
        "round_sphere" => {
            let radius = get("R").or_else(|| get("radius")).unwrap_or(1.0);
            if radius <= 0.0 {
                return Err(LabError::Config("round_sphere: R must be positive".into()));
            }
            let center = match params.get("center") {
                Some(Value::Array(a)) => a
                    .iter()
                    .map(|v| v.as_f64().ok_or_else(|| LabError::Config("bad center".into())))
                    .collect::<Result<Vec<f64>>>()?,
                _ => vec![0.0; 3],
            };
            if center.len() != 3 {
                return Err(LabError::Config("round_sphere: center must have length 3".into()));
            }
            Immersion {
                label: label.into(),
                ambient: AmbientSpace::euclidean(3),
                axes: polar_axes,
                map: MapKind::RoundSphere { radius, center },
            }
        }
        "ellipsoid" => {
            let (a, b, c) = (need("a")?, need("b")?, need("c")?);
            if a <= 0.0 || b <= 0.0 || c <= 0.0 {
                return Err(LabError::Config("ellipsoid: semiaxes must be positive".into()));
            }
            Immersion {
                label: label.into(),
                ambient: AmbientSpace::euclidean(3),
                axes: polar_axes,
                map: MapKind::Ellipsoid { a, b, c },
            }
        }
        "torus_of_revolution" => {
            let big_r = need("R")?;
            let small_r = need("rho")?;
            if !(small_r > 0.0 && small_r < big_r) {
                return Err(LabError::Config(
                    "torus_of_revolution: need 0 < rho < R for embeddedness".into(),
                ));
            }
            Immersion {
                label: label.into(),
                ambient: AmbientSpace::euclidean(3),
                axes: [Axis::Periodic(two_pi), Axis::Periodic(two_pi)],
                map: MapKind::Torus { big_r, small_r },
            }
        }
        "product_torus_R4" => {
            let (a, b) = (need("a")?, need("b")?);
            if a <= 0.0 || b <= 0.0 {
                return Err(LabError::Config("product_torus_R4: radii must be positive".into()));
            }
            Immersion {
                label: label.into(),
                ambient: AmbientSpace::euclidean(4),
                axes: [Axis::Periodic(two_pi), Axis::Periodic(two_pi)],
                map: MapKind::ProductTorus { a, b },
            }
        }
        "radial_graph" => {
            let r0 = get("base").unwrap_or(1.0);
            let eps = get("amp").unwrap_or(0.0);
            Immersion {
                label: label.into(),
                ambient: AmbientSpace::euclidean(3),
                axes: polar_axes,
                map: MapKind::RadialGraph { r0, eps: eps / r0, bump: bump()? },
            }
        }
        "perturbed_sphere" => {
            let r0 = get("R").or_else(|| get("r0")).unwrap_or(1.0);
            let eps = get("eps").unwrap_or(0.05);
            check_radial_ambient(ambient)?;
            Immersion {
                label: label.into(),
                ambient: *ambient,
                axes: polar_axes,
                map: MapKind::RadialGraph { r0, eps, bump: bump()? },
            }
        }
        "geodesic_sphere_S" => {
            let r0 = need("r0")?;
            if !(r0 > 0.0 && r0 < std::f64::consts::PI) {
                return Err(LabError::Config("geodesic_sphere_S: need 0 < r0 < pi".into()));
            }
            Immersion {
                label: label.into(),
                ambient: AmbientSpace::sphere(3),
                axes: polar_axes,
                map: MapKind::RadialGraph { r0, eps: 0.0, bump: Bump::Zonal2 },
            }
        }
        "geodesic_sphere_H" => {
            let r0 = need("r0")?;
            if r0 <= 0.0 {
                return Err(LabError::Config("geodesic_sphere_H: need r0 > 0".into()));
            }
            Immersion {
                label: label.into(),
                ambient: AmbientSpace::hyperbolic(3),
                axes: polar_axes,
                map: MapKind::RadialGraph { r0, eps: 0.0, bump: Bump::Zonal2 },
            }
        }
        "ds_slice_graph" => {
            let r0 = need("r0")?;
            if r0 <= 0.0 {
                return Err(LabError::Config("ds_slice_graph: need r0 > 0".into()));
            }
            let eps = get("eps").unwrap_or(0.0);
            Immersion {
                label: label.into(),
                ambient: AmbientSpace::de_sitter(3),
                axes: polar_axes,
                map: MapKind::RadialGraph { r0, eps, bump: bump()? },
            }
        }
        _ => {
            return Err(LabError::Config(format!("unknown surface label {label:?}")));
        }
    };
    Ok(imm)
}

fn check_radial_ambient(ambient: &AmbientSpace) -> Result<()> {
    let ok = matches!(
        (ambient.kind, ambient.ambient_dim()),
        (Kind::Flat, 3) | (Kind::PseudoSphere, 4)
    );
    if ok {
        Ok(())
    } else {
        Err(LabError::Config(format!(
            "perturbed_sphere needs R3, S3, H3 or dS3 as ambient, got {ambient:?}"
        )))
    }
}

/// Registry for `list-surfaces`.
pub fn surface_registry() -> Vec<(&'static str, &'static str)> {
    vec![
        ("round_sphere", "R [, center=[x,y,z]] - round sphere in R3"),
        ("ellipsoid", "a, b, c - ellipsoid in R3"),
        ("torus_of_revolution", "R, rho (0 < rho < R) - torus in R3"),
        ("radial_graph", "base, amp [, l, m] - graph r = base + amp*bump over S2 in R3"),
        ("perturbed_sphere", "R|r0, eps [, l, m] - geodesic sphere + harmonic bump; ambient R3/S3/H3/dS3"),
        ("geodesic_sphere_S", "r0 - geodesic sphere in S3"),
        ("geodesic_sphere_H", "r0 - geodesic sphere in H3"),
        ("ds_slice_graph", "r0 [, eps, l, m] - spacelike slice graph in dS3"),
        ("product_torus_R4", "a, b - flat product torus S1(a) x S1(b) in R4"),
    ]
}

/// Convenience typed constructors used throughout the tests.
pub mod zoo {
    use super::*;
    use serde_json::json;

    pub fn round_sphere(radius: f64) -> Immersion {
        builtin("round_sphere", &json!({ "R": radius }), &AmbientSpace::euclidean(3)).unwrap()
    }

    pub fn round_sphere_at(radius: f64, center: [f64; 3]) -> Immersion {
        builtin(
            "round_sphere",
            &json!({ "R": radius, "center": center }),
            &AmbientSpace::euclidean(3),
        )
        .unwrap()
    }

    pub fn ellipsoid(a: f64, b: f64, c: f64) -> Immersion {
        builtin("ellipsoid", &json!({ "a": a, "b": b, "c": c }), &AmbientSpace::euclidean(3))
            .unwrap()
    }

    pub fn torus(big_r: f64, small_r: f64) -> Immersion {
        builtin(
            "torus_of_revolution",
            &json!({ "R": big_r, "rho": small_r }),
            &AmbientSpace::euclidean(3),
        )
        .unwrap()
    }

    pub fn product_torus(a: f64, b: f64) -> Immersion {
        builtin("product_torus_R4", &json!({ "a": a, "b": b }), &AmbientSpace::euclidean(4))
            .unwrap()
    }

    pub fn geodesic_sphere_s(r0: f64) -> Immersion {
        builtin("geodesic_sphere_S", &json!({ "r0": r0 }), &AmbientSpace::sphere(3)).unwrap()
    }

    pub fn geodesic_sphere_h(r0: f64) -> Immersion {
        builtin("geodesic_sphere_H", &json!({ "r0": r0 }), &AmbientSpace::hyperbolic(3)).unwrap()
    }

    pub fn ds_slice(r0: f64) -> Immersion {
        builtin("ds_slice_graph", &json!({ "r0": r0 }), &AmbientSpace::de_sitter(3)).unwrap()
    }

    pub fn ds_graph(r0: f64, eps: f64) -> Immersion {
        builtin("ds_slice_graph", &json!({ "r0": r0, "eps": eps }), &AmbientSpace::de_sitter(3))
            .unwrap()
    }

    pub fn perturbed_sphere(ambient: AmbientSpace, r0: f64, eps: f64) -> Immersion {
        builtin("perturbed_sphere", &json!({ "r0": r0, "eps": eps }), &ambient).unwrap()
    }

    pub fn perturbed_sphere_sectoral(ambient: AmbientSpace, r0: f64, eps: f64) -> Immersion {
        builtin("perturbed_sphere", &json!({ "r0": r0, "eps": eps, "l": 2, "m": 2 }), &ambient)
            .unwrap()
    }

    pub fn radial_graph(base: f64, amp: f64) -> Immersion {
        builtin("radial_graph", &json!({ "base": base, "amp": amp }), &AmbientSpace::euclidean(3))
            .unwrap()
    }
}
