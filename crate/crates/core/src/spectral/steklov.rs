//! First Steklov eigenvalue of star-shaped planar domains by P1 FEM:
//! harmonic in the interior, `df/dnu = p f` on the boundary. The discrete
//! problem couples the interior stiffness matrix with the boundary mass
//! matrix; the smallest nonzero eigenvalue comes from inverse iteration on
//! the subspace of boundary-mean-zero functions.

use crate::error::{LabError, Result};
use crate::jet::Jet2;
use crate::linalg::kahan_sum;
use crate::spectral::fem::{cg_project, Csr};
use serde::{Deserialize, Serialize};

/// Star-shaped boundary curve `rho(theta) (cos theta, sin theta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum BoundaryShape {
    Circle { radius: f64 },
    Ellipse { a: f64, b: f64 },
    /// `rho = base + amp cos(freq theta)`.
    Wavy { base: f64, amp: f64, freq: u32 },
}

impl BoundaryShape {
    pub fn label(&self) -> String {
        match self {
            BoundaryShape::Circle { radius } => format!("circle({radius})"),
            BoundaryShape::Ellipse { a, b } => format!("ellipse({a},{b})"),
            BoundaryShape::Wavy { base, amp, freq } => format!("wavy({base},{amp},{freq})"),
        }
    }

    /// rho(theta) as a jet in theta (slot 0).
    fn rho_jet(&self, theta: f64) -> Jet2 {
        let t = Jet2::variable(theta, 0);
        match *self {
            BoundaryShape::Circle { radius } => Jet2::constant(radius),
            BoundaryShape::Ellipse { a, b } => {
                // rho = a b / sqrt(b^2 cos^2 + a^2 sin^2)
                let (c, s) = (t.cos(), t.sin());
                let denom = (c * c * (b * b) + s * s * (a * a)).sqrt();
                denom.recip() * (a * b)
            }
            BoundaryShape::Wavy { base, amp, freq } => (t * freq as f64).cos() * amp + base,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = match *self {
            BoundaryShape::Circle { radius } => radius <= 0.0,
            BoundaryShape::Ellipse { a, b } => a <= 0.0 || b <= 0.0,
            BoundaryShape::Wavy { base, amp, .. } => base <= 0.0 || amp.abs() >= base,
        };
        if bad {
            return Err(LabError::Config(format!(
                "{} is not a star-shaped boundary (rho must stay positive)",
                self.label()
            )));
        }
        Ok(())
    }

    /// Signed curvature of the (counterclockwise) boundary curve at theta;
    /// positive for convex boundaries with the outward normal.
    pub fn curvature(&self, theta: f64) -> f64 {
        let rho = self.rho_jet(theta);
        let t = Jet2::variable(theta, 0);
        let (c, s) = (t.cos(), t.sin());
        let x = rho * c;
        let y = rho * s;
        let (xp, yp) = (x.d[0], y.d[0]);
        let (xpp, ypp) = (x.h[0][0], y.h[0][0]);
        let speed2 = xp * xp + yp * yp;
        (xp * ypp - yp * xpp) / speed2.powf(1.5)
    }
}

/// Triangulated star-shaped domain: center fan plus concentric rings.
pub struct PlanarMesh {
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    /// Indices of the boundary ring, counterclockwise.
    pub boundary: Vec<usize>,
}

pub fn disk_mesh(shape: &BoundaryShape, rings: usize, segments: usize) -> Result<PlanarMesh> {
    shape.validate()?;
    let (nr, nt) = (rings.max(2), segments.max(8));
    let mut vertices = vec![[0.0, 0.0]];
    for i in 1..=nr {
        let t = i as f64 / nr as f64;
        for j in 0..nt {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / nt as f64;
            let rho = shape.rho_jet(theta).v;
            if rho <= 0.0 {
                return Err(LabError::Config("boundary radius must stay positive".into()));
            }
            vertices.push([t * rho * theta.cos(), t * rho * theta.sin()]);
        }
    }
    let at = |i: usize, j: usize| 1 + (i - 1) * nt + (j % nt);
    let mut triangles = Vec::new();
    for j in 0..nt {
        triangles.push([0, at(1, j), at(1, j + 1)]);
    }
    for i in 1..nr {
        for j in 0..nt {
            let (a, b) = (at(i, j), at(i, j + 1));
            let (c, d) = (at(i + 1, j), at(i + 1, j + 1));
            triangles.push([a, c, d]);
            triangles.push([a, d, b]);
        }
    }
    let boundary = (0..nt).map(|j| at(nr, j)).collect();
    Ok(PlanarMesh { vertices, triangles, boundary })
}

fn tri_area(v: &[[f64; 2]], t: &[usize; 3]) -> f64 {
    let (a, b, c) = (v[t[0]], v[t[1]], v[t[2]]);
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
}

/// Interior stiffness and boundary mass matrices for the P1 discretization.
pub fn assemble_steklov(mesh: &PlanarMesh) -> Result<(Csr, Csr)> {
    let n = mesh.vertices.len();
    let mut kt: Vec<(usize, usize, f64)> = Vec::new();
    for tri in &mesh.triangles {
        let area = tri_area(&mesh.vertices, tri);
        if area <= 0.0 {
            return Err(LabError::Frame("degenerate or misoriented triangle".into()));
        }
        let (a, b, c) = (
            mesh.vertices[tri[0]],
            mesh.vertices[tri[1]],
            mesh.vertices[tri[2]],
        );
        // Hat gradients: grad phi_i = rot90(opposite edge) / (2 area).
        let grads = [
            [(b[1] - c[1]) / (2.0 * area), (c[0] - b[0]) / (2.0 * area)],
            [(c[1] - a[1]) / (2.0 * area), (a[0] - c[0]) / (2.0 * area)],
            [(a[1] - b[1]) / (2.0 * area), (b[0] - a[0]) / (2.0 * area)],
        ];
        for i in 0..3 {
            for j in 0..3 {
                let v = area * (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]);
                kt.push((tri[i], tri[j], v));
            }
        }
    }
    let mut mt: Vec<(usize, usize, f64)> = Vec::new();
    let nb = mesh.boundary.len();
    for e in 0..nb {
        let (a, b) = (mesh.boundary[e], mesh.boundary[(e + 1) % nb]);
        let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
        let len = ((pb[0] - pa[0]).powi(2) + (pb[1] - pa[1]).powi(2)).sqrt();
        mt.push((a, a, len / 3.0));
        mt.push((b, b, len / 3.0));
        mt.push((a, b, len / 6.0));
        mt.push((b, a, len / 6.0));
    }
    Ok((Csr::from_triplets(n, &mut kt), Csr::from_triplets(n, &mut mt)))
}

#[derive(Debug, Clone, Serialize)]
pub struct SteklovReport {
    pub check_id: String,
    pub domain: String,
    /// Richardson-extrapolated first nonzero Steklov eigenvalue.
    pub p1: f64,
    pub p1_fine: f64,
    pub p1_coarse: f64,
    pub max_boundary_curvature: f64,
    pub domain_area: f64,
    /// `int_boundary (X . nu)`, which must equal `2 Area` (internal check).
    pub support_integral: f64,
    /// `p1 int sigma_{-1} <= n max(sigma_1) Vol`, i.e. `p1 <= max curvature`.
    pub bound: f64,
    pub slack: f64,
    pub mesh_vertices: usize,
    pub raw_verdict: bool,
    pub adjusted_verdict: bool,
}

fn steklov_eigenvalue(mesh: &PlanarMesh) -> Result<f64> {
    let (k, mb) = assemble_steklov(mesh)?;
    let n = k.n;
    let ones = vec![1.0; n];
    let mb_ones = mb.spmv(&ones);
    let total: f64 = mb_ones.iter().sum();
    // Projection onto boundary-mean-zero (also kills the kernel of K on the
    // relevant subspace).
    let project_boundary = {
        let mb_ones = mb_ones.clone();
        move |x: &mut Vec<f64>| {
            let c = x.iter().zip(&mb_ones).map(|(a, b)| a * b).sum::<f64>() / total;
            for xi in x.iter_mut() {
                *xi -= c;
            }
        }
    };
    let mean_project = |x: &mut Vec<f64>| {
        let c: f64 = x.iter().sum::<f64>() / x.len() as f64;
        for xi in x.iter_mut() {
            *xi -= c;
        }
    };

    let mut x: Vec<f64> = mesh.vertices.iter().map(|v| v[0]).collect();
    project_boundary(&mut x);
    let norm = |v: &[f64], m: &Csr| -> f64 {
        let mv = m.spmv(v);
        v.iter().zip(&mv).map(|(a, b)| a * b).sum::<f64>().sqrt()
    };
    let xn = norm(&x, &mb);
    for xi in x.iter_mut() {
        *xi /= xn;
    }
    let mut p = f64::INFINITY;
    for _ in 0..300 {
        let rhs = mb.spmv(&x);
        let mut y = cg_project(&k, &rhs, &mean_project, 1e-12, 40 * n)?;
        project_boundary(&mut y);
        let yn = norm(&y, &mb);
        if yn < 1e-300 {
            return Err(LabError::Solver("Steklov iteration collapsed".into()));
        }
        for yi in y.iter_mut() {
            *yi /= yn;
        }
        let ky = k.spmv(&y);
        let my = mb.spmv(&y);
        let new_p = y.iter().zip(&ky).map(|(a, b)| a * b).sum::<f64>()
            / y.iter().zip(&my).map(|(a, b)| a * b).sum::<f64>();
        let done = (new_p - p).abs() <= 1e-11 * new_p.abs();
        x = y;
        p = new_p;
        if done {
            break;
        }
    }
    Ok(p)
}

/// The first nonzero Steklov eigenvalue against the support-function bound,
/// at two mesh densities with Richardson extrapolation.
pub fn steklov_p1(shape: &BoundaryShape, density: usize) -> Result<SteklovReport> {
    shape.validate()?;
    let nt = density.max(24);
    let nr = (nt as f64 / std::f64::consts::PI).round() as usize;
    let fine = disk_mesh(shape, nr, nt)?;
    let coarse = disk_mesh(shape, (nr / 2).max(2), nt / 2)?;
    let p_fine = steklov_eigenvalue(&fine)?;
    let p_coarse = steklov_eigenvalue(&coarse)?;
    // O(h^2), mesh ratio 2.
    let p1 = p_fine + (p_fine - p_coarse) / 3.0;
    let disc = ((p_fine - p_coarse) / 3.0).abs() / p_fine.abs().max(1e-300);

    // Boundary curvature maximum from a dense theta sample.
    let mut kappa_max = f64::NEG_INFINITY;
    for j in 0..(8 * nt) {
        let theta = 2.0 * std::f64::consts::PI * j as f64 / (8 * nt) as f64;
        kappa_max = kappa_max.max(shape.curvature(theta));
    }

    let area = kahan_sum(fine.triangles.iter().map(|t| tri_area(&fine.vertices, t)));
    // int_boundary X . nu over the polygonal boundary (exact for P1 X).
    let nb = fine.boundary.len();
    let support_integral = kahan_sum((0..nb).map(|e| {
        let (a, b) = (fine.boundary[e], fine.boundary[(e + 1) % nb]);
        let (pa, pb) = (fine.vertices[a], fine.vertices[b]);
        let edge = [pb[0] - pa[0], pb[1] - pa[1]];
        let outward = [edge[1], -edge[0]]; // length-weighted normal
        let mid = [(pa[0] + pb[0]) / 2.0, (pa[1] + pb[1]) / 2.0];
        mid[0] * outward[0] + mid[1] * outward[1]
    }));

    // p1 int sigma_{-1} <= n max(sigma_1) Vol with n = 2 and
    // int sigma_{-1} = 2 Area: equivalently p1 <= max curvature.
    let lhs = p1 * support_integral;
    let rhs = 2.0 * kappa_max * area;
    Ok(SteklovReport {
        check_id: "steklov".into(),
        domain: shape.label(),
        p1,
        p1_fine: p_fine,
        p1_coarse: p_coarse,
        max_boundary_curvature: kappa_max,
        domain_area: area,
        support_integral,
        bound: rhs,
        slack: rhs - lhs,
        mesh_vertices: fine.vertices.len(),
        raw_verdict: lhs <= rhs,
        adjusted_verdict: lhs <= rhs * (1.0 + 5.0 * disc),
    })
}
