//! Piecewise-linear FEM for the operators `-div(T_k grad .)` on triangulated
//! closed surfaces, and the eigenvalue bound checks built on them.
//!
//! The generalized eigenproblem `B u = lambda M u` (stiffness with tensor
//! coefficient, consistent mass) is solved for the smallest nonzero
//! eigenvalue by inverse iteration on the mean-zero subspace, with a
//! Jacobi-preconditioned conjugate-gradient inner solve. Everything is
//! serial and deterministic: assembly order, start vector, and iteration
//! counts depend only on the mesh.

use crate::curvature::binomial;
use crate::error::{LabError, Result};
use crate::immersion::Immersion;
use crate::quadrature::GridSpec;
use crate::spectral::mesh::{triangulate, SurfaceMesh};
use serde::Serialize;

/// Compressed sparse row matrix (symmetric matrices store both halves).
#[derive(Debug, Clone)]
pub struct Csr {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col: Vec<usize>,
    pub val: Vec<f64>,
}

impl Csr {
    pub fn from_triplets(n: usize, triplets: &mut Vec<(usize, usize, f64)>) -> Csr {
        triplets.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col = Vec::new();
        let mut val = Vec::new();
        let mut idx = 0;
        while idx < triplets.len() {
            let (i, j, mut v) = triplets[idx];
            idx += 1;
            while idx < triplets.len() && triplets[idx].0 == i && triplets[idx].1 == j {
                v += triplets[idx].2;
                idx += 1;
            }
            col.push(j);
            val.push(v);
            row_ptr[i + 1] = col.len();
        }
        for i in 0..n {
            if row_ptr[i + 1] == 0 {
                row_ptr[i + 1] = row_ptr[i];
            }
        }
        Csr { n, row_ptr, col, val }
    }

    pub fn spmv(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.val[k] * x[self.col[k]];
            }
            y[i] = acc;
        }
        y
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.col[k] == i {
                    d[i] = self.val[k];
                }
            }
        }
        d
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Conjugate gradients for a symmetric positive semidefinite system whose
/// kernel is handled by the supplied projection (applied to iterates and
/// residuals). Jacobi preconditioned, fixed iteration order.
pub fn cg_project(
    a: &Csr,
    b: &[f64],
    project: &dyn Fn(&mut Vec<f64>),
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    let diag = a.diagonal();
    let precond = |r: &[f64]| -> Vec<f64> {
        r.iter().zip(&diag).map(|(x, d)| x / d.max(1e-300)).collect()
    };
    let mut b = b.to_vec();
    project(&mut b);
    let bnorm = dot(&b, &b).sqrt().max(1e-300);
    let mut x = vec![0.0; a.n];
    let mut r = b.clone();
    let mut z = precond(&r);
    project(&mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for _ in 0..max_iter {
        if dot(&r, &r).sqrt() <= tol * bnorm {
            return Ok(x);
        }
        let ap = a.spmv(&p);
        let alpha = rz / dot(&p, &ap);
        for i in 0..a.n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        project(&mut r);
        let mut z2 = precond(&r);
        project(&mut z2);
        let rz2 = dot(&r, &z2);
        let beta = rz2 / rz;
        for i in 0..a.n {
            p[i] = z2[i] + beta * p[i];
        }
        rz = rz2;
        z = z2;
        let _ = &z;
    }
    Err(LabError::Solver(format!(
        "conjugate gradients did not reach tol {tol:.1e} in {max_iter} iterations \
         (residual {:.3e})",
        dot(&r, &r).sqrt() / bnorm
    )))
}

/// Assemble the stiffness `B(u,v) = int <T_k grad u, grad v>` and the
/// consistent P1 mass matrix. `k = 0` uses the identity coefficient.
pub fn assemble(mesh: &SurfaceMesh, k: usize) -> Result<(Csr, Csr)> {
    let n = mesh.vertex_count();
    let mut bt: Vec<(usize, usize, f64)> = Vec::with_capacity(9 * mesh.triangles.len());
    let mut mt: Vec<(usize, usize, f64)> = Vec::with_capacity(9 * mesh.triangles.len());
    // Reference hat gradients on the (e1, e2) chart of each triangle.
    let dphi = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
    for t in 0..mesh.triangles.len() {
        let tri = mesh.triangles[t];
        let ([e1, e2], g, area) = mesh.triangle_geometry(t)?;
        let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
        let g_inv = [
            [g[1][1] / det, -g[0][1] / det],
            [-g[1][0] / det, g[0][0] / det],
        ];
        // Tensor coefficient in the edge basis: average over the corners of
        // T-flat(e_a, e_b) = q_a^T T_onb q_b with q the orthonormal-basis
        // coordinates of the edges at that corner (projection onto the
        // vertex tangent plane).
        let t_flat = if k == 0 {
            g
        } else {
            let mut acc = [[0.0; 2]; 2];
            for &v in &tri {
                let d = &mesh.data[v];
                if d.t_onb.len() <= k {
                    return Err(LabError::Config(format!(
                        "mesh vertex {v} carries no T_{k} data"
                    )));
                }
                let q = [
                    [
                        mesh.space.inner(&e1, &d.onb[0]),
                        mesh.space.inner(&e1, &d.onb[1]),
                    ],
                    [
                        mesh.space.inner(&e2, &d.onb[0]),
                        mesh.space.inner(&e2, &d.onb[1]),
                    ],
                ];
                for a in 0..2 {
                    for b in 0..2 {
                        let tq = d.t_onb[k].apply(&q[b]);
                        acc[a][b] += (q[a][0] * tq[0] + q[a][1] * tq[1]) / 3.0;
                    }
                }
            }
            // Symmetrize against rounding.
            let s = 0.5 * (acc[0][1] + acc[1][0]);
            acc[0][1] = s;
            acc[1][0] = s;
            acc
        };

        // Stiffness: area * dphi_i^T G^-1 T-flat G^-1 dphi_j.
        let mut ginv_t = [[0.0; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                let mut acc = 0.0;
                for c in 0..2 {
                    for d in 0..2 {
                        acc += g_inv[a][c] * t_flat[c][d] * g_inv[d][b];
                    }
                }
                ginv_t[a][b] = acc;
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = 0.0;
                for a in 0..2 {
                    for b in 0..2 {
                        acc += dphi[i][a] * ginv_t[a][b] * dphi[j][b];
                    }
                }
                bt.push((tri[i], tri[j], area * acc));
                let mass = if i == j { area / 6.0 } else { area / 12.0 };
                mt.push((tri[i], tri[j], mass));
            }
        }
    }
    Ok((Csr::from_triplets(n, &mut bt), Csr::from_triplets(n, &mut mt)))
}

/// Smallest nonzero eigenvalue of `B u = lambda M u` on the mean-zero
/// subspace (constants are the kernel), by deflated inverse iteration.
/// Also returns the eigenvector and the Rayleigh-quotient residual.
pub fn smallest_nonzero_eigenvalue(
    b: &Csr,
    m: &Csr,
    start: &[f64],
) -> Result<(f64, Vec<f64>)> {
    let n = b.n;
    let ones = vec![1.0; n];
    let m_ones = m.spmv(&ones);
    let total_mass: f64 = m_ones.iter().sum();
    let project = move |x: &mut Vec<f64>| {
        let c = dot(x, &m_ones) / total_mass;
        for (xi, w) in x.iter_mut().zip(&ones) {
            *xi -= c * w;
        }
    };
    // Plain euclidean-mean deflation for the CG residuals (kernel of B).
    let mean_project = |x: &mut Vec<f64>| {
        let c: f64 = x.iter().sum::<f64>() / x.len() as f64;
        for xi in x.iter_mut() {
            *xi -= c;
        }
    };

    let mut x = start.to_vec();
    project(&mut x);
    let mxn = dot(&x, &m.spmv(&x)).sqrt();
    if mxn < 1e-300 {
        return Err(LabError::Solver("start vector lies in the kernel".into()));
    }
    for xi in x.iter_mut() {
        *xi /= mxn;
    }

    let mut lambda = f64::INFINITY;
    for _iter in 0..200 {
        let rhs = m.spmv(&x);
        let mut y = cg_project(b, &rhs, &mean_project, 1e-12, 20 * b.n)?;
        project(&mut y);
        let myn = dot(&y, &m.spmv(&y)).sqrt();
        for yi in y.iter_mut() {
            *yi /= myn;
        }
        let new_lambda = dot(&y, &b.spmv(&y)) / dot(&y, &m.spmv(&y));
        let done = (new_lambda - lambda).abs() <= 1e-11 * new_lambda.abs();
        x = y;
        lambda = new_lambda;
        if done {
            break;
        }
    }
    Ok((lambda, x))
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenReport {
    pub check_id: String,
    pub surface: String,
    pub k: usize,
    pub lambda1: f64,
    /// The inequality's right-hand side.
    pub bound: f64,
    pub slack: f64,
    pub mesh_vertices: usize,
    /// Richardson estimate of the relative discretization error from a
    /// coarser companion mesh.
    pub discretization_error: f64,
    /// `lambda1 <= bound` exactly as stated.
    pub raw_verdict: bool,
    /// `lambda1 <= bound (1 + 5 disc_err)`: the comparison that tolerates
    /// discretization near equality cases.
    pub adjusted_verdict: bool,
    /// `|B(u,u)/M(u,u) - lambda1|` for the returned eigenpair.
    pub rayleigh_residual: f64,
    /// Mass-inner-product of the eigenvector against constants.
    pub constant_orthogonality: f64,
}

fn check_lambda_hypotheses(mesh: &SurfaceMesh, k: usize, curvature: f64) -> Result<()> {
    let m = 2usize;
    if k + 2 > m {
        return Err(LabError::Argument(format!(
            "lambda1 needs sigma_(k+2); k = {k} is out of range for m = {m}"
        )));
    }
    for (v, d) in mesh.data.iter().enumerate() {
        if d.sigma[k + 2] <= 0.0 {
            return Err(LabError::Hypothesis(format!(
                "sigma_{} = {:.4e} <= 0 at mesh vertex {v}",
                k + 2,
                d.sigma[k + 2]
            )));
        }
    }
    if curvature > 0.0 {
        for (v, d) in mesh.data.iter().enumerate() {
            if d.r > std::f64::consts::FRAC_PI_4 {
                return Err(LabError::Hypothesis(format!(
                    "vertex {v} lies outside the geodesic ball of radius pi/4 (r = {:.4})",
                    d.r
                )));
            }
        }
    }
    Ok(())
}

fn lambda_of_mesh(mesh: &SurfaceMesh, k: usize) -> Result<(f64, f64, f64)> {
    let (b, m) = assemble(mesh, k)?;
    // Deterministic start: first ambient coordinate of the vertices.
    let start: Vec<f64> = mesh.vertices.iter().map(|v| v[0]).collect();
    let (lambda, vec) = smallest_nonzero_eigenvalue(&b, &m, &start)?;
    let rayleigh = dot(&vec, &b.spmv(&vec)) / dot(&vec, &m.spmv(&vec));
    let ones = vec![1.0; b.n];
    let ortho = dot(&vec, &m.spmv(&ones)).abs();
    Ok((lambda, (rayleigh - lambda).abs(), ortho))
}

/// First eigenvalue of `-div(T_k grad .)` on a surface against the bound
/// `(m - k) C(m, k) max(K sigma_k + sigma_{k+2})`.
pub fn lambda1(imm: &Immersion, k: usize, target_vertices: usize) -> Result<EigenReport> {
    let mesh = triangulate(imm, target_vertices)?;
    let coarse = triangulate(imm, (target_vertices / 4).max(64))?;
    lambda1_with_meshes(imm.label.clone(), &mesh, Some(&coarse), k)
}

/// Same bound check on an externally supplied mesh (OFF + sidecar path).
pub fn lambda1_on_mesh(label: String, mesh: &SurfaceMesh, k: usize) -> Result<EigenReport> {
    lambda1_with_meshes(label, mesh, None, k)
}

fn lambda1_with_meshes(
    label: String,
    mesh: &SurfaceMesh,
    coarse: Option<&SurfaceMesh>,
    k: usize,
) -> Result<EigenReport> {
    let m = 2usize;
    let curvature = mesh.space.curvature();
    check_lambda_hypotheses(mesh, k, curvature)?;
    let (lambda, rayleigh_residual, ortho) = lambda_of_mesh(mesh, k)?;
    let disc = match coarse {
        Some(c) => {
            let (lc, _, _) = lambda_of_mesh(c, k)?;
            // O(h^2) convergence, mesh ratio ~2: error ~ |lc - lf| / 3.
            ((lc - lambda) / 3.0).abs() / lambda.abs().max(1e-300)
        }
        None => 0.0,
    };
    let bound = (m - k) as f64
        * binomial(m, k)
        * mesh
            .data
            .iter()
            .map(|d| curvature * d.sigma[k] + d.sigma[k + 2])
            .fold(f64::NEG_INFINITY, f64::max);
    let slack = bound - lambda;
    Ok(EigenReport {
        check_id: "lambda1".into(),
        surface: label,
        k,
        lambda1: lambda,
        bound,
        slack,
        mesh_vertices: mesh.vertex_count(),
        discretization_error: disc,
        raw_verdict: lambda <= bound,
        adjusted_verdict: lambda <= bound * (1.0 + 5.0 * disc),
        rayleigh_residual,
        constant_orthogonality: ortho,
    })
}

/// Volume-weighted eigenvalue bound for embedded hypersurfaces of flat
/// space: `n lambda(T_k) Vol(Omega) <= (m-k) C(m,k) (max sigma_1) int sigma_k`.
pub fn garay_check(imm: &Immersion, k: usize, target_vertices: usize) -> Result<EigenReport> {
    let m = 2usize;
    if imm.ambient.kind != crate::ambient::Kind::Flat {
        return Err(LabError::Argument("this bound is stated in flat space".into()));
    }
    if k > m - 1 {
        return Err(LabError::Argument(format!("need k <= m - 1 = {}", m - 1)));
    }
    let mesh = triangulate(imm, target_vertices)?;
    let coarse = triangulate(imm, (target_vertices / 4).max(64))?;
    for (v, d) in mesh.data.iter().enumerate() {
        if d.sigma[k] <= 0.0 {
            return Err(LabError::Hypothesis(format!(
                "sigma_{k} = {:.4e} <= 0 at mesh vertex {v}",
                d.sigma[k]
            )));
        }
    }
    let (lambda, rayleigh_residual, ortho) = lambda_of_mesh(&mesh, k)?;
    let (lambda_c, _, _) = lambda_of_mesh(&coarse, k)?;
    let disc = ((lambda_c - lambda) / 3.0).abs() / lambda.abs().max(1e-300);

    // Quadrature-side quantities from the analytic surface.
    let spec = GridSpec::default();
    let field = imm.natural_field()?;
    let vol = crate::identities::weighted_volume(imm, &field, &spec)?;
    let grid = crate::quadrature::build_grid(imm, &spec);
    let nodes = crate::identities::node_data(imm, &grid)?;
    let mut sigma1_max = f64::NEG_INFINITY;
    let mut terms = Vec::with_capacity(nodes.len());
    for (i, nd) in nodes.iter().enumerate() {
        let p = nd.packet.as_ref().unwrap();
        sigma1_max = sigma1_max.max(p.sigma[1]);
        terms.push(grid.weights[i] * p.sigma[k] * nd.frame.sqrt_det_g);
    }
    let int_sigma_k = crate::linalg::kahan_sum(terms);

    let n = imm.ambient.intrinsic_dim() as f64;
    let lhs = n * lambda * vol;
    let rhs = (m - k) as f64 * binomial(m, k) * sigma1_max * int_sigma_k;
    Ok(EigenReport {
        check_id: "garay".into(),
        surface: imm.label.clone(),
        k,
        lambda1: lhs,
        bound: rhs,
        slack: rhs - lhs,
        mesh_vertices: mesh.vertex_count(),
        discretization_error: disc,
        raw_verdict: lhs <= rhs,
        adjusted_verdict: lhs <= rhs * (1.0 + 5.0 * disc),
        rayleigh_residual,
        constant_orthogonality: ortho,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::immersion::zoo;
    use std::f64::consts::PI;

    #[test]
    fn csr_assembles_and_multiplies() {
        let mut t = vec![(0usize, 0usize, 2.0), (0, 1, -1.0), (1, 0, -1.0), (1, 1, 2.0), (0, 0, 1.0)];
        let a = Csr::from_triplets(2, &mut t);
        let y = a.spmv(&[1.0, 1.0]);
        assert_eq!(y, vec![2.0, 1.0]);
        assert_eq!(a.diagonal(), vec![3.0, 2.0]);
    }

    #[test]
    fn stiffness_kernel_is_constants() {
        let imm = zoo::ellipsoid(1.0, 1.1, 0.9);
        let mesh = triangulate(&imm, 1_500).unwrap();
        let (b, _m) = assemble(&mesh, 0).unwrap();
        let ones = vec![1.0; b.n];
        let r = b.spmv(&ones);
        let worst = r.iter().map(|x| x.abs()).fold(0.0, f64::max);
        assert!(worst < 1e-10, "B 1 should vanish, got {worst:.3e}");
    }

    #[test]
    fn unit_sphere_laplace_eigenvalue() {
        let imm = zoo::round_sphere(1.0);
        let rep = lambda1(&imm, 0, 10_000).unwrap();
        assert!(
            (rep.lambda1 - 2.0).abs() < 0.02,
            "lambda1 = {} (expected 2 within 1%)",
            rep.lambda1
        );
        assert!((rep.bound - 2.0).abs() < 1e-12);
        assert!(rep.adjusted_verdict);
        assert!(rep.rayleigh_residual < 1e-8);
        assert!(rep.constant_orthogonality < 1e-8);
    }

    #[test]
    fn sphere_eigenvalue_converges_at_second_order() {
        let imm = zoo::round_sphere(1.0);
        let mut errors = Vec::new();
        for target in [500usize, 2_000, 8_000] {
            let mesh = triangulate(&imm, target).unwrap();
            let (b, m) = assemble(&mesh, 0).unwrap();
            let start: Vec<f64> = mesh.vertices.iter().map(|v| v[0]).collect();
            let (lambda, _) = smallest_nonzero_eigenvalue(&b, &m, &start).unwrap();
            errors.push((lambda - 2.0).abs());
        }
        // Mesh size halves between levels: errors should drop ~4x; accept
        // anything clearly super-linear.
        assert!(errors[0] > 2.5 * errors[1], "{errors:?}");
        assert!(errors[1] > 2.5 * errors[2], "{errors:?}");
    }

    #[test]
    fn ellipsoid_has_strict_slack() {
        let imm = zoo::ellipsoid(1.0, 1.0, 1.2);
        let rep = lambda1(&imm, 0, 6_000).unwrap();
        assert!(rep.raw_verdict, "lambda {} vs bound {}", rep.lambda1, rep.bound);
        assert!(rep.slack > 0.05, "slack {}", rep.slack);
    }

    #[test]
    fn lambda1_rejects_out_of_range_k() {
        let imm = zoo::round_sphere(1.0);
        assert!(matches!(lambda1(&imm, 1, 1_000), Err(LabError::Argument(_))));
    }

    #[test]
    fn geodesic_ball_restriction_enforced_on_sphere_ambient() {
        // A geodesic sphere of radius > pi/4 in S^3 violates the positive-
        // curvature hypothesis of the bound.
        let imm = zoo::geodesic_sphere_s(1.0);
        assert!(matches!(lambda1(&imm, 0, 1_000), Err(LabError::Hypothesis(_))));
        // Inside the ball it runs: bound = 2 max(sigma_0 + sigma_2).
        let imm = zoo::geodesic_sphere_s(0.5);
        let rep = lambda1(&imm, 0, 4_000).unwrap();
        assert!(rep.adjusted_verdict);
        // Exact: lambda_1 of a geodesic sphere (round, radius sin r0) is
        // 2/sin^2(r0); bound = 2 (1 + cot^2 r0) = 2/sin^2(r0): equality case.
        let exact = 2.0 / (0.5f64.sin().powi(2));
        assert!((rep.lambda1 - exact).abs() / exact < 0.01);
        assert!((rep.bound - exact).abs() / exact < 1e-9);
    }

    #[test]
    fn garay_equality_on_unit_sphere_and_strictness_on_ellipsoid() {
        let imm = zoo::round_sphere(1.0);
        let rep = garay_check(&imm, 0, 10_000).unwrap();
        // Both sides are 8 pi for the unit sphere.
        assert!((rep.lambda1 - 8.0 * PI).abs() / (8.0 * PI) < 0.01);
        assert!((rep.bound - 8.0 * PI).abs() / (8.0 * PI) < 1e-9);
        assert!(rep.adjusted_verdict);

        let imm = zoo::ellipsoid(1.0, 1.0, 1.3);
        let rep = garay_check(&imm, 0, 6_000).unwrap();
        assert!(rep.raw_verdict);
        assert!(rep.slack > 0.1, "slack {}", rep.slack);
    }

    #[test]
    fn garay_slack_shrinks_toward_the_sphere() {
        let mut last = f64::INFINITY;
        for eps in [0.05, 0.02] {
            let imm = zoo::perturbed_sphere(crate::ambient::AmbientSpace::euclidean(3), 1.0, eps);
            let rep = garay_check(&imm, 0, 4_000).unwrap();
            assert!(rep.adjusted_verdict);
            assert!(rep.slack < last);
            last = rep.slack;
        }
    }
}
