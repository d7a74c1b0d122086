//! Structured triangulations of the parametric surfaces, carrying per-vertex
//! curvature data pulled back from the analytic immersion.
//!
//! Polar charts (interval x periodic) mesh as latitude rows with two pole
//! fans; fully periodic charts (tori) mesh as a regular grid with wraparound.
//! Meshes are watertight with consistent orientation by construction, and
//! both properties are still checked explicitly, together with a minimum
//! angle bound.

use crate::ambient::AmbientSpace;
use crate::curvature::CurvaturePacket;
use crate::error::{LabError, Result};
use crate::immersion::{Axis, Immersion};
use crate::linalg::Mat;
use std::collections::HashMap;
use std::io::{BufRead, Write};

#[derive(Debug, Clone)]
pub struct VertexData {
    /// Geodesic distance from the surface's natural pole.
    pub r: f64,
    /// `sigma_0..sigma_m` of the (sign-adjusted) shape operator.
    pub sigma: Vec<f64>,
    /// Orthonormal tangent basis at the vertex (ambient coordinates).
    pub onb: [Vec<f64>; 2],
    /// Newton transformations `T_0..T_{m-1}` in that basis.
    pub t_onb: Vec<Mat>,
}

#[derive(Debug, Clone)]
pub struct SurfaceMesh {
    pub space: AmbientSpace,
    pub vertices: Vec<Vec<f64>>,
    pub triangles: Vec<[usize; 3]>,
    pub data: Vec<VertexData>,
}

impl SurfaceMesh {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Edge Gram matrix, area, and edge vectors of one triangle.
    pub fn triangle_geometry(&self, t: usize) -> Result<([Vec<f64>; 2], [[f64; 2]; 2], f64)> {
        let [a, b, c] = self.triangles[t];
        let e1: Vec<f64> = self.vertices[b]
            .iter()
            .zip(&self.vertices[a])
            .map(|(x, y)| x - y)
            .collect();
        let e2: Vec<f64> = self.vertices[c]
            .iter()
            .zip(&self.vertices[a])
            .map(|(x, y)| x - y)
            .collect();
        let g = [
            [self.space.inner(&e1, &e1), self.space.inner(&e1, &e2)],
            [self.space.inner(&e2, &e1), self.space.inner(&e2, &e2)],
        ];
        let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
        if !(det > 0.0 && g[0][0] > 0.0) {
            return Err(LabError::Frame(format!("degenerate or non-spacelike triangle {t}")));
        }
        Ok(([e1, e2], g, 0.5 * det.sqrt()))
    }

    pub fn total_area(&self) -> Result<f64> {
        let mut terms = Vec::with_capacity(self.triangles.len());
        for t in 0..self.triangles.len() {
            terms.push(self.triangle_geometry(t)?.2);
        }
        Ok(crate::linalg::kahan_sum(terms))
    }

    /// Watertightness, consistent orientation, and triangle quality.
    pub fn validate(&self) -> Result<()> {
        let mut undirected: HashMap<(usize, usize), usize> = HashMap::new();
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &self.triangles {
            for e in 0..3 {
                let (a, b) = (tri[e], tri[(e + 1) % 3]);
                *directed.entry((a, b)).or_insert(0) += 1;
                let key = (a.min(b), a.max(b));
                *undirected.entry(key).or_insert(0) += 1;
            }
        }
        for (&(a, b), &count) in &undirected {
            if count != 2 {
                return Err(LabError::Contract(format!(
                    "edge ({a}, {b}) belongs to {count} triangles; mesh is not watertight"
                )));
            }
        }
        for (&(a, b), &count) in &directed {
            if count != 1 {
                return Err(LabError::Contract(format!(
                    "directed edge ({a}, {b}) repeated; orientation inconsistent"
                )));
            }
        }
        let min_angle_deg = 1.0f64;
        let threshold = min_angle_deg.to_radians();
        for t in 0..self.triangles.len() {
            let (_, g, _) = self.triangle_geometry(t)?;
            // Angles from the Gram matrix of the two edge vectors at each corner.
            let l1 = g[0][0].sqrt();
            let l2 = g[1][1].sqrt();
            let cos_a = (g[0][1] / (l1 * l2)).clamp(-1.0, 1.0);
            let ang_a = cos_a.acos();
            // Third side and remaining angles via the law of cosines.
            let l3 = (g[0][0] + g[1][1] - 2.0 * g[0][1]).sqrt();
            let cos_b = ((l1 * l1 + l3 * l3 - l2 * l2) / (2.0 * l1 * l3)).clamp(-1.0, 1.0);
            let ang_b = cos_b.acos();
            let ang_c = std::f64::consts::PI - ang_a - ang_b;
            if ang_a.min(ang_b).min(ang_c) < threshold {
                return Err(LabError::Contract(format!(
                    "triangle {t} has min angle below {min_angle_deg} degrees"
                )));
            }
        }
        Ok(())
    }
}

fn vertex_data_at(imm: &Immersion, u: [f64; 2]) -> Result<VertexData> {
    let frame = imm.frame(u)?;
    let packet = CurvaturePacket::from_shape(&frame.shape_onb[0], frame.normals[0].eps)?;
    let pole = imm.natural_pole();
    let r = imm.ambient.polar(&pole, &frame.x)?.r;
    Ok(VertexData { r, sigma: packet.sigma.clone(), onb: frame.onb.clone(), t_onb: packet.t })
}

/// Structured triangulation with roughly `target_vertices` vertices.
pub fn triangulate(imm: &Immersion, target_vertices: usize) -> Result<SurfaceMesh> {
    if imm.codim() != 1 {
        return Err(LabError::Argument("triangulate needs hypersurfaces (m = 2)".into()));
    }
    let target = target_vertices.max(32);
    match (imm.axes[0], imm.axes[1]) {
        (Axis::Interval(t0, t1), Axis::Periodic(period)) => {
            // Latitude rows + two pole fans. Aim for n_phi = 2 n_theta.
            let n_theta = ((target as f64 / 2.0).sqrt().round() as usize).max(4);
            let n_phi = 2 * n_theta;
            let mut vertices = Vec::new();
            let mut data = Vec::new();
            // Chart poles are measure-zero degeneracies: pole vertex data is
            // sampled just inside the chart.
            let pole_offset = 1e-5;
            let north_u = [t0 + pole_offset, 0.0];
            vertices.push(imm.jet([t0, 0.0]).x);
            data.push(vertex_data_at(imm, north_u)?);
            for i in 1..n_theta {
                let theta = t0 + (t1 - t0) * i as f64 / n_theta as f64;
                for j in 0..n_phi {
                    let phi = period * j as f64 / n_phi as f64;
                    vertices.push(imm.jet([theta, phi]).x);
                    data.push(vertex_data_at(imm, [theta, phi])?);
                }
            }
            let south_u = [t1 - pole_offset, 0.0];
            vertices.push(imm.jet([t1, 0.0]).x);
            data.push(vertex_data_at(imm, south_u)?);

            let north = 0usize;
            let south = vertices.len() - 1;
            let ring = |i: usize, j: usize| 1 + (i - 1) * n_phi + (j % n_phi);
            let mut triangles = Vec::new();
            for j in 0..n_phi {
                triangles.push([north, ring(1, j), ring(1, j + 1)]);
            }
            for i in 1..n_theta - 1 {
                for j in 0..n_phi {
                    let (a, b) = (ring(i, j), ring(i, j + 1));
                    let (c, d) = (ring(i + 1, j), ring(i + 1, j + 1));
                    triangles.push([a, c, d]);
                    triangles.push([a, d, b]);
                }
            }
            for j in 0..n_phi {
                triangles.push([south, ring(n_theta - 1, j + 1), ring(n_theta - 1, j)]);
            }
            let mesh = SurfaceMesh { space: imm.ambient, vertices, triangles, data };
            mesh.validate()?;
            Ok(mesh)
        }
        (Axis::Periodic(p0), Axis::Periodic(p1)) => {
            let n = (target as f64).sqrt().round() as usize;
            let (nu, nv) = (n.max(4), n.max(4));
            let mut vertices = Vec::new();
            let mut data = Vec::new();
            for i in 0..nu {
                for j in 0..nv {
                    let u = [p0 * i as f64 / nu as f64, p1 * j as f64 / nv as f64];
                    vertices.push(imm.jet(u).x);
                    data.push(vertex_data_at(imm, u)?);
                }
            }
            let at = |i: usize, j: usize| (i % nu) * nv + (j % nv);
            let mut triangles = Vec::new();
            for i in 0..nu {
                for j in 0..nv {
                    let (a, b) = (at(i, j), at(i + 1, j));
                    let (c, d) = (at(i, j + 1), at(i + 1, j + 1));
                    triangles.push([a, b, d]);
                    triangles.push([a, d, c]);
                }
            }
            let mesh = SurfaceMesh { space: imm.ambient, vertices, triangles, data };
            mesh.validate()?;
            Ok(mesh)
        }
        _ => Err(LabError::Argument("unsupported domain layout for triangulation".into())),
    }
}

/// Write the mesh as OFF plus a JSON sidecar with the per-vertex data.
pub fn write_off(mesh: &SurfaceMesh, off_path: &std::path::Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(off_path)?);
    writeln!(f, "OFF")?;
    writeln!(f, "{} {} 0", mesh.vertices.len(), mesh.triangles.len())?;
    for v in &mesh.vertices {
        let coords: Vec<String> = v.iter().map(|c| format!("{c:.17e}")).collect();
        writeln!(f, "{}", coords.join(" "))?;
    }
    for t in &mesh.triangles {
        writeln!(f, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    let sidecar = serde_json::json!({
        "schema": "minkowski-lab/mesh-data/1",
        "r": mesh.data.iter().map(|d| d.r).collect::<Vec<_>>(),
        "sigma": mesh.data.iter().map(|d| d.sigma.clone()).collect::<Vec<_>>(),
        "onb": mesh.data.iter().map(|d| vec![d.onb[0].clone(), d.onb[1].clone()]).collect::<Vec<_>>(),
        "t_onb": mesh.data.iter().map(|d| d.t_onb.iter().map(|m| m.a.clone()).collect::<Vec<_>>()).collect::<Vec<_>>(),
    });
    let sidecar_path = off_path.with_extension("data.json");
    std::fs::write(sidecar_path, serde_json::to_string(&sidecar).unwrap())?;
    Ok(())
}

/// Read an OFF mesh with its JSON sidecar of per-vertex curvature data.
pub fn read_off(off_path: &std::path::Path, space: AmbientSpace) -> Result<SurfaceMesh> {
    let file = std::fs::File::open(off_path)?;
    let mut lines = std::io::BufReader::new(file)
        .lines()
        .collect::<std::io::Result<Vec<String>>>()?
        .into_iter()
        .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let header = lines.next().ok_or_else(|| LabError::Config("empty OFF file".into()))?;
    if header.trim() != "OFF" {
        return Err(LabError::Config("not an OFF file".into()));
    }
    let counts = lines.next().ok_or_else(|| LabError::Config("missing OFF counts".into()))?;
    let mut it = counts.split_whitespace();
    let nv: usize = it
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| LabError::Config("bad OFF vertex count".into()))?;
    let nf: usize = it
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| LabError::Config("bad OFF face count".into()))?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let line = lines.next().ok_or_else(|| LabError::Config("truncated OFF".into()))?;
        let v: Vec<f64> = line
            .split_whitespace()
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| LabError::Config("bad OFF vertex line".into()))?;
        if v.len() != space.ambient_dim() {
            return Err(LabError::Config(format!(
                "OFF vertex has {} coordinates; ambient needs {}",
                v.len(),
                space.ambient_dim()
            )));
        }
        vertices.push(v);
    }
    let mut triangles = Vec::with_capacity(nf);
    for _ in 0..nf {
        let line = lines.next().ok_or_else(|| LabError::Config("truncated OFF".into()))?;
        let idx: Vec<usize> = line
            .split_whitespace()
            .map(|s| s.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| LabError::Config("bad OFF face line".into()))?;
        if idx.len() != 4 || idx[0] != 3 {
            return Err(LabError::Config("only triangle faces are supported".into()));
        }
        triangles.push([idx[1], idx[2], idx[3]]);
    }

    let sidecar_path = off_path.with_extension("data.json");
    let sidecar: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(&sidecar_path).map_err(|e| {
            LabError::Config(format!(
                "missing per-vertex data sidecar {}: {e}",
                sidecar_path.display()
            ))
        })?,
    )
    .map_err(|e| LabError::Config(format!("bad sidecar JSON: {e}")))?;

    let rs: Vec<f64> = serde_json::from_value(sidecar["r"].clone())
        .map_err(|e| LabError::Config(format!("sidecar r: {e}")))?;
    let sigmas: Vec<Vec<f64>> = serde_json::from_value(sidecar["sigma"].clone())
        .map_err(|e| LabError::Config(format!("sidecar sigma: {e}")))?;
    if rs.len() != nv || sigmas.len() != nv {
        return Err(LabError::Config("sidecar data length mismatch".into()));
    }
    let onbs: Option<Vec<Vec<Vec<f64>>>> =
        serde_json::from_value(sidecar["onb"].clone()).ok();
    let ts: Option<Vec<Vec<Vec<f64>>>> = serde_json::from_value(sidecar["t_onb"].clone()).ok();
    let mut data = Vec::with_capacity(nv);
    for i in 0..nv {
        let onb = match &onbs {
            Some(o) => [o[i][0].clone(), o[i][1].clone()],
            None => [vec![0.0; space.ambient_dim()], vec![0.0; space.ambient_dim()]],
        };
        let t_onb = match &ts {
            Some(t) => t[i]
                .iter()
                .map(|a| Mat { n: 2, a: a.clone() })
                .collect(),
            None => vec![],
        };
        data.push(VertexData { r: rs[i], sigma: sigmas[i].clone(), onb, t_onb });
    }
    let mesh = SurfaceMesh { space, vertices, triangles, data };
    mesh.validate()?;
    Ok(mesh)
}
