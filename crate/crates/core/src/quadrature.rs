//! Product quadrature over the parameter domain against the induced area
//! element: Gauss-Legendre on interval axes, trapezoid on periodic axes
//! (spectrally accurate for smooth closed surfaces).
//!
//! Determinism contract: node evaluation may run in parallel, but values are
//! stored per node and reduced serially in a fixed order with compensated
//! summation, so results are bit-identical across runs and thread counts.

use crate::error::{LabError, Result};
use crate::immersion::{Axis, Immersion, PointFrame};
use crate::jet::Jet2;
use crate::linalg::kahan_sum;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Per-axis node counts. The defaults (64 Gauss nodes per interval axis, 128
/// trapezoid nodes per periodic axis) are the resolutions all stated
/// tolerances refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub interval_nodes: usize,
    pub periodic_nodes: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { interval_nodes: 64, periodic_nodes: 128 }
    }
}

impl GridSpec {
    pub fn scaled(&self, factor: f64) -> GridSpec {
        GridSpec {
            interval_nodes: ((self.interval_nodes as f64 * factor).round() as usize).max(4),
            periodic_nodes: ((self.periodic_nodes as f64 * factor).round() as usize).max(4),
        }
    }

    /// Coarse-to-default ladder used by refinement verdicts.
    pub fn refinement_ladder(&self) -> [GridSpec; 3] {
        [self.scaled(0.25), self.scaled(0.5), *self]
    }
}

#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    pub nodes: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub resolution: [usize; 2],
}

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n(x) and P_n'(x).
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            pp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / pp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * pp * pp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn axis_rule(axis: &Axis, spec: &GridSpec) -> (Vec<f64>, Vec<f64>, usize) {
    match *axis {
        Axis::Interval(a, b) => {
            let n = spec.interval_nodes;
            let (xs, ws) = gauss_legendre(n);
            let mid = 0.5 * (a + b);
            let half = 0.5 * (b - a);
            (
                xs.iter().map(|x| mid + half * x).collect(),
                ws.iter().map(|w| w * half).collect(),
                n,
            )
        }
        Axis::Periodic(period) => {
            let n = spec.periodic_nodes;
            let h = period / n as f64;
            ((0..n).map(|j| j as f64 * h).collect(), vec![h; n], n)
        }
    }
}

/// Tensor-product grid over the immersion's domain.
pub fn build_grid(imm: &Immersion, spec: &GridSpec) -> QuadratureGrid {
    let (xs0, ws0, n0) = axis_rule(&imm.axes[0], spec);
    let (xs1, ws1, n1) = axis_rule(&imm.axes[1], spec);
    let mut nodes = Vec::with_capacity(n0 * n1);
    let mut weights = Vec::with_capacity(n0 * n1);
    for i in 0..n0 {
        for j in 0..n1 {
            nodes.push([xs0[i], xs1[j]]);
            weights.push(ws0[i] * ws1[j]);
        }
    }
    QuadratureGrid { nodes, weights, resolution: [n0, n1] }
}

/// Evaluate frames at every node (parallel, order-preserving).
pub fn frames(imm: &Immersion, grid: &QuadratureGrid) -> Result<Vec<PointFrame>> {
    grid.nodes.par_iter().map(|&u| imm.frame(u)).collect::<Result<Vec<_>>>()
}

/// Integrate a scalar node function against the area element. The closure
/// sees the node index and its frame; non-finite values poison the result
/// with the offending node named.
pub fn integrate<F>(grid: &QuadratureGrid, frames: &[PointFrame], f: F) -> Result<f64>
where
    F: Fn(usize, &PointFrame) -> f64,
{
    let mut terms = Vec::with_capacity(frames.len());
    for (i, frame) in frames.iter().enumerate() {
        let v = f(i, frame);
        if !v.is_finite() {
            return Err(LabError::Poisoned {
                node: i,
                detail: format!("integrand value {v} at u = ({}, {})", frame.u[0], frame.u[1]),
            });
        }
        terms.push(grid.weights[i] * v * frame.sqrt_det_g);
    }
    Ok(kahan_sum(terms))
}

/// Componentwise vector integral.
pub fn integrate_vec<F>(
    grid: &QuadratureGrid,
    frames: &[PointFrame],
    dim: usize,
    f: F,
) -> Result<Vec<f64>>
where
    F: Fn(usize, &PointFrame) -> Vec<f64>,
{
    let mut per_comp: Vec<Vec<f64>> = vec![Vec::with_capacity(frames.len()); dim];
    for (i, frame) in frames.iter().enumerate() {
        let v = f(i, frame);
        for (c, val) in v.iter().enumerate() {
            if !val.is_finite() {
                return Err(LabError::Poisoned {
                    node: i,
                    detail: format!("component {c} value {val}"),
                });
            }
            per_comp[c].push(grid.weights[i] * val * frame.sqrt_det_g);
        }
    }
    Ok(per_comp.into_iter().map(kahan_sum).collect())
}

/// Convergence table for a resolution-indexed computation.
#[derive(Debug, Clone, Serialize)]
pub struct Convergence {
    pub resolutions: Vec<[usize; 2]>,
    pub values: Vec<f64>,
    pub diffs: Vec<f64>,
    pub converged: bool,
}

/// Run a value-producing computation over a ladder of grid specs and report
/// successive differences. `converged` means the last difference fell under
/// `tol`.
pub fn refine<F>(compute: F, specs: &[GridSpec], tol: f64) -> Result<Convergence>
where
    F: Fn(&GridSpec) -> Result<(f64, [usize; 2])>,
{
    if specs.len() < 2 {
        return Err(LabError::Argument("refine needs at least two resolutions".into()));
    }
    let mut values = Vec::new();
    let mut resolutions = Vec::new();
    for spec in specs {
        let (v, res) = compute(spec)?;
        values.push(v);
        resolutions.push(res);
    }
    let diffs: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let converged = diffs.last().map(|d| *d < tol).unwrap_or(false);
    Ok(Convergence { resolutions, values, diffs, converged })
}

/// First-order jets of the chart data at a parameter point: the induced
/// metric, its inverse, and the area element as functions of `u`, plus the
/// Christoffel symbols. Enough to differentiate metric contractions once
/// (covariant divergences) without third derivatives of the map.
#[derive(Debug, Clone)]
pub struct ChartJets {
    pub x: Vec<Jet2>,
    pub d1: [Vec<Jet2>; 2],
    pub g: [[Jet2; 2]; 2],
    pub g_inv: [[Jet2; 2]; 2],
    pub sqrt_det_g: Jet2,
    /// Christoffel symbols `gamma[k][i][j] = Gamma^k_{ij}` (values only).
    pub gamma: [[[f64; 2]; 2]; 2],
}

pub fn chart_jets(imm: &Immersion, u: [f64; 2]) -> ChartJets {
    let space = &imm.ambient;
    let xj = imm.eval([Jet2::variable(u[0], 0), Jet2::variable(u[1], 1)]);
    let n = xj.len();
    // d1[i] as first-order jets: value from the gradient slot, derivatives
    // from the Hessian slots. (Their own second-order slots are zeroed: the
    // order-2 jet of the map is exhausted after one differentiation.)
    let mut d1: [Vec<Jet2>; 2] = [Vec::with_capacity(n), Vec::with_capacity(n)];
    for i in 0..2 {
        for c in 0..n {
            d1[i].push(Jet2 {
                v: xj[c].d[i],
                d: [xj[c].h[i][0], xj[c].h[i][1]],
                h: [[0.0; 2]; 2],
            });
        }
    }
    let mut g = [[Jet2::ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            g[i][j] = space.inner_jet(&d1[i], &d1[j]);
        }
    }
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    let inv_det = det.recip();
    let g_inv = [
        [g[1][1] * inv_det, (-g[0][1]) * inv_det],
        [(-g[1][0]) * inv_det, g[0][0] * inv_det],
    ];
    let sqrt_det_g = det.sqrt();

    // Gamma^k_ij = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij).
    let mut gamma = [[[0.0; 2]; 2]; 2];
    for (k, gk) in gamma.iter_mut().enumerate() {
        for i in 0..2 {
            for j in 0..2 {
                let mut s = 0.0;
                for l in 0..2 {
                    s += g_inv[k][l].v * (g[j][l].d[i] + g[i][l].d[j] - g[i][j].d[l]);
                }
                gk[i][j] = 0.5 * s;
            }
        }
    }

    ChartJets { x: xj, d1, g, g_inv, sqrt_det_g, gamma }
}

impl ChartJets {
    /// Intrinsic divergence of a tangent field given by its contravariant
    /// parameter components as jets: `(1/sqrt g) d_i (sqrt g w^i)`.
    pub fn divergence(&self, w: &[Jet2; 2]) -> f64 {
        let sw0 = self.sqrt_det_g * w[0];
        let sw1 = self.sqrt_det_g * w[1];
        (sw0.d[0] + sw1.d[1]) / self.sqrt_det_g.v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::CurvaturePacket;
    use crate::immersion::zoo;
    use crate::linalg::SplitMix64;
    use std::f64::consts::PI;

    #[test]
    fn gauss_legendre_is_exact_on_polynomials() {
        // n nodes integrate degree <= 2n-1 exactly.
        for n in [2usize, 5, 16, 64] {
            let (xs, ws) = gauss_legendre(n);
            for deg in 0..(2 * n).min(40) {
                let num: f64 = xs.iter().zip(&ws).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 0 { 2.0 / (deg as f64 + 1.0) } else { 0.0 };
                assert!(
                    (num - exact).abs() < 1e-13,
                    "degree {deg} with {n} nodes: {num} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn sphere_and_torus_areas() {
        let spec = GridSpec::default();
        let sphere = zoo::round_sphere(2.0);
        let grid = build_grid(&sphere, &spec);
        let fr = frames(&sphere, &grid).unwrap();
        let area = integrate(&grid, &fr, |_, _| 1.0).unwrap();
        assert!((area - 16.0 * PI).abs() < 1e-10 * 16.0 * PI);

        let torus = zoo::torus(2.0, 1.0);
        let grid = build_grid(&torus, &spec);
        let fr = frames(&torus, &grid).unwrap();
        let area = integrate(&grid, &fr, |_, _| 1.0).unwrap();
        assert!((area - 8.0 * PI * PI).abs() < 1e-10 * area);
    }

    #[test]
    fn torus_total_gauss_curvature_vanishes() {
        let torus = zoo::torus(2.0, 1.0);
        let grid = build_grid(&torus, &GridSpec::default());
        let fr = frames(&torus, &grid).unwrap();
        let total = integrate(&grid, &fr, |_, f| {
            let p = CurvaturePacket::from_shape(&f.shape_onb[0], f.normals[0].eps).unwrap();
            p.sigma[2]
        })
        .unwrap();
        assert!(total.abs() < 1e-10, "closed-surface total curvature defect {total}");
    }

    #[test]
    fn area_refinement_saturates() {
        let sphere = zoo::round_sphere(1.0);
        let specs: Vec<GridSpec> = [16, 32, 64]
            .iter()
            .map(|&n| GridSpec { interval_nodes: n, periodic_nodes: 2 * n })
            .collect();
        let conv = refine(
            |s| {
                let grid = build_grid(&sphere, s);
                let fr = frames(&sphere, &grid)?;
                Ok((integrate(&grid, &fr, |_, _| 1.0)?, [grid.resolution[0], grid.resolution[1]]))
            },
            &specs,
            1e-12,
        )
        .unwrap();
        assert!(conv.converged, "diffs: {:?}", conv.diffs);
    }

    #[test]
    fn ellipsoid_curvature_integral_forms_cauchy_sequence() {
        let ell = zoo::ellipsoid(1.0, 1.0, 1.5);
        let specs: Vec<GridSpec> = [16, 32, 64, 256]
            .iter()
            .map(|&n| GridSpec { interval_nodes: n, periodic_nodes: n })
            .collect();
        let mut values = Vec::new();
        for s in &specs {
            let grid = build_grid(&ell, s);
            let fr = frames(&ell, &grid).unwrap();
            let v = integrate(&grid, &fr, |_, f| {
                CurvaturePacket::from_shape(&f.shape_onb[0], 1.0).unwrap().sigma[1]
            })
            .unwrap();
            values.push(v);
        }
        // Values approach the high-resolution oracle monotonically in error.
        let oracle = values[3];
        let errs: Vec<f64> = values[..3].iter().map(|v| (v - oracle).abs()).collect();
        assert!(errs[0] >= errs[1] && errs[1] >= errs[2] - 1e-13, "errors: {errs:?}");
        assert!(errs[2] < 1e-9);
    }

    #[test]
    fn non_smooth_integrand_converges_slowly() {
        let sphere = zoo::round_sphere(1.0);
        let value_at = |n: usize| {
            let spec = GridSpec { interval_nodes: n, periodic_nodes: 2 * n };
            let grid = build_grid(&sphere, &spec);
            let fr = frames(&sphere, &grid).unwrap();
            integrate(&grid, &fr, |_, f| f.x[0].abs()).unwrap()
        };
        let exact = 2.0 * PI; // integral of |x| over the unit sphere
        let e16 = (value_at(16) - exact).abs();
        let e64 = (value_at(64) - exact).abs();
        // Converging, but far from spectral: the flag here is that the error
        // at 64 nodes is many orders above machine precision.
        assert!(e64 < e16);
        assert!(e64 > 1e-9, "kink should keep the error visible, got {e64:.3e}");
    }

    #[test]
    fn poisoned_integrand_names_the_node() {
        let sphere = zoo::round_sphere(1.0);
        let grid = build_grid(&sphere, &GridSpec { interval_nodes: 4, periodic_nodes: 4 });
        let fr = frames(&sphere, &grid).unwrap();
        let err = integrate(&grid, &fr, |i, _| if i == 7 { f64::NAN } else { 1.0 });
        match err {
            Err(LabError::Poisoned { node, .. }) => assert_eq!(node, 7),
            other => panic!("expected poisoned error, got {other:?}"),
        }
    }

    #[test]
    fn divergence_theorem_null_test() {
        // For smooth tangent fields W, the integral of div(W) vanishes.
        // Fields: tangential projections of constant ambient fields (smooth
        // across chart poles) and, on the torus, random periodic fields.
        let mut rng = SplitMix64::new(31);
        for imm in [zoo::round_sphere(1.3), zoo::ellipsoid(1.0, 1.2, 0.8), zoo::torus(2.0, 0.7)] {
            let space = imm.ambient;
            let grid = build_grid(&imm, &GridSpec::default());
            let fr = frames(&imm, &grid).unwrap();
            for _ in 0..10 {
                let e: Vec<f64> = (0..3).map(|_| rng.next_signed()).collect();
                let total = integrate(&grid, &fr, |_, f| {
                    let cj = chart_jets(&imm, f.u);
                    // w^i = g^{ij} (E . d1_j), all as jets.
                    let ej: Vec<Jet2> = e.iter().map(|&c| Jet2::constant(c)).collect();
                    let c0 = space.inner_jet(&ej, &cj.d1[0]);
                    let c1 = space.inner_jet(&ej, &cj.d1[1]);
                    let w = [
                        cj.g_inv[0][0] * c0 + cj.g_inv[0][1] * c1,
                        cj.g_inv[1][0] * c0 + cj.g_inv[1][1] * c1,
                    ];
                    cj.divergence(&w)
                })
                .unwrap();
                assert!(total.abs() < 1e-8, "{}: div integral {total:.3e}", imm.label);
            }
        }
        // Periodic parameter fields on the torus.
        let torus = zoo::torus(2.0, 1.0);
        let grid = build_grid(&torus, &GridSpec::default());
        let fr = frames(&torus, &grid).unwrap();
        for s in 0..10u64 {
            let mut coeffs = SplitMix64::new(1000 + s);
            let a: Vec<f64> = (0..8).map(|_| coeffs.next_signed()).collect();
            let total = integrate(&grid, &fr, |_, f| {
                let cj = chart_jets(&torus, f.u);
                let (u, v) = (Jet2::variable(f.u[0], 0), Jet2::variable(f.u[1], 1));
                let w = [
                    u.sin() * a[0] + v.cos() * a[1] + (u + v).sin() * a[2] + a[3],
                    u.cos() * a[4] + (v * 2.0).sin() * a[5] + (u - v).cos() * a[6] + a[7],
                ];
                cj.divergence(&w)
            })
            .unwrap();
            assert!(total.abs() < 1e-8, "torus periodic field: {total:.3e}");
        }
    }

    #[test]
    fn integration_is_deterministic_across_thread_pools() {
        let ell = zoo::ellipsoid(1.0, 1.3, 0.9);
        let grid = build_grid(&ell, &GridSpec::default());
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| {
                let fr = frames(&ell, &grid).unwrap();
                integrate(&grid, &fr, |_, f| {
                    CurvaturePacket::from_shape(&f.shape_onb[0], 1.0).unwrap().sigma[1]
                })
                .unwrap()
            })
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
