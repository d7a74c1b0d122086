//! Acceptance suite: one test per criterion, each printing its pass line.
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use minkowski_lab::ambient::{AmbientSpace, ConformalField, FieldKind};
use minkowski_lab::curvature::{self, CurvaturePacket};
use minkowski_lab::identities::{self, ChainVariant, TensorSpec, Verdict};
use minkowski_lab::immersion::{zoo, Immersion};
use minkowski_lab::linalg::Mat;
use minkowski_lab::quadrature::GridSpec;
use minkowski_lab::rigidity::{self, ProbeVariant};
use minkowski_lab::spectral::{self, BoundaryShape};
use minkowski_lab::weights::{UFun, WeightSpec};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::time::Instant;

fn spec() -> GridSpec {
    GridSpec::default()
}

fn random_symmetric(m: usize, rng: &mut StdRng) -> Mat {
    let mut a = Mat::zeros(m);
    for i in 0..m {
        for j in 0..=i {
            let x: f64 = rng.random_range(-1.0..1.0);
            a[(i, j)] = x;
            a[(j, i)] = x;
        }
    }
    a
}

#[test]
fn criterion_01_newton_algebra_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(20260808);
    let mut checked = 0usize;
    for m in 2..=6usize {
        for _ in 0..40 {
            let a = random_symmetric(m, &mut rng);
            let p = CurvaturePacket::from_shape(&a, 1.0).unwrap();
            let norm = a.frobenius();
            for k in 1..=m {
                let ops = vec![a.clone(); k];
                let (h_k, t_k) = curvature::epsilon_oracle(&ops).unwrap();
                let tol = 1e-9 * (1.0 + norm.powi(k as i32));
                assert!((h_k - p.h[k]).abs() < tol, "H_{k} mismatch at m = {m}");
                if k < m {
                    assert!(t_k.sub(&p.t[k]).frobenius() < tol, "T_{k} mismatch at m = {m}");
                }
            }
            // Trace, recursion and contraction identities at 1e-10.
            for k in 0..m {
                let scale = 1.0 + norm.powi(k as i32 + 1);
                assert!((p.t[k].trace() - (m - k) as f64 * p.h[k]).abs() < 1e-10 * scale);
                assert!(
                    (p.t[k].matmul(&a).trace() - (k + 1) as f64 * p.h[k + 1]).abs()
                        < 1e-10 * scale
                );
                if k >= 1 {
                    let rec = Mat::identity(m).scaled(p.h[k]).sub(&a.matmul(&p.t[k - 1]));
                    assert!(p.t[k].sub(&rec).frobenius() < 1e-10 * scale);
                }
            }
            checked += 1;
        }
    }
    assert_eq!(checked, 200);
    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 30.0, "runtime {dt:.1}s exceeds 30s budget");
    println!("criterion 01 (newton algebra vs epsilon oracle, 200 matrices): PASS in {dt:.1}s");
}

#[test]
fn criterion_02_flux_identity_residuals_across_the_zoo() {
    let start = Instant::now();
    let surfaces: Vec<Immersion> = vec![
        zoo::round_sphere(1.3),
        zoo::ellipsoid(1.0, 1.2, 0.9),
        zoo::torus(2.0, 1.0),
        zoo::radial_graph(1.0, 0.3),
        zoo::perturbed_sphere(AmbientSpace::euclidean(3), 1.0, 0.08),
        zoo::geodesic_sphere_s(0.6),
        zoo::perturbed_sphere(AmbientSpace::sphere(3), 0.6, 0.07),
        zoo::geodesic_sphere_h(1.0),
        zoo::perturbed_sphere(AmbientSpace::hyperbolic(3), 1.0, 0.07),
        zoo::ds_slice(0.8),
        zoo::ds_graph(0.8, 0.06),
    ];
    let weights = [
        WeightSpec::ONE,
        WeightSpec::RadialPow { p: 1 },
        WeightSpec::RadialPow { p: 2 },
        WeightSpec::OfU { f: UFun::Identity },
    ];
    let mut count = 0usize;
    for imm in &surfaces {
        let field = imm.natural_field().unwrap();
        for k in 0..=1usize {
            for f in &weights {
                let rep = identities::verified(
                    |g| identities::hm_identity(imm, &field, f, k, g, 1e-7),
                    &spec(),
                    1e-7,
                )
                .unwrap();
                assert_eq!(
                    rep.verdict,
                    Verdict::Pass,
                    "{} k={k} f={}: rel {:.3e}, ladder {:?}",
                    imm.label,
                    f.label(),
                    rep.relative_residual,
                    rep.refinement
                );
                assert!(rep.relative_residual < 1e-7);
                count += 1;
            }
        }
    }
    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 300.0, "runtime {dt:.1}s exceeds 5min budget");
    println!(
        "criterion 02 (flux identities, {count} surface/k/f combinations, refinement-checked): \
         PASS in {dt:.1}s"
    );
}

#[test]
fn criterion_03_multi_normal_identities_on_product_tori() {
    for (a, b) in [(1.0, 1.0), (2.0, 3.0)] {
        let imm = zoo::product_torus(a, b);
        let space = imm.ambient;

        // Pointwise polarization values at sample points.
        for u in [[0.0, 0.0], [0.7, 1.9], [3.1, 5.2]] {
            let frame = imm.frame(u).unwrap();
            let p1 = curvature::multi_normal(&frame, &[0]).unwrap();
            assert!((p1.sigma_k - 1.0 / (2.0 * a)).abs() < 1e-10);
            let x_perp = frame.shape_along(&space, &frame.x);
            let h2 = curvature::epsilon_h(&[frame.shape_onb[0].clone(), x_perp]).unwrap();
            // sigma_2 = H_2 / C(2,2)
            assert!((h2 - 1.0 / (2.0 * a)).abs() < 1e-10);
            let pair = curvature::multi_normal(&frame, &[0, 1]).unwrap();
            assert!((pair.h_k - 1.0 / (2.0 * a * b)).abs() < 1e-10);
        }

        // k = 1 with the position field (alpha = 1), both single normals.
        let position = ConformalField::position(space);
        for beta in [0usize, 1] {
            for f in [WeightSpec::ONE, WeightSpec::ParamSin { axis: 0 }] {
                let rep = identities::hm_multi_normal(&imm, &[beta], &position, &f, &spec(), 1e-8)
                    .unwrap();
                assert!(
                    rep.residual < 1e-8,
                    "(a,b)=({a},{b}) nu_{beta} f={}: {:.3e}",
                    f.label(),
                    rep.residual
                );
            }
        }
        // k = 1 and k = 2 with Killing fields (nontrivial three-term and
        // degenerate closure instances respectively).
        for axis in 0..4 {
            let mut e = vec![0.0; 4];
            e[axis] = 1.0;
            let field = ConformalField::new(space, FieldKind::Constant(e)).unwrap();
            for f in [WeightSpec::ONE, WeightSpec::ParamSin { axis: 0 }] {
                for normals in [vec![0usize], vec![1], vec![0, 1]] {
                    let rep =
                        identities::hm_multi_normal(&imm, &normals, &field, &f, &spec(), 1e-8)
                            .unwrap();
                    assert!(
                        rep.residual < 1e-8,
                        "(a,b)=({a},{b}) axis={axis} normals={normals:?}: {:.3e}",
                        rep.residual
                    );
                }
            }
        }
    }
    println!("criterion 03 (multi-normal identities on product tori): PASS");
}

#[test]
fn criterion_04_closure_identities() {
    for imm in [zoo::round_sphere(1.0), zoo::ellipsoid(0.8, 1.0, 1.3), zoo::torus(2.0, 1.0)] {
        for k in 0..=2usize {
            let rep = identities::closure(&imm, k, &spec(), 1e-8).unwrap();
            assert_eq!(rep.verdict, Verdict::Pass, "{} k={k}: {:?}", imm.label, rep.lhs);
        }
    }
    println!("criterion 04 (closure identities, k <= 2, three surfaces): PASS");
}

#[test]
fn criterion_05_inequality_chains() {
    // Equality family: geodesic spheres in every space, all slacks < 1e-9.
    let sphere = zoo::round_sphere(2.0);
    for variant in [ChainVariant::EucArea { p: 0 }, ChainVariant::EucVolume] {
        let rep = identities::chain(&sphere, variant, 2, &spec(), 1e-9).unwrap();
        assert!(rep.equality_flag, "{:?}: slacks {:?}", variant, rep.slacks);
        assert!(rep.slacks.iter().all(|s| s.abs() < 1e-9));
    }
    let gs = zoo::geodesic_sphere_s(0.6);
    for variant in
        [ChainVariant::SphereArea, ChainVariant::SphereMixed, ChainVariant::SphereVolume]
    {
        let rep = identities::chain(&gs, variant, 2, &spec(), 1e-9).unwrap();
        assert!(rep.equality_flag && rep.slacks.iter().all(|s| s.abs() < 1e-9));
    }
    let gh = zoo::geodesic_sphere_h(1.0);
    for variant in [ChainVariant::HyperArea, ChainVariant::HyperVolume] {
        let rep = identities::chain(&gh, variant, 2, &spec(), 1e-9).unwrap();
        assert!(rep.equality_flag && rep.slacks.iter().all(|s| s.abs() < 1e-9));
    }

    // Strict family: ellipsoids, nonnegative slacks with min_slack > 1e-4.
    for ell in [zoo::ellipsoid(1.0, 1.0, 1.5), zoo::ellipsoid(1.0, 1.2, 1.4)] {
        for variant in [ChainVariant::EucArea { p: 0 }, ChainVariant::EucVolume] {
            let rep = identities::chain(&ell, variant, 2, &spec(), 1e-9).unwrap();
            assert_eq!(rep.verdict, Verdict::Pass);
            assert!(!rep.equality_flag);
            assert!(rep.min_slack > 1e-4, "{:?}: min slack {:.3e}", variant, rep.min_slack);
        }
    }
    // Perturbed geodesic spheres in the curved spaces: strict, hypothesis ok.
    let ps = zoo::perturbed_sphere(AmbientSpace::sphere(3), 0.6, 0.05);
    let rep = identities::chain(&ps, ChainVariant::SphereArea, 2, &spec(), 1e-9).unwrap();
    assert_eq!(rep.verdict, Verdict::Pass);
    assert!(!rep.equality_flag && rep.min_slack > 0.0);
    let ph = zoo::perturbed_sphere(AmbientSpace::hyperbolic(3), 1.0, 0.05);
    let rep = identities::chain(&ph, ChainVariant::HyperVolume, 2, &spec(), 1e-9).unwrap();
    assert_eq!(rep.verdict, Verdict::Pass);
    assert!(!rep.equality_flag && rep.min_slack > 0.0);
    println!("criterion 05 (inequality chains: equality on geodesic spheres, strict on ellipsoids): PASS");
}

#[test]
fn criterion_06_divergence_formula() {
    let start = Instant::now();
    let surfaces = [zoo::round_sphere(1.2), zoo::ellipsoid(1.0, 1.1, 1.3), zoo::torus(2.0, 0.8)];
    let mut count = 0usize;
    for imm in &surfaces {
        let space = imm.ambient;
        let fields = [
            ConformalField::position(space),
            ConformalField::new(space, FieldKind::Constant(vec![0.4, -0.2, 0.7])).unwrap(),
            ConformalField::radial(space, vec![0.05, -0.08, 0.1]).unwrap(),
        ];
        let mut tensors = vec![
            TensorSpec::Newton { k: 0 },
            TensorSpec::Newton { k: 1 },
            TensorSpec::Newton { k: 2 },
            TensorSpec::AmbientPullback { seed: 17 },
        ];
        if imm.label == "torus_of_revolution" {
            tensors.push(TensorSpec::ParamField { seed: 23 });
        }
        let weights =
            [WeightSpec::ONE, WeightSpec::RadialPow { p: 2 }, WeightSpec::Coord { c: 0 }];
        for tensor in &tensors {
            for f in &weights {
                for field in &fields {
                    let rep = identities::divergence_residual(
                        imm, tensor, f, field, &spec(), 1e-8,
                    )
                    .unwrap();
                    // Verdict encodes |int RHS| < 1e-8 * Area.
                    assert_eq!(
                        rep.verdict,
                        Verdict::Pass,
                        "{} T={} f={} field={}: residual {:.3e}",
                        imm.label,
                        tensor.label(),
                        f.label(),
                        field.label(),
                        rep.residual
                    );
                    count += 1;
                }
            }
        }
    }
    let dt = start.elapsed().as_secs_f64();
    println!("criterion 06 (divergence formula, {count} tensor/weight/field cases): PASS in {dt:.1}s");
}

#[test]
fn criterion_07_rigidity_probes() {
    // Geodesic spheres in all four spaces: every probe variant sees defects
    // below 1e-9.
    let cases: Vec<Immersion> = vec![
        zoo::round_sphere(1.5),
        zoo::geodesic_sphere_s(0.7),
        zoo::geodesic_sphere_h(1.1),
        zoo::ds_slice(0.8),
    ];
    for imm in &cases {
        for (variant, f) in [
            (ProbeVariant::Radial { k: 1 }, WeightSpec::RadialPow { p: 2 }),
            (ProbeVariant::Support { k: 1 }, WeightSpec::ONE),
            (ProbeVariant::Ratio { k: 2, l: 1 }, WeightSpec::ONE),
        ] {
            let probe = rigidity::alexandrov_probe(imm, &f, variant, &spec()).unwrap();
            assert!(
                probe.hypothesis_defect < 1e-9 && probe.umbilicity_defect < 1e-9,
                "{} {:?}: ({:.2e}, {:.2e})",
                imm.label,
                variant,
                probe.hypothesis_defect,
                probe.umbilicity_defect
            );
        }
        let field = imm.natural_field().unwrap();
        let probe = rigidity::conformal_ratio_probe(imm, &field, &spec()).unwrap();
        assert!(probe.hypothesis_defect < 1e-9 && probe.umbilicity_defect < 1e-9);
        assert!(probe.sigma1_oscillation.unwrap() < 1e-9);
    }

    // Epsilon sweep: both defects strictly increase with the perturbation.
    let mut prev = (0.0f64, 0.0f64);
    for eps in [0.01, 0.02, 0.05, 0.1] {
        let imm = zoo::perturbed_sphere(AmbientSpace::euclidean(3), 1.0, eps);
        let probe = rigidity::alexandrov_probe(
            &imm,
            &WeightSpec::ONE,
            ProbeVariant::Radial { k: 1 },
            &spec(),
        )
        .unwrap();
        assert!(
            probe.hypothesis_defect > prev.0 && probe.umbilicity_defect > prev.1,
            "sweep not strictly increasing at eps={eps}"
        );
        prev = (probe.hypothesis_defect, probe.umbilicity_defect);
    }
    println!("criterion 07 (rigidity probes: zero defects on geodesic spheres, monotone sweep): PASS");
}

#[test]
fn criterion_08_eigenvalue_bounds() {
    let start = Instant::now();
    let sphere = zoo::round_sphere(1.0);
    let rep = spectral::lambda1(&sphere, 0, 10_000).unwrap();
    assert!(
        rep.lambda1 >= 1.98 && rep.lambda1 <= 2.02,
        "lambda1 = {} outside [1.98, 2.02]",
        rep.lambda1
    );
    assert!((rep.bound - 2.0).abs() < 1e-12, "bound {} must be exactly 2", rep.bound);
    assert!(rep.adjusted_verdict, "equality case must pass the adjusted comparison");

    let garay = spectral::garay_check(&sphere, 0, 10_000).unwrap();
    let eight_pi = 8.0 * std::f64::consts::PI;
    assert!((garay.lambda1 - eight_pi).abs() / eight_pi < 0.01);
    assert!((garay.bound - eight_pi).abs() / eight_pi < 1e-9);
    assert!(garay.adjusted_verdict);

    for ell in [zoo::ellipsoid(1.0, 1.0, 1.2), zoo::ellipsoid(1.0, 1.1, 1.3)] {
        let rep = spectral::lambda1(&ell, 0, 6_000).unwrap();
        assert!(rep.raw_verdict && rep.slack > 0.0, "{}: slack {}", ell.label, rep.slack);
        let garay = spectral::garay_check(&ell, 0, 6_000).unwrap();
        assert!(garay.raw_verdict && garay.slack > 0.0);
    }
    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 120.0, "runtime {dt:.1}s exceeds 2min budget");
    println!("criterion 08 (eigenvalue bounds: sphere equality, ellipsoid strictness): PASS in {dt:.1}s");
}

#[test]
fn criterion_09_steklov() {
    let start = Instant::now();
    let disk = spectral::steklov_p1(&BoundaryShape::Circle { radius: 1.0 }, 96).unwrap();
    assert!(
        disk.p1 >= 0.999 && disk.p1 <= 1.001,
        "disk p1 = {} outside [0.999, 1.001]",
        disk.p1
    );
    assert!((disk.max_boundary_curvature - 1.0).abs() < 1e-12);
    assert!(disk.adjusted_verdict, "disk equality case must pass");

    let ellipse = spectral::steklov_p1(&BoundaryShape::Ellipse { a: 1.5, b: 1.0 }, 96).unwrap();
    assert!(ellipse.p1 < ellipse.max_boundary_curvature, "strict inequality expected");
    assert!(ellipse.raw_verdict && ellipse.slack > 0.1);
    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 60.0, "runtime {dt:.1}s exceeds 1min budget");
    println!("criterion 09 (steklov: disk equality, ellipse strictness): PASS in {dt:.1}s");
}

#[test]
fn criterion_10_determinism_across_thread_counts() {
    // The whole quadrature/assembly path must produce bit-identical numbers
    // under different rayon pools; serialize a representative report set and
    // compare bytes.
    let run_all = |threads: usize| -> String {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let imm = zoo::ellipsoid(1.0, 1.2, 0.9);
            let field = ConformalField::position(imm.ambient);
            let hm = identities::hm_identity(
                &imm,
                &field,
                &WeightSpec::RadialPow { p: 2 },
                1,
                &spec(),
                1e-7,
            )
            .unwrap();
            let chain =
                identities::chain(&imm, ChainVariant::EucVolume, 2, &spec(), 1e-9).unwrap();
            let probe = rigidity::alexandrov_probe(
                &imm,
                &WeightSpec::ONE,
                ProbeVariant::Radial { k: 1 },
                &spec(),
            )
            .unwrap();
            let eig = spectral::lambda1(&imm, 0, 2_000).unwrap();
            serde_json::to_string(&(hm, chain, probe, eig)).unwrap()
        })
    };
    let a = run_all(1);
    let b = run_all(4);
    let c = run_all(4);
    assert_eq!(a, b, "reports differ between 1 and 4 threads");
    assert_eq!(b, c, "reports differ between repeated runs");
    println!("criterion 10 (byte-identical reports across runs and thread counts): PASS");
}
