//! Ambient constant-curvature spaces and their conformal vector fields.
//!
//! Every space form is handled through one uniform picture: flat `R^{p,q}`
//! with the signature metric `dx_1^2 + .. + dx_p^2 - dx_{p+1}^2 - .. -
//! dx_{p+q}^2`, and the pseudo-spheres `M_{p,q}(mu) = {X : X . X = mu}`
//! inside it. The named spaces arise as
//!
//! - `euclidean(n)`  = flat `R^{n,0}`,
//! - `sphere(n)`     = `M_{n+1,0}(+1)`,
//! - `hyperbolic(n)` = upper sheet of `M_{n,1}(-1)` (the sheet with
//!   `x_{n+1} > 0`),
//! - `de_sitter(n)`  = `M_{n,1}(+1)`.
//!
//! Geodesic polar data is always computed from ambient inner products with
//! the pole, never through chart coordinates, so there is no singularity
//! bookkeeping at `r = 0`.
//!
//! Radial conformal fields and the sign table
//! -------------------------------------------
//! On a pseudo-sphere the projection of a constant field `Z0` yields the
//! conformal field `Y(X) = -mu Z0 + (Z0 . X) X` with conformal factor
//! `alpha = Z0 . X`. The polar radial fields are this field for a suitable
//! `Z0`:
//!
//! | space        | Z0          | Y             | alpha    | radial . radial |
//! |--------------|-------------|---------------|----------|-----------------|
//! | sphere       | pole        | sin r  d_r    | cos r    | +1              |
//! | hyperbolic   | -pole       | sinh r d_r    | cosh r   | +1              |
//! | de Sitter    | (0,..,0,-1) | cosh r d_r    | sinh r   | -1              |
//!
//! In de Sitter space the "radial" direction of the slicing
//! `X = (cosh r theta, sinh r)` is timelike, which is why its row carries
//! `radial . radial = -1`; the `pole` argument of the radial field there is
//! the timelike axis `Z0` itself (`Z0 . Z0 = -1`), not a point of the space.

use crate::error::{LabError, Result};
use crate::jet::Jet2;
use crate::linalg;

pub const MEMBERSHIP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Flat,
    PseudoSphere,
}

/// A flat signature space or a pseudo-sphere inside one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmbientSpace {
    pub kind: Kind,
    /// Count of +1 metric directions.
    pub p: usize,
    /// Count of -1 metric directions.
    pub q: usize,
    /// Defining level `X . X = mu` (pseudo-sphere only; 0 for flat).
    pub mu: f64,
}

impl AmbientSpace {
    pub fn euclidean(n: usize) -> Self {
        AmbientSpace { kind: Kind::Flat, p: n, q: 0, mu: 0.0 }
    }

    pub fn flat(p: usize, q: usize) -> Self {
        AmbientSpace { kind: Kind::Flat, p, q, mu: 0.0 }
    }

    pub fn sphere(n: usize) -> Self {
        AmbientSpace { kind: Kind::PseudoSphere, p: n + 1, q: 0, mu: 1.0 }
    }

    pub fn hyperbolic(n: usize) -> Self {
        AmbientSpace { kind: Kind::PseudoSphere, p: n, q: 1, mu: -1.0 }
    }

    pub fn de_sitter(n: usize) -> Self {
        AmbientSpace { kind: Kind::PseudoSphere, p: n, q: 1, mu: 1.0 }
    }

    /// Parse config names: "R3", "S3", "H3", "dS3", "R4", "R3,1".
    pub fn parse(name: &str) -> Result<Self> {
        let bad = || LabError::Config(format!("unknown ambient space name {name:?}"));
        if let Some(rest) = name.strip_prefix("dS") {
            let n: usize = rest.parse().map_err(|_| bad())?;
            return Ok(Self::de_sitter(n));
        }
        if let Some(rest) = name.strip_prefix('R') {
            if let Some((ps, qs)) = rest.split_once(',') {
                let p = ps.parse().map_err(|_| bad())?;
                let q = qs.parse().map_err(|_| bad())?;
                return Ok(Self::flat(p, q));
            }
            let n: usize = rest.parse().map_err(|_| bad())?;
            return Ok(Self::euclidean(n));
        }
        if let Some(rest) = name.strip_prefix('S') {
            let n: usize = rest.parse().map_err(|_| bad())?;
            return Ok(Self::sphere(n));
        }
        if let Some(rest) = name.strip_prefix('H') {
            let n: usize = rest.parse().map_err(|_| bad())?;
            return Ok(Self::hyperbolic(n));
        }
        Err(bad())
    }

    pub fn ambient_dim(&self) -> usize {
        self.p + self.q
    }

    pub fn intrinsic_dim(&self) -> usize {
        match self.kind {
            Kind::Flat => self.p + self.q,
            Kind::PseudoSphere => self.p + self.q - 1,
        }
    }

    /// Constant sectional curvature (0 flat, mu for pseudo-spheres).
    pub fn curvature(&self) -> f64 {
        match self.kind {
            Kind::Flat => 0.0,
            Kind::PseudoSphere => self.mu,
        }
    }

    pub fn sign(&self, i: usize) -> f64 {
        if i < self.p {
            1.0
        } else {
            -1.0
        }
    }

    /// Signature inner product `sum_i s_i u_i v_i`.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        assert_eq!(u.len(), self.ambient_dim(), "vector length mismatch");
        assert_eq!(v.len(), self.ambient_dim(), "vector length mismatch");
        let mut s = 0.0;
        for i in 0..u.len() {
            s += self.sign(i) * u[i] * v[i];
        }
        s
    }

    /// `inner` with a checked length (argument error instead of panic).
    pub fn inner_checked(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        if u.len() != self.ambient_dim() || v.len() != self.ambient_dim() {
            return Err(LabError::Argument(format!(
                "inner product needs vectors of length {}, got {} and {}",
                self.ambient_dim(),
                u.len(),
                v.len()
            )));
        }
        Ok(self.inner(u, v))
    }

    pub fn inner_jet(&self, u: &[Jet2], v: &[Jet2]) -> Jet2 {
        let mut s = Jet2::ZERO;
        for i in 0..u.len() {
            s = s + u[i] * v[i] * self.sign(i);
        }
        s
    }

    /// Membership test for pseudo-spheres; flat spaces contain everything.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        match self.kind {
            Kind::Flat => true,
            Kind::PseudoSphere => (self.inner(x, x) - self.mu).abs() <= tol,
        }
    }

    /// Orthogonal projection of `v` onto the tangent space of the
    /// pseudo-sphere at `x`: `v - mu (v . x) x`. Identity in flat space.
    pub fn project_tangent(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        match self.kind {
            Kind::Flat => v.to_vec(),
            Kind::PseudoSphere => {
                let c = self.mu * self.inner(v, x);
                let mut out = v.to_vec();
                linalg::axpy(&mut out, -c, x);
                out
            }
        }
    }

    /// Rescale `x` onto the pseudo-sphere (no-op in flat space). Fails on
    /// vectors with the wrong causal type (`mu (x . x) <= 0`).
    pub fn project_point(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self.kind {
            Kind::Flat => Ok(x.to_vec()),
            Kind::PseudoSphere => {
                let n2 = self.mu * self.inner(x, x);
                if n2 <= 0.0 {
                    return Err(LabError::Domain(
                        "cannot project a vector of the wrong causal type onto the pseudo-sphere"
                            .into(),
                    ));
                }
                Ok(linalg::scale(x, 1.0 / n2.sqrt()))
            }
        }
    }

    /// Geodesic polar data of `x` around `pole`.
    ///
    /// Returns the geodesic distance `r >= 0` and the unit radial direction
    /// at `x` (ambient coordinates). For de Sitter slicings the "distance" is
    /// the slicing parameter and the radial direction is timelike. At
    /// degenerate configurations (`x` at or antipodal to the pole) the radial
    /// direction is undefined and reported as `None`.
    pub fn polar(&self, pole: &[f64], x: &[f64]) -> Result<Polar> {
        match self.kind {
            Kind::Flat => {
                let diff = linalg::sub(x, pole);
                // Flat polar data is Euclidean-only; indefinite flat spaces
                // have no distance function of this kind.
                if self.q != 0 {
                    return Err(LabError::Domain(
                        "polar coordinates in flat space require Euclidean signature".into(),
                    ));
                }
                let r = linalg::norm(&diff);
                let radial = if r > 1e-14 { Some(linalg::scale(&diff, 1.0 / r)) } else { None };
                Ok(Polar { r, radial })
            }
            Kind::PseudoSphere => {
                if self.mu > 0.0 && self.q == 0 {
                    // Round sphere: cos r = pole . x.
                    self.check_on_surface(pole, "pole")?;
                    let c = self.inner(pole, x).clamp(-1.0, 1.0);
                    let r = c.acos();
                    let s = (1.0 - c * c).sqrt();
                    let radial = if s > 1e-9 {
                        let mut w = linalg::scale(x, c);
                        linalg::axpy(&mut w, -1.0, pole);
                        Some(linalg::scale(&w, 1.0 / s))
                    } else {
                        None
                    };
                    Ok(Polar { r, radial })
                } else if self.mu < 0.0 {
                    // Hyperbolic upper sheet: cosh r = -(pole . x).
                    self.check_on_surface(pole, "pole")?;
                    if x[self.ambient_dim() - 1] <= 0.0 || pole[self.ambient_dim() - 1] <= 0.0 {
                        return Err(LabError::Domain(
                            "hyperbolic polar data requires points on the upper sheet".into(),
                        ));
                    }
                    let c = (-self.inner(pole, x)).max(1.0);
                    let r = c.acosh();
                    let s = (c * c - 1.0).sqrt();
                    let radial = if s > 1e-9 {
                        let mut w = linalg::scale(x, c);
                        linalg::axpy(&mut w, -1.0, pole);
                        Some(linalg::scale(&w, 1.0 / s))
                    } else {
                        None
                    };
                    Ok(Polar { r, radial })
                } else {
                    // de Sitter slicing around the timelike axis Z0 = pole:
                    // sinh r = Z0 . x, radial = (-Z0 + sinh r x) / cosh r.
                    if (self.inner(pole, pole) + 1.0).abs() > 1e-9 {
                        return Err(LabError::Domain(
                            "de Sitter polar data needs a unit timelike axis as pole".into(),
                        ));
                    }
                    let sh = self.inner(pole, x);
                    let r = sh.asinh();
                    let ch = (1.0 + sh * sh).sqrt();
                    let mut w = linalg::scale(x, sh);
                    linalg::axpy(&mut w, -1.0, pole);
                    Ok(Polar { r, radial: Some(linalg::scale(&w, 1.0 / ch)) })
                }
            }
        }
    }

    /// Geodesic from `pole` with unit initial direction `dir`, evaluated at
    /// arc length `r` (pseudo-spheres and Euclidean flat space).
    pub fn geodesic(&self, pole: &[f64], dir: &[f64], r: f64) -> Vec<f64> {
        match self.kind {
            Kind::Flat => {
                let mut x = pole.to_vec();
                linalg::axpy(&mut x, r, dir);
                x
            }
            Kind::PseudoSphere => {
                if self.mu > 0.0 {
                    let mut x = linalg::scale(pole, r.cos());
                    linalg::axpy(&mut x, r.sin(), dir);
                    x
                } else {
                    let mut x = linalg::scale(pole, r.cosh());
                    linalg::axpy(&mut x, r.sinh(), dir);
                    x
                }
            }
        }
    }

    fn check_on_surface(&self, x: &[f64], what: &str) -> Result<()> {
        if !self.contains(x, 1e-9) {
            return Err(LabError::Domain(format!(
                "{what} is not on the pseudo-sphere (|X.X - mu| = {:.2e})",
                (self.inner(x, x) - self.mu).abs()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Polar {
    pub r: f64,
    pub radial: Option<Vec<f64>>,
}

/// Which conformal field along the immersion to use.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldKind {
    /// Flat position field `Y(X) = X`, `alpha = 1`.
    Position,
    /// Constant (Killing) field, `alpha = 0`.
    Constant(Vec<f64>),
    /// Projection of a constant field onto the pseudo-sphere:
    /// `Y(X) = -mu Z0 + (Z0 . X) X`, `alpha = Z0 . X`.
    PseudoSphereConformal(Vec<f64>),
    /// Radial field around a pole; see the module-level sign table.
    PolarRadial(Vec<f64>),
}

/// A conformal vector field along a surface, bundled with its conformal
/// factor and the polar data of its pole when it has one.
#[derive(Debug, Clone)]
pub struct ConformalField {
    pub kind: FieldKind,
    pub space: AmbientSpace,
}

impl ConformalField {
    pub fn new(space: AmbientSpace, kind: FieldKind) -> Result<Self> {
        match (&kind, space.kind) {
            (FieldKind::Position, Kind::Flat) => {}
            (FieldKind::Position, Kind::PseudoSphere) => {
                return Err(LabError::Argument(
                    "the position field is conformal only in flat space; use a radial field"
                        .into(),
                ));
            }
            (FieldKind::Constant(z), _) | (FieldKind::PseudoSphereConformal(z), _) => {
                if z.len() != space.ambient_dim() {
                    return Err(LabError::Argument("field vector has wrong dimension".into()));
                }
            }
            (FieldKind::PolarRadial(pole), Kind::Flat) => {
                if pole.len() != space.ambient_dim() {
                    return Err(LabError::Argument("pole has wrong dimension".into()));
                }
            }
            (FieldKind::PolarRadial(pole), Kind::PseudoSphere) => {
                if space.mu > 0.0 && space.q == 1 {
                    // de Sitter: pole is the timelike slicing axis.
                    if (space.inner(pole, pole) + 1.0).abs() > 1e-9 {
                        return Err(LabError::Domain(
                            "de Sitter radial field needs a unit timelike axis".into(),
                        ));
                    }
                } else if !space.contains(pole, 1e-9) {
                    return Err(LabError::Domain("pole is not on the pseudo-sphere".into()));
                }
            }
        }
        Ok(ConformalField { kind, space })
    }

    pub fn position(space: AmbientSpace) -> Self {
        ConformalField::new(space, FieldKind::Position).expect("position field in flat space")
    }

    pub fn radial(space: AmbientSpace, pole: Vec<f64>) -> Result<Self> {
        ConformalField::new(space, FieldKind::PolarRadial(pole))
    }

    /// The `Z0` realizing a radial field as a pseudo-sphere projection field.
    fn radial_z0(&self, pole: &[f64]) -> Vec<f64> {
        let space = &self.space;
        if space.mu > 0.0 && space.q == 0 {
            pole.to_vec() // sphere: Z0 = pole, alpha = cos r
        } else if space.mu < 0.0 {
            linalg::scale(pole, -1.0) // hyperbolic: Z0 = -pole, alpha = cosh r
        } else {
            pole.to_vec() // de Sitter: pole already is the timelike axis Z0
        }
    }

    /// Field value at an ambient point `x`.
    pub fn value(&self, x: &[f64]) -> Vec<f64> {
        match &self.kind {
            FieldKind::Position => x.to_vec(),
            FieldKind::Constant(z) => z.clone(),
            FieldKind::PseudoSphereConformal(z0) => psc_value(&self.space, z0, x),
            FieldKind::PolarRadial(pole) => match self.space.kind {
                Kind::Flat => linalg::sub(x, pole),
                Kind::PseudoSphere => psc_value(&self.space, &self.radial_z0(pole), x),
            },
        }
    }

    /// Conformal factor at `x` (defined by `L_Y g = 2 alpha g`).
    pub fn alpha(&self, x: &[f64]) -> f64 {
        match &self.kind {
            FieldKind::Position => 1.0,
            FieldKind::Constant(_) => 0.0,
            FieldKind::PseudoSphereConformal(z0) => self.space.inner(z0, x),
            FieldKind::PolarRadial(pole) => match self.space.kind {
                Kind::Flat => 1.0,
                Kind::PseudoSphere => self.space.inner(&self.radial_z0(pole), x),
            },
        }
    }

    /// Jet evaluation of the field along a curve/surface jet of `x`.
    pub fn value_jet(&self, x: &[Jet2]) -> Vec<Jet2> {
        match &self.kind {
            FieldKind::Position => x.to_vec(),
            FieldKind::Constant(z) => z.iter().map(|&c| Jet2::constant(c)).collect(),
            FieldKind::PseudoSphereConformal(z0) => psc_value_jet(&self.space, z0, x),
            FieldKind::PolarRadial(pole) => match self.space.kind {
                Kind::Flat => x
                    .iter()
                    .zip(pole)
                    .map(|(xj, &p)| *xj - p)
                    .collect(),
                Kind::PseudoSphere => psc_value_jet(&self.space, &self.radial_z0(pole), x),
            },
        }
    }

    /// The pole of a radial field, if the field has one.
    pub fn pole(&self) -> Option<&[f64]> {
        match &self.kind {
            FieldKind::PolarRadial(p) => Some(p),
            _ => None,
        }
    }

    /// Label used in reports.
    pub fn label(&self) -> String {
        match &self.kind {
            FieldKind::Position => "position".into(),
            FieldKind::Constant(_) => "constant".into(),
            FieldKind::PseudoSphereConformal(_) => "projected_constant".into(),
            FieldKind::PolarRadial(_) => "radial".into(),
        }
    }
}

fn psc_value(space: &AmbientSpace, z0: &[f64], x: &[f64]) -> Vec<f64> {
    let c = space.inner(z0, x);
    let mut out = linalg::scale(x, c);
    linalg::axpy(&mut out, -space.mu, z0);
    out
}

fn psc_value_jet(space: &AmbientSpace, z0: &[f64], x: &[Jet2]) -> Vec<Jet2> {
    let z0j: Vec<Jet2> = z0.iter().map(|&c| Jet2::constant(c)).collect();
    let c = space.inner_jet(&z0j, x);
    x.iter()
        .zip(z0)
        .map(|(xj, &z)| *xj * c - Jet2::constant(space.mu * z))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signature_inner_products() {
        let r3 = AmbientSpace::euclidean(3);
        assert_eq!(r3.inner(&[1.0, 2.0, 3.0], &[1.0, 0.0, 0.0]), 1.0);
        let r31 = AmbientSpace::flat(3, 1);
        assert_eq!(r31.inner(&[0.0, 0.0, 0.0, 1.0], &[0.0, 0.0, 0.0, 1.0]), -1.0);
        let h3 = AmbientSpace::hyperbolic(3);
        let x = [0.0, 0.0, 0.0, 1.0];
        assert_eq!(h3.inner(&x, &x), h3.mu);
    }

    #[test]
    fn named_constructors_have_expected_signatures() {
        let s = AmbientSpace::sphere(2);
        assert_eq!((s.p, s.q, s.mu), (3, 0, 1.0));
        assert_eq!(s.intrinsic_dim(), 2);
        let h = AmbientSpace::hyperbolic(3);
        assert_eq!((h.p, h.q, h.mu), (3, 1, -1.0));
        assert_eq!(h.curvature(), -1.0);
        let ds = AmbientSpace::de_sitter(3);
        assert_eq!((ds.p, ds.q, ds.mu), (3, 1, 1.0));
        assert_eq!(ds.curvature(), 1.0);
    }

    #[test]
    fn parse_names() {
        assert_eq!(AmbientSpace::parse("R3").unwrap(), AmbientSpace::euclidean(3));
        assert_eq!(AmbientSpace::parse("S3").unwrap(), AmbientSpace::sphere(3));
        assert_eq!(AmbientSpace::parse("H3").unwrap(), AmbientSpace::hyperbolic(3));
        assert_eq!(AmbientSpace::parse("dS3").unwrap(), AmbientSpace::de_sitter(3));
        assert_eq!(AmbientSpace::parse("R3,1").unwrap(), AmbientSpace::flat(3, 1));
        assert!(AmbientSpace::parse("Q7").is_err());
    }

    #[test]
    fn project_tangent_is_idempotent_and_orthogonal() {
        let s2 = AmbientSpace::sphere(2);
        let x = [0.0, 0.0, 1.0];
        let v = [1.0, 0.0, 1.0];
        let t = s2.project_tangent(&x, &v);
        assert!(linalg::norm(&linalg::sub(&t, &[1.0, 0.0, 0.0])) < 1e-15);
        let tt = s2.project_tangent(&x, &t);
        assert!(linalg::norm(&linalg::sub(&tt, &t)) < 1e-15);
        assert!(s2.inner(&t, &x).abs() < 1e-12);

        let h2 = AmbientSpace::hyperbolic(2);
        let x = [0.0, 0.0, 1.0];
        let v = [0.0, 1.0, 1.0];
        let t = h2.project_tangent(&x, &v);
        assert!(linalg::norm(&linalg::sub(&t, &[0.0, 1.0, 0.0])) < 1e-15);
        assert!(h2.inner(&t, &x).abs() < 1e-12);
    }

    #[test]
    fn polar_matches_known_distances() {
        let s2 = AmbientSpace::sphere(2);
        let p = s2.polar(&[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0]).unwrap();
        assert!((p.r - std::f64::consts::FRAC_PI_2).abs() < 1e-14);

        let h2 = AmbientSpace::hyperbolic(2);
        let x = [1.0f64.sinh(), 0.0, 1.0f64.cosh()];
        let p = h2.polar(&[0.0, 0.0, 1.0], &x).unwrap();
        assert!((p.r - 1.0).abs() < 1e-14);

        let r3 = AmbientSpace::euclidean(3);
        let p = r3.polar(&[0.0; 3], &[3.0, 4.0, 0.0]).unwrap();
        assert!((p.r - 5.0).abs() < 1e-14);
        let rad = p.radial.unwrap();
        assert!(linalg::norm(&linalg::sub(&rad, &[0.6, 0.8, 0.0])) < 1e-14);
    }

    #[test]
    fn polar_walk_roundtrip() {
        // Walking distance r from the pole along a direction and asking for
        // polar data back reproduces r and the transported radial direction.
        let spaces = [
            AmbientSpace::sphere(2),
            AmbientSpace::hyperbolic(2),
            AmbientSpace::euclidean(3),
        ];
        for space in spaces {
            let pole = if space.kind == Kind::Flat {
                vec![0.0; 3]
            } else {
                vec![0.0, 0.0, 1.0]
            };
            let dir = vec![1.0, 0.0, 0.0]; // unit, tangent at pole in all three
            for &r in &[0.3, 0.9, 1.4] {
                let x = space.geodesic(&pole, &dir, r);
                assert!(space.contains(&x, 1e-12));
                let p = space.polar(&pole, &x).unwrap();
                assert!((p.r - r).abs() < 1e-12, "r mismatch in {space:?}");
                // Re-walk from the pole and compare.
                let x2 = space.geodesic(&pole, &dir, p.r);
                assert!(linalg::norm(&linalg::sub(&x2, &x)) < 1e-9);
            }
        }
    }

    #[test]
    fn degenerate_polar_flags_radial() {
        let s2 = AmbientSpace::sphere(2);
        let p = s2.polar(&[0.0, 0.0, 1.0], &[0.0, 0.0, 1.0]).unwrap();
        assert!(p.radial.is_none());
        let anti = s2.polar(&[0.0, 0.0, 1.0], &[0.0, 0.0, -1.0]).unwrap();
        assert!((anti.r - std::f64::consts::PI).abs() < 1e-12);
        assert!(anti.radial.is_none());
    }

    #[test]
    fn pseudo_sphere_conformal_field_is_tangent() {
        let spaces = [
            AmbientSpace::sphere(3),
            AmbientSpace::hyperbolic(3),
            AmbientSpace::de_sitter(3),
        ];
        let z0 = vec![0.25, -0.5, 0.75, 0.4];
        for space in spaces {
            let field =
                ConformalField::new(space, FieldKind::PseudoSphereConformal(z0.clone())).unwrap();
            // A couple of on-surface points.
            let pts: Vec<Vec<f64>> = match (space.mu > 0.0, space.q) {
                (true, 0) => vec![vec![0.5, 0.5, 0.5, 0.5], vec![1.0, 0.0, 0.0, 0.0]],
                (false, _) => {
                    vec![vec![0.3, 0.1, 0.2, (1.0f64 + 0.09 + 0.01 + 0.04).sqrt()]]
                }
                (true, _) => vec![vec![(1.0f64 + 0.25).sqrt(), 0.0, 0.0, 0.5]],
            };
            for x in pts {
                assert!(space.contains(&x, 1e-12), "test point not on {space:?}");
                let y = field.value(&x);
                assert!(
                    space.inner(&y, &x).abs() < MEMBERSHIP_TOL,
                    "field not tangent in {space:?}"
                );
                assert!((field.alpha(&x) - space.inner(&z0, &x)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn radial_field_matches_sign_table() {
        // Sphere: Y = sin r d_r, alpha = cos r.
        let s2 = AmbientSpace::sphere(2);
        let pole = vec![0.0, 0.0, 1.0];
        let field = ConformalField::radial(s2, pole.clone()).unwrap();
        let r: f64 = 0.8;
        let x = vec![r.sin(), 0.0, r.cos()];
        let y = field.value(&x);
        let radial = s2.polar(&pole, &x).unwrap().radial.unwrap();
        assert!(linalg::norm(&linalg::sub(&y, &linalg::scale(&radial, r.sin()))) < 1e-14);
        assert!((field.alpha(&x) - r.cos()).abs() < 1e-15);

        // Hyperbolic: Y = sinh r d_r, alpha = cosh r.
        let h2 = AmbientSpace::hyperbolic(2);
        let pole = vec![0.0, 0.0, 1.0];
        let field = ConformalField::radial(h2, pole.clone()).unwrap();
        let x = vec![r.sinh(), 0.0, r.cosh()];
        let y = field.value(&x);
        let radial = h2.polar(&pole, &x).unwrap().radial.unwrap();
        assert!(linalg::norm(&linalg::sub(&y, &linalg::scale(&radial, r.sinh()))) < 1e-13);
        assert!((field.alpha(&x) - r.cosh()).abs() < 1e-14);

        // de Sitter: Y = cosh r d_r, alpha = sinh r, with X = (cosh r theta, sinh r).
        let ds3 = AmbientSpace::de_sitter(3);
        let z0 = vec![0.0, 0.0, 0.0, -1.0];
        let field = ConformalField::radial(ds3, z0.clone()).unwrap();
        let theta = [0.6, 0.8, 0.0];
        let x = vec![r.cosh() * theta[0], r.cosh() * theta[1], r.cosh() * theta[2], r.sinh()];
        assert!(ds3.contains(&x, 1e-12));
        assert!((field.alpha(&x) - r.sinh()).abs() < 1e-14);
        let y = field.value(&x);
        let radial = ds3.polar(&z0, &x).unwrap().radial.unwrap();
        assert!(linalg::norm(&linalg::sub(&y, &linalg::scale(&radial, r.cosh()))) < 1e-13);
        // The radial direction is timelike here.
        assert!((ds3.inner(&radial, &radial) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn position_field_in_flat_space() {
        let r3 = AmbientSpace::euclidean(3);
        let field = ConformalField::position(r3);
        let x = vec![1.0, 2.0, 2.0];
        assert_eq!(field.value(&x), x);
        assert_eq!(field.alpha(&x), 1.0);
    }

    /// The defining conformal property L_Y g = 2 alpha g, checked by
    /// numerically differentiating Y along surface curves through x:
    /// inner(D_U Y, V) + inner(D_V Y, U) = 2 alpha inner(U, V).
    #[test]
    fn conformal_property_by_curve_differentiation() {
        let spaces = [
            AmbientSpace::sphere(3),
            AmbientSpace::hyperbolic(3),
            AmbientSpace::de_sitter(3),
        ];
        let mut rng = crate::linalg::SplitMix64::new(42);
        for space in spaces {
            let n = space.ambient_dim();
            let x = match (space.mu > 0.0, space.q) {
                (true, 0) => space.project_point(&vec![0.3, -0.2, 0.5, 0.9]).unwrap(),
                (false, _) => {
                    let sp = [0.3, -0.2, 0.5];
                    let t = (1.0 + sp.iter().map(|a| a * a).sum::<f64>()).sqrt();
                    vec![sp[0], sp[1], sp[2], t]
                }
                (true, _) => {
                    let v = [1.3, -0.2, 0.5, 0.4];
                    // normalize spacelike vector onto dS
                    space.project_point(&v).unwrap()
                }
            };
            let fields = vec![
                ConformalField::new(space, FieldKind::Constant(vec![0.3, 0.7, -0.2, 0.5]))
                    .unwrap(),
                ConformalField::new(
                    space,
                    FieldKind::PseudoSphereConformal(vec![1.0, -0.3, 0.2, 0.6]),
                )
                .unwrap(),
            ];
            for field in fields {
                for _ in 0..5 {
                    let mut u: Vec<f64> = (0..n).map(|_| rng.next_signed()).collect();
                    let mut v: Vec<f64> = (0..n).map(|_| rng.next_signed()).collect();
                    u = space.project_tangent(&x, &u);
                    v = space.project_tangent(&x, &v);
                    let h = 1e-5;
                    let dy = |dir: &[f64]| -> Vec<f64> {
                        // Central difference of Y along the projected curve
                        // t -> normalize(x + t dir).
                        let cp = space.project_point(&linalg::add(&x, &linalg::scale(dir, h)));
                        let cm = space.project_point(&linalg::sub(&x, &linalg::scale(dir, h)));
                        let (cp, cm) = (cp.unwrap(), cm.unwrap());
                        linalg::scale(
                            &linalg::sub(&field.value(&cp), &field.value(&cm)),
                            1.0 / (2.0 * h),
                        )
                    };
                    let lhs = space.inner(&dy(&u), &v) + space.inner(&dy(&v), &u);
                    let rhs = 2.0 * field.alpha(&x) * space.inner(&u, &v);
                    assert!(
                        (lhs - rhs).abs() < 1e-8 * (1.0 + rhs.abs()),
                        "conformal property failed in {space:?}: {lhs} vs {rhs}"
                    );
                }
            }
        }
    }
}
