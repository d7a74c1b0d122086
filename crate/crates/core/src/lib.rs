//! Numerical laboratory for curvature machinery on immersed hypersurfaces
//! of constant-curvature spaces.
//!
//! The crate evaluates integral identities relating weighted higher-order
//! mean curvatures, inequality chains, Alexandrov-type rigidity defects, and
//! eigenvalue bounds for divergence-form operators, on a zoo of closed
//! parametric surfaces in flat space, the round sphere, hyperbolic space and
//! de Sitter space. All ambient geometry is done through the embedding of the
//! space form as a pseudo-sphere `{X . X = mu}` in a signature space `R^{p,q}`,
//! so there are no chart singularities to dodge.
//!
//! Module map:
//!
//! - [`linalg`]: small dense symmetric eigensolves, compensated summation.
//! - [`jet`]: second-order dual numbers; derivatives exact to machine precision.
//! - [`ambient`]: signature spaces, pseudo-spheres, conformal vector fields.
//! - [`immersion`]: the parametric surface zoo and per-point geometric frames.
//! - [`curvature`]: Newton transformations, sigma_k, and the epsilon-tensor oracle.
//! - [`quadrature`]: product Gauss/trapezoid rules against the area element.
//! - [`identities`]: integral identity and inequality-chain reports.
//! - [`rigidity`]: oscillation and umbilicity defect probes.
//! - [`spectral`]: FEM eigenvalue bounds (surface operators and the planar
//!   Steklov problem).
//! - [`report`]: JSON/CSV emission for batch runs.

pub mod ambient;
pub mod curvature;
pub mod error;
pub mod identities;
pub mod immersion;
pub mod jet;
pub mod linalg;
pub mod quadrature;
pub mod report;
pub mod rigidity;
pub mod spectral;
pub mod weights;

pub use error::{LabError, Result};
