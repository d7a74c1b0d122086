//! FEM verification of eigenvalue bounds at desk scale: piecewise-linear
//! elements on structured triangulations of the analytic surfaces (`m = 2`),
//! and the Steklov problem on star-shaped planar domains.

pub mod fem;
pub mod mesh;
pub mod steklov;

pub use fem::{garay_check, lambda1, lambda1_on_mesh, EigenReport};
pub use mesh::{triangulate, SurfaceMesh, VertexData};
pub use steklov::{steklov_p1, BoundaryShape, SteklovReport};
