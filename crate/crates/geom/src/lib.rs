//! Geometry kernel for configuration-space work: rigid poses, watertight
//! triangle meshes, convex hulls, Boolean operations, volumes, point
//! containment and ray casting.

mod assemble;
pub mod boolean;
pub mod bsp;
pub mod hull;
pub mod io;
pub mod mesh;
pub mod polytope;
pub mod pose;
pub mod ray;
pub mod shapes;

pub use boolean::{boolean, difference, intersection, union, BooleanOp};
pub use hull::convex_hull;
pub use mesh::Manifold;
pub use polytope::{ConvexPolytope, Plane};
pub use pose::{euler_to_matrix, matrix_to_euler, EulerZyx, Pose6D};
pub use ray::{raycast, Bvh, Hit, IndexedMesh, Ray};

pub type Vec3 = nalgebra::Vector3<f64>;
pub type Mat3 = nalgebra::Matrix3<f64>;

/// Distance (mm) within which a point counts as lying on a surface.
pub const BOUNDARY_TOL: f64 = 1e-6;

/// Boolean results whose volume falls below this (mm^3) are reported empty.
pub const EMPTY_VOLUME: f64 = 1e-3;

#[derive(Debug, thiserror::Error)]
pub enum GeomError {
    #[error("mesh is not watertight")]
    NotWatertight,
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, GeomError>;
