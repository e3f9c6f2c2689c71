//! Feature-based constrained spaces (C-spaces) for viewpoint planning:
//! sets of sensor positions satisfying visibility, feature geometry,
//! accuracy, occlusion, multi-device, workspace and multi-feature
//! constraints.

pub mod config;
pub mod cspace;
pub mod domain;
pub mod error;
pub mod integrate;
pub mod joint;
pub mod occlusion;
pub mod scaling;
pub mod verify;

pub use cspace::{ConstrainedSpace, ConstraintTag, OrientationRange, Reference, ReferenceFrame};
pub use error::{CspaceError, Result};

/// Size the global thread pool from `CSPACE_THREADS`, once. Later calls
/// are no-ops.
pub fn init_threads() {
    if let Some(n) = std::env::var("CSPACE_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}
