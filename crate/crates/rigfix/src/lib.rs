//! Online self-rectification for a bendable two-camera rig.
//!
//! From noisy feature correspondences between a stereo pair, estimates
//! small per-camera rotation corrections and a relative focal-length
//! correction, gates the result against conservative bounds, and warps the
//! pair so corresponding points share image rows. A deterministic simulator
//! provides ground-truth scenarios for testing, and a CLI drives the
//! pipeline on files.

pub mod camera;
pub mod cli;
pub mod correspond;
pub mod error;
pub mod gate;
pub mod gray;
pub mod io;
pub mod rectify;
pub mod sim;
pub mod solver;

pub use camera::{Intrinsics, NormalizedPoint, PixelPoint, RotationVector, ScenePoint};
pub use correspond::{Corner, Match, MatchSet};
pub use error::{Error, Result};
pub use gate::{evaluate, FallbackReason, GateConfig, GateDecision, GateOutcome};
pub use gray::GrayImage;
pub use rectify::{apply_to_matches, build_maps, stats, warp, DisparityStats, RectifyMap};
pub use solver::{robust_solve, ModelKind, RectificationSolution, SolverConfig};
