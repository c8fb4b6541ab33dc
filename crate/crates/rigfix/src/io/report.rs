//! JSON report structures. All user-facing angles are degrees; conversion
//! happens here and nowhere else.

use serde::{Deserialize, Serialize};

use crate::camera::RotationVector;
use crate::gate::GateDecision;
use crate::rectify::DisparityStats;
use crate::sim::{SceneTruth, SimConfig};
use crate::solver::{ModelKind, RectificationSolution};

fn to_deg3(w: &RotationVector) -> [f64; 3] {
    [w.x.to_degrees(), w.y.to_degrees(), w.z.to_degrees()]
}

fn from_deg3(a: [f64; 3]) -> RotationVector {
    RotationVector::new(
        a[0].to_radians(),
        a[1].to_radians(),
        a[2].to_radians(),
    )
}

/// Solve report: estimated corrections in degrees, fit diagnostics, and
/// the gate decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub model: ModelKind,
    pub d_omega_deg: [f64; 3],
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub omega_y1_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub omega_z1_deg: Option<f64>,
    pub d_f: f64,
    pub omega0_deg: [f64; 3],
    pub omega1_deg: [f64; 3],
    pub match_count: usize,
    pub inlier_count: usize,
    pub inlier_rate: f64,
    pub rms_dy_px: f64,
    pub iterations: usize,
    pub gate: GateDecision,
    /// Present when the solver failed before producing a solution.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

impl SolveReport {
    pub fn from_solution(
        sol: &RectificationSolution,
        gate: GateDecision,
        focal_px: f64,
    ) -> SolveReport {
        SolveReport {
            model: sol.model,
            d_omega_deg: to_deg3(&sol.d_omega),
            omega_y1_deg: sol.omega_y1.map(f64::to_degrees),
            omega_z1_deg: sol.omega_z1.map(f64::to_degrees),
            d_f: sol.d_f,
            omega0_deg: to_deg3(&sol.omega0),
            omega1_deg: to_deg3(&sol.omega1),
            match_count: sol.match_count,
            inlier_count: sol.inlier_count,
            inlier_rate: sol.inlier_rate,
            rms_dy_px: sol.rms_dy_inliers * focal_px,
            iterations: sol.iterations,
            gate,
            error: None,
        }
    }

    /// Report for a solver failure: zero corrections, the failure message,
    /// and a mono-fallback gate decision.
    pub fn from_failure(model: ModelKind, match_count: usize, message: String) -> SolveReport {
        SolveReport {
            model,
            d_omega_deg: [0.0; 3],
            omega_y1_deg: None,
            omega_z1_deg: None,
            d_f: 0.0,
            omega0_deg: [0.0; 3],
            omega1_deg: [0.0; 3],
            match_count,
            inlier_count: 0,
            inlier_rate: 0.0,
            rms_dy_px: 0.0,
            iterations: 0,
            gate: GateDecision::solver_degenerate(),
            error: Some(message),
        }
    }

    /// Rebuilds the internal solution (radians) from a report.
    pub fn to_solution(&self) -> RectificationSolution {
        RectificationSolution {
            model: self.model,
            d_omega: from_deg3(self.d_omega_deg),
            omega_y1: self.omega_y1_deg.map(f64::to_radians),
            omega_z1: self.omega_z1_deg.map(f64::to_radians),
            d_f: self.d_f,
            omega0: from_deg3(self.omega0_deg),
            omega1: from_deg3(self.omega1_deg),
            match_count: self.match_count,
            inlier_count: self.inlier_count,
            inlier_rate: self.inlier_rate,
            rms_dy_inliers: 0.0,
            iterations: self.iterations,
        }
    }
}

/// Ground-truth parameters in degrees, written next to simulated fixtures
/// so model comparisons can score estimation error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthReport {
    pub omega0_deg: [f64; 3],
    pub omega1_deg: [f64; 3],
    pub d_omega_deg: [f64; 3],
    pub d_f: f64,
    pub noise_sigma_px: f64,
    pub outlier_rate: f64,
    pub seed: u64,
}

impl TruthReport {
    pub fn from_scene(scene: &SceneTruth) -> TruthReport {
        TruthReport {
            omega0_deg: to_deg3(&scene.omega0),
            omega1_deg: to_deg3(&scene.omega1),
            d_omega_deg: to_deg3(&scene.d_omega),
            d_f: scene.d_f,
            noise_sigma_px: scene.noise_sigma_px,
            outlier_rate: scene.outlier_rate,
            seed: scene.seed,
        }
    }
}

/// Scenario file: the generating config, the realized truth, and the
/// sampled scene points (world rays with inverse-depth disparity).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneFile {
    pub config: SimConfig,
    pub truth: TruthReport,
    #[serde(default)]
    pub points: Vec<crate::sim::RayPoint>,
}

/// Before/after disparity statistics written by the rectify command.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub before: DisparityStats,
    pub after: DisparityStats,
}
