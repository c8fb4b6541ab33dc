//! Robust estimation of the rig corrections from a match set.
//!
//! The constraint rows form an over-constrained linear system solved by
//! iterated least squares with a decreasing inlier-threshold schedule.
//! Estimation runs in two stages: the reduced system (relative rotation
//! plus focal scale) is solved first because it does not depend on the
//! disparity estimate; absolute pan/roll, when requested, are solved
//! afterwards on the full rows starting from the stage-one inlier set.

mod lsq;
mod rows;

pub use lsq::lsq_solve;
pub use rows::{full_coefficients, row_full, row_reduced, row_x_diagnostic, ConstraintRow};

use serde::{Deserialize, Serialize};

use crate::camera::RotationVector;
use crate::correspond::MatchSet;
use crate::error::{Error, Result};

/// Which parameters to estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Relative rotation only.
    ThreeParam,
    /// Relative rotation plus focal scale.
    FourParam,
    /// Four-parameter model plus absolute right pan.
    FiveParam,
    /// Four-parameter model plus absolute right pan and roll.
    SixParam,
}

impl ModelKind {
    /// Column indices into the full six-coefficient row.
    pub fn columns(&self) -> &'static [usize] {
        match self {
            ModelKind::ThreeParam => &[0, 1, 2],
            ModelKind::FourParam => &[0, 1, 2, 5],
            ModelKind::FiveParam => &[0, 1, 2, 3, 5],
            ModelKind::SixParam => &[0, 1, 2, 3, 4, 5],
        }
    }

    pub fn param_names(&self) -> &'static [&'static str] {
        match self {
            ModelKind::ThreeParam => &["dw_x", "dw_y", "dw_z"],
            ModelKind::FourParam => &["dw_x", "dw_y", "dw_z", "d_f"],
            ModelKind::FiveParam => &["dw_x", "dw_y", "dw_z", "w_y1", "d_f"],
            ModelKind::SixParam => &["dw_x", "dw_y", "dw_z", "w_y1", "w_z1", "d_f"],
        }
    }

    pub fn param_count(&self) -> usize {
        self.columns().len()
    }

    /// True when a second stage solving absolute angles is required.
    pub fn needs_absolute_stage(&self) -> bool {
        matches!(self, ModelKind::FiveParam | ModelKind::SixParam)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Strictly decreasing inlier thresholds, pixels.
    pub thresholds_px: Vec<f64>,
    /// Minimum matches required in every iteration's solve set; the
    /// effective floor is `max(min_matches, 3 * parameter count)`.
    pub min_matches: usize,
    /// Cap on iterations per stage (the schedule is truncated to this).
    pub max_iterations: usize,
    pub model: ModelKind,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            thresholds_px: vec![4.0, 2.0, 1.0],
            min_matches: 12,
            max_iterations: 8,
            model: ModelKind::FourParam,
        }
    }
}

impl SolverConfig {
    // Negated comparison keeps NaN thresholds failing closed.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        if self.thresholds_px.is_empty() {
            return Err(Error::Config("empty threshold schedule".into()));
        }
        let mut prev = f64::INFINITY;
        for &t in &self.thresholds_px {
            if !(t > 0.0) {
                return Err(Error::Config(format!("threshold {t} must be > 0")));
            }
            if t >= prev {
                return Err(Error::Config(
                    "thresholds must be strictly decreasing".into(),
                ));
            }
            prev = t;
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be >= 1".into()));
        }
        Ok(())
    }

    fn required_matches(&self, model: ModelKind) -> usize {
        self.min_matches.max(3 * model.param_count())
    }
}

/// Estimated corrections plus fit diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RectificationSolution {
    pub model: ModelKind,
    /// Relative rotation `omega1 - omega0`.
    pub d_omega: RotationVector,
    /// Absolute right-camera pan, when estimated.
    pub omega_y1: Option<f64>,
    /// Absolute right-camera roll, when estimated.
    pub omega_z1: Option<f64>,
    /// Relative focal scale; zero for the three-parameter model.
    pub d_f: f64,
    /// Per-camera corrections after splitting.
    pub omega0: RotationVector,
    pub omega1: RotationVector,
    pub match_count: usize,
    pub inlier_count: usize,
    pub inlier_rate: f64,
    /// RMS of the constraint residual over final inliers, normalized units.
    pub rms_dy_inliers: f64,
    pub iterations: usize,
}

/// Splits the relative rotation into per-camera corrections.
///
/// Pitch is always split evenly (absolute pitch is a gauge direction). Pan
/// and roll split evenly too unless their absolute right-camera values were
/// estimated, in which case `omega0 = omega1 - d_omega` recovers the left
/// camera.
pub fn split_corrections(
    d_omega: &RotationVector,
    omega_y1: Option<f64>,
    omega_z1: Option<f64>,
) -> (RotationVector, RotationVector) {
    let omega1 = RotationVector::new(
        d_omega.x / 2.0,
        omega_y1.unwrap_or(d_omega.y / 2.0),
        omega_z1.unwrap_or(d_omega.z / 2.0),
    );
    let omega0 = omega1.sub(d_omega);
    (omega0, omega1)
}

/// Signed constraint residuals `coeffs . theta - dy` for every match,
/// normalized units.
pub fn residuals(matches: &MatchSet, theta: &[f64], model: ModelKind) -> Vec<f64> {
    let cols = model.columns();
    matches
        .matches
        .iter()
        .map(|m| {
            let c = full_coefficients(m);
            let pred: f64 = cols.iter().zip(theta).map(|(&j, t)| c[j] * t).sum();
            pred - m.dy
        })
        .collect()
}

/// Residuals of the diagnostic horizontal constraint under a solution. The
/// absolute angles default to the split values when they were not estimated.
pub fn x_constraint_residuals(matches: &MatchSet, sol: &RectificationSolution) -> Vec<f64> {
    let theta = [
        sol.d_omega.x,
        sol.d_omega.y,
        sol.d_omega.z,
        sol.omega1.y,
        sol.omega1.z,
        sol.d_f,
    ];
    matches
        .matches
        .iter()
        .map(|m| {
            let row = row_x_diagnostic(m);
            row.iter().zip(&theta).map(|(a, b)| a * b).sum()
        })
        .collect()
}

fn select_rows(matches: &MatchSet, indices: &[usize], model: ModelKind) -> Vec<ConstraintRow> {
    let cols = model.columns();
    indices
        .iter()
        .map(|&i| {
            let c = full_coefficients(&matches.matches[i]);
            ConstraintRow {
                coeffs: cols.iter().map(|&j| c[j]).collect(),
                rhs: matches.matches[i].dy,
                source: i,
            }
        })
        .collect()
}

struct StageResult {
    theta: Vec<f64>,
    inliers: Vec<usize>,
    iterations: usize,
}

/// One stage of the robust loop: solve on the current set, recompute
/// residuals on all matches, re-threshold, repeat through the schedule.
fn robust_stage(
    matches: &MatchSet,
    start: Vec<usize>,
    model: ModelKind,
    cfg: &SolverConfig,
    thresholds_norm: &[f64],
) -> Result<StageResult> {
    let required = cfg.required_matches(model);
    let mut current = start;
    let mut theta = Vec::new();
    let mut iterations = 0usize;
    for &t in thresholds_norm.iter().take(cfg.max_iterations) {
        if current.len() < required {
            return Err(Error::TooFewMatches {
                needed: required,
                got: current.len(),
            });
        }
        let rows = select_rows(matches, &current, model);
        theta = lsq_solve(&rows, model.param_names())?;
        let res = residuals(matches, &theta, model);
        current = res
            .iter()
            .enumerate()
            .filter(|(_, r)| r.abs() <= t)
            .map(|(i, _)| i)
            .collect();
        iterations += 1;
    }
    Ok(StageResult {
        theta,
        inliers: current,
        iterations,
    })
}

/// Spread of measured horizontal disparity needed before absolute angles
/// are considered identifiable, pixels.
const MIN_DISPARITY_SPREAD_PX: f64 = 20.0;

/// Robust two-stage solve over a match set.
///
/// Thresholds are given in pixels and converted to normalized units with
/// the right camera's focal length. The final inlier set is the one at the
/// last (smallest) threshold.
// Negated comparison keeps a NaN disparity spread failing closed.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn robust_solve(matches: &MatchSet, cfg: &SolverConfig) -> Result<RectificationSolution> {
    cfg.validate()?;
    matches.k1.validate()?;
    let n = matches.len();
    let stage1_model = match cfg.model {
        ModelKind::ThreeParam => ModelKind::ThreeParam,
        _ => ModelKind::FourParam,
    };
    let required = cfg
        .required_matches(stage1_model)
        .max(cfg.required_matches(cfg.model));
    if n < required {
        return Err(Error::TooFewMatches {
            needed: required,
            got: n,
        });
    }

    let f1 = matches.k1.f;
    let thresholds_norm: Vec<f64> = cfg.thresholds_px.iter().map(|t| t / f1).collect();

    let stage1 = robust_stage(
        matches,
        (0..n).collect(),
        stage1_model,
        cfg,
        &thresholds_norm,
    )?;

    let (final_model, final_stage) = if cfg.model.needs_absolute_stage() {
        // Absolute pan/roll are only identifiable over a sufficient depth
        // range; require a minimum spread of measured disparity.
        let mut dx_min = f64::INFINITY;
        let mut dx_max = f64::NEG_INFINITY;
        for &i in &stage1.inliers {
            let dx = matches.matches[i].dx;
            dx_min = dx_min.min(dx);
            dx_max = dx_max.max(dx);
        }
        let spread_px = (dx_max - dx_min) * f1;
        if !(spread_px >= MIN_DISPARITY_SPREAD_PX) {
            return Err(Error::DegenerateGeometry(format!(
                "disparity spread {spread_px:.2} px < {MIN_DISPARITY_SPREAD_PX} px; \
                 absolute pan/roll need a sufficient depth range"
            )));
        }
        let stage2 = robust_stage(matches, stage1.inliers.clone(), cfg.model, cfg, &thresholds_norm)?;
        let iterations = stage1.iterations + stage2.iterations;
        (
            cfg.model,
            StageResult {
                theta: stage2.theta,
                inliers: stage2.inliers,
                iterations,
            },
        )
    } else {
        (stage1_model, stage1)
    };

    let theta = &final_stage.theta;
    let d_omega = RotationVector::new(theta[0], theta[1], theta[2]);
    let (omega_y1, omega_z1, d_f) = match final_model {
        ModelKind::ThreeParam => (None, None, 0.0),
        ModelKind::FourParam => (None, None, theta[3]),
        ModelKind::FiveParam => (Some(theta[3]), None, theta[4]),
        ModelKind::SixParam => (Some(theta[3]), Some(theta[4]), theta[5]),
    };
    let (omega0, omega1) = split_corrections(&d_omega, omega_y1, omega_z1);

    let res = residuals(matches, theta, final_model);
    let inliers = &final_stage.inliers;
    let rms = if inliers.is_empty() {
        0.0
    } else {
        (inliers.iter().map(|&i| res[i] * res[i]).sum::<f64>() / inliers.len() as f64).sqrt()
    };

    Ok(RectificationSolution {
        model: final_model,
        d_omega,
        omega_y1,
        omega_z1,
        d_f,
        omega0,
        omega1,
        match_count: n,
        inlier_count: inliers.len(),
        inlier_rate: inliers.len() as f64 / n as f64,
        rms_dy_inliers: rms,
        iterations: final_stage.iterations,
    })
}
