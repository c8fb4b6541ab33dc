//! Accept/reject decision for an estimated rectification.
//!
//! A solution is trusted for stereo only with enough matches, a high
//! enough inlier rate, and correction angles inside conservative bounds;
//! otherwise the caller should fall back to single-image depth. Counts
//! and rates are inclusive bounds, angle bounds are strict.

use serde::{Deserialize, Serialize};

use crate::solver::RectificationSolution;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GateConfig {
    pub min_matches: usize,
    pub min_inlier_rate: f64,
    /// Inlier definition for the rate: |dy| after correction, pixels.
    pub inlier_dy_px: f64,
    /// Strict bound on per-camera pitch and roll, degrees.
    pub max_abs_pitch_roll_deg: f64,
    /// Strict bound on relative pan, degrees.
    pub max_rel_pan_deg: f64,
}

impl Default for GateConfig {
    fn default() -> Self {
        GateConfig {
            min_matches: 100,
            min_inlier_rate: 0.60,
            inlier_dy_px: 1.0,
            max_abs_pitch_roll_deg: 5.0,
            max_rel_pan_deg: 22.0,
        }
    }
}

impl GateConfig {
    // Negated comparisons keep NaN config values failing closed.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> crate::error::Result<()> {
        if !(self.min_inlier_rate > 0.0 && self.min_inlier_rate <= 1.0) {
            return Err(crate::error::Error::Config(
                "min_inlier_rate must be in (0, 1]".into(),
            ));
        }
        if !(self.inlier_dy_px > 0.0
            && self.max_abs_pitch_roll_deg > 0.0
            && self.max_rel_pan_deg > 0.0)
        {
            return Err(crate::error::Error::Config(
                "gate bounds must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FallbackReason {
    TooFewMatches,
    LowInlierRate,
    PitchOutOfBounds,
    RollOutOfBounds,
    RelPanOutOfBounds,
    SolverDegenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateOutcome {
    Stereo,
    MonoFallback,
}

/// The gate's verdict: `Stereo` exactly when `reasons` is empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateDecision {
    pub outcome: GateOutcome,
    pub reasons: Vec<FallbackReason>,
}

impl GateDecision {
    pub fn is_stereo(&self) -> bool {
        self.outcome == GateOutcome::Stereo
    }

    /// Decision for the case where the solver itself failed (degenerate
    /// geometry or too few matches to attempt a fit).
    pub fn solver_degenerate() -> GateDecision {
        GateDecision {
            outcome: GateOutcome::MonoFallback,
            reasons: vec![FallbackReason::SolverDegenerate],
        }
    }

    fn from_reasons(reasons: Vec<FallbackReason>) -> GateDecision {
        GateDecision {
            outcome: if reasons.is_empty() {
                GateOutcome::Stereo
            } else {
                GateOutcome::MonoFallback
            },
            reasons,
        }
    }
}

/// Evaluates every criterion (no short-circuit) and accumulates all failed
/// ones, in check order: match count, inlier rate, per-camera pitch,
/// per-camera roll, relative pan.
///
/// The solution's inlier rate must have been measured after applying the
/// correction with the final solver threshold equal to `inlier_dy_px`,
/// which holds for the default configurations.
// Negated comparisons keep NaN angles failing closed.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn evaluate(sol: &RectificationSolution, cfg: &GateConfig) -> GateDecision {
    let mut reasons = Vec::new();

    if sol.match_count < cfg.min_matches {
        reasons.push(FallbackReason::TooFewMatches);
    }
    if sol.inlier_rate < cfg.min_inlier_rate {
        reasons.push(FallbackReason::LowInlierRate);
    }

    let bound = cfg.max_abs_pitch_roll_deg;
    let pitch0 = sol.omega0.x.to_degrees().abs();
    let pitch1 = sol.omega1.x.to_degrees().abs();
    if !(pitch0 < bound && pitch1 < bound) {
        reasons.push(FallbackReason::PitchOutOfBounds);
    }
    let roll0 = sol.omega0.z.to_degrees().abs();
    let roll1 = sol.omega1.z.to_degrees().abs();
    if !(roll0 < bound && roll1 < bound) {
        reasons.push(FallbackReason::RollOutOfBounds);
    }
    if !(sol.d_omega.y.to_degrees().abs() < cfg.max_rel_pan_deg) {
        reasons.push(FallbackReason::RelPanOutOfBounds);
    }

    GateDecision::from_reasons(reasons)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camera::RotationVector;
    use crate::solver::{split_corrections, ModelKind};

    fn solution(
        match_count: usize,
        inlier_rate: f64,
        d_omega_deg: [f64; 3],
    ) -> RectificationSolution {
        let d_omega = RotationVector::new(
            d_omega_deg[0].to_radians(),
            d_omega_deg[1].to_radians(),
            d_omega_deg[2].to_radians(),
        );
        let (omega0, omega1) = split_corrections(&d_omega, None, None);
        RectificationSolution {
            model: ModelKind::FourParam,
            d_omega,
            omega_y1: None,
            omega_z1: None,
            d_f: 0.0,
            omega0,
            omega1,
            match_count,
            inlier_count: (match_count as f64 * inlier_rate).round() as usize,
            inlier_rate,
            rms_dy_inliers: 0.0,
            iterations: 3,
        }
    }

    #[test]
    fn healthy_solution_is_stereo() {
        let d = evaluate(&solution(150, 0.85, [0.0, 0.0, 0.0]), &GateConfig::default());
        assert!(d.is_stereo());
        assert!(d.reasons.is_empty());
    }

    #[test]
    fn match_count_boundary() {
        let cfg = GateConfig::default();
        let d = evaluate(&solution(99, 0.9, [0.0, 0.0, 0.0]), &cfg);
        assert_eq!(d.outcome, GateOutcome::MonoFallback);
        assert_eq!(d.reasons, vec![FallbackReason::TooFewMatches]);
        assert!(evaluate(&solution(100, 0.9, [0.0, 0.0, 0.0]), &cfg).is_stereo());
    }

    #[test]
    fn inlier_rate_boundary_is_inclusive() {
        let cfg = GateConfig::default();
        assert!(evaluate(&solution(150, 0.60, [0.0, 0.0, 0.0]), &cfg).is_stereo());
        let d = evaluate(&solution(150, 0.599, [0.0, 0.0, 0.0]), &cfg);
        assert_eq!(d.reasons, vec![FallbackReason::LowInlierRate]);
    }

    #[test]
    fn relative_pan_bound_is_strict() {
        let cfg = GateConfig::default();
        let d = evaluate(&solution(150, 0.9, [0.0, 23.0, 0.0]), &cfg);
        assert_eq!(d.reasons, vec![FallbackReason::RelPanOutOfBounds]);
        // 21.9 relative pan splits to +-10.95 per camera: in bounds.
        assert!(evaluate(&solution(150, 0.9, [0.0, 21.9, 0.0]), &cfg).is_stereo());
        let d = evaluate(&solution(150, 0.9, [0.0, 22.1, 0.0]), &cfg);
        assert_eq!(d.reasons, vec![FallbackReason::RelPanOutOfBounds]);
    }

    #[test]
    fn pitch_bound_is_strict_per_camera() {
        let cfg = GateConfig::default();
        // Split pitch is half the relative pitch: 9.98 -> 4.99 per camera.
        assert!(evaluate(&solution(150, 0.9, [9.98, 0.0, 0.0]), &cfg).is_stereo());
        let d = evaluate(&solution(150, 0.9, [10.02, 0.0, 0.0]), &cfg);
        assert_eq!(d.reasons, vec![FallbackReason::PitchOutOfBounds]);
    }

    #[test]
    fn roll_bound_checked_on_split_values() {
        let cfg = GateConfig::default();
        let d = evaluate(&solution(150, 0.9, [0.0, 0.0, 10.5]), &cfg);
        assert_eq!(d.reasons, vec![FallbackReason::RollOutOfBounds]);
    }

    #[test]
    fn all_reasons_accumulate_in_order() {
        let d = evaluate(&solution(10, 0.1, [11.0, 23.0, 11.0]), &GateConfig::default());
        assert_eq!(
            d.reasons,
            vec![
                FallbackReason::TooFewMatches,
                FallbackReason::LowInlierRate,
                FallbackReason::PitchOutOfBounds,
                FallbackReason::RollOutOfBounds,
                FallbackReason::RelPanOutOfBounds,
            ]
        );
    }

    #[test]
    fn improving_a_metric_never_flips_to_fallback() {
        let cfg = GateConfig::default();
        let base = solution(120, 0.7, [2.0, 5.0, 1.0]);
        assert!(evaluate(&base, &cfg).is_stereo());
        let mut better = base.clone();
        better.match_count += 100;
        assert!(evaluate(&better, &cfg).is_stereo());
        let mut better = base.clone();
        better.inlier_rate = 0.95;
        assert!(evaluate(&better, &cfg).is_stereo());
        let mut better = base;
        better.d_omega.y /= 2.0;
        let (w0, w1) = split_corrections(&better.d_omega, None, None);
        better.omega0 = w0;
        better.omega1 = w1;
        assert!(evaluate(&better, &cfg).is_stereo());
    }

    #[test]
    fn solver_degenerate_decision() {
        let d = GateDecision::solver_degenerate();
        assert_eq!(d.outcome, GateOutcome::MonoFallback);
        assert_eq!(d.reasons, vec![FallbackReason::SolverDegenerate]);
    }
}
