//! Pipeline configuration file: intrinsics plus the per-stage configs.

use serde::{Deserialize, Serialize};

use crate::camera::Intrinsics;
use crate::correspond::{DetectorConfig, MatcherConfig};
use crate::error::Result;
use crate::gate::GateConfig;
use crate::solver::SolverConfig;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// Left/right intrinsics. When absent, image commands derive a rough
    /// default from the image size and the solve command uses
    /// [`PipelineConfig::default_k`].
    pub k0: Option<Intrinsics>,
    pub k1: Option<Intrinsics>,
    pub detector: DetectorConfig,
    pub matcher: MatcherConfig,
    pub solver: SolverConfig,
    pub gate: GateConfig,
    pub seed: Option<u64>,
}

impl PipelineConfig {
    /// Fallback intrinsics for commands that never see an image.
    pub fn default_k() -> Intrinsics {
        Intrinsics {
            f: 500.0,
            cx: 320.0,
            cy: 240.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(k) = &self.k0 {
            k.validate()?;
        }
        if let Some(k) = &self.k1 {
            k.validate()?;
        }
        self.solver.validate()?;
        self.gate.validate()?;
        Ok(())
    }
}
