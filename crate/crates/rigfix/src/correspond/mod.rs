//! Feature correspondences between a stereo pair: Harris corner detection,
//! hierarchical subpixel ZSSD matching, and left-right consistency
//! filtering.

mod harris;
mod matcher;
mod pyramid;
mod zssd;

pub use harris::{harris_corners, DetectorConfig};
pub use matcher::{left_right_filter, match_hierarchical, match_one_direction, MatcherConfig};
pub use pyramid::build_pyramid;
pub use zssd::zssd_cost;

use serde::{Deserialize, Serialize};

use crate::camera::{pixel_to_normalized, Intrinsics, NormalizedPoint, PixelPoint};
use crate::error::{Error, Result};

/// A detected corner: subpixel position and Harris response.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Corner {
    pub u: f64,
    pub v: f64,
    pub score: f64,
}

/// One left/right correspondence, in pixels and in normalized coordinates.
///
/// `dx` and `dy` are the normalized-coordinate differences `x1 - x0` and
/// `y1 - y0`; `dy` is the vertical disparity the solver constrains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Match {
    pub left: PixelPoint,
    pub right: PixelPoint,
    pub n0: NormalizedPoint,
    pub n1: NormalizedPoint,
    pub dx: f64,
    pub dy: f64,
    pub zssd_cost: f64,
}

impl Match {
    /// Builds a match from pixel positions, normalizing with the given
    /// per-camera intrinsics.
    pub fn from_pixels(
        left: PixelPoint,
        right: PixelPoint,
        k0: &Intrinsics,
        k1: &Intrinsics,
        zssd_cost: f64,
    ) -> Result<Match> {
        if !zssd_cost.is_finite() || zssd_cost < 0.0 {
            return Err(Error::NonFinite("zssd cost"));
        }
        let n0 = pixel_to_normalized(&left, k0)?;
        let n1 = pixel_to_normalized(&right, k1)?;
        Ok(Match {
            left,
            right,
            n0,
            n1,
            dx: n1.x - n0.x,
            dy: n1.y - n0.y,
            zssd_cost,
        })
    }

    /// Builds a match directly from normalized coordinates (simulator path).
    pub fn from_normalized(
        n0: NormalizedPoint,
        n1: NormalizedPoint,
        k0: &Intrinsics,
        k1: &Intrinsics,
    ) -> Result<Match> {
        use crate::camera::normalized_to_pixel;
        let left = normalized_to_pixel(&n0, k0)?;
        let right = normalized_to_pixel(&n1, k1)?;
        Ok(Match {
            left,
            right,
            n0,
            n1,
            dx: n1.x - n0.x,
            dy: n1.y - n0.y,
            zssd_cost: 0.0,
        })
    }
}

/// An ordered set of matches together with the image dimensions and the
/// intrinsics used for normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchSet {
    pub matches: Vec<Match>,
    pub width: usize,
    pub height: usize,
    pub k0: Intrinsics,
    pub k1: Intrinsics,
}

impl MatchSet {
    pub fn len(&self) -> usize {
        self.matches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matches.is_empty()
    }
}
