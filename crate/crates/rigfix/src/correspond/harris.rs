//! Harris corner detection with non-maximum suppression and subpixel
//! refinement of the response peak.

use serde::{Deserialize, Serialize};

use crate::correspond::Corner;
use crate::error::{Error, Result};
use crate::gray::GrayImage;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectorConfig {
    /// Harris k in `det(M) - k * trace(M)^2`.
    pub k: f64,
    /// Chebyshev radius for non-maximum suppression, in pixels.
    pub nms_radius: usize,
    /// Cap on the number of returned corners.
    pub max_corners: usize,
    /// Detection threshold as a fraction of the maximum response.
    pub min_score_ratio: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            k: 0.04,
            nms_radius: 5,
            max_corners: 2000,
            min_score_ratio: 0.01,
        }
    }
}

/// Detects Harris corners: Sobel gradients, 5x5 Gaussian-weighted structure
/// tensor, response thresholding relative to the maximum, NMS, and a 1D
/// parabola fit per axis for subpixel peak position.
///
/// Returns corners sorted by descending score, at most `cfg.max_corners`.
/// A constant image yields an empty list.
pub fn harris_corners(img: &GrayImage, cfg: &DetectorConfig) -> Result<Vec<Corner>> {
    if img.width < 16 || img.height < 16 {
        return Err(Error::Config(format!(
            "image {}x{} smaller than 16x16",
            img.width, img.height
        )));
    }
    let (w, h) = (img.width, img.height);

    // Sobel gradients; border left at zero.
    let mut gx = vec![0.0f32; w * h];
    let mut gy = vec![0.0f32; w * h];
    for v in 1..h - 1 {
        for u in 1..w - 1 {
            let p = |du: isize, dv: isize| {
                img.samples[(v as isize + dv) as usize * w + (u as isize + du) as usize]
            };
            gx[v * w + u] = (p(1, -1) + 2.0 * p(1, 0) + p(1, 1))
                - (p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1));
            gy[v * w + u] = (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1))
                - (p(-1, -1) + 2.0 * p(0, -1) + p(1, -1));
        }
    }

    // 5x5 Gaussian weights, sigma = 1.
    let mut weights = [[0.0f64; 5]; 5];
    let mut wsum = 0.0;
    for (dv, row) in weights.iter_mut().enumerate() {
        for (du, wv) in row.iter_mut().enumerate() {
            let dx = du as f64 - 2.0;
            let dy = dv as f64 - 2.0;
            *wv = (-(dx * dx + dy * dy) / 2.0).exp();
            wsum += *wv;
        }
    }
    for row in weights.iter_mut() {
        for wv in row.iter_mut() {
            *wv /= wsum;
        }
    }

    // Gradient margin 1 plus window radius 2.
    let margin = 3usize;
    let mut response = vec![f64::NEG_INFINITY; w * h];
    let mut max_response = 0.0f64;
    for v in margin..h - margin {
        for u in margin..w - margin {
            let mut ixx = 0.0f64;
            let mut iyy = 0.0f64;
            let mut ixy = 0.0f64;
            for (dv, row) in weights.iter().enumerate() {
                for (du, &wt) in row.iter().enumerate() {
                    let idx = (v + dv - 2) * w + (u + du - 2);
                    let x = gx[idx] as f64;
                    let y = gy[idx] as f64;
                    ixx += wt * x * x;
                    iyy += wt * y * y;
                    ixy += wt * x * y;
                }
            }
            let det = ixx * iyy - ixy * ixy;
            let trace = ixx + iyy;
            let r = det - cfg.k * trace * trace;
            response[v * w + u] = r;
            if r > max_response {
                max_response = r;
            }
        }
    }

    if max_response <= 0.0 {
        return Ok(Vec::new());
    }
    let threshold = max_response * cfg.min_score_ratio;

    // Candidates above threshold, strongest first; ties broken by (v, u)
    // for determinism.
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for v in margin..h - margin {
        for u in margin..w - margin {
            let r = response[v * w + u];
            if r > threshold {
                candidates.push((r, v, u));
            }
        }
    }
    candidates.sort_unstable_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap()
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });

    let mut taken = vec![false; w * h];
    let mut corners = Vec::new();
    let rad = cfg.nms_radius;
    'cand: for &(score, v, u) in &candidates {
        let v0 = v.saturating_sub(rad);
        let u0 = u.saturating_sub(rad);
        let v1 = (v + rad).min(h - 1);
        let u1 = (u + rad).min(w - 1);
        for vv in v0..=v1 {
            for uu in u0..=u1 {
                if taken[vv * w + uu] {
                    continue 'cand;
                }
            }
        }
        taken[v * w + u] = true;

        let refine = |c_m: f64, c_0: f64, c_p: f64| -> f64 {
            let denom = c_m - 2.0 * c_0 + c_p;
            if denom.abs() < 1e-12 || !denom.is_finite() {
                return 0.0;
            }
            (0.5 * (c_m - c_p) / denom).clamp(-0.5, 0.5)
        };
        let du = refine(
            response[v * w + u - 1],
            response[v * w + u],
            response[v * w + u + 1],
        );
        let dv = refine(
            response[(v - 1) * w + u],
            response[v * w + u],
            response[(v + 1) * w + u],
        );

        corners.push(Corner {
            u: u as f64 + du,
            v: v as f64 + dv,
            score,
        });
        if corners.len() >= cfg.max_corners {
            break;
        }
    }

    Ok(corners)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_image_yields_no_corners() {
        let img = GrayImage::from_fn(32, 32, |_, _| 0.5);
        let corners = harris_corners(&img, &DetectorConfig::default()).unwrap();
        assert!(corners.is_empty());
    }

    #[test]
    fn tiny_image_is_a_config_error() {
        let img = GrayImage::zeros(8, 8);
        assert!(harris_corners(&img, &DetectorConfig::default()).is_err());
    }

    #[test]
    fn single_bright_pixel_peaks_at_its_position() {
        let mut img = GrayImage::zeros(64, 64);
        img.set(32, 32, 1.0);
        let corners = harris_corners(&img, &DetectorConfig::default()).unwrap();
        assert!(!corners.is_empty());
        let top = corners[0];
        assert!(
            (top.u - 32.0).abs() <= 1.0 && (top.v - 32.0).abs() <= 1.0,
            "top corner at ({}, {})",
            top.u,
            top.v
        );
    }

    #[test]
    fn checkerboard_corners_at_square_intersections() {
        // 8 px squares on 64x64: interior intersections at u, v in
        // {8, 16, ..., 56}, i.e. 7 x 7 = 49 crossings.
        let img = GrayImage::from_fn(64, 64, |u, v| {
            if ((u / 8) + (v / 8)) % 2 == 0 {
                1.0
            } else {
                0.0
            }
        });
        let corners = harris_corners(&img, &DetectorConfig::default()).unwrap();
        assert_eq!(corners.len(), 49, "expected 49 crossings");
        for c in &corners {
            let near_u = (c.u / 8.0).round() * 8.0;
            let near_v = (c.v / 8.0).round() * 8.0;
            assert!(
                (c.u - near_u).abs() <= 1.5 && (c.v - near_v).abs() <= 1.5,
                "corner ({}, {}) not at a crossing",
                c.u,
                c.v
            );
        }
    }

    #[test]
    fn corners_sorted_by_descending_score() {
        let mut img = GrayImage::zeros(64, 64);
        img.set(20, 20, 1.0);
        img.set(40, 40, 0.5);
        let corners = harris_corners(&img, &DetectorConfig::default()).unwrap();
        for pair in corners.windows(2) {
            assert!(pair[0].score >= pair[1].score);
        }
    }

    #[test]
    fn max_corners_cap_applies() {
        let img = GrayImage::from_fn(64, 64, |u, v| {
            if ((u / 8) + (v / 8)) % 2 == 0 {
                1.0
            } else {
                0.0
            }
        });
        let cfg = DetectorConfig {
            max_corners: 10,
            ..DetectorConfig::default()
        };
        let corners = harris_corners(&img, &cfg).unwrap();
        assert_eq!(corners.len(), 10);
    }
}
