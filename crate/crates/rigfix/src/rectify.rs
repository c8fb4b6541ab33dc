//! Applies estimated corrections as image-space warps and measures the
//! before/after vertical-disparity statistics.
//!
//! The estimation stage linearizes rotations; the warp applies the exact
//! rotation of the estimated angles so the output geometry is consistent.
//! Both output cameras share the focal length `sqrt(f0 * f1)` of the
//! drift-compensated intrinsics and keep their own principal points; the
//! right map additionally undoes the estimated focal drift `(1 + d_f)`.

use serde::{Deserialize, Serialize};

use crate::camera::{rotation_exact, Intrinsics, Mat3, NormalizedPoint, Vec3};
use crate::correspond::{Match, MatchSet};
use crate::error::{Error, Result};
use crate::gray::GrayImage;
use crate::solver::RectificationSolution;

/// Pixel-space rectifying homography for one camera, with its inverse for
/// inverse-mapped warping.
#[derive(Debug, Clone, PartialEq)]
pub struct RectifyMap {
    pub forward: Mat3,
    pub inverse: Mat3,
}

fn k_matrix(k: &Intrinsics) -> Mat3 {
    Mat3::new(k.f, 0.0, k.cx, 0.0, k.f, k.cy, 0.0, 0.0, 1.0)
}

fn k_inverse(k: &Intrinsics) -> Mat3 {
    Mat3::new(
        1.0 / k.f,
        0.0,
        -k.cx / k.f,
        0.0,
        1.0 / k.f,
        -k.cy / k.f,
        0.0,
        0.0,
        1.0,
    )
}

/// Builds the per-camera rectifying maps for a solution.
///
/// Identity when the solution is zero (and the nominal focal lengths
/// agree). The right camera's input intrinsics are the nominal ones scaled
/// by the estimated drift, which is what the solution says the camera
/// actually had.
pub fn build_maps(
    k0: &Intrinsics,
    k1: &Intrinsics,
    sol: &RectificationSolution,
) -> Result<(RectifyMap, RectifyMap)> {
    k0.validate()?;
    k1.validate()?;
    let scale1 = 1.0 + sol.d_f;
    if !scale1.is_finite() || scale1 <= 0.0 {
        return Err(Error::InvalidIntrinsics(format!(
            "1 + d_f = {scale1} not invertible"
        )));
    }
    for w in [&sol.omega0, &sol.omega1] {
        if !(w.x.is_finite() && w.y.is_finite() && w.z.is_finite()) {
            return Err(Error::NonFinite("solution angles"));
        }
    }

    let f_out = (k0.f * k1.f).sqrt();
    let out0 = Intrinsics {
        f: f_out,
        cx: k0.cx,
        cy: k0.cy,
    };
    let out1 = Intrinsics {
        f: f_out,
        cx: k1.cx,
        cy: k1.cy,
    };
    let k1_actual = k1.scaled_focal(scale1);

    let h0 = k_matrix(&out0) * rotation_exact(&sol.omega0) * k_inverse(k0);
    let h1 = k_matrix(&out1) * rotation_exact(&sol.omega1) * k_inverse(&k1_actual);

    let inv0 = h0
        .try_inverse()
        .ok_or_else(|| Error::InvalidIntrinsics("left map not invertible".into()))?;
    let inv1 = h1
        .try_inverse()
        .ok_or_else(|| Error::InvalidIntrinsics("right map not invertible".into()))?;

    Ok((
        RectifyMap {
            forward: h0,
            inverse: inv0,
        },
        RectifyMap {
            forward: h1,
            inverse: inv1,
        },
    ))
}

/// A warped image plus per-pixel validity (false where the source sample
/// fell outside the input).
#[derive(Debug, Clone, PartialEq)]
pub struct WarpedImage {
    pub image: GrayImage,
    pub valid: Vec<bool>,
}

/// Inverse-mapping warp with bilinear sampling. Invalid pixels are written
/// as 0 with their mask bit cleared.
pub fn warp(img: &GrayImage, map: &RectifyMap) -> WarpedImage {
    let (w, h) = (img.width, img.height);
    let mut out = GrayImage::zeros(w, h);
    let mut valid = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            let p = map.inverse * Vec3::new(x as f64, y as f64, 1.0);
            if p.z.abs() < 1e-12 {
                continue;
            }
            let su = p.x / p.z;
            let sv = p.y / p.z;
            if let Some(val) = img.sample_bilinear(su, sv) {
                out.set(x, y, val);
                valid[y * w + x] = true;
            }
        }
    }
    WarpedImage { image: out, valid }
}

/// Largest axis-aligned all-valid rectangle, as `(x, y, width, height)`.
/// Returns `None` when no pixel is valid.
pub fn max_valid_rect(warped: &WarpedImage) -> Option<(usize, usize, usize, usize)> {
    let w = warped.image.width;
    let h = warped.image.height;
    let mut heights = vec![0usize; w];
    let mut best = (0usize, 0usize, 0usize, 0usize);
    let mut best_area = 0usize;
    for y in 0..h {
        for (x, height) in heights.iter_mut().enumerate() {
            *height = if warped.valid[y * w + x] {
                *height + 1
            } else {
                0
            };
        }
        // Largest rectangle in histogram via a monotonic stack.
        let mut stack: Vec<usize> = Vec::new();
        for x in 0..=w {
            let cur = if x < w { heights[x] } else { 0 };
            while let Some(&top) = stack.last() {
                if heights[top] <= cur {
                    break;
                }
                stack.pop();
                let height = heights[top];
                let left = stack.last().map_or(0, |&l| l + 1);
                let width = x - left;
                if width * height > best_area {
                    best_area = width * height;
                    best = (left, y + 1 - height, width, height);
                }
            }
            stack.push(x);
        }
    }
    if best_area == 0 {
        None
    } else {
        Some(best)
    }
}

/// Crops the maximal valid rectangle out of a warped image.
pub fn crop_valid(warped: &WarpedImage) -> Result<(GrayImage, (usize, usize))> {
    let (x0, y0, cw, ch) =
        max_valid_rect(warped).ok_or_else(|| Error::Config("no valid pixels to crop".into()))?;
    let mut out = GrayImage::zeros(cw, ch);
    for y in 0..ch {
        for x in 0..cw {
            out.set(x, y, warped.image.get(x0 + x, y0 + y));
        }
    }
    Ok((out, (x0, y0)))
}

/// Transforms every match by the per-camera corrections and recomputes
/// pixel coordinates in the common-focal output frame.
pub fn apply_to_matches(matches: &MatchSet, sol: &RectificationSolution) -> Result<MatchSet> {
    let scale1 = 1.0 + sol.d_f;
    if !scale1.is_finite() || scale1 <= 0.0 {
        return Err(Error::InvalidIntrinsics(format!(
            "1 + d_f = {scale1} not invertible"
        )));
    }
    let r0 = rotation_exact(&sol.omega0);
    let r1 = rotation_exact(&sol.omega1);
    let f_out = (matches.k0.f * matches.k1.f).sqrt();
    let out0 = Intrinsics {
        f: f_out,
        ..matches.k0
    };
    let out1 = Intrinsics {
        f: f_out,
        ..matches.k1
    };

    let mut out = Vec::with_capacity(matches.len());
    for m in &matches.matches {
        let h0 = r0 * Vec3::new(m.n0.x, m.n0.y, 1.0);
        let h1 = r1 * Vec3::new(m.n1.x / scale1, m.n1.y / scale1, 1.0);
        if h0.z <= 0.0 || h1.z <= 0.0 {
            return Err(Error::BehindCamera {
                z: h0.z.min(h1.z),
            });
        }
        let n0 = NormalizedPoint::new(h0.x / h0.z, h0.y / h0.z);
        let n1 = NormalizedPoint::new(h1.x / h1.z, h1.y / h1.z);
        let mut rectified = Match::from_normalized(n0, n1, &out0, &out1)?;
        rectified.zssd_cost = m.zssd_cost;
        out.push(rectified);
    }
    Ok(MatchSet {
        matches: out,
        width: matches.width,
        height: matches.height,
        k0: out0,
        k1: out1,
    })
}

/// Vertical-disparity statistics of a match set, in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisparityStats {
    pub count: usize,
    pub fraction_dy_below_1px: f64,
    pub median_abs_dy_px: f64,
    pub rms_dy_px: f64,
    /// Median horizontal disparity of the lowest-disparity decile: the
    /// far-point stabilization measure.
    pub dx_at_infinity_px: f64,
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Computes disparity statistics with the given focal length for the
/// normalized-to-pixel conversion.
pub fn stats(matches: &MatchSet, f_px: f64) -> Result<DisparityStats> {
    if matches.is_empty() {
        return Err(Error::EmptyMatchSet);
    }
    let n = matches.len();
    let mut abs_dy: Vec<f64> = matches
        .matches
        .iter()
        .map(|m| (m.dy * f_px).abs())
        .collect();
    let below = abs_dy.iter().filter(|&&d| d < 1.0).count();
    let rms = (abs_dy.iter().map(|d| d * d).sum::<f64>() / n as f64).sqrt();
    abs_dy.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());

    let mut dx: Vec<f64> = matches.matches.iter().map(|m| m.dx * f_px).collect();
    dx.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let decile = (n).div_ceil(10);
    let dx_inf = median(&dx[..decile]);

    Ok(DisparityStats {
        count: n,
        fraction_dy_below_1px: below as f64 / n as f64,
        median_abs_dy_px: median(&abs_dy),
        rms_dy_px: rms,
        dx_at_infinity_px: dx_inf,
    })
}
