//! Zero-mean sum of squared differences patch cost.

use crate::camera::PixelPoint;
use crate::error::{Error, Result};
use crate::gray::GrayImage;

/// Checks that a `(2r+1)^2` patch centered at integer `(u, v)` lies fully
/// inside the image.
#[inline]
pub(crate) fn patch_inside(img: &GrayImage, u: i64, v: i64, r: i64) -> bool {
    u - r >= 0 && v - r >= 0 && u + r < img.width as i64 && v + r < img.height as i64
}

/// Patch cost on integer centers, no bounds check (callers verify with
/// [`patch_inside`]).
pub(crate) fn zssd_unchecked(
    a: &GrayImage,
    b: &GrayImage,
    ua: usize,
    va: usize,
    ub: usize,
    vb: usize,
    r: usize,
) -> f64 {
    let n = (2 * r + 1) * (2 * r + 1);
    let mut sum_a = 0.0f64;
    let mut sum_b = 0.0f64;
    for dv in 0..=2 * r {
        let row_a = (va + dv - r) * a.width + ua - r;
        let row_b = (vb + dv - r) * b.width + ub - r;
        for du in 0..=2 * r {
            sum_a += a.samples[row_a + du] as f64;
            sum_b += b.samples[row_b + du] as f64;
        }
    }
    let mean_a = sum_a / n as f64;
    let mean_b = sum_b / n as f64;
    let mut cost = 0.0f64;
    for dv in 0..=2 * r {
        let row_a = (va + dv - r) * a.width + ua - r;
        let row_b = (vb + dv - r) * b.width + ub - r;
        for du in 0..=2 * r {
            let d = (a.samples[row_a + du] as f64 - mean_a)
                - (b.samples[row_b + du] as f64 - mean_b);
            cost += d * d;
        }
    }
    cost
}

/// Zero-mean SSD between the `(2*radius+1)^2` patches centered at `p_left`
/// and `p_right` (positions rounded to integers).
///
/// The cost is non-negative and zero exactly when the patches agree up to a
/// constant brightness offset. Patches must lie fully inside both images.
pub fn zssd_cost(
    left: &GrayImage,
    right: &GrayImage,
    p_left: &PixelPoint,
    p_right: &PixelPoint,
    radius: usize,
) -> Result<f64> {
    let (ul, vl) = (p_left.u.round() as i64, p_left.v.round() as i64);
    let (ur, vr) = (p_right.u.round() as i64, p_right.v.round() as i64);
    let r = radius as i64;
    if !patch_inside(left, ul, vl, r) {
        return Err(Error::PatchOutOfBounds {
            u: ul,
            v: vl,
            radius,
            width: left.width,
            height: left.height,
        });
    }
    if !patch_inside(right, ur, vr, r) {
        return Err(Error::PatchOutOfBounds {
            u: ur,
            v: vr,
            radius,
            width: right.width,
            height: right.height,
        });
    }
    Ok(zssd_unchecked(
        left,
        right,
        ul as usize,
        vl as usize,
        ur as usize,
        vr as usize,
        radius,
    ))
}
