//! Hierarchical subpixel ZSSD matching with left-right consistency check.
//!
//! Corners are matched coarse-to-fine: the coarsest pyramid level is
//! searched over the full horizontal range (vertical slack only), finer
//! levels refine around the doubled coarse displacement, and the finest
//! level adds an independent 1D parabola fit per axis on the cost surface.
//! A match survives only if matching back from the right image returns to
//! within `lr_tolerance_px` of the original left position.

use serde::{Deserialize, Serialize};

use crate::camera::{Intrinsics, PixelPoint};
use crate::correspond::zssd::{patch_inside, zssd_unchecked};
use crate::correspond::{build_pyramid, Corner, Match, MatchSet};
use crate::error::{Error, Result};
use crate::gray::GrayImage;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MatcherConfig {
    /// Pyramid depth.
    pub levels: usize,
    /// ZSSD patch radius (patch side = 2r + 1).
    pub patch_radius: usize,
    /// Vertical search slack, +- pixels at every level.
    pub vertical_slack_px: usize,
    /// Horizontal refinement half-window at levels below the coarsest.
    pub refine_radius_px: usize,
    /// Max distance for the left-right consistency check, pixels.
    pub lr_tolerance_px: f64,
}

impl Default for MatcherConfig {
    fn default() -> Self {
        MatcherConfig {
            // 9x9 patches: the 3-point parabola needs this much support to
            // keep subpixel locking under a quarter pixel.
            levels: 3,
            patch_radius: 4,
            vertical_slack_px: 2,
            refine_radius_px: 2,
            lr_tolerance_px: 1.0,
        }
    }
}

/// Integer-displacement candidate produced per corner by the pyramid search.
#[derive(Debug, Clone, Copy)]
struct RawMatch {
    /// Subpixel target position in the destination image.
    target_u: f64,
    target_v: f64,
    cost: f64,
}

/// Fits a parabola through three cost samples; returns the subpixel offset
/// of the minimum, clamped to [-0.5, 0.5]. Degenerate (flat) fits and an
/// exact zero-cost center (perfect match) keep the integer position.
fn parabola_offset(c_m: f64, c_0: f64, c_p: f64) -> f64 {
    if c_0 == 0.0 {
        return 0.0;
    }
    let denom = c_m - 2.0 * c_0 + c_p;
    if !(denom.is_finite()) || denom <= 1e-15 {
        return 0.0;
    }
    (0.5 * (c_m - c_p) / denom).clamp(-0.5, 0.5)
}

/// Searches one corner through the pyramids. `from_pyr`/`to_pyr` must come
/// from same-sized images. Returns `None` when any level's patch leaves the
/// image or the search window is empty.
fn search_corner(
    from_pyr: &[GrayImage],
    to_pyr: &[GrayImage],
    u: f64,
    v: f64,
    cfg: &MatcherConfig,
) -> Option<RawMatch> {
    let r = cfg.patch_radius;
    let ri = r as i64;
    let levels = from_pyr.len();
    let vy = cfg.vertical_slack_px as i64;

    let mut disp_u: i64 = 0;
    let mut disp_v: i64 = 0;
    let mut best_cost = f64::INFINITY;

    for level in (0..levels).rev() {
        let from = &from_pyr[level];
        let to = &to_pyr[level];
        let scale = 1u32 << level;
        let cu = (u / scale as f64).round() as i64;
        let cv = (v / scale as f64).round() as i64;
        if !patch_inside(from, cu, cv, ri) {
            return None;
        }

        let coarsest = level == levels - 1;
        let (u_lo, u_hi) = if coarsest {
            (ri, to.width as i64 - 1 - ri)
        } else {
            disp_u *= 2;
            disp_v *= 2;
            let rr = cfg.refine_radius_px as i64;
            (cu + disp_u - rr, cu + disp_u + rr)
        };
        let (v_lo, v_hi) = if coarsest {
            (cv - vy, cv + vy)
        } else {
            (cv + disp_v - vy, cv + disp_v + vy)
        };
        let u_lo = u_lo.max(ri);
        let u_hi = u_hi.min(to.width as i64 - 1 - ri);
        let v_lo = v_lo.max(ri);
        let v_hi = v_hi.min(to.height as i64 - 1 - ri);
        if u_lo > u_hi || v_lo > v_hi {
            return None;
        }

        best_cost = f64::INFINITY;
        let mut best_u = u_lo;
        let mut best_v = v_lo;
        for tv in v_lo..=v_hi {
            for tu in u_lo..=u_hi {
                let c = zssd_unchecked(
                    from,
                    to,
                    cu as usize,
                    cv as usize,
                    tu as usize,
                    tv as usize,
                    r,
                );
                if c < best_cost {
                    best_cost = c;
                    best_u = tu;
                    best_v = tv;
                }
            }
        }
        disp_u = best_u - cu;
        disp_v = best_v - cv;
    }

    // Subpixel refinement at the finest level.
    let from = &from_pyr[0];
    let to = &to_pyr[0];
    let cu = u.round() as i64;
    let cv = v.round() as i64;
    let tu = cu + disp_u;
    let tv = cv + disp_v;
    let cost_at = |du: i64, dv: i64| -> Option<f64> {
        if patch_inside(to, tu + du, tv + dv, ri) {
            Some(zssd_unchecked(
                from,
                to,
                cu as usize,
                cv as usize,
                (tu + du) as usize,
                (tv + dv) as usize,
                r,
            ))
        } else {
            None
        }
    };
    let sub_u = match (cost_at(-1, 0), cost_at(1, 0)) {
        (Some(cm), Some(cp)) => parabola_offset(cm, best_cost, cp),
        _ => 0.0,
    };
    let sub_v = match (cost_at(0, -1), cost_at(0, 1)) {
        (Some(cm), Some(cp)) => parabola_offset(cm, best_cost, cp),
        _ => 0.0,
    };

    Some(RawMatch {
        target_u: tu as f64 + sub_u,
        target_v: tv as f64 + sub_v,
        cost: best_cost,
    })
}

/// One-directional hierarchical matching without the consistency check:
/// every corner that finds a target yields a match. Source positions are
/// anchored on the rounded corner so the reported displacement is exactly
/// the (subpixel) search result.
pub fn match_one_direction(
    from: &GrayImage,
    to: &GrayImage,
    corners: &[Corner],
    cfg: &MatcherConfig,
    k_from: &Intrinsics,
    k_to: &Intrinsics,
) -> Result<MatchSet> {
    if from.width != to.width || from.height != to.height {
        return Err(Error::Config(format!(
            "image sizes differ: {}x{} vs {}x{}",
            from.width, from.height, to.width, to.height
        )));
    }
    let from_pyr = build_pyramid(from, cfg.levels)?;
    let to_pyr = build_pyramid(to, cfg.levels)?;
    let mut matches = Vec::new();
    for c in corners {
        let cu = c.u.round();
        let cv = c.v.round();
        if let Some(found) = search_corner(&from_pyr, &to_pyr, cu, cv, cfg) {
            matches.push(Match::from_pixels(
                PixelPoint::new(cu, cv),
                PixelPoint::new(found.target_u, found.target_v),
                k_from,
                k_to,
                found.cost,
            )?);
        }
    }
    Ok(MatchSet {
        matches,
        width: from.width,
        height: from.height,
        k0: *k_from,
        k1: *k_to,
    })
}

/// Matches `corners` from the left image into the right image, applies the
/// reverse search and the left-right consistency filter, and normalizes
/// positions with the given intrinsics.
///
/// Left positions are anchored on the rounded corner position so that the
/// reported displacement is exactly the (subpixel) search result. Output
/// order follows the input corner order; poor texture simply yields fewer
/// matches.
pub fn match_hierarchical(
    left: &GrayImage,
    right: &GrayImage,
    corners: &[Corner],
    cfg: &MatcherConfig,
    k0: &Intrinsics,
    k1: &Intrinsics,
) -> Result<MatchSet> {
    if left.width != right.width || left.height != right.height {
        return Err(Error::Config(format!(
            "image sizes differ: {}x{} vs {}x{}",
            left.width, left.height, right.width, right.height
        )));
    }
    let left_pyr = build_pyramid(left, cfg.levels)?;
    let right_pyr = build_pyramid(right, cfg.levels)?;

    let mut matches = Vec::new();
    for c in corners {
        let lu = c.u.round();
        let lv = c.v.round();
        let Some(fwd) = search_corner(&left_pyr, &right_pyr, lu, lv, cfg) else {
            continue;
        };
        let Some(rev) = search_corner(
            &right_pyr,
            &left_pyr,
            fwd.target_u.round(),
            fwd.target_v.round(),
            cfg,
        ) else {
            continue;
        };
        let back_du = rev.target_u - lu;
        let back_dv = rev.target_v - lv;
        if (back_du * back_du + back_dv * back_dv).sqrt() > cfg.lr_tolerance_px {
            continue;
        }
        matches.push(Match::from_pixels(
            PixelPoint::new(lu, lv),
            PixelPoint::new(fwd.target_u, fwd.target_v),
            k0,
            k1,
            fwd.cost,
        )?);
    }

    Ok(MatchSet {
        matches,
        width: left.width,
        height: left.height,
        k0: *k0,
        k1: *k1,
    })
}

/// Keeps forward matches whose index-paired reverse match lands within
/// `tol_px` of the original left position. `reverse` must have been matched
/// from the forward set's right positions, in the same order.
pub fn left_right_filter(forward: &MatchSet, reverse: &MatchSet, tol_px: f64) -> MatchSet {
    let matches = forward
        .matches
        .iter()
        .zip(reverse.matches.iter())
        .filter(|(f, r)| {
            let du = r.right.u - f.left.u;
            let dv = r.right.v - f.left.v;
            (du * du + dv * dv).sqrt() <= tol_px
        })
        .map(|(f, _)| *f)
        .collect();
    MatchSet {
        matches,
        width: forward.width,
        height: forward.height,
        k0: forward.k0,
        k1: forward.k1,
    }
}
