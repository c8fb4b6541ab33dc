//! Projection geometry for the two-camera rig.
//!
//! Cameras sit on a unit baseline along x. Orientation errors are small
//! rotations, carried as angle vectors and applied either linearized
//! (`I + [w]x`, the estimation model) or exactly (axis-angle exponential,
//! the simulation/warping model). Disparity is inverse depth `d = 1/Z`,
//! which is >= 0 for visible points and 0 at infinity.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Mat3 = Matrix3<f64>;
pub type Vec3 = Vector3<f64>;

/// Pinhole intrinsics: focal length and principal point, in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intrinsics {
    pub f: f64,
    pub cx: f64,
    pub cy: f64,
}

impl Intrinsics {
    pub fn new(f: f64, cx: f64, cy: f64) -> Result<Self> {
        let k = Intrinsics { f, cx, cy };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.f.is_finite() && self.cx.is_finite() && self.cy.is_finite()) {
            return Err(Error::InvalidIntrinsics("non-finite field".into()));
        }
        if self.f <= 0.0 {
            return Err(Error::InvalidIntrinsics(format!("f = {} <= 0", self.f)));
        }
        Ok(())
    }

    /// Same principal point, focal length multiplied by `scale`.
    pub fn scaled_focal(&self, scale: f64) -> Intrinsics {
        Intrinsics {
            f: self.f * scale,
            cx: self.cx,
            cy: self.cy,
        }
    }
}

/// A position in pixel coordinates (possibly subpixel).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PixelPoint {
    pub u: f64,
    pub v: f64,
}

impl PixelPoint {
    pub fn new(u: f64, v: f64) -> Self {
        PixelPoint { u, v }
    }
}

/// Dimensionless image coordinates: pixels shifted by the principal point
/// and divided by the focal length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedPoint {
    pub x: f64,
    pub y: f64,
}

impl NormalizedPoint {
    pub fn new(x: f64, y: f64) -> Self {
        NormalizedPoint { x, y }
    }
}

/// Small rotation as an angle vector in radians: x = pitch, y = pan,
/// z = roll, about the camera axes.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RotationVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl RotationVector {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        RotationVector { x, y, z }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn as_vec3(&self) -> Vec3 {
        Vec3::new(self.x, self.y, self.z)
    }

    pub fn add(&self, other: &RotationVector) -> RotationVector {
        RotationVector::new(self.x + other.x, self.y + other.y, self.z + other.z)
    }

    pub fn sub(&self, other: &RotationVector) -> RotationVector {
        RotationVector::new(self.x - other.x, self.y - other.y, self.z - other.z)
    }

    pub fn scale(&self, s: f64) -> RotationVector {
        RotationVector::new(self.x * s, self.y * s, self.z * s)
    }
}

/// A 3D point in the rig frame (x along the baseline, y down, z forward).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenePoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl ScenePoint {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        ScenePoint { x, y, z }
    }
}

/// The skew-symmetric matrix `[w]x` with `[w]x u = w × u`.
pub fn skew(w: &RotationVector) -> Mat3 {
    Mat3::new(0.0, -w.z, w.y, w.z, 0.0, -w.x, -w.y, w.x, 0.0)
}

/// First-order rotation `I + [w]x`.
pub fn rotation_linearized(w: &RotationVector) -> Mat3 {
    Mat3::identity() + skew(w)
}

/// Exact rotation: the axis-angle exponential of `[w]x`.
///
/// Below 1e-6 rad the Rodrigues coefficients are replaced by their
/// quadratic Taylor expansions to avoid 0/0.
pub fn rotation_exact(w: &RotationVector) -> Mat3 {
    let theta = w.norm();
    let k = skew(w);
    let k2 = k * k;
    if theta < 1e-6 {
        // sin(t)/t ~ 1 - t^2/6, (1-cos(t))/t^2 ~ 1/2 - t^2/24
        let t2 = theta * theta;
        Mat3::identity() + k * (1.0 - t2 / 6.0) + k2 * (0.5 - t2 / 24.0)
    } else {
        Mat3::identity() + k * (theta.sin() / theta) + k2 * ((1.0 - theta.cos()) / (theta * theta))
    }
}

/// Converts pixel coordinates to normalized image coordinates.
pub fn pixel_to_normalized(p: &PixelPoint, k: &Intrinsics) -> Result<NormalizedPoint> {
    k.validate()?;
    if !(p.u.is_finite() && p.v.is_finite()) {
        return Err(Error::NonFinite("pixel point"));
    }
    Ok(NormalizedPoint::new((p.u - k.cx) / k.f, (p.v - k.cy) / k.f))
}

/// Inverse of [`pixel_to_normalized`].
pub fn normalized_to_pixel(p: &NormalizedPoint, k: &Intrinsics) -> Result<PixelPoint> {
    k.validate()?;
    if !(p.x.is_finite() && p.y.is_finite()) {
        return Err(Error::NonFinite("normalized point"));
    }
    Ok(PixelPoint::new(p.x * k.f + k.cx, p.y * k.f + k.cy))
}

fn dehomogenize(h: Vec3) -> Result<NormalizedPoint> {
    if h.z <= 0.0 {
        return Err(Error::BehindCamera { z: h.z });
    }
    Ok(NormalizedPoint::new(h.x / h.z, h.y / h.z))
}

/// Projects a scene point into the left camera with the linearized
/// correcting rotation: dehomogenize `(I + [w0]x) P`.
pub fn project_left(p: &ScenePoint, w0: &RotationVector) -> Result<NormalizedPoint> {
    let h = rotation_linearized(w0) * Vec3::new(p.x, p.y, p.z);
    dehomogenize(h)
}

/// Transfers a left-camera point to the right camera given inverse-depth
/// disparity `d` and the two correcting rotations.
///
/// Componentwise, with `dw = w1 - w0`:
///
/// ```text
/// x' = x0 + dw_z*y0 - dw_y  +          d
/// y' = y0 - dw_z*x0 + dw_x  - w1_z  *  d
/// z' = 1  + dw_y*x0 - dw_x*y0 + w1_y * d
/// ```
///
/// then dehomogenize. For `d = 0` the result depends on `dw` only, so any
/// common rotation of both cameras drops out; for `d > 0` the absolute pan
/// and roll of the right camera enter through the disparity column.
pub fn reproject_left_to_right(
    p0: &NormalizedPoint,
    d: f64,
    w0: &RotationVector,
    w1: &RotationVector,
) -> Result<NormalizedPoint> {
    let dw = w1.sub(w0);
    let h = Vec3::new(
        p0.x + dw.z * p0.y - dw.y + d,
        p0.y - dw.z * p0.x + dw.x - w1.z * d,
        1.0 + dw.y * p0.x - dw.x * p0.y + w1.y * d,
    );
    dehomogenize(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn k500() -> Intrinsics {
        Intrinsics::new(500.0, 192.0, 144.0).unwrap()
    }

    #[test]
    fn principal_point_maps_to_origin() {
        let k = k500();
        let n = pixel_to_normalized(&PixelPoint::new(k.cx, k.cy), &k).unwrap();
        assert_eq!(n, NormalizedPoint::new(0.0, 0.0));
    }

    #[test]
    fn one_focal_length_off_axis() {
        let k = k500();
        let n = pixel_to_normalized(&PixelPoint::new(k.cx + k.f, k.cy), &k).unwrap();
        assert_relative_eq!(n.x, 1.0, max_relative = 1e-15);
        assert_eq!(n.y, 0.0);
    }

    #[test]
    fn pixel_to_normalized_arithmetic() {
        // (320-192)/500 = 0.256, (240-144)/500 = 0.192
        let n = pixel_to_normalized(&PixelPoint::new(320.0, 240.0), &k500()).unwrap();
        assert_relative_eq!(n.x, 0.256, epsilon = 1e-15);
        assert_relative_eq!(n.y, 0.192, epsilon = 1e-15);
    }

    #[test]
    fn normalized_to_pixel_cases() {
        let k = k500();
        let p = normalized_to_pixel(&NormalizedPoint::new(0.0, 0.0), &k).unwrap();
        assert_eq!(p, PixelPoint::new(k.cx, k.cy));

        let p = normalized_to_pixel(&NormalizedPoint::new(0.256, 0.192), &k).unwrap();
        assert_relative_eq!(p.u, 320.0, epsilon = 1e-10);
        assert_relative_eq!(p.v, 240.0, epsilon = 1e-10);

        let k2 = Intrinsics::new(2.0, 0.0, 0.0).unwrap();
        let p = normalized_to_pixel(&NormalizedPoint::new(1.0, 0.0), &k2).unwrap();
        assert_eq!(p, PixelPoint::new(2.0, 0.0));
    }

    #[test]
    fn invalid_intrinsics_rejected() {
        assert!(Intrinsics::new(0.0, 1.0, 1.0).is_err());
        assert!(Intrinsics::new(-2.0, 1.0, 1.0).is_err());
        assert!(Intrinsics::new(f64::NAN, 1.0, 1.0).is_err());
        let k = Intrinsics {
            f: -1.0,
            cx: 0.0,
            cy: 0.0,
        };
        assert!(pixel_to_normalized(&PixelPoint::new(0.0, 0.0), &k).is_err());
        let good = k500();
        assert!(pixel_to_normalized(&PixelPoint::new(f64::NAN, 0.0), &good).is_err());
    }

    #[test]
    fn rotation_linearized_entries() {
        let id = rotation_linearized(&RotationVector::zero());
        assert_eq!(id, Mat3::identity());

        let wz = 0.25;
        let m = rotation_linearized(&RotationVector::new(0.0, 0.0, wz));
        assert_eq!(m[(0, 1)], -wz);
        assert_eq!(m[(1, 0)], wz);
        assert_eq!(m[(0, 0)], 1.0);
        assert_eq!(m[(2, 2)], 1.0);
        assert_eq!(m[(0, 2)], 0.0);

        let m = rotation_linearized(&RotationVector::new(0.01, 0.02, 0.03));
        assert_eq!(m[(2, 1)], 0.01);
        assert_eq!(m[(0, 1)], -0.03);
        assert_eq!(m[(0, 2)], 0.02);
        assert_eq!(m[(1, 2)], -0.01);
    }

    #[test]
    fn rotation_linearized_antisymmetry() {
        // R_lin(-w) = 2I - R_lin(w), entrywise.
        let w = RotationVector::new(0.11, -0.07, 0.05);
        let a = rotation_linearized(&w.scale(-1.0));
        let b = Mat3::identity() * 2.0 - rotation_linearized(&w);
        assert_eq!(a, b);
    }

    #[test]
    fn rotation_exact_basics() {
        assert_relative_eq!(
            rotation_exact(&RotationVector::zero()),
            Mat3::identity(),
            epsilon = 1e-15
        );

        let m = rotation_exact(&RotationVector::new(0.0, 0.0, std::f64::consts::FRAC_PI_2));
        assert_relative_eq!(m[(0, 0)], 0.0, epsilon = 1e-12);
        assert_relative_eq!(m[(0, 1)], -1.0, epsilon = 1e-12);
        assert_relative_eq!(m[(1, 0)], 1.0, epsilon = 1e-12);
        assert_relative_eq!(m[(2, 2)], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn rotation_exact_is_proper_orthogonal() {
        let w = RotationVector::new(0.3, -0.2, 0.5);
        let r = rotation_exact(&w);
        assert_relative_eq!(r * r.transpose(), Mat3::identity(), epsilon = 1e-12);
        assert_relative_eq!(r.determinant(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn exact_matches_linearized_to_second_order() {
        // |R_exact - R_lin|_inf <= |w|^2 over a grid with |w| <= 0.1.
        for &s in &[0.01, 0.02, 0.05, 0.1] {
            for &(a, b, c) in &[(1.0f64, 0.0, 0.0), (0.0, 1.0, 0.0), (0.5, -0.5, 0.7)] {
                let n = (a * a + b * b + c * c).sqrt();
                let w = RotationVector::new(a * s / n, b * s / n, c * s / n);
                let gap = (rotation_exact(&w) - rotation_linearized(&w)).abs().max();
                assert!(
                    gap <= w.norm() * w.norm() + 1e-15,
                    "gap {gap} at |w| = {}",
                    w.norm()
                );
            }
        }
    }

    #[test]
    fn exact_vs_linearized_gap_is_quadratic() {
        // Halving w must shrink the gap by at least 3.5x for |w| <= 0.05.
        let dir = RotationVector::new(0.6, -0.3, 0.74);
        let mut prev = f64::INFINITY;
        for &s in &[0.05, 0.025, 0.0125] {
            let w = dir.scale(s / dir.norm());
            let gap = (rotation_exact(&w) - rotation_linearized(&w)).abs().max();
            if prev.is_finite() {
                assert!(prev / gap >= 3.5, "ratio {} at scale {s}", prev / gap);
            }
            prev = gap;
        }
    }

    #[test]
    fn small_angle_taylor_branch_is_continuous() {
        // Just above the branch point, the Rodrigues path must agree with
        // the Taylor expression to far below machine noise.
        let w = RotationVector::new(1.5e-6, -0.5e-6, 0.8e-6);
        let t2 = w.norm() * w.norm();
        let k = skew(&w);
        let taylor = Mat3::identity() + k * (1.0 - t2 / 6.0) + k * k * (0.5 - t2 / 24.0);
        let gap = (rotation_exact(&w) - taylor).abs().max();
        assert!(gap < 1e-15, "gap {gap}");
    }

    #[test]
    fn project_left_examples() {
        let n = project_left(&ScenePoint::new(0.0, 0.0, 5.0), &RotationVector::zero()).unwrap();
        assert_eq!(n, NormalizedPoint::new(0.0, 0.0));

        let n = project_left(&ScenePoint::new(1.0, 2.0, 4.0), &RotationVector::zero()).unwrap();
        assert_eq!(n, NormalizedPoint::new(0.25, 0.5));

        // (I + [w]x) (1,2,4) with w = (0,0,0.01): (1 - 0.02, 2 + 0.01, 4).
        let n = project_left(
            &ScenePoint::new(1.0, 2.0, 4.0),
            &RotationVector::new(0.0, 0.0, 0.01),
        )
        .unwrap();
        assert_relative_eq!(n.x, 0.98 / 4.0, epsilon = 1e-15);
        assert_relative_eq!(n.y, 2.01 / 4.0, epsilon = 1e-15);
    }

    #[test]
    fn project_left_behind_camera() {
        let err = project_left(&ScenePoint::new(0.0, 0.0, -1.0), &RotationVector::zero());
        assert!(matches!(err, Err(Error::BehindCamera { .. })));
    }

    #[test]
    fn reproject_pure_disparity() {
        let n = reproject_left_to_right(
            &NormalizedPoint::new(0.2, 0.3),
            0.1,
            &RotationVector::zero(),
            &RotationVector::zero(),
        )
        .unwrap();
        assert_relative_eq!(n.x, 0.3, epsilon = 1e-15);
        assert_relative_eq!(n.y, 0.3, epsilon = 1e-15);
    }

    #[test]
    fn reproject_roll_example() {
        // p0 = (0,0), d = 0.2, w1 = (0,0,0.05), w0 = 0 -> (0.2, -0.01).
        let n = reproject_left_to_right(
            &NormalizedPoint::new(0.0, 0.0),
            0.2,
            &RotationVector::zero(),
            &RotationVector::new(0.0, 0.0, 0.05),
        )
        .unwrap();
        assert_relative_eq!(n.x, 0.2, epsilon = 1e-15);
        assert_relative_eq!(n.y, -0.01, epsilon = 1e-15);
    }

    #[test]
    fn reproject_at_infinity_depends_only_on_relative_rotation() {
        let p0 = NormalizedPoint::new(-0.1, 0.25);
        let w0 = RotationVector::new(0.002, -0.004, 0.001);
        let w1 = RotationVector::new(-0.003, 0.005, 0.002);
        let delta = RotationVector::new(0.7, -0.2, 0.4);
        let a = reproject_left_to_right(&p0, 0.0, &w0, &w1).unwrap();
        let b = reproject_left_to_right(&p0, 0.0, &w0.add(&delta), &w1.add(&delta)).unwrap();
        assert_relative_eq!(a.x, b.x, epsilon = 1e-12);
        assert_relative_eq!(a.y, b.y, epsilon = 1e-12);
    }

    #[test]
    fn reproject_pitch_gauge_freedom() {
        // Common pitch added to both cameras never changes the output.
        let p0 = NormalizedPoint::new(0.15, -0.08);
        let w0 = RotationVector::new(0.001, -0.002, 0.003);
        let w1 = RotationVector::new(0.004, 0.001, -0.002);
        let a = reproject_left_to_right(&p0, 0.3, &w0, &w1).unwrap();
        for &dp in &[0.01, -0.5, 2.0] {
            let shift = RotationVector::new(dp, 0.0, 0.0);
            let b =
                reproject_left_to_right(&p0, 0.3, &w0.add(&shift), &w1.add(&shift)).unwrap();
            assert_relative_eq!(a.x, b.x, epsilon = 1e-12);
            assert_relative_eq!(a.y, b.y, epsilon = 1e-12);
        }
    }
}
