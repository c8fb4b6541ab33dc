//! Ground-truth scenario generator: random rig misalignments, focal drift,
//! noisy and outlier-contaminated correspondences, and procedurally
//! textured image pairs. Everything is a pure function of (config, seed),
//! so generated fixtures double as test oracles.
//!
//! Conventions. The world frame is the rig frame; scene points are stored
//! as a world ray `(x, y)` at unit forward coordinate plus inverse-depth
//! disparity `d >= 0` (`d = 0` is a point at infinity). Camera `i` is
//! rotated by `omega_i`, so world-to-camera applies the inverse rotation;
//! the right camera sits one baseline along the axis that adds `+d` to the
//! measured horizontal coordinate. Focal drift scales the right camera's
//! true focal length by `(1 + d_f)` relative to the nominal intrinsics used
//! for normalization.

pub mod rng;
pub mod texture;

use serde::{Deserialize, Serialize};

use crate::camera::{
    normalized_to_pixel, pixel_to_normalized, rotation_exact, skew, Intrinsics, Mat3,
    NormalizedPoint, PixelPoint, RotationVector, Vec3,
};
use crate::correspond::{Match, MatchSet};
use crate::error::{Error, Result};
use crate::gray::GrayImage;
use crate::sim::rng::Rng;

/// Stream tags so the point, render, and texture draws stay independent.
const RENDER_STREAM: u64 = 0x52454E44;
const TEXTURE_STREAM: u64 = 0x54455854;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub points: usize,
    /// Disparity (inverse depth) range for finite points.
    pub d_min: f64,
    pub d_max: f64,
    /// Fraction of points pinned at d = 0 (infinity).
    pub far_fraction: f64,
    /// Half-extents of the normalized sampling box.
    pub box_x: f64,
    pub box_y: f64,
    /// Relative rotation (pitch, pan, roll), degrees. Explicit value wins
    /// over per-component uniform sampling in [-d_omega_max_deg, +...].
    pub d_omega_deg: Option<[f64; 3]>,
    pub d_omega_max_deg: f64,
    /// Absolute right-camera pan and roll, degrees.
    pub abs_pan_roll_deg: Option<[f64; 2]>,
    pub abs_pan_roll_max_deg: f64,
    /// Gauge pitch added to both cameras, degrees.
    pub common_pitch_deg: f64,
    /// Relative focal drift; explicit value wins over sampling.
    pub d_f: Option<f64>,
    pub d_f_max: f64,
    pub noise_sigma_px: f64,
    pub outlier_rate: f64,
    /// Gross-outlier vertical perturbation bound, pixels.
    pub outlier_dy_px: f64,
    pub seed: u64,
    pub k0: Intrinsics,
    pub k1: Intrinsics,
    pub image_width: usize,
    pub image_height: usize,
    /// Plane disparity for textured pair rendering.
    pub plane_d: f64,
    /// Emit textured images from the simulate command.
    pub emit_images: bool,
    /// Generate model-consistent matches (see [`render_matches`]) instead
    /// of exact-rotation ones.
    pub linearized: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            points: 500,
            d_min: 0.0,
            d_max: 0.2,
            far_fraction: 0.0,
            // Full 640x480 footprint at f = 500.
            box_x: 0.64,
            box_y: 0.48,
            d_omega_deg: None,
            d_omega_max_deg: 0.5,
            abs_pan_roll_deg: None,
            abs_pan_roll_max_deg: 0.0,
            common_pitch_deg: 0.0,
            d_f: None,
            d_f_max: 0.005,
            noise_sigma_px: 0.2,
            outlier_rate: 0.0,
            outlier_dy_px: 20.0,
            seed: 1,
            k0: Intrinsics {
                f: 500.0,
                cx: 320.0,
                cy: 240.0,
            },
            k1: Intrinsics {
                f: 500.0,
                cx: 320.0,
                cy: 240.0,
            },
            image_width: 640,
            image_height: 480,
            plane_d: 0.02,
            emit_images: false,
            linearized: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.points == 0 {
            return Err(Error::Config("points must be >= 1".into()));
        }
        if !(self.d_min >= 0.0 && self.d_max >= self.d_min) {
            return Err(Error::Config(format!(
                "invalid disparity range [{}, {}]",
                self.d_min, self.d_max
            )));
        }
        if !(0.0..1.0).contains(&self.outlier_rate) {
            return Err(Error::Config("outlier_rate must be in [0, 1)".into()));
        }
        if !(0.0..=1.0).contains(&self.far_fraction) {
            return Err(Error::Config("far_fraction must be in [0, 1]".into()));
        }
        if self.box_x <= 0.0 || self.box_y <= 0.0 {
            return Err(Error::Config("sampling box must be positive".into()));
        }
        if self.noise_sigma_px < 0.0 || self.plane_d < 0.0 || self.outlier_dy_px < 0.0 {
            return Err(Error::Config("negative noise parameter".into()));
        }
        self.k0.validate()?;
        self.k1.validate()?;
        Ok(())
    }
}

/// A scene point: world ray at unit forward coordinate plus disparity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayPoint {
    pub x: f64,
    pub y: f64,
    pub d: f64,
}

/// Ground truth for one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneTruth {
    pub points: Vec<RayPoint>,
    pub omega0: RotationVector,
    pub omega1: RotationVector,
    pub d_omega: RotationVector,
    pub d_f: f64,
    pub k0: Intrinsics,
    pub k1: Intrinsics,
    pub noise_sigma_px: f64,
    pub outlier_rate: f64,
    pub outlier_dy_px: f64,
    pub seed: u64,
    pub image_width: usize,
    pub image_height: usize,
}

/// Matches rendered from a scene, with outlier bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderedMatches {
    pub set: MatchSet,
    /// Aligned with `set.matches`; true where the gross-error perturbation
    /// was applied.
    pub outliers: Vec<bool>,
    /// Points dropped because they projected behind a camera.
    pub skipped: usize,
}

fn deg(v: f64) -> f64 {
    v.to_radians()
}

fn sample_truth(cfg: &SimConfig, rng: &mut Rng) -> (RotationVector, RotationVector, f64) {
    let d_omega = match cfg.d_omega_deg {
        Some([x, y, z]) => RotationVector::new(deg(x), deg(y), deg(z)),
        None => {
            let m = deg(cfg.d_omega_max_deg);
            RotationVector::new(
                rng.uniform_in(-m, m),
                rng.uniform_in(-m, m),
                rng.uniform_in(-m, m),
            )
        }
    };
    let (pan1, roll1) = match cfg.abs_pan_roll_deg {
        Some([p, r]) => (deg(p), deg(r)),
        None => {
            let m = deg(cfg.abs_pan_roll_max_deg);
            (rng.uniform_in(-m, m), rng.uniform_in(-m, m))
        }
    };
    let d_f = match cfg.d_f {
        Some(v) => v,
        None => rng.uniform_in(-cfg.d_f_max, cfg.d_f_max),
    };
    // Pitch is a gauge direction: split it evenly around the common pitch.
    let pitch1 = deg(cfg.common_pitch_deg) + d_omega.x / 2.0;
    let omega1 = RotationVector::new(pitch1, pan1, roll1);
    let omega0 = omega1.sub(&d_omega);
    (omega0, omega1, d_f)
}

/// Generates a deterministic scene: truth parameters plus points sampled
/// uniformly in the normalized box and the disparity range.
pub fn generate_scene(cfg: &SimConfig) -> Result<SceneTruth> {
    cfg.validate()?;
    let mut rng = Rng::new(cfg.seed);
    let (omega0, omega1, d_f) = sample_truth(cfg, &mut rng);

    let mut points = Vec::with_capacity(cfg.points);
    for _ in 0..cfg.points {
        let x = rng.uniform_in(-cfg.box_x, cfg.box_x);
        let y = rng.uniform_in(-cfg.box_y, cfg.box_y);
        let far = rng.uniform() < cfg.far_fraction;
        let d = if far {
            0.0
        } else {
            rng.uniform_in(cfg.d_min, cfg.d_max)
        };
        points.push(RayPoint { x, y, d });
    }

    Ok(SceneTruth {
        points,
        omega0,
        omega1,
        d_omega: omega1.sub(&omega0),
        d_f,
        k0: cfg.k0,
        k1: cfg.k1,
        noise_sigma_px: cfg.noise_sigma_px,
        outlier_rate: cfg.outlier_rate,
        outlier_dy_px: cfg.outlier_dy_px,
        seed: cfg.seed,
        image_width: cfg.image_width,
        image_height: cfg.image_height,
    })
}

fn dehom(h: Vec3) -> Option<NormalizedPoint> {
    if h.z <= 0.0 {
        return None;
    }
    Some(NormalizedPoint::new(h.x / h.z, h.y / h.z))
}

/// The vertical coordinate that satisfies the reduced/full constraint row
/// exactly for the given left point, measured horizontal disparity, and
/// parameters. Used by the model-consistent generation path.
fn row_exact_y1(
    x0: f64,
    y0: f64,
    dx: f64,
    dw: &RotationVector,
    w_y1: f64,
    w_z1: f64,
    d_f: f64,
) -> Option<f64> {
    let denom = 1.0 - y0 * dw.x + x0 * dw.y + dx * w_y1;
    if denom <= 0.0 {
        return None;
    }
    Some((y0 + dw.x - x0 * dw.z - dx * w_z1 + y0 * d_f) / denom)
}

/// Projects the scene's points into both cameras.
///
/// With `linearized = true` the pair is constructed to satisfy the linear
/// constraint model exactly (left point from the linearized rotation, right
/// vertical coordinate solved from the constraint row), which is the
/// noise-free recovery oracle. With `linearized = false` both projections
/// use exact rotations, so the data carry the real second-order
/// linearization error.
pub fn render_matches(scene: &SceneTruth, linearized: bool) -> Result<RenderedMatches> {
    let mut rng = Rng::new(scene.seed ^ RENDER_STREAM);
    let dw = scene.omega1.sub(&scene.omega0);
    let scale1 = 1.0 + scene.d_f;
    if scale1 <= 0.0 {
        return Err(Error::Config(format!("1 + d_f = {scale1} <= 0")));
    }

    // World-to-camera maps.
    let w2c0_lin = Mat3::identity() - skew(&scene.omega0);
    let w2c0_exact = rotation_exact(&scene.omega0).transpose();
    let w2c1_exact = rotation_exact(&scene.omega1).transpose();

    let mut matches = Vec::with_capacity(scene.points.len());
    let mut outliers = Vec::with_capacity(scene.points.len());
    let mut skipped = 0usize;

    for p in &scene.points {
        let ray = Vec3::new(p.x, p.y, 1.0);
        let pair = if linearized {
            (|| {
                let n0 = dehom(w2c0_lin * ray)?;
                let chain = (Mat3::identity() - skew(&dw))
                    * Vec3::new(n0.x, n0.y, 1.0)
                    + p.d * Vec3::new(1.0, -scene.omega1.z, scene.omega1.y);
                let x1 = scale1 * (chain.x / chain.z);
                let y1 = row_exact_y1(
                    n0.x,
                    n0.y,
                    x1 - n0.x,
                    &dw,
                    scene.omega1.y,
                    scene.omega1.z,
                    scene.d_f,
                )?;
                Some((n0, NormalizedPoint::new(x1, y1)))
            })()
        } else {
            (|| {
                let n0 = dehom(w2c0_exact * ray)?;
                let n1_ray = dehom(w2c1_exact * (ray + Vec3::new(p.d, 0.0, 0.0)))?;
                Some((n0, NormalizedPoint::new(scale1 * n1_ray.x, scale1 * n1_ray.y)))
            })()
        };
        let Some((n0, n1)) = pair else {
            skipped += 1;
            continue;
        };

        let mut p0 = normalized_to_pixel(&n0, &scene.k0)?;
        let mut p1 = normalized_to_pixel(&n1, &scene.k1)?;
        if scene.noise_sigma_px > 0.0 {
            p0.u += scene.noise_sigma_px * rng.gaussian();
            p0.v += scene.noise_sigma_px * rng.gaussian();
            p1.u += scene.noise_sigma_px * rng.gaussian();
            p1.v += scene.noise_sigma_px * rng.gaussian();
        }
        let mut is_outlier = false;
        if scene.outlier_rate > 0.0 && rng.uniform() < scene.outlier_rate {
            is_outlier = true;
            p1.v += rng.uniform_in(-scene.outlier_dy_px, scene.outlier_dy_px);
        }

        matches.push(Match::from_pixels(p0, p1, &scene.k0, &scene.k1, 0.0)?);
        outliers.push(is_outlier);
    }

    Ok(RenderedMatches {
        set: MatchSet {
            matches,
            width: scene.image_width,
            height: scene.image_height,
            k0: scene.k0,
            k1: scene.k1,
        },
        outliers,
        skipped,
    })
}

/// Renders a textured fronto-parallel plane (world disparity `cfg.plane_d`)
/// into both cameras. The texture lives on the left image plane, so the
/// left image is the texture itself and the right image samples it through
/// the exact rig geometry analytically.
pub fn render_texture_pair(cfg: &SimConfig) -> Result<(GrayImage, GrayImage, SceneTruth)> {
    cfg.validate()?;
    let mut scene = generate_scene(cfg)?;
    scene.points.clear();

    let tex_seed = cfg.seed ^ TEXTURE_STREAM;
    let left = GrayImage::from_fn(cfg.image_width, cfg.image_height, |u, v| {
        texture::value_noise(tex_seed, u as f64, v as f64) as f32
    });

    let r0_t = rotation_exact(&scene.omega0).transpose();
    let r1 = rotation_exact(&scene.omega1);
    let scale1 = 1.0 + scene.d_f;
    let d = cfg.plane_d;

    let mut right = GrayImage::zeros(cfg.image_width, cfg.image_height);
    for v in 0..cfg.image_height {
        for u in 0..cfg.image_width {
            let n1 = pixel_to_normalized(&PixelPoint::new(u as f64, v as f64), &cfg.k1)?;
            let m = r1 * Vec3::new(n1.x / scale1, n1.y / scale1, 1.0);
            if m.z <= 1e-9 {
                continue;
            }
            // World ray of the plane point seen at this right pixel.
            let w = m / m.z - Vec3::new(d, 0.0, 0.0);
            let Some(n0) = dehom(r0_t * w) else {
                continue;
            };
            let p0 = normalized_to_pixel(&n0, &cfg.k0)?;
            right.set(
                u,
                v,
                texture::value_noise(tex_seed, p0.u, p0.v) as f32,
            );
        }
    }

    Ok((left, right, scene))
}
