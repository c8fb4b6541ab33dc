//! Procedural band-limited test texture: four octaves of bilinear value
//! noise with amplitude halving. Being analytic, the texture can be sampled
//! at arbitrary real positions, so shifted or warped image pairs carry no
//! resampling error.

use crate::gray::GrayImage;
use crate::sim::rng::hash64;

const OCTAVES: u32 = 4;
/// Cell size of the coarsest octave, in pixels.
const BASE_CELL: f64 = 32.0;

fn node_value(seed: u64, octave: u32, ix: i64, iy: i64) -> f64 {
    let h = hash64(
        seed ^ hash64(octave as u64)
            ^ (ix as u64).wrapping_mul(0x9E3779B97F4A7C15)
            ^ (iy as u64).wrapping_mul(0xC2B2AE3D27D4EB4F),
    );
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Evaluates the texture at a real position. Output is in [0, 1].
pub fn value_noise(seed: u64, x: f64, y: f64) -> f64 {
    let mut sum = 0.0;
    let mut amp = 1.0;
    let mut norm = 0.0;
    for octave in 0..OCTAVES {
        let cell = BASE_CELL / (1u64 << octave) as f64;
        let gx = x / cell;
        let gy = y / cell;
        let ix = gx.floor() as i64;
        let iy = gy.floor() as i64;
        let fx = gx - ix as f64;
        let fy = gy - iy as f64;
        let v00 = node_value(seed, octave, ix, iy);
        let v10 = node_value(seed, octave, ix + 1, iy);
        let v01 = node_value(seed, octave, ix, iy + 1);
        let v11 = node_value(seed, octave, ix + 1, iy + 1);
        let a = v00 + fx * (v10 - v00);
        let b = v01 + fx * (v11 - v01);
        sum += amp * (a + fy * (b - a));
        norm += amp;
        amp *= 0.5;
    }
    sum / norm
}

/// Renders the texture into an image, sampling at `(u + shift_u, v + shift_v)`.
pub fn value_noise_image(
    width: usize,
    height: usize,
    seed: u64,
    shift_u: f64,
    shift_v: f64,
) -> GrayImage {
    GrayImage::from_fn(width, height, |u, v| {
        value_noise(seed, u as f64 + shift_u, v as f64 + shift_v) as f32
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_in_unit_range() {
        for i in 0..200 {
            let v = value_noise(3, i as f64 * 1.7 - 50.0, i as f64 * 0.9 - 20.0);
            assert!((0.0..=1.0).contains(&v), "value {v}");
        }
    }

    #[test]
    fn deterministic_and_seed_dependent() {
        assert_eq!(value_noise(5, 12.3, 4.5), value_noise(5, 12.3, 4.5));
        assert_ne!(value_noise(5, 12.3, 4.5), value_noise(6, 12.3, 4.5));
    }

    #[test]
    fn shifted_image_equals_shifted_samples() {
        let a = value_noise_image(32, 32, 9, 0.0, 0.0);
        let b = value_noise_image(32, 32, 9, 4.0, 0.0);
        for v in 0..32 {
            for u in 0..28 {
                assert_eq!(a.get(u + 4, v), b.get(u, v));
            }
        }
    }

    #[test]
    fn continuous_between_nodes() {
        let eps = 1e-6;
        let base = value_noise(11, 7.3, 2.9);
        let near = value_noise(11, 7.3 + eps, 2.9);
        assert!((base - near).abs() < 1e-4);
    }
}
