//! Row-major grayscale image with luminance samples in [0, 1].

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub samples: Vec<f32>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, samples: Vec<f32>) -> Result<Self> {
        if samples.len() != width * height {
            return Err(Error::Config(format!(
                "sample count {} != {}x{}",
                samples.len(),
                width,
                height
            )));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::NonFinite("image samples"));
        }
        Ok(GrayImage {
            width,
            height,
            samples,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        GrayImage {
            width,
            height,
            samples: vec![0.0; width * height],
        }
    }

    /// Builds an image by evaluating `f(u, v)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f32) -> Self {
        let mut samples = Vec::with_capacity(width * height);
        for v in 0..height {
            for u in 0..width {
                samples.push(f(u, v));
            }
        }
        GrayImage {
            width,
            height,
            samples,
        }
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> f32 {
        self.samples[v * self.width + u]
    }

    #[inline]
    pub fn set(&mut self, u: usize, v: usize, value: f32) {
        self.samples[v * self.width + u] = value;
    }

    /// Bilinear sample at a real-valued position. Returns `None` when any
    /// of the four taps falls outside the image.
    pub fn sample_bilinear(&self, u: f64, v: f64) -> Option<f32> {
        if !(u.is_finite() && v.is_finite()) || u < 0.0 || v < 0.0 {
            return None;
        }
        let u0 = u.floor();
        let v0 = v.floor();
        let iu = u0 as usize;
        let iv = v0 as usize;
        // At the exact last row/column the fractional part is 0 and the
        // second tap is never weighted, so clamp it inside.
        let iu1 = if iu + 1 < self.width {
            iu + 1
        } else if u == u0 && iu + 1 == self.width {
            iu
        } else {
            return None;
        };
        let iv1 = if iv + 1 < self.height {
            iv + 1
        } else if v == v0 && iv + 1 == self.height {
            iv
        } else {
            return None;
        };
        if iu >= self.width || iv >= self.height {
            return None;
        }
        let fu = (u - u0) as f32;
        let fv = (v - v0) as f32;
        let p00 = self.get(iu, iv);
        let p10 = self.get(iu1, iv);
        let p01 = self.get(iu, iv1);
        let p11 = self.get(iu1, iv1);
        let a = p00 + fu * (p10 - p00);
        let b = p01 + fu * (p11 - p01);
        Some(a + fv * (b - a))
    }
}
