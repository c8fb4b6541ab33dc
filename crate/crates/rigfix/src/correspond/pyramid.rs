//! Image pyramid for coarse-to-fine matching.

use crate::error::{Error, Result};
use crate::gray::GrayImage;

/// Builds a pyramid of `levels` images. Level 0 is the input; each further
/// level is 2x2 box-filtered and half resolution (floor division).
///
/// Errors if the coarsest level would be smaller than 16 px in either
/// dimension.
pub fn build_pyramid(img: &GrayImage, levels: usize) -> Result<Vec<GrayImage>> {
    if levels < 1 {
        return Err(Error::Config("pyramid needs at least one level".into()));
    }
    let shrink = 1usize << (levels - 1);
    if img.width / shrink < 16 || img.height / shrink < 16 {
        return Err(Error::Config(format!(
            "{} pyramid levels leave the coarsest level below 16 px for a {}x{} image",
            levels, img.width, img.height
        )));
    }

    let mut pyramid = Vec::with_capacity(levels);
    pyramid.push(img.clone());
    for _ in 1..levels {
        let prev = pyramid.last().unwrap();
        let w = prev.width / 2;
        let h = prev.height / 2;
        let mut samples = Vec::with_capacity(w * h);
        for v in 0..h {
            for u in 0..w {
                let s = prev.get(2 * u, 2 * v)
                    + prev.get(2 * u + 1, 2 * v)
                    + prev.get(2 * u, 2 * v + 1)
                    + prev.get(2 * u + 1, 2 * v + 1);
                samples.push(s * 0.25);
            }
        }
        pyramid.push(GrayImage {
            width: w,
            height: h,
            samples,
        });
    }
    Ok(pyramid)
}
