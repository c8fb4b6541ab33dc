//! Grayscale image file I/O: binary PGM (P5, 8- or 16-bit) read and write,
//! plus single-channel PNG through the `image` crate.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::gray::GrayImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageDepth {
    Eight,
    Sixteen,
}

impl ImageDepth {
    fn maxval(&self) -> u32 {
        match self {
            ImageDepth::Eight => 255,
            ImageDepth::Sixteen => 65535,
        }
    }
}

fn read_pgm_token<R: Read>(r: &mut R) -> Result<String> {
    let mut token = String::new();
    let mut in_comment = false;
    loop {
        let mut byte = [0u8; 1];
        if r.read(&mut byte)? == 0 {
            if token.is_empty() {
                return Err(Error::Parse("unexpected end of PGM header".into()));
            }
            return Ok(token);
        }
        let c = byte[0] as char;
        if in_comment {
            if c == '\n' {
                in_comment = false;
            }
            continue;
        }
        if c == '#' {
            in_comment = true;
            continue;
        }
        if c.is_whitespace() {
            if token.is_empty() {
                continue;
            }
            return Ok(token);
        }
        token.push(c);
    }
}

/// Reads a binary PGM (P5). Maxval up to 255 loads as 8-bit, up to 65535 as
/// 16-bit big-endian, both scaled to [0, 1].
pub fn read_pgm<R: Read>(mut r: R) -> Result<(GrayImage, ImageDepth)> {
    let magic = read_pgm_token(&mut r)?;
    if magic != "P5" {
        return Err(Error::Parse(format!("not a binary PGM (magic {magic})")));
    }
    let parse = |tok: String| -> Result<u32> {
        tok.parse::<u32>()
            .map_err(|e| Error::Parse(format!("bad PGM header field: {e}")))
    };
    let width = parse(read_pgm_token(&mut r)?)? as usize;
    let height = parse(read_pgm_token(&mut r)?)? as usize;
    let maxval = parse(read_pgm_token(&mut r)?)?;
    if width == 0 || height == 0 {
        return Err(Error::Parse("zero PGM dimensions".into()));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::Parse(format!("unsupported PGM maxval {maxval}")));
    }
    let depth = if maxval <= 255 {
        ImageDepth::Eight
    } else {
        ImageDepth::Sixteen
    };
    let count = width * height;
    let mut samples = Vec::with_capacity(count);
    match depth {
        ImageDepth::Eight => {
            let mut raw = vec![0u8; count];
            r.read_exact(&mut raw)?;
            for b in raw {
                samples.push(b as f32 / maxval as f32);
            }
        }
        ImageDepth::Sixteen => {
            let mut raw = vec![0u8; count * 2];
            r.read_exact(&mut raw)?;
            for pair in raw.chunks_exact(2) {
                let v = u16::from_be_bytes([pair[0], pair[1]]);
                samples.push(v as f32 / maxval as f32);
            }
        }
    }
    Ok((GrayImage::new(width, height, samples)?, depth))
}

/// Writes a binary PGM (P5) with a canonical header.
pub fn write_pgm<W: Write>(mut w: W, img: &GrayImage, depth: ImageDepth) -> Result<()> {
    let maxval = depth.maxval();
    write!(w, "P5\n{} {}\n{}\n", img.width, img.height, maxval)?;
    match depth {
        ImageDepth::Eight => {
            let raw: Vec<u8> = img
                .samples
                .iter()
                .map(|&s| (s.clamp(0.0, 1.0) * 255.0).round() as u8)
                .collect();
            w.write_all(&raw)?;
        }
        ImageDepth::Sixteen => {
            let mut raw = Vec::with_capacity(img.samples.len() * 2);
            for &s in &img.samples {
                let v = (s.clamp(0.0, 1.0) * 65535.0).round() as u16;
                raw.extend_from_slice(&v.to_be_bytes());
            }
            w.write_all(&raw)?;
        }
    }
    Ok(())
}

fn is_png(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("png"))
}

/// Loads a grayscale image by extension: `.pgm` or single-channel `.png`.
pub fn load_gray(path: &Path) -> Result<(GrayImage, ImageDepth)> {
    if is_png(path) {
        let dynimg = image::open(path)?;
        match dynimg {
            image::DynamicImage::ImageLuma8(buf) => {
                let (w, h) = (buf.width() as usize, buf.height() as usize);
                let samples = buf.into_raw().iter().map(|&b| b as f32 / 255.0).collect();
                Ok((GrayImage::new(w, h, samples)?, ImageDepth::Eight))
            }
            image::DynamicImage::ImageLuma16(buf) => {
                let (w, h) = (buf.width() as usize, buf.height() as usize);
                let samples = buf
                    .into_raw()
                    .iter()
                    .map(|&b| b as f32 / 65535.0)
                    .collect();
                Ok((GrayImage::new(w, h, samples)?, ImageDepth::Sixteen))
            }
            _ => Err(Error::Parse(format!(
                "{}: only single-channel PNG is supported",
                path.display()
            ))),
        }
    } else {
        let file = BufReader::new(File::open(path)?);
        read_pgm(file)
    }
}

/// Saves a grayscale image by extension, preserving the requested depth.
pub fn save_gray(path: &Path, img: &GrayImage, depth: ImageDepth) -> Result<()> {
    if is_png(path) {
        match depth {
            ImageDepth::Eight => {
                let raw: Vec<u8> = img
                    .samples
                    .iter()
                    .map(|&s| (s.clamp(0.0, 1.0) * 255.0).round() as u8)
                    .collect();
                let buf: image::GrayImage =
                    image::ImageBuffer::from_raw(img.width as u32, img.height as u32, raw)
                        .expect("sized buffer");
                buf.save(path)?;
            }
            ImageDepth::Sixteen => {
                let raw: Vec<u16> = img
                    .samples
                    .iter()
                    .map(|&s| (s.clamp(0.0, 1.0) * 65535.0).round() as u16)
                    .collect();
                let buf: image::ImageBuffer<image::Luma<u16>, Vec<u16>> =
                    image::ImageBuffer::from_raw(img.width as u32, img.height as u32, raw)
                        .expect("sized buffer");
                buf.save(path)?;
            }
        }
        Ok(())
    } else {
        let mut file = BufWriter::new(File::create(path)?);
        write_pgm(&mut file, img, depth)
    }
}
