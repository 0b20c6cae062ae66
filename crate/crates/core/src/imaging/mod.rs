//! Grayscale images, disparity maps, their file formats, resizing and the
//! median/bilateral post-filters.
//!
//! Pixels are addressed as `(i, j)` with `i` the column and `j` the row;
//! storage is row-major.

mod filter;
mod pnm;
mod resize;

use std::path::Path;

use crate::error::{Error, Result};

pub use filter::{bilateral_filter, median_filter, BilateralParams};
pub use pnm::{encode_pgm, encode_ppm, parse_pnm, read_pnm, write_pgm, RawImage};
pub use resize::{resize_area, upscale_disparity};

#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || values.len() != width * height {
            return Err(Error::invalid(format!(
                "{} values for a {width}x{height} image",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::invalid(format!("intensity {v} outside [0, 1]")));
        }
        Ok(Self { width, height, values })
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let values = (0..height)
            .flat_map(|j| (0..width).map(move |i| (i, j)))
            .map(|(i, j)| f(i, j))
            .collect();
        Self::new(width, height, values)
    }

    /// Loads any PGM/PPM file as normalised luma.
    pub fn load(path: &Path) -> Result<Self> {
        let raw = read_pnm(path)?;
        Self::new(raw.width, raw.height, raw.to_gray())
    }

    /// Writes an 8- or 16-bit PGM, quantising `value · maxval`.
    pub fn save_pgm(&self, path: &Path, maxval: u16) -> Result<()> {
        let m = maxval as f64;
        let samples: Vec<u16> = self.values.iter().map(|v| (v * m).round() as u16).collect();
        write_pgm(path, self.width, self.height, maxval, &samples)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.width + i]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.values[j * self.width..(j + 1) * self.width]
    }
}

/// Float-raster sidecar magic. Layout: magic, `u32` width, `u32` height
/// (little-endian), then `width · height` little-endian `f32` values in
/// row-major order, NaN marking invalid pixels.
pub const SIDECAR_MAGIC: &[u8; 8] = b"QSDISP01";

/// Per-pixel disparities in full-resolution pixel units.
#[derive(Debug, Clone, PartialEq)]
pub struct DisparityMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
    valid: Vec<bool>,
}

impl DisparityMap {
    pub fn new(width: usize, height: usize, values: Vec<f64>, valid: Vec<bool>) -> Result<Self> {
        if values.len() != width * height || valid.len() != values.len() {
            return Err(Error::invalid(format!(
                "{} values / {} mask entries for a {width}x{height} map",
                values.len(),
                valid.len()
            )));
        }
        if let Some(k) = (0..values.len()).find(|&k| valid[k] && !(values[k] >= 0.0 && values[k].is_finite())) {
            return Err(Error::invalid(format!("invalid disparity {} at index {k}", values[k])));
        }
        Ok(Self { width, height, values, valid })
    }

    /// A fully valid map.
    pub fn dense(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        let valid = vec![true; values.len()];
        Self::new(width, height, values, valid)
    }

    pub fn constant(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::dense(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.width + i]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn valid(&self) -> &[bool] {
        &self.valid
    }

    pub fn is_valid(&self, i: usize, j: usize) -> bool {
        self.valid[j * self.width + i]
    }

    pub fn num_valid(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }

    /// Same mask, values transformed pixel-wise.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            width: self.width,
            height: self.height,
            values: self.values.iter().map(|&v| f(v)).collect(),
            valid: self.valid.clone(),
        }
    }

    /// Restricts the valid mask to pixels at least `border` away from every edge.
    pub fn crop_border(&self, border: usize) -> Self {
        let mut out = self.clone();
        for j in 0..self.height {
            for i in 0..self.width {
                let inside = i >= border && j >= border && i + border < self.width && j + border < self.height;
                if !inside {
                    out.valid[j * self.width + i] = false;
                }
            }
        }
        out
    }

    /// Reads a ground-truth style PGM: `disparity = raw / scale`, raw 0 invalid
    /// when `zero_invalid` is set.
    pub fn load_pgm(path: &Path, scale: f64, zero_invalid: bool) -> Result<Self> {
        Self::from_raw(&read_pnm(path)?, scale, zero_invalid)
    }

    pub fn from_raw(raw: &RawImage, scale: f64, zero_invalid: bool) -> Result<Self> {
        if !(scale > 0.0) {
            return Err(Error::invalid(format!("disparity scale must be positive, got {scale}")));
        }
        if raw.channels != 1 {
            return Err(Error::parse(0, "disparity maps must be single-channel PGM"));
        }
        let values = raw.samples.iter().map(|&v| v as f64 / scale).collect();
        let valid = raw.samples.iter().map(|&v| !(zero_invalid && v == 0)).collect();
        Self::new(raw.width, raw.height, values, valid)
    }

    /// Quantised 16-bit samples `round(value · scale)`; invalid pixels are 0.
    pub fn to_samples(&self, scale: f64) -> Result<Vec<u16>> {
        self.values
            .iter()
            .zip(&self.valid)
            .map(|(&v, &ok)| {
                if !ok {
                    return Ok(0);
                }
                let s = (v * scale).round();
                if !(0.0..=65535.0).contains(&s) {
                    return Err(Error::invalid(format!("disparity {v} at scale {scale} overflows 16 bits")));
                }
                Ok(s as u16)
            })
            .collect()
    }

    /// 16-bit PGM of `round(value · scale)`.
    pub fn save_pgm(&self, path: &Path, scale: f64) -> Result<()> {
        write_pgm(path, self.width, self.height, 65535, &self.to_samples(scale)?)
    }

    pub fn to_sidecar_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + 4 * self.values.len());
        out.extend_from_slice(SIDECAR_MAGIC);
        out.extend_from_slice(&(self.width as u32).to_le_bytes());
        out.extend_from_slice(&(self.height as u32).to_le_bytes());
        for (&v, &ok) in self.values.iter().zip(&self.valid) {
            let f = if ok { v as f32 } else { f32::NAN };
            out.extend_from_slice(&f.to_le_bytes());
        }
        out
    }

    pub fn from_sidecar_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 16 || &bytes[..8] != SIDECAR_MAGIC {
            return Err(Error::parse(0, "missing disparity sidecar magic"));
        }
        let width = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        let height = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
        let n = width * height;
        if bytes.len() != 16 + 4 * n {
            return Err(Error::parse(
                bytes.len().min(16 + 4 * n),
                format!("sidecar raster has {} bytes, expected {}", bytes.len() - 16, 4 * n),
            ));
        }
        let raster: Vec<f32> = bytes[16..]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let valid = raster.iter().map(|v| !v.is_nan()).collect();
        let values = raster.iter().map(|&v| if v.is_nan() { 0.0 } else { v as f64 }).collect();
        Self::new(width, height, values, valid)
    }

    pub fn save_sidecar(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_sidecar_bytes())?;
        Ok(())
    }

    pub fn load_sidecar(path: &Path) -> Result<Self> {
        Self::from_sidecar_bytes(&std::fs::read(path)?)
    }
}
