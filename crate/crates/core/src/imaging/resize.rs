use crate::error::{Error, Result};

use super::{DisparityMap, GrayImage};

/// Block size for a power-of-two factor `1, 1/2, …, 1/32`.
fn block_of(factor: f64) -> Result<usize> {
    (0..=5)
        .map(|k| 1usize << k)
        .find(|&b| (factor * b as f64 - 1.0).abs() < 1e-12)
        .ok_or_else(|| Error::invalid(format!("unsupported resize factor {factor}")))
}

/// Area-averaging downsample. Output dimensions are `ceil(dim · factor)`;
/// blocks clipped by the image edge average the pixels they contain.
pub fn resize_area(img: &GrayImage, factor: f64) -> Result<GrayImage> {
    let b = block_of(factor)?;
    if b == 1 {
        return Ok(img.clone());
    }
    let (w, h) = (img.width().div_ceil(b), img.height().div_ceil(b));
    let mut values = Vec::with_capacity(w * h);
    for oj in 0..h {
        for oi in 0..w {
            let (mut sum, mut n) = (0.0, 0usize);
            for j in oj * b..((oj + 1) * b).min(img.height()) {
                for i in oi * b..((oi + 1) * b).min(img.width()) {
                    sum += img.get(i, j);
                    n += 1;
                }
            }
            values.push((sum / n as f64).clamp(0.0, 1.0));
        }
    }
    GrayImage::new(w, h, values)
}

/// Nearest-neighbour upsampling of a level map (level units) to
/// `width × height`, with values converted to full-resolution units (`/ factor`).
pub fn upscale_disparity(level: &DisparityMap, factor: f64, width: usize, height: usize) -> Result<DisparityMap> {
    let b = block_of(factor)?;
    if level.width() != width.div_ceil(b) || level.height() != height.div_ceil(b) {
        return Err(Error::invalid(format!(
            "level map {}x{} does not match {width}x{height} at factor {factor}",
            level.width(),
            level.height()
        )));
    }
    let mut values = Vec::with_capacity(width * height);
    let mut valid = Vec::with_capacity(width * height);
    for j in 0..height {
        for i in 0..width {
            values.push(level.get(i / b, j / b) * b as f64);
            valid.push(level.is_valid(i / b, j / b));
        }
    }
    DisparityMap::new(width, height, values, valid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_preserved() {
        let img = GrayImage::from_fn(9, 7, |_, _| 0.5).unwrap();
        let small = resize_area(&img, 0.25).unwrap();
        assert_eq!((small.width(), small.height()), (3, 2));
        assert!(small.values().iter().all(|&v| (v - 0.5).abs() < 1e-15));
    }

    #[test]
    fn identity_and_checkerboard() {
        let img = GrayImage::from_fn(4, 4, |i, j| ((i + j) % 2) as f64).unwrap();
        assert_eq!(resize_area(&img, 1.0).unwrap(), img);
        assert_eq!(resize_area(&img, 0.25).unwrap().values(), &[0.5]);
        assert!(resize_area(&img, 0.3).is_err());
    }

    #[test]
    fn mean_preserved_when_divisible() {
        let img = GrayImage::from_fn(8, 4, |i, j| ((i * 7 + j * 3) % 11) as f64 / 10.0).unwrap();
        let small = resize_area(&img, 0.5).unwrap();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        assert!((mean(img.values()) - mean(small.values())).abs() < 1e-12);
    }

    #[test]
    fn upscale_converts_units() {
        let level = DisparityMap::dense(2, 1, vec![1.0, 3.0]).unwrap();
        let full = upscale_disparity(&level, 0.5, 3, 2).unwrap();
        assert_eq!(full.values(), &[2.0, 2.0, 6.0, 2.0, 2.0, 6.0]);
        assert!(upscale_disparity(&level, 0.5, 5, 2).is_err());
    }
}
