//! Stereo pairs with ground truth: Middlebury 2001 scenes from disk and
//! seeded synthetic layered scenes.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::imaging::{DisparityMap, GrayImage};
use crate::mrf::MarkovRandomField;

use super::candidates::CandidateSet;
use super::config::{Regularizer, StereoConfig};
use super::energy::build_bundle_mrf;

#[derive(Debug, Clone, PartialEq)]
pub struct StereoPair {
    pub name: String,
    pub left: GrayImage,
    pub right: GrayImage,
    pub ground_truth: DisparityMap,
}

/// The four Middlebury 2001 scenes used for evaluation.
pub const MIDDLEBURY_SCENES: [&str; 4] = ["tsukuba", "bull", "sawtooth", "venus"];

/// Middlebury root from `MIDDLEBURY_DIR`, else `data/middlebury` when present.
pub fn middlebury_dir() -> Option<PathBuf> {
    if let Some(dir) = std::env::var_os("MIDDLEBURY_DIR") {
        return Some(PathBuf::from(dir));
    }
    let local = PathBuf::from("data/middlebury");
    local.is_dir().then_some(local)
}

/// File names `(left, right, ground truth, gt scale)` for a scene directory.
pub fn middlebury_files(name: &str) -> Result<(&'static str, &'static str, &'static str, f64)> {
    match name {
        "tsukuba" => Ok(("scene1.row3.col3.ppm", "scene1.row3.col4.ppm", "truedisp.row3.col3.pgm", 16.0)),
        "bull" | "sawtooth" | "venus" => Ok(("im2.ppm", "im6.ppm", "disp2.pgm", 8.0)),
        _ => Err(Error::invalid(format!("unknown Middlebury scene '{name}'"))),
    }
}

/// Loads `<root>/<name>/…`; ground-truth zeros are invalid pixels.
pub fn load_middlebury(root: &Path, name: &str) -> Result<StereoPair> {
    let (l, r, gt, scale) = middlebury_files(name)?;
    let dir = root.join(name);
    Ok(StereoPair {
        name: name.to_string(),
        left: GrayImage::load(&dir.join(l))?,
        right: GrayImage::load(&dir.join(r))?,
        ground_truth: DisparityMap::load_pgm(&dir.join(gt), scale, true)?,
    })
}

fn hash3(seed: u64, a: i64, b: i64) -> f64 {
    let mut z = seed ^ (a as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ (b as u64).wrapping_mul(0xd6e8_feb8_6659_fd93);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 53) as f64
}

/// Smooth value noise in `[0, 1]` on a lattice of the given cell size.
fn value_noise(seed: u64, x: f64, y: f64, cell: f64) -> f64 {
    let (u, v) = (x / cell, y / cell);
    let (x0, y0) = (u.floor(), v.floor());
    let (fx, fy) = (u - x0, v - y0);
    let (sx, sy) = (fx * fx * (3.0 - 2.0 * fx), fy * fy * (3.0 - 2.0 * fy));
    let (x0, y0) = (x0 as i64, y0 as i64);
    let top = hash3(seed, x0, y0) * (1.0 - sx) + hash3(seed, x0 + 1, y0) * sx;
    let bottom = hash3(seed, x0, y0 + 1) * (1.0 - sx) + hash3(seed, x0 + 1, y0 + 1) * sx;
    top * (1.0 - sy) + bottom * sy
}

#[derive(Debug, Clone, Copy)]
enum Shape {
    Everywhere,
    Rect { x0: f64, y0: f64, x1: f64, y1: f64 },
    Disc { cx: f64, cy: f64, r: f64 },
}

impl Shape {
    fn contains(&self, x: f64, y: f64) -> bool {
        match *self {
            Shape::Everywhere => true,
            Shape::Rect { x0, y0, x1, y1 } => x >= x0 && x < x1 && y >= y0 && y < y1,
            Shape::Disc { cx, cy, r } => (x - cx).powi(2) + (y - cy).powi(2) <= r * r,
        }
    }
}

/// A fronto-parallel surface (optionally with a per-row disparity ramp).
#[derive(Debug, Clone, Copy)]
struct Layer {
    shape: Shape,
    disparity: usize,
    /// Extra disparity per row, applied as `floor(ramp · y)`.
    ramp: f64,
    texture_seed: u64,
    contrast: f64,
    mean: f64,
}

impl Layer {
    fn disparity_at(&self, y: usize) -> usize {
        self.disparity + (self.ramp * y as f64).floor() as usize
    }

    fn intensity(&self, x: f64, y: f64) -> f64 {
        let s = self.texture_seed;
        let n = 0.5 * value_noise(s, x, y, 9.0) + 0.3 * value_noise(s ^ 1, x, y, 4.0) + 0.2 * value_noise(s ^ 2, x, y, 2.0);
        (self.mean + self.contrast * (n - 0.5)).clamp(0.0, 1.0)
    }
}

fn render(name: &str, width: usize, height: usize, layers: &[Layer], noise: f64, seed: u64) -> Result<StereoPair> {
    // later layers are nearer; the nearest covering layer is visible
    let top = |x: f64, y: usize, shift: bool| {
        layers.iter().rev().find(|l| {
            let xs = if shift { x + l.disparity_at(y) as f64 } else { x };
            l.shape.contains(xs, y as f64)
        })
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut left = Vec::with_capacity(width * height);
    let mut right = Vec::with_capacity(width * height);
    let mut gt = Vec::with_capacity(width * height);
    for j in 0..height {
        for i in 0..width {
            let x = i as f64;
            let l = top(x, j, false).expect("background covers the plane");
            left.push(l.intensity(x, j as f64));
            gt.push(l.disparity_at(j) as f64);
        }
    }
    for j in 0..height {
        for i in 0..width {
            let l = top(i as f64, j, true).expect("background covers the plane");
            right.push(l.intensity(i as f64 + l.disparity_at(j) as f64, j as f64));
        }
    }
    let mut jitter = |v: f64| (v + noise * (rng.gen::<f64>() - 0.5) * 2.0).clamp(0.0, 1.0);
    let left: Vec<f64> = left.into_iter().map(&mut jitter).collect();
    let right: Vec<f64> = right.into_iter().map(&mut jitter).collect();
    Ok(StereoPair {
        name: name.to_string(),
        left: GrayImage::new(width, height, left)?,
        right: GrayImage::new(width, height, right)?,
        ground_truth: DisparityMap::dense(width, height, gt)?,
    })
}

/// Names accepted by [`synthetic_scene`], standing in for the four Middlebury scenes.
pub const SYNTHETIC_SCENES: [&str; 4] = ["synthetic-tsukuba", "synthetic-bull", "synthetic-sawtooth", "synthetic-venus"];

/// Seeded layered scene with exact integer ground truth. Every visible,
/// unoccluded left pixel satisfies `I_L(i, j) = I_R(i − d, j)` up to the
/// added intensity noise.
pub fn synthetic_scene(name: &str) -> Result<StereoPair> {
    let layer = |shape, disparity, ramp, texture_seed, contrast, mean| Layer {
        shape,
        disparity,
        ramp,
        texture_seed,
        contrast,
        mean,
    };
    let rect = |x0: f64, y0: f64, x1: f64, y1: f64| Shape::Rect { x0, y0, x1, y1 };
    let disc = |cx: f64, cy: f64, r: f64| Shape::Disc { cx, cy, r };
    match name {
        "synthetic-tsukuba" => render(
            name,
            384,
            288,
            &[
                layer(Shape::Everywhere, 4, 0.0, 11, 0.6, 0.45),
                layer(rect(30.0, 40.0, 170.0, 150.0), 7, 0.0, 12, 0.5, 0.6),
                layer(disc(250.0, 170.0, 60.0), 10, 0.0, 13, 0.7, 0.4),
                layer(rect(90.0, 180.0, 200.0, 288.0), 12, 0.0, 14, 0.15, 0.7),
                layer(disc(300.0, 60.0, 35.0), 14, 0.0, 15, 0.6, 0.3),
            ],
            0.02,
            101,
        ),
        "synthetic-bull" => render(
            name,
            434,
            383,
            &[
                layer(Shape::Everywhere, 3, 0.02, 21, 0.5, 0.5),
                layer(rect(60.0, 50.0, 300.0, 200.0), 9, 0.0, 22, 0.2, 0.55),
                layer(rect(200.0, 220.0, 400.0, 340.0), 13, 0.0, 23, 0.6, 0.45),
            ],
            0.02,
            102,
        ),
        "synthetic-sawtooth" => render(
            name,
            434,
            380,
            &[
                layer(Shape::Everywhere, 4, 0.0, 31, 0.6, 0.5),
                layer(rect(40.0, 30.0, 220.0, 340.0), 6, 0.025, 32, 0.6, 0.45),
                layer(rect(250.0, 30.0, 410.0, 340.0), 10, 0.015, 33, 0.5, 0.55),
                layer(disc(130.0, 190.0, 45.0), 15, 0.0, 34, 0.7, 0.5),
            ],
            0.02,
            103,
        ),
        "synthetic-venus" => render(
            name,
            434,
            383,
            &[
                layer(Shape::Everywhere, 3, 0.0, 41, 0.5, 0.5),
                layer(rect(0.0, 0.0, 200.0, 383.0), 5, 0.02, 42, 0.55, 0.45),
                layer(rect(220.0, 80.0, 380.0, 300.0), 8, 0.012, 43, 0.25, 0.6),
                layer(disc(300.0, 200.0, 50.0), 12, 0.0, 44, 0.6, 0.4),
            ],
            0.02,
            104,
        ),
        _ => Err(Error::invalid(format!("unknown synthetic scene '{name}'"))),
    }
}

/// Single-row stereo MRF of `width` pixels and `labels` candidates
/// `0..labels` on a seeded textured pair with true disparity 2, using the
/// coarse-level parameters of the Middlebury setting.
pub fn synthetic_line_mrf(width: usize, labels: usize, seed: u64) -> Result<MarkovRandomField> {
    let texture = |x: f64| 0.5 * value_noise(seed, x, 0.0, 5.0) + 0.5 * value_noise(seed ^ 7, x, 0.0, 2.0);
    let left = GrayImage::from_fn(width, 1, |i, _| texture(i as f64 + 2.0))?;
    let right = GrayImage::from_fn(width, 1, |i, _| texture(i as f64 + 4.0))?;
    let level = StereoConfig::middlebury().levels[0];
    let cand = CandidateSet::uniform(width, 1, labels);
    build_bundle_mrf(&left, &right, 0..1, &cand, &level, Regularizer::Truncated)
}
