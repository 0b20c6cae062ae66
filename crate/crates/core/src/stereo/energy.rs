use std::ops::Range;

use crate::error::{Error, Result};
use crate::imaging::GrayImage;
use crate::mrf::MarkovRandomField;

use super::candidates::CandidateSet;
use super::config::{LevelConfig, Regularizer};

/// Data cost when the matching right pixel falls outside the image: the
/// largest possible squared intensity difference.
pub const OUT_OF_RANGE_PENALTY: f64 = 1.0;

/// Brightness-constancy cost `(I_L(i, j) − I_R(i − d, j))²`.
#[inline]
pub fn data_term(left: &GrayImage, right: &GrayImage, i: usize, j: usize, d: usize) -> f64 {
    if d > i {
        return OUT_OF_RANGE_PENALTY;
    }
    let diff = left.get(i, j) - right.get(i - d, j);
    diff * diff
}

/// Edge-aware regularizer from the intensity step `|ΔI|` and disparity step `|Δd|`.
#[inline]
pub fn smoothness_cost(delta_i: f64, delta_d: f64, level: &LevelConfig, reg: Regularizer) -> f64 {
    let r = match reg {
        Regularizer::Truncated => level.m.min(level.s * delta_d),
        Regularizer::Linear => level.s * delta_d,
        Regularizer::None => return 0.0,
    };
    if delta_i <= level.tau {
        r
    } else {
        r / level.q
    }
}

/// Regularizer between neighbouring pixels `p` and `p2` of the left image.
pub fn smoothness_term(
    left: &GrayImage,
    p: (usize, usize),
    p2: (usize, usize),
    d: usize,
    d2: usize,
    level: &LevelConfig,
    reg: Regularizer,
) -> f64 {
    let delta_i = (left.get(p.0, p.1) - left.get(p2.0, p2.1)).abs();
    smoothness_cost(delta_i, d.abs_diff(d2) as f64, level, reg)
}

/// MRF over the pixels of `rows`: vertex `(j − rows.start)·width + i`, labels
/// are the pixel's candidates, 4-neighbour edges stay inside the bundle.
pub fn build_bundle_mrf(
    left: &GrayImage,
    right: &GrayImage,
    rows: Range<usize>,
    cand: &CandidateSet,
    level: &LevelConfig,
    reg: Regularizer,
) -> Result<MarkovRandomField> {
    let (w, h) = (left.width(), left.height());
    if right.width() != w || right.height() != h || cand.width() != w || cand.height() != h {
        return Err(Error::invalid("images and candidate set differ in size"));
    }
    if rows.start >= rows.end || rows.end > h {
        return Err(Error::invalid(format!("row range {rows:?} outside 0..{h}")));
    }
    let mut unary = Vec::with_capacity(w * rows.len());
    for j in rows.clone() {
        for i in 0..w {
            unary.push(cand.at(i, j).iter().map(|&d| data_term(left, right, i, j, d)).collect());
        }
    }
    let pairwise = |a: (usize, usize), b: (usize, usize)| {
        let (ca, cb) = (cand.at(a.0, a.1), cand.at(b.0, b.1));
        let mut m = Vec::with_capacity(ca.len() * cb.len());
        for &da in ca {
            for &db in cb {
                m.push(smoothness_term(left, a, b, da, db, level, reg));
            }
        }
        m
    };
    let vid = |i: usize, j: usize| (j - rows.start) * w + i;
    let mut edges = Vec::new();
    for j in rows.clone() {
        for i in 0..w {
            if i + 1 < w {
                edges.push((vid(i, j), vid(i + 1, j), pairwise((i, j), (i + 1, j))));
            }
            if j + 1 < rows.end {
                edges.push((vid(i, j), vid(i, j + 1), pairwise((i, j), (i, j + 1))));
            }
        }
    }
    MarkovRandomField::new(unary, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn level(tau: f64, m: f64, s: f64) -> LevelConfig {
        LevelConfig {
            factor: 1.0,
            labels: 4,
            tau,
            q: 10.0,
            m,
            s,
            median: 1,
        }
    }

    #[test]
    fn data_term_examples() {
        let l = GrayImage::new(3, 1, vec![0.1, 0.8, 0.8]).unwrap();
        let r = GrayImage::new(3, 1, vec![0.5, 0.8, 0.1]).unwrap();
        assert!((data_term(&l, &r, 1, 0, 1) - 0.09).abs() < 1e-12);
        assert_eq!(data_term(&l, &r, 1, 0, 0), 0.0);
        assert_eq!(data_term(&l, &r, 1, 0, 2), 1.0);
    }

    #[test]
    fn smoothness_examples() {
        let lv = level(0.15, 0.0015, 0.0005);
        assert_eq!(smoothness_cost(0.3, 0.0, &lv, Regularizer::Truncated), 0.0);
        assert!((smoothness_cost(0.1, 3.0, &lv, Regularizer::Truncated) - 0.0015).abs() < 1e-15);
        assert!((smoothness_cost(0.2, 3.0, &lv, Regularizer::Truncated) - 0.00015).abs() < 1e-15);
        let fine = level(0.3, f64::INFINITY, 0.0005);
        assert!((smoothness_cost(0.0, 7.0, &fine, Regularizer::Truncated) - 0.0035).abs() < 1e-15);
        assert!((smoothness_cost(0.1, 9.0, &lv, Regularizer::Linear) - 0.0045).abs() < 1e-15);
        assert_eq!(smoothness_cost(0.1, 9.0, &lv, Regularizer::None), 0.0);
    }

    #[test]
    fn single_row_bundle_is_a_path() {
        let img = GrayImage::from_fn(5, 2, |i, j| (i + j) as f64 / 10.0).unwrap();
        let cand = CandidateSet::uniform(5, 2, 3);
        let mrf = build_bundle_mrf(&img, &img, 1..2, &cand, &level(0.15, 0.0015, 0.0005), Regularizer::Truncated)
            .unwrap();
        assert_eq!((mrf.num_vertices(), mrf.num_edges()), (5, 4));
        assert!(mrf.label_counts().iter().all(|&k| k == 3));
        let tall = build_bundle_mrf(&img, &img, 0..2, &cand, &level(0.15, 0.0015, 0.0005), Regularizer::Truncated)
            .unwrap();
        assert_eq!(tall.num_edges(), 4 + 4 + 5);
        assert!(build_bundle_mrf(&img, &img, 1..3, &cand, &level(0.1, 1.0, 1.0), Regularizer::None).is_err());
    }
}
