use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;

use super::DisparityMap;

fn clamp_index(x: isize, len: usize) -> usize {
    x.clamp(0, len as isize - 1) as usize
}

/// Window median with replicate-padded borders. Even-sized samples (which
/// occur only next to invalid pixels) take the lower middle value, so the
/// output never leaves the input value set. Invalid pixels pass through.
pub fn median_filter(map: &DisparityMap, window: usize) -> Result<DisparityMap> {
    if window == 0 || window % 2 == 0 {
        return Err(Error::invalid(format!("median window must be odd, got {window}")));
    }
    if window == 1 {
        return Ok(map.clone());
    }
    let (w, h) = (map.width(), map.height());
    let r = (window / 2) as isize;
    let rows = par::map_indexed(h, |j| {
        let mut buf = Vec::with_capacity(window * window);
        (0..w)
            .map(|i| {
                if !map.is_valid(i, j) {
                    return map.get(i, j);
                }
                buf.clear();
                for dy in -r..=r {
                    let y = clamp_index(j as isize + dy, h);
                    for dx in -r..=r {
                        let x = clamp_index(i as isize + dx, w);
                        if map.is_valid(x, y) {
                            buf.push(map.get(x, y));
                        }
                    }
                }
                let mid = (buf.len() - 1) / 2;
                *buf.select_nth_unstable_by(mid, f64::total_cmp).1
            })
            .collect::<Vec<_>>()
    });
    DisparityMap::new(w, h, rows.concat(), map.valid().to_vec())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BilateralParams {
    /// Neighbourhood diameter; the kernel is the disc of radius `diameter / 2`.
    pub diameter: usize,
    pub sigma_color: f64,
    pub sigma_space: f64,
    /// Values are multiplied by this before filtering and divided after, so
    /// `sigma_color` is expressed in scaled units.
    pub value_scale: f64,
}

impl Default for BilateralParams {
    fn default() -> Self {
        Self {
            diameter: 12,
            sigma_color: 75.0,
            sigma_space: 75.0,
            value_scale: 8.0,
        }
    }
}

/// Gaussian range/space bilateral filter over a disc, replicate-padded.
/// Only valid pixels contribute; invalid pixels pass through.
pub fn bilateral_filter(map: &DisparityMap, params: &BilateralParams) -> Result<DisparityMap> {
    let BilateralParams {
        diameter,
        sigma_color,
        sigma_space,
        value_scale,
    } = *params;
    if diameter == 0 || !(sigma_color > 0.0) || !(sigma_space > 0.0) || !(value_scale > 0.0 && value_scale.is_finite()) {
        return Err(Error::invalid(format!("invalid bilateral parameters {params:?}")));
    }
    let (w, h) = (map.width(), map.height());
    let r = (diameter / 2) as isize;
    let mut offsets = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            let d2 = (dx * dx + dy * dy) as f64;
            if d2 <= (r * r) as f64 {
                let ws = if d2 == 0.0 { 1.0 } else { (-d2 / (2.0 * sigma_space * sigma_space)).exp() };
                offsets.push((dx, dy, ws));
            }
        }
    }
    let color_coeff = -1.0 / (2.0 * sigma_color * sigma_color);
    let rows = par::map_indexed(h, |j| {
        (0..w)
            .map(|i| {
                if !map.is_valid(i, j) {
                    return map.get(i, j);
                }
                let centre = map.get(i, j) * value_scale;
                let (mut num, mut den) = (0.0, 0.0);
                for &(dx, dy, ws) in &offsets {
                    let x = clamp_index(i as isize + dx, w);
                    let y = clamp_index(j as isize + dy, h);
                    if !map.is_valid(x, y) {
                        continue;
                    }
                    let v = map.get(x, y) * value_scale;
                    let diff = v - centre;
                    let wt = ws * (color_coeff * diff * diff).exp();
                    num += wt * v;
                    den += wt;
                }
                (num / den / value_scale).max(0.0)
            })
            .collect::<Vec<_>>()
    });
    DisparityMap::new(w, h, rows.concat(), map.valid().to_vec())
}
