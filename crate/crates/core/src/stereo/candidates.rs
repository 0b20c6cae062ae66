use crate::error::{Error, Result};
use crate::imaging::DisparityMap;

use super::config::StereoConfig;

/// Per-pixel candidate disparities in level units, `labels` per pixel,
/// strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateSet {
    width: usize,
    height: usize,
    labels: usize,
    values: Vec<usize>,
}

impl CandidateSet {
    /// `{0, …, labels − 1}` at every pixel.
    pub fn uniform(width: usize, height: usize, labels: usize) -> Self {
        let values = (0..width * height).flat_map(|_| 0..labels).collect();
        Self {
            width,
            height,
            labels,
            values,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn labels(&self) -> usize {
        self.labels
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> &[usize] {
        let k = (j * self.width + i) * self.labels;
        &self.values[k..k + self.labels]
    }
}

/// First window start for a centre `c`: `c − ⌊(labels − 1)/2⌋`, shifted so
/// the window `start..start + labels` stays inside `0..width`.
fn window_start(c: usize, labels: usize, width: usize) -> usize {
    let start = c.saturating_sub((labels - 1) / 2);
    start.min(width - labels)
}

/// Candidate disparities for `level`. The first level uses `0..labels`;
/// later levels centre a window on the previous estimate carried to this
/// level's units (`round(prev · r_prev) · r / r_prev`). `prev` is the
/// full-resolution map produced after the previous level.
pub fn candidates_at_level(
    level: usize,
    prev: Option<&DisparityMap>,
    cfg: &StereoConfig,
    width: usize,
    height: usize,
) -> Result<CandidateSet> {
    let lc = cfg
        .levels
        .get(level)
        .ok_or_else(|| Error::invalid(format!("level {level} not in config")))?;
    let labels = lc.labels;
    if labels > width {
        return Err(Error::invalid(format!(
            "{labels} disparity labels exceed the level width {width}"
        )));
    }
    match (level, prev) {
        (0, None) => Ok(CandidateSet::uniform(width, height, labels)),
        (0, Some(_)) => Err(Error::invalid("the first level takes no previous estimate")),
        (_, None) => Err(Error::invalid(format!("level {level} needs the previous estimate"))),
        (_, Some(prev)) => {
            let r_prev = cfg.levels[level - 1].factor;
            let ratio = (lc.factor / r_prev).round() as usize;
            let block = (1.0 / lc.factor).round() as usize;
            if width != prev.width().div_ceil(block) || height != prev.height().div_ceil(block) {
                return Err(Error::invalid(format!(
                    "level size {width}x{height} does not match a {}x{} estimate",
                    prev.width(),
                    prev.height()
                )));
            }
            let mut values = Vec::with_capacity(width * height * labels);
            for j in 0..height {
                for i in 0..width {
                    let (fi, fj) = ((i * block).min(prev.width() - 1), (j * block).min(prev.height() - 1));
                    let d_hat = (prev.get(fi, fj) * r_prev).round() as usize;
                    let start = window_start(d_hat * ratio, labels, width);
                    values.extend(start..start + labels);
                }
            }
            Ok(CandidateSet {
                width,
                height,
                labels,
                values,
            })
        }
    }
}
