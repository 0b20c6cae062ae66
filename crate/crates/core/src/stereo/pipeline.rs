use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{bilateral_filter, median_filter, resize_area, upscale_disparity, DisparityMap, GrayImage};
use crate::mrf::{Labelling, MarkovRandomField};
use crate::onehot::{decode, encode_one_hot};
use crate::par;
use crate::solve::{solve_chain_dp, solve_exhaustive, solve_sa, solve_sa_seq, SaParams};

use super::candidates::{candidates_at_level, CandidateSet};
use super::config::{SolverConfig, StereoConfig};
use super::energy::build_bundle_mrf;

/// Outcome of one bundle's MAP solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleReport {
    pub bundle: usize,
    pub first_row: usize,
    pub rows: usize,
    /// MRF energy of the returned labelling.
    pub energy: f64,
    /// Whether the QUBO answer was one-hot feasible (always true for chain DP).
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelReport {
    pub level: usize,
    pub factor: f64,
    pub width: usize,
    pub height: usize,
    pub bundles: Vec<BundleReport>,
}

impl LevelReport {
    pub fn total_energy(&self) -> f64 {
        self.bundles.iter().map(|b| b.energy).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StereoOutput {
    /// Full-resolution disparities after all filtering.
    pub disparity: DisparityMap,
    /// Per-level raw solutions in level units, before upscaling and filtering.
    pub level_maps: Vec<DisparityMap>,
    pub levels: Vec<LevelReport>,
}

/// Seed for one bundle, decorrelated across `(seed, level, bundle)`.
pub fn bundle_seed(seed: u64, level: usize, bundle: usize) -> u64 {
    let mut z = seed ^ (level as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ (bundle as u64).wrapping_mul(0xc2b2_ae3d_27d4_eb4f);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Solves one bundle MRF with the configured backend. `inner_parallel`
/// controls whether SA reads may use the thread pool.
pub fn solve_bundle_mrf(
    mrf: &MarkovRandomField,
    cfg: &StereoConfig,
    seed: u64,
    inner_parallel: bool,
) -> Result<(Labelling, f64, bool)> {
    match cfg.solver {
        SolverConfig::ChainDp => {
            let (lab, e) = solve_chain_dp(mrf)?;
            Ok((lab, e, true))
        }
        SolverConfig::Exhaustive | SolverConfig::Sa { .. } => {
            let eps = cfg.rectifier.epsilon.resolve(mrf);
            let q = encode_one_hot(mrf, eps, cfg.rectifier.t)?;
            let result = match cfg.solver {
                SolverConfig::Sa { reads, sweeps } => {
                    let params = SaParams {
                        reads,
                        sweeps,
                        beta_range: None,
                        seed,
                    };
                    if inner_parallel {
                        solve_sa(&q, &params)?
                    } else {
                        solve_sa_seq(&q, &params)?
                    }
                }
                _ => solve_exhaustive(&q)?,
            };
            let decoded = decode(&q, &result.best_x)?;
            let feasible = decoded.all_feasible();
            let e = mrf.energy(&decoded.labelling)?;
            Ok((decoded.labelling, e, feasible))
        }
    }
}

fn solve_level(
    left: &GrayImage,
    right: &GrayImage,
    cand: &CandidateSet,
    cfg: &StereoConfig,
    level: usize,
    parallel: bool,
) -> Result<(DisparityMap, LevelReport)> {
    let (w, h) = (left.width(), left.height());
    let lc = &cfg.levels[level];
    let bh = cfg.bundle_height;
    let count = h.div_ceil(bh);
    let work = |b: usize| -> Result<(Vec<usize>, BundleReport)> {
        let rows = b * bh..((b + 1) * bh).min(h);
        let wrap = |e: Error| Error::Bundle {
            level,
            bundle: b,
            source: Box::new(e),
        };
        let mrf = build_bundle_mrf(left, right, rows.clone(), cand, lc, cfg.regularizer).map_err(wrap)?;
        let seed = bundle_seed(cfg.seed, level, b);
        // one layer of parallelism: bundles when parallel, SA reads otherwise
        let (lab, energy, feasible) = solve_bundle_mrf(&mrf, cfg, seed, false).map_err(wrap)?;
        let mut disp = Vec::with_capacity(lab.len());
        for (v, &l) in lab.0.iter().enumerate() {
            let (i, j) = (v % w, rows.start + v / w);
            disp.push(cand.at(i, j)[l]);
        }
        let report = BundleReport {
            bundle: b,
            first_row: rows.start,
            rows: rows.len(),
            energy,
            feasible,
        };
        Ok((disp, report))
    };
    let results = if parallel {
        par::map_indexed(count, work)
    } else {
        par::map_indexed_seq(count, work)
    };
    let mut values = Vec::with_capacity(w * h);
    let mut bundles = Vec::with_capacity(count);
    for r in results {
        let (disp, report) = r?;
        values.extend(disp.into_iter().map(|d| d as f64));
        bundles.push(report);
    }
    let map = DisparityMap::dense(w, h, values)?;
    let report = LevelReport {
        level,
        factor: lc.factor,
        width: w,
        height: h,
        bundles,
    };
    Ok((map, report))
}

fn run(left: &GrayImage, right: &GrayImage, cfg: &StereoConfig, parallel: bool) -> Result<StereoOutput> {
    cfg.validate()?;
    if left.width() != right.width() || left.height() != right.height() {
        return Err(Error::invalid("left and right images differ in size"));
    }
    let (w, h) = (left.width(), left.height());
    let mut prev: Option<DisparityMap> = None;
    let mut level_maps = Vec::with_capacity(cfg.levels.len());
    let mut levels = Vec::with_capacity(cfg.levels.len());
    for (k, lc) in cfg.levels.iter().enumerate() {
        let l = resize_area(left, lc.factor)?;
        let r = resize_area(right, lc.factor)?;
        let cand = candidates_at_level(k, prev.as_ref(), cfg, l.width(), l.height())?;
        let (map, report) = solve_level(&l, &r, &cand, cfg, k, parallel)?;
        let mut full = upscale_disparity(&map, lc.factor, w, h)?;
        if cfg.median_enabled {
            full = median_filter(&full, lc.median)?;
        }
        level_maps.push(map);
        levels.push(report);
        prev = Some(full);
    }
    let mut disparity = prev.expect("at least one level");
    if let Some(b) = &cfg.bilateral {
        disparity = bilateral_filter(&disparity, b)?;
    }
    Ok(StereoOutput {
        disparity,
        level_maps,
        levels,
    })
}

/// Coarse-to-fine stereo matching. Bundles within a level run in parallel
/// when the `parallel` feature is on; output does not depend on scheduling.
pub fn stereo_match(left: &GrayImage, right: &GrayImage, cfg: &StereoConfig) -> Result<StereoOutput> {
    run(left, right, cfg, true)
}

/// [`stereo_match`] with every bundle solved in order on the calling thread.
pub fn stereo_match_seq(left: &GrayImage, right: &GrayImage, cfg: &StereoConfig) -> Result<StereoOutput> {
    run(left, right, cfg, false)
}
