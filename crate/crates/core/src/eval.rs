//! Disparity error metrics and QUBO problem-graph statistics.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::imaging::DisparityMap;
use crate::qubo::QuboInstance;
use crate::stereo::StereoConfig;

fn paired<'a>(est: &'a DisparityMap, gt: &'a DisparityMap) -> Result<impl Iterator<Item = (f64, f64)> + 'a> {
    if est.width() != gt.width() || est.height() != gt.height() {
        return Err(Error::invalid(format!(
            "estimate is {}x{}, ground truth {}x{}",
            est.width(),
            est.height(),
            gt.width(),
            gt.height()
        )));
    }
    if gt.num_valid() == 0 {
        return Err(Error::Undefined("ground truth has no valid pixels".into()));
    }
    Ok(est
        .values()
        .iter()
        .zip(gt.values())
        .zip(gt.valid())
        .filter(|(_, &ok)| ok)
        .map(|((&e, &g), _)| (e, g)))
}

/// Root mean squared error over the ground truth's valid pixels.
pub fn rmse(est: &DisparityMap, gt: &DisparityMap) -> Result<f64> {
    let (mut sum, mut n) = (0.0, 0usize);
    for (e, g) in paired(est, gt)? {
        sum += (e - g) * (e - g);
        n += 1;
    }
    Ok((sum / n as f64).sqrt())
}

/// Percentage of valid pixels with `|est − gt| > delta` (strict).
pub fn bpp(est: &DisparityMap, gt: &DisparityMap, delta: f64) -> Result<f64> {
    let (mut bad, mut n) = (0usize, 0usize);
    for (e, g) in paired(est, gt)? {
        bad += ((e - g).abs() > delta) as usize;
        n += 1;
    }
    Ok(100.0 * bad as f64 / n as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    /// Variables appearing in at least one entry.
    pub nodes: usize,
    /// Distinct off-diagonal pairs, explicit zeros included.
    pub edges: usize,
    /// Degree → number of nodes with that degree.
    pub degree_histogram: BTreeMap<usize, usize>,
    /// `edges / (nodes·(nodes − 1)/2)`, 0 below two nodes.
    pub density: f64,
}

/// Problem-graph statistics of a QUBO as an annealer would see it.
pub fn graph_stats(q: &QuboInstance) -> GraphStats {
    let mut nodes = BTreeSet::new();
    let mut degree = vec![0usize; q.n()];
    let mut edges = 0;
    for (i, j, _) in q.entries() {
        nodes.insert(i);
        nodes.insert(j);
        if i != j {
            edges += 1;
            degree[i] += 1;
            degree[j] += 1;
        }
    }
    let mut degree_histogram = BTreeMap::new();
    for &v in &nodes {
        *degree_histogram.entry(degree[v]).or_insert(0) += 1;
    }
    let n = nodes.len();
    let density = if n < 2 {
        0.0
    } else {
        edges as f64 / (n * (n - 1) / 2) as f64
    };
    GraphStats {
        nodes: n,
        edges,
        degree_histogram,
        density,
    }
}

/// SHA-256 of the configuration's canonical JSON, hex encoded.
pub fn config_hash(cfg: &StereoConfig) -> String {
    hex::encode(Sha256::digest(cfg.canonical_json().as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub rmse: f64,
    pub bpp: f64,
    pub n_valid: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
}

/// RMSE and BPP, optionally ignoring a `crop`-pixel border.
pub fn evaluate(est: &DisparityMap, gt: &DisparityMap, delta: f64, crop: usize) -> Result<Metrics> {
    let gt = if crop > 0 { gt.crop_border(crop) } else { gt.clone() };
    Ok(Metrics {
        rmse: rmse(est, &gt)?,
        bpp: bpp(est, &gt, delta)?,
        n_valid: gt.num_valid(),
        config_hash: None,
        solver: None,
        elapsed_ms: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exact_and_offset_maps() {
        let gt = DisparityMap::dense(3, 2, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(rmse(&gt, &gt).unwrap(), 0.0);
        assert_eq!(bpp(&gt, &gt, 1.0).unwrap(), 0.0);
        let plus1 = gt.map_values(|v| v + 1.0);
        assert_eq!(rmse(&plus1, &gt).unwrap(), 1.0);
        assert_eq!(bpp(&plus1, &gt, 1.0).unwrap(), 0.0);
        assert_eq!(bpp(&gt.map_values(|v| v + 1.5), &gt, 1.0).unwrap(), 100.0);
    }

    #[test]
    fn matches_two_pass_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 400;
        let gv: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..20.0)).collect();
        let ev: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..20.0)).collect();
        let mask: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.8)).collect();
        let gt = DisparityMap::new(20, 20, gv.clone(), mask.clone()).unwrap();
        let est = DisparityMap::dense(20, 20, ev.clone()).unwrap();
        let sq: Vec<f64> = (0..n).filter(|&k| mask[k]).map(|k| (ev[k] - gv[k]).powi(2)).collect();
        let mean = sq.iter().sum::<f64>() / sq.len() as f64;
        let r = rmse(&est, &gt).unwrap();
        assert!((r - mean.sqrt()).abs() < 1e-12);
        assert!((r * r * sq.len() as f64 - sq.iter().sum::<f64>()).abs() < 1e-9);
    }

    #[test]
    fn no_valid_pixels_is_undefined() {
        let gt = DisparityMap::new(1, 1, vec![0.0], vec![false]).unwrap();
        assert!(matches!(rmse(&gt, &gt), Err(Error::Undefined(_))));
        let other = DisparityMap::constant(2, 1, 0.0).unwrap();
        assert!(matches!(bpp(&other, &gt, 1.0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn stats_count_explicit_zeros() {
        let mut q = QuboInstance::new(5);
        q.add(0, 0, -1.0).unwrap();
        q.add(0, 1, 0.0).unwrap();
        q.add(1, 2, 2.0).unwrap();
        let s = graph_stats(&q);
        assert_eq!((s.nodes, s.edges), (3, 2));
        assert_eq!(s.degree_histogram, BTreeMap::from([(1, 2), (2, 1)]));
        assert!((s.density - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn crop_shrinks_region() {
        let gt = DisparityMap::constant(6, 6, 2.0).unwrap();
        let m = evaluate(&gt, &gt, 1.0, 2).unwrap();
        assert_eq!(m.n_valid, 4);
        let json = serde_json::to_string(&m).unwrap();
        assert!(!json.contains("elapsed_ms"));
    }

    #[test]
    fn config_hash_is_hex_sha256() {
        let h = config_hash(&StereoConfig::middlebury());
        assert_eq!(h.len(), 64);
        assert_ne!(h, config_hash(&StereoConfig::sintel()));
    }
}
