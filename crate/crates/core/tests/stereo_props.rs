use mrfqubo::eval::{evaluate, rmse};
use mrfqubo::imaging::{median_filter, upscale_disparity, DisparityMap, GrayImage};
use mrfqubo::onehot::{decode, default_epsilon, encode_one_hot};
use mrfqubo::solve::{solve_chain_dp, solve_sa, SaParams};
use mrfqubo::stereo::{
    candidates_at_level, stereo_match, stereo_match_seq, synthetic_line_mrf, SolverConfig, StereoConfig,
};

fn texture(i: f64, j: f64) -> f64 {
    0.5 + 0.25 * (0.9 * i).sin() * (0.4 * j + 1.0).cos() + 0.2 * (0.23 * i + 0.31 * j).sin()
}

/// Left view of a fronto-parallel plane at disparity `d` and its right view.
fn shifted_pair(w: usize, h: usize, d: usize) -> (GrayImage, GrayImage) {
    let left = GrayImage::from_fn(w, h, |i, j| texture(i as f64, j as f64)).unwrap();
    let right = GrayImage::from_fn(w, h, |i, j| texture((i + d) as f64, j as f64)).unwrap();
    (left, right)
}

#[test]
fn sa_reaches_the_line_optimum() {
    for seed in 0..4 {
        let mrf = synthetic_line_mrf(12, 4, seed).unwrap();
        let (_, opt) = solve_chain_dp(&mrf).unwrap();
        let q = encode_one_hot(&mrf, default_epsilon(&mrf), 1.0).unwrap();
        let params = SaParams {
            reads: 50,
            sweeps: 500,
            seed,
            ..SaParams::default()
        };
        let res = solve_sa(&q, &params).unwrap();
        let d = decode(&q, &res.best_x).unwrap();
        assert!(d.all_feasible(), "seed {seed}");
        assert!((mrf.energy(&d.labelling).unwrap() - opt).abs() < 1e-9, "seed {seed}");
    }
}

#[test]
fn every_level_picks_from_its_candidates() {
    let (left, right) = shifted_pair(48, 24, 4);
    let mut cfg = StereoConfig::middlebury();
    cfg.bilateral = None;
    let out = stereo_match(&left, &right, &cfg).unwrap();
    let mut prev: Option<DisparityMap> = None;
    for (level, raw) in out.level_maps.iter().enumerate() {
        let cand = candidates_at_level(level, prev.as_ref(), &cfg, raw.width(), raw.height()).unwrap();
        for j in 0..raw.height() {
            for i in 0..raw.width() {
                let d = raw.get(i, j);
                assert!(cand.at(i, j).iter().any(|&c| c as f64 == d), "level {level} ({i},{j}) = {d}");
            }
        }
        let lc = &cfg.levels[level];
        let full = upscale_disparity(raw, lc.factor, left.width(), left.height()).unwrap();
        prev = Some(median_filter(&full, lc.median).unwrap());
    }
}

#[test]
fn plane_is_recovered_in_full_resolution_units() {
    let (left, right) = shifted_pair(64, 32, 8);
    let mut cfg = StereoConfig::middlebury();
    cfg.bilateral = None;
    let out = stereo_match(&left, &right, &cfg).unwrap();
    let gt = DisparityMap::constant(64, 32, 8.0).unwrap();
    // the right border has no match for the shifted plane
    let m = evaluate(&out.disparity, &gt, 1.0, 12).unwrap();
    assert!(m.rmse < 0.5, "rmse {}", m.rmse);
    assert_eq!(out.levels.len(), 3);
    assert_eq!((out.levels[0].width, out.levels[0].height), (16, 8));
}

#[test]
fn parallel_and_sequential_pipelines_agree() {
    let (left, right) = shifted_pair(40, 20, 4);
    for (solver, rows) in [(SolverConfig::ChainDp, 1), (SolverConfig::Sa { reads: 8, sweeps: 50 }, 2)] {
        let mut cfg = StereoConfig::middlebury();
        cfg.solver = solver;
        cfg.bundle_height = rows;
        cfg.seed = 11;
        let a = stereo_match(&left, &right, &cfg).unwrap();
        let b = stereo_match_seq(&left, &right, &cfg).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn config_round_trips_through_toml() {
    for cfg in [StereoConfig::middlebury(), StereoConfig::sintel()] {
        let back = StereoConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.canonical_json(), cfg.canonical_json());
    }
}

#[test]
fn sidecar_keeps_float_disparities_and_holes() {
    let map = DisparityMap::new(3, 2, vec![0.5, 1.25, 7.0, 0.0, 3.5, 9.75], vec![true, true, true, false, true, true]).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.disp");
    map.save_sidecar(&path).unwrap();
    let back = DisparityMap::load_sidecar(&path).unwrap();
    assert_eq!(back.valid(), map.valid());
    assert_eq!(rmse(&back, &map).unwrap(), 0.0);
}
