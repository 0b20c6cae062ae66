//! Coarse-to-fine stereo matching: per-level energy construction, candidate
//! disparities, bundle MRFs and the level driver.

mod candidates;
mod config;
mod data;
mod energy;
mod pipeline;

pub use candidates::{candidates_at_level, CandidateSet};
pub use config::{LevelConfig, RectifierConfig, Regularizer, SolverConfig, StereoConfig};
pub use data::{
    load_middlebury, middlebury_dir, middlebury_files, synthetic_line_mrf, synthetic_scene, StereoPair, MIDDLEBURY_SCENES,
    SYNTHETIC_SCENES,
};
pub use energy::{build_bundle_mrf, data_term, smoothness_cost, smoothness_term, OUT_OF_RANGE_PENALTY};
pub use pipeline::{
    bundle_seed, solve_bundle_mrf, stereo_match, stereo_match_seq, BundleReport, LevelReport, StereoOutput,
};
