use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::BilateralParams;
use crate::onehot::EpsilonRule;

/// Settings for one pyramid level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelConfig {
    /// Resolution factor `r` relative to the input (`1, 1/2, …, 1/32`).
    pub factor: f64,
    /// Candidate disparities per pixel.
    pub labels: usize,
    /// Intensity-edge threshold on `|ΔI|`, in `[0, 1]` units.
    pub tau: f64,
    /// Divisor applied to the regularizer across intensity edges.
    pub q: f64,
    /// Truncation cap; may be infinite.
    pub m: f64,
    /// Regularizer slope per disparity unit.
    pub s: f64,
    /// Median window applied after this level (1 disables).
    pub median: usize,
}

/// Shape of the pairwise disparity regularizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regularizer {
    /// `min(m, s·|Δd|)`, divided by `q` across edges.
    #[default]
    Truncated,
    /// `s·|Δd|`, divided by `q` across edges.
    Linear,
    /// No smoothness term.
    None,
}

/// Per-bundle MAP backend.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "kebab-case")]
pub enum SolverConfig {
    /// Exact dynamic programming on the MRF (bundle height 1 only).
    ChainDp,
    /// One-hot QUBO solved by enumeration.
    Exhaustive,
    /// One-hot QUBO solved by simulated annealing.
    Sa {
        #[serde(default = "default_reads")]
        reads: usize,
        #[serde(default = "default_sweeps")]
        sweeps: usize,
    },
}

fn default_reads() -> usize {
    500
}

fn default_sweeps() -> usize {
    1000
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig::ChainDp
    }
}

impl SolverConfig {
    pub fn id(&self) -> &'static str {
        match self {
            SolverConfig::ChainDp => "chain-dp",
            SolverConfig::Exhaustive => "exhaustive",
            SolverConfig::Sa { .. } => "sa",
        }
    }

    /// Parses a backend id with default parameters.
    pub fn from_id(id: &str) -> Result<Self> {
        match id {
            "chain-dp" => Ok(SolverConfig::ChainDp),
            "exhaustive" => Ok(SolverConfig::Exhaustive),
            "sa" => Ok(SolverConfig::Sa {
                reads: default_reads(),
                sweeps: default_sweeps(),
            }),
            _ => Err(Error::invalid(format!("unknown solver '{id}'"))),
        }
    }
}

/// Rectifier settings for the QUBO backends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RectifierConfig {
    #[serde(default)]
    pub epsilon: EpsilonRule,
    #[serde(default = "default_t")]
    pub t: f64,
}

fn default_t() -> f64 {
    1.0
}

impl Default for RectifierConfig {
    fn default() -> Self {
        Self {
            epsilon: EpsilonRule::default(),
            t: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StereoConfig {
    pub levels: Vec<LevelConfig>,
    #[serde(default = "default_bundle_height")]
    pub bundle_height: usize,
    /// Final-level bilateral filter; absent disables it.
    #[serde(default)]
    pub bilateral: Option<BilateralParams>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub rectifier: RectifierConfig,
    #[serde(default)]
    pub regularizer: Regularizer,
    /// Master switch for the per-level median filters.
    #[serde(default = "default_true")]
    pub median_enabled: bool,
    #[serde(default)]
    pub seed: u64,
}

fn default_bundle_height() -> usize {
    1
}

fn default_true() -> bool {
    true
}

impl StereoConfig {
    /// Three-level Middlebury setting (factors 1/4, 1/2, 1).
    pub fn middlebury() -> Self {
        let level = |factor, labels, tau, m, s| LevelConfig {
            factor,
            labels,
            tau,
            q: 10.0,
            m,
            s,
            median: 7,
        };
        Self {
            levels: vec![
                level(0.25, 6, 0.15, 0.0015, 0.0005),
                level(0.5, 4, 0.15, 0.0015, 0.0003),
                level(1.0, 4, 0.3, f64::INFINITY, 0.0005),
            ],
            bundle_height: 1,
            bilateral: Some(BilateralParams::default()),
            solver: SolverConfig::ChainDp,
            rectifier: RectifierConfig::default(),
            regularizer: Regularizer::Truncated,
            median_enabled: true,
            seed: 0,
        }
    }

    /// Six-level Sintel setting (factors 1/32 … 1).
    pub fn sintel() -> Self {
        let levels = (0..6)
            .map(|k| LevelConfig {
                factor: 1.0 / (1u32 << (5 - k)) as f64,
                labels: if k < 3 { 6 } else { 4 },
                tau: if k == 5 { 0.3 } else { 0.15 },
                q: 10.0,
                m: if k == 5 { f64::INFINITY } else { 0.0015 },
                s: if k == 4 { 0.0003 } else { 0.0005 },
                median: if k == 5 { 7 } else { 3 },
            })
            .collect();
        Self {
            levels,
            ..Self::middlebury()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels.is_empty() {
            return Err(Error::invalid("stereo config needs at least one level"));
        }
        if self.bundle_height == 0 {
            return Err(Error::invalid("bundle_height must be at least 1"));
        }
        for (k, l) in self.levels.iter().enumerate() {
            let pow2 = (0..=5).any(|e| (l.factor * (1u32 << e) as f64 - 1.0).abs() < 1e-12);
            let bad = if !pow2 {
                Some("factor must be one of 1, 1/2, …, 1/32")
            } else if k > 0 && l.factor <= self.levels[k - 1].factor {
                Some("factors must be strictly ascending")
            } else if l.labels < 2 {
                Some("labels must be at least 2")
            } else if !(l.tau >= 0.0) {
                Some("tau must be non-negative")
            } else if !(l.q > 0.0 && l.q.is_finite()) {
                Some("q must be positive")
            } else if !(l.m > 0.0) {
                Some("m must be positive")
            } else if !(l.s >= 0.0 && l.s.is_finite()) {
                Some("s must be non-negative")
            } else if l.median == 0 || l.median % 2 == 0 {
                Some("median window must be odd")
            } else {
                None
            };
            if let Some(msg) = bad {
                return Err(Error::invalid(format!("level {k}: {msg}")));
            }
        }
        if (self.levels.last().unwrap().factor - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("the last level must be at full resolution"));
        }
        if !(self.rectifier.t > 0.0 && self.rectifier.t.is_finite()) {
            return Err(Error::invalid("rectifier t must be positive"));
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| {
            let offset = e.span().map_or(0, |s| s.start);
            Error::parse(offset, e.message().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Canonical JSON, used for hashing.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(&CanonicalConfig::from(self)).expect("config serializes")
    }
}

/// JSON cannot hold infinities; this mirror writes them as strings.
#[derive(Serialize)]
struct CanonicalConfig {
    levels: Vec<serde_json::Value>,
    rest: serde_json::Value,
}

impl From<&StereoConfig> for CanonicalConfig {
    fn from(c: &StereoConfig) -> Self {
        let num = |v: f64| {
            if v.is_finite() {
                serde_json::json!(v)
            } else {
                serde_json::json!(v.to_string())
            }
        };
        let levels = c
            .levels
            .iter()
            .map(|l| {
                serde_json::json!({
                    "factor": l.factor, "labels": l.labels, "tau": l.tau, "q": l.q,
                    "m": num(l.m), "s": l.s, "median": l.median,
                })
            })
            .collect();
        let bilateral = c.bilateral.map(|b| {
            serde_json::json!({
                "diameter": b.diameter, "sigma_color": num(b.sigma_color),
                "sigma_space": num(b.sigma_space), "value_scale": b.value_scale,
            })
        });
        let rest = serde_json::json!({
            "bundle_height": c.bundle_height,
            "bilateral": bilateral,
            "solver": c.solver,
            "rectifier": c.rectifier,
            "regularizer": c.regularizer,
            "median_enabled": c.median_enabled,
            "seed": c.seed,
        });
        Self { levels, rest }
    }
}
