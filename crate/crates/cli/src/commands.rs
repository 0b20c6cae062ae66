use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use mrfqubo::eval::{config_hash, evaluate, graph_stats, Metrics};
use mrfqubo::imaging::{DisparityMap, GrayImage, SIDECAR_MAGIC};
use mrfqubo::mrf::{Labelling, MarkovRandomField};
use mrfqubo::onehot::{decode, encode_one_hot, EpsilonRule};
use mrfqubo::pbo::{decode_binary, encode_binary, pbo_to_qubo, quadratize};
use mrfqubo::qubo::{QuboInstance, QuboSidecar, VarRole};
use mrfqubo::solve::{solve_chain_dp, solve_exhaustive, solve_sa, SaParams, SolveReport};
use mrfqubo::stereo::{
    load_middlebury, stereo_match, synthetic_line_mrf, synthetic_scene, LevelReport, Regularizer, SolverConfig,
    StereoConfig, StereoPair, SYNTHETIC_SCENES,
};

use crate::args::*;
use crate::Failure;

type CmdResult = Result<(), Failure>;

fn sidecar_path(qubo: &Path) -> PathBuf {
    let mut s = qubo.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn write_json(path: &Path, value: &impl Serialize) -> CmdResult {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn print_json(value: &impl Serialize) -> CmdResult {
    let text = serde_json::to_string_pretty(value)?;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn read_mrf(path: &Path) -> Result<MarkovRandomField, Failure> {
    Ok(MarkovRandomField::from_text(&std::fs::read_to_string(path)?)?)
}

fn read_qubo(path: &Path) -> Result<QuboInstance, Failure> {
    let mut q = QuboInstance::from_qubo_text(&std::fs::read_to_string(path)?)?;
    let side = sidecar_path(path);
    if side.exists() {
        let sidecar: QuboSidecar = serde_json::from_str(&std::fs::read_to_string(&side)?)?;
        q.apply_sidecar(sidecar)?;
    }
    Ok(q)
}

fn parse_line_spec(spec: &str) -> Result<(usize, usize), Failure> {
    let bad = || Failure::usage(format!("--stereo-line expects WIDTHxLABELS, got '{spec}'"));
    let (w, d) = spec.split_once('x').ok_or_else(bad)?;
    Ok((w.parse().map_err(|_| bad())?, d.parse().map_err(|_| bad())?))
}

pub fn encode(a: EncodeArgs) -> CmdResult {
    let mrf = match (&a.mrf, &a.stereo_line) {
        (Some(path), _) => read_mrf(path)?,
        (None, Some(spec)) => {
            let (w, d) = parse_line_spec(spec)?;
            synthetic_line_mrf(w, d, a.seed)?
        }
        (None, None) => return Err(Failure::usage("one of --mrf or --stereo-line is required")),
    };
    if let Some(path) = &a.mrf_out {
        std::fs::write(path, mrf.to_text())?;
    }
    let q = match a.scheme {
        Scheme::Onehot => {
            let eps = EpsilonRule::parse(&a.epsilon_rule)?.resolve(&mrf);
            encode_one_hot(&mrf, eps, a.t)?
        }
        Scheme::Binary => pbo_to_qubo(&quadratize(&encode_binary(&mrf)?))?,
    };
    std::fs::write(&a.out, q.to_qubo_text())?;
    write_json(&sidecar_path(&a.out), &q.sidecar())?;
    Ok(())
}

#[derive(Serialize)]
struct MrfReport {
    labelling: Vec<usize>,
    mrf_energy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    feasible: Option<bool>,
}

#[derive(Serialize)]
struct SolveOutput {
    #[serde(flatten)]
    qubo: Option<SolveReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mrf: Option<MrfReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    elapsed_ms: Option<f64>,
}

/// MRF-level view of a QUBO answer, by the encoding named in the metadata.
fn mrf_view(mrf: &MarkovRandomField, q: &QuboInstance, x: &[bool]) -> Result<MrfReport, Failure> {
    let onehot = q.var_meta().iter().all(|r| matches!(r, VarRole::OneHot { .. }));
    let (lab, feasible) = if onehot {
        let d = decode(q, x)?;
        let f = d.all_feasible();
        (d.labelling, Some(f))
    } else if q.var_meta().iter().any(|r| matches!(r, VarRole::Bit { .. })) {
        (decode_binary(mrf, x)?, None)
    } else {
        return Err(Failure::usage("QUBO has no variable metadata; keep its .json sidecar next to it"));
    };
    Ok(MrfReport {
        mrf_energy: mrf.energy(&lab)?,
        labelling: lab.0,
        feasible,
    })
}

pub fn solve(a: SolveArgs) -> CmdResult {
    let mrf = a.mrf.as_deref().map(read_mrf).transpose()?;
    let start = Instant::now();
    let output = if a.solver == SolverId::ChainDp {
        let mrf = mrf.ok_or_else(|| Failure::usage("chain-dp solves the MRF directly; pass --mrf"))?;
        let (lab, energy): (Labelling, f64) = solve_chain_dp(&mrf)?;
        let elapsed = start.elapsed();
        SolveOutput {
            qubo: None,
            mrf: Some(MrfReport {
                labelling: lab.0,
                mrf_energy: energy,
                feasible: None,
            }),
            elapsed_ms: a.timing.then(|| elapsed.as_secs_f64() * 1e3),
        }
    } else {
        let path = a.qubo.as_deref().ok_or_else(|| Failure::usage("--qubo is required for this solver"))?;
        let q = read_qubo(path)?;
        let result = match a.solver {
            SolverId::Exhaustive => solve_exhaustive(&q)?,
            _ => {
                let params = SaParams {
                    reads: a.reads,
                    sweeps: a.sweeps,
                    beta_range: a.beta_start.zip(a.beta_end),
                    seed: a.seed,
                };
                solve_sa(&q, &params)?
            }
        };
        let name = if a.solver == SolverId::Sa { "sa" } else { "exhaustive" };
        let mrf_report = mrf.as_ref().map(|m| mrf_view(m, &q, &result.best_x)).transpose()?;
        SolveOutput {
            qubo: Some(result.report(name, q.offset(), a.timing)),
            mrf: mrf_report,
            elapsed_ms: None,
        }
    };
    write_json(&a.out, &output)
}

fn base_config(p: &PipelineArgs) -> Result<StereoConfig, Failure> {
    let mut cfg = match &p.config {
        Some(path) => StereoConfig::load(path)?,
        None => match p.preset {
            Preset::Middlebury => StereoConfig::middlebury(),
            Preset::Sintel => StereoConfig::sintel(),
        },
    };
    if let Some(s) = p.solver {
        cfg.solver = match s {
            SolverId::ChainDp => SolverConfig::ChainDp,
            SolverId::Exhaustive => SolverConfig::Exhaustive,
            SolverId::Sa => SolverConfig::from_id("sa")?,
        };
    }
    if let SolverConfig::Sa { reads, sweeps } = &mut cfg.solver {
        *reads = p.reads.unwrap_or(*reads);
        *sweeps = p.sweeps.unwrap_or(*sweeps);
    } else if p.reads.is_some() || p.sweeps.is_some() {
        return Err(Failure::usage("--reads/--sweeps only apply to the sa solver"));
    }
    if let Some(t) = p.t {
        cfg.rectifier.t = t;
    }
    if let Some(seed) = p.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn load_estimate(path: &Path, scale: f64) -> Result<DisparityMap, Failure> {
    let bytes = std::fs::read(path)?;
    if bytes.starts_with(SIDECAR_MAGIC) {
        return Ok(DisparityMap::from_sidecar_bytes(&bytes)?);
    }
    let raw = mrfqubo::imaging::parse_pnm(&bytes)?;
    Ok(DisparityMap::from_raw(&raw, scale, false)?)
}

#[derive(Serialize)]
struct EnergyLog<'a> {
    config_hash: String,
    levels: &'a [LevelReport],
}

pub fn stereo(a: StereoArgs) -> CmdResult {
    let cfg = base_config(&a.pipeline)?;
    let (left, right, mut gt) = match &a.synthetic {
        Some(name) => {
            let p = synthetic_scene(name)?;
            (p.left, p.right, Some(p.ground_truth))
        }
        None => {
            let (l, r) = (a.left.as_deref().unwrap(), a.right.as_deref().unwrap());
            (GrayImage::load(l)?, GrayImage::load(r)?, None)
        }
    };
    if let Some(path) = &a.gt {
        gt = Some(DisparityMap::load_pgm(path, a.gt_scale, true)?);
    }
    let start = Instant::now();
    let out = stereo_match(&left, &right, &cfg)?;
    let elapsed = start.elapsed();
    out.disparity.save_pgm(&a.out, a.scale)?;
    let sidecar = a.sidecar.clone().unwrap_or_else(|| {
        let mut s = a.out.as_os_str().to_owned();
        s.push(".disp");
        PathBuf::from(s)
    });
    out.disparity.save_sidecar(&sidecar)?;
    let hash = config_hash(&cfg);
    if let Some(path) = &a.energy_log {
        write_json(
            path,
            &EnergyLog {
                config_hash: hash.clone(),
                levels: &out.levels,
            },
        )?;
    }
    if let Some(gt) = gt {
        let mut m = evaluate(&out.disparity, &gt, a.delta, 0)?;
        m.config_hash = Some(hash);
        m.solver = Some(cfg.solver.id().to_string());
        m.elapsed_ms = a.timing.then(|| elapsed.as_secs_f64() * 1e3);
        match &a.metrics {
            Some(path) => write_json(path, &m)?,
            None => print_json(&m)?,
        }
    }
    Ok(())
}

pub fn eval(a: EvalArgs) -> CmdResult {
    let est = load_estimate(&a.est, a.est_scale)?;
    let gt = DisparityMap::load_pgm(&a.gt, a.scale, true)?;
    let m: Metrics = evaluate(&est, &gt, a.delta, a.crop)?;
    print_json(&m)
}

pub fn stats(a: StatsArgs) -> CmdResult {
    let q = read_qubo(&a.qubo)?;
    print_json(&graph_stats(&q))
}

fn ablation_variants(which: Ablation, grid: &[String], base: &StereoConfig) -> Result<Vec<(String, StereoConfig)>, Failure> {
    grid.iter()
        .map(|setting| {
            let mut cfg = base.clone();
            let bad = || Failure::usage(format!("invalid {which:?} setting '{setting}'"));
            match which {
                Ablation::Regularizer => {
                    cfg.regularizer = match setting.as_str() {
                        "truncated" => Regularizer::Truncated,
                        "linear" => Regularizer::Linear,
                        "none" => Regularizer::None,
                        _ => return Err(bad()),
                    }
                }
                Ablation::Filters => {
                    let (median, bilateral) = match setting.as_str() {
                        "all" => (true, true),
                        "median" => (true, false),
                        "bilateral" => (false, true),
                        "none" => (false, false),
                        _ => return Err(bad()),
                    };
                    cfg.median_enabled = median;
                    if !bilateral {
                        cfg.bilateral = None;
                    }
                }
                Ablation::Levels => {
                    let k: usize = setting.parse().map_err(|_| bad())?;
                    if k == 0 || k > cfg.levels.len() {
                        return Err(bad());
                    }
                    cfg.levels.drain(..cfg.levels.len() - k);
                }
                Ablation::T => {
                    if cfg.solver == SolverConfig::ChainDp {
                        return Err(Failure::usage("the t sweep needs a QUBO solver (--solver sa or exhaustive)"));
                    }
                    cfg.rectifier.t = setting.parse().map_err(|_| bad())?;
                }
            }
            cfg.validate()?;
            Ok((setting.clone(), cfg))
        })
        .collect()
}

#[derive(Serialize)]
struct AblationRow<'a> {
    which: &'a str,
    setting: &'a str,
    scene: &'a str,
    rmse: f64,
    bpp: f64,
}

pub fn ablate(a: AblateArgs) -> CmdResult {
    let base = base_config(&a.pipeline)?;
    let variants = ablation_variants(a.which, &a.grid, &base)?;
    let pairs: Vec<StereoPair> = match &a.middlebury {
        Some(root) => {
            let names: Vec<&str> = if a.scenes.is_empty() {
                mrfqubo::stereo::MIDDLEBURY_SCENES.to_vec()
            } else {
                a.scenes.iter().map(String::as_str).collect()
            };
            names.iter().map(|n| load_middlebury(root, n)).collect::<Result<_, _>>()?
        }
        None => {
            let names: Vec<&str> = if a.scenes.is_empty() {
                SYNTHETIC_SCENES.to_vec()
            } else {
                a.scenes.iter().map(String::as_str).collect()
            };
            names.iter().map(|n| synthetic_scene(n)).collect::<Result<_, _>>()?
        }
    };
    let which = format!("{:?}", a.which).to_lowercase();
    let sink: Box<dyn Write> = match &a.out {
        Some(path) => Box::new(std::fs::File::create(path)?),
        None => Box::new(std::io::stdout()),
    };
    let mut w = csv::Writer::from_writer(sink);
    for (setting, cfg) in &variants {
        let (mut sum_rmse, mut sum_bpp) = (0.0, 0.0);
        for p in &pairs {
            let out = stereo_match(&p.left, &p.right, cfg)?;
            let m = evaluate(&out.disparity, &p.ground_truth, a.delta, 0)?;
            sum_rmse += m.rmse;
            sum_bpp += m.bpp;
            w.serialize(AblationRow {
                which: &which,
                setting,
                scene: &p.name,
                rmse: m.rmse,
                bpp: m.bpp,
            })?;
        }
        let n = pairs.len() as f64;
        w.serialize(AblationRow {
            which: &which,
            setting,
            scene: "mean",
            rmse: sum_rmse / n,
            bpp: sum_bpp / n,
        })?;
    }
    w.flush()?;
    Ok(())
}
