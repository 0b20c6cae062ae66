use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::qubo::{Adjacency, QuboInstance};

use super::SolveResult;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaParams {
    pub reads: usize,
    pub sweeps: usize,
    /// `(beta_start, beta_end)`; derived from the instance when absent.
    pub beta_range: Option<(f64, f64)>,
    pub seed: u64,
}

impl Default for SaParams {
    fn default() -> Self {
        Self {
            reads: 500,
            sweeps: 1000,
            beta_range: None,
            seed: 0,
        }
    }
}

/// Inverse-temperature range from single-flip energy scales:
/// `(ln 2 / ΔE_max, ln 100 / ΔE_min)`. `ΔE_max` bounds the largest flip
/// (`|Q_ii| + Σ_j |W_ij|`), `ΔE_min` is the smallest nonzero coefficient.
pub fn auto_beta_range(q: &QuboInstance) -> (f64, f64) {
    let adj = q.adjacency();
    let mut max_flip = 0.0_f64;
    for i in 0..q.n() {
        let (_, w) = adj.row(i);
        max_flip = max_flip.max(adj.linear[i].abs() + w.iter().map(|w| w.abs()).sum::<f64>());
    }
    let min_coeff = q
        .entries()
        .map(|(_, _, w)| w.abs())
        .filter(|&w| w > 0.0)
        .fold(f64::INFINITY, f64::min);
    if max_flip == 0.0 || !min_coeff.is_finite() {
        return (1.0, 1.0);
    }
    (2f64.ln() / max_flip, 100f64.ln() / min_coeff)
}

fn validate(params: &SaParams, q: &QuboInstance) -> Result<(f64, f64)> {
    if params.reads == 0 || params.sweeps == 0 {
        return Err(Error::invalid("simulated annealing needs reads >= 1 and sweeps >= 1"));
    }
    let (b0, b1) = params.beta_range.unwrap_or_else(|| auto_beta_range(q));
    if !(b0 > 0.0 && b0 <= b1 && b1.is_finite()) {
        return Err(Error::invalid(format!("invalid beta schedule ({b0}, {b1})")));
    }
    Ok((b0, b1))
}

fn schedule(b0: f64, b1: f64, sweeps: usize) -> Vec<f64> {
    if sweeps == 1 {
        return vec![b1];
    }
    let ratio = b1 / b0;
    (0..sweeps)
        .map(|k| b0 * ratio.powf(k as f64 / (sweeps - 1) as f64))
        .collect()
}

/// One annealing run. The RNG stream is fixed by `(seed, read)`.
fn anneal_read(adj: &Adjacency, betas: &[f64], seed: u64, read: usize) -> Vec<bool> {
    let n = adj.linear.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(read as u64);
    let mut x: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
    let mut field = adj.fields(&x);
    for &beta in betas {
        for i in 0..n {
            let delta = Adjacency::flip_delta(x[i], field[i]);
            let accept = if delta <= 0.0 {
                true
            } else {
                let z = beta * delta;
                z < 40.0 && rng.gen::<f64>() < (-z).exp()
            };
            if accept {
                let sign = if x[i] { -1.0 } else { 1.0 };
                x[i] = !x[i];
                let (nb, w) = adj.row(i);
                for (&j, &wj) in nb.iter().zip(w) {
                    field[j] += sign * wj;
                }
            }
        }
    }
    x
}

fn collect(q: &QuboInstance, states: Vec<Vec<bool>>, start: Instant) -> SolveResult {
    let samples: Vec<f64> = states.iter().map(|x| q.energy_unchecked(x)).collect();
    let mut best = 0;
    for (k, &e) in samples.iter().enumerate() {
        if e < samples[best] {
            best = k;
        }
    }
    SolveResult {
        best_energy: samples[best],
        best_x: states.into_iter().nth(best).unwrap(),
        samples,
        elapsed: start.elapsed(),
    }
}

/// Metropolis single-flip simulated annealing with a geometric `β` schedule.
/// Reads run in parallel when the `parallel` feature is on; the result does
/// not depend on scheduling.
pub fn solve_sa(q: &QuboInstance, params: &SaParams) -> Result<SolveResult> {
    let (b0, b1) = validate(params, q)?;
    let start = Instant::now();
    let adj = q.adjacency();
    let betas = schedule(b0, b1, params.sweeps);
    let states = par::map_indexed(params.reads, |r| anneal_read(&adj, &betas, params.seed, r));
    Ok(collect(q, states, start))
}

/// [`solve_sa`] with every read on the calling thread.
pub fn solve_sa_seq(q: &QuboInstance, params: &SaParams) -> Result<SolveResult> {
    let (b0, b1) = validate(params, q)?;
    let start = Instant::now();
    let adj = q.adjacency();
    let betas = schedule(b0, b1, params.sweeps);
    let states = par::map_indexed_seq(params.reads, |r| anneal_read(&adj, &betas, params.seed, r));
    Ok(collect(q, states, start))
}
