//! QUBO and MRF solvers sharing one result type.

mod chain_dp;
mod exhaustive;
mod ising;
mod sa;

use std::time::Duration;

use serde::{Deserialize, Serialize};

pub use chain_dp::{path_components, solve_chain_dp};
pub use exhaustive::{solve_exhaustive, EXHAUSTIVE_LIMIT};
pub use ising::{qubo_to_ising, IsingModel};
pub use sa::{auto_beta_range, solve_sa, solve_sa_seq, SaParams};

/// Outcome of a QUBO solve. Energies exclude the instance offset.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub best_x: Vec<bool>,
    pub best_energy: f64,
    /// One energy per read.
    pub samples: Vec<f64>,
    pub elapsed: Duration,
}

/// JSON form of a [`SolveResult`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub solver: String,
    pub n: usize,
    pub best_energy: f64,
    /// `best_energy` plus the instance offset.
    pub offset_energy: f64,
    /// Bit `i` of the string is bit `i mod 4` of hex digit `i / 4` (little-endian nibbles).
    pub best_x_hex: String,
    pub energies: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
}

impl SolveResult {
    pub fn report(&self, solver: &str, offset: f64, with_timing: bool) -> SolveReport {
        SolveReport {
            solver: solver.to_string(),
            n: self.best_x.len(),
            best_energy: self.best_energy,
            offset_energy: self.best_energy + offset,
            best_x_hex: bits_to_hex(&self.best_x),
            energies: self.samples.clone(),
            elapsed_ms: with_timing.then(|| self.elapsed.as_secs_f64() * 1e3),
        }
    }
}

pub fn bits_to_hex(bits: &[bool]) -> String {
    bits.chunks(4)
        .map(|nib| {
            let v = nib
                .iter()
                .enumerate()
                .fold(0u32, |acc, (i, &b)| acc | (b as u32) << i);
            char::from_digit(v, 16).unwrap()
        })
        .collect()
}

pub fn hex_to_bits(hex: &str, n: usize) -> Option<Vec<bool>> {
    let mut bits = Vec::with_capacity(hex.len() * 4);
    for c in hex.chars() {
        let v = c.to_digit(16)?;
        bits.extend((0..4).map(|i| v >> i & 1 == 1));
    }
    if bits.len() < n || bits[n..].iter().any(|&b| b) {
        return None;
    }
    bits.truncate(n);
    Some(bits)
}
