use std::time::Instant;

use crate::error::{Error, Result};
use crate::qubo::{Adjacency, QuboInstance};

use super::SolveResult;

/// Largest instance the exhaustive solver accepts.
pub const EXHAUSTIVE_LIMIT: usize = 24;

/// Enumerates all `2^n` bitstrings in Gray-code order with incremental
/// energy updates. Ties go to the lexicographically smallest bitstring
/// (`x_0` most significant, `false < true`).
pub fn solve_exhaustive(q: &QuboInstance) -> Result<SolveResult> {
    let n = q.n();
    if n > EXHAUSTIVE_LIMIT {
        return Err(Error::Capacity(format!(
            "exhaustive search over {n} variables exceeds the limit of {EXHAUSTIVE_LIMIT}"
        )));
    }
    let start = Instant::now();
    let adj = q.adjacency();
    let scale = adj
        .linear
        .iter()
        .chain(&adj.weight)
        .fold(1.0_f64, |acc, w| acc.max(w.abs()));
    // incremental sums drift; anything this close counts as a tie
    let tol = 1e-9 * scale;

    let mut x = vec![false; n];
    let mut field = adj.linear.clone();
    let mut energy = 0.0;
    let mut best_mask = 0u32;
    let mut best_energy = 0.0;
    let mut mask = 0u32;
    for k in 1u64..(1u64 << n) {
        let i = k.trailing_zeros() as usize;
        energy += Adjacency::flip_delta(x[i], field[i]);
        let sign = if x[i] { -1.0 } else { 1.0 };
        x[i] = !x[i];
        mask ^= 1 << i;
        let (nb, w) = adj.row(i);
        for (&j, &wj) in nb.iter().zip(w) {
            field[j] += sign * wj;
        }
        if energy < best_energy - tol
            || (energy <= best_energy + tol && lex_less(mask, best_mask, n))
        {
            best_energy = energy;
            best_mask = mask;
        }
    }
    let best_x: Vec<bool> = (0..n).map(|i| best_mask >> i & 1 == 1).collect();
    let best_energy = q.energy_unchecked(&best_x);
    Ok(SolveResult {
        best_x,
        best_energy,
        samples: vec![best_energy],
        elapsed: start.elapsed(),
    })
}

/// Lexicographic comparison with bit 0 as the leading position.
fn lex_less(a: u32, b: u32, n: usize) -> bool {
    let diff = a ^ b;
    if diff == 0 {
        return false;
    }
    let first = diff.trailing_zeros() as usize;
    debug_assert!(first < n);
    a >> first & 1 == 0
}
