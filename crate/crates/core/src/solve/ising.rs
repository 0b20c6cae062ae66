use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qubo::QuboInstance;

/// `E(s) = Σ h_i s_i + Σ_{i<j} J_ij s_i s_j + offset` over spins `s ∈ {-1, +1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingModel {
    pub h: Vec<f64>,
    /// Couplings keyed `(i, j)` with `i < j`.
    pub j: BTreeMap<(usize, usize), f64>,
    pub offset: f64,
}

impl IsingModel {
    pub fn energy(&self, s: &[i8]) -> Result<f64> {
        if s.len() != self.h.len() {
            return Err(Error::invalid(format!(
                "spin vector has length {}, model has {} spins",
                s.len(),
                self.h.len()
            )));
        }
        if s.iter().any(|&v| v != 1 && v != -1) {
            return Err(Error::invalid("spins must be -1 or +1"));
        }
        let mut e = self.offset;
        for (hi, &si) in self.h.iter().zip(s) {
            e += hi * si as f64;
        }
        for (&(a, b), &w) in &self.j {
            e += w * (s[a] * s[b]) as f64;
        }
        Ok(e)
    }
}

/// Maps `x_i = (1 + s_i) / 2`. The result includes the QUBO offset, so
/// `ising.energy(s) == qubo.energy(x) + qubo.offset()`.
pub fn qubo_to_ising(q: &QuboInstance) -> IsingModel {
    let mut h = vec![0.0; q.n()];
    let mut j = BTreeMap::new();
    let mut offset = q.offset();
    for (a, b, w) in q.entries() {
        if a == b {
            h[a] += w / 2.0;
            offset += w / 2.0;
        } else {
            let key = (a.min(b), a.max(b));
            *j.entry(key).or_insert(0.0) += w / 4.0;
            h[a] += w / 4.0;
            h[b] += w / 4.0;
            offset += w / 4.0;
        }
    }
    IsingModel { h, j, offset }
}
