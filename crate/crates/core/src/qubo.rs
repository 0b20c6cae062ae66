//! Sparse QUBO instances: minimise `x^T Q x` over binary `x`.
//!
//! `Q` is kept in upper-triangular form. An off-diagonal entry `(i, j)`,
//! `i < j`, holds `Q_ij + Q_ji`, so the energy is
//! `sum_i Q_ii x_i + sum_{i<j} W_ij x_i x_j`.
//!
//! Entries may be explicitly zero: encoders record every interaction their
//! model graph contains, and the problem graph counts those structurally.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mrf::Tokens;

/// What a QUBO variable stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VarRole {
    /// One-hot indicator of `label` at `vertex`.
    OneHot { vertex: usize, label: usize },
    /// Bit `bit` (most significant first) of the binary label code of `vertex`.
    Bit { vertex: usize, bit: usize },
    /// Auxiliary variable introduced by quadratization.
    Aux,
    /// No MRF meaning (e.g. a QUBO read without a sidecar).
    Free,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuboInstance {
    n: usize,
    entries: BTreeMap<(usize, usize), f64>,
    var_meta: Vec<VarRole>,
    offset: f64,
}

/// Sidecar carried next to an exported QUBO file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuboSidecar {
    pub n: usize,
    pub offset: f64,
    pub var_meta: Vec<VarRole>,
}

/// Compressed adjacency used by the solvers.
#[derive(Debug, Clone)]
pub struct Adjacency {
    pub linear: Vec<f64>,
    pub start: Vec<usize>,
    pub neighbour: Vec<usize>,
    pub weight: Vec<f64>,
}

impl Adjacency {
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.start[i], self.start[i + 1]);
        (&self.neighbour[a..b], &self.weight[a..b])
    }

    /// Energy change from flipping bit `i`, given `field[i] = Q_ii + sum_j W_ij x_j`.
    #[inline]
    pub fn flip_delta(x: bool, field: f64) -> f64 {
        if x {
            -field
        } else {
            field
        }
    }

    pub fn fields(&self, x: &[bool]) -> Vec<f64> {
        (0..self.linear.len())
            .map(|i| {
                let (nb, w) = self.row(i);
                self.linear[i]
                    + nb.iter()
                        .zip(w)
                        .filter(|(&j, _)| x[j])
                        .map(|(_, &w)| w)
                        .sum::<f64>()
            })
            .collect()
    }
}

impl QuboInstance {
    /// Empty instance over `n` variables.
    pub fn new(n: usize) -> Self {
        Self {
            n,
            entries: BTreeMap::new(),
            var_meta: vec![VarRole::Free; n],
            offset: 0.0,
        }
    }

    pub fn with_meta(var_meta: Vec<VarRole>) -> Self {
        Self {
            n: var_meta.len(),
            entries: BTreeMap::new(),
            var_meta,
            offset: 0.0,
        }
    }

    /// Builds from a dense (not necessarily symmetric) matrix.
    pub fn from_dense(q: &[Vec<f64>]) -> Result<Self> {
        let n = q.len();
        let mut out = Self::new(n);
        for (i, row) in q.iter().enumerate() {
            if row.len() != n {
                return Err(Error::invalid("dense QUBO matrix must be square"));
            }
            for (j, &w) in row.iter().enumerate() {
                if w != 0.0 {
                    out.add(i, j, w)?;
                }
            }
        }
        Ok(out)
    }

    /// Accumulates `w` onto the canonical `(min, max)` entry, keeping the entry even if it sums to zero.
    pub fn add(&mut self, i: usize, j: usize, w: f64) -> Result<()> {
        if i >= self.n || j >= self.n {
            return Err(Error::invalid(format!("entry ({i}, {j}) outside {} variables", self.n)));
        }
        let key = if i <= j { (i, j) } else { (j, i) };
        *self.entries.entry(key).or_insert(0.0) += w;
        Ok(())
    }

    /// Drops entries that are exactly zero.
    pub fn prune_zeros(&mut self) {
        self.entries.retain(|_, w| *w != 0.0);
    }

    pub fn set_offset(&mut self, offset: f64) {
        self.offset = offset;
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn var_meta(&self) -> &[VarRole] {
        &self.var_meta
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.entries.iter().map(|(&(i, j), &w)| (i, j, w))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let key = if i <= j { (i, j) } else { (j, i) };
        self.entries.get(&key).copied().unwrap_or(0.0)
    }

    pub fn num_entries(&self) -> usize {
        self.entries.len()
    }

    pub fn off_diagonal(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.entries().filter(|&(i, j, _)| i != j)
    }

    /// `x^T Q x`, without the offset.
    pub fn energy(&self, x: &[bool]) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::invalid(format!(
                "bitstring has {} bits for {} variables",
                x.len(),
                self.n
            )));
        }
        Ok(self.energy_unchecked(x))
    }

    pub(crate) fn energy_unchecked(&self, x: &[bool]) -> f64 {
        self.entries
            .iter()
            .filter(|(&(i, j), _)| x[i] && x[j])
            .map(|(_, &w)| w)
            .sum()
    }

    pub fn adjacency(&self) -> Adjacency {
        let mut linear = vec![0.0; self.n];
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.n];
        for (i, j, w) in self.entries() {
            if i == j {
                linear[i] += w;
            } else {
                rows[i].push((j, w));
                rows[j].push((i, w));
            }
        }
        let mut start = Vec::with_capacity(self.n + 1);
        let mut neighbour = Vec::new();
        let mut weight = Vec::new();
        start.push(0);
        for row in rows {
            for (j, w) in row {
                neighbour.push(j);
                weight.push(w);
            }
            start.push(neighbour.len());
        }
        Adjacency {
            linear,
            start,
            neighbour,
            weight,
        }
    }

    pub fn sidecar(&self) -> QuboSidecar {
        QuboSidecar {
            n: self.n,
            offset: self.offset,
            var_meta: self.var_meta.clone(),
        }
    }

    pub fn apply_sidecar(&mut self, sidecar: QuboSidecar) -> Result<()> {
        if sidecar.n != self.n || sidecar.var_meta.len() != self.n {
            return Err(Error::invalid(format!(
                "sidecar describes {} variables, QUBO has {}",
                sidecar.n, self.n
            )));
        }
        self.offset = sidecar.offset;
        self.var_meta = sidecar.var_meta;
        Ok(())
    }

    /// Sparse text export: `p qubo 0 <maxnode> <ndiag> <noffdiag>`, diagonal lines, then couplers.
    pub fn to_qubo_text(&self) -> String {
        let diag: Vec<_> = self.entries().filter(|&(i, j, _)| i == j).collect();
        let off: Vec<_> = self.off_diagonal().collect();
        let mut out = String::new();
        let _ = writeln!(out, "p qubo 0 {} {} {}", self.n, diag.len(), off.len());
        for (i, j, w) in diag.into_iter().chain(off) {
            let _ = writeln!(out, "{i} {j} {w}");
        }
        out
    }

    pub fn from_qubo_text(text: &str) -> Result<Self> {
        // `c` lines are comments in this format
        let cleaned: String = text
            .lines()
            .map(|l| if l.trim_start().starts_with('c') { "" } else { l })
            .collect::<Vec<_>>()
            .join("\n");
        let mut tokens = Tokens::new(&cleaned);
        tokens.expect_word("p")?;
        tokens.expect_word("qubo")?;
        let _topology = tokens.next_usize()?;
        let n = tokens.next_usize()?;
        let ndiag = tokens.next_usize()?;
        let noff = tokens.next_usize()?;
        let mut q = Self::new(n);
        for k in 0..ndiag + noff {
            let (off, i) = tokens.next_usize_at()?;
            let j = tokens.next_usize()?;
            let w = tokens.next_f64()?;
            if i >= n || j >= n {
                return Err(Error::parse(off, format!("entry ({i}, {j}) outside {n} variables")));
            }
            if (k < ndiag) != (i == j) {
                return Err(Error::parse(off, "diagonal and coupler sections out of order"));
            }
            if i > j {
                return Err(Error::parse(off, "coupler lines need i < j"));
            }
            q.add(i, j, w)?;
        }
        if let Some((off, tok)) = tokens.next_token() {
            return Err(Error::parse(off, format!("trailing token '{tok}'")));
        }
        Ok(q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_symmetrises() {
        let q = QuboInstance::from_dense(&[vec![1.0, 2.0], vec![3.0, -1.0]]).unwrap();
        assert_eq!(q.get(0, 1), 5.0);
        assert_eq!(q.energy(&[true, true]).unwrap(), 5.0);
        assert!(q.energy(&[true]).is_err());
    }

    #[test]
    fn text_round_trip_keeps_zeros() {
        let mut q = QuboInstance::new(3);
        q.add(0, 0, 0.25).unwrap();
        q.add(2, 1, -1.5).unwrap();
        q.add(0, 2, 0.0).unwrap();
        let text = q.to_qubo_text();
        assert!(text.starts_with("p qubo 0 3 1 2\n"));
        let back = QuboInstance::from_qubo_text(&text).unwrap();
        assert_eq!(back, q);
    }

    #[test]
    fn text_rejects_bad_input() {
        assert!(QuboInstance::from_qubo_text("p qubo 0 2 1 0\n0 1 1.0\n").is_err());
        assert!(QuboInstance::from_qubo_text("p qubo 0 2 1 0\n").is_err());
        assert!(QuboInstance::from_qubo_text("c comment\np qubo 0 2 1 0\n1 1 2\n").is_ok());
    }

    #[test]
    fn fields_match_energy_deltas() {
        let q = QuboInstance::from_dense(&[
            vec![1.0, -2.0, 0.5],
            vec![0.0, 0.3, 1.0],
            vec![0.0, 0.0, -0.7],
        ])
        .unwrap();
        let adj = q.adjacency();
        let x = [true, false, true];
        let f = adj.fields(&x);
        for i in 0..3 {
            let mut y = x;
            y[i] = !y[i];
            let d = q.energy(&y).unwrap() - q.energy(&x).unwrap();
            assert!((Adjacency::flip_delta(x[i], f[i]) - d).abs() < 1e-12);
        }
    }
}
