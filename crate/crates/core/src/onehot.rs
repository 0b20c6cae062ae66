//! One-hot QUBO encoding of MRF MAP inference with per-label-pair rectifiers.
//!
//! Each `(vertex, label)` pair gets one binary variable. Rectifier weights
//! `Λ` on the diagonal and between labels of the same vertex make the
//! unconstrained minimiser pick exactly one label per vertex, while keeping
//! the penalties as small as the potentials allow:
//!
//! * `γ(r, e)   = max_s φ_e(r, s)` for each incident edge `e`
//! * `χ(p)      = max(0, min_r [φ_p(r) + Σ_e max(0, γ(r, e))] + ε)`
//! * `ζ(r)      = Σ_e Σ_s min(0, φ_e(r, s))`
//! * `Θ(r, s)   = min(0, φ_p(r) + ζ(r) − ε, φ_p(s) + ζ(s) − ε)`
//! * `Λ(r, r)   = χ(p)`, `Λ(r, s) = (χ(p) − Θ(r, s)) / 2`
//!
//! For a one-hot feasible `x` the QUBO energy plus `t · Σ_p χ(p)` equals the
//! MRF energy of the decoded labelling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mrf::{Labelling, MarkovRandomField};
use crate::qubo::{QuboInstance, VarRole};

/// How the strict-margin constant `ε` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", content = "value", rename_all = "snake_case")]
pub enum EpsilonRule {
    /// `factor · max(1, max |potential|)`.
    Relative(f64),
    Absolute(f64),
}

impl Default for EpsilonRule {
    fn default() -> Self {
        EpsilonRule::Relative(1e-6)
    }
}

impl EpsilonRule {
    pub fn resolve(&self, mrf: &MarkovRandomField) -> f64 {
        match *self {
            EpsilonRule::Relative(f) => f * mrf.max_abs_potential().max(1.0),
            EpsilonRule::Absolute(v) => v,
        }
    }

    /// Parses `rel`, `rel:<factor>` or `abs:<value>`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::invalid(format!("unknown epsilon rule '{s}'"));
        match s.split_once(':') {
            None if s == "rel" => Ok(EpsilonRule::default()),
            Some(("rel", v)) => v.parse().map(EpsilonRule::Relative).map_err(|_| bad()),
            Some(("abs", v)) => v.parse().map(EpsilonRule::Absolute).map_err(|_| bad()),
            _ => Err(bad()),
        }
    }
}

/// Default `ε` for an instance: `1e-6 · max(1, max |potential|)`.
pub fn default_epsilon(mrf: &MarkovRandomField) -> f64 {
    EpsilonRule::default().resolve(mrf)
}

/// All intermediate rectifier quantities, indexed by vertex first.
#[derive(Debug, Clone, PartialEq)]
pub struct RectifierTable {
    /// `gamma[p][r][k]` for the `k`-th edge in `mrf.incident(p)`.
    pub gamma: Vec<Vec<Vec<f64>>>,
    pub chi: Vec<f64>,
    pub zeta: Vec<Vec<f64>>,
    /// Row-major `|L_p| x |L_p|`.
    pub theta: Vec<Vec<f64>>,
    pub lambda_diag: Vec<Vec<f64>>,
    /// Row-major `|L_p| x |L_p|`; the diagonal is unused.
    pub lambda_off: Vec<Vec<f64>>,
    pub epsilon: f64,
}

impl RectifierTable {
    pub fn theta(&self, p: usize, r: usize, s: usize) -> f64 {
        let k = self.zeta[p].len();
        self.theta[p][r * k + s]
    }

    pub fn lambda_off(&self, p: usize, r: usize, s: usize) -> f64 {
        let k = self.zeta[p].len();
        self.lambda_off[p][r * k + s]
    }

    /// The single per-vertex constant of the non-granular scheme,
    /// `max(χ(p), max_{r,s} −Θ(r, s))`.
    pub fn non_granular_lambda(&self, p: usize) -> f64 {
        self.theta[p].iter().fold(self.chi[p], |acc, &t| acc.max(-t))
    }
}

pub fn compute_rectifiers(mrf: &MarkovRandomField, epsilon: f64) -> Result<RectifierTable> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    let v = mrf.num_vertices();
    let mut table = RectifierTable {
        gamma: Vec::with_capacity(v),
        chi: Vec::with_capacity(v),
        zeta: Vec::with_capacity(v),
        theta: Vec::with_capacity(v),
        lambda_diag: Vec::with_capacity(v),
        lambda_off: Vec::with_capacity(v),
        epsilon,
    };
    for p in 0..v {
        let k = mrf.label_count(p);
        let phi = mrf.unary(p);
        let incident = mrf.incident(p);

        let gamma: Vec<Vec<f64>> = (0..k)
            .map(|r| {
                incident
                    .iter()
                    .map(|inc| {
                        (0..mrf.label_count(inc.other))
                            .map(|s| mrf.pairwise_from(inc, r, s))
                            .fold(f64::NEG_INFINITY, f64::max)
                    })
                    .collect()
            })
            .collect();

        let worst_flip = (0..k)
            .map(|r| phi[r] + gamma[r].iter().map(|&g| g.max(0.0)).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        let chi = (worst_flip + epsilon).max(0.0);

        let zeta: Vec<f64> = (0..k)
            .map(|r| {
                incident
                    .iter()
                    .map(|inc| {
                        (0..mrf.label_count(inc.other))
                            .map(|s| mrf.pairwise_from(inc, r, s).min(0.0))
                            .sum::<f64>()
                    })
                    .sum()
            })
            .collect();

        let mut theta = vec![0.0; k * k];
        let mut lambda_off = vec![0.0; k * k];
        for r in 0..k {
            for s in 0..k {
                let t = 0.0_f64
                    .min(phi[r] + zeta[r] - epsilon)
                    .min(phi[s] + zeta[s] - epsilon);
                theta[r * k + s] = t;
                lambda_off[r * k + s] = (chi - t) / 2.0;
            }
        }

        table.gamma.push(gamma);
        table.chi.push(chi);
        table.zeta.push(zeta);
        table.theta.push(theta);
        table.lambda_diag.push(vec![chi; k]);
        table.lambda_off.push(lambda_off);
    }
    Ok(table)
}

/// First QUBO variable index of each vertex.
pub fn variable_offsets(mrf: &MarkovRandomField) -> Vec<usize> {
    let mut base = Vec::with_capacity(mrf.num_vertices() + 1);
    let mut acc = 0;
    for v in 0..mrf.num_vertices() {
        base.push(acc);
        acc += mrf.label_count(v);
    }
    base.push(acc);
    base
}

/// Encodes `mrf` with rectifier strength `t` (`t = 1` enforces the constraints).
pub fn encode_one_hot(mrf: &MarkovRandomField, epsilon: f64, t: f64) -> Result<QuboInstance> {
    let table = compute_rectifiers(mrf, epsilon)?;
    encode_with_table(mrf, &table, t)
}

pub fn encode_with_table(
    mrf: &MarkovRandomField,
    table: &RectifierTable,
    t: f64,
) -> Result<QuboInstance> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::invalid(format!("rectifier strength must be >= 0, got {t}")));
    }
    let base = variable_offsets(mrf);
    let meta = (0..mrf.num_vertices())
        .flat_map(|v| (0..mrf.label_count(v)).map(move |label| VarRole::OneHot { vertex: v, label }))
        .collect();
    let mut q = QuboInstance::with_meta(meta);
    let mut offset = 0.0;
    for v in 0..mrf.num_vertices() {
        let k = mrf.label_count(v);
        let phi = mrf.unary(v);
        for l in 0..k {
            q.add(base[v] + l, base[v] + l, phi[l] - t * table.lambda_diag[v][l])?;
        }
        if t > 0.0 {
            for r in 0..k {
                for s in r + 1..k {
                    q.add(base[v] + r, base[v] + s, 2.0 * t * table.lambda_off(v, r, s))?;
                }
            }
        }
        offset += t * table.chi[v];
    }
    for (e, edge) in mrf.edges().iter().enumerate() {
        for r in 0..mrf.label_count(edge.p) {
            for s in 0..mrf.label_count(edge.q) {
                q.add(base[edge.p] + r, base[edge.q] + s, mrf.pairwise(e, r, s))?;
            }
        }
    }
    q.set_offset(offset);
    Ok(q)
}

/// Decoded labelling plus a per-vertex flag for whether exactly one bit was set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    pub labelling: Labelling,
    pub feasible: Vec<bool>,
}

impl Decoded {
    pub fn all_feasible(&self) -> bool {
        self.feasible.iter().all(|&f| f)
    }
}

/// Reads one-hot bits back into labels. Several set bits resolve to the
/// lowest label among them; no set bit resolves to label 0.
pub fn decode(q: &QuboInstance, x: &[bool]) -> Result<Decoded> {
    if x.len() != q.n() {
        return Err(Error::invalid(format!(
            "bitstring has {} bits for {} variables",
            x.len(),
            q.n()
        )));
    }
    let mut vertices = 0;
    for role in q.var_meta() {
        match *role {
            VarRole::OneHot { vertex, .. } => vertices = vertices.max(vertex + 1),
            _ => return Err(Error::invalid("QUBO is not a one-hot encoding")),
        }
    }
    let mut chosen: Vec<Option<usize>> = vec![None; vertices];
    let mut set_count = vec![0usize; vertices];
    for (role, &bit) in q.var_meta().iter().zip(x) {
        if let VarRole::OneHot { vertex, label } = *role {
            if bit {
                set_count[vertex] += 1;
                let c = &mut chosen[vertex];
                *c = Some(c.map_or(label, |l| l.min(label)));
            }
        }
    }
    Ok(Decoded {
        labelling: Labelling(chosen.iter().map(|c| c.unwrap_or(0)).collect()),
        feasible: set_count.iter().map(|&c| c == 1).collect(),
    })
}

/// Inverse of [`decode`] for feasible inputs.
pub fn encode_labelling(mrf: &MarkovRandomField, lab: &Labelling) -> Result<Vec<bool>> {
    mrf.check_labelling(lab)?;
    let base = variable_offsets(mrf);
    let mut x = vec![false; base[mrf.num_vertices()]];
    for (v, &l) in lab.0.iter().enumerate() {
        x[base[v] + l] = true;
    }
    Ok(x)
}

/// True iff `x` sets exactly one label bit for every vertex of `mrf`.
pub fn verify_feasible_optimum(mrf: &MarkovRandomField, q: &QuboInstance, x: &[bool]) -> bool {
    if x.len() != q.n() {
        return false;
    }
    let mut counts = vec![0usize; mrf.num_vertices()];
    for (role, &bit) in q.var_meta().iter().zip(x) {
        match *role {
            VarRole::OneHot { vertex, .. } if vertex < counts.len() => counts[vertex] += bit as usize,
            _ => return false,
        }
    }
    counts.iter().all(|&c| c == 1)
}

/// Annealer chain strength `1.414 · R · √D`: `R` is the population standard
/// deviation of the off-diagonal coefficients, `D` the average degree of the
/// problem graph.
pub fn chain_strength(q: &QuboInstance) -> Result<f64> {
    let weights: Vec<f64> = q.off_diagonal().map(|(_, _, w)| w).collect();
    if weights.is_empty() {
        return Err(Error::Undefined("QUBO has no off-diagonal entries".into()));
    }
    let mut touched = vec![false; q.n()];
    for (i, j, _) in q.entries() {
        touched[i] = true;
        touched[j] = true;
    }
    let nodes = touched.iter().filter(|&&t| t).count() as f64;
    let degree = 2.0 * weights.len() as f64 / nodes;
    let n = weights.len() as f64;
    let mean = weights.iter().sum::<f64>() / n;
    let var = weights.iter().map(|w| (w - mean) * (w - mean)).sum::<f64>() / n;
    Ok(1.414 * var.sqrt() * degree.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mrf::random_mrf;

    fn single() -> MarkovRandomField {
        MarkovRandomField::new(vec![vec![0.5, 0.2]], vec![]).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn rectifiers_all_zero_potentials() {
        let mrf = MarkovRandomField::new(vec![vec![0.0; 2]; 2], vec![(0, 1, vec![0.0; 4])]).unwrap();
        let t = compute_rectifiers(&mrf, 0.01).unwrap();
        for p in 0..2 {
            assert!(close(t.chi[p], 0.01));
            assert_eq!(t.zeta[p], vec![0.0, 0.0]);
            assert!(close(t.theta(p, 0, 1), -0.01));
            assert!(close(t.lambda_diag[p][0], 0.01));
            assert!(close(t.lambda_off(p, 0, 1), 0.01));
        }
    }

    #[test]
    fn rectifiers_single_vertex() {
        let t = compute_rectifiers(&single(), 0.01).unwrap();
        assert!(t.gamma[0].iter().all(Vec::is_empty));
        assert!(close(t.chi[0], 0.21));
        assert_eq!(t.zeta[0], vec![0.0, 0.0]);
        assert_eq!(t.theta(0, 0, 1), 0.0);
        assert!(close(t.lambda_diag[0][1], 0.21));
        assert!(close(t.lambda_off(0, 0, 1), 0.105));
    }

    #[test]
    fn rectifier_signs() {
        for seed in 0..20 {
            let mrf = random_mrf(seed, 5, 3, 0.5, (-1.0, 0.5)).unwrap();
            let t = compute_rectifiers(&mrf, 1e-3).unwrap();
            assert!(t.chi.iter().all(|&c| c >= 0.0));
            assert!(t.zeta.iter().flatten().all(|&z| z <= 0.0));
            assert!(t.theta.iter().flatten().all(|&z| z <= 0.0));
        }
    }

    #[test]
    fn rectifiers_reject_bad_epsilon() {
        assert!(matches!(compute_rectifiers(&single(), 0.0), Err(Error::InvalidArgument(_))));
        assert!(compute_rectifiers(&single(), -1.0).is_err());
        assert!(encode_one_hot(&single(), 0.0, 1.0).is_err());
    }

    #[test]
    fn encode_single_vertex() {
        let q = encode_one_hot(&single(), 0.01, 1.0).unwrap();
        assert_eq!(q.n(), 2);
        assert!(close(q.get(0, 0), 0.29));
        assert!(close(q.get(1, 1), -0.01));
        assert!(close(q.get(0, 1), 0.21));
        let e = q.energy(&[false, true]).unwrap();
        assert!(close(e, -0.01));
        assert!(close(e + q.offset(), 0.2));
    }

    #[test]
    fn encode_without_rectifiers() {
        let mrf = random_mrf(4, 3, 3, 1.0, (0.0, 1.0)).unwrap();
        let q = encode_one_hot(&mrf, 0.01, 0.0).unwrap();
        let base = variable_offsets(&mrf);
        for v in 0..3 {
            for r in 0..3 {
                assert_eq!(q.get(base[v] + r, base[v] + r), mrf.unary(v)[r]);
                for s in r + 1..3 {
                    assert!(!q.entries().any(|(i, j, _)| (i, j) == (base[v] + r, base[v] + s)));
                }
            }
        }
        assert_eq!(q.offset(), 0.0);
        let best = crate::solve::solve_exhaustive(&q).unwrap();
        assert!(best.best_x.iter().all(|&b| !b));
    }

    #[test]
    fn decode_repair_policy() {
        let q = encode_one_hot(
            &MarkovRandomField::new(vec![vec![0.0; 3]; 3], vec![]).unwrap(),
            0.01,
            1.0,
        )
        .unwrap();
        let bits = [false, true, false, true, false, true, false, false, false];
        let d = decode(&q, &bits).unwrap();
        assert_eq!(d.labelling, Labelling(vec![1, 0, 0]));
        assert_eq!(d.feasible, vec![true, false, false]);
        assert!(decode(&q, &bits[..4]).is_err());
    }

    #[test]
    fn feasibility_check() {
        let mrf = random_mrf(2, 2, 3, 1.0, (-1.0, 1.0)).unwrap();
        let q = encode_one_hot(&mrf, 0.01, 1.0).unwrap();
        assert!(verify_feasible_optimum(&mrf, &q, &[true, false, false, false, false, true]));
        assert!(!verify_feasible_optimum(&mrf, &q, &[true, true, false, false, false, true]));
        assert!(!verify_feasible_optimum(&mrf, &q, &[false, false, false, false, false, true]));
    }

    #[test]
    fn chain_strength_examples() {
        let mut q = QuboInstance::new(3);
        q.add(0, 1, 2.0).unwrap();
        q.add(1, 2, 2.0).unwrap();
        assert_eq!(chain_strength(&q).unwrap(), 0.0);
        let mut two = QuboInstance::new(2);
        two.add(0, 1, 1.0).unwrap();
        assert_eq!(chain_strength(&two).unwrap(), 0.0);
        assert!(matches!(chain_strength(&QuboInstance::new(2)), Err(Error::Undefined(_))));
    }

    #[test]
    fn chain_strength_two_pass_oracle() {
        let mrf = random_mrf(8, 6, 3, 0.5, (-1.0, 1.0)).unwrap();
        let q = encode_one_hot(&mrf, 0.01, 1.0).unwrap();
        // two-pass statistics over an independently collected weight list
        let mut w = Vec::new();
        let mut nodes = std::collections::BTreeSet::new();
        for (i, j, c) in q.entries() {
            nodes.insert(i);
            nodes.insert(j);
            if i != j {
                w.push(c);
            }
        }
        let mean: f64 = w.iter().sum::<f64>() / w.len() as f64;
        let var: f64 = w.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / w.len() as f64;
        let deg = 2.0 * w.len() as f64 / nodes.len() as f64;
        let expected = 1.414 * var.sqrt() * deg.sqrt();
        assert!((chain_strength(&q).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn epsilon_rules() {
        let mrf = MarkovRandomField::new(vec![vec![0.0, 250.0]], vec![]).unwrap();
        assert_eq!(default_epsilon(&mrf), 250.0e-6);
        assert_eq!(default_epsilon(&single()), 1e-6);
        assert_eq!(EpsilonRule::parse("abs:0.5").unwrap(), EpsilonRule::Absolute(0.5));
        assert_eq!(EpsilonRule::parse("rel").unwrap(), EpsilonRule::Relative(1e-6));
        assert!(EpsilonRule::parse("foo").is_err());
    }
}
