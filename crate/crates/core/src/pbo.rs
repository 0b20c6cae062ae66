//! Binary (logarithmic) label encoding into a pseudo-Boolean polynomial and
//! its reduction to quadratic form.
//!
//! Each vertex with `k` labels gets `ceil(log2 k)` bits, most significant
//! first. Codes past `k - 1` repeat the last label. Per edge the energy
//! share `f(lp, lq) = φ_p(lp)/deg(p) + φ_pq(lp, lq) + φ_q(lq)/deg(q)` is
//! expanded into multilinear monomials via inclusion–exclusion over the
//! subset lattice of set bits.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::mrf::{Labelling, MarkovRandomField};
use crate::qubo::{QuboInstance, VarRole};

/// Coefficients with smaller magnitude are dropped after accumulation.
pub const COEFF_EPS: f64 = 1e-12;

/// Multilinear polynomial over binary variables. The empty key is the constant.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoBooleanPolynomial {
    n: usize,
    original_n: usize,
    terms: BTreeMap<Vec<usize>, f64>,
    roles: Vec<VarRole>,
}

impl PseudoBooleanPolynomial {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            original_n: n,
            terms: BTreeMap::new(),
            roles: vec![VarRole::Free; n],
        }
    }

    /// Adds `coeff` to the monomial over `vars`. Repeated variables collapse (`x² = x`).
    pub fn add_term(&mut self, vars: &[usize], coeff: f64) -> Result<()> {
        let mut key = vars.to_vec();
        key.sort_unstable();
        key.dedup();
        if let Some(&bad) = key.iter().find(|&&i| i >= self.n) {
            return Err(Error::invalid(format!("variable {bad} outside {} variables", self.n)));
        }
        *self.terms.entry(key).or_insert(0.0) += coeff;
        Ok(())
    }

    fn push_aux(&mut self) -> usize {
        self.n += 1;
        self.roles.push(VarRole::Aux);
        self.n - 1
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn original_n(&self) -> usize {
        self.original_n
    }

    pub fn roles(&self) -> &[VarRole] {
        &self.roles
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[usize], f64)> {
        self.terms.iter().map(|(k, &c)| (k.as_slice(), c))
    }

    pub fn coefficient(&self, vars: &[usize]) -> f64 {
        let mut key = vars.to_vec();
        key.sort_unstable();
        self.terms.get(&key).copied().unwrap_or(0.0)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(Vec::len).max().unwrap_or(0)
    }

    pub fn evaluate(&self, x: &[bool]) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::invalid(format!(
                "assignment has {} bits for {} variables",
                x.len(),
                self.n
            )));
        }
        Ok(self
            .terms
            .iter()
            .filter(|(k, _)| k.iter().all(|&i| x[i]))
            .map(|(_, &c)| c)
            .sum())
    }

    fn prune(&mut self) {
        self.terms.retain(|_, c| c.abs() >= COEFF_EPS);
    }

    /// One `coefficient : i,j,k` line per monomial (empty list for the constant).
    pub fn debug_dump(&self) -> String {
        let mut out = String::new();
        for (k, c) in &self.terms {
            let vars: Vec<String> = k.iter().map(usize::to_string).collect();
            let _ = writeln!(out, "{c} : {}", vars.join(","));
        }
        out
    }
}

/// Bits used to encode `k` labels.
pub fn bits_for(k: usize) -> usize {
    if k <= 1 {
        0
    } else {
        (usize::BITS - (k - 1).leading_zeros()) as usize
    }
}

/// Bit layout of a binary encoding: first variable and bit count per vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitLayout {
    pub base: Vec<usize>,
    pub bits: Vec<usize>,
}

impl BitLayout {
    pub fn new(mrf: &MarkovRandomField) -> Self {
        let mut base = Vec::with_capacity(mrf.num_vertices());
        let mut bits = Vec::with_capacity(mrf.num_vertices());
        let mut acc = 0;
        for v in 0..mrf.num_vertices() {
            let b = bits_for(mrf.label_count(v));
            base.push(acc);
            bits.push(b);
            acc += b;
        }
        Self { base, bits }
    }

    pub fn total(&self) -> usize {
        self.base.last().map_or(0, |&b| b + self.bits[self.bits.len() - 1])
    }

    /// Variables of `v` selected by `mask`, where mask bit `i` stands for the
    /// code bit of weight `2^i`.
    fn vars(&self, v: usize, mask: usize, out: &mut Vec<usize>) {
        let b = self.bits[v];
        for i in 0..b {
            if mask >> i & 1 == 1 {
                // MSB first: weight 2^i sits at position b - 1 - i
                out.push(self.base[v] + b - 1 - i);
            }
        }
    }

    pub fn code_of(&self, v: usize, x: &[bool]) -> usize {
        let b = self.bits[v];
        (0..b).fold(0, |acc, i| acc << 1 | x[self.base[v] + i] as usize)
    }
}

fn label_of(code: usize, k: usize) -> usize {
    code.min(k - 1)
}

/// Inclusion–exclusion coefficients `a_σ = Σ_{σ' ⊆ σ} (−1)^{|σ|−|σ'|} g(σ')`
/// over a combined bit mask of `bits` bits.
fn mobius(bits: usize, g: impl Fn(usize) -> f64) -> Vec<f64> {
    let size = 1usize << bits;
    let values: Vec<f64> = (0..size).map(&g).collect();
    (0..size)
        .map(|sigma| {
            let k = sigma.count_ones();
            let mut sum = 0.0;
            let mut sub = sigma;
            loop {
                let sign = if (k - sub.count_ones()) % 2 == 0 { 1.0 } else { -1.0 };
                sum += sign * values[sub];
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & sigma;
            }
            sum
        })
        .collect()
}

pub fn encode_binary(mrf: &MarkovRandomField) -> Result<PseudoBooleanPolynomial> {
    let layout = BitLayout::new(mrf);
    let mut poly = PseudoBooleanPolynomial::new(layout.total());
    for v in 0..mrf.num_vertices() {
        for bit in 0..layout.bits[v] {
            poly.roles[layout.base[v] + bit] = VarRole::Bit { vertex: v, bit };
        }
    }
    let mut vars = Vec::new();
    for (e, edge) in mrf.edges().iter().enumerate() {
        let (p, q) = (edge.p, edge.q);
        let (kp, kq) = (mrf.label_count(p), mrf.label_count(q));
        let (dp, dq) = (mrf.degree(p) as f64, mrf.degree(q) as f64);
        let (bp, bq) = (layout.bits[p], layout.bits[q]);
        let p_mask = (1usize << bp) - 1;
        // combined mask: low bp bits are p's code, the rest q's
        let coeffs = mobius(bp + bq, |m| {
            let lp = label_of(m & p_mask, kp);
            let lq = label_of(m >> bp, kq);
            mrf.unary(p)[lp] / dp + mrf.pairwise(e, lp, lq) + mrf.unary(q)[lq] / dq
        });
        for (m, &a) in coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            vars.clear();
            layout.vars(p, m & p_mask, &mut vars);
            layout.vars(q, m >> bp, &mut vars);
            poly.add_term(&vars, a)?;
        }
    }
    // isolated vertices carry their unary as a standalone polynomial
    for v in (0..mrf.num_vertices()).filter(|&v| mrf.degree(v) == 0) {
        let k = mrf.label_count(v);
        let coeffs = mobius(layout.bits[v], |m| mrf.unary(v)[label_of(m, k)]);
        for (m, &a) in coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            vars.clear();
            layout.vars(v, m, &mut vars);
            poly.add_term(&vars, a)?;
        }
    }
    poly.prune();
    Ok(poly)
}

/// Reduces every monomial of degree above two with fresh auxiliaries.
///
/// Negative `a·x_1…x_d` becomes `a·w·(S_1 − (d − 1))` with one auxiliary.
/// Positive `a·x_1…x_d` becomes
/// `a·(Σ_{i=1}^{n_d} w_i (c_i (2i − S_1) − 1) + S_2)` with
/// `n_d = ⌊(d − 1)/2⌋`, `c_i = 1` when `d` is odd and `i = n_d`, else 2,
/// `S_1 = Σ x_j` and `S_2 = Σ_{j<k} x_j x_k`.
pub fn quadratize(poly: &PseudoBooleanPolynomial) -> PseudoBooleanPolynomial {
    let mut out = PseudoBooleanPolynomial {
        n: poly.n,
        original_n: poly.original_n,
        terms: BTreeMap::new(),
        roles: poly.roles.clone(),
    };
    let add = |out: &mut PseudoBooleanPolynomial, key: Vec<usize>, c: f64| {
        *out.terms.entry(key).or_insert(0.0) += c;
    };
    for (vars, &a) in &poly.terms {
        let d = vars.len();
        if d <= 2 {
            add(&mut out, vars.clone(), a);
            continue;
        }
        if a < 0.0 {
            let w = out.push_aux();
            for &x in vars {
                add(&mut out, vec![x, w], a);
            }
            add(&mut out, vec![w], -a * (d as f64 - 1.0));
        } else {
            let nd = (d - 1) / 2;
            for i in 1..=nd {
                let c = if d % 2 == 1 && i == nd { 1.0 } else { 2.0 };
                let w = out.push_aux();
                for &x in vars {
                    add(&mut out, vec![x, w], -a * c);
                }
                add(&mut out, vec![w], a * (2.0 * i as f64 * c - 1.0));
            }
            for (j, &xj) in vars.iter().enumerate() {
                for &xk in &vars[j + 1..] {
                    add(&mut out, vec![xj, xk], a);
                }
            }
        }
    }
    out.prune();
    out
}

/// Degree ≤ 2 polynomial to QUBO: linear terms on the diagonal, constant into the offset.
pub fn pbo_to_qubo(poly: &PseudoBooleanPolynomial) -> Result<QuboInstance> {
    if poly.degree() > 2 {
        return Err(Error::invalid(format!(
            "polynomial has degree {}, quadratize it first",
            poly.degree()
        )));
    }
    let mut q = QuboInstance::with_meta(poly.roles.clone());
    let mut offset = 0.0;
    for (vars, &c) in &poly.terms {
        match vars.as_slice() {
            [] => offset += c,
            [i] => q.add(*i, *i, c)?,
            [i, j] => q.add(*i, *j, c)?,
            _ => unreachable!(),
        }
    }
    q.prune_zeros();
    q.set_offset(offset);
    Ok(q)
}

/// Reads each vertex's bit group as an unsigned number, most significant bit first.
/// Auxiliary bits after the original ones are ignored.
pub fn decode_binary(mrf: &MarkovRandomField, x: &[bool]) -> Result<Labelling> {
    let layout = BitLayout::new(mrf);
    if x.len() < layout.total() {
        return Err(Error::invalid(format!(
            "bitstring has {} bits, encoding needs {}",
            x.len(),
            layout.total()
        )));
    }
    Ok(Labelling(
        (0..mrf.num_vertices())
            .map(|v| label_of(layout.code_of(v, x), mrf.label_count(v)))
            .collect(),
    ))
}

/// Bits encoding `lab` (inverse of [`decode_binary`] on the original bits).
pub fn encode_labelling_binary(mrf: &MarkovRandomField, lab: &Labelling) -> Result<Vec<bool>> {
    mrf.check_labelling(lab)?;
    let layout = BitLayout::new(mrf);
    let mut x = vec![false; layout.total()];
    for (v, &l) in lab.0.iter().enumerate() {
        let b = layout.bits[v];
        for i in 0..b {
            x[layout.base[v] + i] = (l >> (b - 1 - i)) & 1 == 1;
        }
    }
    Ok(x)
}
