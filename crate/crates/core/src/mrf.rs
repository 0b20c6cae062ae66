//! Pairwise Markov random fields over discrete label sets.
//!
//! The energy of a labelling is the sum of one unary cost per vertex and one
//! pairwise cost per edge. Pairwise costs are stored as dense row-major
//! matrices indexed by `(label of p, label of q)` with `p < q`.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Largest state space `brute_force_map` will enumerate.
pub const BRUTE_FORCE_LIMIT: u128 = 10_000_000;

/// An undirected edge in canonical `p < q` order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub p: usize,
    pub q: usize,
}

/// Edge as seen from one endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Incidence {
    pub edge: usize,
    pub other: usize,
    /// True when the vertex is the `p` (row) side of the edge matrix.
    pub is_row: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkovRandomField {
    unary: Vec<Vec<f64>>,
    edges: Vec<Edge>,
    pairwise: Vec<Vec<f64>>,
    incidence: Vec<Vec<Incidence>>,
}

/// One label index per vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Labelling(pub Vec<usize>);

impl Labelling {
    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Incremental construction of a [`MarkovRandomField`].
#[derive(Debug, Default, Clone)]
pub struct MrfBuilder {
    unary: Vec<Vec<f64>>,
    edges: Vec<(usize, usize, Vec<f64>)>,
}

impl MrfBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a vertex with the given unary costs and returns its index.
    pub fn add_vertex(&mut self, unary: Vec<f64>) -> usize {
        self.unary.push(unary);
        self.unary.len() - 1
    }

    /// Adds an edge with a row-major `|L_a| x |L_b|` cost matrix, rows indexed by `a`.
    pub fn add_edge(&mut self, a: usize, b: usize, costs: Vec<f64>) -> &mut Self {
        self.edges.push((a, b, costs));
        self
    }

    pub fn build(self) -> Result<MarkovRandomField> {
        MarkovRandomField::new(self.unary, self.edges)
    }
}

impl MarkovRandomField {
    /// Validates and canonicalises an MRF. Edges given as `(a, b)` with `a > b`
    /// have their matrix transposed so that storage is always `p < q`.
    pub fn new(unary: Vec<Vec<f64>>, edges: Vec<(usize, usize, Vec<f64>)>) -> Result<Self> {
        let v = unary.len();
        for (i, u) in unary.iter().enumerate() {
            if u.is_empty() {
                return Err(Error::invalid(format!("vertex {i} has no labels")));
            }
        }
        let mut seen = std::collections::HashSet::new();
        let mut canon_edges = Vec::with_capacity(edges.len());
        let mut pairwise = Vec::with_capacity(edges.len());
        for (a, b, costs) in edges {
            if a >= v || b >= v {
                return Err(Error::invalid(format!("edge ({a}, {b}) references a missing vertex")));
            }
            if a == b {
                return Err(Error::invalid(format!("self-loop on vertex {a}")));
            }
            let (la, lb) = (unary[a].len(), unary[b].len());
            if costs.len() != la * lb {
                return Err(Error::invalid(format!(
                    "edge ({a}, {b}) matrix has {} entries, expected {la}x{lb}",
                    costs.len()
                )));
            }
            let (p, q, m) = if a < b {
                (a, b, costs)
            } else {
                let mut t = vec![0.0; la * lb];
                for r in 0..la {
                    for s in 0..lb {
                        t[s * la + r] = costs[r * lb + s];
                    }
                }
                (b, a, t)
            };
            if !seen.insert((p, q)) {
                return Err(Error::invalid(format!("duplicate edge ({p}, {q})")));
            }
            canon_edges.push(Edge { p, q });
            pairwise.push(m);
        }
        let mut incidence = vec![Vec::new(); v];
        for (e, edge) in canon_edges.iter().enumerate() {
            incidence[edge.p].push(Incidence {
                edge: e,
                other: edge.q,
                is_row: true,
            });
            incidence[edge.q].push(Incidence {
                edge: e,
                other: edge.p,
                is_row: false,
            });
        }
        Ok(Self {
            unary,
            edges: canon_edges,
            pairwise,
            incidence,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.unary.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn label_count(&self, v: usize) -> usize {
        self.unary[v].len()
    }

    pub fn label_counts(&self) -> Vec<usize> {
        self.unary.iter().map(Vec::len).collect()
    }

    pub fn unary(&self, v: usize) -> &[f64] {
        &self.unary[v]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Row-major matrix of edge `e`, rows indexed by labels of `edges()[e].p`.
    pub fn pairwise_matrix(&self, e: usize) -> &[f64] {
        &self.pairwise[e]
    }

    /// Pairwise cost of edge `e` with `lp` on the `p` side and `lq` on the `q` side.
    #[inline]
    pub fn pairwise(&self, e: usize, lp: usize, lq: usize) -> f64 {
        let lq_count = self.unary[self.edges[e].q].len();
        self.pairwise[e][lp * lq_count + lq]
    }

    /// Pairwise cost seen from vertex `v` holding `lv` while the neighbour holds `lo`.
    #[inline]
    pub fn pairwise_from(&self, inc: &Incidence, lv: usize, lo: usize) -> f64 {
        if inc.is_row {
            self.pairwise(inc.edge, lv, lo)
        } else {
            self.pairwise(inc.edge, lo, lv)
        }
    }

    pub fn incident(&self, v: usize) -> &[Incidence] {
        &self.incidence[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.incidence[v].len()
    }

    /// Largest absolute unary or pairwise cost.
    pub fn max_abs_potential(&self) -> f64 {
        self.unary
            .iter()
            .chain(self.pairwise.iter())
            .flatten()
            .fold(0.0_f64, |acc, &c| acc.max(c.abs()))
    }

    pub fn state_space_size(&self) -> u128 {
        self.unary
            .iter()
            .fold(1u128, |acc, u| acc.saturating_mul(u.len() as u128))
    }

    pub fn check_labelling(&self, lab: &Labelling) -> Result<()> {
        if lab.len() != self.num_vertices() {
            return Err(Error::invalid(format!(
                "labelling has {} entries for {} vertices",
                lab.len(),
                self.num_vertices()
            )));
        }
        for (v, &l) in lab.0.iter().enumerate() {
            if l >= self.label_count(v) {
                return Err(Error::invalid(format!(
                    "label {l} out of range for vertex {v} with {} labels",
                    self.label_count(v)
                )));
            }
        }
        Ok(())
    }

    /// Energy of a labelling: unaries in vertex order, then pairwise terms in edge order.
    pub fn energy(&self, lab: &Labelling) -> Result<f64> {
        self.check_labelling(lab)?;
        Ok(self.energy_unchecked(&lab.0))
    }

    pub(crate) fn energy_unchecked(&self, lab: &[usize]) -> f64 {
        let mut e = 0.0;
        for (v, u) in self.unary.iter().enumerate() {
            e += u[lab[v]];
        }
        for (i, edge) in self.edges.iter().enumerate() {
            e += self.pairwise(i, lab[edge.p], lab[edge.q]);
        }
        e
    }

    /// Adds `c` to every unary cost of vertex `v`.
    pub fn shift_unary(&mut self, v: usize, c: f64) {
        for u in &mut self.unary[v] {
            *u += c;
        }
    }

    /// Returns a copy with the edge list in the given order.
    pub fn with_edge_order(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.edges.len() {
            return Err(Error::invalid("edge permutation has the wrong length"));
        }
        let edges = order
            .iter()
            .map(|&i| (self.edges[i].p, self.edges[i].q, self.pairwise[i].clone()))
            .collect();
        Self::new(self.unary.clone(), edges)
    }

    /// Serialises to the plain-text MRF format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "mrf {} {}", self.num_vertices(), self.num_edges());
        for (v, u) in self.unary.iter().enumerate() {
            let _ = write!(out, "vertex {v} {}", u.len());
            for c in u {
                let _ = write!(out, " {c}");
            }
            out.push('\n');
        }
        for (e, edge) in self.edges.iter().enumerate() {
            let _ = writeln!(out, "edge {} {}", edge.p, edge.q);
            let cols = self.label_count(edge.q);
            for row in self.pairwise[e].chunks(cols) {
                let line: Vec<String> = row.iter().map(|c| c.to_string()).collect();
                let _ = writeln!(out, "{}", line.join(" "));
            }
        }
        out
    }

    /// Parses the plain-text MRF format. `#` starts a comment.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut tokens = Tokens::new(text);
        tokens.expect_word("mrf")?;
        let v = tokens.next_usize()?;
        let e = tokens.next_usize()?;
        let mut unary = Vec::with_capacity(v);
        for expected in 0..v {
            tokens.expect_word("vertex")?;
            let (off, id) = tokens.next_usize_at()?;
            if id != expected {
                return Err(Error::parse(off, format!("expected vertex {expected}, found {id}")));
            }
            let k = tokens.next_usize()?;
            let costs = (0..k).map(|_| tokens.next_f64()).collect::<Result<Vec<_>>>()?;
            unary.push(costs);
        }
        let mut edges = Vec::with_capacity(e);
        for _ in 0..e {
            tokens.expect_word("edge")?;
            let (off, p) = tokens.next_usize_at()?;
            let q = tokens.next_usize()?;
            if p >= v || q >= v {
                return Err(Error::parse(off, format!("edge ({p}, {q}) references a missing vertex")));
            }
            let n = unary[p].len() * unary[q].len();
            let costs = (0..n).map(|_| tokens.next_f64()).collect::<Result<Vec<_>>>()?;
            edges.push((p, q, costs));
        }
        if let Some((off, tok)) = tokens.next_token() {
            return Err(Error::parse(off, format!("trailing token '{tok}'")));
        }
        Self::new(unary, edges)
    }
}

/// Whitespace tokenizer that tracks byte offsets and skips `#` comments.
pub(crate) struct Tokens<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Tokens<'a> {
    pub(crate) fn new(text: &'a str) -> Self {
        Self { text, pos: 0 }
    }

    pub(crate) fn next_token(&mut self) -> Option<(usize, &'a str)> {
        let bytes = self.text.as_bytes();
        loop {
            while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.pos < bytes.len() && bytes[self.pos] == b'#' {
                while self.pos < bytes.len() && bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
                continue;
            }
            break;
        }
        if self.pos >= bytes.len() {
            return None;
        }
        let start = self.pos;
        while self.pos < bytes.len() && !bytes[self.pos].is_ascii_whitespace() && bytes[self.pos] != b'#' {
            self.pos += 1;
        }
        Some((start, &self.text[start..self.pos]))
    }

    fn require(&mut self) -> Result<(usize, &'a str)> {
        self.next_token()
            .ok_or_else(|| Error::parse(self.text.len(), "unexpected end of input"))
    }

    pub(crate) fn expect_word(&mut self, word: &str) -> Result<()> {
        let (off, tok) = self.require()?;
        if tok != word {
            return Err(Error::parse(off, format!("expected '{word}', found '{tok}'")));
        }
        Ok(())
    }

    pub(crate) fn next_usize_at(&mut self) -> Result<(usize, usize)> {
        let (off, tok) = self.require()?;
        tok.parse()
            .map(|n| (off, n))
            .map_err(|_| Error::parse(off, format!("expected an integer, found '{tok}'")))
    }

    pub(crate) fn next_usize(&mut self) -> Result<usize> {
        self.next_usize_at().map(|(_, n)| n)
    }

    pub(crate) fn next_f64(&mut self) -> Result<f64> {
        let (off, tok) = self.require()?;
        tok.parse()
            .map_err(|_| Error::parse(off, format!("expected a number, found '{tok}'")))
    }
}

/// Exhaustive MAP search. Ties resolve to the lexicographically smallest labelling.
pub fn brute_force_map(mrf: &MarkovRandomField) -> Result<(Labelling, f64)> {
    let states = mrf.state_space_size();
    if states > BRUTE_FORCE_LIMIT {
        return Err(Error::Capacity(format!(
            "state space of {states} labellings exceeds {BRUTE_FORCE_LIMIT}"
        )));
    }
    let counts = mrf.label_counts();
    let mut lab = vec![0usize; counts.len()];
    let mut best = lab.clone();
    let mut best_e = mrf.energy_unchecked(&lab);
    // odometer with the last vertex varying fastest gives lexicographic order
    loop {
        let mut k = counts.len();
        loop {
            if k == 0 {
                return Ok((Labelling(best), best_e));
            }
            k -= 1;
            lab[k] += 1;
            if lab[k] < counts[k] {
                break;
            }
            lab[k] = 0;
        }
        let e = mrf.energy_unchecked(&lab);
        if e < best_e {
            best_e = e;
            best.copy_from_slice(&lab);
        }
    }
}

/// Seeded random MRF. Every vertex gets `labels` labels, each pair `p < q`
/// becomes an edge with probability `edge_prob`, and all costs are uniform
/// in `cost_range`.
pub fn random_mrf(
    seed: u64,
    v: usize,
    labels: usize,
    edge_prob: f64,
    cost_range: (f64, f64),
) -> Result<MarkovRandomField> {
    random_mrf_with_labels(seed, &vec![labels; v], edge_prob, cost_range)
}

/// Like [`random_mrf`] with a per-vertex label count.
pub fn random_mrf_with_labels(
    seed: u64,
    label_counts: &[usize],
    edge_prob: f64,
    cost_range: (f64, f64),
) -> Result<MarkovRandomField> {
    if label_counts.is_empty() {
        return Err(Error::invalid("random MRF needs at least one vertex"));
    }
    if !(0.0..=1.0).contains(&edge_prob) {
        return Err(Error::invalid(format!("edge probability {edge_prob} outside [0, 1]")));
    }
    let (lo, hi) = cost_range;
    if !(lo <= hi) {
        return Err(Error::invalid("cost range is empty"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| if lo == hi { lo } else { rng.gen_range(lo..hi) };
    let unary: Vec<Vec<f64>> = label_counts
        .iter()
        .map(|&k| (0..k).map(|_| draw(&mut rng)).collect())
        .collect();
    let v = label_counts.len();
    let mut edges = Vec::new();
    for p in 0..v {
        for q in p + 1..v {
            if rng.gen_bool(edge_prob) {
                let m = (0..label_counts[p] * label_counts[q])
                    .map(|_| draw(&mut rng))
                    .collect();
                edges.push((p, q, m));
            }
        }
    }
    MarkovRandomField::new(unary, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single() -> MarkovRandomField {
        MarkovRandomField::new(vec![vec![0.5, 0.2]], vec![]).unwrap()
    }

    fn potts() -> MarkovRandomField {
        MarkovRandomField::new(
            vec![vec![0.0, 0.0], vec![0.0, 0.0]],
            vec![(0, 1, vec![0.0, 1.0, 1.0, 0.0])],
        )
        .unwrap()
    }

    /// Independent re-summation: every edge visited from its lower endpoint's incidence list.
    fn resum(mrf: &MarkovRandomField, lab: &[usize]) -> f64 {
        let mut total = 0.0;
        for v in 0..mrf.num_vertices() {
            total += mrf.unary(v)[lab[v]];
            for inc in mrf.incident(v) {
                if inc.other > v {
                    let m = mrf.pairwise_matrix(inc.edge);
                    let cols = mrf.label_count(inc.other);
                    total += m[lab[v] * cols + lab[inc.other]];
                }
            }
        }
        total
    }

    #[test]
    fn single_vertex_energy() {
        assert_eq!(single().energy(&Labelling(vec![1])).unwrap(), 0.2);
    }

    #[test]
    fn potts_diagonal_is_zero() {
        assert_eq!(potts().energy(&Labelling(vec![0, 0])).unwrap(), 0.0);
    }

    #[test]
    fn energy_matches_resummation() {
        let mrf = random_mrf(3, 4, 3, 0.7, (-1.0, 1.0)).unwrap();
        let mut lab = vec![0; 4];
        for code in 0..81 {
            let mut c = code;
            for l in lab.iter_mut() {
                *l = c % 3;
                c /= 3;
            }
            let e = mrf.energy(&Labelling(lab.clone())).unwrap();
            assert!((e - resum(&mrf, &lab)).abs() < 1e-12);
        }
    }

    #[test]
    fn energy_rejects_bad_labelling() {
        let mrf = potts();
        assert!(matches!(mrf.energy(&Labelling(vec![0])), Err(Error::InvalidArgument(_))));
        assert!(matches!(mrf.energy(&Labelling(vec![0, 2])), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn brute_force_examples() {
        assert_eq!(brute_force_map(&single()).unwrap(), (Labelling(vec![1]), 0.2));
        assert_eq!(brute_force_map(&potts()).unwrap(), (Labelling(vec![0, 0]), 0.0));
    }

    #[test]
    fn brute_force_beats_random_sampling() {
        let mrf = random_mrf(11, 4, 3, 0.6, (-1.0, 1.0)).unwrap();
        let (_, best) = brute_force_map(&mrf).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..1000 {
            let lab: Vec<usize> = (0..4).map(|_| rng.gen_range(0..3)).collect();
            assert!(best <= mrf.energy(&Labelling(lab)).unwrap());
        }
    }

    #[test]
    fn brute_force_guard() {
        let mrf = random_mrf(1, 8, 8, 0.0, (0.0, 1.0)).unwrap();
        assert!(matches!(brute_force_map(&mrf), Err(Error::Capacity(_))));
    }

    #[test]
    fn random_mrf_structure() {
        let m = random_mrf(7, 1, 2, 0.0, (-1.0, 1.0)).unwrap();
        assert_eq!((m.num_vertices(), m.num_edges()), (1, 0));
        assert_eq!(random_mrf(7, 5, 3, 0.5, (-1.0, 1.0)).unwrap(), random_mrf(7, 5, 3, 0.5, (-1.0, 1.0)).unwrap());
        assert_eq!(random_mrf(7, 4, 2, 1.0, (-1.0, 1.0)).unwrap().num_edges(), 6);
        assert!(random_mrf(7, 4, 2, 1.5, (-1.0, 1.0)).is_err());
    }

    #[test]
    fn invalid_structures_rejected() {
        let u = vec![vec![0.0; 2], vec![0.0; 2]];
        assert!(MarkovRandomField::new(u.clone(), vec![(0, 0, vec![0.0; 4])]).is_err());
        assert!(MarkovRandomField::new(u.clone(), vec![(0, 2, vec![0.0; 4])]).is_err());
        assert!(MarkovRandomField::new(u.clone(), vec![(0, 1, vec![0.0; 3])]).is_err());
        assert!(MarkovRandomField::new(
            u,
            vec![(0, 1, vec![0.0; 4]), (1, 0, vec![0.0; 4])]
        )
        .is_err());
    }

    #[test]
    fn reversed_edge_is_transposed() {
        let m = MarkovRandomField::new(
            vec![vec![0.0; 2], vec![0.0; 3]],
            vec![(1, 0, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0])],
        )
        .unwrap();
        assert_eq!(m.edges()[0], Edge { p: 0, q: 1 });
        // row for label 1 of vertex 1 was (3, 4)
        assert_eq!(m.pairwise(0, 0, 1), 3.0);
        assert_eq!(m.pairwise(0, 1, 2), 6.0);
    }

    #[test]
    fn text_round_trip() {
        let mrf = random_mrf(5, 4, 3, 0.6, (-2.0, 2.0)).unwrap();
        let back = MarkovRandomField::from_text(&mrf.to_text()).unwrap();
        assert_eq!(back, mrf);
    }

    #[test]
    fn text_comments_and_errors() {
        let text = "# tiny\nmrf 1 0\nvertex 0 2 0.5 0.2 # costs\n";
        let m = MarkovRandomField::from_text(text).unwrap();
        assert_eq!(m.unary(0), &[0.5, 0.2]);
        match MarkovRandomField::from_text("mrf 1 0\nvertex 0 2 0.5 x\n") {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 23),
            other => panic!("unexpected {other:?}"),
        }
        assert!(MarkovRandomField::from_text("mrf 1 0\nvertex 0 2 0.5").is_err());
    }
}
