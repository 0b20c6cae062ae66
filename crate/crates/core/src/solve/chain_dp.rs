use crate::error::{Error, Result};
use crate::mrf::{Labelling, MarkovRandomField};

/// Splits a path-structured MRF into its paths, each listed end to end
/// starting from its lowest-index endpoint. Fails on degree > 2 or cycles.
pub fn path_components(mrf: &MarkovRandomField) -> Result<Vec<Vec<usize>>> {
    let v = mrf.num_vertices();
    for p in 0..v {
        if mrf.degree(p) > 2 {
            return Err(Error::Structure(format!(
                "vertex {p} has degree {}, chain DP needs paths",
                mrf.degree(p)
            )));
        }
    }
    let mut visited = vec![false; v];
    let mut paths = Vec::new();
    for s in 0..v {
        if visited[s] || mrf.degree(s) == 2 {
            continue;
        }
        let mut path = vec![s];
        visited[s] = true;
        let mut prev = usize::MAX;
        let mut cur = s;
        loop {
            let next = mrf.incident(cur).iter().map(|i| i.other).find(|&o| o != prev);
            match next {
                Some(o) if !visited[o] => {
                    visited[o] = true;
                    path.push(o);
                    prev = cur;
                    cur = o;
                }
                _ => break,
            }
        }
        paths.push(path);
    }
    if let Some(p) = visited.iter().position(|&seen| !seen) {
        return Err(Error::Structure(format!("vertex {p} lies on a cycle")));
    }
    Ok(paths)
}

/// Exact MAP for MRFs whose edges form disjoint simple paths, by min-sum
/// dynamic programming with backtracking. Ties go to the lowest label.
pub fn solve_chain_dp(mrf: &MarkovRandomField) -> Result<(Labelling, f64)> {
    let paths = path_components(mrf)?;
    let mut lab = vec![0usize; mrf.num_vertices()];
    for path in &paths {
        solve_path(mrf, path, &mut lab);
    }
    let energy = mrf.energy_unchecked(&lab);
    Ok((Labelling(lab), energy))
}

fn solve_path(mrf: &MarkovRandomField, path: &[usize], lab: &mut [usize]) {
    let first = path[0];
    let mut cost: Vec<f64> = mrf.unary(first).to_vec();
    let mut back: Vec<Vec<usize>> = Vec::with_capacity(path.len());
    back.push(Vec::new());
    for w in path.windows(2) {
        let (prev, cur) = (w[0], w[1]);
        let inc = mrf
            .incident(cur)
            .iter()
            .find(|i| i.other == prev)
            .expect("consecutive path vertices share an edge");
        let k = mrf.label_count(cur);
        let mut next = Vec::with_capacity(k);
        let mut ptr = Vec::with_capacity(k);
        for l in 0..k {
            let mut best = (f64::INFINITY, 0);
            for (lp, &c) in cost.iter().enumerate() {
                let total = c + mrf.pairwise_from(inc, l, lp);
                if total < best.0 {
                    best = (total, lp);
                }
            }
            next.push(best.0 + mrf.unary(cur)[l]);
            ptr.push(best.1);
        }
        cost = next;
        back.push(ptr);
    }
    let mut l = argmin(&cost);
    for (idx, &v) in path.iter().enumerate().rev() {
        lab[v] = l;
        if idx > 0 {
            l = back[idx][l];
        }
    }
}

fn argmin(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x < xs[best] {
            best = i;
        }
    }
    best
}
