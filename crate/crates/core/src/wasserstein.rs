//! Exact Wasserstein distances between empirical measures.
//!
//! For equal-size uniform clouds the optimal coupling is a permutation, so
//! `d_p` reduces to an assignment problem (solved by the Hungarian method)
//! and `d_inf` to a bottleneck assignment (binary search over the sorted
//! pairwise distances with a Hopcroft-Karp feasibility check). Weighted
//! measures are supported in one dimension through the monotone quantile
//! coupling.

use crate::meanfield::EmpiricalMeasure;
use crate::{cast, Error, Result, Scalar};

/// A coupling between two empirical measures: (source index, target
/// index, mass) triples plus the total transport cost. For `dp_uniform`
/// the cost is the raw assignment cost `sum |x_i - y_sigma(i)|^p`; for
/// `dinf_uniform` it is the bottleneck distance itself.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan<S: Scalar> {
    pub pairs: Vec<(usize, usize, S)>,
    pub cost: S,
}

fn check_uniform_pair<S: Scalar>(
    a: &EmpiricalMeasure<S>,
    b: &EmpiricalMeasure<S>,
) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::Unsupported(format!(
            "uniform matching needs equal atom counts, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if !a.has_uniform_weights() || !b.has_uniform_weights() {
        return Err(Error::Unsupported(
            "uniform matching needs exactly uniform weights".into(),
        ));
    }
    if a.dim() != b.dim() {
        return Err(Error::InvalidArgument(format!(
            "dimension mismatch: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(a.len())
}

/// Minimum-cost assignment on a square cost matrix by the Hungarian
/// method with potentials (O(n^3)). Returns `sigma` with row `i` matched
/// to column `sigma[i]`.
fn hungarian<S: Scalar>(cost: &[Vec<S>]) -> Vec<usize> {
    let n = cost.len();
    let mut u = vec![S::zero(); n + 1];
    let mut v = vec![S::zero(); n + 1];
    let mut matched = vec![0usize; n + 1]; // matched[j] = row occupying column j, 1-based
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        matched[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![S::infinity(); n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched[j0];
            let mut delta = S::infinity();
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[matched[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched[j0] = matched[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut sigma = vec![0usize; n];
    for j in 1..=n {
        sigma[matched[j] - 1] = j - 1;
    }
    sigma
}

/// Exact `d_p` between equal-size uniform clouds via optimal assignment:
/// distance `= (cost / n)^{1/p}` with cost the minimal
/// `sum |x_i - y_sigma(i)|^p`.
pub fn dp_uniform<S: Scalar>(
    a: &EmpiricalMeasure<S>,
    b: &EmpiricalMeasure<S>,
    p: S,
) -> Result<(S, TransportPlan<S>)> {
    if !p.is_finite() || p < S::one() {
        return Err(Error::InvalidArgument(format!("order p must satisfy p >= 1, got {p}")));
    }
    let n = check_uniform_pair(a, b)?;
    let cost: Vec<Vec<S>> = a
        .atoms()
        .iter()
        .map(|x| b.atoms().iter().map(|y| x.dist(y).powf(p)).collect())
        .collect();
    let sigma = hungarian(&cost);
    let mass = S::one() / S::from_usize(n).expect("atom count fits scalar");
    let mut pairs = Vec::with_capacity(n);
    let mut matched: Vec<S> = Vec::with_capacity(n);
    for (i, &j) in sigma.iter().enumerate() {
        matched.push(cost[i][j]);
        pairs.push((i, j, mass));
    }
    // sum in sorted order so the cost is invariant under swapping the
    // two measures (the optimal matching's cost multiset is symmetric)
    matched.sort_by(|x, y| x.partial_cmp(y).expect("finite costs"));
    let total = matched.into_iter().fold(S::zero(), |acc, c| acc + c);
    let count = S::from_usize(n).expect("atom count fits scalar");
    let distance = (total / count).powf(S::one() / p);
    Ok((distance, TransportPlan { pairs, cost: total }))
}

/// Hopcroft-Karp maximum bipartite matching on the edge set
/// `{(i, j) : allow(i, j)}`; returns (size, match_of_left).
fn hopcroft_karp(n: usize, allow: &dyn Fn(usize, usize) -> bool) -> (usize, Vec<Option<usize>>) {
    const NIL: usize = usize::MAX;
    let mut match_l = vec![NIL; n];
    let mut match_r = vec![NIL; n];
    let mut dist = vec![0usize; n];
    let mut matching = 0usize;
    loop {
        // BFS layers from free left vertices
        let mut queue = std::collections::VecDeque::new();
        let mut found_augmenting = false;
        for i in 0..n {
            if match_l[i] == NIL {
                dist[i] = 0;
                queue.push_back(i);
            } else {
                dist[i] = NIL;
            }
        }
        while let Some(i) = queue.pop_front() {
            for (j, &owner) in match_r.iter().enumerate() {
                if allow(i, j) {
                    match owner {
                        NIL => found_augmenting = true,
                        i2 => {
                            if dist[i2] == NIL {
                                dist[i2] = dist[i] + 1;
                                queue.push_back(i2);
                            }
                        }
                    }
                }
            }
        }
        if !found_augmenting {
            break;
        }
        // DFS along layered graph
        fn dfs(
            i: usize,
            n: usize,
            allow: &dyn Fn(usize, usize) -> bool,
            dist: &mut [usize],
            match_l: &mut [usize],
            match_r: &mut [usize],
        ) -> bool {
            const NIL: usize = usize::MAX;
            for j in 0..n {
                if allow(i, j) {
                    let i2 = match_r[j];
                    if i2 == NIL
                        || (dist[i2] == dist[i].wrapping_add(1)
                            && dfs(i2, n, allow, dist, match_l, match_r))
                    {
                        match_l[i] = j;
                        match_r[j] = i;
                        return true;
                    }
                }
            }
            dist[i] = NIL;
            false
        }
        for i in 0..n {
            if match_l[i] == NIL && dfs(i, n, allow, &mut dist, &mut match_l, &mut match_r) {
                matching += 1;
            }
        }
    }
    let out = match_l
        .iter()
        .map(|&j| if j == NIL { None } else { Some(j) })
        .collect();
    (matching, out)
}

/// Exact bottleneck distance `d_inf` between equal-size uniform clouds:
/// the smallest pairwise distance threshold admitting a perfect matching.
pub fn dinf_uniform<S: Scalar>(
    a: &EmpiricalMeasure<S>,
    b: &EmpiricalMeasure<S>,
) -> Result<(S, TransportPlan<S>)> {
    let n = check_uniform_pair(a, b)?;
    let dmat: Vec<Vec<S>> = a
        .atoms()
        .iter()
        .map(|x| b.atoms().iter().map(|y| x.dist(y)).collect())
        .collect();
    let mut thresholds: Vec<S> = dmat.iter().flatten().copied().collect();
    thresholds.sort_by(|x, y| x.partial_cmp(y).expect("finite distances"));
    thresholds.dedup();
    // smallest attained distance that still allows a perfect matching
    let mut lo = 0usize;
    let mut hi = thresholds.len() - 1;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        let thr = thresholds[mid];
        let (size, _) = hopcroft_karp(n, &|i, j| dmat[i][j] <= thr);
        if size == n {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let bottleneck = thresholds[lo];
    let (size, match_l) = hopcroft_karp(n, &|i, j| dmat[i][j] <= bottleneck);
    debug_assert_eq!(size, n);
    let mass = S::one() / S::from_usize(n).expect("atom count fits scalar");
    let pairs = match_l
        .iter()
        .enumerate()
        .map(|(i, j)| (i, j.expect("perfect matching"), mass))
        .collect();
    Ok((bottleneck, TransportPlan { pairs, cost: bottleneck }))
}

/// Exact one-dimensional `d_p` for arbitrary weights via the monotone
/// (quantile) coupling.
pub fn dp_1d<S: Scalar>(a: &EmpiricalMeasure<S>, b: &EmpiricalMeasure<S>, p: S) -> Result<S> {
    if a.dim() != 1 || b.dim() != 1 {
        return Err(Error::Unsupported(format!(
            "dp_1d needs one-dimensional measures, got dims {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    if !p.is_finite() || p < S::one() {
        return Err(Error::InvalidArgument(format!("order p must satisfy p >= 1, got {p}")));
    }
    let sorted = |m: &EmpiricalMeasure<S>| -> Vec<(S, S)> {
        let mut v: Vec<(S, S)> = m
            .atoms()
            .iter()
            .zip(m.weights())
            .map(|(a, &w)| (a.coords()[0], w))
            .collect();
        v.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite coordinates"));
        v
    };
    let xs = sorted(a);
    let ys = sorted(b);
    // walk the merged cumulative-weight grid
    let mut i = 0usize;
    let mut j = 0usize;
    let mut rem_x = xs[0].1;
    let mut rem_y = ys[0].1;
    let mut total = S::zero();
    let eps = cast::<S>(1e-15);
    while i < xs.len() && j < ys.len() {
        let mass = rem_x.min(rem_y);
        total += mass * (xs[i].0 - ys[j].0).abs().powf(p);
        rem_x -= mass;
        rem_y -= mass;
        if rem_x <= eps {
            i += 1;
            if i < xs.len() {
                rem_x = xs[i].1;
            }
        }
        if rem_y <= eps {
            j += 1;
            if j < ys.len() {
                rem_y = ys[j].1;
            }
        }
    }
    Ok(total.powf(S::one() / p))
}
