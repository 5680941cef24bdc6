//! Wasserstein oracle and property suite: exhaustive permutation oracles
//! for the assignment and bottleneck solvers, metric axioms, order
//! monotonicity, 1-D consistency, and translation invariance.

mod common;

use common::{random_point, rng};
use hkdelay_core::meanfield::EmpiricalMeasure;
use hkdelay_core::point::Point;
use hkdelay_core::wasserstein::{dinf_uniform, dp_1d, dp_uniform};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn random_cloud(r: &mut ChaCha8Rng, n: usize, dim: usize) -> EmpiricalMeasure<f64> {
    EmpiricalMeasure::uniform((0..n).map(|_| random_point(r, dim, 3.0)).collect()).unwrap()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    fn heap(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == 1 {
            out.push(cur.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, cur, out);
            if k.is_multiple_of(2) {
                cur.swap(i, k - 1);
            } else {
                cur.swap(0, k - 1);
            }
        }
    }
    heap(n, &mut cur, &mut out);
    out
}

/// Brute-force d_p over all permutations with the same float cost model
/// as the solver: per-pair costs |x_i - y_sigma(i)|^p summed in sorted
/// order.
fn oracle_dp(a: &EmpiricalMeasure<f64>, b: &EmpiricalMeasure<f64>, p: f64) -> f64 {
    let n = a.len();
    let cost: Vec<Vec<f64>> = a
        .atoms()
        .iter()
        .map(|x| b.atoms().iter().map(|y| x.dist(y).powf(p)).collect())
        .collect();
    let mut best = f64::INFINITY;
    for sigma in permutations(n) {
        let mut matched: Vec<f64> = sigma.iter().enumerate().map(|(i, &j)| cost[i][j]).collect();
        matched.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let total: f64 = matched.into_iter().fold(0.0, |acc, c| acc + c);
        if total < best {
            best = total;
        }
    }
    (best / n as f64).powf(1.0 / p)
}

fn oracle_dinf(a: &EmpiricalMeasure<f64>, b: &EmpiricalMeasure<f64>) -> f64 {
    let n = a.len();
    let mut best = f64::INFINITY;
    for sigma in permutations(n) {
        let bottleneck = sigma
            .iter()
            .enumerate()
            .map(|(i, &j)| a.atoms()[i].dist(&b.atoms()[j]))
            .fold(0.0f64, f64::max);
        best = best.min(bottleneck);
    }
    best
}

#[test]
fn solvers_match_brute_force_on_200_instances() {
    let mut r = rng(2001);
    for run in 0..200 {
        let n = r.gen_range(1..=6usize);
        let dim = r.gen_range(1..=3usize);
        let a = random_cloud(&mut r, n, dim);
        let b = random_cloud(&mut r, n, dim);
        for p in [1.0, 2.0] {
            let (d, _) = dp_uniform(&a, &b, p).unwrap();
            let oracle = oracle_dp(&a, &b, p);
            assert_eq!(d, oracle, "run {run}, p = {p}: {d} vs oracle {oracle}");
        }
        let (di, _) = dinf_uniform(&a, &b).unwrap();
        let oracle = oracle_dinf(&a, &b);
        assert_eq!(di, oracle, "run {run}, p = inf: {di} vs oracle {oracle}");
    }
}

fn all_distances(a: &EmpiricalMeasure<f64>, b: &EmpiricalMeasure<f64>) -> [f64; 3] {
    let (d1, _) = dp_uniform(a, b, 1.0).unwrap();
    let (d2, _) = dp_uniform(a, b, 2.0).unwrap();
    let (di, _) = dinf_uniform(a, b).unwrap();
    [d1, d2, di]
}

#[test]
fn metric_axioms_on_random_clouds() {
    let mut r = rng(2002);
    for _ in 0..40 {
        let n = r.gen_range(2..=8usize);
        let dim = r.gen_range(1..=3usize);
        let a = random_cloud(&mut r, n, dim);
        let b = random_cloud(&mut r, n, dim);
        let c = random_cloud(&mut r, n, dim);

        // symmetry, exact
        assert_eq!(all_distances(&a, &b), all_distances(&b, &a));
        // identity of indiscernibles
        for d in all_distances(&a, &a) {
            assert!(d.abs() < 1e-12);
        }
        for d in all_distances(&a, &b) {
            assert!(d > 1e-12, "distinct random clouds at distance {d}");
        }
        // triangle inequality with slack
        let ab = all_distances(&a, &b);
        let bc = all_distances(&b, &c);
        let ac = all_distances(&a, &c);
        for k in 0..3 {
            assert!(
                ac[k] <= ab[k] + bc[k] + 1e-9,
                "triangle violated: {} > {} + {}",
                ac[k],
                ab[k],
                bc[k]
            );
        }
        // monotonicity in the order
        assert!(ab[0] <= ab[1] + 1e-9, "d1 > d2: {} vs {}", ab[0], ab[1]);
        assert!(ab[1] <= ab[2] + 1e-9, "d2 > dinf: {} vs {}", ab[1], ab[2]);
    }
}

#[test]
fn one_dimensional_consistency() {
    let mut r = rng(2003);
    for _ in 0..40 {
        let n = r.gen_range(2..=10usize);
        let a = random_cloud(&mut r, n, 1);
        let b = random_cloud(&mut r, n, 1);
        for p in [1.0, 2.0] {
            let (d, _) = dp_uniform(&a, &b, p).unwrap();
            let d1d = dp_1d(&a, &b, p).unwrap();
            assert!((d - d1d).abs() < 1e-12, "p = {p}: {d} vs {d1d}");
        }
    }
}

#[test]
fn translation_invariance() {
    let mut r = rng(2004);
    for _ in 0..20 {
        let n = r.gen_range(2..=6usize);
        let dim = r.gen_range(1..=3usize);
        let a = random_cloud(&mut r, n, dim);
        let b = random_cloud(&mut r, n, dim);
        let shift = random_point(&mut r, dim, 5.0);
        let before = all_distances(&a, &b);
        let after = all_distances(&a.shifted(&shift), &b.shifted(&shift));
        for k in 0..3 {
            assert!(
                (before[k] - after[k]).abs() < 1e-12,
                "translation changed distance: {} vs {}",
                before[k],
                after[k]
            );
        }
    }
}

#[test]
fn weighted_1d_quantile_examples() {
    // three-atom vs two-atom weighted clouds, hand-computed quantile walk
    let a: EmpiricalMeasure<f64> = EmpiricalMeasure::new(
        vec![Point::scalar(0.0), Point::scalar(1.0), Point::scalar(2.0)],
        vec![0.5, 0.25, 0.25],
    )
    .unwrap();
    let b = EmpiricalMeasure::new(
        vec![Point::scalar(0.0), Point::scalar(2.0)],
        vec![0.5, 0.5],
    )
    .unwrap();
    // monotone coupling: [0,.5]->0 at 0 (cost 0), [.5,.75]: 1 -> 2
    // (mass .25, gap 1), [.75,1]: 2 -> 2 (cost 0)
    let d1 = dp_1d(&a, &b, 1.0).unwrap();
    assert!((d1 - 0.25).abs() < 1e-15, "d1 = {d1}");
    let d2 = dp_1d(&a, &b, 2.0).unwrap();
    assert!((d2 - 0.25f64.sqrt()).abs() < 1e-15, "d2 = {d2}");
}
