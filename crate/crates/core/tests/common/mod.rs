//! Naive reference implementations used only by tests.
//!
//! Everything here works straight from feature rows with textbook double
//! sums; nothing goes through `KernelContext`, the cached mean similarities
//! or the incremental herding state.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn gauss(x: &[f64], y: &[f64], sigma: f64) -> f64 {
    let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    (-d2 / (sigma * sigma)).exp()
}

pub fn gram(rows: &[Vec<f64>], sigma: f64) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|x| rows.iter().map(|y| gauss(x, y, sigma)).collect())
        .collect()
}

/// Three-term α-MMD² with every sum written out.
pub fn alpha_mmd_sq(k: &[Vec<f64>], idx: &[usize], alpha: f64) -> f64 {
    let n = k.len() as f64;
    let m = idx.len() as f64;
    let mut full = 0.0;
    for row in k {
        for v in row {
            full += v;
        }
    }
    let mut own = 0.0;
    for &i in idx {
        for &j in idx {
            own += k[i][j];
        }
    }
    let mut cross = 0.0;
    for row in k {
        for &j in idx {
            cross += row[j];
        }
    }
    alpha * alpha * full / (n * n) + own / (m * m) - 2.0 * alpha * cross / (m * n)
}

pub fn kbar(k: &[Vec<f64>]) -> f64 {
    let n = k.len() as f64;
    k.iter().flatten().sum::<f64>() / (n * n)
}

/// Minimum over all size-m subsets by recursive enumeration; ties keep the
/// first subset in lexicographic order.
pub fn brute_force_min(k: &[Vec<f64>], m: usize, alpha: f64) -> (Vec<usize>, f64) {
    fn rec(k: &[Vec<f64>], m: usize, alpha: f64, start: usize, cur: &mut Vec<usize>, best: &mut (Vec<usize>, f64)) {
        if cur.len() == m {
            let v = alpha_mmd_sq(k, cur, alpha);
            if v < best.1 {
                *best = (cur.clone(), v);
            }
            return;
        }
        for i in start..k.len() {
            cur.push(i);
            rec(k, m, alpha, i + 1, cur, best);
            cur.pop();
        }
    }
    let mut best = (Vec::new(), f64::INFINITY);
    rec(k, m, alpha, 0, &mut Vec::new(), &mut best);
    best
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` points in `d` dimensions, uniform on a box with a few random offsets
/// so instances are not all alike.
pub fn random_rows(rng: &mut impl Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
    let scale = rng.random_range(0.5..3.0);
    (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0) * scale).collect())
        .collect()
}

pub fn random_subset(rng: &mut impl Rng, n: usize, m: usize) -> Vec<usize> {
    rand::seq::index::sample(rng, n, m).into_vec()
}

pub fn random_multiset(rng: &mut impl Rng, n: usize, m: usize) -> Vec<usize> {
    (0..m).map(|_| rng.random_range(0..n)).collect()
}
