//! Reference samplers: uniform random, label-stratified and k-means based.

use rand::seq::index;
use rand::Rng;

use super::stream_rng;
use crate::error::{Error, Result};
use crate::kernel::{sq_dist, Dataset};

pub const DEFAULT_KMEANS_ITERS: usize = 50;
const KMEANS_TOL: f64 = 1e-6;

fn check_budget(dataset: &Dataset, m: usize) -> Result<()> {
    if m < 1 {
        return Err(Error::invalid("budget m must be >= 1"));
    }
    if m > dataset.n() {
        return Err(Error::BudgetExceedsGroundSet { m, n: dataset.n() });
    }
    Ok(())
}

/// `m` distinct indices drawn uniformly without replacement.
pub fn random(dataset: &Dataset, m: usize, seed: u64) -> Result<Vec<usize>> {
    check_budget(dataset, m)?;
    let mut rng = stream_rng(seed, 0);
    Ok(index::sample(&mut rng, dataset.n(), m).into_vec())
}

/// Largest-remainder split of `m` across groups of the given sizes.
/// No group gets more than its size, so the sum falls short when `m` exceeds
/// the total.
pub fn apportion(sizes: &[usize], m: usize) -> Vec<usize> {
    let total: usize = sizes.iter().sum();
    if total == 0 {
        return vec![0; sizes.len()];
    }
    let mut alloc: Vec<usize> = sizes.iter().map(|&s| s * m / total).collect();
    let mut left = m - alloc.iter().sum::<usize>();
    // Remainders as exact fractions over `total`; ties go to the lower group.
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by(|&a, &b| ((sizes[b] * m) % total).cmp(&((sizes[a] * m) % total)).then(a.cmp(&b)));
    for g in order {
        if left == 0 {
            break;
        }
        if alloc[g] < sizes[g] {
            alloc[g] += 1;
            left -= 1;
        }
    }
    alloc
}

/// Per-class uniform draws with the budget apportioned to class sizes.
pub fn stratified(dataset: &Dataset, m: usize, seed: u64) -> Result<Vec<usize>> {
    check_budget(dataset, m)?;
    let labels = dataset
        .labels()
        .ok_or_else(|| Error::invalid("stratified sampling needs labels"))?;
    let mut classes: Vec<u32> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if m < classes.len() {
        return Err(Error::invalid(format!(
            "stratified sampling needs m >= number of classes ({})",
            classes.len()
        )));
    }
    let members: Vec<Vec<usize>> = classes
        .iter()
        .map(|c| (0..labels.len()).filter(|&i| labels[i] == *c).collect())
        .collect();
    let sizes: Vec<usize> = members.iter().map(Vec::len).collect();
    let alloc = apportion(&sizes, m);

    let mut rng = stream_rng(seed, 0);
    let mut out = Vec::with_capacity(m);
    for (group, &take) in members.iter().zip(&alloc) {
        out.extend(index::sample(&mut rng, group.len(), take).into_iter().map(|k| group[k]));
    }
    Ok(out)
}

fn nearest(point: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, center) in centers.iter().enumerate() {
        let d = sq_dist(point, center);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

/// k-means++ seeding on the rows of `dataset`.
fn plus_plus<R: Rng>(dataset: &Dataset, k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let n = dataset.n();
    let mut chosen = vec![false; n];
    let first = rng.random_range(0..n);
    chosen[first] = true;
    let mut centers = vec![dataset.row(first).to_vec()];
    let mut dist: Vec<f64> = dataset.rows().map(|x| sq_dist(x, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = dist.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &d) in dist.iter().enumerate() {
                acc += d;
                if d > 0.0 && acc >= target {
                    pick = Some(i);
                    break;
                }
            }
            pick.unwrap_or_else(|| dist.iter().rposition(|&d| d > 0.0).expect("total > 0"))
        } else {
            // Every remaining point coincides with a center: take an unused one.
            let free: Vec<usize> = (0..n).filter(|&i| !chosen[i]).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen[next] = true;
        let c = dataset.row(next).to_vec();
        for (d, x) in dist.iter_mut().zip(dataset.rows()) {
            *d = d.min(sq_dist(x, &c));
        }
        centers.push(c);
    }
    centers
}

/// k-means++ and Lloyd iterations with `m` clusters; each centroid, in order,
/// claims its nearest point not already claimed.
pub fn kmeans(dataset: &Dataset, m: usize, seed: u64, iters: usize) -> Result<Vec<usize>> {
    check_budget(dataset, m)?;
    let (n, d) = (dataset.n(), dataset.d());
    let mut rng = stream_rng(seed, 0);
    let mut centers = plus_plus(dataset, m, &mut rng);

    let mut assign = vec![0usize; n];
    for _ in 0..iters {
        for (a, x) in assign.iter_mut().zip(dataset.rows()) {
            *a = nearest(x, &centers).0;
        }
        let mut sums = vec![vec![0.0; d]; m];
        let mut counts = vec![0usize; m];
        for (&a, x) in assign.iter().zip(dataset.rows()) {
            counts[a] += 1;
            for (s, v) in sums[a].iter_mut().zip(x) {
                *s += v;
            }
        }
        let mut shift: f64 = 0.0;
        for c in 0..m {
            // Empty clusters keep their previous centroid.
            if counts[c] == 0 {
                continue;
            }
            let new: Vec<f64> = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            shift = shift.max(sq_dist(&new, &centers[c]).sqrt());
            centers[c] = new;
        }
        if shift <= KMEANS_TOL {
            break;
        }
    }

    let mut taken = vec![false; n];
    let mut out = Vec::with_capacity(m);
    for c in &centers {
        let mut best = (usize::MAX, f64::INFINITY);
        for (i, x) in dataset.rows().enumerate() {
            if taken[i] {
                continue;
            }
            let dd = sq_dist(x, c);
            if dd < best.1 {
                best = (i, dd);
            }
        }
        taken[best.0] = true;
        out.push(best.0);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn distinct_in_range(idx: &[usize], n: usize) -> bool {
        let mut s = idx.to_vec();
        s.sort_unstable();
        s.dedup();
        s.len() == idx.len() && idx.iter().all(|&i| i < n)
    }

    fn grid(n: usize) -> Dataset {
        let rows: Vec<[f64; 2]> = (0..n).map(|i| [(i % 7) as f64, (i / 7) as f64 * 0.5]).collect();
        Dataset::from_rows(&rows).unwrap()
    }

    #[test]
    fn random_permutation() {
        let ds = grid(20);
        let mut all = random(&ds, 20, 1).unwrap();
        all.sort_unstable();
        assert_eq!(all, (0..20).collect::<Vec<_>>());
        assert!(distinct_in_range(&random(&ds, 5, 2).unwrap(), 20));
        assert!(random(&ds, 21, 2).is_err());
    }

    #[test]
    fn stratified_balanced() {
        let ds = grid(8).with_labels(vec![0, 0, 0, 0, 1, 1, 1, 1]).unwrap();
        let idx = stratified(&ds, 4, 3).unwrap();
        assert_eq!(idx.iter().filter(|&&i| i < 4).count(), 2);
        assert_eq!(idx.iter().filter(|&&i| i >= 4).count(), 2);
        assert!(stratified(&grid(8), 4, 3).is_err());
        assert!(stratified(&ds, 1, 3).is_err());
    }

    #[test]
    fn apportionment_is_within_one() {
        for (sizes, m) in [(vec![5, 3, 2], 4), (vec![1, 1, 98], 7), (vec![10, 10, 10], 10), (vec![3], 3)] {
            let total: usize = sizes.iter().sum();
            let alloc = apportion(&sizes, m);
            assert_eq!(alloc.iter().sum::<usize>(), m);
            for (a, s) in alloc.iter().zip(&sizes) {
                let exact = (*s * m) as f64 / total as f64;
                assert!((*a as f64 - exact).abs() < 1.0);
                assert!(a <= s);
            }
        }
    }

    #[test]
    fn kmeans_all_points() {
        let ds = grid(12);
        let mut all = kmeans(&ds, 12, 4, DEFAULT_KMEANS_ITERS).unwrap();
        all.sort_unstable();
        assert_eq!(all, (0..12).collect::<Vec<_>>());
        let some = kmeans(&ds, 4, 4, DEFAULT_KMEANS_ITERS).unwrap();
        assert!(distinct_in_range(&some, 12));
        assert_eq!(some, kmeans(&ds, 4, 4, DEFAULT_KMEANS_ITERS).unwrap());
    }

    #[test]
    fn kmeans_with_duplicates() {
        let ds = Dataset::from_rows(&[[0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 1.0]]).unwrap();
        let mut idx = kmeans(&ds, 4, 0, 10).unwrap();
        idx.sort_unstable();
        assert_eq!(idx, vec![0, 1, 2, 3]);
    }
}
