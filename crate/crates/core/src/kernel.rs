//! Kernel evaluation, bandwidth selection and the per-dataset precomputation
//! (mean similarities, optional Gram cache) that the selection loop consumes.
//!
//! This is the only module that looks at raw feature geometry. Everything
//! downstream works through [`KernelContext`].

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major `n × d` feature matrix with optional integer class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    labels: Option<Vec<u32>>,
    n: usize,
    d: usize,
}

impl Dataset {
    pub fn new(features: Vec<f64>, n: usize, d: usize, labels: Option<Vec<u32>>) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::invalid(format!(
                "dataset must have n >= 1 and d >= 1 (got n = {n}, d = {d})"
            )));
        }
        if features.len() != n * d {
            return Err(Error::DimensionMismatch {
                expected: n * d,
                got: features.len(),
            });
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / d,
                col: pos % d,
            });
        }
        if let Some(l) = &labels {
            if l.len() != n {
                return Err(Error::invalid(format!("labels length {} does not match n = {n}", l.len())));
            }
        }
        Ok(Self { features, labels, n, d })
    }

    /// Builds a dataset from equal-length rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let d = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut features = Vec::with_capacity(rows.len() * d);
        for row in rows {
            let row = row.as_ref();
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: row.len(),
                });
            }
            features.extend_from_slice(row);
        }
        Self::new(features, rows.len(), d, None)
    }

    pub fn with_labels(self, labels: Vec<u32>) -> Result<Self> {
        Self::new(self.features, self.n, self.d, Some(labels))
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.features.chunks_exact(self.d)
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn labels(&self) -> Option<&[u32]> {
        self.labels.as_deref()
    }

    /// Copy of the rows at `indices`, labels carried along.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let mut features = Vec::with_capacity(indices.len() * self.d);
        for &i in indices {
            if i >= self.n {
                return Err(Error::invalid(format!("index {i} out of range for n = {}", self.n)));
            }
            features.extend_from_slice(self.row(i));
        }
        let labels = self.labels.as_ref().map(|l| indices.iter().map(|&i| l[i]).collect());
        Self::new(features, indices.len(), self.d, labels)
    }
}

/// Kernel family and its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    /// `exp(-‖x−y‖² / σ²)`
    Gaussian { sigma: f64 },
    /// `exp(-‖x−y‖ / σ)`
    Laplacian { sigma: f64 },
    /// `(⟨x,y⟩ + offset)^degree`; not characteristic.
    Polynomial { degree: u32, offset: f64 },
}

impl Default for KernelSpec {
    fn default() -> Self {
        KernelSpec::Gaussian { sigma: 1.0 }
    }
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Gaussian { sigma } | KernelSpec::Laplacian { sigma } => {
                if !(sigma.is_finite() && sigma > 0.0) {
                    return Err(Error::invalid(format!("bandwidth must be positive and finite, got {sigma}")));
                }
            }
            KernelSpec::Polynomial { degree, offset } => {
                if degree < 1 {
                    return Err(Error::invalid("polynomial degree must be >= 1"));
                }
                if !offset.is_finite() {
                    return Err(Error::invalid("polynomial offset must be finite"));
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelSpec::Gaussian { .. } => "gaussian",
            KernelSpec::Laplacian { .. } => "laplacian",
            KernelSpec::Polynomial { .. } => "polynomial",
        }
    }

    /// Whether the mean embedding is injective, i.e. MMD is a metric.
    pub fn is_characteristic(&self) -> bool {
        !matches!(self, KernelSpec::Polynomial { .. })
    }

    /// Same spec with the bandwidth replaced; polynomial kernels are returned unchanged.
    pub fn with_sigma(self, sigma: f64) -> Self {
        match self {
            KernelSpec::Gaussian { .. } => KernelSpec::Gaussian { sigma },
            KernelSpec::Laplacian { .. } => KernelSpec::Laplacian { sigma },
            p @ KernelSpec::Polynomial { .. } => p,
        }
    }

    pub fn sigma(&self) -> Option<f64> {
        match *self {
            KernelSpec::Gaussian { sigma } | KernelSpec::Laplacian { sigma } => Some(sigma),
            KernelSpec::Polynomial { .. } => None,
        }
    }

    /// Unchecked evaluation. Callers guarantee equal lengths and finite input.
    #[inline]
    pub(crate) fn eval_raw(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            KernelSpec::Gaussian { sigma } => (-sq_dist(x, y) / (sigma * sigma)).exp(),
            KernelSpec::Laplacian { sigma } => (-sq_dist(x, y).sqrt() / sigma).exp(),
            KernelSpec::Polynomial { degree, offset } => {
                let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
                (dot + offset).powi(degree as i32)
            }
        }
    }
}

#[inline]
pub(crate) fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| {
            let t = a - b;
            t * t
        })
        .sum()
}

/// Evaluates `k(x, y)` after validating both vectors and the spec.
pub fn kernel_eval(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    spec.validate()?;
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    for (row, v) in [x, y].into_iter().enumerate() {
        if let Some(col) = v.iter().position(|t| !t.is_finite()) {
            return Err(Error::NonFinite { row, col });
        }
    }
    Ok(spec.eval_raw(x, y))
}

/// Subsampling policy for the median heuristic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MedianOptions {
    /// Above this many points, the median is taken over all pairs of a
    /// uniformly drawn subset of this size.
    pub max_points: usize,
    pub seed: u64,
}

impl Default for MedianOptions {
    fn default() -> Self {
        Self {
            max_points: 10_000,
            seed: 0,
        }
    }
}

/// Median pairwise Euclidean distance over unordered pairs `i < j`.
pub fn median_bandwidth(dataset: &Dataset) -> Result<f64> {
    median_bandwidth_with(dataset, MedianOptions::default())
}

pub fn median_bandwidth_with(dataset: &Dataset, opts: MedianOptions) -> Result<f64> {
    let n = dataset.n();
    if n < 2 {
        return Err(Error::invalid("median bandwidth needs at least 2 points"));
    }
    let points: Vec<usize> = if opts.max_points >= 2 && n > opts.max_points {
        let mut rng = ChaCha20Rng::seed_from_u64(opts.seed);
        let mut idx = rand::seq::index::sample(&mut rng, n, opts.max_points).into_vec();
        idx.sort_unstable();
        idx
    } else {
        (0..n).collect()
    };
    let pairs = points.len() * (points.len() - 1) / 2;

    // Squared distances preserve order, so select on those and take roots at the end.
    let visit = |f: &mut dyn FnMut(f64)| {
        for (a, &i) in points.iter().enumerate() {
            let xi = dataset.row(i);
            for &j in &points[a + 1..] {
                f(sq_dist(xi, dataset.row(j)));
            }
        }
    };
    let hi = pairs / 2;
    let median = if pairs % 2 == 1 {
        kth_smallest(pairs, hi, &visit).sqrt()
    } else {
        let a = kth_smallest(pairs, hi - 1, &visit).sqrt();
        let b = kth_smallest(pairs, hi, &visit).sqrt();
        0.5 * (a + b)
    };
    if median <= 0.0 {
        return Err(Error::Degenerate("median pairwise distance is zero".into()));
    }
    Ok(median)
}

const COLLECT_LIMIT: usize = 1 << 22;
const BUCKETS: usize = 1 << 16;

/// Feeds every value of the stream to the callback, in a fixed order.
type Replay<'a> = &'a dyn Fn(&mut dyn FnMut(f64));

/// Exact k-th order statistic (0-based) of a stream that can be replayed.
///
/// Small streams are collected and selected directly. Larger ones are
/// narrowed with histogram passes until the target bucket fits in memory.
fn kth_smallest(count: usize, k: usize, visit: Replay<'_>) -> f64 {
    if count <= COLLECT_LIMIT {
        let mut all = Vec::with_capacity(count);
        visit(&mut |v| all.push(v));
        let (_, kth, _) = all.select_nth_unstable_by(k, f64::total_cmp);
        return *kth;
    }

    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    visit(&mut |v| {
        lo = lo.min(v);
        hi = hi.max(v);
    });
    // Each level keeps (lo, hi, bucket); a value survives if it lands in the
    // chosen bucket at every level under the same index formula.
    let mut levels: Vec<(f64, f64, usize)> = Vec::new();
    let mut rank = k;
    loop {
        if lo == hi {
            return lo;
        }
        let bucket_of = move |v: f64| -> usize {
            let t = ((v - lo) / (hi - lo) * BUCKETS as f64) as usize;
            t.min(BUCKETS - 1)
        };
        let survives = |levels: &[(f64, f64, usize)], v: f64| {
            levels
                .iter()
                .all(|&(l, h, b)| v >= l && v <= h && ((((v - l) / (h - l)) * BUCKETS as f64) as usize).min(BUCKETS - 1) == b)
        };
        let mut hist = vec![0usize; BUCKETS];
        visit(&mut |v| {
            if survives(&levels, v) {
                hist[bucket_of(v)] += 1;
            }
        });
        let mut acc = 0usize;
        let mut chosen = BUCKETS - 1;
        for (b, &c) in hist.iter().enumerate() {
            if acc + c > rank {
                chosen = b;
                break;
            }
            acc += c;
        }
        rank -= acc;
        let width = (hi - lo) / BUCKETS as f64;
        let (blo, bhi) = (lo + chosen as f64 * width, lo + (chosen + 1) as f64 * width);
        levels.push((lo, hi, chosen));
        if hist[chosen] <= COLLECT_LIMIT {
            let mut keep = Vec::with_capacity(hist[chosen]);
            visit(&mut |v| {
                if survives(&levels, v) {
                    keep.push(v);
                }
            });
            let (_, kth, _) = keep.select_nth_unstable_by(rank, f64::total_cmp);
            return *kth;
        }
        // Bucket bounds are only used as the next histogram range; membership
        // stays defined by the recorded levels.
        lo = blo.max(lo);
        hi = bhi.min(hi);
    }
}

/// Immutable per-dataset kernel state: mean similarities, `K̄`, `K` and an
/// optional dense Gram matrix.
#[derive(Debug, Clone)]
pub struct KernelContext {
    dataset: Arc<Dataset>,
    kernel: KernelSpec,
    mu: Vec<f64>,
    gram: Option<Vec<f64>>,
    kbar: f64,
    kmax: f64,
}

impl KernelContext {
    /// Computes `mu[i] = (1/n) Σ_j k(x_j, x_i)` with a fixed left-to-right
    /// order per row. Rows are evaluated in parallel.
    pub fn build(dataset: impl Into<Arc<Dataset>>, kernel: KernelSpec, cache_gram: bool) -> Result<Self> {
        let dataset = dataset.into();
        kernel.validate()?;
        let n = dataset.n();
        let ds = &*dataset;

        let (mu, gram): (Vec<f64>, _) = if cache_gram {
            let mut gram = vec![0.0; n * n];
            gram.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
                let xi = ds.row(i);
                for (j, slot) in row.iter_mut().enumerate() {
                    *slot = kernel.eval_raw(ds.row(j), xi);
                }
            });
            let mu = gram.par_chunks(n).map(|row| row.iter().sum::<f64>() / n as f64).collect();
            (mu, Some(gram))
        } else {
            let mu = (0..n)
                .into_par_iter()
                .map(|i| {
                    let xi = ds.row(i);
                    ds.rows().map(|xj| kernel.eval_raw(xj, xi)).sum::<f64>() / n as f64
                })
                .collect();
            (mu, None)
        };

        let kbar = mu.iter().sum::<f64>() / n as f64;
        let kmax = match kernel {
            KernelSpec::Gaussian { .. } | KernelSpec::Laplacian { .. } => 1.0,
            KernelSpec::Polynomial { .. } => ds.rows().map(|x| kernel.eval_raw(x, x)).fold(f64::NEG_INFINITY, f64::max),
        };

        Ok(Self {
            dataset,
            kernel,
            mu,
            gram,
            kbar,
            kmax,
        })
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    pub fn shared_dataset(&self) -> Arc<Dataset> {
        Arc::clone(&self.dataset)
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.dataset.n()
    }

    /// Mean similarity of each point to the whole dataset.
    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    /// Mean of all `n²` Gram entries.
    pub fn kbar(&self) -> f64 {
        self.kbar
    }

    /// Upper bound on `k(x, x)`; 1 for the radial kernels, the data maximum
    /// for the polynomial kernel.
    pub fn kmax(&self) -> f64 {
        self.kmax
    }

    pub fn has_gram(&self) -> bool {
        self.gram.is_some()
    }

    pub fn gram(&self) -> Option<&[f64]> {
        self.gram.as_deref()
    }

    #[inline]
    pub fn k(&self, i: usize, j: usize) -> f64 {
        match &self.gram {
            Some(g) => g[i * self.n() + j],
            None => self.kernel.eval_raw(self.dataset.row(i), self.dataset.row(j)),
        }
    }

    /// Fills `out[j] = k(x_i, x_j)`.
    pub fn row_into(&self, i: usize, out: &mut [f64]) {
        let n = self.n();
        debug_assert_eq!(out.len(), n);
        match &self.gram {
            Some(g) => out.copy_from_slice(&g[i * n..(i + 1) * n]),
            None => {
                let xi = self.dataset.row(i);
                for (slot, xj) in out.iter_mut().zip(self.dataset.rows()) {
                    *slot = self.kernel.eval_raw(xi, xj);
                }
            }
        }
    }
}

/// Convenience wrapper matching the free-function style used elsewhere.
pub fn build_context(dataset: impl Into<Arc<Dataset>>, kernel: KernelSpec, cache_gram: bool) -> Result<KernelContext> {
    KernelContext::build(dataset, kernel, cache_gram)
}
