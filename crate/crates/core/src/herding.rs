//! Generalized kernel herding: greedy Frank-Wolfe minimization of α-MMD²
//! with replacement (GKH) and without replacement (GKHR).
//!
//! Each step picks `argmin_i S(x_i) − α·μ(x_i)`, where `S` is the running
//! average similarity to the points picked so far, then folds the new
//! point's kernel row into `S` with step size `1/p`. One step costs one
//! kernel row plus two linear scans, so `m` steps cost `O(mn)`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::discrepancy::{alpha_mmd_sq, AlphaParam, AlphaRule};
use crate::error::{Error, Result};
use crate::kernel::{median_bandwidth_with, Dataset, KernelContext, KernelSpec, MedianOptions};
use crate::synthbench::baselines;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Gkh,
    Gkhr,
    Random,
    Stratified,
    Kmeans,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Gkh => "gkh",
            Algorithm::Gkhr => "gkhr",
            Algorithm::Random => "random",
            Algorithm::Stratified => "stratified",
            Algorithm::Kmeans => "kmeans",
        }
    }

    pub fn is_herding(&self) -> bool {
        matches!(self, Algorithm::Gkh | Algorithm::Gkhr)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "gkh" => Algorithm::Gkh,
            "gkhr" => Algorithm::Gkhr,
            "random" => Algorithm::Random,
            "stratified" => Algorithm::Stratified,
            "kmeans" => Algorithm::Kmeans,
            other => return Err(Error::invalid(format!("unknown algorithm '{other}'"))),
        })
    }
}

/// Output of one selection run.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    /// Selected indices in pick order.
    pub indices: Vec<usize>,
    /// Winning score `S_{p−1}(x) − α·μ(x)` at each step (herding only).
    pub scores: Vec<f64>,
    pub alpha: AlphaParam,
    pub algorithm: Algorithm,
    /// α-MMD² of `indices`, recomputed from scratch.
    pub final_alpha_mmd_sq: f64,
    /// Time spent in the selection loop, excluding context construction.
    pub wall_time: Duration,
}

/// Incremental state of a herding run, stepped one pick at a time.
pub struct HerdingState<'a> {
    ctx: &'a KernelContext,
    alpha: f64,
    replacement: bool,
    running: Vec<f64>,
    taken: Vec<bool>,
    selected: Vec<usize>,
    scores: Vec<f64>,
}

impl<'a> HerdingState<'a> {
    pub fn new(ctx: &'a KernelContext, alpha: f64, replacement: bool) -> Self {
        let n = ctx.n();
        Self {
            ctx,
            alpha,
            replacement,
            running: vec![0.0; n],
            taken: vec![false; n],
            selected: Vec::new(),
            scores: Vec::new(),
        }
    }

    /// Number of picks so far.
    pub fn p(&self) -> usize {
        self.selected.len()
    }

    /// Running average similarity `S_p(x_i)` for every candidate.
    pub fn running_avg(&self) -> &[f64] {
        &self.running
    }

    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    /// Current score of candidate `i`.
    #[inline]
    pub fn score(&self, i: usize) -> f64 {
        self.running[i] - self.alpha * self.ctx.mu()[i]
    }

    /// Lowest-index minimizer of the current score over eligible candidates.
    pub fn next_candidate(&self) -> Option<usize> {
        let mu = self.ctx.mu();
        let mut best: Option<(usize, f64)> = None;
        for (i, (&s, &m)) in self.running.iter().zip(mu).enumerate() {
            if !self.replacement && self.taken[i] {
                continue;
            }
            let score = s - self.alpha * m;
            match best {
                Some((_, b)) if score >= b => {}
                _ => best = Some((i, score)),
            }
        }
        best.map(|(i, _)| i)
    }

    /// Performs one pick. Returns `None` once a without-replacement run has
    /// exhausted the ground set.
    pub fn step(&mut self) -> Option<usize> {
        let pick = self.next_candidate()?;
        self.scores.push(self.score(pick));
        self.selected.push(pick);
        self.taken[pick] = true;

        let beta = 1.0 / self.selected.len() as f64;
        // Every entry is updated, selected or not, so the loop has no branches.
        // Lazy rows are evaluated inside the update rather than staged in a
        // buffer: one pass over memory instead of two.
        match self.ctx.gram() {
            Some(g) => {
                let n = self.running.len();
                for (s, &k) in self.running.iter_mut().zip(&g[pick * n..(pick + 1) * n]) {
                    *s = (1.0 - beta) * *s + beta * k;
                }
            }
            None => {
                let kernel = *self.ctx.kernel();
                let ds = self.ctx.dataset();
                let xi = ds.row(pick);
                for (s, xj) in self.running.iter_mut().zip(ds.rows()) {
                    *s = (1.0 - beta) * *s + beta * kernel.eval_raw(xi, xj);
                }
            }
        }
        Some(pick)
    }

    pub fn into_parts(self) -> (Vec<usize>, Vec<f64>) {
        (self.selected, self.scores)
    }
}

fn run(ctx: &KernelContext, m: usize, alpha: AlphaParam, replacement: bool) -> Result<SelectionResult> {
    if m < 1 {
        return Err(Error::invalid("budget m must be >= 1"));
    }
    if !replacement && m > ctx.n() {
        return Err(Error::BudgetExceedsGroundSet { m, n: ctx.n() });
    }
    if !(0.0..=1.0).contains(&alpha.value) {
        return Err(Error::invalid(format!("alpha must lie in [0, 1], got {}", alpha.value)));
    }

    let start = Instant::now();
    let mut state = HerdingState::new(ctx, alpha.value, replacement);
    for _ in 0..m {
        state.step().expect("budget checked against ground set");
    }
    let wall_time = start.elapsed();

    let (indices, scores) = state.into_parts();
    let final_alpha_mmd_sq = alpha_mmd_sq(ctx, &indices, alpha.value)?;
    Ok(SelectionResult {
        indices,
        scores,
        alpha,
        algorithm: if replacement { Algorithm::Gkh } else { Algorithm::Gkhr },
        final_alpha_mmd_sq,
        wall_time,
    })
}

/// Herding without replacement: `m` distinct indices.
pub fn gkhr(ctx: &KernelContext, m: usize, alpha: AlphaParam) -> Result<SelectionResult> {
    run(ctx, m, alpha, false)
}

/// Herding with replacement: indices may repeat and `m` may exceed `n`.
pub fn gkh(ctx: &KernelContext, m: usize, alpha: AlphaParam) -> Result<SelectionResult> {
    run(ctx, m, alpha, true)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", content = "value", rename_all = "snake_case")]
pub enum BandwidthRule {
    Median,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaChoice {
    /// `1 − 1/√m`
    Auto,
    /// `m / n`
    Ratio,
    Explicit(f64),
}

impl AlphaChoice {
    pub fn resolve(&self, m: usize, n: usize) -> Result<AlphaParam> {
        match *self {
            AlphaChoice::Auto => AlphaParam::auto_budget(m),
            AlphaChoice::Ratio => AlphaParam::ratio(m, n),
            AlphaChoice::Explicit(a) => AlphaParam::explicit(a),
        }
    }
}

impl FromStr for AlphaChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(AlphaChoice::Auto),
            "ratio" => Ok(AlphaChoice::Ratio),
            v => v
                .parse::<f64>()
                .map_err(|_| Error::invalid(format!("alpha must be 'auto', 'ratio' or a number, got '{v}'")))
                .and_then(|a| AlphaParam::explicit(a).map(|_| AlphaChoice::Explicit(a))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SelectOptions {
    /// Kernel family; the bandwidth is replaced when `bandwidth` is `Median`.
    pub kernel: KernelSpec,
    pub bandwidth: BandwidthRule,
    pub alpha: AlphaChoice,
    pub algorithm: Algorithm,
    pub gram_cache: bool,
    pub seed: u64,
    pub median: MedianOptions,
    pub kmeans_iters: usize,
}

impl Default for SelectOptions {
    fn default() -> Self {
        Self {
            kernel: KernelSpec::default(),
            bandwidth: BandwidthRule::Median,
            alpha: AlphaChoice::Auto,
            algorithm: Algorithm::Gkhr,
            gram_cache: false,
            seed: 0,
            median: MedianOptions::default(),
            kmeans_iters: baselines::DEFAULT_KMEANS_ITERS,
        }
    }
}

/// A finished selection together with the kernel state it was scored under.
#[derive(Debug, Clone)]
pub struct Selection {
    pub result: SelectionResult,
    pub context: KernelContext,
    pub bandwidth: BandwidthRule,
}

/// End-to-end selection: resolves the bandwidth and α, builds the kernel
/// context, runs the algorithm and scores the result.
pub fn select(dataset: impl Into<Arc<Dataset>>, m: usize, opts: &SelectOptions) -> Result<Selection> {
    let dataset = dataset.into();
    let n = dataset.n();
    if m < 1 {
        return Err(Error::invalid("budget m must be >= 1"));
    }
    if m > n && opts.algorithm != Algorithm::Gkh {
        return Err(Error::BudgetExceedsGroundSet { m, n });
    }
    let alpha = opts.alpha.resolve(m, n)?;

    let kernel = match (opts.bandwidth, opts.kernel) {
        (_, k @ KernelSpec::Polynomial { .. }) => k,
        (BandwidthRule::Fixed(s), k) => k.with_sigma(s),
        (BandwidthRule::Median, k) => {
            let opts = MedianOptions {
                seed: opts.seed,
                ..opts.median
            };
            k.with_sigma(median_bandwidth_with(&dataset, opts)?)
        }
    };
    let ctx = KernelContext::build(Arc::clone(&dataset), kernel, opts.gram_cache)?;

    let result = match opts.algorithm {
        Algorithm::Gkhr => gkhr(&ctx, m, alpha)?,
        Algorithm::Gkh => gkh(&ctx, m, alpha)?,
        other => {
            let start = Instant::now();
            let indices = match other {
                Algorithm::Random => baselines::random(&dataset, m, opts.seed)?,
                Algorithm::Stratified => baselines::stratified(&dataset, m, opts.seed)?,
                Algorithm::Kmeans => baselines::kmeans(&dataset, m, opts.seed, opts.kmeans_iters)?,
                Algorithm::Gkh | Algorithm::Gkhr => unreachable!(),
            };
            let wall_time = start.elapsed();
            SelectionResult {
                final_alpha_mmd_sq: alpha_mmd_sq(&ctx, &indices, alpha.value)?,
                indices,
                scores: Vec::new(),
                alpha,
                algorithm: other,
                wall_time,
            }
        }
    };
    Ok(Selection {
        result,
        context: ctx,
        bandwidth: opts.bandwidth,
    })
}

impl AlphaRule {
    pub fn as_str(&self) -> &'static str {
        match self {
            AlphaRule::Explicit => "explicit",
            AlphaRule::AutoBudget => "auto_budget",
            AlphaRule::Ratio => "ratio",
        }
    }
}
