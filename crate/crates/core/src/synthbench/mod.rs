//! Synthetic 2-D distributions and the with- vs without-replacement
//! comparison harness.
//!
//! Randomness comes from ChaCha20 (`rand_chacha`) with one master seed;
//! every (distribution, n, run) job draws from its own stream id, so jobs
//! are independent and can run in any order.

pub mod baselines;

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discrepancy::AlphaParam;
use crate::error::{Error, Result};
use crate::herding::{gkh, gkhr, AlphaChoice};
use crate::kernel::{median_bandwidth_with, Dataset, KernelContext, KernelSpec, MedianOptions};

/// Identifies the generator in every report.
pub const GENERATOR: &str = "chacha20/rand_chacha-0.9/stream-per-job";

/// Axis-aligned Gaussian component of a 2-D mixture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianComponent {
    pub mean: [f64; 2],
    /// Per-axis variances (diagonal covariance).
    pub var: [f64; 2],
    pub weight: f64,
}

const MIXTURE_MEANS: [[f64; 2]; 4] = [[1.0, 2.0], [-3.0, -5.0], [-5.0, 4.0], [15.0, 10.0]];
const MIXTURE_VARS: [[f64; 2]; 4] = [[2.0, 5.0], [1.0, 2.0], [8.0, 6.0], [4.0, 9.0]];

fn mixture(weights: [f64; 4]) -> Vec<GaussianComponent> {
    (0..4)
        .map(|i| GaussianComponent {
            mean: MIXTURE_MEANS[i],
            var: MIXTURE_VARS[i],
            weight: weights[i],
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionSpec {
    /// Four-component mixture dominated by its first component.
    Gmm1,
    /// The same four components with balanced weights.
    Gmm2,
    /// Uniform disc around the origin plus a uniform annulus.
    CircleAnnulus {
        disc_radius: f64,
        inner_radius: f64,
        outer_radius: f64,
        disc_weight: f64,
    },
    /// Uniform on `[-half_width, half_width]²`.
    UniformSquare {
        half_width: f64,
    },
    CustomGmm {
        components: Vec<GaussianComponent>,
    },
}

impl DistributionSpec {
    pub fn circle_annulus() -> Self {
        DistributionSpec::CircleAnnulus {
            disc_radius: 0.5,
            inner_radius: 4.0,
            outer_radius: 6.0,
            disc_weight: 0.5,
        }
    }

    pub fn uniform_square() -> Self {
        DistributionSpec::UniformSquare { half_width: 10.0 }
    }

    /// The four benchmark distributions.
    pub fn standard_set() -> Vec<Self> {
        vec![
            DistributionSpec::Gmm1,
            DistributionSpec::Gmm2,
            Self::circle_annulus(),
            Self::uniform_square(),
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            DistributionSpec::Gmm1 => "gmm1",
            DistributionSpec::Gmm2 => "gmm2",
            DistributionSpec::CircleAnnulus { .. } => "circle-annulus",
            DistributionSpec::UniformSquare { .. } => "uniform-square",
            DistributionSpec::CustomGmm { .. } => "custom-gmm",
        }
    }

    /// Parses the CLI names of the built-in distributions.
    pub fn from_name(name: &str) -> Result<Self> {
        Ok(match name {
            "gmm1" => DistributionSpec::Gmm1,
            "gmm2" => DistributionSpec::Gmm2,
            "circle-annulus" | "circle_annulus" => Self::circle_annulus(),
            "uniform-square" | "uniform_square" => Self::uniform_square(),
            other => return Err(Error::invalid(format!("unknown distribution '{other}'"))),
        })
    }

    /// Mixture components, for the Gaussian-mixture kinds.
    pub fn components(&self) -> Option<Vec<GaussianComponent>> {
        match self {
            DistributionSpec::Gmm1 => Some(mixture([0.95, 0.01, 0.02, 0.02])),
            DistributionSpec::Gmm2 => Some(mixture([0.3, 0.2, 0.15, 0.35])),
            DistributionSpec::CustomGmm { components } => Some(components.clone()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DistributionSpec::CircleAnnulus {
                disc_radius,
                inner_radius,
                outer_radius,
                disc_weight,
            } => {
                if !(*disc_radius > 0.0 && *inner_radius >= 0.0 && outer_radius > inner_radius) {
                    return Err(Error::invalid(
                        "circle-annulus radii must satisfy r > 0 and outer > inner >= 0",
                    ));
                }
                if !(0.0..=1.0).contains(disc_weight) {
                    return Err(Error::invalid("disc weight must lie in [0, 1]"));
                }
            }
            DistributionSpec::UniformSquare { half_width } => {
                if !(half_width.is_finite() && *half_width > 0.0) {
                    return Err(Error::invalid("half width must be positive"));
                }
            }
            _ => {
                let comps = self.components().unwrap_or_default();
                if comps.is_empty() {
                    return Err(Error::invalid("mixture needs at least one component"));
                }
                let total: f64 = comps.iter().map(|c| c.weight).sum();
                if comps.iter().any(|c| c.weight.is_nan() || c.weight < 0.0) || (total - 1.0).abs() > 1e-12 {
                    return Err(Error::invalid(format!(
                        "mixture weights must be nonnegative and sum to 1 (sum = {total})"
                    )));
                }
                for c in &comps {
                    if c.var.iter().any(|v| !(v.is_finite() && *v > 0.0)) || c.mean.iter().any(|v| !v.is_finite()) {
                        return Err(Error::invalid("component means must be finite and variances positive"));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Generator for stream `stream` under master seed `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn pick_component<R: Rng>(rng: &mut R, weights: impl Iterator<Item = f64>, count: usize) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, w) in weights.enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    count - 1
}

/// Draws `n` points from `spec`. Labels carry the mixture component (or
/// disc/annulus membership) each point came from.
pub fn sample_with_rng<R: Rng>(spec: &DistributionSpec, n: usize, rng: &mut R) -> Result<Dataset> {
    spec.validate()?;
    if n < 1 {
        return Err(Error::invalid("sample size must be >= 1"));
    }
    let mut features = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    match spec {
        DistributionSpec::CircleAnnulus {
            disc_radius,
            inner_radius,
            outer_radius,
            disc_weight,
        } => {
            for _ in 0..n {
                let in_disc = rng.random::<f64>() < *disc_weight;
                let u: f64 = rng.random();
                let theta = rng.random::<f64>() * std::f64::consts::TAU;
                // Inverse-CDF radius gives area-uniform points.
                let r = if in_disc {
                    disc_radius * u.sqrt()
                } else {
                    (u * (outer_radius * outer_radius - inner_radius * inner_radius) + inner_radius * inner_radius).sqrt()
                };
                features.push(r * theta.cos());
                features.push(r * theta.sin());
                labels.push(if in_disc { 0 } else { 1 });
            }
        }
        DistributionSpec::UniformSquare { half_width } => {
            for _ in 0..n {
                for _ in 0..2 {
                    features.push(rng.random_range(-half_width..=*half_width));
                }
            }
            return Dataset::new(features, n, 2, None);
        }
        _ => {
            let comps = spec.components().expect("mixture kinds have components");
            for _ in 0..n {
                let c = pick_component(rng, comps.iter().map(|c| c.weight), comps.len());
                let comp = &comps[c];
                for axis in 0..2 {
                    let z: f64 = rng.sample(StandardNormal);
                    features.push(comp.mean[axis] + comp.var[axis].sqrt() * z);
                }
                labels.push(c as u32);
            }
        }
    }
    Dataset::new(features, n, 2, Some(labels))
}

/// `n` i.i.d. draws, deterministic in `(spec, n, seed)`.
pub fn sample(spec: &DistributionSpec, n: usize, seed: u64) -> Result<Dataset> {
    sample_with_rng(spec, n, &mut stream_rng(seed, 0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DValue {
    pub value: f64,
    /// Both discrepancies were (numerically) zero.
    pub degenerate: bool,
}

/// `(d1 − d2)/(d1 + d2)`: positive when the with-replacement run (d2) did better.
pub fn d_criterion(d1: f64, d2: f64) -> DValue {
    if d1 + d2 <= 1e-15 {
        return DValue {
            value: 0.0,
            degenerate: true,
        };
    }
    DValue {
        value: ((d1 - d2) / (d1 + d2)).clamp(-1.0, 1.0),
        degenerate: false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", content = "value", rename_all = "snake_case")]
pub enum BenchAlphaRule {
    Ratio,
    Auto,
    Explicit(f64),
}

impl BenchAlphaRule {
    fn choice(&self) -> AlphaChoice {
        match *self {
            BenchAlphaRule::Ratio => AlphaChoice::Ratio,
            BenchAlphaRule::Auto => AlphaChoice::Auto,
            BenchAlphaRule::Explicit(a) => AlphaChoice::Explicit(a),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub distributions: Vec<DistributionSpec>,
    pub ns: Vec<usize>,
    pub budget_fracs: Vec<f64>,
    pub runs: usize,
    pub alpha_rule: BenchAlphaRule,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            distributions: DistributionSpec::standard_set(),
            ns: vec![1000, 3000],
            budget_fracs: vec![0.01, 0.05, 0.1, 0.2],
            runs: 10,
            alpha_rule: BenchAlphaRule::Ratio,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub stream: u64,
    pub sigma: f64,
    /// Without-replacement α-MMD².
    pub d1: f64,
    /// With-replacement α-MMD².
    pub d2: f64,
    pub d: f64,
    pub degenerate: bool,
    pub gkhr_ms: f64,
    pub gkh_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchCell {
    pub distribution: DistributionSpec,
    pub n: usize,
    pub m: usize,
    pub budget_frac: f64,
    pub alpha: AlphaParam,
    pub d_values: Vec<f64>,
    pub d_mean: f64,
    /// Sample standard deviation (n − 1 denominator); 0 for a single run.
    pub d_std: f64,
    pub runs: Vec<RunRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub schema_version: String,
    pub generator: String,
    pub config: BenchConfig,
    pub cells: Vec<BenchCell>,
}

impl BenchReport {
    /// Copy with all timing fields zeroed, for determinism comparisons.
    pub fn without_timings(&self) -> Self {
        let mut r = self.clone();
        for c in &mut r.cells {
            for run in &mut c.runs {
                run.gkhr_ms = 0.0;
                run.gkh_ms = 0.0;
            }
        }
        r
    }

    /// One CSV row per (cell, run).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("distribution,n,m,budget_frac,alpha,run,stream,sigma,d1,d2,d,degenerate,gkhr_ms,gkh_ms\n");
        for c in &self.cells {
            for r in &c.runs {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                    c.distribution.name(),
                    c.n,
                    c.m,
                    c.budget_frac,
                    c.alpha.value,
                    r.run,
                    r.stream,
                    r.sigma,
                    r.d1,
                    r.d2,
                    r.d,
                    r.degenerate,
                    r.gkhr_ms,
                    r.gkh_ms
                ));
            }
        }
        out
    }
}

/// Budget for a fraction of `n`, at least 1.
pub fn budget_for(n: usize, frac: f64) -> usize {
    ((n as f64 * frac).round() as usize).clamp(1, n)
}

/// Stream id of one (distribution, n, run) job.
fn job_stream(dist: usize, n_idx: usize, run: usize) -> u64 {
    ((dist as u64) << 40) | ((n_idx as u64) << 20) | run as u64
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (xs.len() - 1) as f64;
    (mean, var.sqrt())
}

/// Runs both herding variants on fresh samples for every
/// (distribution, n, budget fraction) cell and aggregates the D criterion.
///
/// One dataset and kernel context is drawn per (distribution, n, run) and
/// shared by all budget fractions of that job.
pub fn run_comparison(config: &BenchConfig) -> Result<BenchReport> {
    if config.runs < 1 {
        return Err(Error::invalid("runs must be >= 1"));
    }
    if config.ns.is_empty() || config.budget_fracs.is_empty() || config.distributions.is_empty() {
        return Err(Error::invalid("bench needs at least one distribution, n and budget fraction"));
    }
    for &f in &config.budget_fracs {
        if !(f > 0.0 && f <= 1.0) {
            return Err(Error::invalid(format!("budget fraction must lie in (0, 1], got {f}")));
        }
        if f > 0.2 {
            log::warn!("budget fraction {f} is above the low-budget regime (0.2)");
        }
    }
    for d in &config.distributions {
        d.validate()?;
    }

    let jobs: Vec<(usize, usize, usize)> = (0..config.distributions.len())
        .flat_map(|d| (0..config.ns.len()).flat_map(move |ni| (0..config.runs).map(move |r| (d, ni, r))))
        .collect();

    // Each job yields one RunRecord per budget fraction.
    let outcomes: Vec<Result<Vec<(AlphaParam, RunRecord)>>> = jobs
        .par_iter()
        .map(|&(di, ni, run)| {
            let stream = job_stream(di, ni, run);
            let n = config.ns[ni];
            let mut rng = stream_rng(config.seed, stream);
            let ds = sample_with_rng(&config.distributions[di], n, &mut rng)?;
            let sigma = median_bandwidth_with(
                &ds,
                MedianOptions {
                    seed: config.seed ^ stream,
                    ..MedianOptions::default()
                },
            )?;
            let ctx = KernelContext::build(ds, KernelSpec::Gaussian { sigma }, false)?;
            config
                .budget_fracs
                .iter()
                .map(|&frac| {
                    let m = budget_for(n, frac);
                    let alpha = config.alpha_rule.choice().resolve(m, n)?;
                    let t = Instant::now();
                    let without = gkhr(&ctx, m, alpha)?;
                    let gkhr_ms = t.elapsed().as_secs_f64() * 1e3;
                    let t = Instant::now();
                    let with = gkh(&ctx, m, alpha)?;
                    let gkh_ms = t.elapsed().as_secs_f64() * 1e3;
                    let d = d_criterion(without.final_alpha_mmd_sq, with.final_alpha_mmd_sq);
                    Ok((
                        alpha,
                        RunRecord {
                            run,
                            stream,
                            sigma,
                            d1: without.final_alpha_mmd_sq,
                            d2: with.final_alpha_mmd_sq,
                            d: d.value,
                            degenerate: d.degenerate,
                            gkhr_ms,
                            gkh_ms,
                        },
                    ))
                })
                .collect()
        })
        .collect();

    // `jobs` is ordered (dist, n, run), so the aggregation below is
    // independent of execution order.
    let mut per_job = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        per_job.push(o?);
    }
    let mut cells = Vec::new();
    for (di, dist) in config.distributions.iter().enumerate() {
        for (ni, &n) in config.ns.iter().enumerate() {
            for (fi, &frac) in config.budget_fracs.iter().enumerate() {
                let mut alpha = None;
                let mut runs = Vec::with_capacity(config.runs);
                for (job, rec) in jobs.iter().zip(&per_job) {
                    if job.0 == di && job.1 == ni {
                        alpha = Some(rec[fi].0);
                        runs.push(rec[fi].1.clone());
                    }
                }
                let d_values: Vec<f64> = runs.iter().map(|r| r.d).collect();
                let (d_mean, d_std) = mean_std(&d_values);
                cells.push(BenchCell {
                    distribution: dist.clone(),
                    n,
                    m: budget_for(n, frac),
                    budget_frac: frac,
                    alpha: alpha.expect("runs >= 1"),
                    d_values,
                    d_mean,
                    d_std,
                    runs,
                });
            }
        }
    }
    Ok(BenchReport {
        schema_version: "1".into(),
        generator: GENERATOR.into(),
        config: config.clone(),
        cells,
    })
}
