//! Wall-clock scaling harness for the selection loop.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::discrepancy::AlphaParam;
use crate::error::{Error, Result};
use crate::herding::gkhr;
use crate::kernel::{median_bandwidth_with, KernelContext, KernelSpec, MedianOptions};
use crate::synthbench::{sample, DistributionSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingCell {
    pub n: usize,
    pub m: usize,
    /// Selection-loop time of each run, milliseconds.
    pub select_ms: Vec<f64>,
    pub select_median_ms: f64,
    /// Context construction (mean similarities) of each run, milliseconds.
    pub build_ms: Vec<f64>,
    pub build_median_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRatio {
    pub n_from: usize,
    pub n_to: usize,
    /// `select_median(n_to) / select_median(n_from)`
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingTable {
    pub distribution: DistributionSpec,
    pub m: usize,
    pub runs: usize,
    pub seed: u64,
    pub cells: Vec<TimingCell>,
    pub ratios: Vec<TimingRatio>,
}

fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len() / 2;
    if v.len() % 2 == 1 {
        v[k]
    } else {
        0.5 * (v[k - 1] + v[k])
    }
}

/// Times lazy-kernel GKHR with α = 1 − 1/√m on one sample per `n`.
///
/// Context builds are timed per `n` first. The selection runs are then
/// interleaved round-robin across `n` (after one untimed warm-up each), so a
/// shift in machine speed during the harness hits every size alike instead
/// of skewing the ratio between two of them.
pub fn run_timing(distribution: &DistributionSpec, ns: &[usize], m: usize, seed: u64, runs: usize) -> Result<TimingTable> {
    if runs < 1 || ns.is_empty() {
        return Err(Error::invalid("timing needs at least one n and one run"));
    }
    let alpha = AlphaParam::auto_budget(m)?;
    let mut contexts = Vec::with_capacity(ns.len());
    let mut build_ms = Vec::with_capacity(ns.len());
    for &n in ns {
        if m > n {
            return Err(Error::BudgetExceedsGroundSet { m, n });
        }
        let ds = std::sync::Arc::new(sample(distribution, n, seed)?);
        let sigma = median_bandwidth_with(
            &ds,
            MedianOptions {
                seed,
                ..MedianOptions::default()
            },
        )?;
        let kernel = KernelSpec::Gaussian { sigma };
        let mut times = Vec::with_capacity(runs);
        let mut ctx = None;
        for _ in 0..runs {
            let t = Instant::now();
            ctx = Some(KernelContext::build(ds.clone(), kernel, false)?);
            times.push(t.elapsed().as_secs_f64() * 1e3);
        }
        contexts.push(ctx.expect("runs >= 1"));
        build_ms.push(times);
    }

    for ctx in &contexts {
        gkhr(ctx, m, alpha)?;
    }
    let mut select_ms = vec![Vec::with_capacity(runs); ns.len()];
    for _ in 0..runs {
        for (ctx, times) in contexts.iter().zip(&mut select_ms) {
            times.push(gkhr(ctx, m, alpha)?.wall_time.as_secs_f64() * 1e3);
        }
    }

    let cells: Vec<TimingCell> = ns
        .iter()
        .zip(select_ms)
        .zip(build_ms)
        .map(|((&n, select_ms), build_ms)| TimingCell {
            n,
            m,
            select_median_ms: median(&select_ms),
            build_median_ms: median(&build_ms),
            select_ms,
            build_ms,
        })
        .collect();
    let ratios = cells
        .windows(2)
        .map(|w| TimingRatio {
            n_from: w[0].n,
            n_to: w[1].n,
            ratio: w[1].select_median_ms / w[0].select_median_ms,
        })
        .collect();
    Ok(TimingTable {
        distribution: distribution.clone(),
        m,
        runs,
        seed,
        cells,
        ratios,
    })
}

impl TimingTable {
    /// Plain-text table for the terminal.
    pub fn render(&self) -> String {
        let mut out = format!("{:>8} {:>6} {:>14} {:>14}\n", "n", "m", "select_ms", "build_ms");
        for c in &self.cells {
            out.push_str(&format!(
                "{:>8} {:>6} {:>14.3} {:>14.3}\n",
                c.n, c.m, c.select_median_ms, c.build_median_ms
            ));
        }
        for r in &self.ratios {
            out.push_str(&format!("ratio {} -> {}: {:.3}\n", r.n_from, r.n_to, r.ratio));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_shape() {
        let t = run_timing(&DistributionSpec::uniform_square(), &[100, 200], 10, 1, 3).unwrap();
        assert_eq!(t.cells.len(), 2);
        assert_eq!(t.ratios.len(), 1);
        for c in &t.cells {
            assert_eq!(c.select_ms.len(), 3);
            assert_eq!(c.build_ms.len(), 3);
        }
        assert!(t.render().contains("ratio 100 -> 200"));
        assert!(run_timing(&DistributionSpec::uniform_square(), &[5], 10, 1, 3).is_err());
    }

    #[test]
    fn median_of_runs() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0]), 2.5);
    }
}
