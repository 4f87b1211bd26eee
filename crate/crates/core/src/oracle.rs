//! Slow reference computations: exhaustive subset search, the affine-optimal
//! weight vector, bound constants and the α-vs-classical MMD deviation check.
//!
//! Nothing on the fast path calls into this module.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::discrepancy::{alpha_mmd_sq, mmd_sq, AlphaParam, WeightVector};
use crate::error::{Error, Result};
use crate::herding::{gkh, gkhr};
use crate::kernel::KernelContext;

/// Maximum number of candidate index sets [`exhaustive_min`] will enumerate.
pub const ENUMERATION_LIMIT: u128 = 1_000_000;

/// Largest ground set accepted by [`optimal_affine_weights`].
pub const AFFINE_MAX_N: usize = 500;

/// Condition number above which the Gram matrix is treated as singular.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub best_indices: Vec<usize>,
    pub best_value: f64,
    pub enumerated: u64,
    pub greedy_indices: Vec<usize>,
    pub greedy_value: f64,
    /// `greedy_value − best_value`; never below `−1e−10`.
    pub gap: f64,
    pub replacement: bool,
    pub alpha: f64,
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // Exact: acc·(n−i) is divisible by (i+1) at every step.
        acc = match acc.checked_mul(n - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Number of candidates `exhaustive_min` would examine.
pub fn candidate_count(n: usize, m: usize, replacement: bool) -> u128 {
    if replacement {
        binomial((n + m - 1) as u128, m as u128)
    } else if m > n {
        0
    } else {
        binomial(n as u128, m as u128)
    }
}

/// Advances `idx` to the next size-m combination (or multiset when
/// `replacement`) in lexicographic order. Returns false when exhausted.
fn advance(idx: &mut [usize], n: usize, replacement: bool) -> bool {
    let m = idx.len();
    for pos in (0..m).rev() {
        let limit = if replacement { n - 1 } else { n - m + pos };
        if idx[pos] < limit {
            idx[pos] += 1;
            for q in pos + 1..m {
                idx[q] = if replacement { idx[pos] } else { idx[q - 1] + 1 };
            }
            return true;
        }
    }
    false
}

/// Minimizes α-MMD² over every size-m subset (or multiset) by enumeration,
/// and compares against the greedy selection on the same instance.
pub fn exhaustive_min(ctx: &KernelContext, m: usize, alpha: f64, replacement: bool) -> Result<OracleReport> {
    let n = ctx.n();
    if m < 1 {
        return Err(Error::invalid("budget m must be >= 1"));
    }
    if !replacement && m > n {
        return Err(Error::BudgetExceedsGroundSet { m, n });
    }
    let count = candidate_count(n, m, replacement);
    if count > ENUMERATION_LIMIT {
        return Err(Error::GuardExceeded {
            count,
            limit: ENUMERATION_LIMIT,
        });
    }

    let mut idx: Vec<usize> = if replacement { vec![0; m] } else { (0..m).collect() };
    let mut best_indices = idx.clone();
    let mut best_value = f64::INFINITY;
    let mut enumerated = 0u64;
    loop {
        enumerated += 1;
        let v = alpha_mmd_sq(ctx, &idx, alpha)?;
        // Strict comparison keeps the lexicographically first minimizer.
        if v < best_value {
            best_value = v;
            best_indices.copy_from_slice(&idx);
        }
        if !advance(&mut idx, n, replacement) {
            break;
        }
    }

    let param = AlphaParam::explicit(alpha)?;
    let greedy = if replacement {
        gkh(ctx, m, param)?
    } else {
        gkhr(ctx, m, param)?
    };
    Ok(OracleReport {
        gap: greedy.final_alpha_mmd_sq - best_value,
        best_indices,
        best_value,
        enumerated,
        greedy_indices: greedy.indices,
        greedy_value: greedy.final_alpha_mmd_sq,
        replacement,
        alpha,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AffineWeights {
    pub weights: WeightVector,
    /// Diagonal jitter added before factorizing (0 when none was needed).
    pub jitter: f64,
    /// Condition estimate of the Gram matrix before jitter.
    pub condition: f64,
}

fn gram_matrix(ctx: &KernelContext) -> DMatrix<f64> {
    let n = ctx.n();
    match ctx.gram() {
        Some(g) => DMatrix::from_row_slice(n, n, g),
        None => DMatrix::from_fn(n, n, |i, j| ctx.k(i, j)),
    }
}

/// Extreme eigenvalues `(min, max)` of the Gram matrix.
pub fn gram_eigen_range(ctx: &KernelContext) -> (f64, f64) {
    let eig = SymmetricEigen::new(gram_matrix(ctx));
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let max = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (min, max)
}

/// Smallest eigenvalue of the Gram matrix.
pub fn min_eigenvalue(ctx: &KernelContext) -> f64 {
    gram_eigen_range(ctx).0
}

/// Closed-form minimizer of the weighted α-MMD² under `1ᵀw = 1` (no sign
/// constraint):
///
/// `ŵ = α·(K⁻¹p − K⁻¹1·(1ᵀK⁻¹p)/(1ᵀK⁻¹1)) + K⁻¹1/(1ᵀK⁻¹1)`
///
/// With `allow_jitter`, an ill-conditioned Gram gets `1e−10·K` added to its
/// diagonal instead of failing.
pub fn optimal_affine_weights(ctx: &KernelContext, alpha: f64, allow_jitter: bool) -> Result<AffineWeights> {
    let n = ctx.n();
    if n > AFFINE_MAX_N {
        return Err(Error::invalid(format!(
            "affine optimum is limited to n <= {AFFINE_MAX_N} (got {n})"
        )));
    }
    AlphaParam::explicit(alpha)?;
    let mut k = gram_matrix(ctx);
    let (lo, hi) = gram_eigen_range(ctx);
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };

    let mut jitter = 0.0;
    if condition > MAX_CONDITION {
        if !allow_jitter {
            return Err(Error::IllConditioned { condition });
        }
        jitter = 1e-10 * ctx.kmax();
        for i in 0..n {
            k[(i, i)] += jitter;
        }
    }
    let chol = k.cholesky().ok_or(Error::IllConditioned { condition })?;

    let ones = DVector::from_element(n, 1.0);
    let p = DVector::from_column_slice(ctx.mu());
    let kinv_one = chol.solve(&ones);
    let kinv_p = chol.solve(&p);
    let denom = kinv_one.sum();
    let shift = kinv_p.sum() / denom;
    let w: Vec<f64> = (0..n)
        .map(|i| alpha * (kinv_p[i] - shift * kinv_one[i]) + kinv_one[i] / denom)
        .collect();
    Ok(AffineWeights {
        weights: WeightVector::new(w)?,
        jitter,
        condition,
    })
}

/// Constants of the greedy finite-sample bound
/// `α-MMD² ≤ C²_α + B·(2 + ln m)/(m + 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    /// `(1 − α)²·K̄`
    pub c_alpha_sq: f64,
    /// `2·K`
    pub b: f64,
    pub rhs: f64,
    /// Logarithm base used in `rhs`; always `"ln"`.
    pub log: String,
}

pub fn bound_constants(ctx: &KernelContext, alpha: f64, m: usize) -> Result<BoundConstants> {
    if m < 1 {
        return Err(Error::invalid("budget m must be >= 1"));
    }
    let c_alpha_sq = (1.0 - alpha) * (1.0 - alpha) * ctx.kbar();
    let b = 2.0 * ctx.kmax();
    let mf = m as f64;
    Ok(BoundConstants {
        c_alpha_sq,
        b,
        rhs: c_alpha_sq + b * (2.0 + mf.ln()) / (mf + 1.0),
        log: "ln".into(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationCheck {
    /// `|√α-MMD² − √MMD²|`
    pub lhs: f64,
    /// `(1 − α)·√K`
    pub rhs: f64,
    pub margin: f64,
    pub pass: bool,
}

/// Checks that α-MMD and classical MMD differ by at most `(1 − α)·√K`.
pub fn mmd_deviation_bound_check(ctx: &KernelContext, indices: &[usize], alpha: f64) -> Result<DeviationCheck> {
    let a = alpha_mmd_sq(ctx, indices, alpha)?.max(0.0).sqrt();
    let c = mmd_sq(ctx, indices)?.max(0.0).sqrt();
    let lhs = (a - c).abs();
    let rhs = (1.0 - alpha) * ctx.kmax().sqrt();
    Ok(DeviationCheck {
        lhs,
        rhs,
        margin: rhs - lhs,
        pass: lhs <= rhs + 1e-9,
    })
}
