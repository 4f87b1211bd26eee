//! Exact evaluation of average similarity, MMD², α-MMD² and the weighted
//! quadratic form `wᵀKw − 2α·wᵀμ + α²·K̄`.
//!
//! Index sets have multiset semantics: a repeated index is counted with its
//! multiplicity, which is what with-replacement herding produces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::KernelContext;

/// Magnitude below which a squared discrepancy is reported as exactly zero.
pub const ZERO_CLAMP: f64 = 1e-12;

/// How an α value was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaRule {
    Explicit,
    /// `1 − 1/√m`
    AutoBudget,
    /// `m / n`
    Ratio,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaParam {
    pub value: f64,
    pub rule: AlphaRule,
}

impl AlphaParam {
    pub fn explicit(value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::invalid(format!("alpha must lie in [0, 1], got {value}")));
        }
        Ok(Self {
            value,
            rule: AlphaRule::Explicit,
        })
    }

    pub fn auto_budget(m: usize) -> Result<Self> {
        if m < 1 {
            return Err(Error::invalid("auto alpha needs m >= 1"));
        }
        Ok(Self {
            value: 1.0 - 1.0 / (m as f64).sqrt(),
            rule: AlphaRule::AutoBudget,
        })
    }

    pub fn ratio(m: usize, n: usize) -> Result<Self> {
        if n == 0 || m > n {
            return Err(Error::invalid(format!("ratio alpha needs m <= n (m = {m}, n = {n})")));
        }
        Ok(Self {
            value: m as f64 / n as f64,
            rule: AlphaRule::Ratio,
        })
    }
}

/// Affine weights over the ground set (`Σ w = 1`, entries may be negative).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        let sum: f64 = w.iter().sum();
        if w.is_empty() || (sum - 1.0).abs() > 1e-9 || w.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("weights must be finite and sum to 1 (sum = {sum})")));
        }
        Ok(Self(w))
    }

    /// `1/n` everywhere.
    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    /// `count(i)/m` for each index in the multiset.
    pub fn uniform_over(indices: &[usize], n: usize) -> Result<Self> {
        check_indices(indices, n)?;
        let mut w = vec![0.0; n];
        let step = 1.0 / indices.len() as f64;
        for &i in indices {
            w[i] += step;
        }
        Ok(Self(w))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }
}

fn check_indices(indices: &[usize], n: usize) -> Result<()> {
    if indices.is_empty() {
        return Err(Error::invalid("index set is empty"));
    }
    if let Some(&bad) = indices.iter().find(|&&i| i >= n) {
        return Err(Error::invalid(format!("index {bad} out of range for n = {n}")));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    Ok(())
}

#[inline]
pub(crate) fn clamp_zero(v: f64) -> f64 {
    if v.abs() <= ZERO_CLAMP {
        0.0
    } else {
        v
    }
}

/// `Σ_{a∈I} Σ_{b∈I} k(x_a, x_b)` using symmetry.
fn pair_sum(ctx: &KernelContext, indices: &[usize]) -> f64 {
    let mut total = 0.0;
    for (a, &i) in indices.iter().enumerate() {
        let mut off = 0.0;
        for &j in &indices[a + 1..] {
            off += ctx.k(i, j);
        }
        total += ctx.k(i, i) + 2.0 * off;
    }
    total
}

/// Average pairwise similarity `(1/m²) ΣΣ k(x_i, x_j)`, diagonal included.
pub fn avg_similarity(ctx: &KernelContext, indices: &[usize]) -> Result<f64> {
    check_indices(indices, ctx.n())?;
    let m = indices.len() as f64;
    Ok(pair_sum(ctx, indices) / (m * m))
}

/// Biased empirical MMD² between the subset and the full dataset.
pub fn mmd_sq(ctx: &KernelContext, indices: &[usize]) -> Result<f64> {
    alpha_mmd_sq(ctx, indices, 1.0)
}

/// `α²·K̄ + (1/m²)ΣΣ_{I} k − (2α/(mn)) Σ_i Σ_{j∈I} k`.
///
/// The cross term is evaluated through the cached mean similarities, so the
/// cost is `O(m²)` kernel evaluations.
pub fn alpha_mmd_sq(ctx: &KernelContext, indices: &[usize], alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_indices(indices, ctx.n())?;
    let m = indices.len() as f64;
    let self_term = pair_sum(ctx, indices) / (m * m);
    let mu = ctx.mu();
    let cross: f64 = indices.iter().map(|&j| mu[j]).sum();
    let cross = 2.0 * alpha / m * cross;
    Ok(clamp_zero(alpha * alpha * ctx.kbar() + self_term - cross))
}

/// `wᵀKw − 2α·wᵀμ + α²·K̄`. Rows are only evaluated for nonzero weights.
pub fn weighted_alpha_mmd_sq(ctx: &KernelContext, w: &WeightVector, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let n = ctx.n();
    let w = w.as_slice();
    if w.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: w.len(),
        });
    }
    let sum: f64 = w.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("weights must sum to 1 (sum = {sum})")));
    }
    let mut row = vec![0.0; n];
    let mut quad = 0.0;
    for (i, &wi) in w.iter().enumerate() {
        if wi == 0.0 {
            continue;
        }
        ctx.row_into(i, &mut row);
        let dot: f64 = row.iter().zip(w).map(|(k, wj)| k * wj).sum();
        quad += wi * dot;
    }
    let lin: f64 = w.iter().zip(ctx.mu()).map(|(a, b)| a * b).sum();
    Ok(clamp_zero(quad - 2.0 * alpha * lin + alpha * alpha * ctx.kbar()))
}

/// `λ = (1 − α) / (α·m)`, the diversity penalty matching a given α.
pub fn lambda_from_alpha(alpha: f64, m: usize) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid(format!(
            "lambda is undefined for alpha = {alpha}; need 0 < alpha <= 1"
        )));
    }
    if m < 1 {
        return Err(Error::invalid("m must be >= 1"));
    }
    Ok((1.0 - alpha) / (alpha * m as f64))
}

/// Inverse of [`lambda_from_alpha`]: `α = 1 / (1 + λ·m)`.
pub fn alpha_from_lambda(lambda: f64, m: usize) -> Result<f64> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!("lambda must be finite and >= 0, got {lambda}")));
    }
    if m < 1 {
        return Err(Error::invalid("m must be >= 1"));
    }
    Ok(1.0 / (1.0 + lambda * m as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{Dataset, KernelSpec};
    use approx::assert_abs_diff_eq;

    fn ctx(xs: &[f64], gram: bool) -> KernelContext {
        let ds = Dataset::new(xs.to_vec(), xs.len(), 1, None).unwrap();
        KernelContext::build(ds, KernelSpec::Gaussian { sigma: 1.0 }, gram).unwrap()
    }

    #[test]
    fn avg_similarity_examples() {
        let c = ctx(&[0.0, 1.0], false);
        assert_eq!(avg_similarity(&c, &[1]).unwrap(), 1.0);
        assert_abs_diff_eq!(avg_similarity(&c, &[0, 1]).unwrap(), 0.683940, epsilon = 1e-6);
        assert_eq!(avg_similarity(&c, &[1, 1]).unwrap(), 1.0);
        assert!(avg_similarity(&c, &[]).is_err());
        assert!(avg_similarity(&c, &[2]).is_err());
    }

    #[test]
    fn mmd_examples() {
        let c = ctx(&[0.0, 1.0], false);
        assert_eq!(mmd_sq(&c, &[0, 1]).unwrap(), 0.0);
        let e1 = (-1.0f64).exp();
        assert_abs_diff_eq!(mmd_sq(&c, &[0]).unwrap(), 0.5 - 0.5 * e1, epsilon = 1e-14);
        assert_abs_diff_eq!(alpha_mmd_sq(&c, &[0], 0.5).unwrap(), 0.4870452095607092, epsilon = 1e-12);

        let c3 = ctx(&[0.0, 1.0, 2.0], false);
        assert_abs_diff_eq!(mmd_sq(&c3, &[0, 2]).unwrap(), 0.0859332152334981, epsilon = 1e-12);
        assert_eq!(mmd_sq(&c3, &[0, 1, 2]).unwrap(), 0.0);
    }

    #[test]
    fn degenerate_alphas_share_path() {
        let c = ctx(&[0.0, 0.4, 1.7, 3.0], false);
        for idx in [vec![0], vec![1, 3], vec![2, 2, 0]] {
            assert_eq!(alpha_mmd_sq(&c, &idx, 1.0).unwrap(), mmd_sq(&c, &idx).unwrap());
            assert_eq!(alpha_mmd_sq(&c, &idx, 0.0).unwrap(), avg_similarity(&c, &idx).unwrap());
        }
    }

    #[test]
    fn weighted_matches_subset() {
        for gram in [false, true] {
            let c = ctx(&[0.0, 0.4, 1.7, 3.0, -2.0], gram);
            for idx in [vec![0, 4], vec![1, 1, 3]] {
                let w = WeightVector::uniform_over(&idx, c.n()).unwrap();
                for a in [0.0, 0.3, 1.0] {
                    let lhs = weighted_alpha_mmd_sq(&c, &w, a).unwrap();
                    let rhs = alpha_mmd_sq(&c, &idx, a).unwrap();
                    assert!((lhs - rhs).abs() <= 1e-10);
                }
            }
            let u = WeightVector::uniform(c.n());
            assert_abs_diff_eq!(
                weighted_alpha_mmd_sq(&c, &u, 0.25).unwrap(),
                0.75 * 0.75 * c.kbar(),
                epsilon = 1e-12
            );
            assert_eq!(weighted_alpha_mmd_sq(&c, &u, 1.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn weight_errors() {
        assert!(WeightVector::new(vec![0.5, 0.4]).is_err());
        assert!(WeightVector::new(vec![1.5, -0.5]).is_ok());
        let c = ctx(&[0.0, 1.0], false);
        assert!(weighted_alpha_mmd_sq(&c, &WeightVector::uniform(3), 0.5).is_err());
    }

    #[test]
    fn lambda_alpha() {
        assert_eq!(lambda_from_alpha(1.0, 7).unwrap(), 0.0);
        assert_abs_diff_eq!(lambda_from_alpha(0.5, 10).unwrap(), 0.1, epsilon = 1e-15);
        assert!(lambda_from_alpha(0.0, 3).is_err());
        for a in [0.01, 0.3, 0.95, 1.0] {
            for m in [1, 10, 400] {
                let back = alpha_from_lambda(lambda_from_alpha(a, m).unwrap(), m).unwrap();
                assert!((back - a).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn alpha_params() {
        assert_eq!(AlphaParam::auto_budget(1).unwrap().value, 0.0);
        assert_eq!(AlphaParam::auto_budget(400).unwrap().value, 0.95);
        assert_eq!(AlphaParam::ratio(10, 1000).unwrap().value, 0.01);
        assert!(AlphaParam::ratio(11, 10).is_err());
        assert!(AlphaParam::auto_budget(0).is_err());
        assert!(AlphaParam::explicit(1.2).is_err());
    }
}
