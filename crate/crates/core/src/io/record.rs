//! The JSON record written by `kherd select`.

use serde::{Deserialize, Serialize};

use crate::discrepancy::AlphaParam;
use crate::error::Result;
use crate::herding::{Algorithm, BandwidthRule, Selection};
use crate::kernel::{Dataset, KernelSpec};
use crate::oracle::bound_constants;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetFingerprint {
    pub sha256: String,
    pub n: usize,
    pub d: usize,
}

impl DatasetFingerprint {
    pub fn of(dataset: &Dataset) -> Self {
        Self {
            sha256: super::content_hash(dataset),
            n: dataset.n(),
            d: dataset.d(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelRecord {
    #[serde(flatten)]
    pub spec: KernelSpec,
    /// `median`, `fixed` or `none` (polynomial).
    pub sigma_rule: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRecord {
    pub c_alpha_sq: f64,
    pub b: f64,
    pub rhs: f64,
    pub log: String,
    /// Present only when the bound check was requested.
    pub satisfied: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionRecord {
    pub schema_version: String,
    pub dataset: DatasetFingerprint,
    pub kernel: KernelRecord,
    pub alpha: AlphaParam,
    pub algorithm: Algorithm,
    /// Pick order.
    pub indices: Vec<usize>,
    pub indices_sorted: Vec<usize>,
    pub scores: Vec<f64>,
    pub final_alpha_mmd_sq: f64,
    pub bound: BoundRecord,
    pub wall_time_ms: u64,
    pub seed: u64,
}

impl SelectionRecord {
    pub fn from_selection(sel: &Selection, seed: u64, check_bound: bool) -> Result<Self> {
        let ctx = &sel.context;
        let r = &sel.result;
        let consts = bound_constants(ctx, r.alpha.value, r.indices.len())?;
        let sigma_rule = match (ctx.kernel(), sel.bandwidth) {
            (KernelSpec::Polynomial { .. }, _) => "none",
            (_, BandwidthRule::Median) => "median",
            (_, BandwidthRule::Fixed(_)) => "fixed",
        };
        let mut sorted = r.indices.clone();
        sorted.sort_unstable();
        Ok(Self {
            schema_version: SCHEMA_VERSION.into(),
            dataset: DatasetFingerprint::of(ctx.dataset()),
            kernel: KernelRecord {
                spec: *ctx.kernel(),
                sigma_rule: sigma_rule.into(),
            },
            alpha: r.alpha,
            algorithm: r.algorithm,
            indices: r.indices.clone(),
            indices_sorted: sorted,
            scores: r.scores.clone(),
            final_alpha_mmd_sq: r.final_alpha_mmd_sq,
            bound: BoundRecord {
                satisfied: check_bound.then_some(r.final_alpha_mmd_sq <= consts.rhs + 1e-9),
                c_alpha_sq: consts.c_alpha_sq,
                b: consts.b,
                rhs: consts.rhs,
                log: consts.log,
            },
            wall_time_ms: r.wall_time.as_millis() as u64,
            seed,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
