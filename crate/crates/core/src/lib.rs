//! Representative and diverse subset selection with generalized kernel herding.
//!
//! Given `n` feature vectors and a budget `m`, the selectors here greedily
//! minimize the α-MMD² criterion
//!
//! ```text
//! α²·K̄ + (1/m²) Σ_{i,j∈I} k(x_i, x_j) − (2α/(mn)) Σ_{i∈[n]} Σ_{j∈I} k(x_i, x_j)
//! ```
//!
//! which trades representativeness (classical MMD at α = 1) against
//! diversity (average similarity at α = 0).
//!
//! | Module | Purpose |
//! |--------|---------|
//! | [`kernel`] | kernels, median bandwidth, mean-similarity precomputation |
//! | [`discrepancy`] | exact similarity / MMD² / α-MMD² / weighted form |
//! | [`herding`] | GKH and GKHR greedy selection, end-to-end [`select`] |
//! | [`oracle`] | brute-force optimum, affine-optimal weights, bound constants |
//! | [`synthbench`] | synthetic distributions, baselines, GKHR-vs-GKH harness |
//! | [`io`] | CSV / RDSB / JSON formats, SVG plots, timing |
//!
//! ```
//! use kherd::{select, Dataset, SelectOptions};
//!
//! let ds = Dataset::from_rows(&[[0.0, 0.0], [0.1, 0.0], [5.0, 5.0], [5.1, 5.0]]).unwrap();
//! let sel = select(ds, 2, &SelectOptions::default()).unwrap();
//! assert_eq!(sel.result.indices.len(), 2);
//! ```

pub mod discrepancy;
pub mod error;
pub mod herding;
pub mod io;
pub mod kernel;
pub mod oracle;
pub mod synthbench;

pub use discrepancy::{
    alpha_from_lambda, alpha_mmd_sq, avg_similarity, lambda_from_alpha, mmd_sq, weighted_alpha_mmd_sq, AlphaParam, AlphaRule,
    WeightVector,
};
pub use error::{Error, Result};
pub use herding::{
    gkh, gkhr, select, Algorithm, AlphaChoice, BandwidthRule, HerdingState, SelectOptions, Selection, SelectionResult,
};
pub use kernel::{
    build_context, kernel_eval, median_bandwidth, median_bandwidth_with, Dataset, KernelContext, KernelSpec, MedianOptions,
};
pub use oracle::{
    bound_constants, exhaustive_min, mmd_deviation_bound_check, optimal_affine_weights, BoundConstants, OracleReport,
};
