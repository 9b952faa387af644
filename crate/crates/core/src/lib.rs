//! Variable screening for ultrahigh-dimensional linear regression.
//!
//! The centerpiece is ridge partial correlation (RPC) screening computed in
//! O(n³ + n²p) through a Cholesky factor of `XXᵀ + λI`. Alongside it live the
//! HOLP, SIS and forward-regression baselines, synthetic data generators for
//! the standard correlated designs, and a Monte-Carlo harness that reports
//! coverage probability and true positive rate.

// `!(x > t)` is used on purpose so NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod cli;
pub mod datagen;
pub mod error;
pub mod io;
pub mod linalg;
pub mod screening;

pub use error::{Error, Result};
pub use linalg::{CholeskyFactor, DenseMatrix};
pub use screening::{
    fr_screen, holp_scores, lambda_presets, rpc_fast, rpc_oracle, screen, select_top_k, sis_scores, standardize,
    union_submodels, LambdaPreset, LambdaPresets, LambdaUsed, Method, RpcComponents, ScreenResult, StandardizedData,
};
