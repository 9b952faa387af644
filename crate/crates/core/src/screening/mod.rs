//! Screening scores and submodel selection.
//!
//! All scorers take [`StandardizedData`]: columns centered to mean zero and
//! scaled to unit sample standard deviation, response centered.

mod forward;
mod marginal;
mod ridge;
mod select;
mod standardize;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use forward::fr_screen;
pub use marginal::sis_scores;
pub use ridge::{holp_scores, rpc_fast, rpc_oracle, RidgeEngine, RpcComponents};
pub use select::{lambda_presets, select_top_k, union_submodels, LambdaPreset, LambdaPresets};
pub use standardize::{standardize, StandardizedData};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Method {
    Rpc,
    Holp,
    Sis,
    Fr,
    Union,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Rpc => "rpc",
            Method::Holp => "holp",
            Method::Sis => "sis",
            Method::Fr => "fr",
            Method::Union => "union",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rpc" => Ok(Method::Rpc),
            "holp" => Ok(Method::Holp),
            "sis" => Ok(Method::Sis),
            "fr" => Ok(Method::Fr),
            "union" => Ok(Method::Union),
            other => Err(Error::invalid(format!("unknown method {other:?}"))),
        }
    }
}

/// Penalty values a result was computed with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaUsed {
    None,
    Single(f64),
    Multiple(Vec<f64>),
}

/// Ranked scores and the selected submodel for one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenResult {
    pub method: Method,
    pub lambda_used: LambdaUsed,
    /// Signed per-variable scores; ranking uses their absolute values. Empty for unions.
    pub scores: Vec<f64>,
    /// Selected indices, best first.
    pub selected: Vec<usize>,
    pub k: usize,
    pub p: usize,
}

impl ScreenResult {
    /// Keeps the `k` variables with the largest `|score|`.
    pub fn from_scores(method: Method, lambda_used: LambdaUsed, scores: Vec<f64>, k: usize) -> Result<Self> {
        let selected = select_top_k(&scores, k)?;
        Ok(ScreenResult {
            method,
            lambda_used,
            p: scores.len(),
            scores,
            selected,
            k,
        })
    }
}

/// Scores `data` with one method and keeps the top `k`.
///
/// `lambda` is required for RPC and HOLP and ignored otherwise.
pub fn screen(data: &StandardizedData, method: Method, lambda: Option<f64>, k: usize) -> Result<ScreenResult> {
    let need_lambda = || lambda.ok_or_else(|| Error::invalid(format!("method {method} needs a lambda")));
    match method {
        Method::Rpc => {
            let lambda = need_lambda()?;
            let c = rpc_fast(data, lambda)?;
            ScreenResult::from_scores(method, LambdaUsed::Single(lambda), c.scores, k)
        }
        Method::Holp => {
            let lambda = need_lambda()?;
            let beta = holp_scores(data, lambda)?;
            ScreenResult::from_scores(method, LambdaUsed::Single(lambda), beta, k)
        }
        Method::Sis => ScreenResult::from_scores(method, LambdaUsed::None, sis_scores(data)?, k),
        Method::Fr => fr_screen(data, k),
        Method::Union => Err(Error::invalid(
            "union is built from other results, not screened directly",
        )),
    }
}
