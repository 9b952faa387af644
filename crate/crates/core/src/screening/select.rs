use std::collections::HashSet;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{LambdaUsed, Method, ScreenResult};
use crate::error::{Error, Result};

/// Indices of the `k` largest `|scores|`, best first; ties go to the lower index.
pub fn select_top_k(scores: &[f64], k: usize) -> Result<Vec<usize>> {
    let p = scores.len();
    if k == 0 || k > p {
        return Err(Error::invalid(format!("k must lie in 1..={p}, got {k}")));
    }
    let mut idx: Vec<usize> = (0..p).collect();
    let by_rank = |&a: &usize, &b: &usize| scores[b].abs().total_cmp(&scores[a].abs()).then(a.cmp(&b));
    if k < p {
        idx.select_nth_unstable_by(k - 1, by_rank);
        idx.truncate(k);
    }
    idx.sort_unstable_by(by_rank);
    Ok(idx)
}

/// Union of several submodels, ordered by first appearance across the inputs.
pub fn union_submodels(results: &[ScreenResult]) -> Result<ScreenResult> {
    let first = results
        .first()
        .ok_or_else(|| Error::invalid("union of an empty list of submodels"))?;
    let p = first.p;
    if let Some(r) = results.iter().find(|r| r.p != p) {
        return Err(Error::invalid(format!(
            "cannot union submodels over {p} and {} predictors",
            r.p
        )));
    }
    let mut seen = HashSet::new();
    let mut selected = Vec::new();
    for r in results {
        for &i in &r.selected {
            if seen.insert(i) {
                selected.push(i);
            }
        }
    }
    let mut lambdas = Vec::new();
    for r in results {
        match &r.lambda_used {
            LambdaUsed::None => {}
            LambdaUsed::Single(l) => lambdas.push(*l),
            LambdaUsed::Multiple(ls) => lambdas.extend_from_slice(ls),
        }
    }
    Ok(ScreenResult {
        method: Method::Union,
        lambda_used: if lambdas.is_empty() {
            LambdaUsed::None
        } else {
            LambdaUsed::Multiple(lambdas)
        },
        scores: Vec::new(),
        k: selected.len(),
        selected,
        p,
    })
}

/// The three data-driven penalties: `p/n`, `n ln(n)/p`, `n/p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaPresets {
    pub rpc1: f64,
    pub rpc2: f64,
    pub rpc3: f64,
}

impl LambdaPresets {
    pub fn get(&self, preset: LambdaPreset) -> f64 {
        match preset {
            LambdaPreset::Rpc1 => self.rpc1,
            LambdaPreset::Rpc2 => self.rpc2,
            LambdaPreset::Rpc3 => self.rpc3,
        }
    }

    pub fn all(&self) -> [f64; 3] {
        [self.rpc1, self.rpc2, self.rpc3]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LambdaPreset {
    Rpc1,
    Rpc2,
    Rpc3,
}

impl FromStr for LambdaPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rpc1" => Ok(LambdaPreset::Rpc1),
            "rpc2" => Ok(LambdaPreset::Rpc2),
            "rpc3" => Ok(LambdaPreset::Rpc3),
            other => Err(Error::invalid(format!("unknown lambda preset {other:?}"))),
        }
    }
}

pub fn lambda_presets(n: usize, p: usize) -> Result<LambdaPresets> {
    if n < 2 || p < 1 {
        return Err(Error::invalid(format!(
            "presets need n >= 2 and p >= 1, got n={n}, p={p}"
        )));
    }
    let (n, p) = (n as f64, p as f64);
    Ok(LambdaPresets {
        rpc1: p / n,
        rpc2: n * n.ln() / p,
        rpc3: n / p,
    })
}
