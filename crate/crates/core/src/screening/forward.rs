use rayon::prelude::*;

use super::{LambdaUsed, Method, ScreenResult, StandardizedData};
use crate::error::{Error, Result};
use crate::linalg::dot;

/// A candidate whose remaining norm falls below this fraction of its original
/// squared norm lies in the span of the active set.
const COLLINEAR_TOLERANCE: f64 = 1e-10;

/// Greedy forward regression: `k` steps, each adding the predictor with the
/// largest drop in residual sum of squares given the variables already in.
///
/// Candidate columns are kept orthogonalized against the active set, so a step
/// costs O(np). `scores[j]` is the RSS drop when `j` entered, 0 if it never did.
pub fn fr_screen(data: &StandardizedData, k: usize) -> Result<ScreenResult> {
    let n = data.n();
    let p = data.p();
    let max_k = (n - 2).min(p);
    if k == 0 || k > max_k {
        return Err(Error::invalid(format!(
            "forward regression needs 1 <= k <= min(n - 2, p) = {max_k}, got {k}"
        )));
    }
    data.ensure_response_varies()?;

    let mut resid = data.y_tilde().to_vec();
    let mut q = data.x().as_slice().to_vec();
    let base: Vec<f64> = q.chunks_exact(n).map(|c| dot(c, c)).collect();
    let mut active = vec![false; p];
    let mut scores = vec![0.0; p];
    let mut selected = Vec::with_capacity(k);

    for _ in 0..k {
        let resid_ref = &resid;
        let gains: Vec<Option<f64>> = q
            .par_chunks_exact(n)
            .enumerate()
            .map(|(j, c)| {
                if active[j] {
                    return None;
                }
                let qq = dot(c, c);
                if qq <= COLLINEAR_TOLERANCE * base[j] {
                    return None;
                }
                let qr = dot(c, resid_ref);
                Some(qr * qr / qq)
            })
            .collect();

        let mut best: Option<(usize, f64)> = None;
        for (j, g) in gains.iter().enumerate() {
            if let Some(g) = *g {
                if best.is_none_or(|(_, b)| g > b) {
                    best = Some((j, g));
                }
            }
        }
        let (s, gain) = best.ok_or_else(|| Error::Numerical {
            index: selected.len(),
            message: "no candidate outside the span of the active set".into(),
        })?;

        active[s] = true;
        scores[s] = gain;
        selected.push(s);

        let mut e = q[s * n..(s + 1) * n].to_vec();
        let norm = dot(&e, &e).sqrt();
        e.iter_mut().for_each(|v| *v /= norm);
        let er = dot(&e, &resid);
        resid.iter_mut().zip(&e).for_each(|(r, ei)| *r -= er * ei);

        let e = &e;
        let active = &active;
        q.par_chunks_exact_mut(n).enumerate().for_each(|(j, c)| {
            if active[j] {
                return;
            }
            let proj = dot(e, c);
            c.iter_mut().zip(e).for_each(|(v, ei)| *v -= proj * ei);
        });
    }

    Ok(ScreenResult {
        method: Method::Fr,
        lambda_used: LambdaUsed::None,
        scores,
        selected,
        k,
        p,
    })
}
