use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// Centered and unit-SD scaled predictors with a centered response.
#[derive(Debug, Clone)]
pub struct StandardizedData {
    x: DenseMatrix,
    y_tilde: Vec<f64>,
    column_means: Vec<f64>,
    column_scales: Vec<f64>,
    y_bar: f64,
}

impl StandardizedData {
    pub fn x(&self) -> &DenseMatrix {
        &self.x
    }

    pub fn y_tilde(&self) -> &[f64] {
        &self.y_tilde
    }

    pub fn n(&self) -> usize {
        self.x.rows()
    }

    pub fn p(&self) -> usize {
        self.x.cols()
    }

    pub fn column_means(&self) -> &[f64] {
        &self.column_means
    }

    pub fn column_scales(&self) -> &[f64] {
        &self.column_scales
    }

    pub fn y_bar(&self) -> f64 {
        self.y_bar
    }

    /// Restricts to a subset of columns, keeping the stored moments aligned.
    pub fn select_columns(&self, idx: &[usize]) -> StandardizedData {
        StandardizedData {
            x: self.x.select_columns(idx),
            y_tilde: self.y_tilde.clone(),
            column_means: idx.iter().map(|&j| self.column_means[j]).collect(),
            column_scales: idx.iter().map(|&j| self.column_scales[j]).collect(),
            y_bar: self.y_bar,
        }
    }

    pub(crate) fn ensure_response_varies(&self) -> Result<()> {
        let tol = 1e-12 * self.y_bar.abs().max(1.0);
        if self.y_tilde.iter().all(|v| v.abs() <= tol) {
            return Err(Error::Degenerate("response is constant".into()));
        }
        Ok(())
    }
}

/// Centers every column to mean zero and scales it to unit sample standard
/// deviation (divisor `n - 1`); centers the response.
pub fn standardize(x_raw: &DenseMatrix, y_raw: &[f64]) -> Result<StandardizedData> {
    let n = x_raw.rows();
    let p = x_raw.cols();
    if n < 3 {
        return Err(Error::invalid(format!("need at least 3 observations, got {n}")));
    }
    if p == 0 {
        return Err(Error::invalid("need at least one predictor"));
    }
    if y_raw.len() != n {
        return Err(Error::invalid(format!(
            "response has length {}, predictors have {n} rows",
            y_raw.len()
        )));
    }
    if let Some(i) = y_raw.iter().position(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("response entry {i} is not finite")));
    }

    let mut data = Vec::with_capacity(n * p);
    let mut means = Vec::with_capacity(p);
    let mut scales = Vec::with_capacity(p);
    for j in 0..p {
        let col = x_raw.col(j);
        let mean = col.iter().sum::<f64>() / n as f64;
        let start = data.len();
        data.extend(col.iter().map(|v| v - mean));
        // second pass on the centered values removes the rounding left in the mean
        let centered = &mut data[start..];
        let resid = centered.iter().sum::<f64>() / n as f64;
        centered.iter_mut().for_each(|v| *v -= resid);
        let ss: f64 = centered.iter().map(|v| v * v).sum();
        let sd = (ss / (n - 1) as f64).sqrt();
        if !(sd > 1e-12 * mean.abs().max(1.0)) {
            return Err(Error::ConstantColumn { column: j });
        }
        centered.iter_mut().for_each(|v| *v /= sd);
        means.push(mean + resid);
        scales.push(sd);
    }

    let y_bar = y_raw.iter().sum::<f64>() / n as f64;
    let y_tilde = y_raw.iter().map(|v| v - y_bar).collect();

    Ok(StandardizedData {
        x: DenseMatrix::from_col_major_unchecked(n, p, data),
        y_tilde,
        column_means: means,
        column_scales: scales,
        y_bar,
    })
}
