//! Synthetic regression data for the seven correlated designs.
//!
//! Every dataset is a pure function of its [`SimSetting`] and a replication
//! index: the base seed keys a ChaCha8 generator and the replication index
//! selects its stream, so replications can be drawn in any order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// Idiosyncratic variance in the group design (`ζ ~ N(0, 0.01)`).
const GROUP_NOISE_VAR: f64 = 0.01;
/// Idiosyncratic standard deviation in the sparse factor design.
const SPARSE_FACTOR_NOISE_SD: f64 = 0.1;
const SPARSE_FACTOR_RANK: usize = 5;
const T_DOF: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Design {
    /// Independent predictors.
    Iid,
    /// Equal pairwise correlation `rho`.
    Compound,
    /// `Σ_ij = rho^|i-j|`.
    Ar1,
    /// `Σ = FFᵀ + I` with a random p×k loading matrix.
    Factor,
    /// Three tight groups of three true predictors.
    Group,
    /// Noise predictors share the latent part of every true predictor.
    Extreme,
    /// Block-sparse five-factor loadings, `Σ = FFᵀ + 0.01 I`.
    SparseFactor,
}

impl Design {
    pub const ALL: [Design; 7] = [
        Design::Iid,
        Design::Compound,
        Design::Group,
        Design::Ar1,
        Design::Factor,
        Design::Extreme,
        Design::SparseFactor,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Design::Iid => "IID",
            Design::Compound => "COMPOUND",
            Design::Ar1 => "AR1",
            Design::Factor => "FACTOR",
            Design::Group => "GROUP",
            Design::Extreme => "EXTREME",
            Design::SparseFactor => "SPARSE_FACTOR",
        }
    }

    /// Number of nonzero coefficients in the generating model.
    pub fn true_model_size(self) -> usize {
        match self {
            Design::SparseFactor => 25,
            _ => 9,
        }
    }

    fn min_p(self) -> usize {
        match self {
            Design::Group => 9,
            Design::Extreme => 10,
            Design::SparseFactor => 25,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ErrorLaw {
    Normal,
    /// `Exp(1) - 1`, support `[-1, ∞)`.
    ShiftedExp,
    /// `t_20 / sqrt(20/18)`.
    ScaledT20,
}

fn default_rho() -> f64 {
    0.5
}

fn default_factor_k() -> usize {
    10
}

fn default_error_law() -> ErrorLaw {
    ErrorLaw::Normal
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSetting {
    pub design: Design,
    pub n: usize,
    pub p: usize,
    pub r_squared: f64,
    #[serde(default = "default_error_law")]
    pub error_law: ErrorLaw,
    /// Correlation for COMPOUND and AR1.
    #[serde(default = "default_rho")]
    pub rho: f64,
    /// Number of factors for FACTOR.
    #[serde(default = "default_factor_k")]
    pub factor_k: usize,
    #[serde(default)]
    pub seed: u64,
}

impl SimSetting {
    pub fn new(design: Design, n: usize, p: usize, r_squared: f64, seed: u64) -> Self {
        SimSetting {
            design,
            n,
            p,
            r_squared,
            error_law: ErrorLaw::Normal,
            rho: default_rho(),
            factor_k: default_factor_k(),
            seed,
        }
    }

    /// Full check, including room for the true model.
    pub fn validate(&self) -> Result<()> {
        self.validate_design()?;
        let size = self.design.true_model_size();
        if self.p < size {
            return Err(Error::config(
                "p",
                format!("the true model has {size} predictors, got p = {}", self.p),
            ));
        }
        Ok(())
    }

    /// Checks only what drawing the predictor matrix needs.
    pub fn validate_design(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::config("n", format!("need n >= 3, got {}", self.n)));
        }
        let min_p = self.design.min_p();
        if self.p < min_p {
            return Err(Error::config(
                "p",
                format!("{} needs p >= {min_p}, got {}", self.design.label(), self.p),
            ));
        }
        if !(self.r_squared > 0.0 && self.r_squared < 1.0) {
            return Err(Error::config(
                "r_squared",
                format!("must lie in (0, 1), got {}", self.r_squared),
            ));
        }
        if !(self.rho.abs() < 1.0) {
            return Err(Error::config("rho", format!("need |rho| < 1, got {}", self.rho)));
        }
        if self.design == Design::Compound && self.rho < 0.0 {
            return Err(Error::config("rho", "compound symmetry needs rho >= 0"));
        }
        if self.design == Design::Factor && self.factor_k == 0 {
            return Err(Error::config("factor_k", "need at least one factor"));
        }
        Ok(())
    }
}

/// A generated design matrix and, for factor designs, the loadings it was drawn with.
#[derive(Debug, Clone)]
pub struct DesignDraw {
    pub x: DenseMatrix,
    pub loadings: Option<DenseMatrix>,
}

#[derive(Debug, Clone)]
pub struct GeneratedDataset {
    pub x_raw: DenseMatrix,
    pub y_raw: Vec<f64>,
    pub true_model: Vec<usize>,
    pub beta: Vec<f64>,
    /// Standard deviation applied to the unit-variance error draw.
    pub noise_scale: f64,
    pub loadings: Option<DenseMatrix>,
}

/// Generator for replication `rep` under `seed`.
pub fn replication_rng(seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng
}

fn normals(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| StandardNormal.sample(rng)).collect()
}

/// Draws the n×p predictor matrix; rows are i.i.d. with the design's covariance.
pub fn make_design(setting: &SimSetting, rng: &mut ChaCha8Rng) -> Result<DesignDraw> {
    setting.validate_design()?;
    let (n, p) = (setting.n, setting.p);
    let rho = setting.rho;
    let mut loadings = None;

    let data = match setting.design {
        Design::Iid => normals(rng, n * p),
        Design::Compound => {
            let g = normals(rng, n);
            let (a, b) = (rho.sqrt(), (1.0 - rho).sqrt());
            let mut z = normals(rng, n * p);
            for col in z.chunks_exact_mut(n) {
                for (v, gi) in col.iter_mut().zip(&g) {
                    *v = a * gi + b * *v;
                }
            }
            z
        }
        Design::Ar1 => {
            let s = (1.0 - rho * rho).sqrt();
            let mut z = normals(rng, n * p);
            for j in 1..p {
                let (prev, cur) = z.split_at_mut(j * n);
                let prev = &prev[(j - 1) * n..];
                for (v, pv) in cur[..n].iter_mut().zip(prev) {
                    *v = rho * pv + s * *v;
                }
            }
            z
        }
        Design::Factor => {
            let k = setting.factor_k;
            let f = DenseMatrix::from_col_major_unchecked(p, k, normals(rng, p * k));
            let g = DenseMatrix::from_col_major_unchecked(n, k, normals(rng, n * k));
            let x = factor_rows(&f, &g, normals(rng, n * p), 1.0);
            loadings = Some(f);
            x
        }
        Design::Group => {
            let latent: Vec<Vec<f64>> = (0..3).map(|_| normals(rng, n)).collect();
            let noise_sd = GROUP_NOISE_VAR.sqrt();
            let mut data = Vec::with_capacity(n * p);
            for j in 0..9 {
                let zeta = normals(rng, n);
                data.extend(latent[j / 3].iter().zip(&zeta).map(|(z, e)| z + noise_sd * e));
            }
            data.extend(normals(rng, n * (p - 9)));
            data
        }
        Design::Extreme => {
            let w: Vec<Vec<f64>> = (0..9).map(|_| normals(rng, n)).collect();
            let mut w_sum = vec![0.0; n];
            for wi in &w {
                w_sum.iter_mut().zip(wi).for_each(|(s, v)| *s += v);
            }
            let mut z = normals(rng, n * p);
            let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
            for (j, col) in z.chunks_exact_mut(n).enumerate() {
                if j < 9 {
                    col.iter_mut().zip(&w[j]).for_each(|(v, wi)| *v = (*v + wi) * inv_sqrt2);
                } else {
                    col.iter_mut().zip(&w_sum).for_each(|(v, s)| *v = (*v + s) / 2.0);
                }
            }
            z
        }
        Design::SparseFactor => {
            let mut f = DenseMatrix::zeros(p, SPARSE_FACTOR_RANK);
            for i in 0..SPARSE_FACTOR_RANK * 5 {
                f.set(i, i / 5, StandardNormal.sample(rng));
            }
            let g = DenseMatrix::from_col_major_unchecked(n, SPARSE_FACTOR_RANK, normals(rng, n * SPARSE_FACTOR_RANK));
            let x = factor_rows(&f, &g, normals(rng, n * p), SPARSE_FACTOR_NOISE_SD);
            loadings = Some(f);
            x
        }
    };

    Ok(DesignDraw {
        x: DenseMatrix::from_col_major_unchecked(n, p, data),
        loadings,
    })
}

/// `X = G Fᵀ + noise_sd · Z` with `G` n×k scores and `F` p×k loadings.
fn factor_rows(f: &DenseMatrix, g: &DenseMatrix, mut z: Vec<f64>, noise_sd: f64) -> Vec<f64> {
    let n = g.rows();
    for (j, col) in z.chunks_exact_mut(n).enumerate() {
        col.iter_mut().for_each(|v| *v *= noise_sd);
        for m in 0..f.cols() {
            let load = f.get(j, m);
            if load != 0.0 {
                col.iter_mut().zip(g.col(m)).for_each(|(v, gm)| *v += load * gm);
            }
        }
    }
    z
}

/// Entry `(a, b)` of the population covariance of one row.
///
/// Factor designs need the realized loadings.
pub fn covariance_entry(setting: &SimSetting, loadings: Option<&DenseMatrix>, a: usize, b: usize) -> Result<f64> {
    let same = if a == b { 1.0 } else { 0.0 };
    let rho = setting.rho;
    Ok(match setting.design {
        Design::Iid => same,
        Design::Compound => {
            if a == b {
                1.0
            } else {
                rho
            }
        }
        Design::Ar1 => rho.powi(a.abs_diff(b) as i32),
        Design::Factor | Design::SparseFactor => {
            let f = loadings.ok_or_else(|| Error::invalid("factor design needs its loadings"))?;
            let shared: f64 = (0..f.cols()).map(|m| f.get(a, m) * f.get(b, m)).sum();
            let idio = if setting.design == Design::Factor {
                1.0
            } else {
                SPARSE_FACTOR_NOISE_SD * SPARSE_FACTOR_NOISE_SD
            };
            shared + idio * same
        }
        Design::Group => {
            if a < 9 && b < 9 {
                if a == b {
                    1.0 + GROUP_NOISE_VAR
                } else if a / 3 == b / 3 {
                    1.0
                } else {
                    0.0
                }
            } else {
                same
            }
        }
        Design::Extreme => match (a < 9, b < 9) {
            (true, true) => same,
            (false, false) => {
                if a == b {
                    2.5
                } else {
                    2.25
                }
            }
            // (Z_a + W_a)/√2 against (Z_b + ΣW)/2 shares only W_a
            _ => 0.5 * std::f64::consts::FRAC_1_SQRT_2,
        },
    })
}

/// Noise standard deviation giving theoretical `R² = Var(xᵀβ) / Var(y)` with
/// unit-variance errors: `σ = sqrt(βᵀΣβ (1 - R²) / R²)`.
pub fn calibrate_noise(setting: &SimSetting, beta: &[f64], loadings: Option<&DenseMatrix>) -> Result<f64> {
    let r2 = setting.r_squared;
    if !(r2 > 0.0 && r2 < 1.0) {
        return Err(Error::invalid(format!("r_squared must lie in (0, 1), got {r2}")));
    }
    let support: Vec<usize> = beta
        .iter()
        .enumerate()
        .filter(|(_, b)| **b != 0.0)
        .map(|(i, _)| i)
        .collect();
    let mut signal_var = 0.0;
    for &a in &support {
        for &b in &support {
            signal_var += beta[a] * beta[b] * covariance_entry(setting, loadings, a, b)?;
        }
    }
    Ok((signal_var * (1.0 - r2) / r2).sqrt())
}

/// Unit-variance, mean-zero errors.
pub fn sample_error(law: ErrorLaw, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    match law {
        ErrorLaw::Normal => normals(rng, n),
        ErrorLaw::ShiftedExp => (0..n)
            .map(|_| {
                let e: f64 = Exp1.sample(rng);
                e - 1.0
            })
            .collect(),
        ErrorLaw::ScaledT20 => {
            let t = StudentT::new(T_DOF).expect("valid degrees of freedom");
            let scale = (T_DOF / (T_DOF - 2.0)).sqrt();
            (0..n).map(|_| t.sample(rng) / scale).collect()
        }
    }
}

/// Replication 0 of `setting`.
pub fn generate(setting: &SimSetting) -> Result<GeneratedDataset> {
    generate_replication(setting, 0)
}

/// `y = Xβ + σε` with `β_j = 1` on the true model and no intercept.
pub fn generate_replication(setting: &SimSetting, rep: u64) -> Result<GeneratedDataset> {
    setting.validate()?;
    let mut rng = replication_rng(setting.seed, rep);
    let draw = make_design(setting, &mut rng)?;
    let size = setting.design.true_model_size();
    let true_model: Vec<usize> = (0..size).collect();
    let mut beta = vec![0.0; setting.p];
    beta[..size].iter_mut().for_each(|b| *b = 1.0);
    let noise_scale = calibrate_noise(setting, &beta, draw.loadings.as_ref())?;
    let eps = sample_error(setting.error_law, setting.n, &mut rng);

    let mut y: Vec<f64> = eps.iter().map(|e| noise_scale * e).collect();
    for &j in &true_model {
        y.iter_mut().zip(draw.x.col(j)).for_each(|(yi, xi)| *yi += xi);
    }

    Ok(GeneratedDataset {
        x_raw: draw.x,
        y_raw: y,
        true_model,
        beta,
        noise_scale,
        loadings: draw.loadings,
    })
}
