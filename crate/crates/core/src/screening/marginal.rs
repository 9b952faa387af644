use super::StandardizedData;
use crate::error::Result;
use crate::linalg::dot;

/// Marginal Pearson correlation of every predictor with the response.
pub fn sis_scores(data: &StandardizedData) -> Result<Vec<f64>> {
    data.ensure_response_varies()?;
    let y = data.y_tilde();
    let y_norm = dot(y, y).sqrt();
    Ok((0..data.p())
        .map(|j| {
            let c = data.x().col(j);
            (dot(c, y) / (dot(c, c).sqrt() * y_norm)).clamp(-1.0, 1.0)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::linalg::DenseMatrix;
    use crate::screening::standardize;

    #[test]
    fn response_equal_to_column() {
        let x = DenseMatrix::from_rows(&[
            vec![1.0, 0.3, 2.0, 5.0],
            vec![2.0, -1.0, 1.0, 3.0],
            vec![0.5, 2.0, 0.0, 4.0],
            vec![3.0, 0.1, 1.5, -1.0],
            vec![1.0, 1.0, 3.0, 0.0],
        ])
        .unwrap();
        let y: Vec<f64> = x.col(3).to_vec();
        let s = sis_scores(&standardize(&x, &y).unwrap()).unwrap();
        assert!((s[3] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_column_scores_zero() {
        // columns and response are centered and mutually orthogonal
        let x = DenseMatrix::from_rows(&[vec![1.0], vec![-1.0], vec![1.0], vec![-1.0]]).unwrap();
        let y = [1.0, 1.0, -1.0, -1.0];
        let s = sis_scores(&standardize(&x, &y).unwrap()).unwrap();
        assert!(s[0].abs() < 1e-12);
    }

    #[test]
    fn matches_two_pass_pearson() {
        use crate::testutil::gauss;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let x = DenseMatrix::from_fn(25, 6, |_, j| gauss(&mut rng) * (j + 1) as f64 + 3.0).unwrap();
        let y: Vec<f64> = (0..25).map(|i| x.get(i, 2) - x.get(i, 4) + gauss(&mut rng)).collect();
        let s = sis_scores(&standardize(&x, &y).unwrap()).unwrap();
        let n = 25.0;
        let ym = y.iter().sum::<f64>() / n;
        for (j, &sj) in s.iter().enumerate() {
            let c = x.col(j);
            let xm = c.iter().sum::<f64>() / n;
            let cov: f64 = c.iter().zip(&y).map(|(a, b)| (a - xm) * (b - ym)).sum::<f64>() / (n - 1.0);
            let sx = (c.iter().map(|a| (a - xm).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
            let sy = (y.iter().map(|b| (b - ym).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
            assert!((sj - cov / (sx * sy)).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_response_rejected() {
        let x = DenseMatrix::from_rows(&[vec![1.0], vec![2.0], vec![4.0]]).unwrap();
        let d = standardize(&x, &[2.0, 2.0, 2.0]).unwrap();
        assert!(matches!(sis_scores(&d), Err(Error::Degenerate(_))));
    }
}
