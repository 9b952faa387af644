#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rpcscreen::{standardize, DenseMatrix, StandardizedData};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

pub fn normal_matrix(n: usize, p: usize, seed: u64) -> DenseMatrix {
    let mut r = rng(seed);
    DenseMatrix::from_fn(n, p, |_, _| gauss(&mut r)).unwrap()
}

/// Standard-normal design with a response driven by the first two columns.
pub fn seeded_data(n: usize, p: usize, seed: u64) -> StandardizedData {
    let x = normal_matrix(n, p, seed);
    let mut r = rng(seed ^ 0x5eed);
    let y: Vec<f64> = (0..n)
        .map(|i| x.get(i, 0) - 0.7 * x.get(i, 1 % p) + gauss(&mut r))
        .collect();
    standardize(&x, &y).unwrap()
}

/// Gauss-Jordan inverse with partial pivoting, independent of the library's Cholesky path.
pub fn gauss_jordan_inverse(a: &DenseMatrix) -> DenseMatrix {
    let m = a.rows();
    let mut aug: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let mut row: Vec<f64> = (0..m).map(|j| a.get(i, j)).collect();
            row.extend((0..m).map(|j| if i == j { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    for c in 0..m {
        let piv = (c..m)
            .max_by(|&x, &y| aug[x][c].abs().total_cmp(&aug[y][c].abs()))
            .unwrap();
        aug.swap(c, piv);
        let d = aug[c][c];
        assert!(d.abs() > 1e-300, "singular matrix in test oracle");
        aug[c].iter_mut().for_each(|v| *v /= d);
        let pivot_row = aug[c].clone();
        for (r, row) in aug.iter_mut().enumerate() {
            if r != c {
                let f = row[c];
                if f != 0.0 {
                    row.iter_mut().zip(&pivot_row).for_each(|(v, pv)| *v -= f * pv);
                }
            }
        }
    }
    DenseMatrix::from_fn(m, m, |i, j| aug[i][m + j]).unwrap()
}

/// Triple-loop `A B`.
pub fn naive_matmul(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    DenseMatrix::from_fn(a.rows(), b.cols(), |i, j| {
        (0..a.cols()).map(|k| a.get(i, k) * b.get(k, j)).sum()
    })
    .unwrap()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}
