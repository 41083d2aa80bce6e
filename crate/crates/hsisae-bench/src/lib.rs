//! Shared fixtures for the criterion benchmarks.

use hsisae_core::numkit::{Matrix, Rng};

pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = Rng::new(seed);
    Matrix::from_fn(rows, cols, |_, _| rng.next_f64())
}

pub fn random_symmetric(n: usize, seed: u64) -> Matrix {
    let mut rng = Rng::new(seed);
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = 2.0 * rng.next_f64() - 1.0;
            m.set(i, j, v);
            m.set(j, i, v);
        }
    }
    m
}
