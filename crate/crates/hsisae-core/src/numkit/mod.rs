//! Numeric substrate: dense matrices, a seeded PRNG, the sigmoid
//! nonlinearity and a symmetric eigensolver.

mod eig;
mod matrix;
mod rng;

pub use eig::sym_eig;
pub use matrix::Matrix;
pub use rng::{mix_seed, Rng};

/// Largest f64 strictly below 1.0.
const ONE_BELOW: f64 = f64::from_bits(0x3FEF_FFFF_FFFF_FFFF);

/// Logistic sigmoid 1 / (1 + e^-x).
///
/// Computed in the numerically stable branch for each sign and clamped into
/// the open interval (0, 1), so downstream code can rely on outputs never
/// reaching 0 or 1 exactly even for saturating inputs.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    let v = if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    };
    v.clamp(f64::MIN_POSITIVE, ONE_BELOW)
}

/// Sigmoid derivative expressed through the activation: f' = f (1 - f).
#[inline]
pub fn sigmoid_prime_from_f(f: f64) -> f64 {
    f * (1.0 - f)
}
