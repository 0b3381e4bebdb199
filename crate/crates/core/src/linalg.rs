//! Power iteration for Hermitian positive semidefinite maps.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type C64 = Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerOptions {
    /// Relative tolerance on the eigenvalue estimate.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// Also require `‖Mx − λx‖ ≤ residual_tol` for unit x.
    pub residual_tol: Option<f64>,
}

impl Default for PowerOptions {
    fn default() -> Self {
        PowerOptions {
            tol: 1e-10,
            max_iter: 100_000,
            seed: 0x5eed,
            residual_tol: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: Vec<C64>,
    pub residual: f64,
    pub iterations: usize,
}

pub fn norm(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

fn dot(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

/// Unit vector with independent uniform complex entries.
pub fn random_unit(n: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<C64> = (0..n)
        .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    let nx = norm(&x);
    x.iter_mut().for_each(|v| *v /= nx);
    x
}

/// Largest eigenvalue of a Hermitian positive semidefinite map.
///
/// Stops when the extrapolated eigenvalue error `Δ_k · q/(1 − q)`, with `q`
/// the observed contraction of successive increments, drops below
/// `tol · λ`.
pub fn dominant_eigenpair<F>(apply: F, n: usize, opts: &PowerOptions) -> Result<Eigenpair>
where
    F: Fn(&[C64]) -> Vec<C64>,
{
    if n == 0 {
        return Ok(Eigenpair {
            value: 0.0,
            vector: Vec::new(),
            residual: 0.0,
            iterations: 0,
        });
    }
    let mut x = random_unit(n, opts.seed);
    let mut y = apply(&x);
    let mut lambda = dot(&x, &y).re;
    let mut prev_delta = f64::INFINITY;
    for it in 1..=opts.max_iter {
        let ny = norm(&y);
        if ny == 0.0 {
            return Ok(Eigenpair {
                value: 0.0,
                vector: x,
                residual: 0.0,
                iterations: it,
            });
        }
        x = y.iter().map(|v| v / ny).collect();
        y = apply(&x);
        let next = dot(&x, &y).re;
        let delta = (next - lambda).abs();
        lambda = next;
        let q = if prev_delta.is_finite() && prev_delta > 0.0 {
            (delta / prev_delta).min(0.999_999)
        } else {
            0.999_999
        };
        prev_delta = delta;
        let err = if delta == 0.0 { 0.0 } else { delta * q / (1.0 - q) };
        if it >= 5 && err <= opts.tol * lambda.abs() {
            let residual = norm(&y.iter().zip(&x).map(|(a, b)| a - b * lambda).collect::<Vec<_>>());
            if opts.residual_tol.is_none_or(|r| residual <= r) {
                return Ok(Eigenpair {
                    value: lambda,
                    vector: x,
                    residual,
                    iterations: it,
                });
            }
        }
    }
    Err(Error::NoConvergence {
        method: "power iteration",
        iterations: opts.max_iter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_map() {
        let d = [1.0, 4.0, 2.5, 3.9];
        let apply = |x: &[C64]| x.iter().zip(&d).map(|(v, s)| v * *s).collect::<Vec<_>>();
        let e = dominant_eigenpair(apply, 4, &PowerOptions::default()).unwrap();
        assert!((e.value - 4.0).abs() < 1e-9);
    }

    #[test]
    fn zero_map() {
        let e = dominant_eigenpair(
            |x: &[C64]| vec![C64::new(0.0, 0.0); x.len()],
            3,
            &PowerOptions::default(),
        )
        .unwrap();
        assert_eq!(e.value, 0.0);
    }

    #[test]
    fn iteration_cap() {
        let d = [1.0, 1.0 - 1e-9];
        let apply = |x: &[C64]| x.iter().zip(&d).map(|(v, s)| v * *s).collect::<Vec<_>>();
        let opts = PowerOptions {
            max_iter: 3,
            ..PowerOptions::default()
        };
        assert!(matches!(
            dominant_eigenpair(apply, 2, &opts),
            Err(Error::NoConvergence { .. })
        ));
    }
}
