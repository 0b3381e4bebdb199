//! Spectral bounds of `A*A`, Neumann-series inversion, power-norm traces,
//! decay fits and the spectral-radius cross-check.
//!
//! Inverses and residuals are evaluated on the interior core of Ω (rows
//! deeper than half the maximal depth); inequality checks on powers use
//! the full truncation, which is itself an element of the algebra.

mod decay;
mod power;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::band_operator::norms::{largest_singular_value, operator_norm, schur_bound, weighted_norm, NormMethod};
use crate::band_operator::{BandOperator, DenseKernel, DenseView, Domain, Kernel, RowFilter};
use crate::error::{Error, Result};
use crate::linalg::{dominant_eigenpair, PowerOptions, C64};
use crate::weight_system::SubexpWeight;

pub use decay::{decay_fit, decay_fit_points, BetaFit, DecayFit, BETA_GRID};
pub use power::{power_norm_sequence, spectral_radius_compare, PowerLawOptions, PowerNormTrace, RadiusComparison};

/// Largest Ω for which `A*A` is diagonalized densely.
pub const DENSE_CAP: usize = 2000;
/// `C₁ ≤ SINGULAR_RATIO·C₂` is treated as singular.
pub const SINGULAR_RATIO: f64 = 1e-12;
/// Eigenpair residual bound, relative to `max(1, C₂)`.
pub const CERTIFY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundsMethod {
    DenseEigen,
    PowerIteration,
}

/// `C₁ I ≤ A*A ≤ C₂ I` on ℓ²(Ω).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralBounds {
    pub c1: f64,
    pub c2: f64,
    pub residual_c1: f64,
    pub residual_c2: f64,
    pub method: BoundsMethod,
}

impl SpectralBounds {
    /// `(C₂ − C₁)/(C₂ + C₁)`.
    pub fn b_contraction(&self) -> f64 {
        (self.c2 - self.c1) / (self.c2 + self.c1)
    }
}

fn gram(a: &DMatrix<C64>) -> DMatrix<C64> {
    a.ad_mul(a)
}

fn eigen_residual(m: &DMatrix<C64>, lambda: f64, x: &DVector<C64>) -> f64 {
    (m * x - x * C64::new(lambda, 0.0)).norm() / x.norm()
}

pub fn spectral_bounds<K: Kernel>(a: &K) -> Result<SpectralBounds> {
    let n = a.domain().len();
    if n == 0 {
        return Err(Error::invalid("A", "empty domain"));
    }
    let bounds = if n <= DENSE_CAP {
        let m = gram(&a.to_matrix());
        let eig = SymmetricEigen::new(m.clone());
        let (mut lo, mut hi) = (0, 0);
        for (k, &v) in eig.eigenvalues.iter().enumerate() {
            if v < eig.eigenvalues[lo] {
                lo = k;
            }
            if v > eig.eigenvalues[hi] {
                hi = k;
            }
        }
        let (c1, c2) = (eig.eigenvalues[lo], eig.eigenvalues[hi]);
        SpectralBounds {
            c1,
            c2,
            residual_c1: eigen_residual(&m, c1, &eig.eigenvectors.column(lo).into_owned()),
            residual_c2: eigen_residual(&m, c2, &eig.eigenvectors.column(hi).into_owned()),
            method: BoundsMethod::DenseEigen,
        }
    } else {
        let scale = schur_bound(a).powi(2).max(1.0);
        let opts = PowerOptions {
            residual_tol: Some(CERTIFY_TOL * scale),
            ..PowerOptions::default()
        };
        let apply = |x: &[C64]| a.adjoint_matvec(&a.matvec(x));
        let top = dominant_eigenpair(apply, n, &opts)?;
        let c2 = top.value;
        let shifted = |x: &[C64]| {
            let y = apply(x);
            x.iter().zip(y).map(|(u, v)| u * c2 - v).collect::<Vec<_>>()
        };
        let low = dominant_eigenpair(shifted, n, &opts)?;
        SpectralBounds {
            c1: c2 - low.value,
            c2,
            residual_c1: low.residual,
            residual_c2: top.residual,
            method: BoundsMethod::PowerIteration,
        }
    };
    let tol = CERTIFY_TOL * bounds.c2.max(1.0);
    if bounds.residual_c1 > tol || bounds.residual_c2 > tol {
        return Err(Error::NoConvergence {
            method: "spectral bound certification",
            iterations: 0,
        });
    }
    if bounds.c1 <= SINGULAR_RATIO * bounds.c2 {
        return Err(Error::NotPositiveDefinite {
            c1: bounds.c1,
            c2: bounds.c2,
        });
    }
    Ok(bounds)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NeumannOptions {
    pub tol: f64,
    /// Cap on the number of summed terms.
    pub max_terms: usize,
}

impl Default for NeumannOptions {
    fn default() -> Self {
        NeumannOptions {
            tol: 1e-10,
            max_terms: 1 << 20,
        }
    }
}

/// `‖Bⁿ‖_{α,β}` and `‖Bⁿ‖_{𝓑²}` for one recorded n.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TermNorm {
    pub n: usize,
    pub norm_ab: f64,
    pub norm_op: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InversionReport {
    pub c1: f64,
    pub c2: f64,
    pub b_contraction: f64,
    pub neumann_terms: usize,
    pub term_norms: Vec<TermNorm>,
    /// `‖A·Â⁻¹ − I‖_{𝓑²}` on Ω.
    pub inverse_residual: f64,
    /// `‖Â⁻¹·A − I‖_{𝓑²}` on Ω.
    pub inverse_residual_left: f64,
    /// Largest entry of `A·Â⁻¹ − I` over the core rows.
    pub core_residual: f64,
    pub core_rows: usize,
    pub decay_fit: Option<DecayFit>,
}

impl InversionReport {
    /// Largest `‖Bⁿ‖_{𝓑²} / b_contractionⁿ` over recorded n ≥ `after`.
    pub fn worst_term_rate(&self, after: usize) -> f64 {
        self.term_norms
            .iter()
            .filter(|t| t.n >= after)
            .map(|t| t.norm_op / self.b_contraction.powi(t.n as i32))
            .fold(0.0, f64::max)
    }
}

/// Inverts A through `(A*A)⁻¹ = (2/(C₁+C₂)) Σ Bⁿ`, `B = I − 2A*A/(C₁+C₂)`,
/// and `A⁻¹ = (A*A)⁻¹A*`.
///
/// Partial sums are doubled, `S_{2m} = S_m + B^m S_m`, so the recorded
/// term norms are those of `B^m` at m = 1, 2, 4, …. Summation stops once
/// `C₂·(2/(C₁+C₂))·‖B^m‖/(1 − ρ) < tol`, which bounds the error of
/// `A·Â⁻¹`.
pub fn neumann_invert(
    a: &BandOperator,
    weight: &SubexpWeight,
    opts: &NeumannOptions,
) -> Result<(DenseKernel, InversionReport)> {
    if !(opts.tol > 0.0) {
        return Err(Error::invalid("tol", "must be > 0"));
    }
    let bounds = spectral_bounds(a)?;
    let domain = a.domain().clone();
    let n = domain.len();
    let am = a.to_matrix();
    let k = 2.0 / (bounds.c1 + bounds.c2);
    let rho = bounds.b_contraction();
    let id = DMatrix::<C64>::identity(n, n);
    let b = &id - gram(&am) * C64::new(k, 0.0);

    let mut sum = id.clone();
    let mut power = b;
    let mut m = 1usize;
    let mut term_norms = Vec::new();
    loop {
        let norm_op = largest_singular_value(&power);
        term_norms.push(TermNorm {
            n: m,
            norm_ab: weighted_norm(
                &DenseView {
                    domain: &domain,
                    matrix: &power,
                },
                weight,
            ),
            norm_op,
        });
        if bounds.c2 * k * norm_op / (1.0 - rho) < opts.tol {
            break;
        }
        if 2 * m > opts.max_terms {
            return Err(Error::NoConvergence {
                method: "Neumann series",
                iterations: m,
            });
        }
        sum = &sum + &power * &sum;
        power = &power * &power;
        m *= 2;
    }

    let gram_inv = sum * C64::new(k, 0.0);
    let inv = gram_inv * am.adjoint();
    let right = &am * &inv - &id;
    let left = &inv * &am - &id;
    let core = domain.core_rows();
    let core_residual = core
        .iter()
        .flat_map(|&i| right.row(i).iter().map(|v| v.norm()).collect::<Vec<_>>())
        .fold(0.0, f64::max);
    let inverse = DenseKernel::new(domain.clone(), inv)?;
    let margin = core_margin(&domain);
    let fit = decay_fit(&inverse, RowFilter::Interior(margin)).ok();
    let report = InversionReport {
        c1: bounds.c1,
        c2: bounds.c2,
        b_contraction: rho,
        neumann_terms: m,
        term_norms,
        inverse_residual: largest_singular_value(&right),
        inverse_residual_left: largest_singular_value(&left),
        core_residual,
        core_rows: core.len(),
        decay_fit: fit,
    };
    Ok((inverse, report))
}

/// Depth margin selecting [`Domain::core_rows`].
pub fn core_margin(domain: &Arc<Domain>) -> u32 {
    (0..domain.len()).map(|i| domain.depth(i)).max().unwrap_or(0) / 2
}

/// Dense inverse, for cross-checks.
pub fn dense_inverse<K: Kernel>(a: &K) -> Result<DMatrix<C64>> {
    a.to_matrix()
        .try_inverse()
        .ok_or(Error::NotPositiveDefinite { c1: 0.0, c2: 0.0 })
}

/// Operator norm through the method suited to the size of Ω.
pub fn op_norm_auto<K: Kernel>(a: &K) -> Result<f64> {
    let method = if a.domain().len() <= DENSE_CAP {
        NormMethod::DenseOracle
    } else {
        NormMethod::PowerIteration
    };
    operator_norm(a, method)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::band_operator::DomainSpec;
    use crate::group_metric::{GroupKind, GroupModel};

    fn interval(len: usize) -> (Arc<Domain>, SubexpWeight) {
        let g = Arc::new(GroupModel::new(GroupKind::FreeAbelian(1), 2 * len as u32 + 2, 1 << 20).unwrap());
        (
            Domain::new(g.clone(), DomainSpec::Interval { len }).unwrap(),
            SubexpWeight::new(g, 1.0, 0.5).unwrap(),
        )
    }

    #[test]
    fn bounds_of_twice_identity() {
        let (d, _) = interval(10);
        let a = BandOperator::scaled_identity(d, C64::new(2.0, 0.0));
        let b = spectral_bounds(&a).unwrap();
        assert!((b.c1 - 4.0).abs() < 1e-12 && (b.c2 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn tridiagonal_bounds_follow_toeplitz_formula() {
        let (d, _) = interval(200);
        let a = BandOperator::stencil(d, 1.0, 0.4).unwrap();
        let b = spectral_bounds(&a).unwrap();
        let c = (std::f64::consts::PI / 201.0).cos();
        assert!((b.c1 - (1.0 - 0.8 * c).powi(2)).abs() < 1e-10);
        assert!((b.c2 - (1.0 + 0.8 * c).powi(2)).abs() < 1e-10);
        assert!((b.b_contraction() - 0.9756).abs() < 1e-4);
    }

    #[test]
    fn zero_row_is_singular() {
        let (d, _) = interval(8);
        let entries = (1..8).map(|i| (i, i, C64::new(1.0, 0.0)));
        let a = BandOperator::from_entries(d, 0, entries).unwrap();
        assert!(matches!(spectral_bounds(&a), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn twice_identity_inverts_in_one_term() {
        let (d, w) = interval(10);
        let a = BandOperator::scaled_identity(d, C64::new(2.0, 0.0));
        let (inv, report) = neumann_invert(&a, &w, &NeumannOptions::default()).unwrap();
        assert_eq!(report.neumann_terms, 1);
        assert_eq!(report.term_norms[0].norm_op, 0.0);
        let expected = DMatrix::<C64>::identity(10, 10) * C64::new(0.5, 0.0);
        assert_eq!(inv.matrix(), &expected);
    }

    #[test]
    fn max_terms_is_enforced() {
        let (d, w) = interval(50);
        let a = BandOperator::stencil(d, 1.0, 0.4).unwrap();
        let opts = NeumannOptions {
            tol: 1e-10,
            max_terms: 16,
        };
        assert!(matches!(
            neumann_invert(&a, &w, &opts),
            Err(Error::NoConvergence { .. })
        ));
    }
}
