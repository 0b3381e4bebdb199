use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::norms::schur_bound;
use super::{BandOperator, Domain};
use crate::error::{Error, Result};
use crate::linalg::C64;

/// Envelope for entry moduli as a function of `l(y⁻¹x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Decay {
    Flat,
    Subexp { alpha: f64, beta: f64 },
}

impl Decay {
    pub fn envelope(&self, l: u32) -> f64 {
        match *self {
            Decay::Flat => 1.0,
            Decay::Subexp { alpha, beta } => (-alpha * (l as f64).powf(beta)).exp(),
        }
    }

    fn validate(&self) -> Result<()> {
        if let Decay::Subexp { alpha, beta } = *self {
            if !(alpha >= 0.0 && alpha.is_finite()) {
                return Err(Error::invalid("decay.alpha", "must be finite and ≥ 0"));
            }
            if !(beta > 0.0 && beta <= 1.0) {
                return Err(Error::invalid("decay.beta", "must lie in (0, 1]"));
            }
        }
        Ok(())
    }
}

/// Entries `t(x, y)` for every pair with `l(y⁻¹x) ≤ propagation`, with
/// uniform phase and modulus uniform in `[0, envelope(l)]`.
pub fn random_band_operator(domain: Arc<Domain>, seed: u64, propagation: u32, decay: Decay) -> Result<BandOperator> {
    decay.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = domain.len();
    let mut entries = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let l = domain.pair_length(i, j);
            if l <= propagation {
                let r = rng.random::<f64>() * decay.envelope(l);
                let phi = rng.random::<f64>() * std::f64::consts::TAU;
                entries.push((i, j, C64::from_polar(r, phi)));
            }
        }
    }
    BandOperator::from_entries(domain, propagation, entries)
}

/// Generator parameters as they appear in configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomSpec {
    pub propagation: u32,
    #[serde(default = "flat")]
    pub decay: Decay,
    /// Replace the draw R by `I + s·R/schur(R)`, so `‖A − I‖ ≤ s`.
    #[serde(default)]
    pub perturbation: Option<f64>,
    /// Take the Hermitian part of the result.
    #[serde(default)]
    pub self_adjoint: bool,
}

fn flat() -> Decay {
    Decay::Flat
}

impl RandomSpec {
    pub fn generate(&self, domain: Arc<Domain>, seed: u64) -> Result<BandOperator> {
        let mut a = random_band_operator(domain.clone(), seed, self.propagation, self.decay)?;
        if self.self_adjoint {
            a = a.hermitian_part();
        }
        if let Some(s) = self.perturbation {
            if !(0.0..1.0).contains(&s) {
                return Err(Error::invalid("perturbation", "must lie in [0, 1)"));
            }
            let sb = schur_bound(&a);
            let scaled = if sb > 0.0 { a.scale(C64::new(s / sb, 0.0)) } else { a };
            a = BandOperator::identity(domain).add(&scaled)?;
        }
        Ok(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::band_operator::norms::{dominating_vector, RowFilter};
    use crate::band_operator::{DomainSpec, Kernel};
    use crate::group_metric::{GroupKind, GroupModel};

    fn domain() -> Arc<Domain> {
        let g = Arc::new(GroupModel::new(GroupKind::FreeAbelian(2), 16, 1 << 20).unwrap());
        Domain::new(g, DomainSpec::Ball { radius: 4 }).unwrap()
    }

    #[test]
    fn same_seed_same_operator() {
        let d = domain();
        let a = random_band_operator(d.clone(), 7, 2, Decay::Flat).unwrap();
        let b = random_band_operator(d.clone(), 7, 2, Decay::Flat).unwrap();
        let c = random_band_operator(d, 8, 2, Decay::Flat).unwrap();
        assert_eq!(a.rows(), b.rows());
        assert_ne!(a.rows(), c.rows());
    }

    #[test]
    fn flat_zero_propagation_is_diagonal() {
        let a = random_band_operator(domain(), 1, 0, Decay::Flat).unwrap();
        a.for_each_entry(|i, j, _| assert_eq!(i, j));
        assert_eq!(a.nnz(), 25);
    }

    #[test]
    fn subexp_envelope_bounds_dominating_vector() {
        let d = domain();
        let a = random_band_operator(d.clone(), 3, 6, Decay::Subexp { alpha: 1.0, beta: 0.5 }).unwrap();
        let f = dominating_vector(&a, RowFilter::All);
        for (l, v) in f.support() {
            assert!(v <= (-(l as f64).sqrt()).exp());
        }
    }

    #[test]
    fn perturbed_identity_is_close_to_identity() {
        let spec = RandomSpec {
            propagation: 2,
            decay: Decay::Flat,
            perturbation: Some(0.5),
            self_adjoint: true,
        };
        let a = spec.generate(domain(), 11).unwrap();
        assert!(a.max_asymmetry() < 1e-15);
        let id = BandOperator::identity(a.domain().clone());
        assert!((schur_bound(&a.sub(&id).unwrap()) - 0.5).abs() < 1e-12);
    }
}
