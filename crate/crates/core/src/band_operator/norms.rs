use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{BandOperator, Domain, Kernel};
use crate::error::{Error, Result};
use crate::linalg::{dominant_eigenpair, PowerOptions, C64};
use crate::weight_system::SubexpWeight;

/// Which rows of Ω contribute to a dominating vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowFilter {
    All,
    /// Only rows deeper than this many steps inside Ω.
    Interior(u32),
}

/// `f(z) = sup |t(x, y)|` over the pairs of Ω with `y⁻¹x = z`, indexed like
/// [`Domain::diffs`].
#[derive(Debug, Clone)]
pub struct DominatingVector {
    domain: Arc<Domain>,
    values: Vec<f64>,
}

impl DominatingVector {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    /// `max_{l(z) = n} f(z)` for n = 0..=max length.
    pub fn by_length(&self) -> Vec<f64> {
        let lens = self.domain.diff_lengths();
        let mut out = vec![0.0; self.domain.max_diff_length() as usize + 1];
        for (&l, &f) in lens.iter().zip(&self.values) {
            let slot = &mut out[l as usize];
            *slot = f64::max(*slot, f);
        }
        out
    }

    /// `(length, f)` pairs over the support.
    pub fn support(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.domain
            .diff_lengths()
            .iter()
            .copied()
            .zip(self.values.iter().copied())
            .filter(|&(_, f)| f > 0.0)
    }
}

pub fn dominating_vector<K: Kernel>(kernel: &K, rows: RowFilter) -> DominatingVector {
    let domain = kernel.domain().clone();
    let mut values = vec![0.0; domain.diffs().len()];
    let keep: Vec<bool> = match rows {
        RowFilter::All => vec![true; domain.len()],
        RowFilter::Interior(m) => (0..domain.len()).map(|i| domain.depth(i) > m).collect(),
    };
    kernel.for_each_entry(|i, j, v| {
        if keep[i] {
            let k = domain.diff_id(i, j);
            values[k] = f64::max(values[k], v.norm());
        }
    });
    DominatingVector { domain, values }
}

/// `‖A‖_{α,β} = ‖f·w‖₂`.
pub fn weighted_norm<K: Kernel>(kernel: &K, weight: &SubexpWeight) -> f64 {
    weighted_norm_of(&dominating_vector(kernel, RowFilter::All), weight)
}

pub fn weighted_norm_of(f: &DominatingVector, weight: &SubexpWeight) -> f64 {
    f.support()
        .map(|(l, v)| {
            let x = v * weight.w_len(l);
            x * x
        })
        .sum::<f64>()
        .sqrt()
}

/// `‖A‖_{1,v} = Σ f·v`.
pub fn aux_norm_1v<K: Kernel>(kernel: &K, weight: &SubexpWeight) -> f64 {
    aux_norm_1v_of(&dominating_vector(kernel, RowFilter::All), weight)
}

pub fn aux_norm_1v_of(f: &DominatingVector, weight: &SubexpWeight) -> f64 {
    f.support().map(|(l, v)| v * weight.v_len(l)).sum()
}

/// `‖w⁻¹χ_S‖₂` over the support S of f.
pub fn inverse_weight_l2_on_support(f: &DominatingVector, weight: &SubexpWeight) -> f64 {
    f.support().map(|(l, _)| weight.w_len(l).powi(-2)).sum::<f64>().sqrt()
}

/// Maximum of the largest absolute row sum and column sum.
pub fn schur_bound<K: Kernel>(kernel: &K) -> f64 {
    let n = kernel.domain().len();
    let mut rows = vec![0.0; n];
    let mut cols = vec![0.0; n];
    kernel.for_each_entry(|i, j, v| {
        let a = v.norm();
        rows[i] += a;
        cols[j] += a;
    });
    rows.iter().chain(&cols).copied().fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMethod {
    /// Largest singular value of the dense matrix.
    DenseOracle,
    /// Power iteration on `A*A` through matvecs.
    PowerIteration,
}

/// Largest singular value of the kernel on ℓ²(Ω).
pub fn operator_norm<K: Kernel>(kernel: &K, method: NormMethod) -> Result<f64> {
    let n = kernel.domain().len();
    if n == 0 {
        return Ok(0.0);
    }
    match method {
        NormMethod::DenseOracle => Ok(largest_singular_value(&kernel.to_matrix())),
        NormMethod::PowerIteration => {
            let opts = PowerOptions {
                tol: 1e-13,
                ..PowerOptions::default()
            };
            let e = dominant_eigenpair(|x| kernel.adjoint_matvec(&kernel.matvec(x)), n, &opts)?;
            Ok(e.value.max(0.0).sqrt())
        }
    }
}

pub fn largest_singular_value(m: &DMatrix<C64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().iter().copied().fold(0.0, f64::max)
}

/// Splits A into the part with `l(y⁻¹x) ≤ n` and the remainder.
pub fn truncate_propagation(a: &BandOperator, n: u32) -> Result<(BandOperator, BandOperator)> {
    let d = a.domain().clone();
    let mut near = Vec::new();
    let mut far = Vec::new();
    if a.propagation() < n {
        return Err(Error::invalid(
            "n",
            format!("truncation {n} exceeds propagation {}", a.propagation()),
        ));
    }
    a.for_each_entry(|i, j, v| {
        if d.pair_length(i, j) <= n {
            near.push((i, j, v));
        } else {
            far.push((i, j, v));
        }
    });
    Ok((
        BandOperator::from_entries(d.clone(), n, near)?,
        BandOperator::from_entries(d, a.propagation(), far)?,
    ))
}
