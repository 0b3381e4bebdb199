use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::band_operator::norms::largest_singular_value;
use crate::band_operator::{weighted_norm, BandOperator, DenseView, Kernel};
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::stats::{fit_line, relative_spread};
use crate::weight_system::SubexpWeight;

const SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerLawOptions {
    /// Defaults to the midpoint of the admissible interval.
    #[serde(default)]
    pub theta: Option<f64>,
    /// Largest recorded n; a power of two.
    #[serde(default = "default_n_max")]
    pub n_max: usize,
}

fn default_n_max() -> usize {
    32
}

impl Default for PowerLawOptions {
    fn default() -> Self {
        PowerLawOptions {
            theta: None,
            n_max: default_n_max(),
        }
    }
}

/// Norms of `Aⁿ` and the normalized sequence
/// `b_n = D₁^{1/θ}‖Aⁿ‖_{α,β}‖A‖_{𝓑²}^{−n}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerNormTrace {
    pub theta: f64,
    /// Recorded n = 1, 2, 4, …, n_max.
    pub n_list: Vec<usize>,
    /// `ln‖Aⁿ‖_{α,β}` for n = 1..=2·n_max+1.
    pub ln_norms_ab: Vec<f64>,
    /// `ln‖Aⁿ‖_{𝓑²}` for n in `n_list`.
    pub ln_norms_op: Vec<f64>,
    pub norm_op: f64,
    /// Smallest D₁ ≥ 1 for which both doubling inequalities hold on `n_list`.
    pub fitted_d1: f64,
    /// D₁ fitted on each prefix of `n_list`.
    pub d1_running: Vec<f64>,
    /// `ln b_n` for n = 1..=2·n_max+1.
    pub ln_b: Vec<f64>,
    /// Largest violation of `b_{2n} ≤ b_n^{1+θ}` and `b_{2n+1} ≤ b₁b_n^{1+θ}`, in log form.
    pub worst_doubling_margin: f64,
    pub doubling_holds: bool,
    /// `b_{2^k} ≤ b₁^{(1+θ)^k}` on `n_list`.
    pub power_bound_holds: bool,
    /// Slope of `log₂ ln b_n` against `log₂ n` over n in `n_list` with b_n > 1.
    pub growth_slope: Option<f64>,
    pub slope_bound: f64,
    /// Relative spread of `d1_running` over the last half of `n_list`.
    pub d1_variation: f64,
    pub d1_stable: bool,
}

impl PowerNormTrace {
    pub fn ln_norm_ab(&self, n: usize) -> f64 {
        self.ln_norms_ab[n - 1]
    }

    pub fn ln_b(&self, n: usize) -> f64 {
        self.ln_b[n - 1]
    }

    pub fn slope_ok(&self, tolerance: f64) -> bool {
        self.growth_slope.is_none_or(|s| s <= self.slope_bound + tolerance)
    }
}

/// `M·A/s` with A sparse.
fn mul_band(m: &DMatrix<C64>, a: &BandOperator, s: f64) -> DMatrix<C64> {
    let n = m.nrows();
    let mut out = DMatrix::<C64>::zeros(n, n);
    for (k, row) in a.rows().iter().enumerate() {
        let col_k = m.column(k).into_owned();
        for &(j, v) in row {
            out.column_mut(j).axpy(v / s, &col_k, C64::new(1.0, 0.0));
        }
    }
    out
}

fn powers_of_two(n_max: usize) -> Result<Vec<usize>> {
    if n_max == 0 || !n_max.is_power_of_two() {
        return Err(Error::invalid("n_max", "must be a power of two"));
    }
    Ok(std::iter::successors(Some(1usize), |&n| (n < n_max).then_some(2 * n)).collect())
}

pub fn power_norm_sequence(a: &BandOperator, weight: &SubexpWeight, opts: &PowerLawOptions) -> Result<PowerNormTrace> {
    let theta = opts.theta.unwrap_or_else(|| weight.default_theta());
    let (lo, hi) = weight.theta_range();
    if !(theta > lo && theta < hi) {
        return Err(Error::invalid("theta", format!("must lie in ({lo:.4}, {hi})")));
    }
    let n_list = powers_of_two(opts.n_max)?;
    let domain = a.domain();
    let dim = domain.len();
    let norm_op = largest_singular_value(&a.to_matrix());
    if norm_op == 0.0 {
        return Err(Error::invalid("A", "zero operator"));
    }
    let ln_op = norm_op.ln();

    let top = 2 * opts.n_max + 1;
    let mut ln_ab = Vec::with_capacity(top);
    let mut ln_op_list = Vec::new();
    let mut m = DMatrix::<C64>::identity(dim, dim);
    for k in 1..=top {
        m = mul_band(&m, a, norm_op);
        let view = DenseView { domain, matrix: &m };
        ln_ab.push(weighted_norm(&view, weight).ln() + k as f64 * ln_op);
        if n_list.contains(&k) {
            ln_op_list.push(largest_singular_value(&m).ln() + k as f64 * ln_op);
        }
    }
    let at = |n: usize| ln_ab[n - 1];

    let mut ln_d = 0.0f64;
    let mut d1_running = Vec::with_capacity(n_list.len());
    for &n in &n_list {
        let base = (1.0 + theta) * at(n) + n as f64 * (1.0 - theta) * ln_op;
        let even = at(2 * n) - base;
        let odd = (at(2 * n + 1) - at(1) - base) * theta / (1.0 + theta);
        ln_d = ln_d.max(even).max(odd);
        d1_running.push(ln_d.exp());
    }
    let ln_b: Vec<f64> = (1..=top).map(|n| ln_d / theta + at(n) - n as f64 * ln_op).collect();
    let b = |n: usize| ln_b[n - 1];

    let mut worst = f64::NEG_INFINITY;
    for &n in &n_list {
        worst = worst.max(b(2 * n) - (1.0 + theta) * b(n));
        worst = worst.max(b(2 * n + 1) - b(1) - (1.0 + theta) * b(n));
    }
    let power_bound_holds = n_list
        .iter()
        .enumerate()
        .all(|(k, &n)| b(n) <= (1.0 + theta).powi(k as i32) * b(1) + SLACK * (1.0 + b(1).abs()));

    let (xs, ys): (Vec<f64>, Vec<f64>) = n_list
        .iter()
        .filter(|&&n| b(n) > 0.0)
        .map(|&n| ((n as f64).log2(), b(n).log2()))
        .unzip();
    let growth_slope = fit_line(&xs, &ys).map(|l| l.slope);

    let half = n_list.len() / 2;
    let d1_variation = relative_spread(&d1_running[half..]);
    Ok(PowerNormTrace {
        theta,
        n_list,
        ln_norms_ab: ln_ab,
        ln_norms_op: ln_op_list,
        norm_op,
        fitted_d1: ln_d.exp(),
        d1_running,
        ln_b,
        worst_doubling_margin: worst,
        doubling_holds: worst <= SLACK,
        power_bound_holds,
        growth_slope,
        slope_bound: (1.0 + theta).log2(),
        d1_variation,
        d1_stable: d1_variation < 0.20,
    })
}

/// `‖Aⁿ‖_{α,β}^{1/n}` against the spectral radius for self-adjoint A.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusComparison {
    pub r_op: f64,
    /// n = 1, 2, 4, …, n_max.
    pub n_list: Vec<usize>,
    pub r_weighted: Vec<f64>,
    pub rel_gap: Vec<f64>,
}

impl RadiusComparison {
    pub fn final_gap(&self) -> f64 {
        *self.rel_gap.last().expect("n_list is nonempty")
    }

    pub fn gap_at(&self, n: usize) -> Option<f64> {
        self.n_list.iter().position(|&m| m == n).map(|k| self.rel_gap[k])
    }
}

pub fn spectral_radius_compare(a: &BandOperator, weight: &SubexpWeight, n_max: usize) -> Result<RadiusComparison> {
    let n_list = powers_of_two(n_max)?;
    let mut scale: f64 = 1.0;
    a.for_each_entry(|_, _, v| scale = scale.max(v.norm()));
    let asym = a.max_asymmetry();
    if asym > SLACK * scale {
        return Err(Error::NotSelfAdjoint(asym));
    }
    let matrix = a.to_matrix();
    let eig = SymmetricEigen::new(matrix.clone());
    let r_op = eig.eigenvalues.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if r_op == 0.0 {
        return Err(Error::invalid("A", "zero operator"));
    }
    let domain = a.domain();
    let mut m = matrix / C64::new(r_op, 0.0);
    let mut r_weighted = Vec::with_capacity(n_list.len());
    for (k, &n) in n_list.iter().enumerate() {
        if k > 0 {
            m = &m * &m;
        }
        let ln_norm = weighted_norm(&DenseView { domain, matrix: &m }, weight).ln();
        r_weighted.push(r_op * (ln_norm / n as f64).exp());
    }
    let rel_gap = r_weighted.iter().map(|r| (r - r_op).abs() / r_op).collect();
    Ok(RadiusComparison {
        r_op,
        n_list,
        r_weighted,
        rel_gap,
    })
}
