use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::fit_line;

/// Ball sizes `|B(e, τ)|` for τ = 1..=τ_max.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthProfile {
    pub radii: Vec<u32>,
    pub ball_sizes: Vec<usize>,
    /// The metric is left-invariant, so `sup_x |B(x, τ)| = |B(e, τ)|`.
    pub sup_is_uniform: bool,
}

impl GrowthProfile {
    /// `ln|B(e, τ)| / τ` per radius.
    pub fn ln_ratios(&self) -> Vec<f64> {
        self.radii
            .iter()
            .zip(&self.ball_sizes)
            .map(|(&t, &s)| (s as f64).ln() / t as f64)
            .collect()
    }

    /// Profile truncated to radii ≤ τ_max.
    pub fn prefix(&self, tau_max: u32) -> GrowthProfile {
        let n = self.radii.iter().take_while(|&&t| t <= tau_max).count();
        GrowthProfile {
            radii: self.radii[..n].to_vec(),
            ball_sizes: self.ball_sizes[..n].to_vec(),
            sup_is_uniform: self.sup_is_uniform,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GrowthVerdict {
    Subexponential,
    Exponential,
}

/// Verdict thresholds for [`classify_growth`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthThresholds {
    /// The tail ratio must be at most this fraction of the peak ratio.
    pub tail_fraction: f64,
    /// Minimum number of radii.
    pub min_radii: usize,
}

impl Default for GrowthThresholds {
    fn default() -> Self {
        GrowthThresholds {
            tail_fraction: 0.5,
            min_radii: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub subexp_ratio_tail: f64,
    pub peak_ratio: f64,
    pub poly_degree_fit: f64,
    pub exp_rate_fit: f64,
    pub ratio_nonincreasing_upper_half: bool,
    pub verdict: GrowthVerdict,
}

/// Classifies growth from a ball-size profile.
///
/// Both regressions use the upper half of the radii. The verdict is
/// subexponential when `ln|B|/τ` is nonincreasing on the upper half and its
/// last value is at most `tail_fraction` times its peak.
pub fn classify_growth(profile: &GrowthProfile, thresholds: &GrowthThresholds) -> Result<GrowthReport> {
    let n = profile.radii.len();
    if n < thresholds.min_radii.max(2) {
        return Err(Error::InsufficientData {
            needed: thresholds.min_radii,
            got: n,
        });
    }
    let ratios = profile.ln_ratios();
    let upper = n / 2;
    let taus: Vec<f64> = profile.radii[upper..].iter().map(|&t| t as f64).collect();
    let ln_taus: Vec<f64> = taus.iter().map(|t| t.ln()).collect();
    let ln_sizes: Vec<f64> = profile.ball_sizes[upper..].iter().map(|&s| (s as f64).ln()).collect();

    let poly = fit_line(&ln_taus, &ln_sizes).ok_or(Error::InsufficientData { needed: 2, got: 1 })?;
    let expo = fit_line(&taus, &ln_sizes).ok_or(Error::InsufficientData { needed: 2, got: 1 })?;

    let tail = *ratios.last().unwrap();
    let peak = ratios.iter().cloned().fold(0.0, f64::max);
    let nonincreasing = ratios[upper..].windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let verdict = if nonincreasing && tail <= thresholds.tail_fraction * peak {
        GrowthVerdict::Subexponential
    } else {
        GrowthVerdict::Exponential
    };
    Ok(GrowthReport {
        subexp_ratio_tail: tail,
        peak_ratio: peak,
        poly_degree_fit: poly.slope,
        exp_rate_fit: expo.slope,
        ratio_nonincreasing_upper_half: nonincreasing,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyPFit {
    /// `max_τ |B(e,τ)|·exp(−α τ^β)`.
    pub raw: f64,
    /// `max(raw, 1)`.
    pub constant: f64,
    pub argmax_tau: u32,
    /// Reported constant for each prefix τ_max of the profile.
    pub running: Vec<f64>,
}

impl PropertyPFit {
    /// The constant stops growing once the running maximum is attained in
    /// the first half of the profile.
    pub fn plateaus(&self) -> bool {
        let last = *self.running.last().unwrap_or(&1.0);
        let half = self.running.len() / 2;
        half > 0 && self.running[half - 1] >= last
    }
}

/// Smallest C with `|B(e,τ)| ≤ C·exp(α τ^β)` over the profile.
pub fn property_p_fit(profile: &GrowthProfile, alpha: f64, beta: f64) -> Result<PropertyPFit> {
    if !(alpha > 0.0) {
        return Err(Error::invalid("alpha", "must be > 0"));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::invalid("beta", "must lie in (0, 1)"));
    }
    let mut raw = f64::NEG_INFINITY;
    let mut argmax = 0;
    let mut running = Vec::with_capacity(profile.radii.len());
    for (&t, &s) in profile.radii.iter().zip(&profile.ball_sizes) {
        let c = s as f64 * (-alpha * (t as f64).powf(beta)).exp();
        if c > raw {
            raw = c;
            argmax = t;
        }
        running.push(raw.max(1.0));
    }
    Ok(PropertyPFit {
        raw,
        constant: raw.max(1.0),
        argmax_tau: argmax,
        running,
    })
}
