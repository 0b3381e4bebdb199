use serde::{Deserialize, Serialize};

use crate::band_operator::{dominating_vector, Kernel, RowFilter};
use crate::error::{Error, Result};
use crate::stats::fit_line;

/// Candidate exponents β'.
pub const BETA_GRID: [f64; 10] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];
/// Values below this fraction of the peak are treated as round-off.
pub const NOISE_FLOOR: f64 = 1e-8;
pub const MIN_LENGTHS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaFit {
    pub beta: f64,
    pub alpha: f64,
    pub ln_c: f64,
    pub rms: f64,
}

/// Best fit of `ln f(z) ≈ ln C − α' l(z)^{β'}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub alpha: f64,
    pub beta: f64,
    pub c: f64,
    pub rms: f64,
    pub grid: Vec<BetaFit>,
    /// `(l(z), f(z))` pairs used in the fit.
    pub points: Vec<(u32, f64)>,
}

impl DecayFit {
    pub fn envelope(&self, l: u32) -> f64 {
        self.c * (-self.alpha * (l as f64).powf(self.beta)).exp()
    }
}

pub fn decay_fit<K: Kernel>(kernel: &K, rows: RowFilter) -> Result<DecayFit> {
    let f = dominating_vector(kernel, rows);
    decay_fit_points(f.support().collect())
}

/// Fits over explicit `(length, value)` pairs; zero values are ignored.
pub fn decay_fit_points(mut points: Vec<(u32, f64)>) -> Result<DecayFit> {
    let peak = points.iter().map(|p| p.1).fold(0.0, f64::max);
    points.retain(|&(_, v)| v > NOISE_FLOOR * peak && v > 0.0);
    points.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut lengths: Vec<u32> = points.iter().map(|p| p.0).collect();
    lengths.dedup();
    if lengths.len() < MIN_LENGTHS {
        return Err(Error::InsufficientData {
            needed: MIN_LENGTHS,
            got: lengths.len(),
        });
    }
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let grid: Vec<BetaFit> = BETA_GRID
        .iter()
        .map(|&beta| {
            let xs: Vec<f64> = points.iter().map(|p| (p.0 as f64).powf(beta)).collect();
            let line = fit_line(&xs, &ys).expect("at least six distinct lengths");
            BetaFit {
                beta,
                alpha: -line.slope,
                ln_c: line.intercept,
                rms: line.rms,
            }
        })
        .collect();
    let best = *grid
        .iter()
        .min_by(|a, b| a.rms.total_cmp(&b.rms))
        .expect("grid is nonempty");
    Ok(DecayFit {
        alpha: best.alpha,
        beta: best.beta,
        c: best.ln_c.exp(),
        rms: best.rms,
        grid,
        points,
    })
}
