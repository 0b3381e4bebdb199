//! The subexponential weight pair and numerical admissibility checks.
//!
//! For exponents α > 0 and 0 < β < 1 the weights are
//!
//! ```text
//! w(z) = exp(α l(z)^β)
//! v(z) = exp(α (2^β − 1) l(z)^β)
//! (v/w)(z) = exp(−α (2 − 2^β) l(z)^β)
//! ```
//!
//! Both depend on z only through its word length, and the metric is
//! left-invariant, so every `sup_x` over row or column norms collapses to
//! the value at the identity. Sums over balls are accumulated from the BFS
//! sphere counts of the group.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group_metric::{Element, GroupModel};
use crate::stats::relative_spread;

/// Relative slack used by every inequality check.
pub const SLACK: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct SubexpWeight {
    alpha: f64,
    beta: f64,
    group: Arc<GroupModel>,
}

impl SubexpWeight {
    pub fn new(group: Arc<GroupModel>, alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::invalid("alpha", format!("must be > 0, got {alpha}")));
        }
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::invalid("beta", format!("must lie in (0, 1), got {beta}")));
        }
        Ok(SubexpWeight { alpha, beta, group })
    }

    /// The degenerate `w ≡ v ≡ 1` weight (the α → 0 limit).
    pub fn unit(group: Arc<GroupModel>) -> Self {
        SubexpWeight {
            alpha: 0.0,
            beta: 0.5,
            group,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn group(&self) -> &Arc<GroupModel> {
        &self.group
    }

    pub fn is_unit(&self) -> bool {
        self.alpha == 0.0
    }

    fn lb(&self, l: u32) -> f64 {
        (l as f64).powf(self.beta)
    }

    pub fn w_len(&self, l: u32) -> f64 {
        (self.alpha * self.lb(l)).exp()
    }

    pub fn v_len(&self, l: u32) -> f64 {
        (self.alpha * (2f64.powf(self.beta) - 1.0) * self.lb(l)).exp()
    }

    /// `(v/w)(l) = exp(−α(2 − 2^β) l^β)`, evaluated directly.
    pub fn ratio_len(&self, l: u32) -> f64 {
        (-self.alpha * (2.0 - 2f64.powf(self.beta)) * self.lb(l)).exp()
    }

    pub fn eval_w(&self, z: &Element) -> Result<f64> {
        Ok(self.w_len(self.group.length(z)?))
    }

    pub fn eval_v(&self, z: &Element) -> Result<f64> {
        Ok(self.v_len(self.group.length(z)?))
    }

    pub fn eval_vw_ratio(&self, z: &Element) -> Result<f64> {
        Ok(self.ratio_len(self.group.length(z)?))
    }

    /// `(1/(3 − 2^β), 1)`.
    pub fn theta_range(&self) -> (f64, f64) {
        (1.0 / (3.0 - 2f64.powf(self.beta)), 1.0)
    }

    pub fn default_theta(&self) -> f64 {
        let (lo, hi) = self.theta_range();
        0.5 * (lo + hi)
    }

    /// `q(τ) = exp(−α(2 − 2^β) τ^β)`.
    pub fn geometric_q(&self, tau: f64) -> f64 {
        (-self.alpha * (2.0 - 2f64.powf(self.beta)) * tau.powf(self.beta)).exp()
    }

    /// Closed-form envelope minimizer `τ*(t) = 1 + f(t)` with
    /// `f(t) = (ln t / (α(3 − 2^β)))^{1/β} − 1`.
    pub fn tau_star(&self, t: f64) -> f64 {
        let f = (t.ln() / (self.alpha * (3.0 - 2f64.powf(self.beta)))).powf(1.0 / self.beta) - 1.0;
        1.0 + f
    }

    /// `‖(v/w)χ_{l ≤ max_len}‖₂`.
    pub fn ratio_l2(&self, max_len: u32) -> Result<f64> {
        let spheres = self.spheres_through(max_len)?;
        Ok(spheres
            .iter()
            .enumerate()
            .map(|(n, &c)| c as f64 * self.ratio_len(n as u32).powi(2))
            .sum::<f64>()
            .sqrt())
    }

    /// `‖w⁻¹χ_{l ≤ max_len}‖₂`.
    pub fn inverse_w_l2(&self, max_len: u32) -> Result<f64> {
        let spheres = self.spheres_through(max_len)?;
        Ok(spheres
            .iter()
            .enumerate()
            .map(|(n, &c)| c as f64 * self.w_len(n as u32).powi(-2))
            .sum::<f64>()
            .sqrt())
    }

    /// `(Σ_{n=0}^{max_len} exp(−2α n^β) |B(e, n+1)|)^{1/2}`, the series constant
    /// of the embedding bound `‖A‖_op ≤ C‖A‖_{α,β}`.
    pub fn embedding_constant(&self, max_len: u32) -> Result<f64> {
        let mut total = 0.0;
        for n in 0..=max_len {
            let ball = self.group.ball_size(n + 1)? as f64;
            total += (-2.0 * self.alpha * self.lb(n)).exp() * ball;
        }
        Ok(total.sqrt())
    }

    fn spheres_through(&self, max_len: u32) -> Result<Vec<usize>> {
        if max_len > self.group.radius_cap() {
            return Err(Error::RadiusExceeded {
                element: format!("length {max_len}"),
                cap: self.group.radius_cap(),
            });
        }
        let mut s = self.group.sphere_sizes();
        s.truncate(max_len as usize + 1);
        Ok(s)
    }
}

// ---------------------------------------------------------------------------
// Weight axioms
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundedRatio {
    pub c0: u32,
    pub fitted_d: f64,
    /// `exp(α C₀^β)`, the bound from concavity of `s ↦ s^β`.
    pub analytic_d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub radius: u32,
    pub pairs_checked: usize,
    pub min_weight: f64,
    pub max_asymmetry: f64,
    pub diagonal_sup: f64,
    pub bounded_ratio: Vec<BoundedRatio>,
}

/// Checks the weight axioms on `B(e, radius)`.
///
/// The bounded-ratio constant is computed exhaustively: for every pair
/// (x, y) in the ball and every pair of perturbations `x̃ = x·u`, `ỹ = y·u'`
/// with `l(u) + l(u') ≤ C₀`.
pub fn weight_axiom_check(weight: &SubexpWeight, radius: u32, c0_list: &[u32]) -> Result<AxiomReport> {
    let g = weight.group();
    let ball = g.ball(radius)?;
    let mut min_weight = f64::INFINITY;
    let mut max_asym: f64 = 0.0;
    let mut diag: f64 = 0.0;
    for x in ball {
        diag = diag.max(weight.w_len(g.distance(x, x)?));
        for y in ball {
            let wxy = weight.w_len(g.distance(x, y)?);
            let wyx = weight.w_len(g.distance(y, x)?);
            if wxy < 1.0 - SLACK {
                return Err(Error::AxiomViolation(format!("w({x},{y}) = {wxy} < 1")));
            }
            let asym = (wxy - wyx).abs() / wxy;
            if asym > SLACK {
                return Err(Error::AxiomViolation(format!(
                    "w({x},{y}) = {wxy} ≠ w({y},{x}) = {wyx}"
                )));
            }
            min_weight = min_weight.min(wxy);
            max_asym = max_asym.max(asym);
        }
    }
    if diag > 1.0 + SLACK {
        return Err(Error::AxiomViolation(format!("sup_x w(x,x) = {diag} > 1")));
    }

    let mut bounded_ratio = Vec::new();
    for &c0 in c0_list {
        let offsets = g.ball(c0 + 1)?;
        let mut fitted: f64 = 1.0;
        for x in ball {
            for y in ball {
                let wxy = weight.w_len(g.distance(x, y)?);
                for u in offsets {
                    let lu = g.length(u)?;
                    let xt = g.mul(x, u);
                    for u2 in g.ball(c0 - lu + 1)? {
                        let yt = g.mul(y, u2);
                        let wt = weight.w_len(g.distance(&xt, &yt)?);
                        fitted = fitted.max(wxy / wt);
                    }
                }
            }
        }
        bounded_ratio.push(BoundedRatio {
            c0,
            fitted_d: fitted,
            analytic_d: (weight.alpha() * (c0 as f64).powf(weight.beta())).exp(),
        });
    }
    Ok(AxiomReport {
        radius,
        pairs_checked: ball.len() * ball.len(),
        min_weight,
        max_asymmetry: max_asym,
        diagonal_sup: diag,
        bounded_ratio,
    })
}

// ---------------------------------------------------------------------------
// Splitting inequality
// ---------------------------------------------------------------------------

/// `s^β + (2^β − 1)(1 − s)^β`.
pub fn scalar_split(s: f64, beta: f64) -> f64 {
    s.powf(beta) + (2f64.powf(beta) - 1.0) * (1.0 - s).powf(beta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarSplitReport {
    pub points: usize,
    /// `max (1 − [s^β + (2^β−1)(1−s)^β])`; negative when the inequality is strict everywhere.
    pub max_violation: f64,
    pub worst_s: f64,
    pub worst_beta: f64,
}

pub fn scalar_split_check(s_grid: &[f64], beta_grid: &[f64]) -> Result<ScalarSplitReport> {
    if s_grid.is_empty() || beta_grid.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let mut report = ScalarSplitReport {
        points: s_grid.len() * beta_grid.len(),
        max_violation: f64::NEG_INFINITY,
        worst_s: f64::NAN,
        worst_beta: f64::NAN,
    };
    for &b in beta_grid {
        for &s in s_grid {
            let v = 1.0 - scalar_split(s, b);
            if v > report.max_violation {
                report.max_violation = v;
                report.worst_s = s;
                report.worst_beta = b;
            }
        }
    }
    Ok(report)
}

/// Exhaustive below `exhaustive_max` ball elements, seeded sampling above.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TripleBudget {
    pub exhaustive_max: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for TripleBudget {
    fn default() -> Self {
        TripleBudget {
            exhaustive_max: 200,
            samples: 2_000_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplittingReport {
    pub radius: u32,
    pub exhaustive: bool,
    pub triples_checked: usize,
    pub violations: usize,
    /// `min (RHS − LHS)/LHS` over all checked triples.
    pub worst_margin: f64,
    pub witness: Option<[Element; 3]>,
}

/// Checks `w(x,y) ≤ w(x,z)v(z,y) + v(x,z)w(z,y)` (D = 1) on `B(e, radius)`.
pub fn splitting_check(weight: &SubexpWeight, radius: u32, budget: &TripleBudget) -> Result<SplittingReport> {
    let g = weight.group();
    let ball = g.ball(radius)?;
    let n = ball.len();
    let mut dist = vec![0u32; n * n];
    for (i, x) in ball.iter().enumerate() {
        for (j, y) in ball.iter().enumerate() {
            dist[i * n + j] = g.distance(x, y)?;
        }
    }
    let max_len = dist.iter().copied().max().unwrap_or(0) as usize;
    let w: Vec<f64> = (0..=max_len as u32).map(|l| weight.w_len(l)).collect();
    let v: Vec<f64> = (0..=max_len as u32).map(|l| weight.v_len(l)).collect();

    let mut report = SplittingReport {
        radius,
        exhaustive: n <= budget.exhaustive_max,
        triples_checked: 0,
        violations: 0,
        worst_margin: f64::INFINITY,
        witness: None,
    };
    let mut worst = (0, 0, 0);
    let mut check = |i: usize, j: usize, k: usize, report: &mut SplittingReport| {
        let (dxy, dxz, dzy) = (dist[i * n + j], dist[i * n + k], dist[k * n + j]);
        let lhs = w[dxy as usize];
        let rhs = w[dxz as usize] * v[dzy as usize] + v[dxz as usize] * w[dzy as usize];
        let margin = (rhs - lhs) / lhs;
        report.triples_checked += 1;
        if margin < -SLACK {
            report.violations += 1;
        }
        if margin < report.worst_margin {
            report.worst_margin = margin;
            worst = (i, j, k);
        }
    };
    if report.exhaustive {
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    check(i, j, k, &mut report);
                }
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
        for _ in 0..budget.samples {
            let (i, j, k) = (rng.random_range(0..n), rng.random_range(0..n), rng.random_range(0..n));
            check(i, j, k, &mut report);
        }
    }
    if report.triples_checked > 0 {
        report.witness = Some([ball[worst.0].clone(), ball[worst.1].clone(), ball[worst.2].clone()]);
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// ℓ² sums and the admissibility profile
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailNorms {
    /// `‖(v/w)χ_{B(e,τ)}‖₂`
    pub inside: f64,
    /// `‖(v/w)χ_{B(e,R)∖B(e,τ)}‖₂`
    pub outside: f64,
}

/// Exact finite sums of `(v/w)²` over enumerated balls.
pub fn l2_tail_norms(weight: &SubexpWeight, tau: u32, big_r: u32) -> Result<TailNorms> {
    if tau > big_r {
        return Err(Error::invalid("tau", format!("τ = {tau} exceeds R = {big_r}")));
    }
    let g = weight.group();
    let ball = g.ball(big_r)?;
    let mut inside = 0.0;
    let mut outside = 0.0;
    for z in ball {
        let l = g.length(z)?;
        let r2 = weight.ratio_len(l).powi(2);
        if l < tau {
            inside += r2;
        } else {
            outside += r2;
        }
    }
    Ok(TailNorms {
        inside: inside.sqrt(),
        outside: outside.sqrt(),
    })
}

/// Conjugate exponent `r/(r−1)`, with `1 ↦ ∞` and `∞ ↦ 1`.
pub fn conjugate_exponent(r: f64) -> f64 {
    if r == 1.0 {
        f64::INFINITY
    } else if r.is_infinite() {
        1.0
    } else {
        r / (r - 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdmissibilityOptions {
    /// Second admissibility exponent; `r' = r/(r−1)`.
    pub r: f64,
    pub tau_samples: Vec<u32>,
    pub t_grid: Vec<f64>,
    /// Defaults to the midpoint of `(1/(3 − 2^β), 1)`.
    pub theta: Option<f64>,
    /// Truncation radius R of the complement sums. `None` picks the smallest
    /// R whose tail bound `q²/(1−q²)` is below 1e−8, capped by the horizon.
    pub horizon: Option<u32>,
    /// `NotAdmissibleEvidence` when `envelope(t)/t^θ` at the last t exceeds
    /// this multiple of its value at the first t.
    pub growth_cap: f64,
}

impl AdmissibilityOptions {
    pub fn new(tau_max: u32, t_grid: Vec<f64>) -> Self {
        AdmissibilityOptions {
            r: 2.0,
            tau_samples: (1..=tau_max).collect(),
            t_grid,
            theta: None,
            horizon: None,
            growth_cap: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityProfile {
    pub r: f64,
    pub r_prime: f64,
    pub tau_samples: Vec<u32>,
    pub a_vals: Vec<f64>,
    pub b_vals: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub envelope: Vec<f64>,
    /// τ sample attaining the envelope at each t.
    pub envelope_argmin: Vec<u32>,
    /// Closed-form `τ*(t)` and the envelope candidate at the nearest τ sample.
    pub tau_star: Vec<f64>,
    pub envelope_at_tau_star: Vec<f64>,
    /// Running `max_{t' ≤ t} envelope(t')/t'^θ`.
    pub fitted_d_running: Vec<f64>,
    pub fitted_d: f64,
    pub fitted_theta: f64,
    pub theta_range: (f64, f64),
    /// Variation of the running D over the last quartile of the t grid.
    pub last_quartile_variation: f64,
    pub d_stable: bool,
    /// `sup_x ‖(v/w)(x,·)‖₂ + sup_y ‖(v/w)(·,y)‖₂` within the horizon.
    pub ratio_l2_constant: f64,
    pub horizon: u32,
    /// `q(R)²/(1 − q(R)²)` at the horizon.
    pub tail_bound: f64,
}

/// Smallest R with `q(R)²/(1 − q(R)²) < target`.
pub fn horizon_for_tail(weight: &SubexpWeight, target: f64) -> u32 {
    let mut r = 1u32;
    loop {
        let q2 = weight.geometric_q(r as f64).powi(2);
        if q2 / (1.0 - q2) < target || r >= 1 << 20 {
            return r;
        }
        r += 1;
    }
}

pub fn admissibility_profile(weight: &SubexpWeight, opts: &AdmissibilityOptions) -> Result<AdmissibilityProfile> {
    if !(opts.r >= 1.0) {
        return Err(Error::invalid("r", "must be ≥ 1"));
    }
    if opts.tau_samples.is_empty() || opts.tau_samples.contains(&0) {
        return Err(Error::invalid("tau_samples", "need at least one τ ≥ 1"));
    }
    if opts.t_grid.is_empty() || opts.t_grid.iter().any(|&t| !(t >= 1.0)) {
        return Err(Error::invalid("t_grid", "need t ≥ 1"));
    }
    let theta = opts.theta.unwrap_or_else(|| weight.default_theta());
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::invalid("theta", "must lie in (0, 1)"));
    }
    let g = weight.group();
    let cap_r = g.radius_cap() + 1;
    let big_r = opts
        .horizon
        .unwrap_or_else(|| horizon_for_tail(weight, 1e-8).min(cap_r));
    let tau_max = *opts.tau_samples.iter().max().unwrap();
    if big_r < tau_max {
        return Err(Error::invalid(
            "horizon",
            format!("R = {big_r} is below the largest τ sample {tau_max}"),
        ));
    }
    // Per-length sums over the enumerated ball B(e, R).
    let spheres = {
        let mut s = vec![0usize; big_r as usize];
        for z in g.ball(big_r)? {
            s[g.length(z)? as usize] += 1;
        }
        s
    };
    let r_prime = conjugate_exponent(opts.r);

    let mut a_vals = Vec::with_capacity(opts.tau_samples.len());
    let mut b_vals = Vec::with_capacity(opts.tau_samples.len());
    for &tau in &opts.tau_samples {
        let inner = &spheres[..tau as usize];
        let a = if r_prime.is_infinite() {
            (0..tau).map(|n| weight.v_len(n)).fold(0.0, f64::max)
        } else {
            inner
                .iter()
                .enumerate()
                .map(|(n, &c)| c as f64 * weight.v_len(n as u32).powf(r_prime))
                .sum::<f64>()
                .powf(1.0 / r_prime)
        };
        let b = spheres[tau as usize..]
            .iter()
            .enumerate()
            .map(|(k, &c)| c as f64 * weight.ratio_len(tau + k as u32).powi(2))
            .sum::<f64>()
            .sqrt();
        a_vals.push(2.0 * a);
        b_vals.push(2.0 * b);
    }

    let mut envelope = Vec::new();
    let mut envelope_argmin = Vec::new();
    let mut tau_star = Vec::new();
    let mut envelope_at_tau_star = Vec::new();
    let mut running = Vec::new();
    let mut pointwise = Vec::new();
    let mut d: f64 = 0.0;
    for &t in &opts.t_grid {
        let (best_i, best) = a_vals
            .iter()
            .zip(&b_vals)
            .map(|(a, b)| a + b * t)
            .enumerate()
            .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
        envelope.push(best);
        envelope_argmin.push(opts.tau_samples[best_i]);

        let ts = weight.tau_star(t).max(1.0);
        let nearest = opts
            .tau_samples
            .iter()
            .enumerate()
            .min_by(|x, y| (*x.1 as f64 - ts).abs().partial_cmp(&(*y.1 as f64 - ts).abs()).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        tau_star.push(ts);
        envelope_at_tau_star.push(a_vals[nearest] + b_vals[nearest] * t);

        let ratio = best / t.powf(theta);
        pointwise.push(ratio);
        d = d.max(ratio);
        running.push(d);
    }
    if !d.is_finite() {
        return Err(Error::NotAdmissibleEvidence("fitted D is not finite".into()));
    }
    let growth = pointwise.last().unwrap() / pointwise[0];
    if growth > opts.growth_cap {
        return Err(Error::NotAdmissibleEvidence(format!(
            "envelope(t)/t^θ grew by {growth:.3} across the t grid (cap {})",
            opts.growth_cap
        )));
    }
    let quartile = (running.len() / 4).max(2).min(running.len());
    let variation = relative_spread(&running[running.len() - quartile..]);

    let ratio_l2 = 2.0
        * spheres
            .iter()
            .enumerate()
            .map(|(n, &c)| c as f64 * weight.ratio_len(n as u32).powi(2))
            .sum::<f64>()
            .sqrt();
    let q2 = weight.geometric_q(big_r as f64).powi(2);

    Ok(AdmissibilityProfile {
        r: opts.r,
        r_prime,
        tau_samples: opts.tau_samples.clone(),
        a_vals,
        b_vals,
        t_grid: opts.t_grid.clone(),
        envelope,
        envelope_argmin,
        tau_star,
        envelope_at_tau_star,
        fitted_d_running: running,
        fitted_d: d,
        fitted_theta: theta,
        theta_range: weight.theta_range(),
        last_quartile_variation: variation,
        d_stable: variation < 0.10,
        ratio_l2_constant: ratio_l2,
        horizon: big_r,
        tail_bound: q2 / (1.0 - q2),
    })
}
