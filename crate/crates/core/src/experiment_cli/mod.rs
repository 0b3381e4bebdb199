//! Config-driven experiment runner.
//!
//! [`run`] executes the selected stages in pipeline order and writes CSV
//! and JSON artifacts to the output directory. Outputs depend only on the
//! config, so two runs of the same config produce identical files. Stage
//! timings are kept out of `report.json` for that reason.

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::band_operator::io::{read_dump_on, write_dump};
use crate::band_operator::norms::{aux_norm_1v_of, weighted_norm_of};
use crate::band_operator::{
    dominating_vector, inverse_weight_l2_on_support, operator_norm, random_band_operator, schur_bound, weighted_norm,
    BandOperator, Decay, Domain, Kernel, NormMethod, RandomSpec, RowFilter,
};
use crate::error::{Error, Result};
use crate::group_metric::{classify_growth, property_p_fit, GroupModel, GrowthVerdict};
use crate::spectral_engine::{
    core_margin, dense_inverse, neumann_invert, power_norm_sequence, spectral_radius_compare, PowerLawOptions,
};
use crate::weight_system::{
    admissibility_profile, scalar_split_check, splitting_check, weight_axiom_check, AdmissibilityOptions, SubexpWeight,
    TripleBudget,
};

pub use config::{
    AdmissibleConfig, ExperimentConfig, GrowthConfig, NormsConfig, OperatorSpec, PowerLawConfig, Stage, WeightPoint,
    OUTPUT_DIR_ENV,
};

/// How boundary effects of the truncation are handled, echoed in reports.
pub const BOUNDARY_POLICY: &str = "inverse decay, residual entries and dense-inverse matches use the core rows \
(depth > max depth / 2); norm inequalities use the full truncation";

const SLACK: f64 = 1e-12;

/// One pass/fail verdict. `margin` is positive when the check holds with room.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub stage: String,
    pub name: String,
    pub pass: bool,
    pub margin: f64,
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constant {
    pub stage: String,
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub boundary_policy: String,
    pub checks: Vec<Check>,
    pub constants: Vec<Constant>,
    /// Paths relative to the output directory.
    pub artifacts: Vec<String>,
    /// Seconds per stage; not serialized.
    #[serde(skip)]
    pub timings: Vec<(String, f64)>,
}

impl RunReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn constant(&self, name: &str) -> Option<f64> {
        self.constants.iter().find(|c| c.name == name).map(|c| c.value)
    }

    /// 0 when every check passes, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.all_pass() {
            0
        } else {
            1
        }
    }
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    out: PathBuf,
    stage: Stage,
    report: RunReport,
}

impl Ctx<'_> {
    fn check(&mut self, name: impl Into<String>, pass: bool, margin: f64, witness: Option<String>) {
        self.report.checks.push(Check {
            stage: self.stage.name().into(),
            name: name.into(),
            pass,
            margin,
            witness,
        });
    }

    fn constant(&mut self, name: impl Into<String>, value: f64) {
        self.report.constants.push(Constant {
            stage: self.stage.name().into(),
            name: name.into(),
            value,
        });
    }

    fn csv(&mut self, file: &str, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
        let mut w = csv::Writer::from_path(self.out.join(file))?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        self.report.artifacts.push(file.into());
        Ok(())
    }

    fn json<T: Serialize>(&mut self, file: &str, value: &T) -> Result<()> {
        fs::write(self.out.join(file), serde_json::to_string_pretty(value)? + "\n")?;
        self.report.artifacts.push(file.into());
        Ok(())
    }
}

/// Artifact name: `base.ext` for the first item, `base_<tag>.ext` after.
fn artifact(base: &str, index: usize, tag: &str, ext: &str) -> String {
    if index == 0 {
        format!("{base}.{ext}")
    } else {
        format!("{base}_{tag}.{ext}")
    }
}

fn num(v: f64) -> String {
    v.to_string()
}

struct Workspace {
    group: Arc<GroupModel>,
    domain: Option<Arc<Domain>>,
    operators: Vec<(String, BandOperator)>,
}

/// Runs the configured stages. Output goes to the configured directory, or
/// to `$ROEDECAY_OUTPUT_DIR` when set.
pub fn run(cfg: &ExperimentConfig) -> Result<RunReport> {
    run_in(cfg, &cfg.resolved_output_dir())
}

/// Runs the configured stages, writing artifacts into `out`.
pub fn run_in(cfg: &ExperimentConfig, out: &Path) -> Result<RunReport> {
    cfg.validate()?;
    let mut stages = cfg.stages.clone();
    stages.sort();
    stages.dedup();
    let mut ctx = Ctx {
        cfg,
        out: out.to_path_buf(),
        stage: Stage::Growth,
        report: RunReport {
            config: cfg.clone(),
            boundary_policy: BOUNDARY_POLICY.into(),
            checks: Vec::new(),
            constants: Vec::new(),
            artifacts: Vec::new(),
            timings: Vec::new(),
        },
    };
    if stages.is_empty() {
        return Ok(ctx.report);
    }
    fs::create_dir_all(out)?;
    let mut ws = Workspace {
        group: Arc::new(cfg.group.build()?),
        domain: None,
        operators: Vec::new(),
    };
    for stage in stages {
        ctx.stage = stage;
        let started = Instant::now();
        let result = match stage {
            Stage::Growth => growth_stage(&mut ctx, &ws),
            Stage::Admissible => admissible_stage(&mut ctx, &ws),
            Stage::Norms => prepare(cfg, &mut ws).and_then(|_| norms_stage(&mut ctx, &ws)),
            Stage::Invert => prepare(cfg, &mut ws).and_then(|_| invert_stage(&mut ctx, &ws)),
            Stage::PowerLaw => prepare(cfg, &mut ws).and_then(|_| power_stage(&mut ctx, &ws)),
        };
        result.map_err(|e| Error::Stage {
            stage: stage.name().into(),
            source: Box::new(e),
        })?;
        ctx.report
            .timings
            .push((stage.name().into(), started.elapsed().as_secs_f64()));
    }
    ctx.report.artifacts.sort();
    let report = ctx.report.clone();
    ctx.json("report.json", &report)?;
    Ok(ctx.report)
}

fn weights(cfg: &ExperimentConfig, group: &Arc<GroupModel>) -> Result<Vec<SubexpWeight>> {
    cfg.weights
        .iter()
        .map(|w| SubexpWeight::new(group.clone(), w.alpha, w.beta))
        .collect()
}

fn weight_tag(w: &WeightPoint) -> String {
    format!("a{}_b{}", w.alpha, w.beta)
}

fn growth_stage(ctx: &mut Ctx, ws: &Workspace) -> Result<()> {
    let gc = &ctx.cfg.growth;
    let profile = ws.group.growth_profile(gc.tau_max)?;
    let rows = profile
        .radii
        .iter()
        .zip(&profile.ball_sizes)
        .zip(profile.ln_ratios())
        .map(|((t, s), r)| vec![t.to_string(), s.to_string(), num(r)])
        .collect();
    ctx.csv("growth.csv", &["tau", "ball_size", "ln_ratio"], rows)?;

    let report = classify_growth(&profile, &gc.thresholds)?;
    let sub = report.verdict == GrowthVerdict::Subexponential;
    let margin = gc.thresholds.tail_fraction * report.peak_ratio - report.subexp_ratio_tail;
    let witness = (!sub).then(|| {
        format!(
            "ln|B|/tau tail {:.4}, peak {:.4}, nonincreasing on upper half: {}",
            report.subexp_ratio_tail, report.peak_ratio, report.ratio_nonincreasing_upper_half
        )
    });
    ctx.check("growth.subexponential", sub, margin, witness);
    ctx.constant("growth.poly_degree_fit", report.poly_degree_fit);
    ctx.constant("growth.exp_rate_fit", report.exp_rate_fit);
    ctx.constant("growth.ln_ratio_tail", report.subexp_ratio_tail);

    let pp = property_p_fit(&profile, gc.property_p.alpha, gc.property_p.beta)?;
    let first = pp.running[0];
    let last = *pp.running.last().unwrap();
    let witness = (!pp.plateaus()).then(|| format!("running constant {first:.4} -> {last:.4}"));
    ctx.check(
        "growth.property_p_plateau",
        pp.plateaus(),
        pp.running[pp.running.len() / 2 - 1] - last,
        witness,
    );
    ctx.constant("growth.property_p_constant", pp.constant);
    ctx.constant("growth.property_p_argmax_tau", pp.argmax_tau as f64);
    Ok(())
}

fn admissible_stage(ctx: &mut Ctx, ws: &Workspace) -> Result<()> {
    let cfg = ctx.cfg;
    let ac = &cfg.admissible;

    let s_grid: Vec<f64> = (0..=500).map(|k| 0.5 + k as f64 * 1e-3).collect();
    let b_grid: Vec<f64> = (1..100).map(|k| k as f64 * 1e-2).collect();
    let split = scalar_split_check(&s_grid, &b_grid)?;
    let witness = format!("s = {}, beta = {}", split.worst_s, split.worst_beta);
    ctx.check(
        "admissible.scalar_split",
        split.max_violation <= SLACK,
        SLACK - split.max_violation,
        Some(witness),
    );

    for (k, (w, point)) in weights(cfg, &ws.group)?.iter().zip(&cfg.weights).enumerate() {
        let tag = weight_tag(point);
        let prefix = format!("admissible.{tag}");

        match weight_axiom_check(w, ac.check_radius, &ac.bounded_ratio_c0) {
            Ok(rep) => {
                ctx.check(format!("{prefix}.weight_axioms"), true, rep.min_weight - 1.0, None);
                for br in &rep.bounded_ratio {
                    let ok = br.fitted_d <= br.analytic_d * (1.0 + SLACK);
                    ctx.check(
                        format!("{prefix}.bounded_ratio_c{}", br.c0),
                        ok,
                        br.analytic_d - br.fitted_d,
                        None,
                    );
                    ctx.constant(format!("{prefix}.bounded_ratio_d_c{}", br.c0), br.fitted_d);
                }
            }
            Err(Error::AxiomViolation(msg)) => ctx.check(format!("{prefix}.weight_axioms"), false, -1.0, Some(msg)),
            Err(e) => return Err(e),
        }

        let budget = TripleBudget {
            seed: cfg.sub_seed(Stage::Admissible, k as u64),
            ..TripleBudget::default()
        };
        let sp = splitting_check(w, ac.check_radius, &budget)?;
        let witness = sp
            .witness
            .as_ref()
            .map(|[x, y, z]| format!("x = {x}, y = {y}, z = {z}"));
        ctx.check(
            format!("{prefix}.splitting"),
            sp.violations == 0,
            sp.worst_margin,
            witness,
        );

        let opts = AdmissibilityOptions {
            r: ac.r,
            tau_samples: (1..=ac.tau_max).collect(),
            t_grid: ac.t_grid.clone(),
            theta: ac.theta,
            horizon: ac.horizon,
            growth_cap: 10.0,
        };
        let prof = match admissibility_profile(w, &opts) {
            Ok(p) => p,
            Err(Error::NotAdmissibleEvidence(msg)) => {
                ctx.check(format!("{prefix}.fitted_d_stable"), false, -1.0, Some(msg));
                continue;
            }
            Err(e) => return Err(e),
        };
        let rows = prof
            .tau_samples
            .iter()
            .zip(prof.a_vals.iter().zip(&prof.b_vals))
            .map(|(t, (a, b))| vec![t.to_string(), num(*a), num(*b)])
            .collect();
        ctx.csv(&artifact("admissible_tau", k, &tag, "csv"), &["tau", "a", "b"], rows)?;
        let theta = prof.fitted_theta;
        let rows = prof
            .t_grid
            .iter()
            .zip(&prof.envelope)
            .map(|(t, e)| vec![num(*t), num(*e), num(prof.fitted_d * t.powf(theta))])
            .collect();
        ctx.csv(
            &artifact("envelope", k, &tag, "csv"),
            &["t", "envelope", "d_t_theta"],
            rows,
        )?;
        let max_violation = prof
            .t_grid
            .iter()
            .zip(&prof.envelope)
            .map(|(t, e)| e - prof.fitted_d * t.powf(theta))
            .fold(f64::NEG_INFINITY, f64::max);
        let verdict = serde_json::json!({
            "fitted_D": prof.fitted_d,
            "theta": theta,
            "max_violation": max_violation,
            "d_stable": prof.d_stable,
        });
        ctx.json(&artifact("admissible", k, &tag, "json"), &verdict)?;
        ctx.check(
            format!("{prefix}.fitted_d_stable"),
            prof.d_stable,
            0.10 - prof.last_quartile_variation,
            None,
        );
        let tau_star_ratio = prof
            .envelope_at_tau_star
            .iter()
            .zip(&prof.envelope)
            .map(|(s, e)| s / e)
            .fold(0.0, f64::max);
        ctx.constant(format!("{prefix}.fitted_d"), prof.fitted_d);
        ctx.constant(format!("{prefix}.theta"), theta);
        ctx.constant(format!("{prefix}.ratio_l2_constant"), prof.ratio_l2_constant);
        ctx.constant(format!("{prefix}.tau_star_envelope_ratio"), tau_star_ratio);
    }
    Ok(())
}

/// Builds the domain and operators on first use.
fn prepare(cfg: &ExperimentConfig, ws: &mut Workspace) -> Result<()> {
    if ws.domain.is_some() {
        return Ok(());
    }
    let domain = Domain::new(ws.group.clone(), cfg.domain)?;
    for (k, spec) in cfg.operators.iter().enumerate() {
        let op = match spec {
            OperatorSpec::Stencil { diagonal, coupling, .. } => {
                BandOperator::stencil(domain.clone(), *diagonal, *coupling)?
            }
            OperatorSpec::Random {
                propagation,
                decay,
                perturbation,
                self_adjoint,
                ..
            } => RandomSpec {
                propagation: *propagation,
                decay: *decay,
                perturbation: *perturbation,
                self_adjoint: *self_adjoint,
            }
            .generate(domain.clone(), cfg.operator_seed(k))?,
            OperatorSpec::File { path, .. } => read_dump_on(domain.clone(), path)?,
        };
        ws.operators.push((spec.name().to_string(), op));
    }
    ws.domain = Some(domain);
    Ok(())
}

fn norms_stage(ctx: &mut Ctx, ws: &Workspace) -> Result<()> {
    let cfg = ctx.cfg;
    let w = &weights(cfg, &ws.group)?[0];
    let domain = ws.domain.as_ref().expect("prepared");

    let ops_dir = ctx.out.join("operators");
    let mut rows = Vec::new();
    for (k, (name, op)) in ws.operators.iter().enumerate() {
        let seed = matches!(cfg.operators[k], OperatorSpec::Random { .. }).then(|| cfg.operator_seed(k));
        write_dump(op, &cfg.group, seed, &ops_dir, name)?;
        ctx.report.artifacts.push(format!("operators/{name}.json"));
        ctx.report.artifacts.push(format!("operators/{name}.csv"));

        let f = dominating_vector(op, RowFilter::All);
        let wn = weighted_norm_of(&f, w);
        let aux = aux_norm_1v_of(&f, w);
        let schur = schur_bound(op);
        let opn = operator_norm(op, NormMethod::DenseOracle)?;
        let inv_w = inverse_weight_l2_on_support(&f, w);
        let chain_ok = opn <= schur * (1.0 + SLACK) && schur <= wn * inv_w * (1.0 + SLACK);
        ctx.check(
            format!("norms.{name}.chain"),
            chain_ok,
            (schur - opn).min(wn * inv_w - schur),
            Some(format!(
                "op {opn:.6} <= schur {schur:.6} <= weighted*|w^-1| {:.6}",
                wn * inv_w
            )),
        );
        let adj = weighted_norm(&op.adjoint(), w);
        ctx.check(
            format!("norms.{name}.adjoint_symmetry"),
            (adj - wn).abs() <= SLACK * wn.max(1.0),
            SLACK * wn.max(1.0) - (adj - wn).abs(),
            None,
        );
        rows.push(vec![name.clone(), num(wn), num(aux), num(schur), num(opn), num(inv_w)]);
    }
    ctx.csv(
        "norms.csv",
        &[
            "operator",
            "weighted_norm",
            "aux_norm_1v",
            "schur_bound",
            "operator_norm",
            "inverse_w_l2",
        ],
        rows,
    )?;

    let nc = &cfg.norms;
    if nc.pairs > 0 {
        let k_const = w.ratio_l2(domain.max_diff_length().min(ws.group.radius_cap()))?;
        let bound = 2.0 * k_const;
        let mut d_sub: f64 = 0.0;
        let mut witness = None;
        let mut triangle_worst = f64::INFINITY;
        for p in 0..nc.pairs {
            let pa = (p as u32) % (nc.pair_propagation + 1);
            let pb = (p as u32 / (nc.pair_propagation + 1)) % (nc.pair_propagation + 1);
            let sa = cfg.sub_seed(Stage::Norms, 2 * p as u64);
            let sb = cfg.sub_seed(Stage::Norms, 2 * p as u64 + 1);
            let a = random_band_operator(domain.clone(), sa, pa, Decay::Flat)?;
            let b = random_band_operator(domain.clone(), sb, pb, Decay::Flat)?;
            let (na, nb) = (weighted_norm(&a, w), weighted_norm(&b, w));
            let ratio = weighted_norm(&a.compose(&b)?, w) / (na * nb);
            if ratio > d_sub {
                d_sub = ratio;
                witness = Some(format!("seeds ({sa}, {sb}), propagations ({pa}, {pb})"));
            }
            let sum = weighted_norm(&a.add(&b)?, w);
            triangle_worst = triangle_worst.min(na + nb - sum);
        }
        ctx.check("norms.submultiplicativity", d_sub <= bound, bound - d_sub, witness);
        ctx.check("norms.triangle", triangle_worst >= -SLACK, triangle_worst, None);
        ctx.constant("norms.fitted_d_sub", d_sub);
        ctx.constant("norms.d_sub_bound", bound);
    }
    Ok(())
}

fn invert_stage(ctx: &mut Ctx, ws: &Workspace) -> Result<()> {
    let cfg = ctx.cfg;
    let w = &weights(cfg, &ws.group)?[0];
    let tol = cfg.invert.tol;
    for (k, (name, op)) in ws.operators.iter().enumerate() {
        let prefix = format!("invert.{name}");
        let (inv, report) = match neumann_invert(op, w, &cfg.invert) {
            Ok(r) => r,
            Err(e @ (Error::NotPositiveDefinite { .. } | Error::NoConvergence { .. })) => {
                ctx.check(format!("{prefix}.converged"), false, -1.0, Some(e.to_string()));
                continue;
            }
            Err(e) => return Err(e),
        };
        ctx.check(format!("{prefix}.converged"), true, 0.0, None);
        let worst = report.inverse_residual.max(report.inverse_residual_left);
        ctx.check(
            format!("{prefix}.residual"),
            worst <= 10.0 * tol,
            10.0 * tol - worst,
            None,
        );
        let rate = report.worst_term_rate(4);
        ctx.check(format!("{prefix}.term_rate"), rate <= 1.1, 1.1 - rate, None);
        let domain = op.domain();
        if domain.len() <= 500 {
            let dense = dense_inverse(op)?;
            let diff = domain
                .core_rows()
                .iter()
                .flat_map(|&i| (0..domain.len()).map(move |j| (i, j)))
                .map(|(i, j)| (inv.get(i, j) - dense[(i, j)]).norm())
                .fold(0.0, f64::max);
            ctx.check(format!("{prefix}.dense_match"), diff <= 1e-8, 1e-8 - diff, None);
        }
        ctx.constant(format!("{prefix}.c1"), report.c1);
        ctx.constant(format!("{prefix}.c2"), report.c2);
        ctx.constant(format!("{prefix}.b_contraction"), report.b_contraction);
        ctx.constant(format!("{prefix}.neumann_terms"), report.neumann_terms as f64);

        let rows = report
            .term_norms
            .iter()
            .map(|t| vec![t.n.to_string(), num(t.norm_ab), num(t.norm_op)])
            .collect();
        ctx.csv(
            &artifact("neumann_terms", k, name, "csv"),
            &["n", "term_norm_ab", "term_norm_op"],
            rows,
        )?;
        let profile = dominating_vector(&inv, RowFilter::Interior(core_margin(domain))).by_length();
        let rows = profile
            .iter()
            .enumerate()
            .filter(|(_, f)| **f > 0.0)
            .map(|(l, f)| {
                let env = report.decay_fit.as_ref().map_or(f64::NAN, |d| d.envelope(l as u32));
                vec![l.to_string(), num(*f), num(env)]
            })
            .collect();
        ctx.csv(&artifact("decay", k, name, "csv"), &["length", "f", "envelope"], rows)?;
        if let Some(fit) = &report.decay_fit {
            ctx.constant(format!("{prefix}.decay_alpha"), fit.alpha);
            ctx.constant(format!("{prefix}.decay_beta"), fit.beta);
            ctx.constant(format!("{prefix}.decay_c"), fit.c);
            ctx.constant(format!("{prefix}.decay_rms"), fit.rms);
        }
        let mut json = serde_json::to_value(&report)?;
        if let Some(fit) = json.get_mut("decay_fit").and_then(|v| v.as_object_mut()) {
            fit.remove("points");
        }
        ctx.json(&artifact("inversion", k, name, "json"), &json)?;
    }
    Ok(())
}

fn power_stage(ctx: &mut Ctx, ws: &Workspace) -> Result<()> {
    let cfg = ctx.cfg;
    let pc = &cfg.power_law;
    let w = &weights(cfg, &ws.group)?[0];
    let opts = PowerLawOptions {
        theta: pc.theta,
        n_max: pc.n_max,
    };
    for (k, (name, op)) in ws.operators.iter().enumerate() {
        let prefix = format!("power_law.{name}");
        let trace = power_norm_sequence(op, w, &opts)?;
        ctx.check(
            format!("{prefix}.doubling"),
            trace.doubling_holds && trace.power_bound_holds,
            -trace.worst_doubling_margin,
            None,
        );
        let slope = trace.growth_slope.unwrap_or(0.0);
        ctx.check(
            format!("{prefix}.growth_slope"),
            trace.slope_ok(pc.slope_tolerance),
            trace.slope_bound + pc.slope_tolerance - slope,
            None,
        );
        ctx.check(
            format!("{prefix}.d1_stable"),
            trace.d1_stable,
            0.20 - trace.d1_variation,
            None,
        );
        ctx.constant(format!("{prefix}.theta"), trace.theta);
        ctx.constant(format!("{prefix}.fitted_d1"), trace.fitted_d1);
        ctx.constant(format!("{prefix}.growth_slope"), slope);
        let rows = trace
            .n_list
            .iter()
            .zip(&trace.ln_norms_op)
            .map(|(&n, lop)| {
                vec![
                    n.to_string(),
                    num(trace.ln_norm_ab(n).exp()),
                    num(lop.exp()),
                    num(trace.ln_b(n).exp()),
                ]
            })
            .collect();
        ctx.csv(
            &artifact("bn", k, name, "csv"),
            &["n", "norm_ab", "norm_op", "b_n"],
            rows,
        )?;

        let mut scale: f64 = 1.0;
        op.for_each_entry(|_, _, v| scale = scale.max(v.norm()));
        if op.max_asymmetry() <= SLACK * scale {
            let cmp = spectral_radius_compare(op, w, pc.radius_n_max)?;
            let (g8, gn) = (cmp.gap_at(8).unwrap_or(f64::INFINITY), cmp.final_gap());
            ctx.check(
                format!("{prefix}.radius_gap"),
                gn < pc.radius_gap_max,
                pc.radius_gap_max - gn,
                None,
            );
            ctx.constant(format!("{prefix}.radius_gap_n8"), g8);
            ctx.constant(format!("{prefix}.radius_gap"), gn);
            ctx.constant(format!("{prefix}.spectral_radius"), cmp.r_op);
        }
    }
    Ok(())
}
