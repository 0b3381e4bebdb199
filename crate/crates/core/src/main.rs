use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use roedecay::band_operator::{Decay, DomainSpec};
use roedecay::experiment_cli::{
    run_in, AdmissibleConfig, ExperimentConfig, NormsConfig, OperatorSpec, PowerLawConfig, RunReport, Stage,
    WeightPoint,
};
use roedecay::group_metric::{GroupKind, GroupSpec};
use roedecay::spectral_engine::NeumannOptions;
use roedecay::{Error, Result};

#[derive(Parser)]
#[command(
    name = "roedecay",
    version,
    about = "Weighted band-operator experiments on finitely generated groups"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every stage listed in a TOML config.
    Run { config: PathBuf },
    /// Ball growth, growth verdict and property-P constant.
    Growth {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 20)]
        tau_max: u32,
    },
    /// Admissibility profile of the weight pair (w, v).
    Admissible {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2.0)]
        r: f64,
        #[arg(long, default_value_t = 40)]
        tau_max: u32,
        /// Largest t; the grid is 1, 10, 100, … up to it.
        #[arg(long, default_value_t = 1e4)]
        t_max: f64,
        #[arg(long)]
        theta: Option<f64>,
    },
    /// Weighted, auxiliary, Schur and operator norms of an operator.
    Norms {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        op: OperatorArgs,
    },
    /// Neumann-series inverse and its decay fit.
    Invert {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        op: OperatorArgs,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 1 << 20)]
        max_terms: usize,
    },
    /// Power-norm trace, fitted D₁ and the spectral-radius comparison.
    PowerLaw {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        op: OperatorArgs,
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long, default_value_t = 32)]
        n_max: usize,
    },
}

#[derive(Args)]
struct Common {
    /// zd:<d>, heisenberg or free:<k>.
    #[arg(long, default_value = "zd:1")]
    group: String,
    /// Word-length horizon; derived from the other sizes when omitted.
    #[arg(long)]
    radius_cap: Option<u32>,
    #[arg(long, default_value_t = 1 << 21)]
    element_cap: usize,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory (overrides the environment variable).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OperatorArgs {
    /// stencil:<diag>,<coupling> | random:<propagation>[,subexp:<a>:<b>][,perturb:<s>][,sa] | <dump.json>
    #[arg(long, default_value = "stencil:1,0.4")]
    operator: String,
    /// ball:<R> or interval:<N>.
    #[arg(long, default_value = "ball:6")]
    domain: String,
}

fn parse_domain(s: &str) -> Result<DomainSpec> {
    let bad = || Error::Config(format!("--domain: expected ball:<R> or interval:<N>, got {s:?}"));
    let (kind, n) = s.split_once(':').ok_or_else(bad)?;
    match kind {
        "ball" => Ok(DomainSpec::Ball {
            radius: n.parse().map_err(|_| bad())?,
        }),
        "interval" => Ok(DomainSpec::Interval {
            len: n.parse().map_err(|_| bad())?,
        }),
        _ => Err(bad()),
    }
}

fn parse_operator(s: &str) -> Result<OperatorSpec> {
    let bad = |why: &str| Error::Config(format!("--operator {s:?}: {why}"));
    let num = |v: &str| v.trim().parse::<f64>().map_err(|_| bad("bad number"));
    if let Some(rest) = s.strip_prefix("stencil:") {
        let (d, c) = rest
            .split_once(',')
            .ok_or_else(|| bad("expected stencil:<diag>,<coupling>"))?;
        return Ok(OperatorSpec::Stencil {
            name: "operator".into(),
            diagonal: num(d)?,
            coupling: num(c)?,
        });
    }
    if let Some(rest) = s.strip_prefix("random:") {
        let mut parts = rest.split(',');
        let propagation = parts
            .next()
            .and_then(|p| p.trim().parse().ok())
            .ok_or_else(|| bad("expected random:<propagation>"))?;
        let (mut decay, mut perturbation, mut self_adjoint) = (Decay::Flat, None, false);
        for p in parts {
            let fields: Vec<&str> = p.trim().split(':').collect();
            match fields.as_slice() {
                ["subexp", a, b] => {
                    decay = Decay::Subexp {
                        alpha: num(a)?,
                        beta: num(b)?,
                    }
                }
                ["perturb", v] => perturbation = Some(num(v)?),
                ["sa"] => self_adjoint = true,
                _ => return Err(bad("unknown random option")),
            }
        }
        return Ok(OperatorSpec::Random {
            name: "operator".into(),
            propagation,
            decay,
            perturbation,
            self_adjoint,
        });
    }
    Ok(OperatorSpec::File {
        name: "operator".into(),
        path: PathBuf::from(s),
    })
}

fn base_config(common: &Common, stage: Stage, domain: DomainSpec, horizon: u32) -> Result<ExperimentConfig> {
    let kind: GroupKind = common.group.parse()?;
    let (name, rank) = match kind {
        GroupKind::FreeAbelian(d) => ("zd", d),
        GroupKind::Heisenberg3 => ("heisenberg", 3),
        GroupKind::FreeGroup(k) => ("free", k),
    };
    let extent = match domain {
        DomainSpec::Ball { radius } => 2 * radius + 2,
        DomainSpec::Interval { len } => len as u32 + 1,
    };
    Ok(ExperimentConfig {
        seed: common.seed,
        output_dir: PathBuf::from("out"),
        stages: vec![stage],
        group: GroupSpec {
            kind: name.into(),
            rank,
            radius_cap: common.radius_cap.unwrap_or(extent.max(horizon).max(40)),
            element_cap: common.element_cap,
        },
        domain,
        weights: vec![WeightPoint {
            alpha: common.alpha,
            beta: common.beta,
        }],
        growth: Default::default(),
        admissible: AdmissibleConfig::default(),
        operators: Vec::new(),
        norms: NormsConfig {
            pairs: 0,
            ..NormsConfig::default()
        },
        invert: NeumannOptions::default(),
        power_law: PowerLawConfig::default(),
    })
}

fn operator_config(common: &Common, stage: Stage, op: &OperatorArgs) -> Result<ExperimentConfig> {
    let mut cfg = base_config(common, stage, parse_domain(&op.domain)?, 0)?;
    cfg.operators = vec![parse_operator(&op.operator)?];
    Ok(cfg)
}

fn build(command: Command) -> Result<(ExperimentConfig, Option<PathBuf>)> {
    let (cfg, out) = match command {
        Command::Run { config } => (ExperimentConfig::load(&config)?, None),
        Command::Growth { common, tau_max } => {
            let mut cfg = base_config(&common, Stage::Growth, DomainSpec::Ball { radius: 1 }, tau_max)?;
            cfg.growth.tau_max = tau_max;
            (cfg, common.out)
        }
        Command::Admissible {
            common,
            r,
            tau_max,
            t_max,
            theta,
        } => {
            let mut cfg = base_config(&common, Stage::Admissible, DomainSpec::Ball { radius: 1 }, 3 * tau_max)?;
            let mut t_grid = vec![1.0];
            while t_grid.last().unwrap() * 10.0 <= t_max * (1.0 + 1e-12) {
                t_grid.push(t_grid.last().unwrap() * 10.0);
            }
            cfg.admissible = AdmissibleConfig {
                r,
                tau_max,
                t_grid,
                theta,
                ..AdmissibleConfig::default()
            };
            (cfg, common.out)
        }
        Command::Norms { common, op } => (operator_config(&common, Stage::Norms, &op)?, common.out),
        Command::Invert {
            common,
            op,
            tol,
            max_terms,
        } => {
            let mut cfg = operator_config(&common, Stage::Invert, &op)?;
            cfg.invert = NeumannOptions { tol, max_terms };
            (cfg, common.out)
        }
        Command::PowerLaw {
            common,
            op,
            theta,
            n_max,
        } => {
            let mut cfg = operator_config(&common, Stage::PowerLaw, &op)?;
            cfg.power_law.theta = theta;
            cfg.power_law.n_max = n_max;
            (cfg, common.out)
        }
    };
    cfg.validate()?;
    Ok((cfg, out))
}

fn summarize(report: &RunReport, out: &std::path::Path) {
    for c in &report.checks {
        let verdict = if c.pass { "PASS" } else { "FAIL" };
        println!("{verdict}  {:<48} margin {:+.3e}", c.name, c.margin);
        if let (false, Some(w)) = (c.pass, &c.witness) {
            println!("      witness: {w}");
        }
    }
    for k in &report.constants {
        println!("      {:<48} {:.6}", k.name, k.value);
    }
    for (stage, secs) in &report.timings {
        println!("time  {stage:<12} {secs:.3} s");
    }
    println!("artifacts in {}", out.display());
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = build(cli.command).and_then(|(cfg, out)| {
        let dir = out.unwrap_or_else(|| cfg.resolved_output_dir());
        Ok((run_in(&cfg, &dir)?, dir))
    });
    match result {
        Ok((report, dir)) => {
            summarize(&report, &dir);
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
