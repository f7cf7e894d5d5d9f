//! Command-line front end.
//!
//! Exit codes: 0 all rules pass, 1 runtime failure, 2 invalid configuration,
//! 3 at least one rule failed.

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::LabError;
use crate::estimators::{design_hash, BoundaryDesign, BreakDesign, WeakIdDesign, WeakIdRegime};
use crate::exec::init_threads;
use crate::mc_harness::runners::DEFAULT_STEP;
use crate::mc_harness::{
    run_boundary_experiment, run_break_experiment, run_corollary3, run_limit_sample, run_pk_check,
    run_value_convergence, MCReport, McOptions, ValueDesign, CONTRAST_N,
};
use crate::set_kernel::families::FAMILIES;
use crate::set_kernel::BreakLocation;

pub const CONFIG_SCHEMA: &str = "argmaxlab/config/v1";
pub const THREADS_ENV: &str = "ARGMAXLAB_THREADS";

pub const EXIT_PASS: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RULE_FAILED: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    PkCheck,
    Corollary1a,
    Corollary1b,
    Corollary2,
    Corollary3Weak,
    Corollary3Semistrong,
    ValueConvergence,
    LimitSample,
}

impl Kind {
    pub const ALL: [Kind; 8] = [
        Kind::PkCheck,
        Kind::Corollary1a,
        Kind::Corollary1b,
        Kind::Corollary2,
        Kind::Corollary3Weak,
        Kind::Corollary3Semistrong,
        Kind::ValueConvergence,
        Kind::LimitSample,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::PkCheck => "pk-check",
            Kind::Corollary1a => "corollary1a",
            Kind::Corollary1b => "corollary1b",
            Kind::Corollary2 => "corollary2",
            Kind::Corollary3Weak => "corollary3-weak",
            Kind::Corollary3Semistrong => "corollary3-semistrong",
            Kind::ValueConvergence => "value-convergence",
            Kind::LimitSample => "limit-sample",
        }
    }

    pub fn from_name(s: &str) -> Option<Kind> {
        Kind::ALL.into_iter().find(|k| k.name() == s)
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Invalid configuration (exit code 2).
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<LabError> for ConfigError {
    fn from(e: LabError) -> Self {
        ConfigError(e.to_string())
    }
}

/// On-disk experiment configuration. `design` is checked against the schema
/// of `kind`; it may be a single design or a list for the experiment kinds
/// that take designs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: String,
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit_draws: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Grid step of simulated break-date limit paths.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    /// Sample sizes of the two-rate contrast (corollary3 kinds only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contrast_n: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PkCheckDesign {
    pub family: String,
    /// Drift for `lemma2b`; all three default drifts when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Job {
    Pk(PkCheckDesign),
    Break(Vec<BreakDesign>),
    Boundary(Vec<BoundaryDesign>),
    WeakId(Vec<WeakIdDesign>, [usize; 2]),
    Value(Vec<ValueDesign>),
    LimitSample(BreakDesign),
}

/// A validated configuration with command-line overrides applied.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedConfig {
    pub kind: Kind,
    pub opts: McOptions,
    pub out: PathBuf,
    pub job: Job,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub kind: Option<Kind>,
    pub family: Option<String>,
    pub seed: Option<u64>,
    pub reps: Option<usize>,
    pub limit_draws: Option<usize>,
    pub out: Option<PathBuf>,
}

fn parse_design<T: DeserializeOwned>(
    v: &serde_json::Value,
    kind: Kind,
) -> Result<Vec<T>, ConfigError> {
    let one = |v: &serde_json::Value, at: String| -> Result<T, ConfigError> {
        serde_path_to_error::deserialize(v).map_err(|e| {
            ConfigError(format!(
                "{kind}: invalid design at `{at}{}`: {}",
                e.path(),
                e.inner()
            ))
        })
    };
    match v {
        serde_json::Value::Array(items) if !items.is_empty() => items
            .iter()
            .enumerate()
            .map(|(i, d)| one(d, format!("design[{i}].")))
            .collect(),
        serde_json::Value::Array(_) => Err(ConfigError(format!("{kind}: design list is empty"))),
        _ => Ok(vec![one(v, "design.".into())?]),
    }
}

fn single<T>(mut v: Vec<T>, kind: Kind) -> Result<T, ConfigError> {
    if v.len() != 1 {
        return Err(ConfigError(format!(
            "{kind} takes a single design, got {}",
            v.len()
        )));
    }
    Ok(v.remove(0))
}

/// Built-in designs used when a configuration has none.
pub fn default_job(kind: Kind) -> Job {
    let drift = |a| BreakDesign {
        location: BreakLocation::Drift(a),
        ..BreakDesign::default()
    };
    match kind {
        Kind::PkCheck => Job::Pk(PkCheckDesign {
            family: "remark3".into(),
            a: None,
        }),
        Kind::Corollary1a => Job::Break(vec![BreakDesign::default()]),
        Kind::Corollary1b => Job::Break(vec![drift(-1.0), drift(1.0)]),
        Kind::Corollary2 => Job::Boundary(vec![
            BoundaryDesign::nonnegative_scalar(2000, 1.0),
            BoundaryDesign::halfplane(2000, 0.0),
            BoundaryDesign::halfplane(2000, -1.0),
        ]),
        Kind::Corollary3Weak => Job::WeakId(vec![WeakIdDesign::weak(4000)], CONTRAST_N),
        Kind::Corollary3Semistrong => Job::WeakId(vec![WeakIdDesign::semistrong(4000)], CONTRAST_N),
        Kind::ValueConvergence => Job::Value(vec![
            ValueDesign::Break(BreakDesign::default()),
            ValueDesign::Break(drift(-1.0)),
            ValueDesign::Break(drift(1.0)),
        ]),
        Kind::LimitSample => Job::LimitSample(BreakDesign::default()),
    }
}

fn default_limit_draws(kind: Kind) -> usize {
    match kind {
        Kind::PkCheck => 0,
        _ => 100_000,
    }
}

impl ExperimentConfig {
    pub fn for_kind(kind: Kind) -> Self {
        Self {
            schema: CONFIG_SCHEMA.into(),
            kind,
            seed: None,
            reps: None,
            limit_draws: None,
            out: None,
            step: None,
            half_width: None,
            contrast_n: None,
            design: None,
        }
    }

    /// Parse with line/column diagnostics for syntax errors and field paths
    /// for schema errors.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let inner = e.inner();
            let path = e.path().to_string();
            if path == "." || path.is_empty() {
                ConfigError(format!("config: {inner}"))
            } else {
                ConfigError(format!("config field `{path}`: {inner}"))
            }
        })?;
        if cfg.schema != CONFIG_SCHEMA {
            return Err(ConfigError(format!(
                "config field `schema`: expected \"{CONFIG_SCHEMA}\", got \"{}\"",
                cfg.schema
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    fn job(&self, family: Option<&str>) -> Result<Job, ConfigError> {
        let kind = self.kind;
        if self.contrast_n.is_some()
            && !matches!(kind, Kind::Corollary3Weak | Kind::Corollary3Semistrong)
        {
            return Err(ConfigError(format!(
                "config field `contrast_n` is not valid for {kind}"
            )));
        }
        let job = match (&self.design, kind) {
            (None, Kind::PkCheck) => Job::Pk(PkCheckDesign {
                family: family.unwrap_or("remark3").into(),
                a: None,
            }),
            (None, _) => default_job(kind),
            (Some(v), Kind::PkCheck) => {
                let mut d: PkCheckDesign = single(parse_design(v, kind)?, kind)?;
                if let Some(f) = family {
                    d.family = f.into();
                }
                Job::Pk(d)
            }
            (Some(v), Kind::Corollary1a | Kind::Corollary1b) => Job::Break(parse_design(v, kind)?),
            (Some(v), Kind::Corollary2) => Job::Boundary(parse_design(v, kind)?),
            (Some(v), Kind::Corollary3Weak | Kind::Corollary3Semistrong) => {
                Job::WeakId(parse_design(v, kind)?, CONTRAST_N)
            }
            (Some(v), Kind::ValueConvergence) => Job::Value(parse_design(v, kind)?),
            (Some(v), Kind::LimitSample) => Job::LimitSample(single(parse_design(v, kind)?, kind)?),
        };
        let job = match job {
            Job::WeakId(d, _) => Job::WeakId(d, self.contrast_n.unwrap_or(CONTRAST_N)),
            j => j,
        };
        if family.is_some() && kind != Kind::PkCheck {
            return Err(ConfigError(format!(
                "--family applies to pk-check only, not {kind}"
            )));
        }
        validate_job(kind, &job)?;
        Ok(job)
    }

    pub fn resolve(&self, o: &Overrides) -> Result<ResolvedConfig, ConfigError> {
        if let Some(k) = o.kind {
            if k != self.kind {
                return Err(ConfigError(format!(
                    "--kind {k} conflicts with config kind {}",
                    self.kind
                )));
            }
        }
        let job = self.job(o.family.as_deref())?;
        let defaults = McOptions::default();
        let opts = McOptions {
            seed: o.seed.or(self.seed).unwrap_or(defaults.seed),
            reps: o.reps.or(self.reps).unwrap_or(defaults.reps),
            limit_draws: o
                .limit_draws
                .or(self.limit_draws)
                .unwrap_or_else(|| default_limit_draws(self.kind)),
            step: self.step.unwrap_or(DEFAULT_STEP),
            half_width: self.half_width,
            exec: defaults.exec,
        };
        if self.kind != Kind::PkCheck {
            opts.validate()?;
        }
        let out = o
            .out
            .clone()
            .or_else(|| self.out.clone())
            .unwrap_or_else(|| PathBuf::from("out").join(self.kind.name()));
        Ok(ResolvedConfig {
            kind: self.kind,
            opts,
            out,
            job,
        })
    }
}

fn validate_job(kind: Kind, job: &Job) -> Result<(), ConfigError> {
    let err = |i: usize, e: LabError| ConfigError(format!("{kind}: design {}: {e}", i + 1));
    match job {
        Job::Pk(d) => {
            if !FAMILIES.contains(&d.family.as_str()) {
                return Err(ConfigError(format!(
                    "pk-check: unknown family '{}'; known: {}",
                    d.family,
                    FAMILIES.join(", ")
                )));
            }
            if d.a.is_some() && d.family != "lemma2b" {
                return Err(ConfigError(
                    "pk-check: `a` applies to family lemma2b only".into(),
                ));
            }
        }
        Job::Break(ds) => {
            for (i, d) in ds.iter().enumerate() {
                d.validate().map_err(|e| err(i, e))?;
                match (kind, d.location) {
                    (Kind::Corollary1a, BreakLocation::Drift(_)) => {
                        return Err(ConfigError(format!(
                            "corollary1a: design {} must place the break at a fraction (location.fraction)",
                            i + 1
                        )))
                    }
                    (Kind::Corollary1b, BreakLocation::Fraction(_)) => {
                        return Err(ConfigError(format!(
                            "corollary1b: design {} must place the break by drift (location.drift)",
                            i + 1
                        )))
                    }
                    _ => {}
                }
            }
        }
        Job::Boundary(ds) => {
            for (i, d) in ds.iter().enumerate() {
                d.validate().map_err(|e| err(i, e))?;
                d.limit_set().map_err(|e| err(i, e))?;
            }
        }
        Job::WeakId(ds, n) => {
            for (i, d) in ds.iter().enumerate() {
                d.validate().map_err(|e| err(i, e))?;
                let ok = matches!(
                    (kind, d.regime),
                    (Kind::Corollary3Weak, WeakIdRegime::Weak { .. })
                        | (Kind::Corollary3Semistrong, WeakIdRegime::Semistrong { .. })
                );
                if !ok {
                    return Err(ConfigError(format!(
                        "{kind}: design {} has regime {:?}, which belongs to the other corollary3 kind",
                        i + 1,
                        d.regime
                    )));
                }
            }
            if !(4 <= n[0] && n[0] < n[1]) {
                return Err(ConfigError(format!(
                    "config field `contrast_n`: need 4 <= n0 < n1, got {n:?}"
                )));
            }
        }
        Job::Value(ds) => {
            for (i, d) in ds.iter().enumerate() {
                match d {
                    ValueDesign::Break(b) => b.validate(),
                    ValueDesign::Boundary(b) => b.validate(),
                    ValueDesign::Weakid(w) => w.validate(),
                }
                .map_err(|e| err(i, e))?;
            }
        }
        Job::LimitSample(d) => d.validate().map_err(|e| err(0, e))?,
    }
    Ok(())
}

fn label(i: usize, n: usize) -> String {
    if n == 1 {
        String::new()
    } else {
        format!("design{}.", i + 1)
    }
}

fn combine<D: Serialize>(
    kind: Kind,
    cfg: &ResolvedConfig,
    designs: &[D],
    reports: Vec<MCReport>,
) -> MCReport {
    let mut reports = reports;
    if reports.len() == 1 {
        return reports.remove(0);
    }
    let mut out = MCReport::new(
        kind.name(),
        cfg.opts.seed,
        serde_json::to_value(designs).expect("designs serialize"),
        design_hash(designs),
    );
    let n = reports.len();
    for (i, r) in reports.into_iter().enumerate() {
        out.merge(&label(i, n), r);
    }
    out
}

/// Run a resolved configuration; the report is not written.
pub fn execute(cfg: &ResolvedConfig) -> crate::Result<MCReport> {
    let o = &cfg.opts;
    let kind = cfg.kind;
    let report = match &cfg.job {
        Job::Pk(d) => run_pk_check(&d.family, d.a, o)?,
        Job::Break(ds) => {
            let rs = ds
                .iter()
                .map(|d| run_break_experiment(d, o)?.argmax_report())
                .collect::<crate::Result<Vec<_>>>()?;
            combine(kind, cfg, ds, rs)
        }
        Job::Boundary(ds) => {
            let rs = ds
                .iter()
                .map(|d| run_boundary_experiment(d, o)?.argmax_report())
                .collect::<crate::Result<Vec<_>>>()?;
            combine(kind, cfg, ds, rs)
        }
        Job::WeakId(ds, n) => {
            let rs = ds
                .iter()
                .map(|d| run_corollary3(d, o, *n))
                .collect::<crate::Result<Vec<_>>>()?;
            combine(kind, cfg, ds, rs)
        }
        Job::Value(ds) => {
            let rs = ds
                .iter()
                .map(|d| run_value_convergence(d, o))
                .collect::<crate::Result<Vec<_>>>()?;
            combine(kind, cfg, ds, rs)
        }
        Job::LimitSample(d) => run_limit_sample(d, o)?,
    };
    Ok(report)
}

fn kinds_help() -> String {
    let names: Vec<&str> = Kind::ALL.iter().map(|k| k.name()).collect();
    format!("Experiment kinds: {}", names.join(", "))
}

#[derive(Debug, Parser)]
#[command(
    name = "argmaxlab",
    version,
    about = "Constrained argmax limits: set convergence, limit processes, Monte Carlo checks",
    after_help = kinds_help()
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an experiment and write its report, raw samples and ECDF files
    Run(RunArgs),
    /// Print the configuration schema of an experiment kind
    Describe {
        #[arg(value_enum)]
        kind: Kind,
    },
}

#[derive(Debug, clap::Args)]
pub struct RunArgs {
    /// JSON configuration file
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Experiment kind (required without --config)
    #[arg(long, value_enum)]
    pub kind: Option<Kind>,
    /// Built-in set sequence for pk-check
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    /// Finite-sample replications
    #[arg(long, value_name = "N")]
    pub reps: Option<usize>,
    /// Draws from the limit sampler
    #[arg(long, value_name = "N")]
    pub limit_draws: Option<usize>,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads (overrides ARGMAXLAB_THREADS)
    #[arg(long, value_name = "N")]
    pub threads: Option<usize>,
}

pub fn describe(kind: Kind) -> String {
    let common = "Common fields:\n  \
        schema       \"argmaxlab/config/v1\" (required)\n  \
        kind         experiment kind (required)\n  \
        seed         base seed (u64)\n  \
        reps         finite-sample replications (default 2000)\n  \
        limit_draws  limit-sampler draws (default 100000)\n  \
        out          output directory (default out/<kind>)\n  \
        step         grid step of break-date limit paths (default 0.01)\n  \
        half_width   truncation of break-date limit paths (default 40 / min drift)\n  \
        design       kind-specific design, or a list of designs\n";
    let break_design = "  T, location {\"fraction\": tau} | {\"drift\": a}, beta, delta0, kappa (v_T = T^-kappa),\n  \
        lambda1, lambda2, regressor, error\n  \
        Generators: {\"dist\": \"normal\", \"mean\", \"sd\"} | {\"dist\": \"uniform\", \"lo\", \"hi\"} |\n  \
        {\"dist\": \"student_t\", \"df\", \"scale\"} | {\"dist\": \"constant\", \"value\"}\n";
    let boundary_design =
        "  n, theta0, drift (theta_n = theta0 + drift / sqrt(n)), g0, G (rows), sigma\n  \
        Parameter space {theta : g0 + G theta <= 0}\n";
    let weak_design = "  n, sigma, regime\n";
    let body = match kind {
        Kind::PkCheck => format!(
            "pk-check: numeric Painleve-Kuratowski limit of a built-in set sequence.\n\ndesign:\n  family  one of {}\n  a       drift for lemma2b (default: -0.5, 0 and 1)\n\n\
             remark3 checks {{1/n, 1 - 1/n}} -> {{0, 1}} and its intersection with [0, 1/2] U {{1}} -> {{0}}.\n\
             Rule: every estimate converged.\n",
            FAMILIES.join(", ")
        ),
        Kind::Corollary1a => format!(
            "corollary1a: break date in the interior. v_T^2 (k_hat - k0) against argmax over the whole line of\n\
             M(s) = -|s| c_i + 2 W_i(|s|).\n\ndesign (break, location.fraction):\n{break_design}\n\
             Rules: KS <= 0.08; KS of each sample against its negation <= 0.05; limit saturation < 0.001.\n"
        ),
        Kind::Corollary1b => format!(
            "corollary1b: break date drifting to the upper trimming bound; the limit argmax is \
             taken over the constraint (-inf, a].\n\ndesign (break, location.drift = a):\n{break_design}\n\
             Rules: KS <= 0.10; every limit draw <= a; every finite draw <= v_T^2([lambda2 T] - k0);\n\
             for a < 0 at least 99% of finite draws <= 0; limit saturation < 0.001.\n"
        ),
        Kind::Corollary2 => format!(
            "corollary2: parameter near the boundary. sqrt(n)(theta_hat - theta_n) against argmax of h'Z - h'h/2 over the \
             linearized set {{h : b + G h <= 0}}.\n\ndesign (boundary):\n{boundary_design}\n\
             Rules: per-coordinate KS <= 0.05; boundary mass within 0.02 of Phi(b / (sigma |G_j|));\n\
             every estimate feasible.\n"
        ),
        Kind::Corollary3Weak => format!(
            "corollary3-weak: weak identification: (beta_hat, sqrt(n)(pi_hat - pi_n)) against \
             the argmax over Lambda^W = B^W x R^d_pi, a product of the compact beta set and the full pi space.\n\ndesign:\n{weak_design}  \
             regime {{\"regime\": \"weak\", \"c\", \"beta\", \"pi2\"}} with pi1_n = c / sqrt(n)\n\
             contrast_n (top level): sample sizes of the two-rate contrast (default [1000, 4000])\n\n\
             Rules: per-coordinate KS <= 0.10; 0 <= beta_hat <= pi2_hat on every draw;\n\
             sd(beta_hat) ratio across contrast_n in [0.8, 1.25].\n"
        ),
        Kind::Corollary3Semistrong => format!(
            "corollary3-semistrong: semi-strong identification: (a_n(beta_hat - beta_n), \
             sqrt(n)(pi_hat - pi_n)) against the argmax over Lambda^SS = B^SS x R^d_pi, \
             a_n = n^(1/3).\n\ndesign:\n{weak_design}  \
             regime {{\"regime\": \"semistrong\", \"c\", \"b\": [b1, b2]}} with a_n g(beta_n, pi_n) = b\n\
             contrast_n (top level): sample sizes of the two-rate contrast (default [1000, 4000])\n\n\
             Rules: per-coordinate KS <= 0.10; 0 <= beta_hat <= pi2_hat on every draw;\n\
             sd(beta_hat) ratio across contrast_n within 20% of (n0/n1)^(1/3).\n"
        ),
        Kind::ValueConvergence => format!(
            "value-convergence: centered finite-sample maximum of the objective against the \
             supremum of the limit process over the limit set.\n\ndesign: {{\"model\": \"break\" | \"boundary\" | \
             \"weakid\", ...fields of that design}}\n{break_design}{boundary_design}\n\
             Rule: KS <= 0.10.\n"
        ),
        Kind::LimitSample => format!(
            "limit-sample: self-consistency of the break-date limit sampler. Two independent runs of \
             limit_draws draws each.\n\ndesign (break):\n{break_design}\nRule: KS between the runs <= 0.012.\n"
        ),
    };
    format!("{body}\n{common}")
}

fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
}

fn run_command(args: RunArgs) -> i32 {
    let cfg = match (&args.config, args.kind) {
        (Some(path), _) => ExperimentConfig::load(path),
        (None, Some(kind)) => Ok(ExperimentConfig::for_kind(kind)),
        (None, None) => Err(ConfigError("run needs --config PATH or --kind NAME".into())),
    };
    let overrides = Overrides {
        kind: args.kind,
        family: args.family.clone(),
        seed: args.seed,
        reps: args.reps,
        limit_draws: args.limit_draws,
        out: args.out.clone(),
    };
    let resolved = match cfg.and_then(|c| c.resolve(&overrides)) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    if let Some(n) = args.threads.or_else(threads_from_env) {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return EXIT_CONFIG;
        }
        init_threads(n);
    }
    let report = match execute(&resolved) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_RUNTIME;
        }
    };
    for line in report.summary_lines() {
        println!("{line}");
    }
    match report.write(&resolved.out) {
        Ok(_) => println!("report: {}", resolved.out.join("report.json").display()),
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_RUNTIME;
        }
    }
    if report.pass {
        EXIT_PASS
    } else {
        EXIT_RULE_FAILED
    }
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_CONFIG
            } else {
                EXIT_PASS
            };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::Describe { kind } => {
            print!("{}", describe(kind));
            EXIT_PASS
        }
        Command::Run(args) => run_command(args),
    }
}
