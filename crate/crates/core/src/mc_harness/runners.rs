//! Experiment runners. Every runner draws its finite-sample replications from
//! the stream `derive_seed(seed, 0)` and its limit draws from
//! `derive_seed(seed, 1)`; replication `i` of a stream uses
//! `derive_seed(stream, i)`.

use std::time::Instant;

use serde::Serialize;

use super::empirical::{ks_distance, EmpiricalDist};
use super::report::{mode_count, Comparison, MCReport, RuleOutcome, TieCounts, Timings};
use crate::error::{LabError, Result};
use crate::estimators::weakid::{SEMISTRONG_RATE_TOL, WEAK_RATIO_BAND};
use crate::estimators::{
    estimate_break, fit_boundary_model, fit_weakid_model, simulate_break_data, two_rate_contrast,
    BoundaryDesign, BreakDesign, RateContrast, WeakIdDesign, WeakIdRegime,
};
use crate::exec::Execution;
use crate::process_lab::{
    sample_limit_argmax, sample_polyhedral_limit, sample_weak_limit_values, ArgmaxConstraint,
    LimitArgmaxSample, SATURATION_LIMIT,
};
use crate::qp::FEAS_TOL;
use crate::seed::derive_seed;
use crate::set_kernel::constructions::interval_of;
use crate::set_kernel::families::family;
use crate::set_kernel::{pk_limit_estimate_with, BreakLocation, GridSet, PkDiagnostics, PkOptions};

pub const KS_COROLLARY1A: f64 = 0.08;
pub const KS_SYMMETRY: f64 = 0.05;
pub const KS_COROLLARY1B: f64 = 0.10;
pub const NEGATIVE_MASS_MIN: f64 = 0.99;
pub const KS_COROLLARY2: f64 = 0.05;
pub const BOUNDARY_MASS_TOL: f64 = 0.02;
pub const KS_COROLLARY3: f64 = 0.10;
pub const KS_VALUE: f64 = 0.10;
pub const KS_NOISE_FLOOR: f64 = 0.012;
pub const CONTRAST_N: [usize; 2] = [1000, 4000];
pub const DEFAULT_STEP: f64 = 0.01;
pub const MODE_BINS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McOptions {
    pub seed: u64,
    pub reps: usize,
    pub limit_draws: usize,
    /// Grid step of simulated break-date limit paths.
    pub step: f64,
    /// Truncation of break-date limit paths; defaults to `GaussianSpec::default_half_width`.
    pub half_width: Option<f64>,
    pub exec: Execution,
}

impl Default for McOptions {
    fn default() -> Self {
        Self {
            seed: 20_240_601,
            reps: 2000,
            limit_draws: 100_000,
            step: DEFAULT_STEP,
            half_width: None,
            exec: Execution::default(),
        }
    }
}

impl McOptions {
    pub fn finite_stream(&self) -> u64 {
        derive_seed(self.seed, 0)
    }

    pub fn limit_stream(&self) -> u64 {
        derive_seed(self.seed, 1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps < 2 || self.limit_draws < 2 {
            return Err(LabError::InvalidArgument(format!(
                "need at least 2 replications and 2 limit draws, got {} and {}",
                self.reps, self.limit_draws
            )));
        }
        if !(self.step > 0.0) {
            return Err(LabError::InvalidArgument(format!(
                "limit grid step must be positive, got {}",
                self.step
            )));
        }
        if let Some(c) = self.half_width {
            if !(c > self.step) {
                return Err(LabError::InvalidArgument(format!(
                    "half width {c} must exceed the grid step"
                )));
            }
        }
        Ok(())
    }
}

fn secs(t: Instant) -> f64 {
    t.elapsed().as_secs_f64()
}

fn report_for<T: Serialize>(id: &str, design: &T, hash: String, opts: &McOptions) -> MCReport {
    let mut r = MCReport::new(
        id,
        opts.seed,
        serde_json::to_value(design).expect("designs serialize"),
        hash,
    );
    r.reps = opts.reps;
    r.limit_draws = opts.limit_draws;
    r
}

fn collect<T>(xs: Vec<Result<T>>) -> Result<Vec<T>> {
    xs.into_iter().collect()
}

// ---------------------------------------------------------------- breaks

/// Finite-sample and limit draws for one break design, shared by the
/// argmax and the value-convergence reports.
#[derive(Debug, Clone)]
pub struct BreakRun {
    pub design: BreakDesign,
    pub opts: McOptions,
    /// `v_T^2 (k_hat - k0)`
    pub s_hat: Vec<f64>,
    /// `max_k V_T(k) - V_T(k0)`
    pub centered_sup: Vec<f64>,
    pub finite_ties: usize,
    pub limit: LimitArgmaxSample,
    pub constraint: ArgmaxConstraint,
    /// `v_T^2 ([lambda2 T] - k0)`
    pub upper: f64,
    pub timings: Timings,
}

pub fn run_break_experiment(design: &BreakDesign, opts: &McOptions) -> Result<BreakRun> {
    design.validate()?;
    opts.validate()?;
    let start = Instant::now();
    let stream = opts.finite_stream();
    let fits = collect(opts.exec.map(opts.reps, |i| {
        let data = simulate_break_data(design, derive_seed(stream, i as u64))?;
        let fit = estimate_break(&data, design)?;
        Ok((fit.s_hat, fit.centered_sup(), fit.tie))
    }))?;
    let finite_secs = secs(start);

    let t = Instant::now();
    let spec = design.limit_spec()?;
    let half_width = opts.half_width.unwrap_or_else(|| spec.default_half_width());
    let constraint = design.limit_constraint();
    let limit = sample_limit_argmax(
        &spec,
        &constraint,
        opts.limit_draws,
        half_width,
        opts.step,
        opts.limit_stream(),
        opts.exec,
    )?;
    let limit_secs = secs(t);

    Ok(BreakRun {
        design: design.clone(),
        opts: *opts,
        s_hat: fits.iter().map(|f| f.0).collect(),
        centered_sup: fits.iter().map(|f| f.1).collect(),
        finite_ties: fits.iter().filter(|f| f.2).count(),
        limit,
        constraint,
        upper: design.localized_upper()?,
        timings: Timings {
            finite_secs,
            limit_secs,
            total_secs: secs(start),
        },
    })
}

impl BreakRun {
    fn base(&self, id: &str) -> MCReport {
        let mut r = report_for(id, &self.design, self.design.hash(), &self.opts);
        r.ties = TieCounts {
            finite: self.finite_ties,
            limit: self.limit.tie_draws,
        };
        r.saturation = Some(self.limit.saturation);
        r.timings = self.timings;
        r.warnings.extend(self.limit.warning.clone());
        r.diagnostics
            .insert("limit_half_width".into(), self.limit.half_width);
        r.diagnostics.insert("limit_step".into(), self.limit.step);
        r.diagnostics.insert("localized_upper".into(), self.upper);
        r
    }

    fn saturation_rule(&self) -> RuleOutcome {
        RuleOutcome::below("limit_saturation", self.limit.saturation, SATURATION_LIMIT)
    }

    /// Argmax comparison with the rules of part (a) or part (b).
    pub fn argmax_report(&self) -> Result<MCReport> {
        let fin = EmpiricalDist::new(self.s_hat.clone())?;
        let lim = self.limit.argmax_dist()?;
        let cmp = Comparison::new("argmax", &fin, &lim);
        let ks = cmp.ks;
        let id = match self.design.location {
            BreakLocation::Fraction(_) => "corollary1a",
            BreakLocation::Drift(_) => "corollary1b",
        };
        let mut r = self.base(id);
        r.comparisons.push(cmp);
        r.diagnostics.insert(
            "modes_finite".into(),
            mode_count(&self.s_hat, MODE_BINS) as f64,
        );
        r.diagnostics.insert(
            "modes_limit".into(),
            mode_count(&self.limit.argmax, MODE_BINS) as f64,
        );
        r.diagnostics
            .insert("finite_mass_at_or_below_zero".into(), fin.ecdf(0.0));
        r.samples.push(("finite_argmax".into(), self.s_hat.clone()));
        r.samples
            .push(("limit_argmax".into(), self.limit.argmax.clone()));
        match self.design.location {
            BreakLocation::Fraction(_) => {
                r.rule(RuleOutcome::at_most("ks_argmax", ks, KS_COROLLARY1A));
                r.rule(RuleOutcome::at_most(
                    "symmetry_finite",
                    ks_distance(&fin, &fin.negated()),
                    KS_SYMMETRY,
                ));
                r.rule(RuleOutcome::at_most(
                    "symmetry_limit",
                    ks_distance(&lim, &lim.negated()),
                    KS_SYMMETRY,
                ));
            }
            BreakLocation::Drift(a) => {
                r.rule(RuleOutcome::at_most("ks_argmax", ks, KS_COROLLARY1B));
                let outside = self
                    .limit
                    .argmax
                    .iter()
                    .filter(|&&s| !self.constraint.admits(s))
                    .count();
                r.diagnostics.insert("limit_max".into(), lim.max());
                r.rule(RuleOutcome::at_most(
                    "limit_draws_above_a",
                    outside as f64,
                    0.0,
                ));
                r.diagnostics.insert("finite_max".into(), fin.max());
                let above = self.s_hat.iter().filter(|&&s| s > self.upper).count();
                r.rule(RuleOutcome::at_most(
                    "finite_draws_above_upper",
                    above as f64,
                    0.0,
                ));
                if a < 0.0 {
                    r.rule(RuleOutcome::at_least(
                        "finite_mass_at_or_below_zero",
                        fin.ecdf(0.0),
                        NEGATIVE_MASS_MIN,
                    ));
                }
            }
        }
        r.rule(self.saturation_rule());
        Ok(r)
    }

    /// Centered finite-sample supremum against the limit supremum.
    pub fn value_report(&self) -> Result<MCReport> {
        let fin = EmpiricalDist::new(self.centered_sup.clone())?;
        let lim = self.limit.sup_dist()?;
        let mut r = self.base("value-convergence");
        let cmp = Comparison::new("sup", &fin, &lim);
        r.rule(RuleOutcome::at_most("ks_sup", cmp.ks, KS_VALUE));
        r.comparisons.push(cmp);
        let strictly_below = self
            .limit
            .sup
            .iter()
            .zip(&self.limit.free_sup)
            .filter(|(c, f)| c < f)
            .count();
        r.diagnostics.insert(
            "limit_constrained_below_free".into(),
            strictly_below as f64 / self.limit.sup.len() as f64,
        );
        r.samples
            .push(("finite_sup".into(), self.centered_sup.clone()));
        r.samples.push(("limit_sup".into(), self.limit.sup.clone()));
        r.rule(self.saturation_rule());
        Ok(r)
    }
}

pub fn run_corollary1(design: &BreakDesign, opts: &McOptions) -> Result<MCReport> {
    run_break_experiment(design, opts)?.argmax_report()
}

// -------------------------------------------------------------- boundary

#[derive(Debug, Clone)]
pub struct BoundaryRun {
    pub design: BoundaryDesign,
    pub opts: McOptions,
    /// `sqrt(n)(theta_hat - theta_n)` per replication.
    pub h: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub on_boundary: Vec<bool>,
    /// Largest `g_j(theta_hat)` over all replications and constraints.
    pub max_g: f64,
    pub max_kkt: f64,
    pub limit_h: Vec<Vec<f64>>,
    pub limit_values: Vec<f64>,
    pub limit_on_boundary: Vec<bool>,
    pub limit_max_violation: f64,
    pub limit_max_kkt: f64,
    pub timings: Timings,
}

pub fn run_boundary_experiment(design: &BoundaryDesign, opts: &McOptions) -> Result<BoundaryRun> {
    design.validate()?;
    opts.validate()?;
    let start = Instant::now();
    let stream = opts.finite_stream();
    let fits = collect(opts.exec.map(opts.reps, |i| {
        fit_boundary_model(design, derive_seed(stream, i as u64))
    }))?;
    let finite_secs = secs(start);
    let t = Instant::now();
    let set = design.limit_set()?;
    let limit = sample_polyhedral_limit(
        &design.limit()?,
        &set,
        opts.limit_draws,
        opts.limit_stream(),
        opts.exec,
    )?;
    let limit_secs = secs(t);
    let limit_max_violation = limit
        .draws
        .iter()
        .flat_map(|h| set.row_values(h))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(BoundaryRun {
        design: design.clone(),
        opts: *opts,
        max_g: fits
            .iter()
            .flat_map(|f| f.g_at_hat.iter().copied())
            .fold(f64::NEG_INFINITY, f64::max),
        max_kkt: fits.iter().map(|f| f.kkt).fold(0.0, f64::max),
        h: fits.iter().map(|f| f.h.clone()).collect(),
        values: fits.iter().map(|f| f.value).collect(),
        on_boundary: fits.iter().map(|f| f.on_boundary).collect(),
        limit_h: limit.draws,
        limit_values: limit.values,
        limit_on_boundary: limit.on_boundary,
        limit_max_violation,
        limit_max_kkt: limit.max_kkt,
        timings: Timings {
            finite_secs,
            limit_secs,
            total_secs: secs(start),
        },
    })
}

fn fraction(xs: &[bool]) -> f64 {
    xs.iter().filter(|&&b| b).count() as f64 / xs.len() as f64
}

fn coordinate(xs: &[Vec<f64>], j: usize) -> Vec<f64> {
    xs.iter().map(|h| h[j]).collect()
}

impl BoundaryRun {
    fn base(&self, id: &str) -> MCReport {
        let mut r = report_for(id, &self.design, self.design.hash(), &self.opts);
        r.timings = self.timings;
        r.diagnostics.insert("max_kkt_finite".into(), self.max_kkt);
        r.diagnostics
            .insert("max_kkt_limit".into(), self.limit_max_kkt);
        r
    }

    pub fn argmax_report(&self) -> Result<MCReport> {
        let mut r = self.base("corollary2");
        for j in 0..self.design.dim() {
            let (f, l) = (coordinate(&self.h, j), coordinate(&self.limit_h, j));
            let cmp = Comparison::new(
                format!("h{}", j + 1),
                &EmpiricalDist::new(f.clone())?,
                &EmpiricalDist::new(l.clone())?,
            );
            r.rule(RuleOutcome::at_most(
                format!("ks_h{}", j + 1),
                cmp.ks,
                KS_COROLLARY2,
            ));
            r.comparisons.push(cmp);
            r.samples.push((format!("finite_h{}", j + 1), f));
            r.samples.push((format!("limit_h{}", j + 1), l));
        }
        let mass = fraction(&self.on_boundary);
        let limit_mass = fraction(&self.limit_on_boundary);
        r.diagnostics.insert("boundary_mass_finite".into(), mass);
        r.diagnostics
            .insert("boundary_mass_limit".into(), limit_mass);
        let target = match self.design.boundary_mass_oracle() {
            Some(p) => {
                r.diagnostics.insert("boundary_mass_oracle".into(), p);
                p
            }
            None => limit_mass,
        };
        r.rule(RuleOutcome::within(
            "boundary_mass",
            mass,
            target,
            BOUNDARY_MASS_TOL,
        ));
        r.rule(RuleOutcome::at_most(
            "finite_max_constraint",
            self.max_g,
            FEAS_TOL,
        ));
        r.rule(RuleOutcome::at_most(
            "limit_max_violation",
            self.limit_max_violation,
            FEAS_TOL,
        ));
        Ok(r)
    }

    pub fn value_report(&self) -> Result<MCReport> {
        let mut r = self.base("value-convergence");
        let cmp = Comparison::new(
            "sup",
            &EmpiricalDist::new(self.values.clone())?,
            &EmpiricalDist::new(self.limit_values.clone())?,
        );
        r.rule(RuleOutcome::at_most("ks_sup", cmp.ks, KS_VALUE));
        r.comparisons.push(cmp);
        r.samples.push(("finite_sup".into(), self.values.clone()));
        r.samples
            .push(("limit_sup".into(), self.limit_values.clone()));
        Ok(r)
    }
}

pub fn run_corollary2(design: &BoundaryDesign, opts: &McOptions) -> Result<MCReport> {
    run_boundary_experiment(design, opts)?.argmax_report()
}

// --------------------------------------------------------- weak identification

#[derive(Debug, Clone)]
pub struct WeakIdRun {
    pub design: WeakIdDesign,
    pub opts: McOptions,
    /// Regime-appropriate localized estimates per replication.
    pub coords: Vec<[f64; 3]>,
    /// `(beta_hat, pi2_hat)` per replication.
    pub constrained: Vec<(f64, f64)>,
    pub values: Vec<f64>,
    pub limit_coords: Vec<[f64; 3]>,
    pub limit_values: Vec<f64>,
    pub timings: Timings,
}

impl WeakIdRun {
    pub fn labels(&self) -> [&'static str; 3] {
        match self.design.regime {
            WeakIdRegime::Weak { .. } => ["beta", "h_pi1", "h_pi2"],
            WeakIdRegime::Semistrong { .. } => ["h_beta", "h_pi1", "h_pi2"],
        }
    }
}

pub fn run_weakid_experiment(design: &WeakIdDesign, opts: &McOptions) -> Result<WeakIdRun> {
    design.validate()?;
    opts.validate()?;
    let start = Instant::now();
    let stream = opts.finite_stream();
    let semistrong = matches!(design.regime, WeakIdRegime::Semistrong { .. });
    let fits = collect(opts.exec.map(opts.reps, |i| {
        fit_weakid_model(design, derive_seed(stream, i as u64))
    }))?;
    let finite_secs = secs(start);
    let t = Instant::now();
    let (limit_coords, limit_values) = if semistrong {
        let q = design.semistrong_limit()?;
        let set = design.limit_sets()?.lambda_ss()?;
        let s =
            sample_polyhedral_limit(&q, &set, opts.limit_draws, opts.limit_stream(), opts.exec)?;
        (
            s.draws.iter().map(|h| [h[0], h[1], h[2]]).collect(),
            s.values,
        )
    } else {
        sample_weak_limit_values(
            &design.weak_limit()?,
            opts.limit_draws,
            opts.limit_stream(),
            opts.exec,
        )?
        .into_iter()
        .unzip()
    };
    let limit_secs = secs(t);
    Ok(WeakIdRun {
        design: *design,
        opts: *opts,
        coords: fits
            .iter()
            .map(|f| if semistrong { f.semistrong } else { f.weak })
            .collect(),
        constrained: fits
            .iter()
            .map(|f| (f.estimate.beta, f.estimate.pi2))
            .collect(),
        values: fits.iter().map(|f| f.value).collect(),
        limit_coords,
        limit_values,
        timings: Timings {
            finite_secs,
            limit_secs,
            total_secs: secs(start),
        },
    })
}

impl WeakIdRun {
    fn base(&self, id: &str) -> MCReport {
        let mut r = report_for(id, &self.design, self.design.hash(), &self.opts);
        r.timings = self.timings;
        r
    }

    pub fn argmax_report(&self, contrast: Option<&RateContrast>) -> Result<MCReport> {
        let id = match self.design.regime {
            WeakIdRegime::Weak { .. } => "corollary3-weak",
            WeakIdRegime::Semistrong { .. } => "corollary3-semistrong",
        };
        let mut r = self.base(id);
        for (j, label) in self.labels().into_iter().enumerate() {
            let f: Vec<f64> = self.coords.iter().map(|c| c[j]).collect();
            let l: Vec<f64> = self.limit_coords.iter().map(|c| c[j]).collect();
            let cmp = Comparison::new(
                label,
                &EmpiricalDist::new(f.clone())?,
                &EmpiricalDist::new(l.clone())?,
            );
            r.rule(RuleOutcome::at_most(
                format!("ks_{label}"),
                cmp.ks,
                KS_COROLLARY3,
            ));
            r.comparisons.push(cmp);
            r.samples.push((format!("finite_{label}"), f));
            r.samples.push((format!("limit_{label}"), l));
        }
        let violations = self
            .constrained
            .iter()
            .filter(|&&(b, p2)| !(0.0 <= b && b <= p2))
            .count();
        r.rule(RuleOutcome::at_most(
            "draws_violating_0_le_beta_le_pi2",
            violations as f64,
            0.0,
        ));
        if let WeakIdRegime::Semistrong { .. } = self.design.regime {
            let (lo, hi) = interval_of(&self.design.limit_sets()?.b_ss)?;
            let outside = self
                .coords
                .iter()
                .filter(|c| c[0] < lo || c[0] > hi)
                .count();
            r.diagnostics.insert(
                "finite_mass_outside_b_ss".into(),
                outside as f64 / self.coords.len() as f64,
            );
        }
        if let Some(c) = contrast {
            r.diagnostics.insert("contrast_sd_small_n".into(), c.sd[0]);
            r.diagnostics.insert("contrast_sd_large_n".into(), c.sd[1]);
            r.diagnostics.insert("contrast_target".into(), c.target);
            let rule = match self.design.regime {
                WeakIdRegime::Weak { .. } => {
                    RuleOutcome::between("sd_ratio", c.ratio, WEAK_RATIO_BAND.0, WEAK_RATIO_BAND.1)
                }
                WeakIdRegime::Semistrong { .. } => RuleOutcome::within(
                    "sd_ratio_over_rate",
                    c.ratio / c.target,
                    1.0,
                    SEMISTRONG_RATE_TOL,
                ),
            };
            r.rule(rule);
        }
        Ok(r)
    }

    pub fn value_report(&self) -> Result<MCReport> {
        let mut r = self.base("value-convergence");
        let cmp = Comparison::new(
            "sup",
            &EmpiricalDist::new(self.values.clone())?,
            &EmpiricalDist::new(self.limit_values.clone())?,
        );
        r.rule(RuleOutcome::at_most("ks_sup", cmp.ks, KS_VALUE));
        r.comparisons.push(cmp);
        r.samples.push(("finite_sup".into(), self.values.clone()));
        r.samples
            .push(("limit_sup".into(), self.limit_values.clone()));
        Ok(r)
    }
}

/// Argmax comparison plus the two-rate contrast across `contrast_n`.
pub fn run_corollary3(
    design: &WeakIdDesign,
    opts: &McOptions,
    contrast_n: [usize; 2],
) -> Result<MCReport> {
    let run = run_weakid_experiment(design, opts)?;
    let t = Instant::now();
    let contrast = two_rate_contrast(
        design,
        contrast_n,
        opts.reps,
        derive_seed(opts.seed, 2),
        opts.exec,
    )?;
    let mut r = run.argmax_report(Some(&contrast))?;
    r.timings.finite_secs += secs(t);
    r.timings.total_secs += secs(t);
    Ok(r)
}

// --------------------------------------------------------- value convergence

/// Any of the three experiment families.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ValueDesign {
    Break(BreakDesign),
    Boundary(BoundaryDesign),
    Weakid(WeakIdDesign),
}

pub fn run_value_convergence(design: &ValueDesign, opts: &McOptions) -> Result<MCReport> {
    match design {
        ValueDesign::Break(d) => run_break_experiment(d, opts)?.value_report(),
        ValueDesign::Boundary(d) => run_boundary_experiment(d, opts)?.value_report(),
        ValueDesign::Weakid(d) => run_weakid_experiment(d, opts)?.value_report(),
    }
}

// --------------------------------------------------------- self-consistency

/// Two independent break-date limit samples with streams
/// `derive_seed(seed, 1)` and `derive_seed(seed, 2)`.
pub fn run_limit_sample(design: &BreakDesign, opts: &McOptions) -> Result<MCReport> {
    design.validate()?;
    opts.validate()?;
    let start = Instant::now();
    let spec = design.limit_spec()?;
    let half_width = opts.half_width.unwrap_or_else(|| spec.default_half_width());
    let constraint = design.limit_constraint();
    let draw = |stream: u64| {
        sample_limit_argmax(
            &spec,
            &constraint,
            opts.limit_draws,
            half_width,
            opts.step,
            stream,
            opts.exec,
        )
    };
    let a = draw(derive_seed(opts.seed, 1))?;
    let b = draw(derive_seed(opts.seed, 2))?;
    let mut r = report_for("limit-sample", design, design.hash(), opts);
    r.reps = 0;
    let cmp = Comparison::new("argmax", &a.argmax_dist()?, &b.argmax_dist()?);
    r.rule(RuleOutcome::at_most("ks_two_runs", cmp.ks, KS_NOISE_FLOOR));
    r.comparisons.push(cmp);
    r.comparisons
        .push(Comparison::new("sup", &a.sup_dist()?, &b.sup_dist()?));
    r.ties.limit = a.tie_draws + b.tie_draws;
    r.saturation = Some(a.saturation.max(b.saturation));
    r.warnings.extend(a.warning.clone());
    r.warnings.extend(b.warning.clone());
    r.samples.push(("limit_argmax_run1".into(), a.argmax));
    r.samples.push(("limit_argmax_run2".into(), b.argmax));
    r.timings = Timings {
        finite_secs: 0.0,
        limit_secs: secs(start),
        total_secs: secs(start),
    };
    Ok(r)
}

// ---------------------------------------------------------------- pk-check

/// Estimated limit of one built-in set sequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PkSummary {
    pub name: String,
    pub points: usize,
    /// Maximal runs of adjacent grid points (one-dimensional sets only).
    pub components: Option<Vec<(f64, f64)>>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub diagnostics: PkDiagnostics,
    pub secs: f64,
}

impl PkSummary {
    pub fn describe(&self) -> String {
        let fmt = |x: f64| format!("{}", x + 0.0);
        match &self.components {
            Some(cs) => {
                let parts: Vec<String> = cs
                    .iter()
                    .map(|&(a, b)| {
                        if a == b {
                            fmt(a)
                        } else {
                            format!("[{}, {}]", fmt(a), fmt(b))
                        }
                    })
                    .collect();
                format!("{{{}}}", parts.join(", "))
            }
            None if self.points == 0 => "{}".into(),
            None => {
                let box_: Vec<String> = self
                    .lo
                    .iter()
                    .zip(&self.hi)
                    .map(|(a, b)| format!("[{}, {}]", fmt(*a), fmt(*b)))
                    .collect();
                format!("{} grid points spanning {}", self.points, box_.join(" x "))
            }
        }
    }
}

pub fn pk_check(name: &str, a: Option<f64>, exec: Execution) -> Result<Vec<(PkSummary, GridSet)>> {
    family(name, a)?
        .into_iter()
        .map(|p| {
            let t = Instant::now();
            let opts = PkOptions {
                exec,
                ..PkOptions::default()
            };
            let est =
                pk_limit_estimate_with(&p.sequence, &p.window, &p.schedule, p.grid_step, opts)?;
            let d = est.set.dim();
            let (mut lo, mut hi) = (vec![f64::INFINITY; d], vec![f64::NEG_INFINITY; d]);
            for q in est.set.points() {
                for k in 0..d {
                    lo[k] = lo[k].min(q[k]);
                    hi[k] = hi[k].max(q[k]);
                }
            }
            let components = (d == 1).then(|| est.set.components_1d(1.5 * p.grid_step));
            Ok((
                PkSummary {
                    name: p.name.clone(),
                    points: est.set.len(),
                    components,
                    lo,
                    hi,
                    diagnostics: est.diagnostics,
                    secs: secs(t),
                },
                est.set,
            ))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct PkDesign<'a> {
    family: &'a str,
    a: Option<f64>,
}

pub fn run_pk_check(name: &str, a: Option<f64>, opts: &McOptions) -> Result<MCReport> {
    let start = Instant::now();
    let design = PkDesign { family: name, a };
    let mut r = report_for(
        "pk-check",
        &design,
        crate::estimators::design_hash(&design),
        opts,
    );
    r.reps = 0;
    r.limit_draws = 0;
    for (s, set) in pk_check(name, a, opts.exec)? {
        let slug: String = s
            .name
            .chars()
            .map(|c| {
                if c.is_ascii_alphanumeric() || c == '-' || c == '.' {
                    c
                } else {
                    '_'
                }
            })
            .collect();
        r.rule(RuleOutcome::holds(
            format!("{}: converged, limit {}", s.name, s.describe()),
            s.diagnostics.converged,
        ));
        let last = |xs: &[f64]| xs.last().copied().unwrap_or(f64::NAN);
        r.diagnostics
            .insert(format!("{slug}.forward_last"), last(&s.diagnostics.forward));
        r.diagnostics.insert(
            format!("{slug}.backward_last"),
            last(&s.diagnostics.backward),
        );
        r.attachments
            .push((format!("{slug}.limit.csv"), set.to_csv()));
        r.attachments.push((
            format!("{slug}.pk.json"),
            serde_json::to_string_pretty(&s).expect("summary serializes"),
        ));
    }
    r.timings.total_secs = secs(start);
    Ok(r)
}
