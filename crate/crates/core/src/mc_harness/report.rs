use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::empirical::{ks_distance, samples_csv, EmpiricalDist, QuantileSummary};
use crate::error::Result;

pub const REPORT_SCHEMA: &str = "argmaxlab/report/v1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    AtMost,
    Below,
    AtLeast,
    /// `|value - target| <= tol`, reported with `bound = tol`.
    Within {
        target: f64,
    },
    /// `lo <= value <= bound`
    Between {
        lo: f64,
    },
    /// A yes/no condition; `value` is 1 when it holds.
    Holds,
}

/// One pass/fail rule attached to an experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RuleOutcome {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub bound: f64,
    pub pass: bool,
}

impl RuleOutcome {
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self::make(name, value, Relation::AtMost, bound, value <= bound)
    }

    pub fn below(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self::make(name, value, Relation::Below, bound, value < bound)
    }

    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self::make(name, value, Relation::AtLeast, bound, value >= bound)
    }

    pub fn within(name: impl Into<String>, value: f64, target: f64, tol: f64) -> Self {
        Self::make(
            name,
            value,
            Relation::Within { target },
            tol,
            (value - target).abs() <= tol,
        )
    }

    pub fn between(name: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Self::make(
            name,
            value,
            Relation::Between { lo },
            hi,
            lo <= value && value <= hi,
        )
    }

    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        let v = if ok { 1.0 } else { 0.0 };
        Self::make(name, v, Relation::Holds, 1.0, ok)
    }

    fn make(
        name: impl Into<String>,
        value: f64,
        relation: Relation,
        bound: f64,
        pass: bool,
    ) -> Self {
        Self {
            name: name.into(),
            value,
            relation,
            bound,
            pass: pass && !value.is_nan(),
        }
    }

    pub fn line(&self) -> String {
        let tag = if self.pass { "PASS" } else { "FAIL" };
        if self.relation == Relation::Holds {
            return format!("[{tag}] {}", self.name);
        }
        let rel = match self.relation {
            Relation::AtMost => format!("<= {}", self.bound),
            Relation::Below => format!("< {}", self.bound),
            Relation::AtLeast => format!(">= {}", self.bound),
            Relation::Within { target } => format!("within {} of {target}", self.bound),
            Relation::Between { lo } => format!("in [{lo}, {}]", self.bound),
            Relation::Holds => unreachable!(),
        };
        format!("[{tag}] {}: {:.6} ({rel})", self.name, self.value)
    }
}

/// Two-sample comparison between a finite-sample and a limit sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub name: String,
    pub ks: f64,
    pub finite: QuantileSummary,
    pub limit: QuantileSummary,
}

impl Comparison {
    pub fn new(name: impl Into<String>, finite: &EmpiricalDist, limit: &EmpiricalDist) -> Self {
        Self {
            name: name.into(),
            ks: ks_distance(finite, limit),
            finite: finite.summary(),
            limit: limit.summary(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Timings {
    pub finite_secs: f64,
    pub limit_secs: f64,
    pub total_secs: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct TieCounts {
    pub finite: usize,
    pub limit: usize,
}

/// Machine-readable outcome of one experiment. Raw samples are not part of
/// the JSON; they are written as CSV files next to it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MCReport {
    pub schema: &'static str,
    pub experiment: String,
    pub base_seed: u64,
    pub design: serde_json::Value,
    pub design_hash: String,
    pub reps: usize,
    pub limit_draws: usize,
    pub comparisons: Vec<Comparison>,
    pub ties: TieCounts,
    pub saturation: Option<f64>,
    pub diagnostics: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
    pub timings: Timings,
    pub rules: Vec<RuleOutcome>,
    pub pass: bool,
    #[serde(skip)]
    pub samples: Vec<(String, Vec<f64>)>,
    /// Extra text files (name, contents) such as PK limit sets.
    #[serde(skip)]
    pub attachments: Vec<(String, String)>,
}

impl MCReport {
    pub fn new(
        experiment: impl Into<String>,
        base_seed: u64,
        design: serde_json::Value,
        design_hash: String,
    ) -> Self {
        Self {
            schema: REPORT_SCHEMA,
            experiment: experiment.into(),
            base_seed,
            design,
            design_hash,
            reps: 0,
            limit_draws: 0,
            comparisons: Vec::new(),
            ties: TieCounts::default(),
            saturation: None,
            diagnostics: BTreeMap::new(),
            warnings: Vec::new(),
            timings: Timings::default(),
            rules: Vec::new(),
            pass: true,
            samples: Vec::new(),
            attachments: Vec::new(),
        }
    }

    pub fn rule(&mut self, r: RuleOutcome) {
        self.pass &= r.pass;
        self.rules.push(r);
    }

    pub fn comparison(&self, name: &str) -> Option<&Comparison> {
        self.comparisons.iter().find(|c| c.name == name)
    }

    pub fn ks(&self, name: &str) -> Option<f64> {
        self.comparison(name).map(|c| c.ks)
    }

    pub fn sample(&self, name: &str) -> Option<&[f64]> {
        self.samples
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    /// Absorb another report's comparisons, rules, samples and diagnostics
    /// under a name prefix.
    pub fn merge(&mut self, prefix: &str, other: MCReport) {
        let p = |s: &str| format!("{prefix}{s}");
        for mut c in other.comparisons {
            c.name = p(&c.name);
            self.comparisons.push(c);
        }
        for mut r in other.rules {
            r.name = p(&r.name);
            self.rule(r);
        }
        for (k, v) in other.diagnostics {
            self.diagnostics.insert(p(&k), v);
        }
        for (k, v) in other.samples {
            self.samples.push((p(&k), v));
        }
        for (k, v) in other.attachments {
            self.attachments.push((p(&k), v));
        }
        self.warnings.extend(other.warnings);
        self.ties.finite += other.ties.finite;
        self.ties.limit += other.ties.limit;
        self.saturation = match (self.saturation, other.saturation) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
        self.reps = self.reps.max(other.reps);
        self.limit_draws = self.limit_draws.max(other.limit_draws);
        self.timings.finite_secs += other.timings.finite_secs;
        self.timings.limit_secs += other.timings.limit_secs;
        self.timings.total_secs += other.timings.total_secs;
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn summary_lines(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .comparisons
            .iter()
            .map(|c| {
                format!(
                    "{} {}: KS = {:.4} (medians {:.4} vs {:.4})",
                    self.experiment, c.name, c.ks, c.finite.q50, c.limit.q50
                )
            })
            .collect();
        out.extend(self.rules.iter().map(|r| r.line()));
        out.extend(self.warnings.iter().map(|w| format!("warning: {w}")));
        out
    }

    /// Write `report.json`, one `<name>.csv` per raw sample, one
    /// `<name>.ecdf.csv` per raw sample, and the attachments. Returns the
    /// paths written.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let mut put = |name: String, body: &str| -> Result<()> {
            let path = dir.join(name);
            fs::write(&path, body)?;
            written.push(path);
            Ok(())
        };
        put("report.json".into(), &self.to_json())?;
        for (name, xs) in &self.samples {
            put(format!("{name}.csv"), &samples_csv(name, xs))?;
            if !xs.is_empty() {
                put(
                    format!("{name}.ecdf.csv"),
                    &EmpiricalDist::new(xs.clone())?.ecdf_csv(),
                )?;
            }
        }
        for (name, body) in &self.attachments {
            put(name.clone(), body)?;
        }
        Ok(written)
    }
}

/// Number of local maxima of a smoothed histogram on `[q01, q99]` whose
/// height is at least a tenth of the tallest bin.
pub fn mode_count(xs: &[f64], bins: usize) -> usize {
    let Ok(d) = EmpiricalDist::new(xs.to_vec()) else {
        return 0;
    };
    let (lo, hi) = (d.quantile(0.01), d.quantile(0.99));
    if !(hi > lo) || bins < 3 {
        return 1;
    }
    let mut counts = vec![0.0; bins];
    for &x in d.samples() {
        if x >= lo && x <= hi {
            let b = (((x - lo) / (hi - lo)) * bins as f64) as usize;
            counts[b.min(bins - 1)] += 1.0;
        }
    }
    let smooth: Vec<f64> = (0..bins)
        .map(|i| {
            let a = if i > 0 { counts[i - 1] } else { 0.0 };
            let c = if i + 1 < bins { counts[i + 1] } else { 0.0 };
            (a + 2.0 * counts[i] + c) / 4.0
        })
        .collect();
    let top = smooth.iter().cloned().fold(0.0, f64::max);
    let mut modes = 0;
    let mut i = 0;
    while i < bins {
        // plateaus count once
        let mut j = i;
        while j + 1 < bins && smooth[j + 1] == smooth[i] {
            j += 1;
        }
        let left = if i > 0 {
            smooth[i - 1]
        } else {
            f64::NEG_INFINITY
        };
        let right = if j + 1 < bins {
            smooth[j + 1]
        } else {
            f64::NEG_INFINITY
        };
        if smooth[i] > left && smooth[i] > right && smooth[i] >= 0.1 * top {
            modes += 1;
        }
        i = j + 1;
    }
    modes
}
