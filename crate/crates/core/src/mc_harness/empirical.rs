use serde::Serialize;

use crate::error::{LabError, Result};

/// Sorted Monte Carlo sample with ECDF and quantile queries.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDist {
    samples: Vec<f64>,
}

impl EmpiricalDist {
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(LabError::EmptySample);
        }
        if let Some(x) = samples.iter().find(|x| x.is_nan()) {
            return Err(LabError::InvalidArgument(format!("sample contains {x}")));
        }
        samples.sort_by(f64::total_cmp);
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn min(&self) -> f64 {
        self.samples[0]
    }

    pub fn max(&self) -> f64 {
        self.samples[self.samples.len() - 1]
    }

    /// `#{x_i <= x} / n`
    pub fn ecdf(&self, x: f64) -> f64 {
        self.samples.partition_point(|&v| v <= x) as f64 / self.len() as f64
    }

    /// Fraction of the sample strictly below `x`.
    pub fn fraction_below(&self, x: f64) -> f64 {
        self.samples.partition_point(|&v| v < x) as f64 / self.len() as f64
    }

    /// Linear interpolation between order statistics (Hyndman-Fan type 7).
    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.len();
        let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
        let lo = h.floor() as usize;
        let hi = (lo + 1).min(n - 1);
        self.samples[lo] + (h - lo as f64) * (self.samples[hi] - self.samples[lo])
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.len() as f64
    }

    /// Sample standard deviation (divisor `n - 1`; zero for one point).
    pub fn std_dev(&self) -> f64 {
        let n = self.len();
        if n < 2 {
            return 0.0;
        }
        let m = self.mean();
        (self.samples.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    }

    pub fn negated(&self) -> Self {
        Self {
            samples: self.samples.iter().rev().map(|x| -x).collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::new(self.samples.iter().map(|x| c * x).collect()).expect("nonempty")
    }

    pub fn summary(&self) -> QuantileSummary {
        let q = |p| self.quantile(p);
        QuantileSummary {
            n: self.len(),
            mean: self.mean(),
            sd: self.std_dev(),
            q01: q(0.01),
            q05: q(0.05),
            q25: q(0.25),
            q50: q(0.50),
            q75: q(0.75),
            q95: q(0.95),
            q99: q(0.99),
        }
    }

    /// Step points `(x, F(x))` at each distinct sample value.
    pub fn ecdf_points(&self) -> Vec<(f64, f64)> {
        let n = self.len() as f64;
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (i, &x) in self.samples.iter().enumerate() {
            let f = (i + 1) as f64 / n;
            match out.last_mut() {
                Some(last) if last.0 == x => last.1 = f,
                _ => out.push((x, f)),
            }
        }
        out
    }

    pub fn ecdf_csv(&self) -> String {
        let mut s = String::from("x,F\n");
        for (x, f) in self.ecdf_points() {
            s.push_str(&format!("{x},{f}\n"));
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantileSummary {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub q01: f64,
    pub q05: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub q95: f64,
    pub q99: f64,
}

/// Two-sample Kolmogorov-Smirnov statistic `sup_x |F_a(x) - F_b(x)|`.
pub fn ks_distance(a: &EmpiricalDist, b: &EmpiricalDist) -> f64 {
    let (xa, xb) = (a.samples(), b.samples());
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xa.len() && j < xb.len() {
        let x = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] <= x {
            i += 1;
        }
        while j < xb.len() && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Kolmogorov-Smirnov distance between samples given as raw slices.
pub fn ks_samples(a: &[f64], b: &[f64]) -> Result<f64> {
    Ok(ks_distance(
        &EmpiricalDist::new(a.to_vec())?,
        &EmpiricalDist::new(b.to_vec())?,
    ))
}

/// Single-column CSV with a header.
pub fn samples_csv(name: &str, xs: &[f64]) -> String {
    let mut s = format!("{name}\n");
    for x in xs {
        s.push_str(&format!("{x}\n"));
    }
    s
}
