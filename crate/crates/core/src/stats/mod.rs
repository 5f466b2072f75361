//! Descriptive statistics, Pearson correlation and one-way ANOVA.
//!
//! Means and variances use Welford accumulation. Quartiles interpolate
//! linearly between order statistics (position `(n - 1)·p`).

mod special;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

pub use special::{betainc, f_cdf, f_sf, ln_gamma, t_cdf, t_two_sided_p};

pub const QUARTILE_METHOD: &str = "linear interpolation between order statistics";

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("continued fraction did not converge")]
    NoConvergence,
}

/// Divisor used for standard deviations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SdMode {
    /// Divide by N.
    #[default]
    Population,
    /// Divide by N − 1.
    Sample,
}

impl fmt::Display for SdMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SdMode::Population => "population",
            SdMode::Sample => "sample",
        })
    }
}

impl FromStr for SdMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "population" => Ok(SdMode::Population),
            "sample" => Ok(SdMode::Sample),
            other => Err(format!("unknown sd mode {other:?}")),
        }
    }
}

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
pub struct Welford {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> usize {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sum of squared deviations from the mean.
    pub fn sum_sq(&self) -> f64 {
        self.m2
    }

    pub fn sd(&self, mode: SdMode) -> Option<f64> {
        let denom = match mode {
            SdMode::Population if self.n >= 1 => self.n as f64,
            SdMode::Sample if self.n >= 2 => (self.n - 1) as f64,
            _ => return None,
        };
        Some((self.m2 / denom).max(0.0).sqrt())
    }
}

impl FromIterator<f64> for Welford {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut w = Welford::default();
        for x in iter {
            w.push(x);
        }
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DescriptiveSummary {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// Summary with population SD.
pub fn describe(values: &[f64]) -> Result<DescriptiveSummary, StatsError> {
    describe_with(values, SdMode::Population)
}

pub fn describe_with(values: &[f64], mode: SdMode) -> Result<DescriptiveSummary, StatsError> {
    if values.is_empty() {
        return Err(StatsError::InvalidArgument("describe needs at least one value".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::InvalidArgument("values must be finite".into()));
    }
    let acc: Welford = values.iter().copied().collect();
    let sd = acc
        .sd(mode)
        .ok_or_else(|| StatsError::InvalidArgument("sample SD needs at least two values".into()))?;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(DescriptiveSummary {
        n: values.len(),
        mean: acc.mean(),
        sd,
        min: sorted[0],
        q1: quantile_sorted(&sorted, 0.25),
        median: quantile_sorted(&sorted, 0.5),
        q3: quantile_sorted(&sorted, 0.75),
        max: sorted[sorted.len() - 1],
    })
}

/// Linear-interpolation quantile of pre-sorted, non-empty data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationResult {
    pub r: f64,
    /// Two-sided.
    pub p: f64,
    pub n: usize,
}

/// Pearson product-moment correlation with a two-sided t-test p-value.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<CorrelationResult, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::InvalidArgument(format!("length mismatch: {} vs {}", x.len(), y.len())));
    }
    let n = x.len();
    if n < 3 {
        return Err(StatsError::InvalidArgument("pearson needs at least 3 pairs".into()));
    }
    let mx = x.iter().copied().collect::<Welford>().mean();
    let my = y.iter().copied().collect::<Welford>().mean();
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::InvalidArgument("zero variance".into()));
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    let p = if r.abs() == 1.0 {
        0.0
    } else {
        let t = r * (df / (1.0 - r * r)).sqrt();
        t_two_sided_p(t, df)?
    };
    Ok(CorrelationResult { r, p, n })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnovaResult {
    pub f: f64,
    pub df_between: usize,
    pub df_within: usize,
    pub p: f64,
    pub eta_squared: f64,
    pub ss_between: f64,
    pub ss_within: f64,
}

/// One-way ANOVA over unbalanced groups.
pub fn one_way_anova<G: AsRef<[f64]>>(groups: &[G]) -> Result<AnovaResult, StatsError> {
    let k = groups.len();
    if k < 2 {
        return Err(StatsError::InvalidArgument("ANOVA needs at least 2 groups".into()));
    }
    let accs: Vec<Welford> = groups.iter().map(|g| g.as_ref().iter().copied().collect()).collect();
    if accs.iter().any(|a| a.count() == 0) {
        return Err(StatsError::InvalidArgument("every group needs at least one value".into()));
    }
    if groups.iter().any(|g| g.as_ref().iter().any(|v| !v.is_finite())) {
        return Err(StatsError::InvalidArgument("values must be finite".into()));
    }
    let n: usize = accs.iter().map(Welford::count).sum();
    if n <= k {
        return Err(StatsError::InvalidArgument("total size must exceed the number of groups".into()));
    }
    let grand = accs.iter().map(|a| a.mean() * a.count() as f64).sum::<f64>() / n as f64;
    let ss_between: f64 = accs.iter().map(|a| a.count() as f64 * (a.mean() - grand).powi(2)).sum();
    let ss_within: f64 = accs.iter().map(Welford::sum_sq).sum();
    if ss_within <= 0.0 {
        return Err(StatsError::Degenerate("zero within-group variance".into()));
    }
    let df_between = k - 1;
    let df_within = n - k;
    let f = (ss_between / df_between as f64) / (ss_within / df_within as f64);
    let p = f_sf(f, df_between as f64, df_within as f64)?;
    let eta_squared = ss_between / (ss_between + ss_within);
    Ok(AnovaResult { f, df_between, df_within, p, eta_squared, ss_between, ss_within })
}

/// Three-decimal rendering without the leading zero, `.000` for p < .001.
pub fn apa_decimal(value: f64) -> String {
    let s = format!("{:.3}", value.abs());
    let s = s.strip_prefix('0').unwrap_or(&s).to_string();
    if value < 0.0 && s != ".000" {
        format!("-{s}")
    } else {
        s
    }
}
