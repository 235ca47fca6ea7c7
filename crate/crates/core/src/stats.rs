//! Moment estimators with standard errors, fixed-edge histograms and the
//! two-sample Kolmogorov–Smirnov test.

use std::cmp::Ordering;

use serde::Serialize;

use crate::error::StatsError;

/// Smallest sample size accepted by [`two_sample_test`].
pub const KS_MIN_SAMPLES: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MomentReport {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub se_mean: f64,
    pub se_variance: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Moment {
    Mean,
    Variance,
}

/// Sample mean and unbiased variance, with `se_mean = sqrt(var / n)` and
/// `se_variance = var * sqrt(2 / (n - 1))` (the normal-theory value).
pub fn moments(samples: &[f64]) -> Result<MomentReport, StatsError> {
    let n = samples.len();
    if n < 2 {
        return Err(StatsError::TooFewSamples { n, min: 2 });
    }
    let nf = n as f64;
    let mean = samples.iter().sum::<f64>() / nf;
    let variance = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    Ok(MomentReport {
        n,
        mean,
        variance,
        se_mean: (variance / nf).sqrt(),
        se_variance: variance * (2.0 / (nf - 1.0)).sqrt(),
    })
}

/// `|estimate - target| <= 3 * se` for the chosen moment.
pub fn within_3se(report: &MomentReport, target: f64, which: Moment) -> bool {
    let (est, se) = match which {
        Moment::Mean => (report.mean, report.se_mean),
        Moment::Variance => (report.variance, report.se_variance),
    };
    (est - target).abs() <= 3.0 * se
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Samples that fell inside the edges; equals the sum of `counts`.
    pub total: u64,
    /// Samples outside `[edges[0], edges[last]]`.
    pub outside: u64,
}

impl Histogram {
    /// Bins are half-open `[e_i, e_{i+1})` except the last, which is closed.
    pub fn new(edges: Vec<f64>, samples: &[f64]) -> Result<Self, StatsError> {
        if edges.len() < 2 || edges.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(Ordering::Less)) {
            return Err(StatsError::BadEdges);
        }
        let mut h = Histogram {
            counts: vec![0; edges.len() - 1],
            edges,
            total: 0,
            outside: 0,
        };
        h.extend(samples);
        Ok(h)
    }

    pub fn uniform(lo: f64, hi: f64, bins: usize, samples: &[f64]) -> Result<Self, StatsError> {
        if bins == 0 || lo.partial_cmp(&hi) != Some(Ordering::Less) {
            return Err(StatsError::BadEdges);
        }
        let width = (hi - lo) / bins as f64;
        let mut edges: Vec<f64> = (0..bins).map(|i| lo + i as f64 * width).collect();
        edges.push(hi);
        Histogram::new(edges, samples)
    }

    pub fn extend(&mut self, samples: &[f64]) {
        let last = *self.edges.last().expect("at least two edges");
        for &x in samples {
            if !(x >= self.edges[0] && x <= last) {
                self.outside += 1;
                continue;
            }
            let bin = if x == last {
                self.counts.len() - 1
            } else {
                self.edges.partition_point(|&e| e <= x) - 1
            };
            self.counts[bin] += 1;
            self.total += 1;
        }
    }

    /// Bin-wise sum of two histograms on identical edges.
    pub fn merge(&self, other: &Histogram) -> Option<Histogram> {
        if self.edges != other.edges {
            return None;
        }
        Some(Histogram {
            edges: self.edges.clone(),
            counts: self.counts.iter().zip(&other.counts).map(|(a, b)| a + b).collect(),
            total: self.total + other.total,
            outside: self.outside + other.outside,
        })
    }

    /// Per-bin density estimate `count / (total_samples * width)`.
    pub fn densities(&self) -> Vec<f64> {
        let n = (self.total + self.outside) as f64;
        self.counts
            .iter()
            .zip(self.edges.windows(2))
            .map(|(&c, w)| c as f64 / (n * (w[1] - w[0])))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KsOutcome {
    pub statistic: f64,
    pub critical: f64,
    pub reject: bool,
}

/// Asymptotic two-sample critical value `c(alpha) sqrt((n + m) / (n m))`
/// with `c(alpha) = sqrt(-ln(alpha / 2) / 2)`.
pub fn ks_critical_value(n: usize, m: usize, alpha: f64) -> Result<f64, StatsError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(StatsError::BadAlpha(alpha));
    }
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    let (n, m) = (n as f64, m as f64);
    Ok(c * ((n + m) / (n * m)).sqrt())
}

/// Largest gap between the two empirical CDFs.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Two-sample Kolmogorov–Smirnov test at significance `alpha`.
pub fn two_sample_test(a: &[f64], b: &[f64], alpha: f64) -> Result<KsOutcome, StatsError> {
    for s in [a, b] {
        if s.len() < KS_MIN_SAMPLES {
            return Err(StatsError::TooFewSamples {
                n: s.len(),
                min: KS_MIN_SAMPLES,
            });
        }
    }
    let critical = ks_critical_value(a.len(), b.len(), alpha)?;
    let statistic = ks_statistic(a, b);
    Ok(KsOutcome {
        statistic,
        critical,
        reject: statistic > critical,
    })
}
