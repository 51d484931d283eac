//! Sample statistics with order-independent, reproducible reductions.

use serde::{Deserialize, Serialize};

/// Pairwise (binary tree) summation with a fixed leaf size.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 16;
    if values.len() <= LEAF {
        values.iter().sum()
    } else {
        let (left, right) = values.split_at(values.len() / 2);
        pairwise_sum(left) + pairwise_sum(right)
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub count: usize,
}

impl MeanEstimate {
    pub fn from_samples(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return MeanEstimate {
                mean: f64::NAN,
                stderr: f64::NAN,
                count: 0,
            };
        }
        let mean = pairwise_sum(values) / n as f64;
        let stderr = if n > 1 {
            let deviations: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
            (pairwise_sum(&deviations) / (n - 1) as f64 / n as f64).sqrt()
        } else {
            0.0
        };
        MeanEstimate {
            mean,
            stderr,
            count: n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Pd,
    Sar,
    Rate,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Pd, Metric::Sar, Metric::Rate];

    pub fn tag(self) -> &'static str {
        match self {
            Metric::Pd => "pd",
            Metric::Sar => "sar",
            Metric::Rate => "rate",
        }
    }
}

/// Sorted samples of one metric.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    pub metric: Metric,
    values: Vec<f64>,
}

impl EmpiricalDistribution {
    /// NaN samples are dropped.
    pub fn new(metric: Metric, mut values: Vec<f64>) -> Self {
        values.retain(|v| !v.is_nan());
        values.sort_by(f64::total_cmp);
        EmpiricalDistribution { metric, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn min(&self) -> Option<f64> {
        self.values.first().copied()
    }

    pub fn max(&self) -> Option<f64> {
        self.values.last().copied()
    }

    /// Fraction of samples `<= x`.
    pub fn cdf(&self, x: f64) -> f64 {
        if self.values.is_empty() {
            return f64::NAN;
        }
        self.values.partition_point(|v| *v <= x) as f64 / self.values.len() as f64
    }

    /// Fraction of samples strictly above `x`.
    pub fn fraction_above(&self, x: f64) -> f64 {
        if self.values.is_empty() {
            return f64::NAN;
        }
        let at_or_below = self.values.partition_point(|v| *v <= x);
        (self.values.len() - at_or_below) as f64 / self.values.len() as f64
    }

    /// Fraction of samples `>= x`.
    pub fn fraction_at_or_above(&self, x: f64) -> f64 {
        if self.values.is_empty() {
            return f64::NAN;
        }
        let below = self.values.partition_point(|v| *v < x);
        (self.values.len() - below) as f64 / self.values.len() as f64
    }

    fn rank(&self, p: f64) -> usize {
        let n = self.values.len();
        let t = p.clamp(0.0, 1.0) * n as f64;
        let nearest = t.round();
        let k = if (t - nearest).abs() < 1e-9 {
            nearest
        } else {
            t.ceil()
        };
        (k as usize).clamp(1, n) - 1
    }

    /// Inverse of the empirical CDF: smallest sample with `cdf >= p`.
    pub fn quantile(&self, p: f64) -> Option<f64> {
        if self.values.is_empty() {
            None
        } else {
            Some(self.values[self.rank(p)])
        }
    }

    /// Half-width of the ±1σ order-statistic interval around `quantile(p)`.
    pub fn quantile_stderr(&self, p: f64) -> Option<f64> {
        let n = self.values.len() as f64;
        if n == 0.0 {
            return None;
        }
        let spread = (n * p * (1.0 - p)).sqrt();
        let lo = self.quantile((n * p - spread) / n)?;
        let hi = self.quantile((n * p + spread) / n)?;
        Some(0.5 * (hi - lo))
    }

    /// `(value, cdf)` pairs, at most `max_points` of them, ending at `(max, 1)`.
    pub fn cdf_points(&self, max_points: usize) -> Vec<(f64, f64)> {
        let n = self.values.len();
        if n == 0 {
            return Vec::new();
        }
        let mut points: Vec<(f64, f64)> = Vec::new();
        let mut push = |value: f64| {
            if points.last().is_none_or(|(v, _)| *v != value) {
                points.push((value, 0.0));
            }
        };
        if n <= max_points {
            self.values.iter().for_each(|v| push(*v));
        } else {
            let k = max_points.max(1);
            (1..=k).for_each(|i| push(self.values[self.rank(i as f64 / k as f64)]));
        }
        for point in &mut points {
            point.1 = self.cdf(point.0);
        }
        points
    }
}
