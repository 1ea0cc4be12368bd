//! Lagged sample cross-correlation and the weighted correlation score.
//!
//! Lag convention: a positive lag `k` moves the first series ahead of the
//! second by `k` weeks, so `value[k]` pairs `x[t - k]` with `y[t]`. If `y` is
//! `x` delayed by two weeks the peak sits at `k = +2`.
//!
//! Normalization follows the usual sample ccf: full-series means and
//! divide-by-`n` deviations, with every lag divided by `n` regardless of how
//! many products overlap.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::normal;
use crate::timeseries::{min_len_for_lag, TimeSeries};

pub const DEFAULT_LAG_MAX: usize = 5;

/// `2L + 1` correlations for one ordered region pair, lags `-L..=L`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationVector {
    pub lag_max: usize,
    values: Vec<f64>,
    /// Shared series length.
    pub n: usize,
    pub i: usize,
    pub j: usize,
}

impl CorrelationVector {
    /// Builds a vector from raw values; length must be `2 * lag_max + 1` and
    /// every value must lie in `[-1, 1]`.
    pub fn from_values(
        lag_max: usize,
        values: Vec<f64>,
        n: usize,
        i: usize,
        j: usize,
    ) -> Result<Self> {
        if values.len() != 2 * lag_max + 1 {
            return Err(Error::Domain(format!(
                "correlation vector has {} entries, expected {}",
                values.len(),
                2 * lag_max + 1
            )));
        }
        if values.iter().any(|v| !(-1.0..=1.0).contains(v)) {
            return Err(Error::Domain("correlation outside [-1, 1]".into()));
        }
        Ok(Self {
            lag_max,
            values,
            n,
            i,
            j,
        })
    }

    /// Values ordered from lag `-L` to `+L`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, lag: isize) -> Option<f64> {
        let idx = lag + self.lag_max as isize;
        (idx >= 0)
            .then(|| self.values.get(idx as usize).copied())
            .flatten()
    }

    pub fn lags(&self) -> impl Iterator<Item = isize> {
        let l = self.lag_max as isize;
        -l..=l
    }

    /// Lag of the largest correlation; ties go to the smallest lag.
    pub fn argmax(&self) -> isize {
        let mut best = 0;
        for (idx, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = idx;
            }
        }
        best as isize - self.lag_max as isize
    }
}

/// Lag weights `10 / (|k| + 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    pub lag_max: usize,
    weights: Vec<f64>,
}

impl WeightVector {
    pub fn new(lag_max: usize) -> Self {
        let l = lag_max as isize;
        let weights = (-l..=l)
            .map(|k| 10.0 / (k.unsigned_abs() as f64 + 1.0))
            .collect();
        Self { lag_max, weights }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, lag: isize) -> f64 {
        10.0 / (lag.unsigned_abs() as f64 + 1.0)
    }

    /// Score of a correlation vector laid out from lag `-L` to `+L`.
    ///
    /// Mirrored lags are added before weighting, so a mirrored vector scores
    /// bit-identically. Terms accumulate from the outermost lag inward; with
    /// this order the all-ones vector at `L = 5` sums to exactly 39.
    pub fn apply(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.weights.len());
        let l = self.lag_max;
        let mut total = 0.0;
        for k in (1..=l).rev() {
            total += self.weights[l + k] * (values[l + k] + values[l - k]);
        }
        total + self.weights[l] * values[l]
    }

    /// Largest attainable score magnitude, reached when every correlation is 1.
    pub fn bound(&self) -> f64 {
        self.apply(&vec![1.0; self.weights.len()])
    }
}

/// Series centered on its mean and divided by its root-mean-square deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardized(Vec<f64>);

impl Standardized {
    /// Fails with [`Error::Degenerate`] on a constant series.
    pub fn new(values: &[f64], region: usize) -> Result<Self> {
        if values.is_empty() || values.iter().all(|&v| v == values[0]) {
            return Err(Error::Degenerate { region });
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        let sd = (ss / n).sqrt();
        if sd == 0.0 || !sd.is_finite() {
            return Err(Error::Degenerate { region });
        }
        Ok(Self(values.iter().map(|v| (v - mean) / sd).collect()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// `sum_{t >= k} lead[t - k] * lag[t]`, shared by both lag signs so that
/// swapping the pair mirrors the vector bit for bit.
fn shifted_dot(lead: &[f64], lag: &[f64], k: usize) -> f64 {
    lead[..lead.len() - k]
        .iter()
        .zip(&lag[k..])
        .map(|(a, b)| a * b)
        .sum()
}

/// Cross-correlation of two standardized series of equal length, written into
/// `out` (length `2 * lag_max + 1`).
pub fn ccf_standardized_into(x: &Standardized, y: &Standardized, lag_max: usize, out: &mut [f64]) {
    let n = x.len();
    debug_assert_eq!(n, y.len());
    debug_assert_eq!(out.len(), 2 * lag_max + 1);
    let nf = n as f64;
    for k in 0..=lag_max {
        out[lag_max + k] = (shifted_dot(&x.0, &y.0, k) / nf).clamp(-1.0, 1.0);
        if k > 0 {
            out[lag_max - k] = (shifted_dot(&y.0, &x.0, k) / nf).clamp(-1.0, 1.0);
        }
    }
}

fn check_pair(nx: usize, ny: usize, lag_max: usize) -> Result<()> {
    if nx != ny {
        return Err(Error::Pairing(format!(
            "series lengths differ: {nx} vs {ny}"
        )));
    }
    let min = min_len_for_lag(lag_max);
    if nx < min {
        return Err(Error::TooShort { len: nx, min });
    }
    Ok(())
}

/// Cross-correlation over plain slices; `i` and `j` label the pair in errors.
pub fn ccf_values(
    x: &[f64],
    y: &[f64],
    lag_max: usize,
    i: usize,
    j: usize,
) -> Result<CorrelationVector> {
    check_pair(x.len(), y.len(), lag_max)?;
    let zx = Standardized::new(x, i)?;
    let zy = Standardized::new(y, j)?;
    let mut values = vec![0.0; 2 * lag_max + 1];
    ccf_standardized_into(&zx, &zy, lag_max, &mut values);
    Ok(CorrelationVector {
        lag_max,
        values,
        n: x.len(),
        i,
        j,
    })
}

/// Lagged cross-correlation vector of two series.
pub fn ccf(x: &TimeSeries, y: &TimeSeries, lag_max: usize) -> Result<CorrelationVector> {
    ccf_values(
        x.values(),
        y.values(),
        lag_max,
        x.region_index,
        y.region_index,
    )
}

/// Two-sided white-noise band `z_{1 - alpha/2} / sqrt(n)` for sample
/// cross-correlations.
pub fn significance_threshold(n: f64, alpha: f64) -> Result<f64> {
    if !n.is_finite() || n < 2.0 {
        return Err(Error::Domain(format!(
            "series length {n} must be at least 2"
        )));
    }
    Ok(normal::two_sided_z(alpha)? / n.sqrt())
}

/// Weighted sum of a correlation vector with weights `10 / (|k| + 1)`.
pub fn weighted_score(cv: &CorrelationVector) -> f64 {
    WeightVector::new(cv.lag_max).apply(&cv.values)
}
