//! Gap-free weekly series built from optional counts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inclusive range of 1-based week ordinals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WeekRange {
    pub first: usize,
    pub last: usize,
}

impl WeekRange {
    pub fn new(first: usize, last: usize) -> Self {
        Self { first, last }
    }

    pub fn len(&self) -> usize {
        self.last + 1 - self.first
    }

    pub fn is_empty(&self) -> bool {
        self.last < self.first
    }
}

impl std::fmt::Display for WeekRange {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.first, self.last)
    }
}

impl std::str::FromStr for WeekRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Domain(format!("week range must look like A:B, got {s:?}"));
        let (a, b) = s.split_once(':').ok_or_else(bad)?;
        let first = a.trim().parse().map_err(|_| bad())?;
        let last = b.trim().parse().map_err(|_| bad())?;
        if first == 0 || last < first {
            return Err(bad());
        }
        Ok(Self { first, last })
    }
}

/// One region's weekly counts with no gaps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSeries {
    pub region_index: usize,
    /// Week ordinal of `values[0]`.
    pub start_week: usize,
    values: Vec<f64>,
    /// First-differenced series may go negative.
    differenced: bool,
}

impl TimeSeries {
    /// Wraps already gap-free, non-negative values. Requires at least two.
    pub fn new(region_index: usize, start_week: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::TooShort {
                len: values.len(),
                min: 2,
            });
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Domain(
                "series values must be finite and non-negative".into(),
            ));
        }
        Ok(Self {
            region_index,
            start_week,
            values,
            differenced: false,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_differenced(&self) -> bool {
        self.differenced
    }

    pub fn last_week(&self) -> usize {
        self.start_week + self.values.len() - 1
    }

    pub fn week_range(&self) -> WeekRange {
        WeekRange::new(self.start_week, self.last_week())
    }

    /// True when every value equals the first.
    pub fn is_constant(&self) -> bool {
        self.values.iter().all(|&v| v == self.values[0])
    }

    /// Restricts the series to the inclusive week range `[first, last]`.
    ///
    /// The result must be long enough for a cross-correlation window of
    /// `lag_max` weeks on either side, i.e. at least `2 * lag_max + 2` values.
    pub fn slice_weeks(&self, first: usize, last: usize, lag_max: usize) -> Result<Self> {
        if first < self.start_week || last > self.last_week() || first > last {
            return Err(Error::Range {
                first,
                last,
                lo: self.start_week,
                hi: self.last_week(),
            });
        }
        let len = last + 1 - first;
        let min = min_len_for_lag(lag_max);
        if len < min {
            return Err(Error::TooShort { len, min });
        }
        let lo = first - self.start_week;
        Ok(Self {
            start_week: first,
            values: self.values[lo..lo + len].to_vec(),
            ..self.clone()
        })
    }

    /// First differences `v[t+1] - v[t]`; the result starts one week later.
    pub fn difference(&self) -> Result<Self> {
        if self.values.len() < 2 {
            return Err(Error::TooShort {
                len: self.values.len(),
                min: 2,
            });
        }
        Ok(Self {
            region_index: self.region_index,
            start_week: self.start_week + 1,
            values: self.values.windows(2).map(|w| w[1] - w[0]).collect(),
            differenced: true,
        })
    }
}

/// Shortest series usable with a `lag_max` cross-correlation window.
pub fn min_len_for_lag(lag_max: usize) -> usize {
    2 * lag_max + 2
}

/// Fills absent entries from the nearest present neighbours.
///
/// An interior gap takes `(p + f) / 2`, where `p` and `f` are the nearest
/// present values before and after it; every position in a run of gaps gets
/// the same value. Leading gaps copy the first present value and trailing
/// gaps copy the last one.
pub fn fill_missing(raw: &[Option<f64>]) -> Result<Vec<f64>> {
    if raw.len() < 2 {
        return Err(Error::TooShort {
            len: raw.len(),
            min: 2,
        });
    }
    let first = raw
        .iter()
        .position(Option::is_some)
        .ok_or(Error::EmptySeries)?;

    let mut out = Vec::with_capacity(raw.len());
    let mut prev: Option<f64> = None;
    let mut pending = 0usize;
    for v in raw {
        match *v {
            Some(x) => {
                let fill = match prev {
                    Some(p) => (p + x) / 2.0,
                    None => x,
                };
                out.extend(std::iter::repeat_n(fill, pending));
                pending = 0;
                out.push(x);
                prev = Some(x);
            }
            None => pending += 1,
        }
    }
    let last = prev.unwrap_or_else(|| raw[first].unwrap());
    out.extend(std::iter::repeat_n(last, pending));
    Ok(out)
}

/// [`fill_missing`] over integer counts, producing a [`TimeSeries`].
pub fn fill_counts(region_index: usize, raw: &[Option<u64>]) -> Result<TimeSeries> {
    let as_real: Vec<Option<f64>> = raw.iter().map(|c| c.map(|v| v as f64)).collect();
    TimeSeries::new(region_index, 1, fill_missing(&as_real)?)
}
