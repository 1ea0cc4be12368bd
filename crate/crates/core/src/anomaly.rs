//! EARS-C aberration detection, alarm clustering and alarm overlap.
//!
//! For each week after the first `B`, the preceding `B` weeks give a mean `m`
//! and sample sd `s`; the week alarms when its count exceeds
//! `m + z_{1-alpha/2} * s * sqrt(1 + 1/B)`. With a flat baseline (`s = 0`)
//! any count above `m` alarms.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::normal;
use crate::numfmt;
use crate::timeseries::TimeSeries;

pub const DEFAULT_BASELINE: usize = 7;
pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_MAX_GAP: usize = 2;
pub const DEFAULT_TOLERANCE: usize = 1;

/// Threshold form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Interval {
    /// `m + z * s * sqrt(1 + 1/B)`: prediction interval for a new count.
    #[default]
    Prediction,
    /// `m + z * s`: plain C1 bound.
    Plain,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlarmEntry {
    pub week: usize,
    pub observed: f64,
    pub mean: f64,
    pub sd: f64,
    pub threshold: f64,
    pub alarm: bool,
    /// `(observed - mean) / sd`; `None` when `sd` is zero.
    pub c_stat: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlarmSeries {
    pub region_index: usize,
    pub baseline: usize,
    pub alpha: f64,
    pub interval: Interval,
    /// One entry per week with a full baseline behind it.
    pub entries: Vec<AlarmEntry>,
}

impl AlarmSeries {
    pub fn alarm_weeks(&self) -> Vec<usize> {
        self.entries
            .iter()
            .filter(|e| e.alarm)
            .map(|e| e.week)
            .collect()
    }

    pub fn alarm_count(&self) -> usize {
        self.entries.iter().filter(|e| e.alarm).count()
    }

    /// First and last evaluated week, if any.
    pub fn week_span(&self) -> Option<(usize, usize)> {
        Some((self.entries.first()?.week, self.entries.last()?.week))
    }

    /// `week,observed,mean,sd,threshold,alarm` CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("week,observed,mean,sd,threshold,alarm\n");
        for e in &self.entries {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                e.week,
                numfmt::sig(e.observed, 6),
                numfmt::sig(e.mean, 6),
                numfmt::sig(e.sd, 6),
                numfmt::sig(e.threshold, 6),
                e.alarm
            );
        }
        out
    }
}

/// EARS-C with the default prediction-interval threshold.
pub fn ears_c(ts: &TimeSeries, baseline: usize, alpha: f64) -> Result<AlarmSeries> {
    ears_c_with(ts, baseline, alpha, Interval::Prediction)
}

pub fn ears_c_with(
    ts: &TimeSeries,
    baseline: usize,
    alpha: f64,
    interval: Interval,
) -> Result<AlarmSeries> {
    if baseline < 2 {
        return Err(Error::Domain(format!(
            "baseline {baseline} must be at least 2"
        )));
    }
    let z = normal::two_sided_z(alpha)?;
    let values = ts.values();
    if values.len() <= baseline {
        return Err(Error::TooShort {
            len: values.len(),
            min: baseline + 1,
        });
    }
    let b = baseline as f64;
    let inflation = match interval {
        Interval::Prediction => (1.0 + 1.0 / b).sqrt(),
        Interval::Plain => 1.0,
    };
    let entries = (baseline..values.len())
        .map(|t| {
            let window = &values[t - baseline..t];
            let mean = window.iter().sum::<f64>() / b;
            let ss: f64 = window.iter().map(|v| (v - mean) * (v - mean)).sum();
            let sd = (ss / (b - 1.0)).sqrt();
            let observed = values[t];
            let threshold = mean + z * sd * inflation;
            AlarmEntry {
                week: ts.start_week + t,
                observed,
                mean,
                sd,
                threshold,
                alarm: observed > threshold,
                c_stat: (sd > 0.0).then(|| (observed - mean) / sd),
            }
        })
        .collect();
    Ok(AlarmSeries {
        region_index: ts.region_index,
        baseline,
        alpha,
        interval,
        entries,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AlarmCluster {
    pub start_week: usize,
    pub end_week: usize,
    pub alarm_count: usize,
}

/// Groups alarm weeks left to right; an alarm joins the open cluster when at
/// most `max_gap` quiet weeks separate it from the cluster's last alarm.
pub fn cluster_alarms(a: &AlarmSeries, max_gap: usize) -> Vec<AlarmCluster> {
    cluster_weeks(&a.alarm_weeks(), max_gap)
}

/// [`cluster_alarms`] over sorted alarm weeks.
pub fn cluster_weeks(weeks: &[usize], max_gap: usize) -> Vec<AlarmCluster> {
    let mut clusters: Vec<AlarmCluster> = Vec::new();
    for &w in weeks {
        match clusters.last_mut() {
            Some(c) if w - c.end_week <= max_gap + 1 => {
                c.end_week = w;
                c.alarm_count += 1;
            }
            _ => clusters.push(AlarmCluster {
                start_week: w,
                end_week: w,
                alarm_count: 1,
            }),
        }
    }
    clusters
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlarmOverlap {
    pub jaccard: f64,
    pub matched_a: usize,
    pub matched_b: usize,
    /// Mean of `week_b - week_a` over matched pairs; positive when `a` leads.
    pub mean_lead: Option<f64>,
    pub alarms_a: usize,
    pub alarms_b: usize,
}

/// Matches alarms of `a` and `b` that fall within `tolerance` weeks of each
/// other, closest first, each alarm used at most once.
pub fn alarm_overlap(a: &AlarmSeries, b: &AlarmSeries, tolerance: usize) -> Result<AlarmOverlap> {
    if a.week_span() != b.week_span() {
        return Err(Error::Pairing(format!(
            "alarm series cover different weeks: {:?} vs {:?}",
            a.week_span(),
            b.week_span()
        )));
    }
    Ok(overlap_weeks(&a.alarm_weeks(), &b.alarm_weeks(), tolerance))
}

/// [`alarm_overlap`] over sorted, distinct alarm weeks.
///
/// Two empty alarm sets count as identical (`jaccard = 1`).
pub fn overlap_weeks(a: &[usize], b: &[usize], tolerance: usize) -> AlarmOverlap {
    // (distance, earlier week, later week, ia, ib); the key ignores which side
    // each week came from, so swapping a and b yields the same matching.
    let mut candidates = Vec::new();
    for (ia, &wa) in a.iter().enumerate() {
        for (ib, &wb) in b.iter().enumerate() {
            let d = wa.abs_diff(wb);
            if d <= tolerance {
                candidates.push((d, wa.min(wb), wa.max(wb), ia, ib));
            }
        }
    }
    candidates.sort_unstable_by_key(|&(d, lo, hi, _, _)| (d, lo, hi));
    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut matched = 0usize;
    let mut lead_sum = 0i64;
    for (_, _, _, ia, ib) in candidates {
        if used_a[ia] || used_b[ib] {
            continue;
        }
        used_a[ia] = true;
        used_b[ib] = true;
        matched += 1;
        lead_sum += b[ib] as i64 - a[ia] as i64;
    }
    let union = a.len() + b.len() - matched;
    AlarmOverlap {
        jaccard: if union == 0 {
            1.0
        } else {
            matched as f64 / union as f64
        },
        matched_a: matched,
        matched_b: matched,
        mean_lead: (matched > 0).then(|| lead_sum as f64 / matched as f64),
        alarms_a: a.len(),
        alarms_b: b.len(),
    }
}
