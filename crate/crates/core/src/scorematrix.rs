//! Pairwise weighted correlation scores over every region pair.
//!
//! Scores are symmetric, so only the strict upper triangle (`i < j`) is
//! stored. Each pair is scored independently from pre-standardized series,
//! which keeps the result bit-identical however the work is scheduled.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::{RegionRecord, SurveillanceTable};
use crate::numfmt;
use crate::timeseries::{fill_counts, min_len_for_lag, TimeSeries, WeekRange};
use crate::xcorr::{ccf_standardized_into, Standardized, WeightVector, DEFAULT_LAG_MAX};

/// Options shared by every score computation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoreConfig {
    pub lag_max: usize,
    /// Inclusive week window; the full record when `None`.
    pub week_range: Option<WeekRange>,
    /// First-difference every series before correlating.
    pub prewhiten: bool,
    /// Worker cap; rayon's default pool when `None`.
    pub threads: Option<usize>,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        Self {
            lag_max: DEFAULT_LAG_MAX,
            week_range: None,
            prewhiten: false,
            threads: None,
        }
    }
}

/// A pair left out of the matrix, with the reason.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkippedPair {
    pub i: usize,
    pub j: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    regions: Vec<RegionRecord>,
    /// Row-major strict upper triangle; `None` for skipped pairs.
    scores: Vec<Option<f64>>,
    pub lag_max: usize,
    pub week_range: WeekRange,
    pub prewhitened: bool,
    skipped: Vec<SkippedPair>,
}

/// One row of a top-k answer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedPartner {
    pub index: usize,
    pub label: String,
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SummaryStats {
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation; 0 for a single score.
    pub sd: f64,
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

impl SummaryStats {
    /// Annotation text in the `Mean=3.02, SD=7.44; Min=-24.22, ...` layout.
    pub fn caption(&self) -> String {
        format!(
            "Mean={}, SD={}; Min={}, Median={}, Max={}",
            numfmt::fixed(self.mean, 2),
            numfmt::fixed(self.sd, 2),
            numfmt::fixed(self.min, 2),
            numfmt::fixed(self.median, 2),
            numfmt::fixed(self.max, 2)
        )
    }
}

fn tri_len(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Offset of 0-based pair `(a, b)`, `a < b`, in row-major upper-triangle order.
fn tri_index(n: usize, a: usize, b: usize) -> usize {
    debug_assert!(a < b && b < n);
    a * (2 * n - a - 1) / 2 + (b - a - 1)
}

impl ScoreMatrix {
    pub fn n_regions(&self) -> usize {
        self.regions.len()
    }

    pub fn regions(&self) -> &[RegionRecord] {
        &self.regions
    }

    pub fn skipped_pairs(&self) -> &[SkippedPair] {
        &self.skipped
    }

    /// Number of stored (non-skipped) scores.
    pub fn stored_count(&self) -> usize {
        self.scores.iter().filter(|s| s.is_some()).count()
    }

    /// Score for regions `i` and `j` (1-based, `i != j`, either order).
    /// `Ok(None)` when the pair was skipped.
    pub fn get(&self, i: usize, j: usize) -> Result<Option<f64>> {
        let n = self.regions.len();
        for idx in [i, j] {
            if idx == 0 || idx > n {
                return Err(Error::RegionOutOfRange { index: idx, n });
            }
        }
        if i == j {
            return Err(Error::Domain(format!("no self score for region {i}")));
        }
        let (a, b) = if i < j {
            (i - 1, j - 1)
        } else {
            (j - 1, i - 1)
        };
        Ok(self.scores[tri_index(n, a, b)])
    }

    /// Stored scores as `(i, j, score)` with `i < j`, row-major.
    pub fn iter_scores(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.regions.len();
        (0..n)
            .flat_map(move |a| (a + 1..n).map(move |b| (a, b)))
            .zip(&self.scores)
            .filter_map(|((a, b), s)| s.map(|s| (a + 1, b + 1, s)))
    }

    pub fn score_values(&self) -> Vec<f64> {
        self.scores.iter().flatten().copied().collect()
    }

    /// The `k` highest scores involving `region`, descending, ties by partner
    /// index. Skipped pairs are not ranked, so fewer than `k` rows may return.
    pub fn top_k(&self, region: usize, k: usize) -> Result<Vec<RankedPartner>> {
        let n = self.regions.len();
        if region == 0 || region > n {
            return Err(Error::RegionOutOfRange { index: region, n });
        }
        if k == 0 || k > n - 1 {
            return Err(Error::Domain(format!("k = {k} must be in 1..={}", n - 1)));
        }
        let mut partners: Vec<(usize, f64)> = (1..=n)
            .filter(|&j| j != region)
            .filter_map(|j| self.get(region, j).ok().flatten().map(|s| (j, s)))
            .collect();
        partners.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        Ok(partners
            .into_iter()
            .take(k)
            .map(|(j, score)| RankedPartner {
                index: j,
                label: self.regions[j - 1].label(),
                score,
            })
            .collect())
    }

    pub fn summary_stats(&self) -> Result<SummaryStats> {
        summary_stats(&self.score_values())
    }

    /// `i,j,score` CSV with six significant digits; skipped pairs follow as
    /// `i,j,SKIPPED:<reason>`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,j,score\n");
        for (i, j, s) in self.iter_scores() {
            let _ = writeln!(out, "{i},{j},{}", numfmt::sig(s, 6));
        }
        for sp in &self.skipped {
            let _ = writeln!(out, "{},{},SKIPPED:{}", sp.i, sp.j, sp.reason);
        }
        out
    }
}

/// Mean, sample sd, min, median and max of a non-empty score list.
pub fn summary_stats(scores: &[f64]) -> Result<SummaryStats> {
    if scores.is_empty() {
        return Err(Error::InsufficientData("no scores to summarize".into()));
    }
    let n = scores.len();
    let mean = scores.iter().sum::<f64>() / n as f64;
    let sd = if n > 1 {
        let ss: f64 = scores.iter().map(|s| (s - mean) * (s - mean)).sum();
        (ss / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    };
    Ok(SummaryStats {
        count: n,
        mean,
        sd,
        min: sorted[0],
        median,
        max: sorted[n - 1],
    })
}

/// Gap-filled, windowed and optionally differenced series for every region.
/// `Err` entries carry the reason a region cannot be scored.
pub fn prepare_series(
    table: &SurveillanceTable,
    config: &ScoreConfig,
) -> Result<(WeekRange, Vec<std::result::Result<TimeSeries, String>>)> {
    let full = WeekRange::new(1, table.n_weeks());
    let range = config.week_range.unwrap_or(full);
    if range.first == 0 || range.last > table.n_weeks() || range.is_empty() {
        return Err(Error::Range {
            first: range.first,
            last: range.last,
            lo: 1,
            hi: table.n_weeks(),
        });
    }
    let min = min_len_for_lag(config.lag_max) + usize::from(config.prewhiten);
    if range.len() < min {
        return Err(Error::TooShort {
            len: range.len(),
            min,
        });
    }
    let series = table
        .rows()
        .map(|(region, cells)| {
            let ts = match fill_counts(region.index, cells) {
                Ok(ts) => ts,
                Err(Error::EmptySeries) => {
                    return Ok(Err(format!("no data in region {}", region.index)))
                }
                Err(e) => return Err(e),
            };
            let ts = ts.slice_weeks(range.first, range.last, config.lag_max)?;
            Ok(Ok(if config.prewhiten {
                ts.difference()?
            } else {
                ts
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((range, series))
}

fn run_pool<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(job()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Domain(format!("thread pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

/// Scores every unordered region pair over the configured week window.
///
/// Regions whose series is constant (or entirely unreported) cannot be
/// correlated; every pair touching one is recorded in
/// [`ScoreMatrix::skipped_pairs`] instead of being scored.
pub fn compute_all(table: &SurveillanceTable, config: &ScoreConfig) -> Result<ScoreMatrix> {
    let (range, series) = prepare_series(table, config)?;
    let standardized: Vec<std::result::Result<Standardized, String>> = series
        .iter()
        .enumerate()
        .map(|(idx, s)| match s {
            Ok(ts) => Standardized::new(ts.values(), idx + 1)
                .map_err(|_| format!("constant series in region {}", idx + 1)),
            Err(reason) => Err(reason.clone()),
        })
        .collect();
    let usable = standardized.iter().filter(|s| s.is_ok()).count();
    if usable < 2 {
        return Err(Error::InsufficientData(format!(
            "{usable} usable region(s), need at least 2"
        )));
    }

    let n = table.n_regions();
    let lag_max = config.lag_max;
    let weights = WeightVector::new(lag_max);
    let rows: Vec<Vec<Option<f64>>> = run_pool(config.threads, || {
        (0..n)
            .into_par_iter()
            .map(|a| {
                let mut buf = vec![0.0; 2 * lag_max + 1];
                (a + 1..n)
                    .map(|b| match (&standardized[a], &standardized[b]) {
                        (Ok(za), Ok(zb)) => {
                            ccf_standardized_into(za, zb, lag_max, &mut buf);
                            Some(weights.apply(&buf))
                        }
                        _ => None,
                    })
                    .collect()
            })
            .collect()
    })?;

    let mut skipped = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let reason = match (&standardized[a], &standardized[b]) {
                (Err(r), _) | (_, Err(r)) => r,
                _ => continue,
            };
            skipped.push(SkippedPair {
                i: a + 1,
                j: b + 1,
                reason: reason.clone(),
            });
        }
    }

    let scores: Vec<Option<f64>> = rows.into_iter().flatten().collect();
    debug_assert_eq!(scores.len(), tri_len(n));
    Ok(ScoreMatrix {
        regions: table.regions().to_vec(),
        scores,
        lag_max,
        week_range: range,
        prewhitened: config.prewhiten,
        skipped,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowComparison {
    pub matrix_a: ScoreMatrix,
    pub matrix_b: ScoreMatrix,
    /// Pearson correlation between the two score vectors over common pairs.
    pub stability: f64,
    pub common_pairs: usize,
}

/// Scores two week windows and measures how well the pair scores agree.
pub fn compare_windows(
    table: &SurveillanceTable,
    window_a: WeekRange,
    window_b: WeekRange,
    config: &ScoreConfig,
) -> Result<WindowComparison> {
    let matrix_a = compute_all(
        table,
        &ScoreConfig {
            week_range: Some(window_a),
            ..config.clone()
        },
    )?;
    let matrix_b = compute_all(
        table,
        &ScoreConfig {
            week_range: Some(window_b),
            ..config.clone()
        },
    )?;
    let (va, vb): (Vec<f64>, Vec<f64>) = matrix_a
        .scores
        .iter()
        .zip(&matrix_b.scores)
        .filter_map(|(a, b)| Some(((*a)?, (*b)?)))
        .unzip();
    if va.is_empty() {
        return Err(Error::InsufficientData(
            "no pair is usable in both windows".into(),
        ));
    }
    let stability = if va == vb {
        1.0
    } else {
        pearson(&va, &vb)
            .ok_or_else(|| Error::InsufficientData("score vectors have zero variance".into()))?
    };
    Ok(WindowComparison {
        matrix_a,
        matrix_b,
        stability,
        common_pairs: va.len(),
    })
}

/// Pearson correlation; `None` when either side has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    if n < 2 || n != y.len() {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::xcorr::{ccf_values, weighted_score};

    fn table(rows: &[Vec<u64>]) -> SurveillanceTable {
        SurveillanceTable::from_rows(rows.iter().enumerate().map(|(i, r)| {
            (
                format!("D{}", i + 1),
                "P".to_string(),
                r.iter().map(|&v| Some(v)).collect(),
            )
        }))
        .unwrap()
    }

    fn wiggle(seed: u64, n: usize) -> Vec<u64> {
        // small LCG; deterministic and dependency-free
        let mut s = seed
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (0..n)
            .map(|_| {
                s = s
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                (s >> 58) + 1
            })
            .collect()
    }

    #[test]
    fn tri_index_is_dense() {
        let n = 7;
        let mut expect = 0;
        for a in 0..n {
            for b in a + 1..n {
                assert_eq!(tri_index(n, a, b), expect);
                expect += 1;
            }
        }
        assert_eq!(expect, tri_len(n));
    }

    #[test]
    fn two_identical_rows() {
        let row = wiggle(3, 40);
        let m = compute_all(&table(&[row.clone(), row.clone()]), &ScoreConfig::default()).unwrap();
        let x: Vec<f64> = row.iter().map(|&v| v as f64).collect();
        let expect = weighted_score(&ccf_values(&x, &x, 5, 1, 1).unwrap());
        assert_eq!(m.get(1, 2).unwrap(), Some(expect));
        assert_eq!(m.stored_count(), 1);
    }

    #[test]
    fn get_is_symmetric_and_rejects_diagonal() {
        let m = compute_all(
            &table(&[wiggle(1, 30), wiggle(2, 30), wiggle(3, 30)]),
            &ScoreConfig::default(),
        )
        .unwrap();
        assert_eq!(m.get(1, 3).unwrap(), m.get(3, 1).unwrap());
        assert!(m.get(2, 2).is_err());
        assert!(matches!(m.get(0, 1), Err(Error::RegionOutOfRange { .. })));
        assert!(matches!(m.get(1, 4), Err(Error::RegionOutOfRange { .. })));
    }

    #[test]
    fn constant_rows_are_skipped() {
        let m = compute_all(
            &table(&[wiggle(1, 30), vec![4; 30], wiggle(3, 30)]),
            &ScoreConfig::default(),
        )
        .unwrap();
        assert_eq!(m.stored_count(), 1);
        assert_eq!(m.skipped_pairs().len(), 2);
        assert_eq!(m.get(1, 2).unwrap(), None);
        assert!(m
            .to_csv()
            .contains("1,2,SKIPPED:constant series in region 2\n"));
    }

    #[test]
    fn insufficient_regions() {
        let err = compute_all(
            &table(&[wiggle(1, 30), vec![4; 30]]),
            &ScoreConfig::default(),
        );
        assert!(matches!(err, Err(Error::InsufficientData(_))));
    }

    #[test]
    fn too_short_window() {
        let cfg = ScoreConfig {
            week_range: Some(WeekRange::new(15, 20)),
            ..Default::default()
        };
        let err = compute_all(&table(&[wiggle(1, 30), wiggle(2, 30)]), &cfg);
        assert_eq!(err.unwrap_err(), Error::TooShort { len: 6, min: 12 });
    }

    #[test]
    fn top_k_sorting_and_ties() {
        let regions: Vec<RegionRecord> = (1..=4)
            .map(|i| RegionRecord {
                index: i,
                district_name: format!("D{i}"),
                province: "P".into(),
            })
            .collect();
        // pairs: (1,2) (1,3) (1,4) (2,3) (2,4) (3,4)
        let m = ScoreMatrix {
            regions,
            scores: vec![Some(5.0), Some(7.0), Some(5.0), Some(1.0), None, Some(2.0)],
            lag_max: 5,
            week_range: WeekRange::new(1, 20),
            prewhitened: false,
            skipped: vec![],
        };
        let top = m.top_k(1, 2).unwrap();
        assert_eq!(
            top.iter().map(|r| (r.index, r.score)).collect::<Vec<_>>(),
            [(3, 7.0), (2, 5.0)]
        );
        let all = m.top_k(1, 3).unwrap();
        assert_eq!(all.iter().map(|r| r.index).collect::<Vec<_>>(), [3, 2, 4]);
        assert_eq!(all[0].label, "3 D3,P");
        assert_eq!(m.top_k(2, 3).unwrap().len(), 2);
        assert!(m.top_k(0, 1).is_err());
        assert!(m.top_k(5, 1).is_err());
        assert!(m.top_k(1, 4).is_err());
        assert!(m.top_k(1, 0).is_err());
    }

    #[test]
    fn summary_cases() {
        let s = summary_stats(&[2.0]).unwrap();
        assert_eq!(
            (s.mean, s.sd, s.min, s.median, s.max),
            (2.0, 0.0, 2.0, 2.0, 2.0)
        );
        let s = summary_stats(&[1.0, 3.0]).unwrap();
        assert_eq!(s.mean, 2.0);
        assert_eq!(s.median, 2.0);
        assert!((s.sd - 2f64.sqrt()).abs() < 1e-15);
        let s = summary_stats(&[29.96, -24.22, 2.40]).unwrap();
        assert_eq!((s.min, s.median, s.max), (-24.22, 2.40, 29.96));
        assert!(summary_stats(&[]).is_err());
    }

    #[test]
    fn caption_format() {
        let s = SummaryStats {
            count: 17766,
            mean: 3.02,
            sd: 7.44,
            min: -24.22,
            median: 2.40,
            max: 29.96,
        };
        assert_eq!(
            s.caption(),
            "Mean=3.02, SD=7.44; Min=-24.22, Median=2.40, Max=29.96"
        );
    }

    #[test]
    fn identical_windows_are_perfectly_stable() {
        let t = table(&[wiggle(1, 40), wiggle(2, 40), wiggle(3, 40), wiggle(4, 40)]);
        let w = WeekRange::new(1, 40);
        let c = compare_windows(&t, w, w, &ScoreConfig::default()).unwrap();
        assert_eq!(c.stability, 1.0);
        assert_eq!(c.common_pairs, 6);
    }

    #[test]
    fn repeated_halves_are_perfectly_stable() {
        let rows: Vec<Vec<u64>> = (1..=4)
            .map(|s| {
                let half = wiggle(s, 20);
                half.iter().chain(&half).copied().collect()
            })
            .collect();
        let c = compare_windows(
            &table(&rows),
            WeekRange::new(1, 20),
            WeekRange::new(21, 40),
            &ScoreConfig::default(),
        )
        .unwrap();
        assert_eq!(c.stability, 1.0);
    }

    #[test]
    fn prewhiten_shortens_and_marks() {
        let t = table(&[wiggle(1, 30), wiggle(2, 30)]);
        let m = compute_all(
            &t,
            &ScoreConfig {
                prewhiten: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(m.prewhitened);
        let x: Vec<f64> = wiggle(1, 30)
            .windows(2)
            .map(|w| w[1] as f64 - w[0] as f64)
            .collect();
        let y: Vec<f64> = wiggle(2, 30)
            .windows(2)
            .map(|w| w[1] as f64 - w[0] as f64)
            .collect();
        let expect = weighted_score(&ccf_values(&x, &y, 5, 1, 2).unwrap());
        assert!((m.get(1, 2).unwrap().unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn pearson_basics() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(pearson(&[1.0, 1.0], &[2.0, 4.0]), None);
    }
}
