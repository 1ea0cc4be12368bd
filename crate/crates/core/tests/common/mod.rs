#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use statrs::distribution::{ContinuousCDF, Normal as StatNormal};
use surveilcorr::SurveillanceTable;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_series<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut prev = 0.0;
    (0..n)
        .map(|_| {
            prev = 0.5 * prev + normal.sample(rng);
            prev
        })
        .collect()
}

/// Lag-k correlation straight from the covariance definition: pairs
/// `(x[t], y[t + k])`, divide-by-n moments, no standardization step.
pub fn oracle_ccf(x: &[f64], y: &[f64], lag_max: usize) -> Vec<f64> {
    let n = x.len();
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let vx = x.iter().map(|v| (v - mx).powi(2)).sum::<f64>() / nf;
    let vy = y.iter().map(|v| (v - my).powi(2)).sum::<f64>() / nf;
    let l = lag_max as isize;
    (-l..=l)
        .map(|k| {
            let mut cov = 0.0;
            for t in 0..n as isize {
                let u = t + k;
                if u >= 0 && u < n as isize {
                    cov += (x[t as usize] - mx) * (y[u as usize] - my);
                }
            }
            cov / nf / (vx * vy).sqrt()
        })
        .collect()
}

pub fn oracle_score(values: &[f64]) -> f64 {
    let l = (values.len() / 2) as isize;
    values
        .iter()
        .zip(-l..=l)
        .map(|(c, k)| 10.0 / (k.abs() as f64 + 1.0) * c)
        .sum()
}

/// `(week offset, threshold, alarm)` per evaluated week.
pub fn oracle_ears(values: &[f64], baseline: usize, alpha: f64) -> Vec<(usize, f64, bool)> {
    let z = StatNormal::new(0.0, 1.0)
        .unwrap()
        .inverse_cdf(1.0 - alpha / 2.0);
    let b = baseline as f64;
    (baseline..values.len())
        .map(|t| {
            let w = &values[t - baseline..t];
            let m = w.iter().sum::<f64>() / b;
            let var = w.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (b - 1.0);
            let thr = m + z * var.sqrt() * (1.0 + 1.0 / b).sqrt();
            (t, thr, values[t] > thr)
        })
        .collect()
}

fn to_counts(v: &[f64]) -> Vec<Option<u64>> {
    v.iter().map(|x| Some(x.round().max(0.0) as u64)).collect()
}

pub fn table_from_series(series: &[Vec<f64>]) -> SurveillanceTable {
    SurveillanceTable::from_rows(
        series
            .iter()
            .enumerate()
            .map(|(i, s)| (format!("D{}", i + 1), "P".to_string(), to_counts(s))),
    )
    .unwrap()
}

/// Independent Poisson counts around a seasonal mean with random phase.
pub fn random_table(seed: u64, regions: usize, weeks: usize) -> SurveillanceTable {
    let mut rng = rng(seed);
    let rows: Vec<Vec<f64>> = (0..regions)
        .map(|_| {
            let base = rng.gen_range(5.0..40.0);
            let phase = rng.gen_range(0.0..std::f64::consts::TAU);
            (0..weeks)
                .map(|t| {
                    let mean = base
                        * (1.0 + 0.4 * (t as f64 * std::f64::consts::TAU / 52.0 + phase).sin());
                    Poisson::new(mean.max(0.5)).unwrap().sample(&mut rng)
                })
                .collect()
        })
        .collect();
    table_from_series(&rows)
}

/// Outbreak-style signal: a weak seasonal cycle plus randomly placed bursts.
pub fn outbreak_signal<R: Rng>(rng: &mut R, weeks: usize) -> Vec<f64> {
    let phase = rng.gen_range(0.0..std::f64::consts::TAU);
    let mut s: Vec<f64> = (0..weeks)
        .map(|t| 4.0 * (t as f64 * std::f64::consts::TAU / 52.0 + phase).sin())
        .collect();
    let bursts = weeks / 20;
    for _ in 0..bursts {
        let start = rng.gen_range(0..weeks);
        let height = rng.gen_range(20.0..40.0);
        for (d, shape) in [0.3, 0.7, 1.0, 0.8, 0.5, 0.25].iter().enumerate() {
            if start + d < weeks {
                s[start + d] += height * shape;
            }
        }
    }
    s
}

pub const PLANTED_LAGS: [usize; 5] = [0, 1, 2, 2, 1];

/// Regions 1–5 carry the same outbreak signal, delayed by `PLANTED_LAGS`;
/// the rest carry independent signals of the same kind. Additive Gaussian
/// noise is scaled to half the signal sd (SNR 2).
pub fn planted_table(seed: u64, regions: usize, weeks: usize) -> SurveillanceTable {
    let mut rng = rng(seed);
    let pad = 8;
    let common = outbreak_signal(&mut rng, weeks + pad);
    let rows: Vec<Vec<f64>> = (0..regions)
        .map(|r| {
            let signal: Vec<f64> = if r < PLANTED_LAGS.len() {
                let lag = PLANTED_LAGS[r];
                (0..weeks).map(|t| common[t + pad - lag]).collect()
            } else {
                let own = outbreak_signal(&mut rng, weeks + pad);
                own[pad..].to_vec()
            };
            let sd = sample_sd(&signal);
            let noise = Normal::new(0.0, sd / 2.0).unwrap();
            signal
                .iter()
                .map(|s| 50.0 + s + noise.sample(&mut rng))
                .collect()
        })
        .collect();
    table_from_series(&rows)
}

/// Groups of regions loading on shared AR(1) factors; stationary, so pair
/// scores should be similar across disjoint windows.
pub fn factor_table(seed: u64, regions: usize, weeks: usize, groups: usize) -> SurveillanceTable {
    let mut rng = rng(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let factors: Vec<Vec<f64>> = (0..groups)
        .map(|_| {
            let mut prev = 0.0;
            (0..weeks)
                .map(|_| {
                    prev = 0.6 * prev + normal.sample(&mut rng);
                    prev
                })
                .collect()
        })
        .collect();
    let rows: Vec<Vec<f64>> = (0..regions)
        .map(|r| {
            let f = &factors[r % groups];
            let lag = rng.gen_range(0..3usize);
            let load = rng.gen_range(0.5..1.5);
            (0..weeks)
                .map(|t| {
                    100.0 + 10.0 * load * f[t.saturating_sub(lag)] + 5.0 * normal.sample(&mut rng)
                })
                .collect()
        })
        .collect();
    table_from_series(&rows)
}

pub fn sample_sd(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0)).sqrt()
}
