mod common;

use proptest::prelude::*;
use rand::Rng;
use statrs::distribution::{ContinuousCDF, Normal};
use surveilcorr::anomaly::{ears_c, ears_c_with, Interval};
use surveilcorr::normal::quantile;
use surveilcorr::scorematrix::compare_windows;
use surveilcorr::xcorr::ccf_values;
use surveilcorr::{
    compute_all, weighted_score, ScoreConfig, SurveillanceTable, TimeSeries, WeekRange,
};

#[test]
fn ccf_matches_covariance_loop() {
    let mut rng = common::rng(11);
    for _ in 0..50 {
        let n = rng.gen_range(50..=500);
        let lag = rng.gen_range(0..=10);
        let x = common::random_series(&mut rng, n);
        let y = common::random_series(&mut rng, n);
        let got = ccf_values(&x, &y, lag, 1, 2).unwrap();
        for (a, b) in got.values().iter().zip(common::oracle_ccf(&x, &y, lag)) {
            assert!((a - b).abs() <= 1e-12);
        }
    }
}

#[test]
fn score_matches_direct_weighted_sum() {
    let mut rng = common::rng(12);
    for _ in 0..200 {
        let n = rng.gen_range(12..200);
        let x = common::random_series(&mut rng, n);
        let y = common::random_series(&mut rng, n);
        let cv = ccf_values(&x, &y, 5, 1, 2).unwrap();
        assert!((weighted_score(&cv) - common::oracle_score(cv.values())).abs() <= 1e-12);
    }
}

#[test]
fn three_region_matrix_matches_pairwise_recomputation() {
    let table = common::random_table(13, 3, 80);
    let m = compute_all(&table, &ScoreConfig::default()).unwrap();
    let filled: Vec<Vec<f64>> = (1..=3)
        .map(|r| {
            let raw: Vec<Option<f64>> = table
                .row(r)
                .unwrap()
                .iter()
                .map(|c| c.map(|v| v as f64))
                .collect();
            surveilcorr::fill_missing(&raw).unwrap()
        })
        .collect();
    for (i, j) in [(1, 2), (1, 3), (2, 3)] {
        let want = common::oracle_score(&common::oracle_ccf(&filled[i - 1], &filled[j - 1], 5));
        assert!((m.get(i, j).unwrap().unwrap() - want).abs() <= 1e-10);
    }
}

#[test]
fn identical_rows_score_self_correlation() {
    let row: Vec<Option<u64>> = [3u64, 9, 4, 7, 12, 5, 6, 11, 2, 8, 10, 4, 9, 3]
        .iter()
        .map(|v| Some(*v))
        .collect();
    let table =
        SurveillanceTable::from_rows([("A", "P", row.clone()), ("B", "P", row.clone())]).unwrap();
    let m = compute_all(&table, &ScoreConfig::default()).unwrap();
    let x: Vec<f64> = row.iter().map(|v| v.unwrap() as f64).collect();
    let want = weighted_score(&ccf_values(&x, &x, 5, 1, 2).unwrap());
    assert_eq!(m.get(1, 2).unwrap(), Some(want));
}

#[test]
fn full_size_matrix_stores_every_pair() {
    let table = common::random_table(14, 189, 60);
    let m = compute_all(&table, &ScoreConfig::default()).unwrap();
    assert_eq!(m.stored_count(), 17_766);
    assert!(m.score_values().iter().all(|s| s.abs() <= 39.0));
}

#[test]
fn permuting_rows_permutes_matrix() {
    let table = common::random_table(15, 8, 70);
    let perm = [3usize, 7, 1, 8, 2, 5, 4, 6];
    let rows: Vec<_> = perm
        .iter()
        .map(|&p| {
            let rec = table.region(p).unwrap();
            (
                rec.district_name.clone(),
                rec.province.clone(),
                table.row(p).unwrap().to_vec(),
            )
        })
        .collect();
    let permuted = SurveillanceTable::from_rows(rows).unwrap();
    let cfg = ScoreConfig::default();
    let a = compute_all(&table, &cfg).unwrap();
    let b = compute_all(&permuted, &cfg).unwrap();
    for i in 1..=8 {
        for j in 1..=8 {
            if i != j {
                assert_eq!(
                    b.get(i, j).unwrap(),
                    a.get(perm[i - 1], perm[j - 1]).unwrap()
                );
            }
        }
    }
}

#[test]
fn quantile_matches_statrs() {
    let n = Normal::new(0.0, 1.0).unwrap();
    let mut p = 1e-12;
    while p < 1.0 {
        let want = n.inverse_cdf(p);
        assert!(
            (quantile(p).unwrap() - want).abs() <= 1e-9 * want.abs().max(1.0),
            "p = {p}"
        );
        p = if p < 0.01 { p * 3.0 } else { p + 0.0137 };
    }
}

#[test]
fn ears_thresholds_match_direct_formula() {
    let mut rng = common::rng(16);
    for r in 0..100 {
        let n = rng.gen_range(10..150);
        let baseline = rng.gen_range(2..9).min(n - 1);
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(0..80) as f64).collect();
        let ts = TimeSeries::new(r + 1, 1, v.clone()).unwrap();
        let got = ears_c(&ts, baseline, 0.05).unwrap();
        for (e, (_, thr, _)) in got
            .entries
            .iter()
            .zip(common::oracle_ears(&v, baseline, 0.05))
        {
            assert!((e.threshold - thr).abs() <= 1e-10);
        }
    }
}

#[test]
fn plain_interval_never_raises_fewer_alarms() {
    let mut rng = common::rng(17);
    for r in 0..50 {
        let v: Vec<f64> = (0..100).map(|_| rng.gen_range(0..50) as f64).collect();
        let ts = TimeSeries::new(r + 1, 1, v).unwrap();
        let pi = ears_c_with(&ts, 7, 0.05, Interval::Prediction)
            .unwrap()
            .alarm_weeks();
        let plain = ears_c_with(&ts, 7, 0.05, Interval::Plain)
            .unwrap()
            .alarm_weeks();
        assert!(pi.iter().all(|w| plain.contains(w)));
    }
}

#[test]
fn disjoint_windows_of_stationary_table_are_stable() {
    let mut lowest = f64::INFINITY;
    for seed in 0..10 {
        let table = common::factor_table(100 + seed, 30, 200, 4);
        let c = compare_windows(
            &table,
            WeekRange::new(1, 100),
            WeekRange::new(101, 200),
            &ScoreConfig::default(),
        )
        .unwrap();
        lowest = lowest.min(c.stability);
    }
    assert!(lowest > 0.5, "lowest stability {lowest}");
}

#[test]
fn repeated_halves_are_perfectly_stable() {
    let table = common::random_table(18, 12, 40);
    let rows: Vec<_> = table
        .rows()
        .map(|(rec, cells)| {
            let mut doubled = cells.to_vec();
            doubled.extend_from_slice(cells);
            (rec.district_name.clone(), rec.province.clone(), doubled)
        })
        .collect();
    let doubled = SurveillanceTable::from_rows(rows).unwrap();
    let c = compare_windows(
        &doubled,
        WeekRange::new(1, 40),
        WeekRange::new(41, 80),
        &ScoreConfig::default(),
    )
    .unwrap();
    assert_eq!(c.stability, 1.0);
}

fn series_strategy() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (12usize..120).prop_flat_map(|n| {
        (
            prop::collection::vec(0.0f64..100.0, n),
            prop::collection::vec(0.0f64..100.0, n),
        )
    })
}

proptest! {
    #[test]
    fn ccf_bounded((x, y) in series_strategy()) {
        if let Ok(cv) = ccf_values(&x, &y, 5, 1, 2) {
            prop_assert!(cv.values().iter().all(|c| (-1.0..=1.0).contains(c)));
            prop_assert!(weighted_score(&cv).abs() <= 39.0);
        }
    }

    #[test]
    fn swapping_pair_mirrors_vector((x, y) in series_strategy()) {
        if let (Ok(a), Ok(b)) = (ccf_values(&x, &y, 5, 1, 2), ccf_values(&y, &x, 5, 2, 1)) {
            let mut rev = b.values().to_vec();
            rev.reverse();
            prop_assert_eq!(a.values(), &rev[..]);
            prop_assert_eq!(weighted_score(&a), weighted_score(&b));
        }
    }

    #[test]
    fn affine_maps_leave_ccf_unchanged((x, y) in series_strategy(), a in 0.1f64..20.0, b in -50.0f64..50.0) {
        let x2: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        if let (Ok(c1), Ok(c2)) = (ccf_values(&x, &y, 5, 1, 2), ccf_values(&x2, &y, 5, 1, 2)) {
            for (u, v) in c1.values().iter().zip(c2.values()) {
                prop_assert!((u - v).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn score_is_linear(u in prop::collection::vec(-0.5f64..0.5, 11), v in prop::collection::vec(-0.5f64..0.5, 11)) {
        let w = surveilcorr::WeightVector::new(5);
        let sum: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
        prop_assert!((w.apply(&sum) - w.apply(&u) - w.apply(&v)).abs() <= 1e-12);
    }
}
