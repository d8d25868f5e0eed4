use pmcal::timeseries::{self, AlignSpec, IntervalMask};
use pmcal::{Channel, Series};
use proptest::prelude::*;

use super::gen::{grid, rows, series, series_from, BASE, INTERVALS};
use super::{check, close, Property};

pub const PROPERTIES: &[(&str, Property)] = &[
    ("average_idempotent", average_idempotent),
    ("average_commutes_with_scaling", average_commutes_with_scaling),
    ("mask_union_composes", mask_union_composes),
    ("align_rows_in_both", align_rows_in_both),
    ("unitwise_of_copies", unitwise_of_copies),
    ("completeness_bounded", completeness_bounded),
];

fn same_values(a: &Series, b: &Series, tol: f64) -> Result<(), TestCaseError> {
    prop_assert_eq!(a.len(), b.len());
    for (x, y) in a.samples().iter().zip(b.samples()) {
        prop_assert_eq!(x.timestamp, y.timestamp);
        prop_assert_eq!(x.valid, y.valid);
        for ch in Channel::ALL {
            match (x.get(ch), y.get(ch)) {
                (Some(u), Some(v)) => prop_assert!(close(u, v, tol, 1e-300), "{:?}: {} vs {}", ch, u, v),
                (u, v) => prop_assert_eq!(u, v),
            }
        }
    }
    Ok(())
}

fn average_idempotent() -> Result<(), String> {
    // Identity needs the grid phase to match the epoch-anchored windows.
    let on_epoch_grid = (prop::sample::select(INTERVALS.to_vec()), rows(true, 40))
        .prop_map(|(iv, rows)| series_from("gen", iv, BASE, &rows));
    check((on_epoch_grid, series(false, 40)), |(valid, any)| {
        let once = timeseries::average_interval(&valid, valid.interval()).unwrap();
        prop_assert_eq!(&once.series, &valid);
        let a = timeseries::average_interval(&any, any.interval()).unwrap().series;
        let b = timeseries::average_interval(&a, a.interval()).unwrap().series;
        prop_assert_eq!(a, b);
        Ok(())
    })
}

fn scaled(s: &Series, k: f64, channels: &[Channel]) -> Series {
    let samples = s
        .samples()
        .iter()
        .map(|x| {
            let mut y = x.clone();
            for &ch in channels {
                y.set(ch, x.get(ch).map(|v| v * k));
            }
            y
        })
        .collect();
    Series::new(s.device_id(), s.interval(), samples).unwrap()
}

fn average_commutes_with_scaling() -> Result<(), String> {
    let groups = vec![
        vec![Channel::Pm1, Channel::Pm25, Channel::Pm10],
        vec![Channel::Temp],
        vec![Channel::Adc],
    ];
    let strategy = (
        series(false, 60),
        prop::sample::select(vec![1i64, 2, 3, 12]),
        0.01..100.0f64,
        prop::sample::select(groups),
    );
    check(strategy, |(s, factor, k, channels)| {
        let target = s.interval() * factor;
        let lhs = timeseries::average_interval(&scaled(&s, k, &channels), target)
            .unwrap()
            .series;
        let rhs = scaled(&timeseries::average_interval(&s, target).unwrap().series, k, &channels);
        same_values(&lhs, &rhs, 1e-12)
    })
}

fn windows(s: &Series) -> impl Strategy<Value = IntervalMask> {
    let (lo, hi) = match (s.samples().first(), s.samples().last()) {
        (Some(a), Some(b)) => (a.timestamp - 100, b.timestamp + 100),
        _ => (0, 1000),
    };
    prop::collection::vec((lo..hi, 1i64..600), 0..4)
        .prop_map(|ws| IntervalMask::new(ws.into_iter().map(|(a, len)| (a, a + len))).unwrap())
}

fn mask_union_composes() -> Result<(), String> {
    let strategy = series(false, 50).prop_flat_map(|s| {
        let (m1, m2) = (windows(&s), windows(&s));
        (Just(s), m1, m2)
    });
    check(strategy, |(s, m1, m2)| {
        let both = timeseries::apply_mask(&s, &m1.union(&m2)).series;
        let seq = timeseries::apply_mask(&timeseries::apply_mask(&s, &m1).series, &m2).series;
        prop_assert_eq!(both, seq);
        Ok(())
    })
}

fn align_rows_in_both() -> Result<(), String> {
    let strategy = (grid(), rows(false, 50), rows(false, 50), any::<bool>());
    check(strategy, |((interval, t0), a, b, need_rh)| {
        let cand = series_from("cand", interval, t0, &a);
        let refr = series_from("ref", interval, t0, &b);
        let spec = AlignSpec {
            require_rh: need_rh,
            ..AlignSpec::pm25()
        };
        let pairs = timeseries::align_collocated(&cand, &refr, &spec).unwrap();
        prop_assert!(pairs.len() <= cand.valid_count().min(refr.valid_count()));
        for (i, &ts) in pairs.timestamps.iter().enumerate() {
            let (c, r) = (cand.at(ts).unwrap(), refr.at(ts).unwrap());
            prop_assert!(c.valid && r.valid);
            prop_assert_eq!(c.pm25, Some(pairs.x[i]));
            prop_assert_eq!(r.pm25, Some(pairs.y[i]));
            prop_assert_eq!(r.rh, pairs.rh[i]);
        }
        Ok(())
    })
}

fn unitwise_of_copies() -> Result<(), String> {
    let strategy = (series(true, 40), 1usize..6).prop_flat_map(|(s, n)| (Just(s), Just(n), 1..=n));
    check(strategy, |(s, n, min_units)| {
        let fleet: Vec<Series> = (0..n).map(|i| s.clone().with_device_id(format!("u{i}"))).collect();
        let avg = timeseries::unitwise_average(&fleet, min_units).unwrap();
        same_values(&avg, &s, 1e-14)
    })
}

fn completeness_bounded() -> Result<(), String> {
    let strategy = series(false, 50).prop_flat_map(|s| {
        let base = s.samples().first().map_or(0, |x| x.timestamp);
        let iv = s.interval();
        (
            Just(s),
            prop::collection::vec((0i64..200).prop_map(move |k| base + k * iv), 1..80),
        )
    });
    check(strategy, |(s, schedule)| {
        let eta = timeseries::completeness(&s, &schedule).unwrap();
        prop_assert!((0.0..=100.0).contains(&eta), "eta = {}", eta);
        Ok(())
    })
}
