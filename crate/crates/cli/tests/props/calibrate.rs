use pmcal::calibrate::{self, ModelKind};
use pmcal::CollocatedPairs;
use proptest::prelude::*;

use super::{check, close, Property};

pub const PROPERTIES: &[(&str, Property)] = &[
    ("residuals_sum_to_zero", residuals_sum_to_zero),
    ("scaling_y_scales_coefficients", scaling_y_scales_coefficients),
    ("shifting_x_moves_intercept", shifting_x_moves_intercept),
    ("r_squared_in_unit_interval", r_squared_in_unit_interval),
    ("exact_data_fits_exactly", exact_data_fits_exactly),
    ("variance_decomposes", variance_decomposes),
];

#[derive(Clone, Debug)]
struct Dataset {
    kind: ModelKind,
    pairs: CollocatedPairs,
}

fn kind() -> impl Strategy<Value = ModelKind> {
    prop::sample::select(ModelKind::ALL.to_vec())
}

/// Rows `(x, rh, temp)` with `y` from random coefficients plus noise of
/// standard deviation `noise` (zero gives exact data).
fn dataset(
    kind: impl Strategy<Value = ModelKind>,
    noise: impl Strategy<Value = f64>,
) -> impl Strategy<Value = Dataset> {
    let rows = prop::collection::vec((1.0..200.0f64, 10.0..95.0f64, -5.0..35.0f64, -1.0..1.0f64), 8..60);
    let beta = prop::collection::vec(-3.0..3.0f64, 4);
    (kind, rows, beta, noise).prop_map(|(kind, rows, beta, noise)| {
        let mut x = Vec::new();
        let mut y = Vec::new();
        let mut rh = Vec::new();
        let mut temp = Vec::new();
        for &(xi, hi, ti, e) in &rows {
            let row = kind.design_row(xi, Some(hi), Some(ti)).unwrap();
            let b0 = 10.0 * beta[0];
            y.push(b0 + row.iter().zip(&beta[1..]).map(|(v, b)| v * b).sum::<f64>() + noise * e);
            x.push(xi);
            rh.push(Some(hi));
            temp.push(Some(ti));
        }
        let ts = (0..rows.len() as i64).collect();
        Dataset {
            kind,
            pairs: CollocatedPairs::new(ts, x, y, rh, temp).unwrap(),
        }
    })
}

fn noisy() -> impl Strategy<Value = Dataset> {
    dataset(kind(), 0.0..50.0f64)
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Largest magnitude of each design column, intercept first.
fn column_scales(d: &Dataset) -> Vec<f64> {
    let mut scales = vec![1.0f64; d.kind.n_coefficients()];
    for i in 0..d.pairs.len() {
        let row = d.kind.design_row(d.pairs.x[i], d.pairs.rh[i], d.pairs.temp[i]).unwrap();
        for (s, v) in scales[1..].iter_mut().zip(row) {
            *s = (*s).max(v.abs());
        }
    }
    scales
}

fn residuals_sum_to_zero() -> Result<(), String> {
    check(noisy(), |d| {
        let m = calibrate::fit(d.kind, &d.pairs).unwrap();
        let pred = calibrate::predict_pairs(&m, &d.pairs).unwrap();
        let sum: f64 = d.pairs.y.iter().zip(&pred).map(|(y, p)| y - p).sum();
        let bound = 1e-9 * d.pairs.len() as f64 * max_abs(&d.pairs.y).max(1.0);
        prop_assert!(sum.abs() <= bound, "{}: Σe = {:e} > {:e}", d.kind, sum, bound);
        Ok(())
    })
}

fn scaling_y_scales_coefficients() -> Result<(), String> {
    check((noisy(), 0.01..100.0f64), |(d, a)| {
        let m = calibrate::fit(d.kind, &d.pairs).unwrap();
        let scaled = CollocatedPairs {
            y: d.pairs.y.iter().map(|y| a * y).collect(),
            ..d.pairs.clone()
        };
        let ms = calibrate::fit(d.kind, &scaled).unwrap();
        let ymax = max_abs(&scaled.y).max(1e-12);
        for ((c, cs), col) in m.coefficients.iter().zip(&ms.coefficients).zip(column_scales(&d)) {
            prop_assert!(
                close(cs.value, a * c.value, 1e-9, ymax / col),
                "{} {}: {} vs {}",
                d.kind,
                c.name,
                cs.value,
                a * c.value
            );
        }
        Ok(())
    })
}

fn shifting_x_moves_intercept() -> Result<(), String> {
    // The x·rh interaction of ADV picks up the shift too, so ADV is excluded.
    let kinds = prop::sample::select(vec![ModelKind::Ols, ModelKind::Mlh, ModelKind::Mlt, ModelKind::Mlht]);
    check((dataset(kinds, 0.0..50.0f64), -50.0..50.0f64), |(d, c)| {
        let m = calibrate::fit(d.kind, &d.pairs).unwrap();
        let shifted = CollocatedPairs {
            x: d.pairs.x.iter().map(|x| x + c).collect(),
            ..d.pairs.clone()
        };
        let ms = calibrate::fit(d.kind, &shifted).unwrap();
        let ymax = max_abs(&d.pairs.y).max(1.0);
        let scales = column_scales(&d);
        let slope = m.coefficients[1].value;
        let want = m.intercept() - slope * c;
        prop_assert!(
            close(ms.intercept(), want, 1e-8, ymax),
            "{}: {} vs {}",
            d.kind,
            ms.intercept(),
            want
        );
        for ((a, b), col) in m.coefficients.iter().zip(&ms.coefficients).zip(&scales).skip(1) {
            prop_assert!(
                close(a.value, b.value, 1e-8, ymax / col),
                "{} {}: {} vs {}",
                d.kind,
                a.name,
                a.value,
                b.value
            );
        }
        Ok(())
    })
}

fn r_squared_in_unit_interval() -> Result<(), String> {
    // Pure noise as well as structured data.
    let strategy = (noisy(), any::<bool>(), prop::collection::vec(-100.0..100.0f64, 60));
    check(strategy, |(mut d, scramble, ys)| {
        if scramble {
            d.pairs.y = ys[..d.pairs.len()].to_vec();
        }
        let m = calibrate::fit(d.kind, &d.pairs).unwrap();
        prop_assert!((0.0..=1.0).contains(&m.r_squared), "{}: R² = {}", d.kind, m.r_squared);
        Ok(())
    })
}

fn exact_data_fits_exactly() -> Result<(), String> {
    check(dataset(kind(), Just(0.0)), |d| {
        let m = calibrate::fit(d.kind, &d.pairs).unwrap();
        let ymax = max_abs(&d.pairs.y).max(1.0);
        prop_assert!(
            m.residual_sd <= 1e-10 * ymax,
            "{}: residual sd {:e}",
            d.kind,
            m.residual_sd
        );
        for (c, col) in m.coefficients.iter().zip(column_scales(&d)) {
            let hw = c.half_width.unwrap();
            prop_assert!(hw <= 1e-8 * ymax / col, "{} {}: half width {:e}", d.kind, c.name, hw);
        }
        Ok(())
    })
}

fn variance_decomposes() -> Result<(), String> {
    check(noisy(), |d| {
        let m = calibrate::fit(d.kind, &d.pairs).unwrap();
        let pred = calibrate::predict_pairs(&m, &d.pairs).unwrap();
        let n = d.pairs.len() as f64;
        let mean = d.pairs.y.iter().sum::<f64>() / n;
        let sst: f64 = d.pairs.y.iter().map(|y| (y - mean).powi(2)).sum();
        let ssr: f64 = pred.iter().map(|p| (p - mean).powi(2)).sum();
        let sse: f64 = d.pairs.y.iter().zip(&pred).map(|(y, p)| (y - p).powi(2)).sum();
        prop_assert!(
            close(sst, ssr + sse, 1e-9, 0.0),
            "{}: {} vs {} + {}",
            d.kind,
            sst,
            ssr,
            sse
        );
        prop_assert!(
            close(m.r_squared, ssr / sst, 1e-9, 1e-9),
            "{}: R² {} vs {}",
            d.kind,
            m.r_squared,
            ssr / sst
        );
        Ok(())
    })
}
