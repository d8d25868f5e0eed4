//! Shared generators.

use pmcal::timeseries::Sample as GSample;
use pmcal::{Channel, Sample, Series};
use proptest::prelude::*;

/// Grid origin divisible by every interval used below.
pub const BASE: i64 = 1_599_999_960;
pub const INTERVALS: [i64; 3] = [1, 5, 60];

/// Channel values for one grid slot, before a timestamp is attached.
#[derive(Clone, Debug)]
pub struct Row {
    /// pm1, and the increments to pm25 and pm10.
    pub pm: (f64, f64, f64),
    pub present: [bool; 3],
    pub temp: Option<f64>,
    pub rh: Option<f64>,
    pub adc: Option<f64>,
    /// Push rh out of range so the sample is invalid.
    pub breach: bool,
}

impl Row {
    pub fn sample(&self, ts: i64) -> Sample {
        let (a, b, c) = self.pm;
        let mut s: Sample = GSample::new(ts);
        for (i, (ch, v)) in [(Channel::Pm1, a), (Channel::Pm25, a + b), (Channel::Pm10, a + b + c)]
            .into_iter()
            .enumerate()
        {
            if self.present[i] {
                s.set(ch, Some(v));
            }
        }
        s.temp = self.temp;
        s.rh = if self.breach { Some(150.0) } else { self.rh };
        s.adc = self.adc;
        s.validated()
    }
}

pub fn row(valid_only: bool) -> impl Strategy<Value = Row> {
    (
        (0.0..80.0f64, 0.0..80.0f64, 0.0..80.0f64),
        prop::array::uniform3(prop::bool::weighted(0.85)),
        prop::option::weighted(0.8, -20.0..40.0f64),
        prop::option::weighted(0.8, 0.0..=100.0f64),
        prop::option::weighted(0.2, 0.0..5000.0f64),
        prop::bool::weighted(if valid_only { 0.0 } else { 0.15 }),
    )
        .prop_map(|(pm, present, temp, rh, adc, breach)| Row {
            pm,
            present,
            temp,
            rh,
            adc,
            breach,
        })
}

/// Rows placed on a grid with gaps of 1 to 3 slots.
pub fn series_from(id: &str, interval: i64, t0: i64, rows: &[(i64, Row)]) -> Series {
    let mut t = t0;
    let samples = rows
        .iter()
        .map(|(gap, r)| {
            t += gap * interval;
            r.sample(t)
        })
        .collect();
    Series::new(id, interval, samples).expect("generated series is well formed")
}

/// `(interval, first grid instant)`.
pub fn grid() -> impl Strategy<Value = (i64, i64)> {
    (prop::sample::select(INTERVALS.to_vec()), 0i64..60).prop_map(|(i, phase)| (i, BASE + phase % i))
}

pub fn rows(valid_only: bool, max_len: usize) -> impl Strategy<Value = Vec<(i64, Row)>> {
    prop::collection::vec((1i64..4, row(valid_only)), 0..max_len)
}

pub fn series(valid_only: bool, max_len: usize) -> impl Strategy<Value = Series> {
    (grid(), rows(valid_only, max_len)).prop_map(|((interval, t0), rows)| series_from("gen", interval, t0, &rows))
}
