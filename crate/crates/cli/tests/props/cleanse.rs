use pmcal::cleanse::{self, Verdict};
use pmcal::timeseries::Sample as GSample;
use pmcal::{Channel, CleanseConfig, RatioWindowState, Sample, Series};
use proptest::prelude::*;

use super::gen::BASE;
use super::{check, Property};

pub const PROPERTIES: &[(&str, Property)] = &[
    ("window_length_constant", window_length_constant),
    ("reject_leaves_window", reject_leaves_window),
    (
        "low_concentration_ignores_rh_and_window",
        low_concentration_ignores_rh_and_window,
    ),
    ("h_low_100_is_identity", h_low_100_is_identity),
];

/// `(pm1, pm25, pm10, rh)`, with occasional droplet-like pm10 spikes.
type Step = (f64, f64, f64, Option<f64>);

fn step() -> impl Strategy<Value = Step> {
    (
        0.0..80.0f64,
        0.0..40.0f64,
        prop_oneof![4 => 0.0..60.0f64, 1 => 100.0..2000.0f64],
        prop::option::weighted(0.9, 0.0..=100.0f64),
    )
        .prop_map(|(a, b, c, rh)| (a, a + b, a + b + c, rh))
}

fn config() -> impl Strategy<Value = CleanseConfig> {
    (0.0..4.0f64, 0.0..40.0f64, 50.0..=100.0f64, 3usize..40).prop_map(|(beta, c_low, h_low, window_size)| {
        CleanseConfig {
            beta,
            c_low,
            h_low,
            window_size,
        }
    })
}

fn window(size: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1.0..6.0f64, size)
}

fn setup() -> impl Strategy<Value = (CleanseConfig, Vec<f64>, Vec<Step>)> {
    config().prop_flat_map(|c| (Just(c), window(c.window_size), prop::collection::vec(step(), 1..120)))
}

fn window_length_constant() -> Result<(), String> {
    check(setup(), |(cfg, init, steps)| {
        let mut state = RatioWindowState::from_ratios(init, &cfg).unwrap();
        for (o, c, e, rh) in steps {
            state.step(o, c, e, rh, &cfg);
            prop_assert_eq!(state.len(), cfg.window_size);
        }
        Ok(())
    })
}

fn reject_leaves_window() -> Result<(), String> {
    check(setup(), |(cfg, init, steps)| {
        let mut state = RatioWindowState::from_ratios(init, &cfg).unwrap();
        for (o, c, e, rh) in steps {
            let before = state.clone();
            let d = state.step(o, c, e, rh, &cfg);
            if d.verdict == Verdict::Reject {
                prop_assert_eq!(&state, &before);
            }
            let (replayed, d2) = cleanse::cleanse_step(&before, (o, c, e), rh, &cfg);
            prop_assert_eq!(&replayed, &state);
            prop_assert_eq!(d2, d);
        }
        Ok(())
    })
}

fn low_concentration_ignores_rh_and_window() -> Result<(), String> {
    let strategy = config().prop_flat_map(|c| {
        (
            Just(c),
            window(c.window_size),
            window(c.window_size),
            step(),
            prop::option::of(0.0..=100.0f64),
            prop::option::of(0.0..=100.0f64),
        )
    });
    check(strategy, |(cfg, w1, w2, (o, c, e, _), rh1, rh2)| {
        prop_assume!(cfg.c_low > 0.0);
        // Squeeze the channels below c_low while keeping their order.
        let k = 0.999 * cfg.c_low / c.max(1e-9);
        let (o, c, e) = if c < cfg.c_low {
            (o, c, e)
        } else {
            (o * k, c * k, e * k)
        };
        prop_assume!(c < cfg.c_low);
        let s1 = RatioWindowState::from_ratios(w1, &cfg).unwrap();
        let s2 = RatioWindowState::from_ratios(w2, &cfg).unwrap();
        let (n1, d1) = cleanse::cleanse_step(&s1, (o, c, e), rh1, &cfg);
        let (n2, d2) = cleanse::cleanse_step(&s2, (o, c, e), rh2, &cfg);
        prop_assert_eq!(d1.verdict, Verdict::AcceptNoUpdate);
        prop_assert_eq!((d1.verdict, d1.ratio, d1.note), (d2.verdict, d2.ratio, d2.note));
        prop_assert_eq!(n1, s1);
        prop_assert_eq!(n2, s2);
        Ok(())
    })
}

fn h_low_100_is_identity() -> Result<(), String> {
    // rh stays below 100: with the strict comparison, rh = 100 exactly is
    // not on the humidity branch.
    let strategy = config().prop_flat_map(|c| {
        let rows = prop::collection::vec((step(), prop::option::weighted(0.9, 0.0..100.0f64), 1i64..3), 1..150);
        (Just(c), window(c.window_size), rows)
    });
    check(strategy, |(cfg, init, rows)| {
        let cfg = CleanseConfig { h_low: 100.0, ..cfg };
        let mut t = BASE;
        let mut samples: Vec<Sample> = Vec::new();
        for ((o, c, e, _), rh, gap) in rows {
            t += 60 * gap;
            let mut s: Sample = GSample::new(t)
                .with(Channel::Pm1, o)
                .with(Channel::Pm25, c)
                .with(Channel::Pm10, e);
            s.rh = rh;
            samples.push(s.validated());
        }
        let series = Series::new("dev", 60, samples).unwrap();
        let init = RatioWindowState::from_ratios(init, &cfg).unwrap();
        let out = cleanse::cleanse_series(&series, &series, &cfg, init).unwrap();
        prop_assert!(out.rejected.is_empty());
        prop_assert_eq!(out.cleansed, series);
        Ok(())
    })
}
