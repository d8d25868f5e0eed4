use pmcal::statcore::{chi2_quantile, pearson_r, sample_stats, t_quantile};
use proptest::prelude::*;

use super::{check, close, Property};

pub const PROPERTIES: &[(&str, Property)] = &[
    ("t_tends_to_normal", t_tends_to_normal),
    ("chi2_quantile_increasing", chi2_quantile_increasing),
    ("pearson_affine_invariance", pearson_affine_invariance),
    ("sd_translation_and_scale", sd_translation_and_scale),
];

/// Standard-normal quantiles, to 16 digits.
const NORMAL: [(f64, f64); 5] = [
    (0.9, 1.2815515655446004),
    (0.95, 1.6448536269514722),
    (0.975, 1.959963984540054),
    (0.99, 2.3263478740408408),
    (0.995, 2.5758293035489004),
];

fn t_tends_to_normal() -> Result<(), String> {
    check((prop::sample::select(NORMAL.to_vec()), 1e6..1e9f64), |((p, z), df)| {
        let t = t_quantile(p, df).unwrap();
        prop_assert!((t - z).abs() < 1e-3, "t({}, {}) = {} vs {}", p, df, t, z);
        let lower = t_quantile(1.0 - p, df).unwrap();
        prop_assert!((lower + z).abs() < 1e-3);
        Ok(())
    })
}

fn chi2_quantile_increasing() -> Result<(), String> {
    check((0.001..0.998f64, 1e-4..0.5f64, 1.0..2000.0f64), |(p, step, df)| {
        let q = p + step * (0.999 - p);
        prop_assume!(q > p);
        let (a, b) = (chi2_quantile(p, df).unwrap(), chi2_quantile(q, df).unwrap());
        prop_assert!(a < b, "df {}: q({}) = {} !< q({}) = {}", df, p, a, q, b);
        Ok(())
    })
}

fn xy() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (3usize..60)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(-100.0..100.0f64, n),
                prop::collection::vec(-100.0..100.0f64, n),
            )
        })
        .prop_filter("non-degenerate spread", |(x, y)| spread(x) > 1e-3 && spread(y) > 1e-3)
}

fn spread(v: &[f64]) -> f64 {
    let (lo, hi) = v
        .iter()
        .fold((f64::MAX, f64::MIN), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    hi - lo
}

fn pearson_affine_invariance() -> Result<(), String> {
    let strategy = (xy(), 0.01..100.0f64, -1e3..1e3f64, any::<bool>(), any::<bool>());
    check(strategy, |((x, y), a, b, negate, on_y)| {
        let r = pearson_r(&x, &y).unwrap();
        let a = if negate { -a } else { a };
        let t: Vec<f64> = (if on_y { &y } else { &x }).iter().map(|v| a * v + b).collect();
        let r2 = if on_y { pearson_r(&x, &t) } else { pearson_r(&t, &y) }.unwrap();
        let want = if negate { -r } else { r };
        prop_assert!((r2 - want).abs() < 1e-9, "{} vs {}", r2, want);
        Ok(())
    })
}

fn sd_translation_and_scale() -> Result<(), String> {
    let strategy = (xy(), -100.0..100.0f64, -1e3..1e3f64);
    check(strategy, |((x, _), a, b)| {
        prop_assume!(a.abs() > 1e-3);
        let sd = sample_stats(&x).unwrap().sd.unwrap();
        let shifted: Vec<f64> = x.iter().map(|v| v + b).collect();
        let mapped: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let sd_shift = sample_stats(&shifted).unwrap().sd.unwrap();
        let sd_map = sample_stats(&mapped).unwrap().sd.unwrap();
        prop_assert!(close(sd_shift, sd, 1e-9, 0.0), "{} vs {}", sd_shift, sd);
        prop_assert!(close(sd_map, a.abs() * sd, 1e-9, 0.0), "{} vs {}", sd_map, a.abs() * sd);
        Ok(())
    })
}
