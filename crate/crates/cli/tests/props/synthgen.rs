use std::collections::BTreeSet;

use pmcal::synthgen::{self, Diurnal, LogOu};
use pmcal::{FogEvent, SensorProfile, TruthScenario};
use proptest::prelude::*;

use super::gen::BASE;
use super::{check, Property};

pub const PROPERTIES: &[(&str, Property)] = &[
    ("deterministic_per_seed", deterministic_per_seed),
    ("growth_monotone_in_kappa", growth_monotone_in_kappa),
    ("channels_ordered", channels_ordered),
    ("labels_are_fog_slots", labels_are_fog_slots),
];

const INTERVAL: i64 = 60;

fn scenario() -> impl Strategy<Value = TruthScenario> {
    let fog = (0i64..200, 1i64..60, prop::option::weighted(0.8, 1.0..200.0f64)).prop_map(|(a, len, load)| FogEvent {
        start: BASE + a * INTERVAL - 17,
        end: BASE + (a + len) * INTERVAL,
        loading: load.unwrap_or(0.0),
    });
    (
        10i64..200,
        (1.0..100.0f64, 1e-4..1e-2f64, 0.0..0.05f64),
        (0.3..1.0f64, 1.0..3.0f64),
        (20.0..90.0f64, 0.0..30.0f64, 0.0..86_400.0f64),
        prop::collection::vec(fog, 0..4),
    )
        .prop_map(
            |(steps, (level, reversion, volatility), (f1, r10), (rh, amp, peak), fog_events)| TruthScenario {
                start: BASE,
                duration: steps * INTERVAL,
                interval: INTERVAL,
                pm25: LogOu {
                    level,
                    reversion,
                    volatility,
                },
                pm1_fraction: f1,
                pm10_ratio: r10,
                rh: Diurnal {
                    mean: rh,
                    amplitude: amp,
                    peak,
                },
                temp: Diurnal {
                    mean: 15.0,
                    amplitude: 5.0,
                    peak: 50_000.0,
                },
                fog_events,
            },
        )
}

fn profile() -> impl Strategy<Value = SensorProfile> {
    (
        (0.3..3.0f64, -5.0..5.0f64, 0.0..5.0f64),
        (30.0..95.0f64, 0.0..0.5f64, prop::option::weighted(0.7, 0.0..2.0f64)),
    )
        .prop_map(
            |((gain, offset, noise_sd), (deliquescence_rh, hygro_coeff, s))| SensorProfile {
                gain,
                offset,
                noise_sd,
                deliquescence_rh,
                hygro_coeff,
                condensation_susceptibility: s.unwrap_or(0.0),
            },
        )
}

fn deterministic_per_seed() -> Result<(), String> {
    check(
        (scenario(), profile(), any::<u64>(), any::<u64>()),
        |(sc, p, s1, s2)| {
            let a = synthgen::generate_truth(&sc, s1).unwrap();
            let b = synthgen::generate_truth(&sc, s1).unwrap();
            prop_assert_eq!(&a, &b);
            let ra = synthgen::simulate_sensor(&a.reference, &a.met, &p, &sc.fog_events, s2).unwrap();
            let rb = synthgen::simulate_sensor(&b.reference, &b.met, &p, &sc.fog_events, s2).unwrap();
            prop_assert_eq!(ra, rb);
            Ok(())
        },
    )
}

fn growth_monotone_in_kappa() -> Result<(), String> {
    check(
        (scenario(), profile(), 0.0..0.5f64, any::<u64>()),
        |(sc, p, dk, seed)| {
            let t = synthgen::generate_truth(&sc, seed).unwrap();
            let more = SensorProfile {
                hygro_coeff: p.hygro_coeff + dk,
                ..p
            };
            let lo = synthgen::simulate_sensor(&t.reference, &t.met, &p, &sc.fog_events, seed ^ 1).unwrap();
            let hi = synthgen::simulate_sensor(&t.reference, &t.met, &more, &sc.fog_events, seed ^ 1).unwrap();
            for (a, b) in lo.series.samples().iter().zip(hi.series.samples()) {
                if a.rh.unwrap() < p.deliquescence_rh {
                    continue;
                }
                for (x, y) in [(a.pm1, b.pm1), (a.pm25, b.pm25), (a.pm10, b.pm10)] {
                    prop_assert!(y.unwrap() >= x.unwrap(), "{:?} < {:?} at {}", y, x, a.timestamp);
                }
            }
            Ok(())
        },
    )
}

fn channels_ordered() -> Result<(), String> {
    check((scenario(), profile(), any::<u64>()), |(sc, p, seed)| {
        let t = synthgen::generate_truth(&sc, seed).unwrap();
        let r = synthgen::simulate_sensor(&t.reference, &t.met, &p, &sc.fog_events, seed).unwrap();
        for s in t.reference.samples().iter().chain(r.series.samples()) {
            let (a, b, c) = (s.pm1.unwrap(), s.pm25.unwrap(), s.pm10.unwrap());
            prop_assert!(s.valid && a <= b && b <= c, "{} {} {} at {}", a, b, c, s.timestamp);
        }
        Ok(())
    })
}

fn labels_are_fog_slots() -> Result<(), String> {
    check((scenario(), profile(), any::<u64>()), |(sc, p, seed)| {
        let grid: Vec<i64> = (0..sc.duration / sc.interval)
            .map(|k| sc.start + k * sc.interval)
            .collect();
        let windows: BTreeSet<i64> = grid
            .iter()
            .copied()
            .filter(|&t| sc.fog_events.iter().any(|e| e.start <= t && t < e.end))
            .collect();
        prop_assert_eq!(sc.fog_timestamps(), windows.iter().copied().collect::<Vec<_>>());

        let loaded: Vec<i64> = grid
            .iter()
            .copied()
            .filter(|&t| {
                sc.fog_events
                    .iter()
                    .any(|e| e.start <= t && t < e.end && e.loading * p.condensation_susceptibility > 0.0)
            })
            .collect();
        let t = synthgen::generate_truth(&sc, seed).unwrap();
        let r = synthgen::simulate_sensor(&t.reference, &t.met, &p, &sc.fog_events, seed).unwrap();
        prop_assert_eq!(r.fog_labels, loaded);
        Ok(())
    })
}
