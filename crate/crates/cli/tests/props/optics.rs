use num_complex::Complex64;
use pmcal::optics::{self, mie_intensity, mie_intensity_with_terms, series_terms};
use pmcal::{AerosolAssumptions, BinCounts, OpticalGeometry, SizeDistribution};
use proptest::prelude::*;

use super::{check, close, Property};

pub const PROPERTIES: &[(&str, Property)] = &[
    ("mie_truncation_converged", mie_truncation_converged),
    ("mie_rayleigh_limit", mie_rayleigh_limit),
    ("opc_additive_in_counts", opc_additive_in_counts),
    ("opc_homogeneous_in_density", opc_homogeneous_in_density),
    ("pnm_bin_permutation_invariant", pnm_bin_permutation_invariant),
];

fn index() -> impl Strategy<Value = Complex64> {
    (1.2..1.8f64, prop::option::weighted(0.5, 0.0..0.1f64)).prop_map(|(re, im)| Complex64::new(re, im.unwrap_or(0.0)))
}

fn mie_truncation_converged() -> Result<(), String> {
    let strategy = (
        prop::sample::select(vec![1.0, 10.0]),
        index(),
        0.0..=180.0f64,
        1usize..40,
    );
    check(strategy, |(x, m, angle, extra)| {
        let n = series_terms(x);
        let (a1, a2) = mie_intensity_with_terms(x, m, angle, n).unwrap();
        let (b1, b2) = mie_intensity_with_terms(x, m, angle, n + extra).unwrap();
        prop_assert!(close(a1, b1, 1e-9, 0.0), "i1 {} vs {}", a1, b1);
        prop_assert!(close(a2, b2, 1e-9, 0.0), "i2 {} vs {}", a2, b2);
        Ok(())
    })
}

fn mie_rayleigh_limit() -> Result<(), String> {
    check((1e-4..=0.01f64, index(), 0.0..=180.0f64), |(x, m, angle)| {
        let (i1, i2) = mie_intensity(x, m, angle).unwrap();
        let m2 = m * m;
        let k = ((m2 - 1.0) / (m2 + 2.0)).norm_sqr();
        let c = angle.to_radians().cos();
        let r1 = x.powi(6) * k;
        prop_assert!(close(i1, r1, 1e-2, 0.0), "i1 {} vs {}", i1, r1);
        // The parallel component vanishes at 90°, so it is held to 1 % of
        // the perpendicular one.
        prop_assert!((i2 - r1 * c * c).abs() <= 1e-2 * r1, "i2 {} vs {}", i2, r1 * c * c);
        Ok(())
    })
}

fn bins() -> impl Strategy<Value = (Vec<f64>, Vec<u64>, Vec<u64>)> {
    (1usize..12).prop_flat_map(|n| {
        (
            prop::collection::btree_set(1u32..2000, n).prop_map(|s| s.into_iter().map(|d| d as f64 / 100.0).collect()),
            prop::collection::vec(0u64..1_000_000, n),
            prop::collection::vec(0u64..1_000_000, n),
        )
    })
}

fn assumptions(density: f64, cut: f64) -> AerosolAssumptions {
    AerosolAssumptions {
        density,
        ..AerosolAssumptions::typical(SizeDistribution::monodisperse(1.0).unwrap(), cut)
    }
}

fn counts(mid: &[f64], counts: Vec<u64>, flow: f64, duration: f64) -> BinCounts {
    BinCounts {
        bin_midpoints: mid.to_vec(),
        counts,
        flow_rate: flow,
        duration,
    }
}

fn opc_additive_in_counts() -> Result<(), String> {
    let strategy = (bins(), 0.5..3.0f64, 0.5..20.0f64, 0.1..10.0f64, 1.0..600.0f64);
    check(strategy, |((mid, a, b), rho, cut, flow, secs)| {
        let asm = assumptions(rho, cut);
        let sum: Vec<u64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let ma = optics::opc_mass_concentration(&counts(&mid, a, flow, secs), &asm).unwrap();
        let mb = optics::opc_mass_concentration(&counts(&mid, b, flow, secs), &asm).unwrap();
        let mab = optics::opc_mass_concentration(&counts(&mid, sum, flow, secs), &asm).unwrap();
        prop_assert!(close(mab, ma + mb, 1e-12, 1e-300), "{} vs {}", mab, ma + mb);
        Ok(())
    })
}

fn opc_homogeneous_in_density() -> Result<(), String> {
    let strategy = (bins(), 0.5..3.0f64, 0.01..100.0f64, 0.5..20.0f64);
    check(strategy, |((mid, a, _), rho, k, cut)| {
        let c = counts(&mid, a, 1.0, 60.0);
        let m1 = optics::opc_mass_concentration(&c, &assumptions(rho, cut)).unwrap();
        let mk = optics::opc_mass_concentration(&c, &assumptions(k * rho, cut)).unwrap();
        prop_assert!(close(mk, k * m1, 1e-12, 1e-300), "{} vs {}", mk, k * m1);
        Ok(())
    })
}

fn distribution() -> impl Strategy<Value = Vec<(f64, f64)>> {
    (1usize..7).prop_flat_map(|n| {
        (
            prop::collection::btree_set(10u32..250, n),
            prop::collection::vec(0.01..1.0f64, n),
        )
            .prop_map(|(ds, ws)| {
                let total: f64 = ws.iter().sum();
                ds.into_iter()
                    .map(|d| d as f64 / 100.0)
                    .zip(ws.into_iter().map(|w| w / total))
                    .collect()
            })
    })
}

fn pnm_bin_permutation_invariant() -> Result<(), String> {
    let strategy =
        distribution().prop_flat_map(|d| (Just(d.clone()), Just(d).prop_shuffle(), 0.4..0.9f64, 10.0..170.0f64));
    check(strategy, |(sorted, shuffled, wavelength, angle)| {
        let geometry = OpticalGeometry {
            wavelength,
            observation_angle: angle,
            calibration_constant: 1.0,
        };
        let s = |bins: Vec<(f64, f64)>| {
            let asm = AerosolAssumptions::typical(SizeDistribution::new(bins).unwrap(), 2.5);
            optics::pnm_sensitivity(&asm, &geometry).unwrap()
        };
        prop_assert_eq!(s(sorted).to_bits(), s(shuffled).to_bits());
        Ok(())
    })
}
