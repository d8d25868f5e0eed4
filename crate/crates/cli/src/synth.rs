//! Synthetic dataset generation from a scenario file.
//!
//! Scenario keys:
//!
//! ```text
//! scenario.start = 2021-03-01T00:00:00Z
//! scenario.days = 21                # or scenario.duration in seconds
//! scenario.interval = 60
//! scenario.pm1_fraction = 0.7
//! scenario.pm10_ratio = 1.5
//! pm25.level = 45
//! pm25.reversion = 0.0017
//! pm25.volatility = 0.015
//! rh.mean = 60
//! rh.amplitude = 15
//! rh.peak_hour = 5
//! temp.mean = 15
//! temp.amplitude = 5
//! temp.peak_hour = 14
//! fog.<name>.start / .end / .loading
//! sensor.<id>.gain / .offset / .noise_sd / .deliquescence_rh / .hygro_coeff / .condensation_susceptibility
//! ```

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pmcal::io::{self, parse_timestamp};
use pmcal::synthgen::{self, Diurnal, LogOu};
use pmcal::{FogEvent, SensorProfile, TruthScenario};

use crate::artifacts::Artifacts;
use crate::config::Config;
use crate::error::{CliError, CliResult};

const RESERVED: [&str; 3] = ["reference", "met", "fog_labels"];

#[derive(Clone, Debug, PartialEq)]
pub struct SynthSpec {
    pub scenario: TruthScenario,
    /// Sensors sorted by id.
    pub sensors: Vec<(String, SensorProfile)>,
}

fn timestamp(config: &Config, key: &str) -> CliResult<Option<i64>> {
    config
        .raw(key)
        .map(|v| {
            parse_timestamp(v)
                .ok_or_else(|| CliError::Config(format!("{key}: '{v}' is not a YYYY-MM-DDTHH:MM:SSZ timestamp")))
        })
        .transpose()
}

fn diurnal(config: &Config, name: &str, mean: f64, amplitude: f64, peak_hour: f64) -> CliResult<Diurnal<f64>> {
    Ok(Diurnal {
        mean: config.get_or(&format!("{name}.mean"), mean)?,
        amplitude: config.get_or(&format!("{name}.amplitude"), amplitude)?,
        peak: 3600.0 * config.get_or(&format!("{name}.peak_hour"), peak_hour)?,
    })
}

impl SynthSpec {
    pub fn from_config(config: &Config) -> CliResult<Self> {
        let start = timestamp(config, "scenario.start")?.unwrap_or(1_614_556_800);
        let interval: i64 = config.get_or("scenario.interval", 60)?;
        let duration = match (
            config.get::<i64>("scenario.days")?,
            config.get::<i64>("scenario.duration")?,
        ) {
            (Some(d), None) => d * 86_400,
            (None, Some(s)) => s,
            (Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "set only one of scenario.days and scenario.duration".into(),
                ))
            }
            (None, None) => return Err(CliError::Config("missing required key 'scenario.days'".into())),
        };

        let mut fog_events = Vec::new();
        for name in config.sections("fog") {
            let key = |f: &str| format!("fog.{name}.{f}");
            let need = |f: &str| {
                timestamp(config, &key(f))?
                    .ok_or_else(|| CliError::Config(format!("missing required key '{}'", key(f))))
            };
            fog_events.push(FogEvent {
                start: need("start")?,
                end: need("end")?,
                loading: config.require(&key("loading"))?,
            });
        }

        let scenario = TruthScenario {
            start,
            duration,
            interval,
            pm25: LogOu {
                level: config.require("pm25.level")?,
                reversion: config.require("pm25.reversion")?,
                volatility: config.require("pm25.volatility")?,
            },
            pm1_fraction: config.get_or("scenario.pm1_fraction", 0.7)?,
            pm10_ratio: config.get_or("scenario.pm10_ratio", 1.5)?,
            rh: diurnal(config, "rh", 60.0, 15.0, 5.0)?,
            temp: diurnal(config, "temp", 15.0, 5.0, 14.0)?,
            fog_events,
        };
        scenario.validate()?;

        let mut sensors = Vec::new();
        for id in config.sections("sensor") {
            if RESERVED.contains(&id.as_str()) || !id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
            {
                return Err(CliError::Config(format!(
                    "sensor id '{id}' is reserved or not a plain file name"
                )));
            }
            let d = SensorProfile::ideal();
            let key = |f: &str| format!("sensor.{id}.{f}");
            let profile = SensorProfile {
                gain: config.get_or(&key("gain"), d.gain)?,
                offset: config.get_or(&key("offset"), d.offset)?,
                noise_sd: config.get_or(&key("noise_sd"), d.noise_sd)?,
                deliquescence_rh: config.get_or(&key("deliquescence_rh"), d.deliquescence_rh)?,
                hygro_coeff: config.get_or(&key("hygro_coeff"), d.hygro_coeff)?,
                condensation_susceptibility: config
                    .get_or(&key("condensation_susceptibility"), d.condensation_susceptibility)?,
            };
            profile
                .validate()
                .map_err(|e| CliError::Config(format!("sensor '{id}': {e}")))?;
            sensors.push((id, profile));
        }
        config.ensure_consumed()?;
        Ok(SynthSpec { scenario, sensors })
    }
}

/// Renders the dataset: `reference.csv`, `met.csv`, one `<id>.csv` per
/// sensor and `fog_labels.csv`. The truth and every sensor draw from their
/// own stream, each seeded from a ChaCha8 generator keyed by `seed`.
pub fn synth(spec: &SynthSpec, seed: u64) -> CliResult<Artifacts> {
    let mut seeds = ChaCha8Rng::seed_from_u64(seed);
    let truth = synthgen::generate_truth(&spec.scenario, seeds.next_u64())?;
    let mut out = Artifacts::new();
    out.add("reference.csv", io::series_to_csv(&truth.reference));
    out.add("met.csv", io::series_to_csv(&truth.met));
    for (id, profile) in &spec.sensors {
        let r = synthgen::simulate_sensor(
            &truth.reference,
            &truth.met,
            profile,
            &spec.scenario.fog_events,
            seeds.next_u64(),
        )?;
        out.add(
            format!("{id}.csv"),
            io::series_to_csv(&r.series.with_device_id(id.clone())),
        );
    }
    out.add("fog_labels.csv", io::labels_to_csv(&spec.scenario.fog_timestamps()));
    Ok(out)
}
