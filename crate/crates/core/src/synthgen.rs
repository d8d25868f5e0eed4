//! Seeded generator of synthetic collocated datasets: a ground-truth
//! concentration and meteorology scenario, plus imperfect sensor renderings
//! with gain/offset error, noise, hygroscopic growth and fog droplets.
//!
//! All randomness comes from a ChaCha8 stream seeded by the caller, so the
//! same inputs and seed give bit-identical output on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::timeseries::{Channel, Sample, Series, Timestamp};

const DAY: f64 = 86_400.0;
/// Relative humidity held inside fog windows, percent.
pub const FOG_RH: f64 = 97.0;
/// Ceiling applied to RH inside the growth factor, which diverges at 100 %.
pub const GROWTH_RH_CAP: f64 = 99.0;
/// Share of the pm10 droplet loading that leaks into pm25.
pub const FOG_PM25_SHARE: f64 = 0.1;

/// Mean-reverting process in log space for the base pm25 concentration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogOu<T> {
    /// Long-run mean, µg/m³.
    pub level: T,
    /// Reversion rate, 1/s.
    pub reversion: T,
    /// Log-space volatility, 1/√s.
    pub volatility: T,
}

/// Daily sinusoid `mean + amplitude · cos(2π (t − peak) / 1 day)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diurnal<T> {
    pub mean: T,
    pub amplitude: T,
    /// Seconds after UTC midnight at which the cycle peaks.
    pub peak: T,
}

impl<T: Real> Diurnal<T> {
    pub fn at(&self, ts: Timestamp) -> T {
        let secs = T::lit(ts.rem_euclid(86_400) as f64);
        let phase = T::TAU() * (secs - self.peak) / T::lit(DAY);
        self.mean + self.amplitude * phase.cos()
    }
}

/// A fog episode: `[start, end)` with droplet loading in µg/m³.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FogEvent<T> {
    pub start: Timestamp,
    pub end: Timestamp,
    pub loading: T,
}

impl<T> FogEvent<T> {
    pub fn contains(&self, ts: Timestamp) -> bool {
        self.start <= ts && ts < self.end
    }
}

/// Ground-truth scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct TruthScenario<T> {
    pub start: Timestamp,
    /// Seconds.
    pub duration: i64,
    /// Seconds.
    pub interval: i64,
    pub pm25: LogOu<T>,
    /// True pm1 = fraction × pm25, in (0, 1].
    pub pm1_fraction: T,
    /// True pm10 = ratio × pm25, at least 1.
    pub pm10_ratio: T,
    pub rh: Diurnal<T>,
    pub temp: Diurnal<T>,
    pub fog_events: Vec<FogEvent<T>>,
}

impl<T: Real> TruthScenario<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, why: &str| Err(Error::Config(format!("scenario {field}: {why}")));
        if self.interval <= 0 {
            return bad("interval", "must be positive");
        }
        if self.duration <= 0 || self.duration % self.interval != 0 {
            return bad("duration", "must be a positive multiple of the interval");
        }
        let p = &self.pm25;
        if !(p.level.is_finite() && p.level > T::zero()) {
            return bad("pm25.level", "must be positive");
        }
        if !(p.reversion.is_finite() && p.reversion > T::zero()) {
            return bad("pm25.reversion", "must be positive");
        }
        if !(p.volatility.is_finite() && p.volatility >= T::zero()) {
            return bad("pm25.volatility", "must be non-negative");
        }
        if !(self.pm1_fraction > T::zero() && self.pm1_fraction <= T::one()) {
            return bad("pm1_fraction", "must lie in (0, 1]");
        }
        if !(self.pm10_ratio.is_finite() && self.pm10_ratio >= T::one()) {
            return bad("pm10_ratio", "must be at least 1");
        }
        for (name, d) in [("rh", &self.rh), ("temp", &self.temp)] {
            if !(d.mean.is_finite() && d.amplitude.is_finite() && d.peak.is_finite()) {
                return bad(name, "profile parameters must be finite");
            }
        }
        for ev in &self.fog_events {
            if ev.start >= ev.end {
                return bad("fog", "event start must precede its end");
            }
            if !(ev.loading.is_finite() && ev.loading >= T::zero()) {
                return bad("fog", "loading must be non-negative");
            }
        }
        Ok(())
    }

    /// Grid timestamps of the scenario.
    pub fn timestamps(&self) -> impl Iterator<Item = Timestamp> + '_ {
        (0..self.duration / self.interval).map(move |k| self.start + k * self.interval)
    }

    /// Grid timestamps falling inside any fog window.
    pub fn fog_timestamps(&self) -> Vec<Timestamp> {
        self.timestamps()
            .filter(|&ts| self.fog_events.iter().any(|e| e.contains(ts)))
            .collect()
    }

    fn fog_loading(&self, ts: Timestamp) -> Option<T> {
        self.fog_events
            .iter()
            .filter(|e| e.contains(ts))
            .map(|e| e.loading)
            .reduce(|a, b| a + b)
    }
}

/// Output of [`generate_truth`].
#[derive(Clone, Debug, PartialEq)]
pub struct Truth<T> {
    /// True dry pm1/pm25/pm10, as a heated-inlet reference would report.
    pub reference: Series<T>,
    /// rh and temp.
    pub met: Series<T>,
}

fn normal<T: Real>(rng: &mut ChaCha8Rng) -> T {
    let z: f64 = StandardNormal.sample(rng);
    T::lit(z)
}

/// Generates the ground-truth reference and meteorology series.
///
/// The log-concentration is an Ornstein–Uhlenbeck process started from its
/// stationary law and shifted by half its stationary variance, so pm25 has
/// mean `level`. Fog raises rh to at least [`FOG_RH`] but leaves the
/// reference untouched.
pub fn generate_truth<T: Real>(scenario: &TruthScenario<T>, seed: u64) -> Result<Truth<T>> {
    scenario.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = &scenario.pm25;
    let two = T::lit(2.0);
    let stationary_var = p.volatility * p.volatility / (two * p.reversion);
    let decay = (-p.reversion * T::lit(scenario.interval as f64)).exp();
    let step_sd = (stationary_var * (T::one() - decay * decay)).sqrt();
    let shift = stationary_var / two;

    let mut z = stationary_var.sqrt() * normal::<T>(&mut rng);
    let mut reference = Vec::new();
    let mut met = Vec::new();
    for (k, ts) in scenario.timestamps().enumerate() {
        if k > 0 {
            z = z * decay + step_sd * normal::<T>(&mut rng);
        }
        let pm25 = p.level * (z - shift).exp();
        reference.push(
            Sample::new(ts)
                .with(Channel::Pm1, pm25 * scenario.pm1_fraction)
                .with(Channel::Pm25, pm25)
                .with(Channel::Pm10, pm25 * scenario.pm10_ratio),
        );
        let mut rh = scenario.rh.at(ts);
        if scenario.fog_loading(ts).is_some() {
            rh = rh.max(T::lit(FOG_RH));
        }
        let rh = rh.max(T::zero()).min(T::lit(100.0));
        met.push(
            Sample::new(ts)
                .with(Channel::Rh, rh)
                .with(Channel::Temp, scenario.temp.at(ts)),
        );
    }
    Ok(Truth {
        reference: Series::new("reference", scenario.interval, reference)?,
        met: Series::new("met", scenario.interval, met)?,
    })
}

/// Error model of one low-cost sensor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SensorProfile<T> {
    pub gain: T,
    /// µg/m³.
    pub offset: T,
    /// µg/m³.
    pub noise_sd: T,
    /// Percent RH above which particles grow.
    pub deliquescence_rh: T,
    pub hygro_coeff: T,
    /// Fraction of fog droplet loading counted as particles.
    pub condensation_susceptibility: T,
}

impl<T: Real> SensorProfile<T> {
    /// Unit gain, no offset, noise, growth or fog response.
    pub fn ideal() -> Self {
        SensorProfile {
            gain: T::one(),
            offset: T::zero(),
            noise_sd: T::zero(),
            deliquescence_rh: T::lit(60.0),
            hygro_coeff: T::zero(),
            condensation_susceptibility: T::zero(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fin = [
            self.gain,
            self.offset,
            self.noise_sd,
            self.deliquescence_rh,
            self.hygro_coeff,
            self.condensation_susceptibility,
        ];
        if fin.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("sensor profile values must be finite".into()));
        }
        if self.gain <= T::zero() {
            return Err(Error::Config("sensor gain must be positive".into()));
        }
        if self.noise_sd < T::zero() || self.hygro_coeff < T::zero() || self.condensation_susceptibility < T::zero() {
            return Err(Error::Config(
                "noise_sd, hygro_coeff and condensation_susceptibility must be non-negative".into(),
            ));
        }
        if !(self.deliquescence_rh > T::zero() && self.deliquescence_rh < T::lit(100.0)) {
            return Err(Error::Config("deliquescence_rh must lie in (0, 100)".into()));
        }
        Ok(())
    }

    /// Hygroscopic multiplier 1 + κ·rh/(100 − rh) above deliquescence.
    pub fn growth(&self, rh: T) -> T {
        if rh < self.deliquescence_rh {
            return T::one();
        }
        let rh = rh.min(T::lit(GROWTH_RH_CAP));
        T::one() + self.hygro_coeff * rh / (T::lit(100.0) - rh)
    }
}

/// Output of [`simulate_sensor`].
#[derive(Clone, Debug, PartialEq)]
pub struct SensorRendering<T> {
    /// pm1/pm25/pm10 readings, with rh and temp copied from the met series.
    pub series: Series<T>,
    /// Timestamps that received fog droplet injection.
    pub fog_labels: Vec<Timestamp>,
}

/// Renders what a sensor with `profile` would report for `truth`.
///
/// Per channel: a dry reading `gain·true + offset + N(0, noise_sd)` clamped
/// at zero, multiplied by the growth factor, then inside fog windows the
/// droplet loading × susceptibility is added to pm10 and a tenth of it to
/// pm25. pm25 and pm10 are finally raised to the channel below them so the
/// size ordering holds.
pub fn simulate_sensor<T: Real>(
    truth: &Series<T>,
    met: &Series<T>,
    profile: &SensorProfile<T>,
    fog: &[FogEvent<T>],
    seed: u64,
) -> Result<SensorRendering<T>> {
    profile.validate()?;
    if !truth.shares_grid(met) {
        return Err(Error::GridMismatch(
            "truth and met series are on different grids".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(truth.len());
    let mut labels = Vec::new();
    for s in truth.samples() {
        let m = met.at(s.timestamp).filter(|m| m.valid);
        let rh = m.and_then(|m| m.rh);
        let growth = rh.map_or(T::one(), |rh| profile.growth(rh));
        let droplets = fog
            .iter()
            .filter(|e| e.contains(s.timestamp))
            .map(|e| e.loading * profile.condensation_susceptibility)
            .fold(T::zero(), |a, b| a + b);

        let mut out = Sample::new(s.timestamp);
        let mut floor = T::zero();
        for ch in [Channel::Pm1, Channel::Pm25, Channel::Pm10] {
            let noise = profile.noise_sd * normal::<T>(&mut rng);
            let Some(v) = s.get(ch) else { continue };
            let dry = (profile.gain * v + profile.offset + noise).max(T::zero());
            let mut wet = dry * growth;
            match ch {
                Channel::Pm10 => wet = wet + droplets,
                Channel::Pm25 => wet = wet + droplets * T::lit(FOG_PM25_SHARE),
                _ => {}
            }
            let reading = wet.max(floor);
            floor = reading;
            out.set(ch, Some(reading));
        }
        if droplets > T::zero() {
            labels.push(s.timestamp);
        }
        if let Some(m) = m {
            out.rh = m.rh;
            out.temp = m.temp;
        }
        samples.push(out.validated());
    }
    Ok(SensorRendering {
        series: Series::new(truth.device_id(), truth.interval(), samples)?,
        fog_labels: labels,
    })
}
