//! Regular-interval sensor time series and their preprocessing: window
//! averaging, last-valid repair, interval masking, collocated alignment,
//! fleet (unit-wise) averaging and completeness.
//!
//! Timestamps are UTC seconds. A series lives on a grid: every timestamp is
//! congruent modulo the interval, and missing grid points are gaps, never
//! zero readings.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// UTC instant in whole seconds since the Unix epoch.
pub type Timestamp = i64;

/// A measurement channel of a [`Sample`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Channel {
    Pm1,
    Pm25,
    Pm10,
    Temp,
    Rh,
    Adc,
}

impl Channel {
    pub const ALL: [Channel; 6] = [
        Channel::Pm1,
        Channel::Pm25,
        Channel::Pm10,
        Channel::Temp,
        Channel::Rh,
        Channel::Adc,
    ];

    /// Column name used in CSV files.
    pub fn name(self) -> &'static str {
        match self {
            Channel::Pm1 => "pm1",
            Channel::Pm25 => "pm25",
            Channel::Pm10 => "pm10",
            Channel::Temp => "temp",
            Channel::Rh => "rh",
            Channel::Adc => "adc",
        }
    }

    pub fn from_name(name: &str) -> Option<Channel> {
        Channel::ALL.into_iter().find(|c| c.name() == name)
    }

    fn is_concentration(self) -> bool {
        matches!(self, Channel::Pm1 | Channel::Pm25 | Channel::Pm10)
    }
}

/// Reasons a sample is marked invalid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Breach {
    NonFinite(Channel),
    Negative(Channel),
    RhOutOfRange,
    /// pm1 ≤ pm25 ≤ pm10 does not hold among the channels present.
    Ordering,
}

impl std::fmt::Display for Breach {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Breach::NonFinite(c) => write!(f, "{} is not finite", c.name()),
            Breach::Negative(c) => write!(f, "{} is negative", c.name()),
            Breach::RhOutOfRange => write!(f, "rh outside [0, 100]"),
            Breach::Ordering => write!(f, "pm1 <= pm25 <= pm10 violated"),
        }
    }
}

/// One timestamped reading. Absent channels are `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample<T> {
    pub timestamp: Timestamp,
    pub pm1: Option<T>,
    pub pm25: Option<T>,
    pub pm10: Option<T>,
    pub temp: Option<T>,
    pub rh: Option<T>,
    pub adc: Option<T>,
    pub valid: bool,
}

impl<T: Real> Sample<T> {
    /// An empty, valid sample.
    pub fn new(timestamp: Timestamp) -> Self {
        Sample {
            timestamp,
            pm1: None,
            pm25: None,
            pm10: None,
            temp: None,
            rh: None,
            adc: None,
            valid: true,
        }
    }

    pub fn with(mut self, channel: Channel, value: T) -> Self {
        self.set(channel, Some(value));
        self
    }

    pub fn get(&self, channel: Channel) -> Option<T> {
        match channel {
            Channel::Pm1 => self.pm1,
            Channel::Pm25 => self.pm25,
            Channel::Pm10 => self.pm10,
            Channel::Temp => self.temp,
            Channel::Rh => self.rh,
            Channel::Adc => self.adc,
        }
    }

    pub fn set(&mut self, channel: Channel, value: Option<T>) {
        let slot = match channel {
            Channel::Pm1 => &mut self.pm1,
            Channel::Pm25 => &mut self.pm25,
            Channel::Pm10 => &mut self.pm10,
            Channel::Temp => &mut self.temp,
            Channel::Rh => &mut self.rh,
            Channel::Adc => &mut self.adc,
        };
        *slot = value;
    }

    /// Lists every invariant the sample breaks.
    pub fn breaches(&self) -> Vec<Breach> {
        let mut out = Vec::new();
        for ch in Channel::ALL {
            if let Some(v) = self.get(ch) {
                if !v.is_finite() {
                    out.push(Breach::NonFinite(ch));
                } else if (ch.is_concentration() || ch == Channel::Adc) && v < T::zero() {
                    out.push(Breach::Negative(ch));
                }
            }
        }
        if let Some(rh) = self.rh {
            if rh.is_finite() && (rh < T::zero() || rh > T::lit(100.0)) {
                out.push(Breach::RhOutOfRange);
            }
        }
        let ordered = |lo: Option<T>, hi: Option<T>| match (lo, hi) {
            (Some(a), Some(b)) => a <= b,
            _ => true,
        };
        if !(ordered(self.pm1, self.pm25) && ordered(self.pm25, self.pm10) && ordered(self.pm1, self.pm10)) {
            out.push(Breach::Ordering);
        }
        out
    }

    /// Marks the sample invalid if it breaks any invariant. Never reorders
    /// or clamps values.
    pub fn validated(mut self) -> Self {
        if !self.breaches().is_empty() {
            self.valid = false;
        }
        self
    }

    /// Copies all channel values from `other`, keeping this timestamp.
    fn copy_channels_from(&mut self, other: &Sample<T>) {
        for ch in Channel::ALL {
            self.set(ch, other.get(ch));
        }
        self.valid = other.valid;
    }
}

/// A device's regular-interval time series.
#[derive(Clone, Debug, PartialEq)]
pub struct Series<T> {
    device_id: String,
    interval: i64,
    samples: Vec<Sample<T>>,
}

impl<T: Real> Series<T> {
    /// Builds a series, checking the grid invariants: positive interval,
    /// strictly increasing timestamps, one common phase modulo the interval.
    pub fn new(device_id: impl Into<String>, interval: i64, samples: Vec<Sample<T>>) -> Result<Self> {
        if interval <= 0 {
            return Err(Error::Config(format!("interval must be positive, got {interval}")));
        }
        if let Some(first) = samples.first() {
            let phase = first.timestamp.rem_euclid(interval);
            for pair in samples.windows(2) {
                if pair[1].timestamp <= pair[0].timestamp {
                    return Err(Error::InvalidInput(format!(
                        "timestamps not strictly increasing at {}",
                        pair[1].timestamp
                    )));
                }
            }
            if let Some(bad) = samples.iter().find(|s| s.timestamp.rem_euclid(interval) != phase) {
                return Err(Error::GridMismatch(format!(
                    "timestamp {} is off the {interval} s grid",
                    bad.timestamp
                )));
            }
        }
        Ok(Series {
            device_id: device_id.into(),
            interval,
            samples,
        })
    }

    pub fn empty(device_id: impl Into<String>, interval: i64) -> Result<Self> {
        Series::new(device_id, interval, Vec::new())
    }

    pub fn device_id(&self) -> &str {
        &self.device_id
    }

    pub fn interval(&self) -> i64 {
        self.interval
    }

    pub fn samples(&self) -> &[Sample<T>] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Sample<T>> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Grid phase (timestamp modulo interval); `None` for an empty series.
    pub fn phase(&self) -> Option<i64> {
        self.samples.first().map(|s| s.timestamp.rem_euclid(self.interval))
    }

    /// Looks up the sample at `ts`.
    pub fn at(&self, ts: Timestamp) -> Option<&Sample<T>> {
        self.samples
            .binary_search_by_key(&ts, |s| s.timestamp)
            .ok()
            .map(|i| &self.samples[i])
    }

    pub fn valid_count(&self) -> usize {
        self.samples.iter().filter(|s| s.valid).count()
    }

    /// Values of one channel over valid samples, with their timestamps.
    pub fn channel(&self, channel: Channel) -> Vec<(Timestamp, T)> {
        self.samples
            .iter()
            .filter(|s| s.valid)
            .filter_map(|s| s.get(channel).map(|v| (s.timestamp, v)))
            .collect()
    }

    pub fn has_channel(&self, channel: Channel) -> bool {
        self.samples.iter().any(|s| s.valid && s.get(channel).is_some())
    }

    /// True when `other` lies on the same interval grid (same interval and,
    /// when both are non-empty, the same phase).
    pub fn shares_grid(&self, other: &Series<T>) -> bool {
        if self.interval != other.interval {
            return false;
        }
        match (self.phase(), other.phase()) {
            (Some(a), Some(b)) => a == b,
            _ => true,
        }
    }

    pub fn with_device_id(mut self, device_id: impl Into<String>) -> Self {
        self.device_id = device_id.into();
        self
    }
}

/// Grid instants `start, start + interval, …` strictly before `end`.
pub fn schedule(start: Timestamp, end: Timestamp, interval: i64) -> Vec<Timestamp> {
    if interval <= 0 || end <= start {
        return Vec::new();
    }
    (0..).map(|k| start + k * interval).take_while(|&t| t < end).collect()
}

/// Output of [`average_interval`]: the averaged series plus, per output
/// sample, how many valid inputs contributed.
#[derive(Clone, Debug, PartialEq)]
pub struct Averaged<T> {
    pub series: Series<T>,
    pub counts: Vec<usize>,
}

/// Averages a series onto a coarser grid. Windows `[t, t + target)` are
/// anchored at epoch multiples of `target_interval` and labelled by their
/// start; each channel is the mean of the valid inputs carrying it. Windows
/// with no valid input are omitted.
pub fn average_interval<T: Real>(series: &Series<T>, target_interval: i64) -> Result<Averaged<T>> {
    if target_interval <= 0 || target_interval % series.interval != 0 {
        return Err(Error::Config(format!(
            "target interval {target_interval} s is not a positive multiple of {} s",
            series.interval
        )));
    }
    let mut windows: BTreeMap<Timestamp, Vec<&Sample<T>>> = BTreeMap::new();
    for s in series.samples.iter().filter(|s| s.valid) {
        let start = s.timestamp.div_euclid(target_interval) * target_interval;
        windows.entry(start).or_default().push(s);
    }

    let mut samples = Vec::with_capacity(windows.len());
    let mut counts = Vec::with_capacity(windows.len());
    for (start, members) in windows {
        let mut out = Sample::new(start);
        for ch in Channel::ALL {
            let vals: Vec<T> = members.iter().filter_map(|s| s.get(ch)).collect();
            if !vals.is_empty() {
                out.set(ch, Some(crate::scalar::mean(&vals)));
            }
        }
        samples.push(out.validated());
        counts.push(members.len());
    }
    Ok(Averaged {
        series: Series {
            device_id: series.device_id.clone(),
            interval: target_interval,
            samples,
        },
        counts,
    })
}

/// Output of [`repair_last_valid`].
#[derive(Clone, Debug, PartialEq)]
pub struct Repaired<T> {
    pub series: Series<T>,
    /// Invalid samples replaced by the last valid reading.
    pub repairs: usize,
    /// Leading invalid samples dropped for want of a predecessor.
    pub dropped: usize,
}

/// Replaces each invalid sample by a copy of the most recent valid sample's
/// channels, keeping its own timestamp. Leading invalid samples are dropped.
pub fn repair_last_valid<T: Real>(series: &Series<T>) -> Repaired<T> {
    let mut last_valid: Option<&Sample<T>> = None;
    let mut samples = Vec::with_capacity(series.samples.len());
    let (mut repairs, mut dropped) = (0, 0);
    for s in &series.samples {
        if s.valid {
            last_valid = Some(s);
            samples.push(s.clone());
        } else if let Some(prev) = last_valid {
            let mut fixed = s.clone();
            fixed.copy_channels_from(prev);
            samples.push(fixed);
            repairs += 1;
        } else {
            dropped += 1;
        }
    }
    Repaired {
        series: Series {
            device_id: series.device_id.clone(),
            interval: series.interval,
            samples,
        },
        repairs,
        dropped,
    }
}

/// A set of half-open `[start, end)` exclusion windows.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IntervalMask {
    windows: Vec<(Timestamp, Timestamp)>,
}

impl IntervalMask {
    /// Builds a mask; windows are sorted and overlapping or touching
    /// windows merged. Rejects any window with `start >= end`.
    pub fn new(windows: impl IntoIterator<Item = (Timestamp, Timestamp)>) -> Result<Self> {
        let mut ws: Vec<_> = windows.into_iter().collect();
        if let Some(&(s, e)) = ws.iter().find(|(s, e)| s >= e) {
            return Err(Error::InvalidInput(format!("mask window [{s}, {e}) is empty")));
        }
        ws.sort_unstable();
        let mut merged: Vec<(Timestamp, Timestamp)> = Vec::with_capacity(ws.len());
        for (s, e) in ws {
            match merged.last_mut() {
                Some(last) if s <= last.1 => last.1 = last.1.max(e),
                _ => merged.push((s, e)),
            }
        }
        Ok(IntervalMask { windows: merged })
    }

    pub fn windows(&self) -> &[(Timestamp, Timestamp)] {
        &self.windows
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    pub fn contains(&self, ts: Timestamp) -> bool {
        let idx = self.windows.partition_point(|&(s, _)| s <= ts);
        idx > 0 && ts < self.windows[idx - 1].1
    }

    pub fn union(&self, other: &IntervalMask) -> IntervalMask {
        IntervalMask::new(self.windows.iter().chain(other.windows.iter()).copied())
            .expect("normalized windows stay non-empty")
    }
}

/// Output of [`apply_mask`].
#[derive(Clone, Debug, PartialEq)]
pub struct Masked<T> {
    pub series: Series<T>,
    pub removed: usize,
}

/// Removes every sample whose timestamp falls inside a mask window.
pub fn apply_mask<T: Real>(series: &Series<T>, mask: &IntervalMask) -> Masked<T> {
    let samples: Vec<_> = series
        .samples
        .iter()
        .filter(|s| !mask.contains(s.timestamp))
        .cloned()
        .collect();
    let removed = series.samples.len() - samples.len();
    Masked {
        series: Series {
            device_id: series.device_id.clone(),
            interval: series.interval,
            samples,
        },
        removed,
    }
}

/// Time-matched candidate/reference values with optional covariates.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CollocatedPairs<T> {
    pub timestamps: Vec<Timestamp>,
    /// Candidate (sensor) values: the independent variable of calibration.
    pub x: Vec<T>,
    /// Reference values: the dependent variable of calibration.
    pub y: Vec<T>,
    pub rh: Vec<Option<T>>,
    pub temp: Vec<Option<T>>,
}

impl<T: Real> CollocatedPairs<T> {
    pub fn new(
        timestamps: Vec<Timestamp>,
        x: Vec<T>,
        y: Vec<T>,
        rh: Vec<Option<T>>,
        temp: Vec<Option<T>>,
    ) -> Result<Self> {
        let n = timestamps.len();
        if x.len() != n || y.len() != n || rh.len() != n || temp.len() != n {
            return Err(Error::InvalidInput("collocated columns differ in length".into()));
        }
        Ok(CollocatedPairs {
            timestamps,
            x,
            y,
            rh,
            temp,
        })
    }

    /// Pairs without covariates, timestamped `0, 1, 2, …`.
    pub fn from_xy(x: Vec<T>, y: Vec<T>) -> Result<Self> {
        let n = x.len();
        CollocatedPairs::new((0..n as i64).collect(), x, y, vec![None; n], vec![None; n])
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Same rows with the candidate column replaced.
    pub fn with_x(&self, x: Vec<T>) -> Result<Self> {
        CollocatedPairs::new(
            self.timestamps.clone(),
            x,
            self.y.clone(),
            self.rh.clone(),
            self.temp.clone(),
        )
    }

    /// Keeps only the rows for which `keep` returns true.
    pub fn filter(&self, mut keep: impl FnMut(usize) -> bool) -> Self {
        let idx: Vec<usize> = (0..self.len()).filter(|&i| keep(i)).collect();
        CollocatedPairs {
            timestamps: idx.iter().map(|&i| self.timestamps[i]).collect(),
            x: idx.iter().map(|&i| self.x[i]).collect(),
            y: idx.iter().map(|&i| self.y[i]).collect(),
            rh: idx.iter().map(|&i| self.rh[i]).collect(),
            temp: idx.iter().map(|&i| self.temp[i]).collect(),
        }
    }
}

/// Where the rh/temp columns of an alignment come from.
#[derive(Clone, Copy, Debug)]
pub enum CovariateSource<'a, T> {
    Reference,
    Candidate,
    External(&'a Series<T>),
}

/// Parameters of [`align_collocated`].
#[derive(Clone, Copy, Debug)]
pub struct AlignSpec<'a, T> {
    pub x_channel: Channel,
    pub y_channel: Channel,
    pub covariates: CovariateSource<'a, T>,
    pub require_rh: bool,
    pub require_temp: bool,
}

impl<T> AlignSpec<'_, T> {
    /// pm25 against pm25, covariates from the reference, none required.
    pub fn pm25() -> Self {
        AlignSpec {
            x_channel: Channel::Pm25,
            y_channel: Channel::Pm25,
            covariates: CovariateSource::Reference,
            require_rh: false,
            require_temp: false,
        }
    }
}

/// Joins candidate and reference on shared grid timestamps. A row exists
/// only where both samples are valid and carry their channel; a row is
/// dropped if a required covariate is missing in the covariate source.
pub fn align_collocated<T: Real>(
    candidate: &Series<T>,
    reference: &Series<T>,
    spec: &AlignSpec<'_, T>,
) -> Result<CollocatedPairs<T>> {
    if candidate.interval != reference.interval {
        return Err(Error::Config(format!(
            "candidate interval {} s differs from reference interval {} s",
            candidate.interval, reference.interval
        )));
    }
    if let CovariateSource::External(ext) = spec.covariates {
        if ext.interval != reference.interval {
            return Err(Error::Config(format!(
                "covariate interval {} s differs from reference interval {} s",
                ext.interval, reference.interval
            )));
        }
    }

    let mut out = CollocatedPairs::default();
    let (mut i, mut j) = (0, 0);
    let (cs, rs) = (&candidate.samples, &reference.samples);
    while i < cs.len() && j < rs.len() {
        let (c, r) = (&cs[i], &rs[j]);
        match c.timestamp.cmp(&r.timestamp) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
                if !(c.valid && r.valid) {
                    continue;
                }
                let (Some(x), Some(y)) = (c.get(spec.x_channel), r.get(spec.y_channel)) else {
                    continue;
                };
                let cov = match spec.covariates {
                    CovariateSource::Reference => Some(r),
                    CovariateSource::Candidate => Some(c),
                    CovariateSource::External(ext) => ext.at(c.timestamp).filter(|s| s.valid),
                };
                let rh = cov.and_then(|s| s.rh);
                let temp = cov.and_then(|s| s.temp);
                if (spec.require_rh && rh.is_none()) || (spec.require_temp && temp.is_none()) {
                    continue;
                }
                out.timestamps.push(c.timestamp);
                out.x.push(x);
                out.y.push(y);
                out.rh.push(rh);
                out.temp.push(temp);
            }
        }
    }
    Ok(out)
}

/// Data completeness η: percentage of scheduled instants holding a valid
/// sample.
pub fn completeness<T: Real>(series: &Series<T>, expected_schedule: &[Timestamp]) -> Result<T> {
    if expected_schedule.is_empty() {
        return Err(Error::InvalidInput("expected schedule is empty".into()));
    }
    let present = expected_schedule
        .iter()
        .filter(|&&t| series.at(t).is_some_and(|s| s.valid))
        .count();
    Ok(T::lit(100.0) * T::of_usize(present) / T::of_usize(expected_schedule.len()))
}

fn check_fleet<T: Real>(fleet: &[Series<T>]) -> Result<()> {
    let first = fleet
        .first()
        .ok_or_else(|| Error::InvalidInput("fleet is empty".into()))?;
    if let Some(bad) = fleet.iter().find(|s| !s.shares_grid(first)) {
        return Err(Error::GridMismatch(format!(
            "device {} is not on the fleet grid",
            bad.device_id
        )));
    }
    Ok(())
}

/// Valid samples of every unit, grouped by timestamp.
fn fleet_by_timestamp<T: Real>(fleet: &[Series<T>]) -> BTreeMap<Timestamp, Vec<&Sample<T>>> {
    let mut by_ts: BTreeMap<Timestamp, Vec<&Sample<T>>> = BTreeMap::new();
    for unit in fleet {
        for s in unit.samples.iter().filter(|s| s.valid) {
            by_ts.entry(s.timestamp).or_default().push(s);
        }
    }
    by_ts
}

/// Unit-wise average of a device fleet. Per timestamp, each channel is the
/// mean over units reporting a valid value; timestamps with fewer than
/// `min_units` valid units are omitted.
pub fn unitwise_average<T: Real>(fleet: &[Series<T>], min_units: usize) -> Result<Series<T>> {
    check_fleet(fleet)?;
    if min_units == 0 {
        return Err(Error::Config("min_units must be at least 1".into()));
    }
    let samples = fleet_by_timestamp(fleet)
        .into_iter()
        .filter(|(_, units)| units.len() >= min_units)
        .map(|(ts, units)| {
            let mut out = Sample::new(ts);
            for ch in Channel::ALL {
                let vals: Vec<T> = units.iter().filter_map(|s| s.get(ch)).collect();
                if !vals.is_empty() {
                    out.set(ch, Some(crate::scalar::mean(&vals)));
                }
            }
            out.validated()
        })
        .collect();
    Series::new("unitwise", fleet[0].interval, samples)
}

/// Per-timestamp sets of one channel across a fleet, keeping only sets with
/// at least `min_units` values. Input to the unit-wise precision metric.
pub fn fleet_sets<T: Real>(
    fleet: &[Series<T>],
    channel: Channel,
    min_units: usize,
) -> Result<Vec<(Timestamp, Vec<T>)>> {
    check_fleet(fleet)?;
    Ok(fleet_by_timestamp(fleet)
        .into_iter()
        .map(|(ts, units)| (ts, units.iter().filter_map(|s| s.get(channel)).collect::<Vec<T>>()))
        .filter(|(_, vals)| vals.len() >= min_units)
        .collect())
}
