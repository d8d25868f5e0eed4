//! Streaming PM ratio gate that removes condensation-corrupted readings.
//!
//! Fog droplets are large, so they inflate pm10 far more than pm1. The
//! cleanser keeps a FIFO of recently accepted pm10/pm1 ratios and, under
//! humid conditions at non-trivial concentrations, rejects any reading whose
//! ratio reaches `mean + β·sd` of that window.
//!
//! The comparison is strict: with a zero-variance window, a ratio equal to
//! the window mean is rejected when rh and pm25 are both high.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::timeseries::{Series, Timestamp};

/// Default ratio used to pad a window that lacks dry warm-up data.
pub const DEFAULT_FALLBACK_RATIO: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CleanseConfig<T> {
    /// Multiplier on the window sd.
    pub beta: T,
    /// pm25 below this (µg/m³) is always accepted.
    pub c_low: T,
    /// rh below this (percent) is always accepted and learned from.
    pub h_low: T,
    /// At least 3.
    pub window_size: usize,
}

impl<T: Real> Default for CleanseConfig<T> {
    fn default() -> Self {
        CleanseConfig {
            beta: T::lit(2.5),
            c_low: T::lit(20.0),
            h_low: T::lit(80.0),
            window_size: 30,
        }
    }
}

impl<T: Real> CleanseConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta.is_finite() && self.beta >= T::zero()) {
            return Err(Error::Config(format!("cleanse.beta must be >= 0, got {}", self.beta)));
        }
        if !(self.c_low.is_finite() && self.c_low >= T::zero()) {
            return Err(Error::Config(format!("cleanse.c_low must be >= 0, got {}", self.c_low)));
        }
        if !self.h_low.is_finite() {
            return Err(Error::Config("cleanse.h_low must be finite".into()));
        }
        if self.window_size < 3 {
            return Err(Error::Config(format!(
                "cleanse.window_size must be at least 3, got {}",
                self.window_size
            )));
        }
        Ok(())
    }
}

/// Moving window of accepted pm10/pm1 ratios, oldest first.
#[derive(Clone, Debug, PartialEq)]
pub struct RatioWindowState<T> {
    ratios: VecDeque<T>,
}

impl<T: Real> RatioWindowState<T> {
    /// A window holding exactly `ratios`, which must number `window_size`
    /// and be positive and finite.
    pub fn from_ratios(ratios: impl IntoIterator<Item = T>, config: &CleanseConfig<T>) -> Result<Self> {
        config.validate()?;
        let ratios: VecDeque<T> = ratios.into_iter().collect();
        if ratios.len() != config.window_size {
            return Err(Error::InvalidInput(format!(
                "window holds {} ratios, expected {}",
                ratios.len(),
                config.window_size
            )));
        }
        if ratios.iter().any(|r| !(r.is_finite() && *r > T::zero())) {
            return Err(Error::InvalidInput("window ratios must be positive and finite".into()));
        }
        Ok(RatioWindowState { ratios })
    }

    pub fn ratios(&self) -> &VecDeque<T> {
        &self.ratios
    }

    pub fn len(&self) -> usize {
        self.ratios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ratios.is_empty()
    }

    pub fn mean(&self) -> T {
        self.ratios.iter().copied().sum::<T>() / T::of_usize(self.ratios.len())
    }

    /// Sample standard deviation (n − 1 denominator).
    pub fn sd(&self) -> T {
        let mean = self.mean();
        let ss: T = self.ratios.iter().map(|&r| (r - mean) * (r - mean)).sum();
        (ss / T::of_usize(self.ratios.len() - 1)).sqrt()
    }

    /// Applies one gate step in place and returns the decision.
    pub fn step(&mut self, pm1: T, pm25: T, pm10: T, rh: Option<T>, config: &CleanseConfig<T>) -> CleanseDecision<T> {
        let (mean, sd) = (self.mean(), self.sd());
        let decision = |verdict, ratio, note| CleanseDecision {
            verdict,
            ratio,
            window_mean: mean,
            window_sd: sd,
            note,
        };
        if pm25 < config.c_low {
            return decision(Verdict::AcceptNoUpdate, None, None);
        }
        if pm1 <= T::zero() {
            return decision(Verdict::AcceptNoUpdate, None, Some(Note::RatioUndefined));
        }
        let ratio = pm10 / pm1;
        if !(ratio.is_finite() && ratio > T::zero()) {
            return decision(Verdict::AcceptNoUpdate, None, Some(Note::RatioUndefined));
        }
        let Some(rh) = rh else {
            return decision(Verdict::AcceptNoUpdate, Some(ratio), Some(Note::MissingRh));
        };
        if rh < config.h_low || ratio < mean + config.beta * sd {
            self.ratios.pop_front();
            self.ratios.push_back(ratio);
            decision(Verdict::AcceptUpdate, Some(ratio), None)
        } else {
            decision(Verdict::Reject, Some(ratio), None)
        }
    }
}

/// Fills a window from warm-up rows `(pm1, pm25, pm10, rh)`.
///
/// Rows qualify when rh < h_low, pm25 ≥ c_low and pm1 > 0. The newest
/// `window_size` qualifying ratios are kept in order, and any remaining
/// slots at the front are padded with `fallback_ratio`.
pub fn init_window<T: Real>(
    warmup: impl IntoIterator<Item = (T, T, T, T)>,
    config: &CleanseConfig<T>,
    fallback_ratio: T,
) -> Result<RatioWindowState<T>> {
    config.validate()?;
    if !(fallback_ratio.is_finite() && fallback_ratio > T::zero()) {
        return Err(Error::Config(format!(
            "fallback ratio must be positive, got {fallback_ratio}"
        )));
    }
    let w = config.window_size;
    let mut ratios: VecDeque<T> = VecDeque::with_capacity(w + 1);
    for (pm1, pm25, pm10, rh) in warmup {
        if rh < config.h_low && pm25 >= config.c_low && pm1 > T::zero() {
            let r = pm10 / pm1;
            if r.is_finite() && r > T::zero() {
                if ratios.len() == w {
                    ratios.pop_front();
                }
                ratios.push_back(r);
            }
        }
    }
    while ratios.len() < w {
        ratios.push_front(fallback_ratio);
    }
    Ok(RatioWindowState { ratios })
}

/// Warm-up rows from the first `rows` samples of `pm` that carry pm1, pm25,
/// pm10 and a matching rh in `rh_source`.
pub fn warmup_rows<T: Real>(pm: &Series<T>, rh_source: &Series<T>, rows: usize) -> Vec<(T, T, T, T)> {
    pm.samples()
        .iter()
        .take(rows)
        .filter(|s| s.valid)
        .filter_map(|s| {
            let rh = rh_source.at(s.timestamp).filter(|m| m.valid)?.rh?;
            Some((s.pm1?, s.pm25?, s.pm10?, rh))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    AcceptNoUpdate,
    AcceptUpdate,
    Reject,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::AcceptNoUpdate => "ACCEPT_NO_UPDATE",
            Verdict::AcceptUpdate => "ACCEPT_UPDATE",
            Verdict::Reject => "REJECT",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Why a row bypassed the gate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Note {
    /// pm1 is zero (or a pm channel is absent), so no ratio exists.
    RatioUndefined,
    MissingRh,
    /// The sample was already marked invalid.
    InvalidSample,
}

impl Note {
    pub fn as_str(self) -> &'static str {
        match self {
            Note::RatioUndefined => "ratio undefined",
            Note::MissingRh => "rh missing",
            Note::InvalidSample => "invalid sample",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CleanseDecision<T> {
    pub verdict: Verdict,
    /// pm10/pm1, when defined.
    pub ratio: Option<T>,
    /// Window statistics before the step.
    pub window_mean: T,
    pub window_sd: T,
    pub note: Option<Note>,
}

/// Value-style step: returns the successor state and leaves `state` as is.
pub fn cleanse_step<T: Real>(
    state: &RatioWindowState<T>,
    pm: (T, T, T),
    rh: Option<T>,
    config: &CleanseConfig<T>,
) -> (RatioWindowState<T>, CleanseDecision<T>) {
    let mut next = state.clone();
    let d = next.step(pm.0, pm.1, pm.2, rh, config);
    (next, d)
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditRow<T> {
    pub timestamp: Timestamp,
    pub decision: CleanseDecision<T>,
}

/// Output of [`cleanse_series`].
#[derive(Clone, Debug, PartialEq)]
pub struct Cleansed<T> {
    /// Input with rejected rows removed.
    pub cleansed: Series<T>,
    pub rejected: Vec<Timestamp>,
    /// One row per input sample, in order.
    pub audit: Vec<AuditRow<T>>,
    pub final_state: RatioWindowState<T>,
}

/// One forward pass of the gate over `pm_series`, taking rh from
/// `rh_source` at the same timestamps.
pub fn cleanse_series<T: Real>(
    pm_series: &Series<T>,
    rh_source: &Series<T>,
    config: &CleanseConfig<T>,
    init: RatioWindowState<T>,
) -> Result<Cleansed<T>> {
    config.validate()?;
    if init.len() != config.window_size {
        return Err(Error::InvalidInput(format!(
            "initial window holds {} ratios, expected {}",
            init.len(),
            config.window_size
        )));
    }
    if !pm_series.shares_grid(rh_source) {
        return Err(Error::GridMismatch(format!(
            "pm series '{}' and rh source '{}' are on different grids",
            pm_series.device_id(),
            rh_source.device_id()
        )));
    }
    let mut state = init;
    let mut kept = Vec::with_capacity(pm_series.len());
    let mut rejected = Vec::new();
    let mut audit = Vec::with_capacity(pm_series.len());
    for s in pm_series.samples() {
        let decision = match (s.valid, s.pm1, s.pm25, s.pm10) {
            (true, Some(o), Some(c), Some(e)) => {
                let rh = rh_source.at(s.timestamp).filter(|m| m.valid).and_then(|m| m.rh);
                state.step(o, c, e, rh, config)
            }
            (valid, ..) => CleanseDecision {
                verdict: Verdict::AcceptNoUpdate,
                ratio: None,
                window_mean: state.mean(),
                window_sd: state.sd(),
                note: Some(if valid {
                    Note::RatioUndefined
                } else {
                    Note::InvalidSample
                }),
            },
        };
        if decision.verdict == Verdict::Reject {
            rejected.push(s.timestamp);
        } else {
            kept.push(s.clone());
        }
        audit.push(AuditRow {
            timestamp: s.timestamp,
            decision,
        });
    }
    Ok(Cleansed {
        cleansed: Series::new(pm_series.device_id(), pm_series.interval(), kept)?,
        rejected,
        audit,
        final_state: state,
    })
}
