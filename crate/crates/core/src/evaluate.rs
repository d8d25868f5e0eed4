//! Data-quality metric suite for a calibrated candidate against a
//! reference: relative-error bias and precision, unit-wise precision,
//! comparability regression, limit of detection and completeness.
//!
//! In [`CollocatedPairs`] the candidate is `x` and the reference is `y`.
//! The comparability regression is candidate-on-reference, the opposite
//! orientation to calibration.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::statcore::{chi2_quantile, pearson_r, sample_stats, t_quantile};
use crate::timeseries::{CollocatedPairs, Series, Timestamp};

/// Both values must reach this (µg/m³) for a relative error to count.
pub const DEFAULT_FLOOR: f64 = 3.0;
/// Bias goal, percent.
pub const BIAS_LIMIT: f64 = 10.0;
/// σ_UCL goal, percent.
pub const PRECISION_LIMIT: f64 = 10.0;
/// CV_RMS goal, percent.
pub const CV_RMS_LIMIT: f64 = 15.0;
/// Reference range (µg/m³) over which fleet CVs are taken.
pub const CV_RMS_RANGE: (f64, f64) = (3.0, 200.0);
/// Below this many relative errors the bias result carries a warning.
pub const SMALL_SAMPLE: usize = 30;

pub const NOTE_BIAS_RULE: &str = "bias passes only when the whole 90% confidence interval lies within +/-10%";
pub const NOTE_PRECISION_RULE: &str =
    "precision is judged on sigma_ucl; cv_ucl = sigma_ucl/sqrt(2) is reported alongside";

/// Relative errors d = 100·(x − y)/y over pairs with both values ≥ floor.
#[derive(Clone, Debug, PartialEq)]
pub struct RelErrorSet<T> {
    pub values: Vec<T>,
    pub floor: T,
    /// Pairs offered before the floor was applied.
    pub unfiltered_n: usize,
}

impl<T> RelErrorSet<T> {
    pub fn n(&self) -> usize {
        self.values.len()
    }
}

pub fn relative_errors<T: Real>(pairs: &CollocatedPairs<T>, floor: T) -> Result<RelErrorSet<T>> {
    if !(floor.is_finite() && floor >= T::zero()) {
        return Err(Error::Config(format!("validity floor must be >= 0, got {floor}")));
    }
    let hundred = T::lit(100.0);
    let values = pairs
        .x
        .iter()
        .zip(&pairs.y)
        .filter(|(&x, &y)| x >= floor && y >= floor && y > T::zero())
        .map(|(&x, &y)| hundred * (x - y) / y)
        .collect();
    Ok(RelErrorSet {
        values,
        floor,
        unfiltered_n: pairs.len(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BiasResult<T> {
    /// Mean relative error, percent.
    pub center: T,
    /// t(0.95, n−1)·s/√n, percent.
    pub half_width: T,
    pub passes: bool,
    /// Fewer than [`SMALL_SAMPLE`] errors went in.
    pub small_sample: bool,
}

pub fn bias_passes<T: Real>(center: T, half_width: T) -> bool {
    let lim = T::lit(BIAS_LIMIT);
    center - half_width >= -lim && center + half_width <= lim
}

pub fn bias_pep<T: Real>(errors: &RelErrorSet<T>) -> Result<BiasResult<T>> {
    let n = errors.n();
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "bias needs at least 2 relative errors, got {n}"
        )));
    }
    let st = sample_stats(&errors.values)?;
    bias_pep_from_stats(st.mean, st.sd.unwrap_or_else(T::zero), n)
}

/// Bias from summary statistics (mean, sample sd, count).
pub fn bias_pep_from_stats<T: Real>(mean: T, sd: T, n: usize) -> Result<BiasResult<T>> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("bias needs n >= 2, got {n}")));
    }
    let t = t_quantile(T::lit(0.95), T::of_usize(n - 1))?;
    let half_width = t * sd / T::of_usize(n).sqrt();
    Ok(BiasResult {
        center: mean,
        half_width,
        passes: bias_passes(mean, half_width),
        small_sample: n < SMALL_SAMPLE,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrecisionResult<T> {
    /// Upper 90 % confidence limit of the relative-error sd, percent.
    pub sigma_ucl: T,
    /// sigma_ucl/√2.
    pub cv_ucl: T,
    pub passes: bool,
}

pub fn precision_passes<T: Real>(sigma_ucl: T) -> bool {
    sigma_ucl < T::lit(PRECISION_LIMIT)
}

pub fn sigma_ucl<T: Real>(errors: &RelErrorSet<T>) -> Result<PrecisionResult<T>> {
    let n = errors.n();
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "precision needs at least 2 relative errors, got {n}"
        )));
    }
    let st = sample_stats(&errors.values)?;
    sigma_ucl_from_stats(st.sd.unwrap_or_else(T::zero), n)
}

/// σ_UCL = s·√((n−1)/χ²₀.₁,ₙ₋₁) from a sample sd and count.
pub fn sigma_ucl_from_stats<T: Real>(sd: T, n: usize) -> Result<PrecisionResult<T>> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("precision needs n >= 2, got {n}")));
    }
    let df = T::of_usize(n - 1);
    let chi = chi2_quantile(T::lit(0.1), df)?;
    let sigma = sd * (df / chi).sqrt();
    Ok(PrecisionResult {
        sigma_ucl: sigma,
        cv_ucl: sigma * T::FRAC_1_SQRT_2(),
        passes: precision_passes(sigma),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CvRmsResult<T> {
    /// Percent.
    pub value: T,
    /// Timestamps that contributed a CV.
    pub n_sets: usize,
    pub passes: bool,
}

pub fn cv_rms_passes<T: Real>(value: T) -> bool {
    value <= T::lit(CV_RMS_LIMIT)
}

/// Coefficient of variation 100·s/mean of one set; `None` when undefined.
pub fn set_cv<T: Real>(values: &[T]) -> Option<T> {
    let st = sample_stats(values).ok()?;
    let sd = st.sd?;
    (st.mean > T::zero()).then(|| T::lit(100.0) * sd / st.mean)
}

/// Root mean square of per-timestamp CVs across a fleet. A set counts when
/// it has at least `min_units` values, a positive mean, and the reference
/// pm25 at its timestamp lies in [3, 200] µg/m³.
pub fn cv_rms<T: Real>(
    fleet_sets: &[(Timestamp, Vec<T>)],
    reference: &Series<T>,
    min_units: usize,
) -> Result<CvRmsResult<T>> {
    if min_units < 2 {
        return Err(Error::Config(format!("min_units must be at least 2, got {min_units}")));
    }
    let (lo, hi) = (T::lit(CV_RMS_RANGE.0), T::lit(CV_RMS_RANGE.1));
    let cvs: Vec<T> = fleet_sets
        .iter()
        .filter(|(_, vals)| vals.len() >= min_units)
        .filter(|(ts, _)| {
            reference
                .at(*ts)
                .filter(|s| s.valid)
                .and_then(|s| s.pm25)
                .is_some_and(|r| r >= lo && r <= hi)
        })
        .filter_map(|(_, vals)| set_cv(vals))
        .collect();
    if cvs.is_empty() {
        return Err(Error::Undefined("no timestamp qualifies for CV_RMS".into()));
    }
    let value = (cvs.iter().map(|&c| c * c).sum::<T>() / T::of_usize(cvs.len())).sqrt();
    Ok(CvRmsResult {
        value,
        n_sets: cvs.len(),
        passes: cv_rms_passes(value),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComparabilityResult<T> {
    pub slope: T,
    /// µg/m³.
    pub intercept: T,
    pub r: T,
    pub intercept_bounds: (T, T),
    pub slope_pass: bool,
    pub intercept_pass: bool,
    pub r_pass: bool,
    pub r_threshold_used: T,
}

pub fn slope_passes<T: Real>(slope: T) -> bool {
    slope >= T::lit(0.9) && slope <= T::lit(1.1)
}

/// Acceptable intercept interval for a given slope.
pub fn intercept_bounds<T: Real>(slope: T) -> (T, T) {
    let lo = (T::lit(15.05) - slope * T::lit(17.32)).max(T::lit(-2.0));
    let hi = (T::lit(15.05) - slope * T::lit(13.20)).min(T::lit(2.0));
    (lo, hi)
}

pub fn intercept_passes<T: Real>(slope: T, intercept: T) -> bool {
    let (lo, hi) = intercept_bounds(slope);
    intercept >= lo && intercept <= hi
}

/// Slope, intercept and correlation of the candidate regressed on the
/// reference, with pass flags. `r_threshold` must lie in [0.93, 0.95].
pub fn comparability<T: Real>(pairs: &CollocatedPairs<T>, r_threshold: T) -> Result<ComparabilityResult<T>> {
    if !(r_threshold >= T::lit(0.93) && r_threshold <= T::lit(0.95)) {
        return Err(Error::Config(format!(
            "r_threshold must lie in [0.93, 0.95], got {r_threshold}"
        )));
    }
    let n = pairs.len();
    if n < 3 {
        return Err(Error::InvalidInput(format!(
            "comparability needs at least 3 pairs, got {n}"
        )));
    }
    let (c, r) = (&pairs.x, &pairs.y);
    let (cm, rm) = (crate::scalar::mean(c), crate::scalar::mean(r));
    let (mut srr, mut src) = (T::zero(), T::zero());
    for (&ci, &ri) in c.iter().zip(r) {
        srr = srr + (ri - rm) * (ri - rm);
        src = src + (ri - rm) * (ci - cm);
    }
    let corr = pearson_r(c, r)?;
    let slope = src / srr;
    let intercept = cm - slope * rm;
    let bounds = intercept_bounds(slope);
    Ok(ComparabilityResult {
        slope,
        intercept,
        r: corr,
        intercept_bounds: bounds,
        slope_pass: slope_passes(slope),
        intercept_pass: intercept_passes(slope, intercept),
        r_pass: corr >= r_threshold,
        r_threshold_used: r_threshold,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LodOptions<T> {
    /// Percent; low-RH selection.
    pub rh_max: T,
    /// Used when no row satisfies `rh_max`.
    pub fallback_rh_max: T,
    /// µg/m³; reference must be strictly below.
    pub ref_max: T,
    pub k: T,
}

impl<T: Real> Default for LodOptions<T> {
    fn default() -> Self {
        LodOptions {
            rh_max: T::lit(50.0),
            fallback_rh_max: T::lit(80.0),
            ref_max: T::lit(3.0),
            k: T::lit(3.30),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LodResult<T> {
    /// k × sd of the low sample, µg/m³; absent when undefined.
    pub value: Option<T>,
    pub n_low: usize,
    pub rh_max_used: T,
    pub reason: Option<String>,
}

/// Limit of detection from calibrated values (`x`), reference (`y`) and rh.
/// Negative calibrated values stay in the sample.
pub fn lod<T: Real>(pairs: &CollocatedPairs<T>, options: &LodOptions<T>) -> Result<LodResult<T>> {
    if !(options.k.is_finite() && options.k > T::zero()) {
        return Err(Error::Config(format!("lod k must be positive, got {}", options.k)));
    }
    let select = |rh_max: T| -> Vec<T> {
        (0..pairs.len())
            .filter(|&i| pairs.y[i] < options.ref_max && pairs.rh[i].is_some_and(|h| h <= rh_max))
            .map(|i| pairs.x[i])
            .collect()
    };
    let mut rh_max = options.rh_max;
    let mut low = select(rh_max);
    if low.is_empty() {
        rh_max = options.fallback_rh_max;
        low = select(rh_max);
    }
    let n_low = low.len();
    if n_low < 2 {
        return Ok(LodResult {
            value: None,
            n_low,
            rh_max_used: rh_max,
            reason: Some(format!("{n_low} low-concentration rows; at least 2 are needed")),
        });
    }
    let sd = sample_stats(&low)?.sd.unwrap_or_else(T::zero);
    Ok(LodResult {
        value: Some(options.k * sd),
        n_low,
        rh_max_used: rh_max,
        reason: None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvaluationOptions<T> {
    pub floor: T,
    pub r_threshold: T,
    pub lod: LodOptions<T>,
}

impl<T: Real> Default for EvaluationOptions<T> {
    fn default() -> Self {
        EvaluationOptions {
            floor: T::lit(DEFAULT_FLOOR),
            r_threshold: T::lit(0.93),
            lod: LodOptions::default(),
        }
    }
}

/// Fleet data for the unit-wise precision metric.
#[derive(Clone, Copy, Debug)]
pub struct FleetInputs<'a, T> {
    pub sets: &'a [(Timestamp, Vec<T>)],
    pub reference: &'a Series<T>,
    pub min_units: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct EvaluationInputs<'a, T> {
    /// Calibrated candidate (`x`) against reference (`y`).
    pub pairs: &'a CollocatedPairs<T>,
    pub fleet: Option<FleetInputs<'a, T>>,
    /// Calibrated values, reference and rh for the LOD sample.
    pub lod: Option<&'a CollocatedPairs<T>>,
    /// Series and its expected schedule.
    pub completeness: Option<(&'a Series<T>, &'a [Timestamp])>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvaluationReport<T> {
    /// Pairs offered.
    pub n: usize,
    /// Relative errors retained after the validity floor.
    pub n_valid: usize,
    pub bias: Option<BiasResult<T>>,
    pub precision: Option<PrecisionResult<T>>,
    pub comparability: Option<ComparabilityResult<T>>,
    pub lod: Option<LodResult<T>>,
    pub cv_rms: Option<CvRmsResult<T>>,
    /// Percent.
    pub completeness: Option<T>,
    /// Rule reminders and the reasons for absent metrics.
    pub notes: Vec<String>,
}

/// Assembles the report. A metric that cannot be computed is left absent
/// with a note; only an empty pair set or invalid options abort.
pub fn evaluate<T: Real>(
    inputs: &EvaluationInputs<'_, T>,
    options: &EvaluationOptions<T>,
) -> Result<EvaluationReport<T>> {
    if inputs.pairs.is_empty() {
        return Err(Error::InvalidInput(
            "evaluation needs at least one collocated pair".into(),
        ));
    }
    let errors = relative_errors(inputs.pairs, options.floor)?;
    let mut notes = vec![NOTE_BIAS_RULE.to_string(), NOTE_PRECISION_RULE.to_string()];
    let bias = keep_or_note(&mut notes, "bias", bias_pep(&errors));
    let precision = keep_or_note(&mut notes, "precision", sigma_ucl(&errors));
    let comparability = keep_or_note(
        &mut notes,
        "comparability",
        comparability(inputs.pairs, options.r_threshold),
    );
    let lod = match inputs.lod {
        Some(p) => keep_or_note(&mut notes, "lod", lod(p, &options.lod)),
        None => None,
    };
    let cv_rms = match inputs.fleet {
        Some(f) => keep_or_note(&mut notes, "cv_rms", cv_rms(f.sets, f.reference, f.min_units)),
        None => None,
    };
    let completeness = match inputs.completeness {
        Some((s, sched)) => keep_or_note(&mut notes, "completeness", crate::timeseries::completeness(s, sched)),
        None => None,
    };
    if let Some(b) = &bias {
        if b.small_sample {
            notes.push(format!(
                "bias: only {} relative errors (fewer than {SMALL_SAMPLE})",
                errors.n()
            ));
        }
    }
    if let Some(LodResult { reason: Some(r), .. }) = &lod {
        notes.push(format!("lod: {r}"));
    }
    Ok(EvaluationReport {
        n: inputs.pairs.len(),
        n_valid: errors.n(),
        bias,
        precision,
        comparability,
        lod,
        cv_rms,
        completeness,
        notes,
    })
}

fn keep_or_note<V>(notes: &mut Vec<String>, name: &str, r: Result<V>) -> Option<V> {
    match r {
        Ok(v) => Some(v),
        Err(e) => {
            notes.push(format!("{name}: {e}"));
            None
        }
    }
}

/// CSV header matching [`EvaluationReport::csv_row`].
pub const CSV_HEADER: &str = "candidate,model,n,bias_center,bias_hw,sigma_ucl,cv_ucl,cv_rms,slope,intercept,r,lod,eta,\
bias_pass,precision_pass,cv_rms_pass,slope_pass,intercept_pass,r_pass";

fn opt<T: Real>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn flag(v: Option<bool>) -> &'static str {
    match v {
        Some(true) => "true",
        Some(false) => "false",
        None => "",
    }
}

impl<T: Real> EvaluationReport<T> {
    /// One CSV row (no trailing newline); absent metrics are empty fields.
    pub fn csv_row(&self, candidate: &str, model: &str) -> String {
        let b = self.bias.as_ref();
        let p = self.precision.as_ref();
        let c = self.comparability.as_ref();
        let cv = self.cv_rms.as_ref();
        [
            candidate.to_string(),
            model.to_string(),
            self.n.to_string(),
            opt(b.map(|b| b.center)),
            opt(b.map(|b| b.half_width)),
            opt(p.map(|p| p.sigma_ucl)),
            opt(p.map(|p| p.cv_ucl)),
            opt(cv.map(|c| c.value)),
            opt(c.map(|c| c.slope)),
            opt(c.map(|c| c.intercept)),
            opt(c.map(|c| c.r)),
            opt(self.lod.as_ref().and_then(|l| l.value)),
            opt(self.completeness),
            flag(b.map(|b| b.passes)).into(),
            flag(p.map(|p| p.passes)).into(),
            flag(cv.map(|c| c.passes)).into(),
            flag(c.map(|c| c.slope_pass)).into(),
            flag(c.map(|c| c.intercept_pass)).into(),
            flag(c.map(|c| c.r_pass)).into(),
        ]
        .join(",")
    }

    /// Flat `key = value` block; absent metrics are omitted.
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        line("n", self.n.to_string());
        line("n_valid", self.n_valid.to_string());
        if let Some(b) = &self.bias {
            line("bias.center", b.center.to_string());
            line("bias.half_width", b.half_width.to_string());
            line("bias.pass", b.passes.to_string());
        }
        if let Some(p) = &self.precision {
            line("precision.sigma_ucl", p.sigma_ucl.to_string());
            line("precision.cv_ucl", p.cv_ucl.to_string());
            line("precision.pass", p.passes.to_string());
        }
        if let Some(c) = &self.comparability {
            line("comparability.slope", c.slope.to_string());
            line("comparability.intercept", c.intercept.to_string());
            line("comparability.intercept_lower", c.intercept_bounds.0.to_string());
            line("comparability.intercept_upper", c.intercept_bounds.1.to_string());
            line("comparability.r", c.r.to_string());
            line("comparability.r_threshold", c.r_threshold_used.to_string());
            line("comparability.slope_pass", c.slope_pass.to_string());
            line("comparability.intercept_pass", c.intercept_pass.to_string());
            line("comparability.r_pass", c.r_pass.to_string());
        }
        if let Some(l) = &self.lod {
            if let Some(v) = l.value {
                line("lod.value", v.to_string());
            }
            line("lod.n_low", l.n_low.to_string());
            line("lod.rh_max_used", l.rh_max_used.to_string());
        }
        if let Some(c) = &self.cv_rms {
            line("cv_rms.value", c.value.to_string());
            line("cv_rms.n_sets", c.n_sets.to_string());
            line("cv_rms.pass", c.passes.to_string());
        }
        if let Some(e) = self.completeness {
            line("completeness", e.to_string());
        }
        for (i, n) in self.notes.iter().enumerate() {
            line(&format!("note.{i}"), n.clone());
        }
        s
    }
}
