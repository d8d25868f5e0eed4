//! The calibration pipeline: preprocess, cleanse, fit, evaluate.
//!
//! Run keys:
//!
//! ```text
//! input.reference = reference.csv
//! input.met = met.csv                 # optional rh/temp source
//! input.candidates = a.csv, b.csv
//! input.masks = trim.csv              # optional, start,end windows
//! input.interval = 60                 # optional, inferred otherwise
//! preprocess.repair = true
//! preprocess.average_interval = 60    # optional
//! covariates.source = met             # met | reference | candidate
//! cleanse.enabled = true
//! cleanse.beta / .c_low / .h_low / .window_size / .warmup_rows / .fallback_ratio
//! models = OLS, MLH
//! evaluate.floor / .r_threshold / .rh_max / .fallback_rh_max / .ref_max / .k / .min_units
//! output.dir = out
//! ```
//!
//! Everything is computed in memory first; nothing is written unless every
//! stage succeeds for every candidate.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use pmcal::calibrate::{self, ModelKind};
use pmcal::cleanse;
use pmcal::evaluate::{self, EvaluationInputs, EvaluationOptions, FleetInputs, LodOptions};
use pmcal::io::{self, format_timestamp, Diagnostic};
use pmcal::timeseries::{self, AlignSpec, CovariateSource, IntervalMask};
use pmcal::{Channel, CleanseConfig, CollocatedPairs, Series, Timestamp};

use crate::artifacts::Artifacts;
use crate::config::Config;
use crate::error::{CliError, CliResult};
use crate::ingest::{device_id, load_series};

/// Width of the relative-residual histogram bins, percent.
pub const RELATIVE_BIN: f64 = 1.0;
/// Width of the residual histogram bins, µg/m³.
pub const RESIDUAL_BIN: f64 = 1.0;
pub const UNITWISE: &str = "unitwise";
/// Model column of the report row for uncalibrated readings.
pub const RAW: &str = "raw";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Covariates {
    Met,
    Reference,
    Candidate,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub reference: PathBuf,
    pub met: Option<PathBuf>,
    pub candidates: Vec<PathBuf>,
    pub masks: Vec<PathBuf>,
    pub input_interval: Option<i64>,
    pub repair: bool,
    pub average_interval: Option<i64>,
    pub covariates: Covariates,
    pub cleanse: Option<CleanseConfig>,
    pub warmup_rows: usize,
    pub fallback_ratio: f64,
    pub models: Vec<ModelKind>,
    pub evaluation: EvaluationOptions<f64>,
    pub min_units: usize,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_config(c: &Config) -> CliResult<Self> {
        let reference = c
            .path("input.reference")
            .ok_or_else(|| CliError::Config("missing required key 'input.reference'".into()))?;
        let met = c.path("input.met");
        let candidates: Vec<PathBuf> = c.list("input.candidates").iter().map(|p| c.resolve(p)).collect();
        if candidates.is_empty() {
            return Err(CliError::Config("input.candidates lists no files".into()));
        }
        let mut ids = BTreeSet::new();
        for p in &candidates {
            let id = device_id(p);
            if id == UNITWISE || !ids.insert(id.clone()) {
                return Err(CliError::Config(format!(
                    "candidate id '{id}' is duplicated or reserved"
                )));
            }
        }
        let covariates = match c.raw("covariates.source") {
            None if met.is_some() => Covariates::Met,
            None | Some("reference") => Covariates::Reference,
            Some("met") if met.is_some() => Covariates::Met,
            Some("met") => return Err(CliError::Config("covariates.source = met needs input.met".into())),
            Some("candidate") => Covariates::Candidate,
            Some(other) => {
                return Err(CliError::Config(format!(
                    "covariates.source must be met, reference or candidate, got '{other}'"
                )))
            }
        };

        let cleanse = if c.get_or("cleanse.enabled", true)? {
            let d = CleanseConfig::default();
            let cfg = CleanseConfig {
                beta: c.get_or("cleanse.beta", d.beta)?,
                c_low: c.get_or("cleanse.c_low", d.c_low)?,
                h_low: c.get_or("cleanse.h_low", d.h_low)?,
                window_size: c.get_or("cleanse.window_size", d.window_size)?,
            };
            cfg.validate()?;
            Some(cfg)
        } else {
            None
        };

        let mut models = Vec::new();
        let names = c.list("models");
        for name in if names.is_empty() {
            vec!["OLS".to_string()]
        } else {
            names
        } {
            let kind =
                ModelKind::from_name(&name).ok_or_else(|| CliError::Config(format!("unknown model kind '{name}'")))?;
            if !models.contains(&kind) {
                models.push(kind);
            }
        }

        let d = EvaluationOptions::<f64>::default();
        let evaluation = EvaluationOptions {
            floor: c.get_or("evaluate.floor", d.floor)?,
            r_threshold: c.get_or("evaluate.r_threshold", d.r_threshold)?,
            lod: LodOptions {
                rh_max: c.get_or("evaluate.rh_max", d.lod.rh_max)?,
                fallback_rh_max: c.get_or("evaluate.fallback_rh_max", d.lod.fallback_rh_max)?,
                ref_max: c.get_or("evaluate.ref_max", d.lod.ref_max)?,
                k: c.get_or("evaluate.k", d.lod.k)?,
            },
        };

        let cfg = RunConfig {
            reference,
            met,
            candidates,
            masks: c.list("input.masks").iter().map(|p| c.resolve(p)).collect(),
            input_interval: c.get("input.interval")?,
            repair: c.get_or("preprocess.repair", true)?,
            average_interval: c.get("preprocess.average_interval")?,
            covariates,
            cleanse,
            warmup_rows: c.get_or("cleanse.warmup_rows", 1440)?,
            fallback_ratio: c.get_or("cleanse.fallback_ratio", cleanse::DEFAULT_FALLBACK_RATIO)?,
            models,
            evaluation,
            min_units: c.get_or("evaluate.min_units", 3)?,
            out: c.path("output.dir"),
        };
        c.ensure_consumed()?;
        Ok(cfg)
    }
}

/// What a run produced.
#[derive(Debug)]
pub struct RunOutcome {
    pub artifacts: Artifacts,
    /// Input diagnostics, tagged with their file.
    pub diagnostics: Vec<(PathBuf, Diagnostic)>,
}

struct Inputs {
    reference: Series,
    met: Option<Series>,
    candidates: Vec<(String, PathBuf, Series)>,
    mask: IntervalMask,
}

fn read_inputs(cfg: &RunConfig, diagnostics: &mut Vec<(PathBuf, Diagnostic)>) -> CliResult<Inputs> {
    let mut load = |path: &Path| -> CliResult<Series> {
        let parsed = load_series(path, cfg.input_interval)?;
        diagnostics.extend(parsed.diagnostics.into_iter().map(|d| (path.to_path_buf(), d)));
        Ok(parsed.series)
    };
    let reference = load(&cfg.reference)?;
    let met = cfg.met.as_deref().map(&mut load).transpose()?;
    let candidates = cfg
        .candidates
        .iter()
        .map(|p| Ok((device_id(p), p.clone(), load(p)?)))
        .collect::<CliResult<Vec<_>>>()?;
    let mut mask = IntervalMask::default();
    for p in &cfg.masks {
        let f = File::open(p).map_err(|e| CliError::io(p, e))?;
        mask = mask.union(&io::read_mask(BufReader::new(f)).map_err(|e| CliError::input(p, e))?);
    }
    Ok(Inputs {
        reference,
        met,
        candidates,
        mask,
    })
}

/// Preprocessing counts for one series.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct PrepCounts {
    repairs: usize,
    dropped: usize,
    masked: usize,
}

fn preprocess(series: &Series, cfg: &RunConfig, mask: &IntervalMask) -> CliResult<(Series, PrepCounts)> {
    let id = series.device_id().to_string();
    let mut counts = PrepCounts::default();
    let mut s = series.clone();
    if cfg.repair {
        let r = timeseries::repair_last_valid(&s);
        counts.repairs = r.repairs;
        counts.dropped = r.dropped;
        s = r.series;
    }
    let m = timeseries::apply_mask(&s, mask);
    counts.masked = m.removed;
    s = m.series;
    if let Some(target) = cfg.average_interval {
        s = timeseries::average_interval(&s, target)
            .map_err(CliError::stage("average", &id))?
            .series;
    }
    Ok((s, counts))
}

fn check_covariates(cfg: &RunConfig, source: &Series, path: &Path) -> CliResult<()> {
    for &kind in &cfg.models {
        for (needed, ch) in [(kind.needs_rh(), Channel::Rh), (kind.needs_temp(), Channel::Temp)] {
            if needed && !source.has_channel(ch) {
                return Err(CliError::Config(format!(
                    "model {} requires the '{}' column, which {} does not provide",
                    kind.name(),
                    ch.name(),
                    path.display()
                )));
            }
        }
    }
    Ok(())
}

fn histogram_csv(values: impl IntoIterator<Item = f64>, width: f64) -> String {
    let mut bins: BTreeMap<i64, usize> = BTreeMap::new();
    for v in values {
        *bins.entry((v / width).floor() as i64).or_default() += 1;
    }
    let mut out = String::from("bin_lower,bin_upper,count\n");
    for (k, n) in bins {
        let lo = k as f64 * width;
        let _ = writeln!(out, "{lo},{},{n}", lo + width);
    }
    out
}

fn opt_cell(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Scatter, residual-vs-RH and histogram data for one fitted model.
fn plot_data(pairs: &CollocatedPairs, calibrated: &[f64], floor: f64) -> pmcal::Result<Vec<(&'static str, String)>> {
    let mut scatter = String::from("timestamp,x,y,rh,calibrated\n");
    let mut vs_rh = String::from("timestamp,rh,residual\n");
    for (i, &cal) in calibrated.iter().enumerate() {
        let ts = format_timestamp(pairs.timestamps[i]);
        let residual = cal - pairs.y[i];
        let _ = writeln!(
            scatter,
            "{ts},{},{},{},{cal}",
            pairs.x[i],
            pairs.y[i],
            opt_cell(pairs.rh[i]),
        );
        if let Some(rh) = pairs.rh[i] {
            let _ = writeln!(vs_rh, "{ts},{rh},{residual}");
        }
    }
    let relative = evaluate::relative_errors(&pairs.with_x(calibrated.to_vec())?, floor)?;
    Ok(vec![
        ("scatter", scatter),
        ("residual_rh", vs_rh),
        ("hist_relative", histogram_csv(relative.values, RELATIVE_BIN)),
        (
            "hist_residual",
            histogram_csv(calibrated.iter().zip(&pairs.y).map(|(c, y)| c - y), RESIDUAL_BIN),
        ),
    ])
}

struct Context<'a> {
    cfg: &'a RunConfig,
    reference: &'a Series,
    met: Option<&'a Series>,
    schedule: Vec<Timestamp>,
}

impl Context<'_> {
    fn covariates<'s>(&'s self, candidate: &'s Series) -> &'s Series {
        match self.cfg.covariates {
            Covariates::Met => self.met.unwrap_or(self.reference),
            Covariates::Reference => self.reference,
            Covariates::Candidate => candidate,
        }
    }
}

/// Fits and evaluates every configured model for one (cleansed) target.
fn assess(
    ctx: &Context<'_>,
    id: &str,
    series: &Series,
    fleet: Option<FleetInputs<'_, f64>>,
    rows: &mut Vec<String>,
) -> CliResult<Artifacts> {
    let mut out = Artifacts::new();
    let cov = ctx.covariates(series);
    let source = match ctx.cfg.covariates {
        Covariates::Met => CovariateSource::External(cov),
        Covariates::Reference => CovariateSource::Reference,
        Covariates::Candidate => CovariateSource::Candidate,
    };

    // The uncalibrated readings get a row of their own, so the comparability
    // flags describe the sensor as delivered.
    let raw = timeseries::align_collocated(
        series,
        ctx.reference,
        &AlignSpec {
            covariates: source,
            ..AlignSpec::pm25()
        },
    )
    .map_err(CliError::stage("align", id))?;
    if !raw.is_empty() {
        let inputs = EvaluationInputs {
            pairs: &raw,
            fleet,
            lod: Some(&raw),
            completeness: Some((series, &ctx.schedule)),
        };
        let report = evaluate::evaluate(&inputs, &ctx.cfg.evaluation).map_err(CliError::stage("evaluate", id))?;
        rows.push(report.csv_row(id, RAW));
        out.add(format!("report_{RAW}.txt"), report.to_kv());
    }

    for &kind in &ctx.cfg.models {
        let name = kind.name();
        let spec = AlignSpec {
            covariates: source,
            require_rh: kind.needs_rh(),
            require_temp: kind.needs_temp(),
            ..AlignSpec::pm25()
        };
        let pairs = timeseries::align_collocated(series, ctx.reference, &spec).map_err(CliError::stage("align", id))?;
        let model = calibrate::fit(kind, &pairs).map_err(CliError::stage("fit", id))?;
        let calibrated = calibrate::predict_pairs(&model, &pairs).map_err(CliError::stage("fit", id))?;
        let cal_pairs = pairs.with_x(calibrated.clone())?;
        let inputs = EvaluationInputs {
            pairs: &cal_pairs,
            fleet,
            lod: Some(&cal_pairs),
            completeness: Some((series, &ctx.schedule)),
        };
        let report = evaluate::evaluate(&inputs, &ctx.cfg.evaluation).map_err(CliError::stage("evaluate", id))?;
        rows.push(report.csv_row(id, name));
        out.add(format!("model_{name}.txt"), model.to_kv());
        out.add(format!("report_{name}.txt"), report.to_kv());
        for (kind_of_plot, text) in
            plot_data(&pairs, &calibrated, ctx.cfg.evaluation.floor).map_err(CliError::stage("plot", id))?
        {
            out.add(format!("{kind_of_plot}_{name}.csv"), text);
        }
    }
    Ok(out)
}

/// Runs the pipeline without touching the filesystem beyond reading inputs.
pub fn run(cfg: &RunConfig) -> CliResult<RunOutcome> {
    let mut diagnostics = Vec::new();
    let inputs = read_inputs(cfg, &mut diagnostics)?;

    let (reference, _) = preprocess(&inputs.reference, cfg, &inputs.mask)?;
    let met = inputs
        .met
        .as_ref()
        .map(|m| preprocess(m, cfg, &inputs.mask).map(|(s, _)| s))
        .transpose()?;
    let schedule = match (reference.samples().first(), reference.samples().last()) {
        (Some(a), Some(b)) => {
            timeseries::schedule(a.timestamp, b.timestamp + reference.interval(), reference.interval())
        }
        _ => {
            return Err(CliError::Config(format!(
                "reference {} holds no samples",
                cfg.reference.display()
            )))
        }
    };
    let ctx = Context {
        cfg,
        reference: &reference,
        met: met.as_ref(),
        schedule,
    };

    let mut artifacts = Artifacts::new();
    let mut rows = Vec::new();
    let mut cleansed_fleet = Vec::new();
    for (id, path, raw) in &inputs.candidates {
        let (series, counts) = preprocess(raw, cfg, &inputs.mask)?;
        let cov = ctx.covariates(&series);
        let cov_path = match cfg.covariates {
            Covariates::Met => cfg.met.as_deref().unwrap_or(&cfg.reference),
            Covariates::Reference => &cfg.reference,
            Covariates::Candidate => path,
        };
        check_covariates(cfg, cov, cov_path)?;

        let mut per = Artifacts::new();
        let (clean, rejected) = match &cfg.cleanse {
            Some(cc) => {
                let warm = cleanse::warmup_rows(&series, cov, cfg.warmup_rows);
                let init =
                    cleanse::init_window(warm, cc, cfg.fallback_ratio).map_err(CliError::stage("cleanse", id))?;
                let c = cleanse::cleanse_series(&series, cov, cc, init).map_err(CliError::stage("cleanse", id))?;
                per.add("audit.csv", io::audit_to_csv(&c.audit));
                (c.cleansed, c.rejected.len())
            }
            None => (series, 0),
        };
        per.add("cleansed.csv", io::series_to_csv(&clean));
        per.add(
            "summary.txt",
            format!(
                "repairs = {}\nleading_dropped = {}\nmasked = {}\nrejected = {rejected}\nrows = {}\n",
                counts.repairs,
                counts.dropped,
                counts.masked,
                clean.len()
            ),
        );
        per.extend("", assess(&ctx, id, &clean, None, &mut rows)?);
        artifacts.extend(id, per);
        cleansed_fleet.push(clean);
    }

    if cleansed_fleet.len() >= cfg.min_units {
        let unit = timeseries::unitwise_average(&cleansed_fleet, cfg.min_units)
            .map_err(CliError::stage("unitwise", UNITWISE))?;
        let sets = timeseries::fleet_sets(&cleansed_fleet, Channel::Pm25, cfg.min_units)
            .map_err(CliError::stage("unitwise", UNITWISE))?;
        let fleet = FleetInputs {
            sets: &sets,
            reference: &reference,
            min_units: cfg.min_units,
        };
        let mut per = Artifacts::new();
        per.add("cleansed.csv", io::series_to_csv(&unit));
        per.extend("", assess(&ctx, UNITWISE, &unit, Some(fleet), &mut rows)?);
        artifacts.extend(UNITWISE, per);
    }

    let mut report = format!("{}\n", evaluate::CSV_HEADER);
    for r in rows {
        report.push_str(&r);
        report.push('\n');
    }
    artifacts.add("report.csv", report);
    Ok(RunOutcome { artifacts, diagnostics })
}
