//! Linear calibration of a sensor against a collocated reference.
//!
//! The reference is the dependent variable and the sensor reading `x` the
//! main regressor. Five model kinds differ in their covariates:
//!
//! | kind | regressors          |
//! |------|---------------------|
//! | OLS  | x                   |
//! | MLH  | x, rh               |
//! | MLT  | x, temp             |
//! | MLHT | x, rh, temp         |
//! | ADV  | x, rh, x·rh         |
//!
//! Fits use a pivoted Householder QR, so collinear designs are reported as
//! [`Error::SingularDesign`] instead of producing garbage. Predictions are
//! never clamped at zero.

mod qr;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::statcore::t_quantile;
use crate::timeseries::CollocatedPairs;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    Ols,
    Mlh,
    Mlt,
    Mlht,
    Adv,
}

/// A non-intercept term of a model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Regressor {
    X,
    Rh,
    Temp,
    XRh,
}

impl Regressor {
    pub fn name(self) -> &'static str {
        match self {
            Regressor::X => "x",
            Regressor::Rh => "rh",
            Regressor::Temp => "temp",
            Regressor::XRh => "x_rh",
        }
    }
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Ols,
        ModelKind::Mlh,
        ModelKind::Mlt,
        ModelKind::Mlht,
        ModelKind::Adv,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Ols => "OLS",
            ModelKind::Mlh => "MLH",
            ModelKind::Mlt => "MLT",
            ModelKind::Mlht => "MLHT",
            ModelKind::Adv => "ADV",
        }
    }

    /// Case-insensitive inverse of [`ModelKind::name`].
    pub fn from_name(name: &str) -> Option<ModelKind> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(name.trim()))
    }

    pub fn regressors(self) -> &'static [Regressor] {
        use Regressor::*;
        match self {
            ModelKind::Ols => &[X],
            ModelKind::Mlh => &[X, Rh],
            ModelKind::Mlt => &[X, Temp],
            ModelKind::Mlht => &[X, Rh, Temp],
            ModelKind::Adv => &[X, Rh, XRh],
        }
    }

    pub fn needs_rh(self) -> bool {
        self.regressors()
            .iter()
            .any(|r| matches!(r, Regressor::Rh | Regressor::XRh))
    }

    pub fn needs_temp(self) -> bool {
        self.regressors().contains(&Regressor::Temp)
    }

    /// Number of coefficients including the intercept.
    pub fn n_coefficients(self) -> usize {
        self.regressors().len() + 1
    }

    /// Regressor values for one row, intercept excluded.
    pub fn design_row<T: Real>(self, x: T, rh: Option<T>, temp: Option<T>) -> Result<Vec<T>> {
        let need = |v: Option<T>, col: &str| {
            v.ok_or_else(|| Error::Config(format!("model {} requires the '{col}' column", self.name())))
        };
        self.regressors()
            .iter()
            .map(|r| match r {
                Regressor::X => Ok(x),
                Regressor::Rh => need(rh, "rh"),
                Regressor::Temp => need(temp, "temp"),
                Regressor::XRh => Ok(x * need(rh, "rh")?),
            })
            .collect()
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Coefficient<T> {
    /// `intercept`, or a [`Regressor::name`].
    pub name: String,
    pub value: T,
    /// 95 % confidence half-width; absent for offsets not estimated by
    /// regression (fleet intercepts).
    pub half_width: Option<T>,
}

/// Residual checks of the linear-model assumptions. Reported, never
/// enforced.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diagnostics<T> {
    pub residual_mean: T,
    /// Σ eₜeₜ₋₁ / Σ eₜ²; absent when all residuals vanish.
    pub lag1_autocorrelation: Option<T>,
    /// Σ (eₜ − eₜ₋₁)² / Σ eₜ²; absent when all residuals vanish.
    pub durbin_watson: Option<T>,
}

/// Training-set summary of `x` kept by OLS models for prediction bounds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OlsSummary<T> {
    pub x_mean: T,
    /// Σ (xᵢ − x̄)².
    pub sxx: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FittedModel<T> {
    pub kind: ModelKind,
    /// Intercept first, then the kind's regressors in order.
    pub coefficients: Vec<Coefficient<T>>,
    pub n: usize,
    pub r_squared: T,
    /// √(SSE / (n − k − 1)).
    pub residual_sd: T,
    pub diagnostics: Diagnostics<T>,
    pub ols: Option<OlsSummary<T>>,
}

impl<T: Real> FittedModel<T> {
    pub fn intercept(&self) -> T {
        self.coefficients[0].value
    }

    /// Coefficient by name.
    pub fn coefficient(&self, name: &str) -> Option<&Coefficient<T>> {
        self.coefficients.iter().find(|c| c.name == name)
    }

    pub fn values(&self) -> Vec<T> {
        self.coefficients.iter().map(|c| c.value).collect()
    }
}

/// Fits `kind` to `pairs` by least squares.
pub fn fit<T: Real>(kind: ModelKind, pairs: &CollocatedPairs<T>) -> Result<FittedModel<T>> {
    let n = pairs.len();
    let p = kind.n_coefficients();
    if n < p + 2 {
        return Err(Error::InvalidInput(format!(
            "model {kind} needs at least {} rows, got {n}",
            p + 2
        )));
    }
    let mut columns = vec![vec![T::one(); n]];
    columns.extend((1..p).map(|_| Vec::with_capacity(n)));
    for i in 0..n {
        let row = kind
            .design_row(pairs.x[i], pairs.rh[i], pairs.temp[i])
            .map_err(|e| match e {
                Error::Config(msg) => Error::Config(format!("{msg} (missing at timestamp {})", pairs.timestamps[i])),
                other => other,
            })?;
        for (col, v) in columns[1..].iter_mut().zip(row) {
            col.push(v);
        }
    }
    if columns.iter().flatten().chain(&pairs.y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite value in calibration data".into()));
    }

    let design = columns.clone();
    let ls = qr::solve(columns, pairs.y.clone())?;

    let fitted: Vec<T> = (0..n)
        .map(|i| design.iter().zip(&ls.beta).map(|(c, &b)| c[i] * b).sum())
        .collect();
    let resid: Vec<T> = pairs.y.iter().zip(&fitted).map(|(&y, &f)| y - f).collect();
    let sse: T = resid.iter().map(|&e| e * e).sum();
    let y_mean = crate::scalar::mean(&pairs.y);
    let sst: T = pairs.y.iter().map(|&y| (y - y_mean) * (y - y_mean)).sum();
    let r_squared = if sst > T::zero() {
        (T::one() - sse / sst).max(T::zero()).min(T::one())
    } else {
        T::one()
    };
    let dof = n - p;
    let residual_sd = (sse / T::of_usize(dof)).sqrt();
    let t = t_quantile(T::lit(0.975), T::of_usize(dof))?;

    let names = std::iter::once("intercept").chain(kind.regressors().iter().map(|r| r.name()));
    let coefficients = names
        .zip(ls.beta.iter().zip(&ls.inv_gram_diag))
        .map(|(name, (&value, &v))| Coefficient {
            name: name.to_string(),
            value,
            half_width: Some(t * residual_sd * v.sqrt()),
        })
        .collect();

    let ols = (kind == ModelKind::Ols).then(|| {
        let x_mean = crate::scalar::mean(&pairs.x);
        OlsSummary {
            x_mean,
            sxx: pairs.x.iter().map(|&x| (x - x_mean) * (x - x_mean)).sum(),
        }
    });

    Ok(FittedModel {
        kind,
        coefficients,
        n,
        r_squared,
        residual_sd,
        diagnostics: diagnostics(&resid),
        ols,
    })
}

fn diagnostics<T: Real>(resid: &[T]) -> Diagnostics<T> {
    let ss: T = resid.iter().map(|&e| e * e).sum();
    let (lag1, dw) = if ss > T::zero() {
        let cross: T = resid.windows(2).map(|w| w[0] * w[1]).sum();
        let diff: T = resid.windows(2).map(|w| (w[1] - w[0]) * (w[1] - w[0])).sum();
        (Some(cross / ss), Some(diff / ss))
    } else {
        (None, None)
    };
    Diagnostics {
        residual_mean: crate::scalar::mean(resid),
        lag1_autocorrelation: lag1,
        durbin_watson: dw,
    }
}

/// Calibrated value β₀ + Σ βⱼ·regressorⱼ.
pub fn predict<T: Real>(model: &FittedModel<T>, x: T, rh: Option<T>, temp: Option<T>) -> Result<T> {
    let row = model.kind.design_row(x, rh, temp)?;
    Ok(model.intercept()
        + row
            .iter()
            .zip(&model.coefficients[1..])
            .map(|(&v, c)| v * c.value)
            .sum::<T>())
}

/// [`predict`] over every row of `pairs`.
pub fn predict_pairs<T: Real>(model: &FittedModel<T>, pairs: &CollocatedPairs<T>) -> Result<Vec<T>> {
    (0..pairs.len())
        .map(|i| predict(model, pairs.x[i], pairs.rh[i], pairs.temp[i]))
        .collect()
}

/// Two-sided prediction interval `(lower, upper)` of an OLS model at each
/// grid point, at confidence `level`.
pub fn prediction_bounds<T: Real>(model: &FittedModel<T>, x_grid: &[T], level: T) -> Result<Vec<(T, T)>> {
    let Some(ols) = model.ols.filter(|_| model.kind == ModelKind::Ols) else {
        return Err(Error::Unsupported(format!(
            "prediction bounds are only available for OLS models, not {}",
            model.kind
        )));
    };
    if !(level > T::zero() && level < T::one()) {
        return Err(Error::InvalidInput(format!("level must lie in (0, 1), got {level}")));
    }
    let n = T::of_usize(model.n);
    let t = t_quantile((T::one() + level) / T::lit(2.0), n - T::lit(2.0))?;
    x_grid
        .iter()
        .map(|&x| {
            let yhat = predict(model, x, None, None)?;
            let dx = x - ols.x_mean;
            let half = t * model.residual_sd * (T::one() + T::one() / n + dx * dx / ols.sxx).sqrt();
            Ok((yhat - half, yhat + half))
        })
        .collect()
}

/// Clean-air readings of one device and the covariates they were taken at.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroAir<T> {
    pub readings: Vec<T>,
    pub rh: Option<T>,
    pub temp: Option<T>,
}

/// Personalizes a unit-wise model per device. Slopes and covariate
/// coefficients are shared; each device's intercept is set so that its mean
/// clean-air reading, at the supplied clean-air covariates, calibrates to
/// zero. Fleet intercepts carry no half-width.
pub fn fleet_calibrate<T: Real>(
    unitwise: &FittedModel<T>,
    zero_air: &BTreeMap<String, ZeroAir<T>>,
) -> Result<BTreeMap<String, FittedModel<T>>> {
    let mut out = BTreeMap::new();
    for (device, zero) in zero_air {
        if zero.readings.is_empty() {
            return Err(Error::InvalidInput(format!(
                "device '{device}' has no zero-air readings"
            )));
        }
        let x_mean = crate::scalar::mean(&zero.readings);
        let row = unitwise
            .kind
            .design_row(x_mean, zero.rh, zero.temp)
            .map_err(|e| match e {
                Error::Config(msg) => Error::Config(format!("zero air for '{device}': {msg}")),
                other => other,
            })?;
        let shared: T = row
            .iter()
            .zip(&unitwise.coefficients[1..])
            .map(|(&v, c)| v * c.value)
            .sum();
        let mut model = unitwise.clone();
        model.coefficients[0] = Coefficient {
            name: "intercept".into(),
            value: -shared,
            half_width: None,
        };
        out.insert(device.clone(), model);
    }
    Ok(out)
}

fn fmt_real<T: Real>(v: T) -> String {
    format!("{v:.16e}")
}

impl<T: Real> FittedModel<T> {
    /// Flat `key = value` block; floats carry 17 significant digits, so
    /// [`FittedModel::from_kv`] restores the model exactly.
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        line("kind", self.kind.name().into());
        line("n", self.n.to_string());
        for c in &self.coefficients {
            line(&format!("coef.{}", c.name), fmt_real(c.value));
            if let Some(hw) = c.half_width {
                line(&format!("coef.{}.half_width", c.name), fmt_real(hw));
            }
        }
        line("r_squared", fmt_real(self.r_squared));
        line("residual_sd", fmt_real(self.residual_sd));
        line("diag.residual_mean", fmt_real(self.diagnostics.residual_mean));
        if let Some(v) = self.diagnostics.lag1_autocorrelation {
            line("diag.lag1_autocorrelation", fmt_real(v));
        }
        if let Some(v) = self.diagnostics.durbin_watson {
            line("diag.durbin_watson", fmt_real(v));
        }
        if let Some(o) = self.ols {
            line("ols.x_mean", fmt_real(o.x_mean));
            line("ols.sxx", fmt_real(o.sxx));
        }
        s
    }

    /// Parses a block written by [`FittedModel::to_kv`]. Blank lines and
    /// `#` comments are ignored.
    pub fn from_kv(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: idx as u64 + 1,
                message: format!("expected 'key = value', got '{line}'"),
            })?;
            map.insert(k.trim().to_string(), (idx as u64 + 1, v.trim().to_string()));
        }
        let get = |k: &str| {
            map.get(k)
                .ok_or_else(|| Error::Parse {
                    line: 0,
                    message: format!("missing key '{k}'"),
                })
                .map(|(l, v)| (*l, v.as_str()))
        };
        let real = |k: &str| -> Result<Option<T>> {
            match map.get(k) {
                None => Ok(None),
                Some((l, v)) => v.parse::<T>().map(Some).map_err(|_| Error::Parse {
                    line: *l,
                    message: format!("'{k}' is not a number: '{v}'"),
                }),
            }
        };
        let need = |k: &str| -> Result<T> {
            real(k)?.ok_or_else(|| Error::Parse {
                line: 0,
                message: format!("missing key '{k}'"),
            })
        };

        let (l, kind) = get("kind")?;
        let kind = ModelKind::from_name(kind).ok_or_else(|| Error::Parse {
            line: l,
            message: format!("unknown model kind '{kind}'"),
        })?;
        let (l, n) = get("n")?;
        let n = n.parse::<usize>().map_err(|_| Error::Parse {
            line: l,
            message: format!("'n' is not a count: '{n}'"),
        })?;
        let names = std::iter::once("intercept").chain(kind.regressors().iter().map(|r| r.name()));
        let coefficients = names
            .map(|name| {
                Ok(Coefficient {
                    name: name.to_string(),
                    value: need(&format!("coef.{name}"))?,
                    half_width: real(&format!("coef.{name}.half_width"))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let ols = match (real("ols.x_mean")?, real("ols.sxx")?) {
            (Some(x_mean), Some(sxx)) => Some(OlsSummary { x_mean, sxx }),
            _ => None,
        };
        Ok(FittedModel {
            kind,
            coefficients,
            n,
            r_squared: need("r_squared")?,
            residual_sd: need("residual_sd")?,
            diagnostics: Diagnostics {
                residual_mean: need("diag.residual_mean")?,
                lag1_autocorrelation: real("diag.lag1_autocorrelation")?,
                durbin_watson: real("diag.durbin_watson")?,
            },
            ols,
        })
    }
}
