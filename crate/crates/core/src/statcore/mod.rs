//! Statistical primitives shared by calibration and evaluation: sample
//! moments, Pearson correlation, and Student-t / chi-square quantiles.
//!
//! Quantiles are found by bracketed, safeguarded Newton inversion of the
//! regularized incomplete beta and gamma CDFs. Upper-tail probabilities are
//! inverted directly for p > 0.5 so that no precision is lost to `1 − p`
//! cancellation.

pub mod special;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Count, mean and sample standard deviation (n − 1 denominator).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleStats<T> {
    pub n: usize,
    pub mean: T,
    /// `None` when n = 1.
    pub sd: Option<T>,
}

/// Sample mean and standard deviation. Uses a two-pass algorithm.
pub fn sample_stats<T: Real>(values: &[T]) -> Result<SampleStats<T>> {
    let n = values.len();
    if n == 0 {
        return Err(Error::InvalidInput("sample statistics of an empty sequence".into()));
    }
    let mean = crate::scalar::mean(values);
    let sd = (n >= 2).then(|| {
        let ss: T = values.iter().map(|&v| (v - mean) * (v - mean)).sum();
        (ss / T::of_usize(n - 1)).sqrt()
    });
    Ok(SampleStats { n, mean, sd })
}

fn check_p<T: Real>(p: T) -> Result<()> {
    if !(p > T::zero() && p < T::one()) {
        return Err(Error::OutOfRange(format!("probability {p} outside (0, 1)")));
    }
    Ok(())
}

fn check_df<T: Real>(df: T) -> Result<()> {
    if !df.is_finite() || df < T::one() {
        return Err(Error::OutOfRange(format!("degrees of freedom {df} must be >= 1")));
    }
    Ok(())
}

/// Solves `f(x) = 0` for increasing `f` on `[lo, hi]` with `f(lo) <= 0 <= f(hi)`,
/// using Newton steps that fall back to bisection when they leave the bracket.
fn solve_increasing<T: Real>(f: impl Fn(T) -> T, df: impl Fn(T) -> T, mut lo: T, mut hi: T, guess: T) -> T {
    let two = T::lit(2.0);
    let mut x = if guess > lo && guess < hi {
        guess
    } else {
        (lo + hi) / two
    };
    for _ in 0..400 {
        let fx = f(x);
        if fx == T::zero() {
            return x;
        }
        if fx < T::zero() {
            lo = x;
        } else {
            hi = x;
        }
        let slope = df(x);
        let newton = x - fx / slope;
        let next = if slope > T::zero() && newton > lo && newton < hi {
            newton
        } else {
            (lo + hi) / two
        };
        let tol = T::lit(4.0) * T::epsilon() * next.abs().max(T::min_positive_value());
        if (next - x).abs() <= tol || (hi - lo) <= tol {
            return next;
        }
        x = next;
    }
    x
}

/// Student-t probability density.
pub fn t_pdf<T: Real>(t: T, df: T) -> T {
    use special::ln_gamma;
    let half = T::lit(0.5);
    let ln = ln_gamma((df + T::one()) * half)
        - ln_gamma(df * half)
        - half * (df * T::PI()).ln()
        - (df + T::one()) * half * (t * t / df).ln_1p();
    ln.exp()
}

/// P(T > t) for t ≥ 0.
fn t_upper<T: Real>(t: T, df: T) -> T {
    let half = T::lit(0.5);
    let denom = df + t * t;
    half * special::beta_reg(df * half, half, df / denom, t * t / denom)
}

/// Student-t cumulative distribution function.
pub fn t_cdf<T: Real>(t: T, df: T) -> Result<T> {
    check_df(df)?;
    Ok(if t >= T::zero() {
        T::one() - t_upper(t, df)
    } else {
        t_upper(-t, df)
    })
}

/// Quantile of Student's t distribution with `df` degrees of freedom.
pub fn t_quantile<T: Real>(p: T, df: T) -> Result<T> {
    check_p(p)?;
    check_df(df)?;
    let half = T::lit(0.5);
    if p == half {
        return Ok(T::zero());
    }
    // Solve the upper tail P(T > t) = q for t > 0, then reflect.
    let (q, sign) = if p > half {
        (T::one() - p, T::one())
    } else {
        (p, -T::one())
    };
    let mut hi = T::one();
    while t_upper(hi, df) > q {
        hi = hi * T::lit(2.0);
        if !hi.is_finite() {
            return Err(Error::OutOfRange(format!("t quantile for p = {p} overflows")));
        }
    }
    let t = solve_increasing(|t| q - t_upper(t, df), |t| t_pdf(t, df), T::zero(), hi, hi * half);
    Ok(sign * t)
}

/// Chi-square probability density.
pub fn chi2_pdf<T: Real>(x: T, df: T) -> T {
    if x <= T::zero() {
        return T::zero();
    }
    let half = T::lit(0.5);
    let k = df * half;
    ((k - T::one()) * x.ln() - x * half - k * T::LN_2() - special::ln_gamma(k)).exp()
}

/// Chi-square cumulative distribution function.
pub fn chi2_cdf<T: Real>(x: T, df: T) -> Result<T> {
    check_df(df)?;
    let half = T::lit(0.5);
    Ok(special::gamma_p(df * half, x * half))
}

/// Quantile of the chi-square distribution with `df` degrees of freedom.
pub fn chi2_quantile<T: Real>(p: T, df: T) -> Result<T> {
    check_p(p)?;
    check_df(df)?;
    let half = T::lit(0.5);
    let k = df * half;
    let lower = p <= half;
    // Residual oriented so that it increases with x in both branches.
    let resid = |x: T| {
        if lower {
            special::gamma_p(k, x * half) - p
        } else {
            (T::one() - p) - special::gamma_q(k, x * half)
        }
    };
    let mut hi = df + T::lit(10.0) * (T::lit(2.0) * df).sqrt() + T::lit(10.0);
    while resid(hi) < T::zero() {
        hi = hi * T::lit(2.0);
        if !hi.is_finite() {
            return Err(Error::OutOfRange(format!("chi-square quantile for p = {p} overflows")));
        }
    }
    Ok(solve_increasing(
        resid,
        |x| chi2_pdf(x, df),
        T::zero(),
        hi,
        wilson_hilferty(p, df),
    ))
}

/// Wilson–Hilferty starting point for the chi-square quantile.
fn wilson_hilferty<T: Real>(p: T, df: T) -> T {
    let z = normal_quantile_approx(p);
    let c = T::lit(2.0) / (T::lit(9.0) * df);
    let base = T::one() - c + z * c.sqrt();
    df * base * base * base
}

/// Rational approximation to the standard-normal quantile (|error| < 5e-4).
/// Used only to seed Newton iterations.
fn normal_quantile_approx<T: Real>(p: T) -> T {
    let half = T::lit(0.5);
    let (q, sign) = if p < half {
        (p, -T::one())
    } else {
        (T::one() - p, T::one())
    };
    let t = (T::lit(-2.0) * q.ln()).sqrt();
    let num = T::lit(2.515_517) + T::lit(0.802_853) * t + T::lit(0.010_328) * t * t;
    let den = T::one() + T::lit(1.432_788) * t + T::lit(0.189_269) * t * t + T::lit(0.001_308) * t * t * t;
    sign * (t - num / den)
}

/// Pearson correlation coefficient, clamped to [−1, 1].
pub fn pearson_r<T: Real>(x: &[T], y: &[T]) -> Result<T> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput("correlation inputs differ in length".into()));
    }
    if x.len() < 2 {
        return Err(Error::InvalidInput("correlation needs at least two pairs".into()));
    }
    let mx = crate::scalar::mean(x);
    let my = crate::scalar::mean(y);
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&a, &b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy = sxy + dx * dy;
        sxx = sxx + dx * dx;
        syy = syy + dy * dy;
    }
    if sxx == T::zero() || syy == T::zero() {
        return Err(Error::Undefined("correlation with a zero-variance column".into()));
    }
    let r = sxy / (sxx * syy).sqrt();
    Ok(r.max(-T::one()).min(T::one()))
}
