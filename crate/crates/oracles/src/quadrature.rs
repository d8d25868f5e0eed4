//! Brute-force distribution quantiles: integrate the unnormalized density
//! with composite Gauss–Legendre quadrature, normalize by the numerically
//! integrated total mass, and invert by bisection. No special functions are
//! involved, so nothing is shared with a CDF-based implementation.

use std::f64::consts::{FRAC_PI_2, PI};

const ORDER: usize = 16;

/// Gauss–Legendre nodes and weights on [−1, 1].
fn gauss_legendre() -> ([f64; ORDER], [f64; ORDER]) {
    let mut nodes = [0.0; ORDER];
    let mut weights = [0.0; ORDER];
    for i in 0..ORDER {
        let mut x = (PI * (i as f64 + 0.75) / (ORDER as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=ORDER {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = ORDER as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

struct Integrator {
    nodes: [f64; ORDER],
    weights: [f64; ORDER],
}

impl Integrator {
    fn new() -> Self {
        let (nodes, weights) = gauss_legendre();
        Integrator { nodes, weights }
    }

    fn panel(&self, f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
        half * self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
    }

    /// Finds `v` in `[lo, hi]` with `∫_lo^v f = target · ∫_lo^hi f`.
    fn invert(&self, f: impl Fn(f64) -> f64, lo: f64, hi: f64, panels: usize, target: f64) -> f64 {
        let h = (hi - lo) / panels as f64;
        let masses: Vec<f64> = (0..panels)
            .map(|k| self.panel(&f, lo + k as f64 * h, lo + (k + 1) as f64 * h))
            .collect();
        let total: f64 = masses.iter().sum();
        let goal = target * total;
        let mut acc = 0.0;
        let mut k = 0;
        while k + 1 < panels && acc + masses[k] < goal {
            acc += masses[k];
            k += 1;
        }
        let a = lo + k as f64 * h;
        let (mut left, mut right) = (a, a + h);
        for _ in 0..200 {
            let mid = 0.5 * (left + right);
            if acc + self.panel(&f, a, mid) < goal {
                left = mid;
            } else {
                right = mid;
            }
            if right - left <= 1e-15 * mid.abs().max(1e-300) {
                break;
            }
        }
        0.5 * (left + right)
    }
}

/// Student-t quantile. Integrates in φ = atan(t), where the density times
/// the Jacobian is bounded for every df ≥ 1.
pub fn t_quantile(p: f64, df: f64) -> f64 {
    let log_g = |phi: f64| {
        let t = phi.tan();
        let sec2 = 1.0 + t * t;
        -(df + 1.0) / 2.0 * (t * t / df).ln_1p() + sec2.ln()
    };
    let f = |phi: f64| log_g(phi).exp();
    let lo = -FRAC_PI_2 + 1e-12;
    let hi = FRAC_PI_2 - 1e-12;
    Integrator::new().invert(f, lo, hi, 2000, p).tan()
}

/// Chi-square quantile. Integrates in u = √x, where the transformed
/// density 2u^{k−1}e^{−u²/2} is finite at the origin for every df ≥ 1;
/// it is evaluated relative to its mode to avoid overflow.
pub fn chi2_quantile(p: f64, df: f64) -> f64 {
    let mode = (df - 1.0).max(0.0).sqrt();
    let log_h = |u: f64| {
        if u <= 0.0 {
            return if df == 1.0 { 0.0 } else { f64::NEG_INFINITY };
        }
        (df - 1.0) * u.ln() - u * u / 2.0
    };
    let peak = log_h(mode.max(1e-300));
    let f = |u: f64| (log_h(u) - peak).exp();
    let lo = (df.sqrt() - 40.0).max(0.0);
    let hi = df.sqrt() + 40.0;
    let u = Integrator::new().invert(f, lo, hi, 4000, p);
    u * u
}
