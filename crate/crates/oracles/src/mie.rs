//! Textbook Mie scattering for a real refractive index, built from
//! spherical Bessel functions (Miller's downward recurrence for jₙ, upward
//! recurrence for yₙ) and angular functions obtained from Legendre
//! polynomials. Returns |S₁|² and |S₂|².

use num_complex::Complex64;

/// Spherical Bessel jₙ(z), n = 0..=nmax, by normalized downward recurrence.
fn spherical_j(z: f64, nmax: usize) -> Vec<f64> {
    let start = nmax + 40 + z as usize;
    let mut vals = vec![0.0; start + 2];
    vals[start + 1] = 0.0;
    vals[start] = 1e-300;
    for n in (1..=start).rev() {
        vals[n - 1] = (2 * n + 1) as f64 / z * vals[n] - vals[n + 1];
        if vals[n - 1].abs() > 1e250 {
            for v in vals.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    let norm = (z.sin() / z) / vals[0];
    vals.truncate(nmax + 1);
    vals.iter().map(|v| v * norm).collect()
}

/// Spherical Bessel yₙ(z), n = 0..=nmax, by upward recurrence.
fn spherical_y(z: f64, nmax: usize) -> Vec<f64> {
    let mut y = vec![0.0; nmax + 1];
    y[0] = -z.cos() / z;
    if nmax >= 1 {
        y[1] = -z.cos() / (z * z) - z.sin() / z;
    }
    for n in 1..nmax {
        y[n + 1] = (2 * n + 1) as f64 / z * y[n] - y[n - 1];
    }
    y
}

/// π_n(cosθ) and τ_n(cosθ) for n = 1..=nmax, from Legendre P_n and its
/// first two derivatives. The poles use their closed forms.
fn angular(mu: f64, nmax: usize) -> (Vec<f64>, Vec<f64>) {
    let mut pi = vec![0.0; nmax + 1];
    let mut tau = vec![0.0; nmax + 1];
    if (mu.abs() - 1.0).abs() < 1e-14 {
        for n in 1..=nmax {
            let base = (n * (n + 1)) as f64 / 2.0;
            if mu > 0.0 {
                pi[n] = base;
                tau[n] = base;
            } else {
                let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
                pi[n] = sign * base;
                tau[n] = -sign * base;
            }
        }
        return (pi, tau);
    }
    // Legendre polynomials P_0..P_nmax
    let mut p = vec![0.0; nmax + 1];
    p[0] = 1.0;
    if nmax >= 1 {
        p[1] = mu;
    }
    for n in 1..nmax {
        p[n + 1] = ((2 * n + 1) as f64 * mu * p[n] - n as f64 * p[n - 1]) / (n + 1) as f64;
    }
    let s2 = 1.0 - mu * mu;
    for n in 1..=nmax {
        let nf = n as f64;
        // P_n' = n (P_{n−1} − μ P_n) / (1 − μ²)
        let dp = nf * (p[n - 1] - mu * p[n]) / s2;
        // Legendre ODE: (1 − μ²) P_n'' = 2μ P_n' − n(n+1) P_n
        let d2p = (2.0 * mu * dp - nf * (nf + 1.0) * p[n]) / s2;
        pi[n] = dp;
        tau[n] = mu * dp - s2 * d2p;
    }
    (pi, tau)
}

/// |S₁|², |S₂|² for size parameter `x`, real index `m`, angle in degrees,
/// summing `nmax` terms.
pub fn intensities(x: f64, m: f64, angle_deg: f64, nmax: usize) -> (f64, f64) {
    let mx = m * x;
    let jx = spherical_j(x, nmax);
    let yx = spherical_y(x, nmax);
    let jmx = spherical_j(mx, nmax);

    // ψ_n(z) = z j_n(z); ψ_n'(z) = z j_{n−1}(z) − n j_n(z)
    let psi = |j: &[f64], z: f64, n: usize| z * j[n];
    let dpsi = |j: &[f64], z: f64, n: usize| z * j[n - 1] - n as f64 * j[n];
    let xi = |n: usize| Complex64::new(x * jx[n], x * yx[n]);
    let dxi = |n: usize| Complex64::new(x * jx[n - 1] - n as f64 * jx[n], x * yx[n - 1] - n as f64 * yx[n]);

    let mu = angle_deg.to_radians().cos();
    let (pi, tau) = angular(mu, nmax);
    let mut s1 = Complex64::new(0.0, 0.0);
    let mut s2 = Complex64::new(0.0, 0.0);
    for n in 1..=nmax {
        let (pm, dpm) = (psi(&jmx, mx, n), dpsi(&jmx, mx, n));
        let (px, dpx) = (psi(&jx, x, n), dpsi(&jx, x, n));
        let a = (m * pm * dpx - px * dpm) / (m * pm * dxi(n) - xi(n) * dpm);
        let b = (pm * dpx - m * px * dpm) / (pm * dxi(n) - m * xi(n) * dpm);
        let f = (2 * n + 1) as f64 / (n * (n + 1)) as f64;
        s1 += f * (a * pi[n] + b * tau[n]);
        s2 += f * (a * tau[n] + b * pi[n]);
    }
    (s1.norm_sqr(), s2.norm_sqr())
}

/// Term count ⌈x + 4x^{1/3} + 2⌉.
pub fn wiscombe_terms(x: f64) -> usize {
    (x + 4.0 * x.cbrt() + 2.0).ceil() as usize
}
