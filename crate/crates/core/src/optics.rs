//! Forward models of light-scattering PM instruments.
//!
//! Diameters are spherical optical-equivalent diameters in µm; densities are
//! g/cm³; masses come out in µg and concentrations in µg/m³. Only a single
//! observation angle is modelled, not an integrated solid angle.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Typical aerosol density, g/cm³.
pub const TYPICAL_DENSITY: f64 = 1.65;
/// Typical aerosol refractive index (real part; the imaginary part is 0).
pub const TYPICAL_REFRACTIVE_INDEX: f64 = 1.5;

const MAX_SIZE_PARAMETER: f64 = 1e4;
const CF_MAX_ITER: usize = 1_000_000;

/// Number of series terms ⌈x + 4x^{1/3} + 2⌉ needed for convergence.
pub fn series_terms<T: Real>(x: T) -> usize {
    let n = (x + T::lit(4.0) * x.cbrt() + T::lit(2.0)).ceil();
    n.to_usize().unwrap_or(usize::MAX)
}

/// Perpendicular and parallel intensity functions (|S₁|², |S₂|²) of Mie
/// theory for size parameter `x = πd/λ`, relative refractive index `m`
/// and scattering angle in degrees.
pub fn mie_intensity<T: Real>(x: T, m: Complex<T>, angle_deg: T) -> Result<(T, T)> {
    check_mie_inputs(x, m, angle_deg)?;
    mie_series(x, m, angle_deg, series_terms(x))
}

/// [`mie_intensity`] with an explicit number of series terms, for
/// convergence studies.
pub fn mie_intensity_with_terms<T: Real>(x: T, m: Complex<T>, angle_deg: T, n_terms: usize) -> Result<(T, T)> {
    check_mie_inputs(x, m, angle_deg)?;
    if n_terms == 0 {
        return Err(Error::InvalidInput("at least one series term is required".into()));
    }
    mie_series(x, m, angle_deg, n_terms)
}

fn check_mie_inputs<T: Real>(x: T, m: Complex<T>, angle_deg: T) -> Result<()> {
    if !(x.is_finite() && m.re.is_finite() && m.im.is_finite() && angle_deg.is_finite()) {
        return Err(Error::InvalidInput("Mie inputs must be finite".into()));
    }
    if x <= T::zero() {
        return Err(Error::InvalidInput(format!("size parameter must be positive, got {x}")));
    }
    if x > T::lit(MAX_SIZE_PARAMETER) {
        return Err(Error::OutOfRange(format!(
            "size parameter {x} exceeds {MAX_SIZE_PARAMETER:e}"
        )));
    }
    if m.re <= T::zero() || m.im < T::zero() {
        return Err(Error::InvalidInput(format!(
            "refractive index needs a positive real part and non-negative imaginary part, got {m}"
        )));
    }
    if angle_deg < T::zero() || angle_deg > T::lit(180.0) {
        return Err(Error::InvalidInput(format!("angle {angle_deg}° outside [0, 180]")));
    }
    Ok(())
}

/// ψₙ₋₁(z)/ψₙ(z) for the Riccati–Bessel ψ, i.e. J_{ν−1}/J_ν with ν = n + ½,
/// by modified Lentz evaluation of the continued fraction.
fn psi_ratio<T: Real>(n: usize, z: Complex<T>) -> Result<Complex<T>> {
    let tiny = Complex::new(T::min_positive_value().sqrt(), T::zero());
    let eps = T::epsilon();
    let nu = T::of_usize(n) + T::lit(0.5);
    let two = T::lit(2.0);
    let inv_z = Complex::new(T::one(), T::zero()) / z;
    let term = |k: usize| {
        let mag = two * (nu + T::of_usize(k - 1));
        let signed = if k % 2 == 1 { mag } else { -mag };
        inv_z * signed
    };
    let mut f = term(1);
    if f.norm_sqr() == T::zero() {
        f = tiny;
    }
    let (mut c, mut d) = (f, Complex::new(T::zero(), T::zero()));
    for k in 2..CF_MAX_ITER {
        let a = term(k);
        d = a + d;
        if d.norm_sqr() == T::zero() {
            d = tiny;
        }
        d = d.inv();
        c = a + c.inv();
        if c.norm_sqr() == T::zero() {
            c = tiny;
        }
        let delta = c * d;
        f = f * delta;
        if (delta - Complex::new(T::one(), T::zero())).norm() < eps {
            return Ok(f);
        }
    }
    Err(Error::OutOfRange(format!(
        "continued fraction did not converge at n = {n}"
    )))
}

/// Logarithmic derivatives Dₙ(z) = ψₙ′/ψₙ for n = 0..=n_terms, seeded by
/// the continued fraction at the top and recurred downward.
fn log_derivatives<T: Real>(z: Complex<T>, n_terms: usize) -> Result<Vec<Complex<T>>> {
    let mut d = vec![Complex::new(T::zero(), T::zero()); n_terms + 1];
    let n_over_z = |n: usize| Complex::new(T::of_usize(n), T::zero()) / z;
    d[n_terms] = psi_ratio(n_terms, z)? - n_over_z(n_terms);
    for n in (1..=n_terms).rev() {
        let nz = n_over_z(n);
        d[n - 1] = nz - (d[n] + nz).inv();
    }
    Ok(d)
}

fn mie_series<T: Real>(x: T, m: Complex<T>, angle_deg: T, n_terms: usize) -> Result<(T, T)> {
    let zero = Complex::new(T::zero(), T::zero());
    let xc = Complex::new(x, T::zero());
    let d_mx = log_derivatives(m * x, n_terms)?;
    let d_x = log_derivatives(xc, n_terms)?;
    let mu = angle_deg.to_radians().cos();

    let (sin_x, cos_x) = x.sin_cos();
    let (mut psi_prev, mut chi_prev, mut chi_prev2) = (sin_x, cos_x, -sin_x);
    let (mut pi_prev, mut pi_cur) = (T::zero(), T::one());
    let (mut s1, mut s2) = (zero, zero);

    for n in 1..=n_terms {
        let nf = T::of_usize(n);
        let n_over_x = nf / x;
        let psi = psi_prev / (d_x[n].re + n_over_x);
        let chi = (T::of_usize(2 * n - 1) / x) * chi_prev - chi_prev2;
        let xi = Complex::new(psi, -chi);
        let xi_prev = Complex::new(psi_prev, -chi_prev);

        let ga = d_mx[n] / m + n_over_x;
        let gb = d_mx[n] * m + n_over_x;
        let a = (ga * psi - psi_prev) / (ga * xi - xi_prev);
        let b = (gb * psi - psi_prev) / (gb * xi - xi_prev);

        let tau = nf * mu * pi_cur - (nf + T::one()) * pi_prev;
        let weight = T::of_usize(2 * n + 1) / (nf * (nf + T::one()));
        s1 = s1 + (a * pi_cur + b * tau) * weight;
        s2 = s2 + (a * tau + b * pi_cur) * weight;

        let pi_next = (T::of_usize(2 * n + 1) / nf) * mu * pi_cur - ((nf + T::one()) / nf) * pi_prev;
        pi_prev = pi_cur;
        pi_cur = pi_next;
        psi_prev = psi;
        chi_prev2 = chi_prev;
        chi_prev = chi;
    }
    let (i1, i2) = (s1.norm_sqr(), s2.norm_sqr());
    if !(i1.is_finite() && i2.is_finite()) {
        return Err(Error::OutOfRange(format!("Mie series overflowed at x = {x}")));
    }
    Ok((i1, i2))
}

/// Mass in µg of a sphere of `density` g/cm³ and `diameter` µm.
pub fn particle_mass<T: Real>(density: T, diameter: T) -> Result<T> {
    if !(density.is_finite() && diameter.is_finite()) {
        return Err(Error::InvalidInput("density and diameter must be finite".into()));
    }
    if density <= T::zero() || diameter < T::zero() {
        return Err(Error::InvalidInput(format!(
            "need density > 0 and diameter >= 0, got {density} and {diameter}"
        )));
    }
    // µm³ → cm³ is 1e-12, g → µg is 1e6
    Ok(density * T::PI() * diameter.powi(3) / T::lit(6.0) * T::lit(1e-6))
}

/// Discrete number or mass weights over diameter-bin midpoints (µm).
#[derive(Clone, Debug, PartialEq)]
pub struct SizeDistribution<T> {
    bins: Vec<(T, T)>,
}

impl<T: Real> SizeDistribution<T> {
    /// Builds a distribution from `(diameter, weight)` pairs in any order.
    /// Weights must be non-negative and sum to 1 within 1e-9; diameters
    /// must be positive and distinct.
    pub fn new(bins: impl IntoIterator<Item = (T, T)>) -> Result<Self> {
        let mut bins: Vec<(T, T)> = bins.into_iter().collect();
        if bins.is_empty() {
            return Err(Error::InvalidInput("size distribution is empty".into()));
        }
        for &(d, w) in &bins {
            if !(d.is_finite() && w.is_finite()) || d <= T::zero() || w < T::zero() {
                return Err(Error::InvalidInput(format!("invalid size bin ({d} µm, weight {w})")));
            }
        }
        let total: T = bins.iter().map(|b| b.1).sum();
        if (total - T::one()).abs() > T::lit(1e-9) {
            return Err(Error::InvalidInput(format!("size weights sum to {total}, not 1")));
        }
        bins.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite diameters"));
        if bins.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidInput("duplicate size-bin midpoint".into()));
        }
        Ok(SizeDistribution { bins })
    }

    /// A single diameter carrying all the weight.
    pub fn monodisperse(diameter: T) -> Result<Self> {
        SizeDistribution::new([(diameter, T::one())])
    }

    /// Bins as `(diameter, weight)`, diameters strictly increasing.
    pub fn bins(&self) -> &[(T, T)] {
        &self.bins
    }
}

/// Particle properties assumed when converting optical signals to mass.
#[derive(Clone, Debug, PartialEq)]
pub struct AerosolAssumptions<T> {
    /// g/cm³.
    pub density: T,
    pub refractive_index: Complex<T>,
    pub size_distribution: SizeDistribution<T>,
    /// Upper diameter limit D of the mass fraction, µm.
    pub cut_diameter: T,
}

impl<T: Real> AerosolAssumptions<T> {
    /// ρ = 1.65 g/cm³ and n = 1.5 + 0i.
    pub fn typical(size_distribution: SizeDistribution<T>, cut_diameter: T) -> Self {
        AerosolAssumptions {
            density: T::lit(TYPICAL_DENSITY),
            refractive_index: Complex::new(T::lit(TYPICAL_REFRACTIVE_INDEX), T::zero()),
            size_distribution,
            cut_diameter,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.refractive_index;
        if !(self.density.is_finite() && self.density > T::zero()) {
            return Err(Error::InvalidInput(format!(
                "density must be positive, got {}",
                self.density
            )));
        }
        if !(m.re.is_finite() && m.im.is_finite()) || m.re < T::one() || m.im < T::zero() {
            return Err(Error::InvalidInput(format!(
                "refractive index needs real part >= 1 and imaginary part >= 0, got {m}"
            )));
        }
        if !(self.cut_diameter.is_finite() && self.cut_diameter > T::zero()) {
            return Err(Error::InvalidInput(format!(
                "cut diameter must be positive, got {}",
                self.cut_diameter
            )));
        }
        Ok(())
    }
}

/// Light source and detector arrangement of a photometer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OpticalGeometry<T> {
    /// µm.
    pub wavelength: T,
    /// Degrees, strictly between 0 and 180.
    pub observation_angle: T,
    /// Instrument constant obtained by calibration.
    pub calibration_constant: T,
}

impl<T: Real> OpticalGeometry<T> {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: T| v.is_finite() && v > T::zero();
        if !ok(self.wavelength) || !ok(self.calibration_constant) {
            return Err(Error::InvalidInput(
                "wavelength and calibration constant must be positive and finite".into(),
            ));
        }
        if !ok(self.observation_angle) || self.observation_angle >= T::lit(180.0) {
            return Err(Error::InvalidInput(format!(
                "observation angle {}° outside (0, 180)",
                self.observation_angle
            )));
        }
        Ok(())
    }
}

/// Particle counts of an optical particle counter over one sampling period.
#[derive(Clone, Debug, PartialEq)]
pub struct BinCounts<T> {
    /// µm, strictly increasing.
    pub bin_midpoints: Vec<T>,
    pub counts: Vec<u64>,
    /// L/min.
    pub flow_rate: T,
    /// Seconds.
    pub duration: T,
}

impl<T: Real> BinCounts<T> {
    pub fn validate(&self) -> Result<()> {
        if self.bin_midpoints.len() != self.counts.len() {
            return Err(Error::InvalidInput(format!(
                "{} bin midpoints but {} counts",
                self.bin_midpoints.len(),
                self.counts.len()
            )));
        }
        if self.bin_midpoints.iter().any(|d| !d.is_finite() || *d < T::zero())
            || self.bin_midpoints.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::InvalidInput(
                "bin midpoints must be finite, non-negative and strictly increasing".into(),
            ));
        }
        Ok(())
    }

    /// Sampled air volume in m³.
    pub fn sampled_volume(&self) -> T {
        self.flow_rate * self.duration / T::lit(60.0) * T::lit(1e-3)
    }
}

/// Mass concentration (µg/m³) of particles up to the cut diameter, from
/// OPC bin counts.
pub fn opc_mass_concentration<T: Real>(bins: &BinCounts<T>, assumptions: &AerosolAssumptions<T>) -> Result<T> {
    bins.validate()?;
    assumptions.validate()?;
    let volume = bins.sampled_volume();
    if !(volume.is_finite() && volume > T::zero()) {
        return Err(Error::InvalidInput(format!(
            "sampled volume must be positive, got {volume} m³"
        )));
    }
    let mut mass = T::zero();
    for (&d, &count) in bins.bin_midpoints.iter().zip(&bins.counts) {
        if d <= assumptions.cut_diameter {
            let count = T::from_u64(count).expect("count representable");
            mass = mass + count * particle_mass(assumptions.density, d)?;
        }
    }
    Ok(mass / volume)
}

/// Signal per unit mass concentration of a photometric nephelometer:
/// K′ · Σ f(d)/(ρd³) · (i₁ + i₂), each term at x = πd/λ.
pub fn pnm_sensitivity<T: Real>(assumptions: &AerosolAssumptions<T>, geometry: &OpticalGeometry<T>) -> Result<T> {
    assumptions.validate()?;
    geometry.validate()?;
    let bins = assumptions.size_distribution.bins();
    if let Some(&(d, _)) = bins
        .iter()
        .find(|&&(d, w)| w > T::zero() && d > assumptions.cut_diameter)
    {
        return Err(Error::InvalidInput(format!(
            "size distribution has weight at {d} µm, beyond the cut diameter {} µm",
            assumptions.cut_diameter
        )));
    }
    let mut sum = T::zero();
    for &(d, w) in bins {
        if w == T::zero() {
            continue;
        }
        let x = T::PI() * d / geometry.wavelength;
        let (i1, i2) = mie_intensity(x, assumptions.refractive_index, geometry.observation_angle)?;
        sum = sum + w / (assumptions.density * d.powi(3)) * (i1 + i2);
    }
    Ok(geometry.calibration_constant * sum)
}

/// Forward photometer model: signal produced by `concentration` µg/m³.
pub fn pnm_signal<T: Real>(concentration: T, sensitivity: T) -> T {
    concentration * sensitivity
}

/// Mass concentration (µg/m³) implied by a photometer signal.
pub fn pnm_mass_from_signal<T: Real>(signal: T, sensitivity: T) -> Result<T> {
    if !(signal.is_finite() && sensitivity.is_finite()) {
        return Err(Error::InvalidInput("signal and sensitivity must be finite".into()));
    }
    if sensitivity <= T::zero() {
        return Err(Error::InvalidInput(format!(
            "sensitivity must be positive, got {sensitivity}"
        )));
    }
    Ok(signal / sensitivity)
}
