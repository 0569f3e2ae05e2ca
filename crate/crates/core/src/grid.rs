//! Sampled wavefunctions on the uniform left-closed grid `x_j = j L / nx`.

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::closed_samples;

/// Electromagnetic gauge a wavefunction is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Gauge {
    /// Uniform vector potential, strictly periodic wavefunctions.
    Periodic,
    /// Vector potential removed; `psi(L) = exp(-i 2 pi phi) psi(0)`.
    ByersYang,
}

impl fmt::Display for Gauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Gauge::Periodic => "periodic",
            Gauge::ByersYang => "byers-yang",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WavefunctionGrid {
    samples: Vec<Complex64>,
    gauge: Gauge,
    flux: f64,
    length: f64,
}

impl WavefunctionGrid {
    pub fn from_parts(samples: Vec<Complex64>, gauge: Gauge, flux: f64, length: f64) -> Self {
        Self { samples, gauge, flux, length }
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn gauge(&self) -> Gauge {
        self.gauge
    }

    pub fn flux(&self) -> f64 {
        self.flux
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn nx(&self) -> usize {
        self.samples.len()
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.nx() as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        self.length * j as f64 / self.nx() as f64
    }

    /// Factor `psi(L) / psi(0)` implied by the boundary condition.
    pub fn twist(&self) -> Complex64 {
        match self.gauge {
            Gauge::Periodic => Complex64::new(1.0, 0.0),
            Gauge::ByersYang => Complex64::from_polar(1.0, -TAU * self.flux),
        }
    }

    pub(crate) fn with_samples(&self, samples: Vec<Complex64>, gauge: Gauge, flux: f64) -> Self {
        Self { samples, gauge, flux, length: self.length }
    }

    /// Riemann-sum norm `sum |psi_j|^2 L / nx`.
    pub fn norm_sq(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.spacing()
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sq().sqrt();
        if n > 0.0 {
            self.samples.iter_mut().for_each(|z| *z /= n);
        }
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let samples = self.samples.iter().map(|z| z * factor).collect();
        self.with_samples(samples, self.gauge, self.flux)
    }

    /// Inner product `<self, other>` (antilinear in `self`).
    ///
    /// When the two boundary twists agree the integrand is periodic and the
    /// plain grid sum is spectrally accurate. Otherwise the integrand is
    /// continued to `x = L` through the twists and integrated with a closed
    /// Newton-Cotes rule.
    pub fn inner(&self, other: &WavefunctionGrid) -> Result<Complex64> {
        self.check_compatible(other)?;
        let h = self.spacing();
        let ratio = self.twist().conj() * other.twist();
        let products = self.samples.iter().zip(&other.samples).map(|(a, b)| a.conj() * b);
        if (ratio - 1.0).norm() < 1e-14 {
            return Ok(products.sum::<Complex64>() * h);
        }
        let mut values: Vec<Complex64> = products.collect();
        values.push(values[0] * ratio);
        Ok(closed_samples(&values, h))
    }

    /// `|<self, other>|^2`.
    pub fn fidelity(&self, other: &WavefunctionGrid) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    pub fn check_compatible(&self, other: &WavefunctionGrid) -> Result<()> {
        if self.gauge != other.gauge {
            return Err(Error::WrongGauge { expected: self.gauge, found: other.gauge });
        }
        if self.nx() != other.nx() {
            return Err(Error::GridMismatch(self.nx(), other.nx()));
        }
        Ok(())
    }

    /// Fourier weights `(p_n, |c_n|^2)` of the periodic-gauge representative,
    /// with `p_n` the canonical momentum of plane wave `n`.
    fn periodic_spectrum(&self) -> Vec<(f64, f64)> {
        let n = self.nx();
        let mut buf: Vec<Complex64> = match self.gauge {
            Gauge::Periodic => self.samples.clone(),
            Gauge::ByersYang => self
                .samples
                .iter()
                .enumerate()
                .map(|(j, z)| z * Complex64::from_polar(1.0, TAU * self.flux * j as f64 / n as f64))
                .collect(),
        };
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        buf.iter()
            .enumerate()
            .map(|(m, c)| {
                let signed = if m < n.div_ceil(2) { m as f64 } else { m as f64 - n as f64 };
                (TAU * signed / self.length, c.norm_sqr())
            })
            .collect()
    }

    /// Expectation of the gauge-covariant velocity, evaluated spectrally.
    ///
    /// Equals `<-i d/dx>` in the Byers-Yang gauge and `<-i d/dx - qA>` in the
    /// periodic gauge.
    pub fn velocity_expectation(&self) -> f64 {
        let shift = TAU * self.flux / self.length;
        self.spectral_mean(|p| p - shift)
    }

    /// Expectation of the kinetic energy `v^2 / 2`, evaluated spectrally.
    pub fn kinetic_expectation(&self) -> f64 {
        let shift = TAU * self.flux / self.length;
        self.spectral_mean(|p| 0.5 * (p - shift) * (p - shift))
    }

    fn spectral_mean(&self, f: impl Fn(f64) -> f64) -> f64 {
        let spectrum = self.periodic_spectrum();
        let total: f64 = spectrum.iter().map(|(_, w)| w).sum();
        spectrum.iter().map(|(p, w)| f(*p) * w).sum::<f64>() / total
    }

    /// `<x>` on `[0, L]` by the trapezoid rule, with the seam sample at `x = L`
    /// continued from `x = 0`.
    pub fn position_expectation(&self) -> f64 {
        let interior: f64 = (1..self.nx()).map(|j| self.x(j) * self.samples[j].norm_sqr()).sum();
        let seam = 0.5 * self.length * self.samples[0].norm_sqr();
        (interior + seam) * self.spacing() / self.norm_sq()
    }
}
