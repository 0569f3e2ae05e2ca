//! Closed-form spectral model of a clean ring threaded by a normalized flux `phi`.
//!
//! Units are hbar = m = 1. With the default circumference `2 pi` the spectrum
//! reduces to `E_k = (k - phi)^2 / 2`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Gauge, WavefunctionGrid};
use crate::window::{EigenIndex, Window};

/// Physical parameters of the ring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RingConfig {
    pub circumference: f64,
    pub charge: f64,
}

impl Default for RingConfig {
    fn default() -> Self {
        Self { circumference: TAU, charge: 1.0 }
    }
}

impl RingConfig {
    pub fn new(circumference: f64, charge: f64) -> Result<Self> {
        let ring = Self { circumference, charge };
        ring.validate()?;
        Ok(ring)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.circumference.is_finite() && self.circumference > 0.0) {
            return Err(Error::InvalidRing(format!(
                "circumference must be positive, got {}",
                self.circumference
            )));
        }
        if !self.charge.is_finite() || self.charge == 0.0 {
            return Err(Error::InvalidRing(format!("charge must be nonzero, got {}", self.charge)));
        }
        Ok(())
    }

    /// Wavenumber `2 pi (k - phi) / L` of the `k`-th state in the twisted frame.
    pub fn wavenumber(&self, k: EigenIndex, phi: f64) -> f64 {
        TAU * (k as f64 - phi) / self.circumference
    }

    /// Uniform tangential vector potential `A = 2 pi phi / (q L)` of the periodic gauge.
    pub fn vector_potential(&self, phi: f64) -> f64 {
        TAU * phi / (self.charge * self.circumference)
    }

    /// Coupled potential `q A`, the shift between canonical momentum and velocity.
    pub fn kinetic_shift(&self, phi: f64) -> f64 {
        self.charge * self.vector_potential(phi)
    }
}

pub fn eigenenergy(k: EigenIndex, phi: f64, ring: &RingConfig) -> f64 {
    let p = ring.wavenumber(k, phi);
    0.5 * p * p
}

/// `(k, E_k(phi))` for every `k` in `window`, ascending in energy with ties
/// broken by ascending `k`.
pub fn spectrum_window(phi: f64, ring: &RingConfig, window: Window) -> Vec<(EigenIndex, f64)> {
    let mut levels: Vec<_> = window.indices().map(|k| (k, eigenenergy(k, phi, ring))).collect();
    levels.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    levels
}

/// Periodic-gauge eigenfunction `exp(i 2 pi k x / L) / sqrt(L)`; independent of the flux.
pub fn eigenfunction_periodic(k: EigenIndex, ring: &RingConfig, nx: usize) -> Result<WavefunctionGrid> {
    check_grid(nx)?;
    let amp = 1.0 / ring.circumference.sqrt();
    let samples = (0..nx)
        .map(|j| Complex64::from_polar(amp, TAU * winding_fraction(k, j, nx)))
        .collect();
    Ok(WavefunctionGrid::from_parts(samples, Gauge::Periodic, 0.0, ring.circumference))
}

/// Parallel-transported Byers-Yang eigenfunction
/// `exp(i 2 pi (k - phi) x / L + i pi phi) / sqrt(L)`.
pub fn eigenfunction_by(k: EigenIndex, phi: f64, ring: &RingConfig, nx: usize) -> Result<WavefunctionGrid> {
    check_grid(nx)?;
    let amp = 1.0 / ring.circumference.sqrt();
    let samples = (0..nx)
        .map(|j| {
            let frac = j as f64 / nx as f64;
            let angle = TAU * winding_fraction(k, j, nx) - TAU * phi * frac + PI * phi;
            Complex64::from_polar(amp, angle)
        })
        .collect();
    Ok(WavefunctionGrid::from_parts(samples, Gauge::ByersYang, phi, ring.circumference))
}

/// Closed-form value of the Byers-Yang eigenfunction at any `x`, including `x = L`.
pub fn eigenfunction_by_at(k: EigenIndex, phi: f64, ring: &RingConfig, x: f64) -> Complex64 {
    let angle = ring.wavenumber(k, phi) * x + PI * phi;
    Complex64::from_polar(1.0 / ring.circumference.sqrt(), angle)
}

pub fn velocity_expectation(k: EigenIndex, phi: f64, ring: &RingConfig) -> f64 {
    ring.wavenumber(k, phi)
}

/// Probability current `2 pi (k - phi) / (m L^2)` with `m = 1`.
pub fn current_expectation(k: EigenIndex, phi: f64, ring: &RingConfig) -> f64 {
    ring.wavenumber(k, phi) / ring.circumference
}

// (k * j mod nx) / nx, reduced exactly so large windings keep full phase precision.
fn winding_fraction(k: EigenIndex, j: usize, nx: usize) -> f64 {
    let n = nx as i64;
    (k.rem_euclid(n) * j as i64).rem_euclid(n) as f64 / nx as f64
}

pub(crate) fn check_grid(nx: usize) -> Result<()> {
    if nx < 4 {
        return Err(Error::InvalidGrid { nx, reason: "at least 4 samples are required" });
    }
    Ok(())
}
