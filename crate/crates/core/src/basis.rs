//! Families of instantaneous eigenfunctions parametrized by the flux.

use num_complex::Complex64;

use crate::error::Result;
use crate::gauge::RegaugeFunction;
use crate::grid::{Gauge, WavefunctionGrid};
use crate::ring::{eigenfunction_by, eigenfunction_periodic, RingConfig};
use crate::window::EigenIndex;

pub trait EigenBasis {
    fn gauge(&self) -> Gauge;

    fn sample(&self, k: EigenIndex, phi: f64, ring: &RingConfig, nx: usize) -> Result<WavefunctionGrid>;
}

/// Byers-Yang eigenfunctions with the parallel-transport phase `exp(i pi phi)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ParallelTransported;

impl EigenBasis for ParallelTransported {
    fn gauge(&self) -> Gauge {
        Gauge::ByersYang
    }

    fn sample(&self, k: EigenIndex, phi: f64, ring: &RingConfig, nx: usize) -> Result<WavefunctionGrid> {
        eigenfunction_by(k, phi, ring, nx)
    }
}

/// Flux-independent plane waves of the periodic gauge.
#[derive(Debug, Clone, Copy, Default)]
pub struct PlaneWaves;

impl EigenBasis for PlaneWaves {
    fn gauge(&self) -> Gauge {
        Gauge::Periodic
    }

    fn sample(&self, k: EigenIndex, phi: f64, ring: &RingConfig, nx: usize) -> Result<WavefunctionGrid> {
        let mut psi = eigenfunction_periodic(k, ring, nx)?;
        psi = WavefunctionGrid::from_parts(psi.into_samples(), Gauge::Periodic, phi, ring.circumference);
        Ok(psi)
    }
}

/// `base` with every eigenfunction multiplied by `exp(i eta_k(phi))`.
#[derive(Debug, Clone)]
pub struct Regauged<'a, B> {
    pub base: B,
    pub eta: &'a RegaugeFunction,
}

impl<B: EigenBasis> EigenBasis for Regauged<'_, B> {
    fn gauge(&self) -> Gauge {
        self.base.gauge()
    }

    fn sample(&self, k: EigenIndex, phi: f64, ring: &RingConfig, nx: usize) -> Result<WavefunctionGrid> {
        let psi = self.base.sample(k, phi, ring, nx)?;
        Ok(psi.scaled(Complex64::from_polar(1.0, self.eta.eta(k, phi))))
    }
}
