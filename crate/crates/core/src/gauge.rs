//! Byers-Yang gauge transformation and the covariance laws under a change of
//! eigenfunction phases `psi_k -> psi_k exp(i eta_k(phi))`.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::connection::{ConnectionMatrix, HolonomyMatrix};
use crate::error::{Error, Result};
use crate::grid::{Gauge, WavefunctionGrid};
use crate::ring::RingConfig;
use crate::window::{EigenIndex, Window};

/// Multiply by `exp(-i q int_0^x A) = exp(-i 2 pi phi x / L)`.
pub fn to_byers_yang(psi: &WavefunctionGrid, phi: f64, ring: &RingConfig) -> Result<WavefunctionGrid> {
    expect_gauge(psi, Gauge::Periodic)?;
    Ok(psi.with_samples(apply_ramp(psi, -phi, ring), Gauge::ByersYang, phi))
}

/// Inverse of [`to_byers_yang`]: multiply by `exp(+i 2 pi phi x / L)`.
pub fn from_byers_yang(psi: &WavefunctionGrid, phi: f64, ring: &RingConfig) -> Result<WavefunctionGrid> {
    expect_gauge(psi, Gauge::ByersYang)?;
    Ok(psi.with_samples(apply_ramp(psi, phi, ring), Gauge::Periodic, phi))
}

fn expect_gauge(psi: &WavefunctionGrid, expected: Gauge) -> Result<()> {
    if psi.gauge() != expected {
        return Err(Error::WrongGauge { expected, found: psi.gauge() });
    }
    Ok(())
}

fn apply_ramp(psi: &WavefunctionGrid, phi: f64, ring: &RingConfig) -> Vec<Complex64> {
    let nx = psi.nx();
    debug_assert!((psi.length() - ring.circumference).abs() <= 1e-12 * ring.circumference);
    psi.samples()
        .iter()
        .enumerate()
        .map(|(j, z)| z * Complex64::from_polar(1.0, TAU * phi * j as f64 / nx as f64))
        .collect()
}

/// One sinusoidal component of a [`PhaseProfile`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    pub amplitude: f64,
    pub frequency: f64,
    pub phase: f64,
}

/// Smooth phase `offset + slope * phi + sum a sin(w phi + p)` with analytic derivative.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PhaseProfile {
    pub offset: f64,
    pub slope: f64,
    pub harmonics: Vec<Harmonic>,
}

impl PhaseProfile {
    pub fn constant(offset: f64) -> Self {
        Self { offset, ..Default::default() }
    }

    pub fn linear(slope: f64) -> Self {
        Self { slope, ..Default::default() }
    }

    pub fn value(&self, phi: f64) -> f64 {
        self.offset
            + self.slope * phi
            + self.harmonics.iter().map(|h| h.amplitude * (h.frequency * phi + h.phase).sin()).sum::<f64>()
    }

    pub fn derivative(&self, phi: f64) -> f64 {
        self.slope
            + self
                .harmonics
                .iter()
                .map(|h| h.amplitude * h.frequency * (h.frequency * phi + h.phase).cos())
                .sum::<f64>()
    }
}

/// Per-index phase functions `eta_k(phi)` over a window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegaugeFunction {
    window: Window,
    profiles: Vec<PhaseProfile>,
}

impl RegaugeFunction {
    pub fn new(window: Window, profiles: Vec<PhaseProfile>) -> Result<Self> {
        if profiles.len() != window.len() {
            return Err(Error::InvalidParameter(format!(
                "{} phase profiles for a window of {} indices",
                profiles.len(),
                window.len()
            )));
        }
        Ok(Self { window, profiles })
    }

    pub fn uniform(window: Window, profile: PhaseProfile) -> Self {
        Self { window, profiles: vec![profile; window.len()] }
    }

    pub fn zero(window: Window) -> Self {
        Self::uniform(window, PhaseProfile::default())
    }

    /// Random smooth draw: offset, slope and two harmonics per index.
    pub fn random<R: Rng + ?Sized>(window: Window, rng: &mut R) -> Self {
        let profiles = window
            .indices()
            .map(|_| PhaseProfile {
                offset: rng.gen_range(-PI..PI),
                slope: rng.gen_range(-2.0..2.0),
                harmonics: (0..2)
                    .map(|_| Harmonic {
                        amplitude: rng.gen_range(0.0..1.0),
                        frequency: rng.gen_range(0.5..3.0),
                        phase: rng.gen_range(-PI..PI),
                    })
                    .collect(),
            })
            .collect();
        Self { window, profiles }
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn profile(&self, k: EigenIndex) -> Option<&PhaseProfile> {
        self.window.position(k).map(|p| &self.profiles[p])
    }

    pub fn eta(&self, k: EigenIndex, phi: f64) -> f64 {
        self.profile(k).map_or(0.0, |p| p.value(phi))
    }

    pub fn eta_derivative(&self, k: EigenIndex, phi: f64) -> f64 {
        self.profile(k).map_or(0.0, |p| p.derivative(phi))
    }

    fn phases(&self, phi: f64) -> Vec<f64> {
        self.profiles.iter().map(|p| p.value(phi)).collect()
    }

    fn derivatives(&self, phi: f64) -> Vec<f64> {
        self.profiles.iter().map(|p| p.derivative(phi)).collect()
    }
}

/// `A'_{ab} = exp(-i (eta_a - eta_b)) A_{ab} - eta_b' delta_{ab}`, at the matrix's own flux.
pub fn regauge_connection(a: &ConnectionMatrix, eta: &RegaugeFunction) -> Result<ConnectionMatrix> {
    a.window().ensure_same(&eta.window)?;
    let phi = a.flux();
    let entries = regauged_connection_entries(a.entries(), &eta.phases(phi), &eta.derivatives(phi));
    ConnectionMatrix::new(a.window(), phi, entries)
}

pub(crate) fn regauged_connection_entries(a: &DMatrix<Complex64>, eta: &[f64], deta: &[f64]) -> DMatrix<Complex64> {
    let n = eta.len();
    DMatrix::from_fn(n, n, |r, c| {
        let mut z = a[(r, c)] * Complex64::from_polar(1.0, -(eta[r] - eta[c]));
        if r == c {
            z -= deta[r];
        }
        z
    })
}

/// `W'_{ab} = exp(-i eta_a(phi')) W_{ab} exp(i eta_b(phi''))`.
pub fn regauge_w(w: &HolonomyMatrix, eta: &RegaugeFunction) -> Result<HolonomyMatrix> {
    w.window().ensure_same(&eta.window)?;
    let (start, end) = w.path();
    Ok(conjugate_phases(w, &eta.phases(start), &eta.phases(end)))
}

/// `M'_{ab} = exp(-i eta_a(phi')) M_{ab} exp(i eta_b(phi'))`; both phases at the base point.
pub fn regauge_holonomy(m: &HolonomyMatrix, eta: &RegaugeFunction) -> Result<HolonomyMatrix> {
    m.window().ensure_same(&eta.window)?;
    let start = eta.phases(m.path().0);
    Ok(conjugate_phases(m, &start, &start))
}

fn conjugate_phases(m: &HolonomyMatrix, left: &[f64], right: &[f64]) -> HolonomyMatrix {
    let n = left.len();
    let entries = DMatrix::from_fn(n, n, |r, c| {
        Complex64::from_polar(1.0, -left[r]) * m.entries()[(r, c)] * Complex64::from_polar(1.0, right[c])
    });
    m.with_entries(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::{connection_analytic, w_matrix_closed_matrix, HolonomyKind};
    use crate::ring::{eigenfunction_by, eigenfunction_periodic};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ring() -> RingConfig {
        RingConfig::default()
    }

    fn max_diff(a: &WavefunctionGrid, b: &WavefunctionGrid) -> f64 {
        a.samples().iter().zip(b.samples()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn zero_flux_transform_is_identity() {
        let psi = eigenfunction_periodic(3, &ring(), 32).unwrap();
        let by = to_byers_yang(&psi, 0.0, &ring()).unwrap();
        assert_eq!(by.gauge(), Gauge::ByersYang);
        assert_eq!(by.samples(), psi.samples());
    }

    #[test]
    fn transform_builds_the_parallel_transported_eigenfunction() {
        let r = ring();
        for k in [-2, 0, 1, 5] {
            for phi in [0.0, 0.3, 0.5, 1.25] {
                let psi = eigenfunction_periodic(k, &r, 128).unwrap().scaled(Complex64::from_polar(1.0, PI * phi));
                let by = to_byers_yang(&psi, phi, &r).unwrap();
                let want = eigenfunction_by(k, phi, &r, 128).unwrap();
                assert!(max_diff(&by, &want) < 1e-12);
                assert!((by.norm_sq() - 1.0).abs() < 1e-12);

                let back = from_byers_yang(&want, phi, &r).unwrap();
                assert!(max_diff(&back, &psi) < 1e-12);
            }
        }
    }

    #[test]
    fn round_trip_is_identity() {
        let r = ring();
        let psi = eigenfunction_periodic(2, &r, 64).unwrap();
        let trip = from_byers_yang(&to_byers_yang(&psi, 0.73, &r).unwrap(), 0.73, &r).unwrap();
        assert!(max_diff(&trip, &psi) < 1e-14);
        assert!((trip.norm_sq() - psi.norm_sq()).abs() < 1e-14);
    }

    #[test]
    fn wrong_input_gauge_is_rejected() {
        let r = ring();
        let psi = eigenfunction_by(0, 0.2, &r, 16).unwrap();
        assert!(matches!(to_byers_yang(&psi, 0.2, &r), Err(Error::WrongGauge { .. })));
        let psi = eigenfunction_periodic(0, &r, 16).unwrap();
        assert!(matches!(from_byers_yang(&psi, 0.2, &r), Err(Error::WrongGauge { .. })));
    }

    #[test]
    fn profile_derivative_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let eta = RegaugeFunction::random(Window::symmetric(3), &mut rng);
        for k in eta.window().indices() {
            for phi in [-0.4, 0.0, 0.6, 1.3] {
                let h = 1e-5;
                let fd = (eta.eta(k, phi + h) - eta.eta(k, phi - h)) / (2.0 * h);
                assert!((fd - eta.eta_derivative(k, phi)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn trivial_regauges_leave_the_connection_alone() {
        let w = Window::symmetric(4);
        let a = connection_analytic(w, 0.3);
        let same = regauge_connection(&a, &RegaugeFunction::zero(w)).unwrap();
        assert_eq!(same.entries(), a.entries());
        let constant = regauge_connection(&a, &RegaugeFunction::uniform(w, PhaseProfile::constant(1.1))).unwrap();
        assert!((constant.entries() - a.entries()).camax() < 1e-15);
        let shifted = regauge_connection(&a, &RegaugeFunction::uniform(w, PhaseProfile::linear(PI))).unwrap();
        for k in w.indices() {
            assert!((shifted.get(k, k) + PI).norm() < 1e-15);
        }
    }

    #[test]
    fn window_mismatch_is_an_error() {
        let a = connection_analytic(Window::symmetric(2), 0.0);
        let eta = RegaugeFunction::zero(Window::symmetric(3));
        assert!(matches!(regauge_connection(&a, &eta), Err(Error::WindowMismatch { .. })));
        let w = w_matrix_closed_matrix(Window::symmetric(2), 0.0, 0.5);
        assert!(regauge_w(&w, &eta).is_err());
        assert!(regauge_holonomy(&w, &eta).is_err());
    }

    #[test]
    fn holonomy_moduli_are_regauge_invariant() {
        let w = Window::symmetric(5);
        let m = w_matrix_closed_matrix(w, 0.1, 0.6);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let eta = RegaugeFunction::random(w, &mut rng);
            let regauged = regauge_holonomy(&m, &eta).unwrap();
            assert_eq!(regauged.kind(), HolonomyKind::W);
            for (x, y) in regauged.entries().iter().zip(m.entries().iter()) {
                assert!((x.norm() - y.norm()).abs() < 1e-15);
            }
            let global = RegaugeFunction::uniform(w, PhaseProfile::constant(0.9));
            let g = regauge_w(&m, &global).unwrap();
            for (x, y) in g.entries().iter().zip(m.entries().iter()) {
                assert!((x.norm() - y.norm()).abs() < 1e-15);
            }
        }
    }
}
