//! Time evolution of ring eigenstates under a flux schedule.
//!
//! Two closed forms (periodic gauge and its Byers-Yang image) and two
//! independent Crank-Nicolson grid solvers, one per gauge, plus the phase
//! bookkeeping that splits a final state into dynamical, extra and residual
//! parts.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Gauge, WavefunctionGrid};
use crate::linalg::{CyclicSolver, CyclicTridiagonal};
use crate::quadrature::simpson;
use crate::ring::{eigenenergy, eigenfunction_by, eigenfunction_periodic, RingConfig};
use crate::schedule::FluxSchedule;
use crate::window::{EigenIndex, Window};

/// Largest tolerated `|norm - 1|` at the end of a grid run.
pub const NORM_DRIFT_LIMIT: f64 = 1e-6;

/// Simpson panels used for dynamical phases inside the phase bookkeeping.
pub const DEFAULT_PHASE_PANELS: usize = 20_000;

/// Half-width of the eigenbasis window searched for the best-overlap state.
pub const PROJECTION_HALF_WIDTH: u32 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    #[default]
    CrankNicolson,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSolverConfig {
    pub nx: usize,
    pub dt: f64,
    pub scheme: Scheme,
    pub gauge: Gauge,
}

impl Default for GridSolverConfig {
    fn default() -> Self {
        Self { nx: 512, dt: 1e-3, scheme: Scheme::CrankNicolson, gauge: Gauge::ByersYang }
    }
}

impl GridSolverConfig {
    pub fn new(nx: usize, dt: f64, gauge: Gauge) -> Result<Self> {
        let cfg = Self { nx, dt, scheme: Scheme::CrankNicolson, gauge };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_gauge(self, gauge: Gauge) -> Self {
        Self { gauge, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 8 || !self.nx.is_multiple_of(2) {
            return Err(Error::InvalidGrid { nx: self.nx, reason: "the cyclic solver needs an even grid of at least 8 points" });
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParameter(format!("time step must be positive, got {}", self.dt)));
        }
        Ok(())
    }

    /// Whether `dt * max|E|` stays within 0.5, with `E` taken over the states
    /// of `window` along the flux range of `s`.
    pub fn within_accuracy_bound(&self, s: &FluxSchedule, ring: &RingConfig, window: Window) -> bool {
        let emax = [s.phi_start, s.phi_end]
            .iter()
            .flat_map(|&phi| [eigenenergy(window.kmin(), phi, ring), eigenenergy(window.kmax(), phi, ring)])
            .fold(0.0, f64::max);
        self.dt * emax <= 0.5
    }
}

/// Split of a final state's phase relative to its parallel-transported reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseDecomposition {
    /// `|<reference, state>|^2` for the best-overlap reference state.
    pub fidelity: f64,
    /// `arg <reference, state>`, wrapped to `(-pi, pi]`.
    pub total_phase: f64,
    /// `-int E_k(phi(t)) dt` for the initial index, unwrapped.
    pub dynamical_phase: f64,
    /// `-pi (phi'' - phi')`.
    pub extra_phase: f64,
    /// `total - dynamical - extra`, wrapped to `(-pi, pi]`.
    pub residual: f64,
    /// Best-overlap index among the eigenfunctions at the final flux.
    pub final_index: EigenIndex,
    /// Best-overlap index among the eigenfunctions at the initial flux, when
    /// the flux changed by a whole number of quanta and the two bases span the
    /// same space.
    pub start_basis_index: Option<EigenIndex>,
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_phase(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// `gamma_D = -int E_k(phi(t)) dt` by Simpson's rule.
pub fn dynamical_phase(k: EigenIndex, s: &FluxSchedule, ring: &RingConfig, panels: usize) -> Result<f64> {
    let integral = simpson(
        |t| eigenenergy(k, s.value(t).expect("quadrature node inside the schedule"), ring),
        s.t_start,
        s.t_end(),
        panels,
    )?;
    Ok(-integral)
}

/// Exact periodic-gauge solution `exp(i gamma_D) psi_k` from `psi_k`, valid
/// for any speed of the flux change.
pub fn exact_evolve_periodic(
    k: EigenIndex,
    s: &FluxSchedule,
    ring: &RingConfig,
    nx: usize,
) -> Result<(WavefunctionGrid, PhaseDecomposition)> {
    let gamma = dynamical_phase(k, s, ring, DEFAULT_PHASE_PANELS)?;
    let psi = eigenfunction_periodic(k, ring, nx)?;
    let state = WavefunctionGrid::from_parts(
        psi.scaled(Complex64::from_polar(1.0, gamma)).into_samples(),
        Gauge::Periodic,
        s.phi_end,
        ring.circumference,
    );
    let total = wrap_phase(gamma);
    let phases = PhaseDecomposition {
        fidelity: 1.0,
        total_phase: total,
        dynamical_phase: gamma,
        extra_phase: 0.0,
        residual: wrap_phase(total - gamma),
        final_index: k,
        start_basis_index: Some(k),
    };
    Ok((state, phases))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactFinal {
    pub state: WavefunctionGrid,
    pub phases: PhaseDecomposition,
    /// False when the schedule does not start and stop gently; the closed form
    /// assumes it does.
    pub gentle: bool,
}

/// Closed-form final Byers-Yang state `exp(i gamma_D) exp(-i pi (phi'' - phi')) psi_k(phi'')`.
pub fn exact_final_by(k: EigenIndex, s: &FluxSchedule, ring: &RingConfig, nx: usize) -> Result<ExactFinal> {
    let gamma = dynamical_phase(k, s, ring, DEFAULT_PHASE_PANELS)?;
    let factor = Complex64::from_polar(1.0, gamma - PI * s.flux_change());
    let state = eigenfunction_by(k, s.phi_end, ring, nx)?.scaled(factor);
    let phases = phase_decompose(&state, k, s, ring)?;
    Ok(ExactFinal { state, phases, gentle: s.is_gentle() })
}

/// Snapshot taken while propagating.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeRecord {
    pub t: f64,
    pub phi: f64,
    pub norm: f64,
    /// `<reference_i, psi(t)>` for each tracked reference.
    pub overlaps: Vec<Complex64>,
}

/// What to record during a run.
#[derive(Debug, Clone, Copy)]
pub struct Tracking<'a> {
    /// Record every this many steps (the first and last step are always recorded).
    pub every: usize,
    pub references: &'a [WavefunctionGrid],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Propagation {
    pub state: WavefunctionGrid,
    pub records: Vec<TimeRecord>,
    pub steps: usize,
    pub norm_drift: f64,
}

/// Crank-Nicolson propagation of `initial` along `s` in the gauge of `cfg`.
///
/// Each step solves `(1 + i dt/2 H) psi' = (1 - i dt/2 H) psi` with `H`
/// evaluated at the step midpoint. The step count is `ceil(T / dt)`, with the
/// step shortened so the run ends exactly at `t''`.
///
/// Periodic gauge: `H = -1/2 d2 + a (i d) + a^2 / 2`, `a = 2 pi phi / L`, central
/// differences and strictly periodic boundaries.
///
/// Byers-Yang gauge: `H = -1/2 d2 + (2 pi x / L) dphi/dt` with the twisted
/// boundary `psi(L) = exp(-i 2 pi phi) psi(0)` entering through the corner
/// entries of the cyclic system.
pub fn propagate(
    initial: WavefunctionGrid,
    s: &FluxSchedule,
    ring: &RingConfig,
    cfg: &GridSolverConfig,
    tracking: Option<Tracking<'_>>,
) -> Result<Propagation> {
    cfg.validate()?;
    s.validate()?;
    if initial.gauge() != cfg.gauge {
        return Err(Error::WrongGauge { expected: cfg.gauge, found: initial.gauge() });
    }
    if initial.nx() != cfg.nx {
        return Err(Error::GridMismatch(initial.nx(), cfg.nx));
    }
    let nx = cfg.nx;
    let steps = ((s.duration / cfg.dt).ceil() as usize).max(1);
    let dt = s.duration / steps as f64;
    let h = ring.circumference / nx as f64;
    let kin = 1.0 / (h * h);

    let mut psi = initial;
    let mut next = vec![Complex64::new(0.0, 0.0); nx];
    let mut rhs = vec![Complex64::new(0.0, 0.0); nx];
    let mut hamiltonian = CyclicTridiagonal::zeros(nx);
    let mut lhs = CyclicTridiagonal::zeros(nx);
    let mut rhs_op = CyclicTridiagonal::zeros(nx);
    let mut solver = CyclicSolver::new(nx);
    let mut records = Vec::new();

    let record = |psi: &WavefunctionGrid, t: f64, phi: f64, records: &mut Vec<TimeRecord>| -> Result<()> {
        if let Some(tr) = tracking {
            let overlaps = tr.references.iter().map(|r| r.inner(psi)).collect::<Result<_>>()?;
            records.push(TimeRecord { t, phi, norm: psi.norm_sq(), overlaps });
        }
        Ok(())
    };
    record(&psi, s.t_start, s.phi_start, &mut records)?;

    let half = Complex64::new(0.0, 0.5 * dt);
    for step in 0..steps {
        let t_mid = s.t_start + (step as f64 + 0.5) * dt;
        let phi_mid = s.value(t_mid)?;
        match cfg.gauge {
            Gauge::Periodic => {
                let a = TAU * phi_mid / ring.circumference;
                let up = Complex64::new(-0.5 * kin, 0.5 * a / h);
                let down = up.conj();
                hamiltonian.diag.fill(Complex64::new(kin + 0.5 * a * a, 0.0));
                hamiltonian.upper.fill(up);
                hamiltonian.lower.fill(down);
                hamiltonian.top_right = down;
                hamiltonian.bottom_left = up;
            }
            Gauge::ByersYang => {
                let slope = TAU * s.rate(t_mid)? / nx as f64;
                for (j, d) in hamiltonian.diag.iter_mut().enumerate() {
                    *d = Complex64::new(kin + slope * j as f64, 0.0);
                }
                let off = Complex64::new(-0.5 * kin, 0.0);
                hamiltonian.upper.fill(off);
                hamiltonian.lower.fill(off);
                let twist = Complex64::from_polar(1.0, -TAU * phi_mid);
                hamiltonian.top_right = off * twist.conj();
                hamiltonian.bottom_left = off * twist;
            }
        }
        cayley_pair(&hamiltonian, half, &mut lhs, &mut rhs_op);
        rhs_op.apply(psi.samples(), &mut rhs);
        solver.solve(&lhs, &rhs, &mut next)?;
        psi.samples_mut().copy_from_slice(&next);

        let t = s.t_start + (step + 1) as f64 * dt;
        let last = step + 1 == steps;
        if last || (tracking.is_some_and(|tr| tr.every > 0 && (step + 1) % tr.every == 0)) {
            let phi = if last { s.phi_end } else { s.value(t.min(s.t_end()))? };
            psi = retag(psi, phi);
            record(&psi, t, phi, &mut records)?;
        }
        if (step + 1) % 4096 == 0 || last {
            let norm = psi.norm_sq();
            if !norm.is_finite() || (norm - 1.0).abs() > NORM_DRIFT_LIMIT {
                return Err(Error::NormDrift { norm, step: step + 1, t });
            }
        }
    }
    let psi = retag(psi, s.phi_end);
    let norm_drift = (psi.norm_sq() - 1.0).abs();
    Ok(Propagation { state: psi, records, steps, norm_drift })
}

fn retag(psi: WavefunctionGrid, phi: f64) -> WavefunctionGrid {
    let (gauge, length) = (psi.gauge(), psi.length());
    WavefunctionGrid::from_parts(psi.into_samples(), gauge, phi, length)
}

// lhs = 1 + c H, rhs = 1 - c H.
fn cayley_pair(h: &CyclicTridiagonal, c: Complex64, lhs: &mut CyclicTridiagonal, rhs: &mut CyclicTridiagonal) {
    let one = Complex64::new(1.0, 0.0);
    for (i, d) in h.diag.iter().enumerate() {
        lhs.diag[i] = one + c * d;
        rhs.diag[i] = one - c * d;
    }
    for i in 0..h.upper.len() {
        lhs.upper[i] = c * h.upper[i];
        rhs.upper[i] = -c * h.upper[i];
        lhs.lower[i] = c * h.lower[i];
        rhs.lower[i] = -c * h.lower[i];
    }
    lhs.top_right = c * h.top_right;
    rhs.top_right = -c * h.top_right;
    lhs.bottom_left = c * h.bottom_left;
    rhs.bottom_left = -c * h.bottom_left;
}

/// Periodic-gauge run from the plane wave `psi_k0`.
pub fn cn_evolve_periodic(k0: EigenIndex, s: &FluxSchedule, ring: &RingConfig, cfg: &GridSolverConfig) -> Result<WavefunctionGrid> {
    if cfg.gauge != Gauge::Periodic {
        return Err(Error::WrongGauge { expected: Gauge::Periodic, found: cfg.gauge });
    }
    let initial = eigenfunction_periodic(k0, ring, cfg.nx)?;
    let initial = WavefunctionGrid::from_parts(initial.into_samples(), Gauge::Periodic, s.phi_start, ring.circumference);
    Ok(propagate(initial, s, ring, cfg, None)?.state)
}

/// Byers-Yang-gauge run from `psi~_k0(phi')`.
pub fn cn_evolve_by(k0: EigenIndex, s: &FluxSchedule, ring: &RingConfig, cfg: &GridSolverConfig) -> Result<WavefunctionGrid> {
    if cfg.gauge != Gauge::ByersYang {
        return Err(Error::WrongGauge { expected: Gauge::ByersYang, found: cfg.gauge });
    }
    let initial = eigenfunction_by(k0, s.phi_start, ring, cfg.nx)?;
    Ok(propagate(initial, s, ring, cfg, None)?.state)
}

/// `E~_k(t) = E_k(phi(t)) + pi dphi/dt`, the diagonal element of the
/// time-dependent Byers-Yang Hamiltonian.
pub fn corrected_eigenenergy(k: EigenIndex, t: f64, s: &FluxSchedule, ring: &RingConfig) -> Result<f64> {
    Ok(eigenenergy(k, s.value(t)?, ring) + PI * s.rate(t)?)
}

/// `<psi~_k(phi(t)), H~(t) psi~_k(phi(t))>` evaluated on a grid: spectral
/// kinetic energy plus the linear potential by the trapezoid rule.
pub fn corrected_eigenenergy_quadrature(
    k: EigenIndex,
    t: f64,
    s: &FluxSchedule,
    ring: &RingConfig,
    nx: usize,
) -> Result<f64> {
    let psi = eigenfunction_by(k, s.value(t)?, ring, nx)?;
    let potential = TAU / ring.circumference * s.rate(t)? * psi.position_expectation();
    Ok(psi.kinetic_expectation() + potential)
}

/// `int (E~_k - E_k) dt` over the whole schedule by Simpson's rule.
pub fn extra_phase_integral(k: EigenIndex, s: &FluxSchedule, ring: &RingConfig, panels: usize) -> Result<f64> {
    simpson(
        |t| {
            let corrected = corrected_eigenenergy(k, t, s, ring).expect("node inside the schedule");
            corrected - eigenenergy(k, s.value(t).expect("node inside the schedule"), ring)
        },
        s.t_start,
        s.t_end(),
        panels,
    )
}

/// Phase bookkeeping for a final Byers-Yang state that started as `psi~_k(phi')`.
///
/// The reference is `psi~_k'(phi'')` with `k'` the best-overlap index within
/// `k +- 10`.
pub fn phase_decompose(state: &WavefunctionGrid, k: EigenIndex, s: &FluxSchedule, ring: &RingConfig) -> Result<PhaseDecomposition> {
    if state.gauge() != Gauge::ByersYang {
        return Err(Error::WrongGauge { expected: Gauge::ByersYang, found: state.gauge() });
    }
    let half = i64::from(PROJECTION_HALF_WIDTH);
    let window = Window::new(k - half, k + half)?;
    let (final_index, overlap) = best_overlap(state, window, s.phi_end, ring)?;
    let fidelity = overlap.norm_sqr();
    if fidelity < 0.5 {
        return Err(Error::NotAnEigenstate { fidelity });
    }

    let turns = s.flux_change().round();
    let start_basis_index = if (s.flux_change() - turns).abs() < 1e-9 {
        let shifted = Window::new(k - turns as i64 - half, k - turns as i64 + half)?;
        Some(best_overlap(state, shifted, s.phi_start, ring)?.0)
    } else {
        None
    };

    let total_phase = wrap_phase(overlap.arg());
    let dynamical_phase = dynamical_phase(k, s, ring, DEFAULT_PHASE_PANELS)?;
    let extra_phase = -PI * s.flux_change();
    Ok(PhaseDecomposition {
        fidelity,
        total_phase,
        dynamical_phase,
        extra_phase,
        residual: wrap_phase(total_phase - dynamical_phase - extra_phase),
        final_index,
        start_basis_index,
    })
}

/// `(k, <psi~_k(phi), state>)` maximizing the overlap modulus over `window`.
pub fn best_overlap(
    state: &WavefunctionGrid,
    window: Window,
    phi: f64,
    ring: &RingConfig,
) -> Result<(EigenIndex, Complex64)> {
    let mut best = (window.kmin(), Complex64::new(0.0, 0.0));
    for k in window.indices() {
        let z = eigenfunction_by(k, phi, ring, state.nx())?.inner(state)?;
        if z.norm() > best.1.norm() {
            best = (k, z);
        }
    }
    Ok(best)
}

/// `|<psi~_k(phi), state>|^2` for every `k` in `window`.
pub fn basis_fidelities(
    state: &WavefunctionGrid,
    window: Window,
    phi: f64,
    ring: &RingConfig,
) -> Result<Vec<(EigenIndex, f64)>> {
    window
        .indices()
        .map(|k| Ok((k, eigenfunction_by(k, phi, ring, state.nx())?.fidelity(state)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::{from_byers_yang, to_byers_yang};
    use crate::quadrature::trapezoid;
    use crate::ring::velocity_expectation;
    use crate::schedule::ScheduleShape;
    use approx::assert_abs_diff_eq;

    fn ring() -> RingConfig {
        RingConfig::default()
    }

    fn by_config(nx: usize, dt: f64) -> GridSolverConfig {
        GridSolverConfig::new(nx, dt, Gauge::ByersYang).unwrap()
    }

    fn phase_of(reference: &WavefunctionGrid, state: &WavefunctionGrid) -> f64 {
        reference.inner(state).unwrap().arg()
    }

    fn observed_order(coarse: f64, fine: f64) -> f64 {
        (coarse / fine).log2()
    }

    #[test]
    fn wrap_phase_range() {
        assert_eq!(wrap_phase(PI), PI);
        assert_abs_diff_eq!(wrap_phase(-PI), PI, epsilon = 1e-15);
        assert_abs_diff_eq!(wrap_phase(3.0 * PI + 0.25), -PI + 0.25, epsilon = 1e-14);
        assert_eq!(wrap_phase(0.0), 0.0);
    }

    #[test]
    fn dynamical_phase_examples() {
        let r = ring();
        let fixed = FluxSchedule::linear(0.3, 0.3, 2.5).unwrap();
        assert_abs_diff_eq!(dynamical_phase(2, &fixed, &r, 4).unwrap(), -eigenenergy(2, 0.3, &r) * 2.5, epsilon = 1e-14);

        let ramp = FluxSchedule::linear(0.0, 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(dynamical_phase(0, &ramp, &r, 2).unwrap(), -1.0 / 6.0, epsilon = 1e-15);
        assert!(dynamical_phase(0, &ramp, &r, 3).is_err());

        let smooth = FluxSchedule::smoothstep(0.0, 1.0, 1.0).unwrap();
        let oracle = -trapezoid(|t| eigenenergy(0, smooth.value(t).unwrap(), &r), 0.0, 1.0, 1_000_000);
        assert_abs_diff_eq!(dynamical_phase(0, &smooth, &r, 1000).unwrap(), oracle, epsilon = 1e-9);

        let s = FluxSchedule::smoothstep(0.2, 1.2, 10.0).unwrap();
        let coarse = dynamical_phase(3, &s, &r, DEFAULT_PHASE_PANELS).unwrap();
        let fine = dynamical_phase(3, &s, &r, 2 * DEFAULT_PHASE_PANELS).unwrap();
        assert!((coarse - fine).abs() < 1e-10);
    }

    #[test]
    fn periodic_gauge_closed_form() {
        let r = ring();
        let s = FluxSchedule::new(0.1, 1.1, 0.3, ScheduleShape::Linear).unwrap();
        let (state, phases) = exact_evolve_periodic(2, &s, &r, 64).unwrap();
        let psi = eigenfunction_periodic(2, &r, 64).unwrap();
        assert_abs_diff_eq!(psi.inner(&state).unwrap().norm(), 1.0, epsilon = 1e-14);
        assert_eq!(phases.residual, 0.0);

        let fixed = FluxSchedule::linear(0.4, 0.4, 3.0).unwrap();
        let (state, _) = exact_evolve_periodic(1, &fixed, &r, 64).unwrap();
        let expected = Complex64::from_polar(1.0, -eigenenergy(1, 0.4, &r) * 3.0);
        assert!((psi_overlap(1, &state) - expected).norm() < 1e-13);

        // psi_k is the image of exp(-i pi phi') psi~_k(phi')
        for start in [0.0, 0.25] {
            let cycle = FluxSchedule::unit_cycle(start, 4.0).unwrap();
            let (state, phases) = exact_evolve_periodic(1, &cycle, &r, 64).unwrap();
            let by = to_byers_yang(&state, cycle.phi_end, &r).unwrap();
            let expected = eigenfunction_by(1, start + 1.0, &r, 64)
                .unwrap()
                .scaled(Complex64::from_polar(1.0, phases.dynamical_phase - PI - PI * start));
            for (a, b) in by.samples().iter().zip(expected.samples()) {
                assert!((a - b).norm() < 1e-13);
            }
        }
    }

    fn psi_overlap(k: EigenIndex, state: &WavefunctionGrid) -> Complex64 {
        eigenfunction_periodic(k, &ring(), state.nx()).unwrap().inner(state).unwrap()
    }

    #[test]
    fn byers_yang_closed_form() {
        let r = ring();
        let cycle = FluxSchedule::unit_cycle(0.0, 5.0).unwrap();
        let out = exact_final_by(1, &cycle, &r, 128).unwrap();
        assert!(out.gentle);
        let shifted = eigenfunction_by(0, 0.0, &r, 128).unwrap();
        assert_abs_diff_eq!(shifted.fidelity(&out.state).unwrap(), 1.0, epsilon = 1e-12);
        assert_eq!(out.phases.final_index, 1);
        assert_eq!(out.phases.start_basis_index, Some(0));
        assert_abs_diff_eq!(out.phases.extra_phase, -PI, epsilon = 1e-15);
        assert!(out.phases.residual.abs() <= 1e-12);

        let null = FluxSchedule::smoothstep(0.3, 0.3, 2.0).unwrap();
        let out = exact_final_by(2, &null, &r, 128).unwrap();
        let expected = Complex64::from_polar(1.0, -eigenenergy(2, 0.3, &r) * 2.0);
        let z = eigenfunction_by(2, 0.3, &r, 128).unwrap().inner(&out.state).unwrap();
        assert!((z - expected).norm() < 1e-12);
        assert_eq!(out.phases.start_basis_index, Some(2));

        let half = FluxSchedule::smoothstep(0.0, 0.5, 1.0).unwrap();
        let out = exact_final_by(0, &half, &r, 128).unwrap();
        assert_abs_diff_eq!(out.phases.extra_phase, -PI / 2.0, epsilon = 1e-15);
        assert_eq!(out.phases.start_basis_index, None);

        let abrupt = FluxSchedule::linear(0.0, 1.0, 1.0).unwrap();
        assert!(!exact_final_by(0, &abrupt, &r, 64).unwrap().gentle);
    }

    #[test]
    fn byers_yang_final_state_is_schedule_independent() {
        let r = ring();
        let a = FluxSchedule::smoothstep(0.1, 1.1, 2.0).unwrap();
        let b = FluxSchedule::new(0.1, 1.1, 7.0, ScheduleShape::CustomSampled { progress: vec![0.0, 0.3, 0.4, 1.0] }).unwrap();
        let strip = |s: &FluxSchedule| {
            let out = exact_final_by(1, s, &r, 128).unwrap();
            out.state.scaled(Complex64::from_polar(1.0, -out.phases.dynamical_phase))
        };
        let z = strip(&a).inner(&strip(&b)).unwrap();
        assert!((z - 1.0).norm() < 1e-12);
    }

    #[test]
    fn corrected_energy() {
        let r = ring();
        let still = FluxSchedule::linear(0.4, 0.4, 1.0).unwrap();
        assert_eq!(corrected_eigenenergy(1, 0.5, &still, &r).unwrap(), eigenenergy(1, 0.4, &r));

        let ramp = FluxSchedule::linear(0.0, 0.1, 1.0).unwrap();
        assert_abs_diff_eq!(corrected_eigenenergy(0, 0.0, &ramp, &r).unwrap(), 0.1 * PI, epsilon = 1e-15);

        let cycle = FluxSchedule::unit_cycle(0.2, 3.0).unwrap();
        assert_abs_diff_eq!(extra_phase_integral(1, &cycle, &r, 2000).unwrap(), PI, epsilon = 1e-10);
        let half = FluxSchedule::smoothstep(0.0, 0.5, 3.0).unwrap();
        assert_abs_diff_eq!(extra_phase_integral(1, &half, &r, 2000).unwrap(), PI / 2.0, epsilon = 1e-10);

        for k in [-2, 0, 3] {
            for t in [0.3, 1.1, 2.9] {
                let closed = corrected_eigenenergy(k, t, &cycle, &r).unwrap();
                let quad = corrected_eigenenergy_quadrature(k, t, &cycle, &r, 256).unwrap();
                assert_abs_diff_eq!(closed, quad, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn phase_decompose_rejects_mixtures_and_wrong_gauge() {
        let r = ring();
        let s = FluxSchedule::unit_cycle(0.0, 1.0).unwrap();
        let mut mix: Vec<Complex64> = (0..64).map(|_| Complex64::new(0.0, 0.0)).collect();
        for k in [0, 1, 2] {
            for (m, v) in mix.iter_mut().zip(eigenfunction_by(k, 1.0, &r, 64).unwrap().samples()) {
                *m += v / 3f64.sqrt();
            }
        }
        let mix = WavefunctionGrid::from_parts(mix, Gauge::ByersYang, 1.0, r.circumference);
        assert!(matches!(phase_decompose(&mix, 1, &s, &r), Err(Error::NotAnEigenstate { .. })));
        let periodic = eigenfunction_periodic(1, &r, 64).unwrap();
        assert!(matches!(phase_decompose(&periodic, 1, &s, &r), Err(Error::WrongGauge { .. })));
    }

    #[test]
    fn solvers_check_their_gauge_and_grid() {
        let r = ring();
        let s = FluxSchedule::unit_cycle(0.0, 1.0).unwrap();
        let by = by_config(64, 1e-2);
        assert!(cn_evolve_periodic(0, &s, &r, &by).is_err());
        assert!(cn_evolve_by(0, &s, &r, &by.with_gauge(Gauge::Periodic)).is_err());
        assert!(GridSolverConfig::new(7, 1e-3, Gauge::Periodic).is_err());
        assert!(GridSolverConfig::new(64, 0.0, Gauge::Periodic).is_err());
        let wrong = eigenfunction_by(0, 0.0, &r, 32).unwrap();
        assert!(matches!(propagate(wrong, &s, &r, &by, None), Err(Error::GridMismatch(32, 64))));
        let w = Window::new(-9, 11).unwrap();
        assert!(by_config(512, 1e-3).within_accuracy_bound(&s, &r, w));
        assert!(!by_config(512, 1e-2).within_accuracy_bound(&s, &r, w));
    }

    #[test]
    fn periodic_solver_free_evolution() {
        let r = ring();
        let s = FluxSchedule::linear(0.0, 0.0, 1.0).unwrap();
        let cfg = GridSolverConfig::new(512, 1e-3, Gauge::Periodic).unwrap();
        let out = cn_evolve_periodic(1, &s, &r, &cfg).unwrap();
        let exact = eigenfunction_periodic(1, &r, 512).unwrap().scaled(Complex64::from_polar(1.0, -0.5));
        let z = exact.inner(&out).unwrap();
        assert!(z.norm_sqr() >= 1.0 - 1e-6);
        assert!((z - 1.0).norm() < 1e-5, "{z}");
    }

    #[test]
    fn periodic_solver_keeps_the_plane_wave() {
        let r = ring();
        let s = FluxSchedule::unit_cycle(0.0, 10.0).unwrap();
        let cfg = GridSolverConfig::new(512, 1e-3, Gauge::Periodic).unwrap();
        let out = cn_evolve_periodic(2, &s, &r, &cfg).unwrap();
        assert!(psi_overlap(2, &out).norm() >= 0.999);
        assert!((out.norm_sq() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn static_twist_is_free_evolution() {
        let r = ring();
        let s = FluxSchedule::smoothstep(0.3, 0.3, 1.0).unwrap();
        let out = cn_evolve_by(0, &s, &r, &by_config(512, 1e-3)).unwrap();
        let phase = phase_of(&eigenfunction_by(0, 0.3, &r, 512).unwrap(), &out);
        assert_abs_diff_eq!(phase, -eigenenergy(0, 0.3, &r), epsilon = 1e-6);
    }

    #[test]
    fn byers_yang_solver_realizes_the_anholonomy() {
        let r = ring();
        let s = FluxSchedule::unit_cycle(0.0, 10.0).unwrap();
        let init = eigenfunction_by(1, 0.0, &r, 512).unwrap();
        let refs = [init.clone(), eigenfunction_by(0, 0.0, &r, 512).unwrap()];
        let run = propagate(init, &s, &r, &by_config(512, 1e-3), Some(Tracking { every: 1000, references: &refs })).unwrap();
        assert!(run.norm_drift <= 1e-12);
        assert_eq!(run.records.len(), 11);
        assert_abs_diff_eq!(run.records[0].overlaps[0].norm(), 1.0, epsilon = 1e-12);
        assert!(run.records[10].overlaps[1].norm() >= 0.999);

        let phases = phase_decompose(&run.state, 1, &s, &r).unwrap();
        assert_eq!(phases.final_index, 1);
        assert_eq!(phases.start_basis_index, Some(0));
        assert!(phases.fidelity >= 0.999);
        assert!(phases.residual.abs() <= 1e-2, "{}", phases.residual);
        assert_abs_diff_eq!(run.state.velocity_expectation(), velocity_expectation(0, 0.0, &r), epsilon = 1e-3);
    }

    #[test]
    fn solvers_agree_across_gauges() {
        let r = ring();
        let s = FluxSchedule::unit_cycle(0.1, 2.0).unwrap();
        let cfg = GridSolverConfig::new(256, 1e-3, Gauge::Periodic).unwrap();
        let periodic = cn_evolve_periodic(-1, &s, &r, &cfg).unwrap();
        let by = cn_evolve_by(-1, &s, &r, &cfg.with_gauge(Gauge::ByersYang)).unwrap();
        assert!(to_byers_yang(&periodic, s.phi_end, &r).unwrap().fidelity(&by).unwrap() >= 0.999);
        assert!(from_byers_yang(&by, s.phi_end, &r).unwrap().fidelity(&periodic).unwrap() >= 0.999);
    }

    #[test]
    fn time_step_order_is_two() {
        let r = ring();
        let s = FluxSchedule::unit_cycle(0.0, 1.0).unwrap();
        let runs: Vec<_> = [8e-3, 4e-3, 2e-3]
            .iter()
            .map(|&dt| cn_evolve_by(3, &s, &r, &by_config(64, dt)).unwrap())
            .collect();
        let diff = |a: &WavefunctionGrid, b: &WavefunctionGrid| {
            a.samples().iter().zip(b.samples()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
        };
        let order = observed_order(diff(&runs[0], &runs[1]), diff(&runs[1], &runs[2]));
        assert!((1.8..=2.2).contains(&order), "{order}");
    }

    #[test]
    fn grid_spacing_order_is_two() {
        let r = ring();
        let s = FluxSchedule::unit_cycle(0.0, 1.0).unwrap();
        let phases: Vec<f64> = [32, 64, 128]
            .iter()
            .map(|&nx| {
                let out = cn_evolve_by(2, &s, &r, &by_config(nx, 1e-3)).unwrap();
                phase_of(&eigenfunction_by(2, 1.0, &r, nx).unwrap(), &out)
            })
            .collect();
        let order = observed_order(wrap_phase(phases[0] - phases[1]).abs(), wrap_phase(phases[1] - phases[2]).abs());
        assert!((1.8..=2.2).contains(&order), "{order}");
    }
}
