//! Non-Abelian connection over the Byers-Yang eigenbasis, its anti-path-ordered
//! exponential `W(C)`, and the holonomy matrices `M(C)` and `M^(g)(C)`.
//!
//! All matrices are truncated to an index window. The closed forms describe the
//! infinite basis, so rows and columns near a window edge carry truncation
//! error; compare on [`Window::interior`] or a fixed central block.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{EigenBasis, ParallelTransported};
use crate::error::{Error, Result};
use crate::gauge::{regauged_connection_entries, RegaugeFunction};
use crate::grid::WavefunctionGrid;
use crate::quadrature::closed_samples;
use crate::ring::{eigenfunction_by, RingConfig};
use crate::window::{EigenIndex, Window};

/// Bound on `max |W^dagger W - I|` for every truncation size. A truncated
/// Hermitian generator exponentiates to a unitary matrix, so the only defect is
/// rounding and this bound does not grow with the window.
pub const UNITARITY_TOLERANCE: f64 = 1e-10;

/// `A_{k'' k'}(phi) = <psi_k''(phi), i d/dphi psi_k'(phi)>` over a window.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionMatrix {
    window: Window,
    flux: f64,
    entries: DMatrix<Complex64>,
}

impl ConnectionMatrix {
    pub fn new(window: Window, flux: f64, entries: DMatrix<Complex64>) -> Result<Self> {
        check_shape(window, &entries)?;
        Ok(Self { window, flux, entries })
    }

    pub fn zeros(window: Window, flux: f64) -> Self {
        let n = window.len();
        Self { window, flux, entries: DMatrix::zeros(n, n) }
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn flux(&self) -> f64 {
        self.flux
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    /// Entry `(k_out, k_in)`. Panics if either index is outside the window.
    pub fn get(&self, k_out: EigenIndex, k_in: EigenIndex) -> Complex64 {
        self.entries[(self.pos(k_out), self.pos(k_in))]
    }

    fn pos(&self, k: EigenIndex) -> usize {
        self.window.position(k).unwrap_or_else(|| panic!("index {k} outside window {}", self.window))
    }

    /// `max |A_ab - conj(A_ba)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        (&self.entries - self.entries.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &ConnectionMatrix) -> Result<f64> {
        self.window.ensure_same(&other.window)?;
        Ok((&self.entries - &other.entries).iter().map(|z| z.norm()).fold(0.0, f64::max))
    }

    /// Diagonal `A_kk`; the Mead-Truhlar-Berry connection of each eigenstate.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.window.len()).map(|i| self.entries[(i, i)].re).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HolonomyKind {
    /// Anti-path-ordered exponential of the connection.
    W,
    /// Overlap of the initial eigenbasis with the cycled states.
    M,
    /// Adiabatic holonomy including the Byers-Yang dynamical-phase factor.
    Mg,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HolonomyMatrix {
    window: Window,
    kind: HolonomyKind,
    path: (f64, f64),
    entries: DMatrix<Complex64>,
}

impl HolonomyMatrix {
    pub fn new(window: Window, kind: HolonomyKind, path: (f64, f64), entries: DMatrix<Complex64>) -> Result<Self> {
        check_shape(window, &entries)?;
        Ok(Self { window, kind, path, entries })
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn kind(&self) -> HolonomyKind {
        self.kind
    }

    /// `(phi', phi'')`.
    pub fn path(&self) -> (f64, f64) {
        self.path
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn get(&self, k_out: EigenIndex, k_in: EigenIndex) -> Complex64 {
        let pos = |k: EigenIndex| {
            self.window.position(k).unwrap_or_else(|| panic!("index {k} outside window {}", self.window))
        };
        self.entries[(pos(k_out), pos(k_in))]
    }

    pub(crate) fn with_entries(&self, entries: DMatrix<Complex64>) -> Self {
        Self { entries, ..self.clone() }
    }

    pub fn unitarity_defect(&self) -> f64 {
        let n = self.window.len();
        let gram = self.entries.adjoint() * &self.entries;
        (gram - DMatrix::<Complex64>::identity(n, n)).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn unitarity_tolerance(&self) -> f64 {
        UNITARITY_TOLERANCE
    }

    /// `max |X_ab - expected(a, b)|` over rows and columns in `block`.
    pub fn max_deviation<F>(&self, block: Window, expected: F) -> f64
    where
        F: Fn(EigenIndex, EigenIndex) -> Complex64,
    {
        let Some(block) = block.intersect(&self.window) else { return 0.0 };
        let mut worst = 0.0_f64;
        for a in block.indices() {
            for b in block.indices() {
                worst = worst.max((self.get(a, b) - expected(a, b)).norm());
            }
        }
        worst
    }

    /// Deviation from the eigenspace permutation `delta_{k'', k'-1}` on `block`.
    pub fn permutation_deviation(&self, block: Window) -> f64 {
        self.max_deviation(block, |a, b| if a == b - 1 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) })
    }

    /// Euclidean norm of column `k`.
    pub fn column_norm(&self, k: EigenIndex) -> f64 {
        let c = self.window.position(k).expect("index outside window");
        self.entries.column(c).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &HolonomyMatrix) -> Result<f64> {
        self.window.ensure_same(&other.window)?;
        Ok((&self.entries - &other.entries).iter().map(|z| z.norm()).fold(0.0, f64::max))
    }
}

fn check_shape(window: Window, entries: &DMatrix<Complex64>) -> Result<()> {
    let n = window.len();
    if entries.nrows() != n || entries.ncols() != n {
        return Err(Error::InvalidParameter(format!(
            "{}x{} matrix for a window of {n} indices",
            entries.nrows(),
            entries.ncols()
        )));
    }
    Ok(())
}

/// A connection evaluated along the flux path.
pub trait ConnectionField {
    fn window(&self) -> Window;

    fn at(&self, phi: f64) -> Result<ConnectionMatrix>;

    /// Whether `at` returns the same matrix for every flux.
    fn is_flux_independent(&self) -> bool {
        false
    }

    fn diagonal_at(&self, phi: f64) -> Result<Vec<f64>> {
        Ok(self.at(phi)?.diagonal())
    }
}

impl ConnectionField for ConnectionMatrix {
    fn window(&self) -> Window {
        self.window
    }

    fn at(&self, phi: f64) -> Result<ConnectionMatrix> {
        Ok(Self { flux: phi, ..self.clone() })
    }

    fn is_flux_independent(&self) -> bool {
        true
    }
}

impl<C: ConnectionField + ?Sized> ConnectionField for &C {
    fn window(&self) -> Window {
        (**self).window()
    }

    fn at(&self, phi: f64) -> Result<ConnectionMatrix> {
        (**self).at(phi)
    }

    fn is_flux_independent(&self) -> bool {
        (**self).is_flux_independent()
    }

    fn diagonal_at(&self, phi: f64) -> Result<Vec<f64>> {
        (**self).diagonal_at(phi)
    }
}

/// Closed-form Byers-Yang connection `i / (k'' - k')` off the diagonal, zero on it.
#[derive(Debug, Clone, Copy)]
pub struct AnalyticConnection {
    pub window: Window,
}

impl ConnectionField for AnalyticConnection {
    fn window(&self) -> Window {
        self.window
    }

    fn at(&self, phi: f64) -> Result<ConnectionMatrix> {
        Ok(connection_analytic(self.window, phi))
    }

    fn is_flux_independent(&self) -> bool {
        true
    }

    fn diagonal_at(&self, _phi: f64) -> Result<Vec<f64>> {
        Ok(vec![0.0; self.window.len()])
    }
}

/// The identically vanishing connection of the flux-independent plane waves.
#[derive(Debug, Clone, Copy)]
pub struct PeriodicGaugeConnection {
    pub window: Window,
}

impl ConnectionField for PeriodicGaugeConnection {
    fn window(&self) -> Window {
        self.window
    }

    fn at(&self, phi: f64) -> Result<ConnectionMatrix> {
        Ok(ConnectionMatrix::zeros(self.window, phi))
    }

    fn is_flux_independent(&self) -> bool {
        true
    }
}

/// `base` transformed by a change of eigenfunction phases, using the analytic
/// transformation law at every flux.
#[derive(Debug, Clone)]
pub struct RegaugedConnection<'a, C> {
    base: C,
    eta: &'a RegaugeFunction,
}

impl<'a, C: ConnectionField> RegaugedConnection<'a, C> {
    pub fn new(base: C, eta: &'a RegaugeFunction) -> Result<Self> {
        base.window().ensure_same(&eta.window())?;
        Ok(Self { base, eta })
    }
}

impl<C: ConnectionField> ConnectionField for RegaugedConnection<'_, C> {
    fn window(&self) -> Window {
        self.base.window()
    }

    fn at(&self, phi: f64) -> Result<ConnectionMatrix> {
        let base = self.base.at(phi)?;
        let w = self.window();
        let eta: Vec<f64> = w.indices().map(|k| self.eta.eta(k, phi)).collect();
        let deta: Vec<f64> = w.indices().map(|k| self.eta.eta_derivative(k, phi)).collect();
        ConnectionMatrix::new(w, phi, regauged_connection_entries(base.entries(), &eta, &deta))
    }

    fn diagonal_at(&self, phi: f64) -> Result<Vec<f64>> {
        let base = self.base.diagonal_at(phi)?;
        Ok(self.window().indices().zip(base).map(|(k, d)| d - self.eta.eta_derivative(k, phi)).collect())
    }
}

/// Connection evaluated numerically from sampled eigenfunctions at every flux.
#[derive(Debug, Clone)]
pub struct NumericConnection<B> {
    pub basis: B,
    pub window: Window,
    pub delta: f64,
    pub nx: usize,
    pub ring: RingConfig,
    pub stencil: Stencil,
}

impl<B: EigenBasis> ConnectionField for NumericConnection<B> {
    fn window(&self) -> Window {
        self.window
    }

    fn at(&self, phi: f64) -> Result<ConnectionMatrix> {
        connection_from_basis(&self.basis, self.window, phi, self.delta, self.nx, &self.ring, self.stencil)
    }
}

pub fn connection_analytic(window: Window, phi: f64) -> ConnectionMatrix {
    let n = window.len();
    let entries = DMatrix::from_fn(n, n, |r, c| {
        if r == c {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, 1.0 / (r as f64 - c as f64))
        }
    });
    ConnectionMatrix { window, flux: phi, entries }
}

/// Connection of the plane-wave basis, which does not depend on the flux.
pub fn periodic_gauge_connection(window: Window) -> ConnectionMatrix {
    ConnectionMatrix::zeros(window, 0.0)
}

/// Central-difference stencils for the flux derivative, by order of accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stencil {
    Central2,
    Central4,
    Central6,
    Central8,
}

impl Stencil {
    fn weights(self) -> &'static [f64] {
        match self {
            Stencil::Central2 => &[1.0 / 2.0],
            Stencil::Central4 => &[2.0 / 3.0, -1.0 / 12.0],
            Stencil::Central6 => &[3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0],
            Stencil::Central8 => &[4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0],
        }
    }
}

/// Second-order central difference of grid overlaps of the parallel-transported basis.
pub fn connection_numeric(window: Window, phi: f64, delta: f64, nx: usize, ring: &RingConfig) -> Result<ConnectionMatrix> {
    connection_from_basis(&ParallelTransported, window, phi, delta, nx, ring, Stencil::Central2)
}

/// Numerical connection of any eigenbasis.
///
/// The flux derivative of `f(s, t) = <psi_a(phi + s), psi_b(phi + t)>` is taken
/// along `s = -t`, where `f_t = (d/du) f(-u/2, u/2)` because `f_s + f_t = 0`.
/// Each stencil term then pairs with its own conjugate transpose, so the result
/// is Hermitian to rounding regardless of the step.
pub fn connection_from_basis<B: EigenBasis + ?Sized>(
    basis: &B,
    window: Window,
    phi: f64,
    delta: f64,
    nx: usize,
    ring: &RingConfig,
    stencil: Stencil,
) -> Result<ConnectionMatrix> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParameter(format!("finite-difference step must be positive, got {delta}")));
    }
    let n = window.len();
    let mut acc = DMatrix::<Complex64>::zeros(n, n);
    for (j, weight) in stencil.weights().iter().enumerate() {
        let half = 0.5 * delta * (j + 1) as f64;
        let sample = |offset: f64| -> Result<Vec<WavefunctionGrid>> {
            window.indices().map(|k| basis.sample(k, phi + offset, ring, nx)).collect()
        };
        let (minus, plus) = (sample(-half)?, sample(half)?);
        for r in 0..n {
            for c in 0..n {
                let forward = minus[r].inner(&plus[c])?;
                let backward = plus[r].inner(&minus[c])?;
                acc[(r, c)] += (forward - backward) * *weight;
            }
        }
    }
    let entries = acc * Complex64::new(0.0, 1.0 / delta);
    ConnectionMatrix::new(window, phi, entries)
}

/// `exp(-i dphi A)` for a Hermitian `A`; stays real when the generator is real.
fn transport_step(a: &DMatrix<Complex64>, dphi: f64) -> DMatrix<Complex64> {
    let generator = a * Complex64::new(0.0, -dphi);
    if generator.iter().all(|z| z.im == 0.0) {
        generator.map(|z| z.re).exp().map(|x| Complex64::new(x, 0.0))
    } else {
        generator.exp()
    }
}

/// Anti-path-ordered exponential of `-i int A dphi` by the midpoint product.
///
/// The path is cut into `steps` equal pieces and the factor of each later piece
/// multiplies from the right, so that `psi_k(phi'') = sum_k' psi_k'(phi') W_k'k`.
/// A flux-independent connection collapses to a single exponential.
pub fn w_matrix_ordered<C: ConnectionField>(conn: &C, phi_start: f64, phi_end: f64, steps: usize) -> Result<HolonomyMatrix> {
    if steps == 0 {
        return Err(Error::InvalidParameter("the ordered product needs at least one step".into()));
    }
    let window = conn.window();
    let n = window.len();
    let span = phi_end - phi_start;
    let entries = if span == 0.0 {
        DMatrix::identity(n, n)
    } else if conn.is_flux_independent() {
        transport_step(conn.at(phi_start)?.entries(), span)
    } else {
        let h = span / steps as f64;
        let mut w = DMatrix::<Complex64>::identity(n, n);
        for i in 0..steps {
            let mid = phi_start + (i as f64 + 0.5) * h;
            w *= transport_step(conn.at(mid)?.entries(), h);
        }
        w
    };
    HolonomyMatrix::new(window, HolonomyKind::W, (phi_start, phi_end), entries)
}

/// Richardson combination `(4 W(2n) - W(n)) / 3` of two midpoint products;
/// fourth order in the step for a smooth connection.
pub fn w_matrix_extrapolated<C: ConnectionField>(conn: &C, phi_start: f64, phi_end: f64, steps: usize) -> Result<HolonomyMatrix> {
    if conn.is_flux_independent() {
        return w_matrix_ordered(conn, phi_start, phi_end, steps);
    }
    let coarse = w_matrix_ordered(conn, phi_start, phi_end, steps)?;
    let fine = w_matrix_ordered(conn, phi_start, phi_end, 2 * steps)?;
    let entries = (fine.entries() * Complex64::new(4.0, 0.0) - coarse.entries()) / Complex64::new(3.0, 0.0);
    Ok(fine.with_entries(entries))
}

/// Closed-form W element `exp(-i (k''-k') pi) sin(pi z) / (pi z)`, `z = phi'' - phi' + k'' - k'`.
pub fn w_matrix_closed(k_out: EigenIndex, k_in: EigenIndex, phi_start: f64, phi_end: f64) -> Complex64 {
    let m = k_out - k_in;
    let sign = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    Complex64::new(sign * sinc_pi(phi_end - phi_start + m as f64), 0.0)
}

/// `sin(pi z) / (pi z)` with the removable singularity filled in by its series.
fn sinc_pi(z: f64) -> f64 {
    if z.abs() < 1e-6 {
        let u = PI * z;
        1.0 - u * u / 6.0
    } else if z.fract() == 0.0 {
        0.0
    } else {
        (PI * z).sin() / (PI * z)
    }
}

pub fn w_matrix_closed_matrix(window: Window, phi_start: f64, phi_end: f64) -> HolonomyMatrix {
    let n = window.len();
    let entries = DMatrix::from_fn(n, n, |r, c| {
        w_matrix_closed(window.index_at(r), window.index_at(c), phi_start, phi_end)
    });
    HolonomyMatrix { window, kind: HolonomyKind::W, path: (phi_start, phi_end), entries }
}

/// `M_{k''k'} = <psi_k''(phi'), exp(-i pi) psi_k'(phi' + 1)>` by grid quadrature.
pub fn holonomy_matrix(window: Window, phi_start: f64, nx: usize, ring: &RingConfig) -> Result<HolonomyMatrix> {
    overlap_holonomy(window, phi_start, nx, ring, None)
}

/// [`holonomy_matrix`] in the basis `psi_k exp(i eta_k)`: each state keeps the
/// phase it had at the base point while being carried around the cycle.
pub fn holonomy_matrix_regauged(
    window: Window,
    phi_start: f64,
    nx: usize,
    ring: &RingConfig,
    eta: &RegaugeFunction,
) -> Result<HolonomyMatrix> {
    window.ensure_same(&eta.window())?;
    overlap_holonomy(window, phi_start, nx, ring, Some(eta))
}

fn overlap_holonomy(
    window: Window,
    phi_start: f64,
    nx: usize,
    ring: &RingConfig,
    eta: Option<&RegaugeFunction>,
) -> Result<HolonomyMatrix> {
    let phase = |k: EigenIndex| Complex64::from_polar(1.0, eta.map_or(0.0, |e| e.eta(k, phi_start)));
    let initial: Vec<_> = window
        .indices()
        .map(|k| Ok(eigenfunction_by(k, phi_start, ring, nx)?.scaled(phase(k))))
        .collect::<Result<_>>()?;
    let cycled: Vec<_> = window
        .indices()
        .map(|k| Ok(eigenfunction_by(k, phi_start + 1.0, ring, nx)?.scaled(-phase(k))))
        .collect::<Result<_>>()?;
    let n = window.len();
    let mut entries = DMatrix::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            entries[(r, c)] = initial[r].inner(&cycled[c])?;
        }
    }
    HolonomyMatrix::new(window, HolonomyKind::M, (phi_start, phi_start + 1.0), entries)
}

/// `M^(g)_{k''k'} = exp(-i pi (phi'' - phi')) W_{k''k'} exp(i int A_{k'k'} dphi)`.
///
/// `W` is the Richardson-extrapolated ordered product with `steps` base steps;
/// the diagonal integral uses Simpson's rule on `2 * steps` panels.
pub fn geometric_holonomy<C: ConnectionField>(conn: &C, phi_start: f64, phi_end: f64, steps: usize) -> Result<HolonomyMatrix> {
    let w = w_matrix_extrapolated(conn, phi_start, phi_end, steps)?;
    let window = conn.window();
    let span = phi_end - phi_start;
    let berry: Vec<f64> = if span == 0.0 {
        vec![0.0; window.len()]
    } else if conn.is_flux_independent() {
        conn.diagonal_at(phi_start)?.into_iter().map(|d| d * span).collect()
    } else {
        let panels = 2 * steps.max(1);
        let h = span / panels as f64;
        let samples: Vec<Vec<f64>> = (0..=panels).map(|i| conn.diagonal_at(phi_start + i as f64 * h)).collect::<Result<_>>()?;
        (0..window.len())
            .map(|c| {
                let column: Vec<Complex64> = samples.iter().map(|row| Complex64::new(row[c], 0.0)).collect();
                closed_samples(&column, h).re
            })
            .collect()
    };
    let global = Complex64::from_polar(1.0, -PI * span);
    let n = window.len();
    let entries = DMatrix::from_fn(n, n, |r, c| global * w.entries()[(r, c)] * Complex64::from_polar(1.0, berry[c]));
    HolonomyMatrix::new(window, HolonomyKind::Mg, (phi_start, phi_end), entries)
}
