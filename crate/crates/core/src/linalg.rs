//! Complex cyclic tridiagonal systems via the Sherman-Morrison correction.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tridiagonal matrix with corner entries closing it into a ring:
/// `top_right = A[0][n-1]`, `bottom_left = A[n-1][0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclicTridiagonal {
    pub lower: Vec<Complex64>,
    pub diag: Vec<Complex64>,
    pub upper: Vec<Complex64>,
    pub top_right: Complex64,
    pub bottom_left: Complex64,
}

impl CyclicTridiagonal {
    /// All-zero system of size `n`.
    pub fn zeros(n: usize) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Self {
            lower: vec![zero; n.saturating_sub(1)],
            diag: vec![zero; n],
            upper: vec![zero; n.saturating_sub(1)],
            top_right: zero,
            bottom_left: zero,
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `out = A x`.
    pub fn apply(&self, x: &[Complex64], out: &mut [Complex64]) {
        let n = self.len();
        for i in 0..n {
            let mut acc = self.diag[i] * x[i];
            if i > 0 {
                acc += self.lower[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                acc += self.upper[i] * x[i + 1];
            }
            out[i] = acc;
        }
        out[0] += self.top_right * x[n - 1];
        out[n - 1] += self.bottom_left * x[0];
    }
}

/// Reusable scratch space for [`CyclicTridiagonal`] solves of a fixed size.
#[derive(Debug, Clone)]
pub struct CyclicSolver {
    gam: Vec<Complex64>,
    y: Vec<Complex64>,
    z: Vec<Complex64>,
    u: Vec<Complex64>,
}

impl CyclicSolver {
    pub fn new(n: usize) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Self { gam: vec![zero; n], y: vec![zero; n], z: vec![zero; n], u: vec![zero; n] }
    }

    /// Solves `A x = rhs`.
    ///
    /// Writes `A = T + u v^T` with `u = (g, 0, .., 0, bottom_left)` and
    /// `v = (1, 0, .., 0, top_right / g)`, `g = -diag[0]`, solves `T y = rhs`
    /// and `T z = u` with one shared Thomas elimination, then
    /// `x = y - (v.y / (1 + v.z)) z`.
    pub fn solve(&mut self, a: &CyclicTridiagonal, rhs: &[Complex64], x: &mut [Complex64]) -> Result<()> {
        let n = a.len();
        if n < 3 {
            return Err(Error::Singular("cyclic system needs at least 3 unknowns"));
        }
        if rhs.len() != n || x.len() != n || self.gam.len() != n {
            return Err(Error::Singular("dimension mismatch"));
        }
        let g = -a.diag[0];
        if g == Complex64::new(0.0, 0.0) {
            return Err(Error::Singular("zero leading diagonal entry"));
        }
        let zero = Complex64::new(0.0, 0.0);
        self.u.fill(zero);
        self.u[0] = g;
        self.u[n - 1] = a.bottom_left;

        let diag_at = |i: usize| -> Complex64 {
            if i == 0 {
                a.diag[0] - g
            } else if i == n - 1 {
                a.diag[n - 1] - a.bottom_left * a.top_right / g
            } else {
                a.diag[i]
            }
        };

        let mut bet = diag_at(0);
        if bet.norm() == 0.0 {
            return Err(Error::Singular("zero pivot in forward elimination"));
        }
        self.y[0] = rhs[0] / bet;
        self.z[0] = self.u[0] / bet;
        #[allow(clippy::needless_range_loop)]
        for i in 1..n {
            self.gam[i] = a.upper[i - 1] / bet;
            bet = diag_at(i) - a.lower[i - 1] * self.gam[i];
            if bet.norm() == 0.0 {
                return Err(Error::Singular("zero pivot in forward elimination"));
            }
            self.y[i] = (rhs[i] - a.lower[i - 1] * self.y[i - 1]) / bet;
            self.z[i] = (self.u[i] - a.lower[i - 1] * self.z[i - 1]) / bet;
        }
        for i in (0..n - 1).rev() {
            let (gy, gz) = (self.gam[i + 1] * self.y[i + 1], self.gam[i + 1] * self.z[i + 1]);
            self.y[i] -= gy;
            self.z[i] -= gz;
        }

        let ratio = a.top_right / g;
        let vy = self.y[0] + ratio * self.y[n - 1];
        let vz = self.z[0] + ratio * self.z[n - 1];
        let denom = Complex64::new(1.0, 0.0) + vz;
        if denom.norm() == 0.0 {
            return Err(Error::Singular("Sherman-Morrison denominator vanished"));
        }
        let factor = vy / denom;
        for ((xi, y), z) in x.iter_mut().zip(&self.y).zip(&self.z) {
            *xi = y - factor * z;
        }
        Ok(())
    }
}
