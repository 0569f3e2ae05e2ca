//! Newton-Cotes rules for time integrals and for sampled integrands on the ring.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Composite Simpson rule over `[a, b]`. `panels` must be even and at least 2.
pub fn simpson<F>(f: F, a: f64, b: f64, panels: usize) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if panels < 2 || !panels.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "Simpson's rule needs an even panel count >= 2, got {panels}"
        )));
    }
    let h = (b - a) / panels as f64;
    let mut acc = f(a) + f(b);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    Ok(acc * h / 3.0)
}

/// Composite trapezoid rule over `[a, b]`.
pub fn trapezoid<F>(f: F, a: f64, b: f64, panels: usize) -> f64
where
    F: Fn(f64) -> f64,
{
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut acc = 0.5 * (f(a) + f(b));
    for i in 1..panels {
        acc += f(a + i as f64 * h);
    }
    acc * h
}

/// Integrates samples `f(x_0), ..., f(x_n)` of a closed uniform grid with spacing `h`.
///
/// `n` panels: composite Boole when `n % 4 == 0`, Simpson when even, trapezoid otherwise.
pub fn closed_samples(values: &[Complex64], h: f64) -> Complex64 {
    let n = values.len().saturating_sub(1);
    if n == 0 {
        return Complex64::new(0.0, 0.0);
    }
    if n.is_multiple_of(4) {
        let mut acc = Complex64::new(0.0, 0.0);
        for block in 0..n / 4 {
            let i = 4 * block;
            acc += values[i] * 7.0
                + values[i + 1] * 32.0
                + values[i + 2] * 12.0
                + values[i + 3] * 32.0
                + values[i + 4] * 7.0;
        }
        acc * (2.0 * h / 45.0)
    } else if n.is_multiple_of(2) {
        let mut acc = values[0] + values[n];
        for (i, v) in values.iter().enumerate().take(n).skip(1) {
            acc += v * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        acc * (h / 3.0)
    } else {
        let inner: Complex64 = values[1..n].iter().sum();
        (inner + (values[0] + values[n]) * 0.5) * h
    }
}
