//! Time-dependent flux `phi(t)` driven from `phi_start` to `phi_end`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", deny_unknown_fields)]
pub enum ScheduleShape {
    /// `s(tau) = 10 tau^3 - 15 tau^4 + 6 tau^5`: zero rate and curvature at both ends.
    Smoothstep5,
    /// Constant rate. Does not start or stop gently.
    Linear,
    /// Progress values `s_i` in `[0, 1]` at uniformly spaced `tau_i`, joined by a
    /// cubic Hermite spline. Slopes are centered differences inside and zero at
    /// both ends, so the sampled ramp always starts and stops gently.
    CustomSampled { progress: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxSchedule {
    pub phi_start: f64,
    pub phi_end: f64,
    pub duration: f64,
    #[serde(default)]
    pub t_start: f64,
    #[serde(default = "default_shape")]
    pub shape: ScheduleShape,
}

fn default_shape() -> ScheduleShape {
    ScheduleShape::Smoothstep5
}

impl FluxSchedule {
    pub fn new(phi_start: f64, phi_end: f64, duration: f64, shape: ScheduleShape) -> Result<Self> {
        let s = Self { phi_start, phi_end, duration, t_start: 0.0, shape };
        s.validate()?;
        Ok(s)
    }

    pub fn smoothstep(phi_start: f64, phi_end: f64, duration: f64) -> Result<Self> {
        Self::new(phi_start, phi_end, duration, ScheduleShape::Smoothstep5)
    }

    pub fn linear(phi_start: f64, phi_end: f64, duration: f64) -> Result<Self> {
        Self::new(phi_start, phi_end, duration, ScheduleShape::Linear)
    }

    /// A unit flux cycle `phi -> phi + 1` with the default quintic ramp.
    pub fn unit_cycle(phi_start: f64, duration: f64) -> Result<Self> {
        Self::smoothstep(phi_start, phi_start + 1.0, duration)
    }

    pub fn starting_at(mut self, t_start: f64) -> Self {
        self.t_start = t_start;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(Error::InvalidSchedule(format!("duration must be positive, got {}", self.duration)));
        }
        if !(self.phi_start.is_finite() && self.phi_end.is_finite() && self.t_start.is_finite()) {
            return Err(Error::InvalidSchedule("non-finite flux or start time".into()));
        }
        if let ScheduleShape::CustomSampled { progress } = &self.shape {
            if progress.len() < 2 {
                return Err(Error::InvalidSchedule("custom schedule needs at least two samples".into()));
            }
            if progress[0] != 0.0 || progress[progress.len() - 1] != 1.0 {
                return Err(Error::InvalidSchedule("custom progress must run from 0 to 1".into()));
            }
            if progress.iter().any(|p| !p.is_finite()) {
                return Err(Error::InvalidSchedule("non-finite custom progress sample".into()));
            }
        }
        Ok(())
    }

    pub fn t_end(&self) -> f64 {
        self.t_start + self.duration
    }

    pub fn flux_change(&self) -> f64 {
        self.phi_end - self.phi_start
    }

    /// Whether the rate vanishes at both ends.
    pub fn is_gentle(&self) -> bool {
        !matches!(self.shape, ScheduleShape::Linear) || self.flux_change() == 0.0
    }

    fn tau(&self, t: f64) -> Result<f64> {
        let (start, end) = (self.t_start, self.t_end());
        if !(start..=end).contains(&t) {
            return Err(Error::OutsideSchedule { t, start, end });
        }
        if t == end {
            return Ok(1.0);
        }
        Ok(((t - start) / self.duration).clamp(0.0, 1.0))
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        let s = self.progress(self.tau(t)?);
        Ok((1.0 - s) * self.phi_start + s * self.phi_end)
    }

    pub fn rate(&self, t: f64) -> Result<f64> {
        let tau = self.tau(t)?;
        Ok(self.progress_rate(tau) * self.flux_change() / self.duration)
    }

    fn progress(&self, tau: f64) -> f64 {
        match &self.shape {
            ScheduleShape::Smoothstep5 => tau * tau * tau * (10.0 + tau * (-15.0 + 6.0 * tau)),
            ScheduleShape::Linear => tau,
            ScheduleShape::CustomSampled { progress } => hermite(progress, tau).0,
        }
    }

    fn progress_rate(&self, tau: f64) -> f64 {
        match &self.shape {
            ScheduleShape::Smoothstep5 => 30.0 * tau * tau * (1.0 - tau) * (1.0 - tau),
            ScheduleShape::Linear => 1.0,
            ScheduleShape::CustomSampled { progress } => hermite(progress, tau).1,
        }
    }
}

// Value and tau-derivative of the cubic Hermite spline through uniform samples.
fn hermite(p: &[f64], tau: f64) -> (f64, f64) {
    let segments = p.len() - 1;
    let h = 1.0 / segments as f64;
    let i = ((tau / h).floor() as usize).min(segments - 1);
    let slope = |j: usize| -> f64 {
        if j == 0 || j == segments {
            0.0
        } else {
            (p[j + 1] - p[j - 1]) / (2.0 * h)
        }
    };
    let u = (tau - i as f64 * h) / h;
    let (y0, y1, m0, m1) = (p[i], p[i + 1], slope(i) * h, slope(i + 1) * h);
    let u2 = u * u;
    let u3 = u2 * u;
    let value = (2.0 * u3 - 3.0 * u2 + 1.0) * y0
        + (u3 - 2.0 * u2 + u) * m0
        + (-2.0 * u3 + 3.0 * u2) * y1
        + (u3 - u2) * m1;
    let d = (6.0 * u2 - 6.0 * u) * y0
        + (3.0 * u2 - 4.0 * u + 1.0) * m0
        + (-6.0 * u2 + 6.0 * u) * y1
        + (3.0 * u2 - 2.0 * u) * m1;
    (value, d / h)
}
