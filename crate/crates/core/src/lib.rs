//! Eigenvalue and eigenspace anholonomy of a charged particle on a ring
//! threaded by a time-dependent magnetic flux.
//!
//! A unit flux cycle `phi -> phi + 1` maps every eigenenergy `E_k` onto
//! `E_{k-1}`. In the periodic gauge the eigenfunctions do not move and the
//! anholonomy only shows in expectation values; in the Byers-Yang gauge the
//! eigenfunctions themselves are permuted, which the holonomy matrices of
//! [`connection`] record. [`propagator`] checks both pictures against grid
//! solutions of the time-dependent Schrödinger equation.

pub mod basis;
pub mod connection;
pub mod error;
pub mod gauge;
pub mod grid;
pub mod linalg;
pub mod propagator;
pub mod quadrature;
pub mod ring;
pub mod schedule;
pub mod window;

pub use error::{Error, Result};
pub use grid::{Gauge, WavefunctionGrid};
pub use ring::RingConfig;
pub use schedule::{FluxSchedule, ScheduleShape};
pub use window::{EigenIndex, Window};
