//! Truncation windows over plane-wave winding numbers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Plane-wave winding number labelling an eigenstate of the ring.
pub type EigenIndex = i64;

/// Inclusive index range `[kmin, kmax]` used to truncate the infinite eigenbasis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[i64; 2]", into = "[i64; 2]")]
pub struct Window {
    kmin: EigenIndex,
    kmax: EigenIndex,
}

impl Window {
    pub fn new(kmin: EigenIndex, kmax: EigenIndex) -> Result<Self> {
        if kmin > kmax {
            return Err(Error::EmptyWindow { kmin, kmax });
        }
        Ok(Self { kmin, kmax })
    }

    /// Window `[-half, half]` holding `2 * half + 1` indices.
    pub fn symmetric(half: u32) -> Self {
        let half = i64::from(half);
        Self { kmin: -half, kmax: half }
    }

    /// Smallest symmetric window holding at least `n` indices.
    pub fn centered(n: usize) -> Self {
        Self::symmetric((n.max(1) / 2) as u32)
    }

    pub fn kmin(&self) -> EigenIndex {
        self.kmin
    }

    pub fn kmax(&self) -> EigenIndex {
        self.kmax
    }

    pub fn len(&self) -> usize {
        (self.kmax - self.kmin + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, k: EigenIndex) -> bool {
        (self.kmin..=self.kmax).contains(&k)
    }

    /// Row/column offset of `k` inside matrices built over this window.
    pub fn position(&self, k: EigenIndex) -> Option<usize> {
        self.contains(k).then(|| (k - self.kmin) as usize)
    }

    pub fn index_at(&self, position: usize) -> EigenIndex {
        self.kmin + position as i64
    }

    pub fn indices(&self) -> impl Iterator<Item = EigenIndex> + Clone {
        self.kmin..=self.kmax
    }

    /// The sub-window left after dropping the outermost 10% of indices on each
    /// side. Rows and columns near a truncation edge are polluted by the cut,
    /// so assertions only look at this block.
    pub fn interior(&self) -> Window {
        let trim = ((self.len() as f64) * 0.1).round() as i64;
        let (lo, hi) = (self.kmin + trim, self.kmax - trim);
        if lo > hi {
            *self
        } else {
            Window { kmin: lo, kmax: hi }
        }
    }

    /// Intersection with `other`, if non-empty.
    pub fn intersect(&self, other: &Window) -> Option<Window> {
        Window::new(self.kmin.max(other.kmin), self.kmax.min(other.kmax)).ok()
    }

    pub(crate) fn ensure_same(&self, other: &Window) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::WindowMismatch {
                left_min: self.kmin,
                left_max: self.kmax,
                right_min: other.kmin,
                right_max: other.kmax,
            })
        }
    }
}

impl TryFrom<[i64; 2]> for Window {
    type Error = Error;

    fn try_from(value: [i64; 2]) -> Result<Self> {
        Window::new(value[0], value[1])
    }
}

impl From<Window> for [i64; 2] {
    fn from(w: Window) -> Self {
        [w.kmin, w.kmax]
    }
}

impl std::fmt::Display for Window {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}]", self.kmin, self.kmax)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_inverted_bounds() {
        assert_eq!(Window::new(2, 1), Err(Error::EmptyWindow { kmin: 2, kmax: 1 }));
        assert_eq!(Window::new(3, 3).unwrap().len(), 1);
    }

    #[test]
    fn interior_trims_ten_percent() {
        let w = Window::symmetric(400);
        assert_eq!(w.len(), 801);
        let inner = w.interior();
        assert_eq!(inner.kmin(), -320);
        assert_eq!(inner.kmax(), 320);
        assert_eq!(Window::symmetric(1).interior(), Window::symmetric(1));
    }

    #[test]
    fn positions_round_trip() {
        let w = Window::new(-3, 4).unwrap();
        for k in w.indices() {
            assert_eq!(w.index_at(w.position(k).unwrap()), k);
        }
        assert_eq!(w.position(5), None);
        assert_eq!(Window::centered(21), Window::symmetric(10));
    }
}
