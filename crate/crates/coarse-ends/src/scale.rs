//! The scale ladder and tolerance-aware comparisons against it.
//!
//! All distance-versus-scale comparisons in this crate go through the
//! helpers below so that partitions are reproducible across platforms:
//! a relative tolerance of 1e-9 with ties counted as "within".

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance for floating-point comparisons against a scale.
pub const REL_TOL: f64 = 1e-9;

/// `d` lies within the bound `r` (ties and near-ties count as within).
#[inline]
pub fn within(d: f64, r: f64) -> bool {
    d <= r + r.abs() * REL_TOL
}

/// `d` clears the cut-off `r` (ties and near-ties count as clearing).
/// This is the annulus membership test: the complement of the open ball.
#[inline]
pub fn at_least(d: f64, r: f64) -> bool {
    d >= r - r.abs() * REL_TOL
}

/// Ascending cut-off radii (ball truncations, starting at 0) and ascending
/// positive entourage scales indexing the component matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleLadder {
    cutoffs: Vec<f64>,
    scales: Vec<f64>,
}

impl ScaleLadder {
    /// Validates and builds a ladder. `cutoffs` must start at 0, both lists
    /// must be finite and strictly ascending, scales strictly positive, and
    /// every cut-off must stay below `rho_max`.
    pub fn new(cutoffs: Vec<f64>, scales: Vec<f64>, rho_max: f64) -> Result<Self> {
        if cutoffs.is_empty() || scales.is_empty() {
            return Err(Error::InvalidLadder("empty cut-off or scale list".into()));
        }
        if cutoffs[0] != 0.0 {
            return Err(Error::InvalidLadder(format!(
                "first cut-off must be 0, got {}",
                cutoffs[0]
            )));
        }
        for w in cutoffs.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::InvalidLadder(format!(
                    "cut-offs not strictly ascending at {} -> {}",
                    w[0], w[1]
                )));
            }
        }
        for w in scales.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::InvalidLadder(format!(
                    "scales not strictly ascending at {} -> {}",
                    w[0], w[1]
                )));
            }
        }
        if scales[0] <= 0.0 {
            return Err(Error::InvalidLadder(format!(
                "scales must be positive, got {}",
                scales[0]
            )));
        }
        let all_finite = cutoffs.iter().chain(scales.iter()).all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::InvalidLadder("non-finite ladder value".into()));
        }
        let max_cut = *cutoffs.last().unwrap();
        if max_cut >= rho_max {
            return Err(Error::InvalidLadder(format!(
                "largest cut-off {} must stay below the truncation radius {}",
                max_cut, rho_max
            )));
        }
        Ok(Self { cutoffs, scales })
    }

    /// Default ladder for an instance of truncation radius `rho_max`:
    /// geometric cut-offs {0, ρ/16, ρ/8, ρ/4, 0.45ρ} and scales {1, 2, 4, 8}.
    pub fn default_for(rho_max: f64) -> Result<Self> {
        let cutoffs = vec![
            0.0,
            rho_max / 16.0,
            rho_max / 8.0,
            rho_max / 4.0,
            rho_max * 0.45,
        ];
        Self::new(cutoffs, vec![1.0, 2.0, 4.0, 8.0], rho_max)
    }

    pub fn cutoffs(&self) -> &[f64] {
        &self.cutoffs
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    /// Index of the smallest ladder scale that is at least `s`, if any.
    pub fn scale_at_least(&self, s: f64) -> Option<usize> {
        self.scales.iter().position(|&r| within(s, r))
    }

    /// Index of the largest ladder cut-off that is at most `r`, if any.
    pub fn cutoff_at_most(&self, r: f64) -> Option<usize> {
        self.cutoffs.iter().rposition(|&c| at_least(r, c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_counts_ties_as_within() {
        assert!(within(2.0, 2.0));
        assert!(within(2.0 + 1e-12, 2.0));
        assert!(!within(2.0 + 1e-6, 2.0));
        assert!(at_least(10.0, 10.0));
        assert!(at_least(10.0 - 1e-12, 10.0));
        assert!(!at_least(9.99, 10.0));
        // r = 0 is exact in both directions.
        assert!(within(0.0, 0.0));
        assert!(at_least(0.0, 0.0));
        assert!(!within(1e-300, 0.0));
    }

    #[test]
    fn ladder_validation() {
        assert!(ScaleLadder::new(vec![0.0, 10.0], vec![1.0, 2.0], 100.0).is_ok());
        // must start at zero
        assert!(ScaleLadder::new(vec![1.0, 10.0], vec![1.0], 100.0).is_err());
        // strictly ascending
        assert!(ScaleLadder::new(vec![0.0, 10.0, 10.0], vec![1.0], 100.0).is_err());
        // scales positive
        assert!(ScaleLadder::new(vec![0.0], vec![0.0, 1.0], 100.0).is_err());
        // cut-offs below the truncation radius
        assert!(ScaleLadder::new(vec![0.0, 100.0], vec![1.0], 100.0).is_err());
    }

    #[test]
    fn ladder_lookups() {
        let l = ScaleLadder::new(vec![0.0, 10.0, 20.0], vec![1.0, 2.0, 4.0], 50.0).unwrap();
        assert_eq!(l.scale_at_least(1.5), Some(1));
        assert_eq!(l.scale_at_least(2.0), Some(1));
        assert_eq!(l.scale_at_least(4.0000001), None);
        assert_eq!(l.cutoff_at_most(15.0), Some(1));
        assert_eq!(l.cutoff_at_most(10.0), Some(1));
        assert_eq!(l.cutoff_at_most(f64::INFINITY), Some(2));
    }
}
