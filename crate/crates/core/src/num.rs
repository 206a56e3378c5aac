//! Toleranced comparison and normalized residuals.
//!
//! Every check in the crate reports a *normalized residual*
//! `|a − b| / (1 + max(|a|, |b|))`: absolute for small values, relative for
//! large ones, and insensitive to which side is "expected". Pass/fail
//! gates compare residuals against a [`Tolerance`].

/// Absolute-plus-relative comparison tolerance.
///
/// Two values agree when `|a − b| ≤ abs + rel · max(|a|, |b|)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerance {
    /// Jet operations are exact arithmetic identities up to rounding, so
    /// the default gate is tight: 1e-9 absolute + 1e-9 relative.
    fn default() -> Self {
        Tolerance { abs: 1e-9, rel: 1e-9 }
    }
}

impl Tolerance {
    /// Purely absolute tolerance.
    pub fn abs_only(abs: f64) -> Self {
        Tolerance { abs, rel: 0.0 }
    }

    /// Same absolute and relative slack.
    pub fn of(eps: f64) -> Self {
        Tolerance { abs: eps, rel: eps }
    }

    /// Toleranced equality of two scalars.
    pub fn accepts(&self, a: f64, b: f64) -> bool {
        (a - b).abs() <= self.abs + self.rel * a.abs().max(b.abs())
    }

    /// Toleranced equality of two slices (componentwise).
    pub fn accepts_slice(&self, a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| self.accepts(*x, *y))
    }
}

/// Base points of paired tangent elements must agree to this absolute
/// tolerance; fiber products are over strict equality mathematically, so
/// the numerical threshold is far below every check tolerance.
pub const BASE_MATCH_TOL: f64 = 1e-12;

/// Normalized gap between two scalars.
pub fn residual(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

/// Largest normalized componentwise gap between two equally long slices.
///
/// Panics on length mismatch: callers compare structurally identical
/// encodings, so unequal lengths are a programming error, not data.
pub fn residual_slice(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "residual_slice: length mismatch");
    a.iter()
        .zip(b)
        .map(|(x, y)| residual(*x, *y))
        .fold(0.0, f64::max)
}

/// Largest absolute entry of a slice.
pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Euclidean norm.
pub fn norm2(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Largest absolute gap between two equally long slices.
pub fn max_abs_gap(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "max_abs_gap: length mismatch");
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_tolerance_accepts_rounding_noise() {
        let tol = Tolerance::default();
        assert!(tol.accepts(1.0, 1.0 + 1e-12));
        assert!(tol.accepts(1e12, 1e12 * (1.0 + 1e-11)));
        assert!(!tol.accepts(1.0, 1.0 + 1e-6));
    }

    #[test]
    fn residual_is_absolute_for_small_and_relative_for_large() {
        assert!((residual(0.0, 1e-10) - 1e-10).abs() < 1e-15);
        let r = residual(1e12, 1e12 + 1.0);
        assert!(r < 1e-11, "large values compared relatively, got {r}");
    }

    #[test]
    fn residual_is_symmetric() {
        assert_eq!(residual(3.0, 5.0), residual(5.0, 3.0));
    }
}
