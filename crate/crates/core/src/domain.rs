//! Open-box domains with optional open predicates.
//!
//! Every map in the crate is declared on an open box `∏ (lo_i, hi_i)`,
//! optionally intersected with finitely many open conditions `p(x) > 0`.
//! Sampling and grids stay strictly inside the box (each side shrunk by a
//! relative margin) so boundary evaluation never occurs.

use crate::error::{Error, Result};
use crate::expr::Expr;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::fmt;

/// Relative margin kept between samples and the open boundary.
pub const SAMPLE_MARGIN: f64 = 1e-3;

/// How many rejection-sampling attempts to make before declaring the
/// predicate region too thin to hit.
const MAX_REJECTS: usize = 512;

/// An open box in ℝⁿ with optional predicate cuts (`p(x) > 0` each).
#[derive(Clone, Debug, PartialEq)]
pub struct Domain {
    bounds: Vec<(f64, f64)>,
    predicates: Vec<Expr>,
}

impl Domain {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self> {
        Self::with_predicates(bounds, Vec::new())
    }

    pub fn with_predicates(bounds: Vec<(f64, f64)>, predicates: Vec<Expr>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::Domain("domain needs at least one axis".into()));
        }
        for (i, (lo, hi)) in bounds.iter().enumerate() {
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return Err(Error::Domain(format!(
                    "axis {} has invalid bounds ({lo}, {hi})",
                    i + 1
                )));
            }
        }
        for p in &predicates {
            if p.min_arity() > bounds.len() {
                return Err(Error::UndefinedVariable {
                    index: p.min_arity(),
                    arity: bounds.len(),
                });
            }
        }
        Ok(Domain { bounds, predicates })
    }

    /// The symmetric box `(−r, r)ⁿ`.
    pub fn centered(n: usize, r: f64) -> Self {
        Domain::new(vec![(-r, r); n]).expect("positive radius")
    }

    /// The box `(−1, 1)ⁿ`.
    pub fn unit(n: usize) -> Self {
        Domain::centered(n, 1.0)
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn predicates(&self) -> &[Expr] {
        &self.predicates
    }

    /// Strict interior membership (box open, predicates strictly positive).
    pub fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        let inside_box = self
            .bounds
            .iter()
            .zip(x)
            .all(|((lo, hi), v)| v > lo && v < hi);
        inside_box
            && self
                .predicates
                .iter()
                .all(|p| matches!(p.eval_real(x), Ok(v) if v > 0.0))
    }

    fn shrunk_bounds(&self) -> Vec<(f64, f64)> {
        self.bounds
            .iter()
            .map(|(lo, hi)| {
                let m = SAMPLE_MARGIN * (hi - lo);
                (lo + m, hi - m)
            })
            .collect()
    }

    /// Uniform sample from the shrunk box, rejection-sampled against the
    /// predicates.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
        let shrunk = self.shrunk_bounds();
        for _ in 0..MAX_REJECTS {
            let x: Vec<f64> = shrunk.iter().map(|(lo, hi)| rng.gen_range(*lo..*hi)).collect();
            if self.predicates.is_empty() || self.contains(&x) {
                return Ok(x);
            }
        }
        Err(Error::Domain(format!(
            "could not sample a point satisfying the predicates of {self}"
        )))
    }

    /// Tensor grid with `per_axis` nodes per axis (endpoints of the shrunk
    /// box included), filtered by the predicates.
    pub fn grid(&self, per_axis: usize) -> Vec<Vec<f64>> {
        assert!(per_axis >= 2, "grid needs at least 2 nodes per axis");
        let shrunk = self.shrunk_bounds();
        let axes: Vec<Vec<f64>> = shrunk
            .iter()
            .map(|(lo, hi)| {
                (0..per_axis)
                    .map(|i| lo + (hi - lo) * i as f64 / (per_axis - 1) as f64)
                    .collect()
            })
            .collect();
        let mut out = Vec::new();
        let mut idx = vec![0usize; self.dim()];
        'outer: loop {
            let point: Vec<f64> = idx.iter().zip(&axes).map(|(i, ax)| ax[*i]).collect();
            if self.predicates.is_empty() || self.contains(&point) {
                out.push(point);
            }
            for k in 0..self.dim() {
                idx[k] += 1;
                if idx[k] < per_axis {
                    continue 'outer;
                }
                idx[k] = 0;
            }
            break;
        }
        out
    }

    /// Componentwise intersection of two boxes of equal dimension;
    /// predicates are concatenated.
    pub fn intersect(&self, other: &Domain) -> Result<Domain> {
        if self.dim() != other.dim() {
            return Err(Error::ArityMismatch {
                expected: self.dim(),
                got: other.dim(),
                context: "domain intersection".into(),
            });
        }
        let bounds: Vec<(f64, f64)> = self
            .bounds
            .iter()
            .zip(&other.bounds)
            .map(|((a, b), (c, d))| (a.max(*c), b.min(*d)))
            .collect();
        let mut predicates = self.predicates.clone();
        predicates.extend(other.predicates.iter().cloned());
        Domain::with_predicates(bounds, predicates)
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (lo, hi)) in self.bounds.iter().enumerate() {
            if i > 0 {
                write!(f, "x")?;
            }
            write!(f, "[{lo},{hi}]")?;
        }
        if !self.predicates.is_empty() {
            write!(f, " where ")?;
            for (i, p) in self.predicates.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{p}")?;
            }
        }
        Ok(())
    }
}
