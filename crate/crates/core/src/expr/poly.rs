//! Multivariate polynomial normal form.
//!
//! Used where a check needs *symbolic* zero, not merely small residuals —
//! e.g. the double-exterior-derivative identity on polynomial
//! coefficients. Terms are exponent vectors mapped to coefficients in a
//! `BTreeMap`, so accumulation order is deterministic and coefficients of
//! identical monomials cancel exactly in floating point (the same
//! products are added and subtracted).

use super::Expr;
use std::collections::BTreeMap;

/// Polynomial in `arity` variables: exponent vector → coefficient.
/// Zero coefficients are pruned eagerly, so the zero polynomial has an
/// empty term map.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    pub arity: usize,
    pub terms: BTreeMap<Vec<u32>, f64>,
}

impl Poly {
    pub fn zero(arity: usize) -> Self {
        Poly { arity, terms: BTreeMap::new() }
    }

    pub fn constant(arity: usize, c: f64) -> Self {
        let mut p = Poly::zero(arity);
        p.accumulate(vec![0; arity], c);
        p
    }

    pub fn variable(arity: usize, i: usize) -> Self {
        assert!(i < arity);
        let mut exps = vec![0; arity];
        exps[i] = 1;
        let mut p = Poly::zero(arity);
        p.accumulate(exps, 1.0);
        p
    }

    fn accumulate(&mut self, exps: Vec<u32>, c: f64) {
        if c == 0.0 {
            return;
        }
        let entry = self.terms.entry(exps);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get() + c;
                if s == 0.0 {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, rhs: &Poly) -> Poly {
        assert_eq!(self.arity, rhs.arity);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.accumulate(e.clone(), *c);
        }
        out
    }

    pub fn neg(&self) -> Poly {
        let mut out = Poly::zero(self.arity);
        for (e, c) in &self.terms {
            out.accumulate(e.clone(), -c);
        }
        out
    }

    pub fn sub(&self, rhs: &Poly) -> Poly {
        self.add(&rhs.neg())
    }

    pub fn scale(&self, s: f64) -> Poly {
        let mut out = Poly::zero(self.arity);
        for (e, c) in &self.terms {
            out.accumulate(e.clone(), s * c);
        }
        out
    }

    pub fn mul(&self, rhs: &Poly) -> Poly {
        assert_eq!(self.arity, rhs.arity);
        let mut out = Poly::zero(self.arity);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let exps: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.accumulate(exps, ca * cb);
            }
        }
        out
    }

    pub fn powi(&self, n: u32) -> Poly {
        let mut out = Poly::constant(self.arity, 1.0);
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// Exactly the zero polynomial (all terms canceled bit-for-bit).
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Convert an expression if it is a polynomial with nonnegative
    /// integer powers; `None` otherwise.
    pub fn from_expr(e: &Expr, arity: usize) -> Option<Poly> {
        Some(match e {
            Expr::Const(c) => Poly::constant(arity, *c),
            Expr::Var(i) => {
                if *i >= arity {
                    return None;
                }
                Poly::variable(arity, *i)
            }
            Expr::Neg(a) => Poly::from_expr(a, arity)?.neg(),
            Expr::Add(a, b) => Poly::from_expr(a, arity)?.add(&Poly::from_expr(b, arity)?),
            Expr::Sub(a, b) => Poly::from_expr(a, arity)?.sub(&Poly::from_expr(b, arity)?),
            Expr::Mul(a, b) => Poly::from_expr(a, arity)?.mul(&Poly::from_expr(b, arity)?),
            Expr::Pow(a, n) => {
                if *n < 0 {
                    return None;
                }
                Poly::from_expr(a, arity)?.powi(*n as u32)
            }
            Expr::Div(..) | Expr::Call(..) => return None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    #[test]
    fn binomial_square_expands() {
        let e = parse_expr("(x1 + x2)^2").unwrap();
        let p = Poly::from_expr(&e, 2).unwrap();
        assert_eq!(p.terms.len(), 3);
        assert_eq!(p.terms[&vec![2, 0]], 1.0);
        assert_eq!(p.terms[&vec![1, 1]], 2.0);
        assert_eq!(p.terms[&vec![0, 2]], 1.0);
    }

    #[test]
    fn mixed_partials_cancel_exactly() {
        // ∂x∂y f − ∂y∂x f must vanish term-for-term, not just approximately.
        let f = parse_expr("x1^3*x2^2 - 4*x1*x2 + 0.125*x2^5").unwrap();
        let dxy = f.derivative(0).unwrap().derivative(1).unwrap();
        let dyx = f.derivative(1).unwrap().derivative(0).unwrap();
        let gap = Poly::from_expr(&dxy, 2).unwrap().sub(&Poly::from_expr(&dyx, 2).unwrap());
        assert!(gap.is_zero());
    }

    #[test]
    fn nonpolynomial_conversion_declines() {
        assert!(Poly::from_expr(&parse_expr("sin(x1)").unwrap(), 1).is_none());
        assert!(Poly::from_expr(&parse_expr("x1^-1").unwrap(), 1).is_none());
    }
}
