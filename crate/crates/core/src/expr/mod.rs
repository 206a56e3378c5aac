//! A small expression language for smooth scalar formulas.
//!
//! Expressions are built over variables `x1..xn` (stored 0-based), f64
//! constants, arithmetic, integer powers, and a fixed set of elementary
//! functions. Three interpreters share the one AST:
//!
//! * [`Expr::eval_real`] — plain f64 evaluation,
//! * [`Expr::eval_jet`] — evaluation on [`JetValue`]s (exact forward-mode
//!   derivatives of any order),
//! * [`Expr::derivative`] — symbolic partial derivative with light
//!   constant folding (no deeper simplification; the printer is canonical,
//!   not a normal form).
//!
//! [`Display`](std::fmt::Display) prints the canonical form: minimal
//! parentheses, `+`/`-` spaced, `*`/`/` tight, integer powers with `^`.
//! Printing then reparsing yields the same string byte-for-byte — the
//! corpus format relies on this for deterministic round trips.

pub mod parse;
pub mod poly;

pub use parse::parse_expr;
pub use poly::Poly;

use crate::error::{Error, Result};
use crate::jet::JetValue;
use std::fmt;

/// Elementary functions available in the grammar.
///
/// `Flat` is the guarded bump ingredient `flat(x) = exp(−1/x²)` for
/// `x > 0` and `0` otherwise — smooth on all of ℝ, with every derivative
/// vanishing at `x ≤ 0`. It has no symbolic derivative here; jet
/// evaluation handles it exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Flat,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Flat => "flat",
        }
    }

    pub fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "flat" => Func::Flat,
            _ => return None,
        })
    }
}

/// Expression tree. Variables are 0-based internally and print as `x1..`.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    /// Integer power of the base expression.
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

fn is_const(e: &Expr, v: f64) -> bool {
    matches!(e, Expr::Const(c) if *c == v)
}

/// Constant.
pub fn cnst(v: f64) -> Expr {
    Expr::Const(v)
}

/// Variable by 0-based index (prints as `x{i+1}`).
pub fn var(i: usize) -> Expr {
    Expr::Var(i)
}

/// Sum with light folding (drops zero summands, folds constants).
pub fn add(a: Expr, b: Expr) -> Expr {
    if is_const(&a, 0.0) {
        return b;
    }
    if is_const(&b, 0.0) {
        return a;
    }
    if let (Expr::Const(x), Expr::Const(y)) = (&a, &b) {
        return Expr::Const(x + y);
    }
    Expr::Add(Box::new(a), Box::new(b))
}

/// Difference with light folding.
pub fn sub(a: Expr, b: Expr) -> Expr {
    if is_const(&b, 0.0) {
        return a;
    }
    if is_const(&a, 0.0) {
        return neg(b);
    }
    if let (Expr::Const(x), Expr::Const(y)) = (&a, &b) {
        return Expr::Const(x - y);
    }
    Expr::Sub(Box::new(a), Box::new(b))
}

/// Product with light folding (annihilates on zero, drops unit factors).
pub fn mul(a: Expr, b: Expr) -> Expr {
    if is_const(&a, 0.0) || is_const(&b, 0.0) {
        return Expr::Const(0.0);
    }
    if is_const(&a, 1.0) {
        return b;
    }
    if is_const(&b, 1.0) {
        return a;
    }
    if let (Expr::Const(x), Expr::Const(y)) = (&a, &b) {
        return Expr::Const(x * y);
    }
    Expr::Mul(Box::new(a), Box::new(b))
}

/// Quotient with light folding (unit denominator, zero numerator).
pub fn div(a: Expr, b: Expr) -> Expr {
    if is_const(&b, 1.0) {
        return a;
    }
    if is_const(&a, 0.0) {
        return Expr::Const(0.0);
    }
    Expr::Div(Box::new(a), Box::new(b))
}

/// Negation; collapses double negation and constant operands.
pub fn neg(a: Expr) -> Expr {
    match a {
        Expr::Neg(inner) => *inner,
        Expr::Const(c) => Expr::Const(-c),
        other => Expr::Neg(Box::new(other)),
    }
}

/// Integer power with light folding (`^0` → 1, `^1` → base).
pub fn powi(base: Expr, n: i32) -> Expr {
    match n {
        0 => Expr::Const(1.0),
        1 => base,
        _ => Expr::Pow(Box::new(base), n),
    }
}

/// Function application.
pub fn call(f: Func, a: Expr) -> Expr {
    Expr::Call(f, Box::new(a))
}

impl Expr {
    /// Smallest arity that makes every variable reference valid.
    pub fn min_arity(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.min_arity(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.min_arity().max(b.min_arity())
            }
        }
    }

    /// Plain scalar evaluation.
    pub fn eval_real(&self, args: &[f64]) -> Result<f64> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => {
                if *i >= args.len() {
                    return Err(Error::UndefinedVariable { index: i + 1, arity: args.len() });
                }
                args[*i]
            }
            Expr::Neg(a) => -a.eval_real(args)?,
            Expr::Add(a, b) => a.eval_real(args)? + b.eval_real(args)?,
            Expr::Sub(a, b) => a.eval_real(args)? - b.eval_real(args)?,
            Expr::Mul(a, b) => a.eval_real(args)? * b.eval_real(args)?,
            Expr::Div(a, b) => {
                let d = b.eval_real(args)?;
                if d == 0.0 {
                    return Err(Error::SingularEval("division by zero".into()));
                }
                a.eval_real(args)? / d
            }
            Expr::Pow(a, n) => {
                let base = a.eval_real(args)?;
                if base == 0.0 && *n < 0 {
                    return Err(Error::SingularEval("zero base with negative power".into()));
                }
                base.powi(*n)
            }
            Expr::Call(f, a) => {
                let x = a.eval_real(args)?;
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Exp => x.exp(),
                    Func::Log => {
                        if x <= 0.0 {
                            return Err(Error::SingularEval(format!("log at {x}")));
                        }
                        x.ln()
                    }
                    Func::Sqrt => {
                        if x < 0.0 {
                            return Err(Error::SingularEval(format!("sqrt at {x}")));
                        }
                        x.sqrt()
                    }
                    Func::Flat => {
                        if x <= 0.0 {
                            0.0
                        } else {
                            (-1.0 / (x * x)).exp()
                        }
                    }
                }
            }
        })
    }

    /// Jet evaluation: arguments must all have equal order; the result
    /// carries exact derivatives with respect to every tag they seed.
    pub fn eval_jet(&self, args: &[JetValue]) -> Result<JetValue> {
        assert!(!args.is_empty(), "eval_jet needs at least one argument jet");
        let order = args[0].order();
        debug_assert!(args.iter().all(|a| a.order() == order));
        Ok(match self {
            Expr::Const(c) => JetValue::constant(order, *c),
            Expr::Var(i) => {
                if *i >= args.len() {
                    return Err(Error::UndefinedVariable { index: i + 1, arity: args.len() });
                }
                args[*i].clone()
            }
            Expr::Neg(a) => a.eval_jet(args)?.neg(),
            Expr::Add(a, b) => a.eval_jet(args)?.add(&b.eval_jet(args)?),
            Expr::Sub(a, b) => a.eval_jet(args)?.sub(&b.eval_jet(args)?),
            Expr::Mul(a, b) => a.eval_jet(args)?.mul(&b.eval_jet(args)?),
            Expr::Div(a, b) => a.eval_jet(args)?.div(&b.eval_jet(args)?)?,
            Expr::Pow(a, n) => a.eval_jet(args)?.powi(*n)?,
            Expr::Call(f, a) => {
                let x = a.eval_jet(args)?;
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Exp => x.exp(),
                    Func::Log => x.log()?,
                    Func::Sqrt => x.sqrt()?,
                    Func::Flat => x.flat(),
                }
            }
        })
    }

    /// Symbolic partial derivative with respect to variable `i` (0-based).
    ///
    /// Errors with [`Error::NonSymbolicDerivative`] on functions that only
    /// differentiate at the jet level (`flat`); callers fall back to a
    /// derived jet evaluation in that case.
    pub fn derivative(&self, i: usize) -> Result<Expr> {
        Ok(match self {
            Expr::Const(_) => cnst(0.0),
            Expr::Var(j) => cnst(if *j == i { 1.0 } else { 0.0 }),
            Expr::Neg(a) => neg(a.derivative(i)?),
            Expr::Add(a, b) => add(a.derivative(i)?, b.derivative(i)?),
            Expr::Sub(a, b) => sub(a.derivative(i)?, b.derivative(i)?),
            Expr::Mul(a, b) => add(
                mul(a.derivative(i)?, (**b).clone()),
                mul((**a).clone(), b.derivative(i)?),
            ),
            Expr::Div(a, b) => sub(
                div(a.derivative(i)?, (**b).clone()),
                div(mul((**a).clone(), b.derivative(i)?), powi((**b).clone(), 2)),
            ),
            Expr::Pow(a, n) => mul(
                cnst(*n as f64),
                mul(powi((**a).clone(), n - 1), a.derivative(i)?),
            ),
            Expr::Call(f, a) => {
                let da = a.derivative(i)?;
                let inner = (**a).clone();
                match f {
                    Func::Sin => mul(call(Func::Cos, inner), da),
                    Func::Cos => neg(mul(call(Func::Sin, inner), da)),
                    Func::Exp => mul(call(Func::Exp, inner), da),
                    Func::Log => div(da, inner),
                    Func::Sqrt => div(da, mul(cnst(2.0), call(Func::Sqrt, inner))),
                    Func::Flat => {
                        return Err(Error::NonSymbolicDerivative("flat".into()));
                    }
                }
            }
        })
    }

    /// Replace variable `i` by `subs[i]` throughout.
    pub fn substitute(&self, subs: &[Expr]) -> Result<Expr> {
        Ok(match self {
            Expr::Const(c) => cnst(*c),
            Expr::Var(i) => {
                if *i >= subs.len() {
                    return Err(Error::UndefinedVariable { index: i + 1, arity: subs.len() });
                }
                subs[*i].clone()
            }
            Expr::Neg(a) => neg(a.substitute(subs)?),
            Expr::Add(a, b) => add(a.substitute(subs)?, b.substitute(subs)?),
            Expr::Sub(a, b) => sub(a.substitute(subs)?, b.substitute(subs)?),
            Expr::Mul(a, b) => mul(a.substitute(subs)?, b.substitute(subs)?),
            Expr::Div(a, b) => div(a.substitute(subs)?, b.substitute(subs)?),
            Expr::Pow(a, n) => powi(a.substitute(subs)?, *n),
            Expr::Call(f, a) => call(*f, a.substitute(subs)?),
        })
    }

    /// Whether the expression is a polynomial (no division, no function
    /// calls, no negative powers).
    pub fn is_polynomial(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Var(_) => true,
            Expr::Neg(a) => a.is_polynomial(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                a.is_polynomial() && b.is_polynomial()
            }
            Expr::Div(..) | Expr::Call(..) => false,
            Expr::Pow(a, n) => *n >= 0 && a.is_polynomial(),
        }
    }
}

/// Printing precedence; parentheses appear exactly where a child's level
/// is below its context. Negative constants print like negations.
fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) | Expr::Div(..) => 2,
        Expr::Neg(_) => 3,
        Expr::Const(c) if *c < 0.0 => 3,
        Expr::Pow(..) => 4,
        _ => 5,
    }
}

fn fmt_prec(e: &Expr, parent: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let me = prec(e);
    if me < parent {
        write!(f, "(")?;
    }
    match e {
        Expr::Const(c) => write!(f, "{c}")?,
        Expr::Var(i) => write!(f, "x{}", i + 1)?,
        Expr::Neg(a) => {
            write!(f, "-")?;
            fmt_prec(a, 4, f)?;
        }
        Expr::Add(a, b) => {
            fmt_prec(a, 1, f)?;
            write!(f, " + ")?;
            fmt_prec(b, 2, f)?;
        }
        Expr::Sub(a, b) => {
            fmt_prec(a, 1, f)?;
            write!(f, " - ")?;
            fmt_prec(b, 2, f)?;
        }
        Expr::Mul(a, b) => {
            fmt_prec(a, 2, f)?;
            write!(f, "*")?;
            fmt_prec(b, 3, f)?;
        }
        Expr::Div(a, b) => {
            fmt_prec(a, 2, f)?;
            write!(f, "/")?;
            fmt_prec(b, 3, f)?;
        }
        Expr::Pow(a, n) => {
            fmt_prec(a, 5, f)?;
            write!(f, "^{n}")?;
        }
        Expr::Call(func, a) => {
            write!(f, "{}(", func.name())?;
            fmt_prec(a, 0, f)?;
            write!(f, ")")?;
        }
    }
    if me < parent {
        write!(f, ")")?;
    }
    Ok(())
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_prec(self, 0, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_for;
    use approx::assert_relative_eq;
    use rand::Rng;

    fn roundtrip(src: &str) -> String {
        parse_expr(src).unwrap().to_string()
    }

    #[test]
    fn canonical_print_is_a_parse_fixed_point() {
        let cases = [
            "x1*x2",
            "x1 + x2*x3",
            "(x1 + x2)*x3",
            "x1 - (x2 - x3)",
            "x1 - x2 + x3",
            "-x1^2",
            "(-x1)^2",
            "x1^-2",
            "x1/x2/x3",
            "x1/(x2*x3)",
            "sin(x1)*cos(x2) + exp(x1*x2)",
            "sqrt(x1 + 2)",
            "flat(x1)",
            "0.5*x1^3 - 1.25",
            "x1*(x2 + 1)^4",
        ];
        for src in cases {
            let printed = roundtrip(src);
            assert_eq!(printed, src, "canonical form drifted for `{src}`");
            assert_eq!(roundtrip(&printed), printed, "print∘parse not idempotent");
        }
    }

    #[test]
    fn noncanonical_input_normalizes_then_stays_fixed() {
        let printed = roundtrip("((x1))*(x2+  3)");
        assert_eq!(printed, "x1*(x2 + 3)");
        assert_eq!(roundtrip(&printed), printed);
    }

    #[test]
    fn symbolic_derivative_agrees_with_jet_tangent() {
        // d/dx and d/dy of x²y + sin(x)·y, checked at random points by
        // comparing the symbolic derivative's value with the tag
        // coefficient of a jet evaluation.
        let e = parse_expr("x1^2*x2 + sin(x1)*x2").unwrap();
        let mut rng = rng_for(3, "expr-deriv");
        for _ in 0..50 {
            let x: f64 = rng.gen_range(-2.0..2.0);
            let y: f64 = rng.gen_range(-2.0..2.0);
            for i in 0..2 {
                let sym = e.derivative(i).unwrap().eval_real(&[x, y]).unwrap();
                let args = [
                    JetValue::seeded(1, x, 1, if i == 0 { 1.0 } else { 0.0 }),
                    JetValue::seeded(1, y, 1, if i == 1 { 1.0 } else { 0.0 }),
                ];
                let jet = e.eval_jet(&args).unwrap().comp(1);
                assert_relative_eq!(sym, jet, epsilon = 1e-12, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn quotient_and_sqrt_derivatives_check_out() {
        let e = parse_expr("x1/sqrt(x2)").unwrap();
        // ∂/∂x2 = −x1 / (2 x2^{3/2})
        let v = e.derivative(1).unwrap().eval_real(&[3.0, 4.0]).unwrap();
        assert_relative_eq!(v, -3.0 / 16.0, epsilon = 1e-12);
    }

    #[test]
    fn flat_has_no_symbolic_derivative() {
        let e = parse_expr("flat(x1)").unwrap();
        assert!(matches!(e.derivative(0), Err(Error::NonSymbolicDerivative(_))));
    }

    #[test]
    fn substitution_composes_formulas() {
        let outer = parse_expr("x1^2 + x2").unwrap();
        let inner = [parse_expr("x1*x2").unwrap(), parse_expr("x1 + 1").unwrap()];
        let composed = outer.substitute(&inner).unwrap();
        let v = composed.eval_real(&[2.0, 3.0]).unwrap();
        assert_relative_eq!(v, 36.0 + 3.0, epsilon = 1e-12);
    }

    #[test]
    fn polynomial_predicate() {
        assert!(parse_expr("x1^3*x2 - 2*x1").unwrap().is_polynomial());
        assert!(!parse_expr("x1^-1").unwrap().is_polynomial());
        assert!(!parse_expr("sin(x1)").unwrap().is_polynomial());
        assert!(!parse_expr("x1/x2").unwrap().is_polynomial());
    }

    #[test]
    fn eval_reports_out_of_range_variables() {
        let e = parse_expr("x3").unwrap();
        assert!(matches!(
            e.eval_real(&[1.0, 2.0]),
            Err(Error::UndefinedVariable { index: 3, arity: 2 })
        ));
    }
}
