//! The registry of built-in presented spaces.
//!
//! Each entry is a small, fully explicit presentation chosen to exercise
//! one phenomenon: the axis cross obstructs joint tangent realization at
//! the origin, the folded line separates tangent classes that share a
//! carrier point, the half-line collapses its boundary fiber, the matrix
//! group trivializes its fibers, and the rank-capped families bound how
//! many directions one plot can realize. Parameterized names are written
//! `name(a,b)` and parsed by [`parse_space_spec`].

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::expr::{add, call, cnst, mul, neg, powi, sub, var, Expr, Func};
use crate::map::SmoothMap;

use super::group::det_expr;
use super::space::{
    CarrierNormal, CertificateKind, Constraint, DiffSpace, IdentGen, InvariantCertificate,
    NamedPlot, PlotPredicate,
};

/// Names accepted by [`builtin_space`], with their parameter shapes.
pub const BUILTIN_SPACES: &[&str] = &[
    "euclidean(n)",
    "axis_cross",
    "folded_line",
    "half_line",
    "corner(n,k)",
    "wedge",
    "cusp",
    "band",
    "pasta(n,r)",
    "gl(n)",
];

/// The invertible-matrix chart keeps `det² > GL_DET_SQ_MIN`, bounding the
/// chart away from the singular locus without a sign choice.
pub const GL_DET_SQ_MIN: f64 = 1e-12;

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse {
        line: 1,
        col: 1,
        msg: msg.into(),
    }
}

/// Split a registry spec like `pasta(3,1)` into its name and numeric
/// parameters. A bare name parses to an empty parameter list.
pub fn parse_space_spec(spec: &str) -> Result<(String, Vec<usize>)> {
    let s = spec.trim();
    if s.is_empty() {
        return Err(parse_err("empty space spec"));
    }
    let (name, params) = match s.split_once('(') {
        None => (s, Vec::new()),
        Some((name, rest)) => {
            let Some(inner) = rest.strip_suffix(')') else {
                return Err(parse_err(format!(
                    "space spec `{s}` is missing a closing parenthesis"
                )));
            };
            let mut params = Vec::new();
            for piece in inner.split(',') {
                let piece = piece.trim();
                let v: usize = piece.parse().map_err(|_| {
                    parse_err(format!(
                        "space parameter `{piece}` is not a non-negative integer"
                    ))
                })?;
                params.push(v);
            }
            (name, params)
        }
    };
    let name = name.trim();
    if name.is_empty()
        || !name
            .chars()
            .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
    {
        return Err(parse_err(format!("`{name}` is not a valid space name")));
    }
    Ok((name.to_string(), params))
}

/// Construct a built-in space from its spec string.
pub fn builtin_space(spec: &str) -> Result<DiffSpace> {
    let (name, params) = parse_space_spec(spec)?;
    let wrong = |expected: &str| {
        parse_err(format!(
            "space `{name}` takes {expected}, got {} parameter(s); known spaces: {}",
            params.len(),
            BUILTIN_SPACES.join(", ")
        ))
    };
    match (name.as_str(), params.as_slice()) {
        ("euclidean", &[n]) => euclidean(n),
        ("euclidean", _) => Err(wrong("one parameter")),
        ("axis_cross", &[]) => axis_cross(),
        ("axis_cross", _) => Err(wrong("no parameters")),
        ("folded_line", &[]) => folded_line(),
        ("folded_line", _) => Err(wrong("no parameters")),
        ("half_line", &[]) => half_line(),
        ("half_line", _) => Err(wrong("no parameters")),
        ("corner", &[n, k]) => corner(n, k),
        ("corner", _) => Err(wrong("two parameters")),
        ("wedge", &[]) => wedge(),
        ("wedge", _) => Err(wrong("no parameters")),
        ("cusp", &[]) => cusp(),
        ("cusp", _) => Err(wrong("no parameters")),
        ("band", &[]) => band(),
        ("band", _) => Err(wrong("no parameters")),
        ("pasta", &[n, r]) => pasta(n, r),
        ("pasta", _) => Err(wrong("two parameters")),
        ("gl", &[n]) => general_linear(n),
        ("gl", _) => Err(wrong("one parameter")),
        _ => Err(Error::UnknownSpace(name.clone())),
    }
}

/// ℝⁿ with no conditions: the identity chart is a plot and everything is
/// vacuously admissible.
fn euclidean(n: usize) -> Result<DiffSpace> {
    if n == 0 {
        return Err(parse_err("euclidean(n) needs n >= 1"));
    }
    DiffSpace::new(
        format!("euclidean({n})"),
        CarrierNormal::Identity,
        PlotPredicate::new(n, vec![]),
        vec![NamedPlot::new("id", SmoothMap::identity(n))],
        vec![],
        vec![],
    )
}

/// The union of the two coordinate axes in the plane: maps landing in the
/// zero set of `x₁·x₂`. Each axis carries a velocity at the origin, but no
/// single plot realizes both at once.
fn axis_cross() -> Result<DiffSpace> {
    let axis1 = SmoothMap::new("axis1", 1, vec![var(0), cnst(0.0)], Domain::unit(1))?;
    let axis2 = SmoothMap::new("axis2", 1, vec![cnst(0.0), var(0)], Domain::unit(1))?;
    DiffSpace::new(
        "axis_cross",
        CarrierNormal::Identity,
        PlotPredicate::new(2, vec![Constraint::Zero(mul(var(0), var(1)))]),
        vec![NamedPlot::new("axis1", axis1), NamedPlot::new("axis2", axis2)],
        vec![],
        vec![],
    )
}

/// The line folded by `t ↦ −t`: one quotient plot, one identification
/// generator, and a conserved certificate separating the two tangent
/// classes that sit over the crease.
fn folded_line() -> Result<DiffSpace> {
    let quot = SmoothMap::new("quot", 1, vec![var(0)], Domain::unit(1))?;
    let flip = SmoothMap::new("flip", 1, vec![neg(var(0))], Domain::unit(1))?;
    DiffSpace::new(
        "folded_line",
        CarrierNormal::Abs,
        PlotPredicate::new(1, vec![]),
        vec![NamedPlot::new("quot", quot)],
        vec![IdentGen::new("flip", 0, 0, flip)],
        vec![InvariantCertificate::new(
            "fiber_sum_abs",
            "the norm of the pushed-forward fiber sum is unchanged by every identification generator, so classes with different values can never meet",
            CertificateKind::FiberSumAbs,
        )],
    )
}

/// The non-negative half of the line, its boundary fiber collapsed: plots
/// must stay non-negative and arrive at 0 with vanishing first derivative.
fn half_line() -> Result<DiffSpace> {
    let sq = SmoothMap::new("sq", 1, vec![powi(var(0), 2)], Domain::unit(1))?;
    let quart = SmoothMap::new("quart", 1, vec![powi(var(0), 4)], Domain::unit(1))?;
    let flat = SmoothMap::new("flat", 1, vec![call(Func::Flat, var(0))], Domain::unit(1))?;
    DiffSpace::new(
        "half_line",
        CarrierNormal::Identity,
        PlotPredicate::new(1, vec![Constraint::NonNeg(var(0))]).with_flat_at_zero(),
        vec![
            NamedPlot::new("sq", sq),
            NamedPlot::new("quart", quart),
            NamedPlot::new("flat", flat),
        ],
        vec![],
        vec![],
    )
}

/// ℝⁿ with the first k coordinates non-negative: a corner of codimension
/// k, with a squaring plot touching the boundary and a plot staying in the
/// interior.
fn corner(n: usize, k: usize) -> Result<DiffSpace> {
    if n == 0 || k == 0 || k > n {
        return Err(parse_err("corner(n,k) needs 1 <= k <= n"));
    }
    let constraints = (0..k).map(|i| Constraint::NonNeg(var(i))).collect();
    let squares: Vec<Expr> = (0..n)
        .map(|i| if i < k { powi(var(i), 2) } else { var(i) })
        .collect();
    let interior: Vec<Expr> = (0..n)
        .map(|i| {
            if i < k {
                mul(add(var(i), cnst(1.5)), cnst(0.4))
            } else {
                var(i)
            }
        })
        .collect();
    DiffSpace::new(
        format!("corner({n},{k})"),
        CarrierNormal::Identity,
        PlotPredicate::new(n, constraints),
        vec![
            NamedPlot::new("squares", SmoothMap::new("squares", n, squares, Domain::unit(n))?),
            NamedPlot::new(
                "interior",
                SmoothMap::new("interior", n, interior, Domain::unit(n))?,
            ),
        ],
        vec![],
        vec![],
    )
}

/// Two half-axes joined at the origin: the non-negative part of the axis
/// cross. Both arms reach the corner only with squared parameters.
fn wedge() -> Result<DiffSpace> {
    let arm1 = SmoothMap::new("arm1", 1, vec![powi(var(0), 2), cnst(0.0)], Domain::unit(1))?;
    let arm2 = SmoothMap::new("arm2", 1, vec![cnst(0.0), powi(var(0), 2)], Domain::unit(1))?;
    DiffSpace::new(
        "wedge",
        CarrierNormal::Identity,
        PlotPredicate::new(
            2,
            vec![
                Constraint::NonNeg(var(0)),
                Constraint::NonNeg(var(1)),
                Constraint::Zero(mul(var(0), var(1))),
            ],
        ),
        vec![NamedPlot::new("arm1", arm1), NamedPlot::new("arm2", arm2)],
        vec![],
        vec![],
    )
}

/// The region under the cuspidal curve `x₁³ = x₂²` in the right half
/// plane, pinched to a point at the origin.
fn cusp() -> Result<DiffSpace> {
    let spine = SmoothMap::new(
        "spine",
        1,
        vec![powi(var(0), 2), mul(cnst(0.5), powi(var(0), 3))],
        Domain::unit(1),
    )?;
    let sheet = SmoothMap::new(
        "sheet",
        2,
        vec![powi(var(0), 2), mul(powi(var(0), 3), var(1))],
        Domain::unit(2),
    )?;
    DiffSpace::new(
        "cusp",
        CarrierNormal::Identity,
        PlotPredicate::new(
            2,
            vec![
                Constraint::NonNeg(var(0)),
                Constraint::NonNeg(sub(powi(var(0), 3), powi(var(1), 2))),
            ],
        ),
        vec![NamedPlot::new("spine", spine), NamedPlot::new("sheet", sheet)],
        vec![],
        vec![],
    )
}

/// A smooth strip `x₁ ≥ 0, |x₂| ≤ 1` with no pinching — the cusp's
/// retract target.
fn band() -> Result<DiffSpace> {
    let patch = SmoothMap::new(
        "patch",
        2,
        vec![mul(add(var(0), cnst(1.5)), cnst(0.4)), var(1)],
        Domain::unit(2),
    )?;
    DiffSpace::new(
        "band",
        CarrierNormal::Identity,
        PlotPredicate::new(
            2,
            vec![
                Constraint::NonNeg(var(0)),
                Constraint::NonNeg(sub(cnst(1.0), powi(var(1), 2))),
            ],
        ),
        vec![NamedPlot::new("patch", patch)],
        vec![],
        vec![],
    )
}

/// ℝⁿ carrying only plots of rank at most r: the moment curve generates
/// it, and coordinate embeddings witness each admissible rank.
fn pasta(n: usize, r: usize) -> Result<DiffSpace> {
    if n == 0 || r == 0 {
        return Err(parse_err("pasta(n,r) needs n >= 1 and r >= 1"));
    }
    let moment: Vec<Expr> = (1..=n).map(|p| powi(var(0), p as i32)).collect();
    let mut plots = vec![NamedPlot::new(
        "moment",
        SmoothMap::new("moment", 1, moment, Domain::unit(1))?,
    )];
    if r >= 2 && n >= 2 {
        let lin2: Vec<Expr> = (0..n)
            .map(|i| if i < 2 { var(i) } else { cnst(0.0) })
            .collect();
        plots.push(NamedPlot::new(
            "lin2",
            SmoothMap::new("lin2", 2, lin2, Domain::unit(2))?,
        ));
    }
    if r >= 3 && n >= 3 {
        let lin3: Vec<Expr> = (0..n)
            .map(|i| if i < 3 { var(i) } else { cnst(0.0) })
            .collect();
        plots.push(NamedPlot::new(
            "lin3",
            SmoothMap::new("lin3", 3, lin3, Domain::unit(3))?,
        ));
    }
    DiffSpace::new(
        format!("pasta({n},{r})"),
        CarrierNormal::Identity,
        PlotPredicate::new(n, vec![]).with_max_rank(r),
        plots,
        vec![],
        vec![],
    )
}

/// The invertible n×n matrices as an open chart in ℝ^{n²}: the chart's
/// domain keeps the determinant bounded away from zero.
fn general_linear(n: usize) -> Result<DiffSpace> {
    if n == 0 {
        return Err(parse_err("gl(n) needs n >= 1"));
    }
    let m = n * n;
    let invertible = sub(powi(det_expr(n), 2), cnst(GL_DET_SQ_MIN));
    let chart_domain = Domain::with_predicates(vec![(-4.0, 4.0); m], vec![invertible])?;
    let outputs: Vec<Expr> = (0..m).map(var).collect();
    let chart = SmoothMap::new("chart", m, outputs, chart_domain)?;
    DiffSpace::new(
        format!("gl({n})"),
        CarrierNormal::Identity,
        PlotPredicate::new(m, vec![]),
        vec![NamedPlot::new("chart", chart)],
        vec![],
        vec![],
    )
}
