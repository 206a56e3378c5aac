//! One suite builder per subcommand. Each function assembles a
//! [`SuiteReport`] whose `pass` flag drives the process exit code; usage
//! problems (empty corpora, impossible probe requests) come back as errors
//! classified by [`tanfold::Error::is_usage`].

use std::fmt;

use tanfold::axioms::{
    run_axiom_suite, CheckConfig, EuclideanOps, TangentOps, TauIdentityOps,
};
use tanfold::cartan::{
    bracket_agreement, cartan_relation_suite, d_squared_symbolic, d_two_path_check, jacobi_check,
    BracketAgreement, VectorField, BRACKET_AGREEMENT_TOL_POLY, BRACKET_AGREEMENT_TOL_TRANSC,
    D_TWO_PATH_TOL, JACOBI_TOL, RELATION_TOL,
};
use tanfold::corpus::Corpus;
use tanfold::diffeo::{
    builtin_space, certificate_constancy, constrained_candidate_rank_bound, equivalent_tangent,
    equivalent_tuple, group_trivialization_check, half_line_tangent_probe,
    theta_surjectivity_probe, DiffSpace, Equivalence, HalfLineProbe, ProbeFamily, ProbeOutcome,
    TangentClass, TangentTuple,
};
use tanfold::report::{dec, CheckEntry, ConfigEcho, SuiteReport};
use tanfold::{Error, JetMap, Result, SmoothMap};

use crate::RunArgs;

/// Default residual gate for checks that compare two exact computations.
const IDENTITY_TOL: f64 = 1e-9;

fn empty_corpus(what: &str) -> Error {
    Error::Parse {
        line: 1,
        col: 1,
        msg: format!("the corpus contains no {what}"),
    }
}

/// Run the seven tangent-structure law checks over the corpus maps.
pub fn axioms(
    corpus: &Corpus,
    args: &RunArgs,
    echo: ConfigEcho,
    corrupt_tau: bool,
) -> Result<SuiteReport> {
    if corpus.maps().is_empty() {
        return Err(empty_corpus("maps"));
    }
    let command = if corrupt_tau {
        "axioms --corrupt-tau"
    } else {
        "axioms"
    };
    let mut report = SuiteReport::new(command, echo);
    let cfg = CheckConfig {
        trials: args.trials(),
        tol: args.tol_or(IDENTITY_TOL),
        seed: args.seed,
    };
    let euclid = EuclideanOps;
    let corrupted = TauIdentityOps;
    let ops: &dyn TangentOps = if corrupt_tau { &corrupted } else { &euclid };
    for r in run_axiom_suite(ops, corpus.maps(), &cfg) {
        report.push((&r).into());
    }
    Ok(report)
}

/// Run the graded commutation relations, the symbolic d∘d = 0 check, and
/// the two-path differential comparison.
pub fn cartan(corpus: &Corpus, args: &RunArgs, echo: ConfigEcho) -> Result<SuiteReport> {
    if corpus.fields().is_empty() {
        return Err(empty_corpus("fields"));
    }
    if corpus.forms().is_empty() {
        return Err(empty_corpus("forms"));
    }
    if !corpus.maps().iter().any(|m| m.arity_out() == 1) {
        return Err(empty_corpus("scalar maps"));
    }
    let mut report = SuiteReport::new("cartan", echo);
    let relations = cartan_relation_suite(
        corpus.fields(),
        corpus.forms(),
        args.trials(),
        args.tol_or(RELATION_TOL),
        args.seed,
    )?;
    for r in &relations {
        report.push(r.into());
    }
    report.push((&d_squared_symbolic(corpus.forms())?).into());
    let two_path = d_two_path_check(
        corpus.maps(),
        args.trials(),
        args.tol_or(D_TWO_PATH_TOL),
        args.seed,
    )?;
    report.push((&two_path).into());
    Ok(report)
}

/// Compare the bundle bracket with the coordinate bracket pointwise over
/// every same-dimension field pair, then check the Jacobi identity.
pub fn bracket(corpus: &Corpus, args: &RunArgs, echo: ConfigEcho) -> Result<SuiteReport> {
    if corpus.fields().is_empty() {
        return Err(empty_corpus("fields"));
    }
    let (poly, transc): (Vec<VectorField>, Vec<VectorField>) = corpus
        .fields()
        .iter()
        .cloned()
        .partition(VectorField::is_polynomial);
    let mut report = SuiteReport::new("bracket", echo);
    if !poly.is_empty() {
        let agg = bracket_agreement(
            &poly,
            args.trials(),
            args.tol_or(BRACKET_AGREEMENT_TOL_POLY),
            args.seed,
        )?;
        report.push(agreement_entry("bracket_agreement_polynomial", &agg));
    }
    if !transc.is_empty() {
        let agg = bracket_agreement(
            &transc,
            args.trials(),
            args.tol_or(BRACKET_AGREEMENT_TOL_TRANSC),
            args.seed,
        )?;
        report.push(agreement_entry("bracket_agreement_transcendental", &agg));
    }
    let jacobi = jacobi_check(
        corpus.fields(),
        args.trials(),
        args.tol_or(JACOBI_TOL),
        args.seed,
    )?;
    report.push((&jacobi).into());
    Ok(report)
}

fn agreement_entry(name: &str, agg: &BracketAgreement) -> CheckEntry {
    let mut detail = format!(
        "{} pairs x {} points, kernel defect {}",
        agg.pairs,
        agg.points_per_pair,
        dec(agg.max_kernel_defect)
    );
    if let Some(w) = &agg.worst {
        detail.push_str("; worst ");
        detail.push_str(w);
    }
    CheckEntry {
        name: name.into(),
        pass: agg.pass,
        trials: agg.pairs * agg.points_per_pair,
        max_residual: dec(agg.max_residual),
        detail: Some(detail),
    }
}

/// Which tangent-space probe `diffeo` should run.
#[derive(Clone, Debug)]
pub enum ProbeSpec {
    /// Search for a single plot realizing `k` independent tangent vectors.
    Theta(usize),
    /// Compare tuples with equal componentwise classes for equivalence.
    ThetaInj,
    /// Tabulate plot derivatives over a boundary fiber and an interior one.
    HalfLine,
    /// Round-trip the matrix-group tangent trivialization.
    Group,
}

impl fmt::Display for ProbeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProbeSpec::Theta(k) => write!(f, "theta{k}"),
            ProbeSpec::ThetaInj => write!(f, "theta2-inj"),
            ProbeSpec::HalfLine => write!(f, "halfline"),
            ProbeSpec::Group => write!(f, "group"),
        }
    }
}

/// Clap value parser for `--probe`.
pub fn parse_probe(s: &str) -> std::result::Result<ProbeSpec, String> {
    match s {
        "theta2-inj" => return Ok(ProbeSpec::ThetaInj),
        "halfline" => return Ok(ProbeSpec::HalfLine),
        "group" => return Ok(ProbeSpec::Group),
        _ => {}
    }
    if let Some(digits) = s.strip_prefix("theta") {
        if !digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit()) {
            if let Ok(k) = digits.parse::<usize>() {
                if k >= 1 {
                    return Ok(ProbeSpec::Theta(k));
                }
            }
        }
    }
    Err(format!(
        "unknown probe `{s}` (expected theta<k>, theta2-inj, halfline, or group)"
    ))
}

/// Resolve the space argument against corpus declarations first, then the
/// built-in catalogue, and dispatch the requested probe.
pub fn diffeo(
    corpus: &Corpus,
    args: &RunArgs,
    echo: ConfigEcho,
    spec: &str,
    probe: &ProbeSpec,
) -> Result<SuiteReport> {
    let space = match corpus.space(spec) {
        Some(decl) => decl.space.clone(),
        None => builtin_space(spec)?,
    };
    let command = format!("diffeo {spec} --probe {probe}");
    let mut report = SuiteReport::new(command, echo);
    match probe {
        ProbeSpec::Theta(k) => theta_probe(&mut report, &space, *k, args)?,
        ProbeSpec::ThetaInj => injectivity_scan(&mut report, &space, args)?,
        ProbeSpec::HalfLine => boundary_tabulation(&mut report, &space)?,
        ProbeSpec::Group => group_check(&mut report, &space, args)?,
    }
    Ok(report)
}

/// The canonical base point of a space: the identity matrix for the matrix
/// group, the origin otherwise.
fn base_point(space: &DiffSpace) -> Vec<f64> {
    let ambient = space.ambient();
    if space.name().starts_with("gl(") {
        let n = (ambient as f64).sqrt().round() as usize;
        let mut x = vec![0.0; ambient];
        for i in 0..n {
            x[i * n + i] = 1.0;
        }
        return x;
    }
    vec![0.0; ambient]
}

fn describe_map(m: &SmoothMap) -> String {
    let comps: Vec<String> = m.outputs().iter().map(|e| e.to_string()).collect();
    format!(
        "{}: R{} -> R{} = {} on {}",
        m.name(),
        m.arity_in(),
        m.arity_out(),
        comps.join(", "),
        m.domain()
    )
}

/// Up to the last eight entries of a descent curve, oldest first.
fn curve_tail(curve: &[f64]) -> String {
    if curve.is_empty() {
        return "empty".into();
    }
    let shown: Vec<String> = curve
        .iter()
        .rev()
        .take(8)
        .rev()
        .map(|v| dec(*v))
        .collect();
    let prefix = if curve.len() > shown.len() { "... " } else { "" };
    format!("[{prefix}{}] ({} steps)", shown.join(" -> "), curve.len())
}

/// Search for one plot hitting `k` independent tangent vectors at the base
/// point; on failure, corroborate with the rank bound over constrained
/// candidates.
fn theta_probe(
    report: &mut SuiteReport,
    space: &DiffSpace,
    k: usize,
    args: &RunArgs,
) -> Result<()> {
    let ambient = space.ambient();
    if k > ambient {
        return Err(Error::ArityMismatch {
            expected: ambient,
            got: k,
            context: format!(
                "theta index on `{}` (ambient dimension {ambient})",
                space.name()
            ),
        });
    }
    let x = base_point(space);
    let targets: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            let mut e = vec![0.0; ambient];
            e[i] = 1.0;
            e
        })
        .collect();
    let family = ProbeFamily::default();
    let name = format!("theta{k}_surjectivity");
    match theta_surjectivity_probe(space, &x, &targets, &family, args.budget, args.seed)? {
        ProbeOutcome::Witness(w) => {
            report.push(CheckEntry {
                name,
                pass: true,
                trials: 1,
                max_residual: dec(w.residual),
                detail: Some(format!("witness plot {}", describe_map(&w.map))),
            });
        }
        ProbeOutcome::NotFoundWithinBudget(r) => {
            report.push(CheckEntry {
                name,
                pass: false,
                trials: r.evals,
                max_residual: dec(r.best_residual),
                detail: Some(format!(
                    "budget {} exhausted after {} evaluations; rank gap {}; {}; residual curve {}; family: {}",
                    r.budget,
                    r.evals,
                    dec(r.rank_gap),
                    r.note,
                    curve_tail(&r.residual_curve),
                    r.family,
                )),
            });
            let bound = constrained_candidate_rank_bound(space, &x, k, &family, args.budget, args.seed)?;
            let sigmas: Vec<String> = bound.sigma2_values.iter().map(|v| dec(*v)).collect();
            report.push(CheckEntry {
                name: format!("rank_bound_k{k}"),
                pass: bound.holds,
                trials: bound.attempts,
                max_residual: dec(bound.max_sigma2),
                detail: Some(format!(
                    "{} of {} restarts converged ({} evaluations); second singular values [{}]",
                    bound.converged,
                    bound.attempts,
                    bound.evals,
                    sigmas.join(", ")
                )),
            });
        }
    }
    Ok(())
}

fn verdict_detail(v: &Equivalence) -> String {
    match v {
        Equivalence::Equivalent { forward, backward } => {
            let f = if forward.is_empty() {
                "(empty)".into()
            } else {
                forward.join(" . ")
            };
            if backward.is_empty() {
                format!("equivalent via forward chain [{f}]")
            } else {
                format!(
                    "equivalent: forward [{f}] meets backward [{}]",
                    backward.join(" . ")
                )
            }
        }
        Equivalence::Separated {
            certificate,
            left,
            right,
        } => format!(
            "separated by `{certificate}`: left {} vs right {}",
            dec(*left),
            dec(*right)
        ),
        Equivalence::Unknown { explored } => {
            format!("no verdict after exploring {explored} states")
        }
    }
}

/// Compare pairs of tangent tuples whose componentwise classes coincide:
/// if the single classes glue but the pair does not, pairing classes loses
/// information and the comparison map is not injective.
fn injectivity_scan(report: &mut SuiteReport, space: &DiffSpace, args: &RunArgs) -> Result<()> {
    let plot = space
        .plots()
        .first()
        .ok_or_else(|| Error::Domain(format!("space `{}` declares no plots", space.name())))?;
    let dim = plot.map.domain().dim();
    let base = vec![0.0; dim];
    let mut fwd = vec![0.0; dim];
    fwd[0] = 1.0;
    let bwd: Vec<f64> = fwd.iter().map(|v| -v).collect();

    let single_a = TangentClass::new(space, &plot.name, base.clone(), fwd.clone())?;
    let single_b = TangentClass::new(space, &plot.name, base.clone(), bwd.clone())?;
    let singles = equivalent_tangent(space, &single_a, &single_b, args.budget)?;
    let singles_glued = matches!(singles, Equivalence::Equivalent { .. });
    report.push(CheckEntry {
        name: "single_class_comparison".into(),
        pass: true,
        trials: 1,
        max_residual: dec(0.0),
        detail: Some(format!(
            "+e1 vs -e1 at the origin of plot `{}`: {}",
            plot.name,
            verdict_detail(&singles)
        )),
    });

    let zeta = TangentTuple::new(
        space,
        &plot.name,
        base.clone(),
        vec![fwd.clone(), fwd.clone()],
    )?;
    let eta = TangentTuple::new(space, &plot.name, base, vec![fwd, bwd])?;
    let pair = equivalent_tuple(space, &zeta, &eta, args.budget)?;
    let pair_separated = matches!(pair, Equivalence::Separated { .. });
    report.push(CheckEntry {
        name: "theta2_injectivity".into(),
        pass: !(singles_glued && pair_separated),
        trials: 1,
        max_residual: dec(0.0),
        detail: Some(format!(
            "(+e1,+e1) vs (+e1,-e1): {}{}",
            verdict_detail(&pair),
            if singles_glued && pair_separated {
                "; the components glue singly, so both tuples map to the same class pair \
                 while staying inequivalent"
            } else {
                ""
            }
        )),
    });

    report.push((&certificate_constancy(space, args.seed)?).into());
    Ok(())
}

fn fiber_summary(p: &HalfLineProbe) -> String {
    if p.vacuous {
        return "no plots reach this point".into();
    }
    let mut per_plot: Vec<(String, usize, f64)> = Vec::new();
    for row in &p.table {
        match per_plot.iter_mut().find(|(n, _, _)| *n == row.plot) {
            Some((_, count, worst)) => {
                *count += 1;
                *worst = worst.max(row.orders[0].abs());
            }
            None => per_plot.push((row.plot.clone(), 1, row.orders[0].abs())),
        }
    }
    let parts: Vec<String> = per_plot
        .iter()
        .map(|(n, c, w)| format!("{n}: {c} preimage(s), worst |order 1| {}", dec(*w)))
        .collect();
    if parts.is_empty() {
        format!("fiber dimension {}", p.dimension)
    } else {
        format!("fiber dimension {}; {}", p.dimension, parts.join("; "))
    }
}

/// Tabulate the tangent fiber at the boundary point 0 (must collapse to a
/// single class) and at the interior point 1 (must stay one-dimensional).
fn boundary_tabulation(report: &mut SuiteReport, space: &DiffSpace) -> Result<()> {
    let per_axis = 101;
    let at_zero = half_line_tangent_probe(space, 0.0, per_axis)?;
    let worst_first_order = at_zero
        .table
        .iter()
        .map(|row| row.orders[0].abs())
        .fold(0.0_f64, f64::max);
    report.push(CheckEntry {
        name: "boundary_fiber_collapsed".into(),
        pass: at_zero.dimension == 0 && !at_zero.vacuous,
        trials: at_zero.table.len(),
        max_residual: dec(worst_first_order),
        detail: Some(fiber_summary(&at_zero)),
    });

    let interior = half_line_tangent_probe(space, 1.0, per_axis)?;
    let witness = interior.witness.as_ref();
    report.push(CheckEntry {
        name: "interior_fiber_line".into(),
        pass: interior.dimension == 1 && witness.is_some(),
        trials: interior.table.len().max(1),
        max_residual: dec(0.0),
        detail: Some(match witness {
            Some(w) => format!("{}; witness {}", fiber_summary(&interior), describe_map(w)),
            None => fiber_summary(&interior),
        }),
    });
    Ok(())
}

/// Round-trip the matrix-group trivialization; only meaningful on `gl(n)`.
fn group_check(report: &mut SuiteReport, space: &DiffSpace, args: &RunArgs) -> Result<()> {
    let ambient = space.ambient();
    let n = (ambient as f64).sqrt().round() as usize;
    if !space.name().starts_with("gl(") || n * n != ambient {
        return Err(Error::Parse {
            line: 1,
            col: 1,
            msg: format!(
                "the group probe needs a gl(n) space, got `{}`",
                space.name()
            ),
        });
    }
    let check = group_trivialization_check(n, args.trials(), args.tol_or(IDENTITY_TOL), args.seed)?;
    report.push((&check).into());
    Ok(())
}
