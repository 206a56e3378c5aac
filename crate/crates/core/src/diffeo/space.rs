//! Finitely presented smooth spaces.
//!
//! A space is presented by an ambient dimension, a carrier normal form
//! (decidable point equality up to tolerance), a *sampled* plot predicate,
//! a finite family of named generating plots, and a finite family of
//! identification generators — maps between plot domains that the carrier
//! cannot distinguish. Equivalence search and the probes in the sibling
//! modules work entirely against such a presentation.
//!
//! Predicates here are checked at sample points, never proven: a map
//! counts as a plot when its constraints hold on a grid within
//! [`CONSTRAINT_TOL`], its Jacobian respects any rank cap within
//! [`RANK_SV_TOL`], and (for spaces that flatten at the origin) its first
//! derivative vanishes at refined preimages of zero within
//! [`FLATNESS_TOL`]. Sampling density is the caller's `per_axis` choice.

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::map::{JetMap, SmoothMap};
use crate::num::max_abs;
use nalgebra::DMatrix;
use std::fmt;

/// Largest accepted constraint violation at a sample point for a map to
/// count as a plot.
pub const CONSTRAINT_TOL: f64 = 1e-9;

/// Singular values of a plot's Jacobian beyond the allowed rank must stay
/// below this.
pub const RANK_SV_TOL: f64 = 1e-6;

/// First-derivative gate at zero-preimages of plots into spaces that
/// flatten at the origin.
pub const FLATNESS_TOL: f64 = 1e-6;

/// Identification generators must commute over the carrier within this.
pub const IDENT_COMMUTE_TOL: f64 = 1e-9;

/// A sample point counts as a preimage of the origin when the image norm
/// is at or below this. Tight on purpose: a function like exp(−1/t²) is
/// numerically tiny far from its genuine zero, and each admitted fringe
/// point must still clear the flatness gate on its first derivative.
pub const ZERO_PREIMAGE_TOL: f64 = 1e-9;

/// Zero-preimages closer than this (ℓ∞) are merged into one.
pub const PREIMAGE_MERGE_TOL: f64 = 1e-6;

/// At most this many zero-preimages are kept per plot; a flat plot can
/// vanish on a whole interval, which would otherwise flood the report.
pub const MAX_PREIMAGES: usize = 16;

/// How the carrier identifies ambient points. Equality of carrier points
/// is equality of normal forms up to tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CarrierNormal {
    /// Ambient points are already canonical.
    Identity,
    /// Componentwise sign quotient: `x` and `−x` name the same point, with
    /// `|x|` as the canonical representative.
    Abs,
}

impl CarrierNormal {
    /// Canonical representative of the carrier point named by `x`.
    pub fn normal_form(&self, x: &[f64]) -> Vec<f64> {
        match self {
            CarrierNormal::Identity => x.to_vec(),
            CarrierNormal::Abs => x.iter().map(|v| v.abs()).collect(),
        }
    }
}

/// One membership condition on the image of a plot.
#[derive(Clone, Debug)]
pub enum Constraint {
    /// The expression must vanish on the image.
    Zero(Expr),
    /// The expression must be non-negative on the image (boundary allowed).
    NonNeg(Expr),
}

impl Constraint {
    /// Non-negative violation magnitude at an ambient point: `0` exactly
    /// when the condition holds there.
    pub fn violation(&self, y: &[f64]) -> Result<f64> {
        Ok(match self {
            Constraint::Zero(e) => e.eval_real(y)?.abs(),
            Constraint::NonNeg(e) => (-e.eval_real(y)?).max(0.0),
        })
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::Zero(e) => write!(f, "{e} = 0"),
            Constraint::NonNeg(e) => write!(f, "{e} >= 0"),
        }
    }
}

/// Sampled membership test for plots into a space.
#[derive(Clone, Debug)]
pub struct PlotPredicate {
    ambient: usize,
    constraints: Vec<Constraint>,
    max_rank: Option<usize>,
    flat_at_zero: bool,
}

/// Outcome of checking one candidate plot against a predicate. Evaluation
/// failures at sample points count as rejections, not errors, so the check
/// is total on well-formed maps.
#[derive(Clone, Debug)]
pub struct PlotCheck {
    pub pass: bool,
    /// Largest constraint violation seen on the sample grid.
    pub worst_constraint: f64,
    /// Largest singular value beyond the allowed rank (0 when unrestricted).
    pub worst_rank_excess: f64,
    /// Largest first-derivative entry at a zero-preimage (0 when the space
    /// does not flatten at the origin or the plot misses it).
    pub worst_flatness: f64,
    /// First failure, if any.
    pub detail: Option<String>,
}

impl PlotCheck {
    fn clean() -> Self {
        PlotCheck {
            pass: true,
            worst_constraint: 0.0,
            worst_rank_excess: 0.0,
            worst_flatness: 0.0,
            detail: None,
        }
    }

    fn fail(&mut self, detail: String) {
        self.pass = false;
        if self.detail.is_none() {
            self.detail = Some(detail);
        }
    }
}

impl PlotPredicate {
    pub fn new(ambient: usize, constraints: Vec<Constraint>) -> Self {
        PlotPredicate {
            ambient,
            constraints,
            max_rank: None,
            flat_at_zero: false,
        }
    }

    /// Cap the numerical rank of plot Jacobians at every sample point.
    pub fn with_max_rank(mut self, r: usize) -> Self {
        self.max_rank = Some(r);
        self
    }

    /// Require the first derivative to vanish wherever a plot hits the
    /// origin of the ambient space.
    pub fn with_flat_at_zero(mut self) -> Self {
        self.flat_at_zero = true;
        self
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn max_rank(&self) -> Option<usize> {
        self.max_rank
    }

    pub fn flat_at_zero(&self) -> bool {
        self.flat_at_zero
    }

    /// Whether the predicate imposes nothing beyond the ambient arity.
    pub fn is_vacuous(&self) -> bool {
        self.constraints.is_empty() && self.max_rank.is_none() && !self.flat_at_zero
    }

    /// Decide at `per_axis` grid samples whether `plot` is a plot of the
    /// space. Structural mismatches (wrong target dimension) are errors;
    /// everything else — violated constraints, excessive rank, missing
    /// flatness, evaluation failures at samples — is a rejection.
    pub fn check_plot(&self, plot: &SmoothMap, per_axis: usize) -> Result<PlotCheck> {
        if plot.arity_out() != self.ambient {
            return Err(Error::ArityMismatch {
                expected: self.ambient,
                got: plot.arity_out(),
                context: format!("plot `{}` target dimension", plot.name()),
            });
        }
        let mut check = PlotCheck::clean();
        if self.is_vacuous() {
            return Ok(check);
        }

        for u in plot.domain().grid(per_axis) {
            let y = match plot.eval(&u) {
                Ok(y) => y,
                Err(e) => {
                    check.fail(format!("plot `{}` failed to evaluate at {u:?}: {e}", plot.name()));
                    continue;
                }
            };
            for con in &self.constraints {
                match con.violation(&y) {
                    Ok(v) => {
                        if v > check.worst_constraint {
                            check.worst_constraint = v;
                        }
                        if v > CONSTRAINT_TOL {
                            check.fail(format!(
                                "plot `{}` violates `{con}` by {v:e} at {u:?}",
                                plot.name()
                            ));
                        }
                    }
                    Err(e) => check.fail(format!(
                        "constraint `{con}` failed to evaluate on plot `{}` at {u:?}: {e}",
                        plot.name()
                    )),
                }
            }
            if let Some(r) = self.max_rank {
                match plot.jacobian(&u) {
                    Ok(j) => {
                        let sv = singular_values_desc(&j);
                        if r < sv.len() && sv[r] > check.worst_rank_excess {
                            check.worst_rank_excess = sv[r];
                        }
                        if r < sv.len() && sv[r] > RANK_SV_TOL {
                            check.fail(format!(
                                "plot `{}` exceeds rank {r} at {u:?} (sigma_{} = {:e})",
                                plot.name(),
                                r + 1,
                                sv[r]
                            ));
                        }
                    }
                    Err(e) => check.fail(format!(
                        "plot `{}` has no derivative at {u:?}: {e}",
                        plot.name()
                    )),
                }
            }
        }

        if self.flat_at_zero {
            match find_zero_preimages(plot, per_axis) {
                Ok(pres) => {
                    for u in pres {
                        match plot.jacobian(&u) {
                            Ok(j) => {
                                let flat = j.iter().map(|row| max_abs(row)).fold(0.0, f64::max);
                                if flat > check.worst_flatness {
                                    check.worst_flatness = flat;
                                }
                                if flat > FLATNESS_TOL {
                                    check.fail(format!(
                                        "plot `{}` has derivative {flat:e} at the zero-preimage {u:?}",
                                        plot.name()
                                    ));
                                }
                            }
                            Err(e) => check.fail(format!(
                                "plot `{}` has no derivative at the zero-preimage {u:?}: {e}",
                                plot.name()
                            )),
                        }
                    }
                }
                Err(e) => check.fail(format!(
                    "zero-preimage search failed on plot `{}`: {e}",
                    plot.name()
                )),
            }
        }

        Ok(check)
    }
}

/// Singular values of a row-major matrix, sorted descending.
pub(crate) fn singular_values_desc(rows: &[Vec<f64>]) -> Vec<f64> {
    if rows.is_empty() || rows[0].is_empty() {
        return Vec::new();
    }
    let m = DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j]);
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).expect("finite singular values"));
    sv
}

/// Approximate preimages of the ambient origin under `plot`.
///
/// Grid points whose image norm is at or below [`ZERO_PREIMAGE_TOL`] count
/// directly; on one-dimensional domains, local minima of the image norm
/// are additionally refined by ternary search so that isolated quadratic
/// zeros (grid minimum `≈ (Δ/2)²`) are not missed. Results are merged at
/// [`PREIMAGE_MERGE_TOL`] and capped at [`MAX_PREIMAGES`].
pub fn find_zero_preimages(plot: &SmoothMap, per_axis: usize) -> Result<Vec<Vec<f64>>> {
    let dim = plot.domain().dim();
    let scan = if dim == 1 { per_axis.max(101) } else { per_axis };
    let grid = plot.domain().grid(scan);
    let norm_at = |u: &[f64]| -> Result<f64> { Ok(max_abs(&plot.eval(u)?)) };

    let mut found: Vec<Vec<f64>> = Vec::new();
    let push = |u: Vec<f64>, found: &mut Vec<Vec<f64>>| {
        let dup = found.iter().any(|v| {
            v.iter()
                .zip(&u)
                .all(|(a, b)| (a - b).abs() <= PREIMAGE_MERGE_TOL)
        });
        if !dup && found.len() < MAX_PREIMAGES {
            found.push(u);
        }
    };

    let values: Vec<f64> = grid.iter().map(|u| norm_at(u)).collect::<Result<_>>()?;
    for (u, &v) in grid.iter().zip(&values) {
        if v <= ZERO_PREIMAGE_TOL {
            push(u.clone(), &mut found);
        }
    }

    if dim == 1 {
        // Refine interior local minima of the image norm: a simple zero of
        // the norm squeezed between grid nodes shows up as a dip.
        for i in 1..grid.len().saturating_sub(1) {
            if values[i] <= values[i - 1] && values[i] <= values[i + 1] {
                let (mut lo, mut hi) = (grid[i - 1][0], grid[i + 1][0]);
                for _ in 0..200 {
                    let a = lo + (hi - lo) / 3.0;
                    let b = hi - (hi - lo) / 3.0;
                    if norm_at(&[a])? <= norm_at(&[b])? {
                        hi = b;
                    } else {
                        lo = a;
                    }
                }
                let u = 0.5 * (lo + hi);
                if norm_at(&[u])? <= ZERO_PREIMAGE_TOL {
                    push(vec![u], &mut found);
                }
            }
        }
        found.sort_by(|a, b| a[0].partial_cmp(&b[0]).expect("finite preimages"));
    }
    Ok(found)
}

/// A generating plot with a stable name.
#[derive(Clone, Debug)]
pub struct NamedPlot {
    pub name: String,
    pub map: SmoothMap,
}

impl NamedPlot {
    pub fn new(name: impl Into<String>, map: SmoothMap) -> Self {
        NamedPlot {
            name: name.into(),
            map,
        }
    }
}

/// An identification generator: a map `h` between two plot domains such
/// that the target plot after `h` agrees with the source plot on the
/// carrier. Applying it to a tangent representative moves the base point
/// through `h` and the vector through the derivative of `h`.
#[derive(Clone, Debug)]
pub struct IdentGen {
    pub name: String,
    /// Index of the source plot `p` (the generator consumes representatives
    /// living on this plot).
    pub source: usize,
    /// Index of the target plot `q`.
    pub target: usize,
    /// The domain map `h : dom p → dom q` with `q ∘ h = p` on the carrier.
    pub map: SmoothMap,
}

impl IdentGen {
    pub fn new(name: impl Into<String>, source: usize, target: usize, map: SmoothMap) -> Self {
        IdentGen {
            name: name.into(),
            source,
            target,
            map,
        }
    }
}

/// Which invariant a certificate computes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CertificateKind {
    /// ℓ² norm of the ambient image of the sum of a tuple's vectors: the
    /// vectors are pushed through the plot's derivative, summed, and the
    /// norm taken. Constant under any generator whose derivative acts on
    /// the ambient image by a sign, as the sign quotient's flip does.
    FiberSumAbs,
}

/// A function on tangent-tuple representatives that is constant on
/// equivalence classes, used to certify that two tuples are *separated*
/// when search fails to connect them. Constancy is not assumed: the
/// equivalence checker tests it against every registered generator.
#[derive(Clone, Debug)]
pub struct InvariantCertificate {
    pub name: String,
    /// Why the value cannot change along generator applications.
    pub reason: String,
    pub kind: CertificateKind,
}

impl InvariantCertificate {
    pub fn new(name: impl Into<String>, reason: impl Into<String>, kind: CertificateKind) -> Self {
        InvariantCertificate {
            name: name.into(),
            reason: reason.into(),
            kind,
        }
    }

    /// Evaluate on a raw representative: a plot index into `space`, a base
    /// point in that plot's domain, and `k` vectors at that base.
    pub fn eval(
        &self,
        space: &DiffSpace,
        plot: usize,
        base: &[f64],
        vecs: &[Vec<f64>],
    ) -> Result<f64> {
        match self.kind {
            CertificateKind::FiberSumAbs => {
                let map = &space.plots()[plot].map;
                let j = map.jacobian(base)?;
                let mut sum = vec![0.0; map.arity_out()];
                for w in vecs {
                    for (row, s) in j.iter().zip(sum.iter_mut()) {
                        *s += row.iter().zip(w).map(|(a, b)| a * b).sum::<f64>();
                    }
                }
                Ok(sum.iter().map(|v| v * v).sum::<f64>().sqrt())
            }
        }
    }
}

/// A finitely presented smooth space.
#[derive(Clone, Debug)]
pub struct DiffSpace {
    name: String,
    carrier: CarrierNormal,
    predicate: PlotPredicate,
    plots: Vec<NamedPlot>,
    generators: Vec<IdentGen>,
    certificates: Vec<InvariantCertificate>,
}

impl DiffSpace {
    /// Assemble a presentation, checking structural consistency: unique
    /// plot and generator names, plots landing in the ambient space, and
    /// generators connecting existing plots with matching arities.
    pub fn new(
        name: impl Into<String>,
        carrier: CarrierNormal,
        predicate: PlotPredicate,
        plots: Vec<NamedPlot>,
        generators: Vec<IdentGen>,
        certificates: Vec<InvariantCertificate>,
    ) -> Result<Self> {
        let name = name.into();
        for (i, p) in plots.iter().enumerate() {
            if p.map.arity_out() != predicate.ambient() {
                return Err(Error::ArityMismatch {
                    expected: predicate.ambient(),
                    got: p.map.arity_out(),
                    context: format!("plot `{}` of space `{name}`", p.name),
                });
            }
            if plots[..i].iter().any(|q| q.name == p.name) {
                return Err(Error::CorpusViolation(format!(
                    "space `{name}` declares two plots named `{}`",
                    p.name
                )));
            }
        }
        for (i, g) in generators.iter().enumerate() {
            let (Some(p), Some(q)) = (plots.get(g.source), plots.get(g.target)) else {
                return Err(Error::CorpusViolation(format!(
                    "generator `{}` of space `{name}` references a missing plot",
                    g.name
                )));
            };
            if g.map.arity_in() != p.map.arity_in() || g.map.arity_out() != q.map.arity_in() {
                return Err(Error::ArityMismatch {
                    expected: p.map.arity_in(),
                    got: g.map.arity_in(),
                    context: format!("generator `{}` of space `{name}`", g.name),
                });
            }
            if generators[..i].iter().any(|h| h.name == g.name) {
                return Err(Error::CorpusViolation(format!(
                    "space `{name}` declares two generators named `{}`",
                    g.name
                )));
            }
        }
        Ok(DiffSpace {
            name,
            carrier,
            predicate,
            plots,
            generators,
            certificates,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn ambient(&self) -> usize {
        self.predicate.ambient()
    }

    pub fn carrier(&self) -> CarrierNormal {
        self.carrier
    }

    pub fn predicate(&self) -> &PlotPredicate {
        &self.predicate
    }

    pub fn plots(&self) -> &[NamedPlot] {
        &self.plots
    }

    pub fn plot_index(&self, name: &str) -> Option<usize> {
        self.plots.iter().position(|p| p.name == name)
    }

    pub fn generators(&self) -> &[IdentGen] {
        &self.generators
    }

    pub fn generator_index(&self, name: &str) -> Option<usize> {
        self.generators.iter().position(|g| g.name == name)
    }

    pub fn certificates(&self) -> &[InvariantCertificate] {
        &self.certificates
    }

    /// Check the presentation's own obligations at `per_axis` samples:
    /// every generating plot satisfies the plot predicate, and every
    /// identification generator commutes over the carrier within
    /// [`IDENT_COMMUTE_TOL`].
    pub fn validate(&self, per_axis: usize) -> Result<()> {
        for p in &self.plots {
            let check = self.predicate.check_plot(&p.map, per_axis)?;
            if !check.pass {
                return Err(Error::CorpusViolation(format!(
                    "generating plot `{}` of space `{}` fails the plot predicate: {}",
                    p.name,
                    self.name,
                    check.detail.unwrap_or_else(|| "no detail".into())
                )));
            }
        }
        for g in &self.generators {
            let p = &self.plots[g.source].map;
            let q = &self.plots[g.target].map;
            for u in g.map.domain().grid(per_axis) {
                let hu = g.map.eval(&u)?;
                if !q.domain().contains(&hu) {
                    return Err(Error::CorpusViolation(format!(
                        "generator `{}` of space `{}` leaves the target plot domain at {u:?}",
                        g.name, self.name
                    )));
                }
                let lhs = self.carrier.normal_form(&q.eval(&hu)?);
                let rhs = self.carrier.normal_form(&p.eval(&u)?);
                let gap = lhs
                    .iter()
                    .zip(&rhs)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                if gap > IDENT_COMMUTE_TOL {
                    return Err(Error::CorpusViolation(format!(
                        "generator `{}` of space `{}` does not commute over the carrier at {u:?} (gap {gap:e})",
                        g.name, self.name
                    )));
                }
            }
        }
        Ok(())
    }
}
