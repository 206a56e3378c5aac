//! Vector fields and the two routes to their Lie bracket.
//!
//! A vector field on a box domain is a section `x -> (x, v(x))` of the
//! tangent bundle. Brackets are computed two independent ways:
//!
//! * [`bracket_coordinate`] uses the classical component formula
//!   `[v, w]^j = sum_i v^i d_i(w^j) - w^i d_i(v^j)`, built symbolically when
//!   both fields are expression-backed and by directional jets otherwise.
//! * [`bracket_categorical`] never touches that formula. It pushes each
//!   field's section forward along the other field, giving two second-order
//!   elements over the same inner base; their fibrewise difference must lie
//!   in the kernel of the inner projection, which is certified and then
//!   inverted through the vertical-kernel identification to read off the
//!   bracket.
//!
//! Both brackets return [`VectorField`]s whose kernels evaluate on jets, so
//! brackets nest (for the Jacobi identity, or inside Lie derivatives) with
//! no symbolic support required.

use std::fmt;
use std::sync::Arc;

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::expr::{self, Expr};
use crate::jet::JetValue;
use crate::map::{jet_directional, JetMap, SmoothMap};
use crate::num::{max_abs, BASE_MATCH_TOL};
use crate::tangent::TanVec;

/// Largest inner-projection defect tolerated when the categorical bracket
/// inverts the vertical-kernel identification. The defect is identically
/// zero in exact arithmetic; anything above this bound aborts with
/// [`Error::KernelViolation`] instead of silently projecting it away.
pub const BRACKET_KERNEL_TOL: f64 = 1e-10;

#[derive(Clone)]
enum FieldKernel {
    /// One expression per component.
    Explicit(Vec<Expr>),
    /// A jet-evaluable closure (e.g. a nested bracket).
    Derived(Arc<dyn JetMap>),
}

/// A vector field `v : U -> R^n` over a box domain `U` in `R^n`.
#[derive(Clone)]
pub struct VectorField {
    name: String,
    arity: usize,
    domain: Domain,
    kernel: FieldKernel,
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorField")
            .field("name", &self.name)
            .field("arity", &self.arity)
            .finish_non_exhaustive()
    }
}

impl VectorField {
    /// Builds a field from one expression per component.
    pub fn from_exprs(
        name: impl Into<String>,
        components: Vec<Expr>,
        domain: Domain,
    ) -> Result<Self> {
        let arity = domain.dim();
        if components.len() != arity {
            return Err(Error::ArityMismatch {
                expected: arity,
                got: components.len(),
                context: "vector field components".into(),
            });
        }
        for c in &components {
            if c.min_arity() > arity {
                return Err(Error::UndefinedVariable {
                    index: c.min_arity() - 1,
                    arity,
                });
            }
        }
        Ok(Self {
            name: name.into(),
            arity,
            domain,
            kernel: FieldKernel::Explicit(components),
        })
    }

    /// Reinterprets a map `U -> R^n` with `n` inputs as a vector field.
    pub fn from_map(map: &SmoothMap) -> Result<Self> {
        if map.arity_out() != map.arity_in() {
            return Err(Error::ArityMismatch {
                expected: map.arity_in(),
                got: map.arity_out(),
                context: format!("vector field from map {}", map.name()),
            });
        }
        Self::from_exprs(map.name(), map.outputs().to_vec(), map.domain().clone())
    }

    /// Wraps a jet-evaluable closure with matching input/output arity.
    pub fn derived(
        name: impl Into<String>,
        domain: Domain,
        kernel: Arc<dyn JetMap>,
    ) -> Result<Self> {
        let arity = domain.dim();
        if kernel.arity_in() != arity || kernel.arity_out() != arity {
            return Err(Error::ArityMismatch {
                expected: arity,
                got: kernel.arity_in().max(kernel.arity_out()),
                context: "derived vector field kernel".into(),
            });
        }
        Ok(Self {
            name: name.into(),
            arity,
            domain,
            kernel: FieldKernel::Derived(kernel),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// The component expressions, when the field is expression-backed.
    pub fn exprs(&self) -> Option<&[Expr]> {
        match &self.kernel {
            FieldKernel::Explicit(e) => Some(e),
            FieldKernel::Derived(_) => None,
        }
    }

    /// True when every component is an explicit polynomial expression.
    pub fn is_polynomial(&self) -> bool {
        self.exprs()
            .is_some_and(|e| e.iter().all(Expr::is_polynomial))
    }

    /// Evaluates all components on jet arguments.
    pub fn velocity_jets(&self, x: &[JetValue]) -> Result<Vec<JetValue>> {
        if x.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                got: x.len(),
                context: format!("arguments to field {}", self.name),
            });
        }
        match &self.kernel {
            FieldKernel::Explicit(comps) => {
                comps.iter().map(|c| c.eval_jet(x)).collect()
            }
            FieldKernel::Derived(k) => k.eval_jets(x),
        }
    }

    /// Component values at a real point, checked against the domain.
    pub fn velocity(&self, x: &[f64]) -> Result<Vec<f64>> {
        if !self.domain.contains(x) {
            return Err(Error::Domain(format!(
                "point {x:?} outside the domain of field {}",
                self.name
            )));
        }
        self.eval_reals(x)
    }

    /// The section `x -> (x, v(x))` as a tangent vector.
    pub fn section(&self, x: &[f64]) -> Result<TanVec> {
        Ok(TanVec {
            base: x.to_vec(),
            vel: self.velocity(x)?,
        })
    }
}

impl JetMap for VectorField {
    fn arity_in(&self) -> usize {
        self.arity
    }

    fn arity_out(&self) -> usize {
        self.arity
    }

    fn eval_jets(&self, inputs: &[JetValue]) -> Result<Vec<JetValue>> {
        self.velocity_jets(inputs)
    }
}

/// The section `x -> (x, v(x))` as a jet-evaluable map into `R^{2n}`.
struct SectionMap {
    field: VectorField,
}

impl JetMap for SectionMap {
    fn arity_in(&self) -> usize {
        self.field.arity
    }

    fn arity_out(&self) -> usize {
        2 * self.field.arity
    }

    fn eval_jets(&self, inputs: &[JetValue]) -> Result<Vec<JetValue>> {
        let mut out = inputs.to_vec();
        out.extend(self.field.velocity_jets(inputs)?);
        Ok(out)
    }
}

/// A second-order element with jet-valued slots: base point, the two
/// first-order fibres, and the mixed slot.
struct JetTan2 {
    base: Vec<JetValue>,
    v0: Vec<JetValue>,
    v1: Vec<JetValue>,
    v01: Vec<JetValue>,
}

/// Pushes the section of `field` forward along `dir` at the jet point `x`,
/// producing the second-order element `(x, field(x), dir, D field(x).dir)`.
fn section_pushforward(
    field: &VectorField,
    x: &[JetValue],
    dir: &[JetValue],
) -> Result<JetTan2> {
    let sec = SectionMap {
        field: field.clone(),
    };
    let value = sec.eval_jets(x)?;
    let deriv = jet_directional(&sec, x, dir)?;
    let n = field.arity;
    Ok(JetTan2 {
        base: value[..n].to_vec(),
        v0: value[n..].to_vec(),
        v1: deriv[..n].to_vec(),
        v01: deriv[n..].to_vec(),
    })
}

/// Exchanges the two first-order fibres (the flip of the double bundle).
fn jet_tan2_swap(e: JetTan2) -> JetTan2 {
    JetTan2 {
        base: e.base,
        v0: e.v1,
        v1: e.v0,
        v01: e.v01,
    }
}

fn slot_gap(a: &[JetValue], b: &[JetValue]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.comps().iter().zip(y.comps()).map(|(p, q)| (p - q).abs()))
        .fold(0.0, f64::max)
}

fn sub_slot(a: &[JetValue], b: &[JetValue]) -> Vec<JetValue> {
    a.iter().zip(b).map(|(x, y)| x.sub(y)).collect()
}

/// Fibrewise difference of two second-order elements over their shared
/// inner projection `(base, v0)`.
fn jet_tan2_sub_inner(a: &JetTan2, b: &JetTan2, context: &str) -> Result<JetTan2> {
    let gap = slot_gap(&a.base, &b.base).max(slot_gap(&a.v0, &b.v0));
    if gap > BASE_MATCH_TOL {
        return Err(Error::BaseMismatch {
            gap,
            tol: BASE_MATCH_TOL,
            context: context.into(),
        });
    }
    Ok(JetTan2 {
        base: a.base.clone(),
        v0: a.v0.clone(),
        v1: sub_slot(&a.v1, &b.v1),
        v01: sub_slot(&a.v01, &b.v01),
    })
}

/// Inverts the vertical-kernel identification `(u, [a, c]) -> (u, a, 0, c)`:
/// certifies that the first fibre vanishes, then returns the two surviving
/// slots along with the certified defect.
fn jet_tan2_kernel_inverse(
    e: &JetTan2,
    tol: f64,
) -> Result<(Vec<JetValue>, Vec<JetValue>, f64)> {
    let defect = e
        .v1
        .iter()
        .map(|j| max_abs(j.comps()))
        .fold(0.0, f64::max);
    if !(defect <= tol) {
        return Err(Error::KernelViolation {
            slot: "v1".into(),
            residual: defect,
            tol,
        });
    }
    Ok((e.v0.clone(), e.v01.clone(), defect))
}

/// Jet-evaluable kernel of the categorical bracket `[v, w]`.
pub struct CategoricalBracket {
    v: VectorField,
    w: VectorField,
}

impl CategoricalBracket {
    pub fn new(v: &VectorField, w: &VectorField) -> Result<Self> {
        if v.arity != w.arity {
            return Err(Error::ArityMismatch {
                expected: v.arity,
                got: w.arity,
                context: "bracket of fields on different spaces".into(),
            });
        }
        Ok(Self {
            v: v.clone(),
            w: w.clone(),
        })
    }

    /// Runs the bundle pipeline at the jet point `x`, returning the bracket
    /// components and the inner-projection defect that was certified.
    pub fn eval_with_defect(&self, x: &[JetValue]) -> Result<(Vec<JetValue>, f64)> {
        let v_at = self.v.velocity_jets(x)?;
        let w_at = self.w.velocity_jets(x)?;
        // xi = (x, w(x), v(x), Dw.v): the section of w pushed along v.
        let xi = section_pushforward(&self.w, x, &v_at)?;
        // The section of v pushed along w is (x, v(x), w(x), Dv.w); flipping
        // its fibres aligns its inner projection with xi's.
        let eta = jet_tan2_swap(section_pushforward(&self.v, x, &w_at)?);
        let delta = jet_tan2_sub_inner(&xi, &eta, "categorical bracket difference")?;
        let (_, mixed, defect) = jet_tan2_kernel_inverse(&delta, BRACKET_KERNEL_TOL)?;
        Ok((mixed, defect))
    }
}

impl JetMap for CategoricalBracket {
    fn arity_in(&self) -> usize {
        self.v.arity
    }

    fn arity_out(&self) -> usize {
        self.v.arity
    }

    fn eval_jets(&self, inputs: &[JetValue]) -> Result<Vec<JetValue>> {
        Ok(self.eval_with_defect(inputs)?.0)
    }
}

/// The Lie bracket computed through the double-bundle pipeline. The
/// returned field's kernel re-runs the pipeline (including its kernel
/// certificate) on every evaluation.
pub fn bracket_categorical(v: &VectorField, w: &VectorField) -> Result<VectorField> {
    let kernel = CategoricalBracket::new(v, w)?;
    let domain = v.domain.intersect(&w.domain)?;
    VectorField::derived(
        format!("[{}, {}]", v.name, w.name),
        domain,
        Arc::new(kernel),
    )
}

/// Runs the categorical pipeline once at a real point and reports the
/// inner-projection defect it certified.
pub fn bracket_kernel_defect(v: &VectorField, w: &VectorField, x: &[f64]) -> Result<f64> {
    let kernel = CategoricalBracket::new(v, w)?;
    let jets: Vec<JetValue> = x.iter().map(|&c| JetValue::constant(0, c)).collect();
    Ok(kernel.eval_with_defect(&jets)?.1)
}

/// Jet-evaluable kernel of the coordinate bracket: two directional
/// derivatives and a subtraction.
struct CoordinateBracket {
    v: VectorField,
    w: VectorField,
}

impl JetMap for CoordinateBracket {
    fn arity_in(&self) -> usize {
        self.v.arity
    }

    fn arity_out(&self) -> usize {
        self.v.arity
    }

    fn eval_jets(&self, inputs: &[JetValue]) -> Result<Vec<JetValue>> {
        let v_at = self.v.velocity_jets(inputs)?;
        let w_at = self.w.velocity_jets(inputs)?;
        let dw_v = jet_directional(&self.w, inputs, &v_at)?;
        let dv_w = jet_directional(&self.v, inputs, &w_at)?;
        Ok(sub_slot(&dw_v, &dv_w))
    }
}

fn symbolic_bracket(ve: &[Expr], we: &[Expr], n: usize) -> Option<Vec<Expr>> {
    let mut comps = Vec::with_capacity(n);
    for j in 0..n {
        let mut total: Option<Expr> = None;
        for i in 0..n {
            let dw = we[j].derivative(i).ok()?;
            let dv = ve[j].derivative(i).ok()?;
            let term = expr::sub(
                expr::mul(ve[i].clone(), dw),
                expr::mul(we[i].clone(), dv),
            );
            total = Some(match total {
                None => term,
                Some(t) => expr::add(t, term),
            });
        }
        comps.push(total.expect("bracket over at least one axis"));
    }
    Some(comps)
}

/// The Lie bracket via the component formula
/// `[v, w]^j = sum_i v^i d_i(w^j) - w^i d_i(v^j)`.
///
/// When both fields are expression-backed and all component derivatives
/// exist symbolically, the result is an explicit expression field (exact for
/// polynomials); otherwise the formula is evaluated through directional
/// jets on demand.
pub fn bracket_coordinate(v: &VectorField, w: &VectorField) -> Result<VectorField> {
    if v.arity != w.arity {
        return Err(Error::ArityMismatch {
            expected: v.arity,
            got: w.arity,
            context: "bracket of fields on different spaces".into(),
        });
    }
    let domain = v.domain.intersect(&w.domain)?;
    let name = format!("[{}, {}]", v.name, w.name);
    if let (FieldKernel::Explicit(ve), FieldKernel::Explicit(we)) = (&v.kernel, &w.kernel) {
        if let Some(comps) = symbolic_bracket(ve, we, v.arity) {
            return VectorField::from_exprs(name, comps, domain);
        }
    }
    VectorField::derived(
        name,
        domain,
        Arc::new(CoordinateBracket {
            v: v.clone(),
            w: w.clone(),
        }),
    )
}

struct SumField {
    a: VectorField,
    b: VectorField,
}

impl JetMap for SumField {
    fn arity_in(&self) -> usize {
        self.a.arity
    }

    fn arity_out(&self) -> usize {
        self.a.arity
    }

    fn eval_jets(&self, inputs: &[JetValue]) -> Result<Vec<JetValue>> {
        let xs = self.a.velocity_jets(inputs)?;
        let ys = self.b.velocity_jets(inputs)?;
        Ok(xs.iter().zip(&ys).map(|(x, y)| x.add(y)).collect())
    }
}

/// Pointwise sum of two fields on the intersection of their domains.
pub fn vf_add(a: &VectorField, b: &VectorField) -> Result<VectorField> {
    if a.arity != b.arity {
        return Err(Error::ArityMismatch {
            expected: a.arity,
            got: b.arity,
            context: "sum of fields on different spaces".into(),
        });
    }
    let domain = a.domain.intersect(&b.domain)?;
    let name = format!("{} + {}", a.name, b.name);
    if let (FieldKernel::Explicit(ae), FieldKernel::Explicit(be)) = (&a.kernel, &b.kernel) {
        let comps = ae
            .iter()
            .zip(be)
            .map(|(x, y)| expr::add(x.clone(), y.clone()))
            .collect();
        return VectorField::from_exprs(name, comps, domain);
    }
    VectorField::derived(
        name,
        domain,
        Arc::new(SumField {
            a: a.clone(),
            b: b.clone(),
        }),
    )
}

struct ScaledField {
    scalar: SmoothMap,
    field: VectorField,
}

impl JetMap for ScaledField {
    fn arity_in(&self) -> usize {
        self.field.arity
    }

    fn arity_out(&self) -> usize {
        self.field.arity
    }

    fn eval_jets(&self, inputs: &[JetValue]) -> Result<Vec<JetValue>> {
        let s = &self.scalar.eval_jets(inputs)?[0];
        let comps = self.field.velocity_jets(inputs)?;
        Ok(comps.iter().map(|c| c.mul(s)).collect())
    }
}

/// The module action `f . v` of a scalar map on a vector field.
pub fn vf_module_action(f: &SmoothMap, v: &VectorField) -> Result<VectorField> {
    if f.arity_out() != 1 {
        return Err(Error::ArityMismatch {
            expected: 1,
            got: f.arity_out(),
            context: format!("scalar factor {}", f.name()),
        });
    }
    if f.arity_in() != v.arity {
        return Err(Error::ArityMismatch {
            expected: v.arity,
            got: f.arity_in(),
            context: "module action on a field over a different space".into(),
        });
    }
    let domain = f.domain().intersect(&v.domain)?;
    let name = format!("{}*{}", f.name(), v.name);
    if let FieldKernel::Explicit(comps) = &v.kernel {
        let scaled = comps
            .iter()
            .map(|c| expr::mul(f.outputs()[0].clone(), c.clone()))
            .collect();
        return VectorField::from_exprs(name, scaled, domain);
    }
    VectorField::derived(
        name,
        domain,
        Arc::new(ScaledField {
            scalar: f.clone(),
            field: v.clone(),
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{call, cnst, mul, powi, var, Func};
    use crate::rng::rng_for;
    use rand::Rng;

    fn field(name: &str, comps: Vec<Expr>, dim: usize) -> VectorField {
        VectorField::from_exprs(name, comps, Domain::centered(dim, 2.0)).unwrap()
    }

    fn max_gap(a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn straightening_pair_brackets_to_the_constant_field() {
        // [d/dx, x d/dx] = d/dx on the line.
        let v = field("v", vec![cnst(1.0)], 1);
        let w = field("w", vec![var(0)], 1);
        let coord = bracket_coordinate(&v, &w).unwrap();
        let cat = bracket_categorical(&v, &w).unwrap();
        let mut rng = rng_for(7, "straightening");
        for _ in 0..20 {
            let x = [rng.gen_range(-1.5..1.5)];
            assert!((coord.velocity(&x).unwrap()[0] - 1.0).abs() < 1e-12);
            assert!((cat.velocity(&x).unwrap()[0] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rotation_pair_brackets_to_the_hyperbolic_field() {
        // [x2 d/dx1, x1 d/dx2] = x2 d/dx2 - x1 d/dx1.
        let v = field("v", vec![var(1), cnst(0.0)], 2);
        let w = field("w", vec![cnst(0.0), var(0)], 2);
        let coord = bracket_coordinate(&v, &w).unwrap();
        let cat = bracket_categorical(&v, &w).unwrap();
        let mut rng = rng_for(11, "rotation pair");
        for _ in 0..20 {
            let x = [rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)];
            let expected = [-x[0], x[1]];
            assert!(max_gap(&coord.velocity(&x).unwrap(), &expected) < 1e-12);
            assert!(max_gap(&cat.velocity(&x).unwrap(), &expected) < 1e-12);
        }
    }

    #[test]
    fn both_routes_agree_on_transcendental_fields() {
        let v = field(
            "v",
            vec![call(Func::Sin, var(1)), mul(var(0), var(1))],
            2,
        );
        let w = field(
            "w",
            vec![powi(var(0), 2), call(Func::Exp, mul(cnst(0.3), var(0)))],
            2,
        );
        let coord = bracket_coordinate(&v, &w).unwrap();
        let cat = bracket_categorical(&v, &w).unwrap();
        let mut rng = rng_for(13, "transcendental agreement");
        for _ in 0..50 {
            let x = [rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)];
            let gap = max_gap(&coord.velocity(&x).unwrap(), &cat.velocity(&x).unwrap());
            assert!(gap < 1e-9, "routes disagree by {gap}");
        }
    }

    #[test]
    fn categorical_kernel_defect_is_bitwise_zero() {
        let v = field("v", vec![call(Func::Cos, var(0)), var(1)], 2);
        let w = field("w", vec![mul(var(0), var(1)), cnst(1.0)], 2);
        let mut rng = rng_for(17, "kernel defect");
        for _ in 0..20 {
            let x = [rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)];
            let defect = bracket_kernel_defect(&v, &w, &x).unwrap();
            assert_eq!(defect, 0.0);
        }
    }

    #[test]
    fn bracket_is_antisymmetric_and_vanishes_on_the_diagonal() {
        let v = field("v", vec![mul(var(0), var(1)), powi(var(1), 2)], 2);
        let w = field("w", vec![var(1), var(0)], 2);
        let vw = bracket_categorical(&v, &w).unwrap();
        let wv = bracket_categorical(&w, &v).unwrap();
        let vv = bracket_categorical(&v, &v).unwrap();
        let mut rng = rng_for(19, "antisymmetry");
        for _ in 0..20 {
            let x = [rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)];
            let a = vw.velocity(&x).unwrap();
            let b = wv.velocity(&x).unwrap();
            let z = vv.velocity(&x).unwrap();
            let neg_b: Vec<f64> = b.iter().map(|c| -c).collect();
            assert!(max_gap(&a, &neg_b) < 1e-12);
            assert!(max_abs(&z) < 1e-12);
        }
    }

    #[test]
    fn module_action_satisfies_the_leibniz_identity() {
        // [v, f.w] = f.[v, w] + (df.v).w
        let dom = Domain::centered(2, 2.0);
        let v = field("v", vec![var(1), powi(var(0), 2)], 2);
        let w = field("w", vec![var(0), mul(var(0), var(1))], 2);
        let f = SmoothMap::new(
            "f",
            2,
            vec![expr::add(mul(var(0), var(1)), cnst(1.0))],
            dom.clone(),
        )
        .unwrap();
        // df.v = sum_i d_i(f) v^i, assembled symbolically.
        let df_v = SmoothMap::new(
            "df.v",
            2,
            vec![expr::add(
                mul(f.outputs()[0].derivative(0).unwrap(), var(1)),
                mul(f.outputs()[0].derivative(1).unwrap(), powi(var(0), 2)),
            )],
            dom,
        )
        .unwrap();
        let lhs = bracket_coordinate(&v, &vf_module_action(&f, &w).unwrap()).unwrap();
        let rhs = vf_add(
            &vf_module_action(&f, &bracket_coordinate(&v, &w).unwrap()).unwrap(),
            &vf_module_action(&df_v, &w).unwrap(),
        )
        .unwrap();
        let lhs_cat = bracket_categorical(&v, &vf_module_action(&f, &w).unwrap()).unwrap();
        let mut rng = rng_for(23, "leibniz");
        for _ in 0..30 {
            let x = [rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)];
            let a = lhs.velocity(&x).unwrap();
            let b = rhs.velocity(&x).unwrap();
            let c = lhs_cat.velocity(&x).unwrap();
            assert!(max_gap(&a, &b) < 1e-10);
            assert!(max_gap(&c, &b) < 1e-9);
        }
    }

    #[test]
    fn nested_brackets_satisfy_jacobi_at_a_point() {
        let u = field("u", vec![var(1), cnst(1.0)], 2);
        let v = field("v", vec![powi(var(0), 2), var(0)], 2);
        let w = field("w", vec![mul(var(0), var(1)), powi(var(1), 2)], 2);
        let a = bracket_categorical(&u, &bracket_categorical(&v, &w).unwrap()).unwrap();
        let b = bracket_categorical(&v, &bracket_categorical(&w, &u).unwrap()).unwrap();
        let c = bracket_categorical(&w, &bracket_categorical(&u, &v).unwrap()).unwrap();
        let x = [0.4, -0.7];
        let total: Vec<f64> = a
            .velocity(&x)
            .unwrap()
            .iter()
            .zip(&b.velocity(&x).unwrap())
            .zip(&c.velocity(&x).unwrap())
            .map(|((p, q), r)| p + q + r)
            .collect();
        assert!(max_abs(&total) < 1e-10, "jacobi defect {total:?}");
    }

    #[test]
    fn coordinate_bracket_of_polynomials_is_symbolic() {
        let v = field("v", vec![var(1), cnst(0.0)], 2);
        let w = field("w", vec![cnst(0.0), var(0)], 2);
        let b = bracket_coordinate(&v, &w).unwrap();
        assert!(b.exprs().is_some());
        assert!(b.is_polynomial());
    }

    #[test]
    fn section_pairs_point_with_velocity() {
        let v = field("v", vec![powi(var(0), 3)], 1);
        let s = v.section(&[0.5]).unwrap();
        assert_eq!(s.base, vec![0.5]);
        assert!((s.vel[0] - 0.125).abs() < 1e-15);
    }
}
