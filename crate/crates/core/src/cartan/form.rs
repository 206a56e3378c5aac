//! Differential forms with sparse coefficients over box domains.
//!
//! A `k`-form on `R^n` is stored as a map from strictly increasing 0-based
//! index tuples of length `k` to scalar coefficients. Coefficients are
//! either closed-form expressions (kept symbolic through every operation
//! that permits it, so polynomial identities cancel exactly) or jet
//! closures (so operators compose on forms whose coefficients arose from
//! earlier operators).
//!
//! The operators are [`wedge`], [`exterior_d`], [`iota`],
//! [`lie_derivative`], and [`pullback`], plus the linear-algebra helpers
//! [`form_add`] and [`form_scale`]. Sign conventions are fixed by
//! evaluation: a basis product acts on argument vectors as the determinant
//! of the matrix whose rows pick out the indexed components.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::cartan::field::VectorField;
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::expr::{self, Expr};
use crate::jet::JetValue;
use crate::map::{jet_partial, JetMap, SmoothMap};

/// A scalar coefficient: a closed-form expression or a jet closure.
#[derive(Clone)]
pub enum ScalarKernel {
    Expr(Expr),
    Derived(Arc<dyn JetMap>),
}

impl fmt::Debug for ScalarKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarKernel::Expr(e) => write!(f, "Expr({e})"),
            ScalarKernel::Derived(_) => write!(f, "Derived(..)"),
        }
    }
}

impl ScalarKernel {
    pub fn eval_jet(&self, x: &[JetValue]) -> Result<JetValue> {
        match self {
            ScalarKernel::Expr(e) => e.eval_jet(x),
            ScalarKernel::Derived(k) => {
                let mut out = k.eval_jets(x)?;
                if out.len() != 1 {
                    return Err(Error::ArityMismatch {
                        expected: 1,
                        got: out.len(),
                        context: "scalar coefficient kernel".into(),
                    });
                }
                Ok(out.swap_remove(0))
            }
        }
    }

    pub fn eval_real(&self, x: &[f64]) -> Result<f64> {
        match self {
            ScalarKernel::Expr(e) => e.eval_real(x),
            _ => {
                let jets: Vec<JetValue> =
                    x.iter().map(|&c| JetValue::constant(0, c)).collect();
                Ok(self.eval_jet(&jets)?.real())
            }
        }
    }

    pub fn as_expr(&self) -> Option<&Expr> {
        match self {
            ScalarKernel::Expr(e) => Some(e),
            ScalarKernel::Derived(_) => None,
        }
    }

    fn is_literal_zero(&self) -> bool {
        matches!(self, ScalarKernel::Expr(Expr::Const(c)) if *c == 0.0)
    }

    /// Partial derivative along `axis`, symbolic when possible.
    fn partial(&self, axis: usize, arity: usize) -> ScalarKernel {
        if let ScalarKernel::Expr(e) = self {
            if let Ok(d) = e.derivative(axis) {
                return ScalarKernel::Expr(d);
            }
        }
        ScalarKernel::Derived(Arc::new(KernelPartial {
            inner: KernelMap {
                arity,
                kernel: self.clone(),
            },
            axis,
        }))
    }

    /// Signed sum `sum_i c_i * k_i`; `None` when every term drops out.
    /// Stays symbolic when every surviving term is an expression.
    fn sum(arity: usize, terms: Vec<(f64, ScalarKernel)>) -> Option<ScalarKernel> {
        let terms: Vec<(f64, ScalarKernel)> = terms
            .into_iter()
            .filter(|(c, k)| *c != 0.0 && !k.is_literal_zero())
            .collect();
        if terms.is_empty() {
            return None;
        }
        if terms.iter().all(|(_, k)| matches!(k, ScalarKernel::Expr(_))) {
            let mut total: Option<Expr> = None;
            for (c, k) in &terms {
                let e = k.as_expr().expect("expression term").clone();
                let signed = if *c == 1.0 {
                    e
                } else if *c == -1.0 {
                    expr::neg(e)
                } else {
                    expr::mul(expr::cnst(*c), e)
                };
                total = Some(match total {
                    None => signed,
                    Some(t) => expr::add(t, signed),
                });
            }
            return Some(ScalarKernel::Expr(total.expect("nonempty sum")));
        }
        Some(ScalarKernel::Derived(Arc::new(KernelSum { arity, terms })))
    }

    /// Product of two coefficients, symbolic when both are expressions.
    fn product(arity: usize, a: ScalarKernel, b: ScalarKernel) -> ScalarKernel {
        match (&a, &b) {
            (ScalarKernel::Expr(x), ScalarKernel::Expr(y)) => {
                ScalarKernel::Expr(expr::mul(x.clone(), y.clone()))
            }
            _ => ScalarKernel::Derived(Arc::new(KernelProduct {
                arity,
                factors: vec![a, b],
            })),
        }
    }
}

/// A [`ScalarKernel`] pinned to a fixed arity so it can act as a [`JetMap`].
struct KernelMap {
    arity: usize,
    kernel: ScalarKernel,
}

impl JetMap for KernelMap {
    fn arity_in(&self) -> usize {
        self.arity
    }

    fn arity_out(&self) -> usize {
        1
    }

    fn eval_jets(&self, inputs: &[JetValue]) -> Result<Vec<JetValue>> {
        Ok(vec![self.kernel.eval_jet(inputs)?])
    }
}

struct KernelPartial {
    inner: KernelMap,
    axis: usize,
}

impl JetMap for KernelPartial {
    fn arity_in(&self) -> usize {
        self.inner.arity
    }

    fn arity_out(&self) -> usize {
        1
    }

    fn eval_jets(&self, inputs: &[JetValue]) -> Result<Vec<JetValue>> {
        jet_partial(&self.inner, inputs, self.axis)
    }
}

struct KernelSum {
    arity: usize,
    terms: Vec<(f64, ScalarKernel)>,
}

impl JetMap for KernelSum {
    fn arity_in(&self) -> usize {
        self.arity
    }

    fn arity_out(&self) -> usize {
        1
    }

    fn eval_jets(&self, inputs: &[JetValue]) -> Result<Vec<JetValue>> {
        let order = inputs.first().map_or(0, JetValue::order);
        let mut total = JetValue::zero(order);
        for (c, k) in &self.terms {
            total = total.add(&k.eval_jet(inputs)?.scale(*c));
        }
        Ok(vec![total])
    }
}

struct KernelProduct {
    arity: usize,
    factors: Vec<ScalarKernel>,
}

impl JetMap for KernelProduct {
    fn arity_in(&self) -> usize {
        self.arity
    }

    fn arity_out(&self) -> usize {
        1
    }

    fn eval_jets(&self, inputs: &[JetValue]) -> Result<Vec<JetValue>> {
        let order = inputs.first().map_or(0, JetValue::order);
        let mut total = JetValue::constant(order, 1.0);
        for k in &self.factors {
            total = total.mul(&k.eval_jet(inputs)?);
        }
        Ok(vec![total])
    }
}

/// One component of a derived vector field, as a scalar coefficient.
struct FieldComponent {
    field: VectorField,
    index: usize,
}

impl JetMap for FieldComponent {
    fn arity_in(&self) -> usize {
        self.field.arity()
    }

    fn arity_out(&self) -> usize {
        1
    }

    fn eval_jets(&self, inputs: &[JetValue]) -> Result<Vec<JetValue>> {
        let mut out = self.field.velocity_jets(inputs)?;
        Ok(vec![out.swap_remove(self.index)])
    }
}

fn field_component(v: &VectorField, i: usize) -> ScalarKernel {
    match v.exprs() {
        Some(comps) => ScalarKernel::Expr(comps[i].clone()),
        None => ScalarKernel::Derived(Arc::new(FieldComponent {
            field: v.clone(),
            index: i,
        })),
    }
}

fn det_f64(m: &[Vec<f64>]) -> f64 {
    match m.len() {
        0 => 1.0,
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        k => {
            // Laplace expansion along the first row; k is the form degree,
            // so this stays tiny.
            let mut total = 0.0;
            for (j, lead) in m[0].iter().enumerate() {
                if *lead == 0.0 {
                    continue;
                }
                let minor: Vec<Vec<f64>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|(c, _)| *c != j)
                            .map(|(_, v)| *v)
                            .collect()
                    })
                    .collect();
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                total += sign * lead * det_f64(&minor);
            }
            let _ = k;
            total
        }
    }
}

fn det_jet(m: &[Vec<JetValue>], order: usize) -> JetValue {
    match m.len() {
        0 => JetValue::constant(order, 1.0),
        1 => m[0][0].clone(),
        2 => m[0][0].mul(&m[1][1]).sub(&m[0][1].mul(&m[1][0])),
        _ => {
            let mut total = JetValue::zero(order);
            for (j, lead) in m[0].iter().enumerate() {
                let minor: Vec<Vec<JetValue>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|(c, _)| *c != j)
                            .map(|(_, v)| v.clone())
                            .collect()
                    })
                    .collect();
                let term = lead.mul(&det_jet(&minor, order));
                total = if j % 2 == 0 {
                    total.add(&term)
                } else {
                    total.sub(&term)
                };
            }
            total
        }
    }
}

/// Inserts `i` into the strictly increasing tuple `key`, returning the new
/// tuple and the insertion position. `key` must not already contain `i`.
fn insert_sorted(key: &[usize], i: usize) -> (Vec<usize>, usize) {
    let pos = key.partition_point(|&j| j < i);
    let mut out = Vec::with_capacity(key.len() + 1);
    out.extend_from_slice(&key[..pos]);
    out.push(i);
    out.extend_from_slice(&key[pos..]);
    (out, pos)
}

/// All strictly increasing `k`-tuples drawn from `0..n`.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k > n {
        return Vec::new();
    }
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        // Advance the rightmost index that still has room.
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < n - (k - i) {
                cur[i] += 1;
                for j in i + 1..k {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// A differential `k`-form on a box domain in `R^n`.
#[derive(Clone)]
pub struct DifferentialForm {
    name: String,
    dim: usize,
    degree: usize,
    domain: Domain,
    coeffs: BTreeMap<Vec<usize>, ScalarKernel>,
}

impl fmt::Debug for DifferentialForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DifferentialForm")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("degree", &self.degree)
            .field("keys", &self.coeffs.keys().collect::<Vec<_>>())
            .finish_non_exhaustive()
    }
}

impl DifferentialForm {
    pub fn new(
        name: impl Into<String>,
        degree: usize,
        domain: Domain,
        coeffs: BTreeMap<Vec<usize>, ScalarKernel>,
    ) -> Result<Self> {
        let dim = domain.dim();
        for key in coeffs.keys() {
            if key.len() != degree {
                return Err(Error::ArityMismatch {
                    expected: degree,
                    got: key.len(),
                    context: format!("coefficient index tuple {key:?}"),
                });
            }
            let increasing = key.windows(2).all(|w| w[0] < w[1]);
            if !increasing || key.iter().any(|&i| i >= dim) {
                return Err(Error::Domain(format!(
                    "coefficient index tuple {key:?} is not strictly increasing below {dim}"
                )));
            }
        }
        Ok(Self {
            name: name.into(),
            dim,
            degree,
            domain,
            coeffs,
        })
    }

    /// The zero form of the given degree (no stored coefficients).
    pub fn zero(name: impl Into<String>, degree: usize, domain: Domain) -> Self {
        Self {
            name: name.into(),
            dim: domain.dim(),
            degree,
            domain,
            coeffs: BTreeMap::new(),
        }
    }

    /// Builds a form from `(indices, expression)` pairs.
    pub fn from_coeff_exprs(
        name: impl Into<String>,
        degree: usize,
        domain: Domain,
        coeffs: Vec<(Vec<usize>, Expr)>,
    ) -> Result<Self> {
        let map: BTreeMap<Vec<usize>, ScalarKernel> = coeffs
            .into_iter()
            .map(|(k, e)| (k, ScalarKernel::Expr(e)))
            .collect();
        Self::new(name, degree, domain, map)
    }

    /// Wraps a scalar map as a degree-0 form.
    pub fn from_scalar_map(f: &SmoothMap) -> Result<Self> {
        if f.arity_out() != 1 {
            return Err(Error::ArityMismatch {
                expected: 1,
                got: f.arity_out(),
                context: format!("degree-0 form from map {}", f.name()),
            });
        }
        let mut coeffs = BTreeMap::new();
        coeffs.insert(Vec::new(), ScalarKernel::Expr(f.outputs()[0].clone()));
        Self::new(f.name(), 0, f.domain().clone(), coeffs)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&Vec<usize>, &ScalarKernel)> {
        self.coeffs.iter()
    }

    pub fn coeff(&self, key: &[usize]) -> Option<&ScalarKernel> {
        self.coeffs.get(key)
    }

    /// True when every coefficient is an explicit expression.
    pub fn is_symbolic(&self) -> bool {
        self.coeffs.values().all(|k| k.as_expr().is_some())
    }

    /// True when every coefficient is an explicit polynomial expression.
    pub fn is_polynomial(&self) -> bool {
        self.coeffs
            .values()
            .all(|k| k.as_expr().is_some_and(Expr::is_polynomial))
    }

    /// Evaluates the form at `x` on `degree` argument vectors.
    pub fn eval(&self, x: &[f64], args: &[Vec<f64>]) -> Result<f64> {
        if !self.domain.contains(x) {
            return Err(Error::Domain(format!(
                "point {x:?} outside the domain of form {}",
                self.name
            )));
        }
        if args.len() != self.degree {
            return Err(Error::ArityMismatch {
                expected: self.degree,
                got: args.len(),
                context: format!("argument vectors for form {}", self.name),
            });
        }
        for w in args {
            if w.len() != self.dim {
                return Err(Error::ArityMismatch {
                    expected: self.dim,
                    got: w.len(),
                    context: format!("argument vector for form {}", self.name),
                });
            }
        }
        let mut total = 0.0;
        for (key, kernel) in &self.coeffs {
            let c = kernel.eval_real(x)?;
            let m: Vec<Vec<f64>> = key
                .iter()
                .map(|&i| args.iter().map(|w| w[i]).collect())
                .collect();
            total += c * det_f64(&m);
        }
        Ok(total)
    }
}

fn collect_terms(
    name: String,
    degree: usize,
    domain: Domain,
    dim: usize,
    acc: BTreeMap<Vec<usize>, Vec<(f64, ScalarKernel)>>,
) -> Result<DifferentialForm> {
    let mut coeffs = BTreeMap::new();
    for (key, terms) in acc {
        if let Some(k) = ScalarKernel::sum(dim, terms) {
            coeffs.insert(key, k);
        }
    }
    DifferentialForm::new(name, degree, domain, coeffs)
}

/// Exterior product. Degrees add; the result is the zero form whenever the
/// combined degree exceeds the ambient dimension.
pub fn wedge(a: &DifferentialForm, b: &DifferentialForm) -> Result<DifferentialForm> {
    if a.dim != b.dim {
        return Err(Error::ArityMismatch {
            expected: a.dim,
            got: b.dim,
            context: "wedge of forms on different spaces".into(),
        });
    }
    let degree = a.degree + b.degree;
    let domain = a.domain.intersect(&b.domain)?;
    let name = format!("({})^({})", a.name, b.name);
    if degree > a.dim {
        return Ok(DifferentialForm::zero(name, degree, domain));
    }
    let mut acc: BTreeMap<Vec<usize>, Vec<(f64, ScalarKernel)>> = BTreeMap::new();
    for (ka, ca) in &a.coeffs {
        for (kb, cb) in &b.coeffs {
            if ka.iter().any(|i| kb.contains(i)) {
                continue;
            }
            let mut key: Vec<usize> = ka.iter().chain(kb.iter()).copied().collect();
            key.sort_unstable();
            // Shuffle sign: one transposition per out-of-order pair across
            // the two blocks.
            let inversions = ka
                .iter()
                .map(|&i| kb.iter().filter(|&&j| j < i).count())
                .sum::<usize>();
            let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
            let prod = ScalarKernel::product(a.dim, ca.clone(), cb.clone());
            acc.entry(key).or_default().push((sign, prod));
        }
    }
    collect_terms(name, degree, domain, a.dim, acc)
}

/// Exterior derivative. Raises the degree by one; symbolic coefficients are
/// differentiated symbolically, derived ones through jets.
pub fn exterior_d(a: &DifferentialForm) -> Result<DifferentialForm> {
    let degree = a.degree + 1;
    let name = format!("d({})", a.name);
    let mut acc: BTreeMap<Vec<usize>, Vec<(f64, ScalarKernel)>> = BTreeMap::new();
    for (key, c) in &a.coeffs {
        for i in 0..a.dim {
            if key.contains(&i) {
                continue;
            }
            let (nk, pos) = insert_sorted(key, i);
            let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
            acc.entry(nk).or_default().push((sign, c.partial(i, a.dim)));
        }
    }
    collect_terms(name, degree, a.domain.clone(), a.dim, acc)
}

/// Contraction with a vector field. Lowers the degree by one; contracting a
/// degree-0 form is a [`Error::DegreeUnderflow`].
pub fn iota(v: &VectorField, a: &DifferentialForm) -> Result<DifferentialForm> {
    if a.degree == 0 {
        return Err(Error::DegreeUnderflow(format!(
            "contraction of the degree-0 form {}",
            a.name
        )));
    }
    if v.arity() != a.dim {
        return Err(Error::ArityMismatch {
            expected: a.dim,
            got: v.arity(),
            context: "contraction with a field on a different space".into(),
        });
    }
    let domain = a.domain.intersect(v.domain())?;
    let name = format!("i_{}({})", v.name(), a.name);
    let mut acc: BTreeMap<Vec<usize>, Vec<(f64, ScalarKernel)>> = BTreeMap::new();
    for (key, c) in &a.coeffs {
        for (pos, &i) in key.iter().enumerate() {
            let mut nk = key.clone();
            nk.remove(pos);
            let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
            let term = ScalarKernel::product(a.dim, field_component(v, i), c.clone());
            acc.entry(nk).or_default().push((sign, term));
        }
    }
    collect_terms(name, a.degree - 1, domain, a.dim, acc)
}

/// Lie derivative along a field, as contraction-then-derivative plus
/// derivative-then-contraction; on degree 0 it is the directional
/// derivative `df(v)`.
pub fn lie_derivative(v: &VectorField, a: &DifferentialForm) -> Result<DifferentialForm> {
    let name = format!("L_{}({})", v.name(), a.name);
    let da = exterior_d(a)?;
    if a.degree == 0 {
        return Ok(iota(v, &da)?.renamed(name));
    }
    Ok(form_add(&iota(v, &da)?, &exterior_d(&iota(v, a)?)?)?.renamed(name))
}

/// One pullback coefficient: contracts the form's coefficients (composed
/// with the map) against minors of the map's jet Jacobian.
struct PullbackCoeff {
    map: SmoothMap,
    alpha: DifferentialForm,
    key: Vec<usize>,
}

impl JetMap for PullbackCoeff {
    fn arity_in(&self) -> usize {
        self.map.arity_in()
    }

    fn arity_out(&self) -> usize {
        1
    }

    fn eval_jets(&self, inputs: &[JetValue]) -> Result<Vec<JetValue>> {
        let order = inputs.first().map_or(0, JetValue::order);
        let y = self.map.eval_jets(inputs)?;
        let cols: Vec<Vec<JetValue>> = self
            .key
            .iter()
            .map(|&j| jet_partial(&self.map, inputs, j))
            .collect::<Result<_>>()?;
        let mut total = JetValue::zero(order);
        for (ikey, c) in &self.alpha.coeffs {
            let cy = c.eval_jet(&y)?;
            let m: Vec<Vec<JetValue>> = ikey
                .iter()
                .map(|&i| cols.iter().map(|col| col[i].clone()).collect())
                .collect();
            total = total.add(&cy.mul(&det_jet(&m, order)));
        }
        Ok(vec![total])
    }
}

/// Pullback of a form along a map into its ambient space. The result lives
/// on the map's domain; its coefficients evaluate the original coefficients
/// at the image point and weight them with Jacobian minors.
pub fn pullback(f: &SmoothMap, a: &DifferentialForm) -> Result<DifferentialForm> {
    if f.arity_out() != a.dim {
        return Err(Error::ArityMismatch {
            expected: a.dim,
            got: f.arity_out(),
            context: format!("pullback along {}", f.name()),
        });
    }
    let m = f.arity_in();
    let name = format!("{}*({})", f.name(), a.name);
    let mut coeffs = BTreeMap::new();
    if !a.coeffs.is_empty() {
        for key in combinations(m, a.degree) {
            coeffs.insert(
                key.clone(),
                ScalarKernel::Derived(Arc::new(PullbackCoeff {
                    map: f.clone(),
                    alpha: a.clone(),
                    key,
                })),
            );
        }
    }
    DifferentialForm::new(name, a.degree, f.domain().clone(), coeffs)
}

/// Sum of two forms of the same degree on the same space.
pub fn form_add(a: &DifferentialForm, b: &DifferentialForm) -> Result<DifferentialForm> {
    if a.dim != b.dim || a.degree != b.degree {
        return Err(Error::ArityMismatch {
            expected: a.degree,
            got: b.degree,
            context: "sum of forms of different shape".into(),
        });
    }
    let domain = a.domain.intersect(&b.domain)?;
    let name = format!("{} + {}", a.name, b.name);
    let mut acc: BTreeMap<Vec<usize>, Vec<(f64, ScalarKernel)>> = BTreeMap::new();
    for (key, c) in a.coeffs.iter().chain(b.coeffs.iter()) {
        acc.entry(key.clone()).or_default().push((1.0, c.clone()));
    }
    collect_terms(name, a.degree, domain, a.dim, acc)
}

/// Scalar multiple of a form.
pub fn form_scale(s: f64, a: &DifferentialForm) -> DifferentialForm {
    let mut acc: BTreeMap<Vec<usize>, Vec<(f64, ScalarKernel)>> = BTreeMap::new();
    for (key, c) in &a.coeffs {
        acc.entry(key.clone()).or_default().push((s, c.clone()));
    }
    collect_terms(
        format!("{}*({})", s, a.name),
        a.degree,
        a.domain.clone(),
        a.dim,
        acc,
    )
    .expect("rescaling preserves form validity")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{cnst, mul, neg, powi, var, call, Func};
    use crate::num::residual;
    use crate::rng::rng_for;
    use rand::Rng;

    fn dom2() -> Domain {
        Domain::centered(2, 2.0)
    }

    fn rand_vec(rng: &mut rand_chacha::ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect()
    }

    /// x dy - y dx on the plane.
    fn angular() -> DifferentialForm {
        DifferentialForm::from_coeff_exprs(
            "alpha",
            1,
            dom2(),
            vec![(vec![1], var(0)), (vec![0], neg(var(1)))],
        )
        .unwrap()
    }

    #[test]
    fn wedge_of_coordinate_forms_anticommutes() {
        let dx = DifferentialForm::from_coeff_exprs("dx", 1, dom2(), vec![(vec![0], cnst(1.0))])
            .unwrap();
        let dy = DifferentialForm::from_coeff_exprs("dy", 1, dom2(), vec![(vec![1], cnst(1.0))])
            .unwrap();
        let xy = wedge(&dx, &dy).unwrap();
        let yx = wedge(&dy, &dx).unwrap();
        let e1 = vec![1.0, 0.0];
        let e2 = vec![0.0, 1.0];
        let x = [0.3, -0.4];
        assert!((xy.eval(&x, &[e1.clone(), e2.clone()]).unwrap() - 1.0).abs() < 1e-15);
        assert!((yx.eval(&x, &[e1, e2]).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn wedge_collects_scalar_coefficients() {
        // (x dx) ^ (y dy) = xy dx^dy.
        let a = DifferentialForm::from_coeff_exprs("a", 1, dom2(), vec![(vec![0], var(0))])
            .unwrap();
        let b = DifferentialForm::from_coeff_exprs("b", 1, dom2(), vec![(vec![1], var(1))])
            .unwrap();
        let ab = wedge(&a, &b).unwrap();
        let mut rng = rng_for(3, "wedge scalars");
        for _ in 0..10 {
            let x = rand_vec(&mut rng, 2);
            let w1 = rand_vec(&mut rng, 2);
            let w2 = rand_vec(&mut rng, 2);
            let got = ab.eval(&x, &[w1.clone(), w2.clone()]).unwrap();
            let want = x[0] * x[1] * (w1[0] * w2[1] - w1[1] * w2[0]);
            assert!(residual(got, want) < 1e-12);
        }
    }

    #[test]
    fn wedge_beyond_ambient_dimension_is_zero() {
        let a = angular();
        let two = wedge(&a, &a).unwrap();
        assert_eq!(two.degree(), 2);
        let three = wedge(&two, &a).unwrap();
        assert_eq!(three.degree(), 3);
        assert_eq!(three.coeffs().count(), 0);
    }

    #[test]
    fn wedge_is_graded_commutative() {
        let mut rng = rng_for(5, "graded commutativity");
        let a = angular(); // degree 1
        let b = DifferentialForm::from_coeff_exprs(
            "b",
            1,
            dom2(),
            vec![(vec![0], mul(var(0), var(1))), (vec![1], powi(var(1), 2))],
        )
        .unwrap();
        let ab = wedge(&a, &b).unwrap();
        let ba = wedge(&b, &a).unwrap();
        for _ in 0..10 {
            let x = rand_vec(&mut rng, 2);
            let args = vec![rand_vec(&mut rng, 2), rand_vec(&mut rng, 2)];
            let lhs = ab.eval(&x, &args).unwrap();
            // Odd degrees anticommute: sign (-1)^{1*1}.
            let rhs = -ba.eval(&x, &args).unwrap();
            assert!(residual(lhs, rhs) < 1e-12);
        }
    }

    #[test]
    fn exterior_d_of_x_dy_is_the_area_form() {
        let a = DifferentialForm::from_coeff_exprs("a", 1, dom2(), vec![(vec![1], var(0))])
            .unwrap();
        let da = exterior_d(&a).unwrap();
        let mut rng = rng_for(7, "d of x dy");
        for _ in 0..10 {
            let x = rand_vec(&mut rng, 2);
            let w1 = rand_vec(&mut rng, 2);
            let w2 = rand_vec(&mut rng, 2);
            let got = da.eval(&x, &[w1.clone(), w2.clone()]).unwrap();
            let want = w1[0] * w2[1] - w1[1] * w2[0];
            assert!(residual(got, want) < 1e-12);
        }
    }

    #[test]
    fn exterior_d_squares_to_zero_symbolically() {
        use crate::expr::poly::Poly;
        let dom = Domain::centered(3, 2.0);
        let a = DifferentialForm::from_coeff_exprs(
            "a",
            1,
            dom,
            vec![
                (vec![0], mul(powi(var(0), 2), var(2))),
                (vec![1], mul(var(0), mul(var(1), var(2)))),
                (vec![2], powi(var(1), 3)),
            ],
        )
        .unwrap();
        let dda = exterior_d(&exterior_d(&a).unwrap()).unwrap();
        assert!(dda.is_symbolic());
        for (key, c) in dda.coeffs() {
            let p = Poly::from_expr(c.as_expr().unwrap(), 3).unwrap();
            assert!(p.is_zero(), "d(d a) coefficient {key:?} is {p:?}");
        }
    }

    #[test]
    fn contraction_peels_the_first_argument() {
        // i_{d/dx}(dx ^ dy) = dy.
        let dx = DifferentialForm::from_coeff_exprs("dx", 1, dom2(), vec![(vec![0], cnst(1.0))])
            .unwrap();
        let dy = DifferentialForm::from_coeff_exprs("dy", 1, dom2(), vec![(vec![1], cnst(1.0))])
            .unwrap();
        let area = wedge(&dx, &dy).unwrap();
        let ddx = VectorField::from_exprs("ddx", vec![cnst(1.0), cnst(0.0)], dom2()).unwrap();
        let peeled = iota(&ddx, &area).unwrap();
        let mut rng = rng_for(11, "contraction");
        for _ in 0..10 {
            let x = rand_vec(&mut rng, 2);
            let w = rand_vec(&mut rng, 2);
            let got = peeled.eval(&x, &[w.clone()]).unwrap();
            assert!(residual(got, w[1]) < 1e-12);
        }
    }

    #[test]
    fn contraction_underflows_on_scalars() {
        let f = DifferentialForm::from_coeff_exprs("f", 0, dom2(), vec![(vec![], var(0))])
            .unwrap();
        let v = VectorField::from_exprs("v", vec![cnst(1.0), cnst(0.0)], dom2()).unwrap();
        assert!(matches!(iota(&v, &f), Err(Error::DegreeUnderflow(_))));
    }

    #[test]
    fn lie_derivative_along_translation_differentiates_coefficients() {
        // L_{d/dx}(x dx) = dx.
        let a = DifferentialForm::from_coeff_exprs("a", 1, dom2(), vec![(vec![0], var(0))])
            .unwrap();
        let v = VectorField::from_exprs("v", vec![cnst(1.0), cnst(0.0)], dom2()).unwrap();
        let la = lie_derivative(&v, &a).unwrap();
        let mut rng = rng_for(13, "lie translation");
        for _ in 0..10 {
            let x = rand_vec(&mut rng, 2);
            let w = rand_vec(&mut rng, 2);
            let got = la.eval(&x, &[w.clone()]).unwrap();
            assert!(residual(got, w[0]) < 1e-12);
        }
    }

    #[test]
    fn circle_pulls_the_angular_form_back_to_arclength() {
        let f = SmoothMap::new(
            "circle",
            1,
            vec![call(Func::Cos, var(0)), call(Func::Sin, var(0))],
            Domain::centered(1, 1.5),
        )
        .unwrap();
        let fa = pullback(&f, &angular()).unwrap();
        let mut rng = rng_for(17, "circle pullback");
        for _ in 0..20 {
            let t = rng.gen_range(-1.4..1.4);
            let s = rng.gen_range(-2.0..2.0);
            let got = fa.eval(&[t], &[vec![s]]).unwrap();
            assert!(residual(got, s) < 1e-12, "expected dt, got {got} vs {s}");
        }
        // The naturality square: d(f*alpha) = f*(d alpha), and d alpha is a
        // 2-form so its pullback to the line vanishes.
        let d_fa = exterior_d(&fa).unwrap();
        let f_da = pullback(&f, &exterior_d(&angular()).unwrap()).unwrap();
        for _ in 0..5 {
            let t = rng.gen_range(-1.4..1.4);
            let args = vec![rand_vec(&mut rng, 1), rand_vec(&mut rng, 1)];
            assert!(d_fa.eval(&[t], &args).unwrap().abs() < 1e-10);
            assert!(f_da.eval(&[t], &args).unwrap().abs() < 1e-10);
        }
    }

    #[test]
    fn identity_pullback_preserves_values() {
        let id = SmoothMap::new("id", 2, vec![var(0), var(1)], dom2()).unwrap();
        let a = angular();
        let ia = pullback(&id, &a).unwrap();
        let mut rng = rng_for(19, "identity pullback");
        for _ in 0..10 {
            let x = rand_vec(&mut rng, 2);
            let args = vec![rand_vec(&mut rng, 2)];
            let lhs = ia.eval(&x, &args).unwrap();
            let rhs = a.eval(&x, &args).unwrap();
            assert!(residual(lhs, rhs) < 1e-12);
        }
    }

    #[test]
    fn pullback_commutes_with_exterior_d() {
        let f = SmoothMap::new(
            "f",
            2,
            vec![
                mul(var(0), var(1)),
                expr::add(powi(var(0), 2), var(1)),
            ],
            dom2(),
        )
        .unwrap();
        let a = DifferentialForm::from_coeff_exprs(
            "a",
            1,
            Domain::centered(2, 50.0),
            vec![(vec![1], mul(var(0), var(0))), (vec![0], var(1))],
        )
        .unwrap();
        let lhs = exterior_d(&pullback(&f, &a).unwrap()).unwrap();
        let rhs = pullback(&f, &exterior_d(&a).unwrap()).unwrap();
        let mut rng = rng_for(23, "pullback naturality");
        for _ in 0..15 {
            let x = rand_vec(&mut rng, 2);
            let args = vec![rand_vec(&mut rng, 2), rand_vec(&mut rng, 2)];
            let l = lhs.eval(&x, &args).unwrap();
            let r = rhs.eval(&x, &args).unwrap();
            assert!(residual(l, r) < 1e-9, "naturality gap {l} vs {r}");
        }
    }

    #[test]
    fn degree_zero_pullback_is_composition() {
        let f = SmoothMap::new(
            "f",
            1,
            vec![powi(var(0), 2)],
            Domain::centered(1, 1.2),
        )
        .unwrap();
        let g = DifferentialForm::from_coeff_exprs(
            "g",
            0,
            Domain::centered(1, 50.0),
            vec![(vec![], call(Func::Sin, var(0)))],
        )
        .unwrap();
        let fg = pullback(&f, &g).unwrap();
        let got = fg.eval(&[0.7], &[]).unwrap();
        assert!(residual(got, (0.49f64).sin()) < 1e-12);
    }

    #[test]
    fn form_arithmetic_adds_and_scales_pointwise() {
        let a = angular();
        let b = DifferentialForm::from_coeff_exprs("b", 1, dom2(), vec![(vec![0], cnst(2.0))])
            .unwrap();
        let sum = form_add(&a, &form_scale(-0.5, &b)).unwrap();
        let x = [0.4, 0.9];
        let w = vec![1.0, -1.0];
        let want = a.eval(&x, &[w.clone()]).unwrap() - 1.0;
        let got = sum.eval(&x, &[w]).unwrap();
        assert!(residual(got, want) < 1e-12);
    }
}
