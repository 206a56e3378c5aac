//! Smooth maps: the jet-evaluation interface and its symbolic implementation.
//!
//! [`JetMap`] is the minimal contract every differentiable object in the
//! crate satisfies: evaluate all outputs on a shared tuple of input jets.
//! Because jets carry their derivative data through arithmetic exactly,
//! one interface covers plain evaluation, pushforwards of every order, and
//! directional derivatives — the caller chooses by how it seeds the tags.
//!
//! [`SmoothMap`] is the workhorse implementation: a named tuple of
//! expressions over a [`Domain`]. Composition is symbolic substitution, so
//! composites stay first-class `SmoothMap`s and can be differentiated again.

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::jet::JetValue;
use std::sync::Arc;

/// Anything that can be evaluated on a tuple of jets.
pub trait JetMap: Send + Sync {
    /// Number of inputs the map consumes.
    fn arity_in(&self) -> usize;

    /// Number of outputs the map produces.
    fn arity_out(&self) -> usize;

    /// Evaluate every output on the given input jets. All inputs must share
    /// one order; outputs have that same order.
    fn eval_jets(&self, inputs: &[JetValue]) -> Result<Vec<JetValue>>;

    /// Plain (order-0) evaluation.
    fn eval_reals(&self, x: &[f64]) -> Result<Vec<f64>> {
        let jets: Vec<JetValue> = x.iter().map(|&v| JetValue::constant(0, v)).collect();
        Ok(self.eval_jets(&jets)?.into_iter().map(|j| j.real()).collect())
    }
}

impl<M: JetMap + ?Sized> JetMap for Arc<M> {
    fn arity_in(&self) -> usize {
        (**self).arity_in()
    }
    fn arity_out(&self) -> usize {
        (**self).arity_out()
    }
    fn eval_jets(&self, inputs: &[JetValue]) -> Result<Vec<JetValue>> {
        (**self).eval_jets(inputs)
    }
    fn eval_reals(&self, x: &[f64]) -> Result<Vec<f64>> {
        (**self).eval_reals(x)
    }
}

fn check_arity(expected: usize, got: usize, context: &str) -> Result<()> {
    if expected != got {
        return Err(Error::ArityMismatch {
            expected,
            got,
            context: context.into(),
        });
    }
    Ok(())
}

/// Evaluate a [`JetMap`] seeding nothing: convenience wrapper used by code
/// that holds inputs as jets already.
pub fn jet_eval<M: JetMap + ?Sized>(map: &M, inputs: &[JetValue]) -> Result<Vec<JetValue>> {
    check_arity(map.arity_in(), inputs.len(), "jet_eval inputs")?;
    map.eval_jets(inputs)
}

/// Directional derivative of `map` at the jet point `x` along the jet
/// direction `dir`, computed by adjoining one fresh top tag.
///
/// Joining `x[i]` (low half) with `dir[i]` (top half) evaluates the map on
/// the curve `x + eps * dir` to first order in the new tag; the top slice of
/// each output is then exactly `Dmap(x) . dir`, still a jet of the original
/// order in the remaining tags.
pub fn jet_directional<M: JetMap + ?Sized>(
    map: &M,
    x: &[JetValue],
    dir: &[JetValue],
) -> Result<Vec<JetValue>> {
    check_arity(map.arity_in(), x.len(), "jet_directional point")?;
    check_arity(x.len(), dir.len(), "jet_directional direction")?;
    let joined: Vec<JetValue> = x
        .iter()
        .zip(dir)
        .map(|(lo, hi)| JetValue::join_top(lo, hi))
        .collect();
    let out = map.eval_jets(&joined)?;
    Ok(out.iter().map(|j| j.split_top().1).collect())
}

/// Partial derivative of `map` with respect to input `axis`, evaluated at the
/// jet point `x`. This is [`jet_directional`] along the `axis`-th coordinate
/// direction.
pub fn jet_partial<M: JetMap + ?Sized>(
    map: &M,
    x: &[JetValue],
    axis: usize,
) -> Result<Vec<JetValue>> {
    check_arity(map.arity_in(), x.len(), "jet_partial point")?;
    assert!(axis < x.len(), "axis {axis} out of range for {} inputs", x.len());
    let order = x.first().map_or(0, JetValue::order);
    let dir: Vec<JetValue> = (0..x.len())
        .map(|i| JetValue::constant(order, if i == axis { 1.0 } else { 0.0 }))
        .collect();
    jet_directional(map, x, &dir)
}

/// A named tuple of scalar expressions on an open domain.
#[derive(Clone, Debug)]
pub struct SmoothMap {
    name: String,
    arity_in: usize,
    outputs: Vec<Expr>,
    domain: Domain,
}

impl SmoothMap {
    pub fn new(
        name: impl Into<String>,
        arity_in: usize,
        outputs: Vec<Expr>,
        domain: Domain,
    ) -> Result<Self> {
        let name = name.into();
        check_arity(arity_in, domain.dim(), "map domain dimension")?;
        if outputs.is_empty() {
            return Err(Error::Domain(format!("map {name} has no outputs")));
        }
        for out in &outputs {
            if out.min_arity() > arity_in {
                return Err(Error::UndefinedVariable {
                    index: out.min_arity(),
                    arity: arity_in,
                });
            }
        }
        Ok(SmoothMap {
            name,
            arity_in,
            outputs,
            domain,
        })
    }

    /// The identity map on the unit box in ℝⁿ.
    pub fn identity(n: usize) -> Self {
        let outputs = (0..n).map(crate::expr::var).collect();
        SmoothMap::new("id", n, outputs, Domain::unit(n)).expect("identity is well formed")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn outputs(&self) -> &[Expr] {
        &self.outputs
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn is_polynomial(&self) -> bool {
        self.outputs.iter().all(|o| o.is_polynomial())
    }

    /// Evaluate on real inputs, checking domain membership first.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_arity(self.arity_in, x.len(), "map inputs")?;
        if !self.domain.contains(x) {
            return Err(Error::Domain(format!(
                "point outside the domain {} of map {}",
                self.domain, self.name
            )));
        }
        self.outputs.iter().map(|o| o.eval_real(x)).collect()
    }

    /// Composition `self ∘ inner` by substitution. The result keeps the
    /// inner map's domain box; points where the intermediate value leaves
    /// `self`'s box surface as evaluation-time domain errors instead.
    pub fn compose(&self, inner: &SmoothMap) -> Result<SmoothMap> {
        check_arity(self.arity_in, inner.arity_out(), "composition interface")?;
        let outputs: Vec<Expr> = self
            .outputs
            .iter()
            .map(|o| o.substitute(inner.outputs()))
            .collect::<Result<_>>()?;
        SmoothMap::new(
            format!("{}.{}", self.name, inner.name),
            inner.arity_in,
            outputs,
            inner.domain.clone(),
        )
    }

    /// Jacobian matrix at `x` (rows = outputs), computed with one-tag jets.
    pub fn jacobian(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        check_arity(self.arity_in, x.len(), "jacobian inputs")?;
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(self.arity_in);
        for j in 0..self.arity_in {
            let jets: Vec<JetValue> = x
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    if i == j {
                        JetValue::seeded(1, v, 1, 1.0)
                    } else {
                        JetValue::constant(1, v)
                    }
                })
                .collect();
            let out = self.eval_jets(&jets)?;
            cols.push(out.iter().map(|o| o.comp(1)).collect());
        }
        let rows = self.arity_out();
        Ok((0..rows)
            .map(|r| (0..self.arity_in).map(|c| cols[c][r]).collect())
            .collect())
    }
}

impl JetMap for SmoothMap {
    fn arity_in(&self) -> usize {
        self.arity_in
    }

    fn arity_out(&self) -> usize {
        self.outputs.len()
    }

    fn eval_jets(&self, inputs: &[JetValue]) -> Result<Vec<JetValue>> {
        check_arity(self.arity_in, inputs.len(), "map jet inputs")?;
        self.outputs.iter().map(|o| o.eval_jet(inputs)).collect()
    }

    fn eval_reals(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_arity(self.arity_in, x.len(), "map inputs")?;
        self.outputs.iter().map(|o| o.eval_real(x)).collect()
    }
}
