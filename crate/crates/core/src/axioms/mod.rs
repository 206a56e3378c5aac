//! The tangent-structure interface and the diagram suite that certifies an
//! implementation of it.
//!
//! [`TangentOps`] bundles every operation a tangent structure provides:
//! pushforwards, projection, zero section, fiberwise addition, the tag swap,
//! the vertical lift and its kernel extension, scalar multiplication, and
//! the fiber-product shuffles. [`EuclideanOps`] is the jet-backed instance;
//! [`TauIdentityOps`] is a deliberately broken negative control (the tag
//! swap replaced by the identity) used to demonstrate that the suite
//! actually *fails* on a non-structure.
//!
//! Higher-order diagram legs are built by *whiskering*: every structure map
//! is linear in coordinates, so its image under the functor acts slice-wise
//! on the outermost tag ([`on_top_slices`]), and its component at an
//! iterated-bundle object acts with the low tags absorbed into the base
//! dimension ([`under_low_tags`]). Routing all whiskers through the
//! [`TangentOps`] instance keeps every check sensitive to corruption.

pub mod checks;

use crate::error::Result;
use crate::map::JetMap;
use crate::tangent::{
    self, nt_add, nt_kappa, nt_lambda, nt_lambda2, nt_lambda2_inv, nt_pi, nt_tau, nt_zero,
    nu2_shuffle, nu2_unshuffle, proj_pi_t, proj_t_pi, Tan2, TanK, TanPow, TanTk, TanVec,
};

pub use checks::{
    check_bundle_abelian_group, check_kernel_pullback, check_lift_symmetry, check_naturality,
    check_scalar_mult, check_symmetric_structure, check_vertical_lift, run_axiom_suite,
    AxiomReport, CheckConfig,
};

/// Everything a tangent structure provides, as one interface.
///
/// Default methods delegate to the coordinate formulas in [`crate::tangent`];
/// an implementation overrides whichever members it wants to replace.
pub trait TangentOps: Send + Sync {
    /// Instance name, carried into reports.
    fn name(&self) -> &str;

    fn pushforward_t(&self, f: &dyn JetMap, xi: &TanVec) -> Result<TanVec> {
        tangent::pushforward_t(f, xi)
    }

    fn pushforward_t2(&self, f: &dyn JetMap, xi: &Tan2) -> Result<Tan2> {
        tangent::pushforward_t2(f, xi)
    }

    fn pushforward_tk(&self, f: &dyn JetMap, xi: &TanK) -> Result<TanK> {
        tangent::pushforward_tk(f, xi)
    }

    fn nt_pi(&self, xi: &TanVec) -> Vec<f64> {
        nt_pi(xi)
    }

    fn nt_zero(&self, u: &[f64]) -> TanVec {
        nt_zero(u)
    }

    fn nt_add(&self, xi: &TanK) -> Result<TanVec> {
        nt_add(xi)
    }

    fn nt_lambda(&self, xi: &TanVec) -> Tan2 {
        nt_lambda(xi)
    }

    fn nt_tau(&self, xi: &Tan2) -> Tan2 {
        nt_tau(xi)
    }

    fn nt_kappa(&self, r: f64, xi: &TanVec) -> TanVec {
        nt_kappa(r, xi)
    }

    fn nt_lambda2(&self, xi: &TanK) -> Result<Tan2> {
        nt_lambda2(xi)
    }

    fn nt_lambda2_inv(&self, xi: &Tan2, tol: f64) -> Result<TanK> {
        nt_lambda2_inv(xi, tol)
    }

    fn nu2_shuffle(&self, xi: &TanTk) -> Result<TanK> {
        nu2_shuffle(xi)
    }

    fn nu2_unshuffle(&self, xi: &TanK) -> Result<TanTk> {
        nu2_unshuffle(xi)
    }

    fn proj_pi_t(&self, xi: &Tan2) -> TanVec {
        proj_pi_t(xi)
    }

    fn proj_t_pi(&self, xi: &Tan2) -> TanVec {
        proj_t_pi(xi)
    }
}

/// The canonical jet-backed instance over euclidean opens.
#[derive(Clone, Copy, Debug, Default)]
pub struct EuclideanOps;

impl TangentOps for EuclideanOps {
    fn name(&self) -> &str {
        "euclidean"
    }
}

/// Negative control: the tag swap replaced by the identity. Everything
/// else is inherited, so the suite's sensitivity to this single corruption
/// is exactly what the failing checks demonstrate.
#[derive(Clone, Copy, Debug, Default)]
pub struct TauIdentityOps;

impl TangentOps for TauIdentityOps {
    fn name(&self) -> &str {
        "corrupted-tau"
    }

    fn nt_tau(&self, xi: &Tan2) -> Tan2 {
        xi.clone()
    }
}

// ---------------------------------------------------------------------------
// Whiskering
// ---------------------------------------------------------------------------

/// Functor image of a (linear) operation: apply it to the point and
/// velocity slices of the outermost tag and rejoin.
pub fn on_top_slices(
    xi: &TanPow,
    op: impl Fn(&TanPow) -> Result<TanPow>,
) -> Result<TanPow> {
    let (point, vel) = xi.split_top()?;
    TanPow::join_top(&op(&point)?, &op(&vel)?)
}

/// Component of an operation at an iterated-bundle object: absorb the
/// lowest `c` tags into the base dimension, apply, re-expand.
pub fn under_low_tags(
    c: usize,
    xi: &TanPow,
    op: impl Fn(&TanPow) -> Result<TanPow>,
) -> Result<TanPow> {
    op(&xi.group_low(c)?)?.ungroup_low(c)
}

/// Binary variant of [`under_low_tags`] for fiberwise addition legs.
pub fn under_low_tags2(
    c: usize,
    a: &TanPow,
    b: &TanPow,
    op: impl Fn(&TanPow, &TanPow) -> Result<TanPow>,
) -> Result<TanPow> {
    op(&a.group_low(c)?, &b.group_low(c)?)?.ungroup_low(c)
}

// ---------------------------------------------------------------------------
// Structure maps lifted to the iterated encoding (each at its natural
// order, dimension-generic, routed through the instance)
// ---------------------------------------------------------------------------

pub fn pi_pow(ops: &dyn TangentOps, xi: &TanPow) -> Result<TanPow> {
    Ok(TanPow::point(ops.nt_pi(&xi.to_tan_vec()?)))
}

pub fn zero_pow(ops: &dyn TangentOps, xi: &TanPow) -> Result<TanPow> {
    Ok(TanPow::from_tan_vec(&ops.nt_zero(&xi.to_point()?)))
}

pub fn add_pow(ops: &dyn TangentOps, a: &TanPow, b: &TanPow) -> Result<TanPow> {
    let pair = TanK::pair(&a.to_tan_vec()?, &b.to_tan_vec()?)?;
    Ok(TanPow::from_tan_vec(&ops.nt_add(&pair)?))
}

pub fn tau_pow(ops: &dyn TangentOps, xi: &TanPow) -> Result<TanPow> {
    Ok(TanPow::from_tan2(&ops.nt_tau(&xi.to_tan2()?)))
}

pub fn lambda_pow(ops: &dyn TangentOps, xi: &TanPow) -> Result<TanPow> {
    Ok(TanPow::from_tan2(&ops.nt_lambda(&xi.to_tan_vec()?)))
}

pub fn kappa_pow(ops: &dyn TangentOps, r: f64, xi: &TanPow) -> Result<TanPow> {
    Ok(TanPow::from_tan_vec(&ops.nt_kappa(r, &xi.to_tan_vec()?)))
}

// ---------------------------------------------------------------------------
// Whiskered composites used by the diagram checks
// ---------------------------------------------------------------------------

/// Tag swap at an iterated object (acts on the two outermost tags).
pub fn tau_t(ops: &dyn TangentOps, xi: &TanPow) -> Result<TanPow> {
    under_low_tags(xi.order() - 2, xi, |g| tau_pow(ops, g))
}

/// Functor image of the tag swap (acts on the two innermost of three tags).
pub fn t_tau(ops: &dyn TangentOps, xi: &TanPow) -> Result<TanPow> {
    on_top_slices(xi, |s| tau_pow(ops, s))
}

/// Vertical lift at an iterated object.
pub fn lambda_t(ops: &dyn TangentOps, xi: &TanPow) -> Result<TanPow> {
    under_low_tags(xi.order() - 1, xi, |g| lambda_pow(ops, g))
}

/// Functor image of the vertical lift.
pub fn t_lambda(ops: &dyn TangentOps, xi: &TanPow) -> Result<TanPow> {
    on_top_slices(xi, |s| lambda_pow(ops, s))
}

/// Functor image of the zero section.
pub fn t_zero(ops: &dyn TangentOps, xi: &TanPow) -> Result<TanPow> {
    on_top_slices(xi, |s| zero_pow(ops, s))
}

/// Zero section at an iterated object.
pub fn zero_t(ops: &dyn TangentOps, xi: &TanPow) -> Result<TanPow> {
    under_low_tags(xi.order(), xi, |g| zero_pow(ops, g))
}

/// Fiberwise addition of the outermost bundle (bases must agree on all
/// lower tags).
pub fn add_t(ops: &dyn TangentOps, a: &TanPow, b: &TanPow) -> Result<TanPow> {
    under_low_tags2(a.order() - 1, a, b, |x, y| add_pow(ops, x, y))
}

/// Functor image of fiberwise addition, on the nested encoding.
pub fn t_add(ops: &dyn TangentOps, xi: &TanTk) -> Result<Tan2> {
    let point_sum = ops.nt_add(&xi.point)?;
    let vel_sum = ops.nt_add(&xi.vel)?;
    Tan2::new(point_sum.base, point_sum.vel, vel_sum.base, vel_sum.vel)
}

/// Scalar multiplication of the outermost bundle (scales the `v1`/`v01`
/// slots of an order-2 element).
pub fn kappa_t(ops: &dyn TangentOps, r: f64, xi: &TanPow) -> Result<TanPow> {
    under_low_tags(xi.order() - 1, xi, |g| kappa_pow(ops, r, g))
}

/// Functor image of scalar multiplication (scales `v0`/`v01`).
pub fn t_kappa(ops: &dyn TangentOps, r: f64, xi: &TanPow) -> Result<TanPow> {
    on_top_slices(xi, |s| kappa_pow(ops, r, s))
}

/// Projection of the outermost bundle: for order 2 this is the
/// `(u, u₀, u₁, u₀₁) ↦ (u, u₀)` leg.
pub fn pi_t(ops: &dyn TangentOps, xi: &TanPow) -> Result<TanPow> {
    under_low_tags(xi.order() - 1, xi, |g| pi_pow(ops, g))
}

/// Functor image of the projection: for order 2 the `(u, u₁)` leg.
pub fn t_pi(ops: &dyn TangentOps, xi: &TanPow) -> Result<TanPow> {
    on_top_slices(xi, |s| pi_pow(ops, s))
}
