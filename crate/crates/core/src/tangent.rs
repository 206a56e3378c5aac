//! Tangent elements over euclidean opens and the structure maps acting on
//! them.
//!
//! Coordinates follow one fixed convention throughout the crate. An element
//! of the iterated bundle of order `m` over ℝⁿ stores `2^m` components of
//! length `n`, indexed by subsets of the tag set `{1, …, m}` as bitmasks
//! (bit `i−1` ⇔ tag `i`). Tag 1 is the innermost application, tag `m` the
//! outermost. For order 2 this reads
//!
//! ```text
//! ξ = (u, u₀, u₁, u₀₁)   with   u = ξ[∅], u₀ = ξ[{1}], u₁ = ξ[{2}], u₀₁ = ξ[{1,2}]
//! ```
//!
//! so the two bundle legs are `proj_piT(ξ) = (u, u₀)` (base point of the
//! outer bundle) and `proj_Tpi(ξ) = (u, u₁)` (image of the projection under
//! the functor).
//!
//! Pushforwards are computed by seeding multi-tag jets — one jet per input
//! coordinate, component `mask` of jet `i` set to `ξ[mask][i]` — and reading
//! the output components back. First- and second-order chain rules fall out
//! of jet multiplication with no explicit derivative bookkeeping.

use crate::error::{Error, Result};
use crate::jet::JetValue;
use crate::map::JetMap;
use crate::num::{max_abs, max_abs_gap, BASE_MATCH_TOL};

fn check_len(expected: usize, got: usize, context: &str) -> Result<()> {
    if expected != got {
        return Err(Error::ArityMismatch {
            expected,
            got,
            context: context.into(),
        });
    }
    Ok(())
}

fn add_slices(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn scale_slice(r: f64, a: &[f64]) -> Vec<f64> {
    a.iter().map(|x| r * x).collect()
}

// ---------------------------------------------------------------------------
// Element types
// ---------------------------------------------------------------------------

/// A tangent vector: base point plus one velocity of the same dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct TanVec {
    pub base: Vec<f64>,
    pub vel: Vec<f64>,
}

impl TanVec {
    pub fn new(base: Vec<f64>, vel: Vec<f64>) -> Result<Self> {
        check_len(base.len(), vel.len(), "tangent vector velocity")?;
        Ok(TanVec { base, vel })
    }

    pub fn dim(&self) -> usize {
        self.base.len()
    }
}

/// A second-order tangent element `(u, u₀, u₁, u₀₁)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tan2 {
    pub base: Vec<f64>,
    pub v0: Vec<f64>,
    pub v1: Vec<f64>,
    pub v01: Vec<f64>,
}

impl Tan2 {
    pub fn new(base: Vec<f64>, v0: Vec<f64>, v1: Vec<f64>, v01: Vec<f64>) -> Result<Self> {
        check_len(base.len(), v0.len(), "second-order slot v0")?;
        check_len(base.len(), v1.len(), "second-order slot v1")?;
        check_len(base.len(), v01.len(), "second-order slot v01")?;
        Ok(Tan2 { base, v0, v1, v01 })
    }

    pub fn dim(&self) -> usize {
        self.base.len()
    }
}

/// An element of the k-fold fiber product: one base point, k independent
/// fiber vectors over it.
#[derive(Clone, Debug, PartialEq)]
pub struct TanK {
    base: Vec<f64>,
    fibers: Vec<Vec<f64>>,
}

impl TanK {
    pub fn new(base: Vec<f64>, fibers: Vec<Vec<f64>>) -> Result<Self> {
        if fibers.is_empty() {
            return Err(Error::ArityMismatch {
                expected: 1,
                got: 0,
                context: "fiber product needs at least one fiber".into(),
            });
        }
        for f in &fibers {
            check_len(base.len(), f.len(), "fiber product fiber")?;
        }
        Ok(TanK { base, fibers })
    }

    /// Pair two tangent vectors over one base; the bases must agree to the
    /// strict matching tolerance.
    pub fn pair(a: &TanVec, b: &TanVec) -> Result<Self> {
        check_len(a.dim(), b.dim(), "fiber product pair")?;
        let gap = max_abs_gap(&a.base, &b.base);
        if gap > BASE_MATCH_TOL {
            return Err(Error::BaseMismatch {
                gap,
                tol: BASE_MATCH_TOL,
                context: "fiber product pair".into(),
            });
        }
        TanK::new(a.base.clone(), vec![a.vel.clone(), b.vel.clone()])
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn fibers(&self) -> &[Vec<f64>] {
        &self.fibers
    }

    pub fn k(&self) -> usize {
        self.fibers.len()
    }

    pub fn dim(&self) -> usize {
        self.base.len()
    }

    /// The i-th constituent tangent vector.
    pub fn leg(&self, i: usize) -> TanVec {
        TanVec {
            base: self.base.clone(),
            vel: self.fibers[i].clone(),
        }
    }
}

/// A tangent vector *to* a fiber-product element: the point and an equally
/// shaped displacement.
#[derive(Clone, Debug, PartialEq)]
pub struct TanTk {
    pub point: TanK,
    pub vel: TanK,
}

impl TanTk {
    pub fn new(point: TanK, vel: TanK) -> Result<Self> {
        check_len(point.dim(), vel.dim(), "fiber-product tangent dimension")?;
        check_len(point.k(), vel.k(), "fiber-product tangent fiber count")?;
        Ok(TanTk { point, vel })
    }
}

/// An iterated tangent element of arbitrary order: `2^order` components of
/// length `dim`, indexed by tag-subset bitmask.
#[derive(Clone, Debug, PartialEq)]
pub struct TanPow {
    dim: usize,
    order: usize,
    comps: Vec<Vec<f64>>,
}

impl TanPow {
    pub fn new(dim: usize, order: usize, comps: Vec<Vec<f64>>) -> Result<Self> {
        check_len(1usize << order, comps.len(), "iterated tangent components")?;
        for c in &comps {
            check_len(dim, c.len(), "iterated tangent component length")?;
        }
        Ok(TanPow { dim, order, comps })
    }

    /// Order-0 element: a bare point.
    pub fn point(x: Vec<f64>) -> Self {
        TanPow {
            dim: x.len(),
            order: 0,
            comps: vec![x],
        }
    }

    pub fn zeros(dim: usize, order: usize) -> Self {
        TanPow {
            dim,
            order,
            comps: vec![vec![0.0; dim]; 1 << order],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn comp(&self, mask: usize) -> &[f64] {
        &self.comps[mask]
    }

    pub fn comps(&self) -> &[Vec<f64>] {
        &self.comps
    }

    pub fn from_tan_vec(xi: &TanVec) -> Self {
        TanPow {
            dim: xi.dim(),
            order: 1,
            comps: vec![xi.base.clone(), xi.vel.clone()],
        }
    }

    pub fn to_tan_vec(&self) -> Result<TanVec> {
        check_len(1, self.order, "order-1 view of iterated tangent")?;
        TanVec::new(self.comps[0].clone(), self.comps[1].clone())
    }

    pub fn from_tan2(xi: &Tan2) -> Self {
        TanPow {
            dim: xi.dim(),
            order: 2,
            comps: vec![
                xi.base.clone(),
                xi.v0.clone(),
                xi.v1.clone(),
                xi.v01.clone(),
            ],
        }
    }

    pub fn to_tan2(&self) -> Result<Tan2> {
        check_len(2, self.order, "order-2 view of iterated tangent")?;
        Tan2::new(
            self.comps[0].clone(),
            self.comps[1].clone(),
            self.comps[2].clone(),
            self.comps[3].clone(),
        )
    }

    pub fn to_point(&self) -> Result<Vec<f64>> {
        check_len(0, self.order, "order-0 view of iterated tangent")?;
        Ok(self.comps[0].clone())
    }

    /// Split along the outermost tag: (components without tag `order`,
    /// components with it), both of order `order − 1`.
    pub fn split_top(&self) -> Result<(TanPow, TanPow)> {
        if self.order == 0 {
            return Err(Error::ArityMismatch {
                expected: 1,
                got: 0,
                context: "split of an order-0 element".into(),
            });
        }
        let half = 1usize << (self.order - 1);
        let lo = TanPow {
            dim: self.dim,
            order: self.order - 1,
            comps: self.comps[..half].to_vec(),
        };
        let hi = TanPow {
            dim: self.dim,
            order: self.order - 1,
            comps: self.comps[half..].to_vec(),
        };
        Ok((lo, hi))
    }

    /// Inverse of [`split_top`](Self::split_top): adjoin a new outermost tag
    /// whose absence indexes `point` and whose presence indexes `vel`.
    pub fn join_top(point: &TanPow, vel: &TanPow) -> Result<TanPow> {
        check_len(point.dim, vel.dim, "join dimensions")?;
        check_len(point.order, vel.order, "join orders")?;
        let mut comps = point.comps.clone();
        comps.extend(vel.comps.iter().cloned());
        Ok(TanPow {
            dim: point.dim,
            order: point.order + 1,
            comps,
        })
    }

    /// Absorb the lowest `c` tags into the base dimension: the result has
    /// order `order − c` over ℝ^(dim·2^c), components concatenated in
    /// low-mask order. This realizes "the same structure map, applied at an
    /// iterated-bundle object".
    pub fn group_low(&self, c: usize) -> Result<TanPow> {
        if c > self.order {
            return Err(Error::ArityMismatch {
                expected: self.order,
                got: c,
                context: "grouping more tags than the order".into(),
            });
        }
        let low_count = 1usize << c;
        let new_order = self.order - c;
        let new_dim = self.dim * low_count;
        let mut comps = vec![vec![0.0; new_dim]; 1 << new_order];
        for (m, c_m) in self.comps.iter().enumerate() {
            let low = m & (low_count - 1);
            let high = m >> c;
            comps[high][low * self.dim..(low + 1) * self.dim].copy_from_slice(c_m);
        }
        Ok(TanPow {
            dim: new_dim,
            order: new_order,
            comps,
        })
    }

    /// Inverse of [`group_low`](Self::group_low): re-expand the lowest `c`
    /// tags out of the base dimension (which must be divisible by `2^c`).
    pub fn ungroup_low(&self, c: usize) -> Result<TanPow> {
        let low_count = 1usize << c;
        if self.dim % low_count != 0 {
            return Err(Error::ArityMismatch {
                expected: low_count,
                got: self.dim,
                context: "ungrouping a dimension not divisible by 2^c".into(),
            });
        }
        let new_dim = self.dim / low_count;
        let new_order = self.order + c;
        let mut comps = vec![vec![0.0; new_dim]; 1 << new_order];
        for (high, c_h) in self.comps.iter().enumerate() {
            for low in 0..low_count {
                let m = (high << c) | low;
                comps[m].copy_from_slice(&c_h[low * new_dim..(low + 1) * new_dim]);
            }
        }
        Ok(TanPow {
            dim: new_dim,
            order: new_order,
            comps,
        })
    }

    /// Largest absolute componentwise gap to another element of identical
    /// shape.
    pub fn gap(&self, other: &TanPow) -> f64 {
        assert_eq!(self.dim, other.dim, "gap: dimension mismatch");
        assert_eq!(self.order, other.order, "gap: order mismatch");
        self.comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| max_abs_gap(a, b))
            .fold(0.0, f64::max)
    }

    /// Apply a permutation of the tag set `{1..order}`: component `mask`
    /// of the result is component `perm⁻¹(mask)` of the input, where the
    /// permutation acts on masks bit-by-bit. `perm[i] = j` means tag `i+1`
    /// of the input becomes tag `j+1` of the result.
    pub fn permute_tags(&self, perm: &[usize]) -> Result<TanPow> {
        check_len(self.order, perm.len(), "tag permutation length")?;
        let mut seen = vec![false; self.order];
        for &p in perm {
            if p >= self.order || seen[p] {
                return Err(Error::ArityMismatch {
                    expected: self.order,
                    got: p,
                    context: "tag permutation must be a bijection".into(),
                });
            }
            seen[p] = true;
        }
        let mut comps = vec![vec![0.0; self.dim]; 1 << self.order];
        for (m, c_m) in self.comps.iter().enumerate() {
            let mut target = 0usize;
            for (i, &p) in perm.iter().enumerate() {
                if m & (1 << i) != 0 {
                    target |= 1 << p;
                }
            }
            comps[target].copy_from_slice(c_m);
        }
        Ok(TanPow {
            dim: self.dim,
            order: self.order,
            comps,
        })
    }
}

// ---------------------------------------------------------------------------
// Pushforwards
// ---------------------------------------------------------------------------

fn pow_to_jets(xi: &TanPow) -> Vec<JetValue> {
    (0..xi.dim())
        .map(|i| {
            let comps: Vec<f64> = xi.comps().iter().map(|c| c[i]).collect();
            JetValue::from_comps(xi.order(), comps)
        })
        .collect()
}

fn jets_to_pow(order: usize, jets: &[JetValue]) -> TanPow {
    let dim = jets.len();
    let comps: Vec<Vec<f64>> = (0..1usize << order)
        .map(|mask| jets.iter().map(|j| j.comp(mask)).collect())
        .collect();
    TanPow { dim, order, comps }
}

/// Apply the order-`m` image of `f` to an iterated tangent element.
pub fn pushforward_tpow<M: JetMap + ?Sized>(f: &M, xi: &TanPow) -> Result<TanPow> {
    check_len(f.arity_in(), xi.dim(), "pushforward input dimension")?;
    let jets = pow_to_jets(xi);
    let out = f.eval_jets(&jets)?;
    Ok(jets_to_pow(xi.order(), &out))
}

/// Apply the tangent image of `f`: `(u, u₀) ↦ (f(u), Df(u)·u₀)`.
pub fn pushforward_t<M: JetMap + ?Sized>(f: &M, xi: &TanVec) -> Result<TanVec> {
    pushforward_tpow(f, &TanPow::from_tan_vec(xi))?.to_tan_vec()
}

/// Apply the second tangent image of `f`:
/// `(u, u₀, u₁, u₀₁) ↦ (f(u), Df·u₀, Df·u₁, Df·u₀₁ + D²f(u₀, u₁))`.
pub fn pushforward_t2<M: JetMap + ?Sized>(f: &M, xi: &Tan2) -> Result<Tan2> {
    pushforward_tpow(f, &TanPow::from_tan2(xi))?.to_tan2()
}

/// Apply the fiber-product image of `f`: base maps by `f`, each fiber by
/// `Df` independently.
pub fn pushforward_tk<M: JetMap + ?Sized>(f: &M, xi: &TanK) -> Result<TanK> {
    let mut base = Vec::new();
    let mut fibers = Vec::with_capacity(xi.k());
    for i in 0..xi.k() {
        let leg = pushforward_t(f, &xi.leg(i))?;
        if i == 0 {
            base = leg.base;
        }
        fibers.push(leg.vel);
    }
    TanK::new(base, fibers)
}

// ---------------------------------------------------------------------------
// Structure maps (canonical coordinate formulas)
// ---------------------------------------------------------------------------

/// Bundle projection: forget the velocity.
pub fn nt_pi(xi: &TanVec) -> Vec<f64> {
    xi.base.clone()
}

/// Zero section: the zero velocity at a point.
pub fn nt_zero(u: &[f64]) -> TanVec {
    TanVec {
        base: u.to_vec(),
        vel: vec![0.0; u.len()],
    }
}

/// Fiberwise addition of a two-fiber element.
pub fn nt_add(xi: &TanK) -> Result<TanVec> {
    check_len(2, xi.k(), "fiberwise addition arity")?;
    TanVec::new(xi.base.clone(), add_slices(&xi.fibers[0], &xi.fibers[1]))
}

/// Vertical lift: `(u, u₀) ↦ (u, 0, 0, u₀)`.
pub fn nt_lambda(xi: &TanVec) -> Tan2 {
    let z = vec![0.0; xi.dim()];
    Tan2 {
        base: xi.base.clone(),
        v0: z.clone(),
        v1: z,
        v01: xi.vel.clone(),
    }
}

/// Symmetric swap of the two differentiation tags:
/// `(u, u₀, u₁, u₀₁) ↦ (u, u₁, u₀, u₀₁)`.
pub fn nt_tau(xi: &Tan2) -> Tan2 {
    Tan2 {
        base: xi.base.clone(),
        v0: xi.v1.clone(),
        v1: xi.v0.clone(),
        v01: xi.v01.clone(),
    }
}

/// Fiberwise scalar multiplication: `(u, u₀) ↦ (u, r·u₀)`.
pub fn nt_kappa(r: f64, xi: &TanVec) -> TanVec {
    TanVec {
        base: xi.base.clone(),
        vel: scale_slice(r, &xi.vel),
    }
}

/// Extended vertical lift: `(u, u₀, v₀) ↦ (u, u₀, 0, v₀)`.
pub fn nt_lambda2(xi: &TanK) -> Result<Tan2> {
    check_len(2, xi.k(), "extended lift arity")?;
    Tan2::new(
        xi.base.clone(),
        xi.fibers[0].clone(),
        vec![0.0; xi.dim()],
        xi.fibers[1].clone(),
    )
}

/// Inverse of the extended lift, defined on elements whose `v1` slot
/// vanishes (the kernel of the projection image).
pub fn nt_lambda2_inv(xi: &Tan2, tol: f64) -> Result<TanK> {
    let residual = max_abs(&xi.v1);
    if residual > tol {
        return Err(Error::KernelViolation {
            slot: "v1".into(),
            residual,
            tol,
        });
    }
    TanK::new(xi.base.clone(), vec![xi.v0.clone(), xi.v01.clone()])
}

/// Shuffle a tangent vector to a fiber-product element into a fiber
/// product of tangent elements:
/// `((u, u₀, v₀), (u₁, u₀₁, v₀₁)) ↦ ((u, u₁), (u₀, u₀₁), (v₀, v₀₁))`.
///
/// Works for any fiber count `k`, pairing fiber `i` of the point with
/// fiber `i` of the displacement.
pub fn nu2_shuffle(xi: &TanTk) -> Result<TanK> {
    let mut base = xi.point.base.clone();
    base.extend_from_slice(&xi.vel.base);
    let fibers = (0..xi.point.k())
        .map(|i| {
            let mut f = xi.point.fibers[i].clone();
            f.extend_from_slice(&xi.vel.fibers[i]);
            f
        })
        .collect();
    TanK::new(base, fibers)
}

/// Inverse shuffle; the input must have even dimension (it encodes pairs).
pub fn nu2_unshuffle(xi: &TanK) -> Result<TanTk> {
    if xi.dim() % 2 != 0 {
        return Err(Error::ArityMismatch {
            expected: 2,
            got: xi.dim() % 2,
            context: "unshuffle needs an even ambient dimension".into(),
        });
    }
    let n = xi.dim() / 2;
    let point = TanK::new(
        xi.base[..n].to_vec(),
        xi.fibers.iter().map(|f| f[..n].to_vec()).collect(),
    )?;
    let vel = TanK::new(
        xi.base[n..].to_vec(),
        xi.fibers.iter().map(|f| f[n..].to_vec()).collect(),
    )?;
    TanTk::new(point, vel)
}

/// Base point of the outer bundle: `(u, u₀, u₁, u₀₁) ↦ (u, u₀)`.
pub fn proj_pi_t(xi: &Tan2) -> TanVec {
    TanVec {
        base: xi.base.clone(),
        vel: xi.v0.clone(),
    }
}

/// Functor image of the projection: `(u, u₀, u₁, u₀₁) ↦ (u, u₁)`.
pub fn proj_t_pi(xi: &Tan2) -> TanVec {
    TanVec {
        base: xi.base.clone(),
        vel: xi.v1.clone(),
    }
}
