//! Truncated multi-tag Taylor arithmetic ("jets").
//!
//! A [`JetValue`] of order `k` represents a scalar together with all of its
//! mixed first partial derivatives with respect to `k` independent
//! *nilpotent tags* ε₁..ε_k (each εᵢ² = 0, distinct tags commute):
//!
//! ```text
//!     a  =  Σ_{S ⊆ {1..k}}  comps[S] · ∏_{i ∈ S} εᵢ
//! ```
//!
//! Components are stored densely, indexed by the subset bitmask (bit `i−1`
//! ⇔ tag `i`), so an order-`k` jet is `2^k` doubles. Suites never exceed
//! order 4, where dense storage (16 scalars) is smaller than any sparse
//! representation.
//!
//! Multiplication is subset convolution — `(a·b)[S] = Σ a[S₁]·b[S₂]` over
//! disjoint decompositions `S₁ ⊔ S₂ = S` — and elementary functions are
//! applied by composing the truncated Taylor series of the function with
//! the nilpotent part of the argument. Both are *exact*: no step
//! introduces truncation error, only floating-point rounding.
//!
//! Seeding tag `i` of the arguments with a direction vector and reading
//! component `{i}` of the result yields a directional derivative; seeding
//! several tags yields mixed higher derivatives. If a single scalar
//! argument carries every tag with seed 1, component `S` of `f(a)` equals
//! `f^{(|S|)}(a₀)` — handy for derivative tables.

use crate::error::{Error, Result};

/// Hard cap on jet order; mask arithmetic is trivially safe far beyond
/// what any suite uses (order ≤ 4).
pub const MAX_ORDER: usize = 12;

/// A truncated multi-tag Taylor value; see the module docs.
#[derive(Clone, Debug, PartialEq)]
pub struct JetValue {
    order: usize,
    comps: Vec<f64>,
}

impl JetValue {
    /// The constant `v`: every derivative component is zero.
    pub fn constant(order: usize, v: f64) -> Self {
        assert!(order <= MAX_ORDER, "jet order {order} exceeds {MAX_ORDER}");
        let mut comps = vec![0.0; 1 << order];
        comps[0] = v;
        JetValue { order, comps }
    }

    /// The zero jet.
    pub fn zero(order: usize) -> Self {
        Self::constant(order, 0.0)
    }

    /// Build from raw components (length must be `2^order`).
    pub fn from_comps(order: usize, comps: Vec<f64>) -> Self {
        assert!(order <= MAX_ORDER, "jet order {order} exceeds {MAX_ORDER}");
        assert_eq!(comps.len(), 1 << order, "component count must be 2^order");
        JetValue { order, comps }
    }

    /// Base value `x0` carrying `coeff` on the single tag `tag` (1-based).
    pub fn seeded(order: usize, x0: f64, tag: usize, coeff: f64) -> Self {
        assert!(tag >= 1 && tag <= order, "tag {tag} out of range 1..={order}");
        let mut j = Self::constant(order, x0);
        j.comps[1 << (tag - 1)] = coeff;
        j
    }

    /// Builder: set one component.
    pub fn with_comp(mut self, mask: usize, v: f64) -> Self {
        self.comps[mask] = v;
        self
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn comps(&self) -> &[f64] {
        &self.comps
    }

    /// Component for a tag subset given as a bitmask.
    pub fn comp(&self, mask: usize) -> f64 {
        self.comps[mask]
    }

    /// The underlying scalar (empty tag set).
    pub fn real(&self) -> f64 {
        self.comps[0]
    }

    /// Reinterpret as a higher-order jet; existing tags keep their
    /// identity, new (higher) tags carry zero.
    pub fn promote(&self, order: usize) -> Self {
        assert!(order >= self.order, "promote cannot lower the order");
        let mut out = Self::zero(order);
        out.comps[..self.comps.len()].copy_from_slice(&self.comps);
        out
    }

    /// Split off the highest tag: returns `(lo, hi)` of order `k−1` with
    /// `self = lo + ε_k · hi`.
    pub fn split_top(&self) -> (JetValue, JetValue) {
        assert!(self.order >= 1, "split_top needs at least one tag");
        let half = 1 << (self.order - 1);
        let lo = Self::from_comps(self.order - 1, self.comps[..half].to_vec());
        let hi = Self::from_comps(self.order - 1, self.comps[half..].to_vec());
        (lo, hi)
    }

    /// Inverse of [`split_top`](Self::split_top).
    pub fn join_top(lo: &JetValue, hi: &JetValue) -> JetValue {
        assert_eq!(lo.order, hi.order, "join_top: order mismatch");
        let mut comps = Vec::with_capacity(lo.comps.len() * 2);
        comps.extend_from_slice(&lo.comps);
        comps.extend_from_slice(&hi.comps);
        Self::from_comps(lo.order + 1, comps)
    }

    fn assert_same_order(&self, rhs: &JetValue, op: &str) {
        assert_eq!(self.order, rhs.order, "jet {op}: order mismatch");
    }

    pub fn add(&self, rhs: &JetValue) -> JetValue {
        self.assert_same_order(rhs, "add");
        let comps = self.comps.iter().zip(&rhs.comps).map(|(a, b)| a + b).collect();
        JetValue { order: self.order, comps }
    }

    pub fn sub(&self, rhs: &JetValue) -> JetValue {
        self.assert_same_order(rhs, "sub");
        let comps = self.comps.iter().zip(&rhs.comps).map(|(a, b)| a - b).collect();
        JetValue { order: self.order, comps }
    }

    pub fn neg(&self) -> JetValue {
        let comps = self.comps.iter().map(|a| -a).collect();
        JetValue { order: self.order, comps }
    }

    pub fn scale(&self, s: f64) -> JetValue {
        let comps = self.comps.iter().map(|a| s * a).collect();
        JetValue { order: self.order, comps }
    }

    /// Subset-convolution product: `(a·b)[S] = Σ_{S₁ ⊔ S₂ = S} a[S₁]·b[S₂]`.
    ///
    /// Implemented by standard submask iteration (`s1 = (s1 − 1) & s`);
    /// exact for polynomial data.
    pub fn mul(&self, rhs: &JetValue) -> JetValue {
        self.assert_same_order(rhs, "mul");
        let n = self.comps.len();
        let mut comps = vec![0.0; n];
        for s in 0..n {
            let mut acc = 0.0;
            let mut s1 = s;
            loop {
                acc += self.comps[s1] * rhs.comps[s ^ s1];
                if s1 == 0 {
                    break;
                }
                s1 = (s1 - 1) & s;
            }
            comps[s] = acc;
        }
        JetValue { order: self.order, comps }
    }

    /// Compose a scalar function given by its Taylor coefficients at the
    /// base value: `coeffs[j] = f⁽ʲ⁾(real)/j!`, length `order + 1`.
    ///
    /// The nilpotent part `n = self − real` satisfies `n^(order+1) = 0`,
    /// so the truncated series evaluated by Horner's scheme is exact.
    pub fn taylor_apply(&self, coeffs: &[f64]) -> JetValue {
        assert_eq!(coeffs.len(), self.order + 1, "need order+1 Taylor coefficients");
        let mut nil = self.clone();
        nil.comps[0] = 0.0;
        let mut acc = JetValue::constant(self.order, coeffs[self.order]);
        for j in (0..self.order).rev() {
            acc = acc.mul(&nil);
            acc.comps[0] += coeffs[j];
        }
        acc
    }

    pub fn exp(&self) -> JetValue {
        let e = self.real().exp();
        let mut coeffs = Vec::with_capacity(self.order + 1);
        let mut c = e;
        for j in 0..=self.order {
            if j > 0 {
                c /= j as f64;
            }
            coeffs.push(c);
        }
        self.taylor_apply(&coeffs)
    }

    pub fn sin(&self) -> JetValue {
        self.circular(self.real().sin(), self.real().cos())
    }

    pub fn cos(&self) -> JetValue {
        let j = self.circular(self.real().cos(), -self.real().sin());
        j
    }

    /// Shared sine/cosine machinery: derivatives cycle with period 4
    /// starting from `(f, f')`.
    fn circular(&self, f0: f64, f1: f64) -> JetValue {
        let cycle = [f0, f1, -f0, -f1];
        let mut coeffs = Vec::with_capacity(self.order + 1);
        let mut fact = 1.0;
        for j in 0..=self.order {
            if j > 0 {
                fact *= j as f64;
            }
            coeffs.push(cycle[j % 4] / fact);
        }
        self.taylor_apply(&coeffs)
    }

    pub fn log(&self) -> Result<JetValue> {
        let x0 = self.real();
        if x0 <= 0.0 {
            return Err(Error::SingularEval(format!("log at nonpositive value {x0}")));
        }
        let mut coeffs = Vec::with_capacity(self.order + 1);
        coeffs.push(x0.ln());
        let mut pw = 1.0; // x0^j
        for j in 1..=self.order {
            pw *= x0;
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            coeffs.push(sign / (j as f64 * pw));
        }
        Ok(self.taylor_apply(&coeffs))
    }

    pub fn sqrt(&self) -> Result<JetValue> {
        let x0 = self.real();
        if x0 <= 0.0 {
            return Err(Error::SingularEval(format!(
                "sqrt has no derivative data at nonpositive value {x0}"
            )));
        }
        let mut coeffs = Vec::with_capacity(self.order + 1);
        let mut c = x0.sqrt();
        coeffs.push(c);
        for j in 1..=self.order {
            c *= (1.5 - j as f64) / (j as f64 * x0);
            coeffs.push(c);
        }
        Ok(self.taylor_apply(&coeffs))
    }

    pub fn recip(&self) -> Result<JetValue> {
        let x0 = self.real();
        if x0 == 0.0 {
            return Err(Error::SingularEval("division by a value with zero real part".into()));
        }
        let mut coeffs = Vec::with_capacity(self.order + 1);
        let mut c = 1.0 / x0;
        coeffs.push(c);
        for _ in 1..=self.order {
            c = -c / x0;
            coeffs.push(c);
        }
        Ok(self.taylor_apply(&coeffs))
    }

    pub fn div(&self, rhs: &JetValue) -> Result<JetValue> {
        Ok(self.mul(&rhs.recip()?))
    }

    /// Integer power by binary exponentiation (exact); negative exponents
    /// go through [`recip`](Self::recip).
    pub fn powi(&self, n: i32) -> Result<JetValue> {
        if n == 0 {
            return Ok(JetValue::constant(self.order, 1.0));
        }
        if n < 0 {
            return self.recip()?.powi(-n);
        }
        let mut base = self.clone();
        let mut exp = n as u32;
        let mut acc = JetValue::constant(self.order, 1.0);
        loop {
            if exp & 1 == 1 {
                acc = acc.mul(&base);
            }
            exp >>= 1;
            if exp == 0 {
                break;
            }
            base = base.mul(&base);
        }
        Ok(acc)
    }

    /// The standard flat bump ingredient: `exp(−1/x²)` for `x > 0`,
    /// identically `0` for `x ≤ 0`. Smooth on all of ℝ; every derivative
    /// at a nonpositive base is zero, so the jet there is the zero jet.
    pub fn flat(&self) -> JetValue {
        if self.real() <= 0.0 {
            return JetValue::zero(self.order);
        }
        // exp(−x⁻²) composed as jets; real part is positive, so the
        // inverse square is well defined.
        self.powi(-2).expect("positive real part").neg().exp()
    }
}

impl std::ops::Add for &JetValue {
    type Output = JetValue;
    fn add(self, rhs: &JetValue) -> JetValue {
        JetValue::add(self, rhs)
    }
}

impl std::ops::Sub for &JetValue {
    type Output = JetValue;
    fn sub(self, rhs: &JetValue) -> JetValue {
        JetValue::sub(self, rhs)
    }
}

impl std::ops::Mul for &JetValue {
    type Output = JetValue;
    fn mul(self, rhs: &JetValue) -> JetValue {
        JetValue::mul(self, rhs)
    }
}

impl std::ops::Neg for &JetValue {
    type Output = JetValue;
    fn neg(self) -> JetValue {
        JetValue::neg(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_for;
    use approx::assert_relative_eq;
    use rand::Rng;

    fn random_jet(order: usize, rng: &mut impl Rng) -> JetValue {
        let comps = (0..1usize << order).map(|_| rng.gen_range(-2.0..2.0)).collect();
        JetValue::from_comps(order, comps)
    }

    /// Independent product oracle: double loop over all component pairs,
    /// keeping only disjoint tag sets.
    fn mul_oracle(a: &JetValue, b: &JetValue) -> JetValue {
        let n = a.comps().len();
        let mut out = vec![0.0; n];
        for s1 in 0..n {
            for s2 in 0..n {
                if s1 & s2 == 0 {
                    out[s1 | s2] += a.comp(s1) * b.comp(s2);
                }
            }
        }
        JetValue::from_comps(a.order(), out)
    }

    #[test]
    fn constant_and_seed_layout() {
        let c = JetValue::constant(2, 7.0);
        assert_eq!(c.comps(), &[7.0, 0.0, 0.0, 0.0]);
        let s = JetValue::seeded(2, 3.0, 2, 5.0);
        assert_eq!(s.comps(), &[3.0, 0.0, 5.0, 0.0]);
    }

    #[test]
    fn mul_matches_brute_force_oracle() {
        let mut rng = rng_for(7, "jet-mul-oracle");
        for order in 1..=4 {
            for _ in 0..50 {
                let a = random_jet(order, &mut rng);
                let b = random_jet(order, &mut rng);
                let fast = a.mul(&b);
                let slow = mul_oracle(&a, &b);
                for (x, y) in fast.comps().iter().zip(slow.comps()) {
                    assert_relative_eq!(x, y, epsilon = 1e-12, max_relative = 1e-12);
                }
            }
        }
    }

    #[test]
    fn tags_are_nilpotent() {
        // A pure tag squares to zero: no subset repeats a tag.
        let e1 = JetValue::zero(2).with_comp(0b01, 1.0);
        assert_eq!(e1.mul(&e1).comps(), &[0.0, 0.0, 0.0, 0.0]);
        // (x0 + ε₁)² = x0² + 2·x0·ε₁.
        let a = JetValue::seeded(1, 3.0, 1, 1.0);
        assert_eq!(a.mul(&a).comps(), &[9.0, 6.0]);
    }

    #[test]
    fn all_tags_seeded_reads_off_higher_derivatives() {
        // f(x) = x³ at x = 2 with every tag seeded 1:
        // component S carries f^(|S|)(2), i.e. 8, 12, 12, 6.
        let x = JetValue::constant(3, 2.0)
            .with_comp(0b001, 1.0)
            .with_comp(0b010, 1.0)
            .with_comp(0b100, 1.0);
        let y = x.powi(3).unwrap();
        assert_relative_eq!(y.comp(0b000), 8.0, epsilon = 1e-12);
        for single in [0b001, 0b010, 0b100] {
            assert_relative_eq!(y.comp(single), 12.0, epsilon = 1e-12);
        }
        for pair in [0b011, 0b101, 0b110] {
            assert_relative_eq!(y.comp(pair), 12.0, epsilon = 1e-12);
        }
        assert_relative_eq!(y.comp(0b111), 6.0, epsilon = 1e-12);
    }

    #[test]
    fn exp_around_zero_has_all_unit_components() {
        // exp(0 + ε₁ + ε₂ + ε₃): every mixed derivative of exp at 0 is 1.
        let x = JetValue::constant(3, 0.0)
            .with_comp(0b001, 1.0)
            .with_comp(0b010, 1.0)
            .with_comp(0b100, 1.0);
        let y = x.exp();
        for m in 0..8 {
            assert_relative_eq!(y.comp(m), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn sin_at_pi_over_three() {
        let x = JetValue::seeded(1, std::f64::consts::FRAC_PI_3, 1, 1.0);
        let y = x.sin();
        assert_relative_eq!(y.real(), 3f64.sqrt() / 2.0, epsilon = 1e-12);
        assert_relative_eq!(y.comp(1), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn analytic_inverses_round_trip() {
        let mut rng = rng_for(11, "jet-inverses");
        for _ in 0..25 {
            let mut a = random_jet(3, &mut rng);
            a = a.with_comp(0, rng.gen_range(0.3..2.5)); // safely positive base
            let sq = a.sqrt().unwrap();
            for (x, y) in sq.mul(&sq).comps().iter().zip(a.comps()) {
                assert_relative_eq!(x, y, epsilon = 1e-10, max_relative = 1e-10);
            }
            let le = a.log().unwrap().exp();
            for (x, y) in le.comps().iter().zip(a.comps()) {
                assert_relative_eq!(x, y, epsilon = 1e-10, max_relative = 1e-10);
            }
            let unit = a.mul(&a.recip().unwrap());
            assert_relative_eq!(unit.real(), 1.0, epsilon = 1e-12);
            for m in 1..8 {
                assert_relative_eq!(unit.comp(m), 0.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn powi_matches_repeated_multiplication() {
        let mut rng = rng_for(13, "jet-powi");
        let a = random_jet(3, &mut rng).with_comp(0, 1.7);
        let mut by_mul = JetValue::constant(3, 1.0);
        for n in 0..=5 {
            let by_pow = a.powi(n).unwrap();
            for (x, y) in by_pow.comps().iter().zip(by_mul.comps()) {
                assert_relative_eq!(x, y, epsilon = 1e-9, max_relative = 1e-9);
            }
            by_mul = by_mul.mul(&a);
        }
        // Negative power agrees with explicit reciprocal of the square.
        let inv2 = a.powi(-2).unwrap();
        let oracle = a.mul(&a).recip().unwrap();
        for (x, y) in inv2.comps().iter().zip(oracle.comps()) {
            assert_relative_eq!(x, y, epsilon = 1e-9, max_relative = 1e-9);
        }
    }

    #[test]
    fn split_join_and_promote_round_trip() {
        let mut rng = rng_for(17, "jet-split");
        let a = random_jet(3, &mut rng);
        let (lo, hi) = a.split_top();
        assert_eq!(JetValue::join_top(&lo, &hi), a);
        let p = lo.promote(4);
        assert_eq!(p.order(), 4);
        for m in 0..4 {
            assert_eq!(p.comp(m), lo.comp(m));
        }
        for m in 4..16 {
            assert_eq!(p.comp(m), 0.0);
        }
    }

    #[test]
    fn flat_is_identically_zero_left_of_the_origin() {
        for x0 in [-1.0, -0.25, 0.0] {
            let x = JetValue::seeded(2, x0, 1, 1.0).with_comp(0b10, 1.0);
            let y = x.flat();
            assert_eq!(y.comps(), &[0.0, 0.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn flat_derivative_matches_closed_form_on_the_right() {
        // d/dx exp(−1/x²) = exp(−1/x²) · 2/x³.
        let x0 = 0.7_f64;
        let x = JetValue::seeded(1, x0, 1, 1.0);
        let y = x.flat();
        let v = (-1.0 / (x0 * x0)).exp();
        assert_relative_eq!(y.real(), v, epsilon = 1e-14);
        assert_relative_eq!(y.comp(1), v * 2.0 / x0.powi(3), epsilon = 1e-12);
    }

    #[test]
    fn singular_bases_are_rejected() {
        let zero = JetValue::constant(1, 0.0);
        assert!(zero.log().is_err());
        assert!(zero.recip().is_err());
        assert!(JetValue::constant(1, -1.0).sqrt().is_err());
    }

    #[test]
    fn operator_sugar_matches_methods() {
        let mut rng = rng_for(19, "jet-ops");
        let a = random_jet(2, &mut rng);
        let b = random_jet(2, &mut rng);
        assert_eq!(&a + &b, a.add(&b));
        assert_eq!(&a - &b, a.sub(&b));
        assert_eq!(&a * &b, a.mul(&b));
        assert_eq!(-&a, a.neg());
    }
}
