//! Randomized executable checks for the tangent-structure diagrams.
//!
//! Each check draws deterministic samples (per-check RNG streams derived
//! from one seed), evaluates both legs of every diagram through the
//! [`TangentOps`] instance under test, and records the largest normalized
//! residual together with the first worst witness. A report *passes* when
//! the largest residual is at or below the configured gate; law violations
//! are reported, never thrown.

use crate::axioms::{
    add_t, lambda_t, t_add, t_kappa, t_lambda, t_tau, t_zero, tau_pow, tau_t, TangentOps,
};
use crate::error::Result;
use crate::map::{JetMap, SmoothMap};
use crate::num::{max_abs, residual_slice};
use crate::rng::rng_for;
use crate::tangent::{Tan2, TanK, TanPow, TanTk, TanVec};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Sampling and gating configuration shared by all checks.
#[derive(Clone, Copy, Debug)]
pub struct CheckConfig {
    /// Trials per check.
    pub trials: usize,
    /// Largest accepted normalized residual.
    pub tol: f64,
    /// Seed from which every check derives its own RNG stream.
    pub seed: u64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            trials: 100,
            tol: 1e-9,
            seed: 42,
        }
    }
}

/// Outcome of one check: name, sample count, largest residual, pass flag,
/// and the worst failing witness if any residual exceeded the gate.
#[derive(Clone, Debug)]
pub struct AxiomReport {
    pub name: String,
    pub trials: usize,
    pub max_residual: f64,
    pub pass: bool,
    pub worst: Option<String>,
}

pub(crate) struct Recorder {
    name: &'static str,
    tol: f64,
    max_residual: f64,
    worst: Option<String>,
}

impl Recorder {
    pub(crate) fn new(name: &'static str, tol: f64) -> Self {
        Recorder {
            name,
            tol,
            max_residual: 0.0,
            worst: None,
        }
    }

    pub(crate) fn observe(&mut self, residual: f64, witness: impl FnOnce() -> String) {
        if residual >= self.max_residual || residual.is_nan() {
            self.max_residual = if residual.is_nan() { f64::INFINITY } else { residual };
            if self.max_residual > self.tol && self.worst.is_none() {
                self.worst = Some(witness());
            }
        }
    }

    pub(crate) fn run_trial(&mut self, t: usize, body: impl FnOnce(&mut Recorder) -> Result<()>) {
        if let Err(e) = body(self) {
            self.observe(f64::INFINITY, || format!("trial {t}: unexpected error: {e}"));
        }
    }

    pub(crate) fn finish(self, trials: usize) -> AxiomReport {
        AxiomReport {
            name: self.name.into(),
            trials,
            max_residual: self.max_residual,
            pass: self.max_residual <= self.tol,
            worst: self.worst,
        }
    }
}

fn rand_vel(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect()
}

fn rand_tan2(rng: &mut ChaCha8Rng, base: &[f64]) -> Tan2 {
    let n = base.len();
    Tan2 {
        base: base.to_vec(),
        v0: rand_vel(rng, n),
        v1: rand_vel(rng, n),
        v01: rand_vel(rng, n),
    }
}

fn rand_pow3(rng: &mut ChaCha8Rng, base: &[f64]) -> TanPow {
    let n = base.len();
    let mut comps = vec![base.to_vec()];
    comps.extend((1..8).map(|_| rand_vel(rng, n)));
    TanPow::new(n, 3, comps).expect("well-shaped order-3 element")
}

fn res_vec(a: &TanVec, b: &TanVec) -> f64 {
    residual_slice(&a.base, &b.base).max(residual_slice(&a.vel, &b.vel))
}

fn res_tan2(a: &Tan2, b: &Tan2) -> f64 {
    residual_slice(&a.base, &b.base)
        .max(residual_slice(&a.v0, &b.v0))
        .max(residual_slice(&a.v1, &b.v1))
        .max(residual_slice(&a.v01, &b.v01))
}

fn res_pow(a: &TanPow, b: &TanPow) -> f64 {
    a.comps()
        .iter()
        .zip(b.comps())
        .map(|(x, y)| residual_slice(x, y))
        .fold(0.0, f64::max)
}

/// Pick the trial's map round-robin and sample a base point from its
/// domain.
fn trial_base(
    corpus: &[SmoothMap],
    t: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(usize, Vec<f64>)> {
    let f = &corpus[t % corpus.len()];
    let x = f.domain().sample(rng)?;
    Ok((f.arity_in(), x))
}

/// Fiberwise addition, zero section as unit, scalar `−1` as inverse:
/// the bundle of abelian groups laws at random bases.
pub fn check_bundle_abelian_group(
    ops: &dyn TangentOps,
    corpus: &[SmoothMap],
    cfg: &CheckConfig,
) -> AxiomReport {
    assert!(!corpus.is_empty(), "axiom checks need a non-empty corpus");
    let mut rng = rng_for(cfg.seed, "bundle_abelian_group");
    let mut rec = Recorder::new("bundle_abelian_group", cfg.tol);
    for t in 0..cfg.trials {
        rec.run_trial(t, |rec| {
            let (n, x) = trial_base(corpus, t, &mut rng)?;
            let a = TanVec::new(x.clone(), rand_vel(&mut rng, n))?;
            let b = TanVec::new(x.clone(), rand_vel(&mut rng, n))?;
            let c = TanVec::new(x.clone(), rand_vel(&mut rng, n))?;

            let add = |p: &TanVec, q: &TanVec| -> Result<TanVec> {
                ops.nt_add(&TanK::pair(p, q)?)
            };

            let ab_c = add(&add(&a, &b)?, &c)?;
            let a_bc = add(&a, &add(&b, &c)?)?;
            rec.observe(res_vec(&ab_c, &a_bc), || {
                format!("trial {t}: associativity at base {x:?}")
            });

            rec.observe(res_vec(&add(&a, &b)?, &add(&b, &a)?), || {
                format!("trial {t}: commutativity at base {x:?}")
            });

            let unit = add(&a, &ops.nt_zero(&x))?;
            rec.observe(res_vec(&unit, &a), || {
                format!("trial {t}: unit law at base {x:?}")
            });

            let inv = add(&a, &ops.nt_kappa(-1.0, &a))?;
            rec.observe(res_vec(&inv, &ops.nt_zero(&x)), || {
                format!("trial {t}: inverse law at base {x:?}")
            });

            rec.observe(residual_slice(&ops.nt_pi(&ab_c), &x), || {
                format!("trial {t}: addition over the base at {x:?}")
            });
            Ok(())
        });
    }
    rec.finish(cfg.trials)
}

/// Involution, projection triangle, braid identity on order-3 elements,
/// and the additivity square through the fiber-product shuffle.
pub fn check_symmetric_structure(
    ops: &dyn TangentOps,
    corpus: &[SmoothMap],
    cfg: &CheckConfig,
) -> AxiomReport {
    assert!(!corpus.is_empty(), "axiom checks need a non-empty corpus");
    let mut rng = rng_for(cfg.seed, "symmetric_structure");
    let mut rec = Recorder::new("symmetric_structure", cfg.tol);
    for t in 0..cfg.trials {
        rec.run_trial(t, |rec| {
            let (n, x) = trial_base(corpus, t, &mut rng)?;
            let xi = rand_tan2(&mut rng, &x);

            let twice = ops.nt_tau(&ops.nt_tau(&xi));
            rec.observe(res_tan2(&twice, &xi), || {
                format!("trial {t}: involution on {xi:?}")
            });

            let tri = res_vec(&ops.proj_pi_t(&ops.nt_tau(&xi)), &ops.proj_t_pi(&xi));
            rec.observe(tri, || {
                format!("trial {t}: projection triangle on {xi:?}")
            });

            let zeta = rand_pow3(&mut rng, &x);
            let lhs = t_tau(ops, &tau_t(ops, &t_tau(ops, &zeta)?)?)?;
            let rhs = tau_t(ops, &t_tau(ops, &tau_t(ops, &zeta)?)?)?;
            rec.observe(res_pow(&lhs, &rhs), || {
                format!("trial {t}: braid identity at base {x:?}")
            });

            // Additivity square: adding the shuffled fibers over the
            // swapped base equals swapping the slice-wise sum.
            let point = TanK::new(x.clone(), vec![rand_vel(&mut rng, n), rand_vel(&mut rng, n)])?;
            let vel = TanK::new(
                rand_vel(&mut rng, n),
                vec![rand_vel(&mut rng, n), rand_vel(&mut rng, n)],
            )?;
            let tk = TanTk::new(point, vel)?;
            let shuffled_sum = ops.nt_add(&ops.nu2_shuffle(&tk)?)?;
            let left = TanPow::from_tan_vec(&shuffled_sum)
                .ungroup_low(1)?
                .to_tan2()?;
            let right = ops.nt_tau(&t_add(ops, &tk)?);
            rec.observe(res_tan2(&left, &right), || {
                format!("trial {t}: additivity square at base {x:?}")
            });
            Ok(())
        });
    }
    rec.finish(cfg.trials)
}

/// Projection legs of the lift, coassociativity on order-3 encodings, and
/// additivity of the lift over fiberwise addition.
pub fn check_vertical_lift(
    ops: &dyn TangentOps,
    corpus: &[SmoothMap],
    cfg: &CheckConfig,
) -> AxiomReport {
    assert!(!corpus.is_empty(), "axiom checks need a non-empty corpus");
    let mut rng = rng_for(cfg.seed, "vertical_lift");
    let mut rec = Recorder::new("vertical_lift", cfg.tol);
    for t in 0..cfg.trials {
        rec.run_trial(t, |rec| {
            let (n, x) = trial_base(corpus, t, &mut rng)?;
            let xi = TanVec::new(x.clone(), rand_vel(&mut rng, n))?;
            let lifted = ops.nt_lambda(&xi);
            let zero_at_base = ops.nt_zero(&ops.nt_pi(&xi));

            rec.observe(res_vec(&ops.proj_pi_t(&lifted), &zero_at_base), || {
                format!("trial {t}: inner projection of the lift at {x:?}")
            });
            rec.observe(res_vec(&ops.proj_t_pi(&lifted), &zero_at_base), || {
                format!("trial {t}: outer projection of the lift at {x:?}")
            });

            let lifted_pow = TanPow::from_tan2(&lifted);
            let coassoc = res_pow(&lambda_t(ops, &lifted_pow)?, &t_lambda(ops, &lifted_pow)?);
            rec.observe(coassoc, || {
                format!("trial {t}: coassociativity of the lift at {x:?}")
            });

            let eta = TanVec::new(x.clone(), rand_vel(&mut rng, n))?;
            let sum = ops.nt_add(&TanK::pair(&xi, &eta)?)?;
            let lift_of_sum = TanPow::from_tan2(&ops.nt_lambda(&sum));
            let sum_of_lifts = add_t(
                ops,
                &TanPow::from_tan2(&ops.nt_lambda(&xi)),
                &TanPow::from_tan2(&ops.nt_lambda(&eta)),
            )?;
            rec.observe(res_pow(&lift_of_sum, &sum_of_lifts), || {
                format!("trial {t}: additivity of the lift at {x:?}")
            });
            Ok(())
        });
    }
    rec.finish(cfg.trials)
}

/// Compatibility of the lift with the tag swap: the fixed-point law
/// τ∘λ = λ and the order-3 square relating the whiskered swaps to the
/// whiskered lifts.
pub fn check_lift_symmetry(ops: &dyn TangentOps, cfg: &CheckConfig) -> AxiomReport {
    let mut rng = rng_for(cfg.seed, "lift_symmetry");
    let mut rec = Recorder::new("lift_symmetry", cfg.tol);
    for t in 0..cfg.trials {
        rec.run_trial(t, |rec| {
            let n = 1 + t % 3;
            let x = rand_vel(&mut rng, n);
            let xi = TanVec::new(x.clone(), rand_vel(&mut rng, n))?;
            let lifted = ops.nt_lambda(&xi);
            rec.observe(res_tan2(&ops.nt_tau(&lifted), &lifted), || {
                format!("trial {t}: swap fixes the lift at {x:?}")
            });

            let zeta = TanPow::from_tan2(&rand_tan2(&mut rng, &x));
            let lhs = t_tau(ops, &tau_t(ops, &t_lambda(ops, &zeta)?)?)?;
            let rhs = lambda_t(ops, &tau_pow(ops, &zeta)?)?;
            rec.observe(res_pow(&lhs, &rhs), || {
                format!("trial {t}: lift/swap square at {x:?}")
            });

            // The zero section is sent to an all-zero-fiber element by
            // both legs.
            let zeta0 = TanPow::from_tan2(&ops.nt_lambda(&ops.nt_zero(&x)));
            let lhs0 = t_tau(ops, &tau_t(ops, &t_lambda(ops, &zeta0)?)?)?;
            let mut expected_comps = vec![vec![0.0; n]; 8];
            expected_comps[0] = x.clone();
            let expected = TanPow::new(n, 3, expected_comps)?;
            rec.observe(res_pow(&lhs0, &expected), || {
                format!("trial {t}: zero section through the square at {x:?}")
            });
            Ok(())
        });
    }
    rec.finish(cfg.trials)
}

/// The kernel form of the extended lift: elements with vanishing `v1`
/// decompose uniquely; elements with `v1` of unit size are rejected with
/// the right defect; the extended lift matches its defining composite.
pub fn check_kernel_pullback(ops: &dyn TangentOps, cfg: &CheckConfig) -> AxiomReport {
    let mut rng = rng_for(cfg.seed, "kernel_pullback");
    let mut rec = Recorder::new("kernel_pullback", cfg.tol);
    for t in 0..cfg.trials {
        rec.run_trial(t, |rec| {
            let n = 1 + t % 3;
            let x = rand_vel(&mut rng, n);
            let a = rand_vel(&mut rng, n);
            let c = rand_vel(&mut rng, n);

            // Existence and round-trip on a kernel element.
            let vertical = Tan2::new(x.clone(), a.clone(), vec![0.0; n], c.clone())?;
            let decomp = ops.nt_lambda2_inv(&vertical, cfg.tol)?;
            let relift = ops.nt_lambda2(&decomp)?;
            rec.observe(res_tan2(&relift, &vertical), || {
                format!("trial {t}: kernel round-trip at {x:?}")
            });
            rec.observe(residual_slice(&decomp.fibers()[1], &c), || {
                format!("trial {t}: second projection of the decomposition at {x:?}")
            });

            // Uniqueness, quantitatively: the lift moves pairs of inputs
            // exactly as far apart as they started.
            let other = TanK::new(x.clone(), vec![rand_vel(&mut rng, n), rand_vel(&mut rng, n)])?;
            let first = TanK::new(x.clone(), vec![a.clone(), c.clone()])?;
            let gap_in = residual_slice(&first.fibers()[0], &other.fibers()[0])
                .max(residual_slice(&first.fibers()[1], &other.fibers()[1]));
            let gap_out = res_tan2(&ops.nt_lambda2(&first)?, &ops.nt_lambda2(&other)?);
            rec.observe((gap_in - gap_out).abs(), || {
                format!("trial {t}: injectivity gap at {x:?}")
            });

            // The defining composite: swap of (zero-image leg + lifted leg).
            let composite = {
                let z = t_zero(ops, &TanPow::from_tan_vec(&TanVec::new(x.clone(), a.clone())?))?;
                let l = TanPow::from_tan2(&ops.nt_lambda(&TanVec::new(x.clone(), c.clone())?));
                tau_pow(ops, &add_t(ops, &z, &l)?)?.to_tan2()?
            };
            rec.observe(res_tan2(&composite, &ops.nt_lambda2(&first)?), || {
                format!("trial {t}: extended lift vs composite at {x:?}")
            });

            // Non-members: unit-size v1 must be rejected with defect 1.
            let mut v1 = rand_vel(&mut rng, n);
            let m = max_abs(&v1);
            if m < 1e-3 {
                v1 = vec![0.0; n];
                v1[0] = 1.0;
            } else {
                v1.iter_mut().for_each(|e| *e /= m);
            }
            let outside = Tan2::new(x.clone(), a.clone(), v1, c.clone())?;
            match ops.nt_lambda2_inv(&outside, cfg.tol) {
                Err(crate::error::Error::KernelViolation { residual, .. }) => {
                    rec.observe((residual - 1.0).abs(), || {
                        format!("trial {t}: rejection defect at {x:?}")
                    });
                }
                Err(e) => {
                    rec.observe(f64::INFINITY, || {
                        format!("trial {t}: wrong rejection ({e}) at {x:?}")
                    });
                }
                Ok(_) => {
                    rec.observe(1.0, || {
                        format!("trial {t}: non-kernel element decomposed at {x:?}")
                    });
                }
            }
            Ok(())
        });
    }
    rec.finish(cfg.trials)
}

/// The seven scalar-multiplication diagrams: bundle morphism, action
/// associativity and unit, both additivities, compatibility with the tag
/// swap (through the two whiskered scalings) and with the lift.
pub fn check_scalar_mult(
    ops: &dyn TangentOps,
    corpus: &[SmoothMap],
    cfg: &CheckConfig,
) -> AxiomReport {
    assert!(!corpus.is_empty(), "axiom checks need a non-empty corpus");
    let mut rng = rng_for(cfg.seed, "scalar_mult");
    let mut rec = Recorder::new("scalar_mult", cfg.tol);
    for t in 0..cfg.trials {
        rec.run_trial(t, |rec| {
            let (n, x) = trial_base(corpus, t, &mut rng)?;
            let xi = TanVec::new(x.clone(), rand_vel(&mut rng, n))?;
            let eta = TanVec::new(x.clone(), rand_vel(&mut rng, n))?;
            let r = rng.gen_range(-3.0..3.0);
            let s = rng.gen_range(-3.0..3.0);

            // (i) bundle morphism over the identity.
            rec.observe(
                residual_slice(&ops.nt_pi(&ops.nt_kappa(r, &xi)), &ops.nt_pi(&xi)),
                || format!("trial {t}: scaling over the base at {x:?}"),
            );
            rec.observe(
                res_vec(&ops.nt_kappa(r, &ops.nt_zero(&x)), &ops.nt_zero(&x)),
                || format!("trial {t}: scaling the zero section at {x:?}"),
            );

            // (ii) associativity of the action.
            rec.observe(
                res_vec(&ops.nt_kappa(r, &ops.nt_kappa(s, &xi)), &ops.nt_kappa(r * s, &xi)),
                || format!("trial {t}: action associativity at {x:?}"),
            );

            // (iii) unit.
            rec.observe(res_vec(&ops.nt_kappa(1.0, &xi), &xi), || {
                format!("trial {t}: unit scaling at {x:?}")
            });

            // (iv) additivity over the fiber.
            let sum = ops.nt_add(&TanK::pair(&xi, &eta)?)?;
            let lhs4 = ops.nt_kappa(r, &sum);
            let rhs4 = ops.nt_add(&TanK::pair(&ops.nt_kappa(r, &xi), &ops.nt_kappa(r, &eta))?)?;
            rec.observe(res_vec(&lhs4, &rhs4), || {
                format!("trial {t}: additivity in the fiber at {x:?}")
            });

            // (v) additivity over the scalars.
            let lhs5 = ops.nt_kappa(r + s, &xi);
            let rhs5 = ops.nt_add(&TanK::pair(&ops.nt_kappa(r, &xi), &ops.nt_kappa(s, &xi))?)?;
            rec.observe(res_vec(&lhs5, &rhs5), || {
                format!("trial {t}: additivity in the scalar at {x:?}")
            });

            // (vi) compatibility with the tag swap: scaling the outer
            // bundle after the swap equals swapping the slice-wise scaling.
            let zeta = TanPow::from_tan2(&rand_tan2(&mut rng, &x));
            let lhs6 = t_kappa(ops, r, &tau_pow(ops, &zeta)?)?;

            let rhs6 = tau_pow(ops, &crate::axioms::kappa_t(ops, r, &zeta)?)?;
            rec.observe(res_pow(&lhs6, &rhs6), || {
                format!("trial {t}: swap/scaling square at {x:?}")
            });

            // (vii) compatibility with the lift.
            let lhs7 = TanPow::from_tan2(&ops.nt_lambda(&ops.nt_kappa(r, &xi)));
            let rhs7 = crate::axioms::kappa_t(ops, r, &TanPow::from_tan2(&ops.nt_lambda(&xi)))?;
            rec.observe(res_pow(&lhs7, &rhs7), || {
                format!("trial {t}: lift/scaling square at {x:?}")
            });

            // Scaling by zero lands on the zero section.
            rec.observe(res_vec(&ops.nt_kappa(0.0, &xi), &ops.nt_zero(&x)), || {
                format!("trial {t}: zero scaling at {x:?}")
            });
            Ok(())
        });
    }
    rec.finish(cfg.trials)
}

/// Naturality squares of every structure map against the corpus maps.
pub fn check_naturality(
    ops: &dyn TangentOps,
    corpus: &[SmoothMap],
    cfg: &CheckConfig,
) -> AxiomReport {
    assert!(!corpus.is_empty(), "axiom checks need a non-empty corpus");
    let mut rng = rng_for(cfg.seed, "naturality");
    let mut rec = Recorder::new("naturality", cfg.tol);
    for t in 0..cfg.trials {
        rec.run_trial(t, |rec| {
            let f = &corpus[t % corpus.len()];
            let n = f.arity_in();
            let x = f.domain().sample(&mut rng)?;
            let name = f.name().to_string();
            let xi = TanVec::new(x.clone(), rand_vel(&mut rng, n))?;
            let r = rng.gen_range(-3.0..3.0);

            // Projection.
            let tfxi = ops.pushforward_t(f, &xi)?;
            rec.observe(
                residual_slice(&ops.nt_pi(&tfxi), &f.eval_reals(&ops.nt_pi(&xi))?),
                || format!("trial {t}: projection square for {name}"),
            );

            // Zero section.
            rec.observe(
                res_vec(
                    &ops.pushforward_t(f, &ops.nt_zero(&x))?,
                    &ops.nt_zero(&f.eval_reals(&x)?),
                ),
                || format!("trial {t}: zero-section square for {name}"),
            );

            // Fiberwise addition.
            let eta = TanVec::new(x.clone(), rand_vel(&mut rng, n))?;
            let pair = TanK::pair(&xi, &eta)?;
            let lhs_add = ops.pushforward_t(f, &ops.nt_add(&pair)?)?;
            let rhs_add = ops.nt_add(&ops.pushforward_tk(f, &pair)?)?;
            rec.observe(res_vec(&lhs_add, &rhs_add), || {
                format!("trial {t}: addition square for {name}")
            });

            // Tag swap.
            let zeta = rand_tan2(&mut rng, &x);
            let lhs_tau = ops.pushforward_t2(f, &ops.nt_tau(&zeta))?;
            let rhs_tau = ops.nt_tau(&ops.pushforward_t2(f, &zeta)?);
            rec.observe(res_tan2(&lhs_tau, &rhs_tau), || {
                format!("trial {t}: swap square for {name}")
            });

            // Vertical lift.
            let lhs_lam = ops.pushforward_t2(f, &ops.nt_lambda(&xi))?;
            let rhs_lam = ops.nt_lambda(&ops.pushforward_t(f, &xi)?);
            rec.observe(res_tan2(&lhs_lam, &rhs_lam), || {
                format!("trial {t}: lift square for {name}")
            });

            // Scalar multiplication.
            let lhs_kap = ops.pushforward_t(f, &ops.nt_kappa(r, &xi))?;
            let rhs_kap = ops.nt_kappa(r, &ops.pushforward_t(f, &xi)?);
            rec.observe(res_vec(&lhs_kap, &rhs_kap), || {
                format!("trial {t}: scaling square for {name}")
            });

            // Extended lift.
            let two = TanK::new(x.clone(), vec![rand_vel(&mut rng, n), rand_vel(&mut rng, n)])?;
            let lhs_l2 = ops.pushforward_t2(f, &ops.nt_lambda2(&two)?)?;
            let rhs_l2 = ops.nt_lambda2(&ops.pushforward_tk(f, &two)?)?;
            rec.observe(res_tan2(&lhs_l2, &rhs_l2), || {
                format!("trial {t}: extended-lift square for {name}")
            });
            Ok(())
        });
    }
    rec.finish(cfg.trials)
}

/// Run the whole diagram suite in a fixed order.
pub fn run_axiom_suite(
    ops: &dyn TangentOps,
    corpus: &[SmoothMap],
    cfg: &CheckConfig,
) -> Vec<AxiomReport> {
    vec![
        check_bundle_abelian_group(ops, corpus, cfg),
        check_symmetric_structure(ops, corpus, cfg),
        check_vertical_lift(ops, corpus, cfg),
        check_lift_symmetry(ops, cfg),
        check_kernel_pullback(ops, cfg),
        check_scalar_mult(ops, corpus, cfg),
        check_naturality(ops, corpus, cfg),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axioms::{EuclideanOps, TauIdentityOps};
    use crate::domain::Domain;
    use crate::expr::parse_expr;

    fn small_corpus() -> Vec<SmoothMap> {
        let mk = |name: &str, arity: usize, srcs: &[&str]| {
            SmoothMap::new(
                name,
                arity,
                srcs.iter().map(|s| parse_expr(s).unwrap()).collect(),
                Domain::unit(arity),
            )
            .unwrap()
        };
        vec![
            mk("square", 1, &["x1^2"]),
            mk("rot", 2, &["x1*x2", "x1 + x2^3"]),
            mk("mix", 3, &["x1*x2*x3", "sin(x2)", "x3^2 - x1"]),
        ]
    }

    #[test]
    fn suite_passes_on_the_jet_instance() {
        let cfg = CheckConfig::default();
        let reports = run_axiom_suite(&EuclideanOps, &small_corpus(), &cfg);
        assert_eq!(reports.len(), 7);
        for r in &reports {
            assert!(
                r.pass && r.max_residual <= 1e-9,
                "{} failed with residual {} ({:?})",
                r.name,
                r.max_residual,
                r.worst
            );
        }
    }

    #[test]
    fn corrupted_swap_fails_loudly() {
        let cfg = CheckConfig::default();
        let reports = run_axiom_suite(&TauIdentityOps, &small_corpus(), &cfg);
        let failing: Vec<&AxiomReport> = reports
            .iter()
            .filter(|r| !r.pass && r.max_residual >= 0.1)
            .collect();
        assert!(
            failing.len() >= 2,
            "expected at least two loud failures, got {:?}",
            reports
                .iter()
                .map(|r| (r.name.clone(), r.max_residual))
                .collect::<Vec<_>>()
        );
        for name in ["symmetric_structure", "lift_symmetry"] {
            let r = reports.iter().find(|r| r.name == name).unwrap();
            assert!(
                !r.pass && r.max_residual >= 0.1,
                "{name} should fail with a large residual, got {}",
                r.max_residual
            );
            assert!(r.worst.is_some(), "{name} should carry a witness");
        }
    }

    #[test]
    fn reports_gate_on_the_configured_tolerance() {
        let cfg = CheckConfig {
            trials: 10,
            tol: 1e-9,
            seed: 7,
        };
        let r = check_bundle_abelian_group(&EuclideanOps, &small_corpus(), &cfg);
        assert_eq!(r.trials, 10);
        assert!(r.pass);
        assert!(r.worst.is_none());

        let strict = CheckConfig {
            trials: 10,
            tol: -1.0,
            seed: 7,
        };
        let r2 = check_bundle_abelian_group(&EuclideanOps, &small_corpus(), &strict);
        assert!(!r2.pass, "an impossible gate must fail");
        assert!(r2.worst.is_some());
    }
}
