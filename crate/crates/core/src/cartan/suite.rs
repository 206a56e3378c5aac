//! Relation battery for brackets and form operators.
//!
//! Every check samples random points and argument vectors, evaluates both
//! sides of a claimed operator identity, and records normalized residuals
//! through the same [`Recorder`] discipline as the bundle-axiom suite: the
//! largest residual, the first failing witness, and a hard error on any
//! evaluation failure.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::axioms::checks::Recorder;
use crate::axioms::AxiomReport;
use crate::cartan::field::{
    bracket_categorical, bracket_coordinate, bracket_kernel_defect, VectorField,
    BRACKET_KERNEL_TOL,
};
use crate::cartan::form::{
    exterior_d, form_add, form_scale, iota, lie_derivative, DifferentialForm,
};
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::expr::poly::Poly;
use crate::map::{JetMap, SmoothMap};
use crate::num::residual;
use crate::rng::rng_for;
use crate::tangent::{pushforward_t, TanVec};

/// Residual gate for the six graded operator relations.
pub const RELATION_TOL: f64 = 1e-8;
/// Residual gate for bracket-route agreement on polynomial fields.
pub const BRACKET_AGREEMENT_TOL_POLY: f64 = 1e-9;
/// Residual gate for bracket-route agreement on transcendental fields.
pub const BRACKET_AGREEMENT_TOL_TRANSC: f64 = 1e-7;
/// Residual gate for the cyclic bracket identity.
pub const JACOBI_TOL: f64 = 1e-8;
/// Residual gate for the two routes to the differential of a scalar map.
pub const D_TWO_PATH_TOL: f64 = 1e-9;

fn rand_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect()
}

fn rand_args(rng: &mut ChaCha8Rng, count: usize, n: usize) -> Vec<Vec<f64>> {
    (0..count).map(|_| rand_vec(rng, n)).collect()
}

/// A field pair and a form over the same space, with a sampling domain.
struct Combo<'a> {
    v: &'a VectorField,
    w: &'a VectorField,
    form: &'a DifferentialForm,
    domain: Domain,
}

fn combos<'a>(
    fields: &'a [VectorField],
    forms: &'a [DifferentialForm],
) -> Result<Vec<Combo<'a>>> {
    let mut out = Vec::new();
    for (i, v) in fields.iter().enumerate() {
        for w in &fields[i + 1..] {
            if v.arity() != w.arity() {
                continue;
            }
            for form in forms {
                if form.dim() != v.arity() {
                    continue;
                }
                let domain = v
                    .domain()
                    .intersect(w.domain())?
                    .intersect(form.domain())?;
                out.push(Combo { v, w, form, domain });
            }
        }
    }
    if out.is_empty() {
        return Err(Error::Domain(
            "no field pair and form share a space; cannot run the relation suite".into(),
        ));
    }
    Ok(out)
}

/// Evaluates both sides of one relation instance and records the residual.
fn observe_pair(
    rec: &mut Recorder,
    lhs: f64,
    rhs: f64,
    trial: usize,
    label: &str,
) {
    let r = residual(lhs, rhs);
    rec.observe(r, || {
        format!("trial {trial}: {label}: lhs {lhs:e} vs rhs {rhs:e}")
    });
}

/// The six graded relations among the exterior derivative, contraction, and
/// the Lie derivative, each sampled `trials` times over every compatible
/// (field pair, form) combination in round-robin order.
pub fn cartan_relation_suite(
    fields: &[VectorField],
    forms: &[DifferentialForm],
    trials: usize,
    tol: f64,
    seed: u64,
) -> Result<Vec<AxiomReport>> {
    let combos = combos(fields, forms)?;
    let mut reports = Vec::new();

    // d(d(alpha)) = 0, evaluated numerically; the symbolic version of this
    // statement is checked separately by `d_squared_symbolic`.
    let mut rec = Recorder::new("d_squared", tol);
    let mut rng = rng_for(seed, "d_squared");
    for t in 0..trials {
        let c = &combos[t % combos.len()];
        if c.form.degree() + 2 > c.form.dim() {
            continue;
        }
        rec.run_trial(t, |rec| {
            let dd = exterior_d(&exterior_d(c.form)?)?;
            let x = c.domain.sample(&mut rng)?;
            let args = rand_args(&mut rng, c.form.degree() + 2, c.form.dim());
            let lhs = dd.eval(&x, &args)?;
            observe_pair(rec, lhs, 0.0, t, "d(d(form))");
            Ok(())
        });
    }
    reports.push(rec.finish(trials));

    // Contractions anticommute: i_v(i_w(alpha)) + i_w(i_v(alpha)) = 0.
    let mut rec = Recorder::new("contraction_anticommute", tol);
    let mut rng = rng_for(seed, "contraction_anticommute");
    for t in 0..trials {
        let c = &combos[t % combos.len()];
        if c.form.degree() < 2 {
            continue;
        }
        rec.run_trial(t, |rec| {
            let vw = iota(c.v, &iota(c.w, c.form)?)?;
            let wv = iota(c.w, &iota(c.v, c.form)?)?;
            let x = c.domain.sample(&mut rng)?;
            let args = rand_args(&mut rng, c.form.degree() - 2, c.form.dim());
            let lhs = vw.eval(&x, &args)? + wv.eval(&x, &args)?;
            observe_pair(rec, lhs, 0.0, t, "i_v i_w + i_w i_v");
            Ok(())
        });
    }
    reports.push(rec.finish(trials));

    // The homotopy formula: i_v(d(alpha)) + d(i_v(alpha)) = L_v(alpha).
    let mut rec = Recorder::new("homotopy_formula", tol);
    let mut rng = rng_for(seed, "homotopy_formula");
    for t in 0..trials {
        let c = &combos[t % combos.len()];
        if c.form.degree() == 0 {
            continue;
        }
        rec.run_trial(t, |rec| {
            let assembled = form_add(
                &iota(c.v, &exterior_d(c.form)?)?,
                &exterior_d(&iota(c.v, c.form)?)?,
            )?;
            let direct = lie_derivative(c.v, c.form)?;
            let x = c.domain.sample(&mut rng)?;
            let args = rand_args(&mut rng, c.form.degree(), c.form.dim());
            observe_pair(
                rec,
                assembled.eval(&x, &args)?,
                direct.eval(&x, &args)?,
                t,
                "i_v d + d i_v vs L_v",
            );
            Ok(())
        });
    }
    reports.push(rec.finish(trials));

    // The Lie derivative commutes with the exterior derivative.
    let mut rec = Recorder::new("lie_d_commute", tol);
    let mut rng = rng_for(seed, "lie_d_commute");
    for t in 0..trials {
        let c = &combos[t % combos.len()];
        if c.form.degree() + 1 > c.form.dim() {
            continue;
        }
        rec.run_trial(t, |rec| {
            let lhs = lie_derivative(c.v, &exterior_d(c.form)?)?;
            let rhs = exterior_d(&lie_derivative(c.v, c.form)?)?;
            let x = c.domain.sample(&mut rng)?;
            let args = rand_args(&mut rng, c.form.degree() + 1, c.form.dim());
            observe_pair(
                rec,
                lhs.eval(&x, &args)?,
                rhs.eval(&x, &args)?,
                t,
                "L_v d vs d L_v",
            );
            Ok(())
        });
    }
    reports.push(rec.finish(trials));

    // [L_v, i_w] = i_[v,w], with the bracket from the component formula.
    let mut rec = Recorder::new("lie_contraction", tol);
    let mut rng = rng_for(seed, "lie_contraction");
    for t in 0..trials {
        let c = &combos[t % combos.len()];
        if c.form.degree() == 0 {
            continue;
        }
        rec.run_trial(t, |rec| {
            let lhs = form_add(
                &lie_derivative(c.v, &iota(c.w, c.form)?)?,
                &form_scale(-1.0, &iota(c.w, &lie_derivative(c.v, c.form)?)?),
            )?;
            let rhs = iota(&bracket_coordinate(c.v, c.w)?, c.form)?;
            let x = c.domain.sample(&mut rng)?;
            let args = rand_args(&mut rng, c.form.degree() - 1, c.form.dim());
            observe_pair(
                rec,
                lhs.eval(&x, &args)?,
                rhs.eval(&x, &args)?,
                t,
                "[L_v, i_w] vs i_[v,w]",
            );
            Ok(())
        });
    }
    reports.push(rec.finish(trials));

    // [L_v, L_w] = L_[v,w], with the bracket from the bundle pipeline.
    let mut rec = Recorder::new("lie_lie_bracket", tol);
    let mut rng = rng_for(seed, "lie_lie_bracket");
    for t in 0..trials {
        let c = &combos[t % combos.len()];
        rec.run_trial(t, |rec| {
            let lhs = form_add(
                &lie_derivative(c.v, &lie_derivative(c.w, c.form)?)?,
                &form_scale(-1.0, &lie_derivative(c.w, &lie_derivative(c.v, c.form)?)?),
            )?;
            let rhs = lie_derivative(&bracket_categorical(c.v, c.w)?, c.form)?;
            let x = c.domain.sample(&mut rng)?;
            let args = rand_args(&mut rng, c.form.degree(), c.form.dim());
            observe_pair(
                rec,
                lhs.eval(&x, &args)?,
                rhs.eval(&x, &args)?,
                t,
                "[L_v, L_w] vs L_[v,w]",
            );
            Ok(())
        });
    }
    reports.push(rec.finish(trials));

    Ok(reports)
}

/// Cyclic sum of nested brackets, all through the bundle pipeline:
/// `[u,[v,w]] + [v,[w,u]] + [w,[u,v]] = 0` at `trials` random
/// (triple, point) samples.
pub fn jacobi_check(
    fields: &[VectorField],
    trials: usize,
    tol: f64,
    seed: u64,
) -> Result<AxiomReport> {
    let mut by_dim: Vec<Vec<&VectorField>> = Vec::new();
    for f in fields {
        let n = f.arity();
        if by_dim.len() <= n {
            by_dim.resize_with(n + 1, Vec::new);
        }
        by_dim[n].push(f);
    }
    let pools: Vec<&Vec<&VectorField>> =
        by_dim.iter().filter(|p| p.len() >= 3).collect();
    if pools.is_empty() {
        return Err(Error::Domain(
            "need at least three fields on one space for the cyclic identity".into(),
        ));
    }
    let mut rec = Recorder::new("jacobi", tol);
    let mut rng = rng_for(seed, "jacobi");
    for t in 0..trials {
        let pool = pools[t % pools.len()];
        // Three distinct indices, sampled uniformly.
        let mut idx: Vec<usize> = (0..pool.len()).collect();
        for i in 0..3 {
            let j = rng.gen_range(i..idx.len());
            idx.swap(i, j);
        }
        let (u, v, w) = (pool[idx[0]], pool[idx[1]], pool[idx[2]]);
        rec.run_trial(t, |rec| {
            let a = bracket_categorical(u, &bracket_categorical(v, w)?)?;
            let b = bracket_categorical(v, &bracket_categorical(w, u)?)?;
            let c = bracket_categorical(w, &bracket_categorical(u, v)?)?;
            let domain = a.domain().intersect(b.domain())?.intersect(c.domain())?;
            let x = domain.sample(&mut rng)?;
            let (pa, pb, pc) = (a.velocity(&x)?, b.velocity(&x)?, c.velocity(&x)?);
            let mut scale: f64 = 0.0;
            let mut gap: f64 = 0.0;
            for i in 0..pa.len() {
                scale = scale.max(pa[i].abs()).max(pb[i].abs()).max(pc[i].abs());
                gap = gap.max((pa[i] + pb[i] + pc[i]).abs());
            }
            let r = gap / (1.0 + scale);
            rec.observe(r, || {
                format!(
                    "trial {t}: cyclic sum of [{}], [{}], [{}] at {x:?} leaves {gap:e}",
                    u.name(),
                    v.name(),
                    w.name()
                )
            });
            Ok(())
        });
    }
    Ok(rec.finish(trials))
}

/// Outcome of comparing the two bracket routes across a field corpus.
#[derive(Clone, Debug)]
pub struct BracketAgreement {
    /// Same-space field pairs compared.
    pub pairs: usize,
    /// Random evaluation points per pair.
    pub points_per_pair: usize,
    /// Largest normalized deviation between the two routes.
    pub max_residual: f64,
    /// Largest inner-projection defect certified by the pipeline.
    pub max_kernel_defect: f64,
    /// Residual gate the comparison ran against.
    pub tol: f64,
    pub pass: bool,
    /// First point where the routes disagreed beyond the gate, if any.
    pub worst: Option<String>,
}

/// Compares the bundle-pipeline bracket against the component-formula
/// bracket on every same-space pair of corpus fields.
pub fn bracket_agreement(
    fields: &[VectorField],
    points_per_pair: usize,
    tol: f64,
    seed: u64,
) -> Result<BracketAgreement> {
    let mut pairs = 0;
    let mut max_residual: f64 = 0.0;
    let mut max_defect: f64 = 0.0;
    let mut worst: Option<String> = None;
    let mut rng = rng_for(seed, "bracket agreement");
    for (i, v) in fields.iter().enumerate() {
        for w in &fields[i + 1..] {
            if v.arity() != w.arity() {
                continue;
            }
            pairs += 1;
            let cat = bracket_categorical(v, w)?;
            let coord = bracket_coordinate(v, w)?;
            let domain = cat.domain().intersect(coord.domain())?;
            for _ in 0..points_per_pair {
                let x = domain.sample(&mut rng)?;
                let a = cat.velocity(&x)?;
                let b = coord.velocity(&x)?;
                let r = a
                    .iter()
                    .zip(&b)
                    .map(|(p, q)| residual(*p, *q))
                    .fold(0.0, f64::max);
                if r > max_residual {
                    max_residual = r;
                    if r > tol && worst.is_none() {
                        worst = Some(format!(
                            "[{}, {}] at {x:?}: routes differ by {r:e}",
                            v.name(),
                            w.name()
                        ));
                    }
                }
                max_defect = max_defect.max(bracket_kernel_defect(v, w, &x)?);
            }
        }
    }
    if pairs == 0 {
        return Err(Error::Domain(
            "no same-space field pairs to compare bracket routes on".into(),
        ));
    }
    Ok(BracketAgreement {
        pairs,
        points_per_pair,
        max_residual,
        max_kernel_defect: max_defect,
        tol,
        pass: max_residual <= tol && max_defect <= BRACKET_KERNEL_TOL,
        worst,
    })
}

/// The differential of a scalar map, two ways: as the degree-1 form built
/// by the exterior derivative, and as the velocity component of the jet
/// pushforward. Both must agree on random tangent vectors.
pub fn d_two_path_check(
    maps: &[SmoothMap],
    trials: usize,
    tol: f64,
    seed: u64,
) -> Result<AxiomReport> {
    let scalars: Vec<&SmoothMap> = maps.iter().filter(|m| m.arity_out() == 1).collect();
    if scalars.is_empty() {
        return Err(Error::Domain(
            "no scalar maps in the corpus for the differential comparison".into(),
        ));
    }
    let mut rec = Recorder::new("d_two_path", tol);
    let mut rng = rng_for(seed, "d_two_path");
    for t in 0..trials {
        let f = scalars[t % scalars.len()];
        rec.run_trial(t, |rec| {
            let df = exterior_d(&DifferentialForm::from_scalar_map(f)?)?;
            let x = f.domain().sample(&mut rng)?;
            let w = rand_vec(&mut rng, f.arity_in());
            let via_form = df.eval(&x, &[w.clone()])?;
            let pushed = pushforward_t(f, &TanVec::new(x.clone(), w)?)?;
            observe_pair(rec, via_form, pushed.vel[0], t, "form route vs pushforward");
            Ok(())
        });
    }
    Ok(rec.finish(trials))
}

/// Applies the exterior derivative twice to every expression-backed
/// polynomial form and reduces each resulting coefficient to polynomial
/// normal form, which must be identically zero — no sampling involved.
pub fn d_squared_symbolic(forms: &[DifferentialForm]) -> Result<AxiomReport> {
    let mut checked = 0;
    let mut worst: Option<String> = None;
    for form in forms {
        if !form.is_polynomial() {
            continue;
        }
        let dd = exterior_d(&exterior_d(form)?)?;
        if !dd.is_symbolic() {
            worst.get_or_insert_with(|| {
                format!("d(d({})) lost its symbolic coefficients", form.name())
            });
            continue;
        }
        checked += 1;
        for (key, c) in dd.coeffs() {
            let expr = c.as_expr().expect("symbolic coefficient");
            match Poly::from_expr(expr, form.dim()) {
                Some(p) if p.is_zero() => {}
                Some(_) => {
                    worst.get_or_insert_with(|| {
                        format!(
                            "d(d({})) has nonzero coefficient at {key:?}",
                            form.name()
                        )
                    });
                }
                None => {
                    worst.get_or_insert_with(|| {
                        format!(
                            "d(d({})) coefficient at {key:?} is not polynomial",
                            form.name()
                        )
                    });
                }
            }
        }
    }
    if checked == 0 {
        return Err(Error::Domain(
            "no polynomial forms to reduce symbolically".into(),
        ));
    }
    let pass = worst.is_none();
    Ok(AxiomReport {
        name: "d_squared_symbolic".into(),
        trials: checked,
        max_residual: if pass { 0.0 } else { 1.0 },
        pass,
        worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{add, call, cnst, mul, neg, powi, var, Func};

    fn plane_fields() -> Vec<VectorField> {
        let dom = Domain::centered(2, 1.0);
        vec![
            VectorField::from_exprs("rot", vec![var(1), neg(var(0))], dom.clone()).unwrap(),
            VectorField::from_exprs("shear", vec![var(1), cnst(0.0)], dom.clone()).unwrap(),
            VectorField::from_exprs(
                "quad",
                vec![powi(var(0), 2), mul(var(0), var(1))],
                dom.clone(),
            )
            .unwrap(),
            VectorField::from_exprs("wave", vec![call(Func::Sin, var(1)), var(0)], dom)
                .unwrap(),
        ]
    }

    fn plane_forms() -> Vec<DifferentialForm> {
        let dom = Domain::centered(2, 1.0);
        vec![
            DifferentialForm::from_coeff_exprs(
                "f",
                0,
                dom.clone(),
                vec![(vec![], mul(var(0), var(1)))],
            )
            .unwrap(),
            DifferentialForm::from_coeff_exprs(
                "alpha",
                1,
                dom.clone(),
                vec![(vec![0], powi(var(1), 2)), (vec![1], var(0))],
            )
            .unwrap(),
            DifferentialForm::from_coeff_exprs(
                "omega",
                2,
                dom,
                vec![(vec![0, 1], add(mul(var(0), var(1)), cnst(1.0)))],
            )
            .unwrap(),
        ]
    }

    #[test]
    fn relation_suite_passes_on_plane_corpus() {
        let reports =
            cartan_relation_suite(&plane_fields(), &plane_forms(), 40, RELATION_TOL, 42)
                .unwrap();
        assert_eq!(reports.len(), 6);
        for r in &reports {
            assert!(
                r.pass,
                "{} failed with residual {:e}: {:?}",
                r.name, r.max_residual, r.worst
            );
        }
    }

    #[test]
    fn jacobi_holds_on_plane_corpus() {
        let r = jacobi_check(&plane_fields(), 60, JACOBI_TOL, 42).unwrap();
        assert!(r.pass, "jacobi residual {:e}: {:?}", r.max_residual, r.worst);
    }

    #[test]
    fn bracket_routes_agree_on_plane_corpus() {
        let a = bracket_agreement(&plane_fields(), 50, BRACKET_AGREEMENT_TOL_TRANSC, 42)
            .unwrap();
        assert!(a.pass, "agreement {a:?}");
        assert_eq!(a.pairs, 6);
        assert!(a.max_kernel_defect <= BRACKET_KERNEL_TOL);
    }

    #[test]
    fn differential_routes_agree() {
        let dom = Domain::centered(2, 1.0);
        let maps = vec![
            SmoothMap::new("g", 2, vec![mul(var(0), powi(var(1), 3))], dom.clone()).unwrap(),
            SmoothMap::new("h", 2, vec![call(Func::Exp, mul(cnst(0.4), var(0)))], dom)
                .unwrap(),
        ];
        let r = d_two_path_check(&maps, 80, D_TWO_PATH_TOL, 42).unwrap();
        assert!(r.pass, "two-path residual {:e}", r.max_residual);
    }

    #[test]
    fn symbolic_d_squared_reduces_to_zero() {
        let r = d_squared_symbolic(&plane_forms()).unwrap();
        assert!(r.pass, "{:?}", r.worst);
        assert_eq!(r.trials, 3);
    }
}
