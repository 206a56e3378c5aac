//! The invertible-matrix group: a smooth multiplication realizes a
//! trivialization of its tangent fibers.
//!
//! Multiplication of n×n matrices is a polynomial map, so its derivative
//! can be pushed through the jet pipeline without any bespoke
//! differentiation. Left translation `v ↦ g·v` identifies the fiber at the
//! identity with the fiber at `g`; composing the translations at `g` and
//! `g⁻¹` in either order must restore the input. The check samples
//! well-conditioned group elements and verifies the round trips, the unit
//! law, and that every fiber vector is the velocity of an actual smooth
//! path through the identity.

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::expr::{add, cnst, mul, var, Expr};
use crate::map::SmoothMap;
use crate::num::residual_slice;
use crate::rng::rng_for;
use crate::tangent::{pushforward_t, TanVec};
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::axioms::checks::Recorder;
use crate::axioms::AxiomReport;

/// Sampled group elements must have determinant at least this far from
/// zero, so inverses stay well conditioned.
pub const GROUP_UNIT_DET_MIN: f64 = 0.5;

const SAMPLE_ATTEMPTS: usize = 64;

/// The determinant of an n×n matrix of variables `x_{ij} = var(i·n + j)`,
/// expanded by minors along the first row. Exponential in `n`; intended
/// for the small sizes the matrix-group spaces use.
pub fn det_expr(n: usize) -> Expr {
    fn det_of(rows: &[usize], cols: &[usize], n: usize) -> Expr {
        if rows.len() == 1 {
            return var(rows[0] * n + cols[0]);
        }
        let mut acc: Option<Expr> = None;
        for (c, &col) in cols.iter().enumerate() {
            let sub_rows = &rows[1..];
            let sub_cols: Vec<usize> = cols
                .iter()
                .copied()
                .filter(|&cc| cc != col)
                .collect();
            let mut term = mul(var(rows[0] * n + col), det_of(sub_rows, &sub_cols, n));
            if c % 2 == 1 {
                term = mul(cnst(-1.0), term);
            }
            acc = Some(match acc {
                None => term,
                Some(prev) => add(prev, term),
            });
        }
        acc.expect("nonempty expansion")
    }
    assert!(n >= 1, "determinant needs a positive size");
    let all: Vec<usize> = (0..n).collect();
    det_of(&all, &all, n)
}

/// Matrix multiplication ℝ^{n²} × ℝ^{n²} → ℝ^{n²} as an expression-backed
/// map on row-major flattenings: the first n² inputs are the left factor,
/// the rest the right.
pub fn mat_mul_map(n: usize) -> Result<SmoothMap> {
    let a = |i: usize, j: usize| var(i * n + j);
    let b = |i: usize, j: usize| var(n * n + i * n + j);
    let mut outputs = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut e: Option<Expr> = None;
            for l in 0..n {
                let term = mul(a(i, l), b(l, j));
                e = Some(match e {
                    None => term,
                    Some(prev) => add(prev, term),
                });
            }
            outputs.push(e.expect("n >= 1"));
        }
    }
    SmoothMap::new("matmul", 2 * n * n, outputs, Domain::centered(2 * n * n, 8.0))
}

fn identity_flat(n: usize) -> Vec<f64> {
    let mut e = vec![0.0; n * n];
    for i in 0..n {
        e[i * n + i] = 1.0;
    }
    e
}

/// Left translation of a fiber vector: the velocity of `t ↦ g·(e + t·v)`,
/// computed by pushing a tangent vector through the multiplication map.
fn translate(matmul: &SmoothMap, g: &[f64], v: &[f64], n: usize) -> Result<Vec<f64>> {
    let mut base = g.to_vec();
    base.extend(identity_flat(n));
    let mut vel = vec![0.0; n * n];
    vel.extend_from_slice(v);
    let xi = TanVec::new(base, vel)?;
    Ok(pushforward_t(matmul, &xi)?.vel)
}

fn sample_entries(rng: &mut ChaCha8Rng, len: usize, half_width: f64) -> Vec<f64> {
    (0..len)
        .map(|_| rng.gen_range(-half_width..half_width))
        .collect()
}

/// A random matrix with entries in (−1, 1) and determinant bounded away
/// from zero.
fn sample_group_element(rng: &mut ChaCha8Rng, n: usize) -> Result<Vec<f64>> {
    for _ in 0..SAMPLE_ATTEMPTS {
        let g = sample_entries(rng, n * n, 1.0);
        let det = DMatrix::from_row_slice(n, n, &g).determinant();
        if det.abs() >= GROUP_UNIT_DET_MIN {
            return Ok(g);
        }
    }
    Err(Error::SingularMatrix(format!(
        "no matrix with |det| >= {GROUP_UNIT_DET_MIN} found in {SAMPLE_ATTEMPTS} attempts"
    )))
}

fn invert(g: &[f64], n: usize) -> Result<Vec<f64>> {
    DMatrix::from_row_slice(n, n, g)
        .try_inverse()
        .map(|inv| inv.transpose().as_slice().to_vec())
        .ok_or_else(|| Error::SingularMatrix("sampled group element was not invertible".into()))
}

/// Check that left translation trivializes the tangent fibers of the
/// invertible n×n matrices: translating a fiber vector to `g` and back by
/// `g⁻¹` (in both orders) restores it, translation at the identity is the
/// identity, and every fiber vector is realized as the velocity of a
/// straight path through the identity.
pub fn group_trivialization_check(
    n: usize,
    trials: usize,
    tol: f64,
    seed: u64,
) -> Result<AxiomReport> {
    assert!(n >= 1, "matrix group needs a positive size");
    let matmul = mat_mul_map(n)?;
    let mut rec = Recorder::new("group_trivialization", tol);
    let mut rng = rng_for(seed, "group-trivialization");
    for trial in 0..trials {
        let g = sample_group_element(&mut rng, n)?;
        let ginv = invert(&g, n)?;
        let v = sample_entries(&mut rng, n * n, 2.0);

        let up = translate(&matmul, &g, &v, n)?;
        let back = translate(&matmul, &ginv, &up, n)?;
        rec.observe(residual_slice(&back, &v), || {
            format!("trial {trial}: g⁻¹·(g·v) strayed from v")
        });

        let down = translate(&matmul, &ginv, &v, n)?;
        let forward = translate(&matmul, &g, &down, n)?;
        rec.observe(residual_slice(&forward, &v), || {
            format!("trial {trial}: g·(g⁻¹·v) strayed from v")
        });

        let at_unit = translate(&matmul, &identity_flat(n), &v, n)?;
        rec.observe(residual_slice(&at_unit, &v), || {
            format!("trial {trial}: translation at the identity moved v")
        });

        // Every fiber vector is the velocity of the straight path t ↦ t·v
        // through the zero matrix offset at the identity — the fiber is a
        // full vector space, not just a formal coordinate copy.
        let path = SmoothMap::new(
            "ray_in_group",
            1,
            v.iter().map(|&c| mul(cnst(c), var(0))).collect(),
            Domain::unit(1),
        )?;
        let vel = pushforward_t(&path, &TanVec::new(vec![0.0], vec![1.0])?)?.vel;
        rec.observe(residual_slice(&vel, &v), || {
            format!("trial {trial}: straight path velocity strayed from its direction")
        });
    }
    Ok(rec.finish(trials))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinant_expression_matches_a_numeric_determinant() {
        let mut rng = rng_for(7, "det-test");
        for n in 1..=3usize {
            let det = det_expr(n);
            for _ in 0..20 {
                let m = sample_entries(&mut rng, n * n, 2.0);
                let symbolic = det.eval_real(&m).unwrap();
                let numeric = DMatrix::from_row_slice(n, n, &m).determinant();
                assert!(
                    (symbolic - numeric).abs() < 1e-10,
                    "n={n}: {symbolic} vs {numeric}"
                );
            }
        }
    }

    #[test]
    fn matrix_multiplication_map_multiplies() {
        let mut rng = rng_for(8, "matmul-test");
        for n in 1..=3usize {
            let matmul = mat_mul_map(n).unwrap();
            for _ in 0..10 {
                let a = sample_entries(&mut rng, n * n, 1.5);
                let b = sample_entries(&mut rng, n * n, 1.5);
                let mut input = a.clone();
                input.extend_from_slice(&b);
                let got = matmul.eval(&input).unwrap();
                let expect = DMatrix::from_row_slice(n, n, &a) * DMatrix::from_row_slice(n, n, &b);
                for i in 0..n {
                    for j in 0..n {
                        assert!((got[i * n + j] - expect[(i, j)]).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn inversion_is_row_major() {
        let g = vec![1.0, 2.0, 0.0, 1.0]; // upper triangular, det 1
        let inv = invert(&g, 2).unwrap();
        assert_eq!(inv, vec![1.0, -2.0, 0.0, 1.0]);
    }

    #[test]
    fn translation_is_left_multiplication() {
        let n = 2;
        let matmul = mat_mul_map(n).unwrap();
        let g = vec![0.0, 1.0, -1.0, 0.0]; // quarter turn
        let v = vec![1.0, 2.0, 3.0, 4.0];
        let moved = translate(&matmul, &g, &v, n).unwrap();
        // g·v for the quarter turn swaps and negates rows.
        assert_eq!(moved, vec![3.0, 4.0, -1.0, -2.0]);
    }

    #[test]
    fn scalar_group_trivializes_exactly() {
        let report = group_trivialization_check(1, 50, 1e-9, 42).unwrap();
        assert!(report.pass, "failed: {:?}", report.worst);
        assert_eq!(report.trials, 50);
        // Multiplication of scalars through the jet pipeline is exact up
        // to one rounding of the reciprocal.
        assert!(report.max_residual < 1e-12);
    }

    #[test]
    fn two_by_two_group_trivializes() {
        let report = group_trivialization_check(2, 50, 1e-9, 42).unwrap();
        assert!(report.pass, "failed: {:?}", report.worst);
        assert!(report.max_residual < 1e-10);
    }

    #[test]
    fn sampler_rejects_near_singular_matrices() {
        let mut rng = rng_for(11, "sampler-test");
        for _ in 0..20 {
            let g = sample_group_element(&mut rng, 2).unwrap();
            let det = DMatrix::from_row_slice(2, 2, &g).determinant();
            assert!(det.abs() >= GROUP_UNIT_DET_MIN);
        }
    }
}
