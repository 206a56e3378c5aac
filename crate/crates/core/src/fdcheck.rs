//! Central finite-difference reference derivatives.
//!
//! These oracles exist so tests can compare jet-computed derivatives
//! against something *arithmetically independent*: plain re-evaluation at
//! displaced points. They are deliberately never called by the evaluation
//! engine — their accuracy is O(h²), far below jet exactness, and that is
//! the point: agreement to ~1e-6 certifies the jet path without sharing
//! any code with it.

use crate::error::Result;
use crate::map::JetMap;

/// Default central-difference step.
pub const FD_STEP: f64 = 1e-5;

fn displaced(x: &[f64], v: &[f64], t: f64) -> Vec<f64> {
    x.iter().zip(v).map(|(a, b)| a + t * b).collect()
}

/// Directional derivative `Df(x)·v` by central differences.
pub fn fd_directional<M: JetMap + ?Sized>(
    f: &M,
    x: &[f64],
    v: &[f64],
    h: f64,
) -> Result<Vec<f64>> {
    let plus = f.eval_reals(&displaced(x, v, h))?;
    let minus = f.eval_reals(&displaced(x, v, -h))?;
    Ok(plus
        .iter()
        .zip(&minus)
        .map(|(p, m)| (p - m) / (2.0 * h))
        .collect())
}

/// Full Jacobian (rows = outputs) by central differences along each axis.
pub fn fd_jacobian<M: JetMap + ?Sized>(f: &M, x: &[f64], h: f64) -> Result<Vec<Vec<f64>>> {
    let n = x.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        cols.push(fd_directional(f, x, &e, h)?);
    }
    let rows = cols.first().map_or(0, Vec::len);
    Ok((0..rows).map(|r| (0..n).map(|c| cols[c][r]).collect()).collect())
}

/// Second-order bilinear term `D²f(x)(v, w)` by the four-point formula.
pub fn fd_bilinear<M: JetMap + ?Sized>(
    f: &M,
    x: &[f64],
    v: &[f64],
    w: &[f64],
    h: f64,
) -> Result<Vec<f64>> {
    let pp = f.eval_reals(&displaced(&displaced(x, v, h), w, h))?;
    let pm = f.eval_reals(&displaced(&displaced(x, v, h), w, -h))?;
    let mp = f.eval_reals(&displaced(&displaced(x, v, -h), w, h))?;
    let mm = f.eval_reals(&displaced(&displaced(x, v, -h), w, -h))?;
    Ok((0..pp.len())
        .map(|i| (pp[i] - pm[i] - mp[i] + mm[i]) / (4.0 * h * h))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Domain;
    use crate::expr::parse_expr;
    use crate::map::SmoothMap;
    use crate::rng::rng_for;
    use crate::tangent::{pushforward_t2, Tan2};
    use rand::Rng;

    fn sample_map() -> SmoothMap {
        SmoothMap::new(
            "f",
            2,
            vec![
                parse_expr("x1^2*x2").unwrap(),
                parse_expr("sin(x1) + exp(x2)").unwrap(),
            ],
            Domain::unit(2),
        )
        .unwrap()
    }

    #[test]
    fn jacobian_oracle_matches_hand_derivatives() {
        let f = sample_map();
        let x = [0.4, -0.3];
        let j = fd_jacobian(&f, &x, FD_STEP).unwrap();
        assert!((j[0][0] - 2.0 * 0.4 * -0.3).abs() < 1e-8);
        assert!((j[0][1] - 0.16).abs() < 1e-8);
        assert!((j[1][0] - 0.4f64.cos()).abs() < 1e-8);
        assert!((j[1][1] - (-0.3f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn second_order_pushforward_matches_the_difference_formula() {
        // (u, u₀, u₁, u₀₁) ↦ (f(u), Df·u₀, Df·u₁, Df·u₀₁ + D²f(u₀,u₁)),
        // with every right-hand derivative taken by finite differences.
        let f = sample_map();
        let mut rng = rng_for(3, "t2-vs-differences");
        for _ in 0..25 {
            let x: Vec<f64> = (0..2).map(|_| rng.gen_range(-0.8..0.8)).collect();
            let v: Vec<f64> = (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let w: Vec<f64> = (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let u: Vec<f64> = (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect();

            let xi = Tan2::new(x.clone(), v.clone(), w.clone(), u.clone()).unwrap();
            let out = pushforward_t2(&f, &xi).unwrap();

            let base = f.eval(&x).unwrap();
            let dv = fd_directional(&f, &x, &v, FD_STEP).unwrap();
            let dw = fd_directional(&f, &x, &w, FD_STEP).unwrap();
            let du = fd_directional(&f, &x, &u, FD_STEP).unwrap();
            let hess = fd_bilinear(&f, &x, &v, &w, FD_STEP).unwrap();

            for i in 0..2 {
                assert!((out.base[i] - base[i]).abs() < 1e-12);
                assert!((out.v0[i] - dv[i]).abs() < 1e-6, "first slot off");
                assert!((out.v1[i] - dw[i]).abs() < 1e-6, "second slot off");
                let mixed = du[i] + hess[i];
                assert!((out.v01[i] - mixed).abs() < 1e-5, "mixed slot off");
            }
        }
    }

    #[test]
    fn bilinear_oracle_is_symmetric() {
        let f = sample_map();
        let x = [0.2, 0.1];
        let v = [1.0, -0.5];
        let w = [0.3, 0.7];
        let a = fd_bilinear(&f, &x, &v, &w, FD_STEP).unwrap();
        let b = fd_bilinear(&f, &x, &w, &v, FD_STEP).unwrap();
        for i in 0..2 {
            assert!((a[i] - b[i]).abs() < 1e-6);
        }
    }
}
