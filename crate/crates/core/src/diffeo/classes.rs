//! Tangent classes on a presented space and bounded equivalence search.
//!
//! A tangent class is represented by a plot, a base point in its domain,
//! and a vector there; a tuple carries several vectors at one base. Two
//! representatives name the same class when a chain of identification
//! generators connects them — each application moves the base through the
//! generator and the vectors through its derivative. The search below runs
//! a bidirectional breadth-first walk over generator applications with
//! positions quantized at [`CLASS_QUANTUM`]; when both frontiers exhaust
//! (or the budget runs out) without meeting, registered invariant
//! certificates are consulted, and differing values certify separation.
//! Absent both a chain and a certificate the honest answer is `Unknown`.

use crate::axioms::checks::Recorder;
use crate::axioms::AxiomReport;
use crate::error::{Error, Result};
use crate::num::residual;
use crate::rng::rng_for;
use rand::Rng;
use std::collections::{HashMap, VecDeque};

use super::space::DiffSpace;

/// Quantization step for search keys: representatives whose bases and
/// vectors agree componentwise to this resolution are one search node.
pub const CLASS_QUANTUM: f64 = 1e-9;

/// Replaying the two returned chains must land both endpoints within this
/// of each other, componentwise.
pub const REPLAY_TOL: f64 = 1e-9;

/// Certificate values differing by more than this separate two tuples.
pub const CERT_SEPARATION_TOL: f64 = 1e-6;

/// Certificate constancy is tested on this many random representatives
/// per identification generator.
pub const CERT_REPS_PER_GENERATOR: usize = 50;

const CERT_CONSTANCY_TOL: f64 = 1e-9;

/// One tangent vector presented on a plot.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentClass {
    pub plot: usize,
    pub base: Vec<f64>,
    pub vec: Vec<f64>,
}

impl TangentClass {
    pub fn new(space: &DiffSpace, plot: &str, base: Vec<f64>, vec: Vec<f64>) -> Result<Self> {
        let tuple = TangentTuple::new(space, plot, base, vec![vec])?;
        Ok(TangentClass {
            plot: tuple.plot,
            base: tuple.base,
            vec: tuple.vecs.into_iter().next().expect("one vector"),
        })
    }

    pub fn to_tuple(&self) -> TangentTuple {
        TangentTuple {
            plot: self.plot,
            base: self.base.clone(),
            vecs: vec![self.vec.clone()],
        }
    }
}

/// Several tangent vectors at one base point of one plot.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentTuple {
    pub plot: usize,
    pub base: Vec<f64>,
    pub vecs: Vec<Vec<f64>>,
}

impl TangentTuple {
    pub fn new(
        space: &DiffSpace,
        plot: &str,
        base: Vec<f64>,
        vecs: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let idx = space.plot_index(plot).ok_or_else(|| {
            Error::CorpusViolation(format!(
                "space `{}` has no plot named `{plot}`",
                space.name()
            ))
        })?;
        let map = &space.plots()[idx].map;
        let dim = map.domain().dim();
        if base.len() != dim {
            return Err(Error::ArityMismatch {
                expected: dim,
                got: base.len(),
                context: format!("base point on plot `{plot}`"),
            });
        }
        if !map.domain().contains(&base) {
            return Err(Error::Domain(format!(
                "base point {base:?} lies outside the domain of plot `{plot}`"
            )));
        }
        if vecs.is_empty() {
            return Err(Error::ArityMismatch {
                expected: 1,
                got: 0,
                context: format!("vectors on plot `{plot}`"),
            });
        }
        for v in &vecs {
            if v.len() != dim {
                return Err(Error::ArityMismatch {
                    expected: dim,
                    got: v.len(),
                    context: format!("vector on plot `{plot}`"),
                });
            }
        }
        Ok(TangentTuple {
            plot: idx,
            base,
            vecs,
        })
    }

    pub fn k(&self) -> usize {
        self.vecs.len()
    }
}

/// Verdict of the equivalence search.
#[derive(Clone, Debug)]
pub enum Equivalence {
    /// Two generator chains meeting at a common representative: `forward`
    /// applied to the left tuple and `backward` applied to the right tuple
    /// land within [`REPLAY_TOL`] of each other. An empty `backward` means
    /// the forward chain reaches the right tuple itself.
    Equivalent {
        forward: Vec<String>,
        backward: Vec<String>,
    },
    /// A registered invariant took different values on the two tuples, so
    /// no chain can ever connect them.
    Separated {
        certificate: String,
        left: f64,
        right: f64,
    },
    /// Neither a chain nor a separating certificate within the budget;
    /// says nothing about the classes themselves.
    Unknown { explored: usize },
}

/// Move a tuple through one identification generator. Returns `None` when
/// the generator does not apply — wrong source plot, base outside the
/// generator's domain, or image outside the target plot's domain.
pub fn apply_generator(
    space: &DiffSpace,
    gen: usize,
    tuple: &TangentTuple,
) -> Result<Option<TangentTuple>> {
    let g = &space.generators()[gen];
    if tuple.plot != g.source || !g.map.domain().contains(&tuple.base) {
        return Ok(None);
    }
    let base = g.map.eval(&tuple.base)?;
    if !space.plots()[g.target].map.domain().contains(&base) {
        return Ok(None);
    }
    let j = g.map.jacobian(&tuple.base)?;
    let vecs = tuple
        .vecs
        .iter()
        .map(|w| {
            j.iter()
                .map(|row| row.iter().zip(w).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect();
    Ok(Some(TangentTuple {
        plot: g.target,
        base,
        vecs,
    }))
}

/// Apply a named chain of generators in order.
pub fn replay_chain(
    space: &DiffSpace,
    start: &TangentTuple,
    chain: &[String],
) -> Result<TangentTuple> {
    let mut cur = start.clone();
    for name in chain {
        let idx = space.generator_index(name).ok_or_else(|| {
            Error::CorpusViolation(format!(
                "space `{}` has no generator named `{name}`",
                space.name()
            ))
        })?;
        cur = apply_generator(space, idx, &cur)?.ok_or_else(|| {
            Error::CorpusViolation(format!(
                "generator `{name}` does not apply to the representative at {:?}",
                cur.base
            ))
        })?;
    }
    Ok(cur)
}

fn quantize(x: f64) -> i64 {
    (x / CLASS_QUANTUM).round() as i64
}

fn state_key(t: &TangentTuple) -> Vec<i64> {
    let mut key = Vec::with_capacity(1 + t.base.len() * (1 + t.vecs.len()));
    key.push(t.plot as i64);
    key.extend(t.base.iter().copied().map(quantize));
    for v in &t.vecs {
        key.extend(v.iter().copied().map(quantize));
    }
    key
}

fn tuple_gap(a: &TangentTuple, b: &TangentTuple) -> f64 {
    if a.plot != b.plot {
        return f64::INFINITY;
    }
    let mut gap = a
        .base
        .iter()
        .zip(&b.base)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    for (v, w) in a.vecs.iter().zip(&b.vecs) {
        gap = v
            .iter()
            .zip(w)
            .map(|(x, y)| (x - y).abs())
            .fold(gap, f64::max);
    }
    gap
}

/// Decide whether two tangent tuples represent the same point of the
/// quotient, spending at most `budget` generator applications.
pub fn equivalent_tuple(
    space: &DiffSpace,
    a: &TangentTuple,
    b: &TangentTuple,
    budget: usize,
) -> Result<Equivalence> {
    if a.k() != b.k() {
        return Err(Error::ArityMismatch {
            expected: a.k(),
            got: b.k(),
            context: "tangent tuple comparison".into(),
        });
    }

    // seen maps a quantized state to the chain that produced it.
    let mut seen_a: HashMap<Vec<i64>, Vec<String>> = HashMap::new();
    let mut seen_b: HashMap<Vec<i64>, Vec<String>> = HashMap::new();
    let mut queue_a: VecDeque<TangentTuple> = VecDeque::new();
    let mut queue_b: VecDeque<TangentTuple> = VecDeque::new();

    seen_a.insert(state_key(a), Vec::new());
    seen_b.insert(state_key(b), Vec::new());
    queue_a.push_back(a.clone());
    queue_b.push_back(b.clone());

    let meet = |fwd: Vec<String>, bwd: Vec<String>| -> Result<Equivalence> {
        let left = replay_chain(space, a, &fwd)?;
        let right = replay_chain(space, b, &bwd)?;
        let gap = tuple_gap(&left, &right);
        if gap > REPLAY_TOL {
            return Err(Error::CorpusViolation(format!(
                "chain replay diverged by {gap:e} (forward {fwd:?}, backward {bwd:?})"
            )));
        }
        Ok(Equivalence::Equivalent {
            forward: fwd,
            backward: bwd,
        })
    };

    if let Some(bwd) = seen_b.get(&state_key(a)) {
        return meet(Vec::new(), bwd.clone());
    }

    let mut explored = 0usize;
    while explored < budget && (!queue_a.is_empty() || !queue_b.is_empty()) {
        for side in 0..2 {
            let (queue, seen, other) = if side == 0 {
                (&mut queue_a, &mut seen_a, &seen_b)
            } else {
                (&mut queue_b, &mut seen_b, &seen_a)
            };
            let Some(cur) = queue.pop_front() else { continue };
            let chain = seen
                .get(&state_key(&cur))
                .expect("queued states are recorded")
                .clone();
            for gen in 0..space.generators().len() {
                if explored >= budget {
                    break;
                }
                explored += 1;
                let Some(next) = apply_generator(space, gen, &cur)? else {
                    continue;
                };
                let key = state_key(&next);
                if seen.contains_key(&key) {
                    continue;
                }
                let mut next_chain = chain.clone();
                next_chain.push(space.generators()[gen].name.clone());
                if let Some(other_chain) = other.get(&key) {
                    let (fwd, bwd) = if side == 0 {
                        (next_chain, other_chain.clone())
                    } else {
                        (other_chain.clone(), next_chain)
                    };
                    return meet(fwd, bwd);
                }
                seen.insert(key, next_chain);
                queue.push_back(next);
            }
        }
    }

    for cert in space.certificates() {
        let left = cert.eval(space, a.plot, &a.base, &a.vecs)?;
        let right = cert.eval(space, b.plot, &b.base, &b.vecs)?;
        if (left - right).abs() > CERT_SEPARATION_TOL {
            return Ok(Equivalence::Separated {
                certificate: cert.name.clone(),
                left,
                right,
            });
        }
    }

    Ok(Equivalence::Unknown { explored })
}

/// Single-vector version of [`equivalent_tuple`].
pub fn equivalent_tangent(
    space: &DiffSpace,
    a: &TangentClass,
    b: &TangentClass,
    budget: usize,
) -> Result<Equivalence> {
    equivalent_tuple(space, &a.to_tuple(), &b.to_tuple(), budget)
}

/// Test every registered certificate for constancy under every
/// identification generator, on [`CERT_REPS_PER_GENERATOR`] random pair
/// representatives each. A space with no certificates or no generators
/// yields a vacuous pass with zero trials.
pub fn certificate_constancy(space: &DiffSpace, seed: u64) -> Result<AxiomReport> {
    let mut rec = Recorder::new("certificate_constancy", CERT_CONSTANCY_TOL);
    let mut rng = rng_for(seed, "certificate-constancy");
    let mut trials = 0usize;
    for gen in 0..space.generators().len() {
        let g = &space.generators()[gen];
        let source_dim = space.plots()[g.source].map.domain().dim();
        for _ in 0..CERT_REPS_PER_GENERATOR {
            let mut applied = None;
            let mut tuple = None;
            for _ in 0..64 {
                let base = g.map.domain().sample(&mut rng)?;
                if !space.plots()[g.source].map.domain().contains(&base) {
                    continue;
                }
                let vecs: Vec<Vec<f64>> = (0..2)
                    .map(|_| (0..source_dim).map(|_| rng.gen_range(-2.0..2.0)).collect())
                    .collect();
                let t = TangentTuple {
                    plot: g.source,
                    base,
                    vecs,
                };
                if let Some(moved) = apply_generator(space, gen, &t)? {
                    applied = Some(moved);
                    tuple = Some(t);
                    break;
                }
            }
            let (Some(t), Some(moved)) = (tuple, applied) else {
                return Err(Error::Domain(format!(
                    "generator `{}` of space `{}` applies nowhere in its sampled domain",
                    g.name,
                    space.name()
                )));
            };
            for cert in space.certificates() {
                let before = cert.eval(space, t.plot, &t.base, &t.vecs)?;
                let after = cert.eval(space, moved.plot, &moved.base, &moved.vecs)?;
                trials += 1;
                rec.observe(residual(before, after), || {
                    format!(
                        "certificate `{}` jumped from {before:e} to {after:e} under `{}` at {:?}",
                        cert.name, g.name, t.base
                    )
                });
            }
        }
    }
    Ok(rec.finish(trials))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffeo::builtin::builtin_space;

    fn folded_line() -> DiffSpace {
        builtin_space("folded_line").unwrap()
    }

    #[test]
    fn identical_representatives_are_equivalent_with_empty_chains() {
        let space = folded_line();
        let a = TangentClass::new(&space, "quot", vec![0.25], vec![1.5]).unwrap();
        match equivalent_tangent(&space, &a, &a.clone(), 100).unwrap() {
            Equivalence::Equivalent { forward, backward } => {
                assert!(forward.is_empty());
                assert!(backward.is_empty());
            }
            other => panic!("expected equivalence, got {other:?}"),
        }
    }

    #[test]
    fn flip_negates_base_and_vector() {
        let space = folded_line();
        let t = TangentTuple::new(&space, "quot", vec![0.25], vec![vec![1.0], vec![-0.5]]).unwrap();
        let moved = apply_generator(&space, 0, &t).unwrap().unwrap();
        assert_eq!(moved.plot, t.plot);
        assert_eq!(moved.base, vec![-0.25]);
        assert_eq!(moved.vecs, vec![vec![-1.0], vec![0.5]]);
    }

    #[test]
    fn opposite_vectors_at_the_fold_are_equivalent_via_flip() {
        let space = folded_line();
        let a = TangentClass::new(&space, "quot", vec![0.0], vec![1.0]).unwrap();
        let b = TangentClass::new(&space, "quot", vec![0.0], vec![-1.0]).unwrap();
        match equivalent_tangent(&space, &a, &b, 100).unwrap() {
            Equivalence::Equivalent { forward, backward } => {
                let chains = (forward.clone(), backward.clone());
                assert!(
                    chains == (vec!["flip".to_string()], vec![])
                        || chains == (vec![], vec!["flip".to_string()]),
                    "unexpected chains {chains:?}"
                );
                // Replay lands the two endpoints on the same representative.
                let left = replay_chain(&space, &a.to_tuple(), &forward).unwrap();
                let right = replay_chain(&space, &b.to_tuple(), &backward).unwrap();
                assert!(tuple_gap(&left, &right) <= REPLAY_TOL);
            }
            other => panic!("expected equivalence, got {other:?}"),
        }
    }

    #[test]
    fn aligned_and_opposed_pairs_at_the_fold_are_separated() {
        let space = folded_line();
        let zeta =
            TangentTuple::new(&space, "quot", vec![0.0], vec![vec![1.0], vec![1.0]]).unwrap();
        let eta =
            TangentTuple::new(&space, "quot", vec![0.0], vec![vec![1.0], vec![-1.0]]).unwrap();
        match equivalent_tuple(&space, &zeta, &eta, 1000).unwrap() {
            Equivalence::Separated {
                certificate,
                left,
                right,
            } => {
                assert_eq!(certificate, "fiber_sum_abs");
                assert!((left - 2.0).abs() < 1e-12);
                assert!(right.abs() < 1e-12);
            }
            other => panic!("expected separation, got {other:?}"),
        }
    }

    #[test]
    fn no_generators_and_no_certificates_yields_unknown() {
        let space = builtin_space("axis_cross").unwrap();
        let a = TangentClass::new(&space, "axis1", vec![0.0], vec![1.0]).unwrap();
        let b = TangentClass::new(&space, "axis2", vec![0.0], vec![1.0]).unwrap();
        match equivalent_tangent(&space, &a, &b, 100).unwrap() {
            Equivalence::Unknown { explored } => assert_eq!(explored, 0),
            other => panic!("expected unknown, got {other:?}"),
        }
    }

    #[test]
    fn constancy_suite_passes_on_the_folded_line() {
        let space = folded_line();
        let report = certificate_constancy(&space, 42).unwrap();
        assert!(report.pass, "constancy failed: {:?}", report.worst);
        assert_eq!(report.trials, CERT_REPS_PER_GENERATOR);
        assert!(report.max_residual <= 1e-12);
    }

    #[test]
    fn tuple_construction_validates_membership() {
        let space = folded_line();
        assert!(TangentTuple::new(&space, "quot", vec![2.0], vec![vec![1.0]]).is_err());
        assert!(TangentTuple::new(&space, "missing", vec![0.0], vec![vec![1.0]]).is_err());
        assert!(TangentTuple::new(&space, "quot", vec![0.0], vec![]).is_err());
        assert!(TangentTuple::new(&space, "quot", vec![0.0], vec![vec![1.0, 2.0]]).is_err());
    }
}
