//! `tanfold` — a toolkit for executable differential calculus built on
//! truncated multi-tag Taylor arithmetic ("jets").
//!
//! The crate has four layers:
//!
//! * **Jets and expressions** ([`jet`], [`expr`], [`map`], [`domain`]):
//!   exact forward-mode derivatives of any order via nilpotent tags, a small
//!   expression language with a canonical printer, and smooth maps on open
//!   boxes.
//! * **Tangent bundle combinators** ([`tangent`], [`axioms`]): the tangent
//!   functor and its structure maps (projection, zero section, fiber
//!   addition, order swap, vertical lift, scalar action) realized on
//!   euclidean opens, together with a randomized verification suite for the
//!   algebraic laws they satisfy — including a deliberately corrupted
//!   instance used as a negative control.
//! * **Cartan calculus** ([`cartan`]): vector fields with two independent
//!   Lie-bracket routes (a bundle-level construction and the classical
//!   coordinate formula), differential forms with wedge/d/contraction/Lie
//!   derivative, and the six graded commutation relations as executable
//!   properties.
//! * **Diffeological diagnostics** ([`diffeo`]): finitely presented smooth
//!   spaces (quotients, subsets with corners and cusps, rank-restricted
//!   diffeologies, matrix groups), tangent-class equivalence search with
//!   separation certificates, and probes that exhibit where the plot-wise
//!   tangent comparison map fails to be a bijection.
//!
//! Check suites are deterministic given a seed ([`rng`]) and report
//! normalized residuals ([`num`], [`report`]). Corpora of maps, fields,
//! forms, and spaces are parsed from a line-oriented text format
//! ([`corpus`]); finite-difference reference derivatives for tests live in
//! [`fdcheck`] and are never used by the evaluation engine itself.

pub mod axioms;
pub mod cartan;
pub mod corpus;
pub mod diffeo;
pub mod domain;
pub mod error;
pub mod expr;
pub mod fdcheck;
pub mod jet;
pub mod map;
pub mod num;
pub mod report;
pub mod rng;
pub mod tangent;

pub use error::{Error, Result};
pub use expr::Expr;
pub use jet::JetValue;
pub use map::{JetMap, SmoothMap};
pub use num::Tolerance;
pub use tangent::{Tan2, TanK, TanTk, TanVec};
