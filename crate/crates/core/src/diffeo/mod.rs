//! Presented spaces beyond manifolds, and probes for where their tangent
//! data stops behaving like a manifold's.
//!
//! A space is *presented*: an ambient dimension, a decidable plot
//! predicate (constraints, a rank cap, a boundary-flatness condition), a
//! finite corpus of named generating plots, identification generators
//! between plot domains, and invariant certificates. Tangent data lives on
//! representatives — a plot, a base point in its domain, and one vector
//! (or a tuple of vectors) there — and two representatives name the same
//! tangent element exactly when a chain of generators carries one to the
//! other.
//!
//! On top of the presentations sit four probes, each reporting evidence
//! rather than bare booleans:
//!
//! * [`theta_surjectivity_probe`] searches a pinned polynomial family for
//!   a single plot realizing several tangent vectors at once, and
//!   [`constrained_candidate_rank_bound`] independently measures the rank
//!   every admissible candidate can carry at the base point.
//! * [`equivalent_tuple`] runs a bounded bidirectional search over
//!   generator chains, replaying any chain it finds and falling back to
//!   certificates to separate classes it cannot connect.
//! * [`half_line_tangent_probe`] tabulates derivative orders at boundary
//!   preimages and concludes a fiber dimension.
//! * [`retract_check`] verifies a section/retraction pair together with
//!   plot-level morphism conditions, and [`group_trivialization_check`]
//!   confirms that matrix multiplication trivializes the tangent fibers of
//!   the invertible matrices.

pub mod builtin;
pub mod classes;
pub mod group;
pub mod probes;
pub mod space;

pub use builtin::{builtin_space, parse_space_spec, BUILTIN_SPACES, GL_DET_SQ_MIN};
pub use classes::{
    apply_generator, certificate_constancy, equivalent_tangent, equivalent_tuple, replay_chain,
    Equivalence, TangentClass, TangentTuple, CERT_REPS_PER_GENERATOR, CERT_SEPARATION_TOL,
    CLASS_QUANTUM, REPLAY_TOL,
};
pub use group::{
    det_expr, group_trivialization_check, mat_mul_map, GROUP_UNIT_DET_MIN,
};
pub use probes::{
    constrained_candidate_rank_bound, half_line_tangent_probe, retract_check,
    theta_surjectivity_probe, HalfLineProbe, PlotDerivatives, ProbeFamily, ProbeOutcome,
    ProbeReport, RankBoundReport, RetractReport, WitnessPlot, COEFF_SNAP_TOL, PROBE_ACCEPT_TOL,
    RETRACT_TOL,
};
pub use space::{
    find_zero_preimages, CarrierNormal, CertificateKind, Constraint, DiffSpace, IdentGen,
    InvariantCertificate, NamedPlot, PlotCheck, PlotPredicate, CONSTRAINT_TOL, FLATNESS_TOL,
    IDENT_COMMUTE_TOL, MAX_PREIMAGES, PREIMAGE_MERGE_TOL, RANK_SV_TOL, ZERO_PREIMAGE_TOL,
};
