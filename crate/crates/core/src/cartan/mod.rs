//! Vector fields, differential forms, and the operator calculus on them.
//!
//! The module is split three ways:
//!
//! * [`field`]: vector fields and the two independent Lie-bracket routes —
//!   the double-bundle pipeline and the classical component formula.
//! * [`form`]: sparse differential forms with exterior product, exterior
//!   derivative, contraction, Lie derivative, and pullback.
//! * [`suite`]: the relation battery tying the operators together, from the
//!   six graded commutator identities to the cyclic bracket identity.

pub mod field;
pub mod form;
pub mod suite;

pub use field::{
    bracket_categorical, bracket_coordinate, bracket_kernel_defect, vf_add,
    vf_module_action, CategoricalBracket, VectorField, BRACKET_KERNEL_TOL,
};
pub use form::{
    exterior_d, form_add, form_scale, iota, lie_derivative, pullback, wedge,
    DifferentialForm, ScalarKernel,
};
pub use suite::{
    bracket_agreement, cartan_relation_suite, d_squared_symbolic, d_two_path_check,
    jacobi_check, BracketAgreement, BRACKET_AGREEMENT_TOL_POLY,
    BRACKET_AGREEMENT_TOL_TRANSC, D_TWO_PATH_TOL, JACOBI_TOL, RELATION_TOL,
};
