//! Gradient maps of probability measures on the projective models
//! `RP^n ⊂ CP^n` under `SL(n+1)`, together with solvers that balance
//! measures, invert torus gradient maps and compute momentum polytopes,
//! and brute-force oracles that check them.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod abelian_solver;
pub mod convex_oracle;
pub mod error;
pub mod invariants;
mod linalg;
pub mod measures;
pub mod model_space;
pub mod nonabelian_solver;
pub mod report;
pub mod sampling;

pub use abelian_solver::{
    affine_component, integrated_kn, orbit_image_sample, polytope_P, solve_torus_target, solve_torus_target_with,
    torus_image, AffineComponent, KnEvaluation, KnOrder, TorusSolveOptions,
};
pub use convex_oracle::{
    bisect_balance_1d, dirac_attain, fd_check, fd_check_along, hull_build, hull_membership, min_norm_point, ConvexBody,
    Facet, HullMembership, Verdict,
};
pub use error::{Error, Result};
pub use linalg::C64;
pub use measures::{
    gradient_f, gradient_f_torus, in_w_class, isotropy_algebra_torus, pushforward, tv_norm_diff, DiscreteMeasure,
};
pub use model_space::{
    act, cartan_p_part, exp_p, kak_decompose, kempf_ness, momentum_a, momentum_p, morse_stratum, mu_beta, AElement,
    FieldKind, GroupElement, KakDecomposition, ModelSpace, MorseStratum, PElement, ProjectivePoint,
};
pub use nonabelian_solver::{
    balance, balance_with, f_nu, reduce_and_recenter, regularity_proxy, submersion_rank, BalanceOptions,
    BalanceSolution, ReductionKind, ReductionResult, RegularityReport,
};
pub use report::{SolveReport, SolveStatus, TraceEntry};
