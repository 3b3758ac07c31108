//! Numerical toolkit for rapid decay and contractive multipliers on reduced
//! group C*-algebras.
//!
//! The crate works with the group ring `C[G]` of a few built-in groups (free,
//! free abelian, cyclic) acting on `l^2(G)` by left convolution, and provides:
//!
//! * word lengths, ball enumeration and normal forms ([`group`]);
//! * conditional-negativity and positive-definiteness certificates for length
//!   kernels, plus closed-form decay suprema ([`kernel`]);
//! * Sobolev norms and certified brackets for the reduced operator norm
//!   ([`ring`], [`operators`]);
//! * heat multipliers, their truncations and the rescaling that makes them
//!   finite-rank contractions ([`multiplier`]);
//! * sweeps showing the rescaled multipliers converge to the identity
//!   ([`harness`]).
//!
//! ```
//! use rdmap::{builtin_rd_params, opnorm_bracket, Group, GroupRingElement, PowerOptions};
//!
//! let g = Group::free(2)?;
//! let f = GroupRingElement::generator_sum(g);
//! let bracket = opnorm_bracket(&f, &builtin_rd_params(&g), &PowerOptions::with_radius(5))?;
//! let kesten = 2.0 * 3f64.sqrt();
//! assert!(bracket.lower <= kesten && kesten <= bracket.upper);
//! # Ok::<(), rdmap::Error>(())
//! ```

pub mod error;
pub mod group;
pub mod harness;
pub mod kernel;
pub mod multiplier;
pub mod operators;
pub mod ring;
pub mod sample;

pub use error::{Error, Result};
pub use group::{Element, Group, DEFAULT_BALL_CAP};
pub use harness::{run_grid, select_epsilon, ConvergenceRow, GridOptions, GridSchedule, NRule};
pub use kernel::{
    cn_check, cn_check_matrix, decay_certificate, psd_check, schoenberg_kernel, CnVerdict,
    DecayCertificate, KernelMatrix, PsdVerdict,
};
pub use multiplier::{
    certified_scale, lemma_norm_bound, map_defect, scaled_multiplier, tail_bound, DefectReport,
    Multiplier, MultiplierNormBound, RankBound,
};
pub use num_complex::Complex64;
pub use operators::{
    builtin_rd_params, compression_matrix, opnorm_bracket, opnorm_lower, opnorm_upper,
    CompressionMatrix, LowerBound, NormBracket, PowerOptions, RdParams,
};
pub use ring::GroupRingElement;

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
mod readme {}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/groups.md")]
    mod groups {}
    #[doc = include_str!("../../../book/src/kernels.md")]
    mod kernels {}
    #[doc = include_str!("../../../book/src/norms.md")]
    mod norms {}
    #[doc = include_str!("../../../book/src/multipliers.md")]
    mod multipliers {}
    #[doc = include_str!("../../../book/src/convergence.md")]
    mod convergence {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
