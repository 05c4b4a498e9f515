//! Rate-distortion-equivocation analysis for the two-agent remote source
//! coding problem with an eavesdropper.
//!
//! Two agents observe noisy versions `Y1`, `Y2` of a hidden source `X` and
//! send compressed messages over rate-limited links to a decoder that must
//! reconstruct `X` within a distortion budget, while an eavesdropper with
//! side information `E` taps one of the links. The objects of interest are
//! tuples `(R1, R2, Δ1, Δ2, D)` of link rates, per-link equivocation rates,
//! and decoder distortion.
//!
//! The crate provides:
//!
//! * [`prob`] — a small finite-alphabet probability engine (pmfs, factorized
//!   joints, entropies and mutual informations in bits),
//! * [`regions`] — exact evaluators of the achievable (inner) and converse
//!   (outer) bound constraint sets for a fixed auxiliary-channel choice,
//!   corner points for the six decoding orders, and rate-split checks,
//! * [`search`] — randomized search over auxiliary channels that traces
//!   Pareto frontiers and tests outer-region membership,
//! * [`gaussian`] — closed-form quadratic-Gaussian regions with and without
//!   eavesdropper side information,
//! * [`codesim`] — a desk-scale simulation of the superposition/binning
//!   achievability scheme with exact equivocation accounting,
//! * [`special`] — reduced settings (an agent observing the source directly)
//!   used both as features and as oracles for the general machinery,
//! * [`source_file`] — the JSON source-description format used by the CLI.
//!
//! All rates and entropies are in bits (base-2 logarithms), including the
//! Gaussian differential entropies. The zero-probability convention is
//! `0 · log(1/0) = 0`.

pub mod codesim;
pub mod error;
pub mod gaussian;
pub mod prob;
pub mod regions;
pub mod search;
pub mod source_file;
pub mod special;

pub use error::Error;
pub use prob::{chain_join, CondPmf, JointDist, Pmf, SourceSpec, Var};
pub use regions::{AuxConfig, BoundEval, CornerPoint, RegionPoint};

/// Normalization tolerance for pmfs and joint tables.
pub const PMF_TOL: f64 = 1e-12;
/// Tolerance for information-theoretic identities (chain rule, etc.).
pub const INFO_TOL: f64 = 1e-10;
/// Tolerance below which a conditional mutual information certifies a
/// Markov separation.
pub const MARKOV_TOL: f64 = 1e-9;

pub(crate) type Result<T> = std::result::Result<T, Error>;
