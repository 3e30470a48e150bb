//! Exact verification of Hadamard triples and certified spectrum synthesis
//! for self-affine measures.
//!
//! An expanding integer matrix R and digit set B define a self-affine
//! measure through the maps x -> R^{-1}(x + b). When a frequency set L makes
//! the associated exponential matrix unitary, the measure admits orthogonal
//! frequency sets, and this crate verifies, reduces, analyzes, decomposes
//! and certifies them with exact arithmetic wherever a verdict depends on it.
//!
//! Modules, bottom up:
//! - [`exact`]: rational matrices, Hermite/Smith forms, lattices, residues,
//!   the exact expansivity test
//! - [`cyclotomic`]: exact vanishing of sums of roots of unity
//! - [`triple`]: digit sets, Hadamard verification, conjugation, reduction
//! - [`measure`]: mask and Fourier transform evaluation with certified
//!   truncation error, attractor sampling
//! - [`dynamics`]: torus transition maps, periodic points, extreme cycles,
//!   zero-set probing, block normalization
//! - [`quasi`]: quasi-product structure detection and fiber analysis
//! - [`spectrum`]: candidate spectra and their certification
//! - [`cli`]: the command-line front end used by the `hs` binary

// Elimination and evaluation kernels index rows and columns the way the
// formulas do; iterator rewrites of those loops obscure the math.
#![allow(clippy::needless_range_loop)]

pub mod cli;
pub mod cyclotomic;
pub mod dynamics;
pub mod error;
pub mod exact;
pub mod measure;
pub mod quasi;
pub mod report;
pub mod spectrum;
pub mod triple;

pub use error::{Error, Result};
