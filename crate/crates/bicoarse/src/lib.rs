//! Exact computation in coarse group theory at desk scale.
//!
//! The crate revolves around the bi-invariant (cancellation) word metric
//! `d_×` on free groups and the constructions that live on top of it:
//!
//! - [`words`]: free-group word arithmetic over ranked ASCII alphabets;
//! - [`cancel`]: the cancellation length `|·|_×`, the metric `d_×`,
//!   geodesic certificates, and an independent brute-force oracle;
//! - [`moves`]: cancellation/addition moves on reduced words, the move-graph
//!   distance and cancellations-first geodesics;
//! - [`qmorph`]: quasimorphisms (counting, syllable, homomorphism) with
//!   exact rational values, finite-ball defect estimates, homogenization
//!   and controlledness moduli;
//! - [`transforms`]: replacement, wobbling and local substitution maps on
//!   free groups built from unique word decompositions;
//! - [`zmetric`]: word metrics on ℤ from infinite generating sets, and the
//!   pro-Q witness sequence construction;
//! - [`audit`]: a generic numerical auditor for coarse-group axioms over
//!   finite samples of a metered magma;
//! - [`lab`]: computational probes around the irrational-slope strip kernel
//!   of the rank-2 free group;
//! - [`cli`]: the `bicoarse` command-line frontend.
//!
//! Everything is exact: word lengths are integers, quasimorphism values are
//! rationals, no floating point is used anywhere.

pub mod audit;
pub mod cancel;
pub mod cli;
pub mod lab;
pub mod moves;
pub mod qmorph;
pub mod transforms;
pub mod zmetric;
pub mod words;

pub use num_rational::BigRational;
pub use words::{Alphabet, Letter, ReducedWord, Syllable, Word, WordError};
