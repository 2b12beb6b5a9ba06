//! Compilers that turn mappings `E : S^n -> S^n` into in-situ programs, that is
//! sequences of single-component assignments using no memory beyond the
//! input vector, together with the network view of those programs as routings
//! of concatenated butterfly networks.
//!
//! Symbols are identified with `0..s` and vectors with their index
//! `x_1 + s*x_2 + ... + s^(n-1)*x_n`. Components are numbered from zero in
//! the API; textual forms (signatures, program files) number them from one.
//!
//! Module map:
//!
//! * [`program`]: alphabets, mappings, assignments and in-situ programs.
//! * [`benes`]: bijections in `2n-1` assignments (`1..n..1`).
//! * [`factor`]: general mappings in `5n-4` and `4n-3` assignments.
//! * [`blockseq`]: the flexible boolean `4n-3` method built on block-sequences.
//! * [`linmod`]: linear mappings over `Z/sZ` as products of assignment matrices.
//! * [`minsim`]: multistage interconnection networks and routing verification.
//! * [`oracle`]: breadth-first minimal length search and exhaustive suites.

pub mod benes;
pub mod blockseq;
pub mod error;
pub mod factor;
pub mod linmod;
pub mod minsim;
pub mod oracle;
pub mod program;
pub mod random;

pub use error::{Error, Result};
pub use program::{Alphabet, Assignment, InSituProgram, Mapping, Payload};
