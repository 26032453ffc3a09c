//! Structure-preserving doubling eigensolver for Bethe-Salpeter Hamiltonians
//! `H = [A, B; −B̄, −Ā]` with `A` Hermitian and `B` complex symmetric.

pub mod cayley;
pub mod cli;
pub mod dct;
pub mod doubling;
pub mod error;
pub mod extract;
pub mod matkernel;
pub mod oracle;
pub mod problem;
pub mod trirec;

pub use error::{Error, Result};
