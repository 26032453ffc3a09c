//! Problem definition `H = [A, B; −B̄, −Ā]`, generators and file I/O.

pub mod fixtures;
mod generate;
mod mtx;

pub use generate::{generate, GeneratorKind, GeneratorSpec};
pub use mtx::{load_mtx, read_mtx, save_mtx, write_mtx, MtxFile};

use crate::error::{Error, Result};
use crate::matkernel::{self, c64, CMatrix, HermitianView, SymmetricView};

/// Dense Bethe-Salpeter Hamiltonian held as its two `n×n` blocks.
#[derive(Clone, Debug)]
pub struct BseHamiltonian {
    a: HermitianView,
    b: SymmetricView,
    /// Relative Hermitian defect of the raw `A` and symmetric defect of the raw `B`.
    pub defects: (f64, f64),
}

/// Check `Aᴴ = A`, `Bᵀ = B` within `tol` (relative Frobenius) and store the
/// symmetrized blocks.
pub fn validate(a: CMatrix, b: CMatrix, tol: f64) -> Result<BseHamiltonian> {
    if a.nrows() != a.ncols() || b.nrows() != b.ncols() || a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "A is {}x{}, B is {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    let da = matkernel::herm_defect(&a) / matkernel::fro(&a).max(f64::MIN_POSITIVE);
    let db = matkernel::sym_defect(&b) / matkernel::fro(&b).max(f64::MIN_POSITIVE);
    let a = HermitianView::new(a, tol).map_err(|e| rename(e, "A is not Hermitian"))?;
    let b = SymmetricView::new(b, tol).map_err(|e| rename(e, "B is not symmetric"))?;
    Ok(BseHamiltonian {
        a,
        b,
        defects: (da, db),
    })
}

fn rename(e: Error, what: &'static str) -> Error {
    match e {
        Error::StructureViolation { defect, tol, .. } => Error::StructureViolation { what, defect, tol },
        other => other,
    }
}

impl BseHamiltonian {
    pub fn n(&self) -> usize {
        self.a.n()
    }

    pub fn a(&self) -> &HermitianView {
        &self.a
    }

    pub fn b(&self) -> &SymmetricView {
        &self.b
    }

    /// `‖H‖_F = √(2‖A‖² + 2‖B‖²)` without assembling `H`.
    pub fn h_fro(&self) -> f64 {
        let (na, nb) = (matkernel::fro(&self.a), matkernel::fro(&self.b));
        (2.0 * (na * na + nb * nb)).sqrt()
    }

    /// The `2n×2n` matrix `[A, B; −B̄, −Ā]`.
    pub fn assemble_full(&self) -> CMatrix {
        let n = self.n();
        let (a, b) = (&*self.a, &*self.b);
        CMatrix::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
            (true, true) => a[(i, j)],
            (true, false) => b[(i, j - n)],
            (false, true) => -b[(i - n, j)].conj(),
            (false, false) => -a[(i - n, j - n)].conj(),
        })
    }

    /// `[A, B; B̄, Ā]`, the left matrix of the pencil `(ΓH, Γ)`.
    pub fn assemble_gamma_h(&self) -> CMatrix {
        let n = self.n();
        let (a, b) = (&*self.a, &*self.b);
        CMatrix::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
            (true, true) => a[(i, j)],
            (true, false) => b[(i, j - n)],
            (false, true) => b[(i - n, j)].conj(),
            (false, false) => a[(i - n, j - n)].conj(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Structure {
    /// `[0 I; −I 0]`
    J,
    /// `[I 0; 0 −I]`
    Gamma,
    /// `[0 I; I 0]`
    Pi,
}

pub fn structure_matrix(n: usize, which: Structure) -> CMatrix {
    let one = c64::new(1.0, 0.0);
    let zero = c64::new(0.0, 0.0);
    CMatrix::from_fn(2 * n, 2 * n, |i, j| match which {
        Structure::J if j == i + n => one,
        Structure::J if i == j + n => -one,
        Structure::Gamma if i == j => {
            if i < n {
                one
            } else {
                -one
            }
        }
        Structure::Pi if j == i + n || i == j + n => one,
        _ => zero,
    })
}

/// `Π X`: swap the two block rows of a `2n×m` matrix.
pub fn apply_pi(x: &CMatrix) -> CMatrix {
    let n = x.nrows() / 2;
    CMatrix::from_fn(x.nrows(), x.ncols(), |i, j| x[((i + n) % (2 * n), j)])
}

/// `Γ X`: negate the lower block row of a `2n×m` matrix.
pub fn apply_gamma(x: &CMatrix) -> CMatrix {
    let n = x.nrows() / 2;
    CMatrix::from_fn(x.nrows(), x.ncols(), |i, j| if i < n { x[(i, j)] } else { -x[(i, j)] })
}
