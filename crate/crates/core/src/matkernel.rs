//! Dense complex matrix kernel on top of `faer`.
//!
//! Every inverse that appears in the algorithm goes through [`Lu`], so the
//! singularity threshold and the condition estimate are decided in one place.

use std::ops::Deref;

use faer::linalg::solvers::{DenseSolveCore, Solve};
use faer::{Mat, Par, Side};

use crate::error::{Error, Result};

pub use faer::c64;

pub type CMatrix = Mat<c64>;

/// Default relative tolerance for the Hermitian / symmetric views.
pub const STRUCTURE_TOL: f64 = 1e-12;

/// A pivot below this fraction of `‖M‖_F` is treated as zero.
pub const PIVOT_TOL: f64 = 1e-14;

/// Cap kernel parallelism. `0` or `1` means sequential (bit-stable).
pub fn set_threads(n: usize) {
    let par = if n <= 1 {
        Par::Seq
    } else {
        Par::rayon(n)
    };
    faer::set_global_parallelism(par);
}

pub fn identity(n: usize) -> CMatrix {
    Mat::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> CMatrix {
    Mat::zeros(rows, cols)
}

pub fn from_real(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> CMatrix {
    Mat::from_fn(rows, cols, |i, j| c64::new(f(i, j), 0.0))
}

pub fn conj(m: &CMatrix) -> CMatrix {
    m.conjugate().to_owned()
}

pub fn transpose(m: &CMatrix) -> CMatrix {
    m.transpose().to_owned()
}

pub fn adjoint(m: &CMatrix) -> CMatrix {
    m.adjoint().to_owned()
}

pub fn scale(m: &CMatrix, s: c64) -> CMatrix {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * s)
}

pub fn fro(m: &CMatrix) -> f64 {
    m.norm_l2()
}

/// Induced 1-norm (maximum absolute column sum).
pub fn norm1(m: &CMatrix) -> f64 {
    (0..m.ncols())
        .map(|j| m.col(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn is_finite(m: &CMatrix) -> bool {
    (0..m.ncols()).all(|j| m.col(j).iter().all(|z| z.re.is_finite() && z.im.is_finite()))
}

pub fn check_finite(m: &CMatrix) -> Result<()> {
    if is_finite(m) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

fn check_square(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::DimensionMismatch(format!(
            "expected a nonempty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

/// `‖M − Mᴴ‖_F`
pub fn herm_defect(m: &CMatrix) -> f64 {
    (m - m.adjoint()).norm_l2()
}

/// `‖M − Mᵀ‖_F`
pub fn sym_defect(m: &CMatrix) -> f64 {
    (m - m.transpose()).norm_l2()
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| {
        (m[(i, j)] + m[(j, i)].conj()) * 0.5
    })
}

pub fn symmetric_part(m: &CMatrix) -> CMatrix {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| (m[(i, j)] + m[(j, i)]) * 0.5)
}

fn relative(defect: f64, norm: f64) -> f64 {
    if norm == 0.0 {
        defect
    } else {
        defect / norm
    }
}

/// Square matrix stored exactly Hermitian.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianView(CMatrix);

impl HermitianView {
    /// Validate `‖M − Mᴴ‖_F ≤ tol·‖M‖_F`, then store `(M + Mᴴ)/2`.
    pub fn new(m: CMatrix, tol: f64) -> Result<Self> {
        check_square(&m)?;
        check_finite(&m)?;
        let defect = relative(herm_defect(&m), fro(&m));
        if defect > tol {
            return Err(Error::StructureViolation {
                what: "matrix is not Hermitian",
                defect,
                tol,
            });
        }
        Ok(HermitianView(hermitian_part(&m)))
    }

    /// Symmetrize unconditionally and return the relative defect that was removed.
    pub fn enforce(m: &CMatrix) -> (Self, f64) {
        let defect = relative(herm_defect(m), fro(m));
        (HermitianView(hermitian_part(m)), defect)
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn into_inner(self) -> CMatrix {
        self.0
    }
}

impl Deref for HermitianView {
    type Target = CMatrix;

    fn deref(&self) -> &CMatrix {
        &self.0
    }
}

/// Square matrix stored exactly complex symmetric.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricView(CMatrix);

impl SymmetricView {
    /// Validate `‖M − Mᵀ‖_F ≤ tol·‖M‖_F`, then store `(M + Mᵀ)/2`.
    pub fn new(m: CMatrix, tol: f64) -> Result<Self> {
        check_square(&m)?;
        check_finite(&m)?;
        let defect = relative(sym_defect(&m), fro(&m));
        if defect > tol {
            return Err(Error::StructureViolation {
                what: "matrix is not symmetric",
                defect,
                tol,
            });
        }
        Ok(SymmetricView(symmetric_part(&m)))
    }

    pub fn enforce(m: &CMatrix) -> (Self, f64) {
        let defect = relative(sym_defect(m), fro(m));
        (SymmetricView(symmetric_part(m)), defect)
    }

    pub fn zeros(n: usize) -> Self {
        SymmetricView(zeros(n, n))
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn into_inner(self) -> CMatrix {
        self.0
    }
}

impl Deref for SymmetricView {
    type Target = CMatrix;

    fn deref(&self) -> &CMatrix {
        &self.0
    }
}

/// Partial-pivoting LU with a relative pivot threshold.
pub struct Lu {
    lu: faer::linalg::solvers::PartialPivLu<c64>,
    n: usize,
}

impl Lu {
    pub fn new(m: &CMatrix) -> Result<Self> {
        Self::with_scale(m, fro(m))
    }

    /// Like [`Lu::new`], but pivots are compared against `PIVOT_TOL·scale`. Use
    /// when `m` is a difference of larger terms and `‖m‖_F` hides cancellation.
    pub fn with_scale(m: &CMatrix, scale: f64) -> Result<Self> {
        check_square(m)?;
        check_finite(m)?;
        let lu = m.partial_piv_lu();
        let u = lu.U();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..u.nrows() {
            let p = u[(i, i)].norm();
            lo = lo.min(p);
            hi = hi.max(p);
        }
        if lo.is_nan() || lo <= PIVOT_TOL * scale {
            let rcond = if hi > 0.0 { lo / hi } else { 0.0 };
            return Err(Error::SingularMatrix { rcond });
        }
        Ok(Lu { lu, n: m.nrows() })
    }

    pub fn solve(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(rhs.nrows(), self.n, "right-hand side has wrong row count");
        self.lu.solve(rhs)
    }

    pub fn inverse(&self) -> CMatrix {
        self.lu.inverse()
    }
}

/// `M⁻¹` together with the exact 1-norm condition number `‖M‖₁‖M⁻¹‖₁`.
pub fn inverse_with_cond(m: &CMatrix) -> Result<(CMatrix, f64)> {
    let inv = Lu::new(m)?.inverse();
    let cond = norm1(m) * norm1(&inv);
    if !cond.is_finite() {
        return Err(Error::SingularMatrix { rcond: 0.0 });
    }
    Ok((inv, cond))
}

pub fn solve_linear(m: &CMatrix, rhs: &CMatrix) -> Result<CMatrix> {
    if rhs.nrows() != m.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "matrix has order {} but right-hand side has {} rows",
            m.nrows(),
            rhs.nrows()
        )));
    }
    check_finite(rhs)?;
    Ok(Lu::new(m)?.solve(rhs))
}

/// Singular values in nonincreasing order.
pub fn singular_values(m: &CMatrix) -> Result<Vec<f64>> {
    check_finite(m)?;
    let mut s = m.singular_values().map_err(|_| Error::NoConvergence)?;
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// `σ_max / σ_min`, infinite for a singular matrix.
pub fn cond_estimate(m: &CMatrix) -> Result<f64> {
    check_square(m)?;
    let s = singular_values(m)?;
    let (hi, lo) = (s[0], s[s.len() - 1]);
    if lo == 0.0 {
        Ok(f64::INFINITY)
    } else {
        Ok(hi / lo)
    }
}

pub fn eigenvalues(m: &CMatrix) -> Result<Vec<c64>> {
    check_square(m)?;
    check_finite(m)?;
    m.eigenvalues().map_err(|_| Error::NoConvergence)
}

/// Scale each nonzero column to unit 2-norm.
pub fn normalize_columns(v: &mut CMatrix) {
    for j in 0..v.ncols() {
        let nrm = v.col(j).norm_l2();
        if nrm > 0.0 {
            for i in 0..v.nrows() {
                v[(i, j)] /= nrm;
            }
        }
    }
}

/// Eigenvalues and unit-norm right eigenvectors.
pub fn eig_right(m: &CMatrix) -> Result<(Vec<c64>, CMatrix)> {
    check_square(m)?;
    check_finite(m)?;
    let evd = m.eigen().map_err(|_| Error::NoConvergence)?;
    let values: Vec<c64> = evd.S().column_vector().iter().copied().collect();
    let mut right = evd.U().to_owned();
    normalize_columns(&mut right);
    Ok((values, right))
}

#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub values: Vec<c64>,
    /// Unit-norm columns with `M v = λ v`.
    pub right: CMatrix,
    /// Unit-norm columns with `yᴴ M = λ yᴴ`.
    pub left: CMatrix,
}

/// Full eigendecomposition. Left vectors come from the eigenvectors of `Mᴴ`,
/// matched to `conj(λ)` by greedy nearest pairing.
pub fn dense_eig(m: &CMatrix) -> Result<EigenDecomposition> {
    let (values, right) = eig_right(m)?;
    let (adj_values, adj_vectors) = eig_right(&adjoint(m))?;
    let targets: Vec<c64> = values.iter().map(|z| z.conj()).collect();
    let order = greedy_match(&targets, &adj_values)?;
    let left = Mat::from_fn(m.nrows(), m.ncols(), |i, j| adj_vectors[(i, order[j])]);
    Ok(EigenDecomposition {
        values,
        right,
        left,
    })
}

/// Eigenvalues of a Hermitian matrix, nondecreasing.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Result<Vec<f64>> {
    check_square(m)?;
    check_finite(m)?;
    m.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| Error::NoConvergence)
}

/// Generalized eigenpairs of `A x = λ B x`. An eigenvalue with zero `β` is
/// returned as an infinite value.
pub fn generalized_eig(a: &CMatrix, b: &CMatrix) -> Result<(Vec<c64>, CMatrix)> {
    check_square(a)?;
    check_square(b)?;
    if a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch(
            "pencil matrices differ in order".into(),
        ));
    }
    check_finite(a)?;
    check_finite(b)?;
    if a.nrows() == 1 {
        // faer's QZ workspace query undersizes the 1×1 case.
        let (x, y) = (a[(0, 0)], b[(0, 0)]);
        let value = if y == c64::new(0.0, 0.0) { c64::new(f64::INFINITY, 0.0) } else { x / y };
        return Ok((vec![value], identity(1)));
    }
    let gevd = a.generalized_eigen(b).map_err(|_| Error::NoConvergence)?;
    let sa = gevd.S_a().column_vector();
    let sb = gevd.S_b().column_vector();
    let values = sa
        .iter()
        .zip(sb.iter())
        .map(|(&x, &y)| {
            if y == c64::new(0.0, 0.0) {
                c64::new(f64::INFINITY, 0.0)
            } else {
                x / y
            }
        })
        .collect();
    let mut vectors = gevd.U().to_owned();
    normalize_columns(&mut vectors);
    Ok((values, vectors))
}

pub fn generalized_eigenvalues(a: &CMatrix, b: &CMatrix) -> Result<Vec<c64>> {
    generalized_eig(a, b).map(|(v, _)| v)
}

/// For each reference value, the index of the nearest not-yet-used candidate.
/// Ties go to the lower candidate index.
pub fn greedy_match(reference: &[c64], candidates: &[c64]) -> Result<Vec<usize>> {
    if reference.len() != candidates.len() {
        return Err(Error::MatchFailure {
            left: reference.len(),
            right: candidates.len(),
        });
    }
    let mut used = vec![false; candidates.len()];
    let mut out = Vec::with_capacity(reference.len());
    for r in reference {
        let mut best: Option<(usize, f64)> = None;
        for (j, c) in candidates.iter().enumerate() {
            if used[j] {
                continue;
            }
            let d = (r - c).norm();
            let d = if d.is_nan() { f64::INFINITY } else { d };
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        let (j, _) = best.expect("lengths checked above");
        used[j] = true;
        out.push(j);
    }
    Ok(out)
}
