//! Shift selection and the initial symplectic pair in first standard form.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matkernel::{self, c64, CMatrix, HermitianView, Lu, SymmetricView};
use crate::problem::{structure_matrix, BseHamiltonian, Structure};

pub const DEFAULT_RHO: f64 = std::f64::consts::SQRT_2;

/// Relative margin that turns the strict lower bound on α into a safe value.
pub const ALPHA_NUDGE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ShiftMode {
    Auto,
    User,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ShiftSelection {
    pub alpha: f64,
    pub rho: f64,
    pub mode: ShiftMode,
}

/// `ρ‖H‖_F + ‖B‖_F / (2(ρ − 1))`: any α above this gives a well-defined pair
/// with `‖F₀‖₂ < 1`.
pub fn shift_bound(p: &BseHamiltonian, rho: f64) -> f64 {
    rho * p.h_fro() + matkernel::fro(p.b()) / (2.0 * (rho - 1.0))
}

pub fn select_alpha(p: &BseHamiltonian, rho: f64, override_alpha: Option<f64>) -> Result<ShiftSelection> {
    if let Some(alpha) = override_alpha {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::NonPositive { what: "alpha", value: alpha });
        }
        return Ok(ShiftSelection {
            alpha,
            rho,
            mode: ShiftMode::User,
        });
    }
    if !rho.is_finite() || rho <= 1.0 {
        return Err(Error::InvalidRho(rho));
    }
    Ok(ShiftSelection {
        alpha: shift_bound(p, rho) * (1.0 + ALPHA_NUDGE),
        rho,
        mode: ShiftMode::Auto,
    })
}

/// `λ ↦ (λ + α)/(λ − α)`
pub fn cayley(lambda: c64, alpha: f64) -> c64 {
    (lambda + alpha) / (lambda - alpha)
}

/// Inverse of [`cayley`]: `ν ↦ α(ν + 1)/(ν − 1)`.
pub fn inverse_cayley(nu: c64, alpha: f64) -> c64 {
    (nu + 1.0) / (nu - 1.0) * alpha
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PairEvent {
    DoublingStep,
    DctApplied,
    TriRecSwitch,
}

/// The pair `M = [E, 0; F, I]`, `L = [I, F̄; 0, Ē]`.
#[derive(Clone, Debug)]
pub struct SsfPair {
    pub e: HermitianView,
    pub f: SymmetricView,
    pub alpha: f64,
    /// Number of squarings applied since the pair was built.
    pub k: u32,
    pub events: Vec<PairEvent>,
    /// Relative Hermitian / symmetric defects removed when the pair was last formed.
    pub defects: (f64, f64),
}

impl SsfPair {
    pub fn from_parts(e: &CMatrix, f: &CMatrix, alpha: f64, k: u32) -> Self {
        let (e, de) = HermitianView::enforce(e);
        let (f, df) = SymmetricView::enforce(f);
        SsfPair {
            e,
            f,
            alpha,
            k,
            events: Vec::new(),
            defects: (de, df),
        }
    }

    pub fn n(&self) -> usize {
        self.e.n()
    }

    pub fn m_matrix(&self) -> CMatrix {
        let n = self.n();
        let (e, f) = (&*self.e, &*self.f);
        CMatrix::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
            (true, true) => e[(i, j)],
            (true, false) => c64::new(0.0, 0.0),
            (false, true) => f[(i - n, j)],
            (false, false) => c64::new(if i == j { 1.0 } else { 0.0 }, 0.0),
        })
    }

    pub fn l_matrix(&self) -> CMatrix {
        let n = self.n();
        let (e, f) = (&*self.e, &*self.f);
        CMatrix::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
            (true, true) => c64::new(if i == j { 1.0 } else { 0.0 }, 0.0),
            (true, false) => f[(i, j - n)].conj(),
            (false, true) => c64::new(0.0, 0.0),
            (false, false) => e[(i - n, j - n)].conj(),
        })
    }

    /// Generalized eigenvalues of `(M, L)`.
    pub fn pencil_eigenvalues(&self) -> Result<Vec<c64>> {
        matkernel::generalized_eigenvalues(&self.m_matrix(), &self.l_matrix())
    }
}

/// `E = I − 2α R̄⁻¹(αI − A)⁻¹`, `F = −2α X̄ R̄⁻¹(αI − A)⁻¹` with
/// `X = (αI − A)⁻¹B` and `R̄ = I − X X̄`.
pub fn build_ssf1(p: &BseHamiltonian, alpha: f64) -> Result<SsfPair> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::NonPositive { what: "alpha", value: alpha });
    }
    let n = p.n();
    let eye = matkernel::identity(n);
    let shifted = matkernel::scale(&eye, c64::new(alpha, 0.0)) - &**p.a();
    let y = Lu::new(&shifted)
        .map_err(|_| Error::ShiftHitsSpectrum { alpha })?
        .inverse();
    let x = &y * &**p.b();
    let x_bar = matkernel::conj(&x);
    let r_bar = &eye - &x * &x_bar;
    let t = Lu::new(&r_bar)
        .map_err(|_| Error::RSingular { alpha })?
        .solve(&y);
    let two_alpha = c64::new(2.0 * alpha, 0.0);
    let e = &eye - matkernel::scale(&t, two_alpha);
    let f = matkernel::scale(&(&x_bar * &t), -two_alpha);
    // E is singular exactly when α is an eigenvalue of H.
    let scale = (n as f64).sqrt() + 2.0 * alpha * matkernel::fro(&t);
    Lu::with_scale(&e, scale).map_err(|_| Error::ShiftHitsSpectrum { alpha })?;
    Ok(SsfPair::from_parts(&e, &f, alpha, 0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Ssf1Diagnostics {
    /// `‖MJMᵀ − LJLᵀ‖_F`
    pub symplectic_defect: f64,
    /// `max |(E − Eᴴ)/2|`
    pub herm_defect: f64,
    /// `max |(F − Fᵀ)/2|`
    pub symm_defect: f64,
}

pub fn verify_ssf1(pair: &SsfPair) -> Ssf1Diagnostics {
    verify_raw(&pair.e, &pair.f)
}

/// Diagnostics for an arbitrary `(E, F)`, without symmetrizing first.
pub fn verify_raw(e: &CMatrix, f: &CMatrix) -> Ssf1Diagnostics {
    let n = e.nrows();
    let zero = c64::new(0.0, 0.0);
    let one = c64::new(1.0, 0.0);
    let m = CMatrix::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
        (true, true) => e[(i, j)],
        (true, false) => zero,
        (false, true) => f[(i - n, j)],
        (false, false) => if i == j { one } else { zero },
    });
    let l = CMatrix::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
        (true, true) => if i == j { one } else { zero },
        (true, false) => f[(i, j - n)].conj(),
        (false, true) => zero,
        (false, false) => e[(i - n, j - n)].conj(),
    });
    let j = structure_matrix(n, Structure::J);
    let lhs = &m * &j * m.transpose();
    let rhs = &l * &j * l.transpose();
    let half_max = |d: CMatrix| d.norm_max() * 0.5;
    Ssf1Diagnostics {
        symplectic_defect: (lhs - rhs).norm_l2(),
        herm_defect: half_max(e - e.adjoint()),
        symm_defect: half_max(f - f.transpose()),
    }
}
