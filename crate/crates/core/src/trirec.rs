//! Three-recursion form of the doubling iteration, used after a breakdown of
//! the two-recursion form. The pencil is `M = [P, 0; H, I]`, `L = [I, G; 0, Pᵀ]`
//! obtained from the pair by the congruence `[I, 0; Z, I]` with `Z` symmetric.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::cayley::SsfPair;
use crate::error::{Error, Result};
use crate::matkernel::{self, c64, CMatrix, SymmetricView};

/// Random `Z` draws before giving up on an ill-conditioned `I + F̄Z`.
pub const MAX_Z_DRAWS: usize = 5;

#[derive(Clone, Debug)]
pub struct TriState {
    pub p: CMatrix,
    pub g: SymmetricView,
    pub h: SymmetricView,
    /// Sum of all `Z` applied so far.
    pub z_total: SymmetricView,
    /// Three-recursion steps taken.
    pub j: u32,
    pub alpha: f64,
    rebased: Option<u32>,
}

impl TriState {
    pub fn n(&self) -> usize {
        self.p.nrows()
    }

    pub fn rebased_at(&self, k: u32) -> bool {
        self.rebased == Some(k)
    }

    pub fn mark_rebased(&mut self, k: u32) {
        self.rebased = Some(k);
    }

    pub fn m_matrix(&self) -> CMatrix {
        let n = self.n();
        CMatrix::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
            (true, true) => self.p[(i, j)],
            (true, false) => c64::new(0.0, 0.0),
            (false, true) => self.h[(i - n, j)],
            (false, false) => c64::new(if i == j { 1.0 } else { 0.0 }, 0.0),
        })
    }

    pub fn l_matrix(&self) -> CMatrix {
        let n = self.n();
        CMatrix::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
            (true, true) => c64::new(if i == j { 1.0 } else { 0.0 }, 0.0),
            (true, false) => self.g[(i, j - n)],
            (false, true) => c64::new(0.0, 0.0),
            (false, false) => self.p[(j - n, i - n)],
        })
    }

    pub fn pencil_eigenvalues(&self) -> Result<Vec<c64>> {
        matkernel::generalized_eigenvalues(&self.m_matrix(), &self.l_matrix())
    }
}

/// Complex symmetric matrix with Gaussian entries, scaled to `‖Z‖_F = scale`.
pub fn random_symmetric<R: Rng + ?Sized>(n: usize, scale: f64, rng: &mut R) -> SymmetricView {
    let mut z = matkernel::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = c64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            z[(i, j)] = v;
            z[(j, i)] = v;
        }
    }
    let norm = matkernel::fro(&z);
    if norm > 0.0 {
        z = matkernel::scale(&z, c64::new(scale / norm, 0.0));
    }
    SymmetricView::enforce(&z).0
}

/// Factor `I + XZ` and reject it when its condition exceeds `1/u`.
fn guarded_inverse(x: &CMatrix, z: &CMatrix, u: f64) -> Result<CMatrix> {
    let k = matkernel::identity(x.nrows()) + x * z;
    match matkernel::inverse_with_cond(&k) {
        Ok((inv, cond)) if cond <= 1.0 / u => Ok(inv),
        _ => Err(Error::ZIllConditioned),
    }
}

/// `P = (I + F̄Z)⁻¹E`, `G = (I + F̄Z)⁻¹F̄`, `H = (F + Z) − ĒZ(I + F̄Z)⁻¹E`.
pub fn init_three(pair: &SsfPair, z: &SymmetricView, u: f64) -> Result<TriState> {
    let e: &CMatrix = &pair.e;
    let f_bar = matkernel::conj(&pair.f);
    let e_bar = matkernel::conj(e);
    let k_inv = guarded_inverse(&f_bar, z, u)?;
    let p = &k_inv * e;
    let g = &k_inv * &f_bar;
    let h = &*pair.f + &**z - &e_bar * &**z * &p;
    Ok(TriState {
        p,
        g: SymmetricView::enforce(&g).0,
        h: SymmetricView::enforce(&h).0,
        z_total: z.clone(),
        j: 0,
        alpha: pair.alpha,
        rebased: None,
    })
}

/// `P' = P(I − GH)⁻¹P`, `G' = G + P(I − GH)⁻¹GPᵀ`, `H' = H + PᵀH(I − GH)⁻¹P`.
pub fn three_step(s: &TriState, u: f64) -> Result<TriState> {
    let n = s.n();
    let kernel = matkernel::identity(n) - &*s.g * &*s.h;
    let w = match matkernel::inverse_with_cond(&kernel) {
        Ok((w, cond)) if cond <= 1.0 / u => w,
        Ok((_, cond)) => return Err(Error::TriBreakdown { cond }),
        Err(_) => return Err(Error::TriBreakdown { cond: f64::INFINITY }),
    };
    let p_t = matkernel::transpose(&s.p);
    let wp = &w * &s.p;
    let p = &s.p * &wp;
    let g = &*s.g + &s.p * &w * &*s.g * &p_t;
    let h = &*s.h + &p_t * &*s.h * &wp;
    let next = TriState {
        p,
        g: SymmetricView::enforce(&g).0,
        h: SymmetricView::enforce(&h).0,
        z_total: s.z_total.clone(),
        j: s.j + 1,
        alpha: s.alpha,
        rebased: s.rebased,
    };
    matkernel::check_finite(&next.p)?;
    Ok(next)
}

/// Apply a further congruence by `Z̃`:
/// `P̃ = (I + GZ̃)⁻¹P`, `G̃ = (I + GZ̃)⁻¹G`, `H̃ = (H + Z̃) − PᵀZ̃(I + GZ̃)⁻¹P`.
pub fn rebase_z(s: &TriState, z: &SymmetricView, u: f64) -> Result<TriState> {
    let k_inv = guarded_inverse(&s.g, z, u)?;
    let p = &k_inv * &s.p;
    let g = &k_inv * &*s.g;
    let h = &*s.h + &**z - matkernel::transpose(&s.p) * &**z * &p;
    Ok(TriState {
        p,
        g: SymmetricView::enforce(&g).0,
        h: SymmetricView::enforce(&h).0,
        z_total: SymmetricView::enforce(&(&*s.z_total + &**z)).0,
        j: s.j,
        alpha: s.alpha,
        rebased: s.rebased,
    })
}

/// `F = H − Z_total`, the limit in the original coordinates.
pub fn fold_back_unchecked(s: &TriState) -> SymmetricView {
    SymmetricView::enforce(&(&*s.h - &*s.z_total)).0
}

/// [`fold_back_unchecked`] once `‖P‖_F ≤ tol`.
pub fn fold_back(s: &TriState, tol: f64) -> Result<SymmetricView> {
    let p_norm = matkernel::fro(&s.p);
    if p_norm > tol {
        return Err(Error::NotConvergedTri { p_norm });
    }
    Ok(fold_back_unchecked(s))
}
