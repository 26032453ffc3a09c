//! Double-Cayley transform: pull the current pair back to a Hamiltonian-like
//! `(Â, B̂)` and rebuild a first-standard-form pair with a fresh shift γ.

use rand::Rng;
use serde::Serialize;

use crate::cayley::{PairEvent, SsfPair};
use crate::doubling::{breakdown_probe, SolverConfig};
use crate::error::{Error, Result};
use crate::matkernel::{self, c64, CMatrix, HermitianView, Lu, SymmetricView};

/// Below this fraction of `‖E‖_F` a shift `ϑI − E` counts as singular.
pub const THETA_TOL: f64 = 1e-12;

/// Extra κ draws after the configured one.
pub const KAPPA_RETRIES: usize = 3;
pub const KAPPA_RANGE: (f64, f64) = (2.0, 10.0);

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DctParams {
    /// ϑ ∈ {−1, +1}
    pub theta: f64,
    /// β, with the sign of ϑ.
    pub beta: f64,
    pub kappa: f64,
    /// Doubling count of the pair being transformed.
    pub k0: u32,
    /// ϖ = −κ^(−2^k₀)
    pub varpi: f64,
    /// γ = β(1 − ϖϑ)/(ϑ + ϖ)
    pub gamma: f64,
}

impl DctParams {
    pub fn new(theta: f64, beta_magnitude: f64, kappa: f64, k0: u32) -> Self {
        // 2^k₀ ln κ overflows to +inf for large k₀, which underflows ϖ to −0.
        let exponent = 2f64.powi(k0.min(2000) as i32) * kappa.ln();
        let varpi = -(-exponent).exp();
        Self::with_varpi(theta, beta_magnitude, kappa, k0, varpi)
    }

    pub fn with_varpi(theta: f64, beta_magnitude: f64, kappa: f64, k0: u32, varpi: f64) -> Self {
        let beta = theta * beta_magnitude.abs();
        let gamma = beta * (1.0 - varpi * theta) / (theta + varpi);
        DctParams {
            theta,
            beta,
            kappa,
            k0,
            varpi,
            gamma,
        }
    }

    /// Image of an eigenvalue λ of `H` under the composite map, for a pair
    /// built with shift α and squared `k₀` times.
    pub fn nu(&self, lambda: c64, alpha: f64) -> c64 {
        let delta = (lambda + alpha) / (lambda - alpha);
        let d = delta.powf(2f64.powi(self.k0 as i32));
        (d + self.varpi) / (d * self.varpi + 1.0) * self.theta
    }
}

#[derive(Clone, Debug)]
pub struct CompressedHamiltonian {
    pub a_hat: HermitianView,
    pub b_hat: SymmetricView,
    pub theta: f64,
    pub beta: f64,
    pub k0: u32,
}

impl CompressedHamiltonian {
    /// `[Â, B̂; −B̄̂, −Ā̂]`
    pub fn assemble(&self) -> CMatrix {
        let n = self.a_hat.n();
        let (a, b) = (&*self.a_hat, &*self.b_hat);
        CMatrix::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
            (true, true) => a[(i, j)],
            (true, false) => b[(i, j - n)],
            (false, true) => -b[(i - n, j)].conj(),
            (false, false) => -a[(i - n, j - n)].conj(),
        })
    }
}

fn shifted(m: &CMatrix, s: f64) -> CMatrix {
    let mut out = matkernel::scale(m, c64::new(-1.0, 0.0));
    for i in 0..m.nrows() {
        out[(i, i)] += s;
    }
    out
}

/// The ϑ ∈ {+1, −1} maximizing `σ_min(ϑI − E)`, or `None` if both are numerically singular.
pub fn choose_theta(e: &CMatrix) -> Result<Option<f64>> {
    let smin = |theta: f64| -> Result<f64> {
        let s = matkernel::singular_values(&shifted(e, theta))?;
        Ok(s[s.len() - 1])
    };
    let (plus, minus) = (smin(1.0)?, smin(-1.0)?);
    let floor = THETA_TOL * matkernel::fro(e);
    if plus < floor && minus < floor {
        return Ok(None);
    }
    Ok(Some(if plus >= minus { 1.0 } else { -1.0 }))
}

/// `Z = ϑI − E + ϑF̄(ϑĒ − I)⁻¹F`, `Â = βϑI − 2βZ⁻¹`, `B̂ = (βI − ϑÂ)F̄(Ē − ϑI)⁻¹`.
pub fn compress(pair: &SsfPair, theta: f64, beta: f64) -> Result<CompressedHamiltonian> {
    let n = pair.n();
    let (e, f) = (&*pair.e, &*pair.f);
    let e_bar = matkernel::conj(e);
    let f_bar = matkernel::conj(f);
    let eye = matkernel::identity(n);
    let t = c64::new(theta, 0.0);

    // ϑĒ − I = ϑ(Ē − ϑI), so one factorization serves both inverses.
    let lu = Lu::new(&(matkernel::scale(&e_bar, t) - &eye)).map_err(|_| Error::ZSingular)?;
    let inner = lu.solve(f);
    let z = shifted(e, theta) + matkernel::scale(&(&f_bar * &inner), t);
    let z_inv = Lu::new(&z).map_err(|_| Error::ZSingular)?.inverse();
    let a_hat = matkernel::scale(&eye, c64::new(beta * theta, 0.0)) - matkernel::scale(&z_inv, c64::new(2.0 * beta, 0.0));

    // (Ē − ϑI)⁻¹ = ϑ(ϑĒ − I)⁻¹
    let e_shift_inv = matkernel::scale(&lu.inverse(), t);
    let left = matkernel::scale(&eye, c64::new(beta, 0.0)) - matkernel::scale(&a_hat, t);
    let b_hat = &left * &f_bar * &e_shift_inv;

    let (a_hat, _) = HermitianView::enforce(&a_hat);
    let (b_hat, _) = SymmetricView::enforce(&b_hat);
    Ok(CompressedHamiltonian {
        a_hat,
        b_hat,
        theta,
        beta,
        k0: pair.k,
    })
}

/// `E = I − 2γQ⁻¹`, `F = −2γ(γI − Ā̂)⁻¹B̄̂ Q⁻¹` with `Q = (γI − Â) − B̂(γI − Ā̂)⁻¹B̄̂`.
pub fn rebuild(c: &CompressedHamiltonian, gamma: f64) -> Result<SsfPair> {
    let n = c.a_hat.n();
    let err = |_| Error::GammaHitsSpectrum { gamma };
    let s = shifted(&c.a_hat, gamma);
    let s_bar = matkernel::conj(&s);
    let b_bar = matkernel::conj(&c.b_hat);
    let y = Lu::new(&s_bar).map_err(err)?.solve(&b_bar);
    let q = &s - &*c.b_hat * &y;
    let q_inv = Lu::new(&q).map_err(err)?.inverse();
    let two_gamma = c64::new(2.0 * gamma, 0.0);
    let e = matkernel::identity(n) - matkernel::scale(&q_inv, two_gamma);
    let f = matkernel::scale(&(&y * &q_inv), -two_gamma);
    Ok(SsfPair::from_parts(&e, &f, gamma, c.k0 + 1))
}

#[derive(Clone, Debug)]
pub struct DctOutcome {
    pub pair: SsfPair,
    pub params: DctParams,
    pub probe_ratio: f64,
}

/// choose_theta → compress → rebuild, retrying κ up to [`KAPPA_RETRIES`] times
/// until the new pair passes the breakdown probe.
pub fn apply_dct<R: Rng + ?Sized>(pair: &SsfPair, cfg: &SolverConfig, rng: &mut R) -> Result<DctOutcome> {
    let u = cfg.breakdown_tol;
    let theta = choose_theta(&pair.e)?.ok_or_else(|| Error::DctFailed("no usable theta".into()))?;
    let compressed = compress(pair, theta, theta * cfg.beta).map_err(|e| Error::DctFailed(e.to_string()))?;

    let mut reasons = Vec::new();
    for attempt in 0..=KAPPA_RETRIES {
        let kappa = if attempt == 0 {
            cfg.kappa
        } else {
            rng.random_range(KAPPA_RANGE.0..KAPPA_RANGE.1)
        };
        let params = DctParams::new(theta, cfg.beta, kappa, pair.k);
        let mut next = match rebuild(&compressed, params.gamma) {
            Ok(next) => next,
            Err(e) => {
                reasons.push(format!("kappa={kappa:.4}: {e}"));
                continue;
            }
        };
        let probe = breakdown_probe(&next, u)?;
        if probe.is_ill() {
            reasons.push(format!("kappa={kappa:.4}: probe ratio {:.3e}", probe.ratio()));
            continue;
        }
        let kernel = matkernel::identity(next.n()) - matkernel::conj(&next.f) * &*next.f;
        match matkernel::inverse_with_cond(&kernel) {
            Ok((_, cond)) if cond <= 1.0 / u => {}
            _ => {
                reasons.push(format!("kappa={kappa:.4}: I - conj(F)F ill-conditioned"));
                continue;
            }
        }
        next.events = pair.events.clone();
        next.events.push(PairEvent::DctApplied);
        return Ok(DctOutcome {
            pair: next,
            params,
            probe_ratio: probe.ratio(),
        });
    }
    Err(Error::DctFailed(reasons.join("; ")))
}
