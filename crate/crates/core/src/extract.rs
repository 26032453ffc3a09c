//! Eigenpairs of `H` from a converged representative `F`, residual metrics,
//! and broadened spectral densities.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matkernel::{self, c64, CMatrix, Lu};
use crate::oracle;
use crate::problem::{apply_gamma, apply_pi, BseHamiltonian};

#[derive(Clone, Debug)]
pub struct EigenResult {
    /// The half extracted from the subspace, with nonpositive mean real part.
    pub stable_values: Vec<c64>,
    /// `stable_values` followed by their mirrors `−λ̄`.
    pub full_values: Vec<c64>,
    /// Unit columns; column `n + j` is `Π·conj` of column `j`.
    pub right_vectors: CMatrix,
    /// `pairing[j]` is the index of the mirror `−λ̄_j`.
    pub pairing: Vec<usize>,
    /// Set when the reduced matrix produced the unstable half and the labels were swapped.
    pub flipped: bool,
}

impl EigenResult {
    pub fn n(&self) -> usize {
        self.stable_values.len()
    }

    /// Assemble from one half; the other half is mirrored.
    pub fn from_half(values: Vec<c64>, vectors: &CMatrix) -> Self {
        let n = values.len();
        let mirror = apply_pi(&matkernel::conj(vectors));
        let right_vectors = CMatrix::from_fn(2 * n, 2 * n, |i, j| {
            if j < n {
                vectors[(i, j)]
            } else {
                mirror[(i, j - n)]
            }
        });
        let mut full_values = values.clone();
        full_values.extend(values.iter().map(|z| -z.conj()));
        let pairing = (0..2 * n).map(|j| (j + n) % (2 * n)).collect();
        EigenResult {
            stable_values: values,
            full_values,
            right_vectors,
            pairing,
            flipped: false,
        }
    }

    /// Rebuild from a full spectrum whose first half is the extracted one, as
    /// written by the CLI. Vectors may be absent (`2n×0`).
    pub fn from_full(values: Vec<c64>, vectors: CMatrix) -> Result<Self> {
        if !values.len().is_multiple_of(2) || (vectors.ncols() != 0 && vectors.ncols() != values.len()) {
            return Err(Error::DimensionMismatch(format!(
                "{} eigenvalues with {} eigenvector columns",
                values.len(),
                vectors.ncols()
            )));
        }
        let mirrors: Vec<c64> = values.iter().map(|z| -z.conj()).collect();
        let pairing = matkernel::greedy_match(&mirrors, &values)?;
        Ok(EigenResult {
            stable_values: values[..values.len() / 2].to_vec(),
            full_values: values,
            right_vectors: vectors,
            pairing,
            flipped: false,
        })
    }

    pub fn has_vectors(&self) -> bool {
        self.right_vectors.ncols() == self.full_values.len() && !self.full_values.is_empty()
    }

    /// Swap the roles of the two halves.
    fn flip(self) -> Self {
        let n = self.n();
        let values = self.full_values[n..].to_vec();
        let vectors = self.right_vectors.subcols(n, n).to_owned();
        EigenResult {
            flipped: !self.flipped,
            ..EigenResult::from_half(values, &vectors)
        }
    }
}

/// `[I, −Fᴴ] H [I; −F] (I + FᴴF)⁻¹`
pub fn reduced_matrix(p: &BseHamiltonian, f: &CMatrix) -> Result<CMatrix> {
    let (k, gram) = projected(p, f);
    // (I + FᴴF) is Hermitian ≥ I, so solving from the right is safe.
    let t = Lu::new(&gram)?.solve(&matkernel::adjoint(&k));
    Ok(matkernel::adjoint(&t))
}

/// `([I, −Fᴴ] H [I; −F], I + FᴴF)`
fn projected(p: &BseHamiltonian, f: &CMatrix) -> (CMatrix, CMatrix) {
    let n = p.n();
    let basis = stacked_basis(f);
    let hx = p.assemble_full() * &basis;
    let k = matkernel::adjoint(&basis) * &hx;
    let gram = matkernel::identity(n) + matkernel::adjoint(f) * f;
    (k, gram)
}

/// `[I; −F]`
fn stacked_basis(f: &CMatrix) -> CMatrix {
    let n = f.nrows();
    CMatrix::from_fn(2 * n, n, |i, j| {
        if i < n {
            c64::new(if i == j { 1.0 } else { 0.0 }, 0.0)
        } else {
            -f[(i - n, j)]
        }
    })
}

/// Eigenpairs from the reduced problem, mirrored to the full spectrum.
///
/// The reduced problem is solved as a Rayleigh-Ritz projection onto an
/// orthonormal basis `Q` of `span[I; −F]`, which is similar to
/// [`reduced_matrix`] but avoids the squared conditioning of `I + FᴴF` when
/// `‖F‖` is large.
pub fn eigenpairs(p: &BseHamiltonian, f: &CMatrix) -> Result<EigenResult> {
    matkernel::check_finite(f)?;
    let q = stacked_basis(f).qr().compute_thin_Q();
    let k = matkernel::adjoint(&q) * p.assemble_full() * &q;
    let (values, v) = matkernel::eig_right(&k)?;
    let mut x = &q * &v;
    matkernel::normalize_columns(&mut x);
    let result = EigenResult::from_half(values, &x);
    let n = result.n().max(1) as f64;
    let mean_re = result.stable_values.iter().map(|z| z.re).sum::<f64>() / n;
    Ok(if mean_re > 0.0 { result.flip() } else { result })
}

/// Left vectors `y_j` with `y_jᴴ H = λ_j y_jᴴ`, taken as `Γx′` where `x′` is the
/// right vector of `λ̄_j`.
pub fn left_vectors(result: &EigenResult) -> Result<CMatrix> {
    let targets: Vec<c64> = result.full_values.iter().map(|z| z.conj()).collect();
    let order = matkernel::greedy_match(&targets, &result.full_values)?;
    let gx = apply_gamma(&result.right_vectors);
    Ok(CMatrix::from_fn(gx.nrows(), gx.ncols(), |i, j| gx[(i, order[j])]))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResidualReport {
    /// `‖H − V diag(λ) V⁻¹‖_F / ‖H‖_F` with `V = [X, ΠX̄]`.
    pub decomposition_residual: f64,
    /// `‖YᴴHV − Λ‖_F / ‖H‖_F` with `Y` scaled so that `diag(YᴴV) = 1`.
    pub rayleigh_residual: f64,
    /// Against a reference spectrum, when one is supplied.
    pub prec: Option<f64>,
}

pub fn residuals(p: &BseHamiltonian, result: &EigenResult, reference: Option<&[c64]>) -> Result<ResidualReport> {
    let h = p.assemble_full();
    let h_norm = p.h_fro().max(f64::MIN_POSITIVE);
    let v = &result.right_vectors;
    let dim = v.ncols();
    let lambda = CMatrix::from_fn(dim, dim, |i, j| if i == j { result.full_values[i] } else { c64::new(0.0, 0.0) });

    let decomposition_residual = oracle::decomposition_residual(&h, &result.full_values, v);

    let mut y = left_vectors(result)?;
    for j in 0..dim {
        let s = y.col(j).adjoint() * v.col(j);
        if s.norm() > 0.0 {
            let scale = s.conj().inv();
            for i in 0..dim {
                y[(i, j)] *= scale;
            }
        }
    }
    let rayleigh = matkernel::adjoint(&y) * &h * v - &lambda;
    let rayleigh_residual = matkernel::fro(&rayleigh) / h_norm;

    let prec = reference.map(|r| oracle::prec(r, &result.full_values)).transpose()?;
    Ok(ResidualReport {
        decomposition_residual,
        rayleigh_residual,
        prec,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DensityKind {
    Dos,
    Absorption,
}

impl DensityKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DensityKind::Dos => "dos",
            DensityKind::Absorption => "absorption",
        }
    }
}

impl fmt::Display for DensityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DensityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dos" => Ok(DensityKind::Dos),
            "absorption" => Ok(DensityKind::Absorption),
            other => Err(Error::InvalidArgument(format!("unknown spectrum kind '{other}'"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Dipoles {
    pub d_r: Vec<c64>,
    pub d_l: Vec<c64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralDensity {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub broadening: f64,
    pub kind: DensityKind,
}

impl SpectralDensity {
    /// Trapezoidal integral over the grid.
    pub fn integral(&self) -> f64 {
        self.grid
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(w, v)| 0.5 * (w[1] - w[0]) * (v[0] + v[1]))
            .sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("omega,value\n");
        for (w, v) in self.grid.iter().zip(&self.values) {
            out.push_str(&format!("{w:.16e},{v:.16e}\n"));
        }
        out
    }
}

fn gaussian(x: f64, sigma: f64) -> f64 {
    (-0.5 * (x / sigma).powi(2)).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
}

/// Real extent of the spectrum divided by 200, or 1/200 for a point spectrum.
pub fn default_broadening(values: &[c64]) -> f64 {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), z| (lo.min(z.re), hi.max(z.re)));
    let extent = hi - lo;
    if extent > 0.0 && extent.is_finite() {
        extent / 200.0
    } else {
        1.0 / 200.0
    }
}

/// Gaussian-broadened density of states `(1/2n) Σ g(ω − λ_j)` or absorption
/// `Σ_{Re λ_j > 0} Re[(d_rᴴx_j)(y_jᴴd_l)/(y_jᴴx_j)] g(ω − λ_j)`.
pub fn spectral_density(
    result: &EigenResult,
    grid: &[f64],
    broadening: f64,
    kind: DensityKind,
    dipoles: Option<&Dipoles>,
) -> Result<SpectralDensity> {
    if !broadening.is_finite() || broadening <= 0.0 {
        return Err(Error::NonPositive { what: "broadening", value: broadening });
    }
    let peaks: Vec<(f64, f64)> = match kind {
        DensityKind::Dos => {
            let w = 1.0 / result.full_values.len().max(1) as f64;
            result.full_values.iter().map(|z| (z.re, w)).collect()
        }
        DensityKind::Absorption => {
            let d = dipoles.ok_or(Error::MissingDipoles)?;
            if !result.has_vectors() {
                return Err(Error::MissingDipoles);
            }
            let dim = result.right_vectors.nrows();
            if d.d_r.len() != dim || d.d_l.len() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "dipole vectors must have length {dim}, got {} and {}",
                    d.d_r.len(),
                    d.d_l.len()
                )));
            }
            let y = left_vectors(result)?;
            let x = &result.right_vectors;
            let dot = |a: &[c64], m: &CMatrix, j: usize| -> c64 { (0..dim).map(|i| a[i].conj() * m[(i, j)]).sum() };
            result
                .full_values
                .iter()
                .enumerate()
                .filter(|(_, z)| z.re > 0.0)
                .map(|(j, z)| {
                    let yx: c64 = (0..dim).map(|i| y[(i, j)].conj() * x[(i, j)]).sum();
                    let yd: c64 = dot(&d.d_l, &y, j).conj();
                    (z.re, (dot(&d.d_r, x, j) * yd / yx).re)
                })
                .collect()
        }
    };
    let values = grid
        .iter()
        .map(|&w| peaks.iter().map(|&(at, weight)| weight * gaussian(w - at, broadening)).sum())
        .collect();
    Ok(SpectralDensity {
        grid: grid.to_vec(),
        values,
        broadening,
        kind,
    })
}

/// Parse `lo:step:hi` into an inclusive grid.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidArgument(format!("grid '{s}' must be lo:step:hi"));
    let parts: Vec<f64> = s
        .split(':')
        .map(|t| t.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let [lo, step, hi] = parts[..] else {
        return Err(bad());
    };
    if !lo.is_finite() || !hi.is_finite() || step.is_nan() || step <= 0.0 || hi < lo {
        return Err(bad());
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| lo + i as f64 * step).collect())
}

/// Symmetric grid of `points` values spanning `factor` times the spectral extent.
pub fn covering_grid(values: &[c64], factor: f64, points: usize) -> Vec<f64> {
    let radius = values.iter().map(|z| z.re.abs()).fold(0.0f64, f64::max).max(1e-3) * factor;
    let points = points.max(2);
    let step = 2.0 * radius / (points - 1) as f64;
    (0..points).map(|i| -radius + i as f64 * step).collect()
}
