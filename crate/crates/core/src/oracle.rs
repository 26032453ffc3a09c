//! Dense reference eigensolvers and the `prec` comparison metric.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matkernel::{self, c64, CMatrix};
use crate::problem::{structure_matrix, BseHamiltonian, Structure};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleMethod {
    Direct,
    Pencil,
}

impl OracleMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            OracleMethod::Direct => "direct",
            OracleMethod::Pencil => "pencil",
        }
    }
}

impl fmt::Display for OracleMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OracleMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(OracleMethod::Direct),
            "pencil" => Ok(OracleMethod::Pencil),
            other => Err(Error::InvalidArgument(format!("unknown oracle method '{other}'"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct OracleResult {
    pub values: Vec<c64>,
    pub vectors: CMatrix,
    pub method: OracleMethod,
}

/// Eigenpairs of the assembled `H`, with no structure enforcement.
pub fn eig_direct(p: &BseHamiltonian) -> Result<OracleResult> {
    let (values, vectors) = matkernel::eig_right(&p.assemble_full())?;
    Ok(OracleResult {
        values,
        vectors,
        method: OracleMethod::Direct,
    })
}

/// Generalized eigenpairs of `([A, B; B̄, Ā], Γ)`.
pub fn eig_pencil(p: &BseHamiltonian) -> Result<OracleResult> {
    let gamma = structure_matrix(p.n(), Structure::Gamma);
    let (values, vectors) = matkernel::generalized_eig(&p.assemble_gamma_h(), &gamma)?;
    Ok(OracleResult {
        values,
        vectors,
        method: OracleMethod::Pencil,
    })
}

pub fn eig_oracle(p: &BseHamiltonian, method: OracleMethod) -> Result<OracleResult> {
    match method {
        OracleMethod::Direct => eig_direct(p),
        OracleMethod::Pencil => eig_pencil(p),
    }
}

/// `‖H − V diag(λ) V⁻¹‖_F / ‖H‖_F`; a singular `V` gives `∞`.
pub fn decomposition_residual(h: &CMatrix, values: &[c64], vectors: &CMatrix) -> f64 {
    let h_norm = matkernel::fro(h).max(f64::MIN_POSITIVE);
    let Ok(lu) = matkernel::Lu::new(vectors) else {
        return f64::INFINITY;
    };
    let scaled = CMatrix::from_fn(vectors.nrows(), vectors.ncols(), |i, j| vectors[(i, j)] * values[j]);
    matkernel::fro(&(h - scaled * lu.inverse())) / h_norm
}

impl OracleResult {
    pub fn residual(&self, p: &BseHamiltonian) -> f64 {
        decomposition_residual(&p.assemble_full(), &self.values, &self.vectors)
    }
}

/// Per-reference errors `|λ − λ̂|/|λ|` after greedy nearest matching.
/// A zero reference value uses the absolute error.
pub fn relative_errors(reference: &[c64], computed: &[c64]) -> Result<Vec<f64>> {
    let order = matkernel::greedy_match(reference, computed)?;
    Ok(reference
        .iter()
        .zip(&order)
        .map(|(r, &j)| {
            let d = (r - computed[j]).norm();
            if r.norm() > 0.0 {
                d / r.norm()
            } else {
                d
            }
        })
        .collect())
}

/// `log₁₀ max_j |λ_j − λ̂_j|/|λ_j|`; identical lists give `−∞`.
pub fn prec(reference: &[c64], computed: &[c64]) -> Result<f64> {
    let worst = relative_errors(reference, computed)?
        .into_iter()
        .fold(0.0f64, f64::max);
    Ok(worst.log10())
}
