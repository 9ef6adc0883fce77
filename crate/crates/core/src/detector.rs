// SPDX-License-Identifier: Apache-2.0

//! Digital reference detectors and their operation counts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{solve_vec, Mat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorKind {
    Zf,
    Mmse,
}

impl DetectorKind {
    pub fn is_mmse(self) -> bool {
        matches!(self, DetectorKind::Mmse)
    }

    /// Diagonal loading added to the Gram matrix; ZF ignores ρ.
    pub fn loading(self, rho: f64) -> f64 {
        match self {
            DetectorKind::Zf => 0.0,
            DetectorKind::Mmse => rho,
        }
    }
}

fn singular_as_gram(e: Error) -> Error {
    match e {
        Error::SingularMatrix { .. } => Error::SingularGram,
        other => other,
    }
}

/// `(HᵀH + loading·I)⁻¹ Hᵀ y`
fn regularized_ls(h: &Mat, y: &[f64], loading: f64) -> Result<Vec<f64>> {
    let mut gram = h.t_matmul(h);
    for i in 0..gram.rows() {
        gram[(i, i)] += loading;
    }
    solve_vec(&gram, &h.t_matvec(y)).map_err(singular_as_gram)
}

pub fn detect_zf(h: &Mat, y: &[f64]) -> Result<Vec<f64>> {
    regularized_ls(h, y, 0.0)
}

pub fn detect_mmse(h: &Mat, y: &[f64], rho: f64) -> Result<Vec<f64>> {
    if !(rho >= 0.0) {
        return Err(Error::Config(format!("rho must be non-negative, got {rho}")));
    }
    regularized_ls(h, y, rho)
}

pub fn detect(kind: DetectorKind, h: &Mat, y: &[f64], rho: f64) -> Result<Vec<f64>> {
    match kind {
        DetectorKind::Zf => detect_zf(h, y),
        DetectorKind::Mmse => detect_mmse(h, y, rho),
    }
}

/// `Λ⁻¹ (X + Q)⁻¹ Gᵀ y` with `Λ = diag(lambda_sqrt)` and `Q = diag(q)`.
pub fn detect_decomposed(
    g: &Mat,
    lambda_sqrt: &[f64],
    x: &Mat,
    q: &[f64],
    y: &[f64],
) -> Result<Vec<f64>> {
    if let Some((index, &value)) = lambda_sqrt.iter().enumerate().find(|(_, &l)| !(l > 0.0)) {
        return Err(Error::NonPositiveLambda { index, value });
    }
    let mut m = x.clone();
    for (i, qi) in q.iter().enumerate() {
        m[(i, i)] += qi;
    }
    let v = solve_vec(&m, &g.t_matvec(y)).map_err(singular_as_gram)?;
    Ok(v.iter().zip(lambda_sqrt).map(|(v, l)| v / l).collect())
}

/// Real-FLOP count of a dense ZF/MMSE evaluation (one multiply or one add is
/// one FLOP; a division also counts as one).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlopReport {
    pub flops: u64,
    /// `HᵀH`, upper triangle then mirrored.
    pub gram: u64,
    /// `+ρI`; zero for ZF.
    pub regularize: u64,
    /// LU factorization plus forward and back substitution.
    pub solve: u64,
    /// `Hᵀy`
    pub matvec: u64,
}

/// Counts for `n = 2K` unknowns and `m = 2R` observations:
///
/// * Gram: `n(n+1)/2` inner products of length `m`, `2m − 1` each
/// * regularization: `n` additions (MMSE only)
/// * LU without row updates of eliminated columns: `Σ_{j<n} (j + 2j²)`
/// * unit-lower forward substitution `n(n−1)`, back substitution `n²`
/// * `Hᵀy`: `n(2m − 1)`
///
/// The LU part is `2n³/3 + n²/2 − 7n/6 + …` plus `2n² − n` for the
/// substitutions.
pub fn count_flops(antennas: usize, users: usize, kind: DetectorKind) -> FlopReport {
    let n = 2 * users as u64;
    let m = 2 * antennas as u64;
    let gram = n * (n + 1) / 2 * (2 * m - 1);
    let regularize = if kind.is_mmse() { n } else { 0 };
    let lu: u64 = (1..n).map(|j| j + 2 * j * j).sum();
    let solve = lu + n * (n - 1) + n * n;
    let matvec = n * (2 * m - 1);
    FlopReport { flops: gram + regularize + solve + matvec, gram, regularize, solve, matvec }
}
