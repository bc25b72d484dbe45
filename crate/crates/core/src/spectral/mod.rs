//! Dirichlet Laplacian spectrum on an interval, dot-H norms and the P1
//! finite element space.

mod fem;

pub use fem::{assemble_fem, cross_gram, l2_project_mode, transfer_matrix, FemSpace};

use crate::error::{invalid, Result};
use std::f64::consts::PI;

/// Eigenvalues λ_k = (kπ/L)² of the Dirichlet Laplacian on (0, L).
///
/// Index `j` of [`eigenvalues`](Self::eigenvalues) holds mode `k = j + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletSpectrum {
    length: f64,
    eigenvalues: Vec<f64>,
}

pub fn dirichlet_spectrum(modes: usize, length: f64) -> Result<DirichletSpectrum> {
    if modes == 0 {
        return Err(invalid("mode count must be positive"));
    }
    if !(length > 0.0 && length.is_finite()) {
        return Err(invalid(format!("domain length must be positive, got {length}")));
    }
    let eigenvalues = (1..=modes)
        .map(|k| {
            let w = k as f64 * PI / length;
            w * w
        })
        .collect();
    Ok(DirichletSpectrum { length, eigenvalues })
}

impl DirichletSpectrum {
    pub fn unit(modes: usize) -> Result<Self> {
        dirichlet_spectrum(modes, 1.0)
    }

    pub fn mode_count(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// λ_k for the 1-based mode index `k`.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        self.eigenvalues[k - 1]
    }
}

/// Coefficients in the eigenbasis together with a nominal regularity order.
#[derive(Debug, Clone, PartialEq)]
pub struct DotHVector {
    pub coefficients: Vec<f64>,
    pub order: f64,
}

impl DotHVector {
    pub fn new(coefficients: Vec<f64>, order: f64) -> Self {
        Self { coefficients, order }
    }
}

/// |v|_α = (Σ λ_k^α v_k²)^{1/2} over the coefficients stored in `v`.
pub fn dot_norm(v: &DotHVector, spec: &DirichletSpectrum, alpha: f64) -> Result<f64> {
    if v.coefficients.len() > spec.mode_count() {
        return Err(invalid(format!(
            "vector has {} coefficients but the spectrum only {} modes",
            v.coefficients.len(),
            spec.mode_count()
        )));
    }
    let sum: f64 = if alpha == 0.0 {
        v.coefficients.iter().map(|c| c * c).sum()
    } else {
        v.coefficients.iter().zip(spec.eigenvalues()).map(|(c, l)| l.powf(alpha) * c * c).sum()
    };
    Ok(sum.sqrt())
}
