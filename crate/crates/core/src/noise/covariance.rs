use super::LevyLaw;
use crate::error::{invalid, Result};
use crate::spectral::DirichletSpectrum;
use std::f64::consts::PI;

/// Eigenvalues q_k of a covariance operator diagonal in the Laplacian basis.
#[derive(Debug, Clone, PartialEq)]
pub enum CovarianceSpec {
    /// q_k = amplitude · λ_k^{−decay}; amplitude 0 switches the noise off.
    PowerLaw { amplitude: f64, decay: f64 },
    /// Explicit positive, nonincreasing q_1, q_2, ...
    Explicit(Vec<f64>),
}

/// Decay exponent placing the noise exactly at regularity `beta`:
/// s = β − 1/ρ + 1/2 + 0.05, so that 2(s + 1/ρ − β) = 1.1.
pub fn decay_for_beta(beta: f64, rho: f64) -> f64 {
    beta - 1.0 / rho + 0.5 + 0.05
}

impl CovarianceSpec {
    pub fn power_law(amplitude: f64, decay: f64) -> Result<Self> {
        if !(amplitude >= 0.0 && amplitude.is_finite()) {
            return Err(invalid(format!("covariance amplitude must be nonnegative, got {amplitude}")));
        }
        if !(decay >= 0.0 && decay.is_finite()) {
            return Err(invalid(format!("covariance decay must be nonnegative, got {decay}")));
        }
        Ok(Self::PowerLaw { amplitude, decay })
    }

    pub fn explicit(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("explicit covariance sequence is empty"));
        }
        if values.iter().any(|q| !(*q > 0.0 && q.is_finite())) {
            return Err(invalid("explicit covariance entries must be positive and finite"));
        }
        if values.windows(2).any(|w| w[1] > w[0]) {
            return Err(invalid("explicit covariance sequence must be nonincreasing"));
        }
        Ok(Self::Explicit(values))
    }

    /// q_k for every mode of `spec`.
    pub fn eigenvalues(&self, spec: &DirichletSpectrum) -> Result<Vec<f64>> {
        match self {
            Self::PowerLaw { amplitude, decay } => {
                Ok(spec.eigenvalues().iter().map(|l| amplitude * l.powf(-decay)).collect())
            }
            Self::Explicit(values) => {
                if values.len() < spec.mode_count() {
                    return Err(invalid(format!(
                        "explicit covariance has {} entries, spectrum needs {}",
                        values.len(),
                        spec.mode_count()
                    )));
                }
                Ok(values[..spec.mode_count()].to_vec())
            }
        }
    }

    /// Decay exponent of a power-law covariance.
    pub fn decay(&self) -> Option<f64> {
        match self {
            Self::PowerLaw { decay, .. } => Some(*decay),
            Self::Explicit(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convergence {
    Converges,
    Diverges,
    Unknown,
}

/// Truncated ‖Λ^{(β−1/ρ)/2} Q^{1/2}‖²_HS with an integral tail bound.
#[derive(Debug, Clone, PartialEq)]
pub struct HsCondition {
    pub partial_sum: f64,
    /// Upper bound on Σ_{k>K}; infinite when divergent, `None` for explicit
    /// sequences.
    pub tail_bound: Option<f64>,
    pub convergence: Convergence,
    /// 2(s + 1/ρ − β) for power-law covariances.
    pub exponent: Option<f64>,
}

impl HsCondition {
    /// The Hilbert–Schmidt norm itself, √(partial sum).
    pub fn norm(&self) -> f64 {
        self.partial_sum.sqrt()
    }

    pub fn converges(&self) -> bool {
        self.convergence == Convergence::Converges
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if rho == 1.0 || (rho > 1.0 && rho < 2.0) {
        Ok(())
    } else {
        Err(invalid(format!("rho must be 1 or lie in (1, 2), got {rho}")))
    }
}

pub fn hs_condition(spec: &DirichletSpectrum, cov: &CovarianceSpec, beta: f64, rho: f64) -> Result<HsCondition> {
    check_rho(rho)?;
    let q = cov.eigenvalues(spec)?;
    let power = beta - 1.0 / rho;
    let partial_sum = spec.eigenvalues().iter().zip(&q).map(|(l, q)| q * l.powf(power)).sum();

    let (tail_bound, convergence, exponent) = match cov {
        CovarianceSpec::PowerLaw { amplitude, decay } => {
            let exponent = 2.0 * (decay + 1.0 / rho - beta);
            if exponent > 1.0 {
                // term_k = c (π/L)^{2e} k^{2e}, e = power − s; Σ_{k>K} ≤ ∫_K^∞.
                let e2 = 2.0 * (power - decay);
                let scale = amplitude * (PI / spec.length()).powf(e2);
                let k = spec.mode_count() as f64;
                let bound = scale * k.powf(e2 + 1.0) / (-e2 - 1.0);
                (Some(bound), Convergence::Converges, Some(exponent))
            } else {
                (Some(f64::INFINITY), Convergence::Diverges, Some(exponent))
            }
        }
        CovarianceSpec::Explicit(_) => (None, Convergence::Unknown, None),
    };
    Ok(HsCondition { partial_sum, tail_bound, convergence, exponent })
}

/// Σ_{k≤m} (∫ξ² ν_k(dξ)) q_k λ_k^{β−1}, with per-mode jump second moments.
pub fn weqii_functional(
    spec: &DirichletSpectrum,
    cov: &CovarianceSpec,
    second_moments: &[f64],
    beta: f64,
    m: usize,
) -> Result<f64> {
    if m > spec.mode_count() {
        return Err(invalid(format!("truncation {m} exceeds the {} available modes", spec.mode_count())));
    }
    if second_moments.len() < m {
        return Err(invalid(format!("{} second moments given, {m} needed", second_moments.len())));
    }
    let q = cov.eigenvalues(spec)?;
    let power = beta - 1.0;
    Ok(spec.eigenvalues()[..m].iter().zip(&q).zip(second_moments).map(|((l, q), m2)| m2 * (q * l.powf(power))).sum())
}

/// [`weqii_functional`] with the same law on every mode.
pub fn weqii_for_law(
    spec: &DirichletSpectrum,
    cov: &CovarianceSpec,
    law: &LevyLaw,
    beta: f64,
    m: usize,
) -> Result<f64> {
    let moments = vec![law.jump_second_moment(); m];
    weqii_functional(spec, cov, &moments, beta, m)
}
