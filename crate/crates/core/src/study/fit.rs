//! Log-log rate fits and the theoretical exponents they are compared with.

use crate::error::{Error, Result};
use crate::propagators::EquationKind;
use serde::Serialize;

/// Errors below this magnitude sit at the quadrature floor and are skipped.
pub const ERROR_FLOOR: f64 = 1e-13;

/// Allowed gap between fitted and expected slopes.
pub const SLOPE_TOLERANCE: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub levels_used: usize,
}

/// Least squares for log|error| = intercept + slope · log(resolution), over
/// the levels with finite |error| ≥ 1e−13.
pub fn fit_log_log(resolutions: &[f64], errors: &[f64]) -> Result<RateFit> {
    let points: Vec<(f64, f64)> = resolutions
        .iter()
        .zip(errors)
        .filter(|(r, e)| **r > 0.0 && e.is_finite() && e.abs() >= ERROR_FLOOR)
        .map(|(r, e)| (r.ln(), e.abs().ln()))
        .collect();
    if points.len() < 3 {
        return Err(Error::InsufficientData { usable: points.len() });
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let r_squared = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Ok(RateFit { slope, intercept: my - slope * mx, r_squared, levels_used: points.len() })
}

/// Theoretical weak and strong exponents in space (h) and time (Δt).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpectedRates {
    pub spatial_weak: f64,
    pub temporal_weak: f64,
    pub spatial_strong: f64,
    pub temporal_strong: f64,
    /// False when β lies outside the range the estimates are stated for.
    pub beta_in_range: bool,
}

/// Exponents for noise regularity `beta`, kernel order `rho`, time order `p`
/// and finite element order `r`.
pub fn expected_rates(kind: &EquationKind, beta: f64, rho: f64, p: f64, r: f64) -> ExpectedRates {
    match kind {
        EquationKind::Heat => ExpectedRates {
            spatial_weak: 2.0 * beta,
            temporal_weak: beta,
            spatial_strong: beta,
            temporal_strong: beta / 2.0,
            beta_in_range: beta > 0.0 && beta <= 1.0,
        },
        EquationKind::Volterra { .. } => ExpectedRates {
            spatial_weak: 2.0 * beta,
            temporal_weak: rho * beta,
            spatial_strong: beta,
            temporal_strong: rho * beta / 2.0,
            beta_in_range: beta > 0.0 && beta <= 1.0 / rho,
        },
        EquationKind::Wave { .. } => ExpectedRates {
            spatial_weak: (2.0 * beta * r / (r + 1.0)).min(r),
            temporal_weak: (2.0 * beta * p / (p + 1.0)).min(1.0),
            spatial_strong: (beta * r / (r + 1.0)).min(r),
            temporal_strong: (beta * p / (p + 1.0)).min(1.0),
            beta_in_range: beta > 0.0,
        },
    }
}

/// Expected rates of a study setup: P1 elements (r = 2) and the scheme order
/// for the wave equation, first order otherwise.
pub fn expected_for(kind: &EquationKind, beta: f64) -> ExpectedRates {
    let p = match kind {
        EquationKind::Wave { scheme } => scheme.order() as f64,
        _ => 1.0,
    };
    expected_rates(kind, beta, kind.rho(), p, 2.0)
}
