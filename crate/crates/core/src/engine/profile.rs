//! Cell-wise time quadrature of mode sums and the deterministic profile
//! s ↦ ‖Ẽ(s) − E(s)‖ used to inspect the shape of the propagator error.

use super::{Prepared, Setup};
use crate::error::{invalid, Result};
use crate::propagators::{
    cq_homogeneous, cq_weights, exact_mode_factor, step_index, tilde_family_factor, DiscreteFamily, EquationKind,
};
use crate::quadrature::{compensated_sum, CompensatedSum, GaussLegendre};
use rayon::prelude::*;

/// Relative size below which a mode contribution ends the mode sum.
const TAIL_CUTOFF: f64 = 1e-12;

/// Σ_k ∫₀ᵀ f(k, s) ds for 1-based modes k ≤ `modes`, each integral by
/// `nodes`-point Gauss on cells of width `dt` (one cell when `None`).
///
/// The sum stops at the first mode whose contribution falls below 1e−12 of
/// the running total in magnitude.
pub fn hs_time_integral(
    integrand: impl Fn(usize, f64) -> f64,
    modes: usize,
    horizon: f64,
    dt: Option<f64>,
    nodes: usize,
) -> Result<f64> {
    if !(horizon > 0.0 && horizon.is_finite()) || nodes == 0 {
        return Err(invalid("time integral needs a positive horizon and at least one node"));
    }
    let cells = match dt {
        None => 1,
        Some(dt) if dt > 0.0 => {
            let n = (horizon / dt).round();
            if (n * dt - horizon).abs() > 1e-9 * horizon {
                return Err(invalid(format!("step {dt} does not divide horizon {horizon}")));
            }
            n as usize
        }
        Some(dt) => return Err(invalid(format!("step must be positive, got {dt}"))),
    };
    let width = horizon / cells as f64;
    let rule = GaussLegendre::new(nodes);
    let mut total = CompensatedSum::new();
    for k in 1..=modes {
        let part = compensated_sum(
            (0..cells).map(|c| rule.integrate(c as f64 * width, (c + 1) as f64 * width, |s| integrand(k, s))),
        );
        total.add(part);
        if part.abs() <= TAIL_CUTOFF * total.value().abs() {
            break;
        }
    }
    Ok(total.value())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint {
    pub s: f64,
    pub error: f64,
}

/// Largest eigenvalue of the symmetric 2×2 matrix [[a, b], [b, c]].
fn top_eigenvalue(a: f64, b: f64, c: f64) -> f64 {
    let mean = 0.5 * (a + c);
    let half_gap = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    mean + half_gap
}

/// First rows of the discrete factors Ẽ(s) on every discrete mode.
struct DiscreteRows<'a> {
    prepared: &'a Prepared,
    /// Stepped Volterra: homogeneous CQ solutions x_0..x_N per mode.
    cq: Option<Vec<Vec<f64>>>,
}

impl<'a> DiscreteRows<'a> {
    fn new(prepared: &'a Prepared) -> Result<Self> {
        let cq = match (*prepared.model.kind(), *prepared.model.family()) {
            (EquationKind::Volterra { rho }, DiscreteFamily::Stepped { horizon, steps }) => {
                let weights = cq_weights(rho, horizon / steps as f64, steps)?;
                Some(
                    prepared
                        .discrete_eigenvalues
                        .par_iter()
                        .map(|&l| cq_homogeneous(l, &weights, steps))
                        .collect::<Result<_>>()?,
                )
            }
            _ => None,
        };
        Ok(Self { prepared, cq })
    }

    fn row(&self, j: usize, s: f64) -> Result<[f64; 2]> {
        let model = &self.prepared.model;
        if let (Some(cq), DiscreteFamily::Stepped { horizon, steps }) = (&self.cq, *model.family()) {
            return Ok([cq[j][step_index(s, horizon / steps as f64, steps)], 0.0]);
        }
        let f = tilde_family_factor(model.kind(), model.family(), self.prepared.discrete_eigenvalues[j], s)?;
        Ok(first_row(f))
    }
}

fn first_row(f: crate::propagators::ModeFactor) -> [f64; 2] {
    match f {
        crate::propagators::ModeFactor::Scalar(v) => [v, 0.0],
        crate::propagators::ModeFactor::Matrix(m) => m[0],
    }
}

/// sup over exact modes k of the operator error on span{φ_k}: |Ẽ(s)φ_k −
/// E(s)φ_k| for heat and Volterra, and for the wave equation the norm of the
/// first row as a map from Ḣ⁰ × Ḣ⁻¹ to Ḣ⁰.
pub fn propagator_error_profile(setup: &Setup, s_grid: &[f64]) -> Result<Vec<ProfilePoint>> {
    if let Some(s) = s_grid.iter().find(|s| !(**s > 0.0 && **s <= setup.horizon)) {
        return Err(invalid(format!("profile time {s} outside (0, {}]", setup.horizon)));
    }
    let prepared = Prepared::new(setup)?;
    let rows = DiscreteRows::new(&prepared)?;
    let kind = *prepared.model.kind();
    s_grid
        .iter()
        .map(|&s| {
            let discrete: Vec<[f64; 2]> =
                (0..prepared.discrete_eigenvalues.len()).map(|j| rows.row(j, s)).collect::<Result<_>>()?;
            let errors: Vec<f64> = (0..prepared.exact_eigenvalues.len())
                .into_par_iter()
                .map(|k| {
                    let lambda = prepared.exact_eigenvalues[k];
                    let exact = first_row(exact_mode_factor(&kind, lambda, s)?);
                    // Velocity data is measured in Ḣ⁻¹, so its unit vector is √λ φ_k.
                    let scale = lambda.sqrt();
                    let (aa, ab, bb) = match &prepared.transfer {
                        None => {
                            let a = discrete[k][0] - exact[0];
                            let b = scale * (discrete[k][1] - exact[1]);
                            (a * a, a * b, b * b)
                        }
                        Some(d) => {
                            // Ẽ(s)φ_k = Σ_j d_jk r_j ψ_j and ⟨ψ_j, φ_k⟩ = d_jk.
                            let mut sums = [CompensatedSum::new(); 6];
                            for (j, r) in discrete.iter().enumerate() {
                                let w = d[(j, k)] * d[(j, k)];
                                for (acc, v) in sums.iter_mut().zip([
                                    w * r[0] * r[0],
                                    w * r[0] * r[1],
                                    w * r[1] * r[1],
                                    w * r[0],
                                    w * r[1],
                                    0.0,
                                ]) {
                                    acc.add(v);
                                }
                            }
                            let v: Vec<f64> = sums.iter().map(|a| a.value()).collect();
                            let (e0, e1) = (exact[0], exact[1]);
                            let aa = v[0] - 2.0 * e0 * v[3] + e0 * e0;
                            let ab = v[1] - e1 * v[3] - e0 * v[4] + e0 * e1;
                            let bb = v[2] - 2.0 * e1 * v[4] + e1 * e1;
                            (aa.max(0.0), scale * ab, (scale * scale * bb).max(0.0))
                        }
                    };
                    Ok(top_eigenvalue(aa, ab, bb).max(0.0).sqrt())
                })
                .collect::<Result<_>>()?;
            Ok(ProfilePoint { s, error: errors.into_iter().fold(0.0, f64::max) })
        })
        .collect()
}
