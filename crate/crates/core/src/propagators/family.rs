use super::{be_mode_power, cq_homogeneous, cq_weights, exact_mode_factor, EquationKind, ModeFactor, WaveStep};
use crate::error::{invalid, Result};

/// Time discretization behind Ẽ(t).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DiscreteFamily {
    /// Exact time factors on the discrete eigenvalues (semidiscrete family).
    TimeExact,
    /// Piecewise constant on right-closed cells of `steps` equal steps over
    /// [0, horizon], taking the n-step scheme factor on (t_{n−1}, t_n].
    Stepped { horizon: f64, steps: usize },
}

impl DiscreteFamily {
    pub fn dt(&self) -> Option<f64> {
        match *self {
            Self::TimeExact => None,
            Self::Stepped { horizon, steps } => Some(horizon / steps as f64),
        }
    }
}

/// n = ⌈t/Δt⌉ with a relative guard so grid points map to their own cell.
pub fn step_index(t: f64, dt: f64, steps: usize) -> usize {
    if t <= 0.0 {
        return 0;
    }
    ((t / dt - 1e-9).ceil().max(1.0) as usize).min(steps)
}

/// Ẽ(t) on the discrete mode with eigenvalue `lambda_h`; t = 0 gives the
/// identity, the projection having been applied by the caller.
pub fn tilde_family_factor(kind: &EquationKind, family: &DiscreteFamily, lambda_h: f64, t: f64) -> Result<ModeFactor> {
    match *family {
        DiscreteFamily::TimeExact => exact_mode_factor(kind, lambda_h, t),
        DiscreteFamily::Stepped { horizon, steps } => {
            if !(t >= 0.0 && t <= horizon * (1.0 + 1e-12)) {
                return Err(invalid(format!("time {t} outside [0, {horizon}]")));
            }
            if steps == 0 {
                return Err(invalid("stepped family needs at least one step"));
            }
            let dt = horizon / steps as f64;
            let n = step_index(t, dt, steps);
            Ok(match *kind {
                EquationKind::Heat => ModeFactor::Scalar(be_mode_power(lambda_h, dt, n)),
                EquationKind::Volterra { rho } => {
                    if n == 0 {
                        ModeFactor::Scalar(1.0)
                    } else {
                        let weights = cq_weights(rho, dt, n)?;
                        ModeFactor::Scalar(cq_homogeneous(lambda_h, &weights, n)?[n])
                    }
                }
                EquationKind::Wave { scheme } => ModeFactor::Matrix(WaveStep::new(scheme, dt, lambda_h)?.power(n)),
            })
        }
    }
}
