//! Mode-wise solution operators: exact families E(t) and the discrete
//! families Ẽ(t) of backward Euler, convolution quadrature and rational
//! one-step schemes.

mod cq;
mod family;
mod mittag_leffler;
mod wave;

pub use cq::{cq_homogeneous, cq_mode_solve, cq_weights, CqWeights};
pub use family::{step_index, tilde_family_factor, DiscreteFamily};
pub use mittag_leffler::{mittag_leffler_neg, series_switch, MittagLeffler};
pub use wave::{
    i_stability_check, rational_wave_mode, stability_grid, wave_step_power, RationalScheme, StabilityReport, WaveStep,
};

use crate::error::{invalid, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EquationKind {
    /// dX + ΛX dt = dL
    Heat,
    /// dX + (∫₀ᵗ (t−s)^{ρ−2}/Γ(ρ−1) ΛX(s) ds) dt = dL with ρ ∈ (1, 2)
    Volterra { rho: f64 },
    /// First-order system for Ẍ + ΛX = L̇, noise in the velocity.
    Wave { scheme: RationalScheme },
}

impl EquationKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Volterra { rho } if !(rho > 1.0 && rho < 2.0) => {
                Err(invalid(format!("volterra order rho must lie strictly inside (1, 2), got {rho}")))
            }
            _ => Ok(()),
        }
    }

    /// The kernel order ρ; 1 for heat and wave.
    pub fn rho(&self) -> f64 {
        match *self {
            Self::Volterra { rho } => rho,
            _ => 1.0,
        }
    }

    pub fn is_wave(&self) -> bool {
        matches!(self, Self::Wave { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Heat => "heat",
            Self::Volterra { .. } => "volterra",
            Self::Wave { .. } => "wave",
        }
    }
}

/// Scalar factor (heat, Volterra) or 2×2 block (wave) acting on one mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModeFactor {
    Scalar(f64),
    Matrix([[f64; 2]; 2]),
}

impl ModeFactor {
    pub fn scalar(&self) -> Option<f64> {
        match *self {
            Self::Scalar(v) => Some(v),
            Self::Matrix(_) => None,
        }
    }

    pub fn matrix(&self) -> Option<[[f64; 2]; 2]> {
        match *self {
            Self::Matrix(m) => Some(m),
            Self::Scalar(_) => None,
        }
    }

    /// Applies the factor to a (displacement, velocity) pair; scalars act on
    /// the first entry only.
    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        match *self {
            Self::Scalar(s) => [s * v[0], 0.0],
            Self::Matrix(m) => [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]],
        }
    }
}

/// E(t) on the mode with eigenvalue `lambda`.
pub fn exact_mode_factor(kind: &EquationKind, lambda: f64, t: f64) -> Result<ModeFactor> {
    if !(lambda > 0.0) {
        return Err(invalid(format!("eigenvalue must be positive, got {lambda}")));
    }
    if !(t >= 0.0) {
        return Err(invalid(format!("time must be nonnegative, got {t}")));
    }
    Ok(match *kind {
        EquationKind::Heat => ModeFactor::Scalar((-lambda * t).exp()),
        EquationKind::Volterra { rho } => ModeFactor::Scalar(mittag_leffler_neg(rho, lambda * t.powf(rho))?),
        EquationKind::Wave { .. } => ModeFactor::Matrix(exact_wave_matrix(lambda, t)),
    })
}

pub(crate) fn exact_wave_matrix(lambda: f64, t: f64) -> [[f64; 2]; 2] {
    let w = lambda.sqrt();
    let (s, c) = (w * t).sin_cos();
    [[c, s / w], [-w * s, c]]
}

/// (1 + Δt λ_h)^{−n}
pub fn be_mode_power(lambda_h: f64, dt: f64, n: usize) -> f64 {
    let base = 1.0 + dt * lambda_h;
    match i32::try_from(n) {
        Ok(n) => base.powi(-n),
        Err(_) => (-(n as f64) * (dt * lambda_h).ln_1p()).exp(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_factor_at_zero_is_identity() {
        assert_eq!(exact_mode_factor(&EquationKind::Heat, 3.0, 0.0).unwrap(), ModeFactor::Scalar(1.0));
        assert_eq!(exact_mode_factor(&EquationKind::Volterra { rho: 1.5 }, 3.0, 0.0).unwrap(), ModeFactor::Scalar(1.0));
        let wave = EquationKind::Wave { scheme: RationalScheme::CrankNicolson };
        assert_eq!(exact_mode_factor(&wave, 3.0, 0.0).unwrap(), ModeFactor::Matrix([[1.0, 0.0], [0.0, 1.0]]));
    }

    #[test]
    fn heat_half_life() {
        let lambda = 2.0;
        let t = 2f64.ln() / lambda;
        let v = exact_mode_factor(&EquationKind::Heat, lambda, t).unwrap().scalar().unwrap();
        assert!((v - 0.5).abs() < 1e-15);
    }

    #[test]
    fn be_power_examples() {
        assert_eq!(be_mode_power(5.0, 0.1, 0), 1.0);
        assert_eq!(be_mode_power(10.0, 0.1, 2), 0.25);
    }

    #[test]
    fn be_power_converges_at_first_order() {
        let (lambda, t) = (3.0, 1.0);
        let errs: Vec<f64> = (4..=10)
            .map(|p| {
                let n = 1usize << p;
                (be_mode_power(lambda, t / n as f64, n) - (-lambda * t).exp()).abs()
            })
            .collect();
        for w in errs.windows(2) {
            assert!((w[0] / w[1]).log2() >= 0.9);
        }
    }

    #[test]
    fn volterra_validation() {
        assert!(EquationKind::Volterra { rho: 1.0 }.validate().is_err());
        assert!(EquationKind::Volterra { rho: 2.0 }.validate().is_err());
        assert!(EquationKind::Volterra { rho: 1.5 }.validate().is_ok());
    }

    #[test]
    fn serde_tags() {
        let k: EquationKind = serde_json::from_str(r#"{"kind":"volterra","rho":1.5}"#).unwrap();
        assert_eq!(k, EquationKind::Volterra { rho: 1.5 });
        let k: EquationKind = serde_json::from_str(r#"{"kind":"wave","scheme":"crank_nicolson"}"#).unwrap();
        assert_eq!(k, EquationKind::Wave { scheme: RationalScheme::CrankNicolson });
        assert!(serde_json::from_str::<EquationKind>(r#"{"kind":"burgers"}"#).is_err());
    }

    proptest! {
        #[test]
        fn exact_wave_preserves_energy(a in -10.0f64..10.0, b in -10.0f64..10.0, lambda in 0.1f64..1e4, t in 0.0f64..10.0) {
            let wave = EquationKind::Wave { scheme: RationalScheme::CrankNicolson };
            let f = exact_mode_factor(&wave, lambda, t).unwrap();
            let [x, y] = f.apply([a, b]);
            let before = a * a + b * b / lambda;
            let after = x * x + y * y / lambda;
            prop_assert!((after - before).abs() <= 1e-13 * before.max(1e-300));
        }

        #[test]
        fn heat_factor_in_unit_interval(lambda in 1e-3f64..1e6, t in 0.0f64..10.0) {
            let v = exact_mode_factor(&EquationKind::Heat, lambda, t).unwrap().scalar().unwrap();
            prop_assert!((0.0..=1.0).contains(&v));
        }

        #[test]
        fn be_power_monotone(lambda in 1e-3f64..1e6, dt in 1e-4f64..1.0, n in 0usize..200) {
            let a = be_mode_power(lambda, dt, n);
            let b = be_mode_power(lambda, dt, n + 1);
            prop_assert!(a >= 0.0);
            prop_assert!(a <= 1.0 && b <= a);
        }
    }
}
