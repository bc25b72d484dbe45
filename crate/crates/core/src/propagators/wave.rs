use super::ModeFactor;
use crate::error::{invalid, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// One-step rational approximation R(z) ≈ e^{−z} applied to Δt·A_h.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RationalScheme {
    /// R(z) = 1/(1 + z), order 1.
    BackwardEuler,
    /// R(z) = (2 − z)/(2 + z), order 2.
    CrankNicolson,
    /// R(z) = 1 − z, order 1 and not I-stable.
    ExplicitEuler,
}

impl RationalScheme {
    pub fn order(self) -> u32 {
        match self {
            Self::CrankNicolson => 2,
            Self::BackwardEuler | Self::ExplicitEuler => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::BackwardEuler => "backward_euler",
            Self::CrankNicolson => "crank_nicolson",
            Self::ExplicitEuler => "explicit_euler",
        }
    }

    /// Numerator and denominator coefficients in ascending powers of z.
    fn coefficients(self) -> (&'static [f64], &'static [f64]) {
        match self {
            Self::BackwardEuler => (&[1.0], &[1.0, 1.0]),
            Self::CrankNicolson => (&[2.0, -1.0], &[2.0, 1.0]),
            Self::ExplicitEuler => (&[1.0, -1.0], &[1.0]),
        }
    }

    pub fn eval(self, z: Complex64) -> Complex64 {
        let (num, den) = self.coefficients();
        let horner = |c: &[f64]| c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a);
        horner(num) / horner(den)
    }
}

/// The step matrix of one wave mode in energy-scaled coordinates (u, v/ω)
/// is amplitude · rotation(angle); its n-th power is exact in closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveStep {
    pub amplitude: f64,
    pub angle: f64,
    pub frequency: f64,
}

impl WaveStep {
    pub fn new(scheme: RationalScheme, dt: f64, lambda_h: f64) -> Result<Self> {
        if !(lambda_h > 0.0) || !(dt >= 0.0) {
            return Err(invalid(format!("wave step needs λ_h > 0 and Δt ≥ 0, got {lambda_h}, {dt}")));
        }
        let frequency = lambda_h.sqrt();
        // Δt·A_h acts on scaled coordinates like multiplication by i·Δt·ω.
        let r = scheme.eval(Complex64::new(0.0, dt * frequency));
        Ok(Self { amplitude: r.norm(), angle: -r.arg(), frequency })
    }

    /// First row (displacement response to initial displacement, to initial
    /// velocity) of the n-th power.
    pub fn first_row(&self, n: usize) -> [f64; 2] {
        let scale = self.amplitude.powi(n as i32);
        let (s, c) = (n as f64 * self.angle).sin_cos();
        [scale * c, scale * s / self.frequency]
    }

    pub fn power(&self, n: usize) -> [[f64; 2]; 2] {
        let scale = self.amplitude.powi(n as i32);
        let (s, c) = (n as f64 * self.angle).sin_cos();
        let w = self.frequency;
        [[scale * c, scale * s / w], [-scale * w * s, scale * c]]
    }
}

/// R(Δt A_h) on the mode block [[0, −1], [λ_h, 0]].
pub fn rational_wave_mode(scheme: RationalScheme, dt: f64, lambda_h: f64) -> Result<ModeFactor> {
    Ok(ModeFactor::Matrix(WaveStep::new(scheme, dt, lambda_h)?.power(1)))
}

/// R(Δt A_h)^n on one mode.
pub fn wave_step_power(scheme: RationalScheme, dt: f64, lambda_h: f64, n: usize) -> Result<ModeFactor> {
    Ok(ModeFactor::Matrix(WaveStep::new(scheme, dt, lambda_h)?.power(n)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    pub max_modulus: f64,
    pub passed: bool,
}

/// max |R(iy)| over the grid; fails above 1 + 1e−12.
pub fn i_stability_check(scheme: RationalScheme, ys: &[f64]) -> StabilityReport {
    let max_modulus = ys.iter().map(|&y| scheme.eval(Complex64::new(0.0, y)).norm()).fold(0.0, f64::max);
    StabilityReport { max_modulus, passed: max_modulus <= 1.0 + 1e-12 }
}

/// Default frequency grid for stability checks: 0 and ±10^{−4..6}.
pub fn stability_grid() -> Vec<f64> {
    let mut ys = vec![0.0];
    for i in 0..=200 {
        let y = 10f64.powf(-4.0 + 0.05 * i as f64);
        ys.push(y);
        ys.push(-y);
    }
    ys
}
