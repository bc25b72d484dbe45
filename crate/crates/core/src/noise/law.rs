use super::StreamRng;
use crate::error::{invalid, Result};
use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

/// Per-mode scalar Lévy law, normalized so that E L(t)² = t.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case", deny_unknown_fields)]
pub enum LevyLaw {
    /// Brownian motion time-changed by a gamma subordinator with E Z(t) = t
    /// and Var Z(t) = ν·t.
    VarianceGamma { variance_rate: f64 },
    /// Poisson jumps at rate `intensity`, each with variance 1/intensity.
    CompoundPoisson {
        intensity: f64,
        #[serde(default)]
        jumps: JumpLaw,
    },
    /// Brownian motion subordinated by the gamma process with Lévy measure
    /// ρ(ds) = a s⁻¹ e^{−s/b} ds, rescaled by 1/√(ab) = 1/√(∫ s ρ(ds)).
    GammaSubordinatedWiener { shape_rate: f64, scale: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JumpLaw {
    /// ±intensity^{−1/2} with equal probability.
    #[default]
    TwoPoint,
    /// Centered normal with variance 1/intensity.
    Normal,
}

impl LevyLaw {
    pub fn compound_poisson(intensity: f64) -> Self {
        Self::CompoundPoisson { intensity, jumps: JumpLaw::TwoPoint }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(format!("{name} must be positive and finite, got {v}")))
            }
        };
        match *self {
            Self::VarianceGamma { variance_rate } => positive("variance_rate", variance_rate),
            Self::CompoundPoisson { intensity, .. } => positive("intensity", intensity),
            Self::GammaSubordinatedWiener { shape_rate, scale } => {
                positive("shape_rate", shape_rate)?;
                positive("scale", scale)
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::VarianceGamma { .. } => "variance_gamma",
            Self::CompoundPoisson { .. } => "compound_poisson",
            Self::GammaSubordinatedWiener { .. } => "gamma_subordinated_wiener",
        }
    }

    /// ∫ ξ² ν(dξ) computed from the Lévy measure parameters.
    pub fn jump_second_moment(&self) -> f64 {
        match *self {
            // ν(dξ) = (1/(ν_g|ξ|)) exp(−√(2/ν_g)|ξ|) dξ
            Self::VarianceGamma { variance_rate } => {
                let c = (2.0 / variance_rate).sqrt();
                2.0 / (variance_rate * c * c)
            }
            Self::CompoundPoisson { intensity, .. } => intensity * (1.0 / intensity),
            // ∫ s ρ(ds) = ab, cancelled by the 1/√(ab) rescaling.
            Self::GammaSubordinatedWiener { .. } => 1.0,
        }
    }

    /// One increment over a span `dt > 0`.
    pub fn sample_increment(&self, dt: f64, rng: &mut StreamRng) -> f64 {
        match *self {
            Self::VarianceGamma { variance_rate } => {
                let z = Gamma::new(dt / variance_rate, variance_rate).expect("validated gamma parameters").sample(rng);
                let n: f64 = rng.sample(StandardNormal);
                z.sqrt() * n
            }
            Self::GammaSubordinatedWiener { shape_rate, scale } => {
                let z = Gamma::new(shape_rate * dt, scale).expect("validated gamma parameters").sample(rng);
                let n: f64 = rng.sample(StandardNormal);
                (z / (shape_rate * scale)).sqrt() * n
            }
            Self::CompoundPoisson { intensity, jumps } => {
                let count = poisson_count(intensity * dt, rng);
                let mut sum = 0.0;
                for _ in 0..count {
                    sum += jumps.sample(intensity, rng);
                }
                sum
            }
        }
    }
}

impl JumpLaw {
    pub fn sample(self, intensity: f64, rng: &mut StreamRng) -> f64 {
        let unit = 1.0 / intensity.sqrt();
        match self {
            Self::TwoPoint => {
                if rng.gen::<bool>() {
                    unit
                } else {
                    -unit
                }
            }
            Self::Normal => {
                let n: f64 = rng.sample(StandardNormal);
                unit * n
            }
        }
    }
}

pub(crate) fn poisson_count(mean: f64, rng: &mut StreamRng) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive Poisson mean").sample(rng) as u64
}

/// `modes` independent unit-rate increments over `dt`; the caller scales
/// mode k by √q_k when mapping into the state space.
pub fn sample_increments(law: &LevyLaw, dt: f64, modes: usize, rng: &mut StreamRng) -> Result<Vec<f64>> {
    law.validate()?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(invalid(format!("increment span must be positive, got {dt}")));
    }
    Ok((0..modes).map(|_| law.sample_increment(dt, rng)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::RngStreams;

    fn moments(samples: &[f64]) -> (f64, f64, f64) {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let m2 = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        let m4 = samples.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
        (mean, m2, m4)
    }

    fn laws() -> Vec<LevyLaw> {
        vec![
            LevyLaw::VarianceGamma { variance_rate: 0.5 },
            LevyLaw::compound_poisson(3.0),
            LevyLaw::CompoundPoisson { intensity: 0.7, jumps: JumpLaw::Normal },
            LevyLaw::GammaSubordinatedWiener { shape_rate: 2.0, scale: 0.3 },
        ]
    }

    #[test]
    fn variance_matches_span_within_four_standard_errors() {
        let n = 100_000;
        for (i, law) in laws().iter().enumerate() {
            for (j, &dt) in [1e-3, 1e-1, 1.0].iter().enumerate() {
                let mut rng = RngStreams::new(11).stream(i as u64, j as u64);
                let x = sample_increments(law, dt, n, &mut rng).unwrap();
                let sq: Vec<f64> = x.iter().map(|v| v * v).collect();
                let (mean_sq, var_sq, _) = moments(&sq);
                let se = (var_sq / n as f64).sqrt();
                assert!((mean_sq - dt).abs() <= 4.0 * se, "{law:?} dt={dt}: {mean_sq} vs {dt} (se {se})");
                let (mean, var, _) = moments(&x);
                assert!(mean.abs() <= 4.0 * (var / n as f64).sqrt());
            }
        }
    }

    #[test]
    fn variance_gamma_kurtosis_formula() {
        let n = 200_000;
        let dt = 1.0;
        for (seed, &nu) in [1e-4, 0.2].iter().enumerate() {
            let law = LevyLaw::VarianceGamma { variance_rate: nu };
            let mut rng = RngStreams::new(seed as u64).stream(0, 0);
            let x = sample_increments(&law, dt, n, &mut rng).unwrap();
            // batch means give the standard error of the kurtosis estimate
            let batches: Vec<f64> = x
                .chunks(n / 20)
                .map(|c| {
                    let (_, m2, m4) = moments(c);
                    m4 / (m2 * m2)
                })
                .collect();
            let (kurt, var_b, _) = moments(&batches);
            let se = (var_b / batches.len() as f64).sqrt();
            let want = 3.0 + 3.0 * nu / dt;
            assert!((kurt - want).abs() <= 4.0 * se + 1e-3, "nu={nu}: {kurt} vs {want} (se {se})");
        }
    }

    #[test]
    fn modes_are_uncorrelated() {
        let n = 100_000;
        let law = LevyLaw::VarianceGamma { variance_rate: 0.5 };
        let mut rng = RngStreams::new(5).stream(0, 0);
        let pairs: Vec<f64> = (0..n)
            .map(|_| {
                let x = sample_increments(&law, 1.0, 2, &mut rng).unwrap();
                x[0] * x[1]
            })
            .collect();
        let (mean, var, _) = moments(&pairs);
        assert!(mean.abs() <= 4.0 * (var / n as f64).sqrt());
    }

    #[test]
    fn tiny_compound_poisson_rate_gives_zero() {
        let law = LevyLaw::compound_poisson(1e-300);
        let mut rng = RngStreams::new(0).stream(0, 0);
        let x = sample_increments(&law, 1e-300, 10, &mut rng).unwrap();
        assert!(x.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn second_moments_are_unit() {
        for law in laws() {
            assert!((law.jump_second_moment() - 1.0).abs() < 4.0 * f64::EPSILON);
        }
    }

    #[test]
    fn rejects_bad_span_and_parameters() {
        let mut rng = RngStreams::new(0).stream(0, 0);
        assert!(sample_increments(&LevyLaw::compound_poisson(1.0), 0.0, 3, &mut rng).is_err());
        assert!(sample_increments(&LevyLaw::VarianceGamma { variance_rate: -1.0 }, 1.0, 3, &mut rng).is_err());
    }

    #[test]
    fn serde_shape() {
        let law: LevyLaw = serde_json::from_str(r#"{"law":"compound_poisson","intensity":2.0}"#).unwrap();
        assert_eq!(law, LevyLaw::compound_poisson(2.0));
        assert!(serde_json::from_str::<LevyLaw>(r#"{"law":"compound_poisson","intensity":2.0,"x":1}"#).is_err());
        assert!(serde_json::from_str::<LevyLaw>(r#"{"law":"stable","alpha":1.5}"#).is_err());
    }
}
