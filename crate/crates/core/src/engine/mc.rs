//! Monte Carlo weak errors with the exact and discrete solutions driven by
//! the same compound Poisson jump path.

use super::{Prepared, Setup};
use crate::error::{invalid, Error, Result};
use crate::noise::{increments_from_path, sample_jump_path, JumpPath, LevyLaw, RngStreams, TimeGrid};
use crate::propagators::{cq_mode_solve, cq_weights, CqWeights, DiscreteFamily, EquationKind, WaveStep};
use crate::quadrature::{compensated_sum, CompensatedSum};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Test functional g applied to the (first component of the) terminal state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFunction {
    /// g(x) = ‖x‖².
    #[default]
    Quadratic,
    /// g(x) = cos⟨φ_m, x⟩ for the 1-based mode m.
    CosineMode(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    /// Mean of g(X̃(T)) − g(X(T)).
    pub estimate: f64,
    /// Sample standard deviation over √paths; 0 for a single path.
    pub stderr: f64,
    /// Mean of ‖X̃(T) − X(T)‖².
    pub strong_square: f64,
    pub strong_square_stderr: f64,
    pub paths: usize,
}

/// Per-setup data reused by every path.
struct Plan<'a> {
    prepared: &'a Prepared,
    horizon: f64,
    sqrt_q: Vec<f64>,
    stepping: Option<Stepping>,
}

struct Stepping {
    steps: usize,
    dt: f64,
    grid: TimeGrid,
    cq: Option<CqWeights>,
}

/// Terminal coefficients in the exact basis φ_k and the discrete basis ψ_j.
struct Terminal {
    exact: Vec<f64>,
    discrete: Vec<f64>,
}

impl<'a> Plan<'a> {
    fn new(setup: &Setup, prepared: &'a Prepared) -> Result<Self> {
        let stepping = match *prepared.model.family() {
            DiscreteFamily::TimeExact => None,
            DiscreteFamily::Stepped { steps, horizon } => {
                let dt = horizon / steps as f64;
                let cq = match setup.kind {
                    EquationKind::Volterra { rho } => Some(cq_weights(rho, dt, steps)?),
                    _ => None,
                };
                Some(Stepping { steps, dt, grid: TimeGrid::uniform(setup.horizon, steps)?, cq })
            }
        };
        Ok(Self { prepared, horizon: setup.horizon, sqrt_q: prepared.q.iter().map(|q| q.sqrt()).collect(), stepping })
    }

    fn transfer(&self) -> Option<&DMatrix<f64>> {
        self.prepared.transfer.as_ref()
    }

    /// Coefficients of v in the discrete basis: D v, or v itself.
    fn project(&self, v: &[f64]) -> Vec<f64> {
        match self.transfer() {
            None => v.to_vec(),
            Some(d) => (d * nalgebra::DVector::from_column_slice(v)).as_slice().to_vec(),
        }
    }

    fn exact_terminal(&self, path: &JumpPath) -> Vec<f64> {
        let p = self.prepared;
        let model = &p.model;
        (0..p.exact_eigenvalues.len())
            .map(|k| {
                let lambda = p.exact_eigenvalues[k];
                let t = model.exact_terminal(lambda);
                let noise = compensated_sum(
                    path.jumps(k).iter().map(|j| model.exact_response(lambda, self.horizon - j.time) * j.size),
                );
                t[0] * p.displacement[k] + t[1] * p.velocity[k] + self.sqrt_q[k] * noise
            })
            .collect()
    }

    fn discrete_terminal(&self, path: &JumpPath) -> Result<Vec<f64>> {
        let p = self.prepared;
        let (u0, v0) = (self.project(&p.displacement), self.project(&p.velocity));
        match &self.stepping {
            Some(stepping) => {
                let increments = increments_from_path(path, &stepping.grid)?;
                let scaled: Vec<Vec<f64>> =
                    increments.iter().zip(&self.sqrt_q).map(|(row, s)| row.iter().map(|f| s * f).collect()).collect();
                (0..p.discrete_eigenvalues.len())
                    .map(|j| {
                        let forcing: Vec<f64> = (0..stepping.steps)
                            .map(|n| match self.transfer() {
                                None => scaled[j][n],
                                Some(d) => compensated_sum((0..scaled.len()).map(|k| d[(j, k)] * scaled[k][n])),
                            })
                            .collect();
                        self.recurrence(stepping, p.discrete_eigenvalues[j], u0[j], v0[j], &forcing)
                    })
                    .collect()
            }
            None => {
                let model = &p.model;
                Ok((0..p.discrete_eigenvalues.len())
                    .map(|j| {
                        let lambda_h = p.discrete_eigenvalues[j];
                        let t = model.exact_terminal(lambda_h);
                        let mut noise = CompensatedSum::new();
                        for k in 0..p.exact_eigenvalues.len() {
                            let weight = match self.transfer() {
                                None if k != j => continue,
                                None => 1.0,
                                Some(d) => d[(j, k)],
                            };
                            let sum = compensated_sum(path.jumps(k).iter().map(|jump| {
                                model.discrete_response(lambda_h, self.horizon - jump.time, None) * jump.size
                            }));
                            noise.add(weight * self.sqrt_q[k] * sum);
                        }
                        t[0] * u0[j] + t[1] * v0[j] + noise.value()
                    })
                    .collect())
            }
        }
    }

    /// Steps one discrete mode through the scheme with per-cell forcing.
    fn recurrence(&self, stepping: &Stepping, lambda_h: f64, u0: f64, v0: f64, forcing: &[f64]) -> Result<f64> {
        match *self.prepared.model.kind() {
            EquationKind::Heat => {
                let denom = 1.0 + stepping.dt * lambda_h;
                Ok(forcing.iter().fold(u0, |x, f| (x + f) / denom))
            }
            EquationKind::Volterra { .. } => {
                let weights = stepping.cq.as_ref().expect("CQ weights exist for Volterra");
                Ok(*cq_mode_solve(lambda_h, weights, u0, forcing)?.last().expect("at least one step"))
            }
            EquationKind::Wave { scheme } => {
                let m = WaveStep::new(scheme, stepping.dt, lambda_h)?.power(1);
                let (mut u, mut v) = (u0, v0);
                for f in forcing {
                    let w = v + f;
                    (u, v) = (m[0][0] * u + m[0][1] * w, m[1][0] * u + m[1][1] * w);
                }
                Ok(u)
            }
        }
    }

    fn terminal(&self, path: &JumpPath) -> Result<Terminal> {
        Ok(Terminal { exact: self.exact_terminal(path), discrete: self.discrete_terminal(path)? })
    }

    /// g(X̃) − g(X) and ‖X̃ − X‖².
    fn sample(&self, g: TestFunction, t: &Terminal) -> (f64, f64) {
        let squares = |v: &[f64]| compensated_sum(v.iter().map(|x| x * x));
        let exact_norm = squares(&t.exact);
        let projected = self.project(&t.exact);
        let strong = compensated_sum(t.discrete.iter().zip(&projected).map(|(a, b)| (a - b) * (a - b)))
            + (exact_norm - squares(&projected)).max(0.0);
        let value = match g {
            TestFunction::Quadratic => squares(&t.discrete) - exact_norm,
            TestFunction::CosineMode(m) => {
                let tilde = match self.transfer() {
                    None => t.discrete[m - 1],
                    Some(d) => compensated_sum(t.discrete.iter().enumerate().map(|(j, x)| d[(j, m - 1)] * x)),
                };
                tilde.cos() - t.exact[m - 1].cos()
            }
        };
        (value, strong)
    }
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = compensated_sum(values.iter().copied()) / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = compensated_sum(values.iter().map(|v| (v - mean) * (v - mean))) / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Coupled Monte Carlo estimate of E g(X̃(T)) − E g(X(T)); path p draws from
/// the random streams (p, k), so results do not depend on scheduling.
pub fn mc_weak_error(setup: &Setup, g: TestFunction, paths: usize, seed: u64) -> Result<McEstimate> {
    if !matches!(setup.law, LevyLaw::CompoundPoisson { .. }) {
        return Err(Error::Unsupported(format!(
            "Monte Carlo needs jump times, which {} paths do not provide",
            setup.law.name()
        )));
    }
    if paths == 0 {
        return Err(invalid("Monte Carlo needs at least one path"));
    }
    if let TestFunction::CosineMode(m) = g {
        if m == 0 || m > setup.modes {
            return Err(invalid(format!("cosine test mode {m} outside 1..={}", setup.modes)));
        }
    }
    let prepared = Prepared::new(setup)?;
    let plan = Plan::new(setup, &prepared)?;
    let streams = RngStreams::new(seed);
    let samples: Vec<(f64, f64)> = (0..paths)
        .into_par_iter()
        .map(|p| {
            let path = sample_jump_path(&setup.law, setup.horizon, setup.modes, &streams, p as u64)?;
            Ok(plan.sample(g, &plan.terminal(&path)?))
        })
        .collect::<Result<_>>()?;
    let (values, strong): (Vec<f64>, Vec<f64>) = samples.into_iter().unzip();
    let (estimate, stderr) = mean_and_stderr(&values);
    let (strong_square, strong_square_stderr) = mean_and_stderr(&strong);
    Ok(McEstimate { estimate, stderr, strong_square, strong_square_stderr, paths })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{evaluate, SpaceDiscretization};
    use crate::noise::CovarianceSpec;
    use crate::propagators::RationalScheme;

    fn setup(kind: EquationKind, modes: usize) -> Setup {
        let cov = CovarianceSpec::power_law(1.0, 0.6).unwrap();
        let mut s = Setup::new(kind, modes, cov, LevyLaw::compound_poisson(4.0), 1.0);
        s.family = DiscreteFamily::Stepped { horizon: 1.0, steps: 16 };
        s.initial.displacement = vec![0.5];
        s
    }

    fn within(mc: &McEstimate, want: f64, width: f64) -> bool {
        (mc.estimate - want).abs() <= width * mc.stderr
    }

    #[test]
    fn quadratic_estimate_matches_deterministic_values() {
        let kinds = [
            EquationKind::Heat,
            EquationKind::Volterra { rho: 1.5 },
            EquationKind::Wave { scheme: RationalScheme::CrankNicolson },
        ];
        for kind in kinds {
            for space in [SpaceDiscretization::Spectral, SpaceDiscretization::Fem { cells: 8 }] {
                let mut s = setup(kind, 16);
                s.space = space;
                let det = evaluate(&s).unwrap();
                let mc = mc_weak_error(&s, TestFunction::Quadratic, 4000, 11).unwrap();
                assert!(within(&mc, det.weak_error_quadratic, 4.0), "{kind:?} {space:?}: {mc:?} vs {det:?}");
                let strong = det.strong_error.powi(2);
                assert!((mc.strong_square - strong).abs() <= 4.0 * mc.strong_square_stderr, "{kind:?} {space:?}");
            }
        }
    }

    #[test]
    fn time_exact_fem_estimate_matches_deterministic_values() {
        let mut s = setup(EquationKind::Heat, 16);
        s.family = DiscreteFamily::TimeExact;
        s.space = SpaceDiscretization::Fem { cells: 8 };
        let det = evaluate(&s).unwrap();
        let mc = mc_weak_error(&s, TestFunction::Quadratic, 4000, 3).unwrap();
        assert!(within(&mc, det.weak_error_quadratic, 4.0), "{mc:?} vs {det:?}");
    }

    #[test]
    fn injected_exact_scheme_gives_zero_samples() {
        let mut s = setup(EquationKind::Wave { scheme: RationalScheme::CrankNicolson }, 8);
        s.inject_exact = true;
        let mc = mc_weak_error(&s, TestFunction::CosineMode(1), 50, 1).unwrap();
        assert_eq!((mc.estimate, mc.stderr, mc.strong_square), (0.0, 0.0, 0.0));
    }

    #[test]
    fn single_path_is_reproducible() {
        let s = setup(EquationKind::Heat, 8);
        let a = mc_weak_error(&s, TestFunction::Quadratic, 1, 42).unwrap();
        let b = mc_weak_error(&s, TestFunction::Quadratic, 1, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.stderr, 0.0);
        let c = mc_weak_error(&s, TestFunction::Quadratic, 1, 43).unwrap();
        assert_ne!(a.estimate, c.estimate);
    }

    #[test]
    fn cosine_functional_is_stable_under_mode_doubling() {
        let s8 = setup(EquationKind::Heat, 8);
        let s16 = setup(EquationKind::Heat, 16);
        let a = mc_weak_error(&s8, TestFunction::CosineMode(1), 2000, 5).unwrap();
        let b = mc_weak_error(&s16, TestFunction::CosineMode(1), 2000, 5).unwrap();
        // Mode 1 uses the same random stream for both truncations.
        assert_eq!(a.estimate, b.estimate);
    }

    #[test]
    fn rejects_laws_without_jump_times() {
        let mut s = setup(EquationKind::Heat, 4);
        s.law = LevyLaw::VarianceGamma { variance_rate: 0.5 };
        assert!(matches!(mc_weak_error(&s, TestFunction::Quadratic, 10, 0), Err(Error::Unsupported(_))));
        let s = setup(EquationKind::Heat, 4);
        assert!(mc_weak_error(&s, TestFunction::CosineMode(5), 10, 0).is_err());
        assert!(mc_weak_error(&s, TestFunction::Quadratic, 0, 0).is_err());
    }

    #[test]
    fn test_function_serde_forms() {
        let q: TestFunction = serde_json::from_str("\"quadratic\"").unwrap();
        assert_eq!(q, TestFunction::Quadratic);
        let c: TestFunction = serde_json::from_str("{\"cosine_mode\": 2}").unwrap();
        assert_eq!(c, TestFunction::CosineMode(2));
    }
}
