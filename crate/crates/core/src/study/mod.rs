//! Refinement studies: a ladder of resolutions, errors per level from the
//! engine, log-log rate fits and CSV output.

mod config;
mod csv;
mod fit;
pub mod presets;

pub use config::{
    Axis, CovarianceConfig, DyadicRange, InitialConfig, Ladder, McConfig, SpaceConfig, StudyConfig, TimeConfig,
    SCHEMA_VERSION,
};
pub use csv::{
    emit_csv, format_float, parse_csv, to_csv_string, StudyRow, StudyTable, COLUMNS, FITTED_STRONG, FITTED_WEAK,
};
pub use fit::{expected_for, expected_rates, fit_log_log, ExpectedRates, RateFit, ERROR_FLOOR, SLOPE_TOLERANCE};

use crate::engine::{evaluate, mc_weak_error, InitialData, Setup, SpaceDiscretization};
use crate::error::{Error, Result};
use crate::noise::{decay_for_beta, hs_condition, CovarianceSpec};
use crate::propagators::{DiscreteFamily, EquationKind};
use crate::spectral::DirichletSpectrum;
use rayon::prelude::*;

/// Tail policy: truncation is considered negligible below this ratio of the
/// covariance tail bound to the retained sum.
pub const TAIL_POLICY: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Column {
    Strong,
    WeakQuadratic,
    Representation,
    MonteCarlo,
}

/// Rate fit of one table column against the resolution column.
pub fn fit_rate(rows: &[StudyRow], column: Column) -> Result<RateFit> {
    let resolutions: Vec<f64> = rows.iter().map(|r| r.resolution).collect();
    let errors: Vec<f64> = rows
        .iter()
        .map(|r| match column {
            Column::Strong => r.strong,
            Column::WeakQuadratic => r.weak_quad,
            Column::Representation => r.representation,
            Column::MonteCarlo => r.mc_estimate.unwrap_or(f64::NAN),
        })
        .collect();
    fit_log_log(&resolutions, &errors)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyResult {
    pub table: StudyTable,
    pub expected: ExpectedRates,
    /// Expected weak and strong exponents along the study axis.
    pub expected_weak: f64,
    pub expected_strong: f64,
    pub weak_fit: Option<RateFit>,
    pub strong_fit: Option<RateFit>,
    pub decay: f64,
    /// Covariance tail bound over the retained sum at (β, ρ).
    pub tail_ratio: f64,
}

impl StudyResult {
    /// Fitted weak slope at least expected − 0.15.
    pub fn weak_passes(&self) -> bool {
        self.weak_fit.is_some_and(|f| f.slope >= self.expected_weak - SLOPE_TOLERANCE)
    }

    /// Fitted strong slope within ±0.15 of expected.
    pub fn strong_passes(&self) -> bool {
        self.strong_fit.is_some_and(|f| (f.slope - self.expected_strong).abs() <= SLOPE_TOLERANCE)
    }

    pub fn passes(&self) -> bool {
        self.weak_passes() && self.strong_passes()
    }

    pub fn tail_within_policy(&self) -> bool {
        self.tail_ratio < TAIL_POLICY
    }
}

/// Cells per unit length for a mesh width, if it is the reciprocal of an
/// integer.
fn cells_for(h: f64) -> Option<usize> {
    let n = (1.0 / h).round();
    ((n * h - 1.0).abs() <= 1e-12 && n >= 2.0).then_some(n as usize)
}

fn steps_for(dt: f64, horizon: f64) -> Option<usize> {
    let n = (horizon / dt).round();
    ((n * dt - horizon).abs() <= 1e-12 * horizon && n >= 1.0).then_some(n as usize)
}

/// Exponent a with λ^a the inverse time scale of a mode.
fn time_scale_exponent(kind: &EquationKind) -> f64 {
    match kind {
        EquationKind::Heat => 1.0,
        EquationKind::Volterra { rho } => 1.0 / rho,
        EquationKind::Wave { .. } => 0.5,
    }
}

fn decay_of(config: &StudyConfig) -> f64 {
    config.covariance.decay.unwrap_or_else(|| decay_for_beta(config.beta, config.equation.rho()))
}

/// Engine setups for every ladder level, validated before any computation.
pub fn level_setups(config: &StudyConfig) -> Result<Vec<Setup>> {
    config.check()?;
    let covariance = CovarianceSpec::power_law(config.covariance.amplitude, decay_of(config))?;
    let mut base = Setup::new(config.equation, config.modes, covariance, config.noise.clone(), config.horizon);
    base.beta = config.beta;
    base.initial =
        InitialData { displacement: config.initial.displacement.clone(), velocity: config.initial.velocity.clone() };
    base.inject_exact = config.inject_exact;
    base.quadrature_nodes = config.quadrature_nodes;
    let ladder = config.ladder.values();
    let lambda_top = DirichletSpectrum::unit(config.modes)?.eigenvalue(config.modes);
    let setups: Vec<Setup> = ladder
        .iter()
        .map(|&value| {
            let mut s = base.clone();
            match config.axis {
                Axis::Temporal => {
                    let steps = steps_for(value, config.horizon).ok_or_else(|| {
                        Error::Config(format!("time step {value} does not divide the horizon {}", config.horizon))
                    })?;
                    s.family = DiscreteFamily::Stepped { horizon: config.horizon, steps };
                    s.space = match config.space {
                        SpaceConfig::Spectral => SpaceDiscretization::Spectral,
                        SpaceConfig::Fem { cells } => SpaceDiscretization::Fem { cells },
                    };
                }
                Axis::Spatial => {
                    let cells = cells_for(value)
                        .ok_or_else(|| Error::Config(format!("mesh width {value} is not 1/n for an integer n ≥ 2")))?;
                    if cells - 1 > config.modes {
                        return Err(Error::Config(format!(
                            "mesh width {value} has {} discrete modes but only {} spectral modes are kept; \
                             raise modes to at least {} or drop the finer levels",
                            cells - 1,
                            config.modes,
                            cells - 1
                        )));
                    }
                    s.space = SpaceDiscretization::Fem { cells };
                    s.family = match config.time {
                        TimeConfig::Exact => DiscreteFamily::TimeExact,
                        TimeConfig::Steps(steps) => DiscreteFamily::Stepped { horizon: config.horizon, steps },
                    };
                }
            }
            s.validate()?;
            Ok(s)
        })
        .collect::<Result<_>>()?;
    if config.axis == Axis::Temporal {
        // The finest step must not resolve every retained mode, or the rate
        // reflects the truncated smooth problem.
        let finest = ladder[ladder.len() - 1];
        let scale = finest * lambda_top.powf(time_scale_exponent(&config.equation));
        if scale < 1.0 {
            return Err(Error::Config(format!(
                "finest step {finest} resolves all {} modes (Δt·λ_K^a = {scale:.3}); raise modes or coarsen the ladder",
                config.modes
            )));
        }
    }
    Ok(setups)
}

pub fn run_study(config: &StudyConfig) -> Result<StudyResult> {
    let setups = level_setups(config)?;
    let ladder = config.ladder.values();
    let decay = decay_of(config);
    let mut rows: Vec<StudyRow> = setups
        .par_iter()
        .enumerate()
        .map(|(level, setup)| {
            let report = evaluate(setup)?;
            let mc = match config.monte_carlo {
                Some(mc) => Some(mc_weak_error(setup, config.test_function, mc.paths, mc.seed)?),
                None => None,
            };
            Ok(StudyRow {
                level,
                resolution: ladder[level],
                strong: report.strong_error,
                weak_quad: report.weak_error_quadratic,
                representation: report.representation_value,
                mc_estimate: mc.map(|m| m.estimate),
                mc_stderr: mc.map(|m| m.stderr),
                fitted: 0,
            })
        })
        .collect::<Result<_>>()?;
    for r in &mut rows {
        if r.weak_quad.abs() >= ERROR_FLOOR {
            r.fitted |= FITTED_WEAK;
        }
        if r.strong.abs() >= ERROR_FLOOR {
            r.fitted |= FITTED_STRONG;
        }
    }
    let weak_fit = fit_rate(&rows, Column::WeakQuadratic).ok();
    let strong_fit = fit_rate(&rows, Column::Strong).ok();
    let expected = expected_for(&config.equation, config.beta);
    let (expected_weak, expected_strong) = match config.axis {
        Axis::Spatial => (expected.spatial_weak, expected.spatial_strong),
        Axis::Temporal => (expected.temporal_weak, expected.temporal_strong),
    };
    let spec = DirichletSpectrum::unit(config.modes)?;
    let covariance = CovarianceSpec::power_law(config.covariance.amplitude, decay)?;
    let hs = hs_condition(&spec, &covariance, config.beta, config.equation.rho())?;
    let tail_ratio = match hs.tail_bound {
        Some(t) if hs.partial_sum > 0.0 => t / hs.partial_sum,
        _ => 0.0,
    };
    let slope = |f: &Option<RateFit>| f.map(|f| format_float(f.slope)).unwrap_or_else(|| "none".into());
    let metadata: Vec<(String, String)> = vec![
        ("name", config.name.clone()),
        ("equation", serde_json::to_string(&config.equation).expect("equation serializes")),
        ("axis", format!("{:?}", config.axis).to_lowercase()),
        ("beta", format_float(config.beta)),
        ("decay", format_float(decay)),
        ("modes", config.modes.to_string()),
        ("noise", config.noise.name().to_string()),
        ("seed", config.monte_carlo.map(|m| m.seed.to_string()).unwrap_or_else(|| "none".into())),
        ("mc_paths", config.monte_carlo.map(|m| m.paths.to_string()).unwrap_or_else(|| "0".into())),
        ("tail_ratio", format_float(tail_ratio)),
        ("tail_within_policy", (tail_ratio < TAIL_POLICY).to_string()),
        ("expected_weak", format_float(expected_weak)),
        ("expected_strong", format_float(expected_strong)),
        ("fitted_weak_slope", slope(&weak_fit)),
        ("fitted_strong_slope", slope(&strong_fit)),
        ("fitted", "bit 1 marks levels in the weak fit, bit 2 levels in the strong fit".into()),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    Ok(StudyResult {
        table: StudyTable { metadata, rows },
        expected,
        expected_weak,
        expected_strong,
        weak_fit,
        strong_fit,
        decay,
        tail_ratio,
    })
}
