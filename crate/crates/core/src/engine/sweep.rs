//! The fixed set of setups on which the error representation is checked
//! against the direct weak error.

use super::{evaluate_with, representation_discrepancy, Psi2Sign, Setup, SpaceDiscretization};
use crate::error::Result;
use crate::noise::{CovarianceSpec, LevyLaw};
use crate::propagators::{DiscreteFamily, EquationKind, RationalScheme};
use rayon::prelude::*;

/// Largest relative discrepancy the representation check accepts.
pub const REPRESENTATION_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCase {
    pub label: String,
    pub setup: Setup,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOutcome {
    pub weak_error_quadratic: f64,
    pub representation_value: f64,
    pub discrepancy: f64,
}

/// Three equations × two covariance decays × {spectral space with 16 steps,
/// 16-cell FEM with exact time}, with nonzero initial data.
pub fn representation_sweep() -> Vec<SweepCase> {
    let kinds = [
        EquationKind::Heat,
        EquationKind::Volterra { rho: 1.5 },
        EquationKind::Wave { scheme: RationalScheme::CrankNicolson },
    ];
    let discretizations = [
        ("spectral/steps16", SpaceDiscretization::Spectral, DiscreteFamily::Stepped { horizon: 1.0, steps: 16 }),
        ("fem16/exact", SpaceDiscretization::Fem { cells: 16 }, DiscreteFamily::TimeExact),
    ];
    let mut cases = Vec::with_capacity(12);
    for kind in kinds {
        for decay in [0.3, 0.8] {
            for (name, space, family) in discretizations {
                let cov = CovarianceSpec::power_law(1.0, decay).expect("positive decay");
                let mut setup = Setup::new(kind, 64, cov, LevyLaw::VarianceGamma { variance_rate: 0.5 }, 1.0);
                setup.space = space;
                setup.family = family;
                setup.quadrature_nodes = 16;
                setup.initial.displacement = vec![0.5, -0.2];
                cases.push(SweepCase { label: format!("{}/decay{decay}/{name}", kind.name()), setup });
            }
        }
    }
    cases
}

/// Representation and direct weak error for each case, in order.
pub fn run_sweep(cases: &[SweepCase], sign: Psi2Sign) -> Result<Vec<SweepOutcome>> {
    cases
        .par_iter()
        .map(|c| {
            let r = evaluate_with(&c.setup, sign)?;
            Ok(SweepOutcome {
                weak_error_quadratic: r.weak_error_quadratic,
                representation_value: r.representation_value,
                discrepancy: representation_discrepancy(&r),
            })
        })
        .collect()
}
