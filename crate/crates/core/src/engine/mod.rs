//! Strong and weak errors of the discrete families against the exact ones.
//!
//! Exact modes are the Dirichlet eigenfunctions φ_k; discrete modes are the
//! L²-orthonormal discrete eigenfunctions ψ_j (equal to φ_j for the spectral
//! Galerkin space), linked by d_jk = ⟨ψ_j, φ_k⟩. With r_j(s) and e_k(s) the
//! first components of Ẽ(s)B and E(s)B on a mode, Itô's isometry reduces
//! every noise term to
//!
//!   ∫‖Ẽ(s)Bφ_k‖² = Σ_j d_jk² ∫r_j²,   ∫⟨Ẽ(s)Bφ_k, E(s)Bφ_k⟩ = Σ_j d_jk² ∫r_j e_k.

mod kernels;
mod mc;
mod profile;
mod sweep;

pub use mc::{mc_weak_error, McEstimate, TestFunction};
pub use profile::{hs_time_integral, propagator_error_profile, ProfilePoint};
pub use sweep::{representation_sweep, run_sweep, SweepCase, SweepOutcome, REPRESENTATION_TOLERANCE};

use crate::error::{invalid, Error, Result};
use crate::noise::{hs_condition, Convergence, CovarianceSpec, LevyLaw};
use crate::propagators::{i_stability_check, stability_grid, DiscreteFamily, EquationKind};
use crate::quadrature::{CompensatedSum, GaussLegendre};
use crate::spectral::{assemble_fem, transfer_matrix, DirichletSpectrum};
use kernels::{ModeData, TimeModel};
use nalgebra::DMatrix;
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceDiscretization {
    /// Λ_h = Λ truncated at the mode count.
    Spectral,
    /// Uniform piecewise-linear elements with `cells` cells.
    Fem { cells: usize },
}

/// Deterministic initial data in spectral coefficients; `velocity` is only
/// meaningful for the wave equation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct InitialData {
    pub displacement: Vec<f64>,
    pub velocity: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Setup {
    pub kind: EquationKind,
    pub modes: usize,
    pub space: SpaceDiscretization,
    pub family: DiscreteFamily,
    pub covariance: CovarianceSpec,
    pub law: LevyLaw,
    pub horizon: f64,
    pub initial: InitialData,
    /// Regularity the covariance must support.
    pub beta: f64,
    /// Gauss nodes per panel for integrals without closed form.
    pub quadrature_nodes: usize,
    /// Replace Ẽ by E; every error then vanishes.
    pub inject_exact: bool,
}

impl Setup {
    pub fn new(kind: EquationKind, modes: usize, covariance: CovarianceSpec, law: LevyLaw, horizon: f64) -> Self {
        Self {
            kind,
            modes,
            space: SpaceDiscretization::Spectral,
            family: DiscreteFamily::TimeExact,
            covariance,
            law,
            horizon,
            initial: InitialData::default(),
            beta: 0.0,
            quadrature_nodes: 8,
            inject_exact: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.kind.validate()?;
        self.law.validate()?;
        if self.modes == 0 {
            return Err(invalid("mode count must be positive"));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(invalid(format!("horizon must be positive, got {}", self.horizon)));
        }
        if self.quadrature_nodes == 0 {
            return Err(invalid("quadrature needs at least one node"));
        }
        if let SpaceDiscretization::Fem { cells } = self.space {
            if cells < 2 {
                return Err(invalid(format!("FEM needs at least 2 cells, got {cells}")));
            }
            if cells - 1 > self.modes {
                return Err(invalid(format!(
                    "FEM with {cells} cells has {} discrete modes but only {} spectral modes are kept",
                    cells - 1,
                    self.modes
                )));
            }
        }
        if let DiscreteFamily::Stepped { horizon, steps } = self.family {
            if steps == 0 {
                return Err(invalid("stepped family needs at least one step"));
            }
            if (horizon - self.horizon).abs() > 1e-12 * self.horizon {
                return Err(invalid(format!("family horizon {horizon} differs from {}", self.horizon)));
            }
        }
        if self.initial.displacement.len() > self.modes || self.initial.velocity.len() > self.modes {
            return Err(invalid("initial data has more coefficients than modes"));
        }
        if !self.kind.is_wave() && self.initial.velocity.iter().any(|v| *v != 0.0) {
            return Err(invalid("initial velocity only applies to the wave equation"));
        }
        if let EquationKind::Wave { scheme } = self.kind {
            let report = i_stability_check(scheme, &stability_grid());
            if !report.passed {
                return Err(Error::Unstable { max_modulus: report.max_modulus });
            }
        }
        let spec = DirichletSpectrum::unit(self.modes)?;
        let hs = hs_condition(&spec, &self.covariance, self.beta, self.kind.rho())?;
        if hs.convergence == Convergence::Diverges {
            return Err(Error::Divergent { exponent: hs.exponent.unwrap_or(f64::NAN) });
        }
        Ok(())
    }
}

/// Deterministic errors of one setup.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub strong_error: f64,
    pub weak_error_quadratic: f64,
    pub representation_value: f64,
}

/// Sign of the Ψ2 term in the representation; `Flipped` exists to check that
/// the representation check detects a wrong sign.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Psi2Sign {
    #[default]
    Standard,
    Flipped,
}

/// Mode-summed ingredients shared by the three deterministic quantities.
#[derive(Debug, Clone, Copy, Default)]
struct Totals {
    /// ‖P¹Ẽ(T)X₀‖², ‖P¹E(T)X₀‖², ‖P¹(Ẽ(T) − E(T))X₀‖².
    initial_discrete: f64,
    initial_exact: f64,
    initial_difference: f64,
    /// Σ q_k ∫‖Ẽ(s)Bφ_k‖² and Σ q_k ∫‖E(s)Bφ_k‖².
    noise_discrete: f64,
    noise_exact: f64,
    /// Σ q_k ∫‖F(s)φ_k‖² and Σ q_k ∫⟨E(s)Bφ_k, F(s)φ_k⟩, F = (Ẽ − E)B.
    noise_difference: f64,
    noise_cross: f64,
}

struct Prepared {
    model: TimeModel,
    exact_eigenvalues: Vec<f64>,
    q: Vec<f64>,
    discrete_eigenvalues: Vec<f64>,
    /// None for the identity transfer of the spectral space.
    transfer: Option<DMatrix<f64>>,
    displacement: Vec<f64>,
    velocity: Vec<f64>,
}

impl Prepared {
    fn new(setup: &Setup) -> Result<Self> {
        setup.validate()?;
        let spec = DirichletSpectrum::unit(setup.modes)?;
        let q = setup.covariance.eigenvalues(&spec)?;
        let exact_eigenvalues = spec.eigenvalues().to_vec();
        let (space, family) = if setup.inject_exact {
            (SpaceDiscretization::Spectral, DiscreteFamily::TimeExact)
        } else {
            (setup.space, setup.family)
        };
        let (discrete_eigenvalues, transfer) = match space {
            SpaceDiscretization::Spectral => (exact_eigenvalues.clone(), None),
            SpaceDiscretization::Fem { cells } => {
                let fem = assemble_fem(cells)?;
                let d = transfer_matrix(&fem, &spec)?;
                (fem.eigenvalues().to_vec(), Some(d))
            }
        };
        let lambda_max = exact_eigenvalues.iter().chain(&discrete_eigenvalues).fold(0.0, |a: f64, b| a.max(*b));
        let model = TimeModel::new(setup.kind, setup.horizon, family, lambda_max, setup.quadrature_nodes)?;
        let pad = |v: &[f64]| {
            let mut out = v.to_vec();
            out.resize(setup.modes, 0.0);
            out
        };
        Ok(Self {
            model,
            exact_eigenvalues,
            q,
            discrete_eigenvalues,
            transfer,
            displacement: pad(&setup.initial.displacement),
            velocity: pad(&setup.initial.velocity),
        })
    }

    fn discrete_modes(&self) -> Result<Vec<ModeData>> {
        self.discrete_eigenvalues
            .par_iter()
            .map(|&l| self.model.discrete_mode(l).map(|m| self.model.with_node_values(m)))
            .collect()
    }

    fn totals(&self) -> Result<Totals> {
        match &self.transfer {
            None => self.spectral_totals(),
            Some(d) => self.fem_totals(d),
        }
    }

    fn spectral_totals(&self) -> Result<Totals> {
        let rows: Vec<[f64; 7]> = (0..self.exact_eigenvalues.len())
            .into_par_iter()
            .map(|k| {
                let lambda = self.exact_eigenvalues[k];
                let exact = self.model.exact_mode(lambda);
                let discrete = self.model.with_node_values(self.model.discrete_mode(lambda)?);
                let cross = self.model.cross(&discrete, &exact);
                let (u, v) = (self.displacement[k], self.velocity[k]);
                let xd = discrete.terminal[0] * u + discrete.terminal[1] * v;
                let xe = exact.terminal[0] * u + exact.terminal[1] * v;
                let q = self.q[k];
                Ok([
                    xd * xd,
                    xe * xe,
                    (xd - xe) * (xd - xe),
                    q * discrete.square,
                    q * exact.square,
                    q * (discrete.square - 2.0 * cross + exact.square),
                    q * (cross - exact.square),
                ])
            })
            .collect::<Result<_>>()?;
        Ok(sum_rows(&rows))
    }

    fn fem_totals(&self, d: &DMatrix<f64>) -> Result<Totals> {
        let discrete = self.discrete_modes()?;
        let rows: Vec<[f64; 7]> = (0..self.exact_eigenvalues.len())
            .into_par_iter()
            .map(|k| {
                let exact = self.model.exact_mode(self.exact_eigenvalues[k]);
                let mut own = CompensatedSum::new();
                let mut cross = CompensatedSum::new();
                for (j, mode) in discrete.iter().enumerate() {
                    let w = d[(j, k)] * d[(j, k)];
                    own.add(w * mode.square);
                    cross.add(w * self.model.cross(mode, &exact));
                }
                let (own, cross) = (own.value(), cross.value());
                let q = self.q[k];
                [
                    0.0,
                    0.0,
                    0.0,
                    q * own,
                    q * exact.square,
                    q * (own - 2.0 * cross + exact.square),
                    q * (cross - exact.square),
                ]
            })
            .collect();
        let mut totals = sum_rows(&rows);
        let initial = self.fem_initial(d, &discrete);
        totals.initial_discrete = initial[0];
        totals.initial_exact = initial[1];
        totals.initial_difference = initial[2];
        Ok(totals)
    }

    /// ‖x̃‖², ‖x‖², ‖x̃ − x‖² for x̃ = Σ_j x̃_j ψ_j and x = Σ_k x_k φ_k.
    fn fem_initial(&self, d: &DMatrix<f64>, discrete: &[ModeData]) -> [f64; 3] {
        let project = |v: &[f64]| d * nalgebra::DVector::from_column_slice(v);
        let (pu, pv) = (project(&self.displacement), project(&self.velocity));
        let exact: Vec<f64> = (0..self.exact_eigenvalues.len())
            .map(|k| {
                let t = self.model.exact_terminal(self.exact_eigenvalues[k]);
                t[0] * self.displacement[k] + t[1] * self.velocity[k]
            })
            .collect();
        let p_exact = project(&exact);
        let mut tilde_sq = CompensatedSum::new();
        let mut diff_sq = CompensatedSum::new();
        let mut proj_sq = CompensatedSum::new();
        for (j, mode) in discrete.iter().enumerate() {
            let xj = mode.terminal[0] * pu[j] + mode.terminal[1] * pv[j];
            tilde_sq.add(xj * xj);
            diff_sq.add((xj - p_exact[j]) * (xj - p_exact[j]));
            proj_sq.add(p_exact[j] * p_exact[j]);
        }
        let exact_sq: f64 = crate::quadrature::compensated_sum(exact.iter().map(|x| x * x));
        // x − P_h x is orthogonal to the discrete space.
        let residual = (exact_sq - proj_sq.value()).max(0.0);
        [tilde_sq.value(), exact_sq, diff_sq.value() + residual]
    }
}

fn sum_rows(rows: &[[f64; 7]]) -> Totals {
    let mut acc = [CompensatedSum::new(); 7];
    for row in rows {
        for (a, v) in acc.iter_mut().zip(row) {
            a.add(*v);
        }
    }
    let v: Vec<f64> = acc.iter().map(|a| a.value()).collect();
    Totals {
        initial_discrete: v[0],
        initial_exact: v[1],
        initial_difference: v[2],
        noise_discrete: v[3],
        noise_exact: v[4],
        noise_difference: v[5],
        noise_cross: v[6],
    }
}

impl Totals {
    fn strong(&self) -> f64 {
        (self.initial_difference + self.noise_difference).max(0.0).sqrt()
    }

    fn weak(&self) -> f64 {
        (self.initial_discrete - self.initial_exact) + (self.noise_discrete - self.noise_exact)
    }

    /// Quadratic G has G'' = 2I, so Ψ1 integrates 2(1 − θ)‖F y‖² and Ψ2
    /// integrates 2⟨E B y, F y⟩ over θ ∈ [0, 1]; the jump-measure integral of
    /// each collapses to Σ_k (∫ξ²ν_k(dξ)) q_k ‖·φ_k‖².
    fn representation(&self, jump_second_moment: f64, sign: Psi2Sign) -> f64 {
        let rule = GaussLegendre::new(2);
        let psi1 = rule.integrate(0.0, 1.0, |theta| 2.0 * (1.0 - theta));
        let psi2 = rule.integrate(0.0, 1.0, |_| 2.0);
        let psi2 = match sign {
            Psi2Sign::Standard => psi2,
            Psi2Sign::Flipped => -psi2,
        };
        (self.initial_discrete - self.initial_exact)
            + jump_second_moment * (psi1 * self.noise_difference + psi2 * self.noise_cross)
    }
}

/// All deterministic quantities from one pass over the modes.
pub fn evaluate(setup: &Setup) -> Result<ErrorReport> {
    evaluate_with(setup, Psi2Sign::Standard)
}

#[doc(hidden)]
pub fn evaluate_with(setup: &Setup, sign: Psi2Sign) -> Result<ErrorReport> {
    let totals = Prepared::new(setup)?.totals()?;
    Ok(ErrorReport {
        strong_error: totals.strong(),
        weak_error_quadratic: totals.weak(),
        representation_value: totals.representation(setup.law.jump_second_moment(), sign),
    })
}

/// ( ‖(Ẽ(T) − E(T))X₀‖² + Σ_k q_k ∫₀ᵀ ‖(Ẽ − E)(s)Bφ_k‖² ds )^{1/2}, first
/// component for the wave equation.
pub fn strong_error(setup: &Setup) -> Result<f64> {
    Ok(evaluate(setup)?.strong_error)
}

/// E‖X̃(T)‖² − E‖X(T)‖² (first component for the wave equation).
pub fn weak_error_quadratic(setup: &Setup) -> Result<f64> {
    Ok(evaluate(setup)?.weak_error_quadratic)
}

/// The weak error of g = ‖·‖² through the error representation.
pub fn representation_quadratic(setup: &Setup) -> Result<f64> {
    Ok(evaluate(setup)?.representation_value)
}

/// Relative discrepancy |representation − weak| / max(|weak|, 1e−14).
pub fn representation_discrepancy(report: &ErrorReport) -> f64 {
    (report.representation_value - report.weak_error_quadratic).abs() / report.weak_error_quadratic.abs().max(1e-14)
}
