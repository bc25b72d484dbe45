//! Per-mode time data: noise responses r(s) of Ẽ(s)B and e(s) of E(s)B,
//! their squared integrals over [0, T], cell integrals and cross integrals.

use crate::error::Result;
use crate::propagators::{
    be_mode_power, cq_homogeneous, cq_weights, step_index, CqWeights, DiscreteFamily, EquationKind, MittagLeffler,
    WaveStep,
};
use crate::quadrature::{compensated_sum, GaussLegendre};

/// Panel growth ratio of the graded rule used for Mittag-Leffler integrands.
const GRADING: f64 = 1.03;

/// Composite Gauss rule on [0, T] graded geometrically towards 0 and, for
/// stepped families, aligned with the cell boundaries.
#[derive(Debug, Clone)]
pub(crate) struct GradedRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// (first node, end node) per cell; empty for unstepped rules.
    cells: Vec<(usize, usize)>,
}

impl GradedRule {
    /// `finest` is the smallest time scale to resolve.
    pub(crate) fn new(horizon: f64, steps: Option<usize>, finest: f64, order: usize) -> Self {
        let mut breaks = vec![0.0, horizon];
        let mut s = finest.min(horizon);
        while s < horizon {
            breaks.push(s);
            s *= GRADING;
        }
        if let Some(n) = steps {
            let dt = horizon / n as f64;
            breaks.extend((1..n).map(|i| i as f64 * dt));
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * horizon);
        let gauss = GaussLegendre::new(order);
        let mut nodes = Vec::with_capacity(breaks.len() * order);
        let mut weights = Vec::with_capacity(breaks.len() * order);
        let mut cells = Vec::new();
        let dt = steps.map(|n| horizon / n as f64);
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (half, mid) = (0.5 * (b - a), 0.5 * (a + b));
            if let (Some(dt), Some(n)) = (dt, steps) {
                let cell = step_index(mid, dt, n) - 1;
                if cells.len() <= cell {
                    cells.resize(cell + 1, (nodes.len(), nodes.len()));
                }
                cells[cell].1 = nodes.len() + order;
            }
            for (x, wt) in gauss.nodes().iter().zip(gauss.weights()) {
                nodes.push(mid + half * x);
                weights.push(half * wt);
            }
        }
        Self { nodes, weights, cells }
    }

    pub(crate) fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub(crate) fn integrate_product(&self, a: &[f64], b: &[f64]) -> f64 {
        compensated_sum(self.weights.iter().zip(a).zip(b).map(|((w, x), y)| w * x * y))
    }

    fn cell_integrals(&self, values: &[f64]) -> Vec<f64> {
        self.cells.iter().map(|&(lo, hi)| compensated_sum((lo..hi).map(|i| self.weights[i] * values[i]))).collect()
    }
}

/// S(c) = ∫₀ᵀ cos(c s) ds = T·sinc(cT).
fn cosine_integral(c: f64, horizon: f64) -> f64 {
    let x = c * horizon;
    if x.abs() < 1e-4 {
        horizon * (1.0 - x * x / 6.0)
    } else {
        x.sin() / c
    }
}

/// Time data of one mode, exact or discrete.
#[derive(Debug, Clone)]
pub(crate) struct ModeData {
    pub lambda: f64,
    /// ∫₀ᵀ response².
    pub square: f64,
    /// First row of the factor at T: (displacement, velocity) weights.
    pub terminal: [f64; 2],
    /// Stepped families: discrete modes hold the cell values r_n, exact modes
    /// the cell integrals of e.
    pub cells: Vec<f64>,
    /// Node values on the graded rule when the cross integral needs them.
    pub node_values: Vec<f64>,
}

/// Evaluates responses and their integrals for one equation, horizon and
/// discrete family.
#[derive(Debug, Clone)]
pub(crate) struct TimeModel {
    kind: EquationKind,
    horizon: f64,
    family: DiscreteFamily,
    ml: Option<MittagLeffler>,
    rule: Option<GradedRule>,
    weights: Option<CqWeights>,
}

impl TimeModel {
    /// `lambda_max` bounds every eigenvalue that will be evaluated.
    pub(crate) fn new(
        kind: EquationKind,
        horizon: f64,
        family: DiscreteFamily,
        lambda_max: f64,
        order: usize,
    ) -> Result<Self> {
        let steps = match family {
            DiscreteFamily::TimeExact => None,
            DiscreteFamily::Stepped { steps, .. } => Some(steps),
        };
        let (ml, rule, weights) = match kind {
            EquationKind::Volterra { rho } => {
                // E_ρ(−λ s^ρ) varies on the scale λ^{−1/ρ}.
                let finest = 1e-3 * lambda_max.powf(-1.0 / rho);
                let weights = match steps {
                    Some(n) => Some(cq_weights(rho, horizon / n as f64, n)?),
                    None => None,
                };
                (Some(MittagLeffler::new(rho)?), Some(GradedRule::new(horizon, steps, finest, order)), weights)
            }
            _ => (None, None, None),
        };
        Ok(Self { kind, horizon, family, ml, rule, weights })
    }

    pub(crate) fn kind(&self) -> &EquationKind {
        &self.kind
    }

    pub(crate) fn family(&self) -> &DiscreteFamily {
        &self.family
    }

    fn steps(&self) -> Option<(usize, f64)> {
        match self.family {
            DiscreteFamily::TimeExact => None,
            DiscreteFamily::Stepped { steps, horizon } => Some((steps, horizon / steps as f64)),
        }
    }

    /// e(s): first component of E(s)B on a mode.
    pub(crate) fn exact_response(&self, lambda: f64, s: f64) -> f64 {
        match self.kind {
            EquationKind::Heat => (-lambda * s).exp(),
            EquationKind::Volterra { rho } => self.ml().eval_scaled(lambda.powf(1.0 / rho) * s),
            EquationKind::Wave { .. } => {
                let w = lambda.sqrt();
                (w * s).sin() / w
            }
        }
    }

    /// First row of E(T).
    pub(crate) fn exact_terminal(&self, lambda: f64) -> [f64; 2] {
        let t = self.horizon;
        match self.kind {
            EquationKind::Heat => [(-lambda * t).exp(), 0.0],
            EquationKind::Volterra { rho } => [self.ml().eval_scaled(lambda.powf(1.0 / rho) * t), 0.0],
            EquationKind::Wave { .. } => {
                let w = lambda.sqrt();
                let (s, c) = (w * t).sin_cos();
                [c, s / w]
            }
        }
    }

    fn ml(&self) -> &MittagLeffler {
        self.ml.as_ref().expect("Mittag-Leffler evaluator exists for Volterra models")
    }

    fn rule(&self) -> &GradedRule {
        self.rule.as_ref().expect("graded rule exists for Volterra models")
    }

    /// ∫₀ᵀ e_{λ1} e_{λ2} in closed form (heat, wave).
    fn closed_cross(&self, l1: f64, l2: f64) -> f64 {
        let t = self.horizon;
        match self.kind {
            EquationKind::Heat => {
                let sum = l1 + l2;
                -(-sum * t).exp_m1() / sum
            }
            EquationKind::Wave { .. } => {
                let (w1, w2) = (l1.sqrt(), l2.sqrt());
                0.5 * (cosine_integral(w1 - w2, t) - cosine_integral(w1 + w2, t)) / (w1 * w2)
            }
            EquationKind::Volterra { .. } => unreachable!("Volterra cross integrals use the graded rule"),
        }
    }

    fn exact_node_values(&self, lambda: f64) -> Vec<f64> {
        self.rule().nodes().iter().map(|&s| self.exact_response(lambda, s)).collect()
    }

    /// Exact-family data on the mode with eigenvalue `lambda`.
    pub(crate) fn exact_mode(&self, lambda: f64) -> ModeData {
        let terminal = self.exact_terminal(lambda);
        let stepped = self.steps();
        match self.kind {
            EquationKind::Volterra { .. } => {
                let values = self.exact_node_values(lambda);
                let square = self.rule().integrate_product(&values, &values);
                let cells = if stepped.is_some() { self.rule().cell_integrals(&values) } else { Vec::new() };
                let node_values = if stepped.is_some() { Vec::new() } else { values };
                ModeData { lambda, square, terminal, cells, node_values }
            }
            _ => {
                let cells = match stepped {
                    Some((n, dt)) => self.closed_cells(lambda, n, dt),
                    None => Vec::new(),
                };
                ModeData { lambda, square: self.closed_cross(lambda, lambda), terminal, cells, node_values: Vec::new() }
            }
        }
    }

    /// ∫ over (t_{n−1}, t_n] of e, n = 1..N.
    fn closed_cells(&self, lambda: f64, n: usize, dt: f64) -> Vec<f64> {
        match self.kind {
            EquationKind::Heat => {
                let width = -(-lambda * dt).exp_m1() / lambda;
                (0..n).map(|i| (-lambda * i as f64 * dt).exp() * width).collect()
            }
            EquationKind::Wave { .. } => {
                let w = lambda.sqrt();
                let factor = 2.0 * (0.5 * w * dt).sin() / (w * w);
                (0..n).map(|i| factor * (w * (i as f64 + 0.5) * dt).sin()).collect()
            }
            EquationKind::Volterra { .. } => unreachable!("Volterra cells use the graded rule"),
        }
    }

    /// Values r_1..r_N of the stepped family's noise response.
    pub(crate) fn stepped_values(&self, lambda_h: f64) -> Result<Vec<f64>> {
        let (n, dt) = self.steps().expect("stepped family");
        Ok(match self.kind {
            EquationKind::Heat => (1..=n).map(|i| be_mode_power(lambda_h, dt, i)).collect(),
            EquationKind::Volterra { .. } => {
                let weights = self.weights.as_ref().expect("CQ weights exist for stepped Volterra");
                cq_homogeneous(lambda_h, weights, n)?.split_off(1)
            }
            EquationKind::Wave { scheme } => {
                let step = WaveStep::new(scheme, dt, lambda_h)?;
                (1..=n).map(|i| step.first_row(i)[1]).collect()
            }
        })
    }

    /// Discrete-family data on the discrete mode with eigenvalue `lambda_h`.
    pub(crate) fn discrete_mode(&self, lambda_h: f64) -> Result<ModeData> {
        let Some((n, dt)) = self.steps() else {
            return Ok(self.exact_mode(lambda_h));
        };
        let cells = self.stepped_values(lambda_h)?;
        let square = dt * compensated_sum(cells.iter().map(|r| r * r));
        let terminal = match self.kind {
            EquationKind::Wave { scheme } => WaveStep::new(scheme, dt, lambda_h)?.first_row(n),
            _ => [cells[n - 1], 0.0],
        };
        Ok(ModeData { lambda: lambda_h, square, terminal, cells, node_values: Vec::new() })
    }

    /// Time-exact discrete data on a graded rule: node values are kept for
    /// cross integrals against other eigenvalues.
    pub(crate) fn with_node_values(&self, mut mode: ModeData) -> ModeData {
        if matches!(self.kind, EquationKind::Volterra { .. }) && self.steps().is_none() && mode.node_values.is_empty() {
            mode.node_values = self.exact_node_values(mode.lambda);
        }
        mode
    }

    /// ∫₀ᵀ r(s) e(s) ds for a discrete mode against an exact mode.
    pub(crate) fn cross(&self, discrete: &ModeData, exact: &ModeData) -> f64 {
        if self.steps().is_some() {
            return compensated_sum(discrete.cells.iter().zip(&exact.cells).map(|(r, c)| r * c));
        }
        match self.kind {
            EquationKind::Volterra { .. } => self.rule().integrate_product(&discrete.node_values, &exact.node_values),
            _ => self.closed_cross(discrete.lambda, exact.lambda),
        }
    }

    /// r(s) for the time-exact family or the stepped family at time-to-go `s`.
    pub(crate) fn discrete_response(&self, lambda_h: f64, s: f64, stepped_values: Option<&[f64]>) -> f64 {
        match (self.steps(), stepped_values) {
            (Some((n, dt)), Some(values)) => {
                let i = step_index(s, dt, n);
                if i == 0 {
                    match self.kind {
                        EquationKind::Wave { .. } => 0.0,
                        _ => 1.0,
                    }
                } else {
                    values[i - 1]
                }
            }
            _ => self.exact_response(lambda_h, s),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagators::RationalScheme;
    use crate::quadrature::adaptive_gauss_kronrod;

    const WAVE: EquationKind = EquationKind::Wave { scheme: RationalScheme::CrankNicolson };

    fn stepped(n: usize) -> DiscreteFamily {
        DiscreteFamily::Stepped { horizon: 1.0, steps: n }
    }

    #[test]
    fn heat_square_matches_antiderivative() {
        let m = TimeModel::new(EquationKind::Heat, 1.0, DiscreteFamily::TimeExact, 1e4, 8).unwrap();
        for lambda in [0.1f64, 9.8696, 1e4] {
            let want = (1.0 - (-2.0 * lambda).exp()) / (2.0 * lambda);
            assert!((m.exact_mode(lambda).square - want).abs() < 1e-15 * want.max(1.0));
        }
    }

    #[test]
    fn wave_cross_matches_adaptive_quadrature() {
        let m = TimeModel::new(WAVE, 1.3, DiscreteFamily::TimeExact, 1e4, 8).unwrap();
        for &(l1, l2) in &[(9.0, 9.0), (9.0, 9.000001), (10.0, 400.0), (3000.0, 3100.0)] {
            let (w1, w2): (f64, f64) = (f64::sqrt(l1), f64::sqrt(l2));
            let want = adaptive_gauss_kronrod(|s| (w1 * s).sin() * (w2 * s).sin() / (w1 * w2), 0.0, 1.3, 1e-16);
            let got = m.cross(&m.exact_mode(l1), &m.exact_mode(l2));
            assert!((got - want).abs() < 1e-13, "{l1} {l2}: {got} vs {want}");
        }
    }

    #[test]
    fn closed_cells_sum_to_full_integral() {
        for kind in [EquationKind::Heat, WAVE] {
            let m = TimeModel::new(kind, 1.0, stepped(16), 1e3, 8).unwrap();
            for lambda in [2.0, 50.0, 900.0] {
                let cells = m.exact_mode(lambda).cells;
                let w = f64::sqrt(lambda);
                let want = match kind {
                    EquationKind::Heat => (1.0 - (-lambda).exp()) / lambda,
                    _ => (1.0 - w.cos()) / lambda,
                };
                assert!((cells.iter().sum::<f64>() - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn volterra_graded_integrals_match_adaptive_quadrature() {
        let rho = 1.5;
        let kind = EquationKind::Volterra { rho };
        let m = TimeModel::new(kind, 1.0, stepped(8), 4e7, 8).unwrap();
        let ml = MittagLeffler::new(rho).unwrap();
        for lambda in [9.87, 1e3, 1e5, 4e7] {
            let tau = f64::powf(lambda, 1.0 / rho);
            let e = |s: f64| ml.eval_scaled(tau * s);
            let data = m.exact_mode(lambda);
            // Adaptive reference on a split that resolves the initial layer.
            let split = (50.0 / tau).min(0.5);
            let square = adaptive_gauss_kronrod(|s| e(s) * e(s), 0.0, split, 1e-15)
                + adaptive_gauss_kronrod(|s| e(s) * e(s), split, 1.0, 1e-15);
            assert!((data.square - square).abs() < 1e-12 * square.max(1e-3), "λ={lambda}: {} vs {square}", data.square);
            let last = adaptive_gauss_kronrod(e, 0.875, 1.0, 1e-16);
            assert!((data.cells[7] - last).abs() < 1e-13);
            assert_eq!(data.cells.len(), 8);
        }
    }

    #[test]
    fn stepped_square_is_cellwise_sum() {
        let m = TimeModel::new(EquationKind::Heat, 1.0, stepped(4), 1e3, 8).unwrap();
        let d = m.discrete_mode(4.0).unwrap();
        let want = 0.25 * (0.25f64 + 0.0625 + 0.015625 + 0.00390625);
        assert!((d.square - want).abs() < 1e-16);
        assert_eq!(d.terminal, [0.0625, 0.0]);
    }

    #[test]
    fn time_exact_discrete_equals_exact_bitwise() {
        for kind in [EquationKind::Heat, EquationKind::Volterra { rho: 1.3 }, WAVE] {
            let m = TimeModel::new(kind, 1.0, DiscreteFamily::TimeExact, 1e4, 8).unwrap();
            let e = m.exact_mode(77.0);
            let d = m.with_node_values(m.discrete_mode(77.0).unwrap());
            assert_eq!(m.cross(&d, &e), e.square);
            assert_eq!(d.square, e.square);
            assert_eq!(d.terminal, e.terminal);
        }
    }

    #[test]
    fn discrete_response_lookup_is_right_closed() {
        let m = TimeModel::new(EquationKind::Heat, 1.0, stepped(4), 1e3, 8).unwrap();
        let values = m.stepped_values(4.0).unwrap();
        assert_eq!(m.discrete_response(4.0, 0.25, Some(&values)), 0.5);
        assert_eq!(m.discrete_response(4.0, 0.26, Some(&values)), 0.25);
        assert_eq!(m.discrete_response(4.0, 0.0, Some(&values)), 1.0);
    }
}
