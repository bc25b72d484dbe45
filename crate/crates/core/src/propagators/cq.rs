use crate::error::{invalid, Result};

/// Backward-Euler convolution quadrature weights for the kernel
/// t^{ρ−2}/Γ(ρ−1): ((1 − z)/Δt)^{1−ρ} = Σ ω_k z^k.
#[derive(Debug, Clone, PartialEq)]
pub struct CqWeights {
    rho: f64,
    dt: f64,
    weights: Vec<f64>,
}

/// ω_k = Δt^{ρ−1} c_k, c_0 = 1, c_k = c_{k−1}(k + ρ − 2)/k for k < `n`.
///
/// ρ = 1 is accepted and yields ω = (1, 0, 0, ...), the backward Euler limit.
pub fn cq_weights(rho: f64, dt: f64, n: usize) -> Result<CqWeights> {
    if !(1.0..2.0).contains(&rho) {
        return Err(invalid(format!("convolution order rho must lie in [1, 2), got {rho}")));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(invalid(format!("step must be positive, got {dt}")));
    }
    if n == 0 {
        return Err(invalid("need at least one weight"));
    }
    let scale = dt.powf(rho - 1.0);
    let mut c = 1.0;
    let mut weights = Vec::with_capacity(n);
    weights.push(scale);
    for k in 1..n {
        let k = k as f64;
        c *= (k + rho - 2.0) / k;
        weights.push(scale * c);
    }
    Ok(CqWeights { rho, dt, weights })
}

impl CqWeights {
    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Runs x_n = (x_{n−1} + f_n − Δt λ Σ_{k=1}^{n−1} ω_{n−k} x_k) / (1 + Δt λ ω_0)
/// and returns x_1..x_N for N = forcing.len().
pub fn cq_mode_solve(lambda_h: f64, weights: &CqWeights, x0: f64, forcing: &[f64]) -> Result<Vec<f64>> {
    let n = forcing.len();
    if n > weights.len() {
        return Err(invalid(format!("{n} steps requested but only {} weights available", weights.len())));
    }
    let w = weights.weights();
    let a = weights.dt * lambda_h;
    let denom = 1.0 + a * w[0];
    // x[0] is the initial value; memory terms only involve x_1..x_{n−1}.
    let mut x = Vec::with_capacity(n + 1);
    x.push(x0);
    for step in 1..=n {
        let mut memory = 0.0;
        for k in 1..step {
            memory += w[step - k] * x[k];
        }
        x.push((x[step - 1] + forcing[step - 1] - a * memory) / denom);
    }
    x.remove(0);
    Ok(x)
}

/// Homogeneous solution x_0 = 1, x_1, ..., x_N; x_n is also the response at
/// step m + n − 1 to a unit forcing at step m, since x_0 never enters the
/// memory sum.
pub fn cq_homogeneous(lambda_h: f64, weights: &CqWeights, steps: usize) -> Result<Vec<f64>> {
    let mut x = cq_mode_solve(lambda_h, weights, 1.0, &vec![0.0; steps])?;
    x.insert(0, 1.0);
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagators::{be_mode_power, mittag_leffler_neg};

    #[test]
    fn leading_weights() {
        let w = cq_weights(1.5, 0.1, 4).unwrap();
        assert!((w.weights()[0] - 0.1f64.sqrt()).abs() < 1e-16);
        assert!((w.weights()[1] / w.weights()[0] - 0.5).abs() < 1e-15);
        let w = cq_weights(1.3, 1.0, 3).unwrap();
        assert!((w.weights()[1] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn weights_positive_and_nonincreasing() {
        for rho in [1.1, 1.5, 1.9] {
            let w = cq_weights(rho, 1e-3, 10_000).unwrap();
            assert!(w.weights().iter().all(|v| *v > 0.0));
            assert!(w.weights().windows(2).all(|p| p[1] <= p[0]));
        }
    }

    #[test]
    fn weights_match_generating_function() {
        // Partial sums of Σ c_k z^k approach (1 − z)^{1−ρ} for |z| < 1.
        let rho = 1.4;
        let w = cq_weights(rho, 1.0, 400).unwrap();
        let z: f64 = 0.5;
        let series: f64 = w.weights().iter().enumerate().map(|(k, c)| c * z.powi(k as i32)).sum();
        assert!((series - (1.0 - z).powf(1.0 - rho)).abs() < 1e-14);
    }

    #[test]
    fn unit_order_degenerates_to_backward_euler() {
        let w = cq_weights(1.0, 0.05, 50).unwrap();
        assert!(w.weights()[1..].iter().all(|c| *c == 0.0));
        let x = cq_homogeneous(7.0, &w, 50).unwrap();
        for (n, v) in x.iter().enumerate() {
            assert!((v - be_mode_power(7.0, 0.05, n)).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_eigenvalue_is_a_random_walk() {
        let w = cq_weights(1.5, 0.1, 5).unwrap();
        let f = [0.5, -1.0, 2.0, 0.25, 1.0];
        let x = cq_mode_solve(0.0, &w, 1.0, &f).unwrap();
        let mut acc = 1.0;
        for (xi, fi) in x.iter().zip(f) {
            acc += fi;
            assert_eq!(*xi, acc);
        }
    }

    #[test]
    fn homogeneous_solution_converges_to_mittag_leffler() {
        let (rho, lambda, t) = (1.5, 2.0, 1.0);
        let exact = mittag_leffler_neg(rho, lambda * t).unwrap();
        let errs: Vec<f64> = (5..=11)
            .map(|p| {
                let n = 1usize << p;
                let w = cq_weights(rho, t / n as f64, n).unwrap();
                (cq_homogeneous(lambda, &w, n).unwrap()[n] - exact).abs()
            })
            .collect();
        let slope = (errs[0] / errs[errs.len() - 1]).log2() / (errs.len() - 1) as f64;
        assert!(slope >= 0.9, "order {slope}");
    }

    #[test]
    fn fine_cq_agrees_with_mittag_leffler() {
        // Richardson extrapolation of first-order CQ at Δt = 1e-4 and 5e-5.
        let (rho, lambda) = (1.5, 1.0);
        for t in [0.5, 1.0] {
            let run = |n: usize| {
                let w = cq_weights(rho, t / n as f64, n).unwrap();
                cq_homogeneous(lambda, &w, n).unwrap()[n]
            };
            let coarse = run((t * 1e4) as usize);
            let fine = run((t * 2e4) as usize);
            let extrapolated = 2.0 * fine - coarse;
            let exact = mittag_leffler_neg(rho, lambda * t.powf(rho)).unwrap();
            assert!((extrapolated - exact).abs() < 1e-6, "t={t}: {extrapolated} vs {exact}");
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(cq_weights(2.0, 0.1, 3).is_err());
        assert!(cq_weights(0.9, 0.1, 3).is_err());
        assert!(cq_weights(1.5, 0.0, 3).is_err());
        let w = cq_weights(1.5, 0.1, 3).unwrap();
        assert!(cq_mode_solve(1.0, &w, 1.0, &[0.0; 4]).is_err());
    }
}
