use super::DirichletSpectrum;
use crate::error::{invalid, Result};
use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;

/// Uniform P1 finite elements on (0, 1) with homogeneous Dirichlet
/// conditions, together with the generalized eigenpairs of (stiffness, mass).
#[derive(Debug, Clone)]
pub struct FemSpace {
    cells: usize,
    eigenvalues: Vec<f64>,
    /// Columns are mass-orthonormal generalized eigenvectors, ascending by
    /// eigenvalue, signed so the first nodal value is positive.
    eigenvectors: DMatrix<f64>,
}

pub fn assemble_fem(cells: usize) -> Result<FemSpace> {
    if cells < 2 {
        return Err(invalid(format!("need at least 2 cells for an interior node, got {cells}")));
    }
    let n = cells - 1;
    let mass = tridiagonal(n, mass_stencil(cells));
    let stiffness = tridiagonal(n, stiffness_stencil(cells));

    let chol = mass.clone().cholesky().expect("P1 mass matrix is positive definite");
    let l = chol.l();
    // C = L^{-1} K L^{-T}
    let y = l.solve_lower_triangular(&stiffness).expect("Cholesky factor is nonsingular");
    let mut c = l.solve_lower_triangular(&y.transpose()).expect("Cholesky factor is nonsingular");
    c = 0.5 * (&c + c.transpose());

    let eig = c.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let lt = l.transpose();
    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        eigenvalues.push(eig.eigenvalues[src]);
        let w = eig.eigenvectors.column(src).into_owned();
        let mut v = lt.solve_upper_triangular(&w).expect("Cholesky factor is nonsingular");
        if v[0] < 0.0 {
            v.neg_mut();
        }
        eigenvectors.set_column(col, &v);
    }
    Ok(FemSpace { cells, eigenvalues, eigenvectors })
}

fn mass_stencil(cells: usize) -> (f64, f64) {
    let h = 1.0 / cells as f64;
    (4.0 * h / 6.0, h / 6.0)
}

fn stiffness_stencil(cells: usize) -> (f64, f64) {
    let h = 1.0 / cells as f64;
    (2.0 / h, -1.0 / h)
}

fn tridiagonal(n: usize, (diag, off): (f64, f64)) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            diag
        } else if i.abs_diff(j) == 1 {
            off
        } else {
            0.0
        }
    })
}

impl FemSpace {
    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn mesh_width(&self) -> f64 {
        1.0 / self.cells as f64
    }

    pub fn interior_dim(&self) -> usize {
        self.cells - 1
    }

    pub fn mass_matrix(&self) -> DMatrix<f64> {
        tridiagonal(self.interior_dim(), mass_stencil(self.cells))
    }

    pub fn stiffness_matrix(&self) -> DMatrix<f64> {
        tridiagonal(self.interior_dim(), stiffness_stencil(self.cells))
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    /// Solves `mass · c = rhs` with the Thomas algorithm.
    pub fn mass_solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.interior_dim();
        assert_eq!(rhs.len(), n, "right-hand side length must equal the interior dimension");
        let (d, o) = mass_stencil(self.cells);
        let mut c = vec![0.0; n];
        let mut x = rhs.to_vec();
        let mut denom = d;
        x[0] /= denom;
        for i in 1..n {
            c[i - 1] = o / denom;
            denom = d - o * c[i - 1];
            x[i] = (x[i] - o * x[i - 1]) / denom;
        }
        for i in (0..n - 1).rev() {
            x[i] -= c[i] * x[i + 1];
        }
        x
    }
}

/// G[i, k] = ∫₀¹ hat_i(x) √2 sin((k+1)πx) dx for interior node `i`
/// (at x = (i+1)h) and spectral mode `k + 1`.
///
/// The hat function has Fourier transform h·sinc²(ωh/2), which gives
/// G = √2 sin(ω x_i) · h · sinc²(ωh/2) with ω = kπ.
pub fn cross_gram(fem: &FemSpace, spec: &DirichletSpectrum) -> Result<DMatrix<f64>> {
    if spec.length() != 1.0 {
        return Err(invalid("cross-Gram requires the unit interval"));
    }
    let h = fem.mesh_width();
    let n = fem.interior_dim();
    let k_max = spec.mode_count();
    let mut g = DMatrix::zeros(n, k_max);
    for k in 0..k_max {
        let w = (k + 1) as f64 * PI;
        let half = 0.5 * w * h;
        let sinc = half.sin() / half;
        let scale = std::f64::consts::SQRT_2 * h * sinc * sinc;
        for i in 0..n {
            g[(i, k)] = scale * (w * (i + 1) as f64 * h).sin();
        }
    }
    Ok(g)
}

/// Coordinates d[j, k] = ⟨ψ_j, φ_k⟩ of P_h φ_k in the discrete eigenbasis,
/// where ψ_j are the L²-orthonormal discrete eigenfunctions.
///
/// With V mass-orthonormal, Vᵀ·M·(M⁻¹·G) = Vᵀ·G, so no mass solve is needed.
pub fn transfer_matrix(fem: &FemSpace, spec: &DirichletSpectrum) -> Result<DMatrix<f64>> {
    let g = cross_gram(fem, spec)?;
    Ok(fem.eigenvectors().transpose() * g)
}

/// Coordinates of P_h φ_k (1-based `k`) in the discrete eigenbasis.
pub fn l2_project_mode(fem: &FemSpace, spec: &DirichletSpectrum, k: usize) -> Result<Vec<f64>> {
    if k == 0 || k > spec.mode_count() {
        return Err(invalid(format!("mode {k} outside 1..={}", spec.mode_count())));
    }
    let g = cross_gram(fem, spec)?;
    let nodal = fem.mass_solve(g.column(k - 1).as_slice());
    let mass = fem.mass_matrix();
    let d = fem.eigenvectors().transpose() * (mass * DVector::from_vec(nodal));
    Ok(d.iter().copied().collect())
}
