//! Column-wise POD of the propagator `U_t`.
//!
//! Column `ν` of `U_t` is the trajectory started at the basis vector `ε_ν`,
//! so each column gets its own covariance `C_ν` and POD basis. All columns
//! share one sinc matrix.

use std::sync::Arc;

use ndarray::{Array1, Array2};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hamiltonians::HamiltonianModel;
use crate::linalg::{matmul_adj_rhs, CMatrix, CVector};
use crate::pod::{singular_value_error_curve, CovarianceMatrix, PodDecomposition};
use crate::spectral::{
    covariance_from_pair, linear_sweep_sinc, r_matrix, sinc_matrix, symmetric_singular_values, time_bandwidth,
    SpectralPair,
};
use crate::table::Table;

/// Largest dimension handled by default.
pub const DEFAULT_MAX_DIM: usize = 256;

#[derive(Clone, Debug)]
pub struct UnitaryPodModel {
    pub m: usize,
    pub t: f64,
    /// `M_ν`, one `n × m` basis per column.
    pub bases: Vec<CMatrix>,
    /// Descending `σ(C_ν)` per column.
    pub column_singular_values: Vec<Array1<f64>>,
    /// `Tr(I − Γ_ν)C_ν` per column.
    pub column_errors: Vec<f64>,
    /// `E = Σ_ν Tr(I − Γ_ν)C_ν`.
    pub error: f64,
    pub sinc: Arc<Array2<f64>>,
}

impl UnitaryPodModel {
    pub fn dim(&self) -> usize {
        self.bases.len()
    }

    /// `Γ_ν = M_ν M_ν†`.
    pub fn projector(&self, nu: usize) -> CMatrix {
        matmul_adj_rhs(self.bases[nu].view(), self.bases[nu].view())
    }

    /// `E` at every compression level `1..=n`.
    pub fn error_curve(&self) -> Vec<f64> {
        let n = self.dim();
        let mut curve = vec![0.0; n];
        for sv in &self.column_singular_values {
            let mut tail = 0.0;
            for m in (0..n).rev() {
                curve[m] += tail;
                tail += sv[m];
            }
        }
        curve
    }
}

/// `α_ν = V†ε_ν`, the conjugate of row `ν` of `V`.
fn column_coefficients(h: &HamiltonianModel, nu: usize) -> CVector {
    h.eigenvectors().row(nu).mapv(|z| z.conj())
}

fn column_pair(h: &HamiltonianModel, nu: usize, t: f64, s: &Arc<Array2<f64>>) -> SpectralPair {
    let alpha = column_coefficients(h, nu);
    let r = r_matrix(alpha.view(), s.view());
    SpectralPair { r, s: Arc::clone(s), alpha, omega: h.eigenvalues().clone(), t }
}

/// `C_ν = V D R_ν D† V†` with `R_ν = diag(α_ν) S diag(α_ν)†`.
pub fn column_covariance(h: &HamiltonianModel, nu: usize, t: f64, s: &Arc<Array2<f64>>) -> CovarianceMatrix {
    covariance_from_pair(h, &column_pair(h, nu, t, s))
}

pub fn unitary_pod(h: &HamiltonianModel, t: f64, m: usize) -> Result<UnitaryPodModel> {
    unitary_pod_capped(h, t, m, DEFAULT_MAX_DIM)
}

pub fn unitary_pod_capped(h: &HamiltonianModel, t: f64, m: usize, max_dim: usize) -> Result<UnitaryPodModel> {
    let n = h.dim();
    if n > max_dim {
        return Err(Error::ResourceLimit { what: "unitary dimension", requested: n as u64, cap: max_dim as u64 });
    }
    if m == 0 || m > n {
        return Err(Error::validation(format!("compression level m = {m} must lie in 1..={n}")));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::validation("run time must be finite and non-negative"));
    }
    let sinc = Arc::new(sinc_matrix(h.eigenvalues().view(), t));
    let columns: Vec<(CMatrix, Array1<f64>, f64)> = (0..n)
        .into_par_iter()
        .map(|nu| {
            let c = column_covariance(h, nu, t, &sinc);
            let pod = PodDecomposition::new(&c)?.truncate(m)?;
            let tail = pod.tail_error();
            Ok((pod.basis, pod.singular_values, tail))
        })
        .collect::<Result<_>>()?;

    let mut bases = Vec::with_capacity(n);
    let mut column_singular_values = Vec::with_capacity(n);
    let mut column_errors = Vec::with_capacity(n);
    for (b, sv, e) in columns {
        bases.push(b);
        column_singular_values.push(sv);
        column_errors.push(e);
    }
    let error = column_errors.iter().sum();
    Ok(UnitaryPodModel { m, t, bases, column_singular_values, column_errors, error, sinc })
}

/// `n · ε_m(S_lin)` at every `m = 1..=n`, with `S_lin` the sinc matrix of
/// the linear sweep sharing the Hamiltonian's `(Δ, n)`.
pub fn unitary_error_bound_curve(h: &HamiltonianModel, t: f64) -> Result<Vec<f64>> {
    let n = h.dim();
    let tb = time_bandwidth(h, t);
    let s_lin = linear_sweep_sinc(n, tb.delta)?;
    let sv = symmetric_singular_values(s_lin.view())?;
    let eps = singular_value_error_curve(sv.view())?;
    Ok(eps.iter().map(|e| n as f64 * e).collect())
}

pub fn unitary_error_bound(h: &HamiltonianModel, t: f64, m: usize) -> Result<f64> {
    let n = h.dim();
    if m == 0 || m > n {
        return Err(Error::validation(format!("compression level m = {m} must lie in 1..={n}")));
    }
    Ok(unitary_error_bound_curve(h, t)?[m - 1])
}

/// Rows `(m, E_actual, E_bound)`.
pub fn error_table(actual: &[f64], bound: &[f64]) -> Table {
    let mut table = Table::new(["m", "E_actual", "E_bound"]);
    for (i, (a, b)) in actual.iter().zip(bound).enumerate() {
        table.push(vec![(i + 1) as f64, *a, *b]);
    }
    table
}
