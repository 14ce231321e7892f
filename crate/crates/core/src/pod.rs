//! Proper orthogonal decomposition of trajectory covariances.

use ndarray::{s, Array1, ArrayView1, ArrayView2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::hamiltonians::HamiltonianModel;
use crate::linalg::{self, matmul, matmul_adj_lhs, matmul_adj_rhs, CMatrix};
use crate::table::Table;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovarianceOrigin {
    AnalyticConstantH,
    Snapshot(usize),
}

/// Time-averaged `ψ_t ψ_t†`, normalized to unit trace for unit-norm states.
#[derive(Clone, Debug)]
pub struct CovarianceMatrix {
    pub matrix: CMatrix,
    pub origin: CovarianceOrigin,
    pub trace: f64,
}

impl CovarianceMatrix {
    pub fn new(matrix: CMatrix, origin: CovarianceOrigin) -> Self {
        let trace = matrix.diag().iter().map(|z| z.re).sum();
        CovarianceMatrix { matrix, origin, trace }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// `C = ΨΨ†/K`.
pub fn covariance_from_snapshot(traj: &Trajectory) -> Result<CovarianceMatrix> {
    let k = traj.len();
    if k == 0 {
        return Err(Error::validation("snapshot has no columns"));
    }
    let mut c = matmul_adj_rhs(traj.states.view(), traj.states.view());
    c.mapv_inplace(|z| z / k as f64);
    Ok(CovarianceMatrix::new(c, CovarianceOrigin::Snapshot(k)))
}

/// Singular values of `ΨΨ†/K` (descending, length n) computed from the
/// smaller of the two Gram matrices.
pub fn snapshot_singular_values(states: ArrayView2<Complex64>) -> Result<Array1<f64>> {
    let (n, k) = states.dim();
    if k == 0 {
        return Err(Error::validation("snapshot has no columns"));
    }
    let gram = if k < n { matmul_adj_lhs(states, states) } else { matmul_adj_rhs(states, states) };
    let w = linalg::eigvalsh(gram.view())?;
    let mut out = Array1::zeros(n);
    for (i, x) in w.iter().rev().take(n).enumerate() {
        out[i] = (x / k as f64).max(0.0);
    }
    Ok(out)
}

/// Full eigendecomposition of a covariance, in descending order with
/// negative eigenvalues clamped to zero.
#[derive(Clone, Debug)]
pub struct PodDecomposition {
    pub singular_values: Array1<f64>,
    pub vectors: CMatrix,
}

impl PodDecomposition {
    pub fn new(c: &CovarianceMatrix) -> Result<Self> {
        let e = linalg::eigh(c.matrix.view())?;
        let n = e.values.len();
        let singular_values = Array1::from_shape_fn(n, |i| e.values[n - 1 - i].max(0.0));
        let vectors = e.vectors.slice(s![.., ..;-1]).to_owned();
        Ok(PodDecomposition { singular_values, vectors })
    }

    pub fn dim(&self) -> usize {
        self.singular_values.len()
    }

    pub fn truncate(&self, m: usize) -> Result<PodModel> {
        let n = self.dim();
        if m == 0 || m > n {
            return Err(Error::validation(format!("compression level m = {m} must lie in 1..={n}")));
        }
        let sv = &self.singular_values;
        let non_unique = m < n && (sv[m - 1] - sv[m]).abs() <= 1e-12;
        Ok(PodModel {
            basis: self.vectors.slice(s![.., ..m]).to_owned(),
            singular_values: sv.clone(),
            m,
            non_unique,
        })
    }
}

/// Rank-`m` POD model with orthonormal basis `M_m`.
#[derive(Clone, Debug)]
pub struct PodModel {
    pub basis: CMatrix,
    pub singular_values: Array1<f64>,
    pub m: usize,
    /// Set when `σ_m` and `σ_{m+1}` coincide within 1e-12, so the basis is
    /// one of many optimal choices.
    pub non_unique: bool,
}

impl PodModel {
    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    /// `Γ_m = M_m M_m†`.
    pub fn projector(&self) -> CMatrix {
        matmul_adj_rhs(self.basis.view(), self.basis.view())
    }

    /// `Σ_{i>m} σ_i`, the minimal state error.
    pub fn tail_error(&self) -> f64 {
        tail_sum(self.singular_values.view(), self.m)
    }

    /// `Θ = M_m† Ψ`.
    pub fn encode(&self, states: ArrayView2<Complex64>) -> CMatrix {
        matmul_adj_lhs(self.basis.view(), states)
    }

    /// `X = M_m Θ`.
    pub fn decode(&self, coords: ArrayView2<Complex64>) -> CMatrix {
        matmul(self.basis.view(), coords)
    }

    pub fn reconstruct(&self, states: ArrayView2<Complex64>) -> CMatrix {
        self.decode(self.encode(states).view())
    }
}

fn tail_sum(sv: ArrayView1<f64>, m: usize) -> f64 {
    sv.slice(s![m..]).iter().rev().sum()
}

pub fn pod_fit(c: &CovarianceMatrix, m: usize) -> Result<PodModel> {
    PodDecomposition::new(c)?.truncate(m)
}

fn check_dims(model: &PodModel, traj: &Trajectory) -> Result<()> {
    if model.dim() != traj.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), found: traj.dim() });
    }
    if traj.is_empty() {
        return Err(Error::validation("trajectory has no samples"));
    }
    Ok(())
}

/// `‖residual‖_F / sqrt(K)`.
pub fn rms_columns(residual: ArrayView2<Complex64>) -> f64 {
    let k = residual.ncols() as f64;
    (residual.iter().map(|z| z.norm_sqr()).sum::<f64>() / k).sqrt()
}

/// `sqrt(mean_k ‖(I − Γ_m)ψ_{t_k}‖²)`.
pub fn state_error_rms(model: &PodModel, traj: &Trajectory) -> Result<f64> {
    check_dims(model, traj)?;
    let residual = &traj.states - &model.reconstruct(traj.states.view());
    Ok(rms_columns(residual.view()))
}

/// `sqrt(mean_k ‖(HΓ_m − Γ_m H)ψ_{t_k}‖²)`.
pub fn equation_error_rms(model: &PodModel, h: &HamiltonianModel, traj: &Trajectory) -> Result<f64> {
    check_dims(model, traj)?;
    if h.dim() != model.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), found: h.dim() });
    }
    let projected = model.reconstruct(traj.states.view());
    let h_proj = matmul(h.matrix().view(), projected.view());
    let h_psi = matmul(h.matrix().view(), traj.states.view());
    let proj_h = model.reconstruct(h_psi.view());
    Ok(rms_columns((&h_proj - &proj_h).view()))
}

/// `ε_m = Σ_{i>m} σ_i / Σ σ_i` for `m = 1..=n`, evaluated from tail sums so
/// small values keep their relative accuracy.
pub fn singular_value_error_curve(sigma: ArrayView1<f64>) -> Result<Array1<f64>> {
    if sigma.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::validation("singular values must be finite and non-negative"));
    }
    let n = sigma.len();
    let mut tails = Array1::zeros(n);
    let mut acc = 0.0;
    for m in (0..n).rev() {
        tails[m] = acc;
        acc += sigma[m];
    }
    if acc <= 0.0 {
        return Err(Error::validation("error curve needs at least one positive singular value"));
    }
    Ok(tails / acc)
}

/// Smallest `m` (1-based) with `ε_m ≤ threshold`.
pub fn level_for_threshold(curve: ArrayView1<f64>, threshold: f64) -> Option<usize> {
    curve.iter().position(|&e| e <= threshold).map(|i| i + 1)
}

/// Histogram of `log10 |x|` over a fixed range; values outside it land in
/// the end bins.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub log10_median: f64,
}

pub const DEFAULT_LOG10_RANGE: (f64, f64) = (-18.0, 0.0);
const MAGNITUDE_FLOOR: f64 = 1e-300;

impl Histogram {
    pub fn from_magnitudes<I: IntoIterator<Item = f64>>(values: I, bins: usize, range: (f64, f64)) -> Result<Self> {
        if bins < 2 {
            return Err(Error::validation("histogram needs at least 2 bins"));
        }
        let (lo, hi) = range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::validation("histogram range must be finite and increasing"));
        }
        let width = (hi - lo) / bins as f64;
        let edges: Vec<f64> = (0..=bins).map(|i| lo + width * i as f64).collect();
        let mut counts = vec![0u64; bins];
        let mut logs: Vec<f64> = values.into_iter().map(|x| x.abs().max(MAGNITUDE_FLOOR).log10()).collect();
        for &l in &logs {
            let idx = ((l - lo) / width).floor();
            let idx = if idx.is_nan() { 0 } else { idx.clamp(0.0, (bins - 1) as f64) as usize };
            counts[idx] += 1;
        }
        let log10_median = median(&mut logs);
        Ok(Histogram { edges, counts, log10_median })
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["bin_left", "bin_right", "count"]);
        for (i, &c) in self.counts.iter().enumerate() {
            t.push(vec![self.edges[i], self.edges[i + 1], c as f64]);
        }
        t
    }
}

fn median(xs: &mut [f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Histogram of `log10 |Ψ − Γ_mΨ|` over all `n·K` entries.
pub fn state_error_histogram(model: &PodModel, states: ArrayView2<Complex64>, bins: usize) -> Result<Histogram> {
    if model.dim() != states.nrows() {
        return Err(Error::DimensionMismatch { expected: model.dim(), found: states.nrows() });
    }
    let residual = &states - &model.reconstruct(states);
    Histogram::from_magnitudes(residual.iter().map(|z| z.norm()), bins, DEFAULT_LOG10_RANGE)
}

/// Histogram of `log10 |(I − Γ_m)C|` over all `n²` entries.
pub fn error_histogram(model: &PodModel, c: &CovarianceMatrix, bins: usize) -> Result<Histogram> {
    error_histogram_in_range(model, c, bins, DEFAULT_LOG10_RANGE)
}

pub fn error_histogram_in_range(
    model: &PodModel,
    c: &CovarianceMatrix,
    bins: usize,
    range: (f64, f64),
) -> Result<Histogram> {
    if model.dim() != c.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), found: c.dim() });
    }
    let residual = &c.matrix - &model.reconstruct(c.matrix.view());
    Histogram::from_magnitudes(residual.iter().map(|z| z.norm()), bins, range)
}
