//! Analytic compression theory: the `R = diag(α) S diag(α)†` factorization
//! of the covariance, sinc matrices, the time-bandwidth product, and
//! singular-value bounds.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonians::{HamiltonianModel, InitialState};
use crate::linalg::{self, ceil_tol, matmul, matmul_adj_rhs, sinc, CMatrix, CVector};
use crate::pod::{singular_value_error_curve, CovarianceMatrix, CovarianceOrigin};

/// `α = V†ψ₀` together with the sinc matrix `S` and `R`.
#[derive(Clone, Debug)]
pub struct SpectralPair {
    pub r: CMatrix,
    pub s: Arc<Array2<f64>>,
    pub alpha: CVector,
    pub omega: Array1<f64>,
    pub t: f64,
}

impl SpectralPair {
    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    /// `Λ_kℓ = (ω_k − ω_ℓ)T/2`.
    pub fn lambda(&self) -> Array2<f64> {
        phase_differences(self.omega.view(), self.t)
    }

    pub fn sigma_r(&self) -> Result<Array1<f64>> {
        hermitian_singular_values(self.r.view())
    }

    pub fn sigma_s(&self) -> Result<Array1<f64>> {
        symmetric_singular_values(self.s.view())
    }
}

fn phase_differences(omega: ArrayView1<f64>, t: f64) -> Array2<f64> {
    let n = omega.len();
    Array2::from_shape_fn((n, n), |(k, l)| (omega[k] - omega[l]) * t / 2.0)
}

/// `S_kℓ = sinc((ω_k − ω_ℓ)T/2)`.
pub fn sinc_matrix(omega: ArrayView1<f64>, t: f64) -> Array2<f64> {
    let n = omega.len();
    let mut s = Array2::zeros((n, n));
    for k in 0..n {
        s[[k, k]] = 1.0;
        for l in k + 1..n {
            let v = sinc((omega[k] - omega[l]) * t / 2.0);
            s[[k, l]] = v;
            s[[l, k]] = v;
        }
    }
    s
}

/// `R = diag(α) S diag(α)†`.
pub fn r_matrix(alpha: ArrayView1<Complex64>, s: ArrayView2<f64>) -> CMatrix {
    let n = alpha.len();
    Array2::from_shape_fn((n, n), |(k, l)| alpha[k] * alpha[l].conj() * s[[k, l]])
}

/// `α = V†ψ₀`.
pub fn eigen_coefficients(h: &HamiltonianModel, psi0: &InitialState) -> Result<CVector> {
    if psi0.dim() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: psi0.dim() });
    }
    Ok(linalg::matvec(h.eigenvectors().t().mapv(|z| z.conj()).view(), psi0.vector.view()))
}

pub fn spectral_pair(h: &HamiltonianModel, psi0: &InitialState, t: f64) -> Result<SpectralPair> {
    check_time(t)?;
    let s = Arc::new(sinc_matrix(h.eigenvalues().view(), t));
    spectral_pair_with_sinc(h, psi0, t, s)
}

/// Build a pair around an existing sinc matrix for the same `(ω, T)`.
pub fn spectral_pair_with_sinc(
    h: &HamiltonianModel,
    psi0: &InitialState,
    t: f64,
    s: Arc<Array2<f64>>,
) -> Result<SpectralPair> {
    if s.dim() != (h.dim(), h.dim()) {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: s.nrows() });
    }
    let alpha = eigen_coefficients(h, psi0)?;
    let r = r_matrix(alpha.view(), s.view());
    Ok(SpectralPair { r, s, alpha, omega: h.eigenvalues().clone(), t })
}

fn check_time(t: f64) -> Result<()> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::validation(format!("run time must be finite and non-negative, got {t}")));
    }
    Ok(())
}

/// `C = V D R D† V†` with `D = diag(e^{−iωT/2})`, no time integration.
pub fn analytic_covariance(h: &HamiltonianModel, psi0: &InitialState, t: f64) -> Result<CovarianceMatrix> {
    let pair = spectral_pair(h, psi0, t)?;
    Ok(covariance_from_pair(h, &pair))
}

pub fn covariance_from_pair(h: &HamiltonianModel, pair: &SpectralPair) -> CovarianceMatrix {
    let phases = pair.omega.mapv(|w| Complex64::from_polar(1.0, -w * pair.t / 2.0));
    let vd = h.eigenvectors() * &phases;
    let inner = matmul(vd.view(), pair.r.view());
    let c = matmul_adj_rhs(inner.view(), vd.view());
    CovarianceMatrix::new(c, CovarianceOrigin::AnalyticConstantH)
}

/// Descending singular values of a Hermitian matrix.
pub fn hermitian_singular_values(a: ArrayView2<Complex64>) -> Result<Array1<f64>> {
    Ok(sorted_abs_desc(linalg::eigvalsh(a)?))
}

/// Descending singular values of a real symmetric matrix.
pub fn symmetric_singular_values(a: ArrayView2<f64>) -> Result<Array1<f64>> {
    Ok(sorted_abs_desc(linalg::eigvalsh_real(a)?))
}

fn sorted_abs_desc(w: Array1<f64>) -> Array1<f64> {
    let mut v: Vec<f64> = w.iter().map(|x| x.abs()).collect();
    v.sort_by(|a, b| b.total_cmp(a));
    Array1::from(v)
}

/// Toeplitz sinc matrix of an exactly linear sweep:
/// `S_lin[k, ℓ] = sinc(πΔ(k − ℓ)/(n − 1))`.
pub fn linear_sweep_sinc(n: usize, delta: f64) -> Result<Array2<f64>> {
    if n < 2 {
        return Err(Error::validation("linear sweep needs n >= 2"));
    }
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::validation("delta must be finite and non-negative"));
    }
    let step = PI * delta / (n - 1) as f64;
    let first: Vec<f64> = (0..n).map(|j| sinc(step * j as f64)).collect();
    Ok(Array2::from_shape_fn((n, n), |(k, l)| first[k.abs_diff(l)]))
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::validation(format!("delta must be positive, got {delta}")));
    }
    Ok(())
}

fn plateau_count(n: usize, delta: f64) -> usize {
    (ceil_tol(delta) as usize).clamp(1, n)
}

/// Singular values of the ideal (band-limited) sinc matrix: `n/Δ` on the
/// first `⌈Δ⌉` entries and zero after.
pub fn ideal_sinc_spectrum(n: usize, delta: f64) -> Result<Array1<f64>> {
    check_delta(delta)?;
    let count = plateau_count(n, delta);
    let value = n as f64 / delta;
    Ok(Array1::from_shape_fn(n, |k| if k < count { value } else { 0.0 }))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FourierMode {
    /// Rectangular symbol `(n−1)/Δ` on `|ω| ≤ πΔ/(n−1)`.
    ClosedForm,
    /// Symbol truncated to `terms` Fourier coefficients.
    PartialSum { terms: usize },
}

/// Asymptotic singular values of `S_lin` from its Fourier symbol sampled
/// at `ω_k = 2πk/n`, sorted descending.
pub fn fourier_asymptotic_spectrum(n: usize, delta: f64, mode: FourierMode) -> Result<Array1<f64>> {
    check_delta(delta)?;
    if n < 2 {
        return Err(Error::validation("need n >= 2"));
    }
    let cutoff = PI * delta / (n - 1) as f64;
    let height = (n - 1) as f64 / delta;
    let freqs = (0..n).map(|k| {
        let w = 2.0 * PI * k as f64 / n as f64;
        if w > PI {
            w - 2.0 * PI
        } else {
            w
        }
    });
    let values: Vec<f64> = match mode {
        FourierMode::ClosedForm => freqs.map(|w| if w.abs() <= cutoff * (1.0 + 1e-12) { height } else { 0.0 }).collect(),
        FourierMode::PartialSum { terms } => {
            if terms < n {
                return Err(Error::validation(format!("partial sum needs at least n = {n} terms, got {terms}")));
            }
            let coeffs: Vec<f64> = (1..terms).map(|l| sinc(cutoff * l as f64)).collect();
            freqs
                .map(|w| {
                    let tail: f64 = coeffs.iter().enumerate().map(|(i, c)| (w * (i + 1) as f64).cos() * c).sum();
                    (1.0 + 2.0 * tail).abs()
                })
                .collect()
        }
    };
    Ok(sorted_abs_desc(Array1::from(values)))
}

/// `Δ = (ω_max − ω_min)T/(2π)` and `m_tbw = ⌈(n/(n−1))Δ⌉`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeBandwidth {
    pub delta: f64,
    pub m_tbw: usize,
    pub n: usize,
}

impl TimeBandwidth {
    pub fn from_range(range: f64, t: f64, n: usize) -> Self {
        let delta = range * t / (2.0 * PI);
        TimeBandwidth { delta, m_tbw: compression_onset(delta, n), n }
    }
}

/// `⌈(n/(n−1))Δ⌉`, at least 1.
pub fn compression_onset(delta: f64, n: usize) -> usize {
    if n < 2 || delta <= 0.0 {
        return 1;
    }
    let factor = n as f64 / (n - 1) as f64;
    (ceil_tol(factor * delta) as usize).max(1)
}

pub fn time_bandwidth(h: &HamiltonianModel, t: f64) -> TimeBandwidth {
    TimeBandwidth::from_range(h.spectral_range(), t, h.dim())
}

/// `⌈(log n / log n₀)Δ₀⌉`. Dimensions are reals so that `n = 2⁸⁰` works.
pub fn log_scaled_compression(n: f64, n0: f64, delta0: f64) -> Result<usize> {
    if !(n0 >= 2.0 && n >= n0 && n.is_finite()) {
        return Err(Error::validation(format!("need n >= n0 >= 2, got n = {n}, n0 = {n0}")));
    }
    if !(delta0.is_finite() && delta0 >= 0.0) {
        return Err(Error::validation("delta0 must be finite and non-negative"));
    }
    Ok(ceil_tol(n.log2() / n0.log2() * delta0) as usize)
}

/// Outcome of the singular-value bounds on `R`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    /// `σ_k(R) ≤ min{‖α‖∞² σ_k(S), ‖S‖ σ_k²(α)}` for every k, with 1e-10 slack.
    pub sv_bound_ok: bool,
    pub sv_bound_min_slack: f64,
    pub rank_r: usize,
    pub rank_s: usize,
    pub rank_alpha: usize,
    pub rank_ok: bool,
    /// `Σ_{i≤m} σ_i(S)/n ≤ Σ_{i≤m} σ_i(R)` for every m. Reported only.
    pub kyfan_ok: bool,
    pub kyfan_violations: Vec<usize>,
}

const BOUND_SLACK: f64 = 1e-10;
const RANK_TOL: f64 = 1e-10;

/// Count of values above `1e-10 · max`.
pub fn numerical_rank(sigma: ArrayView1<f64>) -> usize {
    let top = sigma.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if top == 0.0 {
        return 0;
    }
    sigma.iter().filter(|x| x.abs() > RANK_TOL * top).count()
}

pub fn singular_value_bounds_check(pair: &SpectralPair) -> Result<BoundReport> {
    let sigma_r = pair.sigma_r()?;
    let sigma_s = pair.sigma_s()?;
    Ok(bounds_from_spectra(pair.alpha.view(), sigma_r.view(), sigma_s.view()))
}

pub fn bounds_from_spectra(alpha: ArrayView1<Complex64>, sigma_r: ArrayView1<f64>, sigma_s: ArrayView1<f64>) -> BoundReport {
    let n = alpha.len();
    let mut sigma_alpha: Vec<f64> = alpha.iter().map(|a| a.norm()).collect();
    sigma_alpha.sort_by(|a, b| b.total_cmp(a));
    let alpha_inf_sq = sigma_alpha[0] * sigma_alpha[0];
    let s_norm = sigma_s[0];

    let mut min_slack = f64::INFINITY;
    for k in 0..n {
        let bound = (alpha_inf_sq * sigma_s[k]).min(s_norm * sigma_alpha[k] * sigma_alpha[k]);
        min_slack = min_slack.min(bound - sigma_r[k]);
    }

    let rank_r = numerical_rank(sigma_r);
    let rank_s = numerical_rank(sigma_s);
    let rank_alpha = numerical_rank(ArrayView1::from(&sigma_alpha));

    let mut kyfan_violations = Vec::new();
    let (mut sum_s, mut sum_r) = (0.0, 0.0);
    for m in 0..n {
        sum_s += sigma_s[m];
        sum_r += sigma_r[m];
        if sum_s / n as f64 > sum_r + 1e-12 {
            kyfan_violations.push(m + 1);
        }
    }

    BoundReport {
        sv_bound_ok: min_slack >= -BOUND_SLACK,
        sv_bound_min_slack: min_slack,
        rank_r,
        rank_s,
        rank_alpha,
        rank_ok: rank_r <= rank_s.min(rank_alpha),
        kyfan_ok: kyfan_violations.is_empty(),
        kyfan_violations,
    }
}

/// Orthonormal real Fourier vectors spanning the `count` lowest
/// frequencies: the constant, then cosine/sine pairs, ending on a cosine
/// when `count` is even.
fn low_frequency_basis(n: usize, count: usize) -> Array2<f64> {
    let mut q = Array2::zeros((n, count));
    let nf = n as f64;
    q.column_mut(0).fill(1.0 / nf.sqrt());
    let mut col = 1;
    let mut k = 1;
    while col < count {
        let w = 2.0 * PI * k as f64 / nf;
        if 2 * k == n {
            for j in 0..n {
                q[[j, col]] = (w * j as f64).cos() / nf.sqrt();
            }
            col += 1;
        } else {
            let a = (2.0 / nf).sqrt();
            for j in 0..n {
                q[[j, col]] = a * (w * j as f64).cos();
            }
            col += 1;
            if col < count {
                for j in 0..n {
                    q[[j, col]] = a * (w * j as f64).sin();
                }
                col += 1;
            }
        }
        k += 1;
    }
    q
}

/// The ideal band-limited sinc matrix `(n/Δ) Q Qᵀ` of rank `⌈Δ⌉`.
pub fn ideal_linear_sinc(n: usize, delta: f64) -> Result<Array2<f64>> {
    check_delta(delta)?;
    let q = low_frequency_basis(n, plateau_count(n, delta));
    Ok(q.dot(&q.t()) * (n as f64 / delta))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdealLinearReport {
    pub sigma_r: Vec<f64>,
    pub sigma_s: Vec<f64>,
    pub rank_r: usize,
    /// `σ_k(R̄) ≤ (n/Δ) σ_k²(α)` for every k, with 1e-10 slack.
    pub bound_ok: bool,
    pub bound_min_slack: f64,
    /// Whether `‖α‖∞² ≥ 1/n`, the regime of the dominance comparison.
    pub dominance_applicable: bool,
    /// `σ_k(S̄/n) ≤ σ_k(R̄)` for every k below the plateau count.
    pub dominance_ok: bool,
}

/// `R̄_lin = diag(α) S̄_lin diag(α)†` and its bounds.
pub fn ideal_linear_pair(alpha: ArrayView1<Complex64>, n: usize, delta: f64) -> Result<IdealLinearReport> {
    check_delta(delta)?;
    if alpha.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: alpha.len() });
    }
    let count = plateau_count(n, delta);
    let height = n as f64 / delta;
    let q = low_frequency_basis(n, count);
    // R̄ = height · (diag(α)Q)(diag(α)Q)†; its nonzero spectrum is that of
    // the count × count Gram matrix.
    let aq = Array2::from_shape_fn((n, count), |(i, j)| alpha[i] * q[[i, j]]);
    let gram = linalg::matmul_adj_lhs(aq.view(), aq.view());
    let mut sigma_r = hermitian_singular_values(gram.view())?.mapv(|x| x * height).to_vec();
    sigma_r.resize(n, 0.0);
    let mut sigma_s = vec![height; count];
    sigma_s.resize(n, 0.0);

    let mut sigma_alpha: Vec<f64> = alpha.iter().map(|a| a.norm()).collect();
    sigma_alpha.sort_by(|a, b| b.total_cmp(a));
    let mut min_slack = f64::INFINITY;
    for k in 0..n {
        let bound = if k < count { height * sigma_alpha[k] * sigma_alpha[k] } else { 0.0 };
        min_slack = min_slack.min(bound - sigma_r[k]);
    }
    let dominance_applicable = sigma_alpha[0] * sigma_alpha[0] >= 1.0 / n as f64;
    let dominance_ok = (0..count).all(|k| sigma_s[k] / n as f64 <= sigma_r[k] + 1e-12);
    Ok(IdealLinearReport {
        rank_r: numerical_rank(ArrayView1::from(&sigma_r)),
        sigma_r,
        sigma_s,
        bound_ok: min_slack >= -BOUND_SLACK,
        bound_min_slack: min_slack,
        dominance_applicable,
        dominance_ok,
    })
}

/// Path length of the eigenvalue sweep and the dimension of the linear
/// sweep with the same length and range.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stretch {
    pub path_length: f64,
    pub n_stretched: usize,
}

pub fn stretch_dimension(omega: ArrayView1<f64>) -> Result<Stretch> {
    let n = omega.len();
    if n < 2 {
        return Err(Error::validation("stretch needs at least 2 eigenvalues"));
    }
    if omega.iter().any(|w| !w.is_finite()) || omega.windows(2).into_iter().any(|w| w[1] < w[0]) {
        return Err(Error::validation("eigenvalues must be finite and sorted ascending"));
    }
    let path_length: f64 = omega.windows(2).into_iter().map(|w| (w[1] - w[0]).hypot(1.0)).sum();
    let range = omega[n - 1] - omega[0];
    let chord = (path_length * path_length - range * range).max(0.0).sqrt();
    Ok(Stretch { path_length, n_stretched: ceil_tol(1.0 + chord) as usize })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsSummary {
    #[serde(rename = "svRbnd_ok")]
    pub sv_bound_ok: bool,
    pub kyfan_ok: bool,
    #[serde(rename = "rank_R")]
    pub rank_r: usize,
}

/// Everything needed to plot `σ(R)`, `σ(S)`, `σ(S_lin)` and their error
/// curves for one `(H, ψ₀, T)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub n: usize,
    #[serde(rename = "T")]
    pub t: f64,
    pub delta: f64,
    pub m_tbw: usize,
    #[serde(rename = "sigma_R")]
    pub sigma_r: Vec<f64>,
    #[serde(rename = "sigma_S")]
    pub sigma_s: Vec<f64>,
    #[serde(rename = "sigma_Slin")]
    pub sigma_slin: Vec<f64>,
    #[serde(rename = "eps_R")]
    pub eps_r: Vec<f64>,
    #[serde(rename = "eps_S")]
    pub eps_s: Vec<f64>,
    #[serde(rename = "eps_Slin")]
    pub eps_slin: Vec<f64>,
    pub bounds: BoundsSummary,
}

pub fn spectral_report(h: &HamiltonianModel, psi0: &InitialState, t: f64) -> Result<SpectralReport> {
    let pair = spectral_pair(h, psi0, t)?;
    let tb = time_bandwidth(h, t);
    let sigma_r = pair.sigma_r()?;
    let sigma_s = pair.sigma_s()?;
    let s_lin = linear_sweep_sinc(h.dim(), tb.delta)?;
    let sigma_slin = symmetric_singular_values(s_lin.view())?;
    let bounds = bounds_from_spectra(pair.alpha.view(), sigma_r.view(), sigma_s.view());
    Ok(SpectralReport {
        n: h.dim(),
        t,
        delta: tb.delta,
        m_tbw: tb.m_tbw,
        eps_r: singular_value_error_curve(sigma_r.view())?.to_vec(),
        eps_s: singular_value_error_curve(sigma_s.view())?.to_vec(),
        eps_slin: singular_value_error_curve(sigma_slin.view())?.to_vec(),
        sigma_r: sigma_r.to_vec(),
        sigma_s: sigma_s.to_vec(),
        sigma_slin: sigma_slin.to_vec(),
        bounds: BoundsSummary { sv_bound_ok: bounds.sv_bound_ok, kyfan_ok: bounds.kyfan_ok, rank_r: bounds.rank_r },
    })
}
