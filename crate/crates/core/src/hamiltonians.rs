//! Hamiltonian families with cached eigendecompositions.

use std::collections::BTreeMap;

use ndarray::{Array1, Array2, ArrayView1};
use num_complex::Complex64;
use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, eigh, eigh_real, fix_column_phases, haar_unitary, hermitian_defect, matmul_adj_rhs, CMatrix, CVector,
    ZERO,
};
use crate::rng::{complex_normal, stream};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Tfi,
    Xxz,
    RandomHermitian,
    SyntheticSpectrum,
    Composite,
}

/// Size caps for dense construction.
#[derive(Clone, Copy, Debug)]
pub struct Limits {
    pub max_spins: usize,
    pub max_dim: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_spins: 14, max_dim: 1 << 14 }
    }
}

impl Limits {
    fn check_spins(&self, n_spin: usize) -> Result<()> {
        if n_spin == 0 {
            return Err(Error::validation("n_spin must be at least 1"));
        }
        if n_spin > self.max_spins {
            return Err(Error::ResourceLimit {
                what: "n_spin",
                requested: n_spin as u64,
                cap: self.max_spins as u64,
            });
        }
        Ok(())
    }

    fn check_dim(&self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::validation("dimension must be at least 1"));
        }
        if n > self.max_dim {
            return Err(Error::ResourceLimit { what: "dimension", requested: n as u64, cap: self.max_dim as u64 });
        }
        Ok(())
    }
}

/// A dense Hermitian matrix `H = V diag(ω) V†` with its eigendecomposition.
///
/// Eigenvalues are ascending and each eigenvector has its largest-magnitude
/// component real and positive.
#[derive(Clone, Debug)]
pub struct HamiltonianModel {
    matrix: CMatrix,
    eigenvectors: CMatrix,
    eigenvalues: Array1<f64>,
    family: Family,
    params: BTreeMap<String, f64>,
}

impl HamiltonianModel {
    /// Diagonalize a Hermitian matrix. Real matrices take the real
    /// symmetric solver.
    pub fn from_hermitian(matrix: CMatrix, family: Family, params: BTreeMap<String, f64>) -> Result<Self> {
        let n = matrix.nrows();
        if matrix.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: matrix.ncols() });
        }
        if n == 0 {
            return Err(Error::validation("empty Hamiltonian"));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::validation("Hamiltonian has non-finite entries"));
        }
        let scale = linalg::max_abs(matrix.view()).max(1.0);
        let defect = hermitian_defect(matrix.view());
        if defect > 1e-12 * scale {
            return Err(Error::validation(format!("matrix is not Hermitian (defect {defect:.3e})")));
        }
        let mut matrix = matrix;
        for i in 0..n {
            matrix[[i, i]].im = 0.0;
            for j in i + 1..n {
                let avg = (matrix[[i, j]] + matrix[[j, i]].conj()) * 0.5;
                matrix[[i, j]] = avg;
                matrix[[j, i]] = avg.conj();
            }
        }

        let (eigenvalues, eigenvectors) = if matrix.iter().all(|z| z.im == 0.0) {
            let real = matrix.mapv(|z| z.re);
            let (w, v) = eigh_real(real.view())?;
            (w, linalg::to_complex(v.view()))
        } else {
            let e = eigh(matrix.view())?;
            (e.values, e.vectors)
        };
        Ok(HamiltonianModel { matrix, eigenvectors, eigenvalues, family, params })
    }

    /// Assemble from a known eigendecomposition; `omega` must be ascending.
    pub fn from_spectrum(
        mut eigenvectors: CMatrix,
        omega: Array1<f64>,
        family: Family,
        params: BTreeMap<String, f64>,
    ) -> Result<Self> {
        let n = omega.len();
        if eigenvectors.dim() != (n, n) {
            return Err(Error::DimensionMismatch { expected: n, found: eigenvectors.nrows() });
        }
        check_sorted(omega.view())?;
        fix_column_phases(&mut eigenvectors);
        let scaled = &eigenvectors * &omega.mapv(|w| Complex64::new(w, 0.0));
        let mut matrix = matmul_adj_rhs(scaled.view(), eigenvectors.view());
        for i in 0..n {
            matrix[[i, i]].im = 0.0;
            for j in i + 1..n {
                let avg = (matrix[[i, j]] + matrix[[j, i]].conj()) * 0.5;
                matrix[[i, j]] = avg;
                matrix[[j, i]] = avg.conj();
            }
        }
        Ok(HamiltonianModel { matrix, eigenvectors, eigenvalues: omega, family, params })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    pub fn eigenvalues(&self) -> &Array1<f64> {
        &self.eigenvalues
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `ω_max − ω_min`.
    pub fn spectral_range(&self) -> f64 {
        let n = self.dim();
        self.eigenvalues[n - 1] - self.eigenvalues[0]
    }

    /// Largest singular value, i.e. `max |ω|`.
    pub fn spectral_norm(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0f64, |m, w| m.max(w.abs()))
    }

    /// The same Hamiltonian multiplied by `a > 0`.
    pub fn scaled(&self, a: f64) -> HamiltonianModel {
        let mut params = self.params.clone();
        params.insert("scale".into(), a * self.params.get("scale").copied().unwrap_or(1.0));
        HamiltonianModel {
            matrix: self.matrix.mapv(|z| z * a),
            eigenvectors: self.eigenvectors.clone(),
            eigenvalues: self.eigenvalues.mapv(|w| w * a),
            family: self.family,
            params,
        }
    }
}

fn check_sorted(omega: ArrayView1<f64>) -> Result<()> {
    if omega.iter().any(|w| !w.is_finite()) {
        return Err(Error::validation("spectrum has non-finite entries"));
    }
    if omega.windows(2).into_iter().any(|w| w[1] < w[0]) {
        return Err(Error::validation("spectrum must be sorted ascending"));
    }
    Ok(())
}

fn z_sign(state: usize, site: usize) -> f64 {
    if state >> site & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Transverse-field Ising chain `−h Σ σˣ_i − Σ σᶻ_i σᶻ_{i+1}` with open
/// boundary.
pub fn build_tfi(n_spin: usize, h: f64) -> Result<HamiltonianModel> {
    build_tfi_with(n_spin, h, &Limits::default())
}

pub fn build_tfi_with(n_spin: usize, h: f64, limits: &Limits) -> Result<HamiltonianModel> {
    limits.check_spins(n_spin)?;
    if !h.is_finite() {
        return Err(Error::validation("h must be finite"));
    }
    let n = 1usize << n_spin;
    let mut m = Array2::from_elem((n, n), ZERO);
    for s in 0..n {
        let zz: f64 = (0..n_spin - 1).map(|i| z_sign(s, i) * z_sign(s, i + 1)).sum();
        m[[s, s]].re = -zz;
        for i in 0..n_spin {
            m[[s ^ (1 << i), s]].re -= h;
        }
    }
    let params = BTreeMap::from([("n_spin".to_string(), n_spin as f64), ("h".to_string(), h)]);
    HamiltonianModel::from_hermitian(m, Family::Tfi, params)
}

/// XXZ chain `Σ σˣσˣ + σʸσʸ + δ σᶻσᶻ` on nearest neighbours, open boundary.
pub fn build_xxz(n_spin: usize, delta: f64) -> Result<HamiltonianModel> {
    build_xxz_with(n_spin, delta, &Limits::default())
}

pub fn build_xxz_with(n_spin: usize, delta: f64, limits: &Limits) -> Result<HamiltonianModel> {
    limits.check_spins(n_spin)?;
    if !delta.is_finite() {
        return Err(Error::validation("delta must be finite"));
    }
    let n = 1usize << n_spin;
    let mut m = Array2::from_elem((n, n), ZERO);
    for s in 0..n {
        for i in 0..n_spin.saturating_sub(1) {
            let zz = z_sign(s, i) * z_sign(s, i + 1);
            m[[s, s]].re += delta * zz;
            // σˣσˣ + σʸσʸ = 2(σ⁺σ⁻ + σ⁻σ⁺): swaps antiparallel neighbours.
            if zz < 0.0 {
                m[[s ^ (0b11 << i), s]].re += 2.0;
            }
        }
    }
    let params = BTreeMap::from([("n_spin".to_string(), n_spin as f64), ("delta".to_string(), delta)]);
    HamiltonianModel::from_hermitian(m, Family::Xxz, params)
}

/// `(A + A†)/2` with standard complex Gaussian `A`, optionally rescaled to a
/// given spectral norm.
pub fn build_random_hermitian(n: usize, seed: u64, norm_target: Option<f64>) -> Result<HamiltonianModel> {
    build_random_hermitian_with(n, seed, norm_target, &Limits::default())
}

pub fn build_random_hermitian_with(
    n: usize,
    seed: u64,
    norm_target: Option<f64>,
    limits: &Limits,
) -> Result<HamiltonianModel> {
    limits.check_dim(n)?;
    if let Some(t) = norm_target {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::validation("norm_target must be positive"));
        }
    }
    let mut rng = stream(seed, "random-hermitian");
    let a = Array2::from_shape_simple_fn((n, n), || complex_normal(&mut rng));
    let mut m = Array2::from_elem((n, n), ZERO);
    for i in 0..n {
        m[[i, i]] = Complex64::new(a[[i, i]].re, 0.0);
        for j in i + 1..n {
            let v = (a[[i, j]] + a[[j, i]].conj()) * 0.5;
            m[[i, j]] = v;
            m[[j, i]] = v.conj();
        }
    }
    let mut params = BTreeMap::from([("n".to_string(), n as f64), ("seed".to_string(), seed as f64)]);
    let model = HamiltonianModel::from_hermitian(m, Family::RandomHermitian, BTreeMap::new())?;
    let model = match norm_target {
        Some(t) => {
            params.insert("norm_target".into(), t);
            let norm = model.spectral_norm();
            if norm == 0.0 {
                return Err(Error::Numerical("random Hamiltonian has zero norm".into()));
            }
            let mut scaled = model.scaled(t / norm);
            scaled.params = params;
            scaled
        }
        None => HamiltonianModel { params, ..model },
    };
    Ok(model)
}

/// `V diag(ω) V†` with a seeded Haar-random `V`.
pub fn build_synthetic_spectrum(omega: &[f64], seed: u64) -> Result<HamiltonianModel> {
    let n = omega.len();
    Limits::default().check_dim(n)?;
    let omega = Array1::from(omega.to_vec());
    check_sorted(omega.view())?;
    let mut rng = stream(seed, "synthetic-unitary");
    let v = haar_unitary(n, &mut rng);
    let params = BTreeMap::from([("n".to_string(), n as f64), ("seed".to_string(), seed as f64)]);
    HamiltonianModel::from_spectrum(v, omega, Family::SyntheticSpectrum, params)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    GroundState { family: Family, degenerate: bool },
    RandomHaar { seed: u64 },
    SubspaceConfined { seed: u64, indices: Vec<usize> },
    Basis(usize),
    Perturbed { seed: u64, magnitude: f64, distance: f64 },
    Explicit,
}

/// A unit-norm initial state.
#[derive(Clone, Debug)]
pub struct InitialState {
    pub vector: CVector,
    pub kind: StateKind,
}

impl InitialState {
    pub fn basis(n: usize, index: usize) -> Result<Self> {
        if index >= n {
            return Err(Error::validation(format!("basis index {index} out of range for n = {n}")));
        }
        let mut vector = Array1::from_elem(n, ZERO);
        vector[index] = linalg::ONE;
        Ok(InitialState { vector, kind: StateKind::Basis(index) })
    }

    /// Normalize an arbitrary nonzero vector.
    pub fn explicit(vector: CVector) -> Result<Self> {
        let norm = linalg::vector_norm(vector.view());
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::validation("initial state must be a finite nonzero vector"));
        }
        Ok(InitialState { vector: vector.mapv(|z| z / norm), kind: StateKind::Explicit })
    }

    pub fn dim(&self) -> usize {
        self.vector.len()
    }

    pub fn is_degenerate_ground_state(&self) -> bool {
        matches!(self.kind, StateKind::GroundState { degenerate: true, .. })
    }
}

/// Eigenvector of the smallest eigenvalue. A gap below 1e-10 sets the
/// degeneracy flag on the returned state.
pub fn ground_state(h: &HamiltonianModel) -> InitialState {
    let w = h.eigenvalues();
    let degenerate = w.len() > 1 && w[1] - w[0] < 1e-10;
    InitialState {
        vector: h.eigenvectors().column(0).to_owned(),
        kind: StateKind::GroundState { family: h.family(), degenerate },
    }
}

/// Normalized standard complex Gaussian vector.
pub fn random_state(n: usize, seed: u64) -> Result<InitialState> {
    if n == 0 {
        return Err(Error::validation("dimension must be at least 1"));
    }
    let mut rng = stream(seed, "random-state");
    let g = Array1::from_shape_simple_fn(n, || complex_normal(&mut rng));
    let norm = linalg::vector_norm(g.view());
    Ok(InitialState { vector: g.mapv(|z| z / norm), kind: StateKind::RandomHaar { seed } })
}

/// Random unit combination of `k` distinct eigenvectors of `h`.
pub fn subspace_confined_state(h: &HamiltonianModel, k: usize, seed: u64) -> Result<InitialState> {
    let n = h.dim();
    if k == 0 || k > n {
        return Err(Error::validation(format!("subspace size k = {k} must lie in 1..={n}")));
    }
    let mut rng = stream(seed, "subspace-confined");
    let mut indices = index::sample(&mut rng, n, k).into_vec();
    indices.sort_unstable();
    let coeffs: Vec<Complex64> = (0..k).map(|_| complex_normal(&mut rng)).collect();
    let norm = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let v = h.eigenvectors();
    let mut vector = Array1::from_elem(n, ZERO);
    for (&j, &c) in indices.iter().zip(&coeffs) {
        vector.scaled_add(c / norm, &v.column(j));
    }
    Ok(InitialState { vector, kind: StateKind::SubspaceConfined { seed, indices } })
}
