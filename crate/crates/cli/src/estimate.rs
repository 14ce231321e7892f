//! Resource estimates computed from a configuration alone.
//!
//! Memory is counted as the number of dense `n × n` matrices alive at the
//! peak, at 16 bytes per complex and 8 per real entry, plus the `n × K`
//! trajectory blocks. Eigendecompositions count dense Hermitian eigensolves
//! after the Hamiltonians are built; each Hamiltonian build performs one
//! more, reported as `hamiltonian_builds`. Gram eigensolves of `K × K`
//! snapshot matrices are reported as `snapshot_svds`.

use serde::Serialize;

use crate::config::{ExperimentConfig, InitKind, Params, SpectrumSpec};

const GIB: f64 = (1u64 << 30) as f64;
/// A single dense matrix at least this large triggers a warning.
const LARGE_MATRIX_BYTES: u64 = 1 << 30;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub experiment: &'static str,
    /// Largest Hilbert-space dimension touched.
    pub max_dim: usize,
    /// Bytes of one dense complex matrix at `max_dim`.
    pub dense_matrix_bytes: u64,
    pub peak_memory_bytes: u64,
    pub hamiltonian_builds: u64,
    pub eigendecompositions: u64,
    pub snapshot_svds: u64,
    pub expm_calls: u64,
    pub training_epochs: u64,
    pub warnings: Vec<String>,
}

fn complex_bytes(n: usize) -> u64 {
    (n as u64).saturating_mul(n as u64).saturating_mul(16)
}

fn real_bytes(n: usize) -> u64 {
    (n as u64).saturating_mul(n as u64).saturating_mul(8)
}

fn block_bytes(n: usize, k: usize) -> u64 {
    (n as u64).saturating_mul(k as u64).saturating_mul(16)
}

#[derive(Default)]
struct Tally {
    max_dim: usize,
    peak: u64,
    builds: u64,
    eig: u64,
    svds: u64,
    expm: u64,
    epochs: u64,
}

impl Tally {
    fn dim(&mut self, n: usize) {
        self.max_dim = self.max_dim.max(n);
    }

    fn peak(&mut self, bytes: u64) {
        self.peak = self.peak.max(bytes);
    }
}

pub fn estimate(config: &ExperimentConfig) -> Estimate {
    let mut t = Tally::default();
    match &config.params {
        Params::TfiErrors(p) => {
            let n = 1usize << p.n_spin;
            t.dim(n);
            // H, V, R, C, POD vectors, projector residual; S and S_lin real.
            t.peak(6 * complex_bytes(n) + 2 * real_bytes(n) + 4 * block_bytes(n, p.k));
            let ground = p.inits.contains(&InitKind::Ground);
            t.builds = 1 + u64::from(ground);
            t.eig = 2 + 2 * p.inits.len() as u64;
        }
        Params::SnapshotSv(p) => {
            for &s in &p.n_spins {
                let n = 1usize << s;
                t.dim(n);
                t.peak(2 * complex_bytes(n) + 2 * block_bytes(n, p.k));
                t.builds += 1 + u64::from(p.init == InitKind::Ground);
                t.svds += 1;
            }
        }
        Params::SweepSpectra(p) => {
            let mut dims: Vec<usize> = p.cases.iter().map(|c| c.n).collect();
            for &s in &p.tfi_n_spins {
                dims.push(1 << s);
                t.builds += 1;
            }
            for n in dims {
                t.dim(n);
                t.peak(2 * real_bytes(n) + complex_bytes(n));
                t.eig += 1;
            }
        }
        Params::RandomH(p) => {
            t.dim(p.n);
            t.peak(4 * complex_bytes(p.n) + real_bytes(p.n));
            t.builds = 1;
            t.eig = 2 + p.subspace_k.len() as u64;
        }
        Params::AeTable(p) => {
            let n = 1usize << p.n_spin;
            t.dim(n);
            t.peak(3 * complex_bytes(n) + 8 * block_bytes(n, p.k));
            t.builds = 1;
            t.eig = 1;
            t.epochs = (p.epochs * p.train_m.len()) as u64;
        }
        Params::Ltv(p) => {
            t.dim(p.n);
            t.peak(8 * complex_bytes(p.n) + 2 * block_bytes(p.n, p.k + 1));
            t.builds = 2;
            let runs = (p.trials * p.c_mags.len()) as u64;
            t.expm = runs * p.k as u64;
            t.svds = runs;
        }
        Params::NldiTable(p) => {
            t.dim(p.n);
            t.peak(8 * complex_bytes(p.n) + 2 * block_bytes(p.n, p.k + 1));
            t.builds = 2;
            let runs = (p.trials * p.c_mags.len()) as u64;
            t.expm = runs * p.k as u64;
            t.svds = runs;
            // The δ = 0 grid point reuses the cached spectrum of H₀.
            t.eig = p
                .c_mags
                .iter()
                .map(|&c| if c == 0.0 { 0 } else { (p.grid - usize::from(p.grid % 2 == 1)) as u64 })
                .sum();
        }
        Params::Unitary(p) => {
            t.dim(p.n);
            // One covariance per column in flight, plus the bases kept.
            t.peak(complex_bytes(p.n) * (4 + p.n as u64 / 2) + real_bytes(p.n));
            t.builds = 1;
            t.eig = p.n as u64 + 1;
        }
        Params::Stretch(p) | Params::Eigs(p) => {
            for s in &p.spectra {
                let n = s.dim();
                t.dim(n);
                if s.needs_diagonalization() {
                    t.builds += 1;
                    t.peak(3 * complex_bytes(n));
                }
                if let SpectrumSpec::Poly { .. } | SpectrumSpec::Explicit { .. } = s {
                    t.peak(16 * n as u64);
                }
            }
        }
    }

    let dense = complex_bytes(t.max_dim);
    let cap = config.max_memory_gb * GIB;
    let mut warnings = Vec::new();
    if dense >= LARGE_MATRIX_BYTES {
        warnings.push(format!(
            "one dense {n} x {n} complex matrix takes {:.2} GB",
            dense as f64 / 1e9,
            n = t.max_dim
        ));
    }
    if t.peak as f64 > cap {
        warnings.push(format!(
            "peak memory {:.2} GiB exceeds the {:.2} GiB cap (max_memory_gb)",
            t.peak as f64 / GIB,
            config.max_memory_gb
        ));
    }
    Estimate {
        experiment: config.experiment.name(),
        max_dim: t.max_dim,
        dense_matrix_bytes: dense,
        peak_memory_bytes: t.peak,
        hamiltonian_builds: t.builds,
        eigendecompositions: t.eig,
        snapshot_svds: t.svds,
        expm_calls: t.expm,
        training_epochs: t.epochs,
        warnings,
    }
}

impl Estimate {
    pub fn exceeds(&self, max_memory_gb: f64) -> bool {
        self.peak_memory_bytes as f64 > max_memory_gb * GIB
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn large_tfi_warns() {
        let c = parse_config("experiment = \"tfi_errors\"\n[params]\nn_spin = 14\nh = 2.0\nt = 2.0\n").unwrap();
        let e = estimate(&c);
        assert!(e.peak_memory_bytes >= 16384 * 16384 * 16);
        assert_eq!(e.dense_matrix_bytes, 16384 * 16384 * 16);
        assert!(!e.warnings.is_empty());
        assert!(e.exceeds(c.max_memory_gb));
    }

    #[test]
    fn ltv_accounting() {
        let c = parse_config("experiment = \"ltv\"\n[params]\nn = 128\ntrials = 100\nc_mags = [1.0]\n").unwrap();
        let e = estimate(&c);
        assert_eq!(e.eigendecompositions, 0);
        assert_eq!(e.expm_calls, 100 * 200);
        assert!(e.warnings.is_empty());
    }
}
