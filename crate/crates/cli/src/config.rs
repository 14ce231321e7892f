//! TOML experiment configuration.
//!
//! ```toml
//! experiment = "tfi_errors"
//! seed = 7
//! output_dir = "out/tfi"
//!
//! [params]
//! n_spin = 10
//! h = 2.0
//! t = 2.0
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const DEFAULT_MAX_MEMORY_GB: f64 = 4.0;
const MAX_SPINS: usize = 14;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub field: String,
    pub message: String,
}

impl Diagnostic {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic { field: field.into(), message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    TfiErrors,
    SnapshotSv,
    SweepSpectra,
    RandomH,
    AeTable,
    Ltv,
    NldiTable,
    Unitary,
    Stretch,
    Eigs,
}

impl Experiment {
    pub const ALL: [Experiment; 10] = [
        Experiment::TfiErrors,
        Experiment::SnapshotSv,
        Experiment::SweepSpectra,
        Experiment::RandomH,
        Experiment::AeTable,
        Experiment::Ltv,
        Experiment::NldiTable,
        Experiment::Unitary,
        Experiment::Stretch,
        Experiment::Eigs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::TfiErrors => "tfi_errors",
            Experiment::SnapshotSv => "snapshot_sv",
            Experiment::SweepSpectra => "sweep_spectra",
            Experiment::RandomH => "random_h",
            Experiment::AeTable => "ae_table",
            Experiment::Ltv => "ltv",
            Experiment::NldiTable => "nldi_table",
            Experiment::Unitary => "unitary",
            Experiment::Stretch => "stretch",
            Experiment::Eigs => "eigs",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Experiment::TfiErrors => "TFI error curves for R, S and S_lin, RMS state/equation errors, histograms",
            Experiment::SnapshotSv => "snapshot singular values of TFI trajectories",
            Experiment::SweepSpectra => "linear-sweep sinc spectra against the ideal and Fourier asymptotics",
            Experiment::RandomH => "random Hamiltonian with random and subspace-confined initial states",
            Experiment::AeTable => "POD against trained autoencoder on TFI snapshots",
            Experiment::Ltv => "error curves of time-varying dynamics over random fields",
            Experiment::NldiTable => "predicted against measured compression for time-varying dynamics",
            Experiment::Unitary => "column-wise POD of the propagator against the linear-sweep bound",
            Experiment::Stretch => "stretched linear-sweep dimension of eigenvalue sweeps",
            Experiment::Eigs => "eigenvalue sweeps of the configured spectra",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    Ground,
    Random,
}

impl InitKind {
    pub fn name(self) -> &'static str {
        match self {
            InitKind::Ground => "ground",
            InitKind::Random => "random",
        }
    }
}

fn d_k() -> usize {
    200
}
fn d_bins() -> usize {
    60
}
fn d_norm() -> f64 {
    10.0
}
fn d_t2() -> f64 {
    2.0
}
fn d_h2() -> f64 {
    2.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TfiErrorsParams {
    pub n_spin: usize,
    pub h: f64,
    pub t: f64,
    #[serde(default = "d_k")]
    pub k: usize,
    /// Field of the Hamiltonian whose ground state starts the run.
    #[serde(default = "TfiErrorsParams::d_ground_h")]
    pub ground_h: f64,
    #[serde(default = "TfiErrorsParams::d_inits")]
    pub inits: Vec<InitKind>,
    #[serde(default = "TfiErrorsParams::d_m_max")]
    pub m_max: usize,
    /// Levels above the dimension are skipped.
    #[serde(default = "TfiErrorsParams::d_histogram_m")]
    pub histogram_m: Vec<usize>,
    #[serde(default = "d_bins")]
    pub bins: usize,
    #[serde(default = "TfiErrorsParams::d_perturbations")]
    pub perturbations: Vec<f64>,
    #[serde(default = "TfiErrorsParams::d_perturb_init")]
    pub perturb_init: InitKind,
}

impl TfiErrorsParams {
    fn d_ground_h() -> f64 {
        4.0
    }
    fn d_inits() -> Vec<InitKind> {
        vec![InitKind::Ground, InitKind::Random]
    }
    fn d_m_max() -> usize {
        30
    }
    fn d_histogram_m() -> Vec<usize> {
        vec![10, 15, 20, 25]
    }
    fn d_perturbations() -> Vec<f64> {
        vec![0.001, 0.01]
    }
    fn d_perturb_init() -> InitKind {
        InitKind::Ground
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotSvParams {
    #[serde(default = "SnapshotSvParams::d_n_spins")]
    pub n_spins: Vec<usize>,
    pub h: f64,
    pub t: f64,
    #[serde(default = "d_k")]
    pub k: usize,
    #[serde(default = "SnapshotSvParams::d_init")]
    pub init: InitKind,
    #[serde(default = "SnapshotSvParams::d_ground_h")]
    pub ground_h: f64,
}

impl SnapshotSvParams {
    fn d_n_spins() -> Vec<usize> {
        vec![10, 12]
    }
    fn d_init() -> InitKind {
        InitKind::Random
    }
    fn d_ground_h() -> f64 {
        4.0
    }
}

/// One linear-sweep case; exactly one of `delta` and `delta_times_pi` is set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepCase {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// `Δ·π`, so `delta_times_pi = 100` means `Δ = 100/π`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_times_pi: Option<f64>,
}

impl SweepCase {
    pub fn delta(&self) -> f64 {
        self.delta.unwrap_or_else(|| self.delta_times_pi.unwrap_or(f64::NAN) / std::f64::consts::PI)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpectraParams {
    #[serde(default = "SweepSpectraParams::d_cases")]
    pub cases: Vec<SweepCase>,
    /// TFI chains whose `(n, Δ)` are added as further cases.
    #[serde(default)]
    pub tfi_n_spins: Vec<usize>,
    #[serde(default = "d_h2")]
    pub h: f64,
    #[serde(default = "d_t2")]
    pub t: f64,
    /// Use a truncated Fourier series instead of the closed-form symbol.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fourier_terms: Option<usize>,
}

impl SweepSpectraParams {
    fn d_cases() -> Vec<SweepCase> {
        vec![
            SweepCase { n: 500, delta: None, delta_times_pi: Some(100.0) },
            SweepCase { n: 3000, delta: None, delta_times_pi: Some(300.0) },
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomHParams {
    #[serde(default = "RandomHParams::d_n")]
    pub n: usize,
    #[serde(default = "d_norm")]
    pub norm: f64,
    #[serde(default = "RandomHParams::d_t")]
    pub t: f64,
    #[serde(default = "RandomHParams::d_subspace_k")]
    pub subspace_k: Vec<usize>,
}

impl RandomHParams {
    fn d_n() -> usize {
        2000
    }
    fn d_t() -> f64 {
        10.0
    }
    fn d_subspace_k() -> Vec<usize> {
        vec![15, 30, 60]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivationName {
    Tanh,
    Relu,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignName {
    Plus,
    Minus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AeTableParams {
    #[serde(default = "AeTableParams::d_n_spin")]
    pub n_spin: usize,
    #[serde(default = "d_h2")]
    pub h: f64,
    #[serde(default = "d_t2")]
    pub t: f64,
    #[serde(default = "d_k")]
    pub k: usize,
    #[serde(default = "AeTableParams::d_m_values")]
    pub m_values: Vec<usize>,
    /// Levels at which an autoencoder is trained.
    #[serde(default = "AeTableParams::d_train_m")]
    pub train_m: Vec<usize>,
    #[serde(default = "AeTableParams::d_hidden")]
    pub hidden_widths: Vec<usize>,
    #[serde(default = "AeTableParams::d_activation")]
    pub activation: ActivationName,
    #[serde(default = "AeTableParams::d_epochs")]
    pub epochs: usize,
    #[serde(default = "AeTableParams::d_lr")]
    pub learning_rate: f64,
    #[serde(default = "AeTableParams::d_momentum")]
    pub momentum: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch_size: Option<usize>,
    #[serde(default = "AeTableParams::d_sign")]
    pub residual_sign: SignName,
    #[serde(default = "d_bins")]
    pub bins: usize,
}

impl AeTableParams {
    fn d_n_spin() -> usize {
        10
    }
    fn d_m_values() -> Vec<usize> {
        vec![5, 10, 15]
    }
    fn d_train_m() -> Vec<usize> {
        vec![5]
    }
    fn d_hidden() -> Vec<usize> {
        vec![64]
    }
    fn d_activation() -> ActivationName {
        ActivationName::Tanh
    }
    fn d_epochs() -> usize {
        3000
    }
    fn d_lr() -> f64 {
        0.05
    }
    fn d_momentum() -> f64 {
        0.9
    }
    fn d_sign() -> SignName {
        SignName::Plus
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LtvParams {
    #[serde(default = "LtvParams::d_n")]
    pub n: usize,
    #[serde(default = "d_norm")]
    pub norm: f64,
    #[serde(default = "d_t2")]
    pub t: f64,
    #[serde(default = "d_k")]
    pub k: usize,
    #[serde(default = "LtvParams::d_c_mags")]
    pub c_mags: Vec<f64>,
    #[serde(default = "LtvParams::d_trials")]
    pub trials: usize,
}

impl LtvParams {
    fn d_n() -> usize {
        128
    }
    fn d_c_mags() -> Vec<f64> {
        vec![0.1, 1.0, 10.0]
    }
    fn d_trials() -> usize {
        100
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NldiTableParams {
    #[serde(default = "LtvParams::d_n")]
    pub n: usize,
    #[serde(default = "d_norm")]
    pub norm: f64,
    #[serde(default = "d_t2")]
    pub t: f64,
    #[serde(default = "d_k")]
    pub k: usize,
    #[serde(default = "LtvParams::d_c_mags")]
    pub c_mags: Vec<f64>,
    #[serde(default = "LtvParams::d_trials")]
    pub trials: usize,
    #[serde(default = "NldiTableParams::d_grid")]
    pub grid: usize,
    #[serde(default = "NldiTableParams::d_thresholds")]
    pub thresholds: Vec<f64>,
}

impl NldiTableParams {
    fn d_grid() -> usize {
        qcompress::nldi::DEFAULT_GRID
    }
    fn d_thresholds() -> Vec<f64> {
        qcompress::nldi::DEFAULT_THRESHOLDS.to_vec()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitaryHamiltonian {
    Random,
    Linear,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitaryParams {
    #[serde(default = "UnitaryParams::d_hamiltonian")]
    pub hamiltonian: UnitaryHamiltonian,
    #[serde(default = "UnitaryParams::d_n")]
    pub n: usize,
    #[serde(default = "d_norm")]
    pub norm: f64,
    #[serde(default = "d_t2")]
    pub t: f64,
    #[serde(default = "UnitaryParams::d_max_dim")]
    pub max_dim: usize,
}

impl UnitaryParams {
    fn d_hamiltonian() -> UnitaryHamiltonian {
        UnitaryHamiltonian::Random
    }
    fn d_n() -> usize {
        64
    }
    fn d_max_dim() -> usize {
        qcompress::unitary::DEFAULT_MAX_DIM
    }
}

/// A spectrum to sweep, by Hamiltonian family or explicit values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpectrumSpec {
    Tfi {
        n_spin: usize,
        #[serde(default = "d_h2")]
        h: f64,
    },
    Xxz {
        n_spin: usize,
        #[serde(default = "SpectrumSpec::d_xxz_delta")]
        delta: f64,
    },
    Random {
        n: usize,
        #[serde(default = "d_norm")]
        norm: f64,
    },
    /// `ω_k = scale · x_k^power` on `n` equispaced points of `[−1, 1]`.
    Poly {
        n: usize,
        #[serde(default = "SpectrumSpec::d_poly_scale")]
        scale: f64,
        #[serde(default = "SpectrumSpec::d_poly_power")]
        power: i32,
    },
    Explicit {
        omega: Vec<f64>,
    },
}

impl SpectrumSpec {
    fn d_xxz_delta() -> f64 {
        1.5
    }
    fn d_poly_scale() -> f64 {
        20.0
    }
    fn d_poly_power() -> i32 {
        3
    }

    pub fn label(&self) -> String {
        match self {
            SpectrumSpec::Tfi { n_spin, .. } => format!("tfi_nspin{n_spin}"),
            SpectrumSpec::Xxz { n_spin, .. } => format!("xxz_nspin{n_spin}"),
            SpectrumSpec::Random { n, .. } => format!("random_n{n}"),
            SpectrumSpec::Poly { n, .. } => format!("poly_n{n}"),
            SpectrumSpec::Explicit { omega } => format!("explicit_n{}", omega.len()),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            SpectrumSpec::Tfi { n_spin, .. } | SpectrumSpec::Xxz { n_spin, .. } => {
                1usize.checked_shl(*n_spin as u32).unwrap_or(usize::MAX)
            }
            SpectrumSpec::Random { n, .. } | SpectrumSpec::Poly { n, .. } => *n,
            SpectrumSpec::Explicit { omega } => omega.len(),
        }
    }

    /// Whether producing the spectrum needs a dense diagonalization.
    pub fn needs_diagonalization(&self) -> bool {
        matches!(self, SpectrumSpec::Tfi { .. } | SpectrumSpec::Xxz { .. } | SpectrumSpec::Random { .. })
    }

    fn check(&self, field: &str, out: &mut Vec<Diagnostic>) {
        match self {
            SpectrumSpec::Tfi { n_spin, h } => {
                spins(&format!("{field}.n_spin"), *n_spin, out);
                finite(&format!("{field}.h"), *h, out);
            }
            SpectrumSpec::Xxz { n_spin, delta } => {
                spins(&format!("{field}.n_spin"), *n_spin, out);
                finite(&format!("{field}.delta"), *delta, out);
            }
            SpectrumSpec::Random { n, norm } => {
                at_least(&format!("{field}.n"), *n, 2, out);
                positive(&format!("{field}.norm"), *norm, out);
            }
            SpectrumSpec::Poly { n, scale, power } => {
                at_least(&format!("{field}.n"), *n, 2, out);
                positive(&format!("{field}.scale"), *scale, out);
                if *power < 1 || power % 2 == 0 {
                    out.push(Diagnostic::new(format!("{field}.power"), "must be a positive odd integer"));
                }
            }
            SpectrumSpec::Explicit { omega } => {
                if omega.len() < 2 {
                    out.push(Diagnostic::new(format!("{field}.omega"), "needs at least 2 eigenvalues"));
                } else if omega.iter().any(|w| !w.is_finite()) || omega.windows(2).any(|w| w[1] < w[0]) {
                    out.push(Diagnostic::new(format!("{field}.omega"), "must be finite and sorted ascending"));
                }
            }
        }
    }
}

fn default_spectra() -> Vec<SpectrumSpec> {
    vec![
        SpectrumSpec::Tfi { n_spin: 10, h: 2.0 },
        SpectrumSpec::Tfi { n_spin: 12, h: 2.0 },
        SpectrumSpec::Xxz { n_spin: 10, delta: 1.5 },
        SpectrumSpec::Poly { n: 1024, scale: 20.0, power: 3 },
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectraParams {
    #[serde(default = "default_spectra")]
    pub spectra: Vec<SpectrumSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Params {
    TfiErrors(TfiErrorsParams),
    SnapshotSv(SnapshotSvParams),
    SweepSpectra(SweepSpectraParams),
    RandomH(RandomHParams),
    AeTable(AeTableParams),
    Ltv(LtvParams),
    NldiTable(NldiTableParams),
    Unitary(UnitaryParams),
    Stretch(SpectraParams),
    Eigs(SpectraParams),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub max_memory_gb: f64,
    pub params: Params,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: String,
    #[serde(default)]
    seed: u64,
    output_dir: Option<PathBuf>,
    max_memory_gb: Option<f64>,
    #[serde(default)]
    params: toml::Table,
}

/// Rewrites serde's messages so the offending key is named with its path.
fn toml_diagnostic(prefix: &str, message: &str) -> Diagnostic {
    let quoted = |marker: &str| {
        let rest = message.split(marker).nth(1)?;
        let start = rest.find('`')? + 1;
        let end = start + rest[start..].find('`')?;
        Some(rest[start..end].to_string())
    };
    let join = |name: &str| if prefix.is_empty() { name.to_string() } else { format!("{prefix}.{name}") };
    if let Some(name) = quoted("missing field") {
        return Diagnostic::new(join(&name), "missing required field");
    }
    if let Some(name) = quoted("unknown field") {
        let hint = message.split("expected").nth(1).map(|s| format!(" (expected{})", s.trim_end())).unwrap_or_default();
        return Diagnostic::new(join(&name), format!("unknown key{hint}"));
    }
    let field = if prefix.is_empty() { "config".to_string() } else { prefix.to_string() };
    Diagnostic::new(field, message.trim().to_string())
}

fn parse_params<T: DeserializeOwned>(table: toml::Table) -> Result<T, Diagnostic> {
    toml::Value::Table(table).try_into::<T>().map_err(|e| toml_diagnostic("params", e.message()))
}

/// Parses and checks a configuration, collecting every problem found.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, Vec<Diagnostic>> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| vec![toml_diagnostic("", e.message())])?;
    let Some(experiment) = Experiment::from_name(&raw.experiment) else {
        let names: Vec<&str> = Experiment::ALL.iter().map(|e| e.name()).collect();
        return Err(vec![Diagnostic::new(
            "experiment",
            format!("unknown experiment `{}` (expected one of {})", raw.experiment, names.join(", ")),
        )]);
    };
    let params = match experiment {
        Experiment::TfiErrors => parse_params(raw.params).map(Params::TfiErrors),
        Experiment::SnapshotSv => parse_params(raw.params).map(Params::SnapshotSv),
        Experiment::SweepSpectra => parse_params(raw.params).map(Params::SweepSpectra),
        Experiment::RandomH => parse_params(raw.params).map(Params::RandomH),
        Experiment::AeTable => parse_params(raw.params).map(Params::AeTable),
        Experiment::Ltv => parse_params(raw.params).map(Params::Ltv),
        Experiment::NldiTable => parse_params(raw.params).map(Params::NldiTable),
        Experiment::Unitary => parse_params(raw.params).map(Params::Unitary),
        Experiment::Stretch => parse_params(raw.params).map(Params::Stretch),
        Experiment::Eigs => parse_params(raw.params).map(Params::Eigs),
    }
    .map_err(|d| vec![d])?;
    let config = ExperimentConfig {
        experiment,
        seed: raw.seed,
        output_dir: raw.output_dir.unwrap_or_else(|| PathBuf::from("output").join(experiment.name())),
        max_memory_gb: raw.max_memory_gb.unwrap_or(DEFAULT_MAX_MEMORY_GB),
        params,
    };
    let diagnostics = config.check();
    if diagnostics.is_empty() {
        Ok(config)
    } else {
        Err(diagnostics)
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    parse_config(&text).map_err(CliError::Config)
}

fn finite(field: &str, v: f64, out: &mut Vec<Diagnostic>) {
    if !v.is_finite() {
        out.push(Diagnostic::new(field, "must be finite"));
    }
}

fn positive(field: &str, v: f64, out: &mut Vec<Diagnostic>) {
    if !(v.is_finite() && v > 0.0) {
        out.push(Diagnostic::new(field, format!("must be a positive finite number, got {v}")));
    }
}

fn non_negative(field: &str, v: f64, out: &mut Vec<Diagnostic>) {
    if !(v.is_finite() && v >= 0.0) {
        out.push(Diagnostic::new(field, format!("must be finite and non-negative, got {v}")));
    }
}

fn at_least(field: &str, v: usize, min: usize, out: &mut Vec<Diagnostic>) {
    if v < min {
        out.push(Diagnostic::new(field, format!("must be at least {min}, got {v}")));
    }
}

fn spins(field: &str, n_spin: usize, out: &mut Vec<Diagnostic>) {
    if !(1..=MAX_SPINS).contains(&n_spin) {
        out.push(Diagnostic::new(field, format!("must lie in 1..={MAX_SPINS}, got {n_spin}")));
    }
}

fn non_empty<T>(field: &str, v: &[T], out: &mut Vec<Diagnostic>) {
    if v.is_empty() {
        out.push(Diagnostic::new(field, "must not be empty"));
    }
}

fn levels(field: &str, ms: &[usize], n: usize, out: &mut Vec<Diagnostic>) {
    if let Some(m) = ms.iter().find(|&&m| m == 0 || m > n) {
        out.push(Diagnostic::new(field, format!("level {m} outside 1..={n}")));
    }
}

impl ExperimentConfig {
    /// Semantic checks beyond what parsing enforces.
    pub fn check(&self) -> Vec<Diagnostic> {
        let mut d = Vec::new();
        if !(self.max_memory_gb.is_finite() && self.max_memory_gb > 0.0) {
            d.push(Diagnostic::new("max_memory_gb", "must be a positive finite number"));
        }
        match &self.params {
            Params::TfiErrors(p) => {
                spins("params.n_spin", p.n_spin, &mut d);
                finite("params.h", p.h, &mut d);
                positive("params.t", p.t, &mut d);
                at_least("params.k", p.k, 2, &mut d);
                finite("params.ground_h", p.ground_h, &mut d);
                non_empty("params.inits", &p.inits, &mut d);
                at_least("params.m_max", p.m_max, 1, &mut d);
                at_least("params.bins", p.bins, 2, &mut d);
                if p.histogram_m.contains(&0) {
                    d.push(Diagnostic::new("params.histogram_m", "levels must be positive"));
                }
                if p.perturbations.iter().any(|x| !(0.0..1.0).contains(x)) {
                    d.push(Diagnostic::new("params.perturbations", "magnitudes must lie in [0, 1)"));
                }
                if !p.inits.contains(&p.perturb_init) && !p.perturbations.is_empty() {
                    d.push(Diagnostic::new("params.perturb_init", "must be one of params.inits"));
                }
            }
            Params::SnapshotSv(p) => {
                non_empty("params.n_spins", &p.n_spins, &mut d);
                for (i, &s) in p.n_spins.iter().enumerate() {
                    spins(&format!("params.n_spins[{i}]"), s, &mut d);
                }
                finite("params.h", p.h, &mut d);
                positive("params.t", p.t, &mut d);
                at_least("params.k", p.k, 1, &mut d);
                finite("params.ground_h", p.ground_h, &mut d);
            }
            Params::SweepSpectra(p) => {
                if p.cases.is_empty() && p.tfi_n_spins.is_empty() {
                    d.push(Diagnostic::new("params.cases", "no cases configured"));
                }
                for (i, c) in p.cases.iter().enumerate() {
                    at_least(&format!("params.cases[{i}].n"), c.n, 2, &mut d);
                    match (c.delta, c.delta_times_pi) {
                        (Some(x), None) | (None, Some(x)) => non_negative(&format!("params.cases[{i}].delta"), x, &mut d),
                        _ => d.push(Diagnostic::new(
                            format!("params.cases[{i}]"),
                            "set exactly one of delta and delta_times_pi",
                        )),
                    }
                }
                for (i, &s) in p.tfi_n_spins.iter().enumerate() {
                    spins(&format!("params.tfi_n_spins[{i}]"), s, &mut d);
                }
                finite("params.h", p.h, &mut d);
                positive("params.t", p.t, &mut d);
                if p.fourier_terms == Some(0) {
                    d.push(Diagnostic::new("params.fourier_terms", "must be positive"));
                }
            }
            Params::RandomH(p) => {
                at_least("params.n", p.n, 2, &mut d);
                positive("params.norm", p.norm, &mut d);
                positive("params.t", p.t, &mut d);
                levels("params.subspace_k", &p.subspace_k, p.n, &mut d);
            }
            Params::AeTable(p) => {
                spins("params.n_spin", p.n_spin, &mut d);
                finite("params.h", p.h, &mut d);
                positive("params.t", p.t, &mut d);
                at_least("params.k", p.k, 2, &mut d);
                let n = 1usize << p.n_spin.min(MAX_SPINS);
                non_empty("params.m_values", &p.m_values, &mut d);
                levels("params.m_values", &p.m_values, n, &mut d);
                levels("params.train_m", &p.train_m, n, &mut d);
                if p.hidden_widths.contains(&0) {
                    d.push(Diagnostic::new("params.hidden_widths", "widths must be positive"));
                }
                positive("params.learning_rate", p.learning_rate, &mut d);
                if !(0.0..1.0).contains(&p.momentum) {
                    d.push(Diagnostic::new("params.momentum", "must lie in [0, 1)"));
                }
                if p.batch_size == Some(0) {
                    d.push(Diagnostic::new("params.batch_size", "must be positive"));
                }
                at_least("params.bins", p.bins, 2, &mut d);
            }
            Params::Ltv(p) => {
                at_least("params.n", p.n, 2, &mut d);
                positive("params.norm", p.norm, &mut d);
                positive("params.t", p.t, &mut d);
                at_least("params.k", p.k, 1, &mut d);
                at_least("params.trials", p.trials, 1, &mut d);
                non_empty("params.c_mags", &p.c_mags, &mut d);
                for (i, &c) in p.c_mags.iter().enumerate() {
                    non_negative(&format!("params.c_mags[{i}]"), c, &mut d);
                }
            }
            Params::NldiTable(p) => {
                at_least("params.n", p.n, 2, &mut d);
                positive("params.norm", p.norm, &mut d);
                positive("params.t", p.t, &mut d);
                at_least("params.k", p.k, 1, &mut d);
                at_least("params.trials", p.trials, 1, &mut d);
                at_least("params.grid", p.grid, 2, &mut d);
                non_empty("params.c_mags", &p.c_mags, &mut d);
                for (i, &c) in p.c_mags.iter().enumerate() {
                    non_negative(&format!("params.c_mags[{i}]"), c, &mut d);
                }
                for (i, &th) in p.thresholds.iter().enumerate() {
                    positive(&format!("params.thresholds[{i}]"), th, &mut d);
                }
            }
            Params::Unitary(p) => {
                at_least("params.n", p.n, 2, &mut d);
                positive("params.norm", p.norm, &mut d);
                positive("params.t", p.t, &mut d);
            }
            Params::Stretch(p) | Params::Eigs(p) => {
                non_empty("params.spectra", &p.spectra, &mut d);
                for (i, s) in p.spectra.iter().enumerate() {
                    s.check(&format!("params.spectra[{i}]"), &mut d);
                }
            }
        }
        d
    }
}
