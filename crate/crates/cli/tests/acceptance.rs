//! One test per acceptance criterion. Each prints a single PASS/FAIL line;
//! run with `--nocapture` to see them.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use ndarray::{s, Array1};
use qcompress::autoencoder::{ae_train, AeConfig, AeModel};
use qcompress::dynamics::{evolve_constant, evolve_unitary};
use qcompress::hamiltonians::{
    build_random_hermitian, build_synthetic_spectrum, build_tfi, build_xxz, random_state, subspace_confined_state,
    HamiltonianModel,
};
use qcompress::linalg::{haar_unitary, matmul, matmul_adj_lhs, vector_norm};
use qcompress::nldi::{nldi_empirical, nldi_predict, DEFAULT_GRID, DEFAULT_THRESHOLDS};
use qcompress::pod::{
    covariance_from_snapshot, error_histogram, level_for_threshold, singular_value_error_curve,
    snapshot_singular_values, state_error_rms, CovarianceMatrix, PodDecomposition,
};
use qcompress::rng::{derive_seed, stream};
use qcompress::spectral::{
    analytic_covariance, compression_onset, hermitian_singular_values, ideal_linear_pair, linear_sweep_sinc,
    numerical_rank, spectral_pair, spectral_pair_with_sinc, sinc_matrix, singular_value_bounds_check,
    stretch_dimension, symmetric_singular_values, time_bandwidth,
};
use qcompress::unitary::{unitary_error_bound_curve, unitary_pod};
use qcompress_cli::experiments::plateau_and_knee;
use rand::Rng;

fn tfi10() -> &'static HamiltonianModel {
    static H: OnceLock<HamiltonianModel> = OnceLock::new();
    H.get_or_init(|| build_tfi(10, 2.0).unwrap())
}

fn tfi12() -> &'static HamiltonianModel {
    static H: OnceLock<HamiltonianModel> = OnceLock::new();
    H.get_or_init(|| build_tfi(12, 2.0).unwrap())
}

fn report(n: u32, name: &str, ok: bool, detail: String) {
    println!("{} criterion {n:>2} ({name}): {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {n} ({name}) failed: {detail}");
}

#[test]
fn criterion_01_time_bandwidth() {
    let start = Instant::now();
    let m10 = time_bandwidth(tfi10(), 2.0).m_tbw;
    let m12 = time_bandwidth(tfi12(), 2.0).m_tbw;
    let elapsed = start.elapsed();
    let ok = m10 == 14 && m12 == 17 && elapsed <= Duration::from_secs(120);
    report(1, "time-bandwidth", ok, format!("m_tbw = {m10} (n=1024), {m12} (n=4096) in {elapsed:.1?}"));
}

#[test]
fn criterion_02_knee_location() {
    let h = tfi10();
    let psi = random_state(h.dim(), 1).unwrap();
    let tb = time_bandwidth(h, 2.0);
    let pair = spectral_pair(h, &psi, 2.0).unwrap();
    let eps = singular_value_error_curve(pair.sigma_r().unwrap().view()).unwrap();
    let knee = level_for_threshold(eps.view(), 1e-3).unwrap_or(usize::MAX);
    let in_window = knee + 2 >= tb.m_tbw && knee <= tb.m_tbw + 6;

    let c = analytic_covariance(h, &psi, 2.0).unwrap();
    let pod = PodDecomposition::new(&c).unwrap();
    let med10 = error_histogram(&pod.truncate(10).unwrap(), &c, 60).unwrap().log10_median;
    let med20 = error_histogram(&pod.truncate(20).unwrap(), &c, 60).unwrap().log10_median;
    let drop = med10 - med20;
    report(
        2,
        "knee location",
        in_window && drop >= 3.0,
        format!("eps_R < 1e-3 at m = {knee} (m_tbw = {}), histogram median drop m=10 to m=20: {drop:.2} decades", tb.m_tbw),
    );
}

#[test]
fn criterion_03_snapshot_equivalence() {
    let mut rng = stream(3, "acceptance-draws");
    let (mut worst_exact, mut worst_snap) = (0.0f64, 0.0f64);
    for draw in 0..10u64 {
        let t = rng.random_range(0.5..5.0);
        let h = build_random_hermitian(64, derive_seed(draw, "h"), Some(10.0)).unwrap();
        let psi = random_state(64, derive_seed(draw, "psi")).unwrap();
        let pair = spectral_pair(&h, &psi, t).unwrap();
        let sigma_r = pair.sigma_r().unwrap();
        let c = analytic_covariance(&h, &psi, t).unwrap();
        let sigma_c = hermitian_singular_values(c.matrix.view()).unwrap();
        let exact = sigma_c.iter().zip(sigma_r.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst_exact = worst_exact.max(exact);

        let traj = evolve_constant(&h, &psi, t, 2000).unwrap();
        let sigma_snap = snapshot_singular_values(traj.states.view()).unwrap();
        let snap = (0..30).map(|i| (sigma_snap[i] - sigma_c[i]).abs()).fold(0.0, f64::max) / sigma_c[0];
        worst_snap = worst_snap.max(snap);
    }
    report(
        3,
        "analytic/snapshot equivalence",
        worst_exact <= 1e-10 && worst_snap <= 1e-3,
        format!("max |σ(C) − σ(R)| = {worst_exact:.2e}, max leading-30 snapshot gap / σ₁ = {worst_snap:.2e}"),
    );
}

#[test]
fn criterion_04_sweep_asymptotics() {
    let start = Instant::now();
    let mut ok = true;
    let mut details = Vec::new();
    for (n, delta) in [(500usize, 100.0 / PI), (3000, 300.0 / PI)] {
        let sv = symmetric_singular_values(linear_sweep_sinc(n, delta).unwrap().view()).unwrap();
        let m_tbw = compression_onset(delta, n);
        let (plateau, knee) = plateau_and_knee(sv.as_slice().unwrap(), m_tbw);
        let expected = (n - 1) as f64 / delta;
        let dev = (plateau - expected).abs() / expected;
        ok &= dev <= 0.05 && knee.abs_diff(m_tbw) <= 2;
        details.push(format!("n={n}: plateau dev {:.2}%, knee {knee} vs m_tbw {m_tbw}", 100.0 * dev));
    }
    let elapsed = start.elapsed();
    ok &= elapsed <= Duration::from_secs(60);
    report(4, "sweep asymptotics", ok, format!("{} in {elapsed:.1?}", details.join("; ")));
}

#[test]
fn criterion_05_pod_optimality() {
    let mut rng = stream(5, "acceptance-covariances");
    let mut worst = f64::NEG_INFINITY;
    for draw in 0..20u64 {
        let n = rng.random_range(4..=64usize);
        let m = rng.random_range(1..n);
        let h = build_random_hermitian(n, derive_seed(draw, "h"), Some(10.0)).unwrap();
        let psi = random_state(n, derive_seed(draw, "psi")).unwrap();
        let traj = evolve_constant(&h, &psi, rng.random_range(0.5..5.0), 3 * n).unwrap();
        let c: CovarianceMatrix = covariance_from_snapshot(&traj).unwrap();
        let pod_err = PodDecomposition::new(&c).unwrap().truncate(m).unwrap().tail_error();
        let total: f64 = c.matrix.diag().iter().map(|z| z.re).sum();
        for _ in 0..50 {
            let q = haar_unitary(n, &mut rng);
            let basis = q.slice(s![.., ..m]).to_owned();
            let cm = matmul(c.matrix.view(), basis.view());
            let captured: f64 = matmul_adj_lhs(basis.view(), cm.view()).diag().iter().map(|z| z.re).sum();
            worst = worst.max(pod_err - (total - captured));
        }
    }
    report(5, "POD optimality", worst <= 1e-10, format!("largest margin of a random basis over POD: {worst:.2e}"));
}

#[test]
fn criterion_06_time_limits() {
    let h = build_random_hermitian(32, 6, Some(10.0)).unwrap();
    let psi = random_state(32, 7).unwrap();
    let short = spectral_pair(&h, &psi, 1e-8).unwrap().sigma_r().unwrap();
    let short_ok = short[0] >= 1.0 - 1e-6 && short[1] <= 1e-6;

    let omega: Vec<f64> = (0..32).map(|k| k as f64 + 0.05 * (k * k) as f64).collect();
    let spread = build_synthetic_spectrum(&omega, 8).unwrap();
    let pair = spectral_pair(&spread, &psi, 1e6).unwrap();
    let long = pair.sigma_r().unwrap();
    let mut alpha2: Vec<f64> = pair.alpha.iter().map(|a| a.norm_sqr()).collect();
    alpha2.sort_by(|a, b| b.total_cmp(a));
    let gap = long.iter().zip(&alpha2).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    report(
        6,
        "time limits",
        short_ok && gap <= 1e-3,
        format!("T=1e-8: σ₁ = {:.9}, σ₂ = {:.1e}; T=1e6: ‖σ(R) − |α|²‖∞ = {gap:.1e}", short[0], short[1]),
    );
}

#[test]
fn criterion_07_bounds_and_rank() {
    let mut rng = stream(7, "acceptance-bounds");
    let (mut sv_slack, mut lin_slack) = (f64::INFINITY, f64::INFINITY);
    for draw in 0..100u64 {
        let n = rng.random_range(4..=48usize);
        let t = rng.random_range(0.1..10.0);
        let h = build_random_hermitian(n, derive_seed(draw, "h"), Some(10.0)).unwrap();
        let psi = random_state(n, derive_seed(draw, "psi")).unwrap();
        let pair = spectral_pair(&h, &psi, t).unwrap();
        sv_slack = sv_slack.min(singular_value_bounds_check(&pair).unwrap().sv_bound_min_slack);
        let delta = time_bandwidth(&h, t).delta;
        lin_slack = lin_slack.min(ideal_linear_pair(pair.alpha.view(), n, delta).unwrap().bound_min_slack);
    }

    let h = build_random_hermitian(2000, 70, Some(10.0)).unwrap();
    let s = std::sync::Arc::new(sinc_matrix(h.eigenvalues().view(), 10.0));
    let mut ranks = Vec::new();
    let mut rank_ok = true;
    for k in [15, 30, 60] {
        let psi = subspace_confined_state(&h, k, derive_seed(k as u64, "subspace")).unwrap();
        let pair = spectral_pair_with_sinc(&h, &psi, 10.0, std::sync::Arc::clone(&s)).unwrap();
        let rank_r = numerical_rank(pair.sigma_r().unwrap().view());
        let support = numerical_rank(pair.alpha.mapv(|a| a.norm()).view());
        rank_ok &= rank_r <= k && support == k;
        ranks.push(format!("k={k}: rank R {rank_r}, support {support}"));
    }
    report(
        7,
        "bounds and rank",
        sv_slack >= -1e-10 && lin_slack >= -1e-10 && rank_ok,
        format!("min slack {sv_slack:.2e} (σ bound), {lin_slack:.2e} (ideal linear); {}", ranks.join(", ")),
    );
}

#[test]
fn criterion_08_stretch() {
    let n1 = stretch_dimension(tfi10().eigenvalues().view()).unwrap().n_stretched;
    let n2 = stretch_dimension(tfi12().eigenvalues().view()).unwrap().n_stretched;
    let n3 = stretch_dimension(build_xxz(10, 1.5).unwrap().eigenvalues().view()).unwrap().n_stretched;
    report(
        8,
        "stretch",
        n1 == 1029 && n2 == 4101 && n3 == 1046,
        format!("TFI n'={n1} (want 1029), {n2} (want 4101); XXZ n'={n3} (want 1046)"),
    );
}

/// POD RMS at each level for the trajectory started from one seeded random state.
fn tfi_pod_rms(seed: u64, levels: &[usize]) -> Vec<f64> {
    let h = tfi10();
    let psi = random_state(h.dim(), derive_seed(seed, "initial-state")).unwrap();
    let traj = evolve_constant(h, &psi, 2.0, 200).unwrap();
    let pod = PodDecomposition::new(&covariance_from_snapshot(&traj).unwrap()).unwrap();
    levels.iter().map(|&m| state_error_rms(&pod.truncate(m).unwrap(), &traj).unwrap()).collect()
}

#[test]
fn criterion_09_autoencoder() {
    let reference = [(5, 0.5452), (10, 0.1717), (15, 0.0121)];
    let levels: Vec<usize> = reference.iter().map(|r| r.0).collect();
    let draws: Vec<Vec<f64>> = (1..=10).map(|seed| tfi_pod_rms(seed, &levels)).collect();
    let mut pod_ok = true;
    let mut pod_rms = Vec::new();
    for (i, (m, want)) in reference.into_iter().enumerate() {
        let mut values: Vec<f64> = draws.iter().map(|d| d[i]).collect();
        values.sort_by(f64::total_cmp);
        let median = 0.5 * (values[4] + values[5]);
        pod_ok &= (median - want).abs() <= 0.2 * want;
        pod_rms.push(format!("m={m}: median {median:.4} [{:.4}, {:.4}] (ref {want})", values[0], values[9]));
    }

    let h = tfi10();
    let psi = random_state(h.dim(), derive_seed(1, "initial-state")).unwrap();
    let traj = evolve_constant(h, &psi, 2.0, 200).unwrap();
    let pod5 = PodDecomposition::new(&covariance_from_snapshot(&traj).unwrap()).unwrap().truncate(5).unwrap();
    let pod5_rms = state_error_rms(&pod5, &traj).unwrap();
    let mut config = AeConfig::new(5);
    config.seed = derive_seed(1, "autoencoder");
    let zero = AeModel::init(&pod5, &config).unwrap();
    let bitwise = zero.reconstruct(traj.states.view()).unwrap() == pod5.reconstruct(traj.states.view());

    let start = Instant::now();
    let (model, _) = ae_train(traj.states.view(), &pod5, &config).unwrap();
    let elapsed = start.elapsed();
    let ae_rms = model.rms_error(traj.states.view()).unwrap();
    let ae_ok = ae_rms <= 0.1 * pod5_rms && elapsed <= Duration::from_secs(600);
    report(
        9,
        "autoencoder",
        pod_ok && ae_ok && bitwise,
        format!(
            "POD over seeds 1-10: {}; AE m=5: {ae_rms:.4} vs POD {pod5_rms:.4} in {elapsed:.1?}; zero-weight bitwise: {bitwise}",
            pod_rms.join(", ")
        ),
    );
}

#[test]
fn criterion_10_time_varying() {
    let h0 = build_random_hermitian(128, derive_seed(10, "hamiltonian-h0"), Some(10.0)).unwrap();
    let h1 = build_random_hermitian(128, derive_seed(10, "hamiltonian-h1"), Some(10.0)).unwrap();
    // (c_mag, m_pred, 1e-4 range, 1e-5 range) reference values.
    let table = [(0.1, 7, (10, 10), (13, 15)), (1.0, 10, (17, 19), (22, 26)), (10.0, 65, (44, 52), (58, 67))];
    let base = derive_seed(10, "trials");
    let mut ok = true;
    let mut details = Vec::new();
    let mut medians: Vec<Vec<f64>> = Vec::new();
    for (c, want_pred, r4, r5) in table {
        let pred = nldi_predict(&h0, &h1, c, 2.0, DEFAULT_GRID).unwrap();
        let emp = nldi_empirical(&h0, &h1, c, 2.0, 200, 20, &DEFAULT_THRESHOLDS, base).unwrap();
        let pred_ok = (pred.m_pred as f64 - want_pred as f64).abs() <= 0.2 * want_pred as f64;
        let mut range_ok = true;
        for (levels, (lo, hi)) in emp.levels.iter().zip([r4, r5]) {
            let inside = |m: Option<usize>| m.is_some_and(|m| m as f64 >= 0.7 * lo as f64 && m as f64 <= 1.3 * hi as f64);
            range_ok &= levels.unreachable == 0 && inside(levels.min) && inside(levels.max);
        }
        ok &= pred_ok && range_ok;
        details.push(format!(
            "c={c}: m_pred {} (ref {want_pred}), 1e-4 {:?}-{:?}, 1e-5 {:?}-{:?}",
            pred.m_pred, emp.levels[0].min, emp.levels[0].max, emp.levels[1].min, emp.levels[1].max
        ));
        medians.push(emp.median_curve());
    }
    let mut disordered = 0;
    for pair in medians.windows(2) {
        disordered += (0..pair[0].len()).filter(|&m| pair[0][m].max(pair[1][m]) > 1e-12 && pair[1][m] < pair[0][m]).count();
    }
    ok &= disordered == 0;
    report(10, "time-varying", ok, format!("{}; out-of-order median levels: {disordered}", details.join("; ")));
}

/// `Σ_ν (1/T)∫‖(I − Γ_ν)U_t ε_ν‖² dt` by the trapezoid rule on `k` samples.
fn unitary_error_by_quadrature(h: &HamiltonianModel, t: f64, m: usize, k: usize) -> f64 {
    let model = unitary_pod(h, t, m).unwrap();
    let traj = evolve_unitary(h, t, k).unwrap();
    let dt = t / (k - 1) as f64;
    let mut total = 0.0;
    for nu in 0..h.dim() {
        let col = traj.column(nu);
        let resid = &col.states - &matmul(model.projector(nu).view(), col.states.view());
        for j in 0..k {
            let w = if j == 0 || j == k - 1 { 0.5 * dt } else { dt };
            total += w * vector_norm(resid.column(j)).powi(2);
        }
    }
    total / t
}

#[test]
fn criterion_11_unitary() {
    let h = build_random_hermitian(64, 11, Some(10.0)).unwrap();
    let mut worst = 0.0f64;
    for m in [2, 4, 8] {
        let analytic = unitary_pod(&h, 2.0, m).unwrap().error;
        let quad = unitary_error_by_quadrature(&h, 2.0, m, 2000);
        worst = worst.max((analytic - quad).abs() / quad);
    }
    let omega = Array1::linspace(-10.0, 10.0, 64);
    let lin = build_synthetic_spectrum(omega.as_slice().unwrap(), 12).unwrap();
    let actual = unitary_pod(&lin, 2.0, 1).unwrap().error_curve();
    let bound = unitary_error_bound_curve(&lin, 2.0).unwrap();
    let min_slack = actual.iter().zip(&bound).map(|(a, b)| b - a).fold(f64::INFINITY, f64::min);
    report(
        11,
        "unitary",
        worst <= 1e-3 && min_slack >= -1e-6,
        format!("analytic vs quadrature rel. gap {worst:.2e}; linear-spectrum bound min slack {min_slack:.2e}"),
    );
}

fn run_cli(config: &Path, out: &Path) -> (String, Vec<(String, Vec<u8>)>) {
    let output = Command::new(env!("CARGO_BIN_EXE_qcompress"))
        .args(["run", "--threads", "1", "--config"])
        .arg(config)
        .arg("--output")
        .arg(out)
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let stdout = String::from_utf8(output.stdout).unwrap();
    let mut csv: Vec<(String, Vec<u8>)> = std::fs::read_dir(out)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    csv.sort();
    (stdout, csv)
}

#[test]
fn criterion_12_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let configs = [
        ("tfi", "experiment = \"tfi_errors\"\nseed = 5\n[params]\nn_spin = 6\nh = 2.0\nt = 2.0\nk = 50\n"),
        ("ltv", "experiment = \"ltv\"\nseed = 5\n[params]\nn = 24\nk = 40\ntrials = 4\n"),
        ("ae", "experiment = \"ae_table\"\nseed = 5\n[params]\nn_spin = 5\nk = 40\nm_values = [3]\ntrain_m = [3]\nhidden_widths = [8]\nepochs = 60\n"),
    ];
    let mut ok = true;
    let mut files = 0;
    for (name, text) in configs {
        let path = dir.path().join(format!("{name}.toml"));
        std::fs::write(&path, text).unwrap();
        let (stdout_a, a) = run_cli(&path, &dir.path().join(format!("{name}_a")));
        let (_, b) = run_cli(&path, &dir.path().join(format!("{name}_b")));
        ok &= !a.is_empty() && a == b;
        ok &= stdout_a.trim_end() == dir.path().join(format!("{name}_a")).join("manifest.json").to_string_lossy();
        files += a.len();
    }
    report(12, "determinism", ok, format!("{files} CSV files byte-identical across two runs"));
}
