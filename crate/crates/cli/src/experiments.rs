//! Experiment runners. Each fills a [`RunOutput`] with named files and
//! summary statistics; nothing here touches the filesystem.

use std::collections::BTreeSet;
use std::sync::Arc;

use qcompress::autoencoder::{ae_error_histogram, ae_train, Activation, AeConfig, ResidualSign};
use qcompress::dynamics::{evolve_constant, perturb_initial_state, Trajectory};
use qcompress::hamiltonians::{
    build_random_hermitian, build_synthetic_spectrum, build_tfi, build_xxz, ground_state, random_state,
    subspace_confined_state, HamiltonianModel, InitialState,
};
use qcompress::nldi::{self, nldi_empirical, nldi_predict};
use qcompress::pod::{
    covariance_from_snapshot, equation_error_rms, error_histogram, level_for_threshold, singular_value_error_curve,
    snapshot_singular_values, state_error_histogram, state_error_rms, PodDecomposition,
};
use qcompress::rng::derive_seed;
use qcompress::spectral::{
    analytic_covariance, bounds_from_spectra, fourier_asymptotic_spectrum, ideal_sinc_spectrum, linear_sweep_sinc,
    sinc_matrix, spectral_pair_with_sinc, spectral_report, stretch_dimension, symmetric_singular_values,
    time_bandwidth, FourierMode, TimeBandwidth,
};
use qcompress::table::{fmt_num, Table};
use qcompress::unitary::{error_table, unitary_error_bound_curve, unitary_pod_capped};
use ndarray::{Array1, ArrayView1};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::{
    ActivationName, AeTableParams, ExperimentConfig, InitKind, LtvParams, NldiTableParams, Params, RandomHParams,
    SignName, SnapshotSvParams, SpectraParams, SpectrumSpec, SweepSpectraParams, TfiErrorsParams, UnitaryHamiltonian,
    UnitaryParams,
};

type Result<T> = qcompress::Result<T>;

/// Slack allowed when comparing error curves that should be ordered.
const ORDER_SLACK: f64 = 1e-12;

#[derive(Debug, Default)]
pub struct RunOutput {
    pub files: Vec<(String, Vec<u8>)>,
    pub summary: Map<String, Value>,
}

impl RunOutput {
    fn csv(&mut self, name: impl Into<String>, table: &Table) {
        self.files.push((name.into(), table.to_csv().into_bytes()));
    }

    fn json<T: Serialize>(&mut self, name: impl Into<String>, value: &T) {
        let mut text = serde_json::to_string_pretty(value).expect("serializable output");
        text.push('\n');
        self.files.push((name.into(), text.into_bytes()));
    }

    fn set(&mut self, key: &str, value: Value) {
        self.summary.insert(key.to_string(), value);
    }

    pub fn file(&self, name: &str) -> Option<&[u8]> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, b)| b.as_slice())
    }
}

pub fn execute(config: &ExperimentConfig) -> Result<RunOutput> {
    let mut out = RunOutput::default();
    let seed = config.seed;
    match &config.params {
        Params::TfiErrors(p) => tfi_errors(p, seed, &mut out)?,
        Params::SnapshotSv(p) => snapshot_sv(p, seed, &mut out)?,
        Params::SweepSpectra(p) => sweep_spectra(p, &mut out)?,
        Params::RandomH(p) => random_h(p, seed, &mut out)?,
        Params::AeTable(p) => ae_table(p, seed, &mut out)?,
        Params::Ltv(p) => ltv(p, seed, &mut out)?,
        Params::NldiTable(p) => nldi_table(p, seed, &mut out)?,
        Params::Unitary(p) => unitary(p, seed, &mut out)?,
        Params::Stretch(p) => stretch(p, seed, &mut out)?,
        Params::Eigs(p) => eigs(p, seed, &mut out)?,
    }
    Ok(out)
}

fn spectrum_table(omega: ArrayView1<f64>) -> Table {
    let mut t = Table::new(["k", "omega"]);
    for (i, w) in omega.iter().enumerate() {
        t.push(vec![(i + 1) as f64, *w]);
    }
    t
}

fn tb_json(tb: &TimeBandwidth) -> Value {
    json!({ "n": tb.n, "delta": tb.delta, "m_tbw": tb.m_tbw })
}

/// Mean of the first `m_tbw − 1` values and the first 1-based index where
/// the spectrum falls below half of it.
pub fn plateau_and_knee(sigma: &[f64], m_tbw: usize) -> (f64, usize) {
    let len = m_tbw.saturating_sub(1).clamp(1, sigma.len());
    let plateau = sigma[..len].iter().sum::<f64>() / len as f64;
    let knee = sigma.iter().position(|&s| s < 0.5 * plateau).map_or(sigma.len(), |i| i + 1);
    (plateau, knee)
}

fn tfi_state(kind: InitKind, n: usize, ground: Option<&HamiltonianModel>, seed: u64) -> Result<InitialState> {
    match kind {
        InitKind::Ground => Ok(ground_state(ground.expect("ground Hamiltonian built when requested"))),
        InitKind::Random => random_state(n, derive_seed(seed, "initial-state")),
    }
}

fn tfi_errors(p: &TfiErrorsParams, seed: u64, out: &mut RunOutput) -> Result<()> {
    let h = build_tfi(p.n_spin, p.h)?;
    let n = h.dim();
    out.csv("spectrum.csv", &spectrum_table(h.eigenvalues().view()));
    let ground_h = if p.inits.contains(&InitKind::Ground) { Some(build_tfi(p.n_spin, p.ground_h)?) } else { None };
    let m_max = p.m_max.min(n);
    let mut per_init = Map::new();
    let mut perturb_base = None;

    for &init in &p.inits {
        let psi = tfi_state(init, n, ground_h.as_ref(), seed)?;
        let report = spectral_report(&h, &psi, p.t)?;
        out.json(format!("spectral_{}.json", init.name()), &report);
        let c = analytic_covariance(&h, &psi, p.t)?;
        let pod = PodDecomposition::new(&c)?;
        let traj = evolve_constant(&h, &psi, p.t, p.k)?;

        let mut table =
            Table::new(["m", "eps_R", "eps_S", "eps_Slin", "rms_state", "rms_state_snapshot", "rms_equation"]);
        for m in 1..=m_max {
            let model = pod.truncate(m)?;
            table.push(vec![
                m as f64,
                report.eps_r[m - 1],
                report.eps_s[m - 1],
                report.eps_slin[m - 1],
                model.tail_error().max(0.0).sqrt(),
                state_error_rms(&model, &traj)?,
                equation_error_rms(&model, &h, &traj)?,
            ]);
        }
        out.csv(format!("errors_{}.csv", init.name()), &table);

        let mut medians = Map::new();
        for &m in p.histogram_m.iter().filter(|&&m| m <= n) {
            let hist = error_histogram(&pod.truncate(m)?, &c, p.bins)?;
            out.csv(format!("histogram_{}_m{m}.csv", init.name()), &hist.to_table());
            medians.insert(m.to_string(), json!(hist.log10_median));
        }

        let eps_r = Array1::from(report.eps_r.clone());
        per_init.insert(
            init.name().to_string(),
            json!({
                "eps_R_le_eps_S": report.eps_r.iter().zip(&report.eps_s).all(|(r, s)| *r <= s + ORDER_SLACK),
                "m_at_eps_R_1e-3": level_for_threshold(eps_r.view(), 1e-3),
                "bounds": report.bounds,
                "histogram_log10_median": medians,
            }),
        );
        if init == p.perturb_init {
            perturb_base = Some((psi, pod, traj));
        }
    }
    out.set("time_bandwidth", tb_json(&time_bandwidth(&h, p.t)));
    out.set("inits", Value::Object(per_init));

    if let (Some((psi, pod, traj)), false) = (perturb_base, p.perturbations.is_empty()) {
        let mut header = vec!["m".to_string(), "rms_unperturbed".to_string()];
        let mut trajs: Vec<Trajectory> = Vec::new();
        for &mag in &p.perturbations {
            header.push(format!("rms_dpsi_{mag}"));
            let moved = perturb_initial_state(&psi, mag, derive_seed(seed, "perturbation"))?;
            trajs.push(evolve_constant(&h, &moved, p.t, p.k)?);
        }
        let mut table = Table { header, rows: Vec::new() };
        for m in 1..=m_max {
            let model = pod.truncate(m)?;
            let mut row = vec![m as f64, state_error_rms(&model, &traj)?];
            for tr in &trajs {
                row.push(state_error_rms(&model, tr)?);
            }
            table.push(row);
        }
        out.csv(format!("perturbation_{}.csv", p.perturb_init.name()), &table);
    }
    Ok(())
}

fn snapshot_sv(p: &SnapshotSvParams, seed: u64, out: &mut RunOutput) -> Result<()> {
    let mut cases = Vec::new();
    for &s in &p.n_spins {
        let h = build_tfi(s, p.h)?;
        let n = h.dim();
        let ground = if p.init == InitKind::Ground { Some(build_tfi(s, p.ground_h)?) } else { None };
        let psi = tfi_state(p.init, n, ground.as_ref(), seed)?;
        let traj = evolve_constant(&h, &psi, p.t, p.k)?;
        let sv = snapshot_singular_values(traj.states.view())?;
        let eps = singular_value_error_curve(sv.view())?;
        let mut table = Table::new(["i", "sigma", "eps"]);
        for i in 0..n.min(p.k) {
            table.push(vec![(i + 1) as f64, sv[i], eps[i]]);
        }
        out.csv(format!("snapshot_sv_nspin{s}.csv"), &table);
        let tb = time_bandwidth(&h, p.t);
        cases.push(json!({
            "n_spin": s,
            "time_bandwidth": tb_json(&tb),
            "sigma_ratio_at_m_tbw": sv[tb.m_tbw.min(n) - 1] / sv[0],
            "m_at_eps_1e-3": level_for_threshold(eps.view(), 1e-3),
            "m_at_eps_1e-6": level_for_threshold(eps.view(), 1e-6),
        }));
    }
    out.set("cases", Value::Array(cases));
    Ok(())
}

fn sweep_spectra(p: &SweepSpectraParams, out: &mut RunOutput) -> Result<()> {
    let mut cases: Vec<(String, usize, f64)> =
        p.cases.iter().enumerate().map(|(i, c)| (format!("sweep_{i}_n{}", c.n), c.n, c.delta())).collect();
    for &s in &p.tfi_n_spins {
        let h = build_tfi(s, p.h)?;
        let tb = time_bandwidth(&h, p.t);
        cases.push((format!("sweep_tfi_nspin{s}"), tb.n, tb.delta));
    }
    let mode = p.fourier_terms.map_or(FourierMode::ClosedForm, |terms| FourierMode::PartialSum { terms });
    let mut summary = Vec::new();
    for (name, n, delta) in cases {
        let s_lin = linear_sweep_sinc(n, delta)?;
        let sv = symmetric_singular_values(s_lin.view())?;
        drop(s_lin);
        let ideal = ideal_sinc_spectrum(n, delta)?;
        let fourier = fourier_asymptotic_spectrum(n, delta, mode)?;
        let eps = singular_value_error_curve(sv.view())?;
        let mut table = Table::new(["k", "sigma_Slin", "sigma_ideal", "sigma_fourier", "eps_Slin"]);
        for k in 0..n {
            table.push(vec![(k + 1) as f64, sv[k], ideal[k], fourier[k], eps[k]]);
        }
        out.csv(format!("{name}.csv"), &table);
        let tb = TimeBandwidth::from_range(delta * 2.0 * std::f64::consts::PI, 1.0, n);
        let (plateau, knee) = plateau_and_knee(sv.as_slice().expect("contiguous"), tb.m_tbw);
        let expected = (n - 1) as f64 / delta;
        summary.push(json!({
            "file": format!("{name}.csv"),
            "n": n,
            "delta": delta,
            "m_tbw": tb.m_tbw,
            "plateau_mean": plateau,
            "plateau_expected": expected,
            "plateau_rel_dev": (plateau - expected).abs() / expected,
            "knee": knee,
        }));
    }
    out.set("cases", Value::Array(summary));
    Ok(())
}

fn random_h(p: &RandomHParams, seed: u64, out: &mut RunOutput) -> Result<()> {
    let h = build_random_hermitian(p.n, derive_seed(seed, "hamiltonian"), Some(p.norm))?;
    let tb = time_bandwidth(&h, p.t);
    let s = Arc::new(sinc_matrix(h.eigenvalues().view(), p.t));
    let sigma_s = symmetric_singular_values(s.view())?;

    let mut states = vec![("random".to_string(), random_state(p.n, derive_seed(seed, "initial-state"))?)];
    for &k in &p.subspace_k {
        states.push((format!("subspace{k}"), subspace_confined_state(&h, k, derive_seed(seed, "subspace-state"))?));
    }
    let mut header = vec!["i".to_string(), "sigma_S".to_string()];
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut per_state = Map::new();
    for (label, psi) in &states {
        let pair = spectral_pair_with_sinc(&h, psi, p.t, Arc::clone(&s))?;
        let sigma_r = pair.sigma_r()?;
        let report = bounds_from_spectra(pair.alpha.view(), sigma_r.view(), sigma_s.view());
        let mut alpha2: Vec<f64> = pair.alpha.iter().map(|a| a.norm_sqr()).collect();
        alpha2.sort_by(|a, b| b.total_cmp(a));
        let support = report.rank_alpha;
        header.push(format!("sigma_R_{label}"));
        header.push(format!("alpha2_{label}"));
        per_state.insert(
            label.clone(),
            json!({
                "rank_R": report.rank_r,
                "alpha_support": support,
                "sv_bound_ok": report.sv_bound_ok,
                "sv_bound_min_slack": report.sv_bound_min_slack,
                "rank_ok": report.rank_ok,
                "kyfan_ok": report.kyfan_ok,
            }),
        );
        columns.push(sigma_r.to_vec());
        columns.push(alpha2);
    }
    let mut table = Table { header, rows: Vec::new() };
    for i in 0..p.n {
        let mut row = vec![(i + 1) as f64, sigma_s[i]];
        row.extend(columns.iter().map(|c| c[i]));
        table.push(row);
    }
    out.csv("random_h.csv", &table);
    out.set("time_bandwidth", tb_json(&tb));
    out.set("states", Value::Object(per_state));
    Ok(())
}

pub fn ae_config(p: &AeTableParams, m: usize, seed: u64) -> AeConfig {
    AeConfig {
        m,
        hidden_widths: p.hidden_widths.clone(),
        activation: match p.activation {
            ActivationName::Tanh => Activation::Tanh,
            ActivationName::Relu => Activation::Relu,
        },
        epochs: p.epochs,
        learning_rate: p.learning_rate,
        momentum: p.momentum,
        batch_size: p.batch_size.unwrap_or(usize::MAX),
        seed: derive_seed(seed, "autoencoder"),
        residual_sign: match p.residual_sign {
            SignName::Plus => ResidualSign::Plus,
            SignName::Minus => ResidualSign::Minus,
        },
    }
}

fn ae_table(p: &AeTableParams, seed: u64, out: &mut RunOutput) -> Result<()> {
    let h = build_tfi(p.n_spin, p.h)?;
    let psi = random_state(h.dim(), derive_seed(seed, "initial-state"))?;
    let traj = evolve_constant(&h, &psi, p.t, p.k)?;
    let pod = PodDecomposition::new(&covariance_from_snapshot(&traj)?)?;
    let states = traj.states.view();

    let levels: BTreeSet<usize> = p.m_values.iter().chain(&p.train_m).copied().collect();
    let mut table = Table::new(["m", "rms_pod", "rms_ae"]);
    let mut rows = Vec::new();
    for &m in &levels {
        let model = pod.truncate(m)?;
        let rms_pod = state_error_rms(&model, &traj)?;
        let mut rms_ae = f64::NAN;
        if p.train_m.contains(&m) {
            let (ae, curve) = ae_train(states, &model, &ae_config(p, m, seed))?;
            rms_ae = ae.rms_error(states)?;
            out.csv(format!("training_m{m}.csv"), &curve.to_table());
            out.csv(format!("histogram_pod_m{m}.csv"), &state_error_histogram(&model, states, p.bins)?.to_table());
            out.csv(format!("histogram_ae_m{m}.csv"), &ae_error_histogram(&ae, states, p.bins)?.to_table());
            let mut blob = Vec::new();
            ae.save(&mut blob)?;
            out.files.push((format!("ae_m{m}.bin"), blob));
            rows.push(json!({ "m": m, "rms_pod": rms_pod, "rms_ae": rms_ae, "best_epoch": curve.best_epoch,
                              "ratio": rms_ae / rms_pod }));
        } else {
            rows.push(json!({ "m": m, "rms_pod": rms_pod }));
        }
        table.push(vec![m as f64, rms_pod, rms_ae]);
    }
    out.csv("ae_table.csv", &table);
    out.set("rows", Value::Array(rows));
    Ok(())
}

fn random_pair(n: usize, norm: f64, seed: u64) -> Result<(HamiltonianModel, HamiltonianModel)> {
    Ok((
        build_random_hermitian(n, derive_seed(seed, "hamiltonian-h0"), Some(norm))?,
        build_random_hermitian(n, derive_seed(seed, "hamiltonian-h1"), Some(norm))?,
    ))
}

fn ltv(p: &LtvParams, seed: u64, out: &mut RunOutput) -> Result<()> {
    let (h0, h1) = random_pair(p.n, p.norm, seed)?;
    let base = derive_seed(seed, "trials");
    let mut medians = Vec::new();
    for &c in &p.c_mags {
        let emp = nldi_empirical(&h0, &h1, c, p.t, p.k, p.trials, &[], base)?;
        let median = emp.median_curve();
        let mut table = Table::new(["m", "eps_median", "eps_min", "eps_max"]);
        for (m, med) in median.iter().enumerate() {
            let col = emp.curves.iter().map(|cv| cv[m]);
            let lo = col.clone().fold(f64::INFINITY, f64::min);
            let hi = col.fold(f64::NEG_INFINITY, f64::max);
            table.push(vec![(m + 1) as f64, *med, lo, hi]);
        }
        out.csv(format!("ltv_c{c}.csv"), &table);
        medians.push(median);
    }
    // Fraction of levels (where any median is non-negligible) at which the
    // medians increase with the field magnitude.
    let mut order = Vec::new();
    for (i, w) in p.c_mags.windows(2).enumerate() {
        let (a, b) = (&medians[i], &medians[i + 1]);
        let active: Vec<usize> = (0..a.len()).filter(|&m| a[m].max(b[m]) > 1e-12).collect();
        let ordered = active.iter().filter(|&&m| b[m] >= a[m]).count();
        order.push(json!({
            "c_lo": w[0],
            "c_hi": w[1],
            "ordered_fraction": if active.is_empty() { 1.0 } else { ordered as f64 / active.len() as f64 },
        }));
    }
    out.set("median_ordering", Value::Array(order));
    out.set("m_tbw_h0", json!(time_bandwidth(&h0, p.t).m_tbw));
    Ok(())
}

fn nldi_table(p: &NldiTableParams, seed: u64, out: &mut RunOutput) -> Result<()> {
    let (h0, h1) = random_pair(p.n, p.norm, seed)?;
    let base = derive_seed(seed, "trials");
    let mut rows = Vec::new();
    for &c in &p.c_mags {
        let pred = nldi_predict(&h0, &h1, c, p.t, p.grid)?;
        let emp = nldi_empirical(&h0, &h1, c, p.t, p.k, p.trials, &p.thresholds, base)?;
        rows.push((pred, emp));
    }
    out.csv("nldi_table.csv", &nldi::table(&rows));
    let preds: Vec<_> = rows.iter().map(|(pred, _)| pred.clone()).collect();
    out.json("predictions.json", &preds);
    let summary: Vec<Value> = rows
        .iter()
        .map(|(pred, emp)| {
            json!({
                "c_mag": pred.c_mag,
                "m_pred": pred.m_pred,
                "delta_worst": pred.delta_worst,
                "endpoint_attained": pred.endpoint_attained,
                "levels": emp.levels.iter().map(|l| json!({
                    "threshold": l.threshold, "min": l.min, "max": l.max, "unreachable": l.unreachable,
                })).collect::<Vec<_>>(),
            })
        })
        .collect();
    out.set("rows", Value::Array(summary));
    Ok(())
}

fn unitary(p: &UnitaryParams, seed: u64, out: &mut RunOutput) -> Result<()> {
    let hseed = derive_seed(seed, "hamiltonian");
    let h = match p.hamiltonian {
        UnitaryHamiltonian::Random => build_random_hermitian(p.n, hseed, Some(p.norm))?,
        UnitaryHamiltonian::Linear => {
            let omega = Array1::linspace(-p.norm, p.norm, p.n);
            build_synthetic_spectrum(omega.as_slice().expect("contiguous"), hseed)?
        }
    };
    let model = unitary_pod_capped(&h, p.t, 1, p.max_dim)?;
    let actual = model.error_curve();
    let bound = unitary_error_bound_curve(&h, p.t)?;
    out.csv("unitary.csv", &error_table(&actual, &bound));
    let violations = actual.iter().zip(&bound).filter(|(a, b)| **a > **b + 1e-10).count();
    out.set("time_bandwidth", tb_json(&time_bandwidth(&h, p.t)));
    out.set("bound_violations", json!(violations));
    Ok(())
}

fn spectrum_of(spec: &SpectrumSpec, seed: u64) -> Result<Array1<f64>> {
    Ok(match spec {
        SpectrumSpec::Tfi { n_spin, h } => build_tfi(*n_spin, *h)?.eigenvalues().clone(),
        SpectrumSpec::Xxz { n_spin, delta } => build_xxz(*n_spin, *delta)?.eigenvalues().clone(),
        SpectrumSpec::Random { n, norm } => {
            build_random_hermitian(*n, derive_seed(seed, "spectrum"), Some(*norm))?.eigenvalues().clone()
        }
        SpectrumSpec::Poly { n, scale, power } => {
            Array1::linspace(-1.0, 1.0, *n).mapv(|x: f64| scale * x.powi(*power))
        }
        SpectrumSpec::Explicit { omega } => Array1::from(omega.clone()),
    })
}

/// File stems for each spectrum, suffixed by position when labels repeat.
fn unique_labels(specs: &[SpectrumSpec]) -> Vec<String> {
    let labels: Vec<String> = specs.iter().map(SpectrumSpec::label).collect();
    labels
        .iter()
        .enumerate()
        .map(|(i, l)| if labels.iter().filter(|x| *x == l).count() > 1 { format!("{l}_{i}") } else { l.clone() })
        .collect()
}

fn stretch(p: &SpectraParams, seed: u64, out: &mut RunOutput) -> Result<()> {
    let mut csv = String::from("label,n,range,path_length,n_stretched\n");
    let mut summary = Map::new();
    for (spec, label) in p.spectra.iter().zip(unique_labels(&p.spectra)) {
        let omega = spectrum_of(spec, seed)?;
        let st = stretch_dimension(omega.view())?;
        let n = omega.len();
        let range = omega[n - 1] - omega[0];
        csv.push_str(&format!("{label},{n},{},{},{}\n", fmt_num(range), fmt_num(st.path_length), st.n_stretched));
        summary.insert(label, json!({ "n": n, "path_length": st.path_length, "n_stretched": st.n_stretched }));
    }
    out.files.push(("stretch.csv".to_string(), csv.into_bytes()));
    out.set("spectra", Value::Object(summary));
    Ok(())
}

fn eigs(p: &SpectraParams, seed: u64, out: &mut RunOutput) -> Result<()> {
    let mut summary = Map::new();
    for (spec, label) in p.spectra.iter().zip(unique_labels(&p.spectra)) {
        let omega = spectrum_of(spec, seed)?;
        let n = omega.len();
        out.csv(format!("eigs_{label}.csv"), &spectrum_table(omega.view()));
        summary.insert(label, json!({ "n": n, "min": omega[0], "max": omega[n - 1], "sum": omega.sum() }));
    }
    out.set("spectra", Value::Object(summary));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn run(text: &str) -> RunOutput {
        execute(&parse_config(text).unwrap()).unwrap()
    }

    #[test]
    fn small_tfi_errors() {
        let out = run("experiment = \"tfi_errors\"\n[params]\nn_spin = 4\nh = 2.0\nt = 2.0\nk = 40\nhistogram_m = [2]\n");
        let names: Vec<&str> = out.files.iter().map(|(n, _)| n.as_str()).collect();
        assert!(names.contains(&"errors_ground.csv"));
        assert!(names.contains(&"histogram_random_m2.csv"));
        assert!(names.contains(&"perturbation_ground.csv"));
        assert_eq!(out.summary["inits"]["ground"]["eps_R_le_eps_S"], json!(true));
        let csv = String::from_utf8(out.file("errors_random.csv").unwrap().to_vec()).unwrap();
        assert_eq!(csv.lines().count(), 17);
    }

    #[test]
    fn stretch_and_eigs_agree_on_files() {
        let spectra = "[[params.spectra]]\nkind = \"tfi\"\nn_spin = 3\n[[params.spectra]]\nkind = \"tfi\"\nn_spin = 3\n";
        let out = run(&format!("experiment = \"eigs\"\n{spectra}"));
        assert!(out.file("eigs_tfi_nspin3_0.csv").is_some());
        let out = run(&format!("experiment = \"stretch\"\n{spectra}"));
        let csv = String::from_utf8(out.file("stretch.csv").unwrap().to_vec()).unwrap();
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn plateau_knee() {
        let (p, k) = plateau_and_knee(&[4.0, 4.0, 4.0, 1.0, 0.0], 4);
        assert_eq!((p, k), (4.0, 4));
    }
}
