use ndarray::{s, Array1, Array2};
use num_complex::Complex64;
use proptest::prelude::*;
use qcompress::dynamics::evolve_constant;
use qcompress::hamiltonians::{build_random_hermitian, random_state};
use qcompress::linalg::{
    frobenius_norm, haar_unitary, hermitian_defect, identity, matmul, matmul_adj_lhs, matmul_adj_rhs, max_abs,
};
use qcompress::pod::{covariance_from_snapshot, pod_fit, singular_value_error_curve, CovarianceMatrix, PodDecomposition};
use qcompress::rng::stream;
use qcompress::spectral::{
    ideal_sinc_spectrum, linear_sweep_sinc, log_scaled_compression, stretch_dimension, symmetric_singular_values,
    time_bandwidth,
};

fn random_covariance(n: usize, k: usize, seed: u64) -> CovarianceMatrix {
    let h = build_random_hermitian(n, seed, Some(10.0)).unwrap();
    let psi = random_state(n, seed ^ 0x55).unwrap();
    let traj = evolve_constant(&h, &psi, 1.0 + (seed % 5) as f64, k).unwrap();
    covariance_from_snapshot(&traj).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_hamiltonian_is_hermitian_and_diagonalized(n in 2usize..64, seed in any::<u64>()) {
        let h = build_random_hermitian(n, seed, Some(10.0)).unwrap();
        prop_assert!(hermitian_defect(h.matrix().view()) == 0.0);
        let w = h.eigenvalues();
        prop_assert!(w.windows(2).into_iter().all(|p| p[0] <= p[1]));
        prop_assert!((h.spectral_norm() - 10.0).abs() < 1e-9);
        let v = h.eigenvectors();
        let vw = v * &w.mapv(|x| Complex64::new(x, 0.0));
        let rebuilt = matmul_adj_rhs(vw.view(), v.view());
        prop_assert!(max_abs((&rebuilt - h.matrix()).view()) < 1e-10 * 10.0);
        let gram = matmul_adj_lhs(v.view(), v.view());
        prop_assert!(max_abs((&gram - &identity(n)).view()) < 1e-12 * n as f64);
    }

    #[test]
    fn projector_is_idempotent(n in 2usize..40, seed in any::<u64>(), frac in 0.0f64..1.0) {
        let c = random_covariance(n, 30, seed);
        let m = 1 + ((n - 1) as f64 * frac) as usize;
        let model = pod_fit(&c, m).unwrap();
        let p = model.projector();
        let p2 = matmul(p.view(), p.view());
        prop_assert!(max_abs((&p2 - &p).view()) < 1e-12);
        prop_assert!(hermitian_defect(p.view()) < 1e-14);
        let tr: f64 = p.diag().iter().map(|z| z.re).sum();
        prop_assert!((tr - m as f64).abs() < 1e-10);
    }

    #[test]
    fn error_curve_is_monotone(values in prop::collection::vec(0.0f64..1.0, 1..80)) {
        prop_assume!(values.iter().any(|&v| v > 0.0));
        let mut sorted = values.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let eps = singular_value_error_curve(Array1::from(sorted).view()).unwrap();
        prop_assert!(eps.windows(2).into_iter().all(|w| w[1] <= w[0]));
        prop_assert!(eps.iter().all(|&e| (0.0..=1.0).contains(&e)));
        prop_assert_eq!(eps[eps.len() - 1], 0.0);
    }

    #[test]
    fn time_bandwidth_is_scale_invariant(n in 2usize..48, seed in any::<u64>(), t in 0.1f64..5.0, a in 0.2f64..5.0) {
        let h = build_random_hermitian(n, seed, Some(10.0)).unwrap();
        let base = time_bandwidth(&h, t);
        let scaled = time_bandwidth(&h.scaled(a), t / a);
        prop_assert!((base.delta - scaled.delta).abs() <= 1e-12 * base.delta.max(1.0));
        prop_assert_eq!(base.m_tbw, scaled.m_tbw);
    }

    #[test]
    fn stretch_never_shrinks(values in prop::collection::vec(-50.0f64..50.0, 2..200)) {
        let mut omega = values.clone();
        omega.sort_by(f64::total_cmp);
        let st = stretch_dimension(Array1::from(omega.clone()).view()).unwrap();
        prop_assert!(st.n_stretched >= omega.len());
        let range = omega[omega.len() - 1] - omega[0];
        prop_assert!(st.path_length >= range.hypot((omega.len() - 1) as f64) - 1e-9);
    }

    #[test]
    fn log_scaling_grows_with_dimension(d0 in 0.5f64..30.0, e in 1u32..80) {
        let small = log_scaled_compression(2f64.powi(10), 2f64.powi(10), d0).unwrap();
        let big = log_scaled_compression(2f64.powi(10 + e as i32), 2f64.powi(10), d0).unwrap();
        prop_assert!(big >= small);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    /// No random rank-m basis beats POD on its own covariance.
    #[test]
    fn pod_basis_is_optimal(n in 2usize..=64, seed in any::<u64>(), frac in 0.0f64..1.0) {
        let c = random_covariance(n, 40, seed);
        let m = 1 + ((n - 1) as f64 * frac) as usize;
        let pod = PodDecomposition::new(&c).unwrap().truncate(m).unwrap();
        let best = pod.tail_error();
        let total: f64 = c.matrix.diag().iter().map(|z| z.re).sum();
        let mut rng = stream(seed, "random-bases");
        for _ in 0..50 {
            let q = haar_unitary(n, &mut rng);
            let basis = q.slice(s![.., ..m]).to_owned();
            let cm = matmul(c.matrix.view(), basis.view());
            let captured: f64 = matmul_adj_lhs(basis.view(), cm.view()).diag().iter().map(|z| z.re).sum();
            prop_assert!(best <= total - captured + 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    /// For long sweeps the exact sinc spectrum tracks the band-limited ideal.
    /// Below Δ ≈ 8 the fixed-width transition exceeds the 0.05 band.
    #[test]
    fn linear_sweep_tracks_ideal(n in 500usize..900, frac in 0.0f64..1.0) {
        let delta = 10.0 + frac * (n as f64 / 10.0 - 10.0);
        let sv = symmetric_singular_values(linear_sweep_sinc(n, delta).unwrap().view()).unwrap();
        let ideal = ideal_sinc_spectrum(n, delta).unwrap();
        let e_exact = singular_value_error_curve(sv.view()).unwrap();
        let e_ideal = singular_value_error_curve(ideal.view()).unwrap();
        let gap = e_exact.iter().zip(e_ideal.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(gap <= 0.05, "max |eps gap| = {gap}");
    }
}

#[test]
fn frobenius_of_haar_columns() {
    let mut rng = stream(3, "haar");
    let q: Array2<Complex64> = haar_unitary(16, &mut rng);
    assert!((frobenius_norm(q.view()) - 4.0).abs() < 1e-12);
}
