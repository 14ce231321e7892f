//! Compression onset for `H₀ + c_t H₁` with `|c_t| ≤ c_mag`, predicted from
//! the worst-case spectral spread of the inclusion `{H₀ + δH₁ : |δ| ≤ c_mag}`
//! and measured by snapshot POD over random fields.

use std::f64::consts::PI;

use ndarray::{Array1, ArrayView1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{evolve_time_varying, FieldSchedule};
use crate::error::{Error, Result};
use crate::hamiltonians::{random_state, HamiltonianModel};
use crate::linalg;
use crate::pod::{level_for_threshold, singular_value_error_curve, snapshot_singular_values};
use crate::spectral::compression_onset;
use crate::table::Table;

pub const DEFAULT_GRID: usize = 41;
pub const DEFAULT_THRESHOLDS: [f64; 2] = [1e-4, 1e-5];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NldiPrediction {
    pub c_mag: f64,
    pub t: f64,
    /// `max_δ (ω_max − ω_min)(H₀ + δH₁)` over the grid.
    pub spread_worst: f64,
    /// `spread_worst · T/(2π)`.
    pub delta_worst: f64,
    /// Grid point attaining the worst spread.
    pub delta_param: f64,
    /// Whether the worst spread sits at `δ = ±c_mag`.
    pub endpoint_attained: bool,
    pub m_pred: usize,
}

fn spread(h0: &HamiltonianModel, h1: &HamiltonianModel, delta: f64) -> Result<f64> {
    if delta == 0.0 {
        return Ok(h0.spectral_range());
    }
    let mut m = h0.matrix().clone();
    m.scaled_add(num_complex::Complex64::new(delta, 0.0), h1.matrix());
    let w = linalg::eigvalsh(m.view())?;
    Ok(w[w.len() - 1] - w[0])
}

pub fn nldi_predict(h0: &HamiltonianModel, h1: &HamiltonianModel, c_mag: f64, t: f64, grid: usize) -> Result<NldiPrediction> {
    if h0.dim() != h1.dim() {
        return Err(Error::validation(format!("H0 has dimension {} but H1 has {}", h0.dim(), h1.dim())));
    }
    if grid < 2 {
        return Err(Error::validation("NLDI grid needs at least 2 points"));
    }
    if !(c_mag.is_finite() && c_mag >= 0.0) {
        return Err(Error::validation("c_mag must be finite and non-negative"));
    }
    let points: Vec<f64> = if c_mag == 0.0 {
        vec![0.0]
    } else {
        Array1::linspace(-c_mag, c_mag, grid).to_vec()
    };
    let spreads: Vec<f64> = points.par_iter().map(|&d| spread(h0, h1, d)).collect::<Result<_>>()?;
    let (best, spread_worst) = spreads
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, s)| if s > acc.1 { (i, s) } else { acc });
    let endpoint_attained = best == 0 || best == points.len() - 1;
    let delta_worst = spread_worst * t / (2.0 * PI);
    Ok(NldiPrediction {
        c_mag,
        t,
        spread_worst,
        delta_worst,
        delta_param: points[best],
        endpoint_attained,
        m_pred: compression_onset(delta_worst, h0.dim()),
    })
}

/// Compression levels reached at one error threshold across trials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdLevels {
    pub threshold: f64,
    /// Per-trial smallest `m` with `ε_m ≤ threshold`; `None` if never reached.
    pub levels: Vec<Option<usize>>,
    pub min: Option<usize>,
    pub max: Option<usize>,
    pub unreachable: usize,
}

impl ThresholdLevels {
    fn new(threshold: f64, levels: Vec<Option<usize>>) -> Self {
        let reached: Vec<usize> = levels.iter().flatten().copied().collect();
        ThresholdLevels {
            threshold,
            min: reached.iter().min().copied(),
            max: reached.iter().max().copied(),
            unreachable: levels.len() - reached.len(),
            levels,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NldiEmpirical {
    pub c_mag: f64,
    pub trials: usize,
    /// `ε_m` curve of every trial, `m = 1..=n`.
    pub curves: Vec<Vec<f64>>,
    pub levels: Vec<ThresholdLevels>,
}

impl NldiEmpirical {
    /// Median over trials of `ε_m` at each `m`.
    pub fn median_curve(&self) -> Vec<f64> {
        let n = self.curves.first().map_or(0, Vec::len);
        (0..n)
            .map(|m| {
                let mut col: Vec<f64> = self.curves.iter().map(|c| c[m]).collect();
                col.sort_by(f64::total_cmp);
                let l = col.len();
                if l % 2 == 1 {
                    col[l / 2]
                } else {
                    0.5 * (col[l / 2 - 1] + col[l / 2])
                }
            })
            .collect()
    }
}

/// Trial `i` uses seed `base_seed + i` for both its field and initial state.
/// The POD uses the `K` right-endpoint states.
#[allow(clippy::too_many_arguments)]
pub fn nldi_empirical(
    h0: &HamiltonianModel,
    h1: &HamiltonianModel,
    c_mag: f64,
    t: f64,
    k: usize,
    trials: usize,
    thresholds: &[f64],
    base_seed: u64,
) -> Result<NldiEmpirical> {
    if trials == 0 {
        return Err(Error::validation("need at least one trial"));
    }
    let n = h0.dim();
    let curves: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let seed = base_seed.wrapping_add(i as u64);
            let schedule = FieldSchedule::random(k, c_mag, seed)?;
            let psi0 = random_state(n, seed)?;
            let traj = evolve_time_varying(h0, h1, &schedule, &psi0, t)?.drop_initial();
            let sv = snapshot_singular_values(traj.states.view())?;
            Ok(singular_value_error_curve(sv.view())?.to_vec())
        })
        .collect::<Result<_>>()?;
    let levels = thresholds
        .iter()
        .map(|&th| {
            let per_trial = curves.iter().map(|c| level_for_threshold(ArrayView1::from(c.as_slice()), th)).collect();
            ThresholdLevels::new(th, per_trial)
        })
        .collect();
    Ok(NldiEmpirical { c_mag, trials, curves, levels })
}

/// Rows `(c_mag, m_pred, m_at_<th>_min, m_at_<th>_max, ...)`; unreachable
/// levels are written as NaN.
pub fn table(rows: &[(NldiPrediction, NldiEmpirical)]) -> Table {
    let mut header = vec!["c_mag".to_string(), "m_pred".to_string()];
    if let Some((_, emp)) = rows.first() {
        for l in &emp.levels {
            let tag = format!("{:e}", l.threshold);
            header.push(format!("m_at_{tag}_min"));
            header.push(format!("m_at_{tag}_max"));
        }
    }
    let mut out = Table { header, rows: Vec::new() };
    let opt = |v: Option<usize>| v.map_or(f64::NAN, |x| x as f64);
    for (pred, emp) in rows {
        let mut row = vec![pred.c_mag, pred.m_pred as f64];
        for l in &emp.levels {
            row.push(opt(l.min));
            row.push(opt(l.max));
        }
        out.rows.push(row);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::evolve_constant;
    use crate::hamiltonians::build_random_hermitian;
    use crate::spectral::time_bandwidth;

    #[test]
    fn zero_field_reduces_to_time_bandwidth() {
        let h0 = build_random_hermitian(40, 1, Some(10.0)).unwrap();
        let h1 = build_random_hermitian(40, 2, Some(10.0)).unwrap();
        let p = nldi_predict(&h0, &h1, 0.0, 2.0, DEFAULT_GRID).unwrap();
        assert_eq!(p.m_pred, time_bandwidth(&h0, 2.0).m_tbw);
        assert_eq!(p.delta_worst, time_bandwidth(&h0, 2.0).delta);
    }

    #[test]
    fn spread_grows_with_field() {
        let h0 = build_random_hermitian(30, 3, Some(10.0)).unwrap();
        let h1 = build_random_hermitian(30, 4, Some(10.0)).unwrap();
        let mut last = 0.0;
        for c in [0.0, 0.1, 1.0, 10.0] {
            let p = nldi_predict(&h0, &h1, c, 2.0, DEFAULT_GRID).unwrap();
            assert!(p.spread_worst >= last);
            last = p.spread_worst;
        }
        assert!(nldi_predict(&h0, &h1, 1.0, 2.0, 1).is_err());
    }

    #[test]
    fn single_zero_field_trial_matches_constant() {
        let h0 = build_random_hermitian(16, 5, Some(10.0)).unwrap();
        let h1 = build_random_hermitian(16, 6, Some(10.0)).unwrap();
        let emp = nldi_empirical(&h0, &h1, 0.0, 2.0, 50, 1, &DEFAULT_THRESHOLDS, 9).unwrap();
        let psi = random_state(16, 9).unwrap();
        let traj = evolve_constant(&h0, &psi, 2.0, 51).unwrap().drop_initial();
        let sv = snapshot_singular_values(traj.states.view()).unwrap();
        let eps = singular_value_error_curve(sv.view()).unwrap();
        for (a, b) in emp.curves[0].iter().zip(eps.iter()) {
            assert!((a - b).abs() < 1e-9);
        }
        let t = table(&[(nldi_predict(&h0, &h1, 0.0, 2.0, 41).unwrap(), emp)]);
        assert_eq!(t.header.len(), 6);
    }
}
