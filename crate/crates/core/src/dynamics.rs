//! State and unitary propagation under constant and piecewise-constant
//! Hamiltonians.

use std::io::{Read, Write};

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expm::expm;
use crate::hamiltonians::{Family, HamiltonianModel, InitialState, StateKind};
use crate::linalg::{self, matmul, matvec, CMatrix, ZERO};
use crate::rng::{complex_normal, stream};
use crate::table::fmt_num;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Constant { family: Family },
    TimeVarying { c_mag: f64, seed: u64 },
    Loaded,
}

/// Sampled states `Ψ = [ψ_{t_1} ⋯ ψ_{t_K}]` on a uniform grid of `[0, T]`.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Array1<f64>,
    pub states: CMatrix,
    pub source: Source,
}

impl Trajectory {
    pub fn dim(&self) -> usize {
        self.states.nrows()
    }

    pub fn len(&self) -> usize {
        self.states.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.states.ncols() == 0
    }

    pub fn duration(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    /// `max_k |‖ψ_{t_k}‖ − 1|`.
    pub fn norm_drift(&self) -> f64 {
        self.states
            .columns()
            .into_iter()
            .map(|c| (linalg::vector_norm(c) - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// The trajectory without its first column.
    pub fn drop_initial(&self) -> Trajectory {
        Trajectory {
            times: self.times.slice(ndarray::s![1..]).to_owned(),
            states: self.states.slice(ndarray::s![.., 1..]).to_owned(),
            source: self.source.clone(),
        }
    }

    /// One row per sample: `t, re_0, im_0, re_1, im_1, ...`.
    pub fn to_csv(&self) -> String {
        let mut header = vec!["t".to_string()];
        for i in 0..self.dim() {
            header.push(format!("re{i}"));
            header.push(format!("im{i}"));
        }
        let mut out = header.join(",");
        out.push('\n');
        for (k, col) in self.states.columns().into_iter().enumerate() {
            out.push_str(&fmt_num(self.times[k]));
            for z in col {
                out.push(',');
                out.push_str(&fmt_num(z.re));
                out.push(',');
                out.push_str(&fmt_num(z.im));
            }
            out.push('\n');
        }
        out
    }

    /// Binary container: `QTRJ`, endianness tag, n, K, T, then
    /// little-endian f64 pairs (re, im) in column-major order.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(TRAJ_MAGIC)?;
        w.write_all(&ENDIAN_TAG.to_le_bytes())?;
        w.write_all(&(self.dim() as u64).to_le_bytes())?;
        w.write_all(&(self.len() as u64).to_le_bytes())?;
        w.write_all(&self.duration().to_le_bytes())?;
        let mut buf = Vec::with_capacity(16 * self.dim() * self.len());
        for col in self.states.columns() {
            for z in col {
                buf.extend_from_slice(&z.re.to_le_bytes());
                buf.extend_from_slice(&z.im.to_le_bytes());
            }
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Trajectory> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != TRAJ_MAGIC {
            return Err(Error::Format("not a trajectory container".into()));
        }
        let mut word4 = [0u8; 4];
        r.read_exact(&mut word4)?;
        if u32::from_le_bytes(word4) != ENDIAN_TAG {
            return Err(Error::Format("unexpected endianness tag".into()));
        }
        let mut word = [0u8; 8];
        r.read_exact(&mut word)?;
        let n = u64::from_le_bytes(word) as usize;
        r.read_exact(&mut word)?;
        let k = u64::from_le_bytes(word) as usize;
        r.read_exact(&mut word)?;
        let t = f64::from_le_bytes(word);
        let mut body = Vec::new();
        r.read_to_end(&mut body)?;
        if body.len() != 16 * n * k {
            return Err(Error::Format(format!("expected {} body bytes, found {}", 16 * n * k, body.len())));
        }
        let f = |i: usize| f64::from_le_bytes(body[8 * i..8 * i + 8].try_into().unwrap());
        let states = Array2::from_shape_fn((n, k), |(i, j)| {
            let base = 2 * (j * n + i);
            Complex64::new(f(base), f(base + 1))
        });
        Ok(Trajectory { times: time_grid(t, k), states, source: Source::Loaded })
    }
}

const TRAJ_MAGIC: &[u8; 4] = b"QTRJ";
const ENDIAN_TAG: u32 = 0x0102_0304;

fn time_grid(t: f64, samples: usize) -> Array1<f64> {
    if samples == 1 {
        return Array1::zeros(1);
    }
    Array1::linspace(0.0, t, samples)
}

fn check_duration(t: f64) -> Result<()> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::validation(format!("run time must be finite and non-negative, got {t}")));
    }
    Ok(())
}

/// `ψ_t = V e^{−itΩ} V† ψ₀` at `k` samples spanning `[0, T]` inclusive.
pub fn evolve_constant(h: &HamiltonianModel, psi0: &InitialState, t: f64, k: usize) -> Result<Trajectory> {
    check_duration(t)?;
    if k < 2 {
        return Err(Error::validation("a constant-Hamiltonian trajectory needs at least 2 samples"));
    }
    if psi0.dim() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: psi0.dim() });
    }
    let times = time_grid(t, k);
    let v = h.eigenvectors();
    let alpha = matvec(v.t().mapv(|z| z.conj()).view(), psi0.vector.view());
    let omega = h.eigenvalues();
    let phased = Array2::from_shape_fn((h.dim(), k), |(j, s)| Complex64::from_polar(1.0, -omega[j] * times[s]) * alpha[j]);
    let states = matmul(v.view(), phased.view());
    Ok(Trajectory { times, states, source: Source::Constant { family: h.family() } })
}

/// Control field held constant on each of `K` equal subintervals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldSchedule {
    pub c: Vec<f64>,
    pub c_mag: f64,
    pub seed: u64,
}

impl FieldSchedule {
    /// Values drawn uniformly from `[−c_mag, c_mag]`.
    pub fn random(k: usize, c_mag: f64, seed: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::validation("field schedule needs at least one interval"));
        }
        if !(c_mag.is_finite() && c_mag >= 0.0) {
            return Err(Error::validation("c_mag must be finite and non-negative"));
        }
        let mut rng = stream(seed, "field-schedule");
        let c = (0..k)
            .map(|_| if c_mag == 0.0 { 0.0 } else { rng.random_range(-c_mag..=c_mag) })
            .collect();
        Ok(FieldSchedule { c, c_mag, seed })
    }

    pub fn zero(k: usize) -> Self {
        FieldSchedule { c: vec![0.0; k], c_mag: 0.0, seed: 0 }
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    /// The same field on a grid `factor` times finer.
    pub fn refine(&self, factor: usize) -> Self {
        let c = self.c.iter().flat_map(|&x| std::iter::repeat_n(x, factor)).collect();
        FieldSchedule { c, ..self.clone() }
    }
}

/// `ψ_{k+1} = exp(−i(H₀ + c_k H₁)Δt) ψ_k` with `Δt = T/K`.
///
/// Returns `K + 1` columns: `ψ₀` followed by the state at the right end of
/// each subinterval.
pub fn evolve_time_varying(
    h0: &HamiltonianModel,
    h1: &HamiltonianModel,
    schedule: &FieldSchedule,
    psi0: &InitialState,
    t: f64,
) -> Result<Trajectory> {
    check_duration(t)?;
    let n = h0.dim();
    if h1.dim() != n {
        return Err(Error::validation(format!("H0 has dimension {n} but H1 has {}", h1.dim())));
    }
    if psi0.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: psi0.dim() });
    }
    if schedule.is_empty() {
        return Err(Error::validation("field schedule is empty"));
    }
    let k = schedule.len();
    let dt = t / k as f64;
    let mut states = Array2::from_elem((n, k + 1), ZERO);
    states.column_mut(0).assign(&psi0.vector);
    let mut psi = psi0.vector.clone();
    let minus_i_dt = Complex64::new(0.0, -dt);
    for (step, &c) in schedule.c.iter().enumerate() {
        let mut gen = h0.matrix().clone();
        if c != 0.0 {
            gen.scaled_add(Complex64::new(c, 0.0), h1.matrix());
        }
        gen.mapv_inplace(|z| z * minus_i_dt);
        let u = expm(gen.view());
        psi = matvec(u.view(), psi.view());
        states.column_mut(step + 1).assign(&psi);
    }
    Ok(Trajectory {
        times: time_grid(t, k + 1),
        states,
        source: Source::TimeVarying { c_mag: schedule.c_mag, seed: schedule.seed },
    })
}

/// `U_{t_k} = V e^{−it_kΩ} V†` on `K` samples of `[0, T]`.
#[derive(Clone, Debug)]
pub struct UnitaryTrajectory {
    pub times: Array1<f64>,
    pub unitaries: Vec<CMatrix>,
}

impl UnitaryTrajectory {
    /// Column `ν` of every sample, i.e. the trajectory started at `ε_ν`.
    pub fn column(&self, nu: usize) -> Trajectory {
        let n = self.unitaries.first().map_or(0, |u| u.nrows());
        let mut states = Array2::from_elem((n, self.unitaries.len()), ZERO);
        for (k, u) in self.unitaries.iter().enumerate() {
            states.column_mut(k).assign(&u.column(nu));
        }
        Trajectory { times: self.times.clone(), states, source: Source::Loaded }
    }
}

/// Default cap on the bytes held by a sampled unitary trajectory.
pub const UNITARY_MEMORY_CAP: u64 = 1 << 30;

pub fn evolve_unitary(h: &HamiltonianModel, t: f64, k: usize) -> Result<UnitaryTrajectory> {
    evolve_unitary_capped(h, t, k, UNITARY_MEMORY_CAP)
}

pub fn evolve_unitary_capped(h: &HamiltonianModel, t: f64, k: usize, cap_bytes: u64) -> Result<UnitaryTrajectory> {
    check_duration(t)?;
    if k < 2 {
        return Err(Error::validation("a unitary trajectory needs at least 2 samples"));
    }
    let n = h.dim() as u64;
    let bytes = n * n * k as u64 * 16;
    if bytes > cap_bytes {
        return Err(Error::ResourceLimit { what: "unitary trajectory bytes", requested: bytes, cap: cap_bytes });
    }
    let times = time_grid(t, k);
    let v = h.eigenvectors();
    let omega = h.eigenvalues();
    let unitaries = times
        .iter()
        .map(|&s| {
            let phases = omega.mapv(|w| Complex64::from_polar(1.0, -w * s));
            let vd = v * &phases;
            linalg::matmul_adj_rhs(vd.view(), v.view())
        })
        .collect();
    Ok(UnitaryTrajectory { times, unitaries })
}

/// `normalize(ψ₀ + magnitude·g)` with `g` a seeded random unit vector.
pub fn perturb_initial_state(psi0: &InitialState, magnitude: f64, seed: u64) -> Result<InitialState> {
    if !(0.0..1.0).contains(&magnitude) {
        return Err(Error::validation(format!("perturbation magnitude must lie in [0, 1), got {magnitude}")));
    }
    if magnitude == 0.0 {
        return Ok(psi0.clone());
    }
    let mut rng = stream(seed, "perturbation");
    let g = Array1::from_shape_simple_fn(psi0.dim(), || complex_normal(&mut rng));
    let gnorm = linalg::vector_norm(g.view());
    let mut v = psi0.vector.clone();
    v.scaled_add(Complex64::new(magnitude / gnorm, 0.0), &g);
    let norm = linalg::vector_norm(v.view());
    v.mapv_inplace(|z| z / norm);
    let distance = linalg::vector_norm((&v - &psi0.vector).view());
    Ok(InitialState { vector: v, kind: StateKind::Perturbed { seed, magnitude, distance } })
}
