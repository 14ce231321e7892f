//! Residual autoencoder wrapped around a POD basis.
//!
//! With encoder `A_enc` and decoder `A_dec` acting on the real embedding
//! `[Re ψ; Im ψ]`:
//!
//! ```text
//! Z = s·M†Ψ + A_enc(Ψ)
//! X = s·M Z + A_dec(Z)
//! ```
//!
//! where `s = ±1` selects the residual sign. The last layer of each network
//! starts at zero, so an untrained model reproduces `M M†Ψ` bit for bit and
//! training can only improve on POD.

use std::io::{Read, Write};

use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{matmul, matmul_adj_lhs, matmul_adj_rhs, CMatrix};
use crate::pod::{rms_columns, Histogram, PodModel, DEFAULT_LOG10_RANGE};
use crate::rng::stream;
use crate::table::Table;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Tanh,
    Relu,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Relu => x.max(0.0),
        }
    }

    /// Derivative expressed through the pre-activation `a` and output `h`.
    fn slope(self, a: f64, h: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - h * h,
            Activation::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualSign {
    Plus,
    Minus,
}

impl ResidualSign {
    fn factor(self) -> f64 {
        match self {
            ResidualSign::Plus => 1.0,
            ResidualSign::Minus => -1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AeConfig {
    /// Complex bottleneck width; the network sees `2m` reals.
    pub m: usize,
    pub hidden_widths: Vec<usize>,
    pub activation: Activation,
    pub epochs: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    /// Columns per gradient step; values of `K` or more mean full batch.
    pub batch_size: usize,
    pub seed: u64,
    pub residual_sign: ResidualSign,
}

impl AeConfig {
    pub fn new(m: usize) -> Self {
        AeConfig {
            m,
            hidden_widths: vec![64],
            activation: Activation::Tanh,
            epochs: 3000,
            learning_rate: 0.05,
            momentum: 0.9,
            batch_size: usize::MAX,
            seed: 0,
            residual_sign: ResidualSign::Plus,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::validation("autoencoder bottleneck m must be positive"));
        }
        if self.hidden_widths.contains(&0) {
            return Err(Error::validation("hidden widths must be positive"));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::validation("learning_rate must be positive"));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::validation("momentum must lie in [0, 1)"));
        }
        if self.batch_size == 0 {
            return Err(Error::validation("batch_size must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
struct Dense {
    w: Array2<f64>,
    b: Array1<f64>,
}

/// Feed-forward network with a linear output layer.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    layers: Vec<Dense>,
    activation: Activation,
}

struct Tape {
    /// Layer inputs, starting with the network input.
    inputs: Vec<Array2<f64>>,
    /// Pre-activations of hidden layers.
    pre: Vec<Array2<f64>>,
}

impl Mlp {
    /// Hidden layers drawn from N(0, 1/fan_in); the output layer is zero.
    fn new(widths: &[usize], activation: Activation, rng: &mut impl rand::Rng) -> Self {
        let last = widths.len() - 2;
        let layers = widths
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let weights = if i == last {
                    Array2::zeros((fan_out, fan_in))
                } else {
                    let normal = Normal::new(0.0, (1.0 / fan_in as f64).sqrt()).unwrap();
                    Array2::from_shape_simple_fn((fan_out, fan_in), || normal.sample(rng))
                };
                Dense { w: weights, b: Array1::zeros(fan_out) }
            })
            .collect();
        Mlp { layers, activation }
    }

    pub fn widths(&self) -> Vec<usize> {
        let mut w = vec![self.layers[0].w.ncols()];
        w.extend(self.layers.iter().map(|l| l.w.nrows()));
        w
    }

    fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    fn affine(layer: &Dense, x: &Array2<f64>) -> Array2<f64> {
        let mut a = matmul(layer.w.view(), x.view());
        a += &layer.b.view().insert_axis(Axis(1));
        a
    }

    fn forward(&self, x: &Array2<f64>) -> Array2<f64> {
        let mut h = x.clone();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            h = Self::affine(layer, &h);
            if i < last {
                h.mapv_inplace(|a| self.activation.apply(a));
            }
        }
        h
    }

    fn forward_tape(&self, x: &Array2<f64>) -> (Array2<f64>, Tape) {
        let mut tape = Tape { inputs: vec![x.clone()], pre: Vec::new() };
        let last = self.layers.len() - 1;
        let mut h = x.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            let a = Self::affine(layer, &h);
            if i < last {
                h = a.mapv(|v| self.activation.apply(v));
                tape.pre.push(a);
                tape.inputs.push(h.clone());
            } else {
                h = a;
            }
        }
        (h, tape)
    }

    /// Parameter gradients for output gradient `g`, plus the gradient with
    /// respect to the input when `input_grad` is set.
    fn backward(&self, tape: &Tape, mut g: Array2<f64>, input_grad: bool) -> (Vec<Dense>, Option<Array2<f64>>) {
        let mut grads = Vec::with_capacity(self.layers.len());
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let input = &tape.inputs[i];
            let gw = matmul_adj_rhs(g.view(), input.view());
            let gb = g.sum_axis(Axis(1));
            grads.push(Dense { w: gw, b: gb });
            if i == 0 && !input_grad {
                grads.reverse();
                return (grads, None);
            }
            let mut gin = matmul_adj_lhs(layer.w.view(), g.view());
            if i > 0 {
                let pre = &tape.pre[i - 1];
                ndarray::Zip::from(&mut gin)
                    .and(pre)
                    .and(input)
                    .for_each(|gv, &a, &h| *gv *= self.activation.slope(a, h));
            }
            g = gin;
        }
        grads.reverse();
        (grads, Some(g))
    }

    fn params(&self) -> impl Iterator<Item = &f64> {
        self.layers.iter().flat_map(|l| l.w.iter().chain(l.b.iter()))
    }

    fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers.iter_mut().flat_map(|l| l.w.iter_mut().chain(l.b.iter_mut()))
    }
}

fn embed(z: ArrayView2<Complex64>) -> Array2<f64> {
    let (n, k) = z.dim();
    let mut out = Array2::zeros((2 * n, k));
    out.slice_mut(s![..n, ..]).assign(&z.mapv(|c| c.re));
    out.slice_mut(s![n.., ..]).assign(&z.mapv(|c| c.im));
    out
}

fn unembed(x: ArrayView2<f64>) -> CMatrix {
    let n = x.nrows() / 2;
    Array2::from_shape_fn((n, x.ncols()), |(i, j)| Complex64::new(x[[i, j]], x[[n + i, j]]))
}

/// POD basis plus trained encoder and decoder.
#[derive(Clone, Debug, PartialEq)]
pub struct AeModel {
    pub encoder: Mlp,
    pub decoder: Mlp,
    pub pod_basis: CMatrix,
    pub residual_sign: ResidualSign,
    pub activation: Activation,
    pub seed: u64,
}

struct Forward {
    x: CMatrix,
    enc_tape: Tape,
    dec_tape: Tape,
}

impl AeModel {
    /// Untrained model: zero output layers on both networks.
    pub fn init(pod: &PodModel, config: &AeConfig) -> Result<Self> {
        config.validate()?;
        if pod.m != config.m {
            return Err(Error::validation(format!("POD basis has m = {} but config asks for {}", pod.m, config.m)));
        }
        let n = pod.dim();
        let mut rng = stream(config.seed, "ae-init");
        let mut enc_widths = vec![2 * n];
        enc_widths.extend(&config.hidden_widths);
        enc_widths.push(2 * config.m);
        let mut dec_widths = vec![2 * config.m];
        dec_widths.extend(config.hidden_widths.iter().rev());
        dec_widths.push(2 * n);
        Ok(AeModel {
            encoder: Mlp::new(&enc_widths, config.activation, &mut rng),
            decoder: Mlp::new(&dec_widths, config.activation, &mut rng),
            pod_basis: pod.basis.clone(),
            residual_sign: config.residual_sign,
            activation: config.activation,
            seed: config.seed,
        })
    }

    pub fn dim(&self) -> usize {
        self.pod_basis.nrows()
    }

    pub fn m(&self) -> usize {
        self.pod_basis.ncols()
    }

    fn latent(&self, states: ArrayView2<Complex64>, enc_out: &Array2<f64>) -> CMatrix {
        let sign = self.residual_sign.factor();
        let mut z = matmul_adj_lhs(self.pod_basis.view(), states);
        if sign < 0.0 {
            z.mapv_inplace(|c| -c);
        }
        z + unembed(enc_out.view())
    }

    fn output(&self, z: &CMatrix, dec_out: &Array2<f64>) -> CMatrix {
        let sign = self.residual_sign.factor();
        let mut x = matmul(self.pod_basis.view(), z.view());
        if sign < 0.0 {
            x.mapv_inplace(|c| -c);
        }
        x + unembed(dec_out.view())
    }

    fn run(&self, states: ArrayView2<Complex64>) -> Forward {
        let (enc_out, enc_tape) = self.encoder.forward_tape(&embed(states));
        let z = self.latent(states, &enc_out);
        let (dec_out, dec_tape) = self.decoder.forward_tape(&embed(z.view()));
        Forward { x: self.output(&z, &dec_out), enc_tape, dec_tape }
    }

    /// Deterministic forward pass `Ψ ↦ X`.
    pub fn reconstruct(&self, states: ArrayView2<Complex64>) -> Result<CMatrix> {
        if states.nrows() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: states.nrows() });
        }
        let enc_out = self.encoder.forward(&embed(states));
        let z = self.latent(states, &enc_out);
        let dec_out = self.decoder.forward(&embed(z.view()));
        Ok(self.output(&z, &dec_out))
    }

    /// Loss `‖Ψ − X‖²_F / K` and its gradient for encoder and decoder.
    fn loss_and_grad(&self, states: ArrayView2<Complex64>) -> (f64, Vec<Dense>, Vec<Dense>) {
        let k = states.ncols() as f64;
        let fwd = self.run(states);
        let residual = &states - &fwd.x;
        let loss = residual.iter().map(|z| z.norm_sqr()).sum::<f64>() / k;
        // dL/dX in complex form: ∂/∂Re + i ∂/∂Im.
        let g_x = residual.mapv(|z| z * (-2.0 / k));
        let (dec_grads, g_dec_in) = self.decoder.backward(&fwd.dec_tape, embed(g_x.view()), true);
        let g_dec_in = g_dec_in.expect("input gradient requested");
        let sign = self.residual_sign.factor();
        let mut g_z = matmul_adj_lhs(self.pod_basis.view(), g_x.view());
        if sign < 0.0 {
            g_z.mapv_inplace(|c| -c);
        }
        g_z = g_z + unembed(g_dec_in.view());
        let (enc_grads, _) = self.encoder.backward(&fwd.enc_tape, embed(g_z.view()), false);
        (loss, enc_grads, dec_grads)
    }

    pub fn rms_error(&self, states: ArrayView2<Complex64>) -> Result<f64> {
        let x = self.reconstruct(states)?;
        Ok(rms_columns((&states - &x).view()))
    }
}

/// Per-epoch RMS error of the model at the start of each epoch, followed by
/// the error after the last update.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingCurve {
    pub rms: Vec<f64>,
    pub best_epoch: usize,
}

impl TrainingCurve {
    pub fn best_rms(&self) -> f64 {
        self.rms[self.best_epoch]
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["epoch", "rms_error"]);
        for (e, r) in self.rms.iter().enumerate() {
            t.push(vec![e as f64, *r]);
        }
        t
    }
}

fn flat_grads(enc: &[Dense], dec: &[Dense]) -> Vec<f64> {
    enc.iter()
        .chain(dec)
        .flat_map(|l| l.w.iter().chain(l.b.iter()).copied())
        .collect()
}

/// Momentum gradient descent on `‖Ψ − X‖²_F / K`, returning the best model
/// seen (the untrained POD model counts as epoch 0).
pub fn ae_train(snapshot: ArrayView2<Complex64>, pod: &PodModel, config: &AeConfig) -> Result<(AeModel, TrainingCurve)> {
    if snapshot.nrows() != pod.dim() {
        return Err(Error::DimensionMismatch { expected: pod.dim(), found: snapshot.nrows() });
    }
    let k = snapshot.ncols();
    if k == 0 {
        return Err(Error::validation("snapshot has no columns"));
    }
    let mut model = AeModel::init(pod, config)?;
    let n_params = model.encoder.param_count() + model.decoder.param_count();
    let mut velocity = vec![0.0; n_params];
    let full_batch = config.batch_size >= k;
    let mut order: Vec<usize> = (0..k).collect();
    let mut shuffle_rng = stream(config.seed, "ae-batches");

    let mut rms = Vec::with_capacity(config.epochs + 1);
    let mut best = (f64::INFINITY, 0usize, model.clone());

    for epoch in 0..=config.epochs {
        let loss_now = if full_batch && epoch < config.epochs {
            None
        } else {
            let x = model.reconstruct(snapshot)?;
            Some((&snapshot - &x).iter().map(|z| z.norm_sqr()).sum::<f64>() / k as f64)
        };
        if epoch == config.epochs {
            record(&mut rms, &mut best, &model, loss_now.unwrap(), epoch)?;
            break;
        }

        let batches: Vec<Vec<usize>> = if full_batch {
            vec![order.clone()]
        } else {
            order.shuffle(&mut shuffle_rng);
            order.chunks(config.batch_size).map(<[usize]>::to_vec).collect()
        };
        for (b, idx) in batches.iter().enumerate() {
            let (loss, enc_g, dec_g) = if full_batch {
                model.loss_and_grad(snapshot)
            } else {
                let cols = snapshot.select(Axis(1), idx);
                model.loss_and_grad(cols.view())
            };
            if b == 0 {
                let epoch_loss = loss_now.unwrap_or(loss);
                record(&mut rms, &mut best, &model, epoch_loss, epoch)?;
            }
            let grads = flat_grads(&enc_g, &dec_g);
            if grads.iter().any(|g| !g.is_finite()) {
                return Err(Error::Divergence { epoch, loss });
            }
            for (v, g) in velocity.iter_mut().zip(&grads) {
                *v = config.momentum * *v + g;
            }
            let lr = config.learning_rate;
            for (p, v) in model.encoder.params_mut().chain(model.decoder.params_mut()).zip(&velocity) {
                *p -= lr * v;
            }
        }
    }
    let (_, best_epoch, best_model) = best;
    Ok((best_model, TrainingCurve { rms, best_epoch }))
}

fn record(rms: &mut Vec<f64>, best: &mut (f64, usize, AeModel), model: &AeModel, loss: f64, epoch: usize) -> Result<()> {
    if !loss.is_finite() {
        return Err(Error::Divergence { epoch, loss });
    }
    rms.push(loss.sqrt());
    if loss < best.0 {
        *best = (loss, epoch, model.clone());
    }
    Ok(())
}

pub fn ae_reconstruct(model: &AeModel, states: ArrayView2<Complex64>) -> Result<CMatrix> {
    model.reconstruct(states)
}

/// Histogram of `log10 |Ψ − X|` over all entries.
pub fn ae_error_histogram(model: &AeModel, states: ArrayView2<Complex64>, bins: usize) -> Result<Histogram> {
    let x = model.reconstruct(states)?;
    let residual = &states - &x;
    Histogram::from_magnitudes(residual.iter().map(|z| z.norm()), bins, DEFAULT_LOG10_RANGE)
}

#[derive(Serialize, Deserialize)]
struct CheckpointHeader {
    format: String,
    n: usize,
    m: usize,
    encoder_widths: Vec<usize>,
    decoder_widths: Vec<usize>,
    activation: Activation,
    residual_sign: ResidualSign,
    seed: u64,
    embedding: String,
    blob_len: usize,
}

const CHECKPOINT_FORMAT: &str = "qcompress-ae-v1";
const EMBEDDING: &str = "re_im_stacked";

impl AeModel {
    /// `u64` header length, JSON header, then little-endian f64 weights
    /// (encoder, decoder, each layer as row-major W then b) and the POD
    /// basis as column-major (re, im) pairs.
    pub fn save<W: Write>(&self, mut w: W) -> Result<()> {
        let blob: Vec<f64> = self
            .encoder
            .params()
            .chain(self.decoder.params())
            .copied()
            .chain(self.pod_basis.t().iter().flat_map(|z| [z.re, z.im]))
            .collect();
        let header = CheckpointHeader {
            format: CHECKPOINT_FORMAT.into(),
            n: self.dim(),
            m: self.m(),
            encoder_widths: self.encoder.widths(),
            decoder_widths: self.decoder.widths(),
            activation: self.activation,
            residual_sign: self.residual_sign,
            seed: self.seed,
            embedding: EMBEDDING.into(),
            blob_len: blob.len(),
        };
        let json = serde_json::to_vec(&header)?;
        w.write_all(&(json.len() as u64).to_le_bytes())?;
        w.write_all(&json)?;
        let mut bytes = Vec::with_capacity(8 * blob.len());
        for x in blob {
            bytes.extend_from_slice(&x.to_le_bytes());
        }
        w.write_all(&bytes)?;
        Ok(())
    }

    pub fn load<R: Read>(mut r: R) -> Result<AeModel> {
        let mut word = [0u8; 8];
        r.read_exact(&mut word)?;
        let len = u64::from_le_bytes(word) as usize;
        if len > 1 << 20 {
            return Err(Error::Format("checkpoint header too large".into()));
        }
        let mut json = vec![0u8; len];
        r.read_exact(&mut json)?;
        let header: CheckpointHeader = serde_json::from_slice(&json)?;
        if header.format != CHECKPOINT_FORMAT || header.embedding != EMBEDDING {
            return Err(Error::Format(format!("unsupported checkpoint format {}", header.format)));
        }
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        if bytes.len() != 8 * header.blob_len {
            return Err(Error::Format("checkpoint weight blob has the wrong length".into()));
        }
        let mut values = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap()));
        let mut take_mlp = |widths: &[usize]| -> Result<Mlp> {
            if widths.len() < 2 {
                return Err(Error::Format("network needs at least one layer".into()));
            }
            let mut layers = Vec::new();
            for win in widths.windows(2) {
                let (fan_in, fan_out) = (win[0], win[1]);
                let w: Vec<f64> = values.by_ref().take(fan_in * fan_out).collect();
                let b: Vec<f64> = values.by_ref().take(fan_out).collect();
                if w.len() != fan_in * fan_out || b.len() != fan_out {
                    return Err(Error::Format("checkpoint ended early".into()));
                }
                layers.push(Dense { w: Array2::from_shape_vec((fan_out, fan_in), w).unwrap(), b: Array1::from(b) });
            }
            Ok(Mlp { layers, activation: header.activation })
        };
        let encoder = take_mlp(&header.encoder_widths)?;
        let decoder = take_mlp(&header.decoder_widths)?;
        let basis: Vec<f64> = values.collect();
        if basis.len() != 2 * header.n * header.m {
            return Err(Error::Format("checkpoint basis has the wrong size".into()));
        }
        let pod_basis = Array2::from_shape_fn((header.n, header.m), |(i, j)| {
            let base = 2 * (j * header.n + i);
            Complex64::new(basis[base], basis[base + 1])
        });
        Ok(AeModel {
            encoder,
            decoder,
            pod_basis,
            residual_sign: header.residual_sign,
            activation: header.activation,
            seed: header.seed,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::evolve_constant;
    use crate::hamiltonians::{build_random_hermitian, random_state};
    use crate::pod::{covariance_from_snapshot, state_error_histogram, state_error_rms, PodDecomposition};
    use rand_distr::StandardNormal;

    fn small_problem(n: usize, k: usize, m: usize) -> (CMatrix, PodModel) {
        let h = build_random_hermitian(n, 1, Some(5.0)).unwrap();
        let psi = random_state(n, 2).unwrap();
        let traj = evolve_constant(&h, &psi, 2.0, k).unwrap();
        let c = covariance_from_snapshot(&traj).unwrap();
        let pod = PodDecomposition::new(&c).unwrap().truncate(m).unwrap();
        (traj.states, pod)
    }

    fn randomize(model: &mut AeModel, seed: u64, scale: f64) {
        let mut rng = stream(seed, "perturb-weights");
        for p in model.encoder.params_mut().chain(model.decoder.params_mut()) {
            let g: f64 = rand::Rng::sample(&mut rng, StandardNormal);
            *p += scale * g;
        }
    }

    #[test]
    fn zero_weights_reproduce_pod_bitwise() {
        let (states, pod) = small_problem(12, 15, 3);
        for sign in [ResidualSign::Plus, ResidualSign::Minus] {
            let config = AeConfig { residual_sign: sign, ..AeConfig::new(3) };
            let model = AeModel::init(&pod, &config).unwrap();
            let x = model.reconstruct(states.view()).unwrap();
            assert_eq!(x, pod.reconstruct(states.view()), "{sign:?}");
        }
        let config = AeConfig { epochs: 0, ..AeConfig::new(3) };
        let (model, curve) = ae_train(states.view(), &pod, &config).unwrap();
        let traj = crate::dynamics::Trajectory {
            times: Array1::zeros(15),
            states: states.clone(),
            source: crate::dynamics::Source::Loaded,
        };
        let pod_rms = state_error_rms(&pod, &traj).unwrap();
        assert_eq!(model.rms_error(states.view()).unwrap(), pod_rms);
        assert_eq!(curve.rms, vec![pod_rms]);
        let h_ae = ae_error_histogram(&model, states.view(), 20).unwrap();
        let h_pod = state_error_histogram(&pod, states.view(), 20).unwrap();
        assert_eq!(h_ae, h_pod);
        assert_eq!(h_ae.total(), 12 * 15);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let (states, pod) = small_problem(8, 10, 2);
        for (activation, sign) in [
            (Activation::Tanh, ResidualSign::Plus),
            (Activation::Tanh, ResidualSign::Minus),
            (Activation::Relu, ResidualSign::Plus),
        ] {
            let config = AeConfig { hidden_widths: vec![4], activation, residual_sign: sign, ..AeConfig::new(2) };
            let mut model = AeModel::init(&pod, &config).unwrap();
            randomize(&mut model, 3, 0.3);
            let (_, eg, dg) = model.loss_and_grad(states.view());
            let analytic = flat_grads(&eg, &dg);
            let loss_at = |m: &AeModel| {
                let x = m.reconstruct(states.view()).unwrap();
                (&states - &x).iter().map(|z| z.norm_sqr()).sum::<f64>() / 10.0
            };
            let h = 1e-6;
            let count = analytic.len();
            let mut worst: f64 = 0.0;
            for i in 0..count {
                let mut plus = model.clone();
                let mut minus = model.clone();
                *plus.encoder.params_mut().chain(plus.decoder.params_mut()).nth(i).unwrap() += h;
                *minus.encoder.params_mut().chain(minus.decoder.params_mut()).nth(i).unwrap() -= h;
                let fd = (loss_at(&plus) - loss_at(&minus)) / (2.0 * h);
                let scale = analytic[i].abs().max(fd.abs()).max(1e-3);
                worst = worst.max((fd - analytic[i]).abs() / scale);
            }
            assert!(worst < 1e-5, "{activation:?} {sign:?}: {worst}");
        }
    }

    #[test]
    fn training_improves_and_is_deterministic() {
        let (states, pod) = small_problem(16, 40, 2);
        let config = AeConfig { hidden_widths: vec![8], epochs: 200, learning_rate: 0.05, ..AeConfig::new(2) };
        let (model, curve) = ae_train(states.view(), &pod, &config).unwrap();
        assert_eq!(curve.rms.len(), 201);
        assert!(curve.best_rms() <= curve.rms[0]);
        assert!(curve.best_rms() < 0.9 * curve.rms[0], "{} vs {}", curve.best_rms(), curve.rms[0]);
        assert_eq!(model.rms_error(states.view()).unwrap(), curve.best_rms());
        let (_, again) = ae_train(states.view(), &pod, &config).unwrap();
        assert_eq!(again.rms, curve.rms);

        let mini = AeConfig { batch_size: 7, epochs: 20, ..config.clone() };
        let (_, c1) = ae_train(states.view(), &pod, &mini).unwrap();
        let (_, c2) = ae_train(states.view(), &pod, &mini).unwrap();
        assert_eq!(c1.rms, c2.rms);
    }

    #[test]
    fn divergence_is_reported() {
        let (states, pod) = small_problem(8, 10, 2);
        let config = AeConfig { learning_rate: 1e200, epochs: 50, hidden_widths: vec![4], ..AeConfig::new(2) };
        assert!(matches!(ae_train(states.view(), &pod, &config), Err(Error::Divergence { .. })));
    }

    #[test]
    fn reconstruct_checks_dimensions() {
        let (states, pod) = small_problem(8, 10, 2);
        let model = AeModel::init(&pod, &AeConfig::new(2)).unwrap();
        let short = states.slice(s![..6, ..]).to_owned();
        assert!(model.reconstruct(short.view()).is_err());
        let bad = AeConfig::new(3);
        assert!(AeModel::init(&pod, &bad).is_err());
    }

    #[test]
    fn checkpoint_round_trip() {
        let (states, pod) = small_problem(8, 10, 2);
        let mut model = AeModel::init(&pod, &AeConfig { hidden_widths: vec![5, 3], ..AeConfig::new(2) }).unwrap();
        randomize(&mut model, 9, 0.1);
        let mut buf = Vec::new();
        model.save(&mut buf).unwrap();
        let back = AeModel::load(buf.as_slice()).unwrap();
        assert_eq!(back, model);
        assert_eq!(back.reconstruct(states.view()).unwrap(), model.reconstruct(states.view()).unwrap());
        assert!(AeModel::load(&buf[..buf.len() - 8]).is_err());
    }
}
