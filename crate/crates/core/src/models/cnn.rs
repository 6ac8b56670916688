//! Three-block convolutional network over 2-D spectrogram features.
//!
//! Architecture: three conv blocks (16/32/64 kernels of 3x3, stride 1,
//! "same" zero padding, ReLU), each followed by 2x2 max pooling and dropout
//! at rate 0.5; then a dense layer of 100 ReLU units, dropout 0.5, and a
//! dense softmax head over the two classes. Training is Adam
//! (beta1 0.9, beta2 0.999, eps 1e-8) on mean cross-entropy.
//!
//! Dropout is inverted (kept activations scale by 2 at train time) so
//! inference needs no rescale. Pooling uses floor halving: a 64x77 input
//! reaches an 8x9x64 feature map and a flatten width of 4608. Everything is
//! deterministic given the seeds: shuffling, initialization and dropout
//! masks all come from ChaCha8 streams, and reductions run in fixed order.

use crate::features::FeatureKind;
use crate::mat::Mat;
use crate::rng;

use super::{FreezeMode, ModelError, TrainConfig};

pub const CONV_CHANNELS: [usize; 3] = [16, 32, 64];
pub const DENSE_UNITS: usize = 100;
pub const CLASSES: usize = 2;
const KERNEL: usize = 3;
const DROPOUT_KEEP: f64 = 0.5;

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// Parameter tensors in Adam/container order.
pub const TENSOR_NAMES: [&str; 10] = [
    "conv1.w", "conv1.b", "conv2.w", "conv2.b", "conv3.w", "conv3.b", "dense.w", "dense.b",
    "output.w", "output.b",
];

/// Indices into [`TENSOR_NAMES`] held fixed by a freeze mode.
pub fn frozen_tensor_indices(mode: FreezeMode) -> &'static [usize] {
    match mode {
        FreezeMode::None => &[],
        FreezeMode::AllButDense => &[0, 1, 2, 3, 4, 5],
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ForwardMode {
    Infer,
    Train { dropout_seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
struct Conv2d {
    in_c: usize,
    out_c: usize,
    w: Vec<f64>, // [out_c][in_c][3][3]
    b: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
struct Dense {
    in_dim: usize,
    out_dim: usize,
    w: Vec<f64>, // [out][in]
    b: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct CnnModel {
    input_h: usize,
    input_w: usize,
    conv: [Conv2d; 3],
    dense: Dense,
    output: Dense,
    feat_mean: f64,
    feat_std: f64,
    stats_set: bool,
    feature_kind: Option<FeatureKind>,
    step: u64,
    adam_m: Vec<Vec<f64>>,
    adam_v: Vec<Vec<f64>>,
}

/// (height, width) before each conv layer plus the final pooled size.
fn stage_dims(h: usize, w: usize) -> [(usize, usize); 4] {
    let d0 = (h, w);
    let d1 = (d0.0 / 2, d0.1 / 2);
    let d2 = (d1.0 / 2, d1.1 / 2);
    let d3 = (d2.0 / 2, d2.1 / 2);
    [d0, d1, d2, d3]
}

impl CnnModel {
    /// Kaiming-uniform initialization (bound `sqrt(6 / fan_in)`), zero
    /// biases; deterministic per seed. Requires at least 8x8 inputs so all
    /// three pools are valid.
    pub fn init(input_h: usize, input_w: usize, seed: u64) -> Result<Self, ModelError> {
        if input_h < 8 || input_w < 8 {
            return Err(ModelError::Shape(format!(
                "input {input_h}x{input_w} too small; three 2x2 pools need at least 8x8"
            )));
        }
        let mut r = rng::from_seed(seed);
        let mut draw = |bound: f64| (2.0 * rng::uniform_f64(&mut r) - 1.0) * bound;

        let mut conv = Vec::with_capacity(3);
        let mut in_c = 1usize;
        for &out_c in &CONV_CHANNELS {
            let fan_in = (in_c * KERNEL * KERNEL) as f64;
            let bound = (6.0 / fan_in).sqrt();
            let w = (0..out_c * in_c * KERNEL * KERNEL).map(|_| draw(bound)).collect();
            conv.push(Conv2d { in_c, out_c, w, b: vec![0.0; out_c] });
            in_c = out_c;
        }

        let dims = stage_dims(input_h, input_w);
        let flat = dims[3].0 * dims[3].1 * CONV_CHANNELS[2];
        let bound = (6.0 / flat as f64).sqrt();
        let dense = Dense {
            in_dim: flat,
            out_dim: DENSE_UNITS,
            w: (0..DENSE_UNITS * flat).map(|_| draw(bound)).collect(),
            b: vec![0.0; DENSE_UNITS],
        };
        let bound = (6.0 / DENSE_UNITS as f64).sqrt();
        let output = Dense {
            in_dim: DENSE_UNITS,
            out_dim: CLASSES,
            w: (0..CLASSES * DENSE_UNITS).map(|_| draw(bound)).collect(),
            b: vec![0.0; CLASSES],
        };

        let conv: [Conv2d; 3] = conv.try_into().expect("three conv blocks");
        let mut model = Self {
            input_h,
            input_w,
            conv,
            dense,
            output,
            feat_mean: 0.0,
            feat_std: 1.0,
            stats_set: false,
            feature_kind: None,
            step: 0,
            adam_m: Vec::new(),
            adam_v: Vec::new(),
        };
        model.adam_m = model.params().iter().map(|p| vec![0.0; p.len()]).collect();
        model.adam_v = model.adam_m.clone();
        Ok(model)
    }

    pub fn input_shape(&self) -> (usize, usize) {
        (self.input_h, self.input_w)
    }

    /// Feature map after the third pool: (height, width, channels).
    pub fn feature_map_dims(&self) -> (usize, usize, usize) {
        let dims = stage_dims(self.input_h, self.input_w);
        (dims[3].0, dims[3].1, CONV_CHANNELS[2])
    }

    pub fn flatten_dim(&self) -> usize {
        self.dense.in_dim
    }

    pub fn feature_kind(&self) -> Option<FeatureKind> {
        self.feature_kind
    }

    pub fn set_feature_kind(&mut self, kind: Option<FeatureKind>) {
        self.feature_kind = kind;
    }

    /// Dataset-level scalar standardization applied to every input entry.
    pub fn standardization(&self) -> Option<(f64, f64)> {
        self.stats_set.then_some((self.feat_mean, self.feat_std))
    }

    pub fn set_standardization(&mut self, mean: f64, std: f64) {
        self.feat_mean = mean;
        self.feat_std = if std > 0.0 { std } else { 1.0 };
        self.stats_set = true;
    }

    /// Parameter tensors in [`TENSOR_NAMES`] order.
    pub fn params(&self) -> Vec<&[f64]> {
        vec![
            &self.conv[0].w,
            &self.conv[0].b,
            &self.conv[1].w,
            &self.conv[1].b,
            &self.conv[2].w,
            &self.conv[2].b,
            &self.dense.w,
            &self.dense.b,
            &self.output.w,
            &self.output.b,
        ]
    }

    pub fn params_mut(&mut self) -> Vec<&mut Vec<f64>> {
        let [c0, c1, c2] = &mut self.conv;
        vec![
            &mut c0.w,
            &mut c0.b,
            &mut c1.w,
            &mut c1.b,
            &mut c2.w,
            &mut c2.b,
            &mut self.dense.w,
            &mut self.dense.b,
            &mut self.output.w,
            &mut self.output.b,
        ]
    }

    fn check_shape(&self, x: &Mat) -> Result<(), ModelError> {
        if x.rows() != self.input_h || x.cols() != self.input_w {
            return Err(ModelError::Shape(format!(
                "expected {}x{} input, got {}x{}",
                self.input_h,
                self.input_w,
                x.rows(),
                x.cols()
            )));
        }
        Ok(())
    }

    /// Class probabilities `[p_normal, p_abnormal]`; they sum to 1 within
    /// one ulp. Inference mode is dropout-free and pure.
    pub fn forward_probs(&self, x: &Mat, mode: ForwardMode) -> Result<[f64; 2], ModelError> {
        Ok(self.forward(x, mode)?.probs)
    }

    /// Mean cross-entropy of one example under the given mode.
    pub fn loss(&self, x: &Mat, label: i8, mode: ForwardMode) -> Result<f64, ModelError> {
        let cache = self.forward(x, mode)?;
        Ok(cache.lse - cache.logits[class_index(label)])
    }

    /// Label in {-1, +1}; exact probability ties map to normal.
    pub fn predict(&self, x: &Mat) -> Result<i8, ModelError> {
        let p = self.forward_probs(x, ForwardMode::Infer)?;
        Ok(if p[1] > p[0] { 1 } else { -1 })
    }

    /// Loss and per-tensor gradients for one example. The dropout masks are
    /// fixed by `mode`, so finite differences over the same mode see a
    /// consistent sub-network.
    pub fn example_gradients(
        &self,
        x: &Mat,
        label: i8,
        mode: ForwardMode,
    ) -> Result<(f64, Vec<Vec<f64>>), ModelError> {
        let cache = self.forward(x, mode)?;
        let loss = cache.lse - cache.logits[class_index(label)];
        let grads = self.backward(&cache, label);
        Ok((loss, grads))
    }

    /// One Adam step over a batch; returns the mean cross-entropy. Frozen
    /// tensors are left bit-identical (their Adam state does not advance).
    pub fn train_step(
        &mut self,
        batch: &[(&Mat, i8)],
        cfg: &TrainConfig,
    ) -> Result<f64, ModelError> {
        if batch.is_empty() {
            return Err(ModelError::Shape("empty training batch".into()));
        }
        let mut grads: Vec<Vec<f64>> =
            self.params().iter().map(|p| vec![0.0; p.len()]).collect();
        let mut total_loss = 0.0;
        for (i, (x, label)) in batch.iter().enumerate() {
            let seed = rng::derive_seed(cfg.seed, &format!("drop-{}-{i}", self.step + 1));
            let (loss, g) = self.example_gradients(x, *label, ForwardMode::Train {
                dropout_seed: seed,
            })?;
            total_loss += loss;
            for (acc, gi) in grads.iter_mut().zip(&g) {
                for (a, &v) in acc.iter_mut().zip(gi) {
                    *a += v;
                }
            }
        }
        let scale = 1.0 / batch.len() as f64;
        let mean_loss = total_loss * scale;
        if !mean_loss.is_finite() {
            return Err(ModelError::Divergence(format!(
                "cross-entropy became {mean_loss} at step {}",
                self.step + 1
            )));
        }
        for g in grads.iter_mut() {
            for v in g.iter_mut() {
                *v *= scale;
            }
        }
        self.adam_update(&grads, cfg);
        Ok(mean_loss)
    }

    fn adam_update(&mut self, grads: &[Vec<f64>], cfg: &TrainConfig) {
        self.step += 1;
        let t = self.step;
        let bias1 = 1.0 - ADAM_BETA1.powi(t as i32);
        let bias2 = 1.0 - ADAM_BETA2.powi(t as i32);
        let frozen = frozen_tensor_indices(cfg.freeze);
        // Split borrows: move the state out, update, move back.
        let mut adam_m = std::mem::take(&mut self.adam_m);
        let mut adam_v = std::mem::take(&mut self.adam_v);
        for (idx, param) in self.params_mut().into_iter().enumerate() {
            if frozen.contains(&idx) {
                continue;
            }
            let (m, v) = (&mut adam_m[idx], &mut adam_v[idx]);
            for (j, p) in param.iter_mut().enumerate() {
                let g = grads[idx][j];
                m[j] = ADAM_BETA1 * m[j] + (1.0 - ADAM_BETA1) * g;
                v[j] = ADAM_BETA2 * v[j] + (1.0 - ADAM_BETA2) * g * g;
                let m_hat = m[j] / bias1;
                let v_hat = v[j] / bias2;
                *p -= cfg.learning_rate * m_hat / (v_hat.sqrt() + ADAM_EPS);
            }
        }
        self.adam_m = adam_m;
        self.adam_v = adam_v;
    }

    /// Epoch loop with seeded shuffling. Computes dataset standardization on
    /// first use and keeps it thereafter. Returns per-epoch mean losses.
    pub fn train(
        &mut self,
        data: &[(Mat, i8)],
        cfg: &TrainConfig,
    ) -> Result<Vec<f64>, ModelError> {
        if data.is_empty() {
            return Err(ModelError::DegenerateLabels("empty training set".into()));
        }
        if data.iter().all(|(_, y)| *y == data[0].1) {
            return Err(ModelError::DegenerateLabels(
                "training data contains a single class".into(),
            ));
        }
        for (x, _) in data {
            self.check_shape(x)?;
        }
        if !self.stats_set {
            let count: usize = data.iter().map(|(x, _)| x.data().len()).sum();
            let mean =
                data.iter().flat_map(|(x, _)| x.data()).sum::<f64>() / count as f64;
            let var = data
                .iter()
                .flat_map(|(x, _)| x.data())
                .map(|&v| (v - mean) * (v - mean))
                .sum::<f64>()
                / count as f64;
            self.set_standardization(mean, var.sqrt());
        }

        let mut order: Vec<usize> = (0..data.len()).collect();
        let mut shuffle_rng = rng::from_seed(rng::derive_seed(cfg.seed, "shuffle"));
        let mut epoch_losses = Vec::with_capacity(cfg.epochs);
        let batch_size = cfg.batch_size.max(1);
        for _ in 0..cfg.epochs {
            for i in (1..order.len()).rev() {
                let j = rng::uniform_index(&mut shuffle_rng, (i + 1) as u64) as usize;
                order.swap(i, j);
            }
            let mut epoch_loss = 0.0;
            for chunk in order.chunks(batch_size) {
                let batch: Vec<(&Mat, i8)> =
                    chunk.iter().map(|&i| (&data[i].0, data[i].1)).collect();
                let loss = self.train_step(&batch, cfg)?;
                epoch_loss += loss * chunk.len() as f64;
            }
            epoch_losses.push(epoch_loss / data.len() as f64);
        }
        Ok(epoch_losses)
    }

    fn forward(&self, x: &Mat, mode: ForwardMode) -> Result<Cache, ModelError> {
        self.check_shape(x)?;
        let mut dropout_rng = match mode {
            ForwardMode::Infer => None,
            ForwardMode::Train { dropout_seed } => Some(rng::from_seed(dropout_seed)),
        };

        let standardized: Vec<f64> = x
            .data()
            .iter()
            .map(|&v| (v - self.feat_mean) / self.feat_std)
            .collect();

        let dims = stage_dims(self.input_h, self.input_w);
        let mut cache = Cache::default();
        let mut current = standardized;
        for (layer, conv) in self.conv.iter().enumerate() {
            let (h, w) = dims[layer];
            cache.conv_in.push(current.clone());
            let pre = conv_forward(conv, &current, h, w);
            let (pooled, argmax, ph, pw) = pool_forward(&pre, conv.out_c, h, w);
            let mask = draw_mask(&mut dropout_rng, pooled.len());
            let out: Vec<f64> = match &mask {
                Some(m) => pooled.iter().zip(m).map(|(&v, &k)| v * k).collect(),
                None => pooled.clone(),
            };
            cache.conv_pre.push(pre);
            cache.pool_argmax.push(argmax);
            cache.drop_mask.push(mask);
            cache.pool_dims.push((ph, pw));
            cache.block_out.push(out.clone());
            current = out;
        }

        let dense_pre = dense_forward(&self.dense, &current);
        let dense_relu: Vec<f64> = dense_pre.iter().map(|&v| v.max(0.0)).collect();
        let dense_mask = draw_mask(&mut dropout_rng, dense_relu.len());
        let dense_out_in: Vec<f64> = match &dense_mask {
            Some(m) => dense_relu.iter().zip(m).map(|(&v, &k)| v * k).collect(),
            None => dense_relu.clone(),
        };
        let logits_v = dense_forward(&self.output, &dense_out_in);
        let logits = [logits_v[0], logits_v[1]];
        let m = logits[0].max(logits[1]);
        let lse = m + ((logits[0] - m).exp() + (logits[1] - m).exp()).ln();
        let probs = [(logits[0] - lse).exp(), (logits[1] - lse).exp()];

        cache.dense_pre = dense_pre;
        cache.dense_mask = dense_mask;
        cache.dense_out_in = dense_out_in;
        cache.logits = logits;
        cache.lse = lse;
        cache.probs = probs;
        Ok(cache)
    }

    /// Backprop from softmax cross-entropy; returns tensors in
    /// [`TENSOR_NAMES`] order.
    fn backward(&self, cache: &Cache, label: i8) -> Vec<Vec<f64>> {
        let target = class_index(label);
        let dims = stage_dims(self.input_h, self.input_w);
        let mut grads: Vec<Vec<f64>> =
            self.params().iter().map(|p| vec![0.0; p.len()]).collect();

        let mut dlogits = [cache.probs[0], cache.probs[1]];
        dlogits[target] -= 1.0;

        // Output dense.
        let (d_out_w, d_out_b, d_dense_out_in) =
            dense_backward(&self.output, &cache.dense_out_in, &dlogits);
        grads[8] = d_out_w;
        grads[9] = d_out_b;

        // Dense dropout + ReLU.
        let d_dense_relu: Vec<f64> = match &cache.dense_mask {
            Some(m) => d_dense_out_in.iter().zip(m).map(|(&g, &k)| g * k).collect(),
            None => d_dense_out_in,
        };
        let d_dense_pre: Vec<f64> = d_dense_relu
            .iter()
            .zip(&cache.dense_pre)
            .map(|(&g, &pre)| if pre > 0.0 { g } else { 0.0 })
            .collect();

        let (d_dense_w, d_dense_b, d_flat) =
            dense_backward(&self.dense, &cache.block_out[2], &d_dense_pre);
        grads[6] = d_dense_w;
        grads[7] = d_dense_b;

        // Conv blocks, last to first.
        let mut d_block_out = d_flat;
        for layer in (0..3).rev() {
            let conv = &self.conv[layer];
            let (h, w) = dims[layer];
            let (ph, pw) = cache.pool_dims[layer];

            let d_pool: Vec<f64> = match &cache.drop_mask[layer] {
                Some(m) => d_block_out.iter().zip(m).map(|(&g, &k)| g * k).collect(),
                None => d_block_out,
            };
            // Un-pool into the conv activation grid.
            let mut d_relu = vec![0.0f64; conv.out_c * h * w];
            for (i, &src) in cache.pool_argmax[layer].iter().enumerate() {
                d_relu[src] += d_pool[i];
            }
            debug_assert_eq!(d_pool.len(), conv.out_c * ph * pw);
            let d_pre: Vec<f64> = d_relu
                .iter()
                .zip(&cache.conv_pre[layer])
                .map(|(&g, &pre)| if pre > 0.0 { g } else { 0.0 })
                .collect();

            let (dw, db, d_in) =
                conv_backward(conv, &cache.conv_in[layer], &d_pre, h, w, layer > 0);
            grads[layer * 2] = dw;
            grads[layer * 2 + 1] = db;
            d_block_out = d_in;
        }
        grads
    }
}

#[derive(Default)]
struct Cache {
    conv_in: Vec<Vec<f64>>,
    conv_pre: Vec<Vec<f64>>,
    pool_argmax: Vec<Vec<usize>>,
    pool_dims: Vec<(usize, usize)>,
    drop_mask: Vec<Option<Vec<f64>>>,
    block_out: Vec<Vec<f64>>,
    dense_pre: Vec<f64>,
    dense_mask: Option<Vec<f64>>,
    dense_out_in: Vec<f64>,
    logits: [f64; 2],
    lse: f64,
    probs: [f64; 2],
}

fn class_index(label: i8) -> usize {
    if label > 0 {
        1
    } else {
        0
    }
}

/// Inverted dropout mask: 0 with probability 1/2, else 1/keep = 2.
fn draw_mask(rng: &mut Option<rng::Rng>, len: usize) -> Option<Vec<f64>> {
    rng.as_mut().map(|r| {
        (0..len)
            .map(|_| {
                if rng::uniform_f64(r) < 1.0 - DROPOUT_KEEP {
                    0.0
                } else {
                    1.0 / DROPOUT_KEEP
                }
            })
            .collect()
    })
}

#[inline]
fn map_idx(c: usize, y: usize, x: usize, h: usize, w: usize) -> usize {
    (c * h + y) * w + x
}

fn conv_forward(conv: &Conv2d, input: &[f64], h: usize, w: usize) -> Vec<f64> {
    let mut out = vec![0.0f64; conv.out_c * h * w];
    for oc in 0..conv.out_c {
        for y in 0..h {
            for x in 0..w {
                let mut acc = conv.b[oc];
                for ic in 0..conv.in_c {
                    for ky in 0..KERNEL {
                        let iy = y + ky;
                        if iy < 1 || iy > h {
                            continue; // zero padding of one row
                        }
                        let iy = iy - 1;
                        for kx in 0..KERNEL {
                            let ix = x + kx;
                            if ix < 1 || ix > w {
                                continue;
                            }
                            let ix = ix - 1;
                            let wv =
                                conv.w[((oc * conv.in_c + ic) * KERNEL + ky) * KERNEL + kx];
                            acc += wv * input[map_idx(ic, iy, ix, h, w)];
                        }
                    }
                }
                out[map_idx(oc, y, x, h, w)] = acc;
            }
        }
    }
    out
}

fn conv_backward(
    conv: &Conv2d,
    input: &[f64],
    d_pre: &[f64],
    h: usize,
    w: usize,
    need_input_grad: bool,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut dw = vec![0.0f64; conv.w.len()];
    let mut db = vec![0.0f64; conv.out_c];
    let mut d_in = vec![0.0f64; conv.in_c * h * w];
    for oc in 0..conv.out_c {
        for y in 0..h {
            for x in 0..w {
                let g = d_pre[map_idx(oc, y, x, h, w)];
                if g == 0.0 {
                    continue;
                }
                db[oc] += g;
                for ic in 0..conv.in_c {
                    for ky in 0..KERNEL {
                        let iy = y + ky;
                        if iy < 1 || iy > h {
                            continue;
                        }
                        let iy = iy - 1;
                        for kx in 0..KERNEL {
                            let ix = x + kx;
                            if ix < 1 || ix > w {
                                continue;
                            }
                            let ix = ix - 1;
                            let widx = ((oc * conv.in_c + ic) * KERNEL + ky) * KERNEL + kx;
                            let iidx = map_idx(ic, iy, ix, h, w);
                            dw[widx] += g * input[iidx];
                            if need_input_grad {
                                d_in[iidx] += g * conv.w[widx];
                            }
                        }
                    }
                }
            }
        }
    }
    (dw, db, d_in)
}

/// 2x2 max pooling with stride 2 (floor). ReLU is fused: the pool reads
/// `max(pre, 0)`. Returns (pooled, argmax into the pre-activation grid).
fn pool_forward(
    pre: &[f64],
    channels: usize,
    h: usize,
    w: usize,
) -> (Vec<f64>, Vec<usize>, usize, usize) {
    let ph = h / 2;
    let pw = w / 2;
    let mut out = vec![0.0f64; channels * ph * pw];
    let mut argmax = vec![0usize; channels * ph * pw];
    for c in 0..channels {
        for py in 0..ph {
            for px in 0..pw {
                let mut best = f64::NEG_INFINITY;
                let mut best_idx = 0usize;
                for dy in 0..2 {
                    for dx in 0..2 {
                        let idx = map_idx(c, py * 2 + dy, px * 2 + dx, h, w);
                        let v = pre[idx].max(0.0);
                        if v > best {
                            best = v;
                            best_idx = idx;
                        }
                    }
                }
                let oidx = (c * ph + py) * pw + px;
                out[oidx] = best;
                argmax[oidx] = best_idx;
            }
        }
    }
    (out, argmax, ph, pw)
}

fn dense_forward(layer: &Dense, input: &[f64]) -> Vec<f64> {
    debug_assert_eq!(input.len(), layer.in_dim);
    (0..layer.out_dim)
        .map(|o| {
            let row = &layer.w[o * layer.in_dim..(o + 1) * layer.in_dim];
            layer.b[o] + row.iter().zip(input).map(|(&wv, &x)| wv * x).sum::<f64>()
        })
        .collect()
}

fn dense_backward(
    layer: &Dense,
    input: &[f64],
    d_out: &[f64],
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut dw = vec![0.0f64; layer.w.len()];
    let mut d_in = vec![0.0f64; layer.in_dim];
    for o in 0..layer.out_dim {
        let g = d_out[o];
        let row = &layer.w[o * layer.in_dim..(o + 1) * layer.in_dim];
        let drow = &mut dw[o * layer.in_dim..(o + 1) * layer.in_dim];
        for i in 0..layer.in_dim {
            drow[i] = g * input[i];
            d_in[i] += g * row[i];
        }
    }
    (dw, d_out.to_vec(), d_in)
}
