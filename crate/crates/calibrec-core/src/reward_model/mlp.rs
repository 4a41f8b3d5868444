//! From-scratch MLP over encoded features: two ReLU hidden layers, inverted
//! dropout, sigmoid output. Embedding-table lookups resolve the categorical
//! index slots of the encoded vector into dense blocks before the first
//! dense layer.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::domain::LoggedTriplet;

use super::features::FeatureSpec;
use super::RewardModelError;

/// Hidden layer widths of the engagement model.
pub const HIDDEN_SIZES: [usize; 2] = [256, 64];

/// Output probabilities are clamped inside (0, 1) by this margin so the
/// cross-entropy stays finite under saturated logits.
const PROB_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub in_dim: usize,
    pub out_dim: usize,
    /// Row-major by output unit: `weights[o * in_dim + i]`.
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    pub rows: usize,
    pub dim: usize,
    /// Row-major: `weights[row * dim + j]`.
    pub weights: Vec<f64>,
}

/// All learnable parameters plus the input layout needed to run them.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    /// One table per categorical slot, in slot order.
    pub embeddings: Vec<EmbeddingTable>,
    /// Dense layers, input to output.
    pub layers: Vec<DenseLayer>,
    pub dropout_rate: f64,
    /// Offset of the categorical index slots in the encoded vector.
    pub categorical_offset: usize,
    /// Expected length of encoded input vectors.
    pub encoded_dim: usize,
}

#[derive(Debug, Clone, Copy)]
pub enum ForwardMode {
    Eval,
    Train { dropout_seed: u64 },
}

impl MlpParams {
    /// He-uniform dense weights, zero biases, uniform(-0.05, 0.05)
    /// embeddings, all drawn from the given seed.
    pub fn init(spec: &FeatureSpec, dropout_rate: f64, seed: u64) -> Self {
        Self::init_with_hidden(spec, &HIDDEN_SIZES, dropout_rate, seed)
    }

    /// As [`MlpParams::init`] with custom hidden sizes (small test networks).
    pub fn init_with_hidden(
        spec: &FeatureSpec,
        hidden: &[usize],
        dropout_rate: f64,
        seed: u64,
    ) -> Self {
        let mut rng = StdRng::seed_from_u64(seed);
        let embeddings = spec
            .embedding_rows()
            .iter()
            .map(|&rows| {
                let weights = (0..rows * spec.embed_dim)
                    .map(|_| rng.gen_range(-0.05..0.05))
                    .collect();
                EmbeddingTable { rows, dim: spec.embed_dim, weights }
            })
            .collect();
        let mut dims = vec![spec.input_dim()];
        dims.extend_from_slice(hidden);
        dims.push(1);
        let layers = dims
            .windows(2)
            .map(|pair| {
                let (in_dim, out_dim) = (pair[0], pair[1]);
                let limit = (6.0 / in_dim as f64).sqrt();
                let weights = (0..in_dim * out_dim)
                    .map(|_| rng.gen_range(-limit..limit))
                    .collect();
                DenseLayer { in_dim, out_dim, weights, biases: vec![0.0; out_dim] }
            })
            .collect();
        Self {
            embeddings,
            layers,
            dropout_rate,
            categorical_offset: spec.categorical_offset(),
            encoded_dim: spec.encoded_dim(),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn param_count(&self) -> usize {
        self.embeddings.iter().map(|e| e.weights.len()).sum::<usize>()
            + self
                .layers
                .iter()
                .map(|l| l.weights.len() + l.biases.len())
                .sum::<usize>()
    }

    /// All parameters are finite.
    pub fn is_finite(&self) -> bool {
        self.embeddings
            .iter()
            .flat_map(|e| e.weights.iter())
            .chain(self.layers.iter().flat_map(|l| l.weights.iter().chain(l.biases.iter())))
            .all(|p| p.is_finite())
    }

    /// Reads the parameter at a flat index. Flat order: embedding tables in
    /// slot order, then per layer its weights then biases.
    pub fn get_flat(&self, index: usize) -> f64 {
        let mut i = index;
        for table in &self.embeddings {
            if i < table.weights.len() {
                return table.weights[i];
            }
            i -= table.weights.len();
        }
        for layer in &self.layers {
            if i < layer.weights.len() {
                return layer.weights[i];
            }
            i -= layer.weights.len();
            if i < layer.biases.len() {
                return layer.biases[i];
            }
            i -= layer.biases.len();
        }
        panic!("flat index {index} out of range");
    }

    /// Writes the parameter at a flat index (see [`MlpParams::get_flat`]).
    pub fn set_flat(&mut self, index: usize, value: f64) {
        let mut i = index;
        for table in &mut self.embeddings {
            if i < table.weights.len() {
                table.weights[i] = value;
                return;
            }
            i -= table.weights.len();
        }
        for layer in &mut self.layers {
            if i < layer.weights.len() {
                layer.weights[i] = value;
                return;
            }
            i -= layer.weights.len();
            if i < layer.biases.len() {
                layer.biases[i] = value;
                return;
            }
            i -= layer.biases.len();
        }
        panic!("flat index {index} out of range");
    }

    fn check_input(&self, x: &[f64]) -> Result<(), RewardModelError> {
        if x.len() != self.encoded_dim {
            return Err(RewardModelError::ShapeMismatch {
                expected: self.encoded_dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Resolves embedding slots and concatenates the dense network input.
    fn assemble_input(&self, x: &[f64]) -> (Vec<f64>, Vec<usize>) {
        let k = self.embeddings.len();
        let mut input = Vec::with_capacity(self.input_dim());
        input.extend_from_slice(&x[..self.categorical_offset]);
        let mut rows = Vec::with_capacity(k);
        for (slot, table) in x[self.categorical_offset..self.categorical_offset + k]
            .iter()
            .zip(&self.embeddings)
        {
            let row = (*slot as usize).min(table.rows - 1);
            rows.push(row);
            input.extend_from_slice(&table.weights[row * table.dim..(row + 1) * table.dim]);
        }
        input.extend_from_slice(&x[self.categorical_offset + k..]);
        debug_assert_eq!(input.len(), self.input_dim());
        (input, rows)
    }

    /// Predicted engagement probability, strictly inside (0, 1).
    pub fn forward(&self, x: &[f64], mode: ForwardMode) -> Result<f64, RewardModelError> {
        Ok(self.forward_cached(x, mode)?.probability())
    }

    /// Smallest |pre-activation| across hidden units in eval mode. Gradient
    /// checks use this to reject inputs that sit so close to a ReLU corner
    /// that a finite-difference step would straddle it.
    pub fn min_abs_preactivation(&self, x: &[f64]) -> Result<f64, RewardModelError> {
        let cache = self.forward_cached(x, ForwardMode::Eval)?;
        let hidden = cache.pre_activations.len().saturating_sub(1);
        Ok(cache.pre_activations[..hidden]
            .iter()
            .flat_map(|z| z.iter())
            .fold(f64::INFINITY, |acc, &z| acc.min(z.abs())))
    }

    fn forward_cached(&self, x: &[f64], mode: ForwardMode) -> Result<ForwardCache, RewardModelError> {
        self.check_input(x)?;
        let (input, embed_rows) = self.assemble_input(x);
        let mut dropout_rng = match mode {
            ForwardMode::Eval => None,
            ForwardMode::Train { dropout_seed } => Some(StdRng::seed_from_u64(dropout_seed)),
        };
        let mut activations: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len());
        let mut pre_activations: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len());
        let mut masks: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len() - 1);
        let mut current = input.clone();
        let last = self.layers.len() - 1;
        for (li, layer) in self.layers.iter().enumerate() {
            let mut z = vec![0.0; layer.out_dim];
            for (o, zo) in z.iter_mut().enumerate() {
                let row = &layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
                let mut acc = layer.biases[o];
                for (w, a) in row.iter().zip(&current) {
                    acc += w * a;
                }
                *zo = acc;
            }
            pre_activations.push(z.clone());
            if li < last {
                let mut a: Vec<f64> = z.iter().map(|&v| v.max(0.0)).collect();
                let mask = if let Some(rng) = dropout_rng.as_mut() {
                    let keep = 1.0 - self.dropout_rate;
                    let mask: Vec<f64> = a
                        .iter()
                        .map(|_| if rng.gen::<f64>() < keep { 1.0 / keep } else { 0.0 })
                        .collect();
                    for (av, m) in a.iter_mut().zip(&mask) {
                        *av *= m;
                    }
                    mask
                } else {
                    vec![1.0; a.len()]
                };
                masks.push(mask);
                activations.push(a.clone());
                current = a;
            } else {
                activations.push(z.clone());
                current = z;
            }
        }
        let logit = current[0];
        let raw = stable_sigmoid(logit);
        Ok(ForwardCache { input, embed_rows, pre_activations, activations, masks, raw })
    }

    /// Accumulates this sample's BCE gradient into `grads`.
    fn backward(&self, cache: &ForwardCache, label: f64, grads: &mut MlpGrads) {
        let last = self.layers.len() - 1;
        // Sigmoid + BCE collapse: dL/dz_out = prob - label.
        let mut delta = vec![cache.raw - label];
        for li in (0..self.layers.len()).rev() {
            let layer = &self.layers[li];
            let below: &[f64] = if li == 0 { &cache.input } else { &cache.activations[li - 1] };
            {
                let gw = &mut grads.weights[li];
                let gb = &mut grads.biases[li];
                for (o, &d) in delta.iter().enumerate() {
                    gb[o] += d;
                    let row = &mut gw[o * layer.in_dim..(o + 1) * layer.in_dim];
                    for (g, a) in row.iter_mut().zip(below) {
                        *g += d * a;
                    }
                }
            }
            if li == 0 {
                // Propagate into the embedding rows that were looked up.
                let mut d_input = vec![0.0; layer.in_dim];
                for (o, &d) in delta.iter().enumerate() {
                    let row = &layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
                    for (di, w) in d_input.iter_mut().zip(row) {
                        *di += d * w;
                    }
                }
                let mut offset = self.categorical_offset;
                for (t, table) in self.embeddings.iter().enumerate() {
                    let row = cache.embed_rows[t];
                    let grad_rows = &mut grads.embeddings[t];
                    for j in 0..table.dim {
                        grad_rows[row * table.dim + j] += d_input[offset + j];
                    }
                    offset += table.dim;
                }
            } else {
                let mut d_below = vec![0.0; layer.in_dim];
                for (o, &d) in delta.iter().enumerate() {
                    let row = &layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
                    for (db, w) in d_below.iter_mut().zip(row) {
                        *db += d * w;
                    }
                }
                // Through dropout (mask already folds in the 1/keep scale)
                // and the ReLU gate of the layer below.
                let below_idx = li - 1;
                for ((db, &z), &m) in d_below
                    .iter_mut()
                    .zip(&cache.pre_activations[below_idx])
                    .zip(&cache.masks[below_idx])
                {
                    *db *= m * if z > 0.0 { 1.0 } else { 0.0 };
                }
                delta = d_below;
            }
        }
        let _ = last;
    }
}

struct ForwardCache {
    input: Vec<f64>,
    embed_rows: Vec<usize>,
    pre_activations: Vec<Vec<f64>>,
    activations: Vec<Vec<f64>>,
    masks: Vec<Vec<f64>>,
    /// Sigmoid output before clamping.
    raw: f64,
}

impl ForwardCache {
    fn probability(&self) -> f64 {
        self.raw.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP)
    }
}

fn stable_sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Binary cross-entropy of a clamped probability against a 0/1 label.
pub fn bce_loss(prob: f64, label: f64) -> f64 {
    let p = prob.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
    -(label * p.ln() + (1.0 - label) * (1.0 - p).ln())
}

/// Gradient accumulator with the same shapes as [`MlpParams`].
#[derive(Debug, Clone)]
pub struct MlpGrads {
    pub embeddings: Vec<Vec<f64>>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl MlpGrads {
    pub fn zeros_like(params: &MlpParams) -> Self {
        Self {
            embeddings: params.embeddings.iter().map(|e| vec![0.0; e.weights.len()]).collect(),
            weights: params.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            biases: params.layers.iter().map(|l| vec![0.0; l.biases.len()]).collect(),
        }
    }

    pub fn zero(&mut self) {
        for v in self
            .embeddings
            .iter_mut()
            .chain(self.weights.iter_mut())
            .chain(self.biases.iter_mut())
        {
            v.iter_mut().for_each(|g| *g = 0.0);
        }
    }

    /// Visits gradients in the flat parameter order.
    pub fn for_each_flat(&self, mut f: impl FnMut(usize, f64)) {
        let mut idx = 0;
        for table in &self.embeddings {
            for &g in table {
                f(idx, g);
                idx += 1;
            }
        }
        for (w, b) in self.weights.iter().zip(&self.biases) {
            for &g in w {
                f(idx, g);
                idx += 1;
            }
            for &g in b {
                f(idx, g);
                idx += 1;
            }
        }
    }
}

/// Mean BCE over a batch, eval mode (no dropout).
pub fn batch_loss(params: &MlpParams, batch: &[(&[f64], f64)]) -> Result<f64, RewardModelError> {
    let mut total = 0.0;
    for (x, y) in batch {
        let p = params.forward(x, ForwardMode::Eval)?;
        total += bce_loss(p, *y);
    }
    Ok(total / batch.len() as f64)
}

/// Mean-BCE gradient over a batch, eval mode, accumulated into `grads`.
pub fn batch_gradient(
    params: &MlpParams,
    batch: &[(&[f64], f64)],
    grads: &mut MlpGrads,
) -> Result<(), RewardModelError> {
    for (x, y) in batch {
        let cache = params.forward_cached(x, ForwardMode::Eval)?;
        params.backward(&cache, *y, grads);
    }
    let scale = 1.0 / batch.len() as f64;
    for v in grads
        .embeddings
        .iter_mut()
        .chain(grads.weights.iter_mut())
        .chain(grads.biases.iter_mut())
    {
        v.iter_mut().for_each(|g| *g *= scale);
    }
    Ok(())
}

/// Accumulates one sample's gradient (unscaled) into `grads`; training uses
/// this with dropout enabled.
pub fn sample_gradient(
    params: &MlpParams,
    x: &[f64],
    label: f64,
    mode: ForwardMode,
    grads: &mut MlpGrads,
) -> Result<f64, RewardModelError> {
    let cache = params.forward_cached(x, mode)?;
    params.backward(&cache, label, grads);
    Ok(bce_loss(cache.probability(), label))
}

/// Compares analytic gradients of the mean batch BCE against central finite
/// differences (step 1e-5) over a random sample of at most 200 coordinates.
/// Returns the maximum relative error; a correct implementation stays below
/// 1e-5 on well-conditioned networks.
pub fn gradient_check(
    params: &MlpParams,
    batch: &[LoggedTriplet],
) -> Result<f64, RewardModelError> {
    gradient_check_inner(params, batch, 1.0)
}

/// Negative control for the checker itself: the analytic bias gradients are
/// deliberately scaled, which must push the reported error well above any
/// passing threshold.
pub fn gradient_check_with_bias_fault(
    params: &MlpParams,
    batch: &[LoggedTriplet],
) -> Result<f64, RewardModelError> {
    gradient_check_inner(params, batch, 1.5)
}

fn gradient_check_inner(
    params: &MlpParams,
    batch: &[LoggedTriplet],
    bias_scale: f64,
) -> Result<f64, RewardModelError> {
    const STEP: f64 = 1e-5;
    const MAX_COORDS: usize = 200;
    let pairs: Vec<(&[f64], f64)> = batch
        .iter()
        .map(|t| (t.features.as_slice(), t.reward as f64))
        .collect();
    let mut grads = MlpGrads::zeros_like(params);
    batch_gradient(params, &pairs, &mut grads)?;
    for b in grads.biases.iter_mut() {
        b.iter_mut().for_each(|g| *g *= bias_scale);
    }
    let mut analytic = vec![0.0; params.param_count()];
    grads.for_each_flat(|idx, g| analytic[idx] = g);

    let total = params.param_count();
    let coords: Vec<usize> = if total <= MAX_COORDS {
        (0..total).collect()
    } else {
        let mut rng = StdRng::seed_from_u64(0x6e_6f_72_6d);
        (0..MAX_COORDS).map(|_| rng.gen_range(0..total)).collect()
    };

    let mut probe = params.clone();
    let mut max_rel = 0.0f64;
    for &i in &coords {
        let original = probe.get_flat(i);
        probe.set_flat(i, original + STEP);
        let plus = batch_loss(&probe, &pairs)?;
        probe.set_flat(i, original - STEP);
        let minus = batch_loss(&probe, &pairs)?;
        probe.set_flat(i, original);
        let numeric = (plus - minus) / (2.0 * STEP);
        let a = analytic[i];
        // Differences below finite-difference noise (machine eps / step)
        // count as exact agreement; the relative metric is meaningless there.
        let diff = (a - numeric).abs();
        let rel = if diff <= 1e-9 {
            0.0
        } else {
            diff / (a.abs() + numeric.abs()).max(1e-8)
        };
        if rel > max_rel {
            max_rel = rel;
        }
    }
    Ok(max_rel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::validate_distribution;
    use crate::reward_model::features::FeatureSpec;

    fn tiny_spec() -> FeatureSpec {
        FeatureSpec::new(2, vec![7], vec!["US".into()], vec!["mobile".into()], 2, 2)
    }

    fn random_input(spec: &FeatureSpec, seed: u64) -> Vec<f64> {
        let mut rng = StdRng::seed_from_u64(seed);
        let ctx = crate::domain::UserContext {
            user_id: "u".into(),
            cohort_id: rng.gen_range(0..2),
            country: "US".into(),
            device: "mobile".into(),
            hour_of_day: rng.gen_range(0..24),
            day_of_week: rng.gen_range(0..7),
            consumption_aggregates: vec![crate::domain::WindowAggregate {
                window_days: 7,
                mass: {
                    let a: f64 = rng.gen();
                    vec![a, 1.0 - a]
                },
            }],
        };
        let share: f64 = rng.gen();
        let action = validate_distribution(&[1.0 - share, share]).unwrap();
        spec.encode(&ctx, &action).unwrap()
    }

    #[test]
    fn zero_params_output_half() {
        let spec = tiny_spec();
        let mut params = MlpParams::init_with_hidden(&spec, &[4, 3], 0.0, 1);
        for i in 0..params.param_count() {
            params.set_flat(i, 0.0);
        }
        for seed in 0..5 {
            let x = random_input(&spec, seed);
            assert_eq!(params.forward(&x, ForwardMode::Eval).unwrap(), 0.5);
        }
    }

    #[test]
    fn eval_forward_ignores_dropout_seed() {
        let spec = tiny_spec();
        let params = MlpParams::init_with_hidden(&spec, &[4, 3], 0.1, 2);
        let x = random_input(&spec, 9);
        let a = params.forward(&x, ForwardMode::Eval).unwrap();
        let b = params.forward(&x, ForwardMode::Eval).unwrap();
        assert_eq!(a, b);
        // Train-mode forward with a fixed seed is also deterministic.
        let t1 = params.forward(&x, ForwardMode::Train { dropout_seed: 5 }).unwrap();
        let t2 = params.forward(&x, ForwardMode::Train { dropout_seed: 5 }).unwrap();
        assert_eq!(t1, t2);
    }

    #[test]
    fn hand_built_toy_network_matches_arithmetic() {
        // 2-2-1 network applied to a plain numeric input; no embeddings in
        // play (categorical slots absent by constructing params directly).
        let params = MlpParams {
            embeddings: vec![],
            layers: vec![
                DenseLayer {
                    in_dim: 2,
                    out_dim: 2,
                    weights: vec![0.5, -0.25, 0.75, 0.1],
                    biases: vec![0.1, -0.2],
                },
                DenseLayer { in_dim: 2, out_dim: 1, weights: vec![0.3, -0.6], biases: vec![0.05] },
            ],
            dropout_rate: 0.0,
            categorical_offset: 2,
            encoded_dim: 2,
        };
        let x = [0.8, -0.4];
        // Hand arithmetic, written out term by term.
        let z0: f64 = 0.5 * 0.8 + (-0.25) * (-0.4) + 0.1;
        let z1: f64 = 0.75 * 0.8 + 0.1 * (-0.4) + (-0.2);
        let a0 = z0.max(0.0);
        let a1 = z1.max(0.0);
        let z_out = 0.3 * a0 + (-0.6) * a1 + 0.05;
        let expected = 1.0 / (1.0 + (-z_out).exp());
        let got = params.forward(&x, ForwardMode::Eval).unwrap();
        assert!((got - expected).abs() < 1e-12);
    }

    #[test]
    fn output_strictly_inside_unit_interval() {
        let params = MlpParams {
            embeddings: vec![],
            layers: vec![DenseLayer {
                in_dim: 1,
                out_dim: 1,
                weights: vec![1000.0],
                biases: vec![0.0],
            }],
            dropout_rate: 0.0,
            categorical_offset: 1,
            encoded_dim: 1,
        };
        let hi = params.forward(&[1e6], ForwardMode::Eval).unwrap();
        let lo = params.forward(&[-1e6], ForwardMode::Eval).unwrap();
        assert!(hi < 1.0 && hi > 0.0);
        assert!(lo > 0.0 && lo < 1.0);
    }

    fn toy_batch(spec: &FeatureSpec, n: usize) -> Vec<LoggedTriplet> {
        (0..n)
            .map(|i| LoggedTriplet {
                features: random_input(spec, 100 + i as u64),
                action_index: 0,
                propensity: 1.0,
                reward: (i % 2) as u8,
                timestamp: 0,
            })
            .collect()
    }

    #[test]
    fn gradient_check_passes_on_small_networks() {
        let spec = tiny_spec();
        for seed in 0..3 {
            let params = MlpParams::init_with_hidden(&spec, &[5, 3], 0.0, seed);
            let batch = toy_batch(&spec, 6);
            let err = gradient_check(&params, &batch).unwrap();
            assert!(err < 1e-5, "seed {seed}: max rel err {err}");
        }
    }

    #[test]
    fn gradient_check_flags_broken_bias_gradient() {
        let spec = tiny_spec();
        let params = MlpParams::init_with_hidden(&spec, &[5, 3], 0.0, 11);
        let batch = toy_batch(&spec, 6);
        let err = gradient_check_with_bias_fault(&params, &batch).unwrap();
        assert!(err > 1e-2, "fault must be detected, got {err}");
    }

    #[test]
    fn gradient_check_zero_parameter_network() {
        let spec = tiny_spec();
        let mut params = MlpParams::init_with_hidden(&spec, &[4, 3], 0.0, 0);
        for i in 0..params.param_count() {
            params.set_flat(i, 0.0);
        }
        let batch = toy_batch(&spec, 4);
        let err = gradient_check(&params, &batch).unwrap();
        assert!(err.is_finite());
        assert!(err < 1e-6, "smooth point, got {err}");
    }

    #[test]
    fn flat_indexing_round_trips() {
        let spec = tiny_spec();
        let mut params = MlpParams::init_with_hidden(&spec, &[4, 3], 0.1, 3);
        let n = params.param_count();
        for i in (0..n).step_by(7) {
            let v = params.get_flat(i);
            params.set_flat(i, v + 1.0);
            assert_eq!(params.get_flat(i), v + 1.0);
            params.set_flat(i, v);
        }
    }

    #[test]
    fn dropout_mask_scales_kept_units() {
        let spec = tiny_spec();
        let params = MlpParams::init_with_hidden(&spec, &[64, 32], 0.5, 4);
        let x = random_input(&spec, 77);
        // With rate 0.5 the train-mode output differs across seeds; eval is
        // their target expectation and must sit in between extremes roughly.
        let e = params.forward(&x, ForwardMode::Eval).unwrap();
        let mut any_diff = false;
        for seed in 0..8 {
            let t = params.forward(&x, ForwardMode::Train { dropout_seed: seed }).unwrap();
            if (t - e).abs() > 1e-9 {
                any_diff = true;
            }
        }
        assert!(any_diff);
    }
}
