//! A small feed-forward network: dense layers with optional batch
//! normalization, ReLU, and a softmax head trained with cross-entropy and
//! minibatch SGD.
//!
//! Layout per hidden layer is `Dense -> [BatchNorm] -> ReLU`; the head is a
//! dense layer producing one logit per class followed by softmax.

mod backprop;
mod gradcheck;

use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use backprop::{train, upsample_positives, Gradients};
pub use gradcheck::{gradient_check, GradCheckReport};

pub const MODEL_FORMAT: &str = "tabqa-mlp";
pub const MODEL_VERSION: u32 = 1;

const BN_MOMENTUM: f64 = 0.9;
const BN_EPS: f64 = 1e-5;

#[derive(Debug, Error)]
pub enum NnError {
    #[error("expected input of length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("no training data")]
    EmptyData,
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("invalid network spec: {0}")]
    InvalidSpec(String),
    #[error("model file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutputHead {
    Binary2,
    Softmax7,
}

impl OutputHead {
    pub fn classes(self) -> usize {
        match self {
            OutputHead::Binary2 => 2,
            OutputHead::Softmax7 => 7,
        }
    }
}

/// Network shape. The head layer (2 or 7 logits) comes after `hidden`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpSpec {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub use_batchnorm: bool,
    pub output: OutputHead,
}

impl MlpSpec {
    /// 25 -> 32 -> 16 -> 8 -> 2 with batch normalization.
    pub fn select_head() -> MlpSpec {
        MlpSpec {
            input_dim: 25,
            hidden: vec![32, 16, 8],
            use_batchnorm: true,
            output: OutputHead::Binary2,
        }
    }

    /// Same family as the SELECT head over 77 inputs.
    pub fn where_head() -> MlpSpec {
        MlpSpec {
            input_dim: 77,
            ..MlpSpec::select_head()
        }
    }

    /// 9 -> 32 -> 32 -> 7, softmax.
    pub fn column_type_head() -> MlpSpec {
        MlpSpec {
            input_dim: 9,
            hidden: vec![32, 32],
            use_batchnorm: false,
            output: OutputHead::Softmax7,
        }
    }

    pub fn validate(&self) -> Result<(), NnError> {
        if self.input_dim == 0 || self.hidden.contains(&0) {
            return Err(NnError::InvalidSpec(format!("zero-sized layer in {self}")));
        }
        Ok(())
    }

    fn layer_dims(&self) -> Vec<(usize, usize)> {
        let mut dims = Vec::with_capacity(self.hidden.len() + 1);
        let mut prev = self.input_dim;
        for &h in &self.hidden {
            dims.push((prev, h));
            prev = h;
        }
        dims.push((prev, self.output.classes()));
        dims
    }
}

impl fmt::Display for MlpSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.input_dim)?;
        for h in &self.hidden {
            write!(f, "-{h}")?;
        }
        write!(f, "-{}", self.output.classes())?;
        if self.use_batchnorm {
            write!(f, " (bn)")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    pub batch_size: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.01,
            epochs: 300,
            seed: 0,
            batch_size: 32,
        }
    }
}

/// Row-major `out x in` weights plus bias. Layers that feed a batch-norm
/// layer carry no bias (`bias` is empty): the normalization subtracts the
/// batch mean, so such a bias never affects the output and the
/// normalization's `beta` supplies the shift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    fn init(in_dim: usize, out_dim: usize, with_bias: bool, rng: &mut ChaCha8Rng) -> Dense {
        let limit = (6.0 / (in_dim + out_dim) as f64).sqrt();
        let weights = (0..in_dim * out_dim)
            .map(|_| rng.gen_range(-limit..=limit))
            .collect();
        Dense {
            in_dim,
            out_dim,
            weights,
            bias: if with_bias {
                vec![0.0; out_dim]
            } else {
                Vec::new()
            },
        }
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.out_dim)
            .map(|o| {
                let row = &self.weights[o * self.in_dim..(o + 1) * self.in_dim];
                self.bias.get(o).copied().unwrap_or(0.0)
                    + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchNorm {
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
    pub running_mean: Vec<f64>,
    pub running_var: Vec<f64>,
}

impl BatchNorm {
    fn new(dim: usize) -> BatchNorm {
        BatchNorm {
            gamma: vec![1.0; dim],
            beta: vec![0.0; dim],
            running_mean: vec![0.0; dim],
            running_var: vec![1.0; dim],
        }
    }

    fn infer(&self, z: &mut [f64]) {
        for (i, v) in z.iter_mut().enumerate() {
            let xhat = (*v - self.running_mean[i]) / (self.running_var[i] + BN_EPS).sqrt();
            *v = self.gamma[i] * xhat + self.beta[i];
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    spec: MlpSpec,
    layers: Vec<Dense>,
    norms: Vec<Option<BatchNorm>>,
    loss_history: Vec<f64>,
}

impl Mlp {
    /// Seeded Glorot-uniform initialization; biases zero, BN at identity.
    pub fn init(spec: &MlpSpec, seed: u64) -> Result<Mlp, NnError> {
        spec.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dims = spec.layer_dims();
        let normed = |l: usize| spec.use_batchnorm && l + 1 < dims.len();
        let layers: Vec<Dense> = dims
            .iter()
            .enumerate()
            .map(|(l, &(i, o))| Dense::init(i, o, !normed(l), &mut rng))
            .collect();
        let norms = dims
            .iter()
            .enumerate()
            .map(|(l, &(_, o))| normed(l).then(|| BatchNorm::new(o)))
            .collect();
        Ok(Mlp {
            spec: spec.clone(),
            layers,
            norms,
            loss_history: Vec::new(),
        })
    }

    pub fn spec(&self) -> &MlpSpec {
        &self.spec
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    pub fn norms(&self) -> &[Option<BatchNorm>] {
        &self.norms
    }

    pub fn loss_history(&self) -> &[f64] {
        &self.loss_history
    }

    pub fn classes(&self) -> usize {
        self.spec.output.classes()
    }

    /// Inference-mode logits (batch norm uses running statistics).
    pub fn logits(&self, x: &[f64]) -> Result<Vec<f64>, NnError> {
        if x.len() != self.spec.input_dim {
            return Err(NnError::DimensionMismatch {
                expected: self.spec.input_dim,
                got: x.len(),
            });
        }
        let mut a = x.to_vec();
        let last = self.layers.len() - 1;
        for (l, dense) in self.layers.iter().enumerate() {
            let mut z = dense.apply(&a);
            if l < last {
                if let Some(bn) = &self.norms[l] {
                    bn.infer(&mut z);
                }
                z.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            a = z;
        }
        Ok(a)
    }

    /// Class probabilities for one input.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>, NnError> {
        Ok(softmax(&self.logits(x)?))
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize, NnError> {
        Ok(argmax(&self.forward(x)?))
    }

    /// Number of trainable parameters (weights, biases, BN gamma/beta).
    pub fn param_count(&self) -> usize {
        self.params().len()
    }

    /// Trainable parameters flattened layer by layer: weights, bias, then
    /// that layer's gamma and beta when batch norm is on.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (dense, bn) in self.layers.iter().zip(&self.norms) {
            out.extend_from_slice(&dense.weights);
            out.extend_from_slice(&dense.bias);
            if let Some(bn) = bn {
                out.extend_from_slice(&bn.gamma);
                out.extend_from_slice(&bn.beta);
            }
        }
        out
    }

    pub fn set_params(&mut self, flat: &[f64]) -> Result<(), NnError> {
        if flat.len() != self.param_count() {
            return Err(NnError::DimensionMismatch {
                expected: self.param_count(),
                got: flat.len(),
            });
        }
        let mut it = flat.iter().copied();
        let mut fill = |dst: &mut Vec<f64>| dst.iter_mut().for_each(|v| *v = it.next().unwrap());
        for (dense, bn) in self.layers.iter_mut().zip(self.norms.iter_mut()) {
            fill(&mut dense.weights);
            fill(&mut dense.bias);
            if let Some(bn) = bn {
                fill(&mut bn.gamma);
                fill(&mut bn.beta);
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let file = ModelFile {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            model: self.clone(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("model serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Mlp, NnError> {
        let file: ModelFile =
            serde_json::from_str(text).map_err(|e| NnError::Format(e.to_string()))?;
        if file.format != MODEL_FORMAT || file.version != MODEL_VERSION {
            return Err(NnError::Format(format!(
                "expected {MODEL_FORMAT} v{MODEL_VERSION}, found {} v{}",
                file.format, file.version
            )));
        }
        let m = file.model;
        let dims = m.spec.layer_dims();
        let shapes_ok = m.layers.len() == dims.len()
            && m.norms.len() == dims.len()
            && m.layers
                .iter()
                .zip(&m.norms)
                .zip(&dims)
                .all(|((d, bn), &(i, o))| {
                    let bias_len = if bn.is_some() { 0 } else { o };
                    d.in_dim == i
                        && d.out_dim == o
                        && d.weights.len() == i * o
                        && d.bias.len() == bias_len
                });
        if !shapes_ok {
            return Err(NnError::Format(format!(
                "parameter shapes do not match {}",
                m.spec
            )));
        }
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<(), NnError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Mlp, NnError> {
        Mlp::from_json(&std::fs::read_to_string(path)?)
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    model: Mlp,
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Index of the largest entry; the first one wins ties.
pub fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in xs.iter().enumerate() {
        if *x > xs[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn zeroed(spec: &MlpSpec) -> Mlp {
        let mut m = Mlp::init(spec, 1).unwrap();
        let n = m.param_count();
        m.set_params(&vec![0.0; n]).unwrap();
        m
    }

    #[test]
    fn zero_weights_give_uniform_output() {
        for spec in [MlpSpec::select_head(), MlpSpec::column_type_head()] {
            let m = zeroed(&spec);
            let p = m.forward(&vec![0.3; spec.input_dim]).unwrap();
            let k = spec.output.classes() as f64;
            assert!(p.iter().all(|v| (v - 1.0 / k).abs() < 1e-12));
        }
    }

    #[test]
    fn identity_linear_layer_softmax() {
        let spec = MlpSpec {
            input_dim: 2,
            hidden: vec![],
            use_batchnorm: false,
            output: OutputHead::Binary2,
        };
        let mut m = Mlp::init(&spec, 0).unwrap();
        m.set_params(&[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(m.forward(&[0.0, 0.0]).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn hand_computed_two_two_two_forward() {
        let spec = MlpSpec {
            input_dim: 2,
            hidden: vec![2],
            use_batchnorm: false,
            output: OutputHead::Binary2,
        };
        let mut m = Mlp::init(&spec, 0).unwrap();
        // W1 = [[1,-1],[0.5,2]], b1 = [0.1,-0.2]; W2 = [[1,0],[-1,1]], b2 = [0,0.5]
        m.set_params(&[
            1.0, -1.0, 0.5, 2.0, 0.1, -0.2, 1.0, 0.0, -1.0, 1.0, 0.0, 0.5,
        ])
        .unwrap();
        // x = [1, 2]: z1 = [1-2+0.1, 0.5+4-0.2] = [-0.9, 4.3]; relu -> [0, 4.3]
        // logits = [0, -0 + 4.3 + 0.5] = [0, 4.8]
        // p1 = 1 / (1 + e^-4.8) = 0.9918374288..., p0 = 0.0081625711...
        let p = m.forward(&[1.0, 2.0]).unwrap();
        assert!((p[1] - 0.991_837_428_8).abs() < 1e-9, "{p:?}");
        assert!((p[0] - 0.008_162_571_2).abs() < 1e-9);
    }

    #[test]
    fn dimension_mismatch() {
        let m = Mlp::init(&MlpSpec::select_head(), 0).unwrap();
        assert!(matches!(
            m.forward(&[0.0; 3]),
            Err(NnError::DimensionMismatch {
                expected: 25,
                got: 3
            })
        ));
    }

    #[test]
    fn param_counts_match_architecture() {
        let m = Mlp::init(&MlpSpec::select_head(), 0).unwrap();
        // Hidden dense layers feed batch norm and carry no bias:
        // 25*32 + 32*16 + 16*8, head 8*2+2, bn 2*(32+16+8).
        assert_eq!(m.param_count(), 800 + 512 + 128 + 18 + 112);
        assert!(m.layers()[..3].iter().all(|d| d.bias.is_empty()));
        let m = Mlp::init(&MlpSpec::column_type_head(), 0).unwrap();
        assert_eq!(m.param_count(), 9 * 32 + 32 + 32 * 32 + 32 + 32 * 7 + 7);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let m = Mlp::init(&MlpSpec::where_head(), 42).unwrap();
        let back = Mlp::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_json(), m.to_json());
    }

    #[test]
    fn rejects_foreign_model_files() {
        let m = Mlp::init(&MlpSpec::select_head(), 1).unwrap();
        let bad = m.to_json().replace("tabqa-mlp", "other");
        assert!(matches!(Mlp::from_json(&bad), Err(NnError::Format(_))));
    }

    proptest! {
        #[test]
        fn softmax_normalized(xs in proptest::collection::vec(-50.0f64..50.0, 1..10)) {
            let p = softmax(&xs);
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!(p.iter().all(|v| *v >= 0.0 && *v <= 1.0));
        }

        #[test]
        fn forward_is_a_distribution(seed in any::<u64>(), xs in proptest::collection::vec(-3.0f64..3.0, 9)) {
            let m = Mlp::init(&MlpSpec::column_type_head(), seed).unwrap();
            let p = m.forward(&xs).unwrap();
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!(p.iter().all(|v| *v > 0.0 && *v < 1.0));
        }
    }
}
