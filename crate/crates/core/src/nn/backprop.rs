use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{softmax, Mlp, MlpSpec, NnError, TrainConfig, BN_EPS, BN_MOMENTUM};

/// Per-layer cache from a training-mode forward pass over one batch.
struct LayerCache {
    input: Vec<Vec<f64>>,
    /// Batch-norm normalized pre-activations, when the layer has batch norm.
    xhat: Option<Vec<Vec<f64>>>,
    inv_std: Vec<f64>,
    batch_mean: Vec<f64>,
    batch_var: Vec<f64>,
    /// Post-BN, pre-ReLU values (hidden layers only).
    pre_relu: Vec<Vec<f64>>,
}

pub(super) struct BatchPass {
    caches: Vec<LayerCache>,
    pub(super) probs: Vec<Vec<f64>>,
    pub(super) loss: f64,
}

impl BatchPass {
    /// Which hidden units were active, for every example and layer.
    pub(super) fn relu_mask(&self) -> Vec<bool> {
        self.caches
            .iter()
            .flat_map(|c| c.pre_relu.iter().flatten().map(|v| *v > 0.0))
            .collect()
    }
}

/// Gradients in the same flattened order as [`Mlp::params`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients(pub Vec<f64>);

impl Mlp {
    /// Training-mode forward pass: batch norm uses batch statistics.
    pub(super) fn forward_batch(&self, xs: &[&[f64]], labels: &[usize]) -> BatchPass {
        let n = xs.len() as f64;
        let last = self.layers.len() - 1;
        let mut a: Vec<Vec<f64>> = xs.iter().map(|x| x.to_vec()).collect();
        let mut caches = Vec::with_capacity(self.layers.len());
        for (l, dense) in self.layers.iter().enumerate() {
            let mut z: Vec<Vec<f64>> = a.iter().map(|x| dense.apply(x)).collect();
            let mut cache = LayerCache {
                input: std::mem::take(&mut a),
                xhat: None,
                inv_std: Vec::new(),
                batch_mean: Vec::new(),
                batch_var: Vec::new(),
                pre_relu: Vec::new(),
            };
            if l < last {
                if let Some(bn) = &self.norms[l] {
                    let d = dense.out_dim;
                    let mean: Vec<f64> = (0..d)
                        .map(|j| z.iter().map(|r| r[j]).sum::<f64>() / n)
                        .collect();
                    let var: Vec<f64> = (0..d)
                        .map(|j| z.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n)
                        .collect();
                    let inv_std: Vec<f64> = var.iter().map(|v| 1.0 / (v + BN_EPS).sqrt()).collect();
                    let xhat: Vec<Vec<f64>> = z
                        .iter()
                        .map(|r| (0..d).map(|j| (r[j] - mean[j]) * inv_std[j]).collect())
                        .collect();
                    z = xhat
                        .iter()
                        .map(|r| (0..d).map(|j| bn.gamma[j] * r[j] + bn.beta[j]).collect())
                        .collect();
                    cache.xhat = Some(xhat);
                    cache.inv_std = inv_std;
                    cache.batch_mean = mean;
                    cache.batch_var = var;
                }
                cache.pre_relu = z.clone();
                z.iter_mut()
                    .for_each(|r| r.iter_mut().for_each(|v| *v = v.max(0.0)));
            }
            caches.push(cache);
            a = z;
        }
        let probs: Vec<Vec<f64>> = a.iter().map(|z| softmax(z)).collect();
        let loss = a
            .iter()
            .zip(labels)
            .map(|(z, &y)| {
                let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let lse = max + z.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
                lse - z[y]
            })
            .sum::<f64>()
            / n;
        BatchPass {
            caches,
            probs,
            loss,
        }
    }

    /// Mean cross-entropy over the batch, training-mode normalization.
    pub fn batch_loss(&self, data: &[(Vec<f64>, usize)]) -> f64 {
        let xs: Vec<&[f64]> = data.iter().map(|(x, _)| x.as_slice()).collect();
        let ys: Vec<usize> = data.iter().map(|(_, y)| *y).collect();
        self.forward_batch(&xs, &ys).loss
    }

    pub(super) fn backward(&self, pass: &BatchPass, labels: &[usize]) -> Gradients {
        let n = labels.len() as f64;
        let last = self.layers.len() - 1;
        // d loss / d logits
        let mut delta: Vec<Vec<f64>> = pass
            .probs
            .iter()
            .zip(labels)
            .map(|(p, &y)| {
                let mut d: Vec<f64> = p.iter().map(|v| v / n).collect();
                d[y] -= 1.0 / n;
                d
            })
            .collect();

        let mut per_layer: Vec<Vec<f64>> = vec![Vec::new(); self.layers.len()];
        for l in (0..self.layers.len()).rev() {
            let dense = &self.layers[l];
            let cache = &pass.caches[l];
            let mut bn_grads: Option<(Vec<f64>, Vec<f64>)> = None;
            if l < last {
                // through ReLU
                for (d, pre) in delta.iter_mut().zip(&cache.pre_relu) {
                    for (dv, pv) in d.iter_mut().zip(pre) {
                        if *pv <= 0.0 {
                            *dv = 0.0;
                        }
                    }
                }
                if let (Some(bn), Some(xhat)) = (&self.norms[l], &cache.xhat) {
                    let dim = dense.out_dim;
                    let mut dgamma = vec![0.0; dim];
                    let mut dbeta = vec![0.0; dim];
                    for (d, xh) in delta.iter().zip(xhat) {
                        for j in 0..dim {
                            dgamma[j] += d[j] * xh[j];
                            dbeta[j] += d[j];
                        }
                    }
                    // dz = inv_std / n * (n * dxhat - sum(dxhat) - xhat * sum(dxhat * xhat))
                    let mut sum_dxhat = vec![0.0; dim];
                    let mut sum_dxhat_xhat = vec![0.0; dim];
                    for (d, xh) in delta.iter().zip(xhat) {
                        for j in 0..dim {
                            let dx = d[j] * bn.gamma[j];
                            sum_dxhat[j] += dx;
                            sum_dxhat_xhat[j] += dx * xh[j];
                        }
                    }
                    for (d, xh) in delta.iter_mut().zip(xhat) {
                        for j in 0..dim {
                            let dx = d[j] * bn.gamma[j];
                            d[j] = cache.inv_std[j] / n
                                * (n * dx - sum_dxhat[j] - xh[j] * sum_dxhat_xhat[j]);
                        }
                    }
                    bn_grads = Some((dgamma, dbeta));
                }
            }
            let mut dw = vec![0.0; dense.in_dim * dense.out_dim];
            let mut db = vec![0.0; dense.out_dim];
            for (d, x) in delta.iter().zip(&cache.input) {
                for o in 0..dense.out_dim {
                    db[o] += d[o];
                    let row = &mut dw[o * dense.in_dim..(o + 1) * dense.in_dim];
                    for (g, xv) in row.iter_mut().zip(x) {
                        *g += d[o] * xv;
                    }
                }
            }
            let mut flat = dw;
            if !dense.bias.is_empty() {
                flat.extend(db);
            }
            if let Some((dg, dbeta)) = bn_grads {
                flat.extend(dg);
                flat.extend(dbeta);
            }
            per_layer[l] = flat;
            if l > 0 {
                delta = delta
                    .iter()
                    .map(|d| {
                        (0..dense.in_dim)
                            .map(|i| {
                                (0..dense.out_dim)
                                    .map(|o| d[o] * dense.weights[o * dense.in_dim + i])
                                    .sum()
                            })
                            .collect()
                    })
                    .collect();
            }
        }
        Gradients(per_layer.concat())
    }

    /// Analytic gradient of [`Mlp::batch_loss`] with respect to [`Mlp::params`].
    pub fn gradients(&self, data: &[(Vec<f64>, usize)]) -> Gradients {
        let xs: Vec<&[f64]> = data.iter().map(|(x, _)| x.as_slice()).collect();
        let ys: Vec<usize> = data.iter().map(|(_, y)| *y).collect();
        let pass = self.forward_batch(&xs, &ys);
        self.backward(&pass, &ys)
    }

    fn sgd_step(&mut self, xs: &[&[f64]], ys: &[usize], lr: f64) -> f64 {
        let pass = self.forward_batch(xs, ys);
        let grads = self.backward(&pass, ys);
        for (l, cache) in pass.caches.iter().enumerate() {
            if let Some(bn) = self.norms[l].as_mut() {
                if !cache.batch_mean.is_empty() {
                    for j in 0..bn.running_mean.len() {
                        bn.running_mean[j] = BN_MOMENTUM * bn.running_mean[j]
                            + (1.0 - BN_MOMENTUM) * cache.batch_mean[j];
                        bn.running_var[j] = BN_MOMENTUM * bn.running_var[j]
                            + (1.0 - BN_MOMENTUM) * cache.batch_var[j];
                    }
                }
            }
        }
        let params: Vec<f64> = self
            .params()
            .iter()
            .zip(&grads.0)
            .map(|(p, g)| p - lr * g)
            .collect();
        self.set_params(&params)
            .expect("gradient has parameter shape");
        pass.loss
    }
}

/// Minibatch SGD on cross-entropy. Initialization, shuffling and therefore
/// batch-norm statistics all derive from `cfg.seed`.
///
/// The loss history holds one entry per epoch: the mean of the minibatch
/// losses seen during that epoch.
pub fn train(
    spec: &MlpSpec,
    data: &[(Vec<f64>, usize)],
    cfg: &TrainConfig,
) -> Result<Mlp, NnError> {
    if data.is_empty() {
        return Err(NnError::EmptyData);
    }
    let classes = spec.output.classes();
    for (x, y) in data {
        if *y >= classes {
            return Err(NnError::LabelOutOfRange { label: *y, classes });
        }
        if x.len() != spec.input_dim {
            return Err(NnError::DimensionMismatch {
                expected: spec.input_dim,
                got: x.len(),
            });
        }
    }
    let mut model = Mlp::init(spec, cfg.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_5eed_5eed_5eed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let batch = cfg.batch_size.max(1);
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut chunks: Vec<&[usize]> = order.chunks(batch).collect();
        // A trailing single example would give degenerate batch statistics.
        if spec.use_batchnorm && chunks.len() > 1 && chunks[chunks.len() - 1].len() == 1 {
            chunks.truncate(chunks.len() - 2);
            chunks.push(&order[order.len() - batch - 1..]);
        }
        let mut total = 0.0;
        for chunk in &chunks {
            let xs: Vec<&[f64]> = chunk.iter().map(|&i| data[i].0.as_slice()).collect();
            let ys: Vec<usize> = chunk.iter().map(|&i| data[i].1).collect();
            total += model.sgd_step(&xs, &ys, cfg.learning_rate);
        }
        model.loss_history.push(total / chunks.len() as f64);
    }
    Ok(model)
}

/// Repeats every label-1 example `factor` times in total and reshuffles.
pub fn upsample_positives<T: Clone>(
    data: &[(T, usize)],
    factor: usize,
    seed: u64,
) -> Vec<(T, usize)> {
    let mut out = Vec::with_capacity(data.len());
    for item in data {
        let copies = if item.1 == 1 { factor } else { 1 };
        out.extend(std::iter::repeat_n(item.clone(), copies));
    }
    out.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    out
}
