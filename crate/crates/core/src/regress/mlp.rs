use alloc::vec;
use alloc::vec::Vec;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{gemm, Matrix};

pub const LEAKY_SLOPE: f64 = 0.01;
/// Layer widths of the default translator.
pub const DEFAULT_DIMS: [usize; 5] = [400, 512, 512, 512, 400];

/// One fully connected layer, `z = W h + b` with `W` of shape `out x in`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub w: Matrix,
    pub b: Vec<f64>,
}

impl Layer {
    fn zeros_like(&self) -> Self {
        Layer { w: Matrix::zeros(self.w.rows(), self.w.cols()), b: vec![0.0; self.b.len()] }
    }
}

/// Fully connected network; leaky ReLU after every layer but the last.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub layers: Vec<Layer>,
    pub leaky_slope: f64,
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.len() < 2 || dims.contains(&0) {
        return Err(Error::ShapeMismatch(alloc::format!("invalid layer chain {dims:?}")));
    }
    Ok(())
}

impl MlpModel {
    /// He-uniform weights, `U(-sqrt(6/fan_in), sqrt(6/fan_in))`, zero biases.
    pub fn he_uniform(dims: &[usize], leaky_slope: f64, seed: u64) -> Result<Self> {
        check_dims(dims)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = dims
            .windows(2)
            .map(|d| {
                let limit = libm::sqrt(6.0 / d[0] as f64);
                let w: Vec<f64> = (0..d[0] * d[1]).map(|_| rng.random_range(-limit..limit)).collect();
                Layer { w: Matrix::from_vec(d[1], d[0], w).expect("sized"), b: vec![0.0; d[1]] }
            })
            .collect();
        Ok(Self { layers, leaky_slope })
    }

    pub fn zeros(dims: &[usize], leaky_slope: f64) -> Result<Self> {
        check_dims(dims)?;
        let layers =
            dims.windows(2).map(|d| Layer { w: Matrix::zeros(d[1], d[0]), b: vec![0.0; d[1]] }).collect();
        Ok(Self { layers, leaky_slope })
    }

    /// Builds from explicit layers, checking that the chain connects.
    pub fn from_layers(layers: Vec<Layer>, leaky_slope: f64) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::ShapeMismatch("no layers".into()));
        }
        for (i, l) in layers.iter().enumerate() {
            if l.b.len() != l.w.rows() {
                return Err(Error::ShapeMismatch(alloc::format!("layer {} bias length", i + 1)));
            }
            if i > 0 && layers[i - 1].w.rows() != l.w.cols() {
                return Err(Error::ShapeMismatch(alloc::format!("layer {} input width", i + 1)));
            }
        }
        Ok(Self { layers, leaky_slope })
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut d = vec![self.layers[0].w.cols()];
        d.extend(self.layers.iter().map(|l| l.w.rows()));
        d
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].w.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].w.rows()
    }

    pub fn is_finite(&self) -> bool {
        self.layers.iter().all(|l| l.w.is_finite() && l.b.iter().all(|v| v.is_finite()))
    }

    /// Sum of squared weights (biases excluded).
    pub fn l2_penalty(&self) -> f64 {
        self.layers.iter().map(|l| l.w.frobenius_sq()).sum()
    }

    fn act(&self, z: f64) -> f64 {
        if z > 0.0 {
            z
        } else {
            self.leaky_slope * z
        }
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::ShapeMismatch(alloc::format!("input {} for width {}", x.len(), self.input_dim())));
        }
        let last = self.layers.len() - 1;
        let mut h = x.to_vec();
        for (i, l) in self.layers.iter().enumerate() {
            let mut z = l.b.clone();
            for (zj, row) in z.iter_mut().zip(l.w.data().chunks_exact(l.w.cols())) {
                *zj += row.iter().zip(&h).map(|(a, b)| a * b).sum::<f64>();
            }
            if i < last {
                z.iter_mut().for_each(|v| *v = self.act(*v));
            }
            h = z;
        }
        Ok(h)
    }

    /// Pre-activations of every layer for a batch (`n x d_in`); the final
    /// entry is the network output.
    fn forward_trace(&self, x: &Matrix) -> Result<Vec<Matrix>> {
        if x.cols() != self.input_dim() {
            return Err(Error::ShapeMismatch(alloc::format!("input {} for width {}", x.cols(), self.input_dim())));
        }
        let mut zs: Vec<Matrix> = Vec::with_capacity(self.layers.len());
        let mut h = x.clone();
        for (i, l) in self.layers.iter().enumerate() {
            let mut z = Matrix::zeros(x.rows(), l.w.rows());
            for r in 0..z.rows() {
                z.row_mut(r).copy_from_slice(&l.b);
            }
            gemm(1.0, &h, false, &l.w, true, 1.0, &mut z)?;
            if i + 1 < self.layers.len() {
                let mut a = z.clone();
                a.data_mut().iter_mut().for_each(|v| *v = self.act(*v));
                h = a;
            }
            zs.push(z);
        }
        Ok(zs)
    }

    pub fn forward_batch(&self, x: &Matrix) -> Result<Matrix> {
        Ok(self.forward_trace(x)?.pop().expect("at least one layer"))
    }

    /// Mean absolute error over all outputs plus `lambda * sum ||W||^2`,
    /// and its gradient. The subgradient of `|r|` at `r = 0` is 0.
    pub fn loss_and_grad(&self, x: &Matrix, y: &Matrix, lambda: f64) -> Result<(f64, Vec<Layer>)> {
        if y.rows() != x.rows() || y.cols() != self.output_dim() {
            return Err(Error::ShapeMismatch("targets do not match the batch".into()));
        }
        let zs = self.forward_trace(x)?;
        let out = &zs[zs.len() - 1];
        let count = (y.rows() * y.cols()) as f64;
        let mut mae = 0.0;
        let mut delta = Matrix::zeros(y.rows(), y.cols());
        for ((d, p), t) in delta.data_mut().iter_mut().zip(out.data()).zip(y.data()) {
            let r = p - t;
            mae += libm::fabs(r);
            *d = if r > 0.0 {
                1.0 / count
            } else if r < 0.0 {
                -1.0 / count
            } else {
                0.0
            };
        }
        let loss = mae / count + lambda * self.l2_penalty();

        let mut grads: Vec<Layer> = self.layers.iter().map(Layer::zeros_like).collect();
        for i in (0..self.layers.len()).rev() {
            let l = &self.layers[i];
            // delta holds dL/dz_i here
            let input = if i == 0 {
                x.clone()
            } else {
                let mut a = zs[i - 1].clone();
                a.data_mut().iter_mut().for_each(|v| *v = self.act(*v));
                a
            };
            let g = &mut grads[i];
            gemm(1.0, &delta, true, &input, false, 0.0, &mut g.w)?;
            for (gw, w) in g.w.data_mut().iter_mut().zip(l.w.data()) {
                *gw += 2.0 * lambda * w;
            }
            for r in 0..delta.rows() {
                for (gb, d) in g.b.iter_mut().zip(delta.row(r)) {
                    *gb += d;
                }
            }
            if i > 0 {
                let mut prev = Matrix::zeros(delta.rows(), l.w.cols());
                gemm(1.0, &delta, false, &l.w, false, 0.0, &mut prev)?;
                for (p, z) in prev.data_mut().iter_mut().zip(zs[i - 1].data()) {
                    if *z <= 0.0 {
                        *p *= self.leaky_slope;
                    }
                }
                delta = prev;
            }
        }
        Ok((loss, grads))
    }
}

/// Adam with bias correction.
#[derive(Debug, Clone)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: i32,
}

impl Adam {
    pub fn new(learning_rate: f64, beta1: f64, beta2: f64, eps: f64) -> Self {
        Self { learning_rate, beta1, beta2, eps, m: Vec::new(), v: Vec::new(), t: 0 }
    }

    /// Applies one step to each parameter slice given its gradient.
    pub fn step(&mut self, params: &mut [&mut [f64]], grads: &[&[f64]]) {
        if self.m.is_empty() {
            self.m = params.iter().map(|p| vec![0.0; p.len()]).collect();
            self.v = self.m.clone();
        }
        self.t += 1;
        let c1 = 1.0 - libm::pow(self.beta1, self.t as f64);
        let c2 = 1.0 - libm::pow(self.beta2, self.t as f64);
        for (k, (p, g)) in params.iter_mut().zip(grads).enumerate() {
            let (m, v) = (&mut self.m[k], &mut self.v[k]);
            for i in 0..p.len() {
                m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * g[i];
                v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * g[i] * g[i];
                let mh = m[i] / c1;
                let vh = v[i] / c2;
                p[i] -= self.learning_rate * mh / (libm::sqrt(vh) + self.eps);
            }
        }
    }

    fn step_model(&mut self, model: &mut MlpModel, grads: &[Layer]) {
        let mut params: Vec<&mut [f64]> = Vec::with_capacity(2 * model.layers.len());
        for l in &mut model.layers {
            params.push(l.w.data_mut());
            params.push(&mut l.b);
        }
        let g: Vec<&[f64]> = grads.iter().flat_map(|l| [l.w.data(), l.b.as_slice()]).collect();
        self.step(&mut params, &g);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Layer widths including input and output.
    pub dims: Vec<usize>,
    pub leaky_slope: f64,
    pub l2_lambda: f64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub batch_size: usize,
    pub epochs: usize,
    /// Stop after this many epochs without a better validation MAE and
    /// restore the best model; `None` trains all epochs.
    pub patience: Option<usize>,
    /// Fraction of the given pairs held out for validation.
    pub val_fraction: f64,
    /// Start the linear output layer at zero instead of He-uniform.
    ///
    /// With a random output layer, MAE under Adam cancels the initial output
    /// noise fastest by pushing every unit of the last hidden layer into the
    /// leaky region, and the network then sits at the all-zero prediction.
    pub zero_output_init: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            dims: DEFAULT_DIMS.to_vec(),
            leaky_slope: LEAKY_SLOPE,
            l2_lambda: 1e-6,
            learning_rate: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            batch_size: 32,
            epochs: 500,
            patience: Some(50),
            val_fraction: 0.15,
            zero_output_init: true,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        check_dims(&self.dims)?;
        let positive = [("learning_rate", self.learning_rate), ("eps", self.eps)];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidRange { name, value: v, range: "(0, inf)" });
            }
        }
        for (name, v) in [("beta1", self.beta1), ("beta2", self.beta2), ("val_fraction", self.val_fraction)] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::InvalidRange { name, value: v, range: "[0, 1)" });
            }
        }
        if !(self.l2_lambda >= 0.0) {
            return Err(Error::InvalidRange { name: "l2_lambda", value: self.l2_lambda, range: "[0, inf)" });
        }
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(Error::InvalidArgument("batch_size and epochs must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    /// MAE over the training rows after the epoch.
    pub train_mae: f64,
    /// MAE over the validation rows; NaN without a validation set.
    pub val_mae: f64,
    /// `train_mae + lambda * sum ||W||^2`.
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainHistory {
    pub epochs: Vec<EpochStats>,
    /// Epoch (1-based) whose parameters were returned.
    pub best_epoch: usize,
    /// MAE over the training rows before the first update.
    pub initial_train_mae: f64,
    pub initial_val_mae: f64,
}

fn gather(m: &Matrix, rows: &[usize]) -> Matrix {
    let mut out = Matrix::zeros(rows.len(), m.cols());
    for (i, &r) in rows.iter().enumerate() {
        out.row_mut(i).copy_from_slice(m.row(r));
    }
    out
}

fn batch_mae(model: &MlpModel, x: &Matrix, y: &Matrix) -> Result<f64> {
    if x.rows() == 0 {
        return Ok(f64::NAN);
    }
    let p = model.forward_batch(x)?;
    Ok(p.data().iter().zip(y.data()).map(|(a, b)| libm::fabs(a - b)).sum::<f64>() / p.data().len() as f64)
}

fn holdout(n: usize, fraction: f64, rng: &mut ChaCha8Rng) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let n_val = (libm::floor(n as f64 * fraction) as usize).min(n.saturating_sub(1));
    let (mut val, mut fit) = (order[..n_val].to_vec(), order[n_val..].to_vec());
    val.sort_unstable();
    fit.sort_unstable();
    (fit, val)
}

/// The `(fit, validation)` row split that [`mlp_train`] makes for `n`
/// rows under `cfg`, both ascending.
pub fn validation_split(n: usize, cfg: &TrainConfig) -> (Vec<usize>, Vec<usize>) {
    holdout(n, cfg.val_fraction, &mut ChaCha8Rng::seed_from_u64(cfg.seed))
}

/// Mini-batch Adam on MAE plus L2. Rows of `x` and `y` are samples. A
/// seeded `val_fraction` of the rows is held out for validation and early
/// stopping; batches are reshuffled each epoch from the same seed stream.
pub fn mlp_train(x: &Matrix, y: &Matrix, cfg: &TrainConfig) -> Result<(MlpModel, TrainHistory)> {
    cfg.validate()?;
    if x.rows() < 2 {
        return Err(Error::EmptyDataset);
    }
    if y.rows() != x.rows() {
        return Err(Error::ShapeMismatch(alloc::format!("{} inputs but {} targets", x.rows(), y.rows())));
    }
    let (d_in, d_out) = (cfg.dims[0], cfg.dims[cfg.dims.len() - 1]);
    if x.cols() != d_in || y.cols() != d_out {
        return Err(Error::ShapeMismatch(alloc::format!(
            "data {}->{} for network {}->{}",
            x.cols(),
            y.cols(),
            d_in,
            d_out
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (train_rows, val_rows) = holdout(x.rows(), cfg.val_fraction, &mut rng);
    let (xt, yt) = (gather(x, &train_rows), gather(y, &train_rows));
    let (xv, yv) = (gather(x, &val_rows), gather(y, &val_rows));

    let mut model = MlpModel::he_uniform(&cfg.dims, cfg.leaky_slope, rng.random())?;
    if cfg.zero_output_init {
        let out = model.layers.last_mut().expect("validated");
        out.w.data_mut().iter_mut().for_each(|w| *w = 0.0);
    }
    let mut adam = Adam::new(cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.eps);
    let mut history = TrainHistory {
        initial_train_mae: batch_mae(&model, &xt, &yt)?,
        initial_val_mae: batch_mae(&model, &xv, &yv)?,
        ..TrainHistory::default()
    };
    let mut best = (f64::INFINITY, model.clone(), 0usize);
    let mut idx: Vec<usize> = (0..xt.rows()).collect();
    for epoch in 1..=cfg.epochs {
        idx.shuffle(&mut rng);
        for chunk in idx.chunks(cfg.batch_size) {
            let (bx, by) = (gather(&xt, chunk), gather(&yt, chunk));
            let (loss, grads) = model.loss_and_grad(&bx, &by, cfg.l2_lambda)?;
            if !loss.is_finite() {
                return Err(Error::DivergedLoss { epoch });
            }
            adam.step_model(&mut model, &grads);
        }
        let train_mae = batch_mae(&model, &xt, &yt)?;
        let val_mae = batch_mae(&model, &xv, &yv)?;
        let objective = train_mae + cfg.l2_lambda * model.l2_penalty();
        if !objective.is_finite() || !model.is_finite() {
            return Err(Error::DivergedLoss { epoch });
        }
        history.epochs.push(EpochStats { epoch, train_mae, val_mae, objective });
        let score = if val_rows.is_empty() { train_mae } else { val_mae };
        if score < best.0 {
            best = (score, model.clone(), epoch);
        }
        if let Some(p) = cfg.patience {
            if epoch - best.2 >= p {
                break;
            }
        }
    }
    history.best_epoch = best.2;
    let model = if cfg.patience.is_some() { best.1 } else { model };
    if cfg.patience.is_none() {
        history.best_epoch = history.epochs.len();
    }
    Ok((model, history))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
        Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
    }

    #[test]
    fn validation_rows_are_disjoint() {
        let cfg = TrainConfig { val_fraction: 0.15, ..TrainConfig::default() };
        let (fit, val) = validation_split(40, &cfg);
        assert_eq!((fit.len(), val.len()), (34, 6));
        assert!(val.iter().all(|v| !fit.contains(v)));
        assert_eq!(validation_split(40, &TrainConfig { val_fraction: 0.0, ..cfg }).1, Vec::<usize>::new());
    }

    #[test]
    fn zero_network_outputs_last_bias() {
        let mut m = MlpModel::zeros(&[5, 4, 4, 4, 3], LEAKY_SLOPE).unwrap();
        m.layers[3].b = vec![1.0, -2.0, 0.5];
        assert_eq!(m.forward(&[3.0, 1.0, -1.0, 0.0, 7.0]).unwrap(), vec![1.0, -2.0, 0.5]);
    }

    #[test]
    fn identity_path_is_linear_for_positive_inputs() {
        let mut m = MlpModel::zeros(&[3, 3, 3, 3, 3], LEAKY_SLOPE).unwrap();
        for l in &mut m.layers {
            l.w = Matrix::identity(3);
        }
        let y = m.forward(&[0.5, 2.0, 1.0]).unwrap();
        assert_eq!(y, vec![0.5, 2.0, 1.0]);
        // a negative input goes through three leaky units
        let y = m.forward(&[-1.0, 0.0, 0.0]).unwrap();
        assert!((y[0] + 1e-6).abs() < 1e-18);
    }

    #[test]
    fn affine_in_the_positive_regime() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut m = MlpModel::he_uniform(&[6, 5, 5, 5, 4], LEAKY_SLOPE, 9).unwrap();
        // nonnegative weights and positive biases keep every pre-activation positive
        for l in &mut m.layers {
            l.w.data_mut().iter_mut().for_each(|v| *v = v.abs());
            l.b.iter_mut().for_each(|v| *v = 0.1);
        }
        let x1: Vec<f64> = (0..6).map(|_| rng.random_range(0.1..1.0)).collect();
        let x2: Vec<f64> = (0..6).map(|_| rng.random_range(0.1..1.0)).collect();
        let (f1, f2) = (m.forward(&x1).unwrap(), m.forward(&x2).unwrap());
        // composed linear map, computed independently of forward()
        let mut a = m.layers[0].w.clone();
        for l in &m.layers[1..] {
            a = l.w.matmul(&a).unwrap();
        }
        for k in 0..4 {
            let lin: f64 = (0..6).map(|j| a[(k, j)] * (x1[j] - x2[j])).sum();
            assert!((f1[k] - f2[k] - lin).abs() < 1e-6);
        }
    }

    #[test]
    fn single_input_monotone_through_positive_path() {
        let mut m = MlpModel::zeros(&[2, 2, 2, 2, 1], LEAKY_SLOPE).unwrap();
        for l in &mut m.layers[..3] {
            l.w[(0, 0)] = 1.0;
        }
        m.layers[3].w[(0, 0)] = 1.0;
        let lo = m.forward(&[0.2, 0.0]).unwrap()[0];
        let hi = m.forward(&[0.3, 0.0]).unwrap()[0];
        assert!(hi > lo);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = MlpModel::he_uniform(&[4, 3, 3, 3, 2], LEAKY_SLOPE, 5).unwrap();
        let x = random(3, 4, &mut rng);
        let y = random(3, 2, &mut rng);
        let lambda = 1e-3;
        let (_, grads) = m.loss_and_grad(&x, &y, lambda).unwrap();
        let loss = |m: &MlpModel| m.loss_and_grad(&x, &y, lambda).unwrap().0;
        let eps = 1e-5;
        let mut worst = 0.0f64;
        for li in 0..m.layers.len() {
            for k in 0..m.layers[li].w.data().len() + m.layers[li].b.len() {
                let mut plus = m.clone();
                let mut minus = m.clone();
                let nw = m.layers[li].w.data().len();
                let (p, q) = if k < nw {
                    (&mut plus.layers[li].w.data_mut()[k], &mut minus.layers[li].w.data_mut()[k])
                } else {
                    (&mut plus.layers[li].b[k - nw], &mut minus.layers[li].b[k - nw])
                };
                *p += eps;
                *q -= eps;
                let numeric = (loss(&plus) - loss(&minus)) / (2.0 * eps);
                let analytic = if k < nw { grads[li].w.data()[k] } else { grads[li].b[k - nw] };
                let scale = numeric.abs().max(analytic.abs()).max(1e-8);
                worst = worst.max((numeric - analytic).abs() / scale);
            }
        }
        assert!(worst < 1e-4, "max relative error {worst}");
    }

    #[test]
    fn adam_first_step_is_signed_learning_rate() {
        let mut adam = Adam::new(1e-4, 0.9, 0.999, 1e-8);
        let mut p = [1.0];
        adam.step(&mut [&mut p[..]], &[&[0.37]]);
        let expected = 1.0 - 1e-4 * 0.37 / (0.37 + 1e-8);
        assert!((p[0] - expected).abs() < 1e-15);
        assert!((p[0] - (1.0 - 1e-4)).abs() < 1e-10);
    }

    #[test]
    fn training_is_deterministic_and_rejects_bad_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random(40, 6, &mut rng);
        let cfg = TrainConfig { dims: vec![6, 8, 8, 8, 6], epochs: 5, batch_size: 8, seed: 3, ..TrainConfig::default() };
        let a = mlp_train(&x, &x, &cfg).unwrap();
        let b = mlp_train(&x, &x, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.1.epochs.len(), 5);
        assert_eq!(mlp_train(&random(1, 6, &mut rng), &random(1, 6, &mut rng), &cfg), Err(Error::EmptyDataset));
        let diverge = TrainConfig { learning_rate: 1e200, ..cfg };
        assert!(matches!(mlp_train(&x, &x, &diverge), Err(Error::DivergedLoss { .. })));
    }
}
