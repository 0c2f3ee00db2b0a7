use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rfppg_core::linalg::Matrix;
use rfppg_core::regress::{mlp_train, TrainConfig};

fn identity_task() -> (Matrix, TrainConfig) {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let (d, h) = (32, 256);
    let x = Matrix::from_vec(500, d, (0..500 * d).map(|_| rng.sample(rand_distr::StandardNormal)).collect()).unwrap();
    let cfg = TrainConfig {
        dims: vec![d, h, h, h, d],
        epochs: 200,
        patience: None,
        val_fraction: 0.0,
        seed: 4,
        ..TrainConfig::default()
    };
    (x, cfg)
}

#[test]
fn identity_task_is_learned() {
    let (x, cfg) = identity_task();
    let (model, hist) = mlp_train(&x, &x, &cfg).unwrap();
    assert_eq!(hist.epochs.len(), 200);
    assert_eq!(model.dims(), cfg.dims);
    let last = hist.epochs.last().unwrap();
    println!("final/initial train MAE {:.4}", last.train_mae / hist.initial_train_mae);
    assert!(
        last.train_mae < 0.1 * hist.initial_train_mae,
        "final {} vs initial {}",
        last.train_mae,
        hist.initial_train_mae
    );
}

#[test]
fn objective_decreases_steadily() {
    let (x, cfg) = identity_task();
    let (_, hist) = mlp_train(&x, &x, &cfg).unwrap();
    for w in hist.epochs.windows(2) {
        assert!(w[1].objective <= 1.05 * w[0].objective, "uptick at epoch {}: {} -> {}", w[1].epoch, w[0].objective, w[1].objective);
    }
}

#[test]
fn training_is_reproducible() {
    let (x, mut cfg) = identity_task();
    cfg.epochs = 5;
    cfg.val_fraction = 0.2;
    cfg.patience = Some(2);
    let a = mlp_train(&x, &x, &cfg).unwrap();
    let b = mlp_train(&x, &x, &cfg).unwrap();
    assert_eq!(a, b);
    cfg.seed += 1;
    assert_ne!(mlp_train(&x, &x, &cfg).unwrap().0, a.0);
}
