//! Minibatch training with Adam, exponential learning-rate decay and
//! best-validation parameter snapshots.
//!
//! Everything here is deterministic for a fixed seed: shuffles come from
//! [`SplitMix64`], per-graph gradients are folded in dataset order no
//! matter how rayon schedules them, and weight updates never depend on
//! thread count. Two runs with the same configuration produce bit-equal
//! weights and loss curves; only the wall-clock column of the history
//! differs.

use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::autodiff::{AutodiffError, Tape, Tensor};
use crate::featurize::GraphBatch;
use crate::model::{model_forward, ModelError, ModelParams};
use crate::rng::SplitMix64;

/// Fraction of records per partition: train, validation, test.
pub const DEFAULT_SPLIT: (f64, f64, f64) = (0.72, 0.18, 0.10);

/// How many graphs each worker accumulates before results are folded
/// back in order. Purely a scheduling knob; it never changes the math.
const GRAD_CHUNK: usize = 8;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Autodiff(#[from] AutodiffError),
    #[error("the {name} partition is empty; adjust the split or add data")]
    EmptyPartition { name: &'static str },
    #[error("training loss became non-finite at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
    #[error("a weight update produced non-finite values; lower the learning rate")]
    NonFiniteUpdate,
    #[error("invalid training configuration: {what}")]
    InvalidConfig { what: &'static str },
}

/// Optimizer and loop hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub decay_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> TrainConfig {
        TrainConfig {
            epochs: 100,
            batch_size: 100,
            learning_rate: 1e-3,
            decay_rate: 0.95,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |what| Err(TrainError::InvalidConfig { what });
        if self.batch_size == 0 {
            return bad("batch size must be at least one");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning rate must be positive");
        }
        if !(self.decay_rate > 0.0 && self.decay_rate <= 1.0) {
            return bad("decay rate must lie in (0, 1]");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad("Adam betas must lie in [0, 1)");
        }
        if !(self.epsilon > 0.0) {
            return bad("Adam epsilon must be positive");
        }
        Ok(())
    }
}

/// Learning rate for an epoch under exponential decay.
pub fn lr_schedule(base: f64, decay: f64, epoch: usize) -> f64 {
    base * decay.powi(epoch as i32)
}

/// Shuffle records and cut them into train, validation and test parts.
/// Validation and test sizes round down; the remainder goes to train.
pub fn split_dataset<T>(
    mut records: Vec<T>,
    ratios: (f64, f64, f64),
    seed: u64,
) -> Result<(Vec<T>, Vec<T>, Vec<T>), TrainError> {
    let (r_train, r_val, r_test) = ratios;
    let nonnegative = r_train >= 0.0 && r_val >= 0.0 && r_test >= 0.0;
    if !nonnegative || (r_train + r_val + r_test - 1.0).abs() > 1e-9 {
        return Err(TrainError::InvalidConfig {
            what: "split ratios must be nonnegative and sum to one",
        });
    }
    let n = records.len();
    let n_val = (n as f64 * r_val).floor() as usize;
    let n_test = (n as f64 * r_test).floor() as usize;
    let n_train = n - n_val - n_test;
    // A zero ratio asks for an empty partition; a positive one that still
    // comes up empty means the dataset is too small to honor the split.
    for (size, ratio, name) in [
        (n_train, r_train, "train"),
        (n_val, r_val, "validation"),
        (n_test, r_test, "test"),
    ] {
        if size == 0 && ratio > 0.0 {
            return Err(TrainError::EmptyPartition { name });
        }
    }
    SplitMix64::new(seed).shuffle(&mut records);
    let mut rest = records.split_off(n_train);
    let test = rest.split_off(n_val);
    Ok((records, rest, test))
}

/// First and second gradient moments, one pair per parameter tensor.
pub struct AdamState {
    m: Vec<Tensor>,
    v: Vec<Tensor>,
    step: u64,
}

impl AdamState {
    pub fn new(shapes: &[(usize, usize)]) -> AdamState {
        let zeros: Vec<Tensor> = shapes.iter().map(|&(r, c)| Tensor::zeros(r, c)).collect();
        AdamState {
            m: zeros.clone(),
            v: zeros,
            step: 0,
        }
    }

    /// One bias-corrected update over every tensor. Snapshots holding an
    /// `Arc` to a tensor keep their copy; the update clones before it
    /// writes.
    pub fn apply(
        &mut self,
        tensors: Vec<&mut Arc<Tensor>>,
        grads: &[Tensor],
        lr: f64,
        config: &TrainConfig,
    ) -> Result<(), TrainError> {
        assert_eq!(tensors.len(), grads.len(), "one gradient per tensor");
        self.step += 1;
        let t = self.step as i32;
        let correction1 = 1.0 - config.beta1.powi(t);
        let correction2 = 1.0 - config.beta2.powi(t);
        for ((tensor, grad), (m, v)) in tensors
            .into_iter()
            .zip(grads)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            let values = Arc::make_mut(tensor).data_mut();
            for (((w, &g), m), v) in values
                .iter_mut()
                .zip(grad.data())
                .zip(m.data_mut().iter_mut())
                .zip(v.data_mut().iter_mut())
            {
                *m = config.beta1 * *m + (1.0 - config.beta1) * g;
                *v = config.beta2 * *v + (1.0 - config.beta2) * g * g;
                let m_hat = *m / correction1;
                let v_hat = *v / correction2;
                *w -= lr * m_hat / (v_hat.sqrt() + config.epsilon);
                if !w.is_finite() {
                    return Err(TrainError::NonFiniteUpdate);
                }
            }
        }
        Ok(())
    }
}

/// One epoch of the training record.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_mae: f64,
    pub seconds: f64,
}

/// Loss and validation curve of a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct History {
    pub epochs: Vec<EpochStats>,
}

impl History {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,train_loss,val_mae,seconds\n");
        for e in &self.epochs {
            out.push_str(&format!(
                "{},{},{},{}\n",
                e.epoch, e.train_loss, e.val_mae, e.seconds
            ));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_csv())
    }
}

/// Weights and record returned by [`train`].
pub struct TrainOutcome {
    /// Parameters from the epoch with the lowest validation MAE, or the
    /// initial parameters when no epoch ran.
    pub params: ModelParams,
    pub history: History,
}

/// Loss and parameter gradients for one graph, scaled so that summing
/// over a batch yields the batch-mean gradient directly.
fn graph_gradients(
    params: &ModelParams,
    x: &Tensor,
    a: &Tensor,
    target: f64,
    inv_batch: f64,
) -> Result<(f64, Vec<Tensor>), TrainError> {
    let mut tape = Tape::new();
    let fwd = model_forward(&mut tape, params, x, a)?;
    let t = tape.leaf(Tensor::filled(1, 1, target));
    let neg = tape.scale(t, -1.0)?;
    let diff = tape.add(fwd.prediction, neg)?;
    let sq = tape.hadamard(diff, diff)?;
    let loss = tape.scale(sq, inv_batch)?;
    tape.backward(loss)?;
    let value = tape.value(loss).scalar();
    let grads = fwd
        .param_ids
        .iter()
        .map(|&id| tape.take_grad(id).expect("parameters always carry gradients"))
        .collect();
    Ok((value, grads))
}

fn add_into(acc: &mut [Tensor], delta: &[Tensor]) {
    for (a, d) in acc.iter_mut().zip(delta) {
        for (x, &y) in a.data_mut().iter_mut().zip(d.data()) {
            *x += y;
        }
    }
}

/// Mean loss and summed gradients over one minibatch. Graphs are
/// processed in parallel chunks but folded in index order, so the result
/// does not depend on the thread pool.
fn batch_gradients(
    params: &ModelParams,
    set: &GraphBatch,
    indices: &[usize],
) -> Result<(f64, Vec<Tensor>), TrainError> {
    let inv = 1.0 / indices.len() as f64;
    let partials: Vec<(f64, Vec<Tensor>)> = indices
        .par_chunks(GRAD_CHUNK)
        .map(|chunk| {
            let mut loss = 0.0;
            let mut acc: Option<Vec<Tensor>> = None;
            for &i in chunk {
                let (x, a, target) = &set.graphs[i];
                let (l, g) = graph_gradients(params, x, a, *target, inv)?;
                loss += l;
                match &mut acc {
                    Some(acc) => add_into(acc, &g),
                    None => acc = Some(g),
                }
            }
            Ok((loss, acc.expect("chunks are never empty")))
        })
        .collect::<Result<_, TrainError>>()?;
    let mut iter = partials.into_iter();
    let (mut loss, mut grads) = iter.next().expect("batches are never empty");
    for (l, g) in iter {
        loss += l;
        add_into(&mut grads, &g);
    }
    Ok((loss, grads))
}

/// Prediction for a single featurized graph.
pub fn predict_one(params: &ModelParams, x: &Tensor, a: &Tensor) -> Result<f64, ModelError> {
    let mut tape = Tape::new();
    let fwd = model_forward(&mut tape, params, x, a)?;
    Ok(tape.value(fwd.prediction).scalar())
}

/// Predictions for every graph in the batch, in order.
pub fn predict_batch(params: &ModelParams, set: &GraphBatch) -> Result<Vec<f64>, ModelError> {
    set.graphs
        .par_iter()
        .map(|(x, a, _)| predict_one(params, x, a))
        .collect()
}

/// Mean absolute error and population standard deviation of the signed
/// errors over a batch.
pub fn evaluate(params: &ModelParams, set: &GraphBatch) -> Result<(f64, f64), ModelError> {
    let preds = predict_batch(params, set)?;
    let n = preds.len() as f64;
    let errors: Vec<f64> = preds
        .iter()
        .zip(&set.graphs)
        .map(|(p, (_, _, t))| p - t)
        .collect();
    let mae = errors.iter().map(|e| e.abs()).sum::<f64>() / n;
    let mean = errors.iter().sum::<f64>() / n;
    let var = errors.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / n;
    Ok((mae, var.sqrt()))
}

fn validation_mae(params: &ModelParams, set: &GraphBatch) -> Result<f64, ModelError> {
    let preds = predict_batch(params, set)?;
    let total: f64 = preds
        .iter()
        .zip(&set.graphs)
        .map(|(p, (_, _, t))| (p - t).abs())
        .sum();
    Ok(total / preds.len() as f64)
}

/// Run minibatch Adam over `train_set`, tracking `val_set` MAE after
/// every epoch and returning the weights that scored best on it.
pub fn train(
    config: &TrainConfig,
    params: ModelParams,
    train_set: &GraphBatch,
    val_set: &GraphBatch,
) -> Result<TrainOutcome, TrainError> {
    config.validate()?;
    if train_set.size() == 0 {
        return Err(TrainError::EmptyPartition { name: "train" });
    }
    if val_set.size() == 0 {
        return Err(TrainError::EmptyPartition { name: "validation" });
    }

    let mut params = params;
    let shapes = ModelParams::tensor_shapes(&params.config);
    let mut adam = AdamState::new(&shapes);
    let mut rng = SplitMix64::new(config.seed);
    let mut history = History::default();
    let mut best: Option<(f64, Vec<Arc<Tensor>>)> = None;

    let n = train_set.size();
    let mut order: Vec<usize> = (0..n).collect();
    for epoch in 0..config.epochs {
        let started = Instant::now();
        rng.shuffle(&mut order);
        let lr = lr_schedule(config.learning_rate, config.decay_rate, epoch);

        let mut weighted_loss = 0.0;
        for batch in order.chunks(config.batch_size) {
            let (batch_loss, grads) = batch_gradients(&params, train_set, batch)?;
            weighted_loss += batch_loss * batch.len() as f64;
            adam.apply(params.tensors_mut(), &grads, lr, config)?;
        }
        let train_loss = weighted_loss / n as f64;
        if !train_loss.is_finite() {
            return Err(TrainError::NonFiniteLoss { epoch });
        }

        let val_mae = validation_mae(&params, val_set)?;
        history.epochs.push(EpochStats {
            epoch,
            train_loss,
            val_mae,
            seconds: started.elapsed().as_secs_f64(),
        });
        if best.as_ref().is_none_or(|(b, _)| val_mae < *b) {
            let snapshot = params.tensors().into_iter().cloned().collect();
            best = Some((val_mae, snapshot));
        }
    }

    let params = match best {
        Some((_, snapshot)) => ModelParams::from_tensors(params.config.clone(), snapshot),
        None => params,
    };
    Ok(TrainOutcome { params, history })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::pseudo_property;
    use crate::featurize::batch;
    use crate::model::{ModelConfig, Variant};
    use crate::smiles::parse;

    fn tiny_batch(smiles: &[&str]) -> GraphBatch {
        let records: Vec<_> = smiles
            .iter()
            .map(|s| {
                let graph = parse(s).unwrap();
                let target = pseudo_property(&graph);
                (graph, target)
            })
            .collect();
        batch(&records)
    }

    fn tiny_params(variant: Variant, seed: u64) -> ModelParams {
        let config = ModelConfig {
            variant,
            hidden_dim: 6,
            readout_dim: 10,
            heads: 2,
            ..ModelConfig::default()
        };
        ModelParams::init(config, &mut SplitMix64::new(seed)).unwrap()
    }

    const SMILES: [&str; 12] = [
        "CCO", "CC(=O)O", "c1ccccc1", "CCN", "C1CC1", "CC(C)O", "C=CC=C", "CCCl", "c1ccncc1",
        "CC#N", "COC", "CCCC",
    ];

    #[test]
    fn split_sizes_round_down_with_remainder_to_train() {
        let records: Vec<u32> = (0..500).collect();
        let (train, val, test) = split_dataset(records, DEFAULT_SPLIT, 1).unwrap();
        assert_eq!((train.len(), val.len(), test.len()), (360, 90, 50));
    }

    #[test]
    fn split_partitions_the_input_deterministically() {
        let records: Vec<u32> = (0..101).collect();
        let first = split_dataset(records.clone(), DEFAULT_SPLIT, 9).unwrap();
        let second = split_dataset(records.clone(), DEFAULT_SPLIT, 9).unwrap();
        assert_eq!(first, second);

        let mut all: Vec<u32> = first
            .0
            .iter()
            .chain(first.1.iter())
            .chain(first.2.iter())
            .copied()
            .collect();
        all.sort_unstable();
        assert_eq!(all, records);
        assert_ne!(first.0[..3], records[..3], "records should be shuffled");
    }

    #[test]
    fn split_rejects_empty_partitions_and_bad_ratios() {
        let err = split_dataset((0..5).collect::<Vec<_>>(), (0.5, 0.2, 0.2), 3).unwrap_err();
        assert!(matches!(err, TrainError::InvalidConfig { .. }));

        let err = split_dataset((0..2).collect::<Vec<_>>(), DEFAULT_SPLIT, 3).unwrap_err();
        assert!(matches!(err, TrainError::EmptyPartition { name: "validation" }));
    }

    #[test]
    fn zero_ratios_yield_intentionally_empty_partitions() {
        let (train, val, test) =
            split_dataset((0..5).collect::<Vec<_>>(), (1.0, 0.0, 0.0), 3).unwrap();
        assert_eq!(train.len(), 5);
        assert!(val.is_empty());
        assert!(test.is_empty());

        let (train, val, test) =
            split_dataset((0..10).collect::<Vec<_>>(), (0.8, 0.2, 0.0), 3).unwrap();
        assert_eq!((train.len(), val.len(), test.len()), (8, 2, 0));
    }

    #[test]
    fn learning_rate_decays_exponentially() {
        assert_eq!(lr_schedule(1e-3, 0.95, 0), 1e-3);
        assert!((lr_schedule(1e-3, 0.95, 1) - 9.5e-4).abs() < 1e-18);
        assert!((lr_schedule(1e-3, 0.97, 2) - 1e-3 * 0.9409).abs() < 1e-12);
        for epoch in 1..10 {
            assert!(lr_schedule(1e-3, 0.9, epoch) < lr_schedule(1e-3, 0.9, epoch - 1));
        }
    }

    #[test]
    fn adam_ignores_zero_gradients() {
        let config = TrainConfig::default();
        let mut tensor = Arc::new(Tensor::from_vec(1, 3, vec![0.5, -0.25, 2.0]));
        let before = tensor.as_ref().clone();
        let mut adam = AdamState::new(&[(1, 3)]);
        adam.apply(
            vec![&mut tensor],
            &[Tensor::zeros(1, 3)],
            1e-3,
            &config,
        )
        .unwrap();
        for (a, b) in tensor.data().iter().zip(before.data()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn adam_first_step_has_learning_rate_magnitude() {
        let config = TrainConfig::default();
        let mut tensor = Arc::new(Tensor::filled(1, 1, 1.0));
        let mut adam = AdamState::new(&[(1, 1)]);
        adam.apply(vec![&mut tensor], &[Tensor::filled(1, 1, 3.0)], 1e-2, &config)
            .unwrap();
        // Bias correction makes the first step lr * g / (|g| + eps).
        let step = 1.0 - tensor.get(0, 0);
        assert!((step - 1e-2).abs() < 1e-8, "step was {step}");
    }

    #[test]
    fn adam_minimizes_a_quadratic() {
        let config = TrainConfig::default();
        let mut w = Arc::new(Tensor::filled(1, 1, 5.0));
        let mut adam = AdamState::new(&[(1, 1)]);
        for _ in 0..400 {
            let grad = 2.0 * (w.get(0, 0) - 3.0);
            adam.apply(
                vec![&mut w],
                &[Tensor::filled(1, 1, grad)],
                0.05,
                &config,
            )
            .unwrap();
        }
        assert!((w.get(0, 0) - 3.0).abs() < 1e-2, "ended at {}", w.get(0, 0));
    }

    #[test]
    fn zero_epochs_returns_the_initial_parameters() {
        let set = tiny_batch(&SMILES[..4]);
        let params = tiny_params(Variant::Gcn, 7);
        let before: Vec<Tensor> = params.tensors().iter().map(|t| t.as_ref().clone()).collect();
        let config = TrainConfig {
            epochs: 0,
            ..TrainConfig::default()
        };
        let outcome = train(&config, params, &set, &set).unwrap();
        assert!(outcome.history.epochs.is_empty());
        for (after, before) in outcome.params.tensors().iter().zip(&before) {
            assert_eq!(after.data(), before.data());
        }
    }

    #[test]
    fn training_is_bitwise_reproducible() {
        let set = tiny_batch(&SMILES);
        let val = tiny_batch(&SMILES[..4]);
        let config = TrainConfig {
            epochs: 4,
            batch_size: 5,
            learning_rate: 5e-3,
            seed: 21,
            ..TrainConfig::default()
        };
        let run = || {
            let params = tiny_params(Variant::GcnAttentionGate, 13);
            train(&config, params, &set, &val).unwrap()
        };
        let first = run();
        let second = run();
        // Wall-clock seconds differ between runs; every numeric output
        // must not.
        for (a, b) in first.history.epochs.iter().zip(&second.history.epochs) {
            assert_eq!(a.train_loss.to_bits(), b.train_loss.to_bits());
            assert_eq!(a.val_mae.to_bits(), b.val_mae.to_bits());
        }
        for (a, b) in first.params.tensors().iter().zip(second.params.tensors()) {
            for (x, y) in a.data().iter().zip(b.data()) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn training_reduces_loss_on_a_small_set() {
        let set = tiny_batch(&SMILES);
        let config = TrainConfig {
            epochs: 60,
            batch_size: 6,
            learning_rate: 1e-2,
            decay_rate: 1.0,
            seed: 3,
            ..TrainConfig::default()
        };
        let params = tiny_params(Variant::GcnAttentionGate, 5);
        let outcome = train(&config, params, &set, &set).unwrap();
        let first = outcome.history.epochs.first().unwrap().train_loss;
        let last = outcome.history.epochs.last().unwrap().train_loss;
        assert!(
            last < first * 0.25,
            "loss went from {first} to {last} without converging"
        );
    }

    #[test]
    fn best_validation_weights_are_returned() {
        let set = tiny_batch(&SMILES);
        let val = tiny_batch(&SMILES[6..]);
        let config = TrainConfig {
            epochs: 12,
            batch_size: 6,
            learning_rate: 1e-2,
            decay_rate: 1.0,
            seed: 2,
            ..TrainConfig::default()
        };
        let params = tiny_params(Variant::Gcn, 17);
        let outcome = train(&config, params, &set, &val).unwrap();
        let best_recorded = outcome
            .history
            .epochs
            .iter()
            .map(|e| e.val_mae)
            .fold(f64::INFINITY, f64::min);
        let (mae, _) = evaluate(&outcome.params, &val).unwrap();
        assert_eq!(mae.to_bits(), best_recorded.to_bits());
    }

    #[test]
    fn evaluate_reports_error_mean_and_spread() {
        let set = tiny_batch(&SMILES[..5]);
        let params = tiny_params(Variant::Gcn, 23);
        let preds = predict_batch(&params, &set).unwrap();

        let exact = GraphBatch {
            graphs: set
                .graphs
                .iter()
                .zip(&preds)
                .map(|((x, a, _), p)| (x.clone(), a.clone(), *p))
                .collect(),
        };
        let (mae, std) = evaluate(&params, &exact).unwrap();
        assert_eq!(mae, 0.0);
        assert_eq!(std, 0.0);

        let offset = GraphBatch {
            graphs: set
                .graphs
                .iter()
                .zip(&preds)
                .map(|((x, a, _), p)| (x.clone(), a.clone(), p + 1.0))
                .collect(),
        };
        let (mae, std) = evaluate(&params, &offset).unwrap();
        assert!((mae - 1.0).abs() < 1e-12);
        assert!(std.abs() < 1e-12);
    }

    #[test]
    fn history_serializes_to_csv() {
        let history = History {
            epochs: vec![
                EpochStats {
                    epoch: 0,
                    train_loss: 1.5,
                    val_mae: 0.75,
                    seconds: 0.25,
                },
                EpochStats {
                    epoch: 1,
                    train_loss: 0.5,
                    val_mae: 0.25,
                    seconds: 0.125,
                },
            ],
        };
        let csv = history.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("epoch,train_loss,val_mae,seconds"));
        assert_eq!(lines.next(), Some("0,1.5,0.75,0.25"));
        assert_eq!(lines.next(), Some("1,0.5,0.25,0.125"));
        assert_eq!(lines.next(), None);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("history.csv");
        history.write_csv(&path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), csv);
    }

    #[test]
    fn rejects_broken_configurations() {
        let set = tiny_batch(&SMILES[..4]);
        let params = tiny_params(Variant::Gcn, 1);
        let config = TrainConfig {
            batch_size: 0,
            ..TrainConfig::default()
        };
        assert!(matches!(
            train(&config, params, &set, &set),
            Err(TrainError::InvalidConfig { .. })
        ));

        let params = tiny_params(Variant::Gcn, 1);
        let empty = GraphBatch { graphs: Vec::new() };
        assert!(matches!(
            train(&TrainConfig::default(), params, &empty, &set),
            Err(TrainError::EmptyPartition { name: "train" })
        ));
    }
}
