//! Python bindings: SMILES parsing, featurization, model training and
//! prediction, and the latent exports the analysis workflows consume.
//!
//! Build with `cargo build --release -p molgraf-py`; the resulting
//! `libmolgraf_py.so` imports as `molgraf_py` once renamed or symlinked
//! (see python/smoke_test.py, which does this automatically).

use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use molgraf::model::{ModelConfig, ModelParams, Variant};
use molgraf::{
    batch, extract_features, featurize, load_checkpoint, parse, predict_one, save_checkpoint,
    split_dataset, train, BondOrder, MolecularGraph, SplitMix64, TrainConfig,
};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn rows(t: &molgraf::Tensor) -> Vec<Vec<f64>> {
    (0..t.rows()).map(|i| t.row(i).to_vec()).collect()
}

/// A parsed molecule: atom list, bond list, and featurization.
#[pyclass(frozen)]
struct Molecule {
    inner: MolecularGraph,
    smiles: String,
}

#[pymethods]
impl Molecule {
    #[getter]
    fn smiles(&self) -> &str {
        &self.smiles
    }

    #[getter]
    fn atom_count(&self) -> usize {
        self.inner.atom_count()
    }

    /// Atoms as (symbol, aromatic, hydrogens, charge) in input order.
    fn atoms(&self) -> Vec<(String, bool, u8, i32)> {
        self.inner
            .atoms
            .iter()
            .map(|a| (a.element.symbol().to_string(), a.aromatic, a.hydrogens, a.charge))
            .collect()
    }

    /// Bonds as (atom, atom, order) with order one of "1", "2", "3", "ar".
    fn bonds(&self) -> Vec<(usize, usize, &'static str)> {
        self.inner
            .bonds
            .iter()
            .map(|b| {
                let order = match b.order {
                    BondOrder::Single => "1",
                    BondOrder::Double => "2",
                    BondOrder::Triple => "3",
                    BondOrder::Aromatic => "ar",
                };
                (b.a, b.b, order)
            })
            .collect()
    }

    /// Binary node features (n x 22) and self-looped adjacency (n x n).
    fn features(&self) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let (x, a) = featurize(&self.inner);
        (rows(&x), rows(&a))
    }

    fn __repr__(&self) -> String {
        format!(
            "Molecule({:?}, atoms={}, bonds={})",
            self.smiles,
            self.inner.atom_count(),
            self.inner.bonds.len()
        )
    }
}

/// Parse a SMILES string; raises ValueError on anything malformed.
#[pyfunction]
fn parse_smiles(smiles: &str) -> PyResult<Molecule> {
    let inner = parse(smiles).map_err(value_error)?;
    Ok(Molecule {
        inner,
        smiles: smiles.to_string(),
    })
}

/// Deterministic synthetic dataset of (smiles, target) rows.
#[pyfunction]
#[pyo3(signature = (count, seed = 0, max_atoms = 24))]
fn gen_dataset(count: usize, seed: u64, max_atoms: usize) -> Vec<(String, f64)> {
    molgraf::gen_dataset(count, seed, max_atoms)
}

/// A graph-convolutional property predictor.
#[pyclass]
struct Model {
    params: ModelParams,
}

#[pymethods]
impl Model {
    #[new]
    #[pyo3(signature = (
        variant = "gcn+attention+gate",
        layers = 3,
        heads = 4,
        attention_mode = "coupling",
        hidden_dim = 32,
        readout_dim = 512,
        seed = 0,
    ))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        variant: &str,
        layers: usize,
        heads: usize,
        attention_mode: &str,
        hidden_dim: usize,
        readout_dim: usize,
        seed: u64,
    ) -> PyResult<Model> {
        let config = ModelConfig {
            variant: variant.parse::<Variant>().map_err(value_error)?,
            layers,
            heads,
            attention_mode: attention_mode.parse().map_err(value_error)?,
            hidden_dim,
            readout_dim,
            ..ModelConfig::default()
        };
        let params =
            ModelParams::init(config, &mut SplitMix64::new(seed)).map_err(value_error)?;
        Ok(Model { params })
    }

    /// Load a checkpoint written by `save` or the command-line trainer.
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Model> {
        let params = load_checkpoint(&path).map_err(|e| PyIOError::new_err(e.to_string()))?;
        Ok(Model { params })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        save_checkpoint(&self.params, &path).map_err(|e| PyIOError::new_err(e.to_string()))
    }

    #[getter]
    fn variant(&self) -> String {
        self.params.config.variant.to_string()
    }

    #[getter]
    fn layers(&self) -> usize {
        self.params.config.layers
    }

    fn predict(&self, smiles: &str) -> PyResult<f64> {
        let graph = parse(smiles).map_err(value_error)?;
        let (x, a) = featurize(&graph);
        predict_one(&self.params, &x, &a).map_err(value_error)
    }

    fn predict_many(&self, smiles: Vec<String>) -> PyResult<Vec<f64>> {
        smiles.iter().map(|s| self.predict(s)).collect()
    }

    /// Train on (smiles, target) rows, holding out `val_fraction` for the
    /// best-checkpoint selection. Returns per-epoch history rows as
    /// (epoch, train_loss, val_mae, seconds) and leaves the model at the
    /// best-validation parameters.
    #[pyo3(signature = (
        records,
        epochs = 100,
        batch_size = 16,
        learning_rate = 1e-3,
        decay_rate = 0.95,
        seed = 0,
        val_fraction = 0.2,
    ))]
    #[allow(clippy::too_many_arguments)]
    fn train(
        &mut self,
        records: Vec<(String, f64)>,
        epochs: usize,
        batch_size: usize,
        learning_rate: f64,
        decay_rate: f64,
        seed: u64,
        val_fraction: f64,
    ) -> PyResult<Vec<(usize, f64, f64, f64)>> {
        if !(0.0..1.0).contains(&val_fraction) {
            return Err(PyValueError::new_err(format!(
                "val_fraction must be in [0, 1), got {val_fraction}"
            )));
        }
        let parsed: Vec<(MolecularGraph, f64)> = records
            .iter()
            .map(|(s, t)| Ok((parse(s).map_err(value_error)?, *t)))
            .collect::<PyResult<_>>()?;
        let (train_rows, val_rows, _) =
            split_dataset(parsed, (1.0 - val_fraction, val_fraction, 0.0), seed)
                .map_err(value_error)?;
        // With no holdout, validate on the training rows so best-checkpoint
        // selection still has a signal.
        let train_set = batch(&train_rows);
        let val_set = if val_rows.is_empty() {
            batch(&train_rows)
        } else {
            batch(&val_rows)
        };

        let config = TrainConfig {
            epochs,
            batch_size,
            learning_rate,
            decay_rate,
            seed,
            ..TrainConfig::default()
        };
        let outcome = train(&config, self.params.clone(), &train_set, &val_set)
            .map_err(value_error)?;
        self.params = outcome.params;
        Ok(outcome
            .history
            .epochs
            .iter()
            .map(|e| (e.epoch, e.train_loss, e.val_mae, e.seconds))
            .collect())
    }

    /// Final per-atom states (n x hidden), the inputs to atom clustering.
    fn atom_latents(&self, smiles: &str) -> PyResult<Vec<Vec<f64>>> {
        let graph = parse(smiles).map_err(value_error)?;
        let (x, a) = featurize(&graph);
        let features = extract_features(&self.params, &x, &a).map_err(value_error)?;
        Ok(rows(&features.node_states))
    }

    /// The sorted-sum graph embedding the predictor head consumes.
    fn graph_latent(&self, smiles: &str) -> PyResult<Vec<f64>> {
        let graph = parse(smiles).map_err(value_error)?;
        let (x, a) = featurize(&graph);
        let features = extract_features(&self.params, &x, &a).map_err(value_error)?;
        Ok(features.graph_latent)
    }

    fn __repr__(&self) -> String {
        format!(
            "Model(variant={:?}, layers={}, heads={})",
            self.params.config.variant.to_string(),
            self.params.config.layers,
            self.params.config.heads
        )
    }
}

#[pymodule]
fn molgraf_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Molecule>()?;
    m.add_class::<Model>()?;
    m.add_function(wrap_pyfunction!(parse_smiles, m)?)?;
    m.add_function(wrap_pyfunction!(gen_dataset, m)?)?;
    Ok(())
}
