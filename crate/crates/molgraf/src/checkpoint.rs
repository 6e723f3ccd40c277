//! Versioned model checkpoint files.
//!
//! Layout: the magic line `MGRAF1`, a text header of `key=value` lines
//! closed by `end`, then every parameter tensor's entries as little-endian
//! 64-bit reals, concatenated in [`ModelParams::tensors`] order. Tensor
//! shapes are implied by the header's configuration. Saving a loaded model
//! reproduces the original file byte for byte.

use std::fs;
use std::io;
use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

use crate::autodiff::Tensor;
use crate::model::{AttentionMode, CombineMode, ModelConfig, ModelParams, Variant};

const MAGIC: &str = "MGRAF1";

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("not a checkpoint: missing {MAGIC} magic")]
    BadMagic,
    #[error("checkpoint header line {line:?} is not key=value")]
    BadHeaderLine { line: String },
    #[error("checkpoint header missing field {field}")]
    MissingField { field: &'static str },
    #[error("checkpoint field {field} has invalid value {value:?}")]
    BadField { field: &'static str, value: String },
    #[error("checkpoint header never terminated with \"end\"")]
    UnterminatedHeader,
    #[error("checkpoint declares {declared} tensors but the configuration needs {expected}")]
    TensorCountMismatch { declared: usize, expected: usize },
    #[error("checkpoint payload holds {found} values, expected {expected}")]
    WrongPayloadSize { expected: usize, found: usize },
}

fn header_text(params: &ModelParams) -> String {
    let config = &params.config;
    let override_text = match config.combine_override {
        Some(mode) => mode.name().to_string(),
        None => "-".to_string(),
    };
    format!(
        "{MAGIC}\nvariant={}\nlayers={}\nheads={}\nattention_mode={}\n\
         combine_override={}\nhidden_dim={}\nreadout_dim={}\ntensors={}\nend\n",
        config.variant,
        config.layers,
        config.heads,
        config.attention_mode,
        override_text,
        config.hidden_dim,
        config.readout_dim,
        params.tensors().len(),
    )
}

/// Serialize parameters to `path`.
pub fn save_checkpoint(params: &ModelParams, path: &Path) -> Result<(), CheckpointError> {
    let mut bytes = header_text(params).into_bytes();
    for tensor in params.tensors() {
        for &v in tensor.data() {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    fs::write(path, bytes).map_err(|source| CheckpointError::Io {
        path: path.display().to_string(),
        source,
    })
}

struct HeaderFields<'a> {
    pairs: Vec<(&'a str, &'a str)>,
}

impl<'a> HeaderFields<'a> {
    fn get(&self, field: &'static str) -> Result<&'a str, CheckpointError> {
        self.pairs
            .iter()
            .find(|(k, _)| *k == field)
            .map(|(_, v)| *v)
            .ok_or(CheckpointError::MissingField { field })
    }

    fn parse<T: std::str::FromStr>(&self, field: &'static str) -> Result<T, CheckpointError> {
        let value = self.get(field)?;
        value.parse().map_err(|_| CheckpointError::BadField {
            field,
            value: value.to_string(),
        })
    }
}

/// Restore parameters from `path`.
pub fn load_checkpoint(path: &Path) -> Result<ModelParams, CheckpointError> {
    let bytes = fs::read(path).map_err(|source| CheckpointError::Io {
        path: path.display().to_string(),
        source,
    })?;

    let magic_line = MAGIC.len() + 1;
    if bytes.len() < magic_line || &bytes[..magic_line] != format!("{MAGIC}\n").as_bytes() {
        return Err(CheckpointError::BadMagic);
    }

    // Walk header lines until "end"; everything after is the payload.
    let mut pos = magic_line;
    let mut pairs = Vec::new();
    let payload_start = loop {
        let rest = &bytes[pos..];
        let newline = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or(CheckpointError::UnterminatedHeader)?;
        let line = std::str::from_utf8(&rest[..newline])
            .map_err(|_| CheckpointError::UnterminatedHeader)?;
        pos += newline + 1;
        if line == "end" {
            break pos;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CheckpointError::BadHeaderLine {
                line: line.to_string(),
            }
        })?;
        pairs.push((key, value));
    };
    let fields = HeaderFields { pairs };

    let combine_override = match fields.get("combine_override")? {
        "-" => None,
        text => Some(
            text.parse::<CombineMode>()
                .map_err(|_| CheckpointError::BadField {
                    field: "combine_override",
                    value: text.to_string(),
                })?,
        ),
    };
    let config = ModelConfig {
        variant: fields.parse::<Variant>("variant")?,
        layers: fields.parse("layers")?,
        heads: fields.parse("heads")?,
        attention_mode: fields.parse::<AttentionMode>("attention_mode")?,
        combine_override,
        hidden_dim: fields.parse("hidden_dim")?,
        readout_dim: fields.parse("readout_dim")?,
    };

    let shapes = ModelParams::tensor_shapes(&config);
    let declared: usize = fields.parse("tensors")?;
    if declared != shapes.len() {
        return Err(CheckpointError::TensorCountMismatch {
            declared,
            expected: shapes.len(),
        });
    }

    let payload = &bytes[payload_start..];
    let expected: usize = shapes.iter().map(|(r, c)| r * c).sum();
    if payload.len() != expected * 8 {
        return Err(CheckpointError::WrongPayloadSize {
            expected,
            found: payload.len() / 8,
        });
    }

    let mut offset = 0;
    let mut tensors = Vec::with_capacity(shapes.len());
    for (rows, cols) in shapes {
        let len = rows * cols;
        let mut data = Vec::with_capacity(len);
        for i in 0..len {
            let start = (offset + i) * 8;
            let raw: [u8; 8] = payload[start..start + 8].try_into().unwrap();
            data.push(f64::from_le_bytes(raw));
        }
        offset += len;
        tensors.push(Arc::new(Tensor::from_vec(rows, cols, data)));
    }

    Ok(ModelParams::from_tensors(config, tensors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::featurize::featurize;
    use crate::model::model_forward;
    use crate::rng::SplitMix64;
    use crate::smiles::parse;
    use crate::autodiff::Tape;

    fn small_params(variant: Variant) -> ModelParams {
        let config = ModelConfig {
            variant,
            layers: 2,
            heads: 3,
            hidden_dim: 6,
            readout_dim: 10,
            ..ModelConfig::default()
        };
        ModelParams::init(config, &mut SplitMix64::new(99)).unwrap()
    }

    #[test]
    fn save_load_save_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        for variant in Variant::ALL {
            let params = small_params(variant);
            let first = dir.path().join(format!("{variant}.ckpt"));
            let second = dir.path().join(format!("{variant}-again.ckpt"));
            save_checkpoint(&params, &first).unwrap();
            let loaded = load_checkpoint(&first).unwrap();
            save_checkpoint(&loaded, &second).unwrap();
            let a = std::fs::read(&first).unwrap();
            let b = std::fs::read(&second).unwrap();
            assert_eq!(a, b, "{variant} round trip drifted");
        }
    }

    #[test]
    fn loaded_model_predicts_identically_to_the_saved_one() {
        let dir = tempfile::tempdir().unwrap();
        let params = small_params(Variant::GcnAttentionGate);
        let path = dir.path().join("model.ckpt");
        save_checkpoint(&params, &path).unwrap();
        let loaded = load_checkpoint(&path).unwrap();

        let graph = parse("CC(=O)Oc1ccccc1").unwrap();
        let (x, a) = featurize(&graph);
        let mut t1 = Tape::new();
        let y1 = model_forward(&mut t1, &params, &x, &a).unwrap().prediction;
        let mut t2 = Tape::new();
        let y2 = model_forward(&mut t2, &loaded, &x, &a).unwrap().prediction;
        assert_eq!(
            t1.value(y1).scalar().to_bits(),
            t2.value(y2).scalar().to_bits()
        );
    }

    #[test]
    fn config_fields_survive_the_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = ModelConfig::with_variant(Variant::GcnAttention);
        config.attention_mode = AttentionMode::SoftmaxConcat;
        config.combine_override = Some(CombineMode::None);
        config.hidden_dim = 5;
        config.readout_dim = 7;
        config.layers = 4;
        let params = ModelParams::init(config.clone(), &mut SplitMix64::new(7)).unwrap();
        let path = dir.path().join("cfg.ckpt");
        save_checkpoint(&params, &path).unwrap();
        let loaded = load_checkpoint(&path).unwrap();
        assert_eq!(loaded.config, config);
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.ckpt");

        std::fs::write(&path, b"NOTMAGIC\n").unwrap();
        assert!(matches!(
            load_checkpoint(&path),
            Err(CheckpointError::BadMagic)
        ));

        std::fs::write(&path, b"MGRAF1\nvariant=gcn\n").unwrap();
        assert!(matches!(
            load_checkpoint(&path),
            Err(CheckpointError::UnterminatedHeader)
        ));

        std::fs::write(&path, b"MGRAF1\nnonsense\nend\n").unwrap();
        assert!(matches!(
            load_checkpoint(&path),
            Err(CheckpointError::BadHeaderLine { .. })
        ));

        // Valid header, truncated payload.
        let params = small_params(Variant::Gcn);
        save_checkpoint(&params, &path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes.truncate(bytes.len() - 8);
        std::fs::write(&path, bytes).unwrap();
        assert!(matches!(
            load_checkpoint(&path),
            Err(CheckpointError::WrongPayloadSize { .. })
        ));
    }

    #[test]
    fn missing_fields_are_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("partial.ckpt");
        std::fs::write(&path, b"MGRAF1\nvariant=gcn\nend\n").unwrap();
        assert!(matches!(
            load_checkpoint(&path),
            Err(CheckpointError::MissingField { .. })
        ));
    }
}
