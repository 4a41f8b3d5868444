//! Self-describing model checkpoint: magic + version header, a JSON block
//! with the feature spec and layer shapes, then every parameter as a
//! little-endian 64-bit float. Save and load round-trip bit-exactly.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::features::FeatureSpec;
use super::mlp::{DenseLayer, EmbeddingTable, MlpParams};
use super::{RewardModelError, TrainedModel};

const MAGIC: &[u8; 8] = b"CRECMLP\0";
const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    feature_spec: FeatureSpec,
    embedding_rows: Vec<usize>,
    embed_dim: usize,
    layer_dims: Vec<[usize; 2]>,
    dropout_rate: f64,
    categorical_offset: usize,
    encoded_dim: usize,
    param_count: usize,
}

impl TrainedModel {
    pub fn save<W: Write>(&self, mut writer: W) -> Result<(), RewardModelError> {
        let header = Header {
            feature_spec: self.feature_spec.clone(),
            embedding_rows: self.params.embeddings.iter().map(|e| e.rows).collect(),
            embed_dim: self.feature_spec.embed_dim,
            layer_dims: self.params.layers.iter().map(|l| [l.in_dim, l.out_dim]).collect(),
            dropout_rate: self.params.dropout_rate,
            categorical_offset: self.params.categorical_offset,
            encoded_dim: self.params.encoded_dim,
            param_count: self.params.param_count(),
        };
        let header_json = serde_json::to_vec(&header)
            .map_err(|e| RewardModelError::Checkpoint(format!("header encode: {e}")))?;
        writer.write_all(MAGIC)?;
        writer.write_all(&FORMAT_VERSION.to_le_bytes())?;
        writer.write_all(&(header_json.len() as u64).to_le_bytes())?;
        writer.write_all(&header_json)?;
        for table in &self.params.embeddings {
            for &p in &table.weights {
                writer.write_all(&p.to_le_bytes())?;
            }
        }
        for layer in &self.params.layers {
            for &p in &layer.weights {
                writer.write_all(&p.to_le_bytes())?;
            }
            for &p in &layer.biases {
                writer.write_all(&p.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn load<R: Read>(mut reader: R) -> Result<Self, RewardModelError> {
        let mut magic = [0u8; 8];
        reader.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(RewardModelError::Checkpoint("bad magic bytes".into()));
        }
        let mut version = [0u8; 4];
        reader.read_exact(&mut version)?;
        let version = u32::from_le_bytes(version);
        if version != FORMAT_VERSION {
            return Err(RewardModelError::Checkpoint(format!(
                "unsupported format version {version}"
            )));
        }
        let mut len = [0u8; 8];
        reader.read_exact(&mut len)?;
        let mut header_json = vec![0u8; u64::from_le_bytes(len) as usize];
        reader.read_exact(&mut header_json)?;
        let header: Header = serde_json::from_slice(&header_json)
            .map_err(|e| RewardModelError::Checkpoint(format!("header decode: {e}")))?;

        let mut read_f64 = |n: usize| -> Result<Vec<f64>, RewardModelError> {
            let mut buf = vec![0u8; n * 8];
            reader.read_exact(&mut buf)?;
            Ok(buf.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
        };
        let mut embeddings = Vec::with_capacity(header.embedding_rows.len());
        for &rows in &header.embedding_rows {
            embeddings.push(EmbeddingTable {
                rows,
                dim: header.embed_dim,
                weights: read_f64(rows * header.embed_dim)?,
            });
        }
        let mut layers = Vec::with_capacity(header.layer_dims.len());
        for &[in_dim, out_dim] in &header.layer_dims {
            let weights = read_f64(in_dim * out_dim)?;
            let biases = read_f64(out_dim)?;
            layers.push(DenseLayer { in_dim, out_dim, weights, biases });
        }
        let params = MlpParams {
            embeddings,
            layers,
            dropout_rate: header.dropout_rate,
            categorical_offset: header.categorical_offset,
            encoded_dim: header.encoded_dim,
        };
        if params.param_count() != header.param_count {
            return Err(RewardModelError::Checkpoint(format!(
                "parameter count {} does not match header {}",
                params.param_count(),
                header.param_count
            )));
        }
        Ok(TrainedModel { feature_spec: header.feature_spec, params })
    }

    pub fn save_to_path(&self, path: impl AsRef<Path>) -> Result<(), RewardModelError> {
        let file = std::fs::File::create(path)?;
        self.save(std::io::BufWriter::new(file))
    }

    pub fn load_from_path(path: impl AsRef<Path>) -> Result<Self, RewardModelError> {
        let file = std::fs::File::open(path)?;
        Self::load(std::io::BufReader::new(file))
    }
}
