//! Model files: `DDFMODEL` magic, a little-endian `u64` header length, a JSON
//! header, then every parameter as a little-endian `f64`.
//!
//! Parameter block order: standardizer means, standardizer scales, then the
//! model body (`W, b` for softmax regression; `W1, b1, W2, b2` for the MLP;
//! stored points row-major followed by labels for k-NN).

use super::{
    ClassifierError, ClassifierKind, ClassifierSpec, KnnModel, LinearModel, MlpModel, Model, ModelBody,
    Standardizer,
};
use ndarray::Array2;
use serde::{Deserialize, Serialize};
use std::path::Path;

const MAGIC: &[u8; 8] = b"DDFMODEL";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelHeader {
    pub format_version: u32,
    pub spec: ClassifierSpec,
    pub seed: u64,
    pub class_count: usize,
    pub input_dim: usize,
    /// Hidden width for the MLP, stored point count for k-NN, zero otherwise.
    pub inner_dim: usize,
    pub param_count: usize,
}

fn err(msg: impl Into<String>) -> ClassifierError {
    ClassifierError::Persist(msg.into())
}

pub fn to_bytes(model: &Model) -> Vec<u8> {
    let d = model.input_dim();
    let mut params: Vec<f64> = model.standardizer.params().collect();
    let inner_dim = match &model.body {
        ModelBody::Linear(m) => {
            params.extend(m.params());
            0
        }
        ModelBody::Mlp(m) => {
            params.extend(m.params());
            m.shape().1
        }
        ModelBody::Knn(m) => {
            params.extend(m.points.iter().copied());
            params.extend(m.labels.iter().map(|&l| l as f64));
            m.points.nrows()
        }
    };
    let header = ModelHeader {
        format_version: FORMAT_VERSION,
        spec: model.spec.clone(),
        seed: model.spec.seed,
        class_count: model.class_count,
        input_dim: d,
        inner_dim,
        param_count: params.len(),
    };
    let json = serde_json::to_vec(&header).expect("header serializes");
    let mut out = Vec::with_capacity(16 + json.len() + 8 * params.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    for p in params {
        out.extend_from_slice(&p.to_le_bytes());
    }
    out
}

pub fn read_header(bytes: &[u8]) -> Result<(ModelHeader, &[u8]), ClassifierError> {
    if bytes.len() < 16 || &bytes[..8] != MAGIC {
        return Err(err("not a model file"));
    }
    let len = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
    let body = bytes.get(16..16 + len).ok_or_else(|| err("truncated header"))?;
    let header: ModelHeader = serde_json::from_slice(body).map_err(|e| err(e.to_string()))?;
    if header.format_version != FORMAT_VERSION {
        return Err(err(format!("unsupported format version {}", header.format_version)));
    }
    Ok((header, &bytes[16 + len..]))
}

pub fn from_bytes(bytes: &[u8]) -> Result<Model, ClassifierError> {
    let (header, block) = read_header(bytes)?;
    if block.len() != 8 * header.param_count {
        return Err(err(format!(
            "expected {} parameters, found {} bytes",
            header.param_count,
            block.len()
        )));
    }
    let params: Vec<f64> = block
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    let d = header.input_dim;
    let n = header.class_count;
    let h = header.inner_dim;
    let expected = 2 * d
        + match header.spec.kind {
            ClassifierKind::SoftmaxRegression => d * n + n,
            ClassifierKind::Mlp => d * h + h + h * n + n,
            ClassifierKind::Knn => h * d + h,
        };
    if expected != params.len() {
        return Err(err(format!("header implies {expected} parameters, block has {}", params.len())));
    }
    let standardizer = Standardizer::from_params(d, &params);
    let rest = &params[2 * d..];
    let body = match header.spec.kind {
        ClassifierKind::SoftmaxRegression => ModelBody::Linear(LinearModel::from_params(d, n, rest)),
        ClassifierKind::Mlp => ModelBody::Mlp(MlpModel::from_params(d, h, n, rest)),
        ClassifierKind::Knn => {
            let points = Array2::from_shape_vec((h, d), rest[..h * d].to_vec()).map_err(|e| err(e.to_string()))?;
            let labels = rest[h * d..].iter().map(|&l| l as usize).collect();
            ModelBody::Knn(KnnModel::new(points, labels, header.spec.k_neighbors))
        }
    };
    Ok(Model {
        spec: header.spec,
        class_count: n,
        standardizer,
        body,
    })
}

pub fn save(model: &Model, path: &Path) -> Result<(), ClassifierError> {
    std::fs::write(path, to_bytes(model)).map_err(|e| err(format!("{}: {e}", path.display())))
}

pub fn load(path: &Path) -> Result<Model, ClassifierError> {
    let bytes = std::fs::read(path).map_err(|e| err(format!("{}: {e}", path.display())))?;
    from_bytes(&bytes)
}
