//! Network file: magic, version, a JSON header, then named tensor blocks.
//!
//! ```text
//! "VTXLSTM\0" | u32 version | u32 header_len | header JSON
//! u32 n_blocks | per block: u16 name_len, name, u8 dtype (1 = f64),
//!                           u8 ndim, u64 dims..., little-endian data
//! ```
//! The embedding is stored as the `embedding` block and its SHA-256 is
//! repeated in the header, so a tampered or swapped matrix is rejected.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{Architecture, LstmClassifier, LstmError, LstmNetwork, Params, TrainConfig, TrainHistory};
use crate::embed::EmbeddingMatrix;
use crate::hashing;
use crate::preprocess::Vocabulary;

const MAGIC: &[u8; 8] = b"VTXLSTM\0";
const VERSION: u32 = 1;
const DTYPE_F64: u8 = 1;
const EMBEDDING: &str = "embedding";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    tool_version: String,
    architecture: Architecture,
    embed_dim: usize,
    vocab_hash: String,
    embedding_sha256: String,
    vocabulary: Vocabulary,
    training: Option<TrainConfig>,
    history: Option<TrainHistory>,
    provenance: BTreeMap<String, String>,
}

pub(super) fn f64_bytes(values: &[f64]) -> Vec<u8> {
    let mut buf = Vec::with_capacity(values.len() * 8);
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    buf
}

fn write_block<W: Write>(w: &mut W, name: &str, shape: &[usize], data: &[f64]) -> std::io::Result<()> {
    w.write_all(&(name.len() as u16).to_le_bytes())?;
    w.write_all(name.as_bytes())?;
    w.write_all(&[DTYPE_F64, shape.len() as u8])?;
    for d in shape {
        w.write_all(&(*d as u64).to_le_bytes())?;
    }
    w.write_all(&f64_bytes(data))
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], LstmError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| LstmError::Format("truncated file".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, LstmError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, LstmError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, LstmError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, LstmError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn block(&mut self) -> Result<(String, Vec<usize>, Vec<f64>), LstmError> {
        let n = self.u16()? as usize;
        let name = String::from_utf8(self.take(n)?.to_vec())
            .map_err(|_| LstmError::Format("tensor name is not UTF-8".into()))?;
        if self.u8()? != DTYPE_F64 {
            return Err(LstmError::Format(format!("tensor {name}: unsupported dtype")));
        }
        let ndim = self.u8()? as usize;
        let mut shape = Vec::with_capacity(ndim);
        for _ in 0..ndim {
            shape.push(self.u64()? as usize);
        }
        let count = shape
            .iter()
            .try_fold(1usize, |a, &d| a.checked_mul(d))
            .and_then(|c| c.checked_mul(8))
            .ok_or_else(|| LstmError::Format(format!("tensor {name}: size overflow")))?;
        let data = self
            .take(count)?
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect::<Vec<_>>();
        if data.iter().any(|v| !v.is_finite()) {
            return Err(LstmError::Format(format!("tensor {name}: non-finite value")));
        }
        Ok((name, shape, data))
    }
}

impl LstmClassifier {
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<(), LstmError> {
        let net = &self.net;
        let header = Header {
            tool_version: crate::TOOL_VERSION.to_string(),
            architecture: *net.architecture(),
            embed_dim: net.embedding().dim(),
            vocab_hash: self.vocab.content_hash_hex(),
            embedding_sha256: net.embedding_hash(),
            vocabulary: self.vocab.clone(),
            training: self.training.clone(),
            history: self.history.clone(),
            provenance: self.provenance.clone(),
        };
        let json = serde_json::to_vec(&header).map_err(|e| LstmError::Format(e.to_string()))?;
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(json.len() as u32).to_le_bytes())?;
        w.write_all(&json)?;
        let tensors = net.params.tensors();
        w.write_all(&(tensors.len() as u32 + 1).to_le_bytes())?;
        let e = net.embedding();
        write_block(&mut w, EMBEDDING, &[e.n_rows(), e.dim()], e.as_slice())?;
        for (name, t) in tensors {
            write_block(&mut w, name, &t.shape, &t.data)?;
        }
        Ok(())
    }

    /// Read a classifier, checking the embedding hash, the vocabulary
    /// binding and every tensor shape.
    pub fn read_from<R: Read>(mut r: R) -> Result<Self, LstmError> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        let mut c = Cursor { bytes: &bytes, pos: 0 };
        if c.take(8)? != MAGIC {
            return Err(LstmError::Format("bad magic".into()));
        }
        let version = c.u32()?;
        if version != VERSION {
            return Err(LstmError::Format(format!("unsupported version {version}")));
        }
        let n = c.u32()? as usize;
        let header: Header =
            serde_json::from_slice(c.take(n)?).map_err(|e| LstmError::Format(e.to_string()))?;
        if header.vocabulary.content_hash_hex() != header.vocab_hash {
            return Err(LstmError::VocabularyMismatch);
        }
        let n_blocks = c.u32()? as usize;
        let mut blocks = BTreeMap::new();
        for _ in 0..n_blocks {
            let (name, shape, data) = c.block()?;
            if blocks.insert(name.clone(), (shape, data)).is_some() {
                return Err(LstmError::Format(format!("duplicate tensor {name}")));
            }
        }
        if c.pos != bytes.len() {
            return Err(LstmError::Format("trailing bytes".into()));
        }
        let (eshape, edata) = blocks
            .remove(EMBEDDING)
            .ok_or_else(|| LstmError::Format("missing embedding block".into()))?;
        if hashing::sha256_hex(&f64_bytes(&edata)) != header.embedding_sha256 {
            return Err(LstmError::Format("embedding hash mismatch".into()));
        }
        if eshape != [header.vocabulary.len() + 1, header.embed_dim] {
            return Err(LstmError::VocabularyMismatch);
        }
        let embedding = EmbeddingMatrix::from_rows(header.embed_dim, edata, &header.vocabulary)?;
        let mut params = Params::zeros(&header.architecture, header.embed_dim);
        let mut err = None;
        params.for_each_mut(|name, t| match blocks.remove(name) {
            Some((shape, data)) if shape == t.shape => t.data = data,
            Some((shape, _)) => {
                err.get_or_insert(format!("tensor {name} has shape {shape:?}, expected {:?}", t.shape));
            }
            None => {
                err.get_or_insert(format!("missing tensor {name}"));
            }
        });
        if let Some(e) = err {
            return Err(LstmError::Format(e));
        }
        if let Some(name) = blocks.keys().next() {
            return Err(LstmError::Format(format!("unknown tensor {name}")));
        }
        let net = LstmNetwork::from_parts(header.architecture, embedding, params)?;
        Ok(LstmClassifier {
            vocab: header.vocabulary,
            net,
            training: header.training,
            history: header.history,
            provenance: header.provenance,
        })
    }
}
