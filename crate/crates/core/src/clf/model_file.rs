//! Binary model files, one per node.
//!
//! Layout (little-endian): magic `SCLFNODE`, `u32` version, `i64` scope
//! (-1 for the root, else the parent node id), `u8` mode (0 single, 1 multi),
//! `u32` class count, `u32` feature dimension, `u64` vocabulary hash, then
//! the row-major `f64` weights followed by the `f64` bias.

use std::io::{Read, Write};

use super::{ClfError, LinearNode, Scope};
use crate::taxonomy::Mode;

pub const MODEL_MAGIC: &[u8; 8] = b"SCLFNODE";
const VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 + 8 + 1 + 4 + 4 + 8;

pub fn write_model<W: Write>(out: &mut W, node: &LinearNode, vocab_hash: u64) -> Result<(), ClfError> {
    let scope: i64 = match node.scope {
        Scope::Root => -1,
        Scope::Node(id) => i64::from(id),
    };
    let mut buf = Vec::with_capacity(HEADER_LEN + 8 * (node.weights.len() + node.bias.len()));
    buf.extend_from_slice(MODEL_MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&scope.to_le_bytes());
    buf.push(match node.mode {
        Mode::Single => 0,
        Mode::Multi => 1,
    });
    buf.extend_from_slice(&(node.num_classes as u32).to_le_bytes());
    buf.extend_from_slice(&(node.feature_dim as u32).to_le_bytes());
    buf.extend_from_slice(&vocab_hash.to_le_bytes());
    for v in node.weights.iter().chain(&node.bias) {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

/// Read a model, rejecting it when it was trained against another vocabulary.
pub fn read_model<R: Read>(input: &mut R, expected_vocab_hash: u64) -> Result<LinearNode, ClfError> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    let bad = |msg: String| ClfError::ModelFile(msg);
    if bytes.len() < HEADER_LEN {
        return Err(bad(format!("{} bytes is shorter than the header", bytes.len())));
    }
    if &bytes[..8] != MODEL_MAGIC {
        return Err(bad("bad magic".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes"));
    let version = u32_at(8);
    if version != VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let scope = i64::from_le_bytes(bytes[12..20].try_into().expect("8 bytes"));
    let scope = match scope {
        -1 => Scope::Root,
        id => Scope::Node(u32::try_from(id).map_err(|_| bad(format!("bad scope {id}")))?),
    };
    let mode = match bytes[20] {
        0 => Mode::Single,
        1 => Mode::Multi,
        m => return Err(bad(format!("bad mode byte {m}"))),
    };
    let num_classes = u32_at(21) as usize;
    let feature_dim = u32_at(25) as usize;
    let found = u64::from_le_bytes(bytes[29..37].try_into().expect("8 bytes"));
    if found != expected_vocab_hash {
        return Err(ClfError::VocabHashMismatch { expected: expected_vocab_hash, found });
    }
    let n_weights = num_classes * feature_dim;
    let body = &bytes[HEADER_LEN..];
    if body.len() != 8 * (n_weights + num_classes) {
        return Err(bad(format!(
            "body has {} bytes, expected {} for {num_classes}x{feature_dim}",
            body.len(),
            8 * (n_weights + num_classes)
        )));
    }
    let mut values = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")));
    let weights: Vec<f64> = values.by_ref().take(n_weights).collect();
    let bias: Vec<f64> = values.collect();
    Ok(LinearNode { scope, mode, num_classes, feature_dim, weights, bias })
}
