//! Binary model files.
//!
//! All integers and floats little-endian:
//!
//! | bytes | field |
//! |-------|-------|
//! | 5     | magic `MHCMP` |
//! | 1     | format version |
//! | 4     | dim (u32) |
//! | 8     | bias (f64) |
//! | 8     | learning rate (f64) |
//! | 4     | epochs (u32) |
//! | 8     | l2 (f64) |
//! | 8     | seed (u64) |
//! | 1     | criterion (0 size, 1 position, 2 combined) |
//! | 4 + n | outlet id length (u32) and UTF-8 bytes |
//! | 4     | count of stored weights (u32) |
//! | 12 each | (index u32, weight f64), strictly increasing indices |
//! | 8     | FNV-1a 64 checksum of everything before it |
//!
//! Weights whose bit pattern is all zero are omitted.

use std::path::Path;

use thiserror::Error;

use super::features::fnv1a;
use super::{ComparatorModel, Hyper};
use crate::pairs::Criterion;

pub const MAGIC: &[u8; 5] = b"MHCMP";
pub const FORMAT_VERSION: u8 = 1;

#[derive(Debug, Error)]
pub enum ModelIoError {
    #[error("not a model file (bad magic)")]
    BadMagic,
    #[error("model format version {found}, expected {expected}")]
    VersionMismatch { found: u8, expected: u8 },
    #[error("corrupt model file: {0}")]
    CorruptModel(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub fn model_to_bytes(model: &ComparatorModel) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.push(FORMAT_VERSION);
    out.extend_from_slice(&(model.dim as u32).to_le_bytes());
    out.extend_from_slice(&model.bias.to_le_bytes());
    out.extend_from_slice(&model.hyper.learning_rate.to_le_bytes());
    out.extend_from_slice(&model.hyper.epochs.to_le_bytes());
    out.extend_from_slice(&model.hyper.l2.to_le_bytes());
    out.extend_from_slice(&model.hyper.seed.to_le_bytes());
    out.push(model.criterion.code());
    out.extend_from_slice(&(model.outlet_id.len() as u32).to_le_bytes());
    out.extend_from_slice(model.outlet_id.as_bytes());
    let stored: Vec<(u32, f64)> = model
        .weights
        .iter()
        .enumerate()
        .filter(|(_, w)| w.to_bits() != 0)
        .map(|(i, w)| (i as u32, *w))
        .collect();
    out.extend_from_slice(&(stored.len() as u32).to_le_bytes());
    for (i, w) in stored {
        out.extend_from_slice(&i.to_le_bytes());
        out.extend_from_slice(&w.to_le_bytes());
    }
    let checksum = fnv1a(&[&out]);
    out.extend_from_slice(&checksum.to_le_bytes());
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8], ModelIoError> {
        if self.buf.len() - self.pos < n {
            return Err(ModelIoError::CorruptModel(format!("truncated while reading {what}")));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self, what: &str) -> Result<u8, ModelIoError> {
        Ok(self.take(1, what)?[0])
    }

    fn u32(&mut self, what: &str) -> Result<u32, ModelIoError> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64, ModelIoError> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn f64(&mut self, what: &str) -> Result<f64, ModelIoError> {
        Ok(f64::from_bits(self.u64(what)?))
    }
}

pub fn model_from_bytes(bytes: &[u8]) -> Result<ComparatorModel, ModelIoError> {
    if bytes.len() < MAGIC.len() {
        return Err(if MAGIC.starts_with(bytes) {
            ModelIoError::CorruptModel("truncated magic".into())
        } else {
            ModelIoError::BadMagic
        });
    }
    if &bytes[..MAGIC.len()] != MAGIC {
        return Err(ModelIoError::BadMagic);
    }
    let mut r = Reader {
        buf: bytes,
        pos: MAGIC.len(),
    };
    let version = r.u8("version")?;
    if version != FORMAT_VERSION {
        return Err(ModelIoError::VersionMismatch {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    if bytes.len() < r.pos + 8 {
        return Err(ModelIoError::CorruptModel("truncated header".into()));
    }
    let body_end = bytes.len() - 8;
    let stored_sum = u64::from_le_bytes(bytes[body_end..].try_into().unwrap());
    if fnv1a(&[&bytes[..body_end]]) != stored_sum {
        return Err(ModelIoError::CorruptModel("checksum mismatch (truncated or altered)".into()));
    }
    let mut r = Reader {
        buf: &bytes[..body_end],
        pos: r.pos,
    };
    let corrupt = |m: &str| ModelIoError::CorruptModel(m.to_string());

    let dim = r.u32("dim")? as usize;
    if !dim.is_power_of_two() || dim < 4 {
        return Err(corrupt("dim is not a power of two >= 4"));
    }
    let bias = r.f64("bias")?;
    let hyper = Hyper {
        learning_rate: r.f64("learning rate")?,
        epochs: r.u32("epochs")?,
        l2: r.f64("l2")?,
        seed: r.u64("seed")?,
    };
    let criterion = Criterion::from_code(r.u8("criterion")?).ok_or_else(|| corrupt("unknown criterion code"))?;
    let outlet_len = r.u32("outlet length")? as usize;
    let outlet_id = std::str::from_utf8(r.take(outlet_len, "outlet id")?)
        .map_err(|_| corrupt("outlet id is not UTF-8"))?
        .to_string();
    let count = r.u32("weight count")? as usize;
    if count > dim {
        return Err(corrupt("more stored weights than dimensions"));
    }
    let mut weights = vec![0.0; dim];
    let mut last: Option<u32> = None;
    for _ in 0..count {
        let i = r.u32("weight index")?;
        let w = r.f64("weight")?;
        if i as usize >= dim || last.is_some_and(|l| i <= l) {
            return Err(corrupt("weight indices out of range or not increasing"));
        }
        weights[i as usize] = w;
        last = Some(i);
    }
    if r.pos != r.buf.len() {
        return Err(corrupt("trailing bytes after weights"));
    }
    Ok(ComparatorModel {
        weights,
        bias,
        dim,
        criterion,
        outlet_id,
        hyper,
        version,
    })
}

pub fn save_model(model: &ComparatorModel, path: &Path) -> Result<(), ModelIoError> {
    std::fs::write(path, model_to_bytes(model))?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<ComparatorModel, ModelIoError> {
    model_from_bytes(&std::fs::read(path)?)
}
