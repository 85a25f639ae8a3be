//! Checkpoint container: magic "WBLB", version byte, entry count, then one
//! record per tensor (name length, name, rank, dims, little-endian f32
//! payload). Hyperparameters ride in the same table under a reserved
//! "hyper." name prefix so the byte layout stays uniform. Writes are
//! deterministic: same params + hypers -> identical bytes.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::optim::Params;
use crate::real::Real;
use crate::tensor::Tensor;

pub const MAGIC: [u8; 4] = *b"WBLB";
pub const VERSION: u8 = 1;
const HYPER_PREFIX: &str = "hyper.";

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("checkpoint io: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a checkpoint (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    UnsupportedVersion(u8),
    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),
}

/// Numeric hyperparameters (scalars or small vectors like per-stage depths).
pub type Hyper = Vec<(String, Vec<f64>)>;

pub fn save_checkpoint<T: Real>(
    path: &Path,
    params: &Params<T>,
    hyper: &[(String, Vec<f64>)],
) -> Result<(), CheckpointError> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&MAGIC)?;
    w.write_all(&[VERSION])?;
    let count = (hyper.len() + params.len()) as u32;
    w.write_all(&count.to_le_bytes())?;
    for (name, values) in hyper {
        let full = format!("{HYPER_PREFIX}{name}");
        write_entry(&mut w, &full, &[values.len()], values.iter().map(|&v| v as f32))?;
    }
    for (name, tensor) in params.iter() {
        if name.starts_with(HYPER_PREFIX) {
            return Err(CheckpointError::Corrupt(format!(
                "parameter name {name} collides with reserved prefix"
            )));
        }
        write_entry(&mut w, name, tensor.shape(), tensor.values().iter().map(|&v| v.to_f64() as f32))?;
    }
    w.flush()?;
    Ok(())
}

fn write_entry<W: Write>(
    w: &mut W,
    name: &str,
    shape: &[usize],
    values: impl Iterator<Item = f32>,
) -> Result<(), CheckpointError> {
    w.write_all(&(name.len() as u32).to_le_bytes())?;
    w.write_all(name.as_bytes())?;
    w.write_all(&(shape.len() as u32).to_le_bytes())?;
    for &d in shape {
        w.write_all(&(d as u32).to_le_bytes())?;
    }
    for v in values {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub struct Checkpoint<T: Real> {
    pub params: Params<T>,
    pub hyper: Hyper,
}

impl<T: Real> Checkpoint<T> {
    pub fn hyper_scalar(&self, name: &str) -> Result<f64, CheckpointError> {
        let v = self.hyper_vec(name)?;
        if v.len() != 1 {
            return Err(CheckpointError::Corrupt(format!("hyper {name} is not a scalar")));
        }
        Ok(v[0])
    }

    pub fn hyper_vec(&self, name: &str) -> Result<&[f64], CheckpointError> {
        self.hyper
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
            .ok_or_else(|| CheckpointError::Corrupt(format!("missing hyper {name}")))
    }
}

pub fn load_checkpoint<T: Real>(path: &Path) -> Result<Checkpoint<T>, CheckpointError> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if magic != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let mut version = [0u8; 1];
    r.read_exact(&mut version)?;
    if version[0] != VERSION {
        return Err(CheckpointError::UnsupportedVersion(version[0]));
    }
    let count = read_u32(&mut r)? as usize;
    let mut params = Params::new();
    let mut hyper: Hyper = Vec::new();
    for _ in 0..count {
        let name_len = read_u32(&mut r)? as usize;
        if name_len > 4096 {
            return Err(CheckpointError::Corrupt(format!("name length {name_len}")));
        }
        let mut name_buf = vec![0u8; name_len];
        r.read_exact(&mut name_buf)?;
        let name = String::from_utf8(name_buf)
            .map_err(|_| CheckpointError::Corrupt("name is not UTF-8".into()))?;
        let rank = read_u32(&mut r)? as usize;
        if rank > 8 {
            return Err(CheckpointError::Corrupt(format!("rank {rank}")));
        }
        let mut shape = Vec::with_capacity(rank);
        for _ in 0..rank {
            shape.push(read_u32(&mut r)? as usize);
        }
        let n: usize = shape.iter().product();
        if n > (1 << 28) {
            return Err(CheckpointError::Corrupt(format!("tensor too large: {n} elements")));
        }
        let mut payload = vec![0u8; n * 4];
        r.read_exact(&mut payload)?;
        let values: Vec<f32> = payload
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
            .collect();
        if let Some(h) = name.strip_prefix(HYPER_PREFIX) {
            hyper.push((h.to_string(), values.iter().map(|&v| v as f64).collect()));
        } else {
            if params.contains(&name) {
                return Err(CheckpointError::Corrupt(format!("duplicate entry {name}")));
            }
            params.insert(name, Tensor::from_vec(shape, values).map(|v| T::from_f64(v as f64)));
        }
    }
    let mut tail = [0u8; 1];
    if r.read(&mut tail)? != 0 {
        return Err(CheckpointError::Corrupt("trailing bytes".into()));
    }
    Ok(Checkpoint { params, hyper })
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, CheckpointError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}
