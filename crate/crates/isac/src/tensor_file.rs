//! Binary complex-tensor files.
//!
//! Layout: 4-byte magic `ISCT`, three little-endian `u32` dimensions, then
//! the row-major entries as interleaved little-endian `f64` pairs `(re, im)`.
//! Echo cubes (`[N_r, N_s, L]`), transmit tensors (`[N_t, N_s, L]`) and radar
//! cubes (`[N_a, N_d, N_v]`) all use it.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use isac_core::Cube;
use num_complex::Complex64;

use crate::error::{io_err, HarnessError, Result};

pub const MAGIC: [u8; 4] = *b"ISCT";
pub const HEADER_LEN: usize = 16;

pub fn write_cube<W: Write>(cube: &Cube, mut w: W) -> std::io::Result<()> {
    let mut header = [0u8; HEADER_LEN];
    header[..4].copy_from_slice(&MAGIC);
    for (k, d) in cube.shape().iter().enumerate() {
        let d = u32::try_from(*d).map_err(|_| std::io::Error::other("dimension exceeds u32"))?;
        header[4 + 4 * k..8 + 4 * k].copy_from_slice(&d.to_le_bytes());
    }
    w.write_all(&header)?;
    for z in cube.as_slice() {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    w.flush()
}

/// Reads a tensor, checking the magic and that the payload length matches
/// the header exactly.
pub fn read_cube<R: Read>(mut r: R) -> std::result::Result<Cube, String> {
    let mut header = [0u8; HEADER_LEN];
    r.read_exact(&mut header).map_err(|e| format!("short header: {e}"))?;
    if header[..4] != MAGIC {
        return Err("bad magic".into());
    }
    let dim = |k: usize| u32::from_le_bytes(header[4 + 4 * k..8 + 4 * k].try_into().unwrap()) as usize;
    let shape = [dim(0), dim(1), dim(2)];
    let n = shape.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d)).ok_or("dimensions overflow")?;
    let mut payload = Vec::new();
    r.read_to_end(&mut payload).map_err(|e| e.to_string())?;
    if payload.len() != n * 16 {
        return Err(format!("expected {} payload bytes for {shape:?}, found {}", n * 16, payload.len()));
    }
    let data = payload
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(f64::from_le_bytes(c[..8].try_into().unwrap()), f64::from_le_bytes(c[8..].try_into().unwrap()))
        })
        .collect();
    Cube::from_vec(shape, data).map_err(|e| e.to_string())
}

pub fn save(path: &Path, cube: &Cube) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    write_cube(cube, BufWriter::new(file)).map_err(io_err(path))
}

pub fn load(path: &Path) -> Result<Cube> {
    let file = File::open(path).map_err(io_err(path))?;
    read_cube(BufReader::new(file)).map_err(|reason| HarnessError::Format { path: path.to_path_buf(), reason })
}
