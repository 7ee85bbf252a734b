//! Checkpoint format: a text manifest of `name rows cols` lines in a fixed
//! order, a blank separator line, then one flat block of IEEE-754
//! little-endian f64 values concatenated in manifest order.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::numerics::{Parameter, Tensor};
use crate::{Error, Result};

pub fn save(path: &Path, params: &[Parameter]) -> Result<()> {
    let mut seen = HashMap::new();
    for (i, p) in params.iter().enumerate() {
        if let Some(prev) = seen.insert(p.name(), i) {
            return Err(Error::Checkpoint(format!(
                "duplicate parameter name '{}' (positions {} and {})",
                p.name(),
                prev,
                i
            )));
        }
    }
    let file = std::fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut w = BufWriter::new(file);
    let io_err = |e| Error::io(path.display().to_string(), e);
    for p in params {
        let (r, c) = p.shape();
        writeln!(w, "{} {} {}", p.name(), r, c).map_err(io_err)?;
    }
    writeln!(w).map_err(io_err)?;
    for p in params {
        for v in p.value().data() {
            w.write_all(&v.to_le_bytes()).map_err(io_err)?;
        }
    }
    w.flush().map_err(io_err)?;
    Ok(())
}

/// Loads values into `params`, matching manifest entries by name. Every
/// given parameter must appear in the file with the same shape; file
/// entries with no matching parameter are skipped (a policy can be loaded
/// from a checkpoint that also carries discriminator weights).
pub fn load(path: &Path, params: &[Parameter]) -> Result<()> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut r = BufReader::new(file);
    let io_err = |e| Error::io(path.display().to_string(), e);

    let mut manifest: Vec<(String, usize, usize)> = Vec::new();
    loop {
        let mut line = String::new();
        let n = r.read_line(&mut line).map_err(io_err)?;
        if n == 0 {
            return Err(Error::Checkpoint("missing blank separator after manifest".into()));
        }
        let line = line.trim_end_matches('\n');
        if line.is_empty() {
            break;
        }
        let parts: Vec<&str> = line.split(' ').collect();
        if parts.len() != 3 {
            return Err(Error::Checkpoint(format!("bad manifest line: '{line}'")));
        }
        let rows: usize = parts[1]
            .parse()
            .map_err(|_| Error::Checkpoint(format!("bad manifest line: '{line}'")))?;
        let cols: usize = parts[2]
            .parse()
            .map_err(|_| Error::Checkpoint(format!("bad manifest line: '{line}'")))?;
        manifest.push((parts[0].to_string(), rows, cols));
    }

    let mut blob = Vec::new();
    r.read_to_end(&mut blob).map_err(io_err)?;
    let total: usize = manifest.iter().map(|(_, r, c)| r * c).sum();
    if blob.len() != total * 8 {
        return Err(Error::Checkpoint(format!(
            "binary block holds {} bytes, manifest expects {}",
            blob.len(),
            total * 8
        )));
    }

    let mut offsets = HashMap::new();
    let mut offset = 0usize;
    for (name, rows, cols) in &manifest {
        offsets.insert(name.clone(), (offset, *rows, *cols));
        offset += rows * cols;
    }

    for p in params {
        let name = p.name();
        let &(start, rows, cols) = offsets
            .get(&name)
            .ok_or_else(|| Error::Checkpoint(format!("parameter '{name}' not found in checkpoint")))?;
        if (rows, cols) != p.shape() {
            return Err(Error::Checkpoint(format!(
                "parameter '{}' has shape {}x{} in checkpoint, expected {}x{}",
                name,
                rows,
                cols,
                p.shape().0,
                p.shape().1
            )));
        }
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows * cols {
            let base = (start + i) * 8;
            let bytes: [u8; 8] = blob[base..base + 8].try_into().expect("length checked");
            data.push(f64::from_le_bytes(bytes));
        }
        p.set_value(Tensor::from_vec(rows, cols, data)?)?;
    }
    Ok(())
}
