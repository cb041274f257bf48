//! Field snapshots (.fld): one ASCII header line
//! `FLD1 <backend> <n1> <n2> <t>` followed by little-endian 64-bit floats,
//! row-major for grids (index = ix·ny + iy), vertex-ordered for meshes.
//! Round-trips are bit-exact.

use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fields::{Domain, ScalarField};

/// Serialize a field sampled at time `t`.
pub fn write_field(path: &Path, field: &ScalarField, t: f64) -> Result<()> {
    let (backend, n1, n2) = match field.domain().as_ref() {
        Domain::Grid(g) => ("grid", g.nx, g.ny),
        Domain::Mesh(m) => ("mesh", m.len(), 0),
    };
    let mut file = std::fs::File::create(path)?;
    writeln!(file, "FLD1 {backend} {n1} {n2} {t:.16e}")?;
    let mut bytes = Vec::with_capacity(field.len() * 8);
    for &v in field.values() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    file.write_all(&bytes)?;
    Ok(())
}

/// Read a field for a known domain; the header must match the backend and
/// node counts.
pub fn read_field(path: &Path, domain: &Arc<Domain>) -> Result<ScalarField> {
    let (field, _t) = read_field_with_time(path, domain)?;
    Ok(field)
}

pub fn read_field_with_time(path: &Path, domain: &Arc<Domain>) -> Result<(ScalarField, f64)> {
    let mut file = std::fs::File::open(path).map_err(|e| {
        Error::Snapshot(format!("cannot open snapshot {}: {e}", path.display()))
    })?;
    let mut raw = Vec::new();
    file.read_to_end(&mut raw)?;
    let newline = raw
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::Snapshot(format!("{}: missing header", path.display())))?;
    let header = std::str::from_utf8(&raw[..newline])
        .map_err(|_| Error::Snapshot(format!("{}: malformed header", path.display())))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 5 || parts[0] != "FLD1" {
        return Err(Error::Snapshot(format!(
            "{}: expected 'FLD1 <backend> <n1> <n2> <t>', got '{header}'",
            path.display()
        )));
    }
    let n1: usize = parts[2]
        .parse()
        .map_err(|e| Error::Snapshot(format!("{}: bad n1 ({e})", path.display())))?;
    let n2: usize = parts[3]
        .parse()
        .map_err(|e| Error::Snapshot(format!("{}: bad n2 ({e})", path.display())))?;
    let t: f64 = parts[4]
        .parse()
        .map_err(|e| Error::Snapshot(format!("{}: bad time ({e})", path.display())))?;

    match domain.as_ref() {
        Domain::Grid(g) => {
            if parts[1] != "grid" || n1 != g.nx || n2 != g.ny {
                return Err(Error::Snapshot(format!(
                    "{}: snapshot is {} {n1}x{n2}, domain is grid {}x{}",
                    path.display(),
                    parts[1],
                    g.nx,
                    g.ny
                )));
            }
        }
        Domain::Mesh(m) => {
            if parts[1] != "mesh" || n1 != m.len() {
                return Err(Error::Snapshot(format!(
                    "{}: snapshot is {} with {n1} nodes, domain is mesh with {}",
                    path.display(),
                    parts[1],
                    m.len()
                )));
            }
        }
    }

    let body = &raw[newline + 1..];
    let expected = domain.node_count() * 8;
    if body.len() != expected {
        return Err(Error::Snapshot(format!(
            "{}: expected {expected} payload bytes, found {}",
            path.display(),
            body.len()
        )));
    }
    let values: Vec<f64> = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((ScalarField::new(domain.clone(), values)?, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::Lcg64;
    use std::f64::consts::PI;

    #[test]
    fn snapshot_round_trip_is_bit_exact() {
        let domain = Arc::new(Domain::grid(16, 16, 2.0 * PI, PI).unwrap());
        let mut rng = Lcg64::new(11);
        let values: Vec<f64> = (0..domain.node_count())
            .map(|_| rng.next_symmetric() * 1e3)
            .collect();
        let field = ScalarField::new(domain.clone(), values.clone()).unwrap();
        let dir = std::env::temp_dir().join("torflow_snapshot_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("field.fld");
        write_field(&path, &field, 0.125).unwrap();
        let (back, t) = read_field_with_time(&path, &domain).unwrap();
        assert_eq!(t, 0.125);
        for (a, b) in back.values().iter().zip(&values) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        std::fs::remove_dir_all(&dir).ok();
    }
}
