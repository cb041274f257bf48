//! ASCII OFF mesh ingestion: vertex positions, then triangular faces.

use std::path::Path;

use crate::error::{Error, Result};
use crate::fields::domain::Domain;

/// Parse an ASCII OFF file into a validated mesh domain.
pub fn read_off(path: &Path) -> Result<Domain> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::Snapshot(format!("cannot read mesh file {}: {e}", path.display()))
    })?;
    parse_off(&text).map_err(|msg| Error::Snapshot(format!("{}: {msg}", path.display())))
}

/// Parse OFF text. Lines may carry `#` comments; blank lines are skipped.
pub fn parse_off(text: &str) -> std::result::Result<Domain, String> {
    struct Cursor<'a> {
        tokens: Vec<&'a str>,
        pos: usize,
    }
    impl<'a> Cursor<'a> {
        fn next(&mut self, what: &str) -> std::result::Result<&'a str, String> {
            let tok = self
                .tokens
                .get(self.pos)
                .ok_or_else(|| format!("missing {what}"))?;
            self.pos += 1;
            Ok(tok)
        }
    }
    let mut cur = Cursor {
        tokens: text
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .flat_map(str::split_whitespace)
            .collect(),
        pos: 0,
    };
    let mut next = |what: &str| cur.next(what);

    let header = next("header")?;
    if header != "OFF" {
        return Err(format!("expected OFF header, found '{header}'"));
    }
    let nv: usize = next("vertex count")?
        .parse()
        .map_err(|e| format!("bad vertex count: {e}"))?;
    let nf: usize = next("face count")?
        .parse()
        .map_err(|e| format!("bad face count: {e}"))?;
    let _ne: usize = next("edge count")?
        .parse()
        .map_err(|e| format!("bad edge count: {e}"))?;

    let mut positions = Vec::with_capacity(nv);
    for i in 0..nv {
        let mut coords = [0.0; 3];
        for c in &mut coords {
            *c = next(&format!("vertex {i} coordinate"))?
                .parse()
                .map_err(|e| format!("bad coordinate in vertex {i}: {e}"))?;
        }
        positions.push(coords);
    }
    let mut faces = Vec::with_capacity(nf);
    for i in 0..nf {
        let arity: usize = next(&format!("face {i} arity"))?
            .parse()
            .map_err(|e| format!("bad arity in face {i}: {e}"))?;
        if arity != 3 {
            return Err(format!(
                "face {i} has {arity} vertices; only triangles are supported"
            ));
        }
        let mut idx = [0u32; 3];
        for v in &mut idx {
            *v = next(&format!("face {i} index"))?
                .parse()
                .map_err(|e| format!("bad index in face {i}: {e}"))?;
        }
        faces.push(idx);
    }
    Domain::mesh(positions, faces).map_err(|e| e.to_string())
}

/// Serialize a mesh domain back to OFF text (round-trip convenience).
pub fn write_off(domain: &Domain) -> Result<String> {
    let mesh = domain.as_mesh()?;
    let mut out = String::new();
    out.push_str("OFF\n");
    out.push_str(&format!(
        "{} {} {}\n",
        mesh.positions.len(),
        mesh.faces.len(),
        0
    ));
    for p in &mesh.positions {
        out.push_str(&format!("{:.17e} {:.17e} {:.17e}\n", p[0], p[1], p[2]));
    }
    for f in &mesh.faces {
        out.push_str(&format!("3 {} {} {}\n", f[0], f[1], f[2]));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TETRA: &str = "OFF\n4 4 6\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n3 0 2 1\n3 0 1 3\n3 0 3 2\n3 1 2 3\n";

    #[test]
    fn parses_a_tetrahedron() {
        let domain = parse_off(TETRA).unwrap();
        assert_eq!(domain.node_count(), 4);
        assert_eq!(domain.euler_characteristic(), 2);
    }

    #[test]
    fn round_trips_through_text() {
        let domain = parse_off(TETRA).unwrap();
        let text = write_off(&domain).unwrap();
        let again = parse_off(&text).unwrap();
        assert_eq!(again.node_count(), 4);
        assert_eq!(again.euler_characteristic(), 2);
    }

    #[test]
    fn rejects_non_triangles() {
        let quad = "OFF\n4 1 4\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n";
        assert!(parse_off(quad).is_err());
    }
}
