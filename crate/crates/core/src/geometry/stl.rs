//! STL reading (binary and ASCII) and deterministic binary writing.

use std::fs;
use std::path::Path;

use super::{Point3, TriangleMesh};
use crate::error::{Error, Result};

const HEADER_LEN: usize = 80;
const FACET_LEN: usize = 50;
const HEADER_TAG: &[u8] = b"printchain binary STL";

pub fn load_stl(path: impl AsRef<Path>) -> Result<TriangleMesh> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::from(e).in_file(path))?;
    parse_stl(&bytes).map_err(|e| e.in_file(path))
}

pub fn save_stl(mesh: &TriangleMesh, path: impl AsRef<Path>) -> Result<()> {
    let bytes = encode_binary(mesh)?;
    fs::write(path.as_ref(), bytes).map_err(|e| Error::from(e).in_file(path.as_ref()))
}

pub fn parse_stl(bytes: &[u8]) -> Result<TriangleMesh> {
    let facets = if looks_ascii(bytes) {
        parse_ascii(bytes)?
    } else {
        parse_binary(bytes)?
    };
    if facets.is_empty() {
        return Err(Error::EmptyMesh);
    }
    TriangleMesh::from_soup(&facets)
}

/// 80-byte zero-padded header, u32 LE count, 50-byte facet records with a
/// zero attribute word.
pub fn encode_binary(mesh: &TriangleMesh) -> Result<Vec<u8>> {
    if mesh.triangles().is_empty() {
        return Err(Error::EmptyMesh);
    }
    let n = mesh.triangles().len();
    let mut out = Vec::with_capacity(HEADER_LEN + 4 + FACET_LEN * n);
    let mut header = [0u8; HEADER_LEN];
    header[..HEADER_TAG.len()].copy_from_slice(HEADER_TAG);
    out.extend_from_slice(&header);
    out.extend_from_slice(&(n as u32).to_le_bytes());
    for k in 0..n {
        // normal from the stored single-precision vertices so a reload
        // re-encodes to the same bytes
        let tri = mesh.triangle(k).map(|p| {
            Point3::new(p.x as f32 as f64, p.y as f32 as f64, p.z as f32 as f64)
        });
        let normal = (tri[1] - tri[0]).cross(tri[2] - tri[0]).normalized();
        for p in std::iter::once(normal).chain(tri) {
            for c in p.to_array() {
                out.extend_from_slice(&(c as f32).to_le_bytes());
            }
        }
        out.extend_from_slice(&0u16.to_le_bytes());
    }
    Ok(out)
}

fn looks_ascii(bytes: &[u8]) -> bool {
    let start = bytes.iter().position(|b| !b.is_ascii_whitespace()).unwrap_or(0);
    if !bytes[start..].starts_with(b"solid") {
        return false;
    }
    // binary files may also begin with "solid"; trust a consistent size
    if bytes.len() >= HEADER_LEN + 4 {
        let n = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
        if HEADER_LEN + 4 + n * FACET_LEN == bytes.len() {
            return false;
        }
    }
    true
}

fn parse_binary(bytes: &[u8]) -> Result<Vec<[Point3; 3]>> {
    if bytes.len() < HEADER_LEN + 4 {
        return Err(Error::parse(
            bytes.len(),
            format!("binary STL header needs 84 bytes, file has {}", bytes.len()),
        ));
    }
    let n = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
    let mut facets = Vec::with_capacity(n);
    for k in 0..n {
        let off = HEADER_LEN + 4 + k * FACET_LEN;
        if off + FACET_LEN > bytes.len() {
            return Err(Error::parse(
                off,
                format!("truncated facet {k} of {n} (file ends at byte {})", bytes.len()),
            ));
        }
        let f = |i: usize| {
            let o = off + 12 + 4 * i;
            f32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as f64
        };
        let tri = [
            Point3::new(f(0), f(1), f(2)),
            Point3::new(f(3), f(4), f(5)),
            Point3::new(f(6), f(7), f(8)),
        ];
        if tri.iter().any(|p| !p.is_finite()) {
            return Err(Error::parse(off + 12, format!("non-finite vertex in facet {k}")));
        }
        facets.push(tri);
    }
    Ok(facets)
}

struct Tokens<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn next(&mut self) -> Option<(usize, &'a str)> {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if self.pos >= self.bytes.len() {
            return None;
        }
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        // non-UTF-8 tokens surface as a keyword mismatch
        Some((start, std::str::from_utf8(&self.bytes[start..self.pos]).unwrap_or("\u{FFFD}")))
    }

    fn skip_line(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
            self.pos += 1;
        }
    }

    fn expect(&mut self, word: &str) -> Result<()> {
        match self.next() {
            Some((_, t)) if t.eq_ignore_ascii_case(word) => Ok(()),
            Some((o, t)) => Err(Error::parse(o, format!("expected `{word}`, found `{t}`"))),
            None => Err(Error::parse(self.bytes.len(), format!("expected `{word}`, found end of file"))),
        }
    }

    fn float(&mut self) -> Result<f64> {
        match self.next() {
            Some((o, t)) => match t.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::parse(o, format!("invalid number `{t}`"))),
            },
            None => Err(Error::parse(self.bytes.len(), "expected number, found end of file")),
        }
    }

    fn point(&mut self) -> Result<Point3> {
        Ok(Point3::new(self.float()?, self.float()?, self.float()?))
    }
}

fn parse_ascii(bytes: &[u8]) -> Result<Vec<[Point3; 3]>> {
    let mut tok = Tokens { bytes, pos: 0 };
    tok.expect("solid")?;
    tok.skip_line();
    let mut facets = Vec::new();
    loop {
        match tok.next() {
            Some((_, t)) if t.eq_ignore_ascii_case("facet") => {
                tok.expect("normal")?;
                tok.point()?;
                tok.expect("outer")?;
                tok.expect("loop")?;
                let mut tri = [Point3::ORIGIN; 3];
                for v in &mut tri {
                    tok.expect("vertex")?;
                    *v = tok.point()?;
                }
                tok.expect("endloop")?;
                tok.expect("endfacet")?;
                facets.push(tri);
            }
            Some((_, t)) if t.eq_ignore_ascii_case("endsolid") => return Ok(facets),
            Some((o, t)) => {
                return Err(Error::parse(o, format!("expected `facet` or `endsolid`, found `{t}`")))
            }
            None => return Err(Error::parse(bytes.len(), "missing `endsolid`")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::primitives;
    use super::*;

    fn ascii_cube(skip: Option<usize>) -> String {
        let cube = primitives::cube(1.0);
        let mut s = String::from("solid cube exported\n");
        for k in 0..cube.triangles().len() {
            if Some(k) == skip {
                continue;
            }
            let n = cube.face_normal(k);
            s += &format!("  facet normal {} {} {}\n    outer loop\n", n.x, n.y, n.z);
            for p in cube.triangle(k) {
                s += &format!("      vertex {} {} {}\n", p.x, p.y, p.z);
            }
            s += "    endloop\n  endfacet\n";
        }
        s + "endsolid cube\n"
    }

    #[test]
    fn ascii_cube_loads_watertight() {
        let m = parse_stl(ascii_cube(None).as_bytes()).unwrap();
        assert_eq!(m.vertices().len(), 8);
        assert_eq!(m.triangles().len(), 12);
        assert!(m.is_watertight());
        let open = parse_stl(ascii_cube(Some(3)).as_bytes()).unwrap();
        assert!(!open.is_watertight());
    }

    #[test]
    fn binary_layout_and_size() {
        let bytes = encode_binary(&primitives::cube(1.0)).unwrap();
        assert_eq!(bytes.len(), 684);
        assert_eq!(&bytes[80..84], &12u32.to_le_bytes());
        assert!(bytes[HEADER_TAG.len()..80].iter().all(|&b| b == 0));
        // attribute words are zero
        for k in 0..12 {
            let o = 84 + k * 50 + 48;
            assert_eq!(&bytes[o..o + 2], &[0, 0]);
        }
    }

    #[test]
    fn binary_round_trip_is_byte_identical() {
        let once = encode_binary(&primitives::cylinder(50.0, 20.0, 90)).unwrap();
        let reloaded = parse_stl(&once).unwrap();
        let twice = encode_binary(&reloaded).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn truncated_binary_names_offset() {
        let bytes = encode_binary(&primitives::cube(1.0)).unwrap();
        match parse_stl(&bytes[..84 + 50 * 5 + 10]) {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 84 + 50 * 5),
            other => panic!("unexpected {other:?}"),
        }
        match parse_stl(&bytes[..40]) {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 40),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_triangles_is_empty_mesh() {
        let mut bytes = vec![0u8; 84];
        bytes[..4].copy_from_slice(b"abcd");
        assert!(matches!(parse_stl(&bytes), Err(Error::EmptyMesh)));
        assert!(matches!(parse_stl(b"solid x\nendsolid x\n"), Err(Error::EmptyMesh)));
    }

    #[test]
    fn ascii_error_offset_points_at_token() {
        let src = "solid a\nfacet normal 0 0 1\nouter lop\n";
        match parse_stl(src.as_bytes()) {
            Err(Error::Parse { offset, message }) => {
                assert_eq!(&src[offset..offset + 3], "lop");
                assert!(message.contains("loop"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
