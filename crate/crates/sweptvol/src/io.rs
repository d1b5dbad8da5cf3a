//! File formats: the binary field container, JSON curve/point files, and OBJ
//! geometry export.
//!
//! Field container layout (little endian):
//!   magic "TFLD" | u16 version = 1 | u8 dtype (0 = f64, 1 = c64) | u8 m |
//!   m × u32 node counts | m × f64 period lengths | payload.
//! Payload is node-major (x fastest), f64 values; complex fields interleave
//! (re, im). An equivalent JSON container is used when the path ends in
//! `.json`: {"m", "n", "L", "dtype", "data"}.

use num_complex::Complex64;
use std::io::{Read, Write};
use std::path::Path;

use crate::currents::Chain;
use crate::error::{Error, Result};
use crate::explicit::Curve3D;
use crate::grid::{ComplexField, GridSpec, ScalarField};
use crate::implicit::PsiField;

const MAGIC: &[u8; 4] = b"TFLD";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dtype {
    F64,
    C64,
}

#[derive(serde::Serialize, serde::Deserialize)]
struct JsonContainer {
    m: usize,
    n: Vec<usize>,
    #[serde(rename = "L")]
    l: Vec<f64>,
    dtype: String,
    /// Optional amplitude core radius carried alongside ψ fields.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    eps: Option<f64>,
    data: Vec<f64>,
}

fn payload_complex(values: &[Complex64]) -> Vec<f64> {
    values.iter().flat_map(|z| [z.re, z.im]).collect()
}

fn is_json(path: &Path) -> bool {
    path.extension().map(|e| e == "json").unwrap_or(false)
}

pub fn write_complex_field(path: &Path, field: &ComplexField, eps: Option<f64>) -> Result<()> {
    let g = &field.grid;
    if is_json(path) {
        let c = JsonContainer {
            m: g.dim(),
            n: g.n()[..g.dim()].to_vec(),
            l: g.lengths()[..g.dim()].to_vec(),
            dtype: "c64".into(),
            eps,
            data: payload_complex(&field.values),
        };
        let s = serde_json::to_string(&c).map_err(|e| Error::Serde(e.to_string()))?;
        std::fs::write(path, s)?;
        return Ok(());
    }
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    f.write_all(MAGIC)?;
    f.write_all(&1u16.to_le_bytes())?;
    f.write_all(&[1u8, g.dim() as u8])?;
    for d in 0..g.dim() {
        f.write_all(&(g.n()[d] as u32).to_le_bytes())?;
    }
    for d in 0..g.dim() {
        f.write_all(&g.lengths()[d].to_le_bytes())?;
    }
    f.write_all(&eps.unwrap_or(0.0).to_le_bytes())?;
    for z in &field.values {
        f.write_all(&z.re.to_le_bytes())?;
        f.write_all(&z.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_complex_field(path: &Path) -> Result<(ComplexField, Option<f64>)> {
    if is_json(path) {
        let s = std::fs::read_to_string(path)?;
        let c: JsonContainer = serde_json::from_str(&s).map_err(|e| Error::Serde(e.to_string()))?;
        if c.dtype != "c64" {
            return Err(Error::Serde(format!("expected c64 container, got {}", c.dtype)));
        }
        let g = GridSpec::new(c.m, &c.n, &c.l)?;
        if c.data.len() != 2 * g.node_count() {
            return Err(Error::Serde("payload length mismatch".into()));
        }
        let values = c.data.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect();
        return Ok((ComplexField::from_values(&g, values)?, c.eps));
    }
    let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 4];
    f.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Serde("bad magic".into()));
    }
    let mut b2 = [0u8; 2];
    f.read_exact(&mut b2)?;
    if u16::from_le_bytes(b2) != 1 {
        return Err(Error::Serde("unsupported container version".into()));
    }
    let mut b = [0u8; 2];
    f.read_exact(&mut b)?;
    let (dtype, m) = (b[0], b[1] as usize);
    if dtype != 1 {
        return Err(Error::Serde("expected complex payload".into()));
    }
    let mut n = vec![0usize; m];
    for v in n.iter_mut() {
        let mut b4 = [0u8; 4];
        f.read_exact(&mut b4)?;
        *v = u32::from_le_bytes(b4) as usize;
    }
    let mut l = vec![0f64; m];
    for v in l.iter_mut() {
        let mut b8 = [0u8; 8];
        f.read_exact(&mut b8)?;
        *v = f64::from_le_bytes(b8);
    }
    let mut b8 = [0u8; 8];
    f.read_exact(&mut b8)?;
    let eps = f64::from_le_bytes(b8);
    let g = GridSpec::new(m, &n, &l)?;
    let mut values = Vec::with_capacity(g.node_count());
    for _ in 0..g.node_count() {
        let mut re = [0u8; 8];
        let mut im = [0u8; 8];
        f.read_exact(&mut re)?;
        f.read_exact(&mut im)?;
        values.push(Complex64::new(f64::from_le_bytes(re), f64::from_le_bytes(im)));
    }
    Ok((
        ComplexField::from_values(&g, values)?,
        if eps > 0.0 { Some(eps) } else { None },
    ))
}

pub fn write_psi(path: &Path, psi: &PsiField) -> Result<()> {
    write_complex_field(path, &psi.field, Some(psi.eps))
}

pub fn read_psi(path: &Path) -> Result<PsiField> {
    let (field, eps) = read_complex_field(path)?;
    let psi = PsiField { field, eps: eps.unwrap_or(0.05) };
    psi.validate()?;
    Ok(psi)
}

pub fn write_scalar_field(path: &Path, field: &ScalarField) -> Result<()> {
    let g = &field.grid;
    let c = JsonContainer {
        m: g.dim(),
        n: g.n()[..g.dim()].to_vec(),
        l: g.lengths()[..g.dim()].to_vec(),
        dtype: "f64".into(),
        eps: None,
        data: field.values.clone(),
    };
    let s = serde_json::to_string(&c).map_err(|e| Error::Serde(e.to_string()))?;
    std::fs::write(path, s)?;
    Ok(())
}

// ── Curve and point files ────────────────────────────────────────────────

/// JSON schema for explicit shapes: closed curves {vertices, closed: true}
/// and signed point sets {points, signs}.
#[derive(serde::Serialize, serde::Deserialize)]
pub struct CurveFile {
    pub vertices: Vec<[f64; 3]>,
    pub closed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signs: Option<Vec<i8>>,
}

pub fn write_curve(path: &Path, c: &Curve3D) -> Result<()> {
    let f = CurveFile { vertices: c.vertices.clone(), closed: true, signs: None };
    let s = serde_json::to_string_pretty(&f).map_err(|e| Error::Serde(e.to_string()))?;
    std::fs::write(path, s)?;
    Ok(())
}

pub fn read_curve(path: &Path) -> Result<Curve3D> {
    let s = std::fs::read_to_string(path)?;
    let f: CurveFile = serde_json::from_str(&s).map_err(|e| Error::Serde(e.to_string()))?;
    if !f.closed {
        return Err(Error::Serde("curve file must be closed".into()));
    }
    Ok(Curve3D { vertices: f.vertices })
}

#[derive(serde::Serialize, serde::Deserialize)]
pub struct PointsFile {
    pub points: Vec<[f64; 3]>,
    pub signs: Vec<i8>,
}

pub fn read_points(path: &Path) -> Result<PointsFile> {
    let s = std::fs::read_to_string(path)?;
    serde_json::from_str(&s).map_err(|e| Error::Serde(e.to_string()))
}

pub fn write_points(path: &Path, p: &PointsFile) -> Result<()> {
    let s = serde_json::to_string_pretty(p).map_err(|e| Error::Serde(e.to_string()))?;
    std::fs::write(path, s)?;
    Ok(())
}

// ── OBJ export ───────────────────────────────────────────────────────────

/// Writes vertices (`v`), faces (`f`), and polylines (`l`) in OBJ format.
pub fn write_obj(
    path: &Path,
    vertices: &[[f64; 3]],
    triangles: &[[usize; 3]],
    chains: &[(Chain, usize)],
) -> Result<()> {
    let mut out = String::new();
    for v in vertices {
        out.push_str(&format!("v {} {} {}\n", v[0], v[1], v[2]));
    }
    for t in triangles {
        out.push_str(&format!("f {} {} {}\n", t[0] + 1, t[1] + 1, t[2] + 1));
    }
    for (ch, base) in chains {
        out.push('l');
        for i in 0..ch.vertices.len() {
            out.push_str(&format!(" {}", base + i + 1));
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Convenience export of any shape current to OBJ.
pub fn write_shape_obj(path: &Path, shape: &crate::currents::ShapeCurrent) -> Result<()> {
    use crate::currents::ShapeCurrent::*;
    match shape {
        OrientedPoints { positions, .. } => write_obj(path, positions, &[], &[]),
        PolyCurve { chains } => {
            let mut verts = Vec::new();
            let mut list = Vec::new();
            for ch in chains {
                let base = verts.len();
                verts.extend_from_slice(&ch.vertices);
                list.push((ch.clone(), base));
            }
            write_obj(path, &verts, &[], &list)
        }
        TriSurface { vertices, triangles, .. } => write_obj(path, vertices, triangles, &[]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn field_container_roundtrip_binary_and_json() {
        let g = make_grid(2, &[8, 8], &[1.0, 2.0]).unwrap();
        let f = ComplexField::from_fn(&g, |p| Complex64::new(p[0], -p[1]));
        let dir = std::env::temp_dir().join("sweptvol_io_test");
        std::fs::create_dir_all(&dir).unwrap();
        for name in ["field.fld", "field.json"] {
            let path = dir.join(name);
            write_complex_field(&path, &f, Some(0.05)).unwrap();
            let (back, eps) = read_complex_field(&path).unwrap();
            assert_eq!(eps, Some(0.05));
            assert_eq!(back.grid, g);
            for (a, b) in f.values.iter().zip(&back.values) {
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn curve_file_roundtrip() {
        let c = crate::zoo::circle3d([0.5, 0.5, 0.5], 0.2, 16);
        let path = std::env::temp_dir().join("sweptvol_curve_test.json");
        write_curve(&path, &c).unwrap();
        let back = read_curve(&path).unwrap();
        assert_eq!(c.vertices, back.vertices);
    }
}
