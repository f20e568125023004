//! ASCII VTK unstructured-grid output and textual mesh reports.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::mesh::Mesh;

#[derive(Debug, Error)]
pub enum VtkError {
    #[error("Lagrange data has {rows} rows of width {width}, expected {k} rows of width 1, 3 or 6")]
    Shape { rows: usize, width: usize, k: usize },
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// One field on a mesh at one time level.
pub struct VtuSnapshot<'a> {
    pub mesh: &'a Mesh,
    /// K rows with 1, 3 or 6 Lagrange values each.
    pub data: &'a [Vec<f64>],
    pub var_name: &'a str,
    pub basename: &'a str,
    pub t_lvl: usize,
}

impl VtuSnapshot<'_> {
    pub fn file_name(&self) -> String {
        format!("{}.{}.vtu", self.basename, self.t_lvl)
    }
}

/// Formats like C's `%.3e`: three fractional digits and a signed exponent
/// of at least two digits.
pub fn format_sci(v: f64) -> String {
    let s = format!("{v:.3e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let (sign, digits) = match exp.strip_prefix('-') {
        Some(d) => ('-', d),
        None => ('+', exp),
    };
    format!("{mantissa}e{sign}{digits:0>2}")
}

/// VTU document for the snapshot.
pub fn render_vtu(snap: &VtuSnapshot<'_>) -> Result<String, VtkError> {
    let mesh = snap.mesh;
    let k_count = mesh.num_t();
    let width = snap.data.first().map_or(3, Vec::len);
    if snap.data.len() != k_count
        || !matches!(width, 1 | 3 | 6)
        || snap.data.iter().any(|r| r.len() != width)
    {
        return Err(VtkError::Shape { rows: snap.data.len(), width, k: k_count });
    }
    let (num_p, cell_type) = if width == 6 { (6, 22) } else { (3, 5) };

    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\"?>\n");
    s.push_str(
        "<VTKFile type=\"UnstructuredGrid\" version=\"0.1\" byte_order=\"LittleEndian\" compressor=\"vtkZLibDataCompressor\">\n",
    );
    s.push_str("  <UnstructuredGrid>\n");
    let _ = writeln!(s, "    <Piece NumberOfPoints=\"{}\" NumberOfCells=\"{}\">", k_count * num_p, k_count);
    s.push_str("      <Points>\n");
    s.push_str("        <DataArray type=\"Float32\" NumberOfComponents=\"3\" format=\"ascii\">\n");
    let coords = mesh.coord_v();
    for v in mesh.v0t() {
        let a = v.map(|i| coords[i]);
        let mut pts = a.to_vec();
        if num_p == 6 {
            let mid = |i: usize, j: usize| [0.5 * (a[i][0] + a[j][0]), 0.5 * (a[i][1] + a[j][1])];
            pts.extend([mid(0, 1), mid(1, 2), mid(2, 0)]);
        }
        for p in pts {
            let _ = writeln!(s, "          {} {} {}", format_sci(p[0]), format_sci(p[1]), format_sci(0.0));
        }
    }
    s.push_str("        </DataArray>\n");
    s.push_str("      </Points>\n");
    s.push_str("      <Cells>\n");
    s.push_str("        <DataArray type=\"Int32\" Name=\"connectivity\" format=\"ascii\">\n");
    s.push_str("          ");
    for i in 0..k_count * num_p {
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{i}");
    }
    s.push('\n');
    s.push_str("        </DataArray>\n");
    s.push_str("        <DataArray type=\"Int32\" Name=\"offsets\" format=\"ascii\">\n");
    for k in 1..=k_count {
        let _ = writeln!(s, "          {}", k * num_p);
    }
    s.push_str("        </DataArray>\n");
    s.push_str("        <DataArray type=\"UInt8\" Name=\"types\" format=\"ascii\">\n");
    for _ in 0..k_count {
        let _ = writeln!(s, "          {cell_type}");
    }
    s.push_str("        </DataArray>\n");
    s.push_str("      </Cells>\n");
    let _ = writeln!(s, "      <PointData Scalars=\"{}\">", snap.var_name);
    let _ = writeln!(
        s,
        "        <DataArray type=\"Float32\" Name=\"{}\" NumberOfComponents=\"1\" format=\"ascii\">",
        snap.var_name
    );
    for row in snap.data {
        let values: Vec<f64> = match width {
            1 => vec![row[0]; 3],
            3 => row.clone(),
            _ => [0, 1, 2, 5, 3, 4].iter().map(|&i| row[i]).collect(),
        };
        for v in values {
            let _ = writeln!(s, "          {}", format_sci(v));
        }
    }
    s.push_str("        </DataArray>\n");
    s.push_str("      </PointData>\n");
    s.push_str("    </Piece>\n");
    s.push_str("  </UnstructuredGrid>\n");
    s.push_str("</VTKFile>\n");
    Ok(s)
}

/// Writes `<basename>.<t_lvl>.vtu` into `dir` and returns its path.
pub fn write_vtu(snap: &VtuSnapshot<'_>, dir: &Path) -> Result<PathBuf, VtkError> {
    let text = render_vtu(snap)?;
    let path = dir.join(snap.file_name());
    std::fs::write(&path, text).map_err(|source| VtkError::Io { path: path.clone(), source })?;
    Ok(path)
}

/// Counts, per-triangle connectivity, boundary IDs and edge normals.
pub fn dump_mesh_report(mesh: &Mesh) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "numT = {}", mesh.num_t());
    let _ = writeln!(s, "numE = {}", mesh.num_e());
    let _ = writeln!(s, "numV = {}", mesh.num_v());
    let boundary = (0..mesh.num_e()).filter(|&e| mesh.is_boundary_edge(e)).count();
    let _ = writeln!(s, "boundary edges = {boundary}");
    let _ = writeln!(s, "h_max = {:.6e}", mesh.h_max());
    let _ = writeln!(s, "boundary IDs = {:?}", mesh.boundary_ids());
    s.push_str("\nvertices\n");
    for (i, v) in mesh.coord_v().iter().enumerate() {
        let _ = writeln!(s, "  {i:>6}  {:>14.6e} {:>14.6e}", v[0], v[1]);
    }
    s.push_str("\ntriangles (vertices | edges | edge IDs | area)\n");
    for k in 0..mesh.num_t() {
        let v = mesh.v0t()[k];
        let e = mesh.e0t()[k];
        let id = mesh.id_e0t()[k];
        let _ = writeln!(
            s,
            "  {k:>6}  {} {} {} | {} {} {} | {} {} {} | {:.6e}",
            v[0], v[1], v[2], e[0], e[1], e[2], id[0], id[1], id[2], mesh.area_t()[k]
        );
    }
    s.push_str("\nedges (vertices | triangles | ID | length | normal)\n");
    for e in 0..mesh.num_e() {
        let v = mesh.v0e()[e];
        let t = mesh.t0e()[e];
        let plus = t.plus.map_or("-".to_string(), |(k, _)| k.to_string());
        let nu = mesh.nu_e()[e];
        let _ = writeln!(
            s,
            "  {e:>6}  {} {} | {} {} | {} | {:.6e} | {:.6e} {:.6e}",
            v[0], v[1], t.minus.0, plus, mesh.id_e()[e], mesh.area_e()[e], nu[0], nu[1]
        );
    }
    s
}
