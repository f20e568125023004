//! Reader for the ASCII MEDIT `.mesh` subset written by common mesh
//! generators: `Vertices`, `Edges` and `Triangles` sections with 1-based
//! indices and a trailing reference number per row.

use std::collections::HashMap;
use std::path::Path;

use super::{generate_grid_data, Mesh, MeshError};

struct Tokens<'a> {
    items: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let mut items = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("");
            for tok in line.split_whitespace() {
                items.push((i + 1, tok));
            }
        }
        Self { items, pos: 0 }
    }

    fn peek(&self) -> Option<(usize, &'a str)> {
        self.items.get(self.pos).copied()
    }

    fn next(&mut self) -> Option<(usize, &'a str)> {
        let t = self.peek();
        self.pos += usize::from(t.is_some());
        t
    }

    /// Next `width` non-keyword tokens and the line of the first one, or
    /// the line where the row broke off.
    fn row(&mut self, width: usize) -> Result<(usize, Vec<&'a str>), usize> {
        let mut out = Vec::with_capacity(width);
        let mut first = 0;
        for _ in 0..width {
            match self.peek() {
                Some((line, tok)) if !is_keyword(tok) => {
                    if out.is_empty() {
                        first = line;
                    }
                    out.push(tok);
                    self.pos += 1;
                }
                other => return Err(other.map_or(self.last_line(), |t| t.0)),
            }
        }
        Ok((first, out))
    }

    fn last_line(&self) -> usize {
        self.items.last().map_or(1, |t| t.0)
    }
}

fn is_keyword(tok: &str) -> bool {
    tok.starts_with(|c: char| c.is_ascii_alphabetic())
}

/// Reads a MEDIT mesh file.
pub fn read_mesh_medit(path: impl AsRef<Path>) -> Result<Mesh, MeshError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| MeshError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_mesh_medit(&text, &path.display().to_string())
}

/// Parses MEDIT text; `origin` names the source in error messages.
pub fn parse_mesh_medit(text: &str, origin: &str) -> Result<Mesh, MeshError> {
    let err = |line: usize, message: String| MeshError::Parse {
        path: origin.to_string(),
        line,
        message,
    };
    let mut toks = Tokens::new(text);
    let mut dimension = 2usize;
    let mut vertices: Option<Vec<[f64; 2]>> = None;
    let mut triangles: Option<Vec<[usize; 3]>> = None;
    let mut tri_line = 0;
    let mut edges: Vec<(usize, usize, usize, i32)> = Vec::new();

    let count = |toks: &mut Tokens, kw: &str| -> Result<usize, MeshError> {
        let (line, tok) = toks
            .next()
            .ok_or_else(|| err(toks.last_line(), format!("missing count after `{kw}`")))?;
        tok.parse::<usize>()
            .map_err(|_| err(line, format!("invalid count `{tok}` after `{kw}`")))
    };
    let incomplete = |line: usize, kw: &str, idx: usize, n: usize| {
        err(line, format!("`{kw}` declares {n} entries but entry {} is incomplete", idx + 1))
    };

    while let Some((line, tok)) = toks.next() {
        match tok {
            "MeshVersionFormatted" => {
                count(&mut toks, tok)?;
            }
            "Dimension" => {
                dimension = count(&mut toks, tok)?;
                if dimension != 2 && dimension != 3 {
                    return Err(err(line, format!("unsupported dimension {dimension}")));
                }
            }
            "Vertices" => {
                let n = count(&mut toks, tok)?;
                let mut v = Vec::with_capacity(n);
                for i in 0..n {
                    let (l, r) = toks.row(dimension + 1).map_err(|l| incomplete(l, tok, i, n))?;
                    let x: f64 = r[0].parse().map_err(|_| err(l, format!("invalid coordinate `{}`", r[0])))?;
                    let y: f64 = r[1].parse().map_err(|_| err(l, format!("invalid coordinate `{}`", r[1])))?;
                    v.push([x, y]);
                }
                vertices = Some(v);
            }
            "Edges" => {
                let n = count(&mut toks, tok)?;
                for i in 0..n {
                    let (l, r) = toks.row(3).map_err(|l| incomplete(l, tok, i, n))?;
                    let a = parse_index(r[0]).ok_or_else(|| err(l, format!("invalid vertex index `{}`", r[0])))?;
                    let b = parse_index(r[1]).ok_or_else(|| err(l, format!("invalid vertex index `{}`", r[1])))?;
                    let id: i32 = r[2].parse().map_err(|_| err(l, format!("invalid reference `{}`", r[2])))?;
                    edges.push((l, a, b, id));
                }
            }
            "Triangles" => {
                tri_line = line;
                let n = count(&mut toks, tok)?;
                let mut t = Vec::with_capacity(n);
                for i in 0..n {
                    let (l, r) = toks.row(4).map_err(|l| incomplete(l, tok, i, n))?;
                    let mut tri = [0; 3];
                    for m in 0..3 {
                        tri[m] = parse_index(r[m]).ok_or_else(|| err(l, format!("invalid vertex index `{}`", r[m])))?;
                    }
                    t.push(tri);
                }
                triangles = Some(t);
            }
            "End" => break,
            _ if is_keyword(tok) => {
                while toks.peek().is_some_and(|(_, t)| !is_keyword(t)) {
                    toks.pos += 1;
                }
            }
            _ => return Err(err(line, format!("unexpected token `{tok}`"))),
        }
    }

    let coord_v = vertices.ok_or_else(|| err(toks.last_line(), "missing `Vertices` section".into()))?;
    let mut v0t = triangles.ok_or_else(|| err(toks.last_line(), "missing `Triangles` section".into()))?;
    for tri in &v0t {
        if let Some(&v) = tri.iter().find(|&&v| v >= coord_v.len()) {
            return Err(err(tri_line, format!("triangle references vertex {} of {}", v + 1, coord_v.len())));
        }
    }
    let mut flipped = 0;
    for tri in v0t.iter_mut() {
        let [a, b, c] = tri.map(|v| coord_v[v]);
        if (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]) < 0.0 {
            tri.swap(1, 2);
            flipped += 1;
        }
    }
    if flipped > 0 {
        log::warn!("{origin}: reoriented {flipped} clockwise triangles");
    }
    let mut mesh = generate_grid_data(coord_v, v0t)?;

    let lookup: HashMap<(usize, usize), usize> = mesh
        .v0e()
        .iter()
        .enumerate()
        .map(|(e, &[a, b])| ((a.min(b), a.max(b)), e))
        .collect();
    let mut ids = vec![0; mesh.num_e()];
    let mut tagged = vec![false; mesh.num_e()];
    for (line, a, b, id) in edges {
        let e = *lookup
            .get(&(a.min(b), a.max(b)))
            .ok_or_else(|| err(line, format!("edge ({}, {}) is not an edge of the triangulation", a + 1, b + 1)))?;
        if mesh.is_boundary_edge(e) {
            ids[e] = id;
            tagged[e] = true;
        } else {
            log::warn!("{origin}: line {line}: ignoring reference {id} on interior edge ({}, {})", a + 1, b + 1);
        }
    }
    let untagged = (0..mesh.num_e()).filter(|&e| mesh.is_boundary_edge(e) && !tagged[e]).count();
    if untagged > 0 {
        log::warn!("{origin}: {untagged} boundary edges have no `Edges` entry and get boundary ID 0");
    }
    mesh.set_boundary_ids(ids);
    Ok(mesh)
}

fn parse_index(tok: &str) -> Option<usize> {
    tok.parse::<usize>().ok().filter(|&v| v >= 1).map(|v| v - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SINGLE: &str = "MeshVersionFormatted 1\nDimension 2\nVertices\n3\n0 0 0\n1 0 0\n0 1 0\n\
        Edges\n3\n1 2 5\n2 3 6\n3 1 7\nTriangles\n1\n1 2 3 0\nEnd\n";

    #[test]
    fn reads_single_triangle() {
        let m = parse_mesh_medit(SINGLE, "single.mesh").unwrap();
        assert_eq!(m.num_t(), 1);
        // local edge 2 joins vertices 1 and 2, edge 0 joins 2 and 3
        assert_eq!(m.id_e0t()[0], [6, 7, 5]);
        m.check_invariants().unwrap();
    }

    #[test]
    fn missing_triangles_is_error() {
        let text = "Dimension 2\nVertices\n3\n0 0 0\n1 0 0\n0 1 0\nEnd\n";
        let e = parse_mesh_medit(text, "x.mesh").unwrap_err();
        assert!(e.to_string().contains("Triangles"), "{e}");
    }

    #[test]
    fn count_mismatch_reports_line() {
        let text = "Dimension 2\nVertices\n4\n0 0 0\n1 0 0\n0 1 0\nTriangles\n1\n1 2 3 0\n";
        match parse_mesh_medit(text, "x.mesh") {
            Err(MeshError::Parse { line, .. }) => assert_eq!(line, 7),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn three_dimensional_vertices_and_unknown_sections() {
        let text = "MeshVersionFormatted 2\nDimension 3\nVertices 4\n0 0 0 1\n1 0 0 1\n1 1 0 1\n0 1 0 1\n\
            Corners 2\n1 2\nTriangles 2\n1 2 3 0\n1 3 4 0\nEdges 2\n1 2 1\n3 4 3\nEnd";
        let m = parse_mesh_medit(text, "sq.mesh").unwrap();
        assert_eq!(m.num_t(), 2);
        assert_eq!(m.untagged_boundary_edges(), 2);
        assert_eq!(m.boundary_ids(), vec![0, 1, 3]);
    }

    #[test]
    fn clockwise_triangles_are_reoriented() {
        let text = "Dimension 2\nVertices\n3\n0 0 0\n0 1 0\n1 0 0\nTriangles\n1\n1 2 3 0\n";
        let m = parse_mesh_medit(text, "cw.mesh").unwrap();
        assert!(m.area_t()[0] > 0.0);
    }

    #[test]
    fn unknown_edge_is_error() {
        let text = "Dimension 2\nVertices\n4\n0 0 0\n1 0 0\n0 1 0\n5 5 0\nEdges\n1\n1 4 1\nTriangles\n1\n1 2 3 0\n";
        match parse_mesh_medit(text, "x.mesh") {
            Err(MeshError::Parse { line, .. }) => assert_eq!(line, 10),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
