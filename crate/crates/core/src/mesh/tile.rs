use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::mesh::{HoleEdge, Mesh, Point, COORD_TOL};

/// Tiles `[0,1]^2` with `m x m` copies of the unit-cell mesh scaled by
/// `eps = 1/m`. Vertices on shared cell interfaces are merged by hashing
/// their coordinates on a `1e-12` lattice; the hole chain of cell
/// `(k, l)` receives chain id `l * m + k`.
pub fn tile_domain_mesh(cell: &Mesh, m: usize) -> Result<Mesh> {
    if m == 0 {
        return Err(Error::Tiling("number of cells per side must be >= 1".into()));
    }
    if cell.cells_per_side != 1 {
        return Err(Error::Tiling("input must be a unit-cell mesh".into()));
    }
    let eps = 1.0 / m as f64;
    if (m as f64 * eps - 1.0).abs() > COORD_TOL {
        return Err(Error::Tiling(format!("m * eps = {} is not 1", m as f64 * eps)));
    }

    let key = |p: Point| ((p[0] / COORD_TOL).round() as i64, (p[1] / COORD_TOL).round() as i64);
    let mut lookup: HashMap<(i64, i64), usize> = HashMap::new();
    let mut vertices: Vec<Point> = Vec::new();
    let mut triangles = Vec::with_capacity(m * m * cell.num_triangles());
    let mut cell_ids = Vec::with_capacity(m * m * cell.num_triangles());
    let mut hole_edges = Vec::with_capacity(m * m * cell.hole_edges.len());
    let mut local = vec![0usize; cell.num_vertices()];

    for l in 0..m {
        for k in 0..m {
            let id = l * m + k;
            for (v, p) in cell.vertices.iter().enumerate() {
                let q = [(k as f64 + p[0]) / m as f64, (l as f64 + p[1]) / m as f64];
                let slot = *lookup.entry(key(q)).or_insert_with(|| {
                    vertices.push(q);
                    vertices.len() - 1
                });
                let existing = vertices[slot];
                if (existing[0] - q[0]).abs() > COORD_TOL || (existing[1] - q[1]).abs() > COORD_TOL {
                    return Err(Error::Tiling(format!("hash collision between {existing:?} and {q:?}")));
                }
                local[v] = slot;
            }
            for t in &cell.triangles {
                triangles.push([local[t[0]], local[t[1]], local[t[2]]]);
                cell_ids.push(id);
            }
            for e in &cell.hole_edges {
                hole_edges.push(HoleEdge {
                    a: local[e.a],
                    b: local[e.b],
                    chain: id * cell.chains.len() + e.chain,
                });
            }
        }
    }
    Mesh::from_parts(vertices, triangles, hole_edges, cell_ids, m, cell.cell_resolution)
}
