//! Triangulated perforated geometries: the unit cell `Y* = Y \ F`, the tiled
//! domain `Omega_eps`, periodic vertex pairing and the hole boundary chains.

mod cell;
mod chain;
mod io;
mod metrics;
mod periodic;
mod tile;

pub use cell::{build_cell_mesh, CellGeometry, MIN_ANGLE_DEGREES};
pub use chain::BoundaryChain;
pub use io::{read_mesh, write_mesh, write_mesh_file, MESH_HEADER};
pub use metrics::{mesh_metrics, MeshMetrics};
pub use periodic::{build_periodic_map, PeriodicMap};
pub use tile::tile_domain_mesh;

use std::collections::BTreeMap;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Tolerance used for "lies on the square boundary" and coordinate matching.
pub const COORD_TOL: f64 = 1e-12;

/// Directed hole boundary edge `a -> b` belonging to chain `chain`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HoleEdge {
    pub a: usize,
    pub b: usize,
    pub chain: usize,
}

/// Triangle mesh of a (possibly perforated) subset of the unit square.
///
/// Immutable once built: every constructor goes through [`Mesh::from_parts`],
/// which checks orientation and extracts the closed hole chains.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<Point>,
    /// Counterclockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    pub hole_edges: Vec<HoleEdge>,
    /// Sorted indices of the vertices on the boundary of the unit square.
    pub outer_boundary: Vec<usize>,
    /// Period cell each triangle belongs to (row-major, `0` for a unit cell).
    pub cell_ids: Vec<usize>,
    /// Hole chains, indexed by chain id.
    pub chains: Vec<BoundaryChain>,
    /// Number of period cells per side (`m = 1/eps`).
    pub cells_per_side: usize,
    /// Structured grid cells per side of one period cell.
    pub cell_resolution: usize,
}

impl Mesh {
    pub fn from_parts(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        hole_edges: Vec<HoleEdge>,
        cell_ids: Vec<usize>,
        cells_per_side: usize,
        cell_resolution: usize,
    ) -> Result<Self> {
        if cell_ids.len() != triangles.len() {
            return Err(Error::DimensionMismatch {
                expected: triangles.len(),
                got: cell_ids.len(),
            });
        }
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::Meshing(format!("triangle {t} refers to a missing vertex")));
            }
            let area = signed_area(&vertices, tri);
            if !(area > 0.0) {
                return Err(Error::DegenerateTriangle { triangle: t, area });
            }
        }
        let chains = assemble_chains(&vertices, &hole_edges)?;
        let outer_boundary = (0..vertices.len())
            .filter(|&v| on_unit_square_boundary(vertices[v]))
            .collect();
        Ok(Self {
            vertices,
            triangles,
            hole_edges,
            outer_boundary,
            cell_ids,
            chains,
            cells_per_side,
            cell_resolution,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        signed_area(&self.vertices, &self.triangles[t])
    }

    /// Constant gradients of the three P1 hat functions on triangle `t`.
    pub fn hat_gradients(&self, t: usize) -> [[f64; 2]; 3] {
        hat_gradients(&self.vertices, &self.triangles[t])
    }

    /// Boolean mask of vertices lying on some hole chain.
    pub fn hole_vertex_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.vertices.len()];
        for e in &self.hole_edges {
            mask[e.a] = true;
            mask[e.b] = true;
        }
        mask
    }

    /// Spacing of the underlying structured grid, `1 / (n m)`.
    pub fn grid_spacing(&self) -> f64 {
        1.0 / (self.cell_resolution * self.cells_per_side) as f64
    }
}

pub(crate) fn signed_area(vertices: &[Point], tri: &[usize; 3]) -> f64 {
    let [a, b, c] = [vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]];
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

pub(crate) fn hat_gradients(vertices: &[Point], tri: &[usize; 3]) -> [[f64; 2]; 3] {
    let p = [vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]];
    let twice = 2.0 * signed_area(vertices, tri);
    let mut g = [[0.0; 2]; 3];
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        g[i] = [(p[j][1] - p[k][1]) / twice, (p[k][0] - p[j][0]) / twice];
    }
    g
}

/// Smallest interior angle of a triangle, in degrees.
pub(crate) fn min_angle_degrees(vertices: &[Point], tri: &[usize; 3]) -> f64 {
    let mut min = f64::INFINITY;
    for k in 0..3 {
        let o = vertices[tri[k]];
        let u = vertices[tri[(k + 1) % 3]];
        let v = vertices[tri[(k + 2) % 3]];
        let (ux, uy) = (u[0] - o[0], u[1] - o[1]);
        let (vx, vy) = (v[0] - o[0], v[1] - o[1]);
        let angle = (ux * vy - uy * vx).abs().atan2(ux * vx + uy * vy);
        min = min.min(angle.to_degrees());
    }
    min
}

pub(crate) fn on_unit_square_boundary(p: Point) -> bool {
    p[0].abs() <= COORD_TOL
        || (p[0] - 1.0).abs() <= COORD_TOL
        || p[1].abs() <= COORD_TOL
        || (p[1] - 1.0).abs() <= COORD_TOL
}

fn assemble_chains(vertices: &[Point], edges: &[HoleEdge]) -> Result<Vec<BoundaryChain>> {
    let mut by_chain: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for e in edges {
        by_chain.entry(e.chain).or_default().push((e.a, e.b));
    }
    let mut chains = Vec::with_capacity(by_chain.len());
    for (expected, (id, list)) in by_chain.into_iter().enumerate() {
        if id != expected {
            return Err(Error::InvalidChain(format!(
                "chain ids must be contiguous from 0, missing {expected}"
            )));
        }
        let mut next: BTreeMap<usize, usize> = BTreeMap::new();
        for &(a, b) in &list {
            if next.insert(a, b).is_some() {
                return Err(Error::InvalidChain(format!(
                    "vertex {a} has two outgoing edges in chain {id} (pinched hole)"
                )));
            }
        }
        let start = list[0].0;
        let mut order = vec![start];
        let mut cur = start;
        loop {
            let Some(&nxt) = next.get(&cur) else {
                return Err(Error::InvalidChain(format!("chain {id} is open at vertex {cur}")));
            };
            if nxt == start {
                break;
            }
            if order.len() > list.len() {
                return Err(Error::InvalidChain(format!("chain {id} does not close")));
            }
            order.push(nxt);
            cur = nxt;
        }
        if order.len() != list.len() {
            return Err(Error::InvalidChain(format!(
                "chain {id} splits into several loops ({} of {} edges reached)",
                order.len(),
                list.len()
            )));
        }
        chains.push(BoundaryChain::from_loop(order, vertices)?);
    }
    Ok(chains)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_triangle_gradients() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let g = hat_gradients(&v, &[0, 1, 2]);
        assert_eq!(g, [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(signed_area(&v, &[0, 1, 2]), 0.5);
        assert!((min_angle_degrees(&v, &[0, 1, 2]) - 45.0).abs() < 1e-12);
    }

    #[test]
    fn clockwise_triangle_is_rejected() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let err = Mesh::from_parts(v, vec![[0, 2, 1]], vec![], vec![0], 1, 1).unwrap_err();
        assert!(matches!(err, Error::DegenerateTriangle { .. }));
    }

    #[test]
    fn open_chain_is_rejected() {
        let v = vec![[0.2, 0.2], [0.3, 0.2], [0.3, 0.3]];
        let edges = vec![HoleEdge { a: 0, b: 1, chain: 0 }, HoleEdge { a: 1, b: 2, chain: 0 }];
        assert!(matches!(assemble_chains(&v, &edges), Err(Error::InvalidChain(_))));
    }
}
