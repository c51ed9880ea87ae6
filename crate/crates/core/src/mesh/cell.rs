use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::mesh::{min_angle_degrees, on_unit_square_boundary, HoleEdge, Mesh, Point, COORD_TOL};

/// Triangles sharper than this after snapping are a meshing failure.
pub const MIN_ANGLE_DEGREES: f64 = 5.0;

/// Unit cell `Y = [0,1]^2` with a centred disk hole of radius `hole_radius`
/// (`0` for no hole), meshed on an `resolution x resolution` grid.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CellGeometry {
    pub hole_radius: f64,
    pub resolution: usize,
}

impl CellGeometry {
    pub const HOLE_CENTER: Point = [0.5, 0.5];

    pub fn new(resolution: usize, hole_radius: f64) -> Result<Self> {
        let geom = Self {
            hole_radius,
            resolution,
        };
        geom.validate()?;
        Ok(geom)
    }

    /// The hole must keep two grid cells of clearance from the cell boundary
    /// so that snapping never touches the square's edges.
    pub fn validate(&self) -> Result<()> {
        if self.resolution < 4 {
            return Err(Error::InvalidGeometry(format!(
                "resolution must be at least 4, got {}",
                self.resolution
            )));
        }
        let r = self.hole_radius;
        if !r.is_finite() || r < 0.0 {
            return Err(Error::InvalidGeometry(format!(
                "hole radius must be finite and non-negative, got {r}"
            )));
        }
        let limit = 0.5 - 2.0 / self.resolution as f64;
        if r > limit + COORD_TOL {
            return Err(Error::InvalidGeometry(format!(
                "hole radius {r} too large for resolution {} (limit 0.5 - 2/n = {limit})",
                self.resolution
            )));
        }
        Ok(())
    }

    pub fn has_hole(&self) -> bool {
        self.hole_radius > 0.0
    }
}

/// Structured snap-to-circle mesh of the perforated cell.
///
/// 1. grid vertices within half a grid spacing of the circle are projected
///    radially onto it;
/// 2. every grid square is split along the diagonal giving the larger minimum
///    angle (ties take the `(i,j)-(i+1,j+1)` diagonal);
/// 3. triangles whose centroid lies inside the disk are removed;
/// 4. the remaining hole boundary vertices are projected onto the circle, so
///    the hole polygon is inscribed.
pub fn build_cell_mesh(geom: &CellGeometry) -> Result<Mesh> {
    geom.validate()?;
    let n = geom.resolution;
    let h = 1.0 / n as f64;
    let r = geom.hole_radius;
    let c = CellGeometry::HOLE_CENTER;
    let idx = |i: usize, j: usize| j * (n + 1) + i;

    let mut vertices: Vec<Point> = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([i as f64 / n as f64, j as f64 / n as f64]);
        }
    }

    let radial = |p: Point| (p[0] - c[0]).hypot(p[1] - c[1]);
    let project = |p: Point| {
        let rho = radial(p);
        [c[0] + (p[0] - c[0]) * r / rho, c[1] + (p[1] - c[1]) * r / rho]
    };

    if geom.has_hole() {
        for p in vertices.iter_mut() {
            let rho = radial(*p);
            if rho > 0.0 && (rho - r).abs() < 0.5 * h {
                *p = project(*p);
            }
        }
    }

    let mut triangles: Vec<[usize; 3]> = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (a, b, cc, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            let main = [[a, b, cc], [a, cc, d]];
            let anti = [[a, b, d], [b, cc, d]];
            let quality = |pair: &[[usize; 3]; 2]| {
                pair.iter()
                    .map(|t| {
                        if crate::mesh::signed_area(&vertices, t) > 0.0 {
                            min_angle_degrees(&vertices, t)
                        } else {
                            -1.0
                        }
                    })
                    .fold(f64::INFINITY, f64::min)
            };
            if quality(&main) >= quality(&anti) - 1e-12 {
                triangles.extend(main);
            } else {
                triangles.extend(anti);
            }
        }
    }

    if geom.has_hole() {
        let before = triangles.len();
        triangles.retain(|t| {
            let cx = (vertices[t[0]][0] + vertices[t[1]][0] + vertices[t[2]][0]) / 3.0;
            let cy = (vertices[t[0]][1] + vertices[t[1]][1] + vertices[t[2]][1]) / 3.0;
            radial([cx, cy]) >= r
        });
        if triangles.len() == before {
            return Err(Error::Meshing(format!(
                "hole of radius {r} is not resolved by a {n}x{n} grid"
            )));
        }
    }

    let hole_edges = boundary_edges(&vertices, &triangles);
    for e in &hole_edges {
        for v in [e.0, e.1] {
            if (radial(vertices[v]) - r).abs() > 0.0 {
                vertices[v] = project(vertices[v]);
            }
        }
    }

    // Drop vertices swallowed by the hole, keeping the grid order.
    let mut used = vec![false; vertices.len()];
    for t in &triangles {
        for &v in t {
            used[v] = true;
        }
    }
    let mut renumber = vec![usize::MAX; vertices.len()];
    let mut kept = Vec::with_capacity(vertices.len());
    for (v, p) in vertices.iter().enumerate() {
        if used[v] {
            renumber[v] = kept.len();
            kept.push(*p);
        }
    }
    let triangles: Vec<[usize; 3]> = triangles
        .iter()
        .map(|t| [renumber[t[0]], renumber[t[1]], renumber[t[2]]])
        .collect();
    let hole_edges: Vec<HoleEdge> = hole_edges
        .iter()
        .map(|&(a, b)| HoleEdge {
            a: renumber[a],
            b: renumber[b],
            chain: 0,
        })
        .collect();

    for (t, tri) in triangles.iter().enumerate() {
        let area = crate::mesh::signed_area(&kept, tri);
        if !(area > 0.0) {
            return Err(Error::DegenerateTriangle { triangle: t, area });
        }
        let angle = min_angle_degrees(&kept, tri);
        if angle < MIN_ANGLE_DEGREES {
            return Err(Error::Meshing(format!(
                "triangle {t} has minimum angle {angle:.3} deg after snapping \
                 (n = {n}, r = {r}); try another resolution"
            )));
        }
    }

    let ntri = triangles.len();
    Mesh::from_parts(kept, triangles, hole_edges, vec![0; ntri], 1, n)
}

/// Edges used by exactly one triangle that are not on the square boundary,
/// oriented as in their (counterclockwise) triangle.
fn boundary_edges(vertices: &[Point], triangles: &[[usize; 3]]) -> Vec<(usize, usize)> {
    let mut count: HashMap<(usize, usize), u32> = HashMap::new();
    for t in triangles {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            *count.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    let on_same_side = |a: Point, b: Point| {
        let same = |x: f64, y: f64, s: f64| (x - s).abs() <= COORD_TOL && (y - s).abs() <= COORD_TOL;
        same(a[0], b[0], 0.0) || same(a[0], b[0], 1.0) || same(a[1], b[1], 0.0) || same(a[1], b[1], 1.0)
    };
    let mut edges = Vec::new();
    for t in triangles {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            if count[&(a.min(b), a.max(b))] != 1 {
                continue;
            }
            let (pa, pb) = (vertices[a], vertices[b]);
            if on_unit_square_boundary(pa) && on_unit_square_boundary(pb) && on_same_side(pa, pb) {
                continue;
            }
            edges.push((a, b));
        }
    }
    edges
}
