//! Point location and evaluation of P1 fields.

use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point};

const BARY_TOL: f64 = 1e-10;

/// Uniform-bin triangle locator over the mesh bounding box.
#[derive(Debug, Clone)]
pub struct PointLocator<'a> {
    mesh: &'a Mesh,
    origin: Point,
    cell: [f64; 2],
    bins: [usize; 2],
    buckets: Vec<Vec<usize>>,
}

impl<'a> PointLocator<'a> {
    pub fn new(mesh: &'a Mesh) -> Self {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in &mesh.vertices {
            for d in 0..2 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        let side = ((mesh.num_triangles() as f64 / 2.0).sqrt().ceil() as usize).max(1);
        let bins = [side, side];
        let cell = [
            ((hi[0] - lo[0]) / side as f64).max(f64::MIN_POSITIVE),
            ((hi[1] - lo[1]) / side as f64).max(f64::MIN_POSITIVE),
        ];
        let mut loc = Self {
            mesh,
            origin: lo,
            cell,
            bins,
            buckets: vec![Vec::new(); side * side],
        };
        for (t, tri) in mesh.triangles.iter().enumerate() {
            let mut tlo = [f64::INFINITY; 2];
            let mut thi = [f64::NEG_INFINITY; 2];
            for &v in tri {
                for d in 0..2 {
                    tlo[d] = tlo[d].min(mesh.vertices[v][d]);
                    thi[d] = thi[d].max(mesh.vertices[v][d]);
                }
            }
            let (i0, j0) = loc.bin_of(tlo);
            let (i1, j1) = loc.bin_of(thi);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    loc.buckets[j * bins[0] + i].push(t);
                }
            }
        }
        loc
    }

    fn bin_of(&self, p: Point) -> (usize, usize) {
        let f = |d: usize| {
            let k = ((p[d] - self.origin[d]) / self.cell[d]).floor();
            (k.max(0.0) as usize).min(self.bins[d] - 1)
        };
        (f(0), f(1))
    }

    /// Triangle containing `p` and its barycentric coordinates, or `None` when
    /// `p` lies outside the mesh (for instance inside a hole).
    pub fn locate(&self, p: Point) -> Option<(usize, [f64; 3])> {
        let (i, j) = self.bin_of(p);
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for &t in &self.buckets[j * self.bins[0] + i] {
            let lam = barycentric(self.mesh, t, p);
            let worst = lam.iter().copied().fold(f64::INFINITY, f64::min);
            if worst >= -BARY_TOL && best.as_ref().is_none_or(|b| worst > b.2) {
                best = Some((t, lam, worst));
            }
        }
        best.map(|(t, lam, _)| (t, lam))
    }
}

fn barycentric(mesh: &Mesh, t: usize, p: Point) -> [f64; 3] {
    let [a, b, c] = mesh.triangles[t].map(|v| mesh.vertices[v]);
    let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    let l1 = ((p[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (p[1] - a[1])) / det;
    let l2 = ((b[0] - a[0]) * (p[1] - a[1]) - (p[0] - a[0]) * (b[1] - a[1])) / det;
    [1.0 - l1 - l2, l1, l2]
}

/// Evaluates a P1 field at `p`.
pub fn evaluate_p1(locator: &PointLocator<'_>, field: &[f64], p: Point) -> Option<f64> {
    let (t, lam) = locator.locate(p)?;
    let tri = locator.mesh.triangles[t];
    Some(lam[0] * field[tri[0]] + lam[1] * field[tri[1]] + lam[2] * field[tri[2]])
}

/// Interpolates a P1 field given on `source` at every vertex of `target`.
pub fn interpolate_p1(source: &Mesh, field: &[f64], target: &Mesh) -> Result<Vec<f64>> {
    if field.len() != source.num_vertices() {
        return Err(Error::DimensionMismatch {
            expected: source.num_vertices(),
            got: field.len(),
        });
    }
    let loc = PointLocator::new(source);
    target
        .vertices
        .iter()
        .map(|&p| {
            evaluate_p1(&loc, field, p)
                .ok_or_else(|| Error::Meshing(format!("point ({}, {}) is outside the source mesh", p[0], p[1])))
        })
        .collect()
}
