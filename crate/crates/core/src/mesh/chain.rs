use crate::error::{Error, Result};
use crate::mesh::Point;

/// Closed polygonal boundary curve. Edge `k` runs from `vertices[k]` to
/// `vertices[(k + 1) % len]`; the closing edge is implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryChain {
    pub vertices: Vec<usize>,
    pub lengths: Vec<f64>,
    pub tangents: Vec<[f64; 2]>,
    /// Unit normal pointing out of the fluid region, i.e. into the hole.
    pub normals: Vec<[f64; 2]>,
}

impl BoundaryChain {
    /// Builds a chain from an ordered closed vertex loop. The fluid is taken to
    /// lie on the left of the traversal direction, so normals are the
    /// right-hand perpendiculars of the tangents.
    pub fn from_loop(vertices: Vec<usize>, coords: &[Point]) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidChain(format!(
                "a closed chain needs at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if vertices.first() == vertices.last() {
            return Err(Error::InvalidChain(
                "loop must not repeat its first vertex at the end".into(),
            ));
        }
        let n = vertices.len();
        let mut lengths = Vec::with_capacity(n);
        let mut tangents = Vec::with_capacity(n);
        let mut normals = Vec::with_capacity(n);
        for k in 0..n {
            let (a, b) = (vertices[k], vertices[(k + 1) % n]);
            let (pa, pb) = match (coords.get(a), coords.get(b)) {
                (Some(pa), Some(pb)) => (*pa, *pb),
                _ => {
                    return Err(Error::InvalidChain(format!(
                        "edge ({a}, {b}) refers to a missing vertex"
                    )))
                }
            };
            let d = [pb[0] - pa[0], pb[1] - pa[1]];
            let len = d[0].hypot(d[1]);
            if !(len > 0.0) {
                return Err(Error::InvalidChain(format!("zero-length edge ({a}, {b})")));
            }
            let t = [d[0] / len, d[1] / len];
            lengths.push(len);
            tangents.push(t);
            normals.push([t[1], -t[0]]);
        }
        Ok(Self {
            vertices,
            lengths,
            tangents,
            normals,
        })
    }

    /// Regular `segments`-gon inscribed in the circle of radius `radius`
    /// centred at `center`, traversed clockwise (so normals point inward,
    /// matching a hole seen from the surrounding fluid). Vertex indices are
    /// `0..segments`; the returned coordinates are indexed accordingly.
    pub fn inscribed_circle(center: Point, radius: f64, segments: usize) -> Result<(Self, Vec<Point>)> {
        let coords: Vec<Point> = (0..segments)
            .map(|k| {
                let theta = -2.0 * std::f64::consts::PI * k as f64 / segments as f64;
                [center[0] + radius * theta.cos(), center[1] + radius * theta.sin()]
            })
            .collect();
        let chain = Self::from_loop((0..segments).collect(), &coords)?;
        Ok((chain, coords))
    }

    pub fn num_edges(&self) -> usize {
        self.vertices.len()
    }

    /// Endpoints of edge `k`.
    pub fn edge(&self, k: usize) -> (usize, usize) {
        (self.vertices[k], self.vertices[(k + 1) % self.vertices.len()])
    }

    pub fn perimeter(&self) -> f64 {
        self.lengths.iter().sum()
    }

    /// Unsigned area enclosed by the polygon (shoelace formula).
    pub fn enclosed_area(&self, coords: &[Point]) -> f64 {
        let n = self.vertices.len();
        let twice: f64 = (0..n)
            .map(|k| {
                let (a, b) = self.edge(k);
                coords[a][0] * coords[b][1] - coords[b][0] * coords[a][1]
            })
            .sum();
        0.5 * twice.abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normals_are_orthogonal_unit_vectors() {
        let (chain, _) = BoundaryChain::inscribed_circle([0.5, 0.5], 0.25, 16).unwrap();
        for (t, nu) in chain.tangents.iter().zip(&chain.normals) {
            assert!((t[0] * nu[0] + t[1] * nu[1]).abs() < 1e-15);
            assert!((nu[0].hypot(nu[1]) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn clockwise_circle_normals_point_to_center() {
        let (chain, coords) = BoundaryChain::inscribed_circle([0.5, 0.5], 0.25, 12).unwrap();
        for k in 0..chain.num_edges() {
            let (a, b) = chain.edge(k);
            let mid = [0.5 * (coords[a][0] + coords[b][0]), 0.5 * (coords[a][1] + coords[b][1])];
            let to_center = [0.5 - mid[0], 0.5 - mid[1]];
            let nu = chain.normals[k];
            assert!(nu[0] * to_center[0] + nu[1] * to_center[1] > 0.0);
        }
    }

    #[test]
    fn rejects_degenerate_loops() {
        let coords = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 0.0]];
        assert!(BoundaryChain::from_loop(vec![0, 1, 2], &coords).is_err());
        assert!(BoundaryChain::from_loop(vec![0, 1], &coords).is_err());
        assert!(BoundaryChain::from_loop(vec![0, 1, 0], &coords).is_err());
    }

    #[test]
    fn square_area_and_perimeter() {
        let coords = vec![[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]];
        let chain = BoundaryChain::from_loop(vec![0, 1, 2, 3], &coords).unwrap();
        assert_eq!(chain.perimeter(), 4.0);
        assert_eq!(chain.enclosed_area(&coords), 1.0);
    }
}
