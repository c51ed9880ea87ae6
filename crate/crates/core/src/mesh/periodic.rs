use crate::error::{Error, Result};
use crate::mesh::{Mesh, COORD_TOL};

/// Slave -> master identification of the opposite edges of the unit cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodicMap {
    master: Vec<usize>,
    pairs: Vec<(usize, usize)>,
}

impl PeriodicMap {
    /// Master vertex of `v` (`v` itself when `v` is not a slave).
    pub fn master_of(&self, v: usize) -> usize {
        self.master[v]
    }

    /// `(slave, master)` pairs in increasing slave order.
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn num_slaves(&self) -> usize {
        self.pairs.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.master.len()
    }

    pub fn is_slave(&self, v: usize) -> bool {
        self.master[v] != v
    }

    /// Replaces every entry of `field` on a slave vertex by its master value.
    pub fn resolve_field(&self, field: &mut [f64]) {
        for &(s, m) in &self.pairs {
            field[s] = field[m];
        }
    }
}

/// Pairs right-edge vertices with left-edge vertices and top with bottom; the
/// four corners collapse onto the origin corner.
pub fn build_periodic_map(mesh: &Mesh) -> Result<PeriodicMap> {
    let near = |a: f64, b: f64| (a - b).abs() <= COORD_TOL;
    let mut left: Vec<(f64, usize)> = Vec::new();
    let mut bottom: Vec<(f64, usize)> = Vec::new();
    let mut origin = None;
    for (v, p) in mesh.vertices.iter().enumerate() {
        if near(p[0], 0.0) {
            left.push((p[1], v));
        }
        if near(p[1], 0.0) {
            bottom.push((p[0], v));
        }
        if near(p[0], 0.0) && near(p[1], 0.0) {
            origin = Some(v);
        }
    }
    let origin = origin.ok_or_else(|| Error::Pairing {
        vertex: usize::MAX,
        x: 0.0,
        y: 0.0,
    })?;
    left.sort_by(|a, b| a.0.total_cmp(&b.0));
    bottom.sort_by(|a, b| a.0.total_cmp(&b.0));

    let find = |list: &[(f64, usize)], key: f64| -> Option<usize> {
        let i = list.partition_point(|e| e.0 < key - COORD_TOL);
        list.get(i).filter(|e| near(e.0, key)).map(|e| e.1)
    };

    let mut master: Vec<usize> = (0..mesh.num_vertices()).collect();
    let mut pairs = Vec::new();
    for (v, p) in mesh.vertices.iter().enumerate() {
        let (x0, x1) = (near(p[0], 0.0), near(p[0], 1.0));
        let (y0, y1) = (near(p[1], 0.0), near(p[1], 1.0));
        let corner = (x0 || x1) && (y0 || y1);
        let target = if corner {
            if v == origin {
                continue;
            }
            Some(origin)
        } else if x1 {
            find(&left, p[1])
        } else if y1 {
            find(&bottom, p[0])
        } else {
            continue;
        };
        let m = target.ok_or(Error::Pairing {
            vertex: v,
            x: p[0],
            y: p[1],
        })?;
        master[v] = m;
        pairs.push((v, m));
    }
    Ok(PeriodicMap { master, pairs })
}
