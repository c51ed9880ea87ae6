//! Elimination of periodic, homogeneous Dirichlet and pinned dofs.
//!
//! A constrained system is `R^T A R x = R^T b`, where `R` maps reduced
//! unknowns to full vertex values: slaves copy their master and eliminated
//! dofs are zero.

use crate::error::{Error, Result};
use crate::fem::sparse::{SparseOperator, TripletBuilder};
use crate::mesh::PeriodicMap;

#[derive(Debug, Clone, Default)]
pub struct ConstraintSet {
    periodic: Option<PeriodicMap>,
    dirichlet: Vec<usize>,
    pinned: Vec<usize>,
}

impl ConstraintSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn periodic(mut self, map: PeriodicMap) -> Self {
        self.periodic = Some(map);
        self
    }

    pub fn dirichlet_zero(mut self, dofs: impl IntoIterator<Item = usize>) -> Self {
        self.dirichlet.extend(dofs);
        self
    }

    /// Fixes a single dof to zero, removing the constant kernel of a pure
    /// Neumann or periodic problem.
    pub fn pinned(mut self, dof: usize) -> Self {
        self.pinned.push(dof);
        self
    }

    pub fn periodic_map(&self) -> Option<&PeriodicMap> {
        self.periodic.as_ref()
    }

    pub fn dof_map(&self, dim: usize) -> Result<DofMap> {
        if let Some(map) = &self.periodic {
            if map.num_vertices() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: map.num_vertices(),
                });
            }
        }
        let master = |v: usize| self.periodic.as_ref().map_or(v, |m| m.master_of(v));
        let mut eliminated = vec![false; dim];
        for &d in self.dirichlet.iter().chain(&self.pinned) {
            if d >= dim {
                return Err(Error::ConstraintIndex { dof: d, dim });
            }
            eliminated[master(d)] = true;
        }
        // A pin is only meaningful on a dof that is otherwise free.
        for &p in &self.pinned {
            if self.dirichlet.iter().any(|&d| master(d) == master(p)) {
                return Err(Error::ConstraintConflict(p));
            }
        }
        let mut index = vec![None; dim];
        let mut reduced = 0;
        for v in 0..dim {
            if master(v) == v && !eliminated[v] {
                index[v] = Some(reduced);
                reduced += 1;
            }
        }
        for v in 0..dim {
            let m = master(v);
            if m != v {
                index[v] = index[m];
            }
        }
        Ok(DofMap { index, reduced })
    }
}

/// Full vertex index -> reduced unknown (or `None` when eliminated).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DofMap {
    index: Vec<Option<usize>>,
    reduced: usize,
}

impl DofMap {
    pub fn full_dim(&self) -> usize {
        self.index.len()
    }

    pub fn reduced_dim(&self) -> usize {
        self.reduced
    }

    pub fn index(&self, v: usize) -> Option<usize> {
        self.index[v]
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.index.len() {
            return Err(Error::DimensionMismatch {
                expected: self.index.len(),
                got: len,
            });
        }
        Ok(())
    }

    /// `R^T A R`.
    pub fn reduce_operator(&self, a: &SparseOperator) -> Result<SparseOperator> {
        self.check(a.dim())?;
        let mut b = TripletBuilder::with_capacity(self.reduced, a.nnz());
        for (i, j, v) in a.triplets() {
            if let (Some(ri), Some(rj)) = (self.index[i], self.index[j]) {
                b.add(ri, rj, v);
            }
        }
        Ok(b.build())
    }

    /// `R^T b`.
    pub fn reduce_vector(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.check(b.len())?;
        let mut r = vec![0.0; self.reduced];
        for (v, &bv) in b.iter().enumerate() {
            if let Some(k) = self.index[v] {
                r[k] += bv;
            }
        }
        Ok(r)
    }

    /// Restricts a full field to the reduced unknowns by sampling the
    /// representative vertex of each unknown.
    pub fn restrict(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check(u.len())?;
        let mut r = vec![0.0; self.reduced];
        for v in (0..u.len()).rev() {
            if let Some(k) = self.index[v] {
                r[k] = u[v];
            }
        }
        Ok(r)
    }

    /// `R x`.
    pub fn expand(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.reduced);
        self.index.iter().map(|k| k.map_or(0.0, |k| x[k])).collect()
    }
}

/// Reduced operator, right-hand side and the map used to produce them.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub op: SparseOperator,
    pub rhs: Vec<f64>,
    pub map: DofMap,
}

pub fn apply_constraints(a: &SparseOperator, b: &[f64], c: &ConstraintSet) -> Result<ReducedSystem> {
    let map = c.dof_map(a.dim())?;
    Ok(ReducedSystem {
        op: map.reduce_operator(a)?,
        rhs: map.reduce_vector(b)?,
        map,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{assemble_bulk_mass, assemble_bulk_stiffness};
    use crate::mesh::{build_cell_mesh, build_periodic_map, CellGeometry};

    #[test]
    fn periodic_reduction_counts() {
        let mesh = build_cell_mesh(&CellGeometry::new(8, 0.0).unwrap()).unwrap();
        let map = build_periodic_map(&mesh).unwrap();
        let c = ConstraintSet::new().periodic(map);
        let dm = c.dof_map(mesh.num_vertices()).unwrap();
        assert_eq!(dm.reduced_dim(), 64);
        let pinned = ConstraintSet::new()
            .periodic(build_periodic_map(&mesh).unwrap())
            .pinned(40);
        assert_eq!(pinned.dof_map(81).unwrap().reduced_dim(), 63);
    }

    #[test]
    fn periodic_stiffness_keeps_constants_in_kernel() {
        let mesh = build_cell_mesh(&CellGeometry::new(8, 0.25).unwrap()).unwrap();
        let c = ConstraintSet::new().periodic(build_periodic_map(&mesh).unwrap());
        let k = assemble_bulk_stiffness(&mesh).unwrap();
        let m = assemble_bulk_mass(&mesh).unwrap();
        let dm = c.dof_map(mesh.num_vertices()).unwrap();
        let kr = dm.reduce_operator(&k).unwrap();
        let mr = dm.reduce_operator(&m).unwrap();
        assert!(kr.row_sums().iter().all(|s| s.abs() < 1e-12));
        assert!((mr.total_sum() - m.total_sum()).abs() < 1e-13);
        assert!(kr.max_asymmetry() <= 1e-12);
    }

    #[test]
    fn reduce_then_expand_is_consistent() {
        let mesh = build_cell_mesh(&CellGeometry::new(8, 0.0).unwrap()).unwrap();
        let map = build_periodic_map(&mesh).unwrap();
        let dm = ConstraintSet::new().periodic(map.clone()).dof_map(81).unwrap();
        let x: Vec<f64> = (0..dm.reduced_dim()).map(|k| k as f64).collect();
        let u = dm.expand(&x);
        for &(s, m) in map.pairs() {
            assert_eq!(u[s], u[m]);
        }
        assert_eq!(dm.restrict(&u).unwrap(), x);
        // (R x) . b == x . (R^T b)
        let b: Vec<f64> = (0..81).map(|v| (v as f64).sin()).collect();
        let lhs: f64 = u.iter().zip(&b).map(|(a, b)| a * b).sum();
        let rb = dm.reduce_vector(&b).unwrap();
        let rhs: f64 = x.iter().zip(&rb).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn constraint_errors() {
        assert!(matches!(
            ConstraintSet::new().pinned(10).dof_map(5),
            Err(Error::ConstraintIndex { dof: 10, dim: 5 })
        ));
        assert!(matches!(
            ConstraintSet::new().dirichlet_zero([1, 2]).pinned(2).dof_map(5),
            Err(Error::ConstraintConflict(2))
        ));
        let mesh = build_cell_mesh(&CellGeometry::new(4, 0.0).unwrap()).unwrap();
        let c = ConstraintSet::new().periodic(build_periodic_map(&mesh).unwrap());
        assert!(c.dof_map(7).is_err());
    }

    #[test]
    fn dirichlet_on_slave_eliminates_master() {
        let mesh = build_cell_mesh(&CellGeometry::new(4, 0.0).unwrap()).unwrap();
        let map = build_periodic_map(&mesh).unwrap();
        let (s, m) = map.pairs()[0];
        let dm = ConstraintSet::new()
            .periodic(map)
            .dirichlet_zero([s])
            .dof_map(25)
            .unwrap();
        assert_eq!(dm.index(s), None);
        assert_eq!(dm.index(m), None);
        assert_eq!(dm.reduced_dim(), 15);
    }
}
