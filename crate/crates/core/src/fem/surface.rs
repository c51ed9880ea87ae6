//! P1 forms along hole boundary chains.
//!
//! On a straight edge with unit tangent `t` the tangential gradient of a P1
//! trace is `(d/ds) psi t`, and the projection of a constant vector `e` onto
//! the tangent line is `(e . t) t`. All forms below are exact for P1 data.

use crate::error::{Error, Result};
use crate::fem::sparse::{SparseOperator, TripletBuilder};
use crate::mesh::BoundaryChain;

fn check_chains(chains: &[BoundaryChain], dim: usize) -> Result<()> {
    for (id, chain) in chains.iter().enumerate() {
        if chain.num_edges() < 3 {
            return Err(Error::InvalidChain(format!("chain {id} is not closed")));
        }
        if let Some(&v) = chain.vertices.iter().find(|&&v| v >= dim) {
            return Err(Error::InvalidChain(format!(
                "chain {id} refers to dof {v} outside dimension {dim}"
            )));
        }
        if let Some(k) = chain.lengths.iter().position(|&h| !(h > 0.0)) {
            return Err(Error::InvalidChain(format!("chain {id} edge {k} has zero length")));
        }
    }
    Ok(())
}

/// `(grad_G psi, grad_G phi)` summed over all chains: `(1/h)[[1,-1],[-1,1]]`
/// per edge.
pub fn assemble_surface_stiffness(chains: &[BoundaryChain], dim: usize) -> Result<SparseOperator> {
    check_chains(chains, dim)?;
    let mut b = TripletBuilder::new(dim);
    for chain in chains {
        for k in 0..chain.num_edges() {
            let (a, c) = chain.edge(k);
            let w = 1.0 / chain.lengths[k];
            b.add(a, a, w);
            b.add(a, c, -w);
            b.add(c, a, -w);
            b.add(c, c, w);
        }
    }
    Ok(b.build())
}

/// `(psi, phi)` on the chains: `(h/6)[[2,1],[1,2]]` per edge.
pub fn assemble_surface_mass(chains: &[BoundaryChain], dim: usize) -> Result<SparseOperator> {
    check_chains(chains, dim)?;
    let mut b = TripletBuilder::new(dim);
    for chain in chains {
        for k in 0..chain.num_edges() {
            let (a, c) = chain.edge(k);
            let h = chain.lengths[k];
            b.add(a, a, h / 3.0);
            b.add(a, c, h / 6.0);
            b.add(c, a, h / 6.0);
            b.add(c, c, h / 3.0);
        }
    }
    Ok(b.build())
}

/// Vertex-lumped surface mass: half of each adjacent edge length.
pub fn assemble_surface_lumped_mass(chains: &[BoundaryChain], dim: usize) -> Result<Vec<f64>> {
    check_chains(chains, dim)?;
    let mut d = vec![0.0; dim];
    for chain in chains {
        for k in 0..chain.num_edges() {
            let (a, c) = chain.edge(k);
            d[a] += 0.5 * chain.lengths[k];
            d[c] += 0.5 * chain.lengths[k];
        }
    }
    Ok(d)
}

/// `int (P_G e) . grad_G phi ds` for every hat function: each edge adds
/// `e . t` to its end vertex and subtracts it from its start vertex.
pub fn assemble_surface_direction_load(chains: &[BoundaryChain], dim: usize, direction: [f64; 2]) -> Result<Vec<f64>> {
    check_chains(chains, dim)?;
    let mut load = vec![0.0; dim];
    for chain in chains {
        for k in 0..chain.num_edges() {
            let (a, c) = chain.edge(k);
            let t = chain.tangents[k];
            let et = direction[0] * t[0] + direction[1] * t[1];
            load[c] += et;
            load[a] -= et;
        }
    }
    Ok(load)
}

/// Projection load for the canonical basis vector `e_axis`.
pub fn assemble_surface_projection_load(chains: &[BoundaryChain], dim: usize, axis: usize) -> Result<Vec<f64>> {
    let mut e = [0.0; 2];
    *e.get_mut(axis)
        .ok_or_else(|| Error::InvalidChain(format!("axis {axis} out of range for two dimensions")))? = 1.0;
    assemble_surface_direction_load(chains, dim, e)
}
