//! Periodic cell correctors and the homogenized tensor `Q`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fem::{
    apply_constraints, assemble_bulk_direction_load, assemble_bulk_mass, assemble_bulk_stiffness,
    assemble_surface_direction_load, assemble_surface_stiffness, conjugate_gradient, CgOptions, ConstraintSet,
    ReducedSystem, SparseOperator, Tensor2,
};
use crate::mesh::{build_periodic_map, mesh_metrics, Mesh, PeriodicMap};

/// Relative CG tolerance for the cell solves.
pub const CELL_RTOL: f64 = 1e-12;

/// Formula discrepancy above which the assembly is considered broken.
pub const MAX_FORMULA_DISCREPANCY: f64 = 1e-6;

fn axis_vector(axis: usize) -> Result<[f64; 2]> {
    match axis {
        0 => Ok([1.0, 0.0]),
        1 => Ok([0.0, 1.0]),
        _ => Err(Error::config("axis", format!("{axis} is not 0 or 1"))),
    }
}

/// Corrector `w_i` for the axis `e_i`: periodic with zero discrete mean.
#[derive(Debug, Clone)]
pub struct CellSolution {
    pub axis: usize,
    pub delta: f64,
    pub corrector: Vec<f64>,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomogenizedData {
    pub q: Tensor2,
    pub area_fluid: f64,
    pub hole_perimeter: f64,
    pub delta: f64,
    /// `|q_energy - q_flux|` per entry, relative to `max |q_energy|`.
    pub discrepancy: Tensor2,
}

impl HomogenizedData {
    pub fn max_discrepancy(&self) -> f64 {
        self.discrepancy.iter().flatten().copied().fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.q)
    }
}

pub fn min_eigenvalue(q: &Tensor2) -> f64 {
    let mean = 0.5 * (q[0][0] + q[1][1]);
    let half = 0.5 * (q[0][0] - q[1][1]);
    let off = 0.5 * (q[0][1] + q[1][0]);
    mean - half.hypot(off)
}

fn check_map(mesh: &Mesh, map: &PeriodicMap) -> Result<()> {
    if map.num_vertices() != mesh.num_vertices() {
        return Err(Error::DimensionMismatch {
            expected: mesh.num_vertices(),
            got: map.num_vertices(),
        });
    }
    Ok(())
}

/// First vertex away from the cell boundary, used to remove the constant
/// kernel of the periodic problem.
fn pin_vertex(mesh: &Mesh, map: &PeriodicMap) -> usize {
    (0..mesh.num_vertices())
        .find(|&v| !map.is_slave(v) && mesh.outer_boundary.binary_search(&v).is_err())
        .unwrap_or(0)
}

fn subtract_mean(mesh_mass: &SparseOperator, w: &mut [f64]) {
    let mw = mesh_mass.apply(w);
    let ones_m: f64 = mesh_mass.total_sum();
    let mean = mw.iter().sum::<f64>() / ones_m;
    for x in w.iter_mut() {
        *x -= mean;
    }
}

fn constrain_periodic(mesh: &Mesh, map: &PeriodicMap, op: &SparseOperator, rhs: &[f64]) -> Result<ReducedSystem> {
    let c = ConstraintSet::new().periodic(map.clone()).pinned(pin_vertex(mesh, map));
    apply_constraints(op, rhs, &c)
}

fn solve_periodic(
    mesh: &Mesh,
    map: &PeriodicMap,
    op: &SparseOperator,
    rhs: &[f64],
    axis: usize,
    delta: f64,
) -> Result<CellSolution> {
    let sys = constrain_periodic(mesh, map, op, rhs)?;
    let opts = CgOptions {
        rel_tol: CELL_RTOL,
        max_iter: None,
    };
    let out = conjugate_gradient(&sys.op, &sys.rhs, None, &opts, |_, _| {})?;
    let mut w = sys.map.expand(&out.solution);
    subtract_mean(&assemble_bulk_mass(mesh)?, &mut w);
    Ok(CellSolution {
        axis,
        delta,
        corrector: w,
        iterations: out.iterations,
    })
}

fn cell_operator(mesh: &Mesh, map: &PeriodicMap, delta: f64, axis: usize) -> Result<(SparseOperator, Vec<f64>)> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::config("delta", format!("{delta} must be finite and >= 0")));
    }
    check_map(mesh, map)?;
    let e = axis_vector(axis)?;
    let n = mesh.num_vertices();
    let k = assemble_bulk_stiffness(mesh)?;
    let ks = assemble_surface_stiffness(&mesh.chains, n)?;
    let op = SparseOperator::linear_combination(&[(1.0, &k), (delta, &ks)])?;
    let bulk = assemble_bulk_direction_load(mesh, e)?;
    let surf = assemble_surface_direction_load(&mesh.chains, n, e)?;
    let rhs: Vec<f64> = bulk.iter().zip(&surf).map(|(b, s)| -b - delta * s).collect();
    Ok((op, rhs))
}

/// The periodic, pinned linear system behind [`solve_cell_problem`], before
/// the mean is removed.
pub fn cell_system(mesh: &Mesh, map: &PeriodicMap, delta: f64, axis: usize) -> Result<ReducedSystem> {
    let (op, rhs) = cell_operator(mesh, map, delta, axis)?;
    constrain_periodic(mesh, map, &op, &rhs)
}

/// Solves `int grad w . grad v + delta int grad_G w . grad_G v =
/// - int e_i . grad v - delta int (P_G e_i) . grad_G v` over periodic `v`.
pub fn solve_cell_problem(mesh: &Mesh, map: &PeriodicMap, delta: f64, axis: usize) -> Result<CellSolution> {
    let (op, rhs) = cell_operator(mesh, map, delta, axis)?;
    solve_periodic(mesh, map, &op, &rhs, axis, delta)
}

/// Classical perforated Neumann cell problem, assembled without any
/// boundary-chain terms.
pub fn solve_cell_problem_neumann(mesh: &Mesh, map: &PeriodicMap, axis: usize) -> Result<CellSolution> {
    check_map(mesh, map)?;
    let e = axis_vector(axis)?;
    let k = assemble_bulk_stiffness(mesh)?;
    let rhs: Vec<f64> = assemble_bulk_direction_load(mesh, e)?.iter().map(|b| -b).collect();
    solve_periodic(mesh, map, &k, &rhs, axis, 0.0)
}

/// `int (e_a + grad w_a) . (e_b + grad w_b) + delta sum_edges h (e_a.t +
/// dw_a/ds)(e_b.t + dw_b/ds)`. Passing `None` for a corrector drops it.
fn pairing(mesh: &Mesh, delta: f64, a: ([f64; 2], Option<&[f64]>), b: ([f64; 2], Option<&[f64]>)) -> f64 {
    let mut bulk = 0.0;
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let area = mesh.triangle_area(t);
        let g = mesh.hat_gradients(t);
        let grad = |w: Option<&[f64]>| {
            let mut s = [0.0; 2];
            if let Some(w) = w {
                for k in 0..3 {
                    s[0] += w[tri[k]] * g[k][0];
                    s[1] += w[tri[k]] * g[k][1];
                }
            }
            s
        };
        let (ga, gb) = (grad(a.1), grad(b.1));
        let va = [a.0[0] + ga[0], a.0[1] + ga[1]];
        let vb = [b.0[0] + gb[0], b.0[1] + gb[1]];
        bulk += area * (va[0] * vb[0] + va[1] * vb[1]);
    }
    let mut surf = 0.0;
    if delta != 0.0 {
        for chain in &mesh.chains {
            for k in 0..chain.num_edges() {
                let (p, q) = chain.edge(k);
                let h = chain.lengths[k];
                let t = chain.tangents[k];
                let ds = |w: Option<&[f64]>| w.map_or(0.0, |w| (w[q] - w[p]) / h);
                let ta = a.0[0] * t[0] + a.0[1] * t[1] + ds(a.1);
                let tb = b.0[0] * t[0] + b.0[1] * t[1] + ds(b.1);
                surf += h * ta * tb;
            }
        }
    }
    bulk + delta * surf
}

/// `J(w) = int |e_i + grad w|^2 + delta int |P_G e_i + grad_G w|^2` for an
/// arbitrary nodal `w`.
pub fn cell_functional(mesh: &Mesh, delta: f64, axis: usize, w: &[f64]) -> Result<f64> {
    let e = axis_vector(axis)?;
    if w.len() != mesh.num_vertices() {
        return Err(Error::DimensionMismatch {
            expected: mesh.num_vertices(),
            got: w.len(),
        });
    }
    Ok(pairing(mesh, delta, (e, Some(w)), (e, Some(w))))
}

/// `J` at the corrector itself, equal to `q_ii |Y|`.
pub fn cell_energy(solution: &CellSolution, mesh: &Mesh) -> Result<f64> {
    cell_functional(mesh, solution.delta, solution.axis, &solution.corrector)
}

/// Energy-form `Q` with the flux form as a cross-check. `|Y| = 1`.
pub fn compute_homogenized_matrix(solutions: [&CellSolution; 2], mesh: &Mesh) -> Result<HomogenizedData> {
    let delta = solutions[0].delta;
    if solutions[1].delta != delta {
        return Err(Error::config(
            "delta",
            format!(
                "correctors computed at different delta ({delta} and {})",
                solutions[1].delta
            ),
        ));
    }
    for (i, s) in solutions.iter().enumerate() {
        if s.axis != i {
            return Err(Error::config("axis", format!("corrector {i} is for axis {}", s.axis)));
        }
        if s.corrector.len() != mesh.num_vertices() {
            return Err(Error::DimensionMismatch {
                expected: mesh.num_vertices(),
                got: s.corrector.len(),
            });
        }
    }
    let e = [axis_vector(0)?, axis_vector(1)?];
    let mut energy = [[0.0; 2]; 2];
    let mut flux = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let wi = Some(solutions[i].corrector.as_slice());
            let wj = Some(solutions[j].corrector.as_slice());
            energy[i][j] = pairing(mesh, delta, (e[i], wi), (e[j], wj));
            flux[i][j] = pairing(mesh, delta, (e[i], wi), (e[j], None));
        }
    }
    let scale = energy
        .iter()
        .flatten()
        .map(|v| v.abs())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut discrepancy = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            discrepancy[i][j] = (energy[i][j] - flux[i][j]).abs() / scale;
        }
    }
    let metrics = mesh_metrics(mesh);
    let data = HomogenizedData {
        q: energy,
        area_fluid: metrics.area_fluid,
        hole_perimeter: metrics.hole_perimeter_total,
        delta,
        discrepancy,
    };
    if data.max_discrepancy() > MAX_FORMULA_DISCREPANCY {
        return Err(Error::Inconsistent(data.max_discrepancy()));
    }
    if !(data.min_eigenvalue() > 0.0) {
        return Err(Error::NotSpd(format!("homogenized matrix {:?}", data.q)));
    }
    Ok(data)
}

/// Both correctors and `Q` for one cell mesh. The two cell solves run
/// concurrently when `parallel` is set.
pub fn homogenize(mesh: &Mesh, delta: f64, parallel: bool) -> Result<(HomogenizedData, [CellSolution; 2])> {
    let map = build_periodic_map(mesh)?;
    let (w0, w1) = if parallel {
        rayon::join(
            || solve_cell_problem(mesh, &map, delta, 0),
            || solve_cell_problem(mesh, &map, delta, 1),
        )
    } else {
        (
            solve_cell_problem(mesh, &map, delta, 0),
            solve_cell_problem(mesh, &map, delta, 1),
        )
    };
    let (w0, w1) = (w0?, w1?);
    let data = compute_homogenized_matrix([&w0, &w1], mesh)?;
    Ok((data, [w0, w1]))
}

/// `Q` from the surface-free path, for comparison with `delta = 0`.
pub fn homogenize_neumann(mesh: &Mesh) -> Result<HomogenizedData> {
    let map = build_periodic_map(mesh)?;
    let w0 = solve_cell_problem_neumann(mesh, &map, 0)?;
    let w1 = solve_cell_problem_neumann(mesh, &map, 1)?;
    compute_homogenized_matrix([&w0, &w1], mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_cell_mesh, CellGeometry};
    use rand::{Rng, SeedableRng};

    fn cell(n: usize, r: f64) -> Mesh {
        build_cell_mesh(&CellGeometry::new(n, r).unwrap()).unwrap()
    }

    #[test]
    fn no_hole_gives_identity() {
        let mesh = cell(8, 0.0);
        let (q, ws) = homogenize(&mesh, 1.0, false).unwrap();
        for w in &ws {
            assert!(w.corrector.iter().all(|v| v.abs() < 1e-10));
            assert!((cell_energy(w, &mesh).unwrap() - 1.0).abs() < 1e-12);
        }
        for i in 0..2 {
            for j in 0..2 {
                let id = if i == j { 1.0 } else { 0.0 };
                assert!((q.q[i][j] - id).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn corrector_postconditions() {
        let mesh = cell(16, 0.25);
        let map = build_periodic_map(&mesh).unwrap();
        let m = assemble_bulk_mass(&mesh).unwrap();
        for axis in 0..2 {
            let s = solve_cell_problem(&mesh, &map, 0.7, axis).unwrap();
            let mean: f64 = m.apply(&s.corrector).iter().sum::<f64>() / m.total_sum();
            let scale = s.corrector.iter().map(|v| v.abs()).fold(0.0, f64::max);
            assert!(mean.abs() <= 1e-12 * scale);
            for &(sl, ma) in map.pairs() {
                assert_eq!(s.corrector[sl], s.corrector[ma]);
            }
        }
    }

    #[test]
    fn disk_symmetry_and_formula_agreement() {
        let mesh = cell(16, 0.25);
        let (q, _) = homogenize(&mesh, 1.0, true).unwrap();
        assert!((q.q[0][1] - q.q[1][0]).abs() <= 1e-10);
        assert!(q.q[0][1].abs() <= 1e-10);
        assert!((q.q[0][0] - q.q[1][1]).abs() <= 1e-8);
        assert!(q.max_discrepancy() <= 1e-8);
        assert!(q.min_eigenvalue() > 0.0);
    }

    #[test]
    fn delta_zero_matches_surface_free_path() {
        let mesh = cell(16, 0.25);
        let map = build_periodic_map(&mesh).unwrap();
        for axis in 0..2 {
            let a = solve_cell_problem(&mesh, &map, 0.0, axis).unwrap();
            let b = solve_cell_problem_neumann(&mesh, &map, axis).unwrap();
            let diff = a
                .corrector
                .iter()
                .zip(&b.corrector)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            assert!(diff <= 1e-9, "axis {axis}: {diff}");
        }
        let qa = homogenize(&mesh, 0.0, false).unwrap().0;
        let qb = homogenize_neumann(&mesh).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((qa.q[i][j] - qb.q[i][j]).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn q_diagonal_is_the_cell_energy() {
        let mesh = cell(16, 0.2);
        let (q, ws) = homogenize(&mesh, 0.5, false).unwrap();
        for (i, w) in ws.iter().enumerate() {
            assert!((cell_energy(w, &mesh).unwrap() - q.q[i][i]).abs() <= 1e-12);
        }
    }

    #[test]
    fn corrector_minimizes_the_cell_functional() {
        let mesh = cell(12, 0.25);
        let map = build_periodic_map(&mesh).unwrap();
        let m = assemble_bulk_mass(&mesh).unwrap();
        let s = solve_cell_problem(&mesh, &map, 1.0, 0).unwrap();
        let j0 = cell_energy(&s, &mesh).unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..10 {
            let mut p: Vec<f64> = (0..mesh.num_vertices()).map(|_| rng.gen_range(-0.05..0.05)).collect();
            map.resolve_field(&mut p);
            subtract_mean(&m, &mut p);
            let w: Vec<f64> = s.corrector.iter().zip(&p).map(|(a, b)| a + b).collect();
            assert!(j0 <= cell_functional(&mesh, 1.0, 0, &w).unwrap());
        }
    }

    #[test]
    fn q11_grows_with_delta() {
        let mesh = cell(16, 0.25);
        let qs: Vec<f64> = [0.0, 0.5, 1.0, 2.0]
            .iter()
            .map(|&d| homogenize(&mesh, d, false).unwrap().0.q[0][0])
            .collect();
        assert!(qs.windows(2).all(|w| w[1] >= w[0]), "{qs:?}");
    }

    #[test]
    fn invalid_inputs() {
        let mesh = cell(8, 0.25);
        let map = build_periodic_map(&mesh).unwrap();
        assert!(solve_cell_problem(&mesh, &map, -1.0, 0).is_err());
        assert!(solve_cell_problem(&mesh, &map, 1.0, 2).is_err());
        let other = build_periodic_map(&cell(4, 0.0)).unwrap();
        assert!(solve_cell_problem(&mesh, &other, 1.0, 0).is_err());
    }
}
