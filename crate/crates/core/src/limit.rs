//! The homogenized problem on the unperforated unit square:
//! `c_t u_t - div(Q grad u) + c_k u + c_g g(u) = 0`, `u = 0` on the boundary.

use std::f64::consts::PI;

use serde::Serialize;

use crate::eps::{check_stability, step_count, EnergyRecord, Scheme, STEP_RTOL};
use crate::error::{Error, Result};
use crate::fem::{
    assemble_bulk_lumped_mass, assemble_bulk_mass, assemble_tensor_stiffness, conjugate_gradient, CgOptions,
    ConstraintSet, DofMap, SparseOperator, Tensor2,
};
use crate::homogenize::{min_eigenvalue, HomogenizedData};
use crate::initial::InitialDatum;
use crate::mesh::{build_cell_mesh, CellGeometry, Mesh};
use crate::nonlinearity::NonlinearitySpec;

/// Optional right-hand side, used only for manufactured-solution checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Forcing {
    None,
    /// Forcing that makes `exp(-t) sin(pi x) sin(pi y)` the exact solution.
    Manufactured,
}

/// `c_t = |Y*| + |dF|`, `c_k = kappa |Y*|`, `c_g = |dF|`, all with `|Y| = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitCoefficients {
    pub c_t: f64,
    pub c_kappa: f64,
    pub c_g: f64,
}

impl LimitCoefficients {
    pub fn new(area_fluid: f64, hole_perimeter: f64, kappa: f64) -> Self {
        Self {
            c_t: area_fluid + hole_perimeter,
            c_kappa: kappa * area_fluid,
            c_g: hole_perimeter,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitProblemSpec {
    pub q: Tensor2,
    pub area_fluid: f64,
    pub hole_perimeter: f64,
    pub kappa: f64,
    pub g: NonlinearitySpec,
    pub u0: InitialDatum,
    pub t_final: f64,
    /// Maximum step length; `None` selects `h^2/4`.
    pub tau: Option<f64>,
    /// Grid cells per side of the mesh of the square.
    pub n: usize,
    pub forcing: Forcing,
    pub scheme: Scheme,
}

impl LimitProblemSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn from_homogenized(
        data: &HomogenizedData,
        kappa: f64,
        g: NonlinearitySpec,
        u0: InitialDatum,
        t_final: f64,
        tau: Option<f64>,
        n: usize,
    ) -> Self {
        Self {
            q: data.q,
            area_fluid: data.area_fluid,
            hole_perimeter: data.hole_perimeter,
            kappa,
            g,
            u0,
            t_final,
            tau,
            n,
            forcing: Forcing::None,
            scheme: Scheme::Imex,
        }
    }

    pub fn coefficients(&self) -> LimitCoefficients {
        LimitCoefficients::new(self.area_fluid, self.hole_perimeter, self.kappa)
    }

    pub fn max_step(&self) -> f64 {
        self.tau.unwrap_or_else(|| 0.25 / (self.n * self.n) as f64)
    }

    pub fn validate(&self) -> Result<()> {
        check_tensor(&self.q)?;
        let c = self.coefficients();
        for (name, v) in [("area_fluid", self.area_fluid), ("kappa", self.kappa), ("c_t", c.c_t)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(name, format!("{v} must be positive")));
            }
        }
        if !(self.hole_perimeter >= 0.0 && self.hole_perimeter.is_finite()) {
            return Err(Error::config("hole_perimeter", "must be finite and >= 0"));
        }
        if self.n < 4 {
            return Err(Error::config("limit_n", "must be at least 4"));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::config("T", "must be finite and >= 0"));
        }
        if let Some(tau) = self.tau {
            if !(tau > 0.0 && tau.is_finite()) {
                return Err(Error::config("tau", format!("{tau} must be positive")));
            }
        }
        if self.forcing == Forcing::Manufactured && self.u0 != InitialDatum::SinSin {
            return Err(Error::config("u0_tag", "manufactured forcing needs u0 = sin-sin"));
        }
        match self.scheme {
            Scheme::Imex => check_stability(self.max_step(), self.g.l),
            Scheme::FullyImplicitLinear if self.g.linear_coefficient().is_none() => {
                Err(Error::config("scheme", "fully-implicit-linear needs a linear g"))
            }
            Scheme::FullyImplicitLinear => Ok(()),
        }
    }
}

fn check_tensor(q: &Tensor2) -> Result<()> {
    if q.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NotSpd(format!("non-finite tensor {q:?}")));
    }
    if (q[0][1] - q[1][0]).abs() > 1e-12 * q[0][0].abs().max(q[1][1].abs()).max(1.0) {
        return Err(Error::NotSpd(format!("tensor {q:?} is not symmetric")));
    }
    if !(min_eigenvalue(q) > 0.0) {
        return Err(Error::NotSpd(format!("tensor {q:?} is not positive-definite")));
    }
    Ok(())
}

/// The unperforated structured mesh of the unit square.
pub fn omega_mesh(n: usize) -> Result<Mesh> {
    build_cell_mesh(&CellGeometry::new(n, 0.0)?)
}

#[derive(Debug, Clone)]
pub struct LimitOperators {
    pub mesh: Mesh,
    pub a_q: SparseOperator,
    pub m: SparseOperator,
    pub m_lumped: Vec<f64>,
    pub dofs: DofMap,
}

pub fn assemble_limit_operators(mesh: Mesh, q: &Tensor2) -> Result<LimitOperators> {
    check_tensor(q)?;
    let dofs = ConstraintSet::new()
        .dirichlet_zero(mesh.outer_boundary.iter().copied())
        .dof_map(mesh.num_vertices())?;
    Ok(LimitOperators {
        a_q: assemble_tensor_stiffness(&mesh, q)?,
        m: assemble_bulk_mass(&mesh)?,
        m_lumped: assemble_bulk_lumped_mass(&mesh)?,
        dofs,
        mesh,
    })
}

/// Exact solution of the manufactured problem.
pub fn manufactured_solution(p: [f64; 2], t: f64) -> f64 {
    (-t).exp() * (PI * p[0]).sin() * (PI * p[1]).sin()
}

/// `c_t u_t - div(Q grad u) + c_k u + c_g g(u)` at the manufactured solution.
pub fn manufactured_forcing(spec: &LimitProblemSpec, p: [f64; 2], t: f64) -> f64 {
    let c = spec.coefficients();
    let q = &spec.q;
    let e = (-t).exp();
    let (sx, sy) = ((PI * p[0]).sin(), (PI * p[1]).sin());
    let (cx, cy) = ((PI * p[0]).cos(), (PI * p[1]).cos());
    let u = e * sx * sy;
    let div = -PI * PI * e * ((q[0][0] + q[1][1]) * sx * sy - (q[0][1] + q[1][0]) * cx * cy);
    -c.c_t * u - div + c.c_kappa * u + c.c_g * spec.g.eval(u)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitState {
    pub u: Vec<f64>,
    pub time: f64,
    pub step: usize,
}

fn record(ops: &LimitOperators, spec: &LimitProblemSpec, u: &[f64], time: f64) -> EnergyRecord {
    let c = spec.coefficients();
    let mass = ops.m.quadratic(u);
    EnergyRecord {
        time,
        h_norm_sq: c.c_t * mass,
        grad_term: ops.a_q.quadratic(u),
        kappa_term: c.c_kappa * mass,
        surface_grad_term: 0.0,
        g_term: c.c_g
            * ops
                .m_lumped
                .iter()
                .zip(u)
                .map(|(w, &s)| w * spec.g.eval(s) * s)
                .sum::<f64>(),
        residual: None,
    }
}

#[derive(Debug, Clone)]
pub struct LimitRun {
    pub operators: LimitOperators,
    pub state: LimitState,
    pub trace: Vec<EnergyRecord>,
    pub tau: f64,
}

impl LimitRun {
    pub fn l2_norm(&self) -> f64 {
        self.operators.m.quadratic(&self.state.u).sqrt()
    }
}

pub fn run_limit(spec: &LimitProblemSpec) -> Result<LimitRun> {
    spec.validate()?;
    let ops = assemble_limit_operators(omega_mesh(spec.n)?, &spec.q)?;
    run_limit_with(ops, spec)
}

/// Runs on preassembled operators (which must have been built with `spec.q`).
pub fn run_limit_with(ops: LimitOperators, spec: &LimitProblemSpec) -> Result<LimitRun> {
    let c = spec.coefficients();
    let (nsteps, tau) = step_count(spec.t_final, spec.max_step());
    let mut u = spec.u0.interpolate(&ops.mesh.vertices);
    for &v in &ops.mesh.outer_boundary {
        u[v] = 0.0;
    }
    let mut state = LimitState { u, time: 0.0, step: 0 };
    let mut trace = vec![record(&ops, spec, &state.u, 0.0)];
    if nsteps == 0 {
        return Ok(LimitRun {
            operators: ops,
            state,
            trace,
            tau,
        });
    }

    let time_op = ops.m.scaled(c.c_t);
    let mut terms = vec![(1.0, &time_op), (tau, &ops.a_q), (tau * c.c_kappa, &ops.m)];
    let implicit_g = SparseOperator::from_diagonal(&ops.m_lumped);
    if spec.scheme == Scheme::FullyImplicitLinear {
        let a = spec.g.linear_coefficient().expect("validated");
        terms.push((tau * c.c_g * a, &implicit_g));
    }
    let lhs = ops.dofs.reduce_operator(&SparseOperator::linear_combination(&terms)?)?;
    let opts = CgOptions {
        rel_tol: STEP_RTOL,
        max_iter: None,
    };

    for k in 0..nsteps {
        let t_next = if k + 1 == nsteps {
            spec.t_final
        } else {
            (k + 1) as f64 * tau
        };
        let mut rhs = time_op.apply(&state.u);
        if spec.scheme == Scheme::Imex {
            for (v, w) in ops.m_lumped.iter().enumerate() {
                rhs[v] -= tau * c.c_g * w * spec.g.eval(state.u[v]);
            }
        }
        if spec.forcing == Forcing::Manufactured {
            let f: Vec<f64> = ops
                .mesh
                .vertices
                .iter()
                .map(|&p| manufactured_forcing(spec, p, t_next))
                .collect();
            for (r, mf) in rhs.iter_mut().zip(ops.m.apply(&f)) {
                *r += tau * mf;
            }
        }
        let b = ops.dofs.reduce_vector(&rhs)?;
        let x0 = ops.dofs.restrict(&state.u)?;
        let out = conjugate_gradient(&lhs, &b, Some(&x0), &opts, |_, _| {})?;
        let next = LimitState {
            u: ops.dofs.expand(&out.solution),
            time: t_next,
            step: state.step + 1,
        };
        let mut rec = record(&ops, spec, &next.u, t_next);
        let h0 = trace.last().map_or(0.0, |r| r.h_norm_sq);
        rec.residual =
            Some((rec.h_norm_sq - h0) / (2.0 * (t_next - state.time)) + rec.grad_term + rec.kappa_term + rec.g_term);
        trace.push(rec);
        state = next;
    }
    Ok(LimitRun {
        operators: ops,
        state,
        trace,
        tau,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{assemble_bulk_stiffness, l2_error};
    use crate::homogenize::{homogenize, homogenize_neumann};
    use crate::mesh::mesh_metrics;

    fn spec(n: usize) -> LimitProblemSpec {
        LimitProblemSpec {
            q: [[1.2, 0.1], [0.1, 0.9]],
            area_fluid: 0.8,
            hole_perimeter: 1.5,
            kappa: 1.0,
            g: NonlinearitySpec::linear_plus_sine(),
            u0: InitialDatum::SinSin,
            t_final: 0.05,
            tau: None,
            n,
            forcing: Forcing::None,
            scheme: Scheme::Imex,
        }
    }

    #[test]
    fn tensor_operator_properties() {
        let mesh = omega_mesh(8).unwrap();
        let k = assemble_bulk_stiffness(&mesh).unwrap();
        let id = assemble_limit_operators(mesh.clone(), &[[1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert_eq!(id.a_q, k);
        let two = assemble_limit_operators(mesh.clone(), &[[2.0, 0.0], [0.0, 2.0]]).unwrap();
        for (i, j, v) in k.triplets() {
            assert!((two.a_q.get(i, j) - 2.0 * v).abs() <= 1e-12);
        }
        let off = assemble_limit_operators(mesh.clone(), &[[1.0, 0.4], [0.4, 1.0]]).unwrap();
        assert!(off.a_q.max_asymmetry() <= 1e-12);
        assert!(assemble_limit_operators(mesh.clone(), &[[1.0, 2.0], [2.0, 1.0]]).is_err());
        assert!(assemble_limit_operators(mesh, &[[1.0, 0.2], [0.1, 1.0]]).is_err());
    }

    #[test]
    fn zero_data_stays_zero() {
        let mut sp = spec(8);
        sp.u0 = InitialDatum::Zero;
        let out = run_limit(&sp).unwrap();
        assert!(out.state.u.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn linear_fully_implicit_decays_in_l2() {
        let mut sp = spec(8);
        sp.g = NonlinearitySpec::linear(1.0);
        sp.scheme = Scheme::FullyImplicitLinear;
        let out = run_limit(&sp).unwrap();
        assert!(out.trace.windows(2).all(|w| w[1].h_norm_sq <= w[0].h_norm_sq));
        assert!(out.trace[1..].iter().all(|r| r.residual.unwrap() <= 1e-10));
        assert!(out.operators.mesh.outer_boundary.iter().all(|&v| out.state.u[v] == 0.0));
    }

    fn mms_error(n: usize) -> f64 {
        let mut sp = spec(n);
        sp.forcing = Forcing::Manufactured;
        sp.t_final = 0.1;
        let out = run_limit(&sp).unwrap();
        l2_error(&out.operators.mesh, &out.state.u, |p| manufactured_solution(p, 0.1))
    }

    #[test]
    fn manufactured_solution_converges() {
        let (e8, e16) = (mms_error(8), mms_error(16));
        assert!((e8 / e16).log2() >= 1.8, "rate {}", (e8 / e16).log2());
    }

    #[test]
    fn coefficients_come_from_mesh_metrics() {
        let mesh = build_cell_mesh(&CellGeometry::new(16, 0.25).unwrap()).unwrap();
        let (data, _) = homogenize(&mesh, 1.0, false).unwrap();
        let sp = LimitProblemSpec::from_homogenized(
            &data,
            2.0,
            NonlinearitySpec::linear(1.0),
            InitialDatum::SinSin,
            0.1,
            None,
            8,
        );
        let metrics = mesh_metrics(&mesh);
        let c = sp.coefficients();
        assert!((c.c_t - (metrics.area_fluid + metrics.hole_perimeter_total)).abs() <= 1e-14);
        assert!((c.c_kappa - 2.0 * metrics.area_fluid).abs() <= 1e-14);
        assert!((c.c_g - metrics.hole_perimeter_total).abs() <= 1e-14);
    }

    #[test]
    fn delta_zero_system_matches_surface_free_pipeline() {
        let cell = build_cell_mesh(&CellGeometry::new(16, 0.25).unwrap()).unwrap();
        let qa = homogenize(&cell, 0.0, false).unwrap().0;
        let qb = homogenize_neumann(&cell).unwrap();
        let a = assemble_limit_operators(omega_mesh(8).unwrap(), &qa.q).unwrap();
        let b = assemble_limit_operators(omega_mesh(8).unwrap(), &qb.q).unwrap();
        for (i, j, v) in a.a_q.triplets() {
            assert!((b.a_q.get(i, j) - v).abs() <= 1e-10);
        }
    }

    #[test]
    fn manufactured_forcing_requires_matching_initial_datum() {
        let mut sp = spec(8);
        sp.forcing = Forcing::Manufactured;
        sp.u0 = InitialDatum::Bubble;
        assert!(sp.validate().is_err());
    }
}
