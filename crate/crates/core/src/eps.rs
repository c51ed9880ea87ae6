//! Time stepping of the perforated problem with dynamical boundary
//! conditions on the hole boundaries.
//!
//! Bulk and boundary unknowns share vertices, so the trace on the holes is
//! the restriction of the nodal field. Surface operators are assembled from
//! physical edge lengths of the tiled mesh and multiplied by the explicit
//! `eps` of the weak form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{
    assemble_bulk_mass, assemble_bulk_stiffness, assemble_surface_lumped_mass, assemble_surface_mass,
    assemble_surface_stiffness, conjugate_gradient, CgOptions, ConstraintSet, DofMap, SparseOperator,
};
use crate::initial::InitialDatum;
use crate::mesh::{build_cell_mesh, tile_domain_mesh, CellGeometry, Mesh};
use crate::nonlinearity::NonlinearitySpec;

/// Relative CG tolerance for a time step.
pub const STEP_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Linear part implicit, `g` explicit.
    Imex,
    /// Everything implicit; only for `g(s) = a s`.
    FullyImplicitLinear,
}

impl Scheme {
    pub fn from_tag(tag: &str, key: &str) -> Result<Self> {
        match tag {
            "imex" => Ok(Self::Imex),
            "fully-implicit-linear" => Ok(Self::FullyImplicitLinear),
            _ => Err(Error::config(
                key,
                format!("unknown scheme `{tag}` (expected imex or fully-implicit-linear)"),
            )),
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Self::Imex => "imex",
            Self::FullyImplicitLinear => "fully-implicit-linear",
        }
    }
}

/// Number of uniform steps covering `[0, t_final]` with steps no longer than
/// `tau`, and the resulting step length.
pub fn step_count(t_final: f64, tau: f64) -> (usize, f64) {
    if t_final <= 0.0 {
        return (0, tau);
    }
    let n = ((t_final / tau) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    (n, t_final / n as f64)
}

/// Checks the explicit-`g` stability gate `tau * l <= 1/2`.
pub fn check_stability(tau: f64, l: f64) -> Result<()> {
    if tau * l > 0.5 {
        return Err(Error::Stability(tau * l));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsProblemSpec {
    /// `eps = 1/m`.
    pub m: usize,
    pub cell_n: usize,
    pub radius: f64,
    pub delta: f64,
    pub kappa: f64,
    pub g: NonlinearitySpec,
    pub u0: InitialDatum,
    pub t_final: f64,
    /// Maximum step length; `None` selects `h^2/4` of the tiled mesh.
    pub tau: Option<f64>,
    pub scheme: Scheme,
}

impl EpsProblemSpec {
    pub fn eps(&self) -> f64 {
        1.0 / self.m as f64
    }

    /// Grid spacing of the tiled mesh.
    pub fn mesh_spacing(&self) -> f64 {
        1.0 / (self.m * self.cell_n) as f64
    }

    pub fn max_step(&self) -> f64 {
        self.tau.unwrap_or_else(|| 0.25 * self.mesh_spacing().powi(2))
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::config("m", "must be at least 1"));
        }
        CellGeometry::new(self.cell_n, self.radius).map_err(|e| Error::config("radius", e.to_string()))?;
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(Error::config(
                "delta",
                format!("{} must be finite and >= 0", self.delta),
            ));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::config("kappa", format!("{} must be positive", self.kappa)));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::config("T", format!("{} must be finite and >= 0", self.t_final)));
        }
        if let Some(tau) = self.tau {
            if !(tau > 0.0 && tau.is_finite()) {
                return Err(Error::config("tau", format!("{tau} must be positive")));
            }
        }
        match self.scheme {
            Scheme::Imex => check_stability(self.max_step(), self.g.l),
            Scheme::FullyImplicitLinear if self.g.linear_coefficient().is_none() => Err(Error::config(
                "scheme",
                format!("fully-implicit-linear needs a linear g, got {}", self.g.kind.tag()),
            )),
            Scheme::FullyImplicitLinear => Ok(()),
        }
    }

    pub fn build_mesh(&self) -> Result<Mesh> {
        let cell = build_cell_mesh(&CellGeometry::new(self.cell_n, self.radius)?)?;
        tile_domain_mesh(&cell, self.m)
    }
}

/// Assembled operators on the tiled mesh, with homogeneous Dirichlet data on
/// the outer boundary.
#[derive(Debug, Clone)]
pub struct EpsOperators {
    pub mesh: Mesh,
    pub eps: f64,
    pub m_bulk: SparseOperator,
    pub a_bulk: SparseOperator,
    pub m_surf: SparseOperator,
    /// `None` for the surface-free path, where no tangential operator is
    /// assembled at all.
    pub a_surf: Option<SparseOperator>,
    pub m_surf_lumped: Vec<f64>,
    pub dofs: DofMap,
}

impl EpsOperators {
    pub fn new(mesh: Mesh, eps: f64) -> Result<Self> {
        let mut ops = Self::surface_free(mesh, eps)?;
        ops.a_surf = Some(assemble_surface_stiffness(&ops.mesh.chains, ops.mesh.num_vertices())?);
        Ok(ops)
    }

    pub fn surface_free(mesh: Mesh, eps: f64) -> Result<Self> {
        let n = mesh.num_vertices();
        let dofs = ConstraintSet::new()
            .dirichlet_zero(mesh.outer_boundary.iter().copied())
            .dof_map(n)?;
        Ok(Self {
            m_bulk: assemble_bulk_mass(&mesh)?,
            a_bulk: assemble_bulk_stiffness(&mesh)?,
            m_surf: assemble_surface_mass(&mesh.chains, n)?,
            a_surf: None,
            m_surf_lumped: assemble_surface_lumped_mass(&mesh.chains, n)?,
            eps,
            dofs,
            mesh,
        })
    }

    pub fn for_spec(spec: &EpsProblemSpec) -> Result<Self> {
        Self::new(spec.build_mesh()?, spec.eps())
    }

    /// `|u|^2 + eps |u|^2_G`.
    pub fn h_norm_sq(&self, u: &[f64]) -> f64 {
        self.m_bulk.quadratic(u) + self.eps * self.m_surf.quadratic(u)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpsState {
    /// Nodal values; entries on hole-boundary vertices are the trace.
    pub u: Vec<f64>,
    pub time: f64,
    pub step: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyRecord {
    pub time: f64,
    pub h_norm_sq: f64,
    pub grad_term: f64,
    pub kappa_term: f64,
    pub surface_grad_term: f64,
    pub g_term: f64,
    /// `None` for the initial record.
    pub residual: Option<f64>,
}

/// Nodal interpolation of `u0`; the Dirichlet vertices must already carry
/// zero up to `1e-12` and are then set to exactly zero.
pub fn init_state(u0: InitialDatum, ops: &EpsOperators) -> Result<EpsState> {
    let mut u = u0.interpolate(&ops.mesh.vertices);
    for &v in &ops.mesh.outer_boundary {
        if u[v].abs() > 1e-12 {
            return Err(Error::InitialBoundary(u[v]));
        }
        u[v] = 0.0;
    }
    Ok(EpsState { u, time: 0.0, step: 0 })
}

/// Energy terms at `u`; `g = None` means `g = 0`.
pub fn energy_terms(
    ops: &EpsOperators,
    u: &[f64],
    time: f64,
    delta: f64,
    kappa: f64,
    g: Option<&NonlinearitySpec>,
) -> EnergyRecord {
    let mass = ops.m_bulk.quadratic(u);
    let surface_grad_term = match &ops.a_surf {
        Some(a) if delta != 0.0 => ops.eps * delta * a.quadratic(u),
        _ => 0.0,
    };
    let g_term = g.map_or(0.0, |g| {
        ops.eps
            * ops
                .m_surf_lumped
                .iter()
                .zip(u)
                .filter(|(w, _)| **w != 0.0)
                .map(|(w, &s)| w * g.eval(s) * s)
                .sum::<f64>()
    });
    EnergyRecord {
        time,
        h_norm_sq: mass + ops.eps * ops.m_surf.quadratic(u),
        grad_term: ops.a_bulk.quadratic(u),
        kappa_term: kappa * mass,
        surface_grad_term,
        g_term,
        residual: None,
    }
}

/// Record at `after` with the discrete energy-identity residual
/// `(H(after) - H(before)) / (2 tau) + dissipation(after)`.
pub fn energy_residual(
    before: &EpsState,
    after: &EpsState,
    ops: &EpsOperators,
    delta: f64,
    kappa: f64,
    g: Option<&NonlinearitySpec>,
) -> EnergyRecord {
    let tau = after.time - before.time;
    let mut rec = energy_terms(ops, &after.u, after.time, delta, kappa, g);
    if tau > 0.0 {
        let h0 = ops.h_norm_sq(&before.u);
        rec.residual = Some(
            (rec.h_norm_sq - h0) / (2.0 * tau) + rec.grad_term + rec.kappa_term + rec.surface_grad_term + rec.g_term,
        );
    }
    rec
}

/// Factored-out step operator for a fixed step length.
#[derive(Debug, Clone)]
pub struct EpsStepper<'a> {
    ops: &'a EpsOperators,
    tau: f64,
    g: Option<NonlinearitySpec>,
    scheme: Scheme,
    /// `M + eps M_G`, full.
    time_op: SparseOperator,
    /// Reduced left-hand side.
    lhs: SparseOperator,
}

impl<'a> EpsStepper<'a> {
    pub fn new(
        ops: &'a EpsOperators,
        tau: f64,
        delta: f64,
        kappa: f64,
        g: Option<&NonlinearitySpec>,
        scheme: Scheme,
    ) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(Error::config("tau", format!("{tau} must be positive")));
        }
        let eps = ops.eps;
        let time_op = SparseOperator::linear_combination(&[(1.0, &ops.m_bulk), (eps, &ops.m_surf)])?;
        let mut terms = vec![(1.0, &time_op), (tau, &ops.a_bulk), (tau * kappa, &ops.m_bulk)];
        if let Some(a) = &ops.a_surf {
            terms.push((tau * eps * delta, a));
        }
        let implicit_g;
        match scheme {
            Scheme::Imex => {
                if let Some(g) = g {
                    check_stability(tau, g.l)?;
                }
            }
            Scheme::FullyImplicitLinear => {
                let a = match g {
                    None => 0.0,
                    Some(g) => g
                        .linear_coefficient()
                        .ok_or_else(|| Error::config("scheme", "fully-implicit-linear needs a linear g"))?,
                };
                implicit_g = SparseOperator::from_diagonal(&ops.m_surf_lumped);
                terms.push((tau * eps * a, &implicit_g));
            }
        }
        let full = SparseOperator::linear_combination(&terms)?;
        let lhs = ops.dofs.reduce_operator(&full)?;
        Ok(Self {
            ops,
            tau,
            g: g.cloned(),
            scheme,
            time_op,
            lhs,
        })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn step(&self, state: &EpsState) -> Result<EpsState> {
        let ops = self.ops;
        let mut rhs = self.time_op.apply(&state.u);
        if let (Scheme::Imex, Some(g)) = (self.scheme, &self.g) {
            let c = self.tau * ops.eps;
            for (v, w) in ops.m_surf_lumped.iter().enumerate() {
                if *w != 0.0 {
                    rhs[v] -= c * w * g.eval(state.u[v]);
                }
            }
        }
        let b = ops.dofs.reduce_vector(&rhs)?;
        let x0 = ops.dofs.restrict(&state.u)?;
        let opts = CgOptions {
            rel_tol: STEP_RTOL,
            max_iter: None,
        };
        let out = conjugate_gradient(&self.lhs, &b, Some(&x0), &opts, |_, _| {})?;
        Ok(EpsState {
            u: ops.dofs.expand(&out.solution),
            time: state.time + self.tau,
            step: state.step + 1,
        })
    }
}

#[derive(Debug, Clone)]
pub struct EpsRun {
    pub state: EpsState,
    /// Initial record followed by one record per step.
    pub trace: Vec<EnergyRecord>,
    pub tau: f64,
}

impl EpsRun {
    /// `max_n |(u^n, psi^n)|_H` including the initial state.
    pub fn hnorm_max(&self) -> f64 {
        self.trace.iter().map(|r| r.h_norm_sq).fold(0.0, f64::max).sqrt()
    }
}

/// Steps from `state` to `t_final` on preassembled operators.
#[allow(clippy::too_many_arguments)]
pub fn run_with(
    ops: &EpsOperators,
    initial: EpsState,
    t_final: f64,
    max_tau: f64,
    delta: f64,
    kappa: f64,
    g: Option<&NonlinearitySpec>,
    scheme: Scheme,
) -> Result<EpsRun> {
    let (nsteps, tau) = step_count(t_final - initial.time, max_tau);
    let mut trace = vec![energy_terms(ops, &initial.u, initial.time, delta, kappa, g)];
    if nsteps == 0 {
        return Ok(EpsRun {
            state: initial,
            trace,
            tau,
        });
    }
    let stepper = EpsStepper::new(ops, tau, delta, kappa, g, scheme)?;
    let mut state = initial;
    for k in 0..nsteps {
        let mut next = stepper.step(&state)?;
        if k + 1 == nsteps {
            next.time = t_final;
        }
        trace.push(energy_residual(&state, &next, ops, delta, kappa, g));
        state = next;
    }
    Ok(EpsRun { state, trace, tau })
}

pub fn run(spec: &EpsProblemSpec) -> Result<(EpsOperators, EpsRun)> {
    spec.validate()?;
    let ops = EpsOperators::for_spec(spec)?;
    let init = init_state(spec.u0, &ops)?;
    let out = run_with(
        &ops,
        init,
        spec.t_final,
        spec.max_step(),
        spec.delta,
        spec.kappa,
        Some(&spec.g),
        spec.scheme,
    )?;
    Ok((ops, out))
}
