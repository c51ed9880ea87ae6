//! End-to-end convergence studies: one cell solve and one homogenized run per
//! `delta`, one perforated run per `(delta, eps)`, and the final-time error
//! between them on the perforated domain.

mod config;
mod report;

use rayon::prelude::*;

pub use config::{
    eps_to_m, load_config, load_eps_config, load_limit_config, load_validate_g_config, parse_study_config,
    EpsConfigFile, LimitConfigFile, StudyConfig, StudyConfigFile, ValidateGConfig, ValidateGConfigFile,
};
pub use report::{export_report, summary_text, ConvergenceReport, DeltaResult, StudyRow, CONVERGENCE_HEADER};

use crate::eps::{init_state, run_with, EpsOperators};
use crate::error::Result;
use crate::fem::interpolate_p1;
use crate::homogenize::{homogenize, homogenize_neumann, HomogenizedData};
use crate::limit::{run_limit, LimitRun};
use crate::mesh::{build_cell_mesh, mesh_metrics, tile_domain_mesh, Mesh};

/// Which assembly path the study runs through.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pipeline {
    Standard,
    /// `delta = 0` only, with no tangential operator assembled anywhere.
    SurfaceFree,
}

struct DeltaSetup {
    data: HomogenizedData,
    limit: LimitRun,
}

fn setup_delta(config: &StudyConfig, cell: &Mesh, delta: f64, pipeline: Pipeline) -> Result<DeltaSetup> {
    let data = match pipeline {
        Pipeline::Standard => homogenize(cell, delta, false)?.0,
        Pipeline::SurfaceFree => homogenize_neumann(cell)?,
    };
    let limit = run_limit(&config.limit_spec(&data))?;
    Ok(DeltaSetup { data, limit })
}

fn run_case(
    config: &StudyConfig,
    cell: &Mesh,
    setup: &DeltaSetup,
    delta: f64,
    m: usize,
    pipeline: Pipeline,
) -> Result<StudyRow> {
    let spec = config.eps_spec(delta, m);
    spec.validate()?;
    let mesh = tile_domain_mesh(cell, m)?;
    let ops = match pipeline {
        Pipeline::Standard => EpsOperators::new(mesh, spec.eps())?,
        Pipeline::SurfaceFree => EpsOperators::surface_free(mesh, spec.eps())?,
    };
    let init = init_state(spec.u0, &ops)?;
    let run = run_with(
        &ops,
        init,
        spec.t_final,
        spec.max_step(),
        delta,
        spec.kappa,
        Some(&spec.g),
        spec.scheme,
    )?;
    let limit = interpolate_p1(&setup.limit.operators.mesh, &setup.limit.state.u, &ops.mesh)?;
    let diff: Vec<f64> = run.state.u.iter().zip(&limit).map(|(a, b)| a - b).collect();
    Ok(StudyRow {
        delta,
        m,
        error_l2: Some(ops.m_bulk.quadratic(&diff).sqrt()),
        hnorm_max: Some(run.hnorm_max()),
        volume_fraction: Some(mesh_metrics(&ops.mesh).area_fluid),
        status: None,
    })
}

fn study(config: &StudyConfig, deltas: &[f64], pipeline: Pipeline, parallel: bool) -> Result<ConvergenceReport> {
    let cell = build_cell_mesh(&config.cell)?;
    let cell_metrics = mesh_metrics(&cell);

    let setups: Vec<Result<DeltaSetup>> = if parallel {
        deltas
            .par_iter()
            .map(|&d| setup_delta(config, &cell, d, pipeline))
            .collect()
    } else {
        deltas
            .iter()
            .map(|&d| setup_delta(config, &cell, d, pipeline))
            .collect()
    };

    let cases: Vec<(usize, usize)> = (0..deltas.len())
        .flat_map(|k| config.ms.iter().map(move |&m| (k, m)))
        .collect();
    let one = |&(k, m): &(usize, usize)| -> StudyRow {
        let delta = deltas[k];
        let result = setups[k]
            .as_ref()
            .map_err(|e| e.to_string())
            .and_then(|s| run_case(config, &cell, s, delta, m, pipeline).map_err(|e| e.to_string()));
        result.unwrap_or_else(|reason| StudyRow::failed(delta, m, reason))
    };
    let rows: Vec<StudyRow> = if parallel {
        cases.par_iter().map(one).collect()
    } else {
        cases.iter().map(one).collect()
    };

    let per_delta = deltas
        .iter()
        .zip(setups)
        .map(|(&delta, s)| match s {
            Ok(s) => DeltaResult {
                delta,
                q: Some(s.data),
                limit_l2: Some(s.limit.l2_norm()),
                failure: None,
            },
            Err(e) => DeltaResult {
                delta,
                q: None,
                limit_l2: None,
                failure: Some(e.to_string()),
            },
        })
        .collect();
    Ok(ConvergenceReport {
        cell_area_fluid: cell_metrics.area_fluid,
        cell_hole_perimeter: cell_metrics.hole_perimeter_total,
        config: config.clone(),
        rows,
        per_delta,
    })
}

/// Runs every `(delta, eps)` case of `config`. Per-case failures are recorded
/// in the report; only an invalid cell geometry aborts the study. Cases run
/// on the rayon pool when `parallel` is set; the report is identical either
/// way.
pub fn run_convergence_study(config: &StudyConfig, parallel: bool) -> Result<ConvergenceReport> {
    study(config, &config.deltas, Pipeline::Standard, parallel)
}

/// The `delta = 0` column computed by the surface-free path: classical
/// Neumann correctors and no tangential operator on the holes.
pub fn run_surface_free_column(config: &StudyConfig, parallel: bool) -> Result<ConvergenceReport> {
    study(config, &[0.0], Pipeline::SurfaceFree, parallel)
}
