//! Small CSV formats shared by the CLI and the study harness. Floats are
//! written in shortest round-trip form so that re-reading is bit-exact.

use std::fmt::Write as _;

use crate::eps::EnergyRecord;
use crate::error::{Error, Result};
use crate::homogenize::HomogenizedData;

pub const Q_MATRIX_HEADER: &str = "q11,q12,q21,q22,delta,area_fluid,hole_perimeter,formula_discrepancy";
pub const ENERGY_HEADER: &str = "time,h_norm_sq,grad_term,kappa_term,surface_grad_term,g_term,residual";

pub fn q_matrix_csv(data: &HomogenizedData) -> String {
    let q = &data.q;
    format!(
        "{Q_MATRIX_HEADER}\n{},{},{},{},{},{},{},{}\n",
        q[0][0],
        q[0][1],
        q[1][0],
        q[1][1],
        data.delta,
        data.area_fluid,
        data.hole_perimeter,
        data.max_discrepancy()
    )
}

/// Parses the first data row of a `q_matrix.csv`. The per-entry discrepancy
/// is not stored, so every entry receives the recorded maximum.
pub fn parse_q_matrix_csv(text: &str) -> Result<HomogenizedData> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    match lines.next() {
        Some(h) if h.trim() == Q_MATRIX_HEADER => {}
        other => {
            return Err(Error::parse(
                "q_matrix header",
                format!("expected `{Q_MATRIX_HEADER}`, found {:?}", other.unwrap_or("")),
            ))
        }
    }
    let row = lines
        .next()
        .ok_or_else(|| Error::parse("q_matrix", "missing data row"))?;
    let v: Vec<f64> = row
        .split(',')
        .enumerate()
        .map(|(k, s)| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::parse(format!("q_matrix column {}", k + 1), e.to_string()))
        })
        .collect::<Result<_>>()?;
    if v.len() != 8 {
        return Err(Error::parse("q_matrix", format!("expected 8 columns, got {}", v.len())));
    }
    Ok(HomogenizedData {
        q: [[v[0], v[1]], [v[2], v[3]]],
        delta: v[4],
        area_fluid: v[5],
        hole_perimeter: v[6],
        discrepancy: [[v[7]; 2]; 2],
    })
}

pub fn energy_csv(trace: &[EnergyRecord]) -> String {
    let mut s = String::from(ENERGY_HEADER);
    s.push('\n');
    for r in trace {
        let _ = write!(
            s,
            "{},{},{},{},{},{},",
            r.time, r.h_norm_sq, r.grad_term, r.kappa_term, r.surface_grad_term, r.g_term
        );
        if let Some(res) = r.residual {
            let _ = write!(s, "{res}");
        }
        s.push('\n');
    }
    s
}
