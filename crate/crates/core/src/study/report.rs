use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::csv::q_matrix_csv;
use crate::error::{Error, Result};
use crate::homogenize::HomogenizedData;
use crate::study::StudyConfig;

pub const CONVERGENCE_HEADER: &str = "delta,eps,error_L2,hnorm_max,volume_fraction,status";

#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub delta: f64,
    /// `eps = 1/m`.
    pub m: usize,
    pub error_l2: Option<f64>,
    pub hnorm_max: Option<f64>,
    pub volume_fraction: Option<f64>,
    /// `None` on success, the failure reason otherwise.
    pub status: Option<String>,
}

impl StudyRow {
    pub fn failed(delta: f64, m: usize, reason: String) -> Self {
        Self {
            delta,
            m,
            error_l2: None,
            hnorm_max: None,
            volume_fraction: None,
            status: Some(reason),
        }
    }

    pub fn eps(&self) -> f64 {
        1.0 / self.m as f64
    }

    pub fn ok(&self) -> bool {
        self.status.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaResult {
    pub delta: f64,
    pub q: Option<HomogenizedData>,
    pub limit_l2: Option<f64>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub config: StudyConfig,
    /// `|Y*|_h` of the generating cell.
    pub cell_area_fluid: f64,
    pub cell_hole_perimeter: f64,
    /// Ordered by `delta` as configured, then by decreasing `eps`.
    pub rows: Vec<StudyRow>,
    pub per_delta: Vec<DeltaResult>,
}

impl ConvergenceReport {
    pub fn rows_for(&self, delta: f64) -> impl Iterator<Item = &StudyRow> {
        self.rows.iter().filter(move |r| r.delta == delta)
    }

    /// Errors of one `delta` column, in row order.
    pub fn errors_for(&self, delta: f64) -> Vec<Option<f64>> {
        self.rows_for(delta).map(|r| r.error_l2).collect()
    }

    /// Whether one `delta` column succeeded everywhere with `E(eps)` strictly
    /// decreasing as `eps` decreases.
    pub fn column_verdict(&self, delta: f64) -> bool {
        let errors = self.errors_for(delta);
        !errors.is_empty()
            && errors.iter().all(Option::is_some)
            && errors.windows(2).all(|w| w[1].unwrap() < w[0].unwrap())
    }

    pub fn all_rows_ok(&self) -> bool {
        self.rows.iter().all(StudyRow::ok)
    }

    pub fn verdict(&self) -> bool {
        self.all_rows_ok() && self.per_delta.iter().all(|d| self.column_verdict(d.delta))
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

fn status_field(status: &Option<String>) -> String {
    match status {
        None => "ok".to_owned(),
        Some(reason) => {
            let clean: String = reason
                .chars()
                .map(|c| if c == ',' || c == '\n' || c == '\r' { ';' } else { c })
                .collect();
            format!("failed: {clean}")
        }
    }
}

pub fn convergence_csv(report: &ConvergenceReport) -> String {
    let mut s = String::from(CONVERGENCE_HEADER);
    s.push('\n');
    for r in &report.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.delta,
            r.eps(),
            opt(r.error_l2),
            opt(r.hnorm_max),
            opt(r.volume_fraction),
            status_field(&r.status)
        );
    }
    s
}

pub fn delta_dir_name(delta: f64) -> String {
    format!("delta_{delta}")
}

pub fn summary_text(report: &ConvergenceReport) -> String {
    let c = &report.config;
    let mut s = String::new();
    let _ = writeln!(s, "perfhom convergence study");
    let _ = writeln!(
        s,
        "error metric: E(eps) = ||u_eps(T) - I u(T)||_L2(Omega_eps), measured on the perforated domain only"
    );
    let _ = writeln!(s, "cell: n = {}, radius = {}", c.cell.resolution, c.cell.hole_radius);
    let _ = writeln!(
        s,
        "|Y*|_h = {}, |dF|_h = {}",
        report.cell_area_fluid, report.cell_hole_perimeter
    );
    let _ = writeln!(
        s,
        "T = {}, kappa = {}, g = {} {:?}, u0 = {}, scheme = {}, tau = {}, limit_n = {}",
        c.t_final,
        c.kappa,
        c.g.kind.tag(),
        c.g.params,
        c.u0.tag(),
        c.scheme.tag(),
        c.tau.map_or_else(|| "h^2/4".to_owned(), |t| t.to_string()),
        c.limit_n
    );
    for d in &report.per_delta {
        let _ = writeln!(s);
        let _ = writeln!(s, "delta = {}", d.delta);
        match (&d.q, &d.failure) {
            (Some(q), _) => {
                let _ = writeln!(
                    s,
                    "  Q = [[{}, {}], [{}, {}]], formula discrepancy {:e}",
                    q.q[0][0],
                    q.q[0][1],
                    q.q[1][0],
                    q.q[1][1],
                    q.max_discrepancy()
                );
            }
            (None, Some(f)) => {
                let _ = writeln!(s, "  setup failed: {f}");
            }
            (None, None) => {}
        }
        for r in report.rows_for(d.delta) {
            let _ = writeln!(
                s,
                "  eps = 1/{:<3} E = {:<24} hnorm_max = {:<24} {}",
                r.m,
                opt(r.error_l2),
                opt(r.hnorm_max),
                status_field(&r.status)
            );
        }
        let verdict = if report.column_verdict(d.delta) {
            "decreasing"
        } else {
            "NOT decreasing"
        };
        let _ = writeln!(s, "  E(eps) {verdict}");
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "verdict: {}", if report.verdict() { "PASS" } else { "FAIL" });
    s
}

fn write(path: PathBuf, text: &str) -> Result<()> {
    std::fs::write(&path, text).map_err(|e| Error::io(path, e))
}

/// Writes `convergence.csv`, `summary.txt` and `delta_<delta>/q_matrix.csv`
/// under `dir`.
pub fn export_report(report: &ConvergenceReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write(dir.join("convergence.csv"), &convergence_csv(report))?;
    write(dir.join("summary.txt"), &summary_text(report))?;
    for d in &report.per_delta {
        if let Some(q) = &d.q {
            let sub = dir.join(delta_dir_name(d.delta));
            std::fs::create_dir_all(&sub).map_err(|e| Error::io(&sub, e))?;
            write(sub.join("q_matrix.csv"), &q_matrix_csv(q))?;
        }
    }
    Ok(())
}
