//! Acceptance run: one line per criterion, nonzero exit if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use perfhom::eps::{run as run_eps, EpsProblemSpec, Scheme};
use perfhom::fem::{assemble_surface_mass, assemble_surface_stiffness, l2_error};
use perfhom::homogenize::{homogenize, HomogenizedData};
use perfhom::initial::InitialDatum;
use perfhom::limit::{manufactured_solution, run_limit, Forcing, LimitProblemSpec};
use perfhom::mesh::{build_cell_mesh, BoundaryChain, CellGeometry};
use perfhom::nonlinearity::{validate_nonlinearity, NonlinearityKind, NonlinearitySpec};
use perfhom::oracles::{circle_spectrum_oracle, dilute_limit_oracle, smallest_nonzero_generalized_eigenvalue};
use perfhom::study::{
    export_report, parse_study_config, run_convergence_study, run_surface_free_column, ConvergenceReport,
};
use perfhom::Result;

type Check = Result<(bool, String)>;

const DELTAS: [f64; 4] = [0.0, 0.5, 1.0, 2.0];

fn cell(n: usize, r: f64) -> Result<perfhom::mesh::Mesh> {
    build_cell_mesh(&CellGeometry::new(n, r)?)
}

fn cell_suite(q: &mut Vec<HomogenizedData>) -> Check {
    let mesh = cell(64, 0.25)?;
    let mut ok = true;
    let mut detail = Vec::new();
    for delta in DELTAS {
        let start = Instant::now();
        let (data, _) = homogenize(&mesh, delta, false)?;
        let secs = start.elapsed().as_secs_f64();
        let asym = (data.q[0][1] - data.q[1][0]).abs();
        let pass = asym <= 1e-10 && data.min_eigenvalue() > 0.0 && data.max_discrepancy() <= 1e-8 && secs <= 60.0;
        ok &= pass;
        detail.push(format!(
            "d={delta}: q11={:.6} asym={asym:.1e} disc={:.1e} {secs:.2}s",
            data.q[0][0],
            data.max_discrepancy()
        ));
        q.push(data);
    }
    let monotone = q.windows(2).all(|w| w[1].q[0][0] >= w[0].q[0][0]);
    Ok((
        ok && monotone,
        format!("{}; q11 nondecreasing: {monotone}", detail.join(", ")),
    ))
}

fn no_hole() -> Check {
    let mesh = cell(16, 0.0)?;
    let (data, sols) = homogenize(&mesh, 1.0, false)?;
    let wmax = sols
        .iter()
        .flat_map(|s| s.corrector.iter())
        .fold(0.0_f64, |m, v| m.max(v.abs()));
    let qerr = (0..2)
        .flat_map(|i| (0..2).map(move |j| (i, j)))
        .map(|(i, j)| (data.q[i][j] - if i == j { 1.0 } else { 0.0 }).abs())
        .fold(0.0, f64::max);
    Ok((
        wmax <= 1e-10 && qerr <= 1e-10,
        format!("max|w|={wmax:.1e}, max|Q-I|={qerr:.1e}"),
    ))
}

fn dilute() -> Check {
    let (data, _) = homogenize(&cell(64, 0.1)?, 0.0, false)?;
    let expected = dilute_limit_oracle(0.1)?;
    let rel = (data.q[0][0] - expected).abs() / expected;
    Ok((
        rel <= 0.02,
        format!("q11={:.6}, oracle={expected:.6}, rel={rel:.2e}", data.q[0][0]),
    ))
}

fn surface_spectrum() -> Check {
    let (chain, _) = BoundaryChain::inscribed_circle([0.5, 0.5], 0.25, 256)?;
    let chains = [chain];
    let a = assemble_surface_stiffness(&chains, 256)?.to_dense();
    let m = assemble_surface_mass(&chains, 256)?.to_dense();
    let lambda = smallest_nonzero_generalized_eigenvalue(&a, &m)?;
    let expected = circle_spectrum_oracle(0.25, 1)?;
    let rel = (lambda - expected).abs() / expected;
    Ok((
        rel <= 5e-3,
        format!("lambda={lambda:.6}, oracle={expected}, rel={rel:.2e}"),
    ))
}

fn energy() -> Check {
    let spec = EpsProblemSpec {
        m: 4,
        cell_n: 16,
        radius: 0.25,
        delta: 1.0,
        kappa: 1.0,
        g: NonlinearitySpec::linear(1.0),
        u0: InitialDatum::SinSin,
        t_final: 0.2,
        tau: None,
        scheme: Scheme::FullyImplicitLinear,
    };
    let start = Instant::now();
    let (_, run) = run_eps(&spec)?;
    let secs = start.elapsed().as_secs_f64();
    let monotone = run.trace.windows(2).all(|w| w[1].h_norm_sq <= w[0].h_norm_sq);
    // Signed: backward Euler leaves a nonpositive numerical dissipation.
    let worst = run.trace[1..]
        .iter()
        .map(|r| r.residual.unwrap_or(f64::INFINITY))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok((
        monotone && worst <= 1e-10 && secs <= 120.0,
        format!(
            "{} steps, nonincreasing: {monotone}, max residual={worst:.1e}, {secs:.1}s",
            run.trace.len() - 1
        ),
    ))
}

fn mms(q: &HomogenizedData) -> Check {
    let error = |n: usize| -> Result<f64> {
        let mut spec = LimitProblemSpec::from_homogenized(
            q,
            1.0,
            NonlinearitySpec::linear_plus_sine(),
            InitialDatum::SinSin,
            0.1,
            None,
            n,
        );
        spec.forcing = Forcing::Manufactured;
        let run = run_limit(&spec)?;
        Ok(l2_error(&run.operators.mesh, &run.state.u, |p| {
            manufactured_solution(p, 0.1)
        }))
    };
    let (e16, e32) = (error(16)?, error(32)?);
    let rate = (e16 / e32).log2();
    Ok((rate >= 1.8, format!("E16={e16:.3e}, E32={e32:.3e}, rate={rate:.3}")))
}

const STUDY: &str = r#"{"cell_n":16,"radius":0.25,"deltas":[0,1],"eps":[0.5,0.25,0.125],
    "g":{"tag":"linear-plus-sine","q":2,"alpha1":0.5,"alpha2":1.5,"beta":0.5,"l":2},
    "u0_tag":"sin-sin","T":0.1,"limit_n":128}"#;

fn study(report: &ConvergenceReport, elapsed: Duration) -> Result<(bool, String, bool, String)> {
    let config = parse_study_config(STUDY)?;
    let surface_free = run_surface_free_column(&config, false)?;
    let mut ok = report.verdict();
    let mut detail = Vec::new();
    for d in &report.per_delta {
        let errors: Vec<String> = report
            .errors_for(d.delta)
            .iter()
            .map(|e| e.map_or("failed".into(), |e| format!("{e:.3e}")))
            .collect();
        detail.push(format!("d={}: E=[{}]", d.delta, errors.join(", ")));
    }
    let sf_gap = report
        .rows_for(0.0)
        .zip(&surface_free.rows)
        .map(|(a, b)| match (a.error_l2, b.error_l2) {
            (Some(x), Some(y)) => (x - y).abs(),
            _ => f64::INFINITY,
        })
        .fold(0.0, f64::max);
    let fractions = report.rows.iter().all(|r| {
        r.volume_fraction
            .is_some_and(|v| (v - report.cell_area_fluid).abs() <= 1e-12)
    });
    ok &= sf_gap <= 1e-10 && fractions && elapsed.as_secs_f64() <= 1800.0;
    detail.push(format!(
        "surface-free gap={sf_gap:.1e}, volume fractions match: {fractions}, {:.0}s",
        elapsed.as_secs_f64()
    ));

    let mut uniform = true;
    let mut spread = Vec::new();
    for d in &report.per_delta {
        let h: Vec<f64> = report.rows_for(d.delta).filter_map(|r| r.hnorm_max).collect();
        let (lo, hi) = h
            .iter()
            .fold((f64::INFINITY, 0.0_f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        let s = hi / lo - 1.0;
        uniform &= h.len() == config.ms.len() && s <= 0.1;
        spread.push(format!(
            "d={}: max H-norm in [{lo:.5}, {hi:.5}], spread {:.2}%",
            d.delta,
            100.0 * s
        ));
    }
    Ok((ok, detail.join("; "), uniform, spread.join("; ")))
}

fn nonlinearity_gate() -> Check {
    let linear = NonlinearitySpec::linear(1.0);
    let sine = NonlinearitySpec::linear_plus_sine();
    let cubic = NonlinearitySpec {
        kind: NonlinearityKind::CustomPolynomialTruncated,
        params: vec![10.0, 0.0, 0.0, 0.0, 1.0],
        q: 4.0,
        alpha1: 1.0,
        alpha2: 1.0,
        beta: 0.1,
        l: 100.0,
    };
    let range = (-10.0, 10.0);
    let a = validate_nonlinearity(&linear, range, 1001);
    let b = validate_nonlinearity(&sine, range, 1001);
    let c = validate_nonlinearity(&cubic, range, 1001);
    let cubic_reason = c
        .first_violation
        .as_ref()
        .map_or("none".to_owned(), |v| v.condition.to_string());
    let pass = a.passed && b.passed && !c.passed && cubic_reason.starts_with("lipschitz");
    Ok((
        pass,
        format!(
            "linear={}, linear+sine={}, cubic={} ({cubic_reason})",
            a.passed, b.passed, c.passed
        ),
    ))
}

fn determinism(first: &ConvergenceReport) -> Check {
    let config = parse_study_config(STUDY)?;
    let second = run_convergence_study(&config, false)?;
    let dir = tempfile::tempdir().map_err(|e| perfhom::Error::io("tempdir", e))?;
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    export_report(first, &a)?;
    export_report(&second, &b)?;
    let mut files = vec!["convergence.csv".to_owned(), "summary.txt".to_owned()];
    files.extend(
        first
            .per_delta
            .iter()
            .map(|d| format!("delta_{}/q_matrix.csv", d.delta)),
    );
    let read = |p: std::path::PathBuf| std::fs::read(&p).map_err(|e| perfhom::Error::io(p, e));
    let mut same = true;
    for f in &files {
        same &= read(a.join(f))? == read(b.join(f))?;
    }
    Ok((same, format!("{} files compared, identical: {same}", files.len())))
}

fn report(id: usize, name: &str, outcome: Check, failures: &mut usize) {
    let (pass, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    if !pass {
        *failures += 1;
    }
    println!(
        "criterion {id:>2} {} {name}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

fn main() -> ExitCode {
    let mut failures = 0;
    let mut q = Vec::new();
    report(1, "cell/Q suite", cell_suite(&mut q), &mut failures);
    report(2, "no-hole identity", no_hole(), &mut failures);
    report(3, "dilute-limit band", dilute(), &mut failures);
    report(4, "surface spectrum", surface_spectrum(), &mut failures);
    report(5, "energy monotonicity", energy(), &mut failures);
    let q_delta1 = q.iter().find(|d| d.delta == 1.0).cloned();
    let c6 = match &q_delta1 {
        Some(d) => mms(d),
        None => Ok((false, "no Q from criterion 1".into())),
    };
    report(6, "limit-solver MMS", c6, &mut failures);

    let start = Instant::now();
    let first = parse_study_config(STUDY).and_then(|c| run_convergence_study(&c, false));
    let elapsed = start.elapsed();
    match first
        .as_ref()
        .map_err(|e| e.to_string())
        .and_then(|r| study(r, elapsed).map_err(|e| e.to_string()))
    {
        Ok((c7, d7, c8, d8)) => {
            report(7, "convergence study", Ok((c7, d7)), &mut failures);
            report(8, "eps-uniform H-norm", Ok((c8, d8)), &mut failures);
        }
        Err(e) => {
            report(
                7,
                "convergence study",
                Ok((false, format!("error: {e}"))),
                &mut failures,
            );
            report(
                8,
                "eps-uniform H-norm",
                Ok((false, format!("error: {e}"))),
                &mut failures,
            );
        }
    }
    report(9, "nonlinearity gate", nonlinearity_gate(), &mut failures);
    let c10 = match &first {
        Ok(r) => determinism(r),
        Err(e) => Ok((false, format!("error: {e}"))),
    };
    report(10, "determinism", c10, &mut failures);

    println!("{} of 10 criteria passed", 10 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
