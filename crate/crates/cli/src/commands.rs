use std::fmt::Write as _;

use absolute_trust::analysis::{analyze_matrix, AnalysisReport};
use absolute_trust::golden::{self, format_fixed, render_trace_table, TableCheck, TABLES};
use absolute_trust::io::{load_matrix, load_nonnegative, nonnegative_from_rows};
use absolute_trust::simulator::{
    compare_schedules, generate_population, NetworkSpec, ScheduleComparison, ScheduleKind,
};
use absolute_trust::solvers::{
    center_point, global_trust, InitialGuess, SolveResult, SolverConfig, DEFAULT_ALPHA, DEFAULT_MAX_ITERS, DEFAULT_TOL,
};
use absolute_trust::{LocalTrustMatrix, TrustError, TrustVector};
use serde::Serialize;

use crate::manifest::{CommandKind, OutputFormat, RunManifest};

pub mod exit {
    pub const OK: u8 = 0;
    /// Invalid input, configuration or I/O failure (also clap usage errors).
    pub const INVALID: u8 = 2;
    pub const NOT_IRREDUCIBLE: u8 = 3;
    pub const NOT_CONVERGED: u8 = 4;
    pub const VERIFY_MISMATCH: u8 = 5;
    pub const CANNOT_GENERATE: u8 = 6;
    pub const CHECK_FAILED: u8 = 7;
}

/// A failed run: exit code plus everything destined for stderr.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Self {
        Self {
            code: exit::INVALID,
            message: message.into(),
        }
    }
}

impl From<TrustError> for Failure {
    fn from(e: TrustError) -> Self {
        let code = match e {
            TrustError::NotIrreducible => exit::NOT_IRREDUCIBLE,
            TrustError::NotConverged { .. } | TrustError::NoConvergence => exit::NOT_CONVERGED,
            TrustError::CannotAchieveIrreducible { .. } => exit::CANNOT_GENERATE,
            _ => exit::INVALID,
        };
        Self {
            code,
            message: format!("error: {e}"),
        }
    }
}

pub type Outcome = Result<String, Failure>;

pub const DEFAULT_SEEDS: [u64; 3] = [1, 2, 3];

pub fn default_network() -> NetworkSpec {
    NetworkSpec::new(50, 0.1, 0.8, 1)
}

pub fn execute(m: &RunManifest) -> Outcome {
    match m.command {
        CommandKind::CenterPoint => cmd_iterate(m, false),
        CommandKind::Solve => cmd_iterate(m, true),
        CommandKind::VerifyPaper => cmd_verify_paper(m),
        CommandKind::Analyze => cmd_analyze(m),
        CommandKind::Simulate => cmd_simulate(m),
    }
}

fn trust_matrix(m: &RunManifest) -> Result<LocalTrustMatrix, Failure> {
    match (&m.matrix, &m.matrix_path) {
        (Some(rows), _) => Ok(LocalTrustMatrix::from_rows(rows)?),
        (None, Some(path)) => load_matrix(path).map_err(|e| match e {
            TrustError::Io(io) => Failure::invalid(format!("error: cannot read {}: {io}", path.display())),
            other => other.into(),
        }),
        (None, None) => Err(Failure::invalid("error: no input matrix (use --matrix or --example)")),
    }
}

fn require<T: Copy>(value: Option<T>, flag: &str, command: &str) -> Result<T, Failure> {
    value.ok_or_else(|| Failure::invalid(format!("error: {command} requires an explicit {flag}")))
}

fn cmd_iterate(m: &RunManifest, global: bool) -> Outcome {
    let name = if global { "solve" } else { "center-point" };
    let trust = trust_matrix(m)?;
    let initial = m
        .initial
        .clone()
        .ok_or_else(|| Failure::invalid(format!("error: {name} requires an explicit --initial")))?;
    let tol = require(m.tol, "--tol", name)?;
    let alpha = if global {
        require(m.alpha, "--alpha", name)?
    } else {
        DEFAULT_ALPHA
    };
    let initial = TrustVector::new(initial)?;
    let cfg = SolverConfig::new(
        alpha,
        tol,
        m.max_iters.unwrap_or(DEFAULT_MAX_ITERS),
        InitialGuess::Vector(initial),
    )?;
    let result = if global {
        global_trust(&trust, &cfg)?
    } else {
        center_point(&trust, &cfg)?
    };
    let heading = if global {
        format!("global trust, alpha = {alpha}, tol = {tol:e}")
    } else {
        format!("center point, tol = {tol:e}")
    };
    Ok(render_solve(&result, &heading, m.format))
}

#[derive(Serialize)]
struct SolveJson<'a> {
    solution: &'a [f64],
    iterations: usize,
    trace: Vec<&'a [f64]>,
    residual: f64,
}

fn render_solve(r: &SolveResult, heading: &str, format: OutputFormat) -> String {
    match format {
        OutputFormat::Table => {
            let mut out = format!("{heading}\n");
            out.push_str(&render_trace_table(&r.trace));
            let solution: Vec<String> = r.solution.as_slice().iter().map(|&v| format_fixed(v, 4)).collect();
            let _ = writeln!(
                out,
                "converged after {} iterations: [{}], residual {:.3e}",
                r.trace.iterations_used,
                solution.join(", "),
                r.residual
            );
            out
        }
        OutputFormat::Json => json(&SolveJson {
            solution: r.solution.as_slice(),
            iterations: r.trace.iterations_used,
            trace: r.trace.iterates.iter().map(TrustVector::as_slice).collect(),
            residual: r.residual,
        }),
        OutputFormat::Csv => {
            let n = r.solution.len();
            let mut out = String::from("k");
            for i in 1..=n {
                let _ = write!(out, ",t{i}");
            }
            out.push('\n');
            for (k, t) in r.trace.iterates.iter().enumerate() {
                let _ = write!(out, "{k}");
                for v in t.as_slice() {
                    let _ = write!(out, ",{v}");
                }
                out.push('\n');
            }
            out
        }
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialization is infallible");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct VerifyJson<'a> {
    passed: bool,
    tables: &'a [TableCheck],
}

fn cmd_verify_paper(m: &RunManifest) -> Outcome {
    if !m.alpha_offset.is_finite() {
        return Err(Failure::invalid("error: alpha offset must be finite"));
    }
    // The five tables share nothing, so they are checked concurrently.
    let checks = std::thread::scope(|s| {
        let handles: Vec<_> = TABLES
            .iter()
            .map(|t| s.spawn(move || golden::verify_table(t, m.alpha_offset)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("table check panicked"))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let passed = checks.iter().all(|c| c.passed);
    let text = match m.format {
        OutputFormat::Json => json(&VerifyJson {
            passed,
            tables: &checks,
        }),
        OutputFormat::Table | OutputFormat::Csv => render_verify(&checks, m.format),
    };
    if passed {
        Ok(text)
    } else {
        Err(Failure {
            code: exit::VERIFY_MISMATCH,
            message: text,
        })
    }
}

fn render_verify(checks: &[TableCheck], format: OutputFormat) -> String {
    let mut out = String::new();
    if format == OutputFormat::Csv {
        out.push_str("table,row,col,expected,actual\n");
        for c in checks {
            for d in &c.mismatches {
                let _ = writeln!(out, "{},{},{},{},{}", c.id, d.row, d.col + 1, d.expected, d.actual);
            }
        }
        return out;
    }
    for c in checks {
        let _ = writeln!(
            out,
            "Table {}: {}  iterations {} (printed {})  {}",
            c.id,
            if c.passed { "PASS" } else { "FAIL" },
            c.iterations,
            c.expected_iterations,
            c.title
        );
        if !c.length_ok {
            let _ = writeln!(out, "  row count differs beyond one trailing repeated row");
        }
        for d in &c.mismatches {
            let _ = writeln!(
                out,
                "  t^{}[{}]: expected {}, got {}",
                d.row,
                d.col + 1,
                d.expected,
                d.actual
            );
        }
    }
    let passed = checks.iter().filter(|c| c.passed).count();
    let _ = writeln!(out, "{passed}/{} tables match", checks.len());
    out
}

fn cmd_analyze(m: &RunManifest) -> Outcome {
    let received = if m.unrestricted {
        let raw = match (&m.matrix, &m.matrix_path) {
            (Some(rows), _) => nonnegative_from_rows(rows)?,
            (None, Some(path)) => load_nonnegative(path).map_err(|e| match e {
                TrustError::Io(io) => Failure::invalid(format!("error: cannot read {}: {io}", path.display())),
                other => other.into(),
            })?,
            (None, None) => return Err(Failure::invalid("error: no input matrix (use --matrix or --example)")),
        };
        raw.transpose()
    } else {
        trust_matrix(m)?.received()
    };
    let alpha = m.alpha.unwrap_or(DEFAULT_ALPHA);
    let tol = m.tol.unwrap_or(DEFAULT_TOL);
    SolverConfig::new(alpha, tol, DEFAULT_MAX_ITERS, InitialGuess::Uniform)?;
    let report = analyze_matrix(&received, alpha, tol)?;
    let text = match m.format {
        OutputFormat::Json => json(&report),
        OutputFormat::Table => render_checks(&analysis_rows(&report), false),
        OutputFormat::Csv => render_checks(&analysis_rows(&report), true),
    };
    if report.passed {
        Ok(text)
    } else {
        Err(Failure {
            code: exit::CHECK_FAILED,
            message: text,
        })
    }
}

struct CheckRow {
    name: String,
    value: String,
    /// `None` for informational rows.
    passed: Option<bool>,
}

fn row(name: impl Into<String>, value: String, passed: bool) -> CheckRow {
    CheckRow {
        name: name.into(),
        value,
        passed: Some(passed),
    }
}

fn analysis_rows(r: &AnalysisReport) -> Vec<CheckRow> {
    let d = &r.dynamics;
    let mut rows = vec![
        row(
            "error dynamics: rho(A), rho(B), rho(A-B)",
            format!(
                "{:.9} {:.9} {:.9}",
                d.spectral_radius_a, d.spectral_radius_b, d.spectral_radius_a_minus_b
            ),
            d.passed,
        ),
        row(
            "error dynamics: |At*-t*|, |Bt*-t*| (relative)",
            format!("{:.3e} {:.3e}", d.a_fixed_defect, d.b_fixed_defect),
            d.passed,
        ),
    ];
    for s in &r.scaling {
        rows.push(row(
            format!("scaling k={}", s.k),
            format!("defect {:.3e} (threshold {:.3e})", s.defect, s.threshold),
            s.passed,
        ));
    }
    let p = &r.positive;
    rows.push(row(
        "positive: eigenvector parallelism, sum = rho",
        format!(
            "cosine distance {:.3e}, sum defect {:.3e}",
            p.cosine_distance, p.sum_relative_defect
        ),
        p.passed,
    ));
    rows.push(row(
        format!("sum of {} mutually exclusive parts", r.sum.parts),
        format!("defect {:.3e} (threshold {:.3e})", r.sum.defect, r.sum.threshold),
        r.sum.passed,
    ));
    for e in &r.large_error {
        rows.push(row(
            format!("large-error bound |delta| = {:.4e}", e.delta_norm),
            format!(
                "next {:.4e} <= bound {:.4e}, ratio {:.4}",
                e.exact_next_norm, e.bound_norm, e.contraction_ratio
            ),
            e.passed,
        ));
    }
    let s = &r.stochastic;
    rows.push(row(
        format!("row-stochastic family ({} matrices)", s.spectral_radii.len()),
        format!("row-sum defect {:.3e}", s.max_row_sum_defect),
        s.passed,
    ));
    let l = &r.phi2_limit;
    rows.push(CheckRow {
        name: "second-moment iteration limit".into(),
        value: format!(
            "{} after {} iterations, spread {:.3e}",
            if l.converged { "converged" } else { "not converged" },
            l.iterations,
            l.relative_spread
        ),
        passed: None,
    });
    rows
}

fn render_checks(rows: &[CheckRow], csv: bool) -> String {
    let mut out = String::new();
    if csv {
        out.push_str("check,value,passed\n");
        for r in rows {
            let passed = r.passed.map(|p| p.to_string()).unwrap_or_default();
            let _ = writeln!(out, "\"{}\",\"{}\",{passed}", r.name, r.value);
        }
        return out;
    }
    let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(0);
    for r in rows {
        let _ = writeln!(
            out,
            "{}  {:<width$}  {}",
            match r.passed {
                Some(true) => "PASS",
                Some(false) => "FAIL",
                None => "INFO",
            },
            r.name,
            r.value
        );
    }
    let checks = rows.iter().filter(|r| r.passed.is_some()).count();
    let passed = rows.iter().filter(|r| r.passed == Some(true)).count();
    let _ = writeln!(out, "{passed}/{checks} checks passed");
    out
}

#[derive(Serialize)]
struct NetworkSummary {
    spec: NetworkSpec,
    attempts: usize,
    honest: Vec<bool>,
    honest_mean_trust: Option<f64>,
    malicious_mean_trust: Option<f64>,
}

#[derive(Serialize)]
struct SimulateJson {
    alpha: f64,
    tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    network: Option<NetworkSummary>,
    comparison: ScheduleComparison,
    within_tolerance: bool,
}

fn mean_where(values: &[f64], mask: &[bool], want: bool) -> Option<f64> {
    let picked: Vec<f64> = values
        .iter()
        .zip(mask)
        .filter(|(_, &h)| h == want)
        .map(|(&v, _)| v)
        .collect();
    (!picked.is_empty()).then(|| picked.iter().sum::<f64>() / picked.len() as f64)
}

fn cmd_simulate(m: &RunManifest) -> Outcome {
    let alpha = m.alpha.unwrap_or(DEFAULT_ALPHA);
    let tol = m.tol.unwrap_or(DEFAULT_TOL);
    let cap = m.max_iters.unwrap_or(DEFAULT_MAX_ITERS);
    let seeds: Vec<u64> = if m.seeds.is_empty() {
        DEFAULT_SEEDS.to_vec()
    } else {
        m.seeds.clone()
    };
    let (trust, population) = if m.matrix.is_some() || m.matrix_path.is_some() {
        (trust_matrix(m)?, None)
    } else {
        let spec = m.network.clone().unwrap_or_else(default_network);
        let net = generate_population(&spec)?;
        (net.trust.clone(), Some((spec, net)))
    };
    let comparison = compare_schedules(&trust, alpha, &seeds, tol, cap)?;
    let sync = &comparison.entries[0].trust;
    let network = population.map(|(spec, net)| NetworkSummary {
        honest_mean_trust: mean_where(sync, &net.honest, true),
        malicious_mean_trust: mean_where(sync, &net.honest, false),
        spec,
        attempts: net.attempts,
        honest: net.honest,
    });
    let report = SimulateJson {
        alpha,
        tol,
        within_tolerance: comparison.max_pairwise_deviation < 10.0 * tol,
        network,
        comparison,
    };
    Ok(match m.format {
        OutputFormat::Json => json(&report),
        OutputFormat::Table => render_simulation(&report),
        OutputFormat::Csv => {
            let mut out = String::from("schedule,seed,sweeps,messages,deviation\n");
            for e in &report.comparison.entries {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{:e}",
                    kind_name(e.kind),
                    e.seed.map(|s| s.to_string()).unwrap_or_default(),
                    e.sweeps,
                    e.messages,
                    e.deviation
                );
            }
            out
        }
    })
}

fn kind_name(kind: ScheduleKind) -> &'static str {
    match kind {
        ScheduleKind::Synchronous => "synchronous",
        ScheduleKind::Asynchronous => "asynchronous",
    }
}

fn render_simulation(r: &SimulateJson) -> String {
    let mut out = String::new();
    let entries = &r.comparison.entries;
    let n = entries[0].trust.len();
    let _ = writeln!(out, "peers {n}, alpha = {}, tol = {:e}", r.alpha, r.tol);
    if let Some(net) = &r.network {
        let _ = writeln!(
            out,
            "generated network: edge_prob {}, honest_fraction {}, seed {}, attempts {}",
            net.spec.edge_prob, net.spec.honest_fraction, net.spec.seed, net.attempts
        );
    }
    let _ = writeln!(
        out,
        "{:<13} {:>5} {:>6} {:>10} {:>11}",
        "schedule", "seed", "sweeps", "messages", "deviation"
    );
    for e in entries {
        let _ = writeln!(
            out,
            "{:<13} {:>5} {:>6} {:>10} {:>11.3e}",
            kind_name(e.kind),
            e.seed.map(|s| s.to_string()).unwrap_or_else(|| "-".into()),
            e.sweeps,
            e.messages,
            e.deviation
        );
    }
    let _ = writeln!(
        out,
        "max pairwise deviation {:.3e} ({} 10*tol)",
        r.comparison.max_pairwise_deviation,
        if r.within_tolerance { "within" } else { "exceeds" }
    );
    if let Some(net) = &r.network {
        let fmt = |x: Option<f64>| x.map(|v| format_fixed(v, 4)).unwrap_or_else(|| "-".into());
        let _ = writeln!(
            out,
            "mean trust: honest {}, malicious {}",
            fmt(net.honest_mean_trust),
            fmt(net.malicious_mean_trust)
        );
    }
    let cells: Vec<String> = entries[0].trust.iter().map(|&v| format_fixed(v, 4)).collect();
    let _ = writeln!(out, "trust [{}]", cells.join(", "));
    out
}
