//! The 4x4 reference example and its five published iteration tables,
//! compared cell by cell at four decimals.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::matrix::{LocalTrustMatrix, TrustVector};
use crate::solvers::{center_point, global_trust, IterationTrace, SolverConfig, DEFAULT_MAX_ITERS, DEFAULT_TOL};

pub const EXAMPLE_MATRIX: [[f64; 4]; 4] = [
    [0.0, 5.0, 6.0, 6.0],
    [8.0, 0.0, 5.0, 5.0],
    [5.0, 6.0, 0.0, 2.0],
    [0.0, 4.0, 0.0, 0.0],
];

pub fn example_matrix() -> LocalTrustMatrix {
    LocalTrustMatrix::from_rows(&EXAMPLE_MATRIX).expect("example matrix is valid")
}

pub const TABLE_DECIMALS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Iteration {
    CenterPoint,
    GlobalTrust { alpha: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct GoldenTable {
    pub id: u8,
    pub title: &'static str,
    pub iteration: Iteration,
    pub initial: [f64; 4],
    pub rows: &'static [[&'static str; 4]],
}

impl GoldenTable {
    /// Index of the last printed iterate.
    pub fn printed_iterations(&self) -> usize {
        self.rows.len() - 1
    }
}

pub const TABLES: [GoldenTable; 5] = [
    GoldenTable {
        id: 1,
        title: "center point, initial guess close to the center point",
        iteration: Iteration::CenterPoint,
        initial: [1.0, 2.0, 3.0, 4.0],
        rows: &[
            ["1.0000", "2.0000", "3.0000", "4.0000"],
            ["6.2000", "4.8750", "5.3333", "3.6667"],
            ["6.4327", "5.1096", "5.5598", "4.4027"],
            ["6.4367", "5.0706", "5.5573", "4.4008"],
            ["6.4313", "5.0705", "5.5594", "4.4002"],
            ["6.4310", "5.0707", "5.5592", "4.3994"],
            ["6.4311", "5.0708", "5.5591", "4.3994"],
            ["6.4311", "5.0708", "5.5591", "4.3994"],
        ],
    },
    GoldenTable {
        id: 2,
        title: "center point, initial guess far from the center point",
        iteration: Iteration::CenterPoint,
        initial: [100.0, 300.0, 200.0, 100.0],
        rows: &[
            ["100.0000", "300.0000", "200.0000", "100.0000"],
            ["6.8000", "5.2500", "5.2500", "4.1667"],
            ["6.5000", "5.0668", "5.5643", "4.4827"],
            ["6.4298", "5.0654", "5.5620", "4.4050"],
            ["6.4299", "5.0706", "5.5593", "4.3987"],
            ["6.4310", "5.0708", "5.5591", "4.3993"],
            ["6.4311", "5.0708", "5.5591", "4.3994"],
            ["6.4311", "5.0708", "5.5591", "4.3994"],
        ],
    },
    GoldenTable {
        id: 3,
        title: "global trust, alpha = 1/3, initial guess close to the solution",
        iteration: Iteration::GlobalTrust { alpha: 1.0 / 3.0 },
        initial: [1.0, 2.0, 3.0, 4.0],
        rows: &[
            ["1.0000", "2.0000", "3.0000", "4.0000"],
            ["4.9893", "4.4051", "3.9876", "3.2749"],
            ["5.8801", "4.8299", "5.3148", "4.4838"],
            ["6.0621", "5.1110", "5.5131", "4.6039"],
            ["6.1418", "5.1543", "5.5636", "4.6490"],
            ["6.1550", "5.1683", "5.5802", "4.6631"],
            ["6.1593", "5.1717", "5.5834", "4.6657"],
            ["6.1603", "5.1725", "5.5844", "4.6665"],
            ["6.1605", "5.1727", "5.5846", "4.6667"],
            ["6.1606", "5.1728", "5.5847", "4.6667"],
            ["6.1606", "5.1728", "5.5847", "4.6667"],
        ],
    },
    GoldenTable {
        id: 4,
        title: "global trust, alpha = 1/3, initial guess far from the solution",
        iteration: Iteration::GlobalTrust { alpha: 1.0 / 3.0 },
        initial: [100.0, 300.0, 200.0, 100.0],
        rows: &[
            ["100.0000", "300.0000", "200.0000", "100.0000"],
            ["16.9093", "12.1379", "13.7913", "11.3982"],
            ["7.6469", "6.5685", "7.1369", "5.9630"],
            ["6.5419", "5.4824", "5.9029", "4.9291"],
            ["6.2499", "5.2477", "5.6685", "4.7377"],
            ["6.1829", "5.1918", "5.6048", "4.6834"],
            ["6.1662", "5.1775", "5.5897", "4.6710"],
            ["6.1620", "5.1740", "5.5859", "4.6678"],
            ["6.1610", "5.1731", "5.5850", "4.6670"],
            ["6.1607", "5.1729", "5.5847", "4.6668"],
            ["6.1606", "5.1728", "5.5847", "4.6667"],
            ["6.1606", "5.1728", "5.5847", "4.6667"],
        ],
    },
    GoldenTable {
        id: 5,
        title: "global trust, alpha = 1/6, initial guess close to the solution",
        iteration: Iteration::GlobalTrust { alpha: 1.0 / 6.0 },
        initial: [1.0, 2.0, 3.0, 4.0],
        rows: &[
            ["1.0000", "2.0000", "3.0000", "4.0000"],
            ["5.4761", "4.6006", "4.5168", "3.4374"],
            ["6.1901", "5.0137", "5.4742", "4.5092"],
            ["6.2506", "5.1176", "5.5682", "4.5424"],
            ["6.2693", "5.1288", "5.5767", "4.5486"],
            ["6.2714", "5.1304", "5.5790", "4.5510"],
            ["6.2716", "5.1307", "5.5793", "4.5511"],
            ["6.2717", "5.1307", "5.5793", "4.5512"],
            ["6.2717", "5.1307", "5.5793", "4.5512"],
        ],
    },
];

pub fn table(id: u8) -> Option<&'static GoldenTable> {
    TABLES.iter().find(|t| t.id == id)
}

/// Fixed-point decimal with ties rounded away from zero.
///
/// Works on the exact decimal expansion of the binary value, so only true
/// ties are affected by the tie rule.
pub fn format_fixed(x: f64, decimals: usize) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    // 1100 fractional digits cover the exact expansion of any finite f64.
    let exact = format!("{:.1100}", x.abs());
    let (int_part, frac) = exact.split_once('.').expect("fixed format has a point");
    let mut digits: Vec<u8> = int_part
        .bytes()
        .chain(frac.bytes().take(decimals))
        .map(|b| b - b'0')
        .collect();
    if frac.as_bytes()[decimals] >= b'5' {
        let mut i = digits.len();
        loop {
            if i == 0 {
                digits.insert(0, 1);
                break;
            }
            i -= 1;
            if digits[i] == 9 {
                digits[i] = 0;
            } else {
                digits[i] += 1;
                break;
            }
        }
    }
    let split = digits.len() - decimals;
    let mut out = String::with_capacity(digits.len() + 2);
    if x.is_sign_negative() && digits.iter().any(|&d| d != 0) {
        out.push('-');
    }
    out.extend(digits[..split].iter().map(|d| char::from(b'0' + d)));
    if decimals > 0 {
        out.push('.');
        out.extend(digits[split..].iter().map(|d| char::from(b'0' + d)));
    }
    out
}

pub fn rounded_rows(trace: &IterationTrace) -> Vec<Vec<String>> {
    trace
        .iterates
        .iter()
        .map(|t| t.as_slice().iter().map(|&v| format_fixed(v, TABLE_DECIMALS)).collect())
        .collect()
}

/// Plain-text iteration table: one `t^k` row per iterate.
pub fn render_trace_table(trace: &IterationTrace) -> String {
    let rows = rounded_rows(trace);
    let n = trace.iterates.first().map_or(0, TrustVector::len);
    let width = rows.iter().flatten().map(String::len).max().unwrap_or(6).max(6);
    let label_width = format!("t^{}", rows.len().saturating_sub(1)).len().max(1);
    let mut out = String::new();
    let _ = write!(out, "{:<label_width$}", "i");
    for i in 1..=n {
        let _ = write!(out, "  {i:>width$}");
    }
    out.push('\n');
    for (k, row) in rows.iter().enumerate() {
        let _ = write!(out, "{:<label_width$}", format!("t^{k}"));
        for cell in row {
            let _ = write!(out, "  {cell:>width$}");
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellDiff {
    pub row: usize,
    pub col: usize,
    pub expected: String,
    pub actual: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableCheck {
    pub id: u8,
    pub title: String,
    pub alpha: Option<f64>,
    /// Iterations the solver needed at the default tolerance.
    pub iterations: usize,
    /// Last printed iterate index in the published table.
    pub expected_iterations: usize,
    pub rows_compared: usize,
    pub length_ok: bool,
    pub mismatches: Vec<CellDiff>,
    pub passed: bool,
}

/// Compares computed rows with published rows. Lengths may differ by one
/// trailing row if that row repeats its predecessor.
pub fn compare_rows(expected: &[[&str; 4]], actual: &[Vec<String>]) -> (bool, usize, Vec<CellDiff>) {
    let repeats = |a: &[String], b: &[String]| a == b;
    let (e, a) = (expected.len(), actual.len());
    let as_owned = |r: &[&str; 4]| r.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let length_ok = e == a
        || (e == a + 1 && e >= 2 && as_owned(&expected[e - 1]) == as_owned(&expected[e - 2]))
        || (a == e + 1 && a >= 2 && repeats(&actual[a - 1], &actual[a - 2]));
    let compared = e.min(a);
    let mut mismatches = Vec::new();
    for (row, (exp, act)) in expected.iter().zip(actual).enumerate() {
        for (col, (x, y)) in exp.iter().zip(act).enumerate() {
            if *x != y {
                mismatches.push(CellDiff {
                    row,
                    col,
                    expected: x.to_string(),
                    actual: y.clone(),
                });
            }
        }
    }
    (length_ok, compared, mismatches)
}

/// The computed trace for a table, with `alpha_offset` added to α for the
/// global-trust tables.
pub fn reproduce(table: &GoldenTable, alpha_offset: f64) -> Result<IterationTrace> {
    let trust = example_matrix();
    let cfg = SolverConfig {
        tol: DEFAULT_TOL,
        max_iters: DEFAULT_MAX_ITERS,
        ..SolverConfig::default()
    }
    .with_initial(TrustVector::new(table.initial.to_vec())?);
    let result = match table.iteration {
        Iteration::CenterPoint => center_point(&trust, &cfg)?,
        Iteration::GlobalTrust { alpha } => global_trust(&trust, &cfg.with_alpha(alpha + alpha_offset))?,
    };
    Ok(result.trace)
}

pub fn verify_table(table: &GoldenTable, alpha_offset: f64) -> Result<TableCheck> {
    let trace = reproduce(table, alpha_offset)?;
    let (length_ok, rows_compared, mismatches) = compare_rows(table.rows, &rounded_rows(&trace));
    Ok(TableCheck {
        id: table.id,
        title: table.title.to_string(),
        alpha: match table.iteration {
            Iteration::CenterPoint => None,
            Iteration::GlobalTrust { alpha } => Some(alpha + alpha_offset),
        },
        iterations: trace.iterations_used,
        expected_iterations: table.printed_iterations(),
        rows_compared,
        length_ok,
        passed: length_ok && mismatches.is_empty(),
        mismatches,
    })
}

pub fn verify_all(alpha_offset: f64) -> Result<Vec<TableCheck>> {
    TABLES.iter().map(|t| verify_table(t, alpha_offset)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_is_half_away_from_zero() {
        assert_eq!(format_fixed(4.875, 4), "4.8750");
        assert_eq!(format_fixed(0.03125, 4), "0.0313");
        assert_eq!(format_fixed(-0.03125, 4), "-0.0313");
        assert_eq!(format_fixed(2.5, 0), "3");
        assert_eq!(format_fixed(2.00025, 4), "2.0002"); // binary value is below the tie
        assert_eq!(format_fixed(9.99995, 4), "10.0000"); // and this one above it
        assert_eq!(format_fixed(9.999951, 4), "10.0000");
        assert_eq!(format_fixed(16.0 / 3.0, 4), "5.3333");
        assert_eq!(format_fixed(11.0 / 3.0, 4), "3.6667");
        assert_eq!(format_fixed(-0.00001, 4), "0.0000");
        assert_eq!(format_fixed(100.0, 4), "100.0000");
    }

    #[test]
    fn example_matrix_matches_literal() {
        assert_eq!(example_matrix().to_rows()[3], vec![0.0, 4.0, 0.0, 0.0]);
    }

    #[test]
    fn printed_iteration_counts() {
        let counts: Vec<usize> = TABLES.iter().map(GoldenTable::printed_iterations).collect();
        assert_eq!(counts, [7, 7, 10, 11, 8]);
    }

    #[test]
    fn trailing_repeat_rule() {
        let rows: &[[&str; 4]] = &[["1", "1", "1", "1"], ["2", "2", "2", "2"], ["2", "2", "2", "2"]];
        let own = |r: &[[&str; 4]]| {
            r.iter()
                .map(|x| x.iter().map(|s| s.to_string()).collect())
                .collect::<Vec<Vec<String>>>()
        };
        assert!(compare_rows(rows, &own(&rows[..2])).0);
        assert!(compare_rows(&rows[..2], &own(rows)).0);
        assert!(!compare_rows(rows, &own(&rows[..1])).0);
        let (_, _, diffs) = compare_rows(&rows[..2], &own(&[["1", "1", "1", "1"], ["2", "3", "2", "2"]]));
        assert_eq!(
            diffs,
            vec![CellDiff {
                row: 1,
                col: 1,
                expected: "2".into(),
                actual: "3".into()
            }]
        );
    }

    /// Exact iteration reproduces every published cell except two, where the
    /// printed value sits just past the rounding boundary of the computed one.
    #[test]
    fn published_discrepancies_are_pinned() {
        let checks = verify_all(0.0).unwrap();
        let summary: Vec<(u8, usize, usize, String, String)> = checks
            .iter()
            .flat_map(|c| {
                c.mismatches
                    .iter()
                    .map(move |d| (c.id, d.row, d.col, d.expected.clone(), d.actual.clone()))
            })
            .collect();
        assert_eq!(
            summary,
            vec![
                (3, 9, 2, "5.5847".to_string(), "5.5846".to_string()),
                (4, 10, 3, "4.6667".to_string(), "4.6668".to_string()),
            ]
        );
        assert!(checks.iter().all(|c| c.length_ok));
        let iterations: Vec<usize> = checks.iter().map(|c| c.iterations).collect();
        assert_eq!(iterations, [7, 7, 10, 11, 7]);
    }

    #[test]
    fn alpha_perturbation_breaks_global_trust_tables() {
        let checks = verify_all(0.01).unwrap();
        assert!(checks[0].passed && checks[1].passed);
        for c in &checks[2..] {
            assert!(!c.passed && !c.mismatches.is_empty(), "table {}", c.id);
        }
    }

    #[test]
    fn render_layout() {
        let trace = reproduce(&TABLES[0], 0.0).unwrap();
        let text = render_trace_table(&trace);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 9);
        assert_eq!(lines[2], "t^1  6.2000  4.8750  5.3333  3.6667");
    }
}
