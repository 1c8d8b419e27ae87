//! Numerical checks of the center-point machinery.
//!
//! Matrices here are arbitrary nonnegative matrices in the received
//! orientation (row `i` = what peer `i` receives). They are not bound by the
//! `[1, 10]` rating scale or the zero diagonal of [`LocalTrustMatrix`].

// Negated comparisons are deliberate: NaN must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use nalgebra::linalg::Schur;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TrustError};
use crate::matrix::{inf_norm, IncidenceMatrix, LocalTrustMatrix, TrustVector};
use crate::solvers::{
    center_point_of, center_residual_of, global_trust_step_of, phi1_of, phi2_step, SolveResult, SolverConfig,
    DEFAULT_TOL,
};

/// Inner solves of the property checks run to this tolerance so that solver
/// error does not mask the property being measured.
pub const PROPERTY_SOLVE_TOL: f64 = 1e-12;
const PROPERTY_SOLVE_ITERS: usize = 200_000;

const POWER_ITERS: usize = 200_000;
const SCHUR_EPS: f64 = 1e-14;
const SCHUR_ITERS: usize = 10_000;

mod rows {
    use nalgebra::DMatrix;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = m.row_iter().map(|r| r.iter().copied().collect()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<f64>, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(serde::de::Error::custom("ragged matrix"));
        }
        Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
    }
}

fn tight_center(m: &DMatrix<f64>) -> Result<SolveResult> {
    let cfg = SolverConfig {
        tol: PROPERTY_SOLVE_TOL,
        max_iters: PROPERTY_SOLVE_ITERS,
        ..SolverConfig::default()
    };
    center_point_of(m, &cfg)
}

fn check_square(m: &DMatrix<f64>) -> Result<()> {
    if m.is_square() {
        Ok(())
    } else {
        Err(TrustError::NonSquare {
            row: 0,
            len: m.ncols(),
            expected: m.nrows(),
        })
    }
}

// ---------------------------------------------------------------------------
// Spectral radius

/// Largest absolute eigenvalue.
///
/// Nonnegative inputs go through [`perron_root`]; anything else, and
/// nonnegative inputs whose Collatz–Wielandt bounds do not close, use a dense
/// real Schur decomposition.
pub fn spectral_radius(m: &DMatrix<f64>) -> Result<f64> {
    check_square(m)?;
    if m.nrows() == 0 {
        return Ok(0.0);
    }
    if m.iter().all(|&v| v >= 0.0) {
        if let Ok((root, _)) = perron_root(m) {
            return Ok(root);
        }
    }
    dense_spectral_radius(m)
}

/// Spectral radius from the eigenvalues of the real Schur form.
pub fn dense_spectral_radius(m: &DMatrix<f64>) -> Result<f64> {
    check_square(m)?;
    let schur = Schur::try_new(m.clone(), SCHUR_EPS, SCHUR_ITERS).ok_or(TrustError::NoConvergence)?;
    Ok(schur.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Perron root and eigenvector (normalised to unit sum) of a nonnegative
/// matrix, by power iteration on `I + M`.
///
/// The shift makes every irreducible input primitive, so periodic matrices
/// converge too. Stops when the Collatz–Wielandt bounds
/// `min (Mx)_i/x_i ≤ ρ ≤ max (Mx)_i/x_i` agree to 1e-13 relative.
pub fn perron_root(m: &DMatrix<f64>) -> Result<(f64, Vec<f64>)> {
    check_square(m)?;
    let n = m.nrows();
    let mut x = vec![1.0 / n as f64; n];
    for _ in 0..POWER_ITERS {
        let mx = m * nalgebra::DVector::from_column_slice(&x);
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..n {
            if x[i] <= 0.0 {
                return Err(TrustError::NoConvergence);
            }
            let q = mx[i] / x[i];
            lo = lo.min(q);
            hi = hi.max(q);
        }
        if hi - lo <= 1e-13 * hi.max(1e-300) {
            return Ok((0.5 * (lo + hi), x));
        }
        let next: Vec<f64> = x.iter().zip(mx.iter()).map(|(a, b)| a + b).collect();
        let s: f64 = next.iter().sum();
        x = next.into_iter().map(|v| v / s).collect();
    }
    Err(TrustError::NoConvergence)
}

// ---------------------------------------------------------------------------
// Error dynamics

/// `A` and `B` from the linearised center-point error recursion
/// `δt^k ≈ (A − B) δt^(k−1)`, evaluated at a center point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorDynamics {
    #[serde(with = "rows")]
    pub a: DMatrix<f64>,
    #[serde(with = "rows")]
    pub b: DMatrix<f64>,
    pub spectral_radius_a: f64,
    pub spectral_radius_b: f64,
    pub spectral_radius_a_minus_b: f64,
}

impl ErrorDynamics {
    /// Max relative defect of `A t = t` and `B t = t`.
    pub fn fixed_vector_defect(&self, t: &TrustVector) -> (f64, f64) {
        let tv = nalgebra::DVector::from_column_slice(t.as_slice());
        let rel = |v: nalgebra::DVector<f64>| {
            v.iter()
                .zip(t.as_slice())
                .map(|(x, y)| ((x - y) / y).abs())
                .fold(0.0, f64::max)
        };
        (rel(&self.a * &tv), rel(&self.b * &tv))
    }
}

pub fn build_error_dynamics(trust: &LocalTrustMatrix, t_star: &TrustVector) -> Result<ErrorDynamics> {
    build_error_dynamics_of(&trust.received(), t_star, 10.0 * DEFAULT_TOL)
}

/// Rows `A_i = t_i M_i / (M_i t)` and `B_i = t_i C_i / (C_i t)`.
pub fn build_error_dynamics_of(m: &DMatrix<f64>, t_star: &TrustVector, threshold: f64) -> Result<ErrorDynamics> {
    check_square(m)?;
    let residual = center_residual_of(m, t_star)?;
    if residual > threshold {
        return Err(TrustError::NotAtFixedPoint { residual, threshold });
    }
    let n = m.nrows();
    let c = IncidenceMatrix::from_pattern(m).to_dense();
    let t = nalgebra::DVector::from_column_slice(t_star.as_slice());
    let mt = m * &t;
    let ct = &c * &t;
    let a = DMatrix::from_fn(n, n, |i, j| t[i] * m[(i, j)] / mt[i]);
    let b = DMatrix::from_fn(n, n, |i, j| t[i] * c[(i, j)] / ct[i]);
    let diff = &a - &b;
    Ok(ErrorDynamics {
        spectral_radius_a: spectral_radius(&a)?,
        spectral_radius_b: spectral_radius(&b)?,
        spectral_radius_a_minus_b: dense_spectral_radius(&diff)?,
        a,
        b,
    })
}

/// `f_i(δ) = 1 / (1 + (C_i δ)/(C_i t))`.
pub fn evaluate_prefactor(c: &IncidenceMatrix, t: &TrustVector, delta: &[f64]) -> Result<Vec<f64>> {
    let n = c.n();
    for len in [t.len(), delta.len()] {
        if len != n {
            return Err(TrustError::DimensionMismatch { expected: n, got: len });
        }
    }
    (0..n)
        .map(|i| {
            let raters = c.raters(i);
            if raters.is_empty() {
                return Err(TrustError::NoRaters(i));
            }
            let ct: f64 = raters.iter().map(|&j| t[j]).sum();
            let cd: f64 = raters.iter().map(|&j| delta[j]).sum();
            let denom = 1.0 + cd / ct;
            if !(denom > 0.0) {
                return Err(TrustError::SingularPrefactor { peer: i, value: denom });
            }
            Ok(1.0 / denom)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Supports and the constructive generator

/// Disjoint supports: `M_ij > 0` implies `N_ij = 0`.
pub fn are_mutually_exclusive(m: &DMatrix<f64>, n: &DMatrix<f64>) -> Result<bool> {
    if m.shape() != n.shape() {
        return Err(TrustError::DimensionMismatch {
            expected: m.nrows(),
            got: n.nrows(),
        });
    }
    Ok(m.iter().zip(n.iter()).all(|(a, b)| !(*a > 0.0 && *b > 0.0)))
}

/// Rescales each row of `base` so that `t` becomes the center point.
///
/// Row `i` is multiplied by `t_i (S_i t) / (base_i t)`, which forces
/// `(M_i t) / (S_i t) = t_i`. The output is an analysis matrix: its entries are
/// not confined to the rating scale.
pub fn make_matrix_with_center_point(
    support: &IncidenceMatrix,
    t: &TrustVector,
    base: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let n = support.n();
    if t.len() != n {
        return Err(TrustError::DimensionMismatch {
            expected: n,
            got: t.len(),
        });
    }
    if base.shape() != (n, n) {
        return Err(TrustError::DimensionMismatch {
            expected: n,
            got: base.nrows(),
        });
    }
    if let Some(i) = support.first_empty_row() {
        return Err(TrustError::EmptyRow(i));
    }
    for i in 0..n {
        for j in 0..n {
            let on = support.get(i, j) == 1;
            let v = base[(i, j)];
            if on != (v > 0.0) || !v.is_finite() || v < 0.0 {
                return Err(TrustError::SupportMismatch { row: i, col: j });
            }
        }
    }
    let mut out = base.clone();
    for i in 0..n {
        let st: f64 = support.raters(i).iter().map(|&j| t[j]).sum();
        let bt: f64 = support.raters(i).iter().map(|&j| base[(i, j)] * t[j]).sum();
        let scale = t[i] * st / bt;
        out.row_mut(i).iter_mut().for_each(|v| *v *= scale);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Property checks

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub k: f64,
    pub center: Vec<f64>,
    pub scaled_center: Vec<f64>,
    /// `‖center(kM) − k·center(M)‖∞`
    pub defect: f64,
    pub threshold: f64,
    pub passed: bool,
}

/// Center point of `kM` against `k` times the center point of `M`.
pub fn check_property_scaling(m: &DMatrix<f64>, k: f64, tol: f64) -> Result<ScalingReport> {
    if !(k.is_finite() && k > 0.0) {
        return Err(TrustError::InvalidConfig(format!("scale must be > 0, got {k}")));
    }
    let center = tight_center(m)?.solution;
    let scaled_center = tight_center(&(m * k))?.solution;
    let defect = center
        .as_slice()
        .iter()
        .zip(scaled_center.as_slice())
        .map(|(a, b)| (k * a - b).abs())
        .fold(0.0, f64::max);
    let threshold = 10.0 * tol;
    Ok(ScalingReport {
        k,
        center: center.into_inner(),
        scaled_center: scaled_center.into_inner(),
        defect,
        threshold,
        passed: defect < threshold,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositiveReport {
    pub center: Vec<f64>,
    /// Perron vector, normalised to unit sum.
    pub eigenvector: Vec<f64>,
    pub spectral_radius: f64,
    pub center_sum: f64,
    pub cosine_distance: f64,
    /// `|Σ t_j − ρ| / ρ`
    pub sum_relative_defect: f64,
    pub passed: bool,
}

pub const POSITIVE_CHECK_TOL: f64 = 1e-6;

/// For strictly positive `M` the center point is a Perron vector whose
/// component sum is `ρ(M)`.
pub fn check_property_positive(m: &DMatrix<f64>) -> Result<PositiveReport> {
    check_square(m)?;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if !(m[(i, j)] > 0.0) {
                return Err(TrustError::NotStrictlyPositive { row: i, col: j });
            }
        }
    }
    let center = tight_center(m)?.solution;
    let (rho, eigenvector) = perron_root(m)?;
    let cosine = {
        let dot: f64 = center.as_slice().iter().zip(&eigenvector).map(|(a, b)| a * b).sum();
        let na = center.as_slice().iter().map(|a| a * a).sum::<f64>().sqrt();
        let nb = eigenvector.iter().map(|b| b * b).sum::<f64>().sqrt();
        dot / (na * nb)
    };
    let cosine_distance = (1.0 - cosine).max(0.0);
    let center_sum = center.sum();
    let sum_relative_defect = ((center_sum - rho) / rho).abs();
    Ok(PositiveReport {
        passed: cosine_distance < POSITIVE_CHECK_TOL && sum_relative_defect < POSITIVE_CHECK_TOL,
        center: center.into_inner(),
        eigenvector,
        spectral_radius: rho,
        center_sum,
        cosine_distance,
        sum_relative_defect,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SumReport {
    pub parts: usize,
    pub target: Vec<f64>,
    pub center_of_sum: Vec<f64>,
    pub defect: f64,
    pub threshold: f64,
    pub passed: bool,
}

/// Center point of a sum of pairwise mutually exclusive parts that share the
/// center point `t`.
pub fn check_property_sum(parts: &[DMatrix<f64>], t: &TrustVector, tol: f64) -> Result<SumReport> {
    let first = parts
        .first()
        .ok_or_else(|| TrustError::InvalidConfig("at least one part is required".into()))?;
    for (a, pa) in parts.iter().enumerate() {
        for (b, pb) in parts.iter().enumerate().skip(a + 1) {
            if !are_mutually_exclusive(pa, pb)? {
                return Err(TrustError::NotMutuallyExclusive { first: a, second: b });
            }
        }
    }
    let sum = parts.iter().skip(1).fold(first.clone(), |acc, p| acc + p);
    if t.len() != sum.nrows() {
        return Err(TrustError::DimensionMismatch {
            expected: sum.nrows(),
            got: t.len(),
        });
    }
    let center = tight_center(&sum)?.solution;
    let defect = center.distance_inf(t);
    let threshold = 10.0 * tol;
    Ok(SumReport {
        parts: parts.len(),
        target: t.as_slice().to_vec(),
        center_of_sum: center.into_inner(),
        defect,
        threshold,
        passed: defect < threshold,
    })
}

// ---------------------------------------------------------------------------
// Large-error bound

/// Evaluation of the large-error inequality chain at one error vector `δ`,
/// using the approximation `t* + δ ≈ δ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LargeErrorReport {
    pub alpha: f64,
    pub delta_norm: f64,
    /// Global-trust step applied to `δ` alone.
    pub approx_next: Vec<f64>,
    /// `φ₁(δ)/(1+α) + α φ₂(δ)/(1+α)`
    pub bound: Vec<f64>,
    /// `min_i (bound_i − approx_next_i)`; nonnegative when the Young bound holds.
    pub young_slack: f64,
    /// `‖M₁' δ‖∞ = ‖φ₁(δ)‖∞`
    pub phi1_norm: f64,
    /// `‖M₂' δ‖∞ = ‖φ₂(δ)‖∞`
    pub phi2_norm: f64,
    /// Max absolute row-sum defect of `M₂'` (its ∞-norm is 1).
    pub m2_row_sum_defect: f64,
    pub bound_norm: f64,
    /// `‖φ(t* + δ) − t*‖∞`, the exact next error.
    pub exact_next_norm: f64,
    /// `exact_next_norm / delta_norm`
    pub contraction_ratio: f64,
    pub young_holds: bool,
    pub phi2_bound_holds: bool,
    pub phi1_bound_holds: bool,
    pub passed: bool,
}

/// Next approximate error and its Young bound, without a regime check.
pub fn young_bound(m: &DMatrix<f64>, delta: &TrustVector, alpha: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let c = IncidenceMatrix::from_pattern(m);
    let next = global_trust_step_of(m, &c, delta, alpha)?;
    let p1 = phi1_of(m, &c, delta)?;
    let p2 = phi2_step(&c, delta)?;
    let w = 1.0 / (1.0 + alpha);
    let bound = p1
        .as_slice()
        .iter()
        .zip(p2.as_slice())
        .map(|(a, b)| w * a + (1.0 - w) * b)
        .collect();
    Ok((next.into_inner(), bound))
}

pub fn check_eq3_bound(
    trust: &LocalTrustMatrix,
    t_star: &TrustVector,
    delta: &TrustVector,
    alpha: f64,
) -> Result<LargeErrorReport> {
    check_eq3_bound_of(&trust.received(), t_star, delta, alpha)
}

pub fn check_eq3_bound_of(
    m: &DMatrix<f64>,
    t_star: &TrustVector,
    delta: &TrustVector,
    alpha: f64,
) -> Result<LargeErrorReport> {
    let n = m.nrows();
    for len in [t_star.len(), delta.len()] {
        if len != n {
            return Err(TrustError::DimensionMismatch { expected: n, got: len });
        }
    }
    if let Some(i) = (0..n).find(|&i| !(delta[i] > t_star[i])) {
        return Err(TrustError::RegimeViolation {
            peer: i,
            delta: delta[i],
            trust: t_star[i],
        });
    }
    let c = IncidenceMatrix::from_pattern(m);
    let (approx_next, bound) = young_bound(m, delta, alpha)?;
    let phi1_norm = inf_norm(phi1_of(m, &c, delta)?.as_slice());
    let phi2_norm = inf_norm(phi2_step(&c, delta)?.as_slice());
    let m2_row_sum_defect = (0..n)
        .map(|i| {
            let denom: f64 = c.raters(i).iter().map(|&j| delta[j]).sum();
            let row_sum: f64 = c.raters(i).iter().map(|&j| delta[j] / denom).sum();
            (row_sum - 1.0).abs()
        })
        .fold(0.0, f64::max);
    let delta_norm = inf_norm(delta.as_slice());
    let bound_norm = inf_norm(&bound);
    let young_slack = bound
        .iter()
        .zip(&approx_next)
        .map(|(b, x)| b - x)
        .fold(f64::INFINITY, f64::min);

    let shifted = TrustVector::new(
        t_star
            .as_slice()
            .iter()
            .zip(delta.as_slice())
            .map(|(a, b)| a + b)
            .collect(),
    )?;
    let exact = global_trust_step_of(m, &c, &shifted, alpha)?;
    let exact_next_norm = exact.distance_inf(t_star);

    // Young holds up to rounding of the two sides.
    let young_holds = bound.iter().zip(&approx_next).all(|(b, x)| *x <= b * (1.0 + 1e-12));
    let phi2_bound_holds = phi2_norm <= delta_norm * (1.0 + 1e-12) && m2_row_sum_defect < 1e-12;
    let phi1_bound_holds = phi1_norm < delta_norm;
    let contracts = bound_norm < delta_norm && inf_norm(&approx_next) < delta_norm;
    Ok(LargeErrorReport {
        alpha,
        delta_norm,
        approx_next,
        bound,
        young_slack,
        phi1_norm,
        phi2_norm,
        m2_row_sum_defect,
        bound_norm,
        exact_next_norm,
        contraction_ratio: exact_next_norm / delta_norm,
        young_holds,
        phi2_bound_holds,
        phi1_bound_holds,
        passed: young_holds && phi2_bound_holds && phi1_bound_holds && contracts,
    })
}

// ---------------------------------------------------------------------------
// Row-stochastic family along a φ₂ trajectory

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StochasticFamily {
    #[serde(skip)]
    pub matrices: Vec<DMatrix<f64>>,
    pub max_row_sum_defect: f64,
    pub min_entry: f64,
    pub spectral_radii: Vec<f64>,
    pub passed: bool,
}

pub const STOCHASTIC_RADIUS_TOL: f64 = 1e-6;

/// `M(k)` with rows `C_i diag(t^k) / (C_i t^k)` for each point of a trajectory.
pub fn check_row_stochastic_family(c: &IncidenceMatrix, trajectory: &[TrustVector]) -> Result<StochasticFamily> {
    let n = c.n();
    let mut matrices = Vec::with_capacity(trajectory.len());
    let mut spectral_radii = Vec::with_capacity(trajectory.len());
    let mut max_row_sum_defect = 0.0f64;
    let mut min_entry = f64::INFINITY;
    for t in trajectory {
        if t.len() != n {
            return Err(TrustError::DimensionMismatch {
                expected: n,
                got: t.len(),
            });
        }
        let mut mk = DMatrix::zeros(n, n);
        for i in 0..n {
            let raters = c.raters(i);
            if raters.is_empty() {
                return Err(TrustError::NoRaters(i));
            }
            let denom: f64 = raters.iter().map(|&j| t[j]).sum();
            for &j in raters {
                mk[(i, j)] = t[j] / denom;
            }
            let row_sum: f64 = mk.row(i).iter().sum();
            max_row_sum_defect = max_row_sum_defect.max((row_sum - 1.0).abs());
        }
        min_entry = min_entry.min(mk.iter().copied().fold(f64::INFINITY, f64::min));
        spectral_radii.push(spectral_radius(&mk)?);
        matrices.push(mk);
    }
    let passed = max_row_sum_defect < 1e-10
        && min_entry >= 0.0
        && spectral_radii.iter().all(|r| (r - 1.0).abs() < STOCHASTIC_RADIUS_TOL);
    Ok(StochasticFamily {
        matrices,
        max_row_sum_defect,
        min_entry,
        spectral_radii,
        passed,
    })
}

// ---------------------------------------------------------------------------
// Whole-matrix report

/// Where the second-moment iteration ends up, started from the global trust.
/// It equalises all components on aperiodic supports and cycles on periodic
/// ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phi2Limit {
    pub converged: bool,
    pub iterations: usize,
    /// `(max − min) / max` of the last iterate.
    pub relative_spread: f64,
}

const STOCHASTIC_TRAJECTORY_CAP: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsSummary {
    pub center_point: Vec<f64>,
    pub spectral_radius_a: f64,
    pub spectral_radius_b: f64,
    pub spectral_radius_a_minus_b: f64,
    pub a_fixed_defect: f64,
    pub b_fixed_defect: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub dynamics: DynamicsSummary,
    pub scaling: Vec<ScalingReport>,
    pub positive: PositiveReport,
    pub sum: SumReport,
    pub large_error: Vec<LargeErrorReport>,
    pub stochastic: StochasticFamily,
    /// Informational; not part of `passed`.
    pub phi2_limit: Phi2Limit,
    pub passed: bool,
}

/// Runs every check on one matrix (received orientation).
///
/// Properties 2 and 3 are exercised through a decomposition into the
/// matrix itself plus a generated part on the complementary support: both
/// share the matrix's center point, and their sum is strictly positive.
pub fn analyze_matrix(m: &DMatrix<f64>, alpha: f64, tol: f64) -> Result<AnalysisReport> {
    let n = m.nrows();
    let center = tight_center(m)?.solution;

    let dynamics = build_error_dynamics_of(m, &center, 10.0 * tol)?;
    let (a_fixed_defect, b_fixed_defect) = dynamics.fixed_vector_defect(&center);
    let dynamics = DynamicsSummary {
        center_point: center.as_slice().to_vec(),
        passed: a_fixed_defect < 1e-10
            && b_fixed_defect < 1e-10
            && (dynamics.spectral_radius_a - 1.0).abs() < STOCHASTIC_RADIUS_TOL
            && (dynamics.spectral_radius_b - 1.0).abs() < STOCHASTIC_RADIUS_TOL
            && dynamics.spectral_radius_a_minus_b < 1.0,
        spectral_radius_a: dynamics.spectral_radius_a,
        spectral_radius_b: dynamics.spectral_radius_b,
        spectral_radius_a_minus_b: dynamics.spectral_radius_a_minus_b,
        a_fixed_defect,
        b_fixed_defect,
    };

    let scaling = [0.5, 2.0, 10.0]
        .into_iter()
        .map(|k| check_property_scaling(m, k, tol))
        .collect::<Result<Vec<_>>>()?;

    let complement = DMatrix::from_fn(n, n, |i, j| if m[(i, j)] > 0.0 { 0.0 } else { 1.0 });
    let mut parts = vec![m.clone()];
    if complement.iter().any(|&v| v > 0.0) {
        let support = IncidenceMatrix::from_pattern(&complement);
        if support.first_empty_row().is_none() {
            parts.push(make_matrix_with_center_point(&support, &center, &complement)?);
        }
    }
    let sum = check_property_sum(&parts, &center, tol)?;
    let total = parts.iter().skip(1).fold(parts[0].clone(), |acc, p| acc + p);
    let positive = check_property_positive(&total)?;

    let gt_cfg = SolverConfig {
        alpha,
        tol: PROPERTY_SOLVE_TOL,
        max_iters: PROPERTY_SOLVE_ITERS,
        ..SolverConfig::default()
    };
    let t_star = crate::solvers::global_trust_of(m, &gt_cfg)?.solution;
    let large_error = [10.0, 100.0]
        .into_iter()
        .map(|k| check_eq3_bound_of(m, &t_star, &t_star.scaled(k)?, alpha))
        .collect::<Result<Vec<_>>>()?;

    let c = IncidenceMatrix::from_pattern(m);
    let phi2_cfg = SolverConfig::default().with_tol(tol).with_initial(t_star.clone());
    // A periodic support makes φ₂ cycle rather than converge; the family
    // check only needs the trajectory, so a non-converged trace is kept.
    let phi2_trace = match crate::solvers::phi2_solve(&c, &phi2_cfg) {
        Ok(r) => r.trace,
        Err(TrustError::NotConverged { trace }) => *trace,
        Err(e) => return Err(e),
    };
    let last = phi2_trace.last();
    let phi2_limit = Phi2Limit {
        converged: phi2_trace.converged,
        iterations: phi2_trace.iterations_used,
        relative_spread: (last.max() - last.min()) / last.max(),
    };
    let trajectory = &phi2_trace.iterates[..phi2_trace.iterates.len().min(STOCHASTIC_TRAJECTORY_CAP)];
    let stochastic = check_row_stochastic_family(&c, trajectory)?;

    let passed = dynamics.passed
        && scaling.iter().all(|r| r.passed)
        && positive.passed
        && sum.passed
        && large_error.iter().all(|r| r.passed)
        && stochastic.passed;
    Ok(AnalysisReport {
        dynamics,
        scaling,
        positive,
        sum,
        large_error,
        stochastic,
        phi2_limit,
        passed,
    })
}
