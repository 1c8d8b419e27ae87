//! Fixed-point iterations: the center-point map φ₁, the second-moment map φ₂
//! and the global-trust map φ (their weighted geometric mean).
//!
//! All maps work row-wise on the "received" orientation `M = Tᵗ`: peer `i`
//! combines the current trust of its raters `S_i` with the ratings they gave
//! it. Each component is computed by [`RaterMoments`] + [`combine_global`],
//! which the simulator reuses so both paths perform identical arithmetic.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TrustError};
use crate::matrix::{inf_distance, IncidenceMatrix, LocalTrustMatrix, TrustVector};

pub const DEFAULT_TOL: f64 = 5e-5;
pub const DEFAULT_MAX_ITERS: usize = 1000;
pub const DEFAULT_ALPHA: f64 = 1.0 / 3.0;

/// Rater values spanning more than this ratio switch the geometric mean to
/// log space.
pub const LOG_SPACE_SPAN: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialGuess {
    Uniform,
    Vector(TrustVector),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub alpha: f64,
    pub tol: f64,
    pub max_iters: usize,
    pub initial: InitialGuess,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            tol: DEFAULT_TOL,
            max_iters: DEFAULT_MAX_ITERS,
            initial: InitialGuess::Uniform,
        }
    }
}

impl SolverConfig {
    pub fn new(alpha: f64, tol: f64, max_iters: usize, initial: InitialGuess) -> Result<Self> {
        let cfg = Self {
            alpha,
            tol,
            max_iters,
            initial,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_initial(mut self, initial: TrustVector) -> Self {
        self.initial = InitialGuess::Vector(initial);
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(TrustError::InvalidConfig(format!(
                "alpha must be > 0, got {}",
                self.alpha
            )));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(TrustError::InvalidConfig(format!("tol must be > 0, got {}", self.tol)));
        }
        if self.max_iters == 0 {
            return Err(TrustError::InvalidConfig("max_iters must be >= 1".into()));
        }
        Ok(())
    }

    pub fn initial_for(&self, n: usize) -> Result<TrustVector> {
        match &self.initial {
            InitialGuess::Uniform => Ok(TrustVector::ones(n)),
            InitialGuess::Vector(v) if v.len() == n => Ok(v.clone()),
            InitialGuess::Vector(v) => Err(TrustError::DimensionMismatch {
                expected: n,
                got: v.len(),
            }),
        }
    }
}

/// Iterates of a fixed-point run.
///
/// `errors[k - 1] = ‖iterates[k] − iterates[k − 1]‖∞`, so `errors` is one
/// shorter than `iterates`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub iterates: Vec<TrustVector>,
    pub errors: Vec<f64>,
    pub converged: bool,
    pub iterations_used: usize,
}

impl IterationTrace {
    pub(crate) fn start(initial: TrustVector) -> Self {
        Self {
            iterates: vec![initial],
            errors: Vec::new(),
            converged: false,
            iterations_used: 0,
        }
    }

    pub(crate) fn push(&mut self, next: TrustVector) -> f64 {
        let err = next.distance_inf(self.last());
        self.iterates.push(next);
        self.errors.push(err);
        self.iterations_used += 1;
        err
    }

    pub fn last(&self) -> &TrustVector {
        self.iterates.last().expect("trace always holds the initial vector")
    }

    /// `‖t^k − reference‖∞` for every iterate, i.e. the error sequence δt^k.
    pub fn distances_to(&self, reference: &TrustVector) -> Vec<f64> {
        self.iterates.iter().map(|t| t.distance_inf(reference)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub solution: TrustVector,
    pub trace: IterationTrace,
    /// `‖step(solution) − solution‖∞` for the map that was iterated.
    pub residual: f64,
}

/// Runs `step` from `initial` until successive iterates differ by less than
/// `tol` in ∞-norm. An initial vector that `step` maps exactly onto itself
/// converges after zero iterations.
pub fn iterate<F>(initial: TrustVector, tol: f64, max_iters: usize, mut step: F) -> Result<SolveResult>
where
    F: FnMut(&TrustVector) -> Result<TrustVector>,
{
    let mut trace = IterationTrace::start(initial);
    let first = step(trace.last())?;
    if first == *trace.last() {
        trace.converged = true;
        let solution = first;
        return Ok(SolveResult {
            solution,
            trace,
            residual: 0.0,
        });
    }
    let mut next = first;
    loop {
        let err = trace.push(next);
        if err < tol {
            trace.converged = true;
            break;
        }
        if trace.iterations_used >= max_iters {
            return Err(TrustError::NotConverged { trace: Box::new(trace) });
        }
        next = step(trace.last())?;
    }
    let solution = trace.last().clone();
    let residual = step(&solution)?.distance_inf(&solution);
    Ok(SolveResult {
        solution,
        trace,
        residual,
    })
}

/// Sums over the raters of one peer, accumulated in ascending rater order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RaterMoments {
    /// `Σ_{j∈S_i} M_ij t_j`
    pub weighted: f64,
    /// `Σ_{j∈S_i} t_j`
    pub first: f64,
    /// `Σ_{j∈S_i} t_j²`
    pub second: f64,
    pub min: f64,
    pub max: f64,
}

impl Default for RaterMoments {
    fn default() -> Self {
        Self {
            weighted: 0.0,
            first: 0.0,
            second: 0.0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        }
    }
}

impl RaterMoments {
    pub fn add(&mut self, rating: f64, trust: f64) {
        self.weighted += rating * trust;
        self.first += trust;
        self.second += trust * trust;
        self.min = self.min.min(trust);
        self.max = self.max.max(trust);
    }

    fn collect(m: &DMatrix<f64>, raters: &[usize], row: usize, t: &[f64]) -> Self {
        let mut acc = Self::default();
        for &j in raters {
            acc.add(m[(row, j)], t[j]);
        }
        acc
    }

    /// φ₁ component: trust-weighted average rating.
    pub fn center(&self) -> f64 {
        self.weighted / self.first
    }

    /// φ₂ component: ratio of second to first moment.
    pub fn moment_ratio(&self) -> f64 {
        self.second / self.first
    }

    pub fn span(&self) -> f64 {
        self.max / self.min
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpMode {
    Direct,
    LogSpace,
}

/// `center^(1/(1+α)) · ratio^(α/(1+α))`.
pub fn geometric_combine(center: f64, ratio: f64, alpha: f64, mode: ExpMode) -> f64 {
    if center == ratio {
        return center;
    }
    match mode {
        ExpMode::Direct => center.powf(1.0 / (1.0 + alpha)) * ratio.powf(alpha / (1.0 + alpha)),
        ExpMode::LogSpace => ((center.ln() + alpha * ratio.ln()) / (1.0 + alpha)).exp(),
    }
}

/// One peer's global-trust update from its rater moments.
pub fn combine_global(moments: &RaterMoments, alpha: f64) -> f64 {
    let mode = if moments.span() > LOG_SPACE_SPAN {
        ExpMode::LogSpace
    } else {
        ExpMode::Direct
    };
    geometric_combine(moments.center(), moments.moment_ratio(), alpha, mode)
}

fn check_dims(c: &IncidenceMatrix, t: &TrustVector) -> Result<()> {
    if c.n() != t.len() {
        return Err(TrustError::DimensionMismatch {
            expected: c.n(),
            got: t.len(),
        });
    }
    if let Some(i) = c.first_empty_row() {
        return Err(TrustError::NoRaters(i));
    }
    Ok(())
}

fn map_rows<F>(m: &DMatrix<f64>, c: &IncidenceMatrix, t: &TrustVector, f: F) -> Result<TrustVector>
where
    F: Fn(&RaterMoments) -> f64,
{
    check_dims(c, t)?;
    let values = (0..c.n())
        .map(|i| f(&RaterMoments::collect(m, c.raters(i), i, t.as_slice())))
        .collect();
    TrustVector::new(values)
}

/// φ₁ on an arbitrary nonnegative matrix in received orientation.
pub fn phi1_of(m: &DMatrix<f64>, c: &IncidenceMatrix, t: &TrustVector) -> Result<TrustVector> {
    map_rows(m, c, t, RaterMoments::center)
}

/// `t'_i = (Σ_{j∈S_i} T_ji t_j) / (Σ_{j∈S_i} t_j)`.
pub fn phi1_step(trust: &LocalTrustMatrix, c: &IncidenceMatrix, t: &TrustVector) -> Result<TrustVector> {
    phi1_of(&trust.received(), c, t)
}

/// `t'_i = (Σ_{j∈S_i} t_j²) / (Σ_{j∈S_i} t_j)`.
pub fn phi2_step(c: &IncidenceMatrix, t: &TrustVector) -> Result<TrustVector> {
    check_dims(c, t)?;
    let values = (0..c.n())
        .map(|i| {
            let mut acc = RaterMoments::default();
            for &j in c.raters(i) {
                acc.add(0.0, t[j]);
            }
            acc.moment_ratio()
        })
        .collect();
    TrustVector::new(values)
}

pub fn global_trust_step_of(m: &DMatrix<f64>, c: &IncidenceMatrix, t: &TrustVector, alpha: f64) -> Result<TrustVector> {
    map_rows(m, c, t, |mom| combine_global(mom, alpha))
}

/// `t'_i = φ₁(t)_i^(1/(1+α)) · φ₂(t)_i^(α/(1+α))`.
pub fn global_trust_step(
    trust: &LocalTrustMatrix,
    c: &IncidenceMatrix,
    t: &TrustVector,
    alpha: f64,
) -> Result<TrustVector> {
    global_trust_step_of(&trust.received(), c, t, alpha)
}

/// Checks that `m` is a square nonnegative matrix with irreducible support.
fn irreducible_support(m: &DMatrix<f64>) -> Result<IncidenceMatrix> {
    if !m.is_square() {
        return Err(TrustError::NonSquare {
            row: 0,
            len: m.ncols(),
            expected: m.nrows(),
        });
    }
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let v = m[(i, j)];
            if !v.is_finite() {
                return Err(TrustError::NonFinite { row: i, col: j });
            }
            if v < 0.0 {
                return Err(TrustError::NegativeEntry {
                    row: i,
                    col: j,
                    value: v,
                });
            }
        }
    }
    let c = IncidenceMatrix::from_pattern(m);
    if !c.is_irreducible() {
        return Err(TrustError::NotIrreducible);
    }
    Ok(c)
}

/// Center point of an arbitrary nonnegative irreducible matrix `m`
/// (`t_i = e_i m t / e_i C t` with `C` the support of `m`).
pub fn center_point_of(m: &DMatrix<f64>, cfg: &SolverConfig) -> Result<SolveResult> {
    cfg.validate()?;
    let c = irreducible_support(m)?;
    let initial = cfg.initial_for(m.nrows())?;
    iterate(initial, cfg.tol, cfg.max_iters, |t| phi1_of(m, &c, t))
}

/// Center point of `Tᵗ`. `cfg.alpha` is not used.
pub fn center_point(trust: &LocalTrustMatrix, cfg: &SolverConfig) -> Result<SolveResult> {
    center_point_of(&trust.received(), cfg)
}

/// Iterates φ₂. The limit is a multiple of `e` that depends on the initial
/// guess, since φ₂ is homogeneous of degree one.
pub fn phi2_solve(c: &IncidenceMatrix, cfg: &SolverConfig) -> Result<SolveResult> {
    cfg.validate()?;
    if !c.is_irreducible() {
        return Err(TrustError::NotIrreducible);
    }
    let initial = cfg.initial_for(c.n())?;
    iterate(initial, cfg.tol, cfg.max_iters, |t| phi2_step(c, t))
}

pub fn global_trust_of(m: &DMatrix<f64>, cfg: &SolverConfig) -> Result<SolveResult> {
    cfg.validate()?;
    let c = irreducible_support(m)?;
    let initial = cfg.initial_for(m.nrows())?;
    iterate(initial, cfg.tol, cfg.max_iters, |t| {
        global_trust_step_of(m, &c, t, cfg.alpha)
    })
}

/// Solves the global trust equation by iterating [`global_trust_step`].
pub fn global_trust(trust: &LocalTrustMatrix, cfg: &SolverConfig) -> Result<SolveResult> {
    global_trust_of(&trust.received(), cfg)
}

/// ∞-norm defect of `t` as a solution of the global trust equation.
pub fn eq1_residual(trust: &LocalTrustMatrix, t: &TrustVector, alpha: f64) -> Result<f64> {
    let c = trust.incidence();
    Ok(global_trust_step(trust, &c, t, alpha)?.distance_inf(t))
}

/// `‖φ₁(t) − t‖∞` on a received-orientation matrix.
pub fn center_residual_of(m: &DMatrix<f64>, t: &TrustVector) -> Result<f64> {
    let c = IncidenceMatrix::from_pattern(m);
    Ok(inf_distance(phi1_of(m, &c, t)?.as_slice(), t.as_slice()))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::matrix::tests::example_ratings;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tv(v: &[f64]) -> TrustVector {
        TrustVector::new(v.to_vec()).unwrap()
    }

    fn assert_close(a: &TrustVector, b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.as_slice().iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    fn cfg(alpha: f64, initial: &[f64]) -> SolverConfig {
        SolverConfig::default().with_alpha(alpha).with_initial(tv(initial))
    }

    /// Random irreducible rating matrix with zero diagonal.
    pub(crate) fn random_irreducible(rng: &mut impl Rng, n: usize, p: f64) -> LocalTrustMatrix {
        loop {
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            if i != j && rng.gen_bool(p) {
                                rng.gen_range(1.0..=10.0)
                            } else {
                                0.0
                            }
                        })
                        .collect()
                })
                .collect();
            let t = LocalTrustMatrix::from_rows(&rows).unwrap();
            if t.incidence().is_irreducible() {
                return t;
            }
        }
    }

    #[test]
    fn phi1_first_row_of_table_1() {
        let t = example_ratings();
        let out = phi1_step(&t, &t.incidence(), &tv(&[1.0, 2.0, 3.0, 4.0])).unwrap();
        assert_close(&out, &[6.2, 4.875, 16.0 / 3.0, 11.0 / 3.0], 1e-12);
    }

    #[test]
    fn phi1_constant_ratings_and_scale_invariance() {
        let t = LocalTrustMatrix::from_rows(&[[0.0, 7.0, 7.0], [7.0, 0.0, 0.0], [0.0, 7.0, 0.0]]).unwrap();
        let out = phi1_step(&t, &t.incidence(), &tv(&[0.3, 9.0, 2.0])).unwrap();
        assert_close(&out, &[7.0; 3], 1e-12);

        let t = example_ratings();
        let c = t.incidence();
        let a = phi1_step(&t, &c, &tv(&[1.0, 2.0, 3.0, 4.0])).unwrap();
        let b = phi1_step(&t, &c, &tv(&[2.0, 4.0, 6.0, 8.0])).unwrap();
        assert_close(&a, b.as_slice(), 1e-12);
    }

    #[test]
    fn phi2_examples() {
        let c = example_ratings().incidence();
        let out = phi2_step(&c, &tv(&[1.0, 2.0, 3.0, 4.0])).unwrap();
        assert_close(&out, &[13.0 / 5.0, 26.0 / 8.0, 5.0 / 3.0, 14.0 / 6.0], 1e-12);
        let out = phi2_step(&c, &TrustVector::constant(4, 3.5).unwrap()).unwrap();
        assert_close(&out, &[3.5; 4], 1e-12);
    }

    #[test]
    fn no_raters_is_reported() {
        let t = LocalTrustMatrix::from_rows(&[[0.0, 1.0], [0.0, 0.0]]).unwrap();
        let c = t.incidence();
        let err = phi1_step(&t, &c, &TrustVector::ones(2)).unwrap_err();
        assert!(matches!(err, TrustError::NoRaters(0)));
        assert!(matches!(
            phi2_step(&c, &TrustVector::ones(2)),
            Err(TrustError::NoRaters(0))
        ));
        assert!(matches!(
            global_trust_step(&t, &c, &TrustVector::ones(2), 0.5),
            Err(TrustError::NoRaters(0))
        ));
        assert!(matches!(
            center_point(&t, &SolverConfig::default()),
            Err(TrustError::NotIrreducible)
        ));
        assert!(matches!(
            global_trust(&t, &SolverConfig::default()),
            Err(TrustError::NotIrreducible)
        ));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let t = example_ratings();
        let err = phi1_step(&t, &t.incidence(), &TrustVector::ones(3)).unwrap_err();
        assert!(matches!(err, TrustError::DimensionMismatch { expected: 4, got: 3 }));
        let err = center_point(&t, &cfg(0.5, &[1.0, 2.0])).unwrap_err();
        assert!(matches!(err, TrustError::DimensionMismatch { expected: 4, got: 2 }));
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::new(0.0, 1e-3, 10, InitialGuess::Uniform).is_err());
        assert!(SolverConfig::new(0.5, 0.0, 10, InitialGuess::Uniform).is_err());
        assert!(SolverConfig::new(0.5, 1e-3, 0, InitialGuess::Uniform).is_err());
        assert!(SolverConfig::new(f64::NAN, 1e-3, 1, InitialGuess::Uniform).is_err());
        let c = SolverConfig::default();
        assert_eq!((c.tol, c.max_iters, c.initial), (5e-5, 1000, InitialGuess::Uniform));
    }

    #[test]
    fn center_point_tables_1_and_2() {
        let t = example_ratings();
        for initial in [[1.0, 2.0, 3.0, 4.0], [100.0, 300.0, 200.0, 100.0]] {
            let r = center_point(&t, &cfg(1.0, &initial)).unwrap();
            assert_close(&r.solution, &[6.4311, 5.0708, 5.5591, 4.3994], 5e-5);
            assert_eq!(r.trace.iterations_used, 7);
            assert!(r.trace.converged && r.residual < DEFAULT_TOL);
        }
    }

    #[test]
    fn center_point_two_peers_is_swap() {
        for (a, b) in [(1.0, 10.0), (3.5, 7.25), (2.0, 2.0)] {
            let t = LocalTrustMatrix::from_rows(&[[0.0, a], [b, 0.0]]).unwrap();
            let r = center_point(&t, &cfg(1.0, &[0.2, 5.0])).unwrap();
            assert_close(&r.solution, &[b, a], 1e-12);
        }
    }

    #[test]
    fn phi2_solve_examples() {
        let c = example_ratings().incidence();
        let r = phi2_solve(
            &c,
            &SolverConfig::default()
                .with_tol(1e-12)
                .with_initial(tv(&[1.0, 2.0, 3.0, 4.0])),
        )
        .unwrap();
        assert!(r.solution.max() - r.solution.min() < 1e-6, "{:?}", r.solution);

        let r = phi2_solve(&c, &SolverConfig::default()).unwrap();
        assert_eq!(r.trace.iterations_used, 0);
        assert_eq!(r.solution, TrustVector::ones(4));

        let five = TrustVector::constant(4, 5.0).unwrap();
        let r = phi2_solve(&c, &SolverConfig::default().with_initial(five.clone())).unwrap();
        assert_eq!(r.trace.iterations_used, 0);
        assert_eq!(r.solution, five);
    }

    #[test]
    fn global_step_first_rows() {
        let t = example_ratings();
        let c = t.incidence();
        let start = tv(&[1.0, 2.0, 3.0, 4.0]);
        let out = global_trust_step(&t, &c, &start, 1.0 / 3.0).unwrap();
        assert_close(&out, &[4.9893, 4.4051, 3.9876, 3.2749], 5e-5);
        let out = global_trust_step(&t, &c, &start, 1.0 / 6.0).unwrap();
        assert_close(&out, &[5.4761, 4.6006, 4.5168, 3.4374], 5e-5);

        let k = LocalTrustMatrix::from_rows(&[[0.0, 4.0, 0.0], [0.0, 0.0, 4.0], [4.0, 4.0, 0.0]]).unwrap();
        let out = global_trust_step(&k, &k.incidence(), &TrustVector::constant(3, 4.0).unwrap(), 0.7).unwrap();
        assert_close(&out, &[4.0; 3], 1e-12);
    }

    #[test]
    fn global_trust_tables_3_to_5() {
        let t = example_ratings();
        let cases = [
            (1.0 / 3.0, [1.0, 2.0, 3.0, 4.0], [6.1606, 5.1728, 5.5847, 4.6667], 10),
            (
                1.0 / 3.0,
                [100.0, 300.0, 200.0, 100.0],
                [6.1606, 5.1728, 5.5847, 4.6667],
                11,
            ),
            (1.0 / 6.0, [1.0, 2.0, 3.0, 4.0], [6.2717, 5.1307, 5.5793, 4.5512], 7),
        ];
        for (alpha, initial, expected, iters) in cases {
            let r = global_trust(&t, &cfg(alpha, &initial)).unwrap();
            assert_close(&r.solution, &expected, 5e-5);
            assert_eq!(r.trace.iterations_used, iters);
        }
    }

    #[test]
    fn not_converged_carries_trace() {
        let t = example_ratings();
        let mut c = cfg(1.0 / 3.0, &[1.0, 2.0, 3.0, 4.0]);
        c.max_iters = 3;
        match global_trust(&t, &c) {
            Err(TrustError::NotConverged { trace }) => {
                assert_eq!(trace.iterations_used, 3);
                assert_eq!(trace.iterates.len(), 4);
                assert!(!trace.converged);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn eq1_residual_examples() {
        let t = example_ratings();
        let r = eq1_residual(&t, &tv(&[6.1606, 5.1728, 5.5847, 4.6667]), 1.0 / 3.0).unwrap();
        assert!(r < 5e-5, "{r}");
        let k = LocalTrustMatrix::from_rows(&[[0.0, 2.5], [2.5, 0.0]]).unwrap();
        assert_eq!(
            eq1_residual(&k, &TrustVector::constant(2, 2.5).unwrap(), 0.3).unwrap(),
            0.0
        );
        // one step from e moves every component by more than 1
        let step = global_trust_step(&t, &t.incidence(), &TrustVector::ones(4), 1.0 / 3.0).unwrap();
        assert!(step.as_slice().iter().all(|v| (v - 1.0).abs() > 1.0));
        assert!(eq1_residual(&t, &TrustVector::ones(4), 1.0 / 3.0).unwrap() > 1.0);
    }

    #[test]
    fn trace_errors_are_successive_distances() {
        let r = global_trust(&example_ratings(), &cfg(1.0 / 3.0, &[1.0, 2.0, 3.0, 4.0])).unwrap();
        let tr = &r.trace;
        assert_eq!(tr.errors.len() + 1, tr.iterates.len());
        for k in 1..tr.iterates.len() {
            assert_eq!(tr.errors[k - 1], tr.iterates[k].distance_inf(&tr.iterates[k - 1]));
        }
        assert!(*tr.errors.last().unwrap() < DEFAULT_TOL);
    }

    #[test]
    fn alpha_speed_on_example() {
        let t = example_ratings();
        let fast = global_trust(&t, &cfg(1.0 / 6.0, &[1.0, 2.0, 3.0, 4.0])).unwrap();
        let slow = global_trust(&t, &cfg(1.0 / 3.0, &[1.0, 2.0, 3.0, 4.0])).unwrap();
        assert!(fast.trace.iterations_used < slow.trace.iterations_used);
    }

    #[test]
    fn log_space_agrees_with_direct() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let center = rng.gen_range(1.0..10.0);
            let ratio = 10f64.powf(rng.gen_range(-3.0..4.0));
            let alpha = rng.gen_range(0.05..3.0);
            let d = geometric_combine(center, ratio, alpha, ExpMode::Direct);
            let l = geometric_combine(center, ratio, alpha, ExpMode::LogSpace);
            assert!(((d - l) / d).abs() < 1e-10, "{d} {l}");
        }
    }

    #[test]
    fn extreme_initial_guess_converges() {
        let t = example_ratings();
        let r = global_trust(&t, &cfg(1.0 / 3.0, &[1e-9, 1e9, 1.0, 1e4])).unwrap();
        assert_close(&r.solution, &[6.1606, 5.1728, 5.5847, 4.6667], 1e-4);
    }

    #[test]
    fn monotone_error_decrease_on_example_ratings() {
        let t = example_ratings();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for alpha in [1.0 / 3.0, 1.0 / 6.0] {
            let star = global_trust(&t, &SolverConfig::default().with_alpha(alpha).with_tol(1e-14))
                .unwrap()
                .solution;
            for _ in 0..200 {
                let init: Vec<f64> = (0..4).map(|_| 10f64.powf(rng.gen_range(-2.0..3.0))).collect();
                let r = global_trust(&t, &cfg(alpha, &init).with_tol(1e-12)).unwrap();
                let d = r.trace.distances_to(&star);
                for w in d.windows(2).filter(|w| w[1] > 1e-9) {
                    assert!(w[1] < w[0], "{init:?}: {d:?}");
                }
            }
        }
    }

    /// Reported counterexample: strict decrease of the error is not universal.
    #[test]
    fn monotone_error_decrease_fails_on_single_rater_cycle() {
        let t = LocalTrustMatrix::from_rows(&[[0.0, 0.0, 7.5], [1.5, 0.0, 0.0], [0.0, 2.1, 0.0]]).unwrap();
        let alpha = 1.0 / 3.0;
        let star = global_trust(&t, &SolverConfig::default().with_tol(1e-14))
            .unwrap()
            .solution;
        let start = tv(&[0.022, 0.089, 2.123]);
        let next = global_trust_step(&t, &t.incidence(), &start, alpha).unwrap();
        let (before, after) = (start.distance_inf(&star), next.distance_inf(&star));
        assert!(after > before, "{before} -> {after}");
    }

    #[test]
    fn range_confinement_and_bounds_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let n = rng.gen_range(3..=8);
            let t = random_irreducible(&mut rng, n, 0.4);
            let c = t.incidence();
            let (lo, hi) = t
                .as_dmatrix()
                .iter()
                .filter(|v| **v > 0.0)
                .fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
            let mut x = TrustVector::new((0..n).map(|_| 10f64.powf(rng.gen_range(-2.0..3.0))).collect()).unwrap();
            for _ in 0..5 {
                x = phi1_step(&t, &c, &x).unwrap();
                assert!(x.as_slice().iter().all(|v| *v >= lo - 1e-12 && *v <= hi + 1e-12));
            }
            let y = TrustVector::new((0..n).map(|_| rng.gen_range(0.01..1000.0)).collect()).unwrap();
            let alpha = rng.gen_range(0.05..2.0);
            let (p1, p2) = (phi1_step(&t, &c, &y).unwrap(), phi2_step(&c, &y).unwrap());
            let g = global_trust_step(&t, &c, &y, alpha).unwrap();
            for i in 0..n {
                let (a, b) = (p1[i].min(p2[i]), p1[i].max(p2[i]));
                assert!(g[i] >= a * (1.0 - 1e-12) && g[i] <= b * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn fixed_point_is_unique_at_desk_scale() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let n = rng.gen_range(2..=5);
            let t = random_irreducible(&mut rng, n, 0.5);
            let alpha = rng.gen_range(0.1..1.0);
            let reference = global_trust(&t, &SolverConfig::default().with_alpha(alpha))
                .unwrap()
                .solution;
            for _ in 0..20 {
                let init = TrustVector::new((0..n).map(|_| rng.gen_range(0.01..100.0)).collect()).unwrap();
                let r = global_trust(&t, &cfg(alpha, init.as_slice())).unwrap();
                assert!(r.solution.distance_inf(&reference) < 10.0 * DEFAULT_TOL);
            }
        }
    }

    fn arb_case() -> impl Strategy<Value = (u64, usize, Vec<f64>, f64)> {
        (any::<u64>(), 3usize..=8).prop_flat_map(|(seed, n)| {
            (
                Just(seed),
                Just(n),
                proptest::collection::vec(0.01..1000.0f64, n),
                0.01..100.0f64,
            )
        })
    }

    proptest! {
        #[test]
        fn phi1_is_scale_invariant((seed, n, t, k) in arb_case()) {
            let m = random_irreducible(&mut ChaCha8Rng::seed_from_u64(seed), n, 0.5);
            let c = m.incidence();
            let t = TrustVector::new(t).unwrap();
            let a = phi1_step(&m, &c, &t).unwrap();
            let b = phi1_step(&m, &c, &t.scaled(k).unwrap()).unwrap();
            for i in 0..n {
                prop_assert!(((a[i] - b[i]) / a[i]).abs() <= 1e-12);
            }
        }

        #[test]
        fn phi2_is_homogeneous((seed, n, t, k) in arb_case()) {
            let c = random_irreducible(&mut ChaCha8Rng::seed_from_u64(seed), n, 0.5).incidence();
            let t = TrustVector::new(t).unwrap();
            let a = phi2_step(&c, &t).unwrap();
            let b = phi2_step(&c, &t.scaled(k).unwrap()).unwrap();
            for i in 0..n {
                prop_assert!(((k * a[i] - b[i]) / b[i]).abs() <= 1e-12);
            }
        }
    }
}
