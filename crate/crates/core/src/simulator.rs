//! In-process peer network.
//!
//! Every peer owns its published trust value and recomputes it from the
//! values its raters publish, together with the ratings they gave it. A read
//! of one rater's value counts as one message. Runs are single-threaded and
//! fully determined by the network and schedule seeds.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TrustError};
use crate::matrix::{LocalTrustMatrix, TrustVector};
use crate::solvers::{combine_global, IterationTrace, RaterMoments};

pub const MAX_GENERATION_ATTEMPTS: usize = 100;
pub const DEFAULT_SWEEPS_CAP: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingModel {
    /// Half-width of the uniform noise added to each rating.
    pub noise: f64,
    /// Service quality range of honest peers.
    pub honest_quality: (f64, f64),
    /// Service quality range of malicious peers.
    pub malicious_quality: (f64, f64),
}

impl Default for RatingModel {
    fn default() -> Self {
        Self {
            noise: 0.5,
            honest_quality: (5.0, 10.0),
            malicious_quality: (1.0, 5.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub n_peers: usize,
    pub edge_prob: f64,
    pub honest_fraction: f64,
    pub seed: u64,
    #[serde(default)]
    pub rating_model: RatingModel,
}

impl NetworkSpec {
    pub fn new(n_peers: usize, edge_prob: f64, honest_fraction: f64, seed: u64) -> Self {
        Self {
            n_peers,
            edge_prob,
            honest_fraction,
            seed,
            rating_model: RatingModel::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(TrustError::InvalidSpec(msg));
        if self.n_peers < 2 {
            return bad(format!("n_peers must be >= 2, got {}", self.n_peers));
        }
        if !(self.edge_prob > 0.0 && self.edge_prob <= 1.0) {
            return bad(format!("edge_prob must be in (0, 1], got {}", self.edge_prob));
        }
        if !(0.0..=1.0).contains(&self.honest_fraction) {
            return bad(format!(
                "honest_fraction must be in [0, 1], got {}",
                self.honest_fraction
            ));
        }
        let m = &self.rating_model;
        for (lo, hi) in [m.honest_quality, m.malicious_quality] {
            if !(1.0 <= lo && lo <= hi && hi <= 10.0) {
                return bad(format!("quality range ({lo}, {hi}) must lie within [1, 10]"));
            }
        }
        if !(m.noise.is_finite() && m.noise >= 0.0) {
            return bad(format!("noise must be >= 0, got {}", m.noise));
        }
        Ok(())
    }
}

/// A generated network with its latent ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub trust: LocalTrustMatrix,
    pub quality: Vec<f64>,
    pub honest: Vec<bool>,
    /// Number of draws needed to obtain an irreducible rating graph.
    pub attempts: usize,
}

fn round_to_half(x: f64) -> f64 {
    (x * 2.0).round() / 2.0
}

/// Draws a rating matrix; retries on the same seeded stream until the
/// incidence graph is strongly connected.
pub fn generate_population(spec: &NetworkSpec) -> Result<Network> {
    spec.validate()?;
    let n = spec.n_peers;
    let model = &spec.rating_model;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let honest_count = (spec.honest_fraction * n as f64).round() as usize;
    for attempt in 1..=MAX_GENERATION_ATTEMPTS {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let mut honest = vec![false; n];
        for &i in &order[..honest_count] {
            honest[i] = true;
        }
        let quality: Vec<f64> = honest
            .iter()
            .map(|&h| {
                let (lo, hi) = if h {
                    model.honest_quality
                } else {
                    model.malicious_quality
                };
                if lo == hi {
                    lo
                } else {
                    rng.gen_range(lo..=hi)
                }
            })
            .collect();
        let mut rows = vec![vec![0.0; n]; n];
        for (rater, row) in rows.iter_mut().enumerate() {
            for (ratee, cell) in row.iter_mut().enumerate() {
                if rater == ratee || !rng.gen_bool(spec.edge_prob) {
                    continue;
                }
                let noise = if model.noise > 0.0 {
                    rng.gen_range(-model.noise..=model.noise)
                } else {
                    0.0
                };
                let perceived = if honest[rater] {
                    quality[ratee]
                } else {
                    11.0 - quality[ratee]
                };
                *cell = round_to_half(perceived + noise).clamp(1.0, 10.0);
            }
        }
        let trust = LocalTrustMatrix::from_rows(&rows)?;
        if trust.incidence().is_irreducible() {
            return Ok(Network {
                trust,
                quality,
                honest,
                attempts: attempt,
            });
        }
    }
    Err(TrustError::CannotAchieveIrreducible {
        seed: spec.seed,
        attempts: MAX_GENERATION_ATTEMPTS,
    })
}

pub fn generate_network(spec: &NetworkSpec) -> Result<LocalTrustMatrix> {
    Ok(generate_population(spec)?.trust)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    /// Every peer updates from the previous sweep's values.
    Synchronous,
    /// Peers update in a fresh random order each sweep, reading the latest
    /// published values.
    Asynchronous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub kind: ScheduleKind,
    pub seed: u64,
    pub sweeps_cap: usize,
}

impl Schedule {
    pub fn synchronous() -> Self {
        Self {
            kind: ScheduleKind::Synchronous,
            seed: 0,
            sweeps_cap: DEFAULT_SWEEPS_CAP,
        }
    }

    pub fn asynchronous(seed: u64) -> Self {
        Self {
            kind: ScheduleKind::Asynchronous,
            seed,
            sweeps_cap: DEFAULT_SWEEPS_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub trust: TrustVector,
    pub sweeps: usize,
    pub messages: u64,
    /// One snapshot per sweep.
    pub trace: IterationTrace,
}

struct Peer {
    /// `(rater, rating given to this peer)`, ascending by rater.
    raters: Vec<(usize, f64)>,
}

impl Peer {
    fn update(&self, published: &[f64], alpha: f64) -> f64 {
        let mut acc = RaterMoments::default();
        for &(j, rating) in &self.raters {
            acc.add(rating, published[j]);
        }
        combine_global(&acc, alpha)
    }
}

fn build_peers(trust: &LocalTrustMatrix) -> Result<Vec<Peer>> {
    let c = trust.incidence();
    if !c.is_irreducible() {
        return Err(TrustError::NotIrreducible);
    }
    Ok((0..trust.n())
        .map(|i| Peer {
            raters: c.raters(i).iter().map(|&j| (j, trust.rating(j, i))).collect(),
        })
        .collect())
}

/// Runs the global-trust computation from the all-ones vector.
pub fn run_distributed(
    trust: &LocalTrustMatrix,
    alpha: f64,
    schedule: &Schedule,
    tol: f64,
) -> Result<SimulationResult> {
    run_distributed_from(trust, alpha, schedule, tol, &TrustVector::ones(trust.n()))
}

pub fn run_distributed_from(
    trust: &LocalTrustMatrix,
    alpha: f64,
    schedule: &Schedule,
    tol: f64,
    initial: &TrustVector,
) -> Result<SimulationResult> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(TrustError::InvalidConfig(format!("alpha must be > 0, got {alpha}")));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(TrustError::InvalidConfig(format!("tol must be > 0, got {tol}")));
    }
    if schedule.sweeps_cap == 0 {
        return Err(TrustError::InvalidConfig("sweeps_cap must be >= 1".into()));
    }
    let n = trust.n();
    if initial.len() != n {
        return Err(TrustError::DimensionMismatch {
            expected: n,
            got: initial.len(),
        });
    }
    let peers = build_peers(trust)?;
    let mut rng = ChaCha8Rng::seed_from_u64(schedule.seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut published = initial.as_slice().to_vec();
    let mut trace = IterationTrace::start(initial.clone());
    let mut messages = 0u64;

    loop {
        match schedule.kind {
            ScheduleKind::Synchronous => {
                let snapshot = published.clone();
                for (i, peer) in peers.iter().enumerate() {
                    published[i] = peer.update(&snapshot, alpha);
                    messages += peer.raters.len() as u64;
                }
            }
            ScheduleKind::Asynchronous => {
                order.shuffle(&mut rng);
                for &i in &order {
                    let peer = &peers[i];
                    published[i] = peer.update(&published, alpha);
                    messages += peer.raters.len() as u64;
                }
            }
        }
        let snapshot = TrustVector::new(published.clone())?;
        if trace.iterations_used == 0 && snapshot == *trace.last() {
            trace.converged = true;
            break;
        }
        let err = trace.push(snapshot);
        if err < tol {
            trace.converged = true;
            break;
        }
        if trace.iterations_used >= schedule.sweeps_cap {
            return Err(TrustError::NotConverged { trace: Box::new(trace) });
        }
    }
    Ok(SimulationResult {
        trust: trace.last().clone(),
        sweeps: trace.iterations_used,
        messages,
        trace,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub kind: ScheduleKind,
    pub seed: Option<u64>,
    pub sweeps: usize,
    pub messages: u64,
    pub trust: Vec<f64>,
    /// `‖trust − synchronous trust‖∞`
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleComparison {
    pub entries: Vec<ScheduleEntry>,
    pub max_pairwise_deviation: f64,
}

/// One synchronous run plus one asynchronous run per seed.
pub fn compare_schedules(
    trust: &LocalTrustMatrix,
    alpha: f64,
    seeds: &[u64],
    tol: f64,
    sweeps_cap: usize,
) -> Result<ScheduleComparison> {
    let sync_schedule = Schedule {
        sweeps_cap,
        ..Schedule::synchronous()
    };
    let sync = run_distributed(trust, alpha, &sync_schedule, tol)?;
    let mut runs = vec![(ScheduleKind::Synchronous, None, sync)];
    for &seed in seeds {
        let schedule = Schedule {
            sweeps_cap,
            ..Schedule::asynchronous(seed)
        };
        runs.push((
            ScheduleKind::Asynchronous,
            Some(seed),
            run_distributed(trust, alpha, &schedule, tol)?,
        ));
    }
    let mut max_pairwise_deviation = 0.0f64;
    for (a, (_, _, ra)) in runs.iter().enumerate() {
        for (_, _, rb) in &runs[a + 1..] {
            max_pairwise_deviation = max_pairwise_deviation.max(ra.trust.distance_inf(&rb.trust));
        }
    }
    let reference = runs[0].2.trust.clone();
    let entries = runs
        .into_iter()
        .map(|(kind, seed, r)| ScheduleEntry {
            kind,
            seed,
            sweeps: r.sweeps,
            messages: r.messages,
            deviation: r.trust.distance_inf(&reference),
            trust: r.trust.into_inner(),
        })
        .collect();
    Ok(ScheduleComparison {
        entries,
        max_pairwise_deviation,
    })
}
