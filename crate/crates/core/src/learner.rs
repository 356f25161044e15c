//! The epoch-based learner for type feedback.
//!
//! Each epoch `h` halves the accuracy `ε_h`, estimates the type prior by
//! committing to one point (Find-Types), splits the surviving decision
//! space into the best-response regions of every type seen so far
//! (Find-Partition), and discards the pieces whose estimated utility is
//! provably too low (Prune).

use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde::{Serialize, Serializer};

use crate::env::{Environment, FeedbackMode};
use crate::error::{Error, Result};
use crate::game::ActionProfile;
use crate::geometry::{Halfspace, Polytope};
use crate::rat::{dot, Rat};
use crate::region::{learn_regions, LearnStats, QueryOracle, DEFAULT_QUERY_BUDGET};

/// Decision space of an epoch: one polytope per action profile. Only
/// full-dimensional cells are stored.
pub type Cells = BTreeMap<ActionProfile, Polytope>;

pub const C1: i64 = 3;
pub const C2: i64 = 6;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LearnerConfig {
    pub delta: Rat,
    /// Number of queries each region-learning call is budgeted for.
    pub query_budget: u64,
}

impl LearnerConfig {
    pub fn new(delta: Rat) -> Self {
        LearnerConfig {
            delta,
            query_budget: DEFAULT_QUERY_BUDGET,
        }
    }
}

/// `⌈log_4(x)⌉` for `x >= 1`, by comparing powers of four.
pub fn ceil_log4(x: u64) -> u32 {
    let x = BigInt::from(x);
    let mut k = 0;
    let mut p = BigInt::from(1);
    while p < x {
        p *= 4;
        k += 1;
    }
    k
}

/// `δ_1 = δ_2 = δ / (2⌈log_4(5T)⌉)`.
pub fn delta_split(horizon: u64, delta: &Rat) -> (Rat, Rat) {
    let h = ceil_log4(5 * horizon.max(1)) as i64;
    let d = delta / &Rat::int(2 * h);
    (d.clone(), d)
}

/// `T_{h,1} = ⌈(1/(2ε²))·ln(2K/δ_1)⌉`.
pub fn find_types_rounds(eps: &Rat, k: usize, delta1: &Rat) -> u64 {
    let e = eps.to_f64();
    let v = (2.0 * k as f64 / delta1.to_f64()).ln() / (2.0 * e * e);
    v.ceil().max(1.0) as u64
}

/// Find-Types: plays `x` for `rounds` rounds and counts the observed types.
/// Stops early, with [`EpochStatus::HorizonReached`], when the horizon runs out.
pub fn find_types(env: &mut Environment, x: &[Rat], rounds: u64) -> Result<(Vec<u64>, EpochStatus)> {
    let mut counts = vec![0u64; env.public_info().k];
    for _ in 0..rounds {
        match env.step(x) {
            Ok(fb) => counts[fb.theta().ok_or_else(|| Error::FeedbackMode("type not revealed".into()))?] += 1,
            Err(Error::HorizonExceeded(_)) => return Ok((counts, EpochStatus::HorizonReached)),
            Err(e) => return Err(e),
        }
    }
    Ok((counts, EpochStatus::Completed))
}

/// `μ̂ = counts / rounds`.
pub fn empirical_prior(counts: &[u64], rounds: u64) -> Vec<Rat> {
    counts.iter().map(|&c| Rat::frac(c as i64, rounds as i64)).collect()
}

/// Types whose empirical frequency is at least `2ε`.
pub fn theta_bar(mu_hat: &[Rat], eps: &Rat) -> Vec<usize> {
    let thr = eps * &Rat::int(2);
    (0..mu_hat.len()).filter(|&t| mu_hat[t] >= thr).collect()
}

/// Coefficients of `x ↦ Σ_θ μ̂_θ u^L(x, a_θ)` over the profile's types.
pub fn estimate_coeffs(mu_hat: &[Rat], profile: &ActionProfile, leader_utils: &[Vec<Rat>]) -> Vec<Rat> {
    leader_utils
        .iter()
        .map(|row| profile.0.iter().map(|(&t, &a)| &mu_hat[t] * &row[a]).sum())
        .collect()
}

pub fn estimate_leader_utility(mu_hat: &[Rat], profile: &ActionProfile, x: &[Rat], leader_utils: &[Vec<Rat>]) -> Rat {
    dot(&estimate_coeffs(mu_hat, profile, leader_utils), x)
}

/// Prune step: returns the next decision space and `OPT̲_h`.
pub fn prune(y: &Cells, k: usize, eps: &Rat, mu_hat: &[Rat], leader_utils: &[Vec<Rat>]) -> Result<(Cells, Rat)> {
    let ke = eps * &Rat::int(k as i64);
    let best = y
        .iter()
        .map(|(a, p)| p.maximize_linear(&estimate_coeffs(mu_hat, a, leader_utils)).map(|(v, _)| v))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .max()
        .ok_or_else(|| Error::DegenerateState("every refined cell is empty".into()))?;
    let opt_lower = best - &ke * &Rat::int(C2);
    let floor = &opt_lower - &(&ke * &Rat::int(C1));
    let mut next = Cells::new();
    for (a, p) in y {
        let h = Halfspace::homogenized(&estimate_coeffs(mu_hat, a, leader_utils), &floor);
        let cut = p.intersect(&h)?;
        if cut.is_full_dim() {
            next.insert(a.clone(), cut.canonicalize());
        }
    }
    Ok((next, opt_lower))
}

/// Lexicographically smallest vertex of the first cell.
pub fn default_commitment(x: &Cells) -> Result<Vec<Rat>> {
    let (_, p) = x.iter().next().ok_or_else(|| Error::DegenerateState("empty decision space".into()))?;
    Ok(p.vertices()?.remove(0))
}

/// Vertex of the decision space maximizing the estimated utility.
pub fn best_estimated_vertex(x: &Cells, mu_hat: &[Rat], leader_utils: &[Vec<Rat>]) -> Result<Vec<Rat>> {
    let mut best: Option<(Rat, Vec<Rat>)> = None;
    for (a, p) in x {
        let (v, pt) = p.maximize_linear(&estimate_coeffs(mu_hat, a, leader_utils))?;
        if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
            best = Some((v, pt));
        }
    }
    best.map(|(_, pt)| pt).ok_or_else(|| Error::DegenerateState("empty decision space".into()))
}

#[derive(Debug, Clone, Default)]
pub struct PartitionOutcome {
    pub cells: Cells,
    pub stats: LearnStats,
    pub learn_calls: u64,
}

/// Find-Partition: refines every cell of `x` by the regions of the types
/// in `new_types`, learned through queries, and keeps the full-dimensional
/// intersections.
pub fn find_partition(
    env: &mut Environment,
    x: &Cells,
    new_types: &[usize],
    eps: &Rat,
    delta2: &Rat,
    cfg: &LearnerConfig,
) -> Result<PartitionOutcome> {
    let zeta = delta2 * &Rat::frac(1, 2);
    let bits = env.public_info().l;
    let mut out = PartitionOutcome::default();
    for (prev, cell) in x {
        if new_types.is_empty() {
            if cell.is_full_dim() {
                out.cells.insert(prev.clone(), cell.clone());
            }
            continue;
        }
        let mut maps = Vec::with_capacity(new_types.len());
        for &theta in new_types {
            let mut oracle = QueryOracle::with_confidence(env, theta, eps, &zeta, cfg.query_budget);
            let map = learn_regions(&mut oracle, cell, bits)?;
            out.learn_calls += 1;
            out.stats.queries += map.stats.queries;
            out.stats.searches += map.stats.searches;
            out.stats.hyperplanes += map.stats.hyperplanes;
            out.stats.retries += map.stats.retries;
            maps.push(map);
        }
        // Extend prefixes type by type, dropping degenerate intersections early.
        let mut partial = vec![(prev.clone(), cell.clone())];
        for (&theta, map) in new_types.iter().zip(&maps) {
            let mut next = Vec::new();
            for (profile, region) in &partial {
                for (a, r) in map.nonempty() {
                    let meet = region.meet(r)?;
                    if meet.is_full_dim() {
                        next.push((profile.with(theta, a), meet));
                    }
                }
            }
            partial = next;
        }
        for (profile, region) in partial {
            out.cells.insert(profile, region.canonicalize());
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EpochStatus {
    Completed,
    HorizonReached,
    QueryTimeout,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CellRecord {
    pub profile: ActionProfile,
    pub facets: usize,
    pub vertices_count: usize,
}

fn one_based<S: Serializer>(v: &[usize], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|t| t + 1))
}

#[derive(Debug, Clone, Serialize)]
pub struct EpochRecord {
    pub h: u32,
    pub eps_h: Rat,
    #[serde(rename = "T_h1")]
    pub t_h1: u64,
    pub find_types_rounds: u64,
    pub partition_rounds: u64,
    pub mu_hat: Vec<Rat>,
    #[serde(serialize_with = "one_based")]
    pub theta_bar: Vec<usize>,
    #[serde(serialize_with = "one_based")]
    pub theta_tilde: Vec<usize>,
    pub queries: u64,
    pub cells: Vec<CellRecord>,
    pub opt_lower: Option<Rat>,
    pub status: EpochStatus,
    /// Decision space the epoch started from.
    #[serde(skip)]
    pub x_h: Cells,
    /// Decision space produced by the epoch's prune step.
    #[serde(skip)]
    pub x_next: Cells,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CommittedTail {
    pub from_round: u64,
    pub x: Vec<Rat>,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    #[serde(rename = "T")]
    pub horizon: u64,
    pub delta: Rat,
    pub delta1: Rat,
    pub delta2: Rat,
    /// `⌈log_4(5T)⌉`.
    pub epoch_bound: u32,
    pub epochs_started: u32,
    pub rounds_used: u64,
    pub cum_regret: Rat,
    pub committed_tail: Option<CommittedTail>,
    pub epochs: Vec<EpochRecord>,
}

fn cell_records(x: &Cells) -> Result<Vec<CellRecord>> {
    x.iter()
        .map(|(a, p)| {
            Ok(CellRecord {
                profile: a.clone(),
                facets: p.facet_count(),
                vertices_count: p.vertices()?.len(),
            })
        })
        .collect()
}

/// Runs the learner until the environment's horizon is used up.
pub fn run(env: &mut Environment, cfg: &LearnerConfig) -> Result<RunReport> {
    if env.mode() != FeedbackMode::Type {
        return Err(Error::FeedbackMode(
            "with action feedback every learner suffers regret exponential in the bit complexity; \
             run with type feedback"
                .into(),
        ));
    }
    let info = env.public_info();
    let k = info.k;
    let horizon = info.horizon;
    let (delta1, delta2) = delta_split(horizon, &cfg.delta);
    let mut eps = Rat::frac(1, k as i64);
    let mut x: Cells = Cells::from([(ActionProfile::empty(), Polytope::simplex(info.m)?)]);
    let mut tilde: Vec<usize> = Vec::new();
    let mut epochs = Vec::new();
    let mut tail = None;
    let mut prev_mu: Option<Vec<Rat>> = None;
    let mut h = 0u32;
    while env.remaining() > 0 {
        h += 1;
        env.set_epoch(h);
        let start = env.rounds_played();
        let x_play = match &prev_mu {
            Some(mu) => best_estimated_vertex(&x, mu, &info.leader_utils)?,
            None => default_commitment(&x)?,
        };
        let t_h1 = find_types_rounds(&eps, k, &delta1);
        let (counts, status) = find_types(env, &x_play, t_h1)?;
        let ft_rounds = env.rounds_played() - start;
        let mut record = EpochRecord {
            h,
            eps_h: eps.clone(),
            t_h1,
            find_types_rounds: ft_rounds,
            partition_rounds: 0,
            mu_hat: Vec::new(),
            theta_bar: Vec::new(),
            theta_tilde: tilde.clone(),
            queries: 0,
            cells: Vec::new(),
            opt_lower: None,
            status,
            x_h: x.clone(),
            x_next: Cells::new(),
        };
        if status != EpochStatus::Completed {
            epochs.push(record);
            break;
        }
        let mu_hat = empirical_prior(&counts, t_h1);
        let bar = theta_bar(&mu_hat, &eps);
        let new_types: Vec<usize> = bar.iter().copied().filter(|t| !tilde.contains(t)).collect();
        let mut tilde_h = tilde.clone();
        tilde_h.extend(&new_types);
        tilde_h.sort_unstable();
        record.mu_hat = mu_hat.clone();
        record.theta_bar = bar;
        record.theta_tilde = tilde_h.clone();
        let before = env.rounds_played();
        let partition = find_partition(env, &x, &new_types, &eps, &delta2, cfg);
        record.partition_rounds = env.rounds_played() - before;
        let y = match partition {
            Ok(p) => {
                record.queries = p.stats.queries;
                p.cells
            }
            Err(Error::HorizonExceeded(_)) => {
                record.status = EpochStatus::HorizonReached;
                epochs.push(record);
                break;
            }
            Err(Error::QueryTimeout { theta, rounds }) => {
                record.status = EpochStatus::QueryTimeout;
                let x_tail = best_estimated_vertex(&x, &mu_hat, &info.leader_utils)?;
                tail = Some(CommittedTail {
                    from_round: env.rounds_played(),
                    x: x_tail.clone(),
                    reason: format!("query for type {} timed out after {rounds} rounds", theta + 1),
                });
                epochs.push(record);
                while env.remaining() > 0 {
                    env.step(&x_tail)?;
                }
                break;
            }
            Err(e) => return Err(e),
        };
        let (next, opt_lower) = prune(&y, k, &eps, &mu_hat, &info.leader_utils)?;
        record.cells = cell_records(&next)?;
        record.opt_lower = Some(opt_lower);
        record.x_next = next.clone();
        epochs.push(record);
        x = next;
        tilde = tilde_h;
        prev_mu = Some(mu_hat);
        eps = eps * Rat::frac(1, 2);
    }
    Ok(RunReport {
        horizon,
        delta: cfg.delta.clone(),
        delta1,
        delta2,
        epoch_bound: ceil_log4(5 * horizon.max(1)),
        epochs_started: h,
        rounds_used: env.rounds_played(),
        cum_regret: env.log().last().map_or_else(Rat::zero, |r| r.cum_regret.clone()),
        committed_tail: tail,
        epochs,
    })
}
