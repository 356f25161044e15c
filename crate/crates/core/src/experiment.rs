//! Experiment drivers and ground-truth checks of learner runs.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::env::{Environment, FeedbackMode};
use crate::error::Result;
use crate::game::{generate, BsgInstance, GenSpec, OptResult};
use crate::learner::{self, Cells, EpochRecord, LearnerConfig, RunReport};
use crate::rat::Rat;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceSource {
    Path(String),
    Generate(GenSpec),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub instance: InstanceSource,
    #[serde(rename = "T")]
    pub horizon: u64,
    pub delta: Rat,
    pub feedback: FeedbackMode,
    pub seeds: Vec<u64>,
    pub white_box: bool,
}

impl ExperimentConfig {
    pub fn load_instance(&self) -> Result<BsgInstance> {
        match &self.instance {
            InstanceSource::Path(p) => {
                let s = std::fs::read_to_string(p)
                    .map_err(|e| crate::Error::InvalidArgument(format!("cannot read {p}: {e}")))?;
                BsgInstance::from_json(&s)
            }
            InstanceSource::Generate(spec) => generate(spec),
        }
    }
}

/// Ground-truth checks of one epoch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EpochCheck {
    pub h: u32,
    /// `‖μ̂ − μ‖∞ ≤ ε_h`.
    pub concentration: bool,
    /// Every vertex of the refined arrangement is within `14Kε_h` of OPT.
    pub envelope: Option<bool>,
    pub min_vertex_utility: Option<Rat>,
    /// Some cell contains `x*` or a refined vertex attains OPT.
    pub retention: Option<bool>,
    pub max_facets: usize,
    pub facet_budget: usize,
    pub facets_ok: bool,
    /// `X_{h+1}(a) ⊆ X_h(a)` when no new type was found.
    pub nesting: Option<bool>,
}

impl EpochCheck {
    pub fn passed(&self) -> bool {
        !self.concentration || (self.envelope != Some(false) && self.retention != Some(false))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WhiteBoxReport {
    pub opt: Rat,
    pub epochs: Vec<EpochCheck>,
    pub epoch_bound_ok: bool,
}

impl WhiteBoxReport {
    pub fn all_passed(&self) -> bool {
        self.epoch_bound_ok && self.epochs.iter().all(|e| e.passed() && e.facets_ok && e.nesting != Some(false))
    }
}

/// Splits every cell by the true best-response regions of all types.
pub fn refine_by_truth(inst: &BsgInstance, cells: &Cells) -> Result<Vec<crate::Polytope>> {
    let mut out = Vec::new();
    for cell in cells.values() {
        let mut parts = vec![cell.clone()];
        for theta in 0..inst.k {
            let mut next = Vec::new();
            for p in &parts {
                for a in 0..inst.n {
                    let q = p.meet(&inst.best_response_region(theta, a))?;
                    if q.is_full_dim() {
                        next.push(q);
                    }
                }
            }
            parts = next;
        }
        out.extend(parts);
    }
    Ok(out)
}

fn check_epoch(inst: &BsgInstance, opt: &OptResult, e: &EpochRecord, prev_tilde: Option<&[usize]>) -> Result<EpochCheck> {
    let k = inst.k as i64;
    let concentration = !e.mu_hat.is_empty() && e.mu_hat.iter().zip(&inst.mu).all(|(a, b)| (a - b).abs() <= e.eps_h);
    let facet_budget = inst.k * inst.n + inst.m + inst.k;
    let max_facets = e.x_h.values().chain(e.x_next.values()).map(|p| p.facet_count()).max().unwrap_or(0);
    let completed = e.status == learner::EpochStatus::Completed;
    let (mut envelope, mut min_vertex_utility, mut retention) = (None, None, None);
    if completed {
        let floor = &opt.value - &(&e.eps_h * &Rat::int(14 * k));
        let mut min_u: Option<Rat> = None;
        let mut attains = false;
        for part in refine_by_truth(inst, &e.x_next)? {
            for v in part.vertices()? {
                let u = inst.leader_expected_utility(&v)?;
                attains |= u == opt.value;
                if min_u.as_ref().is_none_or(|m| u < *m) {
                    min_u = Some(u);
                }
            }
        }
        envelope = Some(min_u.as_ref().is_some_and(|m| *m >= floor));
        min_vertex_utility = min_u;
        retention = Some(attains || e.x_next.values().any(|p| p.contains(&opt.x_star)));
    }
    let nesting = match prev_tilde {
        Some(t) if completed && t == e.theta_tilde.as_slice() => Some(
            e.x_next
                .iter()
                .all(|(a, p)| e.x_h.get(a).is_some_and(|q| p.is_subset_of(q))),
        ),
        _ => None,
    };
    Ok(EpochCheck {
        h: e.h,
        concentration,
        envelope,
        min_vertex_utility,
        retention,
        max_facets,
        facet_budget,
        facets_ok: max_facets <= facet_budget,
        nesting,
    })
}

/// Checks a finished run against the hidden instance.
pub fn white_box_checks(inst: &BsgInstance, opt: &OptResult, report: &RunReport) -> Result<WhiteBoxReport> {
    let mut epochs = Vec::new();
    for e in &report.epochs {
        let incoming = e.x_h.keys().next().map(|a| a.types().collect::<Vec<_>>());
        epochs.push(check_epoch(inst, opt, e, incoming.as_deref())?);
    }
    Ok(WhiteBoxReport {
        opt: opt.value.clone(),
        epochs,
        epoch_bound_ok: report.epochs_started <= report.epoch_bound,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Trial {
    pub seed: u64,
    #[serde(skip)]
    pub csv: String,
    pub regret_curve: Vec<Rat>,
    pub report: RunReport,
    pub white_box: Option<WhiteBoxReport>,
}

impl Trial {
    /// Mean per-round regret over rounds `[from, to)`.
    pub fn average_regret(&self, from: usize, to: usize) -> Rat {
        let at = |t: usize| if t == 0 { Rat::zero() } else { self.regret_curve[t - 1].clone() };
        (at(to) - at(from)) / Rat::int((to - from) as i64)
    }
}

pub fn run_trial(inst: Arc<BsgInstance>, opt: &OptResult, cfg: &ExperimentConfig, seed: u64) -> Result<Trial> {
    let mut env = Environment::with_opt(inst.clone(), cfg.feedback, cfg.horizon, seed, opt.value.clone())?;
    let report = learner::run(&mut env, &LearnerConfig::new(cfg.delta.clone()))?;
    let white_box = if cfg.white_box {
        Some(white_box_checks(&inst, opt, &report)?)
    } else {
        None
    };
    Ok(Trial {
        seed,
        csv: env.to_csv(),
        regret_curve: env.regret_report().exact,
        report,
        white_box,
    })
}

/// Runs every seed of the config in parallel; results are in seed order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<(Arc<BsgInstance>, OptResult, Vec<Trial>)> {
    let inst = Arc::new(cfg.load_instance()?);
    let opt = inst.compute_opt();
    let trials = cfg
        .seeds
        .par_iter()
        .map(|&s| run_trial(inst.clone(), &opt, cfg, s))
        .collect::<Result<Vec<_>>>()?;
    Ok((inst, opt, trials))
}
