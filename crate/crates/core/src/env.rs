//! Round-by-round simulation of the leader–follower interaction.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use num_bigint::BigInt;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::BsgInstance;
use crate::rat::Rat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeedbackMode {
    Type,
    Action,
}

/// What the leader observes after a round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "feedback", rename_all = "lowercase")]
pub enum Feedback {
    Type { response: usize, theta: usize },
    Action { response: usize },
}

impl Feedback {
    pub fn response(&self) -> usize {
        match *self {
            Feedback::Type { response, .. } | Feedback::Action { response } => response,
        }
    }

    pub fn theta(&self) -> Option<usize> {
        match *self {
            Feedback::Type { theta, .. } => Some(theta),
            Feedback::Action { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoundLog {
    pub t: u64,
    pub epoch: u32,
    pub x: Vec<Rat>,
    pub theta: usize,
    pub response: usize,
    /// `u^L(x_t, a*_θ(x_t))`.
    pub inst_utility: Rat,
    /// `Σ_{s<=t} (OPT - u^L(x_s))`.
    pub cum_regret: Rat,
    pub leader_action: usize,
    /// Payoff of the sampled leader action against the response.
    pub realized_utility: Rat,
}

/// What the leader knows before playing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicInfo {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub l: u64,
    pub leader_utils: Vec<Vec<Rat>>,
    pub horizon: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RegretCurve {
    pub exact: Vec<Rat>,
    pub decimal: Vec<String>,
}

/// A seeded environment with a fixed horizon.
#[derive(Debug, Clone)]
pub struct Environment {
    inst: Arc<BsgInstance>,
    mode: FeedbackMode,
    horizon: u64,
    opt: Rat,
    rng: ChaCha8Rng,
    // Cumulative μ as integer thresholds over 2^64.
    thresholds: Vec<BigInt>,
    log: Vec<RoundLog>,
    epoch: u32,
    cum_regret: Rat,
    utility_cache: HashMap<Vec<Rat>, Rat>,
}

impl Environment {
    pub fn new(inst: Arc<BsgInstance>, mode: FeedbackMode, horizon: u64, seed: u64) -> Result<Self> {
        let opt = inst.compute_opt().value;
        Self::with_opt(inst, mode, horizon, seed, opt)
    }

    /// Like [`Environment::new`] with a precomputed optimum.
    pub fn with_opt(inst: Arc<BsgInstance>, mode: FeedbackMode, horizon: u64, seed: u64, opt: Rat) -> Result<Self> {
        let report = inst.validate_entries();
        if !report.is_valid() {
            return Err(Error::InvalidInstance(report.violations.join("; ")));
        }
        let two64 = BigInt::from(1u8) << 64usize;
        let mut acc = Rat::zero();
        let thresholds: Vec<BigInt> = inst
            .mu
            .iter()
            .map(|p| {
                acc += p;
                let scaled = Rat::from_bigint(two64.clone()) * &acc;
                scaled.ceil()
            })
            .collect();
        Ok(Environment {
            inst,
            mode,
            horizon,
            opt,
            rng: ChaCha8Rng::seed_from_u64(seed),
            thresholds,
            log: Vec::new(),
            epoch: 0,
            cum_regret: Rat::zero(),
            utility_cache: HashMap::new(),
        })
    }

    pub fn public_info(&self) -> PublicInfo {
        PublicInfo {
            m: self.inst.m,
            n: self.inst.n,
            k: self.inst.k,
            l: self.inst.l,
            leader_utils: self.inst.leader_utils.clone(),
            horizon: self.horizon,
        }
    }

    /// The hidden instance, for evaluation code only.
    pub fn instance(&self) -> &BsgInstance {
        &self.inst
    }

    pub fn mode(&self) -> FeedbackMode {
        self.mode
    }

    pub fn opt(&self) -> &Rat {
        &self.opt
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn rounds_played(&self) -> u64 {
        self.log.len() as u64
    }

    pub fn remaining(&self) -> u64 {
        self.horizon - self.rounds_played()
    }

    pub fn set_epoch(&mut self, epoch: u32) {
        self.epoch = epoch;
    }

    pub fn log(&self) -> &[RoundLog] {
        &self.log
    }

    fn sample_type(&mut self) -> usize {
        let draw = BigInt::from(self.rng.next_u64());
        self.thresholds.iter().position(|t| draw < *t).unwrap_or(self.inst.k - 1)
    }

    fn sample_leader_action(&mut self, x: &[Rat]) -> usize {
        let draw = Rat::new(self.rng.next_u64(), BigInt::from(1u8) << 64usize).expect("nonzero");
        let mut acc = Rat::zero();
        for (i, p) in x.iter().enumerate() {
            acc += p;
            if draw < acc {
                return i;
            }
        }
        x.iter().rposition(Rat::is_positive).unwrap_or(0)
    }

    /// Plays one round at commitment `x`.
    pub fn step(&mut self, x: &[Rat]) -> Result<Feedback> {
        if self.rounds_played() >= self.horizon {
            return Err(Error::HorizonExceeded(self.horizon));
        }
        self.inst.check_point(x)?;
        let theta = self.sample_type();
        let leader_action = self.sample_leader_action(x);
        let response = self.inst.best_response(theta, x)?;
        let expected = match self.utility_cache.get(x) {
            Some(u) => u.clone(),
            None => {
                let u = self.inst.leader_expected_utility(x)?;
                self.utility_cache.insert(x.to_vec(), u.clone());
                u
            }
        };
        self.cum_regret += &(&self.opt - &expected);
        self.log.push(RoundLog {
            t: self.rounds_played() + 1,
            epoch: self.epoch,
            x: x.to_vec(),
            theta,
            response,
            inst_utility: self.inst.leader_utility(x, response),
            cum_regret: self.cum_regret.clone(),
            leader_action,
            realized_utility: self.inst.leader_utils[leader_action][response].clone(),
        });
        Ok(match self.mode {
            FeedbackMode::Type => Feedback::Type { response, theta },
            FeedbackMode::Action => Feedback::Action { response },
        })
    }

    pub fn regret_report(&self) -> RegretCurve {
        let exact: Vec<Rat> = self.log.iter().map(|r| r.cum_regret.clone()).collect();
        let decimal = exact.iter().map(Rat::to_decimal).collect();
        RegretCurve { exact, decimal }
    }

    /// The round log as CSV with 12-significant-digit decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,epoch,theta,response,inst_utility,cum_regret\n");
        for r in &self.log {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.t,
                r.epoch,
                r.theta + 1,
                r.response + 1,
                r.inst_utility.to_decimal(),
                r.cum_regret.to_decimal()
            )
            .expect("writing to a String");
        }
        out
    }
}
