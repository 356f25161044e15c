//! Bayesian Stackelberg game instances and their ground-truth geometry.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Halfspace, Polytope};
use crate::rat::{dot, Rat};

/// A Bayesian Stackelberg game with `m` leader actions, `n` follower
/// actions and `K` follower types.
///
/// Types and actions are 0-based in the API. JSON files name types
/// `theta_1..theta_K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BsgInstance {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub l: u64,
    /// `leader_utils[i][j]` is `u^L(a_i, b_j)`.
    pub leader_utils: Vec<Vec<Rat>>,
    /// `follower_utils[θ][i][j]` is `u^F_θ(a_i, b_j)`.
    pub follower_utils: Vec<Vec<Vec<Rat>>>,
    pub mu: Vec<Rat>,
}

#[derive(Serialize, Deserialize)]
struct InstanceJson {
    m: usize,
    n: usize,
    #[serde(rename = "K")]
    k: usize,
    #[serde(rename = "L")]
    l: u64,
    leader_utils: Vec<Vec<Rat>>,
    follower_utils: BTreeMap<String, Vec<Vec<Rat>>>,
    mu: Vec<Rat>,
}

impl Serialize for BsgInstance {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        InstanceJson {
            m: self.m,
            n: self.n,
            k: self.k,
            l: self.l,
            leader_utils: self.leader_utils.clone(),
            follower_utils: self
                .follower_utils
                .iter()
                .enumerate()
                .map(|(t, u)| (format!("theta_{}", t + 1), u.clone()))
                .collect(),
            mu: self.mu.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for BsgInstance {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = InstanceJson::deserialize(d)?;
        let mut follower_utils = vec![None; raw.k];
        for (key, u) in raw.follower_utils {
            let idx = key
                .strip_prefix("theta_")
                .and_then(|v| v.parse::<usize>().ok())
                .filter(|&v| v >= 1 && v <= raw.k && format!("theta_{v}") == key)
                .ok_or_else(|| serde::de::Error::custom(format!("unexpected type key {key:?}")))?;
            follower_utils[idx - 1] = Some(u);
        }
        let follower_utils = follower_utils
            .into_iter()
            .enumerate()
            .map(|(t, u)| u.ok_or_else(|| serde::de::Error::custom(format!("missing theta_{}", t + 1))))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let inst = BsgInstance {
            m: raw.m,
            n: raw.n,
            k: raw.k,
            l: raw.l,
            leader_utils: raw.leader_utils,
            follower_utils,
            mu: raw.mu,
        };
        inst.check_shape().map_err(serde::de::Error::custom)?;
        Ok(inst)
    }
}

/// One follower action per type in an ordered subset of types. The empty
/// profile stands for the whole simplex.
///
/// Serialized as `{"theta_k": j}` with 1-based type and action numbers.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionProfile(pub BTreeMap<usize, usize>);

impl Serialize for ActionProfile {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_map(self.0.iter().map(|(t, a)| (format!("theta_{}", t + 1), a + 1)))
    }
}

impl ActionProfile {
    pub fn empty() -> Self {
        ActionProfile::default()
    }

    pub fn full(actions: &[usize]) -> Self {
        ActionProfile(actions.iter().copied().enumerate().collect())
    }

    pub fn types(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.keys().copied()
    }

    pub fn get(&self, theta: usize) -> Option<usize> {
        self.0.get(&theta).copied()
    }

    pub fn with(&self, theta: usize, action: usize) -> Self {
        let mut p = self.clone();
        p.0.insert(theta, action);
        p
    }

    pub fn restrict(&self, types: &[usize]) -> Self {
        ActionProfile(self.0.iter().filter(|(t, _)| types.contains(t)).map(|(&t, &a)| (t, a)).collect())
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for ActionProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "⊥");
        }
        let parts: Vec<String> = self.0.iter().map(|(t, a)| format!("θ{}:b{}", t + 1, a + 1)).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Result of the brute-force optimum computation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OptResult {
    pub value: Rat,
    pub x_star: Vec<Rat>,
    pub profile: ActionProfile,
    /// Some optimal profile has a full-dimensional region.
    pub full_dim: bool,
    /// The followers' tie-broken best responses at `x_star` are `profile`.
    pub realized: bool,
}

impl OptResult {
    pub fn volume_assumption_holds(&self) -> bool {
        self.full_dim && self.realized
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl BsgInstance {
    fn check_shape(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInstance(msg));
        if self.m == 0 || self.n == 0 || self.k == 0 {
            return bad("m, n and K must be positive".into());
        }
        if self.leader_utils.len() != self.m || self.leader_utils.iter().any(|r| r.len() != self.n) {
            return bad(format!("leader_utils must be {}x{}", self.m, self.n));
        }
        if self.follower_utils.len() != self.k {
            return bad(format!("expected {} follower matrices", self.k));
        }
        for (t, u) in self.follower_utils.iter().enumerate() {
            if u.len() != self.m || u.iter().any(|r| r.len() != self.n) {
                return bad(format!("theta_{} must be {}x{}", t + 1, self.m, self.n));
            }
        }
        if self.mu.len() != self.k {
            return bad(format!("mu must have {} entries", self.k));
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub fn check_point(&self, x: &[Rat]) -> Result<()> {
        if x.len() != self.m {
            return Err(Error::DimensionMismatch { expected: self.m, got: x.len() });
        }
        if x.iter().any(Rat::is_negative) || x.iter().sum::<Rat>() != Rat::one() {
            return Err(Error::OffSimplex);
        }
        Ok(())
    }

    /// Column `j` of a payoff matrix.
    fn column(u: &[Vec<Rat>], j: usize) -> Vec<Rat> {
        u.iter().map(|row| row[j].clone()).collect()
    }

    pub fn leader_column(&self, a: usize) -> Vec<Rat> {
        Self::column(&self.leader_utils, a)
    }

    pub fn follower_column(&self, theta: usize, a: usize) -> Vec<Rat> {
        Self::column(&self.follower_utils[theta], a)
    }

    pub fn follower_utility(&self, theta: usize, x: &[Rat], a: usize) -> Rat {
        dot(&self.follower_column(theta, a), x)
    }

    pub fn leader_utility(&self, x: &[Rat], a: usize) -> Rat {
        dot(&self.leader_column(a), x)
    }

    /// Best response of type `theta`, breaking ties for the leader and then
    /// by lowest index.
    pub fn best_response(&self, theta: usize, x: &[Rat]) -> Result<usize> {
        self.check_point(x)?;
        if theta >= self.k {
            return Err(Error::InvalidArgument(format!("type {theta} out of range")));
        }
        let mut best = 0;
        let mut best_f = self.follower_utility(theta, x, 0);
        let mut best_l = self.leader_utility(x, 0);
        for a in 1..self.n {
            let f = self.follower_utility(theta, x, a);
            if f > best_f {
                best = a;
                best_l = self.leader_utility(x, a);
                best_f = f;
            } else if f == best_f {
                let l = self.leader_utility(x, a);
                if l > best_l {
                    best = a;
                    best_l = l;
                }
            }
        }
        Ok(best)
    }

    /// The halfspace on which type `theta` weakly prefers `a` to `b`.
    pub fn preference_halfspace(&self, theta: usize, a: usize, b: usize) -> Halfspace {
        let ua = self.follower_column(theta, a);
        let ub = self.follower_column(theta, b);
        Halfspace {
            coeffs: ua.iter().zip(&ub).map(|(p, q)| p - q).collect(),
            rhs: Rat::zero(),
        }
    }

    /// Ground-truth region where `a` is a best response of `theta`.
    pub fn best_response_region(&self, theta: usize, a: usize) -> Polytope {
        let hs = (0..self.n).filter(|&b| b != a).map(|b| self.preference_halfspace(theta, a, b));
        Polytope::from_halfspaces(self.m, hs).expect("dimensions match")
    }

    pub fn profile_region(&self, profile: &ActionProfile) -> Polytope {
        let hs: Vec<Halfspace> = profile
            .0
            .iter()
            .flat_map(|(&t, &a)| (0..self.n).filter(move |&b| b != a).map(move |b| (t, a, b)))
            .map(|(t, a, b)| self.preference_halfspace(t, a, b))
            .collect();
        Polytope::from_halfspaces(self.m, hs).expect("dimensions match")
    }

    /// `Σ_θ μ_θ u^L(·, a_θ)` as a coefficient vector.
    pub fn profile_objective(&self, profile: &ActionProfile) -> Vec<Rat> {
        let mut c = vec![Rat::zero(); self.m];
        for (&t, &a) in &profile.0 {
            for (ci, row) in c.iter_mut().zip(&self.leader_utils) {
                *ci += &(&self.mu[t] * &row[a]);
            }
        }
        c
    }

    /// Expected leader utility `u^L(x)` under tie-broken best responses.
    pub fn leader_expected_utility(&self, x: &[Rat]) -> Result<Rat> {
        self.check_point(x)?;
        let mut total = Rat::zero();
        for t in 0..self.k {
            if self.mu[t].is_zero() {
                continue;
            }
            let a = self.best_response(t, x)?;
            total += &(&self.mu[t] * &self.leader_utility(x, a));
        }
        Ok(total)
    }

    fn profile_from_index(&self, mut idx: usize) -> ActionProfile {
        let mut actions = vec![0; self.k];
        for slot in actions.iter_mut().rev() {
            *slot = idx % self.n;
            idx /= self.n;
        }
        ActionProfile::full(&actions)
    }

    /// Brute-force optimum over all `n^K` full profiles.
    ///
    /// Among optimal profiles, full-dimensional ones are preferred, then the
    /// lexicographically smallest profile and vertex.
    pub fn compute_opt(&self) -> OptResult {
        let total = self.n.pow(self.k as u32);
        let candidates: Vec<(ActionProfile, Rat, Vec<Rat>, bool)> = (0..total)
            .into_par_iter()
            .filter_map(|i| {
                let profile = self.profile_from_index(i);
                let region = self.profile_region(&profile);
                let (v, x) = region.maximize_linear(&self.profile_objective(&profile)).ok()?;
                let full = region.is_full_dim();
                Some((profile, v, x, full))
            })
            .collect();
        let best_value = candidates.iter().map(|c| &c.1).max().expect("some region is nonempty").clone();
        let full_dim = candidates.iter().any(|c| c.1 == best_value && c.3);
        let (profile, _, x_star, _) = candidates
            .into_iter()
            .filter(|c| c.1 == best_value && c.3 == full_dim)
            .min_by(|a, b| (&a.0, &a.2).cmp(&(&b.0, &b.2)))
            .expect("optimum exists");
        let realized = (0..self.k).all(|t| self.best_response(t, &x_star).ok() == profile.get(t));
        OptResult {
            value: best_value,
            x_star,
            profile,
            full_dim,
            realized,
        }
    }

    pub fn validate(&self) -> ValidationReport {
        let mut r = self.validate_entries();
        if r.violations.is_empty() {
            let opt = self.compute_opt();
            if !opt.full_dim {
                r.warnings.push("no optimal profile has a full-dimensional region".into());
            } else if !opt.realized {
                r.warnings.push("tie-breaking at x* does not realize the optimal profile".into());
            }
        }
        r
    }

    /// [`BsgInstance::validate`] without the checks that need the optimum.
    pub fn validate_entries(&self) -> ValidationReport {
        let mut r = ValidationReport::default();
        if let Err(e) = self.check_shape() {
            r.violations.push(e.to_string());
            return r;
        }
        let in_unit = |v: &Rat| !v.is_negative() && *v <= Rat::one();
        let check_matrix = |name: String, u: &[Vec<Rat>], r: &mut ValidationReport| {
            for (i, row) in u.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    if !in_unit(v) {
                        r.violations.push(format!("{name}[{}][{}] = {v} is outside [0,1]", i + 1, j + 1));
                    }
                    if v.bit_complexity() > self.l {
                        r.violations.push(format!(
                            "{name}[{}][{}] = {v} has bit complexity {} > L = {}",
                            i + 1,
                            j + 1,
                            v.bit_complexity(),
                            self.l
                        ));
                    }
                }
            }
        };
        check_matrix("leader_utils".into(), &self.leader_utils, &mut r);
        for (t, u) in self.follower_utils.iter().enumerate() {
            check_matrix(format!("theta_{}", t + 1), u, &mut r);
        }
        for (t, p) in self.mu.iter().enumerate() {
            if p.is_negative() {
                r.violations.push(format!("mu[{}] = {p} is negative", t + 1));
            }
        }
        let sum: Rat = self.mu.iter().sum();
        if sum != Rat::one() {
            r.violations.push(format!("mu sums to {sum}, not 1"));
        }
        for t in 0..self.k {
            for a in 0..self.n {
                for b in a + 1..self.n {
                    if self.follower_column(t, a) == self.follower_column(t, b) {
                        r.warnings.push(format!("theta_{} has identical columns b{} and b{}", t + 1, a + 1, b + 1));
                    }
                }
            }
        }
        r
    }
}

/// Parameters for [`generate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenSpec {
    pub m: usize,
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "L")]
    pub l: u64,
    pub seed: u64,
}

pub const GENERATION_ATTEMPTS: usize = 200;

/// Random instance whose utilities are dyadic rationals within the bit
/// bound, rejecting draws that violate the volume assumption or give a type
/// two identical columns.
pub fn generate(spec: &GenSpec) -> Result<BsgInstance> {
    if spec.m == 0 || spec.n == 0 || spec.k == 0 {
        return Err(Error::InvalidArgument("m, n and K must be at least 1".into()));
    }
    if spec.l < 2 {
        return Err(Error::InvalidArgument("L must be at least 2 (0/1 already has 2 bits)".into()));
    }
    let g = ((spec.l - 1) / 2).min(62) as u32;
    let scale = 1u64 << g;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut last = String::new();
    for _ in 0..GENERATION_ATTEMPTS {
        let draw = |rng: &mut ChaCha8Rng| -> Vec<Vec<Rat>> {
            (0..spec.m)
                .map(|_| {
                    (0..spec.n)
                        .map(|_| Rat::new(rng.gen_range(0..=scale), scale).expect("nonzero"))
                        .collect()
                })
                .collect()
        };
        let leader_utils = draw(&mut rng);
        let follower_utils: Vec<_> = (0..spec.k).map(|_| draw(&mut rng)).collect();
        let weights: Vec<i64> = (0..spec.k).map(|_| rng.gen_range(1..=3)).collect();
        let total: i64 = weights.iter().sum();
        let inst = BsgInstance {
            m: spec.m,
            n: spec.n,
            k: spec.k,
            l: spec.l,
            leader_utils,
            follower_utils,
            mu: weights.iter().map(|&w| Rat::frac(w, total)).collect(),
        };
        let report = inst.validate();
        if report.is_valid() && report.warnings.is_empty() {
            return Ok(inst);
        }
        last = report.violations.iter().chain(&report.warnings).cloned().collect::<Vec<_>>().join("; ");
    }
    Err(Error::GenerationExhausted {
        attempts: GENERATION_ATTEMPTS,
        reason: last,
    })
}
