//! A family of hard instances for action feedback.
//!
//! The simplex over three leader actions is triangulated into `4^B`
//! triangles of side `2^{-B}`. Instance `I` makes the follower action `a*`
//! (the only one the leader likes) a best response of every type exactly
//! on triangle `I`. Outside it the three types answer with a uniformly
//! random action among `a1, a2, a3` regardless of `I`, so action feedback
//! says nothing until the leader hits the right triangle.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::env::{Environment, FeedbackMode};
use crate::error::{Error, Result};
use crate::game::BsgInstance;
use crate::geometry::{Halfspace, Polytope};
use crate::rat::Rat;

pub const M: usize = 3;
/// Index of `a*` among the follower actions.
pub const A_STAR: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LowerBoundCell {
    #[serde(rename = "B")]
    pub b: u32,
    pub cell_id: usize,
    /// Upward triangles are `x_j >= c_j ε`; downward ones are `x_j <= c_j ε`.
    pub upward: bool,
    pub corner: [u64; 3],
    pub hyperplanes: Vec<Halfspace>,
    /// `w[j][i]`: coefficient of `x_i` in the `j`-th hyperplane, in `[-1/2, 1/2]`.
    pub w: Vec<Vec<Rat>>,
}

impl LowerBoundCell {
    fn new(b: u32, cell_id: usize, upward: bool, corner: [u64; 3]) -> Self {
        let eps = Rat::pow2_neg(b);
        let hyperplanes: Vec<Halfspace> = (0..M)
            .map(|j| {
                let h = Halfspace::lower_bound(M, j, Rat::int(corner[j] as i64) * &eps);
                if upward {
                    h
                } else {
                    h.negated()
                }
            })
            .map(|h| Halfspace::homogenized(&h.coeffs, &h.rhs))
            .collect();
        let w = hyperplanes
            .iter()
            .map(|h| h.coeffs.iter().map(|c| c * &Rat::frac(1, 2)).collect())
            .collect();
        LowerBoundCell {
            b,
            cell_id,
            upward,
            corner,
            hyperplanes,
            w,
        }
    }

    /// `S^I`, the triangle as a polytope.
    pub fn region(&self) -> Polytope {
        Polytope::from_halfspaces(M, self.hyperplanes.iter().cloned()).expect("three-dimensional halfspaces")
    }

    /// The triangle's corners on the `ε`-lattice.
    pub fn vertices(&self) -> [[u64; 3]; 3] {
        let c = self.corner;
        let step = |j: usize| {
            let mut v = c;
            if self.upward {
                v[j] += 1;
            } else {
                v[j] -= 1;
            }
            v
        };
        [step(0), step(1), step(2)]
    }

    pub fn centroid(&self) -> Vec<Rat> {
        let n = Rat::int(1i64 << self.b);
        let third = Rat::frac(if self.upward { 1 } else { -1 }, 3);
        self.corner
            .iter()
            .map(|&c| (Rat::int(c as i64) + &third) / &n)
            .collect()
    }
}

/// All `4^B` triangles, upward ones first, each group in lexicographic
/// order of its corner.
pub fn triangulate(b: u32) -> Result<Vec<LowerBoundCell>> {
    if b == 0 || b > 20 {
        return Err(Error::InvalidArgument(format!("B must be between 1 and 20, got {b}")));
    }
    let n = 1u64 << b;
    let mut corners = Vec::new();
    for i in 0..n {
        for j in 0..n - i {
            corners.push((true, [i, j, n - 1 - i - j]));
        }
    }
    for i in 1..n {
        for j in 1..=n - i {
            corners.push((false, [i, j, n + 1 - i - j]));
        }
    }
    Ok(corners
        .into_iter()
        .enumerate()
        .map(|(id, (up, c))| LowerBoundCell::new(b, id, up, c))
        .collect())
}

/// `f(j, k) = 1 + ((j + k + 1) mod 3)` on 1-based indices.
pub fn rotation(j: usize, k: usize) -> usize {
    1 + (j + k + 1) % 3
}

fn follower_matrix(w: &[Vec<Rat>], k: usize) -> Vec<Vec<Rat>> {
    let half = Rat::frac(1, 2);
    (0..M)
        .map(|i| {
            let mut row: Vec<Rat> = (1..=M).map(|j| &half - &w[rotation(j, k) - 1][i]).collect();
            row.push(half.clone());
            row
        })
        .collect()
}

/// Instance for a cell under explicit coefficients `w`.
pub fn build_instance_with(w: &[Vec<Rat>]) -> BsgInstance {
    let follower_utils: Vec<_> = (1..=3).map(|k| follower_matrix(w, k)).collect();
    let leader_utils: Vec<Vec<Rat>> = (0..M)
        .map(|_| (0..=M).map(|j| if j == A_STAR { Rat::one() } else { Rat::zero() }).collect())
        .collect();
    let l = follower_utils
        .iter()
        .flatten()
        .flatten()
        .chain(leader_utils.iter().flatten())
        .map(Rat::bit_complexity)
        .max()
        .unwrap_or(2);
    BsgInstance {
        m: M,
        n: M + 1,
        k: 3,
        l,
        leader_utils,
        follower_utils,
        mu: vec![Rat::frac(1, 3); 3],
    }
}

pub fn build_instance(cell: &LowerBoundCell) -> BsgInstance {
    build_instance_with(&cell.w)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub cell_id: usize,
    /// `𝒫_θk(a*) = S^I` for each type.
    pub region_equal: Vec<bool>,
    pub leader_inside: bool,
    /// Cells whose centroid gives the leader a nonzero utility.
    pub leader_outside_failures: Vec<usize>,
    pub max_bits: u64,
    /// `max_bits / B`.
    pub bit_constant: Rat,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.region_equal.iter().all(|&b| b) && self.leader_inside && self.leader_outside_failures.is_empty()
    }
}

pub fn verify_construction(inst: &BsgInstance, cell: &LowerBoundCell) -> Result<VerificationReport> {
    let s = cell.region();
    let region_equal = (0..3).map(|t| inst.best_response_region(t, A_STAR).set_eq(&s)).collect();
    let leader_inside = inst.leader_expected_utility(&cell.centroid())? == Rat::one();
    let mut leader_outside_failures = Vec::new();
    for other in triangulate(cell.b)? {
        if other.cell_id != cell.cell_id && !inst.leader_expected_utility(&other.centroid())?.is_zero() {
            leader_outside_failures.push(other.cell_id);
        }
    }
    Ok(VerificationReport {
        cell_id: cell.cell_id,
        region_equal,
        leader_inside,
        leader_outside_failures,
        max_bits: inst.l,
        bit_constant: Rat::frac(inst.l as i64, cell.b as i64),
    })
}

/// Lattice points of the triangulation in lexicographic order.
pub fn lattice_vertices(b: u32) -> Vec<Vec<Rat>> {
    let n = 1u64 << b;
    let mut out = Vec::new();
    for i in 0..=n {
        for j in 0..=n - i {
            out.push(
                [i, j, n - i - j]
                    .iter()
                    .map(|&c| Rat::new(c, n).expect("nonzero"))
                    .collect(),
            );
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrialOutcome {
    pub cell_id: usize,
    /// Round at which `a*` was first observed, 1-based.
    pub found_at: Option<u64>,
    pub regret: Rat,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemoReport {
    #[serde(rename = "B")]
    pub b: u32,
    pub cells: usize,
    #[serde(rename = "T")]
    pub horizon: u64,
    pub trials: usize,
    pub seed: u64,
    pub misses: usize,
    pub miss_rate: f64,
    /// Lower end of a 95% Wilson interval for the miss rate.
    pub miss_rate_low: f64,
    pub mean_regret: Rat,
    pub outcomes: Vec<TrialOutcome>,
}

/// Sweeps lattice vertices in order under action feedback and commits to
/// the first vertex where `a*` is observed.
pub fn sweep_trial(cell: &LowerBoundCell, horizon: u64, seed: u64) -> Result<TrialOutcome> {
    let inst = Arc::new(build_instance(cell));
    let mut env = Environment::with_opt(inst, FeedbackMode::Action, horizon, seed, Rat::one())?;
    let probes = lattice_vertices(cell.b);
    let mut found: Option<(u64, Vec<Rat>)> = None;
    for t in 0..horizon {
        let x = match &found {
            Some((_, v)) => v.clone(),
            None => probes[(t as usize).min(probes.len() - 1)].clone(),
        };
        let fb = env.step(&x)?;
        if found.is_none() && fb.response() == A_STAR {
            found = Some((t + 1, x));
        }
    }
    Ok(TrialOutcome {
        cell_id: cell.cell_id,
        found_at: found.map(|(t, _)| t),
        regret: env.log().last().map_or_else(Rat::zero, |r| r.cum_regret.clone()),
    })
}

fn wilson_low(k: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let z = 1.96f64;
    let p = k as f64 / n as f64;
    let n = n as f64;
    let centre = p + z * z / (2.0 * n);
    let spread = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt();
    (centre - spread) / (1.0 + z * z / n)
}

/// Runs the sweep against cells drawn by shuffled passes over the family.
pub fn hardness_demo(b: u32, horizon: u64, trials: usize, seed: u64) -> Result<DemoReport> {
    let cells = triangulate(b)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order = Vec::with_capacity(trials);
    while order.len() < trials {
        let mut pass: Vec<usize> = (0..cells.len()).collect();
        pass.shuffle(&mut rng);
        order.extend(pass.into_iter().take(trials - order.len()));
    }
    let outcomes = order
        .par_iter()
        .enumerate()
        .map(|(i, &c)| sweep_trial(&cells[c], horizon, seed.wrapping_add(i as u64)))
        .collect::<Result<Vec<_>>>()?;
    let misses = outcomes.iter().filter(|o| o.found_at.is_none()).count();
    let total: Rat = outcomes.iter().map(|o| o.regret.clone()).sum();
    Ok(DemoReport {
        b,
        cells: cells.len(),
        horizon,
        trials,
        seed,
        misses,
        miss_rate: misses as f64 / trials.max(1) as f64,
        miss_rate_low: wilson_low(misses, trials),
        mean_regret: total / Rat::int(trials.max(1) as i64),
        outcomes,
    })
}

/// `⌈|𝒯_ε| / 24⌉`.
pub fn critical_horizon(b: u32) -> u64 {
    (1u64 << (2 * b)).div_ceil(24)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_counts() {
        assert_eq!(triangulate(1).unwrap().len(), 4);
        assert_eq!(triangulate(2).unwrap().len(), 16);
        assert_eq!(triangulate(3).unwrap().len(), 64);
        assert!(triangulate(0).is_err());
    }

    #[test]
    fn rotation_values() {
        assert_eq!(rotation(1, 2), 2);
        for k in 1..=3 {
            let mut image: Vec<usize> = (1..=3).map(|j| rotation(j, k)).collect();
            image.sort_unstable();
            assert_eq!(image, vec![1, 2, 3]);
        }
        assert_eq!((1..=3).map(|j| rotation(j, 1)).collect::<Vec<_>>(), vec![1, 2, 3]);
    }

    #[test]
    fn coefficients_are_bounded() {
        let half = Rat::frac(1, 2);
        for cell in triangulate(3).unwrap() {
            assert!(cell.w.iter().flatten().all(|v| v.abs() <= half));
            assert!(cell.region().is_full_dim());
            let inst = build_instance(&cell);
            assert!(inst.validate_entries().is_valid());
        }
    }

    #[test]
    fn zero_coefficients_make_a_star_everywhere() {
        let inst = build_instance_with(&vec![vec![Rat::zero(); 3]; 3]);
        let x = vec![Rat::frac(1, 5), Rat::frac(3, 10), Rat::frac(1, 2)];
        for t in 0..3 {
            assert_eq!(inst.best_response(t, &x).unwrap(), A_STAR);
        }
    }

    #[test]
    fn small_family_verifies() {
        for cell in triangulate(1).unwrap() {
            let r = verify_construction(&build_instance(&cell), &cell).unwrap();
            assert!(r.passed(), "{r:?}");
        }
    }

    #[test]
    fn sign_flip_breaks_region_identity() {
        let cell = &triangulate(2).unwrap()[5];
        let (j, i) = (0..3)
            .flat_map(|j| (0..3).map(move |i| (j, i)))
            .max_by_key(|&(j, i)| cell.w[j][i].abs())
            .unwrap();
        let mut w = cell.w.clone();
        w[j][i] = -w[j][i].clone();
        let r = verify_construction(&build_instance_with(&w), cell).unwrap();
        assert!(r.region_equal.iter().any(|&b| !b));
    }

    #[test]
    fn responses_outside_are_a_permutation() {
        let cells = triangulate(2).unwrap();
        let probe = vec![Rat::frac(1, 7), Rat::frac(2, 7), Rat::frac(4, 7)];
        for cell in &cells {
            let inst = build_instance(cell);
            if cell.region().contains(&probe) {
                continue;
            }
            let mut seen: Vec<usize> = (0..3).map(|t| inst.best_response(t, &probe).unwrap()).collect();
            seen.sort_unstable();
            assert_eq!(seen, vec![0, 1, 2]);
        }
    }

    #[test]
    fn sweep_finds_small_cells() {
        let r = hardness_demo(1, 100, 8, 3).unwrap();
        assert_eq!(r.misses, 0);
        assert!(r.outcomes.iter().all(|o| o.found_at.unwrap() <= 6));
    }
}
