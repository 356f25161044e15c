//! Learning the best-response regions of one follower type inside a
//! polytope, using best-response queries only.
//!
//! The learner keeps, for every action it has discovered, a witness point
//! strictly inside that action's region and a hypothesis `U_a`: the polytope
//! `S` cut by every separating hyperplane learned so far. A vertex `v` of
//! `U_a` is checked with one query on the segment from the witness to `v`,
//! placed so close to `v` that it lands outside the region exactly when `v`
//! does. Failing vertices trigger an exact search for the crossing point on
//! that segment; once `m - 1` independent crossing points are known for a
//! pair of actions, the hyperplane between them is their nullspace.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::env::{Environment, FeedbackMode};
use crate::error::{Error, Result};
use crate::geometry::linalg::{nullspace, rank};
use crate::geometry::{Halfspace, Polytope};
use crate::rat::{common_denominator, dot, Rat};

/// Something that answers "what does type θ play at `x`?".
pub trait ResponseOracle {
    /// Leader action count.
    fn dim(&self) -> usize;
    /// Follower action count.
    fn actions(&self) -> usize;
    fn query(&mut self, x: &[Rat]) -> Result<usize>;
}

/// Default number of queries a single region-learning call is budgeted for
/// when splitting the failure probability across queries.
pub const DEFAULT_QUERY_BUDGET: u64 = 10_000;

/// Round cap `⌈(1/ε)·ln(1/ρ)⌉` for one query.
pub fn query_round_cap(eps: &Rat, rho: &Rat) -> u64 {
    let v = eps.recip().to_f64() * rho.recip().to_f64().ln();
    v.ceil().max(1.0) as u64
}

/// Queries an [`Environment`] by committing to `x` until a follower of the
/// target type shows up.
#[derive(Debug)]
pub struct QueryOracle<'e> {
    env: &'e mut Environment,
    theta: usize,
    cap: u64,
    rounds_spent: u64,
    queries: u64,
}

impl<'e> QueryOracle<'e> {
    pub fn new(env: &'e mut Environment, theta: usize, cap: u64) -> Self {
        QueryOracle {
            env,
            theta,
            cap,
            rounds_spent: 0,
            queries: 0,
        }
    }

    /// Cap derived from a lower bound `eps` on `μ_θ` and a confidence `zeta`
    /// split over `budget` queries: `ρ = ζ / (2·budget)`.
    pub fn with_confidence(env: &'e mut Environment, theta: usize, eps: &Rat, zeta: &Rat, budget: u64) -> Self {
        let rho = zeta / &Rat::int(2 * budget as i64);
        let cap = query_round_cap(eps, &rho);
        Self::new(env, theta, cap)
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    pub fn rounds_spent(&self) -> u64 {
        self.rounds_spent
    }

    pub fn queries(&self) -> u64 {
        self.queries
    }
}

impl ResponseOracle for QueryOracle<'_> {
    fn dim(&self) -> usize {
        self.env.public_info().m
    }

    fn actions(&self) -> usize {
        self.env.public_info().n
    }

    fn query(&mut self, x: &[Rat]) -> Result<usize> {
        if self.env.mode() != FeedbackMode::Type {
            return Err(Error::FeedbackMode("queries need to observe the follower type".into()));
        }
        for _ in 0..self.cap {
            let fb = self.env.step(x)?;
            self.rounds_spent += 1;
            if fb.theta() == Some(self.theta) {
                self.queries += 1;
                return Ok(fb.response());
            }
        }
        Err(Error::QueryTimeout {
            theta: self.theta,
            rounds: self.cap,
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LearnStats {
    pub queries: u64,
    pub searches: u64,
    pub hyperplanes: u64,
    pub retries: u64,
}

/// Learned regions indexed by follower action; `None` marks an action
/// whose region inside `S` is not full-dimensional.
#[derive(Debug, Clone)]
pub struct RegionMap {
    pub regions: Vec<Option<Polytope>>,
    pub stats: LearnStats,
}

impl RegionMap {
    pub fn get(&self, a: usize) -> Option<&Polytope> {
        self.regions.get(a).and_then(Option::as_ref)
    }

    pub fn nonempty(&self) -> impl Iterator<Item = (usize, &Polytope)> {
        self.regions.iter().enumerate().filter_map(|(a, p)| p.as_ref().map(|p| (a, p)))
    }
}

const MAX_QUERIES: u64 = 200_000;
const WITNESS_ATTEMPTS: usize = 64;
const PERTURBATION_LEVELS: u32 = 24;

/// Learns `{P_θ(a) ∩ S}` for every action `a`, keeping only
/// full-dimensional pieces. `bits` must bound the bit complexity of the
/// follower's payoffs; a failed reconstruction is retried once with twice
/// the bound.
pub fn learn_regions<O: ResponseOracle>(oracle: &mut O, s: &Polytope, bits: u64) -> Result<RegionMap> {
    let n = oracle.actions();
    if s.is_empty() || !s.is_full_dim() {
        return Ok(RegionMap {
            regions: vec![None; n],
            stats: LearnStats::default(),
        });
    }
    if n == 1 {
        let mut regions = vec![None; 1];
        regions[0] = Some(s.clone());
        return Ok(RegionMap {
            regions,
            stats: LearnStats::default(),
        });
    }
    let mut cache = HashMap::new();
    match Learner::new(oracle, s, bits, &mut cache).run() {
        Err(Error::ReconstructionFailure(_)) => {
            let mut map = Learner::new(oracle, s, bits.saturating_mul(2), &mut cache).run()?;
            map.stats.retries = 1;
            Ok(map)
        }
        other => other,
    }
}

struct Search {
    lambda: Rat,
    point: Vec<Rat>,
    other: usize,
}

struct Learner<'a, O: ResponseOracle> {
    oracle: &'a mut O,
    cache: &'a mut HashMap<Vec<Rat>, usize>,
    s: Polytope,
    m: usize,
    n: usize,
    // Bound on the common denominator of a payoff-difference vector.
    dg: BigInt,
    rng: ChaCha8Rng,
    witnesses: BTreeMap<usize, Vec<Rat>>,
    // planes[(a, b)] with a < b, oriented so that a's side is `>= 0`.
    planes: BTreeMap<(usize, usize), Halfspace>,
    boundary: BTreeMap<(usize, usize), Vec<Vec<Rat>>>,
    verified: HashSet<(usize, Vec<Rat>)>,
    stats: LearnStats,
}

fn pair(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

fn lerp(w: &[Rat], t: &[Rat], lambda: &Rat) -> Vec<Rat> {
    w.iter().zip(t).map(|(a, b)| a + &(lambda * &(b - a))).collect()
}

fn big(v: &BigInt) -> Rat {
    Rat::from_bigint(v.clone())
}

/// Rounds a simplex point onto the grid `2^-k`, keeping it on the simplex.
fn round_dyadic(y: &[Rat], k: u32) -> Vec<Rat> {
    let scale = BigInt::one() << k as usize;
    let imax = (0..y.len()).max_by(|&i, &j| y[i].cmp(&y[j]).then(j.cmp(&i))).unwrap_or(0);
    let mut out: Vec<Rat> = y
        .iter()
        .map(|v| Rat::new((big(&scale) * v).floor(), scale.clone()).expect("nonzero"))
        .collect();
    let rest: Rat = out.iter().enumerate().filter(|&(i, _)| i != imax).map(|(_, v)| v.clone()).sum();
    out[imax] = Rat::one() - rest;
    out
}

/// Integer vector with coprime entries on the same ray as `d`.
fn primitive(d: &[Rat]) -> Vec<Rat> {
    let l = common_denominator(d);
    let ints: Vec<BigInt> = d.iter().map(|v| (big(&l) * v).floor()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
    if g.is_zero() {
        return d.to_vec();
    }
    ints.iter().map(|v| Rat::from_bigint(v / &g)).collect()
}

impl<'a, O: ResponseOracle> Learner<'a, O> {
    fn new(oracle: &'a mut O, s: &Polytope, bits: u64, cache: &'a mut HashMap<Vec<Rat>, usize>) -> Self {
        let m = oracle.dim();
        let n = oracle.actions();
        let exp = 2 * m as u64 * bits.saturating_sub(1);
        Learner {
            oracle,
            cache,
            s: s.clone(),
            m,
            n,
            dg: BigInt::one() << exp as usize,
            rng: ChaCha8Rng::seed_from_u64(0x5eed ^ bits),
            witnesses: BTreeMap::new(),
            planes: BTreeMap::new(),
            boundary: BTreeMap::new(),
            verified: HashSet::new(),
            stats: LearnStats::default(),
        }
    }

    fn query(&mut self, x: &[Rat]) -> Result<usize> {
        if let Some(&a) = self.cache.get(x) {
            return Ok(a);
        }
        if self.stats.queries >= MAX_QUERIES {
            return Err(Error::ReconstructionFailure("query budget exhausted".into()));
        }
        let a = self.oracle.query(x)?;
        self.stats.queries += 1;
        self.cache.insert(x.to_vec(), a);
        Ok(a)
    }

    fn fail<T>(msg: impl Into<String>) -> Result<T> {
        Err(Error::ReconstructionFailure(msg.into()))
    }

    fn run(mut self) -> Result<RegionMap> {
        let (a0, w0) = self.initial_witness()?;
        self.witnesses.insert(a0, w0);
        let mut queue = VecDeque::from([a0]);
        while let Some(a) = queue.pop_front() {
            'refine: loop {
                let u = self.region(a)?;
                for v in u.vertices()? {
                    if self.verified.contains(&(a, v.clone())) {
                        continue;
                    }
                    if self.vertex_in_region(a, &v)? {
                        self.verified.insert((a, v));
                        continue;
                    }
                    if let Some(b) = self.learn_cut(a, &v)? {
                        queue.push_back(b);
                    }
                    continue 'refine;
                }
                break;
            }
        }
        let mut regions = vec![None; self.n];
        for &a in self.witnesses.keys() {
            let u = self.region(a)?.canonicalize();
            if !u.is_full_dim() {
                return Self::fail(format!("learned region of action {a} is degenerate"));
            }
            regions[a] = Some(u);
        }
        Ok(RegionMap {
            regions,
            stats: self.stats,
        })
    }

    fn region(&self, a: usize) -> Result<Polytope> {
        let cuts = self
            .planes
            .iter()
            .filter(|((p, q), _)| *p == a || *q == a)
            .map(|((p, _), h)| if *p == a { h.clone() } else { h.negated() })
            .collect::<Vec<_>>();
        self.s.intersect_all(cuts.iter())
    }

    /// `λ` so close to 1 that `w + λ(v - w)` is outside the region of the
    /// witness' action exactly when `v` is.
    fn near_end(&self, v: &[Rat]) -> Rat {
        let q = &self.dg * common_denominator(v) * BigInt::from(4);
        Rat::one() - Rat::from_bigint(q).recip()
    }

    fn vertex_in_region(&mut self, a: usize, v: &[Rat]) -> Result<bool> {
        let w = self.witnesses[&a].clone();
        let x = lerp(&w, v, &self.near_end(v));
        Ok(self.query(&x)? == a)
    }

    /// Exact first crossing on the segment `w → t`, where `w` is a witness of
    /// `a` and the response at `λ = hi` is known to differ from `a`.
    fn search(&mut self, a: usize, w: &[Rat], t: &[Rat]) -> Result<Search> {
        self.stats.searches += 1;
        let q = BigInt::from(2) * &self.dg * common_denominator(w) * common_denominator(t);
        let eta = |c: &Rat| Rat::from_bigint(BigInt::from(2) * &q * c.denom()).recip();
        let cmp = |this: &mut Self, c: &Rat| -> Result<Ordering> {
            if c.denom() > &q {
                return Self::fail("crossing denominator exceeds the bit bound");
            }
            let e = eta(c);
            if this.query(&lerp(w, t, c))? == a {
                let past = c + &e;
                Ok(if this.query(&lerp(w, t, &past))? == a { Ordering::Greater } else { Ordering::Equal })
            } else {
                let before = c - &e;
                Ok(if this.query(&lerp(w, t, &before))? == a { Ordering::Equal } else { Ordering::Less })
            }
        };
        // Stern–Brocot descent with galloping; `ord` compares λ* to the probe.
        let (mut lp, mut lq, mut rp, mut rq) = (BigInt::zero(), BigInt::one(), BigInt::one(), BigInt::one());
        let frac = |p: &BigInt, q: &BigInt| Rat::new(p.clone(), q.clone()).expect("positive denominator");
        let lambda = 'found: loop {
            let c = frac(&(&lp + &rp), &(&lq + &rq));
            let dir = cmp(self, &c)?;
            if dir == Ordering::Equal {
                break 'found c;
            }
            let toward_right = dir == Ordering::Greater;
            let probe = |k: &BigInt| {
                if toward_right {
                    frac(&(&lp + k * &rp), &(&lq + k * &rq))
                } else {
                    frac(&(k * &lp + &rp), &(k * &lq + &rq))
                }
            };
            let mut good = BigInt::one();
            let mut bad = BigInt::from(2);
            loop {
                match cmp(self, &probe(&bad))? {
                    Ordering::Equal => break 'found probe(&bad),
                    o if o == dir => {
                        good = bad.clone();
                        bad *= 2;
                    }
                    _ => break,
                }
            }
            while &bad - &good > BigInt::one() {
                let mid: BigInt = (&good + &bad) / 2;
                match cmp(self, &probe(&mid))? {
                    Ordering::Equal => break 'found probe(&mid),
                    o if o == dir => good = mid,
                    _ => bad = mid,
                }
            }
            let (g, b) = (probe(&good), probe(&bad));
            let (lo, hi) = if toward_right { (g, b) } else { (b, g) };
            (lp, lq) = (lo.numer().clone(), lo.denom().clone());
            (rp, rq) = (hi.numer().clone(), hi.denom().clone());
        };
        let past = &lambda + &eta(&lambda);
        if past > Rat::one() {
            return Self::fail("crossing at the segment end");
        }
        let other = self.query(&lerp(w, t, &past))?;
        if other == a {
            return Self::fail("no action change past the crossing");
        }
        Ok(Search {
            point: lerp(w, t, &lambda),
            lambda,
            other,
        })
    }

    fn record(&mut self, a: usize, found: &Search) {
        let pts = self.boundary.entry(pair(a, found.other)).or_default();
        if !pts.contains(&found.point) {
            pts.push(found.point.clone());
        }
    }

    fn ready(&self, key: (usize, usize)) -> bool {
        !self.planes.contains_key(&key)
            && self.boundary.get(&key).is_some_and(|pts| rank(pts.clone()) >= self.m - 1)
    }

    /// Learns at least one new hyperplane of `a`'s region, starting from a
    /// vertex `v` that lies outside it. Returns a newly discovered action.
    fn learn_cut(&mut self, a: usize, v: &[Rat]) -> Result<Option<usize>> {
        let w = self.witnesses[&a].clone();
        let first = self.search(a, &w, v)?;
        if self.planes.contains_key(&pair(a, first.other)) {
            return Self::fail("crossing on an already learned hyperplane");
        }
        self.record(a, &first);
        let mut last: BTreeMap<usize, (Vec<Rat>, Search)> = BTreeMap::new();
        let first_other = first.other;
        last.insert(first.other, (v.to_vec(), first));
        let mut done = self.ready(pair(a, first_other)).then_some(first_other);
        if done.is_none() {
            let x0 = last[&first_other].1.point.clone();
            let center: Vec<Rat> = x0.iter().zip(v).map(|(p, q)| (p + q) * Rat::frac(1, 2)).collect();
            let spread = x0.iter().zip(&center).map(|(p, q)| (p - q).abs()).max().expect("m >= 1");
            let dirs = self.directions();
            'levels: for level in 1..=PERTURBATION_LEVELS {
                let r = &spread * &Rat::pow2_neg(level);
                for d in &dirs {
                    let t: Vec<Rat> = center.iter().zip(d).map(|(c, e)| c + &(&r * e)).collect();
                    if !self.s.contains(&t) {
                        continue;
                    }
                    let probe = lerp(&w, &t, &self.near_end(&t));
                    if self.query(&probe)? == a {
                        continue;
                    }
                    let found = self.search(a, &w, &t)?;
                    if self.planes.contains_key(&pair(a, found.other)) {
                        continue;
                    }
                    self.record(a, &found);
                    let other = found.other;
                    last.insert(other, (t, found));
                    if self.ready(pair(a, other)) {
                        done = Some(other);
                        break 'levels;
                    }
                }
            }
        }
        let Some(b) = done else {
            return Self::fail("could not collect independent boundary points");
        };
        self.finalize(a, b)?;
        if self.witnesses.contains_key(&b) {
            return Ok(None);
        }
        let (t, found) = last.remove(&b).expect("search recorded for the pair");
        let wb = self.discover(b, &w, &t, &found)?;
        self.witnesses.insert(b, wb);
        Ok(Some(b))
    }

    /// Unit moves inside the simplex plane plus a few seeded random ones.
    fn directions(&mut self) -> Vec<Vec<Rat>> {
        let m = self.m;
        let mut dirs = Vec::new();
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    let mut d = vec![Rat::zero(); m];
                    d[i] = Rat::one();
                    d[j] = Rat::int(-1);
                    dirs.push(d);
                }
            }
        }
        for _ in 0..2 * m {
            let mut d: Vec<Rat> = (0..m).map(|_| Rat::frac(self.rng.gen_range(-8..=8), 8)).collect();
            let mean = d.iter().sum::<Rat>() * Rat::frac(1, m as i64);
            for v in d.iter_mut() {
                *v = &*v - &mean;
            }
            if d.iter().any(|v| !v.is_zero()) {
                dirs.push(d);
            }
        }
        dirs
    }

    fn finalize(&mut self, a: usize, b: usize) -> Result<()> {
        let key = pair(a, b);
        let pts = self.boundary[&key].clone();
        let ns = nullspace(&pts, self.m);
        if ns.len() != 1 {
            return Self::fail(format!("boundary points of ({a},{b}) do not fix a hyperplane"));
        }
        let mut d = primitive(&ns[0]);
        let wa = &self.witnesses[&a];
        match dot(&d, wa).signum() {
            Ordering::Equal => return Self::fail("witness lies on a learned hyperplane"),
            Ordering::Less => d = d.iter().map(|v| -v).collect(),
            Ordering::Greater => {}
        }
        if let Some(wb) = self.witnesses.get(&b) {
            if !dot(&d, wb).is_negative() {
                return Self::fail("learned hyperplane does not separate the witnesses");
            }
        }
        let h = Halfspace {
            coeffs: d,
            rhs: Rat::zero(),
        };
        let h = if key.0 == a { h } else { h.negated() };
        self.planes.insert(key, h);
        self.stats.hyperplanes += 1;
        Ok(())
    }

    /// Certifies `y` as a strict interior point of some action's region by
    /// querying a small simplex around it. Returns that action.
    fn certify(&mut self, y: &[Rat], radius: &Rat) -> Result<Option<usize>> {
        if !self.s.strictly_contains(y) {
            return Ok(None);
        }
        let c = self.query(y)?;
        let m = self.m;
        let mut r = radius.clone();
        for _ in 0..4 {
            let pts: Vec<Vec<Rat>> = (0..m)
                .map(|i| {
                    (0..m)
                        .map(|j| {
                            let e = if i == j { Rat::one() } else { Rat::zero() };
                            &y[j] + &(&r * &(e - Rat::frac(1, m as i64)))
                        })
                        .collect()
                })
                .collect();
            if pts.iter().all(|p| self.s.contains(p)) {
                for p in &pts {
                    if self.query(p)? != c {
                        return Ok(None);
                    }
                }
                return Ok(Some(c));
            }
            r = r * Rat::frac(1, 16);
        }
        Ok(None)
    }

    fn initial_witness(&mut self) -> Result<(usize, Vec<Rat>)> {
        let center = self.s.relative_interior_point()?;
        let verts = self.s.vertices()?;
        for attempt in 0..WITNESS_ATTEMPTS {
            let y = if attempt == 0 {
                center.clone()
            } else {
                let weights: Vec<i64> = verts.iter().map(|_| self.rng.gen_range(1..=16)).collect();
                let total: i64 = weights.iter().sum();
                let mut y = vec![Rat::zero(); self.m];
                for (v, &wt) in verts.iter().zip(&weights) {
                    for (yi, vi) in y.iter_mut().zip(v) {
                        *yi += &(vi * &Rat::frac(wt, total));
                    }
                }
                y.iter().zip(&center).map(|(p, q)| (p + q) * Rat::frac(1, 2)).collect()
            };
            let k = 6 + 2 * (attempt as u32 / 4);
            let y = round_dyadic(&y, k);
            if let Some(c) = self.certify(&y, &Rat::pow2_neg(k + 1))? {
                return Ok((c, y));
            }
        }
        Self::fail("no certified starting witness")
    }

    /// A witness for `b` on the far side of a crossing found on `w → t`.
    fn discover(&mut self, b: usize, w: &[Rat], t: &[Rat], found: &Search) -> Result<Vec<Rat>> {
        let gap = Rat::one() - &found.lambda;
        for j in 1..=40u32 {
            let lam = &found.lambda + &(&gap * &Rat::pow2_neg(j));
            let y = lerp(w, t, &lam);
            let k = 8 + 2 * j;
            let y = round_dyadic(&y, k);
            if self.certify(&y, &Rat::pow2_neg(k + 1))? == Some(b) {
                return Ok(y);
            }
        }
        // Just past the crossing `b` is the unique best response.
        let q = BigInt::from(2) * &self.dg * common_denominator(w) * common_denominator(t);
        let eta = Rat::from_bigint(BigInt::from(4) * q * found.lambda.denom()).recip();
        let y = lerp(w, t, &(&found.lambda + &eta));
        if self.query(&y)? != b {
            return Self::fail("discovered action changed past the crossing");
        }
        Ok(y)
    }
}

/// Ground-truth counterpart of [`learn_regions`] that reads the payoffs.
#[cfg(any(test, feature = "white-box"))]
pub mod white_box {
    use super::*;
    use crate::game::BsgInstance;

    pub fn learn_regions(inst: &BsgInstance, theta: usize, s: &Polytope) -> RegionMap {
        let regions = (0..inst.n)
            .map(|a| {
                if s.is_empty() || !s.is_full_dim() {
                    return None;
                }
                let r = s.meet(&inst.best_response_region(theta, a)).expect("same dimension");
                r.is_full_dim().then(|| r.canonicalize())
            })
            .collect();
        RegionMap {
            regions,
            stats: LearnStats::default(),
        }
    }

    /// Answers queries straight from the payoffs.
    pub struct InstanceOracle<'a> {
        pub inst: &'a BsgInstance,
        pub theta: usize,
        pub queries: u64,
    }

    impl<'a> InstanceOracle<'a> {
        pub fn new(inst: &'a BsgInstance, theta: usize) -> Self {
            InstanceOracle { inst, theta, queries: 0 }
        }
    }

    impl ResponseOracle for InstanceOracle<'_> {
        fn dim(&self) -> usize {
            self.inst.m
        }

        fn actions(&self) -> usize {
            self.inst.n
        }

        fn query(&mut self, x: &[Rat]) -> Result<usize> {
            self.queries += 1;
            self.inst.best_response(self.theta, x)
        }
    }

    /// True iff both maps agree action by action, by mutual LP implication.
    pub fn maps_equal(a: &RegionMap, b: &RegionMap) -> bool {
        a.regions.len() == b.regions.len()
            && a.regions.iter().zip(&b.regions).all(|(p, q)| match (p, q) {
                (None, None) => true,
                (Some(p), Some(q)) => p.set_eq(q),
                _ => false,
            })
    }
}
