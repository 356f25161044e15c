use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use super::linalg::solve_square;
use super::lp::{Lp, LpOutcome};
use crate::error::{Error, Result};
use crate::rat::{dot, Rat};

/// `{x : coeffs·x >= rhs}`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Halfspace {
    pub coeffs: Vec<Rat>,
    pub rhs: Rat,
}

impl Halfspace {
    pub fn new(coeffs: Vec<Rat>, rhs: Rat) -> Result<Self> {
        if coeffs.iter().all(Rat::is_zero) && rhs.is_positive() {
            return Err(Error::InvalidHalfspace(rhs.to_string()));
        }
        Ok(Halfspace { coeffs, rhs })
    }

    /// `coeffs·x >= rhs` rewritten as `(coeffs - rhs·1)·x >= 0`, which is
    /// equivalent on the simplex hyperplane and never violates the
    /// all-zero rule.
    pub fn homogenized(coeffs: &[Rat], rhs: &Rat) -> Self {
        Halfspace {
            coeffs: coeffs.iter().map(|c| c - rhs).collect(),
            rhs: Rat::zero(),
        }
    }

    /// `x_i >= 0` in dimension `m`.
    pub fn nonneg(m: usize, i: usize) -> Self {
        let mut coeffs = vec![Rat::zero(); m];
        coeffs[i] = Rat::one();
        Halfspace { coeffs, rhs: Rat::zero() }
    }

    /// `x_i >= value`.
    pub fn lower_bound(m: usize, i: usize, value: Rat) -> Self {
        let mut coeffs = vec![Rat::zero(); m];
        coeffs[i] = Rat::one();
        Halfspace { coeffs, rhs: value }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    /// `coeffs·x - rhs`.
    pub fn slack(&self, x: &[Rat]) -> Rat {
        dot(&self.coeffs, x) - &self.rhs
    }

    pub fn contains(&self, x: &[Rat]) -> bool {
        !self.slack(x).is_negative()
    }

    pub fn negated(&self) -> Self {
        Halfspace {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
            rhs: -&self.rhs,
        }
    }

    fn is_trivially_true(&self) -> bool {
        self.coeffs.iter().all(Rat::is_zero) && !self.rhs.is_positive()
    }
}

impl fmt::Debug for Halfspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}·x >= {:?}", self.coeffs, self.rhs)
    }
}

/// A polytope inside the probability simplex of `R^m`.
///
/// The simplex constraints (`x >= 0` and `Σx = 1`) are always part of the
/// set and are not stored in [`Polytope::halfspaces`]; only the additional
/// cuts are. Derived data (emptiness, vertices, canonical form) is computed
/// lazily and cached, so a `Polytope` is cheap to share once inspected.
#[derive(Clone)]
pub struct Polytope {
    m: usize,
    halfspaces: Arc<Vec<Halfspace>>,
    cache: Arc<Cache>,
}

#[derive(Default)]
struct Cache {
    feasible_point: OnceLock<Option<Vec<Rat>>>,
    interior: OnceLock<Option<Vec<Rat>>>,
    vertices: OnceLock<Vec<Vec<Rat>>>,
    canonical: OnceLock<Vec<Halfspace>>,
}

#[derive(Serialize, Deserialize)]
struct PolytopeJson {
    m: usize,
    halfspaces: Vec<Halfspace>,
}

impl Serialize for Polytope {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolytopeJson {
            m: self.m,
            halfspaces: self.halfspaces.to_vec(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polytope {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = PolytopeJson::deserialize(d)?;
        let mut p = Polytope::simplex(raw.m).map_err(serde::de::Error::custom)?;
        for h in raw.halfspaces {
            let h = Halfspace::new(h.coeffs, h.rhs).map_err(serde::de::Error::custom)?;
            p = p.intersect(&h).map_err(serde::de::Error::custom)?;
        }
        Ok(p)
    }
}

impl fmt::Debug for Polytope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Polytope")
            .field("m", &self.m)
            .field("halfspaces", &self.halfspaces)
            .finish()
    }
}

impl Polytope {
    /// The probability simplex in `R^m`.
    pub fn simplex(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidDimension("simplex needs m >= 1".into()));
        }
        Ok(Polytope {
            m,
            halfspaces: Arc::new(Vec::new()),
            cache: Arc::default(),
        })
    }

    pub fn from_halfspaces(m: usize, halfspaces: impl IntoIterator<Item = Halfspace>) -> Result<Self> {
        let hs: Vec<Halfspace> = halfspaces.into_iter().collect();
        for h in &hs {
            check_dim(m, h.dim())?;
        }
        let p = Polytope::simplex(m)?;
        Ok(Polytope {
            halfspaces: Arc::new(hs),
            ..p
        })
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    /// The cuts beyond the simplex constraints.
    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    /// All inequality constraints: the `m` nonnegativity constraints first,
    /// then the cuts. The affine constraint `Σx = 1` is implicit.
    pub fn constraints(&self) -> Vec<Halfspace> {
        (0..self.m)
            .map(|i| Halfspace::nonneg(self.m, i))
            .chain(self.halfspaces.iter().cloned())
            .collect()
    }

    pub fn intersect(&self, h: &Halfspace) -> Result<Self> {
        check_dim(self.m, h.dim())?;
        let mut hs = self.halfspaces.to_vec();
        hs.push(h.clone());
        Ok(Polytope {
            m: self.m,
            halfspaces: Arc::new(hs),
            cache: Arc::default(),
        })
    }

    pub fn intersect_all<'a>(&self, hs: impl IntoIterator<Item = &'a Halfspace>) -> Result<Self> {
        let mut all = self.halfspaces.to_vec();
        for h in hs {
            check_dim(self.m, h.dim())?;
            all.push(h.clone());
        }
        Ok(Polytope {
            m: self.m,
            halfspaces: Arc::new(all),
            cache: Arc::default(),
        })
    }

    /// Intersection of two polytopes in the same simplex.
    pub fn meet(&self, other: &Polytope) -> Result<Self> {
        check_dim(self.m, other.m)?;
        self.intersect_all(other.halfspaces.iter())
    }

    pub fn contains(&self, x: &[Rat]) -> bool {
        x.len() == self.m
            && x.iter().all(|v| !v.is_negative())
            && x.iter().sum::<Rat>() == Rat::one()
            && self.halfspaces.iter().all(|h| h.contains(x))
    }

    /// True iff `x` satisfies every constraint with strict inequality.
    pub fn strictly_contains(&self, x: &[Rat]) -> bool {
        self.contains(x)
            && x.iter().all(Rat::is_positive)
            && self.halfspaces.iter().all(|h| h.slack(x).is_positive())
    }

    fn base_lp(&self, extra_vars: usize) -> Lp {
        let m = self.m;
        let mut lp = Lp::new(m + extra_vars);
        let mut ones = vec![Rat::one(); m];
        ones.extend((0..extra_vars).map(|_| Rat::zero()));
        lp.eq(ones, Rat::one());
        lp
    }

    fn feasible_point(&self) -> Option<&Vec<Rat>> {
        self.cache
            .feasible_point
            .get_or_init(|| {
                let mut lp = self.base_lp(0);
                for h in self.halfspaces.iter() {
                    lp.ge(h.coeffs.clone(), h.rhs.clone());
                }
                lp.solve().optimal().map(|(_, x)| x)
            })
            .as_ref()
    }

    pub fn is_empty(&self) -> bool {
        self.feasible_point().is_none()
    }

    fn slack_lp(&self) -> Option<Vec<Rat>> {
        // max s  s.t.  x_i - s >= 0,  h·x - s >= rhs,  Σx = 1,  x, s >= 0
        let m = self.m;
        let mut lp = self.base_lp(1);
        for i in 0..m {
            let mut row = vec![Rat::zero(); m + 1];
            row[i] = Rat::one();
            row[m] = Rat::int(-1);
            lp.ge(row, Rat::zero());
        }
        for h in self.halfspaces.iter() {
            let mut row = h.coeffs.clone();
            row.push(Rat::int(-1));
            lp.ge(row, h.rhs.clone());
        }
        let mut obj = vec![Rat::zero(); m + 1];
        obj[m] = Rat::one();
        lp.maximize(obj);
        match lp.solve() {
            LpOutcome::Optimal { value, mut solution } if value.is_positive() => {
                solution.truncate(m);
                Some(solution)
            }
            _ => None,
        }
    }

    fn interior(&self) -> Option<&Vec<Rat>> {
        self.cache
            .interior
            .get_or_init(|| if self.is_empty() { None } else { self.slack_lp() })
            .as_ref()
    }

    /// Nonempty interior relative to the simplex hyperplane.
    pub fn is_full_dim(&self) -> bool {
        self.interior().is_some()
    }

    /// A point strictly inside every inequality constraint.
    pub fn relative_interior_point(&self) -> Result<Vec<Rat>> {
        self.interior().cloned().ok_or(Error::NotFullDimensional)
    }

    /// Exact maximum of `c·x`. Among optimal points the lexicographically
    /// smallest one is returned, which is always a vertex.
    pub fn maximize_linear(&self, c: &[Rat]) -> Result<(Rat, Vec<Rat>)> {
        check_dim(self.m, c.len())?;
        if self.is_empty() {
            return Err(Error::EmptyPolytope);
        }
        let mut lp = self.base_lp(0);
        for h in self.halfspaces.iter() {
            lp.ge(h.coeffs.clone(), h.rhs.clone());
        }
        lp.maximize(c.to_vec());
        let (value, mut x) = lp.solve().optimal().ok_or(Error::EmptyPolytope)?;
        // Walk down the optimal face coordinate by coordinate.
        lp.ge(c.to_vec(), value.clone());
        for i in 0..self.m {
            let mut obj = vec![Rat::zero(); self.m];
            obj[i] = Rat::int(-1);
            lp.maximize(obj);
            let (neg_min, sol) = lp.solve().optimal().expect("optimal face is nonempty");
            let mut fix = vec![Rat::zero(); self.m];
            fix[i] = Rat::int(-1);
            lp.ge(fix, neg_min);
            x = sol;
        }
        Ok((value, x))
    }

    /// Dual multipliers proving that `c·x <= value` on the polytope: with
    /// `y >= 0` indexed like [`Polytope::constraints`] and a free `z`,
    /// `c = z·1 - Σ y_j a_j` and `z - Σ y_j b_j = value`.
    pub fn dual_certificate(&self, c: &[Rat]) -> Result<DualCertificate> {
        check_dim(self.m, c.len())?;
        if self.is_empty() {
            return Err(Error::EmptyPolytope);
        }
        let cons = self.constraints();
        let k = cons.len();
        // variables: y_0..y_{k-1}, z+, z-
        let mut lp = Lp::new(k + 2);
        for i in 0..self.m {
            let mut row: Vec<Rat> = cons.iter().map(|h| -&h.coeffs[i]).collect();
            row.push(Rat::one());
            row.push(Rat::int(-1));
            lp.eq(row, c[i].clone());
        }
        let mut obj: Vec<Rat> = cons.iter().map(|h| h.rhs.clone()).collect();
        obj.push(Rat::int(-1));
        obj.push(Rat::one());
        lp.maximize(obj);
        let (neg, sol) = lp.solve().optimal().ok_or(Error::EmptyPolytope)?;
        Ok(DualCertificate {
            multipliers: sol[..k].to_vec(),
            offset: &sol[k] - &sol[k + 1],
            value: -neg,
        })
    }

    /// Exact minimum of `c·x` with no tie-breaking.
    pub fn minimize_value(&self, c: &[Rat]) -> Result<Rat> {
        check_dim(self.m, c.len())?;
        let mut lp = self.base_lp(0);
        for h in self.halfspaces.iter() {
            lp.ge(h.coeffs.clone(), h.rhs.clone());
        }
        lp.maximize(c.iter().map(|v| -v).collect());
        let (v, _) = lp.solve().optimal().ok_or(Error::EmptyPolytope)?;
        Ok(-v)
    }

    /// Exact vertex set in lexicographic order.
    pub fn vertices(&self) -> Result<Vec<Vec<Rat>>> {
        if self.is_empty() {
            return Err(Error::EmptyPolytope);
        }
        Ok(self
            .cache
            .vertices
            .get_or_init(|| {
                if self.m <= 4 {
                    self.vertices_by_tight_sets()
                } else {
                    self.vertices_by_pivoting()
                }
            })
            .clone())
    }

    /// Solves the system made of `Σx = 1` and the chosen constraints at
    /// equality; returns the point if it is unique and feasible.
    fn basic_point(&self, cons: &[Halfspace], basis: &[usize]) -> Option<Vec<Rat>> {
        let m = self.m;
        let mut a = Vec::with_capacity(m);
        let mut b = Vec::with_capacity(m);
        a.push(vec![Rat::one(); m]);
        b.push(Rat::one());
        for &k in basis {
            a.push(cons[k].coeffs.clone());
            b.push(cons[k].rhs.clone());
        }
        let x = solve_square(a, b)?;
        cons.iter().all(|h| h.contains(&x)).then_some(x)
    }

    pub(crate) fn vertices_by_tight_sets(&self) -> Vec<Vec<Rat>> {
        let cons = self.constraints();
        let k = self.m - 1;
        let mut out = BTreeSet::new();
        let mut idx: Vec<usize> = (0..k).collect();
        let n = cons.len();
        if k > n {
            return Vec::new();
        }
        loop {
            if let Some(x) = self.basic_point(&cons, &idx) {
                out.insert(x);
            }
            // next combination
            let mut i = k;
            loop {
                if i == 0 {
                    return out.into_iter().collect();
                }
                i -= 1;
                if idx[i] != i + n - k {
                    break;
                }
                if i == 0 && idx[0] == n - k {
                    return out.into_iter().collect();
                }
            }
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }

    /// Breadth-first search over feasible bases, where neighbouring bases
    /// differ in exactly one constraint.
    pub(crate) fn vertices_by_pivoting(&self) -> Vec<Vec<Rat>> {
        let cons = self.constraints();
        let k = self.m - 1;
        let Ok((_, start)) = self.maximize_linear(&vec![Rat::zero(); self.m]) else {
            return Vec::new();
        };
        if k == 0 {
            return vec![start];
        }
        let tight: Vec<usize> = (0..cons.len()).filter(|&i| cons[i].slack(&start).is_zero()).collect();
        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        let mut queue = VecDeque::new();
        // Seed with one nonsingular basis drawn from the tight set.
        let mut chosen: Vec<usize> = Vec::new();
        for &t in &tight {
            let mut trial = chosen.clone();
            trial.push(t);
            if rank_of(&cons, &trial, self.m) == trial.len() + 1 {
                chosen = trial;
                if chosen.len() == k {
                    break;
                }
            }
        }
        chosen.sort_unstable();
        let mut out = BTreeSet::new();
        out.insert(start);
        seen.insert(chosen.clone());
        queue.push_back(chosen);
        while let Some(basis) = queue.pop_front() {
            for pos in 0..k {
                for j in 0..cons.len() {
                    if basis.contains(&j) {
                        continue;
                    }
                    let mut next = basis.clone();
                    next[pos] = j;
                    next.sort_unstable();
                    if seen.contains(&next) {
                        continue;
                    }
                    if let Some(x) = self.basic_point(&cons, &next) {
                        seen.insert(next.clone());
                        out.insert(x);
                        queue.push_back(next);
                    }
                }
            }
        }
        out.into_iter().collect()
    }

    /// Irredundant form: cuts implied by the simplex and the remaining cuts
    /// are dropped. The simplex constraints themselves are always kept.
    pub fn canonicalize(&self) -> Polytope {
        let canon = self
            .cache
            .canonical
            .get_or_init(|| {
                if self.is_empty() {
                    return self.halfspaces.to_vec();
                }
                let mut kept: Vec<Halfspace> = self
                    .halfspaces
                    .iter()
                    .filter(|h| !h.is_trivially_true())
                    .cloned()
                    .collect();
                let mut i = 0;
                while i < kept.len() {
                    let others: Vec<Halfspace> = kept
                        .iter()
                        .enumerate()
                        .filter(|&(j, _)| j != i)
                        .map(|(_, h)| h.clone())
                        .collect();
                    let rest = Polytope::from_halfspaces(self.m, others).expect("same dimension");
                    let min = rest.minimize_value(&kept[i].coeffs).expect("superset is nonempty");
                    if min >= kept[i].rhs {
                        kept.remove(i);
                    } else {
                        i += 1;
                    }
                }
                kept
            })
            .clone();
        let p = Polytope::from_halfspaces(self.m, canon).expect("same dimension");
        // Carry over what is already known.
        if let Some(v) = self.cache.feasible_point.get() {
            let _ = p.cache.feasible_point.set(v.clone());
        }
        if let Some(v) = self.cache.vertices.get() {
            let _ = p.cache.vertices.set(v.clone());
        }
        p
    }

    /// Number of facets counted as the `m` simplex constraints plus the
    /// irredundant cuts.
    pub fn facet_count(&self) -> usize {
        self.m + self.canonicalize().halfspaces.len()
    }

    /// `self ⊆ other`, decided by one LP per constraint of `other`.
    pub fn is_subset_of(&self, other: &Polytope) -> bool {
        if self.m != other.m {
            return false;
        }
        if self.is_empty() {
            return true;
        }
        other.halfspaces.iter().all(|h| {
            let min = self.minimize_value(&h.coeffs).expect("nonempty");
            min >= h.rhs
        })
    }

    /// Set equality by mutual LP implication.
    pub fn set_eq(&self, other: &Polytope) -> bool {
        self.is_subset_of(other) && other.is_subset_of(self)
    }
}

/// Certificate returned by [`Polytope::dual_certificate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualCertificate {
    pub multipliers: Vec<Rat>,
    pub offset: Rat,
    pub value: Rat,
}

impl DualCertificate {
    /// Checks the certificate against `p` and `c` exactly.
    pub fn verify(&self, p: &Polytope, c: &[Rat]) -> bool {
        let cons = p.constraints();
        if self.multipliers.len() != cons.len() || self.multipliers.iter().any(Rat::is_negative) {
            return false;
        }
        let stationary = (0..p.m).all(|i| {
            let s: Rat = cons.iter().zip(&self.multipliers).map(|(h, y)| y * &h.coeffs[i]).sum();
            &self.offset - &s == c[i]
        });
        let bound: Rat = cons.iter().zip(&self.multipliers).map(|(h, y)| y * &h.rhs).sum();
        stationary && &self.offset - &bound == self.value
    }
}

fn rank_of(cons: &[Halfspace], rows: &[usize], m: usize) -> usize {
    let mut a: Vec<Vec<Rat>> = vec![vec![Rat::one(); m]];
    a.extend(rows.iter().map(|&k| cons[k].coeffs.clone()));
    super::linalg::rank(a)
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// `x2 + λ(x1 - x2)` with `c·x + offset = y`. When the utility is constant
/// on the segment and equals `y`, the midpoint is returned.
pub fn point_on_segment_with_value(
    x1: &[Rat],
    x2: &[Rat],
    c: &[Rat],
    offset: &Rat,
    y: &Rat,
) -> Result<Vec<Rat>> {
    check_dim(x1.len(), x2.len())?;
    check_dim(x1.len(), c.len())?;
    let u1 = dot(c, x1) + offset;
    let u2 = dot(c, x2) + offset;
    let (lo, hi) = if u1 <= u2 { (&u1, &u2) } else { (&u2, &u1) };
    if y < lo || y > hi {
        return Err(Error::OutOfRange(y.to_string()));
    }
    let lambda = if u1 == u2 {
        Rat::frac(1, 2)
    } else {
        (y - &u2) / (&u1 - &u2)
    };
    Ok(x1
        .iter()
        .zip(x2)
        .map(|(a, b)| b + &(&lambda * &(a - b)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rat {
        Rat::frac(n, d)
    }

    fn pt(v: &[(i64, i64)]) -> Vec<Rat> {
        v.iter().map(|&(n, d)| q(n, d)).collect()
    }

    fn hs(c: &[i64], rhs: Rat) -> Halfspace {
        Halfspace::new(c.iter().map(|&v| Rat::int(v)).collect(), rhs).unwrap()
    }

    #[test]
    fn simplex_basics() {
        assert!(matches!(Polytope::simplex(0), Err(Error::InvalidDimension(_))));
        let p1 = Polytope::simplex(1).unwrap();
        assert_eq!(p1.vertices().unwrap(), vec![pt(&[(1, 1)])]);
        let p2 = Polytope::simplex(2).unwrap();
        assert_eq!(p2.vertices().unwrap(), vec![pt(&[(0, 1), (1, 1)]), pt(&[(1, 1), (0, 1)])]);
        let p3 = Polytope::simplex(3).unwrap();
        assert_eq!(p3.vertices().unwrap().len(), 3);
        assert!(p3.is_full_dim());
        assert_eq!(p3.constraints().len(), 3);
    }

    #[test]
    fn intersect_examples() {
        let seg = Polytope::simplex(2).unwrap().intersect(&hs(&[1, 0], q(1, 2))).unwrap();
        assert_eq!(seg.vertices().unwrap(), vec![pt(&[(1, 2), (1, 2)]), pt(&[(1, 1), (0, 1)])]);
        let d3 = Polytope::simplex(3).unwrap();
        let same = d3.intersect(&hs(&[0, 0, 0], q(-1, 1))).unwrap();
        assert!(same.set_eq(&d3));
        assert!(d3.intersect(&hs(&[1, 0, 0], q(2, 1))).unwrap().is_empty());
        assert!(d3.intersect(&hs(&[1, 0], q(0, 1))).is_err());
        assert!(Halfspace::new(vec![Rat::zero(); 3], q(1, 2)).is_err());
    }

    #[test]
    fn emptiness_and_full_dimensionality() {
        let d3 = Polytope::simplex(3).unwrap();
        assert!(!d3.is_empty());
        let corner = d3.intersect(&hs(&[1, 0, 0], q(1, 1))).unwrap();
        assert!(!corner.is_empty());
        assert!(!corner.is_full_dim());
        assert_eq!(corner.vertices().unwrap(), vec![pt(&[(1, 1), (0, 1), (0, 1)])]);
        let third = d3.intersect(&hs(&[1, 0, 0], q(1, 3))).unwrap();
        assert!(third.is_full_dim());
        assert!(matches!(corner.relative_interior_point(), Err(Error::NotFullDimensional)));
    }

    #[test]
    fn vertex_enumeration_examples() {
        let d3 = Polytope::simplex(3).unwrap();
        let half = d3.intersect(&hs(&[1, -1, 0], Rat::zero())).unwrap();
        assert_eq!(
            half.vertices().unwrap(),
            vec![pt(&[(0, 1), (0, 1), (1, 1)]), pt(&[(1, 2), (1, 2), (0, 1)]), pt(&[(1, 1), (0, 1), (0, 1)])]
        );
        assert!(matches!(d3.intersect(&hs(&[1, 0, 0], q(2, 1))).unwrap().vertices(), Err(Error::EmptyPolytope)));
    }

    #[test]
    fn maximize_examples() {
        let d3 = Polytope::simplex(3).unwrap();
        let (v, x) = d3.maximize_linear(&pt(&[(1, 1), (0, 1), (0, 1)])).unwrap();
        assert_eq!((v, x), (q(1, 1), pt(&[(1, 1), (0, 1), (0, 1)])));
        let (v, x) = d3.maximize_linear(&pt(&[(1, 1), (1, 1), (1, 1)])).unwrap();
        assert_eq!((v, x), (q(1, 1), pt(&[(0, 1), (0, 1), (1, 1)])));
        let seg = Polytope::simplex(2).unwrap().intersect(&hs(&[1, 0], q(1, 2))).unwrap();
        let (v, x) = seg.maximize_linear(&pt(&[(-1, 1), (0, 1)])).unwrap();
        assert_eq!((v, x), (q(-1, 2), pt(&[(1, 2), (1, 2)])));
    }

    #[test]
    fn interior_point_examples() {
        let d2 = Polytope::simplex(2).unwrap();
        assert_eq!(d2.relative_interior_point().unwrap(), pt(&[(1, 2), (1, 2)]));
        let d3 = Polytope::simplex(3).unwrap();
        assert_eq!(d3.relative_interior_point().unwrap(), pt(&[(1, 3), (1, 3), (1, 3)]));
        let seg = d2.intersect(&hs(&[1, 0], q(1, 2))).unwrap();
        let x = seg.relative_interior_point().unwrap();
        assert!(x[0] > q(1, 2) && x[0] < q(1, 1));
        assert!(seg.strictly_contains(&x));
    }

    #[test]
    fn segment_value_examples() {
        let x1 = pt(&[(1, 1), (0, 1)]);
        let x2 = pt(&[(0, 1), (1, 1)]);
        let c = pt(&[(1, 1), (0, 1)]);
        let p = point_on_segment_with_value(&x1, &x2, &c, &Rat::zero(), &q(1, 4)).unwrap();
        assert_eq!(p, pt(&[(1, 4), (3, 4)]));
        let flat = pt(&[(1, 1), (1, 1)]);
        let mid = point_on_segment_with_value(&x1, &x2, &flat, &Rat::zero(), &q(1, 1)).unwrap();
        assert_eq!(mid, pt(&[(1, 2), (1, 2)]));
        let end = point_on_segment_with_value(&x1, &x2, &c, &Rat::zero(), &q(1, 1)).unwrap();
        assert_eq!(end, x1);
        assert!(point_on_segment_with_value(&x1, &x2, &c, &Rat::zero(), &q(2, 1)).is_err());
    }

    #[test]
    fn canonicalize_examples() {
        let d3 = Polytope::simplex(3).unwrap();
        let dup = d3.intersect(&Halfspace::nonneg(3, 0)).unwrap();
        assert_eq!(dup.facet_count(), 3);
        let loose = d3.intersect(&hs(&[1, 0, 0], q(-1, 1))).unwrap();
        assert_eq!(loose.facet_count(), 3);
        let nested = d3
            .intersect(&hs(&[1, 0, 0], q(1, 4)))
            .unwrap()
            .intersect(&hs(&[1, 0, 0], q(1, 3)))
            .unwrap();
        let c = nested.canonicalize();
        assert_eq!(c.facet_count(), 4);
        assert_eq!(c.halfspaces(), &[hs(&[1, 0, 0], q(1, 3))]);
        assert!(c.set_eq(&nested));
    }

    #[test]
    fn pivoting_matches_tight_sets_in_five_dimensions() {
        let d5 = Polytope::simplex(5).unwrap();
        let p = d5
            .intersect(&hs(&[1, -1, 0, 0, 0], Rat::zero()))
            .unwrap()
            .intersect(&hs(&[0, 0, 2, 1, -1], q(-1, 3)))
            .unwrap()
            .intersect(&hs(&[-1, 0, 0, 0, 0], q(-1, 2)))
            .unwrap();
        assert_eq!(p.vertices_by_pivoting(), p.vertices_by_tight_sets());
    }

    #[test]
    fn dual_certificate_matches_primal() {
        let d3 = Polytope::simplex(3).unwrap();
        let p = d3.intersect(&hs(&[1, -1, 0], Rat::zero())).unwrap();
        let c = pt(&[(2, 1), (-1, 3), (1, 2)]);
        let (v, _) = p.maximize_linear(&c).unwrap();
        let cert = p.dual_certificate(&c).unwrap();
        assert_eq!(cert.value, v);
        assert!(cert.verify(&p, &c));
    }

    #[test]
    fn json_shape() {
        let p = Polytope::simplex(2).unwrap().intersect(&hs(&[1, 0], q(1, 2))).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"m":2,"halfspaces":[{"coeffs":["1/1","0/1"],"rhs":"1/2"}]}"#);
        let back: Polytope = serde_json::from_str(&s).unwrap();
        assert!(back.set_eq(&p));
    }
}
