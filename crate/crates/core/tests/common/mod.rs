//! Brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use bsg_core::game::ActionProfile;
use bsg_core::rat::dot;
use bsg_core::{BsgInstance, Halfspace, Polytope, Rat};

/// Gaussian elimination; `None` unless the square system has one solution.
pub fn solve(mut a: Vec<Vec<Rat>>, mut b: Vec<Rat>) -> Option<Vec<Rat>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = &a[r][col] / &a[col][col];
                for c in col..n {
                    let d = &f * &a[col][c];
                    a[r][c] = &a[r][c] - &d;
                }
                let d = &f * &b[col];
                b[r] = &b[r] - &d;
            }
        }
    }
    Some((0..n).map(|i| &b[i] / &a[i][i]).collect())
}

pub fn rank(mut a: Vec<Vec<Rat>>) -> usize {
    let cols = a.first().map_or(0, Vec::len);
    let mut r = 0;
    for col in 0..cols {
        let Some(piv) = (r..a.len()).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(r, piv);
        for i in r + 1..a.len() {
            let f = &a[i][col] / &a[r][col];
            for c in col..cols {
                let d = &f * &a[r][c];
                a[i][c] = &a[i][c] - &d;
            }
        }
        r += 1;
    }
    r
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

/// Vertices by trying every choice of `m - 1` tight constraints.
pub fn brute_vertices(p: &Polytope) -> Vec<Vec<Rat>> {
    let m = p.dim();
    let cons = p.constraints();
    let mut out: Vec<Vec<Rat>> = Vec::new();
    for set in subsets(cons.len(), m - 1) {
        let mut a: Vec<Vec<Rat>> = set.iter().map(|&i| cons[i].coeffs.clone()).collect();
        let mut b: Vec<Rat> = set.iter().map(|&i| cons[i].rhs.clone()).collect();
        a.push(vec![Rat::one(); m]);
        b.push(Rat::one());
        if let Some(x) = solve(a, b) {
            if cons.iter().all(|h| dot(&h.coeffs, &x) >= h.rhs) && !out.contains(&x) {
                out.push(x);
            }
        }
    }
    out.sort();
    out
}

/// Facets of the hull of `vs` inside the simplex's affine hull, as
/// homogeneous halfspaces `c·x >= 0`.
pub fn hull_facets(vs: &[Vec<Rat>], m: usize) -> Vec<Halfspace> {
    let mut out: Vec<Halfspace> = Vec::new();
    for set in subsets(vs.len(), m - 1) {
        if out.iter().any(|h| set.iter().all(|&i| dot(&h.coeffs, &vs[i]).is_zero())) {
            continue;
        }
        if rank(set.iter().map(|&i| vs[i].clone()).collect()) < m - 1 {
            continue;
        }
        // c ⊥ chosen vertices; fix one free coordinate to 1 and solve.
        for free in 0..m {
            let mut a: Vec<Vec<Rat>> = set.iter().map(|&i| vs[i].clone()).collect();
            let mut row = vec![Rat::zero(); m];
            row[free] = Rat::one();
            a.push(row);
            let mut b = vec![Rat::zero(); m - 1];
            b.push(Rat::one());
            if let Some(c) = solve(a, b) {
                let vals: Vec<Rat> = vs.iter().map(|v| dot(&c, v)).collect();
                let c = if vals.iter().all(|v| !v.is_negative()) {
                    Some(c)
                } else if vals.iter().all(|v| !v.is_positive()) {
                    Some(c.iter().map(|x| -x).collect())
                } else {
                    None
                };
                if let Some(c) = c {
                    let scale = c.iter().find(|x| !x.is_zero()).unwrap().abs();
                    let c: Vec<Rat> = c.iter().map(|x| x / &scale).collect();
                    if !out.iter().any(|h| h.coeffs == c) {
                        out.push(Halfspace::new(c, Rat::zero()).unwrap());
                    }
                }
                break;
            }
        }
    }
    out
}

pub fn polytope_from_vertices(vs: &[Vec<Rat>], m: usize) -> Polytope {
    Polytope::from_halfspaces(m, hull_facets(vs, m)).unwrap()
}

/// `max_x u^L(x)` by scanning the vertices of every profile region.
pub fn brute_opt(inst: &BsgInstance) -> Rat {
    let mut best: Option<Rat> = None;
    let total = inst.n.pow(inst.k as u32);
    for mut idx in 0..total {
        let mut acts = vec![0; inst.k];
        for a in acts.iter_mut() {
            *a = idx % inst.n;
            idx /= inst.n;
        }
        let profile = ActionProfile::full(&acts);
        let c = inst.profile_objective(&profile);
        for v in brute_vertices(&inst.profile_region(&profile)) {
            let u = dot(&c, &v);
            if best.as_ref().map_or(true, |b| u > *b) {
                best = Some(u);
            }
        }
    }
    best.unwrap()
}

/// Seeded random polytope in `Δ^m` cut by `cuts` halfspaces on the
/// quarter grid, so every entry has at most 6 bits. Each cut keeps the
/// point `anchor`.
pub fn random_polytope(rng: &mut impl rand::Rng, m: usize, cuts: usize) -> Polytope {
    let anchor: Vec<Rat> = {
        let w: Vec<i64> = (0..m).map(|_| rng.gen_range(1..=4)).collect();
        let s: i64 = w.iter().sum();
        w.iter().map(|&x| Rat::frac(x, s)).collect()
    };
    let quarter = Rat::frac(1, 4);
    let mut p = Polytope::simplex(m).unwrap();
    for _ in 0..cuts {
        let c: Vec<Rat> = (0..m).map(|_| Rat::frac(rng.gen_range(-4..=4), 4)).collect();
        let top = Rat::from_bigint((dot(&c, &anchor) * Rat::int(4)).floor()) * &quarter;
        let rhs = top - Rat::frac(rng.gen_range(0..=1), 4);
        if let Ok(h) = Halfspace::new(c, rhs) {
            p = p.intersect(&h).unwrap();
        }
    }
    p
}

pub fn max_bits(p: &Polytope) -> u64 {
    p.halfspaces()
        .iter()
        .flat_map(|h| h.coeffs.iter().chain(std::iter::once(&h.rhs)))
        .map(Rat::bit_complexity)
        .max()
        .unwrap_or(0)
}
