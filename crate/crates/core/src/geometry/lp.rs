//! Dense two-phase simplex over exact rationals.
//!
//! Problems are accepted in the form
//! `maximize c·y  s.t.  G y >= g,  E y = e,  y >= 0`
//! and converted to equality form with one surplus column per inequality.
//! Bland's rule is used throughout, so every solve terminates and is
//! deterministic.

use crate::rat::Rat;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { value: Rat, solution: Vec<Rat> },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn optimal(self) -> Option<(Rat, Vec<Rat>)> {
        match self {
            LpOutcome::Optimal { value, solution } => Some((value, solution)),
            _ => None,
        }
    }
}

/// A linear program over nonnegative variables.
#[derive(Debug, Clone, Default)]
pub struct Lp {
    pub num_vars: usize,
    pub ge_rows: Vec<(Vec<Rat>, Rat)>,
    pub eq_rows: Vec<(Vec<Rat>, Rat)>,
    pub objective: Vec<Rat>,
}

impl Lp {
    pub fn new(num_vars: usize) -> Self {
        Lp {
            num_vars,
            objective: vec![Rat::zero(); num_vars],
            ..Default::default()
        }
    }

    pub fn ge(&mut self, coeffs: Vec<Rat>, rhs: Rat) -> &mut Self {
        debug_assert_eq!(coeffs.len(), self.num_vars);
        self.ge_rows.push((coeffs, rhs));
        self
    }

    pub fn eq(&mut self, coeffs: Vec<Rat>, rhs: Rat) -> &mut Self {
        debug_assert_eq!(coeffs.len(), self.num_vars);
        self.eq_rows.push((coeffs, rhs));
        self
    }

    pub fn maximize(&mut self, objective: Vec<Rat>) -> &mut Self {
        debug_assert_eq!(objective.len(), self.num_vars);
        self.objective = objective;
        self
    }

    pub fn solve(&self) -> LpOutcome {
        let n = self.num_vars;
        let n_surplus = self.ge_rows.len();
        let cols = n + n_surplus;
        let mut rows: Vec<Vec<Rat>> = Vec::with_capacity(self.ge_rows.len() + self.eq_rows.len());
        let mut rhs: Vec<Rat> = Vec::with_capacity(rows.capacity());
        for (k, (coeffs, b)) in self.ge_rows.iter().enumerate() {
            let mut row = Vec::with_capacity(cols);
            row.extend(coeffs.iter().cloned());
            row.extend((0..n_surplus).map(|j| if j == k { Rat::int(-1) } else { Rat::zero() }));
            rows.push(row);
            rhs.push(b.clone());
        }
        for (coeffs, b) in &self.eq_rows {
            let mut row = Vec::with_capacity(cols);
            row.extend(coeffs.iter().cloned());
            row.extend((0..n_surplus).map(|_| Rat::zero()));
            rows.push(row);
            rhs.push(b.clone());
        }
        let mut cost = self.objective.clone();
        cost.extend((0..n_surplus).map(|_| Rat::zero()));
        match Tableau::two_phase(rows, rhs, &cost) {
            LpOutcome::Optimal { value, mut solution } => {
                solution.truncate(n);
                LpOutcome::Optimal { value, solution }
            }
            other => other,
        }
    }
}

struct Tableau {
    // rows[i] has `cols` coefficients followed by the right-hand side.
    rows: Vec<Vec<Rat>>,
    basis: Vec<usize>,
    // Reduced costs (c_B B^-1 A_j - c_j) followed by the objective value.
    obj: Vec<Rat>,
    cols: usize,
}

impl Tableau {
    fn two_phase(mut a: Vec<Vec<Rat>>, mut b: Vec<Rat>, cost: &[Rat]) -> LpOutcome {
        let m = a.len();
        let n = cost.len();
        for i in 0..m {
            if b[i].is_negative() {
                for v in a[i].iter_mut() {
                    *v = -std::mem::take(v);
                }
                b[i] = -std::mem::take(&mut b[i]);
            }
        }
        // Phase 1: one artificial per row.
        let cols = n + m;
        let mut rows = Vec::with_capacity(m);
        for i in 0..m {
            let mut row = std::mem::take(&mut a[i]);
            row.extend((0..m).map(|j| if j == i { Rat::one() } else { Rat::zero() }));
            row.push(b[i].clone());
            rows.push(row);
        }
        let mut obj = vec![Rat::zero(); cols + 1];
        for row in &rows {
            for j in 0..n {
                obj[j] -= &row[j];
            }
            obj[cols] -= &row[cols];
        }
        let mut t = Tableau {
            rows,
            basis: (n..n + m).collect(),
            obj,
            cols,
        };
        if !t.run() {
            unreachable!("phase one is bounded");
        }
        if t.obj[cols].is_negative() {
            return LpOutcome::Infeasible;
        }
        // Drive artificials out of the basis or drop redundant rows.
        let mut i = 0;
        while i < t.rows.len() {
            if t.basis[i] >= n {
                match (0..n).find(|&j| !t.rows[i][j].is_zero()) {
                    Some(j) => {
                        t.pivot(i, j);
                        i += 1;
                    }
                    None => {
                        t.rows.remove(i);
                        t.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
        // Phase 2 on the original columns.
        for row in t.rows.iter_mut() {
            let last = row[cols].clone();
            row.truncate(n);
            row.push(last);
        }
        t.cols = n;
        let mut obj = vec![Rat::zero(); n + 1];
        for j in 0..n {
            obj[j] = -cost[j].clone();
        }
        for (i, row) in t.rows.iter().enumerate() {
            let cb = &cost[t.basis[i]];
            if cb.is_zero() {
                continue;
            }
            for j in 0..=n {
                if !row[j].is_zero() {
                    obj[j] += cb * &row[j];
                }
            }
        }
        t.obj = obj;
        if !t.run() {
            return LpOutcome::Unbounded;
        }
        let mut solution = vec![Rat::zero(); n];
        for (i, &bv) in t.basis.iter().enumerate() {
            solution[bv] = t.rows[i][n].clone();
        }
        LpOutcome::Optimal {
            value: t.obj[n].clone(),
            solution,
        }
    }

    /// Pivots to optimality. Returns false when the problem is unbounded.
    fn run(&mut self) -> bool {
        let cols = self.cols;
        loop {
            let Some(enter) = (0..cols).find(|&j| self.obj[j].is_negative()) else {
                return true;
            };
            let mut best: Option<(usize, Rat)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[enter].is_positive() {
                    continue;
                }
                let ratio = &row[cols] / &row[enter];
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            let Some((leave, _)) = best else {
                return false;
            };
            self.pivot(leave, enter);
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let width = self.cols + 1;
        let p = self.rows[r][c].clone();
        if p != Rat::one() {
            let inv = p.recip();
            for v in self.rows[r].iter_mut() {
                if !v.is_zero() {
                    *v *= &inv;
                }
            }
        }
        let prow = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for j in 0..width {
                if !prow[j].is_zero() {
                    row[j] -= &(&f * &prow[j]);
                }
            }
        }
        if !self.obj[c].is_zero() {
            let f = self.obj[c].clone();
            for j in 0..width {
                if !prow[j].is_zero() {
                    self.obj[j] -= &(&f * &prow[j]);
                }
            }
        }
        self.basis[r] = c;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rat {
        Rat::int(n)
    }

    #[test]
    fn textbook_maximum() {
        // max 3x + 5y  s.t. x <= 4, 2y <= 12, 3x + 2y <= 18
        let mut lp = Lp::new(2);
        lp.ge(vec![r(-1), r(0)], r(-4))
            .ge(vec![r(0), r(-2)], r(-12))
            .ge(vec![r(-3), r(-2)], r(-18))
            .maximize(vec![r(3), r(5)]);
        let (v, x) = lp.solve().optimal().unwrap();
        assert_eq!(v, r(36));
        assert_eq!(x, vec![r(2), r(6)]);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut lp = Lp::new(1);
        lp.ge(vec![r(1)], r(2)).ge(vec![r(-1)], r(-1));
        assert_eq!(lp.solve(), LpOutcome::Infeasible);
        let mut lp = Lp::new(1);
        lp.ge(vec![r(1)], r(2)).maximize(vec![r(1)]);
        assert_eq!(lp.solve(), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_equalities_are_dropped() {
        let mut lp = Lp::new(2);
        lp.eq(vec![r(1), r(1)], r(1))
            .eq(vec![r(2), r(2)], r(2))
            .maximize(vec![r(1), r(0)]);
        let (v, x) = lp.solve().optimal().unwrap();
        assert_eq!(v, r(1));
        assert_eq!(x, vec![r(1), r(0)]);
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's example, which cycles under the textbook largest-coefficient rule.
        let f = Rat::frac;
        let mut lp = Lp::new(4);
        lp.ge(vec![f(-1, 4), r(8), r(1), r(-9)], r(0))
            .ge(vec![f(-1, 2), r(12), f(1, 2), r(-3)], r(0))
            .ge(vec![r(0), r(0), r(-1), r(0)], r(-1))
            .maximize(vec![f(3, 4), r(-20), f(1, 2), r(-6)]);
        let (v, _) = lp.solve().optimal().unwrap();
        assert_eq!(v, f(5, 4));
    }
}
