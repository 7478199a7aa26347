//! Dense two-phase simplex with Bland's rule, generic over the scalar field.
//!
//! The same code runs on `f64` (matrix games, where a duality-gap check guards
//! the result) and on exact rationals (pattern feasibility, hulls, occupation
//! polytopes). All variables are nonnegative.

use std::fmt::Debug;

use num_traits::{Num, Signed, Zero};

use crate::exact::{self, Rational};
use crate::{Error, Result};

const MAX_PIVOTS: usize = 200_000;

pub trait Scalar: Clone + Debug + PartialOrd + Num + Signed {
    /// Strictly positive beyond the field's pivot tolerance.
    fn gt_zero(&self) -> bool;
    /// Strictly negative beyond the field's pivot tolerance.
    fn lt_zero(&self) -> bool;
    fn from_rational(r: &Rational) -> Self;
    fn from_f64(v: f64) -> Self;
    fn as_f64(&self) -> f64;

    fn near_zero(&self) -> bool {
        !self.gt_zero() && !self.lt_zero()
    }
}

impl Scalar for f64 {
    fn gt_zero(&self) -> bool {
        *self > 1e-11
    }
    fn lt_zero(&self) -> bool {
        *self < -1e-11
    }
    fn from_rational(r: &Rational) -> Self {
        exact::to_f64(r)
    }
    fn from_f64(v: f64) -> Self {
        v
    }
    fn as_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for Rational {
    fn gt_zero(&self) -> bool {
        self.is_positive()
    }
    fn lt_zero(&self) -> bool {
        self.is_negative()
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn from_f64(v: f64) -> Self {
        Rational::from_float(v).expect("finite float")
    }
    fn as_f64(&self) -> f64 {
        exact::to_f64(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Constraint<T> {
    pub coeffs: Vec<T>,
    pub relation: Relation,
    pub rhs: T,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpSolution<T> {
    Optimal { x: Vec<T>, value: T },
    Infeasible,
    Unbounded,
}

impl<T> LpSolution<T> {
    pub fn optimal(self) -> Option<(Vec<T>, T)> {
        match self {
            LpSolution::Optimal { x, value } => Some((x, value)),
            _ => None,
        }
    }
}

/// `maximize objective·x  s.t.  constraints, x >= 0`.
#[derive(Clone, Debug)]
pub struct LinearProgram<T> {
    n_vars: usize,
    objective: Vec<T>,
    constraints: Vec<Constraint<T>>,
}

impl<T: Scalar> LinearProgram<T> {
    pub fn new(n_vars: usize) -> Self {
        LinearProgram {
            n_vars,
            objective: vec![T::zero(); n_vars],
            constraints: Vec::new(),
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn maximize(&mut self, objective: Vec<T>) -> &mut Self {
        assert_eq!(objective.len(), self.n_vars);
        self.objective = objective;
        self
    }

    pub fn add(&mut self, coeffs: Vec<T>, relation: Relation, rhs: T) -> &mut Self {
        assert_eq!(coeffs.len(), self.n_vars);
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
        self
    }

    pub fn solve(&self) -> Result<LpSolution<T>> {
        Tableau::build(self).run(&self.objective)
    }
}

struct Tableau<T> {
    rows: Vec<Vec<T>>,
    rhs: Vec<T>,
    basis: Vec<usize>,
    n_vars: usize,
    n_cols: usize,
    first_artificial: usize,
}

impl<T: Scalar> Tableau<T> {
    fn build(lp: &LinearProgram<T>) -> Self {
        let m = lp.constraints.len();
        // Normalise to nonnegative right-hand sides.
        let normalised: Vec<(Vec<T>, Relation, T)> = lp
            .constraints
            .iter()
            .map(|c| {
                if c.rhs.is_negative() {
                    let rel = match c.relation {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (
                        c.coeffs.iter().map(|a| -a.clone()).collect(),
                        rel,
                        -c.rhs.clone(),
                    )
                } else {
                    (c.coeffs.clone(), c.relation, c.rhs.clone())
                }
            })
            .collect();
        let n_slack = normalised
            .iter()
            .filter(|(_, r, _)| *r != Relation::Eq)
            .count();
        let n_art = normalised
            .iter()
            .filter(|(_, r, _)| *r != Relation::Le)
            .count();
        let n_vars = lp.n_vars;
        let first_artificial = n_vars + n_slack;
        let n_cols = first_artificial + n_art;
        let mut rows = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let (mut slack, mut art) = (n_vars, first_artificial);
        for (coeffs, rel, b) in normalised {
            let mut row = coeffs;
            row.resize(n_cols, T::zero());
            match rel {
                Relation::Le => {
                    row[slack] = T::one();
                    basis.push(slack);
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = -T::one();
                    slack += 1;
                    row[art] = T::one();
                    basis.push(art);
                    art += 1;
                }
                Relation::Eq => {
                    row[art] = T::one();
                    basis.push(art);
                    art += 1;
                }
            }
            rows.push(row);
            rhs.push(b);
        }
        Tableau {
            rows,
            rhs,
            basis,
            n_vars,
            n_cols,
            first_artificial,
        }
    }

    fn run(mut self, objective: &[T]) -> Result<LpSolution<T>> {
        if self.first_artificial < self.n_cols {
            let mut phase1 = vec![T::zero(); self.n_cols];
            for c in phase1.iter_mut().skip(self.first_artificial) {
                *c = -T::one();
            }
            match self.optimise(&phase1, self.n_cols)? {
                Some(()) => {}
                None => return Err(Error::SolverFailure("phase one unbounded".into())),
            }
            let infeasibility: T = self
                .basis
                .iter()
                .zip(&self.rhs)
                .filter(|(b, _)| **b >= self.first_artificial)
                .fold(T::zero(), |acc, (_, v)| acc + v.clone());
            if infeasibility.gt_zero() {
                return Ok(LpSolution::Infeasible);
            }
            self.drive_out_artificials();
        }
        let mut costs = objective.to_vec();
        costs.resize(self.n_cols, T::zero());
        match self.optimise(&costs, self.first_artificial)? {
            Some(()) => {}
            None => return Ok(LpSolution::Unbounded),
        }
        let mut x = vec![T::zero(); self.n_vars];
        for (row, &b) in self.basis.iter().enumerate() {
            if b < self.n_vars {
                x[b] = self.rhs[row].clone();
            }
        }
        let value = x
            .iter()
            .zip(objective)
            .fold(T::zero(), |acc, (xi, ci)| acc + xi.clone() * ci.clone());
        Ok(LpSolution::Optimal { x, value })
    }

    /// Maximises `costs` over columns `< allowed`. `None` means unbounded.
    fn optimise(&mut self, costs: &[T], allowed: usize) -> Result<Option<()>> {
        for _ in 0..MAX_PIVOTS {
            let entering = (0..allowed).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                self.reduced_cost(costs, j).gt_zero()
            });
            let Some(col) = entering else {
                return Ok(Some(()));
            };
            let mut leaving: Option<(usize, T)> = None;
            for (r, row) in self.rows.iter().enumerate() {
                if !row[col].gt_zero() {
                    continue;
                }
                let ratio = self.rhs[r].clone() / row[col].clone();
                leaving = match leaving {
                    None => Some((r, ratio)),
                    Some((best, best_ratio)) => {
                        let diff = ratio.clone() - best_ratio.clone();
                        if diff.lt_zero() || (diff.near_zero() && self.basis[r] < self.basis[best])
                        {
                            Some((r, ratio))
                        } else {
                            Some((best, best_ratio))
                        }
                    }
                };
            }
            let Some((row, _)) = leaving else {
                return Ok(None);
            };
            self.pivot(row, col);
        }
        Err(Error::SolverFailure(format!(
            "simplex did not terminate within {MAX_PIVOTS} pivots"
        )))
    }

    fn reduced_cost(&self, costs: &[T], col: usize) -> T {
        let mut z = T::zero();
        for (r, &b) in self.basis.iter().enumerate() {
            let a = &self.rows[r][col];
            if !a.is_zero() && !costs[b].is_zero() {
                z = z + costs[b].clone() * a.clone();
            }
        }
        costs[col].clone() - z
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.rows[row][col].clone();
        for v in self.rows[row].iter_mut() {
            if !v.is_zero() {
                *v = v.clone() / p.clone();
            }
        }
        self.rhs[row] = self.rhs[row].clone() / p;
        let pivot_row = self.rows[row].clone();
        let pivot_rhs = self.rhs[row].clone();
        for r in 0..self.rows.len() {
            if r == row {
                continue;
            }
            let f = self.rows[r][col].clone();
            if f.is_zero() {
                continue;
            }
            for (v, pv) in self.rows[r].iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v = v.clone() - f.clone() * pv.clone();
                }
            }
            self.rows[r][col] = T::zero();
            self.rhs[r] = self.rhs[r].clone() - f * pivot_rhs.clone();
        }
        self.basis[row] = col;
    }

    fn drive_out_artificials(&mut self) {
        let mut r = 0;
        while r < self.rows.len() {
            if self.basis[r] >= self.first_artificial {
                let col = (0..self.first_artificial)
                    .find(|&j| !self.basis.contains(&j) && !self.rows[r][j].near_zero());
                match col {
                    Some(j) => {
                        self.pivot(r, j);
                        r += 1;
                    }
                    None => {
                        // Redundant equality row.
                        self.rows.remove(r);
                        self.rhs.remove(r);
                        self.basis.remove(r);
                    }
                }
            } else {
                r += 1;
            }
        }
    }
}

/// Comparison used by constraints that may be strict.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cmp {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl Cmp {
    pub fn is_strict(self) -> bool {
        matches!(self, Cmp::Lt | Cmp::Gt)
    }

    pub fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Cmp::Lt => lhs < rhs,
            Cmp::Le => lhs <= rhs,
            Cmp::Eq => lhs == rhs,
            Cmp::Ge => lhs >= rhs,
            Cmp::Gt => lhs > rhs,
        }
    }
}

/// Linear constraint `coeffs·x  cmp  rhs` over exact rationals.
#[derive(Clone, Debug)]
pub struct StrictConstraint {
    pub coeffs: Vec<Rational>,
    pub cmp: Cmp,
    pub rhs: Rational,
}

impl StrictConstraint {
    pub fn new(coeffs: Vec<Rational>, cmp: Cmp, rhs: Rational) -> Self {
        StrictConstraint { coeffs, cmp, rhs }
    }

    pub fn holds(&self, x: &[Rational]) -> bool {
        let lhs = self
            .coeffs
            .iter()
            .zip(x)
            .fold(Rational::zero(), |acc, (a, v)| acc + a * v);
        self.cmp.holds(&lhs, &self.rhs)
    }
}

/// Region `{x >= 0 : constraints}` where strict comparisons are honoured
/// through a common slack variable.
#[derive(Clone, Debug)]
pub struct Region {
    pub n_vars: usize,
    pub constraints: Vec<StrictConstraint>,
}

impl Region {
    pub fn new(n_vars: usize) -> Self {
        Region {
            n_vars,
            constraints: Vec::new(),
        }
    }

    pub fn push(&mut self, coeffs: Vec<Rational>, cmp: Cmp, rhs: Rational) {
        assert_eq!(coeffs.len(), self.n_vars);
        self.constraints.push(StrictConstraint::new(coeffs, cmp, rhs));
    }

    pub fn has_strict(&self) -> bool {
        self.constraints.iter().any(|c| c.cmp.is_strict())
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        x.iter().all(|v| !v.is_negative()) && self.constraints.iter().all(|c| c.holds(x))
    }

    /// Inside the region with every inequality row away from its boundary.
    pub fn contains_robustly(&self, x: &[Rational]) -> bool {
        self.contains(x)
            && self.constraints.iter().all(|c| {
                c.cmp == Cmp::Eq
                    || c.coeffs.iter().zip(x).fold(Rational::zero(), |acc, (a, v)| acc + a * v) != c.rhs
            })
    }

    /// LP over `(x, s)` with strict rows relaxed by slack `s`, `min_slack <= s <= 1`.
    fn slack_program(&self, min_slack: Option<&Rational>) -> LinearProgram<Rational> {
        let n = self.n_vars;
        let mut lp = LinearProgram::new(n + 1);
        for c in &self.constraints {
            let mut coeffs = c.coeffs.clone();
            let (rel, s) = match c.cmp {
                Cmp::Lt => (Relation::Le, Rational::from_integer(1.into())),
                Cmp::Le => (Relation::Le, Rational::zero()),
                Cmp::Eq => (Relation::Eq, Rational::zero()),
                Cmp::Ge => (Relation::Ge, Rational::zero()),
                Cmp::Gt => (Relation::Ge, Rational::from_integer((-1).into())),
            };
            coeffs.push(s);
            lp.add(coeffs, rel, c.rhs.clone());
        }
        let mut cap = vec![Rational::zero(); n + 1];
        cap[n] = Rational::from_integer(1.into());
        lp.add(cap.clone(), Relation::Le, Rational::from_integer(1.into()));
        if let Some(m) = min_slack {
            lp.add(cap, Relation::Ge, m.clone());
        }
        lp
    }

    /// Point maximising the common slack of strict rows, with that slack.
    /// `None` when the region is empty.
    pub fn interior_point(&self) -> Result<Option<(Vec<Rational>, Rational)>> {
        let mut lp = self.slack_program(None);
        let mut obj = vec![Rational::zero(); self.n_vars + 1];
        obj[self.n_vars] = Rational::from_integer(1.into());
        lp.maximize(obj);
        match lp.solve()? {
            LpSolution::Optimal { mut x, .. } => {
                let s = x.pop().unwrap();
                if self.has_strict() && !s.is_positive() {
                    return Ok(None);
                }
                Ok(Some((x, s)))
            }
            LpSolution::Infeasible => Ok(None),
            LpSolution::Unbounded => Err(Error::SolverFailure("slack LP unbounded".into())),
        }
    }

    pub fn is_nonempty(&self) -> Result<bool> {
        Ok(self.interior_point()?.is_some())
    }

    /// Maximises `objective·x` over the region, keeping strict rows at least
    /// `min_slack` away from their boundary (closure when `min_slack` is zero).
    pub fn maximize(
        &self,
        objective: &[Rational],
        min_slack: &Rational,
    ) -> Result<Option<(Vec<Rational>, Rational)>> {
        let mut lp = self.slack_program(Some(min_slack));
        let mut obj = objective.to_vec();
        obj.push(Rational::zero());
        lp.maximize(obj);
        match lp.solve()? {
            LpSolution::Optimal { mut x, value } => {
                x.pop();
                Ok(Some((x, value)))
            }
            LpSolution::Infeasible => Ok(None),
            LpSolution::Unbounded => Err(Error::SolverFailure("region LP unbounded".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rat};

    #[test]
    fn solves_textbook_program() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18  ->  36 at (2, 6)
        let mut lp = LinearProgram::<f64>::new(2);
        lp.maximize(vec![3.0, 5.0])
            .add(vec![1.0, 0.0], Relation::Le, 4.0)
            .add(vec![0.0, 2.0], Relation::Le, 12.0)
            .add(vec![3.0, 2.0], Relation::Le, 18.0);
        let (x, v) = lp.solve().unwrap().optimal().unwrap();
        assert!((v - 36.0).abs() < 1e-9);
        assert!((x[0] - 2.0).abs() < 1e-9 && (x[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn exact_program_with_equalities_and_ge() {
        // max x + y, x + y = 1, x >= 1/3, y >= 1/4
        let mut lp = LinearProgram::<Rational>::new(2);
        lp.maximize(vec![int(1), int(0)])
            .add(vec![int(1), int(1)], Relation::Eq, int(1))
            .add(vec![int(1), int(0)], Relation::Ge, rat(1, 3))
            .add(vec![int(0), int(1)], Relation::Ge, rat(1, 4));
        let (x, v) = lp.solve().unwrap().optimal().unwrap();
        assert_eq!(v, rat(3, 4));
        assert_eq!(x, vec![rat(3, 4), rat(1, 4)]);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut lp = LinearProgram::<Rational>::new(1);
        lp.add(vec![int(1)], Relation::Ge, int(2))
            .add(vec![int(1)], Relation::Le, int(1));
        assert_eq!(lp.solve().unwrap(), LpSolution::Infeasible);

        let mut lp = LinearProgram::<Rational>::new(1);
        lp.maximize(vec![int(1)]);
        assert_eq!(lp.solve().unwrap(), LpSolution::Unbounded);
    }

    #[test]
    fn redundant_equalities_are_dropped() {
        let mut lp = LinearProgram::<Rational>::new(2);
        lp.maximize(vec![int(1), int(2)])
            .add(vec![int(1), int(1)], Relation::Eq, int(1))
            .add(vec![int(2), int(2)], Relation::Eq, int(2));
        let (_, v) = lp.solve().unwrap().optimal().unwrap();
        assert_eq!(v, int(2));
    }

    #[test]
    fn strict_region_feasibility() {
        // x + y = 1, x > 1/2, y > 1/2 is empty; x > 1/2 alone is not.
        let mut region = Region::new(2);
        region.push(vec![int(1), int(1)], Cmp::Eq, int(1));
        region.push(vec![int(1), int(0)], Cmp::Gt, rat(1, 2));
        assert!(region.is_nonempty().unwrap());
        let (p, s) = region.interior_point().unwrap().unwrap();
        assert!(s > int(0));
        assert!(region.contains(&p));
        region.push(vec![int(0), int(1)], Cmp::Gt, rat(1, 2));
        assert!(!region.is_nonempty().unwrap());

        // Boundary-only region: x = 1/2 and x > 1/2.
        let mut region = Region::new(1);
        region.push(vec![int(1)], Cmp::Le, rat(1, 2));
        region.push(vec![int(1)], Cmp::Gt, rat(1, 2));
        assert!(!region.is_nonempty().unwrap());
    }
}
