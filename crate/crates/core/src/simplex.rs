//! Exact rational primal simplex with Bland's anti-cycling rule.
//!
//! [`Simplex`] keeps a dense tableau at a primal feasible basis after phase I,
//! so a sequence of objectives over the same feasible region can be optimized
//! one after another, each starting from the previous optimal basis.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::arith::Rational;
use crate::error::{Error, Result};
use crate::qnum::Q;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub sense: Sense,
    pub rhs: Rational,
}

/// `maximize objective . x` subject to the constraints, `0 <= x_i <= upper_i`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LpInstance {
    pub num_vars: usize,
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
    /// Optional finite upper bound per variable; lower bounds are all zero.
    pub upper_bounds: Vec<Option<Rational>>,
}

impl LpInstance {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            objective: vec![Rational::zero(); num_vars],
            constraints: Vec::new(),
            upper_bounds: vec![None; num_vars],
        }
    }

    pub fn add_constraint(&mut self, coeffs: Vec<Rational>, sense: Sense, rhs: Rational) {
        self.constraints.push(Constraint { coeffs, sense, rhs });
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: alloc::string::String| Err(Error::MalformedLp(msg));
        if self.objective.len() != self.num_vars {
            return bad(alloc::format!("objective has {} entries for {} variables", self.objective.len(), self.num_vars));
        }
        if self.upper_bounds.len() != self.num_vars {
            return bad(alloc::format!("{} bounds for {} variables", self.upper_bounds.len(), self.num_vars));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != self.num_vars {
                return bad(alloc::format!("constraint {i} has {} coefficients", c.coeffs.len()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub value: Rational,
    pub x: Vec<Rational>,
}

/// Pivot counters, for reporting.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub pivots: u64,
    pub solves: u64,
}

#[derive(Debug, Clone)]
pub struct Simplex {
    num_structural: usize,
    /// `rows[i]` is row `i` of `B^-1 A`.
    rows: Vec<Vec<Q>>,
    rhs: Vec<Q>,
    basis: Vec<usize>,
    /// Reduced costs `c_j - c_B B^-1 A_j` of the current objective.
    reduced: Vec<Q>,
    objective: Vec<Q>,
    stats: SolveStats,
}

/// Solves one instance from scratch.
pub fn solve_lp(inst: &LpInstance) -> Result<LpSolution> {
    let mut s = Simplex::new(inst)?;
    s.optimize(&inst.objective)
}

impl Simplex {
    /// Builds the tableau and runs phase I. Fails with [`Error::Infeasible`]
    /// when the constraints have no solution.
    pub fn new(inst: &LpInstance) -> Result<Self> {
        inst.validate()?;
        let nv = inst.num_vars;
        let mut rows_in: Vec<(Vec<Q>, Sense, Q)> = inst
            .constraints
            .iter()
            .map(|c| (c.coeffs.iter().map(Q::from_rational).collect(), c.sense, Q::from_rational(&c.rhs)))
            .collect();
        for (j, ub) in inst.upper_bounds.iter().enumerate() {
            if let Some(ub) = ub {
                let mut coeffs = vec![Q::ZERO; nv];
                coeffs[j] = Q::ONE;
                rows_in.push((coeffs, Sense::Le, Q::from_rational(ub)));
            }
        }
        // Normalize so rhs >= 0; a zero-rhs `>=` row becomes a `<=` row so it
        // gets a feasible slack instead of an artificial.
        for (coeffs, sense, rhs) in rows_in.iter_mut() {
            let flip = rhs.is_negative() || (rhs.is_zero() && *sense == Sense::Ge);
            if flip {
                coeffs.iter_mut().for_each(|c| *c = c.neg());
                *rhs = rhs.neg();
                *sense = match *sense {
                    Sense::Le => Sense::Ge,
                    Sense::Ge => Sense::Le,
                    Sense::Eq => Sense::Eq,
                };
            }
        }
        let m = rows_in.len();
        let n_slack = rows_in.iter().filter(|r| r.1 != Sense::Eq).count();
        let n_art = rows_in.iter().filter(|r| r.1 != Sense::Le).count();
        let width = nv + n_slack + n_art;
        let mut rows = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let (mut slack_col, mut art_col) = (nv, nv + n_slack);
        for (coeffs, sense, b) in rows_in {
            let mut row = coeffs;
            row.resize(width, Q::ZERO);
            match sense {
                Sense::Le => {
                    row[slack_col] = Q::ONE;
                    basis.push(slack_col);
                    slack_col += 1;
                }
                Sense::Ge => {
                    row[slack_col] = Q::ONE.neg();
                    slack_col += 1;
                    row[art_col] = Q::ONE;
                    basis.push(art_col);
                    art_col += 1;
                }
                Sense::Eq => {
                    row[art_col] = Q::ONE;
                    basis.push(art_col);
                    art_col += 1;
                }
            }
            rows.push(row);
            rhs.push(b);
        }
        let mut s = Simplex {
            num_structural: nv,
            rows,
            rhs,
            basis,
            reduced: vec![Q::ZERO; width],
            objective: vec![Q::ZERO; width],
            stats: SolveStats::default(),
        };
        if n_art > 0 {
            let first_art = nv + n_slack;
            let mut phase1 = vec![Q::ZERO; width];
            phase1[first_art..].iter_mut().for_each(|c| *c = Q::ONE.neg());
            s.set_full_objective(phase1);
            if s.run().is_err() {
                unreachable!("phase I objective is bounded above by zero");
            }
            if s.objective_value().is_negative() {
                return Err(Error::Infeasible);
            }
            s.drop_artificials(first_art);
        }
        Ok(s)
    }

    pub fn stats(&self) -> SolveStats {
        self.stats
    }

    pub fn num_structural(&self) -> usize {
        self.num_structural
    }

    /// Optimizes a new objective over the structural variables, starting
    /// from the current basis.
    pub fn optimize(&mut self, objective: &[Rational]) -> Result<LpSolution> {
        if objective.len() != self.num_structural {
            return Err(Error::MalformedLp(alloc::format!(
                "objective has {} entries for {} variables",
                objective.len(),
                self.num_structural
            )));
        }
        let width = self.reduced.len();
        let mut full: Vec<Q> = objective.iter().map(Q::from_rational).collect();
        full.resize(width, Q::ZERO);
        self.set_full_objective(full);
        self.run()?;
        self.stats.solves += 1;
        Ok(LpSolution { value: self.objective_value().to_rational(), x: self.primal() })
    }

    fn set_full_objective(&mut self, objective: Vec<Q>) {
        let mut reduced = objective.clone();
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = &objective[b];
            if cb.is_zero() {
                continue;
            }
            for (d, a) in reduced.iter_mut().zip(row) {
                if !a.is_zero() {
                    *d = d.sub_mul(cb, a);
                }
            }
        }
        self.objective = objective;
        self.reduced = reduced;
    }

    fn objective_value(&self) -> Q {
        let mut total = Q::ZERO;
        for (&b, v) in self.basis.iter().zip(&self.rhs) {
            let c = &self.objective[b];
            if !c.is_zero() {
                total = total.add(&c.mul(v));
            }
        }
        total
    }

    fn primal(&self) -> Vec<Rational> {
        let mut x = vec![Rational::zero(); self.num_structural];
        for (&b, v) in self.basis.iter().zip(&self.rhs) {
            if b < self.num_structural {
                x[b] = v.to_rational();
            }
        }
        x
    }

    /// Bland's rule: lowest-index improving column enters, ratio ties leave by
    /// lowest basic index.
    fn run(&mut self) -> Result<()> {
        loop {
            let Some(col) = self.reduced.iter().position(Q::is_positive) else {
                return Ok(());
            };
            let mut leave: Option<(usize, Q)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = &row[col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs[i].div(a);
                let better = match &leave {
                    None => true,
                    Some((j, best)) => ratio < *best || (ratio == *best && self.basis[i] < self.basis[*j]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                None => return Err(Error::Unbounded),
                Some((row, _)) => self.pivot(row, col),
            }
        }
    }

    fn pivot(&mut self, r: usize, col: usize) {
        self.stats.pivots += 1;
        let inv = self.rows[r][col].recip();
        if !inv.is_one() {
            for v in self.rows[r].iter_mut() {
                if !v.is_zero() {
                    *v = v.mul(&inv);
                }
            }
            self.rhs[r] = self.rhs[r].mul(&inv);
        }
        let support: Vec<usize> = self.rows[r].iter().enumerate().filter(|(_, v)| !v.is_zero()).map(|(j, _)| j).collect();
        let pivot_row = core::mem::take(&mut self.rows[r]);
        let pivot_rhs = self.rhs[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone();
            for &j in &support {
                row[j] = row[j].sub_mul(&factor, &pivot_row[j]);
            }
            self.rhs[i] = self.rhs[i].sub_mul(&factor, &pivot_rhs);
        }
        if !self.reduced[col].is_zero() {
            let factor = self.reduced[col].clone();
            for &j in &support {
                self.reduced[j] = self.reduced[j].sub_mul(&factor, &pivot_row[j]);
            }
        }
        self.rows[r] = pivot_row;
        self.basis[r] = col;
    }

    /// Pivots basic artificials (all at level zero after a successful phase I)
    /// out of the basis, deletes redundant rows and drops artificial columns.
    fn drop_artificials(&mut self, first_art: usize) {
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] < first_art {
                i += 1;
                continue;
            }
            match (0..first_art).find(|&j| !self.rows[i][j].is_zero()) {
                Some(j) => {
                    self.pivot(i, j);
                    i += 1;
                }
                None => {
                    self.rows.remove(i);
                    self.rhs.remove(i);
                    self.basis.remove(i);
                }
            }
        }
        for row in self.rows.iter_mut() {
            row.truncate(first_art);
        }
        self.reduced.truncate(first_art);
        self.objective.truncate(first_art);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, rat};

    fn lp(objective: &[i64], rows: &[(&[i64], Sense, i64)]) -> LpInstance {
        let nv = objective.len();
        let mut inst = LpInstance::new(nv);
        inst.objective = objective.iter().map(|&c| int(c)).collect();
        for (coeffs, sense, rhs) in rows {
            inst.add_constraint(coeffs.iter().map(|&c| int(c)).collect(), *sense, int(*rhs));
        }
        inst
    }

    #[test]
    fn single_variable() {
        let inst = lp(&[1], &[(&[1], Sense::Le, 1)]);
        let sol = solve_lp(&inst).unwrap();
        assert_eq!(sol.value, int(1));
        assert_eq!(sol.x, vec![int(1)]);
    }

    #[test]
    fn textbook_instance() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> 36 at (2, 6)
        let inst = lp(&[3, 5], &[(&[1, 0], Sense::Le, 4), (&[0, 2], Sense::Le, 12), (&[3, 2], Sense::Le, 18)]);
        let sol = solve_lp(&inst).unwrap();
        assert_eq!(sol.value, int(36));
        assert_eq!(sol.x, vec![int(2), int(6)]);
    }

    #[test]
    fn equality_and_ge_rows() {
        // max x + y, x + y = 3/2 ... expressed via 2x + 2y = 3, x >= 1/2
        let mut inst = lp(&[1, 1], &[(&[2, 2], Sense::Eq, 3)]);
        inst.add_constraint(vec![int(1), int(0)], Sense::Ge, rat(1, 2));
        let sol = solve_lp(&inst).unwrap();
        assert_eq!(sol.value, rat(3, 2));
        assert!(sol.x[0] >= rat(1, 2));
    }

    #[test]
    fn infeasible_and_unbounded() {
        let inst = lp(&[1], &[(&[1], Sense::Le, 1), (&[1], Sense::Ge, 2)]);
        assert_eq!(solve_lp(&inst), Err(Error::Infeasible));
        let inst = lp(&[1, 0], &[(&[1, -1], Sense::Le, 1)]);
        assert_eq!(solve_lp(&inst), Err(Error::Unbounded));
    }

    #[test]
    fn upper_bounds_and_negative_rhs() {
        let mut inst = lp(&[1, 2], &[(&[-1, -1], Sense::Ge, -5)]);
        inst.upper_bounds = vec![Some(int(4)), Some(int(2))];
        let sol = solve_lp(&inst).unwrap();
        assert_eq!(sol.value, int(7));
    }

    #[test]
    fn degenerate_cycling_instance_terminates() {
        // Beale's example, which cycles under the textbook largest-coefficient rule.
        let mut inst = LpInstance::new(4);
        inst.objective = vec![rat(3, 4), int(-150), rat(1, 50), int(-6)];
        inst.add_constraint(vec![rat(1, 4), int(-60), rat(-1, 25), int(9)], Sense::Le, int(0));
        inst.add_constraint(vec![rat(1, 2), int(-90), rat(-1, 50), int(3)], Sense::Le, int(0));
        inst.add_constraint(vec![int(0), int(0), int(1), int(0)], Sense::Le, int(1));
        let sol = solve_lp(&inst).unwrap();
        assert_eq!(sol.value, rat(1, 20));
    }

    #[test]
    fn redundant_equalities_are_removed() {
        let inst = lp(&[1, 1], &[(&[1, 1], Sense::Eq, 2), (&[2, 2], Sense::Eq, 4), (&[1, 0], Sense::Le, 1)]);
        let sol = solve_lp(&inst).unwrap();
        assert_eq!(sol.value, int(2));
    }

    #[test]
    fn warm_start_reoptimizes() {
        let inst = lp(&[1, 0], &[(&[1, 1], Sense::Le, 4), (&[1, 0], Sense::Le, 3)]);
        let mut s = Simplex::new(&inst).unwrap();
        assert_eq!(s.optimize(&[int(1), int(0)]).unwrap().value, int(3));
        assert_eq!(s.optimize(&[int(0), int(1)]).unwrap().value, int(4));
        assert_eq!(s.optimize(&[int(1), int(1)]).unwrap().value, int(4));
        assert_eq!(s.optimize(&[int(-1), int(-1)]).unwrap().value, int(0));
        assert_eq!(s.stats().solves, 4);
        assert!(s.optimize(&[int(1)]).is_err());
    }

    #[test]
    fn malformed_instance() {
        let mut inst = LpInstance::new(2);
        inst.add_constraint(vec![int(1)], Sense::Le, int(1));
        assert!(matches!(solve_lp(&inst), Err(Error::MalformedLp(_))));
    }
}
