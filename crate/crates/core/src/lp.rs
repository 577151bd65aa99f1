//! Exact-rational linear programming.
//!
//! Two-phase primal simplex with Bland's rule on a dense tableau. All pivots
//! are exact, so termination is guaranteed and optimality is a theorem about
//! the returned basis, not a tolerance. Problems arrive as an `HPolyhedron`
//! plus an objective; conversion to computational standard form shifts
//! variables with a finite bound (mirroring ones bounded only above) and
//! splits doubly-free variables, so whenever no variable is split the
//! returned optimum sits at a vertex of the feasible region.

use crate::linalg::{dot, RatVec};
use crate::polyhedron::HPolyhedron;
use crate::rat::Rat;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Outcome of one solve. `witness` is the optimal point for `Optimal` and a
/// Farkas certificate over the standard-form rows for `Infeasible` (see
/// `verify_certificates`); it is absent for `Unbounded`.
#[derive(Debug, Clone)]
pub struct LpResult {
    pub status: LpStatus,
    pub optimum: Option<Rat>,
    pub witness: Option<RatVec>,
}

/// `LpResult` plus the row duals of the final basis, for certificate checks.
#[derive(Debug, Clone)]
pub struct LpDetail {
    pub result: LpResult,
    pub duals: Option<RatVec>,
}

pub fn lp_solve(p: &HPolyhedron, objective: &[Rat], sense: Sense) -> LpResult {
    lp_solve_detailed(p, objective, sense).result
}

/// Feasibility probe: a point of `P`, or `None` when empty.
pub fn feasible_point(p: &HPolyhedron) -> Option<RatVec> {
    let obj = vec![Rat::zero(); p.dim_ambient()];
    let res = lp_solve(p, &obj, Sense::Min);
    match res.status {
        LpStatus::Optimal => res.witness,
        _ => None,
    }
}

pub fn lp_solve_detailed(p: &HPolyhedron, objective: &[Rat], sense: Sense) -> LpDetail {
    assert_eq!(objective.len(), p.dim_ambient());
    let sf = StdForm::build(p, objective, sense);
    let mut t = Tableau::new(&sf);
    match t.phase_one() {
        PhaseOne::Infeasible { farkas } => LpDetail {
            result: LpResult {
                status: LpStatus::Infeasible,
                optimum: None,
                witness: Some(farkas),
            },
            duals: None,
        },
        PhaseOne::Feasible => match t.phase_two(&sf.cost) {
            PhaseTwo::Unbounded => LpDetail {
                result: LpResult {
                    status: LpStatus::Unbounded,
                    optimum: None,
                    witness: None,
                },
                duals: None,
            },
            PhaseTwo::Optimal => {
                let x = sf.recover(&t.primal_solution(sf.ncols));
                let value = dot(objective, &x);
                LpDetail {
                    result: LpResult {
                        status: LpStatus::Optimal,
                        optimum: Some(value),
                        witness: Some(x),
                    },
                    duals: Some(t.row_duals(&sf.cost)),
                }
            }
        },
    }
}

/// Re-derives the standard form and validates the certificates in `detail`:
/// strong duality and dual feasibility at an optimum, or the Farkas property
/// (`y b > 0`, `y A <= 0` on every real column) for infeasibility. This is a
/// check of the final basis by substitution, independent of the pivot path.
pub fn verify_certificates(
    p: &HPolyhedron,
    objective: &[Rat],
    sense: Sense,
    detail: &LpDetail,
) -> bool {
    let sf = StdForm::build(p, objective, sense);
    match detail.result.status {
        LpStatus::Unbounded => true,
        LpStatus::Infeasible => {
            let Some(y) = &detail.result.witness else {
                return false;
            };
            if y.len() != sf.rows.len() {
                return false;
            }
            let yb: Rat = y.iter().zip(&sf.b).map(|(a, b)| a * b).sum();
            if !yb.is_positive() {
                return false;
            }
            (0..sf.ncols).all(|j| {
                let ya: Rat = y.iter().zip(&sf.rows).map(|(yi, row)| yi * &row[j]).sum();
                !ya.is_positive()
            })
        }
        LpStatus::Optimal => {
            let (Some(x), Some(y)) = (&detail.result.witness, &detail.duals) else {
                return false;
            };
            if p.first_violation(x).is_some() {
                return false;
            }
            // Dual feasibility: c_j - y . A_j >= 0 for every real column.
            let dual_ok = (0..sf.ncols).all(|j| {
                let ya: Rat = y.iter().zip(&sf.rows).map(|(yi, row)| yi * &row[j]).sum();
                !(&sf.cost[j] - &ya).is_negative()
            });
            // Strong duality: y . b equals the min-form objective value.
            let yb: Rat = y.iter().zip(&sf.b).map(|(a, b)| a * b).sum();
            let sign = match sense {
                Sense::Min => Rat::one(),
                Sense::Max => -Rat::one(),
            };
            let min_value = sign * dot(objective, x) - &sf.const_term;
            dual_ok && yb == min_value
        }
    }
}

/// Validates a Farkas certificate against the standard form of `p` (zero
/// objective), without reference to how it was produced.
pub fn farkas_certifies(p: &HPolyhedron, y: &[Rat]) -> bool {
    let obj = vec![Rat::zero(); p.dim_ambient()];
    let detail = LpDetail {
        result: LpResult {
            status: LpStatus::Infeasible,
            optimum: None,
            witness: Some(y.to_vec()),
        },
        duals: None,
    };
    verify_certificates(p, &obj, Sense::Min, &detail)
}

#[derive(Clone)]
enum VarMap {
    /// x = base + sign * z_col, sign in {+1, -1}.
    Shifted { col: usize, base: Rat, sign: i8 },
    /// x = z_pos - z_neg.
    Split { pos: usize, neg: usize },
}

/// `min cost . z  s.t.  rows z = b, z >= 0, b >= 0`, plus the recipe for
/// mapping solutions back to the original variables.
struct StdForm {
    rows: Vec<RatVec>,
    b: Vec<Rat>,
    cost: RatVec,
    ncols: usize,
    var_map: Vec<VarMap>,
    /// Constant folded out of the objective by the variable shifts.
    const_term: Rat,
    /// Per row: column index of a +1 slack usable as the initial basis, if any.
    slack_basis: Vec<Option<usize>>,
}

impl StdForm {
    fn build(p: &HPolyhedron, objective: &[Rat], sense: Sense) -> StdForm {
        let n = p.dim_ambient();
        let sign = match sense {
            Sense::Min => Rat::one(),
            Sense::Max => -Rat::one(),
        };
        let mut var_map = Vec::with_capacity(n);
        let mut ncols = 0usize;
        // (col, coefficient contribution per original var) resolved on the fly.
        for i in 0..n {
            match (p.lower(i), p.upper(i)) {
                (Some(l), _) => {
                    var_map.push(VarMap::Shifted {
                        col: ncols,
                        base: Rat::from(l),
                        sign: 1,
                    });
                    ncols += 1;
                }
                (None, Some(u)) => {
                    var_map.push(VarMap::Shifted {
                        col: ncols,
                        base: Rat::from(u),
                        sign: -1,
                    });
                    ncols += 1;
                }
                (None, None) => {
                    var_map.push(VarMap::Split {
                        pos: ncols,
                        neg: ncols + 1,
                    });
                    ncols += 2;
                }
            }
        }
        let n_struct = ncols;

        // Rows: the polyhedron's own rows, then upper-bound rows for doubly
        // bounded variables, in coordinate order.
        struct RawRow {
            coef: RatVec,
            rhs: Rat,
            is_eq: bool,
        }
        let transform_row = |coef_int: &dyn Fn(usize) -> Rat, rhs0: Rat| -> (RatVec, Rat) {
            let mut coef = vec![Rat::zero(); n_struct];
            let mut rhs = rhs0;
            for (i, vm) in var_map.iter().enumerate() {
                let a = coef_int(i);
                if a.is_zero() {
                    continue;
                }
                match vm {
                    VarMap::Shifted { col, base, sign } => {
                        rhs -= &(&a * base);
                        coef[*col] = if *sign > 0 { a } else { -a };
                    }
                    VarMap::Split { pos, neg } => {
                        coef[*pos] = a.clone();
                        coef[*neg] = -a;
                    }
                }
            }
            (coef, rhs)
        };

        let mut raw: Vec<RawRow> = Vec::new();
        for r in 0..p.num_rows() {
            let (row, bi) = p.row(r);
            let (coef, rhs) = transform_row(&|i| Rat::from(&row[i]), Rat::from(bi));
            raw.push(RawRow {
                coef,
                rhs,
                is_eq: p.is_eq_row(r),
            });
        }
        for (i, vm) in var_map.iter().enumerate() {
            if let (Some(l), Some(u)) = (p.lower(i), p.upper(i)) {
                if let VarMap::Shifted { col, .. } = vm {
                    let mut coef = vec![Rat::zero(); n_struct];
                    coef[*col] = Rat::one();
                    raw.push(RawRow {
                        coef,
                        rhs: Rat::from(u) - Rat::from(l),
                        is_eq: false,
                    });
                }
            }
        }

        // Slacks for inequality rows, then rhs normalization.
        let n_ineq = raw.iter().filter(|r| !r.is_eq).count();
        ncols = n_struct + n_ineq;
        let mut rows = Vec::with_capacity(raw.len());
        let mut b = Vec::with_capacity(raw.len());
        let mut slack_basis = Vec::with_capacity(raw.len());
        let mut next_slack = n_struct;
        for r in raw {
            let mut coef = r.coef;
            coef.resize(ncols, Rat::zero());
            let mut slack_col = None;
            if !r.is_eq {
                coef[next_slack] = Rat::one();
                slack_col = Some(next_slack);
                next_slack += 1;
            }
            let mut rhs = r.rhs;
            if rhs.is_negative() {
                for c in coef.iter_mut() {
                    *c = -c.clone();
                }
                rhs = -rhs;
                slack_col = None; // slack coefficient is now -1
            }
            rows.push(coef);
            b.push(rhs);
            slack_basis.push(slack_col);
        }

        let mut cost = vec![Rat::zero(); ncols];
        let mut const_term = Rat::zero();
        for i in 0..n {
            let c = &sign * &objective[i];
            if c.is_zero() {
                continue;
            }
            match &var_map[i] {
                VarMap::Shifted { col, base, sign: s } => {
                    const_term += &(&c * base);
                    cost[*col] = if *s > 0 { c } else { -c };
                }
                VarMap::Split { pos, neg } => {
                    cost[*pos] = c.clone();
                    cost[*neg] = -c;
                }
            }
        }

        StdForm {
            rows,
            b,
            cost,
            ncols,
            var_map,
            const_term,
            slack_basis,
        }
    }

    fn recover(&self, z: &[Rat]) -> RatVec {
        self.var_map
            .iter()
            .map(|m| match m {
                VarMap::Shifted { col, base, sign } => {
                    if *sign > 0 {
                        base + &z[*col]
                    } else {
                        base - &z[*col]
                    }
                }
                VarMap::Split { pos, neg } => &z[*pos] - &z[*neg],
            })
            .collect()
    }
}

enum PhaseOne {
    Feasible,
    Infeasible { farkas: RatVec },
}

enum PhaseTwo {
    Optimal,
    Unbounded,
}

struct Tableau {
    /// Rows over all columns: real columns first, then one artificial per
    /// row that lacked a reusable slack. Artificials never re-enter.
    rows: Vec<RatVec>,
    rhs: RatVec,
    basis: Vec<usize>,
    /// Per row, the column that was its identity column at the start
    /// (slack or artificial); duals are read off these positions.
    init_col: Vec<usize>,
    total_cols: usize,
    artificial_from: usize,
}

impl Tableau {
    fn new(sf: &StdForm) -> Tableau {
        let m = sf.rows.len();
        let n_art = sf.slack_basis.iter().filter(|s| s.is_none()).count();
        let total = sf.ncols + n_art;
        let mut rows: Vec<RatVec> = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut init_col = Vec::with_capacity(m);
        let mut next_art = sf.ncols;
        for (i, row) in sf.rows.iter().enumerate() {
            let mut r = row.clone();
            r.resize(total, Rat::zero());
            match sf.slack_basis[i] {
                Some(col) => {
                    basis.push(col);
                    init_col.push(col);
                }
                None => {
                    r[next_art] = Rat::one();
                    basis.push(next_art);
                    init_col.push(next_art);
                    next_art += 1;
                }
            }
            rows.push(r);
        }
        Tableau {
            rows,
            rhs: sf.b.clone(),
            basis,
            init_col,
            total_cols: total,
            artificial_from: sf.ncols,
        }
    }

    fn pivot(&mut self, r: usize, j: usize, zrow: &mut RatVec) {
        let inv = self.rows[r][j].recip();
        for c in 0..self.total_cols {
            if !self.rows[r][c].is_zero() {
                self.rows[r][c] *= &inv;
            }
        }
        self.rhs[r] *= &inv;
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][j].is_zero() {
                continue;
            }
            let f = self.rows[i][j].clone();
            for c in 0..self.total_cols {
                if !self.rows[r][c].is_zero() {
                    let d = &f * &self.rows[r][c];
                    self.rows[i][c] -= &d;
                }
            }
            let d = &f * &self.rhs[r];
            self.rhs[i] -= &d;
        }
        if !zrow[j].is_zero() {
            let f = zrow[j].clone();
            for (zc, rc) in zrow.iter_mut().zip(&self.rows[r]) {
                if !rc.is_zero() {
                    *zc -= &(&f * rc);
                }
            }
        }
        self.basis[r] = j;
    }

    /// Reduced costs for the given full-length cost vector under the
    /// current basis.
    fn reduced_costs(&self, cost: &[Rat]) -> RatVec {
        let mut zrow = cost.to_vec();
        for (i, &bi) in self.basis.iter().enumerate() {
            if cost[bi].is_zero() {
                continue;
            }
            let f = cost[bi].clone();
            for (zc, rc) in zrow.iter_mut().zip(&self.rows[i]) {
                if !rc.is_zero() {
                    *zc -= &(&f * rc);
                }
            }
        }
        zrow
    }

    /// Bland's rule iteration until optimality or unboundedness: entering
    /// column is the lowest-index negative reduced cost, leaving row breaks
    /// ratio ties by the lowest basic variable index.
    fn iterate(&mut self, zrow: &mut RatVec, allow: impl Fn(usize) -> bool) -> PhaseTwo {
        loop {
            let entering = (0..self.total_cols).find(|&j| allow(j) && zrow[j].is_negative());
            let Some(j) = entering else {
                return PhaseTwo::Optimal;
            };
            let mut best: Option<(Rat, usize, usize)> = None; // (ratio, basis var, row)
            for i in 0..self.rows.len() {
                if !self.rows[i][j].is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / &self.rows[i][j];
                let key = (ratio, self.basis[i], i);
                best = match best {
                    None => Some(key),
                    Some(cur) => {
                        if (key.0.clone(), key.1) < (cur.0.clone(), cur.1) {
                            Some(key)
                        } else {
                            Some(cur)
                        }
                    }
                };
            }
            let Some((_, _, row)) = best else {
                return PhaseTwo::Unbounded;
            };
            self.pivot(row, j, zrow);
        }
    }

    fn phase_one(&mut self) -> PhaseOne {
        let mut cost = vec![Rat::zero(); self.total_cols];
        for cj in cost.iter_mut().skip(self.artificial_from) {
            *cj = Rat::one();
        }
        let mut zrow = self.reduced_costs(&cost);
        // Artificials may leave but never re-enter.
        let art_from = self.artificial_from;
        let outcome = self.iterate(&mut zrow, |j| {
            j < art_from || cost[j].is_zero() // artificial cols barred from entering
        });
        debug_assert!(matches!(outcome, PhaseTwo::Optimal), "phase 1 is bounded");
        let infeas: Rat = self
            .basis
            .iter()
            .enumerate()
            .filter(|(_, &b)| b >= art_from)
            .map(|(i, _)| self.rhs[i].clone())
            .sum();
        if infeas.is_positive() {
            // Farkas certificate from the final duals: y_i = c_init - zbar_init.
            let farkas: RatVec = self
                .init_col
                .iter()
                .map(|&c| &cost[c] - &zrow[c])
                .collect();
            return PhaseOne::Infeasible { farkas };
        }
        // Drive any artificial still basic (at zero) out of the basis.
        for i in 0..self.rows.len() {
            if self.basis[i] < art_from {
                continue;
            }
            if let Some(j) = (0..art_from).find(|&j| !self.rows[i][j].is_zero()) {
                self.pivot(i, j, &mut zrow);
            }
            // Otherwise the row is redundant (all real coefficients
            // eliminated); the artificial stays basic at zero and is inert.
        }
        PhaseOne::Feasible
    }

    fn phase_two(&mut self, real_cost: &[Rat]) -> PhaseTwo {
        let mut cost = real_cost.to_vec();
        cost.resize(self.total_cols, Rat::zero());
        let mut zrow = self.reduced_costs(&cost);
        let art_from = self.artificial_from;
        self.iterate(&mut zrow, |j| j < art_from)
    }

    fn primal_solution(&self, ncols: usize) -> RatVec {
        let mut z = vec![Rat::zero(); ncols];
        for (i, &bi) in self.basis.iter().enumerate() {
            if bi < ncols {
                z[bi] = self.rhs[i].clone();
            }
        }
        z
    }

    /// Row duals `y = c_B B^{-1}`, read off the initial identity columns.
    fn row_duals(&self, real_cost: &[Rat]) -> RatVec {
        let mut cost = real_cost.to_vec();
        cost.resize(self.total_cols, Rat::zero());
        let zrow = self.reduced_costs(&cost);
        self.init_col
            .iter()
            .map(|&c| &cost[c] - &zrow[c])
            .collect()
    }
}
