//! Dense two-phase simplex for the small LPs used by the oracles.
//!
//! Minimizes `c^T x` subject to rows `a_i^T x (<=|=|>=) b_i` and `x >= 0`.
//! Problems here have at most a few hundred columns, so a full tableau is
//! simpler and fast enough. Pricing is Dantzig's rule, falling back to
//! Bland's rule after a run of degenerate pivots.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug)]
struct Row {
    coeffs: Vec<(usize, f64)>,
    relation: Relation,
    rhs: f64,
}

#[derive(Clone, Debug)]
pub struct LinearProgram {
    costs: Vec<f64>,
    rows: Vec<Row>,
    max_iterations: usize,
}

const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-11;
const DEGENERATE_RUN: usize = 64;

impl Default for LinearProgram {
    fn default() -> Self {
        Self::new()
    }
}

impl LinearProgram {
    pub fn new() -> Self {
        LinearProgram {
            costs: Vec::new(),
            rows: Vec::new(),
            max_iterations: 20_000,
        }
    }

    /// Adds a nonnegative variable with the given objective coefficient.
    pub fn add_var(&mut self, cost: f64) -> usize {
        self.costs.push(cost);
        self.costs.len() - 1
    }

    /// Adds `count` variables sharing one cost; returns the first index.
    pub fn add_vars(&mut self, count: usize, cost: f64) -> usize {
        let first = self.costs.len();
        self.costs.extend(std::iter::repeat_n(cost, count));
        first
    }

    pub fn num_vars(&self) -> usize {
        self.costs.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Adds a constraint; repeated indices in `coeffs` are summed.
    pub fn add_row(&mut self, coeffs: &[(usize, f64)], relation: Relation, rhs: f64) {
        debug_assert!(coeffs.iter().all(|&(j, _)| j < self.costs.len()));
        self.rows.push(Row {
            coeffs: coeffs.to_vec(),
            relation,
            rhs,
        });
    }

    pub fn set_max_iterations(&mut self, limit: usize) {
        self.max_iterations = limit;
    }

    pub fn solve(&self) -> LpSolution {
        Tableau::build(self).run(self)
    }
}

struct Tableau {
    m: usize,
    /// Columns excluding the right-hand side.
    width: usize,
    n: usize,
    first_artificial: usize,
    data: Vec<f64>,
    basis: Vec<usize>,
    reduced: Vec<f64>,
    neg_obj: f64,
    iterations: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Tableau {
        let n = lp.costs.len();
        let m = lp.rows.len();
        // Normalize to nonnegative right-hand sides.
        let normalized: Vec<(Vec<(usize, f64)>, Relation, f64)> = lp
            .rows
            .iter()
            .map(|r| {
                if r.rhs < 0.0 {
                    let flipped = match r.relation {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    let coeffs = r.coeffs.iter().map(|&(j, a)| (j, -a)).collect();
                    (coeffs, flipped, -r.rhs)
                } else {
                    (r.coeffs.clone(), r.relation, r.rhs)
                }
            })
            .collect();
        let slack_count = normalized
            .iter()
            .filter(|r| r.1 != Relation::Eq)
            .count();
        let artificial_count = normalized
            .iter()
            .filter(|r| r.1 != Relation::Le)
            .count();
        let first_artificial = n + slack_count;
        let width = first_artificial + artificial_count;
        let stride = width + 1;
        let mut data = vec![0.0; m * stride];
        let mut basis = vec![0; m];
        let mut next_slack = n;
        let mut next_art = first_artificial;
        for (i, (coeffs, relation, rhs)) in normalized.iter().enumerate() {
            let row = &mut data[i * stride..(i + 1) * stride];
            for &(j, a) in coeffs {
                row[j] += a;
            }
            row[width] = *rhs;
            match relation {
                Relation::Le => {
                    row[next_slack] = 1.0;
                    basis[i] = next_slack;
                    next_slack += 1;
                }
                Relation::Ge => {
                    row[next_slack] = -1.0;
                    next_slack += 1;
                    row[next_art] = 1.0;
                    basis[i] = next_art;
                    next_art += 1;
                }
                Relation::Eq => {
                    row[next_art] = 1.0;
                    basis[i] = next_art;
                    next_art += 1;
                }
            }
        }
        Tableau {
            m,
            width,
            n,
            first_artificial,
            data,
            basis,
            reduced: vec![0.0; width],
            neg_obj: 0.0,
            iterations: 0,
        }
    }

    fn stride(&self) -> usize {
        self.width + 1
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.stride() + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.data[i * self.stride() + self.width]
    }

    /// Sets reduced costs for `costs` (indexed over all columns).
    fn price(&mut self, costs: &[f64]) {
        self.reduced.copy_from_slice(costs);
        self.neg_obj = 0.0;
        let stride = self.stride();
        for i in 0..self.m {
            let cb = costs[self.basis[i]];
            if cb != 0.0 {
                let row = &self.data[i * stride..(i + 1) * stride];
                for (d, &a) in self.reduced.iter_mut().zip(&row[..self.width]) {
                    *d -= cb * a;
                }
                self.neg_obj -= cb * row[self.width];
            }
        }
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let stride = self.stride();
        let p = self.at(r, col);
        for v in &mut self.data[r * stride..(r + 1) * stride] {
            *v /= p;
        }
        let pivot_row: Vec<f64> = self.data[r * stride..(r + 1) * stride].to_vec();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.data[i * stride + col];
            if f != 0.0 {
                let row = &mut self.data[i * stride..(i + 1) * stride];
                for (v, &pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[col] = 0.0;
                if row[self.width].abs() < 1e-14 {
                    row[self.width] = 0.0;
                }
            }
        }
        let f = self.reduced[col];
        if f != 0.0 {
            for (d, &pv) in self.reduced.iter_mut().zip(&pivot_row[..self.width]) {
                *d -= f * pv;
            }
            self.reduced[col] = 0.0;
            self.neg_obj -= f * pivot_row[self.width];
        }
        self.basis[r] = col;
        self.iterations += 1;
    }

    /// Runs simplex iterations over columns `< allowed`.
    fn optimize(&mut self, allowed: usize, limit: usize) -> LpStatus {
        let mut degenerate = 0;
        loop {
            if self.iterations >= limit {
                return LpStatus::IterationLimit;
            }
            let bland = degenerate >= DEGENERATE_RUN;
            let mut entering = None;
            let mut best = -COST_TOL;
            for j in 0..allowed {
                let d = self.reduced[j];
                if d < best {
                    entering = Some(j);
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some(col) = entering else {
                return LpStatus::Optimal;
            };
            let mut leave: Option<(usize, f64, f64)> = None;
            for i in 0..self.m {
                let a = self.at(i, col);
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs(i).max(0.0) / a;
                leave = match leave {
                    None => Some((i, ratio, a)),
                    Some((li, lr, la)) => {
                        let tie = (ratio - lr).abs() <= 1e-12 * (1.0 + lr.abs());
                        let better = if tie {
                            if bland {
                                self.basis[i] < self.basis[li]
                            } else {
                                a > la
                            }
                        } else {
                            ratio < lr
                        };
                        if better {
                            Some((i, ratio, a))
                        } else {
                            Some((li, lr, la))
                        }
                    }
                };
            }
            let Some((row, ratio, _)) = leave else {
                return LpStatus::Unbounded;
            };
            if ratio <= 1e-13 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(row, col);
        }
    }

    fn run(mut self, lp: &LinearProgram) -> LpSolution {
        let limit = lp.max_iterations;
        let scale = 1.0 + lp.rows.iter().map(|r| r.rhs.abs()).fold(0.0, f64::max);

        let mut phase1 = vec![0.0; self.width];
        for c in phase1.iter_mut().skip(self.first_artificial) {
            *c = 1.0;
        }
        self.price(&phase1);
        match self.optimize(self.width, limit) {
            LpStatus::Optimal => {}
            LpStatus::IterationLimit => return self.finish(LpStatus::IterationLimit, lp),
            // Phase 1 is bounded below by zero.
            LpStatus::Unbounded | LpStatus::Infeasible => {
                return self.finish(LpStatus::Infeasible, lp)
            }
        }
        if -self.neg_obj > 1e-9 * scale {
            return self.finish(LpStatus::Infeasible, lp);
        }
        self.expel_artificials();

        let mut phase2 = vec![0.0; self.width];
        phase2[..self.n].copy_from_slice(&lp.costs);
        self.price(&phase2);
        let status = self.optimize(self.first_artificial, limit);
        self.finish(status, lp)
    }

    /// Pivots zero-valued artificials out of the basis; rows where that is
    /// impossible are linearly dependent and get dropped.
    fn expel_artificials(&mut self) {
        let mut i = 0;
        while i < self.m {
            if self.basis[i] < self.first_artificial {
                i += 1;
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.first_artificial {
                let a = self.at(i, j).abs();
                if a > 1e-9 && best.is_none_or(|(_, b)| a > b) {
                    best = Some((j, a));
                }
            }
            match best {
                Some((j, _)) => {
                    self.pivot(i, j);
                    i += 1;
                }
                None => {
                    let stride = self.stride();
                    self.data.drain(i * stride..(i + 1) * stride);
                    self.basis.remove(i);
                    self.m -= 1;
                }
            }
        }
    }

    fn finish(&self, status: LpStatus, lp: &LinearProgram) -> LpSolution {
        let mut x = vec![0.0; self.n];
        for i in 0..self.m {
            let j = self.basis[i];
            if j < self.n {
                x[j] = self.rhs(i).max(0.0);
            }
        }
        let objective = x.iter().zip(&lp.costs).map(|(v, c)| v * c).sum();
        LpSolution {
            status,
            x,
            objective,
            iterations: self.iterations,
        }
    }
}
