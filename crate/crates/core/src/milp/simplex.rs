//! Dense bounded-variable primal simplex.
//!
//! Every row `i` becomes `a_i . x - s_i = 0` with the row bounds moved onto
//! the activity variable `s_i`, so the system is homogeneous and every column
//! carries its own `[lo, hi]`. Phase 1 adds an artificial for each row whose
//! starting activity is out of bounds and minimises their sum.

use super::MilpError;

const FEAS_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const RESIDUAL_TOL: f64 = 1e-6;
const DEGENERATE_SWITCH: usize = 60;

/// Constraint rows in sparse form plus row bounds; costs are minimised.
#[derive(Debug, Clone)]
pub struct LpData {
    pub n: usize,
    pub rows: Vec<Vec<(usize, f64)>>,
    pub row_lo: Vec<f64>,
    pub row_hi: Vec<f64>,
    pub cost: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpResult {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

struct Tableau {
    m: usize,
    cols: usize,
    t: Vec<f64>,
    d: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    x: Vec<f64>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    iterations: usize,
    max_iterations: usize,
}

enum Phase {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.cols + j]
    }

    fn price(&mut self, cost: &[f64]) {
        self.d.copy_from_slice(cost);
        for i in 0..self.m {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.t[i * self.cols..(i + 1) * self.cols];
                for (dj, &tij) in self.d.iter_mut().zip(row) {
                    *dj -= cb * tij;
                }
            }
        }
        for i in 0..self.m {
            self.d[self.basis[i]] = 0.0;
        }
    }

    /// Basic values from the nonbasic ones; exact up to rounding since rows are homogeneous.
    fn refresh_basics(&mut self) {
        for i in 0..self.m {
            let row = &self.t[i * self.cols..(i + 1) * self.cols];
            let mut v = 0.0;
            for (j, &tij) in row.iter().enumerate() {
                if tij != 0.0 && !self.is_basic[j] {
                    v -= tij * self.x[j];
                }
            }
            self.x[self.basis[i]] = v;
        }
    }

    /// Direction in which nonbasic `j` improves the objective, if any.
    fn improving_direction(&self, j: usize) -> Option<f64> {
        if self.is_basic[j] || self.lo[j] == self.hi[j] {
            return None;
        }
        let dj = self.d[j];
        let (lo, hi, x) = (self.lo[j], self.hi[j], self.x[j]);
        let at_lower = lo.is_finite() && x <= lo;
        let at_upper = hi.is_finite() && x >= hi;
        if dj < -OPT_TOL && !at_upper {
            Some(1.0)
        } else if dj > OPT_TOL && !at_lower {
            Some(-1.0)
        } else {
            None
        }
    }

    fn run(&mut self, cost: &[f64]) -> Result<Phase, MilpError> {
        self.price(cost);
        let mut degenerate = 0usize;
        loop {
            if self.iterations >= self.max_iterations {
                return Err(MilpError::Numeric(format!(
                    "simplex iteration limit {} reached",
                    self.max_iterations
                )));
            }
            let bland = degenerate > DEGENERATE_SWITCH;
            let mut entering = None;
            let mut best = 0.0;
            for j in 0..self.cols {
                if let Some(dir) = self.improving_direction(j) {
                    if bland {
                        entering = Some((j, dir));
                        break;
                    }
                    if self.d[j].abs() > best {
                        best = self.d[j].abs();
                        entering = Some((j, dir));
                    }
                }
            }
            let Some((j, dir)) = entering else {
                return Ok(Phase::Optimal);
            };
            self.iterations += 1;

            // Ratio test (two-pass with a small feasibility allowance).
            let mut limit = if self.lo[j].is_finite() && self.hi[j].is_finite() {
                self.hi[j] - self.lo[j]
            } else {
                f64::INFINITY
            };
            for i in 0..self.m {
                let g = -self.at(i, j) * dir;
                let b = self.basis[i];
                let r = if g < -PIVOT_TOL && self.lo[b].is_finite() {
                    (self.x[b] - self.lo[b] + FEAS_TOL) / -g
                } else if g > PIVOT_TOL && self.hi[b].is_finite() {
                    (self.hi[b] - self.x[b] + FEAS_TOL) / g
                } else {
                    continue;
                };
                limit = limit.min(r);
            }
            if limit == f64::INFINITY {
                return Ok(Phase::Unbounded);
            }
            let mut leave: Option<(usize, f64, f64)> = None; // row, step, |g|
            for i in 0..self.m {
                let g = -self.at(i, j) * dir;
                let b = self.basis[i];
                let r = if g < -PIVOT_TOL && self.lo[b].is_finite() {
                    (self.x[b] - self.lo[b]) / -g
                } else if g > PIVOT_TOL && self.hi[b].is_finite() {
                    (self.hi[b] - self.x[b]) / g
                } else {
                    continue;
                };
                if r > limit {
                    continue;
                }
                let better = match leave {
                    None => true,
                    Some((li, _, lg)) => {
                        if bland {
                            b < self.basis[li]
                        } else {
                            g.abs() > lg
                        }
                    }
                };
                if better {
                    leave = Some((i, r.max(0.0), g.abs()));
                }
            }
            let flip = self.hi[j] - self.lo[j];
            let step = match leave {
                Some((_, s, _)) if !(flip.is_finite() && flip <= s) => s,
                _ => flip,
            };
            if step <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            for i in 0..self.m {
                let g = -self.at(i, j) * dir;
                if g != 0.0 {
                    let b = self.basis[i];
                    self.x[b] += g * step;
                }
            }
            match leave {
                Some((r, s, _)) if !(flip.is_finite() && flip <= s) => {
                    self.x[j] += dir * step;
                    let b = self.basis[r];
                    let g = -self.at(r, j) * dir;
                    self.x[b] = if g < 0.0 { self.lo[b] } else { self.hi[b] };
                    self.pivot(r, j);
                }
                _ => {
                    self.x[j] = if dir > 0.0 { self.hi[j] } else { self.lo[j] };
                }
            }
            if self.iterations % 200 == 0 {
                self.refresh_basics();
            }
        }
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let cols = self.cols;
        let piv = self.t[r * cols + j];
        let inv = 1.0 / piv;
        let mut nz = Vec::new();
        for k in 0..cols {
            let v = &mut self.t[r * cols + k];
            if *v != 0.0 {
                *v *= inv;
                nz.push(k);
            }
        }
        self.t[r * cols + j] = 1.0;
        let (before, rest) = self.t.split_at_mut(r * cols);
        let (prow, after) = rest.split_at_mut(cols);
        let eliminate = |row: &mut [f64]| {
            let f = row[j];
            if f != 0.0 {
                for &k in &nz {
                    row[k] -= f * prow[k];
                }
                row[j] = 0.0;
            }
        };
        for row in before.chunks_mut(cols) {
            eliminate(row);
        }
        for row in after.chunks_mut(cols) {
            eliminate(row);
        }
        let f = self.d[j];
        if f != 0.0 {
            for &k in &nz {
                self.d[k] -= f * prow[k];
            }
            self.d[j] = 0.0;
        }
        let old = self.basis[r];
        self.is_basic[old] = false;
        self.is_basic[j] = true;
        self.basis[r] = j;
    }
}

/// Solves `min cost . x` over the rows with column bounds `lo`, `hi`.
pub fn solve_lp(data: &LpData, lo: &[f64], hi: &[f64], max_iterations: usize) -> Result<LpResult, MilpError> {
    let n = data.n;
    let m = data.rows.len();
    for j in 0..n {
        if lo[j] > hi[j] + FEAS_TOL {
            return Ok(LpResult { status: LpStatus::Infeasible, x: vec![], objective: 0.0, iterations: 0 });
        }
    }
    let start: Vec<f64> = (0..n)
        .map(|j| {
            if lo[j].is_finite() {
                lo[j]
            } else if hi[j].is_finite() {
                hi[j]
            } else {
                0.0
            }
        })
        .collect();
    let activity: Vec<f64> = data.rows.iter().map(|r| r.iter().map(|&(j, a)| a * start[j]).sum()).collect();
    let needs_art: Vec<bool> = (0..m)
        .map(|i| activity[i] < data.row_lo[i] - FEAS_TOL || activity[i] > data.row_hi[i] + FEAS_TOL)
        .collect();
    let n_art = needs_art.iter().filter(|&&b| b).count();
    let cols = n + m + n_art;

    let mut tab = Tableau {
        m,
        cols,
        t: vec![0.0; m * cols],
        d: vec![0.0; cols],
        lo: Vec::with_capacity(cols),
        hi: Vec::with_capacity(cols),
        x: vec![0.0; cols],
        basis: vec![0; m],
        is_basic: vec![false; cols],
        iterations: 0,
        max_iterations,
    };
    tab.lo.extend_from_slice(&lo[..n]);
    tab.hi.extend_from_slice(&hi[..n]);
    tab.lo.extend_from_slice(&data.row_lo);
    tab.hi.extend_from_slice(&data.row_hi);
    tab.lo.extend(std::iter::repeat(0.0).take(n_art));
    tab.hi.extend(std::iter::repeat(f64::INFINITY).take(n_art));
    tab.x[..n].copy_from_slice(&start);

    let mut art = n + m;
    for (i, row) in data.rows.iter().enumerate() {
        let base = i * cols;
        if needs_art[i] {
            let bound = if activity[i] < data.row_lo[i] { data.row_lo[i] } else { data.row_hi[i] };
            // a.x - s + sigma * art = 0, art basic with value (bound - a.x) / sigma >= 0
            let sigma = if bound - activity[i] >= 0.0 { 1.0 } else { -1.0 };
            for &(j, a) in row {
                tab.t[base + j] += a / sigma;
            }
            tab.t[base + n + i] = -1.0 / sigma;
            tab.t[base + art] = 1.0;
            tab.x[n + i] = bound;
            tab.x[art] = (bound - activity[i]) / sigma;
            tab.basis[i] = art;
            tab.is_basic[art] = true;
            art += 1;
        } else {
            // s = a.x, s basic
            for &(j, a) in row {
                tab.t[base + j] -= a;
            }
            tab.t[base + n + i] = 1.0;
            tab.x[n + i] = activity[i];
            tab.basis[i] = n + i;
            tab.is_basic[n + i] = true;
        }
    }

    if n_art > 0 {
        let mut cost1 = vec![0.0; cols];
        for c in cost1.iter_mut().skip(n + m) {
            *c = 1.0;
        }
        tab.run(&cost1)?;
        tab.refresh_basics();
        let infeas: f64 = tab.x[n + m..].iter().sum();
        if infeas > 1e-7 {
            return Ok(LpResult {
                status: LpStatus::Infeasible,
                x: vec![],
                objective: 0.0,
                iterations: tab.iterations,
            });
        }
        for k in n + m..cols {
            tab.hi[k] = 0.0;
            if !tab.is_basic[k] {
                tab.x[k] = 0.0;
            }
        }
    }

    let mut cost = vec![0.0; cols];
    cost[..n].copy_from_slice(&data.cost);
    let phase = tab.run(&cost)?;
    if let Phase::Unbounded = phase {
        return Ok(LpResult { status: LpStatus::Unbounded, x: vec![], objective: 0.0, iterations: tab.iterations });
    }
    tab.refresh_basics();

    let mut x = tab.x[..n].to_vec();
    for j in 0..n {
        // snap tiny bound violations from rounding
        if x[j] < lo[j] && x[j] > lo[j] - RESIDUAL_TOL {
            x[j] = lo[j];
        }
        if x[j] > hi[j] && x[j] < hi[j] + RESIDUAL_TOL {
            x[j] = hi[j];
        }
    }
    let mut worst = 0.0f64;
    for j in 0..n {
        worst = worst.max(lo[j] - x[j]).max(x[j] - hi[j]);
    }
    for (i, row) in data.rows.iter().enumerate() {
        let a: f64 = row.iter().map(|&(j, c)| c * x[j]).sum();
        let scale = 1.0 + a.abs().max(data.row_lo[i].abs().min(data.row_hi[i].abs()));
        let v = (data.row_lo[i] - a).max(a - data.row_hi[i]).max(0.0) / scale;
        worst = worst.max(v);
    }
    if worst > RESIDUAL_TOL {
        return Err(MilpError::Numeric(format!("LP residual {worst:.3e} exceeds tolerance")));
    }
    let objective = data.cost.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpResult { status: LpStatus::Optimal, x, objective, iterations: tab.iterations })
}
