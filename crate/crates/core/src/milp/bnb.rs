//! Best-first branch and bound over the simplex relaxation.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use super::simplex::{solve_lp, LpData, LpStatus};
use super::{MilpError, MilpProblem, MilpSolution, Relation, Sense, SolveLimits, SolveStats, Status};

const INT_TOL: f64 = 1e-6;
const PRUNE_TOL: f64 = 1e-9;

struct Node {
    id: usize,
    depth: usize,
    bound: f64,
    lo: Vec<f64>,
    hi: Vec<f64>,
    x: Vec<f64>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // BinaryHeap pops the greatest: lowest bound, then deepest, then oldest.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.id.cmp(&self.id))
    }
}

pub(crate) fn lp_data(p: &MilpProblem) -> LpData {
    let sign = match p.sense() {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let mut cost = vec![0.0; p.num_vars()];
    for &(v, c) in p.objective().terms() {
        cost[v.0] = sign * c;
    }
    let mut rows = Vec::with_capacity(p.constraints().len());
    let mut row_lo = Vec::with_capacity(rows.capacity());
    let mut row_hi = Vec::with_capacity(rows.capacity());
    for c in p.constraints() {
        rows.push(c.lhs.terms().iter().map(|&(v, a)| (v.0, a)).collect());
        let (l, h) = match c.relation {
            Relation::Le => (f64::NEG_INFINITY, c.rhs),
            Relation::Ge => (c.rhs, f64::INFINITY),
            Relation::Eq => (c.rhs, c.rhs),
        };
        row_lo.push(l);
        row_hi.push(h);
    }
    LpData { n: p.num_vars(), rows, row_lo, row_hi, cost }
}

pub fn solve(p: &MilpProblem, limits: &SolveLimits) -> Result<MilpSolution, MilpError> {
    let started = Instant::now();
    let data = lp_data(p);
    let sign = if p.sense() == Sense::Maximize { -1.0 } else { 1.0 };
    let integral: Vec<usize> =
        (0..p.num_vars()).filter(|&j| p.variables()[j].kind.is_integral()).collect();
    let mut lo: Vec<f64> = p.variables().iter().map(|v| v.lo).collect();
    let mut hi: Vec<f64> = p.variables().iter().map(|v| v.hi).collect();
    for &j in &integral {
        lo[j] = (lo[j] - INT_TOL).ceil();
        hi[j] = (hi[j] + INT_TOL).floor();
    }

    let mut stats = SolveStats::default();
    let finish = |status, values: Option<Vec<f64>>, obj: Option<f64>, mut stats: SolveStats| {
        stats.wall_time = started.elapsed();
        Ok(MilpSolution {
            status,
            objective: obj.map(|o| sign * o + p.objective().constant_term()),
            values,
            stats,
        })
    };

    let root = solve_lp(&data, &lo, &hi, limits.max_simplex_iterations)?;
    stats.simplex_iterations += root.iterations;
    stats.nodes = 1;
    match root.status {
        LpStatus::Infeasible => return finish(Status::Unsat, None, None, stats),
        LpStatus::Unbounded => return finish(Status::Unbounded, None, None, stats),
        LpStatus::Optimal => {}
    }

    let mut heap = BinaryHeap::new();
    heap.push(Node { id: 0, depth: 0, bound: root.objective, lo, hi, x: root.x });
    let mut next_id = 1usize;
    let mut incumbent: Option<(f64, Vec<f64>)> = None;

    while let Some(node) = heap.pop() {
        if let Some((best, _)) = &incumbent {
            if node.bound >= *best - PRUNE_TOL {
                continue;
            }
        }
        let over_time = limits.time.is_some_and(|t| started.elapsed() >= t);
        let over_nodes = limits.nodes.is_some_and(|n| stats.nodes >= n);
        if over_time || over_nodes {
            stats.hit_limit = true;
            break;
        }
        let branch = integral
            .iter()
            .map(|&j| (j, (node.x[j] - node.x[j].floor())))
            .filter(|&(_, f)| f > INT_TOL && f < 1.0 - INT_TOL)
            .map(|(j, f)| (j, (f - 0.5).abs()))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
            .map(|(j, _)| j);

        let Some(j) = branch else {
            if let Some((obj, x)) = polish(&data, &node, &integral, limits, &mut stats)? {
                if incumbent.as_ref().map_or(true, |(b, _)| obj < *b - PRUNE_TOL) {
                    log::debug!(
                        "incumbent {:.6} at node {} depth {} ({} nodes)",
                        sign * obj + p.objective().constant_term(),
                        node.id,
                        node.depth,
                        stats.nodes
                    );
                    incumbent = Some((obj, x));
                }
            }
            continue;
        };

        let v = node.x[j];
        for up in [false, true] {
            let mut lo = node.lo.clone();
            let mut hi = node.hi.clone();
            if up {
                lo[j] = v.ceil();
            } else {
                hi[j] = v.floor();
            }
            let r = solve_lp(&data, &lo, &hi, limits.max_simplex_iterations)?;
            stats.nodes += 1;
            stats.simplex_iterations += r.iterations;
            match r.status {
                LpStatus::Optimal => {}
                LpStatus::Infeasible => continue,
                LpStatus::Unbounded => {
                    return Err(MilpError::Numeric("unbounded relaxation below a bounded root".into()))
                }
            }
            if incumbent.as_ref().is_some_and(|(b, _)| r.objective >= *b - PRUNE_TOL) {
                continue;
            }
            heap.push(Node { id: next_id, depth: node.depth + 1, bound: r.objective, lo, hi, x: r.x });
            next_id += 1;
        }
    }

    match incumbent {
        Some((obj, x)) => finish(Status::Sat, Some(x), Some(obj), stats),
        None if stats.hit_limit => Err(MilpError::LimitWithoutIncumbent { nodes: stats.nodes }),
        None => finish(Status::Unsat, None, None, stats),
    }
}

/// Fixes integral variables at their rounded values and re-solves for the
/// continuous ones, so big-M rows hold exactly rather than up to `M * INT_TOL`.
fn polish(
    data: &LpData,
    node: &Node,
    integral: &[usize],
    limits: &SolveLimits,
    stats: &mut SolveStats,
) -> Result<Option<(f64, Vec<f64>)>, MilpError> {
    if integral.is_empty() {
        let obj = data.cost.iter().zip(&node.x).map(|(c, v)| c * v).sum();
        return Ok(Some((obj, node.x.clone())));
    }
    let mut lo = node.lo.clone();
    let mut hi = node.hi.clone();
    for &j in integral {
        let r = node.x[j].round();
        lo[j] = r;
        hi[j] = r;
    }
    let r = solve_lp(data, &lo, &hi, limits.max_simplex_iterations)?;
    stats.simplex_iterations += r.iterations;
    Ok(match r.status {
        LpStatus::Optimal => Some((r.objective, r.x)),
        _ => None,
    })
}
