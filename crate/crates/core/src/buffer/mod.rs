//! FIFO allocation as register minimization.
//!
//! Each node `v` gets a start delay `s_v`; along every edge `p -> c` the
//! consumer starts at `s_c = s_p + L_p + d` with FIFO delay `d >= 0`, and the
//! total buffered bits `sum(d * bits)` is minimized. The constraint matrix is
//! a network matrix, so the LP optimum is integral. Two independent solvers
//! are provided: the simplex on the dual flow problem, and a min-cost-flow
//! reduction whose residual potentials give the delays.

pub mod lp;
pub mod mincost;
pub mod trace;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use lp::{maximize_eq, LpOutcome, Q};
use mincost::Network;
pub use trace::{trace_eval, ScheduleTrace};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BufferError {
    #[error("buffer problem graph has a cycle through node {0}")]
    Cycle(usize),
    #[error("edge {0} refers to a missing node")]
    BadEdge(usize),
    #[error("root node {0} has incoming edges")]
    RootHasInputs(usize),
    #[error("solver returned a fractional or inconsistent schedule: {0}")]
    NotIntegral(String),
    #[error("manual FIFO override names missing edge {0}")]
    UnknownEdge(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BufNode {
    pub latency: u64,
    /// Extra tokens the node may emit ahead of its ideal trace.
    pub burst: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BufEdge {
    pub from: usize,
    pub to: usize,
    pub bits: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BufferProblem {
    pub nodes: Vec<BufNode>,
    pub edges: Vec<BufEdge>,
    /// Node pinned at start delay 0 (the pipeline input).
    pub root: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BufferSolution {
    pub start: Vec<u64>,
    /// Latency-matching delay per edge, `s_c - s_p - L_p`.
    pub delay: Vec<u64>,
    /// FIFO depth per edge: delay plus the producer's burst allowance.
    pub depth: Vec<u64>,
    /// Objective value `sum(delay * bits)`.
    pub latency_bits: u64,
    /// `sum(depth * bits)` including burst FIFOs.
    pub total_bits: u64,
}

/// Internal constraint arcs `s_to - s_from >= lat` with weight `bits`.
struct Arcs {
    list: Vec<(usize, usize, i128, i128)>,
    real: usize,
}

fn build_arcs(p: &BufferProblem) -> Result<Arcs, BufferError> {
    let n = p.nodes.len();
    let mut list = Vec::new();
    for (i, e) in p.edges.iter().enumerate() {
        if e.from >= n || e.to >= n {
            return Err(BufferError::BadEdge(i));
        }
        if e.to == p.root {
            return Err(BufferError::RootHasInputs(p.root));
        }
        list.push((
            e.from,
            e.to,
            p.nodes[e.from].latency as i128,
            e.bits as i128,
        ));
    }
    let real = list.len();
    // other sources may start any time at or after the root
    for v in 0..n {
        if v != p.root && !p.edges.iter().any(|e| e.to == v) {
            list.push((p.root, v, 0, 0));
        }
    }
    check_acyclic(n, &list)?;
    Ok(Arcs { list, real })
}

fn check_acyclic(n: usize, arcs: &[(usize, usize, i128, i128)]) -> Result<(), BufferError> {
    let mut indeg = vec![0; n];
    for a in arcs {
        indeg[a.1] += 1;
    }
    let mut stack: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut seen = 0;
    while let Some(u) = stack.pop() {
        seen += 1;
        for a in arcs.iter().filter(|a| a.0 == u) {
            indeg[a.1] -= 1;
            if indeg[a.1] == 0 {
                stack.push(a.1);
            }
        }
    }
    if seen < n {
        return Err(BufferError::Cycle(
            (0..n).find(|&v| indeg[v] > 0).unwrap_or(0),
        ));
    }
    Ok(())
}

fn finish(p: &BufferProblem, arcs: &Arcs, start: Vec<i128>) -> Result<BufferSolution, BufferError> {
    if start[p.root] != 0 {
        return Err(BufferError::NotIntegral(format!(
            "root start {}",
            start[p.root]
        )));
    }
    for &(u, v, lat, _) in &arcs.list {
        if start[v] - start[u] < lat {
            return Err(BufferError::NotIntegral(format!(
                "edge {u}->{v} violates its latency"
            )));
        }
    }
    let mut delay = Vec::with_capacity(p.edges.len());
    let mut depth = Vec::with_capacity(p.edges.len());
    let (mut lb, mut tb) = (0u64, 0u64);
    for &(u, v, lat, bits) in &arcs.list[..arcs.real] {
        let d = (start[v] - start[u] - lat) as u64;
        let dp = d + p.nodes[u].burst;
        lb += d * bits as u64;
        tb += dp * bits as u64;
        delay.push(d);
        depth.push(dp);
    }
    Ok(BufferSolution {
        start: start.into_iter().map(|s| s as u64).collect(),
        delay,
        depth,
        latency_bits: lb,
        total_bits: tb,
    })
}

/// Objective coefficient of each start variable: bits in minus bits out.
fn coefficients(n: usize, arcs: &Arcs) -> Vec<i128> {
    let mut a = vec![0i128; n];
    for &(u, v, _, b) in &arcs.list {
        a[v] += b;
        a[u] -= b;
    }
    a
}

/// Solves the allocation through the LP dual: `max sum(lat_e f_e)` subject to
/// per-node flow balance `in - out = a_v`. The start delays are the dual prices.
pub fn solve_buffers(p: &BufferProblem) -> Result<BufferSolution, BufferError> {
    let arcs = build_arcs(p)?;
    let n = p.nodes.len();
    let a = coefficients(n, &arcs);
    let rows: Vec<usize> = (0..n).filter(|&v| v != p.root).collect();
    let m = arcs.list.len();
    let mut mat = vec![vec![Q::from_integer(0); m]; rows.len()];
    for (j, &(u, v, _, _)) in arcs.list.iter().enumerate() {
        for (i, &r) in rows.iter().enumerate() {
            if r == v {
                mat[i][j] += Q::from_integer(1);
            }
            if r == u {
                mat[i][j] -= Q::from_integer(1);
            }
        }
    }
    let c: Vec<Q> = arcs.list.iter().map(|a| Q::from_integer(a.2)).collect();
    let b: Vec<Q> = rows.iter().map(|&v| Q::from_integer(a[v])).collect();
    let y = match maximize_eq(&c, &mat, &b) {
        LpOutcome::Optimal { y, .. } => y,
        other => return Err(BufferError::NotIntegral(format!("dual LP ended {other:?}"))),
    };
    let mut start = vec![0i128; n];
    for (i, &v) in rows.iter().enumerate() {
        if !y[i].is_integer() {
            return Err(BufferError::NotIntegral(format!(
                "start of node {v} is {}",
                y[i]
            )));
        }
        start[v] = y[i].to_integer();
    }
    finish(p, &arcs, start)
}

/// Same contract as [`solve_buffers`], via min-cost flow: route the balance
/// `a_v` with arc costs `-lat_e`, then read start delays off the residual
/// shortest-path potentials.
pub fn solve_buffers_via_mincost_flow(p: &BufferProblem) -> Result<BufferSolution, BufferError> {
    let arcs = build_arcs(p)?;
    let n = p.nodes.len();
    let a = coefficients(n, &arcs);
    let (s, t) = (n, n + 1);
    let mut g = Network::new(n + 2);
    let total: i128 = arcs.list.iter().map(|x| x.3).sum::<i128>() + 1;
    for &(u, v, lat, _) in &arcs.list {
        g.add_arc(u, v, total as i64, -(lat as i64));
    }
    // a_v is the required net inflow; the coefficients sum to zero
    let mut want = 0i64;
    for (v, &bal) in a.iter().enumerate() {
        if bal > 0 {
            g.add_arc(v, t, bal as i64, 0);
            want += bal as i64;
        } else if bal < 0 {
            g.add_arc(s, v, (-bal) as i64, 0);
        }
    }
    let (sent, _) = g.min_cost_flow(s, t, want);
    if sent != want {
        return Err(BufferError::NotIntegral(
            "flow balance could not be routed".into(),
        ));
    }
    let dist = g.residual_distances(p.root, &[s, t]);
    let mut start = vec![0i128; n];
    for v in 0..n {
        let d = dist[v]
            .ok_or_else(|| BufferError::NotIntegral(format!("node {v} unreachable from root")))?;
        start[v] = -(d as i128);
    }
    finish(p, &arcs, start)
}

/// Replaces FIFO depths on selected edges (manual allocation).
pub fn apply_overrides(
    p: &BufferProblem,
    sol: &mut BufferSolution,
    overrides: &BTreeMap<usize, u64>,
) -> Result<(), BufferError> {
    for (&e, &d) in overrides {
        if e >= sol.depth.len() {
            return Err(BufferError::UnknownEdge(e));
        }
        sol.depth[e] = d;
    }
    sol.total_bits = sol
        .depth
        .iter()
        .zip(&p.edges)
        .map(|(d, e)| d * e.bits)
        .sum();
    Ok(())
}

/// Effective `(latency, extra depth)` of a node whose output may run `burst`
/// tokens ahead of its ideal trace.
pub fn burst_pad(latency: u64, burst: u64) -> (u64, u64) {
    (latency, burst)
}

/// Depth rounded up to a power of two, as a RAM would be sized.
pub fn ram_depth(depth: u64) -> u64 {
    if depth == 0 {
        0
    } else {
        depth.next_power_of_two()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(l: u64) -> BufNode {
        BufNode {
            latency: l,
            burst: 0,
        }
    }

    fn edge(from: usize, to: usize, bits: u64) -> BufEdge {
        BufEdge { from, to, bits }
    }

    #[test]
    fn chain_needs_no_buffering() {
        let p = BufferProblem {
            nodes: vec![node(1), node(3), node(2), node(0)],
            edges: vec![edge(0, 1, 8), edge(1, 2, 8), edge(2, 3, 8)],
            root: 0,
        };
        for sol in [
            solve_buffers(&p).unwrap(),
            solve_buffers_via_mincost_flow(&p).unwrap(),
        ] {
            assert_eq!(sol.start, vec![0, 1, 4, 6]);
            assert_eq!(sol.latency_bits, 0);
        }
    }

    #[test]
    fn diamond_buffers_short_branch() {
        // 0 -> A(10) -> 3, 0 -> B(2) -> 3
        let p = BufferProblem {
            nodes: vec![node(0), node(10), node(2), node(0)],
            edges: vec![edge(0, 1, 8), edge(0, 2, 8), edge(1, 3, 8), edge(2, 3, 8)],
            root: 0,
        };
        for sol in [
            solve_buffers(&p).unwrap(),
            solve_buffers_via_mincost_flow(&p).unwrap(),
        ] {
            assert_eq!(sol.latency_bits, 8 * 8);
            assert_eq!(sol.delay[3] + sol.delay[1], 8);
        }
    }

    #[test]
    fn burst_adds_depth() {
        let mut nodes = vec![node(1), node(2), node(0)];
        nodes[1].burst = 5;
        let p = BufferProblem {
            nodes,
            edges: vec![edge(0, 1, 8), edge(1, 2, 16)],
            root: 0,
        };
        let sol = solve_buffers(&p).unwrap();
        assert_eq!(sol.depth, vec![0, 5]);
        assert_eq!(sol.total_bits, 80);
    }

    #[test]
    fn rejects_cycles() {
        let p = BufferProblem {
            nodes: vec![node(0), node(1), node(1)],
            edges: vec![edge(0, 1, 8), edge(1, 2, 8), edge(2, 1, 8)],
            root: 0,
        };
        assert!(matches!(solve_buffers(&p), Err(BufferError::Cycle(_))));
    }
}
