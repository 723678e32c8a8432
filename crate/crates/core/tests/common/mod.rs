//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use pixelflow::buffer::{BufEdge, BufNode, BufferProblem};
use rand::Rng;

/// Every edge set over `n` nodes labelled in topological order, node 0
/// being the root with no inputs.
pub fn all_topologies(n: usize) -> Vec<Vec<(usize, usize)>> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    (0u32..1 << pairs.len())
        .map(|mask| {
            pairs
                .iter()
                .enumerate()
                .filter(|(k, _)| mask >> k & 1 == 1)
                .map(|(_, &p)| p)
                .collect()
        })
        .collect()
}

pub fn problem(latency: &[u64], edges: &[(usize, usize)], bits: &[u64]) -> BufferProblem {
    BufferProblem {
        nodes: latency
            .iter()
            .map(|&l| BufNode {
                latency: l,
                burst: 0,
            })
            .collect(),
        edges: edges
            .iter()
            .zip(bits)
            .map(|(&(from, to), &b)| BufEdge { from, to, bits: b })
            .collect(),
        root: 0,
    }
}

pub fn random_problem(rng: &mut impl Rng, n: usize, density: f64, widths: &[u64]) -> BufferProblem {
    let latency: Vec<u64> = (0..n).map(|_| rng.random_range(0..=10)).collect();
    let mut edges = vec![];
    for j in 1..n {
        for i in 0..j {
            if rng.random_bool(density) {
                edges.push((i, j));
            }
        }
    }
    let bits: Vec<u64> = edges
        .iter()
        .map(|_| widths[rng.random_range(0..widths.len())])
        .collect();
    problem(&latency, &edges, &bits)
}

/// Minimum of `sum((s_to - s_from - L_from) * bits)` over every integer
/// schedule, by enumeration. Nodes must be labelled in topological order.
/// A vertex optimum is fixed by a spanning tree of tight arcs, so no start
/// exceeds the sum of the `n - 1` largest arc latencies.
pub fn exhaustive_min_bits(p: &BufferProblem) -> u64 {
    let n = p.nodes.len();
    let mut lats: Vec<u64> = p.edges.iter().map(|e| p.nodes[e.from].latency).collect();
    lats.sort_unstable_by(|a, b| b.cmp(a));
    let bound: u64 = lats.iter().take(n.saturating_sub(1)).sum();
    let preds: Vec<Vec<usize>> = (0..n)
        .map(|v| {
            p.edges
                .iter()
                .filter(|e| e.to == v)
                .map(|e| e.from)
                .collect()
        })
        .collect();
    let mut s = vec![0u64; n];
    let mut best = u64::MAX;
    fn go(
        v: usize,
        p: &BufferProblem,
        preds: &[Vec<usize>],
        bound: u64,
        s: &mut Vec<u64>,
        best: &mut u64,
    ) {
        if v == p.nodes.len() {
            let cost = p
                .edges
                .iter()
                .map(|e| (s[e.to] - s[e.from] - p.nodes[e.from].latency) * e.bits)
                .sum();
            *best = (*best).min(cost);
            return;
        }
        let lo = preds[v]
            .iter()
            .map(|&u| s[u] + p.nodes[u].latency)
            .max()
            .unwrap_or(0);
        for x in lo..=bound.max(lo) {
            s[v] = x;
            go(v + 1, p, preds, bound, s, best);
        }
    }
    go(1, p, &preds, bound, &mut s, &mut best);
    best
}

/// Cumulative tokens of a module that starts earning `p/q` of a token per
/// cycle at cycle `latency` and emits whenever it holds any unspent
/// credit. Entry `t` is the count after cycle `t`.
pub fn emitted(latency: u64, p: u64, q: u64, horizon: u64) -> Vec<u64> {
    let (mut credit, mut sent) = (0u64, 0u64);
    let mut out = Vec::with_capacity(horizon as usize + 1);
    for t in 0..=horizon {
        if t >= latency {
            credit += p;
        }
        while sent * q < credit {
            sent += 1;
        }
        out.push(sent);
    }
    out
}

/// Random single-input pipeline over `u8[16,16]`. Returns the source and
/// whether it needs a handshake: it does exactly when it changes the
/// element count (pad, crop, downsample) or filters.
pub fn random_pipeline(rng: &mut impl Rng) -> (String, bool) {
    let (mut w, mut h) = (16u32, 16u32);
    let mut body = vec![];
    let mut stream = false;
    let mut cur = "x".to_string();
    let stages = rng.random_range(1..=4);
    for k in 0..stages {
        let v = format!("v{k}");
        // pointwise and stencil stages twice as likely as reshaping ones
        let expr = match rng.random_range(0..12) {
            r @ 6..=8 => r - 6,
            r => r,
        };
        let expr = match expr {
            0 => format!("Map<Rshift<1>>({cur})"),
            1 => format!("Map<Reduce<Max>>(Stencil<-1,1,-1,1>({cur}))"),
            2 => {
                body.push(format!("a{k} = Map<Rshift<1>>({cur});"));
                format!("Map<Max>(Zip({cur}, a{k}))")
            }
            3 if (w + 2) * (h + 2) <= 256 => {
                stream = true;
                (w, h) = (w + 2, h + 2);
                format!("Pad<1,1,1,1>({cur})")
            }
            4 if w >= 8 => {
                stream = true;
                (w, h) = (w - 2, h - 2);
                format!("Crop<1,1,1,1>({cur})")
            }
            5 if w % 2 == 0 && h % 2 == 0 && w >= 8 => {
                stream = true;
                (w, h) = (w / 2, h / 2);
                format!("Downsample<2,2>({cur})")
            }
            _ => format!("Map<Min>(Zip({cur}, {cur}))"),
        };
        body.push(format!("{v} = {expr};"));
        cur = v;
    }
    let ret = if rng.random_bool(0.15) {
        stream = true;
        body.push(format!("m = Map<big>({cur});"));
        format!("Filter<rate=1,burst={}>({cur}, m)", w * h)
    } else {
        cur
    };
    let src = format!(
        "fn big(v: u8) {{ c = Const(u8, 100); return Gt(v, c); }}\nfn main(x: u8[16,16]) {{\n  {}\n  return {ret};\n}}\n",
        body.join("\n  ")
    );
    (src, stream)
}
