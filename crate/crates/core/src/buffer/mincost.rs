//! Successive-shortest-path min-cost flow with Bellman-Ford (costs may be negative,
//! the input network must not contain negative cycles).

#[derive(Debug, Clone)]
struct Arc {
    to: usize,
    cap: i64,
    cost: i64,
}

pub struct Network {
    n: usize,
    arcs: Vec<Arc>,
    adj: Vec<Vec<usize>>,
}

impl Network {
    pub fn new(n: usize) -> Network {
        Network {
            n,
            arcs: Vec::new(),
            adj: vec![Vec::new(); n],
        }
    }

    /// Adds `u -> v` and its residual twin; returns the forward arc id.
    pub fn add_arc(&mut self, u: usize, v: usize, cap: i64, cost: i64) -> usize {
        let id = self.arcs.len();
        self.arcs.push(Arc { to: v, cap, cost });
        self.arcs.push(Arc {
            to: u,
            cap: 0,
            cost: -cost,
        });
        self.adj[u].push(id);
        self.adj[v].push(id + 1);
        id
    }

    pub fn flow_on(&self, arc: usize) -> i64 {
        self.arcs[arc + 1].cap
    }

    /// Shortest distances from `src` over residual arcs, optionally ignoring some nodes.
    pub fn residual_distances(&self, src: usize, skip: &[usize]) -> Vec<Option<i64>> {
        let mut dist: Vec<Option<i64>> = vec![None; self.n];
        dist[src] = Some(0);
        for _ in 0..self.n {
            let mut changed = false;
            for u in 0..self.n {
                let Some(du) = dist[u] else { continue };
                if skip.contains(&u) {
                    continue;
                }
                for &a in &self.adj[u] {
                    let arc = &self.arcs[a];
                    if arc.cap <= 0 || skip.contains(&arc.to) {
                        continue;
                    }
                    let nd = du + arc.cost;
                    if dist[arc.to].is_none_or(|d| nd < d) {
                        dist[arc.to] = Some(nd);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        dist
    }

    fn shortest_path(&self, s: usize) -> (Vec<Option<i64>>, Vec<Option<usize>>) {
        let mut dist: Vec<Option<i64>> = vec![None; self.n];
        let mut pred: Vec<Option<usize>> = vec![None; self.n];
        dist[s] = Some(0);
        for _ in 0..self.n {
            let mut changed = false;
            for u in 0..self.n {
                let Some(du) = dist[u] else { continue };
                for &a in &self.adj[u] {
                    let arc = &self.arcs[a];
                    if arc.cap <= 0 {
                        continue;
                    }
                    let nd = du + arc.cost;
                    if dist[arc.to].is_none_or(|d| nd < d) {
                        dist[arc.to] = Some(nd);
                        pred[arc.to] = Some(a);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        (dist, pred)
    }

    /// Sends up to `want` units from `s` to `t`; returns `(sent, cost)`.
    pub fn min_cost_flow(&mut self, s: usize, t: usize, want: i64) -> (i64, i64) {
        let (mut sent, mut cost) = (0, 0);
        while sent < want {
            let (dist, pred) = self.shortest_path(s);
            let Some(dt) = dist[t] else { break };
            let mut push = want - sent;
            let mut v = t;
            while v != s {
                let a = pred[v].expect("path");
                push = push.min(self.arcs[a].cap);
                v = self.arcs[a ^ 1].to;
            }
            let mut v = t;
            while v != s {
                let a = pred[v].expect("path");
                self.arcs[a].cap -= push;
                self.arcs[a ^ 1].cap += push;
                v = self.arcs[a ^ 1].to;
            }
            sent += push;
            cost += push * dt;
        }
        (sent, cost)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn picks_cheaper_route() {
        let mut g = Network::new(4);
        let a = g.add_arc(0, 1, 5, 1);
        let b = g.add_arc(0, 2, 5, 4);
        g.add_arc(1, 3, 3, 1);
        g.add_arc(2, 3, 5, 1);
        let (sent, cost) = g.min_cost_flow(0, 3, 5);
        assert_eq!(sent, 5);
        assert_eq!(cost, 3 * 2 + 2 * 5);
        assert_eq!(g.flow_on(a), 3);
        assert_eq!(g.flow_on(b), 2);
    }
}
