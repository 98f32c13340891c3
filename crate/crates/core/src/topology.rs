//! Device coupling graphs and fidelity-aware routing between qubit pairs.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, VecDeque};
use std::path::Path;

const FIDELITY_TIE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub fidelity: f64,
}

/// Qubit interaction graph. Edges are usable in both directions; when a pair
/// is listed twice the higher fidelity is kept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub n: usize,
    pub edges: Vec<Edge>,
    #[serde(default)]
    pub q1_fidelity: Vec<f64>,
}

impl Topology {
    pub fn new(n: usize, edges: Vec<Edge>) -> Result<Self> {
        let topo = Self { n, edges, q1_fidelity: vec![1.0; n] };
        topo.validate()?;
        Ok(topo)
    }

    /// Linear chain `0 – 1 – … – n−1` with unit fidelities.
    pub fn line(n: usize) -> Self {
        let edges = (1..n).map(|i| Edge { a: i - 1, b: i, fidelity: 1.0 }).collect();
        Self { n, edges, q1_fidelity: vec![1.0; n] }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let topo: Topology = serde_json::from_str(&text)?;
        topo.validate()?;
        Ok(topo)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |f: f64| f > 0.0 && f <= 1.0;
        for e in &self.edges {
            if e.a >= self.n || e.b >= self.n || e.a == e.b {
                return Err(Error::InvalidConfig(format!("bad edge {}-{}", e.a, e.b)));
            }
            if !ok(e.fidelity) {
                return Err(Error::InvalidConfig(format!(
                    "edge {}-{} fidelity {} outside (0,1]",
                    e.a, e.b, e.fidelity
                )));
            }
        }
        if !self.q1_fidelity.is_empty() && self.q1_fidelity.len() != self.n {
            return Err(Error::InvalidConfig("q1_fidelity length differs from n".into()));
        }
        if let Some(f) = self.q1_fidelity.iter().find(|&&f| !ok(f)) {
            return Err(Error::InvalidConfig(format!("one-qubit fidelity {f} outside (0,1]")));
        }
        Ok(())
    }

    /// Sorted adjacency lists with the best fidelity per neighbour.
    fn adjacency(&self) -> Vec<BTreeMap<usize, f64>> {
        let mut adj = vec![BTreeMap::new(); self.n];
        for e in &self.edges {
            for (u, v) in [(e.a, e.b), (e.b, e.a)] {
                let slot = adj[u].entry(v).or_insert(e.fidelity);
                *slot = f64::max(*slot, e.fidelity);
            }
        }
        adj
    }

    /// Every ordered pair `(a, b)` joined by an edge, sorted.
    pub fn directed_pairs(&self) -> Vec<(usize, usize)> {
        let adj = self.adjacency();
        let mut pairs: Vec<_> = adj
            .iter()
            .enumerate()
            .flat_map(|(u, nb)| nb.keys().map(move |&v| (u, v)))
            .collect();
        pairs.sort_unstable();
        pairs
    }

    /// Every ordered pair of distinct qubits that are connected by some path.
    pub fn all_connected_pairs(&self) -> Vec<(usize, usize)> {
        let adj = self.adjacency();
        let mut out = Vec::new();
        for a in 0..self.n {
            let dist = bfs(&adj, a);
            out.extend((0..self.n).filter(|&b| b != a && dist[b].is_some()).map(|b| (a, b)));
        }
        out
    }

    pub fn is_adjacent(&self, a: usize, b: usize) -> bool {
        self.edges.iter().any(|e| (e.a, e.b) == (a, b) || (e.a, e.b) == (b, a))
    }

    /// Among the shortest paths from `a` to `b`, the one with the largest sum
    /// of edge fidelities; remaining ties go to the lexicographically smallest
    /// qubit sequence.
    pub fn best_path(&self, a: usize, b: usize) -> Result<Vec<usize>> {
        if a >= self.n || b >= self.n || a == b {
            return Err(Error::InvalidConfig(format!("invalid routing endpoints {a}, {b}")));
        }
        let adj = self.adjacency();
        let dist = bfs(&adj, b);
        let Some(total) = dist[a] else {
            return Err(Error::NoPath(a, b));
        };

        // best[v] = (fidelity sum, path v..b) over shortest paths, filled by
        // increasing distance to b.
        let mut best: Vec<Option<(f64, Vec<usize>)>> = vec![None; self.n];
        best[b] = Some((0.0, vec![b]));
        for k in 1..=total {
            for v in (0..self.n).filter(|&v| dist[v] == Some(k)) {
                let mut choice: Option<(f64, Vec<usize>)> = None;
                for (&u, &f) in &adj[v] {
                    if dist[u] != Some(k - 1) {
                        continue;
                    }
                    let (sum, tail) = best[u].as_ref().expect("filled at previous distance");
                    let cand_sum = sum + f;
                    let mut cand_path = Vec::with_capacity(tail.len() + 1);
                    cand_path.push(v);
                    cand_path.extend_from_slice(tail);
                    let better = match &choice {
                        None => true,
                        Some((s, p)) => {
                            cand_sum > s + FIDELITY_TIE
                                || ((cand_sum - s).abs() <= FIDELITY_TIE && cand_path < *p)
                        }
                    };
                    if better {
                        choice = Some((cand_sum, cand_path));
                    }
                }
                best[v] = choice;
            }
        }
        Ok(best[a].take().expect("a is reachable").1)
    }
}

fn bfs(adj: &[BTreeMap<usize, f64>], start: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; adj.len()];
    dist[start] = Some(0);
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        let d = dist[u].expect("queued nodes have a distance");
        for &v in adj[u].keys() {
            if dist[v].is_none() {
                dist[v] = Some(d + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(a: usize, b: usize, fidelity: f64) -> Edge {
        Edge { a, b, fidelity }
    }

    fn diamond() -> Topology {
        Topology::new(
            5,
            vec![e(0, 1, 0.98), e(1, 2, 0.99), e(2, 3, 0.99), e(1, 4, 0.90), e(4, 3, 0.90)],
        )
        .unwrap()
    }

    #[test]
    fn adjacent_pair_is_direct() {
        assert_eq!(diamond().best_path(0, 1).unwrap(), vec![0, 1]);
    }

    #[test]
    fn prefers_higher_fidelity_route() {
        assert_eq!(diamond().best_path(0, 3).unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(diamond().best_path(3, 0).unwrap(), vec![3, 2, 1, 0]);
    }

    #[test]
    fn ties_break_lexicographically() {
        let t = Topology::new(4, vec![e(0, 2, 0.9), e(2, 3, 0.9), e(0, 1, 0.9), e(1, 3, 0.9)]).unwrap();
        assert_eq!(t.best_path(0, 3).unwrap(), vec![0, 1, 3]);
    }

    #[test]
    fn shorter_path_wins_over_fidelity() {
        let t = Topology::new(
            4,
            vec![e(0, 3, 0.5), e(0, 1, 1.0), e(1, 2, 1.0), e(2, 3, 1.0)],
        )
        .unwrap();
        assert_eq!(t.best_path(0, 3).unwrap(), vec![0, 3]);
    }

    #[test]
    fn disconnected_pair_errors() {
        let t = Topology::new(4, vec![e(0, 1, 1.0), e(2, 3, 1.0)]).unwrap();
        assert!(matches!(t.best_path(0, 3), Err(Error::NoPath(0, 3))));
        assert_eq!(t.all_connected_pairs(), vec![(0, 1), (1, 0), (2, 3), (3, 2)]);
    }

    #[test]
    fn rejects_bad_fidelities() {
        assert!(Topology::new(2, vec![e(0, 1, 0.0)]).is_err());
        assert!(Topology::new(2, vec![e(0, 1, 1.1)]).is_err());
        assert!(Topology::new(2, vec![e(0, 2, 0.5)]).is_err());
    }

    #[test]
    fn json_format() {
        let text = r#"{"n":3,"edges":[{"a":0,"b":1,"fidelity":0.99},{"a":1,"b":2,"fidelity":0.98}],"q1_fidelity":[1.0,1.0,0.999]}"#;
        let t: Topology = serde_json::from_str(text).unwrap();
        t.validate().unwrap();
        assert_eq!(t.directed_pairs(), vec![(0, 1), (1, 0), (1, 2), (2, 1)]);
    }
}
