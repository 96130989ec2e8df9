use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Serializable description of a hardware graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum HardwareSpec {
    Chimera {
        n: usize,
        #[serde(default)]
        broken: Vec<usize>,
    },
}

impl HardwareSpec {
    pub fn chimera(n: usize) -> Self {
        HardwareSpec::Chimera { n, broken: Vec::new() }
    }

    pub fn build(&self) -> Result<HardwareGraph> {
        match self {
            HardwareSpec::Chimera { n, broken } => chimera(*n, broken),
        }
    }
}

/// Position of a qubit in the Chimera lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChimeraCoord {
    pub row: usize,
    pub col: usize,
    /// 0: vertical qubits (coupled to the cell below), 1: horizontal qubits
    /// (coupled to the cell to the right).
    pub side: usize,
    pub index: usize,
}

/// Qubit connectivity with an optional set of broken (masked) qubits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HardwareGraph {
    n: usize,
    working: Vec<bool>,
    adjacency: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
}

/// Chimera graph with `n x n` unit cells, each a K_{4,4}.
pub fn chimera(n: usize, broken: &[usize]) -> Result<HardwareGraph> {
    if n == 0 {
        return Err(Error::input("Chimera grid size must be at least 1"));
    }
    let total = 8 * n * n;
    let mut working = vec![true; total];
    for &b in broken {
        if b >= total {
            return Err(Error::input(format!(
                "broken qubit {b} outside Chimera({n}) with {total} qubits"
            )));
        }
        working[b] = false;
    }
    let mut edges = Vec::new();
    for row in 0..n {
        for col in 0..n {
            for a in 0..4 {
                let v = chimera_node(
                    n,
                    ChimeraCoord {
                        row,
                        col,
                        side: 0,
                        index: a,
                    },
                );
                for b in 0..4 {
                    edges.push((
                        v,
                        chimera_node(
                            n,
                            ChimeraCoord {
                                row,
                                col,
                                side: 1,
                                index: b,
                            },
                        ),
                    ));
                }
                if row + 1 < n {
                    edges.push((
                        v,
                        chimera_node(
                            n,
                            ChimeraCoord {
                                row: row + 1,
                                col,
                                side: 0,
                                index: a,
                            },
                        ),
                    ));
                }
                if col + 1 < n {
                    let h = chimera_node(
                        n,
                        ChimeraCoord {
                            row,
                            col,
                            side: 1,
                            index: a,
                        },
                    );
                    edges.push((
                        h,
                        chimera_node(
                            n,
                            ChimeraCoord {
                                row,
                                col: col + 1,
                                side: 1,
                                index: a,
                            },
                        ),
                    ));
                }
            }
        }
    }
    edges.retain(|&(u, v)| working[u] && working[v]);
    for e in &mut edges {
        *e = (e.0.min(e.1), e.0.max(e.1));
    }
    edges.sort_unstable();
    let mut adjacency = vec![Vec::new(); total];
    for &(u, v) in &edges {
        adjacency[u].push(v);
        adjacency[v].push(u);
    }
    for list in &mut adjacency {
        list.sort_unstable();
    }
    Ok(HardwareGraph {
        n,
        working,
        adjacency,
        edges,
    })
}

/// Canonical id: cell-major, then side, then index within the side.
pub fn chimera_node(n: usize, c: ChimeraCoord) -> usize {
    ((c.row * n + c.col) * 2 + c.side) * 4 + c.index
}

impl HardwareGraph {
    pub fn grid_size(&self) -> usize {
        self.n
    }

    pub fn spec(&self) -> HardwareSpec {
        HardwareSpec::Chimera {
            n: self.n,
            broken: self.broken(),
        }
    }

    /// Total qubit count including broken ones.
    pub fn num_nodes(&self) -> usize {
        self.working.len()
    }

    pub fn num_working(&self) -> usize {
        self.working.iter().filter(|&&w| w).count()
    }

    pub fn broken(&self) -> Vec<usize> {
        (0..self.num_nodes()).filter(|&q| !self.working[q]).collect()
    }

    pub fn is_working(&self, q: usize) -> bool {
        self.working.get(q).copied().unwrap_or(false)
    }

    pub fn neighbors(&self, q: usize) -> &[usize] {
        &self.adjacency[q]
    }

    pub fn degree(&self, q: usize) -> usize {
        self.adjacency[q].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.num_nodes() && self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Edges `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn coord(&self, q: usize) -> ChimeraCoord {
        let index = q % 4;
        let side = (q / 4) % 2;
        let cell = q / 8;
        ChimeraCoord {
            row: cell / self.n,
            col: cell % self.n,
            side,
            index,
        }
    }

    pub fn node(&self, c: ChimeraCoord) -> usize {
        chimera_node(self.n, c)
    }

    /// Number of couplers inside unit cells and between cells.
    pub fn edge_counts(&self) -> (usize, usize) {
        let intra = self.edges.iter().filter(|&&(u, v)| u / 8 == v / 8).count();
        (intra, self.edges.len() - intra)
    }

    /// Two-coloring check over working qubits.
    pub fn is_bipartite(&self) -> bool {
        let mut color = vec![u8::MAX; self.num_nodes()];
        for start in 0..self.num_nodes() {
            if color[start] != u8::MAX || !self.working[start] {
                continue;
            }
            color[start] = 0;
            let mut stack = vec![start];
            while let Some(u) = stack.pop() {
                for &v in &self.adjacency[u] {
                    if color[v] == u8::MAX {
                        color[v] = 1 - color[u];
                        stack.push(v);
                    } else if color[v] == color[u] {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Whether `nodes` induce a connected subgraph.
    pub fn is_connected_subset(&self, nodes: &[usize]) -> bool {
        let Some(&first) = nodes.first() else {
            return false;
        };
        let set: BTreeSet<usize> = nodes.iter().copied().collect();
        let mut seen = BTreeSet::from([first]);
        let mut stack = vec![first];
        while let Some(u) = stack.pop() {
            for &v in &self.adjacency[u] {
                if set.contains(&v) && seen.insert(v) {
                    stack.push(v);
                }
            }
        }
        seen.len() == set.len()
    }

    /// Plain-text edge list: a comment header, then one `u v` pair per line.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!(
            "# chimera n={} nodes={} working={} edges={}\n",
            self.n,
            self.num_nodes(),
            self.num_working(),
            self.edges.len()
        );
        for &(u, v) in &self.edges {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cell_is_k44() {
        let g = chimera(1, &[]).unwrap();
        assert_eq!(g.num_nodes(), 8);
        assert_eq!(g.edges().len(), 16);
        assert!(g.is_bipartite());
        assert_eq!(g.max_degree(), 4);
        assert!(g.has_edge(0, 4) && g.has_edge(3, 7) && !g.has_edge(0, 1));
    }

    #[test]
    fn structural_counts() {
        for n in [1usize, 2, 3, 4, 12] {
            let g = chimera(n, &[]).unwrap();
            assert_eq!(g.num_nodes(), 8 * n * n);
            assert_eq!(g.edge_counts(), (16 * n * n, 8 * n * (n - 1)));
            assert!(g.max_degree() <= 6);
            for q in 0..g.num_nodes() {
                assert_eq!(g.node(g.coord(q)), q);
            }
        }
    }

    #[test]
    fn interior_degree_is_six() {
        let g = chimera(3, &[]).unwrap();
        let centre = g.node(ChimeraCoord {
            row: 1,
            col: 1,
            side: 0,
            index: 2,
        });
        assert_eq!(g.degree(centre), 6);
        assert_eq!(g.max_degree(), 6);
    }

    #[test]
    fn broken_qubits_are_masked() {
        let g = chimera(2, &[0, 9]).unwrap();
        assert_eq!(g.num_working(), 30);
        assert!(g.neighbors(0).is_empty());
        assert!(g.edges().iter().all(|&(u, v)| u != 9 && v != 9));
        assert!(chimera(2, &[32]).is_err());
        assert!(chimera(0, &[]).is_err());
    }

    #[test]
    fn spec_round_trip() {
        let spec = HardwareSpec::Chimera { n: 2, broken: vec![3] };
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(text, r#"{"kind":"chimera","n":2,"broken":[3]}"#);
        let g = serde_json::from_str::<HardwareSpec>(&text).unwrap().build().unwrap();
        assert_eq!(g.spec(), spec);
        assert!(g.to_edge_list().lines().nth(1).is_some());
    }
}
