use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::chimera::{ChimeraCoord, HardwareGraph, HardwareSpec};
use crate::error::{Error, Result};
use crate::parallel::substream;

pub const DEFAULT_EMBED_RETRIES: usize = 32;

/// Assignment of each logical variable to a chain of physical qubits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Embedding {
    /// Chain of logical variable `i`, sorted ascending.
    pub chains: Vec<Vec<usize>>,
    pub hardware: HardwareSpec,
}

#[derive(Serialize, Deserialize)]
struct EmbeddingWire {
    chains: BTreeMap<String, Vec<usize>>,
    hardware: HardwareSpec,
}

impl Serialize for Embedding {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        EmbeddingWire {
            chains: self
                .chains
                .iter()
                .enumerate()
                .map(|(i, c)| (i.to_string(), c.clone()))
                .collect(),
            hardware: self.hardware.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Embedding {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let wire = EmbeddingWire::deserialize(d)?;
        let mut indexed = BTreeMap::new();
        for (key, mut chain) in wire.chains {
            let i: usize = key
                .parse()
                .map_err(|_| D::Error::custom(format!("chain key `{key}` is not a variable index")))?;
            chain.sort_unstable();
            indexed.insert(i, chain);
        }
        if indexed.keys().enumerate().any(|(pos, &i)| pos != i) {
            return Err(D::Error::custom("chain keys must be the contiguous indices 0..n"));
        }
        Ok(Embedding {
            chains: indexed.into_values().collect(),
            hardware: wire.hardware,
        })
    }
}

fn normalized_edges(num_vars: usize, edges: &[(usize, usize)]) -> Result<Vec<(usize, usize)>> {
    let mut out = BTreeSet::new();
    for &(u, v) in edges {
        if u >= num_vars || v >= num_vars {
            return Err(Error::input(format!("edge ({u}, {v}) outside {num_vars} variables")));
        }
        if u != v {
            out.insert((u.min(v), u.max(v)));
        }
    }
    Ok(out.into_iter().collect())
}

impl Embedding {
    pub fn num_vars(&self) -> usize {
        self.chains.len()
    }

    pub fn num_qubits(&self) -> usize {
        self.chains.iter().map(Vec::len).sum()
    }

    pub fn max_chain_length(&self) -> usize {
        self.chains.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Checks that chains are non-empty, disjoint, made of working qubits,
    /// connected, and that every logical edge is realized by a coupler.
    pub fn validate(&self, hw: &HardwareGraph, edges: &[(usize, usize)]) -> Result<()> {
        let mut owner = vec![usize::MAX; hw.num_nodes()];
        for (i, chain) in self.chains.iter().enumerate() {
            if chain.is_empty() {
                return Err(Error::Embedding(format!("chain of variable {i} is empty")));
            }
            for &q in chain {
                if !hw.is_working(q) {
                    return Err(Error::Embedding(format!("variable {i} uses unavailable qubit {q}")));
                }
                if owner[q] != usize::MAX {
                    return Err(Error::Embedding(format!(
                        "qubit {q} is shared by variables {} and {i}",
                        owner[q]
                    )));
                }
                owner[q] = i;
            }
            if !hw.is_connected_subset(chain) {
                return Err(Error::Embedding(format!("chain of variable {i} is not connected")));
            }
        }
        for (u, v) in normalized_edges(self.num_vars(), edges)? {
            if !self.chains[u]
                .iter()
                .any(|&q| hw.neighbors(q).iter().any(|&r| owner[r] == v))
            {
                return Err(Error::Embedding(format!(
                    "no coupler between the chains of {u} and {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Seeded heuristic minor embedding.
///
/// Each attempt places every variable with overlapping chains allowed, then
/// repeatedly rips up and reroutes one chain at a time against qubit costs
/// that grow exponentially with how many other chains use a qubit, until no
/// qubit is shared. Attempts with derived seeds run in parallel and the
/// lowest-numbered success wins, so the result depends only on `seed`.
pub fn find_embedding(num_vars: usize, edges: &[(usize, usize)], hw: &HardwareGraph, seed: u64) -> Result<Embedding> {
    find_embedding_with_retries(num_vars, edges, hw, seed, DEFAULT_EMBED_RETRIES)
}

pub fn find_embedding_with_retries(
    num_vars: usize,
    edges: &[(usize, usize)],
    hw: &HardwareGraph,
    seed: u64,
    retries: usize,
) -> Result<Embedding> {
    let edges = normalized_edges(num_vars, edges)?;
    if num_vars > hw.num_working() {
        return Err(Error::Embedding(format!(
            "{num_vars} variables cannot fit on {} working qubits",
            hw.num_working()
        )));
    }
    let mut adj = vec![Vec::new(); num_vars];
    for &(u, v) in &edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let found = (0..retries.max(1) as u64)
        .into_par_iter()
        .find_map_first(|attempt| Router::new(&adj, hw, substream(seed, "embed", attempt)).run());
    let chains = found.ok_or_else(|| {
        Error::Embedding(format!(
            "no embedding of {num_vars} variables / {} edges found in {} attempts",
            edges.len(),
            retries.max(1)
        ))
    })?;
    let emb = Embedding {
        chains,
        hardware: hw.spec(),
    };
    emb.validate(hw, &edges)?;
    Ok(emb)
}

const NONE: usize = usize::MAX;
const MAX_PASSES: usize = 160;
const REFINE_PASSES: usize = 4;
const INITIAL_PRESENT: f64 = 0.5;
const PRESENT_GROWTH: f64 = 1.3;
const MAX_PRESENT: f64 = 1e4;

struct Router<'a, R> {
    adj: &'a [Vec<usize>],
    hw: &'a HardwareGraph,
    rng: R,
    chains: Vec<Vec<usize>>,
    usage: Vec<u32>,
    history: Vec<f64>,
    /// Random tie-breaking jitter per qubit, far below any integer cost gap.
    jitter: Vec<f64>,
    dist: Vec<f64>,
    parent: Vec<usize>,
}

impl<'a, R: Rng> Router<'a, R> {
    fn new(adj: &'a [Vec<usize>], hw: &'a HardwareGraph, mut rng: R) -> Self {
        let nq = hw.num_nodes();
        let jitter = (0..nq).map(|_| rng.random::<f64>() * 1e-3).collect();
        Router {
            adj,
            hw,
            rng,
            chains: vec![Vec::new(); adj.len()],
            usage: vec![0; nq],
            history: vec![0.0; nq],
            jitter,
            dist: vec![0.0; nq],
            parent: vec![NONE; nq],
        }
    }

    fn run(mut self) -> Option<Vec<Vec<usize>>> {
        let mut order = self.initial_order();
        for &v in &order {
            self.reroute(v, Some(INITIAL_PRESENT))?;
        }
        let mut pass = 0;
        while !self.overlap_free() {
            if pass == MAX_PASSES {
                return None;
            }
            for (h, &u) in self.history.iter_mut().zip(&self.usage) {
                *h += f64::from(u.saturating_sub(1));
            }
            let present = (INITIAL_PRESENT * PRESENT_GROWTH.powi(pass as i32)).min(MAX_PRESENT);
            shuffle(&mut order, &mut self.rng);
            for &v in &order {
                self.reroute(v, Some(present))?;
            }
            pass += 1;
        }
        // Shorten chains without ever reintroducing overlap.
        for _ in 0..REFINE_PASSES {
            shuffle(&mut order, &mut self.rng);
            for &v in &order {
                self.reroute(v, None)?;
            }
        }
        prune_chains(&mut self.chains, self.hw, self.adj);
        Some(self.chains)
    }

    /// Breadth-first order from random starts, so each variable after the
    /// first in its component has an already placed neighbour.
    fn initial_order(&mut self) -> Vec<usize> {
        let n = self.adj.len();
        let mut starts: Vec<usize> = (0..n).collect();
        shuffle(&mut starts, &mut self.rng);
        let mut seen = vec![false; n];
        let mut order = Vec::with_capacity(n);
        for s in starts {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                order.push(v);
                let mut next: Vec<usize> = self.adj[v].iter().copied().filter(|&u| !seen[u]).collect();
                shuffle(&mut next, &mut self.rng);
                for u in next {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
        order
    }

    fn overlap_free(&self) -> bool {
        self.usage.iter().all(|&u| u <= 1)
    }

    /// Negotiated congestion cost: a qubit gets dearer with every chain
    /// currently on it and with how often it has been contested before.
    /// Without a congestion factor, occupied qubits are forbidden.
    fn cost(&self, q: usize, present: Option<f64>) -> f64 {
        if !self.hw.is_working(q) {
            return f64::INFINITY;
        }
        match present {
            Some(p) => (1.0 + self.history[q]) * (1.0 + p * f64::from(self.usage[q])) + self.jitter[q],
            None if self.usage[q] > 0 => f64::INFINITY,
            None => 1.0 + self.jitter[q],
        }
    }

    /// Replaces the chain of `v` by a cheapest tree touching every placed
    /// neighbour chain.
    fn reroute(&mut self, v: usize, present: Option<f64>) -> Option<()> {
        for &q in &self.chains[v] {
            self.usage[q] -= 1;
        }
        self.chains[v].clear();
        let nq = self.hw.num_nodes();
        let targets: Vec<usize> = self.adj[v]
            .iter()
            .copied()
            .filter(|&u| !self.chains[u].is_empty())
            .collect();
        let cost: Vec<f64> = (0..nq).map(|q| self.cost(q, present)).collect();

        let chain = if targets.is_empty() {
            let root = (0..nq)
                .filter(|&q| cost[q].is_finite())
                .min_by(|&a, &b| cost[a].total_cmp(&cost[b]).then(a.cmp(&b)))?;
            vec![root]
        } else {
            let mut total = vec![0.0f64; nq];
            let mut trees = Vec::with_capacity(targets.len());
            for &u in &targets {
                self.dijkstra(&self.chains[u].clone(), &cost);
                for q in 0..nq {
                    total[q] += if cost[q].is_finite() {
                        self.dist[q] - cost[q]
                    } else {
                        f64::INFINITY
                    };
                }
                trees.push(self.parent.clone());
            }
            let root = (0..nq)
                .filter(|&q| total[q].is_finite())
                .min_by(|&a, &b| (total[a] + cost[a]).total_cmp(&(total[b] + cost[b])).then(a.cmp(&b)))?;
            let mut chain = BTreeSet::from([root]);
            for tree in &trees {
                let mut q = root;
                while tree[q] != NONE {
                    q = tree[q];
                    chain.insert(q);
                }
            }
            chain.into_iter().collect()
        };
        for &q in &chain {
            self.usage[q] += 1;
        }
        self.chains[v] = chain;
        Some(())
    }

    /// Node-weighted shortest paths from the qubits adjacent to `source`.
    /// `dist[q]` includes the cost of `q`; `parent` points back toward the
    /// source chain and is `NONE` at path starts.
    fn dijkstra(&mut self, source: &[usize], cost: &[f64]) {
        self.dist.iter_mut().for_each(|d| *d = f64::INFINITY);
        self.parent.iter_mut().for_each(|p| *p = NONE);
        let mut heap = BinaryHeap::new();
        for &c in source {
            for &q in self.hw.neighbors(c) {
                if cost[q] < self.dist[q] {
                    self.dist[q] = cost[q];
                    heap.push(Reverse((Key(cost[q]), q)));
                }
            }
        }
        while let Some(Reverse((Key(d), x))) = heap.pop() {
            if d > self.dist[x] {
                continue;
            }
            for &y in self.hw.neighbors(x) {
                let nd = d + cost[y];
                if nd < self.dist[y] {
                    self.dist[y] = nd;
                    self.parent[y] = x;
                    heap.push(Reverse((Key(nd), y)));
                }
            }
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Key(f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

fn shuffle<T, R: Rng>(items: &mut [T], rng: &mut R) {
    use rand::seq::SliceRandom;
    items.shuffle(rng);
}

/// Deterministic embedding of the complete graph K_N on Chimera(n), N <= 4n.
///
/// Variable `k` lives in block `b = k / 4` at index `k % 4`: vertical qubits
/// down column `b` from row `b`, horizontal qubits along row `b` up to
/// column `b`. Two chains with blocks `b <= b'` cross in cell `(b', b)`.
/// Redundant qubits are pruned afterwards.
pub fn clique_embedding(num_vars: usize, hw: &HardwareGraph) -> Result<Embedding> {
    let n = hw.grid_size();
    if num_vars > 4 * n {
        return Err(Error::Embedding(format!(
            "complete graph on {num_vars} variables needs Chimera({}) or larger, have Chimera({n})",
            num_vars.div_ceil(4)
        )));
    }
    if num_vars == 0 {
        return Ok(Embedding {
            chains: Vec::new(),
            hardware: hw.spec(),
        });
    }
    let last_block = (num_vars - 1) / 4;
    let mut chains: Vec<Vec<usize>> = (0..num_vars)
        .map(|k| {
            let (b, index) = (k / 4, k % 4);
            let vertical = (b..=last_block).map(|row| ChimeraCoord {
                row,
                col: b,
                side: 0,
                index,
            });
            let horizontal = (0..=b).map(|col| ChimeraCoord {
                row: b,
                col,
                side: 1,
                index,
            });
            let mut chain: Vec<usize> = vertical.chain(horizontal).map(|c| hw.node(c)).collect();
            chain.sort_unstable();
            chain
        })
        .collect();
    if let Some(q) = chains.iter().flatten().find(|&&q| !hw.is_working(q)) {
        return Err(Error::Embedding(format!("clique layout needs broken qubit {q}")));
    }
    let edges: Vec<(usize, usize)> = (0..num_vars)
        .flat_map(|i| (i + 1..num_vars).map(move |j| (i, j)))
        .collect();
    let adj: Vec<Vec<usize>> = (0..num_vars)
        .map(|i| (0..num_vars).filter(|&j| j != i).collect())
        .collect();
    prune_chains(&mut chains, hw, &adj);
    let emb = Embedding {
        chains,
        hardware: hw.spec(),
    };
    emb.validate(hw, &edges)?;
    Ok(emb)
}

/// Drops qubits (highest id first) whose removal keeps every chain
/// connected and every logical edge realized.
fn prune_chains(chains: &mut [Vec<usize>], hw: &HardwareGraph, adj: &[Vec<usize>]) {
    let touches = |a: &[usize], b: &[usize]| a.iter().any(|&q| b.iter().any(|&r| hw.has_edge(q, r)));
    let mut changed = true;
    while changed {
        changed = false;
        for i in 0..chains.len() {
            for pos in (0..chains[i].len()).rev() {
                if chains[i].len() == 1 {
                    break;
                }
                let mut trial = chains[i].clone();
                trial.remove(pos);
                let ok = hw.is_connected_subset(&trial) && adj[i].iter().all(|&j| touches(&trial, &chains[j]));
                if ok {
                    chains[i] = trial;
                    changed = true;
                }
            }
        }
    }
}
