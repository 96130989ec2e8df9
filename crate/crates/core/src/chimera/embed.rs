use std::collections::{BTreeSet, VecDeque};
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::chimera::{Embedding, HardwareGraph};
use crate::error::{Error, Result};
use crate::ising::{Domain, IsingModel, Sample, SampleSet};
use crate::parallel::substream;
use crate::scalar::Scalar;

pub const DEFAULT_CHAIN_ALPHA: f64 = 1.5;

/// Physical Ising model over the qubits used by an embedding.
///
/// Physical variables are numbered compactly in ascending hardware-id order;
/// `qubits[p]` is the hardware node behind physical variable `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddedIsing<T> {
    pub physical: IsingModel<T>,
    pub qubits: Vec<usize>,
    /// Chain of each logical variable in physical (compact) indices.
    pub chains: Vec<Vec<usize>>,
    /// Spanning-tree edges carrying the chain coupling, in physical indices.
    pub chain_edges: Vec<(usize, usize)>,
    pub chain_strength: T,
    pub embedding: Embedding,
    pub logical: IsingModel<T>,
}

impl<T: Scalar> EmbeddedIsing<T> {
    pub fn num_physical(&self) -> usize {
        self.qubits.len()
    }

    /// Energy difference between the physical and logical model on any
    /// chain-consistent state: `J_F` times the number of chain edges.
    pub fn chain_offset(&self) -> T {
        self.chain_strength * T::from_usize(self.chain_edges.len()).expect("edge count fits")
    }

    /// Logical spins if every chain is uniform.
    pub fn consistent_logical(&self, spins: &[i8]) -> Option<Vec<i8>> {
        self.chains
            .iter()
            .map(|chain| {
                let first = spins[chain[0]];
                chain.iter().all(|&p| spins[p] == first).then_some(first)
            })
            .collect()
    }

    /// Physical state with every chain set to its logical spin.
    pub fn lift(&self, logical: &[i8]) -> Vec<i8> {
        let mut out = vec![1; self.num_physical()];
        for (chain, &s) in self.chains.iter().zip(logical) {
            for &p in chain {
                out[p] = s;
            }
        }
        out
    }
}

/// Builds the physical model: biases split evenly over each chain, each
/// logical coupling on the lowest-id coupler between the two chains, and
/// `chain_strength` (which must be negative) on a BFS spanning tree of
/// every chain.
pub fn embed_ising<T: Scalar>(
    logical: &IsingModel<T>,
    emb: &Embedding,
    hw: &HardwareGraph,
    chain_strength: T,
) -> Result<EmbeddedIsing<T>> {
    if !(chain_strength < T::zero()) {
        return Err(Error::Parameter(format!(
            "chain strength must be negative, got {chain_strength}"
        )));
    }
    if emb.num_vars() != logical.num_vars() {
        return Err(Error::Embedding(format!(
            "embedding covers {} variables, model has {}",
            emb.num_vars(),
            logical.num_vars()
        )));
    }
    emb.validate(hw, &logical.interaction_edges())?;

    let qubits: Vec<usize> = emb
        .chains
        .iter()
        .flatten()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let compact = |q: usize| qubits.binary_search(&q).expect("qubit belongs to a chain");
    let chains: Vec<Vec<usize>> = emb
        .chains
        .iter()
        .map(|c| c.iter().map(|&q| compact(q)).collect())
        .collect();

    let mut physical = IsingModel::new(qubits.len());
    physical.set_offset(logical.offset());
    for (i, chain) in emb.chains.iter().enumerate() {
        let share = logical.h()[i] / T::from_usize(chain.len()).expect("chain length fits");
        for &q in chain {
            physical.add_h(compact(q), share);
        }
    }
    for (&(i, j), &value) in logical.couplings() {
        let mut best: Option<(usize, usize)> = None;
        for &a in &emb.chains[i] {
            for &b in hw.neighbors(a) {
                if emb.chains[j].binary_search(&b).is_ok() {
                    let e = (a.min(b), a.max(b));
                    best = Some(best.map_or(e, |cur| cur.min(e)));
                }
            }
        }
        let (a, b) = best.ok_or_else(|| Error::Embedding(format!("no coupler between chains {i} and {j}")))?;
        physical.add_coupling(compact(a), compact(b), value);
    }
    let mut chain_edges = Vec::new();
    for chain in &emb.chains {
        for (a, b) in spanning_tree(chain, hw) {
            let e = (compact(a), compact(b));
            physical.add_coupling(e.0, e.1, chain_strength);
            chain_edges.push(e);
        }
    }
    chain_edges.sort_unstable();
    Ok(EmbeddedIsing {
        physical,
        qubits,
        chains,
        chain_edges,
        chain_strength,
        embedding: emb.clone(),
        logical: logical.clone(),
    })
}

fn spanning_tree(chain: &[usize], hw: &HardwareGraph) -> Vec<(usize, usize)> {
    let mut seen = BTreeSet::from([chain[0]]);
    let mut queue = VecDeque::from([chain[0]]);
    let mut tree = Vec::new();
    while let Some(u) = queue.pop_front() {
        for &v in hw.neighbors(u) {
            if chain.binary_search(&v).is_ok() && seen.insert(v) {
                tree.push((u.min(v), u.max(v)));
                queue.push_back(v);
            }
        }
    }
    tree
}

/// How to decode a sample whose chain disagrees internally.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChainBreakStrategy {
    Discard,
    #[default]
    Majority,
}

impl FromStr for ChainBreakStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "discard" => Ok(Self::Discard),
            "majority" => Ok(Self::Majority),
            other => Err(Error::input(format!("unknown chain-break strategy `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Unembedded<T> {
    pub samples: SampleSet<T>,
    /// Reads (counting multiplicity) with at least one broken chain.
    pub broken_reads: u64,
    pub total_reads: u64,
}

impl<T> Unembedded<T> {
    pub fn chain_break_fraction(&self) -> f64 {
        if self.total_reads == 0 {
            0.0
        } else {
            self.broken_reads as f64 / self.total_reads as f64
        }
    }
}

/// Maps physical spin samples to logical ones. Exact majority ties are
/// settled by a coin drawn from `(seed, sample position)`.
pub fn unembed<T: Scalar>(
    samples: &SampleSet<T>,
    embedded: &EmbeddedIsing<T>,
    strategy: ChainBreakStrategy,
    seed: u64,
) -> Result<Unembedded<T>> {
    if samples.domain != Domain::Spin {
        return Err(Error::input("unembedding needs spin-domain samples"));
    }
    let mut out = SampleSet::new(Domain::Spin, samples.provenance.clone());
    let mut broken_reads = 0;
    for (pos, sample) in samples.samples.iter().enumerate() {
        if sample.values.len() != embedded.num_physical() {
            return Err(Error::input(format!(
                "sample has {} spins, embedded model has {}",
                sample.values.len(),
                embedded.num_physical()
            )));
        }
        let mut rng = None;
        let mut broken = false;
        let mut logical = Vec::with_capacity(embedded.chains.len());
        for chain in &embedded.chains {
            let up = chain.iter().filter(|&&p| sample.values[p] > 0).count();
            let down = chain.len() - up;
            if up > 0 && down > 0 {
                broken = true;
            }
            logical.push(match up.cmp(&down) {
                std::cmp::Ordering::Greater => 1,
                std::cmp::Ordering::Less => -1,
                std::cmp::Ordering::Equal => {
                    let r = rng.get_or_insert_with(|| substream(seed, "unembed", pos as u64));
                    if r.random::<bool>() {
                        1
                    } else {
                        -1
                    }
                }
            });
        }
        if broken {
            broken_reads += sample.count;
            if strategy == ChainBreakStrategy::Discard {
                continue;
            }
        }
        let energy = embedded.logical.evaluate(&logical)?;
        out.push(Sample {
            values: logical,
            energy,
            ..sample.clone()
        });
    }
    Ok(Unembedded {
        samples: out,
        broken_reads,
        total_reads: samples.total_count(),
    })
}

/// Heuristic starting point `-alpha * max(|h|, |J|)`; not an optimum.
pub fn suggest_chain_strength<T: Scalar>(logical: &IsingModel<T>, alpha: T) -> Result<T> {
    if !(alpha > T::zero()) {
        return Err(Error::Parameter(format!(
            "chain-strength multiplier must be positive, got {alpha}"
        )));
    }
    let scale = logical.max_abs_coefficient();
    if scale.is_zero() {
        return Err(Error::Degenerate("model has no nonzero biases or couplings".into()));
    }
    Ok(-alpha * scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chimera::chimera;
    use crate::ising::{brute_force, Provenance};

    fn triangle() -> IsingModel<f64> {
        IsingModel::from_parts(vec![0.0; 3], [((0, 1), 0.5), ((0, 2), -0.7), ((1, 2), 0.9)], 0.0).unwrap()
    }

    fn triangle_embedding() -> (HardwareGraph, Embedding) {
        let hw = chimera(1, &[]).unwrap();
        // Variable 0 on the chain {a=0, b=4}, 1 on d=5, 2 on c=1.
        let emb = Embedding {
            chains: vec![vec![0, 4], vec![5], vec![1]],
            hardware: hw.spec(),
        };
        (hw, emb)
    }

    #[test]
    fn triangle_coupling_set() {
        let (hw, emb) = triangle_embedding();
        let e = embed_ising(&triangle(), &emb, &hw, -2.0).unwrap();
        assert_eq!(e.qubits, vec![0, 1, 4, 5]);
        // compact: a=0 -> 0, c=1 -> 1, b=4 -> 2, d=5 -> 3
        let expected = [((0, 2), -2.0), ((0, 3), 0.5), ((1, 2), -0.7), ((1, 3), 0.9)];
        assert_eq!(
            e.physical.couplings().iter().map(|(&k, &v)| (k, v)).collect::<Vec<_>>(),
            expected
        );
        assert_eq!(e.chain_offset(), -2.0);
    }

    #[test]
    fn unit_chains_relabel_the_model() {
        let hw = chimera(1, &[]).unwrap();
        let m = IsingModel::from_parts(vec![0.3, -0.2], [((0, 1), 1.0)], 0.5).unwrap();
        let emb = Embedding {
            chains: vec![vec![6], vec![2]],
            hardware: hw.spec(),
        };
        let e = embed_ising(&m, &emb, &hw, -1.0).unwrap();
        assert_eq!(e.physical.h(), &[-0.2, 0.3]);
        assert_eq!(e.physical.coupling(0, 1), 1.0);
        assert_eq!(e.physical.offset(), 0.5);
        assert!(e.chain_edges.is_empty());
    }

    #[test]
    fn strong_chains_keep_ground_states() {
        let (hw, emb) = triangle_embedding();
        let logical = triangle();
        let e = embed_ising(&logical, &emb, &hw, -2.0 * 0.9).unwrap();
        let phys = brute_force(&e.physical).unwrap();
        let log = brute_force(&logical).unwrap();
        for s in &phys.states {
            let l = e.consistent_logical(s).expect("uniform chains");
            assert!(log.states.contains(&l));
        }
        assert!((phys.min_energy - log.min_energy - e.chain_offset()).abs() < 1e-12);
    }

    #[test]
    fn unembed_strategies() {
        let (hw, emb) = triangle_embedding();
        let e = embed_ising(&triangle(), &emb, &hw, -2.0).unwrap();
        let mut set = SampleSet::new(Domain::Spin, Provenance::default());
        let uniform = e.lift(&[1, -1, 1]);
        let mut split = uniform.clone();
        split[2] = -1;
        for (values, count) in [(uniform, 7), (split, 3)] {
            let energy = e.physical.evaluate(&values).unwrap();
            set.push(Sample {
                values,
                energy,
                count,
                gauge: None,
                read: None,
            });
        }
        let d = unembed(&set, &e, ChainBreakStrategy::Discard, 0).unwrap();
        assert_eq!(d.samples.total_count(), 7);
        assert_eq!(d.broken_reads, 3);
        assert!((d.chain_break_fraction() - 0.3).abs() < 1e-12);
        assert_eq!(d.samples.samples[0].energy, triangle().evaluate(&[1, -1, 1]).unwrap());
        let m1 = unembed(&set, &e, ChainBreakStrategy::Majority, 9).unwrap();
        let m2 = unembed(&set, &e, ChainBreakStrategy::Majority, 9).unwrap();
        assert_eq!(m1, m2);
        assert_eq!(m1.samples.total_count(), 10);
        assert!("vote".parse::<ChainBreakStrategy>().is_err());
    }

    #[test]
    fn chain_strength_suggestion() {
        let m = IsingModel::from_parts(vec![0.2, 0.0], [((0, 1), -1.0)], 0.0).unwrap();
        assert_eq!(suggest_chain_strength(&m, 1.5).unwrap(), -1.5);
        assert!(suggest_chain_strength(&IsingModel::<f64>::new(3), 1.5).is_err());
        let (hw, emb) = triangle_embedding();
        assert!(embed_ising(&triangle(), &emb, &hw, 1.0).is_err());
    }
}
