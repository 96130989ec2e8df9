//! Lowering of higher-degree pseudo-Boolean polynomials to QUBO form.
//!
//! A product `x_u x_v` occurring inside terms of degree three or more is
//! replaced by a fresh ancilla `a`, and the penalty
//! `M (x_u x_v - 2 a x_u - 2 a x_v + 3 a)` is added. The penalty vanishes
//! exactly when `a = x_u x_v` and is at least `M` otherwise. Pairs are chosen
//! greedily: the pair co-occurring in the most high-degree terms goes first,
//! ties broken by the lowest index pair.
//!
//! For the substitution of step `k` let `S_k` be the sum of absolute
//! coefficients of the terms it rewrites. If `M > S_k` for every step, any
//! wrong ancilla value costs more than it can gain, so minimising over the
//! ancillas reproduces the original polynomial on every assignment. The
//! reported safe bound is `1 + max_k S_k`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::{PolyObjective, QuboModel};
use crate::scalar::Scalar;

/// One ancilla standing in for the product of two earlier variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ancilla {
    pub index: usize,
    /// The two variables (original or ancilla) whose product it replaces.
    pub factors: (usize, usize),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AncillaMap {
    pub num_original: usize,
    pub ancillas: Vec<Ancilla>,
}

impl AncillaMap {
    pub fn identity(num_original: usize) -> Self {
        Self {
            num_original,
            ancillas: Vec::new(),
        }
    }

    pub fn num_total(&self) -> usize {
        self.num_original + self.ancillas.len()
    }

    /// Appends the consistent ancilla values to an assignment of the original variables.
    pub fn extend(&self, original: &[i8]) -> Vec<i8> {
        assert_eq!(original.len(), self.num_original);
        let mut full = original.to_vec();
        for a in &self.ancillas {
            let v = full[a.factors.0] * full[a.factors.1];
            full.push(v);
        }
        full
    }

    /// True when every ancilla equals the product it replaces.
    pub fn is_consistent(&self, full: &[i8]) -> bool {
        self.ancillas
            .iter()
            .all(|a| full[a.index] == full[a.factors.0] * full[a.factors.1])
    }
}

#[derive(Clone, Debug)]
pub struct Reduction<T> {
    pub qubo: QuboModel<T>,
    pub ancillas: AncillaMap,
    /// Weight actually used for the product penalties.
    pub penalty: T,
    /// Smallest weight for which the reduction is guaranteed sound.
    pub safe_penalty: T,
}

impl<T: Scalar> Reduction<T> {
    pub fn is_sound(&self) -> bool {
        self.penalty >= self.safe_penalty
    }
}

struct Plan<T> {
    high: PolyObjective<T>,
    ancillas: Vec<Ancilla>,
    safe_penalty: T,
}

fn plan<T: Scalar>(p: &PolyObjective<T>) -> Plan<T> {
    let n = p.num_vars();
    let mut terms: BTreeMap<Vec<usize>, T> = p.terms().clone();
    let mut ancillas = Vec::new();
    let mut worst = T::zero();

    loop {
        let mut counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for key in terms.keys().filter(|k| k.len() > 2) {
            for (a, &u) in key.iter().enumerate() {
                for &v in &key[a + 1..] {
                    *counts.entry((u, v)).or_default() += 1;
                }
            }
        }
        let mut best: Option<((usize, usize), usize)> = None;
        for (&pair, &c) in &counts {
            if best.is_none_or(|(_, bc)| c > bc) {
                best = Some((pair, c));
            }
        }
        let Some(((u, v), _)) = best else { break };

        let index = n + ancillas.len();
        let mut rewritten = BTreeMap::new();
        let mut weight = T::zero();
        for (key, c) in std::mem::take(&mut terms) {
            let hit = key.len() > 2 && key.binary_search(&u).is_ok() && key.binary_search(&v).is_ok();
            let key = if hit {
                weight = weight + c.abs();
                let mut k: Vec<usize> = key.into_iter().filter(|&i| i != u && i != v).collect();
                k.push(index);
                k
            } else {
                key
            };
            let sum = rewritten.get(&key).copied().unwrap_or_else(T::zero) + c;
            if sum.is_zero() {
                rewritten.remove(&key);
            } else {
                rewritten.insert(key, sum);
            }
        }
        terms = rewritten;
        if weight > worst {
            worst = weight;
        }
        ancillas.push(Ancilla { index, factors: (u, v) });
    }

    let mut high = PolyObjective::new(n + ancillas.len());
    for (k, c) in terms {
        high.accumulate(k, c);
    }
    Plan {
        high,
        ancillas,
        safe_penalty: T::one() + worst,
    }
}

/// Safe penalty weight for [`reduce_degree`] on this polynomial.
pub fn safe_penalty_bound<T: Scalar>(p: &PolyObjective<T>) -> T {
    plan(p).safe_penalty
}

/// Reduces `p` to a QUBO using product penalties of weight `penalty_weight`.
///
/// Soundness requires `penalty_weight >= safe_penalty` as reported in the
/// result; smaller weights are accepted but may change the minimum.
pub fn reduce_degree<T: Scalar>(p: &PolyObjective<T>, penalty_weight: T) -> Result<Reduction<T>> {
    if !(penalty_weight > T::zero()) || !penalty_weight.is_finite_value() {
        return Err(Error::input(format!(
            "penalty weight must be positive, got {penalty_weight}"
        )));
    }
    p.validate()?;
    let Plan {
        mut high,
        ancillas,
        safe_penalty,
    } = plan(p);
    let m = penalty_weight;
    let two = T::two();
    let three = two + T::one();
    for a in &ancillas {
        let (u, v) = a.factors;
        high.add_term([u, v], m);
        high.add_term([a.index, u], -(two * m));
        high.add_term([a.index, v], -(two * m));
        high.add_term([a.index], three * m);
    }
    Ok(Reduction {
        qubo: high.to_qubo()?,
        ancillas: AncillaMap {
            num_original: p.num_vars(),
            ancillas,
        },
        penalty: penalty_weight,
        safe_penalty,
    })
}

/// [`reduce_degree`] with the penalty set to the safe bound.
pub fn reduce_degree_auto<T: Scalar>(p: &PolyObjective<T>) -> Result<Reduction<T>> {
    reduce_degree(p, safe_penalty_bound(p))
}
