//! Exhaustive ground-state search, the oracle behind most tests.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ising::{Domain, EnergyModel, IsingModel};
use crate::scalar::Scalar;

pub const DEFAULT_BRUTE_FORCE_CAP: usize = 24;

/// Assignments are enumerated in Gray-code chunks of this many states; each
/// chunk starts from an exact evaluation.
const CHUNK_BITS: u32 = 14;

#[derive(Clone, Debug, PartialEq)]
pub struct GroundStates<T> {
    pub min_energy: T,
    /// Every assignment within the scalar's tie tolerance of the minimum,
    /// in the model's domain, sorted ascending.
    pub states: Vec<Vec<i8>>,
}

pub fn brute_force<T: Scalar, M: EnergyModel<T> + Sync>(model: &M) -> Result<GroundStates<T>> {
    brute_force_with_cap(model, DEFAULT_BRUTE_FORCE_CAP)
}

pub fn brute_force_with_cap<T: Scalar, M: EnergyModel<T> + Sync>(model: &M, cap: usize) -> Result<GroundStates<T>> {
    let n = model.num_vars();
    if n > cap || n > 31 {
        return Err(Error::Capacity { needed: n, cap });
    }
    let tol = T::tie_tolerance();
    let window = tol + tol + tol;
    let total: u64 = 1 << n;
    let chunk = 1u64 << CHUNK_BITS.min(n as u32);
    let ising = model.ising_form();
    let domain = M::DOMAIN;

    let to_values = |gray: u64| -> Vec<i8> {
        (0..n)
            .map(|b| {
                let bit = ((gray >> b) & 1) as i8;
                match domain {
                    Domain::Binary => bit,
                    Domain::Spin => 2 * bit - 1,
                }
            })
            .collect()
    };

    let per_chunk: Vec<(T, Vec<u64>)> = (0..total / chunk)
        .into_par_iter()
        .map(|c| {
            let start = c * chunk;
            match &ising {
                Some(m) => scan_ising(m, start, chunk, window),
                None => scan_generic(model, start, chunk, window, &to_values),
            }
        })
        .collect();

    let approx_min = per_chunk
        .iter()
        .map(|(m, _)| *m)
        .fold(None, |acc: Option<T>, m| match acc {
            Some(a) if a <= m => Some(a),
            _ => Some(m),
        })
        .expect("at least one chunk");

    let mut candidates: Vec<(Vec<i8>, T)> = per_chunk
        .into_iter()
        .flat_map(|(_, idx)| idx)
        .map(|gray| {
            let v = to_values(gray);
            let e = model.energy_unchecked(&v);
            (v, e)
        })
        .filter(|(_, e)| *e <= approx_min + window)
        .collect();

    let min_energy = candidates
        .iter()
        .map(|(_, e)| *e)
        .fold(None, |acc: Option<T>, e| match acc {
            Some(a) if a <= e => Some(a),
            _ => Some(e),
        })
        .expect("minimum is always a candidate");
    candidates.retain(|(_, e)| *e <= min_energy + tol);
    let mut states: Vec<Vec<i8>> = candidates.into_iter().map(|(v, _)| v).collect();
    states.sort();
    Ok(GroundStates { min_energy, states })
}

fn keep_candidate<T: Scalar>(best: &mut T, list: &mut Vec<(T, u64)>, e: T, gray: u64, window: T) {
    if e < *best {
        *best = e;
        let cutoff = e + window;
        list.retain(|(x, _)| *x <= cutoff);
    }
    if e <= *best + window {
        list.push((e, gray));
    }
}

fn scan_ising<T: Scalar>(m: &IsingModel<T>, start: u64, len: u64, window: T) -> (T, Vec<u64>) {
    let n = m.num_vars();
    let adj = m.adjacency();
    let gray0 = start ^ (start >> 1);
    let mut s: Vec<i8> = (0..n).map(|b| if (gray0 >> b) & 1 == 1 { 1 } else { -1 }).collect();
    let mut field: Vec<T> = (0..n)
        .map(|i| {
            adj[i]
                .iter()
                .fold(m.h()[i], |acc, &(j, v)| if s[j] > 0 { acc + v } else { acc - v })
        })
        .collect();
    let mut e = m.energy_unchecked(&s);
    let mut best = e;
    let mut list = vec![(e, gray0)];
    for i in start + 1..start + len {
        let k = i.trailing_zeros() as usize;
        let two = T::two();
        // flipping s_k changes the energy by -2 s_k f_k
        e = if s[k] > 0 {
            e - two * field[k]
        } else {
            e + two * field[k]
        };
        s[k] = -s[k];
        for &(j, v) in &adj[k] {
            field[j] = if s[k] > 0 {
                field[j] + two * v
            } else {
                field[j] - two * v
            };
        }
        keep_candidate(&mut best, &mut list, e, i ^ (i >> 1), window);
    }
    (best, list.into_iter().map(|(_, g)| g).collect())
}

fn scan_generic<T: Scalar, M: EnergyModel<T>>(
    model: &M,
    start: u64,
    len: u64,
    window: T,
    to_values: &impl Fn(u64) -> Vec<i8>,
) -> (T, Vec<u64>) {
    let mut best: Option<T> = None;
    let mut list = Vec::new();
    for i in start..start + len {
        let gray = i ^ (i >> 1);
        let e = model.energy_unchecked(&to_values(gray));
        let b = best.get_or_insert(e);
        keep_candidate(b, &mut list, e, gray, window);
    }
    (
        best.expect("non-empty chunk"),
        list.into_iter().map(|(_, g)| g).collect(),
    )
}
