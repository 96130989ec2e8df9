use serde::{Deserialize, Serialize};

use crate::anneal::Engine;
use crate::error::{Error, Result};
use crate::ising::spins_to_bits;
use crate::mappers::{map_scheduling, SchedulingInstance};
use crate::parallel::derive_seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MakespanResult {
    /// Smallest horizon at which the solver produced a feasible schedule.
    /// An upper bound: the solver may miss feasible schedules at shorter ones.
    pub makespan: usize,
    /// Horizons probed, in order, with their outcome.
    pub probes: Vec<(usize, bool)>,
}

/// Whether `engine` finds a constraint-satisfying schedule with `slots` slots.
pub fn feasible_at(inst: &SchedulingInstance, engine: &Engine, slots: usize) -> Result<bool> {
    let inst = inst.with_slots(slots);
    let (qubo, _) = map_scheduling::<f64>(&inst)?;
    let engine = engine.with_seed(derive_seed(engine.seed(), "makespan", slots as u64));
    let samples = engine.sample(&qubo.to_ising())?;
    Ok(samples.samples.iter().any(|s| {
        inst.decode(&spins_to_bits(&s.values))
            .is_some_and(|placement| inst.is_feasible(&placement))
    }))
}

/// Binary search over the horizon for the shortest one the solver can fill.
/// Feasibility at `t_max` is checked first.
pub fn makespan_binary_search(inst: &SchedulingInstance, engine: &Engine, t_max: usize) -> Result<MakespanResult> {
    if t_max == 0 {
        return Err(Error::input("maximum horizon must be at least 1"));
    }
    inst.with_slots(t_max).validate()?;
    let mut probes = vec![(t_max, feasible_at(inst, engine, t_max)?)];
    if !probes[0].1 {
        return Err(Error::Solver(format!(
            "no feasible schedule found within {t_max} slots"
        )));
    }
    let (mut lo, mut hi) = (1, t_max);
    while lo < hi {
        let mid = (lo + hi) / 2;
        let ok = feasible_at(inst, engine, mid)?;
        probes.push((mid, ok));
        if ok {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(MakespanResult { makespan: hi, probes })
}
