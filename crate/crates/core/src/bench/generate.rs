use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::chimera::{chimera, HardwareSpec};
use crate::error::{Error, Result};
use crate::ising::IsingModel;
use crate::mappers::{
    Action, ColoringInstance, Diagnosis, EpsNetwork, Instance, IsingInstance, PlanningProblem, PlanningWeights,
    SchedulingInstance,
};
use crate::parallel::substream;

pub const INSTANCE_KINDS: [&str; 6] = [
    "coloring",
    "planning",
    "scheduling",
    "eps",
    "random-ising",
    "chimera-native-ising",
];

/// Generator knobs. Each kind reads the fields it needs and falls back to
/// its own defaults for the rest.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenParams {
    /// Vertices (coloring), spins (random-ising), state variables (planning).
    pub n: Option<usize>,
    pub colors: Option<usize>,
    /// Edge probability for coloring and random-ising graphs.
    pub density: Option<f64>,
    pub horizon: Option<usize>,
    pub jobs: Option<usize>,
    pub machines: Option<usize>,
    pub slots: Option<usize>,
    pub branching: Option<usize>,
    pub depth: Option<usize>,
    /// Planted breaker faults for eps instances.
    pub faults: Option<usize>,
    /// Chimera grid size for chimera-native instances.
    pub grid: Option<usize>,
}

/// Deterministic instance of `kind` from `(params, seed)`.
pub fn generate_instance(kind: &str, params: &GenParams, seed: u64) -> Result<Instance> {
    let mut rng = substream(seed, "generate", 0);
    let density = params.density.unwrap_or(1.0);
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::input(format!("density must lie in [0, 1], got {density}")));
    }
    let inst = match kind {
        "coloring" => {
            let n = params.n.unwrap_or(3);
            let edges = random_edges(n, density, &mut rng);
            Instance::Coloring(ColoringInstance::new(n, edges, params.colors.unwrap_or(3)))
        }
        "planning" => Instance::Planning(planning_family(params.n.unwrap_or(3), params.horizon, &mut rng)),
        "scheduling" => {
            let jobs = params.jobs.unwrap_or(3);
            let machines = params.machines.unwrap_or(2);
            let slots = params.slots.unwrap_or(2);
            let mut inst = SchedulingInstance::new(jobs, machines, slots);
            inst.priority = Some(
                (0..jobs)
                    .map(|_| {
                        (0..slots)
                            .map(|t| t as f64 * 0.1 + rng.random_range(0.0..0.1))
                            .collect()
                    })
                    .collect(),
            );
            for a in 0..jobs {
                for b in a + 1..jobs {
                    if rng.random::<f64>() < 0.2 {
                        inst.precedence.push((a, b));
                    }
                }
            }
            Instance::Scheduling(inst)
        }
        "eps" => {
            let net = EpsNetwork::tree(params.branching.unwrap_or(4), params.depth.unwrap_or(2));
            let faults = params.faults.unwrap_or(1).min(net.num_breakers());
            let mut breakers: Vec<usize> = (0..net.num_breakers()).collect();
            breakers.shuffle(&mut rng);
            let mut planted: Vec<usize> = breakers.into_iter().take(faults).collect();
            planted.sort_unstable();
            let plant = Diagnosis {
                faulty_breakers: planted,
                faulty_sensors: Vec::new(),
            };
            Instance::Eps(net.with_readouts_for(&plant))
        }
        "random-ising" => {
            let n = params.n.unwrap_or(16);
            let h = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let couplings: Vec<_> = random_edges(n, density, &mut rng)
                .into_iter()
                .map(|e| (e, rng.random_range(-1.0..=1.0)))
                .collect();
            Instance::Ising(IsingInstance {
                model: IsingModel::from_parts(h, couplings, 0.0)?,
                hardware: None,
            })
        }
        "chimera-native-ising" => {
            let spec = HardwareSpec::chimera(params.grid.unwrap_or(2));
            let hw = spec.build()?;
            let h = (0..hw.num_nodes()).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let couplings: Vec<_> = hw.edges().iter().map(|&e| (e, rng.random_range(-1.0..=1.0))).collect();
            Instance::Ising(IsingInstance {
                model: IsingModel::from_parts(h, couplings, 0.0)?,
                hardware: Some(spec),
            })
        }
        other => {
            return Err(Error::input(format!(
                "unknown instance kind `{other}`; expected one of {}",
                INSTANCE_KINDS.join(", ")
            )))
        }
    };
    Ok(inst)
}

fn random_edges<R: Rng>(n: usize, density: f64, rng: &mut R) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if density >= 1.0 || rng.random::<f64>() < density {
                edges.push((i, j));
            }
        }
    }
    edges
}

/// A chain of `n` switches that must all end up on, in shuffled order: the
/// action turning switch `k` on needs the switch before it in the chain.
fn planning_family<R: Rng>(n: usize, horizon: Option<usize>, rng: &mut R) -> PlanningProblem {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let actions = order
        .iter()
        .enumerate()
        .map(|(pos, &v)| Action {
            name: format!("enable-{v}"),
            preconditions: if pos == 0 { Vec::new() } else { vec![order[pos - 1]] },
            effects: vec![(v, true)],
        })
        .collect();
    PlanningProblem {
        variables: (0..n).map(|v| format!("on-{v}")).collect(),
        initial: vec![false; n],
        goal: (0..n).collect(),
        actions,
        horizon: horizon.unwrap_or(n),
        weights: PlanningWeights::default(),
    }
}

/// Chimera graph of the given size with `count` distinct broken qubits drawn
/// from `seed`.
pub fn random_broken(n: usize, count: usize, seed: u64) -> Result<Vec<usize>> {
    let total = chimera(n, &[])?.num_nodes();
    if count > total {
        return Err(Error::input(format!("cannot break {count} of {total} qubits")));
    }
    let mut all: Vec<usize> = (0..total).collect();
    all.shuffle(&mut substream(seed, "broken", 0));
    let mut out: Vec<usize> = all.into_iter().take(count).collect();
    out.sort_unstable();
    Ok(out)
}
