//! Front ends compiling domain problems into pseudo-Boolean objectives.

mod coloring;
mod eps;
mod planning;
mod scheduling;

pub use coloring::{map_coloring, ColoringInstance};
pub use eps::{map_fault_diagnosis, Diagnosis, EpsNetwork, EpsWeights};
pub use planning::{map_planning, Action, PlanningProblem, PlanningWeights, NO_OP};
pub use scheduling::{map_scheduling, Placement, SchedulingInstance, SchedulingWeights};

use serde::{Deserialize, Serialize};

use crate::chimera::HardwareSpec;
use crate::error::Result;
use crate::ising::{AncillaMap, IsingModel, PolyObjective};
use crate::scalar::Scalar;

/// Meaning of one binary variable.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum VarLabel {
    Color { vertex: usize, color: usize },
    State { var: usize, step: usize },
    Action { action: usize, step: usize },
    Job { job: usize, machine: usize, slot: usize },
    Breaker { index: usize },
    Sensor { index: usize },
    Spin { index: usize },
    Ancilla { factors: (usize, usize) },
}

impl std::fmt::Display for VarLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VarLabel::Color { vertex, color } => write!(f, "x[v{vertex},c{color}]"),
            VarLabel::State { var, step } => write!(f, "x[{var}]@{step}"),
            VarLabel::Action { action, step } => write!(f, "y[{action}]@{step}"),
            VarLabel::Job { job, machine, slot } => write!(f, "x[j{job},m{machine},t{slot}]"),
            VarLabel::Breaker { index: i } => write!(f, "cb{i}"),
            VarLabel::Sensor { index: k } => write!(f, "sensor{k}"),
            VarLabel::Spin { index: i } => write!(f, "s{i}"),
            VarLabel::Ancilla { factors: (u, v) } => write!(f, "anc({u}*{v})"),
        }
    }
}

/// Name registry for the dense variable indices of a compiled problem.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarMap {
    pub labels: Vec<VarLabel>,
    /// Variables substituted by constants during compilation.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fixed: Vec<(usize, bool)>,
}

impl VarMap {
    pub fn new(labels: Vec<VarLabel>) -> Self {
        Self {
            labels,
            fixed: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn name(&self, i: usize) -> String {
        self.labels[i].to_string()
    }

    /// Adds labels for the ancillas introduced by degree reduction.
    pub fn with_ancillas(&self, ancillas: &AncillaMap) -> Self {
        let mut out = self.clone();
        out.labels.extend(
            ancillas
                .ancillas
                .iter()
                .map(|a| VarLabel::Ancilla { factors: a.factors }),
        );
        out
    }
}

/// Ising instance with an optional hardware hint (for hardware-native models).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsingInstance {
    pub model: IsingModel<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hardware: Option<HardwareSpec>,
}

/// Any supported problem, tagged by kind in JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Instance {
    Coloring(ColoringInstance),
    Planning(PlanningProblem),
    Scheduling(SchedulingInstance),
    Eps(EpsNetwork),
    Ising(IsingInstance),
}

/// Output of a mapper: the objective over binary variables and its names.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct Compiled<T> {
    pub objective: PolyObjective<T>,
    pub var_map: VarMap,
}

/// Domain-level reading of an assignment to the original variables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Decoded {
    Coloring {
        colors: Option<Vec<usize>>,
        proper: bool,
    },
    Planning {
        actions: Option<Vec<String>>,
        valid: bool,
    },
    Scheduling {
        placements: Option<Vec<Placement>>,
        feasible: bool,
    },
    Eps {
        diagnosis: Diagnosis,
        consistent: bool,
    },
    Ising {
        spins: Vec<i8>,
    },
}

impl Instance {
    pub fn kind(&self) -> &'static str {
        match self {
            Instance::Coloring(_) => "coloring",
            Instance::Planning(_) => "planning",
            Instance::Scheduling(_) => "scheduling",
            Instance::Eps(_) => "eps",
            Instance::Ising(_) => "ising",
        }
    }

    /// Runs the matching mapper. Ising instances are converted to binary form.
    pub fn compile<T: Scalar>(&self) -> Result<Compiled<T>> {
        let (objective, var_map) = match self {
            Instance::Coloring(c) => {
                let (q, m) = map_coloring(c)?;
                (PolyObjective::from(&q), m)
            }
            Instance::Planning(p) => map_planning(p)?,
            Instance::Scheduling(s) => {
                let (q, m) = map_scheduling(s)?;
                (PolyObjective::from(&q), m)
            }
            Instance::Eps(e) => map_fault_diagnosis(e)?,
            Instance::Ising(i) => {
                i.model.validate()?;
                let n = i.model.num_vars();
                let h: Vec<T> = i.model.h().iter().map(|&v| T::from_f64_lossy(v)).collect();
                let m = IsingModel::from_parts(
                    h,
                    i.model.couplings().iter().map(|(&k, &v)| (k, T::from_f64_lossy(v))),
                    T::from_f64_lossy(i.model.offset()),
                )?;
                (
                    PolyObjective::from(&m.to_qubo()),
                    VarMap::new((0..n).map(|index| VarLabel::Spin { index }).collect()),
                )
            }
        };
        Ok(Compiled { objective, var_map })
    }

    /// Interprets a binary assignment of the original (non-ancilla) variables.
    pub fn decode(&self, bits: &[i8]) -> Decoded {
        match self {
            Instance::Coloring(c) => {
                let colors = c.decode(bits);
                let proper = colors.as_ref().is_some_and(|col| c.is_proper(col));
                Decoded::Coloring { colors, proper }
            }
            Instance::Planning(p) => {
                let plan = p.decode_actions(bits);
                Decoded::Planning {
                    actions: plan
                        .as_ref()
                        .map(|pl| pl.iter().map(|&j| p.action_name(j).to_string()).collect()),
                    valid: p.is_valid_assignment(bits),
                }
            }
            Instance::Scheduling(s) => {
                let placements = s.decode(bits);
                let feasible = placements.as_ref().is_some_and(|pl| s.is_feasible(pl));
                Decoded::Scheduling { placements, feasible }
            }
            Instance::Eps(e) => Decoded::Eps {
                diagnosis: e.decode(bits),
                consistent: e.is_consistent(bits),
            },
            Instance::Ising(_) => Decoded::Ising {
                spins: crate::ising::bits_to_spins(bits),
            },
        }
    }
}
