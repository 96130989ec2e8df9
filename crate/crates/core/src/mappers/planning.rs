//! Time-indexed planning encoding.
//!
//! State bit `x_i^(t)` (t = 0..=L) says whether variable `i` holds after `t`
//! steps; action bit `y_j^(t)` (t = 1..=L) says action `j` runs at step `t`.
//! An explicit no-op is appended to the action list so that exactly one
//! action can run at every step. The objective is the sum of
//!
//! * goal: `w_g sum_{i in goal} (1 - x_i^(L))`
//! * single action: `w_s sum_t (sum_j y_j^(t) - 1)^2`
//! * preconditions: `w_p sum_t sum_j y_j^(t) sum_{i in pre(j)} (1 - x_i^(t-1))`
//! * effects: `w_e sum_t sum_j y_j^(t) sum_{(i,v) in eff(j)} [x_i^(t) != v]`
//! * frame axioms: `w_n sum_t sum_i sum_{j: i not in eff(j)} y_j^(t) xor(x_i^(t-1), x_i^(t))`
//!
//! The frame terms are cubic; initial-state bits are substituted as constants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::PolyObjective;
use crate::mappers::{VarLabel, VarMap};
use crate::scalar::Scalar;

pub const NO_OP: &str = "no-op";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Action {
    pub name: String,
    /// Variables that must be true before the action runs.
    #[serde(default)]
    pub preconditions: Vec<usize>,
    /// `(variable, value)` pairs set by the action.
    #[serde(default)]
    pub effects: Vec<(usize, bool)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlanningWeights {
    pub goal: f64,
    pub precondition: f64,
    pub effect: f64,
    pub no_op: f64,
    pub single_action: f64,
}

impl Default for PlanningWeights {
    fn default() -> Self {
        Self {
            goal: 1.0,
            precondition: 1.0,
            effect: 1.0,
            no_op: 1.0,
            single_action: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanningProblem {
    pub variables: Vec<String>,
    pub initial: Vec<bool>,
    /// Variables required true at the horizon.
    pub goal: Vec<usize>,
    /// User actions; the mapper appends a no-op after these.
    pub actions: Vec<Action>,
    pub horizon: usize,
    #[serde(default)]
    pub weights: PlanningWeights,
}

impl PlanningProblem {
    pub fn validate(&self) -> Result<()> {
        let n = self.variables.len();
        if self.initial.len() != n {
            return Err(Error::input(format!(
                "initial state has {} entries for {n} variables",
                self.initial.len()
            )));
        }
        if self.horizon == 0 {
            return Err(Error::input("planning horizon must be at least 1"));
        }
        if let Some(&g) = self.goal.iter().find(|&&g| g >= n) {
            return Err(Error::input(format!("goal references unknown variable {g}")));
        }
        for a in &self.actions {
            if let Some(&p) = a.preconditions.iter().find(|&&p| p >= n) {
                return Err(Error::input(format!(
                    "action `{}` precondition references unknown variable {p}",
                    a.name
                )));
            }
            for (k, &(i, v)) in a.effects.iter().enumerate() {
                if i >= n {
                    return Err(Error::input(format!(
                        "action `{}` effect references unknown variable {i}",
                        a.name
                    )));
                }
                if a.effects[..k].iter().any(|&(i2, v2)| i2 == i && v2 != v) {
                    return Err(Error::input(format!("action `{}` sets variable {i} both ways", a.name)));
                }
            }
        }
        let w = &self.weights;
        if [w.goal, w.precondition, w.effect, w.no_op, w.single_action]
            .iter()
            .any(|&x| !(x > 0.0))
        {
            return Err(Error::input("planning penalty weights must be positive"));
        }
        Ok(())
    }

    pub fn num_state_vars(&self) -> usize {
        self.variables.len()
    }

    /// Action count including the appended no-op.
    pub fn num_actions(&self) -> usize {
        self.actions.len() + 1
    }

    /// `N (L + 1) + L M`.
    pub fn num_vars(&self) -> usize {
        let (n, m, l) = (self.num_state_vars(), self.num_actions(), self.horizon);
        n * (l + 1) + l * m
    }

    pub fn state_var(&self, var: usize, step: usize) -> usize {
        step * self.num_state_vars() + var
    }

    /// Index of `y_action^(step)`, `step` in `1..=L`.
    pub fn action_var(&self, action: usize, step: usize) -> usize {
        self.num_state_vars() * (self.horizon + 1) + (step - 1) * self.num_actions() + action
    }

    fn action(&self, j: usize) -> Option<&Action> {
        self.actions.get(j)
    }

    fn effects_of(&self, j: usize) -> &[(usize, bool)] {
        self.action(j).map_or(&[], |a| a.effects.as_slice())
    }

    fn preconditions_of(&self, j: usize) -> &[usize] {
        self.action(j).map_or(&[], |a| a.preconditions.as_slice())
    }

    pub fn action_name(&self, j: usize) -> &str {
        self.action(j).map_or(NO_OP, |a| a.name.as_str())
    }

    /// Action index per step, when exactly one action bit is set at every step.
    pub fn decode_actions(&self, bits: &[i8]) -> Option<Vec<usize>> {
        (1..=self.horizon)
            .map(|t| {
                let mut set = (0..self.num_actions()).filter(|&j| bits[self.action_var(j, t)] == 1);
                match (set.next(), set.next()) {
                    (Some(j), None) => Some(j),
                    _ => None,
                }
            })
            .collect()
    }

    /// Forward-simulates `plan` from the initial state. Returns the state
    /// trajectory (`L + 1` states) when every precondition holds and the goal
    /// is reached.
    pub fn simulate(&self, plan: &[usize]) -> Option<Vec<Vec<bool>>> {
        let mut state = self.initial.clone();
        let mut trajectory = vec![state.clone()];
        for &j in plan {
            if j >= self.num_actions() || !self.preconditions_of(j).iter().all(|&p| state[p]) {
                return None;
            }
            for &(i, v) in self.effects_of(j) {
                state[i] = v;
            }
            trajectory.push(state.clone());
        }
        self.goal.iter().all(|&g| state[g]).then_some(trajectory)
    }

    /// True when the assignment encodes a valid plan together with the state
    /// trajectory it produces. Initial-state bits are ignored.
    pub fn is_valid_assignment(&self, bits: &[i8]) -> bool {
        let Some(plan) = self.decode_actions(bits) else {
            return false;
        };
        let Some(traj) = self.simulate(&plan) else {
            return false;
        };
        (1..=self.horizon).all(|t| (0..self.num_state_vars()).all(|i| (bits[self.state_var(i, t)] == 1) == traj[t][i]))
    }

    pub fn initial_fixings(&self) -> Vec<(usize, bool)> {
        self.initial
            .iter()
            .enumerate()
            .map(|(i, &v)| (self.state_var(i, 0), v))
            .collect()
    }
}

pub fn map_planning<T: Scalar>(p: &PlanningProblem) -> Result<(PolyObjective<T>, VarMap)> {
    p.validate()?;
    let nv = p.num_vars();
    let (n, m, horizon) = (p.num_state_vars(), p.num_actions(), p.horizon);
    let w = |x: f64| T::from_f64_lossy(x);
    let x = |i: usize, t: usize| PolyObjective::<T>::variable(nv, p.state_var(i, t));
    let not_x = |i: usize, t: usize| PolyObjective::<T>::complement(nv, p.state_var(i, t));
    let y = |j: usize, t: usize| PolyObjective::<T>::variable(nv, p.action_var(j, t));

    let mut h = PolyObjective::new(nv);
    for &g in &p.goal {
        h.add_assign(&not_x(g, horizon).scaled(w(p.weights.goal)));
    }
    for t in 1..=horizon {
        let mut one_hot = PolyObjective::constant(nv, -T::one());
        for j in 0..m {
            one_hot.add_assign(&y(j, t));
        }
        h.add_assign(&one_hot.product(&one_hot).scaled(w(p.weights.single_action)));

        for j in 0..m {
            let yj = y(j, t);
            for &i in p.preconditions_of(j) {
                h.add_assign(&yj.product(&not_x(i, t - 1)).scaled(w(p.weights.precondition)));
            }
            for &(i, v) in p.effects_of(j) {
                let mismatch = if v { not_x(i, t) } else { x(i, t) };
                h.add_assign(&yj.product(&mismatch).scaled(w(p.weights.effect)));
            }
            for i in (0..n).filter(|&i| !p.effects_of(j).iter().any(|&(e, _)| e == i)) {
                // xor(a, b) = a + b - 2ab
                let (a, b) = (x(i, t - 1), x(i, t));
                let mut xor = a.clone();
                xor.add_assign(&b);
                xor.add_assign(&a.product(&b).scaled(-T::two()));
                h.add_assign(&yj.product(&xor).scaled(w(p.weights.no_op)));
            }
        }
    }
    let h = h.substitute(&p.initial_fixings());

    let mut labels = Vec::with_capacity(nv);
    for step in 0..=horizon {
        labels.extend((0..n).map(|var| VarLabel::State { var, step }));
    }
    for step in 1..=horizon {
        labels.extend((0..m).map(|action| VarLabel::Action { action, step }));
    }
    let mut map = VarMap::new(labels);
    map.fixed = p.initial_fixings();
    Ok((h, map))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising::{brute_force, reduce_degree_auto};

    fn single_var(effect: bool) -> PlanningProblem {
        PlanningProblem {
            variables: vec!["v".into()],
            initial: vec![false],
            goal: vec![0],
            actions: if effect {
                vec![Action {
                    name: "set-v".into(),
                    preconditions: vec![],
                    effects: vec![(0, true)],
                }]
            } else {
                vec![]
            },
            horizon: 1,
            weights: PlanningWeights::default(),
        }
    }

    #[test]
    fn variable_count_formula() {
        let p = PlanningProblem {
            variables: (0..10).map(|i| format!("v{i}")).collect(),
            initial: vec![false; 10],
            goal: vec![],
            actions: (0..3)
                .map(|k| Action {
                    name: format!("a{k}"),
                    preconditions: vec![],
                    effects: vec![(k, true)],
                })
                .collect(),
            horizon: 3,
            weights: PlanningWeights::default(),
        };
        let (h, map) = map_planning::<f64>(&p).unwrap();
        assert_eq!(h.num_vars(), 52);
        assert_eq!(map.len(), 52);
    }

    #[test]
    fn one_step_plan() {
        let p = single_var(true);
        let (h, _) = map_planning::<f64>(&p).unwrap();
        let r = reduce_degree_auto(&h).unwrap();
        let g = brute_force(&r.qubo).unwrap();
        assert_eq!(g.min_energy, 0.0);
        for s in &g.states {
            assert_eq!(s[p.action_var(0, 1)], 1);
            assert_eq!(s[p.state_var(0, 1)], 1);
        }
        // the initial bit is free, so it doubles the ground-state count
        assert_eq!(g.states.len(), 2);
    }

    #[test]
    fn unreachable_goal_costs_the_goal_weight() {
        let (h, _) = map_planning::<f64>(&single_var(false)).unwrap();
        let r = reduce_degree_auto(&h).unwrap();
        assert_eq!(brute_force(&r.qubo).unwrap().min_energy, 1.0);
    }

    #[test]
    fn unknown_goal_is_rejected() {
        let mut p = single_var(true);
        p.goal = vec![3];
        assert!(matches!(map_planning::<f64>(&p), Err(Error::Input(_))));
    }

    #[test]
    fn inconsistent_effects_are_rejected() {
        let mut p = single_var(true);
        p.actions[0].effects.push((0, false));
        assert!(map_planning::<f64>(&p).is_err());
    }
}
