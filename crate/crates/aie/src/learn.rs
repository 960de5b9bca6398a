//! Tabular Q-learning and policy rollouts.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chronology::ObservationTrace;
use crate::scenario::Scenario;
use crate::world::{Action, Status, WorldState};
use crate::AieError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LearnParams {
    pub episodes: usize,
    pub epsilon: f64,
    pub alpha: f64,
    pub gamma: f64,
}

impl Default for LearnParams {
    fn default() -> Self {
        LearnParams {
            episodes: 5000,
            epsilon: 0.1,
            alpha: 0.1,
            gamma: 0.95,
        }
    }
}

/// Action values per discrete state, over the scenario's fixed action list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    pub scenario: String,
    pub actions: Vec<String>,
    pub seed: u64,
    pub episodes: usize,
    pub table: BTreeMap<u64, Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainStats {
    pub episodes: usize,
    /// Goal rate over the final tenth of training.
    pub late_success_rate: f64,
}

impl Policy {
    pub fn untrained(scenario: &Scenario, seed: u64) -> Policy {
        Policy {
            scenario: scenario.name.clone(),
            actions: scenario
                .actions()
                .iter()
                .map(|a| a.label(scenario))
                .collect(),
            seed,
            episodes: 0,
            table: BTreeMap::new(),
        }
    }

    pub fn check(&self, scenario: &Scenario) -> Result<(), AieError> {
        let labels: Vec<String> = scenario
            .actions()
            .iter()
            .map(|a| a.label(scenario))
            .collect();
        if self.scenario != scenario.name || self.actions != labels {
            return Err(AieError::PolicyMismatch {
                policy: self.scenario.clone(),
                scenario: scenario.name.clone(),
            });
        }
        Ok(())
    }

    fn values(&self, key: u64) -> Option<&Vec<f64>> {
        self.table.get(&key)
    }

    /// ε-greedy choice among legal actions; ties are broken at random.
    /// Returns `None` when nothing is legal.
    pub fn choose(
        &self,
        scenario: &Scenario,
        actions: &[Action],
        state: &WorldState,
        epsilon: f64,
        rng: &mut impl Rng,
    ) -> Option<usize> {
        let legal: Vec<usize> = (0..actions.len())
            .filter(|&i| scenario.legal(state, actions[i]))
            .collect();
        if legal.is_empty() {
            return None;
        }
        if epsilon > 0.0 && rng.gen_bool(epsilon) {
            return legal.choose(rng).copied();
        }
        let q = self.values(scenario.state_key(state));
        let value = |i: usize| q.map_or(0.0, |v| v[i]);
        let best = legal
            .iter()
            .map(|&i| value(i))
            .fold(f64::NEG_INFINITY, f64::max);
        let ties: Vec<usize> = legal
            .into_iter()
            .filter(|&i| value(i) >= best - 1e-12)
            .collect();
        ties.choose(rng).copied()
    }

    fn best_value(
        &self,
        scenario: &Scenario,
        actions: &[Action],
        state: &WorldState,
    ) -> Option<f64> {
        let q = self.values(scenario.state_key(state));
        (0..actions.len())
            .filter(|&i| scenario.legal(state, actions[i]))
            .map(|i| q.map_or(0.0, |v| v[i]))
            .reduce(f64::max)
    }
}

/// Learns action values by ε-greedy Q-learning. With zero episodes the
/// table stays empty and the policy acts uniformly at random.
pub fn train_policy(
    scenario: &Scenario,
    params: &LearnParams,
    seed: u64,
) -> Result<(Policy, TrainStats), AieError> {
    let actions = scenario.actions();
    let mut policy = Policy::untrained(scenario, seed);
    policy.episodes = params.episodes;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let late_from = params.episodes - params.episodes / 10;
    let (mut late, mut late_ok) = (0usize, 0usize);
    for episode in 0..params.episodes {
        let mut state = scenario.sample_initial(&mut rng)?;
        let mut status = Status::Running;
        for _ in 0..scenario.step_cap {
            let Some(ai) = policy.choose(scenario, &actions, &state, params.epsilon, &mut rng)
            else {
                break;
            };
            let (next, out) = scenario.step(&state, actions[ai], &mut rng)?;
            let future = match out.status {
                Status::Running => {
                    params.gamma * policy.best_value(scenario, &actions, &next).unwrap_or(0.0)
                }
                _ => 0.0,
            };
            let key = scenario.state_key(&state);
            let row = policy
                .table
                .entry(key)
                .or_insert_with(|| vec![0.0; actions.len()]);
            row[ai] += params.alpha * (out.reward + future - row[ai]);
            state = next;
            status = out.status;
            if status != Status::Running {
                break;
            }
        }
        if episode >= late_from {
            late += 1;
            late_ok += (status == Status::Goal) as usize;
        }
    }
    let late_success_rate = if late == 0 {
        0.0
    } else {
        late_ok as f64 / late as f64
    };
    Ok((
        policy,
        TrainStats {
            episodes: params.episodes,
            late_success_rate,
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RolloutOptions {
    /// Exploration noise kept while observing; the source of spurious
    /// events in chronologies.
    pub epsilon: f64,
    pub step_cap: Option<usize>,
}

impl Default for RolloutOptions {
    fn default() -> Self {
        RolloutOptions {
            epsilon: 0.1,
            step_cap: None,
        }
    }
}

/// Runs one episode and records a snapshot after every action.
pub fn rollout(
    scenario: &Scenario,
    policy: &Policy,
    seed: u64,
    opts: &RolloutOptions,
) -> Result<ObservationTrace, AieError> {
    policy.check(scenario)?;
    let actions = scenario.actions();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = scenario.sample_initial(&mut rng)?;
    let mut trace = ObservationTrace {
        scenario: scenario.name.clone(),
        seed,
        states: vec![scenario.snapshot(&state)],
        actions: Vec::new(),
        rewards: Vec::new(),
        outcome: Status::Running,
        truncated: false,
    };
    let cap = opts.step_cap.unwrap_or(scenario.step_cap);
    for _ in 0..cap {
        let Some(ai) = policy.choose(scenario, &actions, &state, opts.epsilon, &mut rng) else {
            break;
        };
        let (next, out) = scenario.step(&state, actions[ai], &mut rng)?;
        trace.actions.push(actions[ai].label(scenario));
        trace.rewards.push(out.reward);
        trace.states.push(scenario.snapshot(&next));
        trace.outcome = out.status;
        state = next;
        if out.status != Status::Running {
            break;
        }
    }
    trace.truncated = trace.outcome == Status::Running && trace.actions.len() == cap;
    Ok(trace)
}

/// Fraction of `episodes` rollouts, seeded `seed`, `seed + 1`, ..., that
/// reach the goal.
pub fn success_rate(
    scenario: &Scenario,
    policy: &Policy,
    episodes: usize,
    seed: u64,
    opts: &RolloutOptions,
) -> Result<f64, AieError> {
    let mut ok = 0;
    for i in 0..episodes {
        let tr = rollout(scenario, policy, seed.wrapping_add(i as u64), opts)?;
        ok += (tr.outcome == Status::Goal) as usize;
    }
    Ok(ok as f64 / episodes.max(1) as f64)
}
