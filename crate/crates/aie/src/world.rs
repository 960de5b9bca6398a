//! World state, actions and the transition function.

use std::collections::BTreeSet;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::chronology::{Atom, Snapshot};
use crate::scenario::{Cond, Scenario, AGENT, SKY};
use crate::AieError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weather {
    Good,
    Bad,
}

impl Weather {
    fn flipped(self) -> Weather {
        match self {
            Weather::Good => Weather::Bad,
            Weather::Bad => Weather::Good,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WorldState {
    pub present: Vec<bool>,
    pub cells: Vec<(usize, usize)>,
    pub held: Vec<bool>,
    /// Truth value of every entry in [`Scenario::props`].
    pub props: Vec<bool>,
    pub weather: Option<Weather>,
    /// Observer reaction scheduled for the next step.
    pub pending: Option<usize>,
}

/// Objects are referred to by their index in [`Scenario::objects`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Travel(usize),
    Pickup(usize),
    Drop(usize),
    Transform { object: usize, tool: Option<usize> },
}

impl Action {
    pub fn label(&self, s: &Scenario) -> String {
        let n = |i: usize| s.objects[i].name.as_str();
        match *self {
            Action::Travel(o) => format!("travel({})", n(o)),
            Action::Pickup(o) => format!("pickup({})", n(o)),
            Action::Drop(o) => format!("drop({})", n(o)),
            Action::Transform { object, tool: None } => format!("transform({})", n(object)),
            Action::Transform {
                object,
                tool: Some(t),
            } => format!("transform({}, {})", n(object), n(t)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Running,
    Goal,
    Failure,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub reward: f64,
    pub status: Status,
}

pub fn manhattan(a: (usize, usize), b: (usize, usize)) -> usize {
    a.0.abs_diff(b.0) + a.1.abs_diff(b.1)
}

impl Scenario {
    /// The fixed action list; policies index into it.
    pub fn actions(&self) -> Vec<Action> {
        let mut out = Vec::new();
        for o in 1..self.objects.len() {
            out.push(Action::Travel(o));
        }
        for (o, obj) in self.objects.iter().enumerate() {
            if obj.portable {
                out.push(Action::Pickup(o));
                out.push(Action::Drop(o));
            }
        }
        for r in &self.rules {
            let a = Action::Transform {
                object: r.object,
                tool: r.tool,
            };
            if !out.contains(&a) {
                out.push(a);
            }
        }
        out
    }

    pub fn holds(&self, state: &WorldState, c: Cond) -> bool {
        match c {
            Cond::Prop(p) => state.props[p],
            Cond::GoodWeather => state.weather == Some(Weather::Good),
            Cond::BadWeather => state.weather == Some(Weather::Bad),
        }
    }

    pub fn status(&self, state: &WorldState) -> Status {
        if self.failure.iter().any(|&c| self.holds(state, c)) {
            Status::Failure
        } else if self.goal.iter().any(|&c| self.holds(state, c)) {
            Status::Goal
        } else {
            Status::Running
        }
    }

    /// Draws an initial state: which optional objects exist, where
    /// everything stands and what the weather is.
    pub fn sample_initial(&self, rng: &mut impl Rng) -> Result<WorldState, AieError> {
        let n = self.objects.len();
        let present: Vec<bool> = self
            .objects
            .iter()
            .map(|o| o.presence >= 1.0 || rng.gen_bool(o.presence))
            .collect();
        let mut cells: Vec<(usize, usize)> = Vec::with_capacity(n);
        for (i, obj) in self.objects.iter().enumerate() {
            let mut placed = None;
            for _ in 0..10_000 {
                let c = (rng.gen_range(0..self.grid), rng.gen_range(0..self.grid));
                if cells.iter().enumerate().any(|(j, &o)| present[j] && o == c) {
                    continue;
                }
                if let Some((anchor, lo, hi)) = obj.place {
                    let d = manhattan(c, cells[anchor]);
                    if present[anchor] && (d < lo || d > hi) {
                        continue;
                    }
                }
                placed = Some(c);
                break;
            }
            let c = placed.ok_or_else(|| AieError::Placement(obj.name.clone()))?;
            if i > 0 && !present[i] {
                cells.push((0, 0));
            } else {
                cells.push(c);
            }
        }
        let mut props = vec![false; self.props.len()];
        for &p in &self.initial {
            props[p] = present[self.props[p].0];
        }
        let weather = self.weather_flip.map(|_| {
            if rng.gen_bool(0.5) {
                Weather::Good
            } else {
                Weather::Bad
            }
        });
        Ok(WorldState {
            present,
            cells,
            held: vec![false; n],
            props,
            weather,
            pending: None,
        })
    }

    fn colocated(&self, s: &WorldState, o: usize) -> bool {
        o == 0 || (s.present[o] && (s.held[o] || s.cells[o] == s.cells[0]))
    }

    /// `Ok` when `a` may be taken in `s`, otherwise the violated constraint.
    pub fn check(&self, s: &WorldState, a: Action) -> Result<(), String> {
        let name = |o: usize| &self.objects[o].name;
        let exists = |o: usize| -> Result<(), String> {
            if o < self.objects.len() && s.present[o] {
                Ok(())
            } else {
                Err(format!("object #{o} is not in the world"))
            }
        };
        match a {
            Action::Travel(o) => {
                exists(o)?;
                if o == 0 || self.colocated(s, o) {
                    return Err(format!("agent is already at {}", name(o)));
                }
            }
            Action::Pickup(o) => {
                exists(o)?;
                if !self.objects[o].portable {
                    return Err(format!("{} cannot be carried", name(o)));
                }
                if s.held[o] {
                    return Err(format!("{} is already held", name(o)));
                }
                if !self.colocated(s, o) {
                    return Err(format!("{} is not within reach", name(o)));
                }
            }
            Action::Drop(o) => {
                exists(o)?;
                if !s.held[o] {
                    return Err(format!("{} is not held", name(o)));
                }
            }
            Action::Transform { object, tool } => {
                exists(object)?;
                if !self.colocated(s, object) {
                    return Err(format!("{} is not within reach", name(object)));
                }
                if let Some(t) = tool {
                    exists(t)?;
                    if !self.colocated(s, t) {
                        return Err(format!("tool {} is neither held nor colocated", name(t)));
                    }
                }
                let rule = self
                    .rules
                    .iter()
                    .find(|r| r.object == object && r.tool == tool)
                    .ok_or_else(|| {
                        format!("no transformation of {} with that tool", name(object))
                    })?;
                if let Some(&c) = rule.requires.iter().find(|&&c| !self.holds(s, c)) {
                    return Err(format!("requirement {} is not met", self.cond_label(c)));
                }
                if rule.adds.iter().all(|&p| s.props[p]) {
                    return Err(format!("{} would not change anything", rule.name));
                }
            }
        }
        Ok(())
    }

    pub fn legal(&self, s: &WorldState, a: Action) -> bool {
        self.check(s, a).is_ok()
    }

    fn cond_label(&self, c: Cond) -> String {
        match c {
            Cond::Prop(p) => format!("{}:{}", self.objects[self.props[p].0].name, self.props[p].1),
            Cond::GoodWeather => format!("{SKY}:goodWeather"),
            Cond::BadWeather => format!("{SKY}:badWeather"),
        }
    }

    fn observer_active(&self, s: &WorldState) -> Option<&crate::scenario::Observer> {
        let obs = self.observer.as_ref()?;
        let alive = s.present[obs.object] && obs.disabled_by.is_none_or(|p| !s.props[p]);
        alive.then_some(obs)
    }

    /// Applies `a`. Observer reactions land at the start of the following
    /// step; hazards and weather changes are drawn from `rng`.
    pub fn step(
        &self,
        s: &WorldState,
        a: Action,
        rng: &mut impl Rng,
    ) -> Result<(WorldState, StepOutcome), AieError> {
        if let Err(reason) = self.check(s, a) {
            return Err(AieError::IllegalAction {
                action: a.label(self),
                reason,
            });
        }
        let mut next = s.clone();
        let mut reward = self.rewards.step;
        if let Some(p) = next.pending.take() {
            next.props[p] = true;
            if self.status(&next) == Status::Failure {
                return Ok((
                    next,
                    StepOutcome {
                        reward: reward + self.rewards.failure,
                        status: Status::Failure,
                    },
                ));
            }
        }
        match a {
            Action::Travel(o) => {
                let dest = next.cells[o];
                next.cells[0] = dest;
                for i in 0..next.held.len() {
                    if next.held[i] {
                        next.cells[i] = dest;
                    }
                }
                for h in &self.hazards {
                    let already = h.adds.iter().all(|&p| next.props[p]);
                    if next.held[h.carrying] && !already && rng.gen_bool(h.probability) {
                        for &p in &h.adds {
                            next.props[p] = true;
                        }
                        reward -= h.penalty;
                    }
                }
            }
            Action::Pickup(o) => {
                next.held[o] = true;
                next.cells[o] = next.cells[0];
            }
            Action::Drop(o) => next.held[o] = false,
            Action::Transform { object, tool } => {
                let rule = self
                    .rules
                    .iter()
                    .find(|r| r.object == object && r.tool == tool)
                    .expect("checked above");
                for &p in &rule.removes {
                    next.props[p] = false;
                }
                for &p in &rule.adds {
                    next.props[p] = true;
                }
            }
        }
        if let Some(obs) = self.observer_active(s) {
            let seen = match a {
                Action::Pickup(o) => obs.watches_pickup.contains(&o),
                Action::Transform { object, .. } => obs.guards == Some(object),
                _ => false,
            };
            if seen && manhattan(next.cells[0], next.cells[obs.object]) <= obs.radius {
                next.pending = Some(obs.effect);
            }
        }
        if let (Some(w), Some(p)) = (next.weather, self.weather_flip) {
            if rng.gen_bool(p) {
                next.weather = Some(w.flipped());
            }
        }
        let status = self.status(&next);
        reward += match status {
            Status::Goal => self.rewards.goal,
            Status::Failure => self.rewards.failure,
            Status::Running => 0.0,
        };
        Ok((next, StepOutcome { reward, status }))
    }

    /// Discrete state used by the learner.
    pub fn state_key(&self, s: &WorldState) -> u64 {
        let mut key = 0u64;
        let mut push = |bit: bool| key = (key << 1) | bit as u64;
        for o in 1..self.objects.len() {
            push(s.present[o]);
            push(self.colocated(s, o));
            push(s.held[o]);
        }
        for &p in &s.props {
            push(p);
        }
        push(s.weather == Some(Weather::Good));
        push(s.pending.is_some());
        if let Some(obs) = &self.observer {
            push(s.present[obs.object] && manhattan(s.cells[0], s.cells[obs.object]) <= obs.radius);
        }
        key
    }

    /// The predicates an observer can read off a state: properties,
    /// proximity, possession and weather.
    pub fn snapshot(&self, s: &WorldState) -> Snapshot {
        let mut out = BTreeSet::new();
        for (i, &(o, ref name)) in self.props.iter().enumerate() {
            if s.props[i] && s.present[o] {
                out.insert(Atom::new(name, [self.objects[o].name.as_str()]));
            }
        }
        let n = self.objects.len();
        for a in 0..n {
            for b in a + 1..n {
                if s.present[a] && s.present[b] && s.cells[a] == s.cells[b] {
                    out.insert(Atom::new(
                        "near",
                        [self.objects[a].name.as_str(), &self.objects[b].name],
                    ));
                }
            }
        }
        for o in 1..n {
            if s.held[o] {
                out.insert(Atom::new("holding", [AGENT, &self.objects[o].name]));
            }
        }
        match s.weather {
            Some(Weather::Good) => {
                out.insert(Atom::new("goodWeather", [SKY]));
            }
            Some(Weather::Bad) => {
                out.insert(Atom::new("badWeather", [SKY]));
            }
            None => {}
        }
        out
    }
}

impl fmt::Display for Weather {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Weather::Good => "good",
            Weather::Bad => "bad",
        })
    }
}
