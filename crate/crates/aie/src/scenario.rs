//! Scenario definitions: objects, transformation rules, hazards and goals,
//! read from TOML.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::AieError;

pub const BUILTIN: [&str; 5] = ["slumber", "dinner", "chopping", "competition", "weather"];

const SOURCES: [(&str, &str); 5] = [
    ("slumber", include_str!("../scenarios/slumber.toml")),
    ("dinner", include_str!("../scenarios/dinner.toml")),
    ("chopping", include_str!("../scenarios/chopping.toml")),
    ("competition", include_str!("../scenarios/competition.toml")),
    ("weather", include_str!("../scenarios/weather.toml")),
];

/// Name of the implicit agent object.
pub const AGENT: &str = "agent";
/// Pseudo-object carrying the weather predicates.
pub const SKY: &str = "sky";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default = "default_step_cap")]
    pub step_cap: usize,
    /// Reaching any of these `object:property` facts ends the episode well.
    pub goal: Vec<String>,
    #[serde(default)]
    pub failure: Vec<String>,
    #[serde(default)]
    pub agent: AgentConfig,
    pub objects: Vec<ObjectConfig>,
    #[serde(default)]
    pub rules: Vec<RuleConfig>,
    #[serde(default)]
    pub hazards: Vec<HazardConfig>,
    pub observer: Option<ObserverConfig>,
    pub weather: Option<WeatherConfig>,
    #[serde(default)]
    pub rewards: RewardConfig,
}

fn default_grid() -> usize {
    6
}

fn default_step_cap() -> usize {
    30
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentConfig {
    #[serde(default)]
    pub properties: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectConfig {
    pub name: String,
    #[serde(default)]
    pub properties: Vec<String>,
    #[serde(default)]
    pub portable: bool,
    /// Probability that the object exists in a sampled episode.
    #[serde(default = "one")]
    pub presence: f64,
    pub place: Option<PlaceConfig>,
}

fn one() -> f64 {
    1.0
}

/// Manhattan-distance window relative to an earlier object.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaceConfig {
    pub anchor: String,
    #[serde(default)]
    pub min: usize,
    pub max: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleConfig {
    pub name: String,
    pub object: String,
    pub tool: Option<String>,
    #[serde(default)]
    pub requires: Vec<String>,
    pub adds: Vec<String>,
    #[serde(default)]
    pub removes: Vec<String>,
}

/// Travelling while carrying `carrying` may set `adds`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HazardConfig {
    pub carrying: String,
    pub probability: f64,
    pub adds: Vec<String>,
    pub penalty: f64,
}

/// A scripted bystander that reacts to what it sees within `radius`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObserverConfig {
    pub object: String,
    pub radius: usize,
    #[serde(default)]
    pub watches_pickup: Vec<String>,
    pub guards: Option<String>,
    pub disabled_by: Option<String>,
    pub effect: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeatherConfig {
    pub flip_probability: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardConfig {
    #[serde(default = "one")]
    pub goal: f64,
    #[serde(default = "minus_one")]
    pub failure: f64,
    /// Charged on every action so that dithering never pays.
    #[serde(default = "step_cost")]
    pub step: f64,
}

fn minus_one() -> f64 {
    -1.0
}

fn step_cost() -> f64 {
    -0.01
}

impl Default for RewardConfig {
    fn default() -> Self {
        RewardConfig {
            goal: 1.0,
            failure: -1.0,
            step: -0.01,
        }
    }
}

/// `object:property`, resolved against the scenario's property table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cond {
    Prop(usize),
    GoodWeather,
    BadWeather,
}

#[derive(Debug, Clone)]
pub struct Object {
    pub name: String,
    pub portable: bool,
    pub presence: f64,
    pub place: Option<(usize, usize, usize)>,
}

#[derive(Debug, Clone)]
pub struct Rule {
    pub name: String,
    pub object: usize,
    pub tool: Option<usize>,
    pub requires: Vec<Cond>,
    pub adds: Vec<usize>,
    pub removes: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Hazard {
    pub carrying: usize,
    pub probability: f64,
    pub adds: Vec<usize>,
    pub penalty: f64,
}

#[derive(Debug, Clone)]
pub struct Observer {
    pub object: usize,
    pub radius: usize,
    pub watches_pickup: Vec<usize>,
    pub guards: Option<usize>,
    pub disabled_by: Option<usize>,
    pub effect: usize,
}

/// A validated scenario. Object 0 is always the agent.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub grid: usize,
    pub step_cap: usize,
    pub objects: Vec<Object>,
    /// Every `(object, property)` pair the scenario can talk about.
    pub props: Vec<(usize, String)>,
    pub initial: Vec<usize>,
    pub goal: Vec<Cond>,
    pub failure: Vec<Cond>,
    pub rules: Vec<Rule>,
    pub hazards: Vec<Hazard>,
    pub observer: Option<Observer>,
    pub weather_flip: Option<f64>,
    pub rewards: RewardConfig,
}

struct Builder {
    names: BTreeMap<String, usize>,
    props: Vec<(usize, String)>,
}

impl Builder {
    fn object(&self, name: &str) -> Result<usize, AieError> {
        self.names
            .get(name)
            .copied()
            .ok_or_else(|| AieError::Config(format!("unknown object `{name}`")))
    }

    fn prop(&mut self, fact: &str) -> Result<usize, AieError> {
        match self.cond(fact)? {
            Cond::Prop(p) => Ok(p),
            _ => Err(AieError::Config(format!(
                "`{fact}` cannot be changed by the agent"
            ))),
        }
    }

    fn cond(&mut self, fact: &str) -> Result<Cond, AieError> {
        let (obj, prop) = fact
            .split_once(':')
            .ok_or_else(|| AieError::Config(format!("expected `object:property`, got `{fact}`")))?;
        if obj == SKY {
            return match prop {
                "goodWeather" => Ok(Cond::GoodWeather),
                "badWeather" => Ok(Cond::BadWeather),
                _ => Err(AieError::Config(format!(
                    "unknown weather predicate `{prop}`"
                ))),
            };
        }
        let o = self.object(obj)?;
        if let Some(i) = self
            .props
            .iter()
            .position(|(po, pn)| *po == o && pn == prop)
        {
            return Ok(Cond::Prop(i));
        }
        self.props.push((o, prop.to_string()));
        Ok(Cond::Prop(self.props.len() - 1))
    }
}

fn check_probability(what: &str, p: f64) -> Result<(), AieError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(AieError::Config(format!(
            "{what} must lie in [0, 1], got {p}"
        )))
    }
}

impl Scenario {
    pub fn builtin(name: &str) -> Result<Scenario, AieError> {
        let (_, src) = SOURCES
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| AieError::UnknownScenario(name.to_string()))?;
        Scenario::from_toml(src)
    }

    pub fn builtin_source(name: &str) -> Option<&'static str> {
        SOURCES.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
    }

    pub fn from_toml(text: &str) -> Result<Scenario, AieError> {
        let cfg: ScenarioConfig =
            toml::from_str(text).map_err(|e| AieError::Config(e.to_string()))?;
        Scenario::from_config(&cfg)
    }

    pub fn from_config(cfg: &ScenarioConfig) -> Result<Scenario, AieError> {
        if cfg.grid < 2 {
            return Err(AieError::Config("grid must be at least 2".into()));
        }
        if cfg.objects.len() + 1 > cfg.grid * cfg.grid {
            return Err(AieError::Config("more objects than grid cells".into()));
        }
        let mut b = Builder {
            names: BTreeMap::new(),
            props: Vec::new(),
        };
        let mut objects = vec![Object {
            name: AGENT.to_string(),
            portable: false,
            presence: 1.0,
            place: None,
        }];
        b.names.insert(AGENT.to_string(), 0);
        for o in &cfg.objects {
            if o.name == SKY || b.names.contains_key(&o.name) {
                return Err(AieError::Config(format!(
                    "duplicate or reserved object `{}`",
                    o.name
                )));
            }
            check_probability("presence", o.presence)?;
            let place = match &o.place {
                None => None,
                Some(p) => {
                    let anchor = b.object(&p.anchor).map_err(|_| {
                        AieError::Config(format!(
                            "`{}` must be placed after its anchor `{}`",
                            o.name, p.anchor
                        ))
                    })?;
                    Some((anchor, p.min, p.max.unwrap_or(usize::MAX)))
                }
            };
            b.names.insert(o.name.clone(), objects.len());
            objects.push(Object {
                name: o.name.clone(),
                portable: o.portable,
                presence: o.presence,
                place,
            });
        }
        let mut initial = Vec::new();
        for p in &cfg.agent.properties {
            initial.push(b.prop(&format!("{AGENT}:{p}"))?);
        }
        for o in &cfg.objects {
            for p in &o.properties {
                initial.push(b.prop(&format!("{}:{p}", o.name))?);
            }
        }
        let goal = cfg
            .goal
            .iter()
            .map(|g| b.cond(g))
            .collect::<Result<Vec<_>, _>>()?;
        if goal.is_empty() {
            return Err(AieError::Config(
                "a scenario needs at least one goal".into(),
            ));
        }
        let failure = cfg
            .failure
            .iter()
            .map(|g| b.cond(g))
            .collect::<Result<Vec<_>, _>>()?;
        let mut rules = Vec::new();
        for r in &cfg.rules {
            let tool = r.tool.as_deref().map(|t| b.object(t)).transpose()?;
            rules.push(Rule {
                name: r.name.clone(),
                object: b.object(&r.object)?,
                tool,
                requires: r
                    .requires
                    .iter()
                    .map(|c| b.cond(c))
                    .collect::<Result<_, _>>()?,
                adds: r.adds.iter().map(|c| b.prop(c)).collect::<Result<_, _>>()?,
                removes: r
                    .removes
                    .iter()
                    .map(|c| b.prop(c))
                    .collect::<Result<_, _>>()?,
            });
        }
        let mut hazards = Vec::new();
        for h in &cfg.hazards {
            check_probability("hazard probability", h.probability)?;
            hazards.push(Hazard {
                carrying: b.object(&h.carrying)?,
                probability: h.probability,
                adds: h.adds.iter().map(|c| b.prop(c)).collect::<Result<_, _>>()?,
                penalty: h.penalty,
            });
        }
        let observer = match &cfg.observer {
            None => None,
            Some(o) => Some(Observer {
                object: b.object(&o.object)?,
                radius: o.radius,
                watches_pickup: o
                    .watches_pickup
                    .iter()
                    .map(|w| b.object(w))
                    .collect::<Result<_, _>>()?,
                guards: o.guards.as_deref().map(|g| b.object(g)).transpose()?,
                disabled_by: o.disabled_by.as_deref().map(|d| b.prop(d)).transpose()?,
                effect: b.prop(&o.effect)?,
            }),
        };
        if let Some(w) = &cfg.weather {
            check_probability("weather flip probability", w.flip_probability)?;
        }
        let uses_weather = goal
            .iter()
            .chain(&failure)
            .chain(rules.iter().flat_map(|r| &r.requires))
            .any(|c| !matches!(c, Cond::Prop(_)));
        if uses_weather && cfg.weather.is_none() {
            return Err(AieError::Config(
                "weather predicates used without a [weather] section".into(),
            ));
        }
        let scenario = Scenario {
            name: cfg.name.clone(),
            grid: cfg.grid,
            step_cap: cfg.step_cap,
            objects,
            props: b.props,
            initial,
            goal,
            failure,
            rules,
            hazards,
            observer,
            weather_flip: cfg.weather.as_ref().map(|w| w.flip_probability),
            rewards: cfg.rewards.clone(),
        };
        if scenario.props.len() + 4 * scenario.objects.len() > 60 {
            return Err(AieError::Config(
                "scenario too large for the state encoding".into(),
            ));
        }
        Ok(scenario)
    }

    pub fn object_id(&self, name: &str) -> Option<usize> {
        self.objects.iter().position(|o| o.name == name)
    }

    pub fn prop_id(&self, object: &str, prop: &str) -> Option<usize> {
        let o = self.object_id(object)?;
        self.props
            .iter()
            .position(|(po, pn)| *po == o && pn == prop)
    }

    pub fn has_weather(&self) -> bool {
        self.weather_flip.is_some()
    }
}
