//! Observation traces, chronologies and the distances used to classify
//! behaviors.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::world::Status;
use crate::AieError;

/// A ground predicate application such as `(near agent bed)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Atom {
    pub name: String,
    pub args: Vec<String>,
}

impl Atom {
    pub fn new<'a>(name: &str, args: impl IntoIterator<Item = &'a str>) -> Atom {
        Atom {
            name: name.to_string(),
            args: args.into_iter().map(str::to_string).collect(),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.name)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        f.write_str(")")
    }
}

pub type Snapshot = BTreeSet<Atom>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationTrace {
    pub scenario: String,
    pub seed: u64,
    /// One snapshot per action conclusion; the first is the initial state.
    pub states: Vec<Snapshot>,
    pub actions: Vec<String>,
    pub rewards: Vec<f64>,
    pub outcome: Status,
    /// Set when the step cap cut the episode short.
    pub truncated: bool,
}

impl ObservationTrace {
    /// Positive transitions, step by step, each step sorted.
    pub fn transitions(&self) -> Vec<Atom> {
        self.states
            .windows(2)
            .flat_map(|w| w[1].difference(&w[0]).cloned().collect::<Vec<_>>())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chronology {
    pub events: Vec<Atom>,
    pub support: usize,
}

impl Chronology {
    pub fn new(events: Vec<Atom>) -> Chronology {
        Chronology { events, support: 1 }
    }

    /// One fact per line, readable as a micro-theory.
    pub fn to_micro_theory(&self) -> String {
        self.events.iter().map(|e| format!("{e}\n")).collect()
    }
}

/// Predicates that went from false to true, in the order they did.
pub fn extract_chronology(tr: &ObservationTrace) -> Chronology {
    Chronology::new(tr.transitions())
}

fn lcs(a: &[Atom], b: &[Atom]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    for x in a {
        let mut cur = vec![0usize; b.len() + 1];
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y {
                prev[j] + 1
            } else {
                prev[j + 1].max(cur[j])
            };
        }
        prev = cur;
    }
    prev[b.len()]
}

/// Share of `c`'s events, in order, that the trace fails to realize as
/// positive transitions. An empty chronology is consistent with anything.
pub fn distance(c: &Chronology, tr: &ObservationTrace) -> f64 {
    if c.events.is_empty() {
        return 0.0;
    }
    1.0 - lcs(&c.events, &tr.transitions()) as f64 / c.events.len() as f64
}

/// Symmetric dissimilarity between two chronologies.
pub fn chronology_distance(a: &Chronology, b: &Chronology) -> f64 {
    let longest = a.events.len().max(b.events.len());
    if longest == 0 {
        return 0.0;
    }
    1.0 - lcs(&a.events, &b.events) as f64 / longest as f64
}

/// Greedy clustering: identical chronologies pool their support, then in
/// order of support each joins the first representative within
/// `threshold` or founds a new cluster.
pub fn representatives(chronologies: &[Chronology], threshold: f64) -> Vec<Chronology> {
    let mut unique: Vec<Chronology> = Vec::new();
    for c in chronologies {
        match unique.iter_mut().find(|u| u.events == c.events) {
            Some(u) => u.support += c.support,
            None => unique.push(c.clone()),
        }
    }
    // stable: equal support keeps first appearance
    unique.sort_by_key(|c| std::cmp::Reverse(c.support));
    let mut reps: Vec<Chronology> = Vec::new();
    for c in unique {
        match reps
            .iter_mut()
            .find(|r| chronology_distance(r, &c) <= threshold)
        {
            Some(r) => r.support += c.support,
            None => reps.push(c),
        }
    }
    reps
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub behaviors: Vec<String>,
    /// `values[i][j]`: mean over behavior j's evaluation traces of the
    /// smallest distance from one of behavior i's representatives.
    pub values: Vec<Vec<f64>>,
}

impl ConfusionMatrix {
    /// Rows whose diagonal entry is no larger than any other entry.
    pub fn diagonal_minimum_rows(&self) -> usize {
        self.values
            .iter()
            .enumerate()
            .filter(|(i, row)| row.iter().all(|&v| row[*i] <= v))
            .count()
    }
}

impl fmt::Display for ConfusionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = self
            .behaviors
            .iter()
            .map(String::len)
            .max()
            .unwrap_or(0)
            .max(6);
        write!(f, "{:w$}", "")?;
        for b in &self.behaviors {
            write!(f, " {b:>w$}")?;
        }
        writeln!(f)?;
        for (b, row) in self.behaviors.iter().zip(&self.values) {
            write!(f, "{b:w$}")?;
            for v in row {
                write!(f, " {v:>w$.2}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Builds the behavior-by-behavior distance table.
pub fn confusion_matrix(
    reps: &[(String, Vec<Chronology>)],
    eval: &[(String, Vec<ObservationTrace>)],
) -> Result<ConfusionMatrix, AieError> {
    let behaviors: Vec<String> = reps.iter().map(|(b, _)| b.clone()).collect();
    let mut columns = Vec::new();
    for b in &behaviors {
        let traces = eval
            .iter()
            .find(|(e, _)| e == b)
            .map(|(_, t)| t)
            .filter(|t| !t.is_empty())
            .ok_or_else(|| AieError::MissingBehavior(b.clone()))?;
        columns.push(traces);
    }
    let mut values = Vec::new();
    for (b, rs) in reps {
        if rs.is_empty() {
            return Err(AieError::MissingBehavior(b.clone()));
        }
        let row = columns
            .iter()
            .map(|traces| {
                let total: f64 = traces
                    .iter()
                    .map(|tr| {
                        rs.iter()
                            .map(|r| distance(r, tr))
                            .fold(f64::INFINITY, f64::min)
                    })
                    .sum();
                total / traces.len() as f64
            })
            .collect();
        values.push(row);
    }
    Ok(ConfusionMatrix { behaviors, values })
}
