//! JSON-ready views of analogy and synthesis results, and DOT rendering.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::kr::{to_graph, Experience};
use crate::sme::{Gmap, HypothesisStatus, Item, MatchKind};
use crate::synthesis::{BaseWeight, SynthesisResult};

pub const ANALOGY_SCHEMA: &str = "stance.analogy/1";
pub const SYNTHESIS_SCHEMA: &str = "stance.synthesis/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Binding {
    pub base: String,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchRecord {
    pub base: String,
    pub target: String,
    pub kind: MatchKind,
    pub local_weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisRecord {
    pub expression: String,
    pub base: String,
    pub source: String,
    pub gmap_score: f64,
    pub status: HypothesisStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmapRecord {
    pub score: f64,
    pub bindings: Vec<Binding>,
    pub matches: Vec<MatchRecord>,
    pub inferences: Vec<HypothesisRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalogyReport {
    pub schema: String,
    pub base: String,
    pub target: String,
    /// Every gmap, best first.
    pub gmaps: Vec<GmapRecord>,
}

fn item_name(exp: &Experience, item: Item) -> String {
    match item {
        Item::Entity(e) => exp.entity(e).name.clone(),
        Item::Expr(e) => exp.term(e).to_string(),
    }
}

pub fn gmap_record(g: &Gmap, base: &Experience, target: &Experience) -> GmapRecord {
    GmapRecord {
        score: g.score,
        bindings: g
            .binding_names(base, target)
            .into_iter()
            .map(|(base, target)| Binding { base, target })
            .collect(),
        matches: g
            .matches
            .iter()
            .map(|m| MatchRecord {
                base: item_name(base, m.base),
                target: item_name(target, m.target),
                kind: m.kind,
                local_weight: m.local_weight,
            })
            .collect(),
        inferences: g
            .inferences
            .iter()
            .map(|h| HypothesisRecord {
                expression: h.expression.to_string(),
                base: h.provenance.base.clone(),
                source: base.term(h.provenance.source).to_string(),
                gmap_score: h.provenance.gmap_score,
                status: h.status,
            })
            .collect(),
    }
}

pub fn analogy_report(gmaps: &[Gmap], base: &Experience, target: &Experience) -> AnalogyReport {
    AnalogyReport {
        schema: ANALOGY_SCHEMA.to_string(),
        base: base.id().to_string(),
        target: target.id().to_string(),
        gmaps: gmaps.iter().map(|g| gmap_record(g, base, target)).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationReport {
    pub pass: usize,
    pub base: String,
    pub gmap_score: f64,
    pub bindings: Vec<Binding>,
    pub hypotheses: Vec<HypothesisRecord>,
    pub facts_after: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightRecord {
    pub base: String,
    pub similarity: f64,
    pub edges: usize,
    pub weight: f64,
}

impl From<&BaseWeight> for WeightRecord {
    fn from(w: &BaseWeight) -> Self {
        WeightRecord {
            base: w.id.clone(),
            similarity: w.similarity,
            edges: w.edges,
            weight: w.weight,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisReport {
    pub schema: String,
    pub target: String,
    pub heuristic: bool,
    pub ordering_used: Vec<String>,
    pub weights: Vec<WeightRecord>,
    pub passes: usize,
    pub iterations: Vec<IterationReport>,
    pub final_facts: Vec<String>,
}

/// `base_of` looks up base experiences so hypothesis sources can be printed
/// as base expressions.
pub fn synthesis_report(
    res: &SynthesisResult,
    target: &Experience,
    heuristic: bool,
    base_of: impl Fn(&str) -> Option<Experience>,
) -> SynthesisReport {
    SynthesisReport {
        schema: SYNTHESIS_SCHEMA.to_string(),
        target: target.id().to_string(),
        heuristic,
        ordering_used: res.order.clone(),
        weights: res.base_weights.iter().map(WeightRecord::from).collect(),
        passes: res.passes,
        iterations: res
            .iterations
            .iter()
            .map(|it| {
                let base = base_of(&it.base);
                IterationReport {
                    pass: it.pass,
                    base: it.base.clone(),
                    gmap_score: it.gmap_score,
                    bindings: it
                        .bindings
                        .iter()
                        .map(|(b, t)| Binding {
                            base: b.clone(),
                            target: t.clone(),
                        })
                        .collect(),
                    hypotheses: it
                        .hypotheses
                        .iter()
                        .map(|h| HypothesisRecord {
                            expression: h.expression.to_string(),
                            base: h.provenance.base.clone(),
                            source: base.as_ref().map_or_else(
                                || format!("#{}", h.provenance.source.0),
                                |b| b.term(h.provenance.source).to_string(),
                            ),
                            gmap_score: h.provenance.gmap_score,
                            status: h.status,
                        })
                        .collect(),
                    facts_after: it.facts_after,
                }
            })
            .collect(),
        final_facts: res
            .experience
            .fact_terms()
            .iter()
            .map(ToString::to_string)
            .collect(),
    }
}

/// DOT for `current`, with every expression absent from `original` dashed.
pub fn augmentation_dot(original: &Experience, current: &Experience) -> String {
    let dashed: BTreeSet<_> = current
        .expressions()
        .iter()
        .filter(|e| original.find_term(&current.term(e.id)).is_none())
        .map(|e| e.id)
        .collect();
    to_graph(current).to_dot(current.id(), &dashed)
}

/// DOT for a hypothesis set laid over the target it was inferred for.
pub fn gmap_dot(g: &Gmap, target: &Experience) -> String {
    let terms: Vec<_> = g
        .inferences
        .iter()
        .filter(|h| h.status == HypothesisStatus::Kept)
        .map(|h| h.expression.clone())
        .collect();
    match target.augmented(&terms, &Default::default()) {
        Ok(aug) => augmentation_dot(target, &aug),
        Err(_) => augmentation_dot(target, target),
    }
}
