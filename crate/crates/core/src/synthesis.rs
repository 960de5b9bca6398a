//! Iterative synthesis of an explanation from a library of partial analogies.
//!
//! Each base in turn is mapped onto the current target. Hypotheses that
//! survive filtering are asserted into the target, so later bases see the
//! enriched description. Passes repeat until one adds nothing.

use std::collections::{BTreeSet, HashSet};

use serde::Serialize;
use thiserror::Error;

use crate::kr::{Declarations, Experience, KrError, Term};
use crate::sme::{best_analogy, Hypothesis, HypothesisStatus, SmeConfig, SmeError};

#[derive(Debug, Error)]
pub enum SynthesisError {
    #[error("base library is empty")]
    EmptyLibrary,
    #[error("target experience `{0}` has no facts")]
    EmptyTarget(String),
    #[error("two bases share the id `{0}`")]
    DuplicateBaseId(String),
    #[error("no fixed point after {passes} passes")]
    NonConvergence { passes: usize },
    #[error(transparent)]
    Sme(#[from] SmeError),
    #[error("could not assert hypothesis: {0}")]
    Kr(#[from] KrError),
}

/// An ordered collection of base experiences with unique ids.
#[derive(Debug, Clone, Default)]
pub struct BaseLibrary {
    bases: Vec<Experience>,
}

impl BaseLibrary {
    pub fn new(bases: Vec<Experience>) -> Result<Self, SynthesisError> {
        let mut seen = HashSet::new();
        for b in &bases {
            if !seen.insert(b.id().to_string()) {
                return Err(SynthesisError::DuplicateBaseId(b.id().to_string()));
            }
        }
        Ok(BaseLibrary { bases })
    }

    pub fn bases(&self) -> &[Experience] {
        &self.bases
    }

    pub fn get(&self, id: &str) -> Option<&Experience> {
        self.bases.iter().find(|b| b.id() == id)
    }

    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }
}

/// Keys used for predicate overlap: the name for relations, attributes,
/// functions and connectives, the category for the flexible categories.
fn predicate_keys(exp: &Experience) -> BTreeSet<String> {
    exp.expressions()
        .iter()
        .map(|e| {
            if e.category.is_flexible() {
                e.category.as_str().to_string()
            } else {
                e.functor.clone()
            }
        })
        .collect()
}

/// Jaccard overlap of predicate keys, in `[0, 1]`.
pub fn predicate_similarity(base: &Experience, target: &Experience) -> f64 {
    let (a, b) = (predicate_keys(base), predicate_keys(target));
    let union = a.union(&b).count();
    if union == 0 {
        return 0.0;
    }
    a.intersection(&b).count() as f64 / union as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaseWeight {
    pub id: String,
    pub similarity: f64,
    pub edges: usize,
    pub weight: f64,
}

/// Weights every base by similarity times edge count and sorts by weight,
/// highest first; ties keep ascending id order.
pub fn order_bases(library: &BaseLibrary, target: &Experience) -> Vec<BaseWeight> {
    let mut out: Vec<BaseWeight> = library
        .bases()
        .iter()
        .map(|b| {
            let similarity = predicate_similarity(b, target);
            let edges = b.edge_count();
            BaseWeight {
                id: b.id().to_string(),
                similarity,
                edges,
                weight: similarity * edges as f64,
            }
        })
        .collect();
    out.sort_by(|a, b| b.weight.total_cmp(&a.weight).then_with(|| a.id.cmp(&b.id)));
    out
}

/// Marks each hypothesis kept or discarded.
///
/// A hypothesis is dropped when it applies an event predicate to arguments
/// that were never observed in the target, or when it repeats, up to skolem
/// renaming, something already in the target or kept earlier in the list.
pub fn filter_hypotheses(
    hyps: Vec<Hypothesis>,
    target: &Experience,
    events: &Declarations,
) -> Vec<Hypothesis> {
    let mut known: HashSet<Term> = target
        .expressions()
        .iter()
        .map(|e| target.term(e.id).skolem_canonical())
        .collect();
    hyps.into_iter()
        .map(|mut h| {
            let unobserved = h.expression.applications().into_iter().any(|t| {
                let f = t.functor().unwrap_or_default();
                let is_event = events.is_event(f) || target.declarations().is_event(f);
                is_event && target.find_term(t).is_none()
            });
            h.status = if unobserved {
                HypothesisStatus::DiscardedUnobservedEvent
            } else if !known.insert(h.expression.skolem_canonical()) {
                HypothesisStatus::DiscardedDuplicate
            } else {
                HypothesisStatus::Kept
            };
            h
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct SynthesisConfig {
    pub sme: SmeConfig,
    pub max_passes: usize,
    /// Visit bases in weight order instead of library order.
    pub use_heuristic: bool,
    /// Event declarations consulted in addition to those of each base.
    pub events: Declarations,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        SynthesisConfig {
            sme: SmeConfig::default(),
            max_passes: 10,
            use_heuristic: true,
            events: Declarations::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IterationRecord {
    pub pass: usize,
    pub base: String,
    pub gmap_score: f64,
    pub bindings: Vec<(String, String)>,
    pub hypotheses: Vec<Hypothesis>,
    pub facts_after: usize,
}

impl IterationRecord {
    pub fn kept(&self) -> impl Iterator<Item = &Hypothesis> {
        self.hypotheses
            .iter()
            .filter(|h| h.status == HypothesisStatus::Kept)
    }

    pub fn discarded(&self) -> impl Iterator<Item = &Hypothesis> {
        self.hypotheses
            .iter()
            .filter(|h| h.status != HypothesisStatus::Kept)
    }
}

#[derive(Debug, Clone)]
pub struct SynthesisResult {
    pub experience: Experience,
    pub iterations: Vec<IterationRecord>,
    pub passes: usize,
    pub base_weights: Vec<BaseWeight>,
    pub order: Vec<String>,
}

impl SynthesisResult {
    pub fn kept(&self) -> impl Iterator<Item = &Hypothesis> {
        self.iterations.iter().flat_map(IterationRecord::kept)
    }

    pub fn discarded(&self) -> impl Iterator<Item = &Hypothesis> {
        self.iterations.iter().flat_map(IterationRecord::discarded)
    }
}

/// Runs synthesis to a fixed point.
pub fn synthesize(
    library: &BaseLibrary,
    target: &Experience,
    config: &SynthesisConfig,
) -> Result<SynthesisResult, SynthesisError> {
    if library.is_empty() {
        return Err(SynthesisError::EmptyLibrary);
    }
    if target.facts().is_empty() {
        return Err(SynthesisError::EmptyTarget(target.id().to_string()));
    }
    let base_weights = order_bases(library, target);
    let order: Vec<String> = if config.use_heuristic {
        base_weights.iter().map(|w| w.id.clone()).collect()
    } else {
        library.bases().iter().map(|b| b.id().to_string()).collect()
    };

    let mut current = target.clone();
    let mut iterations = Vec::new();
    for pass in 1..=config.max_passes {
        let mut changed = false;
        for id in &order {
            let base = library.get(id).expect("order lists library ids");
            let (gmap, hyps) = best_analogy(base, &current, &config.sme)?;
            let mut events = config.events.clone();
            events.absorb(base.declarations());
            let hyps = filter_hypotheses(hyps, &current, &events);
            let kept: Vec<Term> = hyps
                .iter()
                .filter(|h| h.status == HypothesisStatus::Kept)
                .map(|h| h.expression.clone())
                .collect();
            let bindings = gmap.binding_names(base, &current);
            if !kept.is_empty() {
                current = current.augmented(&kept, base.declarations())?;
                changed = true;
            }
            iterations.push(IterationRecord {
                pass,
                base: id.clone(),
                gmap_score: gmap.score,
                bindings,
                hypotheses: hyps,
                facts_after: current.facts().len(),
            });
        }
        if !changed {
            return Ok(SynthesisResult {
                experience: current,
                iterations,
                passes: pass,
                base_weights,
                order,
            });
        }
    }
    Err(SynthesisError::NonConvergence {
        passes: config.max_passes,
    })
}
