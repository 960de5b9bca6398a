//! Structure mapping between a base and a target experience.
//!
//! The pipeline runs in four stages: [`local_matches`] proposes pairwise
//! correspondences, [`merge_gmaps`] combines them into maximal consistent
//! global mappings, [`score_gmap`] applies structural evaluation and
//! [`candidate_inferences`] carries unmatched base structure over to the
//! target.

mod inference;
mod local;
mod merge;
mod score;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kr::{EntityId, Experience, ExprId, Term};

pub use inference::candidate_inferences;
pub use local::local_matches;
pub use merge::merge_gmaps;
pub use score::score_gmap;

/// Evidence parameters for structural evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreWeights {
    /// Local evidence given to every expression match.
    pub base: f64,
    /// Fraction of a matched parent's weight passed to its arguments.
    pub trickle_down: f64,
}

impl Default for ScoreWeights {
    fn default() -> Self {
        ScoreWeights {
            base: 0.1,
            trickle_down: 0.8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmeConfig {
    pub weights: ScoreWeights,
    /// Upper bound on search states explored while merging.
    pub merge_cap: usize,
}

impl Default for SmeConfig {
    fn default() -> Self {
        SmeConfig {
            weights: ScoreWeights::default(),
            merge_cap: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SmeError {
    #[error("gmap merge explored more than {cap} partial states ({candidates} candidate matches)")]
    MergeLimit { cap: usize, candidates: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Item {
    Entity(EntityId),
    Expr(ExprId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatchKind {
    Entity,
    Relation,
    Attribute,
    FlexibleCategory,
    Function,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchHypothesis {
    pub base: Item,
    pub target: Item,
    pub kind: MatchKind,
    pub local_weight: f64,
}

impl MatchHypothesis {
    pub fn pair(&self) -> (Item, Item) {
        (self.base, self.target)
    }

    pub fn is_expression(&self) -> bool {
        matches!(self.base, Item::Expr(_))
    }

    /// The same correspondence seen from the other side.
    pub fn swapped(&self) -> MatchHypothesis {
        MatchHypothesis {
            base: self.target,
            target: self.base,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HypothesisStatus {
    Kept,
    DiscardedUnobservedEvent,
    DiscardedDuplicate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub base: String,
    pub source: ExprId,
    pub gmap_score: f64,
}

/// A candidate inference: base structure rewritten in target vocabulary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub expression: Term,
    pub provenance: Provenance,
    pub status: HypothesisStatus,
}

/// A maximal consistent set of match hypotheses.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Gmap {
    /// Expression and entity matches, sorted by `(base, target)`.
    pub matches: Vec<MatchHypothesis>,
    pub score: f64,
    pub inferences: Vec<Hypothesis>,
}

impl Gmap {
    pub(crate) fn from_matches(mut matches: Vec<MatchHypothesis>) -> Gmap {
        matches.sort_by_key(MatchHypothesis::pair);
        matches.dedup_by_key(|m| m.pair());
        Gmap {
            matches,
            score: 0.0,
            inferences: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.matches.is_empty()
    }

    pub fn expression_matches(&self) -> impl Iterator<Item = &MatchHypothesis> {
        self.matches.iter().filter(|m| m.is_expression())
    }

    pub fn expr_map(&self) -> BTreeMap<ExprId, ExprId> {
        self.matches
            .iter()
            .filter_map(|m| match (m.base, m.target) {
                (Item::Expr(b), Item::Expr(t)) => Some((b, t)),
                _ => None,
            })
            .collect()
    }

    pub fn entity_bindings(&self) -> BTreeMap<EntityId, EntityId> {
        self.matches
            .iter()
            .filter_map(|m| match (m.base, m.target) {
                (Item::Entity(b), Item::Entity(t)) => Some((b, t)),
                _ => None,
            })
            .collect()
    }

    /// Entity bindings by name, sorted.
    pub fn binding_names(&self, base: &Experience, target: &Experience) -> Vec<(String, String)> {
        let mut v: Vec<_> = self
            .entity_bindings()
            .into_iter()
            .map(|(b, t)| (base.entity(b).name.clone(), target.entity(t).name.clone()))
            .collect();
        v.sort();
        v
    }

    /// Functor correspondences of the expression matches, sorted.
    pub fn functor_pairs(
        &self,
        base: &Experience,
        target: &Experience,
    ) -> BTreeSet<(String, String)> {
        self.expr_map()
            .into_iter()
            .map(|(b, t)| (base.expr(b).functor.clone(), target.expr(t).functor.clone()))
            .collect()
    }

    pub fn skolem_count(&self) -> usize {
        self.inferences
            .iter()
            .flat_map(|h| h.expression.entity_names())
            .filter(|n| n.starts_with(crate::kr::SKOLEM_PREFIX))
            .collect::<BTreeSet<_>>()
            .len()
    }

    /// Checks one-to-one correspondence, support closure and that every
    /// entity match is supported by an expression match.
    pub fn check_invariants(&self, base: &Experience, target: &Experience) -> Result<(), String> {
        let mut fwd = BTreeMap::new();
        let mut rev = BTreeMap::new();
        for m in &self.matches {
            if fwd.insert(m.base, m.target).is_some_and(|t| t != m.target) {
                return Err(format!("base item {:?} maps twice", m.base));
            }
            if rev.insert(m.target, m.base).is_some_and(|b| b != m.base) {
                return Err(format!("target item {:?} mapped twice", m.target));
            }
        }
        let pairs: BTreeSet<(Item, Item)> =
            self.matches.iter().map(MatchHypothesis::pair).collect();
        let mut supported = BTreeSet::new();
        for (b, t) in self.expr_map() {
            let (be, te) = (base.expr(b), target.expr(t));
            if be.args.len() != te.args.len() {
                return Err(format!("arity mismatch in {b:?}/{t:?}"));
            }
            for (ba, ta) in be.args.iter().zip(&te.args) {
                let pair = (local::item_of(*ba), local::item_of(*ta));
                if !pairs.contains(&pair) {
                    return Err(format!(
                        "argument pair {pair:?} of {b:?}/{t:?} is not mapped"
                    ));
                }
                supported.insert(pair);
            }
        }
        for m in self.matches.iter().filter(|m| !m.is_expression()) {
            if !supported.contains(&m.pair()) {
                return Err(format!("entity match {:?} stands alone", m.pair()));
            }
        }
        Ok(())
    }
}

/// Orders gmaps best first: higher score, then fewer skolems, then the
/// lexicographically smaller binding list.
pub fn rank_gmaps(gmaps: &mut [Gmap], base: &Experience, target: &Experience) {
    let key = |g: &Gmap| {
        let exprs: Vec<(String, String)> = g
            .expr_map()
            .into_iter()
            .map(|(b, t)| (base.term(b).to_string(), target.term(t).to_string()))
            .collect();
        (g.skolem_count(), g.binding_names(base, target), exprs)
    };
    let mut keyed: Vec<_> = gmaps.iter().cloned().map(|g| (key(&g), g)).collect();
    keyed.sort_by(|(ka, a), (kb, b)| {
        if (a.score - b.score).abs() > 1e-9 {
            b.score.partial_cmp(&a.score).unwrap_or(Ordering::Equal)
        } else {
            ka.cmp(kb)
        }
    });
    for (slot, (_, g)) in gmaps.iter_mut().zip(keyed) {
        *slot = g;
    }
}

/// Runs the whole pipeline and returns every gmap, best first.
pub fn analyze(
    base: &Experience,
    target: &Experience,
    config: &SmeConfig,
) -> Result<Vec<Gmap>, SmeError> {
    let mhs = local_matches(base, target, config);
    let mut gmaps = merge_gmaps(base, target, &mhs, config)?;
    for g in &mut gmaps {
        g.score = score_gmap(g, base, target, &config.weights);
        g.inferences = candidate_inferences(g, base, target);
    }
    rank_gmaps(&mut gmaps, base, target);
    Ok(gmaps)
}

/// The highest-ranked gmap and its hypotheses. With no match at all the gmap
/// is empty and nothing is inferred.
pub fn best_analogy(
    base: &Experience,
    target: &Experience,
    config: &SmeConfig,
) -> Result<(Gmap, Vec<Hypothesis>), SmeError> {
    let best = analyze(base, target, config)?
        .into_iter()
        .next()
        .unwrap_or_default();
    let hyps = best.inferences.clone();
    Ok((best, hyps))
}
