use std::collections::{BTreeSet, HashMap};

use super::{Item, MatchHypothesis, MatchKind, SmeConfig};
use crate::kr::{Arg, Experience, ExprId, Expression, PredicateCategory};

pub(crate) fn item_of(arg: Arg) -> Item {
    match arg {
        Arg::Entity(e) => Item::Entity(e),
        Arg::Expr(e) => Item::Expr(e),
    }
}

/// Whether two expressions may correspond on their own, ignoring arguments.
fn functor_match(b: &Expression, t: &Expression) -> Option<MatchKind> {
    if b.arity() != t.arity() || b.category != t.category {
        return None;
    }
    let kind = match b.category {
        PredicateCategory::Relation => MatchKind::Relation,
        PredicateCategory::Attribute => MatchKind::Attribute,
        PredicateCategory::Function => MatchKind::Function,
        _ => MatchKind::FlexibleCategory,
    };
    if b.functor == t.functor || b.category.is_flexible() {
        Some(kind)
    } else {
        None
    }
}

struct Matcher<'a> {
    base: &'a Experience,
    target: &'a Experience,
    memo: HashMap<(ExprId, ExprId), Option<MatchKind>>,
}

impl Matcher<'_> {
    /// A pair is supportable when the functors match and every argument
    /// pair is either two entities or itself supportable.
    fn supportable(&mut self, b: ExprId, t: ExprId) -> Option<MatchKind> {
        if let Some(&k) = self.memo.get(&(b, t)) {
            return k;
        }
        let (be, te) = (self.base.expr(b), self.target.expr(t));
        let mut kind = functor_match(be, te);
        if kind.is_some() {
            for (ba, ta) in be.args.iter().zip(&te.args) {
                let ok = match (*ba, *ta) {
                    (Arg::Entity(_), Arg::Entity(_)) => true,
                    (Arg::Expr(x), Arg::Expr(y)) => self.supportable(x, y).is_some(),
                    _ => false,
                };
                if !ok {
                    kind = None;
                    break;
                }
            }
        }
        self.memo.insert((b, t), kind);
        kind
    }
}

/// Proposes every locally plausible correspondence between `base` and
/// `target`, sorted by `(base, target)`. Entity matches are those induced by
/// argument positions of expression matches.
pub fn local_matches(
    base: &Experience,
    target: &Experience,
    config: &SmeConfig,
) -> Vec<MatchHypothesis> {
    let mut m = Matcher {
        base,
        target,
        memo: HashMap::new(),
    };
    let mut out = Vec::new();
    let mut entity_pairs = BTreeSet::new();
    for be in base.expressions() {
        for te in target.expressions() {
            let Some(kind) = m.supportable(be.id, te.id) else {
                continue;
            };
            out.push(MatchHypothesis {
                base: Item::Expr(be.id),
                target: Item::Expr(te.id),
                kind,
                local_weight: config.weights.base,
            });
            for (ba, ta) in be.args.iter().zip(&te.args) {
                if let (Arg::Entity(x), Arg::Entity(y)) = (*ba, *ta) {
                    entity_pairs.insert((x, y));
                }
            }
        }
    }
    out.extend(entity_pairs.into_iter().map(|(x, y)| MatchHypothesis {
        base: Item::Entity(x),
        target: Item::Entity(y),
        kind: MatchKind::Entity,
        local_weight: 0.0,
    }));
    out.sort_by_key(MatchHypothesis::pair);
    out
}
