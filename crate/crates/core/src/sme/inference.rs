use std::collections::{BTreeMap, BTreeSet, HashSet};

use super::{Gmap, Hypothesis, HypothesisStatus, Provenance};
use crate::kr::{Arg, EntityId, EntitySymbol, Experience, ExprId, Term};

struct Translator<'a> {
    base: &'a Experience,
    target: &'a Experience,
    exprs: BTreeMap<ExprId, ExprId>,
    entities: BTreeMap<EntityId, EntityId>,
    slots: Vec<Option<(Term, ExprId)>>,
    emitted: HashSet<Term>,
}

impl Translator<'_> {
    fn entity(&self, e: EntityId) -> Term {
        match self.entities.get(&e) {
            Some(&t) => Term::Entity(self.target.entity(t).name.clone()),
            None => Term::Entity(EntitySymbol::skolem_for(&self.base.entity(e).name).name),
        }
    }

    /// Rewrites `e` in target vocabulary, recording every rewritten node that
    /// the target does not already contain. Slots are reserved before the
    /// arguments are visited so the output stays in pre-order.
    fn translate(&mut self, e: ExprId) -> Term {
        if let Some(&t) = self.exprs.get(&e) {
            return self.target.term(t);
        }
        let slot = self.slots.len();
        self.slots.push(None);
        let expr = self.base.expr(e);
        let args = expr
            .args
            .iter()
            .map(|a| match *a {
                Arg::Entity(en) => self.entity(en),
                Arg::Expr(sub) => self.translate(sub),
            })
            .collect();
        let term = Term::App(expr.functor.clone(), args);
        if self.target.find_term(&term).is_none() && self.emitted.insert(term.clone()) {
            self.slots[slot] = Some((term.clone(), e));
        }
        term
    }
}

/// Carries unmatched base structure into the target.
///
/// A base root fact transfers when it is unmatched and shares a matched
/// sub-expression or a bound entity with the mapping. Transfer then spreads
/// to other roots mentioning an entity that had to be skolemized. Every
/// translated node that is new to the target becomes one hypothesis.
pub fn candidate_inferences(
    gmap: &Gmap,
    base: &Experience,
    target: &Experience,
) -> Vec<Hypothesis> {
    let exprs = gmap.expr_map();
    let entities = gmap.entity_bindings();
    let roots: Vec<ExprId> = base
        .facts()
        .iter()
        .copied()
        .filter(|f| !exprs.contains_key(f))
        .collect();
    let mut transfer = vec![false; roots.len()];
    let mut skolems: BTreeSet<EntityId> = BTreeSet::new();
    let grow = |i: usize, transfer: &mut [bool], skolems: &mut BTreeSet<EntityId>| {
        transfer[i] = true;
        skolems.extend(
            base.entities_of(roots[i])
                .into_iter()
                .filter(|e| !entities.contains_key(e)),
        );
    };
    for (i, &r) in roots.iter().enumerate() {
        let anchored = base.subexpressions(r)[1..]
            .iter()
            .any(|s| exprs.contains_key(s))
            || base.entities_of(r).iter().any(|e| entities.contains_key(e));
        if anchored {
            grow(i, &mut transfer, &mut skolems);
        }
    }
    loop {
        let next = (0..roots.len()).find(|&i| {
            !transfer[i]
                && base
                    .entities_of(roots[i])
                    .iter()
                    .any(|e| skolems.contains(e))
        });
        match next {
            Some(i) => grow(i, &mut transfer, &mut skolems),
            None => break,
        }
    }

    let mut tr = Translator {
        base,
        target,
        exprs,
        entities,
        slots: Vec::new(),
        emitted: HashSet::new(),
    };
    for (i, &r) in roots.iter().enumerate() {
        if transfer[i] {
            tr.translate(r);
        }
    }
    tr.slots
        .into_iter()
        .flatten()
        .map(|(expression, source)| Hypothesis {
            expression,
            provenance: Provenance {
                base: base.id().to_string(),
                source,
                gmap_score: gmap.score,
            },
            status: HypothesisStatus::Kept,
        })
        .collect()
}
