//! Knowledge representation: micro-theories of predicate-calculus facts.
//!
//! An [`Experience`] stores its expressions in an arena. Structurally
//! identical sub-expressions are interned, so a fact that is asserted at the
//! top level and also quoted inside a rationale is a single node.

mod decl;
mod graph;
mod parse;
mod serialize;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use decl::{
    categorize, categorize_by_convention, is_connective, DeclConflict, Declarations,
    PredicateCategory, PredicateDecl, CONNECTIVES,
};
pub use graph::{to_graph, ExpressionGraph, GraphEdge, GraphNode, NodeRef};
pub use parse::{parse_experience, ParseConfig};
pub use serialize::canonical_serialize;

/// Prefix carried by every skolem entity.
pub const SKOLEM_PREFIX: &str = "skolem_";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ExprId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EntityId(pub u32);

impl ExprId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl EntityId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntityOrigin {
    Declared,
    Skolem,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EntitySymbol {
    pub name: String,
    pub origin: EntityOrigin,
}

impl EntitySymbol {
    pub fn new(name: impl Into<String>) -> Self {
        let name = name.into();
        let origin = if name.starts_with(SKOLEM_PREFIX) {
            EntityOrigin::Skolem
        } else {
            EntityOrigin::Declared
        };
        EntitySymbol { name, origin }
    }

    pub fn skolem_for(base_entity: &str) -> Self {
        EntitySymbol {
            name: format!("{SKOLEM_PREFIX}{base_entity}"),
            origin: EntityOrigin::Skolem,
        }
    }

    pub fn is_skolem(&self) -> bool {
        self.origin == EntityOrigin::Skolem
    }
}

/// An argument slot: either an entity or a nested expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Arg {
    Entity(EntityId),
    Expr(ExprId),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expression {
    pub id: ExprId,
    pub functor: String,
    pub category: PredicateCategory,
    pub args: Vec<Arg>,
}

impl Expression {
    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn expr_args(&self) -> impl Iterator<Item = ExprId> + '_ {
        self.args.iter().filter_map(|a| match a {
            Arg::Expr(e) => Some(*e),
            Arg::Entity(_) => None,
        })
    }
}

/// Owned tree form of an expression, independent of any arena.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Term {
    Entity(String),
    App(String, Vec<Term>),
}

impl Term {
    pub fn app(functor: impl Into<String>, args: Vec<Term>) -> Term {
        Term::App(functor.into(), args)
    }

    pub fn entity(name: impl Into<String>) -> Term {
        Term::Entity(name.into())
    }

    pub fn functor(&self) -> Option<&str> {
        match self {
            Term::App(f, _) => Some(f),
            Term::Entity(_) => None,
        }
    }

    /// Pre-order walk over every application in the term, itself included.
    pub fn applications(&self) -> Vec<&Term> {
        let mut out = Vec::new();
        self.collect_apps(&mut out);
        out
    }

    fn collect_apps<'a>(&'a self, out: &mut Vec<&'a Term>) {
        if let Term::App(_, args) = self {
            out.push(self);
            for a in args {
                a.collect_apps(out);
            }
        }
    }

    pub fn entity_names(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_entities(&mut out);
        out
    }

    fn collect_entities<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Term::Entity(n) => {
                out.insert(n);
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_entities(out)),
        }
    }

    pub fn has_skolem(&self) -> bool {
        self.entity_names()
            .iter()
            .any(|n| n.starts_with(SKOLEM_PREFIX))
    }

    /// Renames skolem entities to `skolem_0`, `skolem_1`, ... in order of
    /// first occurrence, so that terms equal up to skolem renaming compare
    /// equal.
    pub fn skolem_canonical(&self) -> Term {
        fn go(t: &Term, seen: &mut Vec<String>) -> Term {
            match t {
                Term::Entity(n) if n.starts_with(SKOLEM_PREFIX) => {
                    let idx = match seen.iter().position(|s| s == n) {
                        Some(i) => i,
                        None => {
                            seen.push(n.clone());
                            seen.len() - 1
                        }
                    };
                    Term::Entity(format!("{SKOLEM_PREFIX}{idx}"))
                }
                Term::Entity(n) => Term::Entity(n.clone()),
                Term::App(f, args) => {
                    Term::App(f.clone(), args.iter().map(|a| go(a, seen)).collect())
                }
            }
        }
        go(self, &mut Vec::new())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Entity(n) => f.write_str(n),
            Term::App(functor, args) => {
                write!(f, "({functor}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KrError {
    #[error("{pos}: unbalanced parentheses: {detail}")]
    Unbalanced { pos: Pos, detail: String },
    #[error("{pos}: empty functor")]
    EmptyFunctor { pos: Pos },
    #[error("{pos}: `{name}` used with arity {found} but declared with arity {expected}")]
    ArityConflict {
        pos: Pos,
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("{pos}: invalid declaration: {detail}")]
    Declaration { pos: Pos, detail: String },
    #[error("{pos}: {detail}")]
    Syntax { pos: Pos, detail: String },
}

impl KrError {
    pub fn pos(&self) -> Pos {
        match self {
            KrError::Unbalanced { pos, .. }
            | KrError::EmptyFunctor { pos }
            | KrError::ArityConflict { pos, .. }
            | KrError::Declaration { pos, .. }
            | KrError::Syntax { pos, .. } => *pos,
        }
    }
}

/// A named micro-theory: declarations plus a set of root facts.
#[derive(Debug, Clone)]
pub struct Experience {
    id: String,
    declarations: Declarations,
    entities: Vec<EntitySymbol>,
    expressions: Vec<Expression>,
    facts: Vec<ExprId>,
    entity_index: HashMap<String, EntityId>,
    term_index: HashMap<Term, ExprId>,
}

impl PartialEq for Experience {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
            && self.declarations == other.declarations
            && self.entities == other.entities
            && self.expressions == other.expressions
            && self.facts == other.facts
    }
}

impl Experience {
    pub fn empty(id: impl Into<String>) -> Self {
        Experience {
            id: id.into(),
            declarations: Declarations::new(),
            entities: Vec::new(),
            expressions: Vec::new(),
            facts: Vec::new(),
            entity_index: HashMap::new(),
            term_index: HashMap::new(),
        }
    }

    /// Builds an experience from fact terms, resolving predicates against
    /// `vocabulary` and the suffix convention.
    pub fn from_terms(
        id: impl Into<String>,
        facts: &[Term],
        vocabulary: &Declarations,
    ) -> Result<Self, KrError> {
        let mut exp = Experience::empty(id);
        for t in facts {
            exp.assert_fact(t, vocabulary, Pos::default())?;
        }
        Ok(exp)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn declarations(&self) -> &Declarations {
        &self.declarations
    }

    pub fn entities(&self) -> &[EntitySymbol] {
        &self.entities
    }

    pub fn entity(&self, id: EntityId) -> &EntitySymbol {
        &self.entities[id.index()]
    }

    pub fn entity_id(&self, name: &str) -> Option<EntityId> {
        self.entity_index.get(name).copied()
    }

    pub fn expressions(&self) -> &[Expression] {
        &self.expressions
    }

    pub fn expr(&self, id: ExprId) -> &Expression {
        &self.expressions[id.index()]
    }

    /// Root facts in textual order.
    pub fn facts(&self) -> &[ExprId] {
        &self.facts
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn rationale_roots(&self) -> Vec<ExprId> {
        self.facts
            .iter()
            .copied()
            .filter(|&f| self.expr(f).functor == "why")
            .collect()
    }

    pub fn category_of(&self, functor: &str, arity: usize) -> PredicateCategory {
        categorize(functor, arity, &self.declarations)
    }

    pub fn term(&self, id: ExprId) -> Term {
        let e = self.expr(id);
        Term::App(
            e.functor.clone(),
            e.args.iter().map(|a| self.arg_term(*a)).collect(),
        )
    }

    pub fn arg_term(&self, arg: Arg) -> Term {
        match arg {
            Arg::Entity(en) => Term::Entity(self.entity(en).name.clone()),
            Arg::Expr(ex) => self.term(ex),
        }
    }

    pub fn fact_terms(&self) -> Vec<Term> {
        self.facts.iter().map(|&f| self.term(f)).collect()
    }

    /// Looks up a term anywhere in the experience, nested or not.
    pub fn find_term(&self, term: &Term) -> Option<ExprId> {
        self.term_index.get(term).copied()
    }

    pub fn is_fact(&self, id: ExprId) -> bool {
        self.facts.contains(&id)
    }

    /// Sum of argument slots over all distinct expressions.
    pub fn edge_count(&self) -> usize {
        self.expressions.iter().map(Expression::arity).sum()
    }

    pub fn has_skolems(&self) -> bool {
        self.entities.iter().any(EntitySymbol::is_skolem)
    }

    /// Entities referenced by an expression, transitively.
    pub fn entities_of(&self, id: ExprId) -> BTreeSet<EntityId> {
        let mut out = BTreeSet::new();
        let mut stack = vec![id];
        while let Some(e) = stack.pop() {
            for a in &self.expr(e).args {
                match *a {
                    Arg::Entity(en) => {
                        out.insert(en);
                    }
                    Arg::Expr(sub) => stack.push(sub),
                }
            }
        }
        out
    }

    /// Expressions reachable from `id`, itself included, in pre-order.
    pub fn subexpressions(&self, id: ExprId) -> Vec<ExprId> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(e) = stack.pop() {
            if out.contains(&e) {
                continue;
            }
            out.push(e);
            for sub in self
                .expr(e)
                .expr_args()
                .collect::<Vec<_>>()
                .into_iter()
                .rev()
            {
                stack.push(sub);
            }
        }
        out
    }

    /// Returns a copy with `terms` asserted as additional root facts. Unknown
    /// predicates take their declaration from `source` when present.
    pub fn augmented(&self, terms: &[Term], source: &Declarations) -> Result<Experience, KrError> {
        let mut next = self.clone();
        for t in terms {
            next.assert_fact(t, source, Pos::default())?;
        }
        Ok(next)
    }

    pub(crate) fn declare(&mut self, decl: PredicateDecl, pos: Pos) -> Result<(), KrError> {
        decl.check()
            .map_err(|detail| KrError::Declaration { pos, detail })?;
        self.declarations
            .declare(decl)
            .map_err(|c| KrError::ArityConflict {
                pos,
                name: c.name,
                expected: c.expected,
                found: c.found,
            })
    }

    pub(crate) fn assert_fact(
        &mut self,
        term: &Term,
        vocabulary: &Declarations,
        pos: Pos,
    ) -> Result<ExprId, KrError> {
        let Term::App(..) = term else {
            return Err(KrError::Syntax {
                pos,
                detail: format!("fact `{term}` is not an expression"),
            });
        };
        let id = self.intern(term, vocabulary, pos)?;
        if !self.facts.contains(&id) {
            self.facts.push(id);
        }
        Ok(id)
    }

    fn intern_entity(&mut self, name: &str) -> EntityId {
        if let Some(&id) = self.entity_index.get(name) {
            return id;
        }
        let id = EntityId(self.entities.len() as u32);
        self.entities.push(EntitySymbol::new(name));
        self.entity_index.insert(name.to_string(), id);
        id
    }

    /// Interns `term` in pre-order so that ids follow textual order.
    fn intern(
        &mut self,
        term: &Term,
        vocabulary: &Declarations,
        pos: Pos,
    ) -> Result<ExprId, KrError> {
        let Term::App(functor, args) = term else {
            unreachable!("entities are interned separately");
        };
        if let Some(&id) = self.term_index.get(term) {
            return Ok(id);
        }
        if functor.is_empty() {
            return Err(KrError::EmptyFunctor { pos });
        }
        if args.is_empty() {
            return Err(KrError::Syntax {
                pos,
                detail: format!("predicate `{functor}` has no arguments"),
            });
        }
        let decl = self
            .declarations
            .resolve_use(functor, args.len(), vocabulary)
            .map_err(|c| KrError::ArityConflict {
                pos,
                name: c.name,
                expected: c.expected,
                found: c.found,
            })?
            .clone();
        decl.check()
            .map_err(|detail| KrError::Declaration { pos, detail })?;
        if !is_connective(functor) {
            for a in args {
                if let Term::App(inner, inner_args) = a {
                    let cat = match self
                        .declarations
                        .get(inner)
                        .or_else(|| vocabulary.get(inner))
                    {
                        Some(d) => d.category,
                        None => categorize_by_convention(inner, inner_args.len()),
                    };
                    if cat != PredicateCategory::Function {
                        return Err(KrError::Syntax {
                            pos,
                            detail: format!(
                                "`{functor}` is first-order; argument `{a}` must be an entity or function term"
                            ),
                        });
                    }
                }
            }
        }
        let id = ExprId(self.expressions.len() as u32);
        self.expressions.push(Expression {
            id,
            functor: functor.clone(),
            category: decl.category,
            args: Vec::with_capacity(args.len()),
        });
        self.term_index.insert(term.clone(), id);
        let mut resolved = Vec::with_capacity(args.len());
        for a in args {
            resolved.push(match a {
                Term::Entity(n) => Arg::Entity(self.intern_entity(n)),
                Term::App(..) => Arg::Expr(self.intern(a, vocabulary, pos)?),
            });
        }
        self.expressions[id.index()].args = resolved;
        Ok(id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> Term {
        let exp = parse_experience("t", s, &ParseConfig::default()).unwrap();
        exp.term(exp.facts()[0])
    }

    #[test]
    fn shared_subexpressions_are_interned() {
        let exp = parse_experience(
            "x",
            "(travelTo door customer)\n(why (travelTo door customer) (safeDesire customer))",
            &ParseConfig::default(),
        )
        .unwrap();
        assert_eq!(exp.facts().len(), 2);
        assert_eq!(exp.expressions().len(), 3);
        assert_eq!(exp.edge_count(), 2 + 2 + 1);
    }

    #[test]
    fn skolem_canonical_form_ignores_names() {
        let a = t("(and (dangerAff skolem_car) (near skolem_car skolem_x))");
        let b = t("(and (dangerAff skolem_fire) (near skolem_fire skolem_y))");
        let c = t("(and (dangerAff skolem_fire) (near skolem_y skolem_fire))");
        assert_eq!(a.skolem_canonical(), b.skolem_canonical());
        assert_ne!(a.skolem_canonical(), c.skolem_canonical());
    }

    #[test]
    fn skolem_origin_follows_prefix() {
        assert!(EntitySymbol::new("skolem_car_cfMt").is_skolem());
        assert!(!EntitySymbol::new("car_cfMt").is_skolem());
        assert_eq!(EntitySymbol::skolem_for("car_cfMt").name, "skolem_car_cfMt");
    }

    #[test]
    fn augmentation_keeps_original_facts() {
        let exp = parse_experience("x", "(flee customer)", &ParseConfig::default()).unwrap();
        let more = exp
            .augmented(&[t("(dangerAff person)")], &Declarations::new())
            .unwrap();
        assert_eq!(more.fact_terms()[0], exp.fact_terms()[0]);
        assert_eq!(more.facts().len(), 2);
        assert_eq!(
            more.category_of("dangerAff", 1),
            PredicateCategory::Affordance
        );
    }

    #[test]
    fn first_order_predicates_reject_nested_relations() {
        let err =
            parse_experience("x", "(stranger (flee p))", &ParseConfig::default()).unwrap_err();
        assert!(matches!(err, KrError::Syntax { .. }), "{err}");
        parse_experience(
            "x",
            "(greater (massFn sun) (massFn planet))",
            &ParseConfig::default(),
        )
        .unwrap();
    }
}
