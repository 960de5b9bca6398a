use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Higher-order connectives. Their arguments may be expressions of any kind.
pub const CONNECTIVES: [&str; 5] = ["and", "implies", "causes", "why", "advantage"];

pub fn is_connective(name: &str) -> bool {
    CONNECTIVES.contains(&name)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PredicateCategory {
    Relation,
    Attribute,
    Function,
    Affordance,
    Desire,
    Transformation,
}

impl PredicateCategory {
    pub const ALL: [PredicateCategory; 6] = [
        PredicateCategory::Relation,
        PredicateCategory::Attribute,
        PredicateCategory::Function,
        PredicateCategory::Affordance,
        PredicateCategory::Desire,
        PredicateCategory::Transformation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PredicateCategory::Relation => "relation",
            PredicateCategory::Attribute => "attribute",
            PredicateCategory::Function => "function",
            PredicateCategory::Affordance => "affordance",
            PredicateCategory::Desire => "desire",
            PredicateCategory::Transformation => "transformation",
        }
    }

    /// Categories whose members may match each other under different names.
    pub fn is_flexible(self) -> bool {
        matches!(
            self,
            PredicateCategory::Function
                | PredicateCategory::Affordance
                | PredicateCategory::Desire
                | PredicateCategory::Transformation
        )
    }

    /// Categories restricted to a single argument.
    pub fn is_unary(self) -> bool {
        self != PredicateCategory::Relation
    }
}

impl fmt::Display for PredicateCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PredicateCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PredicateCategory::ALL
            .into_iter()
            .find(|c| c.as_str() == s.to_ascii_lowercase())
            .ok_or_else(|| format!("unknown predicate category `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PredicateDecl {
    pub name: String,
    pub arity: usize,
    pub category: PredicateCategory,
    pub is_event: bool,
}

impl PredicateDecl {
    pub fn new(name: impl Into<String>, arity: usize, category: PredicateCategory) -> Self {
        PredicateDecl {
            name: name.into(),
            arity,
            category,
            is_event: false,
        }
    }

    pub fn event(mut self) -> Self {
        self.is_event = true;
        self
    }

    /// Checks the declaration-level invariants, returning a description of the
    /// first violation.
    pub fn check(&self) -> Result<(), String> {
        if self.name.is_empty() {
            return Err("empty predicate name".into());
        }
        if self.arity == 0 {
            return Err(format!("`{}` declared with arity 0", self.name));
        }
        if self.category.is_unary() && self.arity != 1 {
            return Err(format!(
                "`{}` is a {} and must have arity 1, not {}",
                self.name, self.category, self.arity
            ));
        }
        if self.is_event
            && !matches!(
                self.category,
                PredicateCategory::Relation | PredicateCategory::Attribute
            )
        {
            return Err(format!(
                "`{}` is a {} and cannot be an event",
                self.name, self.category
            ));
        }
        Ok(())
    }

    fn builtin(name: &str) -> Option<PredicateDecl> {
        is_connective(name).then(|| PredicateDecl::new(name, 2, PredicateCategory::Relation))
    }
}

/// Suffix-convention categorization for predicates without an explicit
/// declaration.
pub fn categorize_by_convention(name: &str, arity: usize) -> PredicateCategory {
    if arity >= 2 || is_connective(name) {
        return PredicateCategory::Relation;
    }
    if name.ends_with("Aff") {
        PredicateCategory::Affordance
    } else if name.ends_with("Des") || name.ends_with("Desire") {
        PredicateCategory::Desire
    } else if name.ends_with("Tf") {
        PredicateCategory::Transformation
    } else if name.ends_with("Fn") {
        PredicateCategory::Function
    } else {
        PredicateCategory::Attribute
    }
}

/// Resolves the category of `name`: an explicit declaration wins, then the
/// suffix convention.
pub fn categorize(name: &str, arity: usize, decls: &Declarations) -> PredicateCategory {
    match decls.get(name) {
        Some(d) => d.category,
        None => categorize_by_convention(name, arity),
    }
}

/// A predicate table keyed by name.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Declarations {
    map: BTreeMap<String, PredicateDecl>,
}

impl Declarations {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, name: &str) -> Option<&PredicateDecl> {
        self.map.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &PredicateDecl> {
        self.map.values()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn is_event(&self, name: &str) -> bool {
        self.map.get(name).is_some_and(|d| d.is_event)
    }

    /// Inserts a declaration, failing if it disagrees with an existing entry.
    pub fn declare(&mut self, decl: PredicateDecl) -> Result<(), DeclConflict> {
        if let Some(builtin) = PredicateDecl::builtin(&decl.name) {
            if builtin.arity != decl.arity || builtin.category != decl.category {
                return Err(DeclConflict {
                    name: decl.name,
                    expected: builtin.arity,
                    found: decl.arity,
                });
            }
        }
        match self.map.get(&decl.name) {
            Some(existing) if existing.arity != decl.arity => Err(DeclConflict {
                name: decl.name,
                expected: existing.arity,
                found: decl.arity,
            }),
            Some(existing) if existing == &decl => Ok(()),
            _ => {
                self.map.insert(decl.name.clone(), decl);
                Ok(())
            }
        }
    }

    /// Looks up `name` for a use with `arity` arguments, consulting `fallback`
    /// (an external vocabulary) and then the suffix convention. The resolved
    /// declaration is recorded in `self`.
    pub fn resolve_use(
        &mut self,
        name: &str,
        arity: usize,
        fallback: &Declarations,
    ) -> Result<&PredicateDecl, DeclConflict> {
        if !self.map.contains_key(name) {
            let decl = PredicateDecl::builtin(name)
                .or_else(|| fallback.get(name).cloned())
                .unwrap_or_else(|| {
                    PredicateDecl::new(name, arity, categorize_by_convention(name, arity))
                });
            self.map.insert(name.to_string(), decl);
        }
        let decl = &self.map[name];
        if decl.arity != arity {
            return Err(DeclConflict {
                name: name.to_string(),
                expected: decl.arity,
                found: arity,
            });
        }
        Ok(decl)
    }

    /// Adds every entry of `other` whose name is not yet present.
    pub fn absorb(&mut self, other: &Declarations) {
        for d in other.iter() {
            self.map.entry(d.name.clone()).or_insert_with(|| d.clone());
        }
    }
}

impl FromIterator<PredicateDecl> for Declarations {
    fn from_iter<I: IntoIterator<Item = PredicateDecl>>(iter: I) -> Self {
        Declarations {
            map: iter.into_iter().map(|d| (d.name.clone(), d)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeclConflict {
    pub name: String,
    pub expected: usize,
    pub found: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suffix_conventions() {
        let d = Declarations::new();
        assert_eq!(
            categorize("dangerAff", 1, &d),
            PredicateCategory::Affordance
        );
        assert_eq!(categorize("stranger", 1, &d), PredicateCategory::Attribute);
        assert_eq!(categorize("travelTo", 2, &d), PredicateCategory::Relation);
        assert_eq!(categorize("tiredDes", 1, &d), PredicateCategory::Desire);
        assert_eq!(categorize("safeDesire", 1, &d), PredicateCategory::Desire);
        assert_eq!(
            categorize("asleepTf", 1, &d),
            PredicateCategory::Transformation
        );
        assert_eq!(categorize("heightFn", 1, &d), PredicateCategory::Function);
        assert_eq!(categorize("why", 2, &d), PredicateCategory::Relation);
        // suffixes only apply to unary predicates
        assert_eq!(categorize("linkFn", 2, &d), PredicateCategory::Relation);
    }

    #[test]
    fn explicit_declaration_overrides_suffix() {
        let d: Declarations = [PredicateDecl::new(
            "dangerAff",
            1,
            PredicateCategory::Attribute,
        )]
        .into_iter()
        .collect();
        assert_eq!(categorize("dangerAff", 1, &d), PredicateCategory::Attribute);
    }

    #[test]
    fn declaration_checks() {
        assert!(PredicateDecl::new("x", 0, PredicateCategory::Relation)
            .check()
            .is_err());
        assert!(PredicateDecl::new("xAff", 2, PredicateCategory::Affordance)
            .check()
            .is_err());
        assert!(PredicateDecl::new("xAff", 1, PredicateCategory::Affordance)
            .event()
            .check()
            .is_err());
        assert!(PredicateDecl::new("flee", 1, PredicateCategory::Attribute)
            .event()
            .check()
            .is_ok());
    }

    #[test]
    fn conflicting_arity_is_rejected() {
        let mut d = Declarations::new();
        d.declare(PredicateDecl::new("pump", 2, PredicateCategory::Relation))
            .unwrap();
        let err = d
            .declare(PredicateDecl::new("pump", 3, PredicateCategory::Relation))
            .unwrap_err();
        assert_eq!((err.expected, err.found), (2, 3));
        assert!(d
            .declare(PredicateDecl::new("why", 3, PredicateCategory::Relation))
            .is_err());
    }
}
