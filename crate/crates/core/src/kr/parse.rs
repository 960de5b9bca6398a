use std::collections::BTreeMap;

use super::{Declarations, Experience, KrError, Pos, PredicateCategory, PredicateDecl, Term};

/// Parser settings: an external vocabulary of declarations (event flags,
/// explicit categories) and the spelling normalization table.
#[derive(Debug, Clone)]
pub struct ParseConfig {
    pub vocabulary: Declarations,
    pub spelling: BTreeMap<String, String>,
}

impl Default for ParseConfig {
    fn default() -> Self {
        let spelling = [("aggresive", "aggressive"), ("cause", "causes")]
            .into_iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        ParseConfig {
            vocabulary: Declarations::new(),
            spelling,
        }
    }
}

impl ParseConfig {
    pub fn with_vocabulary(vocabulary: Declarations) -> Self {
        ParseConfig {
            vocabulary,
            ..ParseConfig::default()
        }
    }

    fn normalize<'a>(&'a self, name: &'a str) -> &'a str {
        self.spelling.get(name).map_or(name, String::as_str)
    }
}

#[derive(Debug)]
enum Node {
    Atom(String, Pos),
    List(Vec<Node>, Pos),
}

impl Node {
    fn pos(&self) -> Pos {
        match self {
            Node::Atom(_, p) | Node::List(_, p) => *p,
        }
    }
}

/// Reads the source into top-level s-expressions.
fn read(text: &str) -> Result<Vec<Node>, KrError> {
    let mut stack: Vec<(Vec<Node>, Pos)> = Vec::new();
    let mut top = Vec::new();
    let mut atom = String::new();
    let mut atom_pos = Pos::default();

    fn flush(atom: &mut String, pos: Pos, stack: &mut [(Vec<Node>, Pos)], top: &mut Vec<Node>) {
        if atom.is_empty() {
            return;
        }
        let node = Node::Atom(std::mem::take(atom), pos);
        match stack.last_mut() {
            Some((items, _)) => items.push(node),
            None => top.push(node),
        }
    }

    for (lineno, line) in text.lines().enumerate() {
        for (col, c) in line.char_indices() {
            let pos = Pos {
                line: lineno + 1,
                column: col + 1,
            };
            match c {
                ';' => break,
                '(' => {
                    flush(&mut atom, atom_pos, &mut stack, &mut top);
                    stack.push((Vec::new(), pos));
                }
                ')' => {
                    flush(&mut atom, atom_pos, &mut stack, &mut top);
                    let Some((items, open)) = stack.pop() else {
                        return Err(KrError::Unbalanced {
                            pos,
                            detail: "unexpected `)`".into(),
                        });
                    };
                    let node = Node::List(items, open);
                    match stack.last_mut() {
                        Some((items, _)) => items.push(node),
                        None => top.push(node),
                    }
                }
                c if c.is_whitespace() => flush(&mut atom, atom_pos, &mut stack, &mut top),
                c => {
                    if atom.is_empty() {
                        atom_pos = pos;
                    }
                    atom.push(c);
                }
            }
        }
        flush(&mut atom, atom_pos, &mut stack, &mut top);
    }
    if let Some((_, open)) = stack.last() {
        return Err(KrError::Unbalanced {
            pos: *open,
            detail: "`(` is never closed".into(),
        });
    }
    Ok(top)
}

fn to_term(node: &Node, config: &ParseConfig) -> Result<Term, KrError> {
    match node {
        Node::Atom(name, _) => Ok(Term::Entity(name.clone())),
        Node::List(items, pos) => {
            let Some(head) = items.first() else {
                return Err(KrError::EmptyFunctor { pos: *pos });
            };
            let Node::Atom(functor, _) = head else {
                return Err(KrError::EmptyFunctor { pos: head.pos() });
            };
            if items.len() == 1 {
                return Err(KrError::Syntax {
                    pos: *pos,
                    detail: format!("predicate `{functor}` has no arguments"),
                });
            }
            let args = items[1..]
                .iter()
                .map(|n| to_term(n, config))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Term::App(config.normalize(functor).to_string(), args))
        }
    }
}

fn to_declaration(
    items: &[Node],
    pos: Pos,
    config: &ParseConfig,
) -> Result<PredicateDecl, KrError> {
    let bad = |detail: &str| KrError::Declaration {
        pos,
        detail: detail.to_string(),
    };
    let atoms = items[1..]
        .iter()
        .map(|n| match n {
            Node::Atom(a, _) => Ok(a.as_str()),
            Node::List(..) => Err(bad("declaration fields must be symbols")),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let (name, arity, category, flag) = match atoms.as_slice() {
        [n, a, c] => (*n, *a, *c, None),
        [n, a, c, f] => (*n, *a, *c, Some(*f)),
        _ => return Err(bad("expected (declare <name> <arity> <category> [event])")),
    };
    let arity: usize = arity
        .parse()
        .map_err(|_| bad(&format!("arity `{arity}` is not a non-negative integer")))?;
    let category: PredicateCategory = category.parse().map_err(|e: String| bad(&e))?;
    let mut decl = PredicateDecl::new(config.normalize(name), arity, category);
    match flag {
        None => {}
        Some("event") => decl.is_event = true,
        Some(other) => return Err(bad(&format!("unknown declaration flag `{other}`"))),
    }
    Ok(decl)
}

/// Parses micro-theory source text into an [`Experience`].
pub fn parse_experience(id: &str, text: &str, config: &ParseConfig) -> Result<Experience, KrError> {
    let mut exp = Experience::empty(id);
    for node in read(text)? {
        let Node::List(items, pos) = &node else {
            return Err(KrError::Syntax {
                pos: node.pos(),
                detail: "expected a parenthesized fact".into(),
            });
        };
        if matches!(items.first(), Some(Node::Atom(a, _)) if a == "declare") {
            let decl = to_declaration(items, *pos, config)?;
            exp.declare(decl, *pos)?;
            continue;
        }
        let term = to_term(&node, config)?;
        exp.assert_fact(&term, &config.vocabulary, *pos)?;
    }
    Ok(exp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kr::{Arg, PredicateCategory};

    fn parse(text: &str) -> Result<Experience, KrError> {
        parse_experience("test", text, &ParseConfig::default())
    }

    #[test]
    fn single_relation() {
        let exp = parse("(travelTo Door Customer)").unwrap();
        assert_eq!(exp.facts().len(), 1);
        let e = exp.expr(exp.facts()[0]);
        assert_eq!(e.functor, "travelTo");
        assert_eq!(e.category, PredicateCategory::Relation);
        assert!(e.args.iter().all(|a| matches!(a, Arg::Entity(_))));
        assert_eq!(exp.entities().len(), 2);
    }

    #[test]
    fn empty_input() {
        let exp = parse("").unwrap();
        assert!(exp.facts().is_empty());
        let exp = parse("; only a comment\n\n").unwrap();
        assert!(exp.facts().is_empty());
    }

    #[test]
    fn unbalanced_reports_position() {
        let err = parse("(flee a)\n(travelTo a b").unwrap_err();
        assert_eq!(err.pos(), Pos { line: 2, column: 1 });
        let err = parse("(flee a))").unwrap_err();
        assert_eq!(err.pos(), Pos { line: 1, column: 9 });
        assert!(matches!(err, KrError::Unbalanced { .. }));
    }

    #[test]
    fn empty_functor() {
        assert!(matches!(parse("()"), Err(KrError::EmptyFunctor { .. })));
        assert!(matches!(
            parse("((a) b)"),
            Err(KrError::EmptyFunctor { .. })
        ));
    }

    #[test]
    fn arity_conflicts() {
        let err = parse("(pump gas customer)\n(pump gas)").unwrap_err();
        assert!(
            matches!(
                err,
                KrError::ArityConflict {
                    expected: 2,
                    found: 1,
                    ..
                }
            ),
            "{err}"
        );
        let err = parse("(declare pump 2 relation)\n(pump gas)").unwrap_err();
        assert!(matches!(err, KrError::ArityConflict { .. }));
        let err = parse("(why (flee a))").unwrap_err();
        assert!(matches!(err, KrError::ArityConflict { name, .. } if name == "why"));
    }

    #[test]
    fn declarations_and_event_flags() {
        let exp =
            parse("(declare flee 1 attribute event)\n(declare warmth 1 affordance)\n(warmth fire)")
                .unwrap();
        assert!(exp.declarations().is_event("flee"));
        assert_eq!(exp.category_of("warmth", 1), PredicateCategory::Affordance);
        assert!(parse("(declare x 1 bogus)").is_err());
        assert!(parse("(declare x 1 relation maybe)").is_err());
    }

    #[test]
    fn vocabulary_supplies_event_flags() {
        let vocab = parse("(declare flee 1 attribute event)").unwrap();
        let cfg = ParseConfig::with_vocabulary(vocab.declarations().clone());
        let exp = parse_experience("t", "(flee customer)", &cfg).unwrap();
        assert!(exp.declarations().is_event("flee"));
    }

    #[test]
    fn spelling_normalization() {
        let exp = parse("(aggresive dog)\n(cause (catchFire car) (dangerAff car))").unwrap();
        let terms: Vec<String> = exp.fact_terms().iter().map(ToString::to_string).collect();
        assert_eq!(terms[0], "(aggressive dog)");
        assert!(terms[1].starts_with("(causes "));
    }

    #[test]
    fn ids_follow_textual_order() {
        let exp = parse("(why (flee p) (and (dangerAff d) (safeDesire p)))").unwrap();
        let functors: Vec<&str> = exp
            .expressions()
            .iter()
            .map(|e| e.functor.as_str())
            .collect();
        assert_eq!(functors, ["why", "flee", "and", "dangerAff", "safeDesire"]);
    }

    #[test]
    fn duplicate_top_level_fact_is_one_fact() {
        let exp = parse("(flee a)\n(flee a)").unwrap();
        assert_eq!(exp.facts().len(), 1);
    }
}
