//! Random experience generation and a brute-force merge oracle, shared by
//! the property suites.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use stance_core::kr::{Arg, Declarations, Experience, Term};
use stance_core::sme::{Item, MatchHypothesis};

const ATOMS: &[(&str, usize)] = &[
    ("r1", 2),
    ("r2", 2),
    ("a1", 1),
    ("a2", 1),
    ("warmAff", 1),
    ("softAff", 1),
    ("coldDes", 1),
    ("tiredDes", 1),
];
const CONNECTIVES: &[&str] = &["and", "causes", "implies", "why"];
const ENTITIES: &[&str] = &["e0", "e1", "e2", "e3"];
const FUNCTIONS: &[&str] = &["massFn", "heightFn"];

fn entity(rng: &mut ChaCha8Rng, prefix: &str) -> Term {
    Term::entity(format!("{prefix}{}", ENTITIES.choose(rng).unwrap()))
}

pub fn random_term(rng: &mut ChaCha8Rng, prefix: &str, depth: usize) -> Term {
    if depth == 0 || rng.gen_bool(0.55) {
        let (name, arity) = *ATOMS.choose(rng).unwrap();
        let args = (0..arity)
            .map(|_| {
                if arity == 2 && rng.gen_bool(0.15) {
                    Term::app(*FUNCTIONS.choose(rng).unwrap(), vec![entity(rng, prefix)])
                } else {
                    entity(rng, prefix)
                }
            })
            .collect();
        Term::app(name, args)
    } else {
        let c = *CONNECTIVES.choose(rng).unwrap();
        Term::app(
            c,
            vec![
                random_term(rng, prefix, depth - 1),
                random_term(rng, prefix, depth - 1),
            ],
        )
    }
}

/// An experience with between one and `max_roots` root facts.
pub fn random_experience(
    rng: &mut ChaCha8Rng,
    id: &str,
    prefix: &str,
    max_roots: usize,
) -> Experience {
    let n = rng.gen_range(1..=max_roots);
    let terms: Vec<Term> = (0..n).map(|_| random_term(rng, prefix, 2)).collect();
    Experience::from_terms(id, &terms, &Declarations::new()).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn item(a: Arg) -> Item {
    match a {
        Arg::Entity(e) => Item::Entity(e),
        Arg::Expr(e) => Item::Expr(e),
    }
}

/// Every maximal non-empty set of match hypotheses that is one-to-one and
/// closed under argument support, found by trying all subsets of the
/// expression matches. Each set is returned as its sorted pair list.
pub fn exhaustive_gmaps(
    base: &Experience,
    target: &Experience,
    mhs: &[MatchHypothesis],
) -> BTreeSet<Vec<(Item, Item)>> {
    let exprs: Vec<&MatchHypothesis> = mhs.iter().filter(|m| m.is_expression()).collect();
    let available: BTreeSet<(Item, Item)> = mhs.iter().map(MatchHypothesis::pair).collect();
    assert!(exprs.len() <= 20, "oracle input too large");
    let mut valid: Vec<BTreeSet<(Item, Item)>> = Vec::new();
    'subsets: for mask in 1u32..(1 << exprs.len()) {
        let chosen: BTreeSet<(Item, Item)> = exprs
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, m)| m.pair())
            .collect();
        let mut all = chosen.clone();
        for &(b, t) in &chosen {
            let (Item::Expr(b), Item::Expr(t)) = (b, t) else {
                unreachable!()
            };
            for (ba, ta) in base.expr(b).args.iter().zip(&target.expr(t).args) {
                let pair = (item(*ba), item(*ta));
                match pair {
                    (Item::Expr(_), Item::Expr(_)) if !chosen.contains(&pair) => continue 'subsets,
                    (Item::Entity(_), Item::Entity(_)) if available.contains(&pair) => {
                        all.insert(pair);
                    }
                    (Item::Expr(_), Item::Expr(_)) => {}
                    _ => continue 'subsets,
                }
            }
        }
        let mut fwd = BTreeMap::new();
        let mut rev = BTreeMap::new();
        for &(b, t) in &all {
            if *fwd.entry(b).or_insert(t) != t || *rev.entry(t).or_insert(b) != b {
                continue 'subsets;
            }
        }
        valid.push(all);
    }
    valid
        .iter()
        .filter(|s| !valid.iter().any(|o| o.len() > s.len() && s.is_subset(o)))
        .map(|s| s.iter().copied().collect())
        .collect()
}

/// A random pair small enough for the exhaustive oracle.
pub fn oracle_pair(
    rng: &mut ChaCha8Rng,
    max_roots: usize,
    max_expr_matches: usize,
) -> (Experience, Experience) {
    loop {
        let b = random_experience(rng, "b", "b_", max_roots);
        let t = random_experience(rng, "t", "t_", max_roots);
        let n = stance_core::sme::local_matches(&b, &t, &Default::default())
            .iter()
            .filter(|m| m.is_expression())
            .count();
        if n <= max_expr_matches {
            return (b, t);
        }
    }
}
