use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::local::item_of;
use super::{Gmap, Item, MatchHypothesis, SmeConfig, SmeError};
use crate::kr::Experience;

/// The closure of one expression match under argument support, as indices
/// into the candidate list, with its induced correspondence.
struct Unit {
    members: BTreeSet<usize>,
    fwd: BTreeMap<Item, Item>,
    rev: BTreeMap<Item, Item>,
}

fn build_unit(
    root: usize,
    mhs: &[MatchHypothesis],
    index: &HashMap<(Item, Item), usize>,
    base: &Experience,
    target: &Experience,
) -> Option<Unit> {
    let mut unit = Unit {
        members: BTreeSet::new(),
        fwd: BTreeMap::new(),
        rev: BTreeMap::new(),
    };
    let mut stack = vec![root];
    while let Some(i) = stack.pop() {
        if !unit.members.insert(i) {
            continue;
        }
        let m = &mhs[i];
        if *unit.fwd.entry(m.base).or_insert(m.target) != m.target
            || *unit.rev.entry(m.target).or_insert(m.base) != m.base
        {
            return None;
        }
        if let (Item::Expr(b), Item::Expr(t)) = (m.base, m.target) {
            let (be, te) = (base.expr(b), target.expr(t));
            if be.arity() != te.arity() {
                return None;
            }
            for (ba, ta) in be.args.iter().zip(&te.args) {
                stack.push(*index.get(&(item_of(*ba), item_of(*ta)))?);
            }
        }
    }
    Some(unit)
}

fn compatible(a: &Unit, b: &Unit) -> bool {
    a.fwd
        .iter()
        .all(|(x, y)| b.fwd.get(x).is_none_or(|y2| y2 == y))
        && a.rev
            .iter()
            .all(|(y, x)| b.rev.get(y).is_none_or(|x2| x2 == x))
}

struct Search<'a> {
    adj: &'a [BTreeSet<usize>],
    cliques: Vec<BTreeSet<usize>>,
    states: usize,
    cap: usize,
}

impl Search<'_> {
    fn expand(
        &mut self,
        r: &mut Vec<usize>,
        mut p: BTreeSet<usize>,
        mut x: BTreeSet<usize>,
    ) -> bool {
        self.states += 1;
        if self.states > self.cap {
            return false;
        }
        if p.is_empty() {
            if x.is_empty() {
                self.cliques.push(r.iter().copied().collect());
            }
            return true;
        }
        let pivot = *p
            .union(&x)
            .max_by_key(|&&u| p.intersection(&self.adj[u]).count())
            .expect("p is non-empty");
        let candidates: Vec<usize> = p.difference(&self.adj[pivot]).copied().collect();
        for v in candidates {
            r.push(v);
            let np = p.intersection(&self.adj[v]).copied().collect();
            let nx = x.intersection(&self.adj[v]).copied().collect();
            if !self.expand(r, np, nx) {
                return false;
            }
            r.pop();
            p.remove(&v);
            x.insert(v);
        }
        true
    }
}

/// Combines match hypotheses into maximal, structurally consistent global
/// mappings.
///
/// Each expression match drags in the matches for its arguments. Those
/// closures that are one-to-one on their own are merged into every maximal
/// mutually compatible collection. Gmaps come back in a canonical order;
/// scores and inferences are left for the caller.
pub fn merge_gmaps(
    base: &Experience,
    target: &Experience,
    mhs: &[MatchHypothesis],
    config: &SmeConfig,
) -> Result<Vec<Gmap>, SmeError> {
    let index: HashMap<(Item, Item), usize> =
        mhs.iter().enumerate().map(|(i, m)| (m.pair(), i)).collect();
    let units: Vec<Unit> = mhs
        .iter()
        .enumerate()
        .filter(|(_, m)| m.is_expression())
        .filter_map(|(i, _)| build_unit(i, mhs, &index, base, target))
        .collect();
    let n = units.len();
    let adj: Vec<BTreeSet<usize>> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i && compatible(&units[i], &units[j]))
                .collect()
        })
        .collect();
    let mut search = Search {
        adj: &adj,
        cliques: Vec::new(),
        states: 0,
        cap: config.merge_cap,
    };
    if n > 0 && !search.expand(&mut Vec::new(), (0..n).collect(), BTreeSet::new()) {
        return Err(SmeError::MergeLimit {
            cap: config.merge_cap,
            candidates: mhs.len(),
        });
    }
    let mut member_sets: Vec<BTreeSet<usize>> = search
        .cliques
        .iter()
        .map(|c| {
            c.iter()
                .flat_map(|&u| units[u].members.iter().copied())
                .collect()
        })
        .collect();
    member_sets.sort();
    member_sets.dedup();
    Ok(member_sets
        .into_iter()
        .map(|s| Gmap::from_matches(s.into_iter().map(|i| mhs[i].clone()).collect()))
        .collect())
}
