use std::collections::{BTreeMap, HashMap};

use super::{Gmap, ScoreWeights};
use crate::kr::{Arg, Experience, ExprId};

/// Structural evaluation: each expression match gets `base` plus
/// `trickle_down` times the heaviest matched parent. The score is the sum
/// over expression matches, accumulated in canonical order.
pub fn score_gmap(
    gmap: &Gmap,
    base: &Experience,
    target: &Experience,
    weights: &ScoreWeights,
) -> f64 {
    let map = gmap.expr_map();
    let mut parents: HashMap<(ExprId, ExprId), Vec<(ExprId, ExprId)>> = HashMap::new();
    for (&b, &t) in &map {
        for (ba, ta) in base.expr(b).args.iter().zip(&target.expr(t).args) {
            if let (Arg::Expr(x), Arg::Expr(y)) = (*ba, *ta) {
                parents.entry((x, y)).or_default().push((b, t));
            }
        }
    }
    let mut memo = BTreeMap::new();
    map.iter()
        .map(|(&b, &t)| weight((b, t), &parents, weights, &mut memo))
        .sum()
}

fn weight(
    pair: (ExprId, ExprId),
    parents: &HashMap<(ExprId, ExprId), Vec<(ExprId, ExprId)>>,
    weights: &ScoreWeights,
    memo: &mut BTreeMap<(ExprId, ExprId), f64>,
) -> f64 {
    if let Some(&w) = memo.get(&pair) {
        return w;
    }
    let inherited = parents
        .get(&pair)
        .into_iter()
        .flatten()
        .map(|&p| weight(p, parents, weights, memo))
        .fold(0.0, f64::max);
    let w = weights.base + weights.trickle_down * inherited;
    memo.insert(pair, w);
    w
}
