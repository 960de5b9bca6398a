use super::{is_connective, Experience};

/// Deterministic text form: one `declare` line per non-connective predicate,
/// sorted by name, then one fact per line in fact order.
pub fn canonical_serialize(exp: &Experience) -> String {
    let mut out = String::new();
    for d in exp
        .declarations()
        .iter()
        .filter(|d| !is_connective(&d.name))
    {
        out.push_str(&format!(
            "(declare {} {} {}",
            d.name,
            d.arity,
            d.category.as_str()
        ));
        if d.is_event {
            out.push_str(" event");
        }
        out.push_str(")\n");
    }
    for t in exp.fact_terms() {
        out.push_str(&t.to_string());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kr::{parse_experience, ParseConfig};

    #[test]
    fn empty_experience_serializes_to_nothing() {
        let exp = parse_experience("e", "", &ParseConfig::default()).unwrap();
        assert_eq!(canonical_serialize(&exp), "");
    }

    #[test]
    fn whitespace_and_comments_do_not_matter() {
        let cfg = ParseConfig::default();
        let a = parse_experience("x", "(why  (flee p)\n   (safeDesire p)) ; c", &cfg).unwrap();
        let b = parse_experience("x", "(why (flee p) (safeDesire p))", &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(canonical_serialize(&a), canonical_serialize(&b));
        assert_eq!(
            canonical_serialize(&a),
            "(declare flee 1 attribute)\n(declare safeDesire 1 desire)\n(why (flee p) (safeDesire p))\n"
        );
    }
}
