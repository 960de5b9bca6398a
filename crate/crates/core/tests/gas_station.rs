use std::fs;
use std::path::PathBuf;

use stance_core::kr::{parse_experience, Experience, ParseConfig, Term};
use stance_core::sme::best_analogy;
use stance_core::synthesis::{
    order_bases, predicate_similarity, synthesize, BaseLibrary, SynthesisConfig,
};

const BASES: [&str; 4] = ["gsMt", "daMt", "dcMt", "cfMt"];

fn corpus() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn config() -> ParseConfig {
    let text = fs::read_to_string(corpus().join("events.mt")).unwrap();
    let vocab = parse_experience("events", &text, &ParseConfig::default()).unwrap();
    ParseConfig::with_vocabulary(vocab.declarations().clone())
}

fn load(name: &str) -> Experience {
    let text = fs::read_to_string(corpus().join("gas_station").join(format!("{name}.mt"))).unwrap();
    parse_experience(name, &text, &config()).unwrap()
}

fn term(s: &str) -> Term {
    parse_experience("q", s, &ParseConfig::default())
        .unwrap()
        .fact_terms()
        .remove(0)
}

fn library(order: &[&str]) -> BaseLibrary {
    BaseLibrary::new(order.iter().map(|n| load(n)).collect()).unwrap()
}

fn run(order: &[&str]) -> stance_core::synthesis::SynthesisResult {
    let cfg = SynthesisConfig {
        use_heuristic: false,
        events: config().vocabulary,
        ..SynthesisConfig::default()
    };
    synthesize(&library(order), &load("target"), &cfg).unwrap()
}

#[test]
fn normal_visit_has_one_rationale() {
    let gs = load("gsMt");
    assert_eq!(gs.facts().len(), 8);
    assert_eq!(gs.rationale_roots().len(), 1);
}

#[test]
fn similarity_follows_key_sets() {
    // gsMt keys: not_social_area want sells travelTo pump pay why and
    // target keys: sells not_social_area desire stranger travelTo pump flee
    let s = predicate_similarity(&load("gsMt"), &load("target"));
    assert!((s - 4.0 / 11.0).abs() < 1e-12, "{s}");
}

#[test]
fn weights_table() {
    let w = order_bases(&library(&BASES), &load("target"));
    let edges: Vec<(&str, usize)> = w.iter().map(|b| (b.id.as_str(), b.edges)).collect();
    assert!(edges.contains(&("gsMt", 19)));
    assert!(edges.contains(&("dcMt", 12)));
}

#[test]
fn dog_chase_binds_dog_to_stranger() {
    let (dc, target) = (load("dcMt"), load("target"));
    let (g, hyps) = best_analogy(&dc, &target, &Default::default()).unwrap();
    let b = g.binding_names(&dc, &target);
    assert!(b.contains(&("dog_dcMt".into(), "person".into())));
    assert!(b.contains(&("person_dcMt".into(), "customer".into())));
    let want = term("(why (flee customer) (and (dangerAff person) (safeDesire customer)))");
    assert!(hyps.iter().any(|h| h.expression == want));
}

#[test]
fn car_fire_first_needs_a_skolem() {
    let (cf, target) = (load("cfMt"), load("target"));
    let (_, hyps) = best_analogy(&cf, &target, &Default::default()).unwrap();
    let want =
        term("(why (flee customer) (and (dangerAff skolem_car_cfMt) (safeDesire customer)))");
    assert!(hyps.iter().any(|h| h.expression == want));
    assert!(hyps
        .iter()
        .any(|h| h.expression == term("(dangerAff skolem_car_cfMt)")));
}

#[test]
fn paper_order_run() {
    let res = run(&BASES);
    assert_eq!(res.passes, 2);
    assert!(!res.experience.has_skolems());
    let counts: Vec<(usize, usize)> = res
        .iterations
        .iter()
        .filter(|it| it.pass == 1)
        .map(|it| (it.kept().count(), it.discarded().count()))
        .collect();
    assert_eq!(counts, [(4, 1), (4, 3), (4, 0), (0, 2)]);
    for fact in [
        "(why (and (travelTo gas_station customer) (pump gas customer)) (and (want gas customer) (sells gas gas_station)))",
        "(dangerAff person)",
        "(implies (and (stranger person) (not_social_area gas_station)) (dangerAff person))",
        "(why (flee customer) (and (dangerAff person) (safeDesire customer)))",
    ] {
        let id = res.experience.find_term(&term(fact)).expect(fact);
        assert!(res.experience.is_fact(id), "{fact}");
    }
}

#[test]
fn self_analogy_adds_nothing() {
    let target = load("target");
    let lib = BaseLibrary::new(vec![target.clone().with_id("self")]).unwrap();
    let res = synthesize(&lib, &target, &SynthesisConfig::default()).unwrap();
    assert_eq!(res.passes, 1);
    assert_eq!(res.experience.fact_terms(), target.fact_terms());
}

#[test]
fn reversed_order_reaches_the_same_facts() {
    let sorted = |r: stance_core::synthesis::SynthesisResult| {
        let mut f: Vec<String> = r
            .experience
            .fact_terms()
            .iter()
            .map(Term::to_string)
            .collect();
        f.sort();
        f
    };
    let mut rev = BASES;
    rev.reverse();
    // car fire last in both cases
    let rev = [rev[1], rev[2], rev[3], rev[0]];
    assert_eq!(sorted(run(&BASES)), sorted(run(&rev)));
}

#[test]
fn skolem_free_orderings_agree() {
    let mut finals = std::collections::BTreeSet::new();
    let mut clean = 0;
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let idx = [a, b, c, d];
                    if (0..4).any(|i| !idx.contains(&i)) {
                        continue;
                    }
                    let order: Vec<&str> = idx.iter().map(|&i| BASES[i]).collect();
                    let res = run(&order);
                    if !res.experience.has_skolems() {
                        clean += 1;
                        let mut f: Vec<String> = res
                            .experience
                            .fact_terms()
                            .iter()
                            .map(Term::to_string)
                            .collect();
                        f.sort();
                        finals.insert(f);
                    }
                }
            }
        }
    }
    assert_eq!(clean, 16);
    assert_eq!(finals.len(), 1);
}
