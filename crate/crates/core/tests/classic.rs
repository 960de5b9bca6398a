use std::fs;
use std::path::PathBuf;

use stance_core::kr::{parse_experience, Experience, ParseConfig};
use stance_core::sme::best_analogy;

fn load(rel: &str) -> Experience {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(rel);
    let text = fs::read_to_string(&path).unwrap();
    let id = path.file_stem().unwrap().to_str().unwrap().to_string();
    parse_experience(&id, &text, &ParseConfig::default()).unwrap()
}

fn pair(a: &str, b: &str) -> (String, String) {
    (a.to_string(), b.to_string())
}

#[test]
fn slumber_is_like_warming_up() {
    let (b, t) = (load("classic/cold.mt"), load("classic/slumber.mt"));
    let (g, hyps) = best_analogy(&b, &t, &Default::default()).unwrap();
    assert!(g.binding_names(&b, &t).contains(&pair("fire_cMt", "bed")));
    let f = g.functor_pairs(&b, &t);
    assert!(f.contains(&pair("coldDes", "tiredDes")));
    assert!(f.contains(&pair("comfortableTf", "asleepTf")));
    assert!(hyps.iter().any(|h| h.expression.functor() == Some("why")));
}

#[test]
fn chopping_is_like_pounding() {
    let (b, t) = (load("classic/nail.mt"), load("classic/chopping.mt"));
    let (g, _) = best_analogy(&b, &t, &Default::default()).unwrap();
    let names = g.binding_names(&b, &t);
    assert!(names.contains(&pair("hammer_npMt", "axe")));
    assert!(names.contains(&pair("rock_npMt", "knife")));
    assert!(g
        .functor_pairs(&b, &t)
        .contains(&pair("advantage", "advantage")));
}

#[test]
fn atom_is_like_solar_system() {
    let (b, t) = (load("classic/solar.mt"), load("classic/atom.mt"));
    let (g, hyps) = best_analogy(&b, &t, &Default::default()).unwrap();
    assert!(g
        .binding_names(&b, &t)
        .contains(&pair("sun_smMt", "nucleus")));
    assert!(hyps
        .iter()
        .any(|h| h.expression.functor() == Some("causes")));
}

#[test]
fn novel_experience_draws_on_both_priors() {
    let novel = load("table1/novel.mt");
    let (_, h1) = best_analogy(&load("table1/exp1.mt"), &novel, &Default::default()).unwrap();
    let (_, h2) = best_analogy(&load("table1/exp2.mt"), &novel, &Default::default()).unwrap();
    let show = |h: &[stance_core::sme::Hypothesis]| {
        h.iter()
            .map(|x| x.expression.to_string())
            .collect::<Vec<_>>()
    };
    assert!(show(&h1)
        .contains(&"(why (travelTo customer stranger) (directionsDesire stranger))".to_string()));
    assert!(show(&h2).contains(&"(dangerAff vehicle)".to_string()));
}

#[test]
fn empty_target_gives_empty_gmap() {
    let (g, h) = best_analogy(
        &load("classic/cold.mt"),
        &Experience::empty("t"),
        &Default::default(),
    )
    .unwrap();
    assert!(g.is_empty() && h.is_empty());
}
