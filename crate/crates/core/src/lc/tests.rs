use super::*;
use crate::grammar::{binarize, DeltaModel};
use crate::treebank::read_trees;

fn corpus() -> Vec<Tree> {
    read_trees(
        "(S (NP D N) (VP V (NP D N)))
         (S (NP D N) (VP V (NP (NP D N) (PP P (NP D N)))))
         (S (NP D N) (VP V (NP D N) (PP P (NP D N))))
         (S (NP (NP D N) (PP P (NP D N))) (VP V))
         (S (NP N) (VP V (NP N)))",
    )
    .unwrap()
}

fn opts(beam: usize, n_best: usize) -> BeamOptions {
    BeamOptions {
        beam,
        n_best,
        ..BeamOptions::default()
    }
}

#[test]
fn forced_shift() {
    let m = PlcgModel::induce(&corpus()).unwrap();
    let p = LcParser::plcg(&m, Variant::Base).unwrap();
    let mut space = SearchSpace::new();
    let s0 = p.initial_state(&mut space);
    let d = p.symbol("D").unwrap();
    let succ = p.successors(&mut space, &s0, Some(d));
    assert_eq!(succ.len(), 1);
    assert!((succ[0].1 - m.p_shift("D", "S").ln()).abs() < 1e-12);
    assert!(p.successors(&mut space, &s0, None).is_empty());
}

#[test]
fn projection_increments_sum_to_one() {
    let mut m = PlcgModel::new("S");
    m.add_shift("S", "NP", 1)
        .add_projection("S", Rule::new("S", ["NP", "VP"]), 7)
        .add_projection("S", Rule::new("NP", ["NP", "PP"]), 3);
    let p = LcParser::plcg(&m, Variant::Base).unwrap();
    let top = Entry::Found {
        sym: p.symbol("NP").unwrap(),
        attachable: true,
    };
    let below = Some(Entry::Sought(p.symbol("S").unwrap()));
    let acts = p.actions(top, below, 2);
    let mut probs: Vec<f64> = acts.iter().map(|a| a.log_prob.exp()).collect();
    probs.sort_by(f64::total_cmp);
    assert_eq!(acts.len(), 2);
    assert!((probs[0] - 0.3).abs() < 1e-12 && (probs[1] - 0.7).abs() < 1e-12);
}

#[test]
fn attach_and_project_split() {
    let mut m = PlcgModel::new("NP");
    m.add_attach("NP", 6)
        .add_projection("NP", Rule::new("NP", ["NP", "PP"]), 4);
    for variant in [Variant::Base, Variant::Compose] {
        let p = LcParser::plcg(&m, variant).unwrap();
        let np = p.symbol("NP").unwrap();
        let acts = p.actions(
            Entry::Found {
                sym: np,
                attachable: true,
            },
            Some(Entry::Sought(np)),
            2,
        );
        let total: f64 = acts.iter().map(|a| a.log_prob.exp()).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let attach = acts.iter().find(|a| a.mv == CMove::Attach).unwrap();
        assert!((attach.log_prob.exp() - 0.6).abs() < 1e-12);
    }
}

#[test]
fn beam_matches_exhaustive() {
    let m = PlcgModel::induce(&corpus()).unwrap();
    for variant in [Variant::Base, Variant::Compose] {
        let p = LcParser::plcg(&m, variant).unwrap();
        let tags = ["D", "N", "V", "D", "N", "P", "D", "N"];
        let all = p.exhaustive_parse(&tags, 10_000, 50).unwrap();
        assert_eq!(all.len(), 2);
        let best = p.beam_parse(&tags, &opts(10_000, 5));
        assert_eq!(best.len(), 2);
        assert_eq!(best[0].0, all[0].tree);
        assert!((best[0].1 - all[0].log_prob).abs() < 1e-9);
        for d in &all {
            let lp = m.log_prob_tree(&d.tree, variant.composition());
            assert!((lp - d.log_prob).abs() < 1e-9);
        }
    }
}

#[test]
fn each_tree_has_one_derivation() {
    let m = PlcgModel::induce(&corpus()).unwrap();
    let p = LcParser::plcg(&m, Variant::Base).unwrap();
    let all = p
        .exhaustive_parse(
            &["D", "N", "V", "D", "N", "P", "D", "N", "P", "D", "N"],
            10_000,
            50,
        )
        .unwrap();
    let mut trees: Vec<&Tree> = all.iter().map(|d| &d.tree).collect();
    let n = trees.len();
    trees.sort();
    trees.dedup();
    assert_eq!(trees.len(), n);
    assert!(n > 2);
}

#[test]
fn uncovered_tags_have_no_parse() {
    let m = PlcgModel::induce(&corpus()).unwrap();
    let p = LcParser::plcg(&m, Variant::Base).unwrap();
    assert!(p.beam_parse(&["D", "X"], &opts(10, 1)).is_empty());
    assert!(p.exhaustive_parse(&["D", "X"], 10, 50).unwrap().is_empty());
    assert!(p.beam_parse(&["V", "D"], &opts(10, 1)).is_empty());
}

#[test]
fn deterministic_grammar_with_unit_beam() {
    let corpus = read_trees("(ROOT (S (NP D N) (VP V)))").unwrap();
    let m = PlcgModel::induce(&corpus).unwrap();
    let p = LcParser::plcg(&m, Variant::Base).unwrap();
    let out = p.beam_parse(&["D", "N", "V"], &opts(1, 1));
    assert_eq!(out, vec![(corpus[0].clone(), 0.0)]);
}

#[test]
fn recovered_trees_match_derivations() {
    let m = PlcgModel::induce(&corpus()).unwrap();
    let p = LcParser::plcg(&m, Variant::Compose).unwrap();
    let mut space = SearchSpace::new();
    let states = p.beam_search(&["D", "N", "V", "N"], &opts(100, 1), &mut space);
    assert!(!states.is_empty());
    let t = p.recover_tree(&space.moves, states[0].moves).unwrap();
    let moves: Vec<LcMove> = space
        .moves
        .to_vec(states[0].moves)
        .into_iter()
        .map(|m| p.to_move(m))
        .collect();
    assert_eq!(
        moves,
        crate::grammar::lc_derivation(&t, Composition::Immediate)
    );
    assert!(p.recover_tree(&space.moves, Handle::EMPTY).is_err());
}

#[test]
fn delta_parser_debinarizes() {
    let bin: Vec<Tree> = corpus().iter().map(|t| binarize(t).unwrap()).collect();
    let mut m = DeltaModel::induce(&bin).unwrap();
    m.binarized = true;
    let p = LcParser::delta(&m);
    let tags = ["D", "N", "V", "D", "N", "P", "D", "N"];
    let out = p.beam_parse(&tags, &opts(1000, 3));
    assert!(!out.is_empty());
    for (t, lp) in &out {
        assert!(!t.to_string().contains('@'));
        assert!(*lp <= 0.0);
    }
    let all = p.exhaustive_parse(&tags, 10_000, 50).unwrap();
    assert!((all[0].log_prob - out[0].1).abs() < 1e-9);
}

#[test]
fn language_mass_converges() {
    let m = PlcgModel::induce(&corpus()).unwrap();
    let p = LcParser::plcg(&m, Variant::Base).unwrap();
    let mut last = 0.0;
    for len in [2, 4, 8, 12] {
        let mass = p.language_mass(len, 50);
        assert!(mass <= 1.0 + 1e-12);
        assert!(mass >= last - 1e-12);
        last = mass;
    }
    assert!(last > 0.9, "{last}");
    let c = LcParser::plcg(&m, Variant::Compose).unwrap();
    assert!((c.language_mass(12, 50) - last).abs() < 1e-9);
}
