//! Property checks over seeded random trees.

use proptest::prelude::*;

use leftcorner::grammar::io::{model_to_string, read_model, Model};
use leftcorner::grammar::{binarize, debinarize, lc_derivation, replay, Composition, PlcgModel};
use leftcorner::lc::{BeamOptions, LcParser, Variant};
use leftcorner::synth::{english_corpus, random_corpus, random_tree, rng, TreeShape};
use leftcorner::treebank::{preprocess, read_trees, PreprocessOptions, UnaryMode};

fn shape() -> TreeShape {
    TreeShape::new(6, 4, &["S", "A", "B", "C"], &["x", "y", "z"])
}

fn beam(k: usize) -> BeamOptions {
    BeamOptions {
        beam: k,
        n_best: 1,
        ..BeamOptions::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn write_then_read(seed in any::<u64>()) {
        let t = random_tree(&mut rng(seed), &shape());
        let back = read_trees(&t.to_string()).unwrap();
        prop_assert_eq!(back, vec![t]);
    }

    #[test]
    fn binarize_round_trips(seed in any::<u64>()) {
        let t = random_tree(&mut rng(seed), &shape());
        let b = binarize(&t).unwrap();
        b.walk(&mut |n| assert!(n.children.len() <= 2));
        prop_assert_eq!(debinarize(&b), t);
    }

    #[test]
    fn derivations_replay(seed in any::<u64>()) {
        let t = random_tree(&mut rng(seed), &shape());
        for c in [Composition::Delayed, Composition::Immediate] {
            prop_assert_eq!(&replay(&lc_derivation(&t, c), &t.label, c).unwrap(), &t);
        }
    }

    #[test]
    fn preprocess_is_idempotent(seed in any::<u64>()) {
        for t in english_corpus(seed, 4) {
            for mode in [UnaryMode::Keep, UnaryMode::FoldUp, UnaryMode::FoldDown] {
                let opts = PreprocessOptions { unary_mode: mode, ..PreprocessOptions::standard() };
                let once = preprocess(&t, &opts).unwrap();
                prop_assert_eq!(preprocess(&once, &opts).unwrap(), once);
            }
        }
    }

    #[test]
    fn wide_beam_is_no_worse_than_unit_beam(seed in 0u64..200) {
        let small = TreeShape::new(4, 3, &["S", "A", "B"], &["x", "y", "z"]);
        let trees = random_corpus(seed, 30, &small);
        let m = PlcgModel::induce(&trees).unwrap();
        let tags: Vec<&str> = trees[0].leaves();
        for variant in [Variant::Base, Variant::Compose] {
            let p = LcParser::plcg(&m, variant).unwrap();
            let wide = p.beam_parse(&tags, &beam(2000));
            prop_assert!(!wide.is_empty());
            if let Some((_, narrow)) = p.beam_parse(&tags, &beam(1)).first() {
                prop_assert!(wide[0].1 >= narrow - 1e-9);
            }
        }
    }
}

#[test]
fn saved_model_parses_like_the_original() {
    let trees = random_corpus(5, 60, &shape());
    let m = PlcgModel::induce(&trees).unwrap();
    let Model::Plcg(loaded) = read_model(&model_to_string(&Model::Plcg(m.clone()))).unwrap() else {
        panic!("model kind changed");
    };
    let a = LcParser::plcg(&m, Variant::Base).unwrap();
    let b = LcParser::plcg(&loaded, Variant::Base).unwrap();
    for t in &trees[..20] {
        let tags = t.leaves();
        assert_eq!(
            a.beam_parse(&tags, &beam(200)),
            b.beam_parse(&tags, &beam(200))
        );
    }
}
