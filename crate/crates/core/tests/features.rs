mod common;

use affect_core::dataio::{LabeledInstance, LexiconSet, SentenceFeatureMatrix, WordVectorTable};
use affect_core::features::{
    apply_scaler, assemble, evec_sentence_vector, fit_scaler, tweet_specific_features, FeatureBlocks, TweetFeatures,
};
use proptest::prelude::*;

fn table() -> WordVectorTable {
    let mut t = WordVectorTable::new(3).unwrap();
    t.insert("happy", vec![1.0, 0.0, 0.5]).unwrap();
    t.insert("sad", vec![0.0, 1.0, -0.5]).unwrap();
    t.insert("day", vec![0.25, 0.25, 0.0]).unwrap();
    t
}

#[test]
fn assembled_width_and_scaling() {
    let lex = LexiconSet::with_defaults();
    let mut sent = SentenceFeatureMatrix::new(512).unwrap();
    let mut evec = WordVectorTable::new(300).unwrap();
    evec.insert("good", vec![0.1; 300]).unwrap();
    let mut data = vec![];
    for i in 0..5 {
        let mut inst = LabeledInstance::new(format!("t{i}"), format!("GOOD day {}", "!".repeat(i)));
        inst.tokens = vec!["good".into(), "day".into()];
        sent.insert(format!("t{i}"), vec![i as f64; 512]).unwrap();
        data.push(inst);
    }
    let blocks = FeatureBlocks {
        sentence: Some(&sent),
        evec: Some(&evec),
        tweet: true,
    };
    let feats = assemble(&data, &blocks, &lex).unwrap();
    assert_eq!(feats.width(), 818);
    let names: Vec<&str> = feats.layout.iter().map(|b| b.name.as_str()).collect();
    assert_eq!(names, ["sentence", "evec", "tweet"]);
    let scaler = fit_scaler(&feats).unwrap();
    let z = apply_scaler(&scaler, &feats).unwrap();
    // the exclamation count varies; its standardized column has mean 0
    let col = z.matrix.column(817);
    assert!(col.sum().abs() < 1e-12);
    let tweet_only = feats.select(&["tweet"]).unwrap();
    assert_eq!(tweet_only.width(), TweetFeatures::WIDTH);
}

proptest! {
    #[test]
    fn sentence_vector_ignores_order(mut toks in prop::collection::vec(prop::sample::select(vec!["happy", "sad", "day", "oov"]), 0..12), seed in any::<u64>()) {
        let t = table();
        let owned: Vec<String> = toks.iter().map(|s| s.to_string()).collect();
        let a = evec_sentence_vector(&owned, &t);
        let k = (seed as usize) % toks.len().max(1);
        toks.rotate_left(k);
        toks.reverse();
        let owned: Vec<String> = toks.iter().map(|s| s.to_string()).collect();
        let b = evec_sentence_vector(&owned, &t);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn tweet_counts_are_non_negative(text in "\\PC{0,60}") {
        let f = tweet_specific_features(&text, &LexiconSet::with_defaults());
        prop_assert!(f.to_vec()[..4].iter().chain(&f.to_vec()[5..]).all(|&v| v >= 0.0));
    }
}
