mod common;

use evinf::opinion::{
    message_polarity, neg_subset, opinion_frame, opinion_to_bba, opinion_to_bba_with, parse_messages, pos_subset,
    user_opinion, BbaMapping, Message, PolarityLexicon, Tag, TaggedToken,
};
use evinf::OpinionDistribution;
use proptest::prelude::*;

fn distribution() -> impl Strategy<Value = OpinionDistribution> {
    (0.0f64..=1.0, 0.0f64..=1.0).prop_map(|(a, b)| {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        OpinionDistribution::new(lo, hi - lo, 1.0 - hi).unwrap()
    })
}

fn lexicon(entries: &[OpinionDistribution]) -> PolarityLexicon {
    let mut lex = PolarityLexicon::new();
    for (i, d) in entries.iter().enumerate() {
        lex.insert(&format!("w{i}"), Tag::Adj, *d);
    }
    lex
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn message_polarity_is_normalized(
        entries in prop::collection::vec(distribution(), 1..8),
        picks in prop::collection::vec(0usize..12, 1..15),
    ) {
        let lex = lexicon(&entries);
        let msg = Message {
            author: "u".into(),
            tokens: picks.iter().map(|&i| TaggedToken::new(format!("w{i}"), Tag::Adj)).collect(),
            timestamp: None,
        };
        let p = message_polarity(&msg, &lex).unwrap();
        prop_assert!((p.pos() + p.neg() + p.neut() - 1.0).abs() < 1e-9);
        prop_assert!([p.pos(), p.neg(), p.neut()].iter().all(|x| (0.0..=1.0).contains(x)));
    }

    #[test]
    fn user_opinion_ignores_order(mut msgs in prop::collection::vec(distribution(), 1..20), seed in any::<u64>()) {
        let a = user_opinion(&msgs).unwrap();
        use rand::seq::SliceRandom;
        msgs.shuffle(&mut common::rng(seed));
        let b = user_opinion(&msgs).unwrap();
        prop_assert!((a.pos() - b.pos()).abs() < 1e-12);
        prop_assert!((a.neg() - b.neg()).abs() < 1e-12);
        prop_assert!((a.neut() - b.neut()).abs() < 1e-12);
    }

    #[test]
    fn opinion_bba_is_valid(d in distribution()) {
        let m = opinion_to_bba(&d);
        let theta = opinion_frame().full();
        let total: f64 = m.focal_elements().iter().map(|&(_, x)| x).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        for &(s, x) in m.focal_elements() {
            prop_assert!(s == pos_subset() || s == neg_subset() || s == theta);
            prop_assert!((0.0..=1.0).contains(&x));
        }
        let (bp, bn) = common::closed_form_belief(d.pos(), d.neg());
        prop_assert!((m.mass_of(pos_subset()).unwrap() - bp).abs() < 1e-12);
        prop_assert!((m.mass_of(neg_subset()).unwrap() - bn).abs() < 1e-12);
    }
}

#[test]
fn belief_in_pos_grows_with_pos() {
    for j in 0..100 {
        let neg = j as f64 / 100.0;
        let mut last = f64::NEG_INFINITY;
        for i in 0..100 {
            let pos = (1.0 - neg) * i as f64 / 99.0;
            let d = OpinionDistribution::new(pos, neg, (1.0 - pos - neg).max(0.0)).unwrap();
            let b = opinion_to_bba(&d).mass_of(pos_subset()).unwrap();
            assert!(b >= last - 1e-15, "pos={pos} neg={neg}: {b} < {last}");
            last = b;
        }
    }
}

#[test]
fn literal_mapping_reverses_direction_and_can_conflict() {
    let lo = OpinionDistribution::new(0.2, 0.1, 0.7).unwrap();
    let hi = OpinionDistribution::new(0.7, 0.1, 0.2).unwrap();
    let b = |d| {
        opinion_to_bba_with(&d, BbaMapping::LiteralAlpha)
            .unwrap()
            .mass_of(pos_subset())
            .unwrap()
    };
    assert!(b(lo) > b(hi));
    assert!(opinion_to_bba_with(&OpinionDistribution::NEUTRAL, BbaMapping::LiteralAlpha).is_err());
    assert_eq!("literal-alpha".parse::<BbaMapping>().unwrap(), BbaMapping::LiteralAlpha);
    assert!("other".parse::<BbaMapping>().is_err());
}

#[test]
fn lexicon_and_messages_from_text() {
    let lex = PolarityLexicon::from_tsv(
        "# comment\nword\ttag\tpos\tneg\tneut\ngood\ta\t0.635\t0.001\t0.364\ncomplicated\ta\t0.125\t0.625\t0.25\n"
            .as_bytes(),
    )
    .unwrap();
    assert_eq!(lex.len(), 2);
    let msgs = parse_messages("alice\t10\tSmartphones/n are/v good/a but/x complicated/a\n".as_bytes()).unwrap();
    assert_eq!(msgs.len(), 1);
    assert_eq!(msgs[0].author, "alice");
    let p = message_polarity(&msgs[0], &lex).unwrap();
    assert!((p.pos() - 0.152).abs() < 1e-3);
    assert!((p.neg() - 0.125).abs() < 1e-3);
    assert!((p.neut() - 0.723).abs() < 1e-3);

    assert!(PolarityLexicon::from_tsv("word\ttag\n".as_bytes()).is_err());
    assert!(PolarityLexicon::from_tsv("word\ttag\tpos\tneg\tneut\nx\ta\t0.9\t0.9\t0.9\n".as_bytes()).is_err());
}

#[test]
fn invalid_distributions() {
    assert!(OpinionDistribution::new(0.5, 0.5, 0.5).is_err());
    assert!(OpinionDistribution::new(-0.1, 0.6, 0.5).is_err());
    assert!(OpinionDistribution::new(f64::NAN, 0.0, 1.0).is_err());
}
