use std::collections::BTreeSet;

use autostruct::automata::{Alphabet, Automaton, Word};
use autostruct::growth::*;
use num_bigint::BigUint;
use proptest::prelude::*;

fn ab() -> Alphabet {
    Alphabet::from_tokens(["a", "b"]).unwrap()
}

fn re(text: &str) -> Automaton {
    Automaton::from_regex(ab(), text).unwrap()
}

fn union(alphabet: &Alphabet, pats: &[BoundedPattern]) -> Automaton {
    pats.iter().fold(Automaton::empty(alphabet.clone()), |acc, p| acc.union(&p.to_automaton(alphabet)).unwrap())
}

fn check_growth_bounds(a: &Automaton) {
    let r = classify_growth(a).unwrap();
    let q = a.determinize().minimize().unwrap().state_count().max(1);
    let counts = a.count_words_upto(4 * q.max(4)).values;
    if r.polynomial {
        for (n, c) in counts.iter().take(17).enumerate() {
            assert!(*c <= BigUint::from(n + 1).pow(r.degree as u32 + 1), "n={n}: {c}");
        }
        assert!(union(a.alphabet(), &r.patterns).equivalent(a).unwrap());
    } else {
        let witnessed = counts.iter().enumerate().any(|(n, c)| *c >= BigUint::from(2u32).pow((n / q) as u32) && n >= q);
        assert!(witnessed, "no exponential witness: {counts:?}");
    }
}

#[test]
fn classification_examples() {
    let r = classify_growth(&re("a*b*")).unwrap();
    assert!(r.polynomial);
    assert_eq!(r.degree, 2);
    let counts: Vec<u64> = re("a*b*").count_words_upto(4).values.iter().map(|v| v.try_into().unwrap()).collect();
    assert_eq!(counts, vec![1, 3, 6, 10, 15]);
    assert!(!classify_growth(&re("(a|b)*")).unwrap().polynomial);
    let r = classify_growth(&re("(ab)*")).unwrap();
    assert_eq!((r.polynomial, r.degree), (true, 1));
    for text in ["a*b*", "(a|b)*", "(ab)*", "(aa)*b", "a*ba*", "(a|b)*a(a|b)*b"] {
        check_growth_bounds(&re(text));
    }
}

#[test]
fn decomposition_examples() {
    let a = re("a*b*");
    let ps = bounded_decomposition(&a).unwrap();
    assert!(union(&ab(), &ps).equivalent(&a).unwrap());
    assert_eq!(ps.iter().map(|p| p.loops.len()).max(), Some(2));
    let a = re("(aa)*b");
    let ps = bounded_decomposition(&a).unwrap();
    assert!(union(&ab(), &ps).equivalent(&a).unwrap());
    assert!(bounded_decomposition(&re("(a|b)*")).is_err());
}

#[test]
fn normalize_examples() {
    let single = BoundedPattern::new(vec![vec![0, 1]], vec![]).unwrap();
    let (normal, recode) = normalize_letters(&ab(), &[single]).unwrap();
    assert_eq!(normal[0].prefixes[0].len(), 2);
    assert_eq!(recode.target.render_word(&normal[0].prefixes[0]), recode.target.render_word(&[0, 0]));
    let loop_ab = BoundedPattern::new(vec![vec![], vec![]], vec![vec![0, 1]]).unwrap();
    let (normal, recode) = normalize_letters(&ab(), std::slice::from_ref(&loop_ab)).unwrap();
    assert_eq!(normal[0].loops[0].len(), 2);
    for i in 0..=5 {
        let w = loop_ab.word(&[i]);
        let img = recode.apply(&w).unwrap();
        assert_eq!(img, vec![normal[0].word(&[i])]);
        assert_eq!(img[0].len(), w.len());
    }
    let two = [loop_ab, BoundedPattern::new(vec![vec![1], vec![]], vec![vec![0]]).unwrap()];
    let (normal, _) = normalize_letters(&ab(), &two).unwrap();
    let letters = |p: &BoundedPattern| p.prefixes.iter().chain(&p.loops).flatten().copied().collect::<BTreeSet<u32>>();
    assert!(letters(&normal[0]).is_disjoint(&letters(&normal[1])));
}

/// Normal forms of all words of length ≤ 8: one each, same length, pairwise distinct, and
/// covering the normalized language.
fn check_recode(a: &Automaton) {
    let ps = bounded_decomposition(a).unwrap();
    let (normal, recode) = normalize_letters(a.alphabet(), &ps).unwrap();
    let words = a.enumerate_upto(8);
    let mut images: BTreeSet<Word> = BTreeSet::new();
    for w in &words {
        let img = recode.apply(w).unwrap();
        assert_eq!(img.len(), 1, "{w:?}: {img:?}");
        assert_eq!(img[0].len(), w.len());
        assert!(images.insert(img[0].clone()));
    }
    let target = union(&recode.target, &normal).enumerate_upto(8);
    assert_eq!(target.into_iter().collect::<BTreeSet<_>>(), images);
}

#[test]
fn recode_is_a_length_preserving_bijection() {
    for text in ["a*b*", "(ab)*", "(aa)*b", "a*ba*", "ab|ba|a"] {
        check_recode(&re(text));
    }
}

fn check_exponents(a: &Automaton) {
    for p in bounded_decomposition(a).unwrap() {
        let s = pattern_exponents(a, &p).unwrap();
        let k = p.loops.len();
        let mut exps = vec![0usize; k];
        loop {
            let want = a.accepts(&p.word(&exps)).unwrap();
            let pt: Vec<u64> = exps.iter().map(|&e| e as u64).collect();
            assert_eq!(s.member(&pt).unwrap(), want, "{exps:?}");
            let Some(i) = exps.iter().position(|&e| e < 8) else { break };
            exps[i] += 1;
            exps[..i].iter_mut().for_each(|e| *e = 0);
        }
    }
}

#[test]
fn exponent_examples() {
    let a1 = Alphabet::from_tokens(["a"]).unwrap();
    let a = Automaton::from_regex(a1, "(aa)*").unwrap();
    let pat = BoundedPattern::new(vec![vec![], vec![]], vec![vec![0]]).unwrap();
    let s = pattern_exponents(&a, &pat).unwrap();
    for i in 0..=10u64 {
        assert_eq!(s.member(&[i]).unwrap(), i % 2 == 0);
    }
    let pat = BoundedPattern::new(vec![vec![], vec![], vec![]], vec![vec![0], vec![1]]).unwrap();
    let s = pattern_exponents(&re("a*b*"), &pat).unwrap();
    for i in 0..6 {
        for j in 0..6 {
            assert!(s.member(&[i, j]).unwrap());
        }
    }
    let pat = BoundedPattern::new(vec![vec![], vec![1]], vec![vec![0]]).unwrap();
    let s = pattern_exponents(&re("a*b"), &pat).unwrap();
    for i in 0..=8 {
        assert!(s.member(&[i]).unwrap());
    }
    for text in ["a*b*", "(aa)*b", "a(ba)*b*", "(aaa)*|(aa)*b"] {
        check_exponents(&re(text));
    }
}

/// Random automata over {a, b} with up to four states.
fn automaton() -> impl Strategy<Value = Automaton> {
    (1usize..=4)
        .prop_flat_map(|n| {
            let edge = (0..n as u32, 0u32..2, 0..n as u32);
            (Just(n), prop::collection::vec(edge, 0..8), prop::collection::vec(0..n as u32, 1..3))
        })
        .prop_map(|(n, edges, acc)| Automaton::new(ab(), n, vec![0], acc, edges).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn growth_dichotomy(a in automaton()) {
        check_growth_bounds(&a);
    }

    #[test]
    fn decomposition_properties(a in automaton()) {
        prop_assume!(classify_growth(&a).unwrap().polynomial);
        check_recode(&a);
        check_exponents(&a);
    }
}
