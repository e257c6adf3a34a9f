use std::collections::BTreeSet;

use autostruct::automata::{Alphabet, Automaton, Word};
use autostruct::relations::*;
use proptest::prelude::*;

fn unary() -> Alphabet {
    Alphabet::from_tokens(["0"]).unwrap()
}

fn abc() -> Alphabet {
    Alphabet::from_tokens(["a", "b", "c"]).unwrap()
}

fn zeros(n: usize) -> Word {
    vec![0; n]
}

fn words(nsym: u32, n: usize) -> Vec<Word> {
    let mut out = vec![vec![]];
    let mut level = vec![vec![]];
    for _ in 0..n {
        level = level.iter().flat_map(|u: &Word| (0..nsym).map(move |s| [u.clone(), vec![s]].concat())).collect();
        out.extend(level.iter().cloned());
    }
    out
}

/// 0ⁿ ↦ 0ⁿ⁺¹.
fn suc() -> RegularRelation {
    RegularRelation::from_regex(&unary(), 2, "[0,0]*[_,0]").unwrap()
}

#[test]
fn convolution_examples() {
    let pa = PaddedAlphabet::new(abc(), 2);
    let w = convolve(&pa, &[vec![0, 1], vec![2]]).unwrap();
    assert_eq!(w.iter().map(|&s| pa.decode(s)).collect::<Vec<_>>(), vec![vec![Some(0), Some(2)], vec![Some(1), None]]);
    assert!(convolve(&pa, &[vec![], vec![]]).unwrap().is_empty());
    let pa3 = PaddedAlphabet::new(abc(), 3);
    let t = vec![vec![0, 0], vec![1], vec![2, 2, 2]];
    assert_eq!(deconvolve(&pa3, &convolve(&pa3, &t).unwrap()).unwrap(), t);
}

#[test]
fn validity_examples() {
    let v1 = validity_automaton(&abc(), 1).unwrap();
    // the one-track alphabet has no padding symbol, so every word is valid
    let counts = v1.count_words_upto(4).values;
    assert_eq!(counts.last().unwrap(), &num_bigint::BigUint::from(1u32 + 3 + 9 + 27 + 81));
    let pa = PaddedAlphabet::new(unary(), 2);
    let v2 = validity_automaton(&unary(), 2).unwrap();
    let resumed = [pa.encode(&[Some(0), None]).unwrap(), pa.encode(&[None, Some(0)]).unwrap()];
    assert!(!v2.accepts(&resumed).unwrap());
    let ab = Alphabet::from_tokens(["a", "b"]).unwrap();
    let pab = PaddedAlphabet::new(ab.clone(), 2);
    let v = validity_automaton(&ab, 2).unwrap();
    let mut want = BTreeSet::new();
    for u in words(2, 3) {
        for w in words(2, 3) {
            want.insert(convolve(&pab, &[u.clone(), w]).unwrap());
        }
    }
    let got: BTreeSet<Word> = v.enumerate_upto(3).into_iter().collect();
    assert_eq!(got, want);
}

#[test]
fn compose_examples() {
    let id = RegularRelation::builtin(&unary(), "eq").unwrap();
    assert!(id.compose(1, &suc()).unwrap().equivalent(&suc()).unwrap());
    let two = suc().compose(1, &suc()).unwrap();
    for n in 0..=6 {
        for m in 0..=9 {
            assert_eq!(two.contains(&[zeros(n), zeros(m)]).unwrap(), m == n + 2);
        }
    }
    assert!(suc().compose(1, &RegularRelation::empty(&unary(), 2)).unwrap().is_empty());
}

#[test]
fn project_examples() {
    let id = RegularRelation::builtin(&abc(), "eq").unwrap();
    let all = RegularRelation::from_regex(&abc(), 1, "([a]|[b]|[c])*").unwrap();
    assert!(id.project(1).unwrap().equivalent(&all).unwrap());
    assert!(RegularRelation::empty(&abc(), 2).project(0).unwrap().is_empty());
    let targets = suc().project(0).unwrap();
    for j in 0..=6 {
        assert_eq!(targets.contains(&[zeros(j)]).unwrap(), j >= 1);
    }
}

#[test]
fn image_examples() {
    let ab = Alphabet::from_tokens(["a", "b"]).unwrap();
    let lang = Automaton::from_regex(ab.clone(), "(ab)*b").unwrap();
    let id = RegularRelation::builtin(&ab, "eq").unwrap();
    assert!(id.image(1, &lang).unwrap().equivalent(&lang).unwrap());
    let origin = Automaton::from_words(unary(), &[zeros(0)]).unwrap();
    assert_eq!(suc().image(1, &origin).unwrap().enumerate_upto(5), vec![zeros(1)]);
    let append = RegularRelation::from_regex(&ab, 2, "([a,a]|[b,b])*[_,a]").unwrap();
    let img = append.image(1, &Automaton::from_regex(ab.clone(), "a*").unwrap()).unwrap();
    assert!(img.equivalent(&Automaton::from_regex(ab, "aa*").unwrap()).unwrap());
}

#[test]
fn outdegree_examples() {
    assert!(suc().is_finite_outdegree(1));
    let pf = RegularRelation::builtin(&unary(), "pf").unwrap();
    assert!(!pf.is_finite_outdegree(1));
    // |v| ≤ |u|
    let shorter = RegularRelation::from_regex(&unary(), 2, "[0,0]*[0,_]*").unwrap();
    assert!(shorter.is_finite_outdegree(1));
    for n in 0..=6 {
        let partners = (0..=10).filter(|&m| shorter.contains(&[zeros(n), zeros(m)]).unwrap()).count();
        assert_eq!(partners, n + 1);
    }
}

/// ‖ā‖ ≤ ‖c̄‖ + κ on every listed pair, with ā on the first k tracks.
fn check_length_bound(r: &RegularRelation, k: usize, top: usize) {
    let kappa = r.length_increase_constant(k).unwrap();
    for t in r.tuples_upto(top) {
        let a = t[..k].iter().map(Vec::len).max().unwrap_or(0);
        let c = t[k..].iter().map(Vec::len).max().unwrap_or(0);
        assert!(a <= c + kappa, "{t:?} with κ = {kappa}");
    }
}

#[test]
fn length_increase_examples() {
    // the pairs are (0ⁿ⁺¹, 0ⁿ)
    let pred = suc().permute(&[1, 0]).unwrap();
    assert!(pred.length_increase_constant(1).unwrap() >= 1);
    check_length_bound(&pred, 1, 10);
    check_length_bound(&RegularRelation::builtin(&abc(), "eq").unwrap(), 1, 4);
    let plus_two = RegularRelation::from_regex(&unary(), 2, "[0,0]*[0,_][0,_]").unwrap();
    assert!(plus_two.length_increase_constant(1).unwrap() >= 2);
    check_length_bound(&plus_two, 1, 10);
    let pf = RegularRelation::builtin(&unary(), "pf").unwrap();
    assert!(pf.permute(&[1, 0]).unwrap().length_increase_constant(1).is_err());
}

#[test]
fn constructors_accept_only_valid_convolutions() {
    let ab = Alphabet::from_tokens(["a", "b"]).unwrap();
    for r in [
        RegularRelation::builtin(&ab, "eq").unwrap(),
        RegularRelation::builtin(&ab, "llex").unwrap(),
        RegularRelation::builtin(&ab, "lenEq").unwrap(),
        RegularRelation::builtin(&ab, "pf").unwrap(),
        RegularRelation::from_regex(&ab, 2, "([a,_]|[_,b]|[a,b])*").unwrap(),
        RegularRelation::from_tuples(&ab, 3, &[vec![vec![0], vec![], vec![1, 1]]]).unwrap(),
        RegularRelation::empty(&ab, 2),
    ] {
        let v = validity_automaton(&ab, r.arity()).unwrap();
        assert!(v.includes(r.acceptor()).unwrap());
    }
    let pa = PaddedAlphabet::new(ab.clone(), 2);
    let bad = Automaton::from_words(pa.alphabet(), &[vec![pa.encode(&[None, Some(0)]).unwrap(), pa.encode(&[Some(0), None]).unwrap()]]).unwrap();
    assert!(RegularRelation::new(2, ab, bad).is_err());
}

#[test]
fn json_round_trip() {
    let r = suc();
    assert_eq!(RegularRelation::from_json(&r.to_json()).unwrap(), r);
}

/// A random relation over unary words: a random automaton over the padded alphabet cut down to
/// valid convolutions.
fn unary_relation() -> impl Strategy<Value = RegularRelation> {
    let nsym = PaddedAlphabet::new(unary(), 2).len() as u32;
    (1usize..=5)
        .prop_flat_map(move |n| {
            let edge = (0..n as u32, 0..nsym, 0..n as u32);
            (Just(n), prop::collection::vec(edge, 0..14), prop::collection::vec(0..n as u32, 1..3))
        })
        .prop_map(|(n, edges, acc)| {
            let pa = PaddedAlphabet::new(unary(), 2);
            let a = Automaton::new(pa.alphabet(), n, vec![0], acc, edges).unwrap();
            let a = a.intersect(&validity_automaton(&unary(), 2).unwrap()).unwrap();
            RegularRelation::new(2, unary(), a).unwrap()
        })
}

fn word_tuple() -> impl Strategy<Value = Vec<Vec<u32>>> {
    (1usize..=3).prop_flat_map(|n| prop::collection::vec(prop::collection::vec(0u32..3, 0..=6), n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn convolution_law(t in word_tuple()) {
        let pa = PaddedAlphabet::new(abc(), t.len());
        let w = convolve(&pa, &t).unwrap();
        prop_assert_eq!(w.len(), t.iter().map(Vec::len).max().unwrap());
        prop_assert_eq!(deconvolve(&pa, &w).unwrap(), t);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn compose_matches_brute_force(r in unary_relation(), s in unary_relation()) {
        let c = r.compose(1, &s).unwrap();
        let states = r.acceptor().state_count() * s.acceptor().state_count() + 1;
        for x in 0..=4 {
            for z in 0..=4 {
                // a witness, if any, is shorter than max(x, z) plus the product of the state counts
                let brute = (0..=4 + states).any(|y| {
                    r.contains(&[zeros(x), zeros(y)]).unwrap() && s.contains(&[zeros(y), zeros(z)]).unwrap()
                });
                prop_assert_eq!(c.contains(&[zeros(x), zeros(z)]).unwrap(), brute, "x={} z={}", x, z);
            }
        }
    }

    #[test]
    fn length_bound_holds(r in unary_relation()) {
        if let Ok(kappa) = r.length_increase_constant(1) {
            for t in r.tuples_upto(12) {
                prop_assert!(t[0].len() <= t[1].len() + kappa);
            }
        }
        if r.is_finite_outdegree(1) {
            for x in 0..=5 {
                let n = (0..=30).filter(|&y| r.contains(&[zeros(x), zeros(y)]).unwrap()).count();
                prop_assert!(n < 30);
            }
        }
    }
}
