use std::collections::{BTreeMap, BTreeSet, HashSet};

use autostruct::count::Cardinal;
use autostruct::formula::Formula;
use autostruct::presentation::*;
use proptest::prelude::*;

fn f(s: &str) -> Formula {
    Formula::parse(s).unwrap()
}

fn unary(n: usize) -> Vec<u32> {
    vec![0; n]
}

fn bin(mut x: u64) -> Vec<u32> {
    let mut v = Vec::new();
    while x > 0 {
        v.push((x % 2) as u32);
        x /= 2;
    }
    v
}

fn unary_members(p: &Presentation, phi: &str, upto: usize) -> Vec<usize> {
    let r = eval(p, &f(phi)).unwrap();
    assert_eq!(r.vars.len(), 1);
    (0..=upto).filter(|&n| r.relation.contains(&[unary(n)]).unwrap()).collect()
}

#[test]
fn infinitely_many_successors() {
    let p = omega_le();
    assert_eq!(unary_members(&p, "Einf y . le(x,y)", 12), (0..=12).collect::<Vec<_>>());
    assert!(unary_members(&p, "Einf y . le(y,x)", 12).is_empty());
}

#[test]
fn counting_predecessors_mod_two() {
    let p = omega_le();
    let even: Vec<usize> = (0..=10).filter(|n| n % 2 == 0).collect();
    assert_eq!(unary_members(&p, "Emod 0,2 y . (le(y,x) & !y = x)", 10), even);
    let odd: Vec<usize> = (0..=10).filter(|n| n % 2 == 1).collect();
    assert_eq!(unary_members(&p, "Emod 1,2 y . (le(y,x) & !y = x)", 10), odd);
    let threes: Vec<usize> = (0..=10).filter(|n| (n + 1) % 3 == 2).collect();
    assert_eq!(unary_members(&p, "Emod 2,3 y . le(y,x)", 10), threes);
}

#[test]
fn counting_with_infinite_sections() {
    let p = omega_le();
    // every x has infinitely many successors, so no count is finite
    assert!(unary_members(&p, "Emod 0,2 y . le(x,y)", 8).is_empty());
    let strict = EvalOptions { strict_counting: true, ..EvalOptions::default() };
    let err = eval_with(&p, &f("Emod 0,2 y . le(x,y)"), &["x".to_string()], &strict).unwrap_err();
    assert!(matches!(err, autostruct::Error::InfiniteSection));
}

#[test]
fn counting_budget_is_reported() {
    let p = omega_le();
    let tiny = EvalOptions { count_budget: 1, ..EvalOptions::default() };
    let err = eval_with(&p, &f("Emod 0,2 y . le(y,x)"), &["x".to_string()], &tiny).unwrap_err();
    assert!(matches!(err, autostruct::Error::CountingBudget(_)));
}

const ZERO: &str = "plus(z,z,z)";

fn numeral_defs() -> String {
    // o = 1, t = 2, th = 3, fo = 4, fi = 5, e = 8
    format!(
        "E z . E o . E t . E th . E fo . E fi . E e . {ZERO} & !plus(o,o,o) & \
         (A a . A b . plus(a,b,o) -> plus(a,a,a) | plus(b,b,b)) & \
         plus(o,o,t) & plus(t,o,th) & plus(t,t,fo) & plus(fo,o,fi) & plus(fo,fo,e)"
    )
}

#[test]
fn presburger_sentences() {
    let p = presburger(2).unwrap();
    assert!(decide(&p, &f("A x . A y . A z . plus(x,y,z) -> plus(y,x,z)")).unwrap());
    assert!(!decide(&p, &f("E x . plus(x,x,x) & !x = x")).unwrap());
    assert!(decide(&p, &f(&format!("{} & plus(th,fi,e)", numeral_defs()))).unwrap());
    assert!(!decide(&p, &f(&format!("{} & plus(th,th,e)", numeral_defs()))).unwrap());
    assert!(decide(&p, &f("A x . A y . E z . plus(x,y,z)")).unwrap());
    assert!(decide(&p, &f("A x . E y . plus(y,y,x) | E o . (!plus(o,o,o) & (A a . A b . plus(a,b,o) -> plus(a,a,a) | plus(b,b,b)) & E s . plus(y,y,s) & plus(s,o,x))")).unwrap());
}

#[test]
fn presburger_addition_agrees_with_arithmetic() {
    let p = presburger(3).unwrap();
    let r = eval(&p, &f("E w . plus(x,y,w) & plus(w,y,z)")).unwrap();
    let tern = |mut x: u64| {
        let mut v = Vec::new();
        while x > 0 {
            v.push((x % 3) as u32);
            x /= 3;
        }
        v
    };
    let pos: BTreeMap<&str, usize> = r.vars.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
    for x in 0..8 {
        for y in 0..8 {
            for z in 0..25 {
                let mut t = vec![Vec::new(); 3];
                t[pos["x"]] = tern(x);
                t[pos["y"]] = tern(y);
                t[pos["z"]] = tern(z);
                assert_eq!(r.relation.contains(&t).unwrap(), x + 2 * y == z);
            }
        }
    }
}

#[test]
fn divisibility_by_powers() {
    let p = presburger_div(2).unwrap();
    assert!(p.holds("divp", &[bin(4), bin(12)]).unwrap());
    assert!(!p.holds("divp", &[bin(3), bin(12)]).unwrap());
    for x in 0..40u64 {
        for y in 0..40u64 {
            let want = x.is_power_of_two() && y % x == 0;
            assert_eq!(p.holds("divp", &[bin(x), bin(y)]).unwrap(), want, "{x} | {y}");
        }
    }
}

#[test]
fn growth_of_builders() {
    let r = omega_le().is_poly_growth().unwrap();
    assert_eq!((r.polynomial, r.degree), (true, 1));
    assert!(!presburger(2).unwrap().is_poly_growth().unwrap().polynomial);
    let r = grid_example().is_poly_growth().unwrap();
    assert_eq!((r.polynomial, r.degree), (true, 2));
}

#[test]
fn pary_tree_relations() {
    let p = pary_tree(2).unwrap();
    let w = |s: &str| p.element(s).unwrap();
    assert!(p.holds("pf", &[w("01"), w("011")]).unwrap());
    assert!(!p.holds("pf", &[w("01"), w("001")]).unwrap());
    assert!(p.holds("suc1", &[w("01"), w("011")]).unwrap());
    assert!(!p.holds("suc0", &[w("01"), w("011")]).unwrap());
    assert!(p.holds("lenEq", &[w("01"), w("11")]).unwrap());
    // every node has exactly two children
    assert!(decide(&p, &f("A x . Emod 0,2 y . (pf(x,y) & !x = y & A z . (pf(x,z) & pf(z,y) -> z = x | z = y))")).unwrap());
}

#[test]
fn triangular_positions() {
    let p = triangular_example();
    // P holds at positions n(n+1)/2 of the order
    let r = eval(&p, &f("P(x) & Emod 0,3 y . (le(y,x) & !y = x)")).unwrap();
    for n in 0..8usize {
        let pos = n * (n + 1) / 2;
        assert_eq!(r.relation.contains(&[vec![0; n]]).unwrap(), pos % 3 == 0, "n={n}");
    }
}

fn succ() -> &'static str {
    "le(x,y) & !x = y & A z . (le(x,z) & !x = z -> le(y,z))"
}

#[test]
fn reach_along_successor() {
    let p = omega_le();
    let r = reach(&p, &f(succ()), &["x".into()], "y", &[unary(0)], 5).unwrap();
    let want: Vec<Cardinal> = (1..=6).map(Cardinal::from_u64).collect();
    assert_eq!(r.sizes, want);
    let r = reach(&p, &f(succ()), &["x".into()], "y", &[], 3).unwrap();
    assert!(r.sizes.iter().all(|c| *c == Cardinal::zero()));
    let r = reach(&p, &f("le(x,y)"), &["x".into()], "y", &[unary(2)], 2).unwrap();
    assert_eq!(r.sizes, vec![Cardinal::from_u64(1), Cardinal::Omega, Cardinal::Omega]);
}

#[test]
fn reach_on_grid_is_l1_ball() {
    let p = grid_example();
    let origin = p.element("").unwrap();
    let step = f("E0(x,y) | E1(x,y) | E0(y,x) | E1(y,x)");
    let r = reach(&p, &step, &["x".into()], "y", &[origin], 4).unwrap();
    // brute-force BFS on ℤ²
    let mut seen: HashSet<(i64, i64)> = HashSet::from([(0, 0)]);
    let mut sizes = vec![1u64];
    for _ in 0..4 {
        let cur: Vec<_> = seen.iter().copied().collect();
        for (i, k) in cur {
            for d in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                seen.insert((i + d.0, k + d.1));
            }
        }
        sizes.push(seen.len() as u64);
    }
    assert_eq!(sizes, vec![1, 5, 13, 25, 41]);
    assert_eq!(r.sizes, sizes.into_iter().map(Cardinal::from_u64).collect::<Vec<_>>());
}

#[test]
fn infinite_classes() {
    let p = one_infinite_class();
    assert!(decide(&p, &f("A x . Einf y . x ~ y")).unwrap());
    let q = omega_infinite_classes();
    assert!(decide(&q, &f("A x . Einf y . x ~ y")).unwrap());
    // infinitely many classes, counted by their llex-least members
    let reps = f("Einf x . A y . (y ~ x & llex(y,x) -> y = x)");
    assert!(decide(&q, &reps).unwrap());
    assert!(!decide(&p, &reps).unwrap());
}

fn le_interpretation() -> Interpretation {
    let mut rels = BTreeMap::new();
    rels.insert("le".to_string(), (vec!["x".to_string(), "y".to_string()], f("le(x,y)")));
    Interpretation::new(1, (vec!["x".to_string()], f("x = x")), rels).unwrap()
}

#[test]
fn identity_interpretation() {
    let p = omega_le();
    let q = apply_interpretation(&p, &le_interpretation()).unwrap();
    assert!(q.domain().equivalent(p.domain()).unwrap());
    assert!(q.relation("le").unwrap().equivalent(&p.relation("le").unwrap()).unwrap());
}

#[test]
fn empty_domain_interpretation() {
    let mut tau = le_interpretation();
    tau.domain = (vec!["x".into()], f("!x = x"));
    assert!(matches!(apply_interpretation(&omega_le(), &tau), Err(autostruct::Error::EmptyDomain)));
}

/// ⟨ℕ, ≤, 3|·⟩ inside ⟨ω, ≤⟩ by pairs (q, r) with r < 3.
fn mod_three_interpretation() -> Interpretation {
    let lt = |a: &str, b: &str| format!("(le({a},{b}) & !{a} = {b})");
    let below3 = format!("!(E a . E b . E c . {} & {} & {} & {})", lt("a", "b"), lt("b", "c"), lt("c", "r"), "a = a");
    let mut rels = BTreeMap::new();
    let v = |s: &[&str]| s.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    rels.insert("le".to_string(), (v(&["x", "xr", "y", "yr"]), f(&format!("{} | (x = y & le(xr,yr))", lt("x", "y")))));
    rels.insert("div".to_string(), (v(&["x", "xr"]), f("A z . le(xr,z)")));
    Interpretation::new(2, (v(&["q", "r"]), f(&below3)), rels).unwrap()
}

/// x is the n-th element of the order, written with nested single witnesses so that no
/// subformula has more than three free variables.
fn numeral(x: &str, n: usize) -> String {
    let succ = |a: &str, b: &str| format!("(le({a},{b}) & !{a} = {b} & A u . (le({a},u) & !{a} = u -> le({b},u)))");
    if n == 0 {
        return format!("A u . le({x},u)");
    }
    let mut inner = "A u . le(w0,u)".to_string();
    for i in 1..=n {
        let next = if i == n { x.to_string() } else { format!("w{i}") };
        inner = format!("E w{} . ({} & {inner})", i - 1, succ(&format!("w{}", i - 1), &next));
    }
    inner
}

#[test]
fn two_dimensional_interpretation() {
    let p = omega_le();
    let tau = mod_three_interpretation();
    let q = apply_interpretation(&p, &tau).unwrap();
    // element n is the pair (n div 3, n mod 3)
    assert!(decide(&q, &f(&format!("E x . div(x) & {}", numeral("x", 6)))).unwrap());
    assert!(!decide(&q, &f(&format!("E x . div(x) & {}", numeral("x", 7)))).unwrap());
    assert!(decide(&q, &f(&format!("E x . div(x) & {}", numeral("x", 9)))).unwrap());
    // relativizing and deciding in the source gives the same answers
    for s in [
        "A x . A y . le(x,y) | le(y,x)",
        "E x . div(x) & A y . le(x,y)",
        "A x . E y . le(x,y) & !x = y & div(y)",
        "E x . A y . le(y,x)",
        "A x . A y . div(x) & div(y) & le(x,y) & !x = y -> E z . le(x,z) & le(z,y) & !div(z)",
    ] {
        let sigma = f(s);
        assert_eq!(decide(&q, &sigma).unwrap(), decide(&p, &relativize(&sigma, &tau).unwrap()).unwrap(), "{s}");
    }
}

#[test]
fn sections_and_witness_counts() {
    let p = omega_le();
    let phi = f("le(y,x)");
    assert_eq!(count_witnesses(&p, &phi, "y", &[("x".into(), unary(4))]).unwrap(), Cardinal::from_u64(5));
    assert_eq!(count_witnesses(&p, &f("le(x,y)"), "y", &[("x".into(), unary(4))]).unwrap(), Cardinal::Omega);
    let s = section(&p, &phi, "y", &[("x".into(), unary(2))]).unwrap();
    assert_eq!(s.enumerate_upto(5), vec![unary(0), unary(1), unary(2)]);
}

#[test]
fn json_round_trip() {
    for p in [omega_le(), grid_example(), presburger_div(2).unwrap()] {
        let text = p.to_json();
        let q = Presentation::from_json(&text).unwrap();
        assert_eq!(q, p);
        assert_eq!(q.to_json(), text);
    }
}

#[test]
fn errors() {
    let p = omega_le();
    assert!(matches!(eval(&p, &f("R(x)")), Err(autostruct::Error::UnknownRelation(_))));
    assert!(matches!(eval(&p, &f("le(x)")), Err(autostruct::Error::ArityMismatch { .. })));
    assert!(decide(&p, &f("le(x,x)")).is_err());
}

// brute force over the segment {0..=12}: quantifiers range below the free bound m

#[derive(Clone, Debug)]
enum Q {
    Le(usize, usize),
    Eq(usize, usize),
    Not(Box<Q>),
    And(Box<Q>, Box<Q>),
    Or(Box<Q>, Box<Q>),
    Ex(usize, Box<Q>),
    All(usize, Box<Q>),
}

const VARS: [&str; 3] = ["x", "y", "z"];

fn q_strategy() -> impl Strategy<Value = Q> {
    let leaf = prop_oneof![
        (0..3usize, 0..3usize).prop_map(|(a, b)| Q::Le(a, b)),
        (0..3usize, 0..3usize).prop_map(|(a, b)| Q::Eq(a, b)),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| Q::Not(Box::new(a))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Q::And(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Q::Or(Box::new(a), Box::new(b))),
            (0..3usize, inner.clone()).prop_map(|(v, a)| Q::Ex(v, Box::new(a))),
            (0..3usize, inner).prop_map(|(v, a)| Q::All(v, Box::new(a))),
        ]
    })
}

/// Renders with bound variables renamed apart so the formula is well named.
fn render(q: &Q, names: &mut [String; 3], fresh: &mut usize) -> String {
    match q {
        Q::Le(a, b) => format!("le({},{})", names[*a], names[*b]),
        Q::Eq(a, b) => format!("{} = {}", names[*a], names[*b]),
        Q::Not(a) => format!("!({})", render(a, names, fresh)),
        Q::And(a, b) => format!("({}) & ({})", render(a, names, fresh), render(b, names, fresh)),
        Q::Or(a, b) => format!("({}) | ({})", render(a, names, fresh), render(b, names, fresh)),
        Q::Ex(v, a) | Q::All(v, a) => {
            *fresh += 1;
            let n = format!("{}{}", VARS[*v], fresh);
            let old = std::mem::replace(&mut names[*v], n.clone());
            let body = render(a, names, fresh);
            names[*v] = old;
            if matches!(q, Q::Ex(..)) {
                format!("(E {n} . le({n},m) & ({body}))")
            } else {
                format!("(A {n} . le({n},m) -> ({body}))")
            }
        }
    }
}

fn brute(q: &Q, env: &mut [usize; 3], bound: usize) -> bool {
    match q {
        Q::Le(a, b) => env[*a] <= env[*b],
        Q::Eq(a, b) => env[*a] == env[*b],
        Q::Not(a) => !brute(a, env, bound),
        Q::And(a, b) => brute(a, env, bound) && brute(b, env, bound),
        Q::Or(a, b) => brute(a, env, bound) || brute(b, env, bound),
        Q::Ex(v, a) | Q::All(v, a) => {
            let old = env[*v];
            let mut res = matches!(q, Q::All(..));
            for i in 0..=bound {
                env[*v] = i;
                let t = brute(a, env, bound);
                if matches!(q, Q::Ex(..)) && t {
                    res = true;
                    break;
                }
                if matches!(q, Q::All(..)) && !t {
                    res = false;
                    break;
                }
            }
            env[*v] = old;
            res
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]
    #[test]
    fn evaluator_matches_brute_force(q in q_strategy()) {
        let p = omega_le();
        let mut names = VARS.map(String::from);
        let text = render(&q, &mut names, &mut 0);
        let phi = f(&text);
        let vars: Vec<String> = ["m", "x", "y", "z"].iter().map(|s| s.to_string()).collect();
        let r = eval_with(&p, &phi, &vars, &EvalOptions::default()).unwrap();
        let bound = 12;
        for x in 0..=bound {
            for y in 0..=bound {
                for z in (0..=bound).step_by(3) {
                    let want = brute(&q, &mut [x, y, z], bound);
                    let got = r.contains(&[unary(bound), unary(x), unary(y), unary(z)]).unwrap();
                    prop_assert_eq!(got, want, "{} at {:?}", text, (x, y, z));
                }
            }
        }
    }
}

#[test]
fn existsinf_matches_long_witness() {
    // ∃^∞y φ ⇔ ∃y (φ ∧ y beyond every other argument by more than the witness automaton)
    let p = omega_le();
    for phi in ["le(x,y)", "le(y,x)", "Emod 0,2 z . (le(z,y) & !z = y)", "le(x,y) & Emod 1,3 z . le(z,y)"] {
        let inf = eval_with(&p, &f(&format!("Einf y . {phi}")), &["x".into()], &EvalOptions::default()).unwrap();
        let sec = |x: usize| count_witnesses(&p, &f(phi), "y", &[("x".into(), unary(x))]).unwrap();
        for x in 0..10 {
            assert_eq!(inf.contains(&[unary(x)]).unwrap(), sec(x).is_omega(), "{phi} at {x}");
        }
    }
    let set: BTreeSet<usize> = (0..3).collect();
    assert_eq!(set.len(), 3);
}
