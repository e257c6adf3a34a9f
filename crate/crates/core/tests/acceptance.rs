//! Acceptance run: one line per criterion, nonzero exit if any fails.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::time::{Duration, Instant};

use autostruct::automata::{Alphabet, Automaton, Word};
use autostruct::cells::*;
use autostruct::count::Cardinal;
use autostruct::eqstruct::*;
use autostruct::formula::Formula;
use autostruct::growth::classify_growth;
use autostruct::poly::{NatPoly, Poly};
use autostruct::presentation::*;
use autostruct::relations::{convolve, deconvolve, PaddedAlphabet};
use autostruct::semilinear::{outdegree_gvpf, GeneralizedVpf, LinearSet, SemilinearSet, VectorPartitionFn};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Signed;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

type Outcome = std::result::Result<(), String>;

type Criterion = (&'static str, u64, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn ok<T, E: std::fmt::Debug>(r: std::result::Result<T, E>) -> std::result::Result<T, String> {
    r.map_err(|e| format!("{e:?}"))
}

fn f(s: &str) -> Formula {
    Formula::parse(s).unwrap()
}

fn unary(n: usize) -> Word {
    vec![0; n]
}

// 1

fn convolution_law() -> Outcome {
    let abc = Alphabet::from_tokens(["a", "b", "c"]).unwrap();
    let mut rng = StdRng::seed_from_u64(1);
    for _ in 0..200 {
        let arity = rng.gen_range(1..=3);
        let pa = PaddedAlphabet::new(abc.clone(), arity);
        let t: Vec<Word> = (0..arity).map(|_| (0..rng.gen_range(0..=6)).map(|_| rng.gen_range(0..3)).collect()).collect();
        let w = ok(convolve(&pa, &t))?;
        let longest = t.iter().map(Vec::len).max().unwrap();
        ensure!(w.len() == longest, "{t:?}: length {} vs {longest}", w.len());
        ensure!(ok(deconvolve(&pa, &w))? == t, "{t:?} does not round-trip");
    }
    Ok(())
}

// 2

fn growth_classification() -> Outcome {
    let ab = Alphabet::from_tokens(["a", "b"]).unwrap();
    let a = ok(Automaton::from_regex(ab.clone(), "a*b*"))?;
    let r = ok(classify_growth(&a))?;
    ensure!(r.polynomial && r.degree == 2, "a*b*: {} {}", r.polynomial, r.degree);
    let counts = a.count_words_upto(4).values;
    let want: Vec<BigUint> = [1u32, 3, 6, 10, 15].iter().map(|&v| v.into()).collect();
    ensure!(counts == want, "a*b* counts {counts:?}");

    let all = ok(Automaton::from_regex(ab, "(a|b)*"))?;
    ensure!(!ok(classify_growth(&all))?.polynomial, "(a|b)* reported polynomial");
    let q = ok(all.determinize().minimize())?.state_count().max(1);
    let counts = all.count_words_upto(4 * q).values;
    let witnessed = (q..=4 * q).any(|n| counts[n] >= BigUint::from(2u32).pow((n / q) as u32));
    ensure!(witnessed, "no exponential witness in {counts:?}");

    let g = ok(grid_example().is_poly_growth())?;
    ensure!(g.polynomial, "grid domain not polynomial");
    Ok(())
}

// 3

fn numeral_defs() -> &'static str {
    // o = 1, t = 2, th = 3, fo = 4, fi = 5, e = 8
    "E z . E o . E t . E th . E fo . E fi . E e . plus(z,z,z) & !plus(o,o,o) & \
     (A a . A b . plus(a,b,o) -> plus(a,a,a) | plus(b,b,b)) & \
     plus(o,o,t) & plus(t,o,th) & plus(t,t,fo) & plus(fo,o,fi) & plus(fo,fo,e)"
}

fn foc_evaluator() -> Outcome {
    let p = ok(presburger(2))?;
    let nd = numeral_defs();
    let sentences: Vec<(String, bool)> = vec![
        ("A x . A y . A z . plus(x,y,z) -> plus(y,x,z)".into(), true),
        ("A x . A y . E z . plus(x,y,z)".into(), true),
        ("E x . A y . plus(x,y,y)".into(), true),
        ("A x . plus(x,x,x)".into(), false),
        ("E x . plus(x,x,x) & !x = x".into(), false),
        (format!("{nd} & plus(th,fi,e)"), true),
        (format!("{nd} & plus(th,th,e)"), false),
        // (1 + 2) + 5 and 1 + (2 + 5)
        (format!("{nd} & E s . plus(o,t,s) & plus(s,fi,e)"), true),
        (format!("{nd} & E s . plus(t,fi,s) & plus(o,s,e)"), true),
        (format!("{nd} & E s . plus(o,t,s) & plus(s,fo,e)"), false),
    ];
    for (s, want) in &sentences {
        ensure!(ok(decide(&p, &f(s)))? == *want, "{s}: expected {want}");
    }

    let w = omega_le();
    let members = |phi: &str| -> std::result::Result<Vec<usize>, String> {
        let r = ok(eval(&w, &f(phi)))?;
        let mut out = Vec::new();
        for n in 0..=12 {
            if ok(r.relation.contains(&[unary(n)]))? {
                out.push(n);
            }
        }
        Ok(out)
    };
    ensure!(members("Einf y . le(x,y)")? == (0..=12).collect::<Vec<_>>(), "Einf y . le(x,y)");
    ensure!(members("Einf y . le(y,x)")?.is_empty(), "Einf y . le(y,x)");
    let even: Vec<usize> = (0..=12).filter(|n| n % 2 == 0).collect();
    ensure!(members("Emod 0,2 y . (le(y,x) & !y = x)")? == even, "Emod 0,2");
    Ok(())
}

// 4

fn mod_three_interpretation() -> Interpretation {
    let lt = |a: &str, b: &str| format!("(le({a},{b}) & !{a} = {b})");
    let below3 = format!("!(E a . E b . E c . {} & {} & {})", lt("a", "b"), lt("b", "c"), lt("c", "r"));
    let v = |s: &[&str]| s.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    let mut rels = BTreeMap::new();
    rels.insert("le".to_string(), (v(&["x", "xr", "y", "yr"]), f(&format!("{} | (x = y & le(xr,yr))", lt("x", "y")))));
    rels.insert("div".to_string(), (v(&["x", "xr"]), f("A z . le(xr,z)")));
    Interpretation::new(2, (v(&["q", "r"]), f(&below3)), rels).unwrap()
}

fn numeral(x: &str, n: usize) -> String {
    let succ = |a: &str, b: &str| format!("(le({a},{b}) & !{a} = {b} & A u . (le({a},u) & !{a} = u -> le({b},u)))");
    let mut inner = "A u . le(w0,u)".to_string();
    for i in 1..=n {
        let next = if i == n { x.to_string() } else { format!("w{i}") };
        inner = format!("E w{} . ({} & {inner})", i - 1, succ(&format!("w{}", i - 1), &next));
    }
    inner
}

fn interpretation_closure() -> Outcome {
    let q = ok(apply_interpretation(&omega_le(), &mod_three_interpretation()))?;
    ensure!(ok(decide(&q, &f(&format!("E x . div(x) & {}", numeral("x", 6)))))?, "3 does not divide 6");
    ensure!(!ok(decide(&q, &f(&format!("E x . div(x) & {}", numeral("x", 7)))))?, "3 divides 7");
    Ok(())
}

// 5

/// Members of `c` with every coordinate ≤ `top`, walking the gap conditions.
fn members(c: &SCell, top: u64) -> Vec<Vec<u64>> {
    fn go(c: &SCell, i: usize, prev: u64, top: u64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if i == c.n() {
            out.push(cur.clone());
            return;
        }
        let (lo, hi) = match c.gaps()[i] {
            Some(g) => (prev + g, prev + g),
            None => (prev + c.s(), top),
        };
        for v in lo..=hi.min(top) {
            cur[c.sigma()[i]] = v;
            go(c, i + 1, v, top, cur, out);
        }
    }
    let mut out = Vec::new();
    go(c, 0, 0, top, &mut vec![0; c.n()], &mut out);
    out
}

fn box_points(n: usize, top: u64) -> Vec<Vec<u64>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out.into_iter().flat_map(|p: Vec<u64>| (0..=top).map(move |v| [p.clone(), vec![v]].concat())).collect();
    }
    out
}

fn random_cell(rng: &mut StdRng, n: usize, s: u64) -> SCell {
    let mut sigma: Vec<usize> = (0..n).collect();
    sigma.shuffle(rng);
    let d = (0..n).map(|_| if rng.gen_bool(0.5) { None } else { Some(rng.gen_range(0..s)) }).collect();
    SCell::new(s, sigma, d).unwrap()
}

fn fibers(c: &SCell, m: usize, top: u64) -> BTreeMap<Vec<u64>, u64> {
    let mut out = BTreeMap::new();
    for a in members(c, top) {
        *out.entry(a[m..].to_vec()).or_insert(0) += 1;
    }
    out
}

fn cell_suite() -> Outcome {
    let c = ok(SCell::new(4, (0..7).collect(), vec![None, Some(2), Some(0), None, Some(1), None, Some(0)]))?;
    let inside = [[4, 6, 6, 10, 11, 15, 15], [5, 7, 7, 12, 13, 17, 17], [9, 11, 11, 15, 16, 20, 20]];
    let outside = [[3, 5, 5, 9, 10, 14, 14], [4, 7, 7, 11, 12, 16, 16], [4, 6, 6, 9, 10, 14, 14]];
    for a in inside {
        ensure!(ok(cell_member(&c, &a))?, "{a:?} should be a member");
    }
    for a in outside {
        ensure!(!ok(cell_member(&c, &a))?, "{a:?} should not be a member");
    }

    let mut rng = StdRng::seed_from_u64(5);
    for _ in 0..100 {
        let total = rng.gen_range(1..=4);
        let s = rng.gen_range(1..=3);
        let c = random_cell(&mut rng, total, s);
        let m = rng.gen_range(0..=total);
        let near = fibers(&c, m, 40);
        let far = fibers(&c, m, 55);
        for b in box_points(total - m, 25) {
            let (n40, n55) = (near.get(&b).copied().unwrap_or(0), far.get(&b).copied().unwrap_or(0));
            match ok(fiber_count(&c, m, &b))? {
                Cardinal::Omega => ensure!(n55 > n40, "{c:?} m={m} at {b:?}: ω but {n40}, {n55}"),
                Cardinal::Finite(v) => {
                    ensure!(n40 == n55 && v == n40.into(), "{c:?} m={m} at {b:?}: {v} vs {n40}, {n55}");
                }
            }
        }
    }
    Ok(())
}

// 6

fn equal_or_disjoint() -> Outcome {
    let mut rng = StdRng::seed_from_u64(6);
    let (mut equal, mut disjoint) = (0, 0);
    for i in 0..100 {
        let n = rng.gen_range(1..=3);
        let s = rng.gen_range(1..=3);
        let a = random_cell(&mut rng, n, s);
        // a quarter of the pairs share a set written differently
        let b = if i % 4 == 0 { a.canonical() } else { random_cell(&mut rng, n, s) };
        let top = 3 * s * n as u64;
        let ma: BTreeSet<_> = members(&a, top).into_iter().collect();
        let mb: BTreeSet<_> = members(&b, top).into_iter().collect();
        match ok(cells_equal_or_disjoint(&a, &b))? {
            CellRelation::Equal => {
                equal += 1;
                ensure!(ma == mb, "{a:?} and {b:?} reported equal");
            }
            CellRelation::Disjoint => {
                disjoint += 1;
                ensure!(ma.is_disjoint(&mb), "{a:?} and {b:?} reported disjoint");
            }
        }
    }
    ensure!(equal > 0 && disjoint > 0, "degenerate sample: {equal} equal, {disjoint} disjoint");
    Ok(())
}

// 7

fn set(n: usize, pieces: &[(&[u64], &[&[u64]])]) -> SemilinearSet {
    let pieces = pieces
        .iter()
        .map(|(o, ps)| LinearSet::from_parts(o.to_vec(), ps.iter().map(|p| p.to_vec()).collect()).unwrap())
        .collect();
    SemilinearSet::new(n, pieces, true).unwrap()
}

fn outdegree() -> Outcome {
    let periods: &[&[u64]] = &[&[0, 2, 2], &[2, 2, 2], &[0, 1, 0]];
    let s = set(3, &[(&[0, 0, 0], periods), (&[1, 2, 2], periods)]);
    let g = ok(outdegree_gvpf(&s, 2))?;
    for (c, want) in [([2, 6], 3), ([3, 7], 2), ([5, 2], 0)] {
        ensure!(ok(g.eval(&c))? == want, "d{c:?} = {}", g.eval(&c).unwrap());
    }
    for c in box_points(2, 20) {
        let mut brute = 0;
        for v in 0..=21 {
            brute += ok(s.member(&[c[0], c[1], v]))? as u64;
        }
        ensure!(ok(g.eval(&c))? == brute, "d{c:?}: {} vs {brute}", g.eval(&c).unwrap());
    }
    let below = set(2, &[(&[0, 0], &[&[1, 0], &[1, 1]])]);
    let g = ok(outdegree_gvpf(&below, 1))?;
    for a in 0..=20 {
        ensure!(ok(g.eval(&[a]))? == a + 1, "g({a})");
    }
    Ok(())
}

// 8

fn below_diagonal_spec() -> FiberSpec {
    FiberSpec::new(2, 1, OrderFormula::parse("x1 <= x0 & x2 = x0").unwrap()).unwrap()
}

fn nat(arity: usize, monos: &[(u64, &[u32])]) -> NatPoly {
    NatPoly::new(arity, monos.iter().map(|(c, e)| (*c, e.to_vec()))).unwrap()
}

fn half_plus_one() -> GeneralizedVpf {
    GeneralizedVpf::new(1, vec![(VectorPartitionFn::new(vec![vec![1, 2]]).unwrap(), vec![0])]).unwrap()
}

fn eq_round_trips() -> Outcome {
    let d = ok(classify(&below_diagonal_spec()))?;
    for k in 1..=16 {
        ensure!(ok(class_count(&d, k))? == Cardinal::from(1), "class_count({k}) = {}", class_count(&d, k).unwrap());
    }

    let p = nat(1, &[(1, &[1]), (1, &[0])]);
    let pres = ok(build_ep(&p))?;
    let report = ok(check(&pres, &EqDescriptor::new(vec![p], Cardinal::zero()), 6))?;
    ensure!(report.pass, "E_p check failed: {:?}", report.mismatches);

    let g = half_plus_one();
    let pres = ok(apply_interpretation(&ok(presburger(2))?, &ok(build_eg_presburger(&g))?))?;
    let m = ok(empirical_multiset(&pres, 4))?;
    // every x < 16 is fully visible at this bound
    let mut want: BTreeMap<u64, u64> = BTreeMap::new();
    for x in 0..16u64 {
        *want.entry(ok(g.eval(&[x]))?).or_default() += 1;
    }
    for k in 1..=4 {
        let w = Cardinal::from(want.get(&k).copied().unwrap_or(0));
        let got = m.counts.get(&k).cloned().unwrap_or_default();
        ensure!(got == w, "size {k}: {got} vs {w}");
    }
    Ok(())
}

// 9

fn reach_growth() -> Outcome {
    let p = grid_example();
    let origin = ok(p.element(""))?;
    let step = f("E0(x,y) | E1(x,y) | E0(y,x) | E1(y,x)");
    let r = ok(reach(&p, &step, &["x".into()], "y", &[origin], 4))?;
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
    ensure!(sizes == [1, 5, 13, 25, 41], "BFS gave {sizes:?}");
    let want: Vec<Cardinal> = sizes.into_iter().map(Cardinal::from).collect();
    ensure!(r.sizes == want, "reach sizes {:?}", r.sizes);
    Ok(())
}

// 10

fn natural(p: &NatPoly) -> bool {
    p.to_poly().monomials().all(|(_, c)| c.is_integer() && !c.is_negative())
}

fn descriptors_are_natural() -> Outcome {
    let mut ds = Vec::new();
    for (m, n, graph) in [
        (2, 1, "x1 <= x0 & x2 = x0"),
        (1, 1, "x1 = x0"),
        (3, 1, "x1 < x2 & x2 < x0 & x3 = x0"),
        (3, 2, "x1 <= x0 & x3 = x0 & x4 = x2"),
        (2, 1, "x0 < x1 + 2 & x1 <= x0 + 1 & x2 = x0 + 1"),
    ] {
        let spec = ok(FiberSpec::new(m, n, ok(OrderFormula::parse(graph))?))?;
        ds.push((graph.to_string(), ok(classify(&spec))?));
    }
    let half = || BigRational::new(1.into(), 2.into());
    let even = Chamber {
        set: ok(LinearSet::from_parts(vec![0], vec![vec![2]]))?,
        poly: Poly::var(1, 0).scale(&half()).add(&Poly::from_int(1, 1)),
    };
    let odd = Chamber {
        set: ok(LinearSet::from_parts(vec![1], vec![vec![2]]))?,
        poly: Poly::var(1, 0).add(&Poly::from_int(1, 1)).scale(&half()),
    };
    ds.push(("half_plus_one".into(), ok(gvpf_to_descriptor(&half_plus_one(), &[even, odd]))?));
    for (name, d) in ds {
        ensure!(!d.polys.is_empty(), "{name}: no polynomials");
        for p in &d.polys {
            ensure!(natural(p), "{name}: {p} has a non-natural coefficient");
        }
    }
    Ok(())
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("convolution law", 1, convolution_law),
        ("growth classification", 1, growth_classification),
        ("FOC evaluator", 5, foc_evaluator),
        ("interpretation closure", 2, interpretation_closure),
        ("s-cell suite", 60, cell_suite),
        ("disjoint or equal", 10, equal_or_disjoint),
        ("out-degree GVPF", 5, outdegree),
        ("equivalence round trips", 120, eq_round_trips),
        ("reachability growth", 5, reach_growth),
        ("natural descriptors", 1, descriptors_are_natural),
    ];
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        let outcome = outcome.and_then(|_| {
            if took <= Duration::from_secs(limit) {
                Ok(())
            } else {
                Err("over time".into())
            }
        });
        let status = if outcome.is_ok() { "PASS" } else { "FAIL" };
        let detail = outcome.as_ref().err().map(|e| format!(": {e}")).unwrap_or_default();
        println!("criterion {:>2} {status} {name} ({:.3}s / {limit}s){detail}", i + 1, took.as_secs_f64());
        failed += outcome.is_err() as usize;
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
