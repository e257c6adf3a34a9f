//! Presentations of standard structures.

use std::collections::BTreeMap;

use crate::automata::{Alphabet, Automaton, Dfa};
use crate::error::{Error, Result};
use crate::relations::{self, RegularRelation, Tracks};

use super::Presentation;

/// DFA over `tr` with `n` states (state 0 initial); `f(state, digits)` gives the successor.
fn dfa_from_fn(tr: &Tracks, n: usize, accepting: &[usize], f: impl Fn(usize, &[usize]) -> usize) -> Dfa {
    let mut trans = vec![0u32; n * tr.nsym];
    let mut digits = vec![0; tr.n];
    for s in 0..tr.nsym {
        for (t, d) in digits.iter_mut().enumerate() {
            *d = tr.digit(s, t);
        }
        for q in 0..n {
            trans[q * tr.nsym + s] = f(q, &digits) as u32;
        }
    }
    let mut acc = vec![false; n];
    for &a in accepting {
        acc[a] = true;
    }
    Dfa { nsym: tr.nsym, trans, accepting: acc }.minimize()
}

fn digits_alphabet(p: usize) -> Result<Alphabet> {
    Alphabet::from_tokens((0..p).map(|d| d.to_string()))
}

fn restrict(dom: &Automaton, d: &Dfa, n: usize) -> Dfa {
    let tr = Tracks::new(dom.alphabet().len(), n);
    d.intersect(&relations::domain_cylinder(&dom.to_dfa().minimize(), &tr))
}

fn make(base: Alphabet, domain: Automaton, rels: Vec<(&str, usize, Dfa)>) -> Presentation {
    let mut map = BTreeMap::new();
    for (name, n, d) in rels {
        let d = restrict(&domain, &d, n);
        map.insert(name.to_string(), RegularRelation::from_dfa(n, base.clone(), &d));
    }
    Presentation::new_unchecked(base, domain, map)
}

/// ⟨ω, ≤⟩ with n coded as 0ⁿ; relation `le`.
pub fn omega_le() -> Presentation {
    let base = Alphabet::from_tokens(["0"]).expect("valid");
    let domain = Automaton::universal(base.clone());
    let le = relations::builtin_dfa("pf", 1).expect("builtin");
    make(base, domain, vec![("le", 2, le)])
}

/// Domain of canonical base-p numerals: least significant digit first, no trailing zero (0 is ε).
fn numerals(base: &Alphabet, p: usize) -> Automaton {
    // 0: accepting (empty or last digit nonzero), 1: last digit zero
    let trans: Vec<(u32, u32, u32)> =
        (0..p as u32).flat_map(|d| [(0, d, if d == 0 { 1 } else { 0 }), (1, d, if d == 0 { 1 } else { 0 })]).collect();
    Automaton::new(base.clone(), 2, vec![0], vec![0], trans).expect("valid")
}

fn check_base(p: usize) -> Result<()> {
    if p < 2 {
        return Err(Error::InvalidParameter(format!("base {p} must be at least 2")));
    }
    Ok(())
}

/// ⟨ℕ, +⟩ in base p; relation `plus(x,y,z)` ⇔ x + y = z.
pub fn presburger(p: usize) -> Result<Presentation> {
    check_base(p)?;
    let base = digits_alphabet(p)?;
    let domain = numerals(&base, p);
    let tr = Tracks::new(p, 3);
    let val = |d: usize| if d == p { 0 } else { d };
    // states: carry 0, carry 1, sink
    let plus = dfa_from_fn(&tr, 3, &[0], |q, ds| {
        if q == 2 {
            return 2;
        }
        let s = val(ds[0]) + val(ds[1]) + q;
        if s % p == val(ds[2]) {
            s / p
        } else {
            2
        }
    });
    Ok(make(base, domain, vec![("plus", 3, plus)]))
}

/// `presburger(p)` plus `divp(x,y)` ⇔ x is a power of p dividing y.
pub fn presburger_div(p: usize) -> Result<Presentation> {
    let pres = presburger(p)?;
    let tr = Tracks::new(p, 2);
    let pad = p;
    // 0: x reading zeros, y zeros too; 1: y exhausted; 2: x ended with its 1; 3: sink
    let divp = dfa_from_fn(&tr, 4, &[2], |q, ds| {
        let (x, y) = (ds[0], ds[1]);
        match q {
            0 if x == 0 && y == 0 => 0,
            0 if x == 0 && y == pad => 1,
            0 if x == 1 => 2,
            1 if x == 0 && y == pad => 1,
            1 if x == 1 && y == pad => 2,
            2 if x == pad => 2,
            _ => 3,
        }
    });
    let r = RegularRelation::from_dfa(2, pres.base().clone(), &restrict(pres.domain(), &divp, 2));
    pres.with_relation("divp", r)
}

/// The p-ary tree {0..p-1}* with the prefix order `pf` and successors `suc0`..; equal length is the builtin `lenEq`.
pub fn pary_tree(p: usize) -> Result<Presentation> {
    check_base(p)?;
    let base = digits_alphabet(p)?;
    let domain = Automaton::universal(base.clone());
    let tr = Tracks::new(p, 2);
    let mut rels = vec![("pf", 2, relations::builtin_dfa("pf", p).expect("builtin"))];
    let names: Vec<String> = (0..p).map(|k| format!("suc{k}")).collect();
    for (k, name) in names.iter().enumerate() {
        // 0: copying, 1: appended k, 2: sink
        let d = dfa_from_fn(&tr, 3, &[1], |q, ds| match q {
            0 if ds[0] != p && ds[0] == ds[1] => 0,
            0 if ds[0] == p && ds[1] == k => 1,
            _ => 2,
        });
        rels.push((name.as_str(), 2, d));
    }
    Ok(make(base, domain, rels))
}

fn regex_relation(base: &Alphabet, arity: usize, text: &str) -> Dfa {
    RegularRelation::from_regex(base, arity, text).expect("builder regex").dfa()
}

/// ℤ² with (i,k) coded as a^i b^k, capital letters for negative coordinates;
/// `E0` steps (i,k) ↦ (i+1,k) and `E1` steps (i,k) ↦ (i,k+1).
pub fn grid_example() -> Presentation {
    let base = Alphabet::from_tokens(["a", "A", "b", "B"]).expect("valid");
    let domain = Automaton::from_regex(base.clone(), "(a*|A*)(b*|B*)").expect("valid");
    let e0 = regex_relation(
        &base,
        2,
        "[a,a]*([_,a] | [b,a][b,b]*[_,b] | [B,a][B,B]*[_,B]) \
         | [A,A]*([A,_] | [A,b][b,b]*[b,_] | [A,B][B,B]*[B,_])",
    );
    let e1 = regex_relation(&base, 2, "([a,a]* | [A,A]*)([b,b]*[_,b] | [B,B]*[B,_])");
    make(base, domain, vec![("E0", 2, e0), ("E1", 2, e1)])
}

/// The order of type ω on a*b* by length-lexicographic comparison, with the predicate `P` = a*.
/// aⁿ sits at position n(n+1)/2.
pub fn triangular_example() -> Presentation {
    let base = Alphabet::from_tokens(["a", "b"]).expect("valid");
    let domain = Automaton::from_regex(base.clone(), "a*b*").expect("valid");
    let le = relations::builtin_dfa("llex", 2).expect("builtin");
    let astar = regex_relation(&base, 1, "[a]*");
    make(base, domain, vec![("le", 2, le), ("P", 1, astar)])
}

/// ⟨0*, 0*×0*⟩: one infinite class under `~`.
pub fn one_infinite_class() -> Presentation {
    let base = Alphabet::from_tokens(["0"]).expect("valid");
    let domain = Automaton::universal(base.clone());
    let all = Dfa::universal(Tracks::new(1, 2).nsym);
    make(base, domain, vec![("~", 2, all)])
}

/// ⟨0*1*, {(0ⁿ1ᵏ, 0ⁿ1ˡ)}⟩: ω many infinite classes under `~`.
pub fn omega_infinite_classes() -> Presentation {
    let base = Alphabet::from_tokens(["0", "1"]).expect("valid");
    let domain = Automaton::from_regex(base.clone(), "0*1*").expect("valid");
    let sim = regex_relation(&base, 2, "[0,0]*[1,1]*([1,_]* | [_,1]*)");
    make(base, domain, vec![("~", 2, sim)])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builders_satisfy_presentation_invariants() {
        for p in [
            omega_le(),
            presburger(2).unwrap(),
            presburger(3).unwrap(),
            presburger_div(2).unwrap(),
            pary_tree(2).unwrap(),
            grid_example(),
            triangular_example(),
            one_infinite_class(),
            omega_infinite_classes(),
        ] {
            let q = Presentation::new(p.base().clone(), p.domain().clone(), p.relations().clone()).unwrap();
            assert_eq!(q, p);
        }
    }

    #[test]
    fn invalid_base() {
        assert!(presburger(1).is_err());
        assert!(pary_tree(0).is_err());
    }

    #[test]
    fn omega_classes() {
        let p = omega_infinite_classes();
        let w = |s: &str| p.element(s).unwrap();
        assert!(!p.holds("~", &[w("0011"), w("0001")]).unwrap());
        assert!(p.holds("~", &[w("0011"), w("00111")]).unwrap());
    }

    #[test]
    fn plus_in_base_two() {
        let p = presburger(2).unwrap();
        let n = |x: u64| -> Vec<u32> {
            let mut v = Vec::new();
            let mut x = x;
            while x > 0 {
                v.push((x % 2) as u32);
                x /= 2;
            }
            v
        };
        for x in 0..9 {
            for y in 0..9 {
                for z in 0..18 {
                    assert_eq!(p.holds("plus", &[n(x), n(y), n(z)]).unwrap(), x + y == z, "{x}+{y}={z}");
                }
            }
        }
    }

    #[test]
    fn grid_neighbours() {
        let p = grid_example();
        let code = |i: i64, k: i64| -> Vec<u32> {
            let mut w = vec![if i >= 0 { 0 } else { 1 }; i.unsigned_abs() as usize];
            w.extend(vec![if k >= 0 { 2 } else { 3 }; k.unsigned_abs() as usize]);
            w
        };
        for i in -3..=3 {
            for k in -3..=3 {
                for i2 in -4..=4 {
                    for k2 in -4..=4 {
                        let e0 = p.holds("E0", &[code(i, k), code(i2, k2)]).unwrap();
                        let e1 = p.holds("E1", &[code(i, k), code(i2, k2)]).unwrap();
                        assert_eq!(e0, i2 == i + 1 && k2 == k);
                        assert_eq!(e1, i2 == i && k2 == k + 1);
                    }
                }
            }
        }
    }
}
