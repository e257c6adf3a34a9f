//! Growth of regular languages: the polynomial/exponential dichotomy, bounded patterns
//! u₀v₀*u₁…v_{k-1}*u_k, their distinct-letter normal form and exponent sets.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use serde_json::{json, Value};

use crate::automata::{Alphabet, Automaton, Dfa, Nfa, Symbol, Word};
use crate::error::{Error, Result};
use crate::relations::{PaddedAlphabet, RegularRelation};
use crate::semilinear::{AffineMap, LinearSet, SemilinearSet};

/// The language u₀v₀*u₁v₁*…v_{k-1}*u_k.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BoundedPattern {
    pub prefixes: Vec<Word>,
    pub loops: Vec<Word>,
}

impl BoundedPattern {
    pub fn new(prefixes: Vec<Word>, loops: Vec<Word>) -> Result<Self> {
        if prefixes.len() != loops.len() + 1 {
            return Err(Error::InvalidParameter("a pattern needs one more prefix than loops".into()));
        }
        if loops.iter().any(|v| v.is_empty()) {
            return Err(Error::InvalidParameter("pattern loops must be nonempty".into()));
        }
        Ok(BoundedPattern { prefixes, loops })
    }

    /// The word u₀v₀^{i₀}u₁…u_k.
    pub fn word(&self, exps: &[usize]) -> Word {
        let mut w = self.prefixes[0].clone();
        for (j, &e) in exps.iter().enumerate() {
            for _ in 0..e {
                w.extend(&self.loops[j]);
            }
            w.extend(&self.prefixes[j + 1]);
        }
        w
    }

    pub(crate) fn to_nfa(&self, nsym: usize) -> Nfa {
        let lit = |w: &Word| Nfa::from_dfa(&Dfa::from_words(nsym, std::slice::from_ref(w)));
        let mut n = lit(&self.prefixes[0]);
        for (v, u) in self.loops.iter().zip(&self.prefixes[1..]) {
            n = n.concat(&lit(v).star()).concat(&lit(u));
        }
        n
    }

    pub fn to_automaton(&self, alphabet: &Alphabet) -> Automaton {
        Automaton::from_dfa(alphabet.clone(), &self.to_nfa(alphabet.len()).determinize().minimize(), true)
    }

    pub fn to_json_value(&self, alphabet: &Alphabet) -> Value {
        let r = |ws: &[Word]| ws.iter().map(|w| alphabet.render_word(w)).collect::<Vec<_>>();
        json!({"prefixes": r(&self.prefixes), "loops": r(&self.loops)})
    }

    pub fn from_json_value(alphabet: &Alphabet, v: &Value) -> Result<Self> {
        let words = |key: &str| -> Result<Vec<Word>> {
            let arr = v.get(key).and_then(Value::as_array).ok_or_else(|| Error::Json(format!("missing `{key}`")))?;
            arr.iter()
                .map(|s| s.as_str().ok_or_else(|| Error::Json("pattern words are strings".into())).and_then(|s| alphabet.parse_word(s)))
                .collect()
        };
        BoundedPattern::new(words("prefixes")?, words("loops")?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrowthReport {
    pub alphabet: Alphabet,
    pub polynomial: bool,
    /// Cumulative counts grow as Θ(n^degree); meaningful only when `polynomial`.
    pub degree: usize,
    pub patterns: Vec<BoundedPattern>,
}

impl GrowthReport {
    pub fn to_json_value(&self) -> Value {
        json!({
            "polynomial": self.polynomial,
            "degree": self.degree,
            "patterns": self.patterns.iter().map(|p| p.to_json_value(&self.alphabet)).collect::<Vec<_>>(),
        })
    }
}

/// Trim minimal DFA with strongly connected components.
struct Skeleton {
    d: Dfa,
    useful: Vec<bool>,
    comp: Vec<usize>,
}

impl Skeleton {
    fn new(a: &Automaton) -> Self {
        let d = a.to_dfa().minimize();
        let useful = d.useful_states();
        let comp = sccs(&d, &useful);
        Skeleton { d, useful, comp }
    }

    /// Edges staying inside the component of `q`.
    fn internal(&self, q: usize) -> Vec<(u32, usize)> {
        (0..self.d.nsym)
            .filter_map(|s| {
                let t = self.d.step(q, s);
                (self.useful[t] && self.comp[t] == self.comp[q]).then_some((s as u32, t))
            })
            .collect()
    }

    fn polynomial(&self) -> bool {
        (0..self.d.n()).filter(|&q| self.useful[q]).all(|q| self.internal(q).len() <= 1)
    }
}

/// Tarjan's algorithm restricted to `keep`; returns component ids (usize::MAX outside `keep`).
fn sccs(d: &Dfa, keep: &[bool]) -> Vec<usize> {
    let n = d.n();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on = vec![false; n];
    let mut comp = vec![usize::MAX; n];
    let mut stack = Vec::new();
    let mut next = 0;
    let mut ncomp = 0;
    for root in 0..n {
        if !keep[root] || index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on[root] = true;
        while let Some(&mut (v, ref mut s)) = call.last_mut() {
            if *s < d.nsym {
                let w = d.step(v, *s);
                *s += 1;
                if !keep[w] {
                    continue;
                }
                if index[w] == usize::MAX {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on[w] = true;
                    call.push((w, 0));
                } else if on[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(u, _)) = call.last() {
                    low[u] = low[u].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on[w] = false;
                        comp[w] = ncomp;
                        if w == v {
                            break;
                        }
                    }
                    ncomp += 1;
                }
            }
        }
    }
    comp
}

/// Enumerates one pattern per path through the component DAG; distinct patterns are disjoint.
fn patterns_of(sk: &Skeleton) -> Vec<BoundedPattern> {
    let mut out = Vec::new();
    if sk.useful.first() != Some(&true) {
        return out;
    }
    walk(sk, 0, Vec::new(), Vec::new(), Vec::new(), &mut out);
    out
}

fn walk(sk: &Skeleton, e: usize, mut cur: Word, mut prefixes: Vec<Word>, mut loops: Vec<Word>, out: &mut Vec<BoundedPattern>) {
    // states of the component in cycle order from e, with the word leading there
    let mut exits: Vec<(usize, Word)> = vec![(e, Vec::new())];
    if let Some(&(s, mut t)) = sk.internal(e).first() {
        let mut cycle = vec![s];
        while t != e {
            let (s2, t2) = sk.internal(t)[0];
            exits.push((t, cycle.clone()));
            cycle.push(s2);
            t = t2;
        }
        prefixes.push(std::mem::take(&mut cur));
        loops.push(cycle);
    }
    for (x, w) in exits {
        let mut here = cur.clone();
        here.extend(&w);
        if sk.d.accepting[x] {
            let mut pre = prefixes.clone();
            pre.push(here.clone());
            out.push(BoundedPattern { prefixes: pre, loops: loops.clone() });
        }
        for s in 0..sk.d.nsym {
            let t = sk.d.step(x, s);
            if sk.useful[t] && sk.comp[t] != sk.comp[x] {
                let mut next = here.clone();
                next.push(s as u32);
                walk(sk, t, next, prefixes.clone(), loops.clone(), out);
            }
        }
    }
}

fn union_dfa(patterns: &[BoundedPattern], nsym: usize) -> Dfa {
    patterns.iter().fold(Dfa::empty(nsym), |acc, p| acc.union(&p.to_nfa(nsym).determinize()))
}

/// Polynomial iff every strongly connected component of the trim minimal DFA is a simple cycle.
pub fn classify_growth(a: &Automaton) -> Result<GrowthReport> {
    let sk = Skeleton::new(a);
    let alphabet = a.alphabet().clone();
    if !sk.polynomial() {
        return Ok(GrowthReport { alphabet, polynomial: false, degree: 0, patterns: Vec::new() });
    }
    let patterns = patterns_of(&sk);
    let degree = patterns.iter().map(|p| p.loops.len()).max().unwrap_or(0);
    if !union_dfa(&patterns, sk.d.nsym).equivalent(&sk.d) {
        return Err(Error::Certificate("bounded patterns do not cover the language".into()));
    }
    // the patterns are disjoint, so counts are at most #patterns·(n+1)^degree, and a pattern
    // with `degree` loops of total length ℓ contributes at least one word per ℓ·degree letters
    let counts = a.count_words_upto(16).values;
    for (n, c) in counts.iter().enumerate() {
        let bound = BigUint::from(patterns.len().max(1)) * BigUint::from(n + 1).pow(degree as u32);
        if *c > bound {
            return Err(Error::Certificate(format!("count {c} at length {n} exceeds the degree-{degree} bound")));
        }
    }
    if degree > 0 {
        let p = patterns.iter().find(|p| p.loops.len() == degree).expect("pattern of max degree");
        let base: usize = p.prefixes.iter().map(Vec::len).sum();
        let step: usize = p.loops.iter().map(Vec::len).sum();
        let n = base + 2 * step;
        let c = a.count_words_upto(n).values;
        if c[n] <= c[base] {
            return Err(Error::Certificate("counts do not grow although the language has a loop".into()));
        }
    }
    Ok(GrowthReport { alphabet, polynomial: true, degree, patterns })
}

/// Patterns whose union is L(a). Rejects languages of exponential growth.
pub fn bounded_decomposition(a: &Automaton) -> Result<Vec<BoundedPattern>> {
    let r = classify_growth(a)?;
    if !r.polynomial {
        return Err(Error::NotPolynomial);
    }
    Ok(r.patterns)
}

/// The length-preserving recoding of a union of patterns onto fresh letters.
#[derive(Clone, Debug)]
pub struct Recode {
    pub source: Alphabet,
    /// Fresh letters `p{i}_a{j}` and `p{i}_b{j}`.
    pub target: Alphabet,
    /// Source tokens followed by target tokens; the base of `relation`.
    pub combined: Alphabet,
    /// Pairs (w, w') with w' the normal form of w.
    pub relation: RegularRelation,
}

impl Recode {
    /// Normal forms of `w` (a single one when the patterns are disjoint and unambiguous).
    pub fn apply(&self, w: &[u32]) -> Result<Vec<Word>> {
        let lang = Automaton::from_words(self.combined.clone(), &[w.to_vec()])?;
        let img = self.relation.image(1, &lang)?;
        let off = self.source.len() as u32;
        let mut out: Vec<Word> = img.enumerate_upto(w.len()).into_iter().map(|v| v.iter().map(|s| s - off).collect()).collect();
        out.sort_by(|a, b| crate::automata::llex_compare(a, b));
        Ok(out)
    }
}

/// Per pattern i, replaces u_j by a_j^{|u_j|} and v_j by b_j^{|v_j|} over letters private to i.
pub fn normalize_letters(alphabet: &Alphabet, patterns: &[BoundedPattern]) -> Result<(Vec<BoundedPattern>, Recode)> {
    let mut tokens: Vec<String> = Vec::new();
    // (pattern, 'a'|'b', j) -> target index
    let mut idx: BTreeMap<(usize, char, usize), u32> = BTreeMap::new();
    for (i, p) in patterns.iter().enumerate() {
        for j in 0..p.prefixes.len() {
            for (kind, present) in [('a', true), ('b', j < p.loops.len())] {
                if present {
                    idx.insert((i, kind, j), tokens.len() as u32);
                    tokens.push(format!("p{i}_{kind}{j}"));
                }
            }
        }
    }
    for t in &tokens {
        if alphabet.index_of_str(t).is_some() {
            return Err(Error::InvalidAlphabet(format!("fresh letter `{t}` already in the alphabet")));
        }
    }
    let target = if tokens.is_empty() {
        // an empty union still needs some alphabet
        Alphabet::from_tokens(["p_"])?
    } else {
        Alphabet::from_tokens(tokens.iter())?
    };
    let mut combined_syms: Vec<Symbol> = alphabet.symbols().to_vec();
    combined_syms.extend(target.symbols().iter().cloned());
    let combined = Alphabet::new(combined_syms)?;
    let off = alphabet.len() as u32;
    let pa = PaddedAlphabet::new(combined.clone(), 2);
    let nsym = pa.len();
    let pair = |src: &Word, letter: u32| -> Word {
        src.iter().map(|&s| pa.encode(&[Some(s), Some(letter + off)]).expect("non-pad")).collect()
    };
    let mut normalized = Vec::new();
    let mut nfa: Option<Nfa> = None;
    for (i, p) in patterns.iter().enumerate() {
        let pre: Vec<Word> = p.prefixes.iter().enumerate().map(|(j, u)| vec![idx[&(i, 'a', j)]; u.len()]).collect();
        let lps: Vec<Word> = p.loops.iter().enumerate().map(|(j, v)| vec![idx[&(i, 'b', j)]; v.len()]).collect();
        normalized.push(BoundedPattern { prefixes: pre, loops: lps });
        let conv = BoundedPattern {
            prefixes: p.prefixes.iter().enumerate().map(|(j, u)| pair(u, idx[&(i, 'a', j)])).collect(),
            loops: p.loops.iter().enumerate().map(|(j, v)| pair(v, idx[&(i, 'b', j)])).collect(),
        };
        let n = conv.to_nfa(nsym);
        nfa = Some(match nfa {
            None => n,
            Some(m) => m.union(&n),
        });
    }
    let d = nfa.map(|n| n.determinize()).unwrap_or_else(|| Dfa::empty(nsym));
    let relation = RegularRelation::from_dfa(2, combined.clone(), &d);
    Ok((normalized, Recode { source: alphabet.clone(), target, combined, relation }))
}

/// Eventually periodic run of a loop word from a state: the states after 0, 1, 2, … iterations
/// are `seq[0..]`, repeating from index `start` with period `seq.len() - start`.
fn loop_orbit(d: &Dfa, q: usize, v: &[u32]) -> (Vec<usize>, usize) {
    let mut seq = vec![q];
    let mut seen = BTreeMap::from([(q, 0usize)]);
    loop {
        let t = d.run_from(*seq.last().expect("nonempty"), v);
        if let Some(&i) = seen.get(&t) {
            return (seq, i);
        }
        seen.insert(t, seq.len());
        seq.push(t);
    }
}

/// {(i₀,…,i_{k-1}) : u₀v₀^{i₀}…u_k ∈ L(a)} as a semilinear set.
pub fn pattern_exponents(a: &Automaton, pat: &BoundedPattern) -> Result<SemilinearSet> {
    if pat.prefixes.len() != pat.loops.len() + 1 || pat.loops.iter().any(|v| v.is_empty()) {
        return Err(Error::InvalidParameter("malformed pattern".into()));
    }
    let nsym = a.alphabet().len() as u32;
    if pat.prefixes.iter().chain(&pat.loops).flatten().any(|&s| s >= nsym) {
        return Err(Error::UnknownSymbol("symbol index out of range for the alphabet".into()));
    }
    let d = a.to_dfa().minimize();
    let mut pieces = Vec::new();
    // per coordinate: value and optional period
    let mut choice: Vec<(u64, Option<u64>)> = Vec::new();
    exps_walk(&d, pat, d.run_from(0, &pat.prefixes[0]), &mut choice, &mut pieces);
    // distinct choices hit distinct iteration counts in some coordinate, and every piece has
    // scaled unit periods, so the pieces are disjoint and simple
    SemilinearSet::new(pat.loops.len(), pieces, true)
}

fn exps_walk(d: &Dfa, pat: &BoundedPattern, q: usize, choice: &mut Vec<(u64, Option<u64>)>, out: &mut Vec<LinearSet>) {
    let j = choice.len();
    if j == pat.loops.len() {
        if d.accepting[q] {
            let offset = choice.iter().map(|c| c.0).collect();
            let columns = choice
                .iter()
                .enumerate()
                .filter_map(|(i, c)| {
                    c.1.map(|p| {
                        let mut col = vec![0; choice.len()];
                        col[i] = p;
                        col
                    })
                })
                .collect();
            out.push(LinearSet::new(AffineMap::new(offset, columns).expect("consistent dimensions")));
        }
        return;
    }
    let (seq, start) = loop_orbit(d, q, &pat.loops[j]);
    let period = (seq.len() - start) as u64;
    for (i, &t) in seq.iter().enumerate() {
        let c = if i < start { (i as u64, None) } else { (i as u64, Some(period)) };
        choice.push(c);
        exps_walk(d, pat, d.run_from(t, &pat.prefixes[j + 1]), choice, out);
        choice.pop();
    }
}
