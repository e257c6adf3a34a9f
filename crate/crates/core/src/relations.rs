//! Convolutions of word tuples and regular relations over padded product alphabets.

use serde_json::{json, Value};

use crate::automata::{Alphabet, Automaton, Dfa, Nfa, Symbol, Word};
use crate::error::{Error, Result};

/// The alphabet (Σ ∪ {□})ⁿ minus the all-□ letter, indexed mixed-radix with track 0 most significant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PaddedAlphabet {
    base: Alphabet,
    arity: usize,
}

impl PaddedAlphabet {
    pub fn new(base: Alphabet, arity: usize) -> Self {
        PaddedAlphabet { base, arity }
    }

    pub fn base(&self) -> &Alphabet {
        &self.base
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        (self.base.len() + 1).pow(self.arity as u32) - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Index of a letter given per-track base indices (`None` is the pad); `None` for the all-pad letter.
    pub fn encode(&self, letter: &[Option<u32>]) -> Option<u32> {
        let r = self.base.len() as u64 + 1;
        let pad = self.base.len() as u64;
        let mut idx = 0u64;
        let mut all_pad = true;
        for c in letter {
            let d = match c {
                Some(a) => {
                    all_pad = false;
                    *a as u64
                }
                None => pad,
            };
            idx = idx * r + d;
        }
        if all_pad {
            None
        } else {
            Some(idx as u32)
        }
    }

    pub fn decode(&self, sym: u32) -> Vec<Option<u32>> {
        let r = self.base.len() as u32 + 1;
        let mut out = vec![None; self.arity];
        let mut x = sym;
        for i in (0..self.arity).rev() {
            let d = x % r;
            x /= r;
            out[i] = if d as usize == self.base.len() { None } else { Some(d) };
        }
        out
    }

    /// The derived alphabet. For arity 0 there are no letters and this panics.
    pub fn alphabet(&self) -> Alphabet {
        let syms: Vec<Symbol> = (0..self.len() as u32)
            .map(|i| {
                Symbol::Tuple(
                    self.decode(i).into_iter().map(|c| c.map(|a| self.base.symbol(a as usize).clone())).collect(),
                )
            })
            .collect();
        assert!(!syms.is_empty(), "padded alphabet of arity 0 has no letters");
        Alphabet::from_symbols_unchecked(syms)
    }
}

/// Column view of a convolution: letter j has component i equal to the j-th letter of word i, or the pad.
pub fn convolve_columns(words: &[Word]) -> Vec<Vec<Option<u32>>> {
    let len = words.iter().map(Vec::len).max().unwrap_or(0);
    (0..len).map(|j| words.iter().map(|w| w.get(j).copied()).collect()).collect()
}

pub fn convolve(pa: &PaddedAlphabet, words: &[Word]) -> Result<Word> {
    if words.len() != pa.arity {
        return Err(Error::ArityMismatch { expected: pa.arity, got: words.len() });
    }
    if words.iter().flatten().any(|&a| a as usize >= pa.base.len()) {
        return Err(Error::UnknownSymbol("symbol outside the base alphabet".into()));
    }
    Ok(convolve_columns(words).iter().map(|c| pa.encode(c).expect("columns are never all-pad")).collect())
}

pub fn deconvolve(pa: &PaddedAlphabet, w: &[u32]) -> Result<Vec<Word>> {
    let mut words: Vec<Word> = vec![Vec::new(); pa.arity];
    let mut ended = vec![false; pa.arity];
    for (j, &sym) in w.iter().enumerate() {
        if sym as usize >= pa.len() {
            return Err(Error::InvalidConvolution(format!("letter {sym} out of range")));
        }
        for (i, c) in pa.decode(sym).into_iter().enumerate() {
            match c {
                Some(a) => {
                    if ended[i] {
                        return Err(Error::InvalidConvolution(format!("track {i} resumes after the pad at {j}")));
                    }
                    words[i].push(a);
                }
                None => ended[i] = true,
            }
        }
    }
    Ok(words)
}

/// Mixed-radix digit tables for `n` tracks over a base of size `b` (digit `b` is the pad).
#[derive(Clone, Debug)]
pub(crate) struct Tracks {
    pub b: usize,
    pub n: usize,
    pub nsym: usize,
    digits: Vec<u16>,
}

impl Tracks {
    pub fn new(b: usize, n: usize) -> Tracks {
        let r = b + 1;
        let nsym = r.pow(n as u32) - 1;
        let mut digits = vec![0u16; nsym * n];
        for s in 0..nsym {
            let mut x = s;
            for i in (0..n).rev() {
                digits[s * n + i] = (x % r) as u16;
                x /= r;
            }
        }
        Tracks { b, n, nsym, digits }
    }

    #[inline]
    pub fn digit(&self, sym: usize, track: usize) -> usize {
        self.digits[sym * self.n + track] as usize
    }

    #[inline]
    pub fn is_pad(&self, sym: usize, track: usize) -> bool {
        self.digit(sym, track) == self.b
    }

    /// Letter index from digits; `None` for the all-pad combination.
    pub fn encode(&self, ds: impl IntoIterator<Item = usize>) -> Option<usize> {
        let r = self.b + 1;
        let mut idx = 0;
        let mut all_pad = true;
        for d in ds {
            if d != self.b {
                all_pad = false;
            }
            idx = idx * r + d;
        }
        if all_pad {
            None
        } else {
            Some(idx)
        }
    }

    /// Letter index obtained by keeping the listed tracks of `sym`.
    pub fn project_letter(&self, sym: usize, keep: &[usize]) -> Option<usize> {
        let r = self.b + 1;
        let mut idx = 0;
        let mut all_pad = true;
        for &t in keep {
            let d = self.digit(sym, t);
            if d != self.b {
                all_pad = false;
            }
            idx = idx * r + d;
        }
        if all_pad {
            None
        } else {
            Some(idx)
        }
    }
}

/// Valid convolutions of `n`-tuples: once a track is padded it stays padded.
pub(crate) fn validity_dfa(b: usize, n: usize) -> Dfa {
    let tr = Tracks::new(b, n);
    let full = 1usize << n;
    let dead = full;
    let mut trans = vec![0u32; (full + 1) * tr.nsym];
    for mask in 0..full {
        for s in 0..tr.nsym {
            let mut m = mask;
            let mut ok = true;
            for i in 0..n {
                if tr.is_pad(s, i) {
                    m |= 1 << i;
                } else if mask & (1 << i) != 0 {
                    ok = false;
                }
            }
            trans[mask * tr.nsym + s] = if ok { m as u32 } else { dead as u32 };
        }
    }
    for s in 0..tr.nsym {
        trans[dead * tr.nsym + s] = dead as u32;
    }
    let mut accepting = vec![true; full + 1];
    accepting[dead] = false;
    Dfa { nsym: tr.nsym, trans, accepting }.minimize()
}

/// Words whose track `track` is a valid padded word of `dom` (a DFA over the base).
/// Other tracks are unconstrained.
pub(crate) fn track_domain(dom: &Dfa, tr: &Tracks, track: usize) -> Dfa {
    let q = dom.n();
    let ended = q;
    let dead = q + 1;
    let mut trans = vec![0u32; (q + 2) * tr.nsym];
    for s in 0..tr.nsym {
        let d = tr.digit(s, track);
        for st in 0..q {
            trans[st * tr.nsym + s] = if d == tr.b {
                if dom.accepting[st] {
                    ended as u32
                } else {
                    dead as u32
                }
            } else {
                dom.step(st, d) as u32
            };
        }
        trans[ended * tr.nsym + s] = if d == tr.b { ended as u32 } else { dead as u32 };
        trans[dead * tr.nsym + s] = dead as u32;
    }
    let mut accepting = dom.accepting.clone();
    accepting.push(true);
    accepting.push(false);
    Dfa { nsym: tr.nsym, trans, accepting }.minimize()
}

/// Words over `tr` whose every track lies in `dom`, and which are valid convolutions.
pub(crate) fn domain_cylinder(dom: &Dfa, tr: &Tracks) -> Dfa {
    let mut acc = Dfa::universal(tr.nsym);
    for t in 0..tr.n {
        acc = acc.intersect(&track_domain(dom, tr, t));
    }
    acc
}

/// Reads `d` (over `src` tracks) through the track map `f`: source track i is target track f[i].
/// Target tracks outside the image are unconstrained. The source word ends where all its tracks are padded.
pub(crate) fn remap(d: &Dfa, src: &Tracks, dst: &Tracks, f: &[usize]) -> Dfa {
    assert_eq!(f.len(), src.n);
    let q = d.n();
    let done = q;
    let dead = q + 1;
    let letter: Vec<Option<usize>> = (0..dst.nsym).map(|s| src.encode(f.iter().map(|&t| dst.digit(s, t)))).collect();
    let mut trans = vec![0u32; (q + 2) * dst.nsym];
    for (s, l) in letter.iter().enumerate() {
        for st in 0..q {
            trans[st * dst.nsym + s] = match l {
                Some(a) => d.step(st, *a) as u32,
                None if d.accepting[st] => done as u32,
                None => dead as u32,
            };
        }
        trans[done * dst.nsym + s] = if l.is_none() { done as u32 } else { dead as u32 };
        trans[dead * dst.nsym + s] = dead as u32;
    }
    let mut accepting = d.accepting.clone();
    accepting.push(true);
    accepting.push(false);
    Dfa { nsym: dst.nsym, trans, accepting }.minimize()
}

/// Existential projection onto the tracks in `keep` (in that order), with padding closure.
pub(crate) fn project(d: &Dfa, tr: &Tracks, keep: &[usize]) -> Dfa {
    let out = Tracks::new(tr.b, keep.len());
    let letter: Vec<Option<usize>> = (0..tr.nsym).map(|s| tr.project_letter(s, keep)).collect();
    // acceptance closure through letters that are padding on every kept track
    let q = d.n();
    let mut preds: Vec<Vec<u32>> = vec![Vec::new(); q];
    for st in 0..q {
        for (s, l) in letter.iter().enumerate() {
            if l.is_none() {
                preds[d.step(st, s)].push(st as u32);
            }
        }
    }
    let mut acc = d.accepting.clone();
    let mut stack: Vec<usize> = (0..q).filter(|&s| acc[s]).collect();
    while let Some(s) = stack.pop() {
        for &p in &preds[s] {
            if !acc[p as usize] {
                acc[p as usize] = true;
                stack.push(p as usize);
            }
        }
    }
    let mut nfa = Nfa::new(out.nsym);
    for &a in &acc {
        nfa.add_state(a);
    }
    for st in 0..q {
        let mut es: Vec<(u32, u32)> = letter
            .iter()
            .enumerate()
            .filter_map(|(s, l)| l.map(|l| (l as u32, d.step(st, s) as u32)))
            .collect();
        es.sort_unstable();
        es.dedup();
        nfa.edges[st] = es;
    }
    nfa.initial.push(0);
    nfa.determinize().minimize()
}

/// True iff every assignment to the `fixed` tracks has finitely many completions accepted by `d`.
/// `d` must accept only valid convolutions.
pub(crate) fn finitely_many_partners(d: &Dfa, tr: &Tracks, fixed: &[usize]) -> bool {
    let tail: Vec<usize> = (0..tr.nsym).filter(|&s| fixed.iter().all(|&t| tr.is_pad(s, t))).collect();
    let q = d.n();
    let reach = d.reachable_states();
    // states that reach acceptance through tail letters
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); q];
    for st in 0..q {
        for &s in &tail {
            preds[d.step(st, s)].push(st);
        }
    }
    let mut co = d.accepting.clone();
    let mut stack: Vec<usize> = (0..q).filter(|&s| co[s]).collect();
    while let Some(s) = stack.pop() {
        for &p in &preds[s] {
            if !co[p] {
                co[p] = true;
                stack.push(p);
            }
        }
    }
    let live: Vec<bool> = (0..q).map(|s| reach[s] && co[s]).collect();
    // a cycle of tail letters among live states means infinitely many partners
    let mut colour = vec![0u8; q];
    for start in 0..q {
        if !live[start] || colour[start] != 0 {
            continue;
        }
        let mut st: Vec<(usize, usize)> = vec![(start, 0)];
        colour[start] = 1;
        while let Some(top) = st.last_mut() {
            let (u, i) = *top;
            if i == tail.len() {
                colour[u] = 2;
                st.pop();
                continue;
            }
            top.1 += 1;
            let v = d.step(u, tail[i]);
            if !live[v] {
                continue;
            }
            match colour[v] {
                1 => return false,
                0 => {
                    colour[v] = 1;
                    st.push((v, 0));
                }
                _ => {}
            }
        }
    }
    true
}

/// Builtin binary relations over a base of size `b`.
pub(crate) fn builtin_dfa(name: &str, b: usize) -> Option<Dfa> {
    let tr = Tracks::new(b, 2);
    let pad = b;
    // state layout is local to each relation; the last state is the sink
    let build = |n: usize, acc: &[usize], f: &dyn Fn(usize, usize, usize) -> usize| {
        let mut trans = vec![0u32; n * tr.nsym];
        for q in 0..n {
            for s in 0..tr.nsym {
                trans[q * tr.nsym + s] = f(q, tr.digit(s, 0), tr.digit(s, 1)) as u32;
            }
        }
        let mut accepting = vec![false; n];
        for &a in acc {
            accepting[a] = true;
        }
        Dfa { nsym: tr.nsym, trans, accepting }.minimize()
    };
    match name {
        "eq" => Some(build(2, &[0], &|q, x, y| if q == 0 && x == y { 0 } else { 1 })),
        "lenEq" => Some(build(2, &[0], &|q, x, y| if q == 0 && x != pad && y != pad { 0 } else { 1 })),
        // 0 equal so far, 1 less, 2 greater, 3 first word ended, 4 sink
        "llex" => Some(build(5, &[0, 1, 3], &|q, x, y| match q {
            0..=2 if x != pad && y != pad => {
                if q != 0 {
                    q
                } else if x < y {
                    1
                } else if x > y {
                    2
                } else {
                    0
                }
            }
            0..=3 if x == pad && y != pad => 3,
            _ => 4,
        })),
        // 0 equal so far, 1 first word ended, 2 sink
        "pf" => Some(build(3, &[0, 1], &|q, x, y| match q {
            0 if x != pad && x == y => 0,
            0 | 1 if x == pad => 1,
            _ => 2,
        })),
        _ => None,
    }
}

/// A relation of fixed arity whose acceptor reads convolutions over the padded alphabet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegularRelation {
    arity: usize,
    base: Alphabet,
    acceptor: Automaton,
}

impl RegularRelation {
    /// Validates alphabet and convolution shape.
    pub fn new(arity: usize, base: Alphabet, acceptor: Automaton) -> Result<Self> {
        if arity == 0 {
            return Err(Error::ArityMismatch { expected: 1, got: 0 });
        }
        let pa = PaddedAlphabet::new(base.clone(), arity);
        if *acceptor.alphabet() != pa.alphabet() {
            return Err(Error::AlphabetMismatch);
        }
        let v = validity_dfa(base.len(), arity);
        if !v.includes(&acceptor.to_dfa()) {
            return Err(Error::InvalidConvolution("acceptor accepts an invalid convolution".into()));
        }
        Ok(RegularRelation { arity, base, acceptor })
    }

    /// Trusted constructor from an engine DFA that accepts only valid convolutions.
    pub(crate) fn from_dfa(arity: usize, base: Alphabet, d: &Dfa) -> Self {
        let pa = PaddedAlphabet::new(base.clone(), arity);
        RegularRelation { arity, acceptor: Automaton::from_dfa(pa.alphabet(), &d.minimize(), true), base }
    }

    pub(crate) fn dfa(&self) -> Dfa {
        self.acceptor.to_dfa()
    }

    pub(crate) fn tracks(&self) -> Tracks {
        Tracks::new(self.base.len(), self.arity)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn base(&self) -> &Alphabet {
        &self.base
    }

    pub fn acceptor(&self) -> &Automaton {
        &self.acceptor
    }

    pub fn padded(&self) -> PaddedAlphabet {
        PaddedAlphabet::new(self.base.clone(), self.arity)
    }

    /// Builtin `eq`, `llex`, `lenEq` or `pf` (prefix order) over `base`.
    pub fn builtin(base: &Alphabet, name: &str) -> Result<Self> {
        let d = builtin_dfa(name, base.len()).ok_or_else(|| Error::UnknownRelation(name.to_string()))?;
        Ok(RegularRelation::from_dfa(2, base.clone(), &d))
    }

    /// Relation given by a regular expression over the padded alphabet; invalid convolutions are cut away.
    pub fn from_regex(base: &Alphabet, arity: usize, text: &str) -> Result<Self> {
        let pa = PaddedAlphabet::new(base.clone(), arity);
        let a = Automaton::from_regex(pa.alphabet(), text)?;
        let d = a.to_dfa().intersect(&validity_dfa(base.len(), arity));
        Ok(RegularRelation::from_dfa(arity, base.clone(), &d))
    }

    /// Finite relation listing its tuples.
    pub fn from_tuples(base: &Alphabet, arity: usize, tuples: &[Vec<Word>]) -> Result<Self> {
        let pa = PaddedAlphabet::new(base.clone(), arity);
        let words = tuples.iter().map(|t| convolve(&pa, t)).collect::<Result<Vec<_>>>()?;
        Ok(RegularRelation::from_dfa(arity, base.clone(), &Dfa::from_words(pa.len(), &words)))
    }

    pub fn empty(base: &Alphabet, arity: usize) -> Self {
        RegularRelation::from_dfa(arity, base.clone(), &Dfa::empty(PaddedAlphabet::new(base.clone(), arity).len()))
    }

    pub fn contains(&self, tuple: &[Word]) -> Result<bool> {
        let w = convolve(&self.padded(), tuple)?;
        self.acceptor.accepts(&w)
    }

    pub fn is_empty(&self) -> bool {
        self.acceptor.is_empty()
    }

    pub fn equivalent(&self, other: &RegularRelation) -> Result<bool> {
        if self.arity != other.arity || self.base != other.base {
            return Err(Error::AlphabetMismatch);
        }
        Ok(self.dfa().equivalent(&other.dfa()))
    }

    /// All tuples whose convolution has length ≤ n, in length-lexicographic order of convolutions.
    pub fn tuples_upto(&self, n: usize) -> Vec<Vec<Word>> {
        let pa = self.padded();
        self.dfa().enumerate(n).iter().map(|w| deconvolve(&pa, w).expect("valid convolution")).collect()
    }

    pub fn intersect(&self, other: &RegularRelation) -> Result<Self> {
        if self.arity != other.arity || self.base != other.base {
            return Err(Error::AlphabetMismatch);
        }
        Ok(RegularRelation::from_dfa(self.arity, self.base.clone(), &self.dfa().intersect(&other.dfa())))
    }

    pub fn union(&self, other: &RegularRelation) -> Result<Self> {
        if self.arity != other.arity || self.base != other.base {
            return Err(Error::AlphabetMismatch);
        }
        Ok(RegularRelation::from_dfa(self.arity, self.base.clone(), &self.dfa().union(&other.dfa())))
    }

    /// Reorders (or duplicates) tracks: track i of the result is track `order[i]` of `self`.
    /// Only permutations are accepted.
    pub fn permute(&self, order: &[usize]) -> Result<Self> {
        let mut seen = order.to_vec();
        seen.sort_unstable();
        if seen != (0..self.arity).collect::<Vec<_>>() {
            return Err(Error::InvalidParameter("not a permutation of the tracks".into()));
        }
        // self's track order[i] goes to result track i
        let mut f = vec![0; self.arity];
        for (i, &o) in order.iter().enumerate() {
            f[o] = i;
        }
        let tr = self.tracks();
        let d = remap(&self.dfa(), &tr, &tr, &f).intersect(&validity_dfa(self.base.len(), self.arity));
        Ok(RegularRelation::from_dfa(self.arity, self.base.clone(), &d))
    }

    /// Places the relation's tracks at positions `f` among `n` tracks; the others are arbitrary words.
    pub fn cylindrify(&self, n: usize, f: &[usize]) -> Result<Self> {
        if f.len() != self.arity || f.iter().any(|&t| t >= n) {
            return Err(Error::ArityMismatch { expected: self.arity, got: f.len() });
        }
        let dst = Tracks::new(self.base.len(), n);
        let d = remap(&self.dfa(), &self.tracks(), &dst, f).intersect(&validity_dfa(self.base.len(), n));
        Ok(RegularRelation::from_dfa(n, self.base.clone(), &d))
    }

    /// Drops one track existentially; the result accepts canonical convolutions of the remaining tracks.
    pub fn project(&self, track: usize) -> Result<Self> {
        if self.arity < 2 {
            return Err(Error::ArityMismatch { expected: 2, got: self.arity });
        }
        if track >= self.arity {
            return Err(Error::InvalidParameter(format!("track {track} out of range")));
        }
        let keep: Vec<usize> = (0..self.arity).filter(|&t| t != track).collect();
        let d = project(&self.dfa(), &self.tracks(), &keep);
        Ok(RegularRelation::from_dfa(self.arity - 1, self.base.clone(), &d))
    }

    /// Relational composition of `self` read as k|m with `s` read as m|l.
    pub fn compose(&self, k: usize, s: &RegularRelation) -> Result<Self> {
        if self.base != s.base {
            return Err(Error::AlphabetMismatch);
        }
        if k > self.arity {
            return Err(Error::ArityMismatch { expected: self.arity, got: k });
        }
        let m = self.arity - k;
        if m > s.arity {
            return Err(Error::ArityMismatch { expected: m, got: s.arity });
        }
        let l = s.arity - m;
        if k + l == 0 {
            return Err(Error::ArityMismatch { expected: 1, got: 0 });
        }
        let total = k + m + l;
        let b = self.base.len();
        let all = Tracks::new(b, total);
        let f1: Vec<usize> = (0..k + m).collect();
        let f2: Vec<usize> = (k..total).collect();
        let d = remap(&self.dfa(), &self.tracks(), &all, &f1)
            .intersect(&remap(&s.dfa(), &s.tracks(), &all, &f2))
            .intersect(&validity_dfa(b, total));
        let keep: Vec<usize> = (0..k).chain(k + m..total).collect();
        Ok(RegularRelation::from_dfa(k + l, self.base.clone(), &project(&d, &all, &keep)))
    }

    /// {ȳ : ∃x̄ ∈ L, (x̄,ȳ) ∈ self} for the split k|m. `language` is over the k-track padded alphabet
    /// (for k = 1 the base alphabet is accepted too). The result is over the base alphabet when m = 1
    /// and over the m-track padded alphabet otherwise.
    pub fn image(&self, k: usize, language: &Automaton) -> Result<Automaton> {
        if k == 0 || k >= self.arity {
            return Err(Error::ArityMismatch { expected: self.arity - 1, got: k });
        }
        let m = self.arity - k;
        let in_pa = PaddedAlphabet::new(self.base.clone(), k);
        if *language.alphabet() != in_pa.alphabet() && !(k == 1 && *language.alphabet() == self.base) {
            return Err(Error::AlphabetMismatch);
        }
        let b = self.base.len();
        let lang = language.to_dfa().intersect(&validity_dfa(b, k));
        let tr = self.tracks();
        let f: Vec<usize> = (0..k).collect();
        let d = self.dfa().intersect(&remap(&lang, &Tracks::new(b, k), &tr, &f));
        let keep: Vec<usize> = (k..self.arity).collect();
        let out = project(&d, &tr, &keep);
        let alphabet = if m == 1 { self.base.clone() } else { PaddedAlphabet::new(self.base.clone(), m).alphabet() };
        Ok(Automaton::from_dfa(alphabet, &out, true))
    }

    /// True iff every tuple on the first k tracks has finitely many partners on the rest.
    pub fn is_finite_outdegree(&self, k: usize) -> bool {
        let fixed: Vec<usize> = (0..k.min(self.arity)).collect();
        finitely_many_partners(&self.dfa().minimize(), &self.tracks(), &fixed)
    }

    /// A constant κ with ‖ā‖ ≤ ‖c̄‖ + κ for all (ā, c̄) in the relation read as k|m.
    /// Requires every c̄ to have finitely many partners ā; κ is the size of the trim acceptor.
    pub fn length_increase_constant(&self, k: usize) -> Result<usize> {
        let fixed: Vec<usize> = (k.min(self.arity)..self.arity).collect();
        let d = self.dfa().minimize();
        if !finitely_many_partners(&d, &self.tracks(), &fixed) {
            return Err(Error::InfiniteOutdegree);
        }
        Ok(d.useful_states().iter().filter(|&&u| u).count())
    }

    pub fn to_json_value(&self) -> Value {
        json!({"arity": self.arity, "base": self.base.to_json(), "acceptor": self.acceptor.to_json_value()})
    }

    pub fn to_json(&self) -> String {
        self.to_json_value().to_string()
    }

    pub fn from_json_value(v: &Value) -> Result<Self> {
        let arity = v.get("arity").and_then(Value::as_u64).ok_or_else(|| Error::Json("missing arity".into()))?;
        let base = Alphabet::from_json(v.get("base").ok_or_else(|| Error::Json("missing base".into()))?)?;
        let acceptor =
            Automaton::from_json_value(v.get("acceptor").ok_or_else(|| Error::Json("missing acceptor".into()))?)?;
        RegularRelation::new(arity as usize, base, acceptor)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        RegularRelation::from_json_value(&serde_json::from_str(text)?)
    }
}

/// Acceptor of exactly the valid convolutions of n-tuples.
pub fn validity_automaton(base: &Alphabet, n: usize) -> Result<Automaton> {
    if n == 0 {
        return Err(Error::ArityMismatch { expected: 1, got: 0 });
    }
    let pa = PaddedAlphabet::new(base.clone(), n);
    Ok(Automaton::from_dfa(pa.alphabet(), &validity_dfa(base.len(), n), true))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abc() -> Alphabet {
        Alphabet::from_tokens(["a", "b", "c"]).unwrap()
    }

    #[test]
    fn convolution_example() {
        let pa = PaddedAlphabet::new(abc(), 2);
        let w = convolve(&pa, &[vec![0, 1], vec![2]]).unwrap();
        assert_eq!(pa.decode(w[0]), vec![Some(0), Some(2)]);
        assert_eq!(pa.decode(w[1]), vec![Some(1), None]);
        assert_eq!(convolve(&pa, &[vec![], vec![]]).unwrap(), Vec::<u32>::new());
        let pa3 = PaddedAlphabet::new(abc(), 3);
        let t = vec![vec![0, 0], vec![1], vec![2, 2, 2]];
        assert_eq!(deconvolve(&pa3, &convolve(&pa3, &t).unwrap()).unwrap(), t);
    }

    #[test]
    fn padded_indexing() {
        let pa = PaddedAlphabet::new(Alphabet::from_tokens(["0", "1"]).unwrap(), 2);
        assert_eq!(pa.len(), 8);
        assert_eq!(pa.encode(&[Some(0), Some(0)]), Some(0));
        assert_eq!(pa.encode(&[None, Some(1)]), Some(7));
        assert_eq!(pa.encode(&[None, None]), None);
        assert_eq!(pa.alphabet().symbol(5).to_string(), "[1,_]");
    }

    #[test]
    fn deconvolve_rejects_resumed_track() {
        let pa = PaddedAlphabet::new(Alphabet::from_tokens(["a"]).unwrap(), 2);
        let w = vec![pa.encode(&[Some(0), None]).unwrap(), pa.encode(&[None, Some(0)]).unwrap()];
        assert!(deconvolve(&pa, &w).is_err());
        let v = validity_automaton(pa.base(), 2).unwrap();
        assert!(!v.accepts(&w).unwrap());
    }

    #[test]
    fn builtins() {
        let ab = Alphabet::from_tokens(["a", "b"]).unwrap();
        let llex = RegularRelation::builtin(&ab, "llex").unwrap();
        let w = |s: &str| ab.parse_word(s).unwrap();
        assert!(llex.contains(&[w("b"), w("aa")]).unwrap());
        assert!(!llex.contains(&[w("ab"), w("aa")]).unwrap());
        assert!(llex.contains(&[w("ab"), w("ab")]).unwrap());
        let pf = RegularRelation::builtin(&ab, "pf").unwrap();
        assert!(pf.contains(&[w("ab"), w("abb")]).unwrap());
        assert!(!pf.contains(&[w("b"), w("abb")]).unwrap());
    }
}
