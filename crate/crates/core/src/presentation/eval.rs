//! Formula evaluation by automata.
//!
//! Every subformula is compiled to a DFA over the convolution of its free variables (sorted by name).
//! Intermediate automata are exact only on tuples of domain elements; the domain is imposed on a
//! track right before it is quantified away and on all tracks of the final answer.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use num_bigint::BigUint;

use super::Presentation;
use crate::automata::{Alphabet, Automaton, Dfa, Word};
use crate::count::Cardinal;
use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::relations::{self, RegularRelation, Tracks};

#[derive(Clone, Debug)]
pub struct EvalOptions {
    /// Report assignments with infinitely many witnesses under `Emod` as an error instead of
    /// silently treating the quantifier as false there.
    pub strict_counting: bool,
    /// State budget for the counting construction.
    pub count_budget: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { strict_counting: false, count_budget: 200_000 }
    }
}

/// Free variables (in order of first occurrence) and the relation they satisfy.
#[derive(Clone, Debug)]
pub struct EvalResult {
    pub vars: Vec<String>,
    pub relation: RegularRelation,
}

struct Rel {
    vars: Vec<String>,
    d: Dfa,
}

pub(crate) struct Evaluator<'p> {
    p: &'p Presentation,
    b: usize,
    dom: Dfa,
    opts: EvalOptions,
    tracks: RefCell<HashMap<usize, Rc<Tracks>>>,
    track_dom: RefCell<HashMap<(usize, usize), Rc<Dfa>>>,
    rels: RefCell<HashMap<String, Rc<(usize, Dfa)>>>,
}

impl<'p> Evaluator<'p> {
    pub fn new(p: &'p Presentation, opts: EvalOptions) -> Self {
        Evaluator {
            p,
            b: p.base().len(),
            dom: p.domain().to_dfa().minimize(),
            opts,
            tracks: RefCell::new(HashMap::new()),
            track_dom: RefCell::new(HashMap::new()),
            rels: RefCell::new(HashMap::new()),
        }
    }

    fn tr(&self, n: usize) -> Rc<Tracks> {
        self.tracks.borrow_mut().entry(n).or_insert_with(|| Rc::new(Tracks::new(self.b, n))).clone()
    }

    fn tdom(&self, n: usize, t: usize) -> Rc<Dfa> {
        if let Some(d) = self.track_dom.borrow().get(&(n, t)) {
            return d.clone();
        }
        let d = Rc::new(relations::track_domain(&self.dom, &self.tr(n), t));
        self.track_dom.borrow_mut().insert((n, t), d.clone());
        d
    }

    fn rel(&self, name: &str) -> Result<Rc<(usize, Dfa)>> {
        if let Some(r) = self.rels.borrow().get(name) {
            return Ok(r.clone());
        }
        let (n, d) = self.p.relation_dfa(name)?;
        let r = Rc::new((n, d.minimize()));
        self.rels.borrow_mut().insert(name.to_string(), r.clone());
        Ok(r)
    }

    /// Domain tuples over `n` tracks.
    pub fn cylinder(&self, n: usize) -> Dfa {
        let mut acc = Dfa::universal(self.tr(n).nsym);
        for t in 0..n {
            acc = acc.intersect(&self.tdom(n, t));
        }
        acc
    }

    /// Re-reads `r` over the variable list `vars` (a superset of `r.vars`, any order).
    fn lift(&self, r: &Rel, vars: &[String]) -> Dfa {
        if r.vars == vars {
            return r.d.clone();
        }
        let f: Vec<usize> = r.vars.iter().map(|v| vars.iter().position(|w| w == v).expect("superset")).collect();
        relations::remap(&r.d, &self.tr(r.vars.len()), &self.tr(vars.len()), &f)
    }

    fn combine(&self, a: Rel, b: Rel, op: impl Fn(bool, bool) -> bool) -> Rel {
        let mut vars = a.vars.clone();
        for v in &b.vars {
            if !vars.contains(v) {
                vars.push(v.clone());
            }
        }
        vars.sort();
        let da = self.lift(&a, &vars);
        let db = self.lift(&b, &vars);
        Rel { d: da.product(&db, op).minimize(), vars }
    }

    fn domain_finite_size(&self) -> Option<BigUint> {
        if !self.dom.is_finite() {
            return None;
        }
        Some(self.dom.count_by_length(self.dom.n()).into_iter().sum())
    }

    fn eval(&self, f: &Formula) -> Result<Rel> {
        Ok(match f {
            Formula::True => Rel { vars: vec![], d: Dfa::universal(0) },
            Formula::False => Rel { vars: vec![], d: Dfa::empty(0) },
            Formula::Atom(name, args) => {
                let r = self.rel(name)?;
                if r.0 != args.len() {
                    return Err(Error::ArityMismatch { expected: r.0, got: args.len() });
                }
                self.atom(&r.1, args)
            }
            Formula::Eq(x, y) => {
                if x == y {
                    Rel { vars: vec![x.clone()], d: Dfa::universal(self.tr(1).nsym) }
                } else {
                    let r = self.rel("eq")?;
                    self.atom(&r.1, &[x.clone(), y.clone()])
                }
            }
            Formula::Not(g) => {
                let r = self.eval(g)?;
                Rel { d: r.d.complement(), vars: r.vars }
            }
            Formula::And(a, b) => self.combine(self.eval(a)?, self.eval(b)?, |x, y| x && y),
            Formula::Or(a, b) => self.combine(self.eval(a)?, self.eval(b)?, |x, y| x || y),
            Formula::Implies(a, b) => self.combine(self.eval(a)?, self.eval(b)?, |x, y| !x || y),
            Formula::Exists(x, g) => {
                let r = self.eval(g)?;
                self.exists(r, x)
            }
            Formula::Forall(x, g) => {
                let r = self.eval(g)?;
                let neg = Rel { d: r.d.complement(), vars: r.vars };
                let e = self.exists(neg, x);
                Rel { d: e.d.complement(), vars: e.vars }
            }
            Formula::ExistsInf(y, g) => {
                let r = self.eval(g)?;
                self.exists_inf(r, y)
            }
            Formula::ExistsMod(k, m, y, g) => {
                let r = self.eval(g)?;
                self.exists_mod(r, y, *k, *m)?
            }
        })
    }

    fn atom(&self, d: &Dfa, args: &[String]) -> Rel {
        let mut vars: Vec<String> = args.to_vec();
        vars.sort();
        vars.dedup();
        let f: Vec<usize> = args.iter().map(|a| vars.iter().position(|v| v == a).unwrap()).collect();
        let d = relations::remap(d, &self.tr(args.len()), &self.tr(vars.len()), &f);
        Rel { vars, d }
    }

    fn restricted(&self, r: &Rel, i: usize) -> Dfa {
        r.d.intersect(&self.tdom(r.vars.len(), i))
    }

    fn exists(&self, r: Rel, x: &str) -> Rel {
        let Some(i) = r.vars.iter().position(|v| v == x) else {
            return r;
        };
        let n = r.vars.len();
        let d = self.restricted(&r, i);
        let keep: Vec<usize> = (0..n).filter(|&t| t != i).collect();
        let vars = keep.iter().map(|&t| r.vars[t].clone()).collect();
        Rel { d: relations::project(&d, &self.tr(n), &keep), vars }
    }

    /// Letters whose tracks other than `i` are all padding.
    fn tail_letters(tr: &Tracks, i: usize) -> Vec<bool> {
        (0..tr.nsym).map(|s| (0..tr.n).all(|t| t == i || tr.is_pad(s, t))).collect()
    }

    fn exists_inf(&self, r: Rel, y: &str) -> Rel {
        let Some(i) = r.vars.iter().position(|v| v == y) else {
            return if self.dom.is_finite() { Rel { d: Dfa::empty(r.d.nsym), vars: r.vars } } else { r };
        };
        let d = self.restricted(&r, i);
        self.long_witness(&d, &r.vars, i)
    }

    /// Tuples having a witness on track i longer than every other track by more than |Q|.
    fn long_witness(&self, d: &Dfa, vars: &[String], i: usize) -> Rel {
        let n = vars.len();
        let tr = self.tr(n);
        let q = d.n();
        let cap = q + 1;
        let width = cap + 1;
        let tail = Self::tail_letters(&tr, i);
        let mut trans = vec![0u32; q * width * tr.nsym];
        let mut accepting = vec![false; q * width];
        for st in 0..q {
            for c in 0..width {
                let id = st * width + c;
                accepting[id] = d.accepting[st] && c == cap;
                for s in 0..tr.nsym {
                    let c2 = if tail[s] { (c + 1).min(cap) } else { 0 };
                    trans[id * tr.nsym + s] = (d.step(st, s) * width + c2) as u32;
                }
            }
        }
        let counter = Dfa { nsym: tr.nsym, trans, accepting };
        let keep: Vec<usize> = (0..n).filter(|&t| t != i).collect();
        let out_vars = keep.iter().map(|&t| vars[t].clone()).collect();
        Rel { d: relations::project(&counter, &tr, &keep), vars: out_vars }
    }

    fn exists_mod(&self, r: Rel, y: &str, k: u64, m: u64) -> Result<Rel> {
        if m == 0 || k >= m || m > u32::MAX as u64 {
            return Err(Error::IllFormed(format!("Emod {k},{m}")));
        }
        let Some(i) = r.vars.iter().position(|v| v == y) else {
            // the witness count is |domain| where r holds and 0 elsewhere
            let zero_ok = k == 0;
            let holds_ok = match self.domain_finite_size() {
                Some(size) => (size % m) == BigUint::from(k),
                None => {
                    if self.opts.strict_counting {
                        let sat = r.d.intersect(&self.cylinder(r.vars.len()));
                        if !sat.is_empty() {
                            return Err(Error::InfiniteSection);
                        }
                    }
                    false
                }
            };
            let d = r.d.product(&r.d, |a, _| if a { holds_ok } else { zero_ok });
            return Ok(Rel { d: d.minimize(), vars: r.vars });
        };
        let n = r.vars.len();
        let d = self.restricted(&r, i).minimize();
        let inf = self.long_witness(&d, &r.vars, i);
        if self.opts.strict_counting {
            let bad = inf.d.intersect(&self.cylinder(n - 1));
            if !bad.is_empty() {
                return Err(Error::InfiniteSection);
            }
        }
        let counted = self.count_mod(&d, n, i, k, m as u32)?;
        let vars: Vec<String> = r.vars.iter().enumerate().filter(|&(t, _)| t != i).map(|(_, v)| v.clone()).collect();
        let dd = counted.product(&inf.d, |a, b| a && !b).minimize();
        Ok(Rel { d: dd, vars })
    }

    /// Automaton over the tracks other than `i` whose state is the vector of witness-path counts
    /// modulo m, indexed by (state of `d`, witness ended).
    fn count_mod(&self, d: &Dfa, n: usize, i: usize, k: u64, m: u32) -> Result<Dfa> {
        let tr = self.tr(n);
        let xt = self.tr(n - 1);
        let b = self.b;
        let q = d.n();
        // full letter for an x-letter and a witness digit
        let full = |xs: usize, c: usize| -> usize {
            let ds = (0..n).map(|t| {
                if t == i {
                    c
                } else {
                    xt.digit(xs, if t < i { t } else { t - 1 })
                }
            });
            tr.encode(ds).expect("x-letter is not all padding")
        };
        let tail: Vec<usize> = (0..b)
            .map(|c| tr.encode((0..n).map(|t| if t == i { c } else { b })).expect("witness digit"))
            .collect();
        let tails = tail_counts(d, &tail, m);
        // sparse moves per x-letter: (source slot, target slot)
        let mut moves: Vec<Vec<(u32, u32)>> = Vec::with_capacity(xt.nsym);
        for xs in 0..xt.nsym {
            let mut mv = Vec::new();
            for st in 0..q {
                for c in 0..b {
                    mv.push(((2 * st) as u32, (2 * d.step(st, full(xs, c))) as u32));
                }
                let pad = full(xs, b);
                mv.push(((2 * st) as u32, (2 * d.step(st, pad) + 1) as u32));
                mv.push(((2 * st + 1) as u32, (2 * d.step(st, pad) + 1) as u32));
            }
            moves.push(mv);
        }
        let mut start = vec![0u32; 2 * q];
        start[0] = 1 % m;
        let mut index: HashMap<Vec<u32>, u32> = HashMap::new();
        let mut vecs: Vec<Vec<u32>> = vec![start.clone()];
        index.insert(start, 0);
        let mut trans: Vec<u32> = Vec::new();
        let mut at = 0;
        while at < vecs.len() {
            for mv in &moves {
                let mut nv = vec![0u32; 2 * q];
                let cur = &vecs[at];
                for &(s, t) in mv {
                    let x = cur[s as usize];
                    if x != 0 {
                        let slot = &mut nv[t as usize];
                        *slot = ((*slot as u64 + x as u64) % m as u64) as u32;
                    }
                }
                let id = match index.get(&nv) {
                    Some(&id) => id,
                    None => {
                        let id = vecs.len() as u32;
                        if vecs.len() >= self.opts.count_budget {
                            return Err(Error::CountingBudget(self.opts.count_budget));
                        }
                        index.insert(nv.clone(), id);
                        vecs.push(nv);
                        id
                    }
                };
                trans.push(id);
            }
            at += 1;
        }
        let accepting = vecs
            .iter()
            .map(|v| {
                let mut total = 0u64;
                for st in 0..q {
                    if d.accepting[st] {
                        total += v[2 * st] as u64 + v[2 * st + 1] as u64;
                    }
                    total += v[2 * st] as u64 * tails[st] as u64;
                    total %= m as u64;
                }
                total == k
            })
            .collect();
        Ok(Dfa { nsym: xt.nsym, trans, accepting }.minimize())
    }
}

/// Number (mod m) of nonempty continuations through `tail` letters ending in acceptance;
/// states with infinitely many continuations get 0.
fn tail_counts(d: &Dfa, tail: &[usize], m: u32) -> Vec<u32> {
    let q = d.n();
    // useful: can reach acceptance through tail letters
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); q];
    for st in 0..q {
        for &s in tail {
            preds[d.step(st, s)].push(st);
        }
    }
    let mut useful = d.accepting.clone();
    let mut stack: Vec<usize> = (0..q).filter(|&s| useful[s]).collect();
    while let Some(s) = stack.pop() {
        for &p in &preds[s] {
            if !useful[p] {
                useful[p] = true;
                stack.push(p);
            }
        }
    }
    // memoised DFS; a state on a cycle (or reaching one) has infinitely many continuations
    const UNSEEN: u8 = 0;
    const ACTIVE: u8 = 1;
    const DONE: u8 = 2;
    let mut mark = vec![UNSEEN; q];
    let mut infinite = vec![false; q];
    let mut star = vec![0u64; q]; // continuations including the empty one
    for root in 0..q {
        if !useful[root] || mark[root] != UNSEEN {
            continue;
        }
        let mut st: Vec<(usize, usize)> = vec![(root, 0)];
        mark[root] = ACTIVE;
        while let Some(top) = st.last_mut() {
            let (u, j) = *top;
            if j == tail.len() {
                let mut total = d.accepting[u] as u64;
                let mut inf = false;
                for &s in tail {
                    let v = d.step(u, s);
                    if useful[v] {
                        inf |= infinite[v];
                        total = (total + star[v]) % m as u64;
                    }
                }
                infinite[u] |= inf;
                star[u] = total;
                mark[u] = DONE;
                st.pop();
                continue;
            }
            top.1 += 1;
            let v = d.step(u, tail[j]);
            if !useful[v] {
                continue;
            }
            match mark[v] {
                UNSEEN => {
                    mark[v] = ACTIVE;
                    st.push((v, 0));
                }
                ACTIVE => infinite[u] = true,
                _ => {}
            }
        }
    }
    (0..q)
        .map(|s| {
            if !useful[s] || infinite[s] {
                0
            } else {
                ((star[s] + m as u64 - d.accepting[s] as u64 % m as u64) % m as u64) as u32
            }
        })
        .collect()
}

/// Evaluates φ; the answer's tracks follow the free variables in order of first occurrence.
pub fn eval(p: &Presentation, phi: &Formula) -> Result<EvalResult> {
    let vars = phi.free_vars();
    if vars.is_empty() {
        return Err(Error::IllFormed("formula has no free variables; use decide".into()));
    }
    let relation = eval_with(p, phi, &vars, &EvalOptions::default())?;
    Ok(EvalResult { vars, relation })
}

/// Evaluates φ with an explicit track order; `vars` must contain every free variable, once.
pub fn eval_with(p: &Presentation, phi: &Formula, vars: &[String], opts: &EvalOptions) -> Result<RegularRelation> {
    phi.check_well_named()?;
    if vars.is_empty() {
        return Err(Error::IllFormed("at least one variable is needed".into()));
    }
    let mut sorted = vars.to_vec();
    sorted.sort();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::IllFormed("duplicate variable".into()));
    }
    for v in phi.free_vars() {
        if !vars.contains(&v) {
            return Err(Error::IllFormed(format!("free variable `{v}` not listed")));
        }
    }
    let ev = Evaluator::new(p, opts.clone());
    let r = ev.eval(phi)?;
    let d = ev.lift(&r, vars).intersect(&ev.cylinder(vars.len()));
    Ok(RegularRelation::from_dfa(vars.len(), p.base().clone(), &d))
}

pub fn decide(p: &Presentation, sigma: &Formula) -> Result<bool> {
    decide_with(p, sigma, &EvalOptions::default())
}

pub fn decide_with(p: &Presentation, sigma: &Formula, opts: &EvalOptions) -> Result<bool> {
    sigma.check_well_named()?;
    let free = sigma.free_vars();
    if !free.is_empty() {
        return Err(Error::IllFormed(format!("not a sentence: `{}` is free", free[0])));
    }
    let ev = Evaluator::new(p, opts.clone());
    let r = ev.eval(sigma)?;
    debug_assert!(r.vars.is_empty());
    Ok(r.d.accepting[0])
}

/// The witness set {y : φ(ā, y)} for a fixed assignment of the other free variables,
/// as an automaton over the base alphabet.
pub fn section(p: &Presentation, phi: &Formula, y: &str, assignment: &[(String, Word)]) -> Result<Automaton> {
    phi.check_well_named()?;
    let mut vars: Vec<String> = assignment.iter().map(|(v, _)| v.clone()).collect();
    if vars.iter().any(|v| v == y) {
        return Err(Error::IllFormed(format!("`{y}` is both assigned and counted")));
    }
    vars.push(y.to_string());
    for v in phi.free_vars() {
        if !vars.contains(&v) {
            return Err(Error::IllFormed(format!("free variable `{v}` has no value")));
        }
    }
    for (_, w) in assignment {
        if !p.domain().accepts(w)? {
            return Ok(Automaton::empty(p.base().clone()));
        }
    }
    let ev = Evaluator::new(p, EvalOptions::default());
    let r = ev.eval(phi)?;
    let n = vars.len();
    let d = ev.lift(&r, &vars);
    let d = d.intersect(&ev.tdom(n, n - 1));
    let fixed: Dfa = if n > 1 {
        let words: Vec<Word> = assignment.iter().map(|(_, w)| w.clone()).collect();
        let pa = p.padded(n - 1);
        let conv = relations::convolve(&pa, &words)?;
        let point = Dfa::from_words(pa.len(), &[conv]);
        relations::remap(&point, &ev.tr(n - 1), &ev.tr(n), &(0..n - 1).collect::<Vec<_>>())
    } else {
        Dfa::universal(ev.tr(1).nsym)
    };
    let d = d.intersect(&fixed);
    let out = relations::project(&d, &ev.tr(n), &[n - 1]);
    let base: Alphabet = p.base().clone();
    Ok(Automaton::from_dfa(base, &out, true))
}

/// Exact number of witnesses y for a fixed assignment (ω when infinite).
pub fn count_witnesses(p: &Presentation, phi: &Formula, y: &str, assignment: &[(String, Word)]) -> Result<Cardinal> {
    let a = section(p, phi, y, assignment)?;
    let d = a.to_dfa();
    if !d.is_finite() {
        return Ok(Cardinal::Omega);
    }
    Ok(Cardinal::Finite(d.count_by_length(d.n()).into_iter().sum()))
}
