//! Dense complete DFAs over symbol indices `0..nsym`, initial state 0.
//! This is the engine behind every public automaton operation.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::Zero;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) struct Dfa {
    pub nsym: usize,
    pub trans: Vec<u32>,
    pub accepting: Vec<bool>,
}

impl Dfa {
    pub fn empty(nsym: usize) -> Dfa {
        Dfa { nsym, trans: vec![0; nsym], accepting: vec![false] }
    }

    pub fn universal(nsym: usize) -> Dfa {
        Dfa { nsym, trans: vec![0; nsym], accepting: vec![true] }
    }

    pub fn n(&self) -> usize {
        self.accepting.len()
    }

    #[inline]
    pub fn step(&self, q: usize, a: usize) -> usize {
        self.trans[q * self.nsym + a] as usize
    }

    #[inline]
    pub fn row(&self, q: usize) -> &[u32] {
        &self.trans[q * self.nsym..(q + 1) * self.nsym]
    }

    #[cfg(test)]
    pub fn run(&self, w: &[u32]) -> usize {
        self.run_from(0, w)
    }

    pub fn run_from(&self, q: usize, w: &[u32]) -> usize {
        w.iter().fold(q, |q, &a| self.step(q, a as usize))
    }

    #[cfg(test)]
    pub fn accepts(&self, w: &[u32]) -> bool {
        self.accepting[self.run(w)]
    }

    pub fn complement(&self) -> Dfa {
        Dfa { nsym: self.nsym, trans: self.trans.clone(), accepting: self.accepting.iter().map(|b| !b).collect() }
    }

    pub fn product(&self, other: &Dfa, op: impl Fn(bool, bool) -> bool) -> Dfa {
        assert_eq!(self.nsym, other.nsym, "product of DFAs over different alphabets");
        let nsym = self.nsym;
        let mut index: HashMap<(u32, u32), u32> = HashMap::new();
        let mut pairs: Vec<(u32, u32)> = vec![(0, 0)];
        index.insert((0, 0), 0);
        let mut trans = Vec::new();
        let mut i = 0;
        while i < pairs.len() {
            let (p, q) = pairs[i];
            for a in 0..nsym {
                let key = (self.trans[p as usize * nsym + a], other.trans[q as usize * nsym + a]);
                let id = *index.entry(key).or_insert_with(|| {
                    pairs.push(key);
                    (pairs.len() - 1) as u32
                });
                trans.push(id);
            }
            i += 1;
        }
        let accepting = pairs
            .iter()
            .map(|&(p, q)| op(self.accepting[p as usize], other.accepting[q as usize]))
            .collect();
        Dfa { nsym, trans, accepting }
    }

    pub fn intersect(&self, other: &Dfa) -> Dfa {
        self.product(other, |a, b| a && b).minimize()
    }

    pub fn union(&self, other: &Dfa) -> Dfa {
        self.product(other, |a, b| a || b).minimize()
    }

    pub fn difference(&self, other: &Dfa) -> Dfa {
        self.product(other, |a, b| a && !b).minimize()
    }

    pub fn reachable_states(&self) -> Vec<bool> {
        let mut seen = vec![false; self.n()];
        seen[0] = true;
        let mut stack = vec![0usize];
        while let Some(q) = stack.pop() {
            for &t in self.row(q) {
                if !seen[t as usize] {
                    seen[t as usize] = true;
                    stack.push(t as usize);
                }
            }
        }
        seen
    }

    pub fn coreachable_states(&self) -> Vec<bool> {
        let n = self.n();
        let mut preds: Vec<Vec<u32>> = vec![Vec::new(); n];
        for q in 0..n {
            for &t in self.row(q) {
                preds[t as usize].push(q as u32);
            }
        }
        let mut seen = self.accepting.clone();
        let mut stack: Vec<usize> = (0..n).filter(|&q| seen[q]).collect();
        while let Some(q) = stack.pop() {
            for &p in &preds[q] {
                if !seen[p as usize] {
                    seen[p as usize] = true;
                    stack.push(p as usize);
                }
            }
        }
        seen
    }

    /// States that are both reachable and co-reachable.
    pub fn useful_states(&self) -> Vec<bool> {
        let r = self.reachable_states();
        let c = self.coreachable_states();
        r.iter().zip(&c).map(|(a, b)| *a && *b).collect()
    }

    pub fn is_empty(&self) -> bool {
        let r = self.reachable_states();
        !r.iter().zip(&self.accepting).any(|(a, b)| *a && *b)
    }

    pub fn equivalent(&self, other: &Dfa) -> bool {
        self.product(other, |a, b| a != b).is_empty()
    }

    pub fn includes(&self, other: &Dfa) -> bool {
        other.product(self, |a, b| a && !b).is_empty()
    }

    /// A language is finite iff the useful part has no cycle.
    pub fn is_finite(&self) -> bool {
        let useful = self.useful_states();
        // iterative DFS colouring: 0 white, 1 grey, 2 black
        let mut colour = vec![0u8; self.n()];
        for start in 0..self.n() {
            if !useful[start] || colour[start] != 0 {
                continue;
            }
            let mut stack: Vec<(usize, usize)> = vec![(start, 0)];
            colour[start] = 1;
            while let Some(&mut (q, ref mut next)) = stack.last_mut() {
                if *next == self.nsym {
                    colour[q] = 2;
                    stack.pop();
                    continue;
                }
                let t = self.step(q, *next);
                *next += 1;
                if !useful[t] {
                    continue;
                }
                match colour[t] {
                    1 => return false,
                    0 => {
                        colour[t] = 1;
                        stack.push((t, 0));
                    }
                    _ => {}
                }
            }
        }
        true
    }

    /// Renumbers states in breadth-first order from the initial state, dropping unreachable ones.
    pub fn canonical(&self) -> Dfa {
        let n = self.n();
        let mut id = vec![u32::MAX; n];
        let mut order = vec![0usize];
        id[0] = 0;
        let mut i = 0;
        while i < order.len() {
            let q = order[i];
            for &t in self.row(q) {
                if id[t as usize] == u32::MAX {
                    id[t as usize] = order.len() as u32;
                    order.push(t as usize);
                }
            }
            i += 1;
        }
        let mut trans = Vec::with_capacity(order.len() * self.nsym);
        for &q in &order {
            trans.extend(self.row(q).iter().map(|&t| id[t as usize]));
        }
        let accepting = order.iter().map(|&q| self.accepting[q]).collect();
        Dfa { nsym: self.nsym, trans, accepting }
    }

    /// Moore partition refinement followed by canonical numbering.
    /// Two DFAs for the same language minimize to identical values.
    pub fn minimize(&self) -> Dfa {
        let d = self.canonical();
        let n = d.n();
        let nsym = d.nsym;
        let mut class: Vec<u32> = d.accepting.iter().map(|&a| a as u32).collect();
        let mut count = {
            let has_acc = d.accepting.iter().any(|&a| a);
            let has_rej = d.accepting.iter().any(|&a| !a);
            if !(has_acc && has_rej) {
                class.iter_mut().for_each(|c| *c = 0);
            }
            has_acc as usize + has_rej as usize
        };
        let width = nsym + 1;
        let mut sigs = vec![0u32; n * width];
        loop {
            for q in 0..n {
                let s = &mut sigs[q * width..(q + 1) * width];
                s[0] = class[q];
                for a in 0..nsym {
                    s[a + 1] = class[d.trans[q * nsym + a] as usize];
                }
            }
            let mut map: HashMap<&[u32], u32> = HashMap::with_capacity(n);
            let mut next = vec![0u32; n];
            for q in 0..n {
                let key = &sigs[q * width..(q + 1) * width];
                let len = map.len() as u32;
                next[q] = *map.entry(key).or_insert(len);
            }
            let new_count = map.len();
            drop(map);
            class = next;
            if new_count == count {
                break;
            }
            count = new_count;
        }
        let mut rep = vec![usize::MAX; count];
        for q in 0..n {
            if rep[class[q] as usize] == usize::MAX {
                rep[class[q] as usize] = q;
            }
        }
        let mut trans = Vec::with_capacity(count * nsym);
        for &q in &rep {
            trans.extend(d.row(q).iter().map(|&t| class[t as usize]));
        }
        let accepting = rep.iter().map(|&q| d.accepting[q]).collect();
        // class ids follow first occurrence, so the initial state is class 0
        Dfa { nsym, trans, accepting }.canonical()
    }

    /// Exact number of accepted words of each length 0..=n.
    pub fn count_by_length(&self, n: usize) -> Vec<BigUint> {
        let useful = self.useful_states();
        let states = self.n();
        let mut edges: Vec<Vec<(usize, u64)>> = vec![Vec::new(); states];
        for q in 0..states {
            if !useful[q] {
                continue;
            }
            let mut m: HashMap<usize, u64> = HashMap::new();
            for &t in self.row(q) {
                if useful[t as usize] {
                    *m.entry(t as usize).or_insert(0) += 1;
                }
            }
            let mut v: Vec<_> = m.into_iter().collect();
            v.sort_unstable();
            edges[q] = v;
        }
        let mut cur = vec![BigUint::zero(); states];
        if useful[0] {
            cur[0] = BigUint::from(1u32);
        }
        let mut out = Vec::with_capacity(n + 1);
        for len in 0..=n {
            let total: BigUint = (0..states).filter(|&q| self.accepting[q]).map(|q| &cur[q]).sum();
            out.push(total);
            if len == n {
                break;
            }
            let mut nxt = vec![BigUint::zero(); states];
            for q in 0..states {
                if cur[q].is_zero() {
                    continue;
                }
                for &(t, mult) in &edges[q] {
                    nxt[t] += &cur[q] * mult;
                }
            }
            cur = nxt;
        }
        out
    }

    /// All accepted words of length ≤ n in length-lexicographic order.
    pub fn enumerate(&self, n: usize) -> Vec<Vec<u32>> {
        let useful = self.useful_states();
        let mut out = Vec::new();
        if !useful[0] {
            return out;
        }
        let mut level: Vec<(Vec<u32>, usize)> = vec![(Vec::new(), 0)];
        for len in 0..=n {
            for (w, q) in &level {
                if self.accepting[*q] {
                    out.push(w.clone());
                }
            }
            if len == n {
                break;
            }
            let mut next = Vec::new();
            for (w, q) in &level {
                for a in 0..self.nsym {
                    let t = self.step(*q, a);
                    if useful[t] {
                        let mut w2 = w.clone();
                        w2.push(a as u32);
                        next.push((w2, t));
                    }
                }
            }
            level = next;
        }
        out
    }

    /// Builds a DFA from a finite set of words.
    pub fn from_words(nsym: usize, words: &[Vec<u32>]) -> Dfa {
        let mut nfa = Nfa::new(nsym);
        let start = nfa.add_state(false);
        nfa.initial.push(start);
        for w in words {
            let mut q = start;
            for &a in w {
                let t = nfa.add_state(false);
                nfa.add_edge(q, a, t);
                q = t;
            }
            nfa.accepting[q as usize] = true;
        }
        nfa.determinize().minimize()
    }
}

/// Nondeterministic automaton used as an intermediate form.
#[derive(Clone, Debug)]
pub(crate) struct Nfa {
    pub nsym: usize,
    pub initial: Vec<u32>,
    pub accepting: Vec<bool>,
    pub edges: Vec<Vec<(u32, u32)>>,
}

impl Nfa {
    pub fn new(nsym: usize) -> Nfa {
        Nfa { nsym, initial: Vec::new(), accepting: Vec::new(), edges: Vec::new() }
    }

    pub fn add_state(&mut self, accepting: bool) -> u32 {
        self.accepting.push(accepting);
        self.edges.push(Vec::new());
        (self.accepting.len() - 1) as u32
    }

    pub fn add_edge(&mut self, from: u32, sym: u32, to: u32) {
        self.edges[from as usize].push((sym, to));
    }

    /// Subset construction; the result is complete and contains only reachable subsets.
    pub fn determinize(&self) -> Dfa {
        let nsym = self.nsym;
        let mut start: Vec<u32> = self.initial.clone();
        start.sort_unstable();
        start.dedup();
        let mut index: HashMap<Vec<u32>, u32> = HashMap::new();
        let mut sets: Vec<Vec<u32>> = vec![start.clone()];
        index.insert(start, 0);
        let mut trans: Vec<u32> = Vec::new();
        let mut i = 0;
        let mut buf: Vec<(u32, u32)> = Vec::new();
        while i < sets.len() {
            buf.clear();
            for &q in &sets[i] {
                buf.extend_from_slice(&self.edges[q as usize]);
            }
            buf.sort_unstable();
            buf.dedup();
            let mut row = vec![u32::MAX; nsym];
            let mut j = 0;
            while j < buf.len() {
                let a = buf[j].0;
                let mut k = j;
                let mut target = Vec::new();
                while k < buf.len() && buf[k].0 == a {
                    target.push(buf[k].1);
                    k += 1;
                }
                let id = match index.get(&target) {
                    Some(&id) => id,
                    None => {
                        let id = sets.len() as u32;
                        index.insert(target.clone(), id);
                        sets.push(target);
                        id
                    }
                };
                row[a as usize] = id;
                j = k;
            }
            if row.contains(&u32::MAX) {
                let empty_id = match index.get(&Vec::new()) {
                    Some(&id) => id,
                    None => {
                        let id = sets.len() as u32;
                        index.insert(Vec::new(), id);
                        sets.push(Vec::new());
                        id
                    }
                };
                row.iter_mut().filter(|t| **t == u32::MAX).for_each(|t| *t = empty_id);
            }
            trans.extend(row);
            i += 1;
        }
        let accepting = sets.iter().map(|s| s.iter().any(|&q| self.accepting[q as usize])).collect();
        Dfa { nsym, trans, accepting }
    }

    pub fn from_dfa(d: &Dfa) -> Nfa {
        let mut nfa = Nfa::new(d.nsym);
        for q in 0..d.n() {
            nfa.add_state(d.accepting[q]);
        }
        for q in 0..d.n() {
            for a in 0..d.nsym {
                nfa.add_edge(q as u32, a as u32, d.step(q, a) as u32);
            }
        }
        nfa.initial.push(0);
        nfa
    }

    /// Concatenation L(self)·L(other).
    pub fn concat(&self, other: &Nfa) -> Nfa {
        let mut r = self.clone();
        let off = r.accepting.len() as u32;
        for q in 0..other.accepting.len() {
            r.add_state(other.accepting[q]);
        }
        for (q, es) in other.edges.iter().enumerate() {
            for &(a, t) in es {
                r.add_edge(q as u32 + off, a, t + off);
            }
        }
        // an accepting state of self continues as any initial state of other
        let other_init_accepts = other.initial.iter().any(|&i| other.accepting[i as usize]);
        for q in 0..self.accepting.len() {
            if !self.accepting[q] {
                continue;
            }
            for &i in &other.initial {
                let es: Vec<(u32, u32)> = other.edges[i as usize].iter().map(|&(a, t)| (a, t + off)).collect();
                r.edges[q].extend(es);
            }
            r.accepting[q] = other_init_accepts;
        }
        r
    }

    /// Kleene star.
    pub fn star(&self) -> Nfa {
        let mut r = self.clone();
        let s = r.add_state(true);
        let init_edges: Vec<(u32, u32)> = self.initial.iter().flat_map(|&i| self.edges[i as usize].clone()).collect();
        r.edges[s as usize].extend(init_edges.iter().copied());
        for q in 0..self.accepting.len() {
            if self.accepting[q] {
                r.edges[q].extend(init_edges.iter().copied());
            }
        }
        r.initial = vec![s];
        r
    }

    pub fn union(&self, other: &Nfa) -> Nfa {
        let mut r = self.clone();
        let off = r.accepting.len() as u32;
        for q in 0..other.accepting.len() {
            r.add_state(other.accepting[q]);
        }
        for (q, es) in other.edges.iter().enumerate() {
            for &(a, t) in es {
                r.add_edge(q as u32 + off, a, t + off);
            }
        }
        r.initial.extend(other.initial.iter().map(|&i| i + off));
        r
    }
}
