//! Finite word automata over explicit alphabets.

mod alphabet;
pub(crate) mod dfa;
mod regex;

use std::cmp::Ordering;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use alphabet::{Alphabet, Symbol, Word, PAD};
pub(crate) use dfa::{Dfa, Nfa};
pub use regex::Regex;

use crate::error::{Error, Result};

/// Cumulative word counts: `values[n]` is the number of accepted words of length at most `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrowthCount {
    pub values: Vec<BigUint>,
}

impl Serialize for GrowthCount {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<Value> = self.values.iter().map(crate::count::big_to_value).collect();
        v.serialize(s)
    }
}

/// A finite automaton. Immutable once built; every operation returns a new value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Automaton {
    alphabet: Alphabet,
    states: usize,
    initial: Vec<u32>,
    accepting: Vec<u32>,
    transitions: Vec<(u32, u32, u32)>,
    deterministic: bool,
}

#[derive(Serialize, Deserialize)]
struct AutomatonJson {
    alphabet: Value,
    states: usize,
    initial: Vec<u32>,
    accepting: Vec<u32>,
    transitions: Vec<[u32; 3]>,
    deterministic: bool,
}

fn structurally_deterministic(initial: &[u32], transitions: &[(u32, u32, u32)]) -> bool {
    initial.len() == 1 && transitions.windows(2).all(|w| (w[0].0, w[0].1) != (w[1].0, w[1].1))
}

impl Automaton {
    /// Builds an automaton; the deterministic flag is set when the structure allows it.
    pub fn new(
        alphabet: Alphabet,
        states: usize,
        initial: Vec<u32>,
        accepting: Vec<u32>,
        transitions: Vec<(u32, u32, u32)>,
    ) -> Result<Self> {
        let mut a = Automaton::raw(alphabet, states, initial, accepting, transitions, false)?;
        a.deterministic = structurally_deterministic(&a.initial, &a.transitions);
        Ok(a)
    }

    /// Builds an automaton with an explicit deterministic flag, which must be truthful when set.
    pub fn with_flag(
        alphabet: Alphabet,
        states: usize,
        initial: Vec<u32>,
        accepting: Vec<u32>,
        transitions: Vec<(u32, u32, u32)>,
        deterministic: bool,
    ) -> Result<Self> {
        let a = Automaton::raw(alphabet, states, initial, accepting, transitions, deterministic)?;
        if deterministic && !structurally_deterministic(&a.initial, &a.transitions) {
            return Err(Error::InvalidAutomaton("flagged deterministic but is not".into()));
        }
        Ok(a)
    }

    fn raw(
        alphabet: Alphabet,
        states: usize,
        mut initial: Vec<u32>,
        mut accepting: Vec<u32>,
        mut transitions: Vec<(u32, u32, u32)>,
        deterministic: bool,
    ) -> Result<Self> {
        initial.sort_unstable();
        initial.dedup();
        accepting.sort_unstable();
        accepting.dedup();
        transitions.sort_unstable();
        transitions.dedup();
        let bad_state = |q: u32| q as usize >= states;
        if initial.iter().chain(&accepting).any(|&q| bad_state(q)) {
            return Err(Error::InvalidAutomaton("state id out of range".into()));
        }
        for &(f, s, t) in &transitions {
            if bad_state(f) || bad_state(t) {
                return Err(Error::InvalidAutomaton("state id out of range".into()));
            }
            if s as usize >= alphabet.len() {
                return Err(Error::InvalidAutomaton("symbol id out of range".into()));
            }
        }
        Ok(Automaton { alphabet, states, initial, accepting, transitions, deterministic })
    }

    pub fn empty(alphabet: Alphabet) -> Self {
        let d = Dfa::empty(alphabet.len());
        Automaton::from_dfa(alphabet, &d, false)
    }

    pub fn universal(alphabet: Alphabet) -> Self {
        let d = Dfa::universal(alphabet.len());
        Automaton::from_dfa(alphabet, &d, false)
    }

    /// Automaton for a finite set of words.
    pub fn from_words(alphabet: Alphabet, words: &[Word]) -> Result<Self> {
        for w in words {
            if w.iter().any(|&a| a as usize >= alphabet.len()) {
                return Err(Error::InvalidAutomaton("symbol id out of range".into()));
            }
        }
        let d = Dfa::from_words(alphabet.len(), words);
        Ok(Automaton::from_dfa(alphabet, &d, true))
    }

    /// Builds the automaton of a regular expression (see [`Regex`]).
    pub fn from_regex(alphabet: Alphabet, text: &str) -> Result<Self> {
        let r = Regex::parse(&alphabet, text)?;
        let d = r.to_dfa_over(alphabet.len());
        Ok(Automaton::from_dfa(alphabet, &d, true))
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn state_count(&self) -> usize {
        self.states
    }

    pub fn initial(&self) -> &[u32] {
        &self.initial
    }

    pub fn accepting(&self) -> &[u32] {
        &self.accepting
    }

    pub fn transitions(&self) -> &[(u32, u32, u32)] {
        &self.transitions
    }

    pub fn is_deterministic(&self) -> bool {
        self.deterministic
    }

    pub(crate) fn to_dfa(&self) -> Dfa {
        let nsym = self.alphabet.len();
        if self.deterministic {
            let sink = self.states as u32;
            let mut trans = vec![sink; (self.states + 1) * nsym];
            for &(f, s, t) in &self.transitions {
                trans[f as usize * nsym + s as usize] = t;
            }
            let mut accepting = vec![false; self.states + 1];
            for &q in &self.accepting {
                accepting[q as usize] = true;
            }
            let q0 = self.initial[0] as usize;
            let d = Dfa { nsym, trans, accepting };
            if q0 == 0 {
                d
            } else {
                relabel_initial(&d, q0)
            }
        } else {
            let mut nfa = Nfa::new(nsym);
            for _ in 0..self.states {
                nfa.add_state(false);
            }
            for &q in &self.accepting {
                nfa.accepting[q as usize] = true;
            }
            for &(f, s, t) in &self.transitions {
                nfa.add_edge(f, s, t);
            }
            nfa.initial = self.initial.clone();
            nfa.determinize()
        }
    }

    /// Converts an engine DFA back; `trim` drops useless states (the initial state is always kept).
    pub(crate) fn from_dfa(alphabet: Alphabet, d: &Dfa, trim: bool) -> Self {
        assert_eq!(alphabet.len(), d.nsym);
        let keep: Vec<bool> = if trim {
            let mut u = d.useful_states();
            u[0] = true;
            u
        } else {
            d.reachable_states()
        };
        let mut id = vec![u32::MAX; d.n()];
        let mut count = 0u32;
        for q in 0..d.n() {
            if keep[q] {
                id[q] = count;
                count += 1;
            }
        }
        let mut transitions = Vec::new();
        for q in 0..d.n() {
            if !keep[q] {
                continue;
            }
            for a in 0..d.nsym {
                let t = d.step(q, a);
                if keep[t] {
                    transitions.push((id[q], a as u32, id[t]));
                }
            }
        }
        let accepting = (0..d.n()).filter(|&q| keep[q] && d.accepting[q]).map(|q| id[q]).collect();
        Automaton {
            alphabet,
            states: count as usize,
            initial: vec![0],
            accepting,
            transitions,
            deterministic: true,
        }
    }

    fn same_alphabet(&self, other: &Automaton) -> Result<()> {
        if self.alphabet != other.alphabet {
            return Err(Error::AlphabetMismatch);
        }
        Ok(())
    }

    /// Complete deterministic automaton with only reachable states.
    pub fn determinize(&self) -> Automaton {
        Automaton::from_dfa(self.alphabet.clone(), &self.to_dfa().canonical(), false)
    }

    /// Minimal complete DFA (one sink at most).
    pub fn minimize(&self) -> Result<Automaton> {
        if !self.deterministic {
            return Err(Error::NotDeterministic);
        }
        Ok(Automaton::from_dfa(self.alphabet.clone(), &self.to_dfa().minimize(), false))
    }

    pub fn intersect(&self, other: &Automaton) -> Result<Automaton> {
        self.same_alphabet(other)?;
        Ok(Automaton::from_dfa(self.alphabet.clone(), &self.to_dfa().intersect(&other.to_dfa()), true))
    }

    pub fn union(&self, other: &Automaton) -> Result<Automaton> {
        self.same_alphabet(other)?;
        Ok(Automaton::from_dfa(self.alphabet.clone(), &self.to_dfa().union(&other.to_dfa()), true))
    }

    pub fn difference(&self, other: &Automaton) -> Result<Automaton> {
        self.same_alphabet(other)?;
        Ok(Automaton::from_dfa(self.alphabet.clone(), &self.to_dfa().difference(&other.to_dfa()), true))
    }

    pub fn complement(&self) -> Automaton {
        Automaton::from_dfa(self.alphabet.clone(), &self.to_dfa().complement().minimize(), true)
    }

    pub fn is_empty(&self) -> bool {
        self.to_dfa().is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.to_dfa().is_finite()
    }

    /// True iff L(other) ⊆ L(self).
    pub fn includes(&self, other: &Automaton) -> Result<bool> {
        self.same_alphabet(other)?;
        Ok(self.to_dfa().includes(&other.to_dfa()))
    }

    pub fn equivalent(&self, other: &Automaton) -> Result<bool> {
        self.same_alphabet(other)?;
        Ok(self.to_dfa().equivalent(&other.to_dfa()))
    }

    pub fn accepts(&self, w: &[u32]) -> Result<bool> {
        if let Some(&a) = w.iter().find(|&&a| a as usize >= self.alphabet.len()) {
            return Err(Error::UnknownSymbol(format!("#{a}")));
        }
        if self.deterministic {
            let mut q = self.initial[0];
            for &a in w {
                match self.successor(q, a) {
                    Some(t) => q = t,
                    None => return Ok(false),
                }
            }
            return Ok(self.accepting.binary_search(&q).is_ok());
        }
        let mut cur: Vec<u32> = self.initial.clone();
        for &a in w {
            let mut next: Vec<u32> = Vec::new();
            for &q in &cur {
                let lo = self.transitions.partition_point(|&(f, s, _)| (f, s) < (q, a));
                next.extend(self.transitions[lo..].iter().take_while(|&&(f, s, _)| (f, s) == (q, a)).map(|t| t.2));
            }
            next.sort_unstable();
            next.dedup();
            cur = next;
        }
        Ok(cur.iter().any(|q| self.accepting.binary_search(q).is_ok()))
    }

    /// Membership of a word written in text form.
    pub fn accepts_str(&self, text: &str) -> Result<bool> {
        let w = self.alphabet.parse_word(text)?;
        self.accepts(&w)
    }

    fn successor(&self, q: u32, a: u32) -> Option<u32> {
        let i = self.transitions.partition_point(|&(f, s, _)| (f, s) < (q, a));
        self.transitions.get(i).filter(|t| (t.0, t.1) == (q, a)).map(|t| t.2)
    }

    pub fn count_words_upto(&self, n: usize) -> GrowthCount {
        let per = self.to_dfa().count_by_length(n);
        let mut acc = BigUint::default();
        let values = per
            .into_iter()
            .map(|c| {
                acc += c;
                acc.clone()
            })
            .collect();
        GrowthCount { values }
    }

    pub fn enumerate_upto(&self, n: usize) -> Vec<Word> {
        self.to_dfa().enumerate(n)
    }

    pub fn to_json_value(&self) -> Value {
        serde_json::to_value(AutomatonJson {
            alphabet: self.alphabet.to_json(),
            states: self.states,
            initial: self.initial.clone(),
            accepting: self.accepting.clone(),
            transitions: self.transitions.iter().map(|&(f, s, t)| [f, s, t]).collect(),
            deterministic: self.deterministic,
        })
        .expect("automaton serializes")
    }

    pub fn to_json(&self) -> String {
        self.to_json_value().to_string()
    }

    pub fn from_json_value(v: &Value) -> Result<Self> {
        let j: AutomatonJson = serde_json::from_value(v.clone())?;
        let alphabet = Alphabet::from_json(&j.alphabet)?;
        Automaton::with_flag(
            alphabet,
            j.states,
            j.initial,
            j.accepting,
            j.transitions.into_iter().map(|[f, s, t]| (f, s, t)).collect(),
            j.deterministic,
        )
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text)?;
        Automaton::from_json_value(&v)
    }
}

fn relabel_initial(d: &Dfa, q0: usize) -> Dfa {
    let perm = |q: usize| if q == 0 { q0 } else if q == q0 { 0 } else { q };
    let mut trans = Vec::with_capacity(d.trans.len());
    for i in 0..d.n() {
        trans.extend(d.row(perm(i)).iter().map(|&t| perm(t as usize) as u32));
    }
    let accepting = (0..d.n()).map(|i| d.accepting[perm(i)]).collect();
    Dfa { nsym: d.nsym, trans, accepting }
}

/// Length-lexicographic order on words of symbol indices.
pub fn llex_compare(u: &[u32], v: &[u32]) -> Ordering {
    u.len().cmp(&v.len()).then_with(|| u.cmp(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> Alphabet {
        Alphabet::from_tokens(["a", "b"]).unwrap()
    }

    #[test]
    fn nfa_with_parallel_edges() {
        let a = Automaton::new(ab(), 3, vec![0], vec![1, 2], vec![(0, 0, 1), (0, 0, 2)]).unwrap();
        assert!(!a.is_deterministic());
        let d = a.determinize();
        assert!(d.is_deterministic());
        // {0}, {1,2}, sink
        assert_eq!(d.state_count(), 3);
        assert!(d.accepts_str("a").unwrap());
        assert!(!d.accepts_str("aa").unwrap());
    }

    #[test]
    fn json_round_trip_is_byte_identical() {
        let a = Automaton::from_regex(ab(), "a*b*").unwrap();
        let s = a.to_json();
        let b = Automaton::from_json(&s).unwrap();
        assert_eq!(b.to_json(), s);
        assert_eq!(a, b);
    }

    #[test]
    fn flag_must_be_truthful() {
        let r = Automaton::with_flag(ab(), 2, vec![0, 1], vec![], vec![], true);
        assert!(r.is_err());
    }

    #[test]
    fn minimize_rejects_nfa() {
        let a = Automaton::new(ab(), 2, vec![0, 1], vec![1], vec![]).unwrap();
        assert_eq!(a.minimize(), Err(Error::NotDeterministic));
    }

    #[test]
    fn llex() {
        assert_eq!(llex_compare(&[1], &[0, 0]), Ordering::Less);
        assert_eq!(llex_compare(&[0, 1], &[0, 0]), Ordering::Greater);
        assert_eq!(llex_compare(&[3], &[3]), Ordering::Equal);
    }
}
