//! Minimal regular expressions: literals, `.`, `[..]` tuple patterns, `|`, concatenation, `*`, `+`, `?`.
//!
//! Tuple patterns match letters of a padded alphabet component-wise: `_` is the pad,
//! `?` any non-pad token. `()` and `ε` denote the empty word.

use super::{Alphabet, Dfa, Nfa, Symbol};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Regex {
    Empty,
    Epsilon,
    Set(Vec<u32>),
    Concat(Vec<Regex>),
    Alt(Vec<Regex>),
    Star(Box<Regex>),
}

const SPECIAL: &[char] = &['(', ')', '|', '*', '+', '?', '.', '[', ']'];

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    alphabet: &'a Alphabet,
}

#[derive(Clone, Debug)]
enum Pat {
    Pad,
    Any,
    Token(String),
    Tuple(Vec<Pat>),
}

fn matches(p: &Pat, s: Option<&Symbol>) -> bool {
    match (p, s) {
        (Pat::Pad, None) => true,
        (Pat::Any, Some(_)) => true,
        (Pat::Token(t), Some(Symbol::Token(u))) => t == u,
        (Pat::Tuple(ps), Some(Symbol::Tuple(ss))) => {
            ps.len() == ss.len() && ps.iter().zip(ss).all(|(p, s)| matches(p, s.as_ref()))
        }
        _ => false,
    }
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: &str) -> Result<T> {
        Err(Error::Parse { pos: self.pos, msg: msg.to_string() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn alt(&mut self) -> Result<Regex> {
        let mut arms = vec![self.cat()?];
        while self.peek() == Some('|') {
            self.pos += 1;
            arms.push(self.cat()?);
        }
        Ok(if arms.len() == 1 { arms.pop().unwrap() } else { Regex::Alt(arms) })
    }

    fn cat(&mut self) -> Result<Regex> {
        let mut parts = Vec::new();
        while let Some(c) = self.peek() {
            if c == '|' || c == ')' {
                break;
            }
            parts.push(self.post()?);
        }
        Ok(match parts.len() {
            0 => Regex::Epsilon,
            1 => parts.pop().unwrap(),
            _ => Regex::Concat(parts),
        })
    }

    fn post(&mut self) -> Result<Regex> {
        let mut r = self.atom()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    r = Regex::Star(Box::new(r));
                }
                Some('+') => {
                    self.pos += 1;
                    r = Regex::Concat(vec![r.clone(), Regex::Star(Box::new(r))]);
                }
                Some('?') => {
                    self.pos += 1;
                    r = Regex::Alt(vec![Regex::Epsilon, r]);
                }
                _ => return Ok(r),
            }
        }
    }

    fn atom(&mut self) -> Result<Regex> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let r = self.alt()?;
                if self.peek() != Some(')') {
                    return self.err("expected `)`");
                }
                self.pos += 1;
                Ok(r)
            }
            Some('.') => {
                self.pos += 1;
                Ok(Regex::Set((0..self.alphabet.len() as u32).collect()))
            }
            Some('ε') => {
                self.pos += 1;
                Ok(Regex::Epsilon)
            }
            Some('∅') => {
                self.pos += 1;
                Ok(Regex::Empty)
            }
            Some('[') => {
                let p = self.pattern()?;
                let set: Vec<u32> = (0..self.alphabet.len())
                    .filter(|&i| matches(&p, Some(self.alphabet.symbol(i))))
                    .map(|i| i as u32)
                    .collect();
                if set.is_empty() {
                    return self.err("pattern matches no symbol");
                }
                Ok(Regex::Set(set))
            }
            Some(_) => {
                let tok = self.token()?;
                match self.alphabet.index_of_str(&tok) {
                    Some(i) => Ok(Regex::Set(vec![i as u32])),
                    None => Err(Error::UnknownSymbol(tok)),
                }
            }
            None => self.err("unexpected end of expression"),
        }
    }

    fn token(&mut self) -> Result<String> {
        let start = self.pos;
        if self.alphabet.is_compact() {
            self.pos += 1;
            return Ok(self.chars[start..self.pos].iter().collect());
        }
        while self.pos < self.chars.len() {
            let c = self.chars[self.pos];
            if c.is_whitespace() || SPECIAL.contains(&c) {
                break;
            }
            self.pos += 1;
        }
        if self.pos == start {
            return self.err("expected a symbol");
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    fn pattern(&mut self) -> Result<Pat> {
        self.skip_ws();
        if self.chars.get(self.pos) == Some(&'[') {
            self.pos += 1;
            let mut comps = vec![self.pattern()?];
            loop {
                self.skip_ws();
                match self.chars.get(self.pos) {
                    Some(',') => {
                        self.pos += 1;
                        comps.push(self.pattern()?);
                    }
                    Some(']') => {
                        self.pos += 1;
                        return Ok(Pat::Tuple(comps));
                    }
                    _ => return self.err("expected `,` or `]` in tuple pattern"),
                }
            }
        }
        let start = self.pos;
        while self.pos < self.chars.len() {
            let c = self.chars[self.pos];
            if c.is_whitespace() || matches!(c, ',' | '[' | ']') {
                break;
            }
            self.pos += 1;
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        match s.as_str() {
            "" => self.err("empty pattern component"),
            "_" => Ok(Pat::Pad),
            "?" => Ok(Pat::Any),
            _ => Ok(Pat::Token(s)),
        }
    }
}

impl Regex {
    pub fn parse(alphabet: &Alphabet, text: &str) -> Result<Regex> {
        let mut p = Parser { chars: text.chars().collect(), pos: 0, alphabet };
        let r = p.alt()?;
        if p.peek().is_some() {
            return p.err("trailing input");
        }
        Ok(r)
    }

    pub(crate) fn to_nfa(&self, nsym: usize) -> Nfa {
        match self {
            Regex::Empty => {
                let mut n = Nfa::new(nsym);
                let s = n.add_state(false);
                n.initial.push(s);
                n
            }
            Regex::Epsilon => {
                let mut n = Nfa::new(nsym);
                let s = n.add_state(true);
                n.initial.push(s);
                n
            }
            Regex::Set(syms) => {
                let mut n = Nfa::new(nsym);
                let s = n.add_state(false);
                let t = n.add_state(true);
                for &a in syms {
                    n.add_edge(s, a, t);
                }
                n.initial.push(s);
                n
            }
            Regex::Concat(parts) => {
                let mut it = parts.iter();
                let first = it.next().map(|r| r.to_nfa(nsym)).unwrap_or_else(|| Regex::Epsilon.to_nfa(nsym));
                it.fold(first, |acc, r| acc.concat(&r.to_nfa(nsym)))
            }
            Regex::Alt(arms) => {
                let mut it = arms.iter();
                let first = it.next().map(|r| r.to_nfa(nsym)).unwrap_or_else(|| Regex::Empty.to_nfa(nsym));
                it.fold(first, |acc, r| acc.union(&r.to_nfa(nsym)))
            }
            Regex::Star(r) => r.to_nfa(nsym).star(),
        }
    }

    pub(crate) fn to_dfa_over(&self, nsym: usize) -> Dfa {
        self.to_nfa(nsym).determinize().minimize()
    }
}
