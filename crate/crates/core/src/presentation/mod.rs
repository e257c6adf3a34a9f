//! Automatic presentations and the FOC evaluator.

mod builders;
mod eval;
mod interp;
mod reach;

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

use crate::automata::{Alphabet, Automaton, Dfa, Word};
use crate::error::{Error, Result};
use crate::growth::{classify_growth, GrowthReport};
use crate::relations::{self, PaddedAlphabet, RegularRelation, Tracks};

pub use builders::*;
pub use eval::{count_witnesses, decide, decide_with, eval, eval_with, section, EvalOptions, EvalResult};
pub use interp::{apply_interpretation, relativize, Interpretation};
pub use reach::{reach, ReachSet};

/// Names always available in formulas.
pub const BUILTINS: [&str; 3] = ["eq", "llex", "lenEq"];

/// A domain language plus named regular relations over it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presentation {
    base: Alphabet,
    domain: Automaton,
    relations: BTreeMap<String, RegularRelation>,
}

impl Presentation {
    /// Checks that the domain is nonempty and every relation lives inside domainⁿ.
    pub fn new(base: Alphabet, domain: Automaton, relations: BTreeMap<String, RegularRelation>) -> Result<Self> {
        if *domain.alphabet() != base {
            return Err(Error::AlphabetMismatch);
        }
        if domain.is_empty() {
            return Err(Error::EmptyDomain);
        }
        let dom = domain.to_dfa().minimize();
        for (name, r) in &relations {
            if BUILTINS.contains(&name.as_str()) {
                return Err(Error::InvalidPresentation(format!("`{name}` is a builtin relation")));
            }
            if *r.base() != base {
                return Err(Error::AlphabetMismatch);
            }
            let cyl = relations::domain_cylinder(&dom, &Tracks::new(base.len(), r.arity()));
            if !cyl.includes(&r.dfa()) {
                return Err(Error::InvalidPresentation(format!("relation `{name}` leaves the domain")));
            }
        }
        Ok(Presentation { base, domain, relations })
    }

    pub(crate) fn new_unchecked(base: Alphabet, domain: Automaton, relations: BTreeMap<String, RegularRelation>) -> Self {
        Presentation { base, domain, relations }
    }

    pub fn base(&self) -> &Alphabet {
        &self.base
    }

    pub fn domain(&self) -> &Automaton {
        &self.domain
    }

    pub fn relations(&self) -> &BTreeMap<String, RegularRelation> {
        &self.relations
    }

    /// A user relation or a builtin.
    pub fn relation(&self, name: &str) -> Result<RegularRelation> {
        if let Some(r) = self.relations.get(name) {
            return Ok(r.clone());
        }
        if BUILTINS.contains(&name) {
            return RegularRelation::builtin(&self.base, name);
        }
        Err(Error::UnknownRelation(name.to_string()))
    }

    pub(crate) fn relation_dfa(&self, name: &str) -> Result<(usize, Dfa)> {
        if let Some(r) = self.relations.get(name) {
            return Ok((r.arity(), r.dfa()));
        }
        if BUILTINS.contains(&name) {
            return Ok((2, relations::builtin_dfa(name, self.base.len()).expect("builtin")));
        }
        Err(Error::UnknownRelation(name.to_string()))
    }

    /// Adds (or replaces) a relation after checking it against the domain.
    pub fn with_relation(&self, name: &str, r: RegularRelation) -> Result<Self> {
        let mut rels = self.relations.clone();
        rels.insert(name.to_string(), r);
        Presentation::new(self.base.clone(), self.domain.clone(), rels)
    }

    /// Parses an element of the domain written as text.
    pub fn element(&self, text: &str) -> Result<Word> {
        let w = self.base.parse_word(text)?;
        if !self.domain.accepts(&w)? {
            return Err(Error::InvalidParameter(format!("`{text}` is not in the domain")));
        }
        Ok(w)
    }

    pub fn render(&self, w: &[u32]) -> String {
        self.base.render_word(w)
    }

    /// Does the tuple belong to the named relation?
    pub fn holds(&self, rel: &str, tuple: &[Word]) -> Result<bool> {
        let r = self.relation(rel)?;
        if r.arity() != tuple.len() {
            return Err(Error::ArityMismatch { expected: r.arity(), got: tuple.len() });
        }
        for w in tuple {
            if !self.domain.accepts(w)? {
                return Ok(false);
            }
        }
        r.contains(tuple)
    }

    pub fn is_poly_growth(&self) -> Result<GrowthReport> {
        classify_growth(&self.domain)
    }

    pub(crate) fn padded(&self, n: usize) -> PaddedAlphabet {
        PaddedAlphabet::new(self.base.clone(), n)
    }

    pub fn to_json_value(&self) -> Value {
        let mut rels = Map::new();
        for (name, r) in &self.relations {
            rels.insert(name.clone(), json!({"arity": r.arity(), "acceptor": r.acceptor().to_json_value()}));
        }
        json!({"base": self.base.to_json(), "domain": self.domain.to_json_value(), "relations": Value::Object(rels)})
    }

    pub fn to_json(&self) -> String {
        self.to_json_value().to_string()
    }

    pub fn from_json_value(v: &Value) -> Result<Self> {
        let base = Alphabet::from_json(v.get("base").ok_or_else(|| Error::Json("missing base".into()))?)?;
        let domain = Automaton::from_json_value(v.get("domain").ok_or_else(|| Error::Json("missing domain".into()))?)?;
        let mut relations = BTreeMap::new();
        if let Some(obj) = v.get("relations") {
            let obj = obj.as_object().ok_or_else(|| Error::Json("relations must be an object".into()))?;
            for (name, r) in obj {
                let arity = r.get("arity").and_then(Value::as_u64).ok_or_else(|| Error::Json("missing arity".into()))?;
                let acc = Automaton::from_json_value(r.get("acceptor").ok_or_else(|| Error::Json("missing acceptor".into()))?)?;
                relations.insert(name.clone(), RegularRelation::new(arity as usize, base.clone(), acc)?);
            }
        }
        Presentation::new(base, domain, relations)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Presentation::from_json_value(&serde_json::from_str(text)?)
    }
}
