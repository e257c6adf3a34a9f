//! Interpretations: defining a new structure inside a presented one.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Value};

use super::{eval_with, EvalOptions, Presentation};
use crate::automata::Automaton;
use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::relations::{self, RegularRelation, Tracks};

/// A k-dimensional interpretation. Elements of the new structure are k-tuples satisfying the
/// domain formula; each target relation of arity n is given by a formula over k·n variables,
/// the i-th element occupying `vars[i*k..(i+1)*k]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interpretation {
    pub dimension: usize,
    pub domain: (Vec<String>, Formula),
    pub relations: BTreeMap<String, (Vec<String>, Formula)>,
}

impl Interpretation {
    pub fn new(
        dimension: usize,
        domain: (Vec<String>, Formula),
        relations: BTreeMap<String, (Vec<String>, Formula)>,
    ) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        let check = |name: &str, vars: &[String], f: &Formula| -> Result<()> {
            if vars.is_empty() || !vars.len().is_multiple_of(dimension) {
                return Err(Error::IllFormed(format!(
                    "`{name}` lists {} variables, not a positive multiple of {dimension}",
                    vars.len()
                )));
            }
            if vars.iter().collect::<BTreeSet<_>>().len() != vars.len() {
                return Err(Error::IllFormed(format!("`{name}` repeats a variable")));
            }
            for v in f.free_vars() {
                if !vars.contains(&v) {
                    return Err(Error::IllFormed(format!("`{name}` has unlisted free variable `{v}`")));
                }
            }
            f.check_well_named()
        };
        check("domain", &domain.0, &domain.1)?;
        if domain.0.len() != dimension {
            return Err(Error::IllFormed("domain formula must have exactly `dimension` variables".into()));
        }
        for (name, (vars, f)) in &relations {
            check(name, vars, f)?;
        }
        Ok(Interpretation { dimension, domain, relations })
    }

    pub fn arity(&self, rel: &str) -> Option<usize> {
        self.relations.get(rel).map(|(v, _)| v.len() / self.dimension)
    }

    /// `{"dimension", "domain": {"vars", "formula"}, "relations": {name: {"vars", "formula"}}}`
    /// with formulas in text form.
    pub fn to_json_value(&self) -> Value {
        let part = |(vars, f): &(Vec<String>, Formula)| json!({"vars": vars, "formula": f.to_string()});
        let rels: serde_json::Map<String, Value> = self.relations.iter().map(|(k, d)| (k.clone(), part(d))).collect();
        json!({"dimension": self.dimension, "domain": part(&self.domain), "relations": rels})
    }

    pub fn from_json_value(v: &Value) -> Result<Self> {
        let part = |v: &Value, what: &str| -> Result<(Vec<String>, Formula)> {
            let vars = v
                .get("vars")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Json(format!("`{what}` needs `vars`")))?
                .iter()
                .map(|x| x.as_str().map(String::from).ok_or_else(|| Error::Json("variables are strings".into())))
                .collect::<Result<Vec<_>>>()?;
            let f = v.get("formula").and_then(Value::as_str).ok_or_else(|| Error::Json(format!("`{what}` needs `formula`")))?;
            Ok((vars, Formula::parse(f)?))
        };
        let dimension = v.get("dimension").and_then(Value::as_u64).ok_or_else(|| Error::Json("missing `dimension`".into()))?;
        let domain = part(v.get("domain").ok_or_else(|| Error::Json("missing `domain`".into()))?, "domain")?;
        let mut relations = BTreeMap::new();
        if let Some(obj) = v.get("relations") {
            let obj = obj.as_object().ok_or_else(|| Error::Json("`relations` is an object".into()))?;
            for (k, d) in obj {
                relations.insert(k.clone(), part(d, k)?);
            }
        }
        Interpretation::new(dimension as usize, domain, relations)
    }
}

/// The interpreted presentation. For dimension k > 1 its alphabet is the padded k-track alphabet
/// of the source, so elements are convolutions of k source words.
pub fn apply_interpretation(p: &Presentation, tau: &Interpretation) -> Result<Presentation> {
    let opts = EvalOptions::default();
    let k = tau.dimension;
    let dom_rel = eval_with(p, &tau.domain.1, &tau.domain.0, &opts)?;
    if dom_rel.is_empty() {
        return Err(Error::EmptyDomain);
    }
    let gamma = if k == 1 { p.base().clone() } else { p.padded(k).alphabet() };
    let dom_dfa = dom_rel.dfa();
    let domain = Automaton::from_dfa(gamma.clone(), &dom_dfa, true);
    let mut rels = BTreeMap::new();
    for (name, (vars, f)) in &tau.relations {
        let n = vars.len() / k;
        // the convolution of n convolutions of k words is the convolution of all k·n words
        let r = eval_with(p, f, vars, &opts)?;
        let cyl = relations::domain_cylinder(&dom_dfa, &Tracks::new(gamma.len(), n));
        let d = r.dfa().intersect(&cyl);
        rels.insert(name.clone(), RegularRelation::from_dfa(n, gamma.clone(), &d));
    }
    Presentation::new(gamma, domain, rels)
}

/// Translates a formula over the target signature into one over the source: each variable x
/// becomes x_1..x_k, quantifiers are relativized to the domain formula and atoms are replaced
/// by their defining formulas. Free variable x of the result is spread over `x_1..x_k`.
pub fn relativize(phi: &Formula, tau: &Interpretation) -> Result<Formula> {
    phi.check_well_named()?;
    let mut taken: BTreeSet<String> = BTreeSet::new();
    phi.free_vars().into_iter().for_each(|v| {
        taken.insert(v);
    });
    taken.extend(phi.bound_vars());
    let mut fresh = Fresh { taken, next: 0 };
    let mut names = BTreeMap::new();
    for v in phi.free_vars() {
        let tuple = fresh.tuple(&v, tau.dimension);
        names.insert(v, tuple);
    }
    Relativizer { tau, fresh: &mut fresh }.go(phi, &mut names)
}

struct Fresh {
    taken: BTreeSet<String>,
    next: usize,
}

impl Fresh {
    fn name(&mut self, hint: &str) -> String {
        loop {
            self.next += 1;
            let s = format!("{hint}_{}", self.next);
            if self.taken.insert(s.clone()) {
                return s;
            }
        }
    }

    fn tuple(&mut self, x: &str, k: usize) -> Vec<String> {
        if k == 1 {
            // keep names readable in the one-dimensional case when nothing clashes
            let s = format!("{x}_1");
            if self.taken.insert(s.clone()) {
                return vec![s];
            }
        }
        (0..k).map(|_| self.name(x)).collect()
    }
}

struct Relativizer<'a> {
    tau: &'a Interpretation,
    fresh: &'a mut Fresh,
}

impl Relativizer<'_> {
    fn delta(&mut self, xs: &[String]) -> Formula {
        let (vars, f) = &self.tau.domain;
        self.instantiate(vars, f, xs)
    }

    /// `f` with its listed variables replaced by `xs` and its bound variables freshened.
    fn instantiate(&mut self, vars: &[String], f: &Formula, xs: &[String]) -> Formula {
        let bound: Vec<String> = f.bound_vars().into_iter().collect();
        let mut map: BTreeMap<String, String> = BTreeMap::new();
        for b in &bound {
            let n = self.fresh.name(b);
            map.insert(b.clone(), n);
        }
        let g = rename_bound(f, &map);
        let sub: BTreeMap<&String, &String> = vars.iter().zip(xs).collect();
        g.rename_free(&|v| sub.get(&v.to_string()).map(|s| s.to_string()))
    }

    fn go(&mut self, phi: &Formula, names: &mut BTreeMap<String, Vec<String>>) -> Result<Formula> {
        let k = self.tau.dimension;
        Ok(match phi {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Eq(a, b) => {
                let (xa, xb) = (names[a].clone(), names[b].clone());
                Formula::all(xa.into_iter().zip(xb).map(|(u, v)| Formula::Eq(u, v)))
            }
            Formula::Atom(r, args) => {
                let (vars, f) = match self.tau.relations.get(r) {
                    Some(d) => d.clone(),
                    None if r == "eq" && args.len() == 2 => {
                        return self.go(&Formula::Eq(args[0].clone(), args[1].clone()), names);
                    }
                    None => return Err(Error::UnknownRelation(r.clone())),
                };
                if vars.len() != k * args.len() {
                    return Err(Error::ArityMismatch { expected: vars.len() / k, got: args.len() });
                }
                let xs: Vec<String> = args.iter().flat_map(|a| names[a].clone()).collect();
                self.instantiate(&vars, &f, &xs)
            }
            Formula::Not(f) => Formula::not(self.go(f, names)?),
            Formula::And(a, b) => Formula::and(self.go(a, names)?, self.go(b, names)?),
            Formula::Or(a, b) => Formula::or(self.go(a, names)?, self.go(b, names)?),
            Formula::Implies(a, b) => Formula::implies(self.go(a, names)?, self.go(b, names)?),
            Formula::Exists(x, f) | Formula::Forall(x, f) | Formula::ExistsInf(x, f) | Formula::ExistsMod(_, _, x, f) => {
                let xs = self.fresh.tuple(x, k);
                let saved = names.insert(x.clone(), xs.clone());
                let body = self.go(f, names)?;
                match saved {
                    Some(s) => names.insert(x.clone(), s),
                    None => names.remove(x),
                };
                let delta = self.delta(&xs);
                let wrap = |q: &dyn Fn(&str, Formula) -> Formula, inner: Formula| {
                    xs.iter().rev().fold(inner, |acc, v| q(v, acc))
                };
                match phi {
                    Formula::Exists(..) => wrap(&Formula::exists, Formula::and(delta, body)),
                    Formula::Forall(..) => wrap(&Formula::forall, Formula::implies(delta, body)),
                    Formula::ExistsInf(..) => {
                        // infinitely many tuples iff infinitely many values in some coordinate
                        let inner = Formula::and(delta, body);
                        Formula::any((0..k).map(|j| {
                            let others: Vec<&String> = xs.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, v)| v).collect();
                            let e = others.iter().rev().fold(inner.clone(), |acc, v| Formula::exists(v, acc));
                            Formula::ExistsInf(xs[j].clone(), Box::new(e))
                        }))
                    }
                    Formula::ExistsMod(kk, m, ..) => {
                        if k != 1 {
                            return Err(Error::InvalidParameter("counting quantifiers need a one-dimensional interpretation".into()));
                        }
                        Formula::ExistsMod(*kk, *m, xs[0].clone(), Box::new(Formula::and(delta, body)))
                    }
                    _ => unreachable!(),
                }
            }
        })
    }
}

fn rename_bound(f: &Formula, map: &BTreeMap<String, String>) -> Formula {
    let r = |x: &String| map.get(x).cloned().unwrap_or_else(|| x.clone());
    match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Atom(..) | Formula::Eq(..) => f.clone(),
        Formula::Not(g) => Formula::not(rename_bound(g, map)),
        Formula::And(a, b) => Formula::and(rename_bound(a, map), rename_bound(b, map)),
        Formula::Or(a, b) => Formula::or(rename_bound(a, map), rename_bound(b, map)),
        Formula::Implies(a, b) => Formula::implies(rename_bound(a, map), rename_bound(b, map)),
        Formula::Exists(x, g) | Formula::Forall(x, g) | Formula::ExistsInf(x, g) | Formula::ExistsMod(_, _, x, g) => {
            let nx = r(x);
            let body = rename_bound(g, map).rename_free(&|v| if v == x { Some(nx.clone()) } else { None });
            let body = Box::new(body);
            match f {
                Formula::Exists(..) => Formula::Exists(nx, body),
                Formula::Forall(..) => Formula::Forall(nx, body),
                Formula::ExistsInf(..) => Formula::ExistsInf(nx, body),
                Formula::ExistsMod(k, m, ..) => Formula::ExistsMod(*k, *m, nx, body),
                _ => unreachable!(),
            }
        }
    }
}
