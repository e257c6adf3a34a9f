//! Sets reachable from a finite start set by repeatedly applying a definable step.

use serde_json::{json, Value};

use super::{eval_with, EvalOptions, Presentation};
use crate::automata::{Automaton, Dfa, Word};
use crate::count::Cardinal;
use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::relations::{self, Tracks};

#[derive(Clone, Debug)]
pub struct ReachSet {
    pub steps: usize,
    /// The elements reachable within `steps` steps.
    pub acceptor: Automaton,
    /// `sizes[i]` is the number of elements reachable within i steps.
    pub sizes: Vec<Cardinal>,
}

impl ReachSet {
    pub fn to_json_value(&self) -> Value {
        json!({"steps": self.steps, "sizes": self.sizes, "acceptor": self.acceptor.to_json_value()})
    }
}

fn size(d: &Dfa) -> Cardinal {
    if !d.is_finite() {
        return Cardinal::Omega;
    }
    Cardinal::Finite(d.count_by_length(d.n()).into_iter().sum())
}

/// N(U,0) = U and N(U,i+1) = N(U,i) ∪ {b : φ(ā,b) for some ā over N(U,i)}.
pub fn reach(p: &Presentation, phi: &Formula, inputs: &[String], output: &str, start: &[Word], n: usize) -> Result<ReachSet> {
    if inputs.iter().any(|x| x == output) {
        return Err(Error::IllFormed(format!("`{output}` is both input and output")));
    }
    for w in start {
        if !p.domain().accepts(w)? {
            return Err(Error::InvalidParameter(format!("`{}` is not in the domain", p.render(w))));
        }
    }
    let mut vars = inputs.to_vec();
    vars.push(output.to_string());
    let m = vars.len();
    let step = eval_with(p, phi, &vars, &EvalOptions::default())?.dfa();
    let b = p.base().len();
    let tr = Tracks::new(b, m);
    let mut cur = Dfa::from_words(b, start).minimize();
    let mut sizes = vec![size(&cur)];
    for _ in 0..n {
        let mut d = step.clone();
        for t in 0..m - 1 {
            d = d.intersect(&relations::track_domain(&cur, &tr, t));
        }
        let img = relations::project(&d, &tr, &[m - 1]);
        cur = cur.union(&img);
        sizes.push(size(&cur));
    }
    Ok(ReachSet { steps: n, acceptor: Automaton::from_dfa(p.base().clone(), &cur, true), sizes })
}
