use std::fmt;
use std::sync::Arc;

use serde_json::Value;

use crate::error::{Error, Result};

/// The reserved pad token.
pub const PAD: &str = "_";

/// A letter: either a plain token or a tuple of letters where `None` is the pad.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Token(String),
    Tuple(Vec<Option<Symbol>>),
}

impl Symbol {
    pub fn token(s: impl Into<String>) -> Self {
        Symbol::Token(s.into())
    }

    fn check(&self) -> Result<()> {
        match self {
            Symbol::Token(t) => {
                if t.is_empty() {
                    return Err(Error::InvalidAlphabet("empty token".into()));
                }
                if t == PAD {
                    return Err(Error::InvalidAlphabet("`_` is reserved for the pad".into()));
                }
                if t.chars().any(|c| c.is_whitespace() || matches!(c, '[' | ']' | ',')) {
                    return Err(Error::InvalidAlphabet(format!("token `{t}` contains a reserved character")));
                }
                Ok(())
            }
            Symbol::Tuple(parts) => {
                if parts.is_empty() || parts.iter().all(Option::is_none) {
                    return Err(Error::InvalidAlphabet("tuple letter must have a non-pad component".into()));
                }
                parts.iter().flatten().try_for_each(Symbol::check)
            }
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Symbol::Token(t) => Value::String(t.clone()),
            Symbol::Tuple(parts) => Value::Array(
                parts
                    .iter()
                    .map(|p| match p {
                        None => Value::String(PAD.into()),
                        Some(s) => s.to_json(),
                    })
                    .collect(),
            ),
        }
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::String(s) => Ok(Symbol::Token(s.clone())),
            Value::Array(items) => {
                let parts = items
                    .iter()
                    .map(|it| match it {
                        Value::String(s) if s == PAD => Ok(None),
                        other => Symbol::from_json(other).map(Some),
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Symbol::Tuple(parts))
            }
            _ => Err(Error::InvalidAlphabet(format!("bad symbol {v}"))),
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Token(t) => f.write_str(t),
            Symbol::Tuple(parts) => {
                f.write_str("[")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    match p {
                        None => f.write_str(PAD)?,
                        Some(s) => write!(f, "{s}")?,
                    }
                }
                f.write_str("]")
            }
        }
    }
}

/// A word is a sequence of symbol indices.
pub type Word = Vec<u32>;

/// Ordered list of distinct symbols; the position of a symbol is its id.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Alphabet {
    symbols: Arc<Vec<Symbol>>,
}

impl Alphabet {
    pub fn new(symbols: Vec<Symbol>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::InvalidAlphabet("alphabet is empty".into()));
        }
        for s in &symbols {
            s.check()?;
        }
        let mut sorted: Vec<&Symbol> = symbols.iter().collect();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidAlphabet("duplicate symbol".into()));
        }
        Ok(Alphabet { symbols: Arc::new(symbols) })
    }

    pub fn from_tokens<I, S>(tokens: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Alphabet::new(tokens.into_iter().map(|t| Symbol::Token(t.into())).collect())
    }

    /// Internal constructor that skips validation (used for derived alphabets).
    pub(crate) fn from_symbols_unchecked(symbols: Vec<Symbol>) -> Self {
        Alphabet { symbols: Arc::new(symbols) }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn symbol(&self, i: usize) -> &Symbol {
        &self.symbols[i]
    }

    pub fn index_of(&self, s: &Symbol) -> Option<usize> {
        self.symbols.iter().position(|x| x == s)
    }

    /// Looks a symbol up by its text rendering.
    pub fn index_of_str(&self, s: &str) -> Option<usize> {
        self.symbols.iter().position(|x| x.to_string() == s)
    }

    /// True when every symbol renders as a single character, so words can be written without separators.
    pub fn is_compact(&self) -> bool {
        self.symbols.iter().all(|s| s.to_string().chars().count() == 1)
    }

    /// Parses a word written as a string of one-character symbols or as whitespace-separated symbols.
    pub fn parse_word(&self, text: &str) -> Result<Word> {
        let text = text.trim();
        if text.is_empty() {
            return Ok(Vec::new());
        }
        let pieces: Vec<String> = if self.is_compact() && !text.contains(char::is_whitespace) {
            text.chars().map(|c| c.to_string()).collect()
        } else {
            text.split_whitespace().map(str::to_string).collect()
        };
        pieces
            .iter()
            .map(|p| self.index_of_str(p).map(|i| i as u32).ok_or_else(|| Error::UnknownSymbol(p.clone())))
            .collect()
    }

    pub fn parse_tokens<S: AsRef<str>>(&self, tokens: &[S]) -> Result<Word> {
        tokens
            .iter()
            .map(|t| {
                let t = t.as_ref();
                self.index_of_str(t).map(|i| i as u32).ok_or_else(|| Error::UnknownSymbol(t.to_string()))
            })
            .collect()
    }

    pub fn render_word(&self, w: &[u32]) -> String {
        let parts: Vec<String> = w.iter().map(|&i| self.symbols[i as usize].to_string()).collect();
        if self.is_compact() {
            parts.concat()
        } else {
            parts.join(" ")
        }
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.symbols.iter().map(Symbol::to_json).collect())
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let items = v.as_array().ok_or_else(|| Error::InvalidAlphabet("alphabet must be an array".into()))?;
        Alphabet::new(items.iter().map(Symbol::from_json).collect::<Result<Vec<_>>>()?)
    }
}
