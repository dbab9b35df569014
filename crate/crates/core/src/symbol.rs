//! Event symbols, the two sentinels and the null observation.

use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};

/// Label emitted only by the initial state.
pub const START: &str = "<";
/// Label emitted only by the final state.
pub const END: &str = ">";
/// Text escape used for the null observation in files.
pub const NULL_TEXT: &str = "&lambda;";

/// An observable event label. Cheap to clone; ordered lexicographically.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(Arc<str>);

impl Symbol {
    /// Creates an event label. Rejects sentinels, the null escape, empty
    /// strings and labels containing whitespace.
    pub fn new(label: &str) -> Result<Self> {
        if label.is_empty()
            || label == START
            || label == END
            || label == NULL_TEXT
            || label.chars().any(char::is_whitespace)
        {
            return Err(Error::InvalidLabel(label.to_string()));
        }
        Ok(Symbol(Arc::from(label)))
    }

    /// Like [`Symbol::new`] but also accepts the two sentinels.
    pub(crate) fn parse_any(label: &str) -> Result<Self> {
        match label {
            START => Ok(Symbol::start()),
            END => Ok(Symbol::end()),
            _ => Symbol::new(label),
        }
    }

    pub fn start() -> Self {
        static S: OnceLock<Symbol> = OnceLock::new();
        S.get_or_init(|| Symbol(Arc::from(START))).clone()
    }

    pub fn end() -> Self {
        static S: OnceLock<Symbol> = OnceLock::new();
        S.get_or_init(|| Symbol(Arc::from(END))).clone()
    }

    pub fn is_sentinel(&self) -> bool {
        &*self.0 == START || &*self.0 == END
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

/// What a state produces on arrival: an observable symbol or nothing.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Emission {
    Null,
    Symbol(Symbol),
}

impl Emission {
    pub fn symbol(&self) -> Option<&Symbol> {
        match self {
            Emission::Null => None,
            Emission::Symbol(s) => Some(s),
        }
    }

    pub(crate) fn parse(text: &str) -> Result<Self> {
        if text == NULL_TEXT {
            Ok(Emission::Null)
        } else {
            Symbol::parse_any(text).map(Emission::Symbol)
        }
    }
}

impl From<Symbol> for Emission {
    fn from(s: Symbol) -> Self {
        Emission::Symbol(s)
    }
}

impl fmt::Display for Emission {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Emission::Null => f.write_str(NULL_TEXT),
            Emission::Symbol(s) => s.fmt(f),
        }
    }
}

/// Builds a sentinel-wrapped sequence from interior labels. Panics on an
/// invalid label; intended for tests and literals.
pub fn seq(labels: &[&str]) -> Vec<Symbol> {
    let mut out = Vec::with_capacity(labels.len() + 2);
    out.push(Symbol::start());
    out.extend(labels.iter().map(|l| Symbol::new(l).expect("valid label")));
    out.push(Symbol::end());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reserved_labels_are_rejected() {
        for bad in ["<", ">", "&lambda;", "", "two words"] {
            assert!(Symbol::new(bad).is_err(), "{bad:?}");
        }
        assert!(Symbol::new("open").is_ok());
    }

    #[test]
    fn null_sorts_before_symbols() {
        let a = Emission::Symbol(Symbol::new("a").unwrap());
        assert!(Emission::Null < a);
        assert_eq!(Emission::parse("&lambda;").unwrap(), Emission::Null);
        assert_eq!(
            Emission::parse("<").unwrap(),
            Emission::Symbol(Symbol::start())
        );
    }

    #[test]
    fn sentinels_are_distinct() {
        assert_ne!(Symbol::start(), Symbol::end());
        assert!(Symbol::start().is_sentinel());
        assert!(!Symbol::new("x").unwrap().is_sentinel());
    }
}
