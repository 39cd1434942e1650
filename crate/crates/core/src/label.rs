//! Facet labels with nested subscripts, e.g. `3_{6_5,4,4_5,2}`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FacetLabel {
    pub base: u32,
    pub subs: Vec<FacetLabel>,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("bad facet label {input:?} at byte {pos}: {msg}")]
pub struct LabelError {
    pub input: String,
    pub pos: usize,
    pub msg: &'static str,
}

impl FacetLabel {
    pub fn atom(base: u32) -> Self {
        FacetLabel { base, subs: Vec::new() }
    }

    pub fn with_subs(base: u32, subs: Vec<FacetLabel>) -> Self {
        FacetLabel { base, subs }
    }

    /// The copy of `self` mirrored across `f`: `f` is prepended to the subscripts.
    pub fn prepend(&self, f: &FacetLabel) -> FacetLabel {
        let mut subs = Vec::with_capacity(self.subs.len() + 1);
        subs.push(f.clone());
        subs.extend(self.subs.iter().cloned());
        FacetLabel { base: self.base, subs }
    }

    pub fn is_atom(&self) -> bool {
        self.subs.is_empty()
    }

    pub fn parse(s: &str) -> Result<FacetLabel, LabelError> {
        let mut p = Parser { s: s.as_bytes(), pos: 0, input: s };
        let l = p.label()?;
        if p.pos != p.s.len() {
            return Err(p.err("trailing characters"));
        }
        Ok(l)
    }

    /// Parses the longest label at the start of `s`; returns it with the
    /// number of bytes consumed.
    pub fn parse_prefix(s: &str) -> Result<(FacetLabel, usize), LabelError> {
        let mut p = Parser { s: s.as_bytes(), pos: 0, input: s };
        let l = p.label()?;
        Ok((l, p.pos))
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    input: &'a str,
}

impl Parser<'_> {
    fn err(&self, msg: &'static str) -> LabelError {
        LabelError { input: self.input.to_string(), pos: self.pos, msg }
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn int(&mut self) -> Result<u32, LabelError> {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a node number"));
        }
        let digits = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii digits");
        digits.parse().map_err(|_| self.err("node number too large"))
    }

    fn label(&mut self) -> Result<FacetLabel, LabelError> {
        let base = self.int()?;
        if self.peek() != Some(b'_') {
            return Ok(FacetLabel::atom(base));
        }
        self.pos += 1;
        if self.peek() != Some(b'{') {
            let sub = self.int()?;
            return Ok(FacetLabel::with_subs(base, vec![FacetLabel::atom(sub)]));
        }
        self.pos += 1;
        let mut subs = vec![self.label()?];
        loop {
            match self.peek() {
                Some(b',') => {
                    self.pos += 1;
                    subs.push(self.label()?);
                }
                Some(b'}') => {
                    self.pos += 1;
                    return Ok(FacetLabel::with_subs(base, subs));
                }
                _ => return Err(self.err("expected ',' or '}'")),
            }
        }
    }
}

impl fmt::Display for FacetLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.base)?;
        match self.subs.as_slice() {
            [] => Ok(()),
            [one] if one.is_atom() => write!(f, "_{}", one.base),
            subs => {
                write!(f, "_{{")?;
                for (i, s) in subs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{s}")?;
                }
                write!(f, "}}")
            }
        }
    }
}

impl FromStr for FacetLabel {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FacetLabel::parse(s)
    }
}

impl Serialize for FacetLabel {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for FacetLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        FacetLabel::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Shorthand for tests and tables: panics on malformed input.
pub fn fl(s: &str) -> FacetLabel {
    FacetLabel::parse(s).unwrap_or_else(|e| panic!("{e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for s in ["3", "4_5", "6_{4_5}", "6_{4,5}", "3_{6_5,4,4_5,2}", "1_{1_2,1,2}", "6_{6_5,4,5}", "12_7"] {
            assert_eq!(fl(s).to_string(), s);
        }
    }

    #[test]
    fn braced_single_atom_normalizes() {
        assert_eq!(fl("3_{4}").to_string(), "3_4");
        assert_eq!(fl("3_{4}"), fl("3_4"));
    }

    #[test]
    fn prepend_builds_mirror_names() {
        assert_eq!(fl("3_{4,2}").prepend(&fl("1")).to_string(), "3_{1,4,2}");
        assert_eq!(fl("6_5").prepend(&fl("4")).to_string(), "6_{4,5}");
        assert_eq!(fl("6").prepend(&fl("4_5")).to_string(), "6_{4_5}");
        assert_eq!(fl("3").prepend(&fl("2")).to_string(), "3_2");
    }

    #[test]
    fn rejects_malformed() {
        for s in ["", "_3", "3_", "3_{", "3_{4,}", "3_{4}}", "3_4_5", "a"] {
            assert!(FacetLabel::parse(s).is_err(), "{s}");
        }
    }
}
