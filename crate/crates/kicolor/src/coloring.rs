//! Set colorings of graph vertices and the properness predicate.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::colorset::{ColorSet, MAX_PALETTE};
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Problem parameters: palette size `q`, set size `k`, overlap tolerance `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Params {
    pub q: u32,
    pub k: u32,
    pub i: u32,
}

impl Params {
    pub fn new(q: u32, k: u32, i: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::domain("set size k must be at least 1"));
        }
        if u64::from(q) > u64::from(MAX_PALETTE) {
            return Err(Error::UnsupportedPalette(u64::from(q)));
        }
        Ok(Params { q, k, i })
    }
}

/// A total or partial assignment of color sets to vertices. All sets share
/// the same palette size and cardinality.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coloring {
    q: u32,
    k: u32,
    map: BTreeMap<u32, ColorSet>,
}

impl Coloring {
    pub fn new(q: u32, k: u32) -> Self {
        Coloring {
            q,
            k,
            map: BTreeMap::new(),
        }
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Assigns a set to a vertex; the set must match the coloring's palette
    /// and cardinality.
    pub fn insert(&mut self, v: u32, set: ColorSet) -> Result<()> {
        if set.palette() != self.q {
            return Err(Error::domain(format!(
                "set over palette {} inserted into a coloring over palette {}",
                set.palette(),
                self.q
            )));
        }
        if set.len() != self.k {
            return Err(Error::domain(format!(
                "set of size {} inserted into a {}-set coloring",
                set.len(),
                self.k
            )));
        }
        self.map.insert(v, set);
        Ok(())
    }

    pub fn get(&self, v: u32) -> Option<&ColorSet> {
        self.map.get(&v)
    }

    pub fn contains(&self, v: u32) -> bool {
        self.map.contains_key(&v)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &ColorSet)> {
        self.map.iter().map(|(&v, c)| (v, c))
    }

    pub fn vertices(&self) -> impl Iterator<Item = u32> + '_ {
        self.map.keys().copied()
    }

    /// Renders as `v <vertex> {c1,c2,...}` lines, 1-based, ascending.
    pub fn to_lines(&self) -> String {
        let mut out = String::new();
        for (v, set) in self.iter() {
            let _ = writeln!(out, "v {} {}", v + 1, set);
        }
        out
    }

    /// Parses the `v <vertex> {c1,c2,...}` line format.
    pub fn parse(text: &str, q: u32, k: u32) -> Result<Self> {
        let mut coloring = Coloring::new(q, k);
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('c') {
                continue;
            }
            let mut tok = line.split_whitespace();
            if tok.next() != Some("v") {
                return Err(Error::parse(lineno, "expected 'v <vertex> {colors}'"));
            }
            let v: u32 = tok
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::parse(lineno, "malformed vertex index"))?;
            if v == 0 {
                return Err(Error::parse(lineno, "vertex indices are 1-based"));
            }
            let set_text = tok
                .next()
                .ok_or_else(|| Error::parse(lineno, "missing color set"))?;
            let inner = set_text
                .strip_prefix('{')
                .and_then(|s| s.strip_suffix('}'))
                .ok_or_else(|| Error::parse(lineno, "color set must look like {1,2}"))?;
            let mut colors = Vec::new();
            if !inner.is_empty() {
                for part in inner.split(',') {
                    let c: u32 = part
                        .parse()
                        .map_err(|_| Error::parse(lineno, format!("malformed color '{part}'")))?;
                    colors.push(c);
                }
            }
            let set = ColorSet::from_colors(colors, q)
                .map_err(|e| Error::parse(lineno, e.to_string()))?;
            coloring
                .insert(v - 1, set)
                .map_err(|e| Error::parse(lineno, e.to_string()))?;
        }
        Ok(coloring)
    }
}

/// True iff every edge with both endpoints colored is a legal pair under
/// `params` and the coloring's shape matches `params`. Edges leaving the
/// colored set are ignored by definition.
pub fn is_proper(g: &Graph, f: &Coloring, params: &Params) -> bool {
    if f.q() != params.q || f.k() != params.k {
        return false;
    }
    for (u, v) in g.edges() {
        if let (Some(cu), Some(cv)) = (f.get(u), f.get(v)) {
            if cu.intersection_size(cv) > params.i {
                return false;
            }
        }
    }
    true
}
