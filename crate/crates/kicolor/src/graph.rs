//! Simple undirected graphs with dense vertex ids, DIMACS `.col` ingestion,
//! and the decomposition of `G[V \ S]` into rooted trees that the solver's
//! dynamic program walks.
//!
//! Vertices are `0..n-1` internally and 1-based in all file formats.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// An immutable simple undirected graph: no self-loops, no parallel edges,
/// symmetric sorted adjacency lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: u32,
    adj: Vec<Vec<u32>>,
    m: u64,
}

impl Graph {
    /// Builds a graph from an edge list. Self-loops error; duplicate edges
    /// (in either orientation) are deduplicated.
    pub fn new(n: u32, edges: impl IntoIterator<Item = (u32, u32)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::domain(format!(
                    "edge ({u},{v}) touches a vertex outside 0..{n}"
                )));
            }
            if u == v {
                return Err(Error::domain(format!("self-loop at vertex {u}")));
            }
            set.insert((u.min(v), u.max(v)));
        }
        let mut adj = vec![Vec::new(); n as usize];
        for &(u, v) in &set {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(Graph {
            n,
            adj,
            m: set.len() as u64,
        })
    }

    pub fn vertex_count(&self) -> u32 {
        self.n
    }

    pub fn edge_count(&self) -> u64 {
        self.m
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.adj[v as usize]
    }

    pub fn degree(&self, v: u32) -> usize {
        self.adj[v as usize].len()
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.adj[u as usize].binary_search(&v).is_ok()
    }

    pub fn vertices(&self) -> impl Iterator<Item = u32> {
        0..self.n
    }

    /// Edges as `(u, v)` with `u < v`, ascending.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.vertices().flat_map(move |u| {
            self.adj[u as usize]
                .iter()
                .copied()
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    /// Parses the DIMACS `.col` format: `c` comment lines, one
    /// `p edge <n> <m>` header, and `e <u> <v>` lines with 1-based endpoints.
    /// Parallel edges are deduplicated; self-loops are rejected.
    pub fn parse_dimacs(text: &str) -> Result<Self> {
        let mut n: Option<u32> = None;
        let mut edges: Vec<(u32, u32)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('c') {
                continue;
            }
            let mut tok = line.split_whitespace();
            match tok.next() {
                Some("p") => {
                    if n.is_some() {
                        return Err(Error::parse(lineno, "duplicate problem line"));
                    }
                    let fmt = tok.next().unwrap_or("");
                    if fmt != "edge" && fmt != "col" {
                        return Err(Error::parse(
                            lineno,
                            format!("expected 'p edge <n> <m>', found format '{fmt}'"),
                        ));
                    }
                    let nv: u32 = parse_tok(tok.next(), lineno, "vertex count")?;
                    let _declared_edges: u64 = parse_tok(tok.next(), lineno, "edge count")?;
                    n = Some(nv);
                }
                Some("e") => {
                    let n = n.ok_or_else(|| {
                        Error::parse(lineno, "edge line before the problem line")
                    })?;
                    let u: u32 = parse_tok(tok.next(), lineno, "edge endpoint")?;
                    let v: u32 = parse_tok(tok.next(), lineno, "edge endpoint")?;
                    if u == 0 || v == 0 || u > n || v > n {
                        return Err(Error::parse(
                            lineno,
                            format!("edge ({u},{v}) outside the 1..{n} vertex range"),
                        ));
                    }
                    if u == v {
                        return Err(Error::parse(lineno, format!("self-loop at vertex {u}")));
                    }
                    edges.push((u - 1, v - 1));
                }
                Some(other) => {
                    return Err(Error::parse(lineno, format!("unrecognized line kind '{other}'")));
                }
                None => unreachable!(),
            }
        }
        let n = n.ok_or_else(|| Error::parse(text.lines().count().max(1), "missing problem line"))?;
        Graph::new(n, edges)
    }

    /// Canonical DIMACS writer: header plus `e u v` lines with `u < v`,
    /// ascending, 1-based. `parse(to_dimacs(g)) == g` and the rendering of a
    /// parsed graph is a fixed point.
    pub fn to_dimacs(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "p edge {} {}", self.n, self.m);
        for (u, v) in self.edges() {
            let _ = writeln!(out, "e {} {}", u + 1, v + 1);
        }
        out
    }

    /// Decomposes `G[V \ S]` into rooted trees. Errors unless `S` is a
    /// feedback vertex set. Roots are the minimum vertex of each component,
    /// children are visited in ascending order, and the per-tree post-order
    /// sequence places every child before its parent.
    pub fn induced_forest(&self, fvs: &[u32]) -> Result<RootedForest> {
        for &v in fvs {
            if v >= self.n {
                return Err(Error::domain(format!("FVS vertex {v} outside 0..{}", self.n)));
            }
        }
        let mut in_fvs = vec![false; self.n as usize];
        for &v in fvs {
            in_fvs[v as usize] = true;
        }

        let mut parent: Vec<Option<u32>> = vec![None; self.n as usize];
        let mut children: Vec<Vec<u32>> = vec![Vec::new(); self.n as usize];
        let mut seen = vec![false; self.n as usize];
        let mut trees = Vec::new();

        for root in self.vertices() {
            if in_fvs[root as usize] || seen[root as usize] {
                continue;
            }
            // Iterative DFS; forests from the acceptance-scale inputs can be
            // thousands of vertices deep.
            let mut post_order = Vec::new();
            let mut stack: Vec<(u32, Option<u32>, usize)> = vec![(root, None, 0)];
            seen[root as usize] = true;
            while let Some(top) = stack.last_mut() {
                let (v, p) = (top.0, top.1);
                let nbrs = &self.adj[v as usize];
                let mut descend = None;
                while top.2 < nbrs.len() {
                    let u = nbrs[top.2];
                    top.2 += 1;
                    if in_fvs[u as usize] || Some(u) == p {
                        continue;
                    }
                    if seen[u as usize] {
                        return Err(Error::domain(format!(
                            "the given set is not a feedback vertex set: cycle through vertex {}",
                            u + 1
                        )));
                    }
                    descend = Some(u);
                    break;
                }
                match descend {
                    Some(u) => {
                        seen[u as usize] = true;
                        parent[u as usize] = Some(v);
                        children[v as usize].push(u);
                        stack.push((u, Some(v), 0));
                    }
                    None => {
                        post_order.push(v);
                        stack.pop();
                    }
                }
            }
            trees.push(RootedTree { root, post_order });
        }

        Ok(RootedForest {
            trees,
            parent,
            children,
        })
    }
}

fn parse_tok<T: std::str::FromStr>(tok: Option<&str>, lineno: usize, what: &str) -> Result<T> {
    tok.ok_or_else(|| Error::parse(lineno, format!("missing {what}")))?
        .parse()
        .map_err(|_| Error::parse(lineno, format!("malformed {what}")))
}

/// One tree of the forest `G[V \ S]`.
#[derive(Clone, Debug)]
pub struct RootedTree {
    pub root: u32,
    /// Every vertex of the tree, children before parents; the root is last.
    pub post_order: Vec<u32>,
}

/// The forest `G[V \ S]` with global parent/children maps. Vertices of `S`
/// have no parent and no children here.
#[derive(Clone)]
pub struct RootedForest {
    pub trees: Vec<RootedTree>,
    parent: Vec<Option<u32>>,
    children: Vec<Vec<u32>>,
}

impl RootedForest {
    pub fn parent(&self, v: u32) -> Option<u32> {
        self.parent[v as usize]
    }

    pub fn children(&self, v: u32) -> &[u32] {
        &self.children[v as usize]
    }

    /// Total number of forest vertices.
    pub fn len(&self) -> usize {
        self.trees.iter().map(|t| t.post_order.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }
}
