//! Feedback vertex sets: verification, a certified-minimum branch-and-reduce
//! search, and a greedy fallback for when the exact search is too expensive.

use std::fmt;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// How an FVS was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FvsMethod {
    Exact,
    Greedy,
    Supplied,
}

impl fmt::Display for FvsMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FvsMethod::Exact => write!(f, "exact"),
            FvsMethod::Greedy => write!(f, "greedy"),
            FvsMethod::Supplied => write!(f, "user-supplied"),
        }
    }
}

/// A verified feedback vertex set.
#[derive(Clone, Debug)]
pub struct FvsResult {
    /// Sorted vertex ids.
    pub vertices: Vec<u32>,
    pub method: FvsMethod,
    pub certified_minimum: bool,
}

impl FvsResult {
    /// Wraps a user-supplied set after verifying it.
    pub fn supplied(g: &Graph, vertices: &[u32]) -> Result<Self> {
        if !verify_fvs(g, vertices) {
            return Err(Error::domain(
                "the supplied vertex set is not a feedback vertex set",
            ));
        }
        let mut vertices = vertices.to_vec();
        vertices.sort_unstable();
        vertices.dedup();
        Ok(FvsResult {
            vertices,
            method: FvsMethod::Supplied,
            certified_minimum: false,
        })
    }
}

/// True iff `G[V \ S]` is acyclic. Vertices outside the graph make the set
/// invalid rather than erroring.
pub fn verify_fvs(g: &Graph, s: &[u32]) -> bool {
    let n = g.vertex_count() as usize;
    let mut removed = vec![false; n];
    for &v in s {
        if v as usize >= n {
            return false;
        }
        removed[v as usize] = true;
    }
    // Union-find over the surviving edges; a cycle shows up as a redundant union.
    let mut parent: Vec<u32> = (0..g.vertex_count()).collect();
    fn find(parent: &mut [u32], v: u32) -> u32 {
        let mut v = v;
        while parent[v as usize] != v {
            parent[v as usize] = parent[parent[v as usize] as usize];
            v = parent[v as usize];
        }
        v
    }
    for (u, v) in g.edges() {
        if removed[u as usize] || removed[v as usize] {
            continue;
        }
        let ru = find(&mut parent, u);
        let rv = find(&mut parent, v);
        if ru == rv {
            return false;
        }
        parent[ru as usize] = rv;
    }
    true
}

/// Finds a minimum feedback vertex set if one of size at most `budget`
/// exists; `None` otherwise. The result is certified minimum because target
/// sizes are tried in increasing order.
pub fn find_fvs_exact(g: &Graph, budget: u32) -> Option<FvsResult> {
    find_fvs_exact_capped(g, budget, u64::MAX).expect("uncapped search cannot hit the node cap")
}

/// As [`find_fvs_exact`] but aborts (outer `None`) after `node_cap` search
/// nodes, so automatic FVS selection can fall back to the greedy method.
pub(crate) fn find_fvs_exact_capped(
    g: &Graph,
    budget: u32,
    node_cap: u64,
) -> Option<Option<FvsResult>> {
    let mut search = Search {
        g,
        nodes: 0,
        node_cap,
    };
    let all_alive = vec![true; g.vertex_count() as usize];
    let none_excluded = vec![false; g.vertex_count() as usize];
    for target in 0..=budget {
        match search.search(all_alive.clone(), none_excluded.clone(), target) {
            Err(CapHit) => return None,
            Ok(Some(mut vertices)) => {
                vertices.sort_unstable();
                debug_assert!(verify_fvs(g, &vertices));
                return Some(Some(FvsResult {
                    vertices,
                    method: FvsMethod::Exact,
                    certified_minimum: true,
                }));
            }
            Ok(None) => {}
        }
    }
    Some(None)
}

struct CapHit;

struct Search<'g> {
    g: &'g Graph,
    nodes: u64,
    node_cap: u64,
}

impl Search<'_> {
    /// Is there an FVS of size <= budget avoiding `excluded`? Branches on a
    /// maximum-degree vertex: either it joins the FVS or it is excluded.
    fn search(
        &mut self,
        mut alive: Vec<bool>,
        mut excluded: Vec<bool>,
        budget: u32,
    ) -> std::result::Result<Option<Vec<u32>>, CapHit> {
        self.nodes += 1;
        if self.nodes > self.node_cap {
            return Err(CapHit);
        }

        peel_low_degree(self.g, &mut alive);
        if alive.iter().all(|&a| !a) {
            return Ok(Some(Vec::new()));
        }
        if budget == 0 {
            return Ok(None);
        }
        if has_cycle_within(self.g, &alive, &excluded) {
            return Ok(None);
        }
        if lower_bound(self.g, &alive) > budget {
            return Ok(None);
        }

        let v = match (0..self.g.vertex_count())
            .filter(|&v| alive[v as usize] && !excluded[v as usize])
            .max_by_key(|&v| (alive_degree(self.g, &alive, v), std::cmp::Reverse(v)))
        {
            Some(v) => v,
            // Only excluded vertices remain, and they carry a cycle.
            None => return Ok(None),
        };

        let mut without_v = alive.clone();
        without_v[v as usize] = false;
        if let Some(mut sol) = self.search(without_v, excluded.clone(), budget - 1)? {
            sol.push(v);
            return Ok(Some(sol));
        }

        excluded[v as usize] = true;
        self.search(std::mem::take(&mut alive), excluded, budget)
    }
}

fn alive_degree(g: &Graph, alive: &[bool], v: u32) -> usize {
    g.neighbors(v).iter().filter(|&&u| alive[u as usize]).count()
}

/// Repeatedly deletes vertices of degree <= 1; they lie on no cycle.
fn peel_low_degree(g: &Graph, alive: &mut [bool]) {
    let mut deg: Vec<usize> = (0..g.vertex_count())
        .map(|v| if alive[v as usize] { alive_degree(g, alive, v) } else { 0 })
        .collect();
    let mut queue: Vec<u32> = (0..g.vertex_count())
        .filter(|&v| alive[v as usize] && deg[v as usize] <= 1)
        .collect();
    while let Some(v) = queue.pop() {
        if !alive[v as usize] {
            continue;
        }
        alive[v as usize] = false;
        for &u in g.neighbors(v) {
            if alive[u as usize] {
                deg[u as usize] -= 1;
                if deg[u as usize] <= 1 {
                    queue.push(u);
                }
            }
        }
    }
}

fn has_cycle_within(g: &Graph, alive: &[bool], excluded: &[bool]) -> bool {
    let keep: Vec<bool> = alive
        .iter()
        .zip(excluded)
        .map(|(&a, &e)| a && e)
        .collect();
    let mut parent: Vec<u32> = (0..g.vertex_count()).collect();
    fn find(parent: &mut [u32], v: u32) -> u32 {
        let mut v = v;
        while parent[v as usize] != v {
            parent[v as usize] = parent[parent[v as usize] as usize];
            v = parent[v as usize];
        }
        v
    }
    for (u, v) in g.edges() {
        if !keep[u as usize] || !keep[v as usize] {
            continue;
        }
        let ru = find(&mut parent, u);
        let rv = find(&mut parent, v);
        if ru == rv {
            return true;
        }
        parent[ru as usize] = rv;
    }
    false
}

/// Lower bound on the FVS size of the alive subgraph: contract degree-2
/// chains on a scratch multigraph (forcing vertices that acquire self-loops),
/// then apply a top-degree excess bound per remaining component.
fn lower_bound(g: &Graph, alive: &[bool]) -> u32 {
    let n = g.vertex_count() as usize;
    // Multigraph scratch copy: multiplicity per neighbor, self-loops tracked
    // separately (a self-loop forces its vertex onto every FVS of the
    // contracted graph, which is sound for bounding).
    let mut adj: Vec<std::collections::BTreeMap<u32, u32>> = vec![Default::default(); n];
    let mut live = alive.to_vec();
    for (u, v) in g.edges() {
        if live[u as usize] && live[v as usize] {
            *adj[u as usize].entry(v).or_insert(0) += 1;
            *adj[v as usize].entry(u).or_insert(0) += 1;
        }
    }
    let mut forced = 0u32;
    let mut changed = true;
    while changed {
        changed = false;
        for v in 0..n as u32 {
            if !live[v as usize] {
                continue;
            }
            if adj[v as usize].contains_key(&v) {
                forced += 1;
                remove_vertex(&mut adj, &mut live, v);
                changed = true;
                continue;
            }
            let deg: u32 = adj[v as usize].values().sum();
            if deg <= 1 {
                remove_vertex(&mut adj, &mut live, v);
                changed = true;
            } else if deg == 2 {
                let ends: Vec<(u32, u32)> =
                    adj[v as usize].iter().map(|(&u, &m)| (u, m)).collect();
                remove_vertex(&mut adj, &mut live, v);
                match ends.as_slice() {
                    [(a, 2)] => {
                        // Double edge collapses to a self-loop.
                        *adj[*a as usize].entry(*a).or_insert(0) += 1;
                    }
                    [(a, 1), (b, 1)] => {
                        *adj[*a as usize].entry(*b).or_insert(0) += 1;
                        *adj[*b as usize].entry(*a).or_insert(0) += 1;
                    }
                    _ => unreachable!("degree-2 vertex with unexpected incidence"),
                }
                changed = true;
            }
        }
    }

    // Per-component excess bound: removing j vertices deletes at most the
    // top-j degree sum of edges, and a forest on the rest has < N_c - j edges.
    let mut seen = vec![false; n];
    let mut bound = forced;
    for start in 0..n as u32 {
        if !live[start as usize] || seen[start as usize] {
            continue;
        }
        let mut comp = Vec::new();
        let mut stack = vec![start];
        seen[start as usize] = true;
        while let Some(v) = stack.pop() {
            comp.push(v);
            for &u in adj[v as usize].keys() {
                if !seen[u as usize] {
                    seen[u as usize] = true;
                    stack.push(u);
                }
            }
        }
        let mut degs: Vec<u64> = comp
            .iter()
            .map(|&v| adj[v as usize].values().map(|&m| u64::from(m)).sum())
            .collect();
        let edges: u64 = degs.iter().sum::<u64>() / 2;
        let nc = comp.len() as u64;
        if edges < nc {
            continue;
        }
        degs.sort_unstable_by(|a, b| b.cmp(a));
        let mut removed_edges = 0u64;
        for (j, d) in degs.iter().enumerate() {
            removed_edges += d;
            let j = (j + 1) as u64;
            if edges.saturating_sub(removed_edges) <= (nc - j).saturating_sub(1) {
                bound += j as u32;
                break;
            }
        }
    }
    bound
}

fn remove_vertex(
    adj: &mut [std::collections::BTreeMap<u32, u32>],
    live: &mut [bool],
    v: u32,
) {
    live[v as usize] = false;
    let nbrs: Vec<u32> = adj[v as usize].keys().copied().collect();
    for u in nbrs {
        if u != v {
            adj[u as usize].remove(&v);
        }
    }
    adj[v as usize].clear();
}

/// Greedy FVS: repeatedly remove a maximum-degree vertex that lies on a
/// cycle, then drop redundant members. Valid but not necessarily minimum.
pub fn find_fvs_greedy(g: &Graph) -> FvsResult {
    let n = g.vertex_count() as usize;
    let mut alive = vec![true; n];
    let mut chosen: Vec<u32> = Vec::new();
    loop {
        peel_low_degree(g, &mut alive);
        if alive.iter().all(|&a| !a) {
            break;
        }
        let v = (0..g.vertex_count())
            .filter(|&v| alive[v as usize] && on_cycle(g, &alive, v))
            .max_by_key(|&v| (alive_degree(g, &alive, v), std::cmp::Reverse(v)))
            .expect("a non-empty peeled graph contains a cycle");
        alive[v as usize] = false;
        chosen.push(v);
    }
    // Minimalize: drop members whose removal keeps the set an FVS.
    chosen.sort_unstable();
    let mut idx = 0;
    while idx < chosen.len() {
        let mut candidate = chosen.clone();
        candidate.remove(idx);
        if verify_fvs(g, &candidate) {
            chosen = candidate;
        } else {
            idx += 1;
        }
    }
    debug_assert!(verify_fvs(g, &chosen));
    FvsResult {
        vertices: chosen,
        method: FvsMethod::Greedy,
        certified_minimum: false,
    }
}

/// Does `v` lie on a cycle of the alive subgraph? Equivalently, do two of its
/// neighbors share a component once `v` is removed?
fn on_cycle(g: &Graph, alive: &[bool], v: u32) -> bool {
    let nbrs: Vec<u32> = g
        .neighbors(v)
        .iter()
        .copied()
        .filter(|&u| alive[u as usize])
        .collect();
    if nbrs.len() < 2 {
        return false;
    }
    let n = g.vertex_count() as usize;
    let mut comp = vec![usize::MAX; n];
    let mut next_comp = 0;
    for &start in &nbrs {
        if comp[start as usize] != usize::MAX {
            return true;
        }
        let mut stack = vec![start];
        comp[start as usize] = next_comp;
        while let Some(x) = stack.pop() {
            for &u in g.neighbors(x) {
                if u == v || !alive[u as usize] || comp[u as usize] != usize::MAX {
                    continue;
                }
                comp[u as usize] = next_comp;
                stack.push(u);
            }
        }
        next_comp += 1;
    }
    false
}

/// Parses the FVS file format: one 1-based vertex index per line.
pub fn parse_fvs_file(text: &str, n: u32) -> Result<Vec<u32>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        let v: u32 = line
            .parse()
            .map_err(|_| Error::parse(idx + 1, format!("expected a vertex index, found '{line}'")))?;
        if v == 0 || v > n {
            return Err(Error::parse(
                idx + 1,
                format!("vertex {v} outside the 1..{n} range"),
            ));
        }
        out.push(v - 1);
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Renders an FVS as one 1-based index per line, ascending.
pub fn write_fvs_file(vertices: &[u32]) -> String {
    let mut sorted = vertices.to_vec();
    sorted.sort_unstable();
    let mut out = String::new();
    for v in sorted {
        out.push_str(&(v + 1).to_string());
        out.push('\n');
    }
    out
}
