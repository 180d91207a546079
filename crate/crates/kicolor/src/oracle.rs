//! Brute-force ground truth for small instances: exhaustive backtracking
//! over vertex-to-set assignments for decision/counting/chromatic number,
//! and a bitset branch-and-bound for maximum independent sets.
//!
//! Everything here is independent of the FVS-parameterized solver; the two
//! only share the graph and color-set types.

use num_bigint::BigUint;

use crate::coloring::Params;
use crate::colorset::SetFamily;
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Default node-expansion cap: failures are deterministic resource errors
/// rather than timeouts.
pub const DEFAULT_NODE_BUDGET: u64 = 100_000_000;

struct Budget {
    used: u64,
    cap: u64,
}

impl Budget {
    fn new(cap: u64) -> Self {
        Budget { used: 0, cap }
    }

    fn spend(&mut self) -> Result<()> {
        self.used += 1;
        if self.used > self.cap {
            Err(Error::resource(format!(
                "oracle exceeded its node budget of {} expansions",
                self.cap
            )))
        } else {
            Ok(())
        }
    }
}

/// Exhaustive decision: is there a proper (q,k,i)-coloring?
pub fn brute_decide(g: &Graph, params: &Params, budget: u64) -> Result<bool> {
    let family = SetFamily::enumerate(params.q, params.k)?;
    let mut budget = Budget::new(budget);
    for comp in binding_components(g, params) {
        let mut search = Backtracker::new(g, &family, params.i, comp);
        if search.count_up_to(1, &mut budget)? == 0 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Exhaustive count of all proper (q,k,i)-colorings.
pub fn brute_count(g: &Graph, params: &Params, budget: u64) -> Result<BigUint> {
    let family = SetFamily::enumerate(params.q, params.k)?;
    let mut budget = Budget::new(budget);
    let mut total = BigUint::from(1u32);
    for comp in binding_components(g, params) {
        let mut search = Backtracker::new(g, &family, params.i, comp);
        let c = search.count_up_to(u64::MAX, &mut budget)?;
        if c == 0 {
            return Ok(BigUint::from(0u32));
        }
        total *= BigUint::from(c);
    }
    Ok(total)
}

/// Least q >= k admitting a proper (q,k,i)-coloring, by upward scan. The
/// scan stops at `k(n+2)` (or the palette cap), which is never reached for
/// valid inputs.
pub fn brute_chromatic(g: &Graph, k: u32, i: u32, budget: u64) -> Result<u32> {
    if k == 0 {
        return Err(Error::domain("set size k must be at least 1"));
    }
    let n = g.vertex_count();
    if n == 0 {
        return Ok(k);
    }
    let stop = (u64::from(k) * u64::from(n + 2)).min(64) as u32;
    for q in k..=stop {
        if brute_decide(g, &Params::new(q, k, i)?, budget)? {
            return Ok(q);
        }
    }
    Err(Error::domain(format!(
        "no proper coloring found up to the q = {stop} stop"
    )))
}

/// Enumerates every proper (q,k,i)-coloring of the whole graph in a fixed
/// order (vertices by descending degree, family indices ascending) and hands
/// each to the visitor as a per-vertex family-index slice. The visitor
/// returns whether to keep enumerating.
pub fn enumerate_proper_colorings(
    g: &Graph,
    params: &Params,
    budget: u64,
    visit: &mut dyn FnMut(&[usize]) -> bool,
) -> Result<()> {
    let family = SetFamily::enumerate(params.q, params.k)?;
    let mut budget = Budget::new(budget);
    let comp: Vec<u32> = g.vertices().collect();
    let mut search = Backtracker::new(g, &family, params.i, comp);
    search.enumerate(&mut budget, visit)?;
    Ok(())
}

/// Connected components of the constraint graph. An edge constrains the
/// search only when some pair of k-sets is illegal, i.e. when `i < k`;
/// otherwise every vertex is its own component.
fn binding_components(g: &Graph, params: &Params) -> Vec<Vec<u32>> {
    let n = g.vertex_count() as usize;
    if params.i >= params.k {
        return (0..n as u32).map(|v| vec![v]).collect();
    }
    let mut seen = vec![false; n];
    let mut comps = Vec::new();
    for start in g.vertices() {
        if seen[start as usize] {
            continue;
        }
        let mut comp = Vec::new();
        let mut stack = vec![start];
        seen[start as usize] = true;
        while let Some(v) = stack.pop() {
            comp.push(v);
            for &u in g.neighbors(v) {
                if !seen[u as usize] {
                    seen[u as usize] = true;
                    stack.push(u);
                }
            }
        }
        comps.push(comp);
    }
    comps
}

struct Backtracker<'a> {
    g: &'a Graph,
    family: &'a SetFamily,
    tolerance: u32,
    /// Component vertices ordered by descending degree, then index.
    order: Vec<u32>,
    assignment: Vec<usize>,
}

impl<'a> Backtracker<'a> {
    fn new(g: &'a Graph, family: &'a SetFamily, tolerance: u32, mut comp: Vec<u32>) -> Self {
        comp.sort_unstable_by_key(|&v| (std::cmp::Reverse(g.degree(v)), v));
        Backtracker {
            g,
            family,
            tolerance,
            order: comp,
            assignment: vec![usize::MAX; g.vertex_count() as usize],
        }
    }

    fn candidate_fits(&self, v: u32, c: usize) -> bool {
        let cv = self.family.get(c);
        for &u in self.g.neighbors(v) {
            let cu = self.assignment[u as usize];
            if cu != usize::MAX && cv.intersection_size(&self.family.get(cu)) > self.tolerance {
                return false;
            }
        }
        true
    }

    /// Counts proper assignments of the component, stopping early once
    /// `limit` have been found.
    fn count_up_to(&mut self, limit: u64, budget: &mut Budget) -> Result<u64> {
        self.count_rec(0, limit, budget)
    }

    fn count_rec(&mut self, pos: usize, limit: u64, budget: &mut Budget) -> Result<u64> {
        if pos == self.order.len() {
            return Ok(1);
        }
        let v = self.order[pos];
        let mut found = 0u64;
        for c in 0..self.family.len() {
            budget.spend()?;
            if !self.candidate_fits(v, c) {
                continue;
            }
            self.assignment[v as usize] = c;
            found += self.count_rec(pos + 1, limit - found, budget)?;
            self.assignment[v as usize] = usize::MAX;
            if found >= limit {
                break;
            }
        }
        Ok(found)
    }

    fn enumerate(
        &mut self,
        budget: &mut Budget,
        visit: &mut dyn FnMut(&[usize]) -> bool,
    ) -> Result<bool> {
        self.enumerate_rec(0, budget, visit)
    }

    fn enumerate_rec(
        &mut self,
        pos: usize,
        budget: &mut Budget,
        visit: &mut dyn FnMut(&[usize]) -> bool,
    ) -> Result<bool> {
        if pos == self.order.len() {
            return Ok(visit(&self.assignment));
        }
        let v = self.order[pos];
        for c in 0..self.family.len() {
            budget.spend()?;
            if !self.candidate_fits(v, c) {
                continue;
            }
            self.assignment[v as usize] = c;
            let keep_going = self.enumerate_rec(pos + 1, budget, visit)?;
            self.assignment[v as usize] = usize::MAX;
            if !keep_going {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Exact maximum independent set size by branch and bound over neighbor
/// bitsets. Supports up to 64 vertices.
pub fn max_independent_set_size(g: &Graph, budget: u64) -> Result<u32> {
    let n = g.vertex_count();
    if n == 0 {
        return Ok(0);
    }
    if n > 64 {
        return Err(Error::resource(format!(
            "independent-set search supports at most 64 vertices, got {n}"
        )));
    }
    let nb: Vec<u64> = g
        .vertices()
        .map(|v| {
            g.neighbors(v)
                .iter()
                .fold(0u64, |acc, &u| acc | (1u64 << u))
        })
        .collect();
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut budget = Budget::new(budget);
    let mut best = 0u32;
    mis_rec(&nb, full, 0, &mut best, &mut budget)?;
    Ok(best)
}

fn mis_rec(nb: &[u64], cand: u64, size: u32, best: &mut u32, budget: &mut Budget) -> Result<()> {
    budget.spend()?;
    if size > *best {
        *best = size;
    }
    if cand == 0 || size + cand.count_ones() <= *best {
        return Ok(());
    }
    // Branch on the candidate with the most candidate neighbors; if even the
    // densest has none, the rest is an independent set and we take it whole.
    let mut pick = cand.trailing_zeros();
    let mut pick_deg = (nb[pick as usize] & cand).count_ones();
    let mut rest = cand & (cand - 1);
    while rest != 0 {
        let v = rest.trailing_zeros();
        rest &= rest - 1;
        let deg = (nb[v as usize] & cand).count_ones();
        if deg > pick_deg {
            pick = v;
            pick_deg = deg;
        }
    }
    if pick_deg == 0 {
        let total = size + cand.count_ones();
        if total > *best {
            *best = total;
        }
        return Ok(());
    }
    let bit = 1u64 << pick;
    mis_rec(nb, cand & !nb[pick as usize] & !bit, size + 1, best, budget)?;
    mis_rec(nb, cand & !bit, size, best, budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colorset::ColorSet;

    fn cycle(n: u32) -> Graph {
        Graph::new(n, (0..n).map(|v| (v, (v + 1) % n))).unwrap()
    }

    fn complete(n: u32) -> Graph {
        Graph::new(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)))).unwrap()
    }

    fn path(n: u32) -> Graph {
        Graph::new(n, (0..n.saturating_sub(1)).map(|v| (v, v + 1))).unwrap()
    }

    fn petersen() -> Graph {
        let fam = SetFamily::enumerate(5, 2).unwrap();
        let mut edges = Vec::new();
        for a in 0..fam.len() {
            for b in (a + 1)..fam.len() {
                if fam.get(a).intersection_size(&fam.get(b)) == 0 {
                    edges.push((a as u32, b as u32));
                }
            }
        }
        Graph::new(fam.len() as u32, edges).unwrap()
    }

    fn params(q: u32, k: u32, i: u32) -> Params {
        Params::new(q, k, i).unwrap()
    }

    const B: u64 = DEFAULT_NODE_BUDGET;

    #[test]
    fn decide_examples() {
        assert!(brute_decide(&complete(3), &params(3, 1, 0), B).unwrap());
        assert!(!brute_decide(&complete(3), &params(2, 1, 0), B).unwrap());
        assert!(brute_decide(&petersen(), &params(5, 2, 0), B).unwrap());
        assert!(!brute_decide(&petersen(), &params(4, 2, 0), B).unwrap());
    }

    #[test]
    fn count_examples() {
        let edgeless = Graph::new(2, []).unwrap();
        assert_eq!(brute_count(&edgeless, &params(2, 1, 0), B).unwrap(), BigUint::from(4u32));
        assert_eq!(brute_count(&path(2), &params(2, 1, 0), B).unwrap(), BigUint::from(2u32));
        assert_eq!(brute_count(&path(3), &params(3, 1, 0), B).unwrap(), BigUint::from(12u32));
    }

    #[test]
    fn chromatic_examples() {
        assert_eq!(brute_chromatic(&complete(3), 1, 0, B).unwrap(), 3);
        for k in 1..=3u32 {
            for i in 0..=k {
                let expected = if i == k { k } else { 2 * k - i };
                assert_eq!(brute_chromatic(&path(2), k, i, B).unwrap(), expected);
            }
        }
        assert_eq!(brute_chromatic(&cycle(5), 2, 0, B).unwrap(), 5);
    }

    #[test]
    fn count_positive_iff_decidable() {
        let g = cycle(5);
        for q in 1..=4u32 {
            for (k, i) in [(1, 0), (2, 0), (2, 1), (3, 1)] {
                let p = params(q, k, i);
                let d = brute_decide(&g, &p, B).unwrap();
                let c = brute_count(&g, &p, B).unwrap();
                assert_eq!(d, c > BigUint::from(0u32));
            }
        }
    }

    #[test]
    fn decide_monotone_in_q() {
        let g = petersen();
        let mut prev = false;
        for q in 2..=6 {
            let now = brute_decide(&g, &params(q, 2, 0), B).unwrap();
            assert!(!prev || now);
            prev = now;
        }
    }

    #[test]
    fn relabeling_invariance() {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let g = cycle(6);
        let p = params(3, 2, 1);
        let base_count = brute_count(&g, &p, B).unwrap();
        let base_mis = max_independent_set_size(&g, B).unwrap();
        for _ in 0..5 {
            let mut perm: Vec<u32> = (0..6).collect();
            perm.shuffle(&mut rng);
            let relabeled = Graph::new(
                6,
                g.edges().map(|(u, v)| (perm[u as usize], perm[v as usize])),
            )
            .unwrap();
            assert_eq!(brute_count(&relabeled, &p, B).unwrap(), base_count);
            assert_eq!(max_independent_set_size(&relabeled, B).unwrap(), base_mis);
        }
    }

    #[test]
    fn mis_examples() {
        assert_eq!(max_independent_set_size(&complete(4), B).unwrap(), 1);
        assert_eq!(max_independent_set_size(&Graph::new(5, []).unwrap(), B).unwrap(), 5);
        assert_eq!(max_independent_set_size(&petersen(), B).unwrap(), 4);
    }

    #[test]
    fn budget_exhaustion_is_an_error() {
        let g = complete(6);
        assert!(matches!(
            brute_count(&g, &params(6, 2, 1), 10),
            Err(Error::Resource(_))
        ));
        assert!(matches!(
            max_independent_set_size(&g, 2),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn nonbinding_edges_factor_out() {
        // i >= k: every pair is legal, so counts are pure powers.
        let g = complete(4);
        let c = brute_count(&g, &params(4, 2, 2), B).unwrap();
        assert_eq!(c, BigUint::from(6u32).pow(4));
    }

    #[test]
    fn enumerator_visits_each_proper_coloring_once() {
        let g = path(2);
        let p = params(2, 1, 0);
        let mut seen = Vec::new();
        enumerate_proper_colorings(&g, &p, B, &mut |assign| {
            seen.push(assign.to_vec());
            true
        })
        .unwrap();
        assert_eq!(seen.len(), 2);
        assert_ne!(seen[0], seen[1]);
        let fam = SetFamily::enumerate(2, 1).unwrap();
        for a in &seen {
            let c0 = fam.get(a[0]);
            let c1 = fam.get(a[1]);
            assert_eq!(ColorSet::intersection_size(&c0, &c1), 0);
        }
    }
}
