//! Kneser graphs K(r,k): vertices are the k-subsets of [r], edges join
//! disjoint subsets. Includes the natural coloring (each vertex colored by
//! its own defining subset), canonical totally independent 3-sets, and a
//! small-scale exhaustive check that every proper (r,k,0)-coloring is a
//! color permutation of the natural one.

use std::collections::BTreeMap;

use crate::coloring::{is_proper, Coloring, Params};
use crate::colorset::{ColorSet, SetFamily};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::oracle;

/// A Kneser graph together with its vertex labels (canonical family order).
#[derive(Clone)]
pub struct KneserGraph {
    pub r: u32,
    pub k: u32,
    pub graph: Graph,
    labels: SetFamily,
}

impl KneserGraph {
    /// Builds K(r,k). Vertex order is the canonical family order, so vertex
    /// ids are family indices.
    pub fn build(r: u32, k: u32) -> Result<Self> {
        if k == 0 || r < k {
            return Err(Error::domain(format!(
                "Kneser graph needs r >= k >= 1, got r={r}, k={k}"
            )));
        }
        let labels = SetFamily::enumerate(r, k)?;
        let n = labels.len();
        let mut edges = Vec::new();
        for a in 0..n {
            for b in (a + 1)..n {
                if labels.get(a).intersection_size(&labels.get(b)) == 0 {
                    edges.push((a as u32, b as u32));
                }
            }
        }
        let graph = Graph::new(n as u32, edges)?;
        Ok(KneserGraph { r, k, graph, labels })
    }

    pub fn label(&self, v: u32) -> ColorSet {
        self.labels.get(v as usize)
    }

    pub fn vertex_of_label(&self, set: &ColorSet) -> Option<u32> {
        self.labels.index_of(set).map(|i| i as u32)
    }

    /// The natural coloring N(v) = label(v), a proper (r,k,0)-coloring.
    pub fn natural_coloring(&self) -> Coloring {
        let mut f = Coloring::new(self.r, self.k);
        for v in self.graph.vertices() {
            f.insert(v, self.label(v)).expect("labels match the shape");
        }
        f
    }

    /// Vertex ids of the canonical totally independent 3-set.
    pub fn canonical_ti3set(&self) -> Result<[u32; 3]> {
        let labels = canonical_ti3set_labels(self.r, self.k)?;
        Ok(labels.map(|l| {
            self.vertex_of_label(&l)
                .expect("canonical labels are k-subsets of [r]")
        }))
    }
}

/// Labels of the canonical totally independent 3-set of K(r,k): the three
/// k-subsets sharing {1,...,k-1} and ending in 2k-1, 2k, 2k+1 respectively.
/// Requires r >= 2k+1. For k = 1 the three vertices are pairwise adjacent
/// (the shared part is empty), but they still carry three distinct colors,
/// which is all downstream constructions rely on.
pub fn canonical_ti3set_labels(r: u32, k: u32) -> Result<[ColorSet; 3]> {
    if k == 0 || r < 2 * k + 1 {
        return Err(Error::domain(format!(
            "totally independent 3-set needs r >= 2k+1, got r={r}, k={k}"
        )));
    }
    let mut out = Vec::with_capacity(3);
    for last in [2 * k - 1, 2 * k, 2 * k + 1] {
        let colors: Vec<u32> = (1..k).chain([last]).collect();
        out.push(ColorSet::from_colors(colors, r)?);
    }
    Ok([out[0], out[1], out[2]])
}

/// Exhaustively checks that every proper (r,k,0)-coloring of K(r,k) equals
/// the natural coloring up to a permutation of [r]. Colorings are compared
/// via their canonicalized color-class partitions, which avoids iterating
/// all r! permutations.
pub fn check_natural_uniqueness(r: u32, k: u32, budget: u64) -> Result<bool> {
    if k == 0 || r < 2 * k + 1 {
        return Err(Error::domain(format!(
            "uniqueness check needs r >= 2k+1, got r={r}, k={k}"
        )));
    }
    let kg = KneserGraph::build(r, k)?;
    let family = SetFamily::enumerate(r, k)?;
    let natural: Vec<usize> = (0..family.len()).collect();
    let natural_partition = class_partition(&natural, &family, r);

    let params = Params::new(r, k, 0)?;
    let mut all_natural = true;
    oracle::enumerate_proper_colorings(&kg.graph, &params, budget, &mut |assign| {
        if class_partition(assign, &family, r) != natural_partition {
            all_natural = false;
            return false;
        }
        true
    })?;
    Ok(all_natural)
}

/// Color classes of an assignment, canonicalized: class c = sorted vertex
/// list whose set contains c, classes sorted lexicographically. Two
/// colorings are color permutations of each other iff their canonicalized
/// partitions coincide.
fn class_partition(assign: &[usize], family: &SetFamily, r: u32) -> Vec<Vec<u32>> {
    let mut classes: Vec<Vec<u32>> = vec![Vec::new(); r as usize];
    for (v, &c) in assign.iter().enumerate() {
        for color in family.get(c).colors() {
            classes[(color - 1) as usize].push(v as u32);
        }
    }
    classes.sort();
    classes
}

/// Per-color usage counts of a total proper (r,k,0)-coloring of the Kneser
/// graph. Errors when the coloring is partial or improper.
pub fn color_occurrence_profile(kg: &KneserGraph, f: &Coloring) -> Result<BTreeMap<u32, u64>> {
    let params = Params::new(kg.r, kg.k, 0)?;
    if f.len() != kg.graph.vertex_count() as usize
        || !kg.graph.vertices().all(|v| f.contains(v))
    {
        return Err(Error::domain(
            "occurrence profile needs a total coloring of the Kneser graph",
        ));
    }
    if !is_proper(&kg.graph, f, &params) {
        return Err(Error::domain(
            "occurrence profile needs a proper (r,k,0)-coloring",
        ));
    }
    let mut profile: BTreeMap<u32, u64> = (1..=kg.r).map(|c| (c, 0)).collect();
    for (_, set) in f.iter() {
        for color in set.colors() {
            *profile.get_mut(&color).unwrap() += 1;
        }
    }
    Ok(profile)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colorset::binomial;
    use crate::oracle::DEFAULT_NODE_BUDGET as B;

    #[test]
    fn k31_is_a_triangle() {
        let kg = KneserGraph::build(3, 1).unwrap();
        assert_eq!(kg.graph.vertex_count(), 3);
        assert_eq!(kg.graph.edge_count(), 3);
    }

    #[test]
    fn k52_is_petersen() {
        let kg = KneserGraph::build(5, 2).unwrap();
        assert_eq!(kg.graph.vertex_count(), 10);
        assert_eq!(kg.graph.edge_count(), 15);
        assert!(kg.graph.vertices().all(|v| kg.graph.degree(v) == 3));
    }

    #[test]
    fn odd_kneser_edge_counts() {
        // K(2k+1,k) is (k+1)-regular: n(k+1)/2 edges.
        for k in 1..=3u64 {
            let kg = KneserGraph::build(2 * k as u32 + 1, k as u32).unwrap();
            let n = binomial(2 * k + 1, k) as u64;
            assert_eq!(kg.graph.edge_count(), n * (k + 1) / 2);
        }
    }

    #[test]
    fn natural_coloring_is_proper() {
        for r in 1..=9u32 {
            for k in 1..=3.min(r) {
                let kg = KneserGraph::build(r, k).unwrap();
                let params = Params::new(r, k, 0).unwrap();
                assert!(is_proper(&kg.graph, &kg.natural_coloring(), &params));
            }
        }
    }

    #[test]
    fn ti3set_examples() {
        let labels = canonical_ti3set_labels(5, 2).unwrap();
        let as_strings: Vec<String> = labels.iter().map(|l| l.to_string()).collect();
        assert_eq!(as_strings, vec!["{1,3}", "{1,4}", "{1,5}"]);

        let labels = canonical_ti3set_labels(7, 3).unwrap();
        let as_strings: Vec<String> = labels.iter().map(|l| l.to_string()).collect();
        assert_eq!(as_strings, vec!["{1,2,5}", "{1,2,6}", "{1,2,7}"]);

        let labels = canonical_ti3set_labels(3, 1).unwrap();
        let as_strings: Vec<String> = labels.iter().map(|l| l.to_string()).collect();
        assert_eq!(as_strings, vec!["{1}", "{2}", "{3}"]);

        assert!(canonical_ti3set_labels(4, 2).is_err());
    }

    #[test]
    fn ti3set_adjacency() {
        // Non-adjacent for k >= 2 (the shared color blocks adjacency); for
        // k = 1 the triple is pairwise adjacent and only the
        // three-distinct-colors property survives.
        for (r, k) in [(5u32, 2u32), (7, 3), (6, 2)] {
            let kg = KneserGraph::build(r, k).unwrap();
            let [a, b, c] = kg.canonical_ti3set().unwrap();
            assert!(!kg.graph.has_edge(a, b));
            assert!(!kg.graph.has_edge(a, c));
            assert!(!kg.graph.has_edge(b, c));
        }
        let kg = KneserGraph::build(3, 1).unwrap();
        let [a, b, c] = kg.canonical_ti3set().unwrap();
        assert!(kg.graph.has_edge(a, b) && kg.graph.has_edge(a, c) && kg.graph.has_edge(b, c));
    }

    #[test]
    fn occurrence_profile_of_natural_colorings() {
        for (r, k) in [(5u32, 2u32), (3, 1), (7, 3)] {
            let kg = KneserGraph::build(r, k).unwrap();
            let profile = color_occurrence_profile(&kg, &kg.natural_coloring()).unwrap();
            let expected = binomial(u64::from(r) - 1, u64::from(k) - 1) as u64;
            assert_eq!(profile.len(), r as usize);
            assert!(profile.values().all(|&count| count == expected));
        }
    }

    #[test]
    fn occurrence_profile_rejects_improper() {
        let kg = KneserGraph::build(5, 2).unwrap();
        let mut f = kg.natural_coloring();
        // Recolor a vertex with its neighbor's set: improper.
        let disjoint = kg
            .graph
            .neighbors(0)
            .first()
            .map(|&u| kg.label(u))
            .unwrap();
        f.insert(0, disjoint).unwrap();
        assert!(color_occurrence_profile(&kg, &f).is_err());
    }

    #[test]
    fn kneser_lower_bound_via_oracle() {
        for (r, k) in [(3u32, 1u32), (4, 1), (5, 2)] {
            let kg = KneserGraph::build(r, k).unwrap();
            let below = Params::new(r - 1, k, 0).unwrap();
            assert!(!oracle::brute_decide(&kg.graph, &below, B).unwrap());
            let at = Params::new(r, k, 0).unwrap();
            assert!(oracle::brute_decide(&kg.graph, &at, B).unwrap());
        }
    }

    #[test]
    fn ekr_independent_set_sizes() {
        for (r, k) in [(4u32, 1u32), (5, 2), (6, 2), (7, 3)] {
            let kg = KneserGraph::build(r, k).unwrap();
            let mis = oracle::max_independent_set_size(&kg.graph, B).unwrap();
            assert_eq!(u128::from(mis), binomial(u64::from(r) - 1, u64::from(k) - 1));
        }
    }

    #[test]
    fn uniqueness_small() {
        assert!(check_natural_uniqueness(3, 1, B).unwrap());
        assert!(check_natural_uniqueness(4, 1, B).unwrap());
        assert!(check_natural_uniqueness(4, 2, B).is_err());
    }
}
