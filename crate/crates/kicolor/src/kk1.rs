//! The (k,k-1)-chromatic number via reduction to classic coloring: distinct
//! k-sets behave like atomic colors when neighbors merely have to differ, so
//! chi_k^{k-1}(G) is the least q with binom(q,k) >= chi(G).
//!
//! The classic chromatic number is computed exactly by inclusion-exclusion
//! over the subset lattice: G is t-colorable iff
//! sum over X of (-1)^{n-|X|} s(X)^t is positive, where s(X) counts the
//! independent sets contained in X.

use num_bigint::BigUint;

use crate::colorset::binomial;
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Subset-lattice tables get out of hand beyond this many vertices.
pub const MAX_CHROMATIC_VERTICES: u32 = 20;

/// Result of the reduction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChromaticResult {
    /// Classic chromatic number chi(G).
    pub chi: u32,
    /// The derived (k,k-1)-chromatic number.
    pub q_kk1: u32,
    pub k: u32,
}

/// Exact classic chromatic number, O*(2^n).
pub fn chromatic_classic(g: &Graph) -> Result<u32> {
    let n = g.vertex_count();
    if n == 0 {
        return Ok(0);
    }
    if n > MAX_CHROMATIC_VERTICES {
        return Err(Error::resource(format!(
            "exact chromatic number supports at most {MAX_CHROMATIC_VERTICES} vertices, got {n}"
        )));
    }
    if g.edge_count() == 0 {
        return Ok(1);
    }
    let nb: Vec<usize> = g
        .vertices()
        .map(|v| {
            g.neighbors(v)
                .iter()
                .fold(0usize, |acc, &u| acc | (1 << u))
        })
        .collect();

    // s[X] = number of independent sets (including the empty one) inside X.
    let size = 1usize << n;
    let mut s = vec![0u64; size];
    s[0] = 1;
    for x in 1..size {
        let v = x.trailing_zeros() as usize;
        let without = x & !(1 << v);
        s[x] = s[without] + s[without & !nb[v]];
    }

    for t in 1..n {
        if coverable_with(&s, n, t) {
            return Ok(t);
        }
    }
    Ok(n)
}

/// Is V coverable by t independent sets? Inclusion-exclusion over the missed
/// vertex set; positive and negative parts are accumulated separately in
/// arbitrary precision (terms reach s_max^t, far beyond 64 bits at n = 20).
fn coverable_with(s: &[u64], n: u32, t: u32) -> bool {
    let mut positive = BigUint::from(0u32);
    let mut negative = BigUint::from(0u32);
    for (x, &sx) in s.iter().enumerate() {
        if sx == 0 {
            continue;
        }
        let term = pow_u64(sx, t);
        if (n - (x.count_ones())).is_multiple_of(2) {
            positive += term;
        } else {
            negative += term;
        }
    }
    positive > negative
}

fn pow_u64(base: u64, exp: u32) -> BigUint {
    let b = BigUint::from(base);
    let mut acc = BigUint::from(1u32);
    let mut e = exp;
    let mut sq = b;
    while e > 0 {
        if e & 1 == 1 {
            acc *= &sq;
        }
        e >>= 1;
        if e > 0 {
            sq = &sq * &sq;
        }
    }
    acc
}

/// The (k,k-1)-chromatic number: chi(G) via the exact engine, then the least
/// q with binom(q,k) >= chi(G).
pub fn chi_k_kminus1(g: &Graph, k: u32) -> Result<ChromaticResult> {
    if k == 0 {
        return Err(Error::domain("set size k must be at least 1"));
    }
    let chi = chromatic_classic(g)?;
    let mut q = 0u32;
    while binomial(u64::from(q), u64::from(k)) < u128::from(chi) {
        q += 1;
    }
    debug_assert!(q == 0 || binomial(u64::from(q - 1), u64::from(k)) < u128::from(chi));
    Ok(ChromaticResult { chi, q_kk1: q, k })
}
