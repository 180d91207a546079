//! Constructive NP-hardness machinery: builds a graph from an exact-3-CNF
//! formula that is (2k+i, k, 0)-colorable iff the formula is satisfiable,
//! translates satisfying assignments to proper colorings and back, and
//! implements the complement lift between (2k+i,k,0)- and
//! (2k+i,k+i,i)-colorings.
//!
//! Block layout, writing q = 2k+i:
//! - two designated vertices `u` and `w`;
//! - a shared block `A` labeled by the k-subsets of [q] containing both or
//!   neither of {2k, 2k+1} (these labels are invariant under swapping the
//!   colors 2k and 2k+1);
//! - per variable p a block `B_p` labeled by the remaining k-subsets, with
//!   the literal vertices x_p = [k-1]+{2k} and not-x_p = [k-1]+{2k+1};
//!   `A + B_p` induces a Kneser graph K(q,k);
//! - per clause j three selector vertices `z_j` wired to w, to the negations
//!   of the clause literals and to `t_j`, plus a full Kneser copy `Gamma_j`
//!   whose canonical totally independent 3-set is `t_j`;
//! - guard sets U' and W' (i-1 vertices each, empty when i = 1) wired to
//!   u/w and to the z/t vertices.

use std::collections::BTreeMap;

use crate::coloring::{is_proper, Coloring, Params};
use crate::colorset::{ColorSet, SetFamily};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::kneser::canonical_ti3set_labels;

/// An exact-3-CNF formula: every clause has exactly three literals, signed
/// 1-based variable indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CnfFormula {
    num_vars: u32,
    clauses: Vec<[i32; 3]>,
}

impl CnfFormula {
    pub fn new(num_vars: u32, clauses: Vec<[i32; 3]>) -> Result<Self> {
        for clause in &clauses {
            for &lit in clause {
                if lit == 0 || lit.unsigned_abs() > num_vars {
                    return Err(Error::domain(format!(
                        "literal {lit} outside the 1..{num_vars} variable range"
                    )));
                }
            }
        }
        Ok(CnfFormula { num_vars, clauses })
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn clauses(&self) -> &[[i32; 3]] {
        &self.clauses
    }

    /// Parses DIMACS CNF: `c` comments, a `p cnf <vars> <clauses>` header,
    /// then whitespace-separated literals with `0` terminating each clause.
    /// Clauses that do not have exactly three literals are a domain error.
    pub fn parse_dimacs(text: &str) -> Result<Self> {
        let mut num_vars: Option<u32> = None;
        let mut clauses: Vec<[i32; 3]> = Vec::new();
        let mut current: Vec<i32> = Vec::new();
        let mut last_line = 1;
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            last_line = lineno;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('c') {
                continue;
            }
            if line.starts_with('p') {
                if num_vars.is_some() {
                    return Err(Error::parse(lineno, "duplicate problem line"));
                }
                let mut tok = line.split_whitespace();
                let _p = tok.next();
                if tok.next() != Some("cnf") {
                    return Err(Error::parse(lineno, "expected 'p cnf <vars> <clauses>'"));
                }
                let nv: u32 = tok
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| Error::parse(lineno, "malformed variable count"))?;
                let _nc: u64 = tok
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| Error::parse(lineno, "malformed clause count"))?;
                num_vars = Some(nv);
                continue;
            }
            let nv = num_vars
                .ok_or_else(|| Error::parse(lineno, "clause data before the problem line"))?;
            for tok in line.split_whitespace() {
                let lit: i32 = tok
                    .parse()
                    .map_err(|_| Error::parse(lineno, format!("malformed literal '{tok}'")))?;
                if lit == 0 {
                    let clause: [i32; 3] = current.as_slice().try_into().map_err(|_| {
                        Error::domain(format!(
                            "clause {} has {} literals; exactly 3 are required",
                            clauses.len() + 1,
                            current.len()
                        ))
                    })?;
                    clauses.push(clause);
                    current.clear();
                } else {
                    if lit.unsigned_abs() > nv {
                        return Err(Error::parse(
                            lineno,
                            format!("literal {lit} outside the 1..{nv} variable range"),
                        ));
                    }
                    current.push(lit);
                }
            }
        }
        if num_vars.is_none() {
            return Err(Error::parse(last_line, "missing problem line"));
        }
        if !current.is_empty() {
            return Err(Error::parse(last_line, "unterminated clause"));
        }
        CnfFormula::new(num_vars.unwrap(), clauses)
    }

    pub fn evaluate(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|clause| {
            clause.iter().any(|&lit| {
                let value = assignment[(lit.unsigned_abs() - 1) as usize];
                if lit > 0 {
                    value
                } else {
                    !value
                }
            })
        })
    }

    /// All satisfying assignments, by exhaustive enumeration.
    pub fn satisfying_assignments(&self) -> Result<Vec<Vec<bool>>> {
        if self.num_vars > 20 {
            return Err(Error::resource(format!(
                "exhaustive satisfiability supports at most 20 variables, got {}",
                self.num_vars
            )));
        }
        let mut out = Vec::new();
        for mask in 0u32..(1 << self.num_vars) {
            let assignment: Vec<bool> = (0..self.num_vars).map(|p| mask & (1 << p) != 0).collect();
            if self.evaluate(&assignment) {
                out.push(assignment);
            }
        }
        Ok(out)
    }

    pub fn is_satisfiable(&self) -> Result<bool> {
        Ok(!self.satisfying_assignments()?.is_empty())
    }
}

/// Vertices of one variable block.
#[derive(Clone, Debug)]
pub struct VarBlock {
    /// The vertex labeled [k-1] + {2k}, read as the positive literal.
    pub pos: u32,
    /// The vertex labeled [k-1] + {2k+1}.
    pub neg: u32,
    /// All block vertices in label order (pos and neg included).
    pub members: Vec<u32>,
}

/// Vertices of one clause block.
#[derive(Clone, Debug)]
pub struct ClauseBlock {
    /// Selector vertices z_1, z_2, z_3 for the three literal positions.
    pub z: [u32; 3],
    /// The full Kneser copy, in label order.
    pub block: Vec<u32>,
    /// The canonical totally independent 3-set inside the block.
    pub t: [u32; 3],
}

/// Role map of a built gadget.
#[derive(Clone, Debug)]
pub struct GadgetRoles {
    pub u: u32,
    pub w: u32,
    pub u_prime: u32,
    pub w_prime: u32,
    /// The shared block A, in label order.
    pub core: Vec<u32>,
    /// U': blocks the colors 2k+2..2k+i at u. Empty when i = 1.
    pub u_guards: Vec<u32>,
    /// W': blocks the colors 2k+2..2k+i at w. Empty when i = 1.
    pub w_guards: Vec<u32>,
    pub variables: Vec<VarBlock>,
    pub clauses: Vec<ClauseBlock>,
}

/// The reduction graph for a formula, with role and label maps.
#[derive(Clone)]
pub struct GadgetGraph {
    pub graph: Graph,
    pub k: u32,
    pub i: u32,
    pub formula: CnfFormula,
    pub roles: GadgetRoles,
    labels: BTreeMap<u32, ColorSet>,
}

impl GadgetGraph {
    /// The palette size the reduction targets: a proper (q,k,0)-coloring
    /// with q = 2k+i exists iff the formula is satisfiable.
    pub fn q(&self) -> u32 {
        2 * self.k + self.i
    }

    pub fn label(&self, v: u32) -> Option<&ColorSet> {
        self.labels.get(&v)
    }

    pub fn labels(&self) -> impl Iterator<Item = (u32, &ColorSet)> {
        self.labels.iter().map(|(&v, c)| (v, c))
    }

    /// Text sidecar: the target q, `role <name> <vertices...>` lines and
    /// `label <vertex> {set}` lines, all 1-based.
    pub fn roles_sidecar(&self) -> String {
        use std::fmt::Write as _;
        let r = &self.roles;
        let mut out = String::new();
        let _ = writeln!(out, "q {}", self.q());
        let one = |v: u32| (v + 1).to_string();
        let many = |vs: &[u32]| {
            vs.iter()
                .map(|&v| (v + 1).to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        let _ = writeln!(out, "role u {}", one(r.u));
        let _ = writeln!(out, "role w {}", one(r.w));
        let _ = writeln!(out, "role u_prime {}", one(r.u_prime));
        let _ = writeln!(out, "role w_prime {}", one(r.w_prime));
        let _ = writeln!(out, "role a {}", many(&r.core));
        let _ = writeln!(out, "role u_guards {}", many(&r.u_guards));
        let _ = writeln!(out, "role w_guards {}", many(&r.w_guards));
        for (p, block) in r.variables.iter().enumerate() {
            let _ = writeln!(out, "role x_{} {}", p + 1, one(block.pos));
            let _ = writeln!(out, "role not_x_{} {}", p + 1, one(block.neg));
            let _ = writeln!(out, "role b_{} {}", p + 1, many(&block.members));
        }
        for (j, block) in r.clauses.iter().enumerate() {
            let _ = writeln!(out, "role z_{} {}", j + 1, many(&block.z));
            let _ = writeln!(out, "role gamma_{} {}", j + 1, many(&block.block));
            let _ = writeln!(out, "role t_{} {}", j + 1, many(&block.t));
        }
        for (v, set) in &self.labels {
            let _ = writeln!(out, "label {} {}", v + 1, set);
        }
        out
    }
}

/// Builds the reduction graph for the formula at parameters (k, i).
pub fn build_gadget(formula: &CnfFormula, k: u32, i: u32) -> Result<GadgetGraph> {
    if k == 0 || i == 0 {
        return Err(Error::domain("the reduction needs k >= 1 and i >= 1"));
    }
    let q = 2u64 * u64::from(k) + u64::from(i);
    if q > 64 {
        return Err(Error::UnsupportedPalette(q));
    }
    let q = q as u32;
    let family = SetFamily::enumerate(q, k)?;
    let both_or_neither = |set: &ColorSet| set.contains(2 * k) == set.contains(2 * k + 1);
    let core_labels: Vec<ColorSet> = family.iter().filter(both_or_neither).collect();
    let bvar_labels: Vec<ColorSet> = family.iter().filter(|s| !both_or_neither(s)).collect();

    let mut labels: BTreeMap<u32, ColorSet> = BTreeMap::new();
    let mut next = 0u32;
    let mut fresh = |count: usize| -> Vec<u32> {
        let ids: Vec<u32> = (next..next + count as u32).collect();
        next += count as u32;
        ids
    };

    let u = fresh(1)[0];
    let w = fresh(1)[0];
    let core = fresh(core_labels.len());
    for (&v, set) in core.iter().zip(&core_labels) {
        labels.insert(v, *set);
    }
    let vertex_of_core_label = |set: &ColorSet, core: &[u32]| -> Option<u32> {
        core_labels
            .iter()
            .position(|l| l == set)
            .map(|idx| core[idx])
    };

    let u_prime_label = ColorSet::from_colors(1..=k, q)?;
    let w_prime_label = ColorSet::from_colors(k..=2 * k - 1, q)?;
    let u_prime = vertex_of_core_label(&u_prime_label, &core)
        .expect("the set {1..k} contains neither 2k nor 2k+1");
    let w_prime = vertex_of_core_label(&w_prime_label, &core)
        .expect("the set {k..2k-1} contains neither 2k nor 2k+1");

    let mut u_guards = Vec::new();
    let mut w_guards = Vec::new();
    for c in 2 * k + 2..=q {
        let ug = ColorSet::from_colors((1..k).chain([c]), q)?;
        let wg = ColorSet::from_colors((k..=2 * k - 2).chain([c]), q)?;
        u_guards.push(vertex_of_core_label(&ug, &core).expect("guard labels sit in the core"));
        w_guards.push(vertex_of_core_label(&wg, &core).expect("guard labels sit in the core"));
    }

    let pos_label = ColorSet::from_colors((1..k).chain([2 * k]), q)?;
    let neg_label = ColorSet::from_colors((1..k).chain([2 * k + 1]), q)?;
    let mut variables = Vec::new();
    for _ in 0..formula.num_vars() {
        let members = fresh(bvar_labels.len());
        for (&v, set) in members.iter().zip(&bvar_labels) {
            labels.insert(v, *set);
        }
        let find = |target: &ColorSet| -> u32 {
            members[bvar_labels
                .iter()
                .position(|l| l == target)
                .expect("literal labels contain exactly one of 2k, 2k+1")]
        };
        variables.push(VarBlock {
            pos: find(&pos_label),
            neg: find(&neg_label),
            members,
        });
    }

    let ti_labels = canonical_ti3set_labels(q, k)?;
    let mut clause_blocks = Vec::new();
    for _ in 0..formula.clauses().len() {
        let z_ids = fresh(3);
        let block = fresh(family.len());
        for (&v, set) in block.iter().zip(family.iter()) {
            labels.insert(v, set);
        }
        let t = ti_labels.map(|l| {
            block[family.index_of(&l).expect("canonical labels are family members")]
        });
        clause_blocks.push(ClauseBlock {
            z: [z_ids[0], z_ids[1], z_ids[2]],
            block,
            t,
        });
    }

    let total = next;
    let mut edges: Vec<(u32, u32)> = Vec::new();

    // Kneser edges of A + B_p for every p (the shared A-A edges repeat per
    // block and deduplicate in the graph builder).
    for var in &variables {
        let block: Vec<u32> = core.iter().chain(&var.members).copied().collect();
        for (ai, &a) in block.iter().enumerate() {
            for &b in &block[ai + 1..] {
                if labels[&a].intersection_size(&labels[&b]) == 0 {
                    edges.push((a, b));
                }
            }
        }
    }
    // u/w wiring.
    edges.push((u, w));
    edges.push((u, u_prime));
    edges.push((w, w_prime));
    for &g in &u_guards {
        edges.push((u, g));
    }
    for &g in &w_guards {
        edges.push((w, g));
    }
    // Clause wiring.
    for (j, cb) in clause_blocks.iter().enumerate() {
        for &z in &cb.z {
            edges.push((w, z));
        }
        for (slot, &lit) in formula.clauses()[j].iter().enumerate() {
            let var = &variables[(lit.unsigned_abs() - 1) as usize];
            let negation_vertex = if lit > 0 { var.neg } else { var.pos };
            edges.push((cb.z[slot], negation_vertex));
        }
        for (ai, &a) in cb.block.iter().enumerate() {
            for &b in &cb.block[ai + 1..] {
                if labels[&a].intersection_size(&labels[&b]) == 0 {
                    edges.push((a, b));
                }
            }
        }
        for slot in 0..3 {
            edges.push((cb.z[slot], cb.t[slot]));
        }
        for &z in &cb.z {
            for &g in &u_guards {
                edges.push((z, g));
            }
        }
        for &t in &cb.t {
            for &g in &w_guards {
                edges.push((t, g));
            }
        }
    }

    let graph = Graph::new(total, edges)?;

    let gadget = GadgetGraph {
        graph,
        k,
        i,
        formula: formula.clone(),
        roles: GadgetRoles {
            u,
            w,
            u_prime,
            w_prime,
            core,
            u_guards,
            w_guards,
            variables,
            clauses: clause_blocks,
        },
        labels,
    };
    validate_structure(&gadget)?;
    Ok(gadget)
}

fn validate_structure(gg: &GadgetGraph) -> Result<()> {
    let (k, i) = (u64::from(gg.k), u64::from(gg.i));
    let q = 2 * k + i;
    // Block sizes follow from the both-or-neither split of the k-subsets.
    let with_both = if k >= 2 {
        crate::colorset::binomial(q - 2, k - 2)
    } else {
        0
    };
    let core_len = with_both + crate::colorset::binomial(q - 2, k);
    let bvar_len = 2 * crate::colorset::binomial(q - 2, k - 1);
    let gamma_len = crate::colorset::binomial(q, k);
    debug_assert_eq!(core_len + bvar_len, gamma_len);
    let n = gg.formula.num_vars() as u128;
    let m = gg.formula.clauses().len() as u128;
    let expected = 2 + core_len + n * bvar_len + m * (3 + gamma_len);
    if u128::from(gg.graph.vertex_count()) != expected {
        return Err(Error::domain(format!(
            "gadget has {} vertices, expected {expected}",
            gg.graph.vertex_count()
        )));
    }
    let guard_len = (i - 1) as usize;
    if gg.roles.u_guards.len() != guard_len || gg.roles.w_guards.len() != guard_len {
        return Err(Error::domain("guard sets must have i-1 vertices each"));
    }
    Ok(())
}

/// Exchanges the colors 2k and 2k+1 within a set.
fn swap_pair(set: &ColorSet, k: u32, q: u32) -> ColorSet {
    let mut colors: Vec<u32> = set
        .colors()
        .map(|c| {
            if c == 2 * k {
                2 * k + 1
            } else if c == 2 * k + 1 {
                2 * k
            } else {
                c
            }
        })
        .collect();
    colors.sort_unstable();
    ColorSet::from_colors(colors, q).expect("swapping colors preserves the shape")
}

/// Applies a color permutation (1-based array of images) to a set.
fn apply_permutation(set: &ColorSet, sigma: &[u32], q: u32) -> ColorSet {
    let colors: Vec<u32> = set.colors().map(|c| sigma[(c - 1) as usize]).collect();
    ColorSet::from_colors(colors, q).expect("permutations preserve the shape")
}

/// Turns a satisfying assignment into a proper (2k+i, k, 0)-coloring of the
/// gadget: natural colorings per block with the colors 2k/2k+1 swapped in
/// the blocks of false variables, the clause selectors steered through the
/// position of the first true literal.
pub fn assignment_to_coloring(gg: &GadgetGraph, assignment: &[bool]) -> Result<Coloring> {
    if assignment.len() != gg.formula.num_vars() as usize {
        return Err(Error::domain(format!(
            "assignment covers {} variables, formula has {}",
            assignment.len(),
            gg.formula.num_vars()
        )));
    }
    if !gg.formula.evaluate(assignment) {
        return Err(Error::domain(
            "the assignment does not satisfy the formula; the translation needs a satisfying assignment",
        ));
    }
    let (k, q) = (gg.k, gg.q());
    let mut f = Coloring::new(q, k);
    for &v in &gg.roles.core {
        f.insert(v, *gg.label(v).unwrap())?;
    }
    for (p, block) in gg.roles.variables.iter().enumerate() {
        for &v in &block.members {
            let natural = gg.label(v).unwrap();
            let set = if assignment[p] {
                *natural
            } else {
                swap_pair(natural, k, q)
            };
            f.insert(v, set)?;
        }
    }
    f.insert(gg.roles.u, ColorSet::from_colors(k + 1..=2 * k, q)?)?;
    f.insert(
        gg.roles.w,
        ColorSet::from_colors((1..k).chain([2 * k + 1]), q)?,
    )?;

    let z_plain = ColorSet::from_colors(k..=2 * k - 1, q)?;
    let z_steered = ColorSet::from_colors((k..=2 * k - 2).chain([2 * k]), q)?;
    for (j, cb) in gg.roles.clauses.iter().enumerate() {
        let clause = gg.formula.clauses()[j];
        let true_slot = clause
            .iter()
            .position(|&lit| {
                let value = assignment[(lit.unsigned_abs() - 1) as usize];
                if lit > 0 {
                    value
                } else {
                    !value
                }
            })
            .expect("a satisfying assignment satisfies every clause");
        for (slot, &z) in cb.z.iter().enumerate() {
            f.insert(z, if slot == true_slot { z_steered } else { z_plain })?;
        }
        // Color the clause block naturally, then permute the last colors of
        // the totally independent 3-set so the steered slot frees 2k: slot
        // true_slot gets last color 2k-1, the others 2k and 2k+1 in order.
        let mut sigma: Vec<u32> = (1..=q).collect();
        let canonical_lasts = [2 * k - 1, 2 * k, 2 * k + 1];
        let mut assigned_lasts = vec![2 * k, 2 * k + 1].into_iter();
        for slot in 0..3 {
            let image = if slot == true_slot {
                2 * k - 1
            } else {
                assigned_lasts.next().unwrap()
            };
            sigma[(canonical_lasts[slot] - 1) as usize] = image;
        }
        for &v in &cb.block {
            f.insert(v, apply_permutation(gg.label(v).unwrap(), &sigma, q))?;
        }
    }

    let params = Params::new(q, k, 0)?;
    if !is_proper(&gg.graph, &f, &params) {
        return Err(Error::domain(
            "internal invariant violated: translated coloring is improper",
        ));
    }
    Ok(f)
}

/// Reads a satisfying assignment back out of a proper (2k+i, k, 0)-coloring:
/// the color permutation is recovered from the shared block's color classes,
/// the 2k/2k+1 ambiguity is resolved by requiring u's normalized set to
/// contain 2k, then each variable is read off its positive literal vertex.
pub fn coloring_to_assignment(gg: &GadgetGraph, f: &Coloring) -> Result<Vec<bool>> {
    let (k, q) = (gg.k, gg.q());
    let params = Params::new(q, k, 0)?;
    if !gg.graph.vertices().all(|v| f.contains(v)) {
        return Err(Error::domain("the coloring must cover every gadget vertex"));
    }
    if !is_proper(&gg.graph, f, &params) {
        return Err(Error::domain("the coloring is not a proper (q,k,0)-coloring"));
    }

    // Natural color classes on the shared block. The classes of 2k and 2k+1
    // coincide there (every core label has both or neither).
    let class_of = |color: u32, by: &dyn Fn(u32) -> ColorSet| -> Vec<u32> {
        gg.roles
            .core
            .iter()
            .copied()
            .filter(|&v| by(v).contains(color))
            .collect()
    };
    let natural = |v: u32| *gg.label(v).expect("core vertices are labeled");
    let given = |v: u32| *f.get(v).expect("totality checked above");

    let mut natural_classes: BTreeMap<Vec<u32>, Vec<u32>> = BTreeMap::new();
    for a in 1..=q {
        natural_classes
            .entry(class_of(a, &natural))
            .or_default()
            .push(a);
    }
    // sigma maps natural colors to the given coloring's colors.
    let mut sigma = vec![0u32; q as usize];
    let mut pair_candidates: Vec<u32> = Vec::new();
    for c in 1..=q {
        let class = class_of(c, &given);
        let Some(naturals) = natural_classes.get(&class) else {
            return Err(Error::domain(
                "no color permutation matches the shared block's classes",
            ));
        };
        match naturals.as_slice() {
            [a] => sigma[(*a - 1) as usize] = c,
            [a, b] if *a == 2 * k && *b == 2 * k + 1 => pair_candidates.push(c),
            _ => {
                return Err(Error::domain(
                    "ambiguous color-class match on the shared block",
                ))
            }
        }
    }
    if pair_candidates.len() != 2 {
        return Err(Error::domain(
            "expected exactly two colors matching the 2k/2k+1 classes",
        ));
    }
    // u's set contains sigma(2k) and not sigma(2k+1).
    let fu = given(gg.roles.u);
    let (c1, c2) = (pair_candidates[0], pair_candidates[1]);
    let (image_2k, image_2k1) = match (fu.contains(c1), fu.contains(c2)) {
        (true, false) => (c1, c2),
        (false, true) => (c2, c1),
        _ => {
            return Err(Error::domain(
                "u's set does not disambiguate the colors 2k and 2k+1",
            ))
        }
    };
    sigma[(2 * k - 1) as usize] = image_2k;
    sigma[(2 * k) as usize] = image_2k1;
    let mut images: Vec<u32> = sigma.clone();
    images.sort_unstable();
    images.dedup();
    if sigma.contains(&0) || images.len() != q as usize {
        return Err(Error::domain(
            "recovered color mapping is not a permutation",
        ));
    }

    let expect_true = apply_permutation(
        &ColorSet::from_colors((1..k).chain([2 * k]), q)?,
        &sigma,
        q,
    );
    let expect_false = apply_permutation(
        &ColorSet::from_colors((1..k).chain([2 * k + 1]), q)?,
        &sigma,
        q,
    );
    let mut assignment = Vec::with_capacity(gg.formula.num_vars() as usize);
    for block in &gg.roles.variables {
        let fx = given(block.pos);
        if fx == expect_true {
            assignment.push(true);
        } else if fx == expect_false {
            assignment.push(false);
        } else {
            return Err(Error::domain(
                "a literal vertex carries a set outside the two normalized options",
            ));
        }
    }
    if !gg.formula.evaluate(&assignment) {
        return Err(Error::domain(
            "internal invariant violated: decoded assignment does not satisfy the formula",
        ));
    }
    Ok(assignment)
}

/// Vertex-wise complement: a proper (q,k,i)-coloring becomes a proper
/// (q, q-k, q-2k+i)-coloring. For q = 2k+i this swaps (2k+i,k,0) and
/// (2k+i,k+i,i); applying it twice gives back the original.
pub fn complement_lift(g: &Graph, f: &Coloring, params: &Params) -> Result<(Coloring, Params)> {
    if f.q() != params.q || f.k() != params.k {
        return Err(Error::domain("coloring shape does not match params"));
    }
    if !is_proper(g, f, params) {
        return Err(Error::domain("complement lift needs a proper coloring"));
    }
    let new_k = params.q - params.k;
    let new_i = (params.q + params.i).saturating_sub(2 * params.k);
    let new_params = Params::new(params.q, new_k, new_i)?;
    let mut out = Coloring::new(params.q, new_k);
    for (v, set) in f.iter() {
        out.insert(v, set.complement())?;
    }
    debug_assert!(is_proper(g, &out, &new_params));
    Ok((out, new_params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use crate::solver::{self, SolveOptions};

    fn parse(text: &str) -> CnfFormula {
        CnfFormula::parse_dimacs(text).unwrap()
    }

    #[test]
    fn cnf_parse_examples() {
        let f = parse("c comment\np cnf 3 1\n1 -2 3 0\n");
        assert_eq!(f.num_vars(), 3);
        assert_eq!(f.clauses(), &[[1, -2, 3]]);

        assert!(matches!(
            CnfFormula::parse_dimacs("p cnf 2 1\n1 2 0\n"),
            Err(Error::Domain(_))
        ));

        let f = parse("p cnf 1 1\n1 1 -1 0\n");
        assert_eq!(f.clauses(), &[[1, 1, -1]]);

        assert!(matches!(
            CnfFormula::parse_dimacs("p cnf 1 1\n1 2 1 0\n"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            CnfFormula::parse_dimacs("p cnf 1 1\n1 1 1\n"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn clauses_spanning_lines() {
        let f = parse("p cnf 2 2\n1 2\n-1 0 2 -2\n1 0\n");
        assert_eq!(f.clauses(), &[[1, 2, -1], [2, -2, 1]]);
    }

    #[test]
    fn vertex_count_examples() {
        // k=1, i=1: 2 + 1 + 2n + 6m.
        let f = parse("p cnf 3 1\n1 -2 3 0\n");
        let gg = build_gadget(&f, 1, 1).unwrap();
        assert_eq!(gg.graph.vertex_count(), 15);

        let f = parse("p cnf 1 1\n1 1 1 0\n");
        let gg = build_gadget(&f, 1, 1).unwrap();
        assert_eq!(gg.graph.vertex_count(), 11);

        // k=2, i=1: 2 + binom(4,1) + 3*binom(4,2) + (3 + binom(5,2)) = 37.
        let f = parse("p cnf 3 1\n1 -2 3 0\n");
        let gg = build_gadget(&f, 2, 1).unwrap();
        assert_eq!(gg.graph.vertex_count(), 37);
    }

    #[test]
    fn blocks_are_kneser_copies() {
        let f = parse("p cnf 2 1\n1 -2 2 0\n");
        for (k, i) in [(1u32, 1u32), (2, 1), (1, 2), (2, 2)] {
            let gg = build_gadget(&f, k, i).unwrap();
            // Adjacency within each A+B_p and Gamma_j block must match label
            // disjointness exactly.
            let mut blocks: Vec<Vec<u32>> = Vec::new();
            for var in &gg.roles.variables {
                blocks.push(
                    gg.roles
                        .core
                        .iter()
                        .chain(&var.members)
                        .copied()
                        .collect(),
                );
            }
            for cb in &gg.roles.clauses {
                blocks.push(cb.block.clone());
            }
            for block in blocks {
                assert_eq!(
                    block.len() as u128,
                    crate::colorset::binomial(u64::from(2 * k + i), u64::from(k))
                );
                for (ai, &a) in block.iter().enumerate() {
                    for &b in &block[ai + 1..] {
                        let disjoint = gg
                            .label(a)
                            .unwrap()
                            .intersection_size(gg.label(b).unwrap())
                            == 0;
                        assert_eq!(gg.graph.has_edge(a, b), disjoint);
                    }
                }
            }
            // Guard sizes.
            assert_eq!(gg.roles.u_guards.len() as u32, i - 1);
            assert_eq!(gg.roles.w_guards.len() as u32, i - 1);
        }
    }

    #[test]
    fn translation_round_trip_small() {
        // psi = (x1 v x1 v x1) at k=1, i=1: 11 vertices, 3-colorable via the
        // satisfying assignment; the unsatisfying one is rejected.
        let f = parse("p cnf 1 1\n1 1 1 0\n");
        let gg = build_gadget(&f, 1, 1).unwrap();
        let coloring = assignment_to_coloring(&gg, &[true]).unwrap();
        let params = Params::new(3, 1, 0).unwrap();
        assert!(is_proper(&gg.graph, &coloring, &params));
        assert!(assignment_to_coloring(&gg, &[false]).is_err());
        assert_eq!(coloring_to_assignment(&gg, &coloring).unwrap(), vec![true]);
    }

    #[test]
    fn translation_colors_literals_by_convention() {
        // All-true assignment for (x1 v ~x2 v x3): true variables keep the
        // natural labels, so x_p gets [k-1]+{2k} and not-x_p gets
        // [k-1]+{2k+1}; false variables are swapped.
        let f = parse("p cnf 3 1\n1 -2 3 0\n");
        for (k, i) in [(1u32, 1u32), (2, 1)] {
            let gg = build_gadget(&f, k, i).unwrap();
            let q = gg.q();
            let coloring = assignment_to_coloring(&gg, &[true, true, true]).unwrap();
            assert!(is_proper(&gg.graph, &coloring, &Params::new(q, k, 0).unwrap()));
            let true_color = ColorSet::from_colors((1..k).chain([2 * k]), q).unwrap();
            let false_color = ColorSet::from_colors((1..k).chain([2 * k + 1]), q).unwrap();
            for block in &gg.roles.variables {
                assert_eq!(coloring.get(block.pos), Some(&true_color));
                assert_eq!(coloring.get(block.neg), Some(&false_color));
            }
            // A false variable swaps the pair.
            let coloring = assignment_to_coloring(&gg, &[true, false, true]).unwrap();
            let b2 = &gg.roles.variables[1];
            assert_eq!(coloring.get(b2.pos), Some(&false_color));
            assert_eq!(coloring.get(b2.neg), Some(&true_color));
        }
    }

    #[test]
    fn translation_round_trips_on_random_formulas() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for _ in 0..25 {
            let n = rng.gen_range(1..=3u32);
            let m = rng.gen_range(1..=2usize);
            let clauses: Vec<[i32; 3]> = (0..m)
                .map(|_| {
                    [0; 3].map(|_| {
                        let var = rng.gen_range(1..=n) as i32;
                        if rng.gen_bool(0.5) {
                            var
                        } else {
                            -var
                        }
                    })
                })
                .collect();
            let f = CnfFormula::new(n, clauses).unwrap();
            let gg = build_gadget(&f, 1, 1).unwrap();
            for assignment in f.satisfying_assignments().unwrap() {
                let coloring = assignment_to_coloring(&gg, &assignment).unwrap();
                let decoded = coloring_to_assignment(&gg, &coloring).unwrap();
                assert_eq!(decoded, assignment);
            }
        }
    }

    #[test]
    fn decoding_is_permutation_invariant() {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let f = parse("p cnf 2 2\n1 -2 2 0\n-1 2 2 0\n");
        let gg = build_gadget(&f, 1, 1).unwrap();
        let q = gg.q();
        for assignment in f.satisfying_assignments().unwrap() {
            let coloring = assignment_to_coloring(&gg, &assignment).unwrap();
            for _ in 0..4 {
                let mut perm: Vec<u32> = (1..=q).collect();
                perm.shuffle(&mut rng);
                let mut permuted = Coloring::new(q, gg.k);
                for (v, set) in coloring.iter() {
                    permuted.insert(v, apply_permutation(set, &perm, q)).unwrap();
                }
                let decoded = coloring_to_assignment(&gg, &permuted).unwrap();
                assert_eq!(decoded, assignment);
                assert!(gg.formula.evaluate(&decoded));
            }
        }
    }

    #[test]
    fn gadget_colorability_tracks_satisfiability() {
        // Unsatisfiable: (x1)(~x1). Satisfiable: (x1).
        let unsat = parse("p cnf 1 2\n1 1 1 0\n-1 -1 -1 0\n");
        let gg = build_gadget(&unsat, 1, 1).unwrap();
        let p = Params::new(3, 1, 0).unwrap();
        assert!(!solver::decide(&gg.graph, &p, &SolveOptions::default())
            .unwrap()
            .colorable);
        assert!(!oracle::brute_decide(&gg.graph, &p, oracle::DEFAULT_NODE_BUDGET).unwrap());

        let sat = parse("p cnf 1 1\n1 1 1 0\n");
        let gg = build_gadget(&sat, 1, 1).unwrap();
        assert!(solver::decide(&gg.graph, &p, &SolveOptions::default())
            .unwrap()
            .colorable);
    }

    #[test]
    fn reduction_tracks_satisfiability_at_higher_i() {
        // The i >= 2 shape differs from i = 1 (non-empty guard sets, a
        // larger shared block); check colorability == satisfiability end to
        // end at (k,i) = (1,2), q = 4.
        let p = Params::new(4, 1, 0).unwrap();
        let sat = parse("p cnf 1 1\n1 1 1 0\n");
        let gg = build_gadget(&sat, 1, 2).unwrap();
        assert_eq!(gg.roles.u_guards.len(), 1);
        assert!(solver::decide(&gg.graph, &p, &SolveOptions::default())
            .unwrap()
            .colorable);
        let coloring = assignment_to_coloring(&gg, &[true]).unwrap();
        assert_eq!(coloring_to_assignment(&gg, &coloring).unwrap(), vec![true]);

        let unsat = parse("p cnf 1 2\n1 1 1 0\n-1 -1 -1 0\n");
        let gg = build_gadget(&unsat, 1, 2).unwrap();
        assert!(!solver::decide(&gg.graph, &p, &SolveOptions::default())
            .unwrap()
            .colorable);
    }

    proptest::proptest! {
        #[test]
        fn cnf_parser_never_panics(text in "[cnfp 0-9\\-\\n]{0,120}") {
            let _ = CnfFormula::parse_dimacs(&text);
        }
    }

    #[test]
    fn complement_trick_carries_hardness_to_higher_k() {
        // The (2,1) instance of the general hardness statement: a graph is
        // (3,2,1)-colorable iff it is (3,1,0)-colorable, so the k=1,i=1
        // gadget also decides satisfiability at (q,k,i) = (3,2,1).
        let lifted = Params::new(3, 2, 1).unwrap();
        for (text, satisfiable) in [
            ("p cnf 1 1\n1 1 1 0\n", true),
            ("p cnf 1 2\n1 1 1 0\n-1 -1 -1 0\n", false),
            ("p cnf 2 2\n1 2 -2 0\n-1 -1 2 0\n", true),
        ] {
            let gg = build_gadget(&parse(text), 1, 1).unwrap();
            let colorable = solver::decide(&gg.graph, &lifted, &SolveOptions::default())
                .unwrap()
                .colorable;
            assert_eq!(colorable, satisfiable);
        }
    }

    #[test]
    fn build_rejects_invalid_parameters() {
        let f = parse("p cnf 1 1\n1 1 1 0\n");
        assert!(build_gadget(&f, 0, 1).is_err());
        assert!(build_gadget(&f, 1, 0).is_err());
        assert!(matches!(
            build_gadget(&f, 30, 10),
            Err(Error::UnsupportedPalette(70))
        ));
    }

    #[test]
    fn complement_lift_examples() {
        let triangle = Graph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let p = Params::new(3, 1, 0).unwrap();
        let mut f = Coloring::new(3, 1);
        for v in 0..3 {
            f.insert(v, ColorSet::from_colors([v + 1], 3).unwrap()).unwrap();
        }
        let (lifted, lifted_params) = complement_lift(&triangle, &f, &p).unwrap();
        assert_eq!(lifted_params, Params::new(3, 2, 1).unwrap());
        assert_eq!(lifted.get(0).unwrap().to_string(), "{2,3}");
        assert_eq!(lifted.get(1).unwrap().to_string(), "{1,3}");
        assert_eq!(lifted.get(2).unwrap().to_string(), "{1,2}");
        assert!(is_proper(&triangle, &lifted, &lifted_params));

        // Involution.
        let (back, back_params) = complement_lift(&triangle, &lifted, &lifted_params).unwrap();
        assert_eq!(back, f);
        assert_eq!(back_params, p);

        // Improper input is rejected.
        let mut bad = Coloring::new(3, 1);
        for v in 0..3 {
            bad.insert(v, ColorSet::from_colors([1], 3).unwrap()).unwrap();
        }
        assert!(complement_lift(&triangle, &bad, &p).is_err());
    }

    #[test]
    fn gadget_coloring_lifts() {
        let f = parse("p cnf 2 1\n1 -2 1 0\n");
        let gg = build_gadget(&f, 1, 1).unwrap();
        let p = Params::new(3, 1, 0).unwrap();
        let coloring = assignment_to_coloring(&gg, &[true, false]).unwrap();
        let (lifted, lifted_params) = complement_lift(&gg.graph, &coloring, &p).unwrap();
        assert_eq!(lifted_params, Params::new(3, 2, 1).unwrap());
        assert!(is_proper(&gg.graph, &lifted, &lifted_params));
    }
}
