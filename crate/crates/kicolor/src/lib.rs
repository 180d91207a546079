//! Exact solvers for the (q,k,i) set-coloring problem, where every vertex
//! receives a k-sized subset of a q-color palette and adjacent vertices may
//! share at most i colors.
//!
//! The pieces:
//! - [`colorset`]: k-subset algebra over palettes of up to 64 colors.
//! - [`graph`]: simple undirected graphs, DIMACS I/O, rooted forests.
//! - [`fvs`]: feedback vertex sets (verify / exact / greedy).
//! - [`solver`]: the FVS-parameterized decide / extract / count engine and
//!   the (k,i)-chromatic number.
//! - [`oracle`]: brute-force ground truth for small instances.
//! - [`kneser`]: Kneser graphs, natural colorings, uniqueness checking.
//! - [`kk1`]: the (k,k-1)-chromatic number via classic coloring.
//! - [`gadget`]: the 3-CNF reduction graph and its coloring translations.
//!
//! ```
//! use kicolor::{decide, is_proper, extract, KneserGraph, Params, SolveOptions};
//!
//! // The Petersen graph is K(5,2): it has a proper (5,2,0)-coloring but no
//! // (4,2,0)-coloring.
//! let petersen = KneserGraph::build(5, 2)?.graph;
//! let opts = SolveOptions::default();
//! assert!(decide(&petersen, &Params::new(5, 2, 0)?, &opts)?.colorable);
//! assert!(!decide(&petersen, &Params::new(4, 2, 0)?, &opts)?.colorable);
//!
//! let found = extract(&petersen, &Params::new(5, 2, 0)?, &opts)?
//!     .coloring
//!     .expect("colorable at q = 5");
//! assert!(is_proper(&petersen, &found, &Params::new(5, 2, 0)?));
//! # Ok::<(), kicolor::Error>(())
//! ```

#![forbid(unsafe_code)]

pub mod coloring;
pub mod colorset;
pub mod error;
pub mod fvs;
pub mod gadget;
pub mod graph;
pub mod kk1;
pub mod kneser;
pub mod oracle;
pub mod solver;

pub use coloring::{is_proper, Coloring, Params};
pub use colorset::{binomial, is_legal_pair, ColorSet, SetFamily};
pub use error::{Error, Result};
pub use fvs::{find_fvs_exact, find_fvs_greedy, verify_fvs, FvsMethod, FvsResult};
pub use gadget::{
    assignment_to_coloring, build_gadget, coloring_to_assignment, complement_lift, CnfFormula,
    GadgetGraph,
};
pub use graph::{Graph, RootedForest};
pub use kk1::{chi_k_kminus1, chromatic_classic, ChromaticResult};
pub use kneser::{check_natural_uniqueness, color_occurrence_profile, KneserGraph};
pub use oracle::{
    brute_chromatic, brute_count, brute_decide, max_independent_set_size, DEFAULT_NODE_BUDGET,
};
pub use solver::{
    chromatic_number_ki, compatible_sets, count_colorings, decide, extend_decide, extend_extract,
    extract, SolveOptions,
};
