mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use kicolor::{
    brute_chromatic, brute_count, brute_decide, chi_k_kminus1, color_occurrence_profile, fvs,
    gadget, is_proper, max_independent_set_size, solver, Coloring, Error, Graph, KneserGraph,
    Params, SolveOptions, DEFAULT_NODE_BUDGET,
};

use report::{InputDigest, Report};

/// Exact (q,k,i) set-coloring toolkit: every vertex gets k colors from a
/// q-color palette, adjacent vertices share at most i.
#[derive(Parser)]
#[command(name = "kicolor", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Args)]
struct CommonOpts {
    /// Output format: human-readable text or a single JSON document.
    #[arg(long, value_enum, default_value = "text", global = true)]
    format: Format,
}

#[derive(Args)]
struct SolverOpts {
    /// Replay a feedback vertex set from a file (one 1-based vertex per line).
    #[arg(long)]
    fvs_file: Option<PathBuf>,
    /// Worker threads for the anchor-coloring enumeration.
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether the graph admits a proper (q,k,i)-coloring.
    Decide {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        q: u32,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        i: u32,
        #[command(flatten)]
        solver: SolverOpts,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Count all proper (q,k,i)-colorings exactly.
    Count {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        q: u32,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        i: u32,
        #[command(flatten)]
        solver: SolverOpts,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Produce a proper (q,k,i)-coloring file, if one exists.
    Extract {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        q: u32,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        i: u32,
        /// Where to write the coloring (`v <vertex> {colors}` lines).
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        solver: SolverOpts,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Compute the (k,i)-chromatic number.
    Chromatic {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        i: u32,
        #[command(flatten)]
        solver: SolverOpts,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Check a coloring file against a graph.
    Verify {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        coloring: PathBuf,
        #[arg(long)]
        q: u32,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        i: u32,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Compute a feedback vertex set.
    Fvs {
        #[arg(long)]
        graph: PathBuf,
        /// Also write the set as a replayable file (one 1-based vertex per
        /// line, for `--fvs-file`).
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Brute-force cross-checks on small instances.
    Oracle {
        #[arg(long, value_enum)]
        op: OracleOp,
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        q: Option<u32>,
        #[arg(long)]
        k: Option<u32>,
        #[arg(long)]
        i: Option<u32>,
        /// Node-expansion budget.
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        budget: u64,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Generate a Kneser graph K(r,k) plus its natural-coloring labels.
    Kneser {
        #[arg(long)]
        r: u32,
        #[arg(long)]
        k: u32,
        /// Where to write the DIMACS graph.
        #[arg(long)]
        out_graph: PathBuf,
        /// Where to write the label file (`v <vertex> {colors}` lines).
        #[arg(long)]
        out_labels: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// The (k,k-1)-chromatic number via classic coloring.
    Kk1 {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        k: u32,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Build the 3-CNF hardness gadget graph.
    Gadget {
        #[arg(long)]
        cnf: PathBuf,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        i: u32,
        /// Where to write the DIMACS graph.
        #[arg(long)]
        out_graph: PathBuf,
        /// Where to write the roles sidecar.
        #[arg(long)]
        out_roles: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OracleOp {
    Decide,
    Count,
    Chromatic,
    Mis,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Resource(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn read_file(path: &PathBuf) -> Result<(String, InputDigest), Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Domain(format!("cannot read {}: {e}", path.display())))?;
    let digest = InputDigest::of(path, &text);
    Ok((text, digest))
}

fn write_file(path: &PathBuf, contents: &str) -> Result<(), Error> {
    std::fs::write(path, contents)
        .map_err(|e| Error::Domain(format!("cannot write {}: {e}", path.display())))
}

fn load_graph(path: &PathBuf) -> Result<(Graph, InputDigest), Error> {
    let (text, digest) = read_file(path)?;
    Ok((Graph::parse_dimacs(&text)?, digest))
}

fn solve_options(g: &Graph, opts: &SolverOpts, inputs: &mut Vec<InputDigest>) -> Result<SolveOptions, Error> {
    let mut out = SolveOptions {
        fvs: None,
        threads: opts.threads,
    };
    if let Some(path) = &opts.fvs_file {
        let (text, digest) = read_file(path)?;
        inputs.push(digest);
        out.fvs = Some(fvs::parse_fvs_file(&text, g.vertex_count())?);
    }
    Ok(out)
}

fn run(command: Command) -> Result<(), Error> {
    let started = Instant::now();
    match command {
        Command::Decide { graph, q, k, i, solver: sopts, common } => {
            let (g, digest) = load_graph(&graph)?;
            let mut inputs = vec![digest];
            let options = solve_options(&g, &sopts, &mut inputs)?;
            let params = Params::new(q, k, i)?;
            let outcome = solver::decide(&g, &params, &options)?;
            Report::new("decide", inputs)
                .params_qki(q, k, i)
                .fvs(&outcome.fvs)
                .answer_bool("colorable", outcome.colorable)
                .finish(started, common.format)
        }
        Command::Count { graph, q, k, i, solver: sopts, common } => {
            let (g, digest) = load_graph(&graph)?;
            let mut inputs = vec![digest];
            let options = solve_options(&g, &sopts, &mut inputs)?;
            let params = Params::new(q, k, i)?;
            let outcome = solver::count_colorings(&g, &params, &options)?;
            Report::new("count", inputs)
                .params_qki(q, k, i)
                .fvs(&outcome.fvs)
                .answer_str("count", outcome.count.to_string())
                .finish(started, common.format)
        }
        Command::Extract { graph, q, k, i, out, solver: sopts, common } => {
            let (g, digest) = load_graph(&graph)?;
            let mut inputs = vec![digest];
            let options = solve_options(&g, &sopts, &mut inputs)?;
            let params = Params::new(q, k, i)?;
            let outcome = solver::extract(&g, &params, &options)?;
            let mut report = Report::new("extract", inputs)
                .params_qki(q, k, i)
                .fvs(&outcome.fvs)
                .answer_bool("colorable", outcome.coloring.is_some());
            if let Some(coloring) = &outcome.coloring {
                write_file(&out, &coloring.to_lines())?;
                report = report.artifact("coloring_path", &out);
            }
            report.finish(started, common.format)
        }
        Command::Chromatic { graph, k, i, solver: sopts, common } => {
            let (g, digest) = load_graph(&graph)?;
            let mut inputs = vec![digest];
            let options = solve_options(&g, &sopts, &mut inputs)?;
            let outcome = solver::chromatic_number_ki(&g, k, i, &options)?;
            let mut report = Report::new("chromatic", inputs).params_ki(k, i);
            if let Some(fvs) = &outcome.fvs {
                report = report.fvs(fvs);
            }
            report
                .answer_u64("chromatic_number", u64::from(outcome.q))
                .finish(started, common.format)
        }
        Command::Verify { graph, coloring, q, k, i, common } => {
            let (g, gdigest) = load_graph(&graph)?;
            let (ctext, cdigest) = read_file(&coloring)?;
            let f = Coloring::parse(&ctext, q, k)?;
            let params = Params::new(q, k, i)?;
            let proper = is_proper(&g, &f, &params);
            Report::new("verify", vec![gdigest, cdigest])
                .params_qki(q, k, i)
                .answer_bool("proper", proper)
                .finish(started, common.format)
        }
        Command::Fvs { graph, out, common } => {
            let (g, digest) = load_graph(&graph)?;
            let greedy = fvs::find_fvs_greedy(&g);
            let result = fvs::find_fvs_exact(&g, greedy.vertices.len() as u32).unwrap_or(greedy);
            let mut report = Report::new("fvs", vec![digest])
                .fvs(&result)
                .answer_str("fvs_file", fvs::write_fvs_file(&result.vertices));
            if let Some(path) = &out {
                write_file(path, &fvs::write_fvs_file(&result.vertices))?;
                report = report.artifact("fvs_path", path);
            }
            report.finish(started, common.format)
        }
        Command::Oracle { op, graph, q, k, i, budget, common } => {
            let (g, digest) = load_graph(&graph)?;
            let report = Report::new("oracle", vec![digest]);
            let need = |name: &str, v: Option<u32>| {
                v.ok_or_else(|| Error::Domain(format!("--{name} is required for this oracle op")))
            };
            match op {
                OracleOp::Decide => {
                    let params = Params::new(need("q", q)?, need("k", k)?, need("i", i)?)?;
                    let answer = brute_decide(&g, &params, budget)?;
                    report
                        .params_qki(params.q, params.k, params.i)
                        .answer_bool("colorable", answer)
                        .finish(started, common.format)
                }
                OracleOp::Count => {
                    let params = Params::new(need("q", q)?, need("k", k)?, need("i", i)?)?;
                    let answer = brute_count(&g, &params, budget)?;
                    report
                        .params_qki(params.q, params.k, params.i)
                        .answer_str("count", answer.to_string())
                        .finish(started, common.format)
                }
                OracleOp::Chromatic => {
                    let (k, i) = (need("k", k)?, need("i", i)?);
                    let answer = brute_chromatic(&g, k, i, budget)?;
                    report
                        .params_ki(k, i)
                        .answer_u64("chromatic_number", u64::from(answer))
                        .finish(started, common.format)
                }
                OracleOp::Mis => {
                    let answer = max_independent_set_size(&g, budget)?;
                    report
                        .answer_u64("max_independent_set", u64::from(answer))
                        .finish(started, common.format)
                }
            }
        }
        Command::Kneser { r, k, out_graph, out_labels, common } => {
            let kg = KneserGraph::build(r, k)?;
            write_file(&out_graph, &kg.graph.to_dimacs())?;
            write_file(&out_labels, &kg.natural_coloring().to_lines())?;
            // Sanity: the natural coloring's occurrence profile is uniform.
            let profile = color_occurrence_profile(&kg, &kg.natural_coloring())?;
            let per_color = profile.values().next().copied().unwrap_or(0);
            Report::new("kneser", vec![])
                .params_rk(r, k)
                .answer_u64("vertices", u64::from(kg.graph.vertex_count()))
                .answer_u64("edges", kg.graph.edge_count())
                .answer_u64("occurrences_per_color", per_color)
                .artifact("graph_path", &out_graph)
                .artifact("labels_path", &out_labels)
                .finish(started, common.format)
        }
        Command::Kk1 { graph, k, common } => {
            let (g, digest) = load_graph(&graph)?;
            let result = chi_k_kminus1(&g, k)?;
            let witness_at = kicolor::binomial(u64::from(result.q_kk1), u64::from(k));
            let witness_below = if result.q_kk1 > 0 {
                kicolor::binomial(u64::from(result.q_kk1) - 1, u64::from(k))
            } else {
                0
            };
            Report::new("kk1", vec![digest])
                .params_k(k)
                .answer_u64("chi_classic", u64::from(result.chi))
                .answer_u64("chromatic_number", u64::from(result.q_kk1))
                .answer_str(
                    "witness",
                    format!(
                        "binom({},{k}) = {witness_at} >= {} > {witness_below} = binom({},{k})",
                        result.q_kk1,
                        result.chi,
                        result.q_kk1.saturating_sub(1),
                    ),
                )
                .finish(started, common.format)
        }
        Command::Gadget { cnf, k, i, out_graph, out_roles, common } => {
            let (text, digest) = read_file(&cnf)?;
            let formula = gadget::CnfFormula::parse_dimacs(&text)?;
            let gg = gadget::build_gadget(&formula, k, i)?;
            write_file(&out_graph, &gg.graph.to_dimacs())?;
            write_file(&out_roles, &gg.roles_sidecar())?;
            Report::new("gadget", vec![digest])
                .params_ki(k, i)
                .answer_u64("vertices", u64::from(gg.graph.vertex_count()))
                .answer_u64("edges", gg.graph.edge_count())
                .answer_u64("expected_q", u64::from(gg.q()))
                .artifact("graph_path", &out_graph)
                .artifact("roles_path", &out_roles)
                .finish(started, common.format)
        }
    }
}
