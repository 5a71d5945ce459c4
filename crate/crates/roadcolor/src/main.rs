use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use roadcolor::{
    check_f_cliques, enumerate_colorings, f_cliques, f_maximal_partition, files, is_synchronizing,
    shortest_sync_word, synchronizing_coloring, synchronizing_word, validate_agw, weight_vector,
    Automaton, Coloring, Error, GenMode, Graph, DEFAULT_ENUMERATION_LIMIT, DEFAULT_SUBSET_LIMIT,
};

/// Decide which directed multigraphs admit synchronizing colorings and
/// construct them.
#[derive(Parser)]
#[command(name = "roadcolor", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Rejection,
    Backbone,
}

impl From<ModeArg> for GenMode {
    fn from(m: ModeArg) -> GenMode {
        match m {
            ModeArg::Rejection => GenMode::Rejection,
            ModeArg::Backbone => GenMode::Backbone,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check whether a graph is strongly connected with constant out-degree
    /// and coprime cycle lengths.
    Validate {
        graph: PathBuf,
        /// Accepted for symmetry; the report is always JSON.
        #[arg(long)]
        json: bool,
    },
    /// Construct a synchronizing coloring of an eligible graph.
    Color {
        graph: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the coloring to a file instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Report each collapse level of the construction.
        #[arg(long)]
        trace: bool,
        #[arg(long)]
        json: bool,
    },
    /// Decide whether a coloring of a graph is synchronizing.
    Check {
        graph: PathBuf,
        coloring: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Produce a synchronizing word for a colored graph.
    Word {
        graph: PathBuf,
        coloring: PathBuf,
        /// Search for a minimum-length word instead of a greedy one.
        #[arg(long)]
        shortest: bool,
        /// Largest vertex count admitted to the subset search.
        #[arg(long, default_value_t = DEFAULT_SUBSET_LIMIT)]
        limit: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Report vertex weights and, given a coloring, the deadlock-image
    /// structure.
    Analyze {
        graph: PathBuf,
        coloring: Option<PathBuf>,
        /// Largest vertex count admitted to the subset searches.
        #[arg(long, default_value_t = DEFAULT_SUBSET_LIMIT)]
        limit: usize,
        #[arg(long)]
        json: bool,
    },
    /// Generate a random eligible graph.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = ModeArg::Backbone)]
        mode: ModeArg,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Exhaustively count synchronizing colorings of a small graph.
    Oracle {
        graph: PathBuf,
        /// Largest admissible number of colorings to sweep.
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_LIMIT)]
        limit: u64,
        #[arg(long)]
        json: bool,
    },
    /// Render a graph, optionally with edge colors, as Graphviz input.
    ExportDot {
        graph: PathBuf,
        coloring: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn exit_code_for(e: &Error) -> ExitCode {
    match e {
        Error::NotAgw(_)
        | Error::NotSynchronizing
        | Error::TooLarge(_)
        | Error::GenerationFailed { .. }
        | Error::NotStronglyConnected
        | Error::PreconditionViolated(_) => ExitCode::from(1),
        Error::InvalidParams(_) | Error::ShapeMismatch(_) | Error::Io(_) | Error::Json(_) => {
            ExitCode::from(2)
        }
        Error::InvariantViolated(_)
        | Error::AlgorithmStuck(_)
        | Error::NoStablePair
        | Error::NoBreakingEdge
        | Error::PartitionNotFound => ExitCode::from(3),
    }
}

fn write_or_print(path: Option<&PathBuf>, line: &str) -> roadcolor::Result<()> {
    match path {
        Some(p) => {
            let mut f = std::fs::File::create(p)?;
            f.write_all(line.as_bytes())?;
            Ok(())
        }
        None => {
            print!("{line}");
            Ok(())
        }
    }
}

fn letter_name(c: usize) -> String {
    if c < 26 {
        char::from(b'a' + c as u8).to_string()
    } else {
        format!("<{c}>")
    }
}

fn run(cmd: Command) -> roadcolor::Result<ExitCode> {
    match cmd {
        Command::Validate { graph, json: _ } => {
            let (g, _) = files::read_graph(&graph)?;
            let report = validate_agw(&g);
            println!("{}", serde_json::to_string(&report)?);
            Ok(if report.is_agw {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Color {
            graph,
            seed,
            output,
            trace,
            json,
        } => {
            let (g, _) = files::read_graph(&graph)?;
            let (report, tr) = synchronizing_coloring(&g, seed)?;
            let coloring_line = files::coloring_to_json_line(&report.coloring);
            if json {
                #[derive(Serialize)]
                struct Level<'a> {
                    n: usize,
                    class_count: usize,
                    cycle_edge_count: Option<usize>,
                    phase: &'a str,
                }
                #[derive(Serialize)]
                struct Out<'a> {
                    word_length: usize,
                    depth: usize,
                    verified: bool,
                    word: &'a [usize],
                    display: String,
                    #[serde(skip_serializing_if = "Option::is_none")]
                    colors: Option<&'a [Vec<usize>]>,
                    #[serde(skip_serializing_if = "Option::is_none")]
                    levels: Option<Vec<Level<'a>>>,
                }
                let levels = trace.then(|| {
                    tr.levels
                        .iter()
                        .map(|l| Level {
                            n: l.n,
                            class_count: l.class_count,
                            cycle_edge_count: l.cycle_edge_count,
                            phase: l.phase.name(),
                        })
                        .collect()
                });
                let out = Out {
                    word_length: report.word_length,
                    depth: tr.depth,
                    verified: report.verified,
                    word: &report.word.0,
                    display: report.word.to_string(),
                    colors: output.is_none().then(|| report.coloring.rows()),
                    levels,
                };
                println!("{}", serde_json::to_string(&out)?);
                if let Some(p) = &output {
                    files::write_coloring(p, &report.coloring)?;
                }
            } else if let Some(p) = &output {
                files::write_coloring(p, &report.coloring)?;
                if trace {
                    print_trace(&tr);
                }
                println!(
                    "synchronizing coloring written to {} (word length {}, depth {})",
                    p.display(),
                    report.word_length,
                    tr.depth
                );
            } else {
                print!("{coloring_line}");
                if trace {
                    print_trace(&tr);
                }
                eprintln!(
                    "synchronizing coloring found (word length {}, depth {})",
                    report.word_length, tr.depth
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Check {
            graph,
            coloring,
            json,
        } => {
            let (g, _) = files::read_graph(&graph)?;
            let c = files::read_coloring(&coloring, &g)?;
            let a = Automaton::new(g, c)?;
            let sync = is_synchronizing(&a)?;
            if json {
                println!("{{\"synchronizing\":{sync}}}");
            } else {
                println!(
                    "{}",
                    if sync {
                        "synchronizing"
                    } else {
                        "not synchronizing"
                    }
                );
            }
            Ok(if sync {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Word {
            graph,
            coloring,
            shortest,
            limit,
            output,
            json,
        } => {
            let (g, _) = files::read_graph(&graph)?;
            let c = files::read_coloring(&coloring, &g)?;
            let a = Automaton::new(g, c)?;
            let w = if shortest {
                shortest_sync_word(&a, limit)?.ok_or(Error::NotSynchronizing)?
            } else {
                synchronizing_word(&a)?
            };
            if json {
                #[derive(Serialize)]
                struct Out<'a> {
                    length: usize,
                    word: &'a [usize],
                    display: String,
                    shortest: bool,
                }
                let out = Out {
                    length: w.len(),
                    word: &w.0,
                    display: w.to_string(),
                    shortest,
                };
                println!("{}", serde_json::to_string(&out)?);
                if let Some(p) = &output {
                    files::write_word(p, &w)?;
                }
            } else {
                if let Some(p) = &output {
                    files::write_word(p, &w)?;
                }
                println!("{} ({})", w.len(), w);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Analyze {
            graph,
            coloring,
            limit,
            json,
        } => {
            let (g, _) = files::read_graph(&graph)?;
            let report = validate_agw(&g);
            let weights = weight_vector(&g)?;
            let colored = coloring.map(|p| files::read_coloring(&p, &g)).transpose()?;

            #[derive(Serialize)]
            struct Blocks {
                weight: String,
                blocks: Vec<Vec<usize>>,
            }
            #[derive(Serialize)]
            struct Out {
                report: roadcolor::AgwReport,
                weights: Vec<String>,
                total_weight: String,
                #[serde(skip_serializing_if = "Option::is_none")]
                deadlock_images: Option<Vec<Vec<usize>>>,
                #[serde(skip_serializing_if = "Option::is_none")]
                merge_partition: Option<Blocks>,
                #[serde(skip_serializing_if = "Option::is_none")]
                checks: Option<roadcolor::FCliqueReport>,
            }
            let mut out = Out {
                report,
                weights: weights.w.iter().map(|x| x.to_string()).collect(),
                total_weight: weights.total.to_string(),
                deadlock_images: None,
                merge_partition: None,
                checks: None,
            };
            if let Some(c) = colored {
                let dec = roadcolor::decompose(
                    &g,
                    &roadcolor::SpanningSubgraph::new(
                        (0..g.n()).map(|v| c.slot_of(v, 0)).collect(),
                    ),
                );
                let a = Automaton::new(g, c)?;
                out.deadlock_images = Some(f_cliques(&a, limit)?);
                let (best, blocks) = f_maximal_partition(&a, limit)?;
                out.merge_partition = Some(Blocks {
                    weight: best.to_string(),
                    blocks,
                });
                out.checks = Some(check_f_cliques(&a, Some(&dec), limit)?);
            }
            if json {
                println!("{}", serde_json::to_string(&out)?);
            } else {
                println!("eligible: {}", out.report.is_agw);
                if !out.report.is_agw {
                    println!("reason: {}", out.report.failure());
                }
                println!(
                    "weights: [{}] (total {})",
                    out.weights.join(", "),
                    out.total_weight
                );
                if let Some(images) = &out.deadlock_images {
                    println!("deadlock images: {images:?}");
                }
                if let Some(p) = &out.merge_partition {
                    println!(
                        "merge partition (block weight {}): {:?}",
                        p.weight, p.blocks
                    );
                }
                if let Some(checks) = &out.checks {
                    println!(
                        "checks: size_uniform={} closed_and_covering={} overlap_bound={:?} \
                         level_cross_section={:?} pass={}",
                        checks.size_uniform,
                        checks.closed_and_covering,
                        checks.overlap_bound,
                        checks.level_cross_section,
                        checks.pass
                    );
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Gen {
            n,
            k,
            seed,
            mode,
            output,
            json,
        } => {
            let g = roadcolor::random_agw(n, k, seed, mode.into())?;
            let line = files::graph_to_json_line(&g);
            write_or_print(output.as_ref(), &line)?;
            if output.is_some() && !json {
                println!("generated graph with {n} vertices of out-degree {k}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Oracle { graph, limit, json } => {
            let (g, _) = files::read_graph(&graph)?;
            if g.n() > 16 {
                return Err(Error::TooLarge(format!(
                    "exhaustive sweep over {} vertices is not feasible",
                    g.n()
                )));
            }
            let mut colorings = 0u64;
            let mut synchronizing = 0u64;
            let mut min_len: Option<usize> = None;
            for c in enumerate_colorings(&g, limit)? {
                let a = Automaton::new(g.clone(), c)?;
                colorings += 1;
                if is_synchronizing(&a)? {
                    synchronizing += 1;
                    let w = shortest_sync_word(&a, 16)?
                        .ok_or_else(|| Error::InvariantViolated("verdicts disagree".into()))?;
                    min_len = Some(min_len.map_or(w.len(), |m| m.min(w.len())));
                }
            }
            if json {
                #[derive(Serialize)]
                struct Out {
                    colorings: u64,
                    synchronizing: u64,
                    #[serde(skip_serializing_if = "Option::is_none")]
                    min_shortest_word_length: Option<usize>,
                }
                let out = Out {
                    colorings,
                    synchronizing,
                    min_shortest_word_length: min_len,
                };
                println!("{}", serde_json::to_string(&out)?);
            } else {
                match min_len {
                    Some(m) => println!(
                        "{colorings} colorings, {synchronizing} synchronizing, min shortest word length {m}"
                    ),
                    None => println!("{colorings} colorings, 0 synchronizing"),
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::ExportDot {
            graph,
            coloring,
            output,
        } => {
            let (g, names) = files::read_graph(&graph)?;
            let c = coloring.map(|p| files::read_coloring(&p, &g)).transpose()?;
            let dot = render_dot(&g, c.as_ref(), names.as_deref());
            write_or_print(output.as_ref(), &dot)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn print_trace(tr: &roadcolor::SynthesisTrace) {
    for (i, l) in tr.levels.iter().enumerate() {
        let cycles = match l.cycle_edge_count {
            Some(c) => format!(", {c} cycle edges"),
            None => String::new(),
        };
        println!(
            "level {i}: {} vertices -> {} classes via {}{}",
            l.n,
            l.class_count,
            l.phase.name(),
            cycles
        );
    }
}

fn render_dot(g: &Graph, c: Option<&Coloring>, names: Option<&[String]>) -> String {
    let mut out = String::from("digraph g {\n");
    for v in 0..g.n() {
        let label = match names {
            Some(ns) => ns[v].clone(),
            None => v.to_string(),
        };
        out.push_str(&format!("  {v} [label={:?}];\n", label));
    }
    for v in 0..g.n() {
        for (s, &t) in g.out_slots(v).iter().enumerate() {
            match c {
                Some(c) => out.push_str(&format!(
                    "  {v} -> {t} [label=\"{}\"];\n",
                    letter_name(c.color_of(v, s))
                )),
                None => out.push_str(&format!("  {v} -> {t};\n")),
            }
        }
    }
    out.push_str("}\n");
    out
}
