//! The `synckit` command line.
//!
//! Exit status: 0 on success, 1 when a yes/no query answers "no" (or a
//! verification fails), 2 on usage, parse or precondition errors.

use crate::classification::{
    classify_colors, classify_partition, is_invariant, is_matched, join_table_report,
    quotient_class_report, top_nonweak, top_strong, ClassificationError, ColorClass,
    NeighborhoodKind, QuotientClassReport,
};
use crate::connectivity::{
    condensation, cumulative_in_k, in_neighborhood, in_reachability, rdc_decomposition,
    ReachabilityIndex,
};
use crate::dynamics::{
    check_invariance, check_locality, check_quotient_consistency, check_subsystem, evolve,
    sample_admissible, CheckOptions, Integrator,
};
use crate::network::Network;
use crate::partition::Partition;
use crate::synchrony::{
    cir_balanced, enumerate_balanced_with, is_balanced, is_exo_balanced, quotient_network,
    BalancedLattice, EnumerationOptions,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use serde_json::{json, Value};
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Discrete,
    Rk4,
}

/// Analyze synchrony patterns of weighted coupled cell networks.
#[derive(Debug, Parser)]
#[command(name = "synckit", version)]
pub struct Config {
    /// Network JSON file.
    #[arg(long, global = true)]
    pub network: Option<PathBuf>,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "text")]
    pub format: Format,
    /// Largest network to enumerate lattices for (default: $SYNCKIT_MAX_CELLS or 12).
    #[arg(long, global = true)]
    pub max_cells: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct PartitionArg {
    /// Partition such as "12/45" (colors split by '/', cells by ',').
    #[arg(long)]
    pub partition: String,
}

#[derive(Debug, Clone, Args)]
pub struct NumericArgs {
    /// Seed of the sampled admissible function.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of random initial conditions.
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    /// Steps of the discrete map.
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    #[arg(long, value_enum, default_value = "discrete")]
    pub mode: Mode,
    /// RK4 step size.
    #[arg(long, default_value_t = 1e-3)]
    pub h: f64,
    /// RK4 time horizon.
    #[arg(long, default_value_t = 1.0)]
    pub horizon: f64,
    /// Tolerance (default 1e-9 discrete, 1e-6 RK4).
    #[arg(long)]
    pub tol: Option<f64>,
    /// Use couplings that ignore inputs in the receiver's own state.
    #[arg(long)]
    pub exo: bool,
}

impl NumericArgs {
    fn integrator(&self) -> Integrator {
        match self.mode {
            Mode::Discrete => Integrator::discrete(self.steps),
            Mode::Rk4 => Integrator::rk4(self.h, self.horizon),
        }
    }

    fn options(&self) -> CheckOptions {
        let integrator = self.integrator();
        CheckOptions {
            trials: self.trials,
            integrator,
            tol: self.tol.unwrap_or(if integrator.is_discrete() { 1e-9 } else { 1e-6 }),
            seed: self.seed,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Strongly connected components.
    Scc,
    /// Component graph with its edges and roots.
    Condense,
    /// Root components.
    Roots,
    /// Classes of cells reached by the same roots.
    Rdc,
    /// Upstream cells of one cell (all of them, or within --k steps).
    Reach {
        #[arg(long)]
        cell: String,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Is the partition balanced?
    Balanced(PartitionArg),
    /// Coarsest balanced refinement.
    Cir(PartitionArg),
    /// All balanced partitions with their Hasse diagram.
    Lattice {
        #[arg(long)]
        dot: bool,
    },
    /// Quotient network over a balanced partition.
    Quotient {
        #[command(flatten)]
        partition: PartitionArg,
        /// Write the quotient network file here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Is the partition invariant for same-state-insensitive couplings?
    Exo(PartitionArg),
    /// Strong / rooted / weak class of each color and of the partition.
    Classify(PartitionArg),
    /// Do same-color cells see the same colors upstream?
    Matched {
        #[command(flatten)]
        partition: PartitionArg,
        /// n, v, vk:<k> or r.
        #[arg(long)]
        kind: String,
    },
    /// Does the neighborhood commute with the quotient?
    Invariant {
        #[command(flatten)]
        partition: PartitionArg,
        #[arg(long)]
        kind: String,
    },
    /// Join-class table of the lattice, or quotient-class table with --quotient.
    Tables {
        #[arg(long)]
        quotient: Option<String>,
    },
    /// Integrate a sampled admissible function.
    Simulate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        /// Comma-separated initial state, or "random".
        #[arg(long, default_value = "random")]
        x0: String,
        #[arg(long)]
        exo: bool,
        #[arg(long, value_enum, default_value = "discrete")]
        mode: Mode,
        #[arg(long, default_value_t = 1e-3)]
        h: f64,
        #[arg(long, default_value_t = 1.0)]
        horizon: f64,
    },
    /// Numerical checks.
    Verify {
        #[command(subcommand)]
        check: VerifyCommand,
    },
    /// GraphViz rendering of the network.
    ExportDot {
        #[arg(long)]
        partition: Option<String>,
    },
}

#[derive(Debug, Subcommand)]
pub enum VerifyCommand {
    /// States starting on the polydiagonal stay there.
    Invariance {
        #[command(flatten)]
        partition: PartitionArg,
        #[command(flatten)]
        numeric: NumericArgs,
    },
    /// A cell's first k+1 states ignore cells more than k steps upstream.
    Locality {
        #[arg(long)]
        cell: String,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[command(flatten)]
        numeric: NumericArgs,
    },
    /// The upstream subnetwork of a cell reproduces its dynamics.
    Subsystem {
        #[arg(long)]
        cell: String,
        #[command(flatten)]
        numeric: NumericArgs,
    },
    /// The quotient network reproduces dynamics on the polydiagonal.
    Quotient {
        #[command(flatten)]
        partition: PartitionArg,
        #[command(flatten)]
        numeric: NumericArgs,
    },
}

/// Failure that maps to exit status 2.
#[derive(Debug)]
struct Failure(String);

impl<E: std::error::Error> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

fn fail<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(msg.into()))
}

/// Result of a command: text to print and whether a query answered "no".
struct Output {
    body: String,
    negative: bool,
}

impl Output {
    fn ok(body: String) -> Self {
        Output {
            body,
            negative: false,
        }
    }

    fn verdict(body: String, yes: bool) -> Self {
        Output {
            body,
            negative: !yes,
        }
    }
}

/// Run with process arguments, writing to stdout and stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

/// Run with explicit output streams; returns the exit status.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match Config::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return if code == 0 { 0 } else { 2 };
        }
    };
    match execute(&config) {
        Ok(output) => {
            let _ = write!(out, "{}", output.body);
            if !output.body.ends_with('\n') {
                let _ = writeln!(out);
            }
            i32::from(output.negative)
        }
        Err(Failure(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
    }
}

fn pretty(value: &Value) -> String {
    serde_json::to_string_pretty(value).expect("values serialize")
}

fn set_text(net: &Network, cells: impl IntoIterator<Item = usize>) -> String {
    let ids: Vec<&str> = cells.into_iter().map(|c| net.id(c)).collect();
    format!("{{{}}}", ids.join(", "))
}

fn set_json(net: &Network, cells: impl IntoIterator<Item = usize>) -> Value {
    json!(cells.into_iter().map(|c| net.id(c)).collect::<Vec<_>>())
}

fn colors_json(net: &Network, p: &Partition) -> Value {
    json!(p
        .colors()
        .into_iter()
        .map(|c| set_json(net, c))
        .collect::<Vec<_>>())
}

fn cell_index(net: &Network, id: &str) -> Result<usize, Failure> {
    net.index_of(id)
        .ok_or_else(|| Failure(format!("unknown cell '{id}'")))
}

fn parse_partition(net: &Network, spec: &str) -> Result<Partition, Failure> {
    Ok(Partition::parse_spec(spec, net.ids())?)
}

fn parse_kind(kind: &str) -> Result<NeighborhoodKind, Failure> {
    Ok(kind.parse::<NeighborhoodKind>()?)
}

fn fill_for(class: ColorClass) -> &'static str {
    match class {
        ColorClass::Strong => "#ffffff",
        ColorClass::Rooted => "#d9d9d9",
        ColorClass::Weak => "#969696",
    }
}

fn require_format(config: &Config, allowed: &[Format]) -> Result<(), Failure> {
    if allowed.contains(&config.format) {
        Ok(())
    } else {
        fail(format!(
            "format {:?} is not available for this command",
            config.format
        ))
    }
}

fn lattice_for(config: &Config, net: &Network) -> Result<BalancedLattice, Failure> {
    let options = match config.max_cells {
        Some(max_cells) => EnumerationOptions { max_cells },
        None => EnumerationOptions::from_env(),
    };
    Ok(enumerate_balanced_with(net, options)?)
}

fn execute(config: &Config) -> Result<Output, Failure> {
    let Some(path) = &config.network else {
        return fail("--network <path> is required");
    };
    let net = Network::load(path)?;
    let text = config.format == Format::Text;
    let json_only = |v: Value| Ok(Output::ok(pretty(&v)));
    match &config.command {
        Command::Scc => {
            require_format(config, &[Format::Text, Format::Json])?;
            let scc = condensation(&net).scc_partition;
            if text {
                let lines: Vec<String> = scc
                    .colors()
                    .into_iter()
                    .enumerate()
                    .map(|(i, c)| format!("S{} = {}", i + 1, set_text(&net, c)))
                    .collect();
                Ok(Output::ok(lines.join("\n")))
            } else {
                json_only(json!({ "components": colors_json(&net, &scc) }))
            }
        }
        Command::Condense => {
            let cond = condensation(&net);
            let members = cond.scc_partition.colors();
            match config.format {
                Format::Text => {
                    let mut lines: Vec<String> = members
                        .iter()
                        .enumerate()
                        .map(|(i, c)| format!("S{} = {}", i + 1, set_text(&net, c.clone())))
                        .collect();
                    lines.extend(
                        cond.dag_edges
                            .iter()
                            .map(|(a, b)| format!("S{} -> S{}", a + 1, b + 1)),
                    );
                    let roots: Vec<String> =
                        cond.roots.iter().map(|r| format!("S{}", r + 1)).collect();
                    lines.push(format!("roots: {}", roots.join(", ")));
                    Ok(Output::ok(lines.join("\n")))
                }
                Format::Json => json_only(json!({
                    "components": colors_json(&net, &cond.scc_partition),
                    "edges": cond.dag_edges.iter().map(|&(a, b)| json!([a + 1, b + 1])).collect::<Vec<_>>(),
                    "roots": cond.roots.iter().map(|r| r + 1).collect::<Vec<_>>(),
                })),
                Format::Dot => {
                    let mut dot = String::from("digraph condensation {\n  rankdir=LR;\n");
                    for (i, c) in members.iter().enumerate() {
                        dot.push_str(&format!(
                            "  S{} [label=\"S{} {}\"];\n",
                            i + 1,
                            i + 1,
                            set_text(&net, c.clone())
                        ));
                    }
                    for (a, b) in &cond.dag_edges {
                        dot.push_str(&format!("  S{} -> S{};\n", a + 1, b + 1));
                    }
                    dot.push_str("}\n");
                    Ok(Output::ok(dot))
                }
            }
        }
        Command::Roots => {
            require_format(config, &[Format::Text, Format::Json])?;
            let cond = condensation(&net);
            let members = cond.scc_partition.colors();
            if text {
                let lines: Vec<String> = cond
                    .roots
                    .iter()
                    .map(|&r| format!("S{} = {}", r + 1, set_text(&net, members[r].clone())))
                    .collect();
                Ok(Output::ok(lines.join("\n")))
            } else {
                json_only(json!({
                    "roots": cond.roots.iter().map(|&r| json!({
                        "component": r + 1,
                        "cells": set_json(&net, members[r].clone()),
                    })).collect::<Vec<_>>()
                }))
            }
        }
        Command::Rdc => {
            require_format(config, &[Format::Text, Format::Json])?;
            let rdc = rdc_decomposition(&net);
            let index = ReachabilityIndex::new(&net);
            let classes: Vec<(Vec<usize>, Vec<usize>)> = rdc
                .colors()
                .into_iter()
                .map(|c| {
                    let roots = index.roots_of(c[0]).into_iter().map(|r| r + 1).collect();
                    (c, roots)
                })
                .collect();
            if text {
                let mut lines = vec![rdc.to_spec(net.ids())];
                for (cells, roots) in &classes {
                    let names: Vec<String> = roots.iter().map(|r| format!("S{r}")).collect();
                    lines.push(format!(
                        "{} <- roots {}",
                        set_text(&net, cells.clone()),
                        names.join(", ")
                    ));
                }
                Ok(Output::ok(lines.join("\n")))
            } else {
                json_only(json!({
                    "partition": rdc.to_spec(net.ids()),
                    "classes": classes.iter().map(|(cells, roots)| json!({
                        "cells": set_json(&net, cells.clone()),
                        "roots": roots,
                    })).collect::<Vec<_>>()
                }))
            }
        }
        Command::Reach { cell, k } => {
            require_format(config, &[Format::Text, Format::Json])?;
            let c = cell_index(&net, cell)?;
            let set = match k {
                Some(k) => cumulative_in_k(&net, c, *k)?,
                None => in_reachability(&net, c)?,
            };
            if text {
                Ok(Output::ok(set_text(&net, set)))
            } else {
                json_only(json!({
                    "cell": cell,
                    "k": k,
                    "in_neighbors": set_json(&net, in_neighborhood(&net, c)?),
                    "cells": set_json(&net, set),
                }))
            }
        }
        Command::Balanced(p) => {
            require_format(config, &[Format::Text, Format::Json])?;
            let a = parse_partition(&net, &p.partition)?;
            let cert = is_balanced(&net, &a)?;
            let body = match (&cert, text) {
                (Some(c), true) => {
                    let rows: Vec<String> = c
                        .quotient_matrix()
                        .iter()
                        .map(|r| format!("{r:?}"))
                        .collect();
                    format!("balanced\nQ = [{}]", rows.join(", "))
                }
                (None, true) => "not balanced".to_string(),
                (c, false) => pretty(&json!({
                    "partition": a.to_spec(net.ids()),
                    "balanced": c.is_some(),
                    "quotient_matrix": c.as_ref().map(|c| c.quotient_matrix().to_vec()),
                })),
            };
            Ok(Output::verdict(body, cert.is_some()))
        }
        Command::Cir(p) => {
            require_format(config, &[Format::Text, Format::Json])?;
            let a = parse_partition(&net, &p.partition)?;
            let result = cir_balanced(&net, &a)?.to_spec(net.ids());
            if text {
                Ok(Output::ok(result))
            } else {
                json_only(json!({ "input": a.to_spec(net.ids()), "cir": result }))
            }
        }
        Command::Lattice { dot } => {
            let lattice = lattice_for(config, &net)?;
            let classes: Vec<ColorClass> = lattice
                .elements()
                .iter()
                .map(|e| classify_partition(&net, e))
                .collect::<Result<_, _>>()?;
            if *dot || config.format == Format::Dot {
                let fills: Vec<&str> = classes.iter().map(|&c| fill_for(c)).collect();
                return Ok(Output::ok(lattice.to_dot(Some(&fills))));
            }
            if text {
                let mut lines: Vec<String> = (0..lattice.len())
                    .map(|i| format!("{:>3}  {}  [{}]", i, lattice.spec(i), classes[i]))
                    .collect();
                lines.push(format!(
                    "covers: {}",
                    lattice
                        .cover_edges()
                        .iter()
                        .map(|(a, b)| format!("{a}<{b}"))
                        .collect::<Vec<_>>()
                        .join(" ")
                ));
                Ok(Output::ok(lines.join("\n")))
            } else {
                json_only(json!({
                    "elements": (0..lattice.len()).map(|i| json!({
                        "partition": lattice.spec(i),
                        "rank": lattice.elements()[i].rank(),
                        "class": classes[i],
                    })).collect::<Vec<_>>(),
                    "covers": lattice.cover_edges(),
                    "top": lattice.top(),
                    "bottom": lattice.bottom(),
                }))
            }
        }
        Command::Quotient { partition, out } => {
            let a = parse_partition(&net, &partition.partition)?;
            let Some(cert) = is_balanced(&net, &a)? else {
                return fail("partition is not balanced; the quotient is undefined");
            };
            let q = quotient_network(&net, &cert);
            let doc = q.to_file().to_json();
            if let Some(path) = out {
                std::fs::write(path, format!("{doc}\n"))?;
            }
            match config.format {
                Format::Dot => Ok(Output::ok(q.export_dot(None)?)),
                Format::Json => Ok(Output::ok(doc)),
                Format::Text => {
                    let mut lines = Vec::new();
                    for (k, row) in cert.quotient_matrix().iter().enumerate() {
                        let inputs: Vec<String> = row
                            .iter()
                            .enumerate()
                            .filter(|&(l, _)| q.has_edge(k, l))
                            .map(|(l, w)| format!("{} x {}", w, q.id(l)))
                            .collect();
                        lines.push(format!(
                            "{} (type {}) <- {}",
                            q.id(k),
                            q.cell_type(k),
                            if inputs.is_empty() {
                                "nothing".to_string()
                            } else {
                                inputs.join(", ")
                            }
                        ));
                    }
                    Ok(Output::ok(lines.join("\n")))
                }
            }
        }
        Command::Exo(p) => {
            require_format(config, &[Format::Text, Format::Json])?;
            let a = parse_partition(&net, &p.partition)?;
            let yes = is_exo_balanced(&net, &a)?;
            let body = if text {
                if yes { "exo-balanced" } else { "not exo-balanced" }.to_string()
            } else {
                pretty(&json!({ "partition": a.to_spec(net.ids()), "exo_balanced": yes }))
            };
            Ok(Output::verdict(body, yes))
        }
        Command::Classify(p) => {
            require_format(config, &[Format::Text, Format::Json])?;
            let a = parse_partition(&net, &p.partition)?;
            let classes = classify_colors(&net, &a)?;
            let overall = classify_partition(&net, &a)?;
            let labels: Vec<String> = a
                .colors()
                .into_iter()
                .map(|c| c.iter().map(|&x| net.id(x)).collect::<Vec<_>>().join(","))
                .collect();
            if text {
                let mut lines: Vec<String> = labels
                    .iter()
                    .zip(&classes)
                    .map(|(l, c)| format!("{{{l}}}: {c}"))
                    .collect();
                lines.push(format!("partition: {overall}"));
                Ok(Output::ok(lines.join("\n")))
            } else {
                json_only(json!({
                    "partition": a.to_spec(net.ids()),
                    "colors": labels.iter().zip(&classes).map(|(l, c)| json!({"cells": l, "class": c})).collect::<Vec<_>>(),
                    "class": overall,
                }))
            }
        }
        Command::Matched { partition, kind } => {
            require_format(config, &[Format::Text, Format::Json])?;
            let a = parse_partition(&net, &partition.partition)?;
            let kind = parse_kind(kind)?;
            let yes = is_matched(&net, &a, kind)?;
            let body = if text {
                yes.to_string()
            } else {
                pretty(&json!({ "partition": a.to_spec(net.ids()), "kind": kind.to_string(), "matched": yes }))
            };
            Ok(Output::verdict(body, yes))
        }
        Command::Invariant { partition, kind } => {
            require_format(config, &[Format::Text, Format::Json])?;
            let a = parse_partition(&net, &partition.partition)?;
            let kind = parse_kind(kind)?;
            let Some(cert) = is_balanced(&net, &a)? else {
                return fail("invariance is only defined for balanced partitions");
            };
            let yes = is_invariant(&net, &cert, kind)?;
            let body = if text {
                yes.to_string()
            } else {
                pretty(&json!({ "partition": a.to_spec(net.ids()), "kind": kind.to_string(), "invariant": yes }))
            };
            Ok(Output::verdict(body, yes))
        }
        Command::Tables { quotient } => {
            require_format(config, &[Format::Text, Format::Json])?;
            let lattice = lattice_for(config, &net)?;
            match quotient {
                None => tables_join(&net, &lattice, text),
                Some(spec) => tables_quotient(&net, &lattice, spec, text),
            }
        }
        Command::Simulate {
            seed,
            steps,
            x0,
            exo,
            mode,
            h,
            horizon,
        } => {
            require_format(config, &[Format::Text, Format::Json])?;
            let spec = sample_admissible(&net, *seed, *exo)?;
            let x0: Vec<f64> = if x0 == "random" {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(*seed);
                (0..net.len()).map(|_| rng.gen_range(-2.0..2.0)).collect()
            } else {
                x0.split(',')
                    .map(|v| v.trim().parse::<f64>())
                    .collect::<Result<_, _>>()?
            };
            let integrator = match mode {
                Mode::Discrete => Integrator::discrete(*steps),
                Mode::Rk4 => Integrator::rk4(*h, *horizon),
            };
            let traj = evolve(&net, &spec, &x0, integrator)?;
            if text {
                let mut lines = vec![format!("t\t{}", net.ids().join("\t"))];
                for (t, x) in traj.times.iter().zip(&traj.states) {
                    let vals: Vec<String> = x.iter().map(|v| format!("{v:.12}")).collect();
                    lines.push(format!("{t}\t{}", vals.join("\t")));
                }
                Ok(Output::ok(lines.join("\n")))
            } else {
                json_only(json!({ "cells": net.ids(), "trajectory": traj }))
            }
        }
        Command::Verify { check } => {
            require_format(config, &[Format::Text, Format::Json])?;
            verify(&net, check, text)
        }
        Command::ExportDot { partition } => {
            let a = partition
                .as_deref()
                .map(|s| parse_partition(&net, s))
                .transpose()?;
            let dot = net.export_dot(a.as_ref())?;
            if config.format == Format::Json {
                json_only(json!({ "dot": dot }))
            } else {
                Ok(Output::ok(dot))
            }
        }
    }
}

fn tables_join(net: &Network, lattice: &BalancedLattice, text: bool) -> Result<Output, Failure> {
    let report = join_table_report(net, lattice)?;
    let top = top_nonweak(net, lattice)?;
    let strong = top_strong(net)?;
    let ok = report.consistent();
    if !text {
        return Ok(Output::verdict(
            pretty(&json!({
                "report": report,
                "observed": report.observed().iter().map(|((a, b), js)| json!({
                    "left": a, "right": b, "joins": js,
                })).collect::<Vec<_>>(),
                "top_strong": strong.to_spec(net.ids()),
                "top_nonweak": top.partition.to_spec(net.ids()),
                "top_nonweak_valid": top.valid,
            })),
            ok,
        ));
    }
    let mut lines = Vec::new();
    for ((a, b), joins) in report.observed() {
        let js: Vec<String> = joins.iter().map(|j| j.letter().to_string()).collect();
        lines.push(format!("{} v {} -> {}", a.letter(), b.letter(), js.join("/")));
    }
    lines.push(format!(
        "rooted elements all reach-matched: {}",
        report.rooted_all_matched
    ));
    lines.push(format!(
        "general table violations: {}",
        report.general_violations.len()
    ));
    lines.push(format!(
        "restricted table violations: {}",
        report.restricted_violations.len()
    ));
    lines.push(format!("top strong: {}", strong.to_spec(net.ids())));
    lines.push(format!(
        "top non-weak: {} (valid: {})",
        top.partition.to_spec(net.ids()),
        top.valid
    ));
    Ok(Output::verdict(lines.join("\n"), ok))
}

fn tables_quotient(
    net: &Network,
    lattice: &BalancedLattice,
    spec: &str,
    text: bool,
) -> Result<Output, Failure> {
    let a = parse_partition(net, spec)?;
    let Some(cert) = is_balanced(net, &a)? else {
        return fail("quotient partition is not balanced");
    };
    let (report, checked): (QuotientClassReport, bool) =
        match quotient_class_report(net, lattice, &cert) {
            Ok(r) => (r, true),
            Err(ClassificationError::PreconditionFailed(r)) => (*r, false),
            Err(e) => return Err(e.into()),
        };
    let ok = report.violations.is_empty();
    if !text {
        return Ok(Output::verdict(
            pretty(&json!({
                "quotient": a.to_spec(net.ids()),
                "precondition_met": checked,
                "records": report.records.iter().map(|r| json!({
                    "partition": lattice.spec(r.element),
                    "in_network": r.in_network,
                    "in_quotient": r.in_quotient,
                })).collect::<Vec<_>>(),
                "violations": report.violations.len(),
            })),
            ok,
        ));
    }
    let mut lines: Vec<String> = report
        .records
        .iter()
        .map(|r| {
            format!(
                "{}: {} -> {}",
                lattice.spec(r.element),
                r.in_network,
                r.in_quotient
            )
        })
        .collect();
    if checked {
        lines.push(format!("violations: {}", report.violations.len()));
    } else {
        lines.push("precondition not met: transitions not checked".to_string());
    }
    Ok(Output::verdict(lines.join("\n"), ok))
}

fn verify(net: &Network, check: &VerifyCommand, text: bool) -> Result<Output, Failure> {
    let (name, passed, value) = match check {
        VerifyCommand::Invariance { partition, numeric } => {
            let a = parse_partition(net, &partition.partition)?;
            let spec = sample_admissible(net, numeric.seed, numeric.exo)?;
            let r = check_invariance(net, &spec, &a, &numeric.options())?;
            ("invariance", r.invariant, json!(r))
        }
        VerifyCommand::Locality { cell, k, numeric } => {
            if numeric.mode != Mode::Discrete {
                return fail("locality is checked in discrete mode only");
            }
            let c = cell_index(net, cell)?;
            let spec = sample_admissible(net, numeric.seed, numeric.exo)?;
            let r = check_locality(net, &spec, c, *k, numeric.trials, numeric.seed)?;
            ("locality", r.passed, json!(r))
        }
        VerifyCommand::Subsystem { cell, numeric } => {
            let c = cell_index(net, cell)?;
            let spec = sample_admissible(net, numeric.seed, numeric.exo)?;
            let r = check_subsystem(net, &spec, c, &numeric.options())?;
            ("subsystem", r.passed, json!(r))
        }
        VerifyCommand::Quotient { partition, numeric } => {
            let a = parse_partition(net, &partition.partition)?;
            let Some(cert) = is_balanced(net, &a)? else {
                return fail("partition is not balanced; the quotient is undefined");
            };
            let spec = sample_admissible(net, numeric.seed, numeric.exo)?;
            let r = check_quotient_consistency(net, &spec, &cert, &numeric.options())?;
            ("quotient", r.passed, json!(r))
        }
    };
    let body = if text {
        format!("{name}: {}", if passed { "pass" } else { "fail" })
    } else {
        pretty(&json!({ "check": name, "passed": passed, "report": value }))
    };
    Ok(Output::verdict(body, passed))
}
