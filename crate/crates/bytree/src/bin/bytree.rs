//! Command-line interface: validation, Tamagawa numbers, Néron component
//! groups, the lattice oracle (tree and graph mode), tower analysis,
//! double-cover conversions, and the fixture table runner.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use bytree::cover::{from_hyperelliptic_graph, to_double_cover};
use bytree::forest::BYForest;
use bytree::io;
use bytree::neron;
use bytree::oracle;
use bytree::table;
use bytree::tamagawa;
use bytree::towers;

#[derive(Parser)]
#[command(name = "bytree", version, about = "Tamagawa numbers and Néron component groups of BY forests")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Pretty-print the JSON output.
    #[arg(long, global = true)]
    pretty: bool,
}

#[derive(Args)]
struct Input {
    /// Input document path, or '-' for standard input.
    file: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a document, reporting diagnostics.
    Validate {
        #[command(flatten)]
        input: Input,
        /// Treat the input as a hyperelliptic graph document.
        #[arg(long)]
        graph: bool,
    },
    /// Compute the Tamagawa number of a BY forest.
    Tamagawa {
        #[command(flatten)]
        input: Input,
        /// Emit a symbolic expression in the edge-length variables.
        #[arg(long)]
        symbolic: bool,
        /// Cross-check the result against the lattice oracle.
        #[arg(long)]
        oracle_check: bool,
    },
    /// Compute the Néron component group of a BY forest.
    Neron {
        #[command(flatten)]
        input: Input,
        /// Cross-check the result against the lattice oracle.
        #[arg(long)]
        oracle_check: bool,
        /// Also print the pipes of the reduced simple trees.
        #[arg(long)]
        show_pipe: bool,
    },
    /// Run the independent lattice oracle and print the presentation.
    Oracle {
        #[command(flatten)]
        input: Input,
        /// Treat the input as a hyperelliptic graph document (the lattice
        /// is then H1 of the graph with the Frobenius action).
        #[arg(long)]
        graph: bool,
    },
    /// Fit the base-change growth constants and run power checks.
    Towers {
        #[command(flatten)]
        input: Input,
        /// Largest base-change degree e in the verification grid.
        #[arg(long, default_value_t = 6)]
        max_e: u64,
        /// Comma-separated primes q for the power corollary check.
        #[arg(long, value_delimiter = ',', default_value = "3,5")]
        qcheck: Vec<u64>,
    },
    /// Convert a BY forest document to its hyperelliptic double cover.
    DoubleCover {
        #[command(flatten)]
        input: Input,
    },
    /// Convert a hyperelliptic graph document to its BY forest.
    FromGraph {
        #[command(flatten)]
        input: Input,
    },
    /// Run a manifest of fixtures against their expected formulas.
    Table {
        /// Manifest path: a JSON list of {name, file, expected}, with file
        /// paths relative to the manifest.
        manifest: PathBuf,
    },
}

#[derive(Debug, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestRow {
    name: String,
    file: String,
    expected: String,
}

/// Exit code 2: the input could not be read, parsed, or validated.
struct InputError(String);
/// Exit code 1: the computation itself failed.
struct ComputeError(String);

enum CliError {
    Input(InputError),
    Compute(ComputeError),
}

impl From<InputError> for CliError {
    fn from(e: InputError) -> Self {
        CliError::Input(e)
    }
}

impl From<ComputeError> for CliError {
    fn from(e: ComputeError) -> Self {
        CliError::Compute(e)
    }
}

fn read_input(path: &PathBuf) -> Result<String, InputError> {
    if path.as_os_str() == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| InputError(format!("reading standard input: {e}")))?;
        Ok(buf)
    } else {
        std::fs::read_to_string(path)
            .map_err(|e| InputError(format!("reading {}: {e}", path.display())))
    }
}

fn load_forest(input: &Input) -> Result<BYForest, InputError> {
    io::parse_forest(&read_input(&input.file)?).map_err(|e| InputError(e.to_string()))
}

fn emit<T: Serialize>(value: &T, pretty: bool) {
    let out = if pretty {
        serde_json::to_string_pretty(value)
    } else {
        serde_json::to_string(value)
    }
    .expect("output serializes");
    println!("{out}");
}

fn run(cli: &Cli) -> Result<serde_json::Value, CliError> {
    match &cli.command {
        Command::Validate { input, graph } => {
            let text = read_input(&input.file)?;
            let result = if *graph {
                io::parse_graph(&text).map(|_| ())
            } else {
                io::parse_forest(&text).map(|_| ())
            };
            match result {
                Ok(()) => Ok(json!({"valid": true})),
                Err(e) => Err(InputError(e.to_string()).into()),
            }
        }
        Command::Tamagawa { input, symbolic, oracle_check } => {
            let p = load_forest(input)?;
            if *symbolic {
                let expr = tamagawa::tamagawa_symbolic(&p)
                    .map_err(|e| ComputeError(e.to_string()))?;
                if *oracle_check {
                    for pt in table::sample_points(&p) {
                        let sub = p.substitute(&pt).map_err(|e| ComputeError(e.to_string()))?;
                        let o = oracle::tamagawa_oracle(&sub)
                            .map_err(|e| ComputeError(e.to_string()))?;
                        let got =
                            expr.eval(&pt).map_err(|e| ComputeError(e.to_string()))?;
                        if got != o {
                            return Err(ComputeError(format!(
                                "oracle mismatch at {pt:?}: {got} vs {o}"
                            ))
                            .into());
                        }
                    }
                }
                Ok(json!({"symbolic": expr.to_string(), "cases": expr.cases().len()}))
            } else {
                let c = tamagawa::tamagawa_numeric(&p, *oracle_check)
                    .map_err(|e| ComputeError(e.to_string()))?;
                Ok(json!({"tamagawa": c.to_string()}))
            }
        }
        Command::Neron { input, oracle_check, show_pipe } => {
            let p = load_forest(input)?;
            let inv = neron::neron_group(&p, *oracle_check)
                .map_err(|e| ComputeError(e.to_string()))?;
            let mut out = json!({
                "invariant_factors":
                    inv.0.iter().map(|n| n.to_string()).collect::<Vec<_>>(),
                "order": inv.0.iter().fold(num_bigint::BigInt::from(1), |a, b| a * b).to_string(),
            });
            if *show_pipe {
                let mut pipes = Vec::new();
                for t in tamagawa::reduce(&p).map_err(|e| ComputeError(e.to_string()))? {
                    let m = neron::mark_tree(&t).map_err(|e| ComputeError(e.to_string()))?;
                    let pipe = neron::pipe(&m, neron::PipeMethod::Direct)
                        .map_err(|e| ComputeError(e.to_string()))?;
                    pipes.push(json!({
                        "star": m.star,
                        "sign": t.sign,
                        "rank": pipe.group.rank,
                        "relations": pipe.group.relations.iter().map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
                        "y": pipe.y.coordinates.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                        "eta": pipe.eta.coordinates.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                    }));
                }
                out["pipes"] = json!(pipes);
            }
            Ok(out)
        }
        Command::Oracle { input, graph } => {
            let lat = if *graph {
                let g = io::parse_graph(&read_input(&input.file)?)
                    .map_err(|e| InputError(e.to_string()))?;
                oracle::lattice_of_graph(&g.graph, &g.frob)
                    .map_err(|e| ComputeError(e.to_string()))?
            } else {
                let p = load_forest(input)?;
                oracle::lattice_of(&p).map_err(|e| ComputeError(e.to_string()))?
            };
            let (group, endo) = oracle::geometric_component_group(&lat);
            let (fixed, _) = group.fixed_subgroup(&endo);
            let inv = fixed.invariant_factors();
            Ok(json!({
                "rank": lat.rank(),
                "gram": lat.gram.to_rows().iter().map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
                "action": lat.action.to_rows().iter().map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
                "discriminant": lat.discriminant().to_string(),
                "geometric_invariant_factors": group.invariant_factors().0.iter().map(|n| n.to_string()).collect::<Vec<_>>(),
                "neron_invariant_factors": inv.0.iter().map(|n| n.to_string()).collect::<Vec<_>>(),
                "tamagawa": inv.0.iter().fold(num_bigint::BigInt::from(1), |a, b| a * b).to_string(),
            }))
        }
        Command::Towers { input, max_e, qcheck } => {
            let p = load_forest(input)?;
            let report = towers::towers_report(&p, *max_e, qcheck)
                .map_err(|e| ComputeError(e.to_string()))?;
            let constants: BTreeMap<String, serde_json::Value> = report
                .constants
                .iter()
                .map(|(d, (a, r, s))| {
                    (d.to_string(), json!([a.to_string(), r, s]))
                })
                .collect();
            Ok(json!({
                "N": report.n,
                "constants": constants,
                "verified": report.verified,
                "qchecks": report.qchecks,
            }))
        }
        Command::DoubleCover { input } => {
            let p = load_forest(input)?;
            let g = to_double_cover(&p).map_err(|e| ComputeError(e.to_string()))?;
            Ok(serde_json::to_value(io::graph_to_doc(&g)).expect("graph doc serializes"))
        }
        Command::FromGraph { input } => {
            let g = io::parse_graph(&read_input(&input.file)?)
                .map_err(|e| InputError(e.to_string()))?;
            let p = from_hyperelliptic_graph(&g).map_err(|e| ComputeError(e.to_string()))?;
            Ok(serde_json::to_value(io::forest_to_doc(&p)).expect("forest doc serializes"))
        }
        Command::Table { manifest } => {
            let text = std::fs::read_to_string(manifest)
                .map_err(|e| InputError(format!("reading {}: {e}", manifest.display())))?;
            let rows: Vec<ManifestRow> =
                serde_json::from_str(&text).map_err(|e| InputError(e.to_string()))?;
            let base = manifest.parent().map(PathBuf::from).unwrap_or_default();
            let mut reports = Vec::new();
            let mut all_pass = true;
            for row in &rows {
                let path = base.join(&row.file);
                let doc = std::fs::read_to_string(&path)
                    .map_err(|e| InputError(format!("reading {}: {e}", path.display())))?;
                let forest =
                    io::parse_forest(&doc).map_err(|e| InputError(e.to_string()))?;
                let rep = table::check_row(&row.name, &forest, &row.expected);
                all_pass &= rep.pass;
                eprintln!(
                    "{} {}",
                    if rep.pass { "PASS" } else { "FAIL" },
                    rep.name
                );
                reports.push(rep);
            }
            if !all_pass {
                let rendered =
                    serde_json::to_string_pretty(&reports).expect("reports serialize");
                return Err(ComputeError(format!("table has failures:\n{rendered}")).into());
            }
            Ok(serde_json::to_value(&reports).expect("reports serialize"))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(value) => {
            emit(&value, cli.pretty);
            ExitCode::SUCCESS
        }
        Err(CliError::Compute(ComputeError(msg))) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Input(InputError(msg))) => {
            eprintln!("input error: {msg}");
            ExitCode::from(2)
        }
    }
}
