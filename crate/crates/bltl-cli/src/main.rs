//! Command-line front door: check networks against specifications,
//! synthesize networks, generate specification templates, export
//! solver constraints, and score networks on metrics.
//!
//! Every command writes its result as one line of JSON to stdout (or
//! to `--out`) and a human-readable summary to stderr. Identical
//! arguments and seed produce byte-identical JSON; wall-clock times
//! appear only on stderr. Exit codes: 0 when the property holds or the
//! run succeeded, 1 when the property fails or the search is
//! exhausted, 2 for usage and input errors.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use bltl::bits::{BitVec, BnnModel};
use bltl::formula::{expand_derived, Signature};
use bltl::frontend::{
    gen_fairness, gen_robustness, pairs_from_rows, parse_csv_rows, parse_spec, print_spec,
    AttributeLayout, BallSampling, FairnessShape, ProperPair, SpecFile, SpecOptions,
};
use bltl::solver::export_smtlib;
use bltl::synth::{
    complete_blocks, evaluate_metric, synthesize, Architecture, CompletionPolicy, Metric,
    SynthConfig, SynthResult,
};
use bltl::tableau::{path_problem, Mode, Outcome, Search, SearchConfig, SynthSpec};
use bltl::Formula;

#[derive(Parser)]
#[command(
    name = "bltl",
    version,
    about = "Check and synthesize lookup-table networks against temporal specifications"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Write the JSON result to this file instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,

    /// Log one line per tableau rule application to stderr.
    #[arg(long, global = true)]
    trace: bool,

    /// Seed behind every randomized choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Rule applications before a search gives up.
    #[arg(long, global = true, default_value_t = 1 << 20,
          value_parser = clap::value_parser!(u64).range(1..))]
    node_budget: u64,

    /// Wall-clock seconds before the run is abandoned.
    #[arg(long, global = true, value_name = "SECS",
          value_parser = clap::value_parser!(u64).range(1..))]
    time_limit: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Check whether a network satisfies a specification.
    Check {
        /// Specification file.
        spec: PathBuf,
        /// Network file (JSON).
        model: PathBuf,
    },
    /// Search for a network satisfying a specification.
    Synth {
        /// Specification file.
        spec: PathBuf,
        /// Exact network length; block widths are still inferred.
        #[arg(long, conflicts_with = "free")]
        length: Option<usize>,
        /// Leave both length and widths to the search (the default).
        #[arg(long)]
        free: bool,
        /// Complete the first result into a concrete network file.
        #[arg(long, value_enum)]
        policy: Option<PolicyArg>,
        /// Where to write the completed network; defaults to the
        /// specification path with its extension replaced by
        /// `model.json`.
        #[arg(long, requires = "policy", value_name = "FILE")]
        model_out: Option<PathBuf>,
        /// How many distinct results to enumerate.
        #[arg(long, default_value_t = 1,
              value_parser = clap::value_parser!(u64).range(1..))]
        num_solutions: u64,
    },
    /// Write a specification template.
    #[command(subcommand)]
    GenSpec(GenSpec),
    /// Export the constraints of the first satisfiable path as SMT-LIB 2.
    ExportSmt {
        /// Specification file.
        spec: PathBuf,
        /// Output file for the SMT-LIB text.
        path: PathBuf,
    },
    /// Score a network on a metric.
    Eval {
        /// Network file (JSON).
        model: PathBuf,
        #[command(flatten)]
        metric: MetricArgs,
    },
}

#[derive(Subcommand)]
enum GenSpec {
    /// Inputs near a centre must map to the centre's output.
    Robustness {
        /// Destination specification file.
        path: PathBuf,
        /// Centre input, as bits (e.g. 0110).
        #[arg(long)]
        center: String,
        /// Hamming radius of the perturbation ball.
        #[arg(long)]
        eps: usize,
        /// How many blocks the compared outputs sit behind.
        #[arg(long, default_value_t = 1,
              value_parser = clap::value_parser!(u64).range(1..))]
        blocks: u64,
        /// Constrain this many sampled ball points instead of all of them.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        sample: Option<u64>,
    },
    /// Proper pairs must map to equal outputs.
    Fairness {
        /// Destination specification file.
        path: PathBuf,
        /// CSV of row vectors; pairs are formed from rows that differ
        /// exactly in the sensitive attribute.
        #[arg(long, conflicts_with = "all_pairs", value_name = "CSV")]
        pairs: Option<PathBuf>,
        /// Enumerate every proper pair of the layout instead of reading rows.
        #[arg(long)]
        all_pairs: bool,
        /// Comma-separated attribute widths, e.g. 3,1,2.
        #[arg(long, value_delimiter = ',', required = true)]
        layout: Vec<usize>,
        /// Index of the sensitive attribute within the layout.
        #[arg(long)]
        sensitive: usize,
        /// Compare outputs after exactly this many blocks.
        #[arg(long, conflicts_with = "lengths")]
        length: Option<usize>,
        /// Compare outputs at one of two depths, e.g. 2,3.
        #[arg(long, value_delimiter = ',', num_args = 1)]
        lengths: Option<Vec<usize>>,
    },
}

#[derive(Args)]
struct MetricArgs {
    /// Which score to compute.
    #[arg(long, value_enum)]
    metric: MetricKind,
    /// Robustness: centre input, as bits.
    #[arg(long, required_if_eq("metric", "robustness"))]
    center: Option<String>,
    /// Robustness: Hamming radius.
    #[arg(long, required_if_eq("metric", "robustness"))]
    eps: Option<usize>,
    /// Fairness: CSV of row vectors.
    #[arg(long, required_if_eq("metric", "fairness"), value_name = "CSV")]
    pairs: Option<PathBuf>,
    /// Fairness: comma-separated attribute widths.
    #[arg(long, value_delimiter = ',')]
    layout: Vec<usize>,
    /// Fairness: index of the sensitive attribute.
    #[arg(long)]
    sensitive: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy)]
enum MetricKind {
    Fairness,
    Robustness,
}

#[derive(ValueEnum, Clone, Copy)]
enum PolicyArg {
    /// Open table entries output zero.
    Zero,
    /// Open entries copy the nearest specified input's output.
    Nearest,
    /// Open entries are seeded-random.
    Random,
}

impl PolicyArg {
    fn to_policy(self, seed: u64) -> CompletionPolicy {
        match self {
            PolicyArg::Zero => CompletionPolicy::ConstantZero,
            PolicyArg::Nearest => CompletionPolicy::NearestSpecified,
            PolicyArg::Random => CompletionPolicy::SeededRandom(seed),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let limit = cli.time_limit;
    let work = move || match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    };
    let code = match limit {
        None => work(),
        Some(secs) => {
            let (tx, rx) = mpsc::channel();
            thread::spawn(move || {
                let _ = tx.send(work());
            });
            match rx.recv_timeout(Duration::from_secs(secs)) {
                Ok(code) => code,
                Err(_) => {
                    eprintln!("error: time limit of {secs}s exceeded");
                    2
                }
            }
        }
    };
    ExitCode::from(code)
}

fn run(cli: Cli) -> Result<u8> {
    let started = Instant::now();
    let search_cfg = SearchConfig {
        node_budget: cli.node_budget,
        trace: cli.trace,
        ..SearchConfig::default()
    };
    match cli.command {
        Command::Check { spec, model } => {
            cmd_check(&spec, &model, search_cfg, &cli.out, started)
        }
        Command::Synth {
            spec,
            length,
            free: _,
            policy,
            model_out,
            num_solutions,
        } => cmd_synth(
            &spec,
            length,
            policy,
            model_out,
            num_solutions as usize,
            cli.seed,
            search_cfg,
            &cli.out,
            started,
        ),
        Command::GenSpec(kind) => cmd_gen_spec(kind, cli.seed, &cli.out),
        Command::ExportSmt { spec, path } => {
            cmd_export_smt(&spec, &path, search_cfg, &cli.out, started)
        }
        Command::Eval { model, metric } => cmd_eval(&model, metric, &cli.out),
    }
}

fn load_spec(path: &Path) -> Result<SpecFile> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_spec(&text).with_context(|| format!("parsing {}", path.display()))
}

fn load_model(path: &Path) -> Result<BnnModel> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    BnnModel::from_json(&text).with_context(|| format!("loading {}", path.display()))
}

/// Expand quantifiers and rewrite to negation normal form, the input
/// contract of the search.
fn prepare(spec: &SpecFile) -> Result<std::sync::Arc<Formula>> {
    expand_derived(&spec.formula, &spec.sig, &spec.options.expansion)
        .context("expanding the specification")
}

fn emit<T: Serialize>(out: &Option<PathBuf>, value: &T) -> Result<()> {
    let json = serde_json::to_string(value).context("serializing the result")?;
    match out {
        Some(path) => fs::write(path, json + "\n")
            .with_context(|| format!("writing {}", path.display()))?,
        None => println!("{json}"),
    }
    Ok(())
}

#[derive(Serialize)]
struct CheckReport {
    result: &'static str,
    nodes: u64,
    backtracks: u64,
    solver_calls: u64,
}

fn cmd_check(
    spec_path: &Path,
    model_path: &Path,
    cfg: SearchConfig,
    out: &Option<PathBuf>,
    started: Instant,
) -> Result<u8> {
    let spec = load_spec(spec_path)?;
    let model = load_model(model_path)?;
    let phi = prepare(&spec)?;
    let cfg = SearchConfig {
        order: spec.options.order,
        ..cfg
    };
    let mut search = Search::new(&phi, Mode::Check(model), cfg)?;
    let holds = match search.next_outcome()? {
        Outcome::Success(_) => true,
        Outcome::Failure => false,
        Outcome::ResourceLimit => bail!("node budget exhausted before a verdict"),
    };
    let report = CheckReport {
        result: if holds { "holds" } else { "fails" },
        nodes: search.nodes_used(),
        backtracks: search.backtracks(),
        solver_calls: search.solver_calls(),
    };
    emit(out, &report)?;
    eprintln!(
        "{}: {} nodes, {} solver calls, {:.1?}",
        report.result,
        report.nodes,
        report.solver_calls,
        started.elapsed()
    );
    Ok(if holds { 0 } else { 1 })
}

#[derive(Serialize)]
struct SynthReport<'a> {
    result: &'static str,
    exhausted: bool,
    results: &'a [SynthResult],
    #[serde(skip_serializing_if = "Option::is_none")]
    model: Option<String>,
}

#[allow(clippy::too_many_arguments)]
fn cmd_synth(
    spec_path: &Path,
    length: Option<usize>,
    policy: Option<PolicyArg>,
    model_out: Option<PathBuf>,
    num_solutions: usize,
    seed: u64,
    cfg: SearchConfig,
    out: &Option<PathBuf>,
    started: Instant,
) -> Result<u8> {
    let spec = load_spec(spec_path)?;
    let phi = prepare(&spec)?;
    let synth_cfg = SynthConfig {
        arch: match length {
            Some(n) => Architecture::FixedLength(n),
            None => Architecture::Free,
        },
        bounds: BTreeMap::new(),
        num_solutions,
        search: SearchConfig {
            order: spec.options.order,
            ..cfg
        },
    };
    let run = synthesize(&phi, &synth_cfg)?;
    if run.is_failure() {
        emit(out, &json!({"result": "failure"}))?;
        eprintln!("failure: no satisfying network, {:.1?}", started.elapsed());
        return Ok(1);
    }
    if run.results.is_empty() {
        bail!("node budget exhausted before any result");
    }
    let mut model_path = None;
    if let Some(policy) = policy {
        let completed = complete_blocks(&run.results[0], &policy.to_policy(seed))?;
        let dest = model_out
            .unwrap_or_else(|| spec_path.with_extension("model.json"));
        fs::write(&dest, completed.to_json() + "\n")
            .with_context(|| format!("writing {}", dest.display()))?;
        model_path = Some(dest.display().to_string());
    }
    let report = SynthReport {
        result: "success",
        exhausted: run.exhausted,
        results: &run.results,
        model: model_path,
    };
    emit(out, &report)?;
    let first = &run.results[0];
    eprintln!(
        "success: {} result(s), length {}, {} nodes, {:.1?}",
        run.results.len(),
        first.length,
        first.stats.nodes,
        started.elapsed()
    );
    Ok(0)
}

fn cmd_gen_spec(kind: GenSpec, seed: u64, out: &Option<PathBuf>) -> Result<u8> {
    match kind {
        GenSpec::Robustness {
            path,
            center,
            eps,
            blocks,
            sample,
        } => {
            let center = BitVec::parse_bits(&center).context("parsing --center")?;
            let sampling = match sample {
                Some(count) => BallSampling::Sample {
                    count: count as usize,
                    seed,
                },
                None => BallSampling::Enumerate,
            };
            let formula = gen_robustness(&center, eps, blocks as usize, sampling)?;
            let file = SpecFile {
                sig: Signature::default(),
                funcs: Vec::new(),
                options: SpecOptions::default(),
                formula,
            };
            let text = print_spec(&file);
            fs::write(&path, &text).with_context(|| format!("writing {}", path.display()))?;
            emit(out, &json!({"written": path.display().to_string()}))?;
            eprintln!("wrote robustness spec to {}", path.display());
            Ok(0)
        }
        GenSpec::Fairness {
            path,
            pairs,
            all_pairs,
            layout,
            sensitive,
            length,
            lengths,
        } => {
            let layout = AttributeLayout::new(layout)?;
            let pairs = if all_pairs {
                enumerate_pairs(&layout, sensitive)?
            } else {
                let csv = pairs.ok_or_else(|| anyhow!("pass --pairs <csv> or --all-pairs"))?;
                let text = fs::read_to_string(&csv)
                    .with_context(|| format!("reading {}", csv.display()))?;
                pairs_from_rows(&parse_csv_rows(&text)?, &layout, sensitive)
            };
            let shape = match (length, lengths) {
                (Some(n), None) => FairnessShape::Fixed(n),
                (None, Some(ds)) => match ds.as_slice() {
                    &[a, b] => FairnessShape::Flexible(a, b),
                    other => bail!("--lengths takes exactly two depths, got {}", other.len()),
                },
                (None, None) => bail!("pass --length <n> or --lengths <a,b>"),
                (Some(_), Some(_)) => unreachable!("clap rejects the combination"),
            };
            let formula = gen_fairness(&pairs, shape)?;
            let variables = formula.free_vars().into_iter().collect();
            let file = SpecFile {
                sig: Signature {
                    constants: Vec::new(),
                    variables,
                },
                funcs: Vec::new(),
                options: SpecOptions::default(),
                formula,
            };
            let text = print_spec(&file);
            fs::write(&path, &text).with_context(|| format!("writing {}", path.display()))?;
            emit(
                out,
                &json!({"written": path.display().to_string(), "pairs": pairs.len()}),
            )?;
            eprintln!(
                "wrote fairness spec over {} pair(s) to {}",
                pairs.len(),
                path.display()
            );
            Ok(0)
        }
    }
}

/// Every proper pair of the layout, each unordered pair once.
fn enumerate_pairs(layout: &AttributeLayout, sensitive: usize) -> Result<Vec<ProperPair>> {
    let total = layout.total();
    if total > 16 {
        bail!("layout spans {total} bits; enumerating every pair needs 16 or fewer");
    }
    let mut out = Vec::new();
    for d in 0..1u64 << total {
        let a = BitVec::bin(d, total).expect("value fits width");
        let pair = ProperPair::toggled(&a, layout, sensitive)?;
        if pair.a().dec() < pair.b().dec() {
            out.push(pair);
        }
    }
    Ok(out)
}

fn cmd_export_smt(
    spec_path: &Path,
    dest: &Path,
    cfg: SearchConfig,
    out: &Option<PathBuf>,
    started: Instant,
) -> Result<u8> {
    let spec = load_spec(spec_path)?;
    let phi = prepare(&spec)?;
    let cfg = SearchConfig {
        order: spec.options.order,
        ..cfg
    };
    let mut search = Search::new(&phi, Mode::Synth(SynthSpec::default()), cfg.clone())?;
    match search.next_outcome()? {
        Outcome::Success(path) => {
            let (problem, registry) =
                path_problem(&path, None, cfg.order, cfg.max_table_width)?;
            fs::write(dest, export_smtlib(&problem, &registry))
                .with_context(|| format!("writing {}", dest.display()))?;
            emit(
                out,
                &json!({
                    "written": dest.display().to_string(),
                    "depth": path.depth,
                    "vars": problem.num_vars,
                    "clauses": problem.clauses.len(),
                }),
            )?;
            eprintln!(
                "exported a depth-{} path ({} vars, {} clauses), {:.1?}",
                path.depth,
                problem.num_vars,
                problem.clauses.len(),
                started.elapsed()
            );
            Ok(0)
        }
        Outcome::Failure => {
            emit(out, &json!({"result": "failure"}))?;
            eprintln!("failure: no satisfiable path to export");
            Ok(1)
        }
        Outcome::ResourceLimit => bail!("node budget exhausted before a verdict"),
    }
}

fn cmd_eval(model_path: &Path, args: MetricArgs, out: &Option<PathBuf>) -> Result<u8> {
    let model = load_model(model_path)?;
    let (name, metric) = match args.metric {
        MetricKind::Robustness => {
            let center = args.center.expect("clap enforces --center");
            let input = BitVec::parse_bits(&center).context("parsing --center")?;
            let radius = args.eps.expect("clap enforces --eps");
            ("robustness", Metric::Robustness { input, radius })
        }
        MetricKind::Fairness => {
            let csv = args.pairs.expect("clap enforces --pairs");
            let text = fs::read_to_string(&csv)
                .with_context(|| format!("reading {}", csv.display()))?;
            let layout = AttributeLayout::new(args.layout)?;
            let sensitive = args
                .sensitive
                .ok_or_else(|| anyhow!("--sensitive is required for fairness"))?;
            let pairs = pairs_from_rows(&parse_csv_rows(&text)?, &layout, sensitive);
            if pairs.is_empty() {
                bail!("no proper pairs among the rows");
            }
            let pairs = pairs.iter().map(|p| (*p.a(), *p.b())).collect();
            ("fairness", Metric::Fairness { pairs })
        }
    };
    let score = evaluate_metric(&model, &metric)?;
    emit(out, &json!({"metric": name, "score": score}))?;
    eprintln!("{name}: {score}");
    Ok(0)
}
