//! The `dualfair` command line.
//!
//! Exit codes: 0 success, 1 infeasible or no solution, 2 usage error,
//! 3 enumeration cap exceeded.

mod bench;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use dualfair_core::doubly::{Algorithm, DoublyError};
use dualfair_core::fairness::{allocator_efficiency, check, check_doubly, Criterion, Perspective};
use dualfair_core::generate::{random_sized_instance, ValueSpace};
use dualfair_core::graphlab::{check_kneser_lower_bound, non_ef1_independent_set, Graph, GraphError};
use dualfair_core::maxeff::{build_gadget, GadgetKind, GadgetParams, MaxEffError, Method};
use dualfair_core::model::{parse_allocation, parse_instance, Instance, ValuationProfile};
use dualfair_core::oracle::{
    default_cap, enumerate_best_with, exists_multi_fair_with, search_counterexamples_with_progress, FairnessConstraint, Objective,
    OracleConfig, OracleError, SearchConfig, SearchMode,
};
use dualfair_core::Rational;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAP: i32 = 3;

#[derive(Debug)]
pub(crate) enum Failure {
    Usage(String),
    Infeasible(String),
    Cap(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Infeasible(_) => EXIT_INFEASIBLE,
            Failure::Cap(_) => EXIT_CAP,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Infeasible(m) | Failure::Cap(m) => m,
        }
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::CapExceeded { .. } => Failure::Cap(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<GraphError> for Failure {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::CapExceeded { .. } => Failure::Cap(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type Outcome = Result<(String, i32), Failure>;

#[derive(Parser, Debug)]
#[command(name = "dualfair", version, about = "Fair division with an allocator's preference")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute a doubly-fair allocation.
    Solve(SolveArgs),
    /// Check an allocation against EF-c or PROP-c.
    Check(CheckArgs),
    /// Maximize the allocator's efficiency under the agents' fairness.
    Maximize(MaximizeArgs),
    /// Brute-force enumeration.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Subset graphs, Kneser graphs and exact colouring.
    #[command(subcommand)]
    Graph(GraphCommand),
    /// Write gadget or random instances.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Run a solver-vs-oracle suite.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct Output {
    /// Write the result here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum CriterionArg {
    Ef,
    Prop,
}

impl From<CriterionArg> for Criterion {
    fn from(c: CriterionArg) -> Self {
        match c {
            CriterionArg::Ef => Criterion::Ef,
            CriterionArg::Prop => Criterion::Prop,
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum PerspectiveArg {
    Agents,
    Allocator,
    Doubly,
}

impl From<PerspectiveArg> for Perspective {
    fn from(p: PerspectiveArg) -> Self {
        match p {
            PerspectiveArg::Agents => Perspective::Agents,
            PerspectiveArg::Allocator => Perspective::Allocator,
            PerspectiveArg::Doubly => Perspective::Doubly,
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum SpaceArg {
    Binary,
    Bivalued,
    SmallInteger,
}

fn space(kind: SpaceArg, max: u32) -> ValueSpace {
    match kind {
        SpaceArg::Binary => ValueSpace::Binary,
        SpaceArg::Bivalued => ValueSpace::Bivalued { max },
        SpaceArg::SmallInteger => ValueSpace::SmallInteger { max },
    }
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    /// identical-ef1, two-agent-ef1, prop-log or bivalued-prop2.
    #[arg(long)]
    algorithm: Algorithm,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum)]
    criterion: CriterionArg,
    #[arg(long)]
    c: usize,
    #[arg(long, value_enum, default_value = "agents")]
    perspective: PerspectiveArg,
    /// Bundles as JSON, e.g. `[[0,2],[1]]`, or `@path` to read them from a file.
    #[arg(long)]
    allocation: String,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct MaximizeArgs {
    #[arg(long)]
    instance: PathBuf,
    /// The agents' fairness constraint.
    #[arg(long, value_enum)]
    constraint: CriterionArg,
    #[arg(long)]
    c: usize,
    /// two-agent-ef, round-robin, lp-binary or dp-binary.
    #[arg(long)]
    method: Method,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct Enumeration {
    /// Worker threads for enumeration: 1 sequential, 0 all cores.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Largest number of allocations to enumerate; defaults to DUALFAIR_CAP or 10^7.
    #[arg(long)]
    cap: Option<u64>,
}

impl Enumeration {
    fn config(&self) -> OracleConfig {
        OracleConfig {
            cap: self.cap.unwrap_or_else(default_cap),
            jobs: self.jobs,
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum ObjectiveArg {
    AllocatorEfficiency,
    None,
}

#[derive(Subcommand, Debug)]
enum OracleCommand {
    /// Best allocator's efficiency (or any feasible allocation) under a constraint.
    Best {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum)]
        criterion: CriterionArg,
        #[arg(long)]
        c: usize,
        #[arg(long, value_enum, default_value = "agents")]
        perspective: PerspectiveArg,
        #[arg(long, value_enum, default_value = "allocator-efficiency")]
        objective: ObjectiveArg,
        #[command(flatten)]
        enumeration: Enumeration,
        #[command(flatten)]
        output: Output,
    },
    /// Whether one allocation is fair under every profile in a profiles file.
    Multi {
        /// JSON `{"profiles": [matrix, ...]}`.
        #[arg(long)]
        profiles: PathBuf,
        #[arg(long, value_enum)]
        criterion: CriterionArg,
        #[arg(long)]
        c: usize,
        #[command(flatten)]
        enumeration: Enumeration,
        #[command(flatten)]
        output: Output,
    },
    /// Look for instances with no doubly-fair allocation.
    Search {
        #[arg(long, value_enum)]
        space: SpaceArg,
        /// Largest value for bivalued and small-integer spaces.
        #[arg(long, default_value_t = 20)]
        max: u32,
        /// Agent counts, `N` or `LO..HI` (inclusive).
        #[arg(long)]
        agents: String,
        /// Item counts, `M` or `LO..HI` (inclusive).
        #[arg(long)]
        items: String,
        #[arg(long, value_enum)]
        criterion: CriterionArg,
        #[arg(long)]
        c: usize,
        /// Sweep every matrix pair instead of sampling.
        #[arg(long)]
        exhaustive: bool,
        /// Instance budget for an exhaustive sweep.
        #[arg(long, default_value_t = u64::MAX)]
        limit: u64,
        #[arg(long, default_value_t = 1000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        enumeration: Enumeration,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Subcommand, Debug)]
enum GraphCommand {
    /// The subset graph on `[n]`.
    Gamma {
        #[arg(long)]
        n: usize,
        /// Print DIMACS instead of the colouring.
        #[arg(long)]
        dimacs: bool,
        #[command(flatten)]
        output: Output,
    },
    /// The generalized Kneser graph K(n, k, s).
    Kneser {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        s: usize,
        #[arg(long)]
        dimacs: bool,
        #[command(flatten)]
        output: Output,
    },
    /// EF-1 failure sets of a two-agent instance as independent sets.
    Ef1Cover {
        #[arg(long)]
        instance: PathBuf,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Subcommand, Debug)]
enum GenCommand {
    /// A reduction gadget.
    Gadget {
        /// thm51_partition_ef, thm57_partition_prop, thm55_independent_set or thm66_triple.
        #[arg(long)]
        kind: GadgetKind,
        /// Partition values, comma separated, e.g. `1/2,1/2`.
        #[arg(long, value_delimiter = ',')]
        e: Vec<Rational>,
        /// Agent count for thm57_partition_prop.
        #[arg(long, default_value_t = 0)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        vertices: usize,
        /// Edges as `a-b`, comma separated.
        #[arg(long, value_delimiter = ',')]
        edges: Vec<String>,
        /// Emit a profiles file holding v, u and any extra profiles.
        #[arg(long)]
        profiles: bool,
        #[command(flatten)]
        output: Output,
    },
    /// A seeded random instance.
    Random {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        agents: usize,
        #[arg(long)]
        items: usize,
        #[arg(long, value_enum, default_value = "small-integer")]
        agents_space: SpaceArg,
        #[arg(long, value_enum, default_value = "small-integer")]
        allocator_space: SpaceArg,
        #[arg(long, default_value_t = 20)]
        max: u32,
        #[arg(long)]
        identical_allocator: bool,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Suite file, see the README for the format.
    #[arg(long)]
    suite: PathBuf,
    /// Per-run CSV; standard output gets the JSON summary.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

/// A list of valuation matrices over the same agents and items.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfilesFile {
    pub profiles: Vec<ValuationProfile>,
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<Instance, Failure> {
    parse_instance(&read(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable")
}

fn range(text: &str) -> Result<(usize, usize), Failure> {
    let bad = || Failure::Usage(format!("bad range `{text}`, expected N or LO..HI"));
    let parse = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    match text.split_once("..") {
        Some((lo, hi)) => {
            let (lo, hi) = (parse(lo)?, parse(hi.trim_start_matches('='))?);
            if lo > hi {
                return Err(bad());
            }
            Ok((lo, hi))
        }
        None => parse(text).map(|n| (n, n)),
    }
}

fn solve(args: &SolveArgs) -> Outcome {
    let instance = load_instance(&args.instance)?;
    args.algorithm.precondition(&instance).map_err(|e| {
        Failure::Usage(format!("instance does not fit algorithm `{}`: {e}", args.algorithm))
    })?;
    let allocation = args.algorithm.run(&instance).map_err(|e| match e {
        DoublyError::NotIdenticalAllocator | DoublyError::NotTwoAgents(_) | DoublyError::NotBivalued { .. } => {
            Failure::Usage(e.to_string())
        }
        other => Failure::Infeasible(other.to_string()),
    })?;
    let (criterion, c) = args.algorithm.guarantee(instance.n());
    let certificate = check_doubly(&instance, &allocation, criterion, c).expect("solver output matches the instance");
    let body = json!({
        "algorithm": args.algorithm,
        "allocation": allocation,
        "allocator_efficiency": allocator_efficiency(&instance, &allocation),
        "certificate": certificate,
    });
    let code = if certificate.verdict { EXIT_OK } else { EXIT_INFEASIBLE };
    Ok((pretty(&body), code))
}

fn check_cmd(args: &CheckArgs) -> Outcome {
    let instance = load_instance(&args.instance)?;
    let text = match args.allocation.strip_prefix('@') {
        Some(path) => read(Path::new(path))?,
        None => args.allocation.clone(),
    };
    let allocation = parse_allocation(&text).map_err(|e| Failure::Usage(format!("allocation: {e}")))?;
    let report = check(&instance, &allocation, args.criterion.into(), args.c, args.perspective.into())
        .map_err(|e| Failure::Usage(e.to_string()))?;
    Ok((report.to_json(), EXIT_OK))
}

fn maximize(args: &MaximizeArgs) -> Outcome {
    let instance = load_instance(&args.instance)?;
    let constraint: Criterion = args.constraint.into();
    if args.method.criterion() != constraint {
        return Err(Failure::Usage(format!(
            "method `{}` optimizes under {}, not {constraint}",
            args.method,
            args.method.criterion()
        )));
    }
    match args.method.run(&instance, args.c) {
        Ok(result) => Ok((pretty(&result), EXIT_OK)),
        Err(e @ (MaxEffError::NoFeasibleAllocation | MaxEffError::CertificateFailed)) => Err(Failure::Infeasible(e.to_string())),
        Err(e @ (MaxEffError::StateSpaceExceeded { .. } | MaxEffError::TooManyAgents { .. })) => Err(Failure::Cap(e.to_string())),
        Err(e) => Err(Failure::Usage(e.to_string())),
    }
}

fn oracle(cmd: &OracleCommand, stderr: &mut dyn Write) -> Outcome {
    match cmd {
        OracleCommand::Best {
            instance,
            criterion,
            c,
            perspective,
            objective,
            enumeration,
            ..
        } => {
            let instance = load_instance(instance)?;
            let constraint = FairnessConstraint {
                criterion: (*criterion).into(),
                c: *c,
                perspective: (*perspective).into(),
            };
            let objective = match objective {
                ObjectiveArg::AllocatorEfficiency => Objective::AllocatorEfficiency,
                ObjectiveArg::None => Objective::None,
            };
            match enumerate_best_with(&instance, constraint, objective, &enumeration.config())? {
                Some(best) => Ok((pretty(&json!({ "feasible": true, "result": best })), EXIT_OK)),
                None => Ok((pretty(&json!({ "feasible": false })), EXIT_INFEASIBLE)),
            }
        }
        OracleCommand::Multi {
            profiles,
            criterion,
            c,
            enumeration,
            ..
        } => {
            let file: ProfilesFile = serde_json::from_str(&read(profiles)?)
                .map_err(|e| Failure::Usage(format!("{}: {e}", profiles.display())))?;
            match exists_multi_fair_with(&file.profiles, (*criterion).into(), *c, &enumeration.config())? {
                Some(witness) => Ok((pretty(&json!({ "exists": true, "witness": witness })), EXIT_OK)),
                None => Ok((pretty(&json!({ "exists": false })), EXIT_INFEASIBLE)),
            }
        }
        OracleCommand::Search {
            space: kind,
            max,
            agents,
            items,
            criterion,
            c,
            exhaustive,
            limit,
            samples,
            seed,
            enumeration,
            ..
        } => {
            let config = SearchConfig {
                space: space(*kind, *max),
                agents: range(agents)?,
                items: range(items)?,
                criterion: (*criterion).into(),
                c: *c,
                mode: if *exhaustive {
                    SearchMode::Exhaustive { limit: *limit }
                } else {
                    SearchMode::Random {
                        seed: *seed,
                        samples: *samples,
                    }
                },
                cap: enumeration.cap.unwrap_or_else(default_cap),
                jobs: enumeration.jobs,
            };
            let report = search_counterexamples_with_progress(&config, &mut |count| {
                let _ = writeln!(stderr, "examined {count}");
            });
            Ok((report.to_json(), EXIT_OK))
        }
    }
}

fn graph_summary(graph: &Graph, dimacs: bool) -> Outcome {
    if dimacs {
        return Ok((graph.to_dimacs(), EXIT_OK));
    }
    let coloring = graph.chromatic_number()?;
    let body = json!({
        "vertices": graph.vertex_count(),
        "edges": graph.edge_count(),
        "chromatic_number": coloring.chi,
        "clique_number": coloring.clique_bound,
        "coloring": coloring.colors,
    });
    Ok((pretty(&body), EXIT_OK))
}

fn graph(cmd: &GraphCommand) -> Outcome {
    match cmd {
        GraphCommand::Gamma { n, dimacs, .. } => graph_summary(&Graph::gamma(*n)?, *dimacs),
        GraphCommand::Kneser { n, k, s, dimacs, .. } => {
            let g = Graph::kneser(*n, *k, *s)?;
            if *dimacs || !(s < k && k < n) {
                return graph_summary(&g, *dimacs);
            }
            let bound = check_kneser_lower_bound(*n, *k, *s)?;
            let (text, code) = graph_summary(&g, false)?;
            let mut body: serde_json::Value = serde_json::from_str(&text).expect("own output");
            body["lower_bound"] = json!(bound.bound);
            body["lower_bound_holds"] = json!(bound.holds);
            Ok((pretty(&body), code))
        }
        GraphCommand::Ef1Cover { instance, .. } => {
            let instance = load_instance(instance)?;
            let cover = non_ef1_independent_set(&instance, &Graph::gamma(instance.m())?)?;
            Ok((pretty(&cover), EXIT_OK))
        }
    }
}

fn parse_edge(text: &str) -> Result<(usize, usize), Failure> {
    let bad = || Failure::Usage(format!("bad edge `{text}`, expected a-b"));
    let (a, b) = text.split_once('-').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn gen(cmd: &GenCommand) -> Outcome {
    match cmd {
        GenCommand::Gadget {
            kind,
            e,
            n,
            vertices,
            edges,
            profiles,
            ..
        } => {
            let params = GadgetParams {
                e: e.clone(),
                n: *n,
                vertices: *vertices,
                edges: edges.iter().map(|t| parse_edge(t)).collect::<Result<_, _>>()?,
            };
            let gadget = build_gadget(*kind, &params).map_err(|e| Failure::Usage(e.to_string()))?;
            if *profiles {
                let mut all = vec![gadget.instance.v().clone(), gadget.instance.u().clone()];
                all.extend(gadget.extra_profiles);
                return Ok((pretty(&ProfilesFile { profiles: all }), EXIT_OK));
            }
            Ok((gadget.instance.to_json(), EXIT_OK))
        }
        GenCommand::Random {
            seed,
            agents,
            items,
            agents_space,
            allocator_space,
            max,
            identical_allocator,
            ..
        } => {
            if *agents == 0 {
                return Err(Failure::Usage("an instance needs at least one agent".into()));
            }
            let instance = random_sized_instance(
                *seed,
                (*agents, *agents),
                (*items, *items),
                space(*agents_space, *max),
                space(*allocator_space, *max),
                *identical_allocator,
            );
            Ok((instance.to_json(), EXIT_OK))
        }
    }
}

fn output_of(command: &Command) -> Option<&Path> {
    let out = match command {
        Command::Solve(a) => &a.output,
        Command::Check(a) => &a.output,
        Command::Maximize(a) => &a.output,
        Command::Bench(a) => &a.output,
        Command::Oracle(OracleCommand::Best { output, .. } | OracleCommand::Multi { output, .. } | OracleCommand::Search { output, .. }) => {
            output
        }
        Command::Graph(
            GraphCommand::Gamma { output, .. } | GraphCommand::Kneser { output, .. } | GraphCommand::Ef1Cover { output, .. },
        ) => output,
        Command::Gen(GenCommand::Gadget { output, .. } | GenCommand::Random { output, .. }) => output,
    };
    out.out.as_deref()
}

/// Runs one invocation, writing results to `stdout` (or `--out`) and
/// diagnostics to `stderr`. Returns the exit code.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    let outcome = match &cli.command {
        Command::Solve(a) => solve(a),
        Command::Check(a) => check_cmd(a),
        Command::Maximize(a) => maximize(a),
        Command::Oracle(cmd) => oracle(cmd, stderr),
        Command::Graph(cmd) => graph(cmd),
        Command::Gen(cmd) => gen(cmd),
        Command::Bench(a) => bench::run(&a.suite, a.csv.as_deref()),
    };
    match outcome {
        Ok((mut text, code)) => {
            if !text.ends_with('\n') {
                text.push('\n');
            }
            let written = match output_of(&cli.command) {
                Some(path) => fs::write(path, &text).map_err(|e| format!("cannot write {}: {e}", path.display())),
                None => stdout.write_all(text.as_bytes()).map_err(|e| e.to_string()),
            };
            match written {
                Ok(()) => code,
                Err(message) => {
                    let _ = writeln!(stderr, "error: {message}");
                    EXIT_USAGE
                }
            }
        }
        Err(failure) => {
            let _ = writeln!(stderr, "error: {}", failure.message());
            failure.code()
        }
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(range("3").unwrap(), (3, 3));
        assert_eq!(range("0..4").unwrap(), (0, 4));
        assert_eq!(range("1..=2").unwrap(), (1, 2));
        assert!(range("4..1").is_err());
        assert!(range("x").is_err());
    }

    #[test]
    fn edges() {
        assert_eq!(parse_edge("2-5").unwrap(), (2, 5));
        assert!(parse_edge("25").is_err());
    }

    #[test]
    fn usage_errors_exit_two() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(run_with(["dualfair", "solve"], &mut out, &mut err), EXIT_USAGE);
        assert_eq!(run_with(["dualfair", "frobnicate"], &mut out, &mut err), EXIT_USAGE);
        assert_eq!(run_with(["dualfair", "--help"], &mut out, &mut err), EXIT_OK);
    }
}
