//! Command-line front end for the `ptm` toolkit.
//!
//! Both binaries (`ptm` and `lopro`) are thin wrappers over [`run_ptm`] and
//! [`run_lopro`], which return the process exit code: 0 on success, 1 on a
//! user error (bad flags, malformed or missing input files, wrong input
//! length), 2 on an internal error.
//!
//! Bit strings on the command line follow the bitset convention: the last
//! character is flat position 0 of the row-major array and the first
//! character is the highest position. `--order row-major` switches to
//! first-character-is-position-0.

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use ptm::evolve::{self, GaConfig, LengthBounds, Task};
use ptm::format::{parse_machine, write_machine};
use ptm::lopro::{self, ElabOptions};
use ptm::{BitArray, Limits, Network, OnExceed};

/// A failed command, split by who is at fault.
#[derive(Debug)]
pub enum Failure {
    User(String),
    /// Located `file:line:col: error: ...` lines, printed as they are.
    Diagnostics(String),
    Internal(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::User(_) | Failure::Diagnostics(_) => 1,
            Failure::Internal(_) => 2,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::User(m) | Failure::Diagnostics(m) | Failure::Internal(m) => f.write_str(m),
        }
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn user(msg: impl Into<String>) -> Failure {
    Failure::User(msg.into())
}

/// Errors from the library are caused by the inputs the user handed us.
fn lib_err(context: &str) -> impl Fn(ptm::Error) -> Failure + '_ {
    move |e| user(format!("{context}: {e}"))
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| user(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> CliResult {
    fs::write(path, text)
        .map_err(|e| Failure::Internal(format!("cannot write {}: {e}", path.display())))
}

/// Writes to `path`, or to standard output when no path is given.
fn emit(path: Option<&Path>, text: &str) -> CliResult {
    match path {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "ptm",
    version,
    about = "Build, run and evolve perceptron Turing machines"
)]
struct PtmCli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a network from a machine file and write it as structured text.
    Build(BuildArgs),
    /// Evaluate a network on one input.
    Run(RunArgs),
    /// Run the genetic algorithm on a benchmark task.
    Evolve(EvolveArgs),
    /// Compile a Lopro source file.
    Compile(CompileArgs),
    /// Print the build report and depth of a network or machine.
    Inspect(SourceArgs),
    /// Export a network as structured text or Graphviz DOT.
    Export(ExportArgs),
}

#[derive(Args, Debug, Clone)]
struct LimitArgs {
    /// Stop after this many nodes.
    #[arg(long)]
    max_nodes: Option<usize>,
    /// Stop below this depth.
    #[arg(long)]
    max_depth: Option<usize>,
    /// Maximum outgoing links on any node.
    #[arg(long)]
    max_fanout: Option<usize>,
    /// Treat an exceeded limit as an error instead of keeping the partial network.
    #[arg(long)]
    fatal: bool,
}

impl LimitArgs {
    fn limits(&self) -> Limits {
        Limits {
            max_nodes: self.max_nodes,
            max_depth: self.max_depth,
            max_fanout: self.max_fanout,
            on_exceed: if self.fatal {
                OnExceed::Fail
            } else {
                OnExceed::Stop
            },
        }
    }
}

#[derive(Args, Debug)]
struct BuildArgs {
    /// Machine file in the `ptm v1` / `atm v1` text format.
    #[arg(short, long)]
    machine: PathBuf,
    #[command(flatten)]
    limits: LimitArgs,
    /// Output network file (standard output if omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BitOrder {
    /// Last character is flat position 0.
    Bitset,
    /// First character is flat position 0.
    RowMajor,
}

impl BitOrder {
    fn parse(self, dims: &[usize], s: &str) -> ptm::Result<BitArray> {
        match self {
            BitOrder::Bitset => BitArray::from_bitset_str(dims, s),
            BitOrder::RowMajor => BitArray::from_row_major_str(dims, s),
        }
    }

    fn show(self, bits: &BitArray) -> String {
        match self {
            BitOrder::Bitset => bits.to_bitset_string(),
            BitOrder::RowMajor => bits.to_row_major_string(),
        }
    }
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Network file written by `build` or `compile`.
    #[arg(short, long)]
    network: PathBuf,
    /// Input bits, for example `001101`.
    #[arg(short, long)]
    input: String,
    /// Character order of `--input` and of the printed output.
    #[arg(long, value_enum, default_value = "bitset")]
    order: BitOrder,
}

#[derive(Args, Debug)]
struct EvolveArgs {
    /// Benchmark task: exists, all, parity or transitive-closure.
    #[arg(long)]
    task: String,
    /// Task size (input bits, or vertices for transitive-closure).
    #[arg(long)]
    n: usize,
    /// Population size.
    #[arg(long, default_value_t = 100)]
    pop: usize,
    /// Number of generations.
    #[arg(long, default_value_t = 50)]
    gens: usize,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Genotype files copied into the initial population.
    #[arg(long = "seed-genotype")]
    seed_genotype: Vec<PathBuf>,
    /// Tournament size.
    #[arg(long, default_value_t = 3)]
    tournament: usize,
    /// Individuals copied unchanged into the next generation.
    #[arg(long, default_value_t = 1)]
    elitism: usize,
    /// Probability that a child comes from crossover.
    #[arg(long, default_value_t = 0.7)]
    crossover_rate: f64,
    /// Probability of a point mutation per child.
    #[arg(long, default_value_t = 0.8)]
    mutation_rate: f64,
    /// Probability of inserting a random gene per child.
    #[arg(long, default_value_t = 0.1)]
    insert_rate: f64,
    /// Probability of deleting a gene per child.
    #[arg(long, default_value_t = 0.1)]
    delete_rate: f64,
    /// Probability of reversing a gene segment per child.
    #[arg(long, default_value_t = 0.05)]
    inversion_rate: f64,
    /// Genes per random initial genotype.
    #[arg(long, default_value_t = 8)]
    initial_len: usize,
    /// Minimum program length.
    #[arg(long, default_value_t = 1)]
    min_len: usize,
    /// Maximum program length.
    #[arg(long, default_value_t = 64)]
    max_len: usize,
    /// Node limit per fitness build; exceeding it scores 0.
    #[arg(long, default_value_t = 5000)]
    max_nodes: usize,
    /// States in random genotypes (at least 2).
    #[arg(long, default_value_t = 4)]
    states: u32,
    /// Work tapes in random genotypes.
    #[arg(long, default_value_t = 1)]
    work_tapes: usize,
    /// Cells per work tape in random genotypes.
    #[arg(long, default_value_t = 2)]
    work_cells: usize,
    /// Worker threads for fitness evaluation (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// History CSV output (standard output if omitted).
    #[arg(long)]
    history: Option<PathBuf>,
    /// Best genotype output, in the machine file format.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Run manifest (JSON) output.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CompileArgs {
    /// Lopro source file.
    source: PathBuf,
    /// Lower to a raw machine file instead of building a network.
    #[arg(long)]
    lower: bool,
    /// Machine parameter, for example `n=6`; may be repeated.
    #[arg(short = 'D', long = "param", value_parser = parse_param)]
    params: Vec<(String, i64)>,
    /// Do not reuse work tapes of finished function calls.
    #[arg(long)]
    no_recycle: bool,
    #[command(flatten)]
    limits: LimitArgs,
    /// Output file (standard output if omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn parse_param(s: &str) -> Result<(String, i64), String> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected NAME=VALUE, got `{s}`"))?;
    let value = value
        .trim()
        .parse()
        .map_err(|_| format!("`{value}` is not an integer"))?;
    Ok((name.trim().to_string(), value))
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct Source {
    /// Network file.
    #[arg(short, long)]
    network: Option<PathBuf>,
    /// Machine file, built with the given limits.
    #[arg(short, long)]
    machine: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SourceArgs {
    #[command(flatten)]
    source: Source,
    #[command(flatten)]
    limits: LimitArgs,
}

#[derive(Args, Debug)]
struct ExportArgs {
    #[command(flatten)]
    from: SourceArgs,
    /// Write Graphviz DOT instead of structured text.
    #[arg(long)]
    dot: bool,
    /// Output file (standard output if omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs a `ptm` command.
pub fn run_ptm<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match PtmCli::try_parse_from(args) {
        Ok(cli) => report(|| dispatch(cli.command)),
        Err(e) => clap_exit(e),
    }
}

#[derive(Parser, Debug)]
#[command(name = "lopro", version, about = "Compile Lopro programs")]
struct LoproCli {
    #[command(subcommand)]
    command: LoproCommand,
}

#[derive(Subcommand, Debug)]
enum LoproCommand {
    /// Compile a source file to a network, or with `--lower` to a machine file.
    Compile(CompileArgs),
}

/// Parses `args` (including the program name) and runs a `lopro` command.
pub fn run_lopro<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match LoproCli::try_parse_from(args) {
        Ok(cli) => match cli.command {
            LoproCommand::Compile(a) => report(|| compile(&a)),
        },
        Err(e) => clap_exit(e),
    }
}

fn clap_exit(e: clap::Error) -> i32 {
    let _ = e.print();
    if e.use_stderr() {
        1
    } else {
        0
    }
}

/// Runs `f`, prints any failure, and maps it to an exit code. A panic is an
/// internal error.
fn report(f: impl FnOnce() -> CliResult) -> i32 {
    match std::panic::catch_unwind(std::panic::AssertUnwindSafe(f)) {
        Ok(Ok(())) => 0,
        Ok(Err(Failure::Diagnostics(d))) => {
            eprintln!("{d}");
            1
        }
        Ok(Err(failure)) => {
            eprintln!("error: {failure}");
            failure.exit_code()
        }
        Err(_) => 2,
    }
}

fn dispatch(command: Command) -> CliResult {
    match command {
        Command::Build(a) => build(&a),
        Command::Run(a) => run(&a),
        Command::Evolve(a) => evolve_cmd(&a),
        Command::Compile(a) => compile(&a),
        Command::Inspect(a) => inspect(&a),
        Command::Export(a) => export(&a),
    }
}

fn load_machine(path: &Path) -> CliResult<ptm::MachineSpec> {
    parse_machine(&read(path)?).map_err(|e| user(format!("{}: {e}", path.display())))
}

fn load_network(path: &Path) -> CliResult<Network> {
    Network::from_structured(&read(path)?).map_err(|e| user(format!("{}: {e}", path.display())))
}

fn build(a: &BuildArgs) -> CliResult {
    let machine = load_machine(&a.machine)?;
    let net = ptm::build(&machine, &a.limits.limits()).map_err(lib_err("build"))?;
    eprintln!("{}, depth {}", net.report, net.depth);
    emit(a.output.as_deref(), &net.to_structured())
}

fn run(a: &RunArgs) -> CliResult {
    let net = load_network(&a.network)?;
    let bits: usize = net.input_dims.iter().product();
    let input = a
        .order
        .parse(&net.input_dims, a.input.trim())
        .map_err(|e| {
            user(format!(
                "--input: {e}; the network expects input dims {:?} ({bits} bits)",
                net.input_dims
            ))
        })?;
    let output = ptm::evaluate(&net, &input).map_err(lib_err("run"))?;
    println!("{}", a.order.show(&output));
    Ok(())
}

fn load_source(s: &SourceArgs) -> CliResult<Network> {
    match (&s.source.network, &s.source.machine) {
        (Some(n), _) => load_network(n),
        (None, Some(m)) => {
            ptm::build(&load_machine(m)?, &s.limits.limits()).map_err(lib_err("build"))
        }
        (None, None) => Err(user("one of --network or --machine is required")),
    }
}

fn inspect(a: &SourceArgs) -> CliResult {
    let net = load_source(a)?;
    println!("flavor: {:?}", net.flavor);
    println!("input dims: {:?}", net.input_dims);
    println!("output dims: {:?}", net.output_dims);
    println!("report: {}", net.report);
    println!("depth: {}", net.depth);
    Ok(())
}

fn export(a: &ExportArgs) -> CliResult {
    let net = load_source(&a.from)?;
    let text = if a.dot {
        net.to_dot()
    } else {
        net.to_structured()
    };
    emit(a.output.as_deref(), &text)
}

fn compile(a: &CompileArgs) -> CliResult {
    let src = read(&a.source)?;
    let file = a.source.display().to_string();
    let opts = ElabOptions {
        params: a.params.clone(),
        recycle: !a.no_recycle,
    };
    let hl = lopro::compile(&src, &opts).map_err(|e| match e {
        ptm::Error::Lopro(diags) => Failure::Diagnostics(lopro::render_diagnostics(&file, &diags)),
        other => user(format!("{file}: {other}")),
    })?;
    if a.lower {
        let lowered = lopro::lower(&hl).map_err(|e| match e {
            ptm::Error::Lowering {
                state,
                span,
                construct,
            } => Failure::Diagnostics(format!(
                "{file}:{span}: error: cannot lower rule for state `{state}`: {construct}"
            )),
            other => user(format!("{file}: {other}")),
        })?;
        let text = write_machine(&lowered.machine, Some(&lowered.state_names));
        emit(a.output.as_deref(), &text)
    } else {
        let net = lopro::build_highlevel(&hl, &a.limits.limits()).map_err(lib_err("build"))?;
        eprintln!("{}, depth {}", net.report, net.depth);
        emit(a.output.as_deref(), &net.to_structured())
    }
}

fn evolve_cmd(a: &EvolveArgs) -> CliResult {
    let task = Task::from_name(&a.task, a.n).map_err(|e| user(format!("--task/--n: {e}")))?;
    let seeds = a
        .seed_genotype
        .iter()
        .map(|p| load_machine(p))
        .collect::<CliResult<Vec<_>>>()?;
    for (s, p) in seeds.iter().zip(&a.seed_genotype) {
        if s.header.input_dims() != task.input_dims()
            || s.header.output_dims() != task.output_dims()
        {
            return Err(user(format!(
                "{}: genotype dims {:?} -> {:?} do not fit task {task} ({:?} -> {:?})",
                p.display(),
                s.header.input_dims(),
                s.header.output_dims(),
                task.input_dims(),
                task.output_dims()
            )));
        }
    }
    let header = match seeds.first() {
        Some(s) => s.header.clone(),
        None => task
            .default_header(a.work_tapes, a.work_cells, a.states)
            .map_err(|e| user(format!("--work-tapes/--work-cells/--states: {e}")))?,
    };
    if a.min_len > a.max_len {
        return Err(user(format!(
            "--min-len {} exceeds --max-len {}",
            a.min_len, a.max_len
        )));
    }
    for (flag, p) in [
        ("--crossover-rate", a.crossover_rate),
        ("--mutation-rate", a.mutation_rate),
        ("--insert-rate", a.insert_rate),
        ("--delete-rate", a.delete_rate),
        ("--inversion-rate", a.inversion_rate),
    ] {
        if !(0.0..=1.0).contains(&p) {
            return Err(user(format!("{flag} must lie in [0, 1], got {p}")));
        }
    }
    let config = GaConfig {
        population: a.pop,
        generations: a.gens,
        tournament: a.tournament,
        elitism: a.elitism,
        crossover_rate: a.crossover_rate,
        mutation_rate: a.mutation_rate,
        insert_rate: a.insert_rate,
        delete_rate: a.delete_rate,
        inversion_rate: a.inversion_rate,
        initial_len: a.initial_len,
        bounds: LengthBounds {
            min: a.min_len,
            max: a.max_len,
        },
        limits: Limits::nodes(a.max_nodes, OnExceed::Fail),
        seed: a.seed,
        workers: a.workers,
    };
    let cases = task.cases();
    let result = evolve::run(&header, &cases, &seeds, &config).map_err(lib_err("evolve"))?;
    emit(a.history.as_deref(), &evolve::history_csv(&result.history))?;
    if let Some(p) = &a.output {
        write(p, &write_machine(&result.best, None))?;
    }
    if let Some(p) = &a.manifest {
        let manifest = serde_json::json!({
            "task": task.to_string(),
            "cases": cases.len(),
            "population": config.population,
            "generations": config.generations,
            "tournament": config.tournament,
            "elitism": config.elitism,
            "crossover_rate": config.crossover_rate,
            "mutation_rate": config.mutation_rate,
            "insert_rate": config.insert_rate,
            "delete_rate": config.delete_rate,
            "inversion_rate": config.inversion_rate,
            "initial_len": config.initial_len,
            "min_len": config.bounds.min,
            "max_len": config.bounds.max,
            "max_nodes": a.max_nodes,
            "seed": config.seed,
            "seed_genotypes": a.seed_genotype.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
            "best_fitness": result.best_fitness,
            "best_hash": evolve::genotype_hash(&result.best),
        });
        let text = serde_json::to_string_pretty(&manifest)
            .map_err(|e| Failure::Internal(e.to_string()))?;
        write(p, &(text + "\n"))?;
    }
    eprintln!(
        "best fitness {:.6} ({})",
        result.best_fitness,
        evolve::genotype_hash(&result.best)
    );
    Ok(())
}
