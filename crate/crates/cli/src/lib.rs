//! The `insitu` command-line tool.
//!
//! Exit codes: 0 success, 1 verification mismatch, 2 parse or usage error,
//! 3 precondition violation reported by a compiler.

pub mod formats;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use insitu_core::linmod::{self, MatrixMod, ModRing};
use insitu_core::minsim::{self, DotLabels};
use insitu_core::oracle::{self, Budget, Compiler, Sample, Universe};
use insitu_core::program::format_signature;
use insitu_core::{blockseq, random, Alphabet, InSituProgram, Mapping};

use formats::{ParseError, ProgramFile};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Parse { path: String, source: ParseError },
    #[error("{0}")]
    Usage(String),
    #[error("{}: {}", error_name(.0), .0)]
    Precondition(#[from] insitu_core::Error),
    #[error("verification failed")]
    Mismatch,
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Mismatch => 1,
            CliError::Parse { .. } | CliError::Usage(_) => 2,
            CliError::Precondition(_) => 3,
        }
    }
}

/// Variant name, e.g. `NotBijective`.
fn error_name(e: &insitu_core::Error) -> String {
    format!("{e:?}").chars().take_while(char::is_ascii_alphanumeric).collect()
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "insitu", version, about = "Compile mappings on S^n into in-situ programs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compile a mapping file (or a matrix file with --method linear).
    Compile(CompileArgs),
    /// Check a program against a mapping or matrix file.
    Verify(VerifyArgs),
    /// Minimal program length by breadth-first search.
    Oracle(OracleArgs),
    /// Invert a linear program or a boolean program computing a bijection.
    Invert(InvertArgs),
    /// Regroup a boolean program into registers of several bits.
    Regroup(RegroupArgs),
    /// Write a seeded random mapping, bijection or matrix.
    Random(RandomArgs),
    /// Run a compiler over all inputs or a seeded sample.
    Suite(SuiteArgs),
}

fn parse_method(s: &str) -> std::result::Result<Compiler, String> {
    s.parse()
}

#[derive(Debug, clap::Args)]
pub struct CompileArgs {
    pub input: PathBuf,
    /// benes, general5, general4-sorted, general4-flex or linear.
    #[arg(long, default_value = "general4-sorted", value_parser = parse_method)]
    pub method: Compiler,
    /// Program output path; stdout when absent.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Check the compiled program on every input.
    #[arg(long)]
    pub verify: bool,
    /// Write the routed network as Graphviz DOT.
    #[arg(long)]
    pub dot: Option<PathBuf>,
    /// Label DOT vertices by digits, most significant first.
    #[arg(long)]
    pub digits: bool,
    /// Block-tree swaps for general4-flex, as a string of 0/1 in heap order.
    #[arg(long)]
    pub choice: Option<String>,
}

#[derive(Debug, clap::Args)]
pub struct VerifyArgs {
    pub program: PathBuf,
    /// A mapping file, or a matrix file for linear programs.
    pub target: PathBuf,
    /// Read the target as a matrix file.
    #[arg(long)]
    pub matrix: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum UniverseArg {
    Full,
    Invertible,
}

#[derive(Debug, clap::Args)]
pub struct OracleArgs {
    pub input: PathBuf,
    #[arg(long, default_value_t = Budget::default().max_len)]
    pub max_len: usize,
    /// Maximum number of distinct mappings explored.
    #[arg(long, default_value_t = Budget::default().max_states)]
    pub budget: usize,
    #[arg(long, value_enum, default_value_t = UniverseArg::Full)]
    pub universe: UniverseArg,
}

#[derive(Debug, clap::Args)]
pub struct InvertArgs {
    pub program: PathBuf,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct RegroupArgs {
    pub program: PathBuf,
    /// Bits per register.
    #[arg(long)]
    pub group: usize,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RandomKind {
    Mapping,
    Bijection,
    Matrix,
}

#[derive(Debug, clap::Args)]
pub struct RandomArgs {
    #[arg(value_enum)]
    pub kind: RandomKind,
    pub s: usize,
    pub n: usize,
    /// ChaCha8 seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct SuiteArgs {
    #[arg(long, value_parser = parse_method)]
    pub method: Compiler,
    #[arg(long)]
    pub s: usize,
    #[arg(long)]
    pub n: usize,
    /// Number of random cases; every input when absent.
    #[arg(long)]
    pub sample: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn parsed<T>(path: &Path, r: std::result::Result<T, ParseError>) -> Result<T> {
    r.map_err(|source| CliError::Parse { path: path.display().to_string(), source })
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Usage(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Sizes beyond this are not drawn.
const DOT_LIMIT: usize = 4096;

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Compile(a) => compile(a),
        Command::Verify(a) => verify(a),
        Command::Oracle(a) => oracle_cmd(a),
        Command::Invert(a) => invert(a),
        Command::Regroup(a) => regroup(a),
        Command::Random(a) => random_cmd(a),
        Command::Suite(a) => suite(a),
    }
}

fn compile(args: &CompileArgs) -> Result<()> {
    let text = read(&args.input)?;
    let (program, file_text, verdict) = if args.method == Compiler::Linear {
        let m = parsed(&args.input, formats::parse_matrix(&text))?;
        let lp = linmod::decompose(&m);
        let prog = linmod::to_in_situ(&lp)?;
        let verdict = args.verify.then(|| oracle::check_matrix(&m, 100_000));
        let file_text = formats::write_linear_program(&lp);
        (prog, file_text, verdict)
    } else {
        let e = parsed(&args.input, formats::parse_mapping(&text))?;
        let prog = match (&args.choice, args.method) {
            (Some(bits), Compiler::General4Flex) => {
                let swaps = bits
                    .chars()
                    .map(|c| match c {
                        '0' => Ok(false),
                        '1' => Ok(true),
                        _ => Err(CliError::Usage(format!("--choice must be a 0/1 string, found {c:?}"))),
                    })
                    .collect::<Result<Vec<_>>>()?;
                blockseq::compile_4n_flexible(&e, Some(&swaps))?
            }
            (Some(_), _) => return Err(CliError::Usage("--choice applies to general4-flex only".into())),
            (None, method) => method.compile(&e)?,
        };
        let verdict = args.verify.then(|| check_program(&prog, &e));
        let file_text = formats::write_program(&prog);
        (prog, file_text, verdict)
    };

    emit(args.output.as_deref(), &file_text)?;
    if let Some(path) = &args.dot {
        if program.alphabet().size() > DOT_LIMIT {
            return Err(CliError::Usage(format!("index space too large to draw ({} vertices)", program.alphabet().size())));
        }
        let r = minsim::routing_of(&program);
        let labels = if args.digits { DotLabels::Digits } else { DotLabels::Index };
        let dot = minsim::export_dot(r.min(), Some(&r), labels);
        fs::write(path, dot).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    }
    eprintln!("length={}", program.len());
    eprintln!("signature={}", format_signature(&program.signature()));
    match verdict {
        None => Ok(()),
        Some(Ok(_)) => {
            eprintln!("result=ok");
            Ok(())
        }
        Some(Err(reason)) => {
            eprintln!("result=mismatch");
            eprintln!("reason={reason}");
            Err(CliError::Mismatch)
        }
    }
}

fn check_program(p: &InSituProgram, e: &Mapping) -> std::result::Result<usize, String> {
    if let Some(x) = counterexample(p, e) {
        return Err(format!("input {x} maps to {} instead of {}", p.execute_index(x), e.apply(x)));
    }
    let rep = minsim::verify(&minsim::routing_of(p), e).map_err(|err| err.to_string())?;
    if !rep.ok() {
        return Err("routing does not perform the mapping".into());
    }
    Ok(p.len())
}

fn counterexample(p: &InSituProgram, e: &Mapping) -> Option<usize> {
    let got = p.execute_all();
    e.alphabet().indices().find(|&x| got.apply(x) != e.apply(x))
}

fn verify(args: &VerifyArgs) -> Result<()> {
    let file = parsed(&args.program, formats::parse_program(&read(&args.program)?))?;
    let program = file.to_in_situ()?;
    let target_text = read(&args.target)?;
    let as_matrix = args.matrix || matches!(file, ProgramFile::Linear(_));
    println!("length={}", program.len());
    println!("signature={}", format_signature(&program.signature()));

    let ok = if as_matrix {
        let m = match formats::parse_matrix(&target_text) {
            Ok(m) => m,
            Err(_) if !args.matrix => {
                let e = parsed(&args.target, formats::parse_mapping(&target_text))?;
                return finish_mapping_check(&program, &e);
            }
            Err(err) => return parsed(&args.target, Err(err)),
        };
        verify_against_matrix(&program, &m)?
    } else {
        let e = parsed(&args.target, formats::parse_mapping(&target_text))?;
        return finish_mapping_check(&program, &e);
    };
    println!("result={}", if ok { "ok" } else { "mismatch" });
    if ok {
        Ok(())
    } else {
        Err(CliError::Mismatch)
    }
}

fn finish_mapping_check(program: &InSituProgram, e: &Mapping) -> Result<()> {
    if program.alphabet() != e.alphabet() {
        return Err(insitu_core::Error::AlphabetMismatch.into());
    }
    let rep = minsim::verify(&minsim::routing_of(program), e)?;
    println!("performs={}", rep.performs);
    println!("vertex_disjoint={}", rep.vertex_disjoint);
    println!("multicast_inverse={}", rep.multicast_inverse);
    println!("merge_profile={}", join(&rep.merge_profile));
    match counterexample(program, e) {
        None if rep.ok() => {
            println!("result=ok");
            Ok(())
        }
        found => {
            println!("result=mismatch");
            if let Some(x) = found {
                println!("counterexample={x} expected={} got={}", e.apply(x), program.execute_index(x));
            }
            Err(CliError::Mismatch)
        }
    }
}

fn verify_against_matrix(program: &InSituProgram, m: &MatrixMod) -> Result<bool> {
    let a = program.alphabet();
    if a.n() != m.n() || a.s() as u64 != m.ring().s() {
        return Err(insitu_core::Error::AlphabetMismatch.into());
    }
    let r = minsim::routing_of(program);
    if minsim::verify_linear(&r, m)? {
        return Ok(true);
    }
    // report the first unit vector (or zero) that goes astray
    let image = |x: usize| -> usize {
        let v: Vec<u64> = a.vector_of(x).expect("in range").into_iter().map(|d| d as u64).collect();
        let y: Vec<usize> = m.apply(&v).into_iter().map(|d| d as usize).collect();
        a.index_of(&y).expect("reduced")
    };
    let probes = std::iter::once(0).chain((0..a.n()).map(|j| a.pow(j)));
    let limit = if a.size() <= 100_000 { a.size() } else { 0 };
    if let Some(x) = probes.chain(0..limit).find(|&x| program.execute_index(x) != image(x)) {
        println!("counterexample={x} expected={} got={}", image(x), program.execute_index(x));
    }
    Ok(false)
}

fn oracle_cmd(args: &OracleArgs) -> Result<()> {
    let e = parsed(&args.input, formats::parse_mapping(&read(&args.input)?))?;
    let budget = Budget { max_len: args.max_len, max_states: args.budget };
    let universe = match args.universe {
        UniverseArg::Full => Universe::Full,
        UniverseArg::Invertible => Universe::Invertible,
    };
    let res = oracle::min_length_bfs(&e, &budget, &universe)?;
    println!("length={}", res.length);
    println!("states={}", res.states);
    println!("signature={}", format_signature(&res.witness.signature()));
    print!("{}", formats::write_program(&res.witness));
    Ok(())
}

fn invert(args: &InvertArgs) -> Result<()> {
    let file = parsed(&args.program, formats::parse_program(&read(&args.program)?))?;
    let inverse = match &file {
        ProgramFile::Linear(p) => ProgramFile::Linear(linmod::invert_linear_program(p)?),
        ProgramFile::Table(p) => ProgramFile::Table(p.reverse_boolean_bijection()?),
    };
    emit(args.output.as_deref(), &formats::write_program_file(&inverse))
}

fn regroup(args: &RegroupArgs) -> Result<()> {
    let file = parsed(&args.program, formats::parse_program(&read(&args.program)?))?;
    let grouped = file.to_in_situ()?.regroup(args.group)?;
    emit(args.output.as_deref(), &formats::write_program(&grouped))
}

fn random_cmd(args: &RandomArgs) -> Result<()> {
    let mut r = random::rng(args.seed);
    let text = match args.kind {
        RandomKind::Mapping => formats::write_mapping(&random::random_mapping(&Alphabet::new(args.s, args.n)?, &mut r)),
        RandomKind::Bijection => {
            formats::write_mapping(&random::random_bijection(&Alphabet::new(args.s, args.n)?, &mut r))
        }
        RandomKind::Matrix => {
            let ring = ModRing::new(args.s as u64)?;
            if args.n == 0 {
                return Err(CliError::Usage("n must be positive".into()));
            }
            formats::write_matrix(&random::random_matrix(&ring, args.n, &mut r))
        }
    };
    emit(args.output.as_deref(), &text)
}

fn suite(args: &SuiteArgs) -> Result<()> {
    let alphabet = Alphabet::new(args.s, args.n)?;
    let sample = match args.sample {
        Some(count) => Sample::Random { count, seed: args.seed },
        None => Sample::All,
    };
    let report = oracle::exhaustive_suite(&alphabet, args.method, sample)?;
    print!("{report}");
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::Mismatch)
    }
}

fn join(values: &[usize]) -> String {
    values.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

/// Applies `INSITU_THREADS` to the global worker pool.
pub fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("INSITU_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("INSITU_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}
