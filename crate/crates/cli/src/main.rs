//! `fbc`: command line front end for feedback machines, Borel codes, ITTMs,
//! ordinals and structure encodings.
//!
//! Exit status: 0 for a definite answer, 2 when some answer is undecided at
//! the given budget, 3 when a verification or harness check fails, 1 for
//! input errors.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use feedback_cantor::borel::{self, BorelCode, Decision, FlatBudget};
use feedback_cantor::coding::{BitString, InfiniteBitSeq};
use feedback_cantor::compile::{compile_codes, verify_sweep, Bounds, CompileError};
use feedback_cantor::feedback::{eval, eval_fun, tree_height, Budget, Verdict};
use feedback_cantor::ittm::{ittm_compute, ittm_run, IttmBudget, LookupTable, Outcome};
use feedback_cantor::machine::{parse_library, Library};
use feedback_cantor::ordinal::{add, Ordinal};
use feedback_cantor::structenc::{
    check_expansion_sample, check_reduction_sample, encode, feedback_nat, fixtures, HarnessConfig, NatError, Permutation,
    Presentation,
};
use feedback_cantor::Exec;

#[derive(Parser)]
#[command(name = "fbc", version, about = "Feedback machines on Cantor space")]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// Run sequentially instead of on the thread pool.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Tsv,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate one program at one input.
    Eval(EvalArgs),
    /// Evaluate one program at several inputs and reals.
    Evalfun(EvalFunArgs),
    /// Compile Borel codes for the sets where a program converges or diverges.
    Compile(CompileArgs),
    /// Membership, rank, complement and union of Borel codes.
    #[command(subcommand)]
    Borel(BorelCmd),
    /// Run infinite time Turing machines.
    #[command(subcommand)]
    Ittm(IttmCmd),
    /// Structure encodings and presentation harnesses.
    #[command(subcommand)]
    Struct(StructCmd),
    /// Ordinal notation arithmetic.
    #[command(subcommand)]
    Ordinal(OrdinalCmd),
}

#[derive(Args)]
struct ProgramArgs {
    /// Program or library file; `fixture:NAME` names a built-in structure program.
    program: String,
    /// Entry program, by name or index.
    #[arg(long, default_value = "0")]
    entry: String,
    /// Oracle X as `prefix|c:b` or `prefix|p:pattern`.
    #[arg(long, default_value = "|c:0")]
    x: String,
}

#[derive(Args)]
struct BudgetArgs {
    #[arg(long, default_value_t = 16)]
    depth: u32,
    #[arg(long, default_value_t = 200_000)]
    steps: u64,
    #[arg(long, default_value_t = 20_000_000)]
    configs: u64,
}

impl BudgetArgs {
    fn budget(&self) -> Result<Budget> {
        if self.depth == 0 || self.steps == 0 || self.configs == 0 {
            bail!("budgets must be positive");
        }
        Ok(Budget::new(self.depth, self.steps, self.configs))
    }
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    prog: ProgramArgs,
    #[arg(long, default_value = "|c:0")]
    y: String,
    #[arg(long, default_value_t = 0)]
    n: u64,
    #[command(flatten)]
    budget: BudgetArgs,
    /// Print the subcomputation tree.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct EvalFunArgs {
    #[command(flatten)]
    prog: ProgramArgs,
    /// Reals to sample, repeatable.
    #[arg(long = "y", default_value = "|c:0")]
    ys: Vec<String>,
    /// Inputs as `a..b` or a comma list.
    #[arg(long, default_value = "0..8")]
    ns: String,
    #[command(flatten)]
    budget: BudgetArgs,
}

#[derive(Args)]
struct CompileArgs {
    #[command(flatten)]
    prog: ProgramArgs,
    #[arg(long, default_value_t = 0)]
    n: u64,
    #[arg(long, default_value = "ε")]
    sigma: String,
    #[arg(long, default_value = "1")]
    alpha: String,
    #[arg(long = "L", default_value_t = 6)]
    l: usize,
    #[arg(long = "K", default_value_t = 64)]
    k: u64,
    #[arg(long = "V", default_value_t = 4096)]
    v: u64,
    /// Directory for the code files.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Check the codes against the evaluator on every prefix of length L.
    #[arg(long)]
    verify: bool,
    #[command(flatten)]
    budget: BudgetArgs,
}

#[derive(Subcommand)]
enum BorelCmd {
    /// Membership of a real in a code.
    Member {
        code: PathBuf,
        #[arg(long)]
        y: String,
    },
    /// Rank of a code, or a check of `rank <= alpha`.
    Rank {
        code: PathBuf,
        #[arg(long)]
        le: Option<String>,
    },
    /// Code for the complement.
    Neg { code: PathBuf },
    /// Code for the union.
    Cup {
        #[arg(required = true)]
        codes: Vec<PathBuf>,
    },
}

#[derive(Args)]
struct IttmBudgetArgs {
    #[arg(long, default_value_t = 100_000)]
    max_block: u64,
    #[arg(long, default_value_t = 20_000_000)]
    max_steps: u64,
}

impl IttmBudgetArgs {
    fn budget(&self) -> IttmBudget {
        IttmBudget { max_block_len: self.max_block, max_total_steps: self.max_steps }
    }
}

#[derive(Subcommand)]
enum IttmCmd {
    /// Run a table and dump the recorded history.
    Run {
        table: PathBuf,
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        beta: String,
        /// Cells holding 1, comma separated ordinals.
        #[arg(long, default_value = "")]
        tape: String,
        #[command(flatten)]
        budget: IttmBudgetArgs,
    },
    /// Run on interleaved input, output and parameter tracks.
    Compute {
        table: PathBuf,
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        beta: String,
        #[arg(long, default_value = "")]
        input: String,
        #[arg(long, default_value = "")]
        params: String,
        #[command(flatten)]
        budget: IttmBudgetArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum HarnessKind {
    Expansion,
    Reduction,
}

#[derive(Subcommand)]
enum StructCmd {
    /// Print the first bits of a presentation's encoding.
    Encode {
        presentation: PathBuf,
        #[arg(long, default_value_t = 64)]
        bits: u64,
        /// Move the structure along a permutation in cycle notation.
        #[arg(long)]
        permute: Option<String>,
    },
    /// Run a program on the product with (ω, <, n) and decode the number.
    Nat {
        program: String,
        presentation: PathBuf,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 16)]
        window: u64,
    },
    /// Sampling check over permuted copies of the source.
    Harness {
        #[arg(value_enum)]
        kind: HarnessKind,
        program: String,
        source: PathBuf,
        target: PathBuf,
        /// Permutations in cycle notation, separated by `;`.
        #[arg(long, default_value = "()")]
        perms: String,
        #[arg(long, default_value_t = 8)]
        window: u64,
    },
}

#[derive(Subcommand)]
enum OrdinalCmd {
    /// Compare two ordinals: prints <, = or >.
    Cmp { a: String, b: String },
    /// Ordinal sum.
    Add { a: String, b: String },
}

/// How a command ended, mapped onto the exit status.
enum Status {
    Definite,
    Unknown,
    Failed,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok((out, status)) => {
            print!("{out}");
            ExitCode::from(match status {
                Status::Definite => 0,
                Status::Unknown => 2,
                Status::Failed => 3,
            })
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_library(spec: &str) -> Result<Library> {
    if let Some(name) = spec.strip_prefix("fixture:") {
        return fixtures::program(name).with_context(|| format!("no fixture {name}; known: {}", fixtures::PROGRAMS.join(", ")));
    }
    let text = read(Path::new(spec))?;
    parse_library(&text).with_context(|| format!("parsing {spec}"))
}

fn seq(s: &str) -> Result<InfiniteBitSeq> {
    s.parse().with_context(|| format!("bad sequence {s:?}"))
}

fn ordinal(s: &str) -> Result<Ordinal> {
    s.parse().with_context(|| format!("bad ordinal {s:?}"))
}

fn ordinal_set(s: &str) -> Result<BTreeSet<Ordinal>> {
    s.split(',').map(str::trim).filter(|t| !t.is_empty()).map(ordinal).collect()
}

fn nat_set(s: &str) -> Result<BTreeSet<u64>> {
    s.split(',').map(str::trim).filter(|t| !t.is_empty()).map(|t| t.parse().with_context(|| format!("bad natural {t:?}"))).collect()
}

fn naturals(s: &str) -> Result<Vec<u64>> {
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().context("bad range start")?;
        let b: u64 = b.trim().parse().context("bad range end")?;
        return Ok((a..b).collect());
    }
    Ok(nat_set(s)?.into_iter().collect())
}

fn code(path: &Path) -> Result<BorelCode> {
    read(path)?.parse().with_context(|| format!("parsing {}", path.display()))
}

fn verdict_line(v: &Verdict, height: u64, format: Format) -> String {
    let (kind, value, steps, detail) = match v {
        Verdict::Converges { value, steps, .. } => ("CONVERGES", value.to_string(), steps.to_string(), String::new()),
        Verdict::Diverges(c) => ("DIVERGES", "-".into(), c.second.to_string(), format!("cycle {}..{}", c.first, c.second)),
        Verdict::Freezes(f) => {
            let (e, n) = f.path.last().copied().unwrap_or_default();
            let at = f.repeat_index().map(|i| format!(" first at depth {i}")).unwrap_or_default();
            ("FREEZE", "-".into(), "-".into(), format!("repeats ({e},{n}){at}"))
        }
        Verdict::Unknown(k) => ("UNKNOWN", "-".into(), "-".into(), format!("{k} budget")),
    };
    match format {
        Format::Tsv => format!("{kind}\t{value}\t{steps}\t{height}\t{detail}\n"),
        Format::Text => match v {
            Verdict::Converges { .. } => format!("{kind} {value} steps={steps} height={height}\n"),
            _ => format!("{kind} {detail} height={height}\n"),
        },
    }
}

fn run(cli: &Cli) -> Result<(String, Status)> {
    let exec = if cli.sequential { Exec::Sequential } else { Exec::Parallel };
    let format = cli.format;
    match &cli.cmd {
        Cmd::Eval(a) => {
            let lib = load_library(&a.prog.program)?;
            let e = lib.resolve(&a.prog.entry)?;
            let (x, y) = (seq(&a.prog.x)?, seq(&a.y)?);
            let (v, tree) = eval(&lib, e, &x, &y, a.n, a.budget.budget()?);
            let mut out = String::new();
            if format == Format::Tsv {
                out.push_str("verdict\tvalue\tsteps\theight\tdetail\n");
            }
            out.push_str(&verdict_line(&v, tree_height(&tree), format));
            if a.trace {
                out.push_str(&tree.dump());
            }
            Ok((out, if v.is_definite() { Status::Definite } else { Status::Unknown }))
        }
        Cmd::Evalfun(a) => {
            let lib = load_library(&a.prog.program)?;
            let e = lib.resolve(&a.prog.entry)?;
            let x = seq(&a.prog.x)?;
            let ns = naturals(&a.ns)?;
            let budget = a.budget.budget()?;
            let ys = a.ys.iter().map(|s| seq(s)).collect::<Result<Vec<_>>>()?;
            let samples = exec.map(&ys, |y| eval_fun(&lib, e, &x, y, &ns, budget));
            let mut out = String::from(if format == Format::Tsv { "y\tn\tverdict\tvalue\n" } else { "" });
            let mut unknown = false;
            for s in &samples {
                for (n, v) in &s.points {
                    unknown |= !v.is_definite();
                    let value = v.value().map(|x| x.to_string()).unwrap_or_else(|| "-".into());
                    match format {
                        Format::Tsv => out.push_str(&format!("{}\t{}\t{}\t{}\n", s.y, n, v.kind(), value)),
                        Format::Text => out.push_str(&format!("Y={} n={} {} {}\n", s.y, n, v.kind(), value)),
                    }
                }
            }
            Ok((out, if unknown { Status::Unknown } else { Status::Definite }))
        }
        Cmd::Compile(a) => compile(a, format, exec),
        Cmd::Borel(b) => borel_cmd(b),
        Cmd::Ittm(c) => ittm_cmd(c),
        Cmd::Struct(s) => struct_cmd(s, exec),
        Cmd::Ordinal(OrdinalCmd::Cmp { a, b }) => {
            let c = match ordinal(a)?.cmp(&ordinal(b)?) {
                std::cmp::Ordering::Less => "<",
                std::cmp::Ordering::Equal => "=",
                std::cmp::Ordering::Greater => ">",
            };
            Ok((format!("{c}\n"), Status::Definite))
        }
        Cmd::Ordinal(OrdinalCmd::Add { a, b }) => Ok((format!("{}\n", add(&ordinal(a)?, &ordinal(b)?)), Status::Definite)),
    }
}

fn compile(a: &CompileArgs, format: Format, exec: Exec) -> Result<(String, Status)> {
    let lib = load_library(&a.prog.program)?;
    let e = lib.resolve(&a.prog.entry)?;
    let x = seq(&a.prog.x)?;
    let sigma: BitString = a.sigma.parse().with_context(|| format!("bad prefix {:?}", a.sigma))?;
    let alpha = ordinal(&a.alpha)?;
    let bounds = Bounds { l: a.l, k: a.k, v: a.v };
    let codes = match compile_codes(&lib, e, a.n, &sigma, &alpha, &x, bounds) {
        Ok(c) => c,
        Err(err @ CompileError::InfiniteAlpha(_)) => bail!(err),
        Err(err) => return Ok((format!("BOUND VIOLATION {err}\n"), Status::Unknown)),
    };
    let mut out = String::new();
    let mut files = vec![("zeta_down".to_string(), &codes.down), ("zeta_up".to_string(), &codes.up)];
    files.extend(codes.down_j.iter().map(|(j, c)| (format!("zeta_down_{j}"), c)));
    for (name, c) in &files {
        out.push_str(&format!("{name}: rank {} dag {}\n", borel::rank(c), c.dag_size()));
    }
    if let Some(dir) = &a.out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for (name, c) in &files {
            let path = dir.join(format!("{name}.code"));
            fs::write(&path, format!("{c}\n")).with_context(|| format!("writing {}", path.display()))?;
        }
    }
    if !a.verify {
        return Ok((out, Status::Definite));
    }
    let report = verify_sweep(&lib, e, a.n, &x, &codes, a.l, a.budget.budget()?, exec);
    let alpha_n = codes.alpha;
    match format {
        Format::Tsv => out.push_str(&report.to_tsv()),
        Format::Text => {
            for r in &report.rows {
                let filtered = matches!(r.verdict, Verdict::Converges { .. } | Verdict::Diverges(_)) && r.height > alpha_n;
                let note = if filtered { " (height above alpha)" } else { "" };
                let mark = if r.agrees(&report.sigma, alpha_n) { "PASS" } else { "FAIL" };
                out.push_str(&format!("{mark} {} {} height={}{}\n", r.y, r.verdict.kind(), r.height, note));
            }
        }
    }
    let status = if report.rows.iter().any(|r| !r.verdict.is_definite()) {
        Status::Unknown
    } else if report.mismatches().is_empty() {
        Status::Definite
    } else {
        Status::Failed
    };
    Ok((out, status))
}

fn decision(d: Decision) -> (String, Status) {
    match d {
        Decision::Yes => ("yes\n".into(), Status::Definite),
        Decision::No => ("no\n".into(), Status::Definite),
        Decision::Unknown => ("unknown\n".into(), Status::Unknown),
    }
}

fn borel_cmd(b: &BorelCmd) -> Result<(String, Status)> {
    Ok(match b {
        BorelCmd::Member { code: path, y } => {
            let inside = borel::member(&code(path)?, &seq(y)?);
            (if inside { "in\n" } else { "out\n" }.into(), Status::Definite)
        }
        BorelCmd::Rank { code: path, le: None } => (format!("{}\n", borel::rank(&code(path)?)), Status::Definite),
        BorelCmd::Rank { code: path, le: Some(a) } => {
            decision(borel::check_rank_le(&borel::tree_to_flat(&code(path)?), &ordinal(a)?, &FlatBudget::default()))
        }
        BorelCmd::Neg { code: path } => (format!("{}\n", borel::neg(&code(path)?)), Status::Definite),
        BorelCmd::Cup { codes } => {
            let cs = codes.iter().map(|p| code(p)).collect::<Result<Vec<_>>>()?;
            (format!("{}\n", borel::cup(&cs)), Status::Definite)
        }
    })
}

fn table(path: &Path) -> Result<LookupTable> {
    read(path)?.parse().with_context(|| format!("parsing {}", path.display()))
}

fn ittm_cmd(c: &IttmCmd) -> Result<(String, Status)> {
    match c {
        IttmCmd::Run { table: path, alpha, beta, tape, budget } => {
            let t = table(path)?;
            let rec = ittm_run(&ordinal(alpha)?, &ordinal(beta)?, &ordinal_set(tape)?, &t, budget.budget(), true)?;
            let mut out = rec.dump();
            let status = match &rec.outcome {
                Outcome::Halted { time, output } => {
                    let cells: Vec<String> = output.iter().map(Ordinal::to_string).collect();
                    out.push_str(&format!("halted at {time} with tape {{{}}}\n", cells.join(", ")));
                    Status::Definite
                }
                Outcome::TimeExhausted => Status::Definite,
                Outcome::SpaceViolation(v) => {
                    out.push_str(&format!("{v}\n"));
                    Status::Definite
                }
                Outcome::SimulationUnknown { at, reason } => {
                    out.push_str(&format!("unknown from time {at}: {reason}\n"));
                    Status::Unknown
                }
            };
            Ok((out, status))
        }
        IttmCmd::Compute { table: path, alpha, beta, input, params, budget } => {
            let t = table(path)?;
            match ittm_compute(&t, &nat_set(input)?, &nat_set(params)?, &ordinal(alpha)?, &ordinal(beta)?, budget.budget()) {
                Ok(out) => {
                    let cells: Vec<String> = out.iter().map(u64::to_string).collect();
                    Ok((format!("{{{}}}\n", cells.join(", ")), Status::Definite))
                }
                Err(feedback_cantor::ittm::ComputeError::NoHalt(kind)) if kind == "unknown" => {
                    Ok(("unknown\n".into(), Status::Unknown))
                }
                Err(e) => Ok((format!("{e}\n"), Status::Definite)),
            }
        }
    }
}

fn presentation(path: &Path) -> Result<Presentation> {
    read(path)?.parse().with_context(|| format!("parsing {}", path.display()))
}

fn struct_cmd(s: &StructCmd, exec: Exec) -> Result<(String, Status)> {
    match s {
        StructCmd::Encode { presentation: path, bits, permute } => {
            let mut p = presentation(path)?;
            if let Some(pi) = permute {
                p = p.permute(&pi.parse::<Permutation>()?);
            }
            Ok((format!("{}\n", encode(&p)?.prefix(*bits)), Status::Definite))
        }
        StructCmd::Nat { program, presentation: path, n, window } => {
            let lib = load_library(program)?;
            match feedback_nat(&lib, 0, &presentation(path)?, *n, *window, HarnessConfig::default().budget) {
                Ok(m) => Ok((format!("{m}\n"), Status::Definite)),
                Err(NatError::Output(o)) if o.is_unknown() => Ok((format!("unknown: {o}\n"), Status::Unknown)),
                Err(e) => bail!(e),
            }
        }
        StructCmd::Harness { kind, program, source, target, perms, window } => {
            let lib = load_library(program)?;
            let (p0, p1) = (presentation(source)?, presentation(target)?);
            let perms = perms.split(';').map(|t| t.parse::<Permutation>()).collect::<Result<Vec<_>, _>>()?;
            let cfg = HarnessConfig { window: *window, exec, ..Default::default() };
            let report = match kind {
                HarnessKind::Expansion => check_expansion_sample(&lib, 0, &p0, &p1, &perms, &cfg)?,
                HarnessKind::Reduction => check_reduction_sample(&lib, 0, &p0, &p1, &perms, &cfg)?,
            };
            let status = if report.passed() {
                Status::Definite
            } else if report.failures().all(|f| f.result.as_ref().is_err_and(|e| e.is_unknown())) {
                Status::Unknown
            } else {
                Status::Failed
            };
            Ok((report.to_text(), status))
        }
    }
}
