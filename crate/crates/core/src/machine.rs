//! The base machine: a register machine with two oracle-read instructions and
//! a halting-query instruction, plus the step-bounded runner used by the
//! compiler.
//!
//! Registers hold naturals reduced modulo the program's register bound (256
//! unless the program says otherwise), so every program has finitely many
//! configurations per oracle and divergence can be certified by exact
//! configuration repetition. `DEC` on zero leaves zero. Input `n` is loaded
//! into `r0`; all other registers start at zero.
//!
//! `HALTQ p i -> d` asks whether program `regs[p]` halts on input `regs[i]`
//! and writes `0` into `d` for "halts" and `1` for "does not halt", the same
//! polarity as the halting-answer strings of [`FiniteAnswers`].

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::coding::{pair, BitOracle, BitString};

pub type Reg = usize;

pub const DEFAULT_REGISTER_BOUND: u64 = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Instr {
    Inc(Reg),
    Dec(Reg),
    /// Jump to the target if the register is zero.
    Jz(Reg, usize),
    /// Read bit `regs[addr]` of the first oracle `X` into `dst`.
    Oracle1 { addr: Reg, dst: Reg },
    /// Read bit `regs[addr]` of the second oracle `Y` into `dst`.
    Oracle2 { addr: Reg, dst: Reg },
    /// Halting query about program `regs[prog]` on input `regs[input]`.
    HaltQ { prog: Reg, input: Reg, dst: Reg },
    /// Latch `regs[r]` as the output value.
    Output(Reg),
    Halt,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProgramError {
    #[error("instruction {at}: jump target {target} outside program of length {len}")]
    BadJump { at: usize, target: usize, len: usize },
    #[error("register bound must be at least 2")]
    BadBound,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unknown program {0:?}")]
    UnknownProgram(String),
}

/// A validated machine program.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FeedbackProgram {
    instrs: Vec<Instr>,
    num_regs: usize,
    bound: Option<u64>,
}

impl FeedbackProgram {
    pub fn new(instrs: Vec<Instr>) -> Result<Self, ProgramError> {
        Self::with_bound(instrs, Some(DEFAULT_REGISTER_BOUND))
    }

    /// `bound = None` gives unbounded registers; divergence of such programs
    /// can still be certified whenever their configurations happen to repeat.
    pub fn with_bound(instrs: Vec<Instr>, bound: Option<u64>) -> Result<Self, ProgramError> {
        if matches!(bound, Some(b) if b < 2) {
            return Err(ProgramError::BadBound);
        }
        let len = instrs.len();
        let mut num_regs = 1;
        for (at, ins) in instrs.iter().enumerate() {
            let regs: &[Reg] = match ins {
                Instr::Inc(r) | Instr::Dec(r) | Instr::Output(r) => std::slice::from_ref(r),
                Instr::Jz(r, target) => {
                    if *target >= len {
                        return Err(ProgramError::BadJump { at, target: *target, len });
                    }
                    std::slice::from_ref(r)
                }
                Instr::Oracle1 { addr, dst } | Instr::Oracle2 { addr, dst } => &[*addr, *dst],
                Instr::HaltQ { prog, input, dst } => &[*prog, *input, *dst],
                Instr::Halt => &[],
            };
            for &r in regs {
                num_regs = num_regs.max(r + 1);
            }
        }
        Ok(FeedbackProgram { instrs, num_regs, bound })
    }

    pub fn instrs(&self) -> &[Instr] {
        &self.instrs
    }

    pub fn num_regs(&self) -> usize {
        self.num_regs
    }

    pub fn bound(&self) -> Option<u64> {
        self.bound
    }

    pub fn initial(&self, n: u64) -> MachineState {
        let mut regs = vec![0; self.num_regs];
        regs[0] = self.reduce(n);
        MachineState { pc: 0, regs, out: 0 }
    }

    fn reduce(&self, v: u64) -> u64 {
        match self.bound {
            Some(b) => v % b,
            None => v,
        }
    }

    /// The trivial program `[HALT]`, which also stands for every index outside
    /// a [`Library`].
    pub fn halt_only() -> Self {
        FeedbackProgram { instrs: vec![Instr::Halt], num_regs: 1, bound: Some(DEFAULT_REGISTER_BOUND) }
    }
}

/// Programs addressable by halting queries. Index `i` names `programs[i]`;
/// every index past the end names `[HALT]`.
#[derive(Clone, Debug, Default)]
pub struct Library {
    programs: Vec<FeedbackProgram>,
    names: Vec<String>,
}

static HALT_ONLY: std::sync::OnceLock<FeedbackProgram> = std::sync::OnceLock::new();

impl Library {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(p: FeedbackProgram) -> Self {
        let mut lib = Self::new();
        lib.push("main", p);
        lib
    }

    pub fn push(&mut self, name: impl Into<String>, p: FeedbackProgram) -> u64 {
        self.programs.push(p);
        self.names.push(name.into());
        (self.programs.len() - 1) as u64
    }

    pub fn get(&self, index: u64) -> &FeedbackProgram {
        self.programs
            .get(index as usize)
            .unwrap_or_else(|| HALT_ONLY.get_or_init(FeedbackProgram::halt_only))
    }

    pub fn len(&self) -> usize {
        self.programs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.programs.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<u64> {
        self.names.iter().position(|n| n == name).map(|i| i as u64)
    }

    /// Resolve a name, or a decimal index.
    pub fn resolve(&self, key: &str) -> Result<u64, ProgramError> {
        self.index_of(key)
            .or_else(|| key.parse().ok())
            .ok_or_else(|| ProgramError::UnknownProgram(key.into()))
    }

    pub fn name(&self, index: u64) -> Option<&str> {
        self.names.get(index as usize).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &FeedbackProgram)> {
        self.names.iter().map(String::as_str).zip(&self.programs)
    }
}

/// The part of a configuration that determines the future of a run.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MachineState {
    pub pc: usize,
    pub regs: Vec<u64>,
    pub out: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Query {
    Oracle1(u64),
    Oracle2(u64),
    Halting { prog: u64, input: u64 },
}

/// Answer to a halting query.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HaltAnswer {
    Halts,
    Diverges,
}

impl HaltAnswer {
    /// The answer-string bit: `0` believes the computation halts.
    pub fn bit(self) -> bool {
        matches!(self, HaltAnswer::Diverges)
    }

    pub fn from_bit(b: bool) -> Self {
        if b {
            HaltAnswer::Diverges
        } else {
            HaltAnswer::Halts
        }
    }

    pub fn symbol(self) -> char {
        match self {
            HaltAnswer::Halts => '↓',
            HaltAnswer::Diverges => '↑',
        }
    }
}

/// State plus the log of every query answered so far.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MachineConfig {
    pub state: MachineState,
    pub log: Vec<(Query, bool)>,
}

impl MachineConfig {
    pub fn initial(p: &FeedbackProgram, n: u64) -> Self {
        MachineConfig { state: p.initial(n), log: Vec::new() }
    }
}

/// Supplies answers to queries; `None` means "not known here".
pub trait AnswerProvider {
    fn oracle1(&self, k: u64) -> Option<bool>;
    fn oracle2(&self, k: u64) -> Option<bool>;
    fn halting(&self, prog: u64, input: u64) -> Option<HaltAnswer>;
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    Next(MachineState),
    Halted(u64),
    Pending(Query),
}

/// Resolve the query the instruction at `pc` would make, if any.
pub fn pending_query(p: &FeedbackProgram, s: &MachineState) -> Option<Query> {
    match p.instrs.get(s.pc)? {
        Instr::Oracle1 { addr, .. } => Some(Query::Oracle1(s.regs[*addr])),
        Instr::Oracle2 { addr, .. } => Some(Query::Oracle2(s.regs[*addr])),
        Instr::HaltQ { prog, input, .. } => {
            Some(Query::Halting { prog: s.regs[*prog], input: s.regs[*input] })
        }
        _ => None,
    }
}

/// Outcome of stepping a state in place.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepStatus {
    Continue,
    Halted(u64),
    /// The state is unchanged; the provider could not answer.
    Pending(Query),
}

/// One step, updating `s` in place. Running past the last instruction halts.
pub fn step_mut(p: &FeedbackProgram, s: &mut MachineState, answers: &impl AnswerProvider) -> StepStatus {
    let Some(&ins) = p.instrs.get(s.pc) else {
        return StepStatus::Halted(s.out);
    };
    match ins {
        Instr::Inc(r) => s.regs[r] = p.reduce(s.regs[r] + 1),
        Instr::Dec(r) => s.regs[r] = s.regs[r].saturating_sub(1),
        Instr::Jz(r, target) => {
            if s.regs[r] == 0 {
                s.pc = target;
                return StepStatus::Continue;
            }
        }
        Instr::Oracle1 { addr, dst } => {
            let k = s.regs[addr];
            match answers.oracle1(k) {
                Some(b) => s.regs[dst] = b as u64,
                None => return StepStatus::Pending(Query::Oracle1(k)),
            }
        }
        Instr::Oracle2 { addr, dst } => {
            let k = s.regs[addr];
            match answers.oracle2(k) {
                Some(b) => s.regs[dst] = b as u64,
                None => return StepStatus::Pending(Query::Oracle2(k)),
            }
        }
        Instr::HaltQ { prog, input, dst } => {
            let (e, m) = (s.regs[prog], s.regs[input]);
            match answers.halting(e, m) {
                Some(a) => s.regs[dst] = a.bit() as u64,
                None => return StepStatus::Pending(Query::Halting { prog: e, input: m }),
            }
        }
        Instr::Output(r) => s.out = s.regs[r],
        Instr::Halt => return StepStatus::Halted(s.out),
    }
    s.pc += 1;
    StepStatus::Continue
}

/// One step of the machine, returning the successor state.
pub fn step(p: &FeedbackProgram, s: &MachineState, answers: &impl AnswerProvider) -> Step {
    let mut next = s.clone();
    match step_mut(p, &mut next, answers) {
        StepStatus::Continue => Step::Next(next),
        StepStatus::Halted(v) => Step::Halted(v),
        StepStatus::Pending(q) => Step::Pending(q),
    }
}

/// Step a full configuration, appending any answered query to its log.
pub fn step_config(p: &FeedbackProgram, c: &MachineConfig, answers: &impl AnswerProvider) -> Result<MachineConfig, Step> {
    let query = pending_query(p, &c.state);
    match step(p, &c.state, answers) {
        Step::Next(state) => {
            let mut log = c.log.clone();
            if let Some(q) = query {
                let answer = match q {
                    Query::Oracle1(k) => answers.oracle1(k),
                    Query::Oracle2(k) => answers.oracle2(k),
                    Query::Halting { prog, input } => answers.halting(prog, input).map(HaltAnswer::bit),
                };
                log.push((q, answer.unwrap_or_default()));
            }
            Ok(MachineConfig { state, log })
        }
        other => Err(other),
    }
}

/// Finite second-oracle prefix `η` and halting-answer string `ν`, where
/// `ν[pair(a, b)]` is the believed answer about program `a` on input `b`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FiniteAnswers {
    pub eta: BitString,
    pub nu: BitString,
}

impl FiniteAnswers {
    pub fn new(eta: BitString, nu: BitString) -> Self {
        FiniteAnswers { eta, nu }
    }
}

struct FiniteProvider<'a, X> {
    x: &'a X,
    ans: &'a FiniteAnswers,
}

impl<X: BitOracle> AnswerProvider for FiniteProvider<'_, X> {
    fn oracle1(&self, k: u64) -> Option<bool> {
        Some(self.x.bit(k))
    }

    fn oracle2(&self, k: u64) -> Option<bool> {
        usize::try_from(k).ok().and_then(|k| self.ans.eta.get(k))
    }

    fn halting(&self, prog: u64, input: u64) -> Option<HaltAnswer> {
        usize::try_from(pair(prog, input)).ok().and_then(|k| self.ans.nu.get(k)).map(HaltAnswer::from_bit)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FiniteOutcome {
    /// Halted on step `steps` (1-based) with the given output.
    HaltedWithin { steps: u64, output: u64 },
    StillRunning,
    /// Step `step` (1-based) made a query outside `η` or `ν`.
    InvalidCall { step: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteRun {
    pub outcome: FiniteOutcome,
    /// Queries in the order they were answered.
    pub queries: Vec<Query>,
    /// States visited, starting with the initial one.
    pub states: Vec<MachineState>,
}

/// Run `f` on input `n` for at most `k` steps, answering the second oracle
/// from `η` and halting queries from `ν`.
pub fn run_finite(f: &FeedbackProgram, n: u64, x: &impl BitOracle, ans: &FiniteAnswers, k: u64) -> FiniteRun {
    let provider = FiniteProvider { x, ans };
    let mut state = f.initial(n);
    let mut queries = Vec::new();
    let mut states = vec![state.clone()];
    for t in 1..=k {
        let q = pending_query(f, &state);
        match step_mut(f, &mut state, &provider) {
            StepStatus::Continue => {
                queries.extend(q);
                states.push(state.clone());
            }
            StepStatus::Halted(output) => {
                return FiniteRun { outcome: FiniteOutcome::HaltedWithin { steps: t, output }, queries, states };
            }
            StepStatus::Pending(_) => {
                return FiniteRun { outcome: FiniteOutcome::InvalidCall { step: t }, queries, states };
            }
        }
    }
    FiniteRun { outcome: FiniteOutcome::StillRunning, queries, states }
}

/// The halting queries `(program, input)` of a run, in order.
pub fn halting_queries_of(run: &FiniteRun) -> Vec<(u64, u64)> {
    run.queries
        .iter()
        .filter_map(|q| match *q {
            Query::Halting { prog, input } => Some((prog, input)),
            _ => None,
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Text format
// ---------------------------------------------------------------------------

fn parse_reg(tok: &str, line: usize) -> Result<Reg, ProgramError> {
    tok.strip_prefix('r')
        .and_then(|d| d.parse().ok())
        .ok_or_else(|| ProgramError::Parse { line, msg: format!("expected register, found {tok:?}") })
}

/// Parse a single program. See [`parse_library`] for multi-program files.
pub fn parse_program(text: &str) -> Result<FeedbackProgram, ProgramError> {
    parse_program_lines(text.lines().enumerate().map(|(i, l)| (i + 1, l)))
}

fn parse_program_lines<'a>(lines: impl Iterator<Item = (usize, &'a str)>) -> Result<FeedbackProgram, ProgramError> {
    let mut bound = Some(DEFAULT_REGISTER_BOUND);
    let mut labels: HashMap<String, usize> = HashMap::new();
    let mut raw: Vec<(usize, Vec<String>)> = Vec::new();
    for (line, text) in lines {
        let text = text.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        if let Some(rest) = text.strip_prefix(".bound") {
            let rest = rest.trim();
            bound = if rest == "none" {
                None
            } else {
                Some(rest.parse().map_err(|_| ProgramError::Parse { line, msg: format!("bad bound {rest:?}") })?)
            };
            continue;
        }
        let mut body = text;
        while let Some((label, rest)) = body.split_once(':') {
            let label = label.trim();
            if label.is_empty() || !label.chars().all(|c| c.is_alphanumeric() || c == '_') {
                return Err(ProgramError::Parse { line, msg: format!("bad label {label:?}") });
            }
            if labels.insert(label.to_string(), raw.len()).is_some() {
                return Err(ProgramError::Parse { line, msg: format!("duplicate label {label:?}") });
            }
            body = rest.trim();
        }
        if body.is_empty() {
            continue;
        }
        let toks: Vec<String> = body.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()).map(String::from).collect();
        raw.push((line, toks));
    }
    let mut instrs = Vec::with_capacity(raw.len());
    for (line, toks) in &raw {
        let line = *line;
        let err = |msg: &str| ProgramError::Parse { line, msg: msg.to_string() };
        let op = toks[0].to_ascii_uppercase();
        let args: Vec<&str> = toks[1..].iter().map(String::as_str).filter(|t| *t != "->").collect();
        let want = |n: usize| if args.len() == n { Ok(()) } else { Err(err(&format!("{op} takes {n} operands"))) };
        let ins = match op.as_str() {
            "INC" => {
                want(1)?;
                Instr::Inc(parse_reg(args[0], line)?)
            }
            "DEC" => {
                want(1)?;
                Instr::Dec(parse_reg(args[0], line)?)
            }
            "JZ" => {
                want(2)?;
                let target = match labels.get(args[1]) {
                    Some(&t) => t,
                    None => args[1]
                        .strip_prefix('@')
                        .unwrap_or(args[1])
                        .parse()
                        .map_err(|_| err(&format!("unknown label {:?}", args[1])))?,
                };
                Instr::Jz(parse_reg(args[0], line)?, target)
            }
            "ORACLE1" | "ORACLE2" => {
                want(2)?;
                let (addr, dst) = (parse_reg(args[0], line)?, parse_reg(args[1], line)?);
                if op == "ORACLE1" {
                    Instr::Oracle1 { addr, dst }
                } else {
                    Instr::Oracle2 { addr, dst }
                }
            }
            "HALTQ" => {
                want(3)?;
                Instr::HaltQ { prog: parse_reg(args[0], line)?, input: parse_reg(args[1], line)?, dst: parse_reg(args[2], line)? }
            }
            "OUTPUT" => {
                want(1)?;
                Instr::Output(parse_reg(args[0], line)?)
            }
            "HALT" => {
                want(0)?;
                Instr::Halt
            }
            _ => return Err(err(&format!("unknown instruction {op:?}"))),
        };
        instrs.push(ins);
    }
    FeedbackProgram::with_bound(instrs, bound).map_err(|e| match e {
        ProgramError::BadJump { at, target, len } => {
            ProgramError::Parse { line: raw[at].0, msg: format!("jump target {target} outside program of length {len}") }
        }
        other => other,
    })
}

/// Parse a library: programs separated by `=== name` headers. A file with no
/// header is a single program called `main`.
pub fn parse_library(text: &str) -> Result<Library, ProgramError> {
    let mut lib = Library::new();
    let mut current: Option<(String, Vec<(usize, &str)>)> = None;
    let mut loose: Vec<(usize, &str)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if let Some(name) = line.trim().strip_prefix("===") {
            if let Some((n, body)) = current.take() {
                lib.push(n, parse_program_lines(body.into_iter())?);
            }
            current = Some((name.trim().to_string(), Vec::new()));
        } else if let Some((_, body)) = current.as_mut() {
            body.push((i + 1, line));
        } else {
            loose.push((i + 1, line));
        }
    }
    match current {
        Some((n, body)) => {
            if loose.iter().any(|(_, l)| !l.split('#').next().unwrap_or("").trim().is_empty()) {
                return Err(ProgramError::Parse { line: loose[0].0, msg: "instructions before the first `===` header".into() });
            }
            lib.push(n, parse_program_lines(body.into_iter())?);
        }
        None => {
            lib.push("main", parse_program_lines(loose.into_iter())?);
        }
    }
    Ok(lib)
}

impl fmt::Display for FeedbackProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.bound {
            Some(DEFAULT_REGISTER_BOUND) => {}
            Some(b) => writeln!(f, ".bound {b}")?,
            None => writeln!(f, ".bound none")?,
        }
        let mut targets: Vec<usize> = self.instrs.iter().filter_map(|i| if let Instr::Jz(_, t) = i { Some(*t) } else { None }).collect();
        targets.sort_unstable();
        targets.dedup();
        for (at, ins) in self.instrs.iter().enumerate() {
            if targets.binary_search(&at).is_ok() {
                writeln!(f, "L{at}:")?;
            }
            match ins {
                Instr::Inc(r) => writeln!(f, "  INC r{r}")?,
                Instr::Dec(r) => writeln!(f, "  DEC r{r}")?,
                Instr::Jz(r, t) => writeln!(f, "  JZ r{r} L{t}")?,
                Instr::Oracle1 { addr, dst } => writeln!(f, "  ORACLE1 r{addr} -> r{dst}")?,
                Instr::Oracle2 { addr, dst } => writeln!(f, "  ORACLE2 r{addr} -> r{dst}")?,
                Instr::HaltQ { prog, input, dst } => writeln!(f, "  HALTQ r{prog} r{input} -> r{dst}")?,
                Instr::Output(r) => writeln!(f, "  OUTPUT r{r}")?,
                Instr::Halt => writeln!(f, "  HALT")?,
            }
        }
        Ok(())
    }
}

impl Library {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (name, p) in self.iter() {
            out.push_str(&format!("=== {name}\n{p}"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::InfiniteBitSeq;

    struct Fixed;
    impl AnswerProvider for Fixed {
        fn oracle1(&self, _: u64) -> Option<bool> {
            Some(false)
        }
        fn oracle2(&self, _: u64) -> Option<bool> {
            Some(true)
        }
        fn halting(&self, _: u64, _: u64) -> Option<HaltAnswer> {
            None
        }
    }

    fn prog(text: &str) -> FeedbackProgram {
        parse_program(text).unwrap()
    }

    fn bits(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn immediate_halt() {
        let p = prog("HALT");
        assert_eq!(step(&p, &p.initial(0), &Fixed), Step::Halted(0));
    }

    #[test]
    fn loop_configs_distinct() {
        let p = prog("INC r0\nJZ r1 0");
        let mut s = p.initial(0);
        let mut seen = std::collections::HashSet::new();
        seen.insert(s.clone());
        for _ in 0..100 {
            s = match step(&p, &s, &Fixed) {
                Step::Next(n) => n,
                other => panic!("{other:?}"),
            };
            seen.insert(s.clone());
        }
        assert_eq!(seen.len(), 101);
    }

    #[test]
    fn oracle2_read_then_output() {
        // Y = |c:1: read Y(0) into r1, output it.
        let p = prog("ORACLE2 r0 -> r1\nOUTPUT r1\nHALT");
        let y: InfiniteBitSeq = "|c:1".parse().unwrap();
        struct Y<'a>(&'a InfiniteBitSeq);
        impl AnswerProvider for Y<'_> {
            fn oracle1(&self, _: u64) -> Option<bool> {
                None
            }
            fn oracle2(&self, k: u64) -> Option<bool> {
                Some(self.0.get(k))
            }
            fn halting(&self, _: u64, _: u64) -> Option<HaltAnswer> {
                None
            }
        }
        let mut s = p.initial(0);
        let mut steps = 0;
        let out = loop {
            steps += 1;
            match step(&p, &s, &Y(&y)) {
                Step::Next(n) => s = n,
                Step::Halted(v) => break v,
                Step::Pending(q) => panic!("{q:?}"),
            }
        };
        assert_eq!((out, steps), (1, 3));
    }

    #[test]
    fn bad_jump_rejected() {
        assert!(matches!(FeedbackProgram::new(vec![Instr::Jz(0, 5)]), Err(ProgramError::BadJump { .. })));
        assert!(matches!(parse_program("JZ r0 7\nHALT"), Err(ProgramError::Parse { line: 1, .. })));
    }

    #[test]
    fn pending_halting_query() {
        let p = prog("HALTQ r1 r0 -> r2\nHALT");
        assert_eq!(step(&p, &p.initial(4), &Fixed), Step::Pending(Query::Halting { prog: 0, input: 4 }));
    }

    #[test]
    fn registers_wrap_at_bound() {
        let p = prog(".bound 3\nINC r0\nINC r0\nINC r0\nHALT");
        let mut s = p.initial(0);
        for _ in 0..3 {
            s = match step(&p, &s, &Fixed) {
                Step::Next(n) => n,
                _ => unreachable!(),
            };
        }
        assert_eq!(s.regs[0], 0);
        let q = prog("DEC r0\nHALT");
        match step(&q, &q.initial(0), &Fixed) {
            Step::Next(n) => assert_eq!(n.regs[0], 0),
            _ => unreachable!(),
        }
    }

    #[test]
    fn run_finite_examples() {
        let x = InfiniteBitSeq::zeros();
        let halt = prog("HALT");
        let r = run_finite(&halt, 0, &x, &FiniteAnswers::new(bits(""), bits("")), 1);
        assert_eq!(r.outcome, FiniteOutcome::HaltedWithin { steps: 1, output: 0 });

        // read Y(3) with η = "01": invalid at step 4
        let reads3 = prog("INC r1\nINC r1\nINC r1\nORACLE2 r1 -> r2\nHALT");
        let r = run_finite(&reads3, 0, &x, &FiniteAnswers::new(bits("01"), bits("")), 5);
        assert_eq!(r.outcome, FiniteOutcome::InvalidCall { step: 4 });

        // one HALTQ about (0, 0) = pair index 0, answered 0 by ν, then output 7
        let mut text = String::from("HALTQ r1 r1 -> r2\n");
        for _ in 0..7 {
            text.push_str("INC r3\n");
        }
        text.push_str("OUTPUT r3\nHALT\n");
        let p = prog(&text);
        let r = run_finite(&p, 0, &x, &FiniteAnswers::new(bits(""), bits("0")), 10);
        // 1 query + 7 INC + OUTPUT + HALT = 10 steps
        assert_eq!(r.outcome, FiniteOutcome::HaltedWithin { steps: 10, output: 7 });
        assert_eq!(halting_queries_of(&r), vec![(0, 0)]);
        let r = run_finite(&p, 0, &x, &FiniteAnswers::new(bits(""), bits("0")), 9);
        assert_eq!(r.outcome, FiniteOutcome::StillRunning);
        let r = run_finite(&p, 0, &x, &FiniteAnswers::new(bits(""), bits("")), 9);
        assert_eq!(r.outcome, FiniteOutcome::InvalidCall { step: 1 });
    }

    #[test]
    fn halting_query_order() {
        // HALTQ(2,5) then HALTQ(2,6)
        let mut text = String::new();
        text.push_str("INC r1\nINC r1\n");
        for _ in 0..5 {
            text.push_str("INC r2\n");
        }
        text.push_str("HALTQ r1 r2 -> r3\nINC r2\nHALTQ r1 r2 -> r3\nHALT\n");
        let p = prog(&text);
        let nu = BitString::from_value(0, pair(2, 6) as usize + 1);
        let r = run_finite(&p, 0, &InfiniteBitSeq::zeros(), &FiniteAnswers::new(bits(""), nu), 100);
        assert_eq!(halting_queries_of(&r), vec![(2, 5), (2, 6)]);
        let no_q = run_finite(&prog("HALT"), 0, &InfiniteBitSeq::zeros(), &FiniteAnswers::new(bits(""), bits("")), 3);
        assert!(halting_queries_of(&no_q).is_empty());
    }

    #[test]
    fn text_round_trip() {
        let text = "start:\n  ORACLE2 r0 -> r1\n  JZ r1 start\n  HALTQ r2 r0 -> r3\n  OUTPUT r3\n  HALT\n";
        let p = prog(text);
        assert_eq!(prog(&p.to_string()), p);
        let lib = parse_library("=== a\nHALT\n=== b\nINC r0\nJZ r1 0\n").unwrap();
        assert_eq!(lib.len(), 2);
        assert_eq!(lib.index_of("b"), Some(1));
        let again = parse_library(&lib.to_text()).unwrap();
        assert_eq!(again.get(1), lib.get(1));
        assert_eq!(lib.get(99), &FeedbackProgram::halt_only());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        match parse_program("HALT\n# c\nFROB r1\n") {
            Err(ProgramError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_program("INC x"), Err(ProgramError::Parse { line: 1, .. })));
    }
}
